//! Spatial encoding, modality fusion and temporal n-grams.
//!
//! A channel value selects the channel's positive or negative projection
//! vector by sign (zero counts as positive) and is bound to the channel's
//! item vector. Channel vectors are bundled per modality, modality vectors
//! are bundled into one fused vector (early fusion), and the last `N` fused
//! vectors are combined as
//! `SE_j ^ rho(SE_{j-1}) ^ ... ^ rho^(N-1)(SE_{j-N+1})`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::hv::{BundleAccumulator, Hypervector};
use crate::imstore::{ChannelSetRef, ChannelVectorSet, VectorProvider};

/// One scaled feature row.
#[derive(Clone, Copy, Debug)]
pub struct FeatureSample<'a> {
    pub values: &'a [f64],
    pub index: usize,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedSample {
    pub hv: Hypervector,
    pub label: usize,
    pub index: usize,
}

pub fn select_fp<'a>(set: ChannelSetRef<'a>, value: f64) -> &'a Hypervector {
    if value >= 0.0 {
        set.pfp
    } else {
        set.nfp
    }
}

pub fn encode_channel(set: &ChannelVectorSet, value: f64) -> Hypervector {
    let set = ChannelSetRef::from(set);
    set.im ^ select_fp(set, value)
}

/// Majority bundle of the modality's channel encodings.
pub fn encode_modality(
    sets: &[ChannelVectorSet],
    values: &[f64],
    tiebreak: &Hypervector,
) -> Result<Hypervector> {
    if sets.len() != values.len() {
        return Err(Error::InvalidArgument(format!(
            "{} channel sets for {} values",
            sets.len(),
            values.len()
        )));
    }
    if sets.is_empty() {
        return Err(Error::EmptyModality("<unnamed>".into()));
    }
    let mut acc = BundleAccumulator::new(tiebreak.dim());
    for (set, &v) in sets.iter().zip(values) {
        let set = ChannelSetRef::from(set);
        acc.add_bound(set.im, select_fp(set, v))?;
    }
    acc.finalize(tiebreak)
}

/// Equal-weight bundle of modality vectors.
pub fn fuse_early(modality_vectors: &[Hypervector], tiebreak: &Hypervector) -> Result<Hypervector> {
    crate::hv::bundle(modality_vectors, tiebreak)
}

/// Sliding window of the last `N` spatial vectors.
#[derive(Clone, Debug)]
pub struct NgramState {
    n: usize,
    history: VecDeque<Hypervector>,
}

impl NgramState {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n-gram length must be at least 1".into()));
        }
        Ok(Self {
            n,
            history: VecDeque::with_capacity(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn reset(&mut self) {
        self.history.clear();
    }

    /// Pushes `se` and returns the n-gram once `N` vectors are held.
    pub fn push(&mut self, se: Hypervector) -> Option<Hypervector> {
        self.history.push_back(se);
        if self.history.len() < self.n {
            return None;
        }
        let newest = self.history.len() - 1;
        let mut out = self.history[newest].clone();
        for age in 1..self.n {
            out = &out ^ &self.history[newest - age].permute(age as i64);
        }
        self.history.pop_front();
        Some(out)
    }
}

pub fn encode_temporal(state: &mut NgramState, se: Hypervector) -> Option<Hypervector> {
    state.push(se)
}

/// Reusable spatial encoder bound to one tie-break vector.
#[derive(Clone, Debug)]
pub struct Encoder {
    tiebreak: Hypervector,
    channel_acc: BundleAccumulator,
    fusion_acc: BundleAccumulator,
}

impl Encoder {
    pub fn new(tiebreak: Hypervector) -> Self {
        let dim = tiebreak.dim();
        Self {
            tiebreak,
            channel_acc: BundleAccumulator::new(dim),
            fusion_acc: BundleAccumulator::new(dim),
        }
    }

    pub fn tiebreak(&self) -> &Hypervector {
        &self.tiebreak
    }

    /// One bundled vector per modality, requesting channels in order.
    pub fn modality_vectors(
        &mut self,
        provider: &mut VectorProvider,
        values: &[f64],
    ) -> Result<Vec<Hypervector>> {
        if provider.dim() != self.tiebreak.dim() {
            return Err(Error::DimensionMismatch {
                left: self.tiebreak.dim(),
                right: provider.dim(),
            });
        }
        let layout = provider.layout();
        if values.len() != layout.total_channels() {
            return Err(Error::InvalidArgument(format!(
                "sample has {} values, layout has {} channels",
                values.len(),
                layout.total_channels()
            )));
        }
        let ranges: Vec<_> = (0..layout.num_modalities())
            .map(|m| layout.channel_range(m))
            .collect();
        if let Some(bad) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidArgument(format!("NaN feature value in channel {bad}")));
        }
        let mut out = Vec::with_capacity(ranges.len());
        for range in ranges {
            self.channel_acc.clear();
            for ch in range {
                let set = provider.get_channel_set(ch)?;
                let fp = select_fp(set, values[ch]);
                self.channel_acc.add_bound(set.im, fp)?;
            }
            out.push(self.channel_acc.finalize(&self.tiebreak)?);
        }
        Ok(out)
    }

    /// Early-fused spatial vector for one sample.
    pub fn fused(&mut self, provider: &mut VectorProvider, values: &[f64]) -> Result<Hypervector> {
        let modalities = self.modality_vectors(provider, values)?;
        if modalities.len() == 1 {
            return Ok(modalities.into_iter().next().expect("one modality"));
        }
        self.fusion_acc.clear();
        for hv in &modalities {
            self.fusion_acc.add(hv)?;
        }
        self.fusion_acc.finalize(&self.tiebreak)
    }

    /// Spatial encoding, fusion, then a single temporal encoder.
    pub fn encode_early(
        &mut self,
        provider: &mut VectorProvider,
        sample: FeatureSample<'_>,
        state: &mut NgramState,
    ) -> Result<Option<EncodedSample>> {
        let se = self.fused(provider, sample.values)?;
        Ok(state.push(se).map(|hv| EncodedSample {
            hv,
            label: sample.label,
            index: sample.index,
        }))
    }

    /// One temporal encoder per modality, then fusion of their outputs.
    /// Emits only when every modality's window is full.
    pub fn encode_late(
        &mut self,
        provider: &mut VectorProvider,
        sample: FeatureSample<'_>,
        states: &mut [NgramState],
    ) -> Result<Option<EncodedSample>> {
        let modalities = self.modality_vectors(provider, sample.values)?;
        if states.len() != modalities.len() {
            return Err(Error::InvalidArgument(format!(
                "{} n-gram states for {} modalities",
                states.len(),
                modalities.len()
            )));
        }
        let outputs: Vec<Option<Hypervector>> = modalities
            .into_iter()
            .zip(states.iter_mut())
            .map(|(hv, st)| st.push(hv))
            .collect();
        if outputs.iter().any(Option::is_none) {
            return Ok(None);
        }
        let outputs: Vec<Hypervector> = outputs.into_iter().flatten().collect();
        let hv = if outputs.len() == 1 {
            outputs.into_iter().next().expect("one modality")
        } else {
            crate::hv::bundle(&outputs, &self.tiebreak)?
        };
        Ok(Some(EncodedSample {
            hv,
            label: sample.label,
            index: sample.index,
        }))
    }
}

pub fn encode_sample_early(
    provider: &mut VectorProvider,
    tiebreak: &Hypervector,
    sample: FeatureSample<'_>,
    state: &mut NgramState,
) -> Result<Option<EncodedSample>> {
    Encoder::new(tiebreak.clone()).encode_early(provider, sample, state)
}

pub fn encode_sample_late(
    provider: &mut VectorProvider,
    tiebreak: &Hypervector,
    sample: FeatureSample<'_>,
    states: &mut [NgramState],
) -> Result<Option<EncodedSample>> {
    Encoder::new(tiebreak.clone()).encode_late(provider, sample, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imstore::{DatasetLayout, Strategy};
    use crate::seed::{self, Stream};

    fn rng_hv(dim: usize, s: u64) -> Hypervector {
        Hypervector::random(dim, &mut seed::rng(s, Stream::ItemMemory))
    }

    fn set(dim: usize, s: u64) -> ChannelVectorSet {
        ChannelVectorSet {
            im: rng_hv(dim, s),
            pfp: rng_hv(dim, s + 1000),
            nfp: rng_hv(dim, s + 2000),
        }
    }

    #[test]
    fn select_fp_by_sign() {
        let s = set(64, 1);
        let r = ChannelSetRef::from(&s);
        assert_eq!(select_fp(r, 0.7), &s.pfp);
        assert_eq!(select_fp(r, -0.3), &s.nfp);
        assert_eq!(select_fp(r, 0.0), &s.pfp);
        assert_eq!(select_fp(r, -0.0), &s.pfp);
    }

    #[test]
    fn encode_channel_properties() {
        let a = set(10_000, 1);
        let b = set(10_000, 2);
        let e = encode_channel(&a, 0.2);
        assert_eq!(&e ^ &a.pfp, a.im);
        assert_eq!(encode_channel(&a, 0.9), e);
        let d = encode_channel(&b, 0.2).normalized_hamming(&e).unwrap();
        assert!((0.45..=0.55).contains(&d), "{d}");
    }

    #[test]
    fn encode_modality_cases() {
        let t = rng_hv(512, 99);
        let a = set(512, 1);
        assert_eq!(encode_modality(std::slice::from_ref(&a), &[0.5], &t).unwrap(), encode_channel(&a, 0.5));
        let b = set(512, 2);
        let m = encode_modality(&[a.clone(), a.clone(), b], &[0.5, 0.5, -0.5], &t).unwrap();
        assert_eq!(m, encode_channel(&a, 0.5));
        assert!(encode_modality(&[], &[], &t).is_err());
    }

    #[test]
    fn modality_bundle_stays_similar_to_members() {
        let dim = 10_000;
        let t = rng_hv(dim, 5);
        let fresh = rng_hv(dim, 6);
        for k in [1usize, 2, 5, 17, 33] {
            let sets: Vec<_> = (0..k as u64).map(|s| set(dim, 10 + s)).collect();
            let values = vec![0.5; k];
            let m = encode_modality(&sets, &values, &t).unwrap();
            let to_fresh = m.hamming(&fresh).unwrap();
            for s in &sets {
                assert!(m.hamming(&encode_channel(s, 0.5)).unwrap() < to_fresh, "k={k}");
            }
        }
    }

    #[test]
    fn fuse_early_cases() {
        let t = rng_hv(256, 1);
        let a = rng_hv(256, 2);
        let b = rng_hv(256, 3);
        let c = rng_hv(256, 4);
        assert_eq!(fuse_early(std::slice::from_ref(&a), &t).unwrap(), a);
        assert_eq!(
            fuse_early(&[a.clone(), b.clone(), c.clone()], &t).unwrap(),
            fuse_early(&[c, a.clone(), b], &t).unwrap()
        );
        assert_eq!(fuse_early(&[a.clone(), a.clone(), a.clone()], &t).unwrap(), a);
    }

    #[test]
    fn temporal_expansion() {
        let a = rng_hv(300, 1);
        let b = rng_hv(300, 2);
        let c = rng_hv(300, 3);
        let mut one = NgramState::new(1).unwrap();
        assert_eq!(one.push(a.clone()), Some(a.clone()));

        let mut st = NgramState::new(3).unwrap();
        assert_eq!(st.push(a.clone()), None);
        assert_eq!(st.push(b.clone()), None);
        let expected = &(&c ^ &b.permute(1)) ^ &a.permute(2);
        assert_eq!(st.push(c.clone()), Some(expected));

        let mut st = NgramState::new(3).unwrap();
        let steady = &(&a ^ &a.permute(1)) ^ &a.permute(2);
        st.push(a.clone());
        st.push(a.clone());
        for _ in 0..4 {
            assert_eq!(st.push(a.clone()), Some(steady.clone()));
        }
        assert!(NgramState::new(0).is_err());
    }

    #[test]
    fn degenerate_pipeline_is_encode_channel() {
        let layout = DatasetLayout::new([("X", 1)]).unwrap();
        let mut p = VectorProvider::new(Strategy::Unoptimized, &layout, 256, 4).unwrap();
        let set = p.channel_sets().unwrap().remove(0);
        let t = rng_hv(256, 8);
        let mut st = NgramState::new(1).unwrap();
        for v in [0.4, -0.9, 0.0] {
            let out = encode_sample_early(
                &mut p,
                &t,
                FeatureSample {
                    values: &[v],
                    index: 0,
                    label: 0,
                },
                &mut st,
            )
            .unwrap()
            .unwrap();
            assert_eq!(out.hv, encode_channel(&set, v));
        }
    }

    #[test]
    fn late_equals_early_for_single_modality_or_unit_ngrams() {
        let t = rng_hv(512, 3);
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|r| (0..9).map(|c| if (r * 7 + c * 3) % 5 < 2 { -0.5 } else { 0.5 }).collect())
            .collect();
        for (layout, n) in [
            (DatasetLayout::new([("A", 9)]).unwrap(), 3),
            (DatasetLayout::new([("A", 2), ("B", 3), ("C", 4)]).unwrap(), 1),
        ] {
            let mut pe = VectorProvider::new(Strategy::Rule90, &layout, 512, 5).unwrap();
            let mut pl = pe.clone();
            let mut enc = Encoder::new(t.clone());
            let mut early = NgramState::new(n).unwrap();
            let mut late: Vec<_> = (0..layout.num_modalities())
                .map(|_| NgramState::new(n).unwrap())
                .collect();
            for (i, row) in rows.iter().enumerate() {
                let s = FeatureSample {
                    values: row,
                    index: i,
                    label: 0,
                };
                let e = enc.encode_early(&mut pe, s, &mut early).unwrap();
                let l = enc.encode_late(&mut pl, s, &mut late).unwrap();
                assert_eq!(e, l);
            }
        }
    }

    #[test]
    fn late_warmup_follows_longest_ngram() {
        let layout = DatasetLayout::new([("A", 3), ("B", 4), ("C", 5)]).unwrap();
        let mut p = VectorProvider::new(Strategy::SharedFp, &layout, 256, 1).unwrap();
        let mut enc = Encoder::new(rng_hv(256, 2));
        let mut states: Vec<_> = (0..3).map(|_| NgramState::new(4).unwrap()).collect();
        let row = vec![0.3; 12];
        let emitted: Vec<bool> = (0..6)
            .map(|i| {
                enc.encode_late(
                    &mut p,
                    FeatureSample {
                        values: &row,
                        index: i,
                        label: 1,
                    },
                    &mut states,
                )
                .unwrap()
                .is_some()
            })
            .collect();
        assert_eq!(emitted, vec![false, false, false, true, true, true]);
    }
}
