//! Item-memory provisioning.
//!
//! A [`VectorProvider`] hands out the `{iM, PFP, NFP}` triple for each
//! feature channel under one of six storage strategies and keeps count of
//! how many vectors it holds and how many rule-90 generations it has
//! performed.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ca90::Ca90Stream;
use crate::error::{Error, Result};
use crate::hv::Hypervector;
use crate::seed::{self, Stream};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modality {
    pub name: String,
    pub channels: usize,
}

/// Ordered modalities, each with an ordered run of channels. Global channel
/// ids follow modality order, then channel order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Modality>", into = "Vec<Modality>")]
pub struct DatasetLayout {
    modalities: Vec<Modality>,
    offsets: Vec<usize>,
    total_channels: usize,
}

impl DatasetLayout {
    pub fn new<S: Into<String>>(modalities: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let modalities: Vec<Modality> = modalities
            .into_iter()
            .map(|(name, channels)| Modality {
                name: name.into(),
                channels,
            })
            .collect();
        Self::try_from(modalities)
    }

    /// GSR 32, ECG 77, EEG 105.
    pub fn amigos() -> Self {
        Self::new([("GSR", 32), ("ECG", 77), ("EEG", 105)]).expect("static layout")
    }

    /// EMG 10, EEG 192, GSR 7, BVP 17, respiration 12.
    pub fn deap() -> Self {
        Self::new([
            ("EMG", 10),
            ("EEG", 192),
            ("GSR", 7),
            ("BVP", 17),
            ("RESP", 12),
        ])
        .expect("static layout")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "amigos" => Some(Self::amigos()),
            "deap" => Some(Self::deap()),
            _ => None,
        }
    }

    pub fn modalities(&self) -> &[Modality] {
        &self.modalities
    }

    pub fn num_modalities(&self) -> usize {
        self.modalities.len()
    }

    pub fn total_channels(&self) -> usize {
        self.total_channels
    }

    /// Channel count of the largest modality.
    pub fn max_channels(&self) -> usize {
        self.modalities.iter().map(|m| m.channels).max().unwrap_or(0)
    }

    pub fn channel_range(&self, modality: usize) -> Range<usize> {
        let start = self.offsets[modality];
        start..start + self.modalities[modality].channels
    }

    /// `(modality index, position within modality)` of a global channel id.
    pub fn locate(&self, channel: usize) -> Result<(usize, usize)> {
        if channel >= self.total_channels {
            return Err(Error::ChannelOutOfRange {
                channel,
                total: self.total_channels,
            });
        }
        let m = self.offsets.partition_point(|&o| o <= channel) - 1;
        Ok((m, channel - self.offsets[m]))
    }
}

impl TryFrom<Vec<Modality>> for DatasetLayout {
    type Error = Error;

    fn try_from(modalities: Vec<Modality>) -> Result<Self> {
        if modalities.is_empty() {
            return Err(Error::InvalidArgument("layout needs at least one modality".into()));
        }
        let mut offsets = Vec::with_capacity(modalities.len());
        let mut total = 0;
        for m in &modalities {
            if m.channels == 0 {
                return Err(Error::EmptyModality(m.name.clone()));
            }
            offsets.push(total);
            total += m.channels;
        }
        for (i, m) in modalities.iter().enumerate() {
            if modalities[..i].iter().any(|o| o.name == m.name) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate modality name {:?}",
                    m.name
                )));
            }
        }
        Ok(Self {
            modalities,
            offsets,
            total_channels: total,
        })
    }
}

impl From<DatasetLayout> for Vec<Modality> {
    fn from(layout: DatasetLayout) -> Self {
        layout.modalities
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelVectorSet {
    pub im: Hypervector,
    pub pfp: Hypervector,
    pub nfp: Hypervector,
}

/// Borrowed view of a channel's triple, valid until the provider is asked
/// for the next channel.
#[derive(Clone, Copy, Debug)]
pub struct ChannelSetRef<'a> {
    pub im: &'a Hypervector,
    pub pfp: &'a Hypervector,
    pub nfp: &'a Hypervector,
}

impl ChannelSetRef<'_> {
    pub fn to_owned_set(&self) -> ChannelVectorSet {
        ChannelVectorSet {
            im: self.im.clone(),
            pfp: self.pfp.clone(),
            nfp: self.nfp.clone(),
        }
    }
}

impl<'a> From<&'a ChannelVectorSet> for ChannelSetRef<'a> {
    fn from(set: &'a ChannelVectorSet) -> Self {
        Self {
            im: &set.im,
            pfp: &set.pfp,
            nfp: &set.nfp,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderMetrics {
    pub stored_vectors: usize,
    pub vector_requests: u64,
    pub channels_served: u64,
}

impl ProviderMetrics {
    /// Rule-90 generations per channel served.
    pub fn request_rate(&self) -> Option<f64> {
        (self.channels_served > 0).then(|| self.vector_requests as f64 / self.channels_served as f64)
    }
}

/// Number of channel triples a bank of `v` vectors supports when every
/// `{iM, FP}` pair may be used once:
/// `sum_{n=1}^{v-2} floor((v - n) / 2)`.
pub fn tfc(v: usize) -> Result<usize> {
    if v < 3 {
        return Err(Error::BankTooSmall(v));
    }
    Ok((1..=v - 2).map(|n| (v - n) / 2).sum())
}

/// Smallest bank whose [`tfc`] covers `channels`.
pub fn min_bank_size(channels: usize) -> usize {
    // tfc(v) = floor((v-1)^2 / 4) grows quadratically, so a linear scan is short.
    (3..)
        .find(|&v| tfc(v).expect("v >= 3") >= channels)
        .expect("tfc is unbounded")
}

/// Index triples `[iM, PFP, NFP]` into a bank of `bank_len` vectors.
///
/// Bank vector `i` serves as iM with FP pairs `(i+1, i+2)`, `(i+3, i+4)`, ...
/// while both indices fit; `i` runs upward until `channels` triples exist.
pub fn combinatorial_indices(bank_len: usize, channels: usize) -> Result<Vec<[usize; 3]>> {
    let capacity = tfc(bank_len)?;
    if capacity < channels {
        return Err(Error::InsufficientBank {
            bank: bank_len,
            capacity,
            requested: channels,
            required: min_bank_size(channels),
        });
    }
    let mut out = Vec::with_capacity(channels);
    'outer: for im in 0..bank_len {
        let mut fp = im + 1;
        while fp + 1 < bank_len {
            if out.len() == channels {
                break 'outer;
            }
            out.push([im, fp, fp + 1]);
            fp += 2;
        }
    }
    debug_assert_eq!(out.len(), channels);
    Ok(out)
}

pub fn assign_combinatorial(bank: &[Hypervector], channels: usize) -> Result<Vec<ChannelVectorSet>> {
    Ok(combinatorial_indices(bank.len(), channels)?
        .into_iter()
        .map(|[i, p, n]| ChannelVectorSet {
            im: bank[i].clone(),
            pfp: bank[p].clone(),
            nfp: bank[n].clone(),
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    /// Three unique vectors per channel.
    Unoptimized,
    /// iM bank sized by the largest modality, reused positionally across
    /// modalities; unique FP pair per channel.
    SharedIm,
    /// iM bank as in `SharedIm`; one FP pair per modality.
    SharedFp,
    /// Smallest bank whose combinatorial pairs cover every channel.
    Combinatorial,
    /// FP pairs generated once per modality, iM generated per channel.
    Rule90,
    /// Rule-90 bursts of `bank_size` vectors, each burst consumed through
    /// combinatorial pairs.
    Hybrid { bank_size: usize },
}

impl Strategy {
    /// The five fixed strategies plus `hybrid` at the rule-90 storage budget.
    pub fn all_for(layout: &DatasetLayout) -> Vec<Strategy> {
        vec![
            Strategy::Unoptimized,
            Strategy::SharedIm,
            Strategy::SharedFp,
            Strategy::Combinatorial,
            Strategy::Rule90,
            Strategy::Hybrid {
                bank_size: 2 * layout.num_modalities() + 1,
            },
        ]
    }

    pub fn is_generative(&self) -> bool {
        matches!(self, Strategy::Rule90 | Strategy::Hybrid { .. })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Unoptimized => f.write_str("unoptimized"),
            Strategy::SharedIm => f.write_str("shared_im"),
            Strategy::SharedFp => f.write_str("shared_fp"),
            Strategy::Combinatorial => f.write_str("combinatorial"),
            Strategy::Rule90 => f.write_str("rule90"),
            Strategy::Hybrid { bank_size } => write!(f, "hybrid:{bank_size}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let strategy = match s.as_str() {
            "unoptimized" => Strategy::Unoptimized,
            "shared_im" => Strategy::SharedIm,
            "shared_fp" => Strategy::SharedFp,
            "combinatorial" => Strategy::Combinatorial,
            "rule90" => Strategy::Rule90,
            _ => {
                let size = s
                    .strip_prefix("hybrid:")
                    .or_else(|| s.strip_prefix("hybrid(").and_then(|r| r.strip_suffix(')')))
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy {s:?}")))?;
                let bank_size = size
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad hybrid bank size {size:?}")))?;
                Strategy::Hybrid { bank_size }
            }
        };
        if let Strategy::Hybrid { bank_size } = strategy {
            if bank_size < 3 {
                return Err(Error::BankTooSmall(bank_size));
            }
        }
        Ok(strategy)
    }
}

impl TryFrom<String> for Strategy {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> Self {
        s.to_string()
    }
}

/// Closed-form storage and request figures for one strategy on one layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalyticMetrics {
    pub stored_vectors: usize,
    /// Rule-90 generations needed to encode one sample.
    pub requests_per_pass: u64,
    pub channels: usize,
    /// Generations per fully used burst (0 for stored strategies).
    pub burst_requests: u64,
    /// Channels served by one fully used burst.
    pub burst_channels: u64,
}

impl AnalyticMetrics {
    /// Requests per channel while bursts are fully used.
    pub fn request_rate(&self) -> f64 {
        if self.burst_channels == 0 {
            0.0
        } else {
            self.burst_requests as f64 / self.burst_channels as f64
        }
    }

    /// Requests per channel over one complete sample, partial last burst
    /// included.
    pub fn pass_request_rate(&self) -> f64 {
        self.requests_per_pass as f64 / self.channels as f64
    }
}

pub fn analytic_metrics(strategy: Strategy, layout: &DatasetLayout) -> Result<AnalyticMetrics> {
    let c = layout.total_channels();
    let k = layout.max_channels();
    let m = layout.num_modalities();
    let stored = |stored_vectors| AnalyticMetrics {
        stored_vectors,
        requests_per_pass: 0,
        channels: c,
        burst_requests: 0,
        burst_channels: 0,
    };
    Ok(match strategy {
        Strategy::Unoptimized => stored(3 * c),
        Strategy::SharedIm => stored(k + 2 * c),
        Strategy::SharedFp => stored(k + 2 * m),
        Strategy::Combinatorial => stored(min_bank_size(c)),
        Strategy::Rule90 => AnalyticMetrics {
            stored_vectors: 2 * m + 1,
            requests_per_pass: c as u64,
            channels: c,
            burst_requests: 1,
            burst_channels: 1,
        },
        Strategy::Hybrid { bank_size } => {
            let per_burst = tfc(bank_size)?;
            let bursts = c.div_ceil(per_burst);
            AnalyticMetrics {
                stored_vectors: bank_size,
                requests_per_pass: (bank_size * bursts) as u64,
                channels: c,
                burst_requests: bank_size as u64,
                burst_channels: per_burst.min(c) as u64,
            }
        }
    })
}

#[derive(Clone, Debug)]
enum Source {
    Stored {
        bank: Vec<Hypervector>,
        sets: Vec<[usize; 3]>,
    },
    Rule90 {
        /// `[PFP_0, NFP_0, PFP_1, NFP_1, ...]` in layout order.
        fp: Vec<Hypervector>,
        stream: Ca90Stream,
        next: usize,
    },
    Hybrid {
        seed: Hypervector,
        stream: Ca90Stream,
        bank_size: usize,
        bank: Vec<Hypervector>,
        pattern: Vec<[usize; 3]>,
        used: usize,
        next: usize,
    },
}

/// Serves channel triples for one layout under one strategy.
///
/// Stored strategies answer any channel in any order. Rule-90 and hybrid
/// generate vectors on the fly and require channels `0, 1, 2, ...` within a
/// pass; asking for channel 0 restarts the pass, so every sample sees the
/// same vectors.
#[derive(Clone, Debug)]
pub struct VectorProvider {
    strategy: Strategy,
    layout: DatasetLayout,
    dim: usize,
    source: Source,
    metrics: ProviderMetrics,
    repeats: bool,
}

/// True if any vector is all-zero or equal to another. Rule 90 on a ring
/// whose length is a power of two dies out within `dim / 2` steps, so small
/// or power-of-two dimensions can trip this.
fn has_repeats(vectors: impl IntoIterator<Item = Hypervector>) -> bool {
    let mut seen = std::collections::HashSet::new();
    vectors
        .into_iter()
        .any(|hv| hv.is_zero() || !seen.insert(hv.words().to_vec()))
}

fn draw_ca_seed(dim: usize, rng: &mut impl rand::RngCore) -> Hypervector {
    loop {
        let hv = Hypervector::random(dim, rng);
        if !hv.is_zero() && !hv.is_all_ones() {
            return hv;
        }
    }
}

impl VectorProvider {
    pub fn new(strategy: Strategy, layout: &DatasetLayout, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut rng = seed::rng(seed, Stream::ItemMemory);
        let mut draw = |n: usize| -> Vec<Hypervector> {
            (0..n).map(|_| Hypervector::random(dim, &mut rng)).collect()
        };
        let c = layout.total_channels();
        let k = layout.max_channels();
        let m = layout.num_modalities();
        let positions: Vec<(usize, usize)> =
            (0..c).map(|ch| layout.locate(ch)).collect::<Result<_>>()?;

        let source = match strategy {
            Strategy::Unoptimized => Source::Stored {
                bank: draw(3 * c),
                sets: (0..c).map(|i| [3 * i, 3 * i + 1, 3 * i + 2]).collect(),
            },
            Strategy::SharedIm => Source::Stored {
                bank: draw(k + 2 * c),
                sets: positions
                    .iter()
                    .enumerate()
                    .map(|(ch, &(_, pos))| [pos, k + 2 * ch, k + 2 * ch + 1])
                    .collect(),
            },
            Strategy::SharedFp => Source::Stored {
                bank: draw(k + 2 * m),
                sets: positions
                    .iter()
                    .map(|&(md, pos)| [pos, k + 2 * md, k + 2 * md + 1])
                    .collect(),
            },
            Strategy::Combinatorial => {
                let v = min_bank_size(c);
                Source::Stored {
                    bank: draw(v),
                    sets: combinatorial_indices(v, c)?,
                }
            }
            Strategy::Rule90 => {
                let mut stream = Ca90Stream::new(draw_ca_seed(dim, &mut rng), seed)?;
                let fp = stream.burst(2 * m)?;
                let stream = Ca90Stream::new(fp[2 * m - 1].clone(), seed)?;
                Source::Rule90 { fp, stream, next: 0 }
            }
            Strategy::Hybrid { bank_size } => {
                let per_burst = tfc(bank_size)?;
                let seed_hv = draw_ca_seed(dim, &mut rng);
                Source::Hybrid {
                    stream: Ca90Stream::new(seed_hv.clone(), seed)?,
                    seed: seed_hv,
                    bank_size,
                    bank: Vec::new(),
                    pattern: combinatorial_indices(bank_size, per_burst)?,
                    used: 0,
                    next: 0,
                }
            }
        };
        let stored_vectors = analytic_metrics(strategy, layout)?.stored_vectors;
        let repeats = match &source {
            Source::Stored { bank, .. } => {
                debug_assert_eq!(bank.len(), stored_vectors);
                false
            }
            Source::Rule90 { fp, stream, .. } => {
                let mut s = stream.clone();
                has_repeats(fp.iter().cloned().chain((0..c).map(|_| s.next())))
            }
            Source::Hybrid { stream, pattern, bank_size, .. } => {
                let mut s = stream.clone();
                has_repeats((0..c.div_ceil(pattern.len()) * bank_size).map(|_| s.next()))
            }
        };
        if repeats {
            log::warn!(
                "{strategy} at D={dim} generates repeated or all-zero vectors within one pass; \
                 channel encodings will collide (odd dimensions avoid rule-90 die-out)"
            );
        }
        Ok(Self {
            strategy,
            layout: layout.clone(),
            dim,
            source,
            metrics: ProviderMetrics {
                stored_vectors,
                ..Default::default()
            },
            repeats,
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn layout(&self) -> &DatasetLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metrics(&self) -> ProviderMetrics {
        self.metrics
    }

    /// Whether one pass of a generative strategy produces a repeated or
    /// all-zero vector. Always false for stored strategies.
    pub fn has_repeats(&self) -> bool {
        self.repeats
    }

    pub fn get_channel_set(&mut self, channel: usize) -> Result<ChannelSetRef<'_>> {
        let total = self.layout.total_channels();
        if channel >= total {
            return Err(Error::ChannelOutOfRange { channel, total });
        }
        self.metrics.channels_served += 1;
        match &mut self.source {
            Source::Stored { bank, sets } => {
                let [i, p, n] = sets[channel];
                Ok(ChannelSetRef {
                    im: &bank[i],
                    pfp: &bank[p],
                    nfp: &bank[n],
                })
            }
            Source::Rule90 { fp, stream, next } => {
                if channel == 0 {
                    *stream = Ca90Stream::new(fp[fp.len() - 1].clone(), stream.seed_id())?;
                } else if channel != *next {
                    self.metrics.channels_served -= 1;
                    return Err(Error::OutOfOrder {
                        requested: channel,
                        expected: *next,
                    });
                }
                *next = channel + 1;
                let (modality, _) = self.layout.locate(channel)?;
                self.metrics.vector_requests += 1;
                let im = stream.advance();
                Ok(ChannelSetRef {
                    im,
                    pfp: &fp[2 * modality],
                    nfp: &fp[2 * modality + 1],
                })
            }
            Source::Hybrid {
                seed,
                stream,
                bank_size,
                bank,
                pattern,
                used,
                next,
            } => {
                if channel == 0 {
                    *stream = Ca90Stream::new(seed.clone(), stream.seed_id())?;
                    *used = pattern.len();
                } else if channel != *next {
                    self.metrics.channels_served -= 1;
                    return Err(Error::OutOfOrder {
                        requested: channel,
                        expected: *next,
                    });
                }
                *next = channel + 1;
                if *used == pattern.len() {
                    *bank = stream.burst(*bank_size)?;
                    self.metrics.vector_requests += bank.len() as u64;
                    *used = 0;
                }
                let [i, p, n] = pattern[*used];
                *used += 1;
                Ok(ChannelSetRef {
                    im: &bank[i],
                    pfp: &bank[p],
                    nfp: &bank[n],
                })
            }
        }
    }

    /// Owned triples for every channel, in channel order (one full pass).
    pub fn channel_sets(&mut self) -> Result<Vec<ChannelVectorSet>> {
        (0..self.layout.total_channels())
            .map(|ch| self.get_channel_set(ch).map(|s| s.to_owned_set()))
            .collect()
    }

    /// Metrics of one pass on an identically seeded fresh provider.
    pub fn dry_run(strategy: Strategy, layout: &DatasetLayout, dim: usize, seed: u64) -> Result<ProviderMetrics> {
        let mut p = Self::new(strategy, layout, dim, seed)?;
        for ch in 0..layout.total_channels() {
            p.get_channel_set(ch)?;
        }
        Ok(p.metrics())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    /// Pair-consumption oracle: walks every bank vector as iM and greedily
    /// takes unused partners two at a time, scanning upward.
    fn brute_force_tfc(v: usize) -> usize {
        let mut used = HashSet::new();
        let mut sets = 0;
        for im in 0..v {
            let mut free: Vec<usize> = (im + 1..v)
                .filter(|&o| !used.contains(&(im.min(o), im.max(o))))
                .collect();
            while free.len() >= 2 {
                let (a, b) = (free.remove(0), free.remove(0));
                used.insert((im, a));
                used.insert((im, b));
                sets += 1;
            }
        }
        sets
    }

    #[test]
    fn tfc_values() {
        assert_eq!(tfc(3).unwrap(), 1);
        assert_eq!(tfc(7).unwrap(), 9);
        assert_eq!(tfc(50).unwrap(), 600);
        assert_eq!(tfc(31).unwrap(), 225);
        assert_eq!(tfc(32).unwrap(), 240);
        assert!(matches!(tfc(2), Err(Error::BankTooSmall(2))));
    }

    #[test]
    fn tfc_matches_brute_force_and_closed_form() {
        for v in 3..=60 {
            assert_eq!(tfc(v).unwrap(), brute_force_tfc(v), "v={v}");
        }
        for v in 3..=500 {
            assert_eq!(tfc(v).unwrap(), (v - 1) * (v - 1) / 4, "v={v}");
        }
    }

    #[test]
    fn min_bank_sizes() {
        assert_eq!(min_bank_size(214), 31);
        assert_eq!(min_bank_size(238), 32);
        assert_eq!(min_bank_size(1), 3);
        assert_eq!(min_bank_size(9), 7);
        assert_eq!(min_bank_size(10), 8);
    }

    #[test]
    fn assignment_order() {
        assert_eq!(
            combinatorial_indices(7, 3).unwrap(),
            vec![[0, 1, 2], [0, 3, 4], [0, 5, 6]]
        );
        assert_eq!(combinatorial_indices(3, 1).unwrap(), vec![[0, 1, 2]]);
        let nine = combinatorial_indices(7, 9).unwrap();
        assert_eq!(
            nine,
            vec![
                [0, 1, 2],
                [0, 3, 4],
                [0, 5, 6],
                [1, 2, 3],
                [1, 4, 5],
                [2, 3, 4],
                [2, 5, 6],
                [3, 4, 5],
                [4, 5, 6]
            ]
        );
        let mut pairs = HashSet::new();
        for [i, p, n] in nine {
            assert!(pairs.insert((i.min(p), i.max(p))));
            assert!(pairs.insert((i.min(n), i.max(n))));
        }
        assert_eq!(pairs.len(), 18);
    }

    #[test]
    fn insufficient_bank_names_minimum() {
        let err = combinatorial_indices(7, 10).unwrap_err();
        match err {
            Error::InsufficientBank { required, capacity, .. } => {
                assert_eq!(required, 8);
                assert_eq!(capacity, 9);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_text_mentions_min(7, 10));
    }

    fn err_text_mentions_min(bank: usize, channels: usize) -> bool {
        combinatorial_indices(bank, channels)
            .unwrap_err()
            .to_string()
            .contains("min_bank_size")
    }

    #[test]
    fn layout_locate() {
        let l = DatasetLayout::amigos();
        assert_eq!(l.total_channels(), 214);
        assert_eq!(l.locate(0).unwrap(), (0, 0));
        assert_eq!(l.locate(31).unwrap(), (0, 31));
        assert_eq!(l.locate(32).unwrap(), (1, 0));
        assert_eq!(l.locate(213).unwrap(), (2, 104));
        assert!(l.locate(214).is_err());
        assert_eq!(DatasetLayout::deap().total_channels(), 238);
    }

    #[test]
    fn layout_rejects_degenerate() {
        assert!(DatasetLayout::new(Vec::<(String, usize)>::new()).is_err());
        assert!(DatasetLayout::new([("A", 0)]).is_err());
        assert!(DatasetLayout::new([("A", 1), ("A", 2)]).is_err());
    }

    #[test]
    fn strategy_parse_roundtrip() {
        for s in Strategy::all_for(&DatasetLayout::amigos()) {
            assert_eq!(s.to_string().parse::<Strategy>().unwrap(), s);
        }
        assert_eq!(
            "hybrid(11)".parse::<Strategy>().unwrap(),
            Strategy::Hybrid { bank_size: 11 }
        );
        assert!("hybrid:2".parse::<Strategy>().is_err());
        assert!("bogus".parse::<Strategy>().is_err());
    }

    #[test]
    fn generative_providers_reject_out_of_order() {
        let layout = DatasetLayout::new([("A", 4), ("B", 3)]).unwrap();
        for strategy in [Strategy::Rule90, Strategy::Hybrid { bank_size: 4 }] {
            let mut p = VectorProvider::new(strategy, &layout, 128, 1).unwrap();
            p.get_channel_set(0).unwrap();
            assert!(matches!(
                p.get_channel_set(2),
                Err(Error::OutOfOrder { requested: 2, expected: 1 })
            ));
            p.get_channel_set(1).unwrap();
            p.get_channel_set(0).unwrap();
        }
        let mut stored = VectorProvider::new(Strategy::Unoptimized, &layout, 128, 1).unwrap();
        stored.get_channel_set(5).unwrap();
        stored.get_channel_set(2).unwrap();
        assert!(stored.get_channel_set(7).is_err());
    }

    #[test]
    fn passes_repeat_identically() {
        let layout = DatasetLayout::new([("A", 5), ("B", 6)]).unwrap();
        for strategy in Strategy::all_for(&layout) {
            let mut p = VectorProvider::new(strategy, &layout, 256, 9).unwrap();
            let first = p.channel_sets().unwrap();
            let second = p.channel_sets().unwrap();
            assert_eq!(first, second, "{strategy}");
        }
    }

    #[test]
    fn hybrid_bursts_every_tfc_channels() {
        let layout = DatasetLayout::new([("A", 20)]).unwrap();
        let mut p = VectorProvider::new(Strategy::Hybrid { bank_size: 7 }, &layout, 256, 3).unwrap();
        let mut requests = Vec::new();
        for ch in 0..20 {
            p.get_channel_set(ch).unwrap();
            requests.push(p.metrics().vector_requests);
        }
        assert_eq!(requests[0], 7);
        assert_eq!(requests[8], 7);
        assert_eq!(requests[9], 14);
        assert_eq!(requests[18], 21);
        assert_eq!(requests[19], 21);
    }
}
