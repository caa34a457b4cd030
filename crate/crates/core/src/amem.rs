//! Associative memory: one bundled prototype per class, queried by minimum
//! Hamming distance.

use serde::{Deserialize, Serialize};

use crate::encoder::EncodedSample;
use crate::error::{Error, Result};
use crate::hv::{BundleAccumulator, Hypervector};

#[derive(Clone, Debug)]
pub struct AssociativeMemory {
    tiebreak: Hypervector,
    accumulators: Vec<BundleAccumulator>,
    prototypes: Vec<Hypervector>,
    finalized: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inference {
    pub class: usize,
    pub distances: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrototypeDump {
    pub dim: usize,
    pub classes: Vec<PrototypeRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrototypeRecord {
    pub class: usize,
    pub samples: u64,
    pub hex: String,
}

impl AssociativeMemory {
    pub fn new(num_classes: usize, tiebreak: Hypervector) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::InvalidArgument("need at least one class".into()));
        }
        let dim = tiebreak.dim();
        Ok(Self {
            tiebreak,
            accumulators: vec![BundleAccumulator::new(dim); num_classes],
            prototypes: Vec::new(),
            finalized: false,
        })
    }

    /// Trains and finalizes in one step.
    pub fn train<'a>(
        samples: impl IntoIterator<Item = &'a EncodedSample>,
        num_classes: usize,
        tiebreak: &Hypervector,
    ) -> Result<Self> {
        let mut am = Self::new(num_classes, tiebreak.clone())?;
        for s in samples {
            am.add(s)?;
        }
        am.finalize()?;
        Ok(am)
    }

    pub fn num_classes(&self) -> usize {
        self.accumulators.len()
    }

    pub fn dim(&self) -> usize {
        self.tiebreak.dim()
    }

    /// Adds a training sample. Any earlier prototypes become stale until the
    /// next [`finalize`](Self::finalize).
    pub fn add(&mut self, sample: &EncodedSample) -> Result<()> {
        let classes = self.accumulators.len();
        let acc = self
            .accumulators
            .get_mut(sample.label)
            .ok_or(Error::LabelOutOfRange {
                label: sample.label,
                classes,
            })?;
        acc.add(&sample.hv)?;
        self.finalized = false;
        Ok(())
    }

    /// Folds another shard's accumulators into this one.
    pub fn merge(&mut self, other: &AssociativeMemory) -> Result<()> {
        if other.num_classes() != self.num_classes() {
            return Err(Error::InvalidArgument(format!(
                "cannot merge {} classes into {}",
                other.num_classes(),
                self.num_classes()
            )));
        }
        for (a, b) in self.accumulators.iter_mut().zip(&other.accumulators) {
            a.merge(b)?;
        }
        self.finalized = false;
        Ok(())
    }

    pub fn finalize(&mut self) -> Result<()> {
        if let Some(empty) = self.accumulators.iter().position(BundleAccumulator::is_empty) {
            return Err(Error::EmptyClass(empty));
        }
        self.prototypes = self
            .accumulators
            .iter()
            .map(|acc| acc.finalize(&self.tiebreak))
            .collect::<Result<_>>()?;
        self.finalized = true;
        Ok(())
    }

    pub fn prototypes(&self) -> Result<&[Hypervector]> {
        if self.finalized {
            Ok(&self.prototypes)
        } else {
            Err(Error::NotFinalized)
        }
    }

    /// Nearest prototype by Hamming distance; ties go to the lowest class id.
    pub fn infer(&self, query: &Hypervector) -> Result<Inference> {
        let protos = self.prototypes()?;
        if query.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: query.dim(),
            });
        }
        let distances: Vec<usize> = protos.iter().map(|p| p.hamming_unchecked(query)).collect();
        let class = distances
            .iter()
            .enumerate()
            .min_by_key(|&(i, &d)| (d, i))
            .map(|(i, _)| i)
            .expect("at least one class");
        Ok(Inference { class, distances })
    }

    pub fn dump(&self) -> Result<PrototypeDump> {
        let protos = self.prototypes()?;
        Ok(PrototypeDump {
            dim: self.dim(),
            classes: protos
                .iter()
                .zip(&self.accumulators)
                .enumerate()
                .map(|(class, (p, acc))| PrototypeRecord {
                    class,
                    samples: acc.total(),
                    hex: p.to_hex(),
                })
                .collect(),
        })
    }
}
