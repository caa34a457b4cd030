use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::FeatureTable;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SplitKind {
    /// One fold per subject; that subject's rows are the test set.
    LeaveOneSubjectOut,
    /// One fold per subject, trained and tested on that subject only; the
    /// last `ceil(fraction * segments)` segments are held out.
    PerSubjectHoldout(f64),
}

impl fmt::Display for SplitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitKind::LeaveOneSubjectOut => f.write_str("loso"),
            SplitKind::PerSubjectHoldout(frac) => write!(f, "holdout:{frac}"),
        }
    }
}

impl FromStr for SplitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "loso" {
            return Ok(SplitKind::LeaveOneSubjectOut);
        }
        let frac = s
            .strip_prefix("holdout:")
            .and_then(|f| f.parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown split {s:?} (expected loso or holdout:<fraction>)")))?;
        if !(frac > 0.0 && frac < 1.0) {
            return Err(Error::InvalidArgument(format!("holdout fraction {frac} outside (0, 1)")));
        }
        Ok(SplitKind::PerSubjectHoldout(frac))
    }
}

impl TryFrom<String> for SplitKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SplitKind> for String {
    fn from(k: SplitKind) -> Self {
        k.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub name: String,
    /// Row indices in table order.
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitPlan {
    pub kind: SplitKind,
    pub folds: Vec<Fold>,
}

/// Distinct values in order of first appearance.
fn ordered_unique<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = Vec::new();
    for it in items {
        if !seen.contains(&it) {
            seen.push(it);
        }
    }
    seen
}

pub fn make_splits(table: &FeatureTable, kind: SplitKind) -> Result<SplitPlan> {
    let subjects = ordered_unique(table.rows.iter().map(|r| r.subject.as_str()));
    let folds = match kind {
        SplitKind::LeaveOneSubjectOut => {
            if subjects.len() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "leave-one-subject-out needs at least 2 subjects, found {}",
                    subjects.len()
                )));
            }
            subjects
                .iter()
                .map(|&s| {
                    let (test, train): (Vec<usize>, Vec<usize>) =
                        (0..table.len()).partition(|&i| table.rows[i].subject == s);
                    Fold {
                        name: s.to_string(),
                        train,
                        test,
                    }
                })
                .collect()
        }
        SplitKind::PerSubjectHoldout(frac) => {
            if !(frac > 0.0 && frac < 1.0) {
                return Err(Error::InvalidArgument(format!("holdout fraction {frac} outside (0, 1)")));
            }
            let mut folds = Vec::new();
            for &s in &subjects {
                let rows: Vec<usize> = (0..table.len()).filter(|&i| table.rows[i].subject == s).collect();
                let segments = ordered_unique(rows.iter().map(|&i| table.rows[i].segment.as_str()));
                // The epsilon keeps products such as 0.2 * 40 from rounding up past 8.
                let n_test = (frac * segments.len() as f64 - 1e-9).ceil() as usize;
                if n_test == 0 || n_test >= segments.len() {
                    return Err(Error::InvalidArgument(format!(
                        "holdout fraction {frac} leaves subject {s} with {} of {} segments for testing",
                        n_test,
                        segments.len()
                    )));
                }
                let test_segments = &segments[segments.len() - n_test..];
                let (test, train): (Vec<usize>, Vec<usize>) = rows
                    .iter()
                    .partition(|&&i| test_segments.contains(&table.rows[i].segment.as_str()));
                folds.push(Fold {
                    name: s.to_string(),
                    train,
                    test,
                });
            }
            folds
        }
    };
    Ok(SplitPlan { kind, folds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datapipe::FeatureRow;
    use crate::imstore::DatasetLayout;

    fn table(subjects: usize, segments: usize, rows: usize) -> FeatureTable {
        let layout = DatasetLayout::new([("A", 1)]).unwrap();
        let mut out = Vec::new();
        for s in 0..subjects {
            for g in 0..segments {
                for _ in 0..rows {
                    out.push(FeatureRow {
                        subject: format!("s{s}"),
                        segment: format!("v{g}"),
                        valence_raw: 0.0,
                        arousal_raw: 0.0,
                        values: vec![0.0],
                    });
                }
            }
        }
        FeatureTable::new(layout, vec!["a".into()], out).unwrap()
    }

    #[test]
    fn loso_three_subjects() {
        let t = table(3, 2, 4);
        let plan = make_splits(&t, SplitKind::LeaveOneSubjectOut).unwrap();
        assert_eq!(plan.folds.len(), 3);
        for f in &plan.folds {
            assert_eq!(f.test.len(), 8);
            assert!(f.test.iter().all(|&i| t.rows[i].subject == f.name));
            let mut all: Vec<_> = f.train.iter().chain(&f.test).copied().collect();
            all.sort();
            assert_eq!(all, (0..24).collect::<Vec<_>>());
        }
    }

    #[test]
    fn loso_needs_two_subjects() {
        assert!(make_splits(&table(1, 2, 2), SplitKind::LeaveOneSubjectOut).is_err());
    }

    #[test]
    fn holdout_forty_segments() {
        let t = table(2, 40, 1);
        let plan = make_splits(&t, SplitKind::PerSubjectHoldout(0.2)).unwrap();
        assert_eq!(plan.folds.len(), 2);
        for f in &plan.folds {
            assert_eq!(f.test.len(), 8);
            assert_eq!(f.train.len(), 32);
        }
        let last: Vec<_> = plan.folds[0].test.iter().map(|&i| t.rows[i].segment.clone()).collect();
        assert_eq!(last, (32..40).map(|g| format!("v{g}")).collect::<Vec<_>>());
    }

    #[test]
    fn degenerate_fraction_rejected() {
        let t = table(1, 1, 5);
        assert!(make_splits(&t, SplitKind::PerSubjectHoldout(0.2)).is_err());
        assert!("holdout:1.5".parse::<SplitKind>().is_err());
        assert_eq!("holdout:0.2".parse::<SplitKind>().unwrap(), SplitKind::PerSubjectHoldout(0.2));
        assert_eq!("loso".parse::<SplitKind>().unwrap(), SplitKind::LeaveOneSubjectOut);
    }
}
