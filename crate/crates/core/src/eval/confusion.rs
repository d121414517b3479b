use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::ClassId;
use crate::error::{Error, Result};

/// Counts with rows indexed by predicted class and columns by target class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_ids: Vec<ClassId>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..self.class_ids.len()).map(|i| self.counts[i][i]).sum()
    }

    /// Fraction correct in [0, 1]; 0 for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.correct() as f64 / n as f64,
        }
    }

    fn row_sum(&self, i: usize) -> usize {
        self.counts[i].iter().sum()
    }

    fn col_sum(&self, j: usize) -> usize {
        self.counts.iter().map(|r| r[j]).sum()
    }

    /// Share of samples predicted as class `i` (by position) that were right.
    pub fn precision(&self, i: usize) -> Option<f64> {
        let n = self.row_sum(i);
        (n > 0).then(|| self.counts[i][i] as f64 / n as f64)
    }

    /// Share of samples of class `i` (by position) that were recovered.
    pub fn recall(&self, i: usize) -> Option<f64> {
        let n = self.col_sum(i);
        (n > 0).then(|| self.counts[i][i] as f64 / n as f64)
    }

    /// (K+1)×(K+1) table plus header row and label column; the last row and
    /// column hold the margins.
    pub fn to_csv(&self) -> String {
        let k = self.class_ids.len();
        let mut out = String::from("predicted\\target");
        for c in &self.class_ids {
            write!(out, ",{c}").unwrap();
        }
        out.push_str(",total\n");
        for i in 0..k {
            write!(out, "{}", self.class_ids[i]).unwrap();
            for v in &self.counts[i] {
                write!(out, ",{v}").unwrap();
            }
            writeln!(out, ",{}", self.row_sum(i)).unwrap();
        }
        out.push_str("total");
        for j in 0..k {
            write!(out, ",{}", self.col_sum(j)).unwrap();
        }
        writeln!(out, ",{}", self.total()).unwrap();
        out
    }
}

pub fn confusion_matrix(
    decisions: &[ClassId],
    targets: &[ClassId],
    class_ids: &[ClassId],
) -> Result<ConfusionMatrix> {
    if decisions.len() != targets.len() {
        return Err(Error::Shape(format!(
            "{} decisions but {} targets",
            decisions.len(),
            targets.len()
        )));
    }
    let position = |c: ClassId| {
        class_ids
            .iter()
            .position(|&k| k == c)
            .ok_or_else(|| Error::InvalidArgument(format!("class {c} is not one of {class_ids:?}")))
    };
    let k = class_ids.len();
    let mut counts = vec![vec![0; k]; k];
    for (&d, &t) in decisions.iter().zip(targets) {
        counts[position(d)?][position(t)?] += 1;
    }
    Ok(ConfusionMatrix {
        class_ids: class_ids.to_vec(),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn four_wrong_of_seventy() {
        let targets: Vec<ClassId> = (0..70).map(|i| i / 7 + 1).collect();
        let mut decisions = targets.clone();
        for (i, wrong) in [(3, 7), (20, 5), (41, 9), (66, 2)] {
            decisions[i] = wrong;
        }
        let ids: Vec<ClassId> = (1..=10).collect();
        let m = confusion_matrix(&decisions, &targets, &ids).unwrap();
        assert_eq!(m.correct(), 66);
        assert_eq!(format!("{:.1}", 100.0 * m.accuracy()), "94.3");
        // row = predicted 7, column = target 1
        assert_eq!(m.counts[6][0], 1);
        assert!((0..10).all(|j| m.col_sum(j) == 7));
    }

    #[test]
    fn all_right_and_all_wrong() {
        let ids = [1, 2, 3];
        let m = confusion_matrix(&[1, 2, 3], &[1, 2, 3], &ids).unwrap();
        assert_eq!(m.accuracy(), 1.0);
        assert_eq!(m.counts, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let m = confusion_matrix(&[2, 3, 1], &[1, 2, 3], &ids).unwrap();
        assert_eq!(m.accuracy(), 0.0);
        assert_eq!(m.precision(0), Some(0.0));
        assert!(confusion_matrix(&[1], &[1, 2], &ids).is_err());
        assert!(confusion_matrix(&[4], &[1], &ids).is_err());
    }

    #[test]
    fn csv_has_margins() {
        let m = confusion_matrix(&[1, 1, 2], &[1, 2, 2], &[1, 2]).unwrap();
        assert_eq!(m.to_csv(), "predicted\\target,1,2,total\n1,1,1,2\n2,0,1,1\ntotal,1,2,3\n");
        assert_eq!(m.recall(1), Some(0.5));
        assert_eq!(m.precision(1), Some(1.0));
    }

    proptest! {
        #[test]
        fn margins_match_counts(pairs in prop::collection::vec((1u32..=4, 1u32..=4), 0..60)) {
            let (d, t): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
            let m = confusion_matrix(&d, &t, &[1, 2, 3, 4]).unwrap();
            prop_assert_eq!(m.total(), pairs.len());
            for j in 0..4 {
                let expected = t.iter().filter(|&&c| c == j as u32 + 1).count();
                prop_assert_eq!(m.col_sum(j), expected);
            }
            let correct = pairs.iter().filter(|(a, b)| a == b).count();
            prop_assert_eq!(m.correct(), correct);
        }
    }
}
