//! Confusion-matrix based classification metrics.

use std::fmt;

/// Row = true class, column = predicted class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<usize>, // classes x classes, row-major
}

/// Per-class precision/recall/F1. A class with no predictions and no
/// instances scores zero, the usual convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix { classes, counts: vec![0; classes * classes] }
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(classes: usize, pairs: I) -> Self {
        let mut m = Self::new(classes);
        for (truth, pred) in pairs {
            m.record(truth, pred);
        }
        m
    }

    pub fn record(&mut self, truth: usize, pred: usize) {
        assert!(truth < self.classes && pred < self.classes);
        self.counts[truth * self.classes + pred] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.classes, other.classes);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn count(&self, truth: usize, pred: usize) -> usize {
        self.counts[truth * self.classes + pred]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let trace: usize = (0..self.classes).map(|k| self.count(k, k)).sum();
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            trace as f64 / total as f64
        }
    }

    pub fn class_scores(&self, class: usize) -> ClassScores {
        let tp = self.count(class, class);
        let actual: usize = (0..self.classes).map(|p| self.count(class, p)).sum();
        let predicted: usize = (0..self.classes).map(|t| self.count(t, class)).sum();
        let precision = if predicted == 0 { 0.0 } else { tp as f64 / predicted as f64 };
        let recall = if actual == 0 { 0.0 } else { tp as f64 / actual as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassScores { precision, recall, f1, support: actual }
    }

    /// Unweighted mean of per-class F1.
    pub fn macro_f1(&self) -> f64 {
        let sum: f64 = (0..self.classes).map(|k| self.class_scores(k).f1).sum();
        sum / self.classes as f64
    }

    /// Support-weighted mean of per-class F1.
    pub fn weighted_f1(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        (0..self.classes)
            .map(|k| {
                let s = self.class_scores(k);
                s.f1 * s.support as f64
            })
            .sum::<f64>()
            / total as f64
    }
}

impl fmt::Display for ConfusionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in 0..self.classes {
            for p in 0..self.classes {
                if p > 0 {
                    write!(f, "\t")?;
                }
                write!(f, "{}", self.count(t, p))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Full evaluation summary over a test set.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub per_class: Vec<ClassScores>,
    pub confusion: ConfusionMatrix,
}

impl EvalReport {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Self {
        let per_class = (0..confusion.classes()).map(|k| confusion.class_scores(k)).collect();
        EvalReport {
            accuracy: confusion.accuracy(),
            macro_f1: confusion.macro_f1(),
            weighted_f1: confusion.weighted_f1(),
            per_class,
            confusion,
        }
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "accuracy={:.4} macro_f1={:.4} weighted_f1={:.4}",
            self.accuracy, self.macro_f1, self.weighted_f1
        )?;
        for (k, s) in self.per_class.iter().enumerate() {
            writeln!(
                f,
                "class {k}: precision={:.4} recall={:.4} f1={:.4} support={}",
                s.precision, s.recall, s.f1, s.support
            )?;
        }
        write!(f, "confusion (rows=truth):\n{}", self.confusion)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictor() {
        let m = ConfusionMatrix::from_pairs(2, (0..10).map(|i| (i % 2, i % 2)));
        assert_eq!(m.accuracy(), 1.0);
        assert_eq!(m.macro_f1(), 1.0);
    }

    #[test]
    fn single_class_predictor_on_balanced_binary() {
        let m = ConfusionMatrix::from_pairs(2, (0..10).map(|i| (i % 2, 0)));
        assert_eq!(m.accuracy(), 0.5);
    }

    #[test]
    fn hand_computed_three_class_case() {
        // counts[truth][pred] = [[2,0,0],[0,1,1],[1,0,1]]
        let mut m = ConfusionMatrix::new(3);
        for _ in 0..2 {
            m.record(0, 0);
        }
        m.record(1, 1);
        m.record(1, 2);
        m.record(2, 0);
        m.record(2, 2);
        assert!((m.accuracy() - 4.0 / 6.0).abs() < 1e-15);
        // per-class F1: 0.8, 2/3, 0.5 -> macro 0.65555...
        assert!((m.class_scores(0).f1 - 0.8).abs() < 1e-12);
        assert!((m.class_scores(1).f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.class_scores(2).f1 - 0.5).abs() < 1e-12);
        assert!((m.macro_f1() - (0.8 + 2.0 / 3.0 + 0.5) / 3.0).abs() < 1e-12);
        let expected_weighted = (0.8 * 2.0 + (2.0 / 3.0) * 2.0 + 0.5 * 2.0) / 6.0;
        assert!((m.weighted_f1() - expected_weighted).abs() < 1e-12);
    }

    #[test]
    fn empty_class_scores_zero() {
        let m = ConfusionMatrix::from_pairs(3, [(0, 0), (1, 1)]);
        let s = m.class_scores(2);
        assert_eq!((s.precision, s.recall, s.f1, s.support), (0.0, 0.0, 0.0, 0));
    }

    #[test]
    fn merge_adds_counts() {
        let a = ConfusionMatrix::from_pairs(2, [(0, 0), (1, 0)]);
        let mut b = ConfusionMatrix::from_pairs(2, [(1, 1)]);
        b.merge(&a);
        assert_eq!(b.total(), 3);
        assert_eq!(b.count(1, 0), 1);
    }
}
