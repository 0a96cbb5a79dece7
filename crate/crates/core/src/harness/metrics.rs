//! Binary confusion matrices and macro-averaged P/R/F1.

use std::collections::BTreeMap;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

/// Confusion counts with label `1` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn record(&mut self, gold: Label, pred: Label) {
        match (gold, pred) {
            (Label::One, Label::One) => self.tp += 1,
            (Label::Zero, Label::One) => self.fp += 1,
            (Label::Zero, Label::Zero) => self.tn += 1,
            (Label::One, Label::Zero) => self.fn_ += 1,
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Label, Label)>) -> Self {
        let mut c = Confusion::default();
        for (g, p) in pairs {
            c.record(g, p);
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

impl Add for Confusion {
    type Output = Confusion;

    fn add(self, o: Confusion) -> Confusion {
        Confusion {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl AddAssign for Confusion {
    fn add_assign(&mut self, o: Confusion) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: Label,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
    /// No predictions of this class: precision reported as 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub precision_undefined: bool,
    /// No gold examples of this class: recall reported as 0.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub recall_undefined: bool,
}

fn ratio(num: usize, den: usize) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

impl ClassMetrics {
    fn new(label: Label, correct: usize, predicted: usize, support: usize) -> Self {
        let (precision, precision_undefined) = ratio(correct, predicted);
        let (recall, recall_undefined) = ratio(correct, support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            label,
            precision,
            recall,
            f1,
            support,
            precision_undefined,
            recall_undefined,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub macro_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    /// Class `0` then class `1`.
    pub per_class: [ClassMetrics; 2],
    pub confusion: Confusion,
}

impl Metrics {
    pub fn from_confusion(c: Confusion) -> Self {
        let zero = ClassMetrics::new(Label::Zero, c.tn, c.tn + c.fn_, c.tn + c.fp);
        let one = ClassMetrics::new(Label::One, c.tp, c.tp + c.fp, c.tp + c.fn_);
        Metrics {
            macro_f1: (zero.f1 + one.f1) / 2.0,
            macro_precision: (zero.precision + one.precision) / 2.0,
            macro_recall: (zero.recall + one.recall) / 2.0,
            per_class: [zero, one],
            confusion: c,
        }
    }

    pub fn support(&self) -> [usize; 2] {
        [self.per_class[0].support, self.per_class[1].support]
    }
}

/// Metrics over predictions and gold labels keyed by example id. Both maps
/// must have exactly the same keys.
pub fn evaluate(predictions: &BTreeMap<String, Label>, gold: &BTreeMap<String, Label>) -> Result<Metrics> {
    if let Some(id) = predictions.keys().find(|k| !gold.contains_key(*k)) {
        return Err(Error::KeyMismatch(id.clone()));
    }
    if let Some(id) = gold.keys().find(|k| !predictions.contains_key(*k)) {
        return Err(Error::KeyMismatch(id.clone()));
    }
    Ok(Metrics::from_confusion(Confusion::from_pairs(
        gold.iter().map(|(id, g)| (*g, predictions[id])),
    )))
}

/// Per-metric mean over runs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub macro_f1: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub runs: usize,
}

pub fn aggregate<'a>(metrics: impl IntoIterator<Item = &'a Metrics>) -> Aggregate {
    let mut a = Aggregate::default();
    for m in metrics {
        a.macro_f1 += m.macro_f1;
        a.macro_precision += m.macro_precision;
        a.macro_recall += m.macro_recall;
        a.runs += 1;
    }
    if a.runs > 0 {
        let n = a.runs as f64;
        a.macro_f1 /= n;
        a.macro_precision /= n;
        a.macro_recall /= n;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(v: &[u8]) -> Vec<Label> {
        v.iter().map(|&b| Label::try_from(b).unwrap()).collect()
    }

    fn keyed(v: &[Label]) -> BTreeMap<String, Label> {
        v.iter().enumerate().map(|(i, l)| (format!("{i:03}"), *l)).collect()
    }

    #[test]
    fn perfect_predictions() {
        let g = keyed(&labels(&[1, 0, 1, 0]));
        let m = evaluate(&g, &g).unwrap();
        assert_eq!((m.macro_f1, m.macro_precision, m.macro_recall), (1.0, 1.0, 1.0));
    }

    #[test]
    fn worked_example() {
        let m = evaluate(&keyed(&labels(&[1, 1, 0, 0])), &keyed(&labels(&[1, 0, 0, 0]))).unwrap();
        let [c0, c1] = m.per_class;
        assert_eq!((c1.precision, c1.recall), (0.5, 1.0));
        assert!((c1.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(c0.precision, 1.0);
        assert!((c0.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((c0.f1 - 0.8).abs() < 1e-12);
        assert!((m.macro_f1 - 0.733333).abs() < 1e-6);
        assert_eq!(m.macro_precision, 0.75);
        assert!((m.macro_recall - 0.833333).abs() < 1e-6);
    }

    #[test]
    fn degenerate_all_one_on_all_zero() {
        let m = evaluate(&keyed(&labels(&[1, 1, 1])), &keyed(&labels(&[0, 0, 0]))).unwrap();
        let [c0, c1] = m.per_class;
        assert_eq!(c1.precision, 0.0);
        assert!(c1.recall_undefined && !c1.precision_undefined);
        assert!(c0.precision_undefined);
        assert_eq!(c0.recall, 0.0);
        assert_eq!(m.macro_f1, 0.0);
    }

    #[test]
    fn key_mismatch() {
        let mut p = keyed(&labels(&[1, 0]));
        let g = keyed(&labels(&[1, 0]));
        p.insert("extra".into(), Label::One);
        assert!(matches!(evaluate(&p, &g), Err(Error::KeyMismatch(k)) if k == "extra"));
        assert!(matches!(evaluate(&g, &p), Err(Error::KeyMismatch(k)) if k == "extra"));
    }

    proptest! {
        #[test]
        fn aggregate_permutation_invariant(fs in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 1..12)) {
            let ms: Vec<Metrics> = fs.iter().map(|&(f, p, r)| Metrics {
                macro_f1: f, macro_precision: p, macro_recall: r,
                ..Metrics::from_confusion(Confusion::default())
            }).collect();
            let a = aggregate(&ms);
            let b = aggregate(ms.iter().rev());
            prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-12);
            prop_assert!((a.macro_precision - b.macro_precision).abs() < 1e-12);
            prop_assert!((a.macro_recall - b.macro_recall).abs() < 1e-12);
        }

        #[test]
        fn macro_bounds(g in prop::collection::vec(0u8..2, 1..50), p in prop::collection::vec(0u8..2, 50)) {
            let gold = labels(&g);
            let pred = labels(&p[..g.len()]);
            let m = evaluate(&keyed(&pred), &keyed(&gold)).unwrap();
            for x in [m.macro_f1, m.macro_precision, m.macro_recall] {
                prop_assert!((0.0..=1.0).contains(&x));
            }
            for c in m.per_class {
                let expect = if c.precision + c.recall == 0.0 { 0.0 } else { 2.0 * c.precision * c.recall / (c.precision + c.recall) };
                prop_assert_eq!(c.f1, expect);
            }
        }
    }
}
