use serde::Serialize;

use crate::ensemble::dataset::{LabeledDataset, MALICIOUS};
use crate::ensemble::learner::Classifier;
use crate::error::{Error, Result};

/// Binary confusion counts, malicious as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn record(&mut self, predicted: u8, truth: u8) {
        match (predicted == MALICIOUS, truth == MALICIOUS) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn merge(&mut self, other: &Confusion) {
        self.tp += other.tp;
        self.tn += other.tn;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn).unwrap_or(0.0)
    }

    pub fn fnr(&self) -> f64 {
        ratio(self.fn_, self.fn_ + self.tp).unwrap_or(0.0)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifierReport {
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
    pub fnr: f64,
    /// Metrics whose denominator was zero; they are reported as 0.
    pub undefined: Vec<&'static str>,
}

impl ClassifierReport {
    pub fn from_confusion(c: Confusion) -> Self {
        let mut undefined = Vec::new();
        let mut get = |name, num, den| {
            ratio(num, den).unwrap_or_else(|| {
                undefined.push(name);
                0.0
            })
        };
        let accuracy = get("accuracy", c.tp + c.tn, c.total());
        let precision = get("precision", c.tp, c.tp + c.fp);
        let recall = get("recall", c.tp, c.tp + c.fn_);
        let fpr = get("fpr", c.fp, c.fp + c.tn);
        let fnr = get("fnr", c.fn_, c.fn_ + c.tp);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            undefined.push("f1");
            0.0
        };
        Self {
            confusion: c,
            accuracy,
            precision,
            recall,
            f1,
            fpr,
            fnr,
            undefined,
        }
    }

    pub fn from_predictions(predicted: &[u8], truth: &[u8]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(Error::InvalidArgument(format!(
                "{} predictions for {} labels",
                predicted.len(),
                truth.len()
            )));
        }
        let mut c = Confusion::default();
        for (&p, &t) in predicted.iter().zip(truth) {
            c.record(p, t);
        }
        Ok(Self::from_confusion(c))
    }
}

impl std::fmt::Display for ClassifierReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = &self.confusion;
        write!(
            f,
            "accuracy={:.4} precision={:.4} recall={:.4} f1={:.4} fpr={:.4} fnr={:.4} (tp={} tn={} fp={} fn={})",
            self.accuracy, self.precision, self.recall, self.f1, self.fpr, self.fnr, c.tp, c.tn, c.fp, c.fn_
        )?;
        if !self.undefined.is_empty() {
            write!(f, " undefined={}", self.undefined.join(","))?;
        }
        Ok(())
    }
}

pub fn evaluate<C: Classifier + ?Sized>(model: &C, data: &LabeledDataset) -> Result<ClassifierReport> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut c = Confusion::default();
    for (row, label) in data.iter() {
        c.record(model.predict(row)?, label);
    }
    Ok(ClassifierReport::from_confusion(c))
}
