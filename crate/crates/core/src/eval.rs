//! Error metrics and the per-metric validation report.

use std::fmt::Write as _;

use serde::Serialize;

use crate::ann::SurrogateNet;
use crate::dataset::{LabeledDataset, METRIC_COUNT, METRIC_LABELS, METRIC_NAMES};
use crate::error::{Error, Result};

/// Published reference errors (MAE, MSE) per metric, in metric order.
pub const REFERENCE_ERRORS: [(f64, f64); METRIC_COUNT] = [
    (0.022, 0.0008),
    (0.019, 0.0006),
    (0.042, 0.003),
    (0.031, 0.003),
    (0.047, 0.003),
    (0.06, 0.007),
    (0.018, 0.0017),
    (0.03, 0.0015),
];

fn check_lengths(pred: &[f64], target: &[f64]) -> Result<()> {
    if pred.len() != target.len() {
        return Err(Error::Dimension {
            expected: target.len(),
            actual: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_lengths(pred, target)?;
    Ok(pred.iter().zip(target).map(|(p, t)| (t - p).abs()).sum::<f64>() / pred.len() as f64)
}

/// Mean squared error.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_lengths(pred, target)?;
    Ok(pred.iter().zip(target).map(|(p, t)| (t - p) * (t - p)).sum::<f64>() / pred.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricError {
    pub name: &'static str,
    pub mae: f64,
    pub mse: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub n: usize,
    pub metrics: Vec<MetricError>,
    /// `residuals[sample][metric] = prediction - target`.
    pub residuals: Vec<[f64; METRIC_COUNT]>,
}

impl EvalReport {
    pub fn from_predictions(pred: &[[f64; METRIC_COUNT]], target: &[[f64; METRIC_COUNT]]) -> Result<Self> {
        if pred.len() != target.len() {
            return Err(Error::Dimension {
                expected: target.len(),
                actual: pred.len(),
            });
        }
        if pred.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut metrics = Vec::with_capacity(METRIC_COUNT);
        for k in 0..METRIC_COUNT {
            let p: Vec<f64> = pred.iter().map(|r| r[k]).collect();
            let t: Vec<f64> = target.iter().map(|r| r[k]).collect();
            metrics.push(MetricError {
                name: METRIC_NAMES[k],
                mae: mae(&p, &t)?,
                mse: mse(&p, &t)?,
            });
        }
        let residuals = pred
            .iter()
            .zip(target)
            .map(|(p, t)| std::array::from_fn(|k| p[k] - t[k]))
            .collect();
        Ok(EvalReport {
            n: pred.len(),
            metrics,
            residuals,
        })
    }

    pub fn mean_mae(&self) -> f64 {
        self.metrics.iter().map(|m| m.mae).sum::<f64>() / self.metrics.len() as f64
    }

    pub fn metric(&self, name: &str) -> Option<&MetricError> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// Min, quartiles and max of one metric's residuals.
    pub fn residual_summary(&self, metric: usize) -> [f64; 5] {
        let mut r: Vec<f64> = self.residuals.iter().map(|row| row[metric]).collect();
        r.sort_by(f64::total_cmp);
        let q = |f: f64| r[((r.len() - 1) as f64 * f).round() as usize];
        [q(0.0), q(0.25), q(0.5), q(0.75), q(1.0)]
    }

    /// CSV with one row per metric and the reference errors alongside.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,label,mae,mse,reference_mae,reference_mse\n");
        for (k, m) in self.metrics.iter().enumerate() {
            let (rm, rs) = REFERENCE_ERRORS[k];
            let _ = writeln!(out, "{},{},{},{},{},{}", m.name, METRIC_LABELS[k], m.mae, m.mse, rm, rs);
        }
        out
    }

    /// Human-readable table.
    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<16} {:>9} {:>10} {:>9} {:>10}\n",
            "metric", "MAE", "MSE", "ref MAE", "ref MSE"
        );
        for (k, m) in self.metrics.iter().enumerate() {
            let (rm, rs) = REFERENCE_ERRORS[k];
            let _ = writeln!(
                out,
                "{:<16} {:>9.4} {:>10.5} {:>9.3} {:>10.4}",
                METRIC_LABELS[k], m.mae, m.mse, rm, rs
            );
        }
        let _ = writeln!(out, "{:<16} {:>9.4}   (n = {})", "mean", self.mean_mae(), self.n);
        out
    }
}

/// Predicts every row of `data` and compares with its labels.
pub fn validate(net: &SurrogateNet, data: &LabeledDataset) -> Result<EvalReport> {
    let mut pred = Vec::with_capacity(data.len());
    for r in &data.rows {
        pred.push(net.predict_config(&r.config)?.to_array());
    }
    EvalReport::from_predictions(&pred, &data.targets())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_vectors() {
        let v = [0.1, 0.5, 0.9];
        assert_eq!(mae(&v, &v).unwrap(), 0.0);
        assert_eq!(mse(&v, &v).unwrap(), 0.0);
    }

    #[test]
    fn constant_residual() {
        let t = [0.2, 0.4, 0.6, 0.8];
        let p: Vec<f64> = t.iter().map(|x| x + 0.1).collect();
        assert!((mae(&p, &t).unwrap() - 0.1).abs() < 1e-12);
        assert!((mse(&p, &t).unwrap() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn two_residuals() {
        let p = [0.1, 0.3];
        let t = [0.0, 0.0];
        assert!((mae(&p, &t).unwrap() - 0.2).abs() < 1e-15);
        assert!((mse(&p, &t).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert!(mae(&[0.1], &[0.1, 0.2]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn perfect_report_is_zero() {
        let rows = vec![[0.5; METRIC_COUNT]; 4];
        let r = EvalReport::from_predictions(&rows, &rows).unwrap();
        assert_eq!(r.metrics.len(), 8);
        assert!(r.metrics.iter().all(|m| m.mae == 0.0 && m.mse == 0.0));
        let names: Vec<_> = r.metrics.iter().map(|m| m.name).collect();
        assert_eq!(names, METRIC_NAMES.to_vec());
        assert_eq!(r.to_csv().lines().count(), 9);
    }

    #[test]
    fn reference_errors_match_labels() {
        assert_eq!(REFERENCE_ERRORS[0], (0.022, 0.0008));
        assert_eq!(REFERENCE_ERRORS[5], (0.06, 0.007));
        assert_eq!(METRIC_LABELS[5], "View Range>90");
    }
}
