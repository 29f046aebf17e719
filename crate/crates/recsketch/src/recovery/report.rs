use std::fmt;

use serde::{Deserialize, Serialize};

use crate::network_model::{ModuleId, ObjectPath};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    Unique,
    Path,
    Frequency,
    Summed,
    Mean,
    Signature,
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryKind::Unique => "unique",
            QueryKind::Path => "path",
            QueryKind::Frequency => "frequency",
            QueryKind::Summed => "summed",
            QueryKind::Mean => "mean",
            QueryKind::Signature => "signature",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Estimate<T> {
    /// Values at `RecoveryReport::coords`, or all d coordinates.
    Vector(Vec<T>),
    Scalar { value: T, rounded: i64 },
}

pub const REPORT_CSV_HEADER: &str = "query,module,depth,weight,d,d_prime,seed,linf_error,predicted_bound";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport<T> {
    pub kind: QueryKind,
    pub estimate: Estimate<T>,
    pub coords: Option<Vec<usize>>,
    pub beta: f64,
    pub module: ModuleId,
    pub path: Option<ObjectPath>,
    pub depth: u32,
    pub weight: f64,
    pub d: usize,
    pub erased_prefix: usize,
    pub predicted_error: Option<f64>,
    /// ℓ∞ distance to the ground truth, once supplied.
    pub error: Option<f64>,
    pub low_confidence: bool,
}

impl<T: Scalar> RecoveryReport<T> {
    pub fn vector(&self) -> Option<&[T]> {
        match &self.estimate {
            Estimate::Vector(v) => Some(v),
            Estimate::Scalar { .. } => None,
        }
    }

    pub fn scalar(&self) -> Option<(T, i64)> {
        match self.estimate {
            Estimate::Scalar { value, rounded } => Some((value, rounded)),
            Estimate::Vector(_) => None,
        }
    }

    /// The estimate as a d-vector, zero off the estimated coordinates.
    pub fn dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.d];
        match (&self.estimate, &self.coords) {
            (Estimate::Vector(v), None) => out.copy_from_slice(v),
            (Estimate::Vector(v), Some(c)) => c.iter().zip(v).for_each(|(&i, &x)| out[i] = x),
            (Estimate::Scalar { value, .. }, c) => out[c.as_ref().map_or(0, |c| c[0])] = *value,
        }
        out
    }

    /// ℓ∞ error against a full-length truth vector (or a count), over the
    /// estimated coordinates only.
    pub fn linf_error(&self, truth: &[T]) -> f64 {
        match (&self.estimate, &self.coords) {
            (Estimate::Vector(v), None) => v.iter().zip(truth).map(|(a, b)| (a.f64() - b.f64()).abs()).fold(0.0, f64::max),
            (Estimate::Vector(v), Some(c)) => {
                c.iter().zip(v).map(|(&i, a)| (a.f64() - truth[i].f64()).abs()).fold(0.0, f64::max)
            }
            (Estimate::Scalar { value, .. }, _) => (value.f64() - truth[0].f64()).abs(),
        }
    }

    pub fn with_truth(mut self, truth: &[T]) -> Self {
        self.error = Some(self.linf_error(truth));
        self
    }

    pub fn csv_row(&self, seed: u64) -> String {
        let opt = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.kind,
            self.module,
            self.depth,
            self.weight,
            self.d,
            self.erased_prefix,
            seed,
            opt(self.error),
            opt(self.predicted_error)
        )
    }
}
