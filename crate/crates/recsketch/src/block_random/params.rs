use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("block size {0} is not a positive multiple of 3")]
    BlockNotMultipleOf3(usize),
    #[error("block size {b} is below the minimum {min} required for d = {d}, N = {n_cap}")]
    BlockTooSmall { b: usize, min: usize, d: usize, n_cap: usize },
    #[error("dimension {d} is not a positive multiple of block size {b}")]
    DimNotMultiple { d: usize, b: usize },
    #[error("activation probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("network size parameter N must be positive")]
    ZeroN,
}

/// Parameters of the distribution D(b, q, d).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub b: usize,
    pub q: f64,
    pub d: usize,
    pub n_cap: usize,
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Smallest admissible block size: 3·max(⌈log2 N⌉, ⌈log2 d⌉ + 3).
pub fn min_block(d: usize, n_cap: usize) -> usize {
    3 * ceil_log2(n_cap).max(ceil_log2(d) + 3)
}

/// Activation probability ⌈√((log N + log d)·log N / d)⌉ for the isometry bound
/// (the ceiling makes it 1 whenever the inner expression is in (0, 1]).
pub fn isometry_q(d: usize, n_cap: usize) -> f64 {
    let ln = (n_cap.max(2) as f64).log2();
    let ld = (d.max(2) as f64).log2();
    let v = ((ln + ld) * ln).sqrt() / (d as f64).sqrt();
    v.ceil().clamp(0.0, 1.0)
}

impl BlockParams {
    /// Strict constructor: every invariant is checked, nothing is rounded.
    pub fn new(b: usize, q: f64, d: usize, n_cap: usize) -> Result<Self, ParamError> {
        let p = BlockParams { b, q, d, n_cap };
        p.validate()?;
        Ok(p)
    }

    /// Smallest admissible block size for a target dimension, with d rounded up
    /// to a multiple of b (repeated until b is stable).
    pub fn fitted(d_target: usize, n_cap: usize, q: f64) -> Result<Self, ParamError> {
        if n_cap == 0 {
            return Err(ParamError::ZeroN);
        }
        let mut b = min_block(d_target.max(1), n_cap);
        let d = loop {
            let d = d_target.max(1).div_ceil(b) * b;
            let need = min_block(d, n_cap);
            if need <= b {
                break d;
            }
            b = need;
        };
        Self::new(b, q, d, n_cap)
    }

    /// `fitted` with q from `isometry_q`.
    pub fn isometric(d_target: usize, n_cap: usize) -> Result<Self, ParamError> {
        let b = min_block(d_target.max(1), n_cap.max(1));
        Self::fitted(d_target, n_cap, isometry_q(d_target.max(b), n_cap))
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if self.n_cap == 0 {
            return Err(ParamError::ZeroN);
        }
        if self.b == 0 || !self.b.is_multiple_of(3) {
            return Err(ParamError::BlockNotMultipleOf3(self.b));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(ParamError::BadProbability(self.q));
        }
        if self.d == 0 || !self.d.is_multiple_of(self.b) {
            return Err(ParamError::DimNotMultiple { d: self.d, b: self.b });
        }
        let min = min_block(self.d, self.n_cap);
        if self.b < min {
            return Err(ParamError::BlockTooSmall { b: self.b, min, d: self.d, n_cap: self.n_cap });
        }
        Ok(())
    }

    pub fn third(&self) -> usize {
        self.b / 3
    }

    pub fn blocks(&self) -> usize {
        self.d / self.b
    }

    /// Number of index bits in a column signature.
    pub fn t(&self) -> usize {
        ceil_log2(self.d)
    }

    /// Magnitude of every nonzero entry, 1/√(dq).
    pub fn scale(&self) -> f64 {
        if self.q == 0.0 {
            0.0
        } else {
            1.0 / (self.d as f64 * self.q).sqrt()
        }
    }

    pub fn with_q(self, q: f64) -> Result<Self, ParamError> {
        Self::new(self.b, q, self.d, self.n_cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log2_ceiling() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2(1024), 10);
    }

    #[test]
    fn strict_rejects() {
        assert_eq!(BlockParams::new(20, 0.5, 60, 4), Err(ParamError::BlockNotMultipleOf3(20)));
        assert!(matches!(BlockParams::new(18, 0.5, 100, 4), Err(ParamError::DimNotMultiple { .. })));
        assert!(matches!(BlockParams::new(18, 1.5, 36, 4), Err(ParamError::BadProbability(_))));
        // d = 1440 needs b >= 3 * (11 + 3) = 42
        assert!(matches!(
            BlockParams::new(18, 1.0, 1440, 2),
            Err(ParamError::BlockTooSmall { min: 42, .. })
        ));
        assert!(BlockParams::new(24, 0.5, 24, 4).is_ok());
        assert!(BlockParams::new(48, 1.0, 1440, 2).is_ok());
    }

    #[test]
    fn fitted_rounds_up() {
        let p = BlockParams::fitted(1024, 64, 1.0).unwrap();
        assert_eq!((p.b, p.d), (42, 1050));
        let p = BlockParams::fitted(2048, 64, 1.0).unwrap();
        assert_eq!(p.d % p.b, 0);
        assert!(p.d >= 2048);
        p.validate().unwrap();
    }

    #[test]
    fn isometry_q_is_one_at_desk_scale() {
        for d in [512, 1024, 8192, 1 << 20] {
            assert_eq!(isometry_q(d, 64), 1.0);
        }
    }
}
