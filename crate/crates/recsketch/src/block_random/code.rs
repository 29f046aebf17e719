//! Column signature code: a self-describing sub-block naming the column
//! index and carrying two parity bits.

use thiserror::Error;

use super::params::{ceil_log2, BlockParams};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodeError {
    #[error("column index {j} outside 1..={d}")]
    IndexOutOfRange { j: usize, d: usize },
    #[error("codeword decodes to column {index} > d = {d}")]
    Corrupted { index: usize, d: usize },
    #[error("codeword has length {got}, expected {want}")]
    Length { got: usize, want: usize },
    #[error("sign must be +1 or -1, got {0}")]
    BadSign(i8),
}

fn check_sign(s: i8) -> Result<i8, CodeError> {
    if s == 1 || s == -1 {
        Ok(s)
    } else {
        Err(CodeError::BadSign(s))
    }
}

/// Unscaled codeword of length `len` for column `j` (1-based) of a d-column matrix.
pub fn encode_signs(j: usize, b_m: i8, b_s: i8, d: usize, len: usize) -> Result<Vec<i8>, CodeError> {
    if j == 0 || j > d {
        return Err(CodeError::IndexOutOfRange { j, d });
    }
    let t = ceil_log2(d);
    if len < t + 3 {
        return Err(CodeError::Length { got: len, want: t + 3 });
    }
    let mut v = Vec::with_capacity(len);
    v.push(1);
    for k in (0..t).rev() {
        v.push(if (j - 1) >> k & 1 == 1 { 1 } else { -1 });
    }
    v.push(check_sign(b_m)?);
    v.push(check_sign(b_s)?);
    v.resize(len, 1);
    Ok(v)
}

/// Inverse of [`encode_signs`] up to global sign. Returns (j, b_m).
pub fn decode_signs(z: &[i8], d: usize) -> Result<(usize, i8), CodeError> {
    let t = ceil_log2(d);
    if z.len() < t + 3 {
        return Err(CodeError::Length { got: z.len(), want: t + 3 });
    }
    let flip = z[0] < 0;
    let bit = |k: usize| (z[k] > 0) != flip;
    let mut index = 0usize;
    for k in 1..=t {
        index = index << 1 | bit(k) as usize;
    }
    if index >= d {
        return Err(CodeError::Corrupted { index: index + 1, d });
    }
    let b_m = if bit(t + 1) { 1 } else { -1 };
    Ok((index + 1, b_m))
}

pub fn encode_column_signature<T: Scalar>(
    j: usize,
    b_m: i8,
    b_s: i8,
    params: &BlockParams,
) -> Result<Vec<T>, CodeError> {
    let scale = T::of(params.scale());
    Ok(encode_signs(j, b_m, b_s, params.d, params.third())?
        .into_iter()
        .map(|s| if s > 0 { scale } else { -scale })
        .collect())
}

/// Decode a rounded codeword; only the signs of the entries are read.
pub fn decode_column_signature<T: Scalar>(z: &[T], params: &BlockParams) -> Result<(usize, i8), CodeError> {
    let want = params.third();
    if z.len() != want {
        return Err(CodeError::Length { got: z.len(), want });
    }
    let signs: Vec<i8> = z.iter().map(|&v| if v < T::zero() { -1 } else { 1 }).collect();
    decode_signs(&signs, params.d)
}

#[cfg(test)]
mod tests {
    use super::*;

    // d = 8 is not a multiple of b = 18, but the code only needs d, q and b/3
    fn small() -> BlockParams {
        BlockParams { b: 18, q: 0.5, d: 8, n_cap: 2 }
    }

    #[test]
    fn worked_examples() {
        let p = small();
        let e: Vec<f64> = encode_column_signature(3, 1, -1, &p).unwrap();
        assert_eq!(e, vec![0.5, -0.5, 0.5, -0.5, 0.5, -0.5]);
        let e: Vec<f64> = encode_column_signature(1, 1, 1, &p).unwrap();
        assert_eq!(e, vec![0.5, -0.5, -0.5, -0.5, 0.5, 0.5]);
    }

    #[test]
    fn decode_examples() {
        let p = small();
        let e: Vec<f64> = encode_column_signature(3, 1, -1, &p).unwrap();
        assert_eq!(decode_column_signature(&e, &p).unwrap(), (3, 1));
        let neg: Vec<f64> = e.iter().map(|v| -v).collect();
        assert_eq!(decode_column_signature(&neg, &p).unwrap(), (3, 1));
        let e: Vec<f64> = encode_column_signature(5, -1, 1, &p).unwrap();
        assert_eq!(decode_column_signature(&e, &p).unwrap(), (5, -1));
    }

    #[test]
    fn out_of_range() {
        let p = small();
        assert!(matches!(
            encode_column_signature::<f64>(9, 1, 1, &p),
            Err(CodeError::IndexOutOfRange { j: 9, d: 8 })
        ));
        assert!(encode_column_signature::<f64>(0, 1, 1, &p).is_err());
        // d = 5 uses 3 index bits; pattern 111 names column 8
        let z = [1i8, 1, 1, 1, 1, 1];
        assert!(matches!(decode_signs(&z, 5), Err(CodeError::Corrupted { index: 8, d: 5 })));
    }
}
