//! The block-random distribution D(b, q, d), its column code, matrix
//! expressions and empirical noise measurement.

pub mod code;
pub mod expr;
pub mod matrix;
pub mod noise;
pub mod params;

pub use code::{decode_column_signature, decode_signs, encode_column_signature, encode_signs, CodeError};
pub use expr::{DimError, Factor, MatrixExpr};
pub use matrix::{BlockRandomMatrix, DenseMatrix, MatrixMode, RandomMatrix, SeedKey};
pub use noise::{
    fit_delta_law, measure_noise_profile, DeltaFit, ExprTemplate, FactorKind, NoiseConfig, NoiseError, NoiseMode,
    NoiseProfile,
};
pub use params::{ceil_log2, isometry_q, min_block, BlockParams, ParamError};

/// Sample one block-random matrix.
pub fn sample_matrix<T: crate::scalar::Scalar>(
    params: BlockParams,
    seed_key: SeedKey,
) -> Result<BlockRandomMatrix<T>, ParamError> {
    BlockRandomMatrix::sample(params, seed_key)
}

/// Evaluate a matrix expression.
pub fn apply<T: crate::scalar::Scalar>(expr: &MatrixExpr<T>, x: &[T]) -> Result<Vec<T>, DimError> {
    expr.apply(x)
}
