//! Recursive sketches of modular computation graphs.
//!
//! Core types are generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the scalar for the common case.

pub mod block_random;
pub mod dict_learning;
pub mod network_model;
pub mod recovery;
pub mod repository;
pub mod rng;
pub mod scalar;
pub mod sketcher;

pub use scalar::Scalar;

pub type BlockRandomMatrix64 = block_random::BlockRandomMatrix<f64>;
pub type BlockRandomMatrix32 = block_random::BlockRandomMatrix<f32>;
pub type Network64 = network_model::ModularNetwork<f64>;
pub type Network32 = network_model::ModularNetwork<f32>;
pub type Sketch64 = sketcher::Sketch<f64>;
pub type Sketch32 = sketcher::Sketch<f32>;
pub type Registry64 = sketcher::MatrixRegistry<f64>;
pub type Registry32 = sketcher::MatrixRegistry<f32>;
pub type Repository64 = repository::Repository<f64>;
pub type Repository32 = repository::Repository<f32>;
