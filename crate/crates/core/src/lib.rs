//! Uniform measure on the infinite executions of 1-safe Petri nets, through
//! the trace monoid of distant transitions acting on reachable markings.

#![allow(clippy::needless_range_loop)]

pub mod async_system;
pub mod chain;
pub mod error;
pub mod matrix;
pub mod measure;
pub mod petri_net;
pub mod poly;
pub mod random_nets;
pub mod reference;
pub mod report;
pub mod roots;
pub mod scalar;
pub mod trace_monoid;
pub mod verify;

pub use error::{Error, Result};
pub use petri_net::{parse_net, Marking, PetriNet};
pub use scalar::Scalar;
pub use trace_monoid::{Clique, Trace, TraceMonoid};

/// Exact integer polynomial.
pub type IntPolynomial = poly::Polynomial<num_bigint::BigInt>;
/// Exact rational polynomial.
pub type RatPolynomial = poly::Polynomial<num_rational::BigRational>;
pub type IntPolyMatrix = matrix::PolyMatrix<num_bigint::BigInt>;
pub type Cocycle = async_system::Cocycle<f64>;
pub type UniformMeasure = measure::UniformMeasure<f64>;
pub type CliqueChain = chain::CliqueChain<f64>;
pub type Cocycle32 = async_system::Cocycle<f32>;
pub type UniformMeasure32 = measure::UniformMeasure<f32>;
