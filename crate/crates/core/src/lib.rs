//! Darboux first integrals of the cyclic Lotka-Volterra family
//!
//! ```text
//! x_i' = x_i (k_i x_{i+1} - k_{i-1} x_{i-1}),   i = 1..n (indices cyclic)
//! ```
//!
//! Everything that decides *which* integrals exist is done in exact rational
//! arithmetic: cofactors of the coordinate hyperplanes, the exponent system
//! they induce, its nullspace and the closed-form exponent chains. The
//! [`sim`] module then integrates trajectories in `f64` and monitors how well
//! each integral is conserved.
//!
//! Interfaces speak 1-based indices (`x_1..x_n`); storage is 0-based.

pub mod cli;
pub mod darboux;
pub mod linalg;
pub mod model;
pub mod poly;
pub mod rational;
pub mod sim;
pub mod verify;

pub use darboux::{
    build_exponent_system, exponents_even, exponents_odd, integral_basis, nullspace,
    resonance_condition, Classification, DarbouxError, ExponentSystem, IntegralBasis,
    LinearIntegral, MonomialIntegral,
};
pub use model::{CyclicLVSystem, LinearForm, ModelError};
pub use rational::{parse_rational, Rational};
pub use sim::{integrate, IntegratorConfig, Method, SimError, TrajectoryRecord};
pub use verify::VerificationReport;
