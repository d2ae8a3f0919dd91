//! Preparation of pure multi-mode squeezed states of atomic ensembles in a
//! two-mode ring cavity.
//!
//! The crate simulates the cavity-damped, bilinear dynamics of two
//! counter-propagating cavity modes coupled to collective bosonic modes of one
//! or two atomic ensembles. States are Gaussian throughout, so evolution is
//! carried out exactly on covariance matrices; a small truncated-Fock
//! integrator ([`fock`]) serves as an independent check.
//!
//! Conventions used everywhere:
//!
//! * quadratures are ordered `(x_1, p_1, ..., x_M, p_M)` with
//!   `a = (x + i p) / sqrt(2)` and `hbar = 1`, so the vacuum covariance is
//!   `I / 2`;
//! * a Gaussian unitary `U` is represented by the symplectic matrix `S` with
//!   `U^dag r U = S r`; applying `U` to a state maps `sigma -> S sigma S^T`,
//!   and `U_1 U_2` maps to `S_1 S_2`;
//! * a quadratic Hamiltonian is `H = r^T H_q r / 2` up to a constant.

pub mod error;
pub mod exec;
pub mod fock;
pub mod gaussian;
pub mod hamiltonian;
mod linalg;
pub mod lindblad;
pub mod modes;
pub mod operator;
pub mod protocols;
pub mod squeezers;

pub use error::{Error, Result};
pub use exec::Execution;
pub use gaussian::{GaussianState, ModeLabel, ModeRegistry, Order, SymplecticTransform};
pub use hamiltonian::{Direction, EnsembleDrive, LaserConfig, QuadraticHamiltonian};
pub use lindblad::{DriftDiffusion, LindbladSpec};
pub use operator::{Ladder, OperatorExpr};
pub use protocols::{ProtocolKind, ProtocolResult, ProtocolSpec};

/// Golden ratio used by the two-ensemble mixer.
pub const GOLDEN: f64 = 1.618_033_988_749_895;
