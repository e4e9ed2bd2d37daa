//! Bipartite entanglement detection for N-qubit states from moments of
//! collective spin ladder operators.
//!
//! The library builds the partially transposed moment matrix of a bipartition
//! A|B, evaluates the two 2×2 determinant criteria that single out GHZ-type
//! (Class I) and W-type (Class II) entanglement, and checks every verdict
//! against the exact Peres-Horodecki (PPT) test.
//!
//! Conventions used throughout:
//! * `|0⟩` is spin down (m = −½), `|1⟩` spin up, so `s₊ = |1⟩⟨0|`.
//! * Qubit 1 is the most significant bit of a basis index.
//! * Dense complex matrices, intended for N ≤ 12.

pub mod criteria;
pub mod error;
pub mod momentmat;
pub mod numfmt;
pub mod qstate;
pub mod spinops;
pub mod states;
pub mod wernerscan;

pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;
