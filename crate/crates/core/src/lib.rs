//! Two-parameter `(p, q)`-deformed multimode oscillators.
//!
//! The crate builds the truncated Fock representation of the algebra
//!
//! ```text
//! a_i a+_j = q a+_j a_i        (i < j)
//! a_i a+_i - p a+_i a_i = 1
//! a_i a_j  = q^{-1} a_j a_i    (i < j)
//! ```
//!
//! with `p > 0` real and `|q| = 1`, verifies its relations (including the
//! subhamiltonians and the deformed `gl(n)` generators `E_ij = a+_i a_j`),
//! constructs the two families of coherent states, and the `q`-symmetric
//! many-particle states with their transition operators.
//!
//! Module map:
//!
//! * [`qkernel`]: deformed numbers, factorials, `(a;p)_n`, `e_p`, `0psi1`.
//! * [`amplitude`]: float, `q`-graded and exact arithmetic backends.
//! * [`fockspace`]: the truncated Fock representation.
//! * [`relcheck`]: word evaluation and relation suites.
//! * [`zcoherent`]: noncommuting `z` monomials and the annihilation-eigenstate coherent states.
//! * [`posenergy`]: positive-energy lattice and the creation-eigenstate coherent states.
//! * [`qsymm`]: `q`-symmetric states, inversion statistics, convention resolution.
//! * [`cli`]: batch command-line driver with JSON reports.

// `!(x > 0.0)` style guards are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitude;
pub mod cli;
pub mod error;
pub mod fockspace;
pub mod posenergy;
pub mod qkernel;
pub mod qsymm;
pub mod relcheck;
pub mod zcoherent;

pub use error::{Error, Result};
pub use fockspace::{FockSpace, FockVector, ModeConfig, Occupation};
pub use qkernel::{DeformationParams, QPhase};
