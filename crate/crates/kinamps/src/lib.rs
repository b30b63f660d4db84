//! Exact computer algebra for dimension-neutral Yang-Mills and gravity tree
//! amplitudes on the constrained kinematic space, together with the
//! first- and second-order differential operators that annihilate them and
//! machine checks for the annihilation, commutator, and residue-factorization
//! identities.
//!
//! Everything is exact rational arithmetic; "equal" always means identical
//! canonical forms.

pub mod error;
pub mod factorization;
pub mod harness;
pub mod exactalg;
pub mod amplitudes;
pub mod diffcalc;
pub mod kinspace;

pub use error::{Error, Result};
