//! Residues of fundamental units of real quadratic fields modulo 2, and the
//! counting of Eisenstein discriminants.
//!
//! For squarefree d ≡ 5 (mod 8) the prime 2 is inert in K = Q(√d) and the
//! fundamental unit ε_d reduces to one of the three classes of
//! (O_K/2O_K)* ≅ Z/3. d is an *Eisenstein discriminant* when ε_d ≡ 1. The
//! class is found without ever forming ε_d by running baby-step giant-step
//! infrastructure on the cycle of reduced principal ideals while tracking
//! every generator only by its residue and its logarithm.
//!
//! Module map:
//! - [`residue`]: F_4 residues and 2-adic valuations
//! - [`ideal`]: ideals [Q/2, (P+√d)/2], the reduction step ρ, plain products
//! - [`nucomp`]: NUCOMP / NUDUPL composition with the relative generator γ
//! - [`store`] and [`infrastructure`]: the baby-step dictionary and the
//!   residue computation itself
//! - [`oracle`]: exact big-integer ground truth, and [`validate`] to compare
//!   against it
//! - [`sieve`] and [`scan`]: enumeration of candidates and range scans with
//!   checkpoints
//! - [`analysis`]: analytic constants and fits of the counting function

pub mod analysis;
pub mod error;
pub mod ideal;
pub mod infrastructure;
pub mod nucomp;
pub mod oracle;
pub mod residue;
pub mod scan;
pub mod sieve;
pub mod store;
pub mod validate;

pub use error::ArithError;
pub use infrastructure::{eisenstein_residue, eisenstein_residue_with, full_walk_residue, EisensteinResult, Method};
pub use residue::{UnitResidue, ValuedResidue};
