//! Exact Haar analysis of the local discrepancy of Hammersley-type point
//! sets in the unit square.
//!
//! The crate builds the Hammersley-type sets `R_n`, their reflections, the
//! Davenport symmetrization and the fully symmetrized multiset, computes the
//! Haar coefficients of their local discrepancy exactly in dyadic
//! arithmetic, and assembles Besov norms with dominating mixed smoothness,
//! classical `L_p` / star discrepancies and quasi-Monte Carlo errors from
//! them.
//!
//! ```
//! use dyadisc::pointsets::{Family, SignPattern};
//! use dyadisc::haar::{mu_discrepancy, HaarIndex};
//!
//! let sigma = SignPattern::identity(3);
//! let set = Family::Symmetrized.build(&sigma);
//! let mu = mu_discrepancy(&set, &HaarIndex::new(0, 0, 0, 0).unwrap()).unwrap();
//! assert_eq!(mu, dyadisc::Dyadic::pow2(-8));
//! ```

pub mod besov;
pub mod classical;
pub mod dyadic;
pub mod error;
pub mod haar;
pub mod pointsets;
pub mod qmc;
pub mod verify;

pub use dyadic::Dyadic;
pub use error::{Error, Result};
