//! Work statistics of a driven, dissipative two-level quantum system.
//!
//! The crate computes the distribution and first three moments of
//! thermodynamic work accumulated over a sinusoidal drive protocol, under the
//! convention that work is the difference of projective energy measurements
//! taken before and after the protocol. Three independent routes are
//! provided and cross-validated against each other:
//!
//! * [`moments`] — master-equation correlation functions evaluated with the
//!   regression theorem, including the third-moment commutator corrections,
//! * [`mcwf`] — quantum-jump (Monte Carlo wave function) trajectory sampling
//!   with deterministic, parallelism-independent seeding,
//! * [`tpm`] — an exact brute-force reference on a small total Hilbert space
//!   (two-level system coupled to a few truncated bosonic modes).
//!
//! All quantities are expressed in reduced units: energies in units of
//! `ħω₀`, rates in units of `ω₀`, times in units of `1/ω₀`. Work moments are
//! reported as `⟨Wⁿ⟩/(ħω₀)ⁿ`.

pub mod error;
pub mod linalg;
pub mod lindblad;
pub mod mcwf;
pub mod model;
pub mod moments;
pub mod parallel;
pub mod tpm;

pub use error::{Error, Result};
pub use model::SystemParams;
