//! One-tangling power of block-diagonal central-spin evolutions.
//!
//! A central electron spin couples to a bath of nuclear spins through a
//! Hamiltonian of the form `H = |0><0| (x) H0 + |1><1| (x) H1`. Any evolution
//! that keeps this block structure (free precession, ideal CPMG echoes) acts
//! on each nucleus as a pair of conditional rotations `(R0, R1)`, and the
//! entangling capability of the whole evolution reduces to the generalized
//! Makhlin invariant `G1 = |Tr(R0^dag R1)|^2 / d^2` of every nucleus.
//!
//! The crate is organised bottom-up:
//!
//! - [`spin_algebra`]: dense complex matrices, spin operators, Hermitian
//!   exponentials.
//! - [`model`]: quantum-dot nuclear parameters and the two Hamiltonian blocks.
//! - [`evolution`]: free and CPMG conditional rotations.
//! - [`tangle`]: `G1`, nuclear and electronic one-tangling powers, the
//!   closed-form spin-3/2 invariant and resonance times.
//! - [`oracle`]: brute-force one-tangling power (Choi vectorization and
//!   Monte-Carlo product-state averaging) used to validate [`tangle`].
//! - [`ensemble`]: annulus-discretized Gaussian dots and dephasing times.
//! - [`analysis`]: parameter sweeps, degeneracy loci, eigenvalue-gap maps.
//! - [`sweep`]: the tabular [`SweepResult`](sweep::SweepResult) shared by the
//!   sweep producers and its CSV form.
//!
//! Frequencies at the public boundary are `nu = omega / 2pi` in MHz, times are
//! in microseconds and angles in radians. Internally everything is angular
//! (rad/us).

pub mod analysis;
pub mod ensemble;
mod error;
pub mod evolution;
pub mod model;
pub mod oracle;
pub mod spin_algebra;
pub mod sweep;
pub mod tangle;

pub use error::{Error, Result};

/// Converts a frequency `nu` in MHz into an angular frequency in rad/us.
#[inline]
pub fn angular(nu_mhz: f64) -> f64 {
    std::f64::consts::TAU * nu_mhz
}
