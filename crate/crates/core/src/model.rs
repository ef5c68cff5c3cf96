//! Quantum-dot nuclear parameters and the electron-conditioned Hamiltonian blocks.
//!
//! For one nucleus the dot Hamiltonian splits as `|0><0| (x) H0 + |1><1| (x) H1`
//! with
//!
//! ```text
//! H0/1 = w Iz + dQ Iz^2 +- (a/2) Iz -+ (a_nc/2) [cos^2(th) (Ix^2 - Iy^2) + sin(2 th) (Iz Ix + Ix Iz)]
//! ```
//!
//! Electron state `|0>` takes the upper signs. The electron Zeeman term only
//! contributes a phase per block and is dropped.

use serde::{Deserialize, Serialize};

use crate::angular;
use crate::error::invalid;
use crate::spin_algebra::{spin_operators, ComplexMatrix, Spin, SpinOps};
use crate::Result;

/// Which non-collinear hyperfine operator enters the blocks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NcVariant {
    /// Strain-induced `cos^2(th)(Ix^2 - Iy^2) + sin(2th)(Iz Ix + Ix Iz)`.
    #[default]
    Quadrupolar,
    /// Plain transverse coupling `Ix`.
    TransverseX,
}

/// How the quadrupolar shift `Delta_Q` of a nucleus is specified (MHz).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quadrupole {
    /// `omega_Q`; the shift follows from the strain angle.
    Strain { omega_q: f64 },
    /// `Delta_Q` given directly, independent of the strain angle.
    Direct { delta_q: f64 },
}

/// `Delta_Q = omega_Q (sin^2 th - cos^2 th / 2)`.
pub fn delta_q_from_strain(omega_q: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    omega_q * (s * s - 0.5 * c * c)
}

/// `a_nc = a omega_Q / (2 nu)` for a strain-induced non-collinear term.
///
/// Convenience only: [`NucleusParams::a_nc`] is always an independent input.
pub fn a_nc_from_quadrupolar(a: f64, omega_q: f64, nu_larmor: f64) -> f64 {
    a * omega_q / (2.0 * nu_larmor)
}

/// Physical parameters of one nucleus. Frequencies are `nu = omega/2pi` in MHz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NucleusParams {
    pub spin: Spin,
    pub nu_larmor: f64,
    /// Collinear hyperfine coupling, signed.
    pub a: f64,
    /// Non-collinear hyperfine coupling.
    pub a_nc: f64,
    pub quadrupole: Quadrupole,
    /// Strain angle in radians.
    pub theta: f64,
    pub species: String,
    /// Electron Zeeman frequency; recorded for bookkeeping, never enters dynamics.
    pub nu_electron: Option<f64>,
}

impl NucleusParams {
    /// Spin-3/2 nucleus with a directly specified `Delta_Q`.
    pub fn spin_three_halves(nu_larmor: f64, a: f64, a_nc: f64, delta_q: f64, theta: f64) -> Self {
        Self {
            spin: Spin::THREE_HALVES,
            nu_larmor,
            a,
            a_nc,
            quadrupole: Quadrupole::Direct { delta_q },
            theta,
            species: String::new(),
            nu_electron: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// Effective `Delta_Q` in MHz.
    pub fn delta_q(&self) -> f64 {
        match self.quadrupole {
            Quadrupole::Strain { omega_q } => delta_q_from_strain(omega_q, self.theta),
            Quadrupole::Direct { delta_q } => delta_q,
        }
    }

    pub fn with_delta_q(mut self, delta_q: f64) -> Self {
        self.quadrupole = Quadrupole::Direct { delta_q };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let q = match self.quadrupole {
            Quadrupole::Strain { omega_q } => omega_q,
            Quadrupole::Direct { delta_q } => delta_q,
        };
        for (name, v) in [
            ("nu_larmor", self.nu_larmor),
            ("a", self.a),
            ("a_nc", self.a_nc),
            ("quadrupole", q),
            ("theta", self.theta),
        ] {
            if !v.is_finite() {
                return Err(invalid!("{name} must be finite, got {v}"));
            }
        }
        if let Some(nu_e) = self.nu_electron {
            if !nu_e.is_finite() {
                return Err(invalid!("nu_electron must be finite, got {nu_e}"));
            }
        }
        Ok(())
    }

    /// Reports violations of `nu_e >> nu >> |a| >> |Delta_Q|, |a_nc|`.
    ///
    /// Informational only; the blocks are exact for any parameters.
    pub fn hierarchy_warnings(&self) -> Vec<String> {
        const MARGIN: f64 = 1.0;
        let mut out = Vec::new();
        let nu = self.nu_larmor.abs();
        let a = self.a.abs();
        let dq = self.delta_q().abs();
        let anc = self.a_nc.abs();
        if let Some(nu_e) = self.nu_electron {
            if nu_e.abs() <= nu * MARGIN {
                out.push(format!("electron Zeeman {nu_e} MHz does not dominate nu = {nu} MHz"));
            }
        }
        if a >= nu * MARGIN {
            out.push(format!("|a| = {a} MHz is not small against nu = {nu} MHz"));
        }
        if dq >= a * MARGIN && a > 0.0 {
            out.push(format!("|Delta_Q| = {dq} MHz is not small against |a| = {a} MHz"));
        }
        if anc >= a * MARGIN && a > 0.0 {
            out.push(format!("|a_nc| = {anc} MHz is not small against |a| = {a} MHz"));
        }
        out
    }
}

/// The two conditional Hamiltonians in rad/us.
#[derive(Clone, Debug)]
pub struct Blocks {
    pub h0: ComplexMatrix,
    pub h1: ComplexMatrix,
}

impl Blocks {
    pub fn dim(&self) -> usize {
        self.h0.dim()
    }
}

/// Non-collinear operator for the chosen variant (dimensionless).
pub fn non_collinear_operator(ops: &SpinOps, theta: f64, variant: NcVariant) -> ComplexMatrix {
    match variant {
        NcVariant::Quadrupolar => {
            let c2 = theta.cos().powi(2);
            let s2 = (2.0 * theta).sin();
            let xx_yy = &(&ops.ix * &ops.ix) - &(&ops.iy * &ops.iy);
            let zx = &(&ops.iz * &ops.ix) + &(&ops.ix * &ops.iz);
            &xx_yy.scale_real(c2) + &zx.scale_real(s2)
        }
        NcVariant::TransverseX => ops.ix.clone(),
    }
}

pub fn build_blocks(p: &NucleusParams, variant: NcVariant) -> Result<Blocks> {
    p.validate()?;
    for w in p.hierarchy_warnings() {
        log::debug!("parameter hierarchy: {w}");
    }
    let ops = spin_operators(p.spin);
    let omega = angular(p.nu_larmor);
    let dq = angular(p.delta_q());
    let a = angular(p.a);
    let anc = angular(p.a_nc);
    let iz2 = &ops.iz * &ops.iz;
    let common = &ops.iz.scale_real(omega) + &iz2.scale_real(dq);
    let coll = ops.iz.scale_real(0.5 * a);
    let nc = non_collinear_operator(&ops, p.theta, variant).scale_real(0.5 * anc);
    let h0 = &(&common + &coll) - &nc;
    let h1 = &(&common - &coll) + &nc;
    Ok(Blocks { h0, h1 })
}
