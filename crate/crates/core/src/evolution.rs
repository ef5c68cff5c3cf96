//! Conditional nuclear rotations for free precession and CPMG echoes.
//!
//! A CPMG unit `t/4 - pi - t/2 - pi - t/4` with ideal pulses swaps the
//! electron state twice, so nucleus `i` sees `R0(t/4) R1(t/2) R0(t/4)` when
//! the electron starts in `|0>` and the mirrored product when it starts in
//! `|1>`. The pulse phases cancel pairwise and never appear.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::model::Blocks;
use crate::spin_algebra::{hermitian_eigen, ComplexMatrix, HermitianEigen};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionKind {
    Free,
    Cpmg,
}

/// What evolution to apply and for how long.
///
/// `duration` is always the total evolution time in us. For CPMG with `N`
/// iterations each unit lasts `duration / N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpec {
    pub kind: EvolutionKind,
    pub n_iterations: u32,
    pub duration: f64,
}

impl EvolutionSpec {
    pub fn free(duration: f64) -> Self {
        Self {
            kind: EvolutionKind::Free,
            n_iterations: 1,
            duration,
        }
    }

    pub fn cpmg(duration: f64, n_iterations: u32) -> Self {
        Self {
            kind: EvolutionKind::Cpmg,
            n_iterations,
            duration,
        }
    }

    pub fn with_duration(self, duration: f64) -> Self {
        Self { duration, ..self }
    }

    /// Length of a single CPMG unit (the whole duration for free evolution).
    pub fn unit_time(&self) -> f64 {
        self.duration / f64::from(self.n_iterations)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(invalid!("duration must be finite and >= 0, got {}", self.duration));
        }
        if self.n_iterations == 0 {
            return Err(invalid!("n_iterations must be >= 1"));
        }
        if self.kind == EvolutionKind::Free && self.n_iterations != 1 {
            return Err(invalid!(
                "free evolution takes n_iterations = 1, got {}",
                self.n_iterations
            ));
        }
        Ok(())
    }
}

/// Nuclear rotations conditioned on the electron state.
#[derive(Clone, Debug)]
pub struct RotationPair {
    pub r0: ComplexMatrix,
    pub r1: ComplexMatrix,
}

impl RotationPair {
    pub fn new(r0: ComplexMatrix, r1: ComplexMatrix) -> Result<Self> {
        if r0.dim() != r1.dim() {
            return Err(invalid!(
                "rotation dimensions differ: {} vs {}",
                r0.dim(),
                r1.dim()
            ));
        }
        Ok(Self { r0, r1 })
    }

    pub fn dim(&self) -> usize {
        self.r0.dim()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.r0.is_unitary(tol) && self.r1.is_unitary(tol)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(invalid!("time must be finite and >= 0, got {t}"));
    }
    Ok(())
}

/// `(exp(-i h0 t), exp(-i h1 t))`.
pub fn free_rotations(h0: &ComplexMatrix, h1: &ComplexMatrix, t: f64) -> Result<RotationPair> {
    BlockPropagator::from_matrices(h0, h1)?.free(t)
}

/// `n` CPMG units of length `t_unit` each.
pub fn cpmg_rotations(
    h0: &ComplexMatrix,
    h1: &ComplexMatrix,
    t_unit: f64,
    n: u32,
) -> Result<RotationPair> {
    BlockPropagator::from_matrices(h0, h1)?.cpmg(t_unit, n)
}

/// Eigendecompositions of both blocks, reused across many evolution times.
#[derive(Clone, Debug)]
pub struct BlockPropagator {
    e0: HermitianEigen,
    e1: HermitianEigen,
    /// `|<v0_j|v1_k>|^2`, row-major `j * d + k`.
    overlap: Vec<f64>,
}

impl BlockPropagator {
    pub fn new(blocks: &Blocks) -> Result<Self> {
        Self::from_matrices(&blocks.h0, &blocks.h1)
    }

    pub fn from_matrices(h0: &ComplexMatrix, h1: &ComplexMatrix) -> Result<Self> {
        if h0.dim() != h1.dim() {
            return Err(invalid!("block dimensions differ: {} vs {}", h0.dim(), h1.dim()));
        }
        let e0 = hermitian_eigen(h0)?;
        let e1 = hermitian_eigen(h1)?;
        let d = h0.dim();
        let w = &e0.vectors.adjoint() * &e1.vectors;
        let overlap = (0..d * d).map(|i| w[(i / d, i % d)].norm_sqr()).collect();
        Ok(Self { e0, e1, overlap })
    }

    pub fn dim(&self) -> usize {
        self.e0.dim()
    }

    pub fn free(&self, t: f64) -> Result<RotationPair> {
        check_time(t)?;
        Ok(RotationPair {
            r0: self.e0.propagator(t),
            r1: self.e1.propagator(t),
        })
    }

    pub fn cpmg(&self, t_unit: f64, n: u32) -> Result<RotationPair> {
        check_time(t_unit)?;
        if n == 0 {
            return Err(invalid!("CPMG needs at least one iteration"));
        }
        let q0 = self.e0.propagator(t_unit / 4.0);
        let q1 = self.e1.propagator(t_unit / 4.0);
        let h0 = self.e0.propagator(t_unit / 2.0);
        let h1 = self.e1.propagator(t_unit / 2.0);
        let r0 = &(&q0 * &h1) * &q0;
        let r1 = &(&q1 * &h0) * &q1;
        Ok(RotationPair {
            r0: r0.pow(n),
            r1: r1.pow(n),
        })
    }

    pub fn rotations(&self, spec: &EvolutionSpec) -> Result<RotationPair> {
        spec.validate()?;
        match spec.kind {
            EvolutionKind::Free => self.free(spec.duration),
            EvolutionKind::Cpmg => self.cpmg(spec.unit_time(), spec.n_iterations),
        }
    }

    /// `Tr(R0^dag R1)` under free evolution, from the cached spectra alone.
    pub fn free_overlap_trace(&self, t: f64) -> Complex64 {
        let d = self.dim();
        if t == 0.0 {
            return Complex64::new(d as f64, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &l0) in self.e0.values.iter().enumerate() {
            for (k, &l1) in self.e1.values.iter().enumerate() {
                acc += Complex64::from_polar(self.overlap[j * d + k], (l0 - l1) * t);
            }
        }
        acc
    }

    /// `Tr(R0^dag R1)` for any evolution spec.
    pub fn overlap_trace(&self, spec: &EvolutionSpec) -> Result<Complex64> {
        spec.validate()?;
        match spec.kind {
            EvolutionKind::Free => Ok(self.free_overlap_trace(spec.duration)),
            EvolutionKind::Cpmg => {
                let rp = self.rotations(spec)?;
                crate::spin_algebra::trace_inner(&rp.r0, &rp.r1)
            }
        }
    }
}
