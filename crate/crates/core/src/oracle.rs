//! Brute-force one-tangling powers for small systems.
//!
//! [`choi_otp`] evaluates the bipartition-sum definition on the Choi vector of
//! the unitary, [`mc_otp`] averages the one-tangle over random product states,
//! and [`pedersen_check`] samples the average fidelity of `R0^dag R1`. None of
//! them use the Makhlin-invariant formulas, so they act as oracles for
//! [`crate::tangle`].

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::evolution::RotationPair;
use crate::spin_algebra::{hermitian_expm, ComplexMatrix};
use crate::{Error, Result};

/// Largest total Hilbert-space dimension the oracles accept.
pub const MAX_ORACLE_DIM: usize = 256;

/// Samples per deterministic Monte-Carlo shard.
pub const SHARD_SIZE: usize = 1024;

const UNITARY_TOL: f64 = 1e-9;

/// Subsystem dimensions, electron first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDims {
    dims: Vec<usize>,
}

impl SystemDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(invalid!("need the electron and at least one nucleus"));
        }
        if dims[0] != 2 {
            return Err(invalid!("subsystem 0 is the electron and must have dimension 2"));
        }
        if dims.iter().any(|&d| d < 2) {
            return Err(invalid!("every subsystem needs dimension >= 2, got {dims:?}"));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .unwrap_or(usize::MAX);
        if total > MAX_ORACLE_DIM {
            return Err(Error::ResourceLimit(format!(
                "total dimension {total} exceeds the oracle limit {MAX_ORACLE_DIM}"
            )));
        }
        Ok(Self { dims })
    }

    /// Electron plus one nucleus of each listed dimension.
    pub fn electron_with(nuclei: &[usize]) -> Result<Self> {
        let mut dims = vec![2];
        dims.extend_from_slice(nuclei);
        Self::new(dims)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }
}

fn check_operands(u: &ComplexMatrix, dims: &SystemDims, q: usize) -> Result<()> {
    if u.dim() != dims.total() {
        return Err(invalid!(
            "unitary has dimension {} but subsystems span {}",
            u.dim(),
            dims.total()
        ));
    }
    if q >= dims.len() {
        return Err(invalid!("subsystem index {q} out of range 0..{}", dims.len()));
    }
    if !u.is_finite() || !u.is_unitary(UNITARY_TOL) {
        return Err(invalid!(
            "operator is not unitary (defect {:.3e})",
            u.unitarity_defect()
        ));
    }
    Ok(())
}

/// Mixed-radix digits of `index`, most significant first.
fn digits(mut index: usize, radices: &[usize], out: &mut [usize]) {
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = index % r;
        index /= r;
    }
}

/// `Tr(rho_S^2)` of a pure state over factors `radices`, keeping the factors
/// flagged in `keep`.
fn subsystem_purity(psi: &[Complex64], radices: &[usize], keep: &[bool]) -> f64 {
    let dim_keep: usize = radices.iter().zip(keep).filter(|(_, &k)| k).map(|(r, _)| r).product();
    let dim_rest = psi.len() / dim_keep;
    if dim_keep == 1 || dim_rest == 1 {
        return 1.0;
    }
    let mut m = DMatrix::<Complex64>::zeros(dim_keep, dim_rest);
    let mut dig = vec![0; radices.len()];
    for (i, &amp) in psi.iter().enumerate() {
        digits(i, radices, &mut dig);
        let (mut row, mut col) = (0, 0);
        for ((&dv, &r), &k) in dig.iter().zip(radices).zip(keep) {
            if k {
                row = row * r + dv;
            } else {
                col = col * r + dv;
            }
        }
        m[(row, col)] = amp;
    }
    let gram = if dim_keep <= dim_rest {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    gram.iter().map(|z| z.norm_sqr()).sum()
}

/// One-tangling power of `u` for subsystem `q` from its Choi vector.
///
/// The Choi vector `|U> = (1/sqrt(D)) sum_ab U_ab |a>|b>` lives on the system
/// and a copy of it. Summing the purity of the reduced state on `q` together
/// with every subset of copy factors gives the product-state average.
pub fn choi_otp(u: &ComplexMatrix, dims: &SystemDims, q: usize) -> Result<f64> {
    check_operands(u, dims, q)?;
    let n = dims.len();
    let big_d = dims.total();
    let norm = 1.0 / (big_d as f64).sqrt();
    let mut psi = vec![Complex64::new(0.0, 0.0); big_d * big_d];
    for a in 0..big_d {
        for b in 0..big_d {
            psi[a * big_d + b] = u[(a, b)] * norm;
        }
    }
    let radices: Vec<usize> = dims.dims().iter().chain(dims.dims()).copied().collect();
    let mut sum = 0.0;
    for mask in 0..(1usize << n) {
        let keep: Vec<bool> = (0..2 * n)
            .map(|f| if f < n { f == q } else { mask >> (f - n) & 1 == 1 })
            .collect();
        sum += subsystem_purity(&psi, &radices, &keep);
    }
    let prefactor: f64 = dims.dims().iter().map(|&d| d as f64 / (d as f64 + 1.0)).product();
    Ok(1.0 - prefactor * sum)
}

/// Normalized complex-Gaussian vector (Haar-distributed pure state).
pub fn haar_state(d: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = DMatrix::<Complex64>::from_fn(d, d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for c in 0..d {
        let rc = r[(c, c)];
        let phase = if rc.norm() > 0.0 { rc / rc.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..d {
            q[(row, c)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(q)
}

/// Random Hermitian matrix with entries of order `scale`.
pub fn random_hermitian(d: usize, scale: f64, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    (&g + &g.adjoint()).scale_real(0.5 * scale)
}

/// Conditional rotations generated by two independent random Hermitian blocks.
pub fn random_rotation_pair(d: usize, rng: &mut impl Rng) -> RotationPair {
    let t = rng.random_range(0.1..3.0);
    let h0 = random_hermitian(d, 1.0, rng);
    let h1 = random_hermitian(d, 1.0, rng);
    RotationPair {
        r0: hermitian_expm(&h0, t).expect("random Hermitian is valid"),
        r1: hermitian_expm(&h1, t).expect("random Hermitian is valid"),
    }
}

/// `|0><0| (x) R0^(1) (x) R0^(2) ... + |1><1| (x) R1^(1) (x) R1^(2) ...`.
pub fn block_unitary(pairs: &[RotationPair]) -> Result<ComplexMatrix> {
    if pairs.is_empty() {
        return Err(invalid!("block unitary needs at least one nucleus"));
    }
    let nuclear: usize = pairs.iter().map(RotationPair::dim).product();
    if 2 * nuclear > MAX_ORACLE_DIM {
        return Err(Error::ResourceLimit(format!(
            "block unitary of dimension {} exceeds {MAX_ORACLE_DIM}",
            2 * nuclear
        )));
    }
    let mut b0 = ComplexMatrix::identity(1);
    let mut b1 = ComplexMatrix::identity(1);
    for p in pairs {
        b0 = b0.kron(&p.r0);
        b1 = b1.kron(&p.r1);
    }
    Ok(ComplexMatrix::from_fn(2 * nuclear, |r, c| {
        match (r < nuclear, c < nuclear) {
            (true, true) => b0[(r, c)],
            (false, false) => b1[(r - nuclear, c - nuclear)],
            _ => Complex64::new(0.0, 0.0),
        }
    }))
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0.0 {
            return other;
        }
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * other.n / n,
            m2: self.m2 + other.m2 + delta * delta * self.n * other.n / n,
        }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (self.m2 / (self.n - 1.0) / self.n).sqrt()
    }
}

/// Sample mean and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Runs `sample` `samples` times over fixed shards, each shard seeded from
/// `(seed, shard index)`, so the result is independent of the worker count.
fn sharded_estimate<F>(samples: usize, seed: u64, sample: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha20Rng) -> f64 + Sync,
{
    if samples == 0 {
        return Err(invalid!("need at least one sample"));
    }
    let shards = samples.div_ceil(SHARD_SIZE);
    let parts: Vec<Moments> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let count = SHARD_SIZE.min(samples - s * SHARD_SIZE);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(sample(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(Estimate {
        mean: total.mean,
        stderr: total.stderr(),
    })
}

/// Monte-Carlo one-tangling power: the one-tangle `1 - Tr(rho_q^2)` of
/// `u |psi_0> (x) ... (x) |psi_n>` averaged over Haar-random local states.
pub fn mc_otp(
    u: &ComplexMatrix,
    dims: &SystemDims,
    q: usize,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    check_operands(u, dims, q)?;
    let radices = dims.dims().to_vec();
    let keep: Vec<bool> = (0..radices.len()).map(|f| f == q).collect();
    sharded_estimate(samples, seed, |rng| {
        let mut state = vec![Complex64::new(1.0, 0.0)];
        for &d in &radices {
            let local = haar_state(d, rng);
            state = state
                .iter()
                .flat_map(|&s| local.iter().map(move |&l| s * l))
                .collect();
        }
        let out = u.apply(&state);
        1.0 - subsystem_purity(&out, &radices, &keep)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PedersenReport {
    pub mc: f64,
    pub stderr: f64,
    pub closed_form: f64,
}

impl PedersenReport {
    /// `|mc - closed_form| <= k * stderr`, with a floor for exact samples.
    pub fn within(&self, k: f64) -> bool {
        (self.mc - self.closed_form).abs() <= k * self.stderr + 1e-12
    }
}

/// Haar average of `|<psi| R0^dag R1 |psi>|^2` against the closed form
/// `(d + |Tr(R0^dag R1)|^2) / (d (d + 1))`.
pub fn pedersen_check(rp: &RotationPair, samples: usize, seed: u64) -> Result<PedersenReport> {
    let w = &rp.r0.adjoint() * &rp.r1;
    let d = w.dim();
    let df = d as f64;
    let closed_form = (df + w.trace().norm_sqr()) / (df * (df + 1.0));
    let est = sharded_estimate(samples, seed, |rng| {
        let psi = haar_state(d, rng);
        let wpsi = w.apply(&psi);
        psi.iter()
            .zip(&wpsi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    })?;
    Ok(PedersenReport {
        mc: est.mean,
        stderr: est.stderr,
        closed_form,
    })
}
