//! Dense complex linear algebra for small Hermitian systems.
//!
//! Everything here works on square matrices of dimension at most a few
//! hundred (the brute-force oracle) and usually 2..=10 (single nuclei).
//! Matrix exponentials are only ever taken of Hermitian generators and go
//! through the eigendecomposition `h = V diag(lambda) V^dag`, so the result is
//! unitary up to rounding no matter how large `lambda * t` gets.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::{Error, Result};

/// Largest generator accepted by [`hermitian_expm`].
pub const MAX_EXPM_DIM: usize = 32;

/// Relative Hermiticity tolerance accepted by [`hermitian_eigen`].
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &v) in diag.iter().enumerate() {
            m[(k, k)] = v;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &v) in diag.iter().enumerate() {
            m[(k, k)] = Complex64::new(v, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            inner: DMatrix::from_fn(dim, dim, f),
        }
    }

    /// Builds a matrix from row-major entries, checking shape and finiteness.
    pub fn from_row_major(dim: usize, entries: &[Complex64]) -> Result<Self> {
        if dim == 0 {
            return Err(invalid!("matrix dimension must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(invalid!(
                "{} entries do not form a {dim}x{dim} matrix",
                entries.len()
            ));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid!("matrix entries must be finite"));
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(dim, dim, entries),
        })
    }

    pub(crate) fn from_nalgebra(inner: DMatrix<Complex64>) -> Self {
        debug_assert!(inner.is_square());
        Self { inner }
    }

    pub fn as_nalgebra(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            inner: &self.inner * s,
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.inner.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Kronecker product `self (x) other`; `self` indexes the slow factor.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            inner: self.inner.kronecker(&other.inner),
        }
    }

    /// `a b - b a`.
    pub fn commutator(a: &Self, b: &Self) -> Self {
        &(a * b) - &(b * a)
    }

    /// `||self - self^dag||_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.inner - self.inner.adjoint())
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `||self self^dag - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = &self.inner * self.inner.adjoint();
        let mut acc = 0.0;
        for r in 0..self.dim() {
            for c in 0..self.dim() {
                let target = if r == c { ONE } else { ZERO };
                acc += (prod[(r, c)] - target).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() < tol
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::identity(self.dim());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim());
        let n = self.dim();
        (0..n)
            .map(|r| (0..n).map(|c| self.inner[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|k| self.inner[(k, k)]).collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.inner[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.inner[idx]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in product");
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in sum");
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in difference");
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim(), self.dim())?;
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|c| {
                    let z = self.inner[(r, c)];
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Spin quantum number, stored as `2j` so half-integers are exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { twice: 1 };
    pub const THREE_HALVES: Spin = Spin { twice: 3 };
    pub const NINE_HALVES: Spin = Spin { twice: 9 };

    /// Accepts `j` in `{1/2, 1, 3/2, ...}`.
    pub fn new(j: f64) -> Result<Self> {
        if !j.is_finite() || j <= 0.0 {
            return Err(invalid!("spin must be a positive half-integer, got {j}"));
        }
        let twice = (2.0 * j).round();
        if (2.0 * j - twice).abs() > 1e-9 {
            return Err(invalid!("spin must be a half-integer, got {j}"));
        }
        let dim = twice as usize + 1;
        if dim > MAX_EXPM_DIM {
            return Err(invalid!(
                "spin {j} has dimension {dim}, above the supported {MAX_EXPM_DIM}"
            ));
        }
        Ok(Spin {
            twice: twice as u32,
        })
    }

    pub fn from_twice(twice: u32) -> Result<Self> {
        Self::new(twice as f64 / 2.0)
    }

    pub fn j(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn twice_j(self) -> u32 {
        self.twice
    }

    /// Hilbert-space dimension `2j + 1`.
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// Magnetic quantum numbers `j, j-1, ..., -j` (the basis order of [`SpinOps`]).
    pub fn m_values(self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.j() - k as f64).collect()
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(j: f64) -> Result<Self> {
        Spin::new(j)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.j()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Angular-momentum operators (hbar = 1) in the `|j, m>` basis, `m` descending.
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub spin: Spin,
    pub ix: ComplexMatrix,
    pub iy: ComplexMatrix,
    pub iz: ComplexMatrix,
}

impl SpinOps {
    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn j(&self) -> f64 {
        self.spin.j()
    }

    /// `I+ = Ix + i Iy`.
    pub fn raising(&self) -> ComplexMatrix {
        &self.ix + &self.iy.scale(I)
    }
}

/// Ladder-operator construction: `<m+1| I+ |m> = sqrt(j(j+1) - m(m+1))`.
pub fn spin_operators(spin: Spin) -> SpinOps {
    let j = spin.j();
    let d = spin.dim();
    let m = spin.m_values();
    let mut raise = ComplexMatrix::zeros(d);
    // basis index k holds m = j - k, so I+ maps column k to row k - 1
    for k in 1..d {
        let mk = m[k];
        raise[(k - 1, k)] = Complex64::new((j * (j + 1.0) - mk * (mk + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    let ix = (&raise + &lower).scale_real(0.5);
    let iy = (&raise - &lower).scale(Complex64::new(0.0, -0.5));
    let iz = ComplexMatrix::from_real_diagonal(&m);
    SpinOps { spin, ix, iy, iz }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the orthonormal eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(-i h t) = V diag(exp(-i lambda t)) V^dag`.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let d = self.dim();
        let phases: Vec<Complex64> = self
            .values
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * t))
            .collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(d, |r, c| {
            (0..d)
                .map(|k| v[(r, k)] * phases[k] * v[(c, k)].conj())
                .sum()
        })
    }
}

/// Hermitian eigendecomposition with input validation.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    if !h.is_finite() {
        return Err(invalid!("generator has non-finite entries"));
    }
    if h.dim() > MAX_EXPM_DIM {
        return Err(Error::ResourceLimit(format!(
            "generator dimension {} exceeds {MAX_EXPM_DIM}",
            h.dim()
        )));
    }
    let scale = h.frobenius_norm().max(1.0);
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * scale {
        return Err(invalid!(
            "generator is not Hermitian (||h - h^dag||_F = {defect:.3e})"
        ));
    }
    // symmetrize so the solver sees an exactly Hermitian input
    let sym = (h.as_nalgebra() + h.as_nalgebra().adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..h.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(h.dim(), h.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix::from_nalgebra(vectors),
    })
}

/// `exp(-i h t)` for Hermitian `h` (rad/us) and `t` in us.
pub fn hermitian_expm(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if !t.is_finite() {
        return Err(invalid!("time must be finite, got {t}"));
    }
    Ok(hermitian_eigen(h)?.propagator(t))
}

/// `Tr(a^dag b) = sum_mn conj(a_mn) b_mn`.
pub fn trace_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(invalid!(
            "dimension mismatch in trace inner product: {} vs {}",
            a.dim(),
            b.dim()
        ));
    }
    Ok(a.as_nalgebra()
        .iter()
        .zip(b.as_nalgebra().iter())
        .map(|(x, y)| x.conj() * y)
        .sum())
}
