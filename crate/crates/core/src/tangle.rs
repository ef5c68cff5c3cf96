//! Makhlin invariant, one-tangling powers and the closed-form spin-3/2 invariant.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::angular;
use crate::error::invalid;
use crate::evolution::RotationPair;
use crate::model::NucleusParams;
use crate::spin_algebra::{trace_inner, Spin};
use crate::{Error, Result};

const G1_TOL: f64 = 1e-9;

/// Generalized Makhlin invariant of one nucleus together with its dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct G1Value {
    pub value: f64,
    pub d: usize,
}

impl G1Value {
    /// Accepts values within `1e-9` of `[0, 1]` and clamps them.
    pub fn new(value: f64, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(invalid!("dimension must be positive"));
        }
        if !(value.is_finite() && (-G1_TOL..=1.0 + G1_TOL).contains(&value)) {
            return Err(invalid!("G1 must lie in [0, 1], got {value}"));
        }
        Ok(Self {
            value: value.clamp(0.0, 1.0),
            d,
        })
    }

    /// `|Tr(R0^dag R1)|^2 / d^2` from an already computed trace.
    pub fn from_trace(tr: num_complex::Complex64, d: usize) -> Result<Self> {
        let df = d as f64;
        Self::new(tr.norm_sqr() / (df * df), d)
    }
}

/// `|Tr(R0^dag R1)|^2 / d^2`.
pub fn makhlin_g1(rp: &RotationPair) -> G1Value {
    let d = rp.dim();
    let tr = trace_inner(&rp.r0, &rp.r1).expect("rotation pair has matching dimensions");
    let df = d as f64;
    G1Value {
        value: (tr.norm_sqr() / (df * df)).clamp(0.0, 1.0),
        d,
    }
}

/// One-tangling power across the cut isolating a single nucleus.
pub fn nuclear_otp(g1: G1Value) -> f64 {
    let d = g1.d as f64;
    d / (3.0 * (d + 1.0)) * (1.0 - g1.value)
}

/// One-tangling power of the electron against every nucleus at once.
pub fn electronic_otp(g1s: &[G1Value]) -> Result<f64> {
    if g1s.is_empty() {
        return Err(invalid!("electronic one-tangling power needs at least one nucleus"));
    }
    let prod: f64 = g1s
        .iter()
        .map(|g| {
            let d = g.d as f64;
            (1.0 + d * g.value) / (1.0 + d)
        })
        .product();
    Ok((1.0 - prod) / 3.0)
}

/// `ln prod_i f_i^{w_i}` with `f_i = (1 + d_i g_i)/(1 + d_i)`.
///
/// Each term is computed as `ln1p(-d_i (1 - g_i)/(1 + d_i))`, which keeps
/// precision for products over `10^5` nuclei close to one.
pub fn log_electronic_factor(g1: G1Value, weight: f64) -> f64 {
    let d = g1.d as f64;
    weight * (-(d * (1.0 - g1.value)) / (1.0 + d)).ln_1p()
}

/// Electronic one-tangling power where nucleus `i` occurs `weights[i]` times.
pub fn electronic_otp_weighted(g1s: &[(G1Value, f64)]) -> Result<f64> {
    if g1s.is_empty() {
        return Err(invalid!("electronic one-tangling power needs at least one nucleus"));
    }
    let log_prod: f64 = g1s.iter().map(|&(g, w)| log_electronic_factor(g, w)).sum();
    Ok(-log_prod.exp_m1() / 3.0)
}

/// `sin(sqrt(x) t/2) / sqrt(x)`, with its Taylor limit near `x = 0`.
fn sin_over_root(x: f64, t: f64) -> f64 {
    if x * t * t < 1e-8 {
        0.5 * t * (1.0 - x * t * t / 24.0)
    } else {
        let r = x.sqrt();
        (0.5 * r * t).sin() / r
    }
}

/// Closed-form free-evolution `G1` of a spin-3/2 nucleus.
///
/// Inputs (`nu_larmor`, `a`, `a_nc`, `Delta_Q`) are converted from MHz to
/// rad/us before entering the formula. Exact for strain angle `0` or `pi`
/// with the quadrupolar non-collinear term, and for any angle when
/// `a_nc = 0`.
pub fn analytic_g1(p: &NucleusParams, t: f64) -> Result<f64> {
    if p.spin != Spin::THREE_HALVES {
        return Err(Error::Unsupported(format!(
            "closed-form G1 exists only for spin 3/2, got spin {}",
            p.spin
        )));
    }
    p.validate()?;
    if !t.is_finite() {
        return Err(invalid!("time must be finite, got {t}"));
    }
    let w = angular(p.nu_larmor);
    let a = angular(p.a);
    let anc = angular(p.a_nc);
    let dq = angular(p.delta_q());
    let n3 = 3.0 * anc * anc;
    let dm = dq - w;
    let dp = dq + w;
    let x1 = n3 + (a - 2.0 * dm).powi(2);
    let x2 = n3 + (a + 2.0 * dp).powi(2);
    let x3 = n3 + (a + 2.0 * dm).powi(2);
    let x4 = n3 + (a - 2.0 * dp).powi(2);
    let half_cos = |x: f64| (0.5 * x.sqrt() * t).cos();
    let c1 = half_cos(x1) * half_cos(x3);
    let c2 = half_cos(x2) * half_cos(x4);
    let c3 = (a * a + n3 - 4.0 * dm * dm) * sin_over_root(x1, t) * sin_over_root(x3, t);
    let c4 = (-a * a - n3 + 4.0 * dp * dp) * sin_over_root(x2, t) * sin_over_root(x4, t);
    let c13 = c1 - c3;
    let c24 = c2 + c4;
    let g = 0.25 * (c13 * c13 + c24 * c24 + 2.0 * c13 * c24 * (a * t).cos());
    Ok(g.clamp(0.0, 1.0))
}

/// `G1 = cos^2(a t) (1 + cos(a t)) / 2` for `nu = a/2`, no quadrupole, no
/// non-collinear term. `a` in MHz, converted to rad/us.
pub fn simplified_g1(a: f64, t: f64) -> f64 {
    let c = (angular(a) * t).cos();
    0.5 * c * c * (1.0 + c)
}

/// Zeros of [`simplified_g1`]: `(2k+1) pi / a` and `(2k+1) pi / (2a)` for
/// `k = 0..=k_max`, sorted ascending.
pub fn resonance_times(a: f64, k_max: u32) -> Result<Vec<f64>> {
    if a == 0.0 || !a.is_finite() {
        return Err(invalid!("resonance times need a finite nonzero coupling, got {a}"));
    }
    let w = angular(a).abs();
    let mut out: Vec<f64> = (0..=k_max)
        .flat_map(|k| {
            let odd = f64::from(2 * k + 1) * PI;
            [odd / w, odd / (2.0 * w)]
        })
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}
