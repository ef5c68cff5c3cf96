//! Parameter sweeps, nuclear level degeneracies and strain-angle regimes.
//!
//! Sweep axes are dimensionless: `x = |a| / nu` and `y = Delta_Q / nu`, with
//! the sign of `a` taken from the template nucleus. Degeneracy loci are
//! expressed in the signed ratio `a / nu`.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::evolution::{BlockPropagator, EvolutionSpec};
use crate::model::{build_blocks, non_collinear_operator, NcVariant, NucleusParams, Quadrupole};
use crate::spin_algebra::{hermitian_eigen, spin_operators, Spin};
use crate::sweep::{Axis, SweepResult};
use crate::tangle::{nuclear_otp, G1Value};
use crate::{Error, Result};

pub const DEFAULT_TIME_STEPS: usize = 512;

/// How the evolution time of each sweep cell is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeMode {
    /// One fixed total duration, us.
    FixedT(f64),
    /// Maximum over `t_k = k t_max / steps`, `k = 1..=steps`.
    MaxOverGrid { t_max: f64, steps: usize },
}

impl TimeMode {
    pub fn times(&self) -> Vec<f64> {
        match *self {
            TimeMode::FixedT(t) => vec![t],
            TimeMode::MaxOverGrid { t_max, steps } => {
                (1..=steps).map(|k| t_max * k as f64 / steps as f64).collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    /// `|a| / nu`
    pub x_axis: Axis,
    /// `Delta_Q / nu`
    pub y_axis: Axis,
    pub template: NucleusParams,
    pub time_mode: TimeMode,
}

impl SweepGrid {
    /// Uniform grid with the conventional axis names.
    pub fn uniform(
        x: (f64, f64, usize),
        y: (f64, f64, usize),
        template: NucleusParams,
        time_mode: TimeMode,
    ) -> Self {
        Self {
            x_axis: Axis::linspace("abs_a_over_nu", x.0, x.1, x.2),
            y_axis: Axis::linspace("delta_q_over_nu", y.0, y.1, y.2),
            template,
            time_mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.x_axis.validate()?;
        self.y_axis.validate()?;
        self.template.validate()?;
        if self.template.nu_larmor == 0.0 {
            return Err(invalid!("sweep template needs a nonzero Larmor frequency"));
        }
        match self.time_mode {
            TimeMode::FixedT(t) if !(t.is_finite() && t >= 0.0) => {
                Err(invalid!("fixed time must be finite and >= 0, got {t}"))
            }
            TimeMode::MaxOverGrid { t_max, steps } if !(t_max.is_finite() && t_max > 0.0) || steps == 0 => {
                Err(invalid!("time grid needs t_max > 0 and steps >= 1"))
            }
            _ => Ok(()),
        }
    }

    fn sign(&self) -> f64 {
        if self.template.a < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Nucleus at cell `(x, y)`.
    pub fn cell_params(&self, x: f64, y: f64) -> NucleusParams {
        let nu = self.template.nu_larmor;
        NucleusParams {
            a: self.sign() * x * nu,
            quadrupole: Quadrupole::Direct { delta_q: y * nu },
            ..self.template.clone()
        }
    }

    fn cells(&self) -> Vec<(f64, f64)> {
        self.y_axis
            .values
            .iter()
            .flat_map(|&y| self.x_axis.values.iter().map(move |&x| (x, y)))
            .collect()
    }
}

/// One-tangling power of a single nucleus, maximized over the time mode.
pub fn single_nucleus_otp(
    p: &NucleusParams,
    ev: &EvolutionSpec,
    variant: NcVariant,
    time_mode: &TimeMode,
) -> Result<f64> {
    let prop = BlockPropagator::new(&build_blocks(p, variant)?)?;
    let mut best = 0.0f64;
    for t in time_mode.times() {
        let tr = prop.overlap_trace(&ev.with_duration(t))?;
        best = best.max(nuclear_otp(G1Value::from_trace(tr, p.dim())?));
    }
    Ok(best)
}

/// One-tangling power over the `(|a|/nu, Delta_Q/nu)` grid.
pub fn sweep2d(grid: &SweepGrid, ev: &EvolutionSpec, variant: NcVariant) -> Result<SweepResult> {
    grid.validate()?;
    ev.validate()?;
    let values = grid
        .cells()
        .par_iter()
        .map(|&(x, y)| single_nucleus_otp(&grid.cell_params(x, y), ev, variant, &grid.time_mode))
        .collect::<Result<Vec<_>>>()?;
    SweepResult::two_d(grid.x_axis.clone(), grid.y_axis.clone(), "otp", values)
}

/// Smallest level spacing within either block, in units of the Larmor
/// frequency. With `full = false` the non-collinear term is dropped and the
/// levels are the diagonal entries.
pub fn level_gap(p: &NucleusParams, variant: NcVariant, full: bool) -> Result<f64> {
    let p = if full {
        p.clone()
    } else {
        NucleusParams { a_nc: 0.0, ..p.clone() }
    };
    let blocks = build_blocks(&p, variant)?;
    let omega = crate::angular(p.nu_larmor).abs();
    let mut gap = f64::INFINITY;
    for h in [&blocks.h0, &blocks.h1] {
        let levels: Vec<f64> = if full {
            hermitian_eigen(h)?.values
        } else {
            h.diagonal().iter().map(|z| z.re).collect()
        };
        for (i, a) in levels.iter().enumerate() {
            for b in &levels[i + 1..] {
                gap = gap.min((a - b).abs());
            }
        }
    }
    Ok(gap / omega)
}

/// Level-gap map over the grid; the template's time mode is ignored.
pub fn gap_map(grid: &SweepGrid, variant: NcVariant, full: bool) -> Result<SweepResult> {
    grid.validate()?;
    let values = grid
        .cells()
        .par_iter()
        .map(|&(x, y)| level_gap(&grid.cell_params(x, y), variant, full))
        .collect::<Result<Vec<_>>>()?;
    SweepResult::two_d(grid.x_axis.clone(), grid.y_axis.clone(), "gap_over_nu", values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElectronState {
    /// `|0>`, upper signs in the blocks.
    Up,
    Down,
}

impl ElectronState {
    /// Sign of the collinear term `+- (a/2) Iz`.
    pub fn sign(self) -> f64 {
        match self {
            ElectronState::Up => 1.0,
            ElectronState::Down => -1.0,
        }
    }
}

/// Where two diagonal levels cross, in the signed `(a/nu, Delta_Q/nu)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Locus {
    /// `Delta_Q/nu = intercept + slope * a/nu`
    Line { intercept: f64, slope: f64 },
    /// `a/nu = at`
    Vertical { at: f64 },
}

impl Locus {
    /// Residual that vanishes on the locus.
    pub fn residual(&self, a_over_nu: f64, dq_over_nu: f64) -> f64 {
        match *self {
            Locus::Line { intercept, slope } => dq_over_nu - intercept - slope * a_over_nu,
            Locus::Vertical { at } => a_over_nu - at,
        }
    }

    /// Perpendicular distance in grid-index units from the point
    /// `(a/nu, Delta_Q/nu)`, for cell sizes `dx` along `a/nu` and `dy` along
    /// `Delta_Q/nu`.
    pub fn cell_distance(&self, a_over_nu: f64, dq_over_nu: f64, dx: f64, dy: f64) -> f64 {
        match *self {
            Locus::Line { intercept, slope } => {
                let k = slope * dx / dy;
                let v = dq_over_nu / dy;
                let u = a_over_nu / dx;
                (v - intercept / dy - k * u).abs() / (1.0 + k * k).sqrt()
            }
            Locus::Vertical { at } => ((a_over_nu - at) / dx).abs(),
        }
    }
}

/// One level crossing of the diagonal Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyRow {
    pub delta_m: u32,
    pub electron_state: ElectronState,
    /// `(m, m')` with `m > m'`.
    pub transition: (f64, f64),
    pub locus: Locus,
    /// Non-collinear requirement as printed in the reference table.
    pub nc_condition: String,
}

/// Crossing of levels `m` and `m'` in block `state`:
/// `nu + Delta_Q (m + m') +- a/2 = 0`.
fn crossing(state: ElectronState, m: f64, mp: f64) -> Locus {
    let s = m + mp;
    if s == 0.0 {
        Locus::Vertical { at: -2.0 * state.sign() }
    } else {
        Locus::Line {
            intercept: -1.0 / s,
            slope: -state.sign() / (2.0 * s),
        }
    }
}

/// The spin-3/2 degeneracy catalog, twelve rows.
pub fn degeneracy_table(spin: Spin) -> Result<Vec<DegeneracyRow>> {
    if spin != Spin::THREE_HALVES {
        return Err(Error::Unsupported(format!(
            "the tabulated degeneracy conditions cover spin 3/2 only, got spin {spin}; use degeneracy_loci"
        )));
    }
    use ElectronState::{Down, Up};
    let rows: [(u32, ElectronState, (f64, f64), &str); 12] = [
        (1, Up, (1.5, 0.5), "-a_nc cos²θ = 0"),
        (1, Up, (0.5, -0.5), "∓(√3/2) a_nc sin2θ - (3/4) a_nc cos²θ = 0"),
        (1, Up, (-0.5, -1.5), "-a_nc cos²θ = 0"),
        (1, Down, (1.5, 0.5), "a_nc cos²θ = 0"),
        (1, Down, (0.5, -0.5), "±(√3/2) a_nc sin2θ + (3/4) a_nc cos²θ = 0"),
        (1, Down, (-0.5, -1.5), "a_nc cos²θ = 0"),
        (2, Up, (1.5, -0.5), "√3 a_nc sin2θ - a_nc cos²θ = 0"),
        (2, Up, (0.5, -1.5), "√3 a_nc sin2θ + a_nc cos²θ = 0"),
        (2, Down, (1.5, -0.5), "√3 a_nc sin2θ - a_nc cos²θ = 0"),
        (2, Down, (0.5, -1.5), "√3 a_nc sin2θ + a_nc cos²θ = 0"),
        (3, Up, (1.5, -1.5), "√3 a_nc sin2θ = 0"),
        (3, Down, (1.5, -1.5), "√3 a_nc sin2θ = 0"),
    ];
    Ok(rows
        .into_iter()
        .map(|(delta_m, electron_state, (m, mp), cond)| DegeneracyRow {
            delta_m,
            electron_state,
            transition: (m, mp),
            locus: crossing(electron_state, m, mp),
            nc_condition: cond.to_owned(),
        })
        .collect())
}

/// Every crossing of diagonal levels for any spin, without the
/// non-collinear column.
pub fn degeneracy_loci(spin: Spin) -> Vec<DegeneracyRow> {
    let ms = spin.m_values();
    let mut out = Vec::new();
    for state in [ElectronState::Up, ElectronState::Down] {
        for (i, &m) in ms.iter().enumerate() {
            for &mp in &ms[i + 1..] {
                out.push(DegeneracyRow {
                    delta_m: (m - mp).round() as u32,
                    electron_state: state,
                    transition: (m, mp),
                    locus: crossing(state, m, mp),
                    nc_condition: String::new(),
                });
            }
        }
    }
    out.sort_by_key(|r| r.delta_m);
    out
}

/// `|<m| nc |m'>|` for the chosen non-collinear operator.
pub fn transition_strength(spin: Spin, theta: f64, variant: NcVariant, m: f64, mp: f64) -> f64 {
    let ops = spin_operators(spin);
    let nc = non_collinear_operator(&ops, theta, variant);
    let j = spin.j();
    let row = (j - m).round() as usize;
    let col = (j - mp).round() as usize;
    nc[(row, col)].norm()
}

/// Strain-angle families and which transitions they open.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaRegime {
    pub expression: &'static str,
    /// Representative angle in `[0, pi)`.
    pub representative: f64,
    pub active_delta_m: Vec<u32>,
    pub description: &'static str,
}

pub fn theta_regimes() -> Vec<ThetaRegime> {
    let balanced = 0.5 * (0.6f64).acos();
    let dm1 = FRAC_PI_2 - 0.5 * 2f64.atan();
    vec![
        ThetaRegime {
            expression: "n pi",
            representative: 0.0,
            active_delta_m: vec![2],
            description: "sin 2θ vanishes; only Δm = ±2 transitions couple",
        },
        ThetaRegime {
            expression: "n pi ± arccos(3/5)/2",
            representative: balanced,
            active_delta_m: vec![1, 2],
            description: "|sin 2θ| = cos²θ; Δm = ±1 and ±2 couple with comparable strength",
        },
        ThetaRegime {
            expression: "n pi/2 ± arctan(2)/2",
            representative: dm1,
            active_delta_m: vec![1, 2],
            description: "|sin 2θ| - cos²θ is maximal; Δm = ±1 dominates",
        },
        ThetaRegime {
            expression: "pi/2 + n pi",
            representative: FRAC_PI_2,
            active_delta_m: vec![],
            description: "both sin 2θ and cos²θ vanish; no transition couples",
        },
    ]
}

/// Wraps an angle to `[0, pi)`, the period of `cos²θ` and `sin 2θ`.
pub fn reduce_theta(theta: f64) -> f64 {
    theta.rem_euclid(PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_3;

    fn template(theta: f64, a_nc: f64) -> NucleusParams {
        NucleusParams::spin_three_halves(12.98, 0.23, a_nc, 0.0, theta)
    }

    #[test]
    fn table_rows_match_crossings() {
        let rows = degeneracy_table(Spin::THREE_HALVES).unwrap();
        assert_eq!(rows.len(), 12);
        let first = &rows[0];
        assert_eq!(first.locus, Locus::Line { intercept: -0.5, slope: -0.25 });
        assert_eq!(rows[10].locus, Locus::Vertical { at: -2.0 });
        assert_eq!(rows[11].locus, Locus::Vertical { at: 2.0 });
        assert_eq!(rows[6].locus, Locus::Line { intercept: -1.0, slope: -0.5 });
        assert_eq!(rows[5].locus, Locus::Line { intercept: 0.5, slope: -0.25 });
        assert!(matches!(degeneracy_table(Spin::NINE_HALVES), Err(Error::Unsupported(_))));
        // general enumeration reproduces the same loci for spin 3/2
        let general = degeneracy_loci(Spin::THREE_HALVES);
        assert_eq!(general.len(), 12);
        for row in &rows {
            assert!(general.iter().any(|g| g.transition == row.transition
                && g.electron_state == row.electron_state
                && g.locus == row.locus));
        }
        assert_eq!(degeneracy_loci(Spin::NINE_HALVES).len(), 90);
    }

    #[test]
    fn loci_are_exact_level_crossings() {
        for row in degeneracy_loci(Spin::THREE_HALVES) {
            let a_over_nu = match row.locus {
                Locus::Vertical { at } => at,
                Locus::Line { .. } => 0.7,
            };
            let dq_over_nu = match row.locus {
                Locus::Line { intercept, slope } => intercept + slope * a_over_nu,
                Locus::Vertical { .. } => 0.3,
            };
            let nu = 12.98;
            let p = NucleusParams::spin_three_halves(nu, a_over_nu * nu, 0.0, dq_over_nu * nu, 0.4);
            let b = build_blocks(&p, NcVariant::Quadrupolar).unwrap();
            let h = if row.electron_state == ElectronState::Up { &b.h0 } else { &b.h1 };
            let (m, mp) = row.transition;
            let e = |m: f64| h[((1.5 - m) as usize, (1.5 - m) as usize)].re;
            assert!((e(m) - e(mp)).abs() / crate::angular(nu) < 1e-12, "{row:?}");
        }
    }

    #[test]
    fn on_locus_gap_vanishes_and_off_locus_gap_is_predicted() {
        let nu = 12.98;
        let p = NucleusParams::spin_three_halves(nu, 2.0 * nu, 0.05, 0.3 * nu, 0.4);
        assert!(level_gap(&p, NcVariant::Quadrupolar, false).unwrap() < 1e-12);
        // off-locus: levels w m + dq m^2 + (a/2) m, compare with brute force
        let (x, y) = (0.37, 0.81);
        let q = NucleusParams::spin_three_halves(nu, x * nu, 0.0, y * nu, 0.0);
        let mut expected = f64::INFINITY;
        for s in [1.0, -1.0] {
            let lv: Vec<f64> = [1.5, 0.5, -0.5, -1.5].iter().map(|m| m + y * m * m + s * 0.5 * x * m).collect();
            for i in 0..4 {
                for k in i + 1..4 {
                    expected = expected.min((lv[i] - lv[k]).abs());
                }
            }
        }
        assert_abs_diff_eq!(level_gap(&q, NcVariant::Quadrupolar, false).unwrap(), expected, epsilon = 1e-13);
    }

    #[test]
    fn gap_map_symmetric_under_coupling_sign() {
        let mk = |a: f64| SweepGrid::uniform((0.0, 4.0, 21), (0.0, 1.2, 13), NucleusParams { a, ..template(FRAC_PI_3, 0.058) }, TimeMode::FixedT(1.0));
        let pos = gap_map(&mk(0.23), NcVariant::Quadrupolar, false).unwrap();
        let neg = gap_map(&mk(-0.23), NcVariant::Quadrupolar, false).unwrap();
        assert_eq!(pos.values, neg.values);
        let full = gap_map(&mk(0.23), NcVariant::Quadrupolar, true).unwrap();
        assert!(full.values.iter().zip(&pos.values).all(|(f, d)| (f - d).abs() < 0.05));
    }

    #[test]
    fn perpendicular_strain_sweep_is_dark() {
        let grid = SweepGrid::uniform((0.0, 4.0, 25), (0.0, 1.2, 25), template(FRAC_PI_2, 0.058), TimeMode::FixedT(23.4));
        let s = sweep2d(&grid, &EvolutionSpec::cpmg(23.4, 1), NcVariant::Quadrupolar).unwrap();
        assert!(s.max() < 1e-6, "max = {}", s.max());
    }

    #[test]
    fn collinear_cpmg_sweep_is_zero() {
        let grid = SweepGrid::uniform((0.0, 4.0, 20), (0.0, 1.2, 20), template(FRAC_PI_3, 0.0), TimeMode::FixedT(23.4));
        for n in [1, 5] {
            let s = sweep2d(&grid, &EvolutionSpec::cpmg(23.4, n), NcVariant::Quadrupolar).unwrap();
            assert!(s.max() < 1e-10);
        }
    }

    #[test]
    fn transverse_x_opens_only_single_steps() {
        let grid = SweepGrid::uniform((0.0, 4.0, 200), (0.0, 1.2, 200), template(FRAC_PI_3, 0.058), TimeMode::FixedT(23.4));
        let s = sweep2d(&grid, &EvolutionSpec::cpmg(23.4, 1), NcVariant::TransverseX).unwrap();
        let rows = degeneracy_table(Spin::THREE_HALVES).unwrap();
        let (dx, dy) = (4.0 / 199.0, 1.2 / 199.0);
        let dist = |x: f64, y: f64, dm: u32| {
            rows.iter()
                .filter(|r| r.delta_m == dm)
                .map(|r| r.locus.cell_distance(x, y, dx, dy))
                .fold(f64::INFINITY, f64::min)
        };
        let mut hot = 0;
        let mut dark_cells = 0;
        for (iy, &y) in s.axes[1].values.iter().enumerate() {
            for (ix, &x) in s.axes[0].values.iter().enumerate() {
                let v = s.get(ix, iy);
                let d1 = dist(x, y, 1);
                if v > 0.15 {
                    hot += 1;
                    assert!(d1 <= 1.5, "hot cell ({x}, {y}) off the single-step loci");
                }
                if dist(x, y, 2) <= 1.5 && d1 > 5.0 && dist(x, y, 3) > 5.0 {
                    dark_cells += 1;
                    assert!(v < 0.02, "double-step locus lit at ({x}, {y}): {v}");
                }
            }
        }
        assert!(hot > 0 && dark_cells > 0);
    }

    #[test]
    fn max_over_grid_grows_with_window() {
        let short = SweepGrid::uniform((0.5, 3.5, 6), (0.0, 1.0, 6), template(FRAC_PI_3, 0.058), TimeMode::MaxOverGrid { t_max: 5.0, steps: 40 });
        let long = SweepGrid { time_mode: TimeMode::MaxOverGrid { t_max: 10.0, steps: 80 }, ..short.clone() };
        let ev = EvolutionSpec::cpmg(1.0, 1);
        let a = sweep2d(&short, &ev, NcVariant::Quadrupolar).unwrap();
        let b = sweep2d(&long, &ev, NcVariant::Quadrupolar).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| y >= x));
    }

    #[test]
    fn cell_distance_units() {
        let line = Locus::Line { intercept: 0.0, slope: 1.0 };
        // point (1, 0) from y = x with square cells of 0.5
        assert_abs_diff_eq!(line.cell_distance(1.0, 0.0, 0.5, 0.5), 2f64.sqrt(), epsilon = 1e-12);
        let v = Locus::Vertical { at: 2.0 };
        assert_abs_diff_eq!(v.cell_distance(2.1, 7.0, 0.02, 1.0), 5.0, epsilon = 1e-9);
        assert_eq!(line.residual(0.3, 0.3), 0.0);
    }

    #[test]
    fn transition_matrix_elements() {
        let s = Spin::THREE_HALVES;
        let q = NcVariant::Quadrupolar;
        let th = 0.4f64;
        let s3 = 3f64.sqrt();
        assert_abs_diff_eq!(transition_strength(s, th, q, 1.5, 0.5), s3 * (2.0 * th).sin().abs(), epsilon = 1e-14);
        assert_abs_diff_eq!(transition_strength(s, th, q, 1.5, -0.5), s3 * th.cos().powi(2), epsilon = 1e-14);
        assert_eq!(transition_strength(s, th, q, 0.5, -0.5), 0.0);
        assert_eq!(transition_strength(s, th, q, 1.5, -1.5), 0.0);
        let x = NcVariant::TransverseX;
        assert_abs_diff_eq!(transition_strength(s, th, x, 0.5, -0.5), 1.0, epsilon = 1e-14);
        assert_eq!(transition_strength(s, th, x, 1.5, -0.5), 0.0);
    }

    #[test]
    fn regimes_catalog() {
        let r = theta_regimes();
        assert_eq!(r.len(), 4);
        let b = r[1].representative;
        assert_abs_diff_eq!((2.0 * b).sin().abs(), b.cos().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(b / PI, 0.1476, epsilon = 1e-4);
        // the third family maximizes |sin 2θ| - cos²θ
        let f = |t: f64| (2.0 * t).sin().abs() - t.cos().powi(2);
        let t3 = r[2].representative;
        assert!(f(t3) > f(t3 + 1e-3) && f(t3) > f(t3 - 1e-3));
        assert_abs_diff_eq!(t3 / PI, 0.3238, epsilon = 1e-3);
        let t4 = r[3].representative;
        for (m, mp) in [(1.5, 0.5), (1.5, -0.5)] {
            assert!(transition_strength(Spin::THREE_HALVES, t4, NcVariant::Quadrupolar, m, mp) < 1e-15);
        }
        assert!(transition_strength(Spin::THREE_HALVES, 0.0, NcVariant::Quadrupolar, 1.5, 0.5) < 1e-15);
        assert_abs_diff_eq!(reduce_theta(-0.5), PI - 0.5, epsilon = 1e-15);
    }
}
