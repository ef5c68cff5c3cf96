//! Annulus-discretized Gaussian quantum dots and ensemble dephasing.
//!
//! The dot is cut into concentric rings `r_k = k dr`. Every nucleus on a ring
//! shares the same couplings `a(r) = a_scale exp(-r^2 / 2 sigma^2)` and
//! `omega_Q(r) = wq_scale exp(-r^2 / 2 sigma^2)`, and the number of nuclei on
//! a ring grows linearly with its radius.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::evolution::{BlockPropagator, EvolutionSpec};
use crate::model::{build_blocks, NcVariant, NucleusParams, Quadrupole};
use crate::spin_algebra::Spin;
use crate::sweep::{Axis, SweepResult};
use crate::tangle::{log_electronic_factor, G1Value};
use crate::{Error, Result};

/// One nuclear species in the dot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSpec {
    pub label: String,
    pub spin: Spin,
    /// Gyromagnetic ratio as Larmor frequency per field, MHz/T.
    pub nu_per_tesla: f64,
    pub fraction: f64,
}

impl SpeciesSpec {
    pub fn gallium71(fraction: f64) -> Self {
        Self {
            label: "Ga71".into(),
            spin: Spin::THREE_HALVES,
            nu_per_tesla: 12.98,
            fraction,
        }
    }

    pub fn indium115(fraction: f64) -> Self {
        Self {
            label: "In115".into(),
            spin: Spin::NINE_HALVES,
            nu_per_tesla: 9.33,
            fraction,
        }
    }
}

/// Peak of a unit-area Gaussian of width 7 nm scaled by `-15.49`, in MHz.
/// Rounds to `-0.88`.
pub const DEFAULT_A_SCALE: f64 = -0.882_802_274_774_027_6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// nm
    pub radius_max: f64,
    /// nm
    pub dr: f64,
    /// nm
    pub sigma: f64,
    /// Peak `a / 2pi`, MHz, signed.
    pub a_scale: f64,
    /// Peak `omega_Q / 2pi`, MHz.
    pub wq_scale: f64,
    pub theta: f64,
    /// MHz, shared by every nucleus.
    pub a_nc: f64,
    pub species_mix: Vec<SpeciesSpec>,
    /// Tesla
    pub b_field: f64,
    pub n_target: u64,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            radius_max: 25.0,
            dr: 0.056,
            sigma: 7.0,
            a_scale: DEFAULT_A_SCALE,
            wq_scale: 0.030,
            theta: std::f64::consts::FRAC_PI_3,
            a_nc: 0.0051,
            species_mix: vec![SpeciesSpec::gallium71(1.0)],
            b_field: 1.0,
            n_target: 80_247,
            seed: 0,
        }
    }
}

impl EnsembleSpec {
    /// Half gallium-71, half indium-115.
    pub fn mixed_gallium_indium() -> Self {
        Self {
            species_mix: vec![SpeciesSpec::gallium71(0.5), SpeciesSpec::indium115(0.5)],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("radius_max", self.radius_max),
            ("dr", self.dr),
            ("sigma", self.sigma),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("a_scale", self.a_scale),
            ("wq_scale", self.wq_scale),
            ("theta", self.theta),
            ("a_nc", self.a_nc),
            ("b_field", self.b_field),
        ] {
            if !v.is_finite() {
                return Err(invalid!("{name} must be finite, got {v}"));
            }
        }
        if self.species_mix.is_empty() {
            return Err(invalid!("species_mix is empty"));
        }
        if self.species_mix.iter().any(|s| !(s.fraction >= 0.0 && s.fraction.is_finite())) {
            return Err(invalid!("species fractions must be nonnegative"));
        }
        let total: f64 = self.species_mix.iter().map(|s| s.fraction).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid!("species fractions sum to {total}, expected 1"));
        }
        if self.n_target == 0 {
            return Err(invalid!("n_target must be positive"));
        }
        Ok(())
    }

    pub fn n_annuli(&self) -> usize {
        (self.radius_max / self.dr + 1e-9).floor() as usize + 1
    }

    fn profile(&self, r: f64) -> f64 {
        (-r * r / (2.0 * self.sigma * self.sigma)).exp()
    }
}

/// Nuclei at one radius belonging to one species.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    /// nm
    pub r: f64,
    pub multiplicity: u64,
    pub params: NucleusParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub annuli: Vec<Annulus>,
    pub n_total: u64,
}

/// Aggregate couplings of an ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub n_total: u64,
    /// `sum_i a_i / 2pi`, MHz.
    pub a_total_mhz: f64,
    /// `mean |a_i| / 2pi`, MHz.
    pub mean_abs_a_mhz: f64,
    /// `mean |a_i|` in rad/us.
    pub mean_abs_a_angular: f64,
}

/// Per-annulus counts: one nucleus at the centre, the rest proportional to
/// the radius index and rounded half to even, residual on the outermost ring.
pub fn annulus_multiplicities(n_annuli: usize, n_target: u64) -> Result<Vec<u64>> {
    if n_annuli == 0 || n_target == 0 {
        return Err(invalid!("zero total multiplicity"));
    }
    if n_annuli == 1 {
        return Ok(vec![n_target]);
    }
    let rest = (n_target - 1) as f64;
    let weight_sum = (n_annuli * (n_annuli - 1) / 2) as f64;
    let mut m: Vec<u64> = std::iter::once(1)
        .chain((1..n_annuli).map(|k| (rest * k as f64 / weight_sum).round_ties_even() as u64))
        .collect();
    let assigned: u64 = m.iter().sum();
    let last = m.last_mut().expect("nonempty");
    let adjusted = (*last + n_target).checked_sub(assigned);
    *last = adjusted.ok_or_else(|| invalid!("rounding overshoots the target count"))?;
    Ok(m)
}

/// Global per-species counts: floors of `n f_s` plus largest remainders.
fn species_quotas(n: u64, fractions: &[f64]) -> Vec<u64> {
    let raw: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut q: Vec<u64> = raw.iter().map(|x| x.floor() as u64).collect();
    let mut left = n - q.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..q.len()).collect();
    order.sort_by(|&i, &j| (raw[j] - raw[j].floor()).total_cmp(&(raw[i] - raw[i].floor())).then(i.cmp(&j)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        q[i] += 1;
        left -= 1;
    }
    q
}

/// Splits each ring among species. Every ring first gets `floor(m_k f_s)` of
/// each species; the remaining units of each global quota are shuffled with
/// the seed and dealt to rings in order, so totals hit the quotas exactly.
fn assign_species(mults: &[u64], fractions: &[f64], seed: u64) -> Vec<Vec<u64>> {
    let n: u64 = mults.iter().sum();
    let quotas = species_quotas(n, fractions);
    let mut split: Vec<Vec<u64>> = mults
        .iter()
        .map(|&m| fractions.iter().map(|f| (m as f64 * f).floor() as u64).collect())
        .collect();
    let mut pool: Vec<usize> = Vec::new();
    for (s, &quota) in quotas.iter().enumerate() {
        let used: u64 = split.iter().map(|row| row[s]).sum();
        pool.extend(std::iter::repeat_n(s, (quota - used) as usize));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    let mut it = pool.into_iter();
    for (row, &m) in split.iter_mut().zip(mults) {
        let missing = m - row.iter().sum::<u64>();
        for _ in 0..missing {
            row[it.next().expect("pool covers every ring")] += 1;
        }
    }
    split
}

/// Builds the annulus ensemble described by `spec`.
pub fn gaussian_ensemble(spec: &EnsembleSpec) -> Result<Ensemble> {
    spec.validate()?;
    let n_annuli = spec.n_annuli();
    let mults = annulus_multiplicities(n_annuli, spec.n_target)?;
    let fractions: Vec<f64> = spec.species_mix.iter().map(|s| s.fraction).collect();
    let split = assign_species(&mults, &fractions, spec.seed);
    let mut annuli = Vec::new();
    for (k, counts) in split.iter().enumerate() {
        let r = k as f64 * spec.dr;
        let g = spec.profile(r);
        for (species, &count) in spec.species_mix.iter().zip(counts) {
            if count == 0 {
                continue;
            }
            annuli.push(Annulus {
                r,
                multiplicity: count,
                params: NucleusParams {
                    spin: species.spin,
                    nu_larmor: species.nu_per_tesla * spec.b_field,
                    a: spec.a_scale * g,
                    a_nc: spec.a_nc,
                    quadrupole: Quadrupole::Strain {
                        omega_q: spec.wq_scale * g,
                    },
                    theta: spec.theta,
                    species: species.label.clone(),
                    nu_electron: None,
                },
            });
        }
    }
    let n_total = annuli.iter().map(|a| a.multiplicity).sum();
    Ok(Ensemble { annuli, n_total })
}

#[derive(Debug, Serialize, Deserialize)]
struct AnnulusRow {
    r_nm: f64,
    multiplicity: u64,
    species: String,
    j: f64,
    #[serde(rename = "nu_larmor_MHz")]
    nu_larmor_mhz: f64,
    #[serde(rename = "a_MHz")]
    a_mhz: f64,
    #[serde(rename = "a_nc_MHz")]
    a_nc_mhz: f64,
    #[serde(rename = "delta_q_MHz")]
    delta_q_mhz: f64,
    theta_rad: f64,
}

impl Ensemble {
    pub fn species_counts(&self) -> Vec<(String, u64)> {
        let mut out: Vec<(String, u64)> = Vec::new();
        for a in &self.annuli {
            match out.iter_mut().find(|(s, _)| *s == a.params.species) {
                Some((_, n)) => *n += a.multiplicity,
                None => out.push((a.params.species.clone(), a.multiplicity)),
            }
        }
        out
    }

    pub fn stats(&self) -> EnsembleStats {
        let n = self.n_total as f64;
        let a_total: f64 = self.annuli.iter().map(|x| x.multiplicity as f64 * x.params.a).sum();
        let abs_total: f64 = self.annuli.iter().map(|x| x.multiplicity as f64 * x.params.a.abs()).sum();
        EnsembleStats {
            n_total: self.n_total,
            a_total_mhz: a_total,
            mean_abs_a_mhz: abs_total / n,
            mean_abs_a_angular: crate::angular(abs_total / n),
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        for a in &self.annuli {
            out.serialize(AnnulusRow {
                r_nm: a.r,
                multiplicity: a.multiplicity,
                species: a.params.species.clone(),
                j: a.params.spin.j(),
                nu_larmor_mhz: a.params.nu_larmor,
                a_mhz: a.params.a,
                a_nc_mhz: a.params.a_nc,
                delta_q_mhz: a.params.delta_q(),
                theta_rad: a.params.theta,
            })?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads an ensemble table; `Delta_Q` is taken as given.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut annuli = Vec::new();
        for row in rdr.deserialize::<AnnulusRow>() {
            let row = row?;
            let params = NucleusParams {
                spin: Spin::new(row.j)?,
                nu_larmor: row.nu_larmor_mhz,
                a: row.a_mhz,
                a_nc: row.a_nc_mhz,
                quadrupole: Quadrupole::Direct {
                    delta_q: row.delta_q_mhz,
                },
                theta: row.theta_rad,
                species: row.species,
                nu_electron: None,
            };
            params.validate()?;
            annuli.push(Annulus {
                r: row.r_nm,
                multiplicity: row.multiplicity,
                params,
            });
        }
        let n_total = annuli.iter().map(|a| a.multiplicity).sum();
        if n_total == 0 {
            return Err(invalid!("ensemble table has zero total multiplicity"));
        }
        Ok(Self { annuli, n_total })
    }
}

/// Electronic one-tangling power of the whole ensemble at every time.
///
/// `ev` fixes the evolution kind and CPMG iteration count; its duration is
/// replaced by each entry of `times`. Per-annulus logarithms are summed in
/// annulus order, so the result does not depend on the worker count.
pub fn ensemble_electronic_otp(
    e: &Ensemble,
    ev: &EvolutionSpec,
    times: &[f64],
    variant: NcVariant,
) -> Result<SweepResult> {
    if e.annuli.is_empty() {
        return Err(invalid!("ensemble is empty"));
    }
    if times.is_empty() {
        return Err(invalid!("time grid is empty"));
    }
    let per_annulus: Vec<Vec<f64>> = e
        .annuli
        .par_iter()
        .map(|ann| -> Result<Vec<f64>> {
            let blocks = build_blocks(&ann.params, variant)?;
            let prop = BlockPropagator::new(&blocks)?;
            let d = ann.params.dim();
            times
                .iter()
                .map(|&t| {
                    let tr = prop.overlap_trace(&ev.with_duration(t))?;
                    let g = G1Value::from_trace(tr, d)?;
                    Ok(log_electronic_factor(g, ann.multiplicity as f64))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = (0..times.len())
        .map(|i| {
            let log_prod: f64 = per_annulus.iter().map(|row| row[i]).sum();
            (-log_prod.exp_m1() / 3.0).clamp(0.0, 1.0 / 3.0)
        })
        .collect();
    SweepResult::one_d(Axis::new("t_us", times.to_vec()), "otp_electronic", values)
}

/// Earliest time at which a curve reaches half its maximum, linearly
/// interpolated between grid points.
pub fn dephasing_time(curve: &SweepResult) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve.points().collect();
    if pts.is_empty() {
        return Err(invalid!("curve is empty"));
    }
    let peak = curve.max();
    if !(peak > 0.0) {
        return Err(Error::NoCrossing(format!("maximum is {peak}")));
    }
    let half = peak / 2.0;
    let i = pts
        .iter()
        .position(|&(_, v)| v >= half)
        .expect("the maximum reaches half of itself");
    if i == 0 {
        return Ok(pts[0].0);
    }
    let (t0, v0) = pts[i - 1];
    let (t1, v1) = pts[i];
    Ok(t0 + (half - v0) * (t1 - t0) / (v1 - v0))
}
