//! Subcommand implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use onetangle::analysis::{
    degeneracy_loci, degeneracy_table, gap_map, sweep2d, transition_strength, DegeneracyRow, ElectronState,
    Locus, SweepGrid,
};
use onetangle::ensemble::{dephasing_time, ensemble_electronic_otp, gaussian_ensemble, Ensemble, EnsembleStats};
use onetangle::evolution::{BlockPropagator, EvolutionKind, EvolutionSpec};
use onetangle::model::{build_blocks, NcVariant};
use onetangle::oracle::{
    block_unitary, choi_otp, mc_otp, pedersen_check, random_rotation_pair, PedersenReport, SystemDims,
};
use onetangle::spin_algebra::Spin;
use onetangle::sweep::{Axis, SweepResult};
use onetangle::tangle::{
    analytic_g1, electronic_otp, makhlin_g1, nuclear_otp, resonance_times, simplified_g1, G1Value,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::config::TimeGrid;
use crate::{CliError, Command, EvolutionArg, Format, Invocation};

pub fn dispatch(inv: &Invocation) -> Result<Vec<PathBuf>, CliError> {
    match inv.command.clone() {
        Command::G1 { evolution, n } => cmd_g1(inv, evolution, n),
        Command::Ensemble {
            evolution,
            n,
            omega_sweep,
        } => {
            if omega_sweep {
                cmd_omega_sweep(inv, evolution, n)
            } else {
                cmd_ensemble(inv, evolution, n)
            }
        }
        Command::Sweep2d { evolution, n } => cmd_sweep2d(inv, evolution, n),
        Command::Gapmap { full } => cmd_gapmap(inv, full),
        Command::Resonances => cmd_resonances(inv),
        Command::DegeneracyTable => cmd_degeneracy_table(inv),
        Command::OracleCheck => cmd_oracle_check(inv),
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer(path: &PathBuf) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?)))
}

fn write_json<T: Serialize>(inv: &Invocation, name: &str, value: &T) -> Result<PathBuf, CliError> {
    let path = inv.out.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(path)
}

fn write_table(inv: &Invocation, stem: &str, table: &SweepResult) -> Result<PathBuf, CliError> {
    match inv.format {
        Format::Json => write_json(inv, &format!("{stem}.json"), table),
        Format::Csv => {
            let path = inv.out.join(format!("{stem}.csv"));
            let mut w = BufWriter::new(File::create(&path)?);
            table.write_csv(&mut w)?;
            w.flush()?;
            Ok(path)
        }
    }
}

/// Configured evolution, then command-line overrides.
fn evolution(
    inv: &Invocation,
    default_kind: EvolutionKind,
    flag: Option<EvolutionArg>,
    n: Option<u32>,
) -> Result<EvolutionSpec, CliError> {
    let mut spec = match &inv.config.evolution {
        Some(section) => section.spec()?,
        None => EvolutionSpec {
            kind: default_kind,
            n_iterations: 1,
            duration: 0.0,
        },
    };
    if let Some(kind) = flag {
        spec.kind = kind.into();
        if spec.kind == EvolutionKind::Free {
            spec.n_iterations = 1;
        }
    }
    if let Some(n) = n {
        spec.n_iterations = n;
    }
    spec.validate()
        .map_err(|e| CliError::Config(format!("evolution: {e}")))?;
    Ok(spec)
}

fn times(inv: &Invocation, default: TimeGrid) -> Result<Vec<f64>, CliError> {
    inv.config.time.as_ref().unwrap_or(&default).times()
}

#[derive(Serialize)]
struct G1Row {
    t_us: f64,
    g1_numeric: f64,
    g1_analytic: Option<f64>,
    otp_numeric: f64,
    otp_analytic: Option<f64>,
}

fn cmd_g1(inv: &Invocation, flag: Option<EvolutionArg>, n: Option<u32>) -> Result<Vec<PathBuf>, CliError> {
    let p = inv.config.nucleus.params()?;
    let variant = inv.config.variant;
    let ev = evolution(inv, EvolutionKind::Free, flag, n)?;
    let ts = times(inv, TimeGrid::default())?;
    let prop = BlockPropagator::new(&build_blocks(&p, variant)?)?;
    let with_analytic =
        p.spin == Spin::THREE_HALVES && ev.kind == EvolutionKind::Free && variant == NcVariant::Quadrupolar;
    // the closed form is exact without the non-collinear term or for axial strain
    let analytic_exact = with_analytic
        && (p.a_nc == 0.0 || p.theta.sin().abs() < 1e-12);
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let rp = prop.rotations(&ev.with_duration(t))?;
        let g = makhlin_g1(&rp);
        let analytic = if with_analytic { Some(analytic_g1(&p, t)?) } else { None };
        if let (true, Some(an)) = (analytic_exact, analytic) {
            if (an - g.value).abs() > 1e-8 {
                return Err(CliError::Invariant(format!(
                    "closed-form and numeric G1 differ by {:.3e} at t = {t} us",
                    (an - g.value).abs()
                )));
            }
        }
        rows.push(G1Row {
            t_us: t,
            g1_numeric: g.value,
            g1_analytic: analytic,
            otp_numeric: nuclear_otp(g),
            otp_analytic: analytic.map(|v| nuclear_otp(G1Value { value: v, d: g.d })),
        });
    }
    if inv.format == Format::Json {
        return Ok(vec![write_json(inv, "g1.json", &rows)?]);
    }
    let path = inv.out.join("g1.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["t_us", "g1_numeric", "g1_analytic", "otp_numeric", "otp_analytic"])?;
    let opt = |v: Option<f64>| v.map(fmt).unwrap_or_default();
    for r in &rows {
        w.write_record([
            fmt(r.t_us),
            fmt(r.g1_numeric),
            opt(r.g1_analytic),
            fmt(r.otp_numeric),
            opt(r.otp_analytic),
        ])?;
    }
    w.flush()?;
    Ok(vec![path])
}

fn load_ensemble(inv: &Invocation, n_target: Option<u64>, b_field: Option<f64>) -> Result<Ensemble, CliError> {
    let section = &inv.config.ensemble;
    if let Some(input) = &section.input {
        let file = File::open(input).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
        return Ok(Ensemble::read_csv(file)?);
    }
    let mut spec = section.spec(inv.seed)?;
    if let Some(n) = n_target {
        spec.n_target = n;
    }
    if let Some(b) = b_field {
        spec.b_field = b;
    }
    Ok(gaussian_ensemble(&spec)?)
}

fn default_ensemble_times() -> TimeGrid {
    TimeGrid::log(1e-4, 1e3, 701)
}

fn half_max_time(curve: &SweepResult) -> Result<Option<f64>, CliError> {
    match dephasing_time(curve) {
        Ok(t) => Ok(Some(t)),
        Err(onetangle::Error::NoCrossing(m)) => {
            log::warn!("no dephasing time: {m}");
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct EnsembleSummary {
    n_total: u64,
    #[serde(rename = "A_total_MHz")]
    a_total_mhz: f64,
    #[serde(rename = "mean_abs_a_MHz")]
    mean_abs_a_mhz: f64,
    mean_abs_a_rad_per_us: f64,
    t2_us: Option<f64>,
    evolution: EvolutionSpec,
    species_counts: Vec<(String, u64)>,
}

fn cmd_ensemble(inv: &Invocation, flag: Option<EvolutionArg>, n: Option<u32>) -> Result<Vec<PathBuf>, CliError> {
    let ensemble = load_ensemble(inv, None, None)?;
    let ev = evolution(inv, EvolutionKind::Free, flag, n)?;
    let ts = times(inv, default_ensemble_times())?;
    let curve = ensemble_electronic_otp(&ensemble, &ev, &ts, inv.config.variant)?;
    let t2 = half_max_time(&curve)?;
    let EnsembleStats {
        n_total,
        a_total_mhz,
        mean_abs_a_mhz,
        mean_abs_a_angular,
    } = ensemble.stats();
    let summary = EnsembleSummary {
        n_total,
        a_total_mhz,
        mean_abs_a_mhz,
        mean_abs_a_rad_per_us: mean_abs_a_angular,
        t2_us: t2,
        evolution: ev,
        species_counts: ensemble.species_counts(),
    };
    let mut files = vec![write_table(inv, "ensemble_curve", &curve)?];
    files.push(match inv.format {
        Format::Json => write_json(inv, "ensemble.json", &ensemble)?,
        Format::Csv => {
            let path = inv.out.join("ensemble.csv");
            let mut w = BufWriter::new(File::create(&path)?);
            ensemble.write_csv(&mut w)?;
            w.flush()?;
            path
        }
    });
    files.push(write_json(inv, "ensemble_summary.json", &summary)?);
    Ok(files)
}

fn cmd_omega_sweep(inv: &Invocation, flag: Option<EvolutionArg>, n: Option<u32>) -> Result<Vec<PathBuf>, CliError> {
    let sweep = &inv.config.ensemble.omega_sweep;
    let spec = inv.config.ensemble.spec(inv.seed)?;
    let per_tesla = spec.species_mix[0].nu_per_tesla;
    let ev = evolution(inv, EvolutionKind::Free, flag, n)?;
    let ts = times(inv, default_ensemble_times())?;
    let nus = sweep.frequencies()?;
    let mut t2s = Vec::with_capacity(nus.len());
    for &nu in &nus {
        let ensemble = load_ensemble(inv, Some(sweep.n_target), Some(nu / per_tesla))?;
        let curve = ensemble_electronic_otp(&ensemble, &ev, &ts, inv.config.variant)?;
        t2s.push(half_max_time(&curve)?.unwrap_or(f64::NAN));
    }
    let table = SweepResult::one_d(Axis::new("nu_larmor_MHz", nus), "t2_us", t2s)?;
    Ok(vec![write_table(inv, "t2_vs_omega", &table)?])
}

fn grid(inv: &Invocation) -> Result<SweepGrid, CliError> {
    let s = &inv.config.sweep;
    let grid = SweepGrid {
        x_axis: Axis::linspace("abs_a_over_nu", s.x_min, s.x_max, s.nx),
        y_axis: Axis::linspace("delta_q_over_nu", s.y_min, s.y_max, s.ny),
        template: inv.config.nucleus.params()?,
        time_mode: s.time_mode()?,
    };
    grid.validate().map_err(|e| CliError::Config(format!("sweep: {e}")))?;
    Ok(grid)
}

fn cmd_sweep2d(inv: &Invocation, flag: Option<EvolutionArg>, n: Option<u32>) -> Result<Vec<PathBuf>, CliError> {
    let ev = evolution(inv, EvolutionKind::Cpmg, flag, n)?;
    let table = sweep2d(&grid(inv)?, &ev, inv.config.variant)?;
    Ok(vec![write_table(inv, "sweep2d", &table)?])
}

fn cmd_gapmap(inv: &Invocation, full: bool) -> Result<Vec<PathBuf>, CliError> {
    let full = full || inv.config.sweep.full_gap;
    let table = gap_map(&grid(inv)?, inv.config.variant, full)?;
    Ok(vec![write_table(inv, "gapmap", &table)?])
}

fn cmd_resonances(inv: &Invocation) -> Result<Vec<PathBuf>, CliError> {
    let sec = &inv.config.resonances;
    let a = sec.a.unwrap_or(inv.config.nucleus.a);
    let ts = resonance_times(a, sec.k_max)?;
    let g: Vec<f64> = ts.iter().map(|&t| simplified_g1(a, t)).collect();
    if let Some(worst) = g.iter().copied().map(f64::abs).reduce(f64::max).filter(|&w| w > 1e-9) {
        return Err(CliError::Invariant(format!(
            "simplified G1 reaches {worst:.3e} at a resonance time"
        )));
    }
    let table = SweepResult::one_d(Axis::new("t_us", ts), "g1_simplified", g)?;
    Ok(vec![write_table(inv, "resonances", &table)?])
}

#[derive(Serialize)]
struct DegeneracyRecord {
    delta_m: u32,
    electron_state: &'static str,
    m: f64,
    m_prime: f64,
    locus: &'static str,
    intercept: Option<f64>,
    slope: Option<f64>,
    a_over_nu: Option<f64>,
    condition: String,
    nc_condition: String,
    /// `|<m| nc |m'>|` at the configured strain angle and variant.
    nc_matrix_element: f64,
}

fn record(row: &DegeneracyRow, spin: Spin, theta: f64, variant: NcVariant) -> DegeneracyRecord {
    let (m, mp) = row.transition;
    let (locus, intercept, slope, at, condition) = match row.locus {
        Locus::Line { intercept, slope } => (
            "line",
            Some(intercept),
            Some(slope),
            None,
            format!(
                "delta_q/nu = {slope} a/nu {} {}",
                if intercept < 0.0 { "-" } else { "+" },
                intercept.abs()
            ),
        ),
        Locus::Vertical { at } => ("vertical", None, None, Some(at), format!("a/nu = {at}")),
    };
    DegeneracyRecord {
        delta_m: row.delta_m,
        electron_state: match row.electron_state {
            ElectronState::Up => "up",
            ElectronState::Down => "down",
        },
        m,
        m_prime: mp,
        locus,
        intercept,
        slope,
        a_over_nu: at,
        condition,
        nc_condition: row.nc_condition.clone(),
        nc_matrix_element: transition_strength(spin, theta, variant, m, mp),
    }
}

fn cmd_degeneracy_table(inv: &Invocation) -> Result<Vec<PathBuf>, CliError> {
    let p = inv.config.nucleus.params()?;
    let rows = match degeneracy_table(p.spin) {
        Ok(rows) => rows,
        Err(onetangle::Error::Unsupported(m)) => {
            log::warn!("{m}");
            degeneracy_loci(p.spin)
        }
        Err(e) => return Err(e.into()),
    };
    let records: Vec<DegeneracyRecord> = rows
        .iter()
        .map(|r| record(r, p.spin, p.theta, inv.config.variant))
        .collect();
    if inv.format == Format::Json {
        return Ok(vec![write_json(inv, "degeneracy_table.json", &records)?]);
    }
    let path = inv.out.join("degeneracy_table.csv");
    let mut w = csv_writer(&path)?;
    for r in &records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(vec![path])
}

#[derive(Serialize)]
struct McRecord {
    subsystem: usize,
    mean: f64,
    stderr: f64,
    closed_form: f64,
    passed: bool,
}

#[derive(Serialize)]
struct OracleReport {
    dims: Vec<usize>,
    instances: usize,
    tolerance: f64,
    max_dev_nuclear: f64,
    max_dev_electronic: f64,
    monte_carlo: Vec<McRecord>,
    pedersen: Vec<PedersenReport>,
    sigmas: f64,
    passed: bool,
}

fn cmd_oracle_check(inv: &Invocation) -> Result<Vec<PathBuf>, CliError> {
    let sec = &inv.config.oracle;
    let dims = SystemDims::electron_with(&sec.nuclei).map_err(|e| match e {
        onetangle::Error::ResourceLimit(m) => CliError::Resource(m),
        other => CliError::Config(format!("oracle.nuclei: {other}")),
    })?;
    let mut rng = ChaCha20Rng::seed_from_u64(inv.seed);
    let mut max_nuc = 0.0f64;
    let mut max_el = 0.0f64;
    let mut monte_carlo = Vec::new();
    for i in 0..sec.instances {
        let pairs: Vec<_> = sec.nuclei.iter().map(|&d| random_rotation_pair(d, &mut rng)).collect();
        let u = block_unitary(&pairs)?;
        let g1s: Vec<G1Value> = pairs.iter().map(makhlin_g1).collect();
        let el = electronic_otp(&g1s)?;
        max_el = max_el.max((choi_otp(&u, &dims, 0)? - el).abs());
        for (k, g) in g1s.iter().enumerate() {
            max_nuc = max_nuc.max((choi_otp(&u, &dims, k + 1)? - nuclear_otp(*g)).abs());
        }
        if i < sec.mc_instances {
            for q in 0..dims.len() {
                let closed = if q == 0 { el } else { nuclear_otp(g1s[q - 1]) };
                let est = mc_otp(&u, &dims, q, sec.mc_samples, inv.seed.wrapping_add(i as u64))?;
                monte_carlo.push(McRecord {
                    subsystem: q,
                    mean: est.mean,
                    stderr: est.stderr,
                    closed_form: closed,
                    passed: (est.mean - closed).abs() <= sec.sigmas * est.stderr + 1e-12,
                });
            }
        }
    }
    let mut pedersen = Vec::new();
    for i in 0..sec.pedersen_pairs {
        let d = sec.nuclei[i % sec.nuclei.len()];
        let rp = random_rotation_pair(d, &mut rng);
        pedersen.push(pedersen_check(&rp, sec.pedersen_samples, inv.seed.wrapping_add(1000 + i as u64))?);
    }
    let passed = max_nuc < sec.tolerance
        && max_el < sec.tolerance
        && monte_carlo.iter().all(|m| m.passed)
        && pedersen.iter().all(|p| p.within(sec.sigmas));
    let report = OracleReport {
        dims: dims.dims().to_vec(),
        instances: sec.instances,
        tolerance: sec.tolerance,
        max_dev_nuclear: max_nuc,
        max_dev_electronic: max_el,
        monte_carlo,
        pedersen,
        sigmas: sec.sigmas,
        passed,
    };
    let path = write_json(inv, "oracle_report.json", &report)?;
    if !passed {
        return Err(CliError::Invariant(format!(
            "oracle check failed, see {}",
            path.display()
        )));
    }
    Ok(vec![path])
}
