//! Subcommand implementations.

use std::fs;
use std::path::{Path, PathBuf};

use dswlab_core::asymptotics::evaluate_asymptotic;
use dswlab_core::whitham::classify_region;
use dswlab_core::StepData;
use dswlab_pde::{run, valid_window, InvariantRecord, SimConfig, SimError};
use serde::Serialize;

use crate::checks::{quick_suite, simulation_suite, CheckOutcome, DeskScale};
use crate::config::{parse_simulate_config, SimulateFile};
use crate::profile::{parse_profile_csv, sidecar_path, write_profile_csv, Profile, ProfileKind, ProfileMeta};
use crate::report::{compare, CompareOptions, ComparisonReport};
use crate::CliError;

/// Collar half-width for the region column of simulated profiles.
pub const SIM_EPS: f64 = 1.0;

/// Upper bound on the number of points of an asymptotic profile.
pub const MAX_POINTS: usize = 50_000_000;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    write_file(path, s.as_bytes())
}

#[derive(Debug, Clone)]
pub struct AsymptoticArgs {
    pub ql: f64,
    pub qr: f64,
    pub t: f64,
    pub xmin: f64,
    pub xmax: f64,
    pub dx: f64,
    pub eps: f64,
    pub out: PathBuf,
}

/// Grid xmin + i·dx up to xmax (inclusive within rounding).
pub fn grid(xmin: f64, xmax: f64, dx: f64) -> Result<Vec<f64>, CliError> {
    if !(xmin.is_finite() && xmax.is_finite() && dx.is_finite()) {
        return Err(CliError::Input("grid bounds and spacing must be finite".into()));
    }
    if !(xmax > xmin) || !(dx > 0.0) {
        return Err(CliError::Input(format!("need xmin < xmax and dx > 0, got [{xmin}, {xmax}] by {dx}")));
    }
    let steps = ((xmax - xmin) / dx * (1.0 + 1e-12)).floor();
    if steps + 1.0 > MAX_POINTS as f64 {
        return Err(CliError::Input(format!("grid would have {} points (max {MAX_POINTS})", steps + 1.0)));
    }
    Ok((0..=steps as usize).map(|i| xmin + i as f64 * dx).collect())
}

pub fn asymptotic_profile(a: &AsymptoticArgs) -> Result<(Profile, ProfileMeta), CliError> {
    let step = StepData::new(a.ql, a.qr).map_err(|e| CliError::Input(e.to_string()))?;
    if !(a.t.is_finite() && a.t > 0.0) {
        return Err(CliError::Input(format!("t must be positive, got {}", a.t)));
    }
    if !(a.eps.is_finite() && a.eps > 0.0) {
        return Err(CliError::Input(format!("eps must be positive, got {}", a.eps)));
    }
    let xs = grid(a.xmin, a.xmax, a.dx)?;
    let prof = evaluate_asymptotic(&xs, a.t, &step, a.eps).map_err(|e| CliError::Numerical(e.to_string()))?;
    if let Some(f) = prof.failures.first() {
        return Err(CliError::Numerical(format!(
            "asymptotic formula failed at {} of {} points; first at x={}: {}",
            prof.failures.len(),
            xs.len(),
            f.x,
            f.message
        )));
    }
    let meta = ProfileMeta {
        kind: ProfileKind::Asymptotic,
        ql: a.ql,
        qr: a.qr,
        t: a.t,
        eps: a.eps,
        valid_x: None,
        invariants: Vec::new(),
        failures: 0,
    };
    Ok((Profile { x: prof.x, q: prof.q, region: prof.region }, meta))
}

pub fn cmd_asymptotic(a: &AsymptoticArgs) -> Result<(), CliError> {
    let (p, meta) = asymptotic_profile(a)?;
    write_file(&a.out, write_profile_csv(&p).as_bytes())?;
    write_json(&sidecar_path(&a.out), &meta)
}

/// Profile and sidecar of one simulation snapshot.
pub fn snapshot_profile(
    x: &[f64],
    q: &[f64],
    t: f64,
    step: &StepData,
    cfg: &SimConfig,
    log: &[InvariantRecord],
) -> (Profile, ProfileMeta) {
    let region = x.iter().map(|&xv| classify_region(xv, t, step, SIM_EPS)).collect();
    let meta = ProfileMeta {
        kind: ProfileKind::Simulation,
        ql: step.q_l,
        qr: step.q_r,
        t,
        eps: SIM_EPS,
        valid_x: Some(valid_window(step, cfg, t)),
        invariants: log.iter().filter(|r| r.t <= t).copied().collect(),
        failures: 0,
    };
    (Profile { x: x.to_vec(), q: q.to_vec(), region }, meta)
}

#[derive(Debug, Serialize)]
struct RunMeta<'a> {
    config: &'a SimulateFile,
    snapshot_files: Vec<String>,
    invariants_log: &'a [InvariantRecord],
}

/// `{prefix}_t{t}.csv`.
pub fn snapshot_path(prefix: &str, t: f64) -> PathBuf {
    PathBuf::from(format!("{prefix}_t{t}.csv"))
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::Config(m) => CliError::Input(m),
        other => CliError::Numerical(other.to_string()),
    }
}

pub fn cmd_simulate(config: &Path) -> Result<Vec<PathBuf>, CliError> {
    let bytes = fs::read(config).map_err(|e| io_err(config, e))?;
    let file = parse_simulate_config(&bytes)?;
    let step = file.step()?;
    let cfg = file.sim_config();
    let out = run(&step, &cfg).map_err(sim_error)?;
    let mut written = Vec::new();
    for s in &out.snapshots {
        let (p, meta) = snapshot_profile(&out.x, &s.q, s.t, &step, &cfg, &out.invariants_log);
        let path = snapshot_path(&file.out_prefix, s.t);
        write_file(&path, write_profile_csv(&p).as_bytes())?;
        write_json(&sidecar_path(&path), &meta)?;
        written.push(path);
    }
    let meta = RunMeta {
        config: &file,
        snapshot_files: written.iter().map(|p| p.display().to_string()).collect(),
        invariants_log: &out.invariants_log,
    };
    write_json(&PathBuf::from(format!("{}.run.json", file.out_prefix)), &meta)?;
    Ok(written)
}

/// Overrides for profiles without a sidecar.
#[derive(Debug, Clone, Copy, Default)]
pub struct MetaOverride {
    pub ql: Option<f64>,
    pub qr: Option<f64>,
    pub t: Option<f64>,
}

pub fn read_profile(path: &Path, ov: MetaOverride) -> Result<(Profile, ProfileMeta), CliError> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let p = parse_profile_csv(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let side = sidecar_path(path);
    let mut meta = match fs::read(&side) {
        Ok(b) => serde_json::from_slice::<ProfileMeta>(&b)
            .map_err(|e| CliError::Input(format!("{}: {e}", side.display())))?,
        Err(_) => match (ov.ql, ov.qr, ov.t) {
            (Some(ql), Some(qr), Some(t)) => ProfileMeta {
                kind: ProfileKind::Asymptotic,
                ql,
                qr,
                t,
                eps: 0.0,
                valid_x: None,
                invariants: Vec::new(),
                failures: 0,
            },
            _ => {
                return Err(CliError::Input(format!(
                    "{} has no sidecar; pass --ql, --qr and --t",
                    path.display()
                )))
            }
        },
    };
    meta.ql = ov.ql.unwrap_or(meta.ql);
    meta.qr = ov.qr.unwrap_or(meta.qr);
    meta.t = ov.t.unwrap_or(meta.t);
    Ok((p, meta))
}

pub fn cmd_compare(
    first: &Path,
    second: &Path,
    opts: CompareOptions,
    ov: MetaOverride,
    out: Option<&Path>,
) -> Result<ComparisonReport, CliError> {
    let (a, am) = read_profile(first, ov)?;
    let (b, bm) = read_profile(second, ov)?;
    let rep = compare(&a, &am, &b, &bm, opts)?;
    let mut s = serde_json::to_string_pretty(&rep).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    match out {
        Some(p) => write_file(p, s.as_bytes())?,
        None => print!("{s}"),
    }
    Ok(rep)
}

/// Runs the suites, printing one line per check; returns the failures.
pub fn cmd_selftest(quick: bool) -> Vec<CheckOutcome> {
    let mut all = quick_suite();
    if !quick {
        all.extend(simulation_suite(DeskScale::default()));
    }
    for c in &all {
        println!("{:<4} {} {}: {}", c.id, if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    all.into_iter().filter(|c| !c.passed).collect()
}
