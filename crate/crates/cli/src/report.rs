//! Asymptotic-versus-simulation comparison.

use dswlab_core::asymptotics::phase_convention_check;
use dswlab_core::StepData;
use serde::{Deserialize, Serialize};

use crate::profile::{Profile, ProfileMeta};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Distance kept from the fan edges for the LPW and DSW windows.
    pub dsw_collar: f64,
    /// Distance kept to the right of the soliton edge for the RPW window.
    pub rpw_collar: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { dsw_collar: 10.0, rpw_collar: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub ql: f64,
    pub qr: f64,
    pub xi_left: f64,
    pub xi_right: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpwMetrics {
    pub window: [f64; 2],
    pub points: usize,
    /// −1/2 + ln(rms(q₂ − q_l)/rms(q₁ − q_l))/ln t.
    pub envelope_exponent: f64,
    /// rms(q₂ − q₁)/rms(q₁ − q_l).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DswMetrics {
    pub window: [f64; 2],
    pub points: usize,
    pub linf: f64,
    pub rel_l2: f64,
    /// Largest distance of the second profile's crests and troughs from the first's envelopes.
    pub envelope_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpwMetrics {
    pub window: [f64; 2],
    pub points: usize,
    pub max_abs_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverHealth {
    pub records: usize,
    pub max_abs_mass_drift: f64,
    pub max_abs_energy_rel_drift: f64,
    pub max_abs_q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub params: Params,
    pub options: CompareOptions,
    pub overlap: [f64; 2],
    pub points: usize,
    pub lpw: Option<LpwMetrics>,
    pub dsw: Option<DswMetrics>,
    pub rpw: Option<RpwMetrics>,
    pub phase_convention_verdict: String,
    pub solver_health: Option<SolverHealth>,
}

/// Four-point Lagrange interpolation of (xs, ys) at x, with xs increasing and x inside.
fn cubic_at(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if n == 1 {
        return ys[0];
    }
    let hi = xs.partition_point(|&v| v < x).clamp(1, n - 1);
    if xs[hi] == x {
        return ys[hi];
    }
    if xs[hi - 1] == x {
        return ys[hi - 1];
    }
    let lo = hi.saturating_sub(2).min(n.saturating_sub(4));
    let end = (lo + 4).min(n);
    let mut acc = 0.0;
    for i in lo..end {
        let mut w = 1.0;
        for j in lo..end {
            if j != i {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += w * ys[i];
    }
    acc
}

fn mean_spacing(p: &Profile) -> f64 {
    if p.len() < 2 {
        return f64::INFINITY;
    }
    (p.x[p.len() - 1] - p.x[0]) / (p.len() - 1) as f64
}

/// Both profiles on the finer of the two grids, restricted to the overlap.
fn common_grid(first: &Profile, second: &Profile) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let lo = first.x[0].max(second.x[0]);
    let hi = first.x[first.len() - 1].min(second.x[second.len() - 1]);
    let fine_is_first = mean_spacing(first) < mean_spacing(second);
    let (fine, coarse) = if fine_is_first { (first, second) } else { (second, first) };
    let mut xs = Vec::new();
    let mut fv = Vec::new();
    let mut cv = Vec::new();
    for (&x, &q) in fine.x.iter().zip(&fine.q) {
        if x >= lo && x <= hi {
            xs.push(x);
            fv.push(q);
            cv.push(cubic_at(&coarse.x, &coarse.q, x));
        }
    }
    if fine_is_first {
        (xs, fv, cv)
    } else {
        (xs, cv, fv)
    }
}

type Points = Vec<(f64, f64)>;

/// Local extrema (refined by a parabola through three points) inside [lo, hi].
fn extrema(x: &[f64], q: &[f64], lo: f64, hi: f64) -> (Points, Points) {
    let (mut maxima, mut minima) = (Vec::new(), Vec::new());
    for i in 1..x.len().saturating_sub(1) {
        if x[i] < lo || x[i] > hi {
            continue;
        }
        let (y0, y1, y2) = (q[i - 1], q[i], q[i + 1]);
        let is_max = y1 > y0 && y1 >= y2;
        let is_min = y1 < y0 && y1 <= y2;
        if !(is_max || is_min) {
            continue;
        }
        let h = 0.5 * (x[i + 1] - x[i - 1]);
        let curv = y0 - 2.0 * y1 + y2;
        let (xe, ye) = if curv != 0.0 {
            (x[i] + h * (y0 - y2) / (2.0 * curv), y1 - (y0 - y2) * (y0 - y2) / (8.0 * curv))
        } else {
            (x[i], y1)
        };
        if is_max {
            maxima.push((xe, ye));
        } else {
            minima.push((xe, ye));
        }
    }
    (maxima, minima)
}

fn linear_at(pts: &[(f64, f64)], x: f64) -> f64 {
    let i = pts.partition_point(|p| p.0 < x);
    if i == 0 {
        return pts[0].1;
    }
    if i == pts.len() {
        return pts[pts.len() - 1].1;
    }
    if pts[i].0 == x {
        return pts[i].1;
    }
    let (a, b) = (pts[i - 1], pts[i]);
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

fn envelope_error(x: &[f64], first: &[f64], second: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let (amax, amin) = extrema(x, first, lo, hi);
    let (smax, smin) = extrema(x, second, lo, hi);
    if amax.is_empty() || amin.is_empty() || smax.is_empty() || smin.is_empty() {
        return None;
    }
    let crest = smax.iter().map(|&(xe, ye)| (ye - linear_at(&amax, xe)).abs());
    let trough = smin.iter().map(|&(xe, ye)| (ye - linear_at(&amin, xe)).abs());
    Some(crest.chain(trough).fold(0.0, f64::max))
}

fn window_indices(x: &[f64], lo: f64, hi: f64) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] >= lo && x[i] <= hi).collect()
}

fn rms(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), d| (s + d * d, n + 1));
    if n == 0 {
        0.0
    } else {
        (s / n as f64).sqrt()
    }
}

/// Compares `second` against `first` (normally asymptotic and simulated profiles).
pub fn compare(
    first: &Profile,
    first_meta: &ProfileMeta,
    second: &Profile,
    second_meta: &ProfileMeta,
    opts: CompareOptions,
) -> Result<ComparisonReport, CliError> {
    let t = first_meta.t;
    if !(t > 0.0) || (t - second_meta.t).abs() > 1e-9 * t.max(1.0) {
        return Err(CliError::Input(format!("profiles are at different times ({t} and {})", second_meta.t)));
    }
    if first_meta.ql != second_meta.ql || first_meta.qr != second_meta.qr {
        return Err(CliError::Input(format!(
            "profiles have different step data ({}, {}) and ({}, {})",
            first_meta.ql, first_meta.qr, second_meta.ql, second_meta.qr
        )));
    }
    if first.is_empty() || second.is_empty() {
        return Err(CliError::Input("empty profile".into()));
    }
    let step = StepData::new(first_meta.ql, first_meta.qr).map_err(|e| CliError::Input(e.to_string()))?;
    let (x, a, s) = common_grid(first, second);
    if x.len() < 2 {
        return Err(CliError::Input("profiles do not overlap in x".into()));
    }
    let mut valid = [x[0], x[x.len() - 1]];
    for m in [first_meta, second_meta] {
        if let Some([lo, hi]) = m.valid_x {
            valid = [valid[0].max(lo), valid[1].min(hi)];
        }
    }
    let finite = |i: &usize| a[*i].is_finite() && s[*i].is_finite();
    let (xl, xr) = (12.0 * step.xi_left * t, 12.0 * step.xi_right * t);

    let lpw = {
        let w = [valid[0], valid[1].min(xl - opts.dsw_collar)];
        let idx: Vec<usize> = window_indices(&x, w[0], w[1]).into_iter().filter(finite).collect();
        let ra = rms(idx.iter().map(|&i| a[i] - step.q_l));
        if idx.len() >= 2 && ra > 0.0 && (t - 1.0).abs() > 1e-12 {
            let rs = rms(idx.iter().map(|&i| s[i] - step.q_l));
            let rd = rms(idx.iter().map(|&i| s[i] - a[i]));
            let exponent = if rs > 0.0 { -0.5 + (rs / ra).ln() / t.ln() } else { f64::NEG_INFINITY };
            exponent.is_finite().then_some(LpwMetrics { window: w, points: idx.len(), envelope_exponent: exponent, residual: rd / ra })
        } else {
            None
        }
    };

    let dsw = {
        let w = [valid[0].max(xl + opts.dsw_collar), valid[1].min(xr - opts.dsw_collar)];
        let idx: Vec<usize> = window_indices(&x, w[0], w[1]).into_iter().filter(finite).collect();
        if idx.len() >= 2 {
            let linf = idx.iter().map(|&i| (s[i] - a[i]).abs()).fold(0.0, f64::max);
            let num = rms(idx.iter().map(|&i| s[i] - a[i]));
            let den = rms(idx.iter().map(|&i| a[i]));
            let rel_l2 = if den > 0.0 { num / den } else { num };
            Some(DswMetrics {
                window: w,
                points: idx.len(),
                linf,
                rel_l2,
                envelope_error: envelope_error(&x, &a, &s, w[0], w[1]),
            })
        } else {
            None
        }
    };

    let rpw = {
        let w = [valid[0].max(xr + opts.rpw_collar), valid[1]];
        let idx: Vec<usize> = window_indices(&x, w[0], w[1]).into_iter().filter(|i| s[*i].is_finite()).collect();
        (!idx.is_empty()).then(|| RpwMetrics {
            window: w,
            points: idx.len(),
            max_abs_dev: idx.iter().map(|&i| (s[i] - step.q_r).abs()).fold(0.0, f64::max),
        })
    };

    let phase_convention_verdict = if step.q_l < step.q_r {
        match phase_convention_check(0.5 * (step.xi_left + step.xi_right), &step) {
            Ok(c) => c.verdict,
            Err(e) => format!("phase check failed: {e}"),
        }
    } else {
        "no dispersive shock wave for equal backgrounds".to_string()
    };

    let health = |m: &ProfileMeta| {
        (!m.invariants.is_empty()).then(|| SolverHealth {
            records: m.invariants.len(),
            max_abs_mass_drift: m.invariants.iter().map(|r| r.mass_drift.abs()).fold(0.0, f64::max),
            max_abs_energy_rel_drift: m.invariants.iter().map(|r| r.energy_rel_drift.abs()).fold(0.0, f64::max),
            max_abs_q: m.invariants.iter().map(|r| r.max_abs_q).fold(0.0, f64::max),
        })
    };

    Ok(ComparisonReport {
        params: Params { ql: step.q_l, qr: step.q_r, xi_left: step.xi_left, xi_right: step.xi_right, t },
        options: opts,
        overlap: [x[0], x[x.len() - 1]],
        points: x.len(),
        lpw,
        dsw,
        rpw,
        phase_convention_verdict,
        solver_health: health(second_meta).or_else(|| health(first_meta)),
    })
}
