//! Pseudospectral integration of q_t − 6q²q_x + q_xxx = 0 on a periodic domain.
//!
//! Step data are periodised by a compensating return step near the right end of
//! the domain. The dispersive term is integrated exactly in Fourier space; the
//! nonlinear flux 2(q³)_x is advanced with the classical four-stage scheme in the
//! integrating-factor frame.

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use dswlab_core::StepData;
use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

type C = Complex64;

/// Largest dt·6·max|q|²·k_max allowed; the four-stage scheme is stable on the
/// imaginary axis up to 2√2.
pub const STABILITY_LIMIT: f64 = 2.5;

/// The fan may come no closer to the return step than this many return-ramp widths.
pub const CONTAMINATION_WIDTHS: f64 = 5.0;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("contamination at t={t}: {detail}")]
    Contamination { t: f64, detail: String },
    #[error("instability: {0}")]
    Instability(String),
    #[error(transparent)]
    Core(#[from] dswlab_core::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

fn default_true() -> bool {
    true
}

/// Solver configuration. Lengths are in x-units; the domain is [−L, L).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Width of the main step ramp.
    pub ramp_w: f64,
    /// Width of the compensating return ramp; defaults to 8.
    #[serde(default)]
    pub ramp_w_return: Option<f64>,
    /// Centre of the return step; defaults to 0.8·L.
    #[serde(default)]
    pub x_step2: Option<f64>,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    /// Blow-up guard on max|q|; defaults to 10·max|q(·,0)| + 1.
    #[serde(default)]
    pub q_max: Option<f64>,
}

impl SimConfig {
    pub fn new(l: f64, n: usize, dt: f64, t_end: f64) -> Self {
        SimConfig {
            l,
            n,
            dt,
            t_end,
            ramp_w: 0.5,
            ramp_w_return: None,
            x_step2: None,
            dealias: true,
            snapshots: vec![t_end],
            q_max: None,
        }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.n as f64
    }

    pub fn x_step2(&self) -> f64 {
        self.x_step2.unwrap_or(0.8 * self.l)
    }

    pub fn ramp_w_return(&self) -> f64 {
        self.ramp_w_return.unwrap_or(8.0)
    }

    /// Grid points x_j = −L + j·Δx, j = 0..N.
    pub fn grid(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n).map(|j| -self.l + j as f64 * dx).collect()
    }

    /// Checks that do not depend on the initial data.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SimError::Config(m));
        if !(self.l.is_finite() && self.l > 0.0) {
            return bad(format!("L must be positive, got {}", self.l));
        }
        if self.n < 16 || !self.n.is_power_of_two() {
            return bad(format!("N must be a power of two ≥ 16, got {}", self.n));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        for &s in &self.snapshots {
            if !(s.is_finite() && (0.0..=self.t_end).contains(&s)) {
                return bad(format!("snapshot time {s} outside [0, t_end]"));
            }
        }
        if let Some(q) = self.q_max {
            if !(q > 0.0) {
                return bad(format!("q_max must be positive, got {q}"));
            }
        }
        Ok(())
    }

    /// Checks specific to double-step data.
    pub fn validate_double_step(&self) -> Result<()> {
        self.validate()?;
        let (w, w2, x2) = (self.ramp_w, self.ramp_w_return(), self.x_step2());
        let dx = self.dx();
        if !(w >= 4.0 * dx) {
            return Err(SimError::Config(format!("ramp_w={w} below 4Δx={}", 4.0 * dx)));
        }
        if !(w2 >= 4.0 * dx) {
            return Err(SimError::Config(format!("ramp_w_return={w2} below 4Δx={}", 4.0 * dx)));
        }
        if !(x2 > 0.0 && x2 < self.l) {
            return Err(SimError::Config(format!("x_step2={x2} must lie in (0, L)")));
        }
        if self.l - x2 < CONTAMINATION_WIDTHS * w2 {
            return Err(SimError::Config(format!(
                "return ramp (width {w2}) at {x2} does not settle before the boundary L={}",
                self.l
            )));
        }
        if x2 - CONTAMINATION_WIDTHS * w2 < CONTAMINATION_WIDTHS * w {
            return Err(SimError::Config(format!(
                "ramps overlap: return step at {x2} (width {w2}) too close to the main step (width {w})"
            )));
        }
        Ok(())
    }
}

fn raw_profile(x: f64, step: &StepData, cfg: &SimConfig) -> f64 {
    let d = step.q_r - step.q_l;
    let up = 0.5 * (1.0 + (x / cfg.ramp_w).tanh());
    let down = 0.5 * (1.0 + ((x - cfg.x_step2()) / cfg.ramp_w_return()).tanh());
    step.q_l + d * up - d * down
}

/// Smoothed double step, with a linear correction making q(±L) = q_l exactly.
pub fn initial_profile(x: f64, step: &StepData, cfg: &SimConfig) -> f64 {
    let l = cfg.l;
    let el = raw_profile(-l, step, cfg) - step.q_l;
    let er = raw_profile(l, step, cfg) - step.q_l;
    raw_profile(x, step, cfg) - el * (l - x) / (2.0 * l) - er * (x + l) / (2.0 * l)
}

/// Conserved-quantity record at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub t: f64,
    /// ∫(q − q(·,0)) dx over the periodic domain.
    pub mass_drift: f64,
    /// ∫q² dx over the periodic domain.
    pub energy: f64,
    /// (∫q² − ∫q₀²)/∫q₀².
    pub energy_rel_drift: f64,
    pub max_abs_q: f64,
}

#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub q: Vec<f64>,
    /// Unnormalised real FFT of q (N/2 + 1 bins).
    pub spectrum: Vec<C>,
    pub invariants_log: Vec<InvariantRecord>,
    mass0: f64,
    energy0: f64,
}

impl SimState {
    fn record(&self, dx: f64) -> InvariantRecord {
        let energy = self.q.iter().map(|v| v * v).sum::<f64>() * dx;
        InvariantRecord {
            t: self.t,
            mass_drift: (self.spectrum[0].re - self.mass0) * dx,
            energy,
            energy_rel_drift: (energy - self.energy0) / self.energy0.max(f64::MIN_POSITIVE),
            max_abs_q: self.q.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }
}

/// Stepping machinery for one grid.
pub struct Solver {
    cfg: SimConfig,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    k: Vec<f64>,
    /// 2ik·mask, zero at the Nyquist bin.
    flux: Vec<C>,
    mask: Vec<f64>,
    k_eff: f64,
    q_max: f64,
    factors: HashMap<u64, (Vec<C>, Vec<C>)>,
    real_buf: Vec<f64>,
    spec_buf: Vec<C>,
    stage: [Vec<C>; 5],
}

impl Solver {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n;
        let mut planner = RealFftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let nb = n / 2 + 1;
        let k: Vec<f64> = (0..nb).map(|j| PI * j as f64 / cfg.l).collect();
        let cut = n / 3;
        let mask: Vec<f64> = (0..nb)
            .map(|j| if j == n / 2 || (cfg.dealias && j > cut) { 0.0 } else { 1.0 })
            .collect();
        let flux = k.iter().zip(&mask).map(|(&kk, &m)| C::new(0.0, 2.0 * kk * m)).collect();
        let k_eff = k.iter().zip(&mask).filter(|(_, &m)| m > 0.0).map(|(&kk, _)| kk).fold(0.0, f64::max);
        let zero = vec![C::new(0.0, 0.0); nb];
        Ok(Solver {
            cfg: cfg.clone(),
            forward,
            inverse,
            k,
            flux,
            mask,
            k_eff,
            q_max: cfg.q_max.unwrap_or(f64::INFINITY),
            factors: HashMap::new(),
            real_buf: vec![0.0; n],
            spec_buf: zero.clone(),
            stage: [zero.clone(), zero.clone(), zero.clone(), zero.clone(), zero],
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Largest retained wavenumber.
    pub fn k_eff(&self) -> f64 {
        self.k_eff
    }

    /// State from grid values.
    pub fn state_from_profile(&mut self, q: Vec<f64>) -> Result<SimState> {
        if q.len() != self.cfg.n {
            return Err(SimError::Config(format!("profile has {} points, grid has {}", q.len(), self.cfg.n)));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Config("non-finite initial value".into()));
        }
        let mut spectrum = vec![C::new(0.0, 0.0); self.cfg.n / 2 + 1];
        self.real_buf.copy_from_slice(&q);
        self.forward
            .process(&mut self.real_buf, &mut spectrum)
            .map_err(|e| SimError::Config(e.to_string()))?;
        let qm = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if self.cfg.q_max.is_none() {
            self.q_max = 10.0 * qm + 1.0;
        }
        let dx = self.cfg.dx();
        let mut st = SimState {
            t: 0.0,
            energy0: q.iter().map(|v| v * v).sum::<f64>() * dx,
            mass0: spectrum[0].re,
            q,
            spectrum,
            invariants_log: Vec::new(),
        };
        let rec = st.record(dx);
        st.invariants_log.push(rec);
        Ok(st)
    }

    /// dt·6·max|q|²·k_max must stay below the stability limit.
    pub fn check_stability(&self, q_abs_max: f64, dt: f64) -> Result<()> {
        let nu = dt * 6.0 * q_abs_max * q_abs_max * self.k_eff;
        if nu > STABILITY_LIMIT {
            return Err(SimError::Instability(format!(
                "dt={dt} too large: dt·6·max|q|²·k_max = {nu:.3} exceeds {STABILITY_LIMIT}"
            )));
        }
        Ok(())
    }

    fn factors(&mut self, dt: f64) -> (Vec<C>, Vec<C>) {
        let key = dt.to_bits();
        if let Some(f) = self.factors.get(&key) {
            return f.clone();
        }
        let half: Vec<C> = self.k.iter().map(|&k| C::from_polar(1.0, 0.5 * k * k * k * dt)).collect();
        let full: Vec<C> = self.k.iter().map(|&k| C::from_polar(1.0, k * k * k * dt)).collect();
        if self.factors.len() > 8 {
            self.factors.clear();
        }
        self.factors.insert(key, (half.clone(), full.clone()));
        (half, full)
    }

    /// out = dt·2ik·mask·FFT((IFFT(mask·v))³); returns max|IFFT(v)| on the grid.
    fn nonlinear(&mut self, v: &[C], out: &mut [C], dt: f64) -> Result<f64> {
        let n = self.cfg.n as f64;
        for ((s, &vv), &m) in self.spec_buf.iter_mut().zip(v).zip(&self.mask) {
            *s = vv * (m / n);
        }
        let nb = self.spec_buf.len();
        self.spec_buf[0].im = 0.0;
        self.spec_buf[nb - 1].im = 0.0;
        self.inverse
            .process(&mut self.spec_buf, &mut self.real_buf)
            .map_err(|e| SimError::Instability(e.to_string()))?;
        let mut qm = 0.0f64;
        for u in self.real_buf.iter_mut() {
            qm = qm.max(u.abs());
            *u = *u * *u * *u;
        }
        if !qm.is_finite() {
            return Err(SimError::Instability("non-finite field".into()));
        }
        self.forward
            .process(&mut self.real_buf, out)
            .map_err(|e| SimError::Instability(e.to_string()))?;
        for (o, &f) in out.iter_mut().zip(&self.flux) {
            *o *= f * dt;
        }
        Ok(qm)
    }

    /// One integrating-factor step of size dt (q is refreshed lazily by `sync`).
    pub fn step(&mut self, st: &mut SimState, dt: f64) -> Result<()> {
        let (e1, e2) = self.factors(dt);
        let mut stage = std::mem::take(&mut self.stage);
        let [k1, k2, k3, k4, tmp] = &mut stage;
        let u = &st.spectrum;
        let qm = self.nonlinear(u, k1, dt)?;
        if qm > self.q_max {
            self.stage = stage;
            return Err(SimError::Instability(format!("max|q|={qm:.3e} exceeds the blow-up guard at t={}", st.t)));
        }
        for i in 0..u.len() {
            tmp[i] = e1[i] * (u[i] + 0.5 * k1[i]);
        }
        self.nonlinear(tmp, k2, dt)?;
        for i in 0..u.len() {
            tmp[i] = e1[i] * u[i] + 0.5 * k2[i];
        }
        self.nonlinear(tmp, k3, dt)?;
        for i in 0..u.len() {
            tmp[i] = e2[i] * u[i] + e1[i] * k3[i];
        }
        self.nonlinear(tmp, k4, dt)?;
        for i in 0..u.len() {
            st.spectrum[i] =
                e2[i] * st.spectrum[i] + (e2[i] * k1[i] + 2.0 * e1[i] * (k2[i] + k3[i]) + k4[i]) / 6.0;
        }
        self.stage = stage;
        st.t += dt;
        Ok(())
    }

    /// Recomputes the grid values from the spectrum.
    pub fn sync(&mut self, st: &mut SimState) -> Result<()> {
        let n = self.cfg.n as f64;
        for (s, &v) in self.spec_buf.iter_mut().zip(&st.spectrum) {
            *s = v / n;
        }
        let nb = self.spec_buf.len();
        self.spec_buf[0].im = 0.0;
        self.spec_buf[nb - 1].im = 0.0;
        self.inverse
            .process(&mut self.spec_buf, &mut st.q)
            .map_err(|e| SimError::Instability(e.to_string()))?;
        if st.q.iter().any(|v| !v.is_finite()) {
            return Err(SimError::Instability(format!("non-finite field at t={}", st.t)));
        }
        Ok(())
    }

    /// Advances to `t_target` exactly, with equal steps no larger than the configured dt.
    /// `check` runs after every step.
    pub fn advance_with(
        &mut self,
        st: &mut SimState,
        t_target: f64,
        mut check: impl FnMut(f64) -> Result<()>,
    ) -> Result<()> {
        let span = t_target - st.t;
        if span < 0.0 {
            return Err(SimError::Config(format!("cannot step back from t={} to {t_target}", st.t)));
        }
        if span == 0.0 {
            return Ok(());
        }
        let steps = (span / self.cfg.dt * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        let h = span / steps as f64;
        let qm = st.q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.check_stability(qm, h)?;
        let t0 = st.t;
        for i in 1..=steps {
            self.step(st, h)?;
            st.t = t0 + i as f64 * h;
            check(st.t)?;
        }
        st.t = t_target;
        self.sync(st)?;
        let rec = st.record(self.cfg.dx());
        if !(rec.max_abs_q <= self.q_max) {
            return Err(SimError::Instability(format!(
                "max|q|={:.3e} exceeds the blow-up guard at t={t_target}",
                rec.max_abs_q
            )));
        }
        st.invariants_log.push(rec);
        Ok(())
    }

    pub fn advance(&mut self, st: &mut SimState, t_target: f64) -> Result<()> {
        self.advance_with(st, t_target, |_| Ok(()))
    }
}

/// Double-step initial state on the configured grid.
pub fn init_double_step(step: &StepData, cfg: &SimConfig) -> Result<(Solver, SimState)> {
    cfg.validate_double_step()?;
    let mut solver = Solver::new(cfg)?;
    let q: Vec<f64> = cfg.grid().iter().map(|&x| initial_profile(x, step, cfg)).collect();
    let st = solver.state_from_profile(q)?;
    Ok((solver, st))
}

/// x-range at time t untouched by waves from the return step.
pub fn valid_window(step: &StepData, cfg: &SimConfig, t: f64) -> [f64; 2] {
    let hi = cfg.x_step2() - 6.0 * step.q_r * step.q_r * t - CONTAMINATION_WIDTHS * cfg.ramp_w_return();
    [-cfg.l, hi]
}

/// Geometric check that neither fan has reached the other step (periodic wrap included).
pub fn contamination(step: &StepData, cfg: &SimConfig, t: f64) -> Option<String> {
    if step.q_l == step.q_r {
        return None;
    }
    let x2 = cfg.x_step2();
    let margin = CONTAMINATION_WIDTHS * cfg.ramp_w_return();
    // left edge of the main fan, wrapped around to the right end of the domain
    let left_edge = 12.0 * step.xi_left * t + 2.0 * cfg.l;
    if left_edge < x2 + margin {
        return Some(format!(
            "left edge of the wave fan (x={:.2} after wrap) within {margin} of the return step at {x2}",
            left_edge
        ));
    }
    // the return step radiates left at speeds up to 6q_r²
    let return_edge = valid_window(step, cfg, t)[1];
    let right_edge = 12.0 * step.xi_right * t;
    if return_edge < right_edge {
        return Some(format!(
            "waves from the return step (x={return_edge:.2}) reached the fan's right edge (x={right_edge:.2})"
        ));
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimOutput {
    pub x: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub invariants_log: Vec<InvariantRecord>,
}

/// Runs the double-step problem and collects the requested snapshots.
pub fn run(step: &StepData, cfg: &SimConfig) -> Result<SimOutput> {
    let (mut solver, mut st) = init_double_step(step, cfg)?;
    let q0max = st.q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    solver.check_stability(q0max, cfg.dt)?;
    if let Some(detail) = contamination(step, cfg, cfg.t_end) {
        return Err(SimError::Contamination { t: cfg.t_end, detail });
    }
    let mut times = cfg.snapshots.clone();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut snapshots = Vec::with_capacity(times.len());
    for &ts in &times {
        solver.advance_with(&mut st, ts, |t| match contamination(step, cfg, t) {
            Some(detail) => Err(SimError::Contamination { t, detail }),
            None => Ok(()),
        })?;
        snapshots.push(Snapshot { t: ts, q: st.q.clone() });
    }
    if st.t < cfg.t_end {
        solver.advance(&mut st, cfg.t_end)?;
    }
    Ok(SimOutput { x: cfg.grid(), snapshots, invariants_log: st.invariants_log })
}
