//! Invariant and validation suites run by `selftest` and the acceptance target.
//! Every check compares library output against an oracle computed here by other means.

use std::f64::consts::{FRAC_PI_2, PI};

use dswlab_core::asymptotics::{evaluate_asymptotic, q_lpw, q_lpw_route_s4, q_per, q_per_period};
use dswlab_core::rh_model::{elliptic_in_delta, landen_constants, reconstruct_theta_route, ModelSurface};
use dswlab_core::scattering::{scattering_abr, SpectralValue};
use dswlab_core::specfun::{
    beta_pc, ellip_e, ellip_f_jacobi, ellip_k, jacobi_sn_cn_dn, nu_of_rho, theta1, theta2, theta3, theta4,
    theta_big, Modulus, ThetaParams,
};
use dswlab_core::whitham::{soft_edge_band_integral, solve_zd, v1};
use dswlab_core::StepData;
use dswlab_pde::{run, SimConfig, Solver};
use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::profile::{Profile, ProfileKind, ProfileMeta};
use crate::report::{compare, CompareOptions};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(id: &'static str, name: &'static str, passed: bool, detail: String) -> Self {
        CheckOutcome { id, name, passed, detail }
    }

    fn failed(id: &'static str, name: &'static str, err: impl std::fmt::Display) -> Self {
        CheckOutcome { id, name, passed: false, detail: format!("error: {err}") }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Adaptive Simpson quadrature, kept apart from the library's Gauss rules.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (flm, frm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Periodic-wave profile rebuilt from the model problem against the elliptic formula.
pub fn theta_route() -> CheckOutcome {
    const ID: &str = "A1";
    const NAME: &str = "theta route equals elliptic profile";
    let s = match ModelSurface::new(0.2, 0.5, 0.8) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::failed(ID, NAME, e),
    };
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = r.gen_range(0.0..2.0 * PI);
        match reconstruct_theta_route(d, &s) {
            Ok(route) => {
                worst = worst.max((route.value.re - elliptic_in_delta(d, &s)).abs()).max(route.value.im.abs());
            }
            Err(e) => return CheckOutcome::failed(ID, NAME, e),
        }
    }
    CheckOutcome::new(ID, NAME, worst <= 1e-8, format!("max deviation {worst:.2e} over 100 phases (tol 1e-8)"))
}

/// Bracketed Landen-type identities over random admissible triples.
pub fn landen_brackets() -> CheckOutcome {
    const ID: &str = "A2";
    const NAME: &str = "Landen bracket identities";
    let mut r = rng(102);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let ql = r.gen_range(0.01..1.0);
        let zd = ql + r.gen_range(0.01..1.0);
        let qr = zd + r.gen_range(0.01..1.0);
        match ModelSurface::new(ql, zd, qr) {
            Ok(s) => worst = landen_constants(&s).residuals.iter().fold(worst, |w, x| w.max(x.abs())),
            Err(e) => return CheckOutcome::failed(ID, NAME, e),
        }
    }
    CheckOutcome::new(ID, NAME, worst <= 1e-10, format!("max residual {worst:.2e} over 1000 triples (tol 1e-10)"))
}

/// Limits of the Whitham velocity at the two ends of the fan.
pub fn whitham_edges() -> CheckOutcome {
    const ID: &str = "A3";
    const NAME: &str = "Whitham edge velocities";
    let (ql, qr) = (0.2f64, 0.8f64);
    let (a, b) = match (v1(ql, ql + 1e-8, qr), v1(ql, qr - 1e-6, qr)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return CheckOutcome::failed(ID, NAME, e),
    };
    let (wa, wb) = (-4.0 * ql * ql - 2.0 * qr * qr, 6.0 * ql * ql - 12.0 * qr * qr);
    let (da, db) = ((a - wa).abs(), (b - wb).abs());
    CheckOutcome::new(
        ID,
        NAME,
        da <= 1e-4 && db <= 1e-4,
        format!("v1 → {a:.6} (want {wa:.2}), {b:.6} (want {wb:.2}); deviations {da:.1e}, {db:.1e} (tol 1e-4)"),
    )
}

/// ∫_{z_d}^{q_r} 12ζ(ζ²−z_d²)(ζ²−μ²)/|R_d| dζ by Simpson after ζ² = q_r² − s².
fn band_integral_oracle(ql: f64, zd: f64, qr: f64, xi: f64) -> f64 {
    let mu2 = 0.5 * (ql * ql - zd * zd + qr * qr) - xi;
    let smax = ((qr - zd) * (qr + zd)).sqrt();
    simpson(
        &|s: f64| {
            let z2 = qr * qr - s * s;
            12.0 * (z2 - zd * zd).max(0.0).sqrt() * (z2 - mu2) / (z2 - ql * ql).sqrt()
        },
        0.0,
        smax,
        1e-13,
    )
}

/// z_d solves the band condition and decreases across the fan.
pub fn zd_consistency() -> CheckOutcome {
    const ID: &str = "A4";
    const NAME: &str = "soft-edge z_d consistency";
    let step = match StepData::new(0.2, 0.8) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::failed(ID, NAME, e),
    };
    let span = step.xi_right - step.xi_left;
    let (mut worst, mut worst_lib): (f64, f64) = (0.0, 0.0);
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for i in 1..=50 {
        let xi = step.xi_left + span * i as f64 / 51.0;
        let zd = match solve_zd(xi, &step) {
            Ok(z) => z,
            Err(e) => return CheckOutcome::failed(ID, NAME, e),
        };
        monotone &= zd < prev;
        prev = zd;
        worst = worst.max(band_integral_oracle(step.q_l, zd, step.q_r, xi).abs());
        worst_lib = worst_lib.max(soft_edge_band_integral(step.q_l, zd, step.q_r, xi).abs());
    }
    let pass = worst <= 1e-8 && worst_lib <= 1e-8 && monotone;
    CheckOutcome::new(
        ID,
        NAME,
        pass,
        format!(
            "max residual {worst:.2e} (Simpson), {worst_lib:.2e} (Gauss) over 50 ξ (tol 1e-8); strictly decreasing: {monotone}"
        ),
    )
}

/// |β|² = ν for the parabolic-cylinder constant.
pub fn beta_modulus() -> CheckOutcome {
    const ID: &str = "A5";
    const NAME: &str = "parabolic-cylinder |β|² = ν";
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let nu = 10f64.powf(-4.0 + (2f64.log10() + 4.0) * i as f64 / 49.0);
        let r = (1.0 - (-2.0 * PI * nu).exp()).sqrt();
        let rho = C::from_polar(r, 0.3 * i as f64);
        match nu_of_rho(rho).and_then(|n| beta_pc(rho, n)) {
            Ok(b) => worst = worst.max(rel(b.norm_sqr(), nu)),
            Err(e) => return CheckOutcome::failed(ID, NAME, e),
        }
    }
    CheckOutcome::new(ID, NAME, worst <= 1e-12, format!("max relative deviation {worst:.2e} over 50 ν (tol 1e-12)"))
}

fn traveling_wave_error(dt: f64) -> Result<f64, String> {
    let (z1, z2, z3) = (0.2, 0.5, 0.8);
    let p = q_per_period(z1, z2, z3).map_err(|e| e.to_string())?;
    let cfg = SimConfig::new(4.0 * p, 4096, dt, 1.0);
    let mut solver = Solver::new(&cfg).map_err(|e| e.to_string())?;
    let x = cfg.grid();
    let q0 = x.iter().map(|&x| q_per(x, 0.0, z1, z2, z3, 0.0)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    let mut st = solver.state_from_profile(q0).map_err(|e| e.to_string())?;
    solver.advance(&mut st, 1.0).map_err(|e| e.to_string())?;
    let mut err: f64 = 0.0;
    for (&x, &q) in x.iter().zip(&st.q) {
        err = err.max((q - q_per(x, 1.0, z1, z2, z3, 0.0).map_err(|e| e.to_string())?).abs());
    }
    Ok(err)
}

/// The solver against the exact periodic traveling wave on eight wavelengths.
pub fn traveling_wave() -> CheckOutcome {
    const ID: &str = "A6";
    const NAME: &str = "solver reproduces the traveling wave";
    let (coarse, fine) = match (traveling_wave_error(4e-3), traveling_wave_error(2e-3)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return CheckOutcome::failed(ID, NAME, e),
    };
    let ratio = coarse / fine;
    CheckOutcome::new(
        ID,
        NAME,
        coarse <= 1e-6 && ratio >= 16.0,
        format!("L∞ error {coarse:.2e} at dt=4e-3 (tol 1e-6), {fine:.2e} at dt=2e-3; ratio {ratio:.1} (min 16)"),
    )
}

/// Scattering data: determinant, reflection bounds and absence of zeros of a.
pub fn scattering_invariants() -> CheckOutcome {
    const ID: &str = "A9";
    const NAME: &str = "scattering invariants";
    let step = match StepData::new(0.2, 0.8) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::failed(ID, NAME, e),
    };
    let abr = |sv: SpectralValue| scattering_abr(sv, &step);
    let mut r = rng(109);
    let (mut det_err, mut r_off): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let sign = if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let z = C::new(r.gen_range(-2.0..2.0), sign * r.gen_range(0.01..2.0));
        match (abr(SpectralValue::off(z)), abr(SpectralValue::off(z.conj()))) {
            (Ok((a, b, rr)), Ok((ac, bc, _))) => {
                det_err = det_err.max((a * ac.conj() - bc.conj() * b - 1.0).norm());
                r_off = r_off.max(rr.norm());
            }
            (Err(e), _) | (_, Err(e)) => return CheckOutcome::failed(ID, NAME, e),
        }
    }
    for i in 1..=100 {
        let x = 0.8 + 0.05 * i as f64;
        for z in [x, -x] {
            match abr(SpectralValue::off(C::new(z, 0.0))) {
                Ok((_, _, rr)) => r_off = r_off.max(rr.norm()),
                Err(e) => return CheckOutcome::failed(ID, NAME, e),
            }
        }
    }
    let mut band: f64 = 0.0;
    for i in 1..50 {
        let zeta = 0.2 + 0.6 * i as f64 / 50.0;
        for sv in [SpectralValue::above(zeta), SpectralValue::below(zeta), SpectralValue::above(-zeta), SpectralValue::below(-zeta)] {
            match abr(sv) {
                Ok((_, _, rr)) => band = band.max((rr.norm() - 1.0).abs()),
                Err(e) => return CheckOutcome::failed(ID, NAME, e),
            }
        }
    }
    let mut min_a = f64::INFINITY;
    for i in 0..201 {
        for j in 0..101 {
            let z = C::new(-2.4 + 4.8 * i as f64 / 200.0, 1e-3 + 2.4 * j as f64 / 100.0);
            for zz in [z, z.conj()] {
                match abr(SpectralValue::off(zz)) {
                    Ok((a, _, _)) => min_a = min_a.min(a.norm()),
                    Err(e) => return CheckOutcome::failed(ID, NAME, e),
                }
            }
        }
    }
    let pass = det_err <= 1e-12 && r_off < 1.0 && band <= 1e-10 && min_a >= 0.1;
    CheckOutcome::new(
        ID,
        NAME,
        pass,
        format!(
            "|det T − 1| ≤ {det_err:.1e} (tol 1e-12); max |r| off bands {r_off:.4}; ||r±| − 1| on bands ≤ {band:.1e} (tol 1e-10); min |a| {min_a:.3} (min 0.1)"
        ),
    )
}

/// sn via the theta quotient (θ₃(0)/θ₂(0))·θ₁(z)/θ₄(z), z = πu/(2K).
fn sn_theta(u: f64, m: &Modulus) -> Result<f64, dswlab_core::Error> {
    let k = ellip_k(m);
    let kp = ellip_k(&m.complement()?);
    let tau = C::new(0.0, kp / k);
    let z = C::new(PI * u / (2.0 * k), 0.0);
    let zero = C::new(0.0, 0.0);
    Ok((theta3(zero, tau)? / theta2(zero, tau)? * theta1(z, tau)? / theta4(z, tau)?).re)
}

fn special_function_residuals() -> Result<(f64, f64), dswlab_core::Error> {
    let mut r = rng(110);
    let mut ident: f64 = 0.0;
    for _ in 0..500 {
        let m = Modulus::new(r.gen_range(0.0..0.995))?;
        let u = r.gen_range(-5.0..5.0);
        let (s, c, d) = jacobi_sn_cn_dn(u, &m);
        let mp = m.m_prime;
        ident = ident.max((s * s + c * c - 1.0).abs()).max((d * d + m.m * m.m * s * s - 1.0).abs());
        let k = ellip_k(&m);
        let (s4, c4, d4) = jacobi_sn_cn_dn(u + 4.0 * k, &m);
        let scale = 1.0 + u.abs() + 4.0 * k;
        ident = ident.max(((s - s4).abs() + (c - c4).abs() + (d - d4).abs()) / scale);
        // Landen
        let mt = m.landen();
        let (st, ct, dt) = jacobi_sn_cn_dn((1.0 + mp) * u, &mt);
        ident = ident
            .max((st - (1.0 + mp) * s * c / d).abs())
            .max((ct - (1.0 - (1.0 + mp) * s * s) / d).abs())
            .max((dt - (1.0 - (1.0 - mp) * s * s) / d).abs())
            .max(rel(ellip_k(&mt), 0.5 * (1.0 + mp) * k));
        // half argument
        let (sh, ch, dh) = jacobi_sn_cn_dn(0.5 * u, &m);
        ident = ident
            .max((sh * sh - (1.0 - c) / (1.0 + d)).abs())
            .max((ch * ch - (d + c) / (1.0 + d)).abs())
            .max((dh * dh - (mp * mp + d + m.m * m.m * c) / (1.0 + d)).abs());
    }
    for _ in 0..100 {
        let m = Modulus::new(r.gen_range(0.05..0.99))?;
        let u = r.gen_range(-3.0..3.0);
        ident = ident.max((jacobi_sn_cn_dn(u, &m).0 - sn_theta(u, &m)?).abs());
        let p = ThetaParams::from_modulus(&m)?;
        let w = C::new(r.gen_range(-1.0..1.0), r.gen_range(-0.5..0.5) * p.tau.im);
        let t = theta_big(w, &p)?;
        let shifted = theta_big(w + p.tau, &p)?;
        let factor = (C::new(0.0, -2.0 * PI) * w - C::i() * PI * p.tau).exp();
        ident = ident.max((shifted - factor * t).norm() / shifted.norm().max(1.0));
        ident = ident.max((theta_big(w + 1.0, &p)? - t).norm() / t.norm().max(1.0));
    }
    let mut quad: f64 = 0.0;
    for i in 0..20 {
        let mm = 0.98 * i as f64 / 19.0;
        let m = Modulus::new(mm)?;
        let k2 = mm * mm;
        let ko = simpson(&|s: f64| 1.0 / (1.0 - k2 * s.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-15);
        let eo = simpson(&|s: f64| (1.0 - k2 * s.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 1e-15);
        let phi = (0.3 + 0.03 * i as f64).asin();
        let fo = simpson(&|s: f64| 1.0 / (1.0 - k2 * s.sin().powi(2)).sqrt(), 0.0, phi, 1e-16);
        quad = quad
            .max(rel(ellip_k(&m), ko))
            .max(rel(ellip_e(&m), eo))
            .max(rel(ellip_f_jacobi(phi.sin(), &m)?, fo));
    }
    Ok((ident, quad))
}

/// Jacobi, theta, Landen and half-argument identities; K, E, F against quadrature.
pub fn special_functions() -> CheckOutcome {
    const ID: &str = "A10";
    const NAME: &str = "special-function identities and quadrature";
    match special_function_residuals() {
        Ok((ident, quad)) => CheckOutcome::new(
            ID,
            NAME,
            ident <= 1e-10 && quad <= 1e-12,
            format!("max identity residual {ident:.2e} (tol 1e-10); max relative K/E/F deviation {quad:.2e} (tol 1e-12)"),
        ),
        Err(e) => CheckOutcome::failed(ID, NAME, e),
    }
}

/// Settings of the desk-scale simulations.
#[derive(Debug, Clone, Copy)]
pub struct DeskScale {
    pub dt_profile: f64,
    pub dt_decay: f64,
}

impl Default for DeskScale {
    fn default() -> Self {
        DeskScale { dt_profile: 5e-4, dt_decay: 1e-3 }
    }
}

/// Simulation at t = 15 against the asymptotic profile in the three regions.
pub fn desk_scale_profile(settings: DeskScale) -> CheckOutcome {
    const ID: &str = "A7";
    const NAME: &str = "simulation matches the asymptotic profile at t=15";
    let inner = || -> Result<CheckOutcome, String> {
        let step = StepData::new(0.2, 0.8).map_err(|e| e.to_string())?;
        let t = 15.0;
        let mut cfg = SimConfig::new(400.0, 1 << 15, settings.dt_profile, t);
        cfg.snapshots = vec![t];
        let out = run(&step, &cfg).map_err(|e| e.to_string())?;
        let (sim, sim_meta) = crate::commands::snapshot_profile(&out.x, &out.snapshots[0].q, t, &step, &cfg, &out.invariants_log);
        let xs: Vec<f64> = (0..=16500).map(|i| -130.0 + 0.02 * i as f64).collect();
        let asym = evaluate_asymptotic(&xs, t, &step, 1.0).map_err(|e| e.to_string())?;
        let asym_meta = ProfileMeta {
            kind: ProfileKind::Asymptotic,
            ql: step.q_l,
            qr: step.q_r,
            t,
            eps: 1.0,
            valid_x: None,
            invariants: Vec::new(),
            failures: asym.failures.len(),
        };
        let asym = Profile { x: asym.x, q: asym.q, region: asym.region };
        let rep = compare(&asym, &asym_meta, &sim, &sim_meta, CompareOptions::default()).map_err(|e| e.to_string())?;
        let rpw = rep.rpw.as_ref().ok_or("empty RPW window")?;
        let dsw = rep.dsw.as_ref().ok_or("empty DSW window")?;
        let env = dsw.envelope_error.ok_or("no crests in the DSW window")?;
        let health = rep.solver_health.as_ref().ok_or("no invariants")?;
        let pass = rpw.max_abs_dev <= 5e-3 && dsw.linf <= 0.15 && dsw.rel_l2 <= 0.05 && env <= 0.03;
        Ok(CheckOutcome::new(
            ID,
            NAME,
            pass,
            format!(
                "RPW max|q−q_r| {:.2e} on [{:.1}, {:.1}] (tol 5e-3); DSW on [{:.1}, {:.1}]: L∞ {:.3} (tol 0.15), rel L² {:.3} (tol 0.05), envelope {:.3} (tol 0.03); energy drift {:.1e}",
                rpw.max_abs_dev, rpw.window[0], rpw.window[1], dsw.window[0], dsw.window[1], dsw.linf, dsw.rel_l2, env,
                health.max_abs_energy_rel_drift
            ),
        ))
    };
    inner().unwrap_or_else(|e| CheckOutcome::failed(ID, NAME, e))
}

/// t^{−1/2} decay of the left plane-wave perturbation at ξ = −1, and agreement of the two
/// evaluations of its phase.
pub fn lpw_decay(settings: DeskScale) -> CheckOutcome {
    const ID: &str = "A8";
    const NAME: &str = "left plane-wave decay law";
    let inner = || -> Result<CheckOutcome, String> {
        let step = StepData::new(0.2, 0.8).map_err(|e| e.to_string())?;
        let mut cfg = SimConfig::new(1000.0, 1 << 15, settings.dt_decay, 40.0);
        cfg.snapshots = (0..=6).map(|i| 10.0 + 5.0 * i as f64).collect();
        let out = run(&step, &cfg).map_err(|e| e.to_string())?;
        let in_window = |x: f64, t: f64| (-1.05..=-0.95).contains(&(x / (12.0 * t)));
        let mut pts = Vec::new();
        let mut route: f64 = 0.0;
        for s in &out.snapshots {
            let dev: Vec<f64> =
                out.x.iter().zip(&s.q).filter(|(&x, _)| in_window(x, s.t)).map(|(_, &q)| q - step.q_l).collect();
            let amp = (dev.iter().map(|d| d * d).sum::<f64>() / dev.len() as f64).sqrt();
            pts.push((s.t.ln(), amp.ln()));
            for k in 0..20 {
                let x = 12.0 * s.t * (-1.05 + 0.1 * k as f64 / 19.0);
                let a = q_lpw(x, s.t, &step).map_err(|e| e.to_string())?;
                let b = q_lpw_route_s4(x, s.t, &step).map_err(|e| e.to_string())?;
                route = route.max((a - b).abs());
            }
        }
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / n, sy / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let pass = (slope + 0.5).abs() <= 0.05 && route <= 1e-8;
        Ok(CheckOutcome::new(
            ID,
            NAME,
            pass,
            format!("fitted exponent {slope:.4} over t ∈ [10, 40] (want −0.5 ± 0.05); two phase routes differ by ≤ {route:.1e} (tol 1e-8)"),
        ))
    };
    inner().unwrap_or_else(|e| CheckOutcome::failed(ID, NAME, e))
}

/// Checks that take seconds.
pub fn quick_suite() -> Vec<CheckOutcome> {
    vec![
        theta_route(),
        landen_brackets(),
        whitham_edges(),
        zd_consistency(),
        beta_modulus(),
        traveling_wave(),
        scattering_invariants(),
        special_functions(),
    ]
}

/// The two desk-scale simulations, run concurrently.
pub fn simulation_suite(settings: DeskScale) -> Vec<CheckOutcome> {
    let (a, b) = rayon::join(|| desk_scale_profile(settings), || lpw_decay(settings));
    vec![a, b]
}
