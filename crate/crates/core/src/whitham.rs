//! g-functions, Whitham velocities, the soft-edge equation for z_d and region labels.

use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::branch::sqrt_product;
use crate::error::{domain, Error, Result};
use crate::quad::{chebyshev_graded, gauss, graded};
use crate::scattering::{Side, SpectralValue, StepData};
use crate::specfun::{e_over_k_minus_mp2, ellip_e, ellip_k, Modulus};

type C = Complex64;

/// θ(ξ; z) = 4z³ + 12ξz.
pub fn theta_phase(xi: f64, z: C) -> C {
    4.0 * z * z * z + 12.0 * xi * z
}

/// Genus-zero g-function with branch points ±z1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenusZeroG {
    pub z1: f64,
    pub xi: f64,
    pub z0: f64,
}

impl GenusZeroG {
    pub fn new(z1: f64, xi: f64) -> Result<Self> {
        if !(z1 > 0.0) {
            return Err(domain!("genus-zero g needs z1 > 0"));
        }
        let z02 = 0.5 * z1 * z1 - xi;
        if z02 < 0.0 {
            return Err(domain!("stationary point not real: ξ={xi} > z1²/2"));
        }
        Ok(GenusZeroG { z1, xi, z0: z02.sqrt() })
    }

    /// dg₀/dz = 12z(z² − z0²)/R₀(z).
    pub fn derivative(&self, z: SpectralValue) -> Result<C> {
        let r = sqrt_product(z.z, z.side, &[self.z1])?;
        Ok(12.0 * z.z * (z.z * z.z - self.z0 * self.z0) / r)
    }
}

/// g₀(z) = (4z² + 12ξ + 2z1²)·√(z² − z1²).
pub fn g0_eval(state: &GenusZeroG, z: SpectralValue) -> Result<C> {
    if z.z.im == 0.0 && z.z.re.abs() == state.z1 {
        return Ok(C::new(0.0, 0.0));
    }
    let r = sqrt_product(z.z, z.side, &[state.z1])?;
    Ok((4.0 * z.z * z.z + 12.0 * state.xi + 2.0 * state.z1 * state.z1) * r)
}

pub fn v0(z1: f64) -> f64 {
    -6.0 * z1 * z1
}

fn check_order(z1: f64, z2: f64, z3: f64) -> Result<()> {
    if !(z1 >= 0.0 && z1 < z2 && z2 < z3) || !z3.is_finite() {
        return Err(domain!("ordering 0 ≤ z1 < z2 < z3 violated: ({z1}, {z2}, {z3})"));
    }
    Ok(())
}

/// Modulus with m² = (z3²−z2²)/(z3²−z1²), both squares formed without cancellation.
pub fn genus_one_modulus(z1: f64, z2: f64, z3: f64) -> Result<Modulus> {
    let d31 = (z3 - z1) * (z3 + z1);
    let m2 = (z3 - z2) * (z3 + z2) / d31;
    let mp2 = (z2 - z1) * (z2 + z1) / d31;
    Modulus::from_squares(m2, mp2)
}

/// Genus-one Whitham velocity.
pub fn v1(z1: f64, z2: f64, z3: f64) -> Result<f64> {
    check_order(z1, z2, z3)?;
    let m = genus_one_modulus(z1, z2, z3)?;
    let (s1, s2, s3) = (z1 * z1, z2 * z2, z3 * z3);
    let d31 = (z3 - z1) * (z3 + z1);
    if m.m_prime * m.m_prime < 1e-10 {
        // z2 → z1: soliton limit
        return Ok(-4.0 * s1 - 2.0 * s3);
    }
    // z1² − z2² + (z3²−z1²)E/K = (z3²−z1²)(E/K − m′²)
    let den = d31 * e_over_k_minus_mp2(&m);
    Ok(-2.0 * (s1 + s2 + s3) + 4.0 * (z2 - z1) * (z2 + z1) * (z2 - z3) * (z2 + z3) / den)
}

/// Polynomial-coefficient evaluation −12·P₁(z2)/P₀(z2) of the motion law of z2.
pub fn v1_polynomial(z1: f64, z2: f64, z3: f64) -> Result<f64> {
    check_order(z1, z2, z3)?;
    let m = genus_one_modulus(z1, z2, z3)?;
    let (s1, s2, s3) = (z1 * z1, z2 * z2, z3 * z3);
    let sum = s1 + s2 + s3;
    let eok = ellip_e(&m) / ellip_k(&m);
    let big = s1 + (s3 - s1) * eok;
    let p01 = -big;
    let p11 = (s1 * s2 + s2 * s3 + s1 * s3) / 3.0 - sum / 6.0 * big;
    let p0 = z2 * z2 * z2 + p01 * z2;
    let p1 = z2.powi(5) - 0.5 * sum * z2.powi(3) + p11 * z2;
    Ok(-12.0 * p1 / p0)
}

/// Genus-two g-function data (three symmetric bands).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenusTwoG {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
    pub xi: f64,
    pub mu2: f64,
    pub b: f64,
    pub m: Modulus,
}

impl GenusTwoG {
    pub fn new(z1: f64, z2: f64, z3: f64, xi: f64) -> Result<Self> {
        check_order(z1, z2, z3)?;
        let m = genus_one_modulus(z1, z2, z3)?;
        let (s1, s2, s3) = (z1 * z1, z2 * z2, z3 * z3);
        let sum = s1 + s2 + s3;
        let eok = ellip_e(&m) / ellip_k(&m);
        let big = s1 + (s3 - s1) * eok;
        let b = (s1 * s2 + s2 * s3 + s1 * s3) / 3.0 - (xi + sum / 6.0) * big;
        let mu2 = 0.5 * (s1 - s2 + s3) - xi;
        Ok(GenusTwoG { z1, z2, z3, xi, mu2, b, m })
    }

    fn alpha(&self) -> f64 {
        self.xi - 0.5 * (self.z1 * self.z1 + self.z2 * self.z2 + self.z3 * self.z3)
    }

    /// dg₁/dz = 12(z⁵ + (ξ − Σ/2)z³ + bz)/R₁(z).
    pub fn derivative(&self, z: SpectralValue) -> Result<C> {
        let r = sqrt_product(z.z, z.side, &[self.z1, self.z2, self.z3])?;
        Ok(self.numerator(z.z) / r)
    }

    fn numerator(&self, z: C) -> C {
        let z2 = z * z;
        12.0 * z * (z2 * z2 + self.alpha() * z2 + self.b)
    }

    /// Laurent coefficients c_k of (1 + αw + bw²)/S(w) − (1 + ξw), w = z⁻², where
    /// R₁ = z³S(w). Then g₁ − θ = Σ_{k≥2} 12c_k z^{3−2k}/(3−2k).
    fn tail_coefficients(&self, n: usize) -> Vec<f64> {
        let mut inv_s = vec![0.0; n];
        inv_s[0] = 1.0;
        for a in [self.z1 * self.z1, self.z2 * self.z2, self.z3 * self.z3] {
            // (1 − a w)^{-1/2} = Σ binom(2j,j)/4^j a^j w^j
            let mut ser = vec![0.0; n];
            let mut c = 1.0;
            for (j, s) in ser.iter_mut().enumerate() {
                *s = c;
                c *= a * (2.0 * j as f64 + 1.0) / (2.0 * j as f64 + 2.0);
            }
            let mut out = vec![0.0; n];
            for i in 0..n {
                for j in 0..n - i {
                    out[i + j] += inv_s[i] * ser[j];
                }
            }
            inv_s = out;
        }
        let num = [1.0, self.alpha(), self.b];
        let mut c = vec![0.0; n];
        for i in 0..n {
            for (j, nj) in num.iter().enumerate() {
                if i + j < n {
                    c[i + j] += inv_s[i] * nj;
                }
            }
        }
        c[0] -= 1.0;
        c[1] -= self.xi;
        c
    }

    /// Radius beyond which the Laurent tail is used.
    fn far_radius(&self) -> f64 {
        4.0 * self.z3
    }
}

/// Straight-line integral of `f` from `a` to `b`, with τ² substitutions absorbing
/// inverse-square-root behaviour at the flagged ends.
fn segment_integral(f: &dyn Fn(C) -> Result<C>, a: C, b: C, sing_a: bool, sing_b: bool) -> Result<C> {
    let d = b - a;
    let err = std::cell::RefCell::new(None);
    let n = 24;
    let levels = 12;
    let eval = |s: C, jac: C| -> C {
        match f(s) {
            Ok(v) => v * jac,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                C::new(0.0, 0.0)
            }
        }
    };
    let val = match (sing_a, sing_b) {
        (false, false) => {
            let mut acc = C::new(0.0, 0.0);
            for i in 0..4 {
                let lo = i as f64 / 4.0;
                acc += gauss(|_, o, _| eval(a + d * (lo + o), d), lo, lo + 0.25, n);
            }
            acc
        }
        _ => {
            // split at the midpoint; each singular half uses s = end ± (…)τ²
            let mid = a + 0.5 * d;
            let mut acc = C::new(0.0, 0.0);
            let halves = [(a, mid, sing_a), (b, mid, sing_b)];
            for (k, (end, other, sing)) in halves.into_iter().enumerate() {
                let h = other - end;
                let sign = if k == 0 { 1.0 } else { -1.0 };
                if sing {
                    acc += sign
                        * graded(|_, t, _| eval(end + h * (t * t), h * (2.0 * t)), 0.0, 1.0, n, levels, true, false);
                } else {
                    acc += sign * graded(|_, t, _| eval(end + h * t, h), 0.0, 1.0, n, levels, true, false);
                }
            }
            acc
        }
    };
    match err.into_inner() {
        Some(e) => Err(Error::Quadrature(format!("path integrand failed: {e}"))),
        None => Ok(val),
    }
}

fn near_branch(z: C, pts: &[f64]) -> bool {
    pts.iter().any(|&p| (z - p).norm() < 1e-14 || (z + p).norm() < 1e-14)
}

/// g₁(z) = ∫_{z1}^{z} dg₁.
///
/// For |z| below 4·z3 the integral runs along z1 → z1+iσH → z+iσH → z with σ the
/// half-plane of z (or of the selected boundary value); beyond that radius the
/// exact Laurent tail of g₁ − θ is summed.
pub fn g1_eval(state: &GenusTwoG, z: SpectralValue) -> Result<C> {
    let pts = [state.z1, state.z2, state.z3];
    if near_branch(z.z, &pts) {
        if (z.z - state.z1).norm() < 1e-14 {
            return Ok(C::new(0.0, 0.0));
        }
        return Err(Error::Singular(format!("g₁ at a branch point {}", z.z)));
    }
    if z.z.norm() > state.far_radius() {
        let c = state.tail_coefficients(60);
        let w = z.z.inv() * z.z.inv();
        let mut acc = C::new(0.0, 0.0);
        let mut p = w;
        for (k, ck) in c.iter().enumerate().skip(2) {
            acc += 12.0 * ck * z.z * p / (3.0 - 2.0 * k as f64);
            p *= w;
            if p.norm() < 1e-300 {
                break;
            }
        }
        return Ok(theta_phase(state.xi, z.z) + acc);
    }
    let sigma = if z.z.im > 0.0 || (z.z.im == 0.0 && z.side != Side::Below) {
        1.0
    } else {
        -1.0
    };
    let h = 0.5 * state.z3;
    let f = |s: C| state.derivative(SpectralValue::off(s));
    let base = C::new(state.z1, 0.0);
    let up = C::new(state.z1, sigma * h);
    let mut total = segment_integral(&f, base, up, state.z1 > 0.0, false)?;
    if sigma * z.z.im >= h {
        total += segment_integral(&f, up, z.z, false, false)?;
        return Ok(total);
    }
    let over = C::new(z.z.re, sigma * h);
    total += segment_integral(&f, up, over, false, false)?;
    let end_sing = z.z.im == 0.0 && pts.iter().any(|&p| (z.z.re.abs() - p).abs() < 0.05 * state.z3);
    total += segment_integral(&f, over, z.z, false, end_sing)?;
    Ok(total)
}

/// ∫_{z2}^{z3} 12ζ(ζ²−z2²)(ζ²−μ²)/|R₁(ζ)| dζ; zero exactly when z2 is the soft edge.
pub fn soft_edge_band_integral(z1: f64, z2: f64, z3: f64, xi: f64) -> f64 {
    let (s1, s2, s3) = (z1 * z1, z2 * z2, z3 * z3);
    let mu2 = 0.5 * (s1 - s2 + s3) - xi;
    let d = (z3 - z2) * (z3 + z2);
    let g = |u: f64, _v: f64| {
        let s = s2 + d * u;
        let sm1 = (z2 - z1) * (z2 + z1) + d * u;
        6.0 * d * u * (s - mu2) / sm1.sqrt()
    };
    chebyshev_graded(g, 24, 30, true, false)
}

/// z_d(ξ) ∈ (q_l, q_r) solving 12ξ = v₁(q_l, z_d, q_r).
pub fn solve_zd(xi: f64, step: &StepData) -> Result<f64> {
    if !(xi > step.xi_left && xi < step.xi_right) {
        return Err(Error::Region(format!(
            "ξ={xi} outside the DSW interval ({}, {})",
            step.xi_left, step.xi_right
        )));
    }
    let (ql, qr) = (step.q_l, step.q_r);
    let f = |z: f64| -> Result<f64> { Ok(v1(ql, z, qr)? - 12.0 * xi) };
    let (mut lo, mut hi) = (ql, qr);
    // f(lo⁺) > 0 > f(hi⁻); v1 decreasing in z2
    let mut iter = 0;
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
        if iter > 200 {
            return Err(Error::Convergence("z_d bisection".into()));
        }
    }
    // Newton polish on the bracket
    let mut z = 0.5 * (lo + hi);
    for _ in 0..3 {
        let h = 1e-7 * (hi - lo).max(1e-9 * qr).max(1e-12);
        let (zl, zh) = ((z - h).max(lo.next_up_safe()), (z + h).min(hi.next_down_safe()));
        if zh <= zl {
            break;
        }
        let d = (f(zh)? - f(zl)?) / (zh - zl);
        if d.is_finite() && d != 0.0 {
            let zn = z - f(z)? / d;
            if zn > lo && zn < hi {
                z = zn;
            }
        }
    }
    let best = [lo, z, hi]
        .into_iter()
        .filter(|&v| v > ql && v < qr)
        .map(|v| (v, f(v).map(f64::abs).unwrap_or(f64::INFINITY)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Convergence("z_d outside (q_l, q_r)".into()))?;
    if best.1 > 1e-12 * xi.abs().max(1.0) {
        return Err(Error::Convergence(format!("z_d residual {} too large", best.1)));
    }
    Ok(best.0)
}

trait NextFloat {
    fn next_up_safe(self) -> f64;
    fn next_down_safe(self) -> f64;
}
impl NextFloat for f64 {
    fn next_up_safe(self) -> f64 {
        f64::from_bits(if self >= 0.0 { self.to_bits() + 1 } else { self.to_bits() - 1 })
    }
    fn next_down_safe(self) -> f64 {
        f64::from_bits(if self > 0.0 { self.to_bits() - 1 } else { self.to_bits() + 1 })
    }
}

/// Region of the (x, t) half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegionLabel {
    #[serde(rename = "LPW")]
    Lpw,
    #[serde(rename = "DSW")]
    Dsw,
    #[serde(rename = "RPW")]
    Rpw,
    #[serde(rename = "TRANSITION_L")]
    TransitionL,
    #[serde(rename = "TRANSITION_R")]
    TransitionR,
}

impl RegionLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegionLabel::Lpw => "LPW",
            RegionLabel::Dsw => "DSW",
            RegionLabel::Rpw => "RPW",
            RegionLabel::TransitionL => "TRANSITION_L",
            RegionLabel::TransitionR => "TRANSITION_R",
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "LPW" => RegionLabel::Lpw,
            "DSW" => RegionLabel::Dsw,
            "RPW" => RegionLabel::Rpw,
            "TRANSITION_L" => RegionLabel::TransitionL,
            "TRANSITION_R" => RegionLabel::TransitionR,
            other => return Err(domain!("unknown region label {other:?}")),
        })
    }
}

/// Label of (x, t) with ε-collars around x = 12·xi_left·t and x = 12·xi_right·t.
pub fn classify_region(x: f64, t: f64, step: &StepData, eps: f64) -> RegionLabel {
    let xl = 12.0 * step.xi_left * t;
    let xr = 12.0 * step.xi_right * t;
    if (x - xl).abs() <= eps {
        RegionLabel::TransitionL
    } else if (x - xr).abs() <= eps {
        RegionLabel::TransitionR
    } else if x < xl {
        RegionLabel::Lpw
    } else if x < xr {
        RegionLabel::Dsw
    } else {
        RegionLabel::Rpw
    }
}
