//! Scattering data of the step q_l → q_r.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{domain, Error, Result};

type C = Complex64;

/// Step parameters and the region boundaries in ξ = x/(12t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepData {
    pub q_l: f64,
    pub q_r: f64,
    pub xi_left: f64,
    pub xi_right: f64,
}

impl StepData {
    pub fn new(q_l: f64, q_r: f64) -> Result<Self> {
        if !(q_l.is_finite() && q_r.is_finite()) {
            return Err(domain!("non-finite step parameters"));
        }
        if !(q_l >= 0.0 && q_r > 0.0 && q_r >= q_l) {
            return Err(domain!("step requires q_r ≥ q_l ≥ 0 and q_r > 0, got q_l={q_l}, q_r={q_r}"));
        }
        Ok(StepData {
            q_l,
            q_r,
            xi_left: 0.5 * q_l * q_l - q_r * q_r,
            xi_right: -q_l * q_l / 3.0 - q_r * q_r / 6.0,
        })
    }

    /// √(q_r² − q_l²)
    pub fn q_tilde(&self) -> f64 {
        ((self.q_r - self.q_l) * (self.q_r + self.q_l)).sqrt()
    }
}

/// Which boundary value to take for a point on a cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Above,
    Below,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralValue {
    pub z: C,
    pub side: Side,
}

impl SpectralValue {
    pub fn off(z: C) -> Self {
        SpectralValue { z, side: Side::Off }
    }
    pub fn above(x: f64) -> Self {
        SpectralValue { z: C::new(x, 0.0), side: Side::Above }
    }
    pub fn below(x: f64) -> Self {
        SpectralValue { z: C::new(x, 0.0), side: Side::Below }
    }
}

/// β(z) = ((z−q)/(z+q))^{1/4}, cut on [−q, q], β → 1 at infinity.
pub fn beta_branch(z: SpectralValue, q: f64) -> Result<C> {
    if q == 0.0 {
        return Ok(C::new(1.0, 0.0));
    }
    let x = z.z.re;
    if z.z.im == 0.0 && x.abs() <= q {
        if x.abs() == q {
            return Err(Error::Singular(format!("β evaluated at the branch point {x}")));
        }
        let modulus = ((q - x) / (q + x)).powf(0.25);
        return match z.side {
            Side::Above => Ok(C::from_polar(modulus, FRAC_PI_4)),
            Side::Below => Ok(C::from_polar(modulus, -FRAC_PI_4)),
            Side::Off => Err(domain!("β evaluated on its cut at {x} without a side")),
        };
    }
    Ok(((z.z - q) / (z.z + q)).powf(0.25))
}

fn abr_from_betas(bl: C, br: C) -> (C, C, C) {
    let p = bl / br;
    let pi = p.inv();
    let a = 0.5 * (p + pi);
    let b = (p - pi) / C::new(0.0, 2.0);
    (a, b, b / a)
}

/// (a, b, r) at a spectral point.
pub fn scattering_abr(z: SpectralValue, step: &StepData) -> Result<(C, C, C)> {
    let bl = beta_branch(z, step.q_l)?;
    let br = beta_branch(z, step.q_r)?;
    if br.norm() == 0.0 || bl.norm() == 0.0 {
        return Err(Error::Singular("a, b at a branch point".into()));
    }
    Ok(abr_from_betas(bl, br))
}

/// ln|a₊(ζ)|² on the band q_l < ζ < q_r, given d_l = ζ − q_l and d_r = q_r − ζ.
pub fn ln_abs_a2_band(step: &StepData, zeta: f64, d_l: f64, d_r: f64) -> f64 {
    let (q_l, q_r) = (step.q_l, step.q_r);
    // |β_l|²/|β_r|² = √(d_l (ζ+q_r) / (d_r (ζ+q_l)))
    let ratio_l = if q_l == 0.0 { 1.0 } else { d_l / (zeta + q_l) };
    let ln_x = 0.5 * (ratio_l.ln() - (d_r / (zeta + q_r)).ln());
    // |a₊|² = (X + 1/X)/4 since β_l is real and β_r has phase π/4
    ln_x.abs() + (-2.0 * ln_x.abs()).exp().ln_1p() - 4f64.ln()
}

/// L(u) = ln(1 − |r(u)|²) for real u > q_r, given d_r = u − q_r.
pub fn ln_one_minus_r2(step: &StepData, u: f64, d_r: f64) -> f64 {
    let (q_l, q_r) = (step.q_l, step.q_r);
    // Y = β_r²/β_l²; 1−|r|² = 4Y/(1+Y)²
    let lr = (d_r / (u + q_r)).ln();
    let ll = if q_l == 0.0 { 0.0 } else { ((u - q_l) / (u + q_l)).ln() };
    let ln_y = 0.5 * (lr - ll);
    let y = ln_y.exp();
    4f64.ln() + ln_y - 2.0 * y.ln_1p()
}

/// r(u) for real u > q_r, given d_r = u − q_r: r = −i(1−Y)/(1+Y).
pub fn r_real(step: &StepData, u: f64, d_r: f64) -> C {
    let (q_l, q_r) = (step.q_l, step.q_r);
    let lr = (d_r / (u + q_r)).ln();
    let ll = if q_l == 0.0 { 0.0 } else { ((u - q_l) / (u + q_l)).ln() };
    let y = (0.5 * (lr - ll)).exp();
    C::new(0.0, -(1.0 - y) / (1.0 + y))
}

/// (ln(a₊a₋*), ln|a₊|²) at an interior band point ζ ∈ (q_l, q_r) or its mirror.
///
/// a₋*(ζ) is the Schwarz conjugate conj(a(ζ̄)) evaluated from below, which is
/// conj(a₊(ζ)); the product is therefore |a₊|², real and positive.
pub fn band_log_products(zeta: f64, step: &StepData) -> Result<(C, f64)> {
    if step.q_l == step.q_r {
        return Err(domain!("empty band for q_l = q_r"));
    }
    let s = zeta.abs();
    if !(s > step.q_l && s < step.q_r) {
        if s == step.q_l || s == step.q_r {
            return Err(Error::Singular(format!("band endpoint ζ={zeta}")));
        }
        return Err(domain!("ζ={zeta} outside the band ({}, {})", step.q_l, step.q_r));
    }
    let (a_plus, _, _) = scattering_abr(SpectralValue::above(zeta), step)?;
    let a_minus_star = a_plus.conj();
    let prod = a_plus * a_minus_star;
    let lm = ln_abs_a2_band(step, s, s - step.q_l, step.q_r - s);
    Ok((prod.ln(), lm))
}

/// (z_l, ν) with z_l = √(q_l²/2 − ξ) and ν = −ln(1−|r(z_l)|²)/(2π).
pub fn nu_of_xi(xi: f64, step: &StepData) -> Result<(f64, f64)> {
    if !(xi < step.xi_left) {
        return Err(Error::Region(format!("ν(ξ) needs ξ < {} (got {xi})", step.xi_left)));
    }
    let z_l = (0.5 * step.q_l * step.q_l - xi).sqrt();
    if step.q_l == step.q_r {
        return Ok((z_l, 0.0));
    }
    // z_l − q_r = (z_l² − q_r²)/(z_l + q_r) and z_l² − q_r² = xi_left − ξ
    let d_r = (step.xi_left - xi) / (z_l + step.q_r);
    let l = ln_one_minus_r2(step, z_l, d_r);
    Ok((z_l, -l / (2.0 * PI)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_at_two_q() {
        let b = beta_branch(SpectralValue::off(C::new(1.6, 0.0)), 0.8).unwrap();
        assert!((b.re - (1.0f64 / 3.0).powf(0.25)).abs() < 1e-15 && b.im == 0.0);
    }

    #[test]
    fn beta_on_cut_needs_side() {
        assert!(beta_branch(SpectralValue::off(C::new(0.3, 0.0)), 0.8).is_err());
        assert!(matches!(
            beta_branch(SpectralValue::off(C::new(0.8, 0.0)), 0.8),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn nu_at_reference_point() {
        let step = StepData::new(0.2, 0.8).unwrap();
        let (z_l, nu) = nu_of_xi(-1.0, &step).unwrap();
        assert!((z_l - 1.02f64.sqrt()).abs() < 1e-15);
        assert!((nu - 0.0296308).abs() < 1e-6, "{nu}");
    }
}
