//! Elliptic integrals, Jacobi elliptic functions, theta functions, complex
//! log-gamma and the parabolic-cylinder constant β(ρ).
//!
//! The parameter called `m` is always the modulus: K(m) = ∫₀^{π/2} ds/√(1−m² sin² s).

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{domain, Error, Result};

type C = Complex64;

/// Elliptic modulus with its complement and Landen image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Modulus {
    pub m: f64,
    pub m_prime: f64,
    pub m_tilde: f64,
}

impl Modulus {
    pub fn new(m: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&m) {
            return Err(domain!("modulus m={m} outside [0,1)"));
        }
        let mp = ((1.0 - m) * (1.0 + m)).sqrt();
        Ok(Self::from_parts(m, mp))
    }

    /// From m² and m′² = 1 − m², each given accurately (no cancellation).
    pub fn from_squares(m2: f64, mp2: f64) -> Result<Self> {
        if !(m2 >= 0.0 && mp2 > 0.0) || ((m2 + mp2) - 1.0).abs() > 1e-12 {
            return Err(domain!("inconsistent modulus squares m²={m2}, m′²={mp2}"));
        }
        Ok(Self::from_parts(m2.sqrt(), mp2.sqrt()))
    }

    fn from_parts(m: f64, mp: f64) -> Self {
        // (1−m′)/(1+m′) = m²/(1+m′)²
        let m_tilde = m * m / ((1.0 + mp) * (1.0 + mp));
        Modulus { m, m_prime: mp, m_tilde }
    }

    /// Complementary modulus m′ as a modulus.
    pub fn complement(&self) -> Result<Self> {
        if self.m_prime >= 1.0 && self.m == 0.0 {
            return Err(domain!("complement of m=0 has m′=1"));
        }
        Ok(Self::from_parts(self.m_prime, self.m))
    }

    /// Landen image m̃ as a modulus.
    pub fn landen(&self) -> Self {
        let mt = self.m_tilde;
        // 1 − m̃² = 4m′/(1+m′)²
        let mp2 = 4.0 * self.m_prime / ((1.0 + self.m_prime) * (1.0 + self.m_prime));
        Self::from_parts(mt, mp2.sqrt())
    }
}

#[cfg(feature = "fault-injection")]
const K_FAULT: f64 = 1.0 + 1e-7;
#[cfg(not(feature = "fault-injection"))]
const K_FAULT: f64 = 1.0;
#[cfg(feature = "fault-injection")]
const K_E_FAULT: f64 = 1.0 - 1e-7;
#[cfg(not(feature = "fault-injection"))]
const K_E_FAULT: f64 = 1.0;

fn agm(a0: f64, b0: f64) -> f64 {
    let (mut a, mut b) = (a0, b0);
    for _ in 0..64 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind.
pub fn ellip_k(m: &Modulus) -> f64 {
    K_FAULT * FRAC_PI_2 / agm(1.0, m.m_prime)
}

/// Complete elliptic integral of the second kind; accepts m = 1 through `m_prime = 0`.
pub fn ellip_e(m: &Modulus) -> f64 {
    if m.m_prime == 0.0 {
        return 1.0;
    }
    let (mut a, mut b) = (1.0, m.m_prime);
    let mut c = m.m;
    let mut sum = 0.5 * c * c;
    let mut pow = 0.5;
    // quadratic convergence: one step past c < 1e-9 leaves terms below 2ⁿ·1e-36
    let mut last = false;
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
        if last {
            break;
        }
        last = c.abs() < 1e-9 * a;
    }
    let k = FRAC_PI_2 / a;
    k * (1.0 - sum)
}

/// E/K − m′², from the AGM with c₁ = m²/(2(1+m′)) and c_{n+1} = c_n²/(4a_{n+1}),
/// so no cancellation occurs as m → 0.
pub fn e_over_k_minus_mp2(m: &Modulus) -> f64 {
    let m2 = m.m * m.m;
    let (mut a, mut b) = (0.5 * (1.0 + m.m_prime), m.m_prime.sqrt());
    let mut c = m2 / (2.0 * (1.0 + m.m_prime));
    let mut pow = 1.0;
    let mut sum = 0.0;
    for _ in 0..64 {
        let term = pow * c * c;
        sum += term;
        if term <= 1e-18 * m2 || c == 0.0 {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        c = c * c / (4.0 * a);
        pow *= 2.0;
    }
    K_E_FAULT * (0.5 * m2 - sum)
}

/// E(m) for a modulus given as a raw value in [0,1].
pub fn ellip_e_of(m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return Err(domain!("modulus m={m} outside [0,1]"));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    Ok(ellip_e(&Modulus::new(m)?))
}

/// Carlson's symmetric integral R_F(x, y, z) by duplication.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    let (mut x, mut y, mut z) = (x, y, z);
    let mut mu = (x + y + z) / 3.0;
    for _ in 0..200 {
        mu = (x + y + z) / 3.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < 1e-3 {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
    }
    1.0 / mu.sqrt()
}

/// Incomplete integral F(k, m) = ∫₀^k dt/√((1−t²)(1−m²t²)) in Jacobi form.
pub fn ellip_f_jacobi(k: f64, m: &Modulus) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return Err(domain!("F(k,m) requires 0 ≤ k ≤ 1, got {k}"));
    }
    if k == 1.0 {
        return Ok(ellip_k(m));
    }
    let k2 = k * k;
    Ok(K_FAULT * k * carlson_rf((1.0 - k) * (1.0 + k), 1.0 - m.m * m.m * k2, 1.0))
}

/// Jacobi elliptic functions (sn, cn, dn) by descending Landen (AGM) recursion.
pub fn jacobi_sn_cn_dn(u: f64, m: &Modulus) -> (f64, f64, f64) {
    if !u.is_finite() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    if m.m == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    // reduce modulo the real period 4K
    let kk = ellip_k(m);
    let per = 4.0 * kk;
    let n = (u / per).round();
    let u = u - n * per;
    let mut a = [0.0f64; 40];
    let mut c = [0.0f64; 40];
    a[0] = 1.0;
    let mut b = m.m_prime;
    c[0] = m.m;
    let mut nsteps = 0;
    let mut last = false;
    for i in 1..40 {
        a[i] = 0.5 * (a[i - 1] + b);
        c[i] = 0.5 * (a[i - 1] - b);
        b = (a[i - 1] * b).sqrt();
        nsteps = i;
        if last {
            break;
        }
        last = c[i].abs() < 1e-9 * a[i];
    }
    let mut phi = (1u64 << nsteps) as f64 * a[nsteps] * u;
    for i in (1..=nsteps).rev() {
        let s = (c[i] / a[i]) * phi.sin();
        phi = 0.5 * (phi + s.clamp(-1.0, 1.0).asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    // dn² = cn² + m′² sn², free of cancellation near u = K
    let dn = (cn * cn + m.m_prime * m.m_prime * sn * sn).sqrt();
    (sn, cn, dn)
}

/// Theta-series parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaParams {
    #[serde(serialize_with = "ser_complex")]
    pub tau: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub nome: Complex64,
    pub truncation: f64,
}

pub(crate) fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl ThetaParams {
    pub fn new(tau: Complex64) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::Convergence(format!("theta series needs Im τ > 0, got τ={tau}")));
        }
        let nome = (C::i() * PI * tau).exp();
        Ok(ThetaParams { tau, nome, truncation: 1e-16 })
    }

    /// τ = 2iK(m′)/K(m) for a surface with modulus m.
    pub fn from_modulus(m: &Modulus) -> Result<Self> {
        if m.m == 0.0 {
            return Err(domain!("τ undefined at m=0 (K(m′) infinite)"));
        }
        let kp = ellip_k(&m.complement()?);
        Self::new(C::new(0.0, 2.0 * kp / ellip_k(m)))
    }
}

const MAX_THETA_TERMS: i64 = 100_000;

/// Σ_n s^n exp(iπτ(n+c)² + 2i(n+c)z), with s = ±1 and c ∈ {0, ½}.
fn theta_sum(z: C, tau: C, c: f64, alternating: bool, cutoff: f64) -> Result<C> {
    if !(tau.im > 0.0) {
        return Err(Error::Convergence(format!("|q| ≥ 1 for τ={tau}")));
    }
    let term = |n: i64| -> C {
        let nc = n as f64 + c;
        let e = C::i() * PI * tau * (nc * nc) + C::i() * 2.0 * nc * z;
        let t = e.exp();
        if alternating && n.rem_euclid(2) == 1 {
            -t
        } else {
            t
        }
    };
    // start from the dominant index, which is near n ≈ -Im z/(π Im τ)
    let n0 = (-(z.im) / (PI * tau.im) - c).round() as i64;
    let mut sum = term(n0);
    let mut maxabs = sum.norm();
    let mut k = 1;
    let mut up_done = false;
    let mut down_done = false;
    while !(up_done && down_done) {
        if k > MAX_THETA_TERMS {
            return Err(Error::Convergence("theta series did not converge".into()));
        }
        if !up_done {
            let t = term(n0 + k);
            maxabs = maxabs.max(t.norm());
            sum += t;
            up_done = t.norm() < cutoff * maxabs && k > 2;
        }
        if !down_done {
            let t = term(n0 - k);
            maxabs = maxabs.max(t.norm());
            sum += t;
            down_done = t.norm() < cutoff * maxabs && k > 2;
        }
        k += 1;
    }
    Ok(sum)
}

/// Θ(w) = Σ exp(2πinw + πin²τ).
pub fn theta_big(w: C, p: &ThetaParams) -> Result<C> {
    theta_sum(PI * w, p.tau, 0.0, false, p.truncation)
}

pub fn theta1(z: C, tau: C) -> Result<C> {
    Ok(-C::i() * theta_sum(z, tau, 0.5, true, 1e-17)?)
}
pub fn theta2(z: C, tau: C) -> Result<C> {
    theta_sum(z, tau, 0.5, false, 1e-17)
}
pub fn theta3(z: C, tau: C) -> Result<C> {
    theta_sum(z, tau, 0.0, false, 1e-17)
}
pub fn theta4(z: C, tau: C) -> Result<C> {
    theta_sum(z, tau, 0.0, true, 1e-17)
}

const BERNOULLI_OVER: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// Analytic log-gamma on the plane cut along the non-positive real axis:
/// upward recurrence to |z| ≥ 16, then Stirling's series. The recurrence uses
/// principal logarithms, which stay continuous off the negative real axis.
pub fn ln_gamma(z: C) -> Result<C> {
    if z.im == 0.0 && z.re <= 0.0 {
        return Err(domain!("log-gamma evaluated on the cut at z={z}"));
    }
    if z.re < -1e4 {
        return Err(domain!("log-gamma argument too far left: {z}"));
    }
    let mut shift = C::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 16.0 {
        shift += w.ln();
        w += 1.0;
    }
    let w2 = (w * w).inv();
    let mut series = C::new(0.0, 0.0);
    let mut p = w.inv();
    for b in BERNOULLI_OVER {
        series += p * b;
        p *= w2;
    }
    Ok((w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift)
}

/// arg Γ(−iν) on the branch continuous in ν with limit π/2 as ν → 0⁺.
pub fn arg_gamma_neg_inu(nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(domain!("arg Γ(−iν) requires ν > 0, got {nu}"));
    }
    Ok(ln_gamma(C::new(0.0, -nu))?.im)
}

/// ν(ρ) = −ln(1 − |ρ|²)/(2π).
pub fn nu_of_rho(rho: C) -> Result<f64> {
    let r2 = rho.norm_sqr();
    if !(r2 < 1.0) {
        return Err(domain!("|ρ| ≥ 1"));
    }
    Ok(-(-r2).ln_1p() / (2.0 * PI))
}

/// β(ρ) = √(2π) e^{iπ/4} e^{−πν/2} / (ρ Γ(−iν)).
pub fn beta_pc(rho: C, nu: f64) -> Result<C> {
    if rho.norm() == 0.0 {
        return Err(domain!("β(ρ) undefined at ρ=0"));
    }
    if !(rho.norm() < 1.0) {
        return Err(domain!("β(ρ) requires |ρ| < 1"));
    }
    let lg = ln_gamma(C::new(0.0, -nu))?;
    let e = C::new(0.5 * (2.0 * PI).ln() - 0.5 * PI * nu, FRAC_PI_4) - lg;
    Ok(e.exp() / rho)
}
