//! Genus-one model problem: Abel map, theta-function solution, and the
//! reconstruction of the periodic wave from it.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::asymptotics::elliptic_profile;
use crate::branch::{quarter_root, sqrt_product};
use crate::error::{domain, Error, Result};
use crate::quad::{adaptive, chebyshev_graded, gauss, graded};
use crate::scattering::Side;
use crate::specfun::{ellip_f_jacobi, ellip_k, theta_big, Modulus, ThetaParams};

type C = Complex64;
pub type Mat2 = [[C; 2]; 2];

const QN: usize = 24;
const QLEVELS: usize = 30;

/// Surface y² = (w²−d̃²)(w²−q̃²) attached to the triple q_l < z_d < q_r.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelSurface {
    pub q_l: f64,
    pub z_d: f64,
    pub q_r: f64,
    pub q_tilde: f64,
    pub d_tilde: f64,
    pub m: Modulus,
    #[serde(rename = "K")]
    pub k: f64,
    pub theta: ThetaParams,
    pub delta2: f64,
}

impl ModelSurface {
    pub fn new(q_l: f64, z_d: f64, q_r: f64) -> Result<Self> {
        if !(q_l >= 0.0 && z_d > q_l && q_r > z_d && q_r.is_finite()) {
            return Err(domain!("model surface needs 0 ≤ q_l < z_d < q_r, got ({q_l}, {z_d}, {q_r})"));
        }
        let qt2 = (q_r - q_l) * (q_r + q_l);
        let dt2 = (z_d - q_l) * (z_d + q_l);
        let m = Modulus::from_squares((q_r - z_d) * (q_r + z_d) / qt2, dt2 / qt2)?;
        let k = ellip_k(&m);
        let theta = ThetaParams::from_modulus(&m)?;
        let delta2 = FRAC_PI_2 * ellip_f_jacobi(q_l / z_d, &m)? / k;
        Ok(ModelSurface {
            q_l,
            z_d,
            q_r,
            q_tilde: qt2.sqrt(),
            d_tilde: dt2.sqrt(),
            m,
            k,
            theta,
            delta2,
        })
    }

    pub fn tau(&self) -> C {
        self.theta.tau
    }

    /// Normalisation c of the holomorphic differential η = c dw/y.
    pub fn c(&self) -> C {
        C::new(0.0, self.q_tilde / (2.0 * self.k))
    }

    fn th(&self, w: C) -> Result<C> {
        theta_big(w, &self.theta)
    }
}

/// ∮_a η and ∮_b η by quadrature along the cuts.
pub fn periods(s: &ModelSurface) -> (C, C) {
    let (qt, dt) = (s.q_tilde, s.d_tilde);
    let c = s.c();
    // a: 2∫_{−d̃}^{−q̃} η₊, y₊ = −i|y| on (−q̃, −d̃)
    let band = chebyshev_graded(
        |u, _| {
            let w = -qt + (qt - dt) * u;
            1.0 / ((qt - w) * (dt - w)).sqrt()
        },
        40,
        0,
        false,
        false,
    );
    let a = -2.0 * c / C::new(0.0, -1.0) * band;
    // b: 2∫_{d̃}^{−d̃} η, y = −|y| on the gap
    let gap = chebyshev_graded(
        |u, _| {
            let w = -dt + 2.0 * dt * u;
            1.0 / ((qt - w) * (qt + w)).sqrt()
        },
        40,
        0,
        false,
        false,
    );
    let b = -2.0 * c / C::new(-1.0, 0.0) * gap;
    (a, b)
}

/// A(∞) along the real axis beyond q̃.
pub fn abel_at_infinity(s: &ModelSurface) -> C {
    let (qt, dt) = (s.q_tilde, s.d_tilde);
    // w = q̃/sin θ
    let v = gauss(
        |th, _, _| {
            let sn = th.sin();
            1.0 / ((qt - dt * sn) * (qt + dt * sn)).sqrt()
        },
        0.0,
        FRAC_PI_2,
        40,
    );
    s.c() * v
}

/// A(w) = ∫_{q̃}^{w} η. Real w inside (−q̃, q̃) needs a side; the path runs
/// q̃ → q̃ ± iq̃ → w in the selected half-plane.
pub fn abel_map(w: C, side: Side, s: &ModelSurface) -> Result<C> {
    let (qt, dt) = (s.q_tilde, s.d_tilde);
    let c = s.c();
    if !(w.re.is_finite() && w.im.is_finite()) {
        return Err(domain!("Abel map at non-finite w"));
    }
    if w.im == 0.0 && w.re >= qt {
        if w.re == qt {
            return Ok(C::new(0.0, 0.0));
        }
        let d = w.re - qt;
        let sd = d.sqrt();
        // w' = q̃ + d u², √(w'−q̃) = u√d
        let v = adaptive(
            |u, _, _| {
                let wp = qt + d * u * u;
                2.0 * sd / ((wp + qt) * (wp - dt) * (wp + dt)).sqrt()
            },
            0.0,
            1.0,
            QN,
            1e-14,
            f64::abs,
        );
        return Ok(c * v);
    }
    let h = if w.im > 0.0 {
        1.0
    } else if w.im < 0.0 {
        -1.0
    } else {
        match side {
            Side::Above => 1.0,
            Side::Below => -1.0,
            Side::Off if w.re < -qt => 1.0,
            Side::Off => {
                return Err(domain!("Abel map at real w={} inside (−q̃, q̃) needs a side", w.re));
            }
        }
    };
    let ih = C::new(0.0, h * qt);
    let p = C::new(qt, 0.0) + ih;
    let root_ih = ih.sqrt();
    // q̃ → p: w' = q̃ + ih u², √(w'−q̃) = u√(ih)
    let seg1: C = adaptive(
        |u, _, _| {
            let wp = C::new(qt, 0.0) + ih * (u * u);
            2.0 * root_ih / ((wp + qt).sqrt() * (wp - dt).sqrt() * (wp + dt).sqrt())
        },
        0.0,
        1.0,
        QN,
        1e-14,
        |z: C| z.norm(),
    );
    // p → w: w' = w + (p − w)v², traversed from v = 1 to v = 0
    let dpw = p - w;
    let err = std::cell::RefCell::new(None);
    let seg2: C = adaptive(
        |v, _, _| {
            if v == 0.0 {
                return C::new(0.0, 0.0);
            }
            let wp = w + dpw * (v * v);
            match sqrt_product(wp, Side::Off, &[dt, qt]) {
                Ok(y) => -2.0 * dpw * v / y,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    C::new(0.0, 0.0)
                }
            }
        },
        0.0,
        1.0,
        QN,
        1e-14,
        |z: C| z.norm(),
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(c * (seg1 + seg2))
}

/// α(w) = ((w−q̃)(w+d̃)/((w−d̃)(w+q̃)))^{1/4} as a product of principal roots.
pub fn alpha_fn(w: C, side: Side, s: &ModelSurface) -> Result<C> {
    let (qt, dt) = (s.q_tilde, s.d_tilde);
    Ok(quarter_root(w, qt, side)? * quarter_root(w, -dt, side)?
        / (quarter_root(w, dt, side)? * quarter_root(w, -qt, side)?))
}

/// Theta-function solution N(w) for the phase δ̃.
pub fn model_n(w: C, side: Side, delta_tilde: f64, s: &ModelSurface) -> Result<Mat2> {
    let a = abel_map(w, side, s)?;
    let al = alpha_fn(w, side, s)?;
    model_n_from(a, al, delta_tilde, s)
}

fn model_n_from(a: C, al: C, delta_tilde: f64, s: &ModelSurface) -> Result<Mat2> {
    let tau4 = 0.25 * s.tau();
    let dp = C::new(delta_tilde / PI, 0.0);
    let den = s.th(dp)?;
    if den.norm() < 1e-300 {
        return Err(Error::Singular("Θ(δ̃/π) vanishes".into()));
    }
    let pre = s.th(C::new(0.0, 0.0))? / (2.0 * den);
    let sum = al + al.inv();
    let dif = al - al.inv();
    let e = C::from_polar(1.0, delta_tilde);
    let i = C::i();
    let q = |num: C, den: C| -> Result<C> { Ok(s.th(num)? / s.th(den)?) };
    Ok([
        [
            pre * sum * q(a - dp - tau4, a - tau4)?,
            pre * i * dif * q(-a - dp - tau4, -a - tau4)? * e,
        ],
        [
            -pre * i * dif * q(a - dp + tau4, a + tau4)? / e,
            pre * sum * q(-a - dp + tau4, -a + tau4)?,
        ],
    ])
}

/// N at w = ∞, from A(∞) and α(∞) = 1.
pub fn model_n_at_infinity(delta_tilde: f64, s: &ModelSurface) -> Result<Mat2> {
    model_n_from(abel_at_infinity(s), C::new(1.0, 0.0), delta_tilde, s)
}

/// T₁ = 2i lim_{w→∞} w N₁₂(w).
pub fn t1_constant(delta_tilde: f64, s: &ModelSurface) -> Result<C> {
    let dp = C::new(delta_tilde / PI, 0.0);
    let tau2 = 0.5 * s.tau();
    let z = C::new(0.0, 0.0);
    Ok((s.q_tilde - s.d_tilde) * s.th(z)? * s.th(-dp - tau2)? / (s.th(dp)? * s.th(-tau2)?)
        * C::from_polar(1.0, delta_tilde))
}

/// σ = −(iq_l/2)(N₁₁ − N₂₁)/(N₁₁ + N₂₁) at w = iq_l.
pub fn sigma_constant(delta_tilde: f64, s: &ModelSurface) -> Result<C> {
    if s.q_l == 0.0 {
        return Ok(C::new(0.0, 0.0));
    }
    let w = C::new(0.0, s.q_l);
    let n = model_n(w, Side::Off, delta_tilde, s)?;
    let den = n[0][0] + n[1][0];
    if den.norm() == 0.0 {
        return Err(Error::Singular("σ denominator vanishes".into()));
    }
    Ok(-C::new(0.0, 0.5 * s.q_l) * (n[0][0] - n[1][0]) / den)
}

/// Theta-route reconstruction of the periodic wave at model phase δ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaRoute {
    pub delta: f64,
    pub delta_tilde: f64,
    #[serde(serialize_with = "crate::specfun::ser_complex")]
    pub t1: C,
    #[serde(serialize_with = "crate::specfun::ser_complex")]
    pub sigma: C,
    /// T₁ + 2iσ; real up to rounding.
    #[serde(serialize_with = "crate::specfun::ser_complex")]
    pub value: C,
}

pub fn reconstruct_theta_route(delta: f64, s: &ModelSurface) -> Result<ThetaRoute> {
    let dt = delta + s.delta2;
    let t1 = t1_constant(dt, s)?;
    let sigma = sigma_constant(dt, s)?;
    Ok(ThetaRoute { delta, delta_tilde: dt, t1, sigma, value: t1 + 2.0 * C::i() * sigma })
}

/// Elliptic profile at u = Kδ/π.
pub fn elliptic_in_delta(delta: f64, s: &ModelSurface) -> f64 {
    elliptic_profile(s.k * delta / PI, s.q_l, s.z_d, s.q_r, &s.m)
}

/// γ(z) = (z²/(z²−q_l²))^{1/4}, principal.
pub fn gamma_fn(z: C, q_l: f64) -> C {
    let z2 = z * z;
    (z2 / (z2 - q_l * q_l)).powf(0.25)
}

fn r_d(z: C, s: &ModelSurface) -> Result<C> {
    sqrt_product(z, Side::Off, &[s.q_l, s.z_d, s.q_r])
}

/// Scalar function D_u(z) for z off the real axis.
pub fn d_u(z: C, s: &ModelSurface) -> Result<C> {
    if z.im == 0.0 {
        return Err(domain!("D_u evaluated on the real axis"));
    }
    let (ql, zd, qr) = (s.q_l, s.z_d, s.q_r);
    let rz = r_d(z, s)?;
    // continuation of R_{d+} into the lower half-plane near (−q_l, q_l)
    let rc = if z.im > 0.0 { rz } else { -rz };
    let rplus = |x: f64| sqrt_product(C::new(x, 0.0), Side::Above, &[ql, zd, qr]);
    let err = std::cell::RefCell::new(None);
    let capture = |r: Result<C>| match r {
        Ok(v) => v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            C::new(1.0, 0.0)
        }
    };
    let mut total = C::new(0.0, 0.0);
    // (0, q_l) and (−q_l, 0) via s = ±q_l(1 − v²), with the Cauchy kernel subtracted
    if ql > 0.0 {
        for (sign, weight) in [(1.0, -FRAC_PI_2), (-1.0, FRAC_PI_2)] {
            let diff: C = graded(
                |v, _, _| {
                    let x = sign * ql * (1.0 - v) * (1.0 + v);
                    let r = capture(rplus(x));
                    (1.0 / r - 1.0 / rc) / (x - z) * (2.0 * ql * v)
                },
                0.0,
                1.0,
                QN,
                QLEVELS,
                false,
                true,
            );
            let (a, b) = if sign > 0.0 { (0.0, ql) } else { (-ql, 0.0) };
            let cauchy = ((C::new(b, 0.0) - z) / (C::new(a, 0.0) - z)).ln() / rc;
            total += C::new(0.0, weight) * (diff + cauchy);
        }
    }
    // bands (z_d, q_r) with −iδ₂ and (−q_r, −z_d) with +iδ₂
    for (sign, weight) in [(1.0, -s.delta2), (-1.0, s.delta2)] {
        let band: C = chebyshev_graded(
            |u, v| {
                let x = sign * (zd + (qr - zd) * u);
                let r = capture(rplus(x));
                (u * v).sqrt() * (qr - zd) / (r * (x - z))
            },
            QN * 2,
            0,
            false,
            false,
        );
        total += C::new(0.0, weight) * band;
    }
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok((rz / (2.0 * PI * C::i()) * total).exp())
}

/// N⁽³⁾(z) = (I + (σ/z)[[1,1],[−1,−1]]) N⁽¹⁾(z) diag(D_u⁻¹, D_u), for z off the real axis.
pub fn n3(z: C, delta: f64, s: &ModelSurface) -> Result<(Mat2, Mat2)> {
    let dt = delta + s.delta2;
    let w = (z - s.q_l).sqrt() * (z + s.q_l).sqrt();
    let n = model_n(w, Side::Off, dt, s)?;
    let g = gamma_fn(z, s.q_l);
    let (gp, gm) = (0.5 * (g + g.inv()), 0.5 * (g - g.inv()));
    let n1 = mat_mul(&[[gp, gm], [gm, gp]], &n);
    let du = d_u(z, s)?;
    let n2 = [[n1[0][0] / du, n1[0][1] * du], [n1[1][0] / du, n1[1][1] * du]];
    let sg = sigma_constant(dt, s)? / z;
    let one = C::new(1.0, 0.0);
    let n3 = mat_mul(&[[one + sg, sg], [-sg, one - sg]], &n2);
    Ok((n2, n3))
}

pub fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut r = [[C::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn det(a: &Mat2) -> C {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Constants of the Landen-type identities relating the model to the profile.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LandenConstants {
    pub k1: f64,
    pub k2: f64,
    pub m_prime: f64,
    pub m_tilde: f64,
    /// Residuals of the three identities in their corrected form.
    pub residuals: [f64; 3],
    /// Residuals of the first two identities in the misprinted form.
    pub printed_residuals: [f64; 2],
}

pub fn landen_constants(s: &ModelSurface) -> LandenConstants {
    let (ql, zd, qr) = (s.q_l, s.z_d, s.q_r);
    let (qt, dt) = (s.q_tilde, s.d_tilde);
    let mp = s.m.m_prime;
    let mt = s.m.m_tilde;
    let den = qt * zd + dt * qr;
    let k1 = ql * (qt + dt) / den;
    let k2 = qt * (zd + dt) / (dt * (qr + qt)) - 2.0 * ql * ql * qt * qt / (dt * (qt + qr) * den)
        + qt * ql * ql * (zd - dt) * (qt * qt - dt * dt) / (dt * (qt + qr) * den * den);
    let d = 1.0 - mt * mt * k1 * k1;
    let residuals = [
        (qr - zd).powi(2) * d - qt * qt * mt * mt * (1.0 + mp).powi(2) * (1.0 - k1 * k1),
        qt * (qt - dt) * (1.0 - mt * mt) * (1.0 + mp) * k1 - 2.0 * ql * (qr - zd) * d,
        (qt - dt) * k2 - (qr - zd) * d,
    ];
    let printed_residuals = [
        (qr - zd) * d - qt * qt * mt * mt * (1.0 + mp).powi(2) * (1.0 - k1 * k1),
        qt * (qt - dt) * mt * mt * (1.0 + mp).powi(2) * k1 - 2.0 * ql * (qr - zd) * d,
    ];
    LandenConstants { k1, k2, m_prime: mp, m_tilde: mt, residuals, printed_residuals }
}
