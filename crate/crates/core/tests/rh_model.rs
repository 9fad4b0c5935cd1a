mod common;

use common::{rng, uniform};
use dswlab_core::rh_model::*;
use dswlab_core::scattering::Side;
use dswlab_core::specfun::{ellip_k, Modulus};
use num_complex::Complex64 as C;
use std::f64::consts::PI;

fn surf() -> ModelSurface {
    ModelSurface::new(0.2, 0.5, 0.8).unwrap()
}

fn max_entry(m: &Mat2) -> f64 {
    m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
}

fn close(a: &Mat2, b: &Mat2) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

fn inv(a: &Mat2) -> Mat2 {
    let d = det(a);
    [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
}

#[test]
fn surface_fields() {
    let s = surf();
    assert!((s.q_tilde - 0.6f64.sqrt()).abs() < 1e-15);
    assert!((s.d_tilde - 0.21f64.sqrt()).abs() < 1e-15);
    assert!(0.0 < s.d_tilde && s.d_tilde < s.q_tilde);
    assert!((s.m.m * s.m.m - 0.39 / 0.6).abs() < 1e-12);
    assert!(s.tau().re == 0.0 && s.tau().im > 0.0);
    assert!(ModelSurface::new(0.5, 0.4, 0.8).is_err());
}

#[test]
fn periods_on_random_surfaces() {
    let mut r = rng(41);
    for _ in 0..20 {
        let ql = uniform(&mut r, 0.0, 1.0);
        let zd = ql + uniform(&mut r, 0.05, 1.0);
        let qr = zd + uniform(&mut r, 0.05, 1.0);
        let s = ModelSurface::new(ql, zd, qr).unwrap();
        let (a, b) = periods(&s);
        assert!((a - 1.0).norm() < 1e-9, "a-period {a}");
        assert!(b.re.abs() < 1e-12 && b.im > 0.0);
        assert!((b - s.tau()).norm() < 1e-9);
        // τ = iK′(m̃)/K(m̃) through the Landen step
        let lt = s.m.landen();
        let kt = ellip_k(&lt);
        let ktp = ellip_k(&Modulus::new(lt.m_prime).unwrap());
        assert!((b.im - ktp / kt).abs() < 1e-9);
    }
}

#[test]
fn abel_special_values() {
    let s = surf();
    let tau = s.tau();
    assert!((abel_at_infinity(&s) - tau / 4.0).norm() < 1e-12);
    let far = abel_map(C::new(1e9, 1e9), Side::Off, &s).unwrap();
    assert!((far - tau / 4.0).norm() < 1e-8);
    let zero = abel_map(C::new(0.0, 0.0), Side::Above, &s).unwrap();
    assert!((zero - (-0.5 + tau / 4.0)).norm() < 1e-9);
    let iql = abel_map(C::new(0.0, s.q_l), Side::Off, &s).unwrap();
    assert!((iql - (-0.5 + tau / 4.0 + s.delta2 / PI)).norm() < 1e-8);
    assert_eq!(abel_map(C::new(s.q_tilde, 0.0), Side::Off, &s).unwrap(), C::new(0.0, 0.0));
    assert!(abel_map(C::new(0.1, 0.0), Side::Off, &s).is_err());
}

#[test]
fn abel_jump_relations() {
    let s = surf();
    let tau = s.tau();
    let (qt, dt) = (s.q_tilde, s.d_tilde);
    let both = |x: f64| {
        (
            abel_map(C::new(x, 0.0), Side::Above, &s).unwrap(),
            abel_map(C::new(x, 0.0), Side::Below, &s).unwrap(),
        )
    };
    for i in 1..=20 {
        let f = i as f64 / 21.0;
        let (p, m) = both(dt + (qt - dt) * f);
        assert!((p + m).norm() < 1e-9);
        let (p, m) = both(-qt + (qt - dt) * f);
        assert!((p + m - tau).norm() < 1e-9);
        let (p, m) = both(-dt + 2.0 * dt * f);
        assert!((p - m + 1.0).norm() < 1e-9);
        let (p, m) = both(qt + 2.0 * f);
        assert!((p - m).norm() < 1e-9);
        let (p, m) = both(-qt - 2.0 * f);
        assert!((p - m).norm() < 1e-9);
    }
}

#[test]
fn alpha_jump_and_normalisation() {
    let s = surf();
    for x in [0.5, 0.6, 0.7, -0.5, -0.7] {
        let p = alpha_fn(C::new(x, 0.0), Side::Above, &s).unwrap();
        let m = alpha_fn(C::new(x, 0.0), Side::Below, &s).unwrap();
        assert!((p - C::i() * m).norm() < 1e-12, "x={x}");
    }
    let big = alpha_fn(C::new(1e8, 3e7), Side::Off, &s).unwrap();
    assert!((big - 1.0).norm() < 1e-7);
}

#[test]
fn model_solution_normalisation_and_determinant() {
    let s = surf();
    let id = [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::new(1.0, 0.0)]];
    for dt in [0.0, 0.7, 2.3, 5.0] {
        assert!(close(&model_n_at_infinity(dt, &s).unwrap(), &id) < 1e-12);
        assert!(close(&model_n(C::new(1e9, -2e9), Side::Off, dt, &s).unwrap(), &id) < 1e-8);
    }
    let mut r = rng(42);
    for _ in 0..200 {
        let w = C::new(uniform(&mut r, -1.5, 1.5), uniform(&mut r, -1.0, 1.0));
        let n = model_n(w, Side::Off, uniform(&mut r, 0.0, 2.0 * PI), &s).unwrap();
        assert!((det(&n) - 1.0).norm() < 1e-9, "det at {w}");
    }
}

#[test]
fn model_solution_jumps() {
    let s = surf();
    let dtl = 1.1;
    let e = C::from_polar(1.0, dtl);
    let z = C::new(0.0, 0.0);
    let right = [[z, -e], [e.inv(), z]];
    let left = [[z, -e.inv()], [e, z]];
    for i in 1..10 {
        let f = i as f64 / 10.0;
        for (x, want) in [(s.d_tilde + (s.q_tilde - s.d_tilde) * f, right), (-s.q_tilde + (s.q_tilde - s.d_tilde) * f, left)] {
            let p = model_n(C::new(x, 0.0), Side::Above, dtl, &s).unwrap();
            let m = model_n(C::new(x, 0.0), Side::Below, dtl, &s).unwrap();
            let j = mat_mul(&inv(&m), &p);
            assert!(close(&j, &want) < 1e-8, "x={x}: {j:?}");
        }
    }
    // no jump across the gap
    let p = model_n(C::new(0.1, 0.0), Side::Above, dtl, &s).unwrap();
    let m = model_n(C::new(0.1, 0.0), Side::Below, dtl, &s).unwrap();
    assert!(close(&p, &m) < 1e-9);
}

#[test]
fn model_solution_symmetries() {
    let s = surf();
    let mut r = rng(43);
    for _ in 0..50 {
        let w = C::new(uniform(&mut r, -1.5, 1.5), uniform(&mut r, 0.05, 1.0));
        let n = model_n(w, Side::Off, 0.0, &s).unwrap();
        let nm = model_n(-w, Side::Off, 0.0, &s).unwrap();
        let flipped = [[n[0][0], -n[0][1]], [-n[1][0], n[1][1]]];
        assert!(close(&nm, &flipped) < 1e-10);
        let nc = model_n(-w.conj(), Side::Off, 0.0, &s).unwrap();
        let conj = [[n[0][0].conj(), n[0][1].conj()], [n[1][0].conj(), n[1][1].conj()]];
        assert!(close(&nc, &conj) < 1e-10);
    }
}

#[test]
fn theta_route_equals_elliptic_profile() {
    let s = surf();
    let r0 = reconstruct_theta_route(0.0, &s).unwrap();
    assert!((r0.value.re - (0.2 - 0.5 + 0.8)).abs() < 1e-8);
    let trough = reconstruct_theta_route(PI, &s).unwrap();
    assert!((trough.value.re - (0.2 + 0.5 - 0.8)).abs() < 1e-8);
    let mut r = rng(44);
    for _ in 0..100 {
        let d = uniform(&mut r, 0.0, 2.0 * PI);
        let route = reconstruct_theta_route(d, &s).unwrap();
        assert!((route.value.re - elliptic_in_delta(d, &s)).abs() <= 1e-8, "δ={d}");
        assert!(route.value.im.abs() <= 1e-8);
        assert!((route.delta_tilde - d - s.delta2).abs() < 1e-15);
    }
}

#[test]
fn theta_route_without_left_background() {
    let s = ModelSurface::new(0.0, 0.3, 0.5).unwrap();
    assert_eq!(s.delta2, 0.0);
    for d in [0.0, 0.4, 1.9, 3.3, 5.5] {
        let route = reconstruct_theta_route(d, &s).unwrap();
        assert_eq!(route.sigma, C::new(0.0, 0.0));
        // reduced genus-one profile: z_d − q_r + 2(q_r − z_d)q_r cn²/(q_r − (q_r − z_d)sn²)
        let (sn, cn, _) = dswlab_core::specfun::jacobi_sn_cn_dn(s.k * d / PI, &s.m);
        let reduced = 0.3 - 0.5 + 2.0 * 0.2 * 0.5 * cn * cn / (0.5 - 0.2 * sn * sn);
        assert!((route.value.re - reduced).abs() < 1e-8);
    }
}

#[test]
fn pole_at_origin_cancels() {
    let s = surf();
    for delta in [0.0, 0.7, 2.9] {
        for k in 0..8 {
            let th = PI / 8.0 + k as f64 * PI / 4.0;
            let (n2, near) = n3(C::from_polar(1e-6, th), delta, &s).unwrap();
            let (_, far) = n3(C::from_polar(0.1, th), delta, &s).unwrap();
            assert!(max_entry(&near) <= 10.0 * max_entry(&far), "δ={delta} θ={th}");
            assert!(max_entry(&n2) > 1e3 * max_entry(&near));
        }
    }
}

#[test]
fn assembled_solution_reconstructs_profile() {
    let s = surf();
    for delta in [0.3, 2.0] {
        // 2i lim z N⁽³⁾₁₂: Richardson over two radii removes the O(1/z) term
        let dir = C::from_polar(1.0, 0.6);
        let at = |r: f64| {
            let z = dir * r;
            let (_, n) = n3(z, delta, &s).unwrap();
            2.0 * C::i() * z * n[0][1]
        };
        let est = 2.0 * at(2000.0) - at(1000.0);
        assert!((est.re - elliptic_in_delta(delta, &s)).abs() < 1e-5, "δ={delta}: {est}");
        let (_, n) = n3(dir * 1e4, delta, &s).unwrap();
        assert!((n[0][0] - 1.0).norm() < 1e-3 && (n[1][1] - 1.0).norm() < 1e-3);
    }
}

#[test]
fn landen_identities_hold() {
    let c = landen_constants(&surf());
    assert!(c.residuals.iter().all(|r| r.abs() <= 1e-11), "{:?}", c.residuals);
    // the misprinted forms do not hold
    assert!(c.printed_residuals.iter().all(|r| r.abs() > 1e-2));
    // K₁ through sn/dn of F(q_l/z_d, m)
    let s = surf();
    let f = dswlab_core::specfun::ellip_f_jacobi(0.4, &s.m).unwrap();
    let (sn, _, dn) = dswlab_core::specfun::jacobi_sn_cn_dn(f, &s.m);
    assert!((c.k1 - (1.0 + s.m.m_prime) * sn / (1.0 + dn)).abs() < 1e-12);
    let mut r = rng(45);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let ql = uniform(&mut r, 0.01, 1.0);
        let zd = ql + uniform(&mut r, 0.01, 1.0);
        let qr = zd + uniform(&mut r, 0.01, 1.0);
        let c = landen_constants(&ModelSurface::new(ql, zd, qr).unwrap());
        worst = c.residuals.iter().fold(worst, |w, r| w.max(r.abs()));
    }
    assert!(worst <= 1e-10, "{worst}");
    let c = landen_constants(&ModelSurface::new(1e-9, 0.5, 0.8).unwrap());
    assert!(c.k1 < 1e-8 && c.residuals.iter().all(|r| r.abs() < 1e-11));
}
