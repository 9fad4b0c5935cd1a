mod common;

use common::{adaptive_simpson, rng, uniform};
use dswlab_core::branch::sqrt_product;
use dswlab_core::scattering::{Side, SpectralValue, StepData};
use dswlab_core::whitham::*;
use num_complex::Complex64 as C;
use std::f64::consts::PI;

fn step() -> StepData {
    StepData::new(0.2, 0.8).unwrap()
}

fn random_off_axis(r: &mut rand_chacha::ChaCha8Rng, scale: f64) -> C {
    let im = uniform(r, 0.02, 1.0) * scale * if uniform(r, -1.0, 1.0) < 0.0 { -1.0 } else { 1.0 };
    C::new(uniform(r, -1.5, 1.5) * scale, im)
}

#[test]
fn genus_zero_endpoint_and_large_z() {
    let g = GenusZeroG::new(0.2, -1.0).unwrap();
    assert_eq!(g0_eval(&g, SpectralValue::above(0.2)).unwrap(), C::new(0.0, 0.0));
    let z = C::new(1e6, 0.0);
    let v = g0_eval(&g, SpectralValue::off(z)).unwrap();
    let th = theta_phase(-1.0, z);
    assert!((v - th).norm() / th.norm() < 1e-3);
    assert!(GenusZeroG::new(0.2, 1.0).is_err());
}

#[test]
fn genus_zero_stationary_point() {
    let g = GenusZeroG::new(0.2, -1.0).unwrap();
    let h = 1e-5;
    let at = |x: f64| g0_eval(&g, SpectralValue::off(C::new(x, 0.0))).unwrap();
    let fd = (at(g.z0 + h) - at(g.z0 - h)) / (2.0 * h);
    assert!(fd.norm() < 1e-8, "{fd}");
    let d = g.derivative(SpectralValue::off(C::new(g.z0, 0.0))).unwrap();
    assert!(d.norm() < 1e-13);
    // derivative agrees with finite differences elsewhere
    let x = 1.7;
    let fd = (at(x + h) - at(x - h)) / (2.0 * h);
    let d = g.derivative(SpectralValue::off(C::new(x, 0.0))).unwrap();
    assert!((fd - d).norm() < 1e-7 * d.norm());
}

#[test]
fn genus_zero_is_odd_and_matches_theta() {
    let g = GenusZeroG::new(0.3, -0.5).unwrap();
    let mut r = rng(31);
    for _ in 0..500 {
        let z = random_off_axis(&mut r, 1.0);
        let a = g0_eval(&g, SpectralValue::off(z)).unwrap();
        let b = g0_eval(&g, SpectralValue::off(-z)).unwrap();
        assert!((a + b).norm() < 1e-10 * a.norm().max(1.0));
    }
    let mut worst: f64 = 0.0;
    for k in 0..=20 {
        let z = C::from_polar(10f64.powf(2.0 + 2.0 * k as f64 / 20.0), 0.3);
        let d = (g0_eval(&g, SpectralValue::off(z)).unwrap() - theta_phase(-0.5, z)).norm();
        worst = worst.max(d * z.norm());
    }
    assert!(worst < 10.0, "|g0 − θ|·|z| = {worst}");
}

#[test]
fn v0_values() {
    assert_eq!(v0(1.0), -6.0);
    assert_eq!(v0(0.0), 0.0);
    assert!((v0(0.8) + 3.84).abs() < 1e-15);
}

#[test]
fn v1_edge_limits() {
    let a = v1(0.2, 0.2 + 1e-8, 0.8).unwrap();
    assert!((a + 1.44).abs() <= 1e-4, "{a}");
    let b = v1(0.2, 0.8 - 1e-6, 0.8).unwrap();
    assert!((b + 7.44).abs() <= 1e-4, "{b}");
    assert!(v1(0.5, 0.3, 0.8).is_err());
    assert!(v1(0.2, 0.8, 0.8).is_err());
}

#[test]
fn v1_matches_polynomial_form() {
    let mut r = rng(32);
    for _ in 0..300 {
        let z1 = uniform(&mut r, 0.0, 1.0);
        let z3 = z1 + uniform(&mut r, 0.05, 1.0);
        let z2 = z1 + (z3 - z1) * uniform(&mut r, 0.01, 0.99);
        let a = v1(z1, z2, z3).unwrap();
        let b = v1_polynomial(z1, z2, z3).unwrap();
        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "({z1},{z2},{z3}) {a} {b}");
    }
}

#[test]
fn v1_decreasing_in_z2() {
    for z1 in [0.0, 0.1, 0.3] {
        for z3 in [0.5, 0.8, 1.2] {
            let mut prev = f64::INFINITY;
            for i in 1..100 {
                let z2 = z1 + (z3 - z1) * i as f64 / 100.0;
                let v = v1(z1, z2, z3).unwrap();
                assert!(v < prev, "({z1},{z2},{z3})");
                let h = 1e-6 * (z3 - z1);
                assert!(v1(z1, z2 + h, z3).unwrap() - v1(z1, z2 - h, z3).unwrap() < 0.0);
                prev = v;
            }
        }
    }
}

#[test]
fn modulus_squared_convention_is_forced_by_limits() {
    // Reading the ratio as m itself sends the z2 → z3 limit away from 6z1² − 12z3².
    let (z1, z2, z3) = (0.2f64, 0.8 - 1e-6, 0.8f64);
    let ratio = (z3 * z3 - z2 * z2) / (z3 * z3 - z1 * z1);
    let wrong = dswlab_core::specfun::Modulus::new(ratio).unwrap();
    let eok = dswlab_core::specfun::ellip_e(&wrong) / dswlab_core::specfun::ellip_k(&wrong);
    let den = z1 * z1 - z2 * z2 + (z3 * z3 - z1 * z1) * eok;
    let v_wrong = -2.0 * (z1 * z1 + z2 * z2 + z3 * z3) + 4.0 * (z2 * z2 - z1 * z1) * (z2 * z2 - z3 * z3) / den;
    assert!((v_wrong + 7.44).abs() > 1.0, "{v_wrong}");
    assert!((v1(z1, z2, z3).unwrap() + 7.44).abs() < 1e-4);
}

/// ∫_{z_d}^{q_r} 12ζ(ζ²−z_d²)(ζ²−μ²)/|R_d| dζ with ζ² = q_r² − s².
fn soft_edge_oracle(zd: f64, xi: f64) -> f64 {
    let (ql, qr) = (0.2f64, 0.8f64);
    let mu2 = 0.5 * (ql * ql - zd * zd + qr * qr) - xi;
    let smax = ((qr - zd) * (qr + zd)).sqrt();
    adaptive_simpson(
        &|s: f64| {
            let z2 = qr * qr - s * s;
            12.0 * (z2 - zd * zd).max(0.0).sqrt() * (z2 - mu2) / (z2 - ql * ql).sqrt()
        },
        0.0,
        smax,
        1e-13,
    )
}

#[test]
fn zd_matches_band_integral_bisection() {
    let xi = -0.37;
    let (mut lo, mut hi) = (0.2 + 1e-9, 0.8 - 1e-9);
    let flo = soft_edge_oracle(lo, xi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if soft_edge_oracle(mid, xi).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zd = solve_zd(xi, &step()).unwrap();
    assert!((zd - 0.5 * (lo + hi)).abs() < 1e-9, "{zd} vs {}", 0.5 * (lo + hi));
    assert!((zd - 0.56257).abs() < 1e-5);
    assert!(soft_edge_band_integral(0.2, zd, 0.8, xi).abs() < 1e-8);
}

#[test]
fn zd_reference_values_and_residual() {
    let s = step();
    for (xi, want) in [(-0.6, 0.78319), (-0.37, 0.56257), (-0.13, 0.21732)] {
        let zd = solve_zd(xi, &s).unwrap();
        assert!((zd - want).abs() < 1e-5, "ξ={xi}: {zd}");
        assert!((12.0 * xi - v1(0.2, zd, 0.8).unwrap()).abs() <= 1e-12 * xi.abs().max(1.0));
    }
}

#[test]
fn zd_edges_monotone_and_region() {
    let s = step();
    let span = s.xi_right - s.xi_left;
    let near_left = solve_zd(s.xi_left + 1e-6 * span, &s).unwrap();
    let near_right = solve_zd(s.xi_right - 1e-6 * span, &s).unwrap();
    assert!(0.8 - near_left < 1e-2 && near_right - 0.2 < 1e-2, "{near_left} {near_right}");
    let mut prev = f64::INFINITY;
    for i in 1..=50 {
        let xi = s.xi_left + span * i as f64 / 51.0;
        let zd = solve_zd(xi, &s).unwrap();
        assert!(zd < prev && zd > 0.2 && zd < 0.8);
        prev = zd;
    }
    assert!(matches!(solve_zd(s.xi_left, &s), Err(dswlab_core::Error::Region(_))));
    assert!(matches!(solve_zd(0.0, &s), Err(dswlab_core::Error::Region(_))));
}

fn dsw_state(xi: f64) -> GenusTwoG {
    let zd = solve_zd(xi, &step()).unwrap();
    GenusTwoG::new(0.2, zd, 0.8, xi).unwrap()
}

#[test]
fn b_closed_form_and_soft_edge_value() {
    for xi in [-0.6, -0.37, -0.13] {
        let g = dsw_state(xi);
        let (s1, s2, s3) = (g.z1 * g.z1, g.z2 * g.z2, g.z3 * g.z3);
        let m = g.m;
        let eok = dswlab_core::specfun::ellip_e(&m) / dswlab_core::specfun::ellip_k(&m);
        let closed = (s1 * s2 + s2 * s3 + s1 * s3) / 3.0 - (xi + (s1 + s2 + s3) / 6.0) * (s1 + (s3 - s1) * eok);
        assert!((g.b - closed).abs() < 1e-12);
        // at the soft edge the numerator factors as (z² − z2²)(z² − μ²)
        assert!((g.b - s2 * g.mu2).abs() < 1e-10, "ξ={xi}: b={} z2²μ²={}", g.b, s2 * g.mu2);
        assert!(g.m.m >= 0.0 && g.m.m < 1.0);
    }
}

#[test]
fn genus_two_base_point_and_band_sign() {
    let g = dsw_state(-0.37);
    assert_eq!(g1_eval(&g, SpectralValue::above(0.2)).unwrap(), C::new(0.0, 0.0));
    for i in 1..20 {
        let x = g.z2 + (g.z3 - g.z2) * i as f64 / 20.0;
        let v = g1_eval(&g, SpectralValue::above(x)).unwrap();
        assert!(v.im > 0.0, "Im g₊({x}) = {}", v.im);
        let vm = g1_eval(&g, SpectralValue::above(-x)).unwrap();
        assert!(vm.im > 0.0, "Im g₊({}) = {}", -x, vm.im);
    }
}

#[test]
fn genus_two_jumps_on_central_cut() {
    let g = dsw_state(-0.37);
    for x in [-0.15, -0.05, 0.05, 0.15] {
        let p = g1_eval(&g, SpectralValue::above(x)).unwrap();
        let m = g1_eval(&g, SpectralValue::below(x)).unwrap();
        assert!((p + m).norm() < 1e-10, "x={x}: {}", p + m);
    }
    // across the gap (z1, z2) the jump is constant
    let jump = |x: f64| g1_eval(&g, SpectralValue::above(x)).unwrap() - g1_eval(&g, SpectralValue::below(x)).unwrap();
    let j0 = jump(0.3);
    for x in [0.25, 0.35, 0.45, 0.55] {
        assert!((jump(x) - j0).norm() < 1e-10);
    }
    // sum of boundary values is constant along the outer band
    let sum = |x: f64| g1_eval(&g, SpectralValue::above(x)).unwrap() + g1_eval(&g, SpectralValue::below(x)).unwrap();
    let s0 = sum(0.65);
    for x in [0.6, 0.7, 0.75] {
        assert!((sum(x) - s0).norm() < 1e-10);
    }
}

#[test]
fn genus_two_is_odd() {
    let g = dsw_state(-0.37);
    let mut r = rng(33);
    for _ in 0..500 {
        let z = random_off_axis(&mut r, 1.0);
        let a = g1_eval(&g, SpectralValue::off(z)).unwrap();
        let b = g1_eval(&g, SpectralValue::off(-z)).unwrap();
        assert!((a + b).norm() < 1e-10 * a.norm().max(1.0), "{z}: {a} {b}");
    }
}

#[test]
fn genus_two_large_z_matching() {
    let g = dsw_state(-0.37);
    // path quadrature and the Laurent tail agree on both sides of the switch radius
    for arg in [0.2, 1.0, 2.5] {
        let (r0, r1) = (3.9 * g.z3, 4.1 * g.z3);
        let dir = C::from_polar(1.0, arg);
        let a = g1_eval(&g, SpectralValue::off(dir * r0)).unwrap();
        let b = g1_eval(&g, SpectralValue::off(dir * r1)).unwrap();
        let part = |f: fn(C) -> f64| {
            adaptive_simpson(&|r: f64| f(g.derivative(SpectralValue::off(dir * r)).unwrap() * dir), r0, r1, 1e-13)
        };
        let integral = C::new(part(|v| v.re), part(|v| v.im));
        assert!((b - a - integral).norm() < 1e-10 * integral.norm(), "{}", (b - a - integral).norm());
    }
    let mut worst: f64 = 0.0;
    for k in 0..=20 {
        let z = C::from_polar(10f64.powf(2.0 + 2.0 * k as f64 / 20.0), 0.7);
        let d = (g1_eval(&g, SpectralValue::off(z)).unwrap() - theta_phase(-0.37, z)).norm();
        worst = worst.max(d * z.norm());
    }
    assert!(worst < 10.0, "{worst}");
}

#[test]
fn radical_expansion_has_no_odd_coefficients() {
    // R₁(z)/z³ = Σ p_j z^{−j}: coefficients by trapezoid rule on |z| = ρ
    let (z1, z2, z3) = (0.2, 0.5, 0.8);
    let rho = 2.0;
    let n = 256;
    for j in 1..12 {
        let mut acc = C::new(0.0, 0.0);
        for k in 0..n {
            let th = 2.0 * PI * (k as f64 + 0.5) / n as f64;
            let z = C::from_polar(rho, th);
            let r = sqrt_product(z, Side::Off, &[z1, z2, z3]).unwrap();
            acc += r / (z * z * z) * z.powi(j);
        }
        let p = acc / n as f64;
        if j % 2 == 1 {
            assert!(p.norm() < 1e-15 * rho.powi(j), "p_{j} = {p}");
        } else {
            assert!(p.norm() > 1e-8, "p_{j} = {p}");
        }
    }
}

#[test]
fn region_labels() {
    let s = step();
    assert_eq!(classify_region(-60.0, 15.0, &s, 1e-6), RegionLabel::Dsw);
    assert_eq!(classify_region(0.0, 3.0, &s, 1e-6), RegionLabel::Rpw);
    assert_eq!(classify_region(-200.0, 15.0, &s, 1e-6), RegionLabel::Lpw);
    assert_eq!(classify_region(12.0 * s.xi_left * 7.0, 7.0, &s, 1e-9), RegionLabel::TransitionL);
    assert_eq!(classify_region(12.0 * s.xi_right * 7.0, 7.0, &s, 1e-9), RegionLabel::TransitionR);
    for l in [RegionLabel::Lpw, RegionLabel::Dsw, RegionLabel::Rpw, RegionLabel::TransitionL, RegionLabel::TransitionR] {
        assert_eq!(l.as_str().parse::<RegionLabel>().unwrap(), l);
    }
    assert!("dsw".parse::<RegionLabel>().is_err());
}
