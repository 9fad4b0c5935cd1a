use dswlab_core::asymptotics::{dsw_params, dsw_wave, elliptic_profile};
use dswlab_core::rh_model::{abel_map, landen_constants, ModelSurface};
use dswlab_core::scattering::{beta_branch, scattering_abr, Side, SpectralValue, StepData};
use dswlab_core::specfun::{jacobi_sn_cn_dn, theta_big, Modulus, ThetaParams};
use dswlab_core::whitham::{solve_zd, v1};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn step_strategy() -> impl Strategy<Value = (f64, f64)> {
    (0.0f64..1.0, 0.05f64..1.0).prop_map(|(ql, gap)| (ql, ql + gap))
}

fn triple_strategy() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.01f64..1.0, 0.02f64..1.0, 0.02f64..1.0).prop_map(|(a, b, c)| (a, a + b, a + b + c))
}

fn off_axis() -> impl Strategy<Value = C> {
    (-3.0f64..3.0, 0.01f64..3.0, any::<bool>()).prop_map(|(x, y, up)| C::new(x, if up { y } else { -y }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn jacobi_identities(u in -20.0f64..20.0, m in 0.0f64..0.999) {
        let md = Modulus::new(m).unwrap();
        let (sn, cn, dn) = jacobi_sn_cn_dn(u, &md);
        prop_assert!((sn * sn + cn * cn - 1.0).abs() < 1e-13);
        prop_assert!((dn * dn + m * m * sn * sn - 1.0).abs() < 1e-13);
    }

    #[test]
    fn theta_quasi_periodicity(x in -2.0f64..2.0, y in -0.5f64..0.5, t in 0.3f64..3.0) {
        let p = ThetaParams::new(C::new(0.0, t)).unwrap();
        let w = C::new(x, y * t);
        let v = theta_big(w, &p).unwrap();
        let shifted = theta_big(w + p.tau, &p).unwrap();
        let factor = (-C::i() * std::f64::consts::PI * (p.tau + 2.0 * w)).exp();
        prop_assert!((shifted - factor * v).norm() <= 1e-11 * (factor * v).norm().max(1.0));
        prop_assert!((theta_big(w + 1.0, &p).unwrap() - v).norm() <= 1e-12 * v.norm().max(1.0));
    }

    #[test]
    fn beta_schwarz_reflection(z in off_axis(), q in 0.01f64..2.0) {
        let b = beta_branch(SpectralValue::off(z), q).unwrap();
        let r = beta_branch(SpectralValue::off(-z.conj()), q).unwrap();
        prop_assert!((r * b.conj() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn scattering_determinant(z in off_axis(), (ql, qr) in step_strategy()) {
        let s = StepData::new(ql, qr).unwrap();
        let (a, b, _) = scattering_abr(SpectralValue::off(z), &s).unwrap();
        prop_assert!((a * a + b * b - 1.0).norm() < 1e-12);
    }

    #[test]
    fn reflection_bounded_off_bands(x in 0.0f64..5.0, (ql, qr) in step_strategy()) {
        let s = StepData::new(ql, qr).unwrap();
        let u = qr + 1e-6 + x;
        let (_, _, r) = scattering_abr(SpectralValue::off(C::new(u, 0.0)), &s).unwrap();
        prop_assert!(r.norm() < 1.0);
    }

    #[test]
    fn whitham_velocity_between_edges(f in 0.01f64..0.99, (ql, qr) in step_strategy()) {
        let z2 = ql + f * (qr - ql);
        prop_assume!(ql > 1e-3);
        let v = v1(ql, z2, qr).unwrap();
        let lo = 6.0 * ql * ql - 12.0 * qr * qr;
        let hi = -4.0 * ql * ql - 2.0 * qr * qr;
        prop_assert!(v > lo - 1e-9 && v < hi + 1e-9, "{v} not in ({lo}, {hi})");
    }

    #[test]
    fn soft_edge_monotone(f in 0.02f64..0.97, (ql, qr) in step_strategy()) {
        let s = StepData::new(ql, qr).unwrap();
        let xi = s.xi_left + f * (s.xi_right - s.xi_left);
        let h = 0.01 * (s.xi_right - s.xi_left);
        let a = solve_zd(xi, &s).unwrap();
        let b = solve_zd(xi + h, &s).unwrap();
        prop_assert!(a > ql && a < qr && b < a);
    }

    #[test]
    fn dsw_within_envelope(f in 0.01f64..0.99, t in 1.0f64..40.0, shift in -3.0f64..3.0) {
        let s = StepData::new(0.2, 0.8).unwrap();
        let xi = s.xi_left + f * (s.xi_right - s.xi_left);
        let p = dsw_params(xi, &s).unwrap();
        let q = dsw_wave(12.0 * xi * t + shift, t, &p, &s);
        prop_assert!(q >= 0.2 + p.z_d - 0.8 - 1e-13 && q <= 0.2 - p.z_d + 0.8 + 1e-13);
    }

    #[test]
    fn elliptic_profile_even_in_phase(u in -10.0f64..10.0, (z1, z2, z3) in triple_strategy()) {
        let m = dswlab_core::whitham::genus_one_modulus(z1, z2, z3).unwrap();
        let a = elliptic_profile(u, z1, z2, z3, &m);
        let b = elliptic_profile(-u, z1, z2, z3, &m);
        prop_assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn landen_identities_random((ql, zd, qr) in triple_strategy()) {
        let c = landen_constants(&ModelSurface::new(ql, zd, qr).unwrap());
        for r in c.residuals {
            prop_assert!(r.abs() <= 1e-10);
        }
    }

    #[test]
    fn abel_jump_on_right_band(f in 0.05f64..0.95, (ql, zd, qr) in triple_strategy()) {
        let s = ModelSurface::new(ql, zd, qr).unwrap();
        let x = C::new(s.d_tilde + f * (s.q_tilde - s.d_tilde), 0.0);
        let p = abel_map(x, Side::Above, &s).unwrap();
        let m = abel_map(x, Side::Below, &s).unwrap();
        prop_assert!((p + m).norm() < 1e-9);
    }
}
