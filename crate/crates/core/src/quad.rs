//! Quadrature rules.
//!
//! Integrands receive the abscissa together with its distances to both ends of
//! the interval, computed without cancellation. Endpoint-singular integrands
//! (inverse square roots, logarithms) rely on those distances.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul};
use std::sync::{Arc, Mutex, OnceLock};

/// Values that can be accumulated by a quadrature rule.
pub trait Scalar: Copy + Default + Add<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>> Scalar for T {}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Cached rule of order `n`.
pub fn rule(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
        .clone()
}

/// Gauss–Legendre on [a, b]; `f(x, x - a, b - x)`.
pub fn gauss<T: Scalar>(f: impl Fn(f64, f64, f64) -> T, a: f64, b: f64, n: usize) -> T {
    let g = rule(n);
    let h = 0.5 * (b - a);
    let mut acc = T::default();
    for (x, w) in g.nodes.iter().zip(&g.weights) {
        let da = h * (1.0 + x);
        let db = h * (1.0 - x);
        let xx = if *x <= 0.0 { a + da } else { b - db };
        acc = acc + f(xx, da, db) * (w * h);
    }
    acc
}

/// Composite Gauss–Legendre on [a, b] with panels refined geometrically (ratio 1/2)
/// toward the selected endpoints. Absorbs integrable endpoint singularities of
/// logarithmic or power type.
pub fn graded<T: Scalar>(
    f: impl Fn(f64, f64, f64) -> T,
    a: f64,
    b: f64,
    n: usize,
    levels: usize,
    left: bool,
    right: bool,
) -> T {
    let len = b - a;
    let mut acc = T::default();
    // Split point: the graded pieces each take half (or all) of the interval.
    let (left_len, right_len) = match (left, right) {
        (true, true) => (0.5 * len, 0.5 * len),
        (true, false) => (len, 0.0),
        (false, true) => (0.0, len),
        (false, false) => return gauss(f, a, b, n),
    };
    if left {
        // offsets o from a, panels [o_lo, o_hi]
        let mut hi = left_len;
        for k in 0..=levels {
            let lo = if k == levels { 0.0 } else { hi * 0.5 };
            acc = acc
                + gauss(
                    |_, dlo, _| {
                        let o = lo + dlo;
                        f(a + o, o, len - o)
                    },
                    lo,
                    hi,
                    n,
                );
            hi = lo;
        }
    }
    if right {
        let mut hi = right_len;
        for k in 0..=levels {
            let lo = if k == levels { 0.0 } else { hi * 0.5 };
            acc = acc
                + gauss(
                    |_, dlo, _| {
                        let p = lo + dlo;
                        f(b - p, len - p, p)
                    },
                    lo,
                    hi,
                    n,
                );
            hi = lo;
        }
    }
    acc
}

/// Adaptive bisection with `n`-point Gauss panels. A panel is accepted when its
/// two halves agree with it to `tol · len/(b − a)` in `norm`, or to rounding
/// relative to the panel's magnitude. At most `MAX_PANELS` panels are formed.
pub fn adaptive<T: Scalar>(
    f: impl Fn(f64, f64, f64) -> T,
    a: f64,
    b: f64,
    n: usize,
    tol: f64,
    norm: impl Fn(T) -> f64,
) -> T {
    const MAX_PANELS: usize = 4096;
    let len = b - a;
    let panel = |lo: f64, hi: f64| {
        gauss(
            |_, dlo, _| {
                let o = lo + dlo;
                f(a + o, o, len - o)
            },
            lo,
            hi,
            n,
        )
    };
    let mut acc = T::default();
    let mut formed = 1;
    let mut stack = vec![(0.0, len, panel(0.0, len))];
    while let Some((lo, hi, whole)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (l, r) = (panel(lo, mid), panel(mid, hi));
        formed += 2;
        let halves = l + r;
        let diff = norm(halves + whole * -1.0);
        let floor = 64.0 * f64::EPSILON * norm(halves);
        if formed >= MAX_PANELS || diff <= (tol * (hi - lo) / len).max(floor) {
            acc = acc + halves;
        } else {
            stack.push((lo, mid, l));
            stack.push((mid, hi, r));
        }
    }
    acc
}

/// Integral over [0,1] of `g(u, 1-u) / sqrt(u (1-u))`, via u = sin²(θ/2), with
/// grading toward the chosen ends for residual logarithmic singularities.
pub fn chebyshev_graded<T: Scalar>(
    g: impl Fn(f64, f64) -> T,
    n: usize,
    levels: usize,
    left: bool,
    right: bool,
) -> T {
    let h = |_: f64, t0: f64, t1: f64| {
        let u = (0.5 * t0).sin().powi(2);
        let v = (0.5 * t1).sin().powi(2);
        g(u, v)
    };
    if left || right {
        graded(h, 0.0, PI, n, levels, left, right)
    } else {
        // split in a few panels for smoothness
        let mut acc = T::default();
        let p = 4;
        for i in 0..p {
            let lo = PI * i as f64 / p as f64;
            let hi = PI * (i + 1) as f64 / p as f64;
            acc = acc + gauss(|_, d, _| h(0.0, lo + d, PI - lo - d), lo, hi, n);
        }
        acc
    }
}

/// Tanh–sinh quadrature of `f(u, 1-u)` over [0,1]. Iterates until successive
/// levels agree to `tol` (absolute, scaled by the running magnitude).
pub fn tanh_sinh<T, F>(f: F, tol: f64, norm: impl Fn(T) -> f64) -> T
where
    T: Scalar + std::ops::Sub<Output = T>,
    F: Fn(f64, f64) -> T,
{
    let tmax = 5.5;
    let eval = |t: f64| -> T {
        let s = 0.5 * PI * t.sinh();
        let e = (-2.0 * s.abs()).exp();
        let small = e / (1.0 + e);
        let big = 1.0 / (1.0 + e);
        let (u, v) = if s >= 0.0 { (big, small) } else { (small, big) };
        let w = PI * t.cosh() * small * big;
        if w == 0.0 || u == 0.0 || v == 0.0 {
            T::default()
        } else {
            f(u, v) * w
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        let t = k as f64 * h;
        sum = sum + eval(t) + eval(-t);
        k += 1;
    }
    let mut prev = sum * h;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            let t = k as f64 * h;
            sum = sum + eval(t) + eval(-t);
            k += 2;
        }
        let cur = sum * h;
        let diff = norm(cur - prev);
        if diff <= tol * norm(cur).max(1e-300) || diff <= 1e-300 {
            return cur;
        }
        prev = cur;
    }
    prev
}
