//! Radicals built from principal square roots, with boundary values on their cuts.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scattering::Side;

type C = Complex64;

/// Π_a √(z−a)√(z+a) over `roots`, each factor on the principal branch.
/// The product behaves like z^{len} at infinity, is odd/even like z^{len}, and
/// has cuts on the intervals where an odd number of factors is imaginary.
/// For real z on a cut, `side` selects the boundary value.
pub fn sqrt_product(z: C, side: Side, roots: &[f64]) -> Result<C> {
    if z.im != 0.0 {
        let mut p = C::new(1.0, 0.0);
        for &a in roots {
            p *= (z - a).sqrt() * (z + a).sqrt();
        }
        return Ok(p);
    }
    let x = z.re;
    let mut modulus = 1.0;
    let mut n_imag = 0u32;
    for &a in roots {
        for d in [x - a, x + a] {
            if d == 0.0 {
                return Err(Error::Singular(format!("radical evaluated at branch point {x}")));
            }
            if d < 0.0 {
                n_imag += 1;
            }
            modulus *= d.abs().sqrt();
        }
    }
    let unit = match side {
        Side::Above | Side::Off => C::i(),
        Side::Below => -C::i(),
    };
    if side == Side::Off && n_imag % 2 == 1 {
        return Err(Error::Domain(format!("radical evaluated on its cut at {x} without a side")));
    }
    Ok(unit.powu(n_imag) * modulus)
}

/// Principal fourth root of (z−a) for real `a`, with boundary values for real z < a.
pub fn quarter_root(z: C, a: f64, side: Side) -> Result<C> {
    if z.im != 0.0 {
        return Ok((z - a).powf(0.25));
    }
    let d = z.re - a;
    if d > 0.0 {
        return Ok(C::new(d.powf(0.25), 0.0));
    }
    if d == 0.0 {
        return Err(Error::Singular(format!("fourth root at its branch point {a}")));
    }
    let r = (-d).powf(0.25);
    match side {
        Side::Above => Ok(C::from_polar(r, std::f64::consts::FRAC_PI_4)),
        Side::Below => Ok(C::from_polar(r, -std::f64::consts::FRAC_PI_4)),
        Side::Off => Err(Error::Domain(format!("fourth root on its cut at {}", z.re))),
    }
}
