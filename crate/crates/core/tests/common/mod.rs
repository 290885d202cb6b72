//! Independent numerical oracles shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use uavcov::SystemParams;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Distance from a user at `r0` to the disc boundary along direction `th`,
/// measured from the direction pointing away from the centre.
fn disc_exit(rc: f64, r0: f64, th: f64) -> f64 {
    (rc * rc - r0 * r0 * th.sin().powi(2)).max(0.0).sqrt() - r0 * th.cos()
}

/// The interference exponent by direct 2-D integration in polar
/// coordinates around the user.
///
/// The region is every point farther than `r1` from the user and outside
/// the disc. The radial integral substitutes `r = lo / v` to map the
/// unbounded range onto `(0, 1]`.
pub fn eta_2d(p: &SystemParams, r0: f64, r1: f64, s: f64) -> f64 {
    let (rc, alpha) = (p.radius_rc, p.alpha_nlos);
    let radial = |th: f64| {
        let lo = r1.max(disc_exit(rc, r0, th));
        let g = |v: f64| {
            if v <= 0.0 {
                return if alpha == 3.0 { s / lo } else { 0.0 };
            }
            let r = lo / v;
            s / (s + r.powf(alpha)) * r * lo / (v * v)
        };
        simpson(&g, 0.0, 1.0, 1e-13 * s.max(1.0))
    };
    // along directions below the split the disc boundary lies beyond r1
    let split = if r0 > 0.0 && r1 < rc + r0 {
        let c = ((r0 * r0 + r1 * r1 - rc * rc) / (2.0 * r0 * r1)).clamp(-1.0, 1.0);
        PI - c.acos()
    } else {
        PI
    };
    let tol = 1e-11;
    let mut q = simpson(&radial, 0.0, split, tol);
    if split < PI {
        q += simpson(&radial, split, PI, tol);
    }
    -p.bs_density * 2.0 * q
}

/// Derivative of order 1..=3 by a fourth-order central stencil.
pub fn central_difference(f: &dyn Fn(f64) -> f64, x: f64, h: f64, order: usize) -> f64 {
    let v = |k: i32| f(x + k as f64 * h);
    match order {
        1 => (-v(2) + 8.0 * v(1) - 8.0 * v(-1) + v(-2)) / (12.0 * h),
        2 => (-v(2) + 16.0 * v(1) - 30.0 * v(0) + 16.0 * v(-1) - v(-2)) / (12.0 * h * h),
        3 => (-v(3) + 8.0 * v(2) - 13.0 * v(1) + 13.0 * v(-1) - 8.0 * v(-2) + v(-3)) / (8.0 * h.powi(3)),
        _ => panic!("unsupported order {order}"),
    }
}

/// `(r0, r1)` pairs covering both geometric cases: the first three have the
/// radius-`r1` circle enclosing the disc, the last three cut through it.
pub const LAPLACE_PAIRS: [(f64, f64); 6] = [
    (0.0, 650.0),
    (200.0, 750.0),
    (450.0, 1200.0),
    (300.0, 400.0),
    (450.0, 80.0),
    (150.0, 500.0),
];

/// SIR-style thresholds turned into `s = r1^α ε` on the grid.
pub const LAPLACE_THRESHOLDS: [f64; 2] = [0.1, 3.0];

/// The twelve `(r0, r1, s)` points of the Laplace checks.
pub fn laplace_grid(p: &SystemParams) -> Vec<(f64, f64, f64)> {
    LAPLACE_PAIRS
        .iter()
        .flat_map(|&(r0, r1)| {
            LAPLACE_THRESHOLDS
                .iter()
                .map(move |&eps| (r0, r1, r1.powf(p.alpha_nlos) * eps))
        })
        .collect()
}
