//! Special functions and quadrature primitives for the analytical pipeline.

mod quadrature;

pub use quadrature::{bisect, Quadrature};

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const CF_MAX_ITER: usize = 500;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// Upper incomplete beta function `∫_x^1 t^(a-1) (1-t)^(b-1) dt`.
///
/// Requires `0 <= x <= 1`, `a > 0` and `b > 0`. Evaluated through the
/// continued fraction of the regularized incomplete beta, switching to the
/// reflected fraction on the upper half so that neither branch subtracts
/// nearly equal numbers.
pub fn upper_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("incomplete beta: x = {x} outside [0, 1]")));
    }
    if !(a > 0.0) || !(b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!(
            "incomplete beta: shape parameters must be positive, got a = {a}, b = {b}"
        )));
    }
    Ok(upper_beta_split(x, 1.0 - x, a, b))
}

/// Same as [`upper_incomplete_beta`] with the complement `y = 1 - x`
/// supplied separately, so that lower limits very close to one keep their
/// relative accuracy. Callers guarantee the domain.
pub(crate) fn upper_beta_split(x: f64, y: f64, a: f64, b: f64) -> f64 {
    BetaKernel::new(a, b).upper(x, y)
}

/// Upper incomplete beta with fixed shape parameters and a cached complete
/// beta value, for repeated evaluation at many lower limits.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BetaKernel {
    a: f64,
    b: f64,
    complete: f64,
    boundary: f64,
}

impl BetaKernel {
    pub(crate) fn new(a: f64, b: f64) -> Self {
        debug_assert!(a > 0.0 && b > 0.0);
        Self {
            a,
            b,
            complete: ln_beta(a, b).exp(),
            boundary: (a + 1.0) / (a + b + 2.0),
        }
    }

    /// `∫_x^1 t^(a-1) (1-t)^(b-1) dt` with `y = 1 - x` given separately.
    pub(crate) fn upper(&self, x: f64, y: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        if y <= 0.0 {
            return 0.0;
        }
        if x <= 0.0 {
            return self.complete;
        }
        let ln_x = if x > 0.5 { (-y).ln_1p() } else { x.ln() };
        let ln_y = if y > 0.5 { (-x).ln_1p() } else { y.ln() };
        let ln_front = a * ln_x + b * ln_y;
        if x < self.boundary {
            self.complete - (ln_front - a.ln()).exp() * beta_cf(a, b, x)
        } else {
            (ln_front - b.ln()).exp() * beta_cf(b, a, y)
        }
    }
}

fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    h
}

/// Chebyshev nodes `cos((2n-1)π/(2N))`, `n = 1..=N`, in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebNodes {
    pub n: usize,
    pub nodes: Vec<f64>,
}

/// Weights paired with [`ChebNodes`] for integrating a smooth function over
/// `[-1, 1]` without a weight function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngularRule {
    /// Fejér's first rule. Exact for polynomials of degree `< N` and
    /// spectrally convergent for smooth integrands.
    #[default]
    Fejer,
    /// Chebyshev–Gauss weights `(π/N)·sqrt(1 - θ_n²)` obtained by writing the
    /// integrand as `f(t)·sqrt(1-t²) / sqrt(1-t²)`. Converges as `O(N⁻²)`.
    ChebyshevGauss,
}

pub fn cheb_nodes(n: usize) -> ChebNodes {
    assert!(n >= 1, "Chebyshev node count must be positive");
    let nodes = (1..=n)
        .map(|k| ((2 * k - 1) as f64 * PI / (2 * n) as f64).cos())
        .collect();
    ChebNodes { n, nodes }
}

impl ChebNodes {
    fn angle(&self, k: usize) -> f64 {
        (2 * k + 1) as f64 * PI / (2 * self.n) as f64
    }

    /// Weights for `∫_{-1}^{1} f(t) dt ≈ Σ w_k f(θ_k)`.
    pub fn weights(&self, rule: AngularRule) -> Vec<f64> {
        let n = self.n as f64;
        (0..self.n)
            .map(|k| match rule {
                AngularRule::ChebyshevGauss => PI / n * (1.0 - self.nodes[k].powi(2)).max(0.0).sqrt(),
                AngularRule::Fejer => {
                    let phi = self.angle(k);
                    let tail: f64 = (1..=self.n / 2)
                        .map(|j| {
                            let j = j as f64;
                            (2.0 * j * phi).cos() / (4.0 * j * j - 1.0)
                        })
                        .sum();
                    2.0 / n * (1.0 - 2.0 * tail)
                }
            })
            .collect()
    }
}

/// Row `k-1` of Pascal's triangle: `C(k-1, l)` for `l = 0..k`.
pub fn falling_factorial_coeffs(k: usize) -> Vec<u64> {
    assert!(k >= 1, "binomial row index must be positive");
    let mut row = Vec::with_capacity(k);
    let mut c: u64 = 1;
    row.push(c);
    for l in 1..k {
        c = c * (k - l) as u64 / l as u64;
        row.push(c);
    }
    row
}

/// `n!` as a float, exact for `n <= 22`.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Tanh-sinh quadrature used as an independent reference in tests.

    /// Integrates `f` over `(a, b)` with the double-exponential rule. Handles
    /// integrable endpoint singularities; `f` is never evaluated at `a` or `b`.
    pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        tanh_sinh_with_gaps(|x, _, _| f(x), a, b)
    }

    /// Like [`tanh_sinh`], but also hands `f` the distances `x - a` and
    /// `b - x` computed without cancellation, so that singular factors such
    /// as `(b - x)^p` stay accurate right up to the endpoint.
    pub fn tanh_sinh_with_gaps(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64) -> f64 {
        use std::f64::consts::FRAC_PI_2;
        let width = b - a;
        let half = 0.5 * width;
        let mut h = 0.5;
        let mut prev = f64::NAN;
        let mut result = 0.0;
        for _ in 0..12 {
            let kmax = (4.5 / h) as i64;
            let mut sum = 0.0;
            for k in -kmax..=kmax {
                let t = k as f64 * h;
                let u = FRAC_PI_2 * t.sinh();
                let cu = u.cosh();
                let w = FRAC_PI_2 * t.cosh() / (cu * cu);
                let gap = half / (u.abs().exp() * cu);
                let (x, da, db) = if t >= 0.0 {
                    (b - gap, width - gap, gap)
                } else {
                    (a + gap, gap, width - gap)
                };
                if !(gap > 0.0) || !(w > 0.0) {
                    continue;
                }
                sum += w * f(x, da, db);
            }
            result = sum * h * half;
            if (result - prev).abs() <= 1e-14 * result.abs() {
                break;
            }
            prev = result;
            h *= 0.5;
        }
        result
    }
}
