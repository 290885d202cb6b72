//! Laplace transform of the interference `I₂` collected from every ground
//! station farther than the nearest one, conditioned on the user distance
//! `r0` and the nearest-station distance `r1`.
//!
//! With Rayleigh ground links the transform is `exp(η(s))` where
//! `η(s) = -λ ∬ s / (s + r^α) r dr dθ` over the part of the plane (in polar
//! coordinates around the user) beyond both `r1` and the malfunction disc.
//! Along a direction `θ` the disc ends at distance
//! `z(θ) = sqrt(R_c² - r0² sin²θ) - r0 cos θ`. When the radius-`r1` circle
//! crosses the disc boundary, the directions within the lens half-angle `Θ`
//! of the disc centre have `z(θ) > r1`, and their radial integrals are
//! summed over Chebyshev nodes. Every radial integral reduces to an upper
//! incomplete beta function.
//!
//! Derivatives are handled in the scaled form `ℓ_k(s) = (-s)^k L^(k)(s) / k!`
//! (equal to `E[(sI)^k e^{-sI}] / k!`), which is non-negative, bounded by one
//! and satisfies the recursion `ℓ_k = Σ_{l<k} (k-l)/k · e_{k-l} ℓ_l` with
//! `e_t = (-s)^t η^(t)(s) / t!`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::clamped_acos;
use crate::numerics::{cheb_nodes, factorial, AngularRule, BetaKernel, ChebNodes};
use crate::params::SystemParams;

/// Angular quadrature data for the overlapping case.
#[derive(Debug, Clone, PartialEq)]
pub struct LensQuadrature {
    /// Half-angle `Θ` of the directions whose disc boundary lies beyond `r1`.
    pub big_theta: f64,
    pub nodes: ChebNodes,
    /// Directions `c_n = Θ/2 (θ_n - 1) + π`.
    pub abscissae: Vec<f64>,
    /// Boundary distances `z(c_n)`.
    pub radii: Vec<f64>,
    /// Weights on `[-1, 1]` matching `nodes`.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LensCase {
    /// `R_c - r0 < r1 < R_c + r0`.
    Overlap(LensQuadrature),
    /// `r1 >= R_c + r0`: every direction is limited by `r1` alone.
    Outside,
}

/// Frozen `(r0, r1)` evaluation context.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceContext {
    pub r0: f64,
    pub r1: f64,
    pub radius_rc: f64,
    pub bs_density: f64,
    pub alpha_nlos: f64,
    pub case: LensCase,
}

pub fn make_context(params: &SystemParams, r0: f64, r1: f64) -> Result<LaplaceContext> {
    LaplaceContext::new(params, r0, r1)
}

impl LaplaceContext {
    pub fn new(params: &SystemParams, r0: f64, r1: f64) -> Result<Self> {
        Self::with_rule(params, r0, r1, params.quad_n, AngularRule::default())
    }

    pub fn with_rule(
        params: &SystemParams,
        r0: f64,
        r1: f64,
        quad_n: usize,
        rule: AngularRule,
    ) -> Result<Self> {
        let rc = params.radius_rc;
        if !(0.0..=rc).contains(&r0) {
            return Err(Error::domain(format!("r0 = {r0} must lie in [0, {rc}]")));
        }
        if !(r1 > rc - r0) || !(r1 > 0.0) || !r1.is_finite() {
            return Err(Error::domain(format!(
                "nearest-station distance r1 = {r1} must exceed R_c - r0 = {}",
                rc - r0
            )));
        }
        if quad_n == 0 {
            return Err(Error::domain("angular quadrature needs at least one node"));
        }
        let case = if r0 > 0.0 && r1 < rc + r0 {
            let big_theta = clamped_acos((r0 * r0 + r1 * r1 - rc * rc) / (2.0 * r0 * r1));
            let nodes = cheb_nodes(quad_n);
            let weights = nodes.weights(rule);
            let abscissae: Vec<f64> = nodes
                .nodes
                .iter()
                .map(|t| 0.5 * big_theta * (t - 1.0) + PI)
                .collect();
            let radii = abscissae
                .iter()
                .map(|&c| {
                    let sin = c.sin();
                    (rc * rc - r0 * r0 * sin * sin).max(0.0).sqrt() - r0 * c.cos()
                })
                .collect();
            LensCase::Overlap(LensQuadrature {
                big_theta,
                nodes,
                abscissae,
                radii,
                weights,
            })
        } else {
            LensCase::Outside
        };
        Ok(Self {
            r0,
            r1,
            radius_rc: rc,
            bs_density: params.bs_density,
            alpha_nlos: params.alpha_nlos,
            case,
        })
    }

    pub fn big_theta(&self) -> Option<f64> {
        match &self.case {
            LensCase::Overlap(q) => Some(q.big_theta),
            LensCase::Outside => None,
        }
    }

    /// `e_t(s) = (-s)^t η^(t)(s) / t!` for `t >= 1`, and `-η(s)` for `t = 0`.
    /// Always non-negative.
    fn scaled_eta(&self, t: usize, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let alpha = self.alpha_nlos;
        let delta = 2.0 / alpha;
        let kernel = if t == 0 {
            BetaKernel::new(delta, 1.0 - delta)
        } else {
            BetaKernel::new(delta + 1.0, t as f64 - delta)
        };
        let radial = |rho: f64| {
            let q = s * rho.powf(-alpha);
            let x = 1.0 / (1.0 + q);
            kernel.upper(x, q * x)
        };
        let angular = match &self.case {
            LensCase::Outside => 2.0 * PI * radial(self.r1),
            LensCase::Overlap(lens) => {
                let theta = lens.big_theta;
                let sum: f64 = lens
                    .weights
                    .iter()
                    .zip(&lens.radii)
                    .map(|(w, &z)| w * radial(z))
                    .sum();
                2.0 * (PI - theta) * radial(self.r1) + theta * sum
            }
        };
        self.bs_density * s.powf(delta) / alpha * angular
    }

    /// Exponent of the conditional Laplace transform. `η(0) = 0`.
    pub fn eta(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::domain(format!("Laplace argument must be >= 0, got {s}")));
        }
        Ok(-self.scaled_eta(0, s))
    }

    /// `t`-th derivative of `η` at `s > 0`; its sign is `(-1)^t`.
    pub fn eta_deriv(&self, t: usize, s: f64) -> Result<f64> {
        if t == 0 {
            return self.eta(s);
        }
        if !(s > 0.0) {
            return Err(Error::domain(format!(
                "derivatives of η need a positive argument, got {s}"
            )));
        }
        let sign = if t.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * factorial(t) * self.scaled_eta(t, s) / s.powi(t as i32))
    }

    pub fn laplace_i2(&self, s: f64) -> Result<f64> {
        Ok(self.eta(s)?.exp())
    }

    /// Scaled derivatives `ℓ_0..=ℓ_kmax` with `ℓ_k = (-s)^k L^(k)(s) / k!`.
    ///
    /// Each lower order is computed once, so the table costs `O(kmax²)`
    /// multiplications on top of `kmax + 1` exponent evaluations.
    pub fn scaled_derivatives(&self, s: f64, kmax: usize) -> Result<Vec<f64>> {
        if !(s >= 0.0) {
            return Err(Error::domain(format!("Laplace argument must be >= 0, got {s}")));
        }
        let mut table = Vec::with_capacity(kmax + 1);
        table.push(self.laplace_i2(s)?);
        if kmax == 0 {
            return Ok(table);
        }
        if s == 0.0 {
            table.resize(kmax + 1, 0.0);
            return Ok(table);
        }
        let e: Vec<f64> = (0..=kmax).map(|t| if t == 0 { 0.0 } else { self.scaled_eta(t, s) }).collect();
        for k in 1..=kmax {
            let kf = k as f64;
            let v: f64 = (0..k)
                .map(|l| (k - l) as f64 / kf * e[k - l] * table[l])
                .sum();
            table.push(v);
        }
        Ok(table)
    }

    /// `k`-th derivative of the Laplace transform; its sign is `(-1)^k`.
    pub fn laplace_i2_deriv(&self, k: usize, s: f64) -> Result<f64> {
        if k == 0 {
            return self.laplace_i2(s);
        }
        if !(s > 0.0) {
            return Err(Error::domain(format!(
                "derivatives of the Laplace transform need a positive argument, got {s}"
            )));
        }
        let table = self.scaled_derivatives(s, k)?;
        Ok(table[k] * factorial(k) / (-s).powi(k as i32))
    }

    /// `l`-th derivative of the Laplace transform of `h₁ + I₂`, where `h₁` is
    /// the exponentially faded nearest-station gain.
    pub fn laplace_h1_plus_i2_deriv(&self, l: usize, u: f64) -> Result<f64> {
        if l > 0 && !(u > 0.0) {
            return Err(Error::domain(format!(
                "derivatives need a positive argument, got {u}"
            )));
        }
        let mut total = 0.0;
        let mut binom = 1.0;
        for p in 0..=l {
            let li2 = self.laplace_i2_deriv(p, u)?;
            let lh1 = laplace_h1_deriv(self.alpha_nlos, self.r1, l - p, u)?;
            total += binom * li2 * lh1;
            binom = binom * (l - p) as f64 / (p + 1) as f64;
        }
        Ok(total)
    }
}

pub fn eta(ctx: &LaplaceContext, s: f64) -> Result<f64> {
    ctx.eta(s)
}

pub fn eta_deriv(ctx: &LaplaceContext, t: usize, s: f64) -> Result<f64> {
    ctx.eta_deriv(t, s)
}

pub fn laplace_i2(ctx: &LaplaceContext, s: f64) -> Result<f64> {
    ctx.laplace_i2(s)
}

pub fn laplace_i2_deriv(ctx: &LaplaceContext, k: usize, s: f64) -> Result<f64> {
    ctx.laplace_i2_deriv(k, s)
}

pub fn laplace_h1_plus_i2_deriv(ctx: &LaplaceContext, l: usize, u: f64) -> Result<f64> {
    ctx.laplace_h1_plus_i2_deriv(l, u)
}

/// `t`-th derivative of `E[exp(-u h₁)] = r1^α / (u + r1^α)`.
pub fn laplace_h1_deriv(alpha_nlos: f64, r1: f64, t: usize, u: f64) -> Result<f64> {
    if !(u >= 0.0) || !(r1 > 0.0) {
        return Err(Error::domain(format!("need u >= 0 and r1 > 0, got u = {u}, r1 = {r1}")));
    }
    let beta = r1.powf(alpha_nlos);
    let sign = if t.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * factorial(t) * beta / (u + beta).powi(t as i32 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::oracle::tanh_sinh;

    fn params() -> SystemParams {
        SystemParams::default()
    }

    fn ctx(r0: f64, r1: f64) -> LaplaceContext {
        LaplaceContext::with_rule(&params(), r0, r1, 64, AngularRule::Fejer).unwrap()
    }

    /// `-λ Q` by brute-force polar integration around the user.
    fn eta_oracle(r0: f64, r1: f64, s: f64) -> f64 {
        let p = params();
        let (rc, alpha) = (p.radius_rc, p.alpha_nlos);
        let z = |th: f64| (rc * rc - r0 * r0 * th.sin().powi(2)).max(0.0).sqrt() - r0 * th.cos();
        let radial = |th: f64| {
            let lo = r1.max(z(th));
            // r = lo / v maps (0, 1] onto [lo, ∞)
            tanh_sinh(
                |v| {
                    let r = lo / v;
                    s / (s + r.powf(alpha)) * r * lo / (v * v)
                },
                0.0,
                1.0,
            )
        };
        let split = if r0 > 0.0 && r1 < rc + r0 {
            PI - clamped_acos((r0 * r0 + r1 * r1 - rc * rc) / (2.0 * r0 * r1))
        } else {
            PI
        };
        let q = 2.0 * (tanh_sinh(radial, 0.0, split) + if split < PI { tanh_sinh(radial, split, PI) } else { 0.0 });
        -p.bs_density * q
    }

    #[test]
    fn case_split() {
        assert_eq!(ctx(0.0, 600.0).case, LensCase::Outside);
        assert_eq!(ctx(300.0, 900.0).case, LensCase::Outside);
        let c = ctx(300.0, 400.0);
        assert!((c.big_theta().unwrap() - PI / 2.0).abs() < 1e-14);
        if let LensCase::Overlap(lens) = &c.case {
            assert!(lens.radii.iter().all(|&z| z >= 200.0 - 1e-9 && z <= 800.0 + 1e-9));
        }
    }

    #[test]
    fn infeasible_nearest_distance_is_rejected() {
        assert!(LaplaceContext::new(&params(), 300.0, 200.0).is_err());
        assert!(LaplaceContext::new(&params(), 300.0, 150.0).is_err());
        assert!(LaplaceContext::new(&params(), 600.0, 900.0).is_err());
    }

    #[test]
    fn eta_vanishes_at_zero() {
        for (r0, r1) in [(0.0, 600.0), (300.0, 400.0), (300.0, 900.0)] {
            assert_eq!(ctx(r0, r1).eta(0.0).unwrap(), 0.0);
            assert_eq!(ctx(r0, r1).laplace_i2(0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn outside_case_closed_form() {
        let c = ctx(300.0, 900.0);
        let s = 900f64.powi(3);
        let d = 2.0 / 3.0;
        let expected = -(2.0 * 2e-5 * PI * s.powf(d) / 3.0)
            * crate::numerics::upper_incomplete_beta(0.5, d, 1.0 - d).unwrap();
        let v = c.eta(s).unwrap();
        assert!(((v - expected) / expected).abs() < 1e-13);
        let oracle = eta_oracle(300.0, 900.0, s);
        assert!(((v - oracle) / oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn overlap_case_against_polar_integration() {
        let v = ctx(300.0, 400.0).eta(1e6).unwrap();
        let oracle = eta_oracle(300.0, 400.0, 1e6);
        assert!(((v - oracle) / oracle).abs() < 1e-4, "{v} vs {oracle}");
    }

    #[test]
    fn eta_non_increasing() {
        let c = ctx(250.0, 500.0);
        let mut prev = 0.0;
        for k in 0..40 {
            let s = 10f64.powf(k as f64 / 4.0);
            let v = c.eta(s).unwrap();
            assert!(v <= prev, "s={s}");
            prev = v;
        }
    }

    #[test]
    fn first_derivative_matches_finite_difference() {
        let c = ctx(300.0, 900.0);
        let s = 3e8;
        let h = 1e-6 * s;
        let fd = (c.eta(s + h).unwrap() - c.eta(s - h).unwrap()) / (2.0 * h);
        let d = c.eta_deriv(1, s).unwrap();
        assert!(((fd - d) / d).abs() < 1e-5, "{fd} vs {d}");
    }

    #[test]
    fn second_derivative_overlap_matches_finite_difference() {
        let c = ctx(300.0, 400.0);
        let s = 1e7;
        let h = 1e-3 * s;
        let f = |x: f64| c.eta(x).unwrap();
        let fd = (-f(s + 2.0 * h) + 16.0 * f(s + h) - 30.0 * f(s) + 16.0 * f(s - h) - f(s - 2.0 * h))
            / (12.0 * h * h);
        let d = c.eta_deriv(2, s).unwrap();
        assert!(((fd - d) / d).abs() < 1e-4, "{fd} vs {d}");
    }

    #[test]
    fn derivative_signs_alternate() {
        let c = ctx(200.0, 450.0);
        for s in [1e3, 1e6, 1e9] {
            for t in 1..=6 {
                let v = c.eta_deriv(t, s).unwrap();
                assert_eq!(v < 0.0, t % 2 == 1, "t={t} s={s}: {v}");
                let l = c.laplace_i2_deriv(t, s).unwrap();
                assert_eq!(l < 0.0, t % 2 == 1, "t={t} s={s}: {l}");
            }
        }
        assert!(c.eta_deriv(3, 1e5).unwrap() < 0.0);
    }

    #[test]
    fn derivatives_at_zero_are_rejected() {
        let c = ctx(200.0, 450.0);
        assert!(c.eta_deriv(1, 0.0).is_err());
        assert!(c.laplace_i2_deriv(2, 0.0).is_err());
        assert!(c.eta(-1.0).is_err());
    }

    #[test]
    fn laplace_recursion_base_and_first_order() {
        let c = ctx(300.0, 400.0);
        let s = 2e6;
        assert_eq!(c.laplace_i2_deriv(0, s).unwrap(), c.laplace_i2(s).unwrap());
        let d1 = c.laplace_i2_deriv(1, s).unwrap();
        let expected = c.eta_deriv(1, s).unwrap() * c.laplace_i2(s).unwrap();
        assert!(((d1 - expected) / expected).abs() < 1e-14);
        let h = 1e-3 * s;
        let f = |x: f64| c.laplace_i2(x).unwrap();
        let fd = (f(s - 2.0 * h) - 8.0 * f(s - h) + 8.0 * f(s + h) - f(s + 2.0 * h)) / (12.0 * h);
        assert!(((fd - d1) / d1).abs() < 1e-6, "{fd} vs {d1}");
    }

    #[test]
    fn third_order_laplace_derivative() {
        let c = ctx(150.0, 400.0);
        let s = 5e6;
        let h = 2e-2 * s;
        let f = |x: f64| c.laplace_i2(x).unwrap();
        let fd = (-f(s + 3.0 * h) + 8.0 * f(s + 2.0 * h) - 13.0 * f(s + h) + 13.0 * f(s - h)
            - 8.0 * f(s - 2.0 * h)
            + f(s - 3.0 * h))
            / (8.0 * h.powi(3));
        let d3 = c.laplace_i2_deriv(3, s).unwrap();
        assert!(((fd - d3) / d3).abs() < 1e-3, "{fd} vs {d3}");
    }

    #[test]
    fn scaled_table_is_a_sub_probability() {
        let c = ctx(300.0, 400.0);
        for s in [1e4, 1e6, 1e8] {
            let table = c.scaled_derivatives(s, 40).unwrap();
            assert!(table.iter().all(|&v| v >= 0.0));
            let total: f64 = table.iter().sum();
            assert!(total <= 1.0 + 1e-12, "{total}");
        }
    }

    #[test]
    fn h1_transform_closed_forms() {
        let r1: f64 = 200.0;
        assert_eq!(laplace_h1_deriv(3.0, r1, 0, 0.0).unwrap(), 1.0);
        let beta = r1.powi(3);
        assert!((laplace_h1_deriv(3.0, r1, 0, beta).unwrap() - 0.5).abs() < 1e-15);
        let u = 0.7 * beta;
        let h = 1e-3 * u;
        let f = |x: f64| laplace_h1_deriv(3.0, r1, 0, x).unwrap();
        let fd = (-f(u + 2.0 * h) + 16.0 * f(u + h) - 30.0 * f(u) + 16.0 * f(u - h) - f(u - 2.0 * h))
            / (12.0 * h * h);
        let d2 = laplace_h1_deriv(3.0, r1, 2, u).unwrap();
        assert!(((fd - d2) / d2).abs() < 1e-6, "{fd} vs {d2}");
    }

    #[test]
    fn product_transform() {
        let c = ctx(200.0, 450.0);
        let u = 3e7;
        let prod = |x: f64| c.laplace_i2(x).unwrap() * laplace_h1_deriv(3.0, 450.0, 0, x).unwrap();
        assert!((c.laplace_h1_plus_i2_deriv(0, u).unwrap() - prod(u)).abs() < 1e-16);
        assert!((c.laplace_h1_plus_i2_deriv(0, 1e-12).unwrap() - 1.0).abs() < 1e-9);
        let h = 1e-2 * u;
        let fd = (-prod(u + 2.0 * h) + 16.0 * prod(u + h) - 30.0 * prod(u) + 16.0 * prod(u - h)
            - prod(u - 2.0 * h))
            / (12.0 * h * h);
        let d2 = c.laplace_h1_plus_i2_deriv(2, u).unwrap();
        assert!(((fd - d2) / d2).abs() < 1e-4, "{fd} vs {d2}");
    }

    #[test]
    fn overlap_converges_to_outside_at_tangency() {
        let p = params();
        let (r0, s) = (300.0, 1e8);
        let edge = p.radius_rc + r0;
        let outside = ctx(r0, edge).eta(s).unwrap();
        let inner = ctx(r0, edge * (1.0 - 1e-12)).eta(s).unwrap();
        assert!(((inner - outside) / outside).abs() < 1e-6, "{inner} vs {outside}");
    }

    #[test]
    fn angular_quadrature_converges() {
        let p = params();
        for (r0, r1) in [(100.0, 450.0), (300.0, 250.0), (300.0, 700.0), (450.0, 60.0)] {
            for s in [1e4, 1e6, 1e8] {
                for n in [32, 64] {
                    let a = LaplaceContext::with_rule(&p, r0, r1, n, AngularRule::Fejer).unwrap();
                    let b = LaplaceContext::with_rule(&p, r0, r1, 2 * n, AngularRule::Fejer).unwrap();
                    let (ea, eb) = (a.eta(s).unwrap(), b.eta(s).unwrap());
                    assert!(((ea - eb) / eb).abs() <= 1e-6, "r0={r0} r1={r1} s={s} n={n}");
                }
            }
        }
    }

    #[test]
    fn chebyshev_gauss_weights_are_second_order() {
        // The sqrt-weight form carries an O(N^-2) error that Fejér weights avoid.
        let p = params();
        let oracle = eta_oracle(300.0, 250.0, 1e7);
        let err = |n: usize| {
            let c = LaplaceContext::with_rule(&p, 300.0, 250.0, n, AngularRule::ChebyshevGauss).unwrap();
            ((c.eta(1e7).unwrap() - oracle) / oracle).abs()
        };
        let (e32, e64) = (err(32), err(64));
        assert!(e32 > 1e-5 && e32 < 1e-3, "{e32}");
        assert!((e32 / e64 - 4.0).abs() < 0.2, "{e32} / {e64}");
    }
}
