//! Conditional and disc-averaged coverage, expected service-region areas,
//! the two single-tier benchmarks, and normalized spectral efficiency.
//!
//! Each serving rule is evaluated conditionally on the UAV link state and
//! then mixed with the LoS/NLoS probabilities. Within a state, the UAV link
//! has Nakagami order `m_s` and exponent `α_s`; NLoS uses `m = 1`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::channel::{self, LinkState, RegionLabel};
use crate::error::{Error, Result};
use crate::geometry::{HoleGeometry, DEFAULT_TAIL};
use crate::interference::LaplaceContext;
use crate::numerics::{bisect, Quadrature};
use crate::params::SystemParams;

/// Around `ρ = β1/β0 = 1` the partial-fraction coefficients cancel badly,
/// so [`p2`] switches to a series in `1 - ρ` when `|1 - ρ|` is at most this.
const COINCIDENT_BAND: f64 = 0.5;
/// Absolute accuracy targeted by the truncated series in [`p2`].
const SERIES_TOL: f64 = 1e-14;

/// Per-region coverage terms and their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CoverageBreakdown {
    pub pc1: f64,
    pub pc2: f64,
    pub pc3: f64,
    pub total: f64,
}

impl CoverageBreakdown {
    pub fn new(pc1: f64, pc2: f64, pc3: f64) -> Self {
        Self {
            pc1,
            pc2,
            pc3,
            total: pc1 + pc2 + pc3,
        }
    }

    pub fn get(&self, region: RegionLabel) -> f64 {
        match region {
            RegionLabel::A1 => self.pc1,
            RegionLabel::A2 => self.pc2,
            RegionLabel::A3 => self.pc3,
        }
    }
}

/// Expected service-region areas (m²) and their share of the disc.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct AreaFractions {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl AreaFractions {
    pub fn from_fractions(f: [f64; 3], radius_rc: f64) -> Self {
        let disc = std::f64::consts::PI * radius_rc * radius_rc;
        Self {
            c1: f[0] * disc,
            c2: f[1] * disc,
            c3: f[2] * disc,
            f1: f[0],
            f2: f[1],
            f3: f[2],
        }
    }

    pub fn fractions(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }
}

/// Serving scheme for a user inside the malfunction disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Ground, cooperative or UAV service depending on the region.
    #[default]
    Proposed,
    /// Always served by the UAV; every ground station interferes.
    UavOnly,
    /// No UAV deployed; served by the nearest surviving ground station.
    GroundOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::UavOnly, Scheme::GroundOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::UavOnly => "uav-only",
            Scheme::GroundOnly => "ground-only",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Scheme::Proposed),
            "uav-only" => Ok(Scheme::UavOnly),
            "ground-only" => Ok(Scheme::GroundOnly),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Partial-fraction expansion of the Laplace transform of `h0 + h1`, where
/// `h0 ~ Gamma(m, rate β0)` is the UAV gain and `h1 ~ Exp(β1)` the nearest
/// ground gain:
///
/// `β0^m β1 / ((s+β0)^m (s+β1)) = Σ_k A0k/(s+β0)^k + A11/(s+β1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractionCoeffs {
    /// Multiplicity of the UAV pole, `m_s`.
    pub alpha0: u32,
    /// `m_s (H² + r0²)^(α_s/2)`.
    pub beta0: f64,
    pub alpha1: u32,
    /// `r1^α_N`.
    pub beta1: f64,
    /// `A0k` for `k = 1..=alpha0`.
    pub a0: Vec<f64>,
    pub a11: f64,
    /// `β0 ε`.
    pub u0: f64,
    /// `β1 ε`.
    pub u1: f64,
}

impl PartialFractionCoeffs {
    pub fn new(params: &SystemParams, state: &LinkState, r0: f64, r1: f64) -> Result<Self> {
        let beta0 = state.m as f64 * channel::uav_path_loss(state, r0, params.uav_height);
        let beta1 = r1.powf(params.alpha_nlos);
        Self::from_poles(state.m, beta0, beta1, params.sir_threshold)
    }

    pub fn from_poles(m: u32, beta0: f64, beta1: f64, sir_threshold: f64) -> Result<Self> {
        if !(beta0 > 0.0 && beta1 > 0.0) {
            return Err(Error::domain("pole locations must be positive"));
        }
        if ((beta0 - beta1) / beta1).abs() < 1e-9 {
            return Err(Error::domain(
                "coincident poles: partial fractions are undefined",
            ));
        }
        let rho = beta1 / beta0;
        let a0 = Self::scaled_a0(m, rho)
            .into_iter()
            .enumerate()
            .map(|(i, c)| c * beta0.powi(i as i32 + 1))
            .collect();
        Ok(Self {
            alpha0: m,
            beta0,
            alpha1: 1,
            beta1,
            a0,
            a11: beta1 * (1.0 - rho).powi(-(m as i32)),
            u0: beta0 * sir_threshold,
            u1: beta1 * sir_threshold,
        })
    }

    /// `A0k / β0^k` for `k = 1..=m`, functions of `ρ = β1/β0` only.
    fn scaled_a0(m: u32, rho: f64) -> Vec<f64> {
        let r = 1.0 / (rho - 1.0);
        (1..=m)
            .map(|k| {
                let e = (m - k) as i32;
                let sign = if e % 2 == 0 { 1.0 } else { -1.0 };
                sign * rho * r * r.powi(e)
            })
            .collect()
    }

    /// Evaluates the expansion at `s`.
    pub fn reconstruct(&self, s: f64) -> f64 {
        let poles: f64 = self
            .a0
            .iter()
            .enumerate()
            .map(|(i, a)| a / (s + self.beta0).powi(i as i32 + 1))
            .sum();
        poles + self.a11 / (s + self.beta1)
    }
}

fn check_r1(params: &SystemParams, r0: f64, r1: f64) -> Result<()> {
    if !(r1 > params.radius_rc - r0) || !(r1 > 0.0) {
        return Err(Error::domain(format!(
            "nearest-station distance r1 = {r1} must exceed R_c - r0 = {}",
            params.radius_rc - r0
        )));
    }
    Ok(())
}

/// Coverage of a ground-served user: the UAV interferes at full power.
pub fn p1(params: &SystemParams, state: &LinkState, r0: f64, r1: f64) -> Result<f64> {
    let ctx = LaplaceContext::new(params, r0, r1)?;
    p1_in(&ctx, params, state)
}

fn p1_in(ctx: &LaplaceContext, params: &SystemParams, state: &LinkState) -> Result<f64> {
    let s = ctx.r1.powf(params.alpha_nlos) * params.sir_threshold;
    let beta0 = state.m as f64 * channel::uav_path_loss(state, ctx.r0, params.uav_height);
    let uav = (1.0 + s / beta0).powi(-(state.m as i32));
    Ok(ctx.laplace_i2(s)? * uav)
}

/// Coverage from the nearest ground station when no UAV is deployed.
pub fn p1_no_uav(params: &SystemParams, r0: f64, r1: f64) -> Result<f64> {
    let ctx = LaplaceContext::new(params, r0, r1)?;
    ctx.laplace_i2(ctx.r1.powf(params.alpha_nlos) * params.sir_threshold)
}

/// Coverage of a cooperatively served user, `Pr(h0 + h1 > ε I₂)`.
pub fn p2(params: &SystemParams, state: &LinkState, r0: f64, r1: f64) -> Result<f64> {
    check_r1(params, r0, r1)?;
    let ctx = LaplaceContext::new(params, r0, r1)?;
    p2_in(&ctx, params, state)
}

fn p2_in(ctx: &LaplaceContext, params: &SystemParams, state: &LinkState) -> Result<f64> {
    let eps = params.sir_threshold;
    let m = state.m as usize;
    let beta0 = state.m as f64 * channel::uav_path_loss(state, ctx.r0, params.uav_height);
    let beta1 = ctx.r1.powf(params.alpha_nlos);
    let rho = beta1 / beta0;
    let kappa = 1.0 - rho;
    if kappa.abs() <= COINCIDENT_BAND {
        // h1 ~ Exp(ρβ0) is a mixture of Gamma(j+1, β0) with weights ρκ^j,
        // which turns h0 + h1 into a series of single-pole Erlang laws.
        let extra = if kappa == 0.0 {
            0
        } else {
            (SERIES_TOL.ln() / kappa.abs().ln()).ceil() as usize
        };
        let table = ctx.scaled_derivatives(beta0 * eps, m + extra)?;
        let value = table
            .iter()
            .enumerate()
            .map(|(n, l)| if n <= m { *l } else { kappa.powi((n - m) as i32) * l })
            .sum::<f64>();
        return Ok(value.clamp(0.0, 1.0));
    }
    let table = ctx.scaled_derivatives(beta0 * eps, m - 1)?;
    let mut value = 0.0;
    let mut partial = 0.0;
    for (k, c) in PartialFractionCoeffs::scaled_a0(state.m, rho).into_iter().enumerate() {
        partial += table[k];
        value += c * partial;
    }
    value += (1.0 - rho).powi(-(m as i32)) * ctx.laplace_i2(beta1 * eps)?;
    Ok(value.clamp(0.0, 1.0))
}

/// Coverage of a UAV-served user; the nearest ground station interferes.
pub fn p3(params: &SystemParams, state: &LinkState, r0: f64, r1: f64) -> Result<f64> {
    let ctx = LaplaceContext::new(params, r0, r1)?;
    p3_in(&ctx, params, state)
}

fn p3_in(ctx: &LaplaceContext, params: &SystemParams, state: &LinkState) -> Result<f64> {
    let m = state.m as usize;
    let u = state.m as f64 * channel::uav_path_loss(state, ctx.r0, params.uav_height) * params.sir_threshold;
    let table = ctx.scaled_derivatives(u, m - 1)?;
    // scaled derivatives of r1^α/(u + r1^α) are (1-q) q^t
    let beta1 = ctx.r1.powf(params.alpha_nlos);
    let q = u / (u + beta1);
    let mut h1 = Vec::with_capacity(m);
    let mut term = 1.0 - q;
    for _ in 0..m {
        h1.push(term);
        term *= q;
    }
    let mut value = 0.0;
    for l in 0..m {
        for p in 0..=l {
            value += table[p] * h1[l - p];
        }
    }
    Ok(value.clamp(0.0, 1.0))
}

/// `p3` through the derivatives of the Laplace transform of `h₁ + I₂`,
/// summed term by term. Slower and less stable than [`p3`]; kept as a
/// cross-check of the scaled form.
pub fn p3_direct(params: &SystemParams, state: &LinkState, r0: f64, r1: f64) -> Result<f64> {
    let ctx = LaplaceContext::new(params, r0, r1)?;
    let u = state.m as f64 * channel::uav_path_loss(state, r0, params.uav_height) * params.sir_threshold;
    let mut value = 0.0;
    let mut coeff = 1.0;
    for l in 0..state.m as usize {
        if l > 0 {
            coeff *= -u / l as f64;
        }
        value += coeff * ctx.laplace_h1_plus_i2_deriv(l, u)?;
    }
    Ok(value)
}

/// Quadrature settings for integrals over the nearest-station distance.
fn inner_quadrature() -> Quadrature {
    Quadrature::with_tolerance(1e-8, 1e-8)
}

/// Quadrature settings for averages over the user position.
fn outer_quadrature() -> Quadrature {
    Quadrature::with_tolerance(1e-6, 1e-6)
}

struct InnerRange {
    geometry: HoleGeometry,
    lo: f64,
    hi: f64,
}

fn inner_range(params: &SystemParams, r0: f64) -> Result<InnerRange> {
    let geometry = HoleGeometry::from_params(params, r0)?;
    let lo = geometry.min_distance().max(0.0);
    let hi = geometry.truncation_radius(DEFAULT_TAIL);
    Ok(InnerRange { geometry, lo, hi })
}

/// Integrates `f(ctx)·pdf(r1)` over the feasible `r1` range for one state,
/// where `f` returns a value per region.
fn integrate_state<F>(
    params: &SystemParams,
    range: &InnerRange,
    extra_breaks: &[f64],
    mut f: F,
) -> Result<[f64; 3]>
where
    F: FnMut(&LaplaceContext) -> Result<[f64; 3]>,
{
    let mut failure = None;
    let [b0, b1] = range.geometry.breakpoints();
    let mut breaks = vec![b0, b1];
    breaks.extend_from_slice(extra_breaks);
    let r0 = range.geometry.r0;
    let value = inner_quadrature().integrate(
        |r1| {
            if failure.is_some() {
                return [0.0; 3];
            }
            let pdf = range.geometry.nearest_bs_pdf(r1);
            if pdf == 0.0 {
                return [0.0; 3];
            }
            match LaplaceContext::new(params, r0, r1).and_then(|ctx| f(&ctx)) {
                Ok(v) => v.map(|x| x * pdf),
                Err(e) => {
                    failure = Some(e);
                    [0.0; 3]
                }
            }
        },
        range.lo,
        range.hi,
        &breaks,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    value
}

/// Coverage of a user at distance `r0` from the disc centre, split by the
/// region that serves it.
pub fn conditional_coverage(params: &SystemParams, r0: f64) -> Result<CoverageBreakdown> {
    let range = inner_range(params, r0)?;
    let mut pc = [0.0; 3];
    for (state, weight) in LinkState::mixture(params, r0) {
        if weight == 0.0 {
            continue;
        }
        let th = channel::region_thresholds(params, &state, r0);
        let v = integrate_state(params, &range, &[th.lower, th.upper.as_f64()], |ctx| {
            Ok(match channel::assign_region(params, &state, r0, ctx.r1) {
                RegionLabel::A1 => [p1_in(ctx, params, &state)?, 0.0, 0.0],
                RegionLabel::A2 => [0.0, p2_in(ctx, params, &state)?, 0.0],
                RegionLabel::A3 => [0.0, 0.0, p3_in(ctx, params, &state)?],
            })
        })?;
        for i in 0..3 {
            pc[i] += weight * v[i];
        }
    }
    Ok(CoverageBreakdown::new(pc[0], pc[1], pc[2]))
}

/// Coverage when the UAV serves every user regardless of `r1`.
pub fn benchmark_uav_only_coverage(params: &SystemParams, r0: f64) -> Result<f64> {
    let range = inner_range(params, r0)?;
    let mut total = 0.0;
    for (state, weight) in LinkState::mixture(params, r0) {
        if weight == 0.0 {
            continue;
        }
        let [v, _, _] =
            integrate_state(params, &range, &[], |ctx| Ok([p3_in(ctx, params, &state)?, 0.0, 0.0]))?;
        total += weight * v;
    }
    Ok(total)
}

/// Coverage when no UAV is deployed.
pub fn benchmark_ground_only_coverage(params: &SystemParams, r0: f64) -> Result<f64> {
    let range = inner_range(params, r0)?;
    let eps = params.sir_threshold;
    let [v, _, _] = integrate_state(params, &range, &[], |ctx| {
        Ok([ctx.laplace_i2(ctx.r1.powf(params.alpha_nlos) * eps)?, 0.0, 0.0])
    })?;
    Ok(v)
}

/// Conditional coverage under any scheme. Single-tier schemes report their
/// whole coverage in the term of the tier that serves them.
pub fn scheme_coverage(params: &SystemParams, scheme: Scheme, r0: f64) -> Result<CoverageBreakdown> {
    match scheme {
        Scheme::Proposed => conditional_coverage(params, r0),
        Scheme::UavOnly => Ok(CoverageBreakdown::new(
            0.0,
            0.0,
            benchmark_uav_only_coverage(params, r0)?,
        )),
        Scheme::GroundOnly => Ok(CoverageBreakdown::new(
            benchmark_ground_only_coverage(params, r0)?,
            0.0,
            0.0,
        )),
    }
}

/// Probability of each service region for a user at `r0`, from the
/// nearest-station law and the link-state mixture.
pub fn region_probabilities(params: &SystemParams, r0: f64) -> Result<[f64; 3]> {
    let geometry = HoleGeometry::from_params(params, r0)?;
    let mut out = [0.0; 3];
    for (state, weight) in LinkState::mixture(params, r0) {
        let th = channel::region_thresholds(params, &state, r0);
        let fa = geometry.nearest_bs_cdf(th.lower);
        let fb = match th.upper {
            channel::Bound::Finite(b) => geometry.nearest_bs_cdf(b),
            channel::Bound::Unbounded => 1.0,
        };
        out[0] += weight * fa;
        out[1] += weight * (fb - fa);
        out[2] += weight * (1.0 - fb);
    }
    Ok(out)
}

/// Expected area of each service region over the disc, with users placed
/// uniformly.
pub fn area_fractions(params: &SystemParams) -> Result<AreaFractions> {
    let params = params.validated()?;
    let rc = params.radius_rc;
    let mut failure = None;
    let f = Quadrature::with_tolerance(1e-10, 1e-10).integrate(
        |r0| match region_probabilities(&params, r0) {
            Ok(p) => p.map(|x| x * 2.0 * r0 / (rc * rc)),
            Err(e) => {
                failure.get_or_insert(e);
                [0.0; 3]
            }
        },
        0.0,
        rc,
        &outer_breakpoints(&params),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(AreaFractions::from_fractions(f?, rc))
}

/// Number of base stations occupied by each service class.
pub const SERVING_COUNTS: [f64; 3] = [1.0, 2.0, 1.0];

/// Disc-averaged coverage terms together with the normalized spectral
/// efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NseReport {
    pub coverage: CoverageBreakdown,
    /// `Σ Pc_i ln(1+ε) / N_i` from the averaged terms.
    pub nse: f64,
    /// The same quantity integrated as a single integrand.
    pub nse_direct: f64,
}

/// User radii at which a region threshold meets one of the kinks `R_c ± r0`
/// of the nearest-station law. Disc averages bend there.
fn outer_breakpoints(params: &SystemParams) -> Vec<f64> {
    let rc = params.radius_rc;
    let mut out = Vec::new();
    for state in [LinkState::los(params), LinkState::nlos(params)] {
        let th = |r0: f64| channel::region_thresholds(params, &state, r0);
        let crossings: [&dyn Fn(f64) -> f64; 4] = [
            &|r0| th(r0).lower - (rc - r0),
            &|r0| th(r0).lower - (rc + r0),
            &|r0| th(r0).upper.min(f64::MAX) - (rc - r0),
            &|r0| th(r0).upper.min(f64::MAX) - (rc + r0),
        ];
        for g in crossings {
            if g(0.0).signum() != g(rc).signum() {
                if let Ok(x) = bisect(g, 0.0, rc, 1e-9 * rc) {
                    out.push(x);
                }
            }
        }
    }
    out
}

/// Disc average of a scheme's coverage terms and its spectral efficiency,
/// in nats per channel use per base station.
pub fn nse_report(params: &SystemParams, scheme: Scheme) -> Result<NseReport> {
    let params = params.validated()?;
    let rc = params.radius_rc;
    let log_gain = params.sir_threshold.ln_1p();
    let mut failure = None;
    let [a1, a2, a3, direct] = outer_quadrature().integrate(
        |r0| {
            if failure.is_some() {
                return [0.0; 4];
            }
            match scheme_coverage(&params, scheme, r0) {
                Ok(c) => {
                    let w = 2.0 * r0 / (rc * rc);
                    let spectral = log_gain
                        * (c.pc1 / SERVING_COUNTS[0] + c.pc2 / SERVING_COUNTS[1] + c.pc3 / SERVING_COUNTS[2]);
                    [c.pc1 * w, c.pc2 * w, c.pc3 * w, spectral * w]
                }
                Err(e) => {
                    failure = Some(e);
                    [0.0; 4]
                }
            }
        },
        0.0,
        rc,
        &outer_breakpoints(&params),
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let coverage = CoverageBreakdown::new(a1, a2, a3);
    let nse = log_gain
        * (a1 / SERVING_COUNTS[0] + a2 / SERVING_COUNTS[1] + a3 / SERVING_COUNTS[2]);
    Ok(NseReport {
        coverage,
        nse,
        nse_direct: direct,
    })
}

/// Normalized spectral efficiency of the proposed scheme.
pub fn nse(params: &SystemParams) -> Result<f64> {
    Ok(nse_report(params, Scheme::Proposed)?.nse)
}

/// Coverage averaged over a uniformly placed user.
pub fn average_coverage(params: &SystemParams, scheme: Scheme) -> Result<CoverageBreakdown> {
    Ok(nse_report(params, scheme)?.coverage)
}
