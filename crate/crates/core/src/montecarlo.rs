//! Seeded network simulator.
//!
//! Each drop places a Poisson field of ground stations in the annulus
//! `R_c <= |y| <= sim_radius`, draws the UAV link state and every fading
//! gain, classifies the user and evaluates its SIR. Drop `i` of a run with
//! base seed `b` draws from its own ChaCha8 stream `(b, i)`, so results do
//! not depend on how drops are spread over worker threads.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{self, LinkState, LinkTag, RegionLabel};
use crate::coverage::{AreaFractions, Scheme, SERVING_COUNTS};
use crate::error::{Error, Result};
use crate::geometry::{HoleGeometry, DEFAULT_TAIL};
use crate::params::SystemParams;

/// Environment variable holding the worker count for simulations.
pub const WORKERS_ENV: &str = "UAVCOV_WORKERS";

/// Ground stations of one drop, in polar coordinates around the disc centre.
#[derive(Debug, Clone, PartialEq)]
pub struct PppRealization {
    /// `(radius, angle)` pairs with `radius` in `[R_c, sim_radius]`.
    pub points: Vec<(f64, f64)>,
    pub seed: u64,
    pub count: usize,
}

/// Received powers and the resulting classification of one drop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropOutcome {
    pub region: RegionLabel,
    pub link_state: LinkState,
    /// SIR of the region's serving rule, linear.
    pub sir: f64,
    pub covered: bool,
    /// Distance from the user to the nearest ground station.
    pub r1: f64,
    /// Power received from the UAV.
    pub h0: f64,
    /// Power received from the nearest ground station.
    pub h1: f64,
    /// Power received from all other ground stations.
    pub i2: f64,
}

impl DropOutcome {
    fn new(params: &SystemParams, r0: f64, link_state: LinkState, r1: f64, h0: f64, h1: f64, i2: f64) -> Self {
        let region = channel::assign_region(params, &link_state, r0, r1);
        let mut out = Self {
            region,
            link_state,
            sir: 0.0,
            covered: false,
            r1,
            h0,
            h1,
            i2,
        };
        out.sir = out.sir_for(Scheme::Proposed);
        out.covered = out.sir > params.sir_threshold;
        out
    }

    /// SIR of this drop under a serving scheme.
    pub fn sir_for(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::Proposed => match self.region {
                RegionLabel::A1 => self.h1 / (self.h0 + self.i2),
                RegionLabel::A2 => (self.h0 + self.h1) / self.i2,
                RegionLabel::A3 => self.h0 / (self.h1 + self.i2),
            },
            Scheme::UavOnly => self.h0 / (self.h1 + self.i2),
            Scheme::GroundOnly => self.h1 / self.i2,
        }
    }

    /// Number of stations serving the user under a scheme.
    pub fn serving_count(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::Proposed => SERVING_COUNTS[self.region.index()],
            Scheme::UavOnly | Scheme::GroundOnly => 1.0,
        }
    }
}

/// Mean of Bernoulli outcomes with its 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub half_width: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn from_count(hits: u64, samples: u64) -> Self {
        let p = hits as f64 / samples as f64;
        Self {
            estimate: p,
            half_width: 1.96 * (p * (1.0 - p) / samples as f64).sqrt(),
            samples,
        }
    }
}

/// The generator for one drop. Attempts past zero only occur when a drop
/// has to be redrawn.
pub fn drop_rng(base_seed: u64, index: u64, attempt: u32) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&base_seed.to_le_bytes());
    seed[8..12].copy_from_slice(&attempt.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(index);
    rng
}

/// Runs `f` on a pool sized from [`WORKERS_ENV`], or on the global pool
/// when the variable is unset or invalid.
pub fn with_workers<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let n = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match n.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn annulus_mean_count(params: &SystemParams, inner: f64, outer: f64) -> f64 {
    params.bs_density * PI * (outer * outer - inner * inner)
}

fn poisson_count(mean: f64, rng: &mut impl Rng) -> u64 {
    if !(mean > 0.0) {
        return 0;
    }
    let draw: f64 = Poisson::new(mean).expect("positive finite mean").sample(rng);
    draw as u64
}

/// Radius of a uniform point in the annulus `[inner, outer]`.
fn annulus_radius(inner: f64, outer: f64, rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.random();
    (inner * inner + u * (outer * outer - inner * inner)).sqrt()
}

/// Draws the ground stations of one drop.
pub fn sample_ppp(params: &SystemParams, seed: u64) -> PppRealization {
    let mut rng = drop_rng(seed, 0, 0);
    let (inner, outer) = (params.radius_rc, params.sim_radius);
    let count = poisson_count(annulus_mean_count(params, inner, outer), &mut rng) as usize;
    let points = (0..count)
        .map(|_| {
            let r = annulus_radius(inner, outer, &mut rng);
            let phi = 2.0 * PI * rng.random::<f64>();
            (r, phi)
        })
        .collect();
    PppRealization {
        points,
        seed,
        count,
    }
}

/// Unit-mean Gamma power gain with shape `m` (Nakagami-m amplitude).
pub fn sample_fading_power(m: u32, rng: &mut impl Rng) -> f64 {
    if m <= 1 {
        return Exp1.sample(rng);
    }
    let m = m as f64;
    Gamma::new(m, 1.0 / m).expect("positive shape").sample(rng)
}

pub fn sample_link_state(params: &SystemParams, r0: f64, rng: &mut impl Rng) -> LinkState {
    let tag = if rng.random::<f64>() < channel::los_probability(params, r0) {
        LinkTag::Los
    } else {
        LinkTag::Nlos
    };
    LinkState::for_tag(params, tag)
}

/// `r^(-α)` from `r²`, with fast paths for the common exponents.
#[inline]
fn gain_from_sq(d2: f64, alpha: f64) -> f64 {
    if alpha == 3.0 {
        1.0 / (d2 * d2.sqrt())
    } else if alpha == 4.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-0.5 * alpha)
    }
}

/// Nearest-station distance and received powers from a fresh ground field.
struct GroundField {
    r1: f64,
    h1: f64,
    i2: f64,
}

/// Visits the squared user distance of every station of a fresh ground
/// field without storing the field.
fn for_each_station<R: Rng>(params: &SystemParams, r0: f64, rng: &mut R, mut visit: impl FnMut(f64, &mut R)) {
    let (inner, outer) = (params.radius_rc, params.sim_radius);
    let count = poisson_count(annulus_mean_count(params, inner, outer), rng);
    let (inner2, outer2) = (inner * inner, outer * outer);
    for _ in 0..count {
        // uniform in the annulus by rejection from the bounding square
        let (x, rho2) = loop {
            let x = outer * (2.0 * rng.random::<f64>() - 1.0);
            let y = outer * (2.0 * rng.random::<f64>() - 1.0);
            let rho2 = x * x + y * y;
            if rho2 >= inner2 && rho2 <= outer2 {
                break (x, rho2);
            }
        };
        let d2 = (rho2 + r0 * r0 - 2.0 * r0 * x).max(f64::MIN_POSITIVE);
        visit(d2, rng);
    }
}

/// Draws a ground field with Rayleigh fading. `exclude` drops every station
/// closer than that distance. Returns `None` when no station survives.
fn ground_field(params: &SystemParams, r0: f64, exclude: f64, rng: &mut impl Rng) -> Option<GroundField> {
    let alpha = params.alpha_nlos;
    let exclude2 = exclude * exclude;
    let mut nearest2 = f64::INFINITY;
    let mut nearest_power = 0.0;
    let mut rest = 0.0;
    for_each_station(params, r0, rng, |d2, rng| {
        let fade: f64 = Exp1.sample(rng);
        if d2 < exclude2 {
            return;
        }
        let power = fade * gain_from_sq(d2, alpha);
        if d2 < nearest2 {
            rest += nearest_power;
            nearest2 = d2;
            nearest_power = power;
        } else {
            rest += power;
        }
    });
    nearest2.is_finite().then(|| GroundField {
        r1: nearest2.sqrt(),
        h1: nearest_power,
        i2: rest,
    })
}

fn simulate_drop_with(params: &SystemParams, r0: f64, base_seed: u64, index: u64) -> DropOutcome {
    let mut attempt = 0;
    loop {
        let mut rng = drop_rng(base_seed, index, attempt);
        let state = sample_link_state(params, r0, &mut rng);
        let h0 = sample_fading_power(state.m, &mut rng) / channel::uav_path_loss(&state, r0, params.uav_height);
        if let Some(field) = ground_field(params, r0, 0.0, &mut rng) {
            return DropOutcome::new(params, r0, state, field.r1, h0, field.h1, field.i2);
        }
        log::warn!("drop {index} (seed {base_seed}, attempt {attempt}) has no ground station; redrawing");
        attempt += 1;
    }
}

fn check_r0(params: &SystemParams, r0: f64) -> Result<()> {
    if !(0.0..=params.radius_rc).contains(&r0) {
        return Err(Error::domain(format!(
            "user distance r0 = {r0} must lie in [0, {}]",
            params.radius_rc
        )));
    }
    Ok(())
}

fn check_drops(drops: u64) -> Result<()> {
    if drops == 0 {
        return Err(Error::domain("at least one drop is required"));
    }
    Ok(())
}

/// One drop for a user at distance `r0` from the disc centre.
pub fn simulate_drop(params: &SystemParams, r0: f64, seed: u64) -> Result<DropOutcome> {
    let params = params.validated()?;
    check_r0(&params, r0)?;
    Ok(simulate_drop_with(&params, r0, seed, 0))
}

/// `drops` independent drops at a fixed user position, in index order.
pub fn simulate_drops(params: &SystemParams, r0: f64, drops: u64, base_seed: u64) -> Result<Vec<DropOutcome>> {
    let params = params.validated()?;
    check_r0(&params, r0)?;
    check_drops(drops)?;
    Ok(with_workers(|| {
        (0..drops)
            .into_par_iter()
            .map(|i| simulate_drop_with(&params, r0, base_seed, i))
            .collect()
    }))
}

/// Coverage of a scheme over a set of drops, at an arbitrary threshold.
/// SIRs do not depend on the threshold, so one set of drops serves a whole
/// threshold sweep.
pub fn coverage_from_drops(drops: &[DropOutcome], scheme: Scheme, sir_threshold: f64) -> Estimate {
    let hits = drops
        .iter()
        .filter(|d| d.sir_for(scheme) > sir_threshold)
        .count() as u64;
    Estimate::from_count(hits, drops.len() as u64)
}

/// Empirical coverage of the proposed scheme at distance `r0`.
pub fn estimate_coverage(params: &SystemParams, r0: f64, drops: u64, base_seed: u64) -> Result<Estimate> {
    estimate_scheme_coverage(params, Scheme::Proposed, r0, drops, base_seed)
}

pub fn estimate_scheme_coverage(
    params: &SystemParams,
    scheme: Scheme,
    r0: f64,
    drops: u64,
    base_seed: u64,
) -> Result<Estimate> {
    let outcomes = simulate_drops(params, r0, drops, base_seed)?;
    Ok(coverage_from_drops(&outcomes, scheme, params.sir_threshold))
}

/// Uniform user position in the disc, as a distance from the centre.
fn sample_user_radius(radius_rc: f64, rng: &mut impl Rng) -> f64 {
    radius_rc * rng.random::<f64>().sqrt()
}

/// Exact draw of the nearest-station distance that only places stations
/// near the user.
///
/// Stations are generated ring by ring in the annulus around the disc
/// centre, starting with `[R_c, r0 + w]` where `w` is the distance holding
/// all but `DEFAULT_TAIL` of the nearest-station law. The restriction of a
/// Poisson field to disjoint rings is a set of independent Poisson fields,
/// so growing the window only when no station lies within `w` of the user
/// leaves the law unchanged.
pub fn sample_nearest_distance(params: &SystemParams, r0: f64, rng: &mut impl Rng) -> Result<f64> {
    let geometry = HoleGeometry::from_params(params, r0)?;
    let mut reach = geometry.truncation_radius(DEFAULT_TAIL).max(geometry.min_distance());
    let mut inner = params.radius_rc;
    let mut best2 = f64::INFINITY;
    loop {
        let outer = r0 + reach;
        let count = poisson_count(annulus_mean_count(params, inner, outer), rng);
        for _ in 0..count {
            let rho = annulus_radius(inner, outer, rng);
            let cos = (2.0 * PI * rng.random::<f64>()).cos();
            let d2 = (rho * rho + r0 * r0 - 2.0 * r0 * rho * cos).max(0.0);
            best2 = best2.min(d2);
        }
        // every point beyond `outer` is farther than `reach` from the user
        if best2 <= reach * reach {
            return Ok(best2.sqrt());
        }
        inner = outer;
        reach *= 2.0;
    }
}

/// Nearest-station distances for `n` independent drops at `r0`.
pub fn sample_nearest_distances(params: &SystemParams, r0: f64, n: u64, base_seed: u64) -> Result<Vec<f64>> {
    let params = params.validated()?;
    check_r0(&params, r0)?;
    with_workers(|| {
        (0..n)
            .into_par_iter()
            .map(|i| sample_nearest_distance(&params, r0, &mut drop_rng(base_seed, i, 0)))
            .collect()
    })
}

/// Empirical region probabilities at a fixed user position.
pub fn estimate_region_probabilities(params: &SystemParams, r0: f64, drops: u64, base_seed: u64) -> Result<[f64; 3]> {
    let params = params.validated()?;
    check_r0(&params, r0)?;
    check_drops(drops)?;
    let labels: Result<Vec<RegionLabel>> = with_workers(|| {
        (0..drops)
            .into_par_iter()
            .map(|i| {
                let mut rng = drop_rng(base_seed, i, 0);
                let state = sample_link_state(&params, r0, &mut rng);
                let r1 = sample_nearest_distance(&params, r0, &mut rng)?;
                Ok(channel::assign_region(&params, &state, r0, r1))
            })
            .collect()
    });
    Ok(label_fractions(&labels?))
}

fn label_fractions(labels: &[RegionLabel]) -> [f64; 3] {
    let mut counts = [0u64; 3];
    for l in labels {
        counts[l.index()] += 1;
    }
    let n = labels.len() as f64;
    counts.map(|c| c as f64 / n)
}

/// Empirical area fractions: users placed uniformly in the disc and
/// classified per drop.
pub fn estimate_area_fractions(params: &SystemParams, drops: u64, base_seed: u64) -> Result<AreaFractions> {
    let params = params.validated()?;
    check_drops(drops)?;
    let labels: Result<Vec<RegionLabel>> = with_workers(|| {
        (0..drops)
            .into_par_iter()
            .map(|i| {
                let mut rng = drop_rng(base_seed, i, 0);
                let r0 = sample_user_radius(params.radius_rc, &mut rng);
                let state = sample_link_state(&params, r0, &mut rng);
                let r1 = sample_nearest_distance(&params, r0, &mut rng)?;
                Ok(channel::assign_region(&params, &state, r0, r1))
            })
            .collect()
    });
    Ok(AreaFractions::from_fractions(
        label_fractions(&labels?),
        params.radius_rc,
    ))
}

/// Drops with the user placed uniformly in the disc.
pub fn simulate_disc_drops(params: &SystemParams, drops: u64, base_seed: u64) -> Result<Vec<(f64, DropOutcome)>> {
    let params = params.validated()?;
    check_drops(drops)?;
    Ok(with_workers(|| {
        (0..drops)
            .into_par_iter()
            .map(|i| {
                // the user position comes from a stream disjoint from the drop's own
                let mut rng = drop_rng(base_seed ^ 0x9e37_79b9_7f4a_7c15, i, 0);
                let r0 = sample_user_radius(params.radius_rc, &mut rng);
                (r0, simulate_drop_with(&params, r0, base_seed, i))
            })
            .collect()
    }))
}

/// NSE of a scheme over drops: mean of `covered · ln(1+ε) / N`.
pub fn nse_from_drops(drops: &[(f64, DropOutcome)], scheme: Scheme, sir_threshold: f64) -> f64 {
    let gain = sir_threshold.ln_1p();
    // sum in index order so the result is independent of the worker count
    let total: f64 = drops
        .iter()
        .filter(|(_, d)| d.sir_for(scheme) > sir_threshold)
        .map(|(_, d)| gain / d.serving_count(scheme))
        .sum();
    total / drops.len() as f64
}

/// Empirical normalized spectral efficiency of the proposed scheme.
pub fn estimate_nse(params: &SystemParams, drops: u64, base_seed: u64) -> Result<f64> {
    let outcomes = simulate_disc_drops(params, drops, base_seed)?;
    Ok(nse_from_drops(&outcomes, Scheme::Proposed, params.sir_threshold))
}

/// Interference from a fresh ground field given that the nearest station
/// sits at distance `r1`: stations closer than `r1` are removed.
pub fn sample_residual_interference(params: &SystemParams, r0: f64, r1: f64, rng: &mut impl Rng) -> f64 {
    match ground_field(params, r0, r1, rng) {
        Some(f) => f.h1 + f.i2,
        None => 0.0,
    }
}

/// Monte Carlo estimate of `E[exp(-s I₂) | r0, r1]` with its 95% half-width.
///
/// Station positions are simulated; the Rayleigh fading of each station is
/// averaged in closed form, `E[exp(-s g P)] = 1 / (1 + s P)`, which keeps
/// the estimator unbiased and cuts its variance.
pub fn estimate_conditional_laplace(
    params: &SystemParams,
    r0: f64,
    r1: f64,
    s: f64,
    trials: u64,
    base_seed: u64,
) -> Result<(f64, f64)> {
    let params = params.validated()?;
    check_r0(&params, r0)?;
    check_drops(trials)?;
    let alpha = params.alpha_nlos;
    let r1_sq = r1 * r1;
    let values: Vec<f64> = with_workers(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = drop_rng(base_seed, i, 0);
                let mut log_sum = 0.0;
                for_each_station(&params, r0, &mut rng, |d2, _| {
                    if d2 >= r1_sq {
                        log_sum += (s * gain_from_sq(d2, alpha)).ln_1p();
                    }
                });
                (-log_sum).exp()
            })
            .collect()
    });
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    Ok((mean, 1.96 * (var / n).sqrt()))
}

/// Two-sided Kolmogorov–Smirnov distance between a sample and a CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 99% critical value of the KS statistic for `n` samples.
pub fn ks_critical_99(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}
