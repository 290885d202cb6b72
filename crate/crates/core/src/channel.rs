//! Air-to-ground link model and the power-based service-region rule.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LinkTag {
    Los,
    Nlos,
}

/// Propagation state of the UAV-to-user link with its path-loss exponent and
/// Nakagami order. NLoS links are always Rayleigh (`m = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkState {
    pub tag: LinkTag,
    pub alpha: f64,
    pub m: u32,
}

impl LinkState {
    pub fn los(params: &SystemParams) -> Self {
        Self {
            tag: LinkTag::Los,
            alpha: params.alpha_los,
            m: params.m_los,
        }
    }

    pub fn nlos(params: &SystemParams) -> Self {
        Self {
            tag: LinkTag::Nlos,
            alpha: params.alpha_nlos,
            m: 1,
        }
    }

    pub fn for_tag(params: &SystemParams, tag: LinkTag) -> Self {
        match tag {
            LinkTag::Los => Self::los(params),
            LinkTag::Nlos => Self::nlos(params),
        }
    }

    /// Both states paired with their probabilities at horizontal distance `r0`.
    pub fn mixture(params: &SystemParams, r0: f64) -> [(Self, f64); 2] {
        let p_los = los_probability(params, r0);
        [(Self::los(params), p_los), (Self::nlos(params), 1.0 - p_los)]
    }
}

/// Service class of a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RegionLabel {
    /// Served by the nearest ground station only.
    A1,
    /// Served jointly by the UAV and the nearest ground station.
    A2,
    /// Served by the UAV only.
    A3,
}

impl RegionLabel {
    /// Number of transmitters occupied by a user of this class.
    pub fn serving_count(self) -> u32 {
        match self {
            RegionLabel::A2 => 2,
            RegionLabel::A1 | RegionLabel::A3 => 1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            RegionLabel::A1 => 0,
            RegionLabel::A2 => 1,
            RegionLabel::A3 => 2,
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionLabel::A1 => "A1",
            RegionLabel::A2 => "A2",
            RegionLabel::A3 => "A3",
        };
        f.write_str(s)
    }
}

/// Elevation angle from a user at horizontal distance `r0` to the UAV, in
/// degrees.
pub fn elevation_deg(uav_height: f64, r0: f64) -> f64 {
    uav_height.atan2(r0).to_degrees()
}

/// Probability that the UAV link is line-of-sight. The environment constants
/// `B`, `C` are calibrated for an elevation angle in degrees.
pub fn los_probability(params: &SystemParams, r0: f64) -> f64 {
    let phi = elevation_deg(params.uav_height, r0);
    1.0 / (1.0 + params.env_c * (-params.env_b * (phi - params.env_c)).exp())
}

pub fn nlos_probability(params: &SystemParams, r0: f64) -> f64 {
    1.0 - los_probability(params, r0)
}

/// Mean UAV link gain `(H² + r0²)^(-α/2)` under the given link state.
pub fn average_gain(state: &LinkState, r0: f64, uav_height: f64) -> Result<f64> {
    let d2 = uav_height * uav_height + r0 * r0;
    if !(d2 > 0.0) {
        return Err(Error::domain("UAV link length is zero"));
    }
    Ok(d2.powf(-0.5 * state.alpha))
}

/// Mean ground link gain `r^(-α_N)`.
pub fn ground_gain(alpha_nlos: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("ground link length must be positive, got {r}")));
    }
    Ok(r.powf(-alpha_nlos))
}

/// Inverse mean UAV path gain `d^α` with `d = sqrt(H² + r0²)`.
pub(crate) fn uav_path_loss(state: &LinkState, r0: f64, uav_height: f64) -> f64 {
    (uav_height * uav_height + r0 * r0).powf(0.5 * state.alpha)
}

/// A distance bound that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Unbounded,
}

impl Bound {
    pub fn as_f64(self) -> f64 {
        match self {
            Bound::Finite(v) => v,
            Bound::Unbounded => f64::INFINITY,
        }
    }

    pub fn min(self, cap: f64) -> f64 {
        match self {
            Bound::Finite(v) => v.min(cap),
            Bound::Unbounded => cap,
        }
    }
}

/// Nearest-station distances separating the three service classes for a
/// given user position and link state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionThresholds {
    /// At or below this distance the user is ground-served (`A1`).
    pub lower: f64,
    /// Above this distance the user is UAV-served (`A3`).
    pub upper: Bound,
}

pub fn region_thresholds(params: &SystemParams, state: &LinkState, r0: f64) -> RegionThresholds {
    let loss = uav_path_loss(state, r0, params.uav_height);
    let inv = 1.0 / params.alpha_nlos;
    let delta = params.delta;
    let lower = (delta * loss).powf(inv);
    let upper = if delta > 0.0 {
        Bound::Finite((loss / delta).powf(inv))
    } else {
        Bound::Unbounded
    };
    RegionThresholds { lower, upper }
}

/// Classifies a user by comparing the nearest-station path loss with the
/// UAV path loss scaled by `delta` and `1/delta`. Boundary ties fall into
/// the lower-numbered class.
pub fn assign_region(params: &SystemParams, state: &LinkState, r0: f64, r1: f64) -> RegionLabel {
    let loss = uav_path_loss(state, r0, params.uav_height);
    let ground = r1.powf(params.alpha_nlos);
    let delta = params.delta;
    if ground <= delta * loss {
        RegionLabel::A1
    } else if delta == 0.0 || ground * delta <= loss {
        RegionLabel::A2
    } else {
        RegionLabel::A3
    }
}
