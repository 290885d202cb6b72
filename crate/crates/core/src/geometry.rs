//! Distance from a user inside the malfunction disc to its nearest working
//! ground base station.
//!
//! Ground stations form a Poisson process of density `λ` on the plane minus
//! the disc `{|y| <= R_c}`. For a user at distance `r0` from the centre, the
//! probability that no station lies within `r` is `exp(-λ S(r))`, where
//! `S(r)` is the part of the radius-`r` disc around the user that falls
//! outside the malfunction disc.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::bisect;
use crate::params::SystemParams;

/// Tail mass left beyond [`HoleGeometry::truncation_radius`] by default.
pub const DEFAULT_TAIL: f64 = 1e-8;

/// A user position relative to the malfunction disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleGeometry {
    pub r0: f64,
    pub radius_rc: f64,
    pub bs_density: f64,
}

/// Which of the three closed forms of `S(r)` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LensRegime {
    /// `r <= R_c - r0`: the whole disc around the user is inside the hole.
    Inside,
    /// `R_c - r0 < r < R_c + r0`: partial overlap.
    Lens,
    /// `r >= R_c + r0`: the disc around the user contains the hole.
    Outside,
}

impl HoleGeometry {
    pub fn new(r0: f64, radius_rc: f64, bs_density: f64) -> Result<Self> {
        if !(radius_rc > 0.0) || !(bs_density > 0.0) {
            return Err(Error::domain(format!(
                "hole geometry needs R_c > 0 and λ > 0, got R_c = {radius_rc}, λ = {bs_density}"
            )));
        }
        if !(0.0..=radius_rc).contains(&r0) {
            return Err(Error::domain(format!(
                "user distance r0 = {r0} must lie in [0, R_c = {radius_rc}]"
            )));
        }
        Ok(Self {
            r0,
            radius_rc,
            bs_density,
        })
    }

    pub fn from_params(params: &SystemParams, r0: f64) -> Result<Self> {
        Self::new(r0, params.radius_rc, params.bs_density)
    }

    /// Smallest feasible nearest-station distance, `R_c - r0`.
    pub fn min_distance(&self) -> f64 {
        self.radius_rc - self.r0
    }

    pub fn regime(&self, r: f64) -> LensRegime {
        if r <= self.radius_rc - self.r0 {
            LensRegime::Inside
        } else if self.r0 > 0.0 && r < self.radius_rc + self.r0 {
            LensRegime::Lens
        } else {
            LensRegime::Outside
        }
    }

    /// Half-angle at the disc centre subtended by the chord where the two
    /// circles intersect.
    pub fn theta1(&self, r: f64) -> f64 {
        let (rc, r0) = (self.radius_rc, self.r0);
        clamped_acos((rc * rc + r0 * r0 - r * r) / (2.0 * rc * r0))
    }

    /// Half-angle at the user, measured from the direction to the disc
    /// centre, of the arc of the radius-`r` circle lying inside the hole.
    pub fn theta2(&self, r: f64) -> f64 {
        let (rc, r0) = (self.radius_rc, self.r0);
        clamped_acos((r0 * r0 + r * r - rc * rc) / (2.0 * r0 * r))
    }

    /// Area of the radius-`r` disc around the user lying outside the hole.
    pub fn lens_exclusion_area(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("lens radius must be positive, got {r}")));
        }
        Ok(self.exclusion_area(r))
    }

    fn exclusion_area(&self, r: f64) -> f64 {
        let rc = self.radius_rc;
        match self.regime(r) {
            LensRegime::Inside => 0.0,
            LensRegime::Outside => PI * (r * r - rc * rc),
            LensRegime::Lens => {
                let t1 = self.theta1(r);
                let t2 = self.theta2(r);
                let cap_hole = rc * rc * (t1 - t1.sin() * t1.cos());
                let cap_user = r * r * (t2 - t2.sin() * t2.cos());
                (PI * r * r - cap_hole - cap_user).max(0.0)
            }
        }
    }

    /// `dS/dr`: the length of the radius-`r` circle lying outside the hole.
    pub fn exclusion_area_rate(&self, r: f64) -> f64 {
        match self.regime(r) {
            LensRegime::Inside => 0.0,
            LensRegime::Outside => 2.0 * PI * r,
            LensRegime::Lens => 2.0 * r * (PI - self.theta2(r)),
        }
    }

    pub fn nearest_bs_cdf(&self, r: f64) -> f64 {
        if r <= self.min_distance() {
            return 0.0;
        }
        -(-self.bs_density * self.exclusion_area(r)).exp_m1()
    }

    pub fn nearest_bs_pdf(&self, r: f64) -> f64 {
        if r <= self.min_distance() {
            return 0.0;
        }
        let lam = self.bs_density;
        lam * self.exclusion_area_rate(r) * (-lam * self.exclusion_area(r)).exp()
    }

    /// Distance beyond which the nearest station lies with probability at
    /// most `tail`.
    pub fn truncation_radius(&self, tail: f64) -> f64 {
        let target = -tail.ln() / self.bs_density;
        let rc = self.radius_rc;
        let outer = (rc * rc + target / PI).sqrt();
        let edge = rc + self.r0;
        if outer >= edge || self.r0 == 0.0 {
            return outer;
        }
        // S is increasing on the lens interval and reaches the target there
        bisect(
            |r| self.exclusion_area(r) - target,
            self.min_distance(),
            edge,
            1e-9 * edge,
        )
        .unwrap_or(edge)
    }

    /// Interior kinks of the distance law, for use as quadrature breakpoints.
    pub fn breakpoints(&self) -> [f64; 2] {
        [self.radius_rc - self.r0, self.radius_rc + self.r0]
    }
}

pub(crate) fn clamped_acos(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).acos()
}
