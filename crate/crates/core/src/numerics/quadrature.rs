//! Globally adaptive Gauss–Kronrod (7, 15) quadrature over vector-valued
//! integrands, with caller-supplied panel boundaries.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for [`Quadrature::integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_intervals: 1000,
        }
    }
}

struct Panel<const K: usize> {
    lo: f64,
    hi: f64,
    value: [f64; K],
    error: f64,
}

fn gk15<const K: usize>(f: &mut impl FnMut(f64) -> [f64; K], lo: f64, hi: f64) -> Panel<K> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = [0.0; K];
    let mut gauss = [0.0; K];
    let mut abs_sum = [0.0; K];
    let mut samples = [[0.0; K]; 15];
    samples[7] = fc;
    for c in 0..K {
        kronrod[c] = WGK[7] * fc[c];
        gauss[c] = WG[3] * fc[c];
        abs_sum[c] = WGK[7] * fc[c].abs();
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        samples[j] = f1;
        samples[14 - j] = f2;
        for c in 0..K {
            kronrod[c] += WGK[j] * (f1[c] + f2[c]);
            abs_sum[c] += WGK[j] * (f1[c].abs() + f2[c].abs());
            if j % 2 == 1 {
                gauss[c] += WG[j / 2] * (f1[c] + f2[c]);
            }
        }
    }
    let mut value = [0.0; K];
    let mut error: f64 = 0.0;
    for c in 0..K {
        let mean = 0.5 * kronrod[c];
        let mut asc = WGK[7] * (fc[c] - mean).abs();
        for j in 0..7 {
            asc += WGK[j] * ((samples[j][c] - mean).abs() + (samples[14 - j][c] - mean).abs());
        }
        let resasc = asc * half.abs();
        let resabs = abs_sum[c] * half.abs();
        let mut err = ((kronrod[c] - gauss[c]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * resabs;
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor > err {
            err = floor;
        }
        value[c] = kronrod[c] * half;
        error = error.max(err);
    }
    Panel { lo, hi, value, error }
}

impl Quadrature {
    pub fn with_tolerance(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    /// Integrates a `K`-component integrand over `[a, b]`.
    ///
    /// `breakpoints` inside `(a, b)` become initial panel edges; points where
    /// the integrand or its derivative jumps belong there. The error norm is
    /// the largest component error, and the stopping rule is
    /// `error <= max(abs_tol, rel_tol * max_c |I_c|)`. Returns zeros when
    /// `b <= a`.
    pub fn integrate<const K: usize>(
        &self,
        mut f: impl FnMut(f64) -> [f64; K],
        a: f64,
        b: f64,
        breakpoints: &[f64],
    ) -> Result<[f64; K]> {
        if !(b > a) {
            return Ok([0.0; K]);
        }
        let mut edges: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&x| x > a && x < b && x.is_finite())
            .collect();
        edges.push(a);
        edges.push(b);
        edges.sort_by(f64::total_cmp);
        edges.dedup();

        let mut panels: Vec<Panel<K>> = edges
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| gk15(&mut f, w[0], w[1]))
            .collect();

        loop {
            let mut total = [0.0; K];
            let mut error = 0.0;
            for p in &panels {
                for c in 0..K {
                    total[c] += p.value[c];
                }
                error += p.error;
            }
            let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let tolerance = self.abs_tol.max(self.rel_tol * scale);
            if error <= tolerance {
                return Ok(total);
            }
            let (worst, _) = panels
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .expect("at least one panel");
            let (lo, hi) = (panels[worst].lo, panels[worst].hi);
            let mid = 0.5 * (lo + hi);
            let too_narrow = !(mid > lo && mid < hi) || (hi - lo) <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs());
            if panels.len() >= self.max_intervals || too_narrow || !error.is_finite() {
                return Err(Error::Integration {
                    lo: a,
                    hi: b,
                    error,
                    tolerance,
                });
            }
            let left = gk15(&mut f, lo, mid);
            let right = gk15(&mut f, mid, hi);
            panels[worst] = left;
            panels.push(right);
        }
    }

    /// Scalar convenience wrapper around [`Quadrature::integrate`].
    pub fn integrate_scalar(
        &self,
        mut f: impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        breakpoints: &[f64],
    ) -> Result<f64> {
        self.integrate(|x| [f(x)], a, b, breakpoints).map(|[v]| v)
    }
}

/// Finds a root of `f` in `[lo, hi]` by bisection. The endpoint values must
/// not share a sign.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::domain(format!(
            "bisection bracket [{lo}, {hi}] has no sign change"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
