//! Globally adaptive 21-point Gauss–Kronrod quadrature on finite intervals.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol·|I|)`. Error estimates follow the
//! usual QUADPACK rescaling, including its round-off floor, so smooth
//! integrands with huge dynamic range still terminate.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_532_141,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and subdivision budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One Gauss–Kronrod panel: `(integral, error, round-off floor)`.
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resabs = resk.abs();
    let mut resg = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let (resk, resabs, resasc) = (resk * half, resabs * h, resasc * h);
    let mut err = (resk - resg * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    (resk, err, floor)
}

/// `∫ f` over `[points[0], points[last]]`, with the interior points used as
/// initial breakpoints.
///
/// ```
/// use noma_secrecy::oracles::gauss_kronrod::{integrate, Tolerance};
///
/// let est = integrate(|x: f64| x.cos(), &[0.0, 1.0], Tolerance::new(0.0, 1e-12))?;
/// assert!((est.value - 1f64.sin()).abs() < 1e-14);
/// # Ok::<(), noma_secrecy::Error>(())
/// ```
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tolerance) -> Result<Estimate> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Convergence(format!(
            "integration breakpoints must be strictly increasing, got {points:?}"
        )));
    }
    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err, mut floor) = (0.0, 0.0, 0.0);
    for w in points.windows(2) {
        let (value, error, fl) = gk21(&mut f, w[0], w[1]);
        total += value;
        total_err += error;
        floor += fl;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    loop {
        let target = tol.abs.max(tol.rel * total.abs()).max(floor);
        if !total.is_finite() || !total_err.is_finite() {
            return Err(Error::Convergence("integrand produced a non-finite value".into()));
        }
        if total_err <= target {
            // Re-sum to shed drift from the running updates.
            let value = heap.iter().map(|s| s.value).sum();
            let error = heap.iter().map(|s| s.error).sum();
            return Ok(Estimate {
                value,
                error,
                intervals: heap.len(),
            });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Convergence(format!(
                "{} subintervals exhausted: estimate {total:e}, error {total_err:e}, target {target:e}",
                tol.max_intervals
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            return Err(Error::Convergence(format!(
                "interval [{:e}, {:e}] cannot be subdivided further (error {total_err:e}, target {target:e})",
                worst.a, worst.b
            )));
        }
        let (v1, e1, f1) = gk21(&mut f, worst.a, mid);
        let (v2, e2, f2) = gk21(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        floor += f1 + f2;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

/// Sorted, de-duplicated breakpoints: `a`, every interior hint, `b`.
pub fn breakpoints(a: f64, b: f64, hints: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = hints
        .into_iter()
        .filter(|&x| x.is_finite() && x > a && x < b)
        .collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-9 * y.abs().max(x.abs()));
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_is_exact_for_high_degree_polynomials() {
        let sum: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert!((sum - 2.0).abs() < 1e-15);
        let gsum: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((gsum - 2.0).abs() < 1e-15);
        // Kronrod is exact through degree 31, Gauss through 19.
        let (v, _, _) = gk21(&mut |x: f64| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-15);
        let (v, _, _) = gk21(&mut |x: f64| x.powi(18), -1.0, 1.0);
        assert!((v - 2.0 / 19.0).abs() < 1e-15);
    }

    #[test]
    fn adapts_to_a_sharp_peak() {
        let eps: f64 = 1e-4;
        let f = |x: f64| eps / (x * x + eps * eps);
        let est = integrate(f, &[-1.0, 1.0], Tolerance::new(0.0, 1e-10)).unwrap();
        let exact = 2.0 * (1.0 / eps).atan();
        assert!(((est.value - exact) / exact).abs() < 1e-10, "{est:?}");
        assert!(est.intervals > 10);
    }

    #[test]
    fn endpoint_log_singularity() {
        let est = integrate(|x: f64| x.ln(), &[0.0, 1.0], Tolerance::new(0.0, 1e-10)).unwrap();
        assert!((est.value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tol = Tolerance {
            abs: 0.0,
            rel: 1e-14,
            max_intervals: 3,
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), &[1e-3, 1.0], tol);
        assert!(matches!(r, Err(Error::Convergence(_))));
    }

    #[test]
    fn breakpoints_are_clean() {
        let pts = breakpoints(0.0, 1.0, [0.5, 2.0, -1.0, 0.5, f64::NAN, 0.25]);
        assert_eq!(pts, vec![0.0, 0.25, 0.5, 1.0]);
    }
}
