//! Numerical quadrature: adaptive Gauss-Kronrod (7/15) for smooth integrands and
//! frequency-adaptive Gauss-Legendre panels for oscillatory ones.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LchiError, Result};
use crate::summation::ComplexSum;

// QUADPACK qk15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Kronrod estimate, Gauss estimate.
fn gk15<F>(f: &F, a: f64, b: f64) -> Result<(Complex64, Complex64)>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx)? + f(c + dx)?;
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Ok((kronrod * h, gauss * h))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: Complex64,
    pub error_estimate: f64,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Default cap on the number of subintervals in [`adaptive`].
pub const DEFAULT_MAX_INTERVALS: usize = 4000;

/// Globally adaptive Gauss-Kronrod: bisects the interval with the largest
/// |K15 - G7| until the summed estimate is below `max(abs_tol, rel_tol |I|)`.
pub fn adaptive<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_intervals: usize) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<Complex64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(LchiError::Quadrature("non-finite integration limits".into()));
    }
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            intervals: 0,
        });
    }
    let (k, g) = gk15(&f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Piece {
        a,
        b,
        value: k,
        error: (k - g).norm(),
    });
    loop {
        let total: Complex64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if error <= abs_tol.max(rel_tol * total.norm()) {
            // Sum in interval order so the result does not depend on heap layout.
            let mut pieces = heap.into_vec();
            pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
            let mut acc = ComplexSum::new();
            for p in &pieces {
                acc.add(p.value);
            }
            return Ok(QuadResult {
                value: acc.value(),
                error_estimate: error,
                intervals: pieces.len(),
            });
        }
        if heap.len() >= max_intervals {
            return Err(LchiError::Quadrature(format!(
                "adaptive quadrature on [{a}, {b}] did not reach tolerance within {max_intervals} intervals (error estimate {error:e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(LchiError::Quadrature(format!(
                "interval around {mid} cannot be subdivided further"
            )));
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (k, g) = gk15(&f, lo, hi)?;
            heap.push(Piece {
                a: lo,
                b: hi,
                value: k,
                error: (k - g).norm(),
            });
        }
    }
}

/// Real-valued convenience wrapper around [`adaptive`].
pub fn adaptive_real<F>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let r = adaptive(
        |x| Ok(Complex64::new(f(x), 0.0)),
        a,
        b,
        abs_tol,
        0.0,
        DEFAULT_MAX_INTERVALS,
    )?;
    Ok(r.value.re)
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Settings for [`oscillatory`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatoryOptions {
    /// Gauss-Legendre nodes per panel; each panel spans at most one local oscillation.
    pub nodes_per_oscillation: usize,
    /// Upper bound on a panel's width where the phase is nearly stationary.
    pub max_panel_width: f64,
    /// Required agreement between the base and doubled node counts.
    pub self_consistency: f64,
    /// Refinement stops with an error once more panels than this are needed.
    pub panel_budget: usize,
}

impl Default for OscillatoryOptions {
    fn default() -> Self {
        Self {
            nodes_per_oscillation: 20,
            max_panel_width: 1.0,
            self_consistency: 1e-6,
            panel_budget: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatoryResult {
    /// Estimate with the doubled node count.
    pub value: Complex64,
    /// Estimate with the base node count.
    pub base: Complex64,
    /// |value - base|.
    pub self_consistency: f64,
    pub panels: usize,
}

fn panel_edges<W>(a: f64, b: f64, omega: &W, max_width: f64) -> Vec<f64>
where
    W: Fn(f64) -> f64,
{
    let mut edges = vec![a];
    let mut t = a;
    while t < b {
        let mut w = max_width;
        let here = omega(t).abs();
        if here > 0.0 {
            w = w.min(2.0 * PI / here);
        }
        let there = omega((t + w).min(b)).abs();
        if there > 0.0 {
            w = w.min(2.0 * PI / there);
        }
        t = if t + w >= b || b - (t + w) < 1e-12 * w { b } else { t + w };
        edges.push(t);
    }
    edges
}

fn panel_sum<F>(f: &F, edges: &[f64], nodes: &[f64], weights: &[f64]) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let parts: Vec<Complex64> = edges
        .par_windows(2)
        .map(|e| {
            let c = 0.5 * (e[0] + e[1]);
            let h = 0.5 * (e[1] - e[0]);
            let mut acc = ComplexSum::new();
            for (x, w) in nodes.iter().zip(weights) {
                acc.add(f(c + h * x)? * *w);
            }
            Ok(acc.value() * h)
        })
        .collect::<Result<_>>()?;
    let mut total = ComplexSum::new();
    for p in parts {
        total.add(p);
    }
    Ok(total.value())
}

/// Integrates an oscillatory `f` over [a, b] on panels no wider than one period
/// `2 pi / omega(t)` of the local angular frequency, with `n` and `2n` nodes per
/// panel. Panels are halved until the two estimates agree.
pub fn oscillatory<F, W>(f: F, a: f64, b: f64, omega: W, opts: &OscillatoryOptions) -> Result<OscillatoryResult>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
    W: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(LchiError::Quadrature(format!("invalid interval [{a}, {b}]")));
    }
    let n = opts.nodes_per_oscillation.max(2);
    let (x1, w1) = gauss_legendre(n);
    let (x2, w2) = gauss_legendre(2 * n);
    let mut refine = 1.0;
    loop {
        let edges = panel_edges(a, b, &|t| omega(t) * refine, opts.max_panel_width / refine);
        let panels = edges.len() - 1;
        if panels > opts.panel_budget {
            return Err(LchiError::Quadrature(format!(
                "oscillatory quadrature on [{a}, {b}] needs more than {} panels",
                opts.panel_budget
            )));
        }
        let base = panel_sum(&f, &edges, &x1, &w1)?;
        let value = panel_sum(&f, &edges, &x2, &w2)?;
        let diff = (value - base).norm();
        if diff <= opts.self_consistency {
            return Ok(OscillatoryResult {
                value,
                base,
                self_consistency: diff,
                panels,
            });
        }
        refine *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_and_gauss_exact_on_polynomials() {
        // G7 is exact through degree 13, K15 through degree 22.
        for deg in 0..=22u32 {
            let f = |x: f64| Ok(Complex64::new(x.powi(deg as i32), 0.0));
            let (k, g) = gk15(&f, 0.0, 2.0).unwrap();
            let exact = 2f64.powi(deg as i32 + 1) / (deg as f64 + 1.0);
            assert!((k.re - exact).abs() < 1e-12 * exact, "K15 degree {deg}");
            if deg <= 13 {
                assert!((g.re - exact).abs() < 1e-12 * exact, "G7 degree {deg}");
            }
        }
    }

    #[test]
    fn legendre_nodes_integrate_polynomials() {
        for n in [1usize, 2, 5, 20, 40] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..(2 * n) as i32 {
                let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((s - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
            for win in x.windows(2) {
                assert!(win[0] < win[1]);
            }
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let r = adaptive_real(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-12).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r - exact).abs() < 1e-9 * exact);
        let r = adaptive_real(|x| x.sqrt(), 0.0, 1.0, 1e-12).unwrap();
        assert!((r - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_budget_exhaustion() {
        let r = adaptive(
            |x| Ok(Complex64::new((1.0 / x).sin() / x, 0.0)),
            1e-9,
            1.0,
            1e-14,
            0.0,
            10,
        );
        assert!(matches!(r, Err(LchiError::Quadrature(_))));
    }

    #[test]
    fn oscillatory_matches_closed_form() {
        // chirp with linearly growing frequency
        let f = |t: f64| Ok(Complex64::from_polar(1.0, t * t / 2.0));
        let r = oscillatory(f, 0.0, 30.0, |t| t, &OscillatoryOptions::default()).unwrap();
        assert!(r.self_consistency <= 1e-6);
        // exp(i a t) with constant frequency has a closed form
        let a = 7.3;
        let g = |t: f64| Ok(Complex64::from_polar(1.0, a * t));
        let r = oscillatory(g, 1.0, 50.0, |_| a, &OscillatoryOptions::default()).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let exact = ((i * a * 50.0).exp() - (i * a).exp()) / (i * a);
        assert!((r.value - exact).norm() < 1e-12);
    }
}
