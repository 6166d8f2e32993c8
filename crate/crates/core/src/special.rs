//! Complex log-Gamma, log-sine and the Hurwitz zeta function.
//!
//! `ln_gamma` follows the branch that is continuous on C minus the negative
//! real axis: arguments with nonnegative real part are shifted upward and the
//! logarithms of the shift factors are summed individually, so the imaginary
//! part is never reduced modulo 2 pi. Hurwitz zeta is evaluated by
//! Euler-Maclaurin summation together with its analytic s-derivative.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LchiError, Result};
use crate::summation::ComplexSum;

/// B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Stirling series is used once |z| reaches this radius.
const STIRLING_RADIUS: f64 = 15.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn stirling(z: Complex64) -> Complex64 {
    let mut acc = (z - 0.5) * z.ln() - z + LN_SQRT_2PI;
    let z2 = z * z;
    let mut zpow = z;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(8) {
        let two_k = 2.0 * (k + 1) as f64;
        acc += b / (two_k * (two_k - 1.0)) / zpow;
        zpow *= z2;
    }
    acc
}

/// Principal-branch log Gamma (continuous off the negative real axis).
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return invalid("ln_gamma of a non-finite argument");
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(LchiError::Pole {
            function: "Gamma",
            sigma: z.re,
            t: 0.0,
        });
    }
    if z.re < 0.0 {
        // Reflection: Gamma(z) Gamma(1 - z) = pi / sin(pi z)
        let refl = ln_gamma(Complex64::new(1.0, 0.0) - z)?;
        return Ok(Complex64::new(PI.ln(), 0.0) - ln_sin(z * PI) - refl);
    }
    let mut shift = ComplexSum::new();
    let mut w = z;
    while w.norm() < STIRLING_RADIUS {
        shift.add(w.ln());
        w += 1.0;
    }
    Ok(stirling(w) - shift.value())
}

/// log sin(z), evaluated without overflow for large |Im z|. Any branch; intended for exponentiation.
pub fn ln_sin(z: Complex64) -> Complex64 {
    let i = c(0.0, 1.0);
    if z.im > 1.0 {
        // sin z = e^{-iz} (e^{2iz} - 1) / (2i)
        let small = (2.0 * i * z).exp();
        -i * z + ((small - 1.0) / (2.0 * i)).ln()
    } else if z.im < -1.0 {
        // sin z = e^{iz} (1 - e^{-2iz}) / (2i)
        let small = (-2.0 * i * z).exp();
        i * z + ((1.0 - small) / (2.0 * i)).ln()
    } else {
        z.sin().ln()
    }
}

/// Euler-Maclaurin parameters for the Hurwitz zeta function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerMaclaurin {
    /// Lower bound on the number of directly summed terms N.
    pub min_terms: usize,
    /// N grows as `terms_per_unit_t * |t|`.
    pub terms_per_unit_t: f64,
    /// Number of Bernoulli correction pairs M (at most 10).
    pub bernoulli_pairs: usize,
}

impl Default for EulerMaclaurin {
    fn default() -> Self {
        Self {
            min_terms: 20,
            terms_per_unit_t: 2.0,
            bernoulli_pairs: 8,
        }
    }
}

impl EulerMaclaurin {
    pub fn terms_for(&self, s: Complex64) -> usize {
        let by_t = (self.terms_per_unit_t * s.im.abs()).ceil() as usize;
        // Keep |s| / (2 pi N) small also when sigma is large and negative.
        let by_sigma = (2.0 * s.re.abs()).ceil() as usize;
        self.min_terms.max(by_t).max(by_sigma)
    }
}

/// Hurwitz zeta value and s-derivative without the pole term x^{1-s}/(s-1), where x = N + alpha.
#[derive(Debug, Clone, Copy)]
pub(crate) struct HurwitzParts {
    pub regular: Complex64,
    pub regular_d: Complex64,
    /// ln(N + alpha)
    pub log_x: f64,
}

/// (n + alpha)^{-s} with real base.
#[inline]
fn real_pow_neg(log_base: f64, s: Complex64) -> Complex64 {
    let mag = (-s.re * log_base).exp();
    let (sn, cs) = (s.im * log_base).sin_cos();
    c(mag * cs, -mag * sn)
}

pub(crate) fn hurwitz_parts(
    s: Complex64,
    alpha: f64,
    em: &EulerMaclaurin,
    with_derivative: bool,
) -> HurwitzParts {
    let n = em.terms_for(s);
    let mut sum = ComplexSum::new();
    let mut sum_d = ComplexSum::new();
    for k in 0..n {
        let lb = (k as f64 + alpha).ln();
        let term = real_pow_neg(lb, s);
        sum.add(term);
        if with_derivative {
            sum_d.add(-lb * term);
        }
    }
    let x = n as f64 + alpha;
    let log_x = x.ln();
    let x_neg_s = real_pow_neg(log_x, s);
    sum.add(0.5 * x_neg_s);
    if with_derivative {
        sum_d.add(-0.5 * log_x * x_neg_s);
    }
    // Correction terms B_2k/(2k)! (s)_{2k-1} x^{-s-2k+1}
    let mut rising = s;
    let mut rising_d = c(1.0, 0.0);
    let mut xpow = x_neg_s / x; // x^{-s-1}
    let mut factorial = 2.0;
    let pairs = em.bernoulli_pairs.min(BERNOULLI_EVEN.len());
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(pairs) {
        let coeff = b / factorial;
        sum.add(coeff * rising * xpow);
        if with_derivative {
            sum_d.add(coeff * (rising_d - log_x * rising) * xpow);
        }
        // advance (s)_{2k-1} -> (s)_{2k+1}
        let j = (2 * k + 1) as f64;
        for f in [s + j, s + j + 1.0] {
            rising_d = rising_d * f + rising;
            rising *= f;
        }
        xpow /= x * x;
        factorial *= (2 * k + 3) as f64 * (2 * k + 4) as f64;
    }
    HurwitzParts {
        regular: sum.value(),
        regular_d: sum_d.value(),
        log_x,
    }
}

/// x^{1-s} / (s - 1) and its s-derivative.
pub(crate) fn pole_term(log_x: f64, s: Complex64) -> (Complex64, Complex64) {
    let w = c(1.0, 0.0) - s;
    let xw = (w * log_x).exp();
    let inv = 1.0 / (s - 1.0);
    let value = xw * inv;
    let deriv = xw * (-log_x * inv - inv * inv);
    (value, deriv)
}

/// (e^z - 1)/z and its derivative, stable near z = 0.
pub(crate) fn expm1_ratio(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.5 {
        // sum_{k>=0} z^k/(k+1)! and sum_{k>=1} k z^{k-1}/(k+1)!
        let mut value = c(0.0, 0.0);
        let mut deriv = c(0.0, 0.0);
        let mut zk = c(1.0, 0.0); // z^k
        let mut zk1 = c(0.0, 0.0); // z^{k-1}
        let mut fact = 1.0; // (k+1)!
        for k in 0..30 {
            fact *= (k + 1) as f64;
            value += zk / fact;
            if k >= 1 {
                deriv += k as f64 * zk1 / fact;
            }
            zk1 = zk;
            zk *= z;
        }
        (value, deriv)
    } else {
        let ez = z.exp();
        let value = (ez - 1.0) / z;
        let deriv = (z * ez - ez + 1.0) / (z * z);
        (value, deriv)
    }
}

/// Hurwitz zeta zeta(s, alpha) for alpha in (0, 1].
pub fn hurwitz_zeta(s: Complex64, alpha: f64) -> Result<Complex64> {
    hurwitz_zeta_with(s, alpha, &EulerMaclaurin::default()).map(|(v, _)| v)
}

/// Hurwitz zeta value and s-derivative with explicit Euler-Maclaurin parameters.
pub fn hurwitz_zeta_with(
    s: Complex64,
    alpha: f64,
    em: &EulerMaclaurin,
) -> Result<(Complex64, Complex64)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return invalid(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    if !(s.re.is_finite() && s.im.is_finite()) {
        return invalid("non-finite s");
    }
    if s.re == 1.0 && s.im == 0.0 {
        return Err(LchiError::Pole {
            function: "Hurwitz zeta",
            sigma: 1.0,
            t: 0.0,
        });
    }
    let parts = hurwitz_parts(s, alpha, em, true);
    let (p, pd) = pole_term(parts.log_x, s);
    Ok((parts.regular + p, parts.regular_d + pd))
}
