//! Evaluation of L(s, chi), its logarithmic derivative, and the factor X_chi(s)
//! in the asymmetric functional equation L(s, chi) = X_chi(s) L(1 - s, conj chi).

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::VonMangoldtTable;
use crate::characters::DirichletCharacter;
use crate::error::{invalid, LchiError, Result};
use crate::gauss;
use crate::special::{self, EulerMaclaurin};
use crate::summation::ComplexSum;

/// Largest |t| accepted anywhere in the crate.
pub const T_CAP: f64 = 1000.0;

/// Below this modulus of L the logarithmic derivative is refused.
pub const NEAR_ZERO: f64 = 1e-10;

/// A point s = sigma + i t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub sigma: f64,
    pub t: f64,
}

impl ComplexPoint {
    pub fn new(sigma: f64, t: f64) -> Result<Self> {
        if !(sigma.is_finite() && t.is_finite()) {
            return invalid("complex point must have finite components");
        }
        Ok(Self { sigma, t })
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(s: Complex64) -> Self {
        Self {
            sigma: s.re,
            t: s.im,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum XMethod {
    Exact,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XFactorResult {
    pub value: Complex64,
    pub method: XMethod,
    /// Size of the neglected t^{-1} term; only set for the asymptotic form.
    pub relative_error_estimate: Option<f64>,
}

/// Quiet ordinate t_* in [t, t + 1] where |L'/L| stays small along a horizontal segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuietOrdinate {
    pub t_star: f64,
    /// max over the sigma grid and both signs of t_* of |L'/L(sigma +- i t_*)|.
    pub max_log_derivative: f64,
    /// Candidates skipped because a zero was detected next to them.
    pub skipped: Vec<f64>,
}

/// Abscissae probed by [`LFunction::find_quiet_ordinate`].
pub const QUIET_SIGMAS: [f64; 9] = [-1.0, -0.5, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0];
pub const QUIET_CANDIDATES: usize = 200;

/// Lambda(n) up to this bound backs the Dirichlet-series branch of L'/L.
const SERIES_TERMS: usize = 1 << 14;
const SERIES_TAIL_TOL: f64 = 1e-12;

fn series_table() -> &'static VonMangoldtTable {
    static TABLE: OnceLock<VonMangoldtTable> = OnceLock::new();
    TABLE.get_or_init(|| VonMangoldtTable::new(SERIES_TERMS))
}

/// Bound on sum_{n > N} log(n) n^{-sigma}.
fn series_tail_bound(sigma: f64, n: usize) -> f64 {
    let n = n as f64;
    let a = sigma - 1.0;
    n.powf(-a) * (n.ln() / a + 1.0 / (a * a))
}

/// L(s, chi) for a fixed character, with cached character data.
#[derive(Debug, Clone)]
pub struct LFunction {
    chi: DirichletCharacter,
    /// (alpha = a/q, chi(a)) for units a in 1..=q.
    residues: Vec<(f64, Complex64)>,
    principal: bool,
    log_q: f64,
    epsilon: Option<Complex64>,
    tau: Complex64,
    em: EulerMaclaurin,
}

impl LFunction {
    pub fn new(chi: &DirichletCharacter) -> Self {
        Self::with_params(chi, EulerMaclaurin::default())
    }

    pub fn with_params(chi: &DirichletCharacter, em: EulerMaclaurin) -> Self {
        let q = chi.modulus();
        let residues = (1..=q)
            .filter_map(|a| {
                let v = chi.value_u(a);
                (v.norm() > 0.0).then_some((a as f64 / q as f64, v))
            })
            .collect();
        Self {
            residues,
            principal: chi.is_principal(),
            log_q: (q as f64).ln(),
            epsilon: gauss::root_number(chi).ok(),
            tau: gauss::gauss_sum(chi),
            chi: chi.clone(),
            em,
        }
    }

    pub fn character(&self) -> &DirichletCharacter {
        &self.chi
    }

    pub fn modulus(&self) -> u64 {
        self.chi.modulus()
    }

    pub fn gauss_sum(&self) -> Complex64 {
        self.tau
    }

    pub fn root_number(&self) -> Result<Complex64> {
        self.epsilon.ok_or_else(|| {
            LchiError::InvalidArgument(format!("{} is not primitive", self.chi.describe()))
        })
    }

    fn check_point(&self, s: Complex64) -> Result<()> {
        if !(s.re.is_finite() && s.im.is_finite()) {
            return invalid("non-finite s");
        }
        if s.im.abs() > T_CAP {
            return Err(LchiError::Domain(format!(
                "|t| = {} exceeds the cap {T_CAP}",
                s.im.abs()
            )));
        }
        if self.principal && s.re == 1.0 && s.im == 0.0 {
            return Err(LchiError::Pole {
                function: "L(s, chi)",
                sigma: 1.0,
                t: 0.0,
            });
        }
        Ok(())
    }

    fn eval(&self, s: Complex64, with_derivative: bool) -> (Complex64, Complex64) {
        let mut regular = ComplexSum::new();
        let mut regular_d = ComplexSum::new();
        let mut pole = ComplexSum::new();
        let mut pole_d = ComplexSum::new();
        let w = Complex64::new(1.0, 0.0) - s;
        for &(alpha, chi_a) in &self.residues {
            let parts = special::hurwitz_parts(s, alpha, &self.em, with_derivative);
            regular.add(chi_a * parts.regular);
            if with_derivative {
                regular_d.add(chi_a * parts.regular_d);
            }
            if self.principal {
                let (p, pd) = special::pole_term(parts.log_x, s);
                pole.add(chi_a * p);
                pole_d.add(chi_a * pd);
            } else {
                // sum chi(a) = 0 removes the 1/(s-1) singularity exactly:
                // sum chi(a) x^w / (-w) = -sum chi(a) (x^w - 1) / w
                let l = parts.log_x;
                let (e1, e1d) = special::expm1_ratio(w * l);
                pole.add(-chi_a * l * e1);
                pole_d.add(chi_a * l * l * e1d);
            }
        }
        let sum = regular.value() + pole.value();
        let q_neg_s = (-s * self.log_q).exp();
        let value = q_neg_s * sum;
        if !with_derivative {
            return (value, Complex64::new(0.0, 0.0));
        }
        let sum_d = regular_d.value() + pole_d.value();
        (value, q_neg_s * (sum_d - self.log_q * sum))
    }

    /// L(s, chi) = q^{-s} sum_a chi(a) zeta(s, a/q).
    pub fn value(&self, s: Complex64) -> Result<Complex64> {
        self.check_point(s)?;
        Ok(self.eval(s, false).0)
    }

    /// (L(s, chi), L'(s, chi)).
    pub fn value_and_derivative(&self, s: Complex64) -> Result<(Complex64, Complex64)> {
        self.check_point(s)?;
        Ok(self.eval(s, true))
    }

    /// L'/L(s, chi). Far right of the critical strip the Dirichlet series is summed
    /// directly when its tail bound is below 1e-12; elsewhere L' comes from the
    /// term-by-term derivative of the Euler-Maclaurin expansion.
    pub fn log_derivative(&self, s: Complex64) -> Result<Complex64> {
        self.check_point(s)?;
        if s.re > 1.0 && series_tail_bound(s.re, SERIES_TERMS) <= SERIES_TAIL_TOL {
            return Ok(self.log_derivative_series(s, SERIES_TERMS));
        }
        let (l, ld) = self.eval(s, true);
        if l.norm() < NEAR_ZERO {
            return Err(LchiError::NearZero {
                sigma: s.re,
                t: s.im,
                modulus: l.norm(),
            });
        }
        Ok(ld / l)
    }

    /// -sum_{n <= terms} Lambda(n) chi(n) n^{-s}.
    pub fn log_derivative_series(&self, s: Complex64, terms: usize) -> Complex64 {
        let owned;
        let table = if terms <= SERIES_TERMS {
            series_table()
        } else {
            owned = VonMangoldtTable::new(terms);
            &owned
        };
        let mut acc = ComplexSum::new();
        for (n, lambda) in table.prime_powers(2, terms) {
            let chi_n = self.chi.value_u(n as u64);
            if chi_n.norm() == 0.0 {
                continue;
            }
            acc.add(-lambda * chi_n * (-s * (n as f64).ln()).exp());
        }
        acc.value()
    }

    /// X_chi(s) = eps 2^s pi^{s-1} q^{1/2-s} Gamma(1-s) sin(pi (s + kappa)/2), in log space.
    pub fn x_factor_exact(&self, s: Complex64) -> Result<XFactorResult> {
        let eps = self.root_number()?;
        if !(s.re.is_finite() && s.im.is_finite()) {
            return invalid("non-finite s");
        }
        if s.im.abs() > T_CAP {
            return Err(LchiError::Domain(format!("|t| exceeds the cap {T_CAP}")));
        }
        let kappa = self.chi.kappa() as f64;
        if s.im == 0.0 && s.re >= 1.0 && s.re == s.re.round() {
            let sine_vanishes = ((s.re + kappa) as i64) % 2 == 0;
            return Err(if sine_vanishes {
                LchiError::Domain(format!(
                    "X_chi at s = {} is a Gamma pole times a sine zero",
                    s.re
                ))
            } else {
                LchiError::Pole {
                    function: "X_chi",
                    sigma: s.re,
                    t: 0.0,
                }
            });
        }
        let one = Complex64::new(1.0, 0.0);
        let log = s * 2f64.ln()
            + (s - 1.0) * PI.ln()
            + (0.5 - s) * self.log_q
            + special::ln_gamma(one - s)?
            + special::ln_sin((s + kappa) * (PI / 2.0));
        Ok(XFactorResult {
            value: eps * log.exp(),
            method: XMethod::Exact,
            relative_error_estimate: None,
        })
    }

    /// Main term of X_chi(1 - c - it) for t >= 1:
    /// tau(chi) q^{c-1} e^{-pi i/4} exp(i t log(q t / (2 pi e))) (t / 2 pi)^{c - 1/2}.
    pub fn x_factor_asymptotic(&self, c: f64, t: f64) -> Result<XFactorResult> {
        if !(t >= 1.0) {
            return invalid(format!("asymptotic X_chi needs t >= 1, got {t}"));
        }
        if !c.is_finite() {
            return invalid("non-finite c");
        }
        let q = self.modulus() as f64;
        let phase = t * (q * t / (2.0 * PI * std::f64::consts::E)).ln() - PI / 4.0;
        let modulus = q.powf(c - 1.0) * (t / (2.0 * PI)).powf(c - 0.5);
        Ok(XFactorResult {
            value: self.tau * Complex64::from_polar(modulus, phase),
            method: XMethod::Asymptotic,
            relative_error_estimate: Some(1.0 / t),
        })
    }

    /// Phase theta(t) with e^{i theta} L(1/2 + it, chi) real.
    pub fn z_phase(&self, t: f64) -> Result<f64> {
        let eps = self.root_number()?;
        let kappa = self.chi.kappa() as f64;
        let g = special::ln_gamma(Complex64::new((0.5 + kappa) / 2.0, t / 2.0))?;
        Ok(-eps.arg() / 2.0 + 0.5 * t * (self.log_q - PI.ln()) + g.im)
    }

    /// Rotated Hardy function Z_chi(t) = e^{i theta(t)} L(1/2 + it, chi), real for primitive chi.
    pub fn z_function(&self, t: f64) -> Result<f64> {
        let theta = self.z_phase(t)?;
        let l = self.value(Complex64::new(0.5, t))?;
        let z = Complex64::from_polar(1.0, theta) * l;
        if z.im.abs() > 1e-7 * (1.0 + z.norm()) {
            return Err(LchiError::PhaseContinuation {
                t,
                residue: z.im,
            });
        }
        Ok(z.re)
    }

    /// max over [`QUIET_SIGMAS`] and both signs of |L'/L(sigma +- i t)|.
    pub fn quiet_profile(&self, t: f64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &sigma in &QUIET_SIGMAS {
            for sign in [1.0, -1.0] {
                let v = self.log_derivative(Complex64::new(sigma, sign * t))?;
                worst = worst.max(v.norm());
            }
        }
        Ok(worst)
    }

    /// Scans 200 ordinates in [t, t + 1] and returns the one minimizing [`Self::quiet_profile`].
    /// Candidates next to a sign change of Z(+-t) are skipped.
    pub fn find_quiet_ordinate(&self, t: f64) -> Result<QuietOrdinate> {
        if !(t >= 2.0) {
            return invalid(format!("quiet ordinate search needs t >= 2, got {t}"));
        }
        let n = QUIET_CANDIDATES;
        let grid: Vec<f64> = (0..n).map(|j| t + j as f64 / (n - 1) as f64).collect();
        let mut near_zero = vec![false; n];
        for sign in [1.0, -1.0] {
            let z: Vec<f64> = grid
                .iter()
                .map(|&x| self.z_function(sign * x))
                .collect::<Result<_>>()?;
            for j in 0..n - 1 {
                if z[j] == 0.0 || z[j].signum() != z[j + 1].signum() {
                    near_zero[j] = true;
                    near_zero[j + 1] = true;
                }
            }
        }
        let mut best: Option<(f64, f64)> = None;
        let mut skipped = Vec::new();
        for (j, &x) in grid.iter().enumerate() {
            if near_zero[j] {
                skipped.push(x);
                continue;
            }
            let v = match self.quiet_profile(x) {
                Ok(v) => v,
                Err(LchiError::NearZero { .. }) => {
                    skipped.push(x);
                    continue;
                }
                Err(e) => return Err(e),
            };
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((x, v));
            }
        }
        let (t_star, max_log_derivative) = best.ok_or_else(|| {
            LchiError::Domain(format!("every candidate in [{t}, {}] was skipped", t + 1.0))
        })?;
        Ok(QuietOrdinate {
            t_star,
            max_log_derivative,
            skipped,
        })
    }
}

/// Hurwitz zeta at a [`ComplexPoint`].
pub fn hurwitz_zeta(s: ComplexPoint, alpha: f64) -> Result<Complex64> {
    special::hurwitz_zeta(s.to_complex(), alpha)
}

pub fn l_value(s: ComplexPoint, chi: &DirichletCharacter) -> Result<Complex64> {
    LFunction::new(chi).value(s.to_complex())
}

pub fn log_derivative(s: ComplexPoint, chi: &DirichletCharacter) -> Result<Complex64> {
    LFunction::new(chi).log_derivative(s.to_complex())
}

pub fn x_factor_exact(s: ComplexPoint, chi: &DirichletCharacter) -> Result<XFactorResult> {
    LFunction::new(chi).x_factor_exact(s.to_complex())
}

pub fn x_factor_asymptotic(c: f64, t: f64, chi: &DirichletCharacter) -> Result<XFactorResult> {
    LFunction::new(chi).x_factor_asymptotic(c, t)
}

pub fn find_quiet_ordinate(chi: &DirichletCharacter, t: f64) -> Result<QuietOrdinate> {
    LFunction::new(chi).find_quiet_ordinate(t)
}

/// |L(s, chi) - X_chi(s) L(1 - s, conj chi)|, both sides from independent Hurwitz evaluations.
pub fn functional_equation_residual(s: Complex64, chi: &DirichletCharacter) -> Result<FeResidual> {
    let lf = LFunction::new(chi);
    let lf_bar = LFunction::new(&chi.conj());
    let one = Complex64::new(1.0, 0.0);
    let l = lf.value(s)?;
    let x = lf.x_factor_exact(s)?.value;
    let x_bar = lf_bar.x_factor_exact(one - s)?.value;
    let l_reflected = lf_bar.value(one - s)?;
    Ok(FeResidual {
        l_value: l,
        residual: (l - x * l_reflected).norm(),
        reciprocal: (x * x_bar - 1.0).norm(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeResidual {
    pub l_value: Complex64,
    /// |L(s, chi) - X_chi(s) L(1-s, conj chi)|
    pub residual: f64,
    /// |X_chi(s) X_{conj chi}(1-s) - 1|
    pub reciprocal: f64,
}
