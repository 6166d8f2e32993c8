//! The dual sums: Sigma_1 over critical-line zeros and Sigma_2 over prime
//! powers, with sharp cutoffs or smooth weights.
//!
//! Sigma_1 only sees zeros the scanner located on the critical line, so each
//! zero is taken as rho = 1/2 + i gamma. Off-line zeros would go unnoticed.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::VonMangoldtTable;
use crate::bump::BumpWeight;
use crate::characters::{unit_root, DirichletCharacter, RationalXi};
use crate::error::{invalid, LchiError, Result};
use crate::gauss::{c_tilde, gauss_sum};
use crate::lfunc::LFunction;
use crate::quad;
use crate::summation::ComplexSum;
use crate::zeros::ZeroList;

/// Relative slack when comparing an integer against a floating cutoff such as
/// qT / (2 pi xi), so that cutoffs meant to be integers survive rounding.
const CUTOFF_SLACK: f64 = 1e-12;

/// Absolute tolerance for each panel integral in the Stieltjes forms.
const STIELTJES_PANEL_TOL: f64 = 1e-14;

/// The twist parameter xi > 0: rational for exact phases, or a general real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Xi {
    Rational(RationalXi),
    Real(f64),
}

impl Xi {
    pub fn real(x: f64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return invalid(format!("xi must be a positive real, got {x}"));
        }
        Ok(Xi::Real(x))
    }

    pub fn value(&self) -> f64 {
        match self {
            Xi::Rational(r) => r.value(),
            Xi::Real(x) => *x,
        }
    }

    /// e(-n xi / q), exact for rational xi.
    pub fn twist(&self, n: u64, q: u64) -> Complex64 {
        match self {
            Xi::Rational(r) => {
                let den = r.k() as u128 * q as u128;
                let num = (n as u128 * r.h() as u128) % den;
                unit_root(((den - num) % den) as u64, den as u64)
            }
            Xi::Real(x) => {
                let y = n as f64 * x / q as f64;
                Complex64::from_polar(1.0, -2.0 * PI * (y - y.floor()))
            }
        }
    }
}

impl From<RationalXi> for Xi {
    fn from(r: RationalXi) -> Self {
        Xi::Rational(r)
    }
}

impl fmt::Display for Xi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Xi::Rational(r) => write!(f, "{r}"),
            Xi::Real(x) => write!(f, "{x}"),
        }
    }
}

fn floor_cutoff(x: f64) -> u64 {
    if !(x >= 1.0) {
        return 0;
    }
    (x * (1.0 + CUTOFF_SLACK)).floor() as u64
}

/// Sums `values[lo..hi]` in fixed-size shards, merging shard totals in index order.
fn sharded_sum(values: &[Complex64], shards: usize) -> Complex64 {
    if values.is_empty() {
        return Complex64::new(0.0, 0.0);
    }
    let size = values.len().div_ceil(shards.max(1));
    let parts: Vec<ComplexSum> = values
        .par_chunks(size)
        .map(|chunk| chunk.iter().copied().collect())
        .collect();
    let mut total = ComplexSum::new();
    for p in &parts {
        total.merge(p);
    }
    total.value()
}

/// Terms xi^{-rho} X_{chi-bar}(1 - rho) for the listed zeros with gamma > 0.
#[derive(Debug, Clone)]
pub struct ZeroTerms {
    gammas: Vec<f64>,
    terms: Vec<Complex64>,
    /// prefix[i] = sum of the first i terms, accumulated in ascending gamma.
    prefix: Vec<Complex64>,
    ceiling: f64,
    xi: f64,
}

impl ZeroTerms {
    pub fn new(chi: &DirichletCharacter, xi: &Xi, zeros: &ZeroList) -> Result<Self> {
        if zeros.modulus != chi.modulus() || zeros.label != chi.label() {
            return invalid(format!(
                "zero list belongs to q={} label {}, not {}",
                zeros.modulus,
                zeros.label,
                chi.describe()
            ));
        }
        let dual = LFunction::new(&chi.conj());
        let log_xi = xi.value().ln();
        let gammas: Vec<f64> = zeros.positive_up_to(f64::INFINITY).collect();
        let terms: Vec<Complex64> = gammas
            .par_iter()
            .map(|&g| {
                let rho = Complex64::new(0.5, g);
                let x = dual.x_factor_exact(Complex64::new(0.5, -g))?.value;
                Ok((-rho * log_xi).exp() * x)
            })
            .collect::<Result<_>>()?;
        let mut prefix = Vec::with_capacity(terms.len() + 1);
        let mut acc = ComplexSum::new();
        prefix.push(acc.value());
        for &t in &terms {
            acc.add(t);
            prefix.push(acc.value());
        }
        Ok(Self {
            gammas,
            terms,
            prefix,
            ceiling: zeros.ceiling,
            xi: xi.value(),
        })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn terms(&self) -> &[Complex64] {
        &self.terms
    }

    fn require(&self, height: f64) -> Result<()> {
        if height > self.ceiling {
            return Err(LchiError::InsufficientZeroCoverage {
                required: height,
                available: self.ceiling,
            });
        }
        Ok(())
    }

    fn count_up_to(&self, height: f64) -> usize {
        self.gammas.partition_point(|&g| g <= height)
    }

    /// Sigma_1(T).
    pub fn sigma1(&self, height: f64) -> Result<Complex64> {
        self.require(height)?;
        Ok(self.prefix[self.count_up_to(height)])
    }

    /// Sigma_1(T) summed in `shards` pieces merged in order.
    pub fn sigma1_sharded(&self, height: f64, shards: usize) -> Result<Complex64> {
        self.require(height)?;
        Ok(sharded_sum(&self.terms[..self.count_up_to(height)], shards))
    }

    fn smooth_height(&self, x: f64, bump: &BumpWeight) -> f64 {
        2.0 * PI * self.xi * x * bump.support().1
    }

    /// Sum over zeros weighted by B(gamma / (2 pi xi X)).
    pub fn smooth(&self, x: f64, bump: &BumpWeight) -> Result<Complex64> {
        check_x(x)?;
        self.require(self.smooth_height(x, bump))?;
        let scale = 2.0 * PI * self.xi * x;
        let (a, b) = bump.support();
        let mut acc = ComplexSum::new();
        for (g, t) in self.gammas.iter().zip(&self.terms) {
            let u = g / scale;
            if u > a && u < b {
                acc.add(*t * bump.value(u));
            }
        }
        Ok(acc.value())
    }

    /// -int B'(u) Sigma_1(2 pi xi X u) du by quadrature on the ordinate partition.
    pub fn smooth_stieltjes(&self, x: f64, bump: &BumpWeight) -> Result<Complex64> {
        check_x(x)?;
        self.require(self.smooth_height(x, bump))?;
        let scale = 2.0 * PI * self.xi * x;
        let jumps: Vec<f64> = self.gammas.iter().map(|g| g / scale).collect();
        stieltjes(&jumps, &self.prefix, bump)
    }
}

/// -int_a^b B'(u) S(u) du for a right-continuous step function S with
/// S(u) = prefix[#{j : jumps[j] <= u}].
fn stieltjes(jumps: &[f64], prefix: &[Complex64], bump: &BumpWeight) -> Result<Complex64> {
    let (a, b) = bump.support();
    let mut edges = vec![a];
    let mut levels = vec![prefix[jumps.partition_point(|&u| u <= a)]];
    for (j, &u) in jumps.iter().enumerate() {
        if u > a && u < b {
            edges.push(u);
            levels.push(prefix[j + 1]);
        }
    }
    edges.push(b);
    let pieces: Vec<Complex64> = edges
        .par_windows(2)
        .zip(levels.par_iter())
        .map(|(e, level)| {
            let w = quad::adaptive_real(|u| bump.derivative(u), e[0], e[1], STIELTJES_PANEL_TOL)?;
            Ok(-*level * w)
        })
        .collect::<Result<_>>()?;
    Ok(pieces.into_iter().collect::<ComplexSum>().value())
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return invalid(format!("X must be positive, got {x}"));
    }
    Ok(())
}

/// Terms (tau(chi-bar)/q) Lambda(n) chi(n) e(-n xi/q) for prime powers n up to a limit.
#[derive(Debug, Clone)]
pub struct PrimeTerms {
    ns: Vec<u64>,
    terms: Vec<Complex64>,
    prefix: Vec<Complex64>,
    limit: u64,
}

impl PrimeTerms {
    pub fn new(chi: &DirichletCharacter, xi: &Xi, limit: u64) -> Self {
        let q = chi.modulus();
        let scale = gauss_sum(&chi.conj()) / q as f64;
        let table = VonMangoldtTable::new(limit.max(1) as usize);
        let mut ns = Vec::new();
        let mut terms = Vec::new();
        for (n, lambda) in table.prime_powers(2, limit as usize) {
            let n = n as u64;
            let chi_n = chi.value_u(n);
            if chi_n.norm() == 0.0 {
                continue;
            }
            ns.push(n);
            terms.push(scale * chi_n * xi.twist(n, q) * lambda);
        }
        let mut prefix = Vec::with_capacity(terms.len() + 1);
        let mut acc = ComplexSum::new();
        prefix.push(acc.value());
        for &t in &terms {
            acc.add(t);
            prefix.push(acc.value());
        }
        Self {
            ns,
            terms,
            prefix,
            limit,
        }
    }

    fn count_up_to(&self, n: u64) -> usize {
        assert!(n <= self.limit, "prime-power table too short: {n} > {}", self.limit);
        self.ns.partition_point(|&m| m <= n)
    }

    /// Sum over n <= cutoff.
    pub fn partial(&self, cutoff: u64) -> Complex64 {
        self.prefix[self.count_up_to(cutoff)]
    }

    pub fn partial_sharded(&self, cutoff: u64, shards: usize) -> Complex64 {
        sharded_sum(&self.terms[..self.count_up_to(cutoff)], shards)
    }

    /// Sum over n weighted by B(n / (q X)).
    pub fn smooth(&self, q: u64, x: f64, bump: &BumpWeight) -> Complex64 {
        let scale = q as f64 * x;
        let (a, b) = bump.support();
        let hi = floor_cutoff(scale * b);
        let start = self.ns.partition_point(|&n| (n as f64) <= scale * a);
        let end = self.count_up_to(hi);
        let mut acc = ComplexSum::new();
        for i in start..end {
            let u = self.ns[i] as f64 / scale;
            if u > a && u < b {
                acc.add(self.terms[i] * bump.value(u));
            }
        }
        acc.value()
    }

    /// -int B'(u) Sigma_3(q X u) du by quadrature on the partition n / (q X).
    pub fn smooth_stieltjes(&self, q: u64, x: f64, bump: &BumpWeight) -> Result<Complex64> {
        check_x(x)?;
        let scale = q as f64 * x;
        let hi = floor_cutoff(scale * bump.support().1);
        assert!(hi <= self.limit, "prime-power table too short for X = {x}");
        let jumps: Vec<f64> = self.ns.iter().map(|&n| n as f64 / scale).collect();
        stieltjes(&jumps, &self.prefix, bump)
    }
}

/// Cutoff floor(q T / (2 pi xi)) of Sigma_2(T).
pub fn sigma2_cutoff(q: u64, xi: f64, height: f64) -> u64 {
    floor_cutoff(q as f64 * height / (2.0 * PI * xi))
}

fn check_height(height: f64) -> Result<()> {
    if !(height > 0.0 && height.is_finite()) {
        return invalid(format!("T must be positive, got {height}"));
    }
    Ok(())
}

/// Sigma_1(T) = sum over listed 0 < gamma <= T of xi^{-rho} X_{chi-bar}(1 - rho).
pub fn sigma1_sharp(chi: &DirichletCharacter, xi: &Xi, height: f64, zeros: &ZeroList) -> Result<Complex64> {
    check_height(height)?;
    zeros.require_coverage(height)?;
    ZeroTerms::new(chi, xi, zeros)?.sigma1(height)
}

/// Sigma_2(T) = (tau(chi-bar)/q) sum_{n <= qT/(2 pi xi)} Lambda(n) chi(n) e(-n xi/q).
pub fn sigma2_sharp(chi: &DirichletCharacter, xi: &Xi, height: f64) -> Result<Complex64> {
    check_height(height)?;
    let cutoff = sigma2_cutoff(chi.modulus(), xi.value(), height);
    if cutoff < 2 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(PrimeTerms::new(chi, xi, cutoff).partial(cutoff))
}

/// Smooth zero sum with weight B(gamma / (2 pi xi X)).
pub fn smooth_zero_sum(
    chi: &DirichletCharacter,
    xi: &Xi,
    x: f64,
    bump: &BumpWeight,
    zeros: &ZeroList,
) -> Result<Complex64> {
    ZeroTerms::new(chi, xi, zeros)?.smooth(x, bump)
}

/// Smooth prime sum (tau(chi-bar)/q) sum_n Lambda(n) chi(n) e(-n xi/q) B(n/(qX)).
pub fn smooth_prime_sum(chi: &DirichletCharacter, xi: &Xi, x: f64, bump: &BumpWeight) -> Result<Complex64> {
    check_x(x)?;
    let q = chi.modulus();
    let hi = floor_cutoff(q as f64 * x * bump.support().1);
    if hi < 2 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(PrimeTerms::new(chi, xi, hi).smooth(q, x, bump))
}

/// Smooth zero sum plus C_B * C-tilde_{chi,xi} * X.
pub fn grh_dagger_lhs(
    chi: &DirichletCharacter,
    xi: &RationalXi,
    x: f64,
    bump: &BumpWeight,
    zeros: &ZeroList,
) -> Result<Complex64> {
    let zero_sum = smooth_zero_sum(chi, &Xi::Rational(*xi), x, bump, zeros)?;
    Ok(zero_sum + main_term(chi, xi, x, bump))
}

/// C_B * C-tilde_{chi,xi} * X, exactly zero when gcd(h, q) > 1.
pub fn main_term(chi: &DirichletCharacter, xi: &RationalXi, x: f64, bump: &BumpWeight) -> Complex64 {
    c_tilde(chi, xi) * (bump.integral() * x)
}

/// One abscissa of a dual-sum experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualSumPoint {
    /// T for sharp sums, X for smooth ones.
    pub abscissa: f64,
    pub sigma1: Complex64,
    pub sigma2: Complex64,
    pub combined: Complex64,
    pub normalizer: f64,
    pub ratio: f64,
}

impl DualSumPoint {
    /// combined = sigma1 + sigma2 + extra.
    pub fn new(abscissa: f64, sigma1: Complex64, sigma2: Complex64, extra: Complex64, normalizer: f64) -> Self {
        let combined = sigma1 + sigma2 + extra;
        Self {
            abscissa,
            sigma1,
            sigma2,
            combined,
            normalizer,
            ratio: combined.norm() / normalizer,
        }
    }
}
