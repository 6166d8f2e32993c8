//! Critical-line zeros of L(s, chi) from sign changes of the rotated Z-function.
//!
//! The scan evaluates Z on the global grid `t_i = i * step` (grid points are
//! independent, so they are evaluated in parallel and collected in index
//! order), brackets every sign change and bisects it to width 1e-9.
//! Completeness is checked against the main term of the zero-counting
//! function only; it is a heuristic, not a proof.

use std::f64::consts::{E, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LchiError, Result};
use crate::lfunc::{LFunction, T_CAP};

/// Bisection stops once the bracket is at most this wide.
pub const BRACKET_WIDTH: f64 = 1e-9;

/// |Z| below this at a grid minimum without a sign change is flagged as a possible tangency.
pub const TANGENCY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroFlag {
    /// A refined sign change.
    Ok,
    /// Small |Z| without a sign change; not counted as a zero.
    Tangential,
}

impl ZeroFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ZeroFlag::Ok => "ok",
            ZeroFlag::Tangential => "tangential",
        }
    }
}

impl std::str::FromStr for ZeroFlag {
    type Err = LchiError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(ZeroFlag::Ok),
            "tangential" => Ok(ZeroFlag::Tangential),
            other => invalid(format!("unknown zero flag {other:?}")),
        }
    }
}

/// One located ordinate with its final bracket [gamma - halfwidth, gamma + halfwidth].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub gamma: f64,
    pub halfwidth: f64,
    pub z_left: f64,
    pub z_right: f64,
    pub flag: ZeroFlag,
}

/// Ordinates of critical-line zeros of one L-function up to a ceiling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroList {
    pub modulus: u64,
    pub label: usize,
    /// Strictly ascending, both signs.
    pub zeros: Vec<ZeroRecord>,
    /// Suspected tangencies, not included in `zeros`.
    pub flagged: Vec<ZeroRecord>,
    pub ceiling: f64,
    pub step: f64,
    pub warnings: Vec<String>,
}

impl ZeroList {
    pub fn ordinates(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.gamma).collect()
    }

    /// Ordinates with 0 < gamma <= upto, ascending.
    pub fn positive_up_to(&self, upto: f64) -> impl Iterator<Item = f64> + '_ {
        self.zeros
            .iter()
            .map(|z| z.gamma)
            .filter(move |&g| g > 0.0 && g <= upto)
    }

    /// Number of zeros with |gamma| <= height.
    pub fn count_two_sided(&self, height: f64) -> usize {
        self.zeros.iter().filter(|z| z.gamma.abs() <= height).count()
    }

    /// Fails unless the list was scanned at least up to `required`.
    pub fn require_coverage(&self, required: f64) -> Result<()> {
        if self.ceiling < required {
            return Err(LchiError::InsufficientZeroCoverage {
                required,
                available: self.ceiling,
            });
        }
        Ok(())
    }

    /// Rows in CSV order: zeros followed by flagged clusters.
    pub fn records(&self) -> impl Iterator<Item = &ZeroRecord> {
        self.zeros.iter().chain(self.flagged.iter())
    }
}

/// Default scan step min(0.05, pi / log(q (T + 10) / 2 pi)).
pub fn auto_step(q: u64, ceiling: f64) -> f64 {
    let l = (q as f64 * (ceiling + 10.0) / (2.0 * PI)).ln();
    if l > 1.0 {
        (PI / l).min(0.05)
    } else {
        0.05
    }
}

/// Two-sided main term (T / pi) log(q T / (2 pi e)) of the zero count up to height T.
pub fn expected_count(q: u64, height: f64) -> f64 {
    height / PI * (q as f64 * height / (2.0 * PI * E)).ln()
}

/// Half-width of the completeness window around [`expected_count`].
pub fn count_window(q: u64, height: f64) -> f64 {
    2.0 + (q as f64 * height).ln()
}

/// Below this height the density window is not checked.
pub const COUNT_CHECK_MIN_HEIGHT: f64 = 5.0;

/// Outcome of comparing a zero count against the density main term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountCheck {
    pub height: f64,
    pub found: usize,
    pub expected: f64,
    pub window: f64,
    /// `None` when the height is below [`COUNT_CHECK_MIN_HEIGHT`].
    pub pass: Option<bool>,
}

pub fn completeness(list: &ZeroList, height: f64) -> CountCheck {
    let found = list.count_two_sided(height);
    let expected = expected_count(list.modulus, height);
    let window = count_window(list.modulus, height);
    let pass = (height >= COUNT_CHECK_MIN_HEIGHT)
        .then(|| (found as f64 - expected).abs() <= window);
    CountCheck {
        height,
        found,
        expected,
        window,
        pass,
    }
}

fn bisect(lf: &LFunction, mut lo: f64, mut hi: f64, mut z_lo: f64, mut z_hi: f64) -> Result<ZeroRecord> {
    while hi - lo > BRACKET_WIDTH {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let z_mid = lf.z_function(mid)?;
        if z_mid == 0.0 {
            return Ok(ZeroRecord {
                gamma: mid,
                halfwidth: 0.0,
                z_left: 0.0,
                z_right: 0.0,
                flag: ZeroFlag::Ok,
            });
        }
        if z_mid.signum() == z_lo.signum() {
            lo = mid;
            z_lo = z_mid;
        } else {
            hi = mid;
            z_hi = z_mid;
        }
    }
    Ok(ZeroRecord {
        gamma: 0.5 * (lo + hi),
        halfwidth: 0.5 * (hi - lo),
        z_left: z_lo,
        z_right: z_hi,
        flag: ZeroFlag::Ok,
    })
}

/// Scans Z_chi over (0, T] (and [-T, 0) for complex chi) with the given or automatic step.
pub fn scan_zeros(lf: &LFunction, ceiling: f64, step: Option<f64>) -> Result<ZeroList> {
    let chi = lf.character();
    if !chi.is_primitive() {
        return invalid(format!("zero scan needs a primitive character, got {}", chi.describe()));
    }
    if !(ceiling >= 2.0) {
        return invalid(format!("scan ceiling must be at least 2, got {ceiling}"));
    }
    if ceiling > T_CAP {
        return Err(LchiError::Domain(format!("scan ceiling {ceiling} exceeds {T_CAP}")));
    }
    let q = chi.modulus();
    let step = match step {
        Some(s) if s > 0.0 && s.is_finite() => s,
        Some(s) => return invalid(format!("scan step must be positive, got {s}")),
        None => auto_step(q, ceiling),
    };
    let mut warnings = Vec::new();
    let log_density = (q as f64 * ceiling / (2.0 * PI)).ln();
    if log_density > 0.0 {
        let spacing = 2.0 * PI / log_density;
        if step > 0.25 * spacing {
            warnings.push(format!(
                "step {step} exceeds a quarter of the mean zero spacing {spacing:.4} at height {ceiling}"
            ));
        }
    }
    let n = (ceiling / step).ceil() as i64;
    let real = chi.is_real();
    let first = if real { 0 } else { -n };
    let grid: Vec<f64> = (first..=n).map(|i| i as f64 * step).collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&t| lf.z_function(t))
        .collect::<Result<_>>()?;

    let mut brackets = Vec::new();
    let mut flagged = Vec::new();
    for i in 0..grid.len() - 1 {
        if values[i].signum() != values[i + 1].signum() {
            brackets.push(i);
        }
    }
    for i in 1..grid.len() - 1 {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        let local_min = b.abs() <= a.abs() && b.abs() <= c.abs();
        let no_change = a.signum() == b.signum() && b.signum() == c.signum();
        if local_min && no_change && b.abs() < TANGENCY_THRESHOLD && grid[i].abs() <= ceiling {
            flagged.push(ZeroRecord {
                gamma: grid[i],
                halfwidth: step,
                z_left: a,
                z_right: c,
                flag: ZeroFlag::Tangential,
            });
        }
    }

    let refined: Vec<ZeroRecord> = brackets
        .par_iter()
        .map(|&i| bisect(lf, grid[i], grid[i + 1], values[i], values[i + 1]))
        .collect::<Result<_>>()?;
    let mut zeros: Vec<ZeroRecord> = refined
        .into_iter()
        .filter(|z| z.gamma != 0.0 && z.gamma.abs() <= ceiling)
        .collect();
    if real {
        zeros.retain(|z| z.gamma > 0.0);
        // Z(-t) = +-Z(t) for real characters.
        let mirrored: Vec<ZeroRecord> = zeros
            .iter()
            .rev()
            .map(|z| ZeroRecord {
                gamma: -z.gamma,
                halfwidth: z.halfwidth,
                z_left: z.z_right,
                z_right: z.z_left,
                flag: z.flag,
            })
            .collect();
        zeros = mirrored.into_iter().chain(zeros).collect();
        let mirrored_flags: Vec<ZeroRecord> = flagged
            .iter()
            .rev()
            .filter(|z| z.gamma > 0.0)
            .map(|z| ZeroRecord { gamma: -z.gamma, ..*z })
            .collect();
        flagged = mirrored_flags.into_iter().chain(flagged).collect();
    }
    if !flagged.is_empty() {
        warnings.push(format!("{} suspected tangential cluster(s) flagged", flagged.len()));
    }
    Ok(ZeroList {
        modulus: q,
        label: chi.label(),
        zeros,
        flagged,
        ceiling,
        step,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::character;

    /// Independent sign-change oracle on a grid ten times finer.
    fn oracle_zeros(lf: &LFunction, lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = ((hi - lo) / step).ceil() as usize;
        let mut out = Vec::new();
        let mut prev_t = lo;
        let mut prev = lf.z_function(lo).unwrap();
        for i in 1..=n {
            let t = lo + i as f64 * step;
            let z = lf.z_function(t).unwrap();
            if z.signum() != prev.signum() {
                let (mut a, mut b, mut za) = (prev_t, t, prev);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    let zm = lf.z_function(m).unwrap();
                    if zm.signum() == za.signum() {
                        a = m;
                        za = zm;
                    } else {
                        b = m;
                    }
                }
                out.push(0.5 * (a + b));
            }
            prev = z;
            prev_t = t;
        }
        out
    }

    #[test]
    fn zeta_low_ceilings() {
        let zeta = LFunction::new(&character(1, 0).unwrap());
        let list = scan_zeros(&zeta, 10.0, None).unwrap();
        assert!(list.zeros.is_empty());
        assert!(oracle_zeros(&zeta, 0.0, 10.0, 0.005).is_empty());

        let list = scan_zeros(&zeta, 20.0, None).unwrap();
        let pos: Vec<f64> = list.positive_up_to(20.0).collect();
        assert_eq!(pos.len(), 1);
        let oracle = oracle_zeros(&zeta, 0.0, 20.0, 0.005);
        assert_eq!(oracle.len(), 1);
        assert!((pos[0] - oracle[0]).abs() < 1e-6);
        assert!((pos[0] - 14.134_725_141_734_693).abs() < 1e-8);
        // mirrored for the real character
        assert_eq!(list.zeros.len(), 2);
        assert_eq!(list.zeros[0].gamma, -pos[0]);
    }

    #[test]
    fn chi4_matches_fine_oracle() {
        let lf = LFunction::new(&character(4, 1).unwrap());
        let list = scan_zeros(&lf, 10.0, None).unwrap();
        let pos: Vec<f64> = list.positive_up_to(10.0).collect();
        let oracle = oracle_zeros(&lf, 0.0, 10.0, 0.005);
        assert_eq!(pos.len(), oracle.len());
        for (a, b) in pos.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!((pos[0] - 6.0209).abs() < 1e-3, "{pos:?}");
    }

    #[test]
    fn brackets_straddle_sign_changes() {
        let lf = LFunction::new(&character(5, 1).unwrap());
        let list = scan_zeros(&lf, 30.0, None).unwrap();
        assert!(!list.zeros.is_empty());
        for w in list.zeros.windows(2) {
            assert!(w[0].gamma < w[1].gamma);
        }
        for z in &list.zeros {
            assert!(z.halfwidth <= 1e-9);
            assert!(z.z_left.signum() != z.z_right.signum());
            let a = lf.z_function(z.gamma - 1e-9).unwrap();
            let b = lf.z_function(z.gamma + 1e-9).unwrap();
            assert!(a * b < 0.0, "gamma = {}", z.gamma);
        }
    }

    #[test]
    fn conjugate_character_mirrors_ordinates() {
        let chi = character(5, 1).unwrap();
        let a = scan_zeros(&LFunction::new(&chi), 40.0, None).unwrap();
        let b = scan_zeros(&LFunction::new(&chi.conj()), 40.0, None).unwrap();
        let mut neg: Vec<f64> = b.ordinates().iter().map(|g| -g).collect();
        neg.sort_by(f64::total_cmp);
        let mine = a.ordinates();
        assert_eq!(mine.len(), neg.len());
        for (x, y) in mine.iter().zip(&neg) {
            assert!((x - y).abs() < 1e-8);
        }
        // a complex character's zeros are not symmetric
        assert!(mine.iter().any(|g| !mine.iter().any(|h| (h + g).abs() < 1e-6)));
    }

    #[test]
    fn expected_count_values() {
        assert!((expected_count(1, 30.0) - 5.379).abs() < 0.01);
        let zeta = LFunction::new(&character(1, 0).unwrap());
        let list = scan_zeros(&zeta, 30.0, None).unwrap();
        assert_eq!(list.positive_up_to(30.0).count(), 3);
        let check = completeness(&list, 30.0);
        assert_eq!(check.found, 6);
        assert_eq!(check.pass, Some(true));
        let small = completeness(&list, 2.0);
        assert_eq!(small.pass, None);
    }

    #[test]
    fn coverage_and_argument_errors() {
        let zeta = LFunction::new(&character(1, 0).unwrap());
        assert!(scan_zeros(&zeta, 1.0, None).is_err());
        assert!(scan_zeros(&zeta, 2000.0, None).is_err());
        assert!(scan_zeros(&zeta, 10.0, Some(-1.0)).is_err());
        let principal = LFunction::new(&character(4, 0).unwrap());
        assert!(scan_zeros(&principal, 10.0, None).is_err());
        let list = scan_zeros(&zeta, 10.0, None).unwrap();
        assert!(list.require_coverage(20.0).is_err());
        assert!(list.require_coverage(10.0).is_ok());
    }

    #[test]
    fn coarse_step_warns() {
        let zeta = LFunction::new(&character(1, 0).unwrap());
        let list = scan_zeros(&zeta, 50.0, Some(1.0)).unwrap();
        assert!(!list.warnings.is_empty());
    }
}
