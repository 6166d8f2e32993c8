//! Structured experiment reports and log-log fitting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LchiError, Result};

/// Fits with fewer points than this still run, but the report says so.
pub const RECOMMENDED_FIT_POINTS: usize = 6;

/// Least-squares line through (log x, log y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

impl LogLogFit {
    /// exp(intercept), the constant C in y ~ C x^slope.
    pub fn constant(&self) -> f64 {
        self.intercept.exp()
    }
}

pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() {
        return Err(LchiError::UndefinedFit(format!(
            "{} abscissae but {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(LchiError::UndefinedFit(format!(
            "a slope needs at least 2 points, got {}",
            xs.len()
        )));
    }
    if let Some((x, y)) = xs.iter().zip(ys).find(|(x, y)| !(**x > 0.0 && **y > 0.0)) {
        return Err(LchiError::UndefinedFit(format!(
            "log-log fit needs positive data, got ({x}, {y})"
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(LchiError::UndefinedFit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LogLogFit {
        slope,
        intercept: my - slope * mx,
        points: xs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub comparator: Comparator,
    pub pass: bool,
}

/// Primary fit plus named secondary quantities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub slope: Option<f64>,
    pub constant: Option<f64>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub params: BTreeMap<String, Value>,
    pub rows: Vec<Value>,
    pub fits: Fits,
    pub checks: Vec<Check>,
    /// Multiplier k in every "<= k * bound" check.
    pub k_multiplier: f64,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, k_multiplier: f64) -> Self {
        Self {
            experiment: experiment.to_string(),
            params: BTreeMap::new(),
            rows: Vec::new(),
            fits: Fits::default(),
            checks: Vec::new(),
            k_multiplier,
            notes: Vec::new(),
        }
    }

    pub fn param<T: Serialize>(&mut self, key: &str, value: T) -> &mut Self {
        let v = serde_json::to_value(value).expect("parameter values serialize");
        self.params.insert(key.to_string(), v);
        self
    }

    pub fn row<T: Serialize>(&mut self, row: &T) {
        self.rows
            .push(serde_json::to_value(row).expect("row values serialize"));
    }

    pub fn extra(&mut self, key: &str, value: f64) {
        self.fits.extra.insert(key.to_string(), value);
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Records the primary fit and warns about short grids.
    pub fn primary_fit(&mut self, fit: &LogLogFit, constant: f64) {
        self.fits.slope = Some(fit.slope);
        self.fits.constant = Some(constant);
        self.fit_size_note(fit, "primary");
    }

    pub fn fit_size_note(&mut self, fit: &LogLogFit, what: &str) {
        if fit.points < RECOMMENDED_FIT_POINTS {
            self.note(format!(
                "{what} slope fitted on {} points, fewer than the recommended {RECOMMENDED_FIT_POINTS}",
                fit.points
            ));
        }
    }

    pub fn check_at_most(&mut self, name: &str, value: f64, threshold: f64) -> bool {
        let pass = value <= threshold;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            threshold,
            comparator: Comparator::AtMost,
            pass,
        });
        pass
    }

    pub fn check_at_least(&mut self, name: &str, value: f64, threshold: f64) -> bool {
        let pass = value >= threshold;
        self.checks.push(Check {
            name: name.to_string(),
            value,
            threshold,
            comparator: Comparator::AtLeast,
            pass,
        });
        pass
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}
