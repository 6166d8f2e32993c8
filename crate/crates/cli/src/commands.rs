//! Validation and execution of each subcommand.

use std::f64::consts::PI;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Serialize;

use lchi_core::arith::log_plus;
use lchi_core::bump::{default_bump, BumpWeight};
use lchi_core::characters::{character, enumerate_characters, DirichletCharacter, RationalXi};
use lchi_core::gauss::{gauss_sum, GaussData, GaussResiduals};
use lchi_core::lfunc::{functional_equation_residual, FeResidual, LFunction, XFactorResult, T_CAP};
use lchi_core::report::ExperimentReport;
use lchi_core::sums::{sigma2_cutoff, DualSumPoint, PrimeTerms, Xi, ZeroTerms};
use lchi_core::verify::{self, geometric_grid, VerifyOptions};
use lchi_core::zeros::{completeness, scan_zeros};

use crate::config::RunConfig;
use crate::output::{emit, float, json_document, CsvTable};
use crate::Outcome;

const GLOBAL_KEYS: &[&str] = &["subcommand", "seed", "k", "budget", "out", "threads"];

pub const EXPERIMENTS: &[&str] = &["thm31", "corB", "superbound", "lemma23", "lemma22", "cross", "chebyshev"];

fn allowed_keys(subcommand: &str, experiment: Option<&str>) -> Result<&'static [&'static str]> {
    Ok(match (subcommand, experiment) {
        ("chars", None) | ("gauss", None) => &["q", "chi"],
        ("eval", None) => &["q", "chi", "sigma", "t"],
        ("zeros", None) => &["q", "chi", "T", "step"],
        ("sums", None) => &["q", "chi", "xi", "T", "step", "smooth", "X", "bump"],
        ("verify", Some("thm31")) => &["experiment", "q", "chi", "xi", "Tmin", "Tmax", "points"],
        ("verify", Some("corB" | "superbound")) => {
            &["experiment", "q", "chi", "xi", "Xmin", "Xmax", "points", "bump"]
        }
        ("verify", Some("lemma23")) => &["experiment", "q", "chi", "v", "c", "T"],
        ("verify", Some("lemma22")) => &["experiment", "a", "b", "c", "u"],
        ("verify", Some("cross")) => &["experiment", "q", "chi", "qt", "psi", "X", "bump", "samples"],
        ("verify", Some("chebyshev")) => &["experiment", "Xmin", "Xmax", "points", "bump"],
        ("verify", Some(other)) => bail!("unknown experiment {other:?}; expected one of {}", EXPERIMENTS.join(", ")),
        ("verify", None) => bail!("verify needs an experiment name"),
        (other, Some(_)) => bail!("setting `experiment` is only used by verify, not {other}"),
        (other, None) => bail!("unknown subcommand {other:?}"),
    })
}

/// Rejects settings the chosen subcommand would silently ignore.
fn validate_keys(cfg: &RunConfig) -> Result<()> {
    let sub = cfg.raw("subcommand").context("missing subcommand")?;
    let exp = cfg.raw("experiment");
    let allowed = allowed_keys(sub, exp)?;
    let label = exp.map_or(sub.to_string(), |e| format!("{sub} {e}"));
    for key in crate::config::KNOWN_KEYS {
        if cfg.raw(key).is_some() && !GLOBAL_KEYS.contains(key) && !allowed.contains(key) {
            bail!("--{key} is not used by {label}");
        }
    }
    Ok(())
}

pub fn dispatch(mut cfg: RunConfig) -> Result<Outcome> {
    validate_keys(&cfg)?;
    let sub = cfg.raw("subcommand").unwrap_or_default().to_string();
    match sub.as_str() {
        "chars" => chars(&cfg),
        "gauss" => gauss(&cfg),
        "eval" => eval(&cfg),
        "zeros" => zeros(&cfg),
        "sums" => sums(&mut cfg),
        "verify" => run_verify(&mut cfg),
        _ => unreachable!("validated above"),
    }
}

fn selected_character(cfg: &RunConfig) -> Result<DirichletCharacter> {
    let q: u64 = cfg.require("q")?;
    let label: usize = cfg.require("chi")?;
    Ok(character(q, label)?)
}

pub fn parse_xi(s: &str) -> Result<Xi> {
    if s.contains('/') || s.trim().parse::<u64>().is_ok() {
        return Ok(Xi::Rational(s.parse::<RationalXi>()?));
    }
    let x: f64 = s.trim().parse().map_err(|_| anyhow!("malformed xi: {s:?}"))?;
    Xi::real(x).map_err(|e| anyhow!("malformed xi: {e}"))
}

fn xi_setting(cfg: &RunConfig) -> Result<Xi> {
    parse_xi(cfg.raw("xi").context("missing required setting --xi")?)
}

fn bump_setting(cfg: &RunConfig) -> Result<BumpWeight> {
    let support = cfg.list("bump")?.context("missing required setting --bump")?;
    let [a, b] = support[..] else {
        bail!("--bump expects a,b, got {} values", support.len());
    };
    Ok(default_bump(a, b)?)
}

fn height(value: f64, what: &str) -> Result<f64> {
    if !(value > 0.0 && value <= T_CAP) {
        bail!("{what} = {value} is outside (0, {T_CAP}], the binary64 safety cap");
    }
    Ok(value)
}

fn finish(bytes: Vec<u8>, cfg: &RunConfig, passed: bool) -> Result<Outcome> {
    emit(&bytes, cfg.raw("out"))?;
    Ok(if passed { Outcome::Passed } else { Outcome::ChecksFailed })
}

fn chars(cfg: &RunConfig) -> Result<Outcome> {
    let q: u64 = cfg.require("q")?;
    let single = cfg.get::<usize>("chi")?;
    let selected = match single {
        Some(label) => vec![character(q, label)?],
        None => enumerate_characters(q)?,
    };
    let mut header = vec!["a", "re", "im", "exponent_num", "exponent_den"];
    if single.is_none() {
        header.insert(0, "chi");
    }
    let mut table = CsvTable::new(&header);
    for chi in &selected {
        table.comment(chi.describe());
        for a in 0..q.max(1) {
            let v = chi.value_u(a);
            let (num, den) = chi
                .exponent(a)
                .map_or((String::new(), String::new()), |(n, d)| (n.to_string(), d.to_string()));
            let mut row = vec![a.to_string(), float(v.re), float(v.im), num, den];
            if single.is_none() {
                row.insert(0, chi.label().to_string());
            }
            table.row(row);
        }
    }
    finish(table.render(cfg)?, cfg, true)
}

#[derive(Serialize)]
struct GaussOutput {
    modulus: u64,
    label: usize,
    conductor: u64,
    primitive: bool,
    kappa: u8,
    tau: Complex64,
    /// Root number; only defined for primitive characters.
    epsilon: Option<Complex64>,
    residuals: Option<GaussResiduals>,
}

fn gauss(cfg: &RunConfig) -> Result<Outcome> {
    let chi = selected_character(cfg)?;
    let data = chi.is_primitive().then(|| GaussData::new(&chi)).transpose()?;
    let out = GaussOutput {
        modulus: chi.modulus(),
        label: chi.label(),
        conductor: chi.conductor(),
        primitive: chi.is_primitive(),
        kappa: chi.kappa(),
        tau: data.map_or_else(|| gauss_sum(&chi), |d| d.tau),
        epsilon: data.map(|d| d.epsilon),
        residuals: data.map(|d| d.residuals(&chi)),
    };
    finish(json_document(&out, cfg)?, cfg, true)
}

#[derive(Serialize)]
struct EvalOutput {
    sigma: f64,
    t: f64,
    l_value: Complex64,
    log_derivative: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    log_derivative_error: Option<String>,
    x_exact: Option<XFactorResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_exact_error: Option<String>,
    /// Leading asymptotic term; only for |t| >= 1.
    x_asym: Option<XFactorResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x_asym_error: Option<String>,
    fe_residual: Option<FeResidual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fe_residual_error: Option<String>,
}

fn split<T>(r: lchi_core::Result<T>) -> (Option<T>, Option<String>) {
    match r {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// X_chi(sigma + it) from the asymptotic form, which is stated for X_chi(1 - c - it) with t >= 1.
fn x_asymptotic(chi: &DirichletCharacter, sigma: f64, t: f64) -> lchi_core::Result<XFactorResult> {
    if t <= -1.0 {
        return LFunction::new(chi).x_factor_asymptotic(1.0 - sigma, -t);
    }
    // X_chi(s) = conj X_{conj chi}(conj s)
    let mut r = LFunction::new(&chi.conj()).x_factor_asymptotic(1.0 - sigma, t)?;
    r.value = r.value.conj();
    Ok(r)
}

fn eval(cfg: &RunConfig) -> Result<Outcome> {
    let chi = selected_character(cfg)?;
    let sigma: f64 = cfg.require("sigma")?;
    let t: f64 = cfg.require("t")?;
    if !(sigma.is_finite() && t.is_finite()) {
        bail!("sigma and t must be finite");
    }
    if t.abs() > T_CAP {
        bail!("|t| = {} exceeds the binary64 safety cap {T_CAP}", t.abs());
    }
    let lf = LFunction::new(&chi);
    let s = Complex64::new(sigma, t);
    let l_value = lf.value(s)?;
    let (log_derivative, log_derivative_error) = split(lf.log_derivative(s));
    let (x_exact, x_exact_error) = split(lf.x_factor_exact(s));
    let (x_asym, x_asym_error) = if t.abs() >= 1.0 {
        split(x_asymptotic(&chi, sigma, t))
    } else {
        (None, None)
    };
    let (fe_residual, fe_residual_error) = split(functional_equation_residual(s, &chi));
    let out = EvalOutput {
        sigma,
        t,
        l_value,
        log_derivative,
        log_derivative_error,
        x_exact,
        x_exact_error,
        x_asym,
        x_asym_error,
        fe_residual,
        fe_residual_error,
    };
    finish(json_document(&out, cfg)?, cfg, true)
}

fn zeros(cfg: &RunConfig) -> Result<Outcome> {
    let chi = selected_character(cfg)?;
    let ceiling = height(cfg.require("T")?, "T")?;
    let step = cfg.get::<f64>("step")?;
    let list = scan_zeros(&LFunction::new(&chi), ceiling, step)?;
    let check = completeness(&list, ceiling);

    let mut table = CsvTable::new(&["gamma", "halfwidth", "z_left", "z_right", "flag"]);
    table.comment(format!("{}; ceiling {}, step {}", chi.describe(), float(list.ceiling), float(list.step)));
    for w in &list.warnings {
        table.comment(format!("warning: {w}"));
    }
    let verdict = match check.pass {
        Some(true) => "pass",
        Some(false) => "FAIL",
        None => "not checked below T = 5",
    };
    table.comment(format!(
        "count check: found {} zeros with |gamma| <= T, expected {} +- {}: {verdict}",
        check.found,
        float(check.expected),
        float(check.window)
    ));
    for r in list.records() {
        table.row(vec![
            float(r.gamma),
            float(r.halfwidth),
            float(r.z_left),
            float(r.z_right),
            r.flag.as_str().to_string(),
        ]);
    }
    finish(table.render(cfg)?, cfg, check.pass != Some(false))
}

const SUMS_HEADER: [&str; 9] = [
    "abscissa", "re_s1", "im_s1", "re_s2", "im_s2", "re_comb", "im_comb", "normalizer", "ratio",
];

fn sums(cfg: &mut RunConfig) -> Result<Outcome> {
    let smooth = cfg.flag("smooth")?;
    match (smooth, cfg.raw("X").is_some(), cfg.raw("T").is_some()) {
        (true, false, _) => bail!("--smooth requires --X"),
        (true, true, true) => bail!("--T is not used with --smooth; the zero range follows from --X and --bump"),
        (false, true, _) => bail!("--X requires --smooth"),
        (false, false, false) => bail!("sums needs --T, or --smooth with --X"),
        _ => {}
    }
    if !smooth && cfg.raw("bump").is_some() {
        bail!("--bump requires --smooth");
    }
    if smooth {
        cfg.set_default("bump", "1,2");
    }
    let chi = selected_character(cfg)?;
    let xi = xi_setting(cfg)?;
    let step = cfg.get::<f64>("step")?;
    let q = chi.modulus();
    let qf = q as f64;

    let (points, list) = if smooth {
        let xs = cfg.list("X")?.unwrap_or_default();
        let bump = bump_setting(cfg)?;
        if xs.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            bail!("every X must be positive");
        }
        let x_max = xs.iter().cloned().fold(0.0, f64::max);
        let (_, b) = bump.support();
        let ceiling = height((2.0 * PI * xi.value() * x_max * b).max(2.0), "zero ceiling 2 pi xi X b")?;
        let list = scan_zeros(&LFunction::new(&chi), ceiling, step)?;
        let zt = ZeroTerms::new(&chi, &xi, &list)?;
        let pt = PrimeTerms::new(&chi, &xi, (qf * x_max * b).floor() as u64 + 1);
        let mut points = Vec::with_capacity(xs.len());
        for &x in &xs {
            let normalizer = x.sqrt() * log_plus(x).powi(2);
            points.push(DualSumPoint::new(x, zt.smooth(x, &bump)?, pt.smooth(q, x, &bump), Complex64::new(0.0, 0.0), normalizer));
        }
        (points, list)
    } else {
        let ts = cfg.list("T")?.unwrap_or_default();
        for &t in &ts {
            height(t, "T")?;
        }
        let t_max = ts.iter().cloned().fold(0.0, f64::max);
        let list = scan_zeros(&LFunction::new(&chi), t_max.max(2.0), step)?;
        let zt = ZeroTerms::new(&chi, &xi, &list)?;
        let pt = PrimeTerms::new(&chi, &xi, sigma2_cutoff(q, xi.value(), t_max));
        let mut points = Vec::with_capacity(ts.len());
        for &t in &ts {
            let normalizer = (qf * t).sqrt() * t.ln().powi(2);
            let s2 = pt.partial(sigma2_cutoff(q, xi.value(), t));
            points.push(DualSumPoint::new(t, zt.sigma1(t)?, s2, Complex64::new(0.0, 0.0), normalizer));
        }
        (points, list)
    };

    let mut table = CsvTable::new(&SUMS_HEADER);
    table.comment(format!("{}; xi {xi}; zeros scanned to {}", chi.describe(), float(list.ceiling)));
    for w in &list.warnings {
        table.comment(format!("warning: {w}"));
    }
    table.comment(verify::CRITICAL_LINE_NOTE);
    for p in &points {
        table.row(vec![
            float(p.abscissa),
            float(p.sigma1.re),
            float(p.sigma1.im),
            float(p.sigma2.re),
            float(p.sigma2.im),
            float(p.combined.re),
            float(p.combined.im),
            float(p.normalizer),
            float(p.ratio),
        ]);
    }
    finish(table.render(cfg)?, cfg, true)
}

fn grid(cfg: &RunConfig, lo: &str, hi: &str) -> Result<Vec<f64>> {
    let points: usize = cfg.require("points")?;
    Ok(geometric_grid(cfg.require(lo)?, cfg.require(hi)?, points)?)
}

fn run_verify(cfg: &mut RunConfig) -> Result<Outcome> {
    let experiment = cfg.raw("experiment").unwrap_or_default().to_string();
    let defaults = VerifyOptions::default();
    cfg.set_default("k", defaults.k);
    cfg.set_default("budget", defaults.quadrature.panel_budget);
    cfg.set_default("seed", defaults.seed);
    match experiment.as_str() {
        "thm31" => {
            let q: u64 = cfg.require("q")?;
            cfg.set_default("Tmin", (2 * q * q).max(32));
            cfg.set_default("Tmax", 300);
            cfg.set_default("points", 12);
        }
        "corB" | "superbound" => {
            cfg.set_default("bump", "1,2");
            // Zeros are needed up to 2 pi xi X b; keep the default range under the height cap.
            let reach = 2.0 * PI * xi_setting(cfg)?.value() * bump_setting(cfg)?.support().1;
            cfg.set_default("Xmax", (T_CAP / reach).floor().min(160.0));
            cfg.set_default("Xmin", 10);
            cfg.set_default("points", 5);
        }
        "cross" => {
            cfg.set_default("bump", "1,2");
            cfg.set_default("samples", defaults.samples);
        }
        "chebyshev" => {
            cfg.set_default("Xmin", 100);
            cfg.set_default("Xmax", 100_000);
            cfg.set_default("points", 4);
            cfg.set_default("bump", "1,2");
        }
        _ => {}
    }

    let mut opts = defaults;
    opts.k = cfg.require("k")?;
    opts.seed = cfg.require("seed")?;
    opts.quadrature.panel_budget = cfg.require("budget")?;
    if let Some(n) = cfg.get("samples")? {
        opts.samples = n;
    }
    if !(opts.k > 0.0 && opts.k.is_finite()) {
        bail!("--k must be positive");
    }

    let report: ExperimentReport = match experiment.as_str() {
        "thm31" => {
            let chi = selected_character(cfg)?;
            let xi = xi_setting(cfg)?;
            let ts = grid(cfg, "Tmin", "Tmax")?;
            verify::thm31_cancellation(&chi, &xi, &ts, None, &opts)?
        }
        "corB" => {
            let chi = selected_character(cfg)?;
            let xi = xi_setting(cfg)?;
            let bump = bump_setting(cfg)?;
            let xs = grid(cfg, "Xmin", "Xmax")?;
            verify::corb_smooth_cancellation(&chi, &xi, &xs, &bump, None, &opts)?
        }
        "superbound" => {
            let chi = selected_character(cfg)?;
            let xi = match xi_setting(cfg)? {
                Xi::Rational(r) => r,
                Xi::Real(_) => bail!("superbound needs a rational xi = h/k"),
            };
            let bump = bump_setting(cfg)?;
            let xs = grid(cfg, "Xmin", "Xmax")?;
            verify::superbound_envelope(&chi, &xi, &xs, &bump, None, &opts)?
        }
        "lemma23" => {
            let chi = selected_character(cfg)?;
            verify::lemma23_report(&chi, cfg.require("v")?, cfg.require("c")?, cfg.require("T")?, &opts)?
        }
        "lemma22" => verify::lemma22_report(
            cfg.require("a")?,
            cfg.require("b")?,
            cfg.require("c")?,
            cfg.require("u")?,
            &opts,
        )?,
        "cross" => {
            let chi = selected_character(cfg)?;
            let psi = character(cfg.require("qt")?, cfg.require("psi")?)?;
            let bump = bump_setting(cfg)?;
            verify::cross_character_decomposition(&chi, &psi, cfg.require("X")?, &bump, &opts)?
        }
        "chebyshev" => {
            let bump = bump_setting(cfg)?;
            let xs = grid(cfg, "Xmin", "Xmax")?;
            verify::smooth_chebyshev_check(&bump, &xs, &opts)?
        }
        _ => unreachable!("validated before dispatch"),
    };
    let passed = report.passed();
    finish(json_document(&report, cfg)?, cfg, passed)
}
