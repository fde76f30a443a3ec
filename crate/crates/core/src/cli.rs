//! Batch command-line front end.
//!
//! `pqdeform <command> [flags]` with command one of `eval`, `verify`,
//! `coherent`, `positive`, `qsym`, `resolve`. Flags may also come from a
//! flat `key = value` file given by `--config`; flags win. The report is
//! JSON (see `schema/report.schema.json`) or a short text summary.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 bad arguments,
//! 3 a module rejected the input (domain, convergence, configuration).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fockspace::{FockSpace, ModeConfig};
use crate::posenergy::{
    auto_window, build_positive_coherent, build_positive_coherent_exact,
    check_raising_eigenproblem, direct_magnitude_sum, positive_normalization, PositiveEnergyConfig,
    DEFAULT_WINDOW_THRESHOLD,
};
use crate::qkernel::{
    bilateral_psi01_sum, deformed_exp, q_bracket, q_bracket_factorial, q_pochhammer,
    DeformationParams,
};
use crate::qsymm::{self, Convention, Word};
use crate::relcheck::{run_suite, Arithmetic, Suite};
use crate::zcoherent::{
    build_coherent_state, check_lowering_eigenproblem, graded_records, self_inner_product, Method,
    Truncation,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Eval,
    Verify,
    Coherent,
    Positive,
    Qsym,
    Resolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "pqdeform",
    version,
    about = "Two-parameter deformed oscillators: evaluation and verification"
)]
#[command(allow_negative_numbers = true)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// Deformation parameter p > 0.
    #[arg(long)]
    p: Option<f64>,
    /// Phase of q = exp(i theta), radians.
    #[arg(long)]
    theta: Option<f64>,
    /// Sets theta = pi / K.
    #[arg(long = "theta-pi-over", value_name = "K")]
    theta_pi_over: Option<i64>,
    #[arg(long)]
    modes: Option<usize>,
    /// One cutoff for every mode, or a comma list.
    #[arg(long)]
    cutoff: Option<String>,
    /// Total-occupation truncation for coherent states.
    #[arg(long)]
    total: Option<u32>,
    #[arg(long)]
    suite: Option<String>,
    /// Exact rational arithmetic with formal q.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Comma list of lambda_i.
    #[arg(long)]
    lambda: Option<String>,
    /// Half-width of the lattice window.
    #[arg(long)]
    window: Option<i64>,
    /// Comma list of |z_i|^2.
    #[arg(long)]
    r: Option<String>,
    /// Comma list of letters.
    #[arg(long)]
    word: Option<String>,
    /// Special function for `eval`: bracket, factorial, pochhammer, exp, psi01.
    #[arg(long = "fn", value_name = "NAME")]
    function: Option<String>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    n: Option<i64>,
    /// Run the convention resolution (qsym).
    #[arg(long)]
    resolve: bool,
    /// Longest probe word for the resolution.
    #[arg(long)]
    nmax: Option<usize>,
    /// Alphabet size for the resolution.
    #[arg(long)]
    alphabet: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Flat key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

const CONFIG_KEYS: [&str; 22] = [
    "p",
    "theta",
    "theta-pi-over",
    "modes",
    "cutoff",
    "total",
    "suite",
    "exact",
    "tolerance",
    "lambda",
    "window",
    "r",
    "word",
    "fn",
    "a",
    "x",
    "n",
    "resolve",
    "nmax",
    "alphabet",
    "out",
    "format",
];

/// Effective configuration, echoed in the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunConfig {
    pub command: Command,
    pub p: f64,
    pub theta: f64,
    pub modes: usize,
    pub cutoff: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total: Option<u32>,
    pub suite: String,
    pub exact: bool,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word: Option<Vec<usize>>,
    #[serde(rename = "fn", skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<i64>,
    pub resolve: bool,
    pub nmax: usize,
    pub alphabet: usize,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// One line of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub label: String,
    /// Statement of what was checked or evaluated.
    #[serde(rename = "paperRef")]
    pub paper_ref: String,
    #[serde(rename = "maxResidual", skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl ResultRecord {
    fn residual(
        label: impl Into<String>,
        statement: impl Into<String>,
        residual: f64,
        pass: bool,
    ) -> Self {
        Self {
            label: label.into(),
            paper_ref: statement.into(),
            max_residual: Some(residual),
            value: None,
            pass,
            details: None,
        }
    }

    fn value(
        label: impl Into<String>,
        statement: impl Into<String>,
        value: Value,
        pass: bool,
    ) -> Self {
        Self {
            label: label.into(),
            paper_ref: statement.into(),
            max_residual: None,
            value: Some(value),
            pass,
            details: None,
        }
    }

    fn with_details(mut self, details: impl Serialize) -> Self {
        self.details = serde_json::to_value(details).ok();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub version: String,
    pub timestamp: u64,
    pub config: RunConfig,
    pub results: Vec<ResultRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub overall_pass: bool,
}

/// What `run` produced: exit code, the report (absent on usage errors), and
/// text destined for stdout and stderr.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub report: Option<Report>,
    pub stdout: String,
    pub stderr: String,
}

fn parse_list<T: std::str::FromStr>(key: &str, s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<T>()
                .map_err(|_| Error::Parse(format!("--{key}: cannot parse `{t}`")))
        })
        .collect()
}

fn read_config_file(path: &PathBuf) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let k = k.trim().to_string();
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(Error::Parse(format!(
                "config line {}: unknown key `{k}`",
                lineno + 1
            )));
        }
        map.insert(k, v.trim().to_string());
    }
    Ok(map)
}

fn file_value<T: std::str::FromStr>(
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>> {
    file.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::Parse(format!("config key `{key}`: cannot parse `{v}`")))
        })
        .transpose()
}

fn resolve_config(args: Args) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    let pick_str = |flag: Option<String>, key: &str| flag.or_else(|| file.get(key).cloned());
    let p = args.p.or(file_value(&file, "p")?).unwrap_or(0.5);
    let theta_pi_over: Option<i64> = args.theta_pi_over.or(file_value(&file, "theta-pi-over")?);
    let theta = match (args.theta, theta_pi_over) {
        (Some(t), _) => t,
        (None, Some(k)) if k != 0 => PI / k as f64,
        (None, Some(_)) => {
            return Err(Error::Parse(
                "--theta-pi-over needs a nonzero integer".into(),
            ))
        }
        (None, None) => file_value(&file, "theta")?.unwrap_or(0.0),
    };
    let modes = args.modes.or(file_value(&file, "modes")?).unwrap_or(2);
    let cutoff = match pick_str(args.cutoff, "cutoff") {
        Some(s) => parse_list::<u32>("cutoff", &s)?,
        None => vec![4],
    };
    let list = |flag: Option<String>, key: &str| -> Result<Option<Vec<f64>>> {
        pick_str(flag, key)
            .map(|s| parse_list::<f64>(key, &s))
            .transpose()
    };
    let bool_flag = |flag: bool, key: &str| -> Result<bool> {
        Ok(flag || file_value::<bool>(&file, key)?.unwrap_or(false))
    };
    let format = match args.format {
        Some(f) => f,
        None => match file.get("format").map(String::as_str) {
            None | Some("json") => Format::Json,
            Some("text") => Format::Text,
            Some(other) => return Err(Error::Parse(format!("unknown format `{other}`"))),
        },
    };
    Ok(RunConfig {
        command: args.command,
        p,
        theta,
        modes,
        cutoff,
        total: args.total.or(file_value(&file, "total")?),
        suite: pick_str(args.suite, "suite").unwrap_or_else(|| "all".into()),
        exact: bool_flag(args.exact, "exact")?,
        tolerance: args
            .tolerance
            .or(file_value(&file, "tolerance")?)
            .unwrap_or(1e-10),
        lambda: list(args.lambda, "lambda")?,
        window: args.window.or(file_value(&file, "window")?),
        r: list(args.r, "r")?,
        word: pick_str(args.word, "word")
            .map(|s| parse_list::<usize>("word", &s))
            .transpose()?,
        function: pick_str(args.function, "fn"),
        a: args.a.or(file_value(&file, "a")?),
        x: args.x.or(file_value(&file, "x")?),
        n: args.n.or(file_value(&file, "n")?),
        resolve: bool_flag(args.resolve, "resolve")?,
        nmax: args.nmax.or(file_value(&file, "nmax")?).unwrap_or(5),
        alphabet: args
            .alphabet
            .or(file_value(&file, "alphabet")?)
            .unwrap_or(3),
        format,
        out: args.out.or_else(|| file.get("out").map(PathBuf::from)),
    })
}

fn require<T: Copy>(v: Option<T>, flag: &str, command: &str) -> Result<T> {
    v.ok_or_else(|| Error::Parse(format!("`{command}` needs --{flag}")))
}

fn params(cfg: &RunConfig) -> Result<DeformationParams> {
    Ok(DeformationParams::new(cfg.p, cfg.theta)?.with_tolerance(cfg.tolerance))
}

fn mode_config(cfg: &RunConfig) -> Result<ModeConfig> {
    ModeConfig::new(cfg.modes, cfg.cutoff.clone(), params(cfg)?)
}

fn per_mode(list: &Option<Vec<f64>>, modes: usize, default: f64, flag: &str) -> Result<Vec<f64>> {
    match list {
        None => Ok(vec![default; modes]),
        Some(v) if v.len() == 1 => Ok(vec![v[0]; modes]),
        Some(v) if v.len() == modes => Ok(v.clone()),
        Some(v) => Err(Error::Parse(format!(
            "--{flag} has {} entries for {modes} modes",
            v.len()
        ))),
    }
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn cmd_eval(cfg: &RunConfig) -> Result<Vec<ResultRecord>> {
    let name = cfg
        .function
        .clone()
        .ok_or_else(|| Error::Parse("`eval` needs --fn".into()))?;
    let p = cfg.p;
    let record = match name.as_str() {
        "bracket" => {
            let x = require(cfg.x, "x", "eval --fn bracket")?;
            ResultRecord::value(
                "bracket",
                "[x] = (p^x - 1)/(p - 1)",
                json!(q_bracket(x, p)),
                true,
            )
        }
        "factorial" => {
            let n = require(cfg.n, "n", "eval --fn factorial")?;
            ResultRecord::value(
                "factorial",
                "[n]! = [n][n-1]..[1]",
                json!(q_bracket_factorial(n, p)?),
                true,
            )
        }
        "pochhammer" => {
            let a = require(cfg.a, "a", "eval --fn pochhammer")?;
            let n = require(cfg.n, "n", "eval --fn pochhammer")?;
            ResultRecord::value(
                "pochhammer",
                "(a;p)_n = prod_k (1 - a p^k)",
                json!(q_pochhammer(a, p, n)?),
                true,
            )
        }
        "exp" => {
            let x = require(cfg.x, "x", "eval --fn exp")?;
            let e = deformed_exp(Complex64::new(x, 0.0), p, 1e-17)?;
            ResultRecord::value("exp", "e_p(x) = sum_n x^n/[n]!", json!(e.value.re), true)
                .with_details(json!({ "terms": e.terms, "tailBound": e.tail_bound }))
        }
        "psi01" => {
            let a = require(cfg.a, "a", "eval --fn psi01")?;
            let x = require(cfg.x, "x", "eval --fn psi01")?;
            let s = bilateral_psi01_sum(a, p, x, 1e-17)?;
            ResultRecord::value(
                "psi01",
                "0psi1(a;p,x) = sum_{n in Z} (-1)^n p^{n(n-1)/2} x^n/(a;p)_n",
                json!(s.value),
                true,
            )
            .with_details(s)
        }
        other => return Err(Error::Parse(format!("unknown function `{other}`"))),
    };
    Ok(vec![record])
}

fn cmd_verify(cfg: &RunConfig) -> Result<Vec<ResultRecord>> {
    let suite: Suite = cfg.suite.parse()?;
    let arithmetic = if cfg.exact {
        Arithmetic::Exact
    } else {
        Arithmetic::Float
    };
    let reports = run_suite(suite, &mode_config(cfg)?, arithmetic, cfg.tolerance)?;
    Ok(reports
        .into_iter()
        .map(|r| {
            ResultRecord::residual(r.label.clone(), r.source.clone(), r.max_residual, r.pass)
                .with_details(json!({
                    "domainSize": r.domain_size,
                    "exact": r.exact,
                    "skipped": r.skipped,
                }))
        })
        .collect())
}

fn cmd_coherent(cfg: &RunConfig) -> Result<Vec<ResultRecord>> {
    let config = mode_config(cfg)?;
    let r = per_mode(&cfg.r, cfg.modes, 0.3, "r")?;
    let truncation = cfg.total.map_or(Truncation::PerMode, Truncation::Total);
    let mut out = Vec::new();
    if cfg.exact {
        let space = FockSpace::exact(config.clone())?;
        let series = build_coherent_state(&space, &r, Method::Series, truncation)?;
        let expo = build_coherent_state(&space, &r, Method::Exponential, truncation)?;
        out.push(ResultRecord::value(
            "coherent.series_vs_exponential",
            "sum z^n/sqrt([n]!) |n> = e_p(z_n a+_n)..e_p(z_1 a+_1)|0>",
            json!(series.amplitudes.len()),
            series == expo,
        ));
        for mode in 1..=cfg.modes {
            let e = check_lowering_eigenproblem(&space, &series, mode, 0.0)?;
            out.push(
                ResultRecord::residual(
                    format!("coherent.eigen[{mode}]"),
                    format!("a_{mode}|z> = z_{mode}|z>"),
                    e.max_interior_residual,
                    e.pass,
                )
                .with_details(&e),
            );
        }
    }
    let space = FockSpace::graded(config);
    let series = build_coherent_state(&space, &r, Method::Series, truncation)?;
    let expo = build_coherent_state(&space, &r, Method::Exponential, truncation)?;
    let agree = series.formally_equal(space.backend(), &expo, 1e-14);
    if !cfg.exact {
        out.push(ResultRecord::value(
            "coherent.series_vs_exponential",
            "sum z^n/sqrt([n]!) |n> = e_p(z_n a+_n)..e_p(z_1 a+_1)|0>",
            json!(series.amplitudes.len()),
            agree,
        ));
        for mode in 1..=cfg.modes {
            let e = check_lowering_eigenproblem(&space, &series, mode, 1e-13)?;
            out.push(
                ResultRecord::residual(
                    format!("coherent.eigen[{mode}]"),
                    format!("a_{mode}|z> = z_{mode}|z>"),
                    e.max_interior_residual,
                    e.pass,
                )
                .with_details(&e),
            );
        }
    }
    let norm = self_inner_product(space.backend(), &series);
    // Inside the truncation the norm is C^2 times a finite sum, not 1.
    let mut kept = 0.0;
    for occ in space.config().occupations() {
        if cfg.total.is_some_and(|c| occ.total() > c) {
            continue;
        }
        let mut w = 1.0;
        for (i, &n) in occ.0.iter().enumerate() {
            w *= r[i].powi(n as i32) / q_bracket_factorial(n as i64, cfg.p)?;
        }
        kept += w;
    }
    let expected = series.normalization * series.normalization * kept;
    let residual = (norm - expected).abs();
    out.push(
        ResultRecord::residual(
            "coherent.norm",
            "<z|z> = 1 with 1/sqrt(prod e_p(|z_i|^2)), up to the truncated tail",
            residual,
            residual <= cfg.tolerance,
        )
        .with_details(json!({
            "normalization": series.normalization,
            "normSquared": norm,
            "truncationDeficit": 1.0 - expected,
        })),
    );
    out.push(ResultRecord::value(
        "coherent.amplitudes",
        "occupation -> (z monomial, q power, coefficient)",
        serde_json::to_value(graded_records(&series)).unwrap_or(Value::Null),
        true,
    ));
    Ok(out)
}

fn cmd_positive(cfg: &RunConfig) -> Result<Vec<ResultRecord>> {
    let params = params(cfg)?;
    let modes =
        cfg.lambda
            .as_ref()
            .map_or(cfg.modes, |l| if l.len() > 1 { l.len() } else { cfg.modes });
    let lambdas = per_mode(&cfg.lambda, modes, 1.0, "lambda")?;
    let nu = params.nu()?;
    let r = per_mode(&cfg.r, modes, 10.0 * nu, "r")?;
    let w = match cfg.window {
        Some(w) => w,
        None => auto_window(params, &lambdas, &r, DEFAULT_WINDOW_THRESHOLD)?,
    };
    let config = PositiveEnergyConfig::symmetric(params, lambdas, w)?;
    let norm = positive_normalization(&config, &r)?;
    let mut out = Vec::new();
    let float_state = build_positive_coherent::<f64>(&config)?;
    let direct = direct_magnitude_sum(&float_state, &r);
    let rel = (norm.powi(-2) - direct).abs() / direct;
    out.push(
        ResultRecord::residual(
            "positive.normalization",
            "C^-2 = prod_k 0psi1(-nu/lambda_k; p, -|z_k|^2/lambda_k)",
            rel,
            rel <= 1e-8,
        )
        .with_details(json!({ "C": norm, "directSum": direct, "window": w })),
    );
    let reports = if cfg.exact {
        let state = build_positive_coherent_exact(&config)?;
        (1..=modes)
            .map(|m| check_raising_eigenproblem(&config, &state, m, &r, 0.0))
            .collect::<Result<Vec<_>>>()?
    } else {
        (1..=modes)
            .map(|m| check_raising_eigenproblem(&config, &float_state, m, &r, 1e-12))
            .collect::<Result<Vec<_>>>()?
    };
    for e in reports {
        out.push(
            ResultRecord::residual(
                format!("positive.eigen[{}]", e.mode),
                format!("a+_{0}|z>_+ = z_{0}|z>_+", e.mode),
                e.max_relative_residual,
                e.pass,
            )
            .with_details(&e),
        );
    }
    Ok(out)
}

fn resolved_convention(cfg: &RunConfig) -> Result<(Convention, qsymm::ResolutionReport)> {
    let report = qsymm::resolve_convention(cfg.nmax, cfg.alphabet, &qsymm::default_grid())?;
    Ok((report.require()?, report))
}

fn resolution_records(report: &qsymm::ResolutionReport) -> Vec<ResultRecord> {
    let mut out: Vec<ResultRecord> = report
        .evidence
        .iter()
        .map(|ev| {
            let verdict = if ev.pass { "satisfied" } else { "rejected" };
            // A rejection counts as a completed check once a counterexample backs it.
            let backed = ev.pass || !ev.counterexamples.is_empty();
            ResultRecord::value(
                format!("resolve.{}", ev.convention),
                "exchange rule, unit norm and permutation-sum identity on every probe",
                json!(verdict),
                backed,
            )
            .with_details(ev)
        })
        .collect();
    out.push(
        ResultRecord::value(
            "resolve.satisfying",
            "at least one convention satisfies all requirements",
            json!(report
                .satisfying
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()),
            !report.satisfying.is_empty(),
        )
        .with_details(
            json!({ "chosen": report.chosen.map(|c| c.to_string()), "grid": report.grid }),
        ),
    );
    out
}

fn cmd_qsym(cfg: &RunConfig) -> Result<Vec<ResultRecord>> {
    if cfg.resolve {
        return cmd_resolve(cfg);
    }
    let letters = cfg
        .word
        .clone()
        .ok_or_else(|| Error::Parse("`qsym` needs --word or --resolve".into()))?;
    let word = Word::new(letters)?;
    if word.is_empty() {
        return Err(Error::Parse("--word is empty".into()));
    }
    let (convention, _) = resolved_convention(cfg)?;
    let state = qsymm::build_qsym_state(&word, convention);
    let mut out = Vec::new();
    let amplitudes: Vec<Value> = state
        .amplitudes
        .keys()
        .map(|w| {
            Ok(json!({ "word": w.0, "amplitude": complex_json(state.value(w, cfg.p, cfg.theta)?) }))
        })
        .collect::<Result<_>>()?;
    out.push(
        ResultRecord::value(
            "qsym.state",
            "sqrt(prod [n_k]_{p^2}!/[N]_{p^2}!) sum q^R(input) p^R(term) |term>",
            json!(amplitudes),
            true,
        )
        .with_details(json!({ "convention": convention.to_string() })),
    );
    let norm = state.norm_sqr(cfg.p, cfg.theta)?;
    out.push(ResultRecord::residual(
        "qsym.norm",
        "<w|w> = 1",
        (norm - 1.0).abs(),
        (norm - 1.0).abs() <= 1e-12,
    ));
    for k in 1..word.len() {
        let r = qsymm::exchange_check(&word, k, convention, cfg.p, cfg.theta)?;
        out.push(
            ResultRecord::residual(
                format!("qsym.exchange[{k}]"),
                "|..i_k,i_k+1..> = q^eps(i_k,i_k+1) |..i_k+1,i_k..>",
                r.max_residual,
                r.pass,
            )
            .with_details(&r),
        );
        let back = qsymm::transition_apply(k, &qsymm::transition_apply(k, &state)?)?;
        out.push(ResultRecord::value(
            format!("qsym.inverse[{k}]"),
            "P_{k+1,k} P_{k,k+1} = Id",
            json!(back == state),
            back == state,
        ));
    }
    let sort = qsymm::sort_to_fundamental(&word, convention)?;
    out.push(
        ResultRecord::value(
            "qsym.sort",
            "sorting by transitions accumulates q^{-R(w)}",
            json!(sort.accumulated_q_power),
            sort.pass,
        )
        .with_details(&sort),
    );
    let mut profile = word.profile();
    profile.retain(|&c| c > 0);
    let id = qsymm::multinomial_identity_check(&profile, cfg.p, convention)?;
    out.push(
        ResultRecord::residual(
            "qsym.identity",
            "sum p^{2R} over rearrangements = [N]_{p^2}!/prod [n_k]_{p^2}!",
            (id.lhs_value - id.rhs_value).abs(),
            id.pass,
        )
        .with_details(&id),
    );
    Ok(out)
}

fn cmd_resolve(cfg: &RunConfig) -> Result<Vec<ResultRecord>> {
    let report = qsymm::resolve_convention(cfg.nmax, cfg.alphabet, &qsymm::default_grid())?;
    Ok(resolution_records(&report))
}

fn execute(cfg: &RunConfig) -> Result<Vec<ResultRecord>> {
    match cfg.command {
        Command::Eval => cmd_eval(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Coherent => cmd_coherent(cfg),
        Command::Positive => cmd_positive(cfg),
        Command::Qsym => cmd_qsym(cfg),
        Command::Resolve => cmd_resolve(cfg),
    }
}

fn render_text(report: &Report) -> String {
    let mut s = String::new();
    for r in &report.results {
        let status = if r.pass { "PASS" } else { "FAIL" };
        let measure = match (&r.max_residual, &r.value) {
            (Some(res), _) => format!("maxResidual={res:.3e}"),
            (None, Some(Value::Array(a))) => format!("value=[{} entries]", a.len()),
            (None, Some(v)) => format!("value={v}"),
            (None, None) => String::new(),
        };
        s.push_str(&format!("{status} {} {measure}\n", r.label));
    }
    if let Some(e) = &report.error {
        s.push_str(&format!("ERROR {e}\n"));
    }
    s.push_str(&format!(
        "overall: {}\n",
        if report.overall_pass { "PASS" } else { "FAIL" }
    ));
    s
}

/// Serializes a report as pretty JSON.
pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
    s.push('\n');
    s
}

fn usage_outcome(message: String) -> Outcome {
    Outcome {
        code: EXIT_USAGE,
        report: None,
        stdout: String::new(),
        stderr: message,
    }
}

/// Parses `argv` (program name first), runs the command, writes the report.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let text = e.render().to_string();
            return if code == EXIT_PASS {
                Outcome {
                    code,
                    report: None,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                usage_outcome(text)
            };
        }
    };
    let cfg = match resolve_config(args) {
        Ok(c) => c,
        Err(e) => return usage_outcome(format!("error: {e}\n")),
    };
    let (results, error, code) = match execute(&cfg) {
        Ok(results) => {
            let pass = results.iter().all(|r| r.pass);
            (results, None, if pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Err(e @ (Error::Parse(_) | Error::UnknownSuite(_))) => {
            return usage_outcome(format!("error: {e}\n"))
        }
        Err(e) => (Vec::new(), Some(e.to_string()), EXIT_DOMAIN),
    };
    let report = Report {
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        overall_pass: error.is_none() && results.iter().all(|r| r.pass),
        config: cfg.clone(),
        results,
        error,
    };
    let rendered = match cfg.format {
        Format::Json => render_json(&report),
        Format::Text => render_text(&report),
    };
    let mut outcome = Outcome {
        code,
        report: Some(report),
        stdout: String::new(),
        stderr: String::new(),
    };
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                outcome.stderr = format!("error: cannot write {}: {e}\n", path.display());
                outcome.code = EXIT_DOMAIN;
            }
        }
        None => outcome.stdout = rendered,
    }
    if let Some(e) = outcome.report.as_ref().and_then(|r| r.error.clone()) {
        outcome.stderr.push_str(&format!("error: {e}\n"));
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        run(std::iter::once("pqdeform").chain(args.iter().copied()))
    }

    fn first_value(o: Outcome) -> f64 {
        o.report.unwrap().results[0]
            .value
            .as_ref()
            .and_then(Value::as_f64)
            .unwrap()
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run_args(&["verify", "--bogus", "1"]).code, EXIT_USAGE);
        assert_eq!(run_args(&["frobnicate"]).code, EXIT_USAGE);
    }

    #[test]
    fn unknown_suite_is_usage_error() {
        assert_eq!(run_args(&["verify", "--suite", "nope"]).code, EXIT_USAGE);
    }

    #[test]
    fn help_exits_zero() {
        let o = run_args(&["--help"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.contains("pqdeform"));
    }

    #[test]
    fn eval_bracket() {
        let o = run_args(&["eval", "--fn", "bracket", "--x", "3", "--p", "2"]);
        assert_eq!(o.code, 0);
        assert!((first_value(o) - 7.0).abs() < 1e-14);
    }

    #[test]
    fn negative_values_parse() {
        let o = run_args(&[
            "eval", "--fn", "psi01", "--a", "-2", "--p", "0.5", "--x", "-3",
        ]);
        assert_eq!(o.code, 0, "{}", o.stderr);
    }

    #[test]
    fn divergent_psi01_is_domain_error() {
        let o = run_args(&[
            "eval", "--fn", "psi01", "--a", "-2", "--p", "0.5", "--x", "-0.1",
        ]);
        assert_eq!(o.code, EXIT_DOMAIN);
        let report = o.report.unwrap();
        assert!(report.error.unwrap().contains("diverges"));
        assert!(!report.overall_pass);
    }

    #[test]
    fn theta_pi_over() {
        let o = run_args(&[
            "eval",
            "--fn",
            "bracket",
            "--x",
            "1",
            "--theta-pi-over",
            "7",
        ]);
        assert!((o.report.unwrap().config.theta - PI / 7.0).abs() < 1e-16);
    }

    #[test]
    fn config_file_and_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# test\nfn = bracket\nx = 2\np = 3  # base\n").unwrap();
        let o = run_args(&["eval", "--config", path.to_str().unwrap()]);
        assert!((first_value(o) - 4.0).abs() < 1e-14);
        let o = run_args(&["eval", "--config", path.to_str().unwrap(), "--p", "2"]);
        assert!((first_value(o) - 3.0).abs() < 1e-14);
        std::fs::write(&path, "colour = blue\n").unwrap();
        assert_eq!(
            run_args(&["eval", "--config", path.to_str().unwrap()]).code,
            EXIT_USAGE
        );
    }
}
