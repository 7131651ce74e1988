//! Config-driven command runner behind the `fraclab` binary.
//!
//! Settings are layered: built-in defaults, then the config file (TOML or
//! JSON, by extension), then command-line flags.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constants::{dd_constant_probe, lower_bound_scan, remark_scan_general_alpha, BlowupFit, ScanFamily};
use crate::error::{Error, Result};
use crate::gls::{bgls_norm, natural_psi, BglsOptions, GlsTarget, PsiKind, PsiSpec};
use crate::model::{Domain, InequalityKind, InequalityParams, WeightSpec};
use crate::norms::{FunctionalKind, NormSpec, Numerics};
use crate::scaling::{
    check_necessary_condition, check_weighted_conditions, default_theta_grid, fit_scaling, weight_envelope, Direction,
    EnvelopeExponents, EnvelopeSpec, Regime, WeightRole,
};
use crate::trialfuncs::FunctionSpec;
use crate::verify::{verify_all, Budget};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    CheckScaling,
    CheckBalance,
    EstimateConstant,
    GlsNorm,
    Envelope,
    VerifyAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    pub functional: Option<FunctionalKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BalanceSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Envelope exponents for the general-weight conditions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighted: Option<EnvelopeExponents>,
    pub use_infinity_rhs: bool,
}

impl Default for BalanceSection {
    fn default() -> Self {
        Self { kind: "ordinary".into(), m: None, weighted: None, use_infinity_rhs: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstantSection {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub lambda: f64,
    /// Scan abscissae; defaults to fractions of the threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub family: ScanFamily,
    /// Derivative probe only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_grid: Option<Vec<f64>>,
    pub ratio_bound: f64,
}

impl Default for ConstantSection {
    fn default() -> Self {
        Self {
            kind: "ordinary".into(),
            m: None,
            lambda: 0.5,
            grid: None,
            threshold: None,
            family: ScanFamily::LogCusp,
            s_grid: None,
            ratio_bound: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    #[default]
    Plain,
    SLambda,
    DeltaLambda,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlsSection {
    pub target: TargetKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub extra_kernel_factor: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<PsiSpec>,
    /// Use the natural `psi` of the function itself on this interval.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub natural: Option<(f64, f64)>,
    pub options: BglsOptions,
}

/// Serializable subset of [`WeightSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightConfig {
    Power { exponent: f64 },
    Table { nodes: Vec<(f64, f64)> },
}

impl WeightConfig {
    fn build(&self) -> Result<WeightSpec> {
        match self {
            WeightConfig::Power { exponent } => Ok(WeightSpec::power(*exponent)),
            WeightConfig::Table { nodes } => WeightSpec::table(nodes.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvelopeSection {
    pub weight: WeightConfig,
    pub role: WeightRole,
    pub trial_exponent: f64,
    pub regime: Regime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    pub z: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_grid: Option<Vec<f64>>,
}

impl Default for EnvelopeSection {
    fn default() -> Self {
        Self {
            weight: WeightConfig::Power { exponent: 0.5 },
            role: WeightRole::Target,
            trial_exponent: 0.5,
            regime: Regime::NearZero,
            direction: None,
            z: crate::scaling::geometric_grid(1e-2, 1e2, 9),
            theta_grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub budget: Budget,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { budget: Budget::Reduced }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<InequalityParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    #[serde(default = "whole_space")]
    pub domain: Domain,
    #[serde(default)]
    pub numerics: Numerics,
    /// Overrides `numerics.mc.seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub strict_numerics: bool,
    #[serde(default)]
    pub scaling: ScalingSection,
    #[serde(default)]
    pub balance: BalanceSection,
    #[serde(default)]
    pub constant: ConstantSection,
    #[serde(default)]
    pub gls: GlsSection,
    #[serde(default)]
    pub envelope: EnvelopeSection,
    #[serde(default)]
    pub verify: VerifySection,
}

fn whole_space() -> Domain {
    Domain::WholeSpace
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            params: None,
            function: None,
            domain: Domain::WholeSpace,
            numerics: Numerics::default(),
            seed: None,
            output: None,
            format: Format::Json,
            strict_numerics: false,
            scaling: ScalingSection::default(),
            balance: BalanceSection::default(),
            constant: ConstantSection::default(),
            gls: GlsSection::default(),
            envelope: EnvelopeSection::default(),
            verify: VerifySection::default(),
        }
    }

    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn numerics(&self) -> Numerics {
        let mut n = self.numerics.clone();
        if let Some(s) = self.seed {
            n.mc.seed = s;
        }
        n
    }

    fn params(&self) -> Result<&InequalityParams> {
        self.params.as_ref().ok_or_else(|| Error::Config("missing [params] section".into()))
    }

    fn function(&self) -> Result<crate::trialfuncs::TrialFunction> {
        self.function.as_ref().ok_or_else(|| Error::Config("missing [function] section".into()))?.build()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Command,
    pub config: RunConfig,
    pub results: Value,
    pub wall_time: f64,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn empty(config: RunConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: config.command,
            config,
            results: Value::Array(Vec::new()),
            wall_time: 0.0,
            warnings: Vec::new(),
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn default_scan_grid(threshold: f64) -> Vec<f64> {
    [0.75, 0.85, 0.9, 0.95, 0.975].iter().map(|f| f * threshold).collect()
}

fn scan_warnings(fit: &BlowupFit, out: &mut Vec<String>) {
    out.extend(fit.warnings.iter().cloned());
    if let Some(t) = &fit.truncated {
        out.push(format!("scan truncated: {t}"));
    }
    for s in &fit.scan {
        for w in s.lhs.warnings.iter().chain(&s.rhs.warnings) {
            out.push(format!("p = {}: {w}", s.p));
        }
    }
}

/// Executes `config` and assembles the report.
pub fn run(config: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let num = config.numerics();
    let mut warnings = Vec::new();
    let results = match config.command {
        Command::CheckScaling => {
            let u = config.function()?;
            let kind = config.scaling.functional.ok_or_else(|| Error::Config("scaling.functional is required".into()))?;
            let spec = NormSpec::new(kind, config.params()?.clone());
            let grid = config.scaling.theta_grid.clone().unwrap_or_else(default_theta_grid);
            let r = fit_scaling(&u, &spec, &config.domain, &grid, &num)?;
            warnings.extend(r.warnings.iter().cloned());
            if let Some(f) = &r.failure {
                warnings.push(format!("partial report: {f}"));
            }
            to_value(&r)?
        }
        Command::CheckBalance => {
            let kind = InequalityKind::parse(&config.balance.kind, config.balance.m)?;
            let params = config.params()?;
            let cond = check_necessary_condition(kind, params)?;
            let weighted = match &config.balance.weighted {
                Some(e) => Some(check_weighted_conditions(e, params, config.balance.use_infinity_rhs)?),
                None => None,
            };
            json!({"condition": to_value(&cond)?, "weighted": to_value(&weighted)?})
        }
        Command::EstimateConstant => {
            let c = &config.constant;
            let kind = InequalityKind::parse(&c.kind, c.m)?;
            let base = config.params.clone().unwrap_or_else(|| InequalityParams::new(1));
            let d = base.d;
            if kind == InequalityKind::Derivative {
                let p_grid = c.grid.clone().unwrap_or_else(|| vec![1.5, 2.0, 3.0]);
                let s_grid = c.s_grid.clone().unwrap_or_else(|| vec![1.0, 1.5, 2.0]);
                let probe = dd_constant_probe(c.lambda, d, &p_grid, &s_grid, c.ratio_bound, &num)?;
                for (p, s, why) in &probe.skipped {
                    warnings.push(format!("skipped p = {p}, s = {s}: {why}"));
                }
                to_value(&probe)?
            } else {
                let alpha = base.alpha1 + base.alpha2;
                let fit = if alpha > 0.0 && kind == InequalityKind::Ordinary {
                    let p0 = crate::constants::remark_threshold(base.alpha1, base.alpha2, c.lambda, d);
                    let grid = c.grid.clone().unwrap_or_else(|| default_scan_grid(p0));
                    remark_scan_general_alpha(base.alpha1, base.alpha2, c.lambda, d, &grid, &num)?
                } else {
                    let thr = c.threshold.unwrap_or(1.0 / c.lambda);
                    let grid = c.grid.clone().unwrap_or_else(|| default_scan_grid(thr));
                    lower_bound_scan(c.family, kind, c.lambda, d, &grid, c.threshold, &num)?
                };
                scan_warnings(&fit, &mut warnings);
                to_value(&fit)?
            }
        }
        Command::GlsNorm => {
            let u = config.function()?;
            let g = &config.gls;
            let lambda = || g.lambda.ok_or_else(|| Error::Config("gls.lambda is required for this target".into()));
            let target = match g.target {
                TargetKind::Plain => GlsTarget::Plain(u),
                TargetKind::SLambda => GlsTarget::SLambda { u, lambda: lambda()? },
                TargetKind::DeltaLambda => {
                    GlsTarget::DeltaLambda { u, lambda: lambda()?, extra_kernel_factor: g.extra_kernel_factor }
                }
            };
            let psi = match (&g.psi, g.natural) {
                (Some(spec), None) => spec.build()?,
                (None, Some((a, b))) => natural_psi(&target, a, b, &config.domain, &num, &g.options)?,
                _ => return Err(Error::Config("set exactly one of gls.psi and gls.natural".into())),
            };
            let r = bgls_norm(&target, &psi, &target.measure(), &config.domain, &num, &g.options)?;
            warnings.extend(r.warnings.iter().cloned());
            let table = match &psi.kind {
                PsiKind::Natural(n) => Some(n.table().to_vec()),
                PsiKind::Table(t) => Some(t.clone()),
                _ => None,
            };
            json!({"norm": to_value(&r)?, "psi_table": table})
        }
        Command::Envelope => {
            let e = &config.envelope;
            let d = config.params.as_ref().map_or(1, |p| p.d);
            let mut spec = EnvelopeSpec::new(e.weight.build()?, e.role, e.trial_exponent, e.regime, d);
            if let Some(dir) = e.direction {
                spec.direction = dir;
            }
            if let Some(g) = &e.theta_grid {
                spec.theta_grid = g.clone();
            }
            let env = weight_envelope(&spec, &e.z)?;
            warnings.extend(env.flags.iter().cloned());
            to_value(&env)?
        }
        Command::VerifyAll => {
            let rows = verify_all(config.verify.budget, num.mc.seed);
            to_value(&rows)?
        }
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        command: config.command,
        config: config.clone(),
        results,
        wall_time: start.elapsed().as_secs_f64(),
        warnings,
    })
}

/// Rows of the tabular part of a report's results.
fn csv_table(report: &Report) -> Result<(Vec<&'static str>, Vec<Vec<String>>)> {
    let r = &report.results;
    let f = |v: &Value| match v {
        Value::Null => "nan".to_string(),
        other => other.to_string().trim_matches('"').to_string(),
    };
    let rows_of = |key: &str| r.get(key).and_then(Value::as_array).cloned().unwrap_or_default();
    Ok(match report.command {
        Command::EstimateConstant if r.get("scan").is_some() => {
            let rows = rows_of("scan")
                .iter()
                .map(|s| {
                    vec![
                        f(&s["p"]),
                        f(&s["quotient"]),
                        f(&s["lhs"]["error_estimate"]),
                        f(&s["rhs"]["error_estimate"]),
                        f(&s["certified_lower"]),
                    ]
                })
                .collect();
            (vec!["p", "quotient", "lhs_err", "rhs_err", "certified_lower"], rows)
        }
        Command::EstimateConstant => {
            let rows = rows_of("samples")
                .iter()
                .map(|s| {
                    let q = &s["sample"];
                    vec![f(&s["p"]), f(&s["s"]), f(&q["quotient"]), f(&q["lhs"]["error_estimate"]), f(&q["rhs"]["error_estimate"])]
                })
                .collect();
            (vec!["p", "s", "quotient", "lhs_err", "rhs_err"], rows)
        }
        Command::CheckScaling => {
            let t = rows_of("theta_grid");
            let l = rows_of("log_values");
            let e = rows_of("relative_errors");
            let rows = (0..t.len()).map(|i| vec![f(&t[i]), f(&l[i]), f(&e[i])]).collect();
            (vec!["theta", "log_value", "relative_error"], rows)
        }
        Command::Envelope => {
            let z = rows_of("z");
            let v = rows_of("values");
            (vec!["z", "value"], (0..z.len()).map(|i| vec![f(&z[i]), f(&v[i])]).collect())
        }
        Command::GlsNorm => {
            let rows = rows_of("psi_table").iter().map(|n| vec![f(&n[0]), f(&n[1])]).collect();
            (vec!["p", "psi"], rows)
        }
        Command::VerifyAll => {
            let rows = r
                .as_array()
                .cloned()
                .unwrap_or_default()
                .iter()
                .map(|c| vec![f(&c["id"]), f(&c["name"]), f(&c["passed"]), f(&c["summary"])])
                .collect();
            (vec!["id", "name", "passed", "summary"], rows)
        }
        Command::CheckBalance => {
            let c = &r["condition"];
            (vec!["holds", "residual", "lhs_exponent", "rhs_exponent"], vec![vec![
                f(&c["holds"]),
                f(&c["residual"]),
                f(&c["lhs_exponent"]),
                f(&c["rhs_exponent"]),
            ]])
        }
    })
}

/// Serializes `report` as JSON or flattened CSV.
pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        Format::Csv => {
            let (header, rows) = csv_table(report)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header)?;
            for row in rows {
                w.write_record(&row)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
        }
    }
}

/// Writes `report` to `path`, or to stdout when `path` is `None`.
pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> Result<()> {
    let text = render(report, format)?;
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Command-line flags; each one overrides the matching config value.
#[derive(Debug, Parser)]
#[command(name = "fraclab", version, about = "Fractional Hardy-Sobolev numerics")]
pub struct Args {
    pub command: Command,
    /// TOML or JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long = "pair-exp")]
    pub pair_exp: Option<f64>,
    #[arg(long = "origin-exp")]
    pub origin_exp: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Exit with status 2 when the report carries numerical warnings.
    #[arg(long)]
    pub strict_numerics: bool,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Inequality kind for check-balance and estimate-constant.
    #[arg(long)]
    pub kind: Option<String>,
    /// Surface dimension for the surface kind.
    #[arg(long)]
    pub m: Option<usize>,
    /// Comma-separated scan or dilation grid.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Functional for check-scaling.
    #[arg(long)]
    pub functional: Option<String>,
    #[arg(long)]
    pub use_infinity_rhs: bool,
    #[arg(long, value_enum)]
    pub budget: Option<BudgetArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BudgetArg {
    Full,
    Reduced,
}

impl Args {
    /// Loads the config file (if any) and applies the flags on top.
    pub fn into_config(self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let c = RunConfig::load(path)?;
                if c.command != self.command {
                    return Err(Error::Config(format!(
                        "config is for {:?} but {:?} was requested",
                        c.command, self.command
                    )));
                }
                c
            }
            None => RunConfig::new(self.command),
        };
        if let Some(v) = self.out {
            c.output = Some(v);
        }
        if let Some(v) = self.format {
            c.format = v;
        }
        if let Some(v) = self.seed {
            c.seed = Some(v);
        }
        if let Some(v) = self.samples {
            c.numerics.mc.n_samples = v;
        }
        if self.pair_exp.is_some() {
            c.numerics.mc.pair_exponent = self.pair_exp;
        }
        if self.origin_exp.is_some() {
            c.numerics.mc.origin_exponent = self.origin_exp;
        }
        if let Some(v) = self.tol {
            c.numerics.tol = v;
        }
        c.strict_numerics |= self.strict_numerics;
        let touched = self.d.is_some()
            || [self.p, self.q, self.r, self.s, self.alpha1, self.alpha2, self.beta, self.mu, self.lambda]
                .iter()
                .any(Option::is_some);
        if touched {
            let mut p = c.params.take().unwrap_or_else(|| InequalityParams::new(self.d.unwrap_or(1)));
            if let Some(d) = self.d {
                p.d = d;
            }
            p.p = self.p.or(p.p);
            p.q = self.q.or(p.q);
            p.r = self.r.or(p.r);
            p.s = self.s.or(p.s);
            p.lambda = self.lambda.or(p.lambda);
            p.alpha1 = self.alpha1.unwrap_or(p.alpha1);
            p.alpha2 = self.alpha2.unwrap_or(p.alpha2);
            p.beta = self.beta.unwrap_or(p.beta);
            p.mu = self.mu.unwrap_or(p.mu);
            c.params = Some(p);
        }
        if let Some(v) = self.lambda {
            c.constant.lambda = v;
            c.gls.lambda = Some(v);
        }
        if let Some(k) = self.kind {
            c.constant.kind = k.clone();
            c.balance.kind = k;
        }
        if self.m.is_some() {
            c.constant.m = self.m;
            c.balance.m = self.m;
        }
        if let Some(g) = self.grid {
            match c.command {
                Command::CheckScaling => c.scaling.theta_grid = Some(g),
                _ => c.constant.grid = Some(g),
            }
        }
        if let Some(f) = self.functional {
            c.scaling.functional = Some(FunctionalKind::parse(&f)?);
        }
        c.balance.use_infinity_rhs |= self.use_infinity_rhs;
        if let Some(b) = self.budget {
            c.verify.budget = match b {
                BudgetArg::Full => Budget::Full,
                BudgetArg::Reduced => Budget::Reduced,
            };
        }
        Ok(c)
    }
}

/// Runs the binary and returns its exit status.
pub fn main_with(args: Args) -> i32 {
    let config = match args.into_config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Err(e) = emit(&report, config.format, config.output.as_deref()) {
        eprintln!("error: {e}");
        return 1;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if config.strict_numerics && !report.warnings.is_empty() {
        return 2;
    }
    0
}
