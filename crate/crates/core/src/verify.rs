//! Acceptance checks shared by `fraclab verify-all` and the test suite.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constants::{lower_bound_scan, rayleigh_quotient, remark_scan_general_alpha, ScanFamily};
use crate::error::Result;
use crate::gls::{anisotropic_norm, bgls_norm, natural_psi, p_norm, BglsOptions, GlsTarget, PsiFunction};
use crate::model::{Domain, InequalityKind, InequalityParams, WeightSpec};
use crate::norms::{target_norm, NormSpec, Numerics};
use crate::quad::McConfig;
use crate::scaling::{
    check_necessary_condition, check_weighted_conditions, default_theta_grid, fit_scaling, weight_envelope,
    EnvelopeExponents, EnvelopeSpec, Regime, WeightRole,
};
use crate::trialfuncs::TrialFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    #[default]
    Full,
    /// Smaller Monte Carlo budgets and grids.
    Reduced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub details: Value,
}

impl CriterionResult {
    fn new(id: u8, passed: bool, summary: String, details: Value) -> Self {
        Self { id, name: NAMES[id as usize - 1].to_string(), passed, summary, details }
    }

    fn failed(id: u8, err: impl std::fmt::Display) -> Self {
        Self::new(id, false, format!("error: {err}"), Value::Null)
    }
}

pub const NAMES: [&str; 11] = [
    "closed-form oracle",
    "scaling exponents",
    "balance-condition equivalence",
    "dilation invariance of the quotient",
    "blow-up rate",
    "general-alpha threshold",
    "BGLS degenerate recovery",
    "anisotropic factorization",
    "weak sharpness",
    "envelope equality case",
    "Monte Carlo determinism",
];

/// Runs criterion `id` (1 to 11).
pub fn run_criterion(id: u8, budget: Budget, seed: u64) -> CriterionResult {
    let r = match id {
        1 => closed_form_oracle(),
        2 => scaling_exponents(budget, seed),
        3 => balance_equivalence(seed),
        4 => dilation_invariance(),
        5 => blowup_rate(),
        6 => general_alpha_threshold(),
        7 => bgls_recovery(seed),
        8 => factorization(),
        9 => weak_sharpness(budget),
        10 => envelope_equality(),
        11 => determinism(budget, seed),
        _ => return CriterionResult { id, name: "unknown".into(), passed: false, summary: "no such criterion".into(), details: Value::Null },
    };
    r.unwrap_or_else(|e| CriterionResult::failed(id, e))
}

pub fn verify_all(budget: Budget, seed: u64) -> Vec<CriterionResult> {
    (1..=11).map(|id| run_criterion(id, budget, seed)).collect()
}

fn closed_form_oracle() -> Result<CriterionResult> {
    let num = Numerics::default().without_closed_forms();
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for lambda in [0.0, 0.3, 0.5] {
        for p in [1.0, 1.2, 1.5, 1.8] {
            if lambda * p >= 1.0 {
                continue;
            }
            let spec = NormSpec::target(InequalityParams::new(1).with_q(p).with_mu(lambda * p));
            let got = target_norm(&TrialFunction::log_cusp(1), &spec, &Domain::interval(0.0, 1.0), &num)?.value.powf(p);
            let want = libm::tgamma(p + 1.0) / (1.0 - lambda * p).powf(p + 1.0);
            let rel = (got / want - 1.0).abs();
            worst = worst.max(rel);
            rows.push(json!({"lambda": lambda, "p": p, "value": got, "oracle": want, "rel_err": rel}));
        }
    }
    Ok(CriterionResult::new(1, worst < 1e-6, format!("max relative error {worst:.2e} over {} cases", rows.len()), json!(rows)))
}

fn mc_numerics(budget: Budget, seed: u64) -> Numerics {
    let n = match budget {
        Budget::Full => 1 << 16,
        Budget::Reduced => 1 << 13,
    };
    let mc = McConfig { seed, inner_samples: 256, outer_samples: 256, ..McConfig::default() }.with_samples(n);
    Numerics::default().with_mc(mc)
}

/// `(name, spec, domain, monte_carlo)` for the scaling sweep in dimension `d`.
fn scaling_cases(d: usize) -> Vec<(&'static str, NormSpec, Domain, bool)> {
    let p = InequalityParams::new(d);
    if d == 1 {
        vec![
            ("target", NormSpec::target(p.clone().with_q(2.0).with_mu(0.5)), Domain::WholeSpace, false),
            ("gagliardo", NormSpec::gagliardo(p.clone().with_p(2.0).with_beta(1.5)), Domain::WholeSpace, false),
            ("mixed", NormSpec::mixed(p.clone().with_p(2.0).with_q(3.0).with_beta(1.5)), Domain::WholeSpace, false),
            ("gradient", NormSpec::gradient(p.with_s(2.0)), Domain::WholeSpace, false),
        ]
    } else {
        vec![
            ("target", NormSpec::target(p.clone().with_q(2.0).with_mu(0.5)), Domain::WholeSpace, false),
            ("gagliardo", NormSpec::gagliardo(p.clone().with_p(2.0).with_beta(3.0)), Domain::WholeSpace, true),
            ("mixed", NormSpec::mixed(p.clone().with_p(2.0).with_q(3.0).with_beta(3.0)), Domain::WholeSpace, true),
            ("gradient", NormSpec::gradient(p.clone().with_s(2.0)), Domain::WholeSpace, false),
            ("surface", NormSpec::surface(p.with_q(2.0).with_mu(0.25)), Domain::surface(1, None), false),
        ]
    }
}

/// Slope fits shared by criteria 2 and 11.
fn scaling_rows(budget: Budget, seed: u64, mc_only: bool) -> Result<Vec<Value>> {
    let grid = match budget {
        Budget::Full => default_theta_grid(),
        Budget::Reduced => vec![0.25, 0.5, 1.0, 2.0, 4.0],
    };
    let num = mc_numerics(budget, seed);
    let mut rows = Vec::new();
    for d in [1, 2] {
        for (name, spec, dom, mc) in scaling_cases(d) {
            if mc_only && !mc {
                continue;
            }
            let u = TrialFunction::bump(d, 1.0);
            let r = fit_scaling(&u, &spec, &dom, &grid, &num)?;
            let limit = if mc { 1e-2 } else { 1e-3 };
            rows.push(json!({
                "d": d,
                "functional": name,
                "fitted": r.fitted_slope,
                "predicted": r.predicted_slope,
                "residual": r.residual,
                "limit": limit,
                "ok": r.failure.is_none() && r.residual.abs() < limit,
            }));
        }
    }
    Ok(rows)
}

fn scaling_exponents(budget: Budget, seed: u64) -> Result<CriterionResult> {
    let rows = scaling_rows(budget, seed, false)?;
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| r["ok"] != json!(true))
        .map(|r| format!("{}(d={})", r["functional"].as_str().unwrap_or("?"), r["d"]))
        .collect();
    let worst = rows.iter().filter_map(|r| r["residual"].as_f64()).fold(0.0f64, |a, b| a.max(b.abs()));
    let summary = if bad.is_empty() {
        format!("{} fits, max |residual| {worst:.2e}", rows.len())
    } else {
        format!("residual too large for {}", bad.join(", "))
    };
    Ok(CriterionResult::new(2, bad.is_empty(), summary, json!(rows)))
}

type Q = Ratio<i64>;

fn dyadic(rng: &mut ChaCha8Rng, lo: i64, hi: i64) -> Q {
    Q::new(rng.random_range(lo..=hi), 8)
}

fn balance_equivalence(seed: u64) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xba1a);
    let (mut agree, mut balanced) = (0usize, 0usize);
    let mut mismatches = Vec::new();
    for i in 0..200 {
        let d = rng.random_range(1..=3i64);
        let dq = Q::from_integer(d);
        let p = dyadic(&mut rng, 8, 32);
        let q = dyadic(&mut rng, 8, 32);
        let a1 = dyadic(&mut rng, 0, 8);
        let a2 = dyadic(&mut rng, 0, 8);
        let beta = dyadic(&mut rng, 0, 8 * d);
        let rhs = (dq * 2 + a1 + a2 - beta) / p;
        // every other tuple is solved for mu so that the sides balance exactly
        let mu = if i % 2 == 0 { dq - q * rhs } else { dyadic(&mut rng, -8, 8 * d - 1) };
        let exact = (dq - mu) / q == rhs;
        balanced += exact as usize;
        let f = |x: Q| *x.numer() as f64 / *x.denom() as f64;
        let params = InequalityParams::new(d as usize)
            .with_p(f(p))
            .with_q(f(q))
            .with_alphas(f(a1), f(a2))
            .with_beta(f(beta))
            .with_mu(f(mu));
        let verdict = check_necessary_condition(InequalityKind::Ordinary, &params)?;
        if verdict.holds == exact {
            agree += 1;
        } else {
            mismatches.push(json!({"d": d, "p": f(p), "q": f(q), "mu": f(mu), "exact": exact, "reported": verdict.holds}));
        }
    }
    Ok(CriterionResult::new(
        3,
        agree == 200,
        format!("{agree}/200 verdicts agree with exact arithmetic ({balanced} balanced)"),
        json!({"agree": agree, "balanced": balanced, "mismatches": mismatches}),
    ))
}

fn dilation_invariance() -> Result<CriterionResult> {
    let params = InequalityParams::new(1).with_p(2.0).with_q(2.0).with_beta(1.5).with_mu(0.5);
    let balance = check_necessary_condition(InequalityKind::Ordinary, &params)?;
    let u = TrialFunction::bump(1, 1.0);
    let num = Numerics::default();
    let base = rayleigh_quotient(&u, InequalityKind::Ordinary, &params, &Domain::WholeSpace, &num)?;
    let mut ok = balance.residual == 0.0;
    let mut rows = Vec::new();
    for theta in [0.5, 2.0] {
        let s = rayleigh_quotient(&u.dilate(theta)?, InequalityKind::Ordinary, &params, &Domain::WholeSpace, &num)?;
        let gap = (s.quotient - base.quotient).abs();
        let tol = 3.0 * (s.combined_error() + base.combined_error());
        ok &= gap <= tol;
        rows.push(json!({"theta": theta, "quotient": s.quotient, "gap": gap, "tolerance": tol}));
    }
    Ok(CriterionResult::new(
        4,
        ok,
        format!("base quotient {:.10}, balance residual {}", base.quotient, balance.residual),
        json!({"base": base.quotient, "dilated": rows}),
    ))
}

fn scan_summary(id: u8, fit: &crate::constants::BlowupFit, extra_ok: bool) -> CriterionResult {
    let ok = fit.monotone && fit.in_window && fit.truncated.is_none() && extra_ok;
    let quotients: Vec<f64> = fit.scan.iter().map(|s| s.quotient).collect();
    CriterionResult::new(
        id,
        ok,
        format!(
            "rate {:.4} in [{:.2}, {:.2}]: {}, monotone: {}",
            fit.fitted_rate, fit.window[0], fit.window[1], fit.in_window, fit.monotone
        ),
        json!({"threshold": fit.threshold, "p": fit.scan.iter().map(|s| s.p).collect::<Vec<_>>(), "quotients": quotients,
               "rate": fit.fitted_rate, "rate_vs_distance": fit.rate_vs_distance}),
    )
}

fn blowup_rate() -> Result<CriterionResult> {
    let grid = [1.5, 1.7, 1.8, 1.9, 1.95];
    let fit = lower_bound_scan(ScanFamily::LogCusp, InequalityKind::Ordinary, 0.5, 1, &grid, None, &Numerics::default())?;
    Ok(scan_summary(5, &fit, true))
}

fn general_alpha_threshold() -> Result<CriterionResult> {
    let grid = [2.0, 2.3, 2.5, 2.7, 2.8];
    let fit = remark_scan_general_alpha(0.5, 0.0, 0.5, 1, &grid, &Numerics::default())?;
    let finite = fit.scan.len() == grid.len() && fit.scan.iter().all(|s| s.quotient.is_finite());
    let threshold_ok = (fit.threshold - 3.0).abs() < 1e-12;
    Ok(scan_summary(6, &fit, finite && threshold_ok))
}

fn bgls_recovery(seed: u64) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb915);
    let num = Numerics::default();
    let opts = BglsOptions::default();
    let mut ok = true;
    let mut rows = Vec::new();
    for i in 0..5 {
        let f = match i % 3 {
            0 => TrialFunction::bump(1, rng.random_range(0.5..2.0)),
            1 => TrialFunction::linear_ramp(1, rng.random_range(0.5..2.0))?,
            _ => TrialFunction::radial_power(1, rng.random_range(-0.2..0.5), rng.random_range(0.5..2.0))?,
        };
        let r: f64 = rng.random_range(1.2..3.5);
        let target = GlsTarget::Plain(f);
        let psi = PsiFunction::degenerate(1.0, 4.0, r)?;
        let g = bgls_norm(&target, &psi, &target.measure(), &Domain::WholeSpace, &num, &opts)?;
        let direct = p_norm(&target, r, &Domain::WholeSpace, &num)?;
        let gap = (g.value - direct.value).abs();
        ok &= gap <= direct.error_estimate;
        rows.push(json!({"family": target_tag(&target), "r": r, "bgls": g.value, "lebesgue": direct.value, "error": direct.error_estimate}));
    }
    let g = GlsTarget::Plain(TrialFunction::radial_power(1, -0.25, 1.0)?);
    let dom = Domain::interval(0.0, 1.0);
    let psi = natural_psi(&g, 1.0, 3.5, &dom, &num, &opts)?;
    let nat = bgls_norm(&g, &psi, &g.measure(), &dom, &num, &opts)?.value;
    ok &= (nat - 1.0).abs() < 1e-9;
    Ok(CriterionResult::new(
        7,
        ok,
        format!("5 degenerate recoveries, natural-psi norm {nat:.12}"),
        json!({"degenerate": rows, "natural": nat}),
    ))
}

fn target_tag(t: &GlsTarget) -> &'static str {
    match t {
        GlsTarget::Plain(f) | GlsTarget::SLambda { u: f, .. } | GlsTarget::DeltaLambda { u: f, .. } => f.tag(),
    }
}

fn factorization() -> Result<CriterionResult> {
    let g1 = TrialFunction::bump(1, 1.0);
    let g2 = TrialFunction::linear_ramp(1, 0.7)?;
    let (p1, p2) = (1.5, 3.0);
    let range = (-2.0, 2.0);
    let prod = anisotropic_norm(&TrialFunction::product(g1.clone(), g2.clone()), &[p1, p2], &[range, range], 1e-10)?;
    let n1 = anisotropic_norm(&g1, &[p1], &[range], 1e-12)?;
    let n2 = anisotropic_norm(&g2, &[p2], &[range], 1e-12)?;
    let rel = (prod.value / (n1.value * n2.value) - 1.0).abs();
    let f = TrialFunction::smooth_bump(vec![0.4, 0.0], 1.0, 1.0)?;
    let a = anisotropic_norm(&f, &[1.0, 4.0], &[range, range], 1e-10)?;
    let b = anisotropic_norm(&f, &[4.0, 1.0], &[range, range], 1e-10)?;
    let gap = (a.value - b.value).abs();
    let combined = a.error_estimate + b.error_estimate;
    Ok(CriterionResult::new(
        8,
        rel < 1e-6 && gap > 10.0 * combined,
        format!("factorization rel err {rel:.2e}; order gap {gap:.3e} vs combined error {combined:.1e}"),
        json!({"product": prod.value, "factors": [n1.value, n2.value], "rel_err": rel, "p1_p2": a.value, "p2_p1": b.value}),
    ))
}

fn weak_sharpness(budget: Budget) -> Result<CriterionResult> {
    let lambda = 0.5;
    let u = TrialFunction::log_cusp(1);
    let num = Numerics::default();
    let points = match budget {
        Budget::Full => 24,
        Budget::Reduced => 12,
    };
    let opts = BglsOptions::default().with_points(points);
    let s = GlsTarget::SLambda { u: u.clone(), lambda };
    let delta = GlsTarget::DeltaLambda { u, lambda, extra_kernel_factor: false };
    let mut ratios = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let b = 2.0 - eps;
        let psi4 = PsiFunction::analytic(1.2, b, "|p-2|^0.8")?;
        let psi1 = PsiFunction::analytic(1.2, b, "p * |p-2|^-1")?;
        let lhs = bgls_norm(&s, &psi4, &s.measure(), &Domain::WholeSpace, &num, &opts)?;
        let rhs = bgls_norm(&delta, &psi1, &delta.measure(), &Domain::WholeSpace, &num, &opts)?;
        ratios.push(json!({"eps": eps, "lhs": lhs.value, "rhs": rhs.value, "ratio": lhs.value / rhs.value}));
    }
    let r: Vec<f64> = ratios.iter().filter_map(|v| v["ratio"].as_f64()).collect();
    let ok = r.len() == 3 && r[0] < r[1] && r[1] < r[2];
    Ok(CriterionResult::new(9, ok, format!("ratios {:.4} < {:.4} < {:.4}", r[0], r[1], r[2]), json!(ratios)))
}

fn envelope_equality() -> Result<CriterionResult> {
    let (mu, alpha, beta) = (0.5, 0.5, 1.0);
    let params = InequalityParams::new(1).with_p(2.0).with_q(2.0);
    let z = [0.1, 0.5, 1.0, 4.0];
    let mut ok = true;
    // target weight |z|^-mu, kernel weight |z|^beta
    for (e, role, w) in [(mu, WeightRole::Target, -mu), (beta, WeightRole::Kernel, beta)] {
        for regime in [Regime::NearZero, Regime::NearInfinity] {
            let env = weight_envelope(&EnvelopeSpec::new(WeightSpec::power(-w), role, e, regime, 1), &z)?;
            ok &= z.iter().zip(&env.values).all(|(zi, v)| (v / zi.powf(w) - 1.0).abs() < 1e-12);
        }
    }
    let c = check_weighted_conditions(&EnvelopeExponents::matched(mu, alpha, beta), &params, false)?;
    ok &= c.cond_a && c.cond_b && c.equality_case && c.residual_a.abs() < 1e-12 && c.residual_b.abs() < 1e-12;
    Ok(CriterionResult::new(
        10,
        ok,
        format!("residuals {:.1e}, {:.1e}", c.residual_a, c.residual_b),
        json!({"residual_a": c.residual_a, "residual_b": c.residual_b, "envelopes_exact": ok}),
    ))
}

fn determinism(budget: Budget, seed: u64) -> Result<CriterionResult> {
    let once = serde_json::to_string(&scaling_rows(budget, seed, true)?)?;
    let twice = serde_json::to_string(&scaling_rows(budget, seed, true)?)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| crate::error::Error::Numerical(e.to_string()))?;
    let serial = serde_json::to_string(&pool.install(|| scaling_rows(budget, seed, true))?)?;
    let ok = once == twice && once == serial;
    Ok(CriterionResult::new(
        11,
        ok,
        format!("Monte Carlo fits identical across reruns and thread counts: {ok}"),
        json!({"bytes": once.len()}),
    ))
}
