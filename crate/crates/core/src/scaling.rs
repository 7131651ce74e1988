//! Dilation experiments, balance checks and weight envelopes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{balance_sides, validate_params, Domain, InequalityKind, InequalityParams, ValidationMode, WeightSpec};
use crate::norms::{evaluate, FunctionalKind, NormSpec, Numerics};
use crate::quad::QuadratureResult;
use crate::trialfuncs::TrialFunction;

/// Tolerance below which a balance residual counts as zero.
pub const BALANCE_TOL: f64 = 1e-12;

/// Exact homogeneity exponent of a functional under `u -> u(x / theta)`.
///
/// `m` is the surface dimension and is only read for [`FunctionalKind::Surface`].
pub fn predicted_exponent(kind: FunctionalKind, params: &InequalityParams, m: Option<usize>) -> Result<f64> {
    let d = params.dim();
    let name = kind.name();
    Ok(match kind {
        FunctionalKind::TargetLebesgue => (d - params.mu) / params.require("q", name)?,
        FunctionalKind::Gagliardo => (2.0 * d + params.alpha1 + params.alpha2 - params.beta) / params.require("p", name)?,
        FunctionalKind::Mixed => {
            let p = params.require("p", name)?;
            let q = params.require("q", name)?;
            (d + params.alpha2 - params.beta) / p + (d + params.alpha1) / q
        }
        FunctionalKind::Gradient => (d - params.mu) / params.require("s", name)? - 1.0,
        FunctionalKind::Surface => {
            let m = m.ok_or_else(|| Error::InvalidParameter("surface exponent needs the surface dimension m".into()))?;
            (m as f64 - params.mu) / params.require("q", name)?
        }
        FunctionalKind::BglsPassThrough => {
            return Err(Error::InvalidParameter("BGLS norms have no single homogeneity exponent".into()))
        }
    })
}

/// Default dilation grid: 9 geometric points over `[1/8, 8]`.
pub fn default_theta_grid() -> Vec<f64> {
    geometric_grid(0.125, 8.0, 9)
}

pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub functional: FunctionalKind,
    pub theta_grid: Vec<f64>,
    pub log_values: Vec<f64>,
    /// Relative error estimate of each functional value.
    pub relative_errors: Vec<f64>,
    pub fitted_slope: f64,
    pub predicted_slope: f64,
    /// `fitted_slope - predicted_slope`.
    pub residual: f64,
    pub r_squared: f64,
    /// `3 * max relative error / ln(theta_max / theta_min)`.
    pub error_bound: f64,
    pub within_error_bound: bool,
    /// Set when an evaluation failed; the fit then covers the preceding grid points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Least-squares line through `(x, y)`: `(slope, intercept, r_squared)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::DegenerateFit(format!("need at least two points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("abscissas coincide".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok((slope, my - slope * mx, r2))
}

/// Fits the slope of `log N(u(. / theta))` against `log theta`.
///
/// Bounded domains are dilated together with `u`, which keeps the
/// homogeneity exact. Monte Carlo functionals reuse the same seed on every
/// grid point, so each sample is transformed rather than redrawn.
pub fn fit_scaling(
    u: &TrialFunction,
    spec: &NormSpec,
    domain: &Domain,
    theta_grid: &[f64],
    num: &Numerics,
) -> Result<ScalingReport> {
    if theta_grid.len() < 2 {
        return Err(Error::InvalidParameter("theta grid needs at least two points".into()));
    }
    if theta_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) || theta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("theta grid must be positive and strictly increasing".into()));
    }
    let m = match domain {
        Domain::Surface { m, .. } => Some(*m),
        _ => None,
    };
    let predicted = predicted_exponent(spec.kind, &spec.params, m)?;
    let span = (theta_grid[theta_grid.len() - 1] / theta_grid[0]).ln();
    let mut warnings = Vec::new();
    if span < std::f64::consts::LN_10 {
        warnings.push("theta grid spans less than one decade".to_string());
    }

    let results: Vec<Result<QuadratureResult>> = theta_grid
        .par_iter()
        .map(|&t| {
            let ut = u.dilate(t)?;
            evaluate(&ut, spec, &domain.dilate(t), num)
        })
        .collect();

    let mut thetas = Vec::new();
    let mut values = Vec::new();
    let mut rel = Vec::new();
    let mut failure = None;
    for (t, r) in theta_grid.iter().zip(results) {
        match r {
            Ok(r) => {
                for w in &r.warnings {
                    warnings.push(format!("theta = {t}: {w}"));
                }
                thetas.push(*t);
                values.push(r.value);
                rel.push(r.relative_error());
            }
            Err(e) => {
                failure = Some(format!("theta = {t}: {e}"));
                break;
            }
        }
    }
    if failure.is_none() && values.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateFit("functional vanishes on the whole grid (constant function?)".into()));
    }
    if let Some(i) = values.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        if failure.is_none() {
            failure = Some(format!("theta = {}: functional value {} has no logarithm", thetas[i], values[i]));
        }
        thetas.truncate(i);
        values.truncate(i);
        rel.truncate(i);
    }
    let log_values: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let log_thetas: Vec<f64> = thetas.iter().map(|t| t.ln()).collect();
    let (slope, r2) = match linear_fit(&log_thetas, &log_values) {
        Ok((s, _, r2)) => (s, r2),
        Err(_) if failure.is_some() => (f64::NAN, f64::NAN),
        Err(e) => return Err(e),
    };
    let max_rel = rel.iter().copied().fold(0.0, f64::max);
    let bound = 3.0 * max_rel / span;
    let residual = slope - predicted;
    Ok(ScalingReport {
        functional: spec.kind,
        theta_grid: thetas,
        log_values,
        relative_errors: rel,
        fitted_slope: slope,
        predicted_slope: predicted,
        residual,
        r_squared: r2,
        error_bound: bound,
        within_error_bound: residual.abs() <= bound.max(1e-12),
        failure,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NecessaryCondition {
    pub kind: InequalityKind,
    pub holds: bool,
    pub residual: f64,
    pub lhs_exponent: f64,
    pub rhs_exponent: f64,
}

/// Balance identity of `kind`; holds iff `|residual| < 1e-12`.
pub fn check_necessary_condition(kind: InequalityKind, params: &InequalityParams) -> Result<NecessaryCondition> {
    validate_params(params, ValidationMode::Permissive, Some(kind))?.into_result()?;
    let (lhs, rhs) = balance_sides(params, kind)?;
    let residual = lhs - rhs;
    Ok(NecessaryCondition { kind, holds: residual.abs() < BALANCE_TOL, residual, lhs_exponent: lhs, rhs_exponent: rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `theta` in `(0, 1)`.
    NearZero,
    /// `theta` in `(1, inf)`.
    NearInfinity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Inf,
    Sup,
}

/// Which weight the envelope belongs to; fixes the sign of the trial exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRole {
    /// Target weight: ratio `W(theta z) / theta^-e`.
    Target,
    /// Kernel weight `W_beta`: ratio `W(theta z) / theta^e`.
    Kernel,
    /// Pair weight `W_alpha`: ratio `W(theta z, theta v) / theta^e`.
    Pair,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub weight: WeightSpec,
    pub role: WeightRole,
    pub trial_exponent: f64,
    pub regime: Regime,
    pub direction: Direction,
    /// Ambient dimension used by the integrability flags.
    pub dim: usize,
    /// Dilation grid; defaults to 121 geometric points across six decades.
    #[serde(default)]
    pub theta_grid: Vec<f64>,
}

impl EnvelopeSpec {
    pub fn new(weight: WeightSpec, role: WeightRole, trial_exponent: f64, regime: Regime, dim: usize) -> Self {
        let direction = if role == WeightRole::Pair { Direction::Sup } else { Direction::Inf };
        Self { weight, role, trial_exponent, regime, direction, dim, theta_grid: Vec::new() }
    }

    fn grid(&self) -> Result<Vec<f64>> {
        let grid = if self.theta_grid.is_empty() {
            match self.regime {
                Regime::NearZero => geometric_grid(1e-6, 1.0, 121),
                Regime::NearInfinity => geometric_grid(1.0, 1e6, 121),
            }
        } else {
            self.theta_grid.clone()
        };
        let ok = grid.iter().all(|t| match self.regime {
            Regime::NearZero => *t > 0.0 && *t <= 1.0,
            Regime::NearInfinity => *t >= 1.0 && t.is_finite(),
        });
        if !ok || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("envelope grid must be increasing and inside the regime".into()));
        }
        Ok(grid)
    }

    fn sign(&self) -> f64 {
        match self.role {
            WeightRole::Target => -1.0,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub z: Vec<f64>,
    pub values: Vec<f64>,
    /// Dilation attaining the extremum at each `z`.
    pub argext: Vec<f64>,
    /// Extremum hit the edge of the grid; the true value may lie beyond it.
    pub boundary_hits: usize,
    pub identically_zero: bool,
    /// Local log-log slopes at the smallest and largest `z` say the
    /// envelope is not locally integrable there.
    pub non_integrable_near_zero: bool,
    pub non_integrable_near_infinity: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

/// Grid extremum of `f` over `log theta`, refined by golden-section search
/// in the neighbouring cells. Returns `(value, theta, on_boundary)`.
fn extremum<F: Fn(f64) -> f64>(f: F, grid: &[f64], dir: Direction) -> (f64, f64, bool) {
    let better = |a: f64, b: f64| match dir {
        Direction::Inf => a < b,
        Direction::Sup => a > b,
    };
    let vals: Vec<f64> = grid.iter().map(|t| f(*t)).collect();
    let mut k = 0;
    for i in 1..vals.len() {
        if better(vals[i], vals[k]) {
            k = i;
        }
    }
    let (mut best, mut arg) = (vals[k], grid[k]);
    let boundary = k == 0 || k + 1 == grid.len();
    if grid.len() >= 3 {
        let lo = grid[k.saturating_sub(1)].ln();
        let hi = grid[(k + 1).min(grid.len() - 1)].ln();
        let g = |s: f64| {
            let v = f(s.exp());
            match dir {
                Direction::Inf => v,
                Direction::Sup => -v,
            }
        };
        let (s, v) = golden_min(g, lo, hi, 1e-8);
        let v = if dir == Direction::Sup { -v } else { v };
        if better(v, best) {
            best = v;
            arg = s.exp();
        }
    }
    (best, arg, boundary)
}

/// Golden-section minimum of `g` on `[a, b]` to absolute tolerance `tol`.
pub(crate) fn golden_min<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    let s = 0.5 * (a + b);
    (s, g(s))
}

/// Tabulates the dilation envelope of a radial weight at the radii `z_grid`.
pub fn weight_envelope(spec: &EnvelopeSpec, z_grid: &[f64]) -> Result<Envelope> {
    spec.weight.validate()?;
    if spec.role == WeightRole::Pair {
        return Err(Error::InvalidParameter("use pair_envelope for pair weights".into()));
    }
    if z_grid.iter().any(|z| !(*z > 0.0 && z.is_finite())) {
        return Err(Error::InvalidParameter("envelope radii must be positive".into()));
    }
    let grid = spec.grid()?;
    let e = spec.sign() * spec.trial_exponent;
    let w = &spec.weight;
    let rows: Vec<(f64, f64, bool)> = z_grid
        .par_iter()
        .map(|&z| extremum(|t| w.at_radius(t * z) / t.powf(e), &grid, spec.direction))
        .collect();
    Ok(assemble(z_grid.to_vec(), rows, spec.dim))
}

/// Envelope of a pair weight along the points `(z_i, v_i)`; `z` in the
/// output is the index-order abscissa `|z_i| + |v_i|`.
pub fn pair_envelope(
    spec: &EnvelopeSpec,
    pair: &crate::model::PairWeight,
    points: &[(Vec<f64>, Vec<f64>)],
) -> Result<Envelope> {
    let grid = spec.grid()?;
    let e = spec.trial_exponent;
    let rows: Vec<(f64, f64, bool)> = points
        .par_iter()
        .map(|(z, v)| {
            extremum(
                |t| {
                    let zs: Vec<f64> = z.iter().map(|c| c * t).collect();
                    let vs: Vec<f64> = v.iter().map(|c| c * t).collect();
                    pair.at(&zs, &vs) / t.powf(e)
                },
                &grid,
                spec.direction,
            )
        })
        .collect();
    let abscissa = points.iter().map(|(z, v)| crate::model::norm(z) + crate::model::norm(v)).collect();
    Ok(assemble(abscissa, rows, 2 * spec.dim))
}

fn assemble(z: Vec<f64>, rows: Vec<(f64, f64, bool)>, dim: usize) -> Envelope {
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let argext = rows.iter().map(|r| r.1).collect();
    let boundary_hits = rows.iter().filter(|r| r.2).count();
    let identically_zero = values.iter().all(|v| *v == 0.0 || v.abs() < 1e-300);
    let slope = |i: usize, j: usize| -> Option<f64> {
        let (a, b) = (values[i], values[j]);
        if a > 0.0 && b > 0.0 && z[i] != z[j] {
            Some((b.ln() - a.ln()) / (z[j].ln() - z[i].ln()))
        } else {
            None
        }
    };
    let n = values.len();
    let d = dim as f64;
    let (mut nz, mut ni) = (false, false);
    if n >= 2 {
        nz = slope(0, 1).is_some_and(|s| s <= -d);
        ni = slope(n - 2, n - 1).is_some_and(|s| s >= -d);
    }
    let mut flags = Vec::new();
    if identically_zero {
        flags.push("envelope vanishes on the grid".to_string());
    }
    if values.iter().any(|v| !v.is_finite()) {
        flags.push("envelope is infinite somewhere on the grid".to_string());
    }
    if boundary_hits > 0 {
        flags.push(format!("{boundary_hits} extrema at the edge of the dilation grid"));
    }
    if nz {
        flags.push("envelope looks non-integrable near zero".to_string());
    }
    if ni {
        flags.push("envelope looks non-integrable near infinity".to_string());
    }
    Envelope {
        z,
        values,
        argext,
        boundary_hits,
        identically_zero,
        non_integrable_near_zero: nz,
        non_integrable_near_infinity: ni,
        flags,
    }
}

/// Effective exponents of general weights at zero and at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeExponents {
    pub mu0: f64,
    pub mu_inf: f64,
    pub alpha0: f64,
    pub alpha_inf: f64,
    pub beta0: f64,
    pub beta_inf: f64,
}

impl EnvelopeExponents {
    pub fn matched(mu: f64, alpha: f64, beta: f64) -> Self {
        Self { mu0: mu, mu_inf: mu, alpha0: alpha, alpha_inf: alpha, beta0: beta, beta_inf: beta }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedConditions {
    /// `(d - mu0)/q >= (d + alpha0 - beta0)/p`.
    pub cond_a: bool,
    /// `(d - mu_inf)/q <= (d + alpha0 - beta0)/p`, or with the infinity
    /// exponents on the right when `use_infinity_rhs`.
    pub cond_b: bool,
    /// Left minus right side of each condition.
    pub residual_a: f64,
    pub residual_b: f64,
    /// All zero- and infinity-exponents coincide.
    pub equality_case: bool,
    pub use_infinity_rhs: bool,
}

pub fn check_weighted_conditions(
    exps: &EnvelopeExponents,
    params: &InequalityParams,
    use_infinity_rhs: bool,
) -> Result<WeightedConditions> {
    let p = params.require("p", "weighted")?;
    let q = params.require("q", "weighted")?;
    let d = params.dim();
    let rhs_a = (d + exps.alpha0 - exps.beta0) / p;
    let rhs_b = if use_infinity_rhs { (d + exps.alpha_inf - exps.beta_inf) / p } else { rhs_a };
    let ra = (d - exps.mu0) / q - rhs_a;
    let rb = (d - exps.mu_inf) / q - rhs_b;
    Ok(WeightedConditions {
        cond_a: ra >= -BALANCE_TOL,
        cond_b: rb <= BALANCE_TOL,
        residual_a: ra,
        residual_b: rb,
        equality_case: exps.mu0 == exps.mu_inf && exps.alpha0 == exps.alpha_inf && exps.beta0 == exps.beta_inf,
        use_infinity_rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormSpec;

    fn p1() -> InequalityParams {
        InequalityParams::new(1)
    }

    #[test]
    fn predicted_exponent_examples() {
        let t = predicted_exponent(FunctionalKind::TargetLebesgue, &p1().with_q(2.0), None).unwrap();
        assert_eq!(t, 0.5);
        let g = predicted_exponent(FunctionalKind::Gagliardo, &p1().with_p(4.0), None).unwrap();
        assert_eq!(g, 0.5);
        let s = predicted_exponent(FunctionalKind::Gradient, &p1().with_s(1.0), None).unwrap();
        assert_eq!(s, 0.0);
        assert!(predicted_exponent(FunctionalKind::Surface, &p1().with_q(2.0), None).is_err());
        assert!(predicted_exponent(FunctionalKind::BglsPassThrough, &p1(), None).is_err());
    }

    #[test]
    fn fit_target_of_bump() {
        let u = TrialFunction::bump(1, 1.0);
        let spec = NormSpec::target(p1().with_q(2.0));
        let r = fit_scaling(&u, &spec, &Domain::WholeSpace, &[0.5, 1.0, 2.0, 4.0], &Numerics::default()).unwrap();
        assert!((r.fitted_slope - 0.5).abs() < 1e-3);
        assert!(r.residual.abs() < 1e-3);
        assert!(r.r_squared > 0.999999);
    }

    #[test]
    fn fit_gagliardo_of_bump() {
        let u = TrialFunction::bump(1, 1.0);
        let spec = NormSpec::gagliardo(p1().with_p(2.0).with_beta(0.5));
        let r = fit_scaling(&u, &spec, &Domain::ball(2.0), &default_theta_grid(), &Numerics::default()).unwrap();
        assert!((r.fitted_slope - 0.75).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn constant_function_is_degenerate() {
        let u = TrialFunction::constant(1, 1.0);
        let spec = NormSpec::gagliardo(p1().with_p(2.0).with_beta(0.5));
        let err = fit_scaling(&u, &spec, &Domain::ball(1.0), &default_theta_grid(), &Numerics::default()).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit(_)));
    }

    #[test]
    fn failure_yields_partial_report() {
        // the whole-space target of a non-decaying function diverges
        let u = TrialFunction::offset(1.0, TrialFunction::bump(1, 1.0));
        let spec = NormSpec::target(p1().with_q(2.0));
        let r = fit_scaling(&u, &spec, &Domain::WholeSpace, &[1.0, 2.0], &Numerics::default()).unwrap();
        assert!(r.failure.is_some());
        assert!(r.theta_grid.is_empty());
    }

    #[test]
    fn balance_examples() {
        let a = p1().with_q(2.0).with_p(4.0);
        assert!(check_necessary_condition(InequalityKind::Ordinary, &a).unwrap().holds);
        let b = p1().with_r(2.0).with_p(8.0).with_q(8.0).with_beta(1.0);
        let c = check_necessary_condition(InequalityKind::Mixed, &b).unwrap();
        assert!(!c.holds);
        assert!((c.residual - 0.375).abs() < 1e-15);
        let s = InequalityParams::new(2).with_q(2.0).with_p(8.0);
        assert!(check_necessary_condition(InequalityKind::Surface { m: 1 }, &s).unwrap().holds);
    }

    #[test]
    fn power_envelope_is_exact() {
        let mu = 0.7;
        let spec = EnvelopeSpec::new(WeightSpec::power(mu), WeightRole::Target, mu, Regime::NearZero, 1);
        let z = [0.1, 0.5, 1.0, 3.0];
        let env = weight_envelope(&spec, &z).unwrap();
        for (zi, v) in z.iter().zip(&env.values) {
            assert!((v / zi.powf(-mu) - 1.0).abs() < 1e-12);
        }
        // smaller trial exponent: ratio theta^(mu0 - mu) decreases in theta, inf at theta -> 1
        let spec = EnvelopeSpec::new(WeightSpec::power(mu), WeightRole::Target, 0.3, Regime::NearZero, 1);
        let env = weight_envelope(&spec, &z).unwrap();
        for (zi, v) in z.iter().zip(&env.values) {
            assert!((v / zi.powf(-mu) - 1.0).abs() < 1e-9);
        }
        assert!(!env.identically_zero);
    }

    #[test]
    fn damped_power_envelopes_are_nonzero() {
        let (mu, delta) = (0.5, 1.0);
        let w = WeightSpec::radial(move |r: f64| r.powf(-mu) * (1.0 + r).powf(-delta));
        let z = [0.01, 0.1, 1.0, 10.0];
        let near0 = weight_envelope(&EnvelopeSpec::new(w.clone(), WeightRole::Target, mu, Regime::NearZero, 1), &z).unwrap();
        let near_inf =
            weight_envelope(&EnvelopeSpec::new(w, WeightRole::Target, mu + delta, Regime::NearInfinity, 1), &z).unwrap();
        assert!(near0.values.iter().all(|v| *v > 0.0));
        assert!(near_inf.values.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn envelope_bounds_bracket_boundary_ratio() {
        let w = WeightSpec::radial(|r: f64| r.powf(-0.4) * (2.0 + r.sin()));
        let z = [0.2, 0.7, 1.5];
        let inf = weight_envelope(&EnvelopeSpec::new(w.clone(), WeightRole::Kernel, 0.1, Regime::NearZero, 1), &z).unwrap();
        let mut s = EnvelopeSpec::new(w.clone(), WeightRole::Kernel, 0.1, Regime::NearZero, 1);
        s.direction = Direction::Sup;
        let sup = weight_envelope(&s, &z).unwrap();
        for (i, zi) in z.iter().enumerate() {
            let at_one = w.at_radius(*zi);
            assert!(inf.values[i] <= at_one && at_one <= sup.values[i]);
        }
    }

    #[test]
    fn weighted_conditions() {
        let params = p1().with_p(2.0).with_q(2.0);
        // (1 - mu)/2 = (1 + alpha - beta)/2 with mu = 0.2, alpha = 0, beta = 0.2
        let c = check_weighted_conditions(&EnvelopeExponents::matched(0.2, 0.0, 0.2), &params, false).unwrap();
        assert!(c.cond_a && c.cond_b && c.equality_case);
        assert!(c.residual_a.abs() < 1e-12 && c.residual_b.abs() < 1e-12);
        let window = EnvelopeExponents { mu0: 0.1, mu_inf: 0.3, ..EnvelopeExponents::matched(0.2, 0.0, 0.2) };
        let c = check_weighted_conditions(&window, &params, false).unwrap();
        assert!(c.cond_a && c.cond_b && c.residual_b < 0.0);
        let big_q = check_weighted_conditions(&EnvelopeExponents::matched(0.2, 0.0, 0.9), &p1().with_p(2.0).with_q(50.0), false)
            .unwrap();
        assert!(!big_q.cond_a);
    }
}
