//! Rayleigh quotients and lower-bound scans for the best constants.
//!
//! Every quotient of an explicit function is a lower bound for the best
//! constant of its inequality. Scans walk the exponent toward the critical
//! threshold and fit the divergence rate of the quotient.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Domain, InequalityKind, InequalityParams};
use crate::norms::{gagliardo_seminorm, gradient_norm, mixed_seminorm, surface_norm, target_norm, NormSpec, Numerics};
use crate::quad::QuadratureResult;
use crate::scaling::linear_fit;
use crate::trialfuncs::TrialFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientSample {
    /// Scan abscissa.
    pub p: f64,
    pub quotient: f64,
    pub lhs: QuadratureResult,
    pub rhs: QuadratureResult,
    /// `quotient - 3 * quotient * (lhs rel. error + rhs rel. error)`.
    pub certified_lower: f64,
}

impl QuotientSample {
    /// Absolute error of the quotient from first-order propagation.
    pub fn combined_error(&self) -> f64 {
        self.quotient.abs() * (self.lhs.relative_error() + self.rhs.relative_error())
    }
}

/// Left and right functionals of `kind` evaluated on `u`.
///
/// * ordinary: target `(q, mu)` over Gagliardo `p`
/// * mixed: target `(r, mu)` over the mixed seminorm `(p, q)`
/// * derivative: Gagliardo `p` over the gradient norm `(s, mu)`
/// * surface: trace norm on the `m`-plane over Gagliardo `p`
pub fn rayleigh_quotient(
    u: &TrialFunction,
    kind: InequalityKind,
    params: &InequalityParams,
    domain: &Domain,
    num: &Numerics,
) -> Result<QuotientSample> {
    let (lhs, rhs) = match kind {
        InequalityKind::Ordinary => (
            target_norm(u, &NormSpec::target(params.clone()), domain, num)?,
            gagliardo_seminorm(u, &NormSpec::gagliardo(params.clone()), domain, num)?,
        ),
        InequalityKind::Mixed => {
            let r = params.require("r", "mixed")?;
            let mut t = params.clone();
            t.q = Some(r);
            (
                target_norm(u, &NormSpec::target(t), domain, num)?,
                mixed_seminorm(u, &NormSpec::mixed(params.clone()), domain, num)?,
            )
        }
        InequalityKind::Derivative => (
            gagliardo_seminorm(u, &NormSpec::gagliardo(params.clone()), domain, num)?,
            gradient_norm(u, &NormSpec::gradient(params.clone()), domain, num)?,
        ),
        InequalityKind::Surface { m } => {
            let radius = match domain {
                Domain::Ball { radius } => Some(*radius),
                Domain::WholeSpace => None,
                _ => return Err(Error::Unsupported("surface quotients need a ball or the whole space".into())),
            };
            (
                surface_norm(u, &NormSpec::surface(params.clone()), &Domain::surface(m, radius), num)?,
                gagliardo_seminorm(u, &NormSpec::gagliardo(params.clone()), domain, num)?,
            )
        }
    };
    if !(rhs.value > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let quotient = lhs.value / rhs.value;
    let mut s = QuotientSample { p: params.p.unwrap_or(f64::NAN), quotient, lhs, rhs, certified_lower: 0.0 };
    s.certified_lower = quotient - 3.0 * s.combined_error();
    Ok(s)
}

/// Trial family of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanFamily {
    LogCusp,
    SmoothBump,
}

impl ScanFamily {
    pub fn build(&self, d: usize) -> TrialFunction {
        match self {
            ScanFamily::LogCusp => TrialFunction::log_cusp(d),
            ScanFamily::SmoothBump => TrialFunction::bump(d, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub kind: InequalityKind,
    pub lambda: f64,
    pub d: usize,
    pub threshold: f64,
    pub scan: Vec<QuotientSample>,
    /// `gamma` in `quotient ~ [p / |p - threshold|]^gamma`.
    pub fitted_rate: f64,
    /// Slope against `1 / |p - threshold|` alone.
    pub rate_vs_distance: f64,
    pub window: [f64; 2],
    pub in_window: bool,
    /// Quotients strictly increase along the scan.
    pub monotone: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn check_grid(grid: &[f64], threshold: f64) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidParameter("scan grid needs at least two points".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("scan grid must increase toward the threshold".into()));
    }
    if grid[0] < 1.0 || grid[grid.len() - 1] >= threshold {
        return Err(Error::InvalidParameter(format!("scan grid must lie in [1, {threshold})")));
    }
    Ok(())
}

/// Runs `sample(p)` over the grid in parallel, truncating at the first failure.
fn run_scan<F>(grid: &[f64], threshold: f64, window: [f64; 2], meta: (InequalityKind, f64, usize), sample: F) -> Result<BlowupFit>
where
    F: Fn(f64) -> Result<QuotientSample> + Sync,
{
    check_grid(grid, threshold)?;
    let results: Vec<Result<QuotientSample>> = grid.par_iter().map(|&p| sample(p)).collect();
    let mut scan = Vec::new();
    let mut truncated = None;
    let mut warnings = Vec::new();
    for (p, r) in grid.iter().zip(results) {
        match r {
            Ok(s) if s.quotient.is_finite() => {
                for w in s.lhs.warnings.iter().chain(&s.rhs.warnings) {
                    warnings.push(format!("p = {p}: {w}"));
                }
                scan.push(s);
            }
            Ok(_) => {
                truncated = Some(format!("p = {p}: non-finite quotient"));
                break;
            }
            Err(e) if e.is_validation() => return Err(e),
            Err(e) => {
                truncated = Some(format!("p = {p}: {e}"));
                break;
            }
        }
    }
    let y: Vec<f64> = scan.iter().map(|s| s.quotient.ln()).collect();
    let fit = |x: Vec<f64>| match linear_fit(&x, &y) {
        Ok((slope, _, _)) => Ok(slope),
        Err(_) if truncated.is_some() => Ok(f64::NAN),
        Err(e) => Err(e),
    };
    let rate = fit(scan.iter().map(|s| (s.p / (threshold - s.p)).ln()).collect())?;
    let rate_vs_distance = fit(scan.iter().map(|s| -(threshold - s.p).ln()).collect())?;
    let monotone = scan.windows(2).all(|w| w[1].quotient > w[0].quotient);
    let (kind, lambda, d) = meta;
    Ok(BlowupFit {
        kind,
        lambda,
        d,
        threshold,
        scan,
        fitted_rate: rate,
        rate_vs_distance,
        window,
        in_window: rate >= window[0] && rate <= window[1],
        monotone,
        truncated,
        warnings,
    })
}

/// Exponents of the threshold scan at abscissa `p`: `q = r = p`,
/// `beta = d(1 + lambda p)`, `alpha = 0`, and `mu` from the balance identity.
pub fn scan_params(kind: InequalityKind, lambda: f64, d: usize, p: f64) -> InequalityParams {
    let df = d as f64;
    let beta = df * (1.0 + lambda * p);
    let base = InequalityParams::new(d).with_p(p).with_q(p).with_beta(beta).with_lambda(lambda);
    match kind {
        InequalityKind::Surface { m } => base.with_mu(m as f64 - df * (1.0 - lambda * p)),
        InequalityKind::Mixed => base.with_r(p).with_mu(lambda * df * p),
        _ => base.with_mu(lambda * df * p),
    }
}

/// Scans the quotient of `family` as `p` approaches `threshold` (default `1/lambda`).
pub fn lower_bound_scan(
    family: ScanFamily,
    kind: InequalityKind,
    lambda: f64,
    d: usize,
    p_grid: &[f64],
    threshold: Option<f64>,
    num: &Numerics,
) -> Result<BlowupFit> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    if kind == InequalityKind::Derivative {
        return Err(Error::InvalidParameter("derivative constants have no threshold; use dd_constant_probe".into()));
    }
    let threshold = threshold.unwrap_or(1.0 / lambda);
    let u = family.build(d);
    let window = [lambda - 0.15, 1.15];
    run_scan(p_grid, threshold, window, (kind, lambda, d), |p| {
        let mut s = rayleigh_quotient(&u, kind, &scan_params(kind, lambda, d, p), &Domain::WholeSpace, num)?;
        s.p = p;
        Ok(s)
    })
}

/// `p0 = 1/lambda + alpha/(lambda d)` for `alpha = alpha1 + alpha2`.
pub fn remark_threshold(alpha1: f64, alpha2: f64, lambda: f64, d: usize) -> f64 {
    1.0 / lambda + (alpha1 + alpha2) / (lambda * d as f64)
}

/// Log-cusp scan with nonnegative pair exponents, `mu = lambda d p - alpha`,
/// toward `p0`.
pub fn remark_scan_general_alpha(
    alpha1: f64,
    alpha2: f64,
    lambda: f64,
    d: usize,
    p_grid: &[f64],
    num: &Numerics,
) -> Result<BlowupFit> {
    if alpha1 < 0.0 || alpha2 < 0.0 {
        return Err(Error::InvalidParameter("pair exponents must be nonnegative".into()));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda must lie in (0, 1), got {lambda}")));
    }
    let alpha = alpha1 + alpha2;
    let p0 = remark_threshold(alpha1, alpha2, lambda, d);
    let df = d as f64;
    let u = TrialFunction::log_cusp(d);
    let window = [1.0 / p0 - 0.15, 1.15];
    run_scan(p_grid, p0, window, (InequalityKind::Ordinary, lambda, d), |p| {
        let params = InequalityParams::new(d)
            .with_p(p)
            .with_q(p)
            .with_alphas(alpha1, alpha2)
            .with_beta(df * (1.0 + lambda * p))
            .with_mu(lambda * df * p - alpha)
            .with_lambda(lambda);
        let mut s = rayleigh_quotient(&u, InequalityKind::Ordinary, &params, &Domain::WholeSpace, num)?;
        s.p = p;
        Ok(s)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdSample {
    pub p: f64,
    pub s: f64,
    pub mu: f64,
    pub sample: QuotientSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DdProbe {
    pub lambda: f64,
    pub d: usize,
    pub samples: Vec<DdSample>,
    /// `(p, s, reason)` of pairs left out.
    pub skipped: Vec<(f64, f64, String)>,
    /// Largest over smallest quotient.
    pub ratio: f64,
    pub ratio_bound: f64,
    pub bounded: bool,
}

/// Derivative-difference quotients of a bump over a `(p, s)` grid, with
/// `beta = d(1 + lambda p)` and `mu` solving the balance identity.
pub fn dd_constant_probe(
    lambda: f64,
    d: usize,
    p_grid: &[f64],
    s_grid: &[f64],
    ratio_bound: f64,
    num: &Numerics,
) -> Result<DdProbe> {
    let df = d as f64;
    let u = TrialFunction::bump(d, 1.0);
    let pairs: Vec<(f64, f64)> = p_grid.iter().flat_map(|p| s_grid.iter().map(move |s| (*p, *s))).collect();
    let results: Vec<(f64, f64, Result<DdSample>)> = pairs
        .par_iter()
        .map(|&(p, s)| {
            let beta = df * (1.0 + lambda * p);
            let mu = df - s * (1.0 + (2.0 * df - beta) / p);
            let run = || -> Result<DdSample> {
                if !(mu < df) {
                    return Err(Error::Validation(vec![format!("mu < d (balance gives mu = {mu})")]));
                }
                let params = InequalityParams::new(d).with_p(p).with_s(s).with_beta(beta).with_mu(mu).with_lambda(lambda);
                let mut sample = rayleigh_quotient(&u, InequalityKind::Derivative, &params, &Domain::WholeSpace, num)?;
                sample.p = p;
                Ok(DdSample { p, s, mu, sample })
            };
            (p, s, run())
        })
        .collect();
    let mut samples = Vec::new();
    let mut skipped = Vec::new();
    for (p, s, r) in results {
        match r {
            Ok(x) => samples.push(x),
            Err(e) => skipped.push((p, s, e.to_string())),
        }
    }
    let qs: Vec<f64> = samples.iter().map(|s| s.sample.quotient).collect();
    let (lo, hi) = qs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), q| (a.min(*q), b.max(*q)));
    let ratio = if samples.is_empty() { f64::NAN } else { hi / lo };
    Ok(DdProbe { lambda, d, samples, skipped, ratio, ratio_bound, bounded: ratio <= ratio_bound })
}
