//! Exponent parameters, weights and domains, plus the admissibility and
//! exponent-balance checks shared by every other module.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent/weight tuple of a Hardy-Sobolev type inequality.
///
/// `alpha1`, `alpha2` are the exponents of the pair weight `|x|^alpha1 |y|^alpha2`,
/// `beta` the kernel exponent of `|x-y|^-beta` and `mu` the exponent of the
/// target weight `|x|^-mu`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityParams {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default)]
    pub alpha1: f64,
    #[serde(default)]
    pub alpha2: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl InequalityParams {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            p: None,
            q: None,
            r: None,
            s: None,
            alpha1: 0.0,
            alpha2: 0.0,
            beta: 0.0,
            mu: 0.0,
            lambda: None,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_s(mut self, s: f64) -> Self {
        self.s = Some(s);
        self
    }

    pub fn with_alphas(mut self, alpha1: f64, alpha2: f64) -> Self {
        self.alpha1 = alpha1;
        self.alpha2 = alpha2;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn dim(&self) -> f64 {
        self.d as f64
    }

    pub fn alpha(&self) -> f64 {
        self.alpha1 + self.alpha2
    }

    pub fn require(&self, name: &'static str, kind: &str) -> Result<f64> {
        let v = match name {
            "p" => self.p,
            "q" => self.q,
            "r" => self.r,
            "s" => self.s,
            "lambda" => self.lambda,
            _ => None,
        };
        v.ok_or_else(|| Error::MissingExponent {
            kind: kind.to_string(),
            name,
        })
    }
}

/// `mu = lambda * d * q`, the convention stated next to the ordinary inequality.
pub fn mu_from_q(lambda: f64, d: usize, q: f64) -> f64 {
    lambda * d as f64 * q
}

/// `mu = lambda * d * p`, the convention used by the best-constant scans.
pub fn mu_from_p(lambda: f64, d: usize, p: f64) -> f64 {
    lambda * d as f64 * p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMode {
    /// Literal admissibility conditions, including `beta < 1`.
    Strict,
    /// Only what the quadrature needs for convergence.
    Permissive,
}

/// The four inequality families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InequalityKind {
    Ordinary,
    Mixed,
    Derivative,
    Surface { m: usize },
}

impl InequalityKind {
    pub fn name(&self) -> &'static str {
        match self {
            InequalityKind::Ordinary => "ordinary",
            InequalityKind::Mixed => "mixed",
            InequalityKind::Derivative => "derivative",
            InequalityKind::Surface { .. } => "surface",
        }
    }

    pub fn required_exponents(&self) -> &'static [&'static str] {
        match self {
            InequalityKind::Ordinary => &["p", "q"],
            InequalityKind::Mixed => &["p", "q", "r"],
            InequalityKind::Derivative => &["p", "s"],
            InequalityKind::Surface { .. } => &["p", "q"],
        }
    }

    pub fn parse(name: &str, m: Option<usize>) -> Result<Self> {
        match name {
            "ordinary" => Ok(InequalityKind::Ordinary),
            "mixed" => Ok(InequalityKind::Mixed),
            "derivative" => Ok(InequalityKind::Derivative),
            "surface" => Ok(InequalityKind::Surface { m: m.unwrap_or(1) }),
            other => Err(Error::InvalidParameter(format!("unknown inequality kind `{other}`"))),
        }
    }
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InequalityKind::Surface { m } => write!(f, "surface(m={m})"),
            k => f.write_str(k.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, constraint: &str) -> bool {
        self.violations.iter().any(|v| v.constraint == constraint)
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Validation(
                self.violations.into_iter().map(|v| v.constraint).collect(),
            ))
        }
    }
}

/// Checks admissibility of `params`.
///
/// When `kind` is given the exponents that kind needs must be present,
/// otherwise a `MissingExponent` error names the first absent one. The
/// returned report lists violations sorted by constraint name.
pub fn validate_params(
    params: &InequalityParams,
    mode: ValidationMode,
    kind: Option<InequalityKind>,
) -> Result<ValidationReport> {
    if let Some(kind) = kind {
        for name in kind.required_exponents() {
            params.require(name, kind.name())?;
        }
        if let InequalityKind::Surface { m } = kind {
            check_surface_dim(m, params.d)?;
        }
    }

    let d = params.dim();
    let mut out = Vec::new();
    let mut push = |ok: bool, constraint: &str, detail: String| {
        if !ok {
            out.push(Violation {
                constraint: constraint.to_string(),
                detail,
            });
        }
    };

    push(params.d >= 1, "d >= 1", format!("d = {}", params.d));
    let scalars = [
        ("alpha1", params.alpha1),
        ("alpha2", params.alpha2),
        ("beta", params.beta),
        ("mu", params.mu),
    ];
    for (name, v) in scalars {
        push(v.is_finite(), &format!("{name} finite"), format!("{name} = {v}"));
    }
    for (name, v) in [("p", params.p), ("q", params.q), ("r", params.r), ("s", params.s)] {
        if let Some(v) = v {
            push(v.is_finite() && v >= 1.0, &format!("{name} >= 1"), format!("{name} = {v}"));
        }
    }

    push(params.mu < d, "mu < d", format!("mu = {}, d = {}", params.mu, params.d));

    match mode {
        ValidationMode::Strict => {
            push(
                params.alpha1 > -d,
                "alpha1 > -d",
                format!("alpha1 = {}", params.alpha1),
            );
            push(
                params.alpha2 > -d,
                "alpha2 > -d",
                format!("alpha2 = {}", params.alpha2),
            );
            push(params.beta < 1.0, "beta < 1", format!("beta = {}", params.beta));
            push(
                params.alpha() - params.beta > -d,
                "alpha1 + alpha2 - beta > -d",
                format!("alpha1 + alpha2 - beta = {}", params.alpha() - params.beta),
            );
            let upper = 1.0 / (2.0 * d - 1.0);
            let (ok, detail) = match params.lambda {
                Some(l) => (l > 0.0 && l < upper, format!("lambda = {l}, bound = {upper}")),
                None => (false, "lambda not set".to_string()),
            };
            push(ok, "lambda in (0, 1/(2d-1))", detail);
        }
        ValidationMode::Permissive => {
            let s = 2.0 * d + params.alpha() - params.beta;
            push(
                s > 0.0,
                "2d + alpha1 + alpha2 - beta > 0",
                format!("2d + alpha1 + alpha2 - beta = {s}"),
            );
        }
    }

    out.sort_by(|a, b| a.constraint.cmp(&b.constraint));
    Ok(ValidationReport { violations: out })
}

pub(crate) fn check_surface_dim(m: usize, d: usize) -> Result<()> {
    if m < 1 || m + 1 > d {
        return Err(Error::InvalidParameter(format!(
            "surface dimension m = {m} outside [1, d-1] for d = {d}"
        )));
    }
    Ok(())
}

/// Left side minus right side of the exponent balance identity of `kind`.
///
/// * ordinary: `(d-mu)/q - (2d+alpha1+alpha2-beta)/p`
/// * mixed: `(d-mu)/r - (d+alpha2-beta)/p - (d+alpha1)/q`
/// * derivative: `(d-mu)/s - 1 - (2d+alpha1+alpha2-beta)/p`
/// * surface: `(m-mu)/q - (2d+alpha1+alpha2-beta)/p`
pub fn balance_condition(params: &InequalityParams, kind: InequalityKind) -> Result<f64> {
    let (lhs, rhs) = balance_sides(params, kind)?;
    Ok(lhs - rhs)
}

/// The two homogeneity exponents compared by [`balance_condition`].
pub fn balance_sides(params: &InequalityParams, kind: InequalityKind) -> Result<(f64, f64)> {
    let name = kind.name();
    let d = params.dim();
    let gagliardo = |p: f64| (2.0 * d + params.alpha1 + params.alpha2 - params.beta) / p;
    Ok(match kind {
        InequalityKind::Ordinary => {
            let p = params.require("p", name)?;
            let q = params.require("q", name)?;
            ((d - params.mu) / q, gagliardo(p))
        }
        InequalityKind::Mixed => {
            let p = params.require("p", name)?;
            let q = params.require("q", name)?;
            let r = params.require("r", name)?;
            (
                (d - params.mu) / r,
                (d + params.alpha2 - params.beta) / p + (d + params.alpha1) / q,
            )
        }
        InequalityKind::Derivative => {
            let p = params.require("p", name)?;
            let s = params.require("s", name)?;
            ((d - params.mu) / s - 1.0, gagliardo(p))
        }
        InequalityKind::Surface { m } => {
            check_surface_dim(m, params.d)?;
            let p = params.require("p", name)?;
            let q = params.require("q", name)?;
            ((m as f64 - params.mu) / q, gagliardo(p))
        }
    })
}

/// A radial weight function `W(z) = w(|z|)`.
#[derive(Clone)]
pub struct RadialFn(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for RadialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RadialFn(..)")
    }
}

/// Weight specification. A power weight with exponent `e` has value `|z|^-e`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSpec {
    Power { exponent: f64 },
    /// Tabulated radial weight `(|z|, value)`, interpolated log-log and
    /// extended by the end slopes.
    Table { nodes: Vec<(f64, f64)> },
    #[serde(skip)]
    Radial(RadialFn),
}

impl WeightSpec {
    pub fn power(exponent: f64) -> Self {
        WeightSpec::Power { exponent }
    }

    pub fn radial<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        WeightSpec::Radial(RadialFn(Arc::new(f)))
    }

    pub fn table(mut nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidParameter("weight table needs at least two nodes".into()));
        }
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        if nodes.iter().any(|&(r, w)| !(r > 0.0 && w > 0.0 && r.is_finite() && w.is_finite())) {
            return Err(Error::InvalidParameter(
                "weight table nodes must be positive and finite".into(),
            ));
        }
        if nodes.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("duplicate weight table abscissa".into()));
        }
        Ok(WeightSpec::Table { nodes })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightSpec::Power { exponent } if !exponent.is_finite() => Err(
                Error::InvalidParameter("power weight exponent must be finite".into()),
            ),
            WeightSpec::Table { nodes } => WeightSpec::table(nodes.clone()).map(|_| ()),
            _ => Ok(()),
        }
    }

    pub fn is_power(&self) -> bool {
        matches!(self, WeightSpec::Power { .. })
    }

    /// Value at radius `r = |z|`.
    #[inline]
    pub fn at_radius(&self, r: f64) -> f64 {
        match self {
            WeightSpec::Power { exponent } => {
                if *exponent == 0.0 {
                    1.0
                } else {
                    r.powf(-exponent)
                }
            }
            WeightSpec::Table { nodes } => loglog_interp(nodes, r),
            WeightSpec::Radial(f) => (f.0)(r),
        }
    }

    #[inline]
    pub fn at(&self, z: &[f64]) -> f64 {
        self.at_radius(norm(z))
    }
}

fn loglog_interp(nodes: &[(f64, f64)], r: f64) -> f64 {
    if r <= 0.0 {
        // extend the first slope toward the origin
        let (r0, w0) = nodes[0];
        let (r1, w1) = nodes[1];
        let slope = (w1.ln() - w0.ln()) / (r1.ln() - r0.ln());
        return if slope < 0.0 { f64::INFINITY } else if slope == 0.0 { w0 } else { 0.0 };
    }
    let lr = r.ln();
    let i = match nodes.iter().position(|&(x, _)| x >= r) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => nodes.len() - 2,
    };
    let (r0, w0) = nodes[i];
    let (r1, w1) = nodes[i + 1];
    let t = (lr - r0.ln()) / (r1.ln() - r0.ln());
    (w0.ln() + t * (w1.ln() - w0.ln())).exp()
}

/// Two-argument pair weight `W_alpha(x, y)`.
#[derive(Clone)]
pub enum PairWeight {
    /// `W(x) * W(y)` from two radial weights.
    Product(WeightSpec, WeightSpec),
    /// Arbitrary positive weight; allowed only in the pair slot.
    Custom(Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for PairWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairWeight::Product(a, b) => f.debug_tuple("Product").field(a).field(b).finish(),
            PairWeight::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PairWeight {
    /// `|x|^alpha1 |y|^alpha2`.
    pub fn power(alpha1: f64, alpha2: f64) -> Self {
        PairWeight::Product(WeightSpec::power(-alpha1), WeightSpec::power(-alpha2))
    }

    pub fn is_power(&self) -> bool {
        matches!(self, PairWeight::Product(a, b) if a.is_power() && b.is_power())
    }

    /// Exponents `(alpha1, alpha2)` when this is a power weight.
    pub fn power_exponents(&self) -> Option<(f64, f64)> {
        match self {
            PairWeight::Product(WeightSpec::Power { exponent: a }, WeightSpec::Power { exponent: b }) => {
                Some((-a, -b))
            }
            _ => None,
        }
    }

    #[inline]
    pub fn at(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            PairWeight::Product(a, b) => a.at(x) * b.at(y),
            PairWeight::Custom(f) => f(x, y),
        }
    }
}

/// Integration domain in `R^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Domain {
    WholeSpace,
    /// Centered ball `|x| <= radius`.
    Ball { radius: f64 },
    /// One-dimensional interval `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
    /// Coordinate subspace `x_{m+1} = ... = x_d = 0`, optionally restricted
    /// to the trace of the centered ball of the given radius.
    Surface {
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
}

impl Domain {
    pub fn ball(radius: f64) -> Self {
        Domain::Ball { radius }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Domain::Interval { lo, hi }
    }

    pub fn surface(m: usize, radius: Option<f64>) -> Self {
        Domain::Surface { m, radius }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match *self {
            Domain::WholeSpace => Ok(()),
            Domain::Ball { radius } => {
                if radius > 0.0 && radius.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("ball radius must be > 0, got {radius}")))
                }
            }
            Domain::Interval { lo, hi } => {
                if d != 1 {
                    Err(Error::InvalidParameter("interval domains require d = 1".into()))
                } else if lo < hi && lo.is_finite() && hi.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("empty interval [{lo}, {hi}]")))
                }
            }
            Domain::Surface { m, radius } => {
                check_surface_dim(m, d)?;
                match radius {
                    Some(r) if !(r > 0.0 && r.is_finite()) => Err(Error::InvalidParameter(
                        format!("surface trace radius must be > 0, got {r}"),
                    )),
                    _ => Ok(()),
                }
            }
        }
    }

    /// The domain mapped by `x -> theta x`.
    pub fn dilate(&self, theta: f64) -> Domain {
        match *self {
            Domain::WholeSpace => Domain::WholeSpace,
            Domain::Ball { radius } => Domain::Ball { radius: radius * theta },
            Domain::Interval { lo, hi } => Domain::Interval {
                lo: lo * theta,
                hi: hi * theta,
            },
            Domain::Surface { m, radius } => Domain::Surface {
                m,
                radius: radius.map(|r| r * theta),
            },
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            Domain::WholeSpace => true,
            Domain::Ball { radius } => norm(x) <= radius,
            Domain::Interval { lo, hi } => x[0] >= lo && x[0] <= hi,
            Domain::Surface { m, radius } => {
                x[m..].iter().all(|&c| c == 0.0) && radius.is_none_or(|r| norm(x) <= r)
            }
        }
    }

    /// Radius of the smallest centered ball containing the domain.
    pub fn outer_radius(&self) -> f64 {
        match *self {
            Domain::WholeSpace => f64::INFINITY,
            Domain::Ball { radius } => radius,
            Domain::Interval { lo, hi } => lo.abs().max(hi.abs()),
            Domain::Surface { radius, .. } => radius.unwrap_or(f64::INFINITY),
        }
    }
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    match x.len() {
        1 => x[0].abs(),
        2 => x[0].hypot(x[1]),
        _ => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> InequalityParams {
        InequalityParams::new(1).with_mu(0.5).with_lambda(0.3)
    }

    #[test]
    fn strict_valid_example() {
        let r = validate_params(&base(), ValidationMode::Strict, None).unwrap();
        assert!(r.is_valid(), "{r:?}");
    }

    #[test]
    fn strict_mu_violation() {
        let p = base().with_mu(1.5);
        let r = validate_params(&p, ValidationMode::Strict, None).unwrap();
        assert!(r.violates("mu < d"));
    }

    #[test]
    fn beta_from_scan_hypothesis_strict_vs_permissive() {
        // beta = d(1 + lambda p) with lambda = 0.5, p = 1.5
        let beta = 1.0 * (1.0 + 0.5 * 1.5);
        assert_eq!(beta, 1.75);
        let p = InequalityParams::new(1).with_lambda(0.5).with_beta(beta);
        let strict = validate_params(&p, ValidationMode::Strict, None).unwrap();
        assert!(strict.violates("beta < 1"));
        let permissive = validate_params(&p, ValidationMode::Permissive, None).unwrap();
        assert!(permissive.is_valid());
        for (b, bad) in [(1.99, false), (2.0, true), (2.5, true)] {
            let r = validate_params(&p.clone().with_beta(b), ValidationMode::Permissive, None)
                .unwrap();
            assert_eq!(r.violates("2d + alpha1 + alpha2 - beta > 0"), bad, "beta = {b}");
        }
    }

    #[test]
    fn missing_exponent_named() {
        let p = InequalityParams::new(1).with_p(2.0);
        let err = validate_params(&p, ValidationMode::Permissive, Some(InequalityKind::Ordinary))
            .unwrap_err();
        match err {
            Error::MissingExponent { name, .. } => assert_eq!(name, "q"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn validation_is_idempotent_and_sorted() {
        let p = InequalityParams::new(1).with_mu(3.0).with_beta(5.0).with_alphas(-4.0, -4.0);
        let a = validate_params(&p, ValidationMode::Strict, None).unwrap();
        let b = validate_params(&p, ValidationMode::Strict, None).unwrap();
        assert_eq!(a, b);
        let names: Vec<_> = a.violations.iter().map(|v| v.constraint.clone()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn balance_examples() {
        let p = InequalityParams::new(1).with_q(2.0).with_p(4.0);
        assert_eq!(balance_condition(&p, InequalityKind::Ordinary).unwrap(), 0.0);
        let p2 = p.clone().with_p(2.0);
        assert_eq!(balance_condition(&p2, InequalityKind::Ordinary).unwrap(), -0.5);
        for pp in [1.5, 2.0, 7.0] {
            let p3 = InequalityParams::new(1).with_s(1.0).with_p(pp);
            let res = balance_condition(&p3, InequalityKind::Derivative).unwrap();
            assert!((res + 2.0 / pp).abs() < 1e-15);
        }
    }

    #[test]
    fn surface_balance_and_range() {
        let p = InequalityParams::new(2).with_q(2.0).with_p(8.0);
        assert_eq!(balance_condition(&p, InequalityKind::Surface { m: 1 }).unwrap(), 0.0);
        assert!(balance_condition(&p, InequalityKind::Surface { m: 2 }).is_err());
        assert!(balance_condition(&p, InequalityKind::Surface { m: 0 }).is_err());
    }

    #[test]
    fn mixed_balance_example() {
        let p = InequalityParams::new(1).with_r(2.0).with_beta(1.0).with_p(8.0).with_q(8.0);
        let res = balance_condition(&p, InequalityKind::Mixed).unwrap();
        assert!((res - 0.375).abs() < 1e-15);
    }

    #[test]
    fn mu_conventions_differ() {
        assert_eq!(mu_from_q(0.5, 2, 3.0), 3.0);
        assert_eq!(mu_from_p(0.25, 1, 2.0), 0.5);
    }

    #[test]
    fn weights() {
        assert_eq!(WeightSpec::power(2.0).at_radius(2.0), 0.25);
        assert_eq!(WeightSpec::power(0.0).at_radius(0.0), 1.0);
        let t = WeightSpec::table(vec![(1.0, 1.0), (2.0, 0.25)]).unwrap();
        assert!((t.at_radius(4.0) - 1.0 / 16.0).abs() < 1e-12);
        assert!((t.at_radius(2f64.sqrt()) - 0.5).abs() < 1e-12);
        assert!(WeightSpec::power(f64::NAN).validate().is_err());
        let pw = PairWeight::power(1.0, 2.0);
        assert_eq!(pw.at(&[2.0], &[3.0]), 18.0);
        assert_eq!(pw.power_exponents(), Some((1.0, 2.0)));
    }

    #[test]
    fn domain_dilation_and_validation() {
        assert_eq!(Domain::ball(1.0).dilate(2.0), Domain::ball(2.0));
        assert!(Domain::ball(0.0).validate(1).is_err());
        assert!(Domain::surface(2, None).validate(2).is_err());
        assert!(Domain::surface(1, None).validate(2).is_ok());
        assert!(Domain::surface(1, None).contains(&[0.3, 0.0]));
        assert!(!Domain::surface(1, None).contains(&[0.3, 0.1]));
        assert!(Domain::interval(0.0, 1.0).validate(2).is_err());
    }

    #[test]
    fn params_json_field_names() {
        let json = r#"{"d":1,"p":2.0,"q":2.0,"alpha1":0.0,"alpha2":0.0,"beta":1.5,"mu":0.5,"lambda":0.25}"#;
        let p: InequalityParams = serde_json::from_str(json).unwrap();
        assert_eq!(p.beta, 1.5);
        assert!(serde_json::from_str::<InequalityParams>(r#"{"d":1,"gamma":1}"#).is_err());
    }
}
