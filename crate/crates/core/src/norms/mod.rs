//! Norm and seminorm functionals of the four inequality families.
//!
//! All functionals take a trial function, a [`NormSpec`] carrying exponents
//! and optional general weights, a [`Domain`], and [`Numerics`] settings.
//! One-dimensional problems are integrated deterministically; radial
//! integrands in higher dimension go through polar coordinates; everything
//! else is sampled.

pub mod logcusp;

use std::cell::Cell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{norm, Domain, InequalityParams, PairWeight, WeightSpec};
use crate::quad::{
    check_exponent, integrate_1d, integrate_radial, mc_double_integral, mc_integral, mean_var, sample_ball,
    sample_exterior, sample_pair, stream_rng, variance_warnings, McConfig, Method, QuadOptions, QuadratureResult,
    MAX_DIM,
};
use crate::trialfuncs::TrialFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    TargetLebesgue,
    Gagliardo,
    Mixed,
    Gradient,
    Surface,
    BglsPassThrough,
}

impl FunctionalKind {
    pub fn name(&self) -> &'static str {
        match self {
            FunctionalKind::TargetLebesgue => "target_lebesgue",
            FunctionalKind::Gagliardo => "gagliardo",
            FunctionalKind::Mixed => "mixed",
            FunctionalKind::Gradient => "gradient",
            FunctionalKind::Surface => "surface",
            FunctionalKind::BglsPassThrough => "bgls_pass_through",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "target" | "target_lebesgue" => FunctionalKind::TargetLebesgue,
            "gagliardo" => FunctionalKind::Gagliardo,
            "mixed" => FunctionalKind::Mixed,
            "gradient" => FunctionalKind::Gradient,
            "surface" => FunctionalKind::Surface,
            "bgls" | "bgls_pass_through" => FunctionalKind::BglsPassThrough,
            other => return Err(Error::InvalidParameter(format!("unknown functional kind `{other}`"))),
        })
    }
}

/// General weights: `target` multiplies `|u|^q`, `pair` multiplies the
/// difference term, `kernel` is the reciprocal of `W_beta(|x - y|)`.
#[derive(Debug, Clone)]
pub struct NormWeights {
    pub target: WeightSpec,
    pub pair: PairWeight,
    pub kernel: WeightSpec,
}

impl NormWeights {
    /// `|x|^-mu`, `|x|^alpha1 |y|^alpha2`, `|x - y|^-beta`.
    pub fn power(params: &InequalityParams) -> Self {
        Self {
            target: WeightSpec::power(params.mu),
            pair: PairWeight::power(params.alpha1, params.alpha2),
            kernel: WeightSpec::power(params.beta),
        }
    }

    fn validate(&self) -> Result<()> {
        self.target.validate()?;
        self.kernel.validate()?;
        if let PairWeight::Product(a, b) = &self.pair {
            a.validate()?;
            b.validate()?;
        }
        Ok(())
    }

    fn all_power(&self) -> bool {
        self.target.is_power() && self.pair.is_power() && self.kernel.is_power()
    }
}

#[derive(Debug, Clone)]
pub struct NormSpec {
    pub kind: FunctionalKind,
    pub params: InequalityParams,
    pub weights: Option<NormWeights>,
    /// Replace `u(x)` by `u(x) - u(0)` in the target functional.
    pub subtract_origin: bool,
}

impl NormSpec {
    pub fn new(kind: FunctionalKind, params: InequalityParams) -> Self {
        Self { kind, params, weights: None, subtract_origin: false }
    }

    pub fn target(params: InequalityParams) -> Self {
        Self::new(FunctionalKind::TargetLebesgue, params)
    }

    pub fn gagliardo(params: InequalityParams) -> Self {
        Self::new(FunctionalKind::Gagliardo, params)
    }

    pub fn mixed(params: InequalityParams) -> Self {
        Self::new(FunctionalKind::Mixed, params)
    }

    pub fn gradient(params: InequalityParams) -> Self {
        Self::new(FunctionalKind::Gradient, params)
    }

    pub fn surface(params: InequalityParams) -> Self {
        Self::new(FunctionalKind::Surface, params)
    }

    pub fn with_weights(mut self, weights: NormWeights) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn with_subtract_origin(mut self, on: bool) -> Self {
        self.subtract_origin = on;
        self
    }

    fn weights(&self) -> Result<NormWeights> {
        match &self.weights {
            Some(w) => {
                if matches!(self.kind, FunctionalKind::Gradient | FunctionalKind::Surface) {
                    return Err(Error::InvalidParameter(format!(
                        "general weights are not defined for the {} functional",
                        self.kind.name()
                    )));
                }
                w.validate()?;
                Ok(w.clone())
            }
            None => Ok(NormWeights::power(&self.params)),
        }
    }

    fn uses_power_weights(&self) -> bool {
        self.weights.as_ref().is_none_or(|w| w.all_power())
    }
}

/// Accuracy and sampling settings shared by all functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Relative tolerance of deterministic quadrature.
    pub tol: f64,
    pub mc: McConfig,
    /// Use closed forms and polar reductions for recognized families.
    pub closed_forms: bool,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { tol: 1e-8, mc: McConfig::default(), closed_forms: true }
    }
}

impl Numerics {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_mc(mut self, mc: McConfig) -> Self {
        self.mc = mc;
        self
    }

    pub fn without_closed_forms(mut self) -> Self {
        self.closed_forms = false;
        self
    }

    fn opts(&self) -> QuadOptions {
        QuadOptions::with_tol(self.tol)
    }
}

/// Dispatches on `spec.kind`.
pub fn evaluate(u: &TrialFunction, spec: &NormSpec, domain: &Domain, num: &Numerics) -> Result<QuadratureResult> {
    match spec.kind {
        FunctionalKind::TargetLebesgue => target_norm(u, spec, domain, num),
        FunctionalKind::Gagliardo => gagliardo_seminorm(u, spec, domain, num),
        FunctionalKind::Mixed => mixed_seminorm(u, spec, domain, num),
        FunctionalKind::Gradient => gradient_norm(u, spec, domain, num),
        FunctionalKind::Surface => surface_norm(u, spec, domain, num),
        FunctionalKind::BglsPassThrough => {
            Err(Error::Unsupported("BGLS norms are evaluated by the gls module".into()))
        }
    }
}

fn violation(msg: impl Into<String>) -> Error {
    Error::Validation(vec![msg.into()])
}

fn check_common(u: &TrialFunction, params: &InequalityParams, domain: &Domain) -> Result<()> {
    if params.d == 0 {
        return Err(violation("d >= 1"));
    }
    u.check_dim(params.d)?;
    domain.validate(params.d)
}

fn check_exponent_ge1(name: &str, v: f64) -> Result<()> {
    if !(v >= 1.0 && v.is_finite()) {
        return Err(violation(format!("{name} >= 1 (got {v})")));
    }
    Ok(())
}

fn touches_origin(domain: &Domain) -> bool {
    match domain {
        Domain::Interval { lo, hi } => *lo <= 0.0 && *hi >= 0.0,
        _ => true,
    }
}

fn default_origin_exponent(singular_power: f64, d: usize) -> f64 {
    (singular_power - 0.5).max(0.0).min(0.95 * d as f64)
}

/// `[int_D |u|^q W_{-mu}]^{1/q}`, optionally with `u(x) - u(0)`.
pub fn target_norm(u: &TrialFunction, spec: &NormSpec, domain: &Domain, num: &Numerics) -> Result<QuadratureResult> {
    let params = &spec.params;
    if let Domain::Surface { .. } = domain {
        return surface_norm(u, spec, domain, num);
    }
    check_common(u, params, domain)?;
    let q = params.require("q", "target")?;
    check_exponent_ge1("q", q)?;
    let w = spec.weights()?.target;
    if w.is_power() && !(params.mu < params.dim()) {
        return Err(violation(format!("mu < d (mu = {}, d = {})", params.mu, params.d)));
    }
    if w.is_power() && !spec.subtract_origin && touches_origin(domain) {
        if let Some(g) = u.origin_exponent() {
            if !(g * q - params.mu > -params.dim()) {
                return Err(Error::Divergent(format!("|u|^q |x|^-mu is not integrable at the origin (q = {q})")));
            }
        }
    }
    if num.closed_forms && !spec.subtract_origin && w.is_power() {
        if let Some(v) = logcusp_target(u, params.d, q, params.mu, domain)? {
            return Ok(v.root(q));
        }
    }
    Ok(lebesgue_integral(u, q, &w, domain, spec.subtract_origin, params.mu, num)?.root(q))
}

fn logcusp_target(u: &TrialFunction, d: usize, q: f64, mu: f64, domain: &Domain) -> Result<Option<QuadratureResult>> {
    let Some(form) = u.log_cusp_form() else { return Ok(None) };
    if form.offset != 0.0 {
        return Ok(None);
    }
    let fits = match domain {
        Domain::WholeSpace => true,
        Domain::Ball { radius } => *radius >= form.theta,
        _ => false,
    };
    if !fits {
        return Ok(None);
    }
    let v = logcusp::target_integral(d, q, mu, form.theta)? * form.coef.abs().powf(q);
    Ok(Some(QuadratureResult::exact(v)))
}

/// Interval of integration in `d = 1`, clipped to where the integrand lives.
fn line_range(domain: &Domain, support: Option<f64>) -> Result<(f64, f64)> {
    let (lo, hi) = match *domain {
        Domain::WholeSpace => (f64::NEG_INFINITY, f64::INFINITY),
        Domain::Ball { radius } => (-radius, radius),
        Domain::Interval { lo, hi } => (lo, hi),
        Domain::Surface { .. } => return Err(Error::Unsupported("surface domain in a line integral".into())),
    };
    Ok(match support {
        Some(r) => (lo.max(-r), hi.min(r)),
        None => (lo, hi),
    })
}

/// `int_D |u - shift|^q w(|x|)`, where `shift = u(0)` when `subtract`.
fn lebesgue_integral(
    u: &TrialFunction,
    q: f64,
    w: &WeightSpec,
    domain: &Domain,
    subtract: bool,
    singular_power: f64,
    num: &Numerics,
) -> Result<QuadratureResult> {
    let d = u.dim();
    let origin = vec![0.0; d];
    if subtract && !u.eval(&origin).is_finite() {
        return Err(Error::InvalidParameter("u(0) is not finite; the origin-shifted functional is undefined".into()));
    }
    let support = u.support_radius();
    // does the integrand vanish outside the support?
    let vanishes = support.is_some_and(|r| {
        let mut far = vec![0.0; d];
        far[0] = 2.0 * r + 1.0;
        let v = if subtract { u.difference(&far, &origin) } else { u.eval(&far) };
        v == 0.0
    });
    let clip = if vanishes { support } else { None };
    if matches!(domain, Domain::WholeSpace) && clip.is_none() {
        return Err(Error::Divergent("integrand does not vanish at infinity on the whole space".into()));
    }
    let pow = |v: f64| if v == 0.0 { 0.0 } else { v.abs().powf(q) };
    if d == 1 {
        let (lo, hi) = line_range(domain, clip)?;
        let mut sing = u.breakpoints_1d();
        sing.push(0.0);
        return integrate_1d(
            |x| {
                let v = if subtract { u.difference(&[x], &[0.0]) } else { u.eval(&[x]) };
                let v = pow(v);
                if v == 0.0 {
                    0.0
                } else {
                    v * w.at_radius(x.abs())
                }
            },
            lo,
            hi,
            &sing,
            &num.opts(),
        );
    }
    let radius = match (domain, clip) {
        (Domain::Ball { radius }, Some(r)) => radius.min(r),
        (Domain::Ball { radius }, None) => *radius,
        (_, Some(r)) => r,
        _ => return Err(Error::Unsupported("unbounded integration region".into())),
    };
    if u.is_radial() {
        let u0 = if subtract { u.eval_radial(0.0) } else { 0.0 };
        return integrate_radial(
            |rho| {
                let v = pow(u.eval_radial(rho) - u0);
                if v == 0.0 {
                    0.0
                } else {
                    v * w.at_radius(rho)
                }
            },
            d,
            radius,
            &u.radial_breaks(),
            &num.opts(),
        );
    }
    let a = num.mc.origin_exponent.unwrap_or_else(|| default_origin_exponent(singular_power, d));
    let sample_domain = match domain {
        Domain::WholeSpace => Domain::ball(radius),
        other => other.clone(),
    };
    mc_integral(
        |x| {
            let v = if subtract { u.difference(x, &origin) } else { u.eval(x) };
            let v = pow(v);
            if v == 0.0 {
                0.0
            } else {
                v * w.at(x)
            }
        },
        d,
        &sample_domain,
        clip,
        a,
        &num.mc,
    )
}

fn check_permissive_pair(params: &InequalityParams) -> Result<()> {
    let excess = 2.0 * params.dim() + params.alpha1 + params.alpha2 - params.beta;
    if !(excess > 0.0) {
        return Err(violation(format!("2d + alpha1 + alpha2 - beta > 0 (got {excess})")));
    }
    Ok(())
}

fn logcusp_polar(
    u: &TrialFunction,
    params: &InequalityParams,
    p: f64,
    domain: &Domain,
    num: &Numerics,
) -> Result<Option<QuadratureResult>> {
    let Some(form) = u.log_cusp_form() else { return Ok(None) };
    let outer = match domain {
        Domain::WholeSpace => f64::INFINITY,
        Domain::Ball { radius } if *radius >= form.theta => radius / form.theta,
        _ => return Ok(None),
    };
    if params.d > 3 {
        return Ok(None);
    }
    let polar = logcusp::Polar {
        d: params.d,
        p,
        alpha1: params.alpha1,
        alpha2: params.alpha2,
        beta: params.beta,
        outer,
        tol: num.tol,
    };
    polar.integral(&form).map(Some)
}

/// `[int_D int_D |u(x)-u(y)|^p W_alpha(x,y) / W_beta(|x-y|) dx dy]^{1/p}`.
pub fn gagliardo_seminorm(
    u: &TrialFunction,
    spec: &NormSpec,
    domain: &Domain,
    num: &Numerics,
) -> Result<QuadratureResult> {
    Ok(gagliardo_integral(u, spec, domain, num)?.root(spec.params.require("p", "gagliardo")?))
}

/// The double integral behind [`gagliardo_seminorm`], before the `1/p` root.
pub fn gagliardo_integral(
    u: &TrialFunction,
    spec: &NormSpec,
    domain: &Domain,
    num: &Numerics,
) -> Result<QuadratureResult> {
    let params = &spec.params;
    check_common(u, params, domain)?;
    let p = params.require("p", "gagliardo")?;
    check_exponent_ge1("p", p)?;
    check_permissive_pair(params)?;
    let w = spec.weights()?;
    if num.closed_forms && spec.uses_power_weights() {
        if let Some(v) = logcusp_polar(u, params, p, domain, num)? {
            return Ok(v);
        }
    }
    let pow = move |v: f64| if v == 0.0 { 0.0 } else { v.abs().powf(p) };
    let pair = &w.pair;
    let kernel = &w.kernel;
    let d = params.d;
    if d == 1 {
        return nested_1d(
            |x, y| {
                let v = pow(u.difference(&[x], &[y]));
                if v == 0.0 {
                    0.0
                } else {
                    v * pair.at(&[x], &[y]) * kernel.at_radius((x - y).abs())
                }
            },
            |_, inner| inner,
            1.0,
            u,
            domain,
            num,
        );
    }
    mc_double_integral(
        |x, y| {
            let v = pow(u.difference(x, y));
            if v == 0.0 {
                return 0.0;
            }
            let mut r2 = 0.0;
            for (a, b) in x.iter().zip(y) {
                r2 += (a - b) * (a - b);
            }
            v * pair.at(x, y) * kernel.at_radius(r2.sqrt())
        },
        params,
        domain,
        u.support_radius(),
        &num.mc,
    )
}

/// `int int_D inner(o, z) dz do` in `d = 1`, with the inner result passed
/// through `post(o, I(o))` before the outer integration. `inner` must vanish
/// when both points lie outside the support of `u`.
fn nested_1d<I, P>(
    inner: I,
    post: P,
    post_gain: f64,
    u: &TrialFunction,
    domain: &Domain,
    num: &Numerics,
) -> Result<QuadratureResult>
where
    I: Fn(f64, f64) -> f64,
    P: Fn(f64, f64) -> f64,
{
    let support = u.support_radius();
    if matches!(domain, Domain::WholeSpace) && support.is_none() {
        return Err(Error::Unsupported("whole-space integrals need a compactly varying function".into()));
    }
    let (lo, hi) = line_range(domain, None)?;
    let mut sing = u.breakpoints_1d();
    sing.push(0.0);
    if let Some(r) = support {
        sing.push(-r);
        sing.push(r);
    }
    sing.retain(|s| *s >= lo && *s <= hi);
    sing.sort_by(f64::total_cmp);
    sing.dedup();
    let inner_opts = QuadOptions::with_tol(num.tol * 1e-2);
    let worst = Cell::new(0.0f64);
    let unconverged = Cell::new(0usize);
    let evals = Cell::new(0u64);
    let outer_fn = |o: f64| {
        let (a, b) = match support {
            Some(r) if o.abs() > r => (lo.max(-r), hi.min(r)),
            _ => (lo, hi),
        };
        if !(b > a) {
            return post(o, 0.0);
        }
        let res = if o > a && o < b {
            // diagonal inside the range: put it at t = 0 exactly
            let mut pts: Vec<f64> = sing.iter().map(|s| s - o).collect();
            pts.push(0.0);
            integrate_1d(|t| inner(o, o + t), a - o, b - o, &pts, &inner_opts)
        } else {
            let mut pts = sing.clone();
            pts.push(o);
            integrate_1d(|z| inner(o, z), a, b, &pts, &inner_opts)
        };
        match res {
            Ok(r) => {
                evals.set(evals.get() + r.evaluations);
                if !r.warnings.is_empty() {
                    unconverged.set(unconverged.get() + 1);
                }
                worst.set(worst.get().max(r.relative_error()));
                post(o, r.value)
            }
            Err(_) => f64::NAN,
        }
    };
    let mut out = integrate_1d(outer_fn, lo, hi, &sing, &num.opts())?;
    out.error_estimate += post_gain * worst.get().min(1.0) * out.value.abs();
    out.evaluations += evals.get();
    out.method = Method::Nested;
    if unconverged.get() > 0 {
        out.warnings.push(format!("{} inner integrals did not converge", unconverged.get()));
    }
    if !out.value.is_finite() {
        return Err(Error::Numerical("nested quadrature produced a non-finite value".into()));
    }
    Ok(out)
}

/// `{int_D w_out(y) [int_D |u(x)-u(y)|^p w_in(x,y) / W_beta dx]^{q/p} dy}^{1/q}`.
///
/// With power weights `w_in = |x|^alpha2`, `w_out = |y|^alpha1`; with general
/// weights `w_in = W_alpha(x, y)` and `w_out = 1`.
pub fn mixed_seminorm(u: &TrialFunction, spec: &NormSpec, domain: &Domain, num: &Numerics) -> Result<QuadratureResult> {
    let params = &spec.params;
    check_common(u, params, domain)?;
    let p = params.require("p", "mixed")?;
    let q = params.require("q", "mixed")?;
    check_exponent_ge1("p", p)?;
    check_exponent_ge1("q", q)?;
    check_permissive_pair(params)?;
    if num.closed_forms && p == q && spec.uses_power_weights() {
        if let Some(v) = logcusp_polar(u, params, p, domain, num)? {
            return Ok(v.root(p));
        }
    }
    let (inner_w, outer_w): (PairWeight, WeightSpec) = match &spec.weights {
        Some(w) => {
            spec.weights()?;
            (w.pair.clone(), WeightSpec::power(0.0))
        }
        None => (
            PairWeight::Product(WeightSpec::power(-params.alpha2), WeightSpec::power(0.0)),
            WeightSpec::power(-params.alpha1),
        ),
    };
    let kernel = spec.weights()?.kernel;
    let e = q / p;
    let powp = move |v: f64| if v == 0.0 { 0.0 } else { v.abs().powf(p) };
    if params.d == 1 {
        let r = nested_1d(
            |y, x| {
                let v = powp(u.difference(&[x], &[y]));
                if v == 0.0 {
                    0.0
                } else {
                    v * inner_w.at(&[x], &[y]) * kernel.at_radius((x - y).abs())
                }
            },
            |y, inner| if inner == 0.0 { 0.0 } else { inner.max(0.0).powf(e) * outer_w.at_radius(y.abs()) },
            e,
            u,
            domain,
            num,
        )?;
        return Ok(r.root(q));
    }
    Ok(mixed_mc(u, params, &inner_w, &outer_w, &kernel, domain, num)?.root(q))
}

#[allow(clippy::too_many_arguments)]
fn mixed_mc(
    u: &TrialFunction,
    params: &InequalityParams,
    inner_w: &PairWeight,
    outer_w: &WeightSpec,
    kernel: &WeightSpec,
    domain: &Domain,
    num: &Numerics,
) -> Result<QuadratureResult> {
    let cfg = &num.mc;
    let d = params.d;
    if d > MAX_DIM {
        return Err(Error::Unsupported(format!("Monte Carlo sampling in dimension {d}")));
    }
    if cfg.inner_samples < 16 {
        return Err(Error::InvalidParameter(format!(
            "inner budget {} is below the minimum of 16",
            cfg.inner_samples
        )));
    }
    if cfg.outer_samples < 2 {
        return Err(Error::InvalidParameter("outer budget must be >= 2".into()));
    }
    let p = params.require("p", "mixed")?;
    let q = params.require("q", "mixed")?;
    let e = q / p;
    let dd = params.dim();
    let c = cfg.pair_exponent_for(params);
    let a = cfg.origin_exponent.unwrap_or_else(|| default_origin_exponent(-params.alpha1, d));
    check_exponent("pair_exponent", c, d)?;
    check_exponent("origin_exponent", a, d)?;

    enum Shape {
        Bounded { radius: f64, len: f64 },
        Whole { radius: f64, gamma_in: f64, gamma_out: f64 },
    }
    let shape = match domain {
        Domain::Ball { radius } => Shape::Bounded { radius: *radius, len: 2.0 * radius },
        Domain::WholeSpace => {
            let radius = u
                .support_radius()
                .ok_or_else(|| Error::Unsupported("whole-space sampling needs a finite support radius".into()))?;
            let gamma_in = params.beta - params.alpha2;
            let gamma_out = params.beta * e - params.alpha1;
            if !(gamma_in > dd && gamma_out > dd) {
                return Err(Error::Divergent("mixed functional tails are not integrable".into()));
            }
            Shape::Whole { radius, gamma_in, gamma_out }
        }
        _ => return Err(Error::Unsupported("mixed sampling supports balls and the whole space".into())),
    };
    let n_in = cfg.inner_samples;
    let half = n_in / 2;
    let seed = cfg.seed;
    let pow = move |v: f64| if v == 0.0 { 0.0 } else { v.abs().powf(p) };
    let term = |x: &[f64], y: &[f64]| {
        let v = pow(u.difference(x, y));
        if v == 0.0 {
            return 0.0;
        }
        let mut r2 = 0.0;
        for (s, t) in x.iter().zip(y) {
            r2 += (s - t) * (s - t);
        }
        v * inner_w.at(x, y) * kernel.at_radius(r2.sqrt())
    };

    let outer = |i: u64| -> (f64, f64) {
        let mut rng = stream_rng(seed, i);
        let mut yb = [0.0; MAX_DIM];
        let mut xb = [0.0; MAX_DIM];
        let y = &mut yb[..d];
        let qy = match shape {
            Shape::Bounded { radius, .. } => sample_ball(&mut rng, radius, a, y),
            Shape::Whole { radius, gamma_out, .. } => {
                if i % 2 == 0 {
                    sample_ball(&mut rng, radius, a, y)
                } else {
                    sample_exterior(&mut rng, radius, gamma_out, y)
                }
            }
        };
        if !domain.contains(y) {
            return (0.0, 0.0);
        }
        let y: &[f64] = y;
        let mut sums = [[0.0f64; 2]; 2];
        let mut counts = [[0usize; 2]; 2];
        for j in 0..n_in {
            let h = usize::from(j >= half);
            let x = &mut xb[..d];
            let (part, v) = match shape {
                Shape::Bounded { len, .. } => {
                    let qx = sample_pair(&mut rng, y, len, c, x);
                    let v = if domain.contains(x) { term(x, y) } else { 0.0 };
                    (0, if v == 0.0 { 0.0 } else { v / qx })
                }
                Shape::Whole { radius, gamma_in, .. } => {
                    if j % 2 == 0 {
                        let qx = sample_pair(&mut rng, y, norm(y) + radius, c, x);
                        let v = if norm(x) <= radius { term(x, y) } else { 0.0 };
                        (0, if v == 0.0 { 0.0 } else { v / qx })
                    } else {
                        let qx = sample_exterior(&mut rng, radius, gamma_in, x);
                        let v = if norm(y) <= radius { term(x, y) } else { 0.0 };
                        (1, if v == 0.0 { 0.0 } else { v / qx })
                    }
                }
            };
            sums[h][part] += v;
            counts[h][part] += 1;
        }
        let est = |h: usize| -> f64 {
            (0..2).map(|k| if counts[h][k] > 0 { sums[h][k] / counts[h][k] as f64 } else { 0.0 }).sum()
        };
        let (i1, i2) = (est(0), est(1));
        let full = 0.5 * (i1 + i2);
        let g = |v: f64| if v <= 0.0 { 0.0 } else { v.powf(e) };
        let scale = outer_w.at(y) / qy;
        let value = g(full) * scale;
        let bias = (0.5 * (g(i1) + g(i2)) - g(full)) * scale;
        (value, bias)
    };

    let n_out = cfg.outer_samples;
    let pairs: Vec<(f64, f64)> = (0..n_out as u64).into_par_iter().map(outer).collect();
    if pairs.iter().any(|(v, b)| !v.is_finite() || !b.is_finite()) {
        return Err(Error::Numerical("non-finite sample in nested estimate".into()));
    }
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let biases: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (value, var, bias, warnings) = match shape {
        Shape::Bounded { .. } => {
            let (m, v) = mean_var(&values);
            (m, v / n_out as f64, mean_var(&biases).0, variance_warnings(&values, "nested sampler"))
        }
        Shape::Whole { .. } => {
            let split = |xs: &[f64]| -> (Vec<f64>, Vec<f64>) {
                (xs.iter().step_by(2).copied().collect(), xs.iter().skip(1).step_by(2).copied().collect())
            };
            let (v0, v1) = split(&values);
            let (b0, b1) = split(&biases);
            let (m0, s0) = mean_var(&v0);
            let (m1, s1) = mean_var(&v1);
            let mut w = variance_warnings(&v0, "nested sampler (ball)");
            w.extend(variance_warnings(&v1, "nested sampler (exterior)"));
            (
                m0 + m1,
                s0 / v0.len() as f64 + s1 / v1.len() as f64,
                mean_var(&b0).0 + mean_var(&b1).0,
                w,
            )
        }
    };
    Ok(QuadratureResult {
        value,
        error_estimate: var.sqrt() + bias.abs(),
        method: Method::Nested,
        evaluations: (n_out * n_in) as u64,
        seed: Some(seed),
        warnings,
    })
}

/// `|grad u(x)|`, analytic when available, else central differences.
fn grad_magnitude(u: &TrialFunction, x: &[f64]) -> f64 {
    let g = u.gradient(x).unwrap_or_else(|| u.gradient_fd(x, 1e-6));
    norm(&g)
}

/// `[int_D |grad u|^s |x|^-mu dx]^{1/s}`.
pub fn gradient_norm(u: &TrialFunction, spec: &NormSpec, domain: &Domain, num: &Numerics) -> Result<QuadratureResult> {
    let params = &spec.params;
    check_common(u, params, domain)?;
    let s = params.require("s", "gradient")?;
    check_exponent_ge1("s", s)?;
    let w = spec.weights()?.target;
    if !(params.mu < params.dim()) {
        return Err(violation(format!("mu < d (mu = {}, d = {})", params.mu, params.d)));
    }
    let d = params.d;
    let support = u.support_radius();
    if matches!(domain, Domain::WholeSpace) && support.is_none() {
        return Err(Error::Unsupported("whole-space gradient norms need a compactly varying function".into()));
    }
    let pow = |v: f64| if v == 0.0 { 0.0 } else { v.powf(s) };
    let res = if d == 1 {
        let (lo, hi) = line_range(domain, support)?;
        let mut sing = u.breakpoints_1d();
        sing.push(0.0);
        integrate_1d(
            |x| {
                let g = pow(grad_magnitude(u, &[x]));
                if g == 0.0 {
                    0.0
                } else {
                    g * w.at_radius(x.abs())
                }
            },
            lo,
            hi,
            &sing,
            &num.opts(),
        )?
    } else if u.is_radial() && u.radial_derivative(0.5).is_some() {
        let radius = match (domain, support) {
            (Domain::Ball { radius }, Some(r)) => radius.min(r),
            (Domain::Ball { radius }, None) => *radius,
            (_, Some(r)) => r,
            _ => unreachable!(),
        };
        integrate_radial(
            |rho| {
                let g = pow(u.radial_derivative(rho).unwrap_or(f64::NAN).abs());
                if g == 0.0 {
                    0.0
                } else {
                    g * w.at_radius(rho)
                }
            },
            d,
            radius,
            &u.radial_breaks(),
            &num.opts(),
        )?
    } else {
        let a = num.mc.origin_exponent.unwrap_or_else(|| default_origin_exponent(params.mu, d));
        let sample_domain = match (domain, support) {
            (Domain::WholeSpace, Some(r)) => Domain::ball(r),
            (other, _) => other.clone(),
        };
        mc_integral(
            |x| {
                let g = pow(grad_magnitude(u, x));
                if g == 0.0 {
                    0.0
                } else {
                    g * w.at(x)
                }
            },
            d,
            &sample_domain,
            support,
            a,
            &num.mc,
        )?
    };
    if !res.value.is_finite() {
        return Err(Error::Numerical("gradient could not be evaluated for this function".into()));
    }
    Ok(res.root(s))
}

/// `[int_S |u|^q |x|^-mu dsigma]^{1/q}` over the coordinate plane of
/// dimension `m`, restricted to the trace of the domain ball when given.
pub fn surface_norm(u: &TrialFunction, spec: &NormSpec, surface: &Domain, num: &Numerics) -> Result<QuadratureResult> {
    let params = &spec.params;
    let Domain::Surface { m, radius } = *surface else {
        return Err(Error::InvalidParameter("surface_norm needs a surface domain".into()));
    };
    check_common(u, params, surface)?;
    let q = params.require("q", "surface")?;
    check_exponent_ge1("q", q)?;
    spec.weights()?;
    if !(params.mu < m as f64) {
        return Err(violation(format!("mu < m (mu = {}, m = {m})", params.mu)));
    }
    let sub = match radius {
        Some(r) => Domain::ball(r),
        None => Domain::WholeSpace,
    };
    if num.closed_forms {
        if let Some(v) = logcusp_target(u, m, q, params.mu, &sub)? {
            return Ok(v.root(q));
        }
    }
    let trace = TrialFunction::trace(u.clone(), m)?;
    let w = WeightSpec::power(params.mu);
    Ok(lebesgue_integral(&trace, q, &w, &sub, false, params.mu, num)?.root(q))
}

/// Convenience for tests and reports: relative gap `|a - b| / max(|a|, |b|)`.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

#[cfg(test)]
mod tests;
