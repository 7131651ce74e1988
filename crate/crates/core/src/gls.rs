//! Bilateral Grand Lebesgue norms, anisotropic Lebesgue norms and the
//! embedding checks built on them.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::rayleigh_quotient;
use crate::error::{Error, Result};
use crate::model::{Domain, InequalityKind, InequalityParams};
use crate::norms::{gagliardo_seminorm, mixed_seminorm, target_norm, NormSpec, Numerics};
use crate::quad::{integrate_1d, Method, QuadOptions, QuadratureResult};
use crate::scaling::golden_min;
use crate::trialfuncs::{Family, TrialFunction};

/// One factor of an analytic `psi`: a constant, `p^e`, or `|p - c|^g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiFactor {
    Const(f64),
    Pow(f64),
    AbsDiff { c: f64, gamma: f64 },
}

/// Product of [`PsiFactor`]s, parsed from text such as `2 * p^1.5 * |p-2|^-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiExpr(pub Vec<PsiFactor>);

impl PsiExpr {
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |f: &str| Error::Config(format!("cannot parse psi factor `{f}`"));
        let num = |s: &str, f: &str| s.trim().parse::<f64>().map_err(|_| bad(f));
        let mut out = Vec::new();
        for raw in text.split('*') {
            let f = raw.trim();
            if f.is_empty() {
                return Err(bad(raw));
            }
            let (base, exp) = match f.rfind('^') {
                Some(i) if !f[..i].trim_end().ends_with('|') && f[..i].contains('|') => return Err(bad(f)),
                Some(i) => (f[..i].trim(), Some(num(&f[i + 1..], f)?)),
                None => (f, None),
            };
            let e = exp.unwrap_or(1.0);
            if base == "p" {
                out.push(PsiFactor::Pow(e));
            } else if base.starts_with('|') && base.ends_with('|') && base.len() > 2 {
                let inner: String = base[1..base.len() - 1].chars().filter(|c| !c.is_whitespace()).collect();
                let c = if let Some(rest) = inner.strip_prefix("p-") {
                    num(rest, f)?
                } else if let Some(rest) = inner.strip_suffix("-p") {
                    num(rest, f)?
                } else if let Some(rest) = inner.strip_prefix("p+") {
                    -num(rest, f)?
                } else {
                    return Err(bad(f));
                };
                out.push(PsiFactor::AbsDiff { c, gamma: e });
            } else if exp.is_none() {
                out.push(PsiFactor::Const(num(base, f)?));
            } else {
                out.push(PsiFactor::Const(num(base, f)?.powf(e)));
            }
        }
        Ok(Self(out))
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.0
            .iter()
            .map(|f| match *f {
                PsiFactor::Const(c) => c,
                PsiFactor::Pow(e) => p.powf(e),
                PsiFactor::AbsDiff { c, gamma } => (p - c).abs().powf(gamma),
            })
            .product()
    }
}

impl fmt::Display for PsiExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|x| match x {
                PsiFactor::Const(c) => format!("{c}"),
                PsiFactor::Pow(e) => format!("p^{e}"),
                PsiFactor::AbsDiff { c, gamma } => format!("|p-{c}|^{gamma}"),
            })
            .collect();
        f.write_str(&parts.join(" * "))
    }
}

/// `p`-norm source behind a natural `psi`.
pub struct NaturalPsi {
    target: GlsTarget,
    domain: Domain,
    num: Numerics,
    table: Vec<(f64, f64)>,
    cache: Mutex<BTreeMap<u64, f64>>,
}

impl NaturalPsi {
    /// `|g|_p`, memoized; `+inf` where the norm diverges.
    pub fn value(&self, p: f64) -> f64 {
        if let Some(v) = self.cache.lock().expect("psi cache poisoned").get(&p.to_bits()) {
            return *v;
        }
        let v = p_norm(&self.target, p, &self.domain, &self.num).map(|r| r.value).unwrap_or(f64::INFINITY);
        self.cache.lock().expect("psi cache poisoned").insert(p.to_bits(), v);
        v
    }

    pub fn table(&self) -> &[(f64, f64)] {
        &self.table
    }
}

#[derive(Clone)]
pub enum PsiKind {
    Analytic(PsiExpr),
    Natural(Arc<NaturalPsi>),
    /// `1` at `p = r`, `+inf` elsewhere.
    Degenerate(f64),
    /// Nodes `(p, psi)`, linear in between, constant beyond the ends.
    Table(Vec<(f64, f64)>),
    Product(Box<PsiFunction>, Box<PsiFunction>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for PsiKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiKind::Analytic(e) => write!(f, "Analytic({e})"),
            PsiKind::Natural(n) => write!(f, "Natural({} nodes)", n.table.len()),
            PsiKind::Degenerate(r) => write!(f, "Degenerate({r})"),
            PsiKind::Table(t) => write!(f, "Table({} nodes)", t.len()),
            PsiKind::Product(a, b) => write!(f, "Product({:?}, {:?})", a.kind, b.kind),
            PsiKind::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A positive function on `(a, b)`, `+inf` outside.
#[derive(Debug, Clone)]
pub struct PsiFunction {
    pub a: f64,
    pub b: f64,
    pub kind: PsiKind,
}

impl PsiFunction {
    fn checked(a: f64, b: f64, kind: PsiKind) -> Result<Self> {
        if !(a >= 1.0 && b > a) {
            return Err(Error::InvalidParameter(format!("psi interval needs 1 <= a < b, got ({a}, {b})")));
        }
        Ok(Self { a, b, kind })
    }

    pub fn analytic(a: f64, b: f64, formula: &str) -> Result<Self> {
        Self::checked(a, b, PsiKind::Analytic(PsiExpr::parse(formula)?))
    }

    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::checked(a, b, PsiKind::Analytic(PsiExpr(vec![PsiFactor::Const(c)])))
    }

    pub fn degenerate(a: f64, b: f64, r: f64) -> Result<Self> {
        if !(r > a && r < b) {
            return Err(Error::InvalidParameter(format!("degenerate point {r} outside ({a}, {b})")));
        }
        Self::checked(a, b, PsiKind::Degenerate(r))
    }

    pub fn table(a: f64, b: f64, mut nodes: Vec<(f64, f64)>) -> Result<Self> {
        if nodes.is_empty() || nodes.iter().any(|(p, v)| !p.is_finite() || !(*v > 0.0)) {
            return Err(Error::InvalidParameter("psi table needs positive values at finite nodes".into()));
        }
        nodes.sort_by(|x, y| x.0.total_cmp(&y.0));
        Self::checked(a, b, PsiKind::Table(nodes))
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(a: f64, b: f64, f: F) -> Result<Self> {
        Self::checked(a, b, PsiKind::Custom(Arc::new(f)))
    }

    /// Pointwise product on the intersection of the intervals.
    pub fn product(f: PsiFunction, g: PsiFunction) -> Result<Self> {
        Self::checked(f.a.max(g.a), f.b.min(g.b), PsiKind::Product(Box::new(f), Box::new(g)))
    }

    pub fn value(&self, p: f64) -> f64 {
        if let PsiKind::Degenerate(r) = self.kind {
            return if p == r { 1.0 } else { f64::INFINITY };
        }
        if !(p > self.a && p < self.b) {
            return f64::INFINITY;
        }
        match &self.kind {
            PsiKind::Analytic(e) => e.eval(p),
            PsiKind::Natural(n) => n.value(p),
            PsiKind::Degenerate(_) => unreachable!(),
            PsiKind::Table(t) => interp(t, p),
            PsiKind::Product(f, g) => f.value(p) * g.value(p),
            PsiKind::Custom(f) => f(p),
        }
    }
}

fn interp(t: &[(f64, f64)], p: f64) -> f64 {
    let i = t.partition_point(|n| n.0 < p);
    if i == 0 {
        return t[0].1;
    }
    if i == t.len() {
        return t[t.len() - 1].1;
    }
    let ((x0, y0), (x1, y1)) = (t[i - 1], t[i]);
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * (p - x0) / (x1 - x0)
}

/// Serializable `psi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiSpec {
    Analytic { a: f64, b: f64, formula: String },
    Table { a: f64, b: f64, nodes: Vec<(f64, f64)> },
    Degenerate { a: f64, b: f64, r: f64 },
}

impl PsiSpec {
    pub fn build(&self) -> Result<PsiFunction> {
        match self {
            PsiSpec::Analytic { a, b, formula } => PsiFunction::analytic(*a, *b, formula),
            PsiSpec::Table { a, b, nodes } => PsiFunction::table(*a, *b, nodes.clone()),
            PsiSpec::Degenerate { a, b, r } => PsiFunction::degenerate(*a, *b, *r),
        }
    }
}

/// The function whose `p`-norms enter a BGLS norm.
#[derive(Debug, Clone)]
pub enum GlsTarget {
    /// `f` under Lebesgue measure.
    Plain(TrialFunction),
    /// `u(x) / |x|^(lambda d)` under Lebesgue measure.
    SLambda { u: TrialFunction, lambda: f64 },
    /// `(u(x) - u(y)) / |x - y|^(lambda d)` under the potential measure
    /// `|x - y|^-(lambda d) dx dy`; `extra_kernel_factor` multiplies the
    /// integrand by another `|x - y|^-(lambda d)` before the `p`-th power.
    DeltaLambda { u: TrialFunction, lambda: f64, extra_kernel_factor: bool },
}

impl GlsTarget {
    pub fn measure(&self) -> MeasureSpec {
        match self {
            GlsTarget::Plain(f) => MeasureSpec::Lebesgue { d: f.dim() },
            GlsTarget::SLambda { u, .. } => MeasureSpec::Lebesgue { d: u.dim() },
            GlsTarget::DeltaLambda { u, lambda, .. } => MeasureSpec::Potential { lambda: *lambda, d: u.dim() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSpec {
    Lebesgue { d: usize },
    /// `|x - y|^-(lambda d) dx dy` on `R^d x R^d`.
    Potential { lambda: f64, d: usize },
    /// Lebesgue measure on a product of coordinate blocks.
    Product { blocks: Vec<usize> },
}

/// `|f|_p` of a BGLS target.
pub fn p_norm(target: &GlsTarget, p: f64, domain: &Domain, num: &Numerics) -> Result<QuadratureResult> {
    match target {
        GlsTarget::Plain(f) => target_norm(f, &NormSpec::target(InequalityParams::new(f.dim()).with_q(p)), domain, num),
        GlsTarget::SLambda { u, lambda } => {
            let d = u.dim();
            let params = InequalityParams::new(d).with_q(p).with_mu(lambda * d as f64 * p);
            target_norm(u, &NormSpec::target(params), domain, num)
        }
        GlsTarget::DeltaLambda { u, lambda, extra_kernel_factor } => {
            let d = u.dim();
            let ld = lambda * d as f64;
            let beta = if *extra_kernel_factor { ld * (2.0 * p + 1.0) } else { ld * (p + 1.0) };
            let params = InequalityParams::new(d).with_p(p).with_beta(beta);
            gagliardo_seminorm(u, &NormSpec::gagliardo(params), domain, num)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BglsOptions {
    /// Grid points `a (b/a)^(i/(n+1))`, `i = 1..=n`; grids with `2n + 1`
    /// points contain those with `n`.
    pub points: usize,
    pub refine: bool,
    /// Width in `log p` at which golden-section refinement stops.
    pub tol: f64,
    /// Upper end used when `b` is infinite, as a multiple of `a`.
    pub infinite_cap: f64,
}

impl Default for BglsOptions {
    fn default() -> Self {
        Self { points: 64, refine: true, tol: 1e-6, infinite_cap: 64.0 }
    }
}

impl BglsOptions {
    pub fn with_points(mut self, n: usize) -> Self {
        self.points = n;
        self
    }

    pub fn grid(&self, a: f64, b: f64) -> Vec<f64> {
        let b = if b.is_finite() { b } else { a * self.infinite_cap };
        let (la, lb) = (a.ln(), b.ln());
        let n = self.points;
        (1..=n).map(|i| (la + (lb - la) * i as f64 / (n + 1) as f64).exp()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BglsResult {
    /// `sup_p |f|_p / psi(p)`; `+inf` when some `|f|_p` diverges.
    pub value: f64,
    pub argmax_p: f64,
    /// Error of `|f|_p / psi(p)` at the maximizer.
    pub error_estimate: f64,
    /// Supremum over the grid alone.
    pub grid_sup: f64,
    pub evaluations: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// `sup_p norm(p) / psi(p)` over `(psi.a, psi.b)`.
pub fn bgls_sup<N>(norm: N, psi: &PsiFunction, opts: &BglsOptions) -> Result<BglsResult>
where
    N: Fn(f64) -> Result<QuadratureResult> + Sync,
{
    let ratio = |p: f64| -> Result<(f64, f64)> {
        let s = psi.value(p);
        if !(s > 0.0) {
            return Err(Error::InvalidParameter(format!("psi({p}) = {s} is not positive")));
        }
        if s.is_infinite() {
            return Ok((0.0, 0.0));
        }
        match norm(p) {
            Ok(r) => Ok((r.value / s, r.error_estimate / s)),
            Err(Error::Divergent(_)) => Ok((f64::INFINITY, 0.0)),
            Err(e) => Err(e),
        }
    };
    if let PsiKind::Degenerate(r) = psi.kind {
        let (v, e) = ratio(r)?;
        return Ok(BglsResult { value: v, argmax_p: r, error_estimate: e, grid_sup: v, evaluations: 1, warnings: vec![] });
    }
    if opts.points == 0 {
        return Err(Error::InvalidParameter("BGLS grid needs at least one point".into()));
    }
    let grid = opts.grid(psi.a, psi.b);
    let vals: Vec<(f64, f64)> = grid.par_iter().map(|&p| ratio(p)).collect::<Result<_>>()?;
    let mut k = 0;
    for i in 1..vals.len() {
        if vals[i].0 > vals[k].0 {
            k = i;
        }
    }
    let grid_sup = vals[k].0;
    let mut out = BglsResult {
        value: grid_sup,
        argmax_p: grid[k],
        error_estimate: vals[k].1,
        grid_sup,
        evaluations: grid.len(),
        warnings: Vec::new(),
    };
    if !psi.b.is_finite() {
        out.warnings.push(format!("b = inf: grid capped at p = {}", psi.a * opts.infinite_cap));
    }
    if grid_sup.is_infinite() {
        out.warnings.push(format!("|f|_p diverges at p = {}", grid[k]));
        return Ok(out);
    }
    if opts.refine && grid.len() >= 2 {
        let lo = if k == 0 { psi.a } else { grid[k - 1] };
        let hi = if k + 1 == grid.len() { psi.b.min(psi.a * opts.infinite_cap) } else { grid[k + 1] };
        let evals = Cell::new(0usize);
        let g = |s: f64| {
            evals.set(evals.get() + 1);
            match ratio(s.exp()) {
                Ok((v, _)) if v.is_finite() => -v,
                _ => f64::INFINITY,
            }
        };
        // keep the search strictly inside the open interval
        let pad = 1e-12 * (hi.ln() - lo.ln()).abs().max(1e-300);
        let (s, v) = golden_min(g, lo.ln() + pad, hi.ln() - pad, opts.tol);
        out.evaluations += evals.get();
        if -v > out.value {
            let p = s.exp();
            let (v, e) = ratio(p)?;
            out.value = v;
            out.argmax_p = p;
            out.error_estimate = e;
        }
    }
    Ok(out)
}

/// `||f||_{G(psi)}` with the measure implied by `target`, checked against `measure`.
pub fn bgls_norm(
    target: &GlsTarget,
    psi: &PsiFunction,
    measure: &MeasureSpec,
    domain: &Domain,
    num: &Numerics,
    opts: &BglsOptions,
) -> Result<BglsResult> {
    if &target.measure() != measure {
        return Err(Error::InvalidParameter(format!(
            "target lives on {:?}, not on {:?}",
            target.measure(),
            measure
        )));
    }
    bgls_sup(|p| p_norm(target, p, domain, num), psi, opts)
}

/// `psi_g(p) = |g|_p`, tabulated on the BGLS grid of `opts`.
pub fn natural_psi(
    g: &GlsTarget,
    a: f64,
    b: f64,
    domain: &Domain,
    num: &Numerics,
    opts: &BglsOptions,
) -> Result<PsiFunction> {
    let grid = opts.grid(a, b);
    let vals: Vec<Result<QuadratureResult>> = grid.par_iter().map(|&p| p_norm(g, p, domain, num)).collect();
    let mut table = Vec::with_capacity(grid.len());
    let mut cache = BTreeMap::new();
    for (p, r) in grid.iter().zip(vals) {
        let v = match r {
            Ok(r) if r.value.is_finite() && r.value > 0.0 => r.value,
            Ok(r) => return Err(Error::Divergent(format!("|g|_p = {} at p = {p}", r.value))),
            Err(e) => return Err(Error::Divergent(format!("|g|_p at p = {p}: {e}"))),
        };
        table.push((*p, v));
        cache.insert(p.to_bits(), v);
    }
    let nat = NaturalPsi { target: g.clone(), domain: domain.clone(), num: num.clone(), table, cache: Mutex::new(cache) };
    PsiFunction::checked(a, b, PsiKind::Natural(Arc::new(nat)))
}

/// Coordinate-wise kinks of `f` along axis `i`.
fn axis_breaks(f: &TrialFunction, i: usize) -> Vec<f64> {
    let s = f.dilation();
    let inner = match f.family() {
        Family::Product(f1, f2) => {
            if i < f1.dim() {
                axis_breaks(f1, i)
            } else {
                axis_breaks(f2, i - f1.dim())
            }
        }
        Family::Scaled(_, g) | Family::Offset(_, g) => axis_breaks(g, i),
        _ if f.dim() == 1 => return f.breakpoints_1d(),
        _ => {
            let mut v = vec![0.0];
            for r in f.radial_breaks() {
                v.push(r / s);
                v.push(-r / s);
            }
            v
        }
    };
    inner.into_iter().map(|x| x * s).collect()
}

/// Mixed Lebesgue norm `|f|_{p_1, ..., p_l}` over one-dimensional blocks.
///
/// Coordinate `x_1` is integrated innermost with `p_1`, its result raised to
/// `p_2 / p_1` and integrated over `x_2`, and so on. `ranges[i]` bounds
/// coordinate `i`; infinite ends are clipped to the support of `f`.
pub fn anisotropic_norm(f: &TrialFunction, p_vec: &[f64], ranges: &[(f64, f64)], tol: f64) -> Result<QuadratureResult> {
    let l = p_vec.len();
    if l == 0 || f.dim() != l || ranges.len() != l {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: l.min(ranges.len()) });
    }
    if p_vec.iter().any(|p| !(*p >= 1.0 && p.is_finite())) {
        return Err(Error::InvalidParameter("anisotropic exponents must be >= 1".into()));
    }
    let support = if f.value_at_infinity() == 0.0 { f.support_radius() } else { None };
    let mut bounds = Vec::with_capacity(l);
    for (i, &(lo, hi)) in ranges.iter().enumerate() {
        let (lo, hi) = match support {
            Some(r) => (lo.max(-r), hi.min(r)),
            None => (lo, hi),
        };
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(Error::Unsupported(format!("coordinate {i} has an unbounded range and no support")));
        }
        let mut br = axis_breaks(f, i);
        br.retain(|b| *b > lo && *b < hi);
        bounds.push((lo, hi, br));
    }
    let worst = Cell::new(0.0f64);
    let failed = Cell::new(false);
    let evals = Cell::new(0u64);
    let mut x = vec![0.0; l];
    let res = level(f, p_vec, &bounds, l - 1, &mut x, tol, &worst, &failed, &evals)?;
    if failed.get() {
        return Err(Error::Numerical("inner anisotropic integral failed".into()));
    }
    let mut out = res.root(p_vec[l - 1]);
    out.error_estimate += worst.get() * out.value;
    out.evaluations = evals.get();
    out.method = if l > 1 { Method::Nested } else { Method::Adaptive1d };
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn level(
    f: &TrialFunction,
    p: &[f64],
    bounds: &[(f64, f64, Vec<f64>)],
    k: usize,
    x: &mut [f64],
    tol: f64,
    worst: &Cell<f64>,
    failed: &Cell<bool>,
    evals: &Cell<u64>,
) -> Result<QuadratureResult> {
    let (lo, hi, br) = &bounds[k];
    let opts = QuadOptions::with_tol(tol * 10f64.powi(-(k as i32)));
    let point = std::cell::RefCell::new(x.to_vec());
    let r = if k == 0 {
        integrate_1d(
            |t| {
                let mut pt = point.borrow_mut();
                pt[0] = t;
                let v = f.eval(&pt);
                if v == 0.0 {
                    0.0
                } else {
                    v.abs().powf(p[0])
                }
            },
            *lo,
            *hi,
            br,
            &opts,
        )?
    } else {
        let e = p[k] / p[k - 1];
        integrate_1d(
            |t| {
                let mut pt = point.borrow().clone();
                pt[k] = t;
                match level(f, p, bounds, k - 1, &mut pt, tol, worst, failed, evals) {
                    Ok(r) => {
                        worst.set(worst.get().max(e * r.relative_error().min(1.0)));
                        if r.value <= 0.0 {
                            0.0
                        } else {
                            r.value.powf(e)
                        }
                    }
                    Err(_) => {
                        failed.set(true);
                        0.0
                    }
                }
            },
            *lo,
            *hi,
            br,
            &opts,
        )?
    };
    evals.set(evals.get() + r.evaluations);
    Ok(r)
}

/// How `psi_1 = K(p) psi_2` obtains `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Psi1Mode {
    /// `K(p) = c p / |1/lambda - p|`.
    UpperBound { c: f64 },
    /// Tabulated lower bounds of `K`, e.g. from [`certified_constant_table`].
    CertifiedLower { table: Vec<(f64, f64)> },
}

/// Certified lower bounds of the best constant of
/// `|S_lambda u|_p <= K |delta_lambda u|_p` from the log cusp at the nodes.
pub fn certified_constant_table(lambda: f64, d: usize, nodes: &[f64], extra_kernel_factor: bool, num: &Numerics) -> Result<Vec<(f64, f64)>> {
    let u = TrialFunction::log_cusp(d);
    let ld = lambda * d as f64;
    nodes
        .par_iter()
        .map(|&p| {
            let beta = if extra_kernel_factor { ld * (2.0 * p + 1.0) } else { ld * (p + 1.0) };
            let params = InequalityParams::new(d).with_p(p).with_q(p).with_mu(ld * p).with_beta(beta);
            let s = rayleigh_quotient(&u, InequalityKind::Ordinary, &params, &Domain::WholeSpace, num)?;
            Ok((p, s.certified_lower.max(f64::MIN_POSITIVE)))
        })
        .collect()
}

/// `psi_1` for the embedding check.
pub fn psi1(psi2: &PsiFunction, lambda: f64, mode: &Psi1Mode, opts: &BglsOptions) -> Result<PsiFunction> {
    let k = match mode {
        Psi1Mode::UpperBound { c } => {
            if !(*c > 0.0) {
                return Err(Error::InvalidParameter("upper-bound constant must be positive".into()));
            }
            PsiFunction::analytic(psi2.a, psi2.b, &format!("{c} * p * |p-{}|^-1", 1.0 / lambda))?
        }
        Psi1Mode::CertifiedLower { table } => {
            // the closed interval, except at 1/lambda where the constant blows up
            let grid = opts.grid(psi2.a, psi2.b);
            let crit = 1.0 / lambda;
            let lo = if psi2.a == crit { grid[0] } else { psi2.a };
            let hi = if psi2.b == crit || !psi2.b.is_finite() { grid[grid.len() - 1] } else { psi2.b };
            let covered = table.iter().any(|n| n.0 <= lo) && table.iter().any(|n| n.0 >= hi);
            if !covered {
                return Err(Error::InvalidParameter(format!("constant table does not cover [{lo}, {hi}]")));
            }
            PsiFunction::table(psi2.a, psi2.b, table.clone())?
        }
    };
    PsiFunction::product(k, psi2.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding51a {
    /// `||S_lambda u||_{G psi_1}`.
    pub lhs: BglsResult,
    /// `||delta_lambda u||_{G psi_2}` over the potential measure.
    pub rhs: BglsResult,
    pub holds: bool,
    /// `rhs - lhs`.
    pub slack: f64,
    /// `lhs / rhs`; close to 1 for near-extremal `u` with certified constants.
    pub ratio: f64,
}

/// Compares `||S_lambda u||_{G psi_1}` with `||delta_lambda u||_{G psi_2}`
/// for `u`, where `psi_1 = K psi_2`.
pub fn check_embedding_51a(
    u: &TrialFunction,
    psi2: &PsiFunction,
    lambda: f64,
    mode: &Psi1Mode,
    extra_kernel_factor: bool,
    domain: &Domain,
    num: &Numerics,
    opts: &BglsOptions,
) -> Result<Embedding51a> {
    let crit = 1.0 / lambda;
    if !(psi2.b <= crit || psi2.a >= crit) {
        return Err(Error::InvalidParameter(format!(
            "psi_2 interval ({}, {}) must lie on one side of 1/lambda = {crit}",
            psi2.a, psi2.b
        )));
    }
    let p1 = psi1(psi2, lambda, mode, opts)?;
    let s = GlsTarget::SLambda { u: u.clone(), lambda };
    let delta = GlsTarget::DeltaLambda { u: u.clone(), lambda, extra_kernel_factor };
    let lhs = bgls_norm(&s, &p1, &s.measure(), domain, num, opts)?;
    let rhs = bgls_norm(&delta, psi2, &delta.measure(), domain, num, opts)?;
    let slack = rhs.value - lhs.value;
    let tol = 3.0 * (lhs.error_estimate + rhs.error_estimate);
    Ok(Embedding51a { holds: lhs.value <= rhs.value + tol, slack, ratio: lhs.value / rhs.value, lhs, rhs })
}

/// A positive function of `(p, q)`, `+inf` outside its region.
pub type NuFn<'a> = &'a (dyn Fn(f64, f64) -> f64 + Sync);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psi5Row {
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi5: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmin: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

/// `q` on the curve `(d - mu)/r = (d + alpha2 - beta)/p + (d + alpha1)/q`.
pub fn curve_q(params: &InequalityParams, r: f64, p: f64) -> Option<f64> {
    let d = params.dim();
    let a = d + params.alpha1;
    let rest = (d - params.mu) / r - (d + params.alpha2 - params.beta) / p;
    if a == 0.0 || !(rest > 0.0) && a > 0.0 {
        return None;
    }
    let q = a / rest;
    (q.is_finite() && q >= 1.0).then_some(q)
}

/// `psi_5(r) = inf over the curve of nu(p, q) K(p, q)` for each `r`,
/// scanning `p` over `[1, p_max]`.
pub fn psi5_table(params: &InequalityParams, nu: NuFn, k_mixed: NuFn, r_grid: &[f64], p_max: f64, points: usize) -> Vec<Psi5Row> {
    r_grid
        .par_iter()
        .map(|&r| {
            let obj = |p: f64| match curve_q(params, r, p) {
                Some(q) => {
                    let v = nu(p, q) * k_mixed(p, q);
                    if v.is_finite() && v > 0.0 {
                        v
                    } else {
                        f64::INFINITY
                    }
                }
                None => f64::INFINITY,
            };
            let n = points.max(2);
            let grid: Vec<f64> = (0..n).map(|i| (p_max.ln() * i as f64 / (n - 1) as f64).exp()).collect();
            let vals: Vec<f64> = grid.iter().map(|p| obj(*p)).collect();
            let mut k = 0;
            for i in 1..n {
                if vals[i] < vals[k] {
                    k = i;
                }
            }
            if !vals[k].is_finite() {
                return Psi5Row { r, psi5: None, argmin: None, skipped: Some("empty curve R_r".into()) };
            }
            let lo = grid[k.saturating_sub(1)].ln();
            let hi = grid[(k + 1).min(n - 1)].ln();
            let (s, v) = golden_min(|s| obj(s.exp()), lo, hi, 1e-8);
            let (best, arg) = if v < vals[k] { (v, s.exp()) } else { (vals[k], grid[k]) };
            Psi5Row { r, psi5: Some(best), argmin: curve_q(params, r, arg).map(|q| (arg, q)), skipped: None }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psi5Verdict {
    pub r: f64,
    /// `|S_lambda u|_r`.
    pub lhs: f64,
    /// `psi_5(r) * ||delta_lambda u |x-y|^-(lambda d)||_{G nu}`.
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psi5Report {
    pub rows: Vec<Psi5Row>,
    /// Supremum over `q_region` of `|F|_{p,q} / nu(p, q)`.
    pub g_nu_norm: f64,
    pub verdicts: Vec<Psi5Verdict>,
}

/// Builds `psi_5` and checks `|S_lambda u|_r <= psi_5(r) ||F||_{G nu}` with
/// `F = (u(x) - u(y)) / |x - y|^(2 lambda d)`; the `G nu` norm is taken
/// over the `(p, q)` points of `q_region`.
#[allow(clippy::too_many_arguments)]
pub fn psi5_and_check_52(
    u: &TrialFunction,
    lambda: f64,
    params: &InequalityParams,
    nu: NuFn,
    k_mixed: NuFn,
    r_grid: &[f64],
    q_region: &[(f64, f64)],
    domain: &Domain,
    num: &Numerics,
) -> Result<Psi5Report> {
    let d = u.dim();
    let ld = lambda * d as f64;
    let rows = psi5_table(params, nu, k_mixed, r_grid, 16.0, 48);
    let norms: Vec<f64> = q_region
        .par_iter()
        .map(|&(p, q)| {
            let w = nu(p, q);
            if !(w > 0.0) || w.is_infinite() {
                return Ok(0.0);
            }
            let prm = InequalityParams::new(d).with_p(p).with_q(q).with_beta(2.0 * ld * p);
            Ok(mixed_seminorm(u, &NormSpec::mixed(prm), domain, num)?.value / w)
        })
        .collect::<Result<_>>()?;
    let g = norms.iter().copied().fold(0.0, f64::max);
    let mut verdicts = Vec::new();
    for row in &rows {
        if let Some(psi5) = row.psi5 {
            let lhs = p_norm(&GlsTarget::SLambda { u: u.clone(), lambda }, row.r, domain, num)?.value;
            let rhs = psi5 * g;
            verdicts.push(Psi5Verdict { r: row.r, lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-9) });
        }
    }
    Ok(Psi5Report { rows, g_nu_norm: g, verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num() -> Numerics {
        Numerics::default()
    }

    #[test]
    fn parse_psi_formulas() {
        let e = PsiExpr::parse("2 * p^1.5 * |p-2|^-1").unwrap();
        let p: f64 = 1.5;
        assert!((e.eval(p) - 2.0 * p.powf(1.5) / 0.5).abs() < 1e-12);
        assert_eq!(PsiExpr::parse("|2 - p|^0.8").unwrap().eval(1.0), 1.0);
        assert_eq!(PsiExpr::parse("p").unwrap().eval(3.0), 3.0);
        assert!(PsiExpr::parse("q^2").is_err());
        assert!(PsiExpr::parse("").is_err());
        let again = PsiExpr::parse(&e.to_string()).unwrap();
        assert_eq!(again, e);
    }

    #[test]
    fn indicator_has_unit_norm() {
        let f = GlsTarget::Plain(TrialFunction::constant(1, 1.0));
        let psi = PsiFunction::constant(1.0, 2.0, 1.0).unwrap();
        let r = bgls_norm(&f, &psi, &f.measure(), &Domain::interval(0.0, 1.0), &num(), &BglsOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_psi_recovers_lebesgue_norm() {
        let f = GlsTarget::Plain(TrialFunction::bump(1, 1.0));
        let psi = PsiFunction::degenerate(1.0, 4.0, 2.5).unwrap();
        let dom = Domain::WholeSpace;
        let r = bgls_norm(&f, &psi, &f.measure(), &dom, &num(), &BglsOptions::default()).unwrap();
        let direct = p_norm(&f, 2.5, &dom, &num()).unwrap();
        assert!((r.value - direct.value).abs() <= direct.error_estimate + 1e-15);
    }

    #[test]
    fn natural_psi_examples() {
        let g = GlsTarget::Plain(TrialFunction::radial_power(1, -0.25, 1.0).unwrap());
        let dom = Domain::interval(0.0, 1.0);
        let two = p_norm(&g, 2.0, &dom, &num()).unwrap();
        assert!((two.value - 2f64.sqrt()).abs() < 1e-9);
        let psi = natural_psi(&g, 1.0, 3.5, &dom, &num(), &BglsOptions::default()).unwrap();
        let r = bgls_norm(&g, &psi, &g.measure(), &dom, &num(), &BglsOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        let ind = GlsTarget::Plain(TrialFunction::constant(1, 1.0));
        let psi = natural_psi(&ind, 1.0, 3.0, &dom, &num(), &BglsOptions::default()).unwrap();
        assert!((psi.value(1.7) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn natural_psi_rejects_divergence() {
        // |x|^-1/2 is not in L^2 near the origin
        let g = GlsTarget::Plain(TrialFunction::radial_power(1, -0.5, 1.0).unwrap());
        assert!(natural_psi(&g, 1.0, 3.0, &Domain::interval(0.0, 1.0), &num(), &BglsOptions::default()).is_err());
    }

    #[test]
    fn divergent_norm_gives_infinite_bgls() {
        let g = GlsTarget::Plain(TrialFunction::radial_power(1, -0.5, 1.0).unwrap());
        let psi = PsiFunction::constant(1.0, 3.0, 1.0).unwrap();
        let r = bgls_norm(&g, &psi, &g.measure(), &Domain::interval(0.0, 1.0), &num(), &BglsOptions::default()).unwrap();
        assert!(r.value.is_infinite());
    }

    #[test]
    fn grid_doubling_contains_old_grid() {
        let o = BglsOptions::default();
        let g1 = o.grid(1.0, 4.0);
        let g2 = o.clone().with_points(2 * o.points + 1).grid(1.0, 4.0);
        for (i, p) in g1.iter().enumerate() {
            assert!((g2[2 * i + 1] - p).abs() < 1e-12 * p);
        }
    }

    #[test]
    fn measure_mismatch_rejected() {
        let f = GlsTarget::Plain(TrialFunction::bump(1, 1.0));
        let psi = PsiFunction::constant(1.0, 2.0, 1.0).unwrap();
        let m = MeasureSpec::Potential { lambda: 0.5, d: 1 };
        assert!(bgls_norm(&f, &psi, &m, &Domain::WholeSpace, &num(), &BglsOptions::default()).is_err());
    }

    #[test]
    fn anisotropic_equal_exponents_is_plain_norm() {
        let f = TrialFunction::bump(2, 1.0);
        let a = anisotropic_norm(&f, &[2.0, 2.0], &[(-1.0, 1.0), (-1.0, 1.0)], 1e-10).unwrap();
        let plain = target_norm(&f, &NormSpec::target(InequalityParams::new(2).with_q(2.0)), &Domain::WholeSpace, &num()).unwrap();
        assert!((a.value - plain.value).abs() < 1e-7 * plain.value, "{} vs {}", a.value, plain.value);
    }

    #[test]
    fn anisotropic_factorizes() {
        let g1 = TrialFunction::bump(1, 1.0);
        let g2 = TrialFunction::linear_ramp(1, 0.7).unwrap();
        let f = TrialFunction::product(g1.clone(), g2.clone());
        let (p1, p2) = (1.5, 3.0);
        let a = anisotropic_norm(&f, &[p1, p2], &[(-2.0, 2.0), (-2.0, 2.0)], 1e-10).unwrap();
        let n1 = anisotropic_norm(&g1, &[p1], &[(-2.0, 2.0)], 1e-12).unwrap();
        let n2 = anisotropic_norm(&g2, &[p2], &[(-2.0, 2.0)], 1e-12).unwrap();
        assert!((a.value / (n1.value * n2.value) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn anisotropic_order_matters() {
        let f = TrialFunction::smooth_bump(vec![0.4, 0.0], 1.0, 1.0).unwrap();
        let r = [(-2.0, 2.0), (-2.0, 2.0)];
        let a = anisotropic_norm(&f, &[1.0, 4.0], &r, 1e-10).unwrap();
        let b = anisotropic_norm(&f, &[4.0, 1.0], &r, 1e-10).unwrap();
        assert!((a.value - b.value).abs() > 10.0 * (a.error_estimate + b.error_estimate));
    }

    #[test]
    fn embedding_holds_with_upper_constants_and_scales() {
        let u = TrialFunction::bump(1, 1.0);
        let psi2 = PsiFunction::constant(1.2, 1.9, 1.0).unwrap();
        let mode = Psi1Mode::UpperBound { c: 1.0 };
        let opts = BglsOptions::default().with_points(6);
        let dom = Domain::ball(1.5);
        let e = check_embedding_51a(&u, &psi2, 0.5, &mode, false, &dom, &num(), &opts).unwrap();
        let e2 = check_embedding_51a(&TrialFunction::scaled(-3.0, u), &psi2, 0.5, &mode, false, &dom, &num(), &opts).unwrap();
        assert!(e.holds);
        assert_eq!(e.holds, e2.holds);
        assert!((e2.lhs.value / e.lhs.value - 3.0).abs() < 1e-9);
        assert!((e2.rhs.value / e.rhs.value - 3.0).abs() < 1e-9);
        let bad = PsiFunction::constant(1.5, 2.5, 1.0).unwrap();
        assert!(check_embedding_51a(&TrialFunction::bump(1, 1.0), &bad, 0.5, &mode, false, &Domain::WholeSpace, &num(), &opts).is_err());
    }

    #[test]
    fn psi5_curve_and_constant_case() {
        let params = InequalityParams::new(1).with_beta(1.0);
        assert_eq!(curve_q(&params, 2.0, 1.0), Some(2.0));
        assert_eq!(curve_q(&params, 2.0, 7.0), Some(2.0));
        let one = |_: f64, _: f64| 1.0;
        let k = |_: f64, _: f64| 3.5;
        let rows = psi5_table(&params, &one, &k, &[2.0], 8.0, 16);
        assert_eq!(rows[0].psi5, Some(3.5));
        // r = 0.5 would need q < 1
        let rows = psi5_table(&params, &one, &k, &[0.5], 8.0, 16);
        assert!(rows[0].skipped.is_some());
    }
}
