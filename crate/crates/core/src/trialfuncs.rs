//! Explicit test-function families: extremizer candidates, smooth bumps and
//! the combinators needed to probe homogeneity and translation invariance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::norm;

/// Evaluable function on `R^d`, stored as a base family plus a dilation
/// factor: `u(x) = base(x / scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialFunction {
    dim: usize,
    family: Family,
    scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `|log|x|| * I(|x| <= 1)`; `+inf` at the origin.
    LogCusp,
    /// `exp(-order / (1 - |(x-c)/R|^2))` inside `|x - c| < R`.
    SmoothBump { center: Vec<f64>, radius: f64, order: f64 },
    /// `|x|^exponent * I(|x| <= cutoff)`.
    RadialPower { exponent: f64, cutoff: f64 },
    /// `x_1 * I(|x| <= support)`.
    LinearRamp { support: f64 },
    Constant(f64),
    /// `f1(x_1..x_{d1}) * f2(x_{d1+1}..x_d)`.
    Product(Box<TrialFunction>, Box<TrialFunction>),
    /// `c * f(x)`.
    Scaled(f64, Box<TrialFunction>),
    /// `f(x) + c`.
    Offset(f64, Box<TrialFunction>),
    /// Restriction of a function on `R^d` to the first `m` coordinates.
    Trace(Box<TrialFunction>),
}

/// `coef * |log(|x| / theta)| * I(|x| <= theta) + offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogCuspForm {
    pub coef: f64,
    pub theta: f64,
    pub offset: f64,
}

impl TrialFunction {
    fn new(dim: usize, family: Family) -> Self {
        Self { dim, family, scale: 1.0 }
    }

    pub fn log_cusp(d: usize) -> Self {
        Self::new(d, Family::LogCusp)
    }

    pub fn smooth_bump(center: Vec<f64>, radius: f64, order: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidParameter("bump center must have dimension >= 1".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) || !(order > 0.0 && order.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bump radius and order must be positive, got {radius}, {order}"
            )));
        }
        Ok(Self::new(center.len(), Family::SmoothBump { center, radius, order }))
    }

    /// Centered bump of radius `radius` and order 1.
    pub fn bump(d: usize, radius: f64) -> Self {
        Self::smooth_bump(vec![0.0; d], radius, 1.0).expect("valid bump")
    }

    pub fn radial_power(d: usize, exponent: f64, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0 && cutoff.is_finite()) || !exponent.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "radial_power needs finite exponent and positive cutoff, got {exponent}, {cutoff}"
            )));
        }
        Ok(Self::new(d, Family::RadialPower { exponent, cutoff }))
    }

    pub fn linear_ramp(d: usize, support: f64) -> Result<Self> {
        if !(support > 0.0 && support.is_finite()) {
            return Err(Error::InvalidParameter(format!("ramp support must be positive, got {support}")));
        }
        Ok(Self::new(d, Family::LinearRamp { support }))
    }

    pub fn constant(d: usize, c: f64) -> Self {
        Self::new(d, Family::Constant(c))
    }

    pub fn product(f1: TrialFunction, f2: TrialFunction) -> Self {
        let dim = f1.dim + f2.dim;
        Self::new(dim, Family::Product(Box::new(f1), Box::new(f2)))
    }

    pub fn scaled(c: f64, f: TrialFunction) -> Self {
        let dim = f.dim;
        Self::new(dim, Family::Scaled(c, Box::new(f)))
    }

    pub fn offset(c: f64, f: TrialFunction) -> Self {
        let dim = f.dim;
        Self::new(dim, Family::Offset(c, Box::new(f)))
    }

    /// Restriction to the coordinate plane `x_{m+1} = ... = x_d = 0`.
    pub fn trace(f: TrialFunction, m: usize) -> Result<Self> {
        crate::model::check_surface_dim(m, f.dim)?;
        Ok(Self::new(m, Family::Trace(Box::new(f))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dilation(&self) -> f64 {
        self.scale
    }

    pub fn tag(&self) -> &'static str {
        match self.family {
            Family::LogCusp => "log_cusp",
            Family::SmoothBump { .. } => "smooth_bump",
            Family::RadialPower { .. } => "radial_power",
            Family::LinearRamp { .. } => "linear_ramp",
            Family::Constant(_) => "constant",
            Family::Product(..) => "product",
            Family::Scaled(..) => "scaled",
            Family::Offset(..) => "offset",
            Family::Trace(..) => "trace",
        }
    }

    /// `x -> f(x / theta)`. Dilations compose multiplicatively.
    pub fn dilate(&self, theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::InvalidParameter(format!("dilation factor must be > 0, got {theta}")));
        }
        let mut g = self.clone();
        g.scale *= theta;
        Ok(g)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("evaluation point must be finite".into()));
        }
        Ok(self.eval(x))
    }

    pub(crate) fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got });
        }
        Ok(())
    }

    /// Unchecked evaluation; `x.len()` must equal `dim()`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.scale == 1.0 {
            self.eval_base(x)
        } else {
            with_scaled(x, self.scale, |z| self.eval_base(z))
        }
    }

    fn eval_base(&self, z: &[f64]) -> f64 {
        match &self.family {
            Family::LogCusp => {
                let r = norm(z);
                if r == 0.0 {
                    f64::INFINITY
                } else if r <= 1.0 {
                    -r.ln()
                } else {
                    0.0
                }
            }
            Family::SmoothBump { center, radius, order } => {
                let t2 = z
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    / (radius * radius);
                bump_profile(t2, *order)
            }
            Family::RadialPower { exponent, cutoff } => {
                let r = norm(z);
                radial_power_profile(r, *exponent, *cutoff)
            }
            Family::LinearRamp { support } => {
                if norm(z) <= *support {
                    z[0]
                } else {
                    0.0
                }
            }
            Family::Constant(c) => *c,
            Family::Product(f1, f2) => {
                let (a, b) = z.split_at(f1.dim);
                f1.eval(a) * f2.eval(b)
            }
            Family::Scaled(c, f) => c * f.eval(z),
            Family::Offset(c, f) => f.eval(z) + c,
            Family::Trace(f) => {
                let mut full = vec![0.0; f.dim];
                full[..z.len()].copy_from_slice(z);
                f.eval(&full)
            }
        }
    }

    /// `u(x) - u(y)`, computed so that offsets cancel exactly.
    #[inline]
    pub fn difference(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.family {
            Family::Constant(_) => 0.0,
            Family::Offset(_, f) if self.scale == 1.0 => f.difference(x, y),
            Family::Scaled(c, f) if self.scale == 1.0 => c * f.difference(x, y),
            Family::Offset(_, f) => with_scaled(x, self.scale, |a| {
                with_scaled(y, self.scale, |b| f.difference(a, b))
            }),
            Family::Scaled(c, f) => with_scaled(x, self.scale, |a| {
                with_scaled(y, self.scale, |b| c * f.difference(a, b))
            }),
            _ => self.eval(x) - self.eval(y),
        }
    }

    /// Whether `u(x)` depends on `|x|` only.
    pub fn is_radial(&self) -> bool {
        match &self.family {
            Family::LogCusp | Family::RadialPower { .. } | Family::Constant(_) => true,
            Family::SmoothBump { center, .. } => center.iter().all(|&c| c == 0.0),
            Family::LinearRamp { .. } | Family::Product(..) => false,
            Family::Scaled(_, f) | Family::Offset(_, f) | Family::Trace(f) => f.is_radial(),
        }
    }

    /// Radial profile `rho -> u(rho e_1)`; meaningful only when radial.
    #[inline]
    pub fn eval_radial(&self, rho: f64) -> f64 {
        let r = rho / self.scale;
        match &self.family {
            Family::LogCusp => {
                if r == 0.0 {
                    f64::INFINITY
                } else if r <= 1.0 {
                    -r.ln()
                } else {
                    0.0
                }
            }
            Family::SmoothBump { radius, order, .. } => bump_profile(r * r / (radius * radius), *order),
            Family::RadialPower { exponent, cutoff } => radial_power_profile(r, *exponent, *cutoff),
            Family::Constant(c) => *c,
            Family::Scaled(c, f) => c * f.eval_radial(r),
            Family::Offset(c, f) => f.eval_radial(r) + c,
            Family::Trace(f) => f.eval_radial(r),
            Family::LinearRamp { .. } | Family::Product(..) => {
                let mut x = vec![0.0; self.dim];
                x[0] = rho;
                self.eval(&x)
            }
        }
    }

    /// Radial derivative `d/drho u(rho e_1)` for radial functions.
    pub fn radial_derivative(&self, rho: f64) -> Option<f64> {
        let s = self.scale;
        let r = rho / s;
        let base = match &self.family {
            Family::LogCusp => {
                if r == 0.0 {
                    return Some(f64::NEG_INFINITY);
                }
                if r < 1.0 {
                    -1.0 / r
                } else {
                    0.0
                }
            }
            Family::SmoothBump { radius, order, .. } => {
                let t2 = r * r / (radius * radius);
                if t2 >= 1.0 {
                    0.0
                } else {
                    let one = 1.0 - t2;
                    bump_profile(t2, *order) * (-order / (one * one)) * 2.0 * r / (radius * radius)
                }
            }
            Family::RadialPower { exponent, cutoff } => {
                if r < *cutoff {
                    if *exponent == 0.0 {
                        0.0
                    } else {
                        exponent * r.powf(exponent - 1.0)
                    }
                } else {
                    0.0
                }
            }
            Family::Constant(_) => 0.0,
            Family::Scaled(c, f) => c * f.radial_derivative(r)?,
            Family::Offset(_, f) | Family::Trace(f) => f.radial_derivative(r)?,
            Family::LinearRamp { .. } | Family::Product(..) => return None,
        };
        Some(base / s)
    }

    /// Analytic gradient, `None` where the family has no derivative formula.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let s = self.scale;
        let z: Vec<f64> = x.iter().map(|v| v / s).collect();
        let mut g = self.gradient_base(&z)?;
        if s != 1.0 {
            for v in &mut g {
                *v /= s;
            }
        }
        Some(g)
    }

    fn gradient_base(&self, z: &[f64]) -> Option<Vec<f64>> {
        let d = z.len();
        match &self.family {
            Family::LogCusp => {
                let r2: f64 = z.iter().map(|v| v * v).sum();
                if r2 == 0.0 {
                    return None;
                }
                if r2 < 1.0 {
                    Some(z.iter().map(|v| -v / r2).collect())
                } else {
                    Some(vec![0.0; d])
                }
            }
            Family::SmoothBump { center, radius, order } => {
                let rr = radius * radius;
                let t2 = z.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / rr;
                if t2 >= 1.0 {
                    return Some(vec![0.0; d]);
                }
                let one = 1.0 - t2;
                let factor = bump_profile(t2, *order) * (-order / (one * one)) * 2.0 / rr;
                Some(z.iter().zip(center).map(|(a, c)| factor * (a - c)).collect())
            }
            Family::RadialPower { exponent, cutoff } => {
                let r = norm(z);
                if r >= *cutoff {
                    return Some(vec![0.0; d]);
                }
                if r == 0.0 {
                    return if *exponent >= 1.0 || *exponent == 0.0 { Some(vec![0.0; d]) } else { None };
                }
                let f = exponent * r.powf(exponent - 2.0);
                Some(z.iter().map(|v| f * v).collect())
            }
            Family::LinearRamp { support } => {
                let mut g = vec![0.0; d];
                if norm(z) < *support {
                    g[0] = 1.0;
                }
                Some(g)
            }
            Family::Constant(_) => Some(vec![0.0; d]),
            Family::Product(f1, f2) => {
                let (a, b) = z.split_at(f1.dim);
                let v1 = f1.eval(a);
                let v2 = f2.eval(b);
                let mut g = f1.gradient(a)?;
                for v in &mut g {
                    *v *= v2;
                }
                g.extend(f2.gradient(b)?.into_iter().map(|v| v * v1));
                Some(g)
            }
            Family::Scaled(c, f) => Some(f.gradient(z)?.into_iter().map(|v| c * v).collect()),
            Family::Offset(_, f) => f.gradient(z),
            Family::Trace(f) => {
                let mut full = vec![0.0; f.dim];
                full[..d].copy_from_slice(z);
                let mut g = f.gradient(&full)?;
                g.truncate(d);
                Some(g)
            }
        }
    }

    /// Central-difference gradient with step `h`.
    pub fn gradient_fd(&self, x: &[f64], h: f64) -> Vec<f64> {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        (0..x.len())
            .map(|i| {
                xp[i] = x[i] + h;
                xm[i] = x[i] - h;
                let g = (self.eval(&xp) - self.eval(&xm)) / (2.0 * h);
                xp[i] = x[i];
                xm[i] = x[i];
                g
            })
            .collect()
    }

    /// Radius outside which `u` equals [`value_at_infinity`](Self::value_at_infinity),
    /// `None` if no such radius exists.
    pub fn support_radius(&self) -> Option<f64> {
        let base = match &self.family {
            Family::LogCusp => Some(1.0),
            Family::SmoothBump { center, radius, .. } => Some(norm(center) + radius),
            Family::RadialPower { cutoff, .. } => Some(*cutoff),
            Family::LinearRamp { support } => Some(*support),
            Family::Constant(_) => Some(0.0),
            Family::Product(f1, f2) => {
                if f1.value_at_infinity() != 0.0 || f2.value_at_infinity() != 0.0 {
                    None
                } else {
                    let (a, b) = (f1.support_radius()?, f2.support_radius()?);
                    Some(a.hypot(b))
                }
            }
            Family::Scaled(_, f) | Family::Offset(_, f) | Family::Trace(f) => f.support_radius(),
        };
        base.map(|r| r * self.scale)
    }

    /// `g` with `|u(x)| ~ |x|^g` as `x -> 0` when `u` blows up there like a
    /// power; `Some(0.0)` for bounded and logarithmic behavior.
    pub fn origin_exponent(&self) -> Option<f64> {
        match &self.family {
            Family::RadialPower { exponent, .. } => Some(exponent.min(0.0)),
            Family::LogCusp | Family::SmoothBump { .. } | Family::LinearRamp { .. } | Family::Constant(_) => Some(0.0),
            Family::Scaled(c, f) if *c != 0.0 => f.origin_exponent(),
            Family::Scaled(..) => Some(0.0),
            Family::Offset(_, f) => f.origin_exponent(),
            Family::Product(..) | Family::Trace(_) => None,
        }
    }

    pub fn value_at_infinity(&self) -> f64 {
        match &self.family {
            Family::Constant(c) => *c,
            Family::Scaled(c, f) => c * f.value_at_infinity(),
            Family::Offset(c, f) => f.value_at_infinity() + c,
            Family::Trace(f) => f.value_at_infinity(),
            _ => 0.0,
        }
    }

    /// Radii (before sign) where a radial profile has a kink or singularity.
    pub fn radial_breaks(&self) -> Vec<f64> {
        let base = match &self.family {
            Family::LogCusp => vec![0.0, 1.0],
            Family::SmoothBump { radius, .. } => vec![0.0, *radius],
            Family::RadialPower { cutoff, .. } => vec![0.0, *cutoff],
            Family::LinearRamp { support } => vec![0.0, *support],
            Family::Constant(_) => vec![],
            Family::Scaled(_, f) | Family::Offset(_, f) | Family::Trace(f) => f.radial_breaks(),
            Family::Product(..) => vec![],
        };
        base.into_iter().map(|r| r * self.scale).collect()
    }

    /// Kinks and singular points of a one-dimensional function.
    pub fn breakpoints_1d(&self) -> Vec<f64> {
        let mut out = match &self.family {
            Family::SmoothBump { center, radius, .. } if center[0] != 0.0 => {
                vec![center[0] - radius, center[0], center[0] + radius]
                    .into_iter()
                    .map(|v| v * self.scale)
                    .collect()
            }
            Family::Scaled(_, f) | Family::Offset(_, f) if self.scale == 1.0 => f.breakpoints_1d(),
            _ => {
                let mut v = Vec::new();
                for r in self.radial_breaks() {
                    v.push(r);
                    if r != 0.0 {
                        v.push(-r);
                    }
                }
                v
            }
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Recognizes dilated/scaled/shifted log cusps for closed-form paths.
    pub fn log_cusp_form(&self) -> Option<LogCuspForm> {
        let mut form = match &self.family {
            Family::LogCusp => LogCuspForm { coef: 1.0, theta: 1.0, offset: 0.0 },
            Family::Scaled(c, f) => {
                let mut g = f.log_cusp_form()?;
                g.coef *= c;
                g.offset *= c;
                g
            }
            Family::Offset(c, f) => {
                let mut g = f.log_cusp_form()?;
                g.offset += c;
                g
            }
            _ => return None,
        };
        form.theta *= self.scale;
        Some(form)
    }
}

#[inline]
fn bump_profile(t2: f64, order: f64) -> f64 {
    if t2 < 1.0 {
        (-order / (1.0 - t2)).exp()
    } else {
        0.0
    }
}

#[inline]
fn radial_power_profile(r: f64, exponent: f64, cutoff: f64) -> f64 {
    if r > cutoff {
        0.0
    } else if exponent == 0.0 {
        1.0
    } else {
        r.powf(exponent)
    }
}

#[inline]
fn with_scaled<T>(x: &[f64], s: f64, f: impl FnOnce(&[f64]) -> T) -> T {
    if x.len() <= 8 {
        let mut buf = [0.0; 8];
        for (b, v) in buf.iter_mut().zip(x) {
            *b = v / s;
        }
        f(&buf[..x.len()])
    } else {
        let z: Vec<f64> = x.iter().map(|v| v / s).collect();
        f(&z)
    }
}

/// `int_0^1 rho^-a |log rho|^p drho = Gamma(p+1) / (1-a)^(p+1)` for `a < 1`.
pub fn log_power_moment(a: f64, p: f64) -> Result<f64> {
    if !(a < 1.0) {
        return Err(Error::Divergent(format!(
            "int_0^1 rho^-a |log rho|^p diverges for a = {a} >= 1"
        )));
    }
    if !(p > -1.0) {
        return Err(Error::InvalidParameter(format!("log exponent must exceed -1, got {p}")));
    }
    Ok(libm::tgamma(p + 1.0) / (1.0 - a).powf(p + 1.0))
}

/// Closed form of the radial log-cusp integral
/// `int_0^1 rho^(d-1) rho^(-lambda d p) |log rho|^p drho = Gamma(p+1) / (d (1 - lambda p))^(p+1)`.
///
/// For `d = 1` this is `Gamma(p+1)/(1-lambda p)^(p+1)`; the two-sided interval
/// contributes an extra factor 2 which callers apply.
pub fn closed_form_weighted_power_integral(lambda: f64, p: f64, d: usize) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("p must be >= 1, got {p}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("d must be >= 1".into()));
    }
    if lambda * p >= 1.0 {
        return Err(Error::Divergent(format!(
            "lambda p = {} >= 1: the weighted log integral diverges",
            lambda * p
        )));
    }
    let d = d as f64;
    Ok(libm::tgamma(p + 1.0) / (d * (1.0 - lambda * p)).powf(p + 1.0))
}

/// Serializable description of a trial function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    LogCusp {
        d: usize,
    },
    SmoothBump {
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "one")]
        order: f64,
    },
    RadialPower {
        d: usize,
        exponent: f64,
        #[serde(default = "one")]
        cutoff: f64,
    },
    LinearRamp {
        d: usize,
        #[serde(default = "one")]
        support: f64,
    },
    Constant {
        d: usize,
        value: f64,
    },
    Product {
        f1: Box<FunctionSpec>,
        f2: Box<FunctionSpec>,
    },
    Dilated {
        theta: f64,
        f: Box<FunctionSpec>,
    },
    Scaled {
        c: f64,
        f: Box<FunctionSpec>,
    },
    Offset {
        c: f64,
        f: Box<FunctionSpec>,
    },
}

fn one() -> f64 {
    1.0
}

impl FunctionSpec {
    pub fn build(&self) -> Result<TrialFunction> {
        Ok(match self {
            FunctionSpec::LogCusp { d } => TrialFunction::log_cusp(*d),
            FunctionSpec::SmoothBump { d, center, radius, order } => {
                let center = center.clone().unwrap_or_else(|| vec![0.0; *d]);
                if center.len() != *d {
                    return Err(Error::DimensionMismatch { expected: *d, got: center.len() });
                }
                TrialFunction::smooth_bump(center, *radius, *order)?
            }
            FunctionSpec::RadialPower { d, exponent, cutoff } => {
                TrialFunction::radial_power(*d, *exponent, *cutoff)?
            }
            FunctionSpec::LinearRamp { d, support } => TrialFunction::linear_ramp(*d, *support)?,
            FunctionSpec::Constant { d, value } => TrialFunction::constant(*d, *value),
            FunctionSpec::Product { f1, f2 } => TrialFunction::product(f1.build()?, f2.build()?),
            FunctionSpec::Dilated { theta, f } => f.build()?.dilate(*theta)?,
            FunctionSpec::Scaled { c, f } => TrialFunction::scaled(*c, f.build()?),
            FunctionSpec::Offset { c, f } => TrialFunction::offset(*c, f.build()?),
        })
    }
}
