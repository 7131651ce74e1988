use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{unit_sphere_area, CompensatedSum, Method, QuadratureResult};
use crate::error::{Error, Result};
use crate::model::{Domain, InequalityParams};

/// Largest dimension handled by the samplers.
pub(crate) const MAX_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    /// Proposal exponent `c` for the pair distance, density `~ |x - y|^-c`.
    pub pair_exponent: Option<f64>,
    /// Proposal exponent `a` for the first point, density `~ |x|^-a`.
    pub origin_exponent: Option<f64>,
    /// Inner budget for nested (mixed-norm) estimates.
    pub inner_samples: usize,
    /// Outer points for nested (mixed-norm) estimates.
    pub outer_samples: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 1 << 16,
            seed: 0x5eed,
            pair_exponent: None,
            origin_exponent: None,
            inner_samples: 4096,
            outer_samples: 512,
        }
    }
}

impl McConfig {
    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `max(0, beta - d + 0.5)`, kept below `d` so the proposal normalizes.
    pub fn pair_exponent_for(&self, params: &InequalityParams) -> f64 {
        let d = params.dim();
        self.pair_exponent
            .unwrap_or_else(|| (params.beta - d + 0.5).max(0.0).min(0.95 * d))
    }

    /// `max(0, -alpha1 - 0.5)` for the pair weight `|x|^alpha1 |y|^alpha2`.
    pub fn origin_exponent_for(&self, params: &InequalityParams) -> f64 {
        let d = params.dim();
        self.origin_exponent
            .unwrap_or_else(|| (-params.alpha1 - 0.5).max(0.0).min(0.95 * d))
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_exponent(name: &str, e: f64, d: usize) -> Result<()> {
    if !e.is_finite() || e >= d as f64 {
        return Err(Error::InvalidParameter(format!(
            "{name} {e} gives a non-normalizable proposal in dimension {d}"
        )));
    }
    Ok(())
}

/// Independent generator for sample `stream` of a run seeded with `seed`.
#[inline]
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[inline]
fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

#[inline]
fn direction<R: Rng>(rng: &mut R, out: &mut [f64]) {
    if out.len() == 1 {
        out[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut s = 0.0;
        for v in out.iter_mut() {
            *v = rng.sample(StandardNormal);
            s += *v * *v;
        }
        if s > 1e-300 {
            let inv = 1.0 / s.sqrt();
            for v in out.iter_mut() {
                *v *= inv;
            }
            return;
        }
    }
}

/// Draws `x` in `B(radius)` with density `(d-a) |x|^-a / (|S| R^(d-a))`;
/// returns the density.
#[inline]
pub(crate) fn sample_ball<R: Rng>(rng: &mut R, radius: f64, a: f64, out: &mut [f64]) -> f64 {
    let d = out.len() as f64;
    let k = d - a;
    let rho = radius * open_unit(rng).powf(1.0 / k);
    direction(rng, out);
    for v in out.iter_mut() {
        *v *= rho;
    }
    k * rho.powf(-a) / (unit_sphere_area(out.len()) * radius.powf(k))
}

/// `y = x + r w`, `r` on `(0, len)` with density `~ r^(d-1-c)`; returns the
/// conditional density of `y`.
#[inline]
pub(crate) fn sample_pair<R: Rng>(rng: &mut R, x: &[f64], len: f64, c: f64, out: &mut [f64]) -> f64 {
    let d = x.len() as f64;
    let k = d - c;
    let r = len * open_unit(rng).powf(1.0 / k);
    direction(rng, out);
    for (o, xi) in out.iter_mut().zip(x) {
        *o = xi + r * *o;
    }
    k * r.powf(-c) / (unit_sphere_area(x.len()) * len.powf(k))
}

/// `|y| > radius` with density `~ |y|^-gamma`, `gamma > d`.
#[inline]
pub(crate) fn sample_exterior<R: Rng>(rng: &mut R, radius: f64, gamma: f64, out: &mut [f64]) -> f64 {
    let d = out.len() as f64;
    let k = gamma - d;
    let rho = radius * open_unit(rng).powf(-1.0 / k);
    direction(rng, out);
    for v in out.iter_mut() {
        *v *= rho;
    }
    k * radius.powf(k) * rho.powf(-gamma) / unit_sphere_area(out.len())
}

/// Evaluates `n` samples in parallel, each on its own counter-derived stream,
/// and returns them in index order.
pub(crate) fn par_samples<F>(n: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(u64) -> f64 + Sync,
{
    let values: Vec<f64> = (0..n as u64).into_par_iter().map(&f).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite integrand sample at index {i}")));
    }
    Ok(values)
}

/// Sequential mean and unbiased sample variance.
pub(crate) fn mean_var(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().copied().collect::<CompensatedSum>().total() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).collect::<CompensatedSum>().total();
    (mean, ss / (n - 1) as f64)
}

/// Flags sample sets whose variance looks infinite.
pub(crate) fn variance_warnings(values: &[f64], label: &str) -> Vec<String> {
    let n = values.len();
    let mut out = Vec::new();
    if n < 64 {
        return out;
    }
    let total_sq: f64 = values.iter().map(|v| v * v).sum();
    let max_sq = values.iter().map(|v| v * v).fold(0.0, f64::max);
    if total_sq > 0.0 && max_sq > 0.25 * total_sq {
        out.push(format!(
            "{label}: one sample carries {:.0}% of the second moment; variance may be infinite",
            100.0 * max_sq / total_sq
        ));
    }
    let v1 = mean_var(&values[..n / 4]).1;
    let v2 = mean_var(&values[..n / 2]).1;
    let v3 = mean_var(values).1;
    if v1 > 0.0 && v2 > v1 && v3 > v2 && v3 > 4.0 * v1 {
        out.push(format!("{label}: running variance keeps growing ({v1:.3e} -> {v3:.3e})"));
    }
    out
}

/// Sampling regions for a double integral over `D x D`.
enum Region<'a> {
    Bounded { domain: &'a Domain, radius: f64, len: f64 },
    Split { radius: f64, gamma: f64 },
}

fn region<'a>(params: &InequalityParams, domain: &'a Domain, support: Option<f64>) -> Result<Region<'a>> {
    match domain {
        Domain::Ball { radius } => Ok(Region::Bounded { domain, radius: *radius, len: 2.0 * radius }),
        Domain::Interval { lo, hi } => Ok(Region::Bounded { domain, radius: lo.abs().max(hi.abs()), len: hi - lo }),
        Domain::WholeSpace => {
            let radius = support.ok_or_else(|| {
                Error::Unsupported("whole-space sampling needs a finite support radius".into())
            })?;
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::Unsupported(format!("support radius {radius} is not usable")));
            }
            let d = params.dim();
            let kappa = params.beta - params.alpha1.max(params.alpha2);
            if kappa <= d {
                return Err(Error::Divergent(format!(
                    "exterior tail ~ |y|^-{kappa} is not integrable in dimension {}",
                    params.d
                )));
            }
            Ok(Region::Split { radius, gamma: kappa })
        }
        Domain::Surface { .. } => Err(Error::Unsupported("double integrals over a surface".into())),
    }
}

/// Importance-sampled estimate of `int_D int_D f(x, y) dx dy`.
///
/// On the whole space `f` must vanish when both points lie outside
/// `B(support_radius)`; the integral then splits into a ball-ball part and a
/// ball-exterior part, each sampled on alternating indices.
pub fn mc_double_integral<F>(
    f: F,
    params: &InequalityParams,
    domain: &Domain,
    support_radius: Option<f64>,
    cfg: &McConfig,
) -> Result<QuadratureResult>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    cfg.check()?;
    let d = params.d;
    if d == 0 || d > MAX_DIM {
        return Err(Error::Unsupported(format!("Monte Carlo sampling in dimension {d}")));
    }
    domain.validate(d)?;
    let excess = 2.0 * params.dim() + params.alpha1 + params.alpha2 - params.beta;
    if !(excess > 0.0) {
        return Err(Error::Validation(vec![format!(
            "2d + alpha1 + alpha2 - beta > 0 (got {excess})"
        )]));
    }
    let c = cfg.pair_exponent_for(params);
    let a = cfg.origin_exponent_for(params);
    check_exponent("pair_exponent", c, d)?;
    check_exponent("origin_exponent", a, d)?;
    let region = region(params, domain, support_radius)?;
    let seed = cfg.seed;

    let sample = |i: u64| -> f64 {
        let mut rng = stream_rng(seed, i);
        let mut xb = [0.0; MAX_DIM];
        let mut yb = [0.0; MAX_DIM];
        let x = &mut xb[..d];
        let y = &mut yb[..d];
        match &region {
            Region::Bounded { domain, radius, len } => {
                let qx = sample_ball(&mut rng, *radius, a, x);
                let qy = sample_pair(&mut rng, x, *len, c, y);
                if !domain.contains(x) || !domain.contains(y) {
                    return 0.0;
                }
                let v = f(x, y);
                if v == 0.0 {
                    0.0
                } else {
                    v / (qx * qy)
                }
            }
            Region::Split { radius, gamma } => {
                let qx = sample_ball(&mut rng, *radius, a, x);
                if i % 2 == 0 {
                    let qy = sample_pair(&mut rng, x, 2.0 * radius, c, y);
                    if crate::model::norm(y) > *radius {
                        return 0.0;
                    }
                    let v = f(x, y);
                    if v == 0.0 {
                        0.0
                    } else {
                        v / (qx * qy)
                    }
                } else {
                    let qy = sample_exterior(&mut rng, *radius, *gamma, y);
                    let v = f(x, y) + f(y, x);
                    if v == 0.0 {
                        0.0
                    } else {
                        v / (qx * qy)
                    }
                }
            }
        }
    };

    let n = cfg.n_samples;
    let values = par_samples(n, sample)?;
    let (value, var, warnings) = match region {
        Region::Bounded { .. } => {
            let (m, v) = mean_var(&values);
            (m, v / n as f64, variance_warnings(&values, "pair sampler"))
        }
        Region::Split { .. } => {
            if n < 2 {
                return Err(Error::InvalidParameter("whole-space sampling needs n_samples >= 2".into()));
            }
            let inner: Vec<f64> = values.iter().step_by(2).copied().collect();
            let outer: Vec<f64> = values.iter().skip(1).step_by(2).copied().collect();
            let (m1, v1) = mean_var(&inner);
            let (m2, v2) = mean_var(&outer);
            let mut w = variance_warnings(&inner, "pair sampler (ball)");
            w.extend(variance_warnings(&outer, "pair sampler (exterior)"));
            (m1 + m2, v1 / inner.len() as f64 + v2 / outer.len() as f64, w)
        }
    };
    Ok(QuadratureResult {
        value,
        error_estimate: var.sqrt(),
        method: Method::McPairs,
        evaluations: n as u64,
        seed: Some(seed),
        warnings,
    })
}

/// Importance-sampled `int_D f(x) dx` in dimension `d` with an origin-weighted
/// proposal. On the whole space `f` must vanish outside `B(support_radius)`.
pub fn mc_integral<F>(
    f: F,
    d: usize,
    domain: &Domain,
    support_radius: Option<f64>,
    origin_exponent: f64,
    cfg: &McConfig,
) -> Result<QuadratureResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.check()?;
    if d == 0 || d > MAX_DIM {
        return Err(Error::Unsupported(format!("Monte Carlo sampling in dimension {d}")));
    }
    domain.validate(d)?;
    check_exponent("origin_exponent", origin_exponent, d)?;
    let (radius, bounded) = match domain {
        Domain::Ball { radius } => (*radius, Some(domain)),
        Domain::Interval { lo, hi } => (lo.abs().max(hi.abs()), Some(domain)),
        Domain::WholeSpace => (
            support_radius.filter(|r| *r > 0.0 && r.is_finite()).ok_or_else(|| {
                Error::Unsupported("whole-space sampling needs a finite support radius".into())
            })?,
            None,
        ),
        Domain::Surface { .. } => return Err(Error::Unsupported("sample the restricted function instead".into())),
    };
    let seed = cfg.seed;
    let sample = |i: u64| -> f64 {
        let mut rng = stream_rng(seed, i);
        let mut xb = [0.0; MAX_DIM];
        let x = &mut xb[..d];
        let q = sample_ball(&mut rng, radius, origin_exponent, x);
        if bounded.is_some_and(|dom| !dom.contains(x)) {
            return 0.0;
        }
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v / q
        }
    };
    let n = cfg.n_samples;
    let values = par_samples(n, sample)?;
    let (m, v) = mean_var(&values);
    Ok(QuadratureResult {
        value: m,
        error_estimate: (v / n as f64).sqrt(),
        method: Method::McPoints,
        evaluations: n as u64,
        seed: Some(seed),
        warnings: variance_warnings(&values, "point sampler"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::integrate_1d_singular;

    fn unit_params(beta: f64) -> InequalityParams {
        InequalityParams::new(1).with_beta(beta)
    }

    #[test]
    fn squared_difference_on_unit_square() {
        let cfg = McConfig { pair_exponent: Some(0.0), origin_exponent: Some(0.0), ..McConfig::default() };
        let dom = Domain::interval(0.0, 1.0);
        let r = mc_double_integral(|x, y| (x[0] - y[0]).powi(2), &unit_params(0.0), &dom, None, &cfg).unwrap();
        assert!((r.value - 1.0 / 6.0).abs() < 3.0 * r.error_estimate, "{r:?}");
        assert_eq!(r.seed, Some(cfg.seed));
    }

    #[test]
    fn zero_integrand_has_zero_error() {
        let r = mc_double_integral(|_, _| 0.0, &unit_params(0.0), &Domain::ball(1.0), None, &McConfig::default())
            .unwrap();
        assert_eq!((r.value, r.error_estimate), (0.0, 0.0));
    }

    #[test]
    fn singular_kernel_matches_nested_oracle() {
        let cfg = McConfig { pair_exponent: Some(0.5), origin_exponent: Some(0.0), ..McConfig::default() };
        let dom = Domain::interval(0.0, 1.0);
        let r = mc_double_integral(|x, y| (x[0] - y[0]).abs().powf(-0.5), &unit_params(0.5), &dom, None, &cfg).unwrap();
        let oracle = integrate_1d_singular(
            |x| integrate_1d_singular(|t: f64| t.abs().powf(-0.5), -x, 1.0 - x, &[0.0], 1e-11).unwrap().value,
            0.0,
            1.0,
            &[0.0, 1.0],
            1e-9,
        )
        .unwrap();
        assert!((oracle.value - 8.0 / 3.0).abs() < 1e-8);
        assert!((r.value - oracle.value).abs() < 3.0 * (r.error_estimate + oracle.error_estimate));
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let cfg = McConfig::default().with_samples(20_000);
        let p = InequalityParams::new(2).with_beta(3.0);
        let f = |x: &[f64], y: &[f64]| {
            let u = |z: &[f64]| (-(z[0] * z[0] + z[1] * z[1])).exp() * (crate::model::norm(z) < 1.0) as i32 as f64;
            let dx = x[0] - y[0];
            let dy = x[1] - y[1];
            (u(x) - u(y)).powi(2) * (dx * dx + dy * dy).powf(-1.5)
        };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_double_integral(f, &p, &Domain::WholeSpace, Some(1.0), &cfg).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error_estimate.to_bits(), b.error_estimate.to_bits());
    }

    #[test]
    fn rejects_bad_exponents() {
        let cfg = McConfig { pair_exponent: Some(1.0), ..McConfig::default() };
        assert!(mc_double_integral(|_, _| 1.0, &unit_params(0.0), &Domain::ball(1.0), None, &cfg).is_err());
        let p = unit_params(2.0);
        assert!(matches!(
            mc_double_integral(|_, _| 1.0, &p, &Domain::ball(1.0), None, &McConfig::default()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn standard_error_halves_with_quadrupled_budget() {
        let dom = Domain::interval(0.0, 1.0);
        let p = unit_params(0.0);
        let mut ratios: Vec<f64> = (0..20)
            .map(|k| {
                let cfg = McConfig::default().with_samples(2000).with_seed(k);
                let a = mc_double_integral(|x, y| (x[0] - y[0]).powi(2), &p, &dom, None, &cfg).unwrap();
                let cfg = cfg.with_samples(4000).with_seed(1000 + k);
                let b = mc_double_integral(|x, y| (x[0] - y[0]).powi(2), &p, &dom, None, &cfg).unwrap();
                b.error_estimate / a.error_estimate
            })
            .collect();
        ratios.sort_by(f64::total_cmp);
        let median = 0.5 * (ratios[9] + ratios[10]);
        assert!((0.6..=0.85).contains(&median), "median {median}");
    }

    #[test]
    fn single_integral_ball_volume() {
        let cfg = McConfig::default();
        let r = mc_integral(|_| 1.0, 3, &Domain::ball(1.0), None, 0.0, &cfg).unwrap();
        assert!((r.value - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        let r = mc_integral(|x| x[0] * x[0], 2, &Domain::ball(1.0), None, 0.5, &cfg).unwrap();
        assert!((r.value - std::f64::consts::PI / 4.0).abs() < 3.0 * r.error_estimate);
    }
}
