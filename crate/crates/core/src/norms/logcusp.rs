//! Polar reductions for `u = c |log(|x|/theta)| I(|x| <= theta)`.
//!
//! On `B(theta)^2` the substitution `y = |x| z` separates the double integral
//! into a radial power of `|x|` times a fixed integral over the unit ball; the
//! part with one point outside the cusp support reduces to a radial integral
//! against an exterior kernel.

use crate::error::{Error, Result};
use crate::quad::{integrate_1d, unit_sphere_area, Method, QuadOptions, QuadratureResult};
use crate::trialfuncs::LogCuspForm;

/// `|S^{d-1}| theta^(d-mu) Gamma(q+1) / (d-mu)^(q+1)`: the integral of
/// `|log(|x|/theta)|^q |x|^-mu` over `B(theta)`.
pub fn target_integral(d: usize, q: f64, mu: f64, theta: f64) -> Result<f64> {
    let k = d as f64 - mu;
    if !(k > 0.0) {
        return Err(Error::Divergent(format!("|x|^-mu with mu = {mu} is not integrable at 0 in dimension {d}")));
    }
    Ok(unit_sphere_area(d) * theta.powf(k) * libm::tgamma(q + 1.0) / k.powf(q + 1.0))
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Polar {
    pub d: usize,
    pub p: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    /// Domain radius over cusp radius; infinite for the whole space.
    pub outer: f64,
    pub tol: f64,
}

impl Polar {
    fn opts(&self, scale: f64) -> QuadOptions {
        QuadOptions { rel_tol: self.tol * scale, ..QuadOptions::default() }
    }

    /// `A_d(r) = int_{S^{d-1}} |e_1 - r w|^-beta dw`, with `v = 1 - r` passed
    /// separately to keep precision near the diagonal.
    fn angular(&self, r: f64, v: f64) -> f64 {
        let b = self.beta;
        if self.d == 1 {
            return v.powf(-b) + (1.0 + r).powf(-b);
        }
        let k = (self.d - 2) as i32;
        let f = |phi: f64| {
            let s = (0.5 * phi).sin();
            (v * v + 4.0 * r * s * s).powf(-0.5 * b) * phi.sin().powi(k)
        };
        let res = integrate_1d(f, 0.0, std::f64::consts::PI, &[0.0], &self.opts(0.01));
        unit_sphere_area(self.d - 1) * res.map(|r| r.value).unwrap_or(f64::NAN)
    }

    /// `int_{|z|<1} |log|z||^p |z|^a |e_1 - z|^-beta dz`.
    fn inner_ball(&self, a: f64) -> Result<QuadratureResult> {
        let d = self.d as f64;
        let p = self.p;
        if !(a + d > 0.0) {
            return Err(Error::Divergent(format!("|z|^{a} is not integrable at the origin")));
        }
        if !(p - self.beta + d > 0.0) {
            return Err(Error::Divergent("difference kernel is not integrable at the diagonal".into()));
        }
        let e = a + d - 1.0;
        let near0 = integrate_1d(
            |r: f64| r.powf(e) * (-r.ln()).powf(p) * self.angular(r, 1.0 - r),
            0.0,
            0.5,
            &[0.0],
            &self.opts(0.1),
        )?;
        let near1 = integrate_1d(
            |v: f64| {
                let r = 1.0 - v;
                r.powf(e) * (-(-v).ln_1p()).powf(p) * self.angular(r, v)
            },
            0.0,
            0.5,
            &[0.0],
            &self.opts(0.1),
        )?;
        Ok(near0.add(near1))
    }

    /// `int_{1<|w|<T} |w|^a |s e_1 - w|^-beta dw` for `|s| < 1`, `vs = 1 - s`.
    fn exterior(&self, a: f64, s: f64, vs: f64) -> f64 {
        let d = self.d as f64;
        let b = self.beta;
        let t_max = self.outer;
        if self.d == 1 && a == 0.0 && b != 1.0 {
            // closed form of int_1^T (t-s)^-b + (t+s)^-b dt
            let tail = |x: f64| if x.is_infinite() { 0.0 } else { x.powf(1.0 - b) };
            let lo = vs.powf(1.0 - b) + (1.0 + s).powf(1.0 - b);
            let hi = tail(t_max - s) + tail(t_max + s);
            return (lo - hi) / (b - 1.0);
        }
        let e = a + d - 1.0 - b;
        let f = |w: f64| {
            let t = 1.0 + w;
            t.powf(e) * self.angular(s / t, (w + vs) / t)
        };
        integrate_1d(f, 0.0, t_max - 1.0, &[0.0], &self.opts(0.01))
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    }

    fn cross(&self) -> Result<QuadratureResult> {
        let d = self.d as f64;
        let p = self.p;
        let (a1, a2) = (self.alpha1, self.alpha2);
        if self.outer.is_infinite() && !(self.beta - a1.max(a2) > d) {
            return Err(Error::Divergent(format!(
                "exterior tail ~ |y|^-{} is not integrable in dimension {}",
                self.beta - a1.max(a2),
                self.d
            )));
        }
        if !(a1.min(a2) + d > 0.0) {
            return Err(Error::Divergent("pair weight is not integrable at the origin".into()));
        }
        let g = |s: f64, vs: f64| {
            let mut v = s.powf(a1) * self.exterior(a2, s, vs);
            v += if a1 == a2 { v } else { s.powf(a2) * self.exterior(a1, s, vs) };
            v
        };
        let near0 = integrate_1d(
            |s: f64| s.powf(d - 1.0) * (-s.ln()).powf(p) * g(s, 1.0 - s),
            0.0,
            0.5,
            &[0.0],
            &self.opts(0.1),
        )?;
        let near1 = integrate_1d(
            |v: f64| {
                let s = 1.0 - v;
                s.powf(d - 1.0) * (-(-v).ln_1p()).powf(p) * g(s, v)
            },
            0.0,
            0.5,
            &[0.0],
            &self.opts(0.1),
        )?;
        Ok(near0.add(near1).scale(unit_sphere_area(self.d)))
    }

    /// The double integral for the unit cusp (`c = 1`, `theta = 1`).
    pub fn unit_integral(&self) -> Result<QuadratureResult> {
        let kappa = 2.0 * self.d as f64 + self.alpha1 + self.alpha2 - self.beta;
        if !(kappa > 0.0) {
            return Err(Error::Divergent(format!(
                "2d + alpha1 + alpha2 - beta = {kappa} <= 0: the integral diverges at the origin"
            )));
        }
        let j2 = self.inner_ball(self.alpha2)?;
        let j1 = if self.alpha1 == self.alpha2 { j2.clone() } else { self.inner_ball(self.alpha1)? };
        let square = j1.add(j2).scale(unit_sphere_area(self.d) / kappa);
        let cross = if self.outer > 1.0 { self.cross()? } else { QuadratureResult::exact(0.0) };
        let mut out = square.add(cross);
        out.method = Method::Nested;
        Ok(out)
    }

    /// Full double integral for `form`, using exact homogeneity in `theta`.
    pub fn integral(&self, form: &LogCuspForm) -> Result<QuadratureResult> {
        let kappa = 2.0 * self.d as f64 + self.alpha1 + self.alpha2 - self.beta;
        let unit = self.unit_integral()?;
        Ok(unit.scale(form.coef.abs().powf(self.p) * form.theta.powf(kappa)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polar(d: usize, p: f64, beta: f64) -> Polar {
        Polar { d, p, alpha1: 0.0, alpha2: 0.0, beta, outer: f64::INFINITY, tol: 1e-9 }
    }

    #[test]
    fn target_closed_form_matches_quadrature() {
        let exact = target_integral(1, 1.5, 0.75, 1.0).unwrap();
        assert!((exact - 2.0 * libm::tgamma(2.5) / 0.25f64.powf(2.5)).abs() < 1e-9 * exact);
        let q = integrate_1d(|r: f64| 2.0 * r.powf(-0.75) * (-r.ln()).powf(1.5), 0.0, 1.0, &[0.0], &QuadOptions::default())
            .unwrap();
        assert!((q.value - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn angular_kernel_reduces_to_sphere_area_at_center() {
        let p = polar(3, 2.0, 1.0);
        let a = p.angular(0.0, 1.0);
        assert!((a - 4.0 * std::f64::consts::PI).abs() < 1e-10);
        // d = 3: int_{S^2} |e1 - r w|^-1 dw = 4 pi for r < 1 (mean value property)
        let a = p.angular(0.6, 0.4);
        assert!((a - 4.0 * std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn exterior_closed_form_matches_quadrature() {
        let p = polar(1, 2.0, 1.5);
        let s = 0.3;
        let closed = p.exterior(0.0, s, 1.0 - s);
        let direct = integrate_1d(
            |t: f64| (t - s).powf(-1.5) + (t + s).powf(-1.5),
            1.0,
            f64::INFINITY,
            &[],
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((closed - direct.value).abs() < 1e-9 * closed);
    }

    #[test]
    fn divergence_detected() {
        assert!(matches!(polar(1, 2.0, 2.0).unit_integral(), Err(Error::Divergent(_))));
        assert!(matches!(polar(1, 2.0, 0.8).unit_integral(), Err(Error::Divergent(_))));
    }
}
