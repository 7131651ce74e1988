use super::*;
use crate::trialfuncs::closed_form_weighted_power_integral;

fn params(d: usize) -> InequalityParams {
    InequalityParams::new(d)
}

fn num() -> Numerics {
    Numerics::default()
}

#[test]
fn constant_on_unit_interval_ball() {
    let u = TrialFunction::constant(1, 1.0);
    let spec = NormSpec::target(params(1).with_q(2.0));
    let r = target_norm(&u, &spec, &Domain::ball(1.0), &num()).unwrap();
    assert!((r.value - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn log_cusp_target_closed_form() {
    let u = TrialFunction::log_cusp(1);
    let spec = NormSpec::target(params(1).with_q(1.5).with_mu(0.75));
    let want = (2.0 * libm::tgamma(2.5) / 0.25f64.powf(2.5)).powf(1.0 / 1.5);
    let closed = target_norm(&u, &spec, &Domain::WholeSpace, &num()).unwrap();
    assert_eq!(closed.method, Method::ClosedForm);
    assert!((closed.value - want).abs() < 1e-12 * want);
    let quad = target_norm(&u, &spec, &Domain::WholeSpace, &num().without_closed_forms()).unwrap();
    assert!((quad.value - want).abs() < 1e-7 * want, "{} vs {want}", quad.value);
}

#[test]
fn log_cusp_target_matches_weighted_power_closed_form() {
    // mu = lambda d q: int |log|x||^q |x|^-lambda d q over B(1) = |S| G(q+1)/(d(1 - lambda q))^(q+1)
    let (lambda, q, d) = (0.3, 2.0, 2);
    let u = TrialFunction::log_cusp(d);
    let mu = lambda * d as f64 * q;
    let spec = NormSpec::target(params(d).with_q(q).with_mu(mu));
    let r = target_norm(&u, &spec, &Domain::ball(1.0), &num().without_closed_forms()).unwrap();
    let want = crate::quad::unit_sphere_area(d) * closed_form_weighted_power_integral(lambda, q, d).unwrap();
    assert!((r.value.powf(q) - want).abs() < 1e-7 * want);
}

#[test]
fn ramp_gagliardo_and_gradient_on_unit_interval() {
    let u = TrialFunction::linear_ramp(1, 1.0).unwrap();
    let dom = Domain::interval(0.0, 1.0);
    let g = gagliardo_seminorm(&u, &NormSpec::gagliardo(params(1).with_p(2.0)), &dom, &num()).unwrap();
    assert!((g.value - (1.0f64 / 6.0).sqrt()).abs() < 1e-9, "{}", g.value);
    let s = gradient_norm(&u, &NormSpec::gradient(params(1).with_s(2.0)), &dom, &num()).unwrap();
    assert!((s.value - 1.0).abs() < 1e-12);
}

#[test]
fn surface_trace_of_constant() {
    let u = TrialFunction::constant(2, 1.0);
    let spec = NormSpec::surface(params(2).with_q(2.0));
    let r = surface_norm(&u, &spec, &Domain::surface(1, Some(1.0)), &num()).unwrap();
    assert!((r.value - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn surface_rejects_mu_at_m() {
    let u = TrialFunction::log_cusp(2);
    let spec = NormSpec::surface(params(2).with_q(2.0).with_mu(1.0));
    let err = surface_norm(&u, &spec, &Domain::surface(1, None), &num()).unwrap_err();
    assert!(err.is_validation());
}

#[test]
fn homogeneity_in_amplitude() {
    let base = TrialFunction::bump(1, 1.0);
    let spec = NormSpec::gagliardo(params(1).with_p(2.0).with_beta(1.5));
    let b = gagliardo_seminorm(&base, &spec, &Domain::WholeSpace, &num()).unwrap().value;
    for c in [-2.0, 0.5] {
        let u = TrialFunction::scaled(c, base.clone());
        let v = gagliardo_seminorm(&u, &spec, &Domain::WholeSpace, &num()).unwrap().value;
        assert!(relative_gap(v, c.abs() * b) < 1e-8, "c = {c}");
    }
}

#[test]
fn constants_have_zero_seminorm() {
    let u = TrialFunction::offset(3.0, TrialFunction::constant(2, 1.0));
    let spec = NormSpec::gagliardo(params(2).with_p(2.0).with_beta(2.5));
    let r = gagliardo_seminorm(&u, &spec, &Domain::ball(1.0), &num()).unwrap();
    assert_eq!(r.value, 0.0);
}

#[test]
fn adding_a_constant_leaves_the_seminorm_unchanged() {
    let base = TrialFunction::bump(2, 1.0);
    let spec = NormSpec::gagliardo(params(2).with_p(2.0).with_beta(2.5));
    let cfg = Numerics::default().with_mc(McConfig::default().with_samples(1 << 12));
    let a = gagliardo_seminorm(&base, &spec, &Domain::ball(2.0), &cfg).unwrap();
    let b = gagliardo_seminorm(&TrialFunction::offset(5.0, base), &spec, &Domain::ball(2.0), &cfg).unwrap();
    assert_eq!(a.value, b.value);
}

#[test]
fn mc_dilation_covariance() {
    // dilating u and the domain together rescales each sample by the same power
    let (theta, d) = (2.0, 2usize);
    let p = params(d).with_p(2.0).with_beta(2.5).with_alphas(0.0, 0.0);
    let spec = NormSpec::gagliardo(p.clone());
    let cfg = Numerics::default().with_mc(McConfig::default().with_samples(1 << 12));
    let u = TrialFunction::bump(d, 1.0);
    let a = gagliardo_integral(&u, &spec, &Domain::ball(1.0), &cfg).unwrap();
    let b = gagliardo_integral(&u.dilate(theta).unwrap(), &spec, &Domain::ball(theta), &cfg).unwrap();
    let kappa = 2.0 * d as f64 - p.beta;
    assert!(relative_gap(b.value, theta.powf(kappa) * a.value) < 1e-12);
}

#[test]
fn log_cusp_polar_matches_nested_quadrature() {
    // d = 1, whole space: the polar reduction and the direct double integral agree
    let u = TrialFunction::log_cusp(1);
    let spec = NormSpec::gagliardo(params(1).with_p(2.0).with_beta(1.5));
    let polar = gagliardo_seminorm(&u, &spec, &Domain::ball(2.0), &num()).unwrap();
    let direct = gagliardo_seminorm(&u, &spec, &Domain::ball(2.0), &num().with_tol(1e-6).without_closed_forms()).unwrap();
    assert!(relative_gap(polar.value, direct.value) < 1e-4, "{} vs {}", polar.value, direct.value);
}

#[test]
fn mixed_equals_gagliardo_when_p_equals_q() {
    let u = TrialFunction::bump(1, 1.0);
    let p = params(1).with_p(2.0).with_q(2.0).with_beta(1.5).with_alphas(0.2, 0.2);
    let g = gagliardo_seminorm(&u, &NormSpec::gagliardo(p.clone()), &Domain::ball(1.5), &num()).unwrap();
    let m = mixed_seminorm(&u, &NormSpec::mixed(p), &Domain::ball(1.5), &num()).unwrap();
    assert!(relative_gap(g.value, m.value) < 1e-6, "{} vs {}", g.value, m.value);
}

#[test]
fn mixed_mc_matches_gagliardo_when_p_equals_q() {
    let u = TrialFunction::bump(2, 1.0);
    let p = params(2).with_p(2.0).with_q(2.0).with_beta(2.5);
    let mc = McConfig { inner_samples: 256, outer_samples: 1024, ..McConfig::default() };
    let cfg = Numerics::default().with_mc(mc.clone().with_samples(1 << 17));
    let g = gagliardo_seminorm(&u, &NormSpec::gagliardo(p.clone()), &Domain::ball(1.0), &cfg).unwrap();
    let m = mixed_seminorm(&u, &NormSpec::mixed(p), &Domain::ball(1.0), &cfg).unwrap();
    let tol = 4.0 * (g.error_estimate + m.error_estimate);
    assert!((g.value - m.value).abs() < tol, "{} vs {} (tol {tol})", g.value, m.value);
}

#[test]
fn mixed_rejects_tiny_inner_budget() {
    let u = TrialFunction::bump(2, 1.0);
    let p = params(2).with_p(2.0).with_q(3.0).with_beta(2.5);
    let mc = McConfig { inner_samples: 8, ..McConfig::default() };
    let err = mixed_seminorm(&u, &NormSpec::mixed(p), &Domain::ball(1.0), &num().with_mc(mc)).unwrap_err();
    assert!(matches!(err, Error::InvalidParameter(_)));
}

#[test]
fn non_permissive_pair_rejected() {
    let u = TrialFunction::bump(1, 1.0);
    let spec = NormSpec::gagliardo(params(1).with_p(2.0).with_beta(2.0));
    let err = gagliardo_seminorm(&u, &spec, &Domain::ball(1.0), &num()).unwrap_err();
    assert!(err.is_validation());
}

#[test]
fn missing_exponent_is_reported() {
    let u = TrialFunction::bump(1, 1.0);
    let err = target_norm(&u, &NormSpec::target(params(1)), &Domain::ball(1.0), &num()).unwrap_err();
    assert!(matches!(err, Error::MissingExponent { .. }));
}

#[test]
fn subtract_origin_kills_constants() {
    let u = TrialFunction::offset(2.0, TrialFunction::bump(1, 1.0));
    let spec = NormSpec::target(params(1).with_q(2.0)).with_subtract_origin(true);
    let r = target_norm(&u, &spec, &Domain::ball(0.5), &num()).unwrap();
    let v = target_norm(&TrialFunction::bump(1, 1.0), &spec, &Domain::ball(0.5), &num()).unwrap();
    assert!(relative_gap(r.value, v.value) < 1e-12);
}

#[test]
fn whole_space_target_of_nonvanishing_function_diverges() {
    let u = TrialFunction::constant(1, 1.0);
    let spec = NormSpec::target(params(1).with_q(2.0));
    assert!(matches!(target_norm(&u, &spec, &Domain::WholeSpace, &num()), Err(Error::Divergent(_))));
}

#[test]
fn general_weights_match_power_weights() {
    let u = TrialFunction::bump(1, 1.0);
    let p = params(1).with_p(2.0).with_beta(1.5).with_alphas(0.3, 0.1);
    let power = gagliardo_seminorm(&u, &NormSpec::gagliardo(p.clone()), &Domain::ball(1.0), &num()).unwrap();
    let table = |e: f64| WeightSpec::table((0..80).map(|k| {
        let r = 10f64.powf(-6.0 + k as f64 * 0.1);
        (r, r.powf(-e))
    }).collect()).unwrap();
    let w = NormWeights { target: table(0.0), pair: PairWeight::Product(table(-0.3), table(-0.1)), kernel: table(1.5) };
    let general = gagliardo_seminorm(&u, &NormSpec::gagliardo(p).with_weights(w), &Domain::ball(1.0), &num()).unwrap();
    assert!(relative_gap(power.value, general.value) < 1e-6, "{} vs {}", power.value, general.value);
}
