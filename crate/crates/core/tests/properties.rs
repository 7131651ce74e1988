use fraclab::cli::{Command, RunConfig};
use fraclab::gls::{bgls_norm, BglsOptions, GlsTarget, PsiExpr, PsiFunction};
use fraclab::model::{balance_condition, Domain, InequalityKind, InequalityParams};
use fraclab::norms::{evaluate, gagliardo_seminorm, relative_gap, target_norm, NormSpec, Numerics};
use fraclab::scaling::{check_necessary_condition, check_weighted_conditions, predicted_exponent, EnvelopeExponents};
use fraclab::trialfuncs::TrialFunction;
use proptest::prelude::*;

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(12)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn seminorm_is_absolutely_homogeneous(c in -4.0f64..4.0, beta in 1.1f64..1.9) {
        let u = TrialFunction::bump(1, 1.0);
        let spec = NormSpec::gagliardo(InequalityParams::new(1).with_p(2.0).with_beta(beta));
        let base = gagliardo_seminorm(&u, &spec, &Domain::WholeSpace, &Numerics::default()).unwrap().value;
        let v = gagliardo_seminorm(&TrialFunction::scaled(c, u), &spec, &Domain::WholeSpace, &Numerics::default()).unwrap().value;
        prop_assert!((v - c.abs() * base).abs() <= 1e-8 * base.max(1e-300));
    }

    #[test]
    fn target_scales_with_predicted_exponent(theta in 0.2f64..5.0, q in 1.0f64..4.0, mu in -0.5f64..0.9) {
        let params = InequalityParams::new(1).with_q(q).with_mu(mu);
        let spec = NormSpec::target(params.clone());
        let u = TrialFunction::bump(1, 1.0);
        let num = Numerics::default();
        let a = evaluate(&u, &spec, &Domain::WholeSpace, &num).unwrap().value;
        let b = evaluate(&u.dilate(theta).unwrap(), &spec, &Domain::WholeSpace, &num).unwrap().value;
        let k = predicted_exponent(spec.kind, &params, None).unwrap();
        prop_assert!(relative_gap(b, theta.powf(k) * a) < 1e-7);
    }

    #[test]
    fn translation_by_constants_leaves_seminorm(c in -5.0f64..5.0) {
        let u = TrialFunction::smooth_bump(vec![0.3], 1.0, 1.0).unwrap();
        let spec = NormSpec::gagliardo(InequalityParams::new(1).with_p(1.5).with_beta(1.2));
        let dom = Domain::ball(1.5);
        let a = gagliardo_seminorm(&u, &spec, &dom, &Numerics::default()).unwrap().value;
        let b = gagliardo_seminorm(&TrialFunction::offset(c, u), &spec, &dom, &Numerics::default()).unwrap().value;
        prop_assert!(relative_gap(a, b) < 1e-8);
    }

    #[test]
    fn bgls_norm_is_inverse_in_psi_scale(c in 0.1f64..10.0) {
        let f = GlsTarget::Plain(TrialFunction::bump(1, 1.0));
        let opts = BglsOptions::default().with_points(8);
        let num = Numerics::default();
        let one = PsiFunction::constant(1.0, 3.0, 1.0).unwrap();
        let scaled = PsiFunction::constant(1.0, 3.0, c).unwrap();
        let a = bgls_norm(&f, &one, &f.measure(), &Domain::WholeSpace, &num, &opts).unwrap().value;
        let b = bgls_norm(&f, &scaled, &f.measure(), &Domain::WholeSpace, &num, &opts).unwrap().value;
        prop_assert!(relative_gap(a, c * b) < 1e-12);
    }
}

fn exponent() -> impl Strategy<Value = f64> {
    (8i32..=32).prop_map(|k| k as f64 / 8.0)
}

proptest! {
    #[test]
    fn solved_mu_balances(d in 1usize..=4, p in exponent(), q in exponent(), a1 in 0.0f64..1.0, a2 in 0.0f64..1.0, b in 0.0f64..1.0) {
        let beta = b * d as f64;
        let rhs = (2.0 * d as f64 + a1 + a2 - beta) / p;
        let mu = d as f64 - q * rhs;
        let params = InequalityParams::new(d).with_p(p).with_q(q).with_alphas(a1, a2).with_beta(beta).with_mu(mu);
        let c = check_necessary_condition(InequalityKind::Ordinary, &params).unwrap();
        prop_assert!(c.holds);
        let shifted = params.clone().with_mu(mu - 0.25);
        prop_assert!(!check_necessary_condition(InequalityKind::Ordinary, &shifted).unwrap().holds);
        // raising mu lowers the left exponent
        prop_assert!(balance_condition(&shifted, InequalityKind::Ordinary).unwrap() > 0.0);
    }

    #[test]
    fn matched_power_weights_are_the_equality_case(p in exponent(), q in exponent(), alpha in 0.0f64..1.0, beta in 0.0f64..1.0) {
        let params = InequalityParams::new(1).with_p(p).with_q(q);
        let mu = 1.0 - q * (1.0 + alpha - beta) / p;
        let c = check_weighted_conditions(&EnvelopeExponents::matched(mu, alpha, beta), &params, false).unwrap();
        prop_assert!(c.cond_a && c.cond_b && c.equality_case);
        prop_assert!(c.residual_a.abs() < 1e-12 && c.residual_b.abs() < 1e-12);
    }

    #[test]
    fn psi_formula_round_trips(c in 0.1f64..5.0, e in -3.0f64..3.0, m in 1.0f64..4.0, g in -2.0f64..2.0, p in 1.0f64..6.0) {
        let text = format!("{c} * p^{e} * |p-{m}|^{g}");
        let expr = PsiExpr::parse(&text).unwrap();
        let again = PsiExpr::parse(&expr.to_string()).unwrap();
        prop_assert_eq!(&again, &expr);
        let want = c * p.powf(e) * (p - m).abs().powf(g);
        let got = expr.eval(p);
        prop_assert!(got == want || relative_gap(got, want) < 1e-14);
    }

    #[test]
    fn run_config_round_trips(d in 1usize..4, p in exponent(), seed in any::<u64>()) {
        let mut c = RunConfig::new(Command::CheckBalance);
        c.params = Some(InequalityParams::new(d).with_p(p).with_q(p));
        c.seed = Some(seed);
        let text = serde_json::to_string(&c).unwrap();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), c.clone());
        let text = toml::to_string(&c).unwrap();
        prop_assert_eq!(RunConfig::parse(&text).unwrap(), c);
    }
}

#[test]
fn target_norm_is_monotone_in_domain() {
    let u = TrialFunction::log_cusp(2);
    let spec = NormSpec::target(InequalityParams::new(2).with_q(2.0).with_mu(0.5));
    let num = Numerics::default();
    let mut last = 0.0;
    for r in [0.25, 0.5, 1.0] {
        let v = target_norm(&u, &spec, &Domain::ball(r), &num).unwrap().value;
        assert!(v > last);
        last = v;
    }
}
