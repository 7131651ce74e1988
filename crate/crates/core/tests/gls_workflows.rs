use fraclab::gls::{
    certified_constant_table, check_embedding_51a, psi5_and_check_52, BglsOptions, Psi1Mode, PsiFunction,
};
use fraclab::model::{Domain, InequalityParams};
use fraclab::norms::Numerics;
use fraclab::trialfuncs::TrialFunction;

#[test]
fn certified_table_feeds_the_embedding_check() {
    let lambda = 0.5;
    let opts = BglsOptions::default().with_points(6);
    let psi2 = PsiFunction::constant(1.2, 1.9, 1.0).unwrap();
    let mut nodes = vec![psi2.a];
    nodes.extend(opts.grid(psi2.a, psi2.b));
    nodes.push(psi2.b);
    let num = Numerics::default();
    let table = certified_constant_table(lambda, 1, &nodes, false, &num).unwrap();
    // lower bounds of the best constant grow toward 1/lambda
    assert!(table.windows(2).all(|w| w[1].1 > w[0].1));
    let mode = Psi1Mode::CertifiedLower { table: table.clone() };
    let u = TrialFunction::log_cusp(1);
    let e = check_embedding_51a(&u, &psi2, lambda, &mode, false, &Domain::WholeSpace, &num, &opts).unwrap();
    // lower bounds taken from the log cusp itself make it extremal: the
    // constant 1 is reached up to table interpolation
    assert!((e.ratio - 1.0).abs() < 1e-5, "ratio {}", e.ratio);
    let upper = Psi1Mode::UpperBound { c: 2.0 };
    let bump = TrialFunction::bump(1, 1.0);
    assert!(check_embedding_51a(&bump, &psi2, lambda, &upper, false, &Domain::ball(1.5), &num, &opts).unwrap().holds);
    let short = Psi1Mode::CertifiedLower { table: table[1..].to_vec() };
    assert!(check_embedding_51a(&u, &psi2, lambda, &short, false, &Domain::WholeSpace, &num, &opts).is_err());
}

#[test]
fn psi5_bound_holds_with_generous_constant() {
    let u = TrialFunction::bump(1, 1.0);
    let lambda = 0.25;
    // (1 - mu)/r = (1 - beta)/p + 1/q with beta = 1/2, mu = 0
    let params = InequalityParams::new(1).with_beta(0.5);
    let nu = |p: f64, q: f64| if p <= 3.0 && q <= 4.0 { 1.0 } else { f64::INFINITY };
    let k = |_: f64, _: f64| 50.0;
    let region = [(1.5, 2.0), (2.0, 2.0), (2.0, 3.0)];
    let rep = psi5_and_check_52(&u, lambda, &params, &nu, &k, &[1.5, 2.0], &region, &Domain::ball(1.0), &Numerics::default())
        .unwrap();
    assert_eq!(rep.rows.len(), 2);
    assert!(rep.rows.iter().all(|r| r.psi5 == Some(50.0)));
    assert!(rep.g_nu_norm > 0.0);
    assert!(rep.verdicts.iter().all(|v| v.holds));
}
