mod common;


use proptest::prelude::*;

use common::{corpus_sigma, load, p, poly, vertical, xyz, EXAMPLES};
use sigma_reduce::chart::Chart;
use sigma_reduce::expr::int;
use sigma_reduce::field::{distribution_rank, VectorField};
use sigma_reduce::jet::{derived_invariant, sigma_prolong, verify_invariant, DynamicalSystem};
use sigma_reduce::pipeline::{self, Command, Options};
use sigma_reduce::reduction::transform_system;
use sigma_reduce::sample::{equals_numeric, SampleDomain};
use sigma_reduce::symmetry::{
    check_sigma_symmetry, complete_prolonged_set, simplified_system, solve_sigma, theorem4_sigma, Mode,
};
use sigma_reduce::{parse, Expr, Symbol};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 32,
        ..ProptestConfig::default()
    }
}

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["x", "y", "z"]).prop_map(Expr::var),
        (-4i64..=4).prop_map(Expr::int),
    ];
    leaf.prop_recursive(6, 48, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 2..4).prop_map(Expr::product),
            (inner.clone(), -2i64..=3).prop_map(|(b, k)| Expr::powi(b, k)),
            inner.clone().prop_map(Expr::exp),
            inner.prop_map(Expr::log),
        ]
    })
}

/// Expressions that evaluate everywhere on the default box.
fn arb_smooth() -> impl Strategy<Value = Expr> {
    let names: Vec<Symbol> = ["x", "y", "z"].into_iter().map(Symbol::new).collect();
    (prop::collection::vec(-3i64..=3, 10), prop::collection::vec(-1i64..=1, 4), 0usize..3).prop_map(
        move |(c, l, k)| {
            let base = poly(&names, &c);
            let lin = Expr::sum(names.iter().zip(&l[1..]).map(|(s, c)| Expr::Var(s.clone()).scale(int(*c))));
            match k {
                0 => base,
                1 => &base * &Expr::exp(lin),
                _ => &base + &Expr::log(&Expr::int(2) + &Expr::Var(names[(l[0] + 1) as usize].clone())),
            }
        },
    )
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, n)
}

fn domain() -> SampleDomain {
    SampleDomain::default().with_count(16)
}

fn x() -> Symbol {
    Symbol::new("x")
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn canonical_is_idempotent(e in arb_expr()) {
        prop_assert_eq!(e.canonical().canonical(), e.canonical());
    }

    #[test]
    fn print_parse_round_trip(e in arb_expr()) {
        let back = parse(&e.to_string()).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn differentiation_is_linear(e1 in arb_expr(), e2 in arb_expr(), a in -5i64..=5, b in -5i64..=5) {
        let lhs = (&e1.scale(int(a)) + &e2.scale(int(b))).differentiate(&x());
        let rhs = &e1.differentiate(&x()).scale(int(a)) + &e2.differentiate(&x()).scale(int(b));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn product_rule(f in arb_smooth(), g in arb_smooth()) {
        let lhs = (&f * &g).differentiate(&x());
        let rhs = &(&f.differentiate(&x()) * &g) + &(&f * &g.differentiate(&x()));
        let c = equals_numeric(&lhs, &rhs, &domain()).unwrap();
        prop_assert!(c.equal, "residual {}", c.residual);
    }

    #[test]
    fn bracket_is_antisymmetric(a in coeffs(30), b in coeffs(30)) {
        let c = xyz();
        common::antisymmetry(&vertical(&c, &a), &vertical(&c, &b)).unwrap();
    }

    #[test]
    fn jacobi_identity(a in coeffs(30), b in coeffs(30), c3 in coeffs(30)) {
        let c = xyz();
        common::jacobi(&vertical(&c, &a), &vertical(&c, &b), &vertical(&c, &c3), &domain()).unwrap();
    }

    #[test]
    fn apply_is_a_derivation(a in coeffs(30), g in arb_smooth(), h in arb_smooth()) {
        common::derivation(&vertical(&xyz(), &a), &g, &h, &domain()).unwrap();
    }

    #[test]
    fn bracket_acts_as_commutator(a in coeffs(30), b in coeffs(30), g in arb_smooth()) {
        let c = xyz();
        common::bracket_consistency(&vertical(&c, &a), &vertical(&c, &b), &g, &domain()).unwrap();
    }

    #[test]
    fn singleton_prolongation_is_lambda_prolongation(a in coeffs(30), l in coeffs(10)) {
        let c = xyz();
        let lambda = &poly(&c.directions(), &l) + &p("y'");
        common::lambda_specialization(&vertical(&c, &a), &lambda).unwrap();
    }

    #[test]
    fn prolongation_projects_back(a in coeffs(30), b in coeffs(30), s in coeffs(40)) {
        let c = xyz();
        let jc = c.jet_chart();
        let names = jc.symbols();
        let sigma = sigma_reduce::jet::SigmaMatrix::new(vec![
            vec![poly(&names, &s[0..10]), poly(&names, &s[10..20])],
            vec![poly(&names, &s[20..30]), poly(&names, &s[30..40])],
        ]).unwrap();
        common::projection(&[vertical(&c, &a), vertical(&c, &b)], &sigma).unwrap();
    }

    #[test]
    fn ibdp_on_corpus(k in 0usize..EXAMPLES.len(), g in coeffs(16)) {
        let pr = load(EXAMPLES[k]);
        let sigma = corpus_sigma(&pr);
        let gexpr = poly(&pr.system.chart().directions(), &g);
        common::ibdp(&pr.fields, &sigma, &gexpr, &pr.domain.clone().with_count(16)).unwrap();
    }

    #[test]
    fn theorem4_with_random_alphas(a1 in coeffs(10), a2 in coeffs(10)) {
        let pr = load("example8");
        let f = simplified_system(&pr.system, &pr.fields, pr.alphas.as_ref().unwrap()).unwrap();
        let names = f.chart().directions();
        let alphas = vec![poly(&names, &a1), poly(&names, &a2)];
        let full = with_alphas(&f, &pr.fields, &alphas);
        let d = SampleDomain::default().with_count(16);
        let t4 = theorem4_sigma(&f, &pr.fields, &alphas, &d).unwrap();
        prop_assert!(t4.identity_residual < d.tolerance);
        let rep = check_sigma_symmetry(&full, &pr.fields, &t4.sigma, Mode::Strict, &d).unwrap();
        prop_assert!(rep.verdict.passed(), "residual {}", rep.max_residual);
        common::same_structure(&pr.fields, &t4.sigma, &d).unwrap();
    }

    #[test]
    fn theorem4_linear_case(a in coeffs(6), m in coeffs(4)) {
        // f = A x with the dilation as the standard symmetry.
        let c = Chart::base(&["x", "y"]);
        let f = DynamicalSystem::new(c.clone(), vec![
            Expr::sum([p("x").scale(int(m[0])), p("y").scale(int(m[1]))]),
            Expr::sum([p("x").scale(int(m[2])), p("y").scale(int(m[3]))]),
        ]).unwrap();
        let fields = vec![VectorField::vertical(&c, vec![p("x"), p("y")]).unwrap()];
        let alphas = vec![poly(&c.directions(), &a)];
        let full = with_alphas(&f, &fields, &alphas);
        let d = SampleDomain::default().with_count(16);
        let t4 = theorem4_sigma(&f, &fields, &alphas, &d).unwrap();
        let rep = check_sigma_symmetry(&full, &fields, &t4.sigma, Mode::Strict, &d).unwrap();
        prop_assert!(rep.verdict.passed(), "residual {}", rep.max_residual);
    }

    #[test]
    fn rejection_keeps_guarded_points(guard in 1e-3f64..0.2, seed in any::<u64>()) {
        let d = SampleDomain { guard, ..SampleDomain::default() }
            .with_seed(seed)
            .with_bounds("x", 0.0, 1.0)
            .with_bounds("y", 0.0, 1.0);
        let e = p("(x - 1/2)^-1 + (y - x)^-2");
        let mut bases = Vec::new();
        negative_power_bases(&e, &mut bases);
        prop_assert_eq!(bases.len(), 2);
        let pts = d.sample(&e.free_symbols(), 32, |pt| e.evaluate_guarded(pt, guard)).unwrap();
        for (pt, _) in pts {
            for b in &bases {
                prop_assert!(b.evaluate(&pt).unwrap().abs() >= guard);
            }
        }
    }

    #[test]
    fn seeded_verdicts_are_reproducible(seed in any::<u64>(), k in 0usize..EXAMPLES.len()) {
        let pr = load(EXAMPLES[k]);
        let d = pr.domain.clone().with_count(16).with_seed(seed);
        let sigma = corpus_sigma(&pr);
        let a = check_sigma_symmetry(&pr.system, &pr.fields, &sigma, pr.mode, &d).unwrap();
        let b = check_sigma_symmetry(&pr.system, &pr.fields, &sigma, pr.mode, &d).unwrap();
        prop_assert_eq!(a, b);
    }
}

fn negative_power_bases(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Pow(b, k) => {
            if *k < int(0) {
                out.push((**b).clone());
            }
            negative_power_bases(b, out);
        }
        Expr::Exp(a) | Expr::Log(a) => negative_power_bases(a, out),
        Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|x| negative_power_bases(x, out)),
        Expr::Const(_) | Expr::Var(_) => {}
    }
}

fn with_alphas(f: &DynamicalSystem, fields: &[VectorField], alphas: &[Expr]) -> DynamicalSystem {
    let rhs = (0..f.dim())
        .map(|a| {
            let mut terms = vec![f.rhs()[a].clone()];
            for (al, x) in alphas.iter().zip(fields) {
                terms.push(al * &x.phi[a]);
            }
            Expr::sum(terms)
        })
        .collect();
    DynamicalSystem::new(f.chart().clone(), rhs).unwrap()
}

#[test]
fn corpus_expressions_match_finite_differences() {
    for name in EXAMPLES {
        let pr = load(name);
        let d = pr.domain.clone().with_count(16);
        for e in common::corpus_expressions(&pr) {
            let syms = e.free_symbols();
            for s in &syms {
                let de = e.differentiate(s);
                let pts = d
                    .sample(&syms, d.count, |pt| {
                        let h = 1e-6 * pt[s].abs().max(1.0);
                        let mut hi = pt.clone();
                        let mut lo = pt.clone();
                        *hi.get_mut(s).unwrap() += h;
                        *lo.get_mut(s).unwrap() -= h;
                        let fd = (e.evaluate_guarded(&hi, d.guard)? - e.evaluate_guarded(&lo, d.guard)?) / (2.0 * h);
                        let exact = de.evaluate_guarded(pt, d.guard)?;
                        Ok((fd - exact).abs() / (1.0 + exact.abs()))
                    })
                    .unwrap();
                let worst = pts.iter().map(|(_, r)| *r).fold(0.0, f64::max);
                assert!(worst < 1e-6, "{name}: d/d{s} of {e}: relative error {worst:e}");
            }
        }
    }
}

#[test]
fn corpus_expressions_round_trip_through_text() {
    for name in EXAMPLES {
        for e in common::corpus_expressions(&load(name)) {
            assert_eq!(parse(&e.to_string()).unwrap(), e, "{name}: {e}");
        }
    }
}

#[test]
fn corpus_brackets_are_antisymmetric() {
    for name in EXAMPLES {
        let pr = load(name);
        for (i, a) in pr.fields.iter().enumerate() {
            for b in &pr.fields[i + 1..] {
                common::antisymmetry(a, b).unwrap_or_else(|e| panic!("{name}: {e}"));
            }
        }
    }
}

#[test]
fn rank_survives_rescaling() {
    for name in EXAMPLES {
        let pr = load(name);
        let scaled: Vec<VectorField> = pr.fields.iter().map(|f| f.scale(&p("1 + x^2"))).collect();
        assert_eq!(
            distribution_rank(&pr.fields, &pr.domain).unwrap(),
            distribution_rank(&scaled, &pr.domain).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn derived_invariants_are_invariant() {
    for name in EXAMPLES {
        let pr = load(name);
        if pr.invariants.len() < 2 {
            continue;
        }
        let y = sigma_prolong(&pr.fields, &corpus_sigma(&pr)).unwrap();
        let chart = pr.system.chart().base_chart();
        let g = derived_invariant(&pr.invariants[0], &pr.invariants[1], &chart).unwrap();
        let (ok, r) = verify_invariant(&y, &g, &pr.domain).unwrap();
        assert!(ok, "{name}: residual {r:e}");
    }
}

#[test]
fn solved_sigma_round_trips() {
    for name in EXAMPLES {
        let pr = load(name);
        // Orbital symmetries have no sigma-bar alone, and systems with
        // parameters are checked in jet form only.
        if pr.mode == Mode::Orbital || pr.system.has_parameters() {
            continue;
        }
        let sb = solve_sigma(&pr.system, &pr.fields, &pr.domain).unwrap();
        let rep = check_sigma_symmetry(&pr.system, &pr.fields, &sb, Mode::Strict, &pr.domain).unwrap();
        assert!(rep.verdict.passed(), "{name}: {}", rep.max_residual);
    }
}

#[test]
fn completion_adds_vertical_fields() {
    let pr = load("example7");
    let y = sigma_prolong(&pr.fields, pr.sigma.as_ref().unwrap()).unwrap();
    let comp = complete_prolonged_set(&y, &pr.domain, 4).unwrap();
    assert!(!comp.added.is_empty());
    for f in &comp.added {
        assert!(f.projection().is_zero(), "{f}");
    }
}

#[test]
fn adapted_systems_satisfy_chain_rule() {
    for name in EXAMPLES {
        let pr = load(name);
        let Some(change) = &pr.change else { continue };
        let adapted = transform_system(&pr.system, change).unwrap();
        let r = common::chain_rule_residual(&pr, &adapted).unwrap();
        assert!(r < pr.domain.tolerance, "{name}: residual {r:e}");
    }
}

#[test]
fn rk4_is_fourth_order() {
    let e = common::rotation_errors(&[4e-3, 2e-3, 1e-3]);
    for w in e.windows(2) {
        let f = w[0] / w[1];
        assert!((12.0..=20.0).contains(&f), "factor {f}");
    }
}

#[test]
fn reports_are_deterministic() {
    for name in EXAMPLES {
        let pr = load(name);
        let a = pipeline::run(Command::Check, &pr, &Options::default()).unwrap();
        let b = pipeline::run(Command::Check, &pr, &Options::default()).unwrap();
        assert_eq!(a.to_json(), b.to_json(), "{name}");
    }
}
