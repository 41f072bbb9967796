#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use sigma_reduce::chart::Chart;
use sigma_reduce::field::{involution_check, VectorField};
use sigma_reduce::jet::{sigma_prolong, total_derivative, DynamicalSystem, SigmaMatrix};
use sigma_reduce::problem::{Problem, ProblemFile};
use sigma_reduce::sample::{equals_numeric, Rng, SampleDomain};
use sigma_reduce::symmetry::{simplified_system, solve_sigma, theorem4_sigma};
use sigma_reduce::expr::int;
use sigma_reduce::{parse, Expr, Symbol};

pub const EXAMPLES: [&str; 8] = [
    "example1", "example2", "example3", "example4", "example5", "example6", "example7", "example8",
];

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn problem_file(name: &str) -> ProblemFile {
    ProblemFile::load(&corpus_dir().join(format!("{name}.json"))).expect("corpus file loads")
}

pub fn load(name: &str) -> Problem {
    Problem::compile(&problem_file(name), true).expect("corpus file compiles")
}

pub fn p(text: &str) -> Expr {
    parse(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// σ as the pipeline would obtain it: given, constructed, or solved.
pub fn corpus_sigma(pr: &Problem) -> SigmaMatrix {
    if let Some(s) = &pr.sigma {
        return s.clone();
    }
    if let Some(a) = &pr.alphas {
        let f = simplified_system(&pr.system, &pr.fields, a).unwrap();
        return theorem4_sigma(&f, &pr.fields, a, &pr.domain).unwrap().sigma;
    }
    solve_sigma(&pr.system, &pr.fields, &pr.domain).unwrap()
}

/// Monomials of degree at most 2 in `names`.
pub fn monomials(names: &[Symbol]) -> Vec<Expr> {
    let mut out = vec![Expr::one()];
    for s in names {
        out.push(Expr::Var(s.clone()));
    }
    for i in 0..names.len() {
        for j in i..names.len() {
            out.push(&Expr::Var(names[i].clone()) * &Expr::Var(names[j].clone()));
        }
    }
    out
}

/// Polynomial with integer coefficients, cycling through `coeffs`.
pub fn poly(names: &[Symbol], coeffs: &[i64]) -> Expr {
    Expr::sum(
        monomials(names)
            .into_iter()
            .zip(coeffs.iter().cycle())
            .map(|(m, c)| m.scale(int(*c))),
    )
}

pub fn vertical(chart: &Chart, coeffs: &[i64]) -> VectorField {
    let dirs = chart.directions();
    let k = monomials(&dirs).len();
    let phi = (0..dirs.len())
        .map(|a| {
            let c: Vec<i64> = coeffs.iter().cycle().skip(a * k).take(k).copied().collect();
            poly(&dirs, &c)
        })
        .collect();
    VectorField::vertical(chart, phi).unwrap()
}

pub fn small_ints(rng: &mut Rng, n: usize) -> Vec<i64> {
    (0..n).map(|_| (rng.next_u64() % 7) as i64 - 3).collect()
}

pub fn xyz() -> Chart {
    Chart::base(&["x", "y", "z"])
}

fn close(what: &str, a: &Expr, b: &Expr, d: &SampleDomain) -> Result<(), String> {
    let c = equals_numeric(a, b, d).map_err(|e| format!("{what}: {e}"))?;
    if c.equal {
        Ok(())
    } else {
        Err(format!("{what}: residual {:.3e}", c.residual))
    }
}

fn fields_close(what: &str, a: &VectorField, b: &VectorField, d: &SampleDomain) -> Result<(), String> {
    for (x, y) in a.coefficients().into_iter().zip(b.coefficients()) {
        close(what, x, y, d)?;
    }
    Ok(())
}

pub fn antisymmetry(x: &VectorField, y: &VectorField) -> Result<(), String> {
    let a = x.lie_bracket(y).map_err(|e| e.to_string())?;
    let b = y.lie_bracket(x).map_err(|e| e.to_string())?;
    for (u, v) in a.coefficients().into_iter().zip(b.coefficients()) {
        if !(u + v).is_zero() {
            return Err(format!("[X,Y] + [Y,X] has component {}", u + v));
        }
    }
    Ok(())
}

pub fn jacobi(x: &VectorField, y: &VectorField, z: &VectorField, d: &SampleDomain) -> Result<(), String> {
    let br = |a: &VectorField, b: &VectorField| a.lie_bracket(b).unwrap();
    let t1 = br(x, &br(y, z));
    let t2 = br(y, &br(z, x));
    let t3 = br(z, &br(x, y));
    for ((a, b), c) in t1.phi.iter().zip(&t2.phi).zip(&t3.phi) {
        close("jacobi", &Expr::zero(), &Expr::sum([a.clone(), b.clone(), c.clone()]), d)?;
    }
    Ok(())
}

pub fn derivation(x: &VectorField, g: &Expr, h: &Expr, d: &SampleDomain) -> Result<(), String> {
    let lhs = x.apply(&(g * h)).unwrap();
    let rhs = &(&x.apply(g).unwrap() * h) + &(g * &x.apply(h).unwrap());
    close("derivation", &lhs, &rhs, d)
}

pub fn bracket_consistency(x: &VectorField, y: &VectorField, g: &Expr, d: &SampleDomain) -> Result<(), String> {
    let lhs = x.lie_bracket(y).unwrap().apply(g).unwrap();
    let rhs = &x.apply(&y.apply(g).unwrap()).unwrap() - &y.apply(&x.apply(g).unwrap()).unwrap();
    close("bracket consistency", &lhs, &rhs, d)
}

pub fn projection(fields: &[VectorField], sigma: &SigmaMatrix) -> Result<(), String> {
    let y = sigma_prolong(fields, sigma).map_err(|e| e.to_string())?;
    for (a, b) in y.iter().zip(fields) {
        let pr = a.projection();
        if pr.xi != b.xi || pr.phi != b.phi {
            return Err(format!("projection of {a} differs from {b}"));
        }
    }
    Ok(())
}

/// A single vertical field prolongs to `ψ^a = D_t φ^a + λ φ^a`.
pub fn lambda_specialization(x: &VectorField, lambda: &Expr) -> Result<(), String> {
    let sigma = SigmaMatrix::new(vec![vec![lambda.clone()]]).unwrap();
    let y = sigma_prolong(std::slice::from_ref(x), &sigma).map_err(|e| e.to_string())?;
    let psi = y[0].psi.as_ref().expect("prolonged field has a jet part");
    for (a, phi) in x.phi.iter().enumerate() {
        let want = &total_derivative(phi, x.chart(), None).unwrap() + &(lambda * phi);
        if psi[a] != want {
            return Err(format!("component {a}: {} vs {want}", psi[a]));
        }
    }
    Ok(())
}

/// `Y_i(D_t g) - D_t(X_i g) - σ_ij X_j(g) = 0` for vertical fields.
pub fn ibdp(fields: &[VectorField], sigma: &SigmaMatrix, g: &Expr, d: &SampleDomain) -> Result<(), String> {
    let y = sigma_prolong(fields, sigma).map_err(|e| e.to_string())?;
    let chart = fields[0].chart();
    let dtg = total_derivative(g, chart, None).unwrap();
    for (i, yi) in y.iter().enumerate() {
        let lhs = yi.apply(&dtg).unwrap();
        let mut terms = vec![total_derivative(&fields[i].apply(g).unwrap(), chart, None).unwrap()];
        for (j, xj) in fields.iter().enumerate() {
            terms.push(sigma.get(i, j) * &xj.apply(g).unwrap());
        }
        close(&format!("ibdp field {i}"), &lhs, &Expr::sum(terms), d)?;
    }
    Ok(())
}

/// Integrate `ξ' = -2η, η' = 2ξ` from (1, 0) to t = 1 and return the
/// endpoint errors against the rotation for each step.
pub fn rotation_errors(steps: &[f64]) -> Vec<f64> {
    let c = Chart::base(&["xi", "eta"]);
    let sys = DynamicalSystem::new(c.clone(), vec![c.parse("-2*eta").unwrap(), c.parse("2*xi").unwrap()]).unwrap();
    steps
        .iter()
        .map(|h| {
            let tr = sigma_reduce::integrate::integrate(&sys, &[1.0, 0.0], 1.0, *h).unwrap();
            let e = tr.last().unwrap();
            ((e[0] - 2f64.cos()).powi(2) + (e[1] - 2f64.sin()).powi(2)).sqrt()
        })
        .collect()
}

/// Structure functions of the prolonged set agree with those of the base
/// fields.
pub fn same_structure(fields: &[VectorField], sigma: &SigmaMatrix, d: &SampleDomain) -> Result<(), String> {
    let y = sigma_prolong(fields, sigma).map_err(|e| e.to_string())?;
    let base = involution_check(fields, d).map_err(|e| e.to_string())?;
    let prol = involution_check(&y, d).map_err(|e| e.to_string())?;
    if !base.success || !prol.success {
        return Err("not in involution".into());
    }
    match (base.mu, prol.mu) {
        (Some(a), Some(b)) => {
            for (ra, rb) in a.iter().flatten().flatten().zip(b.iter().flatten().flatten()) {
                close("structure function", ra, rb, d)?;
            }
            Ok(())
        }
        _ => {
            if (base.residual - prol.residual).abs() < d.tolerance {
                Ok(())
            } else {
                Err("structure functions only available numerically".into())
            }
        }
    }
}

/// Every expression appearing in a problem, with the sampling domain to use.
pub fn corpus_expressions(pr: &Problem) -> Vec<Expr> {
    let mut out: Vec<Expr> = pr.system.rhs().to_vec();
    for f in &pr.fields {
        out.extend(f.phi.iter().cloned());
    }
    if let Some(s) = &pr.sigma {
        out.extend(s.entries.iter().flatten().cloned());
    }
    if let Some(c) = &pr.change {
        out.extend(c.forward().iter().cloned());
        if let Ok(inv) = c.inverse() {
            out.extend(inv.iter().cloned());
        }
    }
    out.extend(pr.invariants.iter().cloned());
    out.extend(pr.constants.iter().cloned());
    out
}

/// Source rates rebuilt from the adapted system through the inverse map.
pub fn chain_rule_residual(pr: &Problem, adapted: &DynamicalSystem) -> Result<f64, String> {
    let change = pr.change.as_ref().unwrap();
    let source = pr.system.chart().base_chart();
    let target = change.target();
    let fwd: BTreeMap<Symbol, Expr> = target.symbols().into_iter().zip(change.forward().iter().cloned()).collect();
    let inv = change.inverse_map().unwrap();
    let mut worst = 0.0f64;
    for b in source.base_coords() {
        let g = &inv[&b];
        let mut terms = Vec::new();
        for u in target.directions() {
            let rate = match adapted.rhs_of(&u) {
                Some(r) => r.substitute(&fwd),
                None => total_derivative(&fwd[&u], &source, Some(&pr.system)).unwrap(),
            };
            terms.push(&g.differentiate(&u).substitute(&fwd) * &rate);
        }
        let rebuilt = Expr::sum(terms);
        let c = equals_numeric(pr.system.rhs_of(&b).unwrap(), &rebuilt, &pr.domain).map_err(|e| e.to_string())?;
        worst = worst.max(c.residual);
    }
    Ok(worst)
}
