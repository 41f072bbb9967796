//! σ-symmetry verification, the determining equations for σ, the
//! constructor for standard symmetries with constant structure, and
//! completion of prolonged sets to an involutive family.

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol};
use crate::field::{
    distribution_rank, in_span, numeric_combination, symbolic_combination, VectorField,
};
use crate::jet::{sigma_prolong, DynamicalSystem, SigmaMatrix};
use crate::sample::SampleDomain;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `[X_i, X_0] = σ̄_ij X_j` on the solutions.
    Strict,
    /// As strict, but `[X_i, X_0]` may also have a component along `X_0`.
    Orbital,
    /// The prolonged invariance identity must hold on the whole jet space.
    Strong,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Fail,
    Orbital,
    OnSolutions,
    Strong,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self != Verdict::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::Fail => "fail",
            Verdict::Orbital => "orbital",
            Verdict::OnSolutions => "on-solutions",
            Verdict::Strong => "strong",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub verdict: Verdict,
    /// `residuals[i][a]`: largest defect of field `i` in component `a`.
    pub residuals: Vec<Vec<f64>>,
    pub max_residual: f64,
    /// Largest defect of the unrestricted (strong) identity.
    pub strong_residual: f64,
    /// σ restricted to the solutions.
    pub sigma_bar: SigmaMatrix,
    /// Coefficients of `X_0` in `[X_i, X_0]` for orbital symmetries.
    pub orbital: Option<Vec<Expr>>,
}

fn require_vertical(fields: &[VectorField]) -> Result<()> {
    for (i, f) in fields.iter().enumerate() {
        if !f.is_vertical() || f.depends_on_time() {
            return Err(Error::NonVerticalField(i));
        }
    }
    Ok(())
}

fn require_autonomous(sys: &DynamicalSystem) -> Result<()> {
    if !sys.is_autonomous() {
        return Err(Error::Problem("system is not autonomous; autonomize it first".into()));
    }
    Ok(())
}

fn components(f: &VectorField) -> Vec<Expr> {
    f.phi.clone()
}

/// Componentwise defects `d_i^a`, one list per field, and the largest.
fn defects(domain: &SampleDomain, rows: &[Vec<Expr>]) -> Result<(Vec<Vec<f64>>, f64)> {
    let mut out = Vec::with_capacity(rows.len());
    let mut worst = 0.0f64;
    for row in rows {
        let mut rr = Vec::with_capacity(row.len());
        for e in row {
            let r = if e.is_zero() {
                0.0
            } else {
                domain.max_residual(&[(Expr::zero(), e.clone())])?.residual
            };
            worst = worst.max(r);
            rr.push(r);
        }
        out.push(rr);
    }
    Ok((out, worst))
}

/// `Y_i(x^a' - f^a)` for every prolonged field and base coordinate.
fn jet_defects(sys: &DynamicalSystem, prolonged: &[VectorField]) -> Result<Vec<Vec<Expr>>> {
    let base = sys.chart().base_coords();
    prolonged
        .iter()
        .map(|y| {
            base.iter()
                .zip(sys.rhs())
                .map(|(b, f)| y.apply(&(&Expr::Var(b.dot()) - f)))
                .collect()
        })
        .collect()
}

/// Verify that `fields` are σ-symmetries of `sys`.
///
/// The on-solutions test is `[X_i, X_0] = σ̄_ij X_j` (or, in orbital mode,
/// `[X_i, X_0] = σ_i0 X_0 + σ̄_ij X_j` with `σ_i0` found by the checker).
/// Systems with parameters use the equivalent jet form
/// `Y_i(x^a' - f^a) = 0` on the solutions. The strong test is the same jet
/// identity without restriction.
pub fn check_sigma_symmetry(
    sys: &DynamicalSystem,
    fields: &[VectorField],
    sigma: &SigmaMatrix,
    mode: Mode,
    domain: &SampleDomain,
) -> Result<SymmetryReport> {
    require_vertical(fields)?;
    require_autonomous(sys)?;
    if fields.len() != sigma.size() {
        return Err(Error::SizeMismatch(format!(
            "{} fields but sigma is {}x{}",
            fields.len(),
            sigma.size(),
            sigma.size()
        )));
    }
    let sigma_bar = sigma.restricted(sys);
    let prolonged = sigma_prolong(fields, sigma)?;
    let strong_rows = jet_defects(sys, &prolonged)?;
    let (_, strong_residual) = defects(domain, &strong_rows)?;

    let mut orbital = None;
    let (residuals, max_residual) = if sys.has_parameters() {
        let restricted: Vec<Vec<Expr>> = strong_rows
            .iter()
            .map(|r| r.iter().map(|e| sys.restrict(e)).collect())
            .collect();
        defects(domain, &restricted)?
    } else {
        let x0 = sys.dynamics_field()?;
        let rows = bracket_defects(&x0, fields, &sigma_bar)?;
        let (res, worst) = defects(domain, &rows)?;
        if worst >= domain.tolerance && mode == Mode::Orbital {
            let x0c = components(&x0);
            let mut coeffs = Vec::with_capacity(fields.len());
            let mut ok = true;
            for row in &rows {
                match symbolic_combination(std::slice::from_ref(&x0c), row, domain)? {
                    Some(c) => coeffs.push(c[0].clone()),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let fitted: Vec<Vec<Expr>> = rows
                    .iter()
                    .zip(&coeffs)
                    .map(|(row, c)| row.iter().zip(&x0c).map(|(r, x)| r - &(c * x)).collect())
                    .collect();
                let (res_o, worst_o) = defects(domain, &fitted)?;
                orbital = Some(coeffs);
                (res_o, worst_o)
            } else {
                (res, worst)
            }
        } else {
            (res, worst)
        }
    };

    let on_solutions = max_residual < domain.tolerance;
    let verdict = match (&orbital, on_solutions) {
        (_, false) => Verdict::Fail,
        (Some(_), true) => Verdict::Orbital,
        (None, true) if strong_residual < domain.tolerance => Verdict::Strong,
        (None, true) => Verdict::OnSolutions,
    };
    let verdict = if mode == Mode::Strong && verdict != Verdict::Strong {
        Verdict::Fail
    } else {
        verdict
    };
    Ok(SymmetryReport {
        verdict,
        residuals,
        max_residual,
        strong_residual,
        sigma_bar,
        orbital,
    })
}

/// `[X_i, X_0] - σ̄_ij X_j` for each field.
fn bracket_defects(x0: &VectorField, fields: &[VectorField], sigma_bar: &SigmaMatrix) -> Result<Vec<Vec<Expr>>> {
    let mut rows = Vec::with_capacity(fields.len());
    for (i, xi) in fields.iter().enumerate() {
        let b = xi.lie_bracket(x0)?;
        let row = (0..b.phi.len())
            .map(|a| {
                let span = Expr::sum(
                    fields
                        .iter()
                        .enumerate()
                        .map(|(j, xj)| sigma_bar.get(i, j) * &xj.phi[a]),
                );
                &b.phi[a] - &span
            })
            .collect();
        rows.push(row);
    }
    Ok(rows)
}

/// Solve `σ̄_ij φ^a_j = [X_i, X_0]^a` for the restricted σ.
pub fn solve_sigma(sys: &DynamicalSystem, fields: &[VectorField], domain: &SampleDomain) -> Result<SigmaMatrix> {
    require_vertical(fields)?;
    require_autonomous(sys)?;
    if sys.has_parameters() {
        return Err(Error::Problem(
            "solve_sigma needs a closed system; supply sigma for systems with parameters".into(),
        ));
    }
    let rank = distribution_rank(fields, domain)?;
    if rank < fields.len() {
        return Err(Error::RankDeficient);
    }
    let x0 = sys.dynamics_field()?;
    let vectors: Vec<Vec<Expr>> = fields.iter().map(components).collect();
    let mut entries = Vec::with_capacity(fields.len());
    for xi in fields {
        let target = components(&xi.lie_bracket(&x0)?);
        match symbolic_combination(&vectors, &target, domain)? {
            Some(row) => entries.push(row),
            None => {
                let (r, _) = numeric_combination(&vectors, &target, domain)?;
                return Err(Error::NoSolution(r));
            }
        }
    }
    SigmaMatrix::new(entries)
}

/// The system `f = F - α_k X_k` whose standard symmetries the constructor
/// starts from.
pub fn simplified_system(sys: &DynamicalSystem, fields: &[VectorField], alphas: &[Expr]) -> Result<DynamicalSystem> {
    if alphas.len() != fields.len() {
        return Err(Error::SizeMismatch(format!("{} alphas for {} fields", alphas.len(), fields.len())));
    }
    let dirs = sys.chart().directions();
    let mut rhs = Vec::with_capacity(sys.rhs().len());
    for b in sys.chart().base_coords() {
        let a = dirs.iter().position(|d| *d == b).expect("base coordinate is a direction");
        let mut terms = vec![sys.rhs_of(&b).cloned().unwrap_or_else(Expr::zero)];
        for (f, al) in fields.iter().zip(alphas) {
            terms.push(-(al * &f.phi[a]));
        }
        rhs.push(Expr::sum(terms));
    }
    DynamicalSystem::new(sys.chart().clone(), rhs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Theorem4Result {
    pub sigma: SigmaMatrix,
    /// `beta[i][j][k]`: coefficient of `X_k` in `[X_i, X_j]`.
    pub beta: Vec<Vec<Vec<BigRational>>>,
    /// Largest defect of the compatibility identity satisfied by σ.
    pub identity_residual: f64,
}

/// Constant structure constants of a family of fields.
pub fn structure_constants(fields: &[VectorField], domain: &SampleDomain) -> Result<Vec<Vec<Vec<BigRational>>>> {
    let s = fields.len();
    let zero = BigRational::from_integer(0.into());
    let mut beta = vec![vec![vec![zero; s]; s]; s];
    let vectors: Vec<Vec<Expr>> = fields.iter().map(|f| f.coefficients().into_iter().cloned().collect()).collect();
    for i in 0..s {
        for j in (i + 1)..s {
            let b = fields[i].lie_bracket(&fields[j])?;
            if b.is_zero() {
                continue;
            }
            let target: Vec<Expr> = b.coefficients().into_iter().cloned().collect();
            let coeffs = symbolic_combination(&vectors, &target, domain)?;
            let consts: Option<Vec<BigRational>> = coeffs
                .as_ref()
                .and_then(|c| c.iter().map(|e| e.as_const().cloned()).collect());
            match consts {
                Some(c) => {
                    for k in 0..s {
                        beta[i][j][k] = c[k].clone();
                        beta[j][i][k] = -c[k].clone();
                    }
                }
                None => {
                    let probe = domain.clone().with_count(16);
                    let (r, pts) = numeric_combination(&vectors, &target, &probe)?;
                    if r >= domain.tolerance {
                        return Err(Error::NotInInvolution { i, j, residual: r });
                    }
                    let mut spread = 0.0f64;
                    for k in 0..s {
                        let vals: Vec<f64> = pts.iter().map(|(_, x)| x[k]).collect();
                        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                        spread = spread.max(hi - lo);
                    }
                    return Err(Error::NonConstantStructure(spread));
                }
            }
        }
    }
    Ok(beta)
}

/// Build σ for standard symmetries with constant structure constants:
/// `σ_ij = α_k β^j_ik + X_i(α_j)`, where `[X_i, X_k] = β^j_ik X_j`.
pub fn theorem4_sigma(
    sys: &DynamicalSystem,
    fields: &[VectorField],
    alphas: &[Expr],
    domain: &SampleDomain,
) -> Result<Theorem4Result> {
    require_vertical(fields)?;
    require_autonomous(sys)?;
    let s = fields.len();
    if alphas.len() != s {
        return Err(Error::SizeMismatch(format!("{} alphas for {s} fields", alphas.len())));
    }
    let x0 = sys.dynamics_field()?;
    for (i, f) in fields.iter().enumerate() {
        let b = f.lie_bracket(&x0)?;
        let pairs: Vec<(Expr, Expr)> = b.phi.iter().map(|c| (Expr::zero(), c.clone())).collect();
        let cmp = domain.max_residual(&pairs)?;
        if !cmp.equal {
            return Err(Error::NotStandardSymmetry(i, cmp.residual));
        }
    }
    let beta = structure_constants(fields, domain)?;
    let mut entries = vec![vec![Expr::zero(); s]; s];
    for i in 0..s {
        for j in 0..s {
            let mut terms = vec![fields[i].apply(&alphas[j])?];
            for k in 0..s {
                let b = &beta[i][k][j];
                if *b != BigRational::from_integer(0.into()) {
                    terms.push(alphas[k].scale(b.clone()));
                }
            }
            entries[i][j] = Expr::sum(terms);
        }
    }
    let sigma = SigmaMatrix::new(entries)?;
    let identity_residual = compatibility_residual(fields, &sigma, &beta, domain)?;
    Ok(Theorem4Result {
        sigma,
        beta,
        identity_residual,
    })
}

/// Largest defect of
/// `X_i(σ_jk) - X_j(σ_ik) + σ_im β^k_mj - σ_jm β^k_mi - β^m_ij σ_mk = 0`.
#[allow(clippy::needless_range_loop)]
pub fn compatibility_residual(
    fields: &[VectorField],
    sigma: &SigmaMatrix,
    beta: &[Vec<Vec<BigRational>>],
    domain: &SampleDomain,
) -> Result<f64> {
    let s = fields.len();
    let zero = BigRational::from_integer(0.into());
    let mut pairs = Vec::new();
    for i in 0..s {
        for j in 0..s {
            for k in 0..s {
                let mut terms = vec![
                    fields[i].apply(sigma.get(j, k))?,
                    -fields[j].apply(sigma.get(i, k))?,
                ];
                for m in 0..s {
                    if beta[m][j][k] != zero {
                        terms.push(sigma.get(i, m).scale(beta[m][j][k].clone()));
                    }
                    if beta[m][i][k] != zero {
                        terms.push(sigma.get(j, m).scale(-beta[m][i][k].clone()));
                    }
                    if beta[i][j][m] != zero {
                        terms.push(sigma.get(m, k).scale(-beta[i][j][m].clone()));
                    }
                }
                let e = Expr::sum(terms);
                if !e.is_zero() {
                    pairs.push((Expr::zero(), e));
                }
            }
        }
    }
    if pairs.is_empty() {
        return Ok(0.0);
    }
    Ok(domain.max_residual(&pairs)?.residual)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompletionResult {
    pub original: Vec<VectorField>,
    pub added: Vec<VectorField>,
    pub r0: usize,
    pub r: usize,
    pub delta: usize,
    pub theta: usize,
    pub kappa0: usize,
    /// Largest `|[Y_i, Y_m]|` between original and added generators.
    pub commute_residual: f64,
}

impl CompletionResult {
    pub fn fields(&self) -> Vec<VectorField> {
        self.original.iter().chain(&self.added).cloned().collect()
    }
}

/// Close a set of prolonged fields under brackets. Pairs are scanned in
/// lexicographic order; the first bracket outside the current span is
/// appended and the scan restarts.
pub fn complete_prolonged_set(
    prolonged: &[VectorField],
    domain: &SampleDomain,
    max_new: usize,
) -> Result<CompletionResult> {
    let first = prolonged
        .first()
        .ok_or_else(|| Error::SizeMismatch("empty list of fields".into()))?;
    if first.psi.is_none() {
        return Err(Error::ChartMismatch("completion needs prolonged fields on a jet chart".into()));
    }
    let n = first.chart().dim();
    let mut gens: Vec<VectorField> = prolonged.to_vec();
    let mut added: Vec<VectorField> = Vec::new();
    'outer: loop {
        for i in 0..gens.len() {
            for j in (i + 1)..gens.len() {
                let b = gens[i].lie_bracket(&gens[j])?;
                if b.is_zero() || in_span(&gens, &b, domain)?.0 {
                    continue;
                }
                if !b.xi.is_zero() || b.phi.iter().any(|e| !e.is_zero()) {
                    return Err(Error::NonVerticalCompletion);
                }
                if added.len() >= max_new {
                    return Err(Error::CompletionOverflow(max_new));
                }
                added.push(b.clone());
                gens.push(b);
                continue 'outer;
            }
        }
        break;
    }
    let mut commute_residual = 0.0f64;
    for y in prolonged {
        for m in &added {
            let b = y.lie_bracket(m)?;
            if b.is_zero() {
                continue;
            }
            let pairs: Vec<(Expr, Expr)> = b.coefficients().into_iter().map(|c| (Expr::zero(), c.clone())).collect();
            commute_residual = commute_residual.max(domain.max_residual(&pairs)?.residual);
        }
    }
    let projections: Vec<VectorField> = prolonged.iter().map(VectorField::projection).collect();
    let r0 = distribution_rank(&projections, domain)?;
    let r = distribution_rank(&gens, domain)?;
    let delta = r.saturating_sub(r0);
    if delta > r0 || r >= 2 * n.max(1) {
        return Err(Error::CompletionOverflow(added.len()));
    }
    Ok(CompletionResult {
        original: prolonged.to_vec(),
        added,
        r0,
        r,
        delta,
        theta: r0 - delta,
        kappa0: n - r0,
        commute_residual,
    })
}

/// `[X]_S`: the vertical field with coefficients `φ^a - ξ f^a`.
pub fn evolutionary_representative(x: &VectorField, sys: &DynamicalSystem) -> Result<VectorField> {
    if x.xi.is_zero() {
        return Ok(x.clone());
    }
    let dirs: Vec<Symbol> = x.chart().directions();
    let phi = dirs
        .iter()
        .zip(&x.phi)
        .map(|(d, p)| match sys.rhs_of(d) {
            Some(f) => p - &(&x.xi * f),
            None => p.clone(),
        })
        .collect();
    VectorField::new(x.chart(), Expr::zero(), phi, x.psi.clone())
}
