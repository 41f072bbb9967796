//! Vector fields, Lie brackets, distribution rank and involution.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::{Expr, Point, Symbol};
use crate::linalg;
use crate::sample::{equals_numeric, SampleDomain};

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Chart,
    /// Coefficient of the time direction; zero when the chart has no time.
    pub xi: Expr,
    /// Coefficients along the chart's directions (base and parameters).
    pub phi: Vec<Expr>,
    /// Coefficients along the jet directions, present iff the field lives
    /// on a jet chart.
    pub psi: Option<Vec<Expr>>,
}

impl VectorField {
    pub fn new(chart: &Chart, xi: Expr, phi: Vec<Expr>, psi: Option<Vec<Expr>>) -> Result<Self> {
        let dim = chart.dim();
        if phi.len() != dim {
            return Err(Error::SizeMismatch(format!(
                "field has {} base coefficients, chart has {dim} directions",
                phi.len()
            )));
        }
        if !xi.is_zero() && chart.time().is_none() {
            return Err(Error::ChartMismatch("time coefficient on a chart without time".into()));
        }
        match &psi {
            Some(p) if !chart.is_jet_chart() || p.len() != dim => {
                return Err(Error::SizeMismatch(format!(
                    "jet coefficients need a jet chart with {dim} jet symbols"
                )))
            }
            None if chart.is_jet_chart() && !chart.jets().is_empty() => {
                return Err(Error::SizeMismatch("field on a jet chart needs jet coefficients".into()))
            }
            _ => {}
        }
        let f = VectorField {
            chart: chart.clone(),
            xi,
            phi,
            psi,
        };
        for e in f.coefficients() {
            chart.check(e).map_err(|e| match e {
                Error::UnknownSymbol(s) => Error::ChartMismatch(format!("coefficient uses `{s}` outside the chart")),
                other => other,
            })?;
        }
        Ok(f)
    }

    /// `Σ phi^a ∂/∂x^a` on a base chart.
    pub fn vertical(chart: &Chart, phi: Vec<Expr>) -> Result<Self> {
        VectorField::new(chart, Expr::zero(), phi, None)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    /// All coefficients in chart column order: time, directions, jets.
    pub fn coefficients(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        if self.chart.time().is_some() {
            out.push(&self.xi);
        }
        out.extend(self.phi.iter());
        if let Some(p) = &self.psi {
            out.extend(p.iter());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients().iter().all(|e| e.is_zero())
    }

    /// Zero time coefficient and no jet part.
    pub fn is_vertical(&self) -> bool {
        self.xi.is_zero() && self.psi.is_none()
    }

    pub fn depends_on_time(&self) -> bool {
        match self.chart.time() {
            Some(t) => self.coefficients().iter().any(|e| e.contains(&t)),
            None => false,
        }
    }

    /// Drop the jet part, returning a field on the base chart.
    pub fn projection(&self) -> VectorField {
        VectorField {
            chart: self.chart.base_chart(),
            xi: self.xi.clone(),
            phi: self.phi.clone(),
            psi: None,
        }
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            xi: f * &self.xi,
            phi: self.phi.iter().map(|e| f * e).collect(),
            psi: self.psi.as_ref().map(|p| p.iter().map(|e| f * e).collect()),
        }
    }

    /// The directional derivative `X(g)`.
    pub fn apply(&self, g: &Expr) -> Result<Expr> {
        for s in g.free_symbols() {
            if !self.chart.contains(&s) {
                return Err(Error::ChartMismatch(format!("`{s}` is not a coordinate of the field's chart")));
            }
        }
        Ok(self.apply_unchecked(g))
    }

    fn apply_unchecked(&self, g: &Expr) -> Expr {
        let mut terms = Vec::new();
        if let Some(t) = self.chart.time() {
            if !self.xi.is_zero() && g.contains(&t) {
                terms.push(&self.xi * &g.differentiate(&t));
            }
        }
        for (d, c) in self.chart.directions().iter().zip(&self.phi) {
            if !c.is_zero() && g.contains(d) {
                terms.push(c * &g.differentiate(d));
            }
        }
        if let Some(psi) = &self.psi {
            for (d, c) in self.chart.directions().iter().zip(psi) {
                let j = d.dot();
                if !c.is_zero() && g.contains(&j) {
                    terms.push(c * &g.differentiate(&j));
                }
            }
        }
        Expr::sum(terms)
    }

    /// `[X, Y]` with components `X(Y^a) - Y(X^a)`.
    pub fn lie_bracket(&self, other: &VectorField) -> Result<VectorField> {
        if self.chart != other.chart {
            return Err(Error::ChartMismatch("bracket of fields on different charts".into()));
        }
        let comp = |a: &Expr, b: &Expr| &self.apply_unchecked(b) - &other.apply_unchecked(a);
        let xi = comp(&self.xi, &other.xi);
        let phi = self.phi.iter().zip(&other.phi).map(|(a, b)| comp(a, b)).collect();
        let psi = match (&self.psi, &other.psi) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(a, b)| comp(a, b)).collect()),
            _ => None,
        };
        Ok(VectorField {
            chart: self.chart.clone(),
            xi,
            phi,
            psi,
        })
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.coefficients()
            .iter()
            .flat_map(|e| e.free_symbols())
            .collect()
    }

    pub fn evaluate(&self, p: &Point, guard: f64) -> Result<Vec<f64>> {
        self.coefficients()
            .iter()
            .map(|e| e.evaluate_guarded(p, guard))
            .collect()
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(t) = self.chart.time() {
            if !self.xi.is_zero() {
                parts.push(format!("({})∂/∂{t}", self.xi));
            }
        }
        let dirs = self.chart.directions();
        for (d, c) in dirs.iter().zip(&self.phi) {
            if !c.is_zero() {
                parts.push(format!("({c})∂/∂{d}"));
            }
        }
        if let Some(psi) = &self.psi {
            for (d, c) in dirs.iter().zip(psi) {
                if !c.is_zero() {
                    parts.push(format!("({c})∂/∂{}", d.dot()));
                }
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

fn common_chart(fields: &[VectorField]) -> Result<&Chart> {
    let first = fields
        .first()
        .ok_or_else(|| Error::SizeMismatch("empty list of fields".into()))?;
    if fields.iter().any(|f| f.chart != first.chart) {
        return Err(Error::ChartMismatch("fields live on different charts".into()));
    }
    Ok(&first.chart)
}

fn matrix_at(fields: &[VectorField], p: &Point, guard: f64) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = fields.iter().map(|f| f.evaluate(p, guard)).collect::<Result<_>>()?;
    let ncols = rows.first().map(|r| r.len()).unwrap_or(0);
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn symbols_of(fields: &[VectorField]) -> BTreeSet<Symbol> {
    fields.iter().flat_map(|f| f.symbols()).collect()
}

/// Ranks at the sampled points of the fields, in sampling order.
pub fn rank_profile(fields: &[VectorField], domain: &SampleDomain) -> Result<Vec<usize>> {
    common_chart(fields)?;
    let syms = symbols_of(fields);
    let count = if syms.is_empty() { 1 } else { domain.count };
    let samples = domain.sample(&syms, count, |p| Ok(linalg::rank(&matrix_at(fields, p, domain.guard)?)))?;
    Ok(samples.into_iter().map(|(_, r)| r).collect())
}

/// Rank of the distribution spanned by `fields`, required constant over the
/// sampled box.
pub fn distribution_rank(fields: &[VectorField], domain: &SampleDomain) -> Result<usize> {
    let profile = rank_profile(fields, domain)?;
    let distinct: BTreeSet<usize> = profile.iter().copied().collect();
    if distinct.len() > 1 {
        return Err(Error::NonConstantRank(distinct.into_iter().collect()));
    }
    Ok(profile[0])
}

/// Express `target` as `Σ c_j v_j` with symbolic coefficients. Picks a square
/// set of components with structurally non-zero determinant (constant
/// determinants first), solves by Cramer's rule, then certifies every
/// component numerically. `None` when no certified solution was found.
pub fn symbolic_combination(
    vectors: &[Vec<Expr>],
    target: &[Expr],
    domain: &SampleDomain,
) -> Result<Option<Vec<Expr>>> {
    let s = vectors.len();
    if s == 0 {
        let all_zero = target.iter().all(Expr::is_zero);
        return Ok(if all_zero { Some(vec![]) } else { None });
    }
    let m = target.len();
    if s > m {
        return Ok(None);
    }
    let mut candidates = Vec::new();
    for rows in combinations(m, s) {
        let a: Vec<Vec<Expr>> = rows
            .iter()
            .map(|&r| vectors.iter().map(|v| v[r].clone()).collect())
            .collect();
        let d = linalg::det(&a);
        if d.is_zero() {
            continue;
        }
        let constant = d.as_const().is_some();
        candidates.push((!constant, d.size(), rows, a));
    }
    candidates.sort_by_key(|x| (x.0, x.1));
    for (_, _, rows, a) in candidates.into_iter().take(4) {
        let b: Vec<Expr> = rows.iter().map(|&r| target[r].clone()).collect();
        let c = match linalg::cramer(&a, &b) {
            Some(c) => c,
            None => continue,
        };
        let mut pairs = Vec::with_capacity(m);
        for r in 0..m {
            let combo = Expr::sum(vectors.iter().zip(&c).map(|(v, ci)| ci * &v[r]));
            pairs.push((target[r].clone(), combo));
        }
        match domain.max_residual(&pairs) {
            Ok(cmp) if cmp.equal => return Ok(Some(c)),
            Ok(_) => continue,
            Err(Error::InsufficientSamples { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

fn combinations(m: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(s);
    fn rec(start: usize, m: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, s, cur, out);
            cur.pop();
        }
    }
    rec(0, m, s, &mut cur, &mut out);
    out
}

/// Fitted coefficients at each sample point.
pub type PointFits = Vec<(Point, Vec<f64>)>;

/// Pointwise least-squares fit of `target ≈ Σ c_j v_j`; returns the largest
/// normalized residual and the fitted coefficients at each point.
pub fn numeric_combination(
    vectors: &[Vec<Expr>],
    target: &[Expr],
    domain: &SampleDomain,
) -> Result<(f64, PointFits)> {
    let syms: BTreeSet<Symbol> = vectors
        .iter()
        .flatten()
        .chain(target)
        .flat_map(|e| e.free_symbols())
        .collect();
    let count = if syms.is_empty() { 1 } else { domain.count };
    let guard = domain.guard;
    let samples = domain.sample(&syms, count, |p| {
        let m = target.len();
        let a = DMatrix::from_fn(m, vectors.len(), |i, j| vectors[j][i].evaluate_guarded(p, guard).unwrap_or(f64::NAN));
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("singular coefficient".into()));
        }
        let b = target
            .iter()
            .map(|e| e.evaluate_guarded(p, guard))
            .collect::<Result<Vec<f64>>>()?;
        let (x, r) = linalg::lstsq(&a, &DVector::from_vec(b));
        Ok((r, x.iter().copied().collect::<Vec<f64>>()))
    })?;
    let worst = samples.iter().map(|(_, (r, _))| *r).fold(0.0, f64::max);
    Ok((worst, samples.into_iter().map(|(p, (_, x))| (p, x)).collect()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvolutionReport {
    pub success: bool,
    /// `mu[i][j][k]`: coefficient of `X_k` in `[X_i, X_j]`, when an exact
    /// symbolic solution was certified for every pair.
    pub mu: Option<Vec<Vec<Vec<Expr>>>>,
    pub residual: f64,
    pub rank: usize,
}

fn components(f: &VectorField) -> Vec<Expr> {
    f.coefficients().into_iter().cloned().collect()
}

/// Check `[X_i, X_j] = μ^k_ij X_k` for every pair.
pub fn involution_check(fields: &[VectorField], domain: &SampleDomain) -> Result<InvolutionReport> {
    common_chart(fields)?;
    let rank = distribution_rank(fields, domain)?;
    let s = fields.len();
    let vectors: Vec<Vec<Expr>> = fields.iter().map(components).collect();
    let zero_row = vec![vec![Expr::zero(); s]; s];
    let mut mu: Option<Vec<Vec<Vec<Expr>>>> = if rank == s { Some(vec![zero_row; s]) } else { None };
    let mut residual = 0.0f64;
    for i in 0..s {
        for j in (i + 1)..s {
            let b = fields[i].lie_bracket(&fields[j])?;
            if b.is_zero() {
                continue;
            }
            let target = components(&b);
            if let Some(m) = mu.as_mut() {
                if let Some(c) = symbolic_combination(&vectors, &target, domain)? {
                    for k in 0..s {
                        m[i][j][k] = c[k].clone();
                        m[j][i][k] = -c[k].clone();
                    }
                    continue;
                }
            }
            mu = None;
            let (r, _) = numeric_combination(&vectors, &target, domain)?;
            residual = residual.max(r);
            if r >= domain.tolerance {
                return Err(Error::NotInInvolution { i, j, residual: r });
            }
        }
    }
    Ok(InvolutionReport {
        success: true,
        mu,
        residual,
        rank,
    })
}

/// True when `f` lies in the pointwise span of `fields` at every sample.
pub fn in_span(fields: &[VectorField], f: &VectorField, domain: &SampleDomain) -> Result<(bool, f64)> {
    let vectors: Vec<Vec<Expr>> = fields.iter().map(components).collect();
    let target = components(f);
    if f.is_zero() {
        return Ok((true, 0.0));
    }
    let (r, _) = numeric_combination(&vectors, &target, domain)?;
    Ok((r < domain.tolerance, r))
}

/// Whether two fields agree componentwise up to sampling.
pub fn fields_equal(a: &VectorField, b: &VectorField, domain: &SampleDomain) -> Result<(bool, f64)> {
    if a.chart != b.chart {
        return Err(Error::ChartMismatch("comparing fields on different charts".into()));
    }
    let pairs: Vec<(Expr, Expr)> = components(a).into_iter().zip(components(b)).collect();
    let c = domain.max_residual(&pairs)?;
    Ok((c.equal, c.residual))
}

/// Sampled test that `X(g) = 0`.
pub fn annihilates(f: &VectorField, g: &Expr, domain: &SampleDomain) -> Result<(bool, f64)> {
    let xg = f.apply(g)?;
    let c = equals_numeric(&Expr::zero(), &xg, domain)?;
    Ok((c.equal, c.residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vf(chart: &Chart, phi: &[&str]) -> VectorField {
        VectorField::vertical(chart, phi.iter().map(|s| chart.parse(s).unwrap()).collect()).unwrap()
    }

    #[test]
    fn apply_examples() {
        let c = Chart::base(&["x", "y", "z"]);
        let dz = vf(&c, &["0", "0", "1"]);
        assert_eq!(dz.apply(&c.parse("x + z^2").unwrap()).unwrap(), c.parse("2*z").unwrap());
        let x = vf(&c, &["x", "-y", "z"]);
        assert!(x.apply(&c.parse("x*y").unwrap()).unwrap().is_zero());
        assert!(matches!(dz.apply(&crate::parse("w").unwrap()), Err(Error::ChartMismatch(_))));
    }

    #[test]
    fn bracket_of_translations_vanishes() {
        let c = Chart::base(&["x", "y", "z"]);
        let b = vf(&c, &["0", "1", "0"]).lie_bracket(&vf(&c, &["0", "0", "1"])).unwrap();
        assert!(b.is_zero());
    }

    #[test]
    fn bracket_with_dynamics_is_multiple_of_second_field() {
        let c = Chart::base(&["x", "y", "z", "w"]);
        let x1 = vf(&c, &["1", "0", "0", "0"]);
        let x0 = vf(&c, &["y*z", "z*(z + x*y)", "z*(w + x*z)", "z*(y + x*w)"]);
        let x2 = vf(&c, &["0", "y", "z", "w"]);
        let b = x1.lie_bracket(&x0).unwrap();
        assert_eq!(b, x2.scale(&c.parse("z").unwrap()));
    }

    #[test]
    fn ranks() {
        let c = Chart::base(&["x", "y", "z"]);
        let d = SampleDomain::default();
        assert_eq!(distribution_rank(&[vf(&c, &["0", "1", "0"]), vf(&c, &["0", "0", "1"])], &d).unwrap(), 2);
        assert_eq!(distribution_rank(&[vf(&c, &["x", "-y", "z"])], &d).unwrap(), 1);
        let d = d.with_bounds("x", -1.0, 1.0);
        let r = distribution_rank(&[vf(&c, &["1", "0", "0"]), vf(&c, &["x", "0", "0"]), vf(&c, &["0", "x", "0"])], &d);
        assert_eq!(r.unwrap(), 2);
    }

    #[test]
    fn involution_of_non_abelian_pair() {
        let c = Chart::base(&["x", "y"]);
        let d = SampleDomain::default();
        let rep = involution_check(&[vf(&c, &["1", "0"]), vf(&c, &["x", "y"])], &d).unwrap();
        let mu = rep.mu.unwrap();
        assert_eq!(mu[0][1], vec![Expr::one(), Expr::zero()]);
        assert_eq!(mu[1][0], vec![Expr::int(-1), Expr::zero()]);
        let fail = involution_check(&[vf(&c, &["1", "0"]), vf(&c, &["0", "x"])], &d);
        assert!(fail.is_ok());
        let c3 = Chart::base(&["x", "y", "z"]);
        let fail = involution_check(&[vf(&c3, &["1", "0", "0"]), vf(&c3, &["0", "1", "x"])], &d);
        assert!(matches!(fail, Err(Error::NotInInvolution { i: 0, j: 1, .. })));
    }
}
