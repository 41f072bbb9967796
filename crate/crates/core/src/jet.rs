//! Dynamical systems, total derivatives and σ-prolongation on the first jet
//! space.

use std::collections::BTreeMap;
use std::fmt;

use crate::chart::{Chart, Role};
use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol};
use crate::field::{annihilates, VectorField};
use crate::sample::SampleDomain;

/// `dx^a/dt = f^a(x)` for every base coordinate of the chart.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicalSystem {
    chart: Chart,
    rhs: Vec<Expr>,
}

impl DynamicalSystem {
    /// `chart` must not contain jet symbols. The right-hand sides may use
    /// base coordinates, parameters, time, and jets of parameters.
    pub fn new(chart: Chart, rhs: Vec<Expr>) -> Result<Self> {
        if !chart.jets().is_empty() {
            return Err(Error::InvalidChart("system chart must not contain jet symbols".into()));
        }
        let base = chart.base_coords();
        if rhs.len() != base.len() {
            return Err(Error::SizeMismatch(format!(
                "{} right-hand sides for {} base coordinates",
                rhs.len(),
                base.len()
            )));
        }
        let param_jets: Vec<Symbol> = chart.parameters().iter().map(Symbol::dot).collect();
        for e in &rhs {
            for s in e.free_symbols() {
                if !chart.contains(&s) && !param_jets.contains(&s) {
                    return Err(Error::UnknownSymbol(s.name().to_string()));
                }
            }
        }
        Ok(DynamicalSystem { chart, rhs })
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rhs(&self) -> &[Expr] {
        &self.rhs
    }

    pub fn rhs_of(&self, s: &Symbol) -> Option<&Expr> {
        self.chart
            .base_coords()
            .iter()
            .position(|b| b == s)
            .map(|i| &self.rhs[i])
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_autonomous(&self) -> bool {
        match self.chart.time() {
            Some(t) => !self.rhs.iter().any(|e| e.contains(&t)),
            None => true,
        }
    }

    pub fn has_parameters(&self) -> bool {
        !self.chart.parameters().is_empty()
    }

    /// Bindings `x^a' -> f^a` for the base coordinates.
    pub fn restriction(&self) -> BTreeMap<Symbol, Expr> {
        self.chart
            .base_coords()
            .iter()
            .zip(&self.rhs)
            .map(|(s, f)| (s.dot(), f.clone()))
            .collect()
    }

    /// Restrict a jet expression to the solutions by `x^a' -> f^a`.
    pub fn restrict(&self, e: &Expr) -> Expr {
        e.substitute(&self.restriction())
    }

    /// The field `X_0 = f^a ∂/∂x^a` on the base chart.
    pub fn dynamics_field(&self) -> Result<VectorField> {
        let base = self.chart.base_coords();
        let phi = self
            .chart
            .directions()
            .iter()
            .map(|d| match base.iter().position(|b| b == d) {
                Some(i) => self.rhs[i].clone(),
                None => Expr::zero(),
            })
            .collect();
        VectorField::vertical(&self.chart, phi)
    }

    /// Replace the time symbol by a new base coordinate with `ẋ_0 = 1`.
    pub fn autonomize(&self) -> Result<DynamicalSystem> {
        if self.is_autonomous() {
            return Err(Error::AlreadyAutonomous);
        }
        let t = self.chart.time().expect("non-autonomous system has a time symbol");
        let mut name = "x0".to_string();
        while self.chart.contains(&Symbol::new(&name)) || self.chart.contains(&Symbol::new(&format!("{name}'"))) {
            name.push('_');
        }
        let x0 = Symbol::new(&name);
        let mut entries = vec![(x0.clone(), Role::Base)];
        entries.extend(
            self.chart
                .entries()
                .iter()
                .filter(|(_, r)| *r != Role::Time)
                .cloned(),
        );
        let chart = Chart::new(entries)?;
        let bind: BTreeMap<Symbol, Expr> = [(t, Expr::Var(x0))].into();
        let mut rhs = vec![Expr::one()];
        rhs.extend(self.rhs.iter().map(|e| e.substitute(&bind)));
        DynamicalSystem::new(chart, rhs)
    }
}

impl fmt::Display for DynamicalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, e)) in self.chart.base_coords().iter().zip(&self.rhs).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{s}' = {e}")?;
        }
        Ok(())
    }
}

/// Square matrix of expressions on the jet chart, one row per field.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaMatrix {
    pub entries: Vec<Vec<Expr>>,
}

impl SigmaMatrix {
    pub fn new(entries: Vec<Vec<Expr>>) -> Result<Self> {
        let s = entries.len();
        if entries.iter().any(|r| r.len() != s) {
            return Err(Error::SizeMismatch("sigma must be square".into()));
        }
        Ok(SigmaMatrix { entries })
    }

    pub fn zero(s: usize) -> Self {
        SigmaMatrix {
            entries: vec![vec![Expr::zero(); s]; s],
        }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i][j]
    }

    pub fn restricted(&self, sys: &DynamicalSystem) -> SigmaMatrix {
        SigmaMatrix {
            entries: self
                .entries
                .iter()
                .map(|r| r.iter().map(|e| sys.restrict(e)).collect())
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(Expr::is_zero)
    }
}

impl fmt::Display for SigmaMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .iter()
            .map(|r| format!("[{}]", r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Total time derivative `D_t g = ∂g/∂t + Σ x' ∂g/∂x` over every direction of
/// `chart`.
///
/// Without a system, `g` must not contain jet symbols (only first-order jets
/// are modelled). With a system the result is restricted to the solutions:
/// `g` is restricted first and base jets are replaced by the right-hand sides;
/// jets of parameters remain.
pub fn total_derivative(g: &Expr, chart: &Chart, sys: Option<&DynamicalSystem>) -> Result<Expr> {
    let g = match sys {
        Some(s) => s.restrict(g),
        None => g.clone(),
    };
    let jets: Vec<Symbol> = chart.directions().iter().map(Symbol::dot).collect();
    if g.contains_any(&jets) {
        return Err(Error::OrderOverflow);
    }
    let mut terms = Vec::new();
    if let Some(t) = chart.time() {
        terms.push(g.differentiate(&t));
    }
    for d in chart.directions() {
        if !g.contains(&d) {
            continue;
        }
        let rate = match sys.and_then(|s| s.rhs_of(&d)) {
            Some(f) => f.clone(),
            None => Expr::Var(d.dot()),
        };
        terms.push(&rate * &g.differentiate(&d));
    }
    Ok(Expr::sum(terms))
}

/// σ-prolongation: each field gains jet coefficients
/// `ψ^a_i = (D_t φ^a_i - x^a' D_t ξ_i) + σ_ij (φ^a_j - x^a' ξ_j)`.
pub fn sigma_prolong(fields: &[VectorField], sigma: &SigmaMatrix) -> Result<Vec<VectorField>> {
    if fields.len() != sigma.size() {
        return Err(Error::SizeMismatch(format!(
            "{} fields but sigma is {}x{}",
            fields.len(),
            sigma.size(),
            sigma.size()
        )));
    }
    let chart = match fields.first() {
        Some(f) => f.chart().clone(),
        None => return Ok(vec![]),
    };
    if fields.iter().any(|f| f.chart() != &chart || f.psi.is_some()) {
        return Err(Error::ChartMismatch("sigma_prolong needs fields on one base chart".into()));
    }
    let jet_chart = chart.jet_chart();
    for e in sigma.entries.iter().flatten() {
        jet_chart.check(e)?;
    }
    let dirs = chart.directions();
    let dt_xi: Vec<Expr> = fields
        .iter()
        .map(|f| total_derivative(&f.xi, &chart, None))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(fields.len());
    for (i, fi) in fields.iter().enumerate() {
        let mut psi = Vec::with_capacity(dirs.len());
        for (a, d) in dirs.iter().enumerate() {
            let dot = Expr::Var(d.dot());
            let mut terms = vec![total_derivative(&fi.phi[a], &chart, None)?, -(&dot * &dt_xi[i])];
            for (j, fj) in fields.iter().enumerate() {
                let s = sigma.get(i, j);
                if s.is_zero() {
                    continue;
                }
                let inner = &fj.phi[a] - &(&dot * &fj.xi);
                terms.push(s * &inner);
            }
            psi.push(Expr::sum(terms));
        }
        out.push(VectorField::new(&jet_chart, fi.xi.clone(), fi.phi.clone(), Some(psi))?);
    }
    Ok(out)
}

/// `Θ = D_t z1 / D_t z2`; with `z2 = t` this is `D_t z1`.
pub fn derived_invariant(z1: &Expr, z2: &Expr, chart: &Chart) -> Result<Expr> {
    let num = total_derivative(z1, chart, None)?;
    let den = total_derivative(z2, chart, None)?;
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(&num * &den.recip())
}

/// Sampled test that every field annihilates `g`; the residual is the
/// largest `|Y_i(g)|` seen.
pub fn verify_invariant(fields: &[VectorField], g: &Expr, domain: &SampleDomain) -> Result<(bool, f64)> {
    let mut ok = true;
    let mut worst = 0.0f64;
    for f in fields {
        let (pass, r) = annihilates(f, g, domain)?;
        ok &= pass;
        worst = worst.max(r);
    }
    Ok((ok, worst))
}
