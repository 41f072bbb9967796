//! Symmetry-adapted coordinates, reduced systems and reconstruction
//! equations, rectified form of prolonged fields, constants of motion.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::FromPrimitive;

use crate::chart::{Chart, Role};
use crate::error::{Error, Result};
use crate::expr::{Expr, Point, Symbol};
use crate::field::VectorField;
use crate::jet::{total_derivative, verify_invariant, DynamicalSystem, SigmaMatrix};
use crate::linalg;
use crate::sample::{Rng, SampleDomain};

/// Fixings of the invariant block and complementary draws per fixing used to
/// certify that an expression does not depend on the complementary block.
pub const LEAKAGE_FIXINGS: usize = 32;
pub const LEAKAGE_DRAWS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateChange {
    source: Chart,
    target: Chart,
    invariants: Vec<Symbol>,
    complementary: Vec<Symbol>,
    /// One expression per target symbol, over the source chart.
    forward: Vec<Expr>,
    /// One expression per source direction, over the target chart.
    inverse: Option<Vec<Expr>>,
}

impl CoordinateChange {
    /// `source` is the system chart (time is ignored). Target symbols whose
    /// forward map only involves source parameters become parameters.
    pub fn new(
        source: &Chart,
        invariants: Vec<(Symbol, Expr)>,
        complementary: Vec<(Symbol, Expr)>,
        inverse: Option<BTreeMap<Symbol, Expr>>,
    ) -> Result<Self> {
        let params: BTreeSet<Symbol> = source.parameters().into_iter().collect();
        let mut entries = Vec::new();
        let mut forward = Vec::new();
        for (s, e) in invariants.iter().chain(&complementary) {
            source.check(e)?;
            let fs = e.free_symbols();
            let role = if !fs.is_empty() && fs.is_subset(&params) {
                Role::Parameter
            } else {
                Role::Base
            };
            entries.push((s.clone(), role));
            forward.push(e.clone());
        }
        let target = Chart::new(entries)?;
        let dirs = source.directions();
        if forward.len() != dirs.len() {
            return Err(Error::SizeMismatch(format!(
                "{} target coordinates for {} source coordinates",
                forward.len(),
                dirs.len()
            )));
        }
        let inverse = match inverse {
            None => None,
            Some(mut map) => {
                let mut out = Vec::with_capacity(dirs.len());
                for d in &dirs {
                    let e = map
                        .remove(d)
                        .ok_or_else(|| Error::Problem(format!("inverse map lacks `{d}`")))?;
                    target.check(&e)?;
                    out.push(e);
                }
                if let Some(extra) = map.keys().next() {
                    return Err(Error::UnknownSymbol(extra.name().to_string()));
                }
                Some(out)
            }
        };
        Ok(CoordinateChange {
            source: source.base_chart(),
            target,
            invariants: invariants.into_iter().map(|(s, _)| s).collect(),
            complementary: complementary.into_iter().map(|(s, _)| s).collect(),
            forward,
            inverse,
        })
    }

    pub fn source(&self) -> &Chart {
        &self.source
    }

    pub fn target(&self) -> &Chart {
        &self.target
    }

    pub fn invariants(&self) -> &[Symbol] {
        &self.invariants
    }

    pub fn complementary(&self) -> &[Symbol] {
        &self.complementary
    }

    pub fn forward(&self) -> &[Expr] {
        &self.forward
    }

    pub fn forward_of(&self, s: &Symbol) -> Option<&Expr> {
        self.target.symbols().iter().position(|t| t == s).map(|i| &self.forward[i])
    }

    pub fn inverse(&self) -> Result<&[Expr]> {
        self.inverse.as_deref().ok_or(Error::InverseRequired)
    }

    /// Bindings source direction -> expression in target coordinates.
    pub fn inverse_map(&self) -> Result<BTreeMap<Symbol, Expr>> {
        let inv = self.inverse()?;
        Ok(self.source.directions().into_iter().zip(inv.iter().cloned()).collect())
    }

    /// Bindings for source jets in terms of target jets: `x' -> D_t G_x`.
    fn inverse_jet_map(&self) -> Result<BTreeMap<Symbol, Expr>> {
        let mut out = BTreeMap::new();
        for (d, g) in self.inverse_map()? {
            out.insert(d.dot(), total_derivative(&g, &self.target, None)?);
        }
        Ok(out)
    }

    /// Express a source-chart expression (which may contain source jets) in
    /// target coordinates.
    pub fn pull(&self, e: &Expr) -> Result<Expr> {
        let mut map = self.inverse_map()?;
        let jets: Vec<Symbol> = self.source.directions().iter().map(Symbol::dot).collect();
        if e.contains_any(&jets) {
            map.extend(self.inverse_jet_map()?);
        }
        Ok(e.substitute(&map))
    }

    /// Round trips and Jacobian rank on the sampled boxes. Returns the
    /// largest round-trip residual.
    pub fn validate(&self, domain: &SampleDomain) -> Result<f64> {
        let inv = self.inverse_map()?;
        let mut pairs = Vec::new();
        for (t, f) in self.target.symbols().iter().zip(&self.forward) {
            pairs.push((Expr::Var(t.clone()), f.substitute(&inv)));
        }
        let a = domain.max_residual(&pairs)?;
        if !a.equal {
            return Err(Error::ValidationFailed(format!(
                "forward after inverse is not the identity (residual {:.3e})",
                a.residual
            )));
        }
        let fwd: BTreeMap<Symbol, Expr> = self
            .target
            .symbols()
            .into_iter()
            .zip(self.forward.iter().cloned())
            .collect();
        let pairs: Vec<(Expr, Expr)> = self
            .source
            .directions()
            .into_iter()
            .zip(self.inverse()?)
            .map(|(s, g)| (Expr::Var(s), g.substitute(&fwd)))
            .collect();
        let b = domain.max_residual(&pairs)?;
        if !b.equal {
            return Err(Error::ValidationFailed(format!(
                "inverse after forward is not the identity (residual {:.3e})",
                b.residual
            )));
        }
        let dirs = self.source.directions();
        let jac: Vec<Vec<Expr>> = self
            .forward
            .iter()
            .map(|f| dirs.iter().map(|d| f.differentiate(d)).collect())
            .collect();
        let syms: BTreeSet<Symbol> = jac.iter().flatten().flat_map(|e| e.free_symbols()).collect();
        let n = dirs.len();
        let guard = domain.guard;
        let count = if syms.is_empty() { 1 } else { domain.count };
        let ranks = domain.sample(&syms, count, |p| {
            let mut m = DMatrix::zeros(n, n);
            for (i, row) in jac.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    m[(i, j)] = e.evaluate_guarded(p, guard)?;
                }
            }
            Ok(linalg::rank(&m))
        })?;
        if ranks.iter().any(|(_, r)| *r < n) {
            return Err(Error::ValidationFailed("Jacobian of the forward map is singular".into()));
        }
        Ok(a.residual.max(b.residual))
    }
}

/// Rewrite the system in target coordinates: `u' = D_t F_u` restricted to the
/// solutions and pulled back through the inverse.
pub fn transform_system(sys: &DynamicalSystem, change: &CoordinateChange) -> Result<DynamicalSystem> {
    change.inverse()?;
    let chart = sys.chart().base_chart();
    let mut rhs = Vec::new();
    for (t, f) in change.target.entries().iter().zip(&change.forward) {
        if t.1 != Role::Base {
            continue;
        }
        let rate = total_derivative(f, &chart, Some(sys))?;
        rhs.push(change.pull(&rate)?);
    }
    DynamicalSystem::new(change.target.clone(), rhs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionResult {
    /// System on the invariant block alone.
    pub reduced: DynamicalSystem,
    /// `(y_j, g_j)` with `y_j' = g_j(z, y)` for complementary coordinates
    /// that carry an equation.
    pub reconstruction: Vec<(Symbol, Expr)>,
    pub leakage: f64,
    /// Complementary symbols that still appeared in a reduced right-hand side
    /// and were frozen at a sample value after the leakage test passed.
    pub frozen: Vec<Symbol>,
}

/// Largest relative spread of `e` when only `vary` changes, across random
/// fixings of every other symbol.
pub fn leakage(e: &Expr, vary: &BTreeSet<Symbol>, domain: &SampleDomain) -> Result<f64> {
    let all = e.free_symbols();
    let moving: BTreeSet<Symbol> = all.intersection(vary).cloned().collect();
    if moving.is_empty() {
        return Ok(0.0);
    }
    let fixed: BTreeSet<Symbol> = all.difference(vary).cloned().collect();
    let mut rng = Rng::new(domain.seed ^ 0x5eed);
    let guard = domain.guard;
    let mut worst = 0.0f64;
    let mut fixings = 0;
    let mut attempts = 0;
    let budget = domain.budget_factor.max(1) * LEAKAGE_FIXINGS * LEAKAGE_DRAWS;
    while fixings < LEAKAGE_FIXINGS {
        let base = domain.draw(&mut rng, &fixed);
        let mut values = Vec::with_capacity(LEAKAGE_DRAWS);
        let mut misses = 0;
        while values.len() < LEAKAGE_DRAWS && misses < LEAKAGE_DRAWS {
            attempts += 1;
            if attempts > budget {
                return Err(Error::InsufficientSamples {
                    accepted: fixings,
                    wanted: LEAKAGE_FIXINGS,
                    attempts,
                });
            }
            let mut p: Point = base.clone();
            p.extend(domain.draw(&mut rng, &moving));
            match e.evaluate_guarded(&p, guard) {
                Ok(v) => values.push(v),
                Err(Error::Domain(_)) => misses += 1,
                Err(err) => return Err(err),
            }
        }
        // A fixing where too many draws fall outside the domain is replaced.
        if values.len() < LEAKAGE_DRAWS {
            continue;
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mag = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max((hi - lo) / (1.0 + mag));
        fixings += 1;
    }
    Ok(worst)
}

/// Replace `syms` by the midpoints of their sampling boxes.
fn freeze(e: &Expr, syms: &BTreeSet<Symbol>, domain: &SampleDomain) -> Expr {
    let map: BTreeMap<Symbol, Expr> = syms
        .iter()
        .filter(|s| e.contains(s))
        .map(|s| {
            let (lo, hi) = domain.bounds_of(s);
            let mid = BigRational::from_f64(0.5 * (lo + hi)).unwrap_or_default();
            (s.clone(), Expr::Const(mid))
        })
        .collect();
    e.substitute(&map)
}

/// Complementary symbols and the jets of complementary parameters: the
/// directions a reduced equation must not see.
fn complementary_block(change: &CoordinateChange) -> BTreeSet<Symbol> {
    let mut out: BTreeSet<Symbol> = change.complementary.iter().cloned().collect();
    for s in &change.complementary {
        out.insert(s.dot());
    }
    out
}

/// Split an adapted system into the reduced system on the invariants and
/// the reconstruction equations on the complementary block.
pub fn extract_reduced(
    sys_new: &DynamicalSystem,
    change: &CoordinateChange,
    domain: &SampleDomain,
) -> Result<ReductionResult> {
    let block = complementary_block(change);
    let mut reduced_rhs = Vec::new();
    let mut worst = 0.0f64;
    let mut frozen = BTreeSet::new();
    for z in &change.invariants {
        let rhs = sys_new
            .rhs_of(z)
            .ok_or_else(|| Error::Problem(format!("invariant `{z}` has no equation")))?;
        let l = leakage(rhs, &block, domain)?;
        worst = worst.max(l);
        if l >= domain.tolerance {
            return Err(Error::LeakageDetected {
                symbol: z.name().to_string(),
                spread: l,
            });
        }
        let present: BTreeSet<Symbol> = rhs.free_symbols().intersection(&block).cloned().collect();
        frozen.extend(present.iter().cloned());
        reduced_rhs.push(freeze(rhs, &present, domain));
    }
    let chart = Chart::new(change.invariants.iter().map(|s| (s.clone(), Role::Base)).collect())?;
    for e in &reduced_rhs {
        for s in e.free_symbols() {
            if !chart.contains(&s) {
                return Err(Error::LeakageDetected {
                    symbol: s.name().to_string(),
                    spread: f64::NAN,
                });
            }
        }
    }
    let reduced = DynamicalSystem::new(chart, reduced_rhs)?;
    let reconstruction = change
        .complementary
        .iter()
        .filter_map(|y| sys_new.rhs_of(y).map(|g| (y.clone(), g.clone())))
        .collect();
    Ok(ReductionResult {
        reduced,
        reconstruction,
        leakage: worst,
        frozen: frozen.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitalReduction {
    pub pivot: Symbol,
    /// `(z_i, z_i' / z_pivot')` for the other invariants.
    pub ratios: Vec<(Symbol, Expr)>,
    pub leakage: f64,
}

/// Orbital reduction: the invariant rates share a common factor that may
/// depend on the complementary block, so only their ratios reduce.
pub fn orbital_reduce(
    sys_new: &DynamicalSystem,
    change: &CoordinateChange,
    domain: &SampleDomain,
) -> Result<OrbitalReduction> {
    let block = complementary_block(change);
    let pivot = change
        .invariants
        .last()
        .cloned()
        .ok_or_else(|| Error::Problem("orbital reduction needs at least one invariant".into()))?;
    let den = sys_new
        .rhs_of(&pivot)
        .ok_or_else(|| Error::Problem(format!("invariant `{pivot}` has no equation")))?
        .clone();
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let inv_den = den.recip();
    let mut ratios = Vec::new();
    let mut worst = 0.0f64;
    for z in &change.invariants[..change.invariants.len() - 1] {
        let num = sys_new
            .rhs_of(z)
            .ok_or_else(|| Error::Problem(format!("invariant `{z}` has no equation")))?;
        let ratio = num * &inv_den;
        let l = leakage(&ratio, &block, domain)?;
        worst = worst.max(l);
        if l >= domain.tolerance {
            return Err(Error::LeakageDetected {
                symbol: z.name().to_string(),
                spread: l,
            });
        }
        let present: BTreeSet<Symbol> = ratio.free_symbols().intersection(&block).cloned().collect();
        ratios.push((z.clone(), freeze(&ratio, &present, domain)));
    }
    Ok(OrbitalReduction {
        pivot,
        ratios,
        leakage: worst,
    })
}

/// Push prolonged fields forward to the target jet chart and compare them
/// with `∂/∂y_i + σ_ij ∂/∂y_j'`. Returns the largest defect.
pub fn rectified_form_check(
    fields: &[VectorField],
    prolonged: &[VectorField],
    change: &CoordinateChange,
    sigma: &SigmaMatrix,
    domain: &SampleDomain,
) -> Result<(bool, f64)> {
    if fields.len() != change.complementary.len() || prolonged.len() != fields.len() {
        return Err(Error::SizeMismatch(format!(
            "{} fields for {} complementary coordinates",
            fields.len(),
            change.complementary.len()
        )));
    }
    let src = change.source.clone();
    let targets = change.target.symbols();
    let mut worst = 0.0f64;
    for (i, (x, y)) in fields.iter().zip(prolonged).enumerate() {
        let mut base_pairs = Vec::new();
        for (u, f) in targets.iter().zip(&change.forward) {
            let want = if *u == change.complementary[i] {
                Expr::one()
            } else {
                Expr::zero()
            };
            base_pairs.push((want, change.pull(&x.apply(f)?)?));
        }
        let c = domain.max_residual(&base_pairs)?;
        if !c.equal {
            return Err(Error::NotRectifying(i));
        }
        worst = worst.max(c.residual);
        let mut jet_pairs = Vec::new();
        for (u, f) in targets.iter().zip(&change.forward) {
            let rate = total_derivative(f, &src, None)?;
            let got = change.pull(&y.apply(&rate)?)?;
            let want = match change.complementary.iter().position(|c| c == u) {
                Some(j) => change.pull(sigma.get(i, j))?,
                None => Expr::zero(),
            };
            jet_pairs.push((want, got));
        }
        let c = domain.max_residual(&jet_pairs)?;
        worst = worst.max(c.residual);
        if !c.equal {
            return Ok((false, worst));
        }
    }
    Ok((true, worst))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaReport {
    pub expr: Expr,
    /// Residual of `Y_i(β) = 0`.
    pub invariance: f64,
    /// `β` restricted to the solutions, in target coordinates.
    pub restricted: Option<Expr>,
    pub leakage: f64,
    pub passed: bool,
}

/// Verify candidate first-order invariants and express them on the
/// solutions as functions of the invariant block.
pub fn check_betas(
    sys: &DynamicalSystem,
    prolonged: &[VectorField],
    change: Option<&CoordinateChange>,
    betas: &[Expr],
    domain: &SampleDomain,
) -> Result<Vec<BetaReport>> {
    let mut out = Vec::new();
    for b in betas {
        let (inv_ok, invariance) = verify_invariant(prolonged, b, domain)?;
        let (restricted, leak) = match change {
            Some(ch) if ch.inverse.is_some() => {
                let r = ch.pull(&sys.restrict(b))?;
                let block = complementary_block(ch);
                let l = leakage(&r, &block, domain)?;
                let present: BTreeSet<Symbol> = r.free_symbols().intersection(&block).cloned().collect();
                (Some(freeze(&r, &present, domain)), l)
            }
            _ => (None, 0.0),
        };
        out.push(BetaReport {
            expr: b.clone(),
            invariance,
            restricted,
            leakage: leak,
            passed: inv_ok && leak < domain.tolerance,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantVerdict {
    pub expr: Expr,
    /// Residual of `D_t I = 0` on the solutions.
    pub conserved: f64,
    /// Residual of `X_i(I) = 0`.
    pub invariant: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsReport {
    pub candidates: Vec<ConstantVerdict>,
    /// Rank of the gradients of the passing candidates.
    pub independent: usize,
    /// Expected number of independent constants, `n - r - 1` clamped at 0.
    pub bound: usize,
    pub rank: usize,
}

/// Check candidate constants of motion that are also invariant under the
/// symmetry fields.
pub fn verify_constants_of_motion(
    sys: &DynamicalSystem,
    fields: &[VectorField],
    candidates: &[Expr],
    domain: &SampleDomain,
) -> Result<ConstantsReport> {
    let chart = sys.chart().base_chart();
    let rank = if fields.is_empty() {
        0
    } else {
        crate::field::distribution_rank(fields, domain)?
    };
    let n = chart.dim();
    let bound = n.saturating_sub(rank + 1);
    let mut verdicts = Vec::new();
    for c in candidates {
        let dt = total_derivative(c, &chart, Some(sys))?;
        let conserved = if dt.is_zero() {
            0.0
        } else {
            domain.max_residual(&[(Expr::zero(), dt)])?.residual
        };
        let mut invariant = 0.0f64;
        for f in fields {
            let e = f.apply(c)?;
            if !e.is_zero() {
                invariant = invariant.max(domain.max_residual(&[(Expr::zero(), e)])?.residual);
            }
        }
        verdicts.push(ConstantVerdict {
            expr: c.clone(),
            conserved,
            invariant,
            passed: conserved < domain.tolerance && invariant < domain.tolerance,
        });
    }
    let passing: Vec<&Expr> = verdicts.iter().filter(|v| v.passed).map(|v| &v.expr).collect();
    let independent = gradient_rank(&passing, &chart, domain)?;
    Ok(ConstantsReport {
        candidates: verdicts,
        independent,
        bound,
        rank,
    })
}

/// Smallest rank of the gradient matrix of `exprs` over sampled points.
fn gradient_rank(exprs: &[&Expr], chart: &Chart, domain: &SampleDomain) -> Result<usize> {
    if exprs.is_empty() {
        return Ok(0);
    }
    let dirs = chart.directions();
    let grads: Vec<Vec<Expr>> = exprs
        .iter()
        .map(|e| dirs.iter().map(|d| e.differentiate(d)).collect())
        .collect();
    let syms: BTreeSet<Symbol> = grads.iter().flatten().flat_map(|e| e.free_symbols()).collect();
    let guard = domain.guard;
    let count = if syms.is_empty() { 1 } else { domain.count };
    let ranks = domain.sample(&syms, count, |p| {
        let mut m = DMatrix::zeros(grads.len(), dirs.len());
        for (i, row) in grads.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                m[(i, j)] = e.evaluate_guarded(p, guard)?;
            }
        }
        Ok(linalg::rank(&m))
    })?;
    Ok(ranks.iter().map(|(_, r)| *r).min().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Symbol {
        Symbol::new(x)
    }

    fn example2() -> (DynamicalSystem, CoordinateChange, SampleDomain) {
        let c = Chart::base(&["x", "y", "z"]);
        let sys = DynamicalSystem::new(
            c.clone(),
            vec![
                c.parse("-2*z - x*y^2*(x^2 + z^2) + x*y*z*log(y^2)").unwrap(),
                c.parse("y^2*(y*(x^2 + z^2) - z*log(y^2))").unwrap(),
                c.parse("2*x - y^2*z*(x^2 + z^2) + y*z^2*log(y^2)").unwrap(),
            ],
        )
        .unwrap();
        let t = |e: &str| crate::parse(e).unwrap();
        let change = CoordinateChange::new(
            &c,
            vec![(s("xi"), t("x*y")), (s("eta"), t("y*z"))],
            vec![(s("rho"), t("1 + y^2"))],
            Some(
                [
                    (s("x"), t("xi*(rho - 1)^(-1/2)")),
                    (s("y"), t("(rho - 1)^(1/2)")),
                    (s("z"), t("eta*(rho - 1)^(-1/2)")),
                ]
                .into(),
            ),
        )
        .unwrap();
        let d = SampleDomain::default()
            .with_bounds("xi", 0.1, 1.0)
            .with_bounds("eta", 0.1, 1.0)
            .with_bounds("rho", 1.1, 2.2);
        (sys, change, d)
    }

    #[test]
    fn example2_change_validates_and_reduces() {
        let (sys, change, d) = example2();
        assert!(change.validate(&d).unwrap() < 1e-9);
        let new = transform_system(&sys, &change).unwrap();
        assert_eq!(new.rhs_of(&s("xi")).unwrap(), &crate::parse("-2*eta").unwrap());
        assert_eq!(new.rhs_of(&s("eta")).unwrap(), &crate::parse("2*xi").unwrap());
        let red = extract_reduced(&new, &change, &d).unwrap();
        assert_eq!(red.reduced.dim(), 2);
        assert_eq!(red.reconstruction.len(), 1);
        assert!(red.frozen.is_empty());
    }

    #[test]
    fn leakage_is_detected() {
        let vary: BTreeSet<Symbol> = [s("y")].into();
        let d = SampleDomain::default();
        assert_eq!(leakage(&crate::parse("x^2").unwrap(), &vary, &d).unwrap(), 0.0);
        assert!(leakage(&crate::parse("x + y").unwrap(), &vary, &d).unwrap() > 0.1);
        let hidden = crate::parse("log(x*y) - log(y) + 1").unwrap();
        assert!(leakage(&hidden, &vary, &d).unwrap() < 1e-12);
    }

    #[test]
    fn missing_inverse_is_reported() {
        let c = Chart::base(&["x"]);
        let ch = CoordinateChange::new(&c, vec![(s("u"), c.parse("x").unwrap())], vec![], None).unwrap();
        let sys = DynamicalSystem::new(c.clone(), vec![c.parse("x").unwrap()]).unwrap();
        assert_eq!(transform_system(&sys, &ch), Err(Error::InverseRequired));
    }

    #[test]
    fn identity_change_is_structural_identity() {
        let c = Chart::base(&["x", "y"]);
        let sys = DynamicalSystem::new(c.clone(), vec![c.parse("x*y").unwrap(), c.parse("exp(x) - y").unwrap()]).unwrap();
        let ch = CoordinateChange::new(
            &c,
            vec![(s("x"), c.parse("x").unwrap()), (s("y"), c.parse("y").unwrap())],
            vec![],
            Some([(s("x"), c.parse("x").unwrap()), (s("y"), c.parse("y").unwrap())].into()),
        )
        .unwrap();
        let new = transform_system(&sys, &ch).unwrap();
        assert_eq!(new.rhs(), sys.rhs());
        let red = extract_reduced(&new, &ch, &SampleDomain::default()).unwrap();
        assert!(red.reconstruction.is_empty());
    }
}
