//! JSON problem files: schema, loading and compilation into typed objects.
//!
//! Expressions are strings in the expression grammar; jet coordinates carry
//! a trailing apostrophe (`x'`). The files under `corpus/` are complete
//! instances of the schema.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chart::{Chart, Role};
use crate::error::{Error, Result};
use crate::expr::{Expr, Symbol};
use crate::field::VectorField;
use crate::jet::{DynamicalSystem, SigmaMatrix};
use crate::reduction::CoordinateChange;
use crate::sample::SampleDomain;
use crate::symmetry::Mode;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub coordinates: Vec<Coordinate>,
    pub rhs: BTreeMap<String, String>,
    #[serde(default)]
    pub fields: Vec<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<String>>>,
    /// Gauge functions for the standard-symmetry constructor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub change: Option<ChangeSpec>,
    #[serde(default, skip_serializing_if = "Candidates::is_empty")]
    pub candidates: Candidates,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coordinate {
    pub name: String,
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<String>,
    pub phi: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Named {
    pub name: String,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChangeSpec {
    pub invariants: Vec<Named>,
    pub complementary: Vec<Named>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<BTreeMap<String, String>>,
    /// The complementary coordinates straighten the fields, in order.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub rectifying: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Candidates {
    /// Common invariants of the fields.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub invariants: Vec<String>,
    /// First-order invariants of the prolonged fields.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub betas: Vec<BetaSpec>,
    /// Constants of motion that are also invariant under the fields.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constants: Vec<String>,
}

impl Candidates {
    pub fn is_empty(&self) -> bool {
        self.invariants.is_empty() && self.betas.is_empty() && self.constants.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaSpec {
    pub expr: String,
    /// Expected value on the solutions, in the invariant coordinates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bounds: BTreeMap<String, [f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSpec {
    /// Initial state, one value per base coordinate and parameter.
    pub x0: Vec<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    /// Expected reduced right-hand sides by invariant name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reduced: BTreeMap<String, String>,
    /// Expected ratios `z' / z_pivot'` for orbital reductions, where the
    /// pivot is the last invariant.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub ratios: BTreeMap<String, String>,
}

fn default_t_end() -> f64 {
    1.0
}

fn default_step() -> f64 {
    1e-3
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Problem(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Problem(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Problem(m) => Error::Problem(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }
}

/// A problem file with every expression parsed and checked.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub system: DynamicalSystem,
    pub fields: Vec<VectorField>,
    pub field_names: Vec<String>,
    pub sigma: Option<SigmaMatrix>,
    pub alphas: Option<Vec<Expr>>,
    pub mode: Mode,
    pub change: Option<CoordinateChange>,
    pub rectifying: bool,
    pub invariants: Vec<Expr>,
    pub betas: Vec<(Expr, Option<Expr>)>,
    pub constants: Vec<Expr>,
    pub domain: SampleDomain,
    pub validation: Option<ValidationSpec>,
    pub expected_reduced: Vec<(Symbol, Expr)>,
    pub expected_ratios: Vec<(Symbol, Expr)>,
    /// Set when a time-dependent input was rewritten as autonomous.
    pub autonomized: bool,
}

fn parse_in(chart: &Chart, text: &str, what: &str) -> Result<Expr> {
    chart.parse(text).map_err(|e| Error::Problem(format!("{what}: {e}")))
}

impl Problem {
    /// Compile a problem file. Non-autonomous systems are rewritten with time
    /// as a new base coordinate when `autonomize` is set.
    pub fn compile(pf: &ProblemFile, autonomize: bool) -> Result<Self> {
        let chart = Chart::new(
            pf.coordinates
                .iter()
                .map(|c| (Symbol::new(&c.name), c.role))
                .collect(),
        )?;
        let jets = chart.jet_chart();
        for name in pf.rhs.keys() {
            if chart.role(&Symbol::new(name)) != Some(Role::Base) {
                return Err(Error::Problem(format!("rhs given for `{name}`, which is not a base coordinate")));
            }
        }
        let mut rhs = Vec::new();
        for b in chart.base_coords() {
            let text = pf
                .rhs
                .get(b.name())
                .ok_or_else(|| Error::Problem(format!("no rhs for base coordinate `{b}`")))?;
            rhs.push(parse_in(&jets, text, &format!("rhs of {b}"))?);
        }
        let mut system = DynamicalSystem::new(chart.clone(), rhs)?;
        let mut fields = Vec::new();
        for f in &pf.fields {
            let xi = match &f.xi {
                Some(t) => parse_in(&chart, t, &format!("field {} xi", f.name))?,
                None => Expr::zero(),
            };
            let phi = f
                .phi
                .iter()
                .enumerate()
                .map(|(a, t)| parse_in(&chart, t, &format!("field {} phi[{a}]", f.name)))
                .collect::<Result<Vec<_>>>()?;
            fields.push(VectorField::new(&chart, xi, phi, None)?);
        }
        let mut sigma = match &pf.sigma {
            Some(rows) => Some(SigmaMatrix::new(
                rows.iter()
                    .enumerate()
                    .map(|(i, r)| {
                        r.iter()
                            .enumerate()
                            .map(|(j, t)| parse_in(&jets, t, &format!("sigma[{i}][{j}]")))
                            .collect()
                    })
                    .collect::<Result<Vec<Vec<Expr>>>>()?,
            )?),
            None => None,
        };
        let mut alphas = match &pf.alphas {
            Some(a) => Some(
                a.iter()
                    .enumerate()
                    .map(|(k, t)| parse_in(&chart, t, &format!("alpha[{k}]")))
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        let mut invariants = pf
            .candidates
            .invariants
            .iter()
            .map(|t| parse_in(&chart, t, "invariant candidate"))
            .collect::<Result<Vec<_>>>()?;
        let mut constants = pf
            .candidates
            .constants
            .iter()
            .map(|t| parse_in(&chart, t, "constant candidate"))
            .collect::<Result<Vec<_>>>()?;

        let mut autonomized = false;
        if !system.is_autonomous() && autonomize {
            if pf.change.is_some() {
                return Err(Error::Problem(
                    "coordinate changes must be written for an autonomous system".into(),
                ));
            }
            let t = chart.time().expect("non-autonomous system has a time symbol");
            let auto = system.autonomize()?;
            let x0 = auto.chart().base_coords()[0].clone();
            let bind: BTreeMap<Symbol, Expr> = [(t, Expr::Var(x0))].into();
            let sub = |e: &Expr| e.substitute(&bind);
            fields = fields
                .iter()
                .map(|f| {
                    let mut phi = vec![sub(&f.xi)];
                    phi.extend(f.phi.iter().map(sub));
                    VectorField::vertical(auto.chart(), phi)
                })
                .collect::<Result<_>>()?;
            sigma = sigma.map(|s| SigmaMatrix {
                entries: s.entries.iter().map(|r| r.iter().map(sub).collect()).collect(),
            });
            alphas = alphas.map(|a| a.iter().map(sub).collect());
            invariants = invariants.iter().map(sub).collect();
            constants = constants.iter().map(sub).collect();
            system = auto;
            autonomized = true;
        }
        let chart = system.chart().clone();
        let jets = chart.jet_chart();

        let (change, rectifying) = match &pf.change {
            Some(c) => {
                let compile = |list: &[Named]| -> Result<Vec<(Symbol, Expr)>> {
                    list.iter()
                        .map(|n| Ok((Symbol::new(&n.name), parse_in(&chart, &n.expr, &format!("change {}", n.name))?)))
                        .collect()
                };
                let target = Chart::new(
                    c.invariants
                        .iter()
                        .chain(&c.complementary)
                        .map(|n| (Symbol::new(&n.name), Role::Base))
                        .collect(),
                )?;
                let inverse = match &c.inverse {
                    Some(m) => Some(
                        m.iter()
                            .map(|(k, t)| Ok((Symbol::new(k), parse_in(&target, t, &format!("inverse {k}"))?)))
                            .collect::<Result<BTreeMap<_, _>>>()?,
                    ),
                    None => None,
                };
                let ch = CoordinateChange::new(&chart, compile(&c.invariants)?, compile(&c.complementary)?, inverse)?;
                (Some(ch), c.rectifying)
            }
            None => (None, false),
        };

        let mut betas = Vec::new();
        for b in &pf.candidates.betas {
            let e = parse_in(&jets, &b.expr, "beta candidate")?;
            let expect = match (&b.expect, &change) {
                (Some(t), Some(ch)) => Some(parse_in(ch.target(), t, "beta expectation")?),
                (Some(t), None) => Some(parse_in(&chart, t, "beta expectation")?),
                (None, _) => None,
            };
            betas.push((e, expect));
        }

        let mut domain = SampleDomain::default();
        if let Some(d) = &pf.domain {
            for (k, [lo, hi]) in &d.bounds {
                domain = domain.with_bounds(k, *lo, *hi);
            }
            if let Some(c) = d.count {
                domain.count = c;
            }
            if let Some(t) = d.tolerance {
                domain.tolerance = t;
            }
            if let Some(s) = d.seed {
                domain.seed = s;
            }
            if let Some(g) = d.guard {
                domain.guard = g;
            }
        }
        domain.validate()?;

        let mut expected_reduced = Vec::new();
        let mut expected_ratios = Vec::new();
        if let Some(v) = &pf.validation {
            for (map, out) in [(&v.reduced, &mut expected_reduced), (&v.ratios, &mut expected_ratios)] {
                for (k, t) in map {
                    let ch = change
                        .as_ref()
                        .ok_or_else(|| Error::Problem("expected reduced system given without a change".into()))?;
                    let s = Symbol::new(k);
                    if !ch.invariants().contains(&s) {
                        return Err(Error::Problem(format!("`{k}` is not an invariant coordinate")));
                    }
                    out.push((s, parse_in(ch.target(), t, &format!("expected reduced {k}"))?));
                }
            }
        }

        Ok(Problem {
            name: pf.name.clone(),
            system,
            fields,
            field_names: pf.fields.iter().map(|f| f.name.clone()).collect(),
            sigma,
            alphas,
            mode: pf.mode.unwrap_or(Mode::Strict),
            change,
            rectifying,
            invariants,
            betas,
            constants,
            domain,
            validation: pf.validation.clone(),
            expected_reduced,
            expected_ratios,
            autonomized,
        })
    }
}
