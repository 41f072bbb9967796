//! Coordinate charts on the base space and on its first jet space.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Expr, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// The independent variable `t`.
    Time,
    /// A dependent coordinate with its own evolution equation.
    Base,
    /// A dependent coordinate without an equation (a free function of time
    /// from the point of view of the system). It is still a direction that
    /// vector fields may move along, and has a jet coordinate.
    Parameter,
    /// First derivative `x'` of a base or parameter coordinate.
    Jet,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Time => "time",
            Role::Base => "base",
            Role::Parameter => "parameter",
            Role::Jet => "jet",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    entries: Vec<(Symbol, Role)>,
}

impl Chart {
    pub fn new(entries: Vec<(Symbol, Role)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut times = 0;
        for (s, role) in &entries {
            if !seen.insert(s.clone()) {
                return Err(Error::InvalidChart(format!("duplicate symbol `{s}`")));
            }
            if s.is_jet() != (*role == Role::Jet) {
                return Err(Error::InvalidChart(format!(
                    "symbol `{s}` has role {role}; jet symbols and only jet symbols end in `'`"
                )));
            }
            if *role == Role::Time {
                times += 1;
            }
        }
        if times > 1 {
            return Err(Error::InvalidChart("more than one time symbol".into()));
        }
        let chart = Chart { entries };
        for (s, role) in &chart.entries {
            if *role == Role::Jet {
                let base = Symbol::new(s.name().trim_end_matches('\''));
                match chart.role(&base) {
                    Some(Role::Base) | Some(Role::Parameter) => {}
                    _ => {
                        return Err(Error::InvalidChart(format!(
                            "jet symbol `{s}` has no matching coordinate"
                        )))
                    }
                }
            }
        }
        Ok(chart)
    }

    /// Base chart with the given coordinates, no time, no parameters.
    pub fn base(names: &[&str]) -> Self {
        Chart::new(names.iter().map(|n| (Symbol::new(n), Role::Base)).collect())
            .expect("distinct base names")
    }

    pub fn entries(&self) -> &[(Symbol, Role)] {
        &self.entries
    }

    pub fn role(&self, s: &Symbol) -> Option<Role> {
        self.entries.iter().find(|(x, _)| x == s).map(|(_, r)| *r)
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        self.role(s).is_some()
    }

    fn with_role(&self, role: Role) -> Vec<Symbol> {
        self.entries
            .iter()
            .filter(|(_, r)| *r == role)
            .map(|(s, _)| s.clone())
            .collect()
    }

    pub fn time(&self) -> Option<Symbol> {
        self.with_role(Role::Time).into_iter().next()
    }

    /// Coordinates that carry an evolution equation.
    pub fn base_coords(&self) -> Vec<Symbol> {
        self.with_role(Role::Base)
    }

    pub fn parameters(&self) -> Vec<Symbol> {
        self.with_role(Role::Parameter)
    }

    /// All dependent coordinates in chart order: base and parameters. These
    /// are the directions a vector field on the base space can point along.
    pub fn directions(&self) -> Vec<Symbol> {
        self.entries
            .iter()
            .filter(|(_, r)| matches!(r, Role::Base | Role::Parameter))
            .map(|(s, _)| s.clone())
            .collect()
    }

    pub fn jets(&self) -> Vec<Symbol> {
        self.with_role(Role::Jet)
    }

    /// Dimension of the space of dependent coordinates.
    pub fn dim(&self) -> usize {
        self.directions().len()
    }

    pub fn is_jet_chart(&self) -> bool {
        self.directions().iter().all(|d| self.contains(&d.dot()))
    }

    /// This chart extended with a jet symbol for every direction.
    pub fn jet_chart(&self) -> Chart {
        if self.is_jet_chart() {
            return self.clone();
        }
        let mut entries: Vec<(Symbol, Role)> = self
            .entries
            .iter()
            .filter(|(_, r)| *r != Role::Jet)
            .cloned()
            .collect();
        for d in self.directions() {
            entries.push((d.dot(), Role::Jet));
        }
        Chart { entries }
    }

    /// The chart with jet symbols removed.
    pub fn base_chart(&self) -> Chart {
        Chart {
            entries: self
                .entries
                .iter()
                .filter(|(_, r)| *r != Role::Jet)
                .cloned()
                .collect(),
        }
    }

    pub fn symbols(&self) -> Vec<Symbol> {
        self.entries.iter().map(|(s, _)| s.clone()).collect()
    }

    /// Parse an expression and require every symbol to belong to the chart.
    pub fn parse(&self, text: &str) -> Result<Expr> {
        let e = parse(text)?;
        self.check(&e)?;
        Ok(e)
    }

    pub fn check(&self, e: &Expr) -> Result<()> {
        for s in e.free_symbols() {
            if !self.contains(&s) {
                return Err(Error::UnknownSymbol(s.name().to_string()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_chart_pairs_every_direction() {
        let c = Chart::new(vec![
            (Symbol::new("x"), Role::Base),
            (Symbol::new("z"), Role::Parameter),
        ])
        .unwrap();
        let j = c.jet_chart();
        assert!(j.is_jet_chart());
        assert_eq!(j.jets(), vec![Symbol::new("x'"), Symbol::new("z'")]);
        assert_eq!(j.base_chart(), c);
        assert_eq!(c.dim(), 2);
    }

    #[test]
    fn rejects_bad_charts() {
        assert!(Chart::new(vec![(Symbol::new("x"), Role::Base), (Symbol::new("x"), Role::Base)]).is_err());
        assert!(Chart::new(vec![(Symbol::new("x'"), Role::Jet)]).is_err());
        assert!(Chart::new(vec![(Symbol::new("x"), Role::Jet)]).is_err());
    }

    #[test]
    fn parse_checks_symbols() {
        let c = Chart::base(&["x", "y", "z"]);
        assert!(c.parse("x + z^2").is_ok());
        assert_eq!(c.parse("x + w"), Err(Error::UnknownSymbol("w".into())));
    }
}
