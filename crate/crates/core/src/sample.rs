//! Deterministic sampling of coordinate boxes and numeric identity testing.
//!
//! Points come from an xorshift64* generator: state `s` is updated by
//! `s ^= s >> 12; s ^= s << 25; s ^= s >> 27` and the output is
//! `s * 0x2545F4914F6CDD1D`; the top 53 bits give a uniform double in
//! `[0, 1)`. For each attempt one value is drawn per symbol, symbols taken in
//! name order. The same seed therefore yields the same points everywhere.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Point, Symbol};

pub const DEFAULT_SEED: u64 = 0xC1C0DE;

#[derive(Clone, Debug)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        // Zero is a fixed point of xorshift; map it to a fixed non-zero state.
        Rng(if seed == 0 { 0x9E37_79B9_7F4A_7C15 } else { seed })
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut s = self.0;
        s ^= s >> 12;
        s ^= s << 25;
        s ^= s >> 27;
        self.0 = s;
        s.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleDomain {
    /// Per-symbol overrides; unlisted symbols use `default_bounds`.
    pub bounds: BTreeMap<Symbol, (f64, f64)>,
    pub default_bounds: (f64, f64),
    pub count: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub guard: f64,
    pub budget_factor: usize,
}

impl Default for SampleDomain {
    fn default() -> Self {
        SampleDomain {
            bounds: BTreeMap::new(),
            default_bounds: (0.2, 1.2),
            count: 64,
            tolerance: 1e-9,
            seed: DEFAULT_SEED,
            guard: 1e-6,
            budget_factor: 10,
        }
    }
}

/// Outcome of a sampled comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Comparison {
    pub equal: bool,
    pub residual: f64,
    pub points: usize,
}

impl SampleDomain {
    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_bounds(mut self, s: &str, lo: f64, hi: f64) -> Self {
        self.bounds.insert(Symbol::new(s), (lo, hi));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |lo: f64, hi: f64| !(lo.is_finite() && hi.is_finite() && lo < hi);
        if bad(self.default_bounds.0, self.default_bounds.1) {
            return Err(Error::Problem("default bounds must be finite with lower < upper".into()));
        }
        for (s, (lo, hi)) in &self.bounds {
            if bad(*lo, *hi) {
                return Err(Error::Problem(format!("bounds for `{s}` must be finite with lower < upper")));
            }
        }
        if self.count < 8 {
            return Err(Error::Problem("sample count must be at least 8".into()));
        }
        Ok(())
    }

    pub fn bounds_of(&self, s: &Symbol) -> (f64, f64) {
        self.bounds.get(s).copied().unwrap_or(self.default_bounds)
    }

    pub fn rng(&self) -> Rng {
        Rng::new(self.seed)
    }

    pub fn draw(&self, rng: &mut Rng, symbols: &BTreeSet<Symbol>) -> Point {
        symbols
            .iter()
            .map(|s| {
                let (lo, hi) = self.bounds_of(s);
                (s.clone(), rng.uniform(lo, hi))
            })
            .collect()
    }

    /// Draw `count` points over `symbols`, keeping those for which `accept`
    /// succeeds. A `Domain` error rejects the point; any other error aborts.
    pub fn sample<T>(
        &self,
        symbols: &BTreeSet<Symbol>,
        count: usize,
        mut accept: impl FnMut(&Point) -> Result<T>,
    ) -> Result<Vec<(Point, T)>> {
        let mut rng = self.rng();
        let budget = self.budget_factor.max(1) * count;
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0;
        while out.len() < count {
            if attempts >= budget {
                return Err(Error::InsufficientSamples {
                    accepted: out.len(),
                    wanted: count,
                    attempts,
                });
            }
            attempts += 1;
            let p = self.draw(&mut rng, symbols);
            match accept(&p) {
                Ok(v) => out.push((p, v)),
                Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }

    /// Largest relative residual `|a - b| / (1 + |a|)` over sampled points
    /// of a family of expression pairs, all evaluated at the same points.
    pub fn max_residual(&self, pairs: &[(Expr, Expr)]) -> Result<Comparison> {
        let symbols: BTreeSet<Symbol> = pairs
            .iter()
            .flat_map(|(a, b)| a.free_symbols().into_iter().chain(b.free_symbols()))
            .collect();
        if pairs.iter().all(|(a, b)| a == b) {
            return Ok(Comparison {
                equal: true,
                residual: 0.0,
                points: 0,
            });
        }
        let guard = self.guard;
        let samples = self.sample(&symbols, self.count, |p| {
            let mut worst = 0.0f64;
            for (a, b) in pairs {
                let va = a.evaluate_guarded(p, guard)?;
                let vb = b.evaluate_guarded(p, guard)?;
                worst = worst.max((va - vb).abs() / (1.0 + va.abs()));
            }
            Ok(worst)
        })?;
        let residual = samples.iter().map(|(_, r)| *r).fold(0.0, f64::max);
        Ok(Comparison {
            equal: residual < self.tolerance,
            residual,
            points: samples.len(),
        })
    }
}

/// Sampled test of `e1 == e2` with residual `|e1 - e2| / (1 + |e1|)`.
pub fn equals_numeric(e1: &Expr, e2: &Expr, domain: &SampleDomain) -> Result<Comparison> {
    domain.max_residual(&[(e1.clone(), e2.clone())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn rng_is_deterministic_and_uniform() {
        let mut a = Rng::new(DEFAULT_SEED);
        let mut b = Rng::new(DEFAULT_SEED);
        let xs: Vec<f64> = (0..1000).map(|_| a.next_f64()).collect();
        let ys: Vec<f64> = (0..1000).map(|_| b.next_f64()).collect();
        assert_eq!(xs, ys);
        assert!(xs.iter().all(|x| (0.0..1.0).contains(x)));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 0.5).abs() < 0.05);
    }

    #[test]
    fn numeric_equality_examples() {
        let d = SampleDomain::default();
        assert!(equals_numeric(&p("(x+y)^2"), &p("x^2 + 2*x*y + y^2"), &d).unwrap().equal);
        assert!(equals_numeric(&p("log(x^2)"), &p("2*log(x)"), &d).unwrap().equal);
        let c = equals_numeric(&p("x"), &p("x + 1/1000*y"), &d).unwrap();
        assert!(!c.equal);
        assert!(c.residual > 1e-4 && c.residual < 1e-3);
    }

    #[test]
    fn degenerate_domain_reports_insufficient_samples() {
        let d = SampleDomain::default().with_bounds("x", -2.0, -1.0);
        let r = equals_numeric(&p("log(x)"), &p("log(x)*2"), &d);
        assert!(matches!(r, Err(Error::InsufficientSamples { .. })));
    }
}
