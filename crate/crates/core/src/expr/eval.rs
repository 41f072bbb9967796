use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, ToPrimitive};

use super::{Expr, Symbol};
use crate::error::{Error, Result};

/// A numeric assignment of symbols.
pub type Point = BTreeMap<Symbol, f64>;

pub trait Bindings {
    fn value(&self, s: &Symbol) -> Option<f64>;
}

impl Bindings for BTreeMap<Symbol, f64> {
    fn value(&self, s: &Symbol) -> Option<f64> {
        self.get(s).copied()
    }
}

impl Bindings for HashMap<Symbol, f64> {
    fn value(&self, s: &Symbol) -> Option<f64> {
        self.get(s).copied()
    }
}

fn domain(msg: String) -> Error {
    Error::Domain(msg)
}

pub(super) fn evaluate(e: &Expr, pt: &impl Bindings, guard: Option<f64>) -> Result<f64> {
    let v = match e {
        Expr::Const(c) => c.to_f64().unwrap_or(f64::NAN),
        Expr::Var(s) => pt
            .value(s)
            .ok_or_else(|| Error::UnboundSymbol(s.name().to_string()))?,
        Expr::Sum(xs) => {
            let mut acc = 0.0;
            for x in xs {
                acc += evaluate(x, pt, guard)?;
            }
            acc
        }
        Expr::Product(xs) => {
            let mut acc = 1.0;
            for x in xs {
                acc *= evaluate(x, pt, guard)?;
            }
            acc
        }
        Expr::Pow(b, q) => {
            let base = evaluate(b, pt, guard)?;
            if q.is_negative() {
                let near = guard.unwrap_or(0.0);
                if base == 0.0 || base.abs() < near {
                    return Err(domain(format!("negative power of {base:e} in {e}")));
                }
            }
            if q.is_integer() {
                match q.to_integer().to_i32() {
                    Some(n) => base.powi(n),
                    None => base.powf(q.to_f64().unwrap_or(f64::NAN)),
                }
            } else {
                if base < 0.0 {
                    return Err(domain(format!("fractional power of negative {base:e} in {e}")));
                }
                base.powf(q.to_f64().unwrap_or(f64::NAN))
            }
        }
        Expr::Exp(a) => evaluate(a, pt, guard)?.exp(),
        Expr::Log(a) => {
            let arg = evaluate(a, pt, guard)?;
            if arg <= 0.0 || arg < guard.unwrap_or(0.0) {
                return Err(domain(format!("log of {arg:e}")));
            }
            arg.ln()
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("{NON_FINITE} {e}")))
    }
}

const NON_FINITE: &str = "non-finite value while evaluating";

/// True for the domain error raised when a value overflows.
pub(crate) fn is_overflow(err: &crate::Error) -> bool {
    matches!(err, crate::Error::Domain(m) if m.starts_with(NON_FINITE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn pt(pairs: &[(&str, f64)]) -> Point {
        pairs.iter().map(|(k, v)| (Symbol::new(k), *v)).collect()
    }

    #[test]
    fn evaluates() {
        let e = parse("x*y*z*log(y^2)").unwrap();
        let v = e.evaluate(&pt(&[("x", 0.5), ("y", 2.0), ("z", 3.0)])).unwrap();
        assert!((v - 3.0 * 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let p = pt(&[("x", -1.0), ("y", 0.0)]);
        assert!(matches!(parse("log(x)").unwrap().evaluate(&p), Err(Error::Domain(_))));
        assert!(matches!(parse("y^-1").unwrap().evaluate(&p), Err(Error::Domain(_))));
        assert!(matches!(parse("x^(1/2)").unwrap().evaluate(&p), Err(Error::Domain(_))));
        assert!(matches!(parse("w").unwrap().evaluate(&p), Err(Error::UnboundSymbol(_))));
    }

    #[test]
    fn guard_rejects_near_singular() {
        let p = pt(&[("x", 1e-8)]);
        let e = parse("x^-1").unwrap();
        assert!(e.evaluate(&p).is_ok());
        assert!(e.evaluate_guarded(&p, 1e-6).is_err());
    }
}
