//! Symbolic expressions over exact rational constants.
//!
//! An [`Expr`] is always kept in canonical form by the public constructors:
//! products are distributed over sums, powers of a common base are merged,
//! exponential factors are combined, and children are sorted by the derived
//! node ordering `Const < Var < Pow < Exp < Log < Product < Sum`. Two
//! expressions built from equal inputs therefore compare structurally equal.
//! Semantic equality beyond that normal form is left to
//! [`crate::sample::equals_numeric`].

mod canon;
mod diff;
mod eval;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use eval::{Bindings, Point};
pub(crate) use eval::is_overflow;
pub use parse::parse;

/// Exact rational number used for constants and exponents.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Interned symbol name. Jet coordinates carry a trailing apostrophe (`x'`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// The jet symbol paired with this base symbol.
    pub fn dot(&self) -> Symbol {
        Symbol::new(&format!("{}'", self.0))
    }

    pub fn is_jet(&self) -> bool {
        self.0.ends_with('\'')
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl serde::Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for Symbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Symbol::new(&s))
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Expression node. Variant order defines the canonical node ordering.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Const(Rational),
    Var(Symbol),
    Pow(Box<Expr>, Rational),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Product(Vec<Expr>),
    Sum(Vec<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Const(Rational::one())
    }

    pub fn constant(c: Rational) -> Expr {
        Expr::Const(c)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Const(int(n))
    }

    pub fn var(s: impl Into<Symbol>) -> Expr {
        Expr::Var(s.into())
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        canon::canonical(&Expr::Sum(terms.into_iter().collect()))
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        canon::canonical(&Expr::Product(factors.into_iter().collect()))
    }

    pub fn pow(base: Expr, exponent: Rational) -> Expr {
        canon::canonical(&Expr::Pow(Box::new(base), exponent))
    }

    pub fn powi(base: Expr, exponent: i64) -> Expr {
        Expr::pow(base, int(exponent))
    }

    pub fn recip(self) -> Expr {
        Expr::powi(self, -1)
    }

    pub fn exp(arg: Expr) -> Expr {
        canon::canonical(&Expr::Exp(Box::new(arg)))
    }

    pub fn log(arg: Expr) -> Expr {
        canon::canonical(&Expr::Log(Box::new(arg)))
    }

    pub fn scale(&self, c: Rational) -> Expr {
        Expr::product([Expr::Const(c), self.clone()])
    }

    /// Canonical form of an arbitrary (possibly hand-built) tree.
    pub fn canonical(&self) -> Expr {
        canon::canonical(self)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// True when the expression is a polynomial (non-negative integer powers
    /// of symbols only, no exp/log).
    pub fn is_polynomial(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => true,
            Expr::Pow(b, e) => {
                matches!(**b, Expr::Var(_)) && e.is_integer() && !e.is_negative()
            }
            Expr::Exp(_) | Expr::Log(_) => false,
            Expr::Product(xs) | Expr::Sum(xs) => xs.iter().all(Expr::is_polynomial),
        }
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(s) => {
                out.insert(s.clone());
            }
            Expr::Pow(b, _) | Expr::Exp(b) | Expr::Log(b) => b.collect_symbols(out),
            Expr::Product(xs) | Expr::Sum(xs) => {
                for x in xs {
                    x.collect_symbols(out);
                }
            }
        }
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => v == s,
            Expr::Pow(b, _) | Expr::Exp(b) | Expr::Log(b) => b.contains(s),
            Expr::Product(xs) | Expr::Sum(xs) => xs.iter().any(|x| x.contains(s)),
        }
    }

    pub fn contains_any<'a>(&self, syms: impl IntoIterator<Item = &'a Symbol>) -> bool {
        syms.into_iter().any(|s| self.contains(s))
    }

    pub fn differentiate(&self, v: &Symbol) -> Expr {
        diff::differentiate(self, v)
    }

    /// Simultaneous substitution followed by canonicalization.
    pub fn substitute(&self, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        canon::canonical(&self.replace(bindings))
    }

    fn replace(&self, bindings: &BTreeMap<Symbol, Expr>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(s) => bindings.get(s).cloned().unwrap_or_else(|| self.clone()),
            Expr::Pow(b, e) => Expr::Pow(Box::new(b.replace(bindings)), e.clone()),
            Expr::Exp(a) => Expr::Exp(Box::new(a.replace(bindings))),
            Expr::Log(a) => Expr::Log(Box::new(a.replace(bindings))),
            Expr::Product(xs) => Expr::Product(xs.iter().map(|x| x.replace(bindings)).collect()),
            Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| x.replace(bindings)).collect()),
        }
    }

    pub fn evaluate(&self, point: &impl Bindings) -> crate::Result<f64> {
        eval::evaluate(self, point, None)
    }

    /// Evaluation that additionally rejects singular neighbourhoods: any
    /// negative-power base with magnitude below `guard`, any log argument
    /// below `guard`, any fractional-power base below zero.
    pub fn evaluate_guarded(&self, point: &impl Bindings, guard: f64) -> crate::Result<f64> {
        eval::evaluate(self, point, Some(guard))
    }

    /// Number of nodes, used to pick the simplest among equivalent forms.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Pow(b, _) | Expr::Exp(b) | Expr::Log(b) => 1 + b.size(),
            Expr::Product(xs) | Expr::Sum(xs) => 1 + xs.iter().map(Expr::size).sum::<usize>(),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::Var(s)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum([self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum([self, -rhs])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product([self, rhs])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(int(-1))
    }
}

impl<'a> Add for &'a Expr {
    type Output = Expr;
    fn add(self, rhs: &'a Expr) -> Expr {
        Expr::sum([self.clone(), rhs.clone()])
    }
}

impl<'a> Sub for &'a Expr {
    type Output = Expr;
    fn sub(self, rhs: &'a Expr) -> Expr {
        Expr::sum([self.clone(), -rhs.clone()])
    }
}

impl<'a> Mul for &'a Expr {
    type Output = Expr;
    fn mul(self, rhs: &'a Expr) -> Expr {
        Expr::product([self.clone(), rhs.clone()])
    }
}
