//! Normal form: an expanded Laurent polynomial over atoms.
//!
//! Atoms are symbols, logarithms, sums raised to negative integer or
//! fractional powers, and non-distributable fractional powers. Exponentials
//! are tracked separately as a single `exp(arg)` factor per monomial.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{Expr, Rational};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub(super) struct Mono {
    factors: BTreeMap<Expr, Rational>,
    exp_arg: Option<Expr>,
}

type Poly = BTreeMap<Mono, Rational>;

const MAX_CANCEL_ROUNDS: usize = 32;
const MAX_EXPAND_POWER: i64 = 64;

pub(super) fn canonical(e: &Expr) -> Expr {
    expr_of(&cancel(to_poly(e)))
}

fn constant(c: Rational) -> Poly {
    let mut p = Poly::new();
    if !c.is_zero() {
        p.insert(Mono::default(), c);
    }
    p
}

fn single(mono: Mono, c: Rational) -> Poly {
    let mut p = Poly::new();
    if !c.is_zero() {
        p.insert(mono, c);
    }
    p
}

fn atom(base: Expr, exponent: Rational) -> Mono {
    let mut factors = BTreeMap::new();
    if !exponent.is_zero() {
        factors.insert(base, exponent);
    }
    Mono {
        factors,
        exp_arg: None,
    }
}

fn to_poly(e: &Expr) -> Poly {
    match e {
        Expr::Const(c) => constant(c.clone()),
        Expr::Var(_) => single(atom(e.clone(), Rational::one()), Rational::one()),
        Expr::Sum(xs) => {
            let mut acc = Poly::new();
            for x in xs {
                add_into(&mut acc, &to_poly(x));
            }
            acc
        }
        Expr::Product(xs) => {
            let mut acc = constant(Rational::one());
            for x in xs {
                if acc.is_empty() {
                    break;
                }
                acc = mul(&acc, &to_poly(x));
            }
            acc
        }
        Expr::Pow(b, q) => pow_poly(to_poly(b), q),
        Expr::Exp(a) => exp_poly(&to_poly(a)),
        Expr::Log(a) => log_poly(cancel(to_poly(a))),
    }
}

fn exp_poly(arg: &Poly) -> Poly {
    let mut rest = Poly::new();
    let mut out = constant(Rational::one());
    for (m, c) in arg {
        if m.exp_arg.is_none() && m.factors.len() == 1 {
            let (base, e) = m.factors.iter().next().unwrap();
            if let (Expr::Log(u), true) = (base, e.is_one()) {
                out = mul(&out, &pow_poly(to_poly(u), c));
                continue;
            }
        }
        rest.insert(m.clone(), c.clone());
    }
    let rest = cancel(rest);
    if rest.is_empty() {
        return out;
    }
    let mono = Mono {
        factors: BTreeMap::new(),
        exp_arg: Some(expr_of(&rest)),
    };
    mul(&out, &single(mono, Rational::one()))
}

fn log_poly(arg: Poly) -> Poly {
    if arg.len() == 1 {
        let (m, c) = arg.iter().next().unwrap();
        if c.is_one() && m.factors.is_empty() {
            match &m.exp_arg {
                None => return Poly::new(),
                Some(a) => return to_poly(a),
            }
        }
    }
    single(atom(Expr::Log(Box::new(expr_of(&arg))), Rational::one()), Rational::one())
}

fn pow_poly(p: Poly, q: &Rational) -> Poly {
    if q.is_zero() {
        return constant(Rational::one());
    }
    if p.is_empty() {
        if q.is_positive() {
            return Poly::new();
        }
        return single(atom(Expr::zero(), q.clone()), Rational::one());
    }
    if q.is_one() {
        return p;
    }
    let p = if p.len() > 1 && !(q.is_integer() && q.is_positive()) {
        cancel(p)
    } else {
        p
    };
    if p.len() == 1 {
        let (m, c) = p.into_iter().next().unwrap();
        return mono_pow(m, c, q);
    }
    if q.is_integer() && q.is_positive() {
        if let Some(n) = q.to_integer().to_i64().filter(|n| *n <= MAX_EXPAND_POWER) {
            let mut acc = constant(Rational::one());
            for _ in 0..n {
                acc = mul(&acc, &p);
            }
            return acc;
        }
    }
    if q.is_integer() {
        // Pull out monomial and numeric content so equal denominators share a key.
        let content = monomial_content(&p);
        let reduced = divide_by_mono(&p, &content);
        let lead = reduced.values().next().cloned().unwrap_or_else(Rational::one);
        let normalized: Poly = reduced
            .into_iter()
            .map(|(m, c)| (m, c / lead.clone()))
            .collect();
        let base = expr_of(&normalized);
        let scale = mono_pow(content, lead, q);
        return mul(&scale, &single(atom(base, q.clone()), Rational::one()));
    }
    single(atom(expr_of(&p), q.clone()), Rational::one())
}

/// `(c * m)^q` for a single monomial.
fn mono_pow(m: Mono, c: Rational, q: &Rational) -> Poly {
    if q.is_integer() {
        let n = q.to_integer();
        let coeff = rational_int_pow(&c, &n);
        let coeff = match coeff {
            Some(v) => v,
            None => return single(atom(expr_of(&single(m, c)), q.clone()), Rational::one()),
        };
        return normalize_term(scale_mono(&m, q), coeff);
    }
    let root = if c.is_positive() { rational_root(&c, q) } else { None };
    let distributable = m.factors.values().all(|p| p.numer().is_odd());
    match root {
        Some(rc) if distributable => normalize_term(scale_mono(&m, q), rc),
        _ => single(atom(expr_of(&single(m, c)), q.clone()), Rational::one()),
    }
}

fn scale_mono(m: &Mono, q: &Rational) -> Mono {
    Mono {
        factors: m
            .factors
            .iter()
            .map(|(b, e)| (b.clone(), e * q))
            .filter(|(_, e)| !e.is_zero())
            .collect(),
        exp_arg: m.exp_arg.as_ref().map(|a| canonical(&Expr::Product(vec![Expr::Const(q.clone()), a.clone()]))),
    }
}

fn rational_int_pow(c: &Rational, n: &BigInt) -> Option<Rational> {
    let n = n.to_i32()?;
    if c.is_zero() && n < 0 {
        return None;
    }
    Some(c.pow(n))
}

/// Exact `c^q` for positive rational `c`, if it is rational.
fn rational_root(c: &Rational, q: &Rational) -> Option<Rational> {
    let d = q.denom().to_u32()?;
    let rn = c.numer().nth_root(d);
    let rd = c.denom().nth_root(d);
    if rn.pow(d) != *c.numer() || rd.pow(d) != *c.denom() {
        return None;
    }
    rational_int_pow(&Rational::new(rn, rd), q.numer())
}

fn monomial_content(p: &Poly) -> Mono {
    let mut iter = p.keys();
    let first = match iter.next() {
        Some(m) => m.factors.clone(),
        None => return Mono::default(),
    };
    let mut content = first;
    for m in iter {
        content = content
            .into_iter()
            .filter_map(|(b, e)| m.factors.get(&b).map(|f| (b, if *f < e { f.clone() } else { e })))
            .collect();
    }
    content.retain(|_, e| !e.is_zero());
    Mono {
        factors: content,
        exp_arg: None,
    }
}

fn divide_by_mono(p: &Poly, m: &Mono) -> Poly {
    if m.factors.is_empty() {
        return p.clone();
    }
    let inv = scale_mono(m, &-Rational::one());
    let mut out = Poly::new();
    for (k, c) in p {
        add_into(&mut out, &normalize_term(mono_mul_raw(k, &inv), c.clone()));
    }
    out
}

fn add_into(acc: &mut Poly, other: &Poly) {
    for (m, c) in other {
        let remove = {
            let entry = acc.entry(m.clone()).or_insert_with(Rational::zero);
            *entry += c;
            entry.is_zero()
        };
        if remove {
            acc.remove(m);
        }
    }
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let m = mono_mul_raw(ma, mb);
            add_into(&mut out, &normalize_term(m, ca * cb));
        }
    }
    out
}

fn mono_mul_raw(a: &Mono, b: &Mono) -> Mono {
    let mut factors = a.factors.clone();
    for (base, e) in &b.factors {
        let remove = {
            let entry = factors.entry(base.clone()).or_insert_with(Rational::zero);
            *entry += e;
            entry.is_zero()
        };
        if remove {
            factors.remove(base);
        }
    }
    let exp_arg = match (&a.exp_arg, &b.exp_arg) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x.clone()),
        (Some(x), Some(y)) => {
            let mut s = to_poly(x);
            add_into(&mut s, &to_poly(y));
            let s = cancel(s);
            if s.is_empty() {
                None
            } else {
                Some(expr_of(&s))
            }
        }
    };
    Mono { factors, exp_arg }
}

/// Re-expand factors whose exponent became integral after merging so the
/// stored form never contains an expandable power.
fn normalize_term(m: Mono, c: Rational) -> Poly {
    if c.is_zero() {
        return Poly::new();
    }
    let unstable: Vec<(Expr, Rational)> = m
        .factors
        .iter()
        .filter(|(b, e)| is_unstable(b, e))
        .map(|(b, e)| (b.clone(), e.clone()))
        .collect();
    if unstable.is_empty() {
        return single(m, c);
    }
    let mut rest = m;
    for (b, _) in &unstable {
        rest.factors.remove(b);
    }
    let mut out = single(rest, c);
    for (b, e) in unstable {
        let expanded = pow_poly(to_poly(&b), &e);
        out = mul(&out, &expanded);
    }
    out
}

fn is_unstable(base: &Expr, e: &Rational) -> bool {
    if !e.is_integer() {
        return false;
    }
    match base {
        Expr::Var(_) | Expr::Log(_) => false,
        Expr::Const(c) => !(c.is_zero() && e.is_negative()),
        Expr::Sum(_) => {
            if e.is_positive() {
                return true;
            }
            // A negative integer power is stable only when its base is already
            // content-free with unit leading coefficient.
            let p = to_poly(base);
            let content = monomial_content(&p);
            !content.factors.is_empty() || !p.values().next().map(|c| c.is_one()).unwrap_or(false)
        }
        _ => true,
    }
}

fn term_expr(m: &Mono, c: &Rational) -> Expr {
    let mut parts: Vec<Expr> = m
        .factors
        .iter()
        .map(|(b, e)| {
            if e.is_one() {
                b.clone()
            } else {
                Expr::Pow(Box::new(b.clone()), e.clone())
            }
        })
        .collect();
    if let Some(a) = &m.exp_arg {
        parts.push(Expr::Exp(Box::new(a.clone())));
    }
    parts.sort();
    if parts.is_empty() {
        return Expr::Const(c.clone());
    }
    if c.is_one() && parts.len() == 1 {
        return parts.pop().unwrap();
    }
    if !c.is_one() {
        parts.insert(0, Expr::Const(c.clone()));
    }
    Expr::Product(parts)
}

fn expr_of(p: &Poly) -> Expr {
    let mut terms: Vec<Expr> = p.iter().map(|(m, c)| term_expr(m, c)).collect();
    match terms.len() {
        0 => Expr::zero(),
        1 => terms.pop().unwrap(),
        _ => {
            terms.sort();
            Expr::Sum(terms)
        }
    }
}

/// Cancel common sum factors between numerators and denominators by exact
/// Laurent division, repeated until nothing changes.
fn cancel(mut p: Poly) -> Poly {
    for _ in 0..MAX_CANCEL_ROUNDS {
        if p.keys().any(|m| m.exp_arg.is_some()) {
            return p;
        }
        let mut bases: Vec<Expr> = p
            .keys()
            .flat_map(|m| m.factors.iter())
            .filter(|(b, e)| matches!(b, Expr::Sum(_)) && e.is_integer() && e.is_negative())
            .map(|(b, _)| b.clone())
            .collect();
        bases.sort();
        bases.dedup();
        let mut changed = false;
        for d in bases {
            if let Some(next) = cancel_base(&p, &d) {
                p = next;
                changed = true;
                break;
            }
        }
        if !changed {
            break;
        }
    }
    p
}

fn cancel_base(p: &Poly, d: &Expr) -> Option<Poly> {
    let mut kmax = 0i64;
    for m in p.keys() {
        if let Some(e) = m.factors.get(d) {
            if !e.is_integer() || e.is_positive() {
                return None;
            }
            kmax = kmax.max(-e.to_integer().to_i64()?);
        }
    }
    if kmax == 0 {
        return None;
    }
    let dpoly = to_poly(d);
    if dpoly.keys().any(|m| m.exp_arg.is_some()) {
        return None;
    }
    let mut powers = vec![constant(Rational::one())];
    for i in 1..=kmax as usize {
        let next = mul(&powers[i - 1], &dpoly);
        powers.push(next);
    }
    let mut numer = Poly::new();
    for (m, c) in p {
        let mut rest = m.clone();
        let k = match rest.factors.remove(d) {
            Some(e) => -e.to_integer().to_i64()?,
            None => 0,
        };
        let term = single(rest, c.clone());
        add_into(&mut numer, &mul(&term, &powers[(kmax - k) as usize]));
    }
    let quotient = exact_divide(&numer, &dpoly)?;
    if kmax == 1 {
        return Some(quotient);
    }
    let denom = single(atom(d.clone(), Rational::from_integer((1 - kmax).into())), Rational::one());
    Some(mul(&quotient, &denom))
}

fn lex_cmp(a: &Mono, b: &Mono) -> Ordering {
    let zero = Rational::zero();
    let mut keys: Vec<&Expr> = a.factors.keys().chain(b.factors.keys()).collect();
    keys.sort();
    keys.dedup();
    for k in keys {
        let ea = a.factors.get(k).unwrap_or(&zero);
        let eb = b.factors.get(k).unwrap_or(&zero);
        match ea.cmp(eb) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn leading(p: &Poly) -> Option<(&Mono, &Rational)> {
    p.iter().max_by(|x, y| lex_cmp(x.0, y.0))
}

fn exact_divide(n: &Poly, d: &Poly) -> Option<Poly> {
    let (dm, dc) = leading(d)?;
    let dm_inv = scale_mono(dm, &-Rational::one());
    let mut rem = n.clone();
    let mut quotient = Poly::new();
    let bound = 2 * n.len() + 8;
    for _ in 0..bound {
        let (lm, lc) = match leading(&rem) {
            Some((m, c)) => (m.clone(), c.clone()),
            None => return Some(quotient),
        };
        let qm = mono_mul_raw(&lm, &dm_inv);
        let qc = lc / dc.clone();
        let qterm: Poly = single(qm, qc);
        add_into(&mut quotient, &qterm);
        let sub = mul(&qterm, d);
        let neg: Poly = sub.into_iter().map(|(m, c)| (m, -c)).collect();
        add_into(&mut rem, &neg);
    }
    if rem.is_empty() {
        Some(quotient)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn c(s: &str) -> Expr {
        parse(s).unwrap()
    }

    #[test]
    fn distributes_and_collects() {
        assert_eq!(c("(x + y)*(x - y)"), c("x^2 - y^2"));
        assert_eq!(c("x + x"), c("2*x"));
        assert_eq!(c("x - x"), Expr::zero());
    }

    #[test]
    fn merges_powers() {
        assert_eq!(c("x^2*x^-1"), c("x"));
        assert_eq!(c("x^(1/2)*x^(1/2)"), c("x"));
        assert_eq!(c("(x^3)^(1/3)"), c("x"));
        assert_ne!(c("(x^2)^(1/2)"), c("x"));
    }

    #[test]
    fn exp_and_log_rules() {
        assert_eq!(c("exp(0)"), Expr::one());
        assert_eq!(c("exp(x)*exp(-x)"), Expr::one());
        assert_eq!(c("exp(log(x))"), c("x"));
        assert_eq!(c("log(exp(x + y))"), c("x + y"));
        assert_eq!(c("log(1)"), Expr::zero());
        assert_eq!(c("exp(x)^2"), c("exp(2*x)"));
    }

    #[test]
    fn cancels_common_sum_factor() {
        assert_eq!(c("(x^2 - y^2)/(x + y)"), c("x - y"));
        assert_eq!(c("x/(x + y) + y/(x + y)"), Expr::one());
        assert_eq!(c("(2*x + 2*y)^-1"), c("1/2*(x + y)^-1"));
    }

    #[test]
    fn constant_roots() {
        assert_eq!(c("4^(1/2)"), Expr::int(2));
        assert_eq!(c("(4*x^2)^(-1/2)"), c("(4*x^2)^(-1/2)"));
        assert_eq!(c("(9*x)^(1/2)"), c("3*x^(1/2)"));
    }
}
