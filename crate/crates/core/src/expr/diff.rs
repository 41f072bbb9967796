use num_traits::One;

use super::{Expr, Symbol};

pub(super) fn differentiate(e: &Expr, v: &Symbol) -> Expr {
    raw(e, v).canonical()
}

fn raw(e: &Expr, v: &Symbol) -> Expr {
    if !e.contains(v) {
        return Expr::zero();
    }
    match e {
        Expr::Const(_) => Expr::zero(),
        Expr::Var(s) => {
            if s == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Pow(b, q) => Expr::Product(vec![
            Expr::Const(q.clone()),
            Expr::Pow(b.clone(), q - super::Rational::one()),
            raw(b, v),
        ]),
        Expr::Exp(a) => Expr::Product(vec![e.clone(), raw(a, v)]),
        Expr::Log(a) => Expr::Product(vec![Expr::Pow(a.clone(), -super::Rational::one()), raw(a, v)]),
        Expr::Sum(xs) => Expr::Sum(xs.iter().map(|x| raw(x, v)).collect()),
        Expr::Product(xs) => {
            let mut terms = Vec::with_capacity(xs.len());
            for i in 0..xs.len() {
                if !xs[i].contains(v) {
                    continue;
                }
                let mut factors = xs.clone();
                factors[i] = raw(&xs[i], v);
                terms.push(Expr::Product(factors));
            }
            Expr::Sum(terms)
        }
    }
}
