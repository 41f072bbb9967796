use std::fmt;

use num_traits::{One, Signed};

use super::{Expr, Rational};

fn write_rational(f: &mut fmt::Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

/// Base of a power or factor of a product: parenthesize anything that is not
/// a bare symbol, function call or non-negative integer.
fn write_atom(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Var(_) | Expr::Exp(_) | Expr::Log(_) => write!(f, "{e}"),
        Expr::Const(c) if c.is_integer() && !c.is_negative() => write!(f, "{e}"),
        _ => write!(f, "({e})"),
    }
}

fn write_factor(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Sum(_) | Expr::Product(_) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}

/// Sign and magnitude of a canonical term, for printing ` - ` in sums.
fn split_sign(e: &Expr) -> (bool, Expr) {
    match e {
        Expr::Const(c) if c.is_negative() => (true, Expr::Const(-c)),
        Expr::Product(xs) => match xs.first() {
            Some(Expr::Const(c)) if c.is_negative() => {
                let mut rest = xs.clone();
                let mag = -c;
                if mag.is_one() {
                    rest.remove(0);
                } else {
                    rest[0] = Expr::Const(mag);
                }
                let e = if rest.len() == 1 {
                    rest.pop().unwrap()
                } else {
                    Expr::Product(rest)
                };
                (true, e)
            }
            _ => (false, e.clone()),
        },
        _ => (false, e.clone()),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_rational(f, c),
            Expr::Var(s) => write!(f, "{s}"),
            Expr::Pow(b, q) => {
                write_atom(f, b)?;
                write!(f, "^")?;
                write_rational(f, q)
            }
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Product(xs) => {
                let mut first = true;
                for (i, x) in xs.iter().enumerate() {
                    if i == 0 {
                        if let Expr::Const(c) = x {
                            if (-c).is_one() {
                                write!(f, "-")?;
                                continue;
                            }
                            write_rational(f, c)?;
                            first = false;
                            continue;
                        }
                    }
                    if !first {
                        write!(f, "*")?;
                    }
                    write_factor(f, x)?;
                    first = false;
                }
                Ok(())
            }
            Expr::Sum(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    let (neg, mag) = split_sign(x);
                    match (i, neg) {
                        (0, true) => write!(f, "-")?,
                        (0, false) => {}
                        (_, true) => write!(f, " - ")?,
                        (_, false) => write!(f, " + ")?,
                    }
                    write_factor_in_sum(f, &mag)?;
                }
                Ok(())
            }
        }
    }
}

fn write_factor_in_sum(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Sum(_) => write!(f, "({e})"),
        _ => write!(f, "{e}"),
    }
}
