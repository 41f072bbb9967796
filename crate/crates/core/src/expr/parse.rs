//! Recursive-descent parser for the ASCII expression language.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := ('-'|'+') unary | factor
//! factor := atom ('^' exponent)?
//! exponent := signed_rational | '(' signed_rational ')'
//! atom   := number | ident | '(' expr ')' | ('exp'|'log') '(' expr ')'
//! ```
//!
//! A number may be written `p/q` only inside an exponent; elsewhere `/` is
//! division, which gives the same value. Decimal literals are read exactly.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Expr, Rational, Symbol};
use crate::error::{Error, Result};

/// Parse into canonical form.
pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text, pos: 0 };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e.canonical())
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax {
            position: self.pos,
            message: message.to_string(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                let t = self.term()?;
                terms.push(Expr::Product(vec![Expr::int(-1), t]));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Sum(terms)
        })
    }

    fn term(&mut self) -> Result<Expr> {
        let mut factors = vec![self.unary()?];
        loop {
            if self.eat('*') {
                factors.push(self.unary()?);
            } else if self.eat('/') {
                let f = self.unary()?;
                factors.push(Expr::Pow(Box::new(f), -Rational::one()));
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Product(factors)
        })
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            let e = self.unary()?;
            return Ok(Expr::Product(vec![Expr::int(-1), e]));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let q = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), q));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Rational> {
        if self.eat('(') {
            let q = self.signed_rational()?;
            self.expect(')')?;
            return Ok(q);
        }
        self.signed_rational()
    }

    fn signed_rational(&mut self) -> Result<Rational> {
        let negative = if self.eat('-') {
            true
        } else {
            self.eat('+');
            false
        };
        self.skip_ws();
        let num = self
            .integer()
            .ok_or_else(|| self.error("expected rational exponent"))?;
        let mut q = Rational::from_integer(num);
        // Only treat `/` as part of the exponent when an integer follows.
        let save = self.pos;
        if self.eat('/') {
            self.skip_ws();
            match self.integer() {
                Some(d) if !d.is_zero() => q /= Rational::from_integer(d),
                Some(_) => return Err(self.error("zero denominator in exponent")),
                None => self.pos = save,
            }
        }
        Ok(if negative { -q } else { q })
    }

    fn integer(&mut self) -> Option<BigInt> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        self.src[start..self.pos].parse().ok()
    }

    fn number(&mut self) -> Result<Expr> {
        let whole = self.integer().unwrap_or_default();
        let mut value = Rational::from_integer(whole);
        if self.peek() == Some('.') {
            self.pos += 1;
            let start = self.pos;
            let frac = self.integer().ok_or_else(|| self.error("expected digits after `.`"))?;
            let digits = (self.pos - start) as u32;
            let scale = BigInt::from(10u32).pow(digits);
            value += Rational::new(frac, scale);
        }
        Ok(Expr::Const(value))
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        let c = match self.peek() {
            Some(c) => c,
            None => return Err(self.error("unexpected end of input")),
        };
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c == '(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        if c.is_alphabetic() {
            let start = self.pos;
            while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
                self.pos += self.peek().unwrap().len_utf8();
            }
            if self.peek() == Some('\'') {
                self.pos += 1;
            }
            let name = &self.src[start..self.pos];
            let save = self.pos;
            self.skip_ws();
            if self.peek() == Some('(') {
                let func = name.to_string();
                return match func.as_str() {
                    "exp" | "log" => {
                        self.pos += 1;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(if func == "exp" {
                            Expr::Exp(Box::new(arg))
                        } else {
                            Expr::Log(Box::new(arg))
                        })
                    }
                    _ => Err(Error::Syntax {
                        position: start,
                        message: format!("unknown function `{func}`"),
                    }),
                };
            }
            self.pos = save;
            return Ok(Expr::Var(Symbol::new(name)));
        }
        Err(self.error(&format!("unexpected character `{c}`")))
    }
}
