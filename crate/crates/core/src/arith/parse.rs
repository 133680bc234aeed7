//! Textual element syntax: `2*t^3+t+1`, `(t+1)/(t^2)`, `z+1` for constants
//! of `F_q`, and `u^3+t*u^9+O(u^27)` for series.

use super::{ArithError, Field, FqAlgebra, Ring, Series, SeriesCtx, Var};

type Inv<'a, R> = Option<&'a dyn Fn(&R) -> Result<R, ArithError>>;

struct Parser<'a, R: FqAlgebra> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a R::Ctx,
    inv: Inv<'a, R>,
}

fn err(msg: impl Into<String>) -> ArithError {
    ArithError::Parse(msg.into())
}

impl<'a, R: FqAlgebra> Parser<'a, R> {
    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<u64, ArithError> {
        self.peek();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| err(format!("expected a number at offset {start}")))
    }

    fn expr(&mut self) -> Result<R, ArithError> {
        let negate = self.eat(b'-');
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<R, ArithError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat(b'/') {
                let d = self.factor()?;
                let inv = self.inv.ok_or_else(|| err("division is not available here"))?;
                acc = acc.mul(&inv(&d)?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<R, ArithError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.number()?;
            Ok(base.pow(e))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<R, ArithError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(err("unbalanced parenthesis"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.number()?;
                let p = R::characteristic(self.ctx);
                Ok(R::from_int(self.ctx, (n % p) as i64))
            }
            Some(b'z') => {
                self.pos += 1;
                let desc = R::constant_field(self.ctx);
                if desc.is_prime_field() {
                    return Err(err("`z` used over a prime field"));
                }
                Ok(R::from_fq(self.ctx, desc.generator()))
            }
            Some(c @ (b't' | b'u' | b'v')) => {
                self.pos += 1;
                let v = match c {
                    b't' => Var::T,
                    b'u' => Var::U,
                    _ => Var::V,
                };
                R::var(self.ctx, v).ok_or_else(|| err(format!("variable {v} is not in this ring")))
            }
            Some(c) => Err(err(format!("unexpected `{}` at offset {}", c as char, self.pos))),
            None => Err(err("unexpected end of input")),
        }
    }
}

fn run<R: FqAlgebra>(s: &str, ctx: &R::Ctx, inv: Inv<'_, R>) -> Result<R, ArithError> {
    let mut p = Parser { src: s.as_bytes(), pos: 0, ctx, inv };
    let v = p.expr()?;
    if p.peek().is_some() {
        return Err(err(format!("trailing input at offset {}", p.pos)));
    }
    Ok(v)
}

/// Parses an element of a ring; `/` is rejected.
pub fn parse_ring<R: FqAlgebra>(s: &str, ctx: &R::Ctx) -> Result<R, ArithError> {
    run(s, ctx, None)
}

/// Parses an element of a field, allowing `/`.
pub fn parse_field<R: FqAlgebra + Field>(s: &str, ctx: &R::Ctx) -> Result<R, ArithError> {
    run(s, ctx, Some(&|x: &R| x.inv()))
}

/// Parses `... + O(u^N)`; without an `O` term the series is exact.
/// Division is allowed by constants only.
pub fn parse_series<F: FqAlgebra + Field>(s: &str, ctx: &SeriesCtx<F::Ctx>) -> Result<Series<F>, ArithError> {
    let (body, prec) = match s.find("O(") {
        Some(i) => {
            let tail = s[i + 2..].trim_end();
            let inner = tail.strip_suffix(')').ok_or_else(|| err("unterminated O(...)"))?;
            let inner = inner.trim();
            let name = ctx.var.name();
            let n = if inner == "1" {
                0
            } else if inner == name {
                1
            } else {
                inner
                    .strip_prefix(name)
                    .and_then(|r| r.trim().strip_prefix('^'))
                    .and_then(|r| r.trim().parse::<usize>().ok())
                    .ok_or_else(|| err(format!("bad precision term O({inner})")))?
            };
            let body = s[..i].trim_end();
            let body = body.strip_suffix('+').unwrap_or(body).trim_end();
            (body, Some(n))
        }
        None => (s, None),
    };
    let inv = |x: &Series<F>| -> Result<Series<F>, ArithError> {
        match x.coeffs() {
            [c] => Ok(Series::constant(ctx.var, c.inv()?)),
            [] => Err(ArithError::DivisionByZero),
            _ => Err(err("series division by a non-constant")),
        }
    };
    let v = if body.is_empty() { Series::zero(ctx) } else { run(body, ctx, Some(&inv))? };
    Ok(match prec {
        Some(n) => v.truncate(n),
        None => v,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{FieldDescriptor, Fq, Poly, RatFunc};

    #[test]
    fn round_trips() {
        let f3 = FieldDescriptor::prime(3).unwrap();
        let p: Poly<Fq> = parse_ring("2*t^3+t+1", &Poly::<Fq>::x(Var::T, f3).ctx()).unwrap();
        assert_eq!(p.to_string(), "2*t^3+t+1");
        let kctx = RatFunc::<Fq>::x(Var::T, f3).ctx();
        let r: RatFunc<Fq> = parse_field("(t^2-1)/(t-1)", &kctx).unwrap();
        assert_eq!(r.to_string(), "t+1");
        let r: RatFunc<Fq> = parse_field("(t+1)/(t)", &kctx).unwrap();
        assert_eq!(parse_field::<RatFunc<Fq>>(&r.to_string(), &kctx).unwrap(), r);
        assert!(parse_ring::<Poly<Fq>>("1/t", &p.ctx()).is_err());
        assert!(parse_ring::<Poly<Fq>>("u", &p.ctx()).is_err());
    }

    #[test]
    fn extension_scalars() {
        let f4 = FieldDescriptor::gf4();
        let z: Fq = parse_field("z^2", &f4).unwrap();
        assert_eq!(z.to_string(), "z+1");
    }

    #[test]
    fn series_syntax() {
        let f3 = FieldDescriptor::prime(3).unwrap();
        let kctx = RatFunc::<Fq>::x(Var::T, f3).ctx();
        let sctx = SeriesCtx { var: Var::U, base: kctx };
        let s = parse_series::<RatFunc<Fq>>("u^3+t*u^9+O(u^27)", &sctx).unwrap();
        assert_eq!(s.precision(), Some(27));
        assert_eq!(s.valuation(), Some(3));
        assert_eq!(s.to_string(), "u^3+t*u^9+O(u^27)");
        let e = parse_series::<RatFunc<Fq>>("(1/t)*u", &sctx).unwrap();
        assert!(e.is_exact());
    }
}
