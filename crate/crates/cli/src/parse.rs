//! Text forms of numbers accepted on the command line.
//!
//! Reals are sums of products of decimals, `p/q` quotients and `sqrt(k)` for
//! integers `0 <= k <= 10^6`: `1/2`, `sqrt(2) - 1`, `3*sqrt(5)/2`. Complex
//! numbers are `a+bi`, `bi`, `i` or a real.

use num_complex::Complex64 as C64;
use shilov::group::{BoundaryPoint, RealMatrix};

pub type ParseResult<T> = std::result::Result<T, String>;

struct Expr<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Expr<'a> {
    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.s.get(self.pos).copied()
    }

    fn sum(&mut self) -> ParseResult<f64> {
        let mut v = self.product()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.product()?;
            v = if c == b'+' { v + t } else { v - t };
        }
        Ok(v)
    }

    fn product(&mut self) -> ParseResult<f64> {
        let mut v = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let t = self.unary()?;
            v = if c == b'*' { v * t } else { v / t };
        }
        Ok(v)
    }

    fn unary(&mut self) -> ParseResult<f64> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> ParseResult<f64> {
        let rest = &self.s[self.pos..];
        if rest.starts_with(b"sqrt(") {
            self.pos += 5;
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos] != b')' {
                self.pos += 1;
            }
            let inner = std::str::from_utf8(&self.s[start..self.pos]).unwrap().trim();
            if self.pos == self.s.len() {
                return Err("unclosed sqrt(".into());
            }
            self.pos += 1;
            let k: u64 = inner.parse().map_err(|_| format!("sqrt takes an integer, got {inner:?}"))?;
            if k > 1_000_000 {
                return Err(format!("sqrt({k}): argument above 10^6"));
            }
            return Ok((k as f64).sqrt());
        }
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let v = self.sum()?;
            if self.peek() != Some(b')') {
                return Err("missing )".into());
            }
            self.pos += 1;
            return Ok(v);
        }
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            let exp_sign = (c == b'+' || c == b'-') && self.pos > start && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        let tok = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
        tok.parse::<f64>().map_err(|_| format!("expected a number at {:?}", std::str::from_utf8(rest).unwrap()))
    }
}

pub fn real(s: &str) -> ParseResult<f64> {
    let mut e = Expr { s: s.trim().as_bytes(), pos: 0 };
    let v = e.sum().map_err(|m| format!("{s:?}: {m}"))?;
    if e.peek().is_some() {
        return Err(format!("{s:?}: trailing input"));
    }
    if !v.is_finite() {
        return Err(format!("{s:?} is not finite"));
    }
    Ok(v)
}

/// `a+bi`, `a-bi`, `bi`, `i`, `-i`, or a real expression.
pub fn complex(s: &str) -> ParseResult<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(C64::new(real(&t)?, 0.0));
    };
    // split at the last top-level sign that is not part of an exponent
    let bytes = body.as_bytes();
    let mut split = None;
    let mut depth = 0i32;
    for (k, &c) in bytes.iter().enumerate() {
        match c {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 && k > 0 && !matches!(bytes[k - 1], b'e' | b'E' | b'*' | b'/') => split = Some(k),
            _ => {}
        }
    }
    let coef = |s: &str| -> ParseResult<f64> {
        match s {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => real(s.strip_suffix('*').unwrap_or(s)),
        }
    };
    match split {
        Some(k) => Ok(C64::new(real(&body[..k])?, coef(&body[k..])?)),
        None => Ok(C64::new(0.0, coef(body)?)),
    }
}

pub fn upper(s: &str) -> ParseResult<C64> {
    let z = complex(s)?;
    if !(z.im > 0.0) {
        return Err(format!("{s:?} is not in the upper half-plane"));
    }
    Ok(z)
}

/// Comma-separated list.
pub fn list<T>(s: &str, item: impl Fn(&str) -> ParseResult<T>) -> ParseResult<Vec<T>> {
    s.split(',').filter(|x| !x.trim().is_empty()).map(|x| item(x.trim())).collect()
}

/// `p/q` and integers stay exact; `inf` is the cusp; anything else is real.
pub fn boundary(s: &str) -> ParseResult<BoundaryPoint> {
    let t = s.trim();
    if t == "inf" || t == "infinity" {
        return Ok(BoundaryPoint::Infinity);
    }
    let exact = |x: &str| x.trim().parse::<i64>().ok();
    let parts: Vec<&str> = t.split('/').collect();
    match parts.as_slice() {
        [p] if exact(p).is_some() => return BoundaryPoint::rational(exact(p).unwrap(), 1).map_err(|e| e.to_string()),
        [p, q] if exact(p).is_some() && exact(q).is_some() => {
            let q = exact(q).unwrap();
            if q == 0 {
                return Err(format!("{t:?}: zero denominator"));
            }
            return BoundaryPoint::rational(exact(p).unwrap(), q).map_err(|e| e.to_string());
        }
        _ => {}
    }
    Ok(BoundaryPoint::Real(real(t)?))
}

/// `a,b,c,d` with `ad - bc = 1`.
pub fn matrix(s: &str) -> ParseResult<RealMatrix> {
    let v = list(s, real)?;
    let [a, b, c, d] = v.as_slice() else {
        return Err(format!("{s:?}: a matrix needs four entries a,b,c,d"));
    };
    RealMatrix::new(*a, *b, *c, *d).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(real("1/2").unwrap(), 0.5);
        assert_eq!(real("sqrt(2)-1").unwrap(), 2f64.sqrt() - 1.0);
        assert_eq!(real("-3*sqrt(5)/2").unwrap(), -3.0 * 5f64.sqrt() / 2.0);
        assert_eq!(real("1e-3").unwrap(), 1e-3);
        assert_eq!(real("2.5E+2").unwrap(), 250.0);
        assert!(real("sqrt(2000000)").is_err());
        assert!(real("sqrt(x)").is_err());
        assert!(real("1/0").is_err());
        assert!(real("2 3").is_err());
    }

    #[test]
    fn complexes() {
        assert_eq!(complex("0+1i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(complex("0.3 - 0.8i").unwrap(), C64::new(0.3, -0.8));
        assert_eq!(complex("1e-3+2e-3i").unwrap(), C64::new(1e-3, 2e-3));
        assert_eq!(complex("1/2+sqrt(3)/2i").unwrap(), C64::new(0.5, 3f64.sqrt() / 2.0));
        assert_eq!(complex("1728").unwrap(), C64::new(1728.0, 0.0));
        assert_eq!(complex("-2.5i").unwrap(), C64::new(0.0, -2.5));
        assert!(upper("1-i").is_err());
    }

    #[test]
    fn boundary_points() {
        assert_eq!(boundary("1/2").unwrap(), BoundaryPoint::Rational(1, 2));
        assert_eq!(boundary("2/4").unwrap(), BoundaryPoint::Rational(1, 2));
        assert_eq!(boundary("-3").unwrap(), BoundaryPoint::Rational(-3, 1));
        assert_eq!(boundary("inf").unwrap(), BoundaryPoint::Infinity);
        assert_eq!(boundary("sqrt(2)-1").unwrap(), BoundaryPoint::Real(2f64.sqrt() - 1.0));
        assert!(boundary("1/0").is_err());
    }

    #[test]
    fn matrices() {
        let g = matrix("1,sqrt(2),0,1").unwrap();
        assert_eq!(g.b, 2f64.sqrt());
        assert!(matrix("1,1,1,1").is_err());
        assert!(matrix("1,0,1").is_err());
    }
}
