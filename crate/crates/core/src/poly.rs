//! Bivariate polynomials `P(z, w)` with complex coefficients, a small text
//! parser, and a univariate root finder.

use crate::{Error, Result, C64, I};
use std::collections::BTreeMap;
use std::fmt;

/// `P(z, w) = sum c_{jk} z^j w^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), C64>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly::default()
    }

    pub fn constant(c: C64) -> Self {
        BiPoly::zero().with_term(0, 0, c)
    }

    pub fn z() -> Self {
        BiPoly::zero().with_term(1, 0, C64::new(1.0, 0.0))
    }

    pub fn w() -> Self {
        BiPoly::zero().with_term(0, 1, C64::new(1.0, 0.0))
    }

    /// Adds `c z^dz w^dw`.
    pub fn with_term(mut self, dz: u32, dw: u32, c: C64) -> Self {
        *self.terms.entry((dz, dw)).or_default() += c;
        self.prune();
        self
    }

    /// Terms as `((deg_z, deg_w), coefficient)`, graded lexicographically.
    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &C64)> {
        self.terms.iter()
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| *c != C64::new(0.0, 0.0));
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree_w(&self) -> u32 {
        self.terms.keys().map(|k| k.1).max().unwrap_or(0)
    }

    pub fn degree_z(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    /// True when some term involves `w`, i.e. the curve `P = 0` projects
    /// dominantly to the `z`-line.
    pub fn depends_on_w(&self) -> bool {
        self.degree_w() > 0
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &o.terms {
            *out.terms.entry(*k).or_default() += c;
        }
        out.prune();
        out
    }

    pub fn neg(&self) -> Self {
        BiPoly { terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = BiPoly::zero();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &o.terms {
                *out.terms.entry((a1 + a2, b1 + b2)).or_default() += c1 * c2;
            }
        }
        out.prune();
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(BiPoly::constant(C64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, z: C64, w: C64) -> C64 {
        self.terms.iter().map(|((a, b), c)| c * z.powu(*a) * w.powu(*b)).sum()
    }

    /// `(P, dP/dz, dP/dw)` at `(z, w)`.
    pub fn eval_with_partials(&self, z: C64, w: C64) -> (C64, C64, C64) {
        let mut v = C64::new(0.0, 0.0);
        let mut dz = v;
        let mut dw = v;
        for ((a, b), c) in &self.terms {
            let (za, wb) = (z.powu(*a), w.powu(*b));
            v += c * za * wb;
            if *a > 0 {
                dz += c * (*a as f64) * z.powu(a - 1) * wb;
            }
            if *b > 0 {
                dw += c * (*b as f64) * za * w.powu(b - 1);
            }
        }
        (v, dz, dw)
    }

    /// Coefficients of `P(z, ·)` as a polynomial in `w`, ascending.
    pub fn coefficients_in_w(&self, z: C64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.degree_w() as usize + 1];
        for ((a, b), c) in &self.terms {
            out[*b as usize] += c * z.powu(*a);
        }
        out
    }

    /// Roots of `P(z, ·)`.
    pub fn roots_in_w(&self, z: C64) -> Result<Vec<C64>> {
        roots(&self.coefficients_in_w(z))
    }

    pub fn parse(s: &str) -> Result<Self> {
        Parser::new(s)?.parse()
    }
}

fn fmt_coeff(c: &C64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.re == 0.0 {
        format!("{}*i", c.im)
    } else {
        format!("({} + {}*i)", c.re, c.im)
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|((a, b), c)| {
                let mut s = fmt_coeff(c);
                for (v, e) in [("z", a), ("w", b)] {
                    match e {
                        0 => {}
                        1 => s.push_str(&format!("*{v}")),
                        e => s.push_str(&format!("*{v}^{e}")),
                    }
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(char),
    Op(char),
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn new(s: &str) -> Result<Self> {
        let mut toks = Vec::new();
        let cs: Vec<char> = s.chars().collect();
        let mut i = 0;
        while i < cs.len() {
            let ch = cs[i];
            if ch.is_whitespace() {
                i += 1;
            } else if ch.is_ascii_digit() || ch == '.' {
                let start = i;
                while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                    i += 1;
                }
                if i < cs.len() && (cs[i] == 'e' || cs[i] == 'E') {
                    let mut k = i + 1;
                    if k < cs.len() && (cs[k] == '+' || cs[k] == '-') {
                        k += 1;
                    }
                    if k < cs.len() && cs[k].is_ascii_digit() {
                        i = k;
                        while i < cs.len() && cs[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = cs[start..i].iter().collect();
                let v = text.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{text}'")))?;
                toks.push(Tok::Num(v));
            } else if matches!(ch, 'z' | 'w' | 'i') {
                toks.push(Tok::Var(ch));
                i += 1;
            } else if matches!(ch, '+' | '-' | '*' | '^' | '(' | ')') {
                toks.push(Tok::Op(ch));
                i += 1;
            } else {
                return Err(Error::Parse(format!("unexpected character '{ch}' in polynomial")));
            }
        }
        Ok(Parser { toks, pos: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn parse(mut self) -> Result<BiPoly> {
        if self.toks.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let p = self.expr()?;
        if let Some(t) = self.peek() {
            return Err(Error::Parse(format!("trailing input at {t:?}")));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<BiPoly> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<BiPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                // juxtaposition: "2z", "z w", "3(z + 1)"
                Some(Tok::Num(_)) | Some(Tok::Var(_)) | Some(Tok::Op('(')) => {
                    acc = acc.mul(&self.power()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<BiPoly> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<BiPoly> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(e)) if e >= 0.0 && e.fract() == 0.0 && e <= 64.0 => {
                    self.pos += 1;
                    return Ok(base.pow(e as u32));
                }
                t => return Err(Error::Parse(format!("exponent must be a small non-negative integer, got {t:?}"))),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<BiPoly> {
        let t = self.peek().cloned();
        self.pos += 1;
        match t {
            Some(Tok::Num(v)) => Ok(BiPoly::constant(C64::new(v, 0.0))),
            Some(Tok::Var('z')) => Ok(BiPoly::z()),
            Some(Tok::Var('w')) => Ok(BiPoly::w()),
            Some(Tok::Var(_)) => Ok(BiPoly::constant(I)),
            Some(Tok::Op('(')) => {
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(Error::Parse("missing ')'".into())),
                }
            }
            t => Err(Error::Parse(format!("unexpected token {t:?}"))),
        }
    }
}

/// Evaluates `sum c_k x^k` and its derivative.
pub fn horner(coeffs: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::new(0.0, 0.0);
    let mut dp = p;
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// All complex roots of `sum c_k x^k` (ascending coefficients) by
/// Aberth–Ehrlich iteration followed by Newton polishing.
pub fn roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Precondition("zero polynomial has no isolated roots".into()));
    }
    let mut deg = coeffs.len() - 1;
    while deg > 0 && coeffs[deg].norm() <= 1e-14 * scale {
        deg -= 1;
    }
    let c = &coeffs[..=deg];
    match deg {
        0 => return Ok(vec![]),
        1 => return Ok(vec![-c[0] / c[1]]),
        _ => {}
    }
    // initial points on a circle of the Cauchy-bound radius
    let lead = c[deg].norm();
    let radius = 1.0 + c[..deg].iter().map(|x| x.norm() / lead).fold(0.0, f64::max);
    let r0 = radius.min(
        c[..deg]
            .iter()
            .enumerate()
            .filter(|(_, x)| x.norm() > 0.0)
            .map(|(k, x)| (x.norm() / lead).powf(1.0 / (deg - k) as f64))
            .fold(0.0, f64::max)
            .max(1e-3),
    );
    let mut z: Vec<C64> = (0..deg)
        .map(|k| C64::from_polar(r0, 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..deg {
            let (p, dp) = horner(c, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulse: C64 = (0..deg).filter(|&m| m != k).map(|m| 1.0 / (z[k] - z[m])).sum();
            let step = ratio / (1.0 - ratio * repulse);
            if step.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = horner(c, *zk);
            let step = p / dp;
            if !step.is_finite() {
                break;
            }
            *zk -= step;
        }
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn parse_and_eval() {
        let p = BiPoly::parse("w - z").unwrap();
        assert_eq!(p.eval(c(2.0, 1.0), c(5.0, 0.0)), c(3.0, -1.0));
        let p = BiPoly::parse("z*w - 1").unwrap();
        assert_eq!(p.eval(c(2.0, 0.0), c(0.5, 0.0)), c(0.0, 0.0));
        let p = BiPoly::parse("(z + 2i)^2 - 3w^2 + 1.5e1").unwrap();
        let (z, w) = (c(0.3, -0.7), c(1.1, 0.2));
        let expect = (z + c(0.0, 2.0)).powu(2) - 3.0 * w * w + 15.0;
        assert_abs_diff_eq!((p.eval(z, w) - expect).norm(), 0.0, epsilon = 1e-13);
        assert_eq!(BiPoly::parse("w - 1728").unwrap().degree_w(), 1);
        assert!(!BiPoly::parse("z^2 + 1").unwrap().depends_on_w());
        assert_eq!(BiPoly::parse("2 z w").unwrap(), BiPoly::zero().with_term(1, 1, c(2.0, 0.0)));
    }

    #[test]
    fn parse_errors() {
        for bad in ["", "z +", "(z", "z^w", "x + 1", "z^-1"] {
            assert!(BiPoly::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn partials_match_finite_differences() {
        let p = BiPoly::parse("z^3 w - 2 z w^2 + i w + 7").unwrap();
        let (z, w) = (c(0.4, 0.9), c(-1.2, 0.3));
        let (_, dz, dw) = p.eval_with_partials(z, w);
        let h = 1e-6;
        let fz = (p.eval(z + h, w) - p.eval(z - h, w)) / (2.0 * h);
        let fw = (p.eval(z, w + h) - p.eval(z, w - h)) / (2.0 * h);
        assert!((dz - fz).norm() < 1e-8 && (dw - fw).norm() < 1e-8);
    }

    #[test]
    fn roots_of_known_polynomials() {
        // (x - 1)(x + 2)(x - 3i)
        let r = [c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 3.0)];
        let coeffs = [-r[0] * r[1] * r[2], r[0] * r[1] + r[0] * r[2] + r[1] * r[2], -(r[0] + r[1] + r[2]), c(1.0, 0.0)];
        let found = roots(&coeffs).unwrap();
        for want in r {
            assert!(found.iter().any(|z| (z - want).norm() < 1e-12), "{want}");
        }
        // x^5 - 1
        let mut coeffs = vec![c(0.0, 0.0); 6];
        coeffs[0] = c(-1.0, 0.0);
        coeffs[5] = c(1.0, 0.0);
        let found = roots(&coeffs).unwrap();
        assert_eq!(found.len(), 5);
        for z in found {
            assert!((z.powu(5) - 1.0).norm() < 1e-12);
        }
        assert_eq!(roots(&[c(3.0, 0.0)]).unwrap().len(), 0);
        assert!(roots(&[c(0.0, 0.0)]).is_err());
    }
}
