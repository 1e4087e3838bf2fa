//! Quadratic (CM) points, reduced binary quadratic forms and Hilbert class
//! polynomials.

use crate::group::reduce_to_fundamental_domain;
use crate::modular::precise::{self, Precise, PreciseComplex};
use crate::solver::Witness;
use crate::{Error, Result, C64};
use num_bigint::BigInt;
use num_integer::Integer;
use std::fmt;

/// `a x^2 + b x y + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadraticForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadraticForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_primitive(&self) -> bool {
        self.a.gcd(&self.b).gcd(&self.c) == 1
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        self.discriminant() < 0 && b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    pub fn height(&self) -> i64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }

    /// The root `(-b + sqrt(D)) / (2a)` in the upper half-plane (`a > 0`).
    pub fn tau(&self) -> C64 {
        let d = self.discriminant() as f64;
        C64::new(-self.b as f64, (-d).sqrt()) / (2.0 * self.a as f64)
    }

    pub fn eval(&self, tau: C64) -> C64 {
        (self.a as f64 * tau + self.b as f64) * tau + self.c as f64
    }
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

/// Outcome of [`is_quadratic`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialFlag {
    pub point: C64,
    pub form: Option<QuadraticForm>,
    /// `|a tau^2 + b tau + c|` for the form found.
    pub residual: Option<f64>,
    /// A form was found and its root lies within `tol` of the point.
    pub certified: bool,
}

/// Smallest-height `(a, b, c)` with `a > 0`, `b^2 - 4ac < 0`, all entries at
/// most `coef_bound` in size, and `|a tau^2 + b tau + c| < tol`. Ties in height
/// are broken lexicographically.
pub fn is_quadratic(tau: C64, coef_bound: i64, tol: f64) -> Result<SpecialFlag> {
    if !(tau.im > 0.0) {
        return Err(Error::Precondition("point must lie in the upper half-plane".into()));
    }
    let mut best: Option<(QuadraticForm, f64)> = None;
    let t2 = tau * tau;
    for a in 1..=coef_bound {
        for b in -coef_bound..=coef_bound {
            let partial = a as f64 * t2 + b as f64 * tau;
            // c must cancel the real part; only the nearest integers can
            let c0 = (-partial.re).round() as i64;
            for c in [c0 - 1, c0, c0 + 1] {
                if c.abs() > coef_bound || b * b - 4 * a * c >= 0 {
                    continue;
                }
                let q = QuadraticForm::new(a, b, c);
                let r = (partial + c as f64).norm();
                if r < tol {
                    let better = match &best {
                        None => true,
                        Some((f, _)) => (q.height(), q) < (f.height(), *f),
                    };
                    if better {
                        best = Some((q, r));
                    }
                }
            }
        }
    }
    Ok(match best {
        Some((f, r)) => SpecialFlag {
            point: tau,
            form: Some(f),
            residual: Some(r),
            certified: (f.tau() - tau).norm() <= tol,
        },
        None => SpecialFlag { point: tau, form: None, residual: None, certified: false },
    })
}

/// The primitive reduced forms of discriminant `d`; their number is `h(d)`.
pub fn reduced_forms(d: i64) -> Result<Vec<QuadraticForm>> {
    if d >= 0 || !(d.rem_euclid(4) == 0 || d.rem_euclid(4) == 1) {
        return Err(Error::InvalidDiscriminant(d));
    }
    let mut out = Vec::new();
    let amax = ((-d) as f64 / 3.0).sqrt().floor() as i64 + 1;
    for a in 1..=amax {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let f = QuadraticForm::new(a, b, num / (4 * a));
            if f.is_reduced() && f.is_primitive() {
                out.push(f);
            }
        }
    }
    Ok(out)
}

/// Options for [`class_polynomial`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassPolynomialConfig {
    /// Largest `|D|` accepted.
    pub max_abs_discriminant: i64,
    /// Working precision in bits; `None` picks one from the size of the roots.
    pub precision_bits: Option<usize>,
    /// q-series terms; `None` picks enough for the working precision.
    pub truncation: Option<usize>,
    /// Largest acceptable rounding gap.
    pub max_gap: f64,
}

impl Default for ClassPolynomialConfig {
    fn default() -> Self {
        ClassPolynomialConfig { max_abs_discriminant: 200, precision_bits: None, truncation: None, max_gap: 0.1 }
    }
}

/// `H_D` with rounding diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPolynomial {
    pub discriminant: i64,
    pub forms: Vec<QuadraticForm>,
    /// Ascending; monic of degree `h(D)`.
    pub coefficients: Vec<BigInt>,
    /// Largest distance of a computed coefficient from its rounding,
    /// imaginary parts included.
    pub max_gap: f64,
    pub precision_bits: usize,
    pub truncation: usize,
    /// `j(tau_Q)` in double precision, one per form.
    pub roots: Vec<C64>,
}

impl ClassPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// `H_D(X) = prod_Q (X - j(tau_Q))` over the reduced forms of discriminant
/// `d`, computed in multiple precision and rounded to integers.
pub fn class_polynomial(d: i64, cfg: &ClassPolynomialConfig) -> Result<ClassPolynomial> {
    let forms = reduced_forms(d)?;
    if -d > cfg.max_abs_discriminant {
        return Err(Error::Precondition(format!(
            "|D| = {} exceeds the configured limit {}",
            -d, cfg.max_abs_discriminant
        )));
    }
    // log2 |j(tau_Q)| ~ pi sqrt|D| / a / ln 2; the product needs the sum
    let size_bits: f64 =
        forms.iter().map(|f| std::f64::consts::PI * ((-d) as f64).sqrt() / f.a as f64 / std::f64::consts::LN_2).sum();
    let bits = cfg.precision_bits.unwrap_or_else(|| (size_bits * 1.5) as usize + 128).max(128);
    // |q| <= exp(-pi sqrt 3) loses about 7.85 bits per term
    let truncation = cfg.truncation.unwrap_or(bits / 7 + 10);
    let mut ctx = Precise::new(bits)?;
    let mut poly: Vec<PreciseComplex> = vec![ctx.cx_int(1)];
    let mut roots = Vec::with_capacity(forms.len());
    for f in &forms {
        let j = ctx.j_at_form(f.a, f.b, d, truncation)?;
        roots.push(C64::new(precise::to_f64(&j.re), precise::to_f64(&j.im)));
        // multiply by (X - j)
        let mut next = vec![ctx.cx_int(0); poly.len() + 1];
        for (k, c) in poly.iter().enumerate() {
            next[k + 1] = ctx.add(&next[k + 1], c);
            next[k] = ctx.sub(&next[k], &ctx.mul(c, &j));
        }
        poly = next;
    }
    let mut coefficients = Vec::with_capacity(poly.len());
    let mut max_gap = 0.0f64;
    for c in &poly {
        let (r, gap) = ctx.round_to_integer(&c.re);
        max_gap = max_gap.max(gap).max(precise::to_f64(&c.im).abs());
        coefficients.push(r);
    }
    if !(max_gap <= cfg.max_gap) {
        return Err(Error::PrecisionInsufficient { gap: max_gap });
    }
    Ok(ClassPolynomial { discriminant: d, forms, coefficients, max_gap, precision_bits: bits, truncation, roots })
}

/// One scanned witness.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub z: C64,
    /// Representative in the fundamental domain that was tested.
    pub reduced: C64,
    pub flag: SpecialFlag,
}

/// Outcome of [`special_scan`]. An experiment log, not a verdict on
/// special points in general.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub total: usize,
    pub flagged: usize,
    pub entries: Vec<ScanEntry>,
    pub coef_bound: i64,
    pub tol: f64,
}

/// Flags the quadratic points among `points`. Being quadratic is invariant
/// under `SL2(Z)`, so each point is tested at its reduced representative,
/// where the defining form has the smallest coefficients.
pub fn special_scan_points(points: &[C64], coef_bound: i64, tol: f64) -> Result<ScanReport> {
    let mut entries = Vec::with_capacity(points.len());
    for &z in points {
        let (reduced, _) = reduce_to_fundamental_domain(z)?;
        let flag = is_quadratic(reduced, coef_bound, tol)?;
        entries.push(ScanEntry { z, reduced, flag });
    }
    let flagged = entries.iter().filter(|e| e.flag.form.is_some()).count();
    Ok(ScanReport { total: entries.len(), flagged, entries, coef_bound, tol })
}

pub fn special_scan(witnesses: &[Witness], coef_bound: i64, tol: f64) -> Result<ScanReport> {
    special_scan_points(&witnesses.iter().map(|w| w.z).collect::<Vec<_>>(), coef_bound, tol)
}
