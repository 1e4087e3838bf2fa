//! Multi-precision `j` at imaginary quadratic points.
//!
//! Double precision cannot round class polynomial coefficients once the
//! `j`-values exceed ~1e13 (already at `|D| ~ 100`), so CM values are computed
//! here with `astro-float` at a caller-chosen precision.

use super::QSeries;
use crate::{Error, Result};
use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};
use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};

const RM: RoundingMode = RoundingMode::ToEven;
const WORD_BITS: usize = std::mem::size_of::<Word>() * 8;

/// Complex number with multi-precision parts.
#[derive(Debug, Clone)]
pub struct PreciseComplex {
    pub re: BigFloat,
    pub im: BigFloat,
}

/// Arithmetic context: precision in bits plus the constants cache.
pub struct Precise {
    p: usize,
    cc: Consts,
}

impl std::fmt::Debug for Precise {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Precise").field("bits", &self.p).finish()
    }
}

impl Precise {
    pub fn new(bits: usize) -> Result<Self> {
        let cc = Consts::new().map_err(|e| Error::Precondition(format!("constants cache: {e:?}")))?;
        Ok(Precise { p: bits.max(64), cc })
    }

    pub fn bits(&self) -> usize {
        self.p
    }

    pub fn int(&self, n: i64) -> BigFloat {
        BigFloat::from_i64(n, self.p)
    }

    pub fn cx(&self, re: BigFloat, im: BigFloat) -> PreciseComplex {
        PreciseComplex { re, im }
    }

    pub fn cx_int(&self, n: i64) -> PreciseComplex {
        PreciseComplex { re: self.int(n), im: self.int(0) }
    }

    pub fn add(&self, a: &PreciseComplex, b: &PreciseComplex) -> PreciseComplex {
        PreciseComplex { re: a.re.add(&b.re, self.p, RM), im: a.im.add(&b.im, self.p, RM) }
    }

    pub fn sub(&self, a: &PreciseComplex, b: &PreciseComplex) -> PreciseComplex {
        PreciseComplex { re: a.re.sub(&b.re, self.p, RM), im: a.im.sub(&b.im, self.p, RM) }
    }

    pub fn mul(&self, a: &PreciseComplex, b: &PreciseComplex) -> PreciseComplex {
        let p = self.p;
        PreciseComplex {
            re: a.re.mul(&b.re, p, RM).sub(&a.im.mul(&b.im, p, RM), p, RM),
            im: a.re.mul(&b.im, p, RM).add(&a.im.mul(&b.re, p, RM), p, RM),
        }
    }

    pub fn scale(&self, a: &PreciseComplex, s: &BigFloat) -> PreciseComplex {
        PreciseComplex { re: a.re.mul(s, self.p, RM), im: a.im.mul(s, self.p, RM) }
    }

    pub fn div(&self, a: &PreciseComplex, b: &PreciseComplex) -> PreciseComplex {
        let p = self.p;
        let den = b.re.mul(&b.re, p, RM).add(&b.im.mul(&b.im, p, RM), p, RM);
        let conj = PreciseComplex { re: b.re.clone(), im: b.im.neg() };
        let num = self.mul(a, &conj);
        PreciseComplex { re: num.re.div(&den, p, RM), im: num.im.div(&den, p, RM) }
    }

    /// `q = exp(2 pi i tau)` for `tau = (-b + sqrt(D)) / (2a)`, `D < 0`.
    pub fn cm_nome(&mut self, a: i64, b: i64, disc: i64) -> PreciseComplex {
        let p = self.p;
        let pi = self.cc.pi(p, RM);
        let root = BigFloat::from_i64(-disc, p).sqrt(p, RM);
        let a_f = self.int(a);
        let modulus = pi.mul(&root, p, RM).div(&a_f, p, RM).neg().exp(p, RM, &mut self.cc);
        let angle = pi.mul(&self.int(b), p, RM).div(&a_f, p, RM);
        let c = angle.cos(p, RM, &mut self.cc);
        let s = angle.sin(p, RM, &mut self.cc);
        PreciseComplex { re: modulus.mul(&c, p, RM), im: modulus.mul(&s, p, RM).neg() }
    }

    fn series(&self, coeffs: &[BigInt], q: &PreciseComplex) -> Result<PreciseComplex> {
        // Horner from the top coefficient down
        let mut acc = self.cx_int(0);
        for c in coeffs.iter().rev() {
            let c = c.to_i64().ok_or_else(|| Error::Precondition("series coefficient exceeds i64".into()))?;
            acc = self.add(&self.mul(&acc, q), &self.cx_int(c));
        }
        Ok(acc)
    }

    /// `j(tau_Q)` for the form `(a, b, c)` of discriminant `disc`, with `m` q-series terms.
    pub fn j_at_form(&mut self, a: i64, b: i64, disc: i64, m: usize) -> Result<PreciseComplex> {
        let q = self.cm_nome(a, b, disc);
        let e4 = self.series(QSeries::eisenstein4(m)?.coefficients(), &q)?;
        let delta = QSeries::discriminant(m)?;
        let delta_q = self.series(&delta.coefficients()[1..], &q)?;
        let den = self.mul(&q, &delta_q);
        let num = self.mul(&self.mul(&e4, &e4), &e4);
        Ok(self.div(&num, &den))
    }

    /// Nearest integer to `x` and `|x - round(x)|`.
    pub fn round_to_integer(&self, x: &BigFloat) -> (BigInt, f64) {
        let r = x.round(0, RM);
        let gap = to_f64(&x.sub(&r, self.p, RM)).abs();
        (to_bigint(&r), gap)
    }
}

/// Nearest double.
pub fn to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((m, _, sign, e, _)) => {
            if x.is_zero() {
                return 0.0;
            }
            // value = 0.m * 2^e; take the leading words
            let mut v = 0.0f64;
            for (k, w) in m.iter().rev().take(3).enumerate() {
                v += *w as f64 * 2f64.powi(e - ((k + 1) * WORD_BITS) as i32);
            }
            if sign == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

/// Exact conversion of an integral `BigFloat`.
pub fn to_bigint(x: &BigFloat) -> BigInt {
    match x.as_raw_parts() {
        None => BigInt::zero(),
        Some((m, _, sign, e, _)) => {
            if x.is_zero() {
                return BigInt::zero();
            }
            let mut bytes = Vec::with_capacity(m.len() * WORD_BITS / 8);
            for w in m {
                bytes.extend_from_slice(&w.to_le_bytes());
            }
            let mant = BigUint::from_bytes_le(&bytes);
            let shift = e as i64 - (m.len() * WORD_BITS) as i64;
            let mag = if shift >= 0 { mant << shift as usize } else { mant >> (-shift) as usize };
            let v = BigInt::from(mag);
            if sign == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}
