//! `SL2(Z)` and `SL2(R)` acting on the upper half-plane.
//!
//! Besides the Möbius action this module provides reduction into the standard
//! fundamental domain, orbit sequences `gamma_k` with `gamma_k(z) -> x0` for a
//! real boundary point `x0`, and the lattice search approximating a pair of
//! real matrices by `(gamma_1 h, gamma_2 g h g^-1)`.

use crate::geometry::ExtendedPoint;
use crate::{Error, Result, C64};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Step limit for [`reduce_to_fundamental_domain`].
pub const MAX_REDUCTION_STEPS: usize = 100_000;

/// Tolerance used for the closed fundamental domain.
pub const DOMAIN_TOL: f64 = 1e-12;

/// Errors within this margin of the best error count as ties in lattice searches.
pub const TIE_TOL: f64 = 1e-12;

/// Integer 2x2 matrix of determinant one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnimodularMatrix {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl UnimodularMatrix {
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Result<Self> {
        if &a * &d - &b * &c != BigInt::one() {
            return Err(Error::Precondition(format!("det [[{a},{b}],[{c},{d}]] != 1")));
        }
        Ok(UnimodularMatrix { a, b, c, d })
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub(crate) fn from_i128_unchecked(m: [i128; 4]) -> Self {
        UnimodularMatrix { a: m[0].into(), b: m[1].into(), c: m[2].into(), d: m[3].into() }
    }

    pub fn identity() -> Self {
        Self::translation(0)
    }

    /// `T^n = [[1, n], [0, 1]]`.
    pub fn translation(n: i64) -> Self {
        UnimodularMatrix { a: 1.into(), b: n.into(), c: 0.into(), d: 1.into() }
    }

    /// `S = [[0, -1], [1, 0]]`.
    pub fn inversion() -> Self {
        UnimodularMatrix { a: 0.into(), b: (-1).into(), c: 1.into(), d: 0.into() }
    }

    pub fn entries(&self) -> [&BigInt; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn to_i64(&self) -> Option<[i64; 4]> {
        Some([self.a.to_i64()?, self.b.to_i64()?, self.c.to_i64()?, self.d.to_i64()?])
    }

    pub fn to_f64(&self) -> [f64; 4] {
        let f = |x: &BigInt| x.to_f64().unwrap_or(f64::NAN);
        [f(&self.a), f(&self.b), f(&self.c), f(&self.d)]
    }

    pub fn inverse(&self) -> Self {
        UnimodularMatrix { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        UnimodularMatrix {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(), |acc, _| acc.mul(self))
    }

    /// Largest absolute entry.
    pub fn height(&self) -> BigInt {
        [&self.a, &self.b, &self.c, &self.d].into_iter().map(|x| x.abs()).max().unwrap_or_default()
    }

    /// Same Möbius map: `m` and `-m` act identically.
    pub fn projectively_eq(&self, o: &Self) -> bool {
        self == o || *self == o.negated()
    }

    fn negated(&self) -> Self {
        UnimodularMatrix { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d }
    }

    pub fn act(&self, z: C64) -> ExtendedPoint {
        act(self.to_f64(), ExtendedPoint::Finite(z))
    }

    /// Exact action on `P^1(Q)`; `None` is the point at infinity.
    pub fn act_rational(&self, x: Option<&BigRational>) -> Option<BigRational> {
        match x {
            None => {
                if self.c.is_zero() {
                    None
                } else {
                    Some(BigRational::new(self.a.clone(), self.c.clone()))
                }
            }
            Some(x) => {
                let num = BigRational::from_integer(self.a.clone()) * x + BigRational::from_integer(self.b.clone());
                let den = BigRational::from_integer(self.c.clone()) * x + BigRational::from_integer(self.d.clone());
                if den.is_zero() {
                    None
                } else {
                    Some(num / den)
                }
            }
        }
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Real 2x2 matrix of determinant one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RealMatrix {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = (a * d).abs().max((b * c).abs()).max(1.0);
        if !det.is_finite() || (det - 1.0).abs() > 1e-12 * scale {
            return Err(Error::Precondition(format!("det [[{a},{b}],[{c},{d}]] = {det} != 1")));
        }
        Ok(RealMatrix { a, b, c, d })
    }

    pub fn identity() -> Self {
        RealMatrix { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    pub fn from_integer(m: [i64; 4]) -> Self {
        RealMatrix { a: m[0] as f64, b: m[1] as f64, c: m[2] as f64, d: m[3] as f64 }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn mul(&self, o: &Self) -> Self {
        RealMatrix {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Self {
        RealMatrix { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn act(&self, z: C64) -> ExtendedPoint {
        act(self.entries(), ExtendedPoint::Finite(z))
    }

    /// `max |entry|` of `self - o`.
    pub fn sup_distance(&self, o: &Self) -> f64 {
        self.entries().iter().zip(o.entries()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
}

/// Möbius action `(az + b)/(cz + d)` on the compactified plane.
pub fn act(m: [f64; 4], z: ExtendedPoint) -> ExtendedPoint {
    let [a, b, c, d] = m;
    match z {
        ExtendedPoint::Infinity => {
            if c == 0.0 {
                ExtendedPoint::Infinity
            } else {
                ExtendedPoint::Finite(C64::new(a / c, 0.0))
            }
        }
        ExtendedPoint::Finite(z) => {
            let den = c * z + d;
            if den == C64::new(0.0, 0.0) {
                ExtendedPoint::Infinity
            } else {
                ExtendedPoint::Finite((a * z + b) / den)
            }
        }
    }
}

/// Möbius action on a finite point known not to be mapped to infinity
/// (any point of the open half-plane).
pub(crate) fn act_finite(m: [f64; 4], z: C64) -> C64 {
    (m[0] * z + m[1]) / (m[2] * z + m[3])
}

fn mul_i128(x: [i128; 4], y: [i128; 4]) -> [i128; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

/// Fast reduction used by the modular-function evaluator. Returns the reduced
/// point together with the integer matrix `gamma` with `z' = gamma z`.
pub(crate) fn reduce_raw(z: C64) -> Result<(C64, [i128; 4])> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Precondition(format!("reduction needs Im z > 0, got {z}")));
    }
    let mut w = z;
    let mut g: [i128; 4] = [1, 0, 0, 1];
    let mut steps = 0;
    loop {
        steps += 1;
        if steps > MAX_REDUCTION_STEPS {
            return Err(Error::NonTermination(MAX_REDUCTION_STEPS));
        }
        let n = w.re.round();
        if n != 0.0 {
            w.re -= n;
            let n = n as i128;
            g = mul_i128([1, -n, 0, 1], g);
        }
        if w.norm_sqr() < 1.0 - DOMAIN_TOL {
            w = -1.0 / w;
            g = mul_i128([0, -1, 1, 0], g);
        } else {
            break;
        }
    }
    // canonical representative: -1/2 <= Re < 1/2, and Re <= 0 on the unit arc
    if w.re >= 0.5 - DOMAIN_TOL {
        w.re -= 1.0;
        g = mul_i128([1, -1, 0, 1], g);
    }
    if w.norm_sqr() < 1.0 + DOMAIN_TOL && w.re > DOMAIN_TOL {
        w = -1.0 / w;
        g = mul_i128([0, -1, 1, 0], g);
    }
    Ok((w, g))
}

/// Reduce `z` into `{|Re z| <= 1/2, |z| >= 1}` by alternating translations and
/// the inversion `z -> -1/z`. Returns `(z', gamma)` with `z' = gamma z`.
///
/// The representative is canonical: `-1/2 <= Re z' < 1/2`, and `Re z' <= 0`
/// when `|z'| = 1` (all within [`DOMAIN_TOL`]).
pub fn reduce_to_fundamental_domain(z: C64) -> Result<(C64, UnimodularMatrix)> {
    let (w, g) = reduce_raw(z)?;
    Ok((w, UnimodularMatrix::from_i128_unchecked(g)))
}

/// Is `z` in the closed standard fundamental domain?
pub fn in_fundamental_domain(z: C64, tol: f64) -> bool {
    z.im > 0.0 && z.re.abs() <= 0.5 + tol && z.norm() >= 1.0 - tol
}

/// A point of `R ∪ {∞}` used as an orbit target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    /// `p/q` with `q > 0`.
    Rational(i64, i64),
    Real(f64),
    Infinity,
}

impl BoundaryPoint {
    pub fn rational(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Ok(BoundaryPoint::Infinity);
        }
        let g = p.gcd(&q);
        let s = if q < 0 { -1 } else { 1 };
        Ok(BoundaryPoint::Rational(s * p / g, s * q / g))
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            BoundaryPoint::Rational(p, q) => Some(p as f64 / q as f64),
            BoundaryPoint::Real(x) => Some(x),
            BoundaryPoint::Infinity => None,
        }
    }

    pub fn to_extended(&self) -> ExtendedPoint {
        match self.value() {
            Some(x) => ExtendedPoint::Finite(C64::new(x, 0.0)),
            None => ExtendedPoint::Infinity,
        }
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryPoint::Rational(p, q) => write!(f, "{p}/{q}"),
            BoundaryPoint::Real(x) => write!(f, "{x}"),
            BoundaryPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// Continued fraction expansion of a double.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuedFraction {
    pub partial_quotients: Vec<i64>,
    /// The expansion ended because the value is (numerically) rational.
    pub terminated: bool,
}

/// Denominator beyond which convergents of a double carry no information.
const CF_DENOMINATOR_LIMIT: f64 = 1e8;

/// Partial quotients of `x`, stopping at `max_terms`, at an exact remainder,
/// or when the convergent denominators exceed what double precision resolves.
pub fn continued_fraction(x: f64, max_terms: usize) -> ContinuedFraction {
    let mut quotients = Vec::new();
    let mut r = x;
    // q_{-2} = 1, q_{-1} = 0
    let (mut q_prev, mut q) = (1.0f64, 0.0f64);
    let mut terminated = false;
    while quotients.len() < max_terms {
        let a = r.floor();
        quotients.push(a as i64);
        let next = a * q + q_prev;
        q_prev = q;
        q = next;
        let frac = r - a;
        if frac.abs() < 1e-12 {
            terminated = true;
            break;
        }
        if q > CF_DENOMINATOR_LIMIT {
            break;
        }
        r = 1.0 / frac;
    }
    ContinuedFraction { partial_quotients: quotients, terminated }
}

/// Convergents `(p_k, q_k)` of a list of partial quotients.
pub fn convergents(quotients: &[i64]) -> Vec<(BigInt, BigInt)> {
    let (mut p_prev, mut p) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q) = (BigInt::one(), BigInt::zero());
    // (p_{-2}, p_{-1}) = (0, 1), (q_{-2}, q_{-1}) = (1, 0)
    let mut out = Vec::with_capacity(quotients.len());
    for &a in quotients {
        let a = BigInt::from(a);
        let pn = &a * &p + &p_prev;
        let qn = &a * &q + &q_prev;
        p_prev = std::mem::replace(&mut p, pn);
        q_prev = std::mem::replace(&mut q, qn);
        out.push((p.clone(), q.clone()));
    }
    out
}

/// Unimodular `sigma` with `sigma(∞) = p/q`.
pub fn cusp_matrix(p: i64, q: i64) -> UnimodularMatrix {
    // p v - u q = 1
    let e = p.extended_gcd(&q);
    let sign = e.gcd.signum();
    let (v, u) = (e.x * sign, -e.y * sign);
    UnimodularMatrix::from_i64(p, u, q, v).expect("extended gcd gives determinant one")
}

/// Orbit of a base point accumulating at a boundary target.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSequence {
    pub target: BoundaryPoint,
    pub base: C64,
    pub matrices: Vec<UnimodularMatrix>,
    /// Fewer matrices than requested: the target's expansion is exhausted at
    /// double precision.
    pub truncated: bool,
}

impl OrbitSequence {
    pub fn points(&self) -> Vec<C64> {
        self.matrices.iter().map(|m| act_finite(m.to_f64(), self.base)).collect()
    }

    /// `|gamma_k(base) - x0|`, or `1/|gamma_k(base)|` for the target at infinity.
    pub fn errors(&self) -> Vec<f64> {
        self.points()
            .into_iter()
            .map(|z| match self.target.value() {
                Some(x) => (z - x).norm(),
                None => 1.0 / z.norm(),
            })
            .collect()
    }
}

fn rational_orbit(p: i64, q: i64, k: usize) -> Vec<UnimodularMatrix> {
    // sigma T^n sigma^-1 = [[1 - n p q, n p^2], [-n q^2, 1 + n p q]]
    let (p, q) = (BigInt::from(p), BigInt::from(q));
    (1..=k)
        .map(|n| {
            let n = BigInt::from(n);
            let npq = &n * &p * &q;
            UnimodularMatrix {
                a: BigInt::one() - &npq,
                b: &n * &p * &p,
                c: -(&n * &q * &q),
                d: BigInt::one() + &npq,
            }
        })
        .collect()
}

/// `k` matrices `gamma_1, ..., gamma_k` with `gamma_n(base) -> target`.
///
/// - rational `p/q`: `gamma_n = sigma T^n sigma^-1` with `sigma(∞) = p/q`;
/// - irrational `x0`: `gamma_n = [[p_n, p_{n-1}], [q_n, q_{n-1}]]` from the
///   convergents of `x0`, second column negated when the determinant is `-1`;
/// - `∞`: `gamma_n = T^n`.
pub fn orbit_toward(target: BoundaryPoint, base: C64, k: usize) -> Result<OrbitSequence> {
    if k == 0 {
        return Err(Error::Precondition("orbit length must be at least 1".into()));
    }
    if !(base.im > 0.0) {
        return Err(Error::Precondition("orbit base must lie in the upper half-plane".into()));
    }
    let (matrices, truncated) = match target {
        BoundaryPoint::Infinity => ((1..=k as i64).map(UnimodularMatrix::translation).collect(), false),
        BoundaryPoint::Rational(p, q) => (rational_orbit(p, q, k), false),
        BoundaryPoint::Real(x) => {
            if !x.is_finite() {
                return Err(Error::Precondition("orbit target must be finite or the point at infinity".into()));
            }
            let cf = continued_fraction(x, k + 1);
            if cf.terminated {
                let conv = convergents(&cf.partial_quotients);
                let (p, q) = conv.last().expect("at least one quotient");
                match (p.to_i64(), q.to_i64()) {
                    (Some(p), Some(q)) => (rational_orbit(p, q, k), false),
                    _ => return Err(Error::Precondition("rational target too large".into())),
                }
            } else {
                let conv = convergents(&cf.partial_quotients);
                let mats: Vec<_> = conv
                    .windows(2)
                    .take(k)
                    .map(|w| {
                        let (pp, qp) = &w[0];
                        let (p, q) = &w[1];
                        let det = p * qp - pp * q;
                        if det.is_one() {
                            UnimodularMatrix { a: p.clone(), b: pp.clone(), c: q.clone(), d: qp.clone() }
                        } else {
                            UnimodularMatrix { a: p.clone(), b: -pp, c: q.clone(), d: -qp }
                        }
                    })
                    .collect();
                let truncated = mats.len() < k;
                (mats, truncated)
            }
        }
    };
    Ok(OrbitSequence { target, base, matrices, truncated })
}

/// Matrices of `PSL2(Z)` with all entries bounded by `height`, one
/// representative per `±` pair, grouped by bottom row `(c, d)`.
///
/// Bottom rows are the coprime pairs with `c > 0`, plus `(0, 1)`; each is
/// extended to `(a, b)` by the extended Euclidean algorithm and then swept
/// along `(a + t c, b + t d)`.
pub fn psl2_bottom_rows(height: i64) -> Vec<(i64, i64)> {
    let mut rows = vec![(0, 1)];
    for c in 1..=height {
        for d in -height..=height {
            if c.gcd(&d) == 1 {
                rows.push((c, d));
            }
        }
    }
    rows
}

/// All matrices of height at most `height` with bottom row `(c, d)`; empty
/// unless `c` and `d` are coprime.
pub fn psl2_with_bottom_row(c: i64, d: i64, height: i64) -> Vec<[i64; 4]> {
    if c == 0 {
        if d.abs() != 1 {
            return vec![];
        }
        return (-height..=height).map(|t| [d, t, 0, d]).collect();
    }
    // a d - b c = 1
    let e = d.extended_gcd(&c);
    if e.gcd != 1 {
        return vec![];
    }
    let (a0, b0) = (e.x, -e.y);
    debug_assert_eq!(a0 * d - b0 * c, 1);
    // shift so that a0 is the smallest admissible; then sweep t upward
    let (x, y) = ((-height - a0) as f64 / c as f64, (height - a0) as f64 / c as f64);
    let (t_lo, t_hi) = (x.min(y).ceil() as i64, x.max(y).floor() as i64);
    (t_lo..=t_hi)
        .map(|t| [a0 + t * c, b0 + t * d, c, d])
        .filter(|m| m[0].abs() <= height && m[1].abs() <= height)
        .collect()
}

/// Every matrix of `PSL2(Z)` of height at most `height`.
pub fn psl2_matrices(height: i64) -> Vec<[i64; 4]> {
    psl2_bottom_rows(height).into_iter().flat_map(|(c, d)| psl2_with_bottom_row(c, d, height)).collect()
}

fn l1(m: &[i64; 4]) -> i64 {
    m.iter().map(|x| x.abs()).sum()
}

/// Deterministic minimisation over `PSL2(Z)` of bounded height. Candidates
/// whose error is within [`TIE_TOL`] of the optimum are ordered by `l1` norm of
/// the entries and then lexicographically.
pub(crate) fn psl2_argmin<T, F>(height: i64, f: F) -> Option<([i64; 4], f64, T)>
where
    T: Send,
    F: Fn(&[i64; 4]) -> Option<(f64, T)> + Sync,
{
    let rows = psl2_bottom_rows(height);
    let eval_row = |&(c, d): &(i64, i64)| -> Vec<([i64; 4], f64, T)> {
        psl2_with_bottom_row(c, d, height)
            .into_iter()
            .filter_map(|m| f(&m).map(|(e, t)| (m, e, t)))
            .filter(|(_, e, _)| !e.is_nan())
            .collect()
    };
    #[cfg(feature = "parallel")]
    let all: Vec<([i64; 4], f64, T)> = {
        use rayon::prelude::*;
        rows.par_iter().flat_map_iter(eval_row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let all: Vec<([i64; 4], f64, T)> = rows.iter().flat_map(eval_row).collect();

    let best = all.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return None;
    }
    all.into_iter().filter(|x| x.1 <= best + TIE_TOL).min_by(|x, y| {
        l1(&x.0).cmp(&l1(&y.0)).then_with(|| x.0.cmp(&y.0)).then(Ordering::Equal)
    })
}

/// Outcome of [`ratner_approximate`].
#[derive(Debug, Clone, PartialEq)]
pub struct RatnerApproximation {
    pub gamma1: UnimodularMatrix,
    pub gamma2: UnimodularMatrix,
    pub h: RealMatrix,
    /// `max |entry|` of `gamma2 g h g^-1 - g2`; infinite when no candidate
    /// rounded to a unimodular matrix.
    pub error: f64,
}

impl RatnerApproximation {
    pub fn found(&self) -> bool {
        self.error.is_finite()
    }
}

/// Approximate `(g1, g2)` by `(gamma1 h, gamma2 g h g^-1)` with `gamma1` of
/// height at most `height`: `h = gamma1^-1 g1` makes the first coordinate exact
/// and `gamma2` is the entrywise rounding of `g2 (g h g^-1)^-1`.
pub fn ratner_approximate(g: &RealMatrix, targets: (&RealMatrix, &RealMatrix), height: i64) -> Result<RatnerApproximation> {
    if height < 1 {
        return Err(Error::Precondition("height must be at least 1".into()));
    }
    let (g1, g2) = targets;
    let g_inv = g.inverse();
    let candidate = |m: &[i64; 4]| -> Option<(f64, ([i64; 4], RealMatrix))> {
        let gamma1 = RealMatrix::from_integer(*m);
        let h = gamma1.inverse().mul(g1);
        let conj = g.mul(&h).mul(&g_inv);
        let approx = g2.mul(&conj.inverse());
        let r = approx.entries().map(f64::round);
        if r.iter().any(|x| x.abs() > 9.0e15) {
            return None;
        }
        let gamma2 = [r[0] as i64, r[1] as i64, r[2] as i64, r[3] as i64];
        if gamma2[0] * gamma2[3] - gamma2[1] * gamma2[2] != 1 {
            return None;
        }
        let err = RealMatrix::from_integer(gamma2).mul(&conj).sup_distance(g2);
        Some((err, (gamma2, h)))
    };
    Ok(match psl2_argmin(height, candidate) {
        Some((m1, err, (m2, h))) => RatnerApproximation {
            gamma1: UnimodularMatrix::from_i64(m1[0], m1[1], m1[2], m1[3])?,
            gamma2: UnimodularMatrix::from_i64(m2[0], m2[1], m2[2], m2[3])?,
            h,
            error: err,
        },
        None => RatnerApproximation {
            gamma1: UnimodularMatrix::identity(),
            gamma2: UnimodularMatrix::identity(),
            h: *g1,
            error: f64::INFINITY,
        },
    })
}
