//! Eisenstein series, the discriminant and the `j`-function.
//!
//! Normalization: `E4 = 1 + 240 sum sigma_3(n) q^n`, `E6 = 1 - 504 sum sigma_5(n) q^n`,
//! `Delta = q prod (1 - q^n)^24`, `j = E4^3 / Delta = 1/q + 744 + 196884 q + ...`.
//! Every evaluation of `j` first reduces its argument into the standard
//! fundamental domain, where `|q| <= exp(-pi sqrt 3) ~ 0.00433`.

pub mod precise;

use crate::group::reduce_raw;
use crate::{Error, Result, C64, I};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::PI;

/// Default number of q-series terms.
pub const DEFAULT_TRUNCATION: usize = 60;

/// `|Delta|` below this is reported as underflow.
pub const DELTA_UNDERFLOW: f64 = 1e-300;

/// A truncated q-expansion `sum_{n=0}^{M} a_n q^n` with exact integer coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct QSeries {
    coefficients: Vec<BigInt>,
    truncation: usize,
    weight: u32,
    /// `|a_n| <= bound_scale * n^bound_power` for `n >= 1`.
    bound_scale: f64,
    bound_power: i32,
}

fn divisor_sum(n: usize, k: u32) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            s += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

impl QSeries {
    fn check_truncation(m: usize) -> Result<()> {
        if m < 1 {
            return Err(Error::Precondition("q-series truncation must be at least 1".into()));
        }
        Ok(())
    }

    pub fn eisenstein4(m: usize) -> Result<Self> {
        Self::check_truncation(m)?;
        let mut c = vec![BigInt::one()];
        c.extend((1..=m).map(|n| 240 * divisor_sum(n, 3)));
        // sigma_3(n) <= zeta(3) n^3
        Ok(QSeries { coefficients: c, truncation: m, weight: 4, bound_scale: 240.0 * 1.2021, bound_power: 3 })
    }

    pub fn eisenstein6(m: usize) -> Result<Self> {
        Self::check_truncation(m)?;
        let mut c = vec![BigInt::one()];
        c.extend((1..=m).map(|n| -504 * divisor_sum(n, 5)));
        Ok(QSeries { coefficients: c, truncation: m, weight: 6, bound_scale: 504.0 * 1.0370, bound_power: 5 })
    }

    /// `Delta = sum tau(n) q^n` from the product `q prod (1 - q^n)^24`.
    pub fn discriminant(m: usize) -> Result<Self> {
        Self::check_truncation(m)?;
        // prod_{n>=1} (1 - q^n) by Euler's pentagonal theorem, to order m - 1
        let mut euler = vec![BigInt::zero(); m];
        euler[0] = BigInt::one();
        for k in 1usize.. {
            let (g1, g2) = (k * (3 * k - 1) / 2, k * (3 * k + 1) / 2);
            if g1 >= m {
                break;
            }
            let s = BigInt::from(if k % 2 == 0 { 1 } else { -1 });
            euler[g1] = s.clone();
            if g2 < m {
                euler[g2] = s;
            }
        }
        let mul = |a: &[BigInt], b: &[BigInt]| -> Vec<BigInt> {
            let mut out = vec![BigInt::zero(); m];
            for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
                for (j, y) in b.iter().enumerate().take(m - i) {
                    out[i + j] += x * y;
                }
            }
            out
        };
        let e2 = mul(&euler, &euler);
        let e4 = mul(&e2, &e2);
        let e8 = mul(&e4, &e4);
        let e16 = mul(&e8, &e8);
        let e24 = mul(&e16, &e8);
        let mut c = vec![BigInt::zero()];
        c.extend(e24);
        // Deligne: |tau(n)| <= d(n) n^{11/2} <= 2 n^6
        Ok(QSeries { coefficients: c, truncation: m, weight: 12, bound_scale: 2.0, bound_power: 6 })
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coefficients
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Bound on `|sum_{n > M} a_n q^n|` for `|q| = r < 1`.
    pub fn tail_bound(&self, r: f64) -> f64 {
        let m = self.truncation as f64;
        let p = self.bound_power;
        let ratio = r * ((m + 2.0) / (m + 1.0)).powi(p);
        if ratio >= 1.0 {
            return f64::INFINITY;
        }
        self.bound_scale * (m + 1.0).powi(p) * r.powf(m + 1.0) / (1.0 - ratio)
    }

    fn to_f64(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

/// Neumaier-compensated evaluation of `sum a_n q^n` and `sum n a_n q^n`.
fn eval_series(coeffs: &[f64], q: C64) -> (C64, C64) {
    let mut sum = Compensated::default();
    let mut dsum = Compensated::default();
    let mut qn = C64::new(1.0, 0.0);
    for (n, &a) in coeffs.iter().enumerate() {
        if a != 0.0 {
            let t = a * qn;
            sum.add(t);
            dsum.add(n as f64 * t);
        }
        qn *= q;
        if qn.norm() == 0.0 {
            break;
        }
    }
    (sum.value(), dsum.value())
}

#[derive(Default)]
struct Compensated {
    sum: C64,
    comp: C64,
}

impl Compensated {
    fn add(&mut self, x: C64) {
        let (s_re, c_re) = two_sum(self.sum.re, x.re);
        let (s_im, c_im) = two_sum(self.sum.im, x.im);
        self.sum = C64::new(s_re, s_im);
        self.comp += C64::new(c_re, c_im);
    }

    fn value(&self) -> C64 {
        self.sum + self.comp
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Values of `E4, E6, Delta` and their `tau`-derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormValues {
    pub e4: C64,
    pub e6: C64,
    pub delta: C64,
    pub de4: C64,
    pub de6: C64,
    pub ddelta: C64,
}

/// Immutable evaluator for `j` and the underlying forms.
#[derive(Debug, Clone)]
pub struct ModularEvaluator {
    truncation: usize,
    e4: Vec<f64>,
    e6: Vec<f64>,
    /// `Delta / q = sum tau(n + 1) q^n`
    delta_q: Vec<f64>,
    series: [QSeries; 3],
}

impl Default for ModularEvaluator {
    fn default() -> Self {
        Self::new(DEFAULT_TRUNCATION).expect("default truncation is valid")
    }
}

/// Tuning for [`ModularEvaluator::invert_j`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvertConfig {
    /// Starts per axis of the grid over the fundamental domain.
    pub grid: usize,
    pub max_iterations: usize,
    /// Required `|j(z) - c| / max(1, |c|)`.
    pub tolerance: f64,
}

impl Default for InvertConfig {
    fn default() -> Self {
        InvertConfig { grid: 20, max_iterations: 200, tolerance: 1e-9 }
    }
}

/// `exp(2 pi i/3)`.
pub fn rho() -> C64 {
    C64::new(-0.5, 3f64.sqrt() / 2.0)
}

impl ModularEvaluator {
    pub fn new(truncation: usize) -> Result<Self> {
        let e4 = QSeries::eisenstein4(truncation)?;
        let e6 = QSeries::eisenstein6(truncation)?;
        let delta = QSeries::discriminant(truncation)?;
        let delta_q = delta.to_f64()[1..].to_vec();
        Ok(ModularEvaluator { truncation, e4: e4.to_f64(), e6: e6.to_f64(), delta_q, series: [e4, e6, delta] })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// The `E4`, `E6`, `Delta` series.
    pub fn series(&self) -> &[QSeries; 3] {
        &self.series
    }

    /// Truncation error bound for `E4^3 / Delta` ingredients at `|q| = r`.
    pub fn tail_bound(&self, r: f64) -> f64 {
        self.series.iter().map(|s| s.tail_bound(r)).fold(0.0, f64::max)
    }

    /// Series values at `tau` without any reduction. Accurate for `Im tau >= 0.5`.
    pub fn forms(&self, tau: C64) -> FormValues {
        let q = (2.0 * PI * I * tau).exp();
        let tw = 2.0 * PI * I;
        let (e4, de4) = eval_series(&self.e4, q);
        let (e6, de6) = eval_series(&self.e6, q);
        let (dq, ddq) = eval_series(&self.delta_q, q);
        // Delta = q D(q), q d/dq Delta = q (D + q D') = q (D + sum n b_n q^n)
        let delta = q * dq;
        let ddelta = tw * q * (dq + ddq);
        FormValues { e4, e6, delta, de4: tw * de4, de6: tw * de6, ddelta }
    }

    fn j_reduced(&self, w: C64) -> Result<(C64, C64)> {
        let f = self.forms(w);
        if !(f.delta.norm() >= DELTA_UNDERFLOW) {
            return Err(Error::Underflow(f.delta.norm()));
        }
        let e4sq = f.e4 * f.e4;
        let j = e4sq * f.e4 / f.delta;
        let dj = e4sq * (3.0 * f.de4 * f.delta - f.e4 * f.ddelta) / (f.delta * f.delta);
        Ok((j, dj))
    }

    /// `j(z)`.
    pub fn eval_j(&self, z: C64) -> Result<C64> {
        let (w, _) = reduce_raw(z)?;
        Ok(self.j_reduced(w)?.0)
    }

    /// `dj/dz`, via the differentiated series at the reduced point and the
    /// chain rule `d(gamma z)/dz = (c z + d)^-2`.
    pub fn eval_j_derivative(&self, z: C64) -> Result<C64> {
        Ok(self.eval_j_with_derivative(z)?.1)
    }

    pub fn eval_j_with_derivative(&self, z: C64) -> Result<(C64, C64)> {
        let (w, g) = reduce_raw(z)?;
        let (j, dj) = self.j_reduced(w)?;
        let den = g[2] as f64 * z + g[3] as f64;
        Ok((j, dj / (den * den)))
    }

    /// A point `z` of the closed fundamental domain with `j(z) = c`.
    pub fn invert_j(&self, c: C64) -> Result<C64> {
        self.invert_j_with(c, &InvertConfig::default())
    }

    pub fn invert_j_with(&self, c: C64, cfg: &InvertConfig) -> Result<C64> {
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::Precondition("invert_j needs a finite value".into()));
        }
        let scale = c.norm().max(1.0);
        let mut starts = Vec::new();
        if c.norm() > 1e4 {
            // j = 1/q + 744 + O(q)
            let q0 = 1.0 / (c - 744.0);
            starts.push(reduce_raw(q0.ln() / (2.0 * PI * I))?.0);
        } else {
            let n = cfg.grid.max(2);
            let mut grid = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    let x = -0.5 + a as f64 / (n - 1) as f64;
                    let y = 0.87 + 0.8 * b as f64 / (n - 1) as f64;
                    let z = C64::new(x, y.max((1.0 - x * x).sqrt() + 1e-3));
                    if let Ok(v) = self.eval_j(z) {
                        grid.push(((v - c).norm(), z));
                    }
                }
            }
            grid.sort_by(|x, y| x.0.total_cmp(&y.0));
            starts.extend(grid.into_iter().map(|(_, z)| z));
        }
        let mut best = (f64::INFINITY, C64::new(0.0, 1.0));
        for z0 in starts {
            let z = self.newton_j(c, z0, cfg.max_iterations);
            let z = self.polish_elliptic(c, z);
            let z = match reduce_raw(z) {
                Ok((w, _)) => w,
                Err(_) => continue,
            };
            let Ok(v) = self.eval_j(z) else { continue };
            let r = (v - c).norm() / scale;
            if r < best.0 {
                best = (r, z);
            }
            if r < cfg.tolerance {
                return Ok(z);
            }
        }
        Err(Error::NewtonStagnation { best_residual: best.0 })
    }

    fn newton_j(&self, c: C64, mut z: C64, max_iter: usize) -> C64 {
        let scale = c.norm().max(1.0);
        for _ in 0..max_iter {
            let Ok((j, dj)) = self.eval_j_with_derivative(z) else { break };
            let f = j - c;
            if f.norm() <= 1e-15 * scale || dj.norm() == 0.0 {
                break;
            }
            let mut step = f / dj;
            if step.norm() > 0.25 {
                step *= 0.25 / step.norm();
            }
            let mut next = z - step;
            while next.im <= 0.0 {
                step *= 0.5;
                next = z - step;
            }
            if step.norm() <= 1e-16 * z.norm() {
                z = next;
                break;
            }
            z = match reduce_raw(next) {
                Ok((w, _)) => w,
                Err(_) => break,
            };
        }
        z
    }

    /// Near `i` and `rho` the equation `j = c` has a double or triple root when
    /// `c` is 1728 or 0. There Newton runs on the simple factor instead:
    /// `E6 - s` with `s^2 = (c - 1728) Delta` near `i`, and `E4 - t` with
    /// `t^3 = c Delta` near `rho`, taking the root of unity branch closest to
    /// the current `E6` (resp. `E4`).
    fn polish_elliptic(&self, c: C64, z: C64) -> C64 {
        let r = rho();
        let order = if (z - I).norm() < 0.05 {
            2u32
        } else if (z - r).norm() < 0.05 || (z - (r + 1.0)).norm() < 0.05 {
            3
        } else {
            return z;
        };
        let k = if order == 2 { c - 1728.0 } else { c };
        let mut z = z;
        for _ in 0..60 {
            let f = self.forms(z);
            let (form, dform) = if order == 2 { (f.e6, f.de6) } else { (f.e4, f.de4) };
            let base = k * f.delta;
            let root = if base.norm() == 0.0 {
                C64::new(0.0, 0.0)
            } else {
                let principal = base.powf(1.0 / order as f64);
                (0..order)
                    .map(|m| principal * C64::from_polar(1.0, 2.0 * PI * m as f64 / order as f64))
                    .min_by(|a, b| (a - form).norm().total_cmp(&(b - form).norm()))
                    .expect("nonempty")
            };
            let droot = if root.norm() == 0.0 { C64::new(0.0, 0.0) } else { root * f.ddelta / (order as f64 * f.delta) };
            let g = form - root;
            let dg = dform - droot;
            if dg.norm() == 0.0 {
                break;
            }
            let step = g / dg;
            if !(step.norm() < 0.05) {
                break;
            }
            z -= step;
            if step.norm() <= 1e-17 {
                break;
            }
        }
        z
    }
}
