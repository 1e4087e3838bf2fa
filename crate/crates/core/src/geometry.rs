//! Geometry of the unit disk and the polydisk.
//!
//! Metric normalization: on the disk the Bergman metric is `|dz| / (1 - |z|^2)`,
//! so the distance between `z` and `w` is `artanh` of their pseudo-hyperbolic
//! distance. On `D^n` the squared metric is the sum of the coordinate squared
//! metrics and the distance is the root of the sum of squared coordinate
//! distances.

use crate::{Error, Result, C64, I};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Default tolerance for boundary membership tests.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// A point of `D^n` (interior) or of its closure.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskPoint {
    coords: Vec<C64>,
}

impl DiskPoint {
    /// Interior point: every coordinate strictly inside the unit circle.
    pub fn interior(coords: Vec<C64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Precondition("disk point needs at least one coordinate".into()));
        }
        if let Some(z) = coords.iter().find(|z| !(z.norm() < 1.0)) {
            return Err(Error::Precondition(format!("|{z}| >= 1: not an interior disk point")));
        }
        Ok(DiskPoint { coords })
    }

    /// Point of the closed polydisk, `max |z_i| <= 1 + tol`.
    pub fn closure(coords: Vec<C64>, tol: f64) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Precondition("disk point needs at least one coordinate".into()));
        }
        if let Some(z) = coords.iter().find(|z| !(z.norm() <= 1.0 + tol)) {
            return Err(Error::Precondition(format!("|{z}| > 1: outside the closed polydisk")));
        }
        Ok(DiskPoint { coords })
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_interior(&self) -> bool {
        self.coords.iter().all(|z| z.norm() < 1.0)
    }

    /// Euclidean norm in `C^n`.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A point of `H^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfPlanePoint {
    coords: Vec<C64>,
}

impl HalfPlanePoint {
    pub fn new(coords: Vec<C64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Precondition("half-plane point needs at least one coordinate".into()));
        }
        if let Some(z) = coords.iter().find(|z| !(z.im > 0.0)) {
            return Err(Error::Precondition(format!("Im({z}) <= 0: not in the upper half-plane")));
        }
        Ok(HalfPlanePoint { coords })
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A coordinate of the compactified upper half-plane. The point at infinity is
/// an explicit variant, never a large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedPoint {
    Finite(C64),
    Infinity,
}

impl ExtendedPoint {
    pub fn finite(self) -> Option<C64> {
        match self {
            ExtendedPoint::Finite(z) => Some(z),
            ExtendedPoint::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedPoint::Infinity)
    }
}

/// A Shilov-boundary target, either on the torus `(S^1)^n` or in `(R ∪ {∞})^n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ShilovTarget {
    Disk(Vec<C64>),
    HalfPlane(Vec<ExtendedPoint>),
}

impl ShilovTarget {
    pub fn disk(values: Vec<C64>) -> Result<Self> {
        if values.iter().any(|z| (z.norm() - 1.0).abs() > BOUNDARY_TOL) {
            return Err(Error::Precondition("torus target needs |zeta_i| = 1".into()));
        }
        Ok(ShilovTarget::Disk(values))
    }

    pub fn half_plane(values: Vec<ExtendedPoint>) -> Result<Self> {
        let ok = values.iter().all(|p| match p {
            ExtendedPoint::Finite(z) => z.im.abs() <= BOUNDARY_TOL,
            ExtendedPoint::Infinity => true,
        });
        if !ok {
            return Err(Error::Precondition("half-plane target must be real or infinite".into()));
        }
        Ok(ShilovTarget::HalfPlane(values))
    }

    /// The same target expressed on the torus.
    pub fn to_disk(&self) -> Vec<C64> {
        match self {
            ShilovTarget::Disk(v) => v.clone(),
            ShilovTarget::HalfPlane(v) => v.iter().map(|&p| cayley_extended(p)).collect(),
        }
    }
}

/// Tangent vector `sum a_i d/dz_i` at an interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: DiskPoint,
    components: Vec<C64>,
}

impl TangentVector {
    pub fn new(base: DiskPoint, components: Vec<C64>) -> Result<Self> {
        if components.len() != base.dim() {
            return Err(Error::Precondition(format!(
                "tangent vector has {} components at a point of dimension {}",
                components.len(),
                base.dim()
            )));
        }
        Ok(TangentVector { base, components })
    }

    pub fn base(&self) -> &DiskPoint {
        &self.base
    }

    pub fn components(&self) -> &[C64] {
        &self.components
    }
}

/// `z -> (z - i)/(z + i)`, coordinatewise.
pub fn cayley(p: &HalfPlanePoint) -> DiskPoint {
    DiskPoint { coords: p.coords.iter().map(|&z| (z - I) / (z + I)).collect() }
}

/// `zeta -> i (1 + zeta)/(1 - zeta)`, coordinatewise.
pub fn cayley_inverse(d: &DiskPoint) -> Result<HalfPlanePoint> {
    if !d.is_interior() {
        return Err(Error::Precondition("cayley_inverse expects an interior point".into()));
    }
    Ok(HalfPlanePoint { coords: d.coords.iter().map(|&z| I * (1.0 + z) / (1.0 - z)).collect() })
}

/// Cayley map on one coordinate of the compactified half-plane; `∞ -> 1`.
pub fn cayley_extended(p: ExtendedPoint) -> C64 {
    match p {
        ExtendedPoint::Finite(z) => (z - I) / (z + I),
        ExtendedPoint::Infinity => C64::new(1.0, 0.0),
    }
}

/// Inverse Cayley map on one closure coordinate; `1` maps to the flagged point at infinity.
pub fn cayley_inverse_extended(zeta: C64) -> ExtendedPoint {
    if (zeta - 1.0).norm() <= BOUNDARY_TOL {
        ExtendedPoint::Infinity
    } else {
        ExtendedPoint::Finite(I * (1.0 + zeta) / (1.0 - zeta))
    }
}

fn same_dim(z: &DiskPoint, w: &DiskPoint) -> Result<()> {
    if z.dim() != w.dim() {
        return Err(Error::Precondition(format!("dimension mismatch: {} vs {}", z.dim(), w.dim())));
    }
    Ok(())
}

/// `K(z, w) = prod_i 1 / (pi (1 - z_i conj(w_i))^2)`.
pub fn bergman_kernel(z: &DiskPoint, w: &DiskPoint) -> Result<C64> {
    same_dim(z, w)?;
    Ok(z.coords
        .iter()
        .zip(&w.coords)
        .map(|(&a, &b)| {
            let t = 1.0 - a * b.conj();
            1.0 / (PI * t * t)
        })
        .product())
}

/// Length of a tangent vector: `sqrt(sum |a_i|^2 / (1 - |z_i|^2)^2)`.
pub fn bergman_metric(v: &TangentVector) -> f64 {
    v.base
        .coords
        .iter()
        .zip(&v.components)
        .map(|(z, a)| {
            let s = a.norm() / (1.0 - z.norm_sqr());
            s * s
        })
        .sum::<f64>()
        .sqrt()
}

/// `|(z - w) / (1 - conj(w) z)|` on one disk coordinate.
pub fn pseudo_hyperbolic(z: C64, w: C64) -> f64 {
    ((z - w) / (1.0 - w.conj() * z)).norm()
}

/// Disk distance `artanh(rho(z, w))`.
pub fn disk_distance(z: C64, w: C64) -> f64 {
    pseudo_hyperbolic(z, w).min(1.0).atanh()
}

/// Product-Riemannian distance on `D^n`.
pub fn bergman_distance(z: &DiskPoint, w: &DiskPoint) -> Result<f64> {
    same_dim(z, w)?;
    Ok(z.coords
        .iter()
        .zip(&w.coords)
        .map(|(&a, &b)| disk_distance(a, b).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Coordinatewise disk automorphism `z -> rotation * (z - a) / (1 - conj(a) z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskAutomorphism {
    pub rotation: C64,
    pub shift: C64,
}

impl DiskAutomorphism {
    pub fn new(angle: f64, shift: C64) -> Result<Self> {
        if !(shift.norm() < 1.0) {
            return Err(Error::Precondition("automorphism shift must lie in the open disk".into()));
        }
        Ok(DiskAutomorphism { rotation: C64::from_polar(1.0, angle), shift })
    }

    pub fn apply(&self, z: C64) -> C64 {
        self.rotation * (z - self.shift) / (1.0 - self.shift.conj() * z)
    }
}

/// The linear map `f(x) = <x, u> / R` from a domain of Euclidean radius `R`
/// into the unit disk, with `u` the unit vector along `w - z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalFunctional {
    pub direction: Vec<C64>,
    pub scale: f64,
}

impl ExtremalFunctional {
    pub fn apply(&self, x: &[C64]) -> C64 {
        self.scale * x.iter().zip(&self.direction).map(|(a, u)| a * u.conj()).sum::<C64>()
    }
}

/// Extremal functional separating `z` and `w`: `R |f(w) - f(z)| = ||w - z||`.
pub fn caratheodory_extremal(z: &DiskPoint, w: &DiskPoint, radius: f64) -> Result<ExtremalFunctional> {
    same_dim(z, w)?;
    if !(radius > 0.0) {
        return Err(Error::Precondition("domain radius must be positive".into()));
    }
    let diff: Vec<C64> = w.coords.iter().zip(&z.coords).map(|(a, b)| a - b).collect();
    let len = diff.iter().map(|d| d.norm_sqr()).sum::<f64>().sqrt();
    if len == 0.0 {
        return Err(Error::Precondition("z = w: the extremal functional has no direction".into()));
    }
    Ok(ExtremalFunctional { direction: diff.iter().map(|d| d / len).collect(), scale: 1.0 / radius })
}

/// A point of the closure of `D^n` or of the compactified `H^n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosurePoint {
    Disk(Vec<C64>),
    HalfPlane(Vec<ExtendedPoint>),
}

/// Distinguished-boundary test: every coordinate on the unit circle (disk model)
/// or in `R ∪ {∞}` (half-plane model), within `tol`.
pub fn shilov_membership(p: &ClosurePoint, tol: f64) -> bool {
    match p {
        ClosurePoint::Disk(v) => !v.is_empty() && v.iter().all(|z| (z.norm() - 1.0).abs() <= tol),
        ClosurePoint::HalfPlane(v) => {
            !v.is_empty()
                && v.iter().all(|p| match p {
                    ExtendedPoint::Finite(z) => z.im.abs() <= tol,
                    ExtendedPoint::Infinity => true,
                })
        }
    }
}

/// `sup { |w - c| : b(w, c) <= r }` on one disk coordinate.
///
/// The hyperbolic disk of radius `r` about `c` is the Euclidean disk with centre
/// `c (1 - s^2) / (1 - s^2 |c|^2)` and radius `s (1 - |c|^2) / (1 - s^2 |c|^2)`,
/// `s = tanh r`; the farthest point from `c` is at distance `s (1 - |c|^2) / (1 - s |c|)`.
pub fn disk_ball_extent(center: C64, r: f64) -> f64 {
    let s = r.tanh();
    let m = center.norm();
    s * (1.0 - m * m) / (1.0 - s * m)
}

/// Upper bound for the Euclidean extent of the Bergman ball of radius `r`.
/// Exact for `n = 1`; for `n >= 2` the Bergman ball sits inside the product of
/// coordinate balls, so the norm of the coordinate extents bounds it.
pub fn ball_euclidean_extent(center: &DiskPoint, r: f64) -> Result<f64> {
    if !center.is_interior() {
        return Err(Error::Precondition("ball centre must be interior".into()));
    }
    if !(r >= 0.0) {
        return Err(Error::Precondition("ball radius must be nonnegative".into()));
    }
    Ok(center.coords.iter().map(|&c| disk_ball_extent(c, r).powi(2)).sum::<f64>().sqrt())
}

/// Polynomial in `n` complex variables.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    nvars: usize,
    terms: Vec<(Vec<u32>, C64)>,
}

impl MultiPoly {
    pub fn new(nvars: usize, terms: Vec<(Vec<u32>, C64)>) -> Result<Self> {
        if terms.iter().any(|(e, _)| e.len() != nvars) {
            return Err(Error::Precondition("exponent vector length must equal the number of variables".into()));
        }
        Ok(MultiPoly { nvars, terms })
    }

    pub fn constant(nvars: usize, c: C64) -> Self {
        MultiPoly { nvars, terms: vec![(vec![0; nvars], c)] }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(Vec<u32>, C64)] {
        &self.terms
    }

    pub fn eval(&self, x: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(e, c)| e.iter().zip(x).fold(*c, |acc, (&k, &xi)| acc * xi.powu(k)))
            .sum()
    }
}

/// Sampled maximum-modulus check: returns `(max |f|` over random points of the
/// closed polydisk`, max |f|` over a regular grid on the torus`)`.
///
/// The torus grid has `ceil(samples^(1/n))` angles per axis, starting at angle 0.
pub fn max_modulus_spotcheck(f: &MultiPoly, samples: usize, seed: u64) -> (f64, f64) {
    let n = f.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut closure_max = 0.0f64;
    let mut x = vec![C64::new(0.0, 0.0); n];
    for _ in 0..samples {
        for xi in x.iter_mut() {
            let r: f64 = rng.gen::<f64>().sqrt();
            let t: f64 = rng.gen_range(0.0..2.0 * PI);
            *xi = C64::from_polar(r, t);
        }
        closure_max = closure_max.max(f.eval(&x).norm());
    }

    let per_axis = ((samples.max(1) as f64).powf(1.0 / n.max(1) as f64).ceil() as usize).max(1);
    let mut shilov_max = 0.0f64;
    let mut idx = vec![0usize; n];
    loop {
        for (xi, &k) in x.iter_mut().zip(&idx) {
            *xi = C64::from_polar(1.0, 2.0 * PI * k as f64 / per_axis as f64);
        }
        shilov_max = shilov_max.max(f.eval(&x).norm());
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return (closure_max, shilov_max);
            }
            idx[pos] += 1;
            if idx[pos] < per_axis {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
