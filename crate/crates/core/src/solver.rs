//! Witness localization for `j(z) = p(z)` and `P(z, j(z)) = 0`.
//!
//! A zero `Z1` of `j - p(x0)` is moved toward the real boundary point `x0` by
//! an orbit `gamma_k`; on the image disk `gamma_k(B)` the perturbation
//! `p - p(x0)` is small compared to `j - p(x0)`, so the zero count of the
//! perturbed function is certified by Rouché and checked by quadrature.

use crate::group::{orbit_toward, BoundaryPoint, UnimodularMatrix};
use crate::modular::{rho, ModularEvaluator};
use crate::poly::{horner, BiPoly};
use crate::{Error, Result, C64, I};
use std::f64::consts::PI;

/// A holomorphic right-hand side `p`.
#[derive(Debug, Clone, PartialEq)]
pub enum Transcendental {
    Exp,
    Constant(C64),
    /// Polynomial in `z`, ascending coefficients.
    Polynomial(Vec<C64>),
}

impl Transcendental {
    /// `(p(z), p'(z))`.
    pub fn eval(&self, z: C64) -> (C64, C64) {
        match self {
            Transcendental::Exp => {
                let e = z.exp();
                (e, e)
            }
            Transcendental::Constant(c) => (*c, C64::new(0.0, 0.0)),
            Transcendental::Polynomial(cs) => horner(cs, z),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Transcendental::Exp => "exp".into(),
            Transcendental::Constant(c) => format!("constant {c}"),
            Transcendental::Polynomial(cs) => format!("polynomial of degree {}", cs.len().saturating_sub(1)),
        }
    }
}

/// The equation to solve: `P(z, j(z)) = 0` along a chosen branch `w = p(z)`
/// of `P(z, w) = 0`, or `j(z) = p(z)` for an explicit `p`.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetFunction {
    Algebraic {
        poly: BiPoly,
        /// Index into the roots of `P(x0, ·)` sorted by modulus then argument;
        /// `None` picks the smallest.
        branch: Option<usize>,
    },
    Transcendental(Transcendental),
}

impl TargetFunction {
    pub fn algebraic(poly: BiPoly) -> Result<Self> {
        if !poly.depends_on_w() {
            return Err(Error::Precondition("polynomial does not involve w: projection to z is not dominant".into()));
        }
        Ok(TargetFunction::Algebraic { poly, branch: None })
    }

    /// `G = P(z, j(z))` or `j(z) - p(z)`, and `G'`, given `(j, j')` at `z`.
    fn g(&self, z: C64, j: C64, dj: C64) -> (C64, C64) {
        match self {
            TargetFunction::Algebraic { poly, .. } => {
                let (v, pz, pw) = poly.eval_with_partials(z, j);
                (v, pz + pw * dj)
            }
            TargetFunction::Transcendental(t) => {
                let (p, dp) = t.eval(z);
                (j - p, dj - dp)
            }
        }
    }
}

/// Quadrature controls for [`zero_count`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCountConfig {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// Minimum admissible `|F|` on the contour.
    pub floor: f64,
}

impl Default for ZeroCountConfig {
    fn default() -> Self {
        ZeroCountConfig { initial_nodes: 64, max_nodes: 1 << 15, floor: 1e-12 }
    }
}

/// Result of an argument-principle count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroCount {
    pub count: i64,
    /// Unrounded `(1/2 pi i) ∮ F'/F`.
    pub estimate: C64,
    pub nodes: usize,
    pub min_modulus: f64,
}

/// Number of zeros of `F` inside `|z - center| = radius`, where `f` returns
/// `(F(z), F'(z))`.
///
/// The trapezoid rule on the circle is doubled from `initial_nodes` until two
/// successive estimates round to the same integer and are within 0.25 of it.
pub fn zero_count<F>(f: F, center: C64, radius: f64, cfg: &ZeroCountConfig) -> Result<ZeroCount>
where
    F: Fn(C64) -> Result<(C64, C64)>,
{
    if !(radius > 0.0) {
        return Err(Error::Precondition("contour radius must be positive".into()));
    }
    let mut n = cfg.initial_nodes.max(4);
    let mut sum = C64::new(0.0, 0.0);
    let mut min_modulus = f64::INFINITY;
    let mut evaluated = 0usize;
    let mut previous: Option<C64> = None;
    loop {
        // new nodes are the odd multiples of 2 pi / n (all of them on the first pass)
        let (start, stride) = if evaluated == 0 { (0, 1) } else { (1, 2) };
        let mut k = start;
        while k < n {
            let e = C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            let (v, dv) = f(center + radius * e)?;
            min_modulus = min_modulus.min(v.norm());
            if !(v.norm() >= cfg.floor) {
                return Err(Error::ContourProximity { min_modulus: v.norm(), threshold: cfg.floor });
            }
            sum += dv / v * radius * e;
            k += stride;
        }
        evaluated = n;
        let estimate = sum / n as f64;
        let rounded = estimate.re.round();
        let near = (estimate.re - rounded).abs() < 0.25 && estimate.im.abs() < 0.25;
        if let Some(prev) = previous {
            if near && prev.re.round() == rounded && (prev.re - rounded).abs() < 0.25 {
                return Ok(ZeroCount { count: rounded as i64, estimate, nodes: n, min_modulus });
            }
        }
        if n >= cfg.max_nodes {
            return Err(Error::QuadratureUnstable { nodes: n, estimate: estimate.re });
        }
        previous = Some(estimate);
        n *= 2;
    }
}

/// [`zero_count`] for functions without an analytic derivative: central
/// differences with step `radius * 1e-6`.
pub fn zero_count_fd<F>(f: F, center: C64, radius: f64, cfg: &ZeroCountConfig) -> Result<ZeroCount>
where
    F: Fn(C64) -> Result<C64>,
{
    let h = radius * 1e-6;
    zero_count(|z| Ok((f(z)?, (f(z + h)? - f(z - h)?) / (2.0 * h))), center, radius, cfg)
}

/// Newton controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Known multiplicity of the zero; the step is scaled by it.
    pub multiplicity: u32,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { tolerance: 1e-12, max_iterations: 100, multiplicity: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonResult {
    pub z: C64,
    pub residual: f64,
    pub iterations: usize,
}

/// Newton iteration for `G(z) = 0` from `z0`; `g` returns `(G, G')`.
///
/// Iterates until `|G| < tolerance` stops improving, and returns the iterate
/// with the smallest residual. When a contour `(center, radius)` is given,
/// leaving it is an error.
pub fn newton_refine<F>(g: F, z0: C64, contour: Option<(C64, f64)>, cfg: &NewtonConfig) -> Result<NewtonResult>
where
    F: Fn(C64) -> Result<(C64, C64)>,
{
    let mut z = z0;
    let mut best = NewtonResult { z, residual: f64::INFINITY, iterations: 0 };
    let mut last = f64::INFINITY;
    for it in 0..=cfg.max_iterations {
        let (v, dv) = g(z)?;
        let r = v.norm();
        if r < best.residual {
            best = NewtonResult { z, residual: r, iterations: it };
        }
        if r == 0.0 || (r < cfg.tolerance && r > 0.25 * last) {
            break;
        }
        last = r;
        let step = cfg.multiplicity as f64 * v / dv;
        if !step.is_finite() {
            break;
        }
        z -= step;
        if let Some((c, rad)) = contour {
            if (z - c).norm() >= rad {
                return Err(Error::NewtonEscape);
            }
        }
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            let r = g(z)?.0.norm();
            if r < best.residual {
                best = NewtonResult { z, residual: r, iterations: it + 1 };
            }
            break;
        }
    }
    if best.residual < cfg.tolerance {
        Ok(best)
    } else {
        Err(Error::NewtonStagnation { best_residual: best.residual })
    }
}

/// The contour certifying one witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub center: C64,
    pub radius: f64,
    pub zero_count: i64,
}

/// A certified solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub target: BoundaryPoint,
    pub z: C64,
    pub jz: C64,
    /// `|P(z, j(z))|` or `|j(z) - p(z)|`.
    pub residual: f64,
    pub certificate: Certificate,
    pub orbit_index: usize,
    /// Local multiplicity of `j - p(x0)` at the seed: 1, or 2 / 3 at the
    /// elliptic points. The certificate counts this many zeros.
    pub multiplicity: u32,
}

/// Inputs to [`rouche_localize`].
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessProblem {
    pub target: TargetFunction,
    pub boundary_point: BoundaryPoint,
    pub count: usize,
    /// Initial radius of the ball about the seed `Z1`; halved as needed.
    pub ball_radius: f64,
    pub orbit_depth: usize,
    /// Translated contours must lie within this distance of `x0`.
    pub neighborhood_radius: f64,
    pub residual_threshold: f64,
    /// Samples on each contour for the `delta` and `delta/2` tests.
    pub contour_samples: usize,
}

impl WitnessProblem {
    pub fn new(target: TargetFunction, boundary_point: BoundaryPoint, count: usize) -> Self {
        WitnessProblem {
            target,
            boundary_point,
            count,
            ball_radius: 0.05,
            orbit_depth: 30,
            neighborhood_radius: 0.1,
            residual_threshold: 1e-8,
            contour_samples: 256,
        }
    }

    fn validate(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::Precondition("witness count must be at least 1".into()));
        }
        if !(self.ball_radius > 0.0) || !(self.neighborhood_radius > 0.0) || !(self.residual_threshold > 0.0) {
            return Err(Error::Precondition("radii and thresholds must be positive".into()));
        }
        if self.contour_samples < 8 {
            return Err(Error::Precondition("at least 8 contour samples are needed".into()));
        }
        self.boundary_point
            .value()
            .ok_or_else(|| Error::Precondition("the cusp at infinity is not a supported target".into()))
    }
}

/// Witnesses together with what happened along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Localization {
    pub witnesses: Vec<Witness>,
    /// `p(x0)`.
    pub w0: C64,
    /// Seed with `j(Z1) = w0`, in the fundamental domain.
    pub seed: C64,
    pub multiplicity: u32,
    /// Radius of the ball `B` after shrinking.
    pub ball_radius: f64,
    /// Sampled `min |j - w0|` on the boundary of `B`.
    pub delta: f64,
    /// Orbit indices that were tried and why they were skipped.
    pub diagnostics: Vec<String>,
}

impl Localization {
    pub fn complete(&self, count: usize) -> bool {
        self.witnesses.len() >= count
    }
}

const ELLIPTIC_TOL: f64 = 1e-6;
const MIN_BALL_RADIUS: f64 = 1e-9;

/// Exact image of the disk `|z - z0| <= r` (in the upper half-plane) under a
/// unimodular map.
pub fn image_disk(m: &[f64; 4], z0: C64, r: f64) -> (C64, f64) {
    let [a, b, c, d] = *m;
    if c == 0.0 {
        // a d = 1
        return ((a * z0 + b) / d, r * (a / d).abs());
    }
    // m(z) = a/c - 1 / (c^2 (z - p)), p = -d/c
    let u = z0 + d / c;
    let s = u.norm_sqr() - r * r;
    let center = a / c - u.conj() / (c * c * s);
    (center, r / (c * c * s.abs()))
}

fn disks_overlap(a: (C64, f64), b: (C64, f64)) -> bool {
    (a.0 - b.0).norm() < a.1 + b.1
}

fn circle(center: C64, radius: f64, n: usize) -> impl Iterator<Item = C64> {
    (0..n).map(move |k| center + C64::from_polar(radius, 2.0 * PI * k as f64 / n as f64))
}

fn multiplicity_at(z: C64) -> u32 {
    if (z - I).norm() < ELLIPTIC_TOL {
        2
    } else if (z - rho()).norm() < ELLIPTIC_TOL || (z - rho() - 1.0).norm() < ELLIPTIC_TOL {
        3
    } else {
        1
    }
}

/// `p(x0)` for the problem's target, with the branch chosen by modulus then
/// argument.
pub fn boundary_value(target: &TargetFunction, x0: f64) -> Result<C64> {
    let x = C64::new(x0, 0.0);
    match target {
        TargetFunction::Transcendental(t) => Ok(t.eval(x).0),
        TargetFunction::Algebraic { poly, branch } => {
            if !poly.depends_on_w() {
                return Err(Error::Precondition("polynomial does not involve w".into()));
            }
            let mut roots = poly.roots_in_w(x)?;
            if roots.is_empty() {
                return Err(Error::SingularBranch(format!("P({x0}, w) has no roots in w")));
            }
            // argument measured in [0, 2 pi)
            let angle = |z: &C64| {
                let t = z.arg();
                if t < -1e-12 {
                    t + 2.0 * PI
                } else {
                    t.max(0.0)
                }
            };
            roots.sort_by(|a, b| {
                let (na, nb) = (a.norm(), b.norm());
                if (na - nb).abs() <= 1e-12 * na.max(nb).max(1.0) {
                    angle(a).total_cmp(&angle(b))
                } else {
                    na.total_cmp(&nb)
                }
            });
            let idx = branch.unwrap_or(0);
            let w0 = *roots
                .get(idx)
                .ok_or_else(|| Error::Precondition(format!("branch {idx} out of range ({} roots)", roots.len())))?;
            let (_, _, pw) = poly.eval_with_partials(x, w0);
            let scale = poly.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max) * (1.0 + w0.norm());
            if pw.norm() <= 1e-10 * scale {
                return Err(Error::SingularBranch(format!(
                    "P({x0}, w) has a multiple root at w = {w0}; choose a different boundary point"
                )));
            }
            Ok(w0)
        }
    }
}

/// Value of the branch continuing `w0` at `z`.
fn branch_value(target: &TargetFunction, z: C64, w0: C64) -> Result<C64> {
    match target {
        TargetFunction::Transcendental(t) => Ok(t.eval(z).0),
        TargetFunction::Algebraic { poly, .. } => {
            let roots = poly.roots_in_w(z)?;
            roots
                .into_iter()
                .min_by(|a, b| (a - w0).norm().total_cmp(&(b - w0).norm()))
                .ok_or_else(|| Error::SingularBranch("branch disappears near the boundary point".into()))
        }
    }
}

/// Shrinks a ball about `z1` until `j - w0` has exactly `m` zeros in it and
/// its images under short unimodular maps not fixing `z1` are disjoint from it.
fn seed_ball(ev: &ModularEvaluator, w0: C64, z1: C64, m: u32, r0: f64, zc: &ZeroCountConfig) -> Result<f64> {
    let short: Vec<[f64; 4]> = crate::group::psl2_matrices(3)
        .into_iter()
        .map(|g| g.map(|x| x as f64))
        .filter(|g| (crate::group::act_finite(*g, z1) - z1).norm() > 1e-9)
        .collect();
    let mut r = r0.min(0.5 * z1.im);
    let mut last_err = None;
    while r >= MIN_BALL_RADIUS {
        let count = zero_count(|z| ev.eval_j_with_derivative(z).map(|(j, dj)| (j - w0, dj)), z1, r, zc);
        match count {
            Ok(c) if c.count == m as i64 => {
                if short.iter().all(|g| !disks_overlap(image_disk(g, z1, r), (z1, r))) {
                    return Ok(r);
                }
            }
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
        r *= 0.5;
    }
    Err(last_err.unwrap_or_else(|| Error::Precondition("no admissible ball about the seed".into())))
}

/// Localizes witnesses of the problem near its boundary point.
///
/// Returns partial results (with diagnostics) when fewer than `count`
/// translates satisfy the margin test within `orbit_depth`.
pub fn rouche_localize(ev: &ModularEvaluator, problem: &WitnessProblem) -> Result<Localization> {
    let x0 = problem.validate()?;
    let target = &problem.target;
    let w0 = boundary_value(target, x0)?;
    let z1 = ev.invert_j(w0)?;
    let m = multiplicity_at(z1);
    let zc = ZeroCountConfig::default();
    let r = seed_ball(ev, w0, z1, m, problem.ball_radius, &zc)?;
    let n = problem.contour_samples;

    let mut delta = f64::INFINITY;
    for z in circle(z1, r, n) {
        delta = delta.min((ev.eval_j(z)? - w0).norm());
    }

    let orbit = orbit_toward(problem.boundary_point, z1, problem.orbit_depth)?;
    let mut out = Localization {
        witnesses: Vec::new(),
        w0,
        seed: z1,
        multiplicity: m,
        ball_radius: r,
        delta,
        diagnostics: Vec::new(),
    };
    if orbit.truncated {
        out.diagnostics.push(format!("orbit truncated at {} matrices", orbit.matrices.len()));
    }
    let g_of = |z: C64| -> Result<(C64, C64)> {
        let (j, dj) = ev.eval_j_with_derivative(z)?;
        Ok(target.g(z, j, dj))
    };

    for (idx, gamma) in orbit.matrices.iter().enumerate() {
        if out.witnesses.len() >= problem.count {
            break;
        }
        let k = idx + 1;
        match certify_translate(ev, problem, &g_of, gamma, z1, r, w0, delta, m, x0, &zc, &out.witnesses) {
            Ok(w) => {
                let mut w = w;
                w.orbit_index = k;
                out.witnesses.push(w);
            }
            Err(why) => out.diagnostics.push(format!("k = {k}: {why}")),
        }
    }
    if out.witnesses.len() < problem.count {
        out.diagnostics.push(format!(
            "found {} of {} witnesses within orbit depth {}",
            out.witnesses.len(),
            problem.count,
            problem.orbit_depth
        ));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn certify_translate<G>(
    ev: &ModularEvaluator,
    problem: &WitnessProblem,
    g_of: &G,
    gamma: &UnimodularMatrix,
    z1: C64,
    r: f64,
    w0: C64,
    delta: f64,
    m: u32,
    x0: f64,
    zc: &ZeroCountConfig,
    earlier: &[Witness],
) -> std::result::Result<Witness, String>
where
    G: Fn(C64) -> Result<(C64, C64)>,
{
    let gm = gamma.to_f64();
    let (center, radius) = image_disk(&gm, z1, r);
    if (center - x0).norm() + radius > problem.neighborhood_radius {
        return Err("contour outside the neighborhood of the boundary point".into());
    }
    if earlier.iter().any(|w| disks_overlap((w.certificate.center, w.certificate.radius), (center, radius))) {
        return Err("contour overlaps an earlier one".into());
    }
    let mut sup = 0.0f64;
    for z in circle(center, radius, problem.contour_samples) {
        let p = branch_value(&problem.target, z, w0).map_err(|e| e.to_string())?;
        sup = sup.max((p - w0).norm());
    }
    if !(sup < 0.5 * delta) {
        return Err(format!("margin test failed: sup |p - p(x0)| = {sup:e} >= delta/2 = {:e}", 0.5 * delta));
    }
    let count = zero_count(g_of, center, radius, zc).map_err(|e| e.to_string())?;
    if count.count != m as i64 {
        return Err(format!("zero count {} differs from multiplicity {m}", count.count));
    }
    let start = crate::group::act_finite(gm, z1);
    let newton = NewtonConfig { tolerance: problem.residual_threshold, max_iterations: 100, multiplicity: m };
    let refined = newton_refine(g_of, start, Some((center, radius)), &newton).map_err(|e| e.to_string())?;
    let jz = ev.eval_j(refined.z).map_err(|e| e.to_string())?;
    let residual = g_of(refined.z).map_err(|e| e.to_string())?.0.norm();
    if !(residual < problem.residual_threshold) {
        return Err(format!("residual {residual:e} above threshold"));
    }
    Ok(Witness {
        target: problem.boundary_point,
        z: refined.z,
        jz,
        residual,
        certificate: Certificate { center, radius, zero_count: count.count },
        orbit_index: 0,
        multiplicity: m,
    })
}

/// Per-target outcome of [`find_witnesses`].
#[derive(Debug, Clone, PartialEq)]
pub struct TargetOutcome {
    pub target: BoundaryPoint,
    pub result: std::result::Result<Localization, String>,
}

/// Witnesses of `P(z, j(z)) = 0` near each boundary target.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessBatch {
    /// Sorted by `(target, orbit_index)`.
    pub witnesses: Vec<Witness>,
    pub outcomes: Vec<TargetOutcome>,
}

/// Runs [`rouche_localize`] for every target with the smallest-modulus
/// branch. A failing target is reported in `outcomes` and does not fail the
/// batch. `template` supplies everything except the target point.
pub fn find_witnesses(
    ev: &ModularEvaluator,
    poly: &BiPoly,
    targets: &[BoundaryPoint],
    per_target: usize,
    template: Option<&WitnessProblem>,
) -> Result<WitnessBatch> {
    let target = TargetFunction::algebraic(poly.clone())?;
    localize_many(ev, &target, targets, per_target, template)
}

/// [`find_witnesses`] for an arbitrary target function.
pub fn localize_many(
    ev: &ModularEvaluator,
    target: &TargetFunction,
    targets: &[BoundaryPoint],
    per_target: usize,
    template: Option<&WitnessProblem>,
) -> Result<WitnessBatch> {
    for (i, a) in targets.iter().enumerate() {
        if targets[..i].iter().any(|b| b.value() == a.value()) {
            return Err(Error::Precondition(format!("duplicate target {a}")));
        }
    }
    let run = |x0: &BoundaryPoint| -> TargetOutcome {
        let mut problem = match template {
            Some(t) => t.clone(),
            None => WitnessProblem::new(target.clone(), *x0, per_target),
        };
        problem.target = target.clone();
        problem.boundary_point = *x0;
        problem.count = per_target;
        TargetOutcome { target: *x0, result: rouche_localize(ev, &problem).map_err(|e| e.to_string()) }
    };
    #[cfg(feature = "parallel")]
    let mut outcomes: Vec<TargetOutcome> = {
        use rayon::prelude::*;
        targets.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let mut outcomes: Vec<TargetOutcome> = targets.iter().map(run).collect();

    let key = |b: &BoundaryPoint| b.value().unwrap_or(f64::INFINITY);
    outcomes.sort_by(|a, b| key(&a.target).total_cmp(&key(&b.target)));
    let mut witnesses: Vec<Witness> = Vec::new();
    for o in &outcomes {
        if let Ok(loc) = &o.result {
            for w in &loc.witnesses {
                // contours from different targets must not overlap either
                let c = (w.certificate.center, w.certificate.radius);
                if !witnesses.iter().any(|v| disks_overlap((v.certificate.center, v.certificate.radius), c)) {
                    witnesses.push(w.clone());
                }
            }
        }
    }
    witnesses.sort_by(|a, b| key(&a.target).total_cmp(&key(&b.target)).then(a.orbit_index.cmp(&b.orbit_index)));
    Ok(WitnessBatch { witnesses, outcomes })
}
