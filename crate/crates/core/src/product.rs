//! Möbius subvarieties of `H^n`, Hodge-genericity and broadness checks, and
//! the density search for `{(j(tau), j(g tau))}` in `C^2`.

use crate::group::{psl2_argmin, RealMatrix, UnimodularMatrix};
use crate::modular::ModularEvaluator;
use crate::{Error, Result, C64};
use num_integer::Integer;
use std::collections::BTreeMap;

const CYCLE_TOL: f64 = 1e-9;

/// `x_i = g x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub i: usize,
    pub j: usize,
    pub g: RealMatrix,
}

/// A subvariety of `H^n` cut out by relations `x_i = g x_j` and constant
/// coordinates. Indices are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct MoebiusVariety {
    n: usize,
    relations: Vec<Relation>,
    constants: Vec<(usize, C64)>,
    /// Root of each coordinate's component and `T` with `x_i = T x_root`.
    root: Vec<usize>,
    to_root: Vec<RealMatrix>,
    constant_component: Vec<bool>,
}

fn near_pm_identity(m: &RealMatrix) -> bool {
    let id = RealMatrix::identity();
    let neg = RealMatrix { a: -1.0, b: 0.0, c: 0.0, d: -1.0 };
    m.sup_distance(&id) < CYCLE_TOL || m.sup_distance(&neg) < CYCLE_TOL
}

impl MoebiusVariety {
    pub fn new(n: usize, relations: Vec<Relation>, constants: Vec<(usize, C64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("ambient dimension must be positive".into()));
        }
        let mut parent: Vec<usize> = (0..n).collect();
        // x_i = t[i] x_parent[i]
        let mut t: Vec<RealMatrix> = vec![RealMatrix::identity(); n];
        fn find(parent: &mut [usize], t: &mut [RealMatrix], i: usize) -> (usize, RealMatrix) {
            let mut path = vec![];
            let mut r = i;
            while parent[r] != r {
                path.push(r);
                r = parent[r];
            }
            // compress, composing transforms from the top down
            for &v in path.iter().rev() {
                let p = parent[v];
                if p != r {
                    t[v] = t[v].mul(&t[p]);
                }
                parent[v] = r;
            }
            (r, t[i])
        }
        for rel in &relations {
            if rel.i >= n || rel.j >= n {
                return Err(Error::Precondition(format!("relation index out of range for n = {n}")));
            }
            let (ri, ti) = find(&mut parent, &mut t, rel.i);
            let (rj, tj) = find(&mut parent, &mut t, rel.j);
            // t_i x_ri = g t_j x_rj
            let link = ti.inverse().mul(&rel.g).mul(&tj);
            if ri == rj {
                if !near_pm_identity(&link) {
                    return Err(Error::InconsistentRelations(format!(
                        "relation x{} = g x{} closes a cycle whose holonomy is not ±I",
                        rel.i + 1,
                        rel.j + 1
                    )));
                }
            } else {
                parent[ri] = rj;
                t[ri] = link;
            }
        }
        let mut root = vec![0; n];
        let mut to_root = vec![RealMatrix::identity(); n];
        for i in 0..n {
            let (r, m) = find(&mut parent, &mut t, i);
            root[i] = r;
            to_root[i] = m;
        }
        let mut root_value: BTreeMap<usize, C64> = BTreeMap::new();
        for &(i, c) in &constants {
            if i >= n {
                return Err(Error::Precondition(format!("constant index out of range for n = {n}")));
            }
            if !(c.im > 0.0) {
                return Err(Error::Precondition("constant coordinates must lie in the upper half-plane".into()));
            }
            let v = to_root[i]
                .inverse()
                .act(c)
                .finite()
                .ok_or_else(|| Error::Precondition("constant maps to infinity".into()))?;
            if let Some(prev) = root_value.insert(root[i], v) {
                if (prev - v).norm() > CYCLE_TOL * (1.0 + v.norm()) {
                    return Err(Error::InconsistentRelations(format!(
                        "constant on x{} contradicts another constant in its component",
                        i + 1
                    )));
                }
            }
        }
        let constant_component = (0..n).map(|i| root_value.contains_key(&root[i])).collect();
        Ok(MoebiusVariety { n, relations, constants, root, to_root, constant_component })
    }

    /// `{(tau, g tau)}` in `H^2`.
    pub fn graph(g: RealMatrix) -> Self {
        MoebiusVariety::new(2, vec![Relation { i: 1, j: 0, g }], vec![]).expect("a single relation is consistent")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn constants(&self) -> &[(usize, C64)] {
        &self.constants
    }

    /// Component representative of each coordinate.
    pub fn component_of(&self, i: usize) -> usize {
        self.root[i]
    }

    pub fn is_constant(&self, i: usize) -> bool {
        self.constant_component[i]
    }

    /// `g` with `x_i = g x_j`, when `i` and `j` are linked.
    pub fn composite(&self, i: usize, j: usize) -> Option<RealMatrix> {
        (self.root[i] == self.root[j]).then(|| self.to_root[i].mul(&self.to_root[j].inverse()))
    }

    /// Representatives of the components without constant coordinates.
    pub fn free_components(&self) -> Vec<usize> {
        let mut roots: Vec<usize> = (0..self.n).filter(|&i| !self.constant_component[i]).map(|i| self.root[i]).collect();
        roots.sort_unstable();
        roots.dedup();
        roots
    }

    pub fn dimension(&self) -> usize {
        self.free_components().len()
    }

    /// Dimension of the projection to the coordinates in `subset`.
    pub fn projection_dimension(&self, subset: &[usize]) -> usize {
        let mut roots: Vec<usize> =
            subset.iter().filter(|&&i| !self.constant_component[i]).map(|&i| self.root[i]).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

/// Best rational approximation `p/q` of `x` with `q <= bound`, from the
/// continued-fraction convergents and the last admissible semiconvergent.
pub fn best_rational(x: f64, bound: i64) -> (i64, i64) {
    let sign = if x < 0.0 { -1 } else { 1 };
    let x = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut rem = x;
    let mut best = (x.round() as i128, 1i128);
    for _ in 0..64 {
        let a = rem.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > bound as i128 {
            // largest semiconvergent within the bound
            let t = (bound as i128 - q0) / q1;
            if t > 0 {
                let (ps, qs) = (t * p1 + p0, t * q1 + q0);
                if (x - ps as f64 / qs as f64).abs() < (x - best.0 as f64 / best.1 as f64).abs() {
                    best = (ps, qs);
                }
            }
            break;
        }
        best = (p2, q2);
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rem - rem.floor();
        if frac < 1e-15 {
            break;
        }
        rem = 1.0 / frac;
    }
    (sign * best.0 as i64, best.1 as i64)
}

/// A relation matrix checked for rationality.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalityCheck {
    pub i: usize,
    pub j: usize,
    pub matrix: [f64; 4],
    /// Entries divided by the smallest-magnitude nonzero entry.
    pub normalized: [f64; 4],
    /// Rational reconstruction of each normalized entry, `(p, q)`.
    pub approximations: [(i64, i64); 4],
    pub max_deviation: f64,
    pub rational: bool,
}

/// Outcome of [`is_hodge_generic`]. This is a numerical certificate only:
/// "generic" means no relation is rational up to the given bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeReport {
    pub generic: bool,
    pub constant_coordinates: Vec<usize>,
    pub checks: Vec<RationalityCheck>,
    pub reasons: Vec<String>,
    pub denom_bound: i64,
    pub tol: f64,
}

/// Is `m` (up to scale) within `tol` of a rational matrix with denominators at
/// most `denom_bound`?
pub fn rationality_check(i: usize, j: usize, m: &RealMatrix, denom_bound: i64, tol: f64) -> RationalityCheck {
    let e = m.entries();
    let pivot = e.iter().copied().filter(|x| *x != 0.0).min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
    let normalized = e.map(|x| x / pivot);
    let approximations = normalized.map(|x| best_rational(x, denom_bound));
    let max_deviation = normalized
        .iter()
        .zip(approximations.iter())
        .map(|(x, (p, q))| (x - *p as f64 / *q as f64).abs())
        .fold(0.0, f64::max);
    RationalityCheck { i, j, matrix: e, normalized, approximations, max_deviation, rational: max_deviation <= tol }
}

/// Hodge-genericity of a Möbius variety: no constant coordinate and no relation
/// (direct or composite) proportional to a rational matrix.
pub fn is_hodge_generic(l: &MoebiusVariety, denom_bound: i64, tol: f64) -> HodgeReport {
    let mut reasons = Vec::new();
    let constant_coordinates: Vec<usize> = (0..l.n).filter(|&i| l.is_constant(i)).collect();
    if !constant_coordinates.is_empty() {
        reasons.push(format!(
            "constant coordinates {:?}",
            constant_coordinates.iter().map(|i| i + 1).collect::<Vec<_>>()
        ));
    }
    let mut checks = Vec::new();
    for i in 0..l.n {
        for j in 0..i {
            if l.is_constant(i) {
                continue;
            }
            if let Some(g) = l.composite(i, j) {
                let c = rationality_check(i, j, &g, denom_bound, tol);
                if c.rational {
                    reasons.push(format!(
                        "x{} = g x{} with g rational up to scale (deviation {:e})",
                        i + 1,
                        j + 1,
                        c.max_deviation
                    ));
                }
                checks.push(c);
            }
        }
    }
    HodgeReport { generic: reasons.is_empty(), constant_coordinates, checks, reasons, denom_bound, tol }
}

/// `dims_W(I)` for every nonempty `I` of `{0..n}`, keyed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitProfile {
    n: usize,
    dims: Vec<usize>,
}

fn popcount(mask: usize) -> usize {
    mask.count_ones() as usize
}

/// Members of the subset encoded by `mask`.
pub fn subset_of(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

impl SplitProfile {
    /// `dims[mask - 1]` is `dims_W` of the subset with that bitmask.
    pub fn new(n: usize, dims: Vec<usize>) -> Result<Self> {
        if n == 0 || n > 20 {
            return Err(Error::InconsistentProfile(format!("unsupported dimension {n}")));
        }
        if dims.len() != (1 << n) - 1 {
            return Err(Error::InconsistentProfile(format!(
                "expected {} subset dimensions, got {}",
                (1usize << n) - 1,
                dims.len()
            )));
        }
        for mask in 1..(1usize << n) {
            let d = dims[mask - 1];
            if d > popcount(mask) {
                return Err(Error::InconsistentProfile(format!(
                    "dims_W({:?}) = {d} exceeds the subset size",
                    subset_of(mask, n)
                )));
            }
            for i in 0..n {
                let sub = mask & !(1 << i);
                if sub != mask && sub != 0 && dims[sub - 1] > d {
                    return Err(Error::InconsistentProfile(format!(
                        "dims_W not monotone: {:?} -> {:?}",
                        subset_of(sub, n),
                        subset_of(mask, n)
                    )));
                }
            }
        }
        Ok(SplitProfile { n, dims })
    }

    pub fn from_fn(n: usize, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        SplitProfile::new(n, (1..(1usize << n)).map(|m| f(&subset_of(m, n))).collect())
    }

    /// `W = C^n`.
    pub fn full(n: usize) -> Self {
        SplitProfile::from_fn(n, |s| s.len()).expect("full profile is consistent")
    }

    /// `W` a point.
    pub fn point(n: usize) -> Self {
        SplitProfile::from_fn(n, |_| 0).expect("point profile is consistent")
    }

    /// `W = {w_i = c}`.
    pub fn hyperplane(n: usize, i: usize) -> Self {
        SplitProfile::from_fn(n, |s| s.len() - usize::from(s.contains(&i))).expect("hyperplane profile is consistent")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self, mask: usize) -> usize {
        self.dims[mask - 1]
    }
}

/// Outcome of [`is_broad`].
#[derive(Debug, Clone, PartialEq)]
pub struct BroadReport {
    pub broad: bool,
    /// First violating subset in bitmask order.
    pub failing: Option<Vec<usize>>,
}

/// `L` is broad for `W` iff `dim p_I(L) + dims_W(I) >= |I|` for every
/// nonempty coordinate subset `I`.
pub fn is_broad(l: &MoebiusVariety, profile: &SplitProfile) -> Result<BroadReport> {
    if profile.n != l.n {
        return Err(Error::InconsistentProfile(format!("profile is for n = {}, variety has n = {}", profile.n, l.n)));
    }
    for mask in 1..(1usize << l.n) {
        let s = subset_of(mask, l.n);
        if l.projection_dimension(&s) + profile.dim(mask) < s.len() {
            return Ok(BroadReport { broad: false, failing: Some(s) });
        }
    }
    Ok(BroadReport { broad: true, failing: None })
}

/// Outcome of [`density_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityResult {
    /// `gamma tau0`.
    pub tau: C64,
    pub tau0: C64,
    pub gamma: UnimodularMatrix,
    /// `|j(tau0) - c1|`.
    pub err1: f64,
    /// `|j(g tau) - c2|`.
    pub err2: f64,
    pub candidates: usize,
}

/// Settings for the Hodge-genericity guard of [`density_search`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HodgeGuard {
    pub denom_bound: i64,
    pub tol: f64,
}

impl Default for HodgeGuard {
    fn default() -> Self {
        HodgeGuard { denom_bound: 1_000_000, tol: 1e-12 }
    }
}

/// Searches `gamma` of height at most `height` so that `tau = gamma tau0`,
/// with `j(tau0) = c1`, makes `j(g tau)` closest to `c2`.
pub fn density_search(
    ev: &ModularEvaluator,
    g: &RealMatrix,
    c1: C64,
    c2: C64,
    height: i64,
    guard: &HodgeGuard,
) -> Result<DensityResult> {
    if height < 1 {
        return Err(Error::Precondition("height must be at least 1".into()));
    }
    let report = is_hodge_generic(&MoebiusVariety::graph(*g), guard.denom_bound, guard.tol);
    if !report.generic {
        return Err(Error::Precondition(format!("g is not Hodge-generic: {}", report.reasons.join("; "))));
    }
    let tau0 = ev.invert_j(c1)?;
    let err1 = (ev.eval_j(tau0)? - c1).norm();
    let gm = g.entries();
    let counter = std::sync::atomic::AtomicUsize::new(0);
    let best = psl2_argmin(height, |m| {
        counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        let tau = crate::group::act_finite(m.map(|x| x as f64), tau0);
        let gt = crate::group::act_finite(gm, tau);
        let j = ev.eval_j(gt).ok()?;
        Some(((j - c2).norm(), tau))
    });
    let (m, err2, tau) = best.ok_or_else(|| Error::Precondition("no candidate evaluated".into()))?;
    let [a, b, c, d] = m;
    debug_assert_eq!(Integer::gcd(&c, &d), 1);
    Ok(DensityResult {
        tau,
        tau0,
        gamma: UnimodularMatrix::from_i64(a, b, c, d)?,
        err1,
        err2,
        candidates: counter.into_inner(),
    })
}
