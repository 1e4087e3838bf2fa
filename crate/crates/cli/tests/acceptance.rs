//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Every tolerance and time budget used below is pinned in this file.

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use shilov::geometry::{self, DiskAutomorphism, DiskPoint, TangentVector};
use shilov::group::{self, BoundaryPoint, RealMatrix};
use shilov::modular::{rho, ModularEvaluator};
use shilov::poly::BiPoly;
use shilov::product::{self, HodgeGuard, MoebiusVariety, Relation, SplitProfile};
use shilov::solver::{self, TargetFunction, Transcendental, Witness, WitnessProblem};
use shilov::special::{self, ClassPolynomialConfig};
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

const SEED: u64 = 20_240_917;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Runs a criterion, enforcing its time budget.
fn run(id: u32, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f));
    let elapsed = start.elapsed();
    let mut v = match outcome {
        Ok(v) => v,
        Err(e) => {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
        }
    };
    if let Some(b) = budget {
        if elapsed > b {
            v.pass = false;
            v.detail = format!("{}; over budget {:?}", v.detail, b);
        }
    }
    println!(
        "criterion {id:>2} {}: {title} [{:.2?}] {}",
        if v.pass { "PASS" } else { "FAIL" },
        elapsed,
        v.detail
    );
    v.pass
}

fn ev() -> ModularEvaluator {
    ModularEvaluator::new(60).unwrap()
}

fn rational(p: i64, q: i64) -> BoundaryPoint {
    BoundaryPoint::rational(p, q).unwrap()
}

/// A random element of SL2(Z) with entries at most `h` in size.
fn random_gamma(rng: &mut ChaCha8Rng, h: i64) -> [i64; 4] {
    loop {
        let (c, d) = (rng.gen_range(-h..=h), rng.gen_range(-h..=h));
        let mats = group::psl2_with_bottom_row(c, d, h);
        if !mats.is_empty() {
            return mats[rng.gen_range(0..mats.len())];
        }
    }
}

fn act(m: [i64; 4], z: C64) -> C64 {
    let [a, b, c, d] = m.map(|x| x as f64);
    (a * z + b) / (c * z + d)
}

fn criterion_1() -> Verdict {
    let ev = ev();
    let i = C64::new(0.0, 1.0);
    let e_i = (ev.eval_j(i).unwrap() - 1728.0).norm();
    let e_rho = ev.eval_j(rho()).unwrap().norm();
    let j2i = ev.eval_j(2.0 * i).unwrap();
    let nearest = j2i.re.round();
    let rel_2i = (j2i - nearest).norm() / nearest.abs();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_auto = 0.0f64;
    for _ in 0..200 {
        let g = random_gamma(&mut rng, 20);
        let z = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.1..3.0));
        let jz = ev.eval_j(z).unwrap();
        let jgz = ev.eval_j(act(g, z)).unwrap();
        worst_auto = worst_auto.max((jgz - jz).norm() / (1.0 + jz.norm()));
    }
    let mut worst_deriv = 0.0f64;
    for _ in 0..100 {
        let z = C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.9..2.5));
        if (z - i).norm() < 0.1 || (z - rho()).norm() < 0.1 || (z - rho() - 1.0).norm() < 0.1 {
            continue;
        }
        let h = 1e-5;
        let fd = (ev.eval_j(z + h).unwrap() - ev.eval_j(z - h).unwrap()) / (2.0 * h);
        let an = ev.eval_j_derivative(z).unwrap();
        worst_deriv = worst_deriv.max((fd - an).norm() / an.norm());
    }
    let pass = e_i < 1e-9 && e_rho < 1e-9 && nearest == 287496.0 && rel_2i < 1e-6 && worst_auto < 1e-9 && worst_deriv < 1e-6;
    verdict(
        pass,
        format!(
            "|j(i)-1728| = {e_i:.1e}, |j(rho)| = {e_rho:.1e}, j(2i) rel gap {rel_2i:.1e} to {nearest}, automorphy {worst_auto:.1e}, j' vs FD {worst_deriv:.1e}"
        ),
    )
}

/// Geodesic length by Gauss-Legendre quadrature of the metric along the
/// hyperbolic segment `t -> phi_z(t u)`.
fn quadrature_distance(z: C64, w: C64) -> f64 {
    let phi = |u: C64| (u + z) / (1.0 + z.conj() * u);
    let target = (w - z) / (1.0 - z.conj() * w);
    let nodes = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
    let weights = [0.236_926_885_056_189, 0.478_628_670_499_366, 0.568_888_888_888_889, 0.478_628_670_499_366, 0.236_926_885_056_189];
    let panels = 200;
    let mut total = 0.0;
    for p in 0..panels {
        let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for (x, wt) in nodes.iter().zip(weights) {
            let t = 0.5 * (a + b) + 0.5 * (b - a) * x;
            // d/dt phi(t u) = u (1 - |z|^2) / (1 + conj(z) t u)^2
            let g = phi(target * t);
            let den = 1.0 + z.conj() * target * t;
            let dg = target * (1.0 - z.norm_sqr()) / (den * den);
            let tv = TangentVector::new(DiskPoint::interior(vec![g]).unwrap(), vec![dg]).unwrap();
            total += 0.5 * (b - a) * wt * geometry::bergman_metric(&tv);
        }
    }
    total
}

fn disk_sample(rng: &mut ChaCha8Rng, max: f64) -> C64 {
    C64::from_polar(max * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..2.0 * PI))
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let one = |z: C64| DiskPoint::interior(vec![z]).unwrap();
    let mut worst_inv = 0.0f64;
    for _ in 0..1000 {
        let (z, w) = (disk_sample(&mut rng, 0.99), disk_sample(&mut rng, 0.99));
        let m = DiskAutomorphism::new(rng.gen_range(0.0..2.0 * PI), disk_sample(&mut rng, 0.95)).unwrap();
        let before = geometry::bergman_distance(&one(z), &one(w)).unwrap();
        let after = geometry::bergman_distance(&one(m.apply(z)), &one(m.apply(w))).unwrap();
        worst_inv = worst_inv.max((before - after).abs() / before.max(1.0));
    }
    let mut worst_quad = 0.0f64;
    for _ in 0..100 {
        let (z, w) = (disk_sample(&mut rng, 0.9), disk_sample(&mut rng, 0.9));
        let exact = geometry::bergman_distance(&one(z), &one(w)).unwrap();
        worst_quad = worst_quad.max((exact - quadrature_distance(z, w)).abs());
    }
    let mut violations = 0;
    for _ in 0..1000 {
        let z = DiskPoint::interior(vec![disk_sample(&mut rng, 0.99), disk_sample(&mut rng, 0.99)]).unwrap();
        let w = DiskPoint::interior(vec![disk_sample(&mut rng, 0.99), disk_sample(&mut rng, 0.99)]).unwrap();
        let f = geometry::caratheodory_extremal(&z, &w, 2f64.sqrt()).unwrap();
        let image = geometry::disk_distance(f.apply(z.coords()), f.apply(w.coords()));
        if image > geometry::bergman_distance(&z, &w).unwrap() {
            violations += 1;
        }
    }
    verdict(
        worst_inv < 1e-10 && worst_quad < 1e-8 && violations == 0,
        format!("invariance {worst_inv:.1e} (1000 triples), quadrature {worst_quad:.1e} (100 pairs), contraction violations {violations}/1000"),
    )
}

fn criterion_3() -> Verdict {
    let s = 1f64.tanh();
    let mut extents = vec![];
    let mut bracketed = true;
    for e in 1..=5 {
        let t = 10f64.powi(-e);
        let c = C64::from_polar(1.0 - t, 0.7);
        let center = DiskPoint::interior(vec![c, c * C64::from_polar(1.0, 2.1)]).unwrap();
        let x = geometry::ball_euclidean_extent(&center, 1.0).unwrap();
        // the per-coordinate Euclidean disk has radius rho; the extent from
        // the centre lies between rho and 2 rho in each coordinate
        let rho_c = s * 2.0 * t / (1.0 - s * s * (1.0 - t).powi(2));
        let radius = 2f64.sqrt() * rho_c;
        bracketed &= x >= radius * (1.0 - 1e-3) && x <= 2.0 * radius;
        extents.push(x);
    }
    let decreasing = extents.windows(2).all(|w| w[1] < w[0]);
    let at_1e3 = extents[2];
    verdict(
        decreasing && at_1e3 < 0.02 && bracketed,
        format!("extents {}, at t = 1e-3: {at_1e3:.4} < 0.02, closed-form bracket {bracketed}", extents.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")),
    )
}

fn criterion_4() -> Verdict {
    let x0 = 2f64.sqrt() - 1.0;
    let irr = group::orbit_toward(BoundaryPoint::Real(x0), C64::new(0.0, 2.0), 30).unwrap();
    let (k_irr, e_irr) = irr.errors().into_iter().enumerate().fold((0, f64::INFINITY), |b, (k, e)| if e < b.1 { (k + 1, e) } else { b });
    let rat = group::orbit_toward(rational(1, 2), C64::new(0.0, 2.0), 40).unwrap();
    let errs = rat.errors();
    let converging = errs.windows(2).all(|w| w[1] < w[0]);
    let (k_rat, e_rat) = errs.iter().enumerate().fold((0, f64::INFINITY), |b, (k, &e)| if e < b.1 { (k + 1, e) } else { b });
    verdict(
        e_irr < 1e-8 && converging && e_rat < 1e-6,
        format!(
            "sqrt(2)-1: min error {e_irr:.1e} at k = {k_irr} (need < 1e-8); 1/2: monotone {converging}, min error {e_rat:.2e} at k = {k_rat} (need < 1e-6; parabolic approach decays like 1/(4k))"
        ),
    )
}

fn recheck(ev: &ModularEvaluator, p: &BiPoly, z: C64) -> f64 {
    p.eval(z, ev.eval_j(z).unwrap()).norm()
}

fn criterion_5_witnesses() -> Vec<Witness> {
    let p = BiPoly::parse("w - z").unwrap();
    solver::find_witnesses(&ev(), &p, &[rational(1, 3), rational(1, 2), rational(2, 3)], 3, None).unwrap().witnesses
}

fn criterion_5() -> Verdict {
    let ev = ev();
    let p = BiPoly::parse("w - z").unwrap();
    let ws = criterion_5_witnesses();
    let certified = ws.iter().filter(|w| w.certificate.zero_count == 1).count();
    let worst = ws.iter().map(|w| recheck(&ev, &p, w.z)).fold(0.0, f64::max);
    let mut near = true;
    let mut deepest = vec![];
    for t in [rational(1, 3), rational(1, 2), rational(2, 3)] {
        if let Some(w) = ws.iter().filter(|w| w.target == t).max_by_key(|w| w.orbit_index) {
            let d = (w.z - t.value().unwrap()).norm();
            near &= d < 0.1;
            deepest.push(format!("{t}: {d:.3}"));
        }
    }
    verdict(
        ws.len() >= 5 && certified == ws.len() && worst < 1e-8 && near && deepest.len() == 3,
        format!("{} witnesses, {certified} with zero count 1, worst residual {worst:.1e}, deepest distances [{}]", ws.len(), deepest.join(", ")),
    )
}

fn criterion_6() -> Verdict {
    let ev = ev();
    let target = TargetFunction::Transcendental(Transcendental::Exp);
    let loc = solver::rouche_localize(&ev, &WitnessProblem::new(target, rational(1, 2), 3)).unwrap();
    let certified = loc.witnesses.iter().filter(|w| w.certificate.zero_count == 1).count();
    let worst = loc.witnesses.iter().map(|w| (ev.eval_j(w.z).unwrap() - w.z.exp()).norm()).fold(0.0, f64::max);
    verdict(
        certified >= 3 && worst < 1e-8,
        format!("{certified} certified witnesses, worst |j(z) - exp(z)| = {worst:.1e}"),
    )
}

fn criterion_7_witnesses() -> (Vec<Witness>, Vec<Witness>) {
    let ev = ev();
    let targets = [rational(0, 1), rational(1, 3), rational(1, 2)];
    let a = solver::find_witnesses(&ev, &BiPoly::parse("w - 1728").unwrap(), &targets, 3, None).unwrap().witnesses;
    let b = solver::find_witnesses(&ev, &BiPoly::parse("w").unwrap(), &targets, 3, None).unwrap().witnesses;
    (a, b)
}

fn criterion_7() -> Verdict {
    let (a, b) = criterion_7_witnesses();
    let dist = |ws: &[Witness], p: C64| {
        ws.iter().map(|w| (group::reduce_to_fundamental_domain(w.z).unwrap().0 - p).norm()).fold(0.0, f64::max)
    };
    let (da, db) = (dist(&a, C64::new(0.0, 1.0)), dist(&b, rho()));
    verdict(
        !a.is_empty() && !b.is_empty() && da < 1e-8 && db < 1e-8,
        format!("w - 1728: {} witnesses, max distance to i {da:.1e}; w: {} witnesses, max distance to rho {db:.1e}", a.len(), b.len()),
    )
}

fn criterion_8() -> Verdict {
    let ev = ev();
    let g = RealMatrix::new(1.0, 2f64.sqrt(), 0.0, 1.0).unwrap();
    let guard = HodgeGuard::default();
    let c1 = C64::new(100.0, 50.0);
    let tau0 = ev.invert_j(c1).unwrap();
    let mut planted_worst = 0.0f64;
    for star in [[1, 0, 0, 1], [2, 1, 1, 1], [7, 3, 2, 1], [1, -5, 1, -4], [3, 7, 2, 5]] {
        let c2 = ev.eval_j(g.act(act(star, tau0)).finite().unwrap()).unwrap();
        let r = product::density_search(&ev, &g, c1, c2, 10, &guard).unwrap();
        planted_worst = planted_worst.max(r.err2);
    }
    let zero = C64::new(0.0, 0.0);
    let target = C64::new(1728.0, 0.0);
    let low = product::density_search(&ev, &g, zero, target, 5, &guard).unwrap();
    let high = product::density_search(&ev, &g, zero, target, 100, &guard).unwrap();
    verdict(
        planted_worst < 1e-9 && high.err2 < low.err2,
        format!("planted worst err2 {planted_worst:.1e}; (0, 1728): err2 {:.3e} at height 5, {:.3e} at height 100", low.err2, high.err2),
    )
}

/// Projection dimensions from connected components found by graph search.
fn naive_projection_dims(n: usize, edges: &[(usize, usize)], constants: &[usize]) -> Vec<usize> {
    let mut comp: Vec<usize> = (0..n).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b) in edges {
            let m = comp[a].min(comp[b]);
            if comp[a] != m || comp[b] != m {
                let (ca, cb) = (comp[a], comp[b]);
                for c in comp.iter_mut() {
                    if *c == ca || *c == cb {
                        *c = m;
                    }
                }
                changed = true;
            }
        }
    }
    let frozen: BTreeSet<usize> = constants.iter().map(|&i| comp[i]).collect();
    (1..(1usize << n))
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| comp[i]).filter(|c| !frozen.contains(c)).collect::<BTreeSet<_>>().len())
        .collect()
}

fn criterion_9() -> Verdict {
    let s2 = 2f64.sqrt();
    let pool = [
        RealMatrix::identity(),
        RealMatrix::new(1.0, s2, 0.0, 1.0).unwrap(),
        RealMatrix::new(2.0, 1.0, 1.0, 1.0).unwrap(),
        RealMatrix::new(0.0, -1.0, 1.0, 0.0).unwrap(),
        RealMatrix::new(s2, 0.0, 0.0, 1.0 / s2).unwrap(),
    ];
    let (mut cases, mut disagreements) = (0usize, 0usize);
    for n in 1..=3usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        for code in 0..6usize.pow(pairs.len() as u32) {
            let mut rels = vec![];
            let mut c = code;
            for &(i, j) in &pairs {
                if c % 6 > 0 {
                    rels.push(Relation { i, j, g: pool[c % 6 - 1] });
                }
                c /= 6;
            }
            let edges: Vec<(usize, usize)> = rels.iter().map(|r| (r.i, r.j)).collect();
            for cmask in 0..(1usize << n) {
                let consts: Vec<usize> = (0..n).filter(|i| cmask >> i & 1 == 1).collect();
                let values = consts.iter().map(|&i| (i, C64::new(0.25 * i as f64, 1.0 + i as f64))).collect();
                let Ok(l) = MoebiusVariety::new(n, rels.clone(), values) else { continue };
                let proj = naive_projection_dims(n, &edges, &consts);
                let mut profiles: Vec<(SplitProfile, Box<dyn Fn(&[usize]) -> usize>)> =
                    vec![(SplitProfile::point(n), Box::new(|_: &[usize]| 0)), (SplitProfile::full(n), Box::new(|s: &[usize]| s.len()))];
                for h in 0..n {
                    profiles.push((SplitProfile::hyperplane(n, h), Box::new(move |s: &[usize]| s.len() - usize::from(s.contains(&h)))));
                }
                for (p, dims) in &profiles {
                    let mut expect = (true, None);
                    for mask in 1..(1usize << n) {
                        let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                        if proj[mask - 1] + dims(&s) < s.len() {
                            expect = (false, Some(s));
                            break;
                        }
                    }
                    let got = product::is_broad(&l, p).unwrap();
                    cases += 1;
                    if (got.broad, got.failing) != expect {
                        disagreements += 1;
                    }
                }
            }
        }
    }
    verdict(disagreements == 0 && cases > 0, format!("{cases} (variety, profile) cases, {disagreements} disagreements"))
}

fn criterion_10() -> Verdict {
    let cfg = ClassPolynomialConfig::default();
    let b = BigInt::from;
    let h4 = special::class_polynomial(-4, &cfg).unwrap();
    let h3 = special::class_polynomial(-3, &cfg).unwrap();
    let h163 = special::class_polynomial(-163, &cfg).unwrap();
    let h23 = special::class_polynomial(-23, &cfg).unwrap();
    let gap = [&h4, &h3, &h163, &h23].iter().map(|h| h.max_gap).fold(0.0, f64::max);
    let ok = h4.coefficients == vec![b(-1728), b(1)]
        && h3.coefficients == vec![b(0), b(1)]
        && h163.coefficients == vec![b(640320).pow(3), b(1)]
        && h23.degree() == 3
        && gap < 1e-3;
    verdict(ok, format!("H_-163 constant {}, deg H_-23 = {}, max rounding gap {gap:.1e}", h163.coefficients[0], h23.degree()))
}

fn criterion_11() -> Verdict {
    let ws = criterion_5_witnesses();
    let rep = special::special_scan(&ws, 100, 1e-6).unwrap();
    let well_formed = rep.total == ws.len()
        && rep.entries.len() == rep.total
        && rep.flagged == rep.entries.iter().filter(|e| e.flag.form.is_some()).count()
        && rep.entries.iter().all(|e| group::in_fundamental_domain(e.reduced, group::DOMAIN_TOL));
    let (a, _) = criterion_7_witnesses();
    let rep1728 = special::special_scan(&a, 100, 1e-6).unwrap();
    let all_flagged = rep1728.total > 0 && rep1728.flagged == rep1728.total;
    verdict(
        well_formed && all_flagged,
        format!("w - z: {} of {} flagged (reported only); w - 1728: {} of {} flagged", rep.flagged, rep.total, rep1728.flagged, rep1728.total),
    )
}

fn binary_record(args: &[&str], dir: &std::path::Path, tag: &str) -> Result<Value, String> {
    let path = dir.join(format!("{tag}.json"));
    let out = Command::new(env!("CARGO_BIN_EXE_shilov"))
        .args(args)
        .args(["--seed", "7", "--output"])
        .arg(&path)
        .env_remove("SHILOV_CONFIG")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited with {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let mut v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    v.as_object_mut().ok_or("record is not an object")?.remove("timings");
    Ok(v)
}

fn criterion_12() -> Verdict {
    let dir = std::env::temp_dir().join(format!("shilov-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let runs: [(&str, Vec<&str>); 4] = [
        ("witness", vec!["witness", "--poly", "w - z", "--targets", "1/3,1/2,2/3", "--count", "3"]),
        ("exp", vec!["witness", "--function", "exp", "--targets", "1/2", "--count", "3"]),
        ("planted", vec!["product-density", "--g", "1,sqrt(2),0,1", "--c1", "100+50i", "--plant", "7,3,2,1", "--height", "10"]),
        ("density", vec!["product-density", "--g", "1,sqrt(2),0,1", "--c1", "0", "--c2", "1728", "--height", "100"]),
    ];
    let mut same = 0;
    let mut notes = vec![];
    for (tag, args) in &runs {
        match (binary_record(args, &dir, &format!("{tag}-a")), binary_record(args, &dir, &format!("{tag}-b"))) {
            (Ok(a), Ok(b)) if a == b => same += 1,
            (Ok(_), Ok(_)) => notes.push(format!("{tag}: records differ")),
            (Err(e), _) | (_, Err(e)) => notes.push(format!("{tag}: {e}")),
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    verdict(same == runs.len(), format!("{same}/{} commands reproduced their records modulo timings {}", runs.len(), notes.join("; ")))
}

fn main() {
    // accept and ignore libtest arguments such as --nocapture or filters
    let _ = std::env::args();
    let s = Duration::from_secs;
    let results = [
        run(1, "j-function suite", Some(s(5)), criterion_1),
        run(2, "metric suite", Some(s(10)), criterion_2),
        run(3, "ball shrinkage toward the Shilov boundary", Some(s(1)), criterion_3),
        run(4, "orbits accumulating at boundary targets", Some(s(1)), criterion_4),
        run(5, "witnesses of j(z) = z at three targets", Some(s(60)), criterion_5),
        run(6, "witnesses of j(z) = exp(z)", Some(s(60)), criterion_6),
        run(7, "identification of constant-target witnesses", None, criterion_7),
        run(8, "density search", Some(s(120)), criterion_8),
        run(9, "broadness vs exhaustive reimplementation", None, criterion_9),
        run(10, "class polynomials", Some(s(5)), criterion_10),
        run(11, "special-point scanner", None, criterion_11),
        run(12, "determinism of result files", None, criterion_12),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, p)| !**p).map(|(k, _)| k + 1).collect();
    println!("acceptance: {} of {} criteria passed", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
