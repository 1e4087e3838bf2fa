use shilov::group::{reduce_to_fundamental_domain, BoundaryPoint, UnimodularMatrix};
use shilov::modular::{rho, ModularEvaluator};
use shilov::poly::BiPoly;
use shilov::solver::*;
use shilov::C64;
use std::sync::OnceLock;

fn ev() -> &'static ModularEvaluator {
    static EV: OnceLock<ModularEvaluator> = OnceLock::new();
    EV.get_or_init(|| ModularEvaluator::new(60).unwrap())
}

fn r(p: i64, q: i64) -> BoundaryPoint {
    BoundaryPoint::rational(p, q).unwrap()
}

fn poly(s: &str) -> BiPoly {
    BiPoly::parse(s).unwrap()
}

/// Residual recomputed from scratch, independent of what the solver stored.
fn recheck(p: &BiPoly, z: C64) -> f64 {
    p.eval(z, ev().eval_j(z).unwrap()).norm()
}

fn overlap(a: &Certificate, b: &Certificate) -> bool {
    (a.center - b.center).norm() < a.radius + b.radius
}

fn assert_common_invariants(ws: &[Witness]) {
    for (k, a) in ws.iter().enumerate() {
        assert!(a.z.im > 0.0);
        assert!((a.z - a.certificate.center).norm() < a.certificate.radius);
        assert_eq!(a.certificate.zero_count, a.multiplicity as i64);
        for b in &ws[k + 1..] {
            assert!(!overlap(&a.certificate, &b.certificate), "{:?} overlaps {:?}", a.certificate, b.certificate);
        }
    }
}

#[test]
fn curve_j_equals_z_over_three_targets() {
    let p = poly("w - z");
    let batch = find_witnesses(ev(), &p, &[r(1, 3), r(1, 2), r(2, 3)], 3, None).unwrap();
    assert!(batch.witnesses.len() >= 5);
    assert_common_invariants(&batch.witnesses);
    for w in &batch.witnesses {
        assert_eq!(w.certificate.zero_count, 1);
        assert!(w.residual < 1e-8);
        assert!(recheck(&p, w.z) < 1e-8 * (1.0 + w.jz.norm()).max(1.0));
        let x0 = w.target.value().unwrap();
        assert!((w.z - C64::new(x0, 0.0)).norm() < 0.1);
    }
    // sorted by target, then orbit index
    for pair in batch.witnesses.windows(2) {
        let (a, b) = (pair[0].target.value().unwrap(), pair[1].target.value().unwrap());
        assert!(a < b || (a == b && pair[0].orbit_index < pair[1].orbit_index));
    }
}

#[test]
fn rouche_consistency_on_small_circles() {
    let target = TargetFunction::algebraic(poly("w - z")).unwrap();
    let loc = rouche_localize(ev(), &WitnessProblem::new(target.clone(), r(1, 2), 3)).unwrap();
    let zc = ZeroCountConfig::default();
    for w in &loc.witnesses {
        let f = |z: C64| {
            let (j, dj) = ev().eval_j_with_derivative(z)?;
            Ok((j - z, dj - 1.0))
        };
        // deep witnesses hug the real axis, where zeros of j(z) - z are packed
        // closer than 1e-4; the certificate radius is the meaningful scale there
        let n = zero_count(f, w.z, w.certificate.radius.min(1e-4), &zc).unwrap();
        assert_eq!(n.count, 1);
    }
}

#[test]
fn accumulation_toward_the_target() {
    let target = TargetFunction::algebraic(poly("w - z")).unwrap();
    let mut problem = WitnessProblem::new(target, r(1, 2), 5);
    problem.orbit_depth = 60;
    let loc = rouche_localize(ev(), &problem).unwrap();
    assert!(loc.witnesses.len() >= 3);
    let dist: Vec<f64> = loc.witnesses.iter().map(|w| (w.z - C64::new(0.5, 0.0)).norm()).collect();
    for pair in dist.windows(2) {
        assert!(pair[1] < pair[0], "{dist:?}");
    }
    for pair in loc.witnesses.windows(2) {
        assert!(pair[1].orbit_index > pair[0].orbit_index);
    }
}

#[test]
fn constant_1728_witnesses_reduce_to_i() {
    let batch = find_witnesses(ev(), &poly("w - 1728"), &[r(0, 1), r(1, 2)], 3, None).unwrap();
    assert!(batch.witnesses.len() >= 3);
    assert_common_invariants(&batch.witnesses);
    for w in &batch.witnesses {
        assert_eq!(w.multiplicity, 2);
        let (red, _) = reduce_to_fundamental_domain(w.z).unwrap();
        assert!((red - C64::new(0.0, 1.0)).norm() < 1e-8, "{} reduces to {}", w.z, red);
    }
}

#[test]
fn constant_zero_witnesses_reduce_to_rho() {
    let target = TargetFunction::Transcendental(Transcendental::Constant(C64::new(0.0, 0.0)));
    let loc = rouche_localize(ev(), &WitnessProblem::new(target, r(1, 3), 3)).unwrap();
    assert_eq!(loc.multiplicity, 3);
    assert!(!loc.witnesses.is_empty());
    for w in &loc.witnesses {
        let (red, _) = reduce_to_fundamental_domain(w.z).unwrap();
        // rho and rho + 1 are both on the boundary of the domain
        let d = (red - rho()).norm().min((red - rho() - 1.0).norm());
        assert!(d < 1e-8, "{} reduces to {}", w.z, red);
    }
}

#[test]
fn automorphic_redundancy_for_constant_targets() {
    let batch = find_witnesses(ev(), &poly("w - 1728"), &[r(1, 2)], 2, None).unwrap();
    let gammas = [
        [1, 1, 0, 1],
        [0, -1, 1, 0],
        [2, 1, 1, 1],
        [1, 0, 3, 1],
        [5, 2, 2, 1],
        [3, -1, 7, -2],
        [1, -4, 1, -3],
        [4, 3, 5, 4],
        [-1, 2, 3, -7],
        [7, 5, 4, 3],
    ];
    for w in &batch.witnesses {
        for [a, b, c, d] in gammas {
            let g = UnimodularMatrix::from_i64(a, b, c, d).unwrap();
            let moved = g.act(w.z).finite().unwrap();
            let jm = ev().eval_j(moved).unwrap();
            assert!((jm - 1728.0).norm() < 1e-6, "gamma {:?}: j = {}", [a, b, c, d], jm);
        }
    }
}

#[test]
fn reciprocal_branch_near_two() {
    let p = poly("z*w - 1");
    let batch = find_witnesses(ev(), &p, &[r(2, 1)], 3, None).unwrap();
    assert!(batch.witnesses.len() >= 3);
    for w in &batch.witnesses {
        assert!((w.z * ev().eval_j(w.z).unwrap() - 1.0).norm() < 1e-8);
    }
}

#[test]
fn j_equals_exp() {
    let target = TargetFunction::Transcendental(Transcendental::Exp);
    let loc = rouche_localize(ev(), &WitnessProblem::new(target, r(1, 2), 3)).unwrap();
    assert!(loc.witnesses.len() >= 3);
    assert_common_invariants(&loc.witnesses);
    for w in &loc.witnesses {
        let j = ev().eval_j(w.z).unwrap();
        assert!((j - w.z.exp()).norm() < 1e-8);
    }
}

#[test]
fn newton_on_j_near_2i() {
    let g = |z: C64| {
        let (j, dj) = ev().eval_j_with_derivative(z)?;
        Ok((j - 287496.0, dj))
    };
    // |j| ~ 3e5 here, so an absolute 1e-12 residual is below double precision
    let cfg = NewtonConfig { tolerance: 1e-8, ..NewtonConfig::default() };
    let res = newton_refine(g, C64::new(0.01, 2.0), None, &cfg).unwrap();
    assert!((res.z - C64::new(0.0, 2.0)).norm() < 1e-10);
}

#[test]
fn zero_count_examples() {
    let zc = ZeroCountConfig::default();
    assert_eq!(zero_count(|z: C64| Ok((z, C64::new(1.0, 0.0))), C64::new(0.0, 0.0), 1.0, &zc).unwrap().count, 1);
    assert_eq!(zero_count(|z: C64| Ok((z * z - 1.0, 2.0 * z)), C64::new(0.0, 0.0), 2.0, &zc).unwrap().count, 2);
    let i = C64::new(0.0, 1.0);
    let n = zero_count_fd(|z: C64| Ok(ev().eval_j(z)? - 1728.0), i, 0.05, &zc).unwrap();
    assert_eq!(n.count, 2);
}

#[test]
fn degenerate_inputs_are_rejected() {
    assert!(TargetFunction::algebraic(poly("z^2 - 1")).is_err());
    assert!(find_witnesses(ev(), &poly("w - z"), &[r(1, 2), r(2, 4)], 1, None).is_err());
    let target = TargetFunction::algebraic(poly("w - z")).unwrap();
    let mut p = WitnessProblem::new(target.clone(), r(1, 2), 0);
    assert!(rouche_localize(ev(), &p).is_err());
    p.count = 1;
    p.boundary_point = BoundaryPoint::Infinity;
    assert!(rouche_localize(ev(), &p).is_err());
    // (w - z)^2 has no simple root in w
    let sq = TargetFunction::algebraic(poly("(w - z)^2")).unwrap();
    assert!(rouche_localize(ev(), &WitnessProblem::new(sq, r(1, 2), 1)).is_err());
}
