use shilov::group::RealMatrix;
use shilov::modular::ModularEvaluator;
use shilov::product::*;
use shilov::C64;
use std::collections::BTreeSet;

fn rm(a: f64, b: f64, c: f64, d: f64) -> RealMatrix {
    RealMatrix::new(a, b, c, d).unwrap()
}

fn pool() -> [RealMatrix; 5] {
    let s2 = 2f64.sqrt();
    [
        RealMatrix::identity(),
        rm(1.0, s2, 0.0, 1.0),
        rm(2.0, 1.0, 1.0, 1.0),
        rm(0.0, -1.0, 1.0, 0.0),
        rm(s2, 0.0, 0.0, 1.0 / s2),
    ]
}

/// Projection dimensions by plain graph search over the relation edges.
fn naive_projection_dims(n: usize, edges: &[(usize, usize)], constants: &[usize]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        comp[s] = next;
        while let Some(v) = stack.pop() {
            for &(a, b) in edges {
                for (x, y) in [(a, b), (b, a)] {
                    if x == v && comp[y] == usize::MAX {
                        comp[y] = next;
                        stack.push(y);
                    }
                }
            }
        }
        next += 1;
    }
    let frozen: BTreeSet<usize> = constants.iter().map(|&i| comp[i]).collect();
    (1..(1usize << n))
        .map(|mask| {
            (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| comp[i])
                .filter(|c| !frozen.contains(c))
                .collect::<BTreeSet<_>>()
                .len()
        })
        .collect()
}

fn naive_broad(n: usize, proj: &[usize], profile: &dyn Fn(&[usize]) -> usize) -> (bool, Option<Vec<usize>>) {
    for mask in 1..(1usize << n) {
        let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if proj[mask - 1] + profile(&s) < s.len() {
            return (false, Some(s));
        }
    }
    (true, None)
}

#[test]
fn broadness_matches_exhaustive_oracle() {
    let pool = pool();
    let mut checked = 0;
    for n in 1..=3usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let choices = 6usize.pow(pairs.len() as u32);
        for code in 0..choices {
            let mut rels = vec![];
            let mut c = code;
            for &(i, j) in &pairs {
                let k = c % 6;
                c /= 6;
                if k > 0 {
                    rels.push(Relation { i, j, g: pool[k - 1] });
                }
            }
            let edges: Vec<(usize, usize)> = rels.iter().map(|r| (r.i, r.j)).collect();
            for cmask in 0..(1usize << n) {
                let consts: Vec<usize> = (0..n).filter(|i| cmask >> i & 1 == 1).collect();
                let cvals = consts.iter().map(|&i| (i, C64::new(0.1 * i as f64, 1.0 + i as f64))).collect();
                let Ok(l) = MoebiusVariety::new(n, rels.clone(), cvals) else { continue };
                let proj = naive_projection_dims(n, &edges, &consts);
                for mask in 1..(1usize << n) {
                    let s: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                    assert_eq!(l.projection_dimension(&s), proj[mask - 1]);
                }
                let mut profiles: Vec<(SplitProfile, Box<dyn Fn(&[usize]) -> usize>)> = vec![
                    (SplitProfile::point(n), Box::new(|_: &[usize]| 0)),
                    (SplitProfile::full(n), Box::new(|s: &[usize]| s.len())),
                ];
                for h in 0..n {
                    profiles.push((
                        SplitProfile::hyperplane(n, h),
                        Box::new(move |s: &[usize]| s.len() - usize::from(s.contains(&h))),
                    ));
                }
                for (p, f) in &profiles {
                    let got = is_broad(&l, p).unwrap();
                    let (broad, failing) = naive_broad(n, &proj, f.as_ref());
                    assert_eq!((got.broad, got.failing), (broad, failing));
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000, "only {checked} cases");
}

#[test]
fn inconsistent_cycles_are_rejected() {
    let p = pool();
    // x1 = g x0, x2 = g x1, x2 = x0 with g parabolic: holonomy g^2 != ±I
    let rels = vec![
        Relation { i: 1, j: 0, g: p[1] },
        Relation { i: 2, j: 1, g: p[1] },
        Relation { i: 2, j: 0, g: p[0] },
    ];
    assert!(MoebiusVariety::new(3, rels, vec![]).is_err());
    // S^2 = -I closes consistently
    let rels = vec![
        Relation { i: 1, j: 0, g: p[3] },
        Relation { i: 2, j: 1, g: p[3] },
        Relation { i: 2, j: 0, g: p[0] },
    ];
    let l = MoebiusVariety::new(3, rels, vec![]).unwrap();
    assert_eq!(l.dimension(), 1);
}

#[test]
fn hodge_genericity_examples() {
    let guard = HodgeGuard::default();
    let integer = MoebiusVariety::graph(rm(1.0, 1.0, 0.0, 1.0));
    assert!(!is_hodge_generic(&integer, guard.denom_bound, guard.tol).generic);
    let irrational = MoebiusVariety::graph(rm(1.0, 2f64.sqrt(), 0.0, 1.0));
    assert!(is_hodge_generic(&irrational, guard.denom_bound, guard.tol).generic);
    let constant = MoebiusVariety::new(2, vec![], vec![(0, C64::new(0.0, 1.0))]).unwrap();
    let rep = is_hodge_generic(&constant, guard.denom_bound, guard.tol);
    assert!(!rep.generic);
    assert_eq!(rep.constant_coordinates, vec![0]);
    // a rational composite along a path is caught even if each link is irrational
    let g = rm(1.0, 2f64.sqrt(), 0.0, 1.0);
    let path = MoebiusVariety::new(3, vec![Relation { i: 1, j: 0, g }, Relation { i: 2, j: 1, g: g.inverse() }], vec![]).unwrap();
    assert!(!is_hodge_generic(&path, guard.denom_bound, guard.tol).generic);
}

#[test]
fn broadness_examples() {
    let graph = MoebiusVariety::graph(rm(1.0, 2f64.sqrt(), 0.0, 1.0));
    assert!(is_broad(&graph, &SplitProfile::full(2)).unwrap().broad);
    let r = is_broad(&graph, &SplitProfile::point(2)).unwrap();
    assert!(!r.broad);
    assert_eq!(r.failing, Some(vec![0, 1]));
    let diag = MoebiusVariety::graph(RealMatrix::identity());
    assert!(is_broad(&diag, &SplitProfile::hyperplane(2, 0)).unwrap().broad);
    assert!(SplitProfile::new(2, vec![1, 1, 0]).is_err());
    assert!(SplitProfile::new(2, vec![2, 0, 2]).is_err());
}

#[test]
fn planted_target_is_recovered() {
    let ev = ModularEvaluator::new(60).unwrap();
    let g = rm(1.0, 2f64.sqrt(), 0.0, 1.0);
    let c1 = C64::new(100.0, 50.0);
    let tau0 = ev.invert_j(c1).unwrap();
    let star = RealMatrix::from_integer([7, 3, 2, 1]);
    let c2 = ev.eval_j(g.act(star.act(tau0).finite().unwrap()).finite().unwrap()).unwrap();
    let res = density_search(&ev, &g, c1, c2, 10, &HodgeGuard::default()).unwrap();
    assert!(res.err1 < 1e-9 * c1.norm());
    assert!(res.err2 < 1e-9 * c2.norm().max(1.0), "err2 = {}", res.err2);
}

#[test]
fn density_search_is_monotone_and_stays_on_the_fiber() {
    let ev = ModularEvaluator::new(60).unwrap();
    let g = rm(1.0, 2f64.sqrt(), 0.0, 1.0);
    let (c1, c2) = (C64::new(0.0, 0.0), C64::new(1728.0, 0.0));
    let mut last = f64::INFINITY;
    let mut err1 = None;
    for h in 1..=8 {
        let res = density_search(&ev, &g, c1, c2, h, &HodgeGuard::default()).unwrap();
        assert!(res.err2 <= last);
        last = res.err2;
        assert!(res.err1 < 1e-9);
        // independent of the height
        assert_eq!(*err1.get_or_insert(res.err1), res.err1);
        assert!((ev.eval_j(res.tau).unwrap() - c1).norm() < 1e-9);
    }
}

#[test]
fn rational_relations_are_refused() {
    let ev = ModularEvaluator::new(60).unwrap();
    let g = rm(1.0, 1.0, 0.0, 1.0);
    let e = density_search(&ev, &g, C64::new(0.0, 0.0), C64::new(1728.0, 0.0), 5, &HodgeGuard::default());
    assert!(e.is_err());
}
