//! One handler per subcommand. Each fills a [`Record`] or fails with the kind
//! that decides the exit code.

use crate::cli::*;
use crate::config::RunConfig;
use crate::parse;
use crate::record::{self, Record};
use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};
use shilov::geometry::{self, ClosurePoint, DiskPoint, ExtendedPoint, MultiPoly, TangentVector};
use shilov::group::{self, BoundaryPoint};
use shilov::modular::{InvertConfig, ModularEvaluator};
use shilov::poly::BiPoly;
use shilov::product::{self, HodgeGuard, MoebiusVariety, Relation, SplitProfile};
use shilov::solver::{self, Localization, TargetFunction, Transcendental, Witness, WitnessProblem};
use shilov::special::{self, ClassPolynomialConfig};
use shilov::ErrorKind;

#[derive(Debug)]
pub enum Failure {
    Precondition(String),
    Numerical(String),
}

impl From<shilov::Error> for Failure {
    fn from(e: shilov::Error) -> Self {
        match e.kind() {
            ErrorKind::Precondition => Failure::Precondition(e.to_string()),
            ErrorKind::Numerical => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<String> for Failure {
    fn from(m: String) -> Self {
        Failure::Precondition(m)
    }
}

type Outcome = Result<(), Failure>;

fn evaluator(cfg: &RunConfig) -> Result<ModularEvaluator, Failure> {
    Ok(ModularEvaluator::new(cfg.truncation)?)
}

fn boundary_value(b: &BoundaryPoint) -> Value {
    match b {
        BoundaryPoint::Rational(p, q) => json!({ "rational": [p, q], "value": record::real(*p as f64 / *q as f64) }),
        BoundaryPoint::Real(x) => json!({ "real": record::real(*x) }),
        BoundaryPoint::Infinity => json!("inf"),
    }
}

fn witness_value(w: &Witness) -> Value {
    json!({
        "target": boundary_value(&w.target),
        "z": record::complex(w.z),
        "jz": record::complex(w.jz),
        "residual": record::real(w.residual),
        "orbit_index": w.orbit_index,
        "multiplicity": w.multiplicity,
    })
}

fn certificate_value(w: &Witness) -> Value {
    json!({
        "kind": "argument-principle zero count",
        "center": record::complex(w.certificate.center),
        "radius": record::real(w.certificate.radius),
        "zero_count": w.certificate.zero_count,
        "orbit_index": w.orbit_index,
    })
}

fn localization_summary(loc: &Localization) -> Value {
    json!({
        "w0": record::complex(loc.w0),
        "seed": record::complex(loc.seed),
        "multiplicity": loc.multiplicity,
        "ball_radius": record::real(loc.ball_radius),
        "delta": record::real(loc.delta),
        "witnesses": loc.witnesses.len(),
        "skipped": loc.diagnostics,
    })
}

pub fn metric(a: &MetricArgs, _cfg: &RunConfig, rec: &mut Record) -> Outcome {
    let z = parse::list(&a.z, parse::complex)?;
    let w = parse::list(&a.w, parse::complex)?;
    rec.input("z", record::complexes(&z));
    rec.input("w", record::complexes(&w));
    let zp = DiskPoint::interior(z.clone())?;
    let wp = DiskPoint::interior(w.clone())?;
    let n = zp.dim();
    rec.output("kernel", record::complex(geometry::bergman_kernel(&zp, &wp)?));
    let dist = geometry::bergman_distance(&zp, &wp)?;
    rec.output("distance", record::real(dist));
    let per: Vec<f64> = z.iter().zip(&w).map(|(a, b)| geometry::disk_distance(*a, *b)).collect();
    rec.output("coordinate_distances", record::reals(&per));
    if let Some(v) = &a.v {
        let v = parse::list(v, parse::complex)?;
        rec.input("v", record::complexes(&v));
        let tv = TangentVector::new(zp.clone(), v)?;
        rec.output("metric_length", record::real(geometry::bergman_metric(&tv)));
    }
    if z != w {
        // R = sqrt(n) makes the functional map D^n into D
        let radius = (n as f64).sqrt();
        let f = geometry::caratheodory_extremal(&zp, &wp, radius)?;
        let (fz, fw) = (f.apply(&z), f.apply(&w));
        let image = geometry::disk_distance(fz, fw);
        rec.output(
            "extremal",
            json!({
                "radius": record::real(radius),
                "f_z": record::complex(fz),
                "f_w": record::complex(fw),
                "image_distance": record::real(image),
                "contracts": image <= dist + 1e-12,
            }),
        );
        rec.tol("contraction", 1e-12);
    }
    Ok(())
}

pub fn shilov_check(a: &ShilovArgs, cfg: &RunConfig, rec: &mut Record) -> Outcome {
    let ts = parse::list(&a.t, parse::real)?;
    rec.input("n", a.n);
    rec.input("r", record::real(a.r));
    rec.input("angle", record::real(a.angle));
    rec.input("t", record::reals(&ts));
    if a.n == 0 {
        return Err(Failure::Precondition("n must be positive".into()));
    }
    let mut extents = vec![];
    let mut closed = vec![];
    for &t in &ts {
        if !(t > 0.0 && t < 1.0) {
            return Err(Failure::Precondition(format!("t = {t} must lie in (0, 1)")));
        }
        // equal moduli 1 - t, coordinates spread in angle
        let coords = (0..a.n).map(|k| C64::from_polar(1.0 - t, a.angle * (k + 1) as f64)).collect();
        let center = DiskPoint::interior(coords)?;
        extents.push(geometry::ball_euclidean_extent(&center, a.r)?);
        let s = a.r.tanh();
        closed.push((a.n as f64).sqrt() * s * 2.0 * t / (1.0 - s * s * (1.0 - t).powi(2)));
    }
    let decreasing = extents.windows(2).all(|w| w[1] < w[0]);
    rec.output("extents", record::reals(&extents));
    rec.output("closed_form_estimate", record::reals(&closed));
    rec.output("strictly_decreasing", decreasing);
    let tol = cfg.tol("shilov");
    rec.tol("shilov", tol);
    if let Some(p) = &a.point {
        let v = parse::list(p, parse::complex)?;
        rec.input("point", record::complexes(&v));
        let member = geometry::shilov_membership(&ClosurePoint::Disk(v.clone()), tol);
        rec.output("point_in_shilov_boundary", member);
    }
    // sampled maximum modulus of a fixed polynomial on the closed polydisk vs the torus
    let terms = (0..a.n)
        .map(|k| {
            let mut e = vec![0u32; a.n];
            e[k] = (k + 1) as u32;
            (e, C64::new(1.0, k as f64 * 0.5))
        })
        .chain(std::iter::once((vec![1u32; a.n], C64::new(-0.75, 0.25))))
        .chain(std::iter::once((vec![0u32; a.n], C64::new(0.3, 0.0))))
        .collect();
    let f = MultiPoly::new(a.n, terms)?;
    let (inside, torus) = geometry::max_modulus_spotcheck(&f, a.samples, cfg.seed);
    rec.output(
        "max_modulus",
        json!({ "closure_max": record::real(inside), "torus_max": record::real(torus), "samples": a.samples, "seed": cfg.seed }),
    );
    if !decreasing {
        rec.diagnostics.push("extent is not strictly decreasing in t".into());
    }
    Ok(())
}

pub fn orbit(a: &OrbitArgs, _cfg: &RunConfig, rec: &mut Record) -> Outcome {
    let target = parse::boundary(&a.target)?;
    let base = parse::upper(&a.base)?;
    rec.input("target", boundary_value(&target));
    rec.input("base", record::complex(base));
    rec.input("k", a.k);
    let seq = group::orbit_toward(target, base, a.k)?;
    let pts = seq.points();
    let errs = seq.errors();
    rec.output("points", record::complexes(&pts));
    rec.output("errors", record::reals(&errs));
    rec.output("matrices", Value::Array(seq.matrices.iter().map(|m| record::integer_matrix(m.entries())).collect()));
    rec.output("truncated", seq.truncated);
    if let Some((k, e)) = errs.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) {
        rec.output("best", json!({ "k": k + 1, "error": record::real(*e) }));
    }
    if seq.truncated {
        rec.diagnostics.push("continued fraction exhausted at double precision; sequence truncated".into());
    }
    Ok(())
}

pub fn jeval(a: &JevalArgs, cfg: &RunConfig, rec: &mut Record) -> Outcome {
    let z = parse::upper(&a.z)?;
    rec.input("z", record::complex(z));
    let ev = evaluator(cfg)?;
    let (j, dj) = ev.eval_j_with_derivative(z)?;
    let (w, g) = group::reduce_to_fundamental_domain(z)?;
    rec.output("j", record::complex(j));
    rec.output("dj", record::complex(dj));
    rec.output("reduced", record::complex(w));
    rec.output("reducing_matrix", record::integer_matrix(g.entries()));
    let q = (-2.0 * std::f64::consts::PI * w.im).exp();
    rec.tol("series_tail", ev.tail_bound(q));
    rec.tol("relative_target", 1e-10);
    Ok(())
}

pub fn jinv(a: &JinvArgs, cfg: &RunConfig, rec: &mut Record) -> Outcome {
    let c = parse::complex(&a.c)?;
    rec.input("c", record::complex(c));
    let ev = evaluator(cfg)?;
    let icfg = InvertConfig { tolerance: cfg.tol("invert"), ..InvertConfig::default() };
    let z = ev.invert_j_with(c, &icfg)?;
    let jz = ev.eval_j(z)?;
    rec.output("z", record::complex(z));
    rec.output("j", record::complex(jz));
    rec.output("residual", record::real((jz - c).norm()));
    rec.tol("invert", icfg.tolerance);
    Ok(())
}

fn target_function(poly: &Option<String>, function: &Option<String>, branch: Option<usize>, rec: &mut Record) -> Result<TargetFunction, Failure> {
    match (poly, function) {
        (Some(p), None) => {
            let bp = BiPoly::parse(p)?;
            rec.input("poly", bp.to_string());
            match TargetFunction::algebraic(bp)? {
                TargetFunction::Algebraic { poly, .. } => {
                    if let Some(b) = branch {
                        rec.input("branch", b);
                    }
                    Ok(TargetFunction::Algebraic { poly, branch })
                }
                t => Ok(t),
            }
        }
        (None, Some(f)) => {
            let t = match f.trim() {
                "exp" => Transcendental::Exp,
                s if s.starts_with("const:") => Transcendental::Constant(parse::complex(&s[6..])?),
                s if s.starts_with("poly:") => Transcendental::Polynomial(parse::list(&s[5..], parse::complex)?),
                s => return Err(Failure::Precondition(format!("unknown function {s:?}; use exp, const:<c> or poly:<c0,c1,...>"))),
            };
            rec.input("function", t.name());
            Ok(TargetFunction::Transcendental(t))
        }
        _ => Err(Failure::Precondition("give exactly one of --poly and --function".into())),
    }
}

fn solve(a: &WitnessArgs, cfg: &RunConfig, rec: &mut Record) -> Result<Vec<Witness>, Failure> {
    let target = target_function(&a.poly, &a.function, a.branch, rec)?;
    let targets = parse::list(&a.targets, parse::boundary)?;
    if targets.is_empty() {
        return Err(Failure::Precondition("no targets".into()));
    }
    rec.input("targets", Value::Array(targets.iter().map(boundary_value).collect()));
    rec.input("count", a.count);
    let ev = evaluator(cfg)?;
    let mut template = WitnessProblem::new(target.clone(), targets[0], a.count);
    template.orbit_depth = cfg.orbit_depth;
    template.residual_threshold = cfg.tol("residual");
    if let Some(r) = a.ball_radius {
        template.ball_radius = r;
    }
    if let Some(r) = a.neighborhood {
        template.neighborhood_radius = r;
    }
    rec.config.insert("ball_radius".into(), record::real(template.ball_radius));
    rec.config.insert("neighborhood_radius".into(), record::real(template.neighborhood_radius));
    rec.config.insert("contour_samples".into(), template.contour_samples.into());
    rec.tol("residual", template.residual_threshold);
    rec.tol("zero_count_rounding", 0.25);
    let batch = solver::localize_many(&ev, &target, &targets, a.count, Some(&template))?;
    let mut per_target = vec![];
    for o in &batch.outcomes {
        match &o.result {
            Ok(loc) => {
                per_target.push(json!({ "target": boundary_value(&o.target), "status": "ok", "localization": localization_summary(loc) }));
                if !loc.complete(a.count) {
                    rec.diagnostics.push(format!("target {}: {} of {} witnesses", o.target, loc.witnesses.len(), a.count));
                }
            }
            Err(e) => {
                per_target.push(json!({ "target": boundary_value(&o.target), "status": "failed", "error": e }));
                rec.diagnostics.push(format!("target {}: {e}", o.target));
            }
        }
    }
    rec.output("targets", Value::Array(per_target));
    Ok(batch.witnesses)
}

pub fn witness(a: &WitnessArgs, cfg: &RunConfig, rec: &mut Record) -> Outcome {
    let ws = solve(a, cfg, rec)?;
    rec.output("witnesses", Value::Array(ws.iter().map(witness_value).collect()));
    rec.output("total", ws.len());
    rec.certificates = ws.iter().map(certificate_value).collect();
    if ws.is_empty() {
        return Err(Failure::Numerical("no witness was certified".into()));
    }
    Ok(())
}

pub fn product_density(a: &DensityArgs, cfg: &RunConfig, rec: &mut Record) -> Outcome {
    let g = parse::matrix(&a.g)?;
    let c1 = parse::complex(&a.c1)?;
    let height = a.height.unwrap_or(cfg.height);
    rec.input("g", record::reals(&g.entries()));
    rec.input("c1", record::complex(c1));
    rec.input("height", height);
    let ev = evaluator(cfg)?;
    let c2 = match (&a.c2, &a.plant) {
        (Some(c), None) => parse::complex(c)?,
        (None, Some(p)) => {
            let m = parse::list(p, |s| s.parse::<i64>().map_err(|e| format!("{s:?}: {e}")))?;
            let [pa, pb, pc, pd] = m.as_slice() else {
                return Err(Failure::Precondition("--plant needs four integers".into()));
            };
            let star = group::UnimodularMatrix::from_i64(*pa, *pb, *pc, *pd)?;
            rec.input("plant", record::integer_matrix(star.entries()));
            let tau0 = ev.invert_j(c1)?;
            let fin = |p: ExtendedPoint| p.finite().ok_or_else(|| Failure::Numerical("planted point is at infinity".into()));
            ev.eval_j(fin(g.act(fin(star.act(tau0))?))?)?
        }
        _ => return Err(Failure::Precondition("give exactly one of --c2 and --plant".into())),
    };
    rec.input("c2", record::complex(c2));
    let guard = HodgeGuard { denom_bound: cfg.hodge_denom_bound, tol: cfg.tol("hodge") };
    rec.tol("hodge", guard.tol);
    rec.config.insert("hodge_denom_bound".into(), guard.denom_bound.into());
    let report = product::is_hodge_generic(&MoebiusVariety::graph(g), guard.denom_bound, guard.tol);
    rec.certificates.push(hodge_value(&report));
    let res = product::density_search(&ev, &g, c1, c2, height, &guard)?;
    rec.output("tau", record::complex(res.tau));
    rec.output("tau0", record::complex(res.tau0));
    rec.output("gamma", record::integer_matrix(res.gamma.entries()));
    rec.output("err1", record::real(res.err1));
    rec.output("err2", record::real(res.err2));
    rec.output("candidates", res.candidates);
    rec.tol("invert", 1e-9);
    Ok(())
}

fn hodge_value(r: &product::HodgeReport) -> Value {
    json!({
        "kind": "numeric Hodge-genericity (rational reconstruction up to the denominator bound)",
        "generic": r.generic,
        "constant_coordinates": r.constant_coordinates.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "reasons": r.reasons,
        "checks": r.checks.iter().map(|c| json!({
            "i": c.i + 1,
            "j": c.j + 1,
            "normalized": record::reals(&c.normalized),
            "approximations": c.approximations.iter().map(|(p, q)| json!([p, q])).collect::<Vec<_>>(),
            "max_deviation": record::real(c.max_deviation),
            "rational": c.rational,
        })).collect::<Vec<_>>(),
        "denom_bound": r.denom_bound,
        "tol": record::real(r.tol),
    })
}

pub fn broad_check(a: &BroadArgs, cfg: &RunConfig, rec: &mut Record) -> Outcome {
    let n = a.n;
    rec.input("n", n);
    let mut relations = vec![];
    for r in &a.relation {
        let (idx, m) = r.split_once(':').ok_or_else(|| format!("relation {r:?}: expected i,j:a,b,c,d"))?;
        let (i, j) = idx.split_once(',').ok_or_else(|| format!("relation {r:?}: expected i,j before ':'"))?;
        let one_based = |s: &str| -> Result<usize, String> {
            match s.trim().parse::<usize>() {
                Ok(k) if k >= 1 && k <= n => Ok(k - 1),
                _ => Err(format!("coordinate index {s:?} must be in 1..={n}")),
            }
        };
        relations.push(Relation { i: one_based(i)?, j: one_based(j)?, g: parse::matrix(m)? });
    }
    let mut constants = vec![];
    for c in &a.constant {
        let (i, v) = c.split_once(':').ok_or_else(|| format!("constant {c:?}: expected i:z"))?;
        let i: usize = i.trim().parse().map_err(|_| format!("constant {c:?}: bad index"))?;
        if i == 0 || i > n {
            return Err(Failure::Precondition(format!("constant index {i} must be in 1..={n}")));
        }
        constants.push((i - 1, parse::upper(v)?));
    }
    rec.input(
        "relations",
        Value::Array(relations.iter().map(|r| json!({ "i": r.i + 1, "j": r.j + 1, "g": record::reals(&r.g.entries()) })).collect()),
    );
    rec.input("constants", Value::Array(constants.iter().map(|(i, z)| json!({ "i": i + 1, "value": record::complex(*z) })).collect()));
    rec.input("profile", a.profile.clone());
    let profile = match a.profile.trim() {
        "point" => SplitProfile::point(n),
        "full" => SplitProfile::full(n),
        s if s.starts_with("hyperplane:") => {
            let i: usize = s[11..].parse().map_err(|_| format!("profile {s:?}: bad index"))?;
            if i == 0 || i > n {
                return Err(Failure::Precondition(format!("hyperplane index {i} must be in 1..={n}")));
            }
            SplitProfile::hyperplane(n, i - 1)
        }
        s if s.starts_with("dims:") => {
            let d = parse::list(&s[5..], |x| x.parse::<usize>().map_err(|e| format!("{x:?}: {e}")))?;
            SplitProfile::new(n, d)?
        }
        s => return Err(Failure::Precondition(format!("unknown profile {s:?}; use point, full, hyperplane:i or dims:d1,d2,..."))),
    };
    let l = MoebiusVariety::new(n, relations, constants)?;
    let rep = product::is_broad(&l, &profile)?;
    rec.output("broad", rep.broad);
    rec.output("failing", rep.failing.map(|s| s.iter().map(|i| i + 1).collect::<Vec<_>>()));
    rec.output("dimension", l.dimension());
    let proj: Map<String, Value> = (1..(1usize << n))
        .map(|mask| {
            let s = product::subset_of(mask, n);
            let key = s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",");
            (key, json!({ "variety": l.projection_dimension(&s), "w": profile.dim(mask) }))
        })
        .collect();
    rec.output("projection_dimensions", Value::Object(proj));
    let hodge = product::is_hodge_generic(&l, cfg.hodge_denom_bound, cfg.tol("hodge"));
    rec.output("hodge_generic", hodge.generic);
    rec.certificates.push(hodge_value(&hodge));
    rec.tol("hodge", cfg.tol("hodge"));
    rec.tol("cycle_holonomy", 1e-9);
    Ok(())
}

pub fn special(a: &SpecialArgs, cfg: &RunConfig, rec: &mut Record) -> Outcome {
    let coef_bound = a.coef_bound.unwrap_or(cfg.coef_bound);
    let tol = cfg.tol("special");
    let points = match &a.points {
        Some(p) => {
            let pts = parse::list(p, parse::upper)?;
            rec.input("points", record::complexes(&pts));
            pts
        }
        None => {
            let wa = WitnessArgs {
                poly: a.witness.poly.clone(),
                function: a.witness.function.clone(),
                targets: a.witness.targets.clone(),
                count: a.witness.count,
                branch: None,
                ball_radius: None,
                neighborhood: None,
            };
            let ws = solve(&wa, cfg, rec)?;
            rec.certificates = ws.iter().map(certificate_value).collect();
            ws.iter().map(|w| w.z).collect()
        }
    };
    rec.input("coef_bound", coef_bound);
    rec.tol("special", tol);
    let rep = special::special_scan_points(&points, coef_bound, tol)?;
    rec.output("total", rep.total);
    rec.output("flagged", rep.flagged);
    rec.output(
        "entries",
        Value::Array(
            rep.entries
                .iter()
                .map(|e| {
                    json!({
                        "z": record::complex(e.z),
                        "reduced": record::complex(e.reduced),
                        "form": e.flag.form.map(|f| json!([f.a, f.b, f.c])),
                        "discriminant": e.flag.form.map(|f| f.discriminant()),
                        "residual": e.flag.residual.map(record::real),
                        "certified": e.flag.certified,
                    })
                })
                .collect(),
        ),
    );
    rec.diagnostics.push("experiment log: an empty report is not evidence about special points in general".into());
    Ok(())
}

pub fn classpoly(a: &ClassPolyArgs, cfg: &RunConfig, rec: &mut Record) -> Outcome {
    rec.input("D", a.d);
    let pc = ClassPolynomialConfig { max_gap: cfg.tol("classpoly_gap"), ..ClassPolynomialConfig::default() };
    let h = special::class_polynomial(a.d, &pc)?;
    rec.output("coefficients", Value::Array(h.coefficients.iter().map(record::integer).collect()));
    rec.output("degree", h.degree());
    rec.output("forms", Value::Array(h.forms.iter().map(|f| json!([f.a, f.b, f.c])).collect()));
    rec.output("roots", record::complexes(&h.roots));
    rec.certificates.push(json!({
        "kind": "near-integrality of multiple-precision coefficients",
        "max_gap": record::real(h.max_gap),
        "precision_bits": h.precision_bits,
        "truncation": h.truncation,
    }));
    rec.tol("classpoly_gap", pc.max_gap);
    Ok(())
}

/// Quick battery over every module; any failed check is a numerical failure.
pub fn selftest(_a: &SelftestArgs, cfg: &RunConfig, rec: &mut Record) -> Outcome {
    let ev = evaluator(cfg)?;
    let i = C64::new(0.0, 1.0);
    let mut checks: Vec<(String, f64, f64)> = vec![];
    let mut check = |name: &str, value: f64, tol: f64| checks.push((name.to_string(), value, tol));
    check("j(i) = 1728", (ev.eval_j(i)? - 1728.0).norm(), 1e-9);
    check("j(rho) = 0", ev.eval_j(shilov::modular::rho())?.norm(), 1e-9);
    check("j(2i) = 287496 (relative)", (ev.eval_j(2.0 * i)? - 287496.0).norm() / 287496.0, 1e-6);
    let z = DiskPoint::interior(vec![C64::new(0.3, 0.1)])?;
    let w = DiskPoint::interior(vec![C64::new(-0.2, 0.5)])?;
    let m = geometry::DiskAutomorphism::new(0.4, C64::new(0.1, -0.6))?;
    let moved = geometry::bergman_distance(
        &DiskPoint::interior(vec![m.apply(z.coords()[0])])?,
        &DiskPoint::interior(vec![m.apply(w.coords()[0])])?,
    )?;
    check("Bergman distance is Mobius invariant", (moved - geometry::bergman_distance(&z, &w)?).abs(), 1e-10);
    let orbit = group::orbit_toward(BoundaryPoint::Real(2f64.sqrt() - 1.0), 2.0 * i, 30)?;
    check("orbit reaches sqrt(2) - 1", orbit.errors().into_iter().fold(f64::INFINITY, f64::min), 1e-8);
    let h = special::class_polynomial(-4, &ClassPolynomialConfig::default())?;
    let want = [num_bigint::BigInt::from(-1728), num_bigint::BigInt::from(1)];
    check("H_-4 = X - 1728", if h.coefficients == want { 0.0 } else { 1.0 }, 0.5);
    let target = TargetFunction::algebraic(BiPoly::parse("w - z")?)?;
    let loc = solver::rouche_localize(&ev, &WitnessProblem::new(target, BoundaryPoint::Rational(1, 2), 1))?;
    let worst = loc.witnesses.iter().map(|w| w.residual).fold(if loc.witnesses.is_empty() { f64::INFINITY } else { 0.0 }, f64::max);
    check("certified witness of j(z) = z near 1/2", worst, 1e-8);
    let graph = MoebiusVariety::graph(parse::matrix("1,sqrt(2),0,1")?);
    let broad = product::is_broad(&graph, &SplitProfile::point(2))?;
    check("graph with point W is not broad", if broad.broad { 1.0 } else { 0.0 }, 0.5);
    let all_pass = checks.iter().all(|(_, v, t)| v < t);
    rec.output(
        "checks",
        Value::Array(
            checks
                .iter()
                .map(|(n, v, t)| json!({ "name": n, "value": record::real(*v), "tol": record::real(*t), "pass": v < t }))
                .collect(),
        ),
    );
    rec.output("all_pass", all_pass);
    if !all_pass {
        return Err(Failure::Numerical("self-test failed".into()));
    }
    Ok(())
}
