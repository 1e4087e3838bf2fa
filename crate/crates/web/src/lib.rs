//! Browser bindings: j on the upper half-plane, orbits toward boundary
//! points, and certified witnesses of `P(z, j(z)) = 0`.

use shilov::group::{self, BoundaryPoint};
use shilov::modular::ModularEvaluator;
use shilov::poly::BiPoly;
use shilov::solver;
use shilov::C64;
use std::f64::consts::PI;
use wasm_bindgen::prelude::*;

thread_local! {
    static EV: ModularEvaluator = ModularEvaluator::new(60).expect("default truncation is valid");
}

fn js(e: impl ToString) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// `p/q`, an integer, `inf`, or a decimal.
pub fn parse_target(s: &str) -> Result<BoundaryPoint, String> {
    let s = s.trim();
    if s == "inf" {
        return Ok(BoundaryPoint::Infinity);
    }
    if let Some((p, q)) = s.split_once('/') {
        let (p, q) = (p.trim().parse::<i64>(), q.trim().parse::<i64>());
        if let (Ok(p), Ok(q)) = (p, q) {
            if q == 0 {
                return Err("zero denominator".into());
            }
            return BoundaryPoint::rational(p, q).map_err(|e| e.to_string());
        }
        return Err(format!("{s:?} is not a fraction of integers"));
    }
    if let Ok(n) = s.parse::<i64>() {
        return BoundaryPoint::rational(n, 1).map_err(|e| e.to_string());
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite()).map(BoundaryPoint::Real).ok_or_else(|| format!("cannot read {s:?}"))
}

/// `[j.re, j.im, j'.re, j'.im, reduced.re, reduced.im]`.
pub fn j_values(re: f64, im: f64) -> Result<Vec<f64>, String> {
    let z = C64::new(re, im);
    let (j, dj) = EV.with(|ev| ev.eval_j_with_derivative(z)).map_err(|e| e.to_string())?;
    let (r, _) = group::reduce_to_fundamental_domain(z).map_err(|e| e.to_string())?;
    Ok(vec![j.re, j.im, dj.re, dj.im, r.re, r.im])
}

/// Flattened `(re, im, error)` triples of the orbit of `base` toward `target`.
pub fn orbit_points(target: &str, base_re: f64, base_im: f64, k: usize) -> Result<Vec<f64>, String> {
    let t = parse_target(target)?;
    let seq = group::orbit_toward(t, C64::new(base_re, base_im), k).map_err(|e| e.to_string())?;
    Ok(seq.points().into_iter().zip(seq.errors()).flat_map(|(z, e)| [z.re, z.im, e]).collect())
}

fn hsv(h: f64, s: f64, v: f64) -> [u8; 3] {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let f = h6 - h6.floor();
    let (p, q, t) = (v * (1.0 - s), v * (1.0 - s * f), v * (1.0 - s * (1.0 - f)));
    let (r, g, b) = match h6 as u32 {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [(r * 255.0) as u8, (g * 255.0) as u8, (b * 255.0) as u8]
}

/// RGBA phase portrait of j over `[x0, x1] x [y0, y1]`, top row at `y1`.
/// Hue is `arg j`; brightness steps with `log |j|`.
pub fn portrait(width: usize, height: usize, x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<u8> {
    let mut px = vec![0u8; width * height * 4];
    EV.with(|ev| {
        for row in 0..height {
            let y = y1 - (y1 - y0) * (row as f64 + 0.5) / height as f64;
            for col in 0..width {
                let x = x0 + (x1 - x0) * (col as f64 + 0.5) / width as f64;
                let k = 4 * (row * width + col);
                let rgb = match ev.eval_j(C64::new(x, y)) {
                    Ok(j) if j.is_finite() => {
                        let m = j.norm().max(1e-300).ln();
                        let band = 0.75 + 0.25 * (m / 2.0).rem_euclid(1.0);
                        hsv(j.arg() / (2.0 * PI), 0.85, band)
                    }
                    _ => [24, 24, 24],
                };
                px[k..k + 3].copy_from_slice(&rgb);
                px[k + 3] = 255;
            }
        }
    });
    px
}

/// Witnesses of `P(z, j(z)) = 0` near each target, as a JSON array.
pub fn witnesses_json(poly: &str, targets: &str, count: usize) -> Result<String, String> {
    let p = BiPoly::parse(poly).map_err(|e| e.to_string())?;
    let ts = targets.split(',').filter(|s| !s.trim().is_empty()).map(parse_target).collect::<Result<Vec<_>, _>>()?;
    let batch = EV.with(|ev| solver::find_witnesses(ev, &p, &ts, count, None)).map_err(|e| e.to_string())?;
    let items: Vec<String> = batch
        .witnesses
        .iter()
        .map(|w| {
            format!(
                r#"{{"target":"{}","k":{},"z":[{:e},{:e}],"residual":{:e},"radius":{:e},"zeros":{}}}"#,
                w.target, w.orbit_index, w.z.re, w.z.im, w.residual, w.certificate.radius, w.certificate.zero_count
            )
        })
        .collect();
    Ok(format!("[{}]", items.join(",")))
}

#[wasm_bindgen]
pub fn j_at(re: f64, im: f64) -> Result<Vec<f64>, JsValue> {
    j_values(re, im).map_err(js)
}

#[wasm_bindgen]
pub fn orbit(target: &str, base_re: f64, base_im: f64, k: usize) -> Result<Vec<f64>, JsValue> {
    orbit_points(target, base_re, base_im, k).map_err(js)
}

#[wasm_bindgen]
pub fn phase_portrait(width: usize, height: usize, x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<u8> {
    portrait(width, height, x0, x1, y0, y1)
}

#[wasm_bindgen]
pub fn witnesses(poly: &str, targets: &str, count: usize) -> Result<String, JsValue> {
    witnesses_json(poly, targets, count).map_err(js)
}
