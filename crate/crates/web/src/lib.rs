//! wasm-bindgen bindings behind `www/index.html`.
//!
//! Every export returns a JSON string so the page only needs `JSON.parse`.

use orbitforge::asymptotics::{objective_t, ObjectiveParams};
use orbitforge::boolfn::{enumerate_orbits, orbit_size};
use orbitforge::regions::{self, RegionConfig};
use orbitforge::spectrum::coeff_fast;
use orbitforge::{Composition, OrbitKey};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest n the heatmap accepts; the page stays responsive up to here.
pub const HEATMAP_MAX_N: usize = 160;

fn to_js(v: Value) -> String {
    v.to_string()
}

fn err(msg: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&msg.to_string())
}

/// Best-construction exponent log2(ratio)/n for every orbit of IP_n.
///
/// Cells are indexed by (p, r); q is implied. Uncaptured orbits get `null`.
pub fn heatmap(n: usize) -> Result<Value, String> {
    if n == 0 || n > HEATMAP_MAX_N {
        return Err(format!("n must be in 1..={HEATMAP_MAX_N}"));
    }
    let cfg = RegionConfig::default();
    let cells: Vec<Value> = enumerate_orbits(n)
        .into_iter()
        .map(|k| {
            let rep = regions::certify_key(&k, &cfg).ok().filter(|r| r.is_captured());
            json!({
                "p": k.p,
                "q": k.q,
                "r": k.r,
                "exponent": rep.as_ref().map(|r| r.exponent),
                "region": rep.as_ref().map(|r| r.region),
                "composition": rep.as_ref().map(|r| r.composition.to_string()),
            })
        })
        .collect();
    Ok(json!({"n": n, "target": regions::target_exponent(), "cells": cells}))
}

/// min(T1, T2) for region 3 or 4 on a (p̂, r̂) grid; infeasible points are `null`.
pub fn t_surface(region: u8, steps: usize) -> Result<Value, String> {
    if region != 3 && region != 4 {
        return Err("region must be 3 or 4".into());
    }
    if !(2..=400).contains(&steps) {
        return Err("steps must be in 2..=400".into());
    }
    let h = 1.0 / steps as f64;
    let mut rows = Vec::with_capacity(steps + 1);
    let mut best: Option<(f64, f64, f64)> = None;
    for i in 0..=steps {
        let r_hat = i as f64 * h;
        let mut row = Vec::with_capacity(steps + 1);
        for j in 0..=steps {
            let p_hat = j as f64 * h;
            let v = ObjectiveParams::new(region, p_hat, r_hat)
                .ok()
                .and_then(|o| objective_t(&o).ok())
                .map(|(t1, t2)| t1.min(t2));
            if let Some(v) = v {
                if best.is_none_or(|b| v > b.0) {
                    best = Some((v, p_hat, r_hat));
                }
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(json!({
        "region": region,
        "steps": steps,
        "values": rows,
        "max": best.map(|b| json!({"value": b.0, "p_hat": b.1, "r_hat": b.2})),
    }))
}

/// Exact [u^p v^q] of a composition spectrum, with its capture exponent.
pub fn coefficient(composition: &str, p: usize, q: usize) -> Result<Value, String> {
    let c = Composition::parse(composition).map_err(|e| e.to_string())?;
    let n = c.n();
    let r = n.checked_sub(p + q).ok_or_else(|| format!("p + q exceeds n = {n}"))?;
    let k = OrbitKey::new(p, q, r);
    let v = coeff_fast(&c, &k).map_err(|e| e.to_string())?;
    let rep = regions::ratio(&c, &k).map_err(|e| e.to_string())?;
    Ok(json!({
        "composition": c.to_string(),
        "n": n,
        "key": k,
        "coefficient": v.to_string(),
        "orbit_size": orbit_size(k).to_string(),
        "exponent": rep.is_captured().then_some(rep.exponent),
    }))
}

#[wasm_bindgen(js_name = orbitHeatmap)]
pub fn orbit_heatmap_js(n: usize) -> Result<String, JsValue> {
    heatmap(n).map(to_js).map_err(err)
}

#[wasm_bindgen(js_name = tSurface)]
pub fn t_surface_js(region: u8, steps: usize) -> Result<String, JsValue> {
    t_surface(region, steps).map(to_js).map_err(err)
}

#[wasm_bindgen(js_name = coefficient)]
pub fn coefficient_js(composition: &str, p: usize, q: usize) -> Result<String, JsValue> {
    coefficient(composition, p, q).map(to_js).map_err(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_covers_all_orbits() {
        let v = heatmap(20).unwrap();
        assert_eq!(v["cells"].as_array().unwrap().len(), 231);
        assert!(heatmap(0).is_err());
    }

    #[test]
    fn surface_max_matches_optimizer_scale() {
        let v = t_surface(3, 100).unwrap();
        let m = v["max"]["value"].as_f64().unwrap();
        assert!(m > 0.80 && m <= 0.841, "{m}");
    }

    #[test]
    fn coefficient_small_case() {
        let v = coefficient("Matching:2,Nand:1", 2, 2).unwrap();
        assert_eq!(v["coefficient"], "4");
        assert!(coefficient("Matching:1", 3, 0).is_err());
    }
}
