//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations: classify a built-in function at (1, 1), map the Julia
//! quotient over approach directions at one distance, and map the Cauchy
//! transform `|g|` of a measure over the upper half-plane.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use bidisk_julia::catalog::{builtin, Builtin};
use bidisk_julia::classifier::{classify, julia_quotient_near, ClassifierConfig};
use bidisk_julia::geometry::ApproachPoint;
use bidisk_julia::pick::{f_from_measure, g_bound_probe, linearity_test, LINEARITY_TOL};
use bidisk_julia::{AnalyticFunction, BoundaryPoint, Direction, MeasureSpec, C64};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn function(name: &str, terms: u32) -> Result<AnalyticFunction, String> {
    let b: Builtin = name.parse().map_err(|e: bidisk_julia::CatalogError| e.to_string())?;
    let mut params = BTreeMap::new();
    if b == Builtin::Phi4 {
        params.insert("N".to_string(), terms as f64);
    }
    builtin(b, &params).map_err(|e| e.to_string())
}

/// Verdict and headline numbers as JSON.
pub fn classify_summary(name: &str, terms: u32) -> Result<String, String> {
    let phi = function(name, terms)?;
    let r = classify(&phi, &BoundaryPoint::chi(), &ClassifierConfig::default()).map_err(|e| e.to_string())?;
    let pair = |z: C64| [z.re, z.im];
    let v = json!({
        "verdict": r.verdict.as_str(),
        "omega": pair(r.omega),
        "radial_quotient": r.radial_tail_sup,
        "gamma": r.gamma_by_aperture.iter().map(|g| [g.aperture, g.gamma]).collect::<Vec<_>>(),
        "alpha": r.alpha_estimate,
        "lambda": r.lambda.map(|(a, b)| [pair(a), pair(b)]),
        "beta_residual": r.beta_residual,
        "gates": r.gates.iter().map(|g| json!({"gate": g.gate.as_str(), "outcome": g.outcome, "detail": g.detail})).collect::<Vec<_>>(),
        "warnings": r.warnings,
    });
    Ok(v.to_string())
}

/// Julia quotient at `(1,1) + t h` with `h = (e^{i(π+a)}, e^{i(π+b)})` for `a, b`
/// on an `n x n` grid over `(-π/2, π/2)`. Row-major in `b`, then `a`; the
/// first `n²` entries are quotients, the next `n²` pointwise apertures.
pub fn julia_grid(name: &str, terms: u32, t: f64, n: usize) -> Result<Vec<f64>, String> {
    let phi = function(name, terms)?;
    if !(t > 0.0 && t <= 1.0) {
        return Err("t must lie in (0, 1]".into());
    }
    let chi = BoundaryPoint::chi();
    let mut q = Vec::with_capacity(n * n);
    let mut ap = Vec::with_capacity(n * n);
    for j in 0..n {
        let b = -PI / 2.0 + (j as f64 + 0.5) * PI / n as f64;
        for i in 0..n {
            let a = -PI / 2.0 + (i as f64 + 0.5) * PI / n as f64;
            let h = Direction::new(C64::from_polar(1.0, PI + a), C64::from_polar(1.0, PI + b));
            let p = ApproachPoint::new(chi, t, h);
            q.push(julia_quotient_near(&phi, &p).unwrap_or(f64::NAN));
            ap.push(p.aperture().unwrap_or(f64::NAN));
        }
    }
    q.extend(ap);
    Ok(q)
}

/// Resolved coefficients, bound probe and linearity test of a measure given as JSON.
pub fn decompose(measure_json: &str) -> Result<String, String> {
    let mu: MeasureSpec = serde_json::from_str(measure_json).map_err(|e| e.to_string())?;
    let hp = f_from_measure(&mu);
    let g = g_bound_probe(&hp).map_err(|e| e.to_string())?;
    let lin = linearity_test(&hp, LINEARITY_TOL).map_err(|e| e.to_string())?;
    Ok(json!({
        "A": hp.a(),
        "B": hp.b(),
        "bounded": g.bounded,
        "bound_estimate": g.bound_estimate,
        "is_linear": lin.is_linear,
        "linearity_residual": lin.residual,
    })
    .to_string())
}

/// `|g(ζ)|` on an `n x n` grid over `Re ζ ∈ [-2, 2]`, `Im ζ ∈ (0, 2]`, row-major
/// from the top row down.
pub fn g_grid(measure_json: &str, n: usize) -> Result<Vec<f64>, String> {
    let mu: MeasureSpec = serde_json::from_str(measure_json).map_err(|e| e.to_string())?;
    let hp = f_from_measure(&mu);
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let im = 2.0 * (n - j) as f64 / n as f64;
        for i in 0..n {
            let re = -2.0 + 4.0 * (i as f64 + 0.5) / n as f64;
            out.push(hp.g(C64::new(re, im)).map(|v| v.norm()).unwrap_or(f64::NAN));
        }
    }
    Ok(out)
}

#[wasm_bindgen(js_name = classifySummary)]
pub fn classify_summary_js(name: &str, terms: u32) -> Result<String, JsValue> {
    classify_summary(name, terms).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = juliaGrid)]
pub fn julia_grid_js(name: &str, terms: u32, t: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    julia_grid(name, terms, t, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = decompose)]
pub fn decompose_js(measure_json: &str) -> Result<String, JsValue> {
    decompose(measure_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = gGrid)]
pub fn g_grid_js(measure_json: &str, n: usize) -> Result<Vec<f64>, JsValue> {
    g_grid(measure_json, n).map_err(|e| JsValue::from_str(&e))
}
