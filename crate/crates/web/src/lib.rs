//! Browser bindings. Every exported function takes plain numbers or a JSON
//! string and returns a JSON string; the `*_json` functions are the same
//! operations without the JS boundary, so they also run natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use spinsep::criteria::{analyze, class1_p, class2_p, AnalyzeOptions, PartitionSelection};
use spinsep::numfmt;
use spinsep::qstate::Bipartition;
use spinsep::states::{ghz, w, StateSpec};
use spinsep::wernerscan::{pmin_class1, pmin_ppt};

/// Largest register the curve and threshold views accept.
pub const MAX_DEMO_QUBITS: usize = 10;

#[derive(Serialize)]
struct CurvePoint {
    #[serde(serialize_with = "numfmt::ser_f64")]
    theta: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    p1: f64,
    #[serde(serialize_with = "numfmt::ser_f64")]
    p2: f64,
}

#[derive(Serialize)]
struct Curve {
    n: usize,
    n_a: usize,
    /// `P_II` of the W state on the same split, for comparison.
    #[serde(serialize_with = "numfmt::ser_f64")]
    w_p2: f64,
    points: Vec<CurvePoint>,
}

#[derive(Serialize)]
struct Threshold {
    n: usize,
    #[serde(serialize_with = "numfmt::ser_opt_f64")]
    class1_single: Option<f64>,
    #[serde(serialize_with = "numfmt::ser_opt_f64")]
    class1_half: Option<f64>,
    #[serde(serialize_with = "numfmt::ser_f64")]
    ppt: f64,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

fn check_size(n: usize) -> Result<(), String> {
    if (2..=MAX_DEMO_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(format!("n must lie in 2..={MAX_DEMO_QUBITS}"))
    }
}

/// `P_I` and `P_II` of `cos θ|0…0⟩ + sin θ|1…1⟩` for θ on `[0, π/2]`.
pub fn ghz_curve_json(n: usize, n_a: usize, samples: usize) -> Result<String, String> {
    check_size(n)?;
    let part = Bipartition::leading(n, n_a).map_err(|e| e.to_string())?;
    let samples = samples.clamp(2, 512);
    let points = (0..samples)
        .map(|i| {
            let theta = std::f64::consts::FRAC_PI_2 * i as f64 / (samples - 1) as f64;
            let psi = ghz(n, theta)?;
            Ok(CurvePoint {
                theta,
                p1: class1_p(&psi, &part)?,
                p2: class2_p(&psi, &part)?,
            })
        })
        .collect::<spinsep::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let w_p2 = class2_p(&w(n).map_err(|e| e.to_string())?, &part).map_err(|e| e.to_string())?;
    to_json(&Curve {
        n,
        n_a,
        w_p2,
        points,
    })
}

/// Werner thresholds for `n = 2..=n_max` on the `n_a = 1` and `n_a = ⌊n/2⌋`
/// splits together with the PPT threshold.
pub fn werner_thresholds_json(n_max: usize) -> Result<String, String> {
    check_size(n_max)?;
    let tol = 1e-7;
    let rows = (2..=n_max)
        .map(|n| {
            Ok(Threshold {
                n,
                class1_single: pmin_class1(n, 1, tol).ok(),
                class1_half: if n >= 4 {
                    pmin_class1(n, n / 2, tol).ok()
                } else {
                    None
                },
                ppt: pmin_ppt(n, 1, tol)?,
            })
        })
        .collect::<spinsep::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    to_json(&rows)
}

/// Full analysis of a state described by a `StateSpec` JSON document.
pub fn analyze_json(spec: &str, symmetric: bool) -> Result<String, String> {
    let spec: StateSpec = serde_json::from_str(spec).map_err(|e| e.to_string())?;
    if spec.n_qubits.is_some_and(|n| n > MAX_DEMO_QUBITS) {
        return Err(format!("at most {MAX_DEMO_QUBITS} qubits in the browser"));
    }
    let rho = spec.build().map_err(|e| e.to_string())?.density;
    let opts = AnalyzeOptions {
        symmetric,
        ..AnalyzeOptions::default()
    };
    let report = analyze(&rho, &PartitionSelection::All, &opts).map_err(|e| e.to_string())?;
    to_json(&report)
}

#[wasm_bindgen(js_name = ghzCurve)]
pub fn ghz_curve(n: usize, n_a: usize, samples: usize) -> Result<String, JsError> {
    ghz_curve_json(n, n_a, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = wernerThresholds)]
pub fn werner_thresholds(n_max: usize) -> Result<String, JsError> {
    werner_thresholds_json(n_max).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = analyzeState)]
pub fn analyze_state(spec: &str, symmetric: bool) -> Result<String, JsError> {
    analyze_json(spec, symmetric).map_err(|e| JsError::new(&e))
}
