//! Browser bindings. Every export takes plain arguments and returns a
//! JSON string, so the page side is a single `JSON.parse` with an
//! `error` key on failure; no structured-clone types to keep in sync.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use djqed::boolean::TruthTable;
use djqed::circuit::{dj_decision, run_dj, JointOpId};
use djqed::lindblad::{default_dt, run_joint_op, SimConfig};
use djqed::params::{CouplingParams, NoiseParams};
use djqed::pulse::{compile_joint_op, ScheduleItem};
use djqed::synth::synthesize_all;

fn err_json(message: impl std::fmt::Display) -> String {
    json!({ "error": message.to_string() }).to_string()
}

/// JSON table of all 35 canonical decompositions.
#[wasm_bindgen]
pub fn synthesis_table() -> String {
    match synthesize_all() {
        Ok(rows) => {
            let table: Vec<Value> = rows
                .iter()
                .map(|d| {
                    json!({
                        "truth_table": d.target().to_string(),
                        "type_class": d.type_class(),
                        "gates": d.gates_text(),
                        "diagonal": d.diagonal(),
                    })
                })
                .collect();
            json!(table).to_string()
        }
        Err(e) => err_json(e),
    }
}

/// Ideal-algorithm outcome for one truth table: the eight basis
/// probabilities and the constant/balanced verdict.
#[wasm_bindgen]
pub fn dj_run(bits: &str) -> String {
    let run = || -> djqed::Result<String> {
        let f: TruthTable = bits.parse()?;
        let d = run_dj(&f)?;
        let decision = dj_decision(&d, 0.5)?;
        Ok(json!({
            "truth_table": f.to_string(),
            "probabilities": d.probabilities(),
            "p000": d.p000(),
            "decision": decision.to_string(),
        })
        .to_string())
    };
    run().unwrap_or_else(err_json)
}

/// Compiled pulse schedule of a joint operation as a flat item list.
#[wasm_bindgen]
pub fn pulse_schedule(op: &str, g_mhz: f64) -> String {
    let run = || -> djqed::Result<String> {
        let op: JointOpId = op.parse()?;
        let params = CouplingParams::from_g_over_2pi_mhz(g_mhz, 24.0, 10.0)?;
        let schedule = compile_joint_op(op, &params)?;
        let items: Vec<Value> = schedule
            .items
            .iter()
            .map(|item| match item {
                ScheduleItem::Segment(s) => json!({
                    "kind": "segment",
                    "qutrit": s.active_qutrit,
                    "transition": s.transition.to_string(),
                    "duration_ns": s.duration * 1e9,
                    "label": s.label,
                }),
                ScheduleItem::Layer(l) => json!({
                    "kind": "layer",
                    "duration_ns": 0.0,
                    "label": l.label,
                }),
            })
            .collect();
        Ok(json!({
            "op": op.label(),
            "items": items,
            "total_ns": schedule.total_duration() * 1e9,
        })
        .to_string())
    };
    run().unwrap_or_else(err_json)
}

/// One lossy integration point with the standard device parameters.
/// `dt_scale` shrinks the integration step below its default (values are
/// clamped into [0.05, 1]; coarser steps would break the phase-per-step
/// bound).
#[wasm_bindgen]
pub fn fidelity_point(op: &str, b0: f64, photon_cutoff: usize, dt_scale: f64) -> String {
    let run = || -> djqed::Result<String> {
        let op: JointOpId = op.parse()?;
        let params = CouplingParams::from_g_over_2pi_mhz(15.0, b0, 10.0)?;
        let scale = if dt_scale.is_finite() { dt_scale.clamp(0.05, 1.0) } else { 1.0 };
        let config = SimConfig {
            photon_cutoff,
            dt_override: Some(default_dt(&params) * scale),
        };
        let r = run_joint_op(op, &params, &NoiseParams::default(), &config)?;
        // wall_time_s is NaN in the browser (no monotonic clock here);
        // JSON has no NaN, so it becomes null
        let wall = if r.wall_time_s.is_finite() { json!(r.wall_time_s) } else { Value::Null };
        Ok(json!({
            "op": r.op.label(),
            "b0": r.b0,
            "b1": r.b1,
            "fidelity": r.fidelity,
            "trace_error": r.trace_error,
            "min_eigenvalue": r.min_eigenvalue,
            "cutoff_population": r.cutoff_population,
            "cutoff_flagged": r.cutoff_flagged(),
            "wall_time_s": wall,
        })
        .to_string())
    };
    run().unwrap_or_else(err_json)
}
