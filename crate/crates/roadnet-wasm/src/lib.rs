//! Browser bindings for the interactive demo page.
//!
//! Every export takes plain numbers and returns a JSON string so the
//! page needs no bindgen-generated classes, and the same functions
//! compile natively for host-side tests.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use roadnet_core::codec::coupled::encode_coupled;
use roadnet_core::codec::decoupled::encode_decoupled;
use roadnet_core::codec::order::OrderingPolicy;
use roadnet_core::codec::sar::encode_sar;
use roadnet_core::io::write_network;
use roadnet_core::metrics::{evaluate, PrSweep};
use roadnet_core::nar::{complexity_report, iterative_decode, NoisyOracle};
use roadnet_core::synth::{generate, perturb, GenConfig, PerturbConfig};
use roadnet_core::RoadNetwork;

const POLICY: OrderingPolicy = OrderingPolicy::FrontRight;

fn network_value(net: &RoadNetwork) -> Value {
    serde_json::from_str(&write_network(net)).expect("network JSON is well formed")
}

fn sweep_value(sweep: &PrSweep) -> Value {
    json!({
        "per_threshold": sweep.points.iter().map(|p| json!({
            "t": p.threshold, "p": p.precision, "r": p.recall, "f1": p.f1,
        })).collect::<Vec<_>>(),
        "mean": {"p": sweep.mean_precision, "r": sweep.mean_recall, "f1": sweep.mean_f1},
    })
}

fn fail(message: impl std::fmt::Display) -> String {
    json!({"error": message.to_string()}).to_string()
}

/// Generates a seeded network and all three of its token encodings.
#[wasm_bindgen]
pub fn demo_network(seed: u32) -> String {
    let net = generate(u64::from(seed), &GenConfig::default());
    let coupled = match encode_coupled(&net, &POLICY) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let decoupled = match encode_decoupled(&net, &POLICY) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let seq = match encode_sar(&net, &POLICY) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let sar_rows: Vec<Vec<u16>> = seq
        .rows()
        .iter()
        .take(seq.payload_rows())
        .map(|row| row.iter().map(|t| t.0).collect())
        .collect();
    json!({
        "network": network_value(&net),
        "coupled": coupled.iter().map(|t| t.0).collect::<Vec<u16>>(),
        "decoupled": decoupled.iter().map(|t| t.0).collect::<Vec<u16>>(),
        "sar_rows": sar_rows,
        "counts": {
            "vertices": net.vertices().len(),
            "edges": net.edges().len(),
            "key_points": net.key_points().len(),
        },
    })
    .to_string()
}

/// Perturbs a seeded network and scores it against the original with
/// both precision-recall families.
#[wasm_bindgen]
pub fn demo_perturb_eval(seed: u32, jitter: f64, drop_vertex: f64, drop_edge: f64) -> String {
    if !(0.0..=10.0).contains(&jitter)
        || !(0.0..=1.0).contains(&drop_vertex)
        || !(0.0..=1.0).contains(&drop_edge)
    {
        return fail("jitter must be in [0, 10] meters and drop rates in [0, 1]");
    }
    let gt = generate(u64::from(seed), &GenConfig::default());
    let noise = PerturbConfig {
        jitter,
        drop_vertex,
        drop_edge,
    };
    let pred = perturb(&gt, &noise, u64::from(seed) ^ 0xA5A5);
    let report = evaluate(&pred, &gt);
    json!({
        "gt": network_value(&gt),
        "pred": network_value(&pred),
        "landmark": sweep_value(&report.landmark),
        "reachability": sweep_value(&report.reachability),
        "counts": {
            "pred_landmarks": report.pred_landmarks,
            "gt_landmarks": report.gt_landmarks,
            "pred_paths": report.pred_paths,
            "gt_paths": report.gt_paths,
        },
    })
    .to_string()
}

/// Runs noisy mask-predict refinement on a seeded network and reports
/// per-iteration accuracy next to the token-step cost model.
#[wasm_bindgen]
pub fn demo_refine(seed: u32, n_iter: u32) -> String {
    if n_iter == 0 || n_iter > 64 {
        return fail("n_iter must be in [1, 64]");
    }
    let net = generate(u64::from(seed), &GenConfig::default());
    let seq = match encode_sar(&net, &POLICY) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let target = seq.flat();
    let mut oracle = NoisyOracle::new(&target, u64::from(seed));
    let trace = match iterative_decode(&mut oracle, &seq, n_iter as usize) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let cost = complexity_report(&net, n_iter as usize);
    json!({
        "network": network_value(&net),
        "valid_positions": trace.valid_positions,
        "accuracy": trace.accuracy,
        "exact": trace.exact,
        "iterations": trace.iterations.iter().map(|s| json!({
            "predicted": s.predicted,
            "remasked": s.remasked,
            "accuracy": s.accuracy,
        })).collect::<Vec<_>>(),
        "complexity": {
            "edges": cost.edges,
            "key_points": cost.key_points,
            "clauses": cost.clauses,
            "ar_token_steps": cost.ar_token_steps,
            "sar_token_steps": cost.sar_token_steps,
            "nar_token_steps": cost.nar_token_steps,
            "sar_acceleration": cost.sar_acceleration,
            "nar_acceleration": cost.nar_acceleration,
        },
    })
    .to_string()
}
