//! Equality of networks up to quantization and vertex renaming.
//!
//! Decoding a token sequence yields fresh vertex names and cell-center
//! coordinates, so roundtrips are judged by graph isomorphism over
//! quantized geometry: a bijection between vertex sets that preserves
//! grid cells and maps the edge multiset, control bins included, onto
//! the other edge multiset. Vertices in distinct cells have at most one
//! candidate partner, so matching is linear for spaced networks and
//! falls back to backtracking only among cell collisions.

use std::collections::HashMap;

use crate::graph::{GraphError, RoadNetwork};

type Cell = (u16, u16);
type EdgeKey = (usize, usize, Cell);

struct Quantized {
    cells: Vec<Cell>,
    in_deg: Vec<usize>,
    out_deg: Vec<usize>,
    edges: Vec<EdgeKey>,
}

fn quantize(net: &RoadNetwork) -> Result<Quantized, GraphError> {
    let frame = net.frame();
    let cells = net
        .vertices()
        .iter()
        .map(|v| frame.quantize(v.point()))
        .collect::<Result<Vec<_>, _>>()?;
    let (in_deg, out_deg) = net.degrees();
    let edges = net
        .edges()
        .iter()
        .map(|e| {
            let s = net
                .vertex_index(&e.source)
                .ok_or_else(|| GraphError::UnknownVertex(e.source.clone()))?;
            let t = net
                .vertex_index(&e.target)
                .ok_or_else(|| GraphError::UnknownVertex(e.target.clone()))?;
            Ok((s, t, frame.quantize_ctrl(e.ctrl())?))
        })
        .collect::<Result<Vec<_>, GraphError>>()?;
    Ok(Quantized {
        cells,
        in_deg,
        out_deg,
        edges,
    })
}

fn edge_multiset(edges: &[EdgeKey]) -> HashMap<EdgeKey, usize> {
    let mut out = HashMap::new();
    for &e in edges {
        *out.entry(e).or_insert(0) += 1;
    }
    out
}

fn search(
    order: &[usize],
    depth: usize,
    candidates: &HashMap<usize, Vec<usize>>,
    used: &mut Vec<bool>,
    mapping: &mut Vec<usize>,
    a: &Quantized,
    b_edges: &HashMap<EdgeKey, usize>,
) -> bool {
    if depth == order.len() {
        let mapped = edge_multiset(
            &a.edges
                .iter()
                .map(|&(s, t, c)| (mapping[s], mapping[t], c))
                .collect::<Vec<_>>(),
        );
        return mapped == *b_edges;
    }
    let v = order[depth];
    for &cand in &candidates[&v] {
        if used[cand] {
            continue;
        }
        used[cand] = true;
        mapping[v] = cand;
        if search(order, depth + 1, candidates, used, mapping, a, b_edges) {
            return true;
        }
        used[cand] = false;
    }
    false
}

/// Explains why two networks are not quantized-isomorphic, or returns
/// `None` when they are.
pub fn explain_mismatch(a: &RoadNetwork, b: &RoadNetwork) -> Result<Option<String>, GraphError> {
    if a.frame() != b.frame() {
        return Ok(Some("frames differ".into()));
    }
    let qa = quantize(a)?;
    let qb = quantize(b)?;
    if qa.cells.len() != qb.cells.len() {
        return Ok(Some(format!(
            "vertex counts differ: {} vs {}",
            qa.cells.len(),
            qb.cells.len()
        )));
    }
    if qa.edges.len() != qb.edges.len() {
        return Ok(Some(format!(
            "edge counts differ: {} vs {}",
            qa.edges.len(),
            qb.edges.len()
        )));
    }
    let mut sa = qa.cells.clone();
    let mut sb = qb.cells.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return Ok(Some("vertex cell multisets differ".into()));
    }

    let mut by_cell: HashMap<Cell, Vec<usize>> = HashMap::new();
    for (j, &cell) in qb.cells.iter().enumerate() {
        by_cell.entry(cell).or_default().push(j);
    }
    let mut candidates: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &cell) in qa.cells.iter().enumerate() {
        let cands: Vec<usize> = by_cell[&cell]
            .iter()
            .copied()
            .filter(|&j| qa.in_deg[i] == qb.in_deg[j] && qa.out_deg[i] == qb.out_deg[j])
            .collect();
        if cands.is_empty() {
            return Ok(Some(format!(
                "vertex {} has no degree-compatible partner in its cell",
                a.vertices()[i].id
            )));
        }
        candidates.insert(i, cands);
    }

    let mut order: Vec<usize> = (0..qa.cells.len()).collect();
    order.sort_by_key(|&i| candidates[&i].len());
    let b_edges = edge_multiset(&qb.edges);
    let mut used = vec![false; qb.cells.len()];
    let mut mapping = vec![usize::MAX; qa.cells.len()];
    if search(
        &order,
        0,
        &candidates,
        &mut used,
        &mut mapping,
        &qa,
        &b_edges,
    ) {
        Ok(None)
    } else {
        Ok(Some(
            "no cell-preserving bijection maps the edge multisets onto each other".into(),
        ))
    }
}

/// True when the networks are equal up to quantization and renaming.
pub fn quantized_isomorphic(a: &RoadNetwork, b: &RoadNetwork) -> Result<bool, GraphError> {
    Ok(explain_mismatch(a, b)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::coupled::{decode_coupled, encode_coupled};
    use crate::codec::decoupled::{decode_decoupled, encode_decoupled};
    use crate::codec::order::OrderingPolicy;
    use crate::codec::sar::{decode_sar, encode_sar};
    use crate::graph::{BevFrame, Edge, Vertex};
    use crate::synth::{generate, GenConfig};

    fn frame() -> BevFrame {
        BevFrame::default_urban()
    }

    #[test]
    fn renaming_and_subcell_jitter_are_invisible() {
        let mut a = RoadNetwork::new(frame());
        a.add_vertex(Vertex::new("a", -20.2, 0.3)).unwrap();
        a.add_vertex(Vertex::new("b", 0.4, 5.1)).unwrap();
        a.add_edge(Edge::new("a", "b", -10.0, 2.0));
        let mut b = RoadNetwork::new(frame());
        b.add_vertex(Vertex::new("x", 0.1, 5.4)).unwrap();
        b.add_vertex(Vertex::new("y", -20.9, 0.8)).unwrap();
        b.add_edge(Edge::new("y", "x", -9.8, 2.2));
        assert!(quantized_isomorphic(&a, &b).unwrap());
    }

    #[test]
    fn direction_and_ctrl_bins_are_visible() {
        let mut a = RoadNetwork::new(frame());
        a.add_vertex(Vertex::new("a", -20.0, 0.0)).unwrap();
        a.add_vertex(Vertex::new("b", 0.0, 5.0)).unwrap();
        a.add_edge(Edge::new("a", "b", -10.0, 2.0));
        let mut flipped = RoadNetwork::new(frame());
        flipped.add_vertex(Vertex::new("a", -20.0, 0.0)).unwrap();
        flipped.add_vertex(Vertex::new("b", 0.0, 5.0)).unwrap();
        flipped.add_edge(Edge::new("b", "a", -10.0, 2.0));
        assert!(!quantized_isomorphic(&a, &flipped).unwrap());
        let mut bent = RoadNetwork::new(frame());
        bent.add_vertex(Vertex::new("a", -20.0, 0.0)).unwrap();
        bent.add_vertex(Vertex::new("b", 0.0, 5.0)).unwrap();
        bent.add_edge(Edge::new("a", "b", -10.0, 4.0));
        assert!(!quantized_isomorphic(&a, &bent).unwrap());
    }

    #[test]
    fn cell_collisions_still_distinguish_wiring() {
        // u1, u2 share a cell; v1, v2 share a cell. One net fans out of
        // u1, the other uses one edge per source: same edge multiset
        // over cells, different graphs.
        let mut fan = RoadNetwork::new(frame());
        fan.add_vertex(Vertex::new("u1", 0.2, 0.2)).unwrap();
        fan.add_vertex(Vertex::new("u2", 0.7, 0.7)).unwrap();
        fan.add_vertex(Vertex::new("v1", 10.2, 0.2)).unwrap();
        fan.add_vertex(Vertex::new("v2", 10.7, 0.7)).unwrap();
        fan.add_edge(Edge::new("u1", "v1", 5.0, 0.0));
        fan.add_edge(Edge::new("u1", "v2", 5.0, 0.0));
        let mut split = RoadNetwork::new(frame());
        split.add_vertex(Vertex::new("u1", 0.2, 0.2)).unwrap();
        split.add_vertex(Vertex::new("u2", 0.7, 0.7)).unwrap();
        split.add_vertex(Vertex::new("v1", 10.2, 0.2)).unwrap();
        split.add_vertex(Vertex::new("v2", 10.7, 0.7)).unwrap();
        split.add_edge(Edge::new("u1", "v1", 5.0, 0.0));
        split.add_edge(Edge::new("u2", "v2", 5.0, 0.0));
        assert!(!quantized_isomorphic(&fan, &split).unwrap());
        assert!(quantized_isomorphic(&fan, &fan).unwrap());
        assert!(quantized_isomorphic(&split, &split).unwrap());
    }

    #[test]
    fn all_three_codecs_roundtrip_isomorphically() {
        let cfg = GenConfig::default();
        let policy = OrderingPolicy::FrontRight;
        for seed in 0..15 {
            let net = generate(seed, &cfg);
            let frame = net.frame();

            let tokens = encode_coupled(&net, &policy).unwrap();
            let back = decode_coupled(&tokens, frame).unwrap();
            assert_eq!(
                explain_mismatch(&net, &back).unwrap(),
                None,
                "coupled seed {seed}"
            );

            let tokens = encode_decoupled(&net, &policy).unwrap();
            let back = decode_decoupled(&tokens, frame).unwrap();
            assert_eq!(
                explain_mismatch(&net, &back).unwrap(),
                None,
                "decoupled seed {seed}"
            );

            let seq = encode_sar(&net, &policy).unwrap();
            let back = decode_sar(&seq, frame).unwrap();
            assert_eq!(
                explain_mismatch(&net, &back).unwrap(),
                None,
                "row-split seed {seed}"
            );
        }
    }

    #[test]
    fn mismatch_messages_name_the_failing_stage() {
        let a = generate(1, &GenConfig::default());
        let mut b = a.clone();
        b.add_vertex(Vertex::new("extra", 40.0, -30.0)).unwrap();
        let msg = explain_mismatch(&a, &b).unwrap().unwrap();
        assert!(msg.contains("vertex counts differ"), "{msg}");
    }
}
