//! The row-structured format: one fixed-width row per key-point tree.
//!
//! The network is split at its key points (merge, fork, and source
//! vertices); each resulting tree serializes into its own row of
//! [`SAR_ROW_LEN`] tokens as a run of six-token clauses followed by `NA`
//! padding, and the whole sample is always [`SAR_ROWS`] rows, unused
//! rows being all-`NA`. Rows can therefore be predicted in parallel.
//!
//! Clause references live in one global index space: clauses numbered
//! row-major across the payload of every row. Offshoot references must
//! stay inside their own row; clone references may name any row's
//! clause, forward included, which is how the severed edges between
//! trees are stitched back together.
//!
//! The prompt for row `i` is the quantized cell of every key point plus
//! the cell of row `i`'s own root, `2K + 2` coordinate tokens in all.

use crate::codec::coupled::{
    clauses_to_forest, emit_clause, ordered_roots, parse_clause, tree_emission, CLAUSE_LEN,
};
use crate::codec::order::OrderingPolicy;
use crate::codec::vocab::{Token, NA};
use crate::codec::CodecError;
use crate::forest::{from_forest, split_sar, VertexCategory};
use crate::graph::{BevFrame, RoadNetwork};

pub const SAR_ROWS: usize = 34;
pub const SAR_ROW_LEN: usize = 108;
pub const SAR_ROW_CLAUSES: usize = SAR_ROW_LEN / CLAUSE_LEN;

/// A fixed-shape row-structured sample: [`SAR_ROWS`] rows of
/// [`SAR_ROW_LEN`] tokens each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SarSequence {
    rows: Vec<Vec<Token>>,
}

impl SarSequence {
    /// Wraps raw rows, padding with all-`NA` rows up to [`SAR_ROWS`].
    /// Rows must be exactly [`SAR_ROW_LEN`] tokens.
    pub fn from_rows(rows: Vec<Vec<Token>>) -> Result<SarSequence, CodecError> {
        if rows.len() > SAR_ROWS {
            return Err(CodecError::Capacity(format!(
                "{} rows exceed the {SAR_ROWS}-row sample shape",
                rows.len()
            )));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != SAR_ROW_LEN {
                return Err(CodecError::Invalid {
                    pos: r * SAR_ROW_LEN + row.len().min(SAR_ROW_LEN),
                    reason: format!("row {r} has {} tokens, expected {SAR_ROW_LEN}", row.len()),
                });
            }
        }
        let mut rows = rows;
        while rows.len() < SAR_ROWS {
            rows.push(vec![NA; SAR_ROW_LEN]);
        }
        Ok(SarSequence { rows })
    }

    pub fn rows(&self) -> &[Vec<Token>] {
        &self.rows
    }

    /// Rows whose payload holds at least one clause.
    pub fn payload_rows(&self) -> usize {
        self.rows.iter().filter(|r| r[0] != NA).count()
    }

    /// Clause count of one row's payload: clauses up to the first `NA`
    /// on a clause boundary. Shape errors are left to the decoder.
    pub fn row_clauses(&self, r: usize) -> usize {
        (0..SAR_ROW_CLAUSES)
            .take_while(|c| self.rows[r][c * CLAUSE_LEN] != NA)
            .count()
    }

    /// All rows concatenated row-major.
    pub fn flat(&self) -> Vec<Token> {
        self.rows.concat()
    }
}

/// Quantized key-point cells, one per payload row in row order; the
/// conditioning input for row-parallel prediction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPointPrompt {
    cells: Vec<(u16, u16)>,
}

impl KeyPointPrompt {
    /// Reads the root cell of every payload row.
    pub fn from_sequence(seq: &SarSequence) -> Result<KeyPointPrompt, CodecError> {
        let mut cells = Vec::new();
        for (r, row) in seq.rows().iter().enumerate() {
            if row[0] == NA {
                continue;
            }
            let base = r * SAR_ROW_LEN;
            let cx = row[0].as_coord().ok_or(CodecError::Unexpected {
                pos: base,
                expected: "root x cell",
                got: row[0].0,
            })?;
            let cy = row[1].as_coord().ok_or(CodecError::Unexpected {
                pos: base + 1,
                expected: "root y cell",
                got: row[1].0,
            })?;
            cells.push((cx, cy));
        }
        Ok(KeyPointPrompt { cells })
    }

    pub fn key_point_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[(u16, u16)] {
        &self.cells
    }

    /// The `2K + 2` coordinate tokens conditioning row `i`: every key
    /// point's cell, then row `i`'s own root cell again.
    pub fn row_prompt(&self, i: usize) -> Vec<Token> {
        assert!(i < self.cells.len(), "row {i} has no key point");
        let mut out = Vec::with_capacity(2 * self.cells.len() + 2);
        for &(x, y) in &self.cells {
            out.push(Token::coord(x));
            out.push(Token::coord(y));
        }
        out.push(Token::coord(self.cells[i].0));
        out.push(Token::coord(self.cells[i].1));
        out
    }
}

/// Encodes a road network as a row-structured sample.
pub fn encode_sar(net: &RoadNetwork, policy: &OrderingPolicy) -> Result<SarSequence, CodecError> {
    let set = split_sar(net)?;
    let forest = set.forest();
    let mut orderer = policy.orderer(forest.frame());
    let roots = ordered_roots(forest, &mut orderer);
    if roots.len() > SAR_ROWS {
        return Err(CodecError::Capacity(format!(
            "{} key points exceed the {SAR_ROWS}-row sample shape",
            roots.len()
        )));
    }

    let trees: Vec<Vec<(usize, VertexCategory)>> = roots
        .iter()
        .map(|&r| tree_emission(forest, r, &mut orderer))
        .collect();
    for tree in &trees {
        if tree.len() > SAR_ROW_CLAUSES {
            return Err(CodecError::Capacity(format!(
                "key-point tree with {} clauses exceeds the {SAR_ROW_CLAUSES}-clause row",
                tree.len()
            )));
        }
    }

    let mut clause_of = vec![usize::MAX; forest.vertices().len()];
    let mut k = 0usize;
    for tree in &trees {
        for &(v, _) in tree {
            clause_of[v] = k;
            k += 1;
        }
    }

    let mut rows = Vec::with_capacity(trees.len());
    for tree in &trees {
        let mut row = Vec::with_capacity(SAR_ROW_LEN);
        for &(v, cat) in tree {
            emit_clause(forest, v, cat, &clause_of, true, &mut row)?;
        }
        row.resize(SAR_ROW_LEN, NA);
        rows.push(row);
    }
    SarSequence::from_rows(rows)
}

/// Decodes a row-structured sample back into a road network.
pub fn decode_sar(seq: &SarSequence, frame: &BevFrame) -> Result<RoadNetwork, CodecError> {
    let rows = seq.rows();
    let mut payload = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let mut clauses = 0usize;
        for c in 0..SAR_ROW_CLAUSES {
            if row[c * CLAUSE_LEN] != NA {
                clauses = c + 1;
                continue;
            }
            for (i, &t) in row.iter().enumerate().skip(c * CLAUSE_LEN) {
                if t != NA {
                    return Err(CodecError::Invalid {
                        pos: r * SAR_ROW_LEN + i,
                        reason: "payload resumes after padding".into(),
                    });
                }
            }
            break;
        }
        payload.push(clauses);
    }
    let total: usize = payload.iter().sum();

    let flat = seq.flat();
    let mut clauses = Vec::with_capacity(total);
    let mut pos_of = Vec::with_capacity(total);
    let mut k = 0usize;
    for (r, &count) in payload.iter().enumerate() {
        let row_start = k;
        for c in 0..count {
            let base = r * SAR_ROW_LEN + c * CLAUSE_LEN;
            let clause = parse_clause(&flat, base, frame, k, total, true)?;
            if c == 0 && clause.cat != VertexCategory::Ancestor {
                return Err(CodecError::Invalid {
                    pos: base + 2,
                    reason: "row must start with a root clause".into(),
                });
            }
            if c > 0 && clause.cat == VertexCategory::Ancestor {
                return Err(CodecError::Invalid {
                    pos: base + 2,
                    reason: "root clause away from row start".into(),
                });
            }
            if clause.cat == VertexCategory::Offshoot {
                let i = clause.reference.expect("offshoot parsed with reference");
                if i < row_start {
                    return Err(CodecError::Invalid {
                        pos: base + 3,
                        reason: format!("offshoot reference {i} leaves its row"),
                    });
                }
            }
            clauses.push(clause);
            pos_of.push(base);
            k += 1;
        }
    }

    for (k, c) in clauses.iter().enumerate() {
        if c.cat == VertexCategory::Offshoot {
            let target = c.reference.expect("offshoot parsed with reference");
            if clauses[target].cat == VertexCategory::Clone {
                return Err(CodecError::Invalid {
                    pos: pos_of[k] + 3,
                    reason: format!("offshoot reference {target} names a clone"),
                });
            }
        }
    }

    let forest = clauses_to_forest(&clauses, frame, |k| pos_of[k])?;
    Ok(from_forest(&forest)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Vertex};

    fn frame() -> BevFrame {
        BevFrame::default_urban()
    }

    fn merge_net() -> RoadNetwork {
        let mut net = RoadNetwork::new(frame());
        net.add_vertex(Vertex::new("a", -20.0, 0.0)).unwrap();
        net.add_vertex(Vertex::new("b", -10.0, 10.0)).unwrap();
        net.add_vertex(Vertex::new("c", 0.0, 5.0)).unwrap();
        net.add_vertex(Vertex::new("d", 10.0, 5.0)).unwrap();
        net.add_edge(Edge::new("a", "c", -10.0, 2.5));
        net.add_edge(Edge::new("b", "c", -5.0, 7.5));
        net.add_edge(Edge::new("c", "d", 5.0, 5.0));
        net
    }

    type CellEdge = ((u16, u16), (u16, u16), (u16, u16));

    fn cell_edges(net: &RoadNetwork) -> Vec<CellEdge> {
        let f = net.frame();
        let mut edges: Vec<_> = net
            .edges()
            .iter()
            .map(|e| {
                let s = net.vertex(&e.source).unwrap();
                let t = net.vertex(&e.target).unwrap();
                (
                    f.quantize(s.point()).unwrap(),
                    f.quantize(t.point()).unwrap(),
                    f.quantize_ctrl(e.ctrl()).unwrap(),
                )
            })
            .collect();
        edges.sort_unstable();
        edges
    }

    #[test]
    fn merge_rows_match_hand_encoding() {
        let seq = encode_sar(&merge_net(), &OrderingPolicy::FrontRight).unwrap();
        assert_eq!(seq.rows().len(), SAR_ROWS);
        assert_eq!(seq.payload_rows(), 3);

        let head =
            |r: usize, n: usize| -> Vec<u16> { seq.rows()[r][..n].iter().map(|t| t.0).collect() };
        // Row 0: tree of c, the merge vertex nearest the corner. Clones
        // of b then a follow the root; d hangs below as a lineal.
        assert_eq!(
            head(0, 24),
            vec![
                48, 37, 200, 573, 573, 573, // c
                38, 42, 203, 254, 403, 399, // clone of b (global clause 4)
                28, 32, 203, 255, 398, 394, // clone of a (global clause 5)
                58, 37, 201, 573, 413, 397, // d
            ]
        );
        assert_eq!(head(1, 6), vec![38, 42, 200, 573, 573, 573]);
        assert_eq!(head(2, 6), vec![28, 32, 200, 573, 573, 573]);
        assert!(seq.rows()[0][24..].iter().all(|&t| t == NA));
        assert!(seq.rows()[3].iter().all(|&t| t == NA));
        assert_eq!(seq.row_clauses(0), 4);
        assert_eq!(seq.row_clauses(1), 1);

        let back = decode_sar(&seq, &frame()).unwrap();
        assert_eq!(cell_edges(&back), cell_edges(&merge_net()));
    }

    #[test]
    fn chain_fits_one_row() {
        let mut net = RoadNetwork::new(frame());
        net.add_vertex(Vertex::new("a", -40.0, 0.0)).unwrap();
        net.add_vertex(Vertex::new("b", -20.0, 0.0)).unwrap();
        net.add_vertex(Vertex::new("c", 0.0, 0.0)).unwrap();
        net.add_edge(Edge::new("a", "b", -30.0, 0.0));
        net.add_edge(Edge::new("b", "c", -10.0, 0.0));
        let seq = encode_sar(&net, &OrderingPolicy::FrontRight).unwrap();
        assert_eq!(seq.payload_rows(), 1);
        assert_eq!(seq.row_clauses(0), 3);
        let back = decode_sar(&seq, &frame()).unwrap();
        assert_eq!(cell_edges(&back), cell_edges(&net));
    }

    #[test]
    fn empty_network_is_all_padding() {
        let net = RoadNetwork::new(frame());
        let seq = encode_sar(&net, &OrderingPolicy::FrontRight).unwrap();
        assert_eq!(seq.payload_rows(), 0);
        let back = decode_sar(&seq, &frame()).unwrap();
        assert!(back.vertices().is_empty());
    }

    #[test]
    fn prompt_lists_every_key_point_and_row_root() {
        let seq = encode_sar(&merge_net(), &OrderingPolicy::FrontRight).unwrap();
        let prompt = KeyPointPrompt::from_sequence(&seq).unwrap();
        assert_eq!(prompt.key_point_count(), 3);
        assert_eq!(prompt.cells(), &[(48, 37), (38, 42), (28, 32)]);
        let row1 = prompt.row_prompt(1);
        assert_eq!(row1.len(), 2 * 3 + 2);
        let ids: Vec<u16> = row1.iter().map(|t| t.0).collect();
        assert_eq!(ids, vec![48, 37, 38, 42, 28, 32, 38, 42]);
    }

    #[test]
    fn deep_tree_overflows_row_capacity() {
        let mut net = RoadNetwork::new(frame());
        for i in 0..(SAR_ROW_CLAUSES + 1) {
            net.add_vertex(Vertex::new(format!("v{i}"), -45.0 + 2.0 * i as f64, 0.0))
                .unwrap();
        }
        for i in 0..SAR_ROW_CLAUSES {
            net.add_edge(Edge::new(
                format!("v{i}"),
                format!("v{}", i + 1),
                -44.0 + 2.0 * i as f64,
                0.0,
            ));
        }
        assert!(matches!(
            encode_sar(&net, &OrderingPolicy::FrontRight),
            Err(CodecError::Capacity(_))
        ));
    }

    #[test]
    fn too_many_key_points_overflow_row_count() {
        let mut net = RoadNetwork::new(frame());
        for i in 0..(SAR_ROWS + 1) {
            let x = -47.0 + (i % 10) as f64 * 9.0;
            let y = -30.0 + (i / 10) as f64 * 15.0;
            net.add_vertex(Vertex::new(format!("v{i}"), x, y)).unwrap();
        }
        assert!(matches!(
            encode_sar(&net, &OrderingPolicy::FrontRight),
            Err(CodecError::Capacity(_))
        ));
    }

    #[test]
    fn malformed_rows_are_rejected_with_positions() {
        let good = encode_sar(&merge_net(), &OrderingPolicy::FrontRight).unwrap();

        // Row 1's root demoted to lineal.
        let mut rows = good.rows().to_vec();
        rows[1][2] = Token(201);
        rows[1][4] = Token(400);
        rows[1][5] = Token(400);
        let err = decode_sar(&SarSequence::from_rows(rows).unwrap(), &frame()).unwrap_err();
        assert_eq!(err.position(), Some(SAR_ROW_LEN + 2), "{err}");

        // A second root in the middle of row 0.
        let mut rows = good.rows().to_vec();
        rows[0][20] = Token(200);
        rows[0][21] = NA;
        rows[0][22] = NA;
        rows[0][23] = NA;
        let err = decode_sar(&SarSequence::from_rows(rows).unwrap(), &frame()).unwrap_err();
        assert_eq!(err.position(), Some(20), "{err}");

        // Payload resuming after padding inside row 1.
        let mut rows = good.rows().to_vec();
        rows[1][12] = Token(10);
        let err = decode_sar(&SarSequence::from_rows(rows).unwrap(), &frame()).unwrap_err();
        assert_eq!(err.position(), Some(SAR_ROW_LEN + 12), "{err}");

        // Offshoot reference escaping its row: a second clause in row 1
        // naming row 0's root as parent.
        let mut rows = good.rows().to_vec();
        for (off, tok) in [38, 43, 202, 250, 400, 400].into_iter().enumerate() {
            rows[1][6 + off] = Token(tok);
        }
        let err = decode_sar(&SarSequence::from_rows(rows).unwrap(), &frame()).unwrap_err();
        assert_eq!(err.position(), Some(SAR_ROW_LEN + 9), "{err}");

        // Offshoot naming a clone as parent.
        let mut rows = good.rows().to_vec();
        rows[0][20] = Token(202);
        rows[0][21] = Token(250 + 1);
        let err = decode_sar(&SarSequence::from_rows(rows).unwrap(), &frame()).unwrap_err();
        assert_eq!(err.position(), Some(21), "{err}");

        // Offshoot naming a clause that is not earlier.
        let mut rows = good.rows().to_vec();
        rows[0][20] = Token(202);
        rows[0][21] = Token(250 + 5);
        let err = decode_sar(&SarSequence::from_rows(rows).unwrap(), &frame()).unwrap_err();
        assert_eq!(err.position(), Some(21), "{err}");

        // Wrong row length.
        let rows = vec![vec![NA; SAR_ROW_LEN - 1]];
        assert!(SarSequence::from_rows(rows).is_err());
    }
}
