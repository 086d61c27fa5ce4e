//! The decoupled format: vertex list first, adjacency groups second.
//!
//! `[Start, (v_x, v_y)*, EOV, group_0 .. group_{V-1}, EOE]` where group
//! `i` holds one triple `[target index, e_mx, e_my]` per outgoing edge
//! of vertex `i` and ends with `Split`; vertices with no outgoing edges
//! contribute a bare `Split`. Vertices appear in the same depth-first
//! order the coupled format uses, minus the clones, and targets are
//! referenced by position in that list, so no clones are needed at all.
//! Tokens after `EOE` must be `NA` padding.

use std::collections::HashSet;

use crate::codec::coupled::{ordered_roots, parse_coord, tree_emission};
use crate::codec::order::OrderingPolicy;
use crate::codec::vocab::{Token, EOE, EOV, NA, SPLIT, START};
use crate::codec::CodecError;
use crate::forest::{to_forest, ForestError};
use crate::graph::{BevFrame, Edge, RoadNetwork, Vertex};

/// The depth-first vertex order shared with the coupled format: network
/// vertex indices, clones skipped.
pub fn vertex_order(net: &RoadNetwork, policy: &OrderingPolicy) -> Result<Vec<usize>, CodecError> {
    let forest = to_forest(net, policy)?;
    let mut orderer = policy.orderer(net.frame());
    let mut order = Vec::with_capacity(net.vertices().len());
    for root in ordered_roots(&forest, &mut orderer) {
        order.extend(
            tree_emission(&forest, root, &mut orderer)
                .into_iter()
                .filter(|&(v, _)| !forest.vertices()[v].is_clone())
                .map(|(v, _)| v),
        );
    }
    Ok(order)
}

/// Encodes a road network as a decoupled stream.
pub fn encode_decoupled(
    net: &RoadNetwork,
    policy: &OrderingPolicy,
) -> Result<Vec<Token>, CodecError> {
    let order = vertex_order(net, policy)?;
    let frame = net.frame();
    let mut listed = vec![usize::MAX; net.vertices().len()];
    for (i, &v) in order.iter().enumerate() {
        listed[v] = i;
    }

    let mut out = vec![START];
    for &v in &order {
        let (ix, iy) = frame.quantize(net.vertices()[v].point())?;
        out.push(Token::coord(ix));
        out.push(Token::coord(iy));
    }
    out.push(EOV);

    let out_edges = net.out_edges();
    let mut orderer = policy.orderer(frame);
    for &v in &order {
        let mut targets: Vec<usize> = out_edges[v].clone();
        orderer.order(&mut targets, |&e| {
            let t = net.vertex(&net.edges()[e].target).expect("validated");
            (t.point(), t.id.0.clone())
        });
        for e in targets {
            let edge = &net.edges()[e];
            let t = net.vertex_index(&edge.target).expect("validated");
            out.push(Token::index(listed[t]).ok_or_else(|| {
                CodecError::Capacity(format!(
                    "vertex reference {} exceeds the 100 index slots",
                    listed[t]
                ))
            })?);
            let (bx, by) = frame.quantize_ctrl(edge.ctrl())?;
            out.push(Token::curve(bx));
            out.push(Token::curve(by));
        }
        out.push(SPLIT);
    }
    out.push(EOE);
    Ok(out)
}

fn unexpected(pos: usize, expected: &'static str, got: Token) -> CodecError {
    CodecError::Unexpected {
        pos,
        expected,
        got: got.0,
    }
}

/// Decodes a decoupled stream back into a road network.
pub fn decode_decoupled(tokens: &[Token], frame: &BevFrame) -> Result<RoadNetwork, CodecError> {
    let (ex, ey) = frame.grid_extent();
    let mut pos = 0usize;
    let at = |pos: usize| -> Option<Token> { tokens.get(pos).copied() };

    match at(pos) {
        None => {
            return Err(CodecError::Truncated {
                pos,
                expected: "start token",
            })
        }
        Some(t) if t != START => return Err(unexpected(pos, "start token", t)),
        _ => pos += 1,
    }

    let mut net = RoadNetwork::new(*frame);
    let mut count = 0usize;
    loop {
        match at(pos) {
            None => {
                return Err(CodecError::Truncated {
                    pos,
                    expected: "vertex cell or end-of-vertices",
                })
            }
            Some(t) if t == EOV => {
                pos += 1;
                break;
            }
            Some(_) => {
                let ix = parse_coord(tokens, pos, ex, "vertex x cell")?;
                let iy = match at(pos + 1) {
                    None => {
                        return Err(CodecError::Truncated {
                            pos: pos + 1,
                            expected: "vertex y cell",
                        })
                    }
                    Some(t) if t == EOV => return Err(unexpected(pos + 1, "vertex y cell", t)),
                    Some(_) => parse_coord(tokens, pos + 1, ey, "vertex y cell")?,
                };
                let p = frame.dequantize(ix, iy);
                net.add_vertex(Vertex::new(format!("v{count}"), p.x, p.y))?;
                count += 1;
                pos += 2;
            }
        }
    }

    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    for src in 0..count {
        loop {
            let t = at(pos).ok_or(CodecError::Truncated {
                pos,
                expected: "edge triple or group split",
            })?;
            if t == SPLIT {
                pos += 1;
                break;
            }
            let target = t
                .as_index()
                .ok_or_else(|| unexpected(pos, "target vertex index or group split", t))?;
            if target >= count {
                return Err(CodecError::Invalid {
                    pos,
                    reason: format!("target index {target} beyond the {count} listed vertices"),
                });
            }
            if target == src {
                return Err(CodecError::Invalid {
                    pos,
                    reason: "edge target equals its source".into(),
                });
            }
            if !edges.insert((src, target)) {
                return Err(CodecError::Invalid {
                    pos,
                    reason: format!("duplicate edge to vertex {target}"),
                });
            }
            let bx = match at(pos + 1) {
                None => {
                    return Err(CodecError::Truncated {
                        pos: pos + 1,
                        expected: "curve x bin",
                    })
                }
                Some(t) => t
                    .as_curve_bin()
                    .ok_or_else(|| unexpected(pos + 1, "curve x bin", t))?,
            };
            let by = match at(pos + 2) {
                None => {
                    return Err(CodecError::Truncated {
                        pos: pos + 2,
                        expected: "curve y bin",
                    })
                }
                Some(t) => t
                    .as_curve_bin()
                    .ok_or_else(|| unexpected(pos + 2, "curve y bin", t))?,
            };
            let ctrl = frame.dequantize_ctrl(bx, by);
            net.add_edge(Edge {
                source: format!("v{src}").into(),
                target: format!("v{target}").into(),
                ctrl_x: ctrl.x,
                ctrl_y: ctrl.y,
            });
            pos += 3;
        }
    }

    match at(pos) {
        None => {
            return Err(CodecError::Truncated {
                pos,
                expected: "end-of-edges token",
            })
        }
        Some(t) if t != EOE => return Err(unexpected(pos, "end-of-edges token", t)),
        _ => pos += 1,
    }
    while let Some(t) = at(pos) {
        if t != NA {
            return Err(unexpected(pos, "padding after end-of-edges", t));
        }
        pos += 1;
    }

    if net.find_cycle().is_some() {
        return Err(ForestError::CyclicRecovery.into());
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::coupled::{decode_coupled, encode_coupled};

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
    fn merge_matches_hand_encoding() {
        let tokens = encode_decoupled(&merge_net(), &OrderingPolicy::FrontRight).unwrap();
        let ids: Vec<u16> = tokens.iter().map(|t| t.0).collect();
        assert_eq!(
            ids,
            vec![
                572, // start
                38, 42, 48, 37, 58, 37, 28, 32,  // b, c, d, a
                574, // end of vertices
                251, 403, 399, 575, // b -> c
                252, 413, 397, 575, // c -> d
                575, // d: no edges
                251, 398, 394, 575, // a -> c
                576, // end of edges
            ]
        );
        let back = decode_decoupled(&tokens, &frame()).unwrap();
        assert_eq!(cell_edges(&back), cell_edges(&merge_net()));
    }

    #[test]
    fn empty_network_is_three_tokens() {
        let net = RoadNetwork::new(frame());
        let tokens = encode_decoupled(&net, &OrderingPolicy::FrontRight).unwrap();
        assert_eq!(tokens, vec![START, EOV, EOE]);
        let back = decode_decoupled(&tokens, &frame()).unwrap();
        assert!(back.vertices().is_empty() && back.edges().is_empty());
    }

    #[test]
    fn token_length_is_linear_in_counts() {
        let net = merge_net();
        let tokens = encode_decoupled(&net, &OrderingPolicy::FrontRight).unwrap();
        let (v, e) = (net.vertices().len(), net.edges().len());
        assert_eq!(tokens.len(), 3 + 3 * v + 3 * e);
    }

    #[test]
    fn both_formats_decode_to_the_same_network() {
        let net = merge_net();
        for policy in [
            OrderingPolicy::FrontRight,
            OrderingPolicy::Random { seed: 11 },
        ] {
            let via_coupled =
                decode_coupled(&encode_coupled(&net, &policy).unwrap(), &frame()).unwrap();
            let via_decoupled =
                decode_decoupled(&encode_decoupled(&net, &policy).unwrap(), &frame()).unwrap();
            assert_eq!(cell_edges(&via_coupled), cell_edges(&via_decoupled));
        }
    }

    #[test]
    fn trailing_padding_must_be_na() {
        let mut tokens = encode_decoupled(&merge_net(), &OrderingPolicy::FrontRight).unwrap();
        let end = tokens.len();
        tokens.push(NA);
        tokens.push(NA);
        assert!(decode_decoupled(&tokens, &frame()).is_ok());
        tokens.push(Token(0));
        let err = decode_decoupled(&tokens, &frame()).unwrap_err();
        assert_eq!(err.position(), Some(end + 2), "{err}");
    }

    fn expect_err_at(tokens: &[Token], pos: usize) {
        let err = decode_decoupled(tokens, &frame()).unwrap_err();
        assert_eq!(err.position(), Some(pos), "{err}");
    }

    #[test]
    fn malformed_streams_are_rejected_with_positions() {
        let good = encode_decoupled(&merge_net(), &OrderingPolicy::FrontRight).unwrap();

        expect_err_at(&[], 0);
        expect_err_at(&[EOV], 0);

        // Vertex list with an odd cell count: caught at the EOV.
        let mut t = good.clone();
        t.remove(2);
        expect_err_at(&t, 8);

        // Target index beyond the vertex list.
        let mut t = good.clone();
        t[10] = Token(250 + 7);
        expect_err_at(&t, 10);

        // Self edge: group 0 pointing at vertex 0.
        let mut t = good.clone();
        t[10] = Token(250);
        expect_err_at(&t, 10);

        // Duplicate edge: c's group repeating the c -> d triple.
        let mut t = good.clone();
        t.insert(17, Token(397));
        t.insert(17, Token(413));
        t.insert(17, Token(252));
        expect_err_at(&t, 17);

        // Truncation inside a triple.
        let t = &good[..12];
        expect_err_at(t, 12);

        // Missing end-of-edges.
        let t = &good[..good.len() - 1];
        expect_err_at(t, good.len() - 1);
    }

    #[test]
    fn cyclic_streams_are_rejected() {
        // Two vertices with edges both ways.
        let t = vec![
            START,
            Token(10),
            Token(10),
            Token(20),
            Token(20),
            EOV,
            Token(251),
            Token(400),
            Token(400),
            SPLIT,
            Token(250),
            Token(401),
            Token(401),
            SPLIT,
            EOE,
        ];
        assert!(matches!(
            decode_decoupled(&t, &frame()),
            Err(CodecError::Forest(ForestError::CyclicRecovery))
        ));
    }
}
