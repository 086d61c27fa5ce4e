//! Coarse standard-definition map graphs and their prompt encoding.
//!
//! An [`SdMap`] is a plain directed graph of map nodes and curveless
//! links. Unlike road networks it may contain cycles, so serialization
//! first rewrites it as a forest: a depth-first traversal keeps each
//! link to an unvisited node as a tree edge, and each link to an
//! already-visited node `v` leaves a duplicate leaf copying `v` under
//! the link's source. A duplicate therefore recovers the link
//! `parent -> original` (for road-network clones the recovered edge runs
//! the other way, original to parent, because those mark deleted
//! in-edges rather than out-links).
//!
//! The token form is a four-token clause `[v_x, v_y, v_c, v_d]` per
//! forest vertex, with the same traversal, categories, and attachment
//! rules as the coupled format, minus the curve slots. Its main use is
//! as a conditioning prompt spliced ahead of a road-network sequence via
//! [`prompt_concat`], framed as `Start .. clauses .. EOS`.

use std::collections::{HashMap, HashSet};

use crate::codec::coupled::{emit_clause, ordered_roots, parse_clause, tree_emission};
use crate::codec::order::OrderingPolicy;
use crate::codec::vocab::{Token, TokenKind, EOS, NA, START};
use crate::codec::CodecError;
use crate::forest::{DirectedForest, VertexCategory};
use crate::graph::{BevFrame, GraphError, Point, Vertex, VertexId};

pub const SD_CLAUSE_LEN: usize = 4;

/// A standard-definition map: nodes and directed links, cycles allowed.
#[derive(Debug, Clone)]
pub struct SdMap {
    frame: BevFrame,
    nodes: Vec<Vertex>,
    links: Vec<(VertexId, VertexId)>,
    by_id: HashMap<VertexId, usize>,
}

impl SdMap {
    pub fn new(frame: BevFrame) -> Self {
        SdMap {
            frame,
            nodes: Vec::new(),
            links: Vec::new(),
            by_id: HashMap::new(),
        }
    }

    pub fn frame(&self) -> &BevFrame {
        &self.frame
    }

    pub fn nodes(&self) -> &[Vertex] {
        &self.nodes
    }

    pub fn links(&self) -> &[(VertexId, VertexId)] {
        &self.links
    }

    pub fn node_index(&self, id: &VertexId) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn add_node(&mut self, node: Vertex) -> Result<usize, GraphError> {
        if self.by_id.contains_key(&node.id) {
            return Err(GraphError::DuplicateVertex(node.id.clone()));
        }
        let idx = self.nodes.len();
        self.by_id.insert(node.id.clone(), idx);
        self.nodes.push(node);
        Ok(idx)
    }

    pub fn add_link(&mut self, source: VertexId, target: VertexId) -> Result<usize, GraphError> {
        if !self.by_id.contains_key(&source) {
            return Err(GraphError::UnknownVertex(source));
        }
        if !self.by_id.contains_key(&target) {
            return Err(GraphError::UnknownVertex(target));
        }
        if source == target {
            return Err(GraphError::SelfLink(source));
        }
        if self.links.iter().any(|(s, t)| *s == source && *t == target) {
            return Err(GraphError::DuplicateLink(source, target));
        }
        self.links.push((source, target));
        Ok(self.links.len() - 1)
    }

    /// Outgoing link targets per node index, in insertion order.
    pub fn out_links(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (s, t) in &self.links {
            out[self.by_id[s]].push(self.by_id[t]);
        }
        out
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut ind = vec![0usize; self.nodes.len()];
        for (_, t) in &self.links {
            ind[self.by_id[t]] += 1;
        }
        ind
    }
}

/// Rewrites a possibly-cyclic map as a forest plus a list of
/// `(duplicate, original)` forest-index pairs, one per link whose target
/// was already visited.
///
/// Traversal starts from each in-degree-zero node in policy order, then
/// repeatedly from the first remaining unvisited node in policy order
/// until none remain; link expansion at each node is policy ordered.
pub fn cyclic_to_dag(
    map: &SdMap,
    policy: &OrderingPolicy,
) -> (DirectedForest, Vec<(usize, usize)>) {
    let mut orderer = policy.orderer(map.frame());
    let node_key = |&i: &usize| {
        let n = &map.nodes[i];
        (n.point(), n.id.0.clone())
    };

    let mut forest = DirectedForest::new(*map.frame());
    for n in &map.nodes {
        forest.add_root(n.id.clone(), n.x, n.y);
    }
    let mut taken: HashSet<String> = map.nodes.iter().map(|n| n.id.0.clone()).collect();

    let out_links = map.out_links();
    let mut visited = vec![false; map.nodes.len()];
    let mut duplicates = Vec::new();

    let mut dfs = |start: usize,
                   forest: &mut DirectedForest,
                   visited: &mut Vec<bool>,
                   orderer: &mut crate::codec::order::Orderer,
                   duplicates: &mut Vec<(usize, usize)>| {
        visited[start] = true;
        let entered = |u: usize, orderer: &mut crate::codec::order::Orderer| {
            let mut targets = out_links[u].clone();
            orderer.order(&mut targets, node_key);
            (u, targets, 0usize)
        };
        let mut stack = vec![entered(start, orderer)];
        while let Some(top) = stack.last_mut() {
            if top.2 >= top.1.len() {
                stack.pop();
                continue;
            }
            let u = top.0;
            let v = top.1[top.2];
            top.2 += 1;
            if visited[v] {
                let node = &map.nodes[v];
                let mut n = 1usize;
                let id = loop {
                    let candidate = format!("{}#d{n}", node.id);
                    if taken.insert(candidate.clone()) {
                        break VertexId(candidate);
                    }
                    n += 1;
                };
                let mid = Point::new(
                    (map.nodes[u].x + node.x) / 2.0,
                    (map.nodes[u].y + node.y) / 2.0,
                );
                let dup = forest.add_clone(u, id, node.x, node.y, mid, v);
                duplicates.push((dup, v));
            } else {
                visited[v] = true;
                let mid = Point::new(
                    (map.nodes[u].x + map.nodes[v].x) / 2.0,
                    (map.nodes[u].y + map.nodes[v].y) / 2.0,
                );
                forest.claim_child(u, v, mid);
                let frame = entered(v, orderer);
                stack.push(frame);
            }
        }
    };

    let ind = map.in_degrees();
    let mut starts: Vec<usize> = (0..map.nodes.len()).filter(|&i| ind[i] == 0).collect();
    orderer.order(&mut starts, node_key);
    for s in starts {
        dfs(s, &mut forest, &mut visited, &mut orderer, &mut duplicates);
    }
    loop {
        let mut rest: Vec<usize> = (0..map.nodes.len()).filter(|&i| !visited[i]).collect();
        if rest.is_empty() {
            break;
        }
        orderer.order(&mut rest, node_key);
        dfs(
            rest[0],
            &mut forest,
            &mut visited,
            &mut orderer,
            &mut duplicates,
        );
    }

    (forest, duplicates)
}

/// Encodes a map as a four-token clause stream.
pub fn encode_sdmap(map: &SdMap, policy: &OrderingPolicy) -> Result<Vec<Token>, CodecError> {
    let (forest, _) = cyclic_to_dag(map, policy);
    let mut orderer = policy.orderer(forest.frame());
    let mut order: Vec<(usize, VertexCategory)> = Vec::with_capacity(forest.vertices().len());
    for root in ordered_roots(&forest, &mut orderer) {
        order.extend(tree_emission(&forest, root, &mut orderer));
    }
    let mut clause_of = vec![usize::MAX; forest.vertices().len()];
    for (k, &(v, _)) in order.iter().enumerate() {
        clause_of[v] = k;
    }
    let mut out = Vec::with_capacity(order.len() * SD_CLAUSE_LEN);
    for &(v, cat) in &order {
        emit_clause(&forest, v, cat, &clause_of, false, &mut out)?;
    }
    Ok(out)
}

/// Decodes a four-token clause stream back into a map.
///
/// Cycles are legal here, so unlike the road-network decoders no
/// acyclicity is enforced; self links and duplicate links are still
/// rejected, with positions.
pub fn decode_sdmap(tokens: &[Token], frame: &BevFrame) -> Result<SdMap, CodecError> {
    if !tokens.len().is_multiple_of(SD_CLAUSE_LEN) {
        return Err(CodecError::Truncated {
            pos: tokens.len(),
            expected: "a complete four-token clause",
        });
    }
    let n = tokens.len() / SD_CLAUSE_LEN;
    let mut clauses = Vec::with_capacity(n);
    for k in 0..n {
        clauses.push(parse_clause(tokens, k * SD_CLAUSE_LEN, frame, k, n, false)?);
    }
    for (k, c) in clauses.iter().enumerate() {
        if c.cat == VertexCategory::Clone || c.cat == VertexCategory::Offshoot {
            let target = c.reference.expect("parsed with reference");
            if clauses[target].cat == VertexCategory::Clone {
                return Err(CodecError::Invalid {
                    pos: k * SD_CLAUSE_LEN + 3,
                    reason: format!("reference {target} names another duplicate"),
                });
            }
        }
    }

    let mut map = SdMap::new(*frame);
    let mut last_real: Option<usize> = None;
    let mut links: Vec<(usize, usize)> = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for (k, c) in clauses.iter().enumerate() {
        let pos = k * SD_CLAUSE_LEN;
        match c.cat {
            VertexCategory::Ancestor => {
                last_real = Some(k);
            }
            VertexCategory::Lineal | VertexCategory::Offshoot => {
                let parent = match c.cat {
                    VertexCategory::Lineal => last_real.ok_or_else(|| CodecError::Invalid {
                        pos: pos + 2,
                        reason: "no preceding node clause to attach to".into(),
                    })?,
                    _ => c.reference.expect("offshoot parsed with reference"),
                };
                seen.insert((parent, k));
                links.push((parent, k));
                last_real = Some(k);
            }
            VertexCategory::Clone => {
                let parent = last_real.ok_or_else(|| CodecError::Invalid {
                    pos: pos + 2,
                    reason: "duplicate with no preceding node clause".into(),
                })?;
                let original = c.reference.expect("clone parsed with reference");
                if original == parent {
                    return Err(CodecError::Invalid {
                        pos: pos + 3,
                        reason: "duplicate recovers a self link".into(),
                    });
                }
                if !seen.insert((parent, original)) {
                    return Err(CodecError::Invalid {
                        pos: pos + 3,
                        reason: "duplicate recovers a repeated link".into(),
                    });
                }
                links.push((parent, original));
            }
        }
    }

    let mut node_of = vec![usize::MAX; n];
    for (k, c) in clauses.iter().enumerate() {
        if c.cat != VertexCategory::Clone {
            let p = frame.dequantize(c.ix, c.iy);
            node_of[k] = map.add_node(Vertex::new(format!("n{k}"), p.x, p.y))?;
        }
    }
    for (s, t) in links {
        let src = map.nodes[node_of[s]].id.clone();
        let dst = map.nodes[node_of[t]].id.clone();
        map.add_link(src, dst)?;
    }
    Ok(map)
}

/// Splices an encoded map prompt ahead of a main sequence:
/// `[Start, prompt clauses, EOS, main]`.
pub fn prompt_concat(prompt: &[Token], main: &[Token]) -> Vec<Token> {
    let mut out = Vec::with_capacity(prompt.len() + main.len() + 2);
    out.push(START);
    out.extend_from_slice(prompt);
    out.push(EOS);
    out.extend_from_slice(main);
    out
}

/// Splits a combined stream back into the map prompt clauses and the
/// main sequence. Clause slots are shape checked while scanning for the
/// `EOS` fence.
pub fn split_prompt(tokens: &[Token]) -> Result<(&[Token], &[Token]), CodecError> {
    match tokens.first() {
        None => {
            return Err(CodecError::Truncated {
                pos: 0,
                expected: "start token",
            })
        }
        Some(&t) if t != START => {
            return Err(CodecError::Unexpected {
                pos: 0,
                expected: "start token",
                got: t.0,
            })
        }
        _ => {}
    }
    let mut pos = 1usize;
    loop {
        match tokens.get(pos) {
            None => {
                return Err(CodecError::Truncated {
                    pos,
                    expected: "prompt clause or end-of-sequence",
                })
            }
            Some(&t) if t == EOS => return Ok((&tokens[1..pos], &tokens[pos + 1..])),
            Some(_) => {
                let clause = tokens
                    .get(pos..pos + SD_CLAUSE_LEN)
                    .ok_or(CodecError::Truncated {
                        pos: tokens.len(),
                        expected: "a complete four-token prompt clause",
                    })?;
                for (off, (t, want)) in clause
                    .iter()
                    .zip(["node x cell", "node y cell", "category token", "index slot"])
                    .enumerate()
                {
                    let ok = match off {
                        0 | 1 => t.kind() == TokenKind::Coord,
                        2 => t.kind() == TokenKind::Category,
                        _ => t.kind() == TokenKind::Index || *t == NA,
                    };
                    if !ok {
                        return Err(CodecError::Unexpected {
                            pos: pos + off,
                            expected: want,
                            got: t.0,
                        });
                    }
                }
                pos += SD_CLAUSE_LEN;
            }
        }
    }
}
