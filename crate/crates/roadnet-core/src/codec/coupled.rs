//! The coupled format: one six-token clause per forest vertex.
//!
//! A clause is `[v_x, v_y, v_c, v_d, e_px, e_py]`: the vertex's
//! quantized cell, its category, an index slot, and the curve bins of
//! its incoming edge. The slots depend on the category:
//!
//! * `Ancestor`: roots; index and curve slots are all empty.
//! * `Lineal`: attaches to the nearest preceding non-clone clause, so
//!   the index slot stays empty.
//! * `Offshoot`: attaches to an explicit earlier clause named in the
//!   index slot.
//! * `Clone`: a merge marker leaf. It attaches like a `Lineal` and its
//!   index slot names the clause of the duplicated vertex, which may
//!   come later in the stream; the curve slots carry the payload of the
//!   deleted edge running from that vertex into the clone's parent.
//!
//! Traversal is depth first: each vertex's clause is followed first by
//! its clone leaves, then by its first remaining child as a `Lineal`,
//! recursively, then by later children as `Offshoot`s. Decoding is two
//! passes so clone references may point forward.

use std::collections::HashSet;

use crate::codec::order::{Orderer, OrderingPolicy};
use crate::codec::vocab::{Token, TokenKind, NA};
use crate::codec::CodecError;
use crate::forest::{from_forest, to_forest, DirectedForest, VertexCategory};
use crate::graph::{BevFrame, RoadNetwork};

pub const CLAUSE_LEN: usize = 6;

/// Pre-order emission of one tree: the root, then after each vertex its
/// clone leaves, then its remaining children depth first. Returns each
/// vertex paired with the category its clause will carry.
pub(crate) fn tree_emission(
    forest: &DirectedForest,
    root: usize,
    orderer: &mut Orderer,
) -> Vec<(usize, VertexCategory)> {
    let mut out = Vec::new();
    let mut stack = vec![(root, VertexCategory::Ancestor)];
    while let Some((v, cat)) = stack.pop() {
        out.push((v, cat));
        let key = |&i: &usize| {
            let w = &forest.vertices()[i];
            (w.point(), w.id.0.clone())
        };
        let mut clones: Vec<usize> = forest
            .children(v)
            .iter()
            .copied()
            .filter(|&c| forest.vertices()[c].is_clone())
            .collect();
        orderer.order(&mut clones, key);
        out.extend(clones.into_iter().map(|c| (c, VertexCategory::Clone)));
        let mut real: Vec<usize> = forest
            .children(v)
            .iter()
            .copied()
            .filter(|&c| !forest.vertices()[c].is_clone())
            .collect();
        orderer.order(&mut real, key);
        for (rank, c) in real.into_iter().enumerate().rev() {
            let cat = if rank == 0 {
                VertexCategory::Lineal
            } else {
                VertexCategory::Offshoot
            };
            stack.push((c, cat));
        }
    }
    out
}

/// Roots of `forest` in policy order.
pub(crate) fn ordered_roots(forest: &DirectedForest, orderer: &mut Orderer) -> Vec<usize> {
    let mut roots = forest.roots().to_vec();
    orderer.order(&mut roots, |&r| {
        let v = &forest.vertices()[r];
        (v.point(), v.id.0.clone())
    });
    roots
}

/// Appends the clause of `v` to `out`. `clause_of` maps forest vertex
/// indices to their clause position in whichever index space the format
/// resolves references against; `with_curve` selects the six-token
/// layout over the four-token curveless one.
pub(crate) fn emit_clause(
    forest: &DirectedForest,
    v: usize,
    cat: VertexCategory,
    clause_of: &[usize],
    with_curve: bool,
    out: &mut Vec<Token>,
) -> Result<(), CodecError> {
    let frame = forest.frame();
    let vert = &forest.vertices()[v];
    let (ix, iy) = frame.quantize(vert.point())?;
    out.push(Token::coord(ix));
    out.push(Token::coord(iy));
    out.push(Token::category(cat));
    let reference = match cat {
        VertexCategory::Ancestor | VertexCategory::Lineal => None,
        VertexCategory::Offshoot => Some(clause_of[vert.parent.expect("offshoot has parent")]),
        VertexCategory::Clone => Some(clause_of[vert.clone_of.expect("clone has original")]),
    };
    match reference {
        None => out.push(NA),
        Some(i) => out.push(Token::index(i).ok_or_else(|| {
            CodecError::Capacity(format!("clause reference {i} exceeds the 100 index slots"))
        })?),
    }
    if !with_curve {
        return Ok(());
    }
    if cat == VertexCategory::Ancestor {
        out.push(NA);
        out.push(NA);
    } else {
        let ctrl = vert.incoming_ctrl.expect("non-root clause carries a curve");
        let (bx, by) = frame.quantize_ctrl(ctrl)?;
        out.push(Token::curve(bx));
        out.push(Token::curve(by));
    }
    Ok(())
}

/// Serializes a forest as one flat clause stream.
pub fn encode_forest(
    forest: &DirectedForest,
    policy: &OrderingPolicy,
) -> Result<Vec<Token>, CodecError> {
    let mut orderer = policy.orderer(forest.frame());
    let mut order: Vec<(usize, VertexCategory)> = Vec::with_capacity(forest.vertices().len());
    for root in ordered_roots(forest, &mut orderer) {
        order.extend(tree_emission(forest, root, &mut orderer));
    }
    let mut clause_of = vec![usize::MAX; forest.vertices().len()];
    for (k, &(v, _)) in order.iter().enumerate() {
        clause_of[v] = k;
    }
    let mut out = Vec::with_capacity(order.len() * CLAUSE_LEN);
    for &(v, cat) in &order {
        emit_clause(forest, v, cat, &clause_of, true, &mut out)?;
    }
    Ok(out)
}

/// Encodes a road network as a coupled clause stream.
pub fn encode_coupled(
    net: &RoadNetwork,
    policy: &OrderingPolicy,
) -> Result<Vec<Token>, CodecError> {
    let forest = to_forest(net, policy)?;
    encode_forest(&forest, policy)
}

#[derive(Clone, Copy)]
pub(crate) struct RawClause {
    pub ix: u16,
    pub iy: u16,
    pub cat: VertexCategory,
    pub reference: Option<usize>,
    pub ctrl: Option<(u16, u16)>,
}

fn unexpected(pos: usize, expected: &'static str, got: Token) -> CodecError {
    CodecError::Unexpected {
        pos,
        expected,
        got: got.0,
    }
}

/// Parses the coordinate slot at `pos`, checking the cell against the
/// frame's grid extent along the given axis.
pub(crate) fn parse_coord(
    tokens: &[Token],
    pos: usize,
    extent: u32,
    axis: &'static str,
) -> Result<u16, CodecError> {
    let t = tokens[pos];
    let cell = t.as_coord().ok_or_else(|| unexpected(pos, axis, t))?;
    if u32::from(cell) >= extent {
        return Err(CodecError::Invalid {
            pos,
            reason: format!("coordinate cell {cell} outside the {extent}-cell frame"),
        });
    }
    Ok(cell)
}

/// Parses one clause starting at `base`: six tokens with curve slots,
/// four without.
///
/// Reference slots are range checked and, for offshoots, forced strictly
/// backward within `0..clause_index`; clone references are only bounded
/// by `clause_limit` since they may point forward.
pub(crate) fn parse_clause(
    tokens: &[Token],
    base: usize,
    frame: &BevFrame,
    clause_index: usize,
    clause_limit: usize,
    with_curve: bool,
) -> Result<RawClause, CodecError> {
    let (ex, ey) = frame.grid_extent();
    let ix = parse_coord(tokens, base, ex, "vertex x cell")?;
    let iy = parse_coord(tokens, base + 1, ey, "vertex y cell")?;

    let cat_tok = tokens[base + 2];
    if cat_tok.kind() != TokenKind::Category {
        return Err(unexpected(base + 2, "category token", cat_tok));
    }
    let cat = cat_tok.as_category().ok_or_else(|| CodecError::Invalid {
        pos: base + 2,
        reason: format!("reserved category code {}", cat_tok.0 - 200),
    })?;

    let ref_tok = tokens[base + 3];
    let reference = match cat {
        VertexCategory::Ancestor | VertexCategory::Lineal => {
            if ref_tok != NA {
                return Err(unexpected(base + 3, "empty index slot", ref_tok));
            }
            None
        }
        VertexCategory::Offshoot => {
            let i = ref_tok
                .as_index()
                .ok_or_else(|| unexpected(base + 3, "parent clause index", ref_tok))?;
            if i >= clause_index {
                return Err(CodecError::Invalid {
                    pos: base + 3,
                    reason: format!("offshoot reference {i} is not an earlier clause"),
                });
            }
            Some(i)
        }
        VertexCategory::Clone => {
            let i = ref_tok
                .as_index()
                .ok_or_else(|| unexpected(base + 3, "duplicated clause index", ref_tok))?;
            if i >= clause_limit {
                return Err(CodecError::Invalid {
                    pos: base + 3,
                    reason: format!("clone reference {i} beyond the last clause"),
                });
            }
            if i == clause_index {
                return Err(CodecError::Invalid {
                    pos: base + 3,
                    reason: "clone references its own clause".into(),
                });
            }
            Some(i)
        }
    };

    let ctrl = if !with_curve {
        None
    } else if cat == VertexCategory::Ancestor {
        for off in [4usize, 5] {
            if tokens[base + off] != NA {
                return Err(unexpected(
                    base + off,
                    "empty curve slot",
                    tokens[base + off],
                ));
            }
        }
        None
    } else {
        let bx = tokens[base + 4]
            .as_curve_bin()
            .ok_or_else(|| unexpected(base + 4, "curve x bin", tokens[base + 4]))?;
        let by = tokens[base + 5]
            .as_curve_bin()
            .ok_or_else(|| unexpected(base + 5, "curve y bin", tokens[base + 5]))?;
        Some((bx, by))
    };

    Ok(RawClause {
        ix,
        iy,
        cat,
        reference,
        ctrl,
    })
}

/// Rebuilds a forest from parsed clauses.
///
/// `pos_of` maps a clause index to the absolute token offset of its
/// first token, for error attribution; `label` names vertices by clause
/// index. Shared by the coupled and row-structured decoders.
pub(crate) fn clauses_to_forest(
    clauses: &[RawClause],
    frame: &BevFrame,
    pos_of: impl Fn(usize) -> usize,
) -> Result<DirectedForest, CodecError> {
    for (k, c) in clauses.iter().enumerate() {
        if c.cat == VertexCategory::Clone {
            let target = c.reference.expect("clone parsed with reference");
            if clauses[target].cat == VertexCategory::Clone {
                return Err(CodecError::Invalid {
                    pos: pos_of(k) + 3,
                    reason: format!("clone reference {target} names another clone"),
                });
            }
        }
    }

    let mut forest = DirectedForest::new(*frame);
    let mut fidx = vec![usize::MAX; clauses.len()];
    let mut last_real: Option<usize> = None;
    let mut edges: HashSet<(usize, usize)> = HashSet::new();
    let mut patches: Vec<(usize, usize)> = Vec::new();

    for (k, c) in clauses.iter().enumerate() {
        let p = frame.dequantize(c.ix, c.iy);
        let id = format!("v{k}");
        let ctrl = c.ctrl.map(|(bx, by)| frame.dequantize_ctrl(bx, by));
        match c.cat {
            VertexCategory::Ancestor => {
                fidx[k] = forest.add_root(id.into(), p.x, p.y);
                last_real = Some(k);
            }
            VertexCategory::Lineal | VertexCategory::Offshoot => {
                let parent = match c.cat {
                    VertexCategory::Lineal => last_real.ok_or_else(|| CodecError::Invalid {
                        pos: pos_of(k) + 2,
                        reason: "no preceding vertex clause to attach to".into(),
                    })?,
                    _ => c.reference.expect("offshoot parsed with reference"),
                };
                edges.insert((parent, k));
                fidx[k] = forest.add_child(
                    fidx[parent],
                    id.into(),
                    p.x,
                    p.y,
                    ctrl.expect("non-root clause parsed with curve"),
                );
                last_real = Some(k);
            }
            VertexCategory::Clone => {
                let parent = last_real.ok_or_else(|| CodecError::Invalid {
                    pos: pos_of(k) + 2,
                    reason: "clone with no preceding vertex clause".into(),
                })?;
                let original = c.reference.expect("clone parsed with reference");
                if original == parent {
                    return Err(CodecError::Invalid {
                        pos: pos_of(k) + 3,
                        reason: "clone recovers a self loop".into(),
                    });
                }
                if !edges.insert((original, parent)) {
                    return Err(CodecError::Invalid {
                        pos: pos_of(k) + 3,
                        reason: "clone recovers a duplicate edge".into(),
                    });
                }
                fidx[k] = forest.add_clone(
                    fidx[parent],
                    id.into(),
                    p.x,
                    p.y,
                    ctrl.expect("clone clause parsed with curve"),
                    usize::MAX,
                );
                patches.push((fidx[k], original));
            }
        }
    }

    for (clone, original_clause) in patches {
        forest.set_clone_original(clone, fidx[original_clause]);
    }
    Ok(forest)
}

fn parse_offshoot_targets(
    clauses: &[RawClause],
    pos_of: impl Fn(usize) -> usize,
) -> Result<(), CodecError> {
    for (k, c) in clauses.iter().enumerate() {
        if c.cat == VertexCategory::Offshoot {
            let target = c.reference.expect("offshoot parsed with reference");
            if clauses[target].cat == VertexCategory::Clone {
                return Err(CodecError::Invalid {
                    pos: pos_of(k) + 3,
                    reason: format!("offshoot reference {target} names a clone"),
                });
            }
        }
    }
    Ok(())
}

/// Decodes a coupled clause stream back into a road network.
pub fn decode_coupled(tokens: &[Token], frame: &BevFrame) -> Result<RoadNetwork, CodecError> {
    if !tokens.len().is_multiple_of(CLAUSE_LEN) {
        return Err(CodecError::Truncated {
            pos: tokens.len(),
            expected: "a complete six-token clause",
        });
    }
    let n = tokens.len() / CLAUSE_LEN;
    let mut clauses = Vec::with_capacity(n);
    for k in 0..n {
        clauses.push(parse_clause(tokens, k * CLAUSE_LEN, frame, k, n, true)?);
    }
    parse_offshoot_targets(&clauses, |k| k * CLAUSE_LEN)?;
    let forest = clauses_to_forest(&clauses, frame, |k| k * CLAUSE_LEN)?;
    Ok(from_forest(&forest)?)
}

/// Clause count of an encoded coupled stream.
pub fn clause_count(tokens: &[Token]) -> usize {
    tokens.len() / CLAUSE_LEN
}
