//! Interchange formats: JSON documents for networks and SD maps, and
//! text or binary token streams.
//!
//! Token text holds one sample per line as space-separated decimal
//! token values; row-split samples join their rows with `" | "` and
//! omit the all-padding tail rows. The binary layout is little-endian
//! `u16` throughout: per sample a row count, then per row a length
//! followed by that many token values. Flat formats are written as a
//! single row.
//!
//! JSON reading has a strict mode that rejects unknown fields and any
//! structural violation; lenient mode ignores unknown fields and keeps
//! violating entries for inspection.

use std::io::{ErrorKind, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::sar::SarSequence;
use crate::codec::vocab::{Token, NA, VOCAB_SIZE};
use crate::codec::CodecError;
use crate::graph::{BevFrame, Edge, GraphError, RoadNetwork, Vertex};
use crate::sdmap::SdMap;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown field `{field}` in {scope}")]
    UnknownField { scope: &'static str, field: String },
    #[error("structural violation: {0}")]
    Violation(String),
    #[error("token {index}: {reason}")]
    BadToken { index: usize, reason: String },
    #[error("binary stream: {0}")]
    Binary(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("io: {0}")]
    File(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
struct FrameDoc {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    resolution: f64,
}

#[derive(Serialize, Deserialize)]
struct VertexDoc {
    id: String,
    x: f64,
    y: f64,
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    source: String,
    target: String,
    ctrl_x: f64,
    ctrl_y: f64,
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    frame: FrameDoc,
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct LinkDoc {
    source: String,
    target: String,
}

#[derive(Serialize, Deserialize)]
struct SdMapDoc {
    frame: FrameDoc,
    nodes: Vec<VertexDoc>,
    links: Vec<LinkDoc>,
}

const FRAME_KEYS: &[&str] = &["x_min", "x_max", "y_min", "y_max", "resolution"];
const VERTEX_KEYS: &[&str] = &["id", "x", "y"];
const EDGE_KEYS: &[&str] = &["source", "target", "ctrl_x", "ctrl_y"];
const LINK_KEYS: &[&str] = &["source", "target"];

fn check_keys(
    value: &serde_json::Value,
    scope: &'static str,
    allowed: &[&str],
) -> Result<(), IoError> {
    if let Some(map) = value.as_object() {
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(IoError::UnknownField {
                    scope,
                    field: key.clone(),
                });
            }
        }
    }
    Ok(())
}

fn check_list(
    value: &serde_json::Value,
    scope: &'static str,
    allowed: &[&str],
) -> Result<(), IoError> {
    for item in value.as_array().into_iter().flatten() {
        check_keys(item, scope, allowed)?;
    }
    Ok(())
}

fn frame_from_doc(doc: &FrameDoc) -> Result<BevFrame, IoError> {
    Ok(BevFrame::new(
        doc.x_min,
        doc.x_max,
        doc.y_min,
        doc.y_max,
        doc.resolution,
    )?)
}

fn frame_to_doc(frame: &BevFrame) -> FrameDoc {
    FrameDoc {
        x_min: frame.x_min,
        x_max: frame.x_max,
        y_min: frame.y_min,
        y_max: frame.y_max,
        resolution: frame.resolution,
    }
}

/// Parses a network document. Strict mode rejects unknown fields and
/// any violation reported by [`RoadNetwork::validate`].
pub fn read_network(text: &str, strict: bool) -> Result<RoadNetwork, IoError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if strict {
        check_keys(&value, "network", &["frame", "vertices", "edges"])?;
        check_keys(&value["frame"], "frame", FRAME_KEYS)?;
        check_list(&value["vertices"], "vertex", VERTEX_KEYS)?;
        check_list(&value["edges"], "edge", EDGE_KEYS)?;
    }
    let doc: NetworkDoc = serde_json::from_value(value)?;
    let mut net = RoadNetwork::new(frame_from_doc(&doc.frame)?);
    for v in doc.vertices {
        net.add_vertex(Vertex::new(v.id, v.x, v.y))?;
    }
    for e in doc.edges {
        net.add_edge(Edge::new(e.source, e.target, e.ctrl_x, e.ctrl_y));
    }
    if strict {
        if let Some(v) = net.validate().first() {
            return Err(IoError::Violation(v.to_string()));
        }
    }
    Ok(net)
}

fn network_doc(net: &RoadNetwork) -> NetworkDoc {
    NetworkDoc {
        frame: frame_to_doc(net.frame()),
        vertices: net
            .vertices()
            .iter()
            .map(|v| VertexDoc {
                id: v.id.0.clone(),
                x: v.x,
                y: v.y,
            })
            .collect(),
        edges: net
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                source: e.source.0.clone(),
                target: e.target.0.clone(),
                ctrl_x: e.ctrl_x,
                ctrl_y: e.ctrl_y,
            })
            .collect(),
    }
}

/// Serializes a network document, pretty-printed and order-stable.
pub fn write_network(net: &RoadNetwork) -> String {
    serde_json::to_string_pretty(&network_doc(net)).expect("document serialization is infallible")
}

/// Single-line variant of [`write_network`] for JSONL batches.
pub fn write_network_line(net: &RoadNetwork) -> String {
    serde_json::to_string(&network_doc(net)).expect("document serialization is infallible")
}

/// Parses an SD-map document. Strict mode rejects unknown fields;
/// self and duplicate links are always rejected by construction.
pub fn read_sdmap(text: &str, strict: bool) -> Result<SdMap, IoError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if strict {
        check_keys(&value, "sdmap", &["frame", "nodes", "links"])?;
        check_keys(&value["frame"], "frame", FRAME_KEYS)?;
        check_list(&value["nodes"], "node", VERTEX_KEYS)?;
        check_list(&value["links"], "link", LINK_KEYS)?;
    }
    let doc: SdMapDoc = serde_json::from_value(value)?;
    let mut map = SdMap::new(frame_from_doc(&doc.frame)?);
    for n in doc.nodes {
        map.add_node(Vertex::new(n.id, n.x, n.y))?;
    }
    for l in doc.links {
        map.add_link(l.source.into(), l.target.into())?;
    }
    Ok(map)
}

fn sdmap_doc(map: &SdMap) -> SdMapDoc {
    SdMapDoc {
        frame: frame_to_doc(map.frame()),
        nodes: map
            .nodes()
            .iter()
            .map(|v| VertexDoc {
                id: v.id.0.clone(),
                x: v.x,
                y: v.y,
            })
            .collect(),
        links: map
            .links()
            .iter()
            .map(|(s, t)| LinkDoc {
                source: s.0.clone(),
                target: t.0.clone(),
            })
            .collect(),
    }
}

/// Serializes an SD-map document.
pub fn write_sdmap(map: &SdMap) -> String {
    serde_json::to_string_pretty(&sdmap_doc(map)).expect("document serialization is infallible")
}

/// Single-line variant of [`write_sdmap`] for JSONL batches.
pub fn write_sdmap_line(map: &SdMap) -> String {
    serde_json::to_string(&sdmap_doc(map)).expect("document serialization is infallible")
}

/// One line of token text: space-separated decimal values.
pub fn format_tokens(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(|t| t.0.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Parses one line of token text, bounds-checking every value.
pub fn parse_tokens(line: &str) -> Result<Vec<Token>, IoError> {
    line.split_whitespace()
        .enumerate()
        .map(|(index, s)| {
            let v: u16 = s.parse().map_err(|_| IoError::BadToken {
                index,
                reason: format!("`{s}` is not an integer token"),
            })?;
            if v >= VOCAB_SIZE {
                return Err(IoError::BadToken {
                    index,
                    reason: format!("{v} is outside the {VOCAB_SIZE}-token vocabulary"),
                });
            }
            Ok(Token(v))
        })
        .collect()
}

/// One line of row-split token text, padding tail rows omitted.
pub fn format_sar(seq: &SarSequence) -> String {
    let rows = seq.rows();
    let upto = rows.iter().rposition(|r| r[0] != NA).map_or(0, |l| l + 1);
    rows[..upto]
        .iter()
        .map(|r| format_tokens(r))
        .collect::<Vec<_>>()
        .join(" | ")
}

/// Parses a row-split token line back into a padded sample.
pub fn parse_sar(line: &str) -> Result<SarSequence, IoError> {
    let trimmed = line.trim();
    let rows: Vec<Vec<Token>> = if trimmed.is_empty() {
        Vec::new()
    } else {
        trimmed
            .split('|')
            .map(parse_tokens)
            .collect::<Result<_, _>>()?
    };
    Ok(SarSequence::from_rows(rows)?)
}

/// Appends one sample to a binary token stream.
pub fn write_token_bin<W: Write>(w: &mut W, rows: &[Vec<Token>]) -> Result<(), IoError> {
    let n = u16::try_from(rows.len())
        .map_err(|_| IoError::Binary(format!("{} rows do not fit a u16 count", rows.len())))?;
    w.write_all(&n.to_le_bytes())?;
    for row in rows {
        let len = u16::try_from(row.len()).map_err(|_| {
            IoError::Binary(format!(
                "row of {} tokens does not fit a u16 length",
                row.len()
            ))
        })?;
        w.write_all(&len.to_le_bytes())?;
        for t in row {
            w.write_all(&t.0.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads the next sample from a binary token stream; `None` at a clean
/// end of stream.
pub fn read_token_bin<R: Read>(r: &mut R) -> Result<Option<Vec<Vec<Token>>>, IoError> {
    let mut word = [0u8; 2];
    match r.read_exact(&mut word) {
        Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Ok(None),
        other => other?,
    }
    let n_rows = u16::from_le_bytes(word) as usize;
    let mut rows = Vec::with_capacity(n_rows);
    for row_idx in 0..n_rows {
        r.read_exact(&mut word)
            .map_err(|_| IoError::Binary(format!("truncated length of row {row_idx}")))?;
        let len = u16::from_le_bytes(word) as usize;
        let mut bytes = vec![0u8; 2 * len];
        r.read_exact(&mut bytes)
            .map_err(|_| IoError::Binary(format!("truncated body of row {row_idx}")))?;
        let mut row = Vec::with_capacity(len);
        for (i, pair) in bytes.chunks_exact(2).enumerate() {
            let v = u16::from_le_bytes([pair[0], pair[1]]);
            if v >= VOCAB_SIZE {
                return Err(IoError::BadToken {
                    index: i,
                    reason: format!(
                        "{v} in row {row_idx} is outside the {VOCAB_SIZE}-token vocabulary"
                    ),
                });
            }
            row.push(Token(v));
        }
        rows.push(row);
    }
    Ok(Some(rows))
}
