//! Conversion between acyclic road networks and directed forests.
//!
//! A directed forest is what the sequence codecs actually serialize: every
//! non-root vertex has exactly one parent, so a vertex plus its incoming
//! edge forms one fixed-width clause. Merge vertices (in-degree above one)
//! break that shape, so all but one incoming edge is deleted and each
//! deleted edge leaves behind a marker leaf under the merge vertex: a
//! clone of the lost parent carrying the edge's curve payload. Recovery
//! turns a clone `c` under `m` with original `p` back into the edge
//! `p -> m`.
//!
//! The same machinery splits a network at its key points: severing every
//! edge into a key point leaves one sub-tree per key point, with clones
//! recording the severed links.

use std::collections::HashSet;

use thiserror::Error;

use crate::codec::order::OrderingPolicy;
use crate::graph::{BevFrame, Edge, Point, RoadNetwork, Vertex, VertexId};

#[derive(Debug, Error)]
pub enum ForestError {
    #[error("network is invalid: {0}")]
    InvalidNetwork(String),
    #[error("vertex {0} has a parent but no curve payload")]
    MissingPayload(VertexId),
    #[error("clone {0} has no parent")]
    OrphanClone(VertexId),
    #[error("clone {0} does not reference a regular original vertex")]
    BadCloneRef(VertexId),
    #[error("clone {0} has children")]
    CloneHasChild(VertexId),
    #[error("vertex {0} has a clone as parent")]
    CloneParent(VertexId),
    #[error("recovered edge {src}->{dst} duplicates an existing edge")]
    DuplicateRecoveredEdge { src: VertexId, dst: VertexId },
    #[error("recovered edge at {0} would be a self loop")]
    SelfEdgeRecovered(VertexId),
    #[error("recovered graph contains a cycle")]
    CyclicRecovery,
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// Role of a vertex within a serialized forest traversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexCategory {
    /// A tree root.
    Ancestor,
    /// First child of its parent in traversal order.
    Lineal,
    /// Later child of its parent, attached by explicit index.
    Offshoot,
    /// Marker leaf standing in for a deleted edge.
    Clone,
}

impl VertexCategory {
    pub fn code(self) -> u16 {
        match self {
            VertexCategory::Ancestor => 0,
            VertexCategory::Lineal => 1,
            VertexCategory::Offshoot => 2,
            VertexCategory::Clone => 3,
        }
    }

    pub fn from_code(code: u16) -> Option<Self> {
        Some(match code {
            0 => VertexCategory::Ancestor,
            1 => VertexCategory::Lineal,
            2 => VertexCategory::Offshoot,
            3 => VertexCategory::Clone,
            _ => return None,
        })
    }
}

/// A vertex of a [`DirectedForest`].
///
/// `category` is `Ancestor` for roots and `Clone` for clones; interior
/// vertices carry `Lineal` here, and the Lineal/Offshoot distinction is
/// finalized by traversal rank during encoding.
#[derive(Debug, Clone)]
pub struct ForestVertex {
    pub id: VertexId,
    pub x: f64,
    pub y: f64,
    pub category: VertexCategory,
    pub parent: Option<usize>,
    /// Control point of the edge from the parent (clones carry the
    /// payload of the edge they stand in for). `None` only for roots.
    pub incoming_ctrl: Option<Point>,
    /// For clones, the index of the duplicated regular vertex.
    pub clone_of: Option<usize>,
}

impl ForestVertex {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn is_clone(&self) -> bool {
        self.clone_of.is_some()
    }
}

/// A set of rooted trees over the vertices of one road network.
#[derive(Debug, Clone)]
pub struct DirectedForest {
    frame: BevFrame,
    vertices: Vec<ForestVertex>,
    roots: Vec<usize>,
    children: Vec<Vec<usize>>,
}

impl DirectedForest {
    pub fn new(frame: BevFrame) -> Self {
        DirectedForest {
            frame,
            vertices: Vec::new(),
            roots: Vec::new(),
            children: Vec::new(),
        }
    }

    pub fn frame(&self) -> &BevFrame {
        &self.frame
    }

    pub fn vertices(&self) -> &[ForestVertex] {
        &self.vertices
    }

    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn clone_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.is_clone()).count()
    }

    pub fn regular_count(&self) -> usize {
        self.vertices.len() - self.clone_count()
    }

    pub fn add_root(&mut self, id: VertexId, x: f64, y: f64) -> usize {
        let idx = self.vertices.len();
        self.vertices.push(ForestVertex {
            id,
            x,
            y,
            category: VertexCategory::Ancestor,
            parent: None,
            incoming_ctrl: None,
            clone_of: None,
        });
        self.children.push(Vec::new());
        self.roots.push(idx);
        idx
    }

    pub fn add_child(&mut self, parent: usize, id: VertexId, x: f64, y: f64, ctrl: Point) -> usize {
        assert!(parent < self.vertices.len(), "parent index out of range");
        let idx = self.vertices.len();
        self.vertices.push(ForestVertex {
            id,
            x,
            y,
            category: VertexCategory::Lineal,
            parent: Some(parent),
            incoming_ctrl: Some(ctrl),
            clone_of: None,
        });
        self.children.push(Vec::new());
        self.children[parent].push(idx);
        idx
    }

    /// Adds a clone leaf under `parent` standing in for the deleted edge
    /// `original -> parent`, whose curve payload is `ctrl`.
    pub fn add_clone(
        &mut self,
        parent: usize,
        id: VertexId,
        x: f64,
        y: f64,
        ctrl: Point,
        original: usize,
    ) -> usize {
        assert!(parent < self.vertices.len(), "parent index out of range");
        let idx = self.vertices.len();
        self.vertices.push(ForestVertex {
            id,
            x,
            y,
            category: VertexCategory::Clone,
            parent: Some(parent),
            incoming_ctrl: Some(ctrl),
            clone_of: Some(original),
        });
        self.children.push(Vec::new());
        self.children[parent].push(idx);
        idx
    }

    /// Patches a clone's original after the fact; used by decoders that
    /// resolve clone references once the whole stream is known.
    pub fn set_clone_original(&mut self, clone: usize, original: usize) {
        assert!(self.vertices[clone].is_clone(), "not a clone");
        self.vertices[clone].clone_of = Some(original);
    }

    /// Re-parents the root `child` under `parent` with the given
    /// incoming curve; used by builders that create every vertex as a
    /// root up front and wire the tree afterwards.
    pub fn claim_child(&mut self, parent: usize, child: usize, ctrl: Point) {
        assert!(
            self.vertices[child].parent.is_none(),
            "child already claimed"
        );
        assert!(
            !self.vertices[parent].is_clone(),
            "clone cannot be a parent"
        );
        self.vertices[child].parent = Some(parent);
        self.vertices[child].incoming_ctrl = Some(ctrl);
        self.vertices[child].category = VertexCategory::Lineal;
        self.roots.retain(|&r| r != child);
        self.children[parent].push(child);
    }
}

fn require_valid(net: &RoadNetwork) -> Result<(), ForestError> {
    let report = net.validate();
    if let Some(first) = report.first() {
        return Err(ForestError::InvalidNetwork(format!(
            "{first}{}",
            if report.len() > 1 {
                format!(" (+{} more)", report.len() - 1)
            } else {
                String::new()
            }
        )));
    }
    Ok(())
}

fn unique_clone_id(taken: &mut HashSet<String>, base: &VertexId) -> VertexId {
    let mut n = 1usize;
    loop {
        let candidate = format!("{base}#c{n}");
        if taken.insert(candidate.clone()) {
            return VertexId(candidate);
        }
        n += 1;
    }
}

/// Rewrites a valid acyclic network as a directed forest.
///
/// For every merge vertex the incoming edges are ordered by `policy` over
/// the parents' locations; the first stays, each other becomes a clone
/// leaf. Vertex ids and coordinates are preserved exactly, so
/// [`from_forest`] inverts this without loss.
pub fn to_forest(
    net: &RoadNetwork,
    policy: &OrderingPolicy,
) -> Result<DirectedForest, ForestError> {
    require_valid(net)?;
    let mut forest = DirectedForest::new(*net.frame());
    let mut taken: HashSet<String> = net.vertices().iter().map(|v| v.id.0.clone()).collect();

    // Regular vertices first, as roots; parent links are patched below so
    // forest indices equal network indices.
    for v in net.vertices() {
        forest.add_root(v.id.clone(), v.x, v.y);
    }

    let mut orderer = policy.orderer(net.frame());
    let mut in_edges: Vec<Vec<usize>> = vec![Vec::new(); net.vertices().len()];
    for (i, e) in net.edges().iter().enumerate() {
        let t = net.vertex_index(&e.target).expect("validated");
        in_edges[t].push(i);
    }

    for (m, edges) in in_edges.iter().enumerate() {
        if edges.is_empty() {
            continue;
        }
        let mut parents: Vec<(usize, usize)> = edges
            .iter()
            .map(|&e| {
                (
                    net.vertex_index(&net.edges()[e].source).expect("validated"),
                    e,
                )
            })
            .collect();
        orderer.order(&mut parents, |(p, _)| {
            let v = &net.vertices()[*p];
            (v.point(), v.id.0.as_str())
        });

        let (first_parent, first_edge) = parents[0];
        forest.claim_child(first_parent, m, net.edges()[first_edge].ctrl());

        for &(p, e) in &parents[1..] {
            let src = &net.vertices()[p];
            let id = unique_clone_id(&mut taken, &src.id);
            forest.add_clone(m, id, src.x, src.y, net.edges()[e].ctrl(), p);
        }
    }

    Ok(forest)
}

/// Rebuilds the road network a forest encodes.
///
/// Clones are removed and each one contributes the edge
/// `original -> parent`. Fails if the forest is structurally corrupt or
/// the recovered graph breaks a network invariant.
pub fn from_forest(forest: &DirectedForest) -> Result<RoadNetwork, ForestError> {
    let mut net = RoadNetwork::new(*forest.frame());
    let verts = forest.vertices();
    let mut net_index = vec![usize::MAX; verts.len()];

    for (i, v) in verts.iter().enumerate() {
        if v.is_clone() {
            continue;
        }
        net_index[i] = net.add_vertex(Vertex {
            id: v.id.clone(),
            x: v.x,
            y: v.y,
        })?;
    }

    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut push_edge =
        |net: &mut RoadNetwork, src: usize, dst: usize, ctrl: Point| -> Result<(), ForestError> {
            let (s, t) = (net_index[src], net_index[dst]);
            if s == t {
                return Err(ForestError::SelfEdgeRecovered(verts[src].id.clone()));
            }
            if !seen.insert((s, t)) {
                return Err(ForestError::DuplicateRecoveredEdge {
                    src: verts[src].id.clone(),
                    dst: verts[dst].id.clone(),
                });
            }
            net.add_edge(Edge {
                source: verts[src].id.clone(),
                target: verts[dst].id.clone(),
                ctrl_x: ctrl.x,
                ctrl_y: ctrl.y,
            });
            Ok(())
        };

    for (i, v) in verts.iter().enumerate() {
        if v.is_clone() {
            continue;
        }
        if let Some(p) = v.parent {
            if verts[p].is_clone() {
                return Err(ForestError::CloneParent(v.id.clone()));
            }
            let ctrl = v
                .incoming_ctrl
                .ok_or_else(|| ForestError::MissingPayload(v.id.clone()))?;
            push_edge(&mut net, p, i, ctrl)?;
        }
    }

    for (i, v) in verts.iter().enumerate() {
        let Some(original) = v.clone_of else { continue };
        if !forest.children(i).is_empty() {
            return Err(ForestError::CloneHasChild(v.id.clone()));
        }
        let m = v
            .parent
            .ok_or_else(|| ForestError::OrphanClone(v.id.clone()))?;
        if original >= verts.len() || verts[original].is_clone() || verts[m].is_clone() {
            return Err(ForestError::BadCloneRef(v.id.clone()));
        }
        let ctrl = v
            .incoming_ctrl
            .ok_or_else(|| ForestError::MissingPayload(v.id.clone()))?;
        push_edge(&mut net, original, m, ctrl)?;
    }

    if net.find_cycle().is_some() {
        return Err(ForestError::CyclicRecovery);
    }
    Ok(net)
}

/// One network split into per-key-point trees, clones marking the
/// severed links between them.
#[derive(Debug, Clone)]
pub struct SarTreeSet {
    forest: DirectedForest,
}

impl SarTreeSet {
    pub fn forest(&self) -> &DirectedForest {
        &self.forest
    }

    pub fn tree_count(&self) -> usize {
        self.forest.roots().len()
    }

    /// Rejoins the trees into the original network.
    pub fn merge(&self) -> Result<RoadNetwork, ForestError> {
        from_forest(&self.forest)
    }
}

/// Splits a valid network at its key points.
///
/// Every edge into a key point is severed and recorded as a clone leaf
/// under that key point, making each key point the root of its own tree;
/// all remaining vertices keep their unique parent.
pub fn split_sar(net: &RoadNetwork) -> Result<SarTreeSet, ForestError> {
    require_valid(net)?;
    let keys: HashSet<usize> = net.key_points().into_iter().collect();
    let mut forest = DirectedForest::new(*net.frame());
    let mut taken: HashSet<String> = net.vertices().iter().map(|v| v.id.0.clone()).collect();

    for v in net.vertices() {
        forest.add_root(v.id.clone(), v.x, v.y);
    }

    for e in net.edges() {
        let p = net.vertex_index(&e.source).expect("validated");
        let t = net.vertex_index(&e.target).expect("validated");
        if keys.contains(&t) {
            let src = &net.vertices()[p];
            let id = unique_clone_id(&mut taken, &src.id);
            forest.add_clone(t, id, src.x, src.y, e.ctrl(), p);
        } else {
            // Non-key vertices have in-degree exactly one.
            forest.claim_child(p, t, e.ctrl());
        }
    }

    debug_assert_eq!(
        {
            let mut r = forest.roots.clone();
            r.sort_unstable();
            r
        },
        net.key_points()
    );
    Ok(SarTreeSet { forest })
}
