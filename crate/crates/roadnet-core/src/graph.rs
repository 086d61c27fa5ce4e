//! Core road-network model: a directed acyclic graph of spatial vertices
//! joined by quadratic Bezier edges, anchored to a bird's-eye-view frame.
//!
//! All coordinates are meters in the frame's coordinate system. Vertex
//! positions must lie inside the frame; Bezier control points may leave it
//! by up to ten grid cells on each side (the encodable margin).

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Number of grid cells a control point may lie below the frame minimum.
pub const CTRL_MARGIN_CELLS: f64 = 10.0;
/// Exclusive upper bound, in grid cells, for encodable control coordinates.
pub const CTRL_LIMIT_CELLS: f64 = 210.0;
/// Maximum grid cells per axis representable by coordinate tokens.
pub const MAX_GRID_CELLS: u32 = 200;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("point ({x}, {y}) lies outside the frame")]
    OutsideFrame { x: f64, y: f64 },
    #[error("control point ({x}, {y}) is outside the encodable range")]
    CtrlOutOfRange { x: f64, y: f64 },
    #[error("coordinate is not finite")]
    NonFinite,
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(VertexId),
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("self link at {0}")]
    SelfLink(VertexId),
    #[error("duplicate link {0} -> {1}")]
    DuplicateLink(VertexId, VertexId),
    #[error("sample count must be at least 2, got {0}")]
    BadSampleCount(usize),
}

/// Opaque, stable vertex identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub String);

impl VertexId {
    pub fn new(s: impl Into<String>) -> Self {
        VertexId(s.into())
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_string())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

impl From<VertexId> for String {
    fn from(id: VertexId) -> Self {
        id.0
    }
}

/// A 2-D point in frame coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Rectangular bird's-eye-view frame with a square quantization grid.
///
/// The frame covers the half-open box `[x_min, x_max) x [y_min, y_max)`.
/// `resolution` is the side length of one grid cell in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BevFrame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub resolution: f64,
}

impl BevFrame {
    pub fn new(
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
        resolution: f64,
    ) -> Result<Self, GraphError> {
        let frame = BevFrame {
            x_min,
            x_max,
            y_min,
            y_max,
            resolution,
        };
        frame.check()?;
        Ok(frame)
    }

    /// 96 m x 64 m frame centered on the observer, one-meter cells.
    pub fn default_urban() -> Self {
        BevFrame {
            x_min: -48.0,
            x_max: 48.0,
            y_min: -32.0,
            y_max: 32.0,
            resolution: 1.0,
        }
    }

    fn check(&self) -> Result<(), GraphError> {
        let vals = [
            self.x_min,
            self.x_max,
            self.y_min,
            self.y_max,
            self.resolution,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(GraphError::InvalidFrame("non-finite bound".into()));
        }
        if self.resolution <= 0.0 {
            return Err(GraphError::InvalidFrame(
                "resolution must be positive".into(),
            ));
        }
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(GraphError::InvalidFrame(
                "min bound must be below max bound".into(),
            ));
        }
        let (nx, ny) = self.grid_extent();
        if nx == 0 || ny == 0 {
            return Err(GraphError::InvalidFrame(
                "frame is narrower than one cell".into(),
            ));
        }
        if nx > MAX_GRID_CELLS || ny > MAX_GRID_CELLS {
            return Err(GraphError::InvalidFrame(format!(
                "grid extent {nx}x{ny} exceeds {MAX_GRID_CELLS} cells per axis"
            )));
        }
        Ok(())
    }

    /// Number of grid cells along x and y.
    pub fn grid_extent(&self) -> (u32, u32) {
        let nx = ((self.x_max - self.x_min) / self.resolution - 1e-9).ceil();
        let ny = ((self.y_max - self.y_min) / self.resolution - 1e-9).ceil();
        (nx.max(0.0) as u32, ny.max(0.0) as u32)
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x < self.x_max && p.y >= self.y_min && p.y < self.y_max
    }

    /// Maps a point inside the frame to its grid cell by truncation.
    pub fn quantize(&self, p: Point) -> Result<(u16, u16), GraphError> {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(GraphError::NonFinite);
        }
        if !self.contains(p) {
            return Err(GraphError::OutsideFrame { x: p.x, y: p.y });
        }
        let ix = ((p.x - self.x_min) / self.resolution).floor();
        let iy = ((p.y - self.y_min) / self.resolution).floor();
        Ok((ix as u16, iy as u16))
    }

    /// Returns the center of the given grid cell.
    pub fn dequantize(&self, ix: u16, iy: u16) -> Point {
        Point {
            x: self.x_min + (ix as f64 + 0.5) * self.resolution,
            y: self.y_min + (iy as f64 + 0.5) * self.resolution,
        }
    }

    /// Quantizes a Bezier control point to per-axis bins `0..220`.
    ///
    /// Control points use the same grid as vertices but with a ten-cell
    /// margin below the frame minimum, so bin 0 covers cell -10.
    pub fn quantize_ctrl(&self, p: Point) -> Result<(u16, u16), GraphError> {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(GraphError::NonFinite);
        }
        let gx = (p.x - self.x_min) / self.resolution;
        let gy = (p.y - self.y_min) / self.resolution;
        if !(-CTRL_MARGIN_CELLS..CTRL_LIMIT_CELLS).contains(&gx)
            || !(-CTRL_MARGIN_CELLS..CTRL_LIMIT_CELLS).contains(&gy)
        {
            return Err(GraphError::CtrlOutOfRange { x: p.x, y: p.y });
        }
        let bx = (gx + CTRL_MARGIN_CELLS).floor();
        let by = (gy + CTRL_MARGIN_CELLS).floor();
        Ok((bx as u16, by as u16))
    }

    /// Returns the center of a control-point bin pair from `quantize_ctrl`.
    pub fn dequantize_ctrl(&self, bx: u16, by: u16) -> Point {
        Point {
            x: self.x_min + (bx as f64 - CTRL_MARGIN_CELLS + 0.5) * self.resolution,
            y: self.y_min + (by as f64 - CTRL_MARGIN_CELLS + 0.5) * self.resolution,
        }
    }
}

/// A road landmark: junction, terminal, or curve break point.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: VertexId,
    pub x: f64,
    pub y: f64,
}

impl Vertex {
    pub fn new(id: impl Into<String>, x: f64, y: f64) -> Self {
        Vertex {
            id: VertexId::new(id),
            x,
            y,
        }
    }

    pub fn point(&self) -> Point {
        Point {
            x: self.x,
            y: self.y,
        }
    }
}

/// A directed road segment with a quadratic Bezier middle control point.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: VertexId,
    pub target: VertexId,
    pub ctrl_x: f64,
    pub ctrl_y: f64,
}

impl Edge {
    pub fn new(
        source: impl Into<String>,
        target: impl Into<String>,
        ctrl_x: f64,
        ctrl_y: f64,
    ) -> Self {
        Edge {
            source: VertexId::new(source),
            target: VertexId::new(target),
            ctrl_x,
            ctrl_y,
        }
    }

    pub fn ctrl(&self) -> Point {
        Point {
            x: self.ctrl_x,
            y: self.ctrl_y,
        }
    }
}

/// One violation found by [`RoadNetwork::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    VertexOutsideFrame { id: VertexId },
    MissingEndpoint { source: VertexId, target: VertexId },
    SelfLoop { id: VertexId },
    DuplicateEdge { source: VertexId, target: VertexId },
    CtrlOutOfRange { source: VertexId, target: VertexId },
    Cycle { vertices: Vec<VertexId> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::VertexOutsideFrame { id } => write!(f, "vertex {id} lies outside the frame"),
            Violation::MissingEndpoint { source, target } => {
                write!(f, "edge {source}->{target} references a missing vertex")
            }
            Violation::SelfLoop { id } => write!(f, "self loop at {id}"),
            Violation::DuplicateEdge { source, target } => {
                write!(f, "duplicate edge {source}->{target}")
            }
            Violation::CtrlOutOfRange { source, target } => {
                write!(
                    f,
                    "edge {source}->{target} has an unencodable control point"
                )
            }
            Violation::Cycle { vertices } => {
                let names: Vec<String> = vertices.iter().map(|v| v.to_string()).collect();
                write!(f, "cycle through {{{}}}", names.join(", "))
            }
        }
    }
}

/// A simple directed path, stored as indices into the network's edge list.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub edges: Vec<usize>,
}

impl Path {
    /// Vertex indices along the path, source of the first edge onward.
    pub fn vertex_indices(&self, net: &RoadNetwork) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.edges.len() + 1);
        for (i, &e) in self.edges.iter().enumerate() {
            let edge = &net.edges()[e];
            if i == 0 {
                out.push(
                    net.vertex_index(&edge.source)
                        .expect("path edge endpoints resolve"),
                );
            }
            out.push(
                net.vertex_index(&edge.target)
                    .expect("path edge endpoints resolve"),
            );
        }
        out
    }

    /// Concatenated Bezier samples of every edge, shared joints deduplicated.
    pub fn polyline(&self, net: &RoadNetwork, samples_per_edge: usize) -> Vec<Point> {
        let mut out = Vec::new();
        for (i, &e) in self.edges.iter().enumerate() {
            let pts = net.edge_polyline(e, samples_per_edge);
            let skip = if i == 0 { 0 } else { 1 };
            out.extend(pts.into_iter().skip(skip));
        }
        out
    }
}

/// Samples a quadratic Bezier at `n` parameters uniform in `[0, 1]`.
///
/// The first and last samples are the exact endpoints.
pub fn sample_quadratic(
    src: Point,
    ctrl: Point,
    dst: Point,
    n: usize,
) -> Result<Vec<Point>, GraphError> {
    if n < 2 {
        return Err(GraphError::BadSampleCount(n));
    }
    let mut out = Vec::with_capacity(n);
    out.push(src);
    for k in 1..n - 1 {
        let t = k as f64 / (n - 1) as f64;
        let u = 1.0 - t;
        out.push(Point {
            x: u * u * src.x + 2.0 * u * t * ctrl.x + t * t * dst.x,
            y: u * u * src.y + 2.0 * u * t * ctrl.y + t * t * dst.y,
        });
    }
    out.push(dst);
    Ok(out)
}

/// Samples an edge's curve given its endpoint locations.
pub fn sample_edge(
    edge: &Edge,
    src: Point,
    dst: Point,
    n: usize,
) -> Result<Vec<Point>, GraphError> {
    sample_quadratic(src, edge.ctrl(), dst, n)
}

/// A directed acyclic road network inside one BEV frame.
///
/// Vertex and edge order is insertion order and is preserved by every
/// operation, so all derived artifacts are deterministic.
#[derive(Debug, Clone)]
pub struct RoadNetwork {
    frame: BevFrame,
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    by_id: HashMap<VertexId, usize>,
}

impl RoadNetwork {
    pub fn new(frame: BevFrame) -> Self {
        RoadNetwork {
            frame,
            vertices: Vec::new(),
            edges: Vec::new(),
            by_id: HashMap::new(),
        }
    }

    pub fn frame(&self) -> &BevFrame {
        &self.frame
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_index(&self, id: &VertexId) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn vertex(&self, id: &VertexId) -> Option<&Vertex> {
        self.vertex_index(id).map(|i| &self.vertices[i])
    }

    /// Adds a vertex. Ids must be unique; geometry is checked by `validate`.
    pub fn add_vertex(&mut self, v: Vertex) -> Result<usize, GraphError> {
        if self.by_id.contains_key(&v.id) {
            return Err(GraphError::DuplicateVertex(v.id));
        }
        let idx = self.vertices.len();
        self.by_id.insert(v.id.clone(), idx);
        self.vertices.push(v);
        Ok(idx)
    }

    /// Adds an edge without structural checks; `validate` reports problems.
    pub fn add_edge(&mut self, e: Edge) -> usize {
        self.edges.push(e);
        self.edges.len() - 1
    }

    /// Edge indices grouped by resolvable source vertex, insertion order.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if let (Some(s), Some(_)) = (self.vertex_index(&e.source), self.vertex_index(&e.target))
            {
                out[s].push(i);
            }
        }
        out
    }

    /// In-degree and out-degree per vertex, counting resolvable edges.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut ind = vec![0usize; self.vertices.len()];
        let mut outd = vec![0usize; self.vertices.len()];
        for e in &self.edges {
            if let (Some(s), Some(t)) = (self.vertex_index(&e.source), self.vertex_index(&e.target))
            {
                outd[s] += 1;
                ind[t] += 1;
            }
        }
        (ind, outd)
    }

    /// Checks every structural and geometric invariant, returning all
    /// violations found (empty means the network is valid).
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        for v in &self.vertices {
            if !self.frame.contains(v.point()) {
                report.push(Violation::VertexOutsideFrame { id: v.id.clone() });
            }
        }
        let mut seen = HashMap::new();
        for e in &self.edges {
            let s = self.vertex_index(&e.source);
            let t = self.vertex_index(&e.target);
            if s.is_none() || t.is_none() {
                report.push(Violation::MissingEndpoint {
                    source: e.source.clone(),
                    target: e.target.clone(),
                });
                continue;
            }
            if e.source == e.target {
                report.push(Violation::SelfLoop {
                    id: e.source.clone(),
                });
            }
            if seen.insert((s.unwrap(), t.unwrap()), ()).is_some() {
                report.push(Violation::DuplicateEdge {
                    source: e.source.clone(),
                    target: e.target.clone(),
                });
            }
            if self.frame.quantize_ctrl(e.ctrl()).is_err() {
                report.push(Violation::CtrlOutOfRange {
                    source: e.source.clone(),
                    target: e.target.clone(),
                });
            }
        }
        if let Some(cycle) = self.find_cycle() {
            report.push(Violation::Cycle { vertices: cycle });
        }
        report
    }

    /// Returns the vertices of one directed cycle, if any exists.
    pub fn find_cycle(&self) -> Option<Vec<VertexId>> {
        const WHITE: u8 = 0;
        const GRAY: u8 = 1;
        const BLACK: u8 = 2;
        let adj = self.out_edges();
        let mut color = vec![WHITE; self.vertices.len()];
        let mut path: Vec<usize> = Vec::new();

        // Iterative DFS keeping the current path so the cycle can be named.
        for start in 0..self.vertices.len() {
            if color[start] != WHITE {
                continue;
            }
            let mut frames: Vec<(usize, usize)> = vec![(start, 0)];
            color[start] = GRAY;
            path.push(start);
            while let Some(&(v, next)) = frames.last() {
                if next < adj[v].len() {
                    frames.last_mut().unwrap().1 += 1;
                    let edge = adj[v][next];
                    let w = self.vertex_index(&self.edges[edge].target).unwrap();
                    match color[w] {
                        WHITE => {
                            color[w] = GRAY;
                            path.push(w);
                            frames.push((w, 0));
                        }
                        GRAY => {
                            let pos = path.iter().position(|&p| p == w).unwrap();
                            return Some(
                                path[pos..]
                                    .iter()
                                    .map(|&p| self.vertices[p].id.clone())
                                    .collect(),
                            );
                        }
                        _ => {}
                    }
                } else {
                    color[v] = BLACK;
                    path.pop();
                    frames.pop();
                }
            }
        }
        None
    }

    /// Indices of key points: forks, merges, and origins.
    pub fn key_points(&self) -> Vec<usize> {
        let (ind, outd) = self.degrees();
        (0..self.vertices.len())
            .filter(|&i| outd[i] > 1 || ind[i] > 1 || ind[i] == 0)
            .collect()
    }

    /// All simple directed paths from `src` to `dst` with at most
    /// `max_edges` edges, ordered lexicographically by edge index.
    pub fn enumerate_paths(
        &self,
        src: &VertexId,
        dst: &VertexId,
        max_edges: usize,
    ) -> Result<Vec<Path>, GraphError> {
        let s = self
            .vertex_index(src)
            .ok_or_else(|| GraphError::UnknownVertex(src.clone()))?;
        let t = self
            .vertex_index(dst)
            .ok_or_else(|| GraphError::UnknownVertex(dst.clone()))?;
        let adj = self.out_edges();
        let mut found = Vec::new();
        let mut on_path = vec![false; self.vertices.len()];
        let mut trail = Vec::new();
        on_path[s] = true;
        self.path_dfs(s, t, max_edges, &adj, &mut on_path, &mut trail, &mut found);
        Ok(found)
    }

    #[allow(clippy::too_many_arguments)]
    fn path_dfs(
        &self,
        v: usize,
        t: usize,
        budget: usize,
        adj: &[Vec<usize>],
        on_path: &mut [bool],
        trail: &mut Vec<usize>,
        found: &mut Vec<Path>,
    ) {
        if budget == 0 {
            return;
        }
        for &edge in &adj[v] {
            let w = self.vertex_index(&self.edges[edge].target).unwrap();
            if on_path[w] {
                continue;
            }
            trail.push(edge);
            if w == t {
                found.push(Path {
                    edges: trail.clone(),
                });
            } else {
                on_path[w] = true;
                self.path_dfs(w, t, budget - 1, adj, on_path, trail, found);
                on_path[w] = false;
            }
            trail.pop();
        }
    }

    /// Bezier samples of one edge, endpoints exact.
    pub fn edge_polyline(&self, edge_idx: usize, samples: usize) -> Vec<Point> {
        let e = &self.edges[edge_idx];
        let s = self
            .vertex(&e.source)
            .expect("edge source resolves")
            .point();
        let t = self
            .vertex(&e.target)
            .expect("edge target resolves")
            .point();
        sample_edge(e, s, t, samples).expect("sample count checked by caller")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> BevFrame {
        BevFrame::default_urban()
    }

    fn chain() -> RoadNetwork {
        let mut net = RoadNetwork::new(frame());
        net.add_vertex(Vertex::new("a", 0.0, 0.0)).unwrap();
        net.add_vertex(Vertex::new("b", 10.0, 0.0)).unwrap();
        net.add_edge(Edge::new("a", "b", 5.0, 0.0));
        net
    }

    #[test]
    fn bezier_midpoint_matches_hand_value() {
        let pts = sample_quadratic(
            Point::new(0.0, 0.0),
            Point::new(1.0, 2.0),
            Point::new(2.0, 0.0),
            3,
        )
        .unwrap();
        assert_eq!(pts[1], Point::new(1.0, 1.0));
        assert_eq!(pts[0], Point::new(0.0, 0.0));
        assert_eq!(pts[2], Point::new(2.0, 0.0));
    }

    #[test]
    fn bezier_collinear_ctrl_stays_on_segment() {
        let pts = sample_quadratic(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
            33,
        )
        .unwrap();
        for w in pts.windows(2) {
            assert!(w[0].x <= w[1].x + 1e-12);
        }
        for p in pts {
            assert!(p.y.abs() < 1e-12);
            assert!((-1e-12..=2.0 + 1e-12).contains(&p.x));
        }
    }

    #[test]
    fn bezier_two_samples_are_endpoints() {
        let pts = sample_quadratic(
            Point::new(0.0, 0.0),
            Point::new(9.0, 9.0),
            Point::new(2.0, 1.0),
            2,
        )
        .unwrap();
        assert_eq!(pts, vec![Point::new(0.0, 0.0), Point::new(2.0, 1.0)]);
        assert!(sample_quadratic(
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            1
        )
        .is_err());
    }

    #[test]
    fn quantize_matches_hand_values() {
        let f = frame();
        assert_eq!(f.quantize(Point::new(-48.0, -32.0)).unwrap(), (0, 0));
        assert_eq!(f.quantize(Point::new(-47.01, -32.0)).unwrap(), (0, 0));
        assert_eq!(f.quantize(Point::new(0.0, 0.0)).unwrap(), (48, 32));
        assert_eq!(f.quantize(Point::new(47.999, 31.999)).unwrap(), (95, 63));
        assert!(f.quantize(Point::new(48.0, 0.0)).is_err());
        assert!(f.quantize(Point::new(-48.001, 0.0)).is_err());
        assert!(f.quantize(Point::new(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn dequantize_lands_on_cell_centers() {
        let f = frame();
        assert_eq!(f.dequantize(0, 0), Point::new(-47.5, -31.5));
        assert_eq!(f.dequantize(48, 32), Point::new(0.5, 0.5));
        for p in [Point::new(-3.7, 8.2), Point::new(41.9, -31.99)] {
            let (ix, iy) = f.quantize(p).unwrap();
            let q = f.dequantize(ix, iy);
            assert!((q.x - p.x).abs() <= 0.5 && (q.y - p.y).abs() <= 0.5);
        }
    }

    #[test]
    fn ctrl_quantization_uses_ten_cell_margin() {
        let f = frame();
        // 3.2 cells left of x_min and 4.0 cells above y_min.
        let (bx, by) = f.quantize_ctrl(Point::new(-51.2, -28.0)).unwrap();
        assert_eq!((bx, by), (6, 14));
        assert_eq!(f.quantize_ctrl(Point::new(-58.0, -32.0)).unwrap(), (0, 10));
        assert!(f.quantize_ctrl(Point::new(-58.01, 0.0)).is_err());
        assert!(f.quantize_ctrl(Point::new(-48.0 + 210.0, 0.0)).is_err());
        let c = f.dequantize_ctrl(6, 14);
        assert!((c.x - -51.5).abs() < 1e-12 && (c.y - -27.5).abs() < 1e-12);
    }

    #[test]
    fn grid_extent_counts_cells() {
        assert_eq!(frame().grid_extent(), (96, 64));
        let f = BevFrame::new(0.0, 10.0, 0.0, 4.0, 0.5).unwrap();
        assert_eq!(f.grid_extent(), (20, 8));
        assert!(BevFrame::new(0.0, 201.0, 0.0, 10.0, 1.0).is_err());
        assert!(BevFrame::new(0.0, 10.0, 0.0, 10.0, -1.0).is_err());
        assert!(BevFrame::new(10.0, 0.0, 0.0, 10.0, 1.0).is_err());
    }

    #[test]
    fn validate_accepts_chain() {
        assert!(chain().validate().is_empty());
    }

    #[test]
    fn validate_reports_cycle_with_vertices() {
        let mut net = chain();
        net.add_edge(Edge::new("b", "a", 5.0, 0.0));
        let report = net.validate();
        let cycle = report
            .iter()
            .find_map(|v| match v {
                Violation::Cycle { vertices } => Some(vertices.clone()),
                _ => None,
            })
            .expect("cycle reported");
        let mut names: Vec<String> = cycle.iter().map(|v| v.to_string()).collect();
        names.sort();
        assert_eq!(names, vec!["a", "b"]);
    }

    #[test]
    fn validate_reports_structural_violations() {
        let mut net = chain();
        net.add_vertex(Vertex::new("far", 500.0, 0.0)).unwrap();
        net.add_edge(Edge::new("a", "ghost", 0.0, 0.0));
        net.add_edge(Edge::new("a", "a", 0.0, 0.0));
        net.add_edge(Edge::new("a", "b", 1.0, 1.0));
        net.add_edge(Edge::new("a", "far", -60.0, 0.0));
        let report = net.validate();
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::VertexOutsideFrame { .. })));
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::MissingEndpoint { .. })));
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::SelfLoop { .. })));
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::DuplicateEdge { .. })));
        assert!(report
            .iter()
            .any(|v| matches!(v, Violation::CtrlOutOfRange { .. })));
    }

    #[test]
    fn key_points_match_degree_rules() {
        let mut net = RoadNetwork::new(frame());
        for (id, x) in [("a", -20.0), ("b", -10.0), ("c", 0.0), ("d", 10.0)] {
            net.add_vertex(Vertex::new(id, x, 0.0)).unwrap();
        }
        net.add_edge(Edge::new("a", "c", -10.0, 0.5));
        net.add_edge(Edge::new("b", "c", -5.0, -0.5));
        net.add_edge(Edge::new("c", "d", 5.0, 0.0));
        let ids: Vec<&str> = net
            .key_points()
            .into_iter()
            .map(|i| net.vertices()[i].id.0.as_str())
            .collect();
        assert_eq!(ids, vec!["a", "b", "c"]);
    }

    #[test]
    fn enumerate_paths_on_diamond_and_chain() {
        let mut net = RoadNetwork::new(frame());
        for (id, x, y) in [
            ("s", -10.0, 0.0),
            ("u", 0.0, 5.0),
            ("v", 0.0, -5.0),
            ("t", 10.0, 0.0),
        ] {
            net.add_vertex(Vertex::new(id, x, y)).unwrap();
        }
        net.add_edge(Edge::new("s", "u", -5.0, 2.5));
        net.add_edge(Edge::new("s", "v", -5.0, -2.5));
        net.add_edge(Edge::new("u", "t", 5.0, 2.5));
        net.add_edge(Edge::new("v", "t", 5.0, -2.5));
        let paths = net.enumerate_paths(&"s".into(), &"t".into(), 5).unwrap();
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].edges, vec![0, 2]);
        assert_eq!(paths[1].edges, vec![1, 3]);
        assert!(net
            .enumerate_paths(&"s".into(), &"t".into(), 1)
            .unwrap()
            .is_empty());
        assert!(net.enumerate_paths(&"s".into(), &"nope".into(), 5).is_err());
    }

    #[test]
    fn long_chain_is_unreachable_under_edge_budget() {
        let mut net = RoadNetwork::new(frame());
        for i in 0..8 {
            net.add_vertex(Vertex::new(format!("v{i}"), -40.0 + 10.0 * i as f64, 0.0))
                .unwrap();
        }
        for i in 0..7 {
            net.add_edge(Edge::new(
                format!("v{i}"),
                format!("v{}", i + 1),
                -35.0 + 10.0 * i as f64,
                0.0,
            ));
        }
        assert!(net
            .enumerate_paths(&"v0".into(), &"v7".into(), 5)
            .unwrap()
            .is_empty());
        assert_eq!(
            net.enumerate_paths(&"v0".into(), &"v7".into(), 7)
                .unwrap()
                .len(),
            1
        );
    }

    #[test]
    fn path_polyline_dedupes_joints() {
        let mut net = RoadNetwork::new(frame());
        for (id, x) in [("a", 0.0), ("b", 10.0), ("c", 20.0)] {
            net.add_vertex(Vertex::new(id, x, 0.0)).unwrap();
        }
        net.add_edge(Edge::new("a", "b", 5.0, 0.0));
        net.add_edge(Edge::new("b", "c", 15.0, 0.0));
        let path = Path { edges: vec![0, 1] };
        let line = path.polyline(&net, 10);
        assert_eq!(line.len(), 19);
        assert_eq!(line[0], Point::new(0.0, 0.0));
        assert_eq!(line[18], Point::new(20.0, 0.0));
    }
}
