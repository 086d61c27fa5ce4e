//! Lossless conversion between road-network graphs and integer token
//! sequences, plus the surrounding toolkit: a quantizing BEV frame, a
//! forest transform for merge handling, three sequence codecs, an SD-map
//! prompt codec, landmark/reachability metrics, a masked iterative
//! decoding simulator with complexity accounting, and synthetic data
//! generators.

pub mod codec;
pub mod forest;
pub mod graph;
pub mod io;
pub mod iso;
pub mod metrics;
pub mod nar;
pub mod sdmap;
pub mod synth;

pub use codec::CodecError;
pub use forest::{DirectedForest, ForestError, ForestVertex, SarTreeSet, VertexCategory};
pub use graph::{BevFrame, Edge, GraphError, Path, Point, RoadNetwork, Vertex, VertexId};
pub use metrics::{MetricReport, PrPoint, PrSweep};
