//! Deterministic ordering of sibling vertices, tree roots, and merge
//! parents. The coordinate policy sorts by distance to the frame's
//! front-right corner `(x_max, y_min)`; the random policy shuffles with a
//! fixed seed. Either way the result is reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{BevFrame, Point};

/// How competing traversal choices are broken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderingPolicy {
    /// Ascending distance to the front-right frame corner, ties broken by
    /// x, then y, then id.
    #[default]
    FrontRight,
    /// Seeded shuffle; the same seed always yields the same order.
    Random { seed: u64 },
}

impl OrderingPolicy {
    pub fn orderer(&self, frame: &BevFrame) -> Orderer {
        Orderer {
            corner: Point::new(frame.x_max, frame.y_min),
            rng: match self {
                OrderingPolicy::FrontRight => None,
                OrderingPolicy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
            },
        }
    }
}

/// Stateful comparator produced by [`OrderingPolicy::orderer`].
///
/// One orderer should drive one whole traversal; under the random policy
/// successive calls consume the shuffle stream, which keeps distinct call
/// sites decorrelated while the full pass stays deterministic.
pub struct Orderer {
    corner: Point,
    rng: Option<ChaCha8Rng>,
}

impl Orderer {
    /// Orders `items` in place; `key` exposes each item's location and
    /// id-like tie breaker.
    pub fn order<T, K, F>(&mut self, items: &mut [T], key: F)
    where
        K: Ord,
        F: Fn(&T) -> (Point, K),
    {
        match &mut self.rng {
            None => {
                let corner = self.corner;
                items.sort_by(|a, b| {
                    let (pa, ia) = key(a);
                    let (pb, ib) = key(b);
                    let da = (pa.x - corner.x).powi(2) + (pa.y - corner.y).powi(2);
                    let db = (pb.x - corner.x).powi(2) + (pb.y - corner.y).powi(2);
                    da.total_cmp(&db)
                        .then(pa.x.total_cmp(&pb.x))
                        .then(pa.y.total_cmp(&pb.y))
                        .then(ia.cmp(&ib))
                });
            }
            Some(rng) => {
                for i in (1..items.len()).rev() {
                    let j = rng.gen_range(0..=i);
                    items.swap(i, j);
                }
            }
        }
    }
}
