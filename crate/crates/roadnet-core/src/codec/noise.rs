//! Noise padding for fixed-length denoising targets.
//!
//! A clause stream shorter than the training length is padded with
//! random grammar-shaped noise clauses. The paired target keeps the
//! real tokens, marks the end of real content with `EOS` in the first
//! noise clause's leading slot, and labels every noise clause through
//! its category slot with the `NOISE` token; all other padded positions
//! are `NA` and masked out of the loss.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::coupled::CLAUSE_LEN;
use crate::codec::vocab::{
    Token, CATEGORY_BASE, CURVE_BASE, CURVE_RANGE, EOS, INDEX_BASE, INDEX_RANGE, NA, NOISE,
};
use crate::codec::CodecError;
use crate::graph::BevFrame;

/// One denoising training sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedSample {
    /// Real clauses followed by noise clauses.
    pub input: Vec<Token>,
    /// Real tokens, then `EOS`, then `NOISE` labels on category slots.
    pub target: Vec<Token>,
    /// True wherever the target participates in the loss.
    pub mask: Vec<bool>,
}

/// Pads `real`, an encoded clause stream, out to `total_clauses`
/// clauses of seeded random noise.
pub fn pad_with_noise(
    real: &[Token],
    total_clauses: usize,
    frame: &BevFrame,
    seed: u64,
) -> Result<PaddedSample, CodecError> {
    if !real.len().is_multiple_of(CLAUSE_LEN) {
        return Err(CodecError::Truncated {
            pos: real.len(),
            expected: "a complete six-token clause",
        });
    }
    let real_clauses = real.len() / CLAUSE_LEN;
    if total_clauses < real_clauses {
        return Err(CodecError::Capacity(format!(
            "{real_clauses} real clauses exceed the {total_clauses}-clause padded length"
        )));
    }

    let (ex, ey) = frame.grid_extent();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut input = real.to_vec();
    let mut target = real.to_vec();

    for k in real_clauses..total_clauses {
        input.push(Token(rng.gen_range(0..ex as u16)));
        input.push(Token(rng.gen_range(0..ey as u16)));
        input.push(Token(rng.gen_range(CATEGORY_BASE..CATEGORY_BASE + 4)));
        input.push(Token(rng.gen_range(INDEX_BASE..INDEX_BASE + INDEX_RANGE)));
        input.push(Token(rng.gen_range(CURVE_BASE..CURVE_BASE + CURVE_RANGE)));
        input.push(Token(rng.gen_range(CURVE_BASE..CURVE_BASE + CURVE_RANGE)));

        target.push(if k == real_clauses { EOS } else { NA });
        target.push(NA);
        target.push(NOISE);
        target.push(NA);
        target.push(NA);
        target.push(NA);
    }

    let mask = target.iter().map(|&t| t != NA).collect();
    Ok(PaddedSample {
        input,
        target,
        mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::coupled::encode_coupled;
    use crate::codec::order::OrderingPolicy;
    use crate::codec::vocab::TokenKind;
    use crate::graph::{Edge, RoadNetwork, Vertex};

    fn frame() -> BevFrame {
        BevFrame::default_urban()
    }

    fn real() -> Vec<Token> {
        let mut net = RoadNetwork::new(frame());
        net.add_vertex(Vertex::new("a", -40.0, 0.0)).unwrap();
        net.add_vertex(Vertex::new("b", -20.0, 0.0)).unwrap();
        net.add_edge(Edge::new("a", "b", -30.0, 0.0));
        encode_coupled(&net, &OrderingPolicy::FrontRight).unwrap()
    }

    #[test]
    fn shapes_align_and_real_prefix_is_preserved() {
        let real = real();
        let sample = pad_with_noise(&real, 10, &frame(), 5).unwrap();
        assert_eq!(sample.input.len(), 60);
        assert_eq!(sample.target.len(), 60);
        assert_eq!(sample.mask.len(), 60);
        assert_eq!(&sample.input[..12], &real[..]);
        assert_eq!(&sample.target[..12], &real[..]);
        assert_eq!(sample.target[12], EOS);
        assert_eq!(sample.target[14], NOISE);
        for k in 3..10 {
            assert_eq!(sample.target[k * 6], NA);
            assert_eq!(sample.target[k * 6 + 2], NOISE);
        }
        for (i, &m) in sample.mask.iter().enumerate() {
            assert_eq!(m, sample.target[i] != NA);
        }
    }

    #[test]
    fn noise_clauses_are_grammar_shaped() {
        let sample = pad_with_noise(&real(), 40, &frame(), 123).unwrap();
        for k in 2..40 {
            let clause = &sample.input[k * 6..(k + 1) * 6];
            assert_eq!(clause[0].kind(), TokenKind::Coord);
            assert!(clause[0].as_coord().unwrap() < 96);
            assert_eq!(clause[1].kind(), TokenKind::Coord);
            assert!(clause[1].as_coord().unwrap() < 64);
            assert!(clause[2].as_category().is_some());
            assert_eq!(clause[3].kind(), TokenKind::Index);
            assert_eq!(clause[4].kind(), TokenKind::Curve);
            assert_eq!(clause[5].kind(), TokenKind::Curve);
        }
    }

    #[test]
    fn padding_is_seed_deterministic() {
        let real = real();
        let one = pad_with_noise(&real, 20, &frame(), 7).unwrap();
        let two = pad_with_noise(&real, 20, &frame(), 7).unwrap();
        assert_eq!(one, two);
        let other = pad_with_noise(&real, 20, &frame(), 8).unwrap();
        assert_ne!(one.input, other.input);
        assert_eq!(one.target, other.target);
    }

    #[test]
    fn exact_fit_has_no_noise_or_eos() {
        let real = real();
        let sample = pad_with_noise(&real, 2, &frame(), 0).unwrap();
        assert_eq!(sample.input, real);
        assert_eq!(sample.target, real);
        // Structural NA slots inside real clauses stay out of the loss.
        let expected: Vec<bool> = real.iter().map(|&t| t != NA).collect();
        assert_eq!(sample.mask, expected);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        let real = real();
        assert!(pad_with_noise(&real[..7], 10, &frame(), 0).is_err());
        assert!(pad_with_noise(&real, 1, &frame(), 0).is_err());
    }
}
