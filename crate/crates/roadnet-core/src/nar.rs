//! Iterative masked refinement over row-split sequences, with a
//! token-step cost model comparing the three decoding schedules.
//!
//! The simulator reproduces mask-predict decoding: start from a fully
//! masked sequence, let a predictor fill every masked position in
//! parallel, keep the most confident answers, re-mask the rest, and
//! repeat. With `n_iter` iterations, iteration `k` (1-based) re-masks
//! the `floor(N * (n_iter - k) / n_iter)` lowest-confidence positions
//! of the `N` predictable ones, so the final iteration leaves nothing
//! masked. Ties re-mask the later position first. Predictable positions
//! are exactly the non-padding tokens of the target sequence.
//!
//! The cost model counts sequential token steps with `ALPHA` tokens per
//! clause and `C = edges + key_points` payload clauses (each non-root
//! clause consumes one edge, so the identity is exact):
//!
//! * one-token-at-a-time decoding emits the whole payload serially:
//!   `ar = ALPHA * C`;
//! * row-parallel decoding runs the `kp` rows simultaneously, each row
//!   serially, so the balanced per-row cost is `sar = ALPHA * C / kp`;
//! * masked refinement emits every position in parallel once per pass
//!   and needs `n_iter + 1` passes (the extra pass reads the prompt),
//!   `nar = ALPHA * (n_iter + 1)`.
//!
//! A five-edge chain has one key point, so row-parallelism buys nothing
//! (`sar = ar = 36`), yet three refinement iterations cost `6 * 4 = 24`
//! steps: refinement acceleration `(1 + |E|/kp) / (n_iter + 1) = 1.5`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codec::sar::{KeyPointPrompt, SarSequence};
use crate::codec::vocab::{Token, NA, VOCAB_SIZE};
use crate::codec::CodecError;
use crate::graph::RoadNetwork;

pub const ALPHA: f64 = 6.0;

/// Proposes tokens for masked positions of a working sequence.
///
/// `tokens` is the full flat row-major buffer with masked positions
/// holding [`NA`]; `masked` lists those positions in ascending order.
/// The return value gives `(token, confidence)` per masked position,
/// in the same order.
pub trait Predictor {
    fn predict(
        &mut self,
        tokens: &[Token],
        masked: &[usize],
        prompt: &KeyPointPrompt,
    ) -> Vec<(Token, f64)>;
}

/// Always answers with the target token at full confidence.
pub struct PerfectOracle<'a> {
    gt: &'a [Token],
}

impl<'a> PerfectOracle<'a> {
    pub fn new(gt: &'a [Token]) -> Self {
        PerfectOracle { gt }
    }
}

impl Predictor for PerfectOracle<'_> {
    fn predict(&mut self, _: &[Token], masked: &[usize], _: &KeyPointPrompt) -> Vec<(Token, f64)> {
        masked.iter().map(|&i| (self.gt[i], 1.0)).collect()
    }
}

/// Calibrated noisy predictor: each answer draws a quality
/// `q ~ U(0.4, 1.0)`, is correct with probability `q`, and reports `q`
/// as its confidence, so keeping high-confidence answers keeps mostly
/// correct ones.
pub struct NoisyOracle<'a> {
    gt: &'a [Token],
    rng: ChaCha8Rng,
}

impl<'a> NoisyOracle<'a> {
    pub fn new(gt: &'a [Token], seed: u64) -> Self {
        NoisyOracle {
            gt,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Predictor for NoisyOracle<'_> {
    fn predict(&mut self, _: &[Token], masked: &[usize], _: &KeyPointPrompt) -> Vec<(Token, f64)> {
        masked
            .iter()
            .map(|&i| {
                let q = self.rng.gen_range(0.4..1.0);
                let token = if self.rng.gen_bool(q) {
                    self.gt[i]
                } else {
                    let mut t = self.rng.gen_range(0..VOCAB_SIZE);
                    if Token(t) == self.gt[i] {
                        t = (t + 1) % VOCAB_SIZE;
                    }
                    Token(t)
                };
                (token, q)
            })
            .collect()
    }
}

/// Always answers a wrong token at full confidence, so refinement can
/// never recover.
pub struct AdversarialOracle<'a> {
    gt: &'a [Token],
}

impl<'a> AdversarialOracle<'a> {
    pub fn new(gt: &'a [Token]) -> Self {
        AdversarialOracle { gt }
    }
}

impl Predictor for AdversarialOracle<'_> {
    fn predict(&mut self, _: &[Token], masked: &[usize], _: &KeyPointPrompt) -> Vec<(Token, f64)> {
        masked
            .iter()
            .map(|&i| (Token((self.gt[i].0 + 1) % VOCAB_SIZE), 1.0))
            .collect()
    }
}

/// Flat positions of a sequence a predictor is asked to produce:
/// everything except padding.
pub fn valid_positions(seq: &SarSequence) -> Vec<usize> {
    seq.flat()
        .iter()
        .enumerate()
        .filter(|&(_, &t)| t != NA)
        .map(|(i, _)| i)
        .collect()
}

/// Uniformly samples `floor(ratio * N)` of the `N` predictable
/// positions, for building training examples. Ascending, deterministic
/// in the seed.
pub fn mask_for_training(seq: &SarSequence, ratio: f64, seed: u64) -> Vec<usize> {
    assert!(
        (0.0..=1.0).contains(&ratio),
        "mask ratio {ratio} outside [0, 1]"
    );
    let mut idx = valid_positions(seq);
    let count = (ratio * idx.len() as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let j = rng.gen_range(i..idx.len());
        idx.swap(i, j);
    }
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

/// One refinement pass as recorded in a [`DecodeTrace`].
#[derive(Debug, Clone, PartialEq)]
pub struct IterationSnapshot {
    /// Positions predicted in this pass.
    pub predicted: usize,
    /// Positions re-masked after this pass.
    pub remasked: usize,
    /// Fraction of predictable positions matching the target after
    /// this pass, before re-masking.
    pub accuracy: f64,
}

/// Full record of one simulated decode.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeTrace {
    pub n_iter: usize,
    pub valid_positions: usize,
    pub iterations: Vec<IterationSnapshot>,
    /// Final flat buffer, including padding.
    pub tokens: Vec<Token>,
    pub accuracy: f64,
    pub exact: bool,
}

/// Runs mask-predict decoding of `gt` for `n_iter` iterations,
/// conditioning the predictor on the key-point prompt derived from it.
pub fn iterative_decode(
    predictor: &mut dyn Predictor,
    gt: &SarSequence,
    n_iter: usize,
) -> Result<DecodeTrace, CodecError> {
    assert!(n_iter >= 1, "decoding needs at least one iteration");
    let prompt = KeyPointPrompt::from_sequence(gt)?;
    let target = gt.flat();
    let valid = valid_positions(gt);
    let n = valid.len();

    let mut buf = target.clone();
    for &i in &valid {
        buf[i] = NA;
    }
    let mut conf = vec![0.0f64; buf.len()];
    let mut masked = valid.clone();
    let mut iterations = Vec::with_capacity(n_iter);

    for k in 1..=n_iter {
        let proposals = predictor.predict(&buf, &masked, &prompt);
        assert_eq!(
            proposals.len(),
            masked.len(),
            "predictor answered a different shape"
        );
        for (&i, &(token, c)) in masked.iter().zip(&proposals) {
            buf[i] = token;
            conf[i] = c;
        }
        let accuracy = if n == 0 {
            1.0
        } else {
            valid.iter().filter(|&&i| buf[i] == target[i]).count() as f64 / n as f64
        };
        let remask = n * (n_iter - k) / n_iter;
        let mut order = valid.clone();
        order.sort_by(|&a, &b| conf[a].total_cmp(&conf[b]).then(b.cmp(&a)));
        order.truncate(remask);
        order.sort_unstable();
        for &i in &order {
            buf[i] = NA;
        }
        iterations.push(IterationSnapshot {
            predicted: masked.len(),
            remasked: remask,
            accuracy,
        });
        masked = order;
    }

    let accuracy = iterations.last().map(|s| s.accuracy).unwrap_or(1.0);
    let exact = buf == target;
    Ok(DecodeTrace {
        n_iter,
        valid_positions: n,
        iterations,
        tokens: buf,
        accuracy,
        exact,
    })
}

/// Sequential token-step costs of the three decoding schedules for one
/// network, plus their ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub edges: usize,
    pub key_points: usize,
    pub clauses: usize,
    pub n_iter: usize,
    pub ar_token_steps: f64,
    pub sar_token_steps: f64,
    pub nar_token_steps: f64,
    /// `ar / sar`: row-parallelism speedup, exactly the key-point count.
    pub sar_acceleration: f64,
    /// `sar / nar`: refinement speedup over row-parallel decoding.
    pub nar_acceleration: f64,
}

/// Cost model for decoding `net` with `n_iter` refinement iterations.
/// An empty network reports zero everywhere.
pub fn complexity_report(net: &RoadNetwork, n_iter: usize) -> ComplexityReport {
    let edges = net.edges().len();
    let key_points = net.key_points().len();
    let clauses = edges + key_points;
    if clauses == 0 {
        return ComplexityReport {
            edges,
            key_points,
            clauses,
            n_iter,
            ar_token_steps: 0.0,
            sar_token_steps: 0.0,
            nar_token_steps: 0.0,
            sar_acceleration: 0.0,
            nar_acceleration: 0.0,
        };
    }
    let ar = ALPHA * clauses as f64;
    let sar = ar / key_points as f64;
    let nar = ALPHA * (n_iter + 1) as f64;
    ComplexityReport {
        edges,
        key_points,
        clauses,
        n_iter,
        ar_token_steps: ar,
        sar_token_steps: sar,
        nar_token_steps: nar,
        sar_acceleration: key_points as f64,
        nar_acceleration: sar / nar,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::order::OrderingPolicy;
    use crate::codec::sar::encode_sar;
    use crate::graph::{BevFrame, Edge, Vertex};

    fn merge_net() -> RoadNetwork {
        let mut net = RoadNetwork::new(BevFrame::default_urban());
        net.add_vertex(Vertex::new("a", -20.0, 0.0)).unwrap();
        net.add_vertex(Vertex::new("b", -10.0, 10.0)).unwrap();
        net.add_vertex(Vertex::new("c", 0.0, 5.0)).unwrap();
        net.add_vertex(Vertex::new("d", 10.0, 5.0)).unwrap();
        net.add_edge(Edge::new("a", "c", -10.0, 2.5));
        net.add_edge(Edge::new("b", "c", -5.0, 7.5));
        net.add_edge(Edge::new("c", "d", 5.0, 5.0));
        net
    }

    fn merge_seq() -> SarSequence {
        encode_sar(&merge_net(), &OrderingPolicy::FrontRight).unwrap()
    }

    fn chain_net(edges: usize) -> RoadNetwork {
        let mut net = RoadNetwork::new(BevFrame::default_urban());
        for i in 0..=edges {
            let x = -40.0 + 10.0 * i as f64;
            net.add_vertex(Vertex::new(format!("v{i}"), x, 0.0))
                .unwrap();
        }
        for i in 0..edges {
            let x = -35.0 + 10.0 * i as f64;
            net.add_edge(Edge::new(format!("v{i}"), format!("v{}", i + 1), x, 0.0));
        }
        net
    }

    #[test]
    fn chain_complexity_matches_hand_numbers() {
        let report = complexity_report(&chain_net(5), 3);
        assert_eq!(report.edges, 5);
        assert_eq!(report.key_points, 1);
        assert_eq!(report.clauses, 6);
        assert_eq!(report.ar_token_steps, 36.0);
        assert_eq!(report.sar_token_steps, 36.0);
        assert_eq!(report.nar_token_steps, 24.0);
        assert_eq!(report.sar_acceleration, 1.0);
        assert_eq!(report.nar_acceleration, 1.5);
    }

    #[test]
    fn clause_identity_matches_the_encoder() {
        let net = merge_net();
        let seq = merge_seq();
        let clauses: usize = (0..seq.payload_rows()).map(|r| seq.row_clauses(r)).sum();
        let report = complexity_report(&net, 3);
        assert_eq!(report.clauses, clauses);
        assert_eq!(report.key_points, 3);
        assert_eq!(report.clauses, 6);
    }

    #[test]
    fn empty_network_reports_zero() {
        let net = RoadNetwork::new(BevFrame::default_urban());
        let report = complexity_report(&net, 4);
        assert_eq!(report.ar_token_steps, 0.0);
        assert_eq!(report.nar_acceleration, 0.0);
    }

    #[test]
    fn merge_sequence_has_26_predictable_positions() {
        // Three Ancestor clauses carry 3 real tokens each, two Clone
        // clauses 6, the Lineal clause 5.
        assert_eq!(valid_positions(&merge_seq()).len(), 26);
    }

    #[test]
    fn perfect_oracle_is_exact_with_the_frozen_schedule() {
        let seq = merge_seq();
        let target = seq.flat();
        let mut oracle = PerfectOracle::new(&target);
        let trace = iterative_decode(&mut oracle, &seq, 3).unwrap();
        assert!(trace.exact);
        assert_eq!(trace.accuracy, 1.0);
        let shape: Vec<(usize, usize)> = trace
            .iterations
            .iter()
            .map(|s| (s.predicted, s.remasked))
            .collect();
        assert_eq!(shape, vec![(26, 17), (17, 8), (8, 0)]);
        for s in &trace.iterations {
            assert_eq!(s.accuracy, 1.0);
        }
        assert_eq!(trace.tokens, target);
    }

    #[test]
    fn adversarial_oracle_gets_everything_wrong() {
        let seq = merge_seq();
        let target = seq.flat();
        let mut oracle = AdversarialOracle::new(&target);
        let trace = iterative_decode(&mut oracle, &seq, 4).unwrap();
        assert!(!trace.exact);
        assert_eq!(trace.accuracy, 0.0);
    }

    #[test]
    fn refinement_beats_a_single_pass_for_the_noisy_oracle() {
        let seq = merge_seq();
        let target = seq.flat();
        let single: f64 = (0..40)
            .map(|s| {
                let mut oracle = NoisyOracle::new(&target, s);
                iterative_decode(&mut oracle, &seq, 1).unwrap().accuracy
            })
            .sum::<f64>()
            / 40.0;
        let refined: f64 = (0..40)
            .map(|s| {
                let mut oracle = NoisyOracle::new(&target, s);
                iterative_decode(&mut oracle, &seq, 8).unwrap().accuracy
            })
            .sum::<f64>()
            / 40.0;
        assert!(
            refined > single + 0.1,
            "expected clear improvement, got {single:.3} -> {refined:.3}"
        );
    }

    #[test]
    fn traces_are_deterministic_in_the_seed() {
        let seq = merge_seq();
        let target = seq.flat();
        let run = || {
            let mut oracle = NoisyOracle::new(&target, 7);
            iterative_decode(&mut oracle, &seq, 5).unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn empty_sequence_decodes_vacuously() {
        let seq = SarSequence::from_rows(Vec::new()).unwrap();
        let target = seq.flat();
        let mut oracle = PerfectOracle::new(&target);
        let trace = iterative_decode(&mut oracle, &seq, 2).unwrap();
        assert!(trace.exact);
        assert_eq!(trace.accuracy, 1.0);
        assert_eq!(trace.valid_positions, 0);
    }

    #[test]
    fn training_masks_are_sized_sorted_and_deterministic() {
        let seq = merge_seq();
        let half = mask_for_training(&seq, 0.5, 11);
        assert_eq!(half.len(), 13);
        assert!(half.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(half, mask_for_training(&seq, 0.5, 11));
        assert_ne!(half, mask_for_training(&seq, 0.5, 12));
        let flat = seq.flat();
        assert!(half.iter().all(|&i| flat[i] != NA));
        assert_eq!(mask_for_training(&seq, 1.0, 3).len(), 26);
        assert!(mask_for_training(&seq, 0.0, 3).is_empty());
    }
}
