//! Property tests over the seeded generator: every structural claim
//! the formats make must hold for arbitrary cap-respecting networks.

use proptest::prelude::*;

use roadnet_core::codec::coupled::{clause_count, decode_coupled, encode_coupled, CLAUSE_LEN};
use roadnet_core::codec::decoupled::{decode_decoupled, encode_decoupled};
use roadnet_core::codec::noise::pad_with_noise;
use roadnet_core::codec::order::OrderingPolicy;
use roadnet_core::codec::sar::{decode_sar, encode_sar, KeyPointPrompt, SAR_ROWS, SAR_ROW_LEN};
use roadnet_core::codec::vocab::{self, Token, EOS, NA, NOISE};
use roadnet_core::forest::to_forest;
use roadnet_core::io;
use roadnet_core::iso::explain_mismatch;
use roadnet_core::sdmap::{cyclic_to_dag, decode_sdmap, encode_sdmap, prompt_concat, split_prompt};
use roadnet_core::synth::{generate, generate_sdmap, GenConfig};
use roadnet_core::{RoadNetwork, VertexId};

fn net_for(seed: u64) -> RoadNetwork {
    generate(seed, &GenConfig::default())
}

fn policies(seed: u64) -> [OrderingPolicy; 2] {
    [OrderingPolicy::FrontRight, OrderingPolicy::Random { seed }]
}

proptest! {
    #[test]
    fn coupled_roundtrips_under_any_policy(seed: u64, pseed: u64) {
        let net = net_for(seed);
        for policy in policies(pseed) {
            let tokens = encode_coupled(&net, &policy).unwrap();
            prop_assert_eq!(tokens.len() % CLAUSE_LEN, 0);
            let back = decode_coupled(&tokens, net.frame()).unwrap();
            prop_assert_eq!(explain_mismatch(&net, &back).unwrap(), None);
        }
    }

    #[test]
    fn decoupled_roundtrips_with_exact_length(seed: u64, pseed: u64) {
        let net = net_for(seed);
        for policy in policies(pseed) {
            let tokens = encode_decoupled(&net, &policy).unwrap();
            prop_assert_eq!(
                tokens.len(),
                3 + 3 * net.vertices().len() + 3 * net.edges().len()
            );
            let back = decode_decoupled(&tokens, net.frame()).unwrap();
            prop_assert_eq!(explain_mismatch(&net, &back).unwrap(), None);
        }
    }

    #[test]
    fn row_split_roundtrips_within_shape(seed: u64, pseed: u64) {
        let net = net_for(seed);
        for policy in policies(pseed) {
            let seq = encode_sar(&net, &policy).unwrap();
            prop_assert_eq!(seq.rows().len(), SAR_ROWS);
            prop_assert!(seq.rows().iter().all(|r| r.len() == SAR_ROW_LEN));
            prop_assert_eq!(seq.payload_rows(), net.key_points().len());
            let back = decode_sar(&seq, net.frame()).unwrap();
            prop_assert_eq!(explain_mismatch(&net, &back).unwrap(), None);
        }
    }

    #[test]
    fn clause_and_clone_counts_obey_the_laws(seed: u64) {
        let net = net_for(seed);
        let (in_deg, _) = net.degrees();
        let roots = in_deg.iter().filter(|&&d| d == 0).count();
        let tokens = encode_coupled(&net, &OrderingPolicy::FrontRight).unwrap();
        prop_assert_eq!(clause_count(&tokens), net.edges().len() + roots);

        let forest = to_forest(&net, &OrderingPolicy::FrontRight).unwrap();
        let expected: usize = in_deg.iter().map(|&d| d.saturating_sub(1)).sum();
        prop_assert_eq!(forest.clone_count(), expected);
    }

    #[test]
    fn every_emitted_token_stays_in_its_slot_range(seed: u64) {
        let net = net_for(seed);
        let tokens = encode_coupled(&net, &OrderingPolicy::FrontRight).unwrap();
        let (ex, ey) = net.frame().grid_extent();
        for (i, t) in tokens.iter().enumerate() {
            let ok = match i % CLAUSE_LEN {
                0 => t.as_coord().is_some_and(|c| u32::from(c) < ex),
                1 => t.as_coord().is_some_and(|c| u32::from(c) < ey),
                2 => t.as_category().is_some(),
                3 => *t == NA || t.as_index().is_some(),
                _ => *t == NA || t.as_curve_bin().is_some(),
            };
            prop_assert!(ok, "token {t:?} out of range for slot {}", i % CLAUSE_LEN);
        }
    }

    #[test]
    fn noise_padding_keeps_the_training_contract(seed: u64, extra in 0usize..20) {
        let net = net_for(seed);
        let real = encode_coupled(&net, &OrderingPolicy::FrontRight).unwrap();
        let real_clauses = clause_count(&real);
        let total = real_clauses + extra;
        let sample = pad_with_noise(&real, total, net.frame(), seed).unwrap();
        prop_assert_eq!(sample.input.len(), total * CLAUSE_LEN);
        prop_assert_eq!(sample.target.len(), sample.input.len());
        prop_assert_eq!(sample.mask.len(), sample.input.len());
        prop_assert_eq!(&sample.input[..real.len()], &real[..]);
        prop_assert_eq!(&sample.target[..real.len()], &real[..]);
        for (i, &t) in sample.target.iter().enumerate() {
            prop_assert_eq!(sample.mask[i], t != NA);
        }
        if extra > 0 {
            prop_assert_eq!(sample.target[real.len()], EOS);
            for k in real_clauses..total {
                prop_assert_eq!(sample.target[k * CLAUSE_LEN + 2], NOISE);
            }
        } else {
            prop_assert_eq!(&sample.input[..], &sample.target[..]);
        }
    }

    #[test]
    fn interchange_roundtrips_all_carriers(seed: u64) {
        let net = net_for(seed);
        let back = io::read_network(&io::write_network(&net), true).unwrap();
        prop_assert_eq!(back.vertices(), net.vertices());
        prop_assert_eq!(back.edges(), net.edges());

        let flat = encode_coupled(&net, &OrderingPolicy::FrontRight).unwrap();
        prop_assert_eq!(io::parse_tokens(&io::format_tokens(&flat)).unwrap(), flat.clone());

        let seq = encode_sar(&net, &OrderingPolicy::FrontRight).unwrap();
        let reread = io::parse_sar(&io::format_sar(&seq)).unwrap();
        prop_assert_eq!(reread.rows(), seq.rows());

        let mut bin = Vec::new();
        io::write_token_bin(&mut bin, std::slice::from_ref(&flat)).unwrap();
        io::write_token_bin(&mut bin, seq.rows()).unwrap();
        let mut cursor = std::io::Cursor::new(bin);
        prop_assert_eq!(io::read_token_bin(&mut cursor).unwrap().unwrap(), vec![flat]);
        prop_assert_eq!(io::read_token_bin(&mut cursor).unwrap().unwrap(), seq.rows().to_vec());
        prop_assert!(io::read_token_bin(&mut cursor).unwrap().is_none());
    }

    #[test]
    fn row_prompts_quote_the_key_point_grid(seed: u64) {
        let net = net_for(seed);
        let seq = encode_sar(&net, &OrderingPolicy::FrontRight).unwrap();
        let prompt = KeyPointPrompt::from_sequence(&seq).unwrap();
        prop_assert_eq!(prompt.key_point_count(), net.key_points().len());
        for i in 0..prompt.key_point_count() {
            let row = prompt.row_prompt(i);
            prop_assert_eq!(row.len(), 2 * prompt.key_point_count() + 2);
            let (x, y) = prompt.cells()[i];
            prop_assert_eq!(&row[row.len() - 2..], &[Token(x), Token(y)][..]);
        }
    }

    #[test]
    fn sd_maps_flatten_losslessly(seed: u64, pseed: u64) {
        let map = generate_sdmap(seed, &GenConfig::default());
        for policy in policies(pseed) {
            let (forest, dups) = cyclic_to_dag(&map, &policy);
            prop_assert_eq!(forest.regular_count(), map.nodes().len());
            let tree_edges =
                forest.vertices().iter().filter(|v| v.parent.is_some()).count();
            prop_assert_eq!(tree_edges, map.links().len());
            prop_assert_eq!(forest.clone_count(), dups.len());

            let tokens = encode_sdmap(&map, &policy).unwrap();
            let back = decode_sdmap(&tokens, map.frame()).unwrap();
            prop_assert_eq!(link_cells(&back), link_cells(&map));
        }
    }

    #[test]
    fn prompt_concatenation_splits_back(seed: u64) {
        let map = generate_sdmap(seed, &GenConfig::default());
        let net = net_for(seed);
        let prompt = encode_sdmap(&map, &OrderingPolicy::FrontRight).unwrap();
        let main = encode_coupled(&net, &OrderingPolicy::FrontRight).unwrap();
        let joined = prompt_concat(&prompt, &main);
        prop_assert_eq!(joined.len(), prompt.len() + main.len() + 2);
        prop_assert_eq!(joined[0], vocab::START);
        let (p, m) = split_prompt(&joined).unwrap();
        prop_assert_eq!(p, &prompt[..]);
        prop_assert_eq!(m, &main[..]);
    }
}

fn link_cells(map: &roadnet_core::sdmap::SdMap) -> Vec<((u16, u16), (u16, u16))> {
    let frame = map.frame();
    let cell = |id: &VertexId| {
        let v = &map.nodes()[map.node_index(id).unwrap()];
        frame.quantize(v.point()).unwrap()
    };
    let mut cells: Vec<_> = map
        .links()
        .iter()
        .map(|(s, t)| (cell(s), cell(t)))
        .collect();
    cells.sort_unstable();
    cells
}
