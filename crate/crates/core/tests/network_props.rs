use opseq_core::neural::{forward, init_params, Mode, ModelDims, TrainSettings};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_net() -> impl Strategy<Value = (ModelDims, Vec<Vec<u32>>, u64)> {
    (2usize..10, 1usize..6, 1usize..3, 1usize..6, 1usize..4, 1usize..10, any::<u64>()).prop_flat_map(
        |(vocab, embed, layers, units, b, l, seed)| {
            let dims = ModelDims::new(vocab, embed, layers, units).unwrap();
            let batch = proptest::collection::vec(proptest::collection::vec(0u32..vocab as u32, l), b);
            (Just(dims), batch, Just(seed))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_in_range_and_hidden_identity((dims, batch, seed) in arb_net(), dropout in 0.0f64..0.5) {
        let mut params = init_params::<f64>(dims, seed);
        // Scale weights up so gates visit their saturated ranges.
        for layer in &mut params.layers {
            for w in layer.w.as_mut_slice() { *w *= 4.0; }
        }
        let refs: Vec<&[u32]> = batch.iter().map(|s| s.as_slice()).collect();
        let settings = TrainSettings { dropout_out: dropout, dropout_recurrent: dropout, ..TrainSettings::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (probs, tape) = forward(&params, &refs, &settings, Mode::Train, &mut rng).unwrap();
        for p in probs {
            prop_assert!(p > 0.0 && p < 1.0);
        }
        for s in 0..tape.batch_size() {
            for layer in tape.layers(s) {
                for t in 0..layer.steps() {
                    let st = layer.state(t);
                    for gate in [st.input_gate, st.forget_gate, st.output_gate] {
                        prop_assert!(gate.iter().all(|&g| g > 0.0 && g < 1.0));
                    }
                    prop_assert!(st.candidate.iter().chain(st.tanh_c).all(|v| (-1.0..=1.0).contains(v)));
                    for k in 0..st.h.len() {
                        prop_assert_eq!(st.tanh_c[k], st.c[k].tanh());
                        prop_assert_eq!(st.h[k], st.output_gate[k] * st.c[k].tanh());
                    }
                }
            }
        }
    }

    #[test]
    fn zero_dropout_train_equals_eval((dims, batch, seed) in arb_net()) {
        let params = init_params::<f32>(dims, seed);
        let refs: Vec<&[u32]> = batch.iter().map(|s| s.as_slice()).collect();
        let settings = TrainSettings::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, _) = forward(&params, &refs, &settings, Mode::Train, &mut rng).unwrap();
        let (b, _) = forward(&params, &refs, &settings, Mode::Eval, &mut rng).unwrap();
        prop_assert_eq!(a, b);
    }
}

/// Inverted dropout leaves every activation unchanged in expectation: the
/// Monte-Carlo mean of each mask entry is 1 within three standard errors.
#[test]
fn dropout_masks_have_unit_expectation() {
    let dims = ModelDims::new(5, 3, 2, 4).unwrap();
    let params = init_params::<f64>(dims, 3);
    let batch: Vec<&[u32]> = vec![&[1, 2, 3, 4, 0, 1]];
    for p in [0.1, 0.3] {
        let settings = TrainSettings { dropout_out: p, dropout_recurrent: p, ..TrainSettings::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut rec, mut out) = (Vec::new(), Vec::new());
        for _ in 0..4000 {
            let (_, tape) = forward(&params, &batch, &settings, Mode::Train, &mut rng).unwrap();
            for layer in tape.layers(0) {
                rec.extend_from_slice(layer.rec_mask().unwrap());
                out.extend_from_slice(layer.out_mask().unwrap());
            }
        }
        let scale = 1.0 / (1.0 - p);
        for draws in [&rec, &out] {
            assert!(draws.iter().all(|&m| m == 0.0 || (m - scale).abs() < 1e-12));
            let n = draws.len() as f64;
            let mean = draws.iter().sum::<f64>() / n;
            let se = (p / (1.0 - p)).sqrt() / n.sqrt();
            assert!((mean - 1.0).abs() < 3.0 * se, "p={p}: mean {mean}, 3se {}", 3.0 * se);
        }
    }
}

#[test]
fn eval_mode_draws_no_masks() {
    let dims = ModelDims::new(4, 2, 2, 3).unwrap();
    let params = init_params::<f64>(dims, 0);
    let settings = TrainSettings { dropout_out: 0.3, dropout_recurrent: 0.3, ..TrainSettings::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (_, tape) = forward(&params, &[&[1, 2, 3]], &settings, Mode::Eval, &mut rng).unwrap();
    assert!(tape.layers(0).iter().all(|l| l.rec_mask().is_none() && l.out_mask().is_none()));
}
