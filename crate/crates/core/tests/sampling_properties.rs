//! Batch-level guarantees of the constrained sampler.

use symreg_core::library::TokenKind;
use symreg_core::policy::PolicyParams;
use symreg_core::rng;
use symreg_core::{sample_batch, LengthBounds, Library, PriorConfig, SoftLengthConfig};

#[test]
fn ten_thousand_episodes_stay_inside_the_length_window() {
    let lib = Library::standard(1);
    let params = PolicyParams::init(8, lib.size(), &mut rng::init_seed(123).rng());
    let priors = PriorConfig {
        equal_type: true,
        soft_length: Some(SoftLengthConfig::default()),
        bounds: Some(LengthBounds { min: 4, max: 30 }),
        no_nested_trig: false,
    };
    // An all-masked step inside sample_batch would surface as Err here.
    let batch = sample_batch(&params, &priors, &lib, 10_000, rng::step_seed(7, 1)).unwrap();
    assert_eq!(batch.len(), 10_000);
    for sample in &batch {
        let len = sample.sequence.len();
        assert!((4..=30).contains(&len), "length {len} outside window");
        assert!(sample.sequence.is_complete(&lib));
        assert!(sample.log_prob() <= 0.0);
        assert_eq!(sample.step_logprobs.len(), len);
        assert_eq!(sample.step_entropies.len(), len);
        assert!(sample.step_entropies.iter().all(|h| h.is_finite() && *h >= 0.0));
    }
    // The window is actually exercised at both ends.
    assert!(batch.iter().any(|s| s.sequence.len() == 4));
    assert!(batch.iter().any(|s| s.sequence.len() == 30));
}

#[test]
fn nested_trig_mask_blocks_trig_within_trig() {
    let lib = Library::standard(1);
    let params = PolicyParams::init(8, lib.size(), &mut rng::init_seed(5).rng());
    let priors = PriorConfig {
        equal_type: true,
        soft_length: None,
        bounds: Some(LengthBounds { min: 4, max: 30 }),
        no_nested_trig: true,
    };
    let batch = sample_batch(&params, &priors, &lib, 2_000, rng::step_seed(9, 2)).unwrap();
    let sin = lib.id_of(TokenKind::Sin).unwrap();
    let cos = lib.id_of(TokenKind::Cos).unwrap();
    let mut seen_trig = false;
    for sample in &batch {
        // Walk the prefix, tracking how many trig subtrees are unfinished.
        let mut stack: Vec<(usize, usize, bool)> = Vec::new(); // (arity, done, trig)
        for &t in sample.sequence.iter() {
            let inside = stack.iter().any(|&(_, _, trig)| trig);
            let is_trig = t == sin || t == cos;
            assert!(!(inside && is_trig), "nested trig sampled: {:?}", sample.sequence.names(&lib));
            seen_trig |= is_trig;
            stack.push((lib.arity(t), 0, is_trig));
            while let Some(&(arity, done, _)) = stack.last() {
                if arity == done {
                    stack.pop();
                    if let Some(top) = stack.last_mut() {
                        top.1 += 1;
                    } else {
                        break;
                    }
                } else {
                    break;
                }
            }
        }
    }
    // The mask restricts rather than eliminates trig usage.
    assert!(seen_trig);
}
