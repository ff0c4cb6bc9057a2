use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssc_core::eval::{evaluate, report_to_csv, report_to_json, EvalItem};
use ssc_core::sources::corrupt::corrupt_text;
use ssc_core::sources::CorruptionKind;
use ssc_core::synth::{synth_dataset, SynthConfig};
use ssc_core::{EvalConfig, Mode, Task};

/// Synthetic items where every pool keeps at least one clean candidate.
fn items(seed: u64, per_task: usize) -> Vec<EvalItem> {
    let cfg = SynthConfig {
        instances_per_task: per_task,
        seed,
        ..SynthConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    synth_dataset(&Task::ALL, &cfg)
        .into_iter()
        .map(|item| {
            let mut pool = item.pool.to_candidates();
            let keep = rng.gen_range(0..pool.len());
            for (i, c) in pool.iter_mut().enumerate() {
                if i != keep && rng.gen_bool(0.6) {
                    c.text = corrupt_text(&c.text, CorruptionKind::Truncate, &mut rng);
                }
            }
            EvalItem {
                instance: item.instance,
                pool: Some(pool),
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ssc_is_always_valid_with_one_clean_candidate(seed in any::<u64>()) {
        let out = evaluate(&items(seed, 10), &Mode::ALL, &EvalConfig::default());
        prop_assert!(out.error.is_none());
        for (task, modes) in &out.report.tasks {
            prop_assert_eq!(modes["ssc"]["svr"], 1.0, "{}", task);
        }
        for r in &out.results {
            let exact = r.counts.map_or(true, |c| c.fp == 0 && c.fn_ == 0);
            let ok = r.valid && r.tsr != Some(false) && exact;
            // A failed instance has exactly one class; a clean one has none.
            prop_assert_eq!(r.error.is_none(), ok, "{:?}", r);
        }
    }
}

#[test]
fn reports_are_byte_stable() {
    let data = items(3, 8);
    let a = evaluate(&data, &Mode::ALL, &EvalConfig::default());
    let b = evaluate(&data, &Mode::ALL, &EvalConfig::default());
    assert_eq!(report_to_json(&a.report), report_to_json(&b.report));
    assert_eq!(report_to_csv(&a.report), report_to_csv(&b.report));
    assert!(report_to_csv(&a.report).starts_with("task,mode,metric,value\n"));
}
