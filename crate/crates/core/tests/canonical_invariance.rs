use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssc_core::schema::action_seq::ActionProgram;
use ssc_core::schema::{gi, sd};
use ssc_core::synth::*;
use ssc_core::{Canonicalizer, CanonicalSignature, Task, TaskCanonicalizer};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sig(c: &TaskCanonicalizer<'_>, text: &str) -> String {
    match c.canonicalize(text) {
        CanonicalSignature::Valid(s) => s.as_str().to_string(),
        CanonicalSignature::Invalid(r) => panic!("invalid: {r:?}\n{text}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn goal_specs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let scene = synth_scene(&mut r);
        let spec = random_goal_spec(&scene, &mut r);
        let c = TaskCanonicalizer::new(Task::GoalInterpretation).with_scene(Some(&scene));
        let base = sig(&c, &gi::to_json(&spec));
        for _ in 0..3 {
            prop_assert_eq!(&sig(&c, &render_goal_spec(&spec, &mut r)), &base);
        }
    }

    #[test]
    fn subgoal_plans(seed in any::<u64>()) {
        let mut r = rng(seed);
        let scene = synth_scene(&mut r);
        let plan = random_subgoal_plan(&scene, &mut r);
        let c = TaskCanonicalizer::new(Task::SubgoalDecomposition).with_scene(Some(&scene));
        let base = sig(&c, &sd::to_json(&plan));
        for _ in 0..3 {
            prop_assert_eq!(&sig(&c, &render_subgoal_plan(&plan, &mut r)), &base);
        }
        // Lines are ordered in time.
        let mut swapped = plan.clone();
        swapped.lines.swap(0, 1);
        prop_assert_ne!(sig(&c, &sd::to_json(&swapped)), base);
    }

    #[test]
    fn action_sets(seed in any::<u64>()) {
        let mut r = rng(seed);
        let set = random_action_set(&mut r);
        let c = TaskCanonicalizer::new(Task::TransitionModeling);
        let base = sig(&c, &ssc_core::tm::pretty_print(&set));
        for _ in 0..3 {
            prop_assert_eq!(&sig(&c, &render_action_set(&set, &mut r)), &base);
        }
    }

    #[test]
    fn programs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let scene = synth_scene(&mut r);
        let (prog, _) = random_program(&scene, &mut r);
        let c = TaskCanonicalizer::new(Task::ActionSequencing).with_scene(Some(&scene));
        let compact = render_program(&prog);
        let base = sig(&c, &compact);
        let pretty: ssc_core::json::JsonValue = serde_json::from_str(&compact).unwrap();
        let fenced = format!("```json\n{}\n```", serde_json::to_string_pretty(&pretty).unwrap());
        prop_assert_eq!(&sig(&c, &fenced), &base);
        // Step order is meaningful.
        let mut steps = prog.steps.clone();
        steps.shuffle(&mut r);
        if steps != prog.steps {
            let shuffled = render_program(&ActionProgram { steps });
            if let CanonicalSignature::Valid(s) = c.canonicalize(&shuffled) {
                prop_assert_ne!(s.as_str(), base.as_str());
            }
        }
    }
}
