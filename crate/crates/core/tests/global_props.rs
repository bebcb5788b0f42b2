mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use common::{arb_frames, arb_refexp};
use situref::global::{resolve_global, scores, GlobalConfig, GlobalContext};
use situref::world::EntityId;

#[derive(Debug, Clone)]
enum Step {
    Frame(usize),
    Utter(Vec<usize>),
}

fn steps(frames: usize) -> impl Strategy<Value = Vec<Step>> {
    proptest::collection::vec(
        prop_oneof![
            (0..frames).prop_map(Step::Frame),
            proptest::collection::vec(0usize..8, 0..3).prop_map(Step::Utter),
        ],
        0..60,
    )
}

proptest! {
    #[test]
    fn saliences_follow_replay_oracle(
        (_world, frames) in arb_frames(20),
        script in steps(19),
    ) {
        let mut ctx = GlobalContext::new();
        // per entity: last seen (frame count, salience), last mention (utterance count)
        let mut seen: BTreeMap<EntityId, (u64, f64)> = BTreeMap::new();
        let mut mentioned: BTreeMap<EntityId, u64> = BTreeMap::new();
        let (mut n_frames, mut n_utts) = (0u64, 0u64);
        for step in script {
            match step {
                Step::Frame(i) => {
                    let f = &frames[i.min(frames.len() - 1)];
                    ctx.update_on_frame(f);
                    n_frames += 1;
                    for v in &f.visibles {
                        seen.insert(v.id.clone(), (n_frames, v.salience));
                    }
                }
                Step::Utter(picks) => {
                    let known: Vec<EntityId> = seen.keys().cloned().collect();
                    let ids: BTreeSet<EntityId> = if known.is_empty() {
                        BTreeSet::new()
                    } else {
                        picks.iter().map(|p| known[p % known.len()].clone()).collect()
                    };
                    ctx.update_on_utterance(&ids).unwrap();
                    n_utts += 1;
                    for id in ids {
                        mentioned.insert(id, n_utts);
                    }
                }
            }
            prop_assert_eq!(ctx.len(), seen.len());
            for (id, (at, s)) in &seen {
                let r = ctx.get(id).unwrap();
                prop_assert_eq!(r.visual_salience, s * 2f64.powi(-((n_frames - at) as i32)));
                let l = mentioned.get(id).map_or(0.0, |m| 2f64.powi(-((n_utts - m) as i32)));
                prop_assert_eq!(r.linguistic_salience, l);
                prop_assert!((0.0..=1.0).contains(&r.visual_salience));
            }
        }
    }

    #[test]
    fn argmax_invariant_under_weight_scaling(
        (_world, frames) in arb_frames(15),
        queries in proptest::collection::vec(arb_refexp(), 1..6),
        factor in 0.01..100.0f64,
    ) {
        let mut ctx = GlobalContext::new();
        let cfg = GlobalConfig::default();
        for f in &frames {
            ctx.update_on_frame(f);
        }
        for q in &queries {
            let base = scores(&ctx, q, &cfg.weights);
            let scaled = scores(&ctx, q, &cfg.weights.scaled(factor));
            if let (Some(a), Some(b)) = (base.first(), scaled.first()) {
                if a.0 != b.0 {
                    let tie = base.iter().find(|(id, _)| *id == b.0).unwrap().1;
                    prop_assert!((a.1 - tie).abs() <= 1e-12 * a.1.abs().max(1.0));
                }
            }
            resolve_global(&mut ctx, q, &cfg);
        }
    }
}
