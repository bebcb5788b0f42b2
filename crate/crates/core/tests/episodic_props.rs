mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use common::{arb_frame, arb_frames, arb_refexp, filtered_sorted, vocab};
use situref::episodic::{
    add_partition, build_reference_domain, resolve_episodic, restructure, BufferKind, Criterion, EpisodicConfig,
    EpisodicState, FifoBuffer, ReferenceDomain,
};
use situref::refexp::{parse_refexp, Restrictions};
use situref::world::{Frame, Visible};
use situref::Outcome;

fn pairs(d: &ReferenceDomain, c: &Criterion) -> Vec<(String, f64)> {
    d.partition(c)
        .map(|p| p.elements.iter().map(|(id, s)| (id.0.clone(), *s)).collect())
        .unwrap_or_default()
}

fn restrictions() -> impl Strategy<Value = Restrictions> {
    (
        proptest::option::of(proptest::sample::select(common::NOUNS.to_vec())),
        proptest::option::of(proptest::sample::select(common::COLOURS.to_vec())),
    )
        .prop_filter("at least one field", |(t, c)| t.is_some() || c.is_some())
        .prop_map(|(t, c)| Restrictions {
            type_label: t.map(str::to_string),
            colour: c.map(str::to_string),
            ..Restrictions::default()
        })
}

proptest! {
    #[test]
    fn domain_partitions_match_filter_oracle(frame in arb_frame()) {
        let d = build_reference_domain(&frame);
        prop_assert_eq!(pairs(&d, &Criterion::Object), filtered_sorted(&frame, |_, _| true));
        let types: BTreeSet<&str> = frame.visibles.iter().map(|v| v.type_label.as_str()).collect();
        let colours: BTreeSet<&str> = frame.visibles.iter().map(|v| v.colour.as_str()).collect();
        prop_assert_eq!(d.partitions.len(), 1 + types.len() + colours.len());
        for t in &types {
            prop_assert_eq!(pairs(&d, &Criterion::Type(t.to_string())), filtered_sorted(&frame, |ty, _| ty == *t));
        }
        for c in &colours {
            prop_assert_eq!(pairs(&d, &Criterion::Colour(c.to_string())), filtered_sorted(&frame, |_, co| co == *c));
        }
        for p in &d.partitions {
            prop_assert!(p.is_sorted());
            for (id, _) in &p.elements {
                prop_assert!(d.object().contains(id));
            }
        }
    }

    #[test]
    fn add_partition_filters_sorts_and_is_idempotent(frame in arb_frame(), r in restrictions()) {
        let d = build_reference_domain(&frame);
        let once = add_partition(&d, &r);
        let crit = Criterion::for_restrictions(&r);
        let expected = filtered_sorted(&frame, |t, c| {
            r.type_label.as_deref().is_none_or(|x| x == t) && r.colour.as_deref().is_none_or(|x| x == c)
        });
        prop_assert_eq!(pairs(&once, &crit), expected);
        prop_assert_eq!(&add_partition(&once, &r), &once);
        prop_assert!(once.partitions.iter().all(|p| p.is_sorted()));
    }

    #[test]
    fn fifo_respects_capacity_and_order(
        cap in 1usize..8,
        frames in proptest::collection::vec(0u64..3, 0..30),
    ) {
        let mut perceptual = FifoBuffer::new(BufferKind::Perceptual, cap);
        let mut discourse = FifoBuffer::new(BufferKind::Discourse, cap);
        let mut index = 0;
        let mut pushed = Vec::new();
        for gap in frames {
            index += gap + 1;
            let empty = Frame { index, time_s: 0.0, visibles: Vec::new() };
            perceptual.push(build_reference_domain(&empty));
            discourse.push(build_reference_domain(&empty));
            pushed.push(index);
            prop_assert!(perceptual.len() <= cap && discourse.len() <= cap);
        }
        let kept: Vec<u64> = pushed.iter().rev().take(cap).rev().cloned().collect();
        let p: Vec<u64> = perceptual.oldest_first().map(|d| d.frame_index).collect();
        let q: Vec<u64> = discourse.oldest_first().map(|d| d.frame_index).collect();
        prop_assert_eq!(&p, &kept);
        prop_assert_eq!(&q, &kept);
    }

    #[test]
    fn resolution_copies_and_grows_discourse_by_one(
        (_world, frames) in arb_frames(25),
        queries in proptest::collection::vec(arb_refexp(), 1..8),
        cap in 1usize..6,
    ) {
        let mut st = EpisodicState::new(EpisodicConfig { capacity: cap, discourse_capacity: cap, delta_amb: 0.05 });
        for f in &frames {
            st.observe_frame(f);
        }
        for q in &queries {
            let before = st.clone();
            let r = resolve_episodic(&mut st, q);
            prop_assert_eq!(&st.perceptual, &before.perceptual);
            prop_assert_eq!(&st.current, &before.current);
            let old: Vec<&ReferenceDomain> = before.discourse.newest_first().collect();
            let new: Vec<&ReferenceDomain> = st.discourse.newest_first().collect();
            if r.outcome.is_success() {
                let expect = (before.discourse.len() + 1).min(cap);
                prop_assert_eq!(new.len(), expect);
                prop_assert_eq!(&new[1..], &old[..expect - 1]);
                let set = r.outcome.referents().unwrap();
                let mark: BTreeSet<_> = new[0].referent_mark.iter().cloned().collect();
                prop_assert_eq!(&mark, set);
            } else {
                prop_assert_eq!(new, old);
            }
            for d in st.discourse.newest_first().chain(st.perceptual_newest_first()) {
                prop_assert!(d.partitions.iter().all(|p| p.is_sorted()));
            }
        }
    }

    #[test]
    fn restructure_keeps_sortedness(frame in arb_frame(), q in arb_refexp()) {
        let d = build_reference_domain(&frame);
        if let Ok((out, refs)) = restructure(&d, &q, &BTreeSet::new(), 0.05) {
            prop_assert!(!refs.is_empty());
            prop_assert!(out.partitions.iter().all(|p| p.is_sorted()));
            prop_assert_eq!(out.object(), d.object());
        }
    }

    #[test]
    fn horizon_reachability(cap in 1usize..25, k in 0u64..50) {
        let v = vocab();
        let mut st = EpisodicState::new(EpisodicConfig { capacity: cap, discourse_capacity: cap, delta_amb: 0.05 });
        let house = Visible {
            id: "H".into(),
            type_label: "house".into(),
            colour: "red".into(),
            salience: 1.0,
            distance: 5.0,
            bearing: 0.0,
        };
        let tree = Visible { id: "T".into(), type_label: "tree".into(), colour: "green".into(), ..house.clone() };
        st.observe_frame(&Frame { index: 0, time_s: 0.0, visibles: vec![house] });
        for i in 1..=k {
            st.observe_frame(&Frame { index: i, time_s: 0.0, visibles: vec![tree.clone()] });
        }
        let r = resolve_episodic(&mut st, &parse_refexp("the red house", &v).unwrap());
        if k <= cap as u64 {
            prop_assert_eq!(r.outcome, Outcome::referent(["H".into()]));
        } else {
            prop_assert_eq!(r.outcome, Outcome::NoReferent);
        }
    }
}
