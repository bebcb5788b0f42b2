//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use situref::global::FormWeights;
use situref::harness::{Event, Scenario};
use situref::refexp::{Ordinal, RefExp, Restrictions, SurfaceForm, Vocab};
use situref::world::{render_frame, Camera, CameraCommand, Entity, EntityId, Frame, SalienceWeights, Vec2, World};
use situref::{parse_refexp, Outcome};

pub const NOUNS: [&str; 3] = ["house", "tree", "car"];
pub const COLOURS: [&str; 3] = ["red", "green", "blue"];

pub fn vocab() -> Vocab {
    Vocab::new(NOUNS, COLOURS).unwrap()
}

pub fn scenario_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn load_scenario(name: &str) -> Scenario {
    let text = std::fs::read_to_string(scenario_dir().join(name)).unwrap();
    situref::harness::parse_scenario(&text).unwrap()
}

// ---------------------------------------------------------------- proptest

pub fn arb_entity(idx: usize) -> impl Strategy<Value = Entity> {
    (
        0..NOUNS.len(),
        0..COLOURS.len(),
        -30.0..30.0f64,
        -30.0..30.0f64,
        0.2..3.0f64,
    )
        .prop_map(move |(t, c, x, y, r)| Entity::new(format!("E{idx}"), NOUNS[t], COLOURS[c], Vec2::new(x, y), r))
}

pub fn arb_world(max: usize) -> impl Strategy<Value = World> {
    (0..=max)
        .prop_flat_map(|n| (0..n).map(arb_entity).collect::<Vec<_>>())
        .prop_map(|es| World::new(es).unwrap())
}

pub fn arb_camera() -> impl Strategy<Value = Camera> {
    (-10.0..10.0f64, -10.0..10.0f64, 0.0..(2.0 * PI), 0.1..=PI, 5.0..60.0f64)
        .prop_map(|(x, y, h, fov, range)| Camera::new(Vec2::new(x, y), h, fov, range).unwrap())
}

/// Frames rendered from random worlds and cameras.
pub fn arb_frame() -> impl Strategy<Value = Frame> {
    (arb_world(8), arb_camera(), 0u64..1000)
        .prop_map(|(w, c, i)| render_frame(&w, &c, i, 28, &SalienceWeights::default()))
}

/// A frame stream over one world with a wandering camera.
pub fn arb_frames(max_len: usize) -> impl Strategy<Value = (World, Vec<Frame>)> {
    (
        arb_world(8),
        arb_camera(),
        proptest::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -1.0..1.0f64), 1..max_len),
    )
        .prop_map(|(world, mut cam, moves)| {
            let mut frames = Vec::new();
            for (i, (dx, dy, dt)) in moves.into_iter().enumerate() {
                cam = situref::world::step_camera(&cam, CameraCommand::Move { dx, dy });
                cam = situref::world::step_camera(&cam, CameraCommand::Turn { dtheta: dt });
                frames.push(render_frame(&world, &cam, i as u64, 28, &SalienceWeights::default()));
            }
            (world, frames)
        })
}

fn opt<T: Clone + std::fmt::Debug + 'static>(items: &'static [T]) -> impl Strategy<Value = Option<T>> {
    prop_oneof![Just(None), proptest::sample::select(items).prop_map(Some)]
}

/// Structurally valid referring expressions over [`vocab`].
pub fn arb_refexp() -> impl Strategy<Value = RefExp> {
    let form = proptest::sample::select(SurfaceForm::ALL.to_vec());
    (
        form,
        opt(&NOUNS),
        opt(&COLOURS),
        any::<bool>(),
        opt(&[Ordinal::First, Ordinal::Last]),
    )
        .prop_map(|(form, noun, colour, plural, ordinal)| {
            let mut r = Restrictions::default();
            match form {
                SurfaceForm::Pronoun => r.plural = plural,
                SurfaceForm::Demonstrative | SurfaceForm::OtherAnaphora => {
                    r.type_label = noun.map(str::to_string);
                    r.colour = colour.map(str::to_string);
                }
                SurfaceForm::Indefinite => {
                    r.type_label = Some(noun.unwrap_or("house").to_string());
                    r.colour = colour.map(str::to_string);
                }
                SurfaceForm::Definite => {
                    r.type_label = Some(noun.unwrap_or("tree").to_string());
                    r.colour = colour.map(str::to_string);
                    r.plural = plural;
                    r.ordinal = ordinal;
                }
                SurfaceForm::OneAnaphora => {
                    r.colour = colour.map(str::to_string);
                    r.plural = plural;
                }
            }
            let mut e = RefExp {
                form,
                restrictions: r,
                raw_text: String::new(),
            };
            e.raw_text = e.canonical_text();
            e
        })
}

// ------------------------------------------------------------------ oracles

/// Point-in-cone test via dot and cross products, no angle arithmetic.
pub fn in_cone(camera: &Camera, p: Vec2) -> bool {
    let dx = p.x - camera.position.x;
    let dy = p.y - camera.position.y;
    let dist2 = dx * dx + dy * dy;
    if dist2 > camera.range * camera.range {
        return false;
    }
    if dist2 == 0.0 {
        return true;
    }
    let (hx, hy) = (camera.heading.cos(), camera.heading.sin());
    let cos_angle = (dx * hx + dy * hy) / dist2.sqrt();
    cos_angle >= (camera.fov / 2.0).cos()
}

/// Partition contents by direct filtering of the frame.
pub fn filtered_sorted(frame: &Frame, keep: impl Fn(&str, &str) -> bool) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = frame
        .visibles
        .iter()
        .filter(|v| keep(&v.type_label, &v.colour))
        .map(|v| (v.id.0.clone(), v.salience))
        .collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    out
}

/// Global-context resolution recomputed from scratch from the raw log.
///
/// `frames` are every frame up to and including the query tick. `mentions`
/// maps each entity to the index of the utterance that last mentioned it;
/// `utterance` is the index of the current one.
#[allow(clippy::too_many_arguments)]
pub fn global_oracle(
    entities: &BTreeMap<EntityId, (String, String)>,
    frames: &[(u64, Vec<(EntityId, f64)>)],
    mentions: &BTreeMap<EntityId, usize>,
    utterance: usize,
    refexp: &RefExp,
    weights: &FormWeights,
    delta_amb: f64,
    delta_plural: f64,
) -> Outcome {
    if refexp.restrictions.ordinal.is_some() {
        return Outcome::Unsupported("ordinal".into());
    }
    let now = frames.last().map(|f| f.0).unwrap_or(0);
    let mut last_seen: BTreeMap<&EntityId, (u64, f64)> = BTreeMap::new();
    for (tick, vis) in frames {
        for (id, s) in vis {
            last_seen.insert(id, (*tick, *s));
        }
    }
    let visual = |id: &EntityId| {
        let (t, s) = last_seen[id];
        s * 2f64.powi(-((now - t) as i32))
    };
    let linguistic = |id: &EntityId| match mentions.get(id) {
        Some(&m) => 2f64.powi(-((utterance - m - 1) as i32)),
        None => 0.0,
    };
    let top_l = last_seen.keys().map(|id| linguistic(id)).fold(0.0, f64::max);
    let focus: Vec<&EntityId> = last_seen
        .keys()
        .copied()
        .filter(|id| top_l > 0.0 && linguistic(id) == top_l)
        .collect();
    let mut wanted_type = refexp.restrictions.type_label.clone();
    if refexp.form == SurfaceForm::OneAnaphora && wanted_type.is_none() {
        wanted_type = focus.first().map(|id| entities[*id].0.clone());
    }
    let (wv, wl) = weights.get(refexp.form);
    let mut scored: Vec<(EntityId, f64)> = last_seen
        .keys()
        .map(|id| {
            let (t, c) = &entities[*id];
            let fits = wanted_type.as_ref().is_none_or(|w| w == t)
                && refexp.restrictions.colour.as_ref().is_none_or(|w| w == c)
                && !(refexp.form == SurfaceForm::OtherAnaphora && focus.contains(id));
            let score = if fits {
                wv * visual(id) + wl * linguistic(id)
            } else {
                0.0
            };
            ((*id).clone(), score)
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    if refexp.restrictions.plural {
        let set: BTreeSet<EntityId> = scored
            .iter()
            .filter(|(_, s)| *s > 0.0 && *s >= delta_plural)
            .map(|(id, _)| id.clone())
            .collect();
        return if set.is_empty() {
            Outcome::NoReferent
        } else {
            Outcome::Referent(set)
        };
    }
    let positive: Vec<&(EntityId, f64)> = scored.iter().filter(|(_, s)| *s > 0.0).collect();
    match positive.len() {
        0 => Outcome::NoReferent,
        1 => Outcome::Referent(BTreeSet::from([positive[0].0.clone()])),
        _ => {
            let (top, second) = (positive[0].1, positive[1].1);
            if top - second < delta_amb {
                Outcome::Ambiguous {
                    candidates: positive
                        .iter()
                        .filter(|(_, s)| top - s < delta_amb)
                        .map(|(id, _)| id.clone())
                        .collect(),
                    margin: Some(top - second),
                }
            } else {
                Outcome::Referent(BTreeSet::from([positive[0].0.clone()]))
            }
        }
    }
}

/// Replays a trace's raw log through [`global_oracle`]; returns the oracle's outcome per utterance.
pub fn replay_global_oracle(
    scenario: &Scenario,
    trace: &situref::harness::Trace,
    config: &situref::Config,
) -> Vec<Outcome> {
    use situref::harness::TraceEvent;
    let entities: BTreeMap<EntityId, (String, String)> = scenario
        .entities
        .iter()
        .map(|e| (e.id.clone(), (e.type_label.clone(), e.colour.clone())))
        .collect();
    let vocab = &scenario.vocab;
    let mut frames: Vec<(u64, Vec<(EntityId, f64)>)> = Vec::new();
    let mut mentions: BTreeMap<EntityId, usize> = BTreeMap::new();
    let mut out = Vec::new();
    let mut u = 0;
    for rec in &trace.records {
        match &rec.event {
            TraceEvent::Frame(vis) => frames.push((rec.tick, vis.clone())),
            TraceEvent::Camera(_) => {}
            TraceEvent::Utterance { text, .. } => {
                let outcome = match parse_refexp(text, vocab) {
                    Err(e) => Outcome::ParseError(e.to_string()),
                    Ok(refexp) => global_oracle(
                        &entities,
                        &frames,
                        &mentions,
                        u,
                        &refexp,
                        &config.form_weights,
                        config.delta_amb,
                        config.delta_plural,
                    ),
                };
                if let Outcome::Referent(ids) = &outcome {
                    for id in ids {
                        mentions.insert(id.clone(), u);
                    }
                }
                out.push(outcome);
                u += 1;
            }
        }
    }
    out
}

// ------------------------------------------------------- random scenarios

const UTTERANCES: &[&str] = &[
    "it",
    "them",
    "the house",
    "the houses",
    "the red house",
    "the blue tree",
    "the green car",
    "the trees",
    "the cars",
    "a house",
    "a red tree",
    "that car",
    "this blue house",
    "that",
    "the red one",
    "the ones",
    "the other house",
    "the other",
    "the first blue house we saw",
    "the last tree",
    "the purple thing",
];

/// Random scenario: up to 10 entities, 100 ticks and 10 utterances.
pub fn random_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_entities = rng.gen_range(1..=10);
    let mut entities = Vec::new();
    for i in 0..n_entities {
        entities.push(Entity::new(
            format!("E{i}"),
            *NOUNS.choose(&mut rng).unwrap(),
            *COLOURS.choose(&mut rng).unwrap(),
            Vec2::new(rng.gen_range(-25.0..25.0), rng.gen_range(-25.0..25.0)),
            rng.gen_range(0.3..3.0),
        ));
    }
    let last_tick: u64 = rng.gen_range(1..100);
    let mut events = Vec::new();
    let mut ticks: Vec<u64> = (0..rng.gen_range(0..=20))
        .map(|_| rng.gen_range(0..=last_tick))
        .collect();
    ticks.sort();
    for t in ticks {
        let command = match rng.gen_range(0..3) {
            0 => CameraCommand::Move {
                dx: rng.gen_range(-6.0..6.0),
                dy: rng.gen_range(-6.0..6.0),
            },
            1 => CameraCommand::Turn {
                dtheta: rng.gen_range(-2.0..2.0),
            },
            _ => CameraCommand::Teleport {
                x: rng.gen_range(-10.0..10.0),
                y: rng.gen_range(-10.0..10.0),
                heading: rng.gen_range(0.0..std::f64::consts::TAU),
            },
        };
        events.push(Event::Camera { tick: t, command });
    }
    let n_utt = rng.gen_range(1..=10);
    for _ in 0..n_utt {
        let t = rng.gen_range(0..=last_tick);
        let gold_id = entities.choose(&mut rng).unwrap().id.clone();
        events.push(Event::Utterance {
            tick: t,
            text: UTTERANCES.choose(&mut rng).unwrap().to_string(),
            gold: BTreeSet::from([gold_id]),
        });
    }
    events.sort_by_key(Event::tick);
    Scenario {
        vocab: vocab(),
        fps: 28,
        end_tick: Some(last_tick),
        config: if rng.gen_bool(0.3) {
            vec![("delta_amb".into(), "0".into())]
        } else {
            Vec::new()
        },
        entities,
        events,
    }
}
