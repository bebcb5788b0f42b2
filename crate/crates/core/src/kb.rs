//! Knowledge base of every entity encountered, flagged `here`, `visible`
//! and `accessible`. Resolution only considers visible entities and has no
//! salience to break ties.

use std::collections::BTreeMap;

use crate::refexp::{matches, RefExp};
use crate::resolution::{Outcome, Resolution};
use crate::world::{Camera, EntityId, Frame, World};

pub const DEFAULT_HERE_RADIUS: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KbEntity {
    pub id: EntityId,
    pub type_label: String,
    pub colour: String,
    pub here: bool,
    pub visible: bool,
    pub accessible: bool,
}

/// Grows monotonically; entries are never removed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeBase {
    entities: BTreeMap<EntityId, KbEntity>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &EntityId) -> Option<&KbEntity> {
        self.entities.get(id)
    }

    pub fn entities(&self) -> impl Iterator<Item = &KbEntity> {
        self.entities.values()
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Inserts newly seen entities and recomputes every flag.
    ///
    /// `here` holds for visible entities and for any entity within
    /// `here_radius` of the camera; `accessible` for visible ones within half of it.
    pub fn update_flags(&mut self, world: &World, frame: &Frame, camera: &Camera, here_radius: f64) {
        assert!(here_radius > 0.0, "here_radius must be positive");
        for v in &frame.visibles {
            self.entities.entry(v.id.clone()).or_insert_with(|| KbEntity {
                id: v.id.clone(),
                type_label: v.type_label.clone(),
                colour: v.colour.clone(),
                here: false,
                visible: false,
                accessible: false,
            });
        }
        for e in self.entities.values_mut() {
            let distance = world
                .get(&e.id)
                .map_or(f64::INFINITY, |w| camera.position.distance(w.position));
            e.visible = frame.contains(&e.id);
            e.here = e.visible || distance <= here_radius;
            e.accessible = e.visible && distance <= here_radius / 2.0;
        }
    }
}

pub fn resolve_visible(kb: &KnowledgeBase, refexp: &RefExp) -> Resolution {
    if refexp.restrictions.ordinal.is_some() {
        return Outcome::Unsupported("ordinal".into()).into();
    }
    if refexp.is_plural() {
        return Outcome::Unsupported("plural".into()).into();
    }
    let candidates: Vec<EntityId> = kb
        .entities()
        .filter(|e| e.visible && matches(&refexp.restrictions, &e.type_label, &e.colour))
        .map(|e| e.id.clone())
        .collect();
    match candidates.len() {
        0 => Outcome::NoReferent.into(),
        1 => Outcome::referent(candidates).into(),
        _ => Outcome::Ambiguous {
            candidates,
            margin: None,
        }
        .into(),
    }
}
