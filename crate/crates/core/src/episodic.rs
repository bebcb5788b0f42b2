//! Local/episodic perceptual memory.
//!
//! Every frame becomes a [`ReferenceDomain`]: salience-ordered partitions of
//! the visible entities, one for all objects and one per type and colour on
//! screen. Domains live in two bounded FIFO buffers, the perceptual memory and
//! the discourse context. Resolving an expression selects a domain, copies it,
//! restructures the copy to mark the referent, and pushes the copy onto the
//! head of the discourse context.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::refexp::{Ordinal, RefExp, Restrictions, SurfaceForm};
use crate::resolution::{Outcome, Resolution};
use crate::world::{by_salience, EntityId, Frame};

pub const DEFAULT_CAPACITY: usize = 3000;
pub const DEFAULT_DELTA_AMB: f64 = 0.05;

/// What a partition groups entities by.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Criterion {
    Object,
    Type(String),
    Colour(String),
    /// Created in response to an utterance that restricts both colour and type.
    Compound {
        colour: String,
        type_label: String,
    },
}

impl Criterion {
    /// The criterion naming exactly the set picked out by `r`'s type and colour.
    pub fn for_restrictions(r: &Restrictions) -> Criterion {
        match (&r.colour, &r.type_label) {
            (None, None) => Criterion::Object,
            (None, Some(t)) => Criterion::Type(t.clone()),
            (Some(c), None) => Criterion::Colour(c.clone()),
            (Some(c), Some(t)) => Criterion::Compound {
                colour: c.clone(),
                type_label: t.clone(),
            },
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Criterion::Object => f.write_str("object"),
            Criterion::Type(t) => f.write_str(t),
            Criterion::Colour(c) => f.write_str(c),
            Criterion::Compound { colour, type_label } => write!(f, "{colour}+{type_label}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub criterion: Criterion,
    /// Sorted by salience descending, ties by id ascending.
    pub elements: Vec<(EntityId, f64)>,
}

impl Partition {
    fn new(criterion: Criterion, mut elements: Vec<(EntityId, f64)>) -> Self {
        sort_elements(&mut elements);
        Self { criterion, elements }
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.elements.iter().any(|(e, _)| e == id)
    }

    pub fn is_sorted(&self) -> bool {
        self.elements
            .windows(2)
            .all(|w| by_salience((&w[0].0, w[0].1), (&w[1].0, w[1].1)).is_lt())
    }
}

fn sort_elements(elements: &mut [(EntityId, f64)]) {
    elements.sort_by(|a, b| by_salience((&a.0, a.1), (&b.0, b.1)));
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceDomain {
    pub frame_index: u64,
    pub partitions: Vec<Partition>,
    /// Referent(s) selected when this domain was restructured, sorted by id.
    pub referent_mark: Vec<EntityId>,
}

impl ReferenceDomain {
    pub fn partition(&self, criterion: &Criterion) -> Option<&Partition> {
        self.partitions.iter().find(|p| &p.criterion == criterion)
    }

    pub fn object(&self) -> &Partition {
        self.partition(&Criterion::Object)
            .expect("reference domain always has an object partition")
    }

    pub fn type_of(&self, id: &EntityId) -> Option<&str> {
        self.partitions.iter().find_map(|p| match &p.criterion {
            Criterion::Type(t) if p.contains(id) => Some(t.as_str()),
            _ => None,
        })
    }

    pub fn colour_of(&self, id: &EntityId) -> Option<&str> {
        self.partitions.iter().find_map(|p| match &p.criterion {
            Criterion::Colour(c) if p.contains(id) => Some(c.as_str()),
            _ => None,
        })
    }

    /// Entities satisfying `r`, salience-sorted. Scores come from the most
    /// specific partition already present for `r`.
    pub fn candidates(&self, r: &Restrictions) -> Vec<(EntityId, f64)> {
        if let Some(p) = self.partition(&Criterion::for_restrictions(r)) {
            return p.elements.clone();
        }
        self.object()
            .elements
            .iter()
            .filter(|(id, _)| {
                r.type_label.as_deref().is_none_or(|t| self.type_of(id) == Some(t))
                    && r.colour.as_deref().is_none_or(|c| self.colour_of(id) == Some(c))
            })
            .cloned()
            .collect()
    }

    pub fn contains_entity(&self, id: &EntityId) -> bool {
        self.object().contains(id)
    }
}

/// Builds the object, type and colour partitions for one frame. Type and colour
/// partitions appear in order of their most salient member.
pub fn build_reference_domain(frame: &Frame) -> ReferenceDomain {
    let elements: Vec<(EntityId, f64)> = frame.visibles.iter().map(|v| (v.id.clone(), v.salience)).collect();
    let mut partitions = vec![Partition::new(Criterion::Object, elements)];
    let mut types: Vec<Partition> = Vec::new();
    let mut colours: Vec<Partition> = Vec::new();
    let mut ordered = frame.visibles.clone();
    ordered.sort_by(|a, b| by_salience((&a.id, a.salience), (&b.id, b.salience)));
    for v in &ordered {
        let entry = (v.id.clone(), v.salience);
        for (list, criterion) in [
            (&mut types, Criterion::Type(v.type_label.clone())),
            (&mut colours, Criterion::Colour(v.colour.clone())),
        ] {
            match list.iter_mut().find(|p| p.criterion == criterion) {
                Some(p) => p.elements.push(entry.clone()),
                None => list.push(Partition {
                    criterion,
                    elements: vec![entry.clone()],
                }),
            }
        }
    }
    partitions.extend(types);
    partitions.extend(colours);
    ReferenceDomain {
        frame_index: frame.index,
        partitions,
        referent_mark: Vec::new(),
    }
}

/// Returns a copy of `domain` with a partition for the set `restrictions`
/// picks out. Unchanged if that partition already exists.
pub fn add_partition(domain: &ReferenceDomain, restrictions: &Restrictions) -> ReferenceDomain {
    let mut out = domain.clone();
    let criterion = Criterion::for_restrictions(restrictions);
    if out.partition(&criterion).is_none() {
        let elements = domain.candidates(restrictions);
        out.partitions.push(Partition::new(criterion, elements));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BufferKind {
    /// Chronological; new domains are appended at the tail.
    Perceptual,
    /// New domains go to the head.
    Discourse,
}

/// Bounded first-in-first-out store of reference domains.
#[derive(Debug, Clone, PartialEq)]
pub struct FifoBuffer {
    kind: BufferKind,
    capacity: usize,
    items: VecDeque<ReferenceDomain>,
}

impl FifoBuffer {
    pub fn new(kind: BufferKind, capacity: usize) -> Self {
        assert!(capacity > 0, "buffer capacity must be positive");
        Self {
            kind,
            capacity,
            items: VecDeque::new(),
        }
    }

    pub fn kind(&self) -> BufferKind {
        self.kind
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Inserts `domain`, evicting the oldest entry when full.
    ///
    /// Panics if a perceptual buffer receives a frame index that does not
    /// follow the newest one.
    pub fn push(&mut self, domain: ReferenceDomain) {
        match self.kind {
            BufferKind::Perceptual => {
                if let Some(last) = self.items.back() {
                    assert!(
                        domain.frame_index > last.frame_index,
                        "perceptual frames must arrive in increasing order"
                    );
                }
                self.items.push_back(domain);
                if self.items.len() > self.capacity {
                    self.items.pop_front();
                }
            }
            BufferKind::Discourse => {
                self.items.push_front(domain);
                if self.items.len() > self.capacity {
                    self.items.pop_back();
                }
            }
        }
    }

    pub fn newest_first(&self) -> Box<dyn Iterator<Item = &ReferenceDomain> + '_> {
        match self.kind {
            BufferKind::Perceptual => Box::new(self.items.iter().rev()),
            BufferKind::Discourse => Box::new(self.items.iter()),
        }
    }

    pub fn oldest_first(&self) -> Box<dyn Iterator<Item = &ReferenceDomain> + '_> {
        match self.kind {
            BufferKind::Perceptual => Box::new(self.items.iter()),
            BufferKind::Discourse => Box::new(self.items.iter().rev()),
        }
    }

    /// Discourse head / most recent perceptual domain.
    pub fn newest(&self) -> Option<&ReferenceDomain> {
        self.newest_first().next()
    }

    pub fn oldest(&self) -> Option<&ReferenceDomain> {
        self.oldest_first().next()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodicConfig {
    /// Past frames held in perceptual memory.
    pub capacity: usize,
    pub discourse_capacity: usize,
    pub delta_amb: f64,
}

impl Default for EpisodicConfig {
    fn default() -> Self {
        Self {
            capacity: DEFAULT_CAPACITY,
            discourse_capacity: DEFAULT_CAPACITY,
            delta_amb: DEFAULT_DELTA_AMB,
        }
    }
}

/// The domain for the frame on screen plus perceptual memory of up to
/// `capacity` earlier frames, and the discourse context.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodicState {
    pub current: Option<ReferenceDomain>,
    pub perceptual: FifoBuffer,
    pub discourse: FifoBuffer,
    pub delta_amb: f64,
}

impl EpisodicState {
    pub fn new(config: EpisodicConfig) -> Self {
        Self {
            current: None,
            perceptual: FifoBuffer::new(BufferKind::Perceptual, config.capacity),
            discourse: FifoBuffer::new(BufferKind::Discourse, config.discourse_capacity),
            delta_amb: config.delta_amb,
        }
    }

    /// Makes `frame` the current domain; the previous one moves into perceptual memory.
    pub fn observe_frame(&mut self, frame: &Frame) {
        let domain = build_reference_domain(frame);
        if let Some(prev) = self.current.replace(domain) {
            self.perceptual.push(prev);
        }
    }

    pub fn perceptual_newest_first(&self) -> impl Iterator<Item = &ReferenceDomain> {
        self.current.iter().chain(self.perceptual.newest_first())
    }

    pub fn perceptual_oldest_first(&self) -> impl Iterator<Item = &ReferenceDomain> {
        self.perceptual.oldest_first().chain(self.current.iter())
    }

    /// Every entity marked as a referent anywhere in the discourse context.
    pub fn mentioned(&self) -> BTreeSet<EntityId> {
        self.discourse
            .newest_first()
            .flat_map(|d| d.referent_mark.iter().cloned())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Perceptual,
    Discourse,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Perceptual => "perceptual",
            Source::Discourse => "discourse",
        })
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("no reference domain satisfies the expression")]
pub struct NoDomain;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RestructureError {
    #[error("domain is not eligible for the expression")]
    NotEligible,
    #[error("ambiguous between {candidates:?} (margin {margin})")]
    Ambiguous { candidates: Vec<EntityId>, margin: f64 },
}

/// Restrictions after one-anaphora inherits the type of the domain's marked referent.
pub fn effective_restrictions(domain: &ReferenceDomain, refexp: &RefExp) -> Restrictions {
    let mut r = refexp.restrictions.clone();
    if refexp.form == SurfaceForm::OneAnaphora && r.type_label.is_none() {
        r.type_label = domain
            .referent_mark
            .first()
            .and_then(|id| domain.type_of(id))
            .map(str::to_string);
    }
    r
}

/// Candidate referents if `domain` is eligible for `refexp`.
fn eligible_candidates(domain: &ReferenceDomain, refexp: &RefExp) -> Option<Vec<(EntityId, f64)>> {
    let needed = if refexp.is_plural() { 2 } else { 1 };
    let cands: Vec<(EntityId, f64)> = match refexp.form {
        SurfaceForm::Pronoun => {
            let mark = &domain.referent_mark;
            let fits = if refexp.is_plural() {
                mark.len() >= 2
            } else {
                mark.len() == 1
            };
            if !fits {
                return None;
            }
            domain
                .object()
                .elements
                .iter()
                .filter(|(id, _)| mark.contains(id))
                .cloned()
                .collect()
        }
        SurfaceForm::OtherAnaphora => domain
            .candidates(&effective_restrictions(domain, refexp))
            .into_iter()
            .filter(|(id, _)| !domain.referent_mark.contains(id))
            .collect(),
        _ => domain.candidates(&effective_restrictions(domain, refexp)),
    };
    (cands.len() >= needed).then_some(cands)
}

fn has_unique_max(cands: &[(EntityId, f64)]) -> bool {
    cands.len() == 1 || (cands.len() > 1 && cands[0].1 > cands[1].1)
}

/// Domains in the order they are searched for `refexp`.
fn search_order<'s>(state: &'s EpisodicState, refexp: &RefExp) -> Vec<(Source, &'s ReferenceDomain)> {
    let discourse = || state.discourse.newest_first().map(|d| (Source::Discourse, d));
    let newest = || state.perceptual_newest_first().map(|d| (Source::Perceptual, d));
    match (refexp.form, refexp.restrictions.ordinal) {
        (_, Some(Ordinal::First)) => state
            .perceptual_oldest_first()
            .map(|d| (Source::Perceptual, d))
            .collect(),
        (_, Some(Ordinal::Last)) => newest().collect(),
        (SurfaceForm::Pronoun | SurfaceForm::OneAnaphora | SurfaceForm::OtherAnaphora, None) => discourse().collect(),
        (SurfaceForm::Definite | SurfaceForm::Demonstrative, None) => discourse().chain(newest()).collect(),
        (SurfaceForm::Indefinite, None) => newest().collect(),
    }
}

/// Picks the domain to resolve `refexp` in and returns a copy of it.
///
/// The first eligible domain in search order wins. When the domains right
/// after it come from the same buffer and frame, one whose best candidate is
/// a strict maximum is preferred.
pub fn select_domain(state: &EpisodicState, refexp: &RefExp) -> Result<(ReferenceDomain, Source), NoDomain> {
    let order = search_order(state, refexp);
    let (first_idx, first_cands) = order
        .iter()
        .enumerate()
        .find_map(|(i, (_, d))| eligible_candidates(d, refexp).map(|c| (i, c)))
        .ok_or(NoDomain)?;
    let (source, first) = order[first_idx];
    let mut chosen = first;
    if !has_unique_max(&first_cands) {
        for &(src, d) in order[first_idx + 1..]
            .iter()
            .take_while(|(src, d)| *src == source && d.frame_index == first.frame_index)
        {
            debug_assert_eq!(src, source);
            if eligible_candidates(d, refexp).is_some_and(|c| has_unique_max(&c)) {
                chosen = d;
                break;
            }
        }
    }
    Ok((chosen.clone(), source))
}

/// Adds the restriction partition to `domain`, picks the referent(s) and marks them.
///
/// `mentioned` lists entities already referred to in the discourse; indefinites prefer others.
pub fn restructure(
    domain: &ReferenceDomain,
    refexp: &RefExp,
    mentioned: &BTreeSet<EntityId>,
    delta_amb: f64,
) -> Result<(ReferenceDomain, BTreeSet<EntityId>), RestructureError> {
    let cands = eligible_candidates(domain, refexp).ok_or(RestructureError::NotEligible)?;
    let restrictions = effective_restrictions(domain, refexp);
    let referents: Vec<EntityId> = if refexp.form == SurfaceForm::Pronoun {
        cands.iter().map(|(id, _)| id.clone()).collect()
    } else if refexp.is_plural() {
        cands.iter().map(|(id, _)| id.clone()).collect()
    } else {
        match refexp.form {
            SurfaceForm::Indefinite => {
                let pick = cands
                    .iter()
                    .find(|(id, _)| !mentioned.contains(id))
                    .unwrap_or(&cands[0]);
                vec![pick.0.clone()]
            }
            SurfaceForm::Definite if cands.len() > 1 && cands[0].1 - cands[1].1 < delta_amb => {
                let top = cands[0].1;
                return Err(RestructureError::Ambiguous {
                    candidates: cands
                        .iter()
                        .take_while(|(_, s)| top - s < delta_amb)
                        .map(|(id, _)| id.clone())
                        .collect(),
                    margin: top - cands[1].1,
                });
            }
            _ => vec![cands[0].0.clone()],
        }
    };

    let mut out = if restrictions.is_vacuous() || refexp.form == SurfaceForm::Pronoun {
        domain.clone()
    } else {
        add_partition(domain, &restrictions)
    };
    if !restrictions.is_vacuous() && refexp.form != SurfaceForm::Pronoun {
        let criterion = Criterion::for_restrictions(&restrictions);
        if let Some(p) = out.partitions.iter_mut().find(|p| p.criterion == criterion) {
            let max = p.elements.first().map_or(0.0, |e| e.1);
            for (id, s) in p.elements.iter_mut() {
                if referents.contains(id) {
                    *s = max;
                }
            }
            sort_elements(&mut p.elements);
        }
    }
    let mut mark = referents.clone();
    mark.sort();
    out.referent_mark = mark;
    Ok((out, referents.into_iter().collect()))
}

/// Select, copy, restructure, and push onto the discourse head.
pub fn resolve_episodic(state: &mut EpisodicState, refexp: &RefExp) -> Resolution {
    let Ok((domain, source)) = select_domain(state, refexp) else {
        return Resolution::new(Outcome::NoReferent);
    };
    let provenance = format!("{source}:f{}", domain.frame_index);
    match restructure(&domain, refexp, &state.mentioned(), state.delta_amb) {
        Ok((restructured, referents)) => {
            state.discourse.push(restructured);
            Resolution::new(Outcome::referent(referents)).with_provenance(provenance)
        }
        Err(RestructureError::Ambiguous { candidates, margin }) => Resolution::new(Outcome::Ambiguous {
            candidates,
            margin: Some(margin),
        })
        .with_provenance(provenance),
        Err(RestructureError::NotEligible) => unreachable!("selected domains are eligible"),
    }
}
