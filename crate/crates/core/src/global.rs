//! Global/monolithic context: a single record per entity ever seen, carrying a
//! visual and a linguistic salience that halve each frame / utterance the
//! entity is out of focus. Resolution takes the argmax of a surface-form
//! weighted sum of both scores after zeroing entities that do not fit.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::refexp::{matches, RefExp, Restrictions, SurfaceForm};
use crate::resolution::{Outcome, Resolution};
use crate::world::{EntityId, Frame};

pub const DEFAULT_DELTA_PLURAL: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlobalError {
    #[error("entity `{0}` has no record in the context")]
    UnknownEntity(EntityId),
    #[error("weights for {form} must be non-negative with a positive sum, got ({visual}, {linguistic})")]
    BadWeights {
        form: SurfaceForm,
        visual: f64,
        linguistic: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityRecord {
    pub id: EntityId,
    pub type_label: String,
    pub colour: String,
    pub visual_salience: f64,
    pub linguistic_salience: f64,
}

/// Visual and linguistic weight for each surface form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormWeights {
    weights: [(f64, f64); 6],
}

fn form_slot(form: SurfaceForm) -> usize {
    SurfaceForm::ALL
        .iter()
        .position(|f| *f == form)
        .expect("all forms listed")
}

impl Default for FormWeights {
    fn default() -> Self {
        let mut weights = [(0.5, 0.5); 6];
        weights[form_slot(SurfaceForm::Pronoun)] = (0.2, 0.8);
        weights[form_slot(SurfaceForm::Demonstrative)] = (0.8, 0.2);
        Self { weights }
    }
}

impl FormWeights {
    pub fn get(&self, form: SurfaceForm) -> (f64, f64) {
        self.weights[form_slot(form)]
    }

    pub fn set(&mut self, form: SurfaceForm, visual: f64, linguistic: f64) -> Result<(), GlobalError> {
        if !(visual >= 0.0 && linguistic >= 0.0 && visual + linguistic > 0.0) {
            return Err(GlobalError::BadWeights {
                form,
                visual,
                linguistic,
            });
        }
        self.weights[form_slot(form)] = (visual, linguistic);
        Ok(())
    }

    /// Every form's weights multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        for w in out.weights.iter_mut() {
            *w = (w.0 * factor, w.1 * factor);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalConfig {
    pub weights: FormWeights,
    pub delta_amb: f64,
    pub delta_plural: f64,
    /// Records whose saliences both fall below this are dropped. Off when `None`.
    pub prune_below: Option<f64>,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            weights: FormWeights::default(),
            delta_amb: crate::episodic::DEFAULT_DELTA_AMB,
            delta_plural: DEFAULT_DELTA_PLURAL,
            prune_below: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GlobalContext {
    records: BTreeMap<EntityId, EntityRecord>,
}

impl GlobalContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: &EntityId) -> Option<&EntityRecord> {
        self.records.get(id)
    }

    /// Records in id order.
    pub fn records(&self) -> impl Iterator<Item = &EntityRecord> {
        self.records.values()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Visible entities take the frame's salience; every other record is halved.
    pub fn update_on_frame(&mut self, frame: &Frame) {
        for r in self.records.values_mut() {
            if !frame.contains(&r.id) {
                r.visual_salience /= 2.0;
            }
        }
        for v in &frame.visibles {
            self.records
                .entry(v.id.clone())
                .and_modify(|r| r.visual_salience = v.salience)
                .or_insert_with(|| EntityRecord {
                    id: v.id.clone(),
                    type_label: v.type_label.clone(),
                    colour: v.colour.clone(),
                    visual_salience: v.salience,
                    linguistic_salience: 0.0,
                });
        }
    }

    /// Mentioned entities go to linguistic salience 1.0; all others are halved.
    pub fn update_on_utterance(&mut self, mentioned: &BTreeSet<EntityId>) -> Result<(), GlobalError> {
        if let Some(unknown) = mentioned.iter().find(|id| !self.records.contains_key(id)) {
            return Err(GlobalError::UnknownEntity(unknown.clone()));
        }
        for r in self.records.values_mut() {
            if mentioned.contains(&r.id) {
                r.linguistic_salience = 1.0;
            } else {
                r.linguistic_salience /= 2.0;
            }
        }
        Ok(())
    }

    pub fn prune(&mut self, threshold: f64) {
        self.records
            .retain(|_, r| r.visual_salience >= threshold || r.linguistic_salience >= threshold);
    }

    /// Records with the highest positive linguistic salience: the last-mentioned entities.
    pub fn focus(&self) -> Vec<&EntityRecord> {
        let top = self
            .records
            .values()
            .map(|r| r.linguistic_salience)
            .fold(0.0_f64, f64::max);
        if top <= 0.0 {
            return Vec::new();
        }
        self.records.values().filter(|r| r.linguistic_salience == top).collect()
    }
}

/// Visual and linguistic salience scaled by binary fit to the restrictions.
pub fn reference_relative_scores(record: &EntityRecord, restrictions: &Restrictions) -> (f64, f64) {
    if matches(restrictions, &record.type_label, &record.colour) {
        (record.visual_salience, record.linguistic_salience)
    } else {
        (0.0, 0.0)
    }
}

pub fn integrated_salience(visual: f64, linguistic: f64, form: SurfaceForm, weights: &FormWeights) -> f64 {
    let (wv, wl) = weights.get(form);
    wv * visual + wl * linguistic
}

/// Integrated score for every record, sorted by score descending, ties by id.
///
/// One-anaphora takes its type from the focus entity with the smallest id;
/// other-anaphora scores focus entities at zero.
pub fn scores(ctx: &GlobalContext, refexp: &RefExp, weights: &FormWeights) -> Vec<(EntityId, f64)> {
    let focus = ctx.focus();
    let mut restrictions = refexp.restrictions.clone();
    if refexp.form == SurfaceForm::OneAnaphora && restrictions.type_label.is_none() {
        restrictions.type_label = focus.first().map(|r| r.type_label.clone());
    }
    let excluded: BTreeSet<&EntityId> = if refexp.form == SurfaceForm::OtherAnaphora {
        focus.iter().map(|r| &r.id).collect()
    } else {
        BTreeSet::new()
    };
    let mut out: Vec<(EntityId, f64)> = ctx
        .records()
        .map(|r| {
            let score = if excluded.contains(&r.id) {
                0.0
            } else {
                let (v, l) = reference_relative_scores(r, &restrictions);
                integrated_salience(v, l, refexp.form, weights)
            };
            (r.id.clone(), score)
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Outcome of resolving `refexp` against the current context, without updating it.
pub fn evaluate(ctx: &GlobalContext, refexp: &RefExp, config: &GlobalConfig) -> Outcome {
    if refexp.restrictions.ordinal.is_some() {
        return Outcome::Unsupported("ordinal".into());
    }
    let ranked = scores(ctx, refexp, &config.weights);
    if refexp.is_plural() {
        let picked: Vec<EntityId> = ranked
            .into_iter()
            .filter(|(_, s)| *s > 0.0 && *s >= config.delta_plural)
            .map(|(id, _)| id)
            .collect();
        return if picked.is_empty() {
            Outcome::NoReferent
        } else {
            Outcome::referent(picked)
        };
    }
    let positive: Vec<(EntityId, f64)> = ranked.into_iter().filter(|(_, s)| *s > 0.0).collect();
    match positive.as_slice() {
        [] => Outcome::NoReferent,
        [(_, top), (_, second), ..] if top - second < config.delta_amb => Outcome::Ambiguous {
            candidates: positive
                .iter()
                .take_while(|(_, s)| top - s < config.delta_amb)
                .map(|(id, _)| id.clone())
                .collect(),
            margin: Some(top - second),
        },
        [(top_id, _), ..] => Outcome::referent([top_id.clone()]),
    }
}

/// Resolves `refexp`, then applies the utterance update with the referents as
/// the mentioned set (empty when resolution fails).
pub fn resolve_global(ctx: &mut GlobalContext, refexp: &RefExp, config: &GlobalConfig) -> Resolution {
    let outcome = evaluate(ctx, refexp, config);
    let mentioned = outcome.referents().cloned().unwrap_or_default();
    ctx.update_on_utterance(&mentioned)
        .expect("referents come from existing records");
    if let Some(t) = config.prune_below {
        ctx.prune(t);
    }
    Resolution::new(outcome)
}
