//! Simulated 2D world observed through a moving view cone.
//!
//! Entities are circles on a plane. A [`Camera`] sees every entity whose
//! centre lies within `range` and within `fov / 2` of its heading; there is
//! no occlusion. Each rendered [`Frame`] lists the visible entities with a
//! visual salience normalised so that the most prominent entity scores 1.0.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("duplicate entity id `{0}`")]
    DuplicateEntity(EntityId),
    #[error("entity `{id}` has non-positive radius {radius}")]
    BadRadius { id: EntityId, radius: f64 },
    #[error("field of view {0} outside (0, pi]")]
    BadFov(f64),
    #[error("camera range {0} must be positive")]
    BadRange(f64),
    #[error("salience weights must be non-negative with a positive sum (size {size}, centre {centre})")]
    BadWeights { size: f64, centre: f64 },
}

/// Identifier of a world entity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance. Computed with a correctly rounded `sqrt` so the
    /// result does not depend on the platform's `hypot`.
    pub fn distance(self, other: Vec2) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        (dx * dx + dy * dy).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entity {
    pub id: EntityId,
    pub type_label: String,
    pub colour: String,
    pub position: Vec2,
    pub radius: f64,
}

impl Entity {
    pub fn new(
        id: impl Into<String>,
        type_label: impl Into<String>,
        colour: impl Into<String>,
        position: Vec2,
        radius: f64,
    ) -> Self {
        Self {
            id: EntityId::new(id),
            type_label: type_label.into(),
            colour: colour.into(),
            position,
            radius,
        }
    }
}

/// A set of entities keyed by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct World {
    entities: BTreeMap<EntityId, Entity>,
}

impl World {
    pub fn new(entities: impl IntoIterator<Item = Entity>) -> Result<Self, WorldError> {
        let mut world = World::default();
        for e in entities {
            world.insert(e)?;
        }
        Ok(world)
    }

    pub fn insert(&mut self, entity: Entity) -> Result<(), WorldError> {
        if entity.radius.is_nan() || entity.radius <= 0.0 {
            return Err(WorldError::BadRadius {
                id: entity.id,
                radius: entity.radius,
            });
        }
        if self.entities.contains_key(&entity.id) {
            return Err(WorldError::DuplicateEntity(entity.id));
        }
        self.entities.insert(entity.id.clone(), entity);
        Ok(())
    }

    pub fn get(&self, id: &EntityId) -> Option<&Entity> {
        self.entities.get(id)
    }

    /// Entities in id order.
    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub position: Vec2,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
    /// Full opening angle of the view cone, in `(0, pi]`.
    pub fov: f64,
    pub range: f64,
}

impl Camera {
    pub fn new(position: Vec2, heading: f64, fov: f64, range: f64) -> Result<Self, WorldError> {
        if !(fov > 0.0 && fov <= PI) {
            return Err(WorldError::BadFov(fov));
        }
        if range.is_nan() || range <= 0.0 {
            return Err(WorldError::BadRange(range));
        }
        Ok(Self {
            position,
            heading,
            fov,
            range,
        })
    }

    /// Distance and bearing (relative to the heading, in `(-pi, pi]`) of a point.
    pub fn locate(&self, point: Vec2) -> (f64, f64) {
        let distance = self.position.distance(point);
        let dx = point.x - self.position.x;
        let dy = point.y - self.position.y;
        let bearing = if distance == 0.0 {
            0.0
        } else {
            wrap_angle(dy.atan2(dx) - self.heading)
        };
        (distance, bearing)
    }
}

/// Scenario-driven camera motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CameraCommand {
    /// Translate by a world-frame offset.
    Move {
        dx: f64,
        dy: f64,
    },
    /// Rotate the heading.
    Turn {
        dtheta: f64,
    },
    Teleport {
        x: f64,
        y: f64,
        heading: f64,
    },
}

impl fmt::Display for CameraCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CameraCommand::Move { dx, dy } => write!(f, "MOVE {dx},{dy}"),
            CameraCommand::Turn { dtheta } => write!(f, "TURN {dtheta}"),
            CameraCommand::Teleport { x, y, heading } => write!(f, "TELEPORT {x},{y},{heading}"),
        }
    }
}

/// Applies a motion command, returning the new camera. Headings are kept in `[0, 2pi)`.
pub fn step_camera(camera: &Camera, command: CameraCommand) -> Camera {
    let mut next = *camera;
    match command {
        CameraCommand::Move { dx, dy } => {
            next.position = Vec2::new(camera.position.x + dx, camera.position.y + dy);
        }
        CameraCommand::Turn { dtheta } => {
            if dtheta != 0.0 {
                next.heading = (camera.heading + dtheta).rem_euclid(TAU);
            }
        }
        CameraCommand::Teleport { x, y, heading } => {
            next.position = Vec2::new(x, y);
            next.heading = heading.rem_euclid(TAU);
        }
    }
    next
}

/// Relative weights of the size and centrality terms of the salience score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalienceWeights {
    pub size: f64,
    pub centre: f64,
}

impl Default for SalienceWeights {
    fn default() -> Self {
        Self { size: 0.5, centre: 0.5 }
    }
}

impl SalienceWeights {
    pub fn new(size: f64, centre: f64) -> Result<Self, WorldError> {
        if !(size >= 0.0 && centre >= 0.0 && size + centre > 0.0) {
            return Err(WorldError::BadWeights { size, centre });
        }
        Ok(Self { size, centre })
    }

    /// Un-normalised prominence of an entity of `radius` seen at `distance` and `bearing`.
    pub fn raw(&self, radius: f64, distance: f64, bearing: f64, fov: f64) -> f64 {
        let size = if distance > 0.0 {
            (radius / distance).min(1.0)
        } else {
            1.0
        };
        let centrality = (1.0 - bearing.abs() / (fov / 2.0)).max(0.0);
        self.size * size + self.centre * centrality
    }
}

/// An entity as seen from the camera, before salience scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct Sighting<'w> {
    pub entity: &'w Entity,
    pub distance: f64,
    pub bearing: f64,
}

/// Entities inside the camera's view cone, in id order.
pub fn visible_entities<'w>(world: &'w World, camera: &Camera) -> Vec<Sighting<'w>> {
    world
        .entities()
        .filter_map(|entity| {
            let (distance, bearing) = camera.locate(entity.position);
            (distance <= camera.range && bearing.abs() <= camera.fov / 2.0).then_some(Sighting {
                entity,
                distance,
                bearing,
            })
        })
        .collect()
}

/// Normalised salience for each sighting; the most prominent scores exactly 1.0.
pub fn compute_salience(
    visibles: &[Sighting<'_>],
    camera: &Camera,
    weights: &SalienceWeights,
) -> BTreeMap<EntityId, f64> {
    let raws: Vec<(EntityId, f64)> = visibles
        .iter()
        .map(|s| {
            (
                s.entity.id.clone(),
                weights.raw(s.entity.radius, s.distance, s.bearing, camera.fov),
            )
        })
        .collect();
    let max = raws.iter().map(|(_, r)| *r).fold(0.0_f64, f64::max);
    raws.into_iter()
        .map(|(id, raw)| {
            let salience = if max > 0.0 { raw / max } else { 1.0 };
            (id, salience)
        })
        .collect()
}

/// One visible entity in a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Visible {
    pub id: EntityId,
    pub type_label: String,
    pub colour: String,
    pub salience: f64,
    pub distance: f64,
    pub bearing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub index: u64,
    pub time_s: f64,
    /// Sorted by salience descending, ties by id ascending.
    pub visibles: Vec<Visible>,
}

impl Frame {
    pub fn get(&self, id: &EntityId) -> Option<&Visible> {
        self.visibles.iter().find(|v| &v.id == id)
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.get(id).is_some()
    }
}

/// Salience ordering used throughout: descending score, then ascending id.
pub(crate) fn by_salience(a: (&EntityId, f64), b: (&EntityId, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

pub fn render_frame(world: &World, camera: &Camera, index: u64, fps: u32, weights: &SalienceWeights) -> Frame {
    assert!(fps > 0, "fps must be positive");
    let sightings = visible_entities(world, camera);
    let saliences = compute_salience(&sightings, camera, weights);
    let mut visibles: Vec<Visible> = sightings
        .iter()
        .map(|s| Visible {
            id: s.entity.id.clone(),
            type_label: s.entity.type_label.clone(),
            colour: s.entity.colour.clone(),
            salience: saliences[&s.entity.id],
            distance: s.distance,
            bearing: s.bearing,
        })
        .collect();
    visibles.sort_by(|a, b| by_salience((&a.id, a.salience), (&b.id, b.salience)));
    Frame {
        index,
        time_s: index as f64 / f64::from(fps),
        visibles,
    }
}
