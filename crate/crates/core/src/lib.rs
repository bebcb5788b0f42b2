//! Resolution of referring expressions in situated dialog against a
//! simulated perceptual memory.
//!
//! Three strategies share one simulated world:
//!
//! * [`episodic`]: per-frame reference domains in bounded FIFO buffers,
//!   resolved by select / copy / restructure / insert.
//! * [`global`]: a single record per entity with halving visual and
//!   linguistic salience, resolved by weighted-sum argmax.
//! * [`kb`]: a flagged knowledge base that only resolves against what is
//!   currently visible.
//!
//! [`harness`] parses scenario files and runs, scores and compares them.

pub mod config;
pub mod episodic;
pub mod global;
pub mod harness;
pub mod kb;
pub mod refexp;
pub mod resolution;
pub mod world;

pub use config::Config;
pub use refexp::{parse_refexp, RefExp, Restrictions, SurfaceForm, Vocab};
pub use resolution::{Outcome, Resolution};
pub use world::{Camera, CameraCommand, Entity, EntityId, Frame, Vec2, World};
