use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::episodic::{resolve_episodic, EpisodicState};
use crate::global::{resolve_global, GlobalConfig, GlobalContext};
use crate::kb::{resolve_visible, KnowledgeBase};
use crate::refexp::{parse_refexp, RefExp, RefExpError, Vocab};
use crate::resolution::{Outcome, Resolution};
use crate::world::{render_frame, step_camera, Camera, CameraCommand, EntityId, Frame, Vec2, World};

use super::scenario::{Event, Scenario};
use super::trace::{Trace, TraceEvent, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrategyKind {
    Episodic,
    Global,
    VisibilityKb,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [StrategyKind::Episodic, StrategyKind::Global, StrategyKind::VisibilityKb];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Episodic => "episodic",
            StrategyKind::Global => "global",
            StrategyKind::VisibilityKb => "visibility-kb",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown strategy `{0}` (expected episodic, global or visibility-kb)")]
pub struct UnknownStrategy(pub String);

impl FromStr for StrategyKind {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

/// A perceptual-memory architecture driven by frames and utterances.
pub trait Strategy: Send {
    fn kind(&self) -> StrategyKind;

    fn observe_frame(&mut self, world: &World, frame: &Frame, camera: &Camera);

    /// Resolves one utterance and applies the strategy's utterance update.
    fn resolve(&mut self, parsed: Result<&RefExp, &RefExpError>) -> Resolution;

    /// Human-readable dump of the current context, one line per item.
    fn describe(&self) -> Vec<String>;
}

pub struct EpisodicStrategy {
    pub state: EpisodicState,
}

impl Strategy for EpisodicStrategy {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Episodic
    }

    fn observe_frame(&mut self, _world: &World, frame: &Frame, _camera: &Camera) {
        self.state.observe_frame(frame);
    }

    fn resolve(&mut self, parsed: Result<&RefExp, &RefExpError>) -> Resolution {
        match parsed {
            Ok(refexp) => resolve_episodic(&mut self.state, refexp),
            Err(e) => Outcome::ParseError(e.to_string()).into(),
        }
    }

    fn describe(&self) -> Vec<String> {
        let s = &self.state;
        let mut lines = vec![
            format!(
                "perceptual {}/{} (+current f{})",
                s.perceptual.len(),
                s.perceptual.capacity(),
                s.current
                    .as_ref()
                    .map_or("-".to_string(), |d| d.frame_index.to_string())
            ),
            format!("discourse {}/{}", s.discourse.len(), s.discourse.capacity()),
        ];
        for d in s.discourse.newest_first() {
            let mark: Vec<&str> = d.referent_mark.iter().map(EntityId::as_str).collect();
            let parts: Vec<String> = d
                .partitions
                .iter()
                .map(|p| {
                    let els: Vec<String> = p.elements.iter().map(|(id, sal)| format!("{id} {sal:.3}")).collect();
                    format!("{}:[{}]", p.criterion, els.join("; "))
                })
                .collect();
            lines.push(format!(
                "  f{} mark={} {}",
                d.frame_index,
                mark.join(","),
                parts.join(" ")
            ));
        }
        lines
    }
}

pub struct GlobalStrategy {
    pub context: GlobalContext,
    pub config: GlobalConfig,
}

impl Strategy for GlobalStrategy {
    fn kind(&self) -> StrategyKind {
        StrategyKind::Global
    }

    fn observe_frame(&mut self, _world: &World, frame: &Frame, _camera: &Camera) {
        self.context.update_on_frame(frame);
        if let Some(t) = self.config.prune_below {
            self.context.prune(t);
        }
    }

    fn resolve(&mut self, parsed: Result<&RefExp, &RefExpError>) -> Resolution {
        match parsed {
            Ok(refexp) => resolve_global(&mut self.context, refexp, &self.config),
            Err(e) => {
                // an unparsed utterance still moves everything out of linguistic focus
                self.context
                    .update_on_utterance(&BTreeSet::new())
                    .expect("empty mention set");
                Outcome::ParseError(e.to_string()).into()
            }
        }
    }

    fn describe(&self) -> Vec<String> {
        self.context
            .records()
            .map(|r| {
                format!(
                    "{} {} {} visual={} linguistic={}",
                    r.id, r.type_label, r.colour, r.visual_salience, r.linguistic_salience
                )
            })
            .collect()
    }
}

pub struct KbStrategy {
    pub kb: KnowledgeBase,
    pub here_radius: f64,
}

impl Strategy for KbStrategy {
    fn kind(&self) -> StrategyKind {
        StrategyKind::VisibilityKb
    }

    fn observe_frame(&mut self, world: &World, frame: &Frame, camera: &Camera) {
        self.kb.update_flags(world, frame, camera, self.here_radius);
    }

    fn resolve(&mut self, parsed: Result<&RefExp, &RefExpError>) -> Resolution {
        match parsed {
            Ok(refexp) => resolve_visible(&self.kb, refexp),
            Err(e) => Outcome::ParseError(e.to_string()).into(),
        }
    }

    fn describe(&self) -> Vec<String> {
        self.kb
            .entities()
            .map(|e| {
                let flag = |on: bool, name: &str| if on { name.to_string() } else { format!("!{name}") };
                format!(
                    "{} {} {} {} {} {}",
                    e.id,
                    e.type_label,
                    e.colour,
                    flag(e.here, "here"),
                    flag(e.visible, "visible"),
                    flag(e.accessible, "accessible")
                )
            })
            .collect()
    }
}

pub fn make_strategy(kind: StrategyKind, config: &Config) -> Box<dyn Strategy> {
    match kind {
        StrategyKind::Episodic => Box::new(EpisodicStrategy {
            state: EpisodicState::new(config.episodic()),
        }),
        StrategyKind::Global => Box::new(GlobalStrategy {
            context: GlobalContext::new(),
            config: config.global(),
        }),
        StrategyKind::VisibilityKb => Box::new(KbStrategy {
            kb: KnowledgeBase::new(),
            here_radius: config.here_radius,
        }),
    }
}

/// World, camera and strategy advancing one frame per tick.
pub struct Session {
    world: World,
    vocab: Vocab,
    config: Config,
    camera: Camera,
    strategy: Box<dyn Strategy>,
    next_tick: u64,
    last_frame: Option<Frame>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid camera: {0}")]
    Camera(#[from] crate::world::WorldError),
}

impl Session {
    pub fn new(scenario: &Scenario, kind: StrategyKind, config: Config) -> Result<Self, RunError> {
        let camera = Camera::new(Vec2::default(), 0.0, config.fov, config.range)?;
        Ok(Self {
            world: scenario.world(),
            vocab: scenario.vocab.clone(),
            strategy: make_strategy(kind, &config),
            config,
            camera,
            next_tick: 0,
            last_frame: None,
        })
    }

    pub fn camera(&self) -> &Camera {
        &self.camera
    }

    pub fn strategy(&self) -> &dyn Strategy {
        self.strategy.as_ref()
    }

    pub fn last_frame(&self) -> Option<&Frame> {
        self.last_frame.as_ref()
    }

    /// Tick the next call to [`Session::step`] renders.
    pub fn next_tick(&self) -> u64 {
        self.next_tick
    }

    pub fn apply(&mut self, command: CameraCommand) {
        self.camera = step_camera(&self.camera, command);
    }

    /// Renders the frame for the next tick and feeds it to the strategy.
    pub fn step(&mut self) -> &Frame {
        let frame = render_frame(
            &self.world,
            &self.camera,
            self.next_tick,
            self.config.fps,
            &self.config.salience,
        );
        self.strategy.observe_frame(&self.world, &frame, &self.camera);
        self.next_tick += 1;
        self.last_frame.insert(frame)
    }

    pub fn utter(&mut self, text: &str) -> Resolution {
        let parsed = parse_refexp(text, &self.vocab);
        self.strategy.resolve(parsed.as_ref())
    }
}

/// Drives `kind` over the scenario: for each tick, camera commands, then the
/// frame update, then that tick's utterances in file order.
pub fn run_scenario(scenario: &Scenario, kind: StrategyKind, config: &Config) -> Result<Trace, RunError> {
    let mut session = Session::new(scenario, kind, config.clone())?;
    let mut records = Vec::new();
    let mut events = scenario.events.iter().peekable();
    for tick in 0..=scenario.last_tick() {
        let mut utterances = Vec::new();
        while let Some(ev) = events.next_if(|e| e.tick() == tick) {
            match ev {
                Event::Camera { command, .. } => {
                    session.apply(*command);
                    records.push(TraceRecord {
                        tick,
                        event: TraceEvent::Camera(*command),
                        resolution: None,
                    });
                }
                Event::Utterance { text, gold, .. } => utterances.push((text, gold)),
            }
        }
        let frame = session.step();
        records.push(TraceRecord {
            tick,
            event: TraceEvent::Frame(frame.visibles.iter().map(|v| (v.id.clone(), v.salience)).collect()),
            resolution: None,
        });
        for (text, gold) in utterances {
            let resolution = session.utter(text);
            records.push(TraceRecord {
                tick,
                event: TraceEvent::Utterance {
                    text: text.clone(),
                    gold: gold.clone(),
                },
                resolution: Some(resolution),
            });
        }
    }
    Ok(Trace {
        strategy: kind,
        records,
    })
}
