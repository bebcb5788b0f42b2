//! Line-oriented scenario files.
//!
//! ```text
//! # comment
//! VOCAB nouns=house,tree,car colours=red,green,blue
//! FPS 28
//! END 40
//! CONFIG capacity=3000 delta_amb=0.05 w_pronoun=0.2,0.8
//! ENTITY H1 type=house colour=red pos=10.0,30.0 radius=3.0
//! TICK 0 TELEPORT 0,0,0
//! TICK 1 MOVE 0,1
//! TICK 3 TURN 1.5
//! TICK 5 UTTER "the red house" GOLD H1
//! ```
//!
//! `END` optionally extends the run past the last event. Angles are radians.

use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::config::{Config, DEFAULT_FPS};
use crate::refexp::Vocab;
use crate::world::{CameraCommand, Entity, EntityId, Vec2, World};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("{line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("line {line}: {message}")]
    Semantic { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Camera {
        tick: u64,
        command: CameraCommand,
    },
    Utterance {
        tick: u64,
        text: String,
        gold: BTreeSet<EntityId>,
    },
}

impl Event {
    pub fn tick(&self) -> u64 {
        match self {
            Event::Camera { tick, .. } | Event::Utterance { tick, .. } => *tick,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub vocab: Vocab,
    pub fps: u32,
    pub end_tick: Option<u64>,
    /// `CONFIG` assignments in file order.
    pub config: Vec<(String, String)>,
    pub entities: Vec<Entity>,
    pub events: Vec<Event>,
}

impl Scenario {
    pub fn world(&self) -> World {
        World::new(self.entities.iter().cloned()).expect("entities validated at parse time")
    }

    /// Last tick the run covers.
    pub fn last_tick(&self) -> u64 {
        let last_event = self.events.iter().map(Event::tick).max().unwrap_or(0);
        self.end_tick.map_or(last_event, |e| e.max(last_event))
    }

    pub fn utterances(&self) -> impl Iterator<Item = (u64, &str, &BTreeSet<EntityId>)> {
        self.events.iter().filter_map(|e| match e {
            Event::Utterance { tick, text, gold } => Some((*tick, text.as_str(), gold)),
            Event::Camera { .. } => None,
        })
    }

    /// Defaults, then the scenario's FPS and CONFIG lines, then `overrides`.
    pub fn config(&self, overrides: &[String]) -> Result<Config, crate::config::ConfigError> {
        let mut config = Config {
            fps: self.fps,
            ..Config::default()
        };
        for (k, v) in &self.config {
            config.set(k, v)?;
        }
        for o in overrides {
            config.apply(o)?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Canonical text form; parsing it gives back an equal scenario.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "VOCAB nouns={} colours={}",
            self.vocab.nouns().join(","),
            self.vocab.colours().join(",")
        );
        let _ = writeln!(out, "FPS {}", self.fps);
        if let Some(end) = self.end_tick {
            let _ = writeln!(out, "END {end}");
        }
        if !self.config.is_empty() {
            let kv: Vec<String> = self.config.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(out, "CONFIG {}", kv.join(" "));
        }
        for e in &self.entities {
            let _ = writeln!(
                out,
                "ENTITY {} type={} colour={} pos={},{} radius={}",
                e.id, e.type_label, e.colour, e.position.x, e.position.y, e.radius
            );
        }
        for ev in &self.events {
            match ev {
                Event::Camera { tick, command } => {
                    let _ = writeln!(out, "TICK {tick} {command}");
                }
                Event::Utterance { tick, text, gold } => {
                    let ids: Vec<&str> = gold.iter().map(EntityId::as_str).collect();
                    let _ = writeln!(out, "TICK {tick} UTTER \"{text}\" GOLD {}", ids.join(","));
                }
            }
        }
        out
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    col: usize,
    text: &'a str,
    quoted: bool,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    pos: usize,
    end_col: usize,
}

impl<'a> Line<'a> {
    fn lex(number: usize, raw: &'a str) -> Result<Self, ScenarioError> {
        let mut tokens = Vec::new();
        let bytes = raw.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b' ' | b'\t' | b'\r' => i += 1,
                b'#' => break,
                b'"' => {
                    let start = i + 1;
                    let close = raw[start..].find('"').ok_or(ScenarioError::Syntax {
                        line: number,
                        col: i + 1,
                        message: "unterminated string".into(),
                    })?;
                    tokens.push(Token {
                        col: i + 1,
                        text: &raw[start..start + close],
                        quoted: true,
                    });
                    i = start + close + 1;
                }
                _ => {
                    let start = i;
                    while i < bytes.len() && !matches!(bytes[i], b' ' | b'\t' | b'\r' | b'#' | b'"') {
                        i += 1;
                    }
                    tokens.push(Token {
                        col: start + 1,
                        text: &raw[start..i],
                        quoted: false,
                    });
                }
            }
        }
        Ok(Self {
            number,
            tokens,
            pos: 0,
            end_col: raw.trim_end().len() + 1,
        })
    }

    fn err<T>(&self, col: usize, message: impl Into<String>) -> Result<T, ScenarioError> {
        Err(ScenarioError::Syntax {
            line: self.number,
            col,
            message: message.into(),
        })
    }

    fn next(&mut self, what: &str) -> Result<Token<'a>, ScenarioError> {
        match self.tokens.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(*t)
            }
            None => self.err(self.end_col, format!("expected {what}")),
        }
    }

    fn word(&mut self, what: &str) -> Result<Token<'a>, ScenarioError> {
        let t = self.next(what)?;
        if t.quoted {
            return self.err(t.col, format!("expected {what}, found a string"));
        }
        Ok(t)
    }

    fn finish(&self) -> Result<(), ScenarioError> {
        match self.tokens.get(self.pos) {
            Some(t) => self.err(t.col, format!("unexpected `{}`", t.text)),
            None => Ok(()),
        }
    }

    fn remaining(&mut self) -> Vec<Token<'a>> {
        let rest = self.tokens[self.pos..].to_vec();
        self.pos = self.tokens.len();
        rest
    }

    fn uint(&self, t: Token<'_>) -> Result<u64, ScenarioError> {
        t.text
            .parse()
            .or_else(|_| self.err(t.col, format!("expected a non-negative integer, found `{}`", t.text)))
    }

    fn float(&self, col: usize, s: &str) -> Result<f64, ScenarioError> {
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => self.err(col, format!("expected a finite number, found `{s}`")),
        }
    }

    fn floats<const N: usize>(&self, t: Token<'_>) -> Result<[f64; N], ScenarioError> {
        let parts: Vec<&str> = t.text.split(',').collect();
        if parts.len() != N {
            return self.err(
                t.col,
                format!("expected {N} comma-separated numbers, found `{}`", t.text),
            );
        }
        let mut out = [0.0; N];
        let mut col = t.col;
        for (slot, p) in out.iter_mut().zip(&parts) {
            *slot = self.float(col, p)?;
            col += p.len() + 1;
        }
        Ok(out)
    }

    /// `key=value` pairs; each of `keys` required exactly once.
    fn fields(&mut self, keys: &[&'a str]) -> Result<Vec<(&'a str, Token<'a>)>, ScenarioError> {
        let mut found: Vec<(&'a str, Token<'a>)> = Vec::new();
        for t in self.remaining() {
            let Some((k, v)) = t.text.split_once('=').filter(|_| !t.quoted) else {
                return self.err(t.col, format!("expected key=value, found `{}`", t.text));
            };
            let Some(&key) = keys.iter().find(|key| **key == k) else {
                return self.err(t.col, format!("unknown field `{k}`"));
            };
            if found.iter().any(|(f, _)| *f == key) {
                return self.err(t.col, format!("duplicate field `{k}`"));
            }
            let value_col = t.col + k.len() + 1;
            found.push((
                key,
                Token {
                    col: value_col,
                    text: v,
                    quoted: false,
                },
            ));
        }
        if let Some(missing) = keys.iter().find(|k| !found.iter().any(|(f, _)| f == *k)) {
            return self.err(self.end_col, format!("missing field `{missing}`"));
        }
        let mut ordered = Vec::with_capacity(keys.len());
        for k in keys {
            let (_, v) = found.iter().find(|(f, _)| f == k).expect("checked above");
            ordered.push((*k, *v));
        }
        Ok(ordered)
    }
}

fn list(text: &str) -> Vec<String> {
    text.split(',').filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn semantic<T>(line: usize, message: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError::Semantic {
        line,
        message: message.into(),
    })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut vocab: Option<(usize, Vec<String>, Vec<String>)> = None;
    let mut fps: Option<(usize, u64)> = None;
    let mut end_tick = None;
    let mut config = Vec::new();
    let mut entities: Vec<(usize, Entity)> = Vec::new();
    let mut events: Vec<(usize, Event)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let mut line = Line::lex(idx + 1, raw)?;
        let n = line.number;
        let Some(head) = line.tokens.first().copied() else {
            continue;
        };
        line.pos = 1;
        match head.text {
            "VOCAB" if !head.quoted => {
                if vocab.is_some() {
                    return line.err(head.col, "duplicate VOCAB line");
                }
                let f = line.fields(&["nouns", "colours"])?;
                vocab = Some((n, list(f[0].1.text), list(f[1].1.text)));
            }
            "FPS" if !head.quoted => {
                if fps.is_some() {
                    return line.err(head.col, "duplicate FPS line");
                }
                let t = line.word("frame rate")?;
                fps = Some((n, line.uint(t)?));
                line.finish()?;
            }
            "END" if !head.quoted => {
                let t = line.word("tick")?;
                end_tick = Some(line.uint(t)?);
                line.finish()?;
            }
            "CONFIG" if !head.quoted => {
                for t in line.remaining() {
                    let Some((k, v)) = t.text.split_once('=').filter(|_| !t.quoted) else {
                        return line.err(t.col, format!("expected key=value, found `{}`", t.text));
                    };
                    let mut scratch = Config::default();
                    if let Err(e) = scratch.set(k, v) {
                        return semantic(n, e.to_string());
                    }
                    config.push((k.to_string(), v.to_string()));
                }
            }
            "ENTITY" if !head.quoted => {
                let id = line.word("entity id")?;
                if id.text.contains('=') || id.text.contains(',') {
                    return line.err(id.col, format!("bad entity id `{}`", id.text));
                }
                let f = line.fields(&["type", "colour", "pos", "radius"])?;
                let [x, y] = line.floats::<2>(f[2].1)?;
                let radius = line.float(f[3].1.col, f[3].1.text)?;
                entities.push((
                    n,
                    Entity::new(id.text, f[0].1.text, f[1].1.text, Vec2::new(x, y), radius),
                ));
            }
            "TICK" if !head.quoted => {
                let t = line.word("tick")?;
                let tick = line.uint(t)?;
                let verb = line.word("event")?;
                let event = match verb.text {
                    "MOVE" => {
                        let t = line.word("dx,dy")?;
                        let [dx, dy] = line.floats::<2>(t)?;
                        Event::Camera {
                            tick,
                            command: CameraCommand::Move { dx, dy },
                        }
                    }
                    "TURN" => {
                        let t = line.word("angle")?;
                        let [dtheta] = line.floats::<1>(t)?;
                        Event::Camera {
                            tick,
                            command: CameraCommand::Turn { dtheta },
                        }
                    }
                    "TELEPORT" => {
                        let t = line.word("x,y,heading")?;
                        let [x, y, heading] = line.floats::<3>(t)?;
                        Event::Camera {
                            tick,
                            command: CameraCommand::Teleport { x, y, heading },
                        }
                    }
                    "UTTER" => {
                        let text = line.next("quoted utterance")?;
                        if !text.quoted {
                            return line.err(text.col, "utterance must be quoted");
                        }
                        if text.text.trim().is_empty() || text.text.contains('\t') {
                            return line.err(text.col, "utterance must be non-empty and contain no tabs");
                        }
                        let kw = line.word("GOLD")?;
                        if kw.text != "GOLD" {
                            return line.err(kw.col, format!("expected GOLD, found `{}`", kw.text));
                        }
                        let ids = line.word("gold ids")?;
                        let gold: BTreeSet<EntityId> = list(ids.text).into_iter().map(EntityId).collect();
                        if gold.is_empty() {
                            return line.err(ids.col, "empty gold set");
                        }
                        Event::Utterance {
                            tick,
                            text: text.text.to_string(),
                            gold,
                        }
                    }
                    other => return line.err(verb.col, format!("unknown event `{other}`")),
                };
                line.finish()?;
                events.push((n, event));
            }
            other => return line.err(head.col, format!("unknown directive `{other}`")),
        }
    }

    let (vocab_line, nouns, colours) = vocab.unwrap_or((0, Vec::new(), Vec::new()));
    let vocab = Vocab::new(nouns, colours).or_else(|e| semantic(vocab_line, e.to_string()))?;
    let fps = match fps {
        None => DEFAULT_FPS,
        Some((n, 0)) => return semantic(n, "fps must be positive"),
        Some((n, v)) => u32::try_from(v).or_else(|_| semantic(n, "fps too large"))?,
    };

    let mut ids = HashSet::new();
    for (n, e) in &entities {
        if !ids.insert(e.id.clone()) {
            return semantic(*n, format!("duplicate entity id `{}`", e.id));
        }
        if e.radius.is_nan() || e.radius <= 0.0 {
            return semantic(*n, format!("radius of `{}` must be positive", e.id));
        }
        if !vocab.is_noun(&e.type_label) {
            return semantic(*n, format!("type `{}` is not in the noun vocabulary", e.type_label));
        }
        if !vocab.is_colour(&e.colour) {
            return semantic(*n, format!("colour `{}` is not in the colour vocabulary", e.colour));
        }
    }
    let mut last = 0;
    for (n, ev) in &events {
        if ev.tick() < last {
            return semantic(*n, format!("tick {} precedes earlier tick {last}", ev.tick()));
        }
        last = ev.tick();
        if let Event::Utterance { gold, .. } = ev {
            if let Some(missing) = gold.iter().find(|g| !ids.contains(*g)) {
                return semantic(*n, format!("gold id `{missing}` is not a declared entity"));
            }
        }
    }

    Ok(Scenario {
        vocab,
        fps,
        end_tick,
        config,
        entities: entities.into_iter().map(|(_, e)| e).collect(),
        events: events.into_iter().map(|(_, e)| e).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
VOCAB nouns=house colours=red
ENTITY H1 type=house colour=red pos=10,0 radius=1
TICK 0 UTTER \"the red house\" GOLD H1
";

    #[test]
    fn minimal_file() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.events.len(), 1);
        assert_eq!(s.fps, 28);
        assert_eq!(s.entities.len(), 1);
        assert_eq!(parse_scenario(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn full_example() {
        let text = "\
# header comment
VOCAB nouns=house,tree,car colours=red,green,blue
FPS 28
CONFIG capacity=3000 delta_amb=0.05 w_pronoun=0.2,0.8
ENTITY H1 type=house colour=red pos=10.0,30.0 radius=3.0  # trailing
TICK 0 TELEPORT 0,0,0
TICK 1 MOVE 0,1
TICK 5 UTTER \"the red house\" GOLD H1
";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.config.len(), 3);
        assert_eq!(s.events.len(), 3);
        assert_eq!(s.last_tick(), 5);
        assert_eq!(s.config(&[]).unwrap().capacity, 3000);
    }

    #[test]
    fn unknown_gold_is_semantic_error() {
        let text = MINIMAL.replace("GOLD H1", "GOLD H9");
        assert!(matches!(
            parse_scenario(&text),
            Err(ScenarioError::Semantic { line: 3, .. })
        ));
    }

    #[test]
    fn decreasing_ticks_are_semantic_errors() {
        let text = format!("{MINIMAL}TICK 0 MOVE 1,0\nTICK 4 MOVE 1,0\nTICK 2 TURN 1\n");
        assert!(matches!(
            parse_scenario(&text),
            Err(ScenarioError::Semantic { line: 6, .. })
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let cases = [
            ("FROB 1", 1, 1),
            ("TICK x MOVE 1,2", 1, 6),
            ("TICK 1 MOVE 1", 1, 13),
            ("TICK 1 MOVE 1,abc", 1, 15),
            ("ENTITY A type=house colour=red pos=1,1", 1, 39),
            ("TICK 1 UTTER \"the house", 1, 14),
            ("TICK 1 UTTER \"it\" GOLD", 1, 23),
        ];
        for (text, line, col) in cases {
            match parse_scenario(text) {
                Err(ScenarioError::Syntax { line: l, col: c, .. }) => assert_eq!((l, c), (line, col), "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn entity_checks() {
        let dup = format!("{MINIMAL}ENTITY H1 type=house colour=red pos=0,0 radius=1\n");
        assert!(matches!(
            parse_scenario(&dup),
            Err(ScenarioError::Semantic { line: 4, .. })
        ));
        let bad_type = "VOCAB nouns=house colours=red\nENTITY X type=car colour=red pos=0,0 radius=1\n";
        assert!(matches!(
            parse_scenario(bad_type),
            Err(ScenarioError::Semantic { line: 2, .. })
        ));
        let radius = "VOCAB nouns=house colours=red\nENTITY X type=house colour=red pos=0,0 radius=0\n";
        assert!(matches!(parse_scenario(radius), Err(ScenarioError::Semantic { .. })));
        assert!(matches!(parse_scenario("FPS 0"), Err(ScenarioError::Semantic { .. })));
        assert!(matches!(
            parse_scenario("CONFIG bogus=1"),
            Err(ScenarioError::Semantic { .. })
        ));
    }
}
