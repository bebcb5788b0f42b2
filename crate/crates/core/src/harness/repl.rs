//! Interactive session over a scenario's world.
//!
//! ```text
//! move DX DY | turn DTHETA | teleport X Y HEADING   advance one tick
//! say "<expression>"                                resolve an expression
//! show context                                      dump the strategy's context
//! help | quit
//! ```

use std::io::{self, BufRead, Write};

use crate::config::Config;
use crate::world::{CameraCommand, Frame};

use super::engine::{RunError, Session, StrategyKind};
use super::scenario::{Event, Scenario};

const HELP: &str = "\
commands:
  move DX DY            translate the camera, advance one tick
  turn DTHETA           rotate the camera (radians), advance one tick
  teleport X Y HEADING  place the camera, advance one tick
  say \"<expression>\"    resolve a referring expression
  show context          print the strategy's context
  help                  this text
  quit                  leave";

fn write_frame(out: &mut impl Write, frame: &Frame) -> io::Result<()> {
    writeln!(out, "frame {} t={:.3}s", frame.index, frame.time_s)?;
    if frame.visibles.is_empty() {
        writeln!(out, "  (nothing visible)")?;
    }
    for v in &frame.visibles {
        writeln!(
            out,
            "  {} {} {} salience={:.3} distance={:.2}",
            v.id, v.type_label, v.colour, v.salience, v.distance
        )?;
    }
    Ok(())
}

fn numbers(args: &str) -> Option<Vec<f64>> {
    args.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

fn command(verb: &str, args: &str) -> Option<CameraCommand> {
    let n = numbers(args)?;
    match (verb, n.as_slice()) {
        ("move", &[dx, dy]) => Some(CameraCommand::Move { dx, dy }),
        ("turn", &[dtheta]) => Some(CameraCommand::Turn { dtheta }),
        ("teleport", &[x, y, heading]) => Some(CameraCommand::Teleport { x, y, heading }),
        _ => None,
    }
}

/// Runs a session reading commands from `input` until `quit` or end of input.
///
/// The camera starts where the scenario's tick-0 commands put it; later
/// scenario events are ignored.
pub fn repl<R: BufRead, W: Write>(
    scenario: &Scenario,
    kind: StrategyKind,
    config: &Config,
    input: R,
    mut out: W,
) -> Result<(), ReplError> {
    let mut session = Session::new(scenario, kind, config.clone())?;
    for ev in &scenario.events {
        if let Event::Camera { tick: 0, command } = ev {
            session.apply(*command);
        }
    }
    writeln!(out, "strategy {kind}; type `help` for commands")?;
    write_frame(&mut out, session.step())?;
    for line in input.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        writeln!(out, "> {line}")?;
        let (verb, args) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let args = args.trim();
        match verb {
            "quit" | "exit" => break,
            "help" => writeln!(out, "{HELP}")?,
            "say" => {
                let text = args.trim_matches('"');
                let resolution = session.utter(text);
                writeln!(out, "{resolution}")?;
            }
            "show" if args == "context" => {
                for l in session.strategy().describe() {
                    writeln!(out, "{l}")?;
                }
            }
            "move" | "turn" | "teleport" => match command(verb, args) {
                Some(cmd) => {
                    session.apply(cmd);
                    write_frame(&mut out, session.step())?;
                }
                None => writeln!(out, "bad arguments for `{verb}`\n{HELP}")?,
            },
            _ => writeln!(out, "unknown command `{verb}`\n{HELP}")?,
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ReplError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Run(#[from] RunError),
}
