use std::io::{BufRead, Write};

use super::doc::{summary, StateDocument};
use crate::kripke::to_dot;
use crate::lang::{parse_formula, Theory};
use crate::logic::Action;
use crate::transition::{frame_of_reference, trace_plan, BState};

const HELP: &str = "\
commands:
  do ACTION        execute ACTION in every current state
  undo             return to the b-state before the last `do`
  show [dot]       print the current states
  holds FORMULA    evaluate FORMULA at each current state
  frames ACTION    frame of reference of ACTION in each current state
  history          actions executed so far
  save FILE        write the current b-state as a state document
  load FILE        replace the session with the states in FILE
  help | quit";

/// A b-state plus the actions that led to it.
#[derive(Debug, Clone)]
pub struct Session {
    pub theory: Theory,
    pub initial: BState,
    /// `(action, b-state after it)`, oldest first.
    pub history: Vec<(Action, BState)>,
}

impl Session {
    pub fn new(theory: Theory, initial: BState) -> Self {
        Session { theory, initial, history: Vec::new() }
    }

    pub fn current(&self) -> &BState {
        self.history.last().map_or(&self.initial, |(_, b)| b)
    }

    fn action(&self, name: &str) -> Result<Action, String> {
        self.theory.signature().action(name).ok_or_else(|| format!("unknown action `{name}`"))
    }

    /// Executes one command line. Errors leave the session unchanged.
    pub fn command(&mut self, line: &str) -> Result<String, String> {
        let line = line.trim();
        let (cmd, arg) = line.split_once(char::is_whitespace).map_or((line, ""), |(c, a)| (c, a.trim()));
        let sig = self.theory.signature().clone();
        match cmd {
            "" => Ok(String::new()),
            "help" => Ok(HELP.to_string()),
            "do" => {
                let a = self.action(arg)?;
                let t = trace_plan(&self.theory, &[a], self.current()).map_err(|e| e.to_string())?;
                if let Some(f) = t.failure {
                    return Err(format!("{arg} is not executable in state {}: {}", f.member, f.reason));
                }
                let mut report = String::new();
                for (k, s) in self.current().states().iter().enumerate() {
                    let fr = frame_of_reference(&self.theory, a, s).map_err(|e| e.to_string())?;
                    report.push_str(&format!("state {k}: frame {}\n", fr.display(&sig)));
                }
                let next = t.steps.into_iter().next().expect("one step");
                let counts: Vec<usize> = next.states().iter().map(|s| s.structure.len()).collect();
                report.push_str(&format!("worlds {counts:?}"));
                self.history.push((a, next));
                Ok(report)
            }
            "undo" => match self.history.pop() {
                Some((a, _)) => Ok(format!("undid {}", sig.action_name(a))),
                None => Err("nothing to undo".into()),
            },
            "show" => {
                let b = self.current();
                if b.is_failed() {
                    return Ok("failed b-state".into());
                }
                let dot = arg == "dot";
                Ok(b.states()
                    .iter()
                    .enumerate()
                    .map(|(k, s)| if dot { to_dot(s, &sig) } else { format!("state {k}: {}", summary(&sig, s)) })
                    .collect::<Vec<_>>()
                    .join("\n"))
            }
            "holds" => {
                let phi = parse_formula(&sig, arg).map_err(|e| e.to_string())?;
                let verdicts: Vec<bool> = self.current().states().iter().map(|s| s.satisfies(&phi)).collect();
                let all = !verdicts.is_empty() && verdicts.iter().all(|v| *v);
                Ok(format!("{all} {verdicts:?}"))
            }
            "frames" => {
                let a = self.action(arg)?;
                let mut lines = Vec::new();
                for (k, s) in self.current().states().iter().enumerate() {
                    let fr = frame_of_reference(&self.theory, a, s).map_err(|e| e.to_string())?;
                    lines.push(format!("state {k}: {}", fr.display(&sig)));
                }
                Ok(lines.join("\n"))
            }
            "history" => {
                let names: Vec<&str> = self.history.iter().map(|(a, _)| sig.action_name(*a)).collect();
                Ok(if names.is_empty() { "(empty)".into() } else { names.join("; ") })
            }
            "save" => {
                if arg.is_empty() {
                    return Err("save needs a file name".into());
                }
                let doc = StateDocument::from_bstate(&sig, self.current());
                std::fs::write(arg, doc.to_text()).map_err(|e| format!("{arg}: {e}"))?;
                Ok(format!("saved {} state(s) to {arg}", self.current().len()))
            }
            "load" => {
                let text = std::fs::read_to_string(arg).map_err(|e| format!("{arg}: {e}"))?;
                let b = StateDocument::parse(&text).and_then(|d| d.to_bstate(&sig)).map_err(|e| e.to_string())?;
                let n = b.len();
                self.initial = b;
                self.history.clear();
                Ok(format!("loaded {n} state(s)"))
            }
            other => Err(format!("unknown command `{other}`; try `help`")),
        }
    }

    /// Reads commands until end of input or `quit`.
    pub fn run(&mut self, input: &mut dyn BufRead, out: &mut dyn Write) -> std::io::Result<()> {
        let mut line = String::new();
        loop {
            write!(out, "> ")?;
            out.flush()?;
            line.clear();
            if input.read_line(&mut line)? == 0 || matches!(line.trim(), "quit" | "exit") {
                writeln!(out)?;
                return Ok(());
            }
            match self.command(&line) {
                Ok(text) if text.is_empty() => {}
                Ok(text) => writeln!(out, "{text}")?,
                Err(e) => writeln!(out, "error: {e}")?,
            }
        }
    }
}
