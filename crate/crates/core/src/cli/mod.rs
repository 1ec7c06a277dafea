//! Command-line front end.
//!
//! Exit status is 0 on success or a positive verdict, 1 on a negative
//! verdict (no witness, inconclusive proof, rejected shift, failed check) and
//! 2 on usage or input errors.

pub mod spec;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::analysis::{golomb_check, metrics, period_cycle_diagnostic};
use crate::equivalence::{
    prove_equivalent_uniform, search_equivalent_exhaustive, window_check, EquivalenceVerdict,
};
use crate::error::Error;
use crate::graph::derive_recurrence;
use crate::register::{Nlfsr, State};
use crate::transform::{
    apply_shift, fully_shift, fully_shifted_witness, is_uniform, terminal_bit, Guard, ShiftMove,
    Uniformity,
};

use spec::{format_feedback, format_spec, parse_spec, parse_term};

#[derive(Parser, Debug)]
#[command(name = "nlfsr", version, about = "Fibonacci and Galois NLFSR toolkit")]
struct Cli {
    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a Fibonacci register into its fully shifted Galois form.
    Transform {
        spec: PathBuf,
        #[arg(long)]
        full: bool,
    },
    /// Move one product-term to a lower feedback function.
    Shift {
        spec: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        /// Product-term such as `x1*x3`.
        #[arg(long)]
        term: String,
        #[arg(long, value_enum, default_value_t = GuardArg::Raw)]
        guard: GuardArg,
    },
    /// Print the output sequence.
    Simulate {
        spec: PathBuf,
        /// Initial state as s_{n-1}..s_0 or 0x-prefixed hex.
        #[arg(long)]
        init: String,
        #[arg(long)]
        steps: usize,
    },
    /// Derive the recurrence of one bit.
    Recurrence {
        spec: PathBuf,
        #[arg(long)]
        bit: usize,
    },
    /// Compare two registers.
    Verify {
        spec: PathBuf,
        #[arg(long)]
        other: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Steps compared by the exhaustive search (default 2^n + 2n).
        #[arg(long)]
        horizon: Option<usize>,
        /// Initial state of the other register for the window method.
        #[arg(long)]
        init: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        window: usize,
    },
    /// Structural metrics, plus period and run statistics from `--init`.
    Analyze {
        spec: PathBuf,
        #[arg(long)]
        init: Option<String>,
    },
    /// Terminal bit, uniformity and fully-shifted status.
    Check { spec: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GuardArg {
    Raw,
    Theorem2,
    Lemma3,
}

impl From<GuardArg> for Guard {
    fn from(g: GuardArg) -> Self {
        match g {
            GuardArg::Raw => Guard::Raw,
            GuardArg::Theorem2 => Guard::Theorem2,
            GuardArg::Lemma3 => Guard::Lemma3,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Recurrence,
    Exhaustive,
    Window,
}

/// Result of one invocation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(message: String) -> Self {
        Outcome {
            code: 2,
            stdout: String::new(),
            stderr: message,
        }
    }
}

#[derive(Serialize)]
struct FunctionEntry {
    bit: usize,
    anf: String,
}

/// Report shared by every command; `extra` holds command-specific fields.
struct Report {
    register: Nlfsr,
    verdict: Value,
    extra: Map<String, Value>,
    text: String,
    code: u8,
}

impl Report {
    fn new(register: Nlfsr) -> Self {
        Report {
            register,
            verdict: Value::Null,
            extra: Map::new(),
            text: String::new(),
            code: 0,
        }
    }

    fn extra(&mut self, key: &str, value: impl Serialize) {
        self.extra.insert(
            key.to_string(),
            serde_json::to_value(value).expect("report values serialise"),
        );
    }

    fn to_json(&self) -> Value {
        let r = &self.register;
        let functions: Vec<FunctionEntry> = r
            .nonpure_bits()
            .rev()
            .map(|bit| FunctionEntry {
                bit,
                anf: format_feedback(r, bit),
            })
            .collect();
        let mut obj = json!({
            "n": r.len(),
            "tau": terminal_bit(r),
            "uniform": is_uniform(r).is_uniform(),
            "fully_shifted": fully_shifted_witness(r).is_none(),
            "functions": functions,
            "metrics": metrics(r),
            "verdict": self.verdict,
        });
        let map = obj.as_object_mut().expect("object");
        for (k, v) in &self.extra {
            map.insert(k.clone(), v.clone());
        }
        obj
    }
}

enum Failure {
    /// Exit 2.
    Usage(String),
    /// Exit 1 with a report of what was refused.
    Negative(Box<Report>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load(path: &Path) -> Result<Nlfsr, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn state(text: &str, n: usize) -> Result<State, Failure> {
    Ok(State::parse(text, n)?)
}

fn verdict_text(v: &EquivalenceVerdict) -> String {
    let mut out = format!("status: {}\nmethod: {}\n", v.status, v.method);
    if let Some(w) = &v.witness {
        let _ = writeln!(out, "witness: {} {}", w.left, w.right);
    }
    use crate::equivalence::Evidence;
    match &v.evidence {
        Evidence::Identical => out.push_str("registers are identical\n"),
        Evidence::Recurrences { left, right } => {
            for (name, side) in [("left", left), ("right", right)] {
                let _ = writeln!(
                    out,
                    "{name}: v{} {} (output delay {}, {})",
                    side.survivor,
                    side.recurrence,
                    side.output_delay
                        .map_or_else(|| "none".to_string(), |d| d.to_string()),
                    if side.uniform {
                        "uniform"
                    } else {
                        "not uniform"
                    },
                );
            }
        }
        Evidence::Exhaustive { horizon, unmatched } => {
            let _ = writeln!(out, "horizon: {horizon}");
            if let Some((side, s)) = unmatched {
                let _ = writeln!(out, "unmatched: {side} state {s}");
            }
        }
        Evidence::Window { window, mismatch } => {
            let _ = writeln!(out, "window: {window}");
            if let Some(pos) = mismatch {
                let _ = writeln!(out, "first mismatch at output {pos}");
            }
        }
    }
    out
}

fn execute(command: Command) -> Result<Report, Failure> {
    match command {
        Command::Transform { spec, full } => {
            if !full {
                return Err(Failure::Usage(
                    "transform needs --full (the only supported transformation)".into(),
                ));
            }
            let r = load(&spec)?;
            let (out, report) = fully_shift(&r)?;
            let mut rep = Report::new(out);
            rep.text = format!(
                "# terminal bit {} (target {}), {} move{}\n{}",
                report.tau_after,
                report.algorithm_tau,
                report.moves.len(),
                if report.moves.len() == 1 { "" } else { "s" },
                format_spec(&rep.register)
            );
            rep.extra("transform", &report);
            Ok(rep)
        }
        Command::Shift {
            spec,
            from,
            to,
            term,
            guard,
        } => {
            let r = load(&spec)?;
            let term = parse_term(&term, r.len())
                .map_err(|e| Failure::Usage(format!("--term: {}", e.kind)))?;
            let m = ShiftMove::new(from, to, term);
            let guard = Guard::from(guard);
            match apply_shift(&r, &m, guard) {
                Ok(out) => {
                    let mut rep = Report::new(out);
                    rep.text = format!("# {m} (guard {guard})\n{}", format_spec(&rep.register));
                    rep.extra("move", m);
                    rep.verdict = json!({"status": "applied"});
                    Ok(rep)
                }
                Err(Error::Shift(why)) => {
                    let mut rep = Report::new(r);
                    rep.text = format!("rejected: {why}\n");
                    rep.extra("move", m);
                    rep.verdict = json!({"status": "rejected", "reason": why.to_string()});
                    rep.code = 1;
                    Err(Failure::Negative(Box::new(rep)))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Simulate { spec, init, steps } => {
            let r = load(&spec)?;
            let s0 = state(&init, r.len())?;
            let seq = r.output_sequence(&s0, steps)?;
            let mut rep = Report::new(r);
            rep.text = format!("{seq}\n");
            rep.extra("init", s0);
            rep.extra("sequence", seq.to_string());
            Ok(rep)
        }
        Command::Recurrence { spec, bit } => {
            let r = load(&spec)?;
            match derive_recurrence(&r, bit) {
                Ok(rec) => {
                    let mut rep = Report::new(r);
                    rep.text = format!("{rec}\n");
                    rep.extra("recurrence", json!({"bit": bit, "text": rec.to_string()}));
                    Ok(rep)
                }
                Err(e @ Error::NotDerivable { .. }) => {
                    let mut rep = Report::new(r);
                    rep.text = format!("{e}\n");
                    rep.verdict = json!({"status": "not-derivable", "reason": e.to_string()});
                    rep.code = 1;
                    Err(Failure::Negative(Box::new(rep)))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Verify {
            spec,
            other,
            method,
            horizon,
            init,
            window,
        } => {
            let r1 = load(&spec)?;
            let r2 = load(&other)?;
            let verdict = match method {
                MethodArg::Recurrence => prove_equivalent_uniform(&r1, &r2)?,
                MethodArg::Exhaustive => search_equivalent_exhaustive(&r1, &r2, horizon)?,
                MethodArg::Window => {
                    let s2 = match init {
                        Some(text) => state(&text, r2.len())?,
                        None => State::new(1, r2.len())?,
                    };
                    window_check(&r1, &r2, &s2, window)?
                }
            };
            let mut rep = Report::new(r1);
            rep.text = verdict_text(&verdict);
            rep.code = if verdict.is_equivalent() { 0 } else { 1 };
            rep.verdict = serde_json::to_value(&verdict).expect("verdict serialises");
            Ok(rep)
        }
        Command::Analyze { spec, init } => {
            let r = load(&spec)?;
            let m = metrics(&r);
            let mut text = format!(
                "feedback variables: {} {:?}\nmax terms per function: {}\nmax fan-in: {}\nnon-pure bits: {}\n",
                m.feedback_variable_count,
                m.feedback_variables,
                m.max_terms_per_function,
                m.max_fanin,
                m.nonpure_bits
            );
            let mut rep = Report::new(r);
            if let Some(init) = init {
                let s0 = state(&init, rep.register.len())?;
                let d = period_cycle_diagnostic(&rep.register, &s0)?;
                let _ = writeln!(
                    text,
                    "state period: {}\noutput period: {}{}",
                    d.state_period,
                    d.output_period,
                    if d.divergent { " (diverges)" } else { "" }
                );
                // statistics over one period of the cycle that is eventually reached
                let mut s = s0;
                for _ in 0..d.preperiod {
                    s = rep.register.step(&s)?;
                }
                let seq = rep
                    .register
                    .output_sequence(&s, d.output_period as usize)?
                    .with_period(d.output_period as usize)?;
                let g = golomb_check(&seq);
                let _ = writeln!(
                    text,
                    "ones/zeros: {}/{}\nruns: {}\nbalance: {}\nrun distribution: {}",
                    g.ones,
                    g.zeros,
                    g.run_count,
                    ok(g.postulate1_ok),
                    ok(g.postulate2_ok)
                );
                rep.extra("period", d);
                rep.extra("golomb", g);
            }
            rep.text = text;
            Ok(rep)
        }
        Command::Check { spec } => {
            let r = load(&spec)?;
            let uniformity = is_uniform(&r);
            let witness = fully_shifted_witness(&r);
            let mut text = format!("n: {}\nterminal bit: {}\n", r.len(), uniformity.tau());
            match uniformity {
                Uniformity::Uniform { .. } => text.push_str("uniform: yes\n"),
                Uniformity::NonUniform { bit, var, .. } => {
                    let _ = writeln!(text, "uniform: no (g{bit} depends on x{var})");
                }
            }
            match &witness {
                None => text.push_str("fully shifted: yes\n"),
                Some(m) => {
                    let _ = writeln!(text, "fully shifted: no ({m})");
                }
            }
            let passed = uniformity.is_uniform() && witness.is_none();
            let mut rep = Report::new(r);
            rep.text = text;
            rep.code = if passed { 0 } else { 1 };
            rep.verdict = json!({
                "status": if passed { "ok" } else { "failed" },
                "uniformity": uniformity,
                "shift_witness": witness,
            });
            Ok(rep)
        }
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "fails"
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_command<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::usage(text)
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let json = cli.json;
    let rep = match execute(cli.command) {
        Ok(rep) => rep,
        Err(Failure::Negative(rep)) => *rep,
        Err(Failure::Usage(message)) => {
            return if json {
                Outcome {
                    code: 2,
                    stdout: format!("{}\n", json!({ "error": message })),
                    stderr: String::new(),
                }
            } else {
                Outcome::usage(format!("error: {message}\n"))
            };
        }
    };
    let stdout = if json {
        format!(
            "{}\n",
            serde_json::to_string_pretty(&rep.to_json()).expect("report serialises")
        )
    } else {
        rep.text.clone()
    };
    Outcome {
        code: rep.code,
        stdout,
        stderr: String::new(),
    }
}
