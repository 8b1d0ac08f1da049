//! Command-line surface.
//!
//! Exit codes: `check-empty` 0 non-empty, 1 empty up to the bound, 2
//! certified empty; `member` 0 member, 1 non-member up to the bound, 2
//! non-member; `run-det` 0 accept, 1 reject, 2 undecided; `determinize` 1
//! on uncertified clubs or lint violations; 3 for usage and input errors.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use blindcount_core::determinize::{determinize, unambiguity_lint, LintOutcome};
use blindcount_core::emptiness::{find_accepting_lasso_with, EmptinessVerdict, SearchLimits};
use blindcount_core::hsim::{build_b, build_l, build_pa, shuffle};
use blindcount_core::semantics::{membership_upw, run_deterministic, LassoWord, Membership, Verdict};
use blindcount_core::sigma11::{build_a1, write_alpha_prefix, FiniteTreeSet};
use blindcount_core::{CounterMachine, Error};
use clap::{Parser, Subcommand, ValueEnum};

use crate::format::{describe_transition, parse_machine, parse_tree_set, parse_word, render_word, serialize_machine};

pub const EXIT_USAGE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "blindcount", version, about = "Blind counter automata over infinite words")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    #[value(name = "B")]
    B,
    #[value(name = "L")]
    L,
    #[value(name = "PA")]
    Pa,
}

#[derive(Debug, clap::Args)]
pub struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overwrite an existing output file.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for an accepting lasso.
    CheckEmpty {
        /// Machine file; standard input when absent or `-`.
        file: Option<PathBuf>,
        #[arg(long, default_value_t = blindcount_core::emptiness::DEFAULT_BOUND)]
        bound: usize,
        /// Search node budget.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Decide membership of `u·v^ω` up to a lasso bound.
    Member {
        file: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, default_value_t = blindcount_core::emptiness::DEFAULT_BOUND)]
        bound: usize,
    },
    /// Emit the zero-block simulation automaton, the guard language
    /// automaton, or their union for a one-counter Büchi automaton.
    Hsim {
        file: Option<PathBuf>,
        #[arg(long, value_enum)]
        emit: Emit,
        #[command(flatten)]
        output: Output,
    },
    /// Emit the tree-order automaton with one blind counter.
    A1 {
        #[command(flatten)]
        output: Output,
    },
    /// Emit the first phases of the encoding of a finite tree set.
    Alpha {
        /// A set file (one node per line) or a generator `NAME[:DEPTH]` with
        /// NAME one of left-spine, right-spine, full, empty.
        #[arg(long)]
        set: String,
        #[arg(long)]
        phases: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Determinise an unambiguous blind counter Büchi automaton.
    Determinize {
        file: Option<PathBuf>,
        #[arg(long, default_value_t = blindcount_core::emptiness::DEFAULT_BOUND)]
        bound: usize,
        /// Lasso length bound of the unambiguity lint.
        #[arg(long, requires = "lint_runs")]
        lint_words: Option<usize>,
        /// Node budget of the unambiguity lint.
        #[arg(long, requires = "lint_words")]
        lint_runs: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Emit the shuffle product of two Büchi automata.
    Shuffle {
        file_a: PathBuf,
        file_b: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Run a deterministic machine on `u·v^ω`.
    RunDet {
        file: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        u: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
    },
}

/// Why a command stopped before producing its normal result.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error(transparent)]
    Input(#[from] anyhow::Error),
    #[error("{0}")]
    Refused(String),
}

/// Result of a command: text for standard output and the exit code.
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

fn read_input(file: Option<&Path>) -> anyhow::Result<String> {
    match file {
        Some(p) if p != Path::new("-") => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).context("reading standard input")?;
            Ok(s)
        }
    }
}

fn load(file: Option<&Path>) -> anyhow::Result<CounterMachine> {
    let text = read_input(file)?;
    let name = file.map_or_else(|| "<stdin>".to_string(), |p| p.display().to_string());
    parse_machine(&text).with_context(|| format!("parsing {name}"))
}

fn emit(output: &Output, text: String) -> anyhow::Result<Outcome> {
    match &output.out {
        None => Ok(Outcome { stdout: text, code: 0 }),
        Some(path) => {
            if path.exists() && !output.force {
                bail!("{} exists; pass --force to overwrite", path.display());
            }
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            Ok(Outcome { stdout: String::new(), code: 0 })
        }
    }
}

fn lasso(machine: &CounterMachine, u: &str, v: &str) -> anyhow::Result<LassoWord> {
    Ok(LassoWord::new(parse_word(machine, u)?, parse_word(machine, v)?)?)
}

fn tree_set(source: &str, phases: usize) -> anyhow::Result<FiniteTreeSet> {
    let default_depth = phases.saturating_sub(1);
    if Path::new(source).is_file() {
        let text = std::fs::read_to_string(source).with_context(|| format!("reading {source}"))?;
        return parse_tree_set(&text, default_depth).with_context(|| format!("parsing {source}"));
    }
    let (name, depth) = match source.split_once(':') {
        Some((n, d)) => (n, d.parse().with_context(|| format!("bad depth in `{source}`"))?),
        None => (source, default_depth),
    };
    FiniteTreeSet::generator(name, depth).with_context(|| format!("`{source}` is neither a file nor a known generator"))
}

fn run_command(command: &Command) -> Result<Outcome, Failure> {
    let mut out = String::new();
    let code = match command {
        Command::CheckEmpty { file, bound, budget } => {
            let m = load(file.as_deref())?;
            let limits = budget.map_or_else(SearchLimits::default, |node_budget| SearchLimits { node_budget });
            match find_accepting_lasso_with(&m, &m.initial_config(), *bound, limits).map_err(anyhow::Error::from)? {
                EmptinessVerdict::NonEmpty(w) => {
                    let letters: Vec<_> = w.transitions.iter().map(|&t| m.transitions[t].letter).collect();
                    let _ = writeln!(out, "verdict: NonEmpty");
                    let _ = writeln!(out, "u: {}", render_word(&m, &letters[..w.looping_point]));
                    let _ = writeln!(out, "v: {}", render_word(&m, &letters[w.looping_point..]));
                    let _ = writeln!(out, "looping point: {}", w.looping_point);
                    for &t in &w.transitions {
                        let _ = writeln!(out, "  {}", describe_transition(&m, t));
                    }
                    0
                }
                EmptinessVerdict::EmptyUpTo(b) => {
                    let _ = writeln!(out, "verdict: EmptyUpTo {b}");
                    1
                }
                EmptinessVerdict::EmptyCertified => {
                    let _ = writeln!(out, "verdict: EmptyCertified");
                    2
                }
            }
        }
        Command::Member { file, u, v, bound } => {
            let m = load(file.as_deref())?;
            let w = lasso(&m, u, v)?;
            match membership_upw(&m, &w, *bound).map_err(anyhow::Error::from)? {
                Membership::Member { transitions, looping_point } => {
                    let _ = writeln!(out, "verdict: member");
                    let _ = writeln!(out, "looping point: {looping_point}");
                    for t in transitions {
                        let _ = writeln!(out, "  {}", describe_transition(&m, t));
                    }
                    0
                }
                Membership::NonMemberUpToBound(b) => {
                    let _ = writeln!(out, "verdict: non-member up to bound {b}");
                    1
                }
                Membership::NonMember => {
                    let _ = writeln!(out, "verdict: non-member");
                    2
                }
            }
        }
        Command::Hsim { file, emit: which, output } => {
            let m = load(file.as_deref())?;
            let built = match which {
                Emit::B => build_b(&m).map(|s| s.machine),
                Emit::L => build_l(&m.alphabet),
                Emit::Pa => build_pa(&m),
            }
            .map_err(anyhow::Error::from)?;
            return Ok(emit(output, serialize_machine(&built))?);
        }
        Command::A1 { output } => return Ok(emit(output, serialize_machine(&build_a1()))?),
        Command::Alpha { set, phases, output } => {
            let x = tree_set(set, *phases)?;
            let mut text = String::new();
            write_alpha_prefix(&x, *phases, &mut text).map_err(anyhow::Error::from)?;
            text.push('\n');
            return Ok(emit(output, text)?);
        }
        Command::Determinize { file, bound, lint_words, lint_runs, output } => {
            let m = load(file.as_deref())?;
            if let (Some(words), Some(runs)) = (lint_words, lint_runs) {
                if let LintOutcome::Violation { u, v, first, second } =
                    unambiguity_lint(&m, *words, *runs).map_err(anyhow::Error::from)?
                {
                    let fmt_run = |r: &[usize]| r.iter().map(|t| format!("#{t}")).collect::<Vec<_>>().join(" ");
                    return Err(Failure::Refused(format!(
                        "unambiguity violation on u = `{}`, v = `{}`: runs [{}] and [{}]",
                        render_word(&m, &u),
                        render_word(&m, &v),
                        fmt_run(&first),
                        fmt_run(&second)
                    )));
                }
            }
            match determinize(&m, *bound) {
                Ok(det) => return Ok(emit(output, serialize_machine(&det.machine))?),
                Err(e @ Error::Uncertified(_)) => return Err(Failure::Refused(e.to_string())),
                Err(e) => return Err(anyhow::Error::from(e).into()),
            }
        }
        Command::Shuffle { file_a, file_b, output } => {
            let a = load(Some(file_a))?;
            let b = load(Some(file_b))?;
            let sh = shuffle(&a, &b).map_err(anyhow::Error::from)?;
            return Ok(emit(output, serialize_machine(&sh))?);
        }
        Command::RunDet { file, u, v, steps } => {
            let m = load(file.as_deref())?;
            let w = lasso(&m, u, v)?;
            let trace = run_deterministic(&m, &w, *steps).map_err(anyhow::Error::from)?;
            for (i, c) in trace.configs.iter().enumerate() {
                let counters: Vec<String> = c.counters.iter().map(u64::to_string).collect();
                let _ = writeln!(out, "{i} {} ({})", m.state_name(c.state), counters.join(","));
            }
            if let Some(d) = &trace.diagnostic {
                let _ = writeln!(out, "note: {d}");
            }
            let (word, code) = match trace.verdict {
                Verdict::Accept => ("accept", 0),
                Verdict::Reject => ("reject", 1),
                Verdict::Unknown => ("undecided", 2),
            };
            match trace.cycle {
                Some((start, len)) => {
                    let _ = writeln!(out, "verdict: {word} (cycle from step {start}, length {len})");
                }
                None => {
                    let _ = writeln!(out, "verdict: {word}");
                }
            }
            code
        }
    };
    Ok(Outcome { stdout: out, code })
}

/// Parse arguments, run, print, and map to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run_command(&cli.command) {
        Ok(o) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(o.stdout.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::from(o.code)
        }
        Err(Failure::Refused(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
