//! `mbqc`: scenario-driven front end for `mbqc-core`.
//!
//! Exit codes: 0 on success, 1 on a configuration or runtime error, 2 when
//! a verification check fails.

mod experiments;
mod record;
mod scenario;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mbqc_core::budget::{CavityParams, SpinTimes};
use mbqc_core::erasure::{ApparatusParams, Scheme};
use mbqc_core::growth::LinkModel;
use mbqc_core::mbqc::Execution;

use record::RunRecord;
use scenario::{Experiment, InputKind, Preset, Scenario, Strategy};

#[derive(Parser)]
#[command(name = "mbqc", version, about = "Simulate heralded-link graph-state growth and measurement-based computation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed; overrides the scenario's.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of trials; overrides the scenario's.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Write record.json, results.csv and traces into this directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Include post-measurement states in per-trial results.
    #[arg(long, global = true)]
    dump_state: bool,
    /// Format printed to stdout when `--out` is not given.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Ideal,
    Weak,
    TwoPhoton,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Branch,
    Broker,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Lazy,
    Eager,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Sample heralded entanglement attempts and enumerate their statistics.
    Entangle {
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
        #[arg(long, default_value_t = 0.0)]
        dark_prob: f64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Ideal)]
        scheme: SchemeArg,
        /// Excitation amplitude for the weak scheme.
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Threshold detectors: a double click reads as a single click.
        #[arg(long)]
        threshold: bool,
    },
    /// Grow a graph state by branch growth or through brokers.
    Grow {
        #[arg(long, value_enum, default_value_t = StrategyArg::Branch)]
        strategy: StrategyArg,
        /// Link success probability.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        /// Seconds per link attempt.
        #[arg(long, default_value_t = 1e-9)]
        attempt_time: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long)]
        initial_length: Option<usize>,
        #[arg(long)]
        trace_every: Option<usize>,
        #[arg(long, default_value_t = 4)]
        nodes: usize,
        /// Brokered edges, made in ring order; a second lap toggles them off.
        #[arg(long, default_value_t = 4)]
        edges: usize,
    },
    /// Compile a circuit (or load a pattern) and run it with feed-forward.
    RunPattern {
        #[arg(long, conflicts_with = "pattern", required_unless_present = "pattern")]
        circuit: Option<PathBuf>,
        #[arg(long)]
        pattern: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = InputKind::Plus)]
        input: InputKind,
        #[arg(long, value_enum, default_value_t = ModeArg::Lazy)]
        mode: ModeArg,
    },
    /// Find Pauli measurements that carve a cluster into a target graph.
    Prune {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        /// Kept vertices, comma separated (row-major ids).
        #[arg(long, value_delimiter = ',')]
        keep: Vec<u32>,
        /// Target edges as `a-b`, comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse_edge)]
        edges: Vec<(u32, u32)>,
    },
    /// Derive link and coherence budgets.
    Budget {
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        #[arg(long)]
        attempt_time: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, value_enum, default_value_t = SchemeArg::TwoPhoton)]
        scheme: SchemeArg,
        #[arg(long)]
        client_t2: Option<f64>,
        #[arg(long)]
        fault_budget: Option<f64>,
        /// Cavity quality factor; with mode volume and index adds a Purcell factor.
        #[arg(long, requires_all = ["mode_volume", "refractive_index"])]
        quality_factor: Option<f64>,
        /// Mode volume in cubic wavelengths.
        #[arg(long)]
        mode_volume: Option<f64>,
        #[arg(long)]
        refractive_index: Option<f64>,
        #[arg(long, requires = "t2_pure_dephasing")]
        t1: Option<f64>,
        #[arg(long)]
        t2_pure_dephasing: Option<f64>,
    },
    /// Run the oracle-equivalence suites.
    Verify {
        /// Suites to run: graph, patterns, growth, brokers, erasure.
        #[arg(long, value_delimiter = ',')]
        suite: Vec<String>,
        /// Deliberately break one check per suite.
        #[arg(long)]
        inject_failure: bool,
    },
}

fn parse_edge(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once('-').ok_or_else(|| format!("edge {s:?} is not of the form a-b"))?;
    let num = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("edge {s:?}: {e}"));
    Ok((num(a)?, num(b)?))
}

fn scheme(arg: SchemeArg, epsilon: f64) -> Scheme {
    match arg {
        SchemeArg::Ideal => Scheme::IdealSingleClick,
        SchemeArg::Weak => Scheme::WeakExcitation { epsilon },
        SchemeArg::TwoPhoton => Scheme::TwoPhoton,
    }
}

fn build_scenario(command: Command) -> Result<Scenario> {
    let s = match command {
        Command::Run { scenario } => Scenario::load(&scenario)?,
        Command::Entangle { eta, dark_prob, scheme: sch, epsilon, threshold } => {
            let mut s = Scenario::new(Experiment::Entangle);
            s.hardware.apparatus =
                Some(ApparatusParams { eta, dark_prob, scheme: scheme(sch, epsilon), number_resolving: !threshold });
            s
        }
        Command::Grow { strategy, p, attempt_time, steps, initial_length, trace_every, nodes, edges } => {
            let mut s = Scenario::new(Experiment::Grow);
            s.hardware.link = Some(LinkModel { p_success: p, attempt_time });
            s.strategy = match strategy {
                StrategyArg::Branch => Strategy::Branch { steps, initial_length, trace_every },
                StrategyArg::Broker => Strategy::Broker { nodes, edges },
            };
            s
        }
        Command::RunPattern { circuit, pattern, input, mode } => {
            let mut s = Scenario::new(Experiment::RunPattern);
            s.target.circuit = circuit;
            s.target.pattern = pattern;
            s.target.input = input;
            s.target.mode = match mode {
                ModeArg::Lazy => Execution::Lazy,
                ModeArg::Eager => Execution::Eager,
            };
            s
        }
        Command::Prune { rows, cols, keep, edges } => {
            let mut s = Scenario::new(Experiment::Prune);
            s.target.rows = Some(rows);
            s.target.cols = Some(cols);
            s.target.keep = keep;
            s.target.edges = edges;
            s
        }
        Command::Budget {
            preset,
            attempt_time,
            eta,
            scheme: sch,
            client_t2,
            fault_budget,
            quality_factor,
            mode_volume,
            refractive_index,
            t1,
            t2_pure_dephasing,
        } => {
            let mut s = Scenario::new(Experiment::Budget);
            if preset.is_none() && (attempt_time.is_none() || eta.is_none() || client_t2.is_none()) {
                bail!("budget needs --preset or all of --attempt-time, --eta and --client-t2");
            }
            s.budget.preset = preset;
            s.budget.attempt_time = attempt_time;
            s.budget.client_t2 = client_t2;
            s.budget.fault_budget = fault_budget;
            s.hardware.apparatus = eta.map(|eta| ApparatusParams {
                eta,
                dark_prob: 0.0,
                scheme: scheme(sch, 0.1),
                number_resolving: false,
            });
            if let (Some(q), Some(v), Some(n)) = (quality_factor, mode_volume, refractive_index) {
                s.hardware.cavity = Some(CavityParams { quality_factor: q, mode_volume: v, refractive_index: n });
            }
            if let (Some(t1), Some(tpd)) = (t1, t2_pure_dephasing) {
                s.hardware.spin = Some(SpinTimes { t1, t2_pure_dephasing: tpd });
            }
            s
        }
        Command::Verify { suite, inject_failure } => {
            let mut s = Scenario::new(Experiment::Verify);
            s.verify.suites = suite;
            s.verify.inject_failure = inject_failure;
            s
        }
    };
    Ok(s)
}

fn execute(mut s: Scenario, common: &Common) -> Result<(RunRecord, Vec<(String, String)>)> {
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    if let Some(trials) = common.trials {
        s.trials = Some(trials);
    }
    s.validate()?;
    let digest = record::scenario_digest(&s)?;
    let start = Instant::now();
    let out = match s.experiment {
        Experiment::Entangle => experiments::entangle(&s, common.dump_state)?,
        Experiment::Grow => experiments::grow(&s)?,
        Experiment::RunPattern => experiments::run_pattern_experiment(&s, common.dump_state)?,
        Experiment::Prune => experiments::prune(&s)?,
        Experiment::Budget => experiments::budget(&s)?,
        Experiment::Verify => experiments::verify(&s)?,
    };
    let record = RunRecord {
        experiment: s.experiment,
        scenario_digest: digest,
        seed: s.seed,
        trials: s.trials(),
        passed: out.passed,
        results: out.results,
        aggregates: out.aggregates,
        model_time: out.model_time,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((record, out.traces))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version go to stdout with success; usage errors share the config-error code.
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = build_scenario(cli.command).and_then(|s| execute(s, &cli.common)).and_then(|(record, traces)| {
        match &cli.common.out {
            Some(dir) => {
                record::write_dir(dir, &record, &traces)?;
                eprintln!("wrote {}", dir.join("record.json").display());
            }
            None if cli.common.format == Format::Csv => {
                std::io::stdout().lock().write_all(record::results_csv(&record.results)?.as_bytes())?
            }
            None => writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&record)?)?,
        }
        Ok(record.passed)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
