//! Command-line interface.
//!
//! Exit codes: 0 on success, 2 for invalid input (bad flags, config or
//! data), 1 when a run fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use delta_core::subnet::train_dual;

use crate::bench::{bench_uncertainty, BenchConfig};
use crate::config::{DataSource, ExperimentSpec};
use crate::error::{HarnessError, Result};
use crate::experiment::{choose, evaluate, load_data, retrain_and_evaluate, run_experiment, seeded, Trained};
use crate::io::{save_graph, write_atomic, GraphFiles};
use crate::report::{load_json, save_json, trace_csv, Checkpoint, EvalReport, SeedResult, SelectionReport};

#[derive(Debug, Parser)]
#[command(name = "delta", version, about = "Active node selection for graph domain adaptation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat TOML config file; keys override the defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed (the first seed for `run`).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic source/target pair as graph files.
    Synth(Common),
    /// Train both subnetworks; writes a checkpoint and loss traces.
    Train(Common),
    /// Choose target nodes to annotate with a trained checkpoint.
    Select {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        checkpoint: PathBuf,
    },
    /// Score a selection by retraining with it, or score a checkpoint as is.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        selection: Option<PathBuf>,
    },
    /// Full experiment over all configured seeds.
    Run(Common),
    /// Time the uncertainty scorer on growing random graphs.
    BenchUncertainty {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "200,400,800")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 2.0)]
        edges_per_node: f64,
    },
}

struct Context {
    spec: ExperimentSpec,
    seed: u64,
    out: PathBuf,
}

impl Common {
    fn context(&self) -> Result<Context> {
        let mut spec = match &self.config {
            Some(path) => ExperimentSpec::from_file(path)?,
            None => ExperimentSpec::default(),
        };
        if let Some(seed) = self.seed {
            spec.base_seed = seed;
        }
        if let Some(out) = &self.out {
            spec.out = out.clone();
        }
        spec.validate()?;
        Ok(Context {
            seed: spec.base_seed,
            out: spec.out.clone(),
            spec,
        })
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                2
            } else {
                let _ = write!(stdout, "{text}");
                0
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Synth(common) => synth(&common.context()?, stdout),
        Command::Train(common) => train(&common.context()?, stdout),
        Command::Select { common, checkpoint } => select_cmd(&common.context()?, &checkpoint, stdout),
        Command::Evaluate {
            common,
            checkpoint,
            selection,
        } => evaluate_cmd(&common, checkpoint.as_deref(), selection.as_deref(), stdout),
        Command::Run(common) => run(&common.context()?, stdout),
        Command::BenchUncertainty {
            common,
            sizes,
            reps,
            edges_per_node,
        } => {
            let ctx = common.context()?;
            let cfg = BenchConfig {
                sizes,
                reps,
                edges_per_node,
                hops: ctx.spec.select.hops,
                seed: ctx.seed,
                ..BenchConfig::default()
            };
            bench(&ctx, &cfg, stdout)
        }
    }
}

fn say(stdout: &mut dyn Write, line: impl AsRef<str>) {
    let _ = writeln!(stdout, "{}", line.as_ref());
}

fn synth(ctx: &Context, stdout: &mut dyn Write) -> Result<()> {
    if !matches!(ctx.spec.data, DataSource::Synthetic(_)) {
        return Err(HarnessError::validation("synth needs a synthetic config, not graph files"));
    }
    let (source, target) = load_data(&ctx.spec.data, ctx.seed)?;
    save_graph(&source, &GraphFiles::in_dir(&ctx.out, "source"))?;
    save_graph(&target, &GraphFiles::in_dir(&ctx.out, "target"))?;
    for (name, g) in [("source", &source), ("target", &target)] {
        say(
            stdout,
            format!(
                "{name}: {} nodes, {} edges, {} labeled",
                g.num_nodes(),
                g.num_edges(),
                g.labeled_nodes().len()
            ),
        );
    }
    say(stdout, format!("wrote {}", ctx.out.display()));
    Ok(())
}

fn train(ctx: &Context, stdout: &mut dyn Write) -> Result<()> {
    let (source, target) = load_data(&ctx.spec.data, ctx.seed)?;
    let cfg = seeded(&ctx.spec.train, ctx.seed);
    let model = train_dual(&source, &target, &cfg)?;
    let ck = Checkpoint::new(cfg, source.num_features(), source.num_classes(), &model);
    save_json(&ctx.out.join("checkpoint.json"), &ck)?;
    write_atomic(&ctx.out.join("trace_edge.csv"), trace_csv(&model.edge.trace).as_bytes())?;
    write_atomic(&ctx.out.join("trace_path.csv"), trace_csv(&model.path.trace).as_bytes())?;
    for (name, trace) in [("edge", &model.edge.trace), ("path", &model.path.trace)] {
        if let Some(last) = trace.last() {
            say(stdout, format!("{name}: final L_Sup {:.4}, L_DA {:.4}", last.supervised, last.adversarial));
        }
    }
    say(stdout, format!("wrote {}", ctx.out.join("checkpoint.json").display()));
    Ok(())
}

fn trained_from_checkpoint(ctx: &Context, seed: u64, checkpoint: &Path) -> Result<Trained> {
    let ck = Checkpoint::load(checkpoint)?;
    let (source, target) = load_data(&ctx.spec.data, seed)?;
    if (source.num_features(), source.num_classes()) != (ck.num_features, ck.num_classes) {
        return Err(HarnessError::validation(format!(
            "checkpoint expects {} features and {} classes, data has {} and {}",
            ck.num_features,
            ck.num_classes,
            source.num_features(),
            source.num_classes()
        )));
    }
    Trained::from_model(source, target, ck.model(), seed)
}

fn select_cmd(ctx: &Context, checkpoint: &Path, stdout: &mut dyn Write) -> Result<()> {
    let trained = trained_from_checkpoint(ctx, ctx.seed, checkpoint)?;
    let report = choose(&trained, ctx.spec.strategy, &ctx.spec.select)?;
    let path = ctx.out.join("selection.json");
    save_json(&path, &report)?;
    say(
        stdout,
        format!(
            "{}: {} candidates, selected {:?}",
            report.strategy, report.candidate_count, report.selected
        ),
    );
    say(stdout, format!("wrote {}", path.display()));
    Ok(())
}

fn evaluate_cmd(
    common: &Common,
    checkpoint: Option<&Path>,
    selection: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let ctx = common.context()?;
    let (report, seed, scores) = match (selection, checkpoint) {
        (Some(sel_path), _) => {
            let sel: SelectionReport = load_json(sel_path)?;
            let seed = common.seed.unwrap_or(sel.seed);
            let (source, target) = load_data(&ctx.spec.data, seed)?;
            let scores = retrain_and_evaluate(&source, &target, &sel.selected, &ctx.spec.train, seed)?;
            (sel, seed, scores)
        }
        (None, Some(ck_path)) => {
            let trained = trained_from_checkpoint(&ctx, ctx.seed, ck_path)?;
            let scores = evaluate(&trained.model.edge.net, &trained.target)?;
            let empty = SelectionReport {
                strategy: ctx.spec.strategy,
                seed: ctx.seed,
                config: ctx.spec.select.clone(),
                candidate_count: 0,
                scores: Vec::new(),
                selected: Vec::new(),
            };
            (empty, ctx.seed, scores)
        }
        (None, None) => return Err(HarnessError::validation("evaluate needs --selection or --checkpoint")),
    };
    let row = SeedResult {
        seed,
        macro_f1: scores.macro_f1,
        micro_f1: scores.micro_f1,
        selection_seconds: 0.0,
        selected: report.selected,
    };
    let eval = EvalReport::new(report.strategy, seeded(&ctx.spec.train, seed), report.config, vec![row]);
    let path = ctx.out.join("eval_report.json");
    save_json(&path, &eval)?;
    say(stdout, format!("Macro-F1 {:.4}  Micro-F1 {:.4}", scores.macro_f1, scores.micro_f1));
    say(stdout, format!("wrote {}", path.display()));
    Ok(())
}

fn run(ctx: &Context, stdout: &mut dyn Write) -> Result<()> {
    let report = run_experiment(&ctx.spec)?;
    let path = ctx.out.join("eval_report.json");
    save_json(&path, &report)?;
    for s in &report.seeds {
        say(
            stdout,
            format!("seed {}: Macro-F1 {:.4}  Micro-F1 {:.4}", s.seed, s.macro_f1, s.micro_f1),
        );
    }
    say(
        stdout,
        format!(
            "{}: Macro-F1 {:.4} ± {:.4}  Micro-F1 {:.4} ± {:.4}",
            report.strategy, report.macro_f1.mean, report.macro_f1.std, report.micro_f1.mean, report.micro_f1.std
        ),
    );
    say(stdout, format!("wrote {}", path.display()));
    Ok(())
}

fn bench(ctx: &Context, cfg: &BenchConfig, stdout: &mut dyn Write) -> Result<()> {
    let rows = bench_uncertainty(cfg)?;
    let mut prev: Option<f64> = None;
    for r in &rows {
        let ratio = prev.map(|p| format!("  x{:.2}", r.seconds / p)).unwrap_or_default();
        say(stdout, format!("V={:>6} E={:>7}  {:.6} s{ratio}", r.nodes, r.edges, r.seconds));
        prev = Some(r.seconds);
    }
    let path = ctx.out.join("bench_uncertainty.json");
    save_json(&path, &rows)?;
    say(stdout, format!("wrote {}", path.display()));
    Ok(())
}
