//! Command-line interface: Monte-Carlo simulation, parameter search,
//! degeneracy profiling, decoder training, and overcomplete check-set
//! generation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use qbp4::codes::{CodeConfig, StabilizerCode, ToricLayout};
use qbp4::decoder::{Bp4Decoder, DecoderConfig, WeightFile, WeightSet};
use qbp4::harness::{
    csv_row, degeneracy_profile, estimate_fer, grid_search, line_search_eps0, run_experiment,
    ExperimentConfig, MatrixChoice, StopRule, CSV_HEADER,
};
use qbp4::overcomplete::{
    combinations_all, gb_natural, randomized_low_weight_search, toric_weight6, OvercompleteCheckSet,
};
use qbp4::training::{train, TrainConfig};

#[derive(Parser)]
#[command(name = "qbp4", about = "Quaternary BP decoding toolkit for quantum LDPC codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo FER sweep over physical error probabilities
    Simulate(SimulateArgs),
    /// Line search over eps0 or joint (eps0, wr) grid search
    Search(SearchArgs),
    /// TypeII-success fraction per fixed error weight
    Degeneracy(DegeneracyArgs),
    /// Train decoder weights with SGD on the degeneracy-aware loss
    Train(TrainArgs),
    /// Generate an overcomplete check-set file for a code
    Codegen(CodegenArgs),
    /// Run a multi-series experiment file and write a CSV
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct CodeMatrixArgs {
    /// Code configuration JSON file
    #[arg(long)]
    code: PathBuf,
    /// Optional overcomplete check-set text file
    #[arg(long)]
    overcomplete: Option<PathBuf>,
}

impl CodeMatrixArgs {
    fn load(&self) -> Result<(StabilizerCode, Option<OvercompleteCheckSet>), Box<dyn std::error::Error>> {
        let (code, _) = CodeConfig::load(&self.code)?.build()?;
        let oc = match &self.overcomplete {
            Some(p) => Some(OvercompleteCheckSet::from_text(&std::fs::read_to_string(p)?)?),
            None => None,
        };
        Ok((code, oc))
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum DecoderKind {
    Bp4,
    Nbp4,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    code: CodeMatrixArgs,
    #[arg(long, value_enum, default_value = "bp4")]
    decoder: DecoderKind,
    /// Trained weight file (required for nbp4)
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Comma-separated list of depolarizing probabilities
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    eps0: f64,
    #[arg(long, default_value_t = 1.0)]
    wr: f64,
    #[arg(short = 'L', long, default_value_t = 32)]
    iterations: usize,
    #[arg(long, default_value_t = 300)]
    target_errors: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum SearchMode {
    Line,
    Grid,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    code: CodeMatrixArgs,
    #[arg(long, value_enum)]
    mode: SearchMode,
    /// Evaluation depolarizing probability
    #[arg(long)]
    eps_eval: f64,
    /// eps0 candidates (line) or grid axis (grid)
    #[arg(long, value_delimiter = ',', required = true)]
    eps0: Vec<f64>,
    /// wr grid axis (grid mode only)
    #[arg(long, value_delimiter = ',')]
    wr: Vec<f64>,
    #[arg(short = 'L', long, default_value_t = 32)]
    iterations: usize,
    #[arg(long, default_value_t = 300)]
    target_errors: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct DegeneracyArgs {
    #[command(flatten)]
    code: CodeMatrixArgs,
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    eps0: f64,
    #[arg(long, default_value_t = 1.0)]
    wr: f64,
    #[arg(short = 'L', long, default_value_t = 32)]
    iterations: usize,
    #[arg(long, default_value_t = 1)]
    min_weight: usize,
    #[arg(long)]
    max_weight: usize,
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    code: CodeMatrixArgs,
    /// Training configuration JSON file
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, ValueEnum)]
enum OvercompleteKind {
    /// Toric weight-4 plus adjacent-pair weight-6 rows (3n rows)
    Toric6,
    /// All 2^r − 1 row combinations per CSS block (small codes only)
    Combinations,
    /// All circulant rows of a generalized bicycle code
    GbNatural,
    /// Randomized low-weight row search
    Search,
}

#[derive(Args)]
struct CodegenArgs {
    /// Code configuration JSON file
    #[arg(long)]
    code: PathBuf,
    #[arg(long, value_enum)]
    overcomplete: OvercompleteKind,
    /// Maximum row weight (search mode)
    #[arg(long, default_value_t = 8)]
    max_weight: usize,
    /// Randomized trials (search mode)
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment configuration JSON file
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Training file: decoder settings plus optional overrides of the training
/// defaults (NBP4 defaults without an overcomplete matrix, NOBP4 with one).
#[derive(Deserialize)]
struct TrainFileConfig {
    eps0: f64,
    #[serde(rename = "L")]
    iterations: usize,
    #[serde(default)]
    wr: Option<f64>,
    #[serde(default)]
    batch_size: Option<usize>,
    #[serde(default)]
    patterns_per_epsilon: Option<usize>,
    #[serde(default)]
    epsilon_set: Option<Vec<f64>>,
    #[serde(default)]
    batch_count: Option<usize>,
    #[serde(default)]
    learning_rate_start: Option<f64>,
    #[serde(default)]
    learning_rate_end: Option<f64>,
    #[serde(default)]
    gradient_clip: Option<f64>,
}

fn build_decoder(
    code: &StabilizerCode,
    oc: Option<&OvercompleteCheckSet>,
    config: DecoderConfig,
) -> qbp4::Result<Bp4Decoder> {
    match oc {
        Some(oc) => Bp4Decoder::for_overcomplete(oc, config),
        None => Bp4Decoder::new(&code.s, config),
    }
}

fn load_weights(path: &Path) -> Result<WeightSet, Box<dyn std::error::Error>> {
    Ok(WeightFile::from_json(&std::fs::read_to_string(path)?)?.to_weight_set())
}

fn code_label(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "code".into())
}

fn main() {
    if let Ok(workers) = std::env::var("QBP4_WORKERS") {
        if let Ok(n) = workers.parse::<usize>() {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .ok();
        }
    }
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Search(a) => search(a),
        Command::Degeneracy(a) => degeneracy(a),
        Command::Train(a) => train_cmd(a),
        Command::Codegen(a) => codegen(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn simulate(a: SimulateArgs) -> Result<(), Box<dyn std::error::Error>> {
    let (code, oc) = a.code.load()?;
    let config = DecoderConfig {
        epsilon0: a.eps0,
        max_iterations: a.iterations,
        wr: a.wr,
        ..DecoderConfig::default()
    };
    let decoder = build_decoder(&code, oc.as_ref(), config)?;
    let weights = match (&a.decoder, &a.weights) {
        (DecoderKind::Nbp4, Some(p)) => Some(load_weights(p)?),
        (DecoderKind::Nbp4, None) => return Err("nbp4 requires --weights".into()),
        (DecoderKind::Bp4, _) => None,
    };
    let decoder_name = match (a.decoder, oc.is_some()) {
        (DecoderKind::Bp4, false) => "bp4",
        (DecoderKind::Bp4, true) => "obp4",
        (DecoderKind::Nbp4, false) => "nbp4",
        (DecoderKind::Nbp4, true) => "nobp4",
    };
    let stop = StopRule {
        target_frame_errors: a.target_errors,
        max_trials: a.max_trials,
    };
    let matrix_kind = if oc.is_some() { "overcomplete" } else { "plain" };
    let label = code_label(&a.code.code);
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for &eps in &a.eps {
        let point = estimate_fer(&decoder, &code, weights.as_ref(), eps, &stop, a.seed)?;
        csv.push_str(&csv_row(
            &label,
            matrix_kind,
            decoder_name,
            a.iterations,
            a.eps0,
            a.wr,
            &point,
            a.seed,
        ));
        csv.push('\n');
    }
    match a.out {
        Some(p) => std::fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn search(a: SearchArgs) -> Result<(), Box<dyn std::error::Error>> {
    let (code, oc) = a.code.load()?;
    let template = DecoderConfig {
        max_iterations: a.iterations,
        ..DecoderConfig::default()
    };
    let stop = StopRule {
        target_frame_errors: a.target_errors,
        max_trials: a.max_trials,
    };
    let result = match a.mode {
        SearchMode::Line => {
            let choice = match &oc {
                Some(oc) => MatrixChoice::Overcomplete(oc),
                None => MatrixChoice::Plain,
            };
            line_search_eps0(&choice, &code, template, &a.eps0, a.eps_eval, &stop, a.seed)?
        }
        SearchMode::Grid => {
            let oc = oc
                .as_ref()
                .ok_or("grid search requires --overcomplete")?;
            let wr = if a.wr.is_empty() { vec![1.0] } else { a.wr.clone() };
            grid_search(oc, &code, template, &a.eps0, &wr, a.eps_eval, &stop, a.seed)?
        }
    };
    println!("eps0,wr,fer,fer_ci95_lo,fer_ci95_hi,avg_iters,trials,frame_errors,censored");
    for e in &result.entries {
        let (lo, hi) = e.point.wilson_ci95();
        println!(
            "{},{},{},{lo},{hi},{},{},{},{}",
            e.eps0,
            e.wr,
            e.point.fer,
            e.point.avg_iterations,
            e.point.trials,
            e.point.frame_errors,
            e.point.censored
        );
    }
    println!("# {}", result.note);
    Ok(())
}

fn degeneracy(a: DegeneracyArgs) -> Result<(), Box<dyn std::error::Error>> {
    let (code, oc) = a.code.load()?;
    let config = DecoderConfig {
        epsilon0: a.eps0,
        max_iterations: a.iterations,
        wr: a.wr,
        ..DecoderConfig::default()
    };
    let decoder = build_decoder(&code, oc.as_ref(), config)?;
    let weights = match &a.weights {
        Some(p) => Some(load_weights(p)?),
        None => None,
    };
    let points = degeneracy_profile(
        &decoder,
        &code,
        weights.as_ref(),
        a.min_weight..=a.max_weight,
        a.samples,
        a.seed,
    )?;
    println!("weight,samples,type1_succ,type2_succ,flagged,unflagged,type2_fraction");
    for p in points {
        println!(
            "{},{},{},{},{},{},{}",
            p.weight,
            p.samples,
            p.outcome_counts[0],
            p.outcome_counts[1],
            p.outcome_counts[2],
            p.outcome_counts[3],
            p.type2_fraction
        );
    }
    Ok(())
}

fn train_cmd(a: TrainArgs) -> Result<(), Box<dyn std::error::Error>> {
    let (code, oc) = a.code.load()?;
    let file: TrainFileConfig = serde_json::from_str(&std::fs::read_to_string(&a.config)?)?;
    let decoder_config = DecoderConfig {
        epsilon0: file.eps0,
        max_iterations: file.iterations,
        wr: file.wr.unwrap_or(1.0),
        ..DecoderConfig::default()
    };
    let decoder = build_decoder(&code, oc.as_ref(), decoder_config)?;
    let mut tc = if oc.is_some() {
        TrainConfig::nobp4(a.seed)
    } else {
        TrainConfig::nbp4(a.seed)
    };
    if let Some(v) = file.patterns_per_epsilon {
        tc.patterns_per_epsilon = v;
    }
    if let Some(v) = file.epsilon_set {
        tc.epsilon_set = v;
    }
    tc.batch_size = file
        .batch_size
        .unwrap_or(tc.patterns_per_epsilon * tc.epsilon_set.len());
    if let Some(v) = file.batch_count {
        tc.batch_count = v;
    }
    if let Some(v) = file.learning_rate_start {
        tc.learning_rate_start = v;
    }
    if let Some(v) = file.learning_rate_end {
        tc.learning_rate_end = v;
    }
    if let Some(v) = file.gradient_clip {
        tc.gradient_clip = v;
    }
    let report = train(&decoder, &code.sperp, &tc)?;
    let matrix = match &oc {
        Some(oc) => &oc.hoc,
        None => &code.s,
    };
    let wf = WeightFile::new(&report.weights, decoder.graph(), matrix, &decoder_config);
    std::fs::write(&a.out, wf.to_json()?)?;
    if let (Some(first), Some(last)) = (report.batch_losses.first(), report.batch_losses.last()) {
        eprintln!(
            "trained {} batches; batch loss {first:.4} -> {last:.4}",
            report.batch_losses.len()
        );
    }
    Ok(())
}

fn codegen(a: CodegenArgs) -> Result<(), Box<dyn std::error::Error>> {
    let (code, layout): (StabilizerCode, Option<ToricLayout>) =
        CodeConfig::load(&a.code)?.build()?;
    let oc = match a.overcomplete {
        OvercompleteKind::Toric6 => {
            let layout = layout.ok_or("toric6 requires a toric code config")?;
            toric_weight6(&code, &layout)?
        }
        OvercompleteKind::Combinations => combinations_all(&code)?,
        OvercompleteKind::GbNatural => gb_natural(&code)?,
        OvercompleteKind::Search => {
            randomized_low_weight_search(&code, a.max_weight, a.trials, a.seed)?
        }
    };
    std::fs::write(&a.out, oc.to_text())?;
    eprintln!("wrote {} checks ({} redundant)", oc.num_rows(), oc
        .redundant
        .iter()
        .filter(|&&r| r)
        .count());
    Ok(())
}

fn experiment(a: ExperimentArgs) -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig::load(&a.config)?;
    let base = a.config.parent().unwrap_or(Path::new("."));
    run_experiment(&config, base, &a.out)?;
    Ok(())
}
