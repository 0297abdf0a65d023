//! Command-line front end for `varobs`: dataset generation, training, Fisher
//! reports and the reproduction presets.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use varobs::ansatz::AnsatzSpec;
use varobs::data::{generate, DatasetConfig, Family, QubitInput, Sampler, TrainingSet};
use varobs::experiments::{equispaced, find_preset, run_preset, PRESETS};
use varobs::metrology::{local_optimal_observable, model_report, observable_report, FisherReport, StateFamily};
use varobs::observable::ObservableSpec;
use varobs::regression::{fit_bias, train, train_bayes, BayesTarget, CostWeights, Shots, TrainConfig, TrainedModel};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "varobs", version, about = "Variational observables for regression on quantum states")]
pub struct Cli {
    /// Worker threads for the data-parallel cost evaluation.
    #[arg(long, global = true, env = "VAROBS_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled training set.
    Generate(GenerateArgs),
    /// Train an observable on a dataset.
    Train(TrainArgs),
    /// Per-point Fisher report of a trained (or locally optimal) observable.
    Report(ReportArgs),
    /// Run a reproduction preset and check it against its targets.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Ad,
    Depolarizing,
    Rotation,
    Bell,
    Isotropic,
    Ising,
    RandomPure,
    RandomMixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputArg {
    Plus,
    Zero,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Grid,
    Linspace,
    Uniform,
    BellP,
    IsoQ,
    Binned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnsatzArg {
    Hea,
    Qcnn,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyArg>,
    /// Channel input state for the single-qubit families.
    #[arg(long, value_enum, default_value = "plus")]
    pub input: InputArg,
    /// Ising chain length.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    #[arg(long, default_value_t = 0.05)]
    pub h_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub h_max: f64,
}

impl FamilyArgs {
    pub fn family(&self) -> anyhow::Result<Family> {
        let input = match self.input {
            InputArg::Plus => QubitInput::Plus,
            InputArg::Zero => QubitInput::Zero,
            InputArg::Mixed => QubitInput::MaximallyMixed,
        };
        let family = match self.family.context("--family is required")? {
            FamilyArg::Ad => Family::AmplitudeDamping { input },
            FamilyArg::Depolarizing => Family::Depolarizing { input },
            FamilyArg::Rotation => Family::ZRotation { input },
            FamilyArg::Bell => Family::BellType,
            FamilyArg::Isotropic => Family::Isotropic,
            FamilyArg::Ising => Family::Ising {
                n_qubits: self.n,
                coupling: self.coupling,
                h_min: self.h_min,
                h_max: self.h_max,
            },
            FamilyArg::RandomPure => Family::RandomPure,
            FamilyArg::RandomMixed => Family::RandomMixed,
        };
        family.validate()?;
        Ok(family)
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Defaults: bell-p for bell, iso-q for isotropic, linspace for ising,
    /// binned for the random families, uniform otherwise.
    #[arg(long, value_enum)]
    pub sampler: Option<SamplerArg>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    #[arg(long, default_value_t = 1)]
    pub label_power: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; the JSON goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "hea")]
    pub ansatz: AnsatzArg,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Measured input qubits.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    /// Naimark ancillas.
    #[arg(long, default_value_t = 0)]
    pub naimark: usize,
    #[arg(long, default_value_t = 1.0)]
    pub w_ls: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub w_var: f64,
    /// `exact` or a positive shot count per state.
    #[arg(long, default_value = "exact")]
    pub shots: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Minimize the flat-prior Bayesian risk over the set instead.
    #[arg(long)]
    pub bayes: bool,
    /// Fit a bias polynomial of this degree after training.
    #[arg(long)]
    pub bias_degree: Option<usize>,
    /// Model file; the JSON goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// History CSV; defaults to `<out>.history.csv` next to the model.
    #[arg(long)]
    pub history: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long, required_unless_present = "local_optimal")]
    pub model: Option<PathBuf>,
    /// Take the family (and copies) from a dataset file instead of the family flags.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Copies for `--local-optimal`; a model carries its own.
    #[arg(long, default_value_t = 1)]
    pub copies: usize,
    /// Report the locally optimal observable at each grid point instead of a model.
    #[arg(long, conflicts_with = "model")]
    pub local_optimal: bool,
    #[arg(long)]
    pub grid_min: Option<f64>,
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long, default_value_t = 19)]
    pub points: usize,
    /// Repetitions in the Cramér-Rao bounds.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// CSV file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproduceArgs {
    #[arg(required_unless_present = "list")]
    pub id: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Directory for models, histories and reports.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Allow the long-running presets.
    #[arg(long)]
    pub long: bool,
    /// List the presets and exit.
    #[arg(long)]
    pub list: bool,
}

/// Exit code for a failed command: 3 for numerical breakdowns, 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use varobs::Error as E;
    match err.downcast_ref::<varobs::Error>() {
        Some(
            E::Divergence(_)
            | E::EigenFailure
            | E::FisherSingularity { .. }
            | E::Degenerate(_)
            | E::Singular { .. }
            | E::SamplingExhausted { .. },
        ) => EXIT_NUMERIC,
        _ => EXIT_USAGE,
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn main_with(cli: Cli) -> u8 {
    match run(cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

/// `Ok(false)` means the command ran but an acceptance check failed.
pub fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            bail!("--threads must be positive");
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match cli.command {
        Command::Generate(a) => cmd_generate(&a).map(|_| true),
        Command::Train(a) => cmd_train(&a).map(|_| true),
        Command::Report(a) => cmd_report(&a).map(|_| true),
        Command::Reproduce(a) => cmd_reproduce(&a),
    }
}

fn emit(out: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, contents).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub fn load_dataset(path: &Path) -> anyhow::Result<TrainingSet> {
    TrainingSet::from_json_bytes(&read(path)?).with_context(|| format!("loading dataset {}", path.display()))
}

pub fn load_model(path: &Path) -> anyhow::Result<TrainedModel> {
    TrainedModel::from_json_bytes(&read(path)?).with_context(|| format!("loading model {}", path.display()))
}

fn default_sampler(family: &Family) -> SamplerArg {
    match family {
        Family::BellType => SamplerArg::BellP,
        Family::Isotropic => SamplerArg::IsoQ,
        Family::Ising { .. } => SamplerArg::Linspace,
        Family::RandomPure | Family::RandomMixed => SamplerArg::Binned,
        _ => SamplerArg::Uniform,
    }
}

pub fn dataset_config(a: &GenerateArgs) -> anyhow::Result<DatasetConfig> {
    let family = a.family.family()?;
    let count = a.count;
    let sampler = match a.sampler.unwrap_or_else(|| default_sampler(&family)) {
        SamplerArg::Grid => Sampler::Grid { count },
        SamplerArg::Linspace => Sampler::Linspace { count },
        SamplerArg::Uniform => Sampler::Uniform { count },
        SamplerArg::BellP => Sampler::BellUniformP { count },
        SamplerArg::IsoQ => Sampler::IsotropicUniformQ { count },
        SamplerArg::Binned => Sampler::Binned { count, bins: a.bins },
    };
    Ok(DatasetConfig::new(family, sampler)
        .copies(a.copies)
        .label_power(a.label_power)
        .seed(a.seed))
}

fn cmd_generate(a: &GenerateArgs) -> anyhow::Result<()> {
    let set = generate(&dataset_config(a)?)?;
    emit(a.out.as_deref(), &set.to_json()?)?;
    let (lo, hi) = set.labels().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    eprintln!(
        "generated {} states on {} qubits, labels in [{lo:.4}, {hi:.4}]",
        set.len(),
        set.n_qubits()
    );
    Ok(())
}

fn history_path(a: &TrainArgs) -> Option<PathBuf> {
    a.history
        .clone()
        .or_else(|| a.out.as_ref().map(|p| p.with_extension("history.csv")))
}

pub fn write_history(model: &TrainedModel, path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["iteration", "cost", "evaluations"])?;
    for r in &model.history {
        w.write_record([r.iteration.to_string(), r.cost.to_string(), r.evaluations.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_train(a: &TrainArgs) -> anyhow::Result<()> {
    let set = load_dataset(&a.data)?;
    let n = set.n_qubits();
    let ansatz = match a.ansatz {
        AnsatzArg::Hea => AnsatzSpec::hea(n + a.naimark, a.layers),
        AnsatzArg::Qcnn => AnsatzSpec::qcnn(n + a.naimark),
    };
    let spec = ObservableSpec::new(n, a.m, a.naimark, ansatz)?;
    let config = TrainConfig {
        max_iterations: a.max_iter,
        shots: a.shots.parse::<Shots>()?,
        seed: a.seed,
        restarts: a.restarts,
        ..TrainConfig::default()
    };
    let mut model = if a.bayes {
        train_bayes(BayesTarget::Set(&set), &spec, &config)?
    } else {
        train(&set, &spec, CostWeights::new(a.w_ls, a.w_var)?, &config)?
    };
    if let Some(degree) = a.bias_degree {
        model = fit_bias(&model, &set, degree)?;
    }
    emit(a.out.as_deref(), &model.to_json()?)?;
    if let Some(path) = history_path(a) {
        write_history(&model, &path)?;
    }
    let s = &model.summary;
    eprintln!(
        "trained {} parameters: cost {:.6e} after {} iterations ({} evaluations), converged {}",
        spec.param_count() + model.x_star.len(),
        s.final_cost,
        s.iterations,
        s.function_evaluations,
        s.converged
    );
    Ok(())
}

pub fn write_report(rows: &[FisherReport], out: Option<&Path>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FisherReport::CSV_HEADER.split(','))?;
    for r in rows {
        w.write_record(
            [r.alpha, r.prediction, r.d_pred, r.variance, r.cfi, r.qfi, r.ccrb, r.qcrb].map(|v| v.to_string()),
        )?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    emit(out, std::str::from_utf8(&bytes)?)
}

fn cmd_report(a: &ReportArgs) -> anyhow::Result<()> {
    let model = a.model.as_deref().map(load_model).transpose()?;
    let family = match &a.data {
        Some(path) => load_dataset(path)?.family,
        None => a.family.family()?,
    };
    let copies = model.as_ref().map_or(a.copies, |m| m.copies);
    let states = StateFamily::from_family(&family, copies)?;
    let (lo, hi) = states.range();
    // the default grid stays off the edges, where the information can diverge
    let pad = 0.05 * (hi - lo);
    let alphas = equispaced(a.grid_min.unwrap_or(lo + pad), a.grid_max.unwrap_or(hi - pad), a.points);
    if alphas.is_empty() {
        bail!("report grid is empty");
    }
    let rows = match &model {
        Some(m) => model_report(m, &states, &alphas, a.mu)?,
        None => alphas
            .iter()
            .map(|&alpha| {
                let h = local_optimal_observable(&states, alpha)?;
                Ok(observable_report(&h, &states, &[alpha], a.mu)?[0])
            })
            .collect::<anyhow::Result<Vec<_>>>()?,
    };
    write_report(&rows, a.out.as_deref())
}

fn cmd_reproduce(a: &ReproduceArgs) -> anyhow::Result<bool> {
    if a.list {
        for p in PRESETS {
            println!("{:<14} {}{}", p.id, p.description, if p.long { " [long]" } else { "" });
        }
        return Ok(true);
    }
    let id = a.id.as_deref().context("missing preset id")?;
    let preset = find_preset(id).with_context(|| format!("unknown preset `{id}` (see --list)"))?;
    if preset.long && !a.long {
        bail!("preset `{id}` is long-running; pass --long to run it");
    }
    let outcome = run_preset(id, a.seed)?;
    for c in &outcome.checks {
        println!("{}", c.line());
    }
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, contents) in &outcome.artifacts {
            fs::write(dir.join(name), contents).with_context(|| format!("writing {name}"))?;
        }
    }
    let pass = outcome.pass();
    println!("{} {id}", if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}
