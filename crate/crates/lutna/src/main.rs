//! Command-line front end. Every experiment writes plot-ready CSV under
//! `--out-dir`; reruns with identical flags and seed produce byte-identical
//! files (no timestamps inside data files).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lutna::hwcost::{self, UnitCosts};
use lutna::ltp::{self, LtpConfig, PruneScope, RewindMode};
use lutna::lutcore::{self, MultiplierConfig, Scheme};
use lutna::mixedprec::{self, Policy};
use lutna::modelio::{self, Dataset, DatasetSource};
use lutna::netsim::{self, QuantModel};
use lutna::Result;

#[derive(Parser)]
#[command(name = "lutna", version, about = "LUT-based multiplier and network simulator")]
struct Cli {
    /// RNG seed for anything stochastic (training init, synthetic data).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Directory for all output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Unit-cost file overriding the built-in relative costs.
    #[arg(long, global = true)]
    unit_costs: Option<PathBuf>,
    /// Model file (consumed by commands that evaluate a network).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Dataset spec: `synthetic:<kind>:<seed>:<size>`, `csv:<path>`,
    /// or `idx:<images>:<labels>`.
    #[arg(long, global = true)]
    dataset: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustive multiplier checks against the plain integer product.
    MulVerify(MulVerifyArgs),
    /// Component counts, area, and energy for a set of multiplier configs.
    CostReport(CostReportArgs),
    /// Lottery-ticket pruning run on a synthetic or file-backed dataset.
    Ltp(LtpArgs),
    /// Accuracy grid over activation/weight bit widths.
    BitSweep(BitSweepArgs),
    /// Activation/weight magnitude histograms and the LSB product distribution.
    ActStats(ActStatsArgs),
    /// Accuracy + energy of a model under each multiplier scheme.
    Simulate(SimulateArgs),
    /// Boundary-layer mixed-precision search.
    MixedSearch(MixedSearchArgs),
}

#[derive(Args)]
struct MulVerifyArgs {
    /// Operand width: 4, 8, or 16.
    #[arg(long)]
    bits: u8,
    /// Check the approximate multiplier's error bounds instead of exactness.
    #[arg(long)]
    approx: bool,
}

#[derive(Args)]
struct CostReportArgs {
    /// Comma-separated configs, e.g. `dnc-exact-4,dnc-approx-4,tlut-8`.
    #[arg(long, value_delimiter = ',', required = true)]
    schemes: Vec<String>,
    /// Baseline config for the cost ratios (defaults to the first scheme).
    #[arg(long)]
    baseline: Option<String>,
}

#[derive(Args)]
struct LtpArgs {
    /// MLP layer sizes, e.g. `2,16,2`.
    #[arg(long, value_delimiter = ',', required = true)]
    layers: Vec<usize>,
    /// Fraction of surviving weights pruned per round.
    #[arg(long, default_value_t = 0.2)]
    prune: f64,
    #[arg(long, default_value_t = 10)]
    rounds: usize,
    #[arg(long, default_value_t = 40)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    drop_limit: f64,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    /// Prune within each layer instead of globally.
    #[arg(long)]
    per_layer: bool,
    /// Re-randomize survivors each round instead of rewinding to the init.
    #[arg(long)]
    fresh_reinit: bool,
    #[arg(long, default_value_t = 8)]
    act_bits: u8,
    #[arg(long, default_value_t = 8)]
    weight_bits: u8,
    /// Every k-th sample goes to the validation split.
    #[arg(long, default_value_t = 5)]
    val_every: usize,
    /// File name (under --out-dir) for the quantized pruned model.
    #[arg(long, default_value = "ltp_model.lutna")]
    save_model: String,
}

#[derive(Args)]
struct BitSweepArgs {
    /// Inclusive activation-bit range, e.g. `2..8`.
    #[arg(long, default_value = "2..8")]
    act_bits: String,
    /// Inclusive weight-bit range, e.g. `2..8`.
    #[arg(long, default_value = "2..8")]
    weight_bits: String,
}

#[derive(Args)]
struct ActStatsArgs {
    /// Histogram bucket width in bits.
    #[arg(long, default_value_t = 4)]
    bits: u8,
}

#[derive(Args)]
struct SimulateArgs {
    /// Comma-separated schemes to simulate (default: dnc-exact, dnc-approx,
    /// tlut at the model's widths).
    #[arg(long, value_delimiter = ',')]
    schemes: Vec<String>,
}

#[derive(Args)]
struct MixedSearchArgs {
    /// `auto` picks from the cumulative MAC profile.
    #[arg(long, default_value = "auto")]
    policy: String,
    #[arg(long, default_value_t = 0.01)]
    max_loss: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    std::fs::create_dir_all(&cli.out_dir)?;
    let costs = match &cli.unit_costs {
        Some(path) => UnitCosts::load(path)?,
        None => UnitCosts::default_units(),
    };
    println!(
        "seed = {} | out-dir = {} | unit-costs = {}",
        cli.seed,
        cli.out_dir.display(),
        cli.unit_costs
            .as_deref()
            .map_or("builtin".into(), |p| p.display().to_string()),
    );
    match &cli.command {
        Command::MulVerify(args) => mul_verify(args),
        Command::CostReport(args) => cost_report(cli, args, &costs),
        Command::Ltp(args) => ltp_cmd(cli, args),
        Command::BitSweep(args) => bit_sweep(cli, args),
        Command::ActStats(args) => act_stats(cli, args),
        Command::Simulate(args) => simulate(cli, args, &costs),
        Command::MixedSearch(args) => mixed_search(cli, args, &costs),
    }
}

fn invalid(msg: impl Into<String>) -> lutna::Error {
    lutna::Error::InvalidConfig(msg.into())
}

fn load_model(cli: &Cli) -> Result<QuantModel> {
    let path = cli
        .model
        .as_deref()
        .ok_or_else(|| invalid("this command needs --model <file>"))?;
    modelio::load_model(path)
}

fn load_dataset(cli: &Cli) -> Result<Dataset> {
    let spec = cli
        .dataset
        .as_deref()
        .ok_or_else(|| invalid("this command needs --dataset <spec>"))?;
    let source: DatasetSource = spec.parse()?;
    modelio::load_dataset(&source)
}

fn write_csv(out_dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = out_dir.join(name);
    std::fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn parse_configs(specs: &[String]) -> Result<Vec<MultiplierConfig>> {
    specs.iter().map(|s| s.parse()).collect()
}

/// Parses an inclusive `a..b` bit range.
fn parse_range(spec: &str) -> Result<Vec<u8>> {
    let (lo, hi) = spec
        .split_once("..")
        .ok_or_else(|| invalid(format!("bad range {spec:?}, expected like 2..8")))?;
    let lo: u8 = lo.trim().parse().map_err(|_| invalid(format!("bad range start {lo:?}")))?;
    let hi: u8 = hi.trim().parse().map_err(|_| invalid(format!("bad range end {hi:?}")))?;
    if lo == 0 || hi < lo {
        return Err(invalid(format!("empty or zero-based range {spec:?}")));
    }
    Ok((lo..=hi).collect())
}

fn mul_verify(args: &MulVerifyArgs) -> Result<()> {
    if args.approx {
        println!("config: approx error-bound check, {} bits", args.bits);
        let report = lutcore::verify_approx_bounds_exhaustive(args.bits)?;
        println!(
            "{} cases, {} violations, max |error| = {}",
            report.cases, report.violations, report.max_abs_error
        );
        if report.violations > 0 {
            return Err(invalid("approximation bound violated"));
        }
    } else {
        println!("config: exact multiplier check, {} bits", args.bits);
        let report = lutcore::verify_exact_exhaustive(args.bits)?;
        println!("{} cases, {} mismatches", report.cases, report.mismatches);
        if report.mismatches > 0 {
            return Err(invalid("exact multiplier mismatch"));
        }
    }
    Ok(())
}

fn cost_report(cli: &Cli, args: &CostReportArgs, costs: &UnitCosts) -> Result<()> {
    let cfgs = parse_configs(&args.schemes)?;
    let baseline: MultiplierConfig = match &args.baseline {
        Some(s) => s.parse()?,
        None => cfgs[0],
    };
    println!("config: schemes = {:?}, baseline = {}", args.schemes, baseline.id());
    let report = hwcost::compare_report(&cfgs, &baseline, costs)?;
    write_csv(&cli.out_dir, "cost_report.csv", &report.to_csv())
}

fn ltp_cmd(cli: &Cli, args: &LtpArgs) -> Result<()> {
    let data = load_dataset(cli)?;
    let (train_set, val_set) = data.split(args.val_every);
    let mut cfg = LtpConfig::new(args.prune, args.rounds, args.epochs)?;
    cfg.accuracy_drop_limit = args.drop_limit;
    cfg.learning_rate = args.lr;
    cfg.rng_seed = cli.seed;
    if args.per_layer {
        cfg.prune_scope = PruneScope::PerLayer;
    }
    if args.fresh_reinit {
        cfg.rewind = RewindMode::FreshRandom;
    }
    println!(
        "config: layers = {:?}, p = {}, rounds = {}, epochs = {}, drop-limit = {}, lr = {}, \
         scope = {:?}, rewind = {:?}, train/val = {}/{}",
        args.layers,
        cfg.prune_fraction,
        cfg.max_rounds,
        cfg.epochs_per_round,
        cfg.accuracy_drop_limit,
        cfg.learning_rate,
        cfg.prune_scope,
        cfg.rewind,
        train_set.len(),
        val_set.len(),
    );
    let outcome = ltp::ltp_run(
        &args.layers,
        &train_set,
        &val_set,
        &cfg,
        args.act_bits,
        args.weight_bits,
    )?;
    println!(
        "baseline val acc {} | final sparsity {} | final val acc {}",
        outcome.baseline_acc, outcome.sparsity, outcome.final_val_acc
    );
    write_csv(&cli.out_dir, "ltp_rounds.csv", &outcome.round_log_csv())?;
    let model_path = cli.out_dir.join(&args.save_model);
    modelio::save_model(&outcome.model, &model_path)?;
    println!("wrote {}", model_path.display());
    Ok(())
}

fn bit_sweep(cli: &Cli, args: &BitSweepArgs) -> Result<()> {
    let model = load_model(cli)?;
    let data = load_dataset(cli)?;
    let act_range = parse_range(&args.act_bits)?;
    let weight_range = parse_range(&args.weight_bits)?;
    println!(
        "config: act bits {:?}, weight bits {:?}, {} samples",
        act_range,
        weight_range,
        data.len()
    );
    let real_acc = model.evaluate_real(&data)?;
    let mut csv = String::from("act_bits,weight_bits,accuracy\n");
    for &a in &act_range {
        for &w in &weight_range {
            let acc = model.requantize(a, w)?.evaluate(&data, None)?;
            let _ = writeln!(csv, "{a},{w},{acc}");
        }
    }
    let _ = writeln!(csv, "# real-arithmetic baseline accuracy = {real_acc}");
    write_csv(&cli.out_dir, "bit_sweep.csv", &csv)
}

fn act_stats(cli: &Cli, args: &ActStatsArgs) -> Result<()> {
    let model = load_model(cli)?;
    let data = load_dataset(cli)?;
    println!("config: histogram bits = {}, {} samples", args.bits, data.len());
    let act_hist = netsim::activation_histogram(&model, &data, args.bits)?;
    let weight_hist = netsim::weight_histogram(&model, args.bits)?;
    let probs = netsim::lsb_product_distribution(&act_hist, &weight_hist)?;
    println!(
        "lsb product argmax = {} (P = {})",
        netsim::distribution_argmax(&probs),
        probs[netsim::distribution_argmax(&probs)]
    );
    write_csv(&cli.out_dir, "act_hist.csv", &modelio::histogram_csv(&act_hist.counts))?;
    write_csv(&cli.out_dir, "weight_hist.csv", &modelio::histogram_csv(&weight_hist.counts))?;
    write_csv(&cli.out_dir, "lsb_product.csv", &modelio::distribution_csv(&probs))
}

fn simulate(cli: &Cli, args: &SimulateArgs, costs: &UnitCosts) -> Result<()> {
    let model = load_model(cli)?;
    let data = load_dataset(cli)?;
    let cfgs = if args.schemes.is_empty() {
        [Scheme::DncExact, Scheme::DncApprox, Scheme::TLut]
            .iter()
            .map(|&s| MultiplierConfig::new(s, model.act_bits, model.weight_bits))
            .collect::<Result<Vec<_>>>()?
    } else {
        parse_configs(&args.schemes)?
    };
    println!(
        "config: schemes = [{}], {} samples",
        cfgs.iter().map(|c| c.id()).collect::<Vec<_>>().join(", "),
        data.len()
    );
    let macs = model.mac_counts()?;
    let layer_count = macs.len();
    let mut csv = String::from("scheme,accuracy,energy_per_inference,area_per_layer_units\n");
    let real_acc = model.evaluate_real(&data)?;
    let _ = writeln!(csv, "real,{real_acc},,");
    for cfg in &cfgs {
        let plan = vec![*cfg; layer_count];
        let acc = model.evaluate(&data, Some(&plan))?;
        let energy = hwcost::energy_per_inference(&macs, &plan, costs)?;
        let area = hwcost::area(cfg, costs)? * layer_count as f64;
        let _ = writeln!(csv, "{},{acc},{energy},{area}", cfg.id());
    }
    write_csv(&cli.out_dir, "simulate.csv", &csv)
}

fn mixed_search(cli: &Cli, args: &MixedSearchArgs, costs: &UnitCosts) -> Result<()> {
    let model = load_model(cli)?;
    let data = load_dataset(cli)?;
    let profile = mixedprec::cumulative_mac_profile(&model)?;
    let policy = match args.policy.as_str() {
        "auto" => mixedprec::choose_policy(&profile),
        "approx-first" | "approx_first" => Policy::ApproxFirst,
        "exact-first" | "exact_first" => Policy::ExactFirst,
        other => return Err(invalid(format!("unknown policy {other:?}"))),
    };
    println!(
        "config: policy = {} ({}), max-loss = {}, {} samples",
        policy,
        if args.policy == "auto" { "auto" } else { "forced" },
        args.max_loss,
        data.len()
    );
    let mut profile_csv = String::from("layer,macs,cumulative_pct\n");
    for (i, (&m, &c)) in profile.per_layer.iter().zip(&profile.cumulative_pct).enumerate() {
        let _ = writeln!(profile_csv, "{},{m},{c}", i + 1);
    }
    write_csv(&cli.out_dir, "mac_profile.csv", &profile_csv)?;

    let baseline = {
        let exact = MultiplierConfig::new(Scheme::DncExact, model.act_bits, model.weight_bits)?;
        let plan = vec![exact; profile.per_layer.len()];
        model.evaluate(&data, Some(&plan))?
    };
    let sweep = mixedprec::boundary_sweep(&model, &data, policy, costs)?;
    write_csv(&cli.out_dir, "mixed_sweep.csv", &mixedprec::sweep_csv(&sweep))?;
    let chosen = mixedprec::select_boundary(&sweep, baseline, args.max_loss)?;
    println!(
        "selected boundary n = {} | accuracy {} (baseline {}) | energy {} | area {}",
        chosen.boundary, chosen.accuracy, baseline, chosen.energy_units, chosen.area_units
    );
    Ok(())
}
