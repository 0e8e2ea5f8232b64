//! Command-line front end: subset selection on user data, the Monte Carlo
//! simulation presets, the parametric bootstrap, and the special-function
//! self-checks.
//!
//! Exit codes: 0 success, 1 self-check violation, 2 configuration or usage
//! error, 3 numerical error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pvselect::criteria::CriterionSpec;
use pvselect::datagen::SeedSpec;
use pvselect::error::Error;
use pvselect::experiment::bootstrap::{run_bootstrap, BootstrapConfig};
use pvselect::experiment::config::{load_config, parse_family};
use pvselect::experiment::emit::{emit_results, format_summary_table};
use pvselect::experiment::{preset, run_experiment, ExperimentConfig};
use pvselect::regcore::ingest::{load_dataset, ResponseSelector};
use pvselect::search::{select_over_family_multi, FamilyKind, ModelFamily};
use pvselect::specfun::checks::{run_specfun_checks, CheckConfig};

/// Environment variable holding the default output directory.
const OUT_DIR_ENV: &str = "PVSELECT_OUT_DIR";

#[derive(Parser)]
#[command(name = "pvselect", version, about = "Subset selection for linear regression")]
struct Cli {
    /// Bound the number of worker threads (default: all cores). Output is
    /// identical for any value.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select a regressor subset on a dataset file.
    Select(SelectArgs),
    /// Run a Monte Carlo experiment preset or configuration file.
    Simulate(SimulateArgs),
    /// Parametric bootstrap on a dataset file.
    Bootstrap(BootstrapArgs),
    /// Run the special-function self-checks.
    CheckSpecfun(CheckArgs),
}

#[derive(Args)]
struct SelectArgs {
    /// Delimiter-separated data file (optional header row).
    #[arg(long)]
    data: PathBuf,
    /// Response column, by header name or 1-based position.
    #[arg(long)]
    response: String,
    /// Comma-separated criteria (mpvc, mpvccal, mpvc-max-cal, aic, bic,
    /// mpvc:a=<c>, pll:c=<c>).
    #[arg(long, default_value = "mpvc,mpvccal,mpvc-max-cal,aic,bic")]
    criteria: String,
    /// Search family: all | nested | greedy.
    #[arg(long, default_value = "greedy")]
    family: String,
    /// Variable order for the nested family, e.g. 3,1,2.
    #[arg(long)]
    order: Option<String>,
    /// Print the per-stratum scores behind each selection.
    #[arg(long)]
    per_stratum: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Built-in preset: M1, M2, M3, M4 or L1.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Replications per (n, criterion) cell.
    #[arg(long, default_value_t = 500)]
    reps: usize,
    /// Override the sample-size list, e.g. 75,100,200.
    #[arg(long)]
    n_list: Option<String>,
    /// Override the search family: all | nested | greedy.
    #[arg(long)]
    family: Option<String>,
    /// Output directory (default: $PVSELECT_OUT_DIR or ./results).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BootstrapArgs {
    /// Delimiter-separated data file.
    #[arg(long)]
    data: PathBuf,
    /// Response column, by header name or 1-based position.
    #[arg(long)]
    response: String,
    /// Bootstrap replications.
    #[arg(long, default_value_t = 500)]
    reps: usize,
    /// Comma-separated counts of spurious variables to append (even).
    #[arg(long, default_value = "8,18,28,38,48,58")]
    added_vars: String,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Label prefix for emitted rows (default: data file stem).
    #[arg(long)]
    label: Option<String>,
    /// Output directory (default: $PVSELECT_OUT_DIR or ./results).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Random grid size for the quadrature cross-check.
    #[arg(long, default_value_t = 1000)]
    points: usize,
    /// Random triple count for the tail-sandwich sweep.
    #[arg(long, default_value_t = 1000)]
    triples: usize,
    /// Seed of the random sweeps.
    #[arg(long, default_value_t = 0xbe7a_5eed)]
    seed: u64,
    /// Test hook: bias the tail values to verify violations are caught.
    #[arg(long)]
    inject_fault: bool,
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn parse_usize_list(raw: &str, what: &str) -> Result<Vec<usize>, Error> {
    raw.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .map_err(|_| Error::Config(format!("bad {what} entry '{s}'")))
        })
        .collect()
}

fn parse_criteria(raw: &str) -> Result<Vec<CriterionSpec>, Error> {
    let specs: Vec<CriterionSpec> = raw
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(CriterionSpec::parse)
        .collect::<Result<_, _>>()?;
    if specs.is_empty() {
        return Err(Error::Config("no criteria given".into()));
    }
    Ok(specs)
}

fn cmd_select(args: &SelectArgs) -> Result<(), Error> {
    let loaded = load_dataset(&args.data, &ResponseSelector::parse(&args.response))?;
    let d = &loaded.dataset;
    if d.m() >= d.n() {
        return Err(Error::Config(format!(
            "{} regressors but only {} rows; need n > M",
            d.m(),
            d.n()
        )));
    }
    let criteria = parse_criteria(&args.criteria)?;
    let family = match parse_family(&args.family)? {
        FamilyKind::AllSubsets => ModelFamily::all_subsets(),
        FamilyKind::GreedyNested => ModelFamily::greedy(),
        FamilyKind::Nested => {
            let raw = args
                .order
                .as_deref()
                .ok_or_else(|| Error::Config("--family=nested requires --order".into()))?;
            ModelFamily::nested(parse_usize_list(raw, "order")?)
        }
    };

    println!(
        "dataset: {} rows, {} regressors, response '{}'",
        d.n(),
        d.m(),
        loaded.response_name
    );
    let results = select_over_family_multi(d, &family, &criteria)?;
    if let Some(order) = &results[0].family.order {
        let names: Vec<&str> =
            order.iter().map(|&i| loaded.regressor_names[i - 1].as_str()).collect();
        println!("variable order: {order:?} ({})", names.join(", "));
    }
    for result in &results {
        let names: Vec<&str> = result
            .chosen
            .indices()
            .iter()
            .map(|&i| loaded.regressor_names[i - 1].as_str())
            .collect();
        println!(
            "{:<14} -> {} ({})",
            result.criterion.name(),
            result.chosen,
            if names.is_empty() { "empty model".to_string() } else { names.join(", ") }
        );
        if args.per_stratum {
            if let Some(scored) = &result.per_stratum_scores {
                for sm in scored {
                    println!("    p={} {} log_score={}", sm.cardinality, sm.subset, sm.log_score);
                }
            }
        }
    }
    Ok(())
}

fn run_one_experiment(cfg: &ExperimentConfig, dir: &std::path::Path) -> Result<(), Error> {
    let output = run_experiment(cfg)?;
    let files = emit_results(&output, dir, &cfg.label)?;
    print!("{}", format_summary_table(&output.summaries));
    println!("wrote {} and {}", files.summary.display(), files.replications.display());
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let mut configs: Vec<ExperimentConfig> = match (&args.preset, &args.config) {
        (Some(name), None) => preset(name, args.seed, args.reps)?,
        (None, Some(path)) => {
            let mut cfg = load_config(path)?;
            cfg.seed = SeedSpec::new(args.seed);
            cfg.reps = args.reps;
            vec![cfg]
        }
        _ => {
            return Err(Error::Config(
                "exactly one of --preset or --config is required".into(),
            ))
        }
    };
    for cfg in configs.iter_mut() {
        if let Some(raw) = &args.n_list {
            cfg.n_list = parse_usize_list(raw, "n_list")?;
        }
        if let Some(raw) = &args.family {
            cfg.family = parse_family(raw)?;
        }
        cfg.validate()?;
    }
    let dir = out_dir(args.out.clone());
    for cfg in &configs {
        run_one_experiment(cfg, &dir)?;
    }
    Ok(())
}

fn cmd_bootstrap(args: &BootstrapArgs) -> Result<(), Error> {
    let cfg = BootstrapConfig {
        data_path: args.data.clone(),
        response: ResponseSelector::parse(&args.response),
        reps: args.reps,
        added_vars: parse_usize_list(&args.added_vars, "added_vars")?,
        seed: SeedSpec::new(args.seed),
        label: args.label.clone(),
    };
    let (base, output) = run_bootstrap(&cfg)?;
    println!(
        "base truth: regressors {:?} ({} and {}), beta = ({}, {}), sigma2 = {}",
        base.chosen, base.names[0], base.names[1], base.beta[0], base.beta[1], base.sigma2
    );
    let dir = out_dir(args.out.clone());
    let stem = cfg.label.clone().unwrap_or_else(|| {
        cfg.data_path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "bootstrap".into())
    });
    let files = emit_results(&output, &dir, &stem)?;
    print!("{}", format_summary_table(&output.summaries));
    println!("wrote {} and {}", files.summary.display(), files.replications.display());
    Ok(())
}

fn cmd_check_specfun(args: &CheckArgs) -> ExitCode {
    let cfg = CheckConfig {
        quadrature_points: args.points,
        sandwich_triples: args.triples,
        seed: args.seed,
        inject_fault: args.inject_fault,
    };
    let report = run_specfun_checks(&cfg);
    for section in &report.sections {
        let status = if section.violations.is_empty() { "ok" } else { "FAIL" };
        println!(
            "{status}: {} ({} cases over {})",
            section.name, section.cases, section.range
        );
        for violation in section.violations.iter().take(5) {
            println!("    {violation}");
        }
        if section.violations.len() > 5 {
            println!("    ... and {} more", section.violations.len() - 5);
        }
    }
    if report.passed() {
        println!("all special-function checks passed");
        ExitCode::SUCCESS
    } else {
        println!("{} violation(s) found", report.violation_count());
        ExitCode::from(1)
    }
}

fn exit_code_for(err: &Error) -> ExitCode {
    if err.is_numerical() {
        ExitCode::from(3)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: could not configure {jobs} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Select(args) => cmd_select(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bootstrap(args) => cmd_bootstrap(args),
        Command::CheckSpecfun(args) => return cmd_check_specfun(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}
