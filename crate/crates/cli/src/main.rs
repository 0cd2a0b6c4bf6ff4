//! scengen: fit a joint load/wind deviation model, generate scenario
//! batches, and export diagnostics and dependency graphs.
//!
//! Every command is deterministic for a given config and seed. Exit codes:
//! 0 success, 1 data or configuration error, 2 numerical failure.

use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use scengen_core::bundle::ModelBundle;
use scengen_core::config::RunConfig;
use scengen_core::gemini::FactorStats;
use scengen_core::ingest::ForecastPanel;
use scengen_core::panel::VariableId;
use scengen_core::tails::Marginal;
use scengen_core::{export, gaussianize, graph, pipeline, seasonal, simulate, tails};
use scengen_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "scengen",
    version,
    about = "Scenario generation for load and wind-power forecast deviations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model described by a config file and write a bundle.
    Fit(FitArgs),
    /// Generate scenarios and a quantile band from a fitted bundle.
    Simulate(SimulateArgs),
    /// Refit with tails on and off and compare bands, Q-Q, and coverage.
    Diagnose(DiagnoseArgs),
    /// Export spatial and temporal dependency graphs from a bundle.
    Graph(GraphArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TailSwitch {
    On,
    Off,
}

#[derive(Args)]
struct FitArgs {
    /// Run configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Override the config's tail-modeling switch.
    #[arg(long, value_enum, value_name = "on|off")]
    tails: Option<TailSwitch>,
    /// Directory to write bundle.json into.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Fitted model bundle (JSON) written by `fit`.
    #[arg(long, value_name = "PATH")]
    bundle: PathBuf,
    /// Forecast issue time (RFC 3339, e.g. 2018-07-01T00:00:00Z); defaults
    /// to the latest issue time with a complete forecast.
    #[arg(long, value_name = "TIME")]
    issue_time: Option<String>,
    /// Number of Monte Carlo scenarios; defaults to the bundle's config.
    #[arg(long, value_name = "M")]
    scenarios: Option<usize>,
    /// RNG seed; defaults to the bundle's config.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Band trim fraction in [0, 0.5); defaults to the bundle's config.
    #[arg(long, value_name = "FRACTION")]
    trim: Option<f64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("source").required(true).multiple(false)))]
struct DiagnoseArgs {
    /// Run configuration (TOML).
    #[arg(long, value_name = "PATH", group = "source")]
    config: Option<PathBuf>,
    /// Fitted bundle whose config snapshot names the data files.
    #[arg(long, value_name = "PATH", group = "source")]
    bundle: Option<PathBuf>,
    /// Forecast issue time (RFC 3339); defaults to the latest complete one.
    #[arg(long, value_name = "TIME")]
    issue_time: Option<String>,
    /// Scenarios per fit; defaults to the config.
    #[arg(long, value_name = "M")]
    scenarios: Option<usize>,
    /// RNG seed shared by both fits; defaults to the config.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,
    /// Band trim fraction in [0, 0.5); defaults to the config.
    #[arg(long, value_name = "FRACTION")]
    trim: Option<f64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct GraphArgs {
    /// Fitted model bundle (JSON).
    #[arg(long, value_name = "PATH")]
    bundle: PathBuf,
    /// Minimum |partial correlation| for an edge; defaults to the bundle's
    /// config.
    #[arg(long, value_name = "R")]
    edge_threshold: Option<f64>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SCENGEN_LOG", "warn"))
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::Graph(args) => cmd_graph(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

fn parse_issue_time(text: &str) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(text)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| Error::Data(format!("invalid --issue-time {text:?}: {e}")))
}

fn resolve_issue_time(
    flag: &Option<String>,
    forecasts: &[ForecastPanel],
    variables: &[VariableId],
    lags: usize,
) -> Result<DateTime<Utc>> {
    match flag {
        Some(text) => parse_issue_time(text),
        None => pipeline::last_complete_issue_time(forecasts, variables, lags),
    }
}

fn fmt_time(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Zone names become file-name fragments; anything unusual maps to '_'.
fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(switch) = args.tails {
        config.tails.enabled = matches!(switch, TailSwitch::On);
    }
    let bundle = pipeline::fit(&config)?;
    ensure_dir(&args.out)?;
    let path = args.out.join("bundle.json");
    bundle.save(&path)?;
    print_fit_summary(&bundle);
    println!("bundle: {}", path.display());
    Ok(())
}

fn print_fit_summary(bundle: &ModelBundle) {
    let d = &bundle.diagnostics;
    let z = bundle.variables().len();
    let l = bundle.lags();
    println!(
        "panel: {} issue times used, {} dropped; {z} variables x {l} lags = {} coordinates",
        d.rows_used,
        d.rows_dropped,
        z * l
    );
    println!(
        "marginals ({}, tails {}):",
        bundle.marginals.len(),
        if bundle.config.tails.enabled { "on" } else { "off" }
    );
    for entry in &bundle.marginals {
        match &entry.marginal {
            Marginal::SemiParametric(dist) => println!(
                "  {}/{} lag {:02}: xi lower {:+.3}, upper {:+.3}",
                entry.kind,
                entry.zone,
                entry.lag,
                dist.lower().xi,
                dist.upper().xi
            ),
            Marginal::Gaussian { mean, sd } => println!(
                "  {}/{} lag {:02}: gaussian mean {:.3}, sd {:.3}",
                entry.kind, entry.zone, entry.lag, mean, sd
            ),
        }
    }
    print_factor("spatial", &d.spatial);
    print_factor("temporal", &d.temporal);
}

fn print_factor(name: &str, stats: &FactorStats) {
    let pairs = stats.order * (stats.order - 1) / 2;
    println!(
        "{name} factor: {order}x{order}, {iters} iterations ({status}), {nz}/{pairs} off-diagonal pairs nonzero",
        order = stats.order,
        iters = stats.iterations,
        status = if stats.converged { "converged" } else { "hit max iterations" },
        nz = stats.nonzero_offdiag,
    );
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let bundle = ModelBundle::load(&args.bundle)?;
    let forecasts = pipeline::load_forecast_sources(&bundle.config)?;
    let issue_time = resolve_issue_time(
        &args.issue_time,
        &forecasts,
        bundle.variables(),
        bundle.lags(),
    )?;
    let forecast =
        pipeline::forecast_matrix(&forecasts, bundle.variables(), bundle.lags(), issue_time)?;
    let m = args.scenarios.unwrap_or(bundle.config.simulate.scenarios);
    let seed = args.seed.unwrap_or(bundle.config.simulate.seed);
    let trim = args.trim.unwrap_or(bundle.config.simulate.trim);

    let batch = bundle.simulate(&forecast, issue_time, m, seed)?;
    let band = simulate::band(&batch, trim)?;

    ensure_dir(&args.out)?;
    let scenario_path = args.out.join("scenarios.csv");
    let band_path = args.out.join("band.csv");
    export::write_scenarios_csv(&scenario_path, &batch)?;
    export::write_band_csv(&band_path, &band)?;

    println!(
        "issue time {}: {m} scenarios, seed {seed}, trim {trim}",
        fmt_time(issue_time)
    );
    println!("scenarios: {}", scenario_path.display());
    println!("band: {}", band_path.display());
    Ok(())
}

fn cmd_diagnose(args: DiagnoseArgs) -> Result<()> {
    let config = match (&args.config, &args.bundle) {
        (Some(path), None) => RunConfig::load(path)?,
        (None, Some(path)) => ModelBundle::load(path)?.config,
        _ => unreachable!("clap enforces exactly one of --config/--bundle"),
    };
    let prepared = pipeline::prepare(&config)?;
    let tails_on = pipeline::fit_prepared(&config, &prepared, true)?;
    let tails_off = pipeline::fit_prepared(&config, &prepared, false)?;

    let forecasts = pipeline::load_forecast_sources(&config)?;
    let issue_time = resolve_issue_time(
        &args.issue_time,
        &forecasts,
        tails_on.variables(),
        tails_on.lags(),
    )?;
    let forecast = pipeline::forecast_matrix(
        &forecasts,
        tails_on.variables(),
        tails_on.lags(),
        issue_time,
    )?;
    let m = args.scenarios.unwrap_or(config.simulate.scenarios);
    let seed = args.seed.unwrap_or(config.simulate.seed);
    let trim = args.trim.unwrap_or(config.simulate.trim);
    println!(
        "issue time {}: {m} scenarios per fit, seed {seed}, trim {trim}",
        fmt_time(issue_time)
    );

    let batch_on = tails_on.simulate(&forecast, issue_time, m, seed)?;
    let batch_off = tails_off.simulate(&forecast, issue_time, m, seed)?;
    let band_on = simulate::band(&batch_on, trim)?;
    let band_off = simulate::band(&batch_off, trim)?;

    ensure_dir(&args.out)?;
    let comparison_path = args.out.join("band_comparison.csv");
    export::write_band_comparison_csv(&comparison_path, &band_on, &band_off)?;
    println!("band comparison: {}", comparison_path.display());

    // Q-Q of the gaussianized remainders per coordinate and fit. A marginal
    // that fits its series makes the scores N(0,1); heavy tails show up as
    // departures at the ends of the tails-off files.
    let qq_dir = args.out.join("qq");
    ensure_dir(&qq_dir)?;
    let remainder = seasonal::remove_seasonal(&prepared.panel, &tails_on.seasonal)?;
    let mut qq_files = 0usize;
    for (tag, fitted) in [("on", &tails_on), ("off", &tails_off)] {
        let scores = gaussianize::to_gaussian(&remainder, &fitted.marginal_vec())?;
        for (z, var) in scores.variables().iter().enumerate() {
            for l in 0..scores.l() {
                let pairs = tails::qq_gaussian(&scores.series(z, l))?;
                let name =
                    format!("{}_{}_lag{l:02}_tails_{tag}.csv", var.kind, sanitize(&var.zone));
                export::write_qq_csv(&qq_dir.join(name), &pairs)?;
                qq_files += 1;
            }
        }
    }
    println!("q-q files: {qq_files} in {}", qq_dir.display());

    // Coverage of the realized path, when the actuals span the window.
    let actuals = pipeline::load_actual_sources(&config)?;
    match pipeline::actual_path(&actuals, tails_on.variables(), tails_on.lags(), issue_time) {
        Ok(path) => {
            let coverage_on = simulate::coverage_against_band(&band_on, &path)?;
            let coverage_off = simulate::coverage_against_band(&band_off, &path)?;
            let on_path = args.out.join("coverage_tails_on.csv");
            let off_path = args.out.join("coverage_tails_off.csv");
            export::write_coverage_csv(&on_path, &band_on, &path, &coverage_on)?;
            export::write_coverage_csv(&off_path, &band_off, &path, &coverage_off)?;
            println!(
                "coverage of actuals: tails on {:.1}%, tails off {:.1}%",
                100.0 * coverage_on.fraction,
                100.0 * coverage_off.fraction
            );
        }
        Err(e) => {
            log::warn!("coverage skipped: {e}");
            println!("coverage: skipped (actuals do not span this window)");
        }
    }
    Ok(())
}

fn cmd_graph(args: GraphArgs) -> Result<()> {
    let bundle = ModelBundle::load(&args.bundle)?;
    let threshold = args
        .edge_threshold
        .unwrap_or(bundle.config.graphical.edge_threshold);

    let spatial_labels: Vec<String> =
        bundle.variables().iter().map(|v| v.to_string()).collect();
    let temporal_labels: Vec<String> =
        (0..bundle.lags()).map(|l| format!("lag{l:02}")).collect();
    let spatial = graph::dependency_graph(
        &bundle.graphical.spatial_precision,
        &spatial_labels,
        threshold,
    )?;
    let temporal = graph::dependency_graph(
        &bundle.graphical.temporal_precision,
        &temporal_labels,
        threshold,
    )?;

    ensure_dir(&args.out)?;
    export::write_graph_files(&args.out, "spatial", &spatial)?;
    export::write_graph_files(&args.out, "temporal", &temporal)?;

    for (name, g) in [("spatial", &spatial), ("temporal", &temporal)] {
        println!(
            "{name}: {} nodes, {} edges, {} connected components (threshold {threshold})",
            g.nodes.len(),
            g.edges.len(),
            g.component_count()
        );
    }
    println!("graphs: {}", args.out.display());
    Ok(())
}
