//! Command-line interface: one binary, one subcommand per pipeline stage.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use fpa_core::features::{extract_features, FeatureProfile};
use fpa_core::socsim::{run_experiment, ExperimentConfig};
use fpa_core::surrogate::{encode, evaluate_fpa, fit_encoder, train, EncoderMode, TrainParams};

use crate::analyze::{analyze_tables, default_categorical, kept_column_names, AnalyzeOptions};
use crate::bundle::{bundle_from_text, bundle_to_text, ModelBundle};
use crate::config::{load_campaign, load_experiment, parse_horizon_hours, parse_pairing, Campaign};
use crate::csvio::{
    read_csv_file, write_experiment_csv, write_feature_csv_file, write_metric_csv, CsvTable,
    LabelSpec,
};
use crate::live::{live_send, LiveEndpoint};
use crate::pcap::{read_pcap_file, write_pcap_file};
use crate::pipeline::campaign_frames;
use crate::plot::{bar_chart, line_chart, Series};

#[derive(Debug, Parser)]
#[command(
    name = "fpa-forge",
    version,
    about = "Craft protocol-valid MQTT traffic, extract NIDS features, and quantify SOC impact"
)]
pub struct Cli {
    /// Seed for all randomness; overrides config-file seeds.
    #[arg(long, global = true, env = "FPA_FORGE_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an offline campaign capture from a config file.
    Craft(CraftArgs),
    /// Send a crafted campaign to a live broker and verify PUBACKs.
    LiveSend(LiveSendArgs),
    /// Convert a pcap capture to the 61-feature CSV schema.
    Extract(ExtractArgs),
    /// Run the M/D/c/FCFS waiting-time experiment sweep.
    Simulate(SimulateArgs),
    /// Compare a crafted feature CSV against a reference set.
    Analyze(AnalyzeArgs),
    /// Fit or evaluate the surrogate softmax classifier.
    Surrogate(SurrogateArgs),
    /// Render SVG charts from result CSVs.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct CraftArgs {
    /// Campaign config file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output pcap path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also extract features and write them here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Override the number of sessions in the config.
    #[arg(long)]
    pub sessions: Option<usize>,
    /// Column profile for --csv.
    #[arg(long, default_value = "full61")]
    pub profile: String,
}

#[derive(Debug, Args)]
pub struct LiveSendArgs {
    /// Campaign config file (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Broker hostname or IPv4 address.
    #[arg(long)]
    pub host: String,
    /// Broker port (8883/TLS is rejected).
    #[arg(long, default_value_t = 1883)]
    pub port: u16,
    /// Per-packet response timeout in seconds.
    #[arg(long, default_value_t = 5.0)]
    pub timeout: f64,
    /// Write the reconstructed bidirectional capture here.
    #[arg(long)]
    pub capture: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Input pcap path.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Column profile: full61, tcp-mqtt, or a protocol group name.
    #[arg(long, default_value = "full61")]
    pub profile: String,
    /// Attack_type value; adds the Attack_label/Attack_type columns.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Experiment config file (TOML); flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Budget (service rate, alerts/hour); repeatable or comma-separated.
    #[arg(long = "budget", value_delimiter = ',')]
    pub budgets: Vec<f64>,
    /// Alert arrival rate (alerts/hour); repeatable or comma-separated.
    #[arg(long = "eta", value_delimiter = ',')]
    pub etas: Vec<f64>,
    /// False-positive percentages; repeatable or comma-separated.
    #[arg(long = "fp", value_delimiter = ',')]
    pub fps: Vec<f64>,
    /// Fixed alert traffic intensity; derives eta = rho * budget.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Horizon, e.g. 1h, 24h, 1d, 2000h.
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Number of analysts (servers).
    #[arg(long)]
    pub servers: Option<usize>,
    /// zipped or crossed pairing of the eta and fp sweeps.
    #[arg(long)]
    pub pairing: Option<String>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Reference (original traffic) feature CSV.
    #[arg(long)]
    pub reference: PathBuf,
    /// Target (crafted traffic) feature CSV.
    #[arg(long)]
    pub target: PathBuf,
    /// Output metric-report CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// One-hot columns, comma-separated (defaults to the usual string columns).
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Dimensions for the PCA-reduced joint divergence.
    #[arg(long, default_value_t = 2)]
    pub pca_dims: usize,
    /// Also write a bar chart of the metrics into this directory.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurrogateArgs {
    #[command(subcommand)]
    pub command: SurrogateCommand,
}

#[derive(Debug, Subcommand)]
pub enum SurrogateCommand {
    /// Fit the encoder and softmax model on a labeled feature CSV.
    Fit(SurrogateFitArgs),
    /// Evaluate crafted traffic against a fitted model.
    Eval(SurrogateEvalArgs),
}

#[derive(Debug, Args)]
pub struct SurrogateFitArgs {
    /// Labeled training CSV.
    #[arg(long)]
    pub train: PathBuf,
    /// Column holding the class label.
    #[arg(long, default_value = "Attack_type")]
    pub label_column: String,
    /// One-hot columns, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Output model bundle path.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 300)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.0)]
    pub l2: f64,
}

#[derive(Debug, Args)]
pub struct SurrogateEvalArgs {
    /// Model bundle written by `surrogate fit`.
    #[arg(long)]
    pub model: PathBuf,
    /// Crafted feature CSV to classify.
    #[arg(long)]
    pub data: PathBuf,
    /// Label counted as the correct (benign) prediction.
    #[arg(long, default_value = "Normal")]
    pub benign_label: String,
    /// Output report CSV (stdout summary is always printed).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Input CSV (experiment results or metric report).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Output directory for SVG files.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// simulate (line charts) or metrics (bar chart).
    #[arg(long, default_value = "simulate")]
    pub kind: String,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Craft(args) => craft(args, cli.seed),
        Command::LiveSend(args) => live(args, cli.seed),
        Command::Extract(args) => extract(args),
        Command::Simulate(args) => simulate(args, cli.seed),
        Command::Analyze(args) => analyze(args),
        Command::Surrogate(args) => match args.command {
            SurrogateCommand::Fit(fit) => surrogate_fit(fit, cli.seed),
            SurrogateCommand::Eval(eval) => surrogate_eval(eval),
        },
        Command::Plot(args) => plot(args),
    }
}

fn resolve_seed(cli_seed: Option<u64>, campaign: &Campaign) -> u64 {
    cli_seed.or(campaign.seed).unwrap_or(1)
}

fn parse_profile(name: &str) -> anyhow::Result<FeatureProfile> {
    FeatureProfile::from_str(name).with_context(|| format!("profile {name}"))
}

fn craft(args: CraftArgs, cli_seed: Option<u64>) -> anyhow::Result<()> {
    let mut campaign = load_campaign(&args.config)?;
    if let Some(sessions) = args.sessions {
        campaign.sessions = sessions.max(1);
    }
    let seed = resolve_seed(cli_seed, &campaign);
    let frames = campaign_frames(&campaign, seed)?;
    write_pcap_file(&args.out, &frames)?;
    println!(
        "crafted {} sessions, {} frames, seed {} -> {}",
        campaign.sessions,
        frames.len(),
        seed,
        args.out.display()
    );
    if let Some(csv_path) = args.csv {
        let profile = parse_profile(&args.profile)?;
        let extraction = extract_features(&frames);
        write_feature_csv_file(&csv_path, &extraction.records, &profile, None)?;
        println!(
            "extracted {} records -> {}",
            extraction.records.len(),
            csv_path.display()
        );
    }
    Ok(())
}

fn live(args: LiveSendArgs, cli_seed: Option<u64>) -> anyhow::Result<()> {
    let campaign = load_campaign(&args.config)?;
    let seed = resolve_seed(cli_seed, &campaign);
    let endpoint = LiveEndpoint::new(&args.host, args.port, Duration::from_secs_f64(args.timeout))?;
    let report = live_send(
        &campaign.spec,
        &campaign.net,
        &endpoint,
        args.capture.as_deref(),
        seed,
    )?;
    println!(
        "connack_rc {} sent {} pubacks {} capture {}",
        report.connack_rc,
        report.sent_count,
        report.puback_count,
        report
            .capture_path
            .as_deref()
            .map(Path::display)
            .map_or_else(|| "-".to_string(), |p| p.to_string()),
    );
    Ok(())
}

fn extract(args: ExtractArgs) -> anyhow::Result<()> {
    let profile = parse_profile(&args.profile)?;
    let frames = read_pcap_file(&args.input)?;
    let extraction = extract_features(&frames);
    let label = args.label.map(|attack_type| LabelSpec { attack_type });
    write_feature_csv_file(&args.out, &extraction.records, &profile, label.as_ref())?;
    println!(
        "{} frames -> {} records ({} skipped, {} mqtt decode failures) -> {}",
        frames.len(),
        extraction.records.len(),
        extraction.skipped,
        extraction.mqtt_decode_failures,
        args.out.display()
    );
    Ok(())
}

fn simulate(args: SimulateArgs, cli_seed: Option<u64>) -> anyhow::Result<()> {
    let mut config = match &args.config {
        Some(path) => load_experiment(path)?,
        None => ExperimentConfig::default(),
    };
    if !args.budgets.is_empty() {
        config.mus = args.budgets.clone();
    }
    if !args.etas.is_empty() {
        config.etas = args.etas.clone();
    }
    if !args.fps.is_empty() {
        config.fps = args.fps.clone();
    }
    if args.rho.is_some() {
        config.rho = args.rho;
    }
    if let Some(horizon) = &args.horizon {
        config.horizon = parse_horizon_hours(horizon)?;
    }
    if let Some(repeats) = args.repeats {
        config.repeats = repeats;
    }
    if let Some(servers) = args.servers {
        config.servers = servers;
    }
    if let Some(pairing) = &args.pairing {
        config.pairing = parse_pairing(pairing)?;
    }
    if let Some(seed) = cli_seed {
        config.seed = seed;
    }
    let rows = run_experiment(&config)?;
    write_experiment_csv(std::fs::File::create(&args.out)?, &rows)?;
    for row in &rows {
        println!(
            "mu={:<6} eta={:<7} fp={:<7} mean_wait={:>9.2}s cum_wait={:>11.1}s served={:>7.1} truncated={:>5.1}",
            row.mu,
            row.eta,
            row.fp,
            row.mean_wait * 3600.0,
            row.mean_cum_wait * 3600.0,
            row.mean_served,
            row.mean_truncated
        );
    }
    println!("{} cells -> {}", rows.len(), args.out.display());
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> anyhow::Result<()> {
    let reference = read_csv_file(&args.reference)?;
    let target = read_csv_file(&args.target)?;
    let opts = AnalyzeOptions {
        categorical: if args.categorical.is_empty() {
            None
        } else {
            Some(args.categorical.clone())
        },
        pca_dims: args.pca_dims,
        ..Default::default()
    };
    let report = analyze_tables(&reference, &target, &opts)?;
    write_metric_csv(std::fs::File::create(&args.out)?, &report.metrics)?;
    for (name, value) in &report.metrics {
        println!("{name:<32} {value:.6}");
    }
    if let Some(dir) = args.plot {
        std::fs::create_dir_all(&dir)?;
        let svg = bar_chart("crafted vs reference", &report.metrics);
        let path = dir.join("metrics.svg");
        std::fs::write(&path, svg)?;
        println!("chart -> {}", path.display());
    }
    println!("report -> {}", args.out.display());
    Ok(())
}

fn table_rows_for_encoding(table: &CsvTable, kept: &[String]) -> anyhow::Result<Vec<Vec<String>>> {
    let mut indices = Vec::with_capacity(kept.len());
    for name in kept {
        let idx = table
            .column_index(name)
            .with_context(|| format!("data csv lacks column {name}"))?;
        indices.push(idx);
    }
    Ok(table
        .rows
        .iter()
        .map(|row| indices.iter().map(|&i| row[i].clone()).collect())
        .collect())
}

fn surrogate_fit(args: SurrogateFitArgs, cli_seed: Option<u64>) -> anyhow::Result<()> {
    let table = read_csv_file(&args.train)?;
    let label_idx = table
        .column_index(&args.label_column)
        .with_context(|| format!("training csv lacks label column {}", args.label_column))?;
    let labels: Vec<String> = table.rows.iter().map(|r| r[label_idx].clone()).collect();

    let kept = kept_column_names(&table.columns, &args.label_column);
    let rows = table_rows_for_encoding(&table, &kept)?;
    let categorical = if args.categorical.is_empty() {
        default_categorical(&kept)
    } else {
        args.categorical.clone()
    };
    let vocab = fit_encoder(&kept, &rows, &categorical, EncoderMode::Strict)?;
    let x: Vec<Vec<f64>> = rows.iter().map(|r| encode(&vocab, r)).collect();
    let hyper = TrainParams {
        epochs: args.epochs,
        learning_rate: args.lr,
        l2: args.l2,
        seed: cli_seed.unwrap_or(1),
    };
    let model = train(&x, &labels, hyper)?;
    let bundle = ModelBundle {
        model,
        vocab,
        columns: kept,
    };
    std::fs::write(&args.out, bundle_to_text(&bundle)?)?;
    println!(
        "fitted {} classes on {} rows ({} dims) -> {}",
        bundle.model.labels.len(),
        x.len(),
        bundle.model.params.dim,
        args.out.display()
    );
    Ok(())
}

fn surrogate_eval(args: SurrogateEvalArgs) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(&args.model)
        .with_context(|| format!("reading {}", args.model.display()))?;
    let bundle = bundle_from_text(&text)?;
    let table = read_csv_file(&args.data)?;
    let rows = table_rows_for_encoding(&table, &bundle.columns)?;
    let report = evaluate_fpa(&bundle.model, &bundle.vocab, &rows, &args.benign_label)?;

    println!(
        "asr {:.2}% ({} of {} misclassified)",
        report.asr_percent, report.misclassified, report.total
    );
    for class in &report.per_class {
        println!(
            "  as {:<24} n={:<6} conf mu={:.3} geo={:.3}  ent mu={:.3} geo={:.3}  high_conf={} low_ent={} high_ent={} overconf={}",
            class.label,
            class.count,
            class.mean_confidence,
            class.geo_mean_confidence,
            class.mean_entropy,
            class.geo_mean_entropy,
            class.high_confidence,
            class.low_entropy,
            class.high_entropy,
            class.overconfident
        );
    }
    if let Some(out) = args.out {
        let mut writer = csv::Writer::from_writer(std::fs::File::create(&out)?);
        writer.write_record([
            "misclassified_as",
            "count",
            "mean_confidence",
            "geo_mean_confidence",
            "mean_entropy",
            "geo_mean_entropy",
            "high_confidence",
            "low_entropy",
            "high_entropy",
            "overconfident",
        ])?;
        for class in &report.per_class {
            writer.write_record(&[
                class.label.clone(),
                class.count.to_string(),
                format!("{:.6}", class.mean_confidence),
                format!("{:.6}", class.geo_mean_confidence),
                format!("{:.6}", class.mean_entropy),
                format!("{:.6}", class.geo_mean_entropy),
                class.high_confidence.to_string(),
                class.low_entropy.to_string(),
                class.high_entropy.to_string(),
                class.overconfident.to_string(),
            ])?;
        }
        writer.flush()?;
        println!("report -> {}", out.display());
    }
    Ok(())
}

fn plot(args: PlotArgs) -> anyhow::Result<()> {
    let table = read_csv_file(&args.input)?;
    std::fs::create_dir_all(&args.out_dir)?;
    match args.kind.as_str() {
        "simulate" => plot_simulation(&table, &args.out_dir),
        "metrics" => {
            let name_idx = table
                .column_index("metric")
                .context("metric column missing")?;
            let value_idx = table
                .column_index("value")
                .context("value column missing")?;
            let bars: Vec<(String, f64)> = table
                .rows
                .iter()
                .map(|r| (r[name_idx].clone(), r[value_idx].parse().unwrap_or(0.0)))
                .collect();
            let path = args.out_dir.join("metrics.svg");
            std::fs::write(&path, bar_chart("metric report", &bars))?;
            println!("chart -> {}", path.display());
            Ok(())
        }
        other => bail!("unknown plot kind {other} (expected simulate or metrics)"),
    }
}

fn plot_simulation(table: &CsvTable, out_dir: &Path) -> anyhow::Result<()> {
    let col = |name: &str| -> anyhow::Result<usize> {
        table
            .column_index(name)
            .with_context(|| format!("column {name} missing"))
    };
    let fp = col("fp_percent")?;
    let mu = col("mu_per_hr")?;
    let mean_s = col("mean_tp_wait_s")?;
    let cum_s = col("mean_cum_tp_wait_s")?;

    let mut budgets: Vec<String> = table.rows.iter().map(|r| r[mu].clone()).collect();
    budgets.sort_unstable();
    budgets.dedup();

    let series_for = |value_idx: usize| -> Vec<Series> {
        budgets
            .iter()
            .map(|budget| Series {
                name: format!("budget {budget}/hr"),
                points: table
                    .rows
                    .iter()
                    .filter(|r| &r[mu] == budget)
                    .map(|r| {
                        (
                            r[fp].parse().unwrap_or(0.0),
                            r[value_idx].parse().unwrap_or(0.0),
                        )
                    })
                    .collect(),
            })
            .collect()
    };

    let mean_path = out_dir.join("mean_tp_wait.svg");
    std::fs::write(
        &mean_path,
        line_chart(
            "mean TP waiting time",
            "false positives (%)",
            "mean wait (s)",
            &series_for(mean_s),
        ),
    )?;
    let cum_path = out_dir.join("cumulative_tp_wait.svg");
    std::fs::write(
        &cum_path,
        line_chart(
            "cumulative TP waiting time",
            "false positives (%)",
            "cumulative wait (s)",
            &series_for(cum_s),
        ),
    )?;
    println!(
        "charts -> {} and {}",
        mean_path.display(),
        cum_path.display()
    );
    Ok(())
}
