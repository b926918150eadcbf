//! Batch front door: loads channel/access JSON, dispatches rate computations
//! and simulations, and emits JSON reports or plot-ready CSV.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical non-convergence.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ssbc_core::entropies::{
    conditional_entropy, max_entropy_zero, min_entropy_zero, smooth_max_entropy_classical,
    smooth_min_entropy_classical,
};
use ssbc_core::model::{
    access_from_lists, build_cq_state, channel_from_file, AccessFile, AccessStructure,
    ChannelFile, CqBroadcastChannel, InputDistribution,
};
use ssbc_core::protocol::{leftover_hash_check, simulate, FamilyKind, SimulationConfig};
use ssbc_core::rates::{
    asymptotic_rate, classical_capacity, one_shot_achievable_rate, one_shot_converse_maximized,
    second_order_rate, EpsilonBudget, SecondOrderReport,
};

const VERSION: &str = concat!("ssbc-cli ", env!("CARGO_PKG_VERSION"));

#[derive(Parser)]
#[command(
    name = "ssbc",
    version,
    about = "Secret-sharing rate bounds and protocol simulation over broadcast channels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-shot achievable rate with its epsilon budget.
    RateOneshot(CommonArgs),
    /// One-shot converse, maximized over secret-input couplings.
    RateConverse(CommonArgs),
    /// Second-order rate at block length n; supports --sweep.
    RateSecondOrder(CommonArgs),
    /// Asymptotic rate (entropy difference, no penalties).
    RateAsymptotic(CommonArgs),
    /// Secret sharing capacity via seeded simplex ascent.
    Capacity(CommonArgs),
    /// Build, select, and measure a code end to end (classical channels).
    Simulate(CommonArgs),
    /// Conditional entropy table per user subset.
    Entropy(CommonArgs),
    /// Leftover-hash inequality check against the channel as side information.
    LhlCheck(CommonArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::RateOneshot(_) => "rate-oneshot",
            Command::RateConverse(_) => "rate-converse",
            Command::RateSecondOrder(_) => "rate-second-order",
            Command::RateAsymptotic(_) => "rate-asymptotic",
            Command::Capacity(_) => "capacity",
            Command::Simulate(_) => "simulate",
            Command::Entropy(_) => "entropy",
            Command::LhlCheck(_) => "lhl-check",
        }
    }

    fn args(&self) -> &CommonArgs {
        match self {
            Command::RateOneshot(a)
            | Command::RateConverse(a)
            | Command::RateSecondOrder(a)
            | Command::RateAsymptotic(a)
            | Command::Capacity(a)
            | Command::Simulate(a)
            | Command::Entropy(a)
            | Command::LhlCheck(a) => a,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Channel description (JSON, see schemas/channel.schema.json).
    #[arg(long)]
    channel: PathBuf,
    /// Access structure (JSON); defaults to the channel file's embedded one.
    #[arg(long)]
    access: Option<PathBuf>,
    /// Reliability-side smoothing parameter.
    #[arg(long, default_value_t = 0.01)]
    eps1: f64,
    /// Security-side smoothing parameter.
    #[arg(long, default_value_t = 0.01)]
    eps2: f64,
    /// Hash-length slack in bits.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Block length (rate-second-order) or channel uses (simulate); max
    /// output length for lhl-check.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Monte Carlo trials for simulate.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// RNG seed; required for simulate, defaults to 0 elsewhere.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sweep axis for rate-second-order: "n=100,1000,10000" or
    /// "eps1=0.01,0.02,0.05" (ascending). Emits CSV instead of JSON.
    #[arg(long)]
    sweep: Option<String>,
}

enum CliError {
    Validation(String),
    NonConvergence(String),
}

fn core_err(e: ssbc_core::Error) -> CliError {
    match e {
        ssbc_core::Error::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

#[derive(Serialize)]
struct ConfigEcho {
    command: String,
    channel: String,
    access: Option<String>,
    eps1: f64,
    eps2: f64,
    delta: f64,
    n: usize,
    trials: usize,
    seed: u64,
    sweep: Option<String>,
}

#[derive(Serialize)]
struct Report<T: Serialize> {
    version: &'static str,
    config: ConfigEcho,
    result: T,
}

fn echo(command: &Command) -> ConfigEcho {
    let a = command.args();
    ConfigEcho {
        command: command.name().to_string(),
        channel: a.channel.display().to_string(),
        access: a.access.as_ref().map(|p| p.display().to_string()),
        eps1: a.eps1,
        eps2: a.eps2,
        delta: a.delta,
        n: a.n,
        trials: a.trials,
        seed: a.seed.unwrap_or(0),
        sweep: a.sweep.clone(),
    }
}

fn load_channel(path: &PathBuf) -> Result<(CqBroadcastChannel, ChannelFile), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let doc: ChannelFile = serde_json::from_str(&text).map_err(|e| {
        CliError::Validation(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let w = channel_from_file(&doc).map_err(|e| {
        CliError::Validation(format!("{} (field: outputs): {e}", path.display()))
    })?;
    Ok((w, doc))
}

fn load_access(args: &CommonArgs, doc: &ChannelFile) -> Result<AccessStructure, CliError> {
    if let Some(path) = &args.access {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let f: AccessFile = serde_json::from_str(&text).map_err(|e| {
            CliError::Validation(format!(
                "{}: line {}, column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        access_from_lists(f.users, &f.minimal_authorized).map_err(|e| {
            CliError::Validation(format!(
                "{} (field: minimal_authorized): {e}",
                path.display()
            ))
        })
    } else if let Some(lists) = &doc.minimal_authorized {
        access_from_lists(doc.users, lists).map_err(|e| {
            CliError::Validation(format!(
                "{} (field: minimal_authorized): {e}",
                args.channel.display()
            ))
        })
    } else {
        Err(CliError::Validation(
            "no access structure: pass --access or embed minimal_authorized in the channel file"
                .into(),
        ))
    }
}

fn budget(args: &CommonArgs) -> Result<EpsilonBudget, CliError> {
    EpsilonBudget::new(args.eps1, args.eps2, args.delta).map_err(core_err)
}

enum SweepAxis {
    BlockLength(Vec<usize>),
    Eps1(Vec<f64>),
}

fn parse_sweep(spec: &str) -> Result<SweepAxis, CliError> {
    let (axis, rest) = spec.split_once('=').ok_or_else(|| {
        CliError::Validation(format!(
            "sweep spec {spec:?} must look like \"n=100,1000\" (field: sweep)"
        ))
    })?;
    let bad = |v: &str| {
        CliError::Validation(format!("sweep value {v:?} is not a number (field: sweep)"))
    };
    match axis {
        "n" => {
            let values: Vec<usize> = rest
                .split(',')
                .map(|v| v.trim().parse::<usize>().map_err(|_| bad(v)))
                .collect::<Result<_, _>>()?;
            if values.is_empty() || values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Validation(
                    "sweep n-list must be nonempty and strictly ascending (field: sweep)".into(),
                ));
            }
            Ok(SweepAxis::BlockLength(values))
        }
        "eps1" => {
            let values: Vec<f64> = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad(v)))
                .collect::<Result<_, _>>()?;
            if values.is_empty() || values.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Validation(
                    "sweep eps1-list must be nonempty and strictly ascending (field: sweep)"
                        .into(),
                ));
            }
            Ok(SweepAxis::Eps1(values))
        }
        other => Err(CliError::Validation(format!(
            "unknown sweep axis {other:?}; expected \"n\" or \"eps1\" (field: sweep)"
        ))),
    }
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::Validation(format!("cannot write to stdout: {e}")))
        }
    }
}

fn emit_json<T: Serialize>(command: &Command, result: T) -> Result<(), CliError> {
    let report = Report {
        version: VERSION,
        config: echo(command),
        result,
    };
    let mut text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Validation(format!("serialization failed: {e}")))?;
    text.push('\n');
    emit(&command.args().out, text.as_bytes())
}

fn subset_label(prefix: &str, side: &str, users: &[usize]) -> String {
    let list: Vec<String> = users.iter().map(|u| u.to_string()).collect();
    format!("{prefix}[{side}={{{}}}]", list.join(","))
}

fn second_order_csv(
    channel: &CqBroadcastChannel,
    access: &AccessStructure,
    p: &InputDistribution,
    args: &CommonArgs,
    axis: SweepAxis,
) -> Result<Vec<u8>, CliError> {
    let points: Vec<(String, SecondOrderReport)> = match axis {
        SweepAxis::BlockLength(ns) => ns
            .iter()
            .map(|&n| {
                second_order_rate(channel, access, p, n, args.eps1)
                    .map(|r| (n.to_string(), r))
                    .map_err(core_err)
            })
            .collect::<Result<_, _>>()?,
        SweepAxis::Eps1(es) => es
            .iter()
            .map(|&e| {
                second_order_rate(channel, access, p, args.n, e)
                    .map(|r| (format!("{e}"), r))
                    .map_err(core_err)
            })
            .collect::<Result<_, _>>()?,
    };
    let axis_name = match args.sweep.as_deref().and_then(|s| s.split('=').next()) {
        Some("eps1") => "eps1",
        _ => "n",
    };
    let first = &points[0].1;
    let mut header: Vec<String> = vec![axis_name.into(), "rate".into(), "band".into()];
    for t in &first.min_entropy_terms {
        header.push(subset_label("Hmin_rate", "B", &t.subset));
    }
    for t in &first.max_entropy_terms {
        header.push(subset_label("Hmax_rate", "A", &t.subset));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Validation(format!("csv write failed: {e}"));
    w.write_record(&header).map_err(io_err)?;
    for (axis_value, r) in &points {
        let mut row: Vec<String> = vec![
            axis_value.clone(),
            format!("{}", r.rate_per_symbol),
            format!("{}", r.band_per_symbol),
        ];
        for t in r.min_entropy_terms.iter().chain(&r.max_entropy_terms) {
            row.push(format!("{}", t.value));
        }
        w.write_record(&row).map_err(io_err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Validation(format!("csv write failed: {e}")))
}

#[derive(Serialize)]
struct CapacityResult {
    capacity_bits: f64,
    input_distribution: Vec<f64>,
}

#[derive(Serialize)]
struct ConverseResult {
    report: ssbc_core::RateReport,
    secret_size: usize,
    /// Maximizing secret-input joint, row-major over (s, x).
    coupling: Vec<f64>,
}

#[derive(Serialize)]
struct EntropyRow {
    subset: Vec<usize>,
    authorized: bool,
    h_min: f64,
    h: f64,
    h_max: f64,
    /// Smoothed values at eps1 (classical conditioning only).
    h_min_smooth: Option<f64>,
    h_max_smooth: Option<f64>,
}

#[derive(Serialize)]
struct LhlRow {
    output_bits: usize,
    eps: f64,
    lhs: f64,
    rhs: f64,
    satisfied: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let command = cli.command;
    let args = command.args();
    let (channel, doc) = load_channel(&args.channel)?;
    let access = load_access(args, &doc)?;
    let input = InputDistribution::uniform(channel.input_alphabet_size());
    if args.sweep.is_some() && !matches!(command, Command::RateSecondOrder(_)) {
        return Err(CliError::Validation(
            "--sweep is only valid for rate-second-order (field: sweep)".into(),
        ));
    }
    match &command {
        Command::RateOneshot(a) => {
            let b = budget(a)?;
            let r = one_shot_achievable_rate(&channel, &access, &input, &b).map_err(core_err)?;
            emit_json(&command, r)
        }
        Command::RateConverse(a) => {
            let secret_size = channel.input_alphabet_size();
            let (report, joint) = one_shot_converse_maximized(
                &channel,
                &access,
                secret_size,
                a.eps1,
                a.seed.unwrap_or(0),
            )
            .map_err(core_err)?;
            emit_json(
                &command,
                ConverseResult {
                    report,
                    secret_size,
                    coupling: joint.entries().to_vec(),
                },
            )
        }
        Command::RateSecondOrder(a) => {
            if let Some(spec) = &a.sweep {
                let axis = parse_sweep(spec)?;
                let csv = second_order_csv(&channel, &access, &input, a, axis)?;
                emit(&a.out, &csv)
            } else {
                let r = second_order_rate(&channel, &access, &input, a.n, a.eps1)
                    .map_err(core_err)?;
                emit_json(&command, r)
            }
        }
        Command::RateAsymptotic(_) => {
            let r = asymptotic_rate(&channel, &access, &input).map_err(core_err)?;
            emit_json(&command, r)
        }
        Command::Capacity(a) => {
            let (cap, dist) =
                classical_capacity(&channel, &access, a.seed.unwrap_or(0)).map_err(core_err)?;
            emit_json(
                &command,
                CapacityResult {
                    capacity_bits: cap,
                    input_distribution: dist.probs().to_vec(),
                },
            )
        }
        Command::Simulate(a) => {
            let seed = a.seed.ok_or_else(|| {
                CliError::Validation("simulate requires --seed (field: seed)".into())
            })?;
            let b = budget(a)?;
            let cfg = SimulationConfig {
                trials: a.trials,
                seed,
                n: a.n,
                ..Default::default()
            };
            let r = simulate(&channel, &access, &input, &b, &cfg).map_err(core_err)?;
            emit_json(&command, r)
        }
        Command::Entropy(a) => {
            let mut rows = Vec::new();
            let mut subsets: Vec<_> = access
                .unauthorized_sets()
                .into_iter()
                .map(|s| (s, false))
                .collect();
            subsets.extend(access.authorized_sets().into_iter().map(|s| (s, true)));
            for (subset, authorized) in subsets {
                let state = build_cq_state(&input, &channel, &subset).map_err(core_err)?;
                let (h_min_smooth, h_max_smooth) = match state.classical_joint() {
                    Some(j) if a.eps1 > 0.0 => (
                        Some(smooth_min_entropy_classical(&j, a.eps1).map_err(core_err)?.value),
                        Some(smooth_max_entropy_classical(&j, a.eps1).map_err(core_err)?.value),
                    ),
                    _ => (None, None),
                };
                rows.push(EntropyRow {
                    subset: subset.users(),
                    authorized,
                    h_min: min_entropy_zero(&state).map_err(core_err)?.value,
                    h: conditional_entropy(&state).map_err(core_err)?,
                    h_max: max_entropy_zero(&state).map_err(core_err)?.value,
                    h_min_smooth,
                    h_max_smooth,
                });
            }
            emit_json(&command, rows)
        }
        Command::LhlCheck(a) => {
            let rows = channel.classical_rows().ok_or_else(|| {
                CliError::Validation("lhl-check needs a classical channel".into())
            })?;
            let nx = channel.input_alphabet_size();
            let b_bits = (nx.max(2) as f64).log2().ceil() as usize;
            let p_x = vec![1.0 / nx as f64; nx];
            let mut out_rows = Vec::new();
            for r in 1..=a.n.max(1).min(b_bits) {
                let (lhs, rhs) =
                    leftover_hash_check(&p_x, Some(&rows), FamilyKind::Toeplitz, r, a.eps1)
                        .map_err(core_err)?;
                out_rows.push(LhlRow {
                    output_bits: r,
                    eps: a.eps1,
                    lhs,
                    rhs,
                    satisfied: lhs <= rhs + 1e-12,
                });
            }
            emit_json(&command, out_rows)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::NonConvergence(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(3);
        }
    }
}
