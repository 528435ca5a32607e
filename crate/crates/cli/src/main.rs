use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ldpc_core::channels::{transmit, ChannelFamily, ChannelModel, ReceivedWord};
use ldpc_core::decoders::{
    decode_bec_mp, decode_bec_peeling, decode_bp, decode_gallager_a, decode_gallager_b,
    decode_weighted_erasure, ml_erasure_decode, CutoffSchedule, WeightSchedule,
};
use ldpc_core::degree_dist::{
    check_concentrated_for, check_concentrated_pair, designed_rate, tornado_pair, DegreePairFile,
};
use ldpc_core::density_evolution::bec_threshold;
use ldpc_core::factor_graph::{encode_systematic, triangularize, FactorGraph, ParityCheckMatrix};
use ldpc_core::harness::{
    default_threshold_specs, run_ber_sweep, run_concentration, run_threshold_table, write_csv,
    write_jsonl, write_rows, CodeSpec, ConcentrationConfig, DecoderId, SimulationConfig,
    ThresholdMethod, ThresholdSpec,
};
use ldpc_core::ira::{ira_condition_threshold, ira_rate, ira_success_condition};
use ldpc_core::Error;

#[derive(Parser)]
#[command(
    name = "ldpc",
    version,
    about = "LDPC simulations, density evolution and thresholds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo BER/WER sweep over channel parameters.
    Simulate(SimulateArgs),
    /// Decoding thresholds by density evolution; the built-in table when no row is given.
    Threshold(ThresholdArgs),
    /// BER dispersion across sampled codes at two or more block lengths.
    Concentration(ConcentrationArgs),
    /// Rate and erasure decoding condition of an IRA ensemble.
    Ira(IraArgs),
    /// Capacity-approaching erasure degree distributions.
    Distributions(DistributionArgs),
    /// Systematic encoding with an alist parity-check matrix.
    Encode(EncodeArgs),
    /// Decode a received word (CSV) with an alist parity-check matrix.
    Decode(DecodeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON configuration; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `dv,dc`, `file:pair.json` or `ira:lambda/rho`.
    #[arg(long, default_value = "3,6")]
    code: CodeSpec,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value = "bec")]
    channel: ChannelFamily,
    /// Comma-separated channel parameters.
    #[arg(long, value_delimiter = ',', default_value = "0.4")]
    params: Vec<f64>,
    #[arg(long, default_value = "peel")]
    decoder: DecoderId,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Reuse one sampled graph for every trial.
    #[arg(long)]
    fixed_code: bool,
    #[arg(long)]
    random_codeword: bool,
    /// Stop a point after this many bit errors (0 disables).
    #[arg(long, default_value_t = 100)]
    target_errors: usize,
    /// Weighted-erasure weights per iteration; the last one repeats.
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Fraction of IRA information bits known to the receiver.
    #[arg(long, default_value_t = 0.01)]
    pilot_fraction: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ThresholdArgs {
    /// JSON list of rows `{method, code, family}`.
    #[arg(long, conflicts_with_all = ["method"])]
    specs: Option<PathBuf>,
    /// bec, gal-a, gal-b, weighted, ternary, bp or ira.
    #[arg(long, requires = "code")]
    method: Option<ThresholdMethod>,
    #[arg(long)]
    code: Option<CodeSpec>,
    #[arg(long, default_value = "bsc")]
    channel: ChannelFamily,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConcentrationArgs {
    #[arg(long, default_value = "3,6")]
    code: CodeSpec,
    #[arg(long, default_value_t = 0.4)]
    alpha: f64,
    #[arg(long, default_value_t = 10)]
    iterations: usize,
    #[arg(long, value_delimiter = ',', default_value = "1000,4000")]
    block_lengths: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    codes: usize,
    #[arg(long, default_value_t = 10)]
    noise_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct IraArgs {
    /// `ira:lambda/rho` with edge-perspective coefficients.
    #[arg(long, default_value = "ira:0,0,0,1/0,1")]
    code: CodeSpec,
    /// Evaluate the condition at this erasure probability.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    grid: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Tornado,
    CheckConcentrated,
}

#[derive(Args)]
struct DistributionArgs {
    #[arg(value_enum)]
    family: Family,
    /// Number of terms `N` of the truncated series.
    #[arg(long)]
    terms: Option<usize>,
    /// Target erasure probability.
    #[arg(long)]
    alpha: Option<f64>,
    /// Check-concentrated `θ` (`1/θ` an integer).
    #[arg(long)]
    theta: Option<f64>,
    /// Check-concentrated gap to capacity; picks `N` and `θ` for `alpha`.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Write the edge-perspective pair to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    alist: PathBuf,
    /// Message bits as a 0/1 string.
    #[arg(long)]
    message: String,
    /// Also transmit, e.g. `bec:0.3`, and print the received word as CSV.
    #[arg(long)]
    channel: Option<ChannelModel>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecodeWith {
    Peel,
    BecMp,
    Ml,
    GalA,
    GalB,
    Weighted,
    Bp,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    alist: PathBuf,
    /// Received word in the `index,kind,value` CSV format.
    #[arg(long)]
    received: PathBuf,
    #[arg(long, value_enum, default_value = "bec-mp")]
    decoder: DecodeWith,
    #[arg(long, default_value_t = 200)]
    max_iter: usize,
    /// Algorithm B cutoff for every degree that admits it; majority otherwise.
    #[arg(long)]
    cutoff: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    weight: f64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.chain().any(|c| {
                matches!(
                    c.downcast_ref::<Error>(),
                    Some(
                        Error::Config(_)
                            | Error::Parse(_)
                            | Error::InvalidParameter(_)
                            | Error::InvalidDistribution(_)
                            | Error::WrongChannel(_)
                            | Error::LengthMismatch { .. }
                            | Error::Json(_)
                    )
                )
            });
            ExitCode::from(if config { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Threshold(a) => threshold(a),
        Command::Concentration(a) => concentration(a),
        Command::Ira(a) => ira(a),
        Command::Distributions(a) => distributions(a),
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
    }
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SimulationConfig::from_json(&text)?
        }
        None => {
            let mut cfg = SimulationConfig::new(a.code, a.n, a.channel, a.params, a.decoder);
            cfg.max_iter = a.max_iter;
            cfg.trials = a.trials;
            cfg.seed = a.seed;
            cfg.fresh_code = !a.fixed_code;
            cfg.random_codeword = a.random_codeword;
            cfg.target_bit_errors = (a.target_errors > 0).then_some(a.target_errors);
            cfg.weights = a.weights.map(WeightSchedule::new).transpose()?;
            cfg.pilot_fraction = a.pilot_fraction;
            cfg.output = a.output;
            cfg
        }
    };
    let records = run_ber_sweep(&cfg)?;
    match &cfg.output {
        Some(path) => write_rows(&records, path)?,
        None => match a.format {
            Format::Csv => write_csv(&records, io::stdout().lock())?,
            Format::Jsonl => write_jsonl(&records, io::stdout().lock())?,
        },
    }
    Ok(())
}

fn threshold(a: ThresholdArgs) -> Result<()> {
    let specs: Vec<ThresholdSpec> = match (&a.specs, a.method, a.code) {
        (Some(path), _, _) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        }
        (None, Some(method), Some(code)) => vec![ThresholdSpec::new(method, code, a.channel)],
        _ => default_threshold_specs(),
    };
    let rows = run_threshold_table(&specs)?;
    match &a.output {
        Some(path) => write_rows(&rows, path)?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn concentration(a: ConcentrationArgs) -> Result<()> {
    let cfg = ConcentrationConfig {
        code: a.code,
        alpha: a.alpha,
        iterations: a.iterations,
        block_lengths: a.block_lengths,
        noise_samples: a.noise_samples,
        seed: a.seed,
        same_code: false,
    };
    let report = run_concentration(&cfg, a.codes)?;
    print_json(&serde_json::to_value(report)?)
}

fn ira(a: IraArgs) -> Result<()> {
    if !a.code.is_ira() {
        return Err(Error::Config("expected an ira:lambda/rho code".into()).into());
    }
    let ep = a.code.edge_perspective()?;
    let mut out = json!({
        "code": a.code.to_string(),
        "rate": ira_rate(&ep)?,
        "condition_threshold": ira_condition_threshold(&ep, a.grid, 1e-6)?,
    });
    if let Some(alpha) = a.alpha {
        out["condition"] = serde_json::to_value(ira_success_condition(&ep, alpha, a.grid)?)?;
    }
    print_json(&out)
}

fn distributions(a: DistributionArgs) -> Result<()> {
    let missing = |what: &str| Error::Config(format!("--{what} is required"));
    let pair = match a.family {
        Family::Tornado => tornado_pair(
            a.terms.ok_or_else(|| missing("terms"))?,
            a.alpha.ok_or_else(|| missing("alpha"))?,
        )?,
        Family::CheckConcentrated => match (a.terms, a.theta, a.alpha, a.epsilon) {
            (Some(n), Some(theta), _, _) => check_concentrated_pair(n, theta)?,
            (_, _, Some(alpha), Some(eps)) => check_concentrated_for(alpha, eps)?,
            _ => bail!(Error::Config(
                "give --terms and --theta, or --alpha and --epsilon".into()
            )),
        },
    };
    let file = DegreePairFile::from_edge(&pair.edge);
    if let Some(path) = &a.output {
        fs::write(path, serde_json::to_string_pretty(&file)?)?;
    }
    print_json(&json!({
        "theta": pair.theta,
        "designed_rate": designed_rate(&pair.edge),
        "bec_threshold": bec_threshold(&pair.edge).value,
        "threshold_bound": pair.threshold_bound,
        "max_var_degree": pair.edge.max_var_degree(),
        "max_chk_degree": pair.edge.max_chk_degree(),
        "pair": file,
    }))
}

fn read_alist(path: &PathBuf) -> Result<ParityCheckMatrix> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(ParityCheckMatrix::from_alist(&text)?)
}

fn bits(word: &[i8]) -> String {
    word.iter()
        .map(|&x| match x {
            1 => '0',
            -1 => '1',
            _ => '?',
        })
        .collect()
}

fn encode(a: EncodeArgs) -> Result<()> {
    let h = read_alist(&a.alist)?;
    let msg = a
        .message
        .trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0u8),
            '1' => Ok(1u8),
            _ => Err(Error::Parse(format!(
                "message character '{c}' is not 0 or 1"
            ))),
        })
        .collect::<Result<Vec<u8>, Error>>()?;
    let cw = encode_systematic(&triangularize(&h), &msg)?;
    match a.channel {
        Some(ch) => print!("{}", transmit(&cw, ch, a.seed).to_csv()),
        None => println!("{}", bits(&cw)),
    }
    Ok(())
}

/// Cutoff `b` where `(j-1)/2 < b ≤ j-1`; elsewhere a strict majority of all `j`
/// votes (messages and received value), `⌊j/2⌋ + 1`.
fn uniform_cutoffs(max_degree: usize, b: Option<usize>) -> Result<CutoffSchedule, Error> {
    let row = (0..=max_degree)
        .map(|j| {
            let top = j.saturating_sub(1);
            match b {
                Some(b) if 2 * b > top && b <= top => b,
                _ => (j / 2 + 1).min(top),
            }
        })
        .collect();
    CutoffSchedule::new(vec![row])
}

fn decode(a: DecodeArgs) -> Result<()> {
    let h = read_alist(&a.alist)?;
    let text = fs::read_to_string(&a.received)
        .with_context(|| format!("reading {}", a.received.display()))?;
    let rw = ReceivedWord::from_csv(&text)?;
    let g = FactorGraph::from_parity_check(&h);
    let hard = |rw: &ReceivedWord| match rw.channel {
        ChannelModel::Biawgn(_) => ldpc_core::channels::hard_quantize(rw),
        _ => Ok(rw.clone()),
    };
    let d = match a.decoder {
        DecodeWith::Peel => decode_bec_peeling(&g, &rw)?,
        DecodeWith::BecMp => decode_bec_mp(&g, &rw, a.max_iter)?,
        DecodeWith::Ml => ml_erasure_decode(&h, &rw)?,
        DecodeWith::GalA => decode_gallager_a(&g, &hard(&rw)?, a.max_iter)?,
        DecodeWith::GalB => {
            let max_degree = g.var_degrees().into_iter().max().unwrap_or(0);
            decode_gallager_b(
                &g,
                &hard(&rw)?,
                &uniform_cutoffs(max_degree, a.cutoff)?,
                a.max_iter,
            )?
        }
        DecodeWith::Weighted => decode_weighted_erasure(
            &g,
            &hard(&rw)?,
            &WeightSchedule::constant(a.weight)?,
            a.max_iter,
        )?,
        DecodeWith::Bp => decode_bp(&g, &ldpc_core::channels::initial_llr(&rw)?, a.max_iter)?,
    };
    print_json(&json!({
        "status": d.status,
        "iterations": d.iterations,
        "residual": d.residual,
        "word": bits(&d.word),
    }))
}
