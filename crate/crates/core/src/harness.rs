//! Monte-Carlo sweeps, threshold tables and concentration experiments.
//!
//! Every trial draws its randomness from a seed derived from the master seed
//! and the trial index alone, so results do not depend on the thread count
//! and the same trial sees the same noise at every channel parameter.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{
    hard_quantize, initial_llr, q_function, transmit, ChannelFamily, ChannelModel, ReceivedWord,
};
use crate::decoders::{
    decode_bec_mp, decode_bec_mp_trace, decode_bec_peeling, decode_bp, decode_gallager_a,
    decode_gallager_b, decode_weighted_erasure, CutoffSchedule, DecodeResult, WeightSchedule,
};
use crate::degree_dist::{
    edge_to_node, DegreePairFile, EdgePerspective, NodePerspective, Perspective, Polynomial,
};
use crate::density_evolution::{
    bec_iterate, bec_threshold, bp_threshold, optimal_cutoff_schedule, quantized_decoder_threshold,
    CutoffRule, GridSpec, QuantizedDecoder, TernarySearch, ThresholdResult, MAX_ITER_DENSITY,
};
use crate::error::{Error, Result};
use crate::factor_graph::{
    encode_systematic, sample_ensemble, to_parity_check, triangularize, FactorGraph, TriangularForm,
};
use crate::ira::{ira_condition_threshold, ira_decode_bec_doped, ira_encode, IraGraph};

/// Trials evaluated between early-stopping checks.
const CHUNK: usize = 16;

/// A code ensemble. Deserializes from the tagged form or from the string
/// syntax of [`FromStr`] (`"3,6"`, `"file:pair.json"`, `"ira:0,0,0,1/0,1"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "CodeSpecRepr")]
pub enum CodeSpec {
    Regular {
        dv: usize,
        dc: usize,
    },
    /// A JSON degree-pair file.
    File {
        path: PathBuf,
    },
    /// Repeat-accumulate ensemble with edge-perspective `λ` (information
    /// nodes) and `ρ` (information edges per check).
    Ira {
        lambda: Vec<f64>,
        rho: Vec<f64>,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Tagged {
    Regular { dv: usize, dc: usize },
    File { path: PathBuf },
    Ira { lambda: Vec<f64>, rho: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CodeSpecRepr {
    Text(String),
    Tagged(Tagged),
}

impl TryFrom<CodeSpecRepr> for CodeSpec {
    type Error = Error;

    fn try_from(r: CodeSpecRepr) -> Result<Self> {
        Ok(match r {
            CodeSpecRepr::Text(s) => s.parse()?,
            CodeSpecRepr::Tagged(Tagged::Regular { dv, dc }) => CodeSpec::Regular { dv, dc },
            CodeSpecRepr::Tagged(Tagged::File { path }) => CodeSpec::File { path },
            CodeSpecRepr::Tagged(Tagged::Ira { lambda, rho }) => CodeSpec::Ira { lambda, rho },
        })
    }
}

impl CodeSpec {
    pub fn is_ira(&self) -> bool {
        matches!(self, CodeSpec::Ira { .. })
    }

    pub fn edge_perspective(&self) -> Result<EdgePerspective> {
        match self {
            CodeSpec::Regular { dv, dc } => EdgePerspective::regular(*dv, *dc),
            CodeSpec::File { path } => read_degree_pair(path)?.to_edge(),
            CodeSpec::Ira { lambda, rho } => EdgePerspective::new(
                Polynomial::new(lambda.clone())?,
                Polynomial::new(rho.clone())?,
            ),
        }
    }

    /// Node counts for a block length of `n` variables. Node-perspective files
    /// fix the counts themselves, and `n` must agree with them.
    pub fn node_perspective(&self, n: usize) -> Result<NodePerspective> {
        match self {
            CodeSpec::Regular { dv, dc } => NodePerspective::regular(n, *dv, *dc),
            CodeSpec::File { path } => {
                let file = read_degree_pair(path)?;
                match file.perspective {
                    Perspective::Node => {
                        let np = file.to_node()?;
                        if np.n_var() != n {
                            return Err(Error::Config(format!(
                                "{} describes {} variables, not n = {n}",
                                path.display(),
                                np.n_var()
                            )));
                        }
                        Ok(np)
                    }
                    Perspective::Edge => edge_to_node(n, &file.to_edge()?),
                }
            }
            CodeSpec::Ira { .. } => Err(Error::Config(
                "an IRA ensemble has no LDPC node perspective".into(),
            )),
        }
    }
}

pub fn read_degree_pair(path: &Path) -> Result<DegreePairFile> {
    let file = File::open(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

fn join(c: &[f64]) -> String {
    c.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number '{t}' in '{s}'")))
        })
        .collect()
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Regular { dv, dc } => write!(f, "regular:{dv},{dc}"),
            CodeSpec::File { path } => write!(f, "file:{}", path.display()),
            CodeSpec::Ira { lambda, rho } => write!(f, "ira:{}/{}", join(lambda), join(rho)),
        }
    }
}

impl FromStr for CodeSpec {
    type Err = Error;
    /// `"3,6"`, `"regular:3,6"`, `"file:pair.json"` or `"ira:0,0,0,1/0,1"`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').unwrap_or(("regular", s));
        match kind {
            "regular" => match parse_list::<usize>(rest)?.as_slice() {
                &[dv, dc] => Ok(CodeSpec::Regular { dv, dc }),
                _ => Err(Error::Parse(format!("regular code '{s}' needs dv,dc"))),
            },
            "file" => Ok(CodeSpec::File { path: rest.into() }),
            "ira" => {
                let (l, r) = rest
                    .split_once('/')
                    .ok_or_else(|| Error::Parse(format!("IRA code '{s}' needs lambda/rho")))?;
                Ok(CodeSpec::Ira {
                    lambda: parse_list(l)?,
                    rho: parse_list(r)?,
                })
            }
            _ => Err(Error::Parse(format!("unknown code kind '{kind}'"))),
        }
    }
}

/// Decoders available to simulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderId {
    Peel,
    BecMp,
    GalA,
    GalB,
    Weighted,
    Bp,
}

impl DecoderId {
    pub fn name(self) -> &'static str {
        match self {
            DecoderId::Peel => "peel",
            DecoderId::BecMp => "bec-mp",
            DecoderId::GalA => "gal-a",
            DecoderId::GalB => "gal-b",
            DecoderId::Weighted => "weighted",
            DecoderId::Bp => "bp",
        }
    }

    fn accepts(self, family: ChannelFamily) -> bool {
        match self {
            DecoderId::Peel | DecoderId::BecMp => family == ChannelFamily::Bec,
            DecoderId::GalA | DecoderId::GalB => family != ChannelFamily::Bec,
            DecoderId::Weighted | DecoderId::Bp => true,
        }
    }
}

impl fmt::Display for DecoderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            DecoderId::Peel,
            DecoderId::BecMp,
            DecoderId::GalA,
            DecoderId::GalB,
            DecoderId::Weighted,
            DecoderId::Bp,
        ]
        .into_iter()
        .find(|d| d.name() == s.trim())
        .ok_or_else(|| Error::Parse(format!("unknown decoder '{s}'")))
    }
}

fn default_max_iter() -> usize {
    200
}

fn default_true() -> bool {
    true
}

fn default_target() -> Option<usize> {
    Some(100)
}

fn default_pilots() -> f64 {
    0.01
}

/// A Monte-Carlo sweep over channel parameters. For IRA codes `n` is the
/// number of information bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub code: CodeSpec,
    pub n: usize,
    pub channel: ChannelFamily,
    pub params: Vec<f64>,
    pub decoder: DecoderId,
    /// Algorithm B cutoffs; by default the density-evolution optimum at each parameter.
    #[serde(default)]
    pub cutoffs: Option<CutoffSchedule>,
    /// Weighted-erasure weights; by default `w(1) = 2`, then 1.
    #[serde(default)]
    pub weights: Option<WeightSchedule>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Sample a new graph for every trial instead of one per sweep.
    #[serde(default = "default_true")]
    pub fresh_code: bool,
    /// Transmit uniformly random codewords instead of the all-ones word.
    #[serde(default)]
    pub random_codeword: bool,
    /// Stop a point once this many bit errors are seen.
    #[serde(default = "default_target")]
    pub target_bit_errors: Option<usize>,
    /// Fraction of IRA information bits known to the receiver.
    #[serde(default = "default_pilots")]
    pub pilot_fraction: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl SimulationConfig {
    /// Defaults for everything but the code, channel sweep and decoder.
    pub fn new(
        code: CodeSpec,
        n: usize,
        channel: ChannelFamily,
        params: Vec<f64>,
        decoder: DecoderId,
    ) -> Self {
        Self {
            code,
            n,
            channel,
            params,
            decoder,
            cutoffs: None,
            weights: None,
            max_iter: default_max_iter(),
            trials: 100,
            seed: 0,
            fresh_code: true,
            random_codeword: false,
            target_bit_errors: default_target(),
            pilot_fraction: default_pilots(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.n < 10 {
            return bad(format!("n = {} is below the minimum of 10", self.n));
        }
        if self.params.is_empty() {
            return bad("no channel parameters given".into());
        }
        for &p in &self.params {
            self.channel
                .with_param(p)
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        if !self.decoder.accepts(self.channel) {
            return bad(format!(
                "decoder {} does not run on {}",
                self.decoder, self.channel
            ));
        }
        if self.code.is_ira() && !matches!(self.decoder, DecoderId::Peel | DecoderId::BecMp) {
            return bad("IRA codes are decoded by erasure message passing only".into());
        }
        if !(0.0..1.0).contains(&self.pilot_fraction) {
            return bad(format!(
                "pilot fraction {} not in [0,1)",
                self.pilot_fraction
            ));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive".into());
        }
        self.code
            .edge_perspective()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub code: String,
    pub n: usize,
    pub decoder: DecoderId,
    pub channel: ChannelFamily,
    pub param: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub fresh_code: bool,
    pub random_codeword: bool,
    pub target_bit_errors: Option<usize>,
    pub pilot_fraction: f64,
    pub trials_budget: usize,
    pub trials: usize,
    pub bits: u64,
    pub bit_errors: u64,
    pub word_errors: u64,
    pub ber: f64,
    pub wer: f64,
    pub mean_iterations: f64,
    pub stall_rate: f64,
    pub wall_time_s: f64,
}

/// Deterministic sub-seed `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.gen()
}

enum Code {
    Ldpc {
        g: FactorGraph,
        tf: Option<TriangularForm>,
    },
    Ira {
        g: IraGraph,
        pilots: Vec<usize>,
    },
}

fn build_code(cfg: &SimulationConfig, code_seed: u64) -> Result<Code> {
    if cfg.code.is_ira() {
        let g = IraGraph::sample(cfg.n, &cfg.code.edge_perspective()?, code_seed)?;
        let m = (cfg.pilot_fraction * cfg.n as f64).ceil() as usize;
        let pilots = (0..m).map(|i| i * cfg.n / m).collect();
        return Ok(Code::Ira { g, pilots });
    }
    let g = sample_ensemble(&cfg.code.node_perspective(cfg.n)?, code_seed)?;
    let tf = cfg
        .random_codeword
        .then(|| triangularize(&to_parity_check(&g)));
    Ok(Code::Ldpc { g, tf })
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    trials: usize,
    bits: u64,
    bit_errors: u64,
    word_errors: u64,
    iterations: u64,
    stalls: u64,
}

impl Tally {
    fn add(mut self, o: Tally) -> Tally {
        self.trials += o.trials;
        self.bits += o.bits;
        self.bit_errors += o.bit_errors;
        self.word_errors += o.word_errors;
        self.iterations += o.iterations;
        self.stalls += o.stalls;
        self
    }
}

/// Decoder inputs that depend on the channel parameter but not on the trial.
struct PointSetup {
    ch: ChannelModel,
    cutoffs: Option<CutoffSchedule>,
    weights: WeightSchedule,
}

fn point_setup(cfg: &SimulationConfig, param: f64) -> Result<PointSetup> {
    let ch = cfg.channel.with_param(param)?;
    let cutoffs = match (&cfg.cutoffs, cfg.decoder) {
        (Some(c), _) => Some(c.clone()),
        (None, DecoderId::GalB) => {
            let p0 = match ch {
                ChannelModel::Biawgn(s) => q_function(1.0 / s),
                other => other.param(),
            };
            Some(optimal_cutoff_schedule(
                p0,
                &cfg.code.edge_perspective()?,
                cfg.max_iter,
            )?)
        }
        (None, _) => None,
    };
    let weights = match &cfg.weights {
        Some(w) => w.clone(),
        None => WeightSchedule::new(vec![2.0, 1.0])?,
    };
    Ok(PointSetup {
        ch,
        cutoffs,
        weights,
    })
}

fn hard(rw: ReceivedWord) -> Result<ReceivedWord> {
    match rw.channel {
        ChannelModel::Biawgn(_) => hard_quantize(&rw),
        _ => Ok(rw),
    }
}

fn decode_ldpc(
    cfg: &SimulationConfig,
    s: &PointSetup,
    g: &FactorGraph,
    rw: ReceivedWord,
) -> Result<DecodeResult> {
    match cfg.decoder {
        DecoderId::Peel => decode_bec_peeling(g, &rw),
        DecoderId::BecMp => decode_bec_mp(g, &rw, cfg.max_iter),
        DecoderId::GalA => decode_gallager_a(g, &hard(rw)?, cfg.max_iter),
        DecoderId::GalB => {
            let cutoffs = s.cutoffs.as_ref().expect("cutoffs are set for gal-b");
            decode_gallager_b(g, &hard(rw)?, cutoffs, cfg.max_iter)
        }
        DecoderId::Weighted => decode_weighted_erasure(g, &hard(rw)?, &s.weights, cfg.max_iter),
        DecoderId::Bp => decode_bp(g, &initial_llr(&rw)?, cfg.max_iter),
    }
}

fn run_trial(
    cfg: &SimulationConfig,
    s: &PointSetup,
    fixed: Option<&Code>,
    trial: usize,
) -> Result<Tally> {
    let trial_seed = derive_seed(cfg.seed, trial as u64);
    let fresh;
    let code = match fixed {
        Some(c) => c,
        None => {
            fresh = build_code(cfg, derive_seed(trial_seed, 0))?;
            &fresh
        }
    };
    let mut msg_rng = ChaCha8Rng::seed_from_u64(derive_seed(trial_seed, 2));
    let noise_seed = derive_seed(trial_seed, 1);
    let (bits, bit_errors, result) = match code {
        Code::Ldpc { g, tf } => {
            let cw = match tf {
                Some(tf) => {
                    let msg: Vec<u8> = (0..tf.k()).map(|_| msg_rng.gen_range(0..2)).collect();
                    encode_systematic(tf, &msg)?
                }
                None => vec![1; g.n_var()],
            };
            let d = decode_ldpc(cfg, s, g, transmit(&cw, s.ch, noise_seed))?;
            (g.n_var(), d.error_positions(&cw).len(), d)
        }
        Code::Ira { g, pilots } => {
            let msg: Vec<i8> = if cfg.random_codeword {
                (0..g.k())
                    .map(|_| if msg_rng.gen::<bool>() { 1 } else { -1 })
                    .collect()
            } else {
                vec![1; g.k()]
            };
            let rw = transmit(&ira_encode(g, &msg)?, s.ch, noise_seed);
            let known: Vec<(usize, i8)> = pilots.iter().map(|&u| (u, msg[u])).collect();
            let d = ira_decode_bec_doped(g, &rw, &known, cfg.max_iter)?;
            let mut is_pilot = vec![false; g.k()];
            pilots.iter().for_each(|&u| is_pilot[u] = true);
            let errors = (0..g.k())
                .filter(|&u| !is_pilot[u] && d.word[u] != msg[u])
                .count();
            (g.k() - pilots.len(), errors, d)
        }
    };
    Ok(Tally {
        trials: 1,
        bits: bits as u64,
        bit_errors: bit_errors as u64,
        word_errors: u64::from(bit_errors > 0 || !result.is_success()),
        iterations: result.iterations as u64,
        stalls: u64::from(!result.is_success()),
    })
}

/// Runs the sweep described by `cfg`, one record per channel parameter.
pub fn run_ber_sweep(cfg: &SimulationConfig) -> Result<Vec<SimulationRecord>> {
    cfg.validate()?;
    let fixed = if cfg.fresh_code {
        None
    } else {
        Some(build_code(cfg, derive_seed(cfg.seed, u64::MAX))?)
    };
    let mut records = Vec::with_capacity(cfg.params.len());
    for &param in &cfg.params {
        let start = Instant::now();
        let setup = point_setup(cfg, param)?;
        let mut tally = Tally::default();
        let mut next = 0;
        while next < cfg.trials {
            let end = (next + CHUNK).min(cfg.trials);
            let chunk = (next..end)
                .into_par_iter()
                .map(|t| run_trial(cfg, &setup, fixed.as_ref(), t))
                .collect::<Result<Vec<_>>>()?;
            tally = chunk.into_iter().fold(tally, Tally::add);
            next = end;
            if cfg
                .target_bit_errors
                .is_some_and(|t| tally.bit_errors >= t as u64)
            {
                break;
            }
        }
        let trials = tally.trials as f64;
        records.push(SimulationRecord {
            code: cfg.code.to_string(),
            n: cfg.n,
            decoder: cfg.decoder,
            channel: cfg.channel,
            param,
            max_iter: cfg.max_iter,
            seed: cfg.seed,
            fresh_code: cfg.fresh_code,
            random_codeword: cfg.random_codeword,
            target_bit_errors: cfg.target_bit_errors,
            pilot_fraction: cfg.pilot_fraction,
            trials_budget: cfg.trials,
            trials: tally.trials,
            bits: tally.bits,
            bit_errors: tally.bit_errors,
            word_errors: tally.word_errors,
            ber: if tally.bits == 0 {
                0.0
            } else {
                tally.bit_errors as f64 / tally.bits as f64
            },
            wer: tally.word_errors as f64 / trials,
            mean_iterations: tally.iterations as f64 / trials,
            stall_rate: tally.stalls as f64 / trials,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    Ok(records)
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>, R: Read>(r: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(r)
        .deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

pub fn write_jsonl<T: Serialize, W: Write>(rows: &[T], mut w: W) -> Result<()> {
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>, R: Read>(r: R) -> Result<Vec<T>> {
    BufReader::new(r)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

/// Writes JSON lines for a `.jsonl` path and CSV otherwise.
pub fn write_rows<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    let file = File::create(path)?;
    if path.extension().is_some_and(|e| e == "jsonl") {
        write_jsonl(rows, file)
    } else {
        write_csv(rows, file)
    }
}

/// Threshold computations available to [`run_threshold_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMethod {
    /// Erasure message passing on the BEC.
    Bec,
    GalA,
    /// Algorithm B with the optimal cutoff at every iteration.
    GalB,
    /// Weighted erasure decoding with `w(1) = 2`, then 1.
    Weighted,
    /// Ternary-quantized BIAWGN with optimized `(τ, w)`.
    Ternary,
    /// Belief propagation on quantized densities.
    Bp,
    /// The IRA erasure decoding condition.
    Ira,
}

impl ThresholdMethod {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdMethod::Bec => "bec",
            ThresholdMethod::GalA => "gal-a",
            ThresholdMethod::GalB => "gal-b",
            ThresholdMethod::Weighted => "weighted",
            ThresholdMethod::Ternary => "ternary",
            ThresholdMethod::Bp => "bp",
            ThresholdMethod::Ira => "ira",
        }
    }
}

impl fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ThresholdMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        use ThresholdMethod::*;
        [Bec, GalA, GalB, Weighted, Ternary, Bp, Ira]
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown threshold method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub method: ThresholdMethod,
    pub code: CodeSpec,
    pub family: ChannelFamily,
}

impl ThresholdSpec {
    pub fn new(method: ThresholdMethod, code: CodeSpec, family: ChannelFamily) -> Self {
        Self {
            method,
            code,
            family,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub method: ThresholdMethod,
    pub code: String,
    pub family: ChannelFamily,
    pub threshold: f64,
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub tolerance: f64,
    pub iterations: usize,
}

/// The Gallager A table rows and the regular erasure thresholds.
pub fn default_threshold_specs() -> Vec<ThresholdSpec> {
    let gal_a = [(3, 6), (4, 8), (5, 10), (3, 5), (4, 6), (3, 4)]
        .into_iter()
        .map(|(dv, dc)| {
            ThresholdSpec::new(
                ThresholdMethod::GalA,
                CodeSpec::Regular { dv, dc },
                ChannelFamily::Bsc,
            )
        });
    let bec = [(3, 4), (3, 5), (3, 6)].into_iter().map(|(dv, dc)| {
        ThresholdSpec::new(
            ThresholdMethod::Bec,
            CodeSpec::Regular { dv, dc },
            ChannelFamily::Bec,
        )
    });
    gal_a.chain(bec).collect()
}

fn wrong_family(m: ThresholdMethod, family: ChannelFamily) -> Error {
    Error::WrongChannel(format!("threshold method {m} is not defined on {family}"))
}

pub fn compute_threshold(spec: &ThresholdSpec) -> Result<ThresholdResult> {
    let ep = spec.code.edge_perspective()?;
    let (m, family) = (spec.method, spec.family);
    match m {
        ThresholdMethod::Bec if family == ChannelFamily::Bec => Ok(bec_threshold(&ep)),
        ThresholdMethod::Ira if family == ChannelFamily::Bec => {
            let tol = 1e-6;
            let value = ira_condition_threshold(&ep, 2000, tol)?;
            Ok(ThresholdResult {
                value,
                bracket: (value - tol / 2.0, value + tol / 2.0),
                iterations_used: (1.0 / tol).log2().ceil() as usize,
                tolerance: tol,
            })
        }
        ThresholdMethod::Bec | ThresholdMethod::Ira => Err(wrong_family(m, family)),
        ThresholdMethod::GalA => {
            quantized_decoder_threshold(&QuantizedDecoder::GallagerA, &ep, family)
        }
        ThresholdMethod::GalB => quantized_decoder_threshold(
            &QuantizedDecoder::GallagerB(CutoffRule::Optimal),
            &ep,
            family,
        ),
        ThresholdMethod::Weighted => {
            let ws = WeightSchedule::new(vec![2.0, 1.0])?;
            quantized_decoder_threshold(&QuantizedDecoder::Weighted(ws), &ep, family)
        }
        ThresholdMethod::Ternary => quantized_decoder_threshold(
            &QuantizedDecoder::TernaryBiawgn(TernarySearch::default()),
            &ep,
            family,
        ),
        ThresholdMethod::Bp => bp_threshold(family, &ep, GridSpec::default(), MAX_ITER_DENSITY),
    }
}

/// Computes every row; rows are independent and run in parallel.
pub fn run_threshold_table(specs: &[ThresholdSpec]) -> Result<Vec<ThresholdRow>> {
    specs
        .par_iter()
        .map(|spec| {
            let t = compute_threshold(spec)?;
            Ok(ThresholdRow {
                method: spec.method,
                code: spec.code.to_string(),
                family: spec.family,
                threshold: t.value,
                bracket_lo: t.bracket.0,
                bracket_hi: t.bracket.1,
                tolerance: t.tolerance,
                iterations: t.iterations_used,
            })
        })
        .collect()
}

/// BER dispersion across sampled codes under erasure message passing with a
/// fixed number of iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationConfig {
    pub code: CodeSpec,
    pub alpha: f64,
    pub iterations: usize,
    pub block_lengths: Vec<usize>,
    /// Channel realizations averaged per code.
    pub noise_samples: usize,
    pub seed: u64,
    /// Use the master seed for every code sample.
    #[serde(default)]
    pub same_code: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub n: usize,
    pub mean_ber: f64,
    pub std_ber: f64,
    /// Standard error of `mean_ber` over codes.
    pub std_error: f64,
    /// Tree-ensemble bit erasure probability after the same number of iterations.
    pub de_prediction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub alpha: f64,
    pub iterations: usize,
    pub code_samples: usize,
    pub rows: Vec<ConcentrationRow>,
}

/// Probability that a bit estimate is still erased after `ell` rounds on the tree.
pub fn bec_bit_erasure(ep: &EdgePerspective, alpha: f64, ell: usize) -> f64 {
    if ell == 0 {
        return alpha;
    }
    let x = bec_iterate(alpha, ep, ell - 1)[ell - 1];
    let y = 1.0 - ep.rho().eval(1.0 - x);
    let (mut num, mut den) = (0.0, 0.0);
    for (j, l) in ep.var_degrees() {
        num += l / j as f64 * y.powi(j as i32);
        den += l / j as f64;
    }
    alpha * num / den
}

pub fn run_concentration(
    cfg: &ConcentrationConfig,
    code_samples: usize,
) -> Result<ConcentrationReport> {
    if code_samples < 2 {
        return Err(Error::Config("at least two code samples are needed".into()));
    }
    if cfg.noise_samples == 0 || cfg.block_lengths.is_empty() || cfg.code.is_ira() {
        return Err(Error::Config(
            "concentration needs an LDPC code, block lengths and noise samples".into(),
        ));
    }
    let ch = ChannelModel::bec(cfg.alpha).map_err(|e| Error::Config(e.to_string()))?;
    let ep = cfg.code.edge_perspective()?;
    let rows = cfg
        .block_lengths
        .iter()
        .map(|&n| {
            let np = cfg.code.node_perspective(n)?;
            let bers = (0..code_samples)
                .into_par_iter()
                .map(|i| {
                    let s = if cfg.same_code {
                        cfg.seed
                    } else {
                        derive_seed(cfg.seed, i as u64)
                    };
                    let g = sample_ensemble(&np, derive_seed(s, 0))?;
                    let mut erased = 0usize;
                    for t in 0..cfg.noise_samples {
                        let rw = transmit(&vec![1; n], ch, derive_seed(s, 1 + t as u64));
                        erased += decode_bec_mp_trace(&g, &rw, cfg.iterations)?[cfg.iterations];
                    }
                    Ok(erased as f64 / (n * cfg.noise_samples) as f64)
                })
                .collect::<Result<Vec<f64>>>()?;
            let k = bers.len() as f64;
            let mean = bers.iter().sum::<f64>() / k;
            let var = bers.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (k - 1.0);
            Ok(ConcentrationRow {
                n,
                mean_ber: mean,
                std_ber: var.sqrt(),
                std_error: (var / k).sqrt(),
                de_prediction: bec_bit_erasure(&ep, cfg.alpha, cfg.iterations),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcentrationReport {
        alpha: cfg.alpha,
        iterations: cfg.iterations,
        code_samples,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(params: Vec<f64>) -> SimulationConfig {
        let mut cfg = SimulationConfig::new(
            CodeSpec::Regular { dv: 3, dc: 6 },
            600,
            ChannelFamily::Bec,
            params,
            DecoderId::Peel,
        );
        cfg.trials = 20;
        cfg
    }

    #[test]
    fn code_spec_strings_round_trip() {
        for s in ["regular:3,6", "file:pairs/a.json", "ira:0,0,0,1/0,1"] {
            assert_eq!(s.parse::<CodeSpec>().unwrap().to_string(), s);
        }
        assert_eq!(
            "4,8".parse::<CodeSpec>().unwrap(),
            CodeSpec::Regular { dv: 4, dc: 8 }
        );
        assert!("regular:3".parse::<CodeSpec>().is_err());
        let tagged = CodeSpec::Ira {
            lambda: vec![0.0, 0.0, 0.0, 1.0],
            rho: vec![0.0, 1.0],
        };
        let json = serde_json::to_string(&tagged).unwrap();
        assert_eq!(serde_json::from_str::<CodeSpec>(&json).unwrap(), tagged);
        assert_eq!(
            serde_json::from_str::<CodeSpec>("\"ira:0,0,0,1/0,1\"").unwrap(),
            tagged
        );
        assert!(serde_json::from_str::<CodeSpec>("\"3\"").is_err());
        assert_eq!("gal-b".parse::<DecoderId>().unwrap(), DecoderId::GalB);
    }

    #[test]
    fn noiseless_channel_has_no_errors() {
        let mut cfg = small(vec![0.0]);
        cfg.trials = 1;
        let r = &run_ber_sweep(&cfg).unwrap()[0];
        assert_eq!((r.ber, r.wer, r.trials), (0.0, 0.0, 1));
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = small(vec![0.3, 0.45]);
        let strip = |mut v: Vec<SimulationRecord>| {
            v.iter_mut().for_each(|r| r.wall_time_s = 0.0);
            v
        };
        assert_eq!(
            strip(run_ber_sweep(&cfg).unwrap()),
            strip(run_ber_sweep(&cfg).unwrap())
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = small(vec![0.3]);
        cfg.trials = 0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = small(vec![1.5]);
        assert!(cfg.validate().is_err());
        cfg.params = vec![0.1];
        cfg.channel = ChannelFamily::Bsc;
        assert!(cfg.validate().is_err());
        cfg.n = 5;
        cfg.decoder = DecoderId::GalA;
        assert!(cfg.validate().is_err());
        assert!(
            SimulationConfig::from_json(r#"{"code":{"kind":"regular","dv":3,"dc":6}}"#).is_err()
        );
    }

    #[test]
    fn csv_and_jsonl_round_trip() {
        let rows = run_ber_sweep(&small(vec![0.2, 0.4])).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            read_csv::<SimulationRecord, _>(buf.as_slice()).unwrap(),
            rows
        );
        let mut buf = Vec::new();
        write_jsonl(&rows, &mut buf).unwrap();
        assert_eq!(
            read_jsonl::<SimulationRecord, _>(buf.as_slice()).unwrap(),
            rows
        );
    }

    #[test]
    fn threshold_rows() {
        let rows = run_threshold_table(&[
            ThresholdSpec::new(
                ThresholdMethod::GalA,
                CodeSpec::Regular { dv: 4, dc: 6 },
                ChannelFamily::Bsc,
            ),
            ThresholdSpec::new(
                ThresholdMethod::Bec,
                CodeSpec::Regular { dv: 3, dc: 6 },
                ChannelFamily::Bec,
            ),
        ])
        .unwrap();
        assert!((rows[0].threshold - 1.0 / 15.0).abs() < 1e-4);
        assert!((rows[1].threshold - 0.4294).abs() < 5e-4);
        assert!(rows
            .iter()
            .all(|r| r.bracket_lo <= r.threshold && r.threshold <= r.bracket_hi));
        let spec = ThresholdSpec::new(
            ThresholdMethod::Bec,
            CodeSpec::Regular { dv: 3, dc: 6 },
            ChannelFamily::Bsc,
        );
        assert!(run_threshold_table(&[spec]).is_err());
    }

    #[test]
    fn identical_code_seeds_have_no_dispersion() {
        let cfg = ConcentrationConfig {
            code: CodeSpec::Regular { dv: 3, dc: 6 },
            alpha: 0.4,
            iterations: 5,
            block_lengths: vec![200],
            noise_samples: 3,
            seed: 7,
            same_code: true,
        };
        let r = run_concentration(&cfg, 2).unwrap();
        assert_eq!(r.rows[0].std_ber, 0.0);
        assert!(run_concentration(&cfg, 1).is_err());
    }

    #[test]
    fn bit_erasure_prediction() {
        let ep = EdgePerspective::regular(3, 6).unwrap();
        // one round: erased iff received and all three checks see another erasure
        let y = 1.0 - 0.6f64.powi(5);
        assert!((bec_bit_erasure(&ep, 0.4, 1) - 0.4 * y.powi(3)).abs() < 1e-15);
        assert_eq!(bec_bit_erasure(&ep, 0.4, 0), 0.4);
    }
}
