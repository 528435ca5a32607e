//! Memoryless binary-input channels.
//!
//! Codewords use the ±1 convention (bit 0 ↔ +1). Discrete channel outputs are
//! stored as `i8` in `{+1, 0, -1}` where `0` is an erasure.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "lowercase")]
pub enum ChannelModel {
    Bec(f64),
    Bsc(f64),
    Biawgn(f64),
}

/// A channel family, parameterized by a single real.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelFamily {
    Bec,
    Bsc,
    Biawgn,
}

impl ChannelFamily {
    pub fn with_param(self, param: f64) -> Result<ChannelModel> {
        match self {
            ChannelFamily::Bec => ChannelModel::bec(param),
            ChannelFamily::Bsc => ChannelModel::bsc(param),
            ChannelFamily::Biawgn => ChannelModel::biawgn(param),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelFamily::Bec => "bec",
            ChannelFamily::Bsc => "bsc",
            ChannelFamily::Biawgn => "biawgn",
        }
    }
}

impl FromStr for ChannelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bec" => Ok(ChannelFamily::Bec),
            "bsc" => Ok(ChannelFamily::Bsc),
            "biawgn" | "awgn" => Ok(ChannelFamily::Biawgn),
            other => Err(Error::Parse(format!("unknown channel family '{other}'"))),
        }
    }
}

impl fmt::Display for ChannelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl ChannelModel {
    pub fn bec(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "BEC erasure probability {alpha} not in [0,1)"
            )));
        }
        Ok(ChannelModel::Bec(alpha))
    }

    /// `p = 0.5` is accepted as the useless channel.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "BSC crossover {p} not in [0,1/2]"
            )));
        }
        Ok(ChannelModel::Bsc(p))
    }

    pub fn biawgn(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "BIAWGN sigma {sigma} must be positive"
            )));
        }
        Ok(ChannelModel::Biawgn(sigma))
    }

    pub fn family(&self) -> ChannelFamily {
        match self {
            ChannelModel::Bec(_) => ChannelFamily::Bec,
            ChannelModel::Bsc(_) => ChannelFamily::Bsc,
            ChannelModel::Biawgn(_) => ChannelFamily::Biawgn,
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            ChannelModel::Bec(a) | ChannelModel::Bsc(a) | ChannelModel::Biawgn(a) => a,
        }
    }
}

impl FromStr for ChannelModel {
    type Err = Error;
    /// Parses `"bec:0.42"`, `"bsc:0.084"`, `"biawgn:0.88"`.
    fn from_str(s: &str) -> Result<Self> {
        let (fam, val) = s.split_once(':').ok_or_else(|| {
            Error::Parse(format!("channel '{s}' is not of the form family:param"))
        })?;
        let val: f64 = val
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad channel parameter in '{s}'")))?;
        fam.parse::<ChannelFamily>()?.with_param(val)
    }
}

impl fmt::Display for ChannelModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family(), self.param())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Symbols {
    /// Values in `{+1, 0, -1}`; `0` marks an erasure.
    Discrete(Vec<i8>),
    Real(Vec<f64>),
}

/// Channel output together with the channel that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedWord {
    pub symbols: Symbols,
    pub channel: ChannelModel,
}

impl ReceivedWord {
    pub fn discrete(symbols: Vec<i8>, channel: ChannelModel) -> Self {
        Self {
            symbols: Symbols::Discrete(symbols),
            channel,
        }
    }

    pub fn real(symbols: Vec<f64>, channel: ChannelModel) -> Self {
        Self {
            symbols: Symbols::Real(symbols),
            channel,
        }
    }

    pub fn len(&self) -> usize {
        match &self.symbols {
            Symbols::Discrete(v) => v.len(),
            Symbols::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_discrete(&self) -> Result<&[i8]> {
        match &self.symbols {
            Symbols::Discrete(v) => Ok(v),
            Symbols::Real(_) => Err(Error::WrongChannel(
                "expected a discrete (±1 / erasure) received word".into(),
            )),
        }
    }

    pub fn as_real(&self) -> Result<&[f64]> {
        match &self.symbols {
            Symbols::Real(v) => Ok(v),
            Symbols::Discrete(_) => Err(Error::WrongChannel(
                "expected real-valued channel output".into(),
            )),
        }
    }

    /// Flips the sign of coordinate `i` wherever `signs[i] = -1`.
    pub fn multiply_signs(&self, signs: &[i8]) -> ReceivedWord {
        let symbols = match &self.symbols {
            Symbols::Discrete(v) => {
                Symbols::Discrete(v.iter().zip(signs).map(|(&a, &s)| a * s).collect())
            }
            Symbols::Real(v) => {
                Symbols::Real(v.iter().zip(signs).map(|(&a, &s)| a * s as f64).collect())
            }
        };
        ReceivedWord {
            symbols,
            channel: self.channel,
        }
    }

    /// CSV with one `index,kind,value` line per symbol; kind is `+1`, `-1`, `?` or `real`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# channel={}\nindex,kind,value\n", self.channel);
        match &self.symbols {
            Symbols::Discrete(v) => {
                for (i, &s) in v.iter().enumerate() {
                    let kind = match s {
                        1 => "+1",
                        -1 => "-1",
                        _ => "?",
                    };
                    out.push_str(&format!("{i},{kind},{s}\n"));
                }
            }
            Symbols::Real(v) => {
                for (i, &y) in v.iter().enumerate() {
                    out.push_str(&format!("{i},real,{y:e}\n"));
                }
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut channel = None;
        let mut disc = Vec::new();
        let mut real = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if let Some(rest) = line.strip_prefix("# channel=") {
                channel = Some(rest.parse::<ChannelModel>()?);
                continue;
            }
            if line.starts_with('#') || line.starts_with("index") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("bad CSV line '{line}'")));
            }
            match fields[1] {
                "+1" => disc.push(1),
                "-1" => disc.push(-1),
                "?" => disc.push(0),
                "real" => real.push(
                    fields[2]
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad value in '{line}'")))?,
                ),
                k => return Err(Error::Parse(format!("unknown symbol kind '{k}'"))),
            }
        }
        let channel = channel.ok_or_else(|| Error::Parse("missing '# channel=' header".into()))?;
        match (disc.is_empty(), real.is_empty()) {
            (_, true) => Ok(ReceivedWord::discrete(disc, channel)),
            (true, false) => Ok(ReceivedWord::real(real, channel)),
            _ => Err(Error::Parse("mixed discrete and real symbols".into())),
        }
    }
}

/// Per-coordinate LLRs `ln p(y|+1)/p(y|-1)`; infinities mark known bits.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrWord {
    pub values: Vec<f64>,
}

/// Random generator for symbol `index` under `seed`, independent of every other index.
pub(crate) fn symbol_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn transmit(codeword: &[i8], ch: ChannelModel, seed: u64) -> ReceivedWord {
    match ch {
        ChannelModel::Bec(alpha) => {
            let out = codeword
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    if alpha > 0.0 && symbol_rng(seed, i as u64).gen::<f64>() < alpha {
                        0
                    } else {
                        x
                    }
                })
                .collect();
            ReceivedWord::discrete(out, ch)
        }
        ChannelModel::Bsc(p) => {
            let out = codeword
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    if p > 0.0 && symbol_rng(seed, i as u64).gen::<f64>() < p {
                        -x
                    } else {
                        x
                    }
                })
                .collect();
            ReceivedWord::discrete(out, ch)
        }
        ChannelModel::Biawgn(sigma) => {
            let out = codeword
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let z: f64 = symbol_rng(seed, i as u64).sample(StandardNormal);
                    x as f64 + sigma * z
                })
                .collect();
            ReceivedWord::real(out, ch)
        }
    }
}

/// `H(p)` in bits, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// The unique `x ∈ [0, 1/2]` with `H(x) = y`, by bisection.
pub fn inverse_entropy(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::InvalidParameter(format!(
            "entropy value {y} not in [0,1]"
        )));
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Gaussian tail `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

pub fn capacity(ch: ChannelModel) -> f64 {
    match ch {
        ChannelModel::Bec(alpha) => 1.0 - alpha,
        ChannelModel::Bsc(p) => 1.0 - binary_entropy(p),
        ChannelModel::Biawgn(sigma) => biawgn_capacity(sigma),
    }
}

/// `1 - E[log2(1 + e^{-2Y/σ²})]` with `Y ~ N(1, σ²)`, composite Simpson over ±12σ.
fn biawgn_capacity(sigma: f64) -> f64 {
    let s2 = sigma * sigma;
    let n = 4000;
    let (a, b) = (1.0 - 12.0 * sigma, 1.0 + 12.0 * sigma);
    let h = (b - a) / n as f64;
    let f = |y: f64| {
        let pdf =
            (-(y - 1.0).powi(2) / (2.0 * s2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt());
        let t = -2.0 * y / s2;
        // log2(1 + e^t) without overflow
        let l = if t > 0.0 {
            t + (-t).exp().ln_1p()
        } else {
            t.exp().ln_1p()
        };
        pdf * l / std::f64::consts::LN_2
    };
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    1.0 - acc * h / 3.0
}

/// Sign quantization, `y ≥ 0 ↦ +1`. The result is a BSC(`Q(1/σ)`) output.
pub fn hard_quantize(rw: &ReceivedWord) -> Result<ReceivedWord> {
    let sigma = match rw.channel {
        ChannelModel::Biawgn(s) => s,
        other => {
            return Err(Error::WrongChannel(format!(
                "hard quantization needs BIAWGN output, got {other}"
            )))
        }
    };
    let out = rw
        .as_real()?
        .iter()
        .map(|&y| if y >= 0.0 { 1 } else { -1 })
        .collect();
    Ok(ReceivedWord::discrete(
        out,
        ChannelModel::Bsc(q_function(1.0 / sigma)),
    ))
}

/// Three-level quantization: `y ≥ τ ↦ +1`, `y ≤ -τ ↦ -1`, otherwise erasure.
///
/// The returned word keeps the BIAWGN channel tag since the ternary output is
/// not one of the three channel models.
pub fn ternary_quantize(rw: &ReceivedWord, tau: f64) -> Result<ReceivedWord> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tau = {tau} must be non-negative"
        )));
    }
    let out = rw
        .as_real()?
        .iter()
        .map(|&y| {
            if y >= tau && !(tau == 0.0 && y == 0.0) {
                1
            } else if y <= -tau && !(tau == 0.0 && y == 0.0) {
                -1
            } else {
                0
            }
        })
        .collect();
    Ok(ReceivedWord::discrete(out, rw.channel))
}

/// Ternary output probabilities `(P(+1), P(0), P(-1))` given input `+1`.
pub fn ternary_probabilities(sigma: f64, tau: f64) -> (f64, f64, f64) {
    let plus = q_function((tau - 1.0) / sigma);
    let minus = q_function((tau + 1.0) / sigma);
    (plus, (1.0 - plus - minus).max(0.0), minus)
}

pub fn initial_llr(rw: &ReceivedWord) -> Result<LlrWord> {
    let values = match rw.channel {
        ChannelModel::Bec(_) => rw
            .as_discrete()?
            .iter()
            .map(|&s| match s {
                1 => f64::INFINITY,
                -1 => f64::NEG_INFINITY,
                _ => 0.0,
            })
            .collect(),
        ChannelModel::Bsc(p) => {
            let mag = if p == 0.0 {
                f64::INFINITY
            } else {
                ((1.0 - p) / p).ln()
            };
            rw.as_discrete()?
                .iter()
                .map(|&s| {
                    if s == 0 || mag == 0.0 {
                        0.0
                    } else {
                        s as f64 * mag
                    }
                })
                .collect()
        }
        ChannelModel::Biawgn(sigma) => {
            let scale = 2.0 / (sigma * sigma);
            rw.as_real()?.iter().map(|&y| scale * y).collect()
        }
    };
    Ok(LlrWord { values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn parse_and_display() {
        let ch: ChannelModel = "bec:0.42".parse().unwrap();
        assert_eq!(ch, ChannelModel::Bec(0.42));
        assert_eq!(ch.to_string(), "bec:0.42");
        assert_eq!(
            "biawgn:0.88".parse::<ChannelModel>().unwrap(),
            ChannelModel::Biawgn(0.88)
        );
        assert!("bsc:0.7".parse::<ChannelModel>().is_err());
        assert!("foo:0.1".parse::<ChannelModel>().is_err());
        assert!("bsc".parse::<ChannelModel>().is_err());
    }

    #[test]
    fn bec_zero_is_noiseless() {
        let cw = vec![1, -1, 1, 1, -1];
        let rw = transmit(&cw, ChannelModel::Bec(0.0), 7);
        assert_eq!(rw.as_discrete().unwrap(), &cw[..]);
    }

    #[test]
    fn empirical_rates() {
        let n = 100_000;
        let ones = vec![1i8; n];
        let rw = transmit(&ones, ChannelModel::Bec(0.5), 1);
        let erased = rw
            .as_discrete()
            .unwrap()
            .iter()
            .filter(|&&s| s == 0)
            .count() as f64
            / n as f64;
        assert!((0.49..=0.51).contains(&erased), "{erased}");
        let rw = transmit(&ones, ChannelModel::Bsc(0.11), 2);
        let flipped = rw
            .as_discrete()
            .unwrap()
            .iter()
            .filter(|&&s| s == -1)
            .count() as f64
            / n as f64;
        assert!((0.10..=0.12).contains(&flipped), "{flipped}");
    }

    #[test]
    fn transmit_is_per_symbol_deterministic() {
        let a = transmit(&[1; 50], ChannelModel::Biawgn(0.8), 9);
        let b = transmit(&[1; 80], ChannelModel::Biawgn(0.8), 9);
        assert_eq!(a.as_real().unwrap(), &b.as_real().unwrap()[..50]);
        let c = transmit(&[1; 50], ChannelModel::Biawgn(0.8), 10);
        assert_ne!(a, c);
    }

    #[test]
    fn entropy_values() {
        close(binary_entropy(0.5), 1.0, 1e-15);
        close(binary_entropy(0.11), 0.4999, 1e-4);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        for x in [0.05, 0.11, 0.3] {
            close(inverse_entropy(binary_entropy(x)).unwrap(), x, 1e-10);
        }
        assert!(inverse_entropy(1.5).is_err());
    }

    #[test]
    fn q_values() {
        close(q_function(0.0), 0.5, 1e-15);
        close(q_function(1.0 / 0.743), 0.089, 1e-3);
        for x in [0.1, 1.0, 3.3] {
            close(q_function(x) + q_function(-x), 1.0, 1e-15);
        }
        // Q(1) by composite Simpson on the Gaussian density over [1, 13]
        let (m, h) = (12_000, 1e-3);
        let phi = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let q1 = (0..=m)
            .map(|i| {
                let w = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                w * phi(1.0 + i as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0;
        close(q_function(1.0), q1, 1e-10);
    }

    #[test]
    fn capacities() {
        close(capacity(ChannelModel::Bec(0.5)), 0.5, 1e-15);
        close(capacity(ChannelModel::Bsc(0.11)), 0.5, 1e-3);
        close(capacity(ChannelModel::Biawgn(0.9787)), 0.5, 5e-3);
        let p = 0.2;
        close(
            capacity(ChannelModel::Bsc(p)),
            capacity(ChannelModel::Bec(binary_entropy(p))),
            1e-15,
        );
        for s in [0.7, 0.9, 1.1] {
            assert!(capacity(ChannelModel::Biawgn(s)) > 1.0 - binary_entropy(q_function(1.0 / s)));
        }
        // large σ → 0, small σ → 1
        assert!(capacity(ChannelModel::Biawgn(20.0)) < 0.01);
        assert!(capacity(ChannelModel::Biawgn(0.2)) > 0.9999);
    }

    #[test]
    fn quantizers() {
        let ch = ChannelModel::Biawgn(1.0);
        let rw = ReceivedWord::real(vec![0.0, -0.3, 2.1], ch);
        let hq = hard_quantize(&rw).unwrap();
        assert_eq!(hq.as_discrete().unwrap(), &[1, -1, 1]);
        let tq = ternary_quantize(&rw, 0.5).unwrap();
        assert_eq!(tq.as_discrete().unwrap(), &[0, 0, 1]);
        let t0 = ternary_quantize(&ReceivedWord::real(vec![-0.3, 2.1], ch), 0.0).unwrap();
        assert_eq!(t0.as_discrete().unwrap(), &[-1, 1]);
        let bsc = ReceivedWord::discrete(vec![1], ChannelModel::Bsc(0.1));
        assert!(matches!(hard_quantize(&bsc), Err(Error::WrongChannel(_))));
    }

    #[test]
    fn quantized_statistics() {
        let n = 100_000;
        let rw = transmit(&vec![1; n], ChannelModel::Biawgn(1.0), 3);
        let hq = hard_quantize(&rw).unwrap();
        let flips = hq
            .as_discrete()
            .unwrap()
            .iter()
            .filter(|&&s| s == -1)
            .count() as f64
            / n as f64;
        close(flips, q_function(1.0), 0.01);
        let tq = ternary_quantize(&rw, 0.5).unwrap();
        let er = tq
            .as_discrete()
            .unwrap()
            .iter()
            .filter(|&&s| s == 0)
            .count() as f64
            / n as f64;
        close(er, q_function(0.5) - q_function(1.5), 0.01);
        let (_, p0, _) = ternary_probabilities(1.0, 0.5);
        close(p0, q_function(0.5) - q_function(1.5), 1e-12);
    }

    #[test]
    fn llr_values() {
        let rw = ReceivedWord::discrete(vec![1, -1], ChannelModel::Bsc(0.11));
        let l = initial_llr(&rw).unwrap().values;
        close(l[0], 2.0907, 1e-4);
        close(l[1], -2.0907, 1e-4);
        let rw = ReceivedWord::discrete(vec![1, 0, -1], ChannelModel::Bec(0.3));
        assert_eq!(
            initial_llr(&rw).unwrap().values,
            vec![f64::INFINITY, 0.0, f64::NEG_INFINITY]
        );
        let rw = ReceivedWord::discrete(vec![1, -1], ChannelModel::Bsc(0.5));
        assert_eq!(initial_llr(&rw).unwrap().values, vec![0.0, 0.0]);
        let rw = ReceivedWord::discrete(vec![-1], ChannelModel::Bsc(0.0));
        assert_eq!(initial_llr(&rw).unwrap().values, vec![f64::NEG_INFINITY]);
    }

    #[test]
    fn biawgn_llr_matches_posterior() {
        // ln of the ratio of Gaussian likelihoods, integrated numerically over a
        // small window around y so the comparison does not reuse the closed form.
        let sigma = 0.8;
        let y = 0.37;
        let dens = |m: f64| {
            let h = 1e-5;
            (0..100)
                .map(|i| {
                    let t = y - 50.0 * h + (i as f64 + 0.5) * h;
                    (-(t - m).powi(2) / (2.0 * sigma * sigma)).exp() * h
                })
                .sum::<f64>()
        };
        let numeric = (dens(1.0) / dens(-1.0)).ln();
        let rw = ReceivedWord::real(vec![y], ChannelModel::Biawgn(sigma));
        close(initial_llr(&rw).unwrap().values[0], numeric, 1e-6);
    }

    #[test]
    fn csv_round_trip() {
        let rw = ReceivedWord::discrete(vec![1, 0, -1], ChannelModel::Bec(0.25));
        assert_eq!(ReceivedWord::from_csv(&rw.to_csv()).unwrap(), rw);
        let rw = ReceivedWord::real(vec![0.125, -3.5e-7], ChannelModel::Biawgn(0.9));
        assert_eq!(ReceivedWord::from_csv(&rw.to_csv()).unwrap(), rw);
    }
}
