use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{bisect_decreasing, run_until, Outcome, ThresholdResult};
use crate::channels::{capacity, inverse_entropy, q_function, ChannelFamily, ChannelModel};
use crate::degree_dist::{designed_rate, EdgePerspective};
use crate::error::{Error, Result};

/// Bisection tolerance for BP thresholds.
pub const BP_TOL: f64 = 1e-3;

/// Below this many nonzero products a convolution is done directly.
const DIRECT_CONV_LIMIT: usize = 200_000;

/// Symmetric uniform LLR grid `{-M·step, ..., M·step}` with `M = max / step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub max: f64,
    pub step: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            max: 30.0,
            step: 0.01,
        }
    }
}

impl GridSpec {
    pub fn new(max: f64, step: f64) -> Result<Self> {
        let g = Self { max, step };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.max >= self.step && self.max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid needs 0 < step ≤ max, got step {} max {}",
                self.step, self.max
            )));
        }
        if self.n_mag() > 1_000_000 {
            return Err(Error::InvalidParameter(
                "grid has more than 10^6 bins per side".into(),
            ));
        }
        Ok(())
    }

    /// Number of positive bins `M`.
    pub fn n_mag(&self) -> usize {
        (self.max / self.step).round() as usize
    }

    /// Number of finite bins `2M + 1`.
    pub fn n_bins(&self) -> usize {
        2 * self.n_mag() + 1
    }

    /// LLR value of finite bin `i` (index 0 is `-M·step`).
    pub fn value(&self, i: usize) -> f64 {
        (i as f64 - self.n_mag() as f64) * self.step
    }

    /// Nearest finite bin to `x`, or `None` outside the grid.
    pub fn bin(&self, x: f64) -> Option<usize> {
        let k = (x / self.step).round();
        let m = self.n_mag() as f64;
        (k.abs() <= m).then_some((k + m) as usize)
    }
}

/// Message density on a [`GridSpec`] with point masses at `±∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedDensity {
    pub grid: GridSpec,
    pub pmf: Vec<f64>,
    pub mass_pos_inf: f64,
    pub mass_neg_inf: f64,
}

impl QuantizedDensity {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            pmf: vec![0.0; grid.n_bins()],
            mass_pos_inf: 0.0,
            mass_neg_inf: 0.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.pmf.iter().sum::<f64>() + self.mass_pos_inf + self.mass_neg_inf
    }

    /// Mass of the finite bin at LLR 0.
    pub fn mass_at_zero(&self) -> f64 {
        self.pmf[self.grid.n_mag()]
    }

    pub fn mean_finite(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.grid.value(i))
            .sum()
    }
}

/// Probability of a wrong hard decision: `P(L < 0) + P(L = 0)/2`, including `-∞`.
pub fn error_measure(d: &QuantizedDensity) -> f64 {
    let m = d.grid.n_mag();
    d.pmf[..m].iter().sum::<f64>() + 0.5 * d.pmf[m] + d.mass_neg_inf
}

/// Channel LLR density for the all-`+1` codeword.
pub fn bp_initial_density(ch: ChannelModel, grid: GridSpec) -> Result<QuantizedDensity> {
    grid.validate()?;
    let mut d = QuantizedDensity::zeros(grid);
    let m = grid.n_mag();
    match ch {
        ChannelModel::Bec(alpha) => {
            d.pmf[m] = alpha;
            d.mass_pos_inf = 1.0 - alpha;
        }
        ChannelModel::Bsc(p) => {
            if p == 0.0 {
                d.mass_pos_inf = 1.0;
            } else {
                let llr = ((1.0 - p) / p).ln();
                let too_narrow =
                    || Error::GridTooNarrow(format!("BSC({p}) LLR {llr:.4} beyond ±{}", grid.max));
                let hi = grid.bin(llr).ok_or_else(too_narrow)?;
                let lo = grid.bin(-llr).ok_or_else(too_narrow)?;
                d.pmf[hi] += 1.0 - p;
                d.pmf[lo] += p;
            }
        }
        ChannelModel::Biawgn(sigma) => {
            let mean = 2.0 / (sigma * sigma);
            if mean > grid.max {
                return Err(Error::GridTooNarrow(format!(
                    "BIAWGN({sigma}) LLR mean {mean:.3} beyond {}",
                    grid.max
                )));
            }
            let sd = 2.0 / sigma;
            // P(L > x), evaluated on whichever side of the mean keeps precision
            let upper = |x: f64| q_function((x - mean) / sd);
            let lower = |x: f64| q_function((mean - x) / sd);
            let h = grid.step / 2.0;
            for i in 0..grid.n_bins() {
                let x = grid.value(i);
                d.pmf[i] = if i == 0 {
                    lower(x + h)
                } else if i + 1 == grid.n_bins() {
                    upper(x - h)
                } else if x - h >= mean {
                    upper(x - h) - upper(x + h)
                } else {
                    lower(x + h) - lower(x - h)
                };
            }
        }
    }
    Ok(d)
}

/// Sign/magnitude split of a density: index `k ∈ 1..=M` is `|L| = k·step`,
/// index `M + 1` is `|L| = ∞`; index 0 is unused.
#[derive(Debug, Clone)]
struct MagDensity {
    pos: Vec<f64>,
    neg: Vec<f64>,
    zero: f64,
}

impl MagDensity {
    fn new(m: usize) -> Self {
        Self {
            pos: vec![0.0; m + 2],
            neg: vec![0.0; m + 2],
            zero: 0.0,
        }
    }

    fn from_signed(d: &QuantizedDensity) -> Self {
        let m = d.grid.n_mag();
        let mut out = Self::new(m);
        for k in 1..=m {
            out.pos[k] = d.pmf[m + k];
            out.neg[k] = d.pmf[m - k];
        }
        out.pos[m + 1] = d.mass_pos_inf;
        out.neg[m + 1] = d.mass_neg_inf;
        out.zero = d.pmf[m];
        out
    }

    fn to_signed(&self, grid: GridSpec) -> QuantizedDensity {
        let m = grid.n_mag();
        let mut d = QuantizedDensity::zeros(grid);
        for k in 1..=m {
            d.pmf[m + k] = self.pos[k];
            d.pmf[m - k] = self.neg[k];
        }
        d.pmf[m] = self.zero;
        d.mass_pos_inf = self.pos[m + 1];
        d.mass_neg_inf = self.neg[m + 1];
        d
    }

    fn add_scaled(&mut self, other: &MagDensity, w: f64) {
        for (a, b) in self.pos.iter_mut().zip(&other.pos) {
            *a += w * b;
        }
        for (a, b) in self.neg.iter_mut().zip(&other.neg) {
            *a += w * b;
        }
        self.zero += w * other.zero;
    }
}

/// `φ(x) = -ln tanh(x/2)`, an involution on `(0, ∞]` with `φ(∞) = 0`.
fn phi(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else if x == 0.0 {
        f64::INFINITY
    } else {
        (2.0 / x.exp_m1()).ln_1p()
    }
}

/// Quantized magnitudes of the check rule `|L₃| = φ(φ(|L₁|) + φ(|L₂|))`.
///
/// `T(k₁, k₂)` is symmetric, at most `min(k₁, k₂)` and non-decreasing in
/// each argument; for `k₂` far above `k₁` it equals `k₁`. Row `k₁` stores
/// `T(k₁, k₂)` for `k₂ ∈ [k₁, end(k₁))`, beyond which `T = k₁`.
#[derive(Debug, Clone)]
struct CheckTable {
    m: usize,
    start: Vec<usize>,
    end: Vec<usize>,
    values: Vec<u32>,
}

impl CheckTable {
    fn new(grid: GridSpec) -> Self {
        let m = grid.n_mag();
        let step = grid.step;
        let phis: Vec<f64> = (0..=m + 1)
            .map(|k| {
                if k == m + 1 {
                    0.0
                } else {
                    phi(k as f64 * step)
                }
            })
            .collect();
        let mut start = vec![0; m + 2];
        let mut end = vec![0; m + 2];
        let mut values = Vec::new();
        for k1 in 1..=m {
            start[k1] = values.len();
            let mut k2 = k1;
            loop {
                let t = ((phi(phis[k1] + phis[k2]) / step).round() as usize).min(k1);
                if t == k1 && k2 > k1 {
                    break;
                }
                values.push(t as u32);
                k2 += 1;
                if k2 > m {
                    break;
                }
            }
            end[k1] = k2;
        }
        Self {
            m,
            start,
            end,
            values,
        }
    }

    /// Distribution of the product of two independent messages.
    fn combine(&self, a: &MagDensity, b: &MagDensity, out: &mut MagDensity) {
        let m = self.m;
        let inf = m + 1;
        out.pos.iter_mut().for_each(|x| *x = 0.0);
        out.neg.iter_mut().for_each(|x| *x = 0.0);
        let tot_a: f64 = a.zero + a.pos.iter().sum::<f64>() + a.neg.iter().sum::<f64>();
        let tot_b: f64 = b.zero + b.pos.iter().sum::<f64>() + b.neg.iter().sum::<f64>();
        out.zero = a.zero * tot_b + (tot_a - a.zero) * b.zero;

        // suffix sums over k ≥ h, including ∞
        let suffix = |v: &[f64]| {
            let mut s = vec![0.0; v.len() + 1];
            for k in (0..v.len()).rev() {
                s[k] = s[k + 1] + v[k];
            }
            s
        };
        let (spa, sna, spb, snb) = (
            suffix(&a.pos),
            suffix(&a.neg),
            suffix(&b.pos),
            suffix(&b.neg),
        );

        for k1 in 1..=m {
            let (pa1, na1, pb1, nb1) = (a.pos[k1], a.neg[k1], b.pos[k1], b.neg[k1]);
            if pa1 == 0.0 && na1 == 0.0 && pb1 == 0.0 && nb1 == 0.0 {
                continue;
            }
            let row = &self.values[self.start[k1]..];
            // diagonal
            let t = row[0] as usize;
            let same = pa1 * pb1 + na1 * nb1;
            let opp = pa1 * nb1 + na1 * pb1;
            deposit(out, t, same, opp);
            let hi = self.end[k1];
            for k2 in k1 + 1..hi {
                let t = row[k2 - k1] as usize;
                let (pa2, na2, pb2, nb2) = (a.pos[k2], a.neg[k2], b.pos[k2], b.neg[k2]);
                let same = pa1 * pb2 + na1 * nb2 + pa2 * pb1 + na2 * nb1;
                let opp = pa1 * nb2 + na1 * pb2 + pa2 * nb1 + na2 * pb1;
                deposit(out, t, same, opp);
            }
            // tail k2 ∈ [hi, ∞]: output magnitude k1
            let h = hi.max(k1 + 1);
            out.pos[k1] += pa1 * spb[h] + na1 * snb[h] + pb1 * spa[h] + nb1 * sna[h];
            out.neg[k1] += pa1 * snb[h] + na1 * spb[h] + pb1 * sna[h] + nb1 * spa[h];
        }
        out.pos[inf] += a.pos[inf] * b.pos[inf] + a.neg[inf] * b.neg[inf];
        out.neg[inf] += a.pos[inf] * b.neg[inf] + a.neg[inf] * b.pos[inf];
    }
}

#[inline]
fn deposit(out: &mut MagDensity, t: usize, same: f64, opp: f64) {
    if t == 0 {
        out.zero += same + opp;
    } else {
        out.pos[t] += same;
        out.neg[t] += opp;
    }
}

/// Final state of a density-evolution run.
#[derive(Debug, Clone, PartialEq)]
pub struct BpOutcome {
    pub outcome: Outcome,
    /// Error measure of the variable-to-check density; index 0 is the channel.
    pub measures: Vec<f64>,
    pub density: QuantizedDensity,
}

/// Density evolution for belief propagation on a fixed grid.
///
/// The check node uses a precomputed quantized `φ` table in the sign/magnitude
/// domain; the variable node convolves on the LLR grid, directly for sparse
/// densities and by FFT otherwise, saturating overflow into the end bins.
pub struct BpEngine {
    grid: GridSpec,
    table: CheckTable,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    fft_len: usize,
}

impl BpEngine {
    pub fn new(grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let fft_len = (2 * grid.n_bins() - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        Ok(Self {
            grid,
            table: CheckTable::new(grid),
            fft: planner.plan_fft_forward(fft_len),
            ifft: planner.plan_fft_inverse(fft_len),
            fft_len,
        })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    fn check_grid(&self, d: &QuantizedDensity) -> Result<()> {
        if d.grid != self.grid {
            return Err(Error::InvalidParameter(format!(
                "density grid {:?} differs from engine grid {:?}",
                d.grid, self.grid
            )));
        }
        Ok(())
    }

    /// `Σ_k ρ_k · d^{⊛k}` under the check rule, `k` being the number of other sockets.
    fn check_transform(&self, d: &QuantizedDensity, ep: &EdgePerspective) -> MagDensity {
        let m = self.grid.n_mag();
        let base = MagDensity::from_signed(d);
        let terms: Vec<(usize, f64)> = ep.rho().terms().filter(|&(_, c)| c > 0.0).collect();
        let mut out = MagDensity::new(m);
        if let [(k, _)] = terms[..] {
            return self.check_power(&base, k);
        }
        let max_k = terms.last().map(|t| t.0).unwrap_or(0);
        let mut power = identity(m);
        let mut scratch = MagDensity::new(m);
        let mut next = 0;
        for k in 0..=max_k {
            if k > 0 {
                self.table.combine(&power, &base, &mut scratch);
                std::mem::swap(&mut power, &mut scratch);
            }
            if next < terms.len() && terms[next].0 == k {
                out.add_scaled(&power, terms[next].1);
                next += 1;
            }
        }
        out
    }

    /// `d^{⊛k}` by repeated squaring.
    fn check_power(&self, base: &MagDensity, k: usize) -> MagDensity {
        let m = self.grid.n_mag();
        let mut result: Option<MagDensity> = None;
        let mut sq = base.clone();
        let mut scratch = MagDensity::new(m);
        let mut e = k;
        loop {
            if e & 1 == 1 {
                result = Some(match result {
                    None => sq.clone(),
                    Some(r) => {
                        self.table.combine(&r, &sq, &mut scratch);
                        std::mem::replace(&mut scratch, r)
                    }
                });
            }
            e >>= 1;
            if e == 0 {
                break;
            }
            self.table.combine(&sq, &sq, &mut scratch);
            std::mem::swap(&mut sq, &mut scratch);
        }
        result.unwrap_or_else(|| identity(m))
    }

    /// Distribution of the sum of two independent LLRs.
    fn convolve(&self, a: &QuantizedDensity, b: &QuantizedDensity) -> QuantizedDensity {
        let grid = self.grid;
        let m = grid.n_mag();
        let n = grid.n_bins();
        let fin_a = 1.0 - a.mass_pos_inf - a.mass_neg_inf;
        let fin_b = 1.0 - b.mass_pos_inf - b.mass_neg_inf;
        let (ua, va, ub, vb) = (
            a.mass_pos_inf,
            a.mass_neg_inf,
            b.mass_pos_inf,
            b.mass_neg_inf,
        );
        let stay_pos = (1.0 - va) * (1.0 - vb);
        let stay_neg = (1.0 - ua) * (1.0 - ub);
        let finite = (1.0 - ua - va) * (1.0 - ub - vb);
        let mut out = QuantizedDensity::zeros(grid);
        out.mass_pos_inf = (stay_pos - finite).max(0.0);
        out.mass_neg_inf = (stay_neg - finite).max(0.0);
        let both_inf = (1.0 - stay_pos - stay_neg + finite).max(0.0);

        let nz = |v: &[f64]| -> Vec<usize> { (0..v.len()).filter(|&i| v[i] > 0.0).collect() };
        let (ia, ib) = (nz(&a.pmf), nz(&b.pmf));
        let mut full = vec![0.0; 2 * n - 1];
        if ia.is_empty() || ib.is_empty() {
            // no finite part on one side
        } else if ia.len() * ib.len() <= DIRECT_CONV_LIMIT {
            for &i in &ia {
                let x = a.pmf[i];
                for &j in &ib {
                    full[i + j] += x * b.pmf[j];
                }
            }
        } else {
            let lift = |v: &[f64]| {
                let mut buf = vec![Complex::new(0.0, 0.0); self.fft_len];
                for (c, &x) in buf.iter_mut().zip(v) {
                    c.re = x;
                }
                buf
            };
            let mut fa = lift(&a.pmf);
            let mut fb = lift(&b.pmf);
            self.fft.process(&mut fa);
            self.fft.process(&mut fb);
            for (x, y) in fa.iter_mut().zip(&fb) {
                *x *= *y;
            }
            self.ifft.process(&mut fa);
            let scale = 1.0 / self.fft_len as f64;
            for (f, c) in full.iter_mut().zip(&fa) {
                *f = (c.re * scale).max(0.0);
            }
        }
        // index i + j in `full` is LLR (i + j - 2M)·step; saturate into the end bins
        for (s, &x) in full.iter().enumerate() {
            let k = (s as isize - m as isize).clamp(0, n as isize - 1) as usize;
            out.pmf[k] += x;
        }
        let got: f64 = out.pmf.iter().sum();
        let want = fin_a.max(0.0) * fin_b.max(0.0);
        if got > 0.0 {
            let r = want / got;
            out.pmf.iter_mut().for_each(|x| *x *= r);
        }
        out.pmf[m] += both_inf;
        out
    }

    /// `ch ⊛ Σ_k λ_k c^{⊛k}` for a check-output density `c`.
    fn variable_transform(
        &self,
        c: &QuantizedDensity,
        ch: &QuantizedDensity,
        ep: &EdgePerspective,
    ) -> QuantizedDensity {
        let terms: Vec<(usize, f64)> = ep.lambda().terms().filter(|&(_, w)| w > 0.0).collect();
        let max_k = terms.last().map(|t| t.0).unwrap_or(0);
        let mut mix = QuantizedDensity::zeros(self.grid);
        let mut power = delta_zero(self.grid);
        let mut next = 0;
        for k in 0..=max_k {
            if k > 0 {
                power = self.convolve(&power, c);
            }
            if next < terms.len() && terms[next].0 == k {
                let w = terms[next].1;
                for (x, y) in mix.pmf.iter_mut().zip(&power.pmf) {
                    *x += w * y;
                }
                mix.mass_pos_inf += w * power.mass_pos_inf;
                mix.mass_neg_inf += w * power.mass_neg_inf;
                next += 1;
            }
        }
        self.convolve(ch, &mix)
    }

    /// One iteration: check transform of `d`, then the variable transform with `ch`.
    pub fn step(
        &self,
        d: &QuantizedDensity,
        ch: &QuantizedDensity,
        ep: &EdgePerspective,
    ) -> Result<QuantizedDensity> {
        self.check_grid(d)?;
        self.check_grid(ch)?;
        let c = self.check_transform(d, ep).to_signed(self.grid);
        Ok(self.variable_transform(&c, ch, ep))
    }

    /// Iterates from the channel density until convergence, stall or `max_iter`.
    pub fn run(
        &self,
        ch: &QuantizedDensity,
        ep: &EdgePerspective,
        max_iter: usize,
    ) -> Result<BpOutcome> {
        self.check_grid(ch)?;
        let mut d = ch.clone();
        let mut measures = vec![error_measure(ch)];
        let outcome = run_until(measures[0], max_iter, |_| {
            let c = self.check_transform(&d, ep).to_signed(self.grid);
            d = self.variable_transform(&c, ch, ep);
            let m = error_measure(&d);
            measures.push(m);
            m
        });
        Ok(BpOutcome {
            outcome,
            measures,
            density: d,
        })
    }

    /// Bisection threshold over `family` with tolerance `tol`.
    pub fn threshold(
        &self,
        family: ChannelFamily,
        ep: &EdgePerspective,
        max_iter: usize,
        tol: f64,
    ) -> Result<ThresholdResult> {
        let (lo, hi) = shannon_bracket(family, designed_rate(ep))?;
        let mut failure = None;
        let result = bisect_decreasing(lo, hi, tol, |param| {
            let run = family
                .with_param(param)
                .and_then(|ch| bp_initial_density(ch, self.grid))
                .and_then(|ch| self.run(&ch, ep, max_iter));
            match run {
                Ok(r) => (r.outcome.converged(), r.outcome.iterations()),
                Err(e) => {
                    failure.get_or_insert(e);
                    (false, 0)
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(result),
        }
    }
}

/// Search bracket from an always-good parameter to the Shannon limit at `rate`.
fn shannon_bracket(family: ChannelFamily, rate: f64) -> Result<(f64, f64)> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "designed rate {rate} not in (0,1)"
        )));
    }
    Ok(match family {
        ChannelFamily::Bec => (0.0, 1.0 - rate),
        ChannelFamily::Bsc => (0.0, inverse_entropy(1.0 - rate)?),
        ChannelFamily::Biawgn => {
            let (mut lo, mut hi) = (0.2, 5.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if capacity(ChannelModel::Biawgn(mid)) > rate {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (0.3, 0.5 * (lo + hi))
        }
    })
}

fn identity(m: usize) -> MagDensity {
    let mut d = MagDensity::new(m);
    d.pos[m + 1] = 1.0;
    d
}

fn delta_zero(grid: GridSpec) -> QuantizedDensity {
    let mut d = QuantizedDensity::zeros(grid);
    d.pmf[grid.n_mag()] = 1.0;
    d
}

/// One density-evolution iteration (builds a fresh [`BpEngine`]).
pub fn bp_de_step(
    d: &QuantizedDensity,
    ch: &QuantizedDensity,
    ep: &EdgePerspective,
) -> Result<QuantizedDensity> {
    BpEngine::new(d.grid)?.step(d, ch, ep)
}

/// BP threshold of `ep` over `family` on `grid`, bisected to [`BP_TOL`].
pub fn bp_threshold(
    family: ChannelFamily,
    ep: &EdgePerspective,
    grid: GridSpec,
    max_iter: usize,
) -> Result<ThresholdResult> {
    BpEngine::new(grid)?.threshold(family, ep, max_iter, BP_TOL)
}
