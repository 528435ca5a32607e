//! Degree-distribution algebra.
//!
//! Distributions are kept as dense polynomials. In the node perspective the
//! coefficient of `x^i` counts the nodes of degree `i`. In the edge perspective
//! the coefficient of `x^(i-1)` is the fraction of edges attached to nodes of
//! degree `i`, so index 0 of `lambda` belongs to degree-1 variable nodes.

use serde::{Deserialize, Serialize};

use crate::channels::binary_entropy;
use crate::error::{Error, Result};

/// Largest polynomial degree accepted anywhere in the crate.
pub const MAX_DEGREE: usize = 10_000;

/// Normalization tolerance for edge-perspective distributions.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Tail mass below which the Poisson series of the Tornado check distribution is cut.
pub const TORNADO_TAIL_MASS: f64 = 1e-12;

/// Anything that can be evaluated on `[0, 1]`: truncated polynomials as well
/// as the closed-form series the capacity recipes are built from.
pub trait Series {
    fn eval(&self, x: f64) -> f64;
}

/// Polynomial with non-negative coefficients, index = power of `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "coefficient {c} is negative or not finite"
            )));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.len() > MAX_DEGREE + 1 {
            return Err(Error::InvalidDistribution(format!(
                "degree {} exceeds the cap of {MAX_DEGREE}",
                coeffs.len() - 1
            )));
        }
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// `c * x^power`.
    pub fn monomial(power: usize, c: f64) -> Result<Self> {
        let mut coeffs = vec![0.0; power + 1];
        coeffs[power] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> f64 {
        self.coeffs.get(power).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the polynomial; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Iterator over `(power, coefficient)` pairs with non-zero coefficient.
    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, c)| c != 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        Polynomial::new(coeffs).expect("derivative of a valid polynomial")
    }

    /// `∫_0^x p(z) dz`.
    pub fn integral_to(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * x + c / (i + 1) as f64;
        }
        acc * x
    }

    /// The antiderivative vanishing at 0, as a polynomial.
    pub fn antiderivative(&self) -> Polynomial {
        let mut coeffs = vec![0.0; self.coeffs.len() + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            coeffs[i + 1] = c / (i + 1) as f64;
        }
        Polynomial::new(coeffs).expect("antiderivative of a valid polynomial")
    }

    pub fn scaled(&self, factor: f64) -> Result<Polynomial> {
        Polynomial::new(self.coeffs.iter().map(|c| c * factor).collect())
    }
}

impl Series for Polynomial {
    fn eval(&self, x: f64) -> f64 {
        Polynomial::eval(self, x)
    }
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Polynomial::new(v)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

/// Node-perspective pair `(Λ, P)`: integer node counts per degree.
#[derive(Debug, Clone, PartialEq)]
pub struct NodePerspective {
    lambda_node: Polynomial,
    p_node: Polynomial,
}

impl NodePerspective {
    pub fn new(lambda_node: Polynomial, p_node: Polynomial) -> Result<Self> {
        for (name, p) in [("Λ", &lambda_node), ("P", &p_node)] {
            if let Some((i, c)) = p.terms().find(|(_, c)| c.fract() != 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "{name}_{i} = {c} is not an integer node count"
                )));
            }
        }
        let ev = lambda_node.derivative().eval(1.0);
        let ec = p_node.derivative().eval(1.0);
        if ev != ec {
            return Err(Error::InvalidDistribution(format!(
                "edge counts differ: Λ'(1) = {ev}, P'(1) = {ec}"
            )));
        }
        Ok(Self {
            lambda_node,
            p_node,
        })
    }

    /// `Λ(x) = n x^dv`, `P(x) = (n dv / dc) x^dc`.
    pub fn regular(n: usize, dv: usize, dc: usize) -> Result<Self> {
        if dv == 0 || dc == 0 {
            return Err(Error::InvalidParameter("degrees must be positive".into()));
        }
        if !(n * dv).is_multiple_of(dc) {
            return Err(Error::InvalidParameter(format!(
                "n·dv = {} is not divisible by dc = {dc}",
                n * dv
            )));
        }
        Self::new(
            Polynomial::monomial(dv, n as f64)?,
            Polynomial::monomial(dc, (n * dv / dc) as f64)?,
        )
    }

    pub fn lambda_node(&self) -> &Polynomial {
        &self.lambda_node
    }

    pub fn p_node(&self) -> &Polynomial {
        &self.p_node
    }

    pub fn n_var(&self) -> usize {
        self.lambda_node.eval(1.0) as usize
    }

    pub fn n_chk(&self) -> usize {
        self.p_node.eval(1.0) as usize
    }

    pub fn n_edges(&self) -> usize {
        self.lambda_node.derivative().eval(1.0) as usize
    }

    /// `1 - P(1)/Λ(1)`.
    pub fn designed_rate(&self) -> f64 {
        1.0 - self.p_node.eval(1.0) / self.lambda_node.eval(1.0)
    }

    /// Node degrees in index order: all nodes of the smallest degree first.
    pub fn var_degree_sequence(&self) -> Vec<usize> {
        degree_sequence(&self.lambda_node)
    }

    pub fn chk_degree_sequence(&self) -> Vec<usize> {
        degree_sequence(&self.p_node)
    }
}

fn degree_sequence(p: &Polynomial) -> Vec<usize> {
    p.terms()
        .flat_map(|(deg, count)| std::iter::repeat_n(deg, count as usize))
        .collect()
}

/// Edge-perspective pair `(λ, ρ)`, both normalized to 1 at `x = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgePerspective {
    lambda: Polynomial,
    rho: Polynomial,
}

impl EdgePerspective {
    pub fn new(lambda: Polynomial, rho: Polynomial) -> Result<Self> {
        for (name, p) in [("λ", &lambda), ("ρ", &rho)] {
            let total = p.eval(1.0);
            if (total - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "{name}(1) = {total}, expected 1"
                )));
            }
        }
        Ok(Self { lambda, rho })
    }

    /// Builds a pair from arbitrary non-negative weights, normalizing both sides.
    pub fn normalized(lambda: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        let lambda = Polynomial::new(lambda)?;
        let rho = Polynomial::new(rho)?;
        let (sl, sr) = (lambda.eval(1.0), rho.eval(1.0));
        if sl <= 0.0 || sr <= 0.0 {
            return Err(Error::InvalidDistribution("empty distribution".into()));
        }
        Self::new(lambda.scaled(1.0 / sl)?, rho.scaled(1.0 / sr)?)
    }

    /// `λ(x) = x^(dv-1)`, `ρ(x) = x^(dc-1)`.
    pub fn regular(dv: usize, dc: usize) -> Result<Self> {
        if dv == 0 || dc == 0 {
            return Err(Error::InvalidParameter("degrees must be positive".into()));
        }
        Self::new(
            Polynomial::monomial(dv - 1, 1.0)?,
            Polynomial::monomial(dc - 1, 1.0)?,
        )
    }

    pub fn lambda(&self) -> &Polynomial {
        &self.lambda
    }

    pub fn rho(&self) -> &Polynomial {
        &self.rho
    }

    /// `(degree, fraction of edges)` pairs on the variable side.
    pub fn var_degrees(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.lambda.terms().map(|(i, c)| (i + 1, c))
    }

    pub fn chk_degrees(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rho.terms().map(|(i, c)| (i + 1, c))
    }

    pub fn max_var_degree(&self) -> usize {
        self.lambda.degree().map_or(0, |d| d + 1)
    }

    pub fn max_chk_degree(&self) -> usize {
        self.rho.degree().map_or(0, |d| d + 1)
    }

    /// If both sides are point masses, the regular pair `(dv, dc)`.
    pub fn as_regular(&self) -> Option<(usize, usize)> {
        let single = |p: &Polynomial| {
            let mut t = p.terms();
            match (t.next(), t.next()) {
                (Some((i, _)), None) => Some(i + 1),
                _ => None,
            }
        };
        Some((single(&self.lambda)?, single(&self.rho)?))
    }

    /// `1 - ρ(1-x)`, evaluated without cancellation for small `x`.
    pub fn one_minus_rho_one_minus(&self, x: f64) -> f64 {
        one_minus_poly_one_minus(&self.rho, x)
    }
}

/// `Σ c_i (1 - (1-x)^i)`, which equals `p(1) - p(1-x)` computed stably.
pub(crate) fn one_minus_poly_one_minus(p: &Polynomial, x: f64) -> f64 {
    let l = (-x).ln_1p();
    p.terms()
        .map(|(i, c)| {
            if i == 0 {
                0.0
            } else if x >= 1.0 {
                c
            } else {
                -c * (i as f64 * l).exp_m1()
            }
        })
        .sum()
}

/// `λ(x) = Λ'(x)/Λ'(1)`, `ρ(x) = P'(x)/P'(1)`.
pub fn node_to_edge(np: &NodePerspective) -> Result<EdgePerspective> {
    let dl = np.lambda_node.derivative();
    let dp = np.p_node.derivative();
    let edges = dl.eval(1.0);
    if edges <= 0.0 {
        return Err(Error::InvalidDistribution("zero edge count".into()));
    }
    EdgePerspective::new(dl.scaled(1.0 / edges)?, dp.scaled(1.0 / edges)?)
}

/// Inverse map: node counts for a block length `n`.
///
/// Counts are rounded to the nearest integer. Any resulting edge imbalance is
/// absorbed on the check side: nodes of the highest occupied check degree are
/// removed while check sockets are in excess, then nodes of the highest degree
/// `D` are added until the surplus of variable sockets lies in `[0, D)`, and
/// the remainder is given to one degree-`D` check node.
pub fn edge_to_node(n: usize, ep: &EdgePerspective) -> Result<NodePerspective> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let int_l = ep.lambda.integral_to(1.0);
    let node_count = |p: &Polynomial| -> Vec<f64> {
        let mut out = vec![0.0; p.coeffs.len() + 1];
        for (i, c) in p.terms() {
            let deg = i + 1;
            out[deg] = (n as f64 * c / deg as f64 / int_l).round();
        }
        out
    };
    let lam = node_count(&ep.lambda);
    let mut chk = node_count(&ep.rho);
    let sockets = |v: &[f64]| -> i64 {
        v.iter()
            .enumerate()
            .map(|(d, &c)| d as i64 * c as i64)
            .sum()
    };
    let ev = sockets(&lam);
    let highest = |chk: &[f64]| {
        chk.iter()
            .rposition(|&c| c > 0.0)
            .ok_or_else(|| Error::InvalidDistribution("no check nodes after rounding".into()))
    };
    let mut surplus = ev - sockets(&chk);
    while surplus < 0 {
        let t = highest(&chk)?;
        chk[t] -= 1.0;
        surplus += t as i64;
    }
    let top = highest(&chk)?;
    let d = top as i64;
    while surplus >= d {
        chk[top] += 1.0;
        surplus -= d;
    }
    if surplus > 0 {
        if chk[top] < 1.0 {
            return Err(Error::InvalidDistribution(
                "cannot balance edge counts at this block length".into(),
            ));
        }
        chk[top] -= 1.0;
        let new_deg = top + surplus as usize;
        if chk.len() <= new_deg {
            chk.resize(new_deg + 1, 0.0);
        }
        chk[new_deg] += 1.0;
    }
    if chk.iter().any(|&c| c < 0.0) {
        return Err(Error::InvalidDistribution(
            "cannot balance edge counts at this block length".into(),
        ));
    }
    NodePerspective::new(Polynomial::new(lam)?, Polynomial::new(chk)?)
}

/// `1 - ∫ρ / ∫λ`.
pub fn designed_rate(ep: &EdgePerspective) -> f64 {
    1.0 - ep.rho.integral_to(1.0) / ep.lambda.integral_to(1.0)
}

/// `H(m) = Σ_{i=1}^m 1/i`.
pub fn harmonic(m: usize) -> f64 {
    (1..=m).map(|i| 1.0 / i as f64).sum()
}

/// A capacity-approaching pair together with the unnormalized `λ̂` it was built from.
#[derive(Debug, Clone)]
pub struct CapacityPair {
    pub edge: EdgePerspective,
    /// Truncated `λ̂^(N)`, whose value at 1 is the guaranteed threshold.
    pub lambda_hat: Polynomial,
    pub theta: f64,
    /// `λ̂^(N)(1)`: a lower bound on the BEC threshold of `edge`.
    pub threshold_bound: f64,
}

/// Heavy-tail Poisson ("Tornado") pair designed for erasure probability `alpha`.
pub fn tornado_pair(n_terms: usize, alpha: f64) -> Result<CapacityPair> {
    if n_terms < 2 {
        return Err(Error::InvalidParameter("N must be at least 2".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} not in (0,1)"
        )));
    }
    let h = harmonic(n_terms - 1);
    let theta = h / alpha;
    let mut hat = vec![0.0; n_terms];
    for (i, c) in hat.iter_mut().enumerate().skip(1) {
        *c = 1.0 / (theta * i as f64);
    }
    let lambda_hat = Polynomial::new(hat)?;
    let lambda = lambda_hat.scaled(1.0 / lambda_hat.eval(1.0))?;

    // Poisson(θ) weights; stop once the omitted tail is negligible.
    let mut rho = Vec::new();
    let mut acc = 0.0;
    let ln_theta = theta.ln();
    for i in 0..=MAX_DEGREE {
        let ln_term = -theta + i as f64 * ln_theta - libm::lgamma(i as f64 + 1.0);
        let term = ln_term.exp();
        rho.push(term);
        acc += term;
        if 1.0 - acc < TORNADO_TAIL_MASS && i as f64 > theta {
            break;
        }
    }
    let rho = Polynomial::new(rho)?;
    let rho = rho.scaled(1.0 / rho.eval(1.0))?;
    Ok(CapacityPair {
        edge: EdgePerspective::new(lambda, rho)?,
        threshold_bound: lambda_hat.eval(1.0),
        lambda_hat,
        theta,
    })
}

/// Check-concentrated pair: `λ̂` is the truncated series of `1-(1-x)^θ` and `ρ(x) = x^(1/θ)`.
pub fn check_concentrated_pair(n_terms: usize, theta: f64) -> Result<CapacityPair> {
    if n_terms < 2 {
        return Err(Error::InvalidParameter("N must be at least 2".into()));
    }
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "theta = {theta} not in (0,1]"
        )));
    }
    let inv = 1.0 / theta;
    if (inv - inv.round()).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "1/theta = {inv} is not an integer"
        )));
    }
    let inv = inv.round() as usize;
    // c_1 = θ, c_{i+1} = c_i (i - θ)/(i + 1)
    let mut hat = vec![0.0; n_terms];
    let mut c = theta;
    for (i, slot) in hat.iter_mut().enumerate().skip(1) {
        *slot = c;
        c *= (i as f64 - theta) / (i as f64 + 1.0);
    }
    let lambda_hat = Polynomial::new(hat)?;
    let lambda = lambda_hat.scaled(1.0 / lambda_hat.eval(1.0))?;
    let rho = Polynomial::monomial(inv, 1.0)?;
    Ok(CapacityPair {
        edge: EdgePerspective::new(lambda, rho)?,
        threshold_bound: lambda_hat.eval(1.0),
        lambda_hat,
        theta,
    })
}

/// Parameter choice for a target erasure probability and rate gap:
/// `N = ⌈1/ε⌉` and `1/θ = ⌈ln N / -ln(1-α)⌉`.
pub fn check_concentrated_for(alpha: f64, epsilon: f64) -> Result<CapacityPair> {
    if !(alpha > 0.0 && alpha < 1.0) || !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(
            "alpha and epsilon must lie in (0,1)".into(),
        ));
    }
    let n_terms = ((1.0 / epsilon).ceil() as usize).max(2);
    let inv = ((n_terms as f64).ln() / -(-alpha).ln_1p()).ceil().max(1.0);
    check_concentrated_pair(n_terms, 1.0 / inv)
}

/// The untruncated series used by the capacity recipes.
#[derive(Debug, Clone, Copy)]
pub enum ClosedForm {
    /// `-ln(1-x)/θ`
    TornadoLambdaHat { theta: f64 },
    /// `e^{θ(x-1)}`
    TornadoRho { theta: f64 },
    /// `1-(1-x)^θ`
    CheckConcentratedLambdaHat { theta: f64 },
    /// `x^(1/θ)`
    CheckConcentratedRho { theta: f64 },
}

impl Series for ClosedForm {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            ClosedForm::TornadoLambdaHat { theta } => -(-x).ln_1p() / theta,
            ClosedForm::TornadoRho { theta } => (theta * (x - 1.0)).exp(),
            ClosedForm::CheckConcentratedLambdaHat { theta } => -(theta * (-x).ln_1p()).exp_m1(),
            ClosedForm::CheckConcentratedRho { theta } => x.powf(1.0 / theta),
        }
    }
}

/// `λ̂(1 - ρ(1-x)) - x`.
pub fn recipe_residual<L: Series + ?Sized, R: Series + ?Sized>(
    lambda_hat: &L,
    rho: &R,
    x: f64,
) -> f64 {
    lambda_hat.eval(1.0 - rho.eval(1.0 - x)) - x
}

/// Gallager's upper bound `1 - H(p)/H(p_dc)` on the rate of codes with check degree `dc`.
pub fn gallager_rate_bound(p: f64, dc: usize) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::InvalidParameter(format!("p = {p} not in (0, 1/2)")));
    }
    if dc < 2 {
        return Err(Error::InvalidParameter("dc must be at least 2".into()));
    }
    let p_dc = (1.0 + (1.0 - 2.0 * p).powi(dc as i32)) / 2.0;
    Ok(1.0 - binary_entropy(p) / binary_entropy(p_dc.min(1.0 - p_dc)))
}

/// On-disk representation of a degree pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreePairFile {
    pub perspective: Perspective,
    pub lambda: Vec<f64>,
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perspective {
    Edge,
    Node,
}

impl DegreePairFile {
    pub fn from_edge(ep: &EdgePerspective) -> Self {
        Self {
            perspective: Perspective::Edge,
            lambda: ep.lambda.coeffs.clone(),
            rho: ep.rho.coeffs.clone(),
        }
    }

    pub fn from_node(np: &NodePerspective) -> Self {
        Self {
            perspective: Perspective::Node,
            lambda: np.lambda_node.coeffs.clone(),
            rho: np.p_node.coeffs.clone(),
        }
    }

    /// Edge-perspective view; node files are converted with [`node_to_edge`].
    pub fn to_edge(&self) -> Result<EdgePerspective> {
        match self.perspective {
            Perspective::Edge => EdgePerspective::new(
                Polynomial::new(self.lambda.clone())?,
                Polynomial::new(self.rho.clone())?,
            ),
            Perspective::Node => node_to_edge(&self.to_node()?),
        }
    }

    pub fn to_node(&self) -> Result<NodePerspective> {
        match self.perspective {
            Perspective::Node => NodePerspective::new(
                Polynomial::new(self.lambda.clone())?,
                Polynomial::new(self.rho.clone())?,
            ),
            Perspective::Edge => Err(Error::InvalidDistribution(
                "edge-perspective file needs a block length to become node counts".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn polynomial_is_canonical() {
        let p = Polynomial::new(vec![1.0, 0.0, 2.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.coeffs(), &[1.0, 0.0, 2.0]);
        assert_eq!(p.degree(), Some(2));
        assert!(Polynomial::new(vec![0.0, 0.0]).unwrap().is_zero());
        assert!(Polynomial::new(vec![1.0, -0.5]).is_err());
        assert!(Polynomial::new(vec![f64::NAN]).is_err());
        assert!(Polynomial::monomial(MAX_DEGREE + 1, 1.0).is_err());
    }

    #[test]
    fn integral_matches_antiderivative() {
        let p = Polynomial::new(vec![0.5, 0.0, 3.0, 1.0]).unwrap();
        let a = p.antiderivative();
        for x in [0.0, 0.3, 1.0] {
            close(p.integral_to(x), a.eval(x), 1e-15);
        }
        close(p.integral_to(1.0), 0.5 + 1.0 + 0.25, 1e-15);
    }

    #[test]
    fn regular_node_to_edge() {
        let np = NodePerspective::regular(1000, 3, 6).unwrap();
        let ep = node_to_edge(&np).unwrap();
        assert_eq!(ep, EdgePerspective::regular(3, 6).unwrap());
    }

    #[test]
    fn irregular_node_to_edge_by_hand() {
        // Λ = 2x² + 2x³ balanced by P = 2x⁵
        let np = NodePerspective::new(
            Polynomial::new(vec![0.0, 0.0, 2.0, 2.0]).unwrap(),
            Polynomial::monomial(5, 2.0).unwrap(),
        )
        .unwrap();
        let ep = node_to_edge(&np).unwrap();
        close(ep.lambda().coeff(1), 0.4, 1e-15);
        close(ep.lambda().coeff(2), 0.6, 1e-15);
    }

    #[test]
    fn single_node_edge_view() {
        let np = NodePerspective::new(
            Polynomial::monomial(2, 1.0).unwrap(),
            Polynomial::monomial(2, 1.0).unwrap(),
        )
        .unwrap();
        let ep = node_to_edge(&np).unwrap();
        assert_eq!(ep.lambda().coeffs(), &[0.0, 1.0]);
    }

    #[test]
    fn node_to_edge_rejects_empty_graph() {
        let np = NodePerspective::new(
            Polynomial::monomial(0, 3.0).unwrap(),
            Polynomial::monomial(0, 1.0).unwrap(),
        )
        .unwrap();
        assert!(matches!(
            node_to_edge(&np),
            Err(Error::InvalidDistribution(_))
        ));
    }

    #[test]
    fn node_perspective_checks_balance() {
        let bad = NodePerspective::new(
            Polynomial::monomial(3, 4.0).unwrap(),
            Polynomial::monomial(6, 1.0).unwrap(),
        );
        assert!(bad.is_err());
        assert!(NodePerspective::regular(5, 3, 6).is_err());
    }

    #[test]
    fn edge_to_node_regular_round_trip() {
        let ep = EdgePerspective::regular(3, 6).unwrap();
        let np = edge_to_node(6, &ep).unwrap();
        assert_eq!(np.lambda_node().coeffs(), &[0.0, 0.0, 0.0, 6.0]);
        assert_eq!(np.p_node().coeffs(), &[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.0]);
        assert_eq!(node_to_edge(&np).unwrap(), ep);
    }

    #[test]
    fn edge_to_node_rounds_and_repairs() {
        // ∫λ = 0.2 + 0.2 = 0.4; Λ_2 = 10·0.4/2/0.4 = 5, Λ_3 = 10·0.6/3/0.4 = 5 → 25 edges.
        // P_4 = 10·1/4/0.4 = 6.25 → 6 (24 sockets); the spare socket goes to one check: 5x⁴ + x⁵.
        let ep =
            EdgePerspective::normalized(vec![0.0, 0.4, 0.6], vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let np = edge_to_node(10, &ep).unwrap();
        assert_eq!(np.lambda_node().coeffs(), &[0.0, 0.0, 5.0, 5.0]);
        assert_eq!(np.p_node().coeffs(), &[0.0, 0.0, 0.0, 0.0, 5.0, 1.0]);
        assert_eq!(np.n_edges(), 25);
    }

    #[test]
    fn designed_rates() {
        close(
            designed_rate(&EdgePerspective::regular(3, 6).unwrap()),
            0.5,
            1e-15,
        );
        close(
            designed_rate(&EdgePerspective::regular(3, 4).unwrap()),
            0.25,
            1e-15,
        );
        let ep = EdgePerspective::new(
            Polynomial::new(vec![0.0, 0.3, 0.7]).unwrap(),
            Polynomial::new(vec![0.0, 0.3, 0.7]).unwrap(),
        )
        .unwrap();
        close(designed_rate(&ep), 0.0, 1e-15);
    }

    #[test]
    fn tornado_small_case() {
        let cp = tornado_pair(3, 0.5).unwrap();
        close(cp.theta, 3.0, 1e-15);
        close(cp.edge.lambda().coeff(1), 2.0 / 3.0, 1e-15);
        close(cp.edge.lambda().coeff(2), 1.0 / 3.0, 1e-15);
        close(cp.lambda_hat.integral_to(1.0), 2.0 / 9.0, 1e-15);
        close(cp.threshold_bound, 0.5, 1e-15);
        let expected = 1.0 - ((1.0 - (-3.0f64).exp()) / 3.0) / (4.0 / 9.0);
        close(designed_rate(&cp.edge), expected, 1e-10);
        close(designed_rate(&cp.edge), 0.287, 1e-3);
    }

    #[test]
    fn tornado_rate_ratio_closed_form() {
        let n = 100;
        let theta = harmonic(n - 1) / 0.5;
        assert!((1.0 - (-theta).exp()) * (1.0 - 1.0 / n as f64) > 0.98);
        // ∫λ̂ = (N-1)/(θN) and ∫ρ = (1-e^{-θ})/θ, so the quotient is (1-e^{-θ})·N/(N-1).
        let cp = tornado_pair(n, 0.5).unwrap();
        let measured = cp.edge.rho().integral_to(1.0) / cp.lambda_hat.integral_to(1.0);
        close(
            measured,
            (1.0 - (-theta).exp()) / (1.0 - 1.0 / n as f64),
            1e-9,
        );
        close(
            cp.lambda_hat.integral_to(1.0),
            (n - 1) as f64 / (theta * n as f64),
            1e-14,
        );
    }

    #[test]
    fn check_concentrated_half() {
        let cp = check_concentrated_pair(3, 0.5).unwrap();
        assert_eq!(cp.lambda_hat.coeffs(), &[0.0, 0.5, 0.125]);
        close(cp.edge.lambda().coeff(1), 0.8, 1e-15);
        close(cp.edge.lambda().coeff(2), 0.2, 1e-15);
        close(cp.threshold_bound, 0.625, 1e-15);
        assert_eq!(cp.edge.rho().coeffs(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn check_concentrated_degenerate() {
        let cp = check_concentrated_pair(5, 1.0).unwrap();
        assert_eq!(cp.edge.lambda().coeffs(), &[0.0, 1.0]);
        assert_eq!(cp.edge.rho().coeffs(), &[0.0, 1.0]);
        close(designed_rate(&cp.edge), 0.0, 1e-15);
    }

    #[test]
    fn check_concentrated_rejects_non_integer_inverse() {
        assert!(matches!(
            check_concentrated_pair(5, 0.3),
            Err(Error::InvalidParameter(_))
        ));
        for inv in 1..12 {
            let cp = check_concentrated_pair(20, 1.0 / inv as f64).unwrap();
            assert_eq!(cp.edge.rho().eval(1.0), 1.0);
        }
    }

    #[test]
    fn residual_exact_for_untruncated_series() {
        let theta = 0.5;
        let lh = ClosedForm::CheckConcentratedLambdaHat { theta };
        let rho = ClosedForm::CheckConcentratedRho { theta };
        close(recipe_residual(&lh, &rho, 0.3), 0.0, 1e-12);
        let lh = ClosedForm::TornadoLambdaHat { theta: 4.0 };
        let rho = ClosedForm::TornadoRho { theta: 4.0 };
        close(recipe_residual(&lh, &rho, 0.3), 0.0, 1e-12);
    }

    #[test]
    fn residual_vanishes_at_zero() {
        let cp = tornado_pair(10, 0.5).unwrap();
        close(
            recipe_residual(&cp.lambda_hat, cp.edge.rho(), 0.0),
            0.0,
            1e-15,
        );
    }

    #[test]
    fn rate_bound_examples() {
        let b = gallager_rate_bound(0.11, 6).unwrap();
        let p6 = (1.0 + 0.78f64.powi(6)) / 2.0;
        let expected = 1.0 - binary_entropy(0.11) / binary_entropy(1.0 - p6);
        close(b, expected, 1e-14);
        close(b, 0.481, 1e-3);
        assert!(b < 0.5);
        // H(p)/H(dc·p) → 1/dc as p → 0, so the bound tends to 1 - 1/dc.
        close(gallager_rate_bound(1e-12, 6).unwrap(), 5.0 / 6.0, 0.02);
        assert!(gallager_rate_bound(1e-12, 6).unwrap() > gallager_rate_bound(1e-6, 6).unwrap());
        let shannon = 1.0 - binary_entropy(0.11);
        close(gallager_rate_bound(0.11, 400).unwrap(), shannon, 1e-9);
        assert!(gallager_rate_bound(0.6, 6).is_err());
    }

    #[test]
    fn degree_pair_file_round_trip() {
        let ep = tornado_pair(6, 0.4).unwrap().edge;
        let json = serde_json::to_string(&DegreePairFile::from_edge(&ep)).unwrap();
        assert!(json.contains("\"perspective\":\"edge\""));
        let back: DegreePairFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_edge().unwrap(), ep);

        let np = NodePerspective::regular(12, 3, 6).unwrap();
        let f = DegreePairFile::from_node(&np);
        assert_eq!(f.to_node().unwrap(), np);
        assert_eq!(
            f.to_edge().unwrap(),
            EdgePerspective::regular(3, 6).unwrap()
        );
    }
}
