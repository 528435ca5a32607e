use super::ThresholdResult;
use crate::degree_dist::EdgePerspective;
use crate::error::{Error, Result};

const BEC_TOL: f64 = 1e-7;

/// `α · λ(1 - ρ(1 - x))`.
pub fn bec_de_step(x: f64, alpha: f64, ep: &EdgePerspective) -> f64 {
    alpha * ep.lambda().eval(ep.one_minus_rho_one_minus(x))
}

/// `[x_0, x_1, ..., x_ℓ]` with `x_0 = α`.
pub fn bec_iterate(alpha: f64, ep: &EdgePerspective, ell: usize) -> Vec<f64> {
    let mut xs = Vec::with_capacity(ell + 1);
    xs.push(alpha);
    for _ in 0..ell {
        let x = *xs.last().unwrap();
        xs.push(bec_de_step(x, alpha, ep));
    }
    xs
}

fn g(x: f64, ep: &EdgePerspective) -> f64 {
    let den = ep.lambda().eval(ep.one_minus_rho_one_minus(x));
    if den > 0.0 {
        x / den
    } else {
        f64::INFINITY
    }
}

/// `min_{x ∈ (0,1]} x / λ(1 - ρ(1 - x))`, including the limit at `0+`.
pub fn bec_threshold_value(ep: &EdgePerspective) -> f64 {
    let lam = ep.lambda();
    if lam.coeff(0) > 0.0 {
        return 0.0;
    }
    // g(0+) = 1 / (λ'(0) ρ'(1))
    let rho_prime = ep.rho().derivative().eval(1.0);
    let at_zero = if lam.coeff(1) > 0.0 && rho_prime > 0.0 {
        1.0 / (lam.coeff(1) * rho_prime)
    } else {
        f64::INFINITY
    };
    let mut grid: Vec<f64> = (0..2000)
        .map(|i| 10f64.powf(-12.0 + 10.0 * i as f64 / 2000.0))
        .collect();
    grid.extend((1..=10_000).map(|k| k as f64 / 10_000.0));
    let (best_k, _) = grid.iter().enumerate().map(|(k, &x)| (k, g(x, ep))).fold(
        (0, f64::INFINITY),
        |acc, (k, v)| if v < acc.1 { (k, v) } else { acc },
    );
    let lo = if best_k == 0 {
        grid[0] * 0.5
    } else {
        grid[best_k - 1]
    };
    let hi = grid.get(best_k + 1).copied().unwrap_or(1.0);
    let refined = golden_min(|x| g(x, ep), lo, hi, 1e-13);
    at_zero.min(refined)
}

/// Erasure threshold of an ensemble by minimizing `x / λ(1 - ρ(1 - x))`.
pub fn bec_threshold(ep: &EdgePerspective) -> ThresholdResult {
    let value = bec_threshold_value(ep);
    ThresholdResult {
        value,
        bracket: ((value - BEC_TOL / 2.0).max(0.0), value + BEC_TOL / 2.0),
        iterations_used: 0,
        tolerance: BEC_TOL,
    }
}

/// Minimum value of `f` on `[a, b]` by golden-section search (endpoints included).
fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let ends = f(a).min(f(b));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    ends.min(fc).min(fd)
}

/// Regular `(dv, dc)` threshold from the unique root `γ ∈ (0,1)` of
/// `((dv-1)(dc-1)-1) x^{dc-2} - Σ_{i=0}^{dc-3} x^i`.
pub fn bec_threshold_regular_closed_form(dv: usize, dc: usize) -> Result<f64> {
    if dv < 3 {
        return Err(Error::InvalidParameter(format!(
            "dv = {dv}: the closed form needs dv ≥ 3 (the threshold is 0 for dv = 2)"
        )));
    }
    if dc < 3 {
        return Err(Error::InvalidParameter(format!(
            "dc = {dc} must be at least 3"
        )));
    }
    let lead = ((dv - 1) * (dc - 1) - 1) as f64;
    let p =
        |x: f64| lead * x.powi(dc as i32 - 2) - (0..dc - 2).map(|i| x.powi(i as i32)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let gamma = 0.5 * (lo + hi);
    Ok((1.0 - gamma) / (1.0 - gamma.powi(dc as i32 - 1)).powi(dv as i32 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn step_examples() {
        let ep = EdgePerspective::regular(3, 6).unwrap();
        close(
            bec_de_step(0.5, 0.5, &ep),
            0.5 * (1.0 - 0.5f64.powi(5)).powi(2),
            1e-15,
        );
        close(bec_de_step(0.5, 0.5, &ep), 0.46924, 1e-5);
        assert_eq!(bec_de_step(0.0, 0.5, &ep), 0.0);
        assert_eq!(bec_de_step(0.7, 0.0, &ep), 0.0);
    }

    #[test]
    fn regular_thresholds() {
        // (3,5) is 0.51757; the often-quoted 0.5406 does not satisfy the closed form
        for (dv, dc, want) in [(3, 4, 0.6474), (3, 5, 0.5176), (3, 6, 0.4294)] {
            let ep = EdgePerspective::regular(dv, dc).unwrap();
            let t = bec_threshold(&ep).value;
            let cf = bec_threshold_regular_closed_form(dv, dc).unwrap();
            close(t, cf, 1e-6);
            close(t, want, 5e-4);
        }
    }

    #[test]
    fn closed_form_by_hand() {
        let gamma = (1.0 + 21f64.sqrt()) / 10.0;
        let by_hand = (1.0 - gamma) / (1.0 - gamma.powi(3)).powi(2);
        close(
            bec_threshold_regular_closed_form(3, 4).unwrap(),
            by_hand,
            1e-12,
        );
        close(by_hand, 0.6474, 1e-4);
        assert!(bec_threshold_regular_closed_form(2, 4).is_err());
    }

    #[test]
    fn degree_two_and_one() {
        // λ = x: g(0+) = 1/ρ'(1)
        let ep = EdgePerspective::regular(2, 6).unwrap();
        close(bec_threshold_value(&ep), 0.2, 1e-9);
        let ep = EdgePerspective::normalized(vec![0.1, 0.9], vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(bec_threshold_value(&ep), 0.0);
    }
}
