//! Gauss-Hermite and Gauss-Legendre nodes and weights, computed by Newton
//! iteration on the orthonormal three-term recurrences (no eigensolver).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

type GaussRule = Arc<(Vec<f64>, Vec<f64>)>;

/// Memoized Gauss-Hermite rule; node computation costs ~1ms at high orders
/// and the oracle asks for the same orders thousands of times.
pub(crate) fn hermite_cached(n: usize) -> Result<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, GaussRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(rule) = guard.get(&n) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(gauss_hermite_nodes(n)?);
    guard.insert(n, rule.clone());
    Ok(rule)
}

/// Orthonormal Hermite value and the value one order below at `x`.
///
/// Uses the orthonormal recurrence so n up to 200 stays in range.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 0.0;
    let mut p = std::f64::consts::PI.powf(-0.25);
    for k in 0..n {
        let kf = k as f64;
        let p_next = x * (2.0 / (kf + 1.0)).sqrt() * p - (kf / (kf + 1.0)).sqrt() * p_prev;
        p_prev = p;
        p = p_next;
    }
    (p, p_prev)
}

/// Nodes and weights for n-point Gauss-Hermite quadrature with weight
/// `exp(-t^2)`: `integral f(t) exp(-t^2) dt ~= sum w_i f(t_i)`.
///
/// Positive roots are bracketed by a sign scan over [0, sqrt(2n+1)],
/// refined by bisection plus a few Newton steps, then mirrored; the weights
/// sum to sqrt(pi) and nodes are symmetric about 0 by construction.
pub fn gauss_hermite_nodes(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > 200 {
        return Err(Error::Domain(format!(
            "gauss-hermite order {n} outside 1..=200"
        )));
    }
    let nf = n as f64;
    let upper = (2.0 * nf + 1.0).sqrt() + 0.5;
    let n_positive = n / 2;

    // All positive roots lie strictly inside (lo, upper) where lo excludes a
    // possible root at 0. The scan grid is much finer than the ~pi/sqrt(2n)
    // minimum root spacing, so every root gets its own bracket.
    let lo = 1e-9;
    let grid = 16 * n.max(8);
    let mut positive: Vec<(f64, f64)> = Vec::with_capacity(n_positive);
    let mut prev_x = lo;
    let mut prev_sign = hermite_pair(n, lo).0.signum();
    for g in 1..=grid {
        let x = lo + (upper - lo) * g as f64 / grid as f64;
        let sign = hermite_pair(n, x).0.signum();
        if sign != prev_sign {
            let (mut a, mut b) = (prev_x, x);
            let mut fa = hermite_pair(n, a).0;
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                let fm = hermite_pair(n, mid).0;
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if (fm > 0.0) == (fa > 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
                if b - a < 1e-13 {
                    break;
                }
            }
            let mut z = 0.5 * (a + b);
            for _ in 0..4 {
                let (p, pm1) = hermite_pair(n, z);
                let dp = (2.0 * nf).sqrt() * pm1;
                z -= p / dp;
            }
            let (_, pm1) = hermite_pair(n, z);
            positive.push((z, 1.0 / (nf * pm1 * pm1)));
            if positive.len() == n_positive {
                break;
            }
        }
        prev_x = x;
        prev_sign = sign;
    }
    debug_assert_eq!(positive.len(), n_positive);

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(z, w) in positive.iter().rev() {
        nodes.push(-z);
        weights.push(w);
    }
    if n % 2 == 1 {
        let (_, pm1) = hermite_pair(n, 0.0);
        nodes.push(0.0);
        weights.push(1.0 / (nf * pm1 * pm1));
    }
    for &(z, w) in &positive {
        nodes.push(z);
        weights.push(w);
    }
    Ok((nodes, weights))
}

/// Nodes and weights for n-point Gauss-Legendre quadrature on [-1, 1].
pub fn gauss_legendre_nodes(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 || n > 1024 {
        return Err(Error::Domain(format!(
            "gauss-legendre order {n} outside 1..=1024"
        )));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..half {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for k in 0..n {
                let kf = k as f64;
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * kf + 1.0) * z * p1 - kf * p2) / (kf + 1.0);
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}
