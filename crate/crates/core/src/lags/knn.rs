//! Kraskov-Stögbauer-Grassberger k-nearest-neighbour estimate of the mutual
//! information between a value and the window of its `p` predecessors.
//!
//! Distances use the max-norm, so the window distance for `p + 1` lags is the
//! running maximum of the distance for `p` lags and one more coordinate. All
//! windows for `p = 1..=max_lag` share the same targets `z[max_lag..]`.

use rayon::prelude::*;

/// `digamma(i)` for integer `i >= 1`, indexed by `i`.
fn digamma_table(n: usize) -> Vec<f64> {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let mut table = vec![f64::NAN; n + 1];
    if n >= 1 {
        table[1] = -EULER_GAMMA;
    }
    for i in 2..=n {
        table[i] = table[i - 1] + 1.0 / (i - 1) as f64;
    }
    table
}

/// `I(z_t; z_{t-1}, ..., z_{t-p})` in nats for every `p` in `1..=max_lag`.
///
/// `z` should be free of exact ties; callers add a tiny deterministic jitter.
pub(crate) fn window_mutual_information(z: &[f64], max_lag: usize, neighbors: usize) -> Vec<f64> {
    let m = z.len() - max_lag;
    debug_assert!(m > neighbors);
    let target = &z[max_lag..];
    let psi = digamma_table(m);

    // Per-point sums of psi(n_x + 1) + psi(n_y + 1), one entry per p.
    let per_point: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map_init(
            || (vec![0.0f64; m], vec![0.0f64; m], vec![0.0f64; m]),
            |(dx, dy, joint), i| {
                let yi = target[i];
                for (d, y) in dy.iter_mut().zip(target) {
                    *d = (y - yi).abs();
                }
                dx.iter_mut().for_each(|d| *d = 0.0);
                let mut out = Vec::with_capacity(max_lag);
                for lag in 1..=max_lag {
                    let coord = &z[max_lag - lag..z.len() - lag];
                    let xi = coord[i];
                    for ((d, j), c) in dx.iter_mut().zip(joint.iter_mut()).zip(coord) {
                        *d = d.max((c - xi).abs());
                        *j = *d;
                    }
                    for (j, y) in joint.iter_mut().zip(dy.iter()) {
                        *j = j.max(*y);
                    }
                    joint[i] = f64::INFINITY;
                    let eps = kth_smallest(joint, neighbors);
                    let mut nx = 0usize;
                    let mut ny = 0usize;
                    for (a, b) in dx.iter().zip(dy.iter()) {
                        nx += (*a < eps) as usize;
                        ny += (*b < eps) as usize;
                    }
                    // The point itself has distance zero in both marginals.
                    out.push(psi[nx] + psi[ny]);
                }
                out
            },
        )
        .collect();

    let base = psi[neighbors] + psi[m];
    (0..max_lag)
        .map(|p| {
            let mean = per_point.iter().map(|v| v[p]).sum::<f64>() / m as f64;
            base - mean
        })
        .collect()
}

/// `k`-th smallest value (1-based) without reordering `values`.
fn kth_smallest(values: &[f64], k: usize) -> f64 {
    let mut best = vec![f64::INFINITY; k];
    for &v in values {
        if v < best[k - 1] {
            let mut pos = k - 1;
            while pos > 0 && best[pos - 1] > v {
                best[pos] = best[pos - 1];
                pos -= 1;
            }
            best[pos] = v;
        }
    }
    best[k - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn digamma_matches_known_values() {
        let t = digamma_table(5);
        assert!((t[1] + 0.577_215_664_901_532_9).abs() < 1e-15);
        // digamma(5) = -gamma + 1 + 1/2 + 1/3 + 1/4
        assert!((t[5] - 1.506_117_668_431_800_5).abs() < 1e-14);
    }

    #[test]
    fn kth_smallest_selects() {
        let v = [5.0, 1.0, 4.0, 1.5, 3.0, 0.5];
        assert_eq!(kth_smallest(&v, 1), 0.5);
        assert_eq!(kth_smallest(&v, 3), 1.5);
        assert_eq!(kth_smallest(&v, 6), 5.0);
    }

    #[test]
    fn gaussian_ar1_matches_closed_form() {
        // For a stationary Gaussian AR(1) with coefficient a, the information
        // between z_t and its predecessor is -0.5 ln(1 - a^2), and adding
        // older lags adds nothing.
        let a: f64 = 0.8;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut z = Vec::with_capacity(3000);
        let mut prev = 0.0;
        for _ in 0..3200 {
            let e: f64 = StandardNormal.sample(&mut rng);
            prev = a * prev + e;
            z.push(prev);
        }
        let z = &z[200..];
        let mi = window_mutual_information(z, 3, 4);
        let exact = -0.5 * (1.0 - a * a).ln();
        for v in &mi {
            assert!((v - exact).abs() < 0.05, "{mi:?} vs {exact}");
        }
    }
}
