//! Variation operators shared by the evolutionary searches: simulated
//! binary crossover and polynomial mutation, both box-bounded.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const SBX_ETA: f64 = 30.0;
pub const SBX_RATE: f64 = 1.0;
pub const MUTATION_ETA: f64 = 20.0;

/// Simulated binary crossover (Deb & Agrawal). Produces two children inside
/// the box.
pub fn sbx_crossover(
    rng: &mut ChaCha8Rng,
    p1: &[f64],
    p2: &[f64],
    bounds: &[(f64, f64)],
    eta: f64,
    rate: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.gen::<f64>() > rate {
        return (c1, c2);
    }
    for i in 0..p1.len() {
        if rng.gen::<f64>() > 0.5 {
            continue;
        }
        let (lo, hi) = bounds[i];
        let (y1, y2) = if p1[i] < p2[i] {
            (p1[i], p2[i])
        } else {
            (p2[i], p1[i])
        };
        if (y2 - y1).abs() <= 1e-14 {
            continue;
        }
        let u = rng.gen::<f64>();
        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let beta_lo = 1.0 + 2.0 * (y1 - lo) / (y2 - y1);
        let child_lo = 0.5 * ((y1 + y2) - spread(beta_lo) * (y2 - y1));
        let beta_hi = 1.0 + 2.0 * (hi - y2) / (y2 - y1);
        let child_hi = 0.5 * ((y1 + y2) + spread(beta_hi) * (y2 - y1));
        let mut child_lo = child_lo.clamp(lo, hi);
        let mut child_hi = child_hi.clamp(lo, hi);
        if rng.gen::<f64>() <= 0.5 {
            std::mem::swap(&mut child_lo, &mut child_hi);
        }
        c1[i] = child_lo;
        c2[i] = child_hi;
    }
    (c1, c2)
}

/// Polynomial mutation with per-variable probability `rate`.
pub fn polynomial_mutation(
    rng: &mut ChaCha8Rng,
    x: &mut [f64],
    bounds: &[(f64, f64)],
    eta: f64,
    rate: f64,
) {
    for i in 0..x.len() {
        if rng.gen::<f64>() > rate {
            continue;
        }
        let (lo, hi) = bounds[i];
        let span = hi - lo;
        let delta1 = (x[i] - lo) / span;
        let delta2 = (hi - x[i]) / span;
        let u = rng.gen::<f64>();
        let pow = 1.0 / (eta + 1.0);
        let deltaq = if u <= 0.5 {
            let xy = 1.0 - delta1;
            let val = 2.0 * u + (1.0 - 2.0 * u) * xy.powf(eta + 1.0);
            val.powf(pow) - 1.0
        } else {
            let xy = 1.0 - delta2;
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(eta + 1.0);
            1.0 - val.powf(pow)
        };
        x[i] = (x[i] + deltaq * span).clamp(lo, hi);
    }
}

/// Uniform random point inside the box.
pub fn random_point(rng: &mut ChaCha8Rng, bounds: &[(f64, f64)]) -> Vec<f64> {
    bounds
        .iter()
        .map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>())
        .collect()
}
