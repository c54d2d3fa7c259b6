//! Reproducible random streams and the variate generators used by the
//! samplers.
//!
//! Each replica draws from its own counter-mode (ChaCha) stream keyed by
//! `(seed, replica)`, so replica-level parallelism cannot change any
//! sampled value and a run can be replayed from its header alone.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A deterministic per-replica stream.
pub struct ReplicaRng {
    rng: ChaCha8Rng,
}

impl ReplicaRng {
    /// Stream keyed by `(seed, replica)`.
    pub fn new(seed: u64, replica: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&replica.to_le_bytes());
        key[16..24].copy_from_slice(&0x5049_4252_u64.to_le_bytes()); // domain tag
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(replica);
        Self { rng }
    }

    /// Uniform draw in `(0, 1]`.
    #[inline]
    pub fn uniform_open_closed(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Standard exponential via inversion.
    #[inline]
    pub fn exponential(&mut self) -> f64 {
        -self.uniform_open_closed().ln()
    }

    /// Geometric occupation number with `P{n} = θ^n (1−θ)` on `{0, 1, ...}`,
    /// parameterized by `ln θ < 0`. Inverse-CDF: `floor(ln U / ln θ)`.
    #[inline]
    pub fn geometric_from_log_theta(&mut self, log_theta: f64) -> u64 {
        debug_assert!(log_theta < 0.0);
        if log_theta == f64::NEG_INFINITY {
            return 0;
        }
        let u = self.uniform_open_closed();
        let value = u.ln() / log_theta;
        if value >= u64::MAX as f64 {
            u64::MAX
        } else {
            value as u64
        }
    }

    /// Poisson draw with mean `lambda`.
    ///
    /// Sequential inversion below 10 (one uniform, exact); above that a
    /// rejection sampler with a Cauchy hat and log-gamma weights.
    pub fn poisson(&mut self, lambda: f64) -> u64 {
        debug_assert!(lambda >= 0.0);
        if lambda == 0.0 {
            0
        } else if lambda < 10.0 {
            self.poisson_inversion(lambda)
        } else {
            self.poisson_rejection(lambda)
        }
    }

    fn poisson_inversion(&mut self, lambda: f64) -> u64 {
        let mut k = 0u64;
        let mut prod = (-lambda).exp();
        let mut acc = prod;
        let u = self.uniform();
        while u > acc {
            k += 1;
            prod *= lambda / k as f64;
            acc += prod;
            if prod < 1e-300 {
                break;
            }
        }
        k
    }

    fn poisson_rejection(&mut self, lambda: f64) -> u64 {
        let sq = (2.0 * lambda).sqrt();
        let ln_lambda = lambda.ln();
        let g = lambda * ln_lambda - crate::special::ln_gamma(lambda + 1.0);
        loop {
            let mut y;
            let mut em;
            loop {
                y = (std::f64::consts::PI * self.uniform()).tan();
                em = sq * y + lambda;
                if em >= 0.0 {
                    break;
                }
            }
            let k = em.floor();
            let t =
                0.9 * (1.0 + y * y) * (k * ln_lambda - crate::special::ln_gamma(k + 1.0) - g).exp();
            if self.uniform() <= t {
                return k as u64;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_and_disjoint() {
        let a: Vec<f64> = {
            let mut r = ReplicaRng::new(7, 3);
            (0..16).map(|_| r.uniform()).collect()
        };
        let b: Vec<f64> = {
            let mut r = ReplicaRng::new(7, 3);
            (0..16).map(|_| r.uniform()).collect()
        };
        assert_eq!(a, b);
        let c: Vec<f64> = {
            let mut r = ReplicaRng::new(7, 4);
            (0..16).map(|_| r.uniform()).collect()
        };
        assert_ne!(a, c);
        let d: Vec<f64> = {
            let mut r = ReplicaRng::new(8, 3);
            (0..16).map(|_| r.uniform()).collect()
        };
        assert_ne!(a, d);
    }

    #[test]
    fn geometric_matches_exact_pmf() {
        // Chi-square against θ^n(1−θ) for several θ.
        for (stream, &theta) in [0.1f64, 0.5, 0.9].iter().enumerate() {
            let mut rng = ReplicaRng::new(42, stream as u64);
            let n = 100_000usize;
            let cells = 12usize;
            let mut observed = vec![0u64; cells + 1];
            for _ in 0..n {
                let v = rng.geometric_from_log_theta(theta.ln()) as usize;
                observed[v.min(cells)] += 1;
            }
            let mut expected = Vec::with_capacity(cells + 1);
            for i in 0..cells {
                expected.push(theta.powi(i as i32) * (1.0 - theta));
            }
            expected.push(theta.powi(cells as i32)); // tail mass
            let (chi2, p_value) = crate::stats::chi_square_test(&observed, &expected).unwrap();
            assert!(p_value > 0.01, "theta = {theta}: chi2 = {chi2}, p = {p_value}");
        }
    }

    #[test]
    fn poisson_moments_and_pmf() {
        for (stream, &lambda) in [0.5f64, 3.0, 9.5, 12.0, 50.0, 1400.0].iter().enumerate() {
            let mut rng = ReplicaRng::new(9, stream as u64);
            let n = 100_000usize;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..n {
                let v = rng.poisson(lambda) as f64;
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / n as f64;
            let var = sum_sq / n as f64 - mean * mean;
            let sigma_mean = (lambda / n as f64).sqrt();
            assert!(
                (mean - lambda).abs() < 4.0 * sigma_mean,
                "lambda = {lambda}: mean = {mean}"
            );
            // Var(sample var) ≈ (2λ² + λ)/n for Poisson.
            let sigma_var = ((2.0 * lambda * lambda + lambda) / n as f64).sqrt();
            assert!(
                (var - lambda).abs() < 4.0 * sigma_var,
                "lambda = {lambda}: var = {var}"
            );
        }
    }

    #[test]
    fn poisson_rejection_matches_pmf_cells() {
        // Exact pmf comparison around the mode for a moderate lambda:
        // cells [<lo], lo..=hi, [>hi].
        let lambda = 15.0;
        let mut rng = ReplicaRng::new(11, 0);
        let n = 200_000usize;
        let lo = 5usize;
        let hi = 27usize;
        let mut observed = vec![0u64; hi - lo + 3];
        for _ in 0..n {
            let v = rng.poisson(lambda) as usize;
            if v < lo {
                observed[0] += 1;
            } else if v <= hi {
                observed[v - lo + 1] += 1;
            } else {
                observed[hi - lo + 2] += 1;
            }
        }
        let pmf = |k: usize| -> f64 {
            (k as f64 * lambda.ln() - lambda - crate::special::ln_factorial(k as u64)).exp()
        };
        let mut expected = Vec::with_capacity(hi - lo + 3);
        expected.push((0..lo).map(pmf).sum::<f64>());
        for k in lo..=hi {
            expected.push(pmf(k));
        }
        expected.push(1.0 - expected.iter().sum::<f64>());
        let (chi2, p_value) = crate::stats::chi_square_test(&observed, &expected).unwrap();
        assert!(p_value > 0.01, "chi2 = {chi2}, p = {p_value}");
    }
}
