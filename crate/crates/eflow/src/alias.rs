//! Alias-method sampler: O(1) draws from a fixed discrete distribution.

use rand::Rng;

/// Vose alias table over indices `0..len`.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl AliasTable {
    /// Builds the table from nonnegative weights (need not be normalized).
    pub fn new(weights: &[f64]) -> AliasTable {
        let n = weights.len();
        assert!(n > 0, "alias table needs at least one weight");
        let total: f64 = weights.iter().sum();
        assert!(total > 0.0, "weights must not all be zero");

        let mut prob: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut alias: Vec<u32> = (0..n as u32).collect();
        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (i, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            alias[s as usize] = l;
            prob[l as usize] += prob[s as usize] - 1.0;
            if prob[l as usize] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // Leftovers are 1 up to rounding.
        for i in small.into_iter().chain(large) {
            prob[i as usize] = 1.0;
        }
        AliasTable { prob, alias }
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let i = rng.random_range(0..self.prob.len());
        if rng.random::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn single_weight_always_sampled() {
        let t = AliasTable::new(&[2.5]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert_eq!(t.sample(&mut rng), 0);
        }
    }

    #[test]
    fn empirical_frequencies_match_weights() {
        let weights = [3.0, 1.0];
        let t = AliasTable::new(&weights);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000;
        let mut counts = [0usize; 2];
        for _ in 0..draws {
            counts[t.sample(&mut rng)] += 1;
        }
        let f0 = counts[0] as f64 / draws as f64;
        assert!((f0 - 0.75).abs() < 0.01, "f0 = {f0}");

        // Chi-square with 1 dof; 10.83 is the 0.1% critical value.
        let expect = [0.75 * draws as f64, 0.25 * draws as f64];
        let chi2: f64 = counts
            .iter()
            .zip(&expect)
            .map(|(&c, &e)| (c as f64 - e).powi(2) / e)
            .sum();
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }

    #[test]
    fn skewed_distribution_sampled_proportionally() {
        let weights = [0.05, 0.9, 0.05];
        let t = AliasTable::new(&weights);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let draws = 50_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            counts[t.sample(&mut rng)] += 1;
        }
        for (i, &w) in weights.iter().enumerate() {
            let f = counts[i] as f64 / draws as f64;
            assert!((f - w).abs() < 0.01, "index {i}: {f} vs {w}");
        }
    }
}
