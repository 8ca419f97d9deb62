//! Empirical distributions.

use serde::{Deserialize, Serialize};

/// Empirical CDF of a finite sample; `F(x) = #{s ≤ x} / n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    /// NaNs are dropped.
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.retain(|v| !v.is_nan());
        samples.sort_by(f64::total_cmp);
        EmpiricalCdf { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sorted samples.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&s| s <= x) as f64 / self.samples.len() as f64
    }

    /// `(value, F(value))` at every distinct sample value.
    pub fn steps(&self) -> Vec<(f64, f64)> {
        let n = self.samples.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &s) in self.samples.iter().enumerate() {
            let p = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == s => last.1 = p,
                _ => out.push((s, p)),
            }
        }
        out
    }

    /// Smallest sample `x` with `F(x) ≥ p`.
    pub fn quantile(&self, p: f64) -> Option<f64> {
        if self.samples.is_empty() || !(0.0..=1.0).contains(&p) {
            return None;
        }
        let n = self.samples.len();
        let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
        Some(self.samples[rank - 1])
    }

    pub fn median(&self) -> Option<f64> {
        self.quantile(0.5)
    }

    pub fn min(&self) -> Option<f64> {
        self.samples.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.samples.last().copied()
    }

    /// Kolmogorov–Smirnov distance `sup |F_a − F_b|`.
    pub fn ks_distance(&self, other: &EmpiricalCdf) -> f64 {
        if self.is_empty() || other.is_empty() {
            return f64::NAN;
        }
        let (a, b) = (&self.samples, &other.samples);
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let (mut i, mut j) = (0, 0);
        let mut best: f64 = 0.0;
        while i < a.len() || j < b.len() {
            let x = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => x.min(y),
                (Some(&x), None) => x,
                (None, Some(&y)) => y,
                (None, None) => unreachable!(),
            };
            while i < a.len() && a[i] <= x {
                i += 1;
            }
            while j < b.len() && b[j] <= x {
                j += 1;
            }
            best = best.max((i as f64 / na - j as f64 / nb).abs());
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_basics() {
        let cdf = EmpiricalCdf::new(vec![3.0, 1.0, 2.0, 2.0]);
        assert_eq!(cdf.eval(0.0), 0.0);
        assert_eq!(cdf.eval(2.0), 0.75);
        assert_eq!(cdf.eval(10.0), 1.0);
        assert_eq!(cdf.steps(), vec![(1.0, 0.25), (2.0, 0.75), (3.0, 1.0)]);
        assert_eq!(cdf.median(), Some(2.0));
        assert_eq!(cdf.quantile(1.0), Some(3.0));
        assert_eq!(cdf.quantile(0.0), Some(1.0));
    }

    #[test]
    fn ks_examples() {
        let a = EmpiricalCdf::new(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.ks_distance(&a), 0.0);
        let b = EmpiricalCdf::new(vec![10.0, 11.0]);
        assert_eq!(a.ks_distance(&b), 1.0);
        let c = EmpiricalCdf::new(vec![2.5, 3.5]);
        // At x = 2: F_a = 0.5, F_c = 0.
        assert_eq!(a.ks_distance(&c), 0.5);
    }

    #[test]
    fn ks_matches_brute_force() {
        let a = EmpiricalCdf::new((0..50).map(|i| ((i * 37) % 17) as f64 * 0.3).collect());
        let b = EmpiricalCdf::new((0..33).map(|i| ((i * 11) % 13) as f64 * 0.4).collect());
        let brute = a
            .samples()
            .iter()
            .chain(b.samples())
            .map(|&x| (a.eval(x) - b.eval(x)).abs())
            .fold(0.0, f64::max);
        assert_eq!(a.ks_distance(&b), brute);
    }
}
