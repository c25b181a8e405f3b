//! Deterministic pseudo-random ordinal generation for the stress suites.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ord::Ordinal;

/// Samples up to `count` distinct ordinals below `ω^exponent_bound`,
/// returned ascending. Deterministic in `seed`. Each draw independently
/// includes each exponent below the bound with probability ½ and gives it a
/// coefficient in `1..=coefficient_bound`; duplicates are rejected. When
/// the space is too small to hold `count` distinct values the attempt
/// guard returns what was found instead of spinning.
pub fn sample_ordinals(
    seed: u64,
    exponent_bound: u64,
    coefficient_bound: u64,
    count: usize,
) -> Vec<Ordinal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: BTreeSet<Ordinal> = BTreeSet::new();
    let mut attempts = 0usize;
    let guard = count.saturating_mul(64).saturating_add(256);
    while out.len() < count && attempts < guard {
        attempts += 1;
        let mut terms: Vec<(Ordinal, u64)> = Vec::new();
        for e in (0..exponent_bound).rev() {
            if rng.gen_bool(0.5) {
                terms.push((Ordinal::from_nat(e), rng.gen_range(1..=coefficient_bound.max(1))));
            }
        }
        let ord = Ordinal::from_terms(terms)
            .expect("exponents are generated in strictly descending order");
        out.insert(ord);
    }
    out.into_iter().collect()
}

/// A parsed `sampler:` argument: `count=<n>,exp=<n>,coeff=<n>[,seed=<n>]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerSpec {
    pub count: usize,
    pub exponent_bound: u64,
    pub coefficient_bound: u64,
    /// Falls back to the caller's seed when absent.
    pub seed: Option<u64>,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec { count: 120, exponent_bound: 5, coefficient_bound: 4, seed: None }
    }
}

impl SamplerSpec {
    /// Parses a comma-separated `key=value` list; unknown keys are errors,
    /// missing keys take defaults.
    pub fn parse(s: &str) -> Result<SamplerSpec, String> {
        let mut spec = SamplerSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {part:?}"))?;
            let num = || value.parse::<u64>().map_err(|e| format!("bad {key}: {e}"));
            match key {
                "count" => spec.count = num()? as usize,
                "exp" => spec.exponent_bound = num()?,
                "coeff" => spec.coefficient_bound = num()?,
                "seed" => spec.seed = Some(num()?),
                other => return Err(format!("unknown sampler key {other:?}")),
            }
        }
        if spec.exponent_bound == 0 || spec.coefficient_bound == 0 {
            return Err("sampler bounds must be positive".to_string());
        }
        Ok(spec)
    }

    pub fn realize(&self, default_seed: u64) -> Vec<Ordinal> {
        sample_ordinals(
            self.seed.unwrap_or(default_seed),
            self.exponent_bound,
            self.coefficient_bound,
            self.count,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_zero_is_empty() {
        assert!(sample_ordinals(1, 5, 5, 0).is_empty());
    }

    #[test]
    fn same_seed_same_list() {
        let a = sample_ordinals(42, 5, 4, 50);
        let b = sample_ordinals(42, 5, 4, 50);
        assert_eq!(a, b);
        let c = sample_ordinals(43, 5, 4, 50);
        assert_ne!(a, c);
    }

    #[test]
    fn five_distinct_below_omega_to_the_omega() {
        let bound = Ordinal::omega_pow(Ordinal::omega());
        let got = sample_ordinals(7, 6, 3, 5);
        assert_eq!(got.len(), 5);
        assert!(got.windows(2).all(|w| w[0] < w[1]), "sorted and distinct");
        assert!(got.iter().all(|o| o < &bound));
    }

    #[test]
    fn tiny_space_terminates_short() {
        // Exponent bound 1, coefficient bound 1: the space is {0, 1}.
        let got = sample_ordinals(9, 1, 1, 10);
        assert!(got.len() <= 2);
    }

    #[test]
    fn spec_parsing() {
        let s = SamplerSpec::parse("count=10,exp=3,coeff=2,seed=5").unwrap();
        assert_eq!(
            s,
            SamplerSpec { count: 10, exponent_bound: 3, coefficient_bound: 2, seed: Some(5) }
        );
        assert_eq!(SamplerSpec::parse("").unwrap(), SamplerSpec::default());
        assert!(SamplerSpec::parse("exp=0").is_err());
        assert!(SamplerSpec::parse("bogus=1").is_err());
        assert!(SamplerSpec::parse("count").is_err());
        assert_eq!(s.realize(99), sample_ordinals(5, 3, 2, 10));
    }
}
