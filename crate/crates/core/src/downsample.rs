//! Strategic downsampling of center-targeted examples.
//!
//! Forward examples (En/Zh -> X) are always kept. A reverse example (target
//! is `en` or `zh`, which includes the en/zh pair in both orientations) is
//! kept iff `fnv1a64("{seed}:{id}") / 2^64 < p_reverse`, so the decision
//! depends only on the seed and the example id.

use serde::{Deserialize, Serialize};

use crate::hash::{below, seeded_hash};
use crate::is_center;
use crate::record::DirectionalExample;

pub const DEFAULT_P_REVERSE: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DirectionClass {
    Forward,
    Reverse,
}

pub fn classify(example: &DirectionalExample) -> DirectionClass {
    class_of_target(&example.tgt_lang)
}

pub fn class_of_target(tgt_lang: &str) -> DirectionClass {
    if is_center(tgt_lang) {
        DirectionClass::Reverse
    } else {
        DirectionClass::Forward
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("retention probability {0} is outside [0, 1]")]
pub struct InvalidProbability(pub f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetentionPolicy {
    p_reverse: f64,
    seed: u64,
}

impl Default for RetentionPolicy {
    fn default() -> Self {
        RetentionPolicy {
            p_reverse: DEFAULT_P_REVERSE,
            seed: DEFAULT_SEED,
        }
    }
}

impl RetentionPolicy {
    pub fn new(p_reverse: f64, seed: u64) -> Result<Self, InvalidProbability> {
        check_probability(p_reverse)?;
        Ok(RetentionPolicy { p_reverse, seed })
    }

    pub fn p_reverse(&self) -> f64 {
        self.p_reverse
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Retention draw for an id, ignoring its class.
    pub fn hash_of(&self, id: &str) -> u64 {
        seeded_hash(self.seed, "", id)
    }

    pub fn retains_id(&self, id: &str) -> bool {
        below(self.hash_of(id), self.p_reverse)
    }

    pub fn retains(&self, example: &DirectionalExample) -> bool {
        match classify(example) {
            DirectionClass::Forward => true,
            DirectionClass::Reverse => self.retains_id(&example.id),
        }
    }
}

pub fn check_probability(p: f64) -> Result<(), InvalidProbability> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(InvalidProbability(p))
    }
}

/// Lazily filters a stream, preserving order.
pub fn downsample<I>(examples: I, policy: RetentionPolicy) -> impl Iterator<Item = DirectionalExample>
where
    I: IntoIterator<Item = DirectionalExample>,
{
    examples.into_iter().filter(move |e| policy.retains(e))
}

/// Retained and dropped counts per class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownsampleCounts {
    pub forward_retained: u64,
    pub reverse_retained: u64,
    pub reverse_dropped: u64,
}

impl DownsampleCounts {
    pub fn record(&mut self, example: &DirectionalExample, kept: bool) {
        match (classify(example), kept) {
            (DirectionClass::Forward, _) => self.forward_retained += 1,
            (DirectionClass::Reverse, true) => self.reverse_retained += 1,
            (DirectionClass::Reverse, false) => self.reverse_dropped += 1,
        }
    }

    pub fn merge(&mut self, other: &DownsampleCounts) {
        self.forward_retained += other.forward_retained;
        self.reverse_retained += other.reverse_retained;
        self.reverse_dropped += other.reverse_dropped;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direction::Direction;
    use crate::hash::fnv1a64;
    use crate::record::Provenance;
    use alloc::format;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn ex(id: &str, s: &str, t: &str) -> DirectionalExample {
        DirectionalExample::from_record(id, &Direction::new(s, t).unwrap(), "a", "b", Provenance::Human)
    }

    fn mixed(n: usize) -> Vec<DirectionalExample> {
        (0..n)
            .flat_map(|i| {
                let id = format!("r{i}");
                [ex(&id, "en", "fr"), ex(&id, "fr", "en"), ex(&id, "zh", "de"), ex(&id, "de", "zh")]
            })
            .collect()
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&ex("r", "en", "fr")), DirectionClass::Forward);
        assert_eq!(classify(&ex("r", "fr", "en")), DirectionClass::Reverse);
        assert_eq!(classify(&ex("r", "en", "zh")), DirectionClass::Reverse);
        assert_eq!(classify(&ex("r", "zh", "en")), DirectionClass::Reverse);
    }

    #[test]
    fn policy_bounds() {
        assert!(RetentionPolicy::new(-0.1, 1).is_err());
        assert!(RetentionPolicy::new(1.1, 1).is_err());
        assert!(RetentionPolicy::new(f64::NAN, 1).is_err());
        assert_eq!(RetentionPolicy::default().p_reverse(), 0.05);
    }

    #[test]
    fn extremes() {
        let data = mixed(200);
        let all: Vec<_> = downsample(data.clone(), RetentionPolicy::new(1.0, 42).unwrap()).collect();
        assert_eq!(all, data);
        let fwd: Vec<_> = downsample(data.clone(), RetentionPolicy::new(0.0, 42).unwrap()).collect();
        let expected: Vec<_> = data
            .into_iter()
            .filter(|e| classify(e) == DirectionClass::Forward)
            .collect();
        assert_eq!(fwd, expected);
    }

    #[test]
    fn hash_rule_is_plain_fnv_over_seed_colon_id() {
        let policy = RetentionPolicy::new(0.3, 42).unwrap();
        for i in 0..500 {
            let id = format!("r{i}#fr2en");
            let u = fnv1a64(format!("42:{id}").as_bytes()) as f64 / 2f64.powi(64);
            // The float route is only trusted away from the threshold.
            if (u - 0.3).abs() > 1e-12 {
                assert_eq!(policy.retains_id(&id), u < 0.3);
            }
        }
    }

    /// 2x1 goodness of fit; chi2(1) critical value at alpha = 0.001 is 10.828.
    fn chi_square(policy: RetentionPolicy, ids: impl Iterator<Item = String>) -> f64 {
        let (mut n, mut kept) = (0.0, 0.0);
        for id in ids {
            n += 1.0;
            if policy.retains_id(&id) {
                kept += 1.0;
            }
        }
        let p = policy.p_reverse();
        let (e_keep, e_drop) = (n * p, n * (1.0 - p));
        (kept - e_keep).powi(2) / e_keep + (n - kept - e_drop).powi(2) / e_drop
    }

    fn random_ids(seed: u64, n: usize) -> impl Iterator<Item = String> {
        // splitmix64 stream, rendered as 16 hex digits
        let mut state = seed;
        (0..n).map(move |_| {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            format!("{:016x}", z ^ (z >> 31))
        })
    }

    #[test]
    fn empirical_rate_chi_square_random_ids() {
        for (seed, p) in [(7, 0.05), (42, 0.05), (42, 0.5), (1, 0.2)] {
            let policy = RetentionPolicy::new(p, seed).unwrap();
            let chi2 = chi_square(policy, random_ids(seed ^ 0xABCD, 100_000));
            assert!(chi2 < 10.828, "seed {seed} p {p}: chi2 = {chi2}");
        }
    }

    #[test]
    fn empirical_rate_chi_square_example_ids() {
        for (seed, p) in [(7, 0.05), (42, 0.05), (42, 0.5)] {
            let policy = RetentionPolicy::new(p, seed).unwrap();
            let ids = (0..100_000).map(|i| format!("rec{i:06}#kk2en"));
            let chi2 = chi_square(policy, ids);
            assert!(chi2 < 10.828, "seed {seed} p {p}: chi2 = {chi2}");
        }
    }

    proptest! {
        #[test]
        fn order_independent(seed in any::<u64>(), p in 0.0f64..=1.0, rot in 0usize..400) {
            let policy = RetentionPolicy::new(p, seed).unwrap();
            let data = mixed(100);
            let mut kept_a: Vec<_> = downsample(data.clone(), policy).map(|e| e.id).collect();
            let mut rotated = data;
            rotated.rotate_left(rot % 400);
            rotated.reverse();
            let mut kept_b: Vec<_> = downsample(rotated, policy).map(|e| e.id).collect();
            kept_a.sort();
            kept_b.sort();
            prop_assert_eq!(kept_a, kept_b);
        }

        #[test]
        fn monotone_in_p(seed in any::<u64>(), p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0) {
            let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
            let a = RetentionPolicy::new(lo, seed).unwrap();
            let b = RetentionPolicy::new(hi, seed).unwrap();
            for e in mixed(50) {
                if a.retains(&e) {
                    prop_assert!(b.retains(&e));
                }
                if classify(&e) == DirectionClass::Forward {
                    prop_assert!(a.retains(&e));
                }
            }
        }
    }
}
