//! Heuristic bitext cleaning and quality-score thresholding.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::record::{check_score, DirectionalExample, RecordError, ScoredPair};

/// Thresholds marked on the score-distribution plots.
pub const DEFAULT_THRESHOLDS: [f64; 3] = [0.6, 0.7, 0.8];
pub const DEFAULT_TAU: f64 = 0.7;

/// Languages written without spaces between words. Their length is counted
/// in characters, four characters to a token.
pub const SCRIPTIO_CONTINUA: [&str; 8] = ["zh", "ja", "th", "my", "km", "lo", "bo", "yue"];
const CHARS_PER_TOKEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterRule {
    MaxLengthRatio { ratio: f64 },
    LengthBounds { min: usize, max: usize },
    NonEmpty,
    SrcTgtDistinct,
    ControlCharFree,
    ExactDedup,
}

impl FilterRule {
    pub fn name(&self) -> &'static str {
        match self {
            FilterRule::MaxLengthRatio { .. } => "max_length_ratio",
            FilterRule::LengthBounds { .. } => "length_bounds",
            FilterRule::NonEmpty => "non_empty",
            FilterRule::SrcTgtDistinct => "src_tgt_distinct",
            FilterRule::ControlCharFree => "control_char_free",
            FilterRule::ExactDedup => "exact_dedup",
        }
    }

    /// The default cleaning chain.
    pub fn defaults() -> Vec<FilterRule> {
        alloc::vec![
            FilterRule::NonEmpty,
            FilterRule::ControlCharFree,
            FilterRule::LengthBounds { min: 1, max: 512 },
            FilterRule::MaxLengthRatio { ratio: 3.0 },
            FilterRule::SrcTgtDistinct,
            FilterRule::ExactDedup,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FilterError {
    #[error("at least one filter rule is required")]
    NoRules,
    #[error("invalid rule {rule}: {reason}")]
    InvalidRule { rule: &'static str, reason: &'static str },
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("thresholds must be sorted ascending")]
    UnsortedThresholds,
    #[error("no score for {0:?}")]
    MissingScore(String),
    #[error(transparent)]
    Record(#[from] RecordError),
}

/// Length in tokens: whitespace-delimited words, or characters / 4 (rounded
/// up) for scriptio continua languages.
pub fn length_units(lang: &str, text: &str) -> usize {
    if SCRIPTIO_CONTINUA.contains(&lang) {
        let chars = text.chars().filter(|c| !c.is_whitespace()).count();
        chars.div_ceil(CHARS_PER_TOKEN)
    } else {
        text.split_whitespace().count()
    }
}

/// C0 control characters other than tab and newline.
pub fn has_forbidden_control(text: &str) -> bool {
    text.chars().any(|c| c < '\u{20}' && c != '\n' && c != '\t')
}

/// Stateful rule chain. `ExactDedup` remembers every accepted pair.
#[derive(Debug, Clone)]
pub struct HeuristicFilter {
    rules: Vec<FilterRule>,
    seen: BTreeSet<(String, String, String, String)>,
    report: FilterReport,
}

impl HeuristicFilter {
    pub fn new(rules: Vec<FilterRule>) -> Result<Self, FilterError> {
        if rules.is_empty() {
            return Err(FilterError::NoRules);
        }
        for rule in &rules {
            match *rule {
                FilterRule::MaxLengthRatio { ratio } if ratio.partial_cmp(&0.0) != Some(core::cmp::Ordering::Greater) => {
                    return Err(FilterError::InvalidRule {
                        rule: rule.name(),
                        reason: "ratio must be positive",
                    })
                }
                FilterRule::LengthBounds { min, max } if min == 0 || min > max => {
                    return Err(FilterError::InvalidRule {
                        rule: rule.name(),
                        reason: "bounds must satisfy 0 < min <= max",
                    })
                }
                _ => {}
            }
        }
        let mut report = FilterReport::default();
        for rule in &rules {
            report.rejected.insert(rule.name().into(), 0);
        }
        Ok(HeuristicFilter {
            rules,
            seen: BTreeSet::new(),
            report,
        })
    }

    /// Returns the first failing rule, or `None` when the pair is kept.
    pub fn check(&mut self, pair: &DirectionalExample) -> Option<FilterRule> {
        self.report.input += 1;
        let failed = self.rules.iter().copied().find(|rule| !self.passes(rule, pair));
        match failed {
            Some(rule) => *self.report.rejected.entry(rule.name().into()).or_insert(0) += 1,
            None => {
                self.report.kept += 1;
                if self.rules.contains(&FilterRule::ExactDedup) {
                    self.seen.insert(dedup_key(pair));
                }
            }
        }
        failed
    }

    fn passes(&self, rule: &FilterRule, pair: &DirectionalExample) -> bool {
        match *rule {
            FilterRule::NonEmpty => !pair.src.trim().is_empty() && !pair.tgt.trim().is_empty(),
            FilterRule::SrcTgtDistinct => pair.src.trim() != pair.tgt.trim(),
            FilterRule::ControlCharFree => {
                !has_forbidden_control(&pair.src) && !has_forbidden_control(&pair.tgt)
            }
            FilterRule::LengthBounds { min, max } => {
                let ls = length_units(&pair.src_lang, &pair.src);
                let lt = length_units(&pair.tgt_lang, &pair.tgt);
                (min..=max).contains(&ls) && (min..=max).contains(&lt)
            }
            FilterRule::MaxLengthRatio { ratio } => {
                let ls = length_units(&pair.src_lang, &pair.src);
                let lt = length_units(&pair.tgt_lang, &pair.tgt);
                let (lo, hi) = if ls <= lt { (ls, lt) } else { (lt, ls) };
                lo > 0 && hi as f64 <= ratio * lo as f64
            }
            FilterRule::ExactDedup => !self.seen.contains(&dedup_key(pair)),
        }
    }

    pub fn report(&self) -> &FilterReport {
        &self.report
    }

    pub fn into_report(self) -> FilterReport {
        self.report
    }
}

fn dedup_key(p: &DirectionalExample) -> (String, String, String, String) {
    (p.src_lang.clone(), p.tgt_lang.clone(), p.src.clone(), p.tgt.clone())
}

/// Runs the rule chain over a batch; returns the kept pairs and the tally.
pub fn apply_heuristics<I>(pairs: I, rules: &[FilterRule]) -> Result<(Vec<DirectionalExample>, FilterReport), FilterError>
where
    I: IntoIterator<Item = DirectionalExample>,
{
    let mut filter = HeuristicFilter::new(rules.to_vec())?;
    let kept = pairs
        .into_iter()
        .filter(|p| filter.check(p).is_none())
        .collect();
    Ok((kept, filter.into_report()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCount {
    pub tau: f64,
    pub count: u64,
    pub proportion: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input: u64,
    pub kept: u64,
    pub rejected: BTreeMap<String, u64>,
    pub histogram: Vec<ThresholdCount>,
}

impl FilterReport {
    pub fn rejected_total(&self) -> u64 {
        self.rejected.values().sum()
    }

    /// Adds another shard's tallies. Histograms must share thresholds.
    pub fn merge(&mut self, other: &FilterReport) {
        self.input += other.input;
        self.kept += other.kept;
        for (rule, n) in &other.rejected {
            *self.rejected.entry(rule.clone()).or_insert(0) += n;
        }
        if self.histogram.is_empty() {
            self.histogram = other.histogram.clone();
        } else {
            for (mine, theirs) in self.histogram.iter_mut().zip(&other.histogram) {
                mine.count += theirs.count;
            }
        }
    }
}

/// Pairs each example with its sidecar score, preserving order.
pub fn attach_scores<'a, I>(
    pairs: I,
    scores: &'a BTreeMap<String, f64>,
) -> impl Iterator<Item = Result<ScoredPair, FilterError>> + 'a
where
    I: IntoIterator<Item = DirectionalExample>,
    I::IntoIter: 'a,
{
    pairs.into_iter().map(move |example| {
        let score = *scores
            .get(&example.id)
            .ok_or_else(|| FilterError::MissingScore(example.id.clone()))?;
        Ok(ScoredPair::new(example, score)?)
    })
}

pub fn check_threshold(tau: f64) -> Result<(), FilterError> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(FilterError::InvalidThreshold(tau))
    }
}

/// Keeps pairs with `qe_score >= tau`.
pub fn threshold_filter<I>(scored: I, tau: f64) -> Result<impl Iterator<Item = ScoredPair>, FilterError>
where
    I: IntoIterator<Item = ScoredPair>,
{
    check_threshold(tau)?;
    Ok(scored.into_iter().filter(move |p| p.qe_score >= tau))
}

/// Count and share of scores at or above each threshold.
pub fn score_histogram<I>(scores: I, thresholds: &[f64]) -> Result<Vec<ThresholdCount>, FilterError>
where
    I: IntoIterator<Item = f64>,
{
    for &t in thresholds {
        check_threshold(t)?;
    }
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(FilterError::UnsortedThresholds);
    }
    let mut total = 0u64;
    let mut counts = alloc::vec![0u64; thresholds.len()];
    for s in scores {
        check_score("", s)?;
        total += 1;
        // thresholds are sorted, so the passing ones form a prefix
        let passing = thresholds.partition_point(|&t| t <= s);
        for c in &mut counts[..passing] {
            *c += 1;
        }
    }
    Ok(thresholds
        .iter()
        .zip(counts)
        .map(|(&tau, count)| ThresholdCount {
            tau,
            count,
            proportion: if total == 0 { 0.0 } else { count as f64 / total as f64 },
        })
        .collect())
}
