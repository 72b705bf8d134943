//! Many-to-one target repetition statistics.
//!
//! A target is identified by its language and NFC-normalized text; its
//! repetition is the number of distinct `(src_lang, src_text)` sources that
//! map onto it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::downsample::{class_of_target, downsample, DirectionClass, RetentionPolicy};
use crate::hash::fnv1a64;
use crate::record::DirectionalExample;

fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Exact accumulator; mergeable across shards.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RepetitionCounter {
    targets: BTreeMap<(String, String), BTreeSet<(String, String)>>,
}

impl RepetitionCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, example: &DirectionalExample) {
        self.targets
            .entry((example.tgt_lang.clone(), nfc(&example.tgt)))
            .or_default()
            .insert((example.src_lang.clone(), nfc(&example.src)));
    }

    pub fn merge(&mut self, other: RepetitionCounter) {
        for (k, sources) in other.targets {
            self.targets.entry(k).or_default().extend(sources);
        }
    }

    pub fn finish(&self) -> RepetitionStats {
        let mut stats = RepetitionStats::default();
        for ((lang, text), sources) in &self.targets {
            let n = sources.len();
            stats.per_target.push(TargetEntry {
                tgt_lang: lang.clone(),
                target_hash: fnv1a64(text.as_bytes()),
                sources: n,
            });
            *stats.histogram.entry(n).or_insert(0) += 1;
            stats.max_repetition = stats.max_repetition.max(n);
            stats.by_class.entry(class_of_target(lang)).or_default().add(n);
            stats.by_target_lang.entry(lang.clone()).or_default().add(n);
        }
        for s in stats.by_class.values_mut().chain(stats.by_target_lang.values_mut()) {
            s.finish();
        }
        stats
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub tgt_lang: String,
    /// FNV-1a of the NFC target text.
    pub target_hash: u64,
    pub sources: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub distinct_targets: usize,
    /// Sum of repetitions, i.e. distinct (source, target) pairs.
    pub total_pairs: usize,
    pub max_repetition: usize,
    pub mean_repetition: f64,
}

impl GroupStats {
    fn add(&mut self, n: usize) {
        self.distinct_targets += 1;
        self.total_pairs += n;
        self.max_repetition = self.max_repetition.max(n);
    }

    fn finish(&mut self) {
        self.mean_repetition = if self.distinct_targets == 0 {
            0.0
        } else {
            self.total_pairs as f64 / self.distinct_targets as f64
        };
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepetitionStats {
    pub per_target: Vec<TargetEntry>,
    /// repetition -> number of targets with that repetition
    pub histogram: BTreeMap<usize, usize>,
    pub max_repetition: usize,
    pub by_class: BTreeMap<DirectionClass, GroupStats>,
    pub by_target_lang: BTreeMap<String, GroupStats>,
}

impl RepetitionStats {
    pub fn distinct_targets(&self) -> usize {
        self.histogram.values().sum()
    }

    pub fn class(&self, class: DirectionClass) -> GroupStats {
        self.by_class.get(&class).cloned().unwrap_or_default()
    }

    pub fn target_lang(&self, lang: &str) -> GroupStats {
        self.by_target_lang.get(lang).cloned().unwrap_or_default()
    }

    /// Horizontal bar chart of the repetition histogram.
    pub fn ascii_histogram(&self, width: usize) -> String {
        use core::fmt::Write as _;
        let peak = self.histogram.values().copied().max().unwrap_or(0).max(1);
        let mut out = String::new();
        for (rep, count) in &self.histogram {
            let bar = (count * width).div_ceil(peak);
            let _ = writeln!(out, "{rep:>4} | {:<width$} {count}", "#".repeat(bar));
        }
        out
    }
}

pub fn target_repetition_stats<'a, I>(examples: I) -> RepetitionStats
where
    I: IntoIterator<Item = &'a DirectionalExample>,
{
    let mut counter = RepetitionCounter::new();
    for e in examples {
        counter.add(e);
    }
    counter.finish()
}

/// Stats of the stream after strategic downsampling.
pub fn repetition_after_policy<I>(examples: I, policy: RetentionPolicy) -> RepetitionStats
where
    I: IntoIterator<Item = DirectionalExample>,
{
    let mut counter = RepetitionCounter::new();
    for e in downsample(examples, policy) {
        counter.add(&e);
    }
    counter.finish()
}
