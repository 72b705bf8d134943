//! SFT mixture assembly.
//!
//! Per direction: gather candidates from the multi-way corpus, select up to
//! `per_direction_max` of them (quality-descending when scores are given,
//! corpus order otherwise), thin reverse directions with the strategic
//! downsampler, then assign each survivor STP or PMP with an independent
//! seeded coin. PMP auxiliaries come from the same multi-way record.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::direction::{Direction, DirectionSet};
use crate::downsample::{check_probability, InvalidProbability, RetentionPolicy};
use crate::hash::{below, seeded_hash};
use crate::lang::Registry;
use crate::prompt::{render_pmp, render_stp, PromptError, PromptFormat, PromptedExample};
use crate::record::{example_id, DirectionalExample, MultiWayRecord, Provenance};

/// Salt separating the format coin from the retention coin.
pub const FORMAT_SALT: &str = "fmt:";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixtureSpec {
    pub per_direction_min: usize,
    pub per_direction_max: usize,
    pub forward_pmp_share: f64,
    pub reverse_total_retention: f64,
    pub reverse_pmp_share_of_retained: f64,
    pub seed: u64,
}

impl Default for MixtureSpec {
    fn default() -> Self {
        MixtureSpec {
            per_direction_min: 3000,
            per_direction_max: 20_000,
            forward_pmp_share: 0.5,
            reverse_total_retention: 0.05,
            reverse_pmp_share_of_retained: 0.5,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MixtureError {
    #[error(transparent)]
    Probability(#[from] InvalidProbability),
    #[error("per_direction_min {min} exceeds per_direction_max {max}")]
    MinAboveMax { min: usize, max: usize },
    #[error(transparent)]
    Prompt(#[from] PromptError),
}

impl MixtureSpec {
    pub fn validate(&self) -> Result<(), MixtureError> {
        check_probability(self.forward_pmp_share)?;
        check_probability(self.reverse_total_retention)?;
        check_probability(self.reverse_pmp_share_of_retained)?;
        if self.per_direction_min > self.per_direction_max {
            return Err(MixtureError::MinAboveMax {
                min: self.per_direction_min,
                max: self.per_direction_max,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum MixtureWarning {
    /// Fewer candidates than `per_direction_min` (possibly zero).
    UnderSupplied {
        direction: String,
        supply: usize,
        minimum: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionTally {
    pub direction: String,
    /// Candidates with both sides present (and a score, when scores are used).
    pub supply: usize,
    pub selected: usize,
    pub emitted: usize,
    pub stp: usize,
    pub pmp: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionBatch {
    pub examples: Vec<PromptedExample>,
    pub tally: DirectionTally,
    pub warning: Option<MixtureWarning>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mixture {
    pub examples: Vec<PromptedExample>,
    pub tallies: Vec<DirectionTally>,
    pub warnings: Vec<MixtureWarning>,
}

impl Mixture {
    pub fn push(&mut self, batch: DirectionBatch) {
        self.examples.extend(batch.examples);
        self.tallies.push(batch.tally);
        self.warnings.extend(batch.warning);
    }
}

/// Assembles one direction. Directions are independent of each other, so
/// callers may run these in parallel and concatenate in direction-set order.
pub fn build_direction(
    records: &[MultiWayRecord],
    registry: &Registry,
    direction: &Direction,
    spec: &MixtureSpec,
    scores: Option<&BTreeMap<String, f64>>,
) -> Result<DirectionBatch, MixtureError> {
    spec.validate()?;

    let mut candidates: Vec<(&MultiWayRecord, String, f64)> = records
        .iter()
        .filter(|r| r.sentence(direction.src()).is_some() && r.sentence(direction.tgt()).is_some())
        .filter_map(|r| {
            let id = example_id(&r.id, direction);
            match scores {
                Some(s) => s.get(&id).map(|&q| (r, id, q)),
                None => Some((r, id, 0.0)),
            }
        })
        .collect();
    if scores.is_some() {
        candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.1.cmp(&b.1)));
    }

    let supply = candidates.len();
    candidates.truncate(spec.per_direction_max);
    let warning = (supply < spec.per_direction_min).then(|| MixtureWarning::UnderSupplied {
        direction: direction.to_string(),
        supply,
        minimum: spec.per_direction_min,
    });

    let reverse = direction.targets_center();
    let retention = RetentionPolicy::new(spec.reverse_total_retention, spec.seed)?;
    let pmp_share = if reverse {
        spec.reverse_pmp_share_of_retained
    } else {
        spec.forward_pmp_share
    };
    let aux_lang = registry.auxiliary_for(direction);

    let mut tally = DirectionTally {
        direction: direction.to_string(),
        supply,
        selected: candidates.len(),
        ..DirectionTally::default()
    };
    let mut examples = Vec::new();
    for (record, id, _) in candidates {
        if reverse && !retention.retains_id(&id) {
            continue;
        }
        let example = DirectionalExample {
            id: id.clone(),
            src_lang: direction.src().to_string(),
            tgt_lang: direction.tgt().to_string(),
            src: record.sentence(direction.src()).unwrap_or_default().to_string(),
            tgt: record.sentence(direction.tgt()).unwrap_or_default().to_string(),
            provenance: Provenance::Human,
        };
        let aux = aux_lang.and_then(|lang| record.sentence(lang).map(|text| (lang, text)));
        let rendered = match aux {
            Some((lang, text)) if below(seeded_hash(spec.seed, FORMAT_SALT, &id), pmp_share) => {
                render_pmp(registry, &example, text, lang)?
            }
            _ => render_stp(registry, &example)?,
        };
        match rendered.format {
            PromptFormat::Pmp => tally.pmp += 1,
            _ => tally.stp += 1,
        }
        examples.push(rendered);
    }
    tally.emitted = examples.len();
    Ok(DirectionBatch {
        examples,
        tally,
        warning,
    })
}

/// Sequential mixture over every direction of `dirset`.
pub fn build_sft_mixture(
    records: &[MultiWayRecord],
    registry: &Registry,
    dirset: &DirectionSet,
    spec: &MixtureSpec,
    scores: Option<&BTreeMap<String, f64>>,
) -> Result<Mixture, MixtureError> {
    spec.validate()?;
    let mut mixture = Mixture::default();
    for direction in dirset {
        mixture.push(build_direction(records, registry, direction, spec, scores)?);
    }
    Ok(mixture)
}
