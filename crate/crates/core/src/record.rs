//! Corpus record types.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::lang::Registry;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordError {
    #[error("record id is empty")]
    EmptyId,
    #[error("unknown language {0:?}")]
    UnknownLanguage(String),
    #[error("empty {field} text in {id:?}")]
    EmptyText { id: String, field: String },
    #[error("invalid direction {src}->{tgt}: {reason}")]
    InvalidDirection {
        src: String,
        tgt: String,
        reason: &'static str,
    },
    #[error("quality score {score} for {id:?} is outside [0, 1]")]
    InvalidScore { id: String, score: f64 },
}

/// One semantic unit aligned across a subset of languages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiWayRecord {
    pub id: String,
    pub sentences: BTreeMap<String, String>,
}

impl MultiWayRecord {
    pub fn new(id: impl Into<String>) -> Self {
        MultiWayRecord {
            id: id.into(),
            sentences: BTreeMap::new(),
        }
    }

    pub fn with(mut self, lang: &str, text: &str) -> Self {
        self.sentences.insert(lang.into(), text.into());
        self
    }

    pub fn sentence(&self, lang: &str) -> Option<&str> {
        self.sentences.get(lang).map(String::as_str)
    }

    /// Checks id, language keys and sentence contents against a registry.
    pub fn validate(&self, registry: &Registry) -> Result<(), RecordError> {
        if self.id.is_empty() {
            return Err(RecordError::EmptyId);
        }
        for (lang, text) in &self.sentences {
            if !registry.contains(lang) {
                return Err(RecordError::UnknownLanguage(lang.clone()));
            }
            if text.is_empty() {
                return Err(RecordError::EmptyText {
                    id: self.id.clone(),
                    field: lang.clone(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Human,
    SynthDirect,
    SynthPivot,
}

/// A single training pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionalExample {
    pub id: String,
    pub src_lang: String,
    pub tgt_lang: String,
    pub src: String,
    pub tgt: String,
    pub provenance: Provenance,
}

impl DirectionalExample {
    /// Builds an example with the conventional `<record>#<src>2<tgt>` id.
    pub fn from_record(
        record_id: &str,
        direction: &Direction,
        src: impl Into<String>,
        tgt: impl Into<String>,
        provenance: Provenance,
    ) -> Self {
        DirectionalExample {
            id: example_id(record_id, direction),
            src_lang: direction.src().to_string(),
            tgt_lang: direction.tgt().to_string(),
            src: src.into(),
            tgt: tgt.into(),
            provenance,
        }
    }

    pub fn direction(&self) -> Result<Direction, RecordError> {
        Direction::new(&self.src_lang, &self.tgt_lang)
    }

    pub fn validate(&self) -> Result<(), RecordError> {
        if self.id.is_empty() {
            return Err(RecordError::EmptyId);
        }
        self.direction()?;
        for (field, text) in [("src", &self.src), ("tgt", &self.tgt)] {
            if text.is_empty() {
                return Err(RecordError::EmptyText {
                    id: self.id.clone(),
                    field: field.into(),
                });
            }
        }
        Ok(())
    }

    /// The record id this example was expanded from (text before `#`).
    pub fn record_id(&self) -> &str {
        self.id.split_once('#').map_or(&self.id, |(base, _)| base)
    }
}

pub fn example_id(record_id: &str, direction: &Direction) -> String {
    format!("{record_id}#{}2{}", direction.src(), direction.tgt())
}

/// A directional example with a reference-free quality estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    #[serde(flatten)]
    pub example: DirectionalExample,
    pub qe_score: f64,
}

impl ScoredPair {
    pub fn new(example: DirectionalExample, qe_score: f64) -> Result<Self, RecordError> {
        check_score(&example.id, qe_score)?;
        Ok(ScoredPair { example, qe_score })
    }
}

pub fn check_score(id: &str, score: f64) -> Result<(), RecordError> {
    if (0.0..=1.0).contains(&score) {
        Ok(())
    } else {
        Err(RecordError::InvalidScore {
            id: id.into(),
            score,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_validation() {
        let reg = Registry::builtin();
        let ok = MultiWayRecord::new("r1").with("en", "Hi").with("fr", "Salut");
        assert!(ok.validate(&reg).is_ok());
        assert_eq!(
            MultiWayRecord::new("").with("en", "Hi").validate(&reg),
            Err(RecordError::EmptyId)
        );
        assert_eq!(
            MultiWayRecord::new("r2").with("xx", "?").validate(&reg),
            Err(RecordError::UnknownLanguage("xx".into()))
        );
        assert!(matches!(
            MultiWayRecord::new("r3").with("en", "").validate(&reg),
            Err(RecordError::EmptyText { .. })
        ));
    }

    #[test]
    fn example_invariants() {
        let d = Direction::new("en", "fr").unwrap();
        let ex = DirectionalExample::from_record("r1", &d, "Hi", "Salut", Provenance::Human);
        assert_eq!(ex.id, "r1#en2fr");
        assert_eq!(ex.record_id(), "r1");
        assert!(ex.validate().is_ok());

        let mut bad = ex.clone();
        bad.src_lang = "de".into();
        assert!(matches!(bad.validate(), Err(RecordError::InvalidDirection { .. })));
        let mut empty = ex;
        empty.tgt.clear();
        assert!(matches!(empty.validate(), Err(RecordError::EmptyText { .. })));
    }

    #[test]
    fn score_bounds() {
        let d = Direction::new("en", "fr").unwrap();
        let ex = DirectionalExample::from_record("r1", &d, "a", "b", Provenance::Human);
        assert!(ScoredPair::new(ex.clone(), 1.0).is_ok());
        assert!(ScoredPair::new(ex.clone(), 0.0).is_ok());
        assert!(matches!(
            ScoredPair::new(ex.clone(), 1.2),
            Err(RecordError::InvalidScore { .. })
        ));
        assert!(ScoredPair::new(ex, f64::NAN).is_err());
    }

    #[test]
    fn scored_pair_serializes_flat() {
        let d = Direction::new("fr", "en").unwrap();
        let ex = DirectionalExample::from_record("r9", &d, "Salut", "Hi", Provenance::Human);
        let sp = ScoredPair::new(ex, 0.5).unwrap();
        let v: serde_json::Value = serde_json::to_value(&sp).unwrap();
        assert_eq!(v["id"], "r9#fr2en");
        assert_eq!(v["qe_score"], 0.5);
        assert_eq!(v["provenance"], "human");
    }
}
