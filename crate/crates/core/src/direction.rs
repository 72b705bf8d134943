//! The center-anchored direction space and multi-way expansion.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::lang::{Registry, RegistryError};
use crate::record::{DirectionalExample, MultiWayRecord, Provenance, RecordError};
use crate::{is_center, CENTERS};

/// A translation direction with at least one center language on either side.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDirection", into = "RawDirection")]
pub struct Direction {
    src: String,
    tgt: String,
}

#[derive(Serialize, Deserialize)]
struct RawDirection {
    src: String,
    tgt: String,
}

impl TryFrom<RawDirection> for Direction {
    type Error = RecordError;

    fn try_from(raw: RawDirection) -> Result<Self, Self::Error> {
        Direction::new(&raw.src, &raw.tgt)
    }
}

impl From<Direction> for RawDirection {
    fn from(d: Direction) -> Self {
        RawDirection {
            src: d.src,
            tgt: d.tgt,
        }
    }
}

impl Direction {
    pub fn new(src: &str, tgt: &str) -> Result<Self, RecordError> {
        let invalid = |reason| RecordError::InvalidDirection {
            src: src.to_string(),
            tgt: tgt.to_string(),
            reason,
        };
        if src == tgt {
            return Err(invalid("source and target languages are equal"));
        }
        if !is_center(src) && !is_center(tgt) {
            return Err(invalid("neither side is a center language"));
        }
        Ok(Direction {
            src: src.to_string(),
            tgt: tgt.to_string(),
        })
    }

    pub fn src(&self) -> &str {
        &self.src
    }

    pub fn tgt(&self) -> &str {
        &self.tgt
    }

    pub fn reversed(&self) -> Direction {
        Direction {
            src: self.tgt.clone(),
            tgt: self.src.clone(),
        }
    }

    /// True when the target is a center language.
    pub fn targets_center(&self) -> bool {
        is_center(&self.tgt)
    }

    pub fn both_centers(&self) -> bool {
        is_center(&self.src) && is_center(&self.tgt)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}2{}", self.src, self.tgt)
    }
}

/// Ordered, duplicate-free list of directions grouped in unordered pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionSet {
    directions: Vec<Direction>,
}

impl DirectionSet {
    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn direction_count(&self) -> usize {
        self.directions.len()
    }

    pub fn pair_count(&self) -> usize {
        self.directions.len() / 2
    }

    pub fn contains(&self, d: &Direction) -> bool {
        self.directions.contains(d)
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Direction> {
        self.directions.iter()
    }
}

impl<'a> IntoIterator for &'a DirectionSet {
    type Item = &'a Direction;
    type IntoIter = core::slice::Iter<'a, Direction>;

    fn into_iter(self) -> Self::IntoIter {
        self.directions.iter()
    }
}

/// Enumerates En<->X for every X, then Zh<->X for every X outside the
/// centers, each pair forward-first. The en/zh pair sits in the English
/// family only.
pub fn enumerate_directions(registry: &Registry) -> Result<DirectionSet, RegistryError> {
    for center in CENTERS {
        if !registry.contains(center) {
            return Err(RegistryError::MissingCenter(center.to_string()));
        }
    }
    let mut directions = Vec::new();
    let mut push_pair = |center: &str, other: &str| {
        directions.push(Direction::new(center, other).expect("center pair"));
        directions.push(Direction::new(other, center).expect("center pair"));
    };
    for lang in registry.languages() {
        if lang.code != "en" {
            push_pair("en", &lang.code);
        }
    }
    for lang in registry.languages() {
        if !is_center(&lang.code) {
            push_pair("zh", &lang.code);
        }
    }
    Ok(DirectionSet { directions })
}

/// One human example per direction whose two sides are both present in the
/// record, in direction-set order.
pub fn expand(record: &MultiWayRecord, dirset: &DirectionSet) -> Vec<DirectionalExample> {
    dirset
        .iter()
        .filter_map(|d| {
            let src = record.sentence(d.src())?;
            let tgt = record.sentence(d.tgt())?;
            Some(DirectionalExample::from_record(
                &record.id,
                d,
                src,
                tgt,
                Provenance::Human,
            ))
        })
        .collect()
}
