//! Pseudo-parallel synthesis and inference-time prompt construction against
//! a pluggable translation backend.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::lang::Registry;
use crate::prompt::{pmp_generation_prompt, stp_generation_prompt, PromptError, PromptedExample};
use crate::record::{DirectionalExample, Provenance, RecordError};
use crate::is_center;

/// Largest tolerated share of failed backend calls in one synthesis run.
pub const MAX_FAILURE_RATE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("backend failed on {src_lang}->{tgt_lang}: {message}")]
pub struct BackendError {
    pub src_lang: String,
    pub tgt_lang: String,
    pub message: String,
}

/// Anything that turns `(src_lang, tgt_lang, text)` into a translation.
pub trait TranslationBackend {
    fn translate(&mut self, src_lang: &str, tgt_lang: &str, text: &str) -> Result<String, BackendError>;
}

impl<B: TranslationBackend + ?Sized> TranslationBackend for &mut B {
    fn translate(&mut self, src_lang: &str, tgt_lang: &str, text: &str) -> Result<String, BackendError> {
        (**self).translate(src_lang, tgt_lang, text)
    }
}

/// Echoes the input.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityBackend;

impl TranslationBackend for IdentityBackend {
    fn translate(&mut self, src_lang: &str, tgt_lang: &str, text: &str) -> Result<String, BackendError> {
        if text.is_empty() {
            return Err(BackendError {
                src_lang: src_lang.into(),
                tgt_lang: tgt_lang.into(),
                message: "empty input".into(),
            });
        }
        Ok(text.to_string())
    }
}

/// Word-by-word substitution per language pair. Whitespace-separated words
/// missing from the table are copied through unchanged.
#[derive(Debug, Clone, Default)]
pub struct DictionaryBackend {
    tables: BTreeMap<(String, String), BTreeMap<String, String>>,
}

impl DictionaryBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_pair<'a>(
        mut self,
        src_lang: &str,
        tgt_lang: &str,
        words: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Self {
        let table = self
            .tables
            .entry((src_lang.to_string(), tgt_lang.to_string()))
            .or_default();
        for (from, to) in words {
            table.insert(from.to_string(), to.to_string());
        }
        self
    }

    pub fn apply(&self, src_lang: &str, tgt_lang: &str, text: &str) -> Option<String> {
        let table = self.tables.get(&(src_lang.to_string(), tgt_lang.to_string()))?;
        Some(
            text.split_whitespace()
                .map(|w| table.get(w).map_or(w, String::as_str))
                .collect::<Vec<_>>()
                .join(" "),
        )
    }
}

impl TranslationBackend for DictionaryBackend {
    fn translate(&mut self, src_lang: &str, tgt_lang: &str, text: &str) -> Result<String, BackendError> {
        self.apply(src_lang, tgt_lang, text)
            .filter(|t| !t.is_empty())
            .ok_or_else(|| BackendError {
                src_lang: src_lang.into(),
                tgt_lang: tgt_lang.into(),
                message: "no dictionary for this pair".into(),
            })
    }
}

/// A line of monolingual input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoText {
    pub id: String,
    pub lang: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("{failed} of {attempted} backend calls failed, above the {max_rate} limit")]
    TooManyFailures {
        failed: usize,
        attempted: usize,
        max_rate: f64,
    },
    #[error("direct synthesis needs a center source, got {0}")]
    NonCenterSource(String),
    #[error("input {id:?} is in {found}, expected {expected}")]
    WrongLanguage {
        id: String,
        found: String,
        expected: String,
    },
    #[error("pivot input {0:?} needs English on exactly one side and a non-Chinese partner")]
    NotPivotable(String),
    #[error(transparent)]
    Record(#[from] RecordError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthFailure {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SynthOutput {
    pub examples: Vec<DirectionalExample>,
    pub failures: Vec<SynthFailure>,
    pub attempted: usize,
}

impl SynthOutput {
    fn finish(self) -> Result<Self, SynthError> {
        if self.failures.len() as f64 > MAX_FAILURE_RATE * self.attempted as f64 {
            return Err(SynthError::TooManyFailures {
                failed: self.failures.len(),
                attempted: self.attempted,
                max_rate: MAX_FAILURE_RATE,
            });
        }
        Ok(self)
    }
}

/// Translates center-language monolingual text into `direction.tgt`.
/// Failed items are skipped and listed; more than 10% failures aborts.
pub fn synth_direct<I, B>(mono: I, backend: &mut B, direction: &Direction) -> Result<SynthOutput, SynthError>
where
    I: IntoIterator<Item = MonoText>,
    B: TranslationBackend + ?Sized,
{
    if !is_center(direction.src()) {
        return Err(SynthError::NonCenterSource(direction.to_string()));
    }
    let mut out = SynthOutput::default();
    for item in mono {
        if item.lang != direction.src() {
            return Err(SynthError::WrongLanguage {
                id: item.id,
                found: item.lang,
                expected: direction.src().to_string(),
            });
        }
        out.attempted += 1;
        match backend.translate(direction.src(), direction.tgt(), &item.text) {
            Ok(tgt) => out.examples.push(DirectionalExample::from_record(
                &item.id,
                direction,
                item.text,
                tgt,
                Provenance::SynthDirect,
            )),
            Err(e) => out.failures.push(SynthFailure {
                id: item.id,
                message: e.to_string(),
            }),
        }
    }
    out.finish()
}

/// Builds Zh<->X pairs from En<->X pairs by translating the English side
/// into Chinese. Each input yields `zh->X` then `X->zh`.
pub fn synth_pivot<I, B>(en_x_pairs: I, en2zh: &mut B) -> Result<SynthOutput, SynthError>
where
    I: IntoIterator<Item = DirectionalExample>,
    B: TranslationBackend + ?Sized,
{
    let mut out = SynthOutput::default();
    for pair in en_x_pairs {
        let (en_text, x_lang, x_text) = match (pair.src_lang.as_str(), pair.tgt_lang.as_str()) {
            ("en", x) if x != "zh" && x != "en" => (&pair.src, x, &pair.tgt),
            (x, "en") if x != "zh" && x != "en" => (&pair.tgt, x, &pair.src),
            _ => return Err(SynthError::NotPivotable(pair.id)),
        };
        out.attempted += 1;
        match en2zh.translate("en", "zh", en_text) {
            Ok(zh_text) => {
                let base = pair.record_id();
                let forward = Direction::new("zh", x_lang)?;
                out.examples.push(DirectionalExample::from_record(
                    base,
                    &forward,
                    zh_text.clone(),
                    x_text.clone(),
                    Provenance::SynthPivot,
                ));
                out.examples.push(DirectionalExample::from_record(
                    base,
                    &forward.reversed(),
                    x_text.clone(),
                    zh_text,
                    Provenance::SynthPivot,
                ));
            }
            Err(e) => out.failures.push(SynthFailure {
                id: pair.id.clone(),
                message: e.to_string(),
            }),
        }
    }
    out.finish()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InferenceStrategy {
    /// Direct translation.
    Dt,
    /// Two-step pivot through English.
    Pt,
    /// PMP with a gold auxiliary sentence.
    PmpO,
    /// PMP with a backend-generated auxiliary sentence.
    PmpS,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InferencePrompt {
    Single(PromptedExample),
    /// Source -> en, then en -> target built from the backend's first output.
    Chain([PromptedExample; 2]),
}

impl InferencePrompt {
    pub fn prompts(&self) -> &[PromptedExample] {
        match self {
            InferencePrompt::Single(p) => core::slice::from_ref(p),
            InferencePrompt::Chain(chain) => chain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InferenceError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("{0} requires a translation backend")]
    BackendRequired(&'static str),
    #[error("PMP-O requires a gold auxiliary sentence")]
    MissingGoldAuxiliary,
    #[error("pivot translation needs English on neither side, got {0}")]
    PivotThroughEndpoint(String),
}

/// Inputs for one inference prompt.
#[derive(Debug, Clone, Copy)]
pub struct InferenceInput<'a> {
    pub id: &'a str,
    pub direction: &'a Direction,
    pub src: &'a str,
    /// Gold auxiliary sentence for PMP-O, in the registry's auxiliary language.
    pub gold_aux: Option<&'a str>,
}

pub fn build_inference_prompt(
    strategy: InferenceStrategy,
    input: InferenceInput<'_>,
    registry: &Registry,
    backend: Option<&mut dyn TranslationBackend>,
) -> Result<InferencePrompt, InferenceError> {
    let InferenceInput {
        id,
        direction,
        src,
        gold_aux,
    } = input;
    match strategy {
        InferenceStrategy::Dt => Ok(InferencePrompt::Single(stp_generation_prompt(
            registry, direction, src, id,
        )?)),
        InferenceStrategy::Pt => {
            if direction.src() == "en" || direction.tgt() == "en" {
                return Err(InferenceError::PivotThroughEndpoint(direction.to_string()));
            }
            let backend = backend.ok_or(InferenceError::BackendRequired("PT"))?;
            let first_dir = Direction::new(direction.src(), "en")?;
            let second_dir = Direction::new("en", direction.tgt())?;
            let first = stp_generation_prompt(registry, &first_dir, src, &step_id(id, &first_dir, 1))?;
            let pivot = backend.translate(direction.src(), "en", src)?;
            let second = stp_generation_prompt(registry, &second_dir, &pivot, &step_id(id, &second_dir, 2))?;
            Ok(InferencePrompt::Chain([first, second]))
        }
        InferenceStrategy::PmpO => {
            let aux_lang = registry
                .auxiliary_for(direction)
                .ok_or_else(|| PromptError::NoAuxiliaryDefined(direction.to_string()))?;
            let aux = gold_aux.ok_or(InferenceError::MissingGoldAuxiliary)?;
            Ok(InferencePrompt::Single(pmp_generation_prompt(
                registry, direction, src, aux_lang, aux, id,
            )?))
        }
        InferenceStrategy::PmpS => {
            let aux_lang = registry
                .auxiliary_for(direction)
                .ok_or_else(|| PromptError::NoAuxiliaryDefined(direction.to_string()))?;
            let backend = backend.ok_or(InferenceError::BackendRequired("PMP-S"))?;
            let aux = backend.translate(direction.src(), aux_lang, src)?;
            Ok(InferencePrompt::Single(pmp_generation_prompt(
                registry, direction, src, aux_lang, &aux, id,
            )?))
        }
    }
}

fn step_id(id: &str, direction: &Direction, step: u8) -> String {
    format!("{id}:pt{step}:{direction}")
}
