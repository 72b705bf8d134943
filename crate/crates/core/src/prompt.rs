//! Prompt templates with byte-exact loss spans.
//!
//! Templates (schema `prompt_schema_v1`):
//!
//! ```text
//! STP:  Translate the following text from {Src} to {Tgt}.\n{Src}: {src}\n{Tgt}: {tgt}
//! PMP:  Translate the following text from {Src} to {Tgt}.\n{Src}: {src}\n{Aux}: {aux}\n{Tgt}: {tgt}
//! CPT:  [{SRC}2{TGT}] {src} [{TGT}] {tgt}
//! mono: {text}
//! ```
//!
//! Generation prompts are the same strings with an empty target and an empty
//! loss span at the end of the text.

use alloc::format;
use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::lang::{Registry, RegistryError};
use crate::record::{DirectionalExample, RecordError};

pub const PROMPT_SCHEMA: &str = "prompt_schema_v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PromptFormat {
    #[serde(rename = "STP")]
    Stp,
    #[serde(rename = "PMP")]
    Pmp,
    #[serde(rename = "CPT_BILINGUAL")]
    CptBilingual,
    #[serde(rename = "CPT_MONO")]
    CptMono,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("unknown language {0:?}")]
    UnknownLanguage(String),
    #[error("source text is empty")]
    EmptySource,
    #[error("target text is empty")]
    EmptyTarget,
    #[error("auxiliary text is empty")]
    EmptyAuxiliary,
    #[error("no auxiliary language is defined for {0}")]
    NoAuxiliaryDefined(String),
    #[error("auxiliary for {direction} is {expected:?}, got {got:?}")]
    AuxiliaryMismatch {
        direction: String,
        expected: String,
        got: String,
    },
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error("not a bilingual CPT string: {0}")]
    Unparseable(&'static str),
}

impl From<RegistryError> for PromptError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::UnknownLanguage(c) => PromptError::UnknownLanguage(c),
            other => PromptError::UnknownLanguage(other.to_string()),
        }
    }
}

/// A rendered string with the byte range the trainer computes loss over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptedExample {
    pub text: String,
    pub loss_start: usize,
    pub loss_end: usize,
    pub format: PromptFormat,
    pub src_lang: String,
    pub tgt_lang: String,
    pub aux_lang: Option<String>,
    pub id: String,
    pub prompt_schema: String,
}

impl PromptedExample {
    pub fn loss_slice(&self) -> &str {
        &self.text[self.loss_start..self.loss_end]
    }

    /// Generation prompts carry an empty span at the end of the text.
    pub fn is_generation(&self) -> bool {
        self.loss_start == self.loss_end && self.loss_end == self.text.len()
    }

    pub fn direction(&self) -> Option<Direction> {
        Direction::new(&self.src_lang, &self.tgt_lang).ok()
    }
}

/// Loss coverage for bilingual CPT strings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossScope {
    #[default]
    Target,
    Full,
}

fn non_empty(text: &str, err: PromptError) -> Result<(), PromptError> {
    if text.is_empty() {
        Err(err)
    } else {
        Ok(())
    }
}

fn finish(
    mut text: String,
    tgt: &str,
    format: PromptFormat,
    direction: &Direction,
    aux_lang: Option<&str>,
    id: &str,
) -> PromptedExample {
    let loss_start = text.len();
    text.push_str(tgt);
    PromptedExample {
        loss_end: text.len(),
        text,
        loss_start,
        format,
        src_lang: direction.src().to_string(),
        tgt_lang: direction.tgt().to_string(),
        aux_lang: aux_lang.map(str::to_string),
        id: id.to_string(),
        prompt_schema: PROMPT_SCHEMA.to_string(),
    }
}

fn stp_prefix(registry: &Registry, direction: &Direction, src: &str) -> Result<String, PromptError> {
    let src_name = registry.name_of(direction.src())?;
    let tgt_name = registry.name_of(direction.tgt())?;
    Ok(format!(
        "Translate the following text from {src_name} to {tgt_name}.\n{src_name}: {src}\n{tgt_name}: "
    ))
}

fn pmp_prefix(
    registry: &Registry,
    direction: &Direction,
    src: &str,
    aux_lang: &str,
    aux_text: &str,
) -> Result<String, PromptError> {
    let expected = registry
        .auxiliary_for(direction)
        .ok_or_else(|| PromptError::NoAuxiliaryDefined(direction.to_string()))?;
    if expected != aux_lang {
        return Err(PromptError::AuxiliaryMismatch {
            direction: direction.to_string(),
            expected: expected.to_string(),
            got: aux_lang.to_string(),
        });
    }
    non_empty(aux_text, PromptError::EmptyAuxiliary)?;
    let src_name = registry.name_of(direction.src())?;
    let tgt_name = registry.name_of(direction.tgt())?;
    let aux_name = registry.name_of(aux_lang)?;
    Ok(format!(
        "Translate the following text from {src_name} to {tgt_name}.\n{src_name}: {src}\n{aux_name}: {aux_text}\n{tgt_name}: "
    ))
}

/// Standard translation prompt for a training pair.
pub fn render_stp(registry: &Registry, example: &DirectionalExample) -> Result<PromptedExample, PromptError> {
    let direction = example.direction()?;
    non_empty(&example.src, PromptError::EmptySource)?;
    non_empty(&example.tgt, PromptError::EmptyTarget)?;
    let prefix = stp_prefix(registry, &direction, &example.src)?;
    Ok(finish(prefix, &example.tgt, PromptFormat::Stp, &direction, None, &example.id))
}

/// Parallel multilingual prompt: the STP layout with an auxiliary line
/// between the source and the target.
pub fn render_pmp(
    registry: &Registry,
    example: &DirectionalExample,
    aux_text: &str,
    aux_lang: &str,
) -> Result<PromptedExample, PromptError> {
    let direction = example.direction()?;
    non_empty(&example.src, PromptError::EmptySource)?;
    non_empty(&example.tgt, PromptError::EmptyTarget)?;
    let prefix = pmp_prefix(registry, &direction, &example.src, aux_lang, aux_text)?;
    Ok(finish(
        prefix,
        &example.tgt,
        PromptFormat::Pmp,
        &direction,
        Some(aux_lang),
        &example.id,
    ))
}

/// STP prompt without a target, for inference.
pub fn stp_generation_prompt(
    registry: &Registry,
    direction: &Direction,
    src: &str,
    id: &str,
) -> Result<PromptedExample, PromptError> {
    non_empty(src, PromptError::EmptySource)?;
    let prefix = stp_prefix(registry, direction, src)?;
    Ok(finish(prefix, "", PromptFormat::Stp, direction, None, id))
}

/// PMP prompt without a target, for inference.
pub fn pmp_generation_prompt(
    registry: &Registry,
    direction: &Direction,
    src: &str,
    aux_lang: &str,
    aux_text: &str,
    id: &str,
) -> Result<PromptedExample, PromptError> {
    non_empty(src, PromptError::EmptySource)?;
    let prefix = pmp_prefix(registry, direction, src, aux_lang, aux_text)?;
    Ok(finish(prefix, "", PromptFormat::Pmp, direction, Some(aux_lang), id))
}

/// Informative CPT formatting: `[EN2ZH] src [ZH] tgt`.
pub fn render_cpt_bilingual(
    example: &DirectionalExample,
    scope: LossScope,
) -> Result<PromptedExample, PromptError> {
    let direction = example.direction()?;
    non_empty(&example.src, PromptError::EmptySource)?;
    non_empty(&example.tgt, PromptError::EmptyTarget)?;
    let src_tag = direction.src().to_uppercase();
    let tgt_tag = direction.tgt().to_uppercase();
    let prefix = format!("[{src_tag}2{tgt_tag}] {} [{tgt_tag}] ", example.src);
    let mut out = finish(
        prefix,
        &example.tgt,
        PromptFormat::CptBilingual,
        &direction,
        None,
        &example.id,
    );
    if scope == LossScope::Full {
        out.loss_start = 0;
    }
    Ok(out)
}

/// Raw monolingual text; loss covers all of it.
pub fn render_cpt_mono(lang: &str, text: &str, id: &str) -> Result<PromptedExample, PromptError> {
    non_empty(text, PromptError::EmptySource)?;
    Ok(PromptedExample {
        text: text.to_string(),
        loss_start: 0,
        loss_end: text.len(),
        format: PromptFormat::CptMono,
        src_lang: lang.to_string(),
        tgt_lang: lang.to_string(),
        aux_lang: None,
        id: id.to_string(),
        prompt_schema: PROMPT_SCHEMA.to_string(),
    })
}

/// Fields recovered from a bilingual CPT string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCpt {
    pub direction: Direction,
    pub src: String,
    pub tgt: String,
}

/// Inverse of [`render_cpt_bilingual`]. The source ends at the first
/// ` [TGT] ` separator, so sources containing that marker do not round-trip.
pub fn parse_cpt_bilingual(text: &str) -> Result<ParsedCpt, PromptError> {
    let rest = text
        .strip_prefix('[')
        .ok_or(PromptError::Unparseable("missing direction tag"))?;
    let (tag, rest) = rest
        .split_once("] ")
        .ok_or(PromptError::Unparseable("unterminated direction tag"))?;
    let (src_tag, tgt_tag) = tag
        .split_once('2')
        .ok_or(PromptError::Unparseable("direction tag lacks '2'"))?;
    let separator = format!(" [{tgt_tag}] ");
    let (src, tgt) = rest
        .split_once(separator.as_str())
        .ok_or(PromptError::Unparseable("missing target separator"))?;
    let direction = Direction::new(&src_tag.to_lowercase(), &tgt_tag.to_lowercase())?;
    Ok(ParsedCpt {
        direction,
        src: src.to_string(),
        tgt: tgt.to_string(),
    })
}
