//! The work behind each subcommand, callable without the argument parser.
//!
//! Streaming stages read in fixed-size chunks, fan a chunk out over the
//! worker pool and write results back in input order, so output never
//! depends on the worker count.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use anyhow::{bail, Context, Result};
use mtforge_core::diagnostics::{RepetitionCounter, RepetitionStats};
use mtforge_core::downsample::DownsampleCounts;
use mtforge_core::eval::{
    aggregate, intersect_support, render_table, support_of, CenterPairPolicy, EvalRecord, Metric, TableFormat,
};
use mtforge_core::filter::{score_histogram, FilterReport, FilterRule, HeuristicFilter};
use mtforge_core::mixture::{build_direction, DirectionTally, Mixture, MixtureSpec, MixtureWarning};
use mtforge_core::synth::{
    build_inference_prompt, synth_direct, synth_pivot, InferenceInput, InferenceStrategy, MonoText, SynthFailure,
    TranslationBackend,
};
use mtforge_core::{
    enumerate_directions, expand as expand_record, Direction, DirectionalExample, MultiWayRecord, Registry,
    RetentionPolicy, ScoredPair,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{
    create_output, open_input, read_examples, read_examples_file, read_jsonl, read_multiway, read_multiway_file,
    read_scores_file, write_jsonl, write_line, CorpusError, JsonlReader,
};
use crate::process::{ExternalScorer, SubprocessBackend};

/// Records per chunk for streaming stages.
pub const CHUNK: usize = 4096;

/// Where the rule name for threshold rejections is tallied.
pub const THRESHOLD_RULE: &str = "qe_threshold";

/// Fixed-size thread pool; a single worker runs inline.
pub struct Workers {
    pool: Option<rayon::ThreadPool>,
    count: usize,
}

impl Workers {
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            bail!("--workers must be at least 1");
        }
        let pool = if count > 1 {
            Some(rayon::ThreadPoolBuilder::new().num_threads(count).build()?)
        } else {
            None
        };
        Ok(Workers { pool, count })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Order-preserving parallel map.
    pub fn map<T, U, F>(&self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        match &self.pool {
            Some(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            None => items.iter().map(f).collect(),
        }
    }
}

fn chunks<T, E>(iter: impl Iterator<Item = Result<T, E>>) -> impl Iterator<Item = Result<Vec<T>, E>> {
    let mut iter = iter.peekable();
    std::iter::from_fn(move || {
        iter.peek()?;
        let mut chunk = Vec::with_capacity(CHUNK);
        for item in iter.by_ref() {
            match item {
                Ok(v) => chunk.push(v),
                Err(e) => return Some(Err(e)),
            }
            if chunk.len() == CHUNK {
                break;
            }
        }
        Some(Ok(chunk))
    })
}

fn finish(mut out: Box<dyn Write>, path: &str) -> Result<()> {
    out.flush().map_err(|e| CorpusError::io(path, e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandSummary {
    pub records: usize,
    pub examples: usize,
}

pub fn expand(registry: &Registry, input: &str, output: &str, workers: &Workers) -> Result<ExpandSummary> {
    let dirset = enumerate_directions(registry)?;
    let mut out = create_output(output)?;
    let mut summary = ExpandSummary { records: 0, examples: 0 };
    for chunk in chunks(read_multiway(open_input(input)?, input, registry)) {
        let chunk = chunk?;
        summary.records += chunk.len();
        for batch in workers.map(&chunk, |r| expand_record(r, &dirset)) {
            for ex in &batch {
                write_line(&mut out, ex, output)?;
            }
            summary.examples += batch.len();
        }
    }
    finish(out, output)?;
    log::info!("expanded {} records into {} examples", summary.records, summary.examples);
    Ok(summary)
}

pub fn downsample(input: &str, output: &str, policy: RetentionPolicy, workers: &Workers) -> Result<DownsampleCounts> {
    let mut out = create_output(output)?;
    let mut counts = DownsampleCounts::default();
    for chunk in chunks(read_examples(open_input(input)?, input)) {
        let chunk = chunk?;
        log::debug!("downsampling a chunk of {}", chunk.len());
        let keep = workers.map(&chunk, |e| policy.retains(e));
        for (ex, kept) in chunk.iter().zip(keep) {
            counts.record(ex, kept);
            if kept {
                write_line(&mut out, ex, output)?;
            }
        }
    }
    finish(out, output)?;
    Ok(counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixSummary {
    pub directions: usize,
    pub emitted: usize,
    pub stp: usize,
    pub pmp: usize,
    pub tallies: Vec<DirectionTally>,
    pub warnings: Vec<MixtureWarning>,
}

pub fn build_mixture(
    registry: &Registry,
    records: &[MultiWayRecord],
    spec: &MixtureSpec,
    scores: Option<&BTreeMap<String, f64>>,
    workers: &Workers,
) -> Result<Mixture> {
    spec.validate()?;
    let dirset = enumerate_directions(registry)?;
    let batches = workers.map(dirset.directions(), |d| build_direction(records, registry, d, spec, scores));
    let mut mixture = Mixture::default();
    for batch in batches {
        mixture.push(batch?);
    }
    Ok(mixture)
}

pub fn mix(
    registry: &Registry,
    input: &str,
    scores: Option<&str>,
    spec: &MixtureSpec,
    output: &str,
    workers: &Workers,
) -> Result<MixSummary> {
    let records = read_multiway_file(input, registry)?;
    let scores = scores.map(read_scores_file).transpose()?;
    let mixture = build_mixture(registry, &records, spec, scores.as_ref(), workers)?;
    for w in &mixture.warnings {
        let MixtureWarning::UnderSupplied {
            direction,
            supply,
            minimum,
        } = w;
        log::warn!("{direction}: {supply} candidates, below the minimum of {minimum}");
    }
    write_jsonl(&mixture.examples, create_output(output)?, output)?;
    Ok(MixSummary {
        directions: mixture.tallies.len(),
        emitted: mixture.examples.len(),
        stp: mixture.tallies.iter().map(|t| t.stp).sum(),
        pmp: mixture.tallies.iter().map(|t| t.pmp).sum(),
        tallies: mixture.tallies,
        warnings: mixture.warnings,
    })
}

/// Settings for `filter`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSettings {
    pub rules: Vec<FilterRule>,
    pub scores: Option<String>,
    pub tau: f64,
    pub thresholds: Vec<f64>,
}

/// Heuristics, then (with scores) the QE threshold. Kept pairs go to
/// `output` as `.djsonl`, or `.sjsonl` when scores are attached.
pub fn filter(input: &str, output: &str, settings: &FilterSettings) -> Result<FilterReport> {
    mtforge_core::filter::check_threshold(settings.tau)?;
    let mut heuristics = HeuristicFilter::new(settings.rules.clone())?;
    let scores = settings.scores.as_deref().map(read_scores_file).transpose()?;
    let mut out = create_output(output)?;
    let mut passed_scores = Vec::new();
    let mut below = 0u64;

    // texts are not required to be non-empty here; that is a rule's job
    for item in JsonlReader::<_, DirectionalExample>::new(open_input(input)?, input) {
        let (line, ex) = item?;
        ex.direction().map_err(|e| CorpusError::line(input, line, e))?;
        if heuristics.check(&ex).is_some() {
            continue;
        }
        match &scores {
            None => write_line(&mut out, &ex, output)?,
            Some(scores) => {
                let score = *scores
                    .get(&ex.id)
                    .ok_or_else(|| mtforge_core::filter::FilterError::MissingScore(ex.id.clone()))?;
                let pair = ScoredPair::new(ex, score).map_err(mtforge_core::filter::FilterError::from)?;
                passed_scores.push(score);
                if pair.qe_score >= settings.tau {
                    write_line(&mut out, &pair, output)?;
                } else {
                    below += 1;
                }
            }
        }
    }
    finish(out, output)?;

    let mut report = heuristics.into_report();
    if scores.is_some() {
        report.kept -= below;
        report.rejected.insert(THRESHOLD_RULE.to_string(), below);
        report.histogram = score_histogram(passed_scores, &settings.thresholds)?;
    }
    Ok(report)
}

/// Scores pairs through an external scorer. With several workers the
/// input is cut into contiguous shards, one scorer process each.
pub fn score(input: &str, output: &str, scorer_cmd: &str, workers: &Workers) -> Result<usize> {
    let pairs = read_examples_file(input)?;
    let shard_len = pairs.len().div_ceil(workers.count()).max(1);
    let shards: Vec<&[DirectionalExample]> = pairs.chunks(shard_len).collect();
    let scored = workers.map(&shards, |shard| -> Result<Vec<ScoredPair>> {
        let mut scorer = ExternalScorer::spawn(scorer_cmd)?;
        Ok(scorer.score_all(shard)?)
    });
    let mut out = create_output(output)?;
    let mut n = 0;
    for shard in scored {
        for pair in shard? {
            write_line(&mut out, &pair, output)?;
            n += 1;
        }
    }
    finish(out, output)?;
    log::info!("scored {n} pairs with {} scorer processes", shards.len());
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthMode {
    Direct,
    Pivot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub attempted: usize,
    pub emitted: usize,
    pub failures: Vec<SynthFailure>,
}

/// Direct mode reads `{"id","lang","text"}` lines; pivot mode reads
/// En<->X directional examples.
pub fn synth(
    mode: SynthMode,
    input: &str,
    output: &str,
    backend: &mut dyn TranslationBackend,
    direction: Option<&Direction>,
) -> Result<SynthSummary> {
    let result = match mode {
        SynthMode::Direct => {
            let direction = direction.context("direct synthesis needs --src and --tgt")?;
            let mono = read_jsonl::<MonoText>(input)?;
            synth_direct(mono, backend, direction)?
        }
        SynthMode::Pivot => synth_pivot(read_examples_file(input)?, backend)?,
    };
    for f in &result.failures {
        log::error!("backend failed on {}: {}", f.id, f.message);
    }
    write_jsonl(&result.examples, create_output(output)?, output)?;
    Ok(SynthSummary {
        attempted: result.attempted,
        emitted: result.examples.len(),
        failures: result.failures,
    })
}

pub fn spawn_backend(command: &str) -> Result<SubprocessBackend> {
    Ok(SubprocessBackend::spawn(command)?)
}

/// One `infer-prompt` input line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferLine {
    pub id: String,
    pub src_lang: String,
    pub tgt_lang: String,
    pub src: String,
    /// Gold auxiliary sentence, used by PMP-O.
    #[serde(default)]
    pub aux: Option<String>,
}

pub fn infer_prompt(
    registry: &Registry,
    strategy: InferenceStrategy,
    input: &str,
    output: &str,
    mut backend: Option<&mut dyn TranslationBackend>,
) -> Result<usize> {
    let mut out = create_output(output)?;
    let mut n = 0;
    for item in JsonlReader::<_, InferLine>::new(open_input(input)?, input) {
        let (line, req) = item?;
        let direction = Direction::new(&req.src_lang, &req.tgt_lang).map_err(|e| CorpusError::line(input, line, e))?;
        let built = build_inference_prompt(
            strategy,
            InferenceInput {
                id: &req.id,
                direction: &direction,
                src: &req.src,
                gold_aux: req.aux.as_deref(),
            },
            registry,
            backend.as_mut().map(|b| &mut **b as &mut dyn TranslationBackend),
        )
        .map_err(|e| CorpusError::line(input, line, e))?;
        for prompt in built.prompts() {
            write_line(&mut out, prompt, output)?;
            n += 1;
        }
    }
    finish(out, output)?;
    Ok(n)
}

/// Settings for `eval`.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSettings {
    pub models: Option<Vec<String>>,
    pub langs: Option<Vec<String>>,
    pub intersect: Option<Vec<String>>,
    pub metric: Metric,
    pub center_pairs: CenterPairPolicy,
    pub format: TableFormat,
}

pub fn eval(registry: &Registry, records: &str, settings: &EvalSettings) -> Result<String> {
    let records = read_jsonl::<EvalRecord>(records)?;
    let langs: BTreeSet<String> = match &settings.langs {
        Some(l) => l.iter().cloned().collect(),
        None => registry.languages().iter().map(|l| l.code.clone()).collect(),
    };
    let support = match &settings.intersect {
        Some(other) => intersect_support(&langs, &other.iter().cloned().collect(), registry)?,
        None => support_of(&langs, registry)?,
    };
    let mut table = aggregate(records, registry, &support, settings.metric, settings.center_pairs)?;
    if let Some(models) = &settings.models {
        table = table.with_model_order(models)?;
    }
    Ok(render_table(&table, settings.format))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseReport {
    pub policy: Option<RetentionPolicy>,
    pub stats: RepetitionStats,
}

pub fn diagnose(input: &str, policy: Option<RetentionPolicy>, workers: &Workers) -> Result<DiagnoseReport> {
    let mut counter = RepetitionCounter::new();
    for chunk in chunks(read_examples(open_input(input)?, input)) {
        let chunk = chunk?;
        let shard_len = chunk.len().div_ceil(workers.count()).max(1);
        let shards: Vec<&[DirectionalExample]> = chunk.chunks(shard_len).collect();
        for shard in workers.map(&shards, |shard| {
            let mut c = RepetitionCounter::new();
            for e in shard.iter().filter(|e| policy.is_none_or(|p| p.retains(e))) {
                c.add(e);
            }
            c
        }) {
            counter.merge(shard);
        }
    }
    Ok(DiagnoseReport {
        policy,
        stats: counter.finish(),
    })
}
