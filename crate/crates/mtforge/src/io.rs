//! Line-delimited JSON readers and writers for the corpus file formats.
//!
//! `.mwjsonl` holds multi-way records, `.djsonl` directional examples,
//! `.sjsonl` scored pairs and `.pjsonl` prompted examples. A path of `-`
//! means stdin or stdout.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::marker::PhantomData;
use std::path::Path;

use mtforge_core::lang::{AuxiliaryEntry, Language};
use mtforge_core::record::check_score;
use mtforge_core::{MultiWayRecord, Registry, RegistryError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {cause}")]
    Io { path: String, cause: io::Error },
    #[error("{path}:{line}: {message}")]
    Line {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("{path}: {cause}")]
    Registry { path: String, cause: RegistryError },
}

impl CorpusError {
    pub fn io(path: impl Into<String>, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.into(),
            cause: source,
        }
    }

    pub fn line(path: &str, line: usize, message: impl ToString) -> Self {
        CorpusError::Line {
            path: path.to_string(),
            line,
            message: message.to_string(),
        }
    }

    /// Line number for per-line failures.
    pub fn line_number(&self) -> Option<usize> {
        match self {
            CorpusError::Line { line, .. } => Some(*line),
            _ => None,
        }
    }
}

pub fn open_input(path: &str) -> Result<Box<dyn BufRead>, CorpusError> {
    if path == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    Ok(Box::new(BufReader::new(file)))
}

pub fn create_output(path: &str) -> Result<Box<dyn Write>, CorpusError> {
    if path == "-" {
        return Ok(Box::new(BufWriter::new(io::stdout())));
    }
    if let Some(parent) = Path::new(path).parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CorpusError::io(path, e))?;
    }
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    Ok(Box::new(BufWriter::new(file)))
}

/// Streams one value per non-blank line.
pub struct JsonlReader<R, T> {
    reader: R,
    name: String,
    line: usize,
    buf: String,
    _item: PhantomData<fn() -> T>,
}

impl<R: BufRead, T: DeserializeOwned> JsonlReader<R, T> {
    pub fn new(reader: R, name: impl Into<String>) -> Self {
        JsonlReader {
            reader,
            name: name.into(),
            line: 0,
            buf: String::new(),
            _item: PhantomData,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// 1-based number of the last line read.
    pub fn line(&self) -> usize {
        self.line
    }
}

impl<R: BufRead, T: DeserializeOwned> Iterator for JsonlReader<R, T> {
    type Item = Result<(usize, T), CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.reader.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => {
                    return Some(Err(CorpusError::line(&self.name, self.line + 1, e)));
                }
            }
            self.line += 1;
            let text = self.buf.trim_end_matches(['\n', '\r']);
            if text.trim().is_empty() {
                continue;
            }
            return Some(
                serde_json::from_str(text)
                    .map(|v| (self.line, v))
                    .map_err(|e| CorpusError::line(&self.name, self.line, e)),
            );
        }
    }
}

/// Reads a whole file of `T`, dropping line numbers.
pub fn read_jsonl<T: DeserializeOwned>(path: &str) -> Result<Vec<T>, CorpusError> {
    JsonlReader::new(open_input(path)?, path)
        .map(|r| r.map(|(_, v)| v))
        .collect()
}

/// Writes one compact JSON object per line and returns the count.
pub fn write_jsonl<T, I, W>(items: I, mut out: W, name: &str) -> Result<usize, CorpusError>
where
    T: Serialize,
    I: IntoIterator<Item = T>,
    W: Write,
{
    let mut n = 0;
    for item in items {
        write_line(&mut out, &item, name)?;
        n += 1;
    }
    out.flush().map_err(|e| CorpusError::io(name, e))?;
    Ok(n)
}

pub fn write_line<T: Serialize, W: Write>(out: &mut W, item: &T, name: &str) -> Result<(), CorpusError> {
    serde_json::to_writer(&mut *out, item).map_err(|e| CorpusError::File {
        path: name.to_string(),
        message: e.to_string(),
    })?;
    out.write_all(b"\n").map_err(|e| CorpusError::io(name, e))
}

/// Validating multi-way reader: each record must use registry languages,
/// carry non-empty sentences and an id not seen earlier in the stream.
pub struct MultiWayReader<'r, R> {
    inner: JsonlReader<R, MultiWayRecord>,
    registry: &'r Registry,
    seen: HashSet<String>,
}

pub fn read_multiway<'r, R: BufRead>(reader: R, name: &str, registry: &'r Registry) -> MultiWayReader<'r, R> {
    MultiWayReader {
        inner: JsonlReader::new(reader, name),
        registry,
        seen: HashSet::new(),
    }
}

impl<R: BufRead> Iterator for MultiWayReader<'_, R> {
    type Item = Result<MultiWayRecord, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, record) = match self.inner.next()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        let name = self.inner.name();
        if let Err(e) = record.validate(self.registry) {
            return Some(Err(CorpusError::line(name, line, e)));
        }
        if !self.seen.insert(record.id.clone()) {
            return Some(Err(CorpusError::line(name, line, format!("duplicate record id {:?}", record.id))));
        }
        Some(Ok(record))
    }
}

pub fn read_multiway_file(path: &str, registry: &Registry) -> Result<Vec<MultiWayRecord>, CorpusError> {
    read_multiway(open_input(path)?, path, registry).collect()
}

/// Streams directional examples, checking each against its invariants.
pub fn read_examples<R: BufRead>(
    reader: R,
    name: &str,
) -> impl Iterator<Item = Result<mtforge_core::DirectionalExample, CorpusError>> {
    let name_owned = name.to_string();
    JsonlReader::<R, mtforge_core::DirectionalExample>::new(reader, name).map(move |r| {
        let (line, ex) = r?;
        ex.validate().map_err(|e| CorpusError::line(&name_owned, line, e))?;
        Ok(ex)
    })
}

pub fn read_examples_file(path: &str) -> Result<Vec<mtforge_core::DirectionalExample>, CorpusError> {
    read_examples(open_input(path)?, path).collect()
}

pub fn write_examples<'a, I, W>(examples: I, out: W, name: &str) -> Result<usize, CorpusError>
where
    I: IntoIterator<Item = &'a mtforge_core::DirectionalExample>,
    W: Write,
{
    write_jsonl(examples, out, name)
}

/// One sidecar line. Full `.sjsonl` records also parse, extra fields are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreLine {
    pub id: String,
    pub qe_score: f64,
}

pub fn read_scores<R: BufRead>(reader: R, name: &str) -> Result<BTreeMap<String, f64>, CorpusError> {
    let mut scores = BTreeMap::new();
    for r in JsonlReader::<R, ScoreLine>::new(reader, name) {
        let (line, s) = r?;
        check_score(&s.id, s.qe_score).map_err(|e| CorpusError::line(name, line, e))?;
        if scores.insert(s.id.clone(), s.qe_score).is_some() {
            return Err(CorpusError::line(name, line, format!("duplicate score for {:?}", s.id)));
        }
    }
    Ok(scores)
}

pub fn read_scores_file(path: &str) -> Result<BTreeMap<String, f64>, CorpusError> {
    read_scores(open_input(path)?, path)
}

/// `builtin`, or a languages file with an optional auxiliary file.
pub fn load_registry(source: &str, aux: Option<&str>) -> Result<Registry, CorpusError> {
    let (languages, default_aux) = if source == "builtin" {
        let builtin = Registry::builtin();
        let aux = builtin
            .auxiliaries()
            .map(|(lang, aux)| AuxiliaryEntry {
                lang: lang.to_string(),
                aux: aux.to_string(),
            })
            .collect();
        (builtin.languages().to_vec(), aux)
    } else {
        (read_jsonl::<Language>(source)?, Vec::new())
    };
    let aux_rows = match aux {
        Some(path) => read_jsonl::<AuxiliaryEntry>(path)?,
        None => default_aux,
    };
    Registry::new(languages, aux_rows).map_err(|e| CorpusError::Registry {
        path: source.to_string(),
        cause: e,
    })
}
