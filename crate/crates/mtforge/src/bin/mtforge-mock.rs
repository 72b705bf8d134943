//! Deterministic stand-ins for a QE scorer and a translation backend that
//! speak the line protocol. Useful for smoke runs and tests.
//!
//!   mtforge-mock scorer
//!   mtforge-mock backend identity|upper [--fail-every N]
//!   mtforge-mock backend dict FILE

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mtforge::process::{ScoreResponse, TranslateResponse};
use mtforge_core::hash::{fnv1a64, unit};
use mtforge_core::synth::{DictionaryBackend, TranslationBackend};
use serde::Deserialize;

#[derive(Parser)]
struct Args {
    #[command(subcommand)]
    role: Role,
}

#[derive(Subcommand)]
enum Role {
    /// Score = FNV-1a of src and tgt mapped onto [0, 1)
    Scorer,
    Backend {
        #[arg(value_enum)]
        kind: Kind,
        /// Dictionary file: {"src","tgt","words":{...}} per line
        file: Option<String>,
        /// Answer every Nth request with an error
        #[arg(long)]
        fail_every: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Identity,
    Upper,
    Dict,
}

#[derive(Deserialize)]
struct ScoreRequest {
    id: String,
    src: String,
    tgt: String,
}

#[derive(Deserialize)]
struct TranslateRequest {
    id: String,
    src_lang: String,
    tgt_lang: String,
    text: String,
}

#[derive(Deserialize)]
struct DictLine {
    src: String,
    tgt: String,
    words: BTreeMap<String, String>,
}

fn serve<Q, A>(mut answer: impl FnMut(Q) -> A) -> Result<()>
where
    Q: serde::de::DeserializeOwned,
    A: serde::Serialize,
{
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: Q = serde_json::from_str(&line).with_context(|| format!("bad request {line:?}"))?;
        serde_json::to_writer(&mut stdout, &answer(request))?;
        stdout.write_all(b"\n")?;
        stdout.flush()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    match Args::parse().role {
        Role::Scorer => serve(|q: ScoreRequest| {
            let h = fnv1a64(format!("{}\t{}", q.src, q.tgt).as_bytes());
            ScoreResponse {
                id: q.id,
                qe_score: (unit(h) * 1000.0).floor() / 1000.0,
            }
        }),
        Role::Backend { kind, file, fail_every } => {
            let mut dict = DictionaryBackend::new();
            if let Kind::Dict = kind {
                let path = file.context("dict backend needs a dictionary file")?;
                let text = std::fs::read_to_string(&path).with_context(|| format!("reading {path}"))?;
                for line in text.lines().filter(|l| !l.trim().is_empty()) {
                    let d: DictLine = serde_json::from_str(line)?;
                    dict = dict.with_pair(&d.src, &d.tgt, d.words.iter().map(|(a, b)| (a.as_str(), b.as_str())));
                }
            } else if file.is_some() {
                bail!("only the dict backend takes a file");
            }
            let mut n = 0u64;
            serve(move |q: TranslateRequest| {
                n += 1;
                let result = if fail_every.is_some_and(|k| k > 0 && n.is_multiple_of(k)) {
                    Err("injected failure".to_string())
                } else {
                    match kind {
                        Kind::Identity => Ok(q.text.clone()),
                        Kind::Upper => Ok(q.text.to_uppercase()),
                        Kind::Dict => dict
                            .translate(&q.src_lang, &q.tgt_lang, &q.text)
                            .map_err(|e| e.message),
                    }
                };
                match result {
                    Ok(text) => TranslateResponse {
                        id: q.id,
                        text: Some(text),
                        error: None,
                    },
                    Err(error) => TranslateResponse {
                        id: q.id,
                        text: None,
                        error: Some(error),
                    },
                }
            })
        }
    }
}
