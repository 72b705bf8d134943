//! Line-JSON subprocess protocol shared by external scorers and
//! translation backends: one request object per stdin line, one response
//! object per stdout line, in order, flushed after every line.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use mtforge_core::record::check_score;
use mtforge_core::synth::{BackendError, TranslationBackend};
use mtforge_core::{DirectionalExample, ScoredPair};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("failed to start {command:?}: {cause}")]
    Spawn { command: String, cause: std::io::Error },
    #[error("{command:?}: {message}")]
    Broken { command: String, message: String },
    #[error("{command:?} answered {got:?} to request {expected:?}")]
    IdMismatch {
        command: String,
        expected: String,
        got: String,
    },
    #[error("{command:?}: {message}")]
    BadResponse { command: String, message: String },
}

/// A child process run through `sh -c`, spoken to one line at a time.
pub struct LineProcess {
    command: String,
    child: Child,
    stdin: Option<BufWriter<ChildStdin>>,
    stdout: BufReader<ChildStdout>,
    buf: String,
}

impl LineProcess {
    pub fn spawn(command: &str) -> Result<Self, ProtocolError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|cause| ProtocolError::Spawn {
                command: command.to_string(),
                cause,
            })?;
        let stdin = child.stdin.take().map(BufWriter::new);
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(LineProcess {
            command: command.to_string(),
            child,
            stdin,
            stdout,
            buf: String::new(),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn broken(&self, message: impl ToString) -> ProtocolError {
        ProtocolError::Broken {
            command: self.command.clone(),
            message: message.to_string(),
        }
    }

    pub fn send<Q: Serialize>(&mut self, request: &Q) -> Result<(), ProtocolError> {
        let command = self.command.clone();
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| ProtocolError::Broken {
                command: command.clone(),
                message: "stdin already closed".into(),
            })?;
        let res = serde_json::to_writer(&mut *stdin, request)
            .map_err(|e| e.to_string())
            .and_then(|_| stdin.write_all(b"\n").map_err(|e| e.to_string()))
            .and_then(|_| stdin.flush().map_err(|e| e.to_string()));
        res.map_err(|message| ProtocolError::Broken { command, message })
    }

    pub fn recv<A: DeserializeOwned>(&mut self) -> Result<A, ProtocolError> {
        self.buf.clear();
        let n = self.stdout.read_line(&mut self.buf).map_err(|e| self.broken(e))?;
        if n == 0 {
            return Err(self.broken("process closed its output"));
        }
        serde_json::from_str(self.buf.trim_end()).map_err(|e| ProtocolError::BadResponse {
            command: self.command.clone(),
            message: format!("{e} in {:?}", self.buf.trim_end()),
        })
    }

    /// Lock-step request and response.
    pub fn call<Q: Serialize, A: DeserializeOwned>(&mut self, request: &Q) -> Result<A, ProtocolError> {
        self.send(request)?;
        self.recv()
    }
}

impl Drop for LineProcess {
    fn drop(&mut self) {
        // closing stdin is the end-of-work signal
        self.stdin.take();
        let _ = self.child.wait();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest<'a> {
    pub id: &'a str,
    pub src_lang: &'a str,
    pub tgt_lang: &'a str,
    pub src: &'a str,
    pub tgt: &'a str,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub id: String,
    pub qe_score: f64,
}

/// External QE scorer.
pub struct ExternalScorer {
    process: LineProcess,
}

impl ExternalScorer {
    pub fn spawn(command: &str) -> Result<Self, ProtocolError> {
        Ok(ExternalScorer {
            process: LineProcess::spawn(command)?,
        })
    }

    pub fn score(&mut self, pair: &DirectionalExample) -> Result<ScoredPair, ProtocolError> {
        let response: ScoreResponse = self.process.call(&request_for(pair))?;
        self.accept(pair.clone(), response)
    }

    /// Scores a batch with requests written from a helper thread, so a
    /// scorer that reads ahead never blocks against a full pipe.
    pub fn score_all(&mut self, pairs: &[DirectionalExample]) -> Result<Vec<ScoredPair>, ProtocolError> {
        let process = &mut self.process;
        let command = process.command.clone();
        let mut stdin = process
            .stdin
            .take()
            .ok_or_else(|| process.broken("stdin already closed"))?;
        let (child, stdout) = (&mut process.child, &mut process.stdout);

        let (written, mut responses) = std::thread::scope(|scope| {
            let writer = scope.spawn(move || -> Result<BufWriter<ChildStdin>, String> {
                for pair in pairs {
                    serde_json::to_writer(&mut stdin, &request_for(pair)).map_err(|e| e.to_string())?;
                    stdin.write_all(b"\n").map_err(|e| e.to_string())?;
                    stdin.flush().map_err(|e| e.to_string())?;
                }
                Ok(stdin)
            });
            let mut responses = Vec::with_capacity(pairs.len());
            let mut line = String::new();
            for _ in pairs {
                line.clear();
                let response = match stdout.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => serde_json::from_str::<ScoreResponse>(line.trim_end()).map_err(|e| {
                        ProtocolError::BadResponse {
                            command: command.clone(),
                            message: format!("{e} in {:?}", line.trim_end()),
                        }
                    }),
                    Err(e) => Err(ProtocolError::Broken {
                        command: command.clone(),
                        message: e.to_string(),
                    }),
                };
                let failed = response.is_err();
                responses.push(response);
                if failed {
                    // the writer may be blocked on a process that stopped reading
                    let _ = child.kill();
                    break;
                }
            }
            if responses.len() < pairs.len() {
                let _ = child.kill();
            }
            (writer.join().expect("writer thread"), responses)
        });

        if let Some(Err(_)) = responses.last() {
            return Err(responses.pop().and_then(Result::err).expect("last response is an error"));
        }
        match written {
            Ok(stdin) => self.process.stdin = Some(stdin),
            Err(message) => return Err(self.process.broken(message)),
        }
        if responses.len() < pairs.len() {
            return Err(self.process.broken(format!(
                "process closed its output after {} of {} responses",
                responses.len(),
                pairs.len()
            )));
        }
        pairs
            .iter()
            .zip(responses)
            .map(|(pair, response)| self.accept(pair.clone(), response?))
            .collect()
    }

    fn accept(&self, pair: DirectionalExample, response: ScoreResponse) -> Result<ScoredPair, ProtocolError> {
        if response.id != pair.id {
            return Err(ProtocolError::IdMismatch {
                command: self.process.command.clone(),
                expected: pair.id,
                got: response.id,
            });
        }
        check_score(&response.id, response.qe_score).map_err(|e| ProtocolError::BadResponse {
            command: self.process.command.clone(),
            message: e.to_string(),
        })?;
        Ok(ScoredPair {
            example: pair,
            qe_score: response.qe_score,
        })
    }
}

fn request_for(pair: &DirectionalExample) -> ScoreRequest<'_> {
    ScoreRequest {
        id: &pair.id,
        src_lang: &pair.src_lang,
        tgt_lang: &pair.tgt_lang,
        src: &pair.src,
        tgt: &pair.tgt,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateRequest<'a> {
    pub id: &'a str,
    pub src_lang: &'a str,
    pub tgt_lang: &'a str,
    pub text: &'a str,
}

/// Either `text` or `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslateResponse {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Translation backend behind the line protocol. Requests are numbered
/// `q0`, `q1`, ... and responses must echo the number.
pub struct SubprocessBackend {
    process: LineProcess,
    next_id: u64,
}

impl SubprocessBackend {
    pub fn spawn(command: &str) -> Result<Self, ProtocolError> {
        Ok(SubprocessBackend {
            process: LineProcess::spawn(command)?,
            next_id: 0,
        })
    }
}

impl TranslationBackend for SubprocessBackend {
    fn translate(&mut self, src_lang: &str, tgt_lang: &str, text: &str) -> Result<String, BackendError> {
        let id = format!("q{}", self.next_id);
        self.next_id += 1;
        let fail = |message: String| BackendError {
            src_lang: src_lang.to_string(),
            tgt_lang: tgt_lang.to_string(),
            message,
        };
        let request = TranslateRequest {
            id: &id,
            src_lang,
            tgt_lang,
            text,
        };
        let response: TranslateResponse = self.process.call(&request).map_err(|e| fail(e.to_string()))?;
        if response.id != id {
            return Err(fail(format!("response id {:?} does not match request {id:?}", response.id)));
        }
        match (response.text, response.error) {
            (_, Some(error)) => Err(fail(error)),
            (Some(text), None) if !text.is_empty() => Ok(text),
            (Some(_), None) => Err(fail("empty translation".into())),
            (None, None) => Err(fail("response has neither text nor error".into())),
        }
    }
}
