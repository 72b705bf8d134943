#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

pub fn mtforge() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mtforge"))
}

pub fn mock_cmd(args: &str) -> String {
    format!("'{}' {args}", env!("CARGO_BIN_EXE_mtforge-mock"))
}

pub fn run(args: &[&str], cwd: &Path) -> Output {
    mtforge().args(args).current_dir(cwd).output().expect("spawn mtforge")
}

pub fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

pub fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("tempdir")
}

pub fn join(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// splitmix64, enough randomness for fixtures without pulling in an RNG crate.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    /// Mixed-script text from `alphabet`, 1..=max_words words.
    pub fn text(&mut self, alphabet: &[char], max_words: usize) -> String {
        let words = 1 + self.below(max_words);
        (0..words)
            .map(|_| {
                let len = 1 + self.below(6);
                (0..len).map(|_| *self.pick(alphabet)).collect::<String>()
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Letters from several scripts, plus a tab, a newline and a quote.
pub const ALPHABET: &[char] = &[
    'a', 'b', 'k', 'z', 'é', 'ß', 'ж', 'я', 'ع', 'ש', '中', '文', 'の', 'ก', 'ह', '😀', '"', '\\', '\t', '\n', ':',
];
