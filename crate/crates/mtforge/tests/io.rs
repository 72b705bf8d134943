mod common;

use std::io::Cursor;

use common::{tempdir, Rng, ALPHABET};
use mtforge::io::{
    load_registry, read_examples, read_multiway, read_scores, write_examples, write_jsonl, CorpusError,
};
use mtforge_core::{Direction, DirectionalExample, MultiWayRecord, Provenance, Registry, RegistryError};
use proptest::prelude::*;

fn example_strategy() -> impl Strategy<Value = DirectionalExample> {
    let registry = Registry::builtin();
    let codes: Vec<String> = registry.languages().iter().map(|l| l.code.clone()).collect();
    (
        "[a-z0-9#]{1,12}",
        prop::sample::select(codes),
        any::<bool>(),
        any::<bool>(),
        "\\PC{1,40}",
        "\\PC{1,40}",
    )
        .prop_map(|(id, x, to_center, zh, src, tgt)| {
            let center = if x == "en" || (zh && x != "zh") { "zh" } else { "en" };
            let d = if to_center {
                Direction::new(&x, center).unwrap()
            } else {
                Direction::new(center, &x).unwrap()
            };
            DirectionalExample::from_record(&id, &d, src, tgt, Provenance::Human)
        })
}

proptest! {
    #[test]
    fn examples_round_trip(examples in prop::collection::vec(example_strategy(), 0..20)) {
        let mut buf = Vec::new();
        let n = write_examples(&examples, &mut buf, "mem").unwrap();
        prop_assert_eq!(n, examples.len());
        let back: Vec<_> = read_examples(Cursor::new(buf), "mem").collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(back, examples);
    }
}

#[test]
fn awkward_text_survives_a_round_trip() {
    let mut rng = Rng::new(11);
    let d = Direction::new("en", "ja").unwrap();
    let examples: Vec<_> = (0..200)
        .map(|i| {
            DirectionalExample::from_record(&format!("w{i}"), &d, rng.text(ALPHABET, 6), rng.text(ALPHABET, 6), Provenance::Human)
        })
        .collect();
    let mut buf = Vec::new();
    write_examples(&examples, &mut buf, "mem").unwrap();
    assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), examples.len());
    let back: Vec<_> = read_examples(Cursor::new(buf), "mem").collect::<Result<_, _>>().unwrap();
    assert_eq!(back, examples);
}

#[test]
fn multiway_errors_carry_line_numbers() {
    let registry = Registry::builtin();
    let good = r#"{"id":"a","sentences":{"en":"hi","de":"hallo"}}"#;
    let cases = [
        (format!("{good}\n\n{{\"id\":\"\",\"sentences\":{{\"en\":\"x\"}}}}\n"), 3, "empty"),
        (format!("{good}\n{{\"id\":\"b\",\"sentences\":{{\"xx\":\"x\"}}}}\n"), 2, "xx"),
        (format!("{good}\n{good}\n"), 2, "duplicate"),
        (format!("{good}\nnot json\n"), 2, ""),
    ];
    for (text, line, needle) in cases {
        let err = read_multiway(Cursor::new(text), "c.mwjsonl", &registry)
            .collect::<Result<Vec<MultiWayRecord>, _>>()
            .unwrap_err();
        assert_eq!(err.line_number(), Some(line), "{err}");
        let msg = err.to_string();
        assert!(msg.starts_with(&format!("c.mwjsonl:{line}:")), "{msg}");
        assert!(msg.contains(needle), "{msg}");
    }
}

#[test]
fn score_sidecar_is_checked() {
    let out_of_range = "{\"id\":\"a\",\"qe_score\":0.5}\n{\"id\":\"b\",\"qe_score\":1.2}\n";
    let err = read_scores(Cursor::new(out_of_range), "s").unwrap_err();
    assert_eq!(err.line_number(), Some(2));

    let dup = "{\"id\":\"a\",\"qe_score\":0.5}\n{\"id\":\"a\",\"qe_score\":0.6}\n";
    assert!(read_scores(Cursor::new(dup), "s").unwrap_err().to_string().contains("duplicate"));

    let ok = read_scores(Cursor::new("{\"id\":\"a\",\"qe_score\":1.0,\"src\":\"extra\"}\n"), "s").unwrap();
    assert_eq!(ok["a"], 1.0);
}

#[test]
fn empty_input_writes_nothing() {
    let mut buf = Vec::new();
    let n = write_jsonl(std::iter::empty::<&DirectionalExample>(), &mut buf, "mem").unwrap();
    assert_eq!(n, 0);
    assert!(buf.is_empty());
    assert_eq!(read_examples(Cursor::new(""), "mem").count(), 0);
}

#[test]
fn registry_files() {
    let dir = tempdir();
    let write = |name: &str, body: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let en = r#"{"code":"en","name":"English","script":"Latn","family":"Indo-European","tier":"High"}"#;
    let zh = r#"{"code":"zh","name":"Chinese","script":"Hans","family":"Sino-Tibetan","tier":"high"}"#;
    let de = r#"{"code":"de","name":"German","script":"Latn","family":"Indo-European","tier":"medium"}"#;

    let dup = write("dup.jsonl", &format!("{en}\n{zh}\n{en}\n"));
    assert!(matches!(
        load_registry(&dup, None),
        Err(CorpusError::Registry { cause: RegistryError::DuplicateLanguage(c), .. }) if c == "en"
    ));
    let no_zh = write("nozh.jsonl", &format!("{en}\n{de}\n"));
    assert!(matches!(
        load_registry(&no_zh, None),
        Err(CorpusError::Registry { cause: RegistryError::MissingCenter(c), .. }) if c == "zh"
    ));

    let nl = r#"{"code":"nl","name":"Dutch","script":"Latn","family":"Indo-European","tier":"Low"}"#;
    let ok = write("ok.jsonl", &format!("{en}\n{zh}\n{de}\n{nl}\n"));
    let aux = write("aux.jsonl", "{\"lang\":\"nl\",\"aux\":\"de\"}\n");
    let reg = load_registry(&ok, Some(&aux)).unwrap();
    assert_eq!(reg.languages().len(), 4);
    assert_eq!(reg.auxiliary_for(&Direction::new("en", "nl").unwrap()), Some("de"));
    assert_eq!(reg.auxiliary_for(&Direction::new("nl", "en").unwrap()), Some("de"));
    assert_eq!(reg.auxiliary_for(&Direction::new("en", "de").unwrap()), None);

    let builtin = load_registry("builtin", None).unwrap();
    assert_eq!(builtin.auxiliaries().count(), 19);
    let replaced = load_registry("builtin", Some(&write("one.jsonl", "{\"lang\":\"bg\",\"aux\":\"ru\"}\n"))).unwrap();
    assert_eq!(replaced.auxiliaries().count(), 1);
}

#[test]
fn missing_file_is_an_io_error() {
    let err = mtforge::io::read_examples_file("/nonexistent/x.djsonl").unwrap_err();
    assert!(matches!(err, CorpusError::Io { .. }));
}
