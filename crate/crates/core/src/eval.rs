//! Resource-tier aggregation of per-direction metric scores.
//!
//! A cell is the unweighted mean over the directions of one class whose
//! non-center language belongs to one tier. The en/zh pair is placed on both
//! sides: `en->zh` counts as En->X (X = zh, high) and as X->Zh (X = en,
//! high), and likewise for `zh->en`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::lang::{tier_counts, Registry, RegistryError, Tier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "COMET22")]
    Comet22,
    #[serde(rename = "SacreBLEU")]
    SacreBleu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub model: String,
    pub src: String,
    pub tgt: String,
    pub metric: Metric,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EvalClass {
    EnToX,
    XToEn,
    ZhToX,
    XToZh,
}

impl EvalClass {
    pub const ALL: [EvalClass; 4] = [EvalClass::EnToX, EvalClass::XToEn, EvalClass::ZhToX, EvalClass::XToZh];

    pub fn label(self) -> &'static str {
        match self {
            EvalClass::EnToX => "En→X",
            EvalClass::XToEn => "X→En",
            EvalClass::ZhToX => "Zh→X",
            EvalClass::XToZh => "X→Zh",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

fn tier_index(t: Tier) -> usize {
    t as usize
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unknown language {0:?}")]
    UnknownLanguage(String),
    #[error("duplicate record for {model} {src}->{tgt} {metric:?}")]
    DuplicateRecord {
        model: String,
        src: String,
        tgt: String,
        metric: Metric,
    },
    #[error("metric value {value} for {model} {src}->{tgt} is outside [0, 100]")]
    InvalidValue {
        model: String,
        src: String,
        tgt: String,
        value: f64,
    },
    #[error("{src}->{tgt} is not a center-anchored direction")]
    InvalidDirection { src: String, tgt: String },
    #[error("model {0:?} has no records")]
    UnknownModel(String),
}

impl From<RegistryError> for EvalError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::UnknownLanguage(c) => EvalError::UnknownLanguage(c),
            other => EvalError::UnknownLanguage(other.to_string()),
        }
    }
}

/// Languages shared by two systems and their tier distribution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    pub languages: BTreeSet<String>,
    pub high: usize,
    pub medium: usize,
    pub low: usize,
}

impl Support {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.high, self.medium, self.low)
    }

    /// `59 (13/18/28)`-style descriptor.
    pub fn describe(&self) -> String {
        format!("{} ({}/{}/{})", self.languages.len(), self.high, self.medium, self.low)
    }
}

pub fn support_of<'a, I>(langs: I, registry: &Registry) -> Result<Support, EvalError>
where
    I: IntoIterator<Item = &'a String>,
{
    let languages: BTreeSet<String> = langs.into_iter().cloned().collect();
    let tiers = languages
        .iter()
        .map(|l| registry.tier_of(l))
        .collect::<Result<Vec<_>, _>>()?;
    let (high, medium, low) = tier_counts(tiers.into_iter());
    Ok(Support {
        languages,
        high,
        medium,
        low,
    })
}

pub fn intersect_support(
    a: &BTreeSet<String>,
    b: &BTreeSet<String>,
    registry: &Registry,
) -> Result<Support, EvalError> {
    for code in a.iter().chain(b) {
        registry.tier_of(code)?;
    }
    support_of(a.intersection(b), registry)
}

/// Whether the en/zh pair contributes to the X classes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenterPairPolicy {
    #[default]
    AsX,
    Exclude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub mean: f64,
    pub count: usize,
}

pub type TierRow = [[Option<Cell>; 4]; 3];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierTable {
    pub metric: Metric,
    pub support: Support,
    /// Rows in display order.
    pub rows: Vec<(String, TierRow)>,
}

impl TierTable {
    pub fn cell(&self, model: &str, tier: Tier, class: EvalClass) -> Option<Cell> {
        self.rows
            .iter()
            .find(|(m, _)| m == model)
            .and_then(|(_, row)| row[tier_index(tier)][class.index()])
    }

    /// Keeps the listed models, in the listed order.
    pub fn with_model_order(mut self, models: &[String]) -> Result<Self, EvalError> {
        let mut rows = Vec::with_capacity(models.len());
        for m in models {
            let pos = self
                .rows
                .iter()
                .position(|(name, _)| name == m)
                .ok_or_else(|| EvalError::UnknownModel(m.clone()))?;
            rows.push(self.rows.swap_remove(pos));
        }
        self.rows = rows;
        Ok(self)
    }
}

/// Classes a direction contributes to, with the non-center language of each.
pub fn classes_of<'a>(src: &'a str, tgt: &'a str, policy: CenterPairPolicy) -> Vec<(EvalClass, &'a str)> {
    let mut out = Vec::with_capacity(2);
    if src == tgt {
        return out;
    }
    let center_pair = matches!((src, tgt), ("en", "zh") | ("zh", "en"));
    if center_pair && policy == CenterPairPolicy::Exclude {
        return out;
    }
    if src == "en" {
        out.push((EvalClass::EnToX, tgt));
    }
    if tgt == "en" {
        out.push((EvalClass::XToEn, src));
    }
    if src == "zh" {
        out.push((EvalClass::ZhToX, tgt));
    }
    if tgt == "zh" {
        out.push((EvalClass::XToZh, src));
    }
    out
}

/// (tier, class) -> [(x, value)]
type CellMembers = BTreeMap<(usize, usize), Vec<(String, f64)>>;

/// Builds the tier table for one metric over the languages in `overlap`.
/// Records for other metrics, or whose non-center side lies outside the
/// overlap, do not contribute.
pub fn aggregate<I>(
    records: I,
    registry: &Registry,
    overlap: &Support,
    metric: Metric,
    policy: CenterPairPolicy,
) -> Result<TierTable, EvalError>
where
    I: IntoIterator<Item = EvalRecord>,
{
    let mut seen = BTreeSet::new();
    let mut members: BTreeMap<String, CellMembers> = BTreeMap::new();

    for r in records {
        registry.tier_of(&r.src)?;
        registry.tier_of(&r.tgt)?;
        if !(0.0..=100.0).contains(&r.value) {
            return Err(EvalError::InvalidValue {
                model: r.model,
                src: r.src,
                tgt: r.tgt,
                value: r.value,
            });
        }
        if classes_of(&r.src, &r.tgt, CenterPairPolicy::AsX).is_empty() {
            return Err(EvalError::InvalidDirection { src: r.src, tgt: r.tgt });
        }
        if !seen.insert((r.model.clone(), r.src.clone(), r.tgt.clone(), r.metric)) {
            return Err(EvalError::DuplicateRecord {
                model: r.model,
                src: r.src,
                tgt: r.tgt,
                metric: r.metric,
            });
        }
        if r.metric != metric {
            continue;
        }
        let cells = members.entry(r.model.clone()).or_default();
        for (class, x) in classes_of(&r.src, &r.tgt, policy) {
            if !overlap.languages.contains(x) {
                continue;
            }
            let tier = registry.tier_of(x)?;
            cells
                .entry((tier_index(tier), class.index()))
                .or_default()
                .push((x.to_string(), r.value));
        }
    }

    let rows = members
        .into_iter()
        .map(|(model, cells)| {
            let mut row: TierRow = [[None; 4]; 3];
            for ((t, c), mut values) in cells {
                // fixed summation order keeps the mean independent of input order
                values.sort_by(|a, b| a.0.cmp(&b.0));
                let sum: f64 = values.iter().map(|(_, v)| v).sum();
                row[t][c] = Some(Cell {
                    mean: sum / values.len() as f64,
                    count: values.len(),
                });
            }
            (model, row)
        })
        .collect();

    Ok(TierTable {
        metric,
        support: overlap.clone(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Markdown,
    Csv,
}

pub fn header_labels() -> Vec<String> {
    let mut labels = Vec::with_capacity(14);
    labels.push("Langs".to_string());
    labels.push("Model".to_string());
    for tier in Tier::ALL {
        for class in EvalClass::ALL {
            labels.push(format!("{} {}", tier.as_str(), class.label()));
        }
    }
    labels
}

fn format_cell(cell: Option<Cell>) -> String {
    cell.map_or_else(|| "-".to_string(), |c| format!("{:.2}", c.mean))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Renders with columns ordered tier-major (High, Medium, Low), each tier
/// listing En→X, X→En, Zh→X, X→Zh. Absent cells print as `-`.
pub fn render_table(table: &TierTable, format: TableFormat) -> String {
    let header = header_labels();
    let langs = table.support.describe();
    let mut out = String::new();
    let body: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|(model, row)| {
            let mut fields = Vec::with_capacity(14);
            fields.push(langs.clone());
            fields.push(model.clone());
            for tier_row in row {
                for cell in tier_row {
                    fields.push(format_cell(*cell));
                }
            }
            fields
        })
        .collect();
    match format {
        TableFormat::Markdown => {
            let _ = writeln!(out, "| {} |", header.join(" | "));
            let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
            for fields in body {
                let _ = writeln!(out, "| {} |", fields.join(" | "));
            }
        }
        TableFormat::Csv => {
            let line = |fields: &[String]| {
                fields.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(",")
            };
            let _ = writeln!(out, "{}", line(&header));
            for fields in body {
                let _ = writeln!(out, "{}", line(&fields));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn rec(model: &str, src: &str, tgt: &str, value: f64) -> EvalRecord {
        EvalRecord {
            model: model.into(),
            src: src.into(),
            tgt: tgt.into(),
            metric: Metric::Comet22,
            value,
        }
    }

    fn set(codes: &[&str]) -> BTreeSet<String> {
        codes.iter().map(|c| c.to_string()).collect()
    }

    fn all_codes(reg: &Registry) -> BTreeSet<String> {
        reg.languages().iter().map(|l| l.code.clone()).collect()
    }

    #[test]
    fn support_intersections() {
        let reg = Registry::builtin();
        let all = all_codes(&reg);
        let mut nllb = all.clone();
        nllb.remove("mn_cn");
        let s = intersect_support(&all, &nllb, &reg).unwrap();
        assert_eq!(s.counts(), (13, 18, 28));
        assert_eq!(s.describe(), "59 (13/18/28)");

        let s = intersect_support(&all, &all, &reg).unwrap();
        assert_eq!(s.counts(), reg.tier_counts());
        assert_eq!(s.languages, all);

        let s = intersect_support(&set(&["en", "fr"]), &set(&["zh", "bg"]), &reg).unwrap();
        assert_eq!(s.counts(), (0, 0, 0));

        assert_eq!(
            intersect_support(&set(&["xx"]), &set(&["en"]), &reg),
            Err(EvalError::UnknownLanguage("xx".into()))
        );
    }

    #[test]
    fn center_pair_classes() {
        assert_eq!(
            classes_of("en", "zh", CenterPairPolicy::AsX),
            vec![(EvalClass::EnToX, "zh"), (EvalClass::XToZh, "en")]
        );
        assert_eq!(
            classes_of("zh", "en", CenterPairPolicy::AsX),
            vec![(EvalClass::XToEn, "zh"), (EvalClass::ZhToX, "en")]
        );
        assert!(classes_of("en", "zh", CenterPairPolicy::Exclude).is_empty());
        assert_eq!(classes_of("fr", "zh", CenterPairPolicy::Exclude), vec![(EvalClass::XToZh, "fr")]);
        assert!(classes_of("fr", "de", CenterPairPolicy::AsX).is_empty());
    }

    #[test]
    fn single_record_cell() {
        let reg = Registry::builtin();
        let sup = support_of(&all_codes(&reg), &reg).unwrap();
        let t = aggregate(vec![rec("m", "en", "bg", 91.28)], &reg, &sup, Metric::Comet22, CenterPairPolicy::AsX).unwrap();
        assert_eq!(t.cell("m", Tier::Medium, EvalClass::EnToX).unwrap().mean, 91.28);
        assert!(t.cell("m", Tier::High, EvalClass::EnToX).is_none());
    }

    #[test]
    fn errors() {
        let reg = Registry::builtin();
        let sup = support_of(&all_codes(&reg), &reg).unwrap();
        let agg = |rs: Vec<EvalRecord>| aggregate(rs, &reg, &sup, Metric::Comet22, CenterPairPolicy::AsX);
        assert!(matches!(
            agg(vec![rec("m", "en", "bg", 1.0), rec("m", "en", "bg", 2.0)]),
            Err(EvalError::DuplicateRecord { .. })
        ));
        assert!(matches!(agg(vec![rec("m", "en", "bg", 101.0)]), Err(EvalError::InvalidValue { .. })));
        assert!(matches!(agg(vec![rec("m", "fr", "bg", 50.0)]), Err(EvalError::InvalidDirection { .. })));
        assert!(matches!(agg(vec![rec("m", "en", "xx", 50.0)]), Err(EvalError::UnknownLanguage(_))));
        // same direction under another metric is not a duplicate
        let mut bleu = rec("m", "en", "bg", 30.0);
        bleu.metric = Metric::SacreBleu;
        assert!(agg(vec![rec("m", "en", "bg", 80.0), bleu]).is_ok());
    }

    #[test]
    fn overlap_restricts_members() {
        let reg = Registry::builtin();
        let sup = support_of(&set(&["en", "zh", "fr"]), &reg).unwrap();
        let t = aggregate(
            vec![rec("m", "en", "fr", 80.0), rec("m", "en", "de", 90.0), rec("m", "en", "zh", 70.0)],
            &reg,
            &sup,
            Metric::Comet22,
            CenterPairPolicy::AsX,
        )
        .unwrap();
        let c = t.cell("m", Tier::High, EvalClass::EnToX).unwrap();
        assert_eq!((c.mean, c.count), (75.0, 2));
        assert_eq!(t.cell("m", Tier::High, EvalClass::XToZh).unwrap().mean, 70.0);
    }

    #[test]
    fn render_formats() {
        let reg = Registry::builtin();
        let sup = support_of(&set(&["en", "zh", "fr"]), &reg).unwrap();
        let t = aggregate(vec![rec("LMT", "en", "fr", 89.1)], &reg, &sup, Metric::Comet22, CenterPairPolicy::AsX).unwrap();
        let md = render_table(&t, TableFormat::Markdown);
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("| Langs | Model | High En→X | High X→En |"));
        assert!(lines[2].starts_with("| 3 (3/0/0) | LMT | 89.10 | - |"));

        let csv_text = render_table(&t, TableFormat::Csv);
        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        let headers = reader.headers().unwrap().clone();
        assert_eq!(headers.len(), 14);
        let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
        assert_eq!(rows.len(), 1);
        assert_eq!(&rows[0][1], "LMT");
        assert_eq!(&rows[0][2], "89.10");
        assert_eq!(&rows[0][13], "-");
    }

    #[test]
    fn model_order() {
        let reg = Registry::builtin();
        let sup = support_of(&set(&["en", "zh", "fr"]), &reg).unwrap();
        let t = aggregate(
            vec![rec("b", "en", "fr", 1.0), rec("a", "en", "fr", 2.0)],
            &reg,
            &sup,
            Metric::Comet22,
            CenterPairPolicy::AsX,
        )
        .unwrap();
        let names: Vec<&str> = t.rows.iter().map(|(m, _)| m.as_str()).collect();
        assert_eq!(names, ["a", "b"]);
        let t2 = t.clone().with_model_order(&["b".into(), "a".into()]).unwrap();
        assert_eq!(t2.rows[0].0, "b");
        assert!(t.with_model_order(&["c".into()]).is_err());
    }
}
