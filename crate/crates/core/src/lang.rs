//! Language metadata: codes, display names, resource tiers and the
//! auxiliary-language table used by parallel multilingual prompting.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::{is_center, CENTERS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    #[serde(alias = "high")]
    High,
    #[serde(alias = "Mid", alias = "medium", alias = "mid")]
    Medium,
    #[serde(alias = "low")]
    Low,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::High, Tier::Medium, Tier::Low];

    pub fn as_str(self) -> &'static str {
        match self {
            Tier::High => "High",
            Tier::Medium => "Medium",
            Tier::Low => "Low",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Language {
    pub code: String,
    pub name: String,
    pub script: String,
    pub family: String,
    pub tier: Tier,
}

/// One `{"lang","aux"}` row of the auxiliary table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxiliaryEntry {
    pub lang: String,
    pub aux: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("duplicate language code {0:?}")]
    DuplicateLanguage(String),
    #[error("center language {0:?} missing from registry")]
    MissingCenter(String),
    #[error("unknown language {0:?}")]
    UnknownLanguage(String),
    #[error("invalid language code {0:?}: codes must be non-empty and lowercase")]
    InvalidCode(String),
    #[error("auxiliary row for {lang:?} is invalid: {reason}")]
    InvalidAuxiliary { lang: String, reason: &'static str },
}

/// Immutable set of languages plus the auxiliary map.
#[derive(Debug, Clone)]
pub struct Registry {
    languages: Vec<Language>,
    index: BTreeMap<String, usize>,
    auxiliaries: BTreeMap<String, String>,
}

impl Registry {
    /// Validates and freezes a language table and auxiliary rows.
    pub fn new(
        languages: Vec<Language>,
        auxiliaries: Vec<AuxiliaryEntry>,
    ) -> Result<Self, RegistryError> {
        let mut index = BTreeMap::new();
        for (i, lang) in languages.iter().enumerate() {
            if !valid_code(&lang.code) {
                return Err(RegistryError::InvalidCode(lang.code.clone()));
            }
            if index.insert(lang.code.clone(), i).is_some() {
                return Err(RegistryError::DuplicateLanguage(lang.code.clone()));
            }
        }
        for center in CENTERS {
            if !index.contains_key(center) {
                return Err(RegistryError::MissingCenter(center.to_string()));
            }
        }

        let mut aux_map = BTreeMap::new();
        for entry in auxiliaries {
            let bad = |reason| RegistryError::InvalidAuxiliary {
                lang: entry.lang.clone(),
                reason,
            };
            if !index.contains_key(&entry.lang) {
                return Err(RegistryError::UnknownLanguage(entry.lang.clone()));
            }
            if !index.contains_key(&entry.aux) {
                return Err(RegistryError::UnknownLanguage(entry.aux.clone()));
            }
            if is_center(&entry.lang) {
                return Err(bad("center languages take no auxiliary"));
            }
            if is_center(&entry.aux) || entry.aux == entry.lang {
                return Err(bad("auxiliary must differ from the centers and the language itself"));
            }
            if aux_map.insert(entry.lang.clone(), entry.aux.clone()).is_some() {
                return Err(bad("duplicate auxiliary row"));
            }
        }

        Ok(Registry {
            languages,
            index,
            auxiliaries: aux_map,
        })
    }

    /// The 60-language table with its 19 auxiliary rows.
    pub fn builtin() -> Self {
        let languages = BUILTIN_LANGUAGES
            .iter()
            .map(|&(code, name, script, family, tier)| Language {
                code: code.into(),
                name: name.into(),
                script: script.into(),
                family: family.into(),
                tier,
            })
            .collect();
        let aux = BUILTIN_AUXILIARIES
            .iter()
            .map(|&(lang, aux)| AuxiliaryEntry {
                lang: lang.into(),
                aux: aux.into(),
            })
            .collect();
        Registry::new(languages, aux).expect("built-in registry is valid")
    }

    /// Languages in table order.
    pub fn languages(&self) -> &[Language] {
        &self.languages
    }

    pub fn len(&self) -> usize {
        self.languages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.languages.is_empty()
    }

    pub fn contains(&self, code: &str) -> bool {
        self.index.contains_key(code)
    }

    pub fn get(&self, code: &str) -> Result<&Language, RegistryError> {
        self.index
            .get(code)
            .map(|&i| &self.languages[i])
            .ok_or_else(|| RegistryError::UnknownLanguage(code.to_string()))
    }

    pub fn tier_of(&self, code: &str) -> Result<Tier, RegistryError> {
        self.get(code).map(|l| l.tier)
    }

    pub fn name_of(&self, code: &str) -> Result<&str, RegistryError> {
        self.get(code).map(|l| l.name.as_str())
    }

    /// Number of languages per tier, as `(high, medium, low)`.
    pub fn tier_counts(&self) -> (usize, usize, usize) {
        tier_counts(self.languages.iter().map(|l| l.tier))
    }

    /// Auxiliary table rows, sorted by language code.
    pub fn auxiliaries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.auxiliaries
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Auxiliary language for a center-involving direction.
    ///
    /// English-centric directions use the table row of the non-English side;
    /// Chinese-centric directions always anchor on English. The en/zh pair
    /// itself, and English-centric languages without a row, get `None`.
    pub fn auxiliary_for(&self, direction: &Direction) -> Option<&str> {
        let (src, tgt) = (direction.src(), direction.tgt());
        if is_center(src) && is_center(tgt) {
            return None;
        }
        if src == "en" || tgt == "en" {
            let other = if src == "en" { tgt } else { src };
            return self.auxiliaries.get(other).map(String::as_str);
        }
        if src == "zh" || tgt == "zh" {
            return Some("en");
        }
        None
    }
}

pub(crate) fn tier_counts(tiers: impl Iterator<Item = Tier>) -> (usize, usize, usize) {
    tiers.fold((0, 0, 0), |(h, m, l), t| match t {
        Tier::High => (h + 1, m, l),
        Tier::Medium => (h, m + 1, l),
        Tier::Low => (h, m, l + 1),
    })
}

fn valid_code(code: &str) -> bool {
    !code.is_empty()
        && code
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
}

use Tier::{High, Low, Medium};

#[rustfmt::skip]
const BUILTIN_LANGUAGES: [(&str, &str, &str, &str, Tier); 60] = [
    ("en", "English", "Latin", "Indo-European", High),
    ("ar", "Arabic", "Arabic", "Afro-Asiatic", High),
    ("es", "Spanish", "Latin", "Indo-European", High),
    ("de", "German", "Latin", "Indo-European", High),
    ("fr", "French", "Latin", "Indo-European", High),
    ("it", "Italian", "Latin", "Indo-European", High),
    ("ja", "Japanese", "Japanese", "Japonic", High),
    ("nl", "Dutch", "Latin", "Indo-European", High),
    ("pl", "Polish", "Latin", "Indo-European", High),
    ("pt", "Portuguese", "Latin", "Indo-European", High),
    ("ru", "Russian", "Cyrillic", "Indo-European", High),
    ("tr", "Turkish", "Latin", "Turkic", High),
    ("zh", "Chinese", "Han", "Sino-Tibetan", High),
    ("bg", "Bulgarian", "Cyrillic", "Indo-European", Medium),
    ("bn", "Bengali", "Bengali", "Indo-European", Medium),
    ("cs", "Czech", "Latin", "Indo-European", Medium),
    ("da", "Danish", "Latin", "Indo-European", Medium),
    ("el", "Modern Greek", "Greek", "Indo-European", Medium),
    ("fa", "Persian", "Arabic", "Indo-European", Medium),
    ("fi", "Finnish", "Latin", "Uralic", Medium),
    ("hi", "Hindi", "Devanagari", "Indo-European", Medium),
    ("hu", "Hungarian", "Latin", "Uralic", Medium),
    ("id", "Indonesian", "Latin", "Austronesian", Medium),
    ("ko", "Korean", "Hangul", "Koreanic", Medium),
    ("no", "Norwegian", "Latin", "Indo-European", Medium),
    ("ro", "Romanian", "Latin", "Indo-European", Medium),
    ("sk", "Slovak", "Latin", "Indo-European", Medium),
    ("sv", "Swedish", "Latin", "Indo-European", Medium),
    ("th", "Thai", "Thai", "Tai-Kadai", Medium),
    ("uk", "Ukrainian", "Cyrillic", "Indo-European", Medium),
    ("vi", "Vietnamese", "Latin", "Austroasiatic", Medium),
    ("am", "Amharic", "Ge'ez", "Afro-Asiatic", Low),
    ("az", "Azerbaijani", "Latin", "Turkic", Low),
    ("bo", "Tibetan", "Tibetan", "Sino-Tibetan", Low),
    ("he", "Modern Hebrew", "Hebrew", "Afro-Asiatic", Low),
    ("hr", "Croatian", "Latin", "Indo-European", Low),
    ("hy", "Armenian", "Armenian", "Indo-European", Low),
    ("is", "Icelandic", "Latin", "Indo-European", Low),
    ("jv", "Javanese", "Latin", "Austronesian", Low),
    ("ka", "Georgian", "Georgian", "Kartvelian", Low),
    ("kk", "Kazakh", "Cyrillic", "Turkic", Low),
    ("km", "Central Khmer", "Khmer", "Austroasiatic", Low),
    ("ky", "Kirghiz", "Cyrillic", "Turkic", Low),
    ("lo", "Lao", "Lao", "Tai-Kadai", Low),
    ("mn_cn", "Chinese Mongolian", "Mongolian", "Mongolic", Low),
    ("mr", "Marathi", "Devanagari", "Indo-European", Low),
    ("ms", "Malay", "Latin", "Austronesian", Low),
    ("my", "Burmese", "Myanmar", "Sino-Tibetan", Low),
    ("ne", "Nepali", "Devanagari", "Indo-European", Low),
    ("ps", "Pashto", "Arabic", "Indo-European", Low),
    ("si", "Sinhala", "Sinhala", "Indo-European", Low),
    ("sw", "Swahili", "Latin", "Atlantic-Congo", Low),
    ("ta", "Tamil", "Tamil", "Dravidian", Low),
    ("te", "Telugu", "Telugu", "Dravidian", Low),
    ("tg", "Tajik", "Cyrillic", "Indo-European", Low),
    ("tl", "Tagalog", "Latin", "Austronesian", Low),
    ("ug", "Uighur", "Arabic", "Turkic", Low),
    ("ur", "Urdu", "Arabic", "Indo-European", Low),
    ("uz", "Uzbek", "Latin", "Turkic", Low),
    ("yue", "Yue Chinese", "Han", "Sino-Tibetan", Low),
];

const BUILTIN_AUXILIARIES: [(&str, &str); 19] = [
    ("bg", "ru"),
    ("da", "de"),
    ("fa", "ar"),
    ("no", "de"),
    ("ro", "it"),
    ("sk", "cs"),
    ("sv", "de"),
    ("uk", "ru"),
    ("vi", "fr"),
    ("az", "tr"),
    ("hr", "pl"),
    ("is", "de"),
    ("kk", "ru"),
    ("ky", "ru"),
    ("ps", "ar"),
    ("tg", "ru"),
    ("tl", "es"),
    ("ur", "fa"),
    ("uz", "tr"),
];

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lang(code: &str, tier: Tier) -> Language {
        Language {
            code: code.into(),
            name: code.to_uppercase(),
            script: "Latin".into(),
            family: "Test".into(),
            tier,
        }
    }

    fn dir(s: &str, t: &str) -> Direction {
        Direction::new(s, t).unwrap()
    }

    #[test]
    fn builtin_shape() {
        let r = Registry::builtin();
        let medium_aux: Vec<&str> = r
            .auxiliaries()
            .filter(|(_, aux)| r.tier_of(aux) != Ok(Tier::High))
            .map(|(lang, _)| lang)
            .collect();
        assert_eq!(medium_aux, ["sk", "ur"]);
        assert_eq!(r.len(), 60);
        assert_eq!(r.tier_counts(), (13, 18, 29));
        assert_eq!(r.auxiliaries().count(), 19);
        assert!(r.contains("en") && r.contains("zh"));
    }

    #[test]
    fn tiers_of_known_languages() {
        let r = Registry::builtin();
        assert_eq!(r.tier_of("en"), Ok(Tier::High));
        assert_eq!(r.tier_of("bg"), Ok(Tier::Medium));
        assert_eq!(r.tier_of("ug"), Ok(Tier::Low));
        assert_eq!(
            r.tier_of("xx"),
            Err(RegistryError::UnknownLanguage("xx".into()))
        );
    }

    #[test]
    fn auxiliary_lookup_examples() {
        let r = Registry::builtin();
        assert_eq!(r.auxiliary_for(&dir("en", "bg")), Some("ru"));
        assert_eq!(r.auxiliary_for(&dir("zh", "kk")), Some("en"));
        assert_eq!(r.auxiliary_for(&dir("en", "ar")), None);
        assert_eq!(r.auxiliary_for(&dir("en", "zh")), None);
        assert_eq!(r.auxiliary_for(&dir("zh", "en")), None);
    }

    #[test]
    fn auxiliary_lookup_is_symmetric_and_never_a_center() {
        let r = Registry::builtin();
        for l in r.languages() {
            if l.code == "en" {
                continue;
            }
            let fwd = r.auxiliary_for(&dir("en", &l.code));
            assert_eq!(fwd, r.auxiliary_for(&dir(&l.code, "en")));
            assert!(fwd.is_none_or(|a| !is_center(a)));
            if l.code != "zh" {
                assert_eq!(r.auxiliary_for(&dir("zh", &l.code)), Some("en"));
                assert_eq!(r.auxiliary_for(&dir(&l.code, "zh")), Some("en"));
            }
        }
    }

    #[test]
    fn rejects_duplicates_and_missing_centers() {
        let dup = vec![
            lang("en", High),
            lang("zh", High),
            lang("fr", High),
            lang("fr", High),
        ];
        assert_eq!(
            Registry::new(dup, vec![]).unwrap_err(),
            RegistryError::DuplicateLanguage("fr".into())
        );
        let no_zh = vec![lang("en", High), lang("fr", High)];
        assert_eq!(
            Registry::new(no_zh, vec![]).unwrap_err(),
            RegistryError::MissingCenter("zh".into())
        );
        let upper = vec![lang("en", High), lang("zh", High), lang("FR", High)];
        assert!(matches!(
            Registry::new(upper, vec![]),
            Err(RegistryError::InvalidCode(_))
        ));
    }

    #[test]
    fn rejects_bad_auxiliaries() {
        let langs = vec![
            lang("en", High),
            lang("zh", High),
            lang("ru", High),
            lang("bg", Medium),
            lang("uk", Medium),
        ];
        let row = |l: &str, a: &str| AuxiliaryEntry {
            lang: l.into(),
            aux: a.into(),
        };
        assert!(Registry::new(langs.clone(), vec![row("bg", "ru")]).is_ok());
        // medium-tier auxiliaries occur in the built-in table (sk->cs, ur->fa)
        assert!(Registry::new(langs.clone(), vec![row("bg", "uk")]).is_ok());
        assert!(Registry::new(langs.clone(), vec![row("bg", "bg")]).is_err());
        assert!(Registry::new(langs.clone(), vec![row("bg", "en")]).is_err());
        assert!(Registry::new(langs.clone(), vec![row("bg", "xx")]).is_err());
        assert!(Registry::new(langs, vec![row("bg", "ru"), row("bg", "ru")]).is_err());
    }
}
