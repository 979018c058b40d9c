//! Connective lexicons (French LexConn-style, English Knott-style), the
//! fine-label to PDTB-class mapping table, and the ambiguity-rule registry.
//!
//! All three resources are editable TSV files; bundled defaults cover the
//! connectives exercised by the test suites.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textmodel::{Language, Sentence};

/// The four PDTB top-level classes, plus the tagger-miss marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelationClass {
    Temporal,
    Comparison,
    Contingency,
    Expansion,
    /// Only ever produced by the English tagger to mean "no relation
    /// identified"; never a mapping target.
    NoRel,
}

impl fmt::Display for RelationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RelationClass::Temporal => "Temporal",
            RelationClass::Comparison => "Comparison",
            RelationClass::Contingency => "Contingency",
            RelationClass::Expansion => "Expansion",
            RelationClass::NoRel => "NoRel",
        };
        write!(f, "{s}")
    }
}

impl FromStr for RelationClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Temporal" => Ok(RelationClass::Temporal),
            "Comparison" => Ok(RelationClass::Comparison),
            "Contingency" => Ok(RelationClass::Contingency),
            "Expansion" => Ok(RelationClass::Expansion),
            "NoRel" => Ok(RelationClass::NoRel),
            other => Err(Error::Input(format!("unknown relation class: {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectiveEntry {
    /// Lowercase surface tokens, length >= 1.
    pub surface: Vec<String>,
    pub language: Language,
    /// Fine-grained relation labels; LexConn names for fr, class names or
    /// PDTB-style sense names for en. Non-empty; first entry is the default.
    pub senses: Vec<String>,
    /// Admissible POS tags for discourse usage; empty = unconstrained.
    pub pos_categories: Vec<String>,
}

impl ConnectiveEntry {
    /// Surface tokens joined with "_", e.g. "parce_que".
    pub fn joined(&self) -> String {
        self.surface.join("_")
    }
}

#[derive(Debug, Clone)]
pub struct Lexicon {
    pub language: Language,
    entries: Vec<ConnectiveEntry>,
    /// First surface token -> entry indices, for longest-match scanning.
    index: HashMap<String, Vec<usize>>,
    max_len: usize,
}

impl Lexicon {
    pub fn from_entries(language: Language, entries: Vec<ConnectiveEntry>) -> Result<Self> {
        let mut seen: HashMap<(Vec<String>, Vec<String>), ()> = HashMap::new();
        let mut index: HashMap<String, Vec<usize>> = HashMap::new();
        let mut max_len = 0;
        for (i, entry) in entries.iter().enumerate() {
            if entry.surface.is_empty() || entry.surface.iter().any(|t| t.is_empty()) {
                return Err(Error::Format(format!(
                    "entry {i}: empty surface token"
                )));
            }
            if entry.senses.is_empty() {
                return Err(Error::Format(format!(
                    "entry \"{}\": empty sense list",
                    entry.joined()
                )));
            }
            let key = (entry.surface.clone(), entry.senses.clone());
            if seen.insert(key, ()).is_some() {
                return Err(Error::Duplicate(entry.joined()));
            }
            index.entry(entry.surface[0].clone()).or_default().push(i);
            max_len = max_len.max(entry.surface.len());
        }
        Ok(Lexicon {
            language,
            entries,
            index,
            max_len,
        })
    }

    pub fn parse(text: &str, language: Language, source_name: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() < 2 || cols.len() > 3 {
                return Err(Error::parse(
                    source_name,
                    lineno + 1,
                    "expected surface<TAB>senses[<TAB>pos_categories]",
                ));
            }
            let surface: Vec<String> = cols[0]
                .split_whitespace()
                .map(|t| t.to_lowercase())
                .collect();
            let senses: Vec<String> = cols[1]
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            if senses.is_empty() {
                return Err(Error::parse(source_name, lineno + 1, "empty sense list"));
            }
            let pos_categories: Vec<String> = cols
                .get(2)
                .map(|c| {
                    c.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect()
                })
                .unwrap_or_default();
            entries.push(ConnectiveEntry {
                surface,
                language,
                senses,
                pos_categories,
            });
        }
        Lexicon::from_entries(language, entries)
    }

    pub fn load(path: impl AsRef<Path>, language: Language) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Lexicon::parse(&text, language, &path.display().to_string())
    }

    /// Bundled French lexicon (~40 connectives).
    pub fn bundled_fr() -> Self {
        Lexicon::parse(
            include_str!("../data/lexicon_fr.tsv"),
            Language::Fr,
            "bundled:lexicon_fr.tsv",
        )
        .expect("bundled French lexicon is well-formed")
    }

    /// Bundled English lexicon (~40 connectives, senses are class names).
    pub fn bundled_en() -> Self {
        Lexicon::parse(
            include_str!("../data/lexicon_en.tsv"),
            Language::En,
            "bundled:lexicon_en.tsv",
        )
        .expect("bundled English lexicon is well-formed")
    }

    pub fn entries(&self) -> &[ConnectiveEntry] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> &ConnectiveEntry {
        &self.entries[i]
    }

    pub fn entries_starting_with(&self, first_lower: &str) -> &[usize] {
        self.index
            .get(first_lower)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn max_surface_len(&self) -> usize {
        self.max_len
    }

    /// All underscore-joined surfaces, deduplicated, in entry order.
    pub fn joined_surfaces(&self) -> Vec<String> {
        let mut seen = HashMap::new();
        let mut out = Vec::new();
        for e in &self.entries {
            let j = e.joined();
            if seen.insert(j.clone(), ()).is_none() {
                out.push(j);
            }
        }
        out
    }

    /// Entry for an underscore-joined surface, if any.
    pub fn entry_for_joined(&self, joined: &str) -> Option<&ConnectiveEntry> {
        self.entries.iter().find(|e| e.joined() == joined)
    }
}

#[derive(Debug, Clone)]
pub struct RelationMapping {
    map: HashMap<String, RelationClass>,
}

impl RelationMapping {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, RelationClass)>) -> Result<Self> {
        let mut map = HashMap::new();
        for (label, class) in pairs {
            if class == RelationClass::NoRel {
                return Err(Error::Format(format!(
                    "label {label}: NoRel is not a valid mapping target"
                )));
            }
            map.insert(label, class);
        }
        Ok(RelationMapping { map })
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 2 {
                return Err(Error::parse(
                    source_name,
                    lineno + 1,
                    "expected label<TAB>class",
                ));
            }
            let class = cols[1].parse::<RelationClass>().map_err(|_| {
                Error::parse(source_name, lineno + 1, format!("unknown class: {}", cols[1]))
            })?;
            pairs.push((cols[0].to_string(), class));
        }
        RelationMapping::from_pairs(pairs)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RelationMapping::parse(&text, &path.display().to_string())
    }

    pub fn bundled_fr() -> Self {
        RelationMapping::parse(
            include_str!("../data/mapping_fr.tsv"),
            "bundled:mapping_fr.tsv",
        )
        .expect("bundled French mapping is well-formed")
    }

    /// English identity mapping: lexicon senses are already class names.
    pub fn bundled_en() -> Self {
        RelationMapping::parse(
            include_str!("../data/mapping_en.tsv"),
            "bundled:mapping_en.tsv",
        )
        .expect("bundled English mapping is well-formed")
    }

    pub fn map_relation(&self, label: &str) -> Result<RelationClass> {
        self.map
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnmappedLabel(label.to_string()))
    }

    /// Checks totality over every sense in the lexicon.
    pub fn validate_covers(&self, lexicon: &Lexicon) -> Result<()> {
        for entry in lexicon.entries() {
            for sense in &entry.senses {
                self.map_relation(sense)?;
            }
        }
        Ok(())
    }
}

/// True iff the entry has more than one sense whose mapped classes differ.
/// Same-class ambiguity (e.g. contrast/violation, both Comparison) needs no
/// disambiguation.
pub fn is_ambiguous(entry: &ConnectiveEntry, mapping: &RelationMapping) -> Result<bool> {
    let mut first: Option<RelationClass> = None;
    for sense in &entry.senses {
        let class = mapping.map_relation(sense)?;
        match first {
            None => first = Some(class),
            Some(c) if c != class => return Ok(true),
            Some(_) => {}
        }
    }
    Ok(false)
}

/// One atomic occurrence feature test. Alternative values are "/"-separated
/// in the TSV rendering (e.g. NEXT_POS=CD/NNP).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    SentenceInitial,
    Capitalized,
    NextPos(Vec<String>),
    PrevToken(Vec<String>),
    NextToken(Vec<String>),
}

impl Predicate {
    fn parse(s: &str) -> Result<Self> {
        let alts = |v: &str| -> Vec<String> { v.split('/').map(str::to_string).collect() };
        match s {
            "SENTENCE_INITIAL" => Ok(Predicate::SentenceInitial),
            "CAPITALIZED" => Ok(Predicate::Capitalized),
            _ => {
                if let Some(v) = s.strip_prefix("NEXT_POS=") {
                    Ok(Predicate::NextPos(alts(v)))
                } else if let Some(v) = s.strip_prefix("PREV_TOKEN=") {
                    Ok(Predicate::PrevToken(alts(&v.to_lowercase())))
                } else if let Some(v) = s.strip_prefix("NEXT_TOKEN=") {
                    Ok(Predicate::NextToken(alts(&v.to_lowercase())))
                } else {
                    Err(Error::Format(format!("unknown predicate: {s}")))
                }
            }
        }
    }

    pub fn eval(&self, sentence: &Sentence, start: usize, end: usize) -> bool {
        match self {
            Predicate::SentenceInitial => start == 0,
            Predicate::Capitalized => sentence.tokens[start]
                .surface
                .chars()
                .next()
                .map(|c| c.is_uppercase())
                .unwrap_or(false),
            Predicate::NextPos(alts) => sentence
                .tokens
                .get(end)
                .and_then(|t| t.pos.as_deref())
                .map(|p| alts.iter().any(|a| a == p))
                .unwrap_or(false),
            Predicate::PrevToken(alts) => start > 0
                && alts
                    .iter()
                    .any(|a| a == &sentence.tokens[start - 1].lower),
            Predicate::NextToken(alts) => sentence
                .tokens
                .get(end)
                .map(|t| alts.iter().any(|a| a == &t.lower))
                .unwrap_or(false),
        }
    }
}

/// Disjunction ("|") of conjunctions ("&") of predicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    disjuncts: Vec<Vec<Predicate>>,
}

impl Condition {
    pub fn parse(s: &str) -> Result<Self> {
        let mut disjuncts = Vec::new();
        for disjunct in s.split('|') {
            let mut conj = Vec::new();
            for atom in disjunct.split('&') {
                let atom = atom.trim();
                if atom.is_empty() {
                    return Err(Error::Format(format!("empty predicate in condition: {s}")));
                }
                conj.push(Predicate::parse(atom)?);
            }
            disjuncts.push(conj);
        }
        Ok(Condition { disjuncts })
    }

    pub fn eval(&self, sentence: &Sentence, start: usize, end: usize) -> bool {
        self.disjuncts
            .iter()
            .any(|conj| conj.iter().all(|p| p.eval(sentence, start, end)))
    }
}

#[derive(Debug, Clone)]
pub struct AmbiguityRule {
    /// Lowercase surface tokens of the connective the rule applies to.
    pub surface: Vec<String>,
    pub condition: Condition,
    pub sense_if_true: String,
    pub sense_if_false: String,
}

impl AmbiguityRule {
    pub fn joined(&self) -> String {
        self.surface.join("_")
    }
}

#[derive(Debug, Clone, Default)]
pub struct RuleSet {
    rules: Vec<AmbiguityRule>,
}

impl RuleSet {
    pub fn empty() -> Self {
        RuleSet { rules: Vec::new() }
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::parse(
                    source_name,
                    lineno + 1,
                    "expected surface<TAB>condition<TAB>sense_true<TAB>sense_false",
                ));
            }
            rules.push(AmbiguityRule {
                surface: cols[0].split_whitespace().map(|t| t.to_lowercase()).collect(),
                condition: Condition::parse(cols[1])
                    .map_err(|e| Error::parse(source_name, lineno + 1, e.to_string()))?,
                sense_if_true: cols[2].to_string(),
                sense_if_false: cols[3].to_string(),
            });
        }
        Ok(RuleSet { rules })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RuleSet::parse(&text, &path.display().to_string())
    }

    pub fn bundled_fr() -> Self {
        RuleSet::parse(include_str!("../data/rules_fr.tsv"), "bundled:rules_fr.tsv")
            .expect("bundled French rules are well-formed")
    }

    pub fn bundled_en() -> Self {
        RuleSet::parse(include_str!("../data/rules_en.tsv"), "bundled:rules_en.tsv")
            .expect("bundled English rules are well-formed")
    }

    pub fn rules(&self) -> &[AmbiguityRule] {
        &self.rules
    }

    /// First rule whose surface matches the joined form, if any.
    pub fn rule_for(&self, joined: &str) -> Option<&AmbiguityRule> {
        self.rules.iter().find(|r| r.joined() == joined)
    }

    /// Checks that both senses of every rule appear among the connective's
    /// lexicon senses and that the rule targets an ambiguous entry.
    pub fn validate_against(&self, lexicon: &Lexicon, mapping: &RelationMapping) -> Result<()> {
        for rule in &self.rules {
            let entry = lexicon.entry_for_joined(&rule.joined()).ok_or_else(|| {
                Error::Format(format!("rule for unknown connective: {}", rule.joined()))
            })?;
            for sense in [&rule.sense_if_true, &rule.sense_if_false] {
                if !entry.senses.contains(sense) {
                    return Err(Error::Format(format!(
                        "rule for {}: sense {sense} not in lexicon entry",
                        rule.joined()
                    )));
                }
            }
            if !is_ambiguous(entry, mapping)? {
                return Err(Error::Format(format!(
                    "rule for {} targets a non-ambiguous entry",
                    rule.joined()
                )));
            }
        }
        Ok(())
    }
}
