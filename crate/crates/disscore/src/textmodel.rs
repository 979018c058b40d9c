//! Text and corpus data model: tokens, sentences, parallel documents, and
//! the ingestion formats (plain text, CoNLL-U, sidecar document index).

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Fr,
    En,
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Language::Fr => write!(f, "fr"),
            Language::En => write!(f, "en"),
        }
    }
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fr" => Ok(Language::Fr),
            "en" => Ok(Language::En),
            other => Err(Error::Input(format!("unknown language: {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Case-folded surface; accents are preserved.
    pub lower: String,
    pub pos: Option<String>,
    pub index: usize,
    pub sentence_initial: bool,
}

impl Token {
    pub fn new(surface: impl Into<String>, pos: Option<String>, index: usize) -> Self {
        let surface = surface.into();
        let lower = surface.to_lowercase();
        Token {
            surface,
            lower,
            pos,
            index,
            sentence_initial: index == 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub language: Language,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>, language: Language) -> Self {
        Sentence { tokens, language }
    }

    /// Builds a sentence from plain surface forms, with POS unset.
    pub fn from_surfaces<S: AsRef<str>>(surfaces: &[S], language: Language) -> Self {
        let tokens = surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| Token::new(s.as_ref(), None, i))
            .collect();
        Sentence { tokens, language }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn lowers(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.lower.as_str()).collect()
    }

    /// True when every token carries a POS tag.
    pub fn has_pos(&self) -> bool {
        !self.tokens.is_empty() && self.tokens.iter().all(|t| t.pos.is_some())
    }
}

/// A source document with one or more aligned candidate translations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelDoc {
    pub doc_id: String,
    pub source: Vec<Sentence>,
    pub candidates: BTreeMap<String, Vec<Sentence>>,
}

impl ParallelDoc {
    /// Validates the 1:1 sentence alignment invariant.
    pub fn new(
        doc_id: String,
        source: Vec<Sentence>,
        candidates: BTreeMap<String, Vec<Sentence>>,
    ) -> Result<Self> {
        for (label, sents) in &candidates {
            if sents.len() != source.len() {
                return Err(Error::Alignment {
                    file: format!("{doc_id}/{label}"),
                    expected: source.len(),
                    actual: sents.len(),
                });
            }
        }
        Ok(ParallelDoc {
            doc_id,
            source,
            candidates,
        })
    }

    pub fn candidate(&self, label: &str) -> Result<&[Sentence]> {
        self.candidates
            .get(label)
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

/// French clitic prefixes that are split off with their apostrophe:
/// "l'espace" -> ["l'", "espace"].
const FR_CLITICS: &[&str] = &[
    "l", "d", "j", "n", "s", "c", "m", "t", "qu", "lorsqu", "puisqu", "jusqu", "quoiqu",
];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '\'' || c == '\u{2019}'
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits a whitespace-free chunk into tokens: surrounding punctuation is
/// peeled off, and French clitics are split after the apostrophe.
fn split_chunk(chunk: &str, language: Language, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut start = 0;
    let mut end = chars.len();

    // Leading punctuation.
    while start < end && !is_word_char(chars[start]) {
        out.push(chars[start].to_string());
        start += 1;
    }
    // Trailing punctuation (emitted after the core).
    let mut trailing = Vec::new();
    while end > start && !is_word_char(chars[end - 1]) {
        trailing.push(chars[end - 1].to_string());
        end -= 1;
    }
    // A bare apostrophe at the edge is punctuation, not a clitic.
    while end > start && is_apostrophe(chars[end - 1]) && end - start == 1 {
        trailing.push(chars[end - 1].to_string());
        end -= 1;
    }

    let mut core: &[char] = &chars[start..end];
    if language == Language::Fr {
        while let Some(p) = core.iter().position(|&c| is_apostrophe(c)) {
            let prefix: String = core[..p].iter().collect();
            if FR_CLITICS.contains(&prefix.to_lowercase().as_str()) && p + 1 < core.len() {
                out.push(core[..=p].iter().collect());
                core = &core[p + 1..];
            } else {
                break;
            }
        }
    }
    if !core.is_empty() {
        out.push(core.iter().collect());
    }
    out.extend(trailing.into_iter().rev());
}

/// Tokenizes one plain-text sentence. Deterministic; empty text yields an
/// empty sentence.
pub fn tokenize(text: &str, language: Language) -> Sentence {
    let mut surfaces = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, language, &mut surfaces);
    }
    Sentence::from_surfaces(&surfaces, language)
}

/// Parses CoNLL-U text: 10-column TSV, "#" comments, blank-line sentence
/// separation. POS comes from XPOS when present, else UPOS. Multiword-token
/// ranges and empty nodes are skipped.
pub fn parse_conllu(text: &str, language: Language, source_name: &str) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            if !tokens.is_empty() {
                sentences.push(Sentence::new(std::mem::take(&mut tokens), language));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                source_name,
                lineno,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            // multiword-token range or empty node
            continue;
        }
        if id.parse::<usize>().is_err() {
            return Err(Error::parse(
                source_name,
                lineno,
                format!("invalid token id: {id}"),
            ));
        }
        let form = cols[1];
        let upos = cols[3];
        let xpos = cols[4];
        let pos = if xpos != "_" && !xpos.is_empty() {
            Some(xpos.to_string())
        } else if upos != "_" && !upos.is_empty() {
            Some(upos.to_string())
        } else {
            None
        };
        tokens.push(Token::new(form, pos, tokens.len()));
    }
    if !tokens.is_empty() {
        sentences.push(Sentence::new(tokens, language));
    }
    Ok(sentences)
}

pub fn read_conllu(path: impl AsRef<Path>, language: Language) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_conllu(&text, language, &path.display().to_string())
}

/// Serializes sentences to CoNLL-U (FORM + XPOS only; other columns "_").
pub fn write_conllu(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for sentence in sentences {
        for token in &sentence.tokens {
            let pos = token.pos.as_deref().unwrap_or("_");
            out.push_str(&format!(
                "{}\t{}\t_\t{}\t{}\t_\t_\t_\t_\t_\n",
                token.index + 1,
                token.surface,
                pos,
                pos,
            ));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Plain,
    Conllu,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(CorpusFormat::Plain),
            "conllu" => Ok(CorpusFormat::Conllu),
            other => Err(Error::Input(format!("unknown corpus format: {other}"))),
        }
    }
}

fn read_sentences(path: &Path, language: Language, format: CorpusFormat) -> Result<Vec<Sentence>> {
    match format {
        CorpusFormat::Plain => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Ok(text
                .lines()
                .map(|line| tokenize(line, language))
                .collect())
        }
        CorpusFormat::Conllu => read_conllu(path, language),
    }
}

/// One entry of the sidecar document index: "doc_id<TAB>start<TAB>length".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocSpan {
    pub doc_id: String,
    pub start: usize,
    pub len: usize,
}

pub fn read_doc_index(path: impl AsRef<Path>) -> Result<Vec<DocSpan>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut spans = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 3 {
            return Err(Error::parse(
                &name,
                lineno + 1,
                "expected doc_id<TAB>start<TAB>length",
            ));
        }
        let start = cols[1].parse::<usize>().map_err(|_| {
            Error::parse(&name, lineno + 1, format!("invalid start: {}", cols[1]))
        })?;
        let len = cols[2].parse::<usize>().map_err(|_| {
            Error::parse(&name, lineno + 1, format!("invalid length: {}", cols[2]))
        })?;
        spans.push(DocSpan {
            doc_id: cols[0].to_string(),
            start,
            len,
        });
    }
    Ok(spans)
}

/// Assembles parallel documents from a source file plus labelled candidate
/// files. Without an index the whole file is one document.
pub fn load_parallel(
    source_path: impl AsRef<Path>,
    candidate_paths: &BTreeMap<String, std::path::PathBuf>,
    format: CorpusFormat,
    index: Option<&[DocSpan]>,
) -> Result<Vec<ParallelDoc>> {
    let source_path = source_path.as_ref();
    let source = read_sentences(source_path, Language::Fr, format)?;
    let mut candidates: BTreeMap<String, Vec<Sentence>> = BTreeMap::new();
    for (label, path) in candidate_paths {
        let sents = read_sentences(path, Language::En, format)?;
        if sents.len() != source.len() {
            return Err(Error::Alignment {
                file: path.display().to_string(),
                expected: source.len(),
                actual: sents.len(),
            });
        }
        candidates.insert(label.clone(), sents);
    }

    let spans: Vec<DocSpan> = match index {
        Some(spans) => spans.to_vec(),
        None => vec![DocSpan {
            doc_id: source_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "doc".to_string()),
            start: 0,
            len: source.len(),
        }],
    };

    let mut docs = Vec::new();
    for span in &spans {
        let end = span.start.checked_add(span.len).filter(|&e| e <= source.len());
        let end = end.ok_or_else(|| {
            Error::Input(format!(
                "document {} spans lines {}..{} but corpus has {} sentences",
                span.doc_id,
                span.start,
                span.start + span.len,
                source.len()
            ))
        })?;
        let doc_candidates: BTreeMap<String, Vec<Sentence>> = candidates
            .iter()
            .map(|(label, sents)| (label.clone(), sents[span.start..end].to_vec()))
            .collect();
        docs.push(ParallelDoc::new(
            span.doc_id.clone(),
            source[span.start..end].to_vec(),
            doc_candidates,
        )?);
    }
    Ok(docs)
}
