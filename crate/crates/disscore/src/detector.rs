//! Explicit connective detection: longest-match lexicon scan, discourse-usage
//! filtering, sense disambiguation, and relation-class mapping.
//!
//! The same pipeline serves both languages; the English tagger wraps it with
//! the target-side resources.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lexicon::{is_ambiguous, Lexicon, RelationClass, RelationMapping, RuleSet};
use crate::textmodel::{Language, Sentence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectedConnective {
    /// Token index range [start, end).
    pub start: usize,
    pub end: usize,
    /// Lowercase surface tokens joined with "_", e.g. "parce_que".
    pub surface_joined: String,
    pub sense: String,
    pub relation_class: RelationClass,
    pub language: Language,
    pub discourse_usage: bool,
}

/// A lexicon match prior to filtering, referencing the entry by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CandidateSpan {
    pub start: usize,
    pub end: usize,
    pub entry: usize,
}

/// All maximal lexicon matches: longest, leftmost-greedy, non-overlapping.
/// Shorter matches subsumed by a longer match at the same position are
/// suppressed.
pub fn scan(sentence: &Sentence, lexicon: &Lexicon) -> Vec<CandidateSpan> {
    let lowers = sentence.lowers();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < lowers.len() {
        let mut best: Option<CandidateSpan> = None;
        for &entry_idx in lexicon.entries_starting_with(lowers[i]) {
            let surface = &lexicon.get(entry_idx).surface;
            if i + surface.len() > lowers.len() {
                continue;
            }
            let matches = surface
                .iter()
                .zip(&lowers[i..i + surface.len()])
                .all(|(a, b)| a == b);
            if matches {
                let longer = best.map(|b| surface.len() > b.end - b.start).unwrap_or(true);
                if longer {
                    best = Some(CandidateSpan {
                        start: i,
                        end: i + surface.len(),
                        entry: entry_idx,
                    });
                }
            }
        }
        match best {
            Some(span) => {
                i = span.end;
                spans.push(span);
            }
            None => i += 1,
        }
    }
    spans
}

const NOUN_TAGS: &[&str] = &[
    "N", "NC", "NPP", "NOUN", "PROPN", "NN", "NNS", "NNP", "NNPS",
];

/// Conjunctions subject to the listing heuristic.
const LISTING_CONJUNCTIONS: &[&str] = &["et", "ou", "and", "or"];

fn noun_like(sentence: &Sentence, index: usize) -> bool {
    let token = &sentence.tokens[index];
    match token.pos.as_deref() {
        Some(pos) => NOUN_TAGS.contains(&pos),
        None => {
            // POS-free: capitalized mid-sentence reads as a proper noun.
            !token.sentence_initial
                && token.surface.chars().next().map(|c| c.is_uppercase()).unwrap_or(false)
        }
    }
}

/// Tokens that typically open a clause rather than continue a listing.
const CLAUSE_STARTERS: &[&str] = &[
    "il", "elle", "ils", "elles", "je", "tu", "on", "nous", "vous", "ce", "c'", "cela", "ça",
    "puis", "ensuite", "alors", "enfin", "donc", "he", "she", "it", "we", "they", "i", "you",
    "then", "also", "so", "there", "this", "that",
];

/// Listing heuristic for "et"/"ou"/"and"/"or": the candidate is rejected when
/// it coordinates noun-like neighbours ("pommes, poires et oranges"), flagged
/// either by noun/proper-noun context or, in POS-free mode, by a comma within
/// the three preceding tokens followed by a non-clause-starting token.
fn listing_like(sentence: &Sentence, start: usize, end: usize) -> bool {
    if start == 0 || end >= sentence.len() {
        return false;
    }
    let prev_nouny = noun_like(sentence, start - 1);
    let next_nouny = noun_like(sentence, end);
    if prev_nouny && next_nouny {
        return true;
    }
    let next = &sentence.tokens[end];
    if next.pos.is_some() {
        return false;
    }
    let window_start = start.saturating_sub(3);
    let comma_before = sentence.tokens[window_start..start]
        .iter()
        .any(|t| t.surface == ",");
    comma_before && !CLAUSE_STARTERS.contains(&next.lower.as_str())
}

/// Discourse-usage filter. With POS on every candidate token, the entry's
/// pos_categories constrain each token (empty = unconstrained); without POS
/// the candidate passes unless the listing heuristic fires. The listing
/// heuristic applies in both modes.
pub fn filter_discourse_usage(
    sentence: &Sentence,
    candidate: CandidateSpan,
    lexicon: &Lexicon,
) -> bool {
    let entry = lexicon.get(candidate.entry);
    let tokens = &sentence.tokens[candidate.start..candidate.end];
    let has_pos = tokens.iter().all(|t| t.pos.is_some());

    if has_pos && !entry.pos_categories.is_empty() {
        let ok = tokens.iter().all(|t| {
            entry
                .pos_categories
                .iter()
                .any(|c| c == t.pos.as_deref().unwrap())
        });
        if !ok {
            return false;
        }
    }

    if candidate.end - candidate.start == 1
        && LISTING_CONJUNCTIONS.contains(&tokens[0].lower.as_str())
        && listing_like(sentence, candidate.start, candidate.end)
    {
        return false;
    }
    true
}

/// Sense selection for one candidate. Unambiguous entries (single sense, or
/// all senses in one class) keep their first-listed sense; ambiguous entries
/// consult the rule for their surface. An ambiguous entry without a rule
/// falls back to the first-listed sense with a warning.
pub fn disambiguate(
    sentence: &Sentence,
    candidate: CandidateSpan,
    lexicon: &Lexicon,
    mapping: &RelationMapping,
    rules: &RuleSet,
) -> Result<(String, Option<String>)> {
    let entry = lexicon.get(candidate.entry);
    let first = entry.senses[0].clone();
    if !is_ambiguous(entry, mapping)? {
        return Ok((first, None));
    }
    match rules.rule_for(&entry.joined()) {
        Some(rule) => {
            let sense = if rule.condition.eval(sentence, candidate.start, candidate.end) {
                rule.sense_if_true.clone()
            } else {
                rule.sense_if_false.clone()
            };
            Ok((sense, None))
        }
        None => Ok((
            first,
            Some(format!(
                "ambiguous connective \"{}\" has no rule; using first-listed sense",
                entry.joined()
            )),
        )),
    }
}

#[derive(Debug, Clone, Default)]
pub struct Detections {
    pub items: Vec<DetectedConnective>,
    pub warnings: Vec<String>,
}

/// Full pipeline: scan -> filter -> disambiguate -> map. Output is ordered
/// by span start; filtered-out candidates are not emitted.
pub fn detect(
    sentence: &Sentence,
    lexicon: &Lexicon,
    mapping: &RelationMapping,
    rules: &RuleSet,
) -> Result<Detections> {
    let mut out = Detections::default();
    for candidate in scan(sentence, lexicon) {
        if !filter_discourse_usage(sentence, candidate, lexicon) {
            continue;
        }
        let (sense, warning) = disambiguate(sentence, candidate, lexicon, mapping, rules)?;
        if let Some(w) = warning {
            out.warnings.push(w);
        }
        let relation_class = mapping.map_relation(&sense)?;
        out.items.push(DetectedConnective {
            start: candidate.start,
            end: candidate.end,
            surface_joined: lexicon.get(candidate.entry).joined(),
            sense,
            relation_class,
            language: sentence.language,
            discourse_usage: true,
        });
    }
    Ok(out)
}
