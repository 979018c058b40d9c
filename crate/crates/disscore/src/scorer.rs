//! Per-sentence and per-document scoring of discourse relation transfer,
//! plus gamma calibration by grid-search cross-validation.
//!
//! For every French detection the top-k embedding candidates are matched
//! against the English sentence; DC is the matched candidate's probability
//! and DR is 1 iff the tagged English class equals the French class. Both
//! are normalised by the per-sentence source connective count M.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detector::{detect, DetectedConnective};
use crate::embeddings::{translation_likelihood, BackoffChain, DcMode};
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, RelationClass, RelationMapping, RuleSet};
use crate::tagger::Tagger;
use crate::textmodel::{ParallelDoc, Sentence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombinationMode {
    /// DC/M + gamma * DR/M per connective (default).
    Additive,
    /// (DC/M) * gamma * (DR/M) per connective, as the formula is typeset.
    Multiplicative,
}

impl FromStr for CombinationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" => Ok(CombinationMode::Additive),
            "multiplicative" => Ok(CombinationMode::Multiplicative),
            other => Err(Error::Input(format!("unknown combination mode: {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub gamma: f64,
    pub mode: CombinationMode,
    pub dc_mode: DcMode,
    pub top_k: usize,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            gamma: 0.045,
            mode: CombinationMode::Additive,
            dc_mode: DcMode::Softmax,
            top_k: 20,
        }
    }
}

impl ScoreConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma < 0.0 {
            return Err(Error::Input("gamma must be nonnegative".to_string()));
        }
        if self.top_k == 0 {
            return Err(Error::Input("top_k must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Everything scoring needs: source-side detection resources, the English
/// tagger, and the embedding chain with its candidate inventory.
pub struct Resources {
    pub fr_lexicon: Lexicon,
    pub fr_mapping: RelationMapping,
    pub fr_rules: RuleSet,
    pub tagger: Tagger,
    pub chain: BackoffChain,
    /// English connective candidates (underscore-joined, unprefixed).
    pub candidate_set: Vec<String>,
}

impl Resources {
    pub fn new(
        fr_lexicon: Lexicon,
        fr_mapping: RelationMapping,
        fr_rules: RuleSet,
        tagger: Tagger,
        chain: BackoffChain,
    ) -> Result<Self> {
        fr_mapping.validate_covers(&fr_lexicon)?;
        let candidate_set = tagger.lexicon.joined_surfaces();
        Ok(Resources {
            fr_lexicon,
            fr_mapping,
            fr_rules,
            tagger,
            chain,
            candidate_set,
        })
    }

    pub fn bundled_with_chain(chain: BackoffChain) -> Result<Self> {
        Resources::new(
            Lexicon::bundled_fr(),
            RelationMapping::bundled_fr(),
            RuleSet::bundled_fr(),
            Tagger::bundled(),
            chain,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectiveScore {
    pub detection: DetectedConnective,
    pub matched: Option<String>,
    pub dc: f64,
    pub dr: u8,
    pub model_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    /// Number of source detections (M); also the DC/DR denominators.
    pub connective_count: usize,
    pub connectives: Vec<ConnectiveScore>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScore {
    pub doc_id: String,
    pub label: String,
    pub sentence_count: usize,
    pub sentences: Vec<SentenceScore>,
    pub value: f64,
}

/// True when the underscore-joined candidate occurs in the sentence as a
/// contiguous token sequence (case-folded).
pub fn occurs_verbatim(sentence: &Sentence, joined: &str) -> bool {
    let parts: Vec<&str> = joined.split('_').collect();
    let lowers = sentence.lowers();
    if parts.is_empty() || parts.len() > lowers.len() {
        return false;
    }
    lowers.windows(parts.len()).any(|w| w == parts.as_slice())
}

fn combine(dc: f64, dr: u8, m: usize, config: &ScoreConfig) -> f64 {
    let m = m as f64;
    match config.mode {
        CombinationMode::Additive => dc / m + config.gamma * (dr as f64) / m,
        CombinationMode::Multiplicative => (dc / m) * config.gamma * ((dr as f64) / m),
    }
}

pub fn score_sentence(
    fr_sentence: &Sentence,
    en_sentence: &Sentence,
    resources: &Resources,
    config: &ScoreConfig,
) -> Result<SentenceScore> {
    config.validate()?;
    let detections = detect(
        fr_sentence,
        &resources.fr_lexicon,
        &resources.fr_mapping,
        &resources.fr_rules,
    )?;
    let m = detections.items.len();
    if m == 0 {
        return Ok(SentenceScore {
            connective_count: 0,
            connectives: Vec::new(),
            value: 0.0,
        });
    }
    let mut connectives = Vec::with_capacity(m);
    let mut value = 0.0;
    for detection in detections.items {
        let likelihood = translation_likelihood(
            &resources.chain,
            &detection.surface_joined,
            &resources.candidate_set,
            config.dc_mode,
        );
        let mut matched = None;
        let mut dc = 0.0;
        let mut dr = 0u8;
        let mut model_index = None;
        if let Some(tl) = likelihood {
            // Highest-probability candidate among the top k that actually
            // appears in the English sentence.
            for (candidate, prob) in tl.ranked.iter().take(config.top_k) {
                let tagged_class = resources.tagger.class_of(en_sentence, candidate)?;
                let present = tagged_class != RelationClass::NoRel
                    || occurs_verbatim(en_sentence, candidate);
                if present {
                    matched = Some(candidate.clone());
                    dc = *prob;
                    dr = u8::from(tagged_class == detection.relation_class);
                    model_index = Some(tl.model_index);
                    break;
                }
            }
        }
        value += combine(dc, dr, m, config);
        connectives.push(ConnectiveScore {
            detection,
            matched,
            dc,
            dr,
            model_index,
        });
    }
    Ok(SentenceScore {
        connective_count: m,
        connectives,
        value,
    })
}

/// Mean of sentence scores over all sentences, zero-connective sentences
/// included.
pub fn score_document(
    doc: &ParallelDoc,
    label: &str,
    resources: &Resources,
    config: &ScoreConfig,
) -> Result<DocumentScore> {
    let candidate = doc.candidate(label)?;
    let n = doc.source.len();
    if n == 0 {
        return Err(Error::Input(format!("document {} is empty", doc.doc_id)));
    }
    let mut sentences = Vec::with_capacity(n);
    let mut sum = 0.0;
    for (fr, en) in doc.source.iter().zip(candidate) {
        let s = score_sentence(fr, en, resources, config)?;
        sum += s.value;
        sentences.push(s);
    }
    Ok(DocumentScore {
        doc_id: doc.doc_id.clone(),
        label: label.to_string(),
        sentence_count: n,
        sentences,
        value: sum / n as f64,
    })
}

/// Grid-search cross-validation for gamma. The objective per fold is the
/// fraction of validation documents where score(PE) >= score(MT); ties in
/// the grid break toward smaller gamma. Fold assignment is a seeded shuffle.
pub fn calibrate_gamma(
    docs: &[ParallelDoc],
    grid: &[f64],
    folds: usize,
    seed: u64,
    resources: &Resources,
    base_config: &ScoreConfig,
) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::Input("gamma grid must be non-empty".to_string()));
    }
    if docs.is_empty() {
        return Err(Error::Input("no documents to calibrate on".to_string()));
    }
    for doc in docs {
        doc.candidate("MT")?;
        doc.candidate("PE")?;
    }
    let folds = folds.clamp(1, docs.len());
    let mut order: Vec<usize> = (0..docs.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let fold_of: Vec<usize> = {
        let mut v = vec![0; docs.len()];
        for (pos, &doc_idx) in order.iter().enumerate() {
            v[doc_idx] = pos % folds;
        }
        v
    };

    let mut grid_sorted: Vec<f64> = grid.to_vec();
    grid_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut best_gamma = grid_sorted[0];
    let mut best_objective = f64::NEG_INFINITY;
    for &gamma in &grid_sorted {
        let config = ScoreConfig {
            gamma,
            ..*base_config
        };
        config.validate()?;
        let mut fold_objectives = Vec::with_capacity(folds);
        for fold in 0..folds {
            let mut wins = 0usize;
            let mut total = 0usize;
            for (i, doc) in docs.iter().enumerate() {
                if fold_of[i] != fold {
                    continue;
                }
                let pe = score_document(doc, "PE", resources, &config)?.value;
                let mt = score_document(doc, "MT", resources, &config)?.value;
                if pe >= mt {
                    wins += 1;
                }
                total += 1;
            }
            if total > 0 {
                fold_objectives.push(wins as f64 / total as f64);
            }
        }
        let mean = fold_objectives.iter().sum::<f64>() / fold_objectives.len() as f64;
        if mean > best_objective {
            best_objective = mean;
            best_gamma = gamma;
        }
    }
    Ok(best_gamma)
}
