//! English-side explicit relation tagging at the PDTB top level: detect
//! English connectives, filter discourse usage, and assign one of the four
//! classes. `class_of` is the only producer of `NoRel` (the miss signal).

use crate::detector::{detect, Detections};
use crate::error::{Error, Result};
use crate::lexicon::{Lexicon, RelationClass, RelationMapping, RuleSet};
use crate::textmodel::{Language, Sentence};

/// English tagging resources bundled together.
#[derive(Debug, Clone)]
pub struct Tagger {
    pub lexicon: Lexicon,
    pub mapping: RelationMapping,
    pub rules: RuleSet,
}

impl Tagger {
    pub fn new(lexicon: Lexicon, mapping: RelationMapping, rules: RuleSet) -> Result<Self> {
        if lexicon.language != Language::En {
            return Err(Error::Input(
                "tagger requires an English lexicon".to_string(),
            ));
        }
        mapping.validate_covers(&lexicon)?;
        Ok(Tagger {
            lexicon,
            mapping,
            rules,
        })
    }

    pub fn bundled() -> Self {
        Tagger::new(
            Lexicon::bundled_en(),
            RelationMapping::bundled_en(),
            RuleSet::bundled_en(),
        )
        .expect("bundled English resources are consistent")
    }

    /// Detections with classes in the four real classes only; candidates
    /// failing the discourse-usage filter are omitted entirely.
    pub fn tag(&self, sentence: &Sentence) -> Result<Detections> {
        if sentence.language != Language::En {
            return Err(Error::Input("tag expects an English sentence".to_string()));
        }
        detect(sentence, &self.lexicon, &self.mapping, &self.rules)
    }

    /// Class of the tagged occurrence of `target_surface` (underscore-joined)
    /// in the sentence; `NoRel` when the tagger produced no such detection.
    pub fn class_of(&self, sentence: &Sentence, target_surface: &str) -> Result<RelationClass> {
        let tagged = self.tag(sentence)?;
        Ok(tagged
            .items
            .iter()
            .find(|d| d.surface_joined == target_surface)
            .map(|d| d.relation_class)
            .unwrap_or(RelationClass::NoRel))
    }
}
