//! Reference-less evaluation of how well explicit French discourse relations
//! survive translation into English.
//!
//! The score has two parts: a connective-translation likelihood (DC) from
//! bilingual word embeddings trained with connectives joined into single
//! tokens, and a binary relation-class match (DR) between the French
//! connective's relation and the class tagged on the English side. Per
//! sentence the parts are normalised by the number of source connectives,
//! weighted by gamma, summed, and averaged over the document.

pub mod detector;
pub mod embeddings;
pub mod error;
pub mod evalharness;
pub mod lexicon;
pub mod scorer;
pub mod tagger;
pub mod textmodel;

pub use error::{Error, Result};
