use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AugmentConfig;
use crate::corpus::{Corpus, Split};
use crate::textproc::{split_sentences, SentenceUnit};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SampleError {
    #[error("no train-split sentence carries a mention")]
    NoEligibleUnits,
}

/// Mention-bearing sentence units of the train split, ordered by `(doc_id, start)`.
pub fn eligible_units(corpus: &Corpus) -> Vec<SentenceUnit> {
    corpus
        .docs_in(Split::Train)
        .filter(|d| !Corpus::is_augmented(&d.doc_id))
        .flat_map(split_sentences)
        .filter(|u| !u.mentions.is_empty())
        .collect()
}

/// `max(1, round(fraction * n))`, capped at `n`.
pub fn sample_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n.max(1))
}

/// Seeded draw without replacement, returned in `(doc_id, start)` order.
pub fn sample_units(
    corpus: &Corpus,
    cfg: &AugmentConfig,
) -> Result<Vec<SentenceUnit>, SampleError> {
    let pool = eligible_units(corpus);
    if pool.is_empty() {
        return Err(SampleError::NoEligibleUnits);
    }
    let k = sample_count(pool.len(), cfg.fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut picked = rand::seq::index::sample(&mut rng, pool.len(), k).into_vec();
    picked.sort_unstable();
    let mut take = picked.into_iter().peekable();
    Ok(pool
        .into_iter()
        .enumerate()
        .filter_map(|(i, u)| take.next_if_eq(&i).map(|_| u))
        .collect())
}
