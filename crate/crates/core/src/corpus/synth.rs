//! Synthetic corpora in the concatenation style: each document strings
//! together short passages drawn from distinct sources, so segment boundaries
//! coincide with abrupt topic changes and ground truth is exact.

use super::{CorpusError, LabeledDocument, Sentence};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A named pool of sentences that all share one "topic".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassageSource {
    pub name: String,
    pub sentences: Vec<Sentence>,
}

/// A synthetic passage pool plus the per-source vocabularies it was built
/// from. `vocab[s]` lists the words source `s` draws on; handy for building
/// matching embedding tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticPool {
    pub sources: Vec<PassageSource>,
    pub vocab: Vec<Vec<String>>,
}

/// Builds a pool of `n_sources` synthetic sources. Source `s` owns the
/// disjoint vocabulary `s{s}w0 … s{s}w{vocab_per_source-1}` and contributes
/// `sentences_per_source` sentences whose word counts are uniform in
/// `words_per_sentence`.
pub fn synthetic_pool(
    n_sources: usize,
    sentences_per_source: usize,
    vocab_per_source: usize,
    words_per_sentence: (usize, usize),
    seed: u64,
) -> SyntheticPool {
    assert!(vocab_per_source > 0, "need a non-empty vocabulary");
    let (lo, hi) = words_per_sentence;
    assert!(1 <= lo && lo <= hi, "bad words-per-sentence range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sources = Vec::with_capacity(n_sources);
    let mut vocab = Vec::with_capacity(n_sources);
    for s in 0..n_sources {
        let words: Vec<String> = (0..vocab_per_source).map(|j| format!("s{s}w{j}")).collect();
        let sentences = (0..sentences_per_source)
            .map(|_| {
                let count = rng.gen_range(lo..=hi);
                let picked: Vec<String> = (0..count)
                    .map(|_| words[rng.gen_range(0..words.len())].clone())
                    .collect();
                Sentence::prose(picked.join(" "))
            })
            .collect();
        sources.push(PassageSource {
            name: format!("source{s:02}"),
            sentences,
        });
        vocab.push(words);
    }
    SyntheticPool { sources, vocab }
}

/// Generates `docs` documents, each the concatenation of `segs_per_doc`
/// passages from distinct sources. Passage lengths are uniform in
/// `seg_len_range` (clamped to the source's size); labels mark the passage
/// boundaries. Fully determined by `seed`.
pub fn generate_choi_style(
    pool: &[PassageSource],
    docs: usize,
    segs_per_doc: usize,
    seg_len_range: (usize, usize),
    seed: u64,
) -> Result<Vec<LabeledDocument>, CorpusError> {
    let (lo, hi) = seg_len_range;
    if lo < 1 || lo > hi {
        return Err(CorpusError::InvalidSegLenRange { lo, hi });
    }
    let usable: Vec<usize> = (0..pool.len())
        .filter(|&i| !pool[i].sentences.is_empty())
        .collect();
    if usable.len() < segs_per_doc || segs_per_doc == 0 {
        return Err(CorpusError::InsufficientPool {
            needed: segs_per_doc,
            available: usable.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(docs);
    for d in 0..docs {
        let mut order = usable.clone();
        let (chosen, _) = order.partial_shuffle(&mut rng, segs_per_doc);
        let mut sentences = Vec::new();
        let mut sizes = Vec::with_capacity(segs_per_doc);
        for &src_idx in chosen.iter() {
            let src = &pool[src_idx].sentences;
            let len = rng.gen_range(lo..=hi).min(src.len());
            let max_start = src.len() - len;
            let start = if max_start == 0 { 0 } else { rng.gen_range(0..=max_start) };
            sentences.extend(src[start..start + len].iter().cloned());
            sizes.push(len);
        }
        out.push(LabeledDocument::from_segment_sizes(
            format!("synth{d:05}"),
            sentences,
            sizes,
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(sources: usize, sentences_each: usize) -> Vec<PassageSource> {
        synthetic_pool(sources, sentences_each, 10, (3, 6), 7).sources
    }

    #[test]
    fn documents_have_requested_segment_count() {
        let docs = generate_choi_style(&pool(12, 30), 5, 10, (3, 11), 42).unwrap();
        assert_eq!(docs.len(), 5);
        for d in &docs {
            assert_eq!(d.segment_sizes.len(), 10);
            for &s in &d.segment_sizes {
                assert!((3..=11).contains(&s));
            }
        }
    }

    #[test]
    fn single_segment_docs_have_zero_labels() {
        let docs = generate_choi_style(&pool(3, 20), 4, 1, (2, 4), 9).unwrap();
        for d in &docs {
            assert!(d.labels.iter().all(|&b| b == 0));
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let p = pool(8, 25);
        let a = generate_choi_style(&p, 6, 4, (2, 5), 1234).unwrap();
        let b = generate_choi_style(&p, 6, 4, (2, 5), 1234).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let p = pool(8, 25);
        let a = generate_choi_style(&p, 6, 4, (2, 5), 1).unwrap();
        let b = generate_choi_style(&p, 6, 4, (2, 5), 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn passages_come_from_distinct_sources() {
        // With disjoint vocabularies, every token of a passage names its
        // source; check each document uses segs_per_doc distinct ones.
        let sp = synthetic_pool(6, 20, 8, (3, 5), 5);
        let docs = generate_choi_style(&sp.sources, 8, 4, (2, 4), 77).unwrap();
        for d in &docs {
            let mut seen = Vec::new();
            let mut offset = 0;
            for &size in &d.segment_sizes {
                let tok = &d.sentences[offset].tokens[0];
                let src = tok.split('w').next().unwrap().to_string();
                assert!(!seen.contains(&src), "source {src} reused in {}", d.id);
                seen.push(src);
                offset += size;
            }
        }
    }

    #[test]
    fn insufficient_pool_is_an_error() {
        let err = generate_choi_style(&pool(3, 20), 2, 5, (2, 4), 0).unwrap_err();
        assert!(matches!(
            err,
            CorpusError::InsufficientPool { needed: 5, available: 3 }
        ));
    }

    #[test]
    fn bad_length_range_is_an_error() {
        let err = generate_choi_style(&pool(3, 20), 2, 2, (4, 2), 0).unwrap_err();
        assert!(matches!(err, CorpusError::InvalidSegLenRange { lo: 4, hi: 2 }));
    }

    #[test]
    fn pool_vocabularies_are_disjoint() {
        let sp = synthetic_pool(4, 10, 6, (3, 5), 11);
        for (i, vi) in sp.vocab.iter().enumerate() {
            for (j, vj) in sp.vocab.iter().enumerate() {
                if i != j {
                    assert!(vi.iter().all(|w| !vj.contains(w)));
                }
            }
        }
    }
}
