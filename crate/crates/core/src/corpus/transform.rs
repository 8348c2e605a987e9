//! Document-level transforms: noise filtering, flattening to labeled form,
//! and the training-time adjustments (drop the lead segment, omit non-prose).

use super::{CorpusError, Document, LabeledDocument, Rejection, Segment, SentenceKind};

/// Removes every segment whose subtree holds a single sentence, bottom-up, so
/// a parent emptied by its children's removal is itself removed. Rejects the
/// document when strictly more than half of all segments (at any level) were
/// removed, or when fewer than three top-level segments remain.
pub fn apply_filters(doc: Document) -> Result<Document, Rejection> {
    let original = doc.segment_count_all_levels();
    let Document { id, segments } = doc;
    let segments: Vec<Segment> = segments.into_iter().filter_map(prune).collect();
    let filtered = Document { id, segments };
    let kept = filtered.segment_count_all_levels();
    let removed = original - kept;
    if removed * 2 > original {
        return Err(Rejection::MostSegmentsFiltered { removed, original });
    }
    if filtered.segments.len() < 3 {
        return Err(Rejection::TooFewSegments {
            kept: filtered.segments.len(),
        });
    }
    Ok(filtered)
}

fn prune(seg: Segment) -> Option<Segment> {
    let children: Vec<Segment> = seg.children.into_iter().filter_map(prune).collect();
    let seg = Segment { children, ..seg };
    if seg.subtree_sentence_count() < 2 {
        None
    } else {
        Some(seg)
    }
}

/// Flattens a filtered document to its top-level segmentation: sentences in
/// depth-first order, one labeled segment per top-level section (nested
/// subsections merge into their top-level ancestor).
pub fn to_labeled(doc: &Document) -> Result<LabeledDocument, CorpusError> {
    let mut sentences = Vec::new();
    let mut sizes = Vec::new();
    for seg in &doc.segments {
        let before = sentences.len();
        seg.flatten_into(&mut sentences);
        sizes.push(sentences.len() - before);
    }
    LabeledDocument::from_segment_sizes(doc.id.clone(), sentences, sizes)
}

/// Removes the first top-level segment and its label positions. Returns
/// `None` when nothing remains.
pub fn drop_first_segment(doc: &LabeledDocument) -> Option<LabeledDocument> {
    if doc.segment_sizes.len() < 2 {
        return None;
    }
    let first = doc.segment_sizes[0];
    let sentences = doc.sentences[first..].to_vec();
    let sizes = doc.segment_sizes[1..].to_vec();
    Some(
        LabeledDocument::from_segment_sizes(doc.id.clone(), sentences, sizes)
            .expect("suffix of a valid document is valid"),
    )
}

/// Removes list-item and code sentences, re-deriving labels from the
/// remaining segment membership. Segments emptied entirely disappear.
/// Returns `None` when no sentence survives.
pub fn omit_list_code(doc: &LabeledDocument) -> Option<LabeledDocument> {
    let mut sentences = Vec::new();
    let mut sizes = Vec::new();
    let mut offset = 0usize;
    for &size in &doc.segment_sizes {
        let kept: Vec<_> = doc.sentences[offset..offset + size]
            .iter()
            .filter(|s| s.kind == SentenceKind::Prose)
            .cloned()
            .collect();
        offset += size;
        if !kept.is_empty() {
            sizes.push(kept.len());
            sentences.extend(kept);
        }
    }
    if sentences.is_empty() {
        return None;
    }
    Some(
        LabeledDocument::from_segment_sizes(doc.id.clone(), sentences, sizes)
            .expect("kept sizes are positive and sum to kept sentences"),
    )
}

/// Training-time view of a labeled document: the first segment is dropped
/// (its web-corpus role is an overview/abstract) and non-prose sentences are
/// omitted. Rejects when fewer than two segments remain — a one-segment
/// document has no boundary left to learn.
pub fn prepare_training_doc(doc: &LabeledDocument) -> Result<LabeledDocument, Rejection> {
    let rejected = |kept: usize| Rejection::TooFewTrainingSegments { kept };
    let dropped = drop_first_segment(doc).ok_or_else(|| rejected(0))?;
    let prepared = omit_list_code(&dropped).ok_or_else(|| rejected(0))?;
    if prepared.segment_sizes.len() < 2 {
        return Err(rejected(prepared.segment_sizes.len()));
    }
    Ok(prepared)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentence;

    fn seg(level: u32, title: &str, n: usize, children: Vec<Segment>) -> Segment {
        Segment {
            level,
            title: title.to_string(),
            sentences: (0..n).map(|i| Sentence::prose(format!("{title} s{i}."))).collect(),
            children,
        }
    }

    fn doc(segments: Vec<Segment>) -> Document {
        Document {
            id: "t".into(),
            segments,
        }
    }

    fn top_sizes(d: &Document) -> Vec<usize> {
        d.segments.iter().map(Segment::subtree_sentence_count).collect()
    }

    #[test]
    fn filters_single_sentence_segments() {
        let d = doc(vec![
            seg(1, "a", 1, vec![]),
            seg(1, "b", 4, vec![]),
            seg(1, "c", 3, vec![]),
            seg(1, "d", 2, vec![]),
        ]);
        let filtered = apply_filters(d).unwrap();
        assert_eq!(top_sizes(&filtered), vec![4, 3, 2]);
    }

    #[test]
    fn rejects_fewer_than_three_segments() {
        let d = doc(vec![seg(1, "a", 4, vec![]), seg(1, "b", 3, vec![])]);
        assert_eq!(
            apply_filters(d).unwrap_err(),
            Rejection::TooFewSegments { kept: 2 }
        );
    }

    #[test]
    fn rejects_when_most_segments_filtered() {
        // Six segments at all levels; the four single-sentence children of
        // "c" vanish, then "c" itself is empty, leaving 2 of 6 (4/6 > 50%).
        let d = doc(vec![
            seg(1, "a", 2, vec![]),
            seg(1, "b", 2, vec![]),
            seg(
                1,
                "c",
                0,
                vec![seg(2, "c1", 1, vec![]), seg(2, "c2", 1, vec![]), seg(2, "c3", 1, vec![])],
            ),
        ]);
        assert_eq!(
            apply_filters(d).unwrap_err(),
            Rejection::MostSegmentsFiltered { removed: 4, original: 6 }
        );
    }

    #[test]
    fn keeps_exactly_half_filtered() {
        // 3 of 6 removed is not "most": three two-sentence segments survive.
        let d = doc(vec![
            seg(1, "a", 2, vec![]),
            seg(1, "b", 2, vec![]),
            seg(1, "c", 2, vec![]),
            seg(1, "x", 1, vec![]),
            seg(1, "y", 1, vec![]),
            seg(1, "z", 1, vec![]),
        ]);
        let filtered = apply_filters(d).unwrap();
        assert_eq!(filtered.segments.len(), 3);
    }

    #[test]
    fn rejects_just_over_half_filtered() {
        // 4 of 7 removed is "most" even though 3 segments remain.
        let d = doc(vec![
            seg(1, "a", 2, vec![]),
            seg(1, "b", 2, vec![]),
            seg(1, "c", 2, vec![]),
            seg(1, "w", 1, vec![]),
            seg(1, "x", 1, vec![]),
            seg(1, "y", 1, vec![]),
            seg(1, "z", 1, vec![]),
        ]);
        assert_eq!(
            apply_filters(d).unwrap_err(),
            Rejection::MostSegmentsFiltered { removed: 4, original: 7 }
        );
    }

    #[test]
    fn parent_kept_alive_by_children() {
        // A parent with no own sentences but a two-sentence child survives.
        let d = doc(vec![
            seg(1, "a", 0, vec![seg(2, "a1", 2, vec![])]),
            seg(1, "b", 2, vec![]),
            seg(1, "c", 2, vec![]),
        ]);
        let filtered = apply_filters(d).unwrap();
        assert_eq!(filtered.segments.len(), 3);
        assert_eq!(filtered.segments[0].children.len(), 1);
    }

    #[test]
    fn filtering_is_idempotent() {
        let d = doc(vec![
            seg(1, "a", 1, vec![]),
            seg(1, "b", 4, vec![seg(2, "b1", 1, vec![])]),
            seg(1, "c", 3, vec![]),
            seg(1, "d", 2, vec![]),
        ]);
        let once = apply_filters(d).unwrap();
        let twice = apply_filters(once.clone()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn to_labeled_flattens_top_level() {
        let d = doc(vec![seg(1, "a", 2, vec![]), seg(1, "b", 2, vec![])]);
        let ld = to_labeled(&d).unwrap();
        assert_eq!(ld.n(), 4);
        assert_eq!(ld.labels, vec![0, 1, 0]);
    }

    #[test]
    fn to_labeled_all_singletons() {
        let d = doc(vec![
            seg(1, "a", 1, vec![]),
            seg(1, "b", 1, vec![]),
            seg(1, "c", 1, vec![]),
        ]);
        let ld = to_labeled(&d).unwrap();
        assert_eq!(ld.labels, vec![1, 1]);
    }

    #[test]
    fn to_labeled_merges_children_into_ancestor() {
        let d = doc(vec![
            seg(1, "a", 1, vec![seg(2, "a1", 2, vec![])]),
            seg(1, "b", 1, vec![]),
        ]);
        let ld = to_labeled(&d).unwrap();
        assert_eq!(ld.segment_sizes, vec![3, 1]);
        assert_eq!(ld.labels, vec![0, 0, 1]);
    }

    #[test]
    fn to_labeled_preserves_sentence_order() {
        let d = doc(vec![
            seg(1, "a", 2, vec![seg(2, "a1", 1, vec![])]),
            seg(1, "b", 1, vec![]),
        ]);
        let ld = to_labeled(&d).unwrap();
        let texts: Vec<&str> = ld.sentences.iter().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, vec!["a s0.", "a s1.", "a1 s0.", "b s0."]);
    }

    fn labeled(sizes: &[usize]) -> LabeledDocument {
        let n: usize = sizes.iter().sum();
        let sentences = (0..n).map(|i| Sentence::prose(format!("S{i}."))).collect();
        LabeledDocument::from_segment_sizes("t", sentences, sizes.to_vec()).unwrap()
    }

    #[test]
    fn prepare_drops_first_segment() {
        let prepared = prepare_training_doc(&labeled(&[3, 2, 2])).unwrap();
        assert_eq!(prepared.segment_sizes, vec![2, 2]);
        assert_eq!(prepared.labels, vec![0, 1, 0]);
    }

    #[test]
    fn prepare_rejects_two_segment_doc() {
        assert_eq!(
            prepare_training_doc(&labeled(&[5, 3])).unwrap_err(),
            Rejection::TooFewTrainingSegments { kept: 1 }
        );
    }

    #[test]
    fn omit_list_code_relabels() {
        // Sizes [2, 3] with one list item inside segment 2.
        let sentences = vec![
            Sentence::prose("A one."),
            Sentence::prose("A two."),
            Sentence::prose("B one."),
            Sentence::new("item", SentenceKind::ListItem),
            Sentence::prose("B two."),
        ];
        let ld = LabeledDocument::from_segment_sizes("t", sentences, vec![2, 3]).unwrap();
        let slim = omit_list_code(&ld).unwrap();
        assert_eq!(slim.segment_sizes, vec![2, 2]);
        assert_eq!(slim.labels, vec![0, 1, 0]);
    }

    #[test]
    fn prepare_applies_both_steps() {
        // [3, 2, 3] where the last segment holds a code line: drop the first
        // segment, then the code sentence, landing on sizes [2, 2].
        let sentences = vec![
            Sentence::prose("S0."),
            Sentence::prose("S1."),
            Sentence::prose("S2."),
            Sentence::prose("S3."),
            Sentence::prose("S4."),
            Sentence::new("x = 1", SentenceKind::Code),
            Sentence::prose("S5."),
            Sentence::prose("S6."),
        ];
        let ld = LabeledDocument::from_segment_sizes("t", sentences, vec![3, 2, 3]).unwrap();
        let prepared = prepare_training_doc(&ld).unwrap();
        assert_eq!(prepared.segment_sizes, vec![2, 2]);
        assert_eq!(prepared.labels, vec![0, 1, 0]);
        assert!(prepared.sentences.iter().all(|s| s.kind == SentenceKind::Prose));
    }

    #[test]
    fn segment_emptied_by_omission_disappears() {
        let sentences = vec![
            Sentence::prose("A one."),
            Sentence::new("item one", SentenceKind::ListItem),
            Sentence::new("item two", SentenceKind::ListItem),
            Sentence::prose("C one."),
            Sentence::prose("C two."),
        ];
        let ld = LabeledDocument::from_segment_sizes("t", sentences, vec![1, 2, 2]).unwrap();
        let slim = omit_list_code(&ld).unwrap();
        assert_eq!(slim.segment_sizes, vec![1, 2]);
    }
}
