//! On-disk formats: the segment-separator document format, JSON labeled
//! records, and newline-delimited split manifests.

use super::splitter::split_sentences;
use super::{CorpusError, Document, LabeledDocument, Segment, Sentence, SentenceKind};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// Separator lines look like `========,<level>,<title>.`
pub const SEPARATOR_PREFIX: &str = "========,";
/// Line prefix marking a residual list item.
pub const LIST_PREFIX: &str = "***LIST***";
/// Line prefix marking a residual code line.
pub const CODE_PREFIX: &str = "***CODE***";

/// Parses a document in the segment-separator format. Content before the
/// first separator becomes an untitled level-1 segment.
pub fn parse_document(raw: &str, id: &str) -> Result<Document, CorpusError> {
    let mut top: Vec<Segment> = Vec::new();
    let mut stack: Vec<Segment> = Vec::new();
    for (idx, raw_line) in raw.lines().enumerate() {
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        let lineno = idx + 1;
        if let Some(rest) = line.strip_prefix(SEPARATOR_PREFIX) {
            let (level, title) = parse_separator(rest, id, lineno)?;
            while stack.last().is_some_and(|s| s.level >= level) {
                pop_attach(&mut stack, &mut top);
            }
            if level > 1 && stack.last().map(|s| s.level) != Some(level - 1) {
                return Err(CorpusError::LevelJump {
                    path: id.to_string(),
                    line: lineno,
                    level,
                });
            }
            stack.push(Segment {
                level,
                title,
                sentences: Vec::new(),
                children: Vec::new(),
            });
        } else if let Some(rest) = line.strip_prefix(LIST_PREFIX) {
            push_marked(&mut stack, rest, SentenceKind::ListItem);
        } else if let Some(rest) = line.strip_prefix(CODE_PREFIX) {
            push_marked(&mut stack, rest, SentenceKind::Code);
        } else {
            let sentences = split_sentences(line);
            if !sentences.is_empty() {
                current(&mut stack).sentences.extend(sentences);
            }
        }
    }
    while !stack.is_empty() {
        pop_attach(&mut stack, &mut top);
    }
    Ok(Document {
        id: id.to_string(),
        segments: top,
    })
}

fn parse_separator(rest: &str, id: &str, lineno: usize) -> Result<(u32, String), CorpusError> {
    let malformed = |reason: &str| CorpusError::MalformedSeparator {
        path: id.to_string(),
        line: lineno,
        reason: reason.to_string(),
    };
    let (level_str, title_raw) = rest
        .split_once(',')
        .ok_or_else(|| malformed("missing comma between level and title"))?;
    let level: u32 = level_str
        .trim()
        .parse()
        .map_err(|_| malformed("level is not a positive integer"))?;
    if level == 0 {
        return Err(malformed("level is not a positive integer"));
    }
    let title = title_raw.strip_suffix('.').unwrap_or(title_raw).to_string();
    Ok((level, title))
}

fn push_marked(stack: &mut Vec<Segment>, rest: &str, kind: SentenceKind) {
    let text = rest.trim();
    if !text.is_empty() {
        current(stack).sentences.push(Sentence::new(text, kind));
    }
}

/// The innermost open segment, creating an implicit level-1 segment for
/// content that precedes any separator.
fn current(stack: &mut Vec<Segment>) -> &mut Segment {
    if stack.is_empty() {
        stack.push(Segment {
            level: 1,
            title: String::new(),
            sentences: Vec::new(),
            children: Vec::new(),
        });
    }
    stack.last_mut().expect("stack is non-empty")
}

fn pop_attach(stack: &mut Vec<Segment>, top: &mut Vec<Segment>) {
    let seg = stack.pop().expect("pop on non-empty stack");
    match stack.last_mut() {
        Some(parent) => parent.children.push(seg),
        None => top.push(seg),
    }
}

/// Renders a document back into the segment-separator format. One sentence
/// per line; list/code sentences get their marker prefix back.
pub fn serialize_document(doc: &Document) -> String {
    let mut out = String::new();
    for seg in &doc.segments {
        emit(seg, &mut out);
    }
    out
}

fn emit(seg: &Segment, out: &mut String) {
    let _ = writeln!(out, "{SEPARATOR_PREFIX}{},{}.", seg.level, seg.title);
    for s in &seg.sentences {
        match s.kind {
            SentenceKind::Prose => {
                let _ = writeln!(out, "{}", s.text);
            }
            SentenceKind::ListItem => {
                let _ = writeln!(out, "{LIST_PREFIX} {}", s.text);
            }
            SentenceKind::Code => {
                let _ = writeln!(out, "{CODE_PREFIX} {}", s.text);
            }
        }
    }
    for child in &seg.children {
        emit(child, out);
    }
}

/// JSON record for one labeled document. `kinds` parallels `sentences`; it is
/// omitted when every sentence is prose and assumed prose when absent, so the
/// records stay minimal for the common case.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub id: String,
    pub sentences: Vec<String>,
    pub labels: Vec<u8>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub kinds: Vec<SentenceKind>,
}

impl LabeledRecord {
    pub fn from_doc(doc: &LabeledDocument) -> Self {
        let all_prose = doc.sentences.iter().all(|s| s.kind == SentenceKind::Prose);
        LabeledRecord {
            id: doc.id.clone(),
            sentences: doc.sentences.iter().map(|s| s.text.clone()).collect(),
            labels: doc.labels.clone(),
            kinds: if all_prose {
                Vec::new()
            } else {
                doc.sentences.iter().map(|s| s.kind).collect()
            },
        }
    }

    pub fn into_doc(self) -> Result<LabeledDocument, CorpusError> {
        let kinds: Vec<SentenceKind> = if self.kinds.is_empty() {
            vec![SentenceKind::Prose; self.sentences.len()]
        } else if self.kinds.len() == self.sentences.len() {
            self.kinds
        } else {
            return Err(CorpusError::InvalidLabeled {
                id: self.id,
                reason: format!(
                    "kinds has length {} but sentences has length {}",
                    self.kinds.len(),
                    self.sentences.len()
                ),
            });
        };
        let sentences = self
            .sentences
            .into_iter()
            .zip(kinds)
            .map(|(text, kind)| Sentence::new(text, kind))
            .collect();
        LabeledDocument::from_labels(self.id, sentences, self.labels)
    }
}

/// Writes one labeled document as a JSON record file.
pub fn write_labeled_record(path: &Path, doc: &LabeledDocument) -> Result<(), CorpusError> {
    let record = LabeledRecord::from_doc(doc);
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    fs::write(path, json).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads one labeled document from a JSON record file.
pub fn read_labeled_record(path: &Path) -> Result<LabeledDocument, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let record: LabeledRecord =
        serde_json::from_str(&raw).map_err(|e| CorpusError::BadRecord {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
    record.into_doc()
}

/// Writes a split manifest: one relative path per line.
pub fn write_manifest(path: &Path, rel_paths: &[String]) -> Result<(), CorpusError> {
    let mut body = rel_paths.join("\n");
    if !body.is_empty() {
        body.push('\n');
    }
    fs::write(path, body).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads every document listed in a split manifest. Paths in the manifest are
/// resolved relative to the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<LabeledDocument>, CorpusError> {
    let raw = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let files: Vec<PathBuf> = super::manifest_paths(&raw, &base);
    files.iter().map(|p| read_labeled_record(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_top_level_segments() {
        let raw = "========,1,Intro.\nFirst segment text here.\n========,1,Next.\nSecond segment text here.\n";
        let doc = parse_document(raw, "t").unwrap();
        assert_eq!(doc.segments.len(), 2);
        assert_eq!(doc.segments[0].title, "Intro");
        assert_eq!(doc.segments[0].sentences.len(), 1);
        assert_eq!(doc.segments[1].sentences.len(), 1);
    }

    #[test]
    fn nests_level_two_under_level_one() {
        let raw = "========,1,A.\nTop text.\n========,2,B.\nChild text.\n========,1,C.\nOther text.\n";
        let doc = parse_document(raw, "t").unwrap();
        assert_eq!(doc.segments.len(), 2);
        assert_eq!(doc.segments[0].children.len(), 1);
        assert_eq!(doc.segments[0].children[0].title, "B");
        assert!(doc.segments[1].children.is_empty());
    }

    #[test]
    fn bad_level_is_malformed() {
        let err = parse_document("========,x,Bad.\n", "t").unwrap_err();
        assert!(matches!(err, CorpusError::MalformedSeparator { line: 1, .. }));
    }

    #[test]
    fn missing_comma_is_malformed() {
        let err = parse_document("========,1 NoTitle\n", "t").unwrap_err();
        assert!(matches!(err, CorpusError::MalformedSeparator { .. }));
    }

    #[test]
    fn level_jump_is_rejected() {
        let raw = "========,1,A.\nText here.\n========,3,Deep.\nMore text.\n";
        let err = parse_document(raw, "t").unwrap_err();
        assert!(matches!(err, CorpusError::LevelJump { level: 3, .. }));
    }

    #[test]
    fn leading_content_becomes_untitled_segment() {
        let raw = "Preamble sentence here.\n========,1,A.\nBody text.\n";
        let doc = parse_document(raw, "t").unwrap();
        assert_eq!(doc.segments.len(), 2);
        assert_eq!(doc.segments[0].title, "");
        assert_eq!(doc.segments[0].sentences[0].text, "Preamble sentence here.");
    }

    #[test]
    fn list_and_code_markers_set_kind() {
        let raw = "========,1,A.\nProse sentence.\n***LIST*** first item\n***CODE*** let x = 1;\n";
        let doc = parse_document(raw, "t").unwrap();
        let kinds: Vec<SentenceKind> = doc.segments[0].sentences.iter().map(|s| s.kind).collect();
        assert_eq!(
            kinds,
            vec![SentenceKind::Prose, SentenceKind::ListItem, SentenceKind::Code]
        );
    }

    #[test]
    fn multi_sentence_line_is_split() {
        let raw = "========,1,A.\nOne here. Two here.\n";
        let doc = parse_document(raw, "t").unwrap();
        assert_eq!(doc.segments[0].sentences.len(), 2);
    }

    #[test]
    fn title_keeps_interior_commas_and_periods() {
        let raw = "========,2,摘要.\n"; // level 2 with no parent
        assert!(parse_document(raw, "t").is_err());
        let doc = parse_document("========,1,St. Mary, Part 1.\nText here.\n", "t").unwrap();
        assert_eq!(doc.segments[0].title, "St. Mary, Part 1");
    }

    #[test]
    fn serialize_then_parse_round_trips() {
        let raw = "========,1,A.\nOne here.\n***LIST*** item one\n========,2,B.\nTwo here. Three here.\n========,1,C.\nFour here.\n";
        let doc = parse_document(raw, "t").unwrap();
        let rendered = serialize_document(&doc);
        let reparsed = parse_document(&rendered, "t").unwrap();
        assert_eq!(doc, reparsed);
    }

    #[test]
    fn record_round_trips_through_json() {
        let sentences = vec![
            Sentence::prose("One here."),
            Sentence::new("item", SentenceKind::ListItem),
            Sentence::prose("Two here."),
        ];
        let doc = LabeledDocument::from_segment_sizes("doc1", sentences, vec![2, 1]).unwrap();
        let record = LabeledRecord::from_doc(&doc);
        let json = serde_json::to_string(&record).unwrap();
        assert!(json.contains("\"list_item\""));
        let back: LabeledRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_doc().unwrap(), doc);
    }

    #[test]
    fn all_prose_record_omits_kinds() {
        let doc = LabeledDocument::from_segment_sizes(
            "doc1",
            vec![Sentence::prose("A one."), Sentence::prose("B two.")],
            vec![1, 1],
        )
        .unwrap();
        let json = serde_json::to_string(&LabeledRecord::from_doc(&doc)).unwrap();
        assert!(!json.contains("kinds"));
        let back: LabeledRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.into_doc().unwrap(), doc);
    }

    #[test]
    fn record_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let doc = LabeledDocument::from_segment_sizes(
            "doc1",
            vec![Sentence::prose("A one."), Sentence::prose("B two.")],
            vec![1, 1],
        )
        .unwrap();
        let path = dir.path().join("doc1.json");
        write_labeled_record(&path, &doc).unwrap();
        assert_eq!(read_labeled_record(&path).unwrap(), doc);
    }

    #[test]
    fn manifest_round_trips_and_resolves_relative() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("docs")).unwrap();
        let doc = LabeledDocument::from_segment_sizes(
            "doc1",
            vec![Sentence::prose("A one."), Sentence::prose("B two.")],
            vec![1, 1],
        )
        .unwrap();
        write_labeled_record(&dir.path().join("docs/doc1.json"), &doc).unwrap();
        let manifest = dir.path().join("train.txt");
        write_manifest(&manifest, &["docs/doc1.json".to_string()]).unwrap();
        let corpus = read_manifest(&manifest).unwrap();
        assert_eq!(corpus, vec![doc]);
    }
}
