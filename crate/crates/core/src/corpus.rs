//! Abstract corpora: JSONL ingestion, rule-based sentence segmentation and
//! corpus statistics.
//!
//! Each input line is one abstract:
//!
//! ```text
//! {"doc_id": "PM1", "title": "...", "abstract": "...", "query_terms": ["dementia"], "pub_year": 2021}
//! ```
//!
//! Only the abstract text is segmented and analysed; the title is carried as
//! metadata.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;

static DEFAULT_ABBREVIATIONS: &str = include_str!("../data/abbreviations.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: duplicate doc_id {doc_id:?}")]
    DuplicateId { line: usize, doc_id: String },
}

/// A sentence of an abstract. `char_span` holds byte offsets into the
/// abstract text; `text` is exactly that slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
    pub char_span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractDoc {
    pub doc_id: String,
    pub title: String,
    pub abstract_text: String,
    pub sentences: Vec<Sentence>,
    pub query_terms: Vec<String>,
    pub pub_year: i32,
}

impl AbstractDoc {
    /// Builds a document and segments its abstract with the default rules.
    pub fn new(
        doc_id: impl Into<String>,
        title: impl Into<String>,
        abstract_text: impl Into<String>,
        query_terms: Vec<String>,
        pub_year: i32,
    ) -> Self {
        let abstract_text = abstract_text.into();
        let sentences = segment_sentences(&abstract_text);
        Self {
            doc_id: doc_id.into(),
            title: title.into(),
            abstract_text,
            sentences,
            query_terms,
            pub_year,
        }
    }

    /// Index of the sentence containing the byte range `[start, end)`, if the
    /// range lies inside a single sentence span.
    pub fn sentence_of_span(&self, start: usize, end: usize) -> Option<usize> {
        self.sentences
            .iter()
            .find(|s| start >= s.char_span.0 && end <= s.char_span.1)
            .map(|s| s.index)
    }
}

/// On-disk record layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Record {
    doc_id: String,
    #[serde(default)]
    title: String,
    #[serde(rename = "abstract")]
    abstract_text: String,
    #[serde(default)]
    query_terms: Vec<String>,
    pub_year: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub source: PathBuf,
    pub ingested_at_unix: u64,
    pub count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corpus {
    pub docs: Vec<AbstractDoc>,
    pub manifest: CorpusManifest,
}

/// Corpora compare by content; the manifest's timestamp is ignored.
impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.docs == other.docs
    }
}

impl Corpus {
    pub fn from_docs(docs: Vec<AbstractDoc>, source: impl Into<PathBuf>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for (i, doc) in docs.iter().enumerate() {
            if !seen.insert(doc.doc_id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    line: i + 1,
                    doc_id: doc.doc_id.clone(),
                });
            }
        }
        let count = docs.len();
        Ok(Self {
            docs,
            manifest: CorpusManifest {
                source: source.into(),
                ingested_at_unix: now_unix(),
                count,
            },
        })
    }

    pub fn get(&self, doc_id: &str) -> Option<&AbstractDoc> {
        self.docs.iter().find(|d| d.doc_id == doc_id)
    }

    /// Writes the corpus in its JSONL exchange format.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for doc in &self.docs {
            let rec = Record {
                doc_id: doc.doc_id.clone(),
                title: doc.title.clone(),
                abstract_text: doc.abstract_text.clone(),
                query_terms: doc.query_terms.clone(),
                pub_year: doc.pub_year,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Reads a JSONL corpus file.
pub fn ingest_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ingest_reader(BufReader::new(file), path)
}

pub fn ingest_reader<R: BufRead>(reader: R, source: impl Into<PathBuf>) -> Result<Corpus, CorpusError> {
    let source = source.into();
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::Io {
            path: source.clone(),
            source: e,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if rec.doc_id.trim().is_empty() {
            return Err(CorpusError::Malformed {
                line: line_no,
                message: "empty doc_id".into(),
            });
        }
        if !seen.insert(rec.doc_id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                doc_id: rec.doc_id,
            });
        }
        docs.push(AbstractDoc::new(
            rec.doc_id,
            rec.title,
            rec.abstract_text,
            rec.query_terms,
            rec.pub_year,
        ));
    }
    let count = docs.len();
    Ok(Corpus {
        docs,
        manifest: CorpusManifest {
            source,
            ingested_at_unix: now_unix(),
            count,
        },
    })
}

/// Sentence-boundary rules: a terminal `.`, `!` or `?`, followed by
/// whitespace and then an uppercase letter or digit. A `.` ending one of the
/// listed abbreviations never closes a sentence.
#[derive(Debug, Clone)]
pub struct Segmenter {
    abbreviations: Vec<String>,
}

impl Default for Segmenter {
    fn default() -> Self {
        Self::from_list(DEFAULT_ABBREVIATIONS)
    }
}

impl Segmenter {
    /// Parses an abbreviation list: one entry per line, `#` comments.
    pub fn from_list(list: &str) -> Self {
        let abbreviations = list
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.to_ascii_lowercase())
            .collect();
        Self { abbreviations }
    }

    pub fn from_file(path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(Self::from_list(&std::fs::read_to_string(path)?))
    }

    pub fn abbreviations(&self) -> &[String] {
        &self.abbreviations
    }

    fn is_abbreviation(&self, text: &str, end: usize) -> bool {
        let head = &text[..end];
        self.abbreviations.iter().any(|abbr| {
            if abbr.len() > head.len() {
                return false;
            }
            let start = head.len() - abbr.len();
            if !head.is_char_boundary(start) || !head[start..].eq_ignore_ascii_case(abbr) {
                return false;
            }
            head[..start]
                .chars()
                .next_back()
                .is_none_or(|c| !c.is_alphanumeric())
        })
    }

    pub fn segment(&self, text: &str) -> Vec<Sentence> {
        let mut sentences = Vec::new();
        let mut start: Option<usize> = None;
        let mut chars = text.char_indices().peekable();

        while let Some((i, c)) = chars.next() {
            if start.is_none() {
                if c.is_whitespace() {
                    continue;
                }
                start = Some(i);
            }
            if !matches!(c, '.' | '!' | '?') {
                continue;
            }
            let end = i + c.len_utf8();
            let rest = &text[end..];
            let after_ws = rest.trim_start();
            if after_ws.len() == rest.len() {
                // no whitespace after the terminal
                continue;
            }
            let opens_sentence = after_ws
                .chars()
                .next()
                .is_some_and(|n| n.is_uppercase() || n.is_ascii_digit());
            if !opens_sentence || (c == '.' && self.is_abbreviation(text, end)) {
                continue;
            }
            let s = start.take().expect("sentence start set");
            sentences.push(Sentence {
                index: sentences.len(),
                text: text[s..end].to_string(),
                char_span: (s, end),
            });
        }
        if let Some(s) = start {
            let end = s + text[s..].trim_end().len();
            if end > s {
                sentences.push(Sentence {
                    index: sentences.len(),
                    text: text[s..end].to_string(),
                    char_span: (s, end),
                });
            }
        }
        sentences
    }
}

fn default_segmenter() -> &'static Segmenter {
    static SEG: OnceLock<Segmenter> = OnceLock::new();
    SEG.get_or_init(Segmenter::default)
}

/// Segments `text` with the bundled abbreviation list.
pub fn segment_sentences(text: &str) -> Vec<Sentence> {
    default_segmenter().segment(text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count: usize,
    pub sentence_count: usize,
    pub per_query_term: BTreeMap<String, usize>,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut per_query_term = BTreeMap::new();
    for doc in &corpus.docs {
        for term in &doc.query_terms {
            *per_query_term.entry(term.clone()).or_insert(0) += 1;
        }
    }
    CorpusStats {
        doc_count: corpus.docs.len(),
        sentence_count: corpus.docs.iter().map(|d| d.sentences.len()).sum(),
        per_query_term,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn texts(s: &[Sentence]) -> Vec<&str> {
        s.iter().map(|s| s.text.as_str()).collect()
    }

    #[test]
    fn three_terminals() {
        let s = segment_sentences("A. B? C!");
        assert_eq!(texts(&s), ["A.", "B?", "C!"]);
        assert_eq!(s[1].char_span, (3, 5));
    }

    #[test]
    fn empty_text() {
        assert!(segment_sentences("").is_empty());
        assert!(segment_sentences("   \n ").is_empty());
    }

    #[test]
    fn abbreviations_do_not_split() {
        let s = segment_sentences("Smith et al. reported X. Then Y.");
        assert_eq!(texts(&s), ["Smith et al. reported X.", "Then Y."]);
        let s = segment_sentences("Risk factors (e.g. Poverty) matter. Dr. Smith agreed.");
        assert_eq!(texts(&s), ["Risk factors (e.g. Poverty) matter.", "Dr. Smith agreed."]);
    }

    #[test]
    fn lowercase_continuation_is_not_a_boundary() {
        let s = segment_sentences("Values were 3.5 mg. and rising. Then 2019 came.");
        assert_eq!(texts(&s), ["Values were 3.5 mg. and rising.", "Then 2019 came."]);
    }

    #[test]
    fn digits_open_sentences() {
        let s = segment_sentences("We enrolled adults. 120 were women.");
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn abbreviation_must_be_whole_token() {
        // "cf." is listed, "leaf." is not an abbreviation
        let s = segment_sentences("Compare the leaf. Then the root.");
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn custom_list() {
        let seg = Segmenter::from_list("# none\nApprox.\n");
        assert_eq!(seg.abbreviations(), ["approx."]);
        assert_eq!(seg.segment("Approx. Ten were lost. Smith et al. Found more.").len(), 3);
    }

    #[test]
    fn two_record_file() {
        let data = r#"{"doc_id":"PM1","title":"t","abstract":"One. Two.","query_terms":["dementia"],"pub_year":2020}
{"doc_id":"PM2","title":"u","abstract":"Three.","query_terms":["dementia","poverty"],"pub_year":2021}
"#;
        let c = ingest_reader(data.as_bytes(), "mem").unwrap();
        assert_eq!(c.docs.len(), 2);
        assert_eq!(c.manifest.count, 2);
        let stats = corpus_stats(&c);
        assert_eq!((stats.doc_count, stats.sentence_count), (2, 3));
        assert_eq!(stats.per_query_term["dementia"], 2);
        assert_eq!(stats.per_query_term["poverty"], 1);
    }

    #[test]
    fn duplicate_id_rejected() {
        let data = r#"{"doc_id":"PM1","abstract":"A.","pub_year":2020}
{"doc_id":"PM1","abstract":"B.","pub_year":2020}
"#;
        match ingest_reader(data.as_bytes(), "mem") {
            Err(CorpusError::DuplicateId { doc_id, line }) => {
                assert_eq!(doc_id, "PM1");
                assert_eq!(line, 2);
            }
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_named() {
        let data = "{\"doc_id\":\"PM1\",\"abstract\":\"A.\",\"pub_year\":2020}\n{not json\n";
        match ingest_reader(data.as_bytes(), "mem") {
            Err(CorpusError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn stats_of_empty_and_counted_corpus() {
        let empty = Corpus::from_docs(vec![], "mem").unwrap();
        let s = corpus_stats(&empty);
        assert_eq!((s.doc_count, s.sentence_count), (0, 0));

        let a = AbstractDoc::new("a", "", "One. Two. Three.", vec![], 2020);
        let b = AbstractDoc::new("b", "", "One. Two. Three. Four.", vec![], 2020);
        let c = Corpus::from_docs(vec![a, b], "mem").unwrap();
        let s = corpus_stats(&c);
        assert_eq!((s.doc_count, s.sentence_count), (2, 7));
    }

    fn normalize_ws(s: &str) -> String {
        s.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    fn word() -> impl Strategy<Value = String> {
        prop_oneof![
            "[a-z]{1,8}",
            "[A-Z][a-z]{0,6}",
            "[0-9]{1,3}",
            Just("et al.".to_string()),
            Just("e.g.".to_string()),
            Just("Dr.".to_string()),
        ]
    }

    fn sentence_text() -> impl Strategy<Value = String> {
        (prop::collection::vec(word(), 1..8), prop::sample::select(vec![".", "!", "?"]))
            .prop_map(|(words, end)| format!("{}{}", words.join(" "), end))
    }

    fn abstract_text() -> impl Strategy<Value = String> {
        prop::collection::vec((sentence_text(), prop::sample::select(vec![" ", "  ", "\n", " \t "])), 0..6)
            .prop_map(|parts| parts.into_iter().map(|(s, ws)| format!("{s}{ws}")).collect())
    }

    proptest! {
        #[test]
        fn spans_partition_text(text in abstract_text()) {
            let sentences = segment_sentences(&text);
            let mut prev_end = 0;
            for (i, s) in sentences.iter().enumerate() {
                prop_assert_eq!(s.index, i);
                prop_assert!(s.char_span.0 >= prev_end);
                prop_assert!(s.char_span.0 < s.char_span.1);
                prop_assert_eq!(&text[s.char_span.0..s.char_span.1], s.text.as_str());
                prev_end = s.char_span.1;
            }
            let joined = sentences.iter().map(|s| s.text.as_str()).collect::<Vec<_>>().join(" ");
            prop_assert_eq!(normalize_ws(&joined), normalize_ws(&text));
        }

        #[test]
        fn segmentation_idempotent(text in abstract_text()) {
            for s in segment_sentences(&text) {
                let again = segment_sentences(&s.text);
                prop_assert_eq!(again.len(), 1);
                prop_assert_eq!(&again[0].text, &s.text);
            }
        }

        #[test]
        fn jsonl_round_trip(texts in prop::collection::vec(abstract_text(), 0..5), year in 1990i32..2030) {
            let docs: Vec<_> = texts
                .into_iter()
                .enumerate()
                .map(|(i, t)| AbstractDoc::new(format!("PM{i}"), format!("title {i}"), t, vec!["dementia".into()], year))
                .collect();
            let corpus = Corpus::from_docs(docs, "mem").unwrap();
            let mut buf = Vec::new();
            corpus.write_jsonl(&mut buf).unwrap();
            let back = ingest_reader(buf.as_slice(), "mem").unwrap();
            prop_assert_eq!(back, corpus);
        }
    }
}
