//! Document corpora: loading, validation, persistence and synthesis.
//!
//! A corpus is an ordered list of documents. Each document carries an id and,
//! optionally, raw text, a class label and a feature vector. Documents that
//! only have text are vectorized later by [`embed_tfidf`].

mod synth;
mod tfidf;

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use synth::synth_clusters;
pub use tfidf::{embed_tfidf, embed_tfidf_capped, tokenize, DEFAULT_TARGET_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocRecord {
    pub id: String,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub label: Option<usize>,
    #[serde(default)]
    pub vector: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses the format from a file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

/// A validated, immutable collection of documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<DocRecord>", into = "Vec<DocRecord>")]
pub struct Corpus {
    docs: Vec<DocRecord>,
    dim: Option<usize>,
    label_count: usize,
}

impl TryFrom<Vec<DocRecord>> for Corpus {
    type Error = Error;

    fn try_from(docs: Vec<DocRecord>) -> Result<Self> {
        Corpus::new(docs)
    }
}

impl From<Corpus> for Vec<DocRecord> {
    fn from(c: Corpus) -> Self {
        c.docs
    }
}

impl Corpus {
    /// Validates `docs` and builds a corpus.
    ///
    /// Rejects empty input, duplicate ids, rows with neither text nor vector,
    /// vectors whose length differs from the first vector seen, vectors with
    /// fewer than two components, non-finite components and label sets that
    /// are not a contiguous `0..K` range.
    pub fn new(docs: Vec<DocRecord>) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::InvalidCorpus("corpus has no documents".into()));
        }
        let mut seen = HashMap::with_capacity(docs.len());
        let mut dim: Option<usize> = None;
        for (row, doc) in docs.iter().enumerate() {
            if doc.id.is_empty() {
                return Err(Error::InvalidRow { row, message: "empty id".into() });
            }
            if let Some(first) = seen.insert(doc.id.as_str(), row) {
                return Err(Error::InvalidRow {
                    row,
                    message: format!("duplicate id {:?} (first seen at row {first})", doc.id),
                });
            }
            match &doc.vector {
                Some(v) => {
                    let expected = *dim.get_or_insert(v.len());
                    if v.len() != expected {
                        return Err(Error::InvalidRow {
                            row,
                            message: format!(
                                "vector has dimension {} but corpus dimension is {expected}",
                                v.len()
                            ),
                        });
                    }
                    if v.len() < 2 {
                        return Err(Error::InvalidRow {
                            row,
                            message: "vector dimension must be at least 2".into(),
                        });
                    }
                    if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                        return Err(Error::InvalidRow {
                            row,
                            message: format!("non-finite value at component {k}"),
                        });
                    }
                }
                None if doc.text.is_none() => {
                    return Err(Error::InvalidRow {
                        row,
                        message: "row has neither vector nor text".into(),
                    });
                }
                None => {}
            }
        }

        let labels: BTreeSet<usize> = docs.iter().filter_map(|d| d.label).collect();
        if let Some(&max) = labels.iter().next_back() {
            if max + 1 != labels.len() {
                return Err(Error::InvalidCorpus(format!(
                    "labels must form a contiguous range 0..K, found {labels:?}"
                )));
            }
        }
        let label_count = labels.len();
        Ok(Corpus { docs, dim, label_count })
    }

    pub fn docs(&self) -> &[DocRecord] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Vector dimension, if any document carries a vector.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    /// True when every document has a vector.
    pub fn is_vectorized(&self) -> bool {
        self.docs.iter().all(|d| d.vector.is_some())
    }

    /// True when every document has a label.
    pub fn is_fully_labeled(&self) -> bool {
        self.docs.iter().all(|d| d.label.is_some())
    }

    /// Labels of all documents, if every document is labeled.
    pub fn labels(&self) -> Option<Vec<usize>> {
        self.docs.iter().map(|d| d.label).collect()
    }

    /// Position of a document id in corpus order.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.docs.iter().position(|d| d.id == id)
    }

    /// Map from document id to corpus position.
    pub fn index_map(&self) -> HashMap<&str, usize> {
        self.docs.iter().enumerate().map(|(i, d)| (d.id.as_str(), i)).collect()
    }

    /// The N×D feature matrix in corpus order.
    pub fn matrix(&self) -> Result<Array2<f64>> {
        let dim = self
            .dim
            .filter(|_| self.is_vectorized())
            .ok_or_else(|| Error::InvalidCorpus("corpus is not fully vectorized".into()))?;
        let mut m = Array2::zeros((self.docs.len(), dim));
        for (i, doc) in self.docs.iter().enumerate() {
            let v = doc.vector.as_ref().expect("checked above");
            for (j, &x) in v.iter().enumerate() {
                m[[i, j]] = x;
            }
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Self> {
        let file = File::open(path.as_ref())?;
        match format {
            CorpusFormat::Jsonl => Self::read_jsonl(BufReader::new(file)),
            CorpusFormat::Csv => Self::read_csv(file),
        }
    }

    pub fn read_jsonl(reader: impl BufRead) -> Result<Self> {
        let mut docs = Vec::new();
        for (row, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let doc: DocRecord = serde_json::from_str(&line).map_err(|e| Error::InvalidRow {
                row,
                message: e.to_string(),
            })?;
            docs.push(doc);
        }
        Corpus::new(docs)
    }

    /// Reads the `id,label,v0..v{D-1}` CSV layout. An empty label cell means
    /// unlabeled.
    pub fn read_csv(reader: impl std::io::Read) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 || &headers[0] != "id" || &headers[1] != "label" {
            return Err(Error::InvalidCorpus(
                "csv header must start with id,label".into(),
            ));
        }
        let mut docs = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            let bad = |message: String| Error::InvalidRow { row, message };
            let label = match record.get(1).map(str::trim) {
                None | Some("") => None,
                Some(s) => Some(s.parse::<usize>().map_err(|e| bad(format!("label: {e}")))?),
            };
            let vector = record
                .iter()
                .skip(2)
                .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("value {s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            docs.push(DocRecord {
                id: record[0].to_string(),
                text: None,
                label,
                vector: Some(vector),
            });
        }
        Corpus::new(docs)
    }

    pub fn save(&self, path: impl AsRef<Path>, format: CorpusFormat) -> Result<()> {
        let mut w = BufWriter::new(File::create(path.as_ref())?);
        match format {
            CorpusFormat::Jsonl => self.write_jsonl(&mut w)?,
            CorpusFormat::Csv => self.write_csv(&mut w)?,
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        for doc in &self.docs {
            serde_json::to_writer(&mut w, doc)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let dim = self
            .dim
            .filter(|_| self.is_vectorized())
            .ok_or_else(|| Error::InvalidCorpus("csv export needs vectors for every row".into()))?;
        let mut wtr = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend((0..dim).map(|j| format!("v{j}")));
        wtr.write_record(&header)?;
        for doc in &self.docs {
            let mut rec = vec![
                doc.id.clone(),
                doc.label.map(|l| l.to_string()).unwrap_or_default(),
            ];
            rec.extend(doc.vector.as_ref().expect("vectorized").iter().map(|x| x.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Copy with every label removed. Pipelines only ever see this view.
    pub fn without_labels(&self) -> Corpus {
        let docs = self
            .docs
            .iter()
            .map(|d| DocRecord { label: None, ..d.clone() })
            .collect();
        Corpus { docs, dim: self.dim, label_count: 0 }
    }

    /// Returns a copy with vectors replaced row by row.
    pub(crate) fn with_vectors(&self, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let docs = self
            .docs
            .iter()
            .cloned()
            .zip(vectors)
            .map(|(mut d, v)| {
                d.vector = Some(v);
                d
            })
            .collect();
        Corpus::new(docs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, label: Option<usize>, v: &[f64]) -> DocRecord {
        DocRecord { id: id.into(), text: None, label, vector: Some(v.to_vec()) }
    }

    #[test]
    fn parses_three_row_jsonl() {
        let src = r#"{"id":"a","text":null,"label":0,"vector":[1,2,3,4]}
{"id":"b","text":"hello","label":1,"vector":[0,0,0,1]}
{"id":"c","label":null,"vector":[0.5,0.5,0.5,0.5]}
"#;
        let c = Corpus::read_jsonl(src.as_bytes()).unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.dim(), Some(4));
        assert_eq!(c.label_count(), 2);
        assert!(!c.is_fully_labeled());
    }

    #[test]
    fn rejects_dimension_mismatch_with_row() {
        let src = "{\"id\":\"a\",\"vector\":[1,2,3,4]}\n{\"id\":\"b\",\"vector\":[1,2,3]}\n";
        match Corpus::read_jsonl(src.as_bytes()) {
            Err(Error::InvalidRow { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_non_finite_and_gappy_labels() {
        let dup = vec![doc("a", None, &[1.0, 2.0]), doc("a", None, &[1.0, 2.0])];
        assert!(matches!(Corpus::new(dup), Err(Error::InvalidRow { row: 1, .. })));

        let nan = vec![doc("a", None, &[1.0, f64::NAN])];
        assert!(matches!(Corpus::new(nan), Err(Error::InvalidRow { row: 0, .. })));

        let gap = vec![doc("a", Some(0), &[1.0, 2.0]), doc("b", Some(2), &[1.0, 2.0])];
        assert!(matches!(Corpus::new(gap), Err(Error::InvalidCorpus(_))));

        let empty = DocRecord { id: "x".into(), text: None, label: None, vector: None };
        assert!(Corpus::new(vec![empty]).is_err());
        assert!(Corpus::new(vec![]).is_err());
    }

    #[test]
    fn case_study_shaped_corpus_has_four_labels() {
        let sizes = [15, 13, 23, 11];
        let mut docs = Vec::new();
        for (label, &n) in sizes.iter().enumerate() {
            for k in 0..n {
                docs.push(doc(&format!("c{label}-{k}"), Some(label), &[label as f64, k as f64]));
            }
        }
        let c = Corpus::new(docs).unwrap();
        assert_eq!(c.len(), 62);
        assert_eq!(c.label_count(), 4);
    }

    #[test]
    fn csv_round_trip() {
        let c = Corpus::new(vec![
            doc("a", Some(0), &[0.1, -2.5e-7, 3.0]),
            doc("b", None, &[1.0 / 3.0, 2.0, f64::MAX]),
        ])
        .unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("id,label,v0,v1,v2\n"));
        assert_eq!(Corpus::read_csv(buf.as_slice()).unwrap(), c);
    }

    #[test]
    fn text_only_rows_are_not_vectorized() {
        let docs = vec![DocRecord {
            id: "t".into(),
            text: Some("some words".into()),
            label: None,
            vector: None,
        }];
        let c = Corpus::new(docs).unwrap();
        assert!(!c.is_vectorized());
        assert!(c.matrix().is_err());
    }
}
