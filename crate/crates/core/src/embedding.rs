//! Embedding matrices: loading, validation, frequency attachment, and row
//! normalization.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use ndarray::Array2;

use crate::error::{CoreError, Result};

/// A dense n x d embedding matrix with an aligned vocabulary and per-word
/// corpus frequencies.
///
/// Immutable after construction; cheap to share across threads behind an
/// `Arc`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    vectors: Array2<f64>,
    vocab: Vec<String>,
    freq: Vec<u64>,
    index: HashMap<String, usize>,
}

impl EmbeddingMatrix {
    /// Builds a matrix, validating vocabulary uniqueness, alignment, and
    /// value finiteness.
    pub fn new(vectors: Array2<f64>, vocab: Vec<String>, freq: Vec<u64>) -> Result<Self> {
        if vocab.len() != vectors.nrows() {
            return Err(CoreError::LengthMismatch {
                left: vocab.len(),
                right: vectors.nrows(),
            });
        }
        if freq.len() != vocab.len() {
            return Err(CoreError::LengthMismatch {
                left: freq.len(),
                right: vocab.len(),
            });
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, word) in vocab.iter().enumerate() {
            if index.insert(word.clone(), i).is_some() {
                return Err(CoreError::DuplicateWord(word.clone()));
            }
        }
        for (i, row) in vectors.rows().into_iter().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::NonFiniteValue(vocab[i].clone()));
            }
        }
        Ok(Self {
            vectors,
            vocab,
            freq,
            index,
        })
    }

    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn d(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn freq(&self) -> &[u64] {
        &self.freq
    }

    pub fn word(&self, row: usize) -> &str {
        &self.vocab[row]
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Attaches corpus frequencies loaded from a TSV file.
    ///
    /// Vocabulary words missing from the table default to 0 with a warning;
    /// in strict mode a missing entry is an error. Returns the matrix and
    /// the number of missing entries.
    pub fn with_frequencies(self, table: &FrequencyTable, strict: bool) -> Result<(Self, usize)> {
        let mut freq = Vec::with_capacity(self.vocab.len());
        let mut missing = 0usize;
        for word in &self.vocab {
            match table.counts.get(word) {
                Some(&c) => freq.push(c),
                None if strict => return Err(CoreError::MissingFrequency(word.clone())),
                None => {
                    missing += 1;
                    freq.push(0);
                }
            }
        }
        if missing > 0 {
            log::warn!("{missing} vocabulary words had no frequency entry; defaulted to 0");
        }
        Ok((
            Self {
                vectors: self.vectors,
                vocab: self.vocab,
                freq,
                index: self.index,
            },
            missing,
        ))
    }
}

/// Word frequency table parsed from a `word<TAB>count` file.
#[derive(Debug, Default, Clone)]
pub struct FrequencyTable {
    pub counts: HashMap<String, u64>,
    /// Number of lines that overwrote an earlier entry for the same word.
    pub duplicate_overwrites: usize,
}

/// Loads a word2vec-style text file: a header line `n d` followed by `n`
/// lines of `word v1 ... vd`.
///
/// Frequencies are initialized to 0; attach a [`FrequencyTable`] afterwards.
pub fn load_word2vec_text(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let header = lines
        .next()
        .ok_or_else(|| CoreError::Parse {
            path: display.clone(),
            line: 1,
            message: "empty file".into(),
        })?
        .1?;
    let mut parts = header.split_whitespace();
    let parse_dim = |s: Option<&str>, what: &str| -> Result<usize> {
        s.and_then(|v| v.parse::<usize>().ok())
            .ok_or_else(|| CoreError::Parse {
                path: display.clone(),
                line: 1,
                message: format!("header must be 'n d'; bad {what}"),
            })
    };
    let n = parse_dim(parts.next(), "row count")?;
    let d = parse_dim(parts.next(), "dimension")?;
    if parts.next().is_some() {
        return Err(CoreError::Parse {
            path: display,
            line: 1,
            message: "header must be exactly 'n d'".into(),
        });
    }

    let mut data = Vec::with_capacity(n * d);
    let mut vocab = Vec::with_capacity(n);
    let mut rows = 0usize;
    for (lineno, line) in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if rows == n {
            return Err(CoreError::RowCountMismatch {
                expected: n,
                found: rows + 1,
            });
        }
        let mut fields = line.split_whitespace();
        let word = fields.next().ok_or_else(|| CoreError::Parse {
            path: display.clone(),
            line: lineno + 1,
            message: "missing word".into(),
        })?;
        let mut count = 0usize;
        for field in fields {
            let value: f64 = field.parse().map_err(|_| CoreError::Parse {
                path: display.clone(),
                line: lineno + 1,
                message: format!("bad float '{field}'"),
            })?;
            if !value.is_finite() {
                return Err(CoreError::NonFiniteValue(word.to_string()));
            }
            data.push(value);
            count += 1;
        }
        if count != d {
            return Err(CoreError::Parse {
                path: display.clone(),
                line: lineno + 1,
                message: format!("expected {d} values, found {count}"),
            });
        }
        vocab.push(word.to_string());
        rows += 1;
    }
    if rows != n {
        return Err(CoreError::RowCountMismatch {
            expected: n,
            found: rows,
        });
    }

    let vectors = Array2::from_shape_vec((n, d), data).expect("shape checked above");
    let freq = vec![0; n];
    EmbeddingMatrix::new(vectors, vocab, freq)
}

/// Loads a `word<TAB>count` frequency file. Later duplicate lines overwrite
/// earlier ones; the overwrite count is reported on the table.
pub fn load_frequencies(path: impl AsRef<Path>) -> Result<FrequencyTable> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut table = FrequencyTable::default();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (word, raw) = line.split_once('\t').ok_or_else(|| CoreError::Parse {
            path: display.clone(),
            line: lineno + 1,
            message: "expected 'word<TAB>count'".into(),
        })?;
        let value: i64 = raw.trim().parse().map_err(|_| CoreError::Parse {
            path: display.clone(),
            line: lineno + 1,
            message: format!("non-integer count '{raw}'"),
        })?;
        if value < 0 {
            return Err(CoreError::NegativeCount {
                word: word.to_string(),
                value,
            });
        }
        if table.counts.insert(word.to_string(), value as u64).is_some() {
            table.duplicate_overwrites += 1;
        }
    }
    if table.duplicate_overwrites > 0 {
        log::warn!(
            "frequency file had {} duplicate entries; later lines won",
            table.duplicate_overwrites
        );
    }
    Ok(table)
}

/// Rescales every row to Euclidean norm 1. Errors on a zero-norm row,
/// naming the offending word.
pub fn normalize_rows(m: &EmbeddingMatrix) -> Result<EmbeddingMatrix> {
    let vectors = normalize_rows_array(m.vectors(), |i| m.word(i))?;
    EmbeddingMatrix::new(vectors, m.vocab().to_vec(), m.freq().to_vec())
}

/// Row normalization on a bare matrix; `label` names rows for error
/// reporting.
pub fn normalize_rows_array<'a>(
    x: &Array2<f64>,
    label: impl Fn(usize) -> &'a str,
) -> Result<Array2<f64>> {
    let mut out = x.clone();
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(CoreError::ZeroNormRow(label(i).to_string()));
        }
        row.mapv_inplace(|v| v / norm);
    }
    Ok(out)
}
