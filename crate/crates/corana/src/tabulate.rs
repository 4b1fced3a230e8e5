//! Contingency-table construction: script parsing, tokenization, attribute
//! rules, label-level aggregation, and table CSV/JSON I/O.
//!
//! The central type is [`ContingencyTable`], a labelled non-negative count
//! matrix validated so that every row and column carries positive mass.
//! Tables are built either from a [`ScriptCorpus`] (scenes crossed by the
//! words they use, or by declarative attributes) or read back from CSV.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Axis;

/// Errors from table construction, parsing and I/O.
#[derive(Debug, Error)]
pub enum TableError {
    #[error("no scene heading matched and strict mode is on")]
    NoScenesFound,
    #[error("script corpus has no scenes")]
    EmptyCorpus,
    #[error("vocabulary policy removed every word")]
    EmptyVocabulary,
    #[error("attribute `{name}` supplies {got} values for {expected} scenes")]
    SpecMismatch {
        name: String,
        got: usize,
        expected: usize,
    },
    #[error("grouping references unknown {axis} label `{label}`")]
    UnknownLabel { axis: Axis, label: String },
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("row `{0}` has zero total count")]
    ZeroRow(String),
    #[error("column `{0}` has zero total count")]
    ZeroColumn(String),
    #[error("negative or non-finite count at ({row}, {col})")]
    BadCount { row: String, col: String },
    #[error("table must have at least one row and one column")]
    EmptyTable,
    #[error("row {row} has {got} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("invalid heading pattern: {0}")]
    BadPattern(#[from] regex::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed table csv: {0}")]
    Format(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

// ---------------------------------------------------------------------------
// Tokenization and script parsing
// ---------------------------------------------------------------------------

/// Normalize raw text into an order-preserving list of words.
///
/// A word is a maximal run between whitespace or hyphens, with every
/// non-letter character removed and upper case folded to lower case.
/// Apostrophes are removed rather than split ("Rick's" becomes "ricks").
/// Words shorter than two letters are dropped.
pub fn tokenize(raw: &str) -> Vec<String> {
    raw.split(|c: char| c.is_whitespace() || c == '-')
        .filter_map(|chunk| {
            let word: String = chunk
                .chars()
                .filter(|c| c.is_alphabetic())
                .flat_map(char::to_lowercase)
                .collect();
            if word.chars().count() >= 2 {
                Some(word)
            } else {
                None
            }
        })
        .collect()
}

/// One scene of a script: its 1-based position, heading line, body text and
/// normalized word counts.
#[derive(Debug, Clone)]
pub struct Scene {
    pub index: usize,
    pub heading: String,
    pub body: String,
    pub word_counts: BTreeMap<String, u64>,
}

impl Scene {
    fn from_body(index: usize, heading: String, body: String) -> Self {
        let mut word_counts = BTreeMap::new();
        for word in tokenize(&body) {
            *word_counts.entry(word).or_insert(0) += 1;
        }
        Scene {
            index,
            heading,
            body,
            word_counts,
        }
    }

    /// Total number of counted words in the scene.
    pub fn total_words(&self) -> u64 {
        self.word_counts.values().sum()
    }
}

/// An ordered sequence of scenes split out of a script.
#[derive(Debug, Clone)]
pub struct ScriptCorpus {
    pub scenes: Vec<Scene>,
}

impl ScriptCorpus {
    /// Total counted words over all scenes.
    pub fn total_words(&self) -> u64 {
        self.scenes.iter().map(Scene::total_words).sum()
    }

    /// Row labels for the scenes, zero-padded so lexical order equals
    /// sequence order ("s01", "s02", ...).
    pub fn scene_labels(&self) -> Vec<String> {
        let width = self.scenes.len().to_string().len();
        self.scenes
            .iter()
            .map(|s| format!("s{:0width$}", s.index))
            .collect()
    }
}

/// Scene-heading detection rules for [`parse_script`].
///
/// A line starts a new scene when it matches any of `patterns`, or when
/// `allcaps_headings` is set and the line contains letters, none of them
/// lower case, and the following line is blank (or the line ends the
/// document). With `strict` set, a script in which no marker matches is an
/// error; otherwise the whole text is wrapped as a single scene.
#[derive(Debug, Clone)]
pub struct MarkerConfig {
    pub patterns: Vec<Regex>,
    pub allcaps_headings: bool,
    pub strict: bool,
}

impl Default for MarkerConfig {
    fn default() -> Self {
        MarkerConfig {
            patterns: vec![
                Regex::new(r"^\s*INT\.").unwrap(),
                Regex::new(r"^\s*EXT\.").unwrap(),
            ],
            allcaps_headings: true,
            strict: false,
        }
    }
}

impl MarkerConfig {
    /// Build a config from user-supplied regex patterns.
    pub fn from_patterns<S: AsRef<str>>(
        patterns: &[S],
        allcaps_headings: bool,
        strict: bool,
    ) -> Result<Self, TableError> {
        let patterns = patterns
            .iter()
            .map(|p| Regex::new(p.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MarkerConfig {
            patterns,
            allcaps_headings,
            strict,
        })
    }

    fn is_heading(&self, line: &str, next: Option<&str>) -> bool {
        if self.patterns.iter().any(|p| p.is_match(line)) {
            return true;
        }
        if self.allcaps_headings {
            let trimmed = line.trim();
            let has_letter = trimmed.chars().any(|c| c.is_alphabetic());
            let has_lower = trimmed.chars().any(|c| c.is_lowercase());
            let next_blank = next.map_or(true, |l| l.trim().is_empty());
            return has_letter && !has_lower && next_blank;
        }
        false
    }
}

/// Split a script into scenes at heading lines, in document order.
///
/// Text before the first heading becomes an unnamed leading scene when it
/// contains at least one countable word. Headings are kept as scene
/// metadata and are not part of the counted body.
pub fn parse_script(text: &str, markers: &MarkerConfig) -> Result<ScriptCorpus, TableError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut heading_rows = Vec::new();
    for (row, line) in lines.iter().enumerate() {
        let next = lines.get(row + 1).copied();
        if markers.is_heading(line, next) {
            heading_rows.push(row);
        }
    }

    if heading_rows.is_empty() {
        if markers.strict {
            return Err(TableError::NoScenesFound);
        }
        let scene = Scene::from_body(1, String::new(), text.to_string());
        return Ok(ScriptCorpus {
            scenes: vec![scene],
        });
    }

    let mut scenes = Vec::new();
    let preamble = lines[..heading_rows[0]].join("\n");
    if !tokenize(&preamble).is_empty() {
        scenes.push((String::new(), preamble));
    }
    for (k, &start) in heading_rows.iter().enumerate() {
        let end = heading_rows.get(k + 1).copied().unwrap_or(lines.len());
        let heading = lines[start].trim().to_string();
        let body = lines[start + 1..end].join("\n");
        scenes.push((heading, body));
    }

    let scenes = scenes
        .into_iter()
        .enumerate()
        .map(|(i, (heading, body))| Scene::from_body(i + 1, heading, body))
        .collect();
    Ok(ScriptCorpus { scenes })
}

// ---------------------------------------------------------------------------
// Contingency table
// ---------------------------------------------------------------------------

/// A labelled non-negative count matrix with positive mass in every row and
/// column. Counts are stored as reals so that aggregated or weighted tables
/// stay representable.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    counts: DMatrix<f64>,
}

impl ContingencyTable {
    /// Validate and build a table from row-major cell data.
    pub fn new(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self, TableError> {
        let n_cols = col_labels.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(TableError::RaggedRow {
                    row: i,
                    got: row.len(),
                    expected: n_cols,
                });
            }
        }
        let counts = DMatrix::from_row_iterator(
            rows.len(),
            n_cols,
            rows.iter().flat_map(|r| r.iter().copied()),
        );
        Self::from_matrix(row_labels, col_labels, counts)
    }

    /// Validate and build a table from an already-shaped matrix.
    pub fn from_matrix(
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        counts: DMatrix<f64>,
    ) -> Result<Self, TableError> {
        if row_labels.is_empty() || col_labels.is_empty() {
            return Err(TableError::EmptyTable);
        }
        assert_eq!(counts.nrows(), row_labels.len());
        assert_eq!(counts.ncols(), col_labels.len());
        for labels in [&row_labels, &col_labels] {
            let mut seen = BTreeSet::new();
            for label in labels.iter() {
                if !seen.insert(label) {
                    return Err(TableError::DuplicateLabel(label.clone()));
                }
            }
        }
        for i in 0..counts.nrows() {
            for j in 0..counts.ncols() {
                let v = counts[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(TableError::BadCount {
                        row: row_labels[i].clone(),
                        col: col_labels[j].clone(),
                    });
                }
            }
        }
        for (i, label) in row_labels.iter().enumerate() {
            if counts.row(i).sum() <= 0.0 {
                return Err(TableError::ZeroRow(label.clone()));
            }
        }
        for (j, label) in col_labels.iter().enumerate() {
            if counts.column(j).sum() <= 0.0 {
                return Err(TableError::ZeroColumn(label.clone()));
            }
        }
        Ok(ContingencyTable {
            row_labels,
            col_labels,
            counts,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.counts.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.counts.ncols()
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn counts(&self) -> &DMatrix<f64> {
        &self.counts
    }

    pub fn grand_total(&self) -> f64 {
        self.counts.sum()
    }

    /// Position of a row label, if present.
    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.row_labels.iter().position(|l| l == label)
    }

    /// Position of a column label, if present.
    pub fn col_index(&self, label: &str) -> Option<usize> {
        self.col_labels.iter().position(|l| l == label)
    }

    /// The same table with rows and columns exchanged.
    pub fn transposed(&self) -> ContingencyTable {
        ContingencyTable {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            counts: self.counts.transpose(),
        }
    }

    /// Sum grouped labels element-wise along `axis`, leaving the other axis
    /// unchanged. Labels absent from the grouping keep themselves, so an
    /// empty grouping is the identity. Aggregated labels appear in order of
    /// first occurrence.
    pub fn aggregate(
        &self,
        grouping: &GroupingMap,
        axis: Axis,
    ) -> Result<ContingencyTable, TableError> {
        let source_labels = match axis {
            Axis::Rows => &self.row_labels,
            Axis::Columns => &self.col_labels,
        };
        for label in grouping.map.keys() {
            if !source_labels.iter().any(|l| l == label) {
                return Err(TableError::UnknownLabel {
                    axis,
                    label: label.clone(),
                });
            }
        }
        let mut targets: Vec<String> = Vec::new();
        let mut target_of: Vec<usize> = Vec::with_capacity(source_labels.len());
        for label in source_labels {
            let target = grouping.target(label);
            let pos = match targets.iter().position(|t| t == target) {
                Some(pos) => pos,
                None => {
                    targets.push(target.to_string());
                    targets.len() - 1
                }
            };
            target_of.push(pos);
        }
        let (n_rows, n_cols, counts) = match axis {
            Axis::Rows => {
                let mut m = DMatrix::zeros(targets.len(), self.n_cols());
                for (i, &t) in target_of.iter().enumerate() {
                    for j in 0..self.n_cols() {
                        m[(t, j)] += self.counts[(i, j)];
                    }
                }
                (targets.len(), self.n_cols(), m)
            }
            Axis::Columns => {
                let mut m = DMatrix::zeros(self.n_rows(), targets.len());
                for (j, &t) in target_of.iter().enumerate() {
                    for i in 0..self.n_rows() {
                        m[(i, t)] += self.counts[(i, j)];
                    }
                }
                (self.n_rows(), targets.len(), m)
            }
        };
        debug_assert_eq!(counts.nrows(), n_rows);
        debug_assert_eq!(counts.ncols(), n_cols);
        let (row_labels, col_labels) = match axis {
            Axis::Rows => (targets, self.col_labels.clone()),
            Axis::Columns => (self.row_labels.clone(), targets),
        };
        Self::from_matrix(row_labels, col_labels, counts)
    }

    /// Write the table as CSV: header row of column labels, first column of
    /// row labels, cells as shortest-round-trip decimals (integers render
    /// without a fractional part).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), TableError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![String::new()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header)?;
        for (i, label) in self.row_labels.iter().enumerate() {
            let mut record = vec![label.clone()];
            for j in 0..self.n_cols() {
                record.push(format!("{}", self.counts[(i, j)]));
            }
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read a table in the format produced by [`ContingencyTable::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, TableError> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut records = r.records();
        let header = match records.next() {
            Some(rec) => rec?,
            None => return Err(TableError::Format("empty file".into())),
        };
        let col_labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        if col_labels.is_empty() {
            return Err(TableError::Format("header has no column labels".into()));
        }
        let mut row_labels = Vec::new();
        let mut rows = Vec::new();
        for (k, rec) in records.enumerate() {
            let rec = rec?;
            if rec.len() != col_labels.len() + 1 {
                return Err(TableError::RaggedRow {
                    row: k,
                    got: rec.len().saturating_sub(1),
                    expected: col_labels.len(),
                });
            }
            row_labels.push(rec[0].to_string());
            let mut row = Vec::with_capacity(col_labels.len());
            for cell in rec.iter().skip(1) {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    TableError::Format(format!("cell `{cell}` is not a number"))
                })?;
                row.push(v);
            }
            rows.push(row);
        }
        Self::new(row_labels, col_labels, rows)
    }

    /// Read a table from a CSV file on disk.
    pub fn read_csv_path<P: AsRef<Path>>(path: P) -> Result<Self, TableError> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }

    /// Write the table to a CSV file on disk.
    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<(), TableError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

// ---------------------------------------------------------------------------
// Term and attribute tables
// ---------------------------------------------------------------------------

/// Vocabulary filter for [`build_term_table`]. The default keeps all words.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct VocabPolicy {
    /// Drop words whose total count over the corpus is below this.
    pub min_total_count: u64,
    /// Words excluded outright.
    pub stoplist: BTreeSet<String>,
}

impl VocabPolicy {
    fn keeps(&self, word: &str, total: u64) -> bool {
        total >= self.min_total_count.max(1) && !self.stoplist.contains(word)
    }
}

/// Cross scenes by the words they use: rows are scenes in sequence order,
/// columns the surviving vocabulary in lexical order, cells the occurrence
/// counts. With the default policy the grand total equals the corpus word
/// count.
pub fn build_term_table(
    corpus: &ScriptCorpus,
    policy: &VocabPolicy,
) -> Result<ContingencyTable, TableError> {
    if corpus.scenes.is_empty() {
        return Err(TableError::EmptyCorpus);
    }
    let mut totals: BTreeMap<&str, u64> = BTreeMap::new();
    for scene in &corpus.scenes {
        for (word, count) in &scene.word_counts {
            *totals.entry(word).or_insert(0) += count;
        }
    }
    let vocab: Vec<String> = totals
        .iter()
        .filter(|(word, &total)| policy.keeps(word, total))
        .map(|(word, _)| word.to_string())
        .collect();
    if vocab.is_empty() {
        return Err(TableError::EmptyVocabulary);
    }
    let rows = corpus
        .scenes
        .iter()
        .map(|scene| {
            vocab
                .iter()
                .map(|word| scene.word_counts.get(word).copied().unwrap_or(0) as f64)
                .collect()
        })
        .collect();
    ContingencyTable::new(corpus.scene_labels(), vocab, rows)
}

/// How one attribute column is derived from the scenes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeRule {
    /// 1 when the scene heading matches this regex, else 0.
    HeadingMatch(String),
    /// Explicit presence/absence per scene, in sequence order.
    Booleans(Vec<bool>),
    /// Explicit numeric value per scene, in sequence order.
    Values(Vec<f64>),
}

/// A named attribute column: the rule must yield exactly one value per scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub rule: AttributeRule,
}

impl AttributeSpec {
    fn evaluate(&self, corpus: &ScriptCorpus) -> Result<Vec<f64>, TableError> {
        let n = corpus.scenes.len();
        match &self.rule {
            AttributeRule::HeadingMatch(pattern) => {
                let re = Regex::new(pattern)?;
                Ok(corpus
                    .scenes
                    .iter()
                    .map(|s| if re.is_match(&s.heading) { 1.0 } else { 0.0 })
                    .collect())
            }
            AttributeRule::Booleans(values) => {
                if values.len() != n {
                    return Err(TableError::SpecMismatch {
                        name: self.name.clone(),
                        got: values.len(),
                        expected: n,
                    });
                }
                Ok(values.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
            }
            AttributeRule::Values(values) => {
                if values.len() != n {
                    return Err(TableError::SpecMismatch {
                        name: self.name.clone(),
                        got: values.len(),
                        expected: n,
                    });
                }
                Ok(values.clone())
            }
        }
    }
}

/// Load a list of attribute specs from JSON.
pub fn read_attribute_specs<R: Read>(reader: R) -> Result<Vec<AttributeSpec>, TableError> {
    Ok(serde_json::from_reader(reader)?)
}

/// Cross scenes by declarative attributes: rows are scenes in sequence
/// order, columns the attributes in the order given. Boolean rules produce
/// 0/1 cells.
pub fn build_attribute_table(
    corpus: &ScriptCorpus,
    specs: &[AttributeSpec],
) -> Result<ContingencyTable, TableError> {
    if corpus.scenes.is_empty() {
        return Err(TableError::EmptyCorpus);
    }
    let mut columns = Vec::with_capacity(specs.len());
    for spec in specs {
        columns.push(spec.evaluate(corpus)?);
    }
    let n = corpus.scenes.len();
    let rows = (0..n)
        .map(|i| columns.iter().map(|col| col[i]).collect())
        .collect();
    let col_labels = specs.iter().map(|s| s.name.clone()).collect();
    ContingencyTable::new(corpus.scene_labels(), col_labels, rows)
}

/// A relabelling used by [`ContingencyTable::aggregate`]: source label to
/// aggregate label. Labels not mentioned map to themselves.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupingMap {
    map: BTreeMap<String, String>,
}

impl GroupingMap {
    pub fn new(map: BTreeMap<String, String>) -> Self {
        GroupingMap { map }
    }

    /// Load a grouping from a JSON object of `source: aggregate` pairs.
    pub fn read_json<R: Read>(reader: R) -> Result<Self, TableError> {
        Ok(serde_json::from_reader(reader)?)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn target<'a>(&'a self, label: &'a str) -> &'a str {
        self.map.get(label).map(String::as_str).unwrap_or(label)
    }
}

impl FromIterator<(String, String)> for GroupingMap {
    fn from_iter<T: IntoIterator<Item = (String, String)>>(iter: T) -> Self {
        GroupingMap {
            map: iter.into_iter().collect(),
        }
    }
}
