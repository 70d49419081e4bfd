use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use log::warn;

use super::split::{filter_labels, RawLabeled};
use super::{
    normalize_label, CorpusError, LangPair, Provenance, SentenceRecord, Sentiment, META_RAW_LABEL, META_SOURCE_LINE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    /// One JSON record per line.
    CanonicalJsonl,
    /// `text<TAB>label[<TAB>id]`.
    DelimitedText,
}

impl DatasetFormat {
    /// `.tsv`/`.txt` are delimited, everything else canonical.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") | Some("txt") => DatasetFormat::DelimitedText,
            _ => DatasetFormat::CanonicalJsonl,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Log and skip malformed rows instead of failing.
    pub skip_bad_rows: bool,
    /// Language pair assigned to delimited rows.
    pub lang_pair: LangPair,
    /// When set, delimited rows whose raw label is not in this set are
    /// removed before label mapping.
    pub allowed_raw_labels: Option<BTreeSet<String>>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            skip_bad_rows: false,
            lang_pair: LangPair::EsEn,
            allowed_raw_labels: None,
        }
    }
}

/// A delimited row before its label is mapped onto a sentiment class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRow {
    pub id: String,
    pub text: String,
    pub raw_label: String,
    pub line: usize,
}

impl RawLabeled for RawRow {
    fn raw_label(&self) -> &str {
        &self.raw_label
    }
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn bad_row(path: &Path, line: usize, reason: String, skip: bool) -> Result<(), CorpusError> {
    if skip {
        warn!("skipping {}:{line}: {reason}", path.display());
        Ok(())
    } else {
        Err(CorpusError::MalformedRow {
            path: path.to_path_buf(),
            line,
            reason,
        })
    }
}

/// Reads a tab-separated file. Ids default to `<filename>:<line>`.
pub fn read_delimited_rows(path: &Path, skip_bad_rows: bool) -> Result<Vec<RawRow>, CorpusError> {
    let content = read(path)?;
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut rows = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let (text, label, id) = match cols.as_slice() {
            [text, label] => (*text, *label, None),
            [text, label, id] => (*text, *label, Some(id.trim())),
            _ => {
                bad_row(
                    path,
                    line_no,
                    format!("expected 2 or 3 tab-separated columns, found {}", cols.len()),
                    skip_bad_rows,
                )?;
                continue;
            }
        };
        if label.trim().is_empty() {
            bad_row(path, line_no, "empty label".into(), skip_bad_rows)?;
            continue;
        }
        let id = match id {
            Some(id) if !id.is_empty() => id.to_string(),
            _ => format!("{file_name}:{line_no}"),
        };
        rows.push(RawRow {
            id,
            text: text.to_string(),
            raw_label: label.to_string(),
            line: line_no,
        });
    }
    Ok(rows)
}

/// Maps raw rows onto records. The raw label and source line go into meta.
pub fn rows_into_records(
    path: &Path,
    rows: Vec<RawRow>,
    lang_pair: &LangPair,
    skip_bad_rows: bool,
) -> Result<Vec<SentenceRecord>, CorpusError> {
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut records = Vec::with_capacity(rows.len());
    let mut seen = HashSet::new();
    for row in rows {
        let Some(label) = Sentiment::from_raw(&row.raw_label) else {
            bad_row(
                path,
                row.line,
                format!(
                    "label {:?} does not normalize to positive/negative/neutral",
                    row.raw_label
                ),
                skip_bad_rows,
            )?;
            continue;
        };
        if !seen.insert(row.id.clone()) {
            return Err(CorpusError::DuplicateId {
                path: path.to_path_buf(),
                id: row.id,
            });
        }
        let mut meta = BTreeMap::new();
        meta.insert(META_RAW_LABEL.to_string(), row.raw_label);
        meta.insert(META_SOURCE_LINE.to_string(), format!("{file_name}:{}", row.line));
        records.push(SentenceRecord {
            id: row.id,
            text: row.text,
            label,
            lang_pair: lang_pair.clone(),
            provenance: Provenance::Natural,
            meta,
        });
    }
    Ok(records)
}

fn load_jsonl(path: &Path, skip_bad_rows: bool) -> Result<Vec<SentenceRecord>, CorpusError> {
    let content = read(path)?;
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<SentenceRecord>(line) {
            Ok(record) => {
                if !seen.insert(record.id.clone()) {
                    return Err(CorpusError::DuplicateId {
                        path: path.to_path_buf(),
                        id: record.id,
                    });
                }
                records.push(record);
            }
            Err(e) => bad_row(path, idx + 1, e.to_string(), skip_bad_rows)?,
        }
    }
    Ok(records)
}

pub fn load_dataset(
    path: &Path,
    format: DatasetFormat,
    options: &LoadOptions,
) -> Result<Vec<SentenceRecord>, CorpusError> {
    let records = match format {
        DatasetFormat::CanonicalJsonl => load_jsonl(path, options.skip_bad_rows)?,
        DatasetFormat::DelimitedText => {
            let mut rows = read_delimited_rows(path, options.skip_bad_rows)?;
            if let Some(allowed) = &options.allowed_raw_labels {
                let (kept, report) = filter_labels(rows, allowed)?;
                for (label, n) in &report.removed {
                    log::info!("filtered {n} rows with raw label {label:?}");
                }
                rows = kept;
            }
            rows_into_records(path, rows, &options.lang_pair, options.skip_bad_rows)?
        }
    };
    if records.is_empty() {
        warn!("{} contains no records", path.display());
    }
    Ok(records)
}

/// Writes records in the canonical line-delimited format.
pub fn write_dataset(path: &Path, records: &[SentenceRecord]) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut buf = Vec::new();
    for record in records {
        serde_json::to_writer(&mut buf, record).expect("records always serialize");
        buf.push(b'\n');
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(&buf).map_err(io_err)
}

/// Lowercase+trim variant of a raw label, for set membership checks.
pub(crate) fn label_key(raw: &str) -> String {
    normalize_label(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn write(dir: &TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        fs::write(&path, content).unwrap();
        path
    }

    #[test]
    fn single_delimited_row() {
        let dir = TempDir::new().unwrap();
        let path = write(&dir, "one.tsv", "hola world\tpositive\n");
        let records = load_dataset(&path, DatasetFormat::DelimitedText, &LoadOptions::default()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].label, Sentiment::Positive);
        assert_eq!(records[0].id, "one.tsv:1");
        assert_eq!(records[0].meta[META_SOURCE_LINE], "one.tsv:1");
    }

    #[test]
    fn empty_file_gives_empty_list() {
        let dir = TempDir::new().unwrap();
        let path = write(&dir, "empty.tsv", "");
        let records = load_dataset(&path, DatasetFormat::DelimitedText, &LoadOptions::default()).unwrap();
        assert!(records.is_empty());
    }

    #[test]
    fn label_variant_is_normalized_and_raw_kept() {
        let dir = TempDir::new().unwrap();
        let path = write(&dir, "v.tsv", "que bonito day\tPositive \tx7\n");
        let records = load_dataset(&path, DatasetFormat::DelimitedText, &LoadOptions::default()).unwrap();
        assert_eq!(records[0].label, Sentiment::Positive);
        assert_eq!(records[0].id, "x7");
        assert_eq!(records[0].meta[META_RAW_LABEL], "Positive ");
        assert_eq!(
            Sentiment::from_raw(&records[0].meta[META_RAW_LABEL]),
            Some(records[0].label)
        );
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = TempDir::new().unwrap();
        let path = write(&dir, "bad.tsv", "ok text\tneutral\nno label column\n");
        let err = load_dataset(&path, DatasetFormat::DelimitedText, &LoadOptions::default()).unwrap_err();
        match err {
            CorpusError::MalformedRow { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let opts = LoadOptions {
            skip_bad_rows: true,
            ..LoadOptions::default()
        };
        let records = load_dataset(&path, DatasetFormat::DelimitedText, &opts).unwrap();
        assert_eq!(records.len(), 1);
    }

    #[test]
    fn unmapped_label_needs_filter() {
        let dir = TempDir::new().unwrap();
        let path = write(&dir, "ml.tsv", "padam adipoli\tPositive\nsomething\tunknown_state\n");
        assert!(load_dataset(&path, DatasetFormat::DelimitedText, &LoadOptions::default()).is_err());
        let opts = LoadOptions {
            allowed_raw_labels: Some(["positive", "negative", "neutral"].map(String::from).into()),
            lang_pair: LangPair::MlEn,
            ..LoadOptions::default()
        };
        let records = load_dataset(&path, DatasetFormat::DelimitedText, &opts).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].lang_pair, LangPair::MlEn);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_dataset(
            Path::new("/nonexistent/file.jsonl"),
            DatasetFormat::CanonicalJsonl,
            &LoadOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::Io { .. }));
    }

    #[test]
    fn jsonl_round_trip_and_duplicates() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("d.jsonl");
        let records = vec![
            SentenceRecord::natural("a", "uno two", Sentiment::Neutral),
            SentenceRecord::natural("b", "tres four", Sentiment::Negative),
        ];
        write_dataset(&path, &records).unwrap();
        let back = load_dataset(&path, DatasetFormat::CanonicalJsonl, &LoadOptions::default()).unwrap();
        assert_eq!(back, records);

        write_dataset(&path, &[records[0].clone(), records[0].clone()]).unwrap();
        let err = load_dataset(&path, DatasetFormat::CanonicalJsonl, &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { .. }));
    }
}
