//! Dataset readers, the JSON model file, and CSV metrics output.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ModelParams;
use crate::controller::TrainLog;
use crate::error::{Error, Result};
use crate::model::Model;
use crate::quantizer::{BinMap, RawDataset, MISSING_BIN};
use crate::splitter::{TreeModel, TreeNode};

pub const MODEL_FORMAT: &str = "gbdt-engine-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    LibSvm,
}

impl std::str::FromStr for DataFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "libsvm" | "svm" => Ok(DataFormat::LibSvm),
            other => Err(Error::InvalidArgument(format!(
                "unknown data format {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub format: DataFormat,
    /// CSV column holding the label.
    pub label_column: usize,
    pub has_header: bool,
    /// Reject labels other than 0 and 1; otherwise any label > 0 is 1.
    pub strict_labels: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            format: DataFormat::Csv,
            label_column: 0,
            has_header: false,
            strict_labels: false,
        }
    }
}

impl LoadOptions {
    pub fn libsvm() -> Self {
        LoadOptions {
            format: DataFormat::LibSvm,
            ..Default::default()
        }
    }
}

fn is_missing(token: &str) -> bool {
    let t = token.trim();
    t.is_empty() || t.eq_ignore_ascii_case("nan") || t.eq_ignore_ascii_case("na") || t == "?"
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    if is_missing(token) {
        return Ok(f64::NAN);
    }
    let v: f64 = token.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad number {token:?}"),
    })?;
    if v.is_infinite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value {token:?}"),
        });
    }
    Ok(v)
}

fn parse_label(token: &str, line: usize, strict: bool) -> Result<u8> {
    let v: f64 = token.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("bad label {token:?}"),
    })?;
    if strict {
        if v == 0.0 {
            Ok(0)
        } else if v == 1.0 {
            Ok(1)
        } else {
            Err(Error::Parse {
                line,
                msg: format!("label {token:?} is not 0 or 1"),
            })
        }
    } else if v.is_nan() {
        Err(Error::Parse {
            line,
            msg: "missing label".into(),
        })
    } else {
        Ok(u8::from(v > 0.0))
    }
}

/// Reads a CSV or libsvm dataset. Blank, `nan`, `na` and `?` entries are
/// missing; in libsvm files every absent feature is missing, not zero.
pub fn read_dataset(reader: impl Read, options: &LoadOptions) -> Result<RawDataset> {
    match options.format {
        DataFormat::Csv => read_csv(reader, options),
        DataFormat::LibSvm => read_libsvm(reader, options),
    }
}

pub fn load_dataset(path: impl AsRef<Path>, options: &LoadOptions) -> Result<RawDataset> {
    read_dataset(fs::File::open(path)?, options)
}

fn read_csv(reader: impl Read, options: &LoadOptions) -> Result<RawDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(options.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if options.label_column >= record.len() {
            return Err(Error::Parse {
                line,
                msg: format!("no label column {}", options.label_column),
            });
        }
        let n_features = record.len() - 1;
        match width {
            None => width = Some(n_features),
            Some(w) if w != n_features => {
                return Err(Error::Parse {
                    line,
                    msg: format!("{} fields, expected {}", record.len(), w + 1),
                })
            }
            _ => {}
        }
        for (c, field) in record.iter().enumerate() {
            if c == options.label_column {
                labels.push(parse_label(field, line, options.strict_labels)?);
            } else {
                values.push(parse_value(field, line)?);
            }
        }
    }
    match width {
        None => Err(Error::NoSamples),
        Some(w) => RawDataset::new(w, values, labels),
    }
}

fn read_libsvm(reader: impl Read, options: &LoadOptions) -> Result<RawDataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut n_features = 0;
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = lineno + 1;
        let line = line?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = tokens.next().ok_or(Error::Parse {
            line: line_no,
            msg: "missing label".into(),
        })?;
        labels.push(parse_label(label, line_no, options.strict_labels)?);
        let mut row = Vec::new();
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected index:value, got {tok:?}"),
            })?;
            let idx: usize = idx.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad feature index {idx:?}"),
            })?;
            if idx == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "feature indices are 1-based".into(),
                });
            }
            n_features = n_features.max(idx);
            row.push((idx - 1, parse_value(val, line_no)?));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::NoSamples);
    }
    let n_features = n_features.max(1);
    let mut values = vec![f64::NAN; rows.len() * n_features];
    for (i, row) in rows.iter().enumerate() {
        for &(f, v) in row {
            values[i * n_features + f] = v;
        }
    }
    RawDataset::new(n_features, values, labels)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    frac_bits: u32,
    params: ModelParams,
    base_score: i64,
    centroids: Vec<Vec<f64>>,
    trees: Vec<TreeModel>,
}

/// Serializes a model to its JSON document.
pub fn model_to_string(model: &Model) -> Result<String> {
    let file = ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        frac_bits: model.params.frac_bits,
        params: model.params.clone(),
        base_score: model.base_score,
        centroids: (0..model.bin_map.n_features())
            .map(|f| model.bin_map.centroids(f).to_vec())
            .collect(),
        trees: model.trees.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file)?;
    s.push('\n');
    Ok(s)
}

/// Parses and validates a model document.
pub fn model_from_str(text: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text)?;
    if file.format != MODEL_FORMAT {
        return Err(Error::ModelFormat(format!(
            "unknown format {:?}",
            file.format
        )));
    }
    if file.version != MODEL_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported version {} (expected {MODEL_VERSION})",
            file.version
        )));
    }
    if file.frac_bits != file.params.frac_bits {
        return Err(Error::ModelFormat(format!(
            "frac_bits {} disagrees with params frac_bits {}; refusing to rescale",
            file.frac_bits, file.params.frac_bits
        )));
    }
    file.params.validate()?;
    let bin_map = BinMap::new(file.centroids)?;
    for (t, tree) in file.trees.iter().enumerate() {
        tree.validate()?;
        for node in tree.levels().iter().flatten() {
            if let TreeNode::Split {
                feature,
                threshold_bin,
                ..
            } = *node
            {
                if feature >= bin_map.n_features() || threshold_bin == MISSING_BIN {
                    return Err(Error::ModelFormat(format!(
                        "tree {t}: split on feature {feature} bin {threshold_bin} is out of range"
                    )));
                }
            }
        }
    }
    Ok(Model {
        params: file.params,
        bin_map,
        base_score: file.base_score,
        trees: file.trees,
    })
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model_to_string(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    model_from_str(&fs::read_to_string(path)?)
}

pub fn bin_map_to_string(bins: &BinMap) -> Result<String> {
    let mut s = serde_json::to_string_pretty(bins)?;
    s.push('\n');
    Ok(s)
}

pub fn bin_map_from_str(text: &str) -> Result<BinMap> {
    let raw: BinMap = serde_json::from_str(text)?;
    // Re-validate: deserialization bypasses the constructor.
    BinMap::new(
        (0..raw.n_features())
            .map(|f| raw.centroids(f).to_vec())
            .collect(),
    )
}

pub fn log_to_string(log: &TrainLog) -> Result<String> {
    Ok(serde_json::to_string_pretty(log)? + "\n")
}

pub fn log_from_str(text: &str) -> Result<TrainLog> {
    Ok(serde_json::from_str(text)?)
}

/// `tree_index,train_loss,valid_auc` rows; `valid_auc` is blank without a
/// validation set.
pub fn write_metrics_csv(
    mut out: impl Write,
    log: &TrainLog,
    valid_auc: Option<&[f64]>,
) -> Result<()> {
    writeln!(out, "tree_index,train_loss,valid_auc")?;
    for (t, tree) in log.trees.iter().enumerate() {
        let auc = valid_auc
            .and_then(|a| a.get(t))
            .map_or_else(String::new, |a| a.to_string());
        writeln!(out, "{},{},{}", t + 1, tree.train_loss, auc)?;
    }
    Ok(())
}
