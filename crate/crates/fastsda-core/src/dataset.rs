//! Dataset ingestion (single- and multi-view CSV), preparation of the raw
//! UCI source files into canonical CSVs, and the versioned text model
//! container.
//!
//! On disk samples are rows; in memory they are columns (features x
//! samples). Model files store every value with 17 significant digits so a
//! save/load round trip reproduces transforms exactly.

use crate::error::IoError;
use crate::eval::EvalData;
use crate::kernel::{ApproxCentering, CenteringStats, KernelConfig, KernelMode, PrototypeStrategy};
use crate::matrix::Matrix;
use crate::pipeline::MultiViewModel;
use crate::regress::{FeatureSpaceSupport, ModelVariant, Normalization, ProjectionModel};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

/// One view's sample matrix with per-sample class labels.
#[derive(Debug, Clone)]
pub struct DataView {
    /// Features x samples.
    pub x: Matrix,
    pub class_labels: Vec<usize>,
    pub view_index: usize,
    /// Original label strings in first-appearance order.
    pub label_names: Vec<String>,
}

/// Views sharing identical class labels and sample order; dimensionalities
/// may differ per view.
#[derive(Debug, Clone)]
pub struct MultiViewDataset {
    pub views: Vec<DataView>,
    pub view_names: Vec<String>,
}

impl MultiViewDataset {
    pub fn samples(&self) -> usize {
        self.views.first().map_or(0, |v| v.class_labels.len())
    }

    pub fn labels(&self) -> &[usize] {
        &self.views[0].class_labels
    }

    pub fn to_eval_data(&self, name: &str) -> EvalData {
        EvalData::Multi {
            views: self.views.iter().map(|v| v.x.clone()).collect(),
            labels: self.labels().to_vec(),
            name: name.to_string(),
        }
    }
}

impl DataView {
    pub fn to_eval_data(&self, name: &str) -> EvalData {
        EvalData::Single {
            x: self.x.clone(),
            labels: self.class_labels.clone(),
            name: name.to_string(),
        }
    }
}

fn parse_field(field: &str, line: usize, column: usize) -> Result<f64, IoError> {
    field.trim().parse::<f64>().map_err(|_| IoError::ParseError {
        line,
        column,
        message: format!("'{}' is not a number", field.trim()),
    })
}

fn split_csv_line(line: &str) -> Vec<String> {
    line.split(',').map(|s| s.trim().to_string()).collect()
}

struct RawTable {
    /// Row-major fields, data rows only.
    rows: Vec<Vec<String>>,
    /// 1-based file line number per data row.
    line_numbers: Vec<usize>,
}

// Reads a rectangular CSV, skipping an optional header. The first row is a
// header when some field of it is non-numeric while the same column in the
// second row is numeric.
fn read_csv_table(path: &Path) -> Result<RawTable, IoError> {
    let content = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    let mut line_numbers = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(split_csv_line(line));
        line_numbers.push(idx + 1);
    }
    if rows.is_empty() {
        return Err(IoError::EmptyFile(path.display().to_string()));
    }
    let width = rows[0].len();
    let is_numeric = |s: &str| s.trim().parse::<f64>().is_ok();
    let header = rows.len() > 1
        && rows[0].len() == rows[1].len()
        && rows[0]
            .iter()
            .zip(rows[1].iter())
            .any(|(a, b)| !is_numeric(a) && is_numeric(b));
    let skip = usize::from(header);
    let data_rows: Vec<Vec<String>> = rows[skip..].to_vec();
    let data_lines: Vec<usize> = line_numbers[skip..].to_vec();
    if data_rows.is_empty() {
        return Err(IoError::EmptyFile(path.display().to_string()));
    }
    for (row, &line) in data_rows.iter().zip(data_lines.iter()) {
        if row.len() != width {
            return Err(IoError::RaggedRows {
                line,
                expected: width,
                got: row.len(),
            });
        }
    }
    Ok(RawTable {
        rows: data_rows,
        line_numbers: data_lines,
    })
}

fn map_labels(raw: &[String]) -> (Vec<usize>, Vec<String>) {
    let mut names: Vec<String> = Vec::new();
    let labels = raw
        .iter()
        .map(|s| {
            if let Some(pos) = names.iter().position(|n| n == s) {
                pos
            } else {
                names.push(s.clone());
                names.len() - 1
            }
        })
        .collect();
    (labels, names)
}

/// Where a view's class labels come from.
pub enum LabelSource<'a> {
    LastColumn,
    SeparateFile(&'a Path),
}

/// Writes a view back to disk in the canonical samples-as-rows layout with
/// the label name in the last column. Loading the result reproduces the
/// values to decimal round-trip precision.
pub fn save_csv(view: &DataView, path: &Path) -> Result<(), IoError> {
    let mut out = String::new();
    for i in 0..view.x.cols() {
        for r in 0..view.x.rows() {
            let _ = write!(out, "{:.16e},", view.x.get(r, i));
        }
        let _ = writeln!(out, "{}", view.label_names[view.class_labels[i]]);
    }
    fs::write(path, out)?;
    Ok(())
}

/// Loads a samples-as-rows CSV into a feature-major view. String labels are
/// mapped to dense integers in first-appearance order.
pub fn load_csv(path: &Path, labels: LabelSource<'_>) -> Result<DataView, IoError> {
    let table = read_csv_table(path)?;
    let width = table.rows[0].len();
    let (feature_cols, raw_labels): (usize, Vec<String>) = match labels {
        LabelSource::LastColumn => {
            if width < 2 {
                return Err(IoError::ParseError {
                    line: table.line_numbers[0],
                    column: 1,
                    message: "need at least one feature and one label column".into(),
                });
            }
            (
                width - 1,
                table.rows.iter().map(|r| r[width - 1].clone()).collect(),
            )
        }
        LabelSource::SeparateFile(label_path) => {
            let label_table = read_csv_table(label_path)?;
            if label_table.rows.len() != table.rows.len() {
                return Err(IoError::ViewShapeMismatch {
                    view: path.display().to_string(),
                    expected: label_table.rows.len(),
                    got: table.rows.len(),
                });
            }
            (
                width,
                label_table.rows.iter().map(|r| r[0].clone()).collect(),
            )
        }
    };
    let n = table.rows.len();
    let mut x = Matrix::zeros(feature_cols, n);
    for (i, row) in table.rows.iter().enumerate() {
        for c in 0..feature_cols {
            x.set(
                c,
                i,
                parse_field(&row[c], table.line_numbers[i], c + 1)?,
            );
        }
    }
    let (class_labels, label_names) = map_labels(&raw_labels);
    Ok(DataView {
        x,
        class_labels,
        view_index: 0,
        label_names,
    })
}

/// Loads a multi-view dataset from a line-oriented manifest:
/// `view <name> <csv-path>` per view plus one `labels <csv-path>` line.
/// Paths are relative to the manifest's directory.
pub fn load_multiview(manifest_path: &Path) -> Result<MultiViewDataset, IoError> {
    let content = fs::read_to_string(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut view_specs: Vec<(String, PathBuf)> = Vec::new();
    let mut labels_path: Option<PathBuf> = None;
    for line in content.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("view") => {
                let name = parts.next().unwrap_or("view").to_string();
                let path = parts.next().ok_or_else(|| IoError::ParseError {
                    line: 0,
                    column: 0,
                    message: format!("view line missing path: '{line}'"),
                })?;
                view_specs.push((name, base.join(path)));
            }
            Some("labels") => {
                let path = parts.next().ok_or(IoError::MissingLabels)?;
                labels_path = Some(base.join(path));
            }
            _ => {
                return Err(IoError::ParseError {
                    line: 0,
                    column: 0,
                    message: format!("unknown manifest line: '{line}'"),
                })
            }
        }
    }
    let labels_path = labels_path.ok_or(IoError::MissingLabels)?;
    let label_table = read_csv_table(&labels_path)?;
    let raw_labels: Vec<String> = label_table.rows.iter().map(|r| r[0].clone()).collect();
    let (class_labels, label_names) = map_labels(&raw_labels);
    let n = class_labels.len();
    let mut views = Vec::new();
    let mut view_names = Vec::new();
    for (index, (name, path)) in view_specs.iter().enumerate() {
        let table = read_csv_table(path)?;
        if table.rows.len() != n {
            return Err(IoError::ViewShapeMismatch {
                view: name.clone(),
                expected: n,
                got: table.rows.len(),
            });
        }
        let width = table.rows[0].len();
        let mut x = Matrix::zeros(width, n);
        for (i, row) in table.rows.iter().enumerate() {
            for c in 0..width {
                x.set(c, i, parse_field(&row[c], table.line_numbers[i], c + 1)?);
            }
        }
        views.push(DataView {
            x,
            class_labels: class_labels.clone(),
            view_index: index,
            label_names: label_names.clone(),
        });
        view_names.push(name.clone());
    }
    if views.is_empty() {
        return Err(IoError::EmptyFile(manifest_path.display().to_string()));
    }
    Ok(MultiViewDataset { views, view_names })
}

// ---------------------------------------------------------------------------
// Model serialization
// ---------------------------------------------------------------------------

/// A saved model: either one projection or one per view.
#[derive(Debug, Clone)]
pub enum SavedModel {
    Single(ProjectionModel),
    Multi(MultiViewModel),
}

impl SavedModel {
    pub fn dims(&self) -> usize {
        match self {
            SavedModel::Single(m) => m.dims(),
            SavedModel::Multi(m) => m.dims(),
        }
    }
}

fn fmt_f64(v: f64) -> String {
    // 17 significant digits round-trip every finite f64
    format!("{v:.16e}")
}

fn write_matrix(out: &mut String, name: &str, m: &Matrix) {
    let _ = writeln!(out, "matrix {name} {} {}", m.rows(), m.cols());
    for r in 0..m.rows() {
        let line: Vec<String> = m.row(r).iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
}

fn write_vector(out: &mut String, name: &str, v: &[f64]) {
    let _ = writeln!(out, "vector {name} {}", v.len());
    let line: Vec<String> = v.iter().map(|&x| fmt_f64(x)).collect();
    let _ = writeln!(out, "{}", line.join(" "));
}

fn normalization_tag(n: Normalization) -> &'static str {
    match n {
        Normalization::L2 => "l2",
        Normalization::Orthogonal => "orthogonal",
    }
}

fn strategy_tag(s: PrototypeStrategy) -> &'static str {
    match s {
        PrototypeStrategy::RandomTrain => "random-train",
        PrototypeStrategy::KmeansAll => "kmeans-all",
    }
}

fn centering_tag(c: ApproxCentering) -> &'static str {
    match c {
        ApproxCentering::InputSpace => "input-space",
        ApproxCentering::FeatureSpace => "feature-space",
    }
}

fn variant_tag(v: &ModelVariant) -> &'static str {
    match v {
        ModelVariant::Linear { .. } => "linear",
        ModelVariant::Kernel { .. } => "kernel",
        ModelVariant::ApproxKernel { .. } => "approx-kernel",
    }
}

fn serialize_variant(out: &mut String, model: &ProjectionModel) {
    let _ = writeln!(out, "normalization {}", normalization_tag(model.normalization));
    match &model.variant {
        ModelVariant::Linear { weights, mean } => {
            write_matrix(out, "W", weights);
            write_vector(out, "mean", mean);
        }
        ModelVariant::Kernel {
            coefficients,
            train_x,
            kernel,
            centering,
            train_mean,
        } => {
            let _ = writeln!(out, "kernel rbf sigma {}", fmt_f64(kernel.sigma));
            write_matrix(out, "A", coefficients);
            write_matrix(out, "TRAINX", train_x);
            write_vector(out, "train_mean", train_mean);
            write_vector(out, "row_means", &centering.row_means);
            let _ = writeln!(out, "scalar grand_mean {}", fmt_f64(centering.grand_mean));
        }
        ModelVariant::ApproxKernel {
            coefficients,
            prototypes,
            kernel,
            train_mean,
            feature_space,
        } => {
            let _ = writeln!(out, "kernel rbf sigma {}", fmt_f64(kernel.sigma));
            let _ = writeln!(out, "prototype_strategy {}", strategy_tag(kernel.prototype_strategy));
            let _ = writeln!(out, "approx_centering {}", centering_tag(kernel.approx_centering));
            write_matrix(out, "A", coefficients);
            write_matrix(out, "PROTOTYPES", prototypes);
            write_vector(out, "train_mean", train_mean);
            if let Some(support) = feature_space {
                write_matrix(out, "TRAINX", &support.train_x);
                write_vector(out, "row_means", &support.centering.row_means);
                let _ = writeln!(
                    out,
                    "scalar grand_mean {}",
                    fmt_f64(support.centering.grand_mean)
                );
                let idx: Vec<String> = support
                    .prototype_indices
                    .iter()
                    .map(|i| i.to_string())
                    .collect();
                let _ = writeln!(out, "indices {} {}", idx.len(), idx.join(" "));
            }
        }
    }
}

/// Serializes a model into the versioned text container.
pub fn model_to_string(model: &SavedModel) -> String {
    let mut out = String::new();
    match model {
        SavedModel::Single(m) => {
            let _ = writeln!(out, "FASTSDA-MODEL v1 {}", variant_tag(&m.variant));
            serialize_variant(&mut out, m);
        }
        SavedModel::Multi(m) => {
            let _ = writeln!(out, "FASTSDA-MODEL v1 multiview");
            let _ = writeln!(out, "views {}", m.views.len());
            for (i, view_model) in m.views.iter().enumerate() {
                let _ = writeln!(out, "view {i} {}", variant_tag(&view_model.variant));
                serialize_variant(&mut out, view_model);
            }
        }
    }
    out.push_str("end\n");
    out
}

pub fn save_model(model: &SavedModel, path: &Path) -> Result<(), IoError> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

struct LineReader<'a> {
    lines: std::iter::Peekable<std::str::Lines<'a>>,
}

impl<'a> LineReader<'a> {
    fn next(&mut self) -> Result<&'a str, IoError> {
        self.lines
            .next()
            .ok_or_else(|| IoError::CorruptBlock("unexpected end of file".into()))
    }

    fn peek(&mut self) -> Option<&&'a str> {
        self.lines.peek()
    }
}

fn parse_f64_token(tok: &str) -> Result<f64, IoError> {
    tok.parse::<f64>()
        .map_err(|_| IoError::CorruptBlock(format!("bad float '{tok}'")))
}

fn read_matrix(reader: &mut LineReader<'_>, expect_name: &str) -> Result<Matrix, IoError> {
    let header = reader.next()?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != "matrix" || parts[1] != expect_name {
        return Err(IoError::CorruptBlock(format!(
            "expected 'matrix {expect_name} rows cols', got '{header}'"
        )));
    }
    let rows: usize = parts[2]
        .parse()
        .map_err(|_| IoError::CorruptBlock("bad row count".into()))?;
    let cols: usize = parts[3]
        .parse()
        .map_err(|_| IoError::CorruptBlock("bad col count".into()))?;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let line = reader.next()?;
        for tok in line.split_whitespace() {
            data.push(parse_f64_token(tok)?);
        }
    }
    Matrix::new(rows, cols, data)
        .map_err(|e| IoError::CorruptBlock(format!("matrix {expect_name}: {e}")))
}

fn read_vector(reader: &mut LineReader<'_>, expect_name: &str) -> Result<Vec<f64>, IoError> {
    let header = reader.next()?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "vector" || parts[1] != expect_name {
        return Err(IoError::CorruptBlock(format!(
            "expected 'vector {expect_name} len', got '{header}'"
        )));
    }
    let len: usize = parts[2]
        .parse()
        .map_err(|_| IoError::CorruptBlock("bad vector length".into()))?;
    let line = reader.next()?;
    let values: Result<Vec<f64>, IoError> =
        line.split_whitespace().map(parse_f64_token).collect();
    let values = values?;
    if values.len() != len {
        return Err(IoError::CorruptBlock(format!(
            "vector {expect_name} has {} values, expected {len}",
            values.len()
        )));
    }
    Ok(values)
}

fn read_tagged_scalar(reader: &mut LineReader<'_>, name: &str) -> Result<f64, IoError> {
    let line = reader.next()?;
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "scalar" || parts[1] != name {
        return Err(IoError::CorruptBlock(format!(
            "expected 'scalar {name} value', got '{line}'"
        )));
    }
    parse_f64_token(parts[2])
}

fn parse_normalization(line: &str) -> Result<Normalization, IoError> {
    match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["normalization", "l2"] => Ok(Normalization::L2),
        ["normalization", "orthogonal"] => Ok(Normalization::Orthogonal),
        _ => Err(IoError::CorruptBlock(format!(
            "bad normalization line '{line}'"
        ))),
    }
}

fn parse_variant(reader: &mut LineReader<'_>, tag: &str) -> Result<ProjectionModel, IoError> {
    let normalization = parse_normalization(reader.next()?)?;
    let variant = match tag {
        "linear" => {
            let weights = read_matrix(reader, "W")?;
            let mean = read_vector(reader, "mean")?;
            ModelVariant::Linear { weights, mean }
        }
        "kernel" => {
            let kernel_line = reader.next()?;
            let parts: Vec<&str> = kernel_line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "kernel" || parts[1] != "rbf" || parts[2] != "sigma"
            {
                return Err(IoError::CorruptBlock(format!(
                    "bad kernel line '{kernel_line}'"
                )));
            }
            let sigma = parse_f64_token(parts[3])?;
            let coefficients = read_matrix(reader, "A")?;
            let train_x = read_matrix(reader, "TRAINX")?;
            let train_mean = read_vector(reader, "train_mean")?;
            let row_means = read_vector(reader, "row_means")?;
            let grand_mean = read_tagged_scalar(reader, "grand_mean")?;
            ModelVariant::Kernel {
                coefficients,
                train_x,
                kernel: KernelConfig::exact(sigma),
                centering: CenteringStats {
                    row_means,
                    grand_mean,
                },
                train_mean,
            }
        }
        "approx-kernel" => {
            let kernel_line = reader.next()?;
            let parts: Vec<&str> = kernel_line.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "kernel" {
                return Err(IoError::CorruptBlock(format!(
                    "bad kernel line '{kernel_line}'"
                )));
            }
            let sigma = parse_f64_token(parts[3])?;
            let strategy_line = reader.next()?;
            let strategy = match strategy_line.split_whitespace().collect::<Vec<_>>().as_slice() {
                ["prototype_strategy", "random-train"] => PrototypeStrategy::RandomTrain,
                ["prototype_strategy", "kmeans-all"] => PrototypeStrategy::KmeansAll,
                _ => {
                    return Err(IoError::CorruptBlock(format!(
                        "bad prototype strategy '{strategy_line}'"
                    )))
                }
            };
            let centering_line = reader.next()?;
            let approx_centering =
                match centering_line.split_whitespace().collect::<Vec<_>>().as_slice() {
                    ["approx_centering", "input-space"] => ApproxCentering::InputSpace,
                    ["approx_centering", "feature-space"] => ApproxCentering::FeatureSpace,
                    _ => {
                        return Err(IoError::CorruptBlock(format!(
                            "bad approx centering '{centering_line}'"
                        )))
                    }
                };
            let coefficients = read_matrix(reader, "A")?;
            let prototypes = read_matrix(reader, "PROTOTYPES")?;
            let train_mean = read_vector(reader, "train_mean")?;
            let feature_space = if approx_centering == ApproxCentering::FeatureSpace {
                let train_x = read_matrix(reader, "TRAINX")?;
                let row_means = read_vector(reader, "row_means")?;
                let grand_mean = read_tagged_scalar(reader, "grand_mean")?;
                let idx_line = reader.next()?;
                let parts: Vec<&str> = idx_line.split_whitespace().collect();
                if parts.len() < 2 || parts[0] != "indices" {
                    return Err(IoError::CorruptBlock(format!(
                        "bad indices line '{idx_line}'"
                    )));
                }
                let count: usize = parts[1]
                    .parse()
                    .map_err(|_| IoError::CorruptBlock("bad index count".into()))?;
                let indices: Result<Vec<usize>, IoError> = parts[2..]
                    .iter()
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| IoError::CorruptBlock(format!("bad index '{t}'")))
                    })
                    .collect();
                let indices = indices?;
                if indices.len() != count {
                    return Err(IoError::CorruptBlock("index count mismatch".into()));
                }
                Some(FeatureSpaceSupport {
                    train_x,
                    centering: CenteringStats {
                        row_means,
                        grand_mean,
                    },
                    prototype_indices: indices,
                })
            } else {
                None
            };
            let r = prototypes.cols();
            let mut kernel = KernelConfig {
                sigma,
                mode: KernelMode::Approximate,
                prototype_count: r,
                prototype_strategy: strategy,
                approx_centering,
            };
            kernel.sigma = sigma;
            ModelVariant::ApproxKernel {
                coefficients,
                prototypes,
                kernel,
                train_mean,
                feature_space,
            }
        }
        other => {
            return Err(IoError::VersionMismatch(format!(
                "unknown variant '{other}'"
            )))
        }
    };
    Ok(ProjectionModel {
        variant,
        normalization,
    })
}

pub fn model_from_string(content: &str) -> Result<SavedModel, IoError> {
    let mut reader = LineReader {
        lines: content.lines().peekable(),
    };
    let header = reader.next()?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 3 || parts[0] != "FASTSDA-MODEL" || parts[1] != "v1" {
        return Err(IoError::VersionMismatch(header.to_string()));
    }
    let model = match parts[2] {
        "multiview" => {
            let views_line = reader.next()?;
            let vparts: Vec<&str> = views_line.split_whitespace().collect();
            if vparts.len() != 2 || vparts[0] != "views" {
                return Err(IoError::CorruptBlock(format!(
                    "bad views line '{views_line}'"
                )));
            }
            let count: usize = vparts[1]
                .parse()
                .map_err(|_| IoError::CorruptBlock("bad view count".into()))?;
            let mut views = Vec::with_capacity(count);
            for i in 0..count {
                let view_line = reader.next()?;
                let wparts: Vec<&str> = view_line.split_whitespace().collect();
                if wparts.len() != 3 || wparts[0] != "view" || wparts[1] != i.to_string() {
                    return Err(IoError::CorruptBlock(format!(
                        "bad view header '{view_line}'"
                    )));
                }
                views.push(parse_variant(&mut reader, wparts[2])?);
            }
            SavedModel::Multi(MultiViewModel { views })
        }
        tag => SavedModel::Single(parse_variant(&mut reader, tag)?),
    };
    match reader.peek() {
        Some(&"end") => Ok(model),
        other => Err(IoError::CorruptBlock(format!(
            "expected trailing 'end', got {other:?}"
        ))),
    }
}

pub fn load_model(path: &Path) -> Result<SavedModel, IoError> {
    let content = fs::read_to_string(path)?;
    model_from_string(&content)
}

// ---------------------------------------------------------------------------
// Raw UCI source conversion
// ---------------------------------------------------------------------------

/// Copies a numeric-features/label-last CSV through after validating its
/// shape, producing the canonical file.
pub fn prepare_passthrough_csv(raw: &Path, out: &Path) -> Result<usize, IoError> {
    let view = load_csv(raw, LabelSource::LastColumn)?;
    let table = read_csv_table(raw)?;
    let mut content = String::new();
    for row in &table.rows {
        content.push_str(&row.join(","));
        content.push('\n');
    }
    fs::write(out, content)?;
    Ok(view.class_labels.len())
}

/// Converts the space-separated raw monks files (`class a1..a6 id`) into one
/// canonical CSV with features first and the class label last. Train and
/// test partitions are concatenated in order.
pub fn prepare_monks(raw_parts: &[&Path], out: &Path) -> Result<usize, IoError> {
    let mut content = String::new();
    let mut count = 0usize;
    for part in raw_parts {
        let text = fs::read_to_string(part)?;
        for (idx, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields.len() < 8 {
                return Err(IoError::RaggedRows {
                    line: idx + 1,
                    expected: 8,
                    got: fields.len(),
                });
            }
            let class = fields[0];
            let features = &fields[1..7];
            content.push_str(&features.join(","));
            content.push(',');
            content.push_str(class);
            content.push('\n');
            count += 1;
        }
    }
    if count == 0 {
        return Err(IoError::EmptyFile(out.display().to_string()));
    }
    fs::write(out, content)?;
    Ok(count)
}

/// Parses one raw robot-failure file: blocks of a label line followed by 15
/// lines of 6 whitespace-separated values. Returns (label, 15x6 block) per
/// instance.
fn parse_robot_file(path: &Path) -> Result<Vec<(String, Vec<Vec<f64>>)>, IoError> {
    let text = fs::read_to_string(path)?;
    let mut instances = Vec::new();
    let mut current_label: Option<String> = None;
    let mut block: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let starts_numeric = trimmed
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+');
        if starts_numeric {
            let row: Result<Vec<f64>, IoError> = trimmed
                .split_whitespace()
                .enumerate()
                .map(|(c, tok)| parse_field(tok, idx + 1, c + 1))
                .collect();
            let row = row?;
            if row.len() != 6 {
                return Err(IoError::RaggedRows {
                    line: idx + 1,
                    expected: 6,
                    got: row.len(),
                });
            }
            block.push(row);
        } else {
            if let Some(label) = current_label.take() {
                if block.len() != 15 {
                    return Err(IoError::RaggedRows {
                        line: idx + 1,
                        expected: 15,
                        got: block.len(),
                    });
                }
                instances.push((label, std::mem::take(&mut block)));
            }
            current_label = Some(trimmed.to_string());
        }
    }
    if let Some(label) = current_label {
        if block.len() != 15 {
            return Err(IoError::RaggedRows {
                line: 0,
                expected: 15,
                got: block.len(),
            });
        }
        instances.push((label, block));
    }
    if instances.is_empty() {
        return Err(IoError::EmptyFile(path.display().to_string()));
    }
    Ok(instances)
}

/// Converts raw robot-failure files into six per-view CSVs (one per force or
/// torque axis, 15 time steps each), a labels CSV, and a manifest tying them
/// together. Returns the instance count.
pub fn prepare_robot(raw_parts: &[&Path], out_dir: &Path, stem: &str) -> Result<usize, IoError> {
    let mut instances = Vec::new();
    for part in raw_parts {
        instances.extend(parse_robot_file(part)?);
    }
    fs::create_dir_all(out_dir)?;
    let view_names = ["fx", "fy", "fz", "tx", "ty", "tz"];
    let mut manifest = String::new();
    for (axis, name) in view_names.iter().enumerate() {
        let mut content = String::new();
        for (_, block) in &instances {
            let series: Vec<String> = block.iter().map(|row| row[axis].to_string()).collect();
            content.push_str(&series.join(","));
            content.push('\n');
        }
        let file = format!("{stem}_view_{name}.csv");
        fs::write(out_dir.join(&file), content)?;
        manifest.push_str(&format!("view {name} {file}\n"));
    }
    let mut labels = String::new();
    for (label, _) in &instances {
        labels.push_str(label);
        labels.push('\n');
    }
    let labels_file = format!("{stem}_labels.csv");
    fs::write(out_dir.join(&labels_file), labels)?;
    manifest.push_str(&format!("labels {labels_file}\n"));
    fs::write(out_dir.join(format!("{stem}.manifest")), manifest)?;
    Ok(instances.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{cluster_subclasses, fit_fast_kernel, fit_fast_linear};
    use crate::regress::{transform, KernelSolver};
    use crate::rng::RngStream;
    use crate::SeedRng;
    use rand::Rng;

    fn temp_path(name: &str) -> PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("fastsda-test-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn load_small_numeric_csv() {
        let path = temp_path("small.csv");
        fs::write(&path, "1.0,2.0,0\n3.0,4.0,1\n5.5,6.5,0\n").unwrap();
        let view = load_csv(&path, LabelSource::LastColumn).unwrap();
        assert_eq!((view.x.rows(), view.x.cols()), (2, 3));
        assert_eq!(view.class_labels, vec![0, 1, 0]);
        assert_eq!(view.x.get(1, 2), 6.5);
        fs::remove_file(&path).ok();
    }

    #[test]
    fn string_labels_map_in_first_appearance_order() {
        let path = temp_path("labels.csv");
        fs::write(&path, "1,2,g\n3,4,b\n5,6,g\n").unwrap();
        let view = load_csv(&path, LabelSource::LastColumn).unwrap();
        assert_eq!(view.class_labels, vec![0, 1, 0]);
        assert_eq!(view.label_names, vec!["g", "b"]);
        fs::remove_file(&path).ok();
    }

    #[test]
    fn ragged_row_names_line() {
        let path = temp_path("ragged.csv");
        fs::write(&path, "1,2,0\n3,4\n").unwrap();
        match load_csv(&path, LabelSource::LastColumn).unwrap_err() {
            IoError::RaggedRows { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        fs::remove_file(&path).ok();
    }

    #[test]
    fn header_detected_and_skipped() {
        let path = temp_path("header.csv");
        fs::write(&path, "f1,f2,label\n1,2,0\n3,4,1\n").unwrap();
        let view = load_csv(&path, LabelSource::LastColumn).unwrap();
        assert_eq!(view.x.cols(), 2);
        fs::remove_file(&path).ok();
    }

    #[test]
    fn empty_file_rejected() {
        let path = temp_path("empty.csv");
        fs::write(&path, "\n\n").unwrap();
        assert!(matches!(
            load_csv(&path, LabelSource::LastColumn),
            Err(IoError::EmptyFile(_))
        ));
        fs::remove_file(&path).ok();
    }

    #[test]
    fn multiview_manifest_round_trip() {
        let dir = temp_path("mvdir");
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("v0.csv"), "1,2\n3,4\n5,6\n").unwrap();
        fs::write(dir.join("v1.csv"), "7\n8\n9\n").unwrap();
        fs::write(dir.join("y.csv"), "a\nb\na\n").unwrap();
        fs::write(
            dir.join("data.manifest"),
            "view first v0.csv\nview second v1.csv\nlabels y.csv\n",
        )
        .unwrap();
        let ds = load_multiview(&dir.join("data.manifest")).unwrap();
        assert_eq!(ds.views.len(), 2);
        assert_eq!(ds.samples(), 3);
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.views[0].x.rows(), 2);
        assert_eq!(ds.views[1].x.rows(), 1);
        // mismatched view length
        fs::write(dir.join("v1.csv"), "7\n8\n").unwrap();
        assert!(matches!(
            load_multiview(&dir.join("data.manifest")),
            Err(IoError::ViewShapeMismatch { .. })
        ));
        fs::remove_dir_all(&dir).ok();
    }

    fn random_training(seed: u64) -> (Matrix, Vec<usize>) {
        let mut rng = SeedRng::from_parts(seed, &[0]);
        let n = 24;
        let mut x = Matrix::zeros(3, n);
        let mut labels = Vec::new();
        for i in 0..n {
            let c = usize::from(i >= n / 2);
            for r in 0..3 {
                x.set(r, i, 3.0 * c as f64 + rng.gen_range(-1.0..1.0));
            }
            labels.push(c);
        }
        (x, labels)
    }

    #[test]
    fn linear_model_round_trip_is_exact() {
        let (x, labels) = random_training(51);
        let sub = cluster_subclasses(&x, &labels, 2, 3, 0).unwrap();
        let model = fit_fast_linear(
            &x,
            &labels,
            &sub.labels,
            2,
            0.1,
            crate::regress::Normalization::L2,
            3,
        )
        .unwrap();
        let path = temp_path("model-linear.txt");
        save_model(&SavedModel::Single(model.clone()), &path).unwrap();
        let loaded = load_model(&path).unwrap();
        let SavedModel::Single(loaded) = loaded else {
            panic!("expected single model")
        };
        let y1 = transform(&model, &x).unwrap();
        let y2 = transform(&loaded, &x).unwrap();
        assert!(y1.sub(&y2).max_abs() <= 1e-12);
        fs::remove_file(&path).ok();
    }

    #[test]
    fn kernel_model_round_trip_preserves_sigma_exactly() {
        let (x, labels) = random_training(52);
        let sub = cluster_subclasses(&x, &labels, 1, 4, 0).unwrap();
        let model = fit_fast_kernel(
            &x,
            &labels,
            &sub.labels,
            1,
            0.5,
            Some(1.2345678901234567),
            KernelSolver::Direct,
            crate::regress::Normalization::L2,
            4,
        )
        .unwrap();
        let path = temp_path("model-kernel.txt");
        save_model(&SavedModel::Single(model.clone()), &path).unwrap();
        let SavedModel::Single(loaded) = load_model(&path).unwrap() else {
            panic!("expected single model")
        };
        let ModelVariant::Kernel { kernel, .. } = &loaded.variant else {
            panic!("expected kernel variant")
        };
        assert_eq!(kernel.sigma, 1.2345678901234567);
        let y1 = transform(&model, &x).unwrap();
        let y2 = transform(&loaded, &x).unwrap();
        assert!(y1.sub(&y2).max_abs() <= 1e-12);
        fs::remove_file(&path).ok();
    }

    #[test]
    fn tampered_header_is_version_mismatch() {
        let (x, labels) = random_training(53);
        let sub = cluster_subclasses(&x, &labels, 1, 5, 0).unwrap();
        let model = fit_fast_linear(
            &x,
            &labels,
            &sub.labels,
            1,
            0.1,
            crate::regress::Normalization::L2,
            5,
        )
        .unwrap();
        let text = model_to_string(&SavedModel::Single(model));
        let tampered = text.replace("FASTSDA-MODEL v1", "FASTSDA-MODEL v9");
        assert!(matches!(
            model_from_string(&tampered),
            Err(IoError::VersionMismatch(_))
        ));
    }

    #[test]
    fn monks_conversion_layout() {
        let raw = temp_path("monks.raw");
        fs::write(&raw, " 1 1 2 1 1 3 1 data_1\n 0 2 1 1 2 1 2 data_2\n").unwrap();
        let out = temp_path("monks.csv");
        let n = prepare_monks(&[raw.as_path()], &out).unwrap();
        assert_eq!(n, 2);
        let text = fs::read_to_string(&out).unwrap();
        assert_eq!(text, "1,2,1,1,3,1,1\n2,1,1,2,1,2,0\n");
        let view = load_csv(&out, LabelSource::LastColumn).unwrap();
        assert_eq!(view.x.rows(), 6);
        fs::remove_file(&raw).ok();
        fs::remove_file(&out).ok();
    }

    #[test]
    fn robot_conversion_builds_six_views() {
        let raw = temp_path("robot.raw");
        let mut content = String::new();
        for label in ["normal", "collision"] {
            content.push_str(label);
            content.push('\n');
            for t in 0..15 {
                let row: Vec<String> = (0..6).map(|a| format!("{}", t * 10 + a)).collect();
                content.push_str(&format!("\t{}\n", row.join("\t")));
            }
            content.push('\n');
        }
        fs::write(&raw, content).unwrap();
        let dir = temp_path("robotdir");
        let n = prepare_robot(&[raw.as_path()], &dir, "robot").unwrap();
        assert_eq!(n, 2);
        let ds = load_multiview(&dir.join("robot.manifest")).unwrap();
        assert_eq!(ds.views.len(), 6);
        assert_eq!(ds.samples(), 2);
        assert_eq!(ds.views[0].x.rows(), 15);
        // view "fy" (axis 1) of instance 0 at time 2 is 21
        assert_eq!(ds.views[1].x.get(2, 0), 21.0);
        assert_eq!(ds.labels(), &[0, 1]);
        fs::remove_file(&raw).ok();
        fs::remove_dir_all(&dir).ok();
    }
}
