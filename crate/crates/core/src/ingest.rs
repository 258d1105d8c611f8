//! Dataset loading, encoding, splitting and synthetic generation.
//!
//! A [`DatasetSpec`] describes how to turn a headed CSV into a [`Dataset`]:
//! which column holds the label, how groups are assigned, which columns are
//! one-hot encoded and which are dropped. Group attributes never become
//! features.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{Agent, Dataset};
use crate::error::{Error, Result, RowIssue};

fn default_true() -> bool {
    true
}

fn default_delimiter() -> char {
    ','
}

/// How a headed CSV maps to agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    #[serde(default)]
    pub name: Option<String>,
    /// Relative paths are resolved against the spec file's directory.
    pub csv_path: PathBuf,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    pub label_column: String,
    /// Raw label value to {0, 1}. Without it labels must read as `0`/`1`
    /// or `true`/`false`, unless a threshold rule is set.
    #[serde(default)]
    pub label_map: Option<BTreeMap<String, u8>>,
    /// Numeric label: positive iff `value >= label_threshold`.
    #[serde(default)]
    pub label_threshold: Option<f64>,
    /// Numeric label: positive iff `value > q`-quantile of the column.
    #[serde(default)]
    pub label_quantile: Option<f64>,
    /// Column holding the group attribute.
    #[serde(default)]
    pub group_column: Option<String>,
    /// Group value to group index.
    #[serde(default)]
    pub group_value_map: BTreeMap<String, usize>,
    /// Alternative group rule: the group is the index of the largest of
    /// these numeric columns.
    #[serde(default)]
    pub group_argmax_columns: Option<Vec<String>>,
    /// Skip rows whose group value is not in `group_value_map` instead of
    /// rejecting them.
    #[serde(default)]
    pub drop_unmapped_groups: bool,
    #[serde(default)]
    pub categorical_columns: Vec<String>,
    #[serde(default)]
    pub drop_columns: Vec<String>,
    /// Keep only these feature columns (after the drops).
    #[serde(default)]
    pub feature_columns: Option<Vec<String>>,
    /// Cell values treated as missing.
    #[serde(default)]
    pub missing_values: Vec<String>,
    /// Replacement for missing numeric cells. Rows with missing cells are
    /// rejected when unset.
    #[serde(default)]
    pub fill_missing: Option<f64>,
    /// z-score features with train-split statistics.
    #[serde(default = "default_true")]
    pub standardize: bool,
    /// Expected group sizes, checked by `inspect`.
    #[serde(default)]
    pub expected_group_sizes: Option<Vec<usize>>,
}

impl DatasetSpec {
    fn num_groups(&self) -> Result<usize> {
        match (&self.group_column, &self.group_argmax_columns) {
            (Some(_), None) => self
                .group_value_map
                .values()
                .max()
                .map(|m| m + 1)
                .ok_or_else(|| Error::Config("group_value_map must not be empty".into())),
            (None, Some(cols)) if !cols.is_empty() => Ok(cols.len()),
            _ => Err(Error::Config(
                "set exactly one of group_column or a non-empty group_argmax_columns".into(),
            )),
        }
    }

    fn validate(&self) -> Result<()> {
        let rules = [self.label_map.is_some(), self.label_threshold.is_some(), self.label_quantile.is_some()];
        if rules.iter().filter(|&&r| r).count() > 1 {
            return Err(Error::Config(
                "label_map, label_threshold and label_quantile are mutually exclusive".into(),
            ));
        }
        if let Some(q) = self.label_quantile {
            if !(0.0..1.0).contains(&q) {
                return Err(Error::Config("label_quantile must lie in [0, 1)".into()));
            }
        }
        if let Some(map) = &self.label_map {
            if map.values().any(|&v| v > 1) {
                return Err(Error::Config("label_map values must be 0 or 1".into()));
            }
        }
        let groups = self.num_groups()?;
        if self.group_column.is_some() {
            let used: BTreeSet<usize> = self.group_value_map.values().copied().collect();
            if used.len() != groups {
                return Err(Error::Config(format!(
                    "group_value_map must cover every index in 0..{groups}"
                )));
            }
        }
        Ok(())
    }
}

/// A loaded dataset with column provenance for reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub name: String,
    pub dataset: Dataset,
    pub feature_names: Vec<String>,
    /// Rows skipped because their group was unmapped.
    pub dropped_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum ColumnRole {
    Numeric,
    Categorical(Vec<String>),
}

fn parse_label(raw: &str, spec: &DatasetSpec) -> std::result::Result<LabelCell, String> {
    if let Some(map) = &spec.label_map {
        return map
            .get(raw)
            .map(|&v| LabelCell::Binary(v == 1))
            .ok_or_else(|| format!("label value {raw:?} is not in label_map"));
    }
    if spec.label_threshold.is_some() || spec.label_quantile.is_some() {
        return raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(LabelCell::Numeric)
            .ok_or_else(|| format!("label {raw:?} is not a number"));
    }
    match raw {
        "1" | "true" | "True" | "TRUE" => Ok(LabelCell::Binary(true)),
        "0" | "false" | "False" | "FALSE" => Ok(LabelCell::Binary(false)),
        _ => Err(format!("label {raw:?} is not binary")),
    }
}

enum LabelCell {
    Binary(bool),
    Numeric(f64),
}

fn column_index(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Config(format!("column {name:?} is not in the CSV header")))
}

/// Resolves `spec.csv_path` against `base` when it is relative.
pub fn resolve_csv_path(spec: &DatasetSpec, base: Option<&Path>) -> PathBuf {
    match base {
        Some(dir) if spec.csv_path.is_relative() => dir.join(&spec.csv_path),
        _ => spec.csv_path.clone(),
    }
}

/// Loads and encodes a CSV. Relative `csv_path` values resolve against
/// `base`. Features are not standardized here; see [`Standardizer`].
pub fn load_csv(spec: &DatasetSpec, base: Option<&Path>) -> Result<LoadedDataset> {
    spec.validate()?;
    let path = resolve_csv_path(spec, base);
    let delimiter = u8::try_from(spec.delimiter)
        .map_err(|_| Error::Config("delimiter must be a single ASCII character".into()))?;
    let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let rows: Vec<csv::StringRecord> = reader.records().collect::<std::result::Result<_, _>>()?;
    encode(spec, &header, &rows, &path)
}

fn encode(spec: &DatasetSpec, header: &[String], rows: &[csv::StringRecord], path: &Path) -> Result<LoadedDataset> {
    let num_groups = spec.num_groups()?;
    let label_idx = column_index(header, &spec.label_column)?;
    let mut excluded: BTreeSet<usize> = BTreeSet::from([label_idx]);
    let group_idx = match &spec.group_column {
        Some(col) => {
            let i = column_index(header, col)?;
            excluded.insert(i);
            Some(i)
        }
        None => None,
    };
    let argmax_idx: Vec<usize> = match &spec.group_argmax_columns {
        Some(cols) => cols.iter().map(|c| column_index(header, c)).collect::<Result<_>>()?,
        None => Vec::new(),
    };
    excluded.extend(argmax_idx.iter().copied());
    for col in &spec.drop_columns {
        excluded.insert(column_index(header, col)?);
    }
    let keep: Option<BTreeSet<usize>> = match &spec.feature_columns {
        Some(cols) => Some(cols.iter().map(|c| column_index(header, c)).collect::<Result<_>>()?),
        None => None,
    };
    let categorical: BTreeSet<usize> = spec
        .categorical_columns
        .iter()
        .map(|c| column_index(header, c))
        .collect::<Result<_>>()?;
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|i| !excluded.contains(i) && keep.as_ref().is_none_or(|k| k.contains(i)))
        .collect();

    let missing: BTreeSet<&str> = spec.missing_values.iter().map(String::as_str).collect();
    let is_missing = |cell: &str| cell.is_empty() || missing.contains(cell);

    let mut issues = Vec::new();
    let mut row_ok = vec![true; rows.len()];
    let mut row_group = vec![0usize; rows.len()];
    let mut dropped = 0usize;
    let mut seen_groups: BTreeSet<&str> = BTreeSet::new();
    for (r, rec) in rows.iter().enumerate() {
        if rec.len() != header.len() {
            issues.push(RowIssue {
                row: r + 1,
                reason: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
            row_ok[r] = false;
            continue;
        }
        if let Some(gi) = group_idx {
            let value = &rec[gi];
            match spec.group_value_map.get(value) {
                Some(&g) => {
                    row_group[r] = g;
                    seen_groups.insert(value);
                }
                None if spec.drop_unmapped_groups => {
                    row_ok[r] = false;
                    dropped += 1;
                }
                None => {
                    issues.push(RowIssue {
                        row: r + 1,
                        reason: format!("group value {value:?} is not mapped"),
                    });
                    row_ok[r] = false;
                }
            }
        } else {
            let mut best: Option<(usize, f64)> = None;
            for (g, &ci) in argmax_idx.iter().enumerate() {
                match rec[ci].parse::<f64>() {
                    Ok(v) if v.is_finite() => {
                        if best.is_none_or(|(_, b)| v > b) {
                            best = Some((g, v));
                        }
                    }
                    _ => {
                        issues.push(RowIssue {
                            row: r + 1,
                            reason: format!("group score {:?} in column {:?} is not a number", &rec[ci], header[ci]),
                        });
                        row_ok[r] = false;
                        break;
                    }
                }
            }
            if row_ok[r] {
                row_group[r] = best.map(|(g, _)| g).unwrap_or(0);
            }
        }
    }
    if group_idx.is_some() {
        if let Some(absent) = spec.group_value_map.keys().find(|k| !seen_groups.contains(k.as_str())) {
            if issues.is_empty() {
                return Err(Error::UnknownCategory {
                    column: spec.group_column.clone().unwrap_or_default(),
                    value: absent.clone(),
                });
            }
        }
    }

    let roles: Vec<ColumnRole> = feature_cols
        .iter()
        .map(|&ci| {
            if categorical.contains(&ci) {
                let levels: BTreeSet<String> = rows
                    .iter()
                    .zip(&row_ok)
                    .filter(|(rec, &ok)| ok && !is_missing(&rec[ci]))
                    .map(|(rec, _)| rec[ci].to_string())
                    .collect();
                ColumnRole::Categorical(levels.into_iter().collect())
            } else {
                ColumnRole::Numeric
            }
        })
        .collect();
    let mut feature_names = Vec::new();
    for (&ci, role) in feature_cols.iter().zip(&roles) {
        match role {
            ColumnRole::Numeric => feature_names.push(header[ci].clone()),
            ColumnRole::Categorical(levels) => {
                feature_names.extend(levels.iter().map(|l| format!("{}={}", header[ci], l)))
            }
        }
    }

    let mut encoded: Vec<(Vec<f64>, usize, LabelCell)> = Vec::new();
    for (r, rec) in rows.iter().enumerate() {
        if !row_ok[r] {
            continue;
        }
        let mut x = Vec::with_capacity(feature_names.len());
        let mut problem: Option<String> = None;
        for (&ci, role) in feature_cols.iter().zip(&roles) {
            let cell = &rec[ci];
            match role {
                ColumnRole::Categorical(levels) => {
                    if is_missing(cell) && spec.fill_missing.is_none() {
                        problem = Some(format!("missing value in column {:?}", header[ci]));
                        break;
                    }
                    x.extend(levels.iter().map(|l| if l == cell { 1.0 } else { 0.0 }));
                }
                ColumnRole::Numeric => {
                    if is_missing(cell) {
                        match spec.fill_missing {
                            Some(v) => x.push(v),
                            None => {
                                problem = Some(format!("missing value in column {:?}", header[ci]));
                                break;
                            }
                        }
                        continue;
                    }
                    match cell.parse::<f64>() {
                        Ok(v) if v.is_finite() => x.push(v),
                        _ => {
                            problem = Some(format!("{cell:?} in column {:?} is not a number", header[ci]));
                            break;
                        }
                    }
                }
            }
        }
        let label = match parse_label(&rec[label_idx], spec) {
            Ok(l) => Some(l),
            Err(e) => {
                problem.get_or_insert(e);
                None
            }
        };
        match (problem, label) {
            (None, Some(label)) => encoded.push((x, row_group[r], label)),
            (problem, _) => issues.push(RowIssue {
                row: r + 1,
                reason: problem.unwrap_or_else(|| "unparseable row".into()),
            }),
        }
    }
    if !issues.is_empty() {
        issues.sort_by_key(|i| i.row);
        return Err(Error::MalformedRows(issues));
    }

    let threshold = match (spec.label_threshold, spec.label_quantile) {
        (Some(t), _) => Some(t),
        (None, Some(q)) => {
            let mut values: Vec<f64> = encoded
                .iter()
                .filter_map(|(_, _, l)| match l {
                    LabelCell::Numeric(v) => Some(*v),
                    LabelCell::Binary(_) => None,
                })
                .collect();
            values.sort_by(f64::total_cmp);
            Some(quantile_sorted(&values, q))
        }
        (None, None) => None,
    };
    let strict = spec.label_quantile.is_some();
    let agents: Vec<Agent> = encoded
        .into_iter()
        .map(|(x, g, l)| {
            let label = match l {
                LabelCell::Binary(b) => b,
                LabelCell::Numeric(v) => {
                    let t = threshold.unwrap_or(0.5);
                    if strict {
                        v > t
                    } else {
                        v >= t
                    }
                }
            };
            Agent::new(x, g, label)
        })
        .collect();
    if agents.is_empty() {
        return Err(Error::invalid(format!("{} contains no usable rows", path.display())));
    }
    let dataset = Dataset::new(agents, num_groups)?;
    Ok(LoadedDataset {
        name: spec
            .name
            .clone()
            .unwrap_or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()),
        dataset,
        feature_names,
        dropped_rows: dropped,
    })
}

/// Linear-interpolation quantile of sorted values.
fn quantile_sorted(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let pos = q * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
}

/// Stratified random split: each group contributes `round(n_g * fraction)`
/// agents to the test side. Both sides keep the original row order.
pub fn split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid("test fraction must lie in (0, 1)"));
    }
    let mut by_group: Vec<Vec<usize>> = vec![Vec::new(); data.num_groups()];
    for (i, a) in data.agents().iter().enumerate() {
        by_group[a.group.0].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (g, mut members) in by_group.into_iter().enumerate() {
        let n = members.len();
        let n_test = (n as f64 * test_fraction).round() as usize;
        if n_test == 0 || n_test == n {
            return Err(Error::invalid(format!(
                "group {g} has {n} agent(s), too few for both sides of a {test_fraction} split"
            )));
        }
        members.shuffle(&mut rng);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.subset(&train)?, data.subset(&test)?))
}

/// Per-feature z-scoring with statistics taken from one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation; constant features keep scale 1.
    pub fn fit(data: &Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("cannot standardize an empty dataset"));
        }
        let d = data.dim();
        let n = data.len() as f64;
        let mut mean = vec![0.0; d];
        for a in data.agents() {
            for (m, v) in mean.iter_mut().zip(&a.x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for a in data.agents() {
            for ((s, v), m) in var.iter_mut().zip(&a.x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, scale })
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        crate::error::check_dim(self.mean.len(), data.dim())?;
        data.map_features(|x| {
            x.iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
    }
}

fn zero() -> f64 {
    0.0
}

/// One group of the two-Gaussian generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianGroup {
    pub size: usize,
    pub positive_fraction: f64,
    pub mean_positive: Vec<f64>,
    pub mean_negative: Vec<f64>,
    /// Shared covariance of both classes (identity when unset).
    #[serde(default)]
    pub covariance: Option<Vec<Vec<f64>>>,
    #[serde(default = "zero")]
    pub label_noise: f64,
}

/// One group of the one-dimensional margin generator. Negatives are uniform
/// on `[-spread, -margin]` and positives on `[margin, spread]`, so the
/// separator sits at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginGroup {
    pub negatives: usize,
    pub positives: usize,
    #[serde(default = "zero")]
    pub margin: f64,
    pub spread: f64,
    #[serde(default = "zero")]
    pub label_noise: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum SyntheticSpec {
    TwoGaussians {
        #[serde(default)]
        name: Option<String>,
        seed: u64,
        groups: Vec<GaussianGroup>,
        #[serde(default)]
        standardize: bool,
    },
    OneDimMargin {
        #[serde(default)]
        name: Option<String>,
        seed: u64,
        groups: Vec<MarginGroup>,
        #[serde(default)]
        standardize: bool,
    },
}

impl SyntheticSpec {
    pub fn name(&self) -> String {
        let (name, fallback) = match self {
            SyntheticSpec::TwoGaussians { name, .. } => (name, "two_gaussians"),
            SyntheticSpec::OneDimMargin { name, .. } => (name, "one_dim_margin"),
        };
        name.clone().unwrap_or_else(|| fallback.to_string())
    }

    pub fn standardize(&self) -> bool {
        match self {
            SyntheticSpec::TwoGaussians { standardize, .. } | SyntheticSpec::OneDimMargin { standardize, .. } => {
                *standardize
            }
        }
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        match self {
            SyntheticSpec::TwoGaussians { groups, .. } => groups.iter().map(|g| g.size).collect(),
            SyntheticSpec::OneDimMargin { groups, .. } => groups.iter().map(|g| g.negatives + g.positives).collect(),
        }
    }
}

fn check_noise(noise: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Config("label_noise must lie in [0, 1]".into()));
    }
    Ok(())
}

fn cholesky_factor(cov: &Option<Vec<Vec<f64>>>, d: usize, g: usize) -> Result<DMatrix<f64>> {
    let Some(rows) = cov else {
        return Ok(DMatrix::identity(d, d));
    };
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Config(format!("group {g}: covariance must be {d}x{d}")));
    }
    let m = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
    if (0..d).any(|i| (0..d).any(|j| (m[(i, j)] - m[(j, i)]).abs() > 1e-12)) {
        return Err(Error::Config(format!("group {g}: covariance is not symmetric")));
    }
    nalgebra::Cholesky::new(m)
        .map(|c| c.l())
        .ok_or_else(|| Error::Config(format!("group {g}: covariance is degenerate (not positive definite)")))
}

/// Deterministic sample from a synthetic spec. Agents are emitted group by
/// group.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    let mut agents = Vec::new();
    let num_groups = match spec {
        SyntheticSpec::TwoGaussians { seed, groups, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for (g, group) in groups.iter().enumerate() {
                let d = group.mean_positive.len();
                if d == 0 || group.mean_negative.len() != d {
                    return Err(Error::Config(format!("group {g}: class means must share a positive dimension")));
                }
                if !(0.0..=1.0).contains(&group.positive_fraction) {
                    return Err(Error::Config(format!("group {g}: positive_fraction must lie in [0, 1]")));
                }
                check_noise(group.label_noise)?;
                let l = cholesky_factor(&group.covariance, d, g)?;
                let n_pos = (group.size as f64 * group.positive_fraction).round() as usize;
                for i in 0..group.size {
                    let label = i < n_pos;
                    let mean = if label { &group.mean_positive } else { &group.mean_negative };
                    let z = nalgebra::DVector::from_fn(d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
                    let x = &l * z;
                    let x: Vec<f64> = x.iter().zip(mean).map(|(v, m)| v + m).collect();
                    let flip = group.label_noise > 0.0 && rng.random::<f64>() < group.label_noise;
                    agents.push(Agent::new(x, g, label != flip));
                }
            }
            groups.len()
        }
        SyntheticSpec::OneDimMargin { seed, groups, .. } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for (g, group) in groups.iter().enumerate() {
                if !(group.margin >= 0.0 && group.spread >= group.margin) {
                    return Err(Error::Config(format!("group {g}: need 0 <= margin <= spread")));
                }
                check_noise(group.label_noise)?;
                for i in 0..group.negatives + group.positives {
                    let label = i >= group.negatives;
                    let magnitude = group.margin + (group.spread - group.margin) * rng.random::<f64>();
                    let x = if label { magnitude } else { -magnitude };
                    let flip = group.label_noise > 0.0 && rng.random::<f64>() < group.label_noise;
                    agents.push(Agent::new(vec![x], g, label != flip));
                }
            }
            groups.len()
        }
    };
    if num_groups == 0 {
        return Err(Error::Config("a synthetic spec needs at least one group".into()));
    }
    Dataset::new(agents, num_groups)
}

/// Either kind of dataset description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DatasetSource {
    Synthetic(SyntheticSpec),
    Csv(DatasetSpec),
}

impl DatasetSource {
    /// Parses a spec file: tables with a `generator` key are synthetic.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let value: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_table(value)
    }

    pub fn from_table(table: toml::Table) -> Result<Self> {
        let is_synthetic = table.contains_key("generator");
        let value = toml::Value::Table(table);
        if is_synthetic {
            value
                .try_into()
                .map(DatasetSource::Synthetic)
                .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
        } else {
            value
                .try_into()
                .map(DatasetSource::Csv)
                .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn standardize(&self) -> bool {
        match self {
            DatasetSource::Synthetic(s) => s.standardize(),
            DatasetSource::Csv(s) => s.standardize,
        }
    }

    pub fn expected_group_sizes(&self) -> Option<Vec<usize>> {
        match self {
            DatasetSource::Synthetic(s) => Some(s.group_sizes()),
            DatasetSource::Csv(s) => s.expected_group_sizes.clone(),
        }
    }

    /// Loads or generates the full (unsplit) dataset.
    pub fn load(&self, base: Option<&Path>) -> Result<LoadedDataset> {
        match self {
            DatasetSource::Synthetic(s) => {
                let dataset = generate_synthetic(s)?;
                let feature_names = (0..dataset.dim()).map(|i| format!("x{i}")).collect();
                Ok(LoadedDataset {
                    name: s.name(),
                    dataset,
                    feature_names,
                    dropped_rows: 0,
                })
            }
            DatasetSource::Csv(s) => load_csv(s, base),
        }
    }
}

/// Writes a dataset as `x0..x{d-1},group,label`.
pub fn write_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..data.dim()).map(|i| format!("x{i}")).collect();
    header.push("group".into());
    header.push("label".into());
    writer.write_record(&header)?;
    for a in data.agents() {
        let mut row: Vec<String> = a.x.iter().map(|v| v.to_string()).collect();
        row.push(a.group.0.to_string());
        row.push(u8::from(a.label).to_string());
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}
