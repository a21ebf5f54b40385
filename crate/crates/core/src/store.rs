//! In-process tabular store and metadata repository.
//!
//! Datasets are ingested once from CSV and are read-only afterwards. Queries
//! are plain projections: a list of columns over every row in ingestion order.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::canon::{Domain, Principal};
use crate::error::{Error, Result};
use crate::model::{AccessRequest, AttributeClass, Cell, ColumnKind};

/// Columns with at most this many distinct values may be categorical.
const CATEGORICAL_MAX_DISTINCT: usize = 20;

const IDENTIFIER_NAMES: &[&str] = &[
    "name",
    "full name",
    "first name",
    "last name",
    "customer name",
    "patient name",
    "email",
    "phone",
    "mobile",
    "phone number",
    "aadhaar",
    "aadhaar number",
    "pan",
    "pan number",
    "ssn",
    "passport",
    "account number",
];

const QUASI_TOKENS: &[&str] = &[
    "age",
    "gender",
    "sex",
    "zip",
    "pincode",
    "pin",
    "postcode",
    "city",
    "state",
    "district",
    "dob",
    "birth",
    "school",
    "occupation",
    "education",
    "marital",
    "nationality",
    "region",
    "religion",
    "caste",
    "ethnicity",
    "country",
    "location",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: ColumnKind,
    pub class: AttributeClass,
}

/// Parent label → leaf categories.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryHierarchy {
    pub groups: BTreeMap<String, Vec<String>>,
}

impl CategoryHierarchy {
    /// Parent class of `leaf` and the number of leaves it collapses.
    pub fn parent_of(&self, leaf: &str) -> Option<(&str, usize)> {
        self.groups
            .iter()
            .find(|(_, leaves)| leaves.iter().any(|l| l == leaf))
            .map(|(parent, leaves)| (parent.as_str(), leaves.len()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMetadata {
    pub dataset_id: String,
    /// Domain as declared (filename token or sidecar).
    pub domain: String,
    /// Data principal as declared.
    pub owner: String,
    pub name: String,
    pub columns: Vec<ColumnMeta>,
    #[serde(default)]
    pub hierarchies: BTreeMap<String, CategoryHierarchy>,
}

impl DatasetMetadata {
    pub fn canonical_domain(&self) -> Domain {
        Domain::parse(&self.domain)
    }

    pub fn principal(&self) -> Principal {
        Principal::parse(&self.owner)
    }

    pub fn column(&self, name: &str) -> Option<&ColumnMeta> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }
}

/// Splits `<Domain…>_<Owner>_<Name>.csv` right to left.
pub fn parse_dataset_filename(file_name: &str) -> Result<(String, String, String)> {
    let stem = file_name
        .rsplit(['/', '\\'])
        .next()
        .unwrap_or(file_name)
        .trim_end_matches(".csv")
        .trim_end_matches(".CSV");
    let tokens: Vec<&str> = stem.split('_').filter(|t| !t.is_empty()).collect();
    if tokens.len() < 3 {
        return Err(Error::Metadata {
            dataset: file_name.to_string(),
            message: format!(
                "file name needs `<Domain>_<Owner>_<Name>` (got {} token(s)) and no sidecar was supplied",
                tokens.len()
            ),
        });
    }
    let name = tokens[tokens.len() - 1].to_string();
    let owner = tokens[tokens.len() - 2].to_string();
    let domain = tokens[..tokens.len() - 2].join("_");
    Ok((domain, owner, name))
}

/// Sidecar metadata document (TOML).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub domain: Option<String>,
    pub owner: Option<String>,
    pub name: Option<String>,
    #[serde(default)]
    pub columns: BTreeMap<String, SidecarColumn>,
    #[serde(default)]
    pub hierarchies: BTreeMap<String, BTreeMap<String, Vec<String>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SidecarColumn {
    pub class: Option<AttributeClass>,
    pub kind: Option<ColumnKind>,
}

impl Sidecar {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("sidecar: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// `data/x.csv` → `data/x.meta.toml`
    pub fn default_path(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("meta.toml")
    }
}

fn name_tokens(name: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut prev_lower = false;
    for ch in name.chars() {
        if !ch.is_alphanumeric() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            prev_lower = false;
            continue;
        }
        if ch.is_uppercase() && prev_lower && !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
        prev_lower = ch.is_lowercase() || ch.is_ascii_digit();
        current.extend(ch.to_lowercase());
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn is_identifier_name(name: &str) -> bool {
    let trimmed = name.trim();
    if trimmed.ends_with("ID") || trimmed.ends_with("Id") {
        return true;
    }
    let tokens = name_tokens(trimmed);
    if tokens.last().is_some_and(|t| t == "id" || t == "uuid") {
        return true;
    }
    IDENTIFIER_NAMES.contains(&tokens.join(" ").as_str())
}

fn is_numeric_text(s: &str) -> bool {
    s.trim().parse::<f64>().is_ok_and(f64::is_finite)
}

/// Column kind from its name and raw values (`None` = null).
pub fn infer_kind(name: &str, values: &[Option<&str>]) -> ColumnKind {
    if is_identifier_name(name) {
        return ColumnKind::IdentifierLike;
    }
    let present: Vec<&str> = values.iter().flatten().copied().collect();
    if !present.is_empty() && present.iter().all(|v| is_numeric_text(v)) {
        return ColumnKind::Numeric;
    }
    let distinct: HashSet<&str> = present.iter().copied().collect();
    if !present.is_empty()
        && distinct.len() <= CATEGORICAL_MAX_DISTINCT
        && distinct.len() * 2 <= present.len()
    {
        ColumnKind::Categorical
    } else {
        ColumnKind::Text
    }
}

/// Default attribute class when the sidecar does not declare one.
pub fn default_class(name: &str, kind: ColumnKind) -> AttributeClass {
    if kind == ColumnKind::IdentifierLike {
        return AttributeClass::Identifier;
    }
    if name_tokens(name)
        .iter()
        .any(|t| QUASI_TOKENS.contains(&t.as_str()))
    {
        AttributeClass::QuasiIdentifier
    } else {
        AttributeClass::SensitiveValue
    }
}

#[derive(Debug, Clone)]
struct Dataset {
    metadata: DatasetMetadata,
    rows: Vec<Vec<Cell>>,
}

/// A projection over one dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionQuery {
    pub dataset_id: String,
    pub columns: Vec<String>,
    indices: Vec<usize>,
}

impl SelectionQuery {
    /// SQL rendering of the projection, for logs and reports.
    pub fn to_sql(&self) -> String {
        let cols: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("\"{}\"", c.replace('"', "\"\"")))
            .collect();
        format!(
            "SELECT {} FROM \"{}\"",
            cols.join(", "),
            self.dataset_id.replace('"', "\"\"")
        )
    }
}

/// Rows × named columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSlice {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl TableSlice {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<Cell>>) -> Result<Self> {
        if let Some((i, row)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != columns.len())
        {
            return Err(Error::Consistency(format!(
                "row {i} has {} cells, expected {}",
                row.len(),
                columns.len()
            )));
        }
        Ok(TableSlice { columns, rows })
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn column_values(&self, col: usize) -> impl Iterator<Item = &Cell> {
        self.rows.iter().map(move |r| &r[col])
    }

    /// Writes the slice as CSV; nulls become empty fields.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Consistency(format!("csv write: {e}"));
        w.write_record(&self.columns).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render().unwrap_or("")))
                .map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("in-memory csv write");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Reads a CSV back with every non-empty cell as text.
    pub fn read_csv_untyped<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let columns: Vec<String> = r
            .headers()
            .map_err(|e| Error::Ingest {
                dataset: "<csv>".into(),
                message: e.to_string(),
            })?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| Error::Ingest {
                dataset: "<csv>".into(),
                message: e.to_string(),
            })?;
            rows.push(
                record
                    .iter()
                    .map(|f| {
                        if f.is_empty() {
                            Cell::Null
                        } else {
                            Cell::Text(f.to_string())
                        }
                    })
                    .collect(),
            );
        }
        TableSlice::new(columns, rows)
    }
}

/// Datasets plus their metadata repository.
#[derive(Debug, Default, Clone)]
pub struct DataStore {
    datasets: BTreeMap<String, Dataset>,
}

impl DataStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Ingests a CSV file. A sidecar is taken from `sidecar` or, failing
    /// that, from `<stem>.meta.toml` beside the file when it exists.
    pub fn ingest_csv(&mut self, path: &Path, sidecar: Option<&Path>) -> Result<DatasetMetadata> {
        let dataset_id = path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::Metadata {
                dataset: path.display().to_string(),
                message: "path has no file name".into(),
            })?
            .to_string();
        let sidecar = match sidecar {
            Some(p) => Some(Sidecar::load(p)?),
            None => {
                let default = Sidecar::default_path(path);
                if default.exists() {
                    Some(Sidecar::load(&default)?)
                } else {
                    None
                }
            }
        };
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        self.ingest_reader(&dataset_id, file, sidecar.as_ref())
    }

    pub fn ingest_reader<R: Read>(
        &mut self,
        dataset_id: &str,
        reader: R,
        sidecar: Option<&Sidecar>,
    ) -> Result<DatasetMetadata> {
        let ingest_err = |message: String| Error::Ingest {
            dataset: dataset_id.to_string(),
            message,
        };
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(reader);
        let header: Vec<String> = r
            .headers()
            .map_err(|e| ingest_err(format!("cannot read header: {e}")))?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(ingest_err("missing header row".into()));
        }
        let mut seen = HashSet::new();
        for h in &header {
            if h.is_empty() {
                return Err(ingest_err("empty column name in header".into()));
            }
            if !seen.insert(h.as_str()) {
                return Err(ingest_err(format!("duplicate column `{h}`")));
            }
        }

        let mut raw_rows: Vec<Vec<Option<String>>> = Vec::new();
        for (idx, record) in r.records().enumerate() {
            let record = record.map_err(|e| match e.kind() {
                csv::ErrorKind::UnequalLengths {
                    expected_len,
                    len,
                    pos,
                } => {
                    let line = pos.as_ref().map(|p| p.line()).unwrap_or(idx as u64 + 2);
                    ingest_err(format!(
                        "row {} (line {line}) has {len} fields, expected {expected_len}",
                        idx + 1
                    ))
                }
                _ => ingest_err(format!("row {}: {e}", idx + 1)),
            })?;
            raw_rows.push(
                record
                    .iter()
                    .map(|f| {
                        if f.is_empty() {
                            None
                        } else {
                            Some(f.to_string())
                        }
                    })
                    .collect(),
            );
        }
        if raw_rows.is_empty() {
            return Err(ingest_err("no data rows after the header".into()));
        }

        let (domain, owner, name) = resolve_names(dataset_id, sidecar)?;

        let mut columns = Vec::with_capacity(header.len());
        for (ci, col) in header.iter().enumerate() {
            let values: Vec<Option<&str>> = raw_rows.iter().map(|r| r[ci].as_deref()).collect();
            let declared = sidecar.and_then(|s| s.columns.get(col));
            let kind = declared
                .and_then(|d| d.kind)
                .unwrap_or_else(|| infer_kind(col, &values));
            if kind == ColumnKind::Numeric {
                if let Some((ri, v)) = values
                    .iter()
                    .enumerate()
                    .find_map(|(ri, v)| v.filter(|v| !is_numeric_text(v)).map(|v| (ri, v)))
                {
                    return Err(ingest_err(format!(
                        "row {}: `{v}` in numeric column `{col}` is not a number",
                        ri + 1
                    )));
                }
            }
            let class = declared
                .and_then(|d| d.class)
                .unwrap_or_else(|| default_class(col, kind));
            columns.push(ColumnMeta {
                name: col.clone(),
                kind,
                class,
            });
        }
        if let Some(s) = sidecar {
            let unknown: Vec<&String> = s.columns.keys().filter(|k| !header.contains(k)).collect();
            if !unknown.is_empty() {
                return Err(Error::Metadata {
                    dataset: dataset_id.to_string(),
                    message: format!("sidecar names unknown columns {unknown:?}"),
                });
            }
        }

        let rows = raw_rows
            .into_iter()
            .map(|raw| {
                raw.into_iter()
                    .zip(&columns)
                    .map(|(v, c)| match v {
                        None => Cell::Null,
                        Some(v) if c.kind == ColumnKind::Numeric => Cell::Number(v),
                        Some(v) => Cell::Text(v),
                    })
                    .collect()
            })
            .collect();

        let hierarchies = sidecar
            .map(|s| {
                s.hierarchies
                    .iter()
                    .map(|(col, groups)| {
                        (
                            col.clone(),
                            CategoryHierarchy {
                                groups: groups.clone(),
                            },
                        )
                    })
                    .collect()
            })
            .unwrap_or_default();

        let metadata = DatasetMetadata {
            dataset_id: dataset_id.to_string(),
            domain,
            owner,
            name,
            columns,
            hierarchies,
        };
        self.datasets.insert(
            dataset_id.to_string(),
            Dataset {
                metadata: metadata.clone(),
                rows,
            },
        );
        Ok(metadata)
    }

    pub fn metadata(&self, dataset_id: &str) -> Option<&DatasetMetadata> {
        self.datasets.get(dataset_id).map(|d| &d.metadata)
    }

    pub fn dataset_ids(&self) -> impl Iterator<Item = &str> {
        self.datasets.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.datasets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.datasets.is_empty()
    }

    /// Drops a dataset; outstanding queries against it become stale.
    pub fn remove(&mut self, dataset_id: &str) -> Option<DatasetMetadata> {
        self.datasets.remove(dataset_id).map(|d| d.metadata)
    }

    pub fn metadata_repository(&self) -> MetadataRepository {
        MetadataRepository {
            entries: self
                .datasets
                .iter()
                .map(|(k, d)| (k.clone(), d.metadata.clone()))
                .collect(),
        }
    }

    pub fn build_query(
        &self,
        request: &AccessRequest,
        metadata: &DatasetMetadata,
    ) -> Result<SelectionQuery> {
        let mut indices = Vec::with_capacity(request.requested_attributes.len());
        let mut missing = Vec::new();
        for attr in &request.requested_attributes {
            match metadata.column_index(attr) {
                Some(i) => indices.push(i),
                None => missing.push(attr.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::UnknownAttributes {
                dataset: metadata.dataset_id.clone(),
                missing,
            });
        }
        Ok(SelectionQuery {
            dataset_id: metadata.dataset_id.clone(),
            columns: request.requested_attributes.clone(),
            indices,
        })
    }

    pub fn fetch(&self, query: &SelectionQuery) -> Result<TableSlice> {
        let dataset = self
            .datasets
            .get(&query.dataset_id)
            .ok_or_else(|| Error::StaleReference(query.dataset_id.clone()))?;
        let still_valid = query.indices.iter().zip(&query.columns).all(|(&i, name)| {
            dataset
                .metadata
                .columns
                .get(i)
                .is_some_and(|c| &c.name == name)
        });
        if !still_valid {
            return Err(Error::StaleReference(query.dataset_id.clone()));
        }
        let rows = dataset
            .rows
            .iter()
            .map(|row| query.indices.iter().map(|&i| row[i].clone()).collect())
            .collect();
        TableSlice::new(query.columns.clone(), rows)
    }
}

fn resolve_names(dataset_id: &str, sidecar: Option<&Sidecar>) -> Result<(String, String, String)> {
    let from_name = parse_dataset_filename(dataset_id);
    let pick = |side: Option<&String>, idx: usize| -> Result<String> {
        match side {
            Some(v) => Ok(v.clone()),
            None => from_name
                .as_ref()
                .map_err(clone_metadata_err)
                .map(|t| match idx {
                    0 => t.0.clone(),
                    1 => t.1.clone(),
                    _ => t.2.clone(),
                }),
        }
    };
    let sc = sidecar.cloned().unwrap_or_default();
    let domain = pick(sc.domain.as_ref(), 0)?;
    let owner = pick(sc.owner.as_ref(), 1)?;
    let name = pick(sc.name.as_ref(), 2)?;
    for (field, v) in [("domain", &domain), ("owner", &owner)] {
        if v.trim().is_empty() {
            return Err(Error::Metadata {
                dataset: dataset_id.to_string(),
                message: format!("{field} is empty"),
            });
        }
    }
    Ok((domain, owner, name))
}

fn clone_metadata_err(e: &Error) -> Error {
    match e {
        Error::Metadata { dataset, message } => Error::Metadata {
            dataset: dataset.clone(),
            message: message.clone(),
        },
        other => Error::Config(other.to_string()),
    }
}

/// Metadata for every ingested dataset, keyed by dataset id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataRepository {
    pub entries: BTreeMap<String, DatasetMetadata>,
}

impl MetadataRepository {
    pub fn get(&self, dataset_id: &str) -> Option<&DatasetMetadata> {
        self.entries.get(dataset_id)
    }

    pub fn domains(&self) -> BTreeSet<String> {
        self.entries.values().map(|m| m.domain.clone()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
