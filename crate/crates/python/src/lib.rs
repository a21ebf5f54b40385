//! Python bindings: `import privgov`.

use std::path::PathBuf;

use privgov_core::anonymize;
use privgov_core::cluster::{
    synthetic_corpus, ClusterModel as CoreClusterModel, ClusterParams, CorpusDoc, CorpusParams,
};
use privgov_core::engine::{
    self, Config, DomainSource, Engine as CoreEngine, StageError as CoreStageError,
};
use privgov_core::model::{AccessRequest, SensitivityLevel, TrustLevel};
use privgov_core::policy::select_strategy as core_select;
use privgov_core::store::DatasetMetadata;
use privgov_core::synth;
use privgov_core::trust::{oracle_trust as core_oracle, TrustFeatures};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(privgov, PrivgovError, PyException);
create_exception!(privgov, StageError, PrivgovError);

fn err(e: impl std::fmt::Display) -> PyErr {
    PrivgovError::new_err(e.to_string())
}

fn stage_err(e: CoreStageError) -> PyErr {
    StageError::new_err(e.to_string())
}

fn metadata_dict<'py>(py: Python<'py>, m: &DatasetMetadata) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("dataset_id", &m.dataset_id)?;
    d.set_item("domain", m.canonical_domain().to_string())?;
    d.set_item("owner", m.principal().to_string())?;
    let cols: Vec<(String, String, String)> = m
        .columns
        .iter()
        .map(|c| (c.name.clone(), c.class.to_string(), c.kind.to_string()))
        .collect();
    d.set_item("columns", cols)?;
    Ok(d)
}

/// Result of one request evaluation.
#[pyclass(frozen)]
struct Evaluation {
    inner: engine::Evaluation,
}

#[pymethods]
impl Evaluation {
    #[getter]
    fn request_id(&self) -> String {
        self.inner.report.request_id.clone()
    }

    #[getter]
    fn trust(&self) -> &'static str {
        self.inner.trust.as_str()
    }

    #[getter]
    fn sensitivity(&self) -> &'static str {
        self.inner.finding.level.as_str()
    }

    #[getter]
    fn domain(&self) -> String {
        self.inner.data_profile.domain.clone()
    }

    /// "metadata" or "clustering".
    #[getter]
    fn domain_source(&self) -> &'static str {
        match self.inner.domain_source {
            DomainSource::Metadata => "metadata",
            DomainSource::Clustering(_) => "clustering",
        }
    }

    #[getter]
    fn strategy(&self) -> String {
        self.inner.strategy.name.clone()
    }

    #[getter]
    fn technique(&self) -> String {
        self.inner.strategy.technique().to_string()
    }

    #[getter]
    fn score(&self) -> f64 {
        self.inner.result.score
    }

    #[getter]
    fn citations(&self) -> Vec<String> {
        self.inner
            .finding
            .citations()
            .into_iter()
            .map(String::from)
            .collect()
    }

    #[getter]
    fn columns(&self) -> Vec<String> {
        self.inner.result.slice.columns.clone()
    }

    /// Anonymized rows; nulls become None.
    #[getter]
    fn rows(&self) -> Vec<Vec<Option<String>>> {
        self.inner
            .result
            .slice
            .rows
            .iter()
            .map(|r| r.iter().map(|c| c.render().map(String::from)).collect())
            .collect()
    }

    fn csv(&self) -> String {
        self.inner.result.slice.to_csv_string()
    }

    fn report(&self) -> String {
        self.inner.report.to_text()
    }

    fn audit_lines(&self) -> Vec<String> {
        self.inner
            .result
            .audit
            .iter()
            .map(|e| e.to_line())
            .collect()
    }

    /// Writes csv, report and audit log; returns their paths.
    fn write_outputs(&self, dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        Ok(self.inner.write_outputs(&dir).map_err(err)?.to_vec())
    }

    fn __repr__(&self) -> String {
        format!(
            "Evaluation(trust={}, sensitivity={}, strategy={}, score={:.4})",
            self.trust(),
            self.sensitivity(),
            self.inner.strategy.name,
            self.inner.result.score
        )
    }
}

/// The governance engine with its data store.
#[pyclass]
struct Engine {
    inner: CoreEngine,
}

#[pymethods]
impl Engine {
    /// Shipped defaults with `key`, or everything from a TOML config file.
    #[new]
    #[pyo3(signature = (key = "privgov", config = None))]
    fn new(key: &str, config: Option<PathBuf>) -> PyResult<Self> {
        let inner = match config {
            Some(path) => {
                CoreEngine::from_config(&Config::load(&path).map_err(err)?).map_err(err)?
            }
            None => CoreEngine::new(key.as_bytes().to_vec()),
        };
        Ok(Engine { inner })
    }

    #[getter]
    fn datasets(&self) -> Vec<String> {
        self.inner.store.dataset_ids().map(String::from).collect()
    }

    #[getter]
    fn get_prefer_encryption(&self) -> bool {
        self.inner.prefer_encryption
    }

    #[setter]
    fn set_prefer_encryption(&mut self, v: bool) {
        self.inner.prefer_encryption = v;
    }

    #[pyo3(signature = (path, sidecar = None))]
    fn ingest_csv<'py>(
        &mut self,
        py: Python<'py>,
        path: PathBuf,
        sidecar: Option<PathBuf>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let m = self
            .inner
            .store
            .ingest_csv(&path, sidecar.as_deref())
            .map_err(err)?;
        metadata_dict(py, &m)
    }

    /// Registers CSV text under a dataset file name.
    fn ingest_text<'py>(
        &mut self,
        py: Python<'py>,
        name: &str,
        csv: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let m = self
            .inner
            .store
            .ingest_reader(name, csv.as_bytes(), None)
            .map_err(err)?;
        metadata_dict(py, &m)
    }

    fn ingest_dir(&mut self, dir: PathBuf) -> PyResult<Vec<String>> {
        let metas = self.inner.ingest_dir(&dir).map_err(err)?;
        Ok(metas.into_iter().map(|m| m.dataset_id).collect())
    }

    fn metadata<'py>(&self, py: Python<'py>, dataset_id: &str) -> PyResult<Bound<'py, PyDict>> {
        let m = self
            .inner
            .store
            .metadata(dataset_id)
            .ok_or_else(|| err(format!("unknown dataset {dataset_id}")))?;
        metadata_dict(py, m)
    }

    fn evaluate(
        &self,
        email: &str,
        purpose: &str,
        attributes: Vec<String>,
        source_file: &str,
    ) -> PyResult<Evaluation> {
        let request = AccessRequest::new(email, purpose, attributes, source_file).map_err(|e| {
            stage_err(CoreStageError {
                stage: engine::Stage::Interpret,
                source: e,
            })
        })?;
        self.run(&request)
    }

    /// Evaluates a `Key: value` request block.
    fn evaluate_text(&self, text: &str) -> PyResult<Evaluation> {
        let request = AccessRequest::parse_block(text).map_err(|e| {
            stage_err(CoreStageError {
                stage: engine::Stage::Interpret,
                source: e,
            })
        })?;
        self.run(&request)
    }

    /// "PASS" or "diverged at row R, column C".
    fn verify(&self, evaluation: &Evaluation) -> PyResult<String> {
        let id = &evaluation.inner.data_profile.dataset_id;
        let meta = self
            .inner
            .store
            .metadata(id)
            .ok_or_else(|| err(format!("unknown dataset {id}")))?;
        Ok(evaluation.inner.verify(meta).to_string())
    }

    /// Trust level for an email and purpose without touching any dataset.
    fn trust_for(&self, email: &str, purpose: &str) -> &'static str {
        let (purpose, _) = self.inner.interpreter.purpose_class(purpose);
        let email = self.inner.interpreter.email_class(email);
        self.inner
            .trust
            .score(TrustFeatures { email, purpose })
            .as_str()
    }

    fn use_cluster_model(&mut self, model: &ClusterModel) {
        self.inner.cluster_model = Some(model.inner.clone());
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

impl Engine {
    fn run(&self, request: &AccessRequest) -> PyResult<Evaluation> {
        let inner = self.inner.evaluate(request).map_err(stage_err)?;
        Ok(Evaluation { inner })
    }
}

/// Clustering model over dataset descriptions.
#[pyclass(frozen)]
struct ClusterModel {
    inner: CoreClusterModel,
}

#[pymethods]
impl ClusterModel {
    /// Built over `(id, text, label)` triples; label may be None.
    #[new]
    #[pyo3(signature = (docs, k = 10, seed = 7))]
    fn new(docs: Vec<(String, String, Option<String>)>, k: usize, seed: u64) -> PyResult<Self> {
        let docs: Vec<CorpusDoc> = docs
            .into_iter()
            .map(|(id, text, label)| CorpusDoc { id, text, label })
            .collect();
        let params = ClusterParams {
            k,
            seed,
            ..ClusterParams::default()
        };
        Ok(ClusterModel {
            inner: CoreClusterModel::build(&docs, &params).map_err(err)?,
        })
    }

    /// Built over the shipped synthetic ten-domain corpus.
    #[staticmethod]
    #[pyo3(signature = (seed = 1))]
    fn synthetic(seed: u64) -> PyResult<Self> {
        let docs: Vec<CorpusDoc> = synthetic_corpus(&CorpusParams::default(), seed)
            .iter()
            .map(CorpusDoc::from)
            .collect();
        Ok(ClusterModel {
            inner: CoreClusterModel::build(&docs, &ClusterParams::default()).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(ClusterModel {
            inner: CoreClusterModel::load(&path).map_err(err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(err)
    }

    /// `(label, canonical domain, confidence)`.
    fn identify(&self, text: &str) -> PyResult<(String, String, f64)> {
        let m = self.inner.identify_domain(text).map_err(err)?;
        Ok((m.label.clone(), m.domain().to_string(), m.confidence))
    }
}

#[pyfunction]
fn mask_value(value: &str, fraction: f64) -> PyResult<String> {
    anonymize::mask_value(value, fraction).map_err(err)
}

#[pyfunction]
fn pseudonymize(value: &str, key: &str) -> String {
    anonymize::pseudonymize(value, key.as_bytes())
}

#[pyfunction]
fn encrypt(value: &str, key: &str) -> String {
    anonymize::encrypt(value, key.as_bytes())
}

#[pyfunction]
fn decrypt(token: &str, key: &str) -> PyResult<String> {
    anonymize::decrypt(token, key.as_bytes()).map_err(err)
}

/// Rule-based trust from email class ("personal", "organizational") and
/// purpose class ("external", "self", "organizational").
#[pyfunction]
fn oracle_trust(email_class: &str, purpose_class: &str) -> PyResult<&'static str> {
    use privgov_core::model::{EmailClass, PurposeClass};
    let email = match email_class.to_ascii_lowercase().as_str() {
        "personal" => EmailClass::Personal,
        "organizational" | "organisational" => EmailClass::Organizational,
        other => return Err(err(format!("unknown email class {other:?}"))),
    };
    let purpose = match purpose_class.to_ascii_lowercase().as_str() {
        "external" => PurposeClass::ExternalUse,
        "self" => PurposeClass::SelfUse,
        "organizational" | "organisational" => PurposeClass::OrganizationalUse,
        other => return Err(err(format!("unknown purpose class {other:?}"))),
    };
    Ok(core_oracle(TrustFeatures { email, purpose }).as_str())
}

/// Shipped policy lookup: `(strategy, identifier, quasi_identifier, sensitive_value)`.
#[pyfunction]
fn select_strategy(trust: &str, sensitivity: &str) -> PyResult<(String, String, String, String)> {
    let t: TrustLevel = trust.parse().map_err(err)?;
    let s: SensitivityLevel = sensitivity.parse().map_err(err)?;
    let st = core_select(&Default::default(), t, s);
    Ok((
        st.name,
        st.actions.identifier.to_string(),
        st.actions.quasi_identifier.to_string(),
        st.actions.sensitive_value.to_string(),
    ))
}

/// Writes the synthetic finance dataset and sidecar into `dir`.
#[pyfunction]
#[pyo3(signature = (dir, rows = 100, seed = 1))]
fn write_synthetic_finance(dir: PathBuf, rows: usize, seed: u64) -> PyResult<PathBuf> {
    std::fs::create_dir_all(&dir).map_err(err)?;
    synth::finance_dataset(rows, seed)
        .write_to(&dir)
        .map_err(err)
}

#[pymodule]
fn privgov(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PrivgovError", m.py().get_type::<PrivgovError>())?;
    m.add("StageError", m.py().get_type::<StageError>())?;
    m.add("FINANCE_REQUEST", synth::FINANCE_REQUEST)?;
    m.add_class::<Engine>()?;
    m.add_class::<Evaluation>()?;
    m.add_class::<ClusterModel>()?;
    m.add_function(wrap_pyfunction!(mask_value, m)?)?;
    m.add_function(wrap_pyfunction!(pseudonymize, m)?)?;
    m.add_function(wrap_pyfunction!(encrypt, m)?)?;
    m.add_function(wrap_pyfunction!(decrypt, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_trust, m)?)?;
    m.add_function(wrap_pyfunction!(select_strategy, m)?)?;
    m.add_function(wrap_pyfunction!(write_synthetic_finance, m)?)?;
    Ok(())
}
