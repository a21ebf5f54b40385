//! End-to-end evaluation of access requests.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::anonymize::{apply_strategy, TransformResult};
use crate::audit::{render_report, verify_trace, Report, TraceVerdict};
use crate::canon::Domain;
use crate::cluster::{ClusterModel, DomainMatch};
use crate::compliance::ComplianceRepository;
use crate::error::{Error, Result};
use crate::model::{AccessRequest, DataProfile, RequestProfile, Strategy, TrustLevel};
use crate::policy::{select_strategy, PolicyMatrix};
use crate::sensitivity::{
    classifier_port, ClassifierContext, SensitivityClassifier, SensitivityFinding,
};
use crate::store::{DataStore, DatasetMetadata, TableSlice};
use crate::trust::interpret::{
    parse_free_mail, parse_purpose_keywords, DEFAULT_FREE_MAIL, DEFAULT_PURPOSE_KEYWORDS,
};
use crate::trust::{
    oracle_trust, score_trust, synthesize_training_data, train_trust_model, ForestParams,
    RequestInterpreter, TrustFeatures, TrustModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Interpret,
    Trust,
    Mapper,
    Sensitivity,
    Strategy,
    Apply,
    Report,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Interpret => "interpret",
            Stage::Trust => "trust",
            Stage::Mapper => "mapper",
            Stage::Sensitivity => "sensitivity",
            Stage::Strategy => "strategy",
            Stage::Apply => "apply",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("stage {stage} failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

fn at(stage: Stage) -> impl FnOnce(Error) -> StageError {
    move |source| StageError { stage, source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrustConfig {
    /// Score with the trained forest; the rule oracle otherwise.
    pub use_model: bool,
    pub samples: usize,
    pub noise_rate: f64,
    pub data_seed: u64,
    pub folds: usize,
    pub forest: ForestParams,
}

impl Default for TrustConfig {
    fn default() -> Self {
        TrustConfig {
            use_model: true,
            samples: 600,
            noise_rate: 0.02,
            data_seed: 11,
            folds: 5,
            forest: ForestParams::default(),
        }
    }
}

/// Engine configuration. Relative paths resolve against the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Secret for pseudonyms and encryption.
    pub key: String,
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    pub policy: Option<PathBuf>,
    pub repository: Option<PathBuf>,
    pub free_mail: Option<PathBuf>,
    pub purpose_keywords: Option<PathBuf>,
    pub trust_model: Option<PathBuf>,
    pub cluster_model: Option<PathBuf>,
    /// Encrypt instead of fully masking where the policy allows it.
    pub prefer_encryption: bool,
    pub trust: TrustConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            key: "change-me".to_string(),
            data_dir: PathBuf::from("."),
            output_dir: PathBuf::from("."),
            policy: None,
            repository: None,
            free_mail: None,
            purpose_keywords: None,
            trust_model: None,
            cluster_model: None,
            prefer_encryption: false,
            trust: TrustConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn read(&self, p: &Option<PathBuf>) -> Result<Option<String>> {
        match p {
            None => Ok(None),
            Some(p) => {
                let full = self.resolve(p);
                std::fs::read_to_string(&full)
                    .map(Some)
                    .map_err(|e| Error::io(full, e))
            }
        }
    }
}

/// Where the domain used for sensitivity came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DomainSource {
    Metadata,
    Clustering(DomainMatch),
}

/// Everything one evaluation produced.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub request: AccessRequest,
    pub profile: RequestProfile,
    pub trust: TrustLevel,
    pub domain_source: DomainSource,
    pub data_profile: DataProfile,
    pub finding: SensitivityFinding,
    pub strategy: Strategy,
    pub original: TableSlice,
    pub result: TransformResult,
    pub report: Report,
}

impl Evaluation {
    pub fn verify(&self, metadata: &DatasetMetadata) -> TraceVerdict {
        verify_trace(&self.original, &self.result, metadata)
    }

    /// `<stem>.<request-id>` under `dir`.
    pub fn output_base(&self, dir: &Path) -> PathBuf {
        let stem = self.data_profile.dataset_id.trim_end_matches(".csv");
        dir.join(format!("{stem}.{}", self.report.request_id))
    }

    /// Writes the anonymized CSV, the report and the audit log; returns
    /// their paths in that order.
    pub fn write_outputs(&self, dir: &Path) -> Result<[PathBuf; 3]> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let base = self.output_base(dir);
        let with = |ext: &str| PathBuf::from(format!("{}.{ext}", base.display()));
        let (csv, report, audit) = (with("csv"), with("report"), with("audit.jsonl"));
        std::fs::write(&csv, self.result.slice.to_csv_string()).map_err(|e| Error::io(&csv, e))?;
        std::fs::write(&report, self.report.to_text()).map_err(|e| Error::io(&report, e))?;
        let mut lines = String::new();
        for e in &self.result.audit {
            lines.push_str(&e.to_line());
            lines.push('\n');
        }
        std::fs::write(&audit, lines).map_err(|e| Error::io(&audit, e))?;
        Ok([csv, report, audit])
    }
}

/// Which scorer produces trust levels.
#[derive(Debug, Clone)]
pub enum TrustScorer {
    Oracle,
    Model(TrustModel),
}

impl TrustScorer {
    pub fn score(&self, f: TrustFeatures) -> TrustLevel {
        match self {
            TrustScorer::Oracle => oracle_trust(f),
            TrustScorer::Model(m) => score_trust(m, f),
        }
    }
}

pub struct Engine {
    pub store: DataStore,
    pub repository: ComplianceRepository,
    pub policy: PolicyMatrix,
    pub interpreter: RequestInterpreter,
    pub trust: TrustScorer,
    pub cluster_model: Option<ClusterModel>,
    pub prefer_encryption: bool,
    pub classifier: Option<Box<dyn SensitivityClassifier>>,
    key: Vec<u8>,
}

impl fmt::Debug for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Engine")
            .field("datasets", &self.store.len())
            .field("tuples", &self.repository.len())
            .field("has_cluster_model", &self.cluster_model.is_some())
            .finish_non_exhaustive()
    }
}

impl Engine {
    /// Shipped repository and policy, oracle trust, no cluster model.
    pub fn new(key: impl Into<Vec<u8>>) -> Self {
        Engine {
            store: DataStore::new(),
            repository: ComplianceRepository::shipped(),
            policy: PolicyMatrix::default_matrix(),
            interpreter: RequestInterpreter::default(),
            trust: TrustScorer::Oracle,
            cluster_model: None,
            prefer_encryption: false,
            classifier: None,
            key: key.into(),
        }
    }

    /// Builds an engine from configuration. The trust model is loaded when a
    /// path is configured and present, trained otherwise.
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let mut engine = Engine::new(cfg.key.as_bytes().to_vec());
        if let Some(p) = &cfg.policy {
            engine.policy = PolicyMatrix::load(&cfg.resolve(p))?;
        }
        if let Some(p) = &cfg.repository {
            engine.repository = ComplianceRepository::load(&cfg.resolve(p))?;
        }
        let free_mail = match cfg.read(&cfg.free_mail)? {
            Some(t) => parse_free_mail(&t),
            None => DEFAULT_FREE_MAIL.iter().map(|s| s.to_string()).collect(),
        };
        let purposes = match cfg.read(&cfg.purpose_keywords)? {
            Some(t) => parse_purpose_keywords(&t)?,
            None => DEFAULT_PURPOSE_KEYWORDS
                .iter()
                .map(|(k, c)| (k.to_string(), *c))
                .collect(),
        };
        engine.interpreter = RequestInterpreter::new(free_mail, purposes);
        if cfg.trust.use_model {
            let stored = cfg
                .trust_model
                .as_ref()
                .map(|p| cfg.resolve(p))
                .filter(|p| p.exists());
            let model = match stored {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                    TrustModel::from_json(&text)?
                }
                None => train_configured(&cfg.trust)?,
            };
            engine.trust = TrustScorer::Model(model);
        }
        if let Some(p) = &cfg.cluster_model {
            let p = cfg.resolve(p);
            if p.exists() {
                engine.cluster_model = Some(ClusterModel::load(&p)?);
            }
        }
        engine.prefer_encryption = cfg.prefer_encryption;
        Ok(engine)
    }

    pub fn key(&self) -> &[u8] {
        &self.key
    }

    /// Ingests every `*.csv` in `dir` (sorted by name) with sidecars found
    /// beside them.
    pub fn ingest_dir(&mut self, dir: &Path) -> Result<Vec<DatasetMetadata>> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
            .collect();
        paths.sort();
        paths
            .iter()
            .map(|p| self.store.ingest_csv(p, None))
            .collect()
    }

    fn mapped_domain(
        &self,
        metadata: &DatasetMetadata,
        slice_text: &str,
    ) -> Result<(String, DomainSource)> {
        if metadata.canonical_domain().known().is_some() {
            return Ok((metadata.domain.clone(), DomainSource::Metadata));
        }
        match &self.cluster_model {
            Some(model) => {
                let text = format!("{} {} {slice_text}", metadata.domain, metadata.name);
                let m = model.identify_domain(&text)?;
                let name = Domain::parse(&m.label).to_string();
                Ok((name, DomainSource::Clustering(m)))
            }
            None => Ok((metadata.domain.clone(), DomainSource::Metadata)),
        }
    }

    pub fn evaluate(&self, request: &AccessRequest) -> Result<Evaluation, StageError> {
        request.validate().map_err(at(Stage::Interpret))?;
        let metadata = self
            .store
            .metadata(&request.source_file)
            .ok_or_else(|| Error::StaleReference(request.source_file.clone()))
            .map_err(at(Stage::Interpret))?;
        let profile = self
            .interpreter
            .interpret_request(request, metadata)
            .map_err(at(Stage::Interpret))?;

        let trust = self.trust.score(TrustFeatures::of(&profile));

        let query = self
            .store
            .build_query(request, metadata)
            .map_err(at(Stage::Mapper))?;
        let original = self.store.fetch(&query).map_err(at(Stage::Mapper))?;
        let column_text = metadata
            .columns
            .iter()
            .map(|c| c.name.replace('_', " "))
            .collect::<Vec<_>>()
            .join(" ");
        let (domain, domain_source) = self
            .mapped_domain(metadata, &column_text)
            .map_err(at(Stage::Mapper))?;

        let ctx = ClassifierContext {
            repository: &self.repository,
            metadata,
            domain: &domain,
            principal: &metadata.owner,
            requested_attributes: &request.requested_attributes,
        };
        let finding = classifier_port(self.classifier.as_deref(), &ctx);

        let mut strategy = select_strategy(&self.policy, trust, finding.level);
        if self.prefer_encryption {
            strategy = strategy.with_encryption();
        }

        let justification = if finding.defaulted {
            finding.rationale.clone()
        } else {
            let cites = finding.citations();
            format!("{} under {}", strategy.name, cites.join(", "))
        };
        let result = apply_strategy(&original, &strategy, metadata, &self.key, &justification)
            .map_err(at(Stage::Apply))?;

        let data_profile = DataProfile {
            dataset_id: metadata.dataset_id.clone(),
            domain,
            owner: metadata.owner.clone(),
            sensitivity: finding.level,
            trust,
            matched_tuples: finding.matched.clone(),
        };
        let report = render_report(request, &data_profile, &finding, &strategy, &result);
        Ok(Evaluation {
            request: request.clone(),
            profile,
            trust,
            domain_source,
            data_profile,
            finding,
            strategy,
            original,
            result,
            report,
        })
    }
}

pub fn train_configured(cfg: &TrustConfig) -> Result<TrustModel> {
    let rows = synthesize_training_data(cfg.samples, cfg.noise_rate, cfg.data_seed)?;
    train_trust_model(&rows, &cfg.forest, cfg.folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainScore {
    pub domain: String,
    pub requests: usize,
    pub mean_score: f64,
}

/// Mean Anonymisation Score per domain, in domain-name order.
pub fn domain_scores<'a>(
    evaluations: impl IntoIterator<Item = &'a Evaluation>,
) -> Result<Vec<DomainScore>> {
    let mut acc: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    for e in evaluations {
        let name = Domain::parse(&e.data_profile.domain)
            .short_name()
            .to_string();
        let slot = acc.entry(name).or_default();
        slot.0 += 1;
        slot.1 += e.result.score;
    }
    if acc.is_empty() {
        return Err(Error::InvalidRequest("empty request batch".into()));
    }
    Ok(acc
        .into_iter()
        .map(|(domain, (n, sum))| DomainScore {
            domain,
            requests: n,
            mean_score: sum / n as f64,
        })
        .collect())
}

pub fn format_domain_scores(rows: &[DomainScore]) -> String {
    let width = rows
        .iter()
        .map(|r| r.domain.len())
        .max()
        .unwrap_or(6)
        .max(6);
    let mut out = format!(
        "{:<width$}  {:>8}  {:>10}\n",
        "Domain", "Requests", "Mean score"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>10.2}\n",
            r.domain, r.requests, r.mean_score
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SensitivityLevel;
    use crate::synth::{finance_dataset, FINANCE_REQUEST};

    fn finance_engine() -> Engine {
        let mut engine = Engine::new(b"test-key".to_vec());
        finance_dataset(200, 3).ingest(&mut engine.store).unwrap();
        engine
    }

    #[test]
    fn finance_request_end_to_end() {
        let engine = finance_engine();
        let req = AccessRequest::parse_block(FINANCE_REQUEST).unwrap();
        let ev = engine.evaluate(&req).unwrap();
        assert_eq!(ev.trust, TrustLevel::Moderate);
        assert_eq!(ev.finding.level, SensitivityLevel::High);
        assert_eq!(ev.strategy.name, "PartialMask");
        assert_eq!(ev.domain_source, DomainSource::Metadata);
        assert!(
            (0.4..=0.6).contains(&ev.result.score),
            "{}",
            ev.result.score
        );
        let meta = engine.store.metadata(&req.source_file).unwrap();
        assert!(ev.verify(meta).is_pass());
    }

    #[test]
    fn bad_email_fails_at_interpret() {
        let engine = finance_engine();
        let mut req = AccessRequest::parse_block(FINANCE_REQUEST).unwrap();
        req.email = "nobody".into();
        assert_eq!(engine.evaluate(&req).unwrap_err().stage, Stage::Interpret);
        let mut req = AccessRequest::parse_block(FINANCE_REQUEST).unwrap();
        req.requested_attributes = vec!["salary".into()];
        assert_eq!(engine.evaluate(&req).unwrap_err().stage, Stage::Interpret);
    }

    #[test]
    fn outputs_are_named_after_dataset_and_request() {
        let engine = finance_engine();
        let ev = engine
            .evaluate(&AccessRequest::parse_block(FINANCE_REQUEST).unwrap())
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let [csv, report, audit] = ev.write_outputs(dir.path()).unwrap();
        let id = ev.request.request_id();
        assert_eq!(
            report.file_name().unwrap().to_str().unwrap(),
            format!("Finance_Banking_Adult_FinanceBanking.{id}.report")
        );
        assert!(csv.exists() && audit.exists());
        let text = std::fs::read_to_string(report).unwrap();
        assert!(Report::from_text(&text).unwrap() == ev.report);
    }

    #[test]
    fn config_round_trips_and_rejects_unknown_keys() {
        let cfg = Config {
            policy: Some("policy.txt".into()),
            ..Config::default()
        };
        let back = Config::parse(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert!(Config::parse("colour = 1").is_err());
        let partial = Config::parse("key = \"k\"\n[trust]\nuse_model = false\n").unwrap();
        assert!(!partial.trust.use_model);
        assert_eq!(partial.trust.samples, 600);
    }

    #[test]
    fn empty_batch_is_an_error() {
        assert!(domain_scores(std::iter::empty()).is_err());
    }
}
