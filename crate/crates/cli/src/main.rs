use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use privgov_core::audit::{load_result, verify_trace, Report, TraceVerdict};
use privgov_core::canon::KnownDomain;
use privgov_core::cluster::{
    purity, synthetic_corpus, ClusterModel, ClusterParams, CorpusDoc, CorpusParams,
};
use privgov_core::compliance::{CompliancePipeline, ComplianceRepository, DPDP_EXCERPT};
use privgov_core::engine::{domain_scores, format_domain_scores, train_configured, Config, Engine};
use privgov_core::model::AccessRequest;
use privgov_core::store::{DataStore, DatasetMetadata};
use privgov_core::synth;

mod service;

#[derive(Parser)]
#[command(
    name = "privgov",
    version,
    about = "Trust- and sensitivity-aware data access governance"
)]
struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true, env = "PRIVGOV_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load CSV datasets and print their metadata.
    Ingest {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Sidecar for a single dataset.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// Write the metadata repository as JSON.
        #[arg(long)]
        metadata_out: Option<PathBuf>,
    },
    /// Extract compliance tuples from regulation text.
    BuildRepo {
        /// Regulation text; the bundled excerpt when omitted.
        #[arg(long)]
        source: Option<PathBuf>,
        /// Emit the curated repository instead of running extraction.
        #[arg(long)]
        curated: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the domain cluster model.
    Cluster {
        /// JSON-lines corpus of {id, text, label}; a synthetic corpus otherwise.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Texts to identify against the new model.
        #[arg(long)]
        identify: Vec<String>,
    },
    /// Train the trust model and save it.
    TrainTrust {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a request file end to end.
    Evaluate {
        request: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Mean Anonymisation Score per domain over a batch.
    DomainScores {
        /// Request blocks separated by `---` lines.
        #[arg(long, conflicts_with = "synthetic")]
        batch: Option<PathBuf>,
        /// Generate one dataset per domain and three requesters each.
        #[arg(long)]
        synthetic: bool,
        #[arg(long, default_value_t = 100)]
        rows: usize,
    },
    /// Replay an evaluation's audit log against its source dataset.
    Verify { report: PathBuf },
    /// Write synthetic datasets with sidecars.
    Synth {
        dir: PathBuf,
        #[arg(long, default_value_t = 200)]
        rows: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Serve `POST /evaluate` with JSON requests.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(Config::default()),
    }
}

fn engine_with_data(cfg: &Config) -> Result<Engine> {
    let mut engine = Engine::from_config(cfg)?;
    let dir = cfg.resolve(&cfg.data_dir);
    engine
        .ingest_dir(&dir)
        .with_context(|| format!("ingesting datasets from {}", dir.display()))?;
    Ok(engine)
}

fn print_metadata(m: &DatasetMetadata) {
    println!("{}", m.dataset_id);
    println!("  domain: {} ({})", m.domain, m.canonical_domain());
    println!("  owner:  {} ({})", m.owner, m.principal());
    for c in &m.columns {
        println!("  - {} [{} / {}]", c.name, c.kind, c.class);
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_ingest(
    paths: &[PathBuf],
    sidecar: Option<&Path>,
    metadata_out: Option<&Path>,
) -> Result<()> {
    if sidecar.is_some() && paths.len() != 1 {
        bail!("--sidecar applies to exactly one dataset");
    }
    let mut store = DataStore::new();
    for p in paths {
        let m = store.ingest_csv(p, sidecar)?;
        print_metadata(&m);
    }
    if let Some(out) = metadata_out {
        write_or_print(Some(out), &store.metadata_repository().to_json())?;
    }
    Ok(())
}

fn cmd_build_repo(source: Option<&Path>, curated: bool, out: Option<&Path>) -> Result<()> {
    if curated {
        let repo = ComplianceRepository::shipped();
        eprintln!("{} curated tuples", repo.len());
        return write_or_print(out, &repo.to_text());
    }
    let bytes = match source {
        Some(p) => std::fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        None => DPDP_EXCERPT.as_bytes().to_vec(),
    };
    let output = CompliancePipeline::default().run(&bytes)?;
    eprintln!(
        "{} sections, {} tuples, {} curation notes, {} rules for review",
        output.sections.len(),
        output.repository.len(),
        output.curation.len(),
        output.review.len()
    );
    for c in &output.curation {
        eprintln!("  curation: {c:?}");
    }
    write_or_print(out, &output.repository.to_text())
}

fn cmd_cluster(
    corpus: Option<&Path>,
    seed: u64,
    k: usize,
    out: Option<&Path>,
    identify: &[String],
) -> Result<()> {
    let docs: Vec<CorpusDoc> = match corpus {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).context("corpus line"))
            .collect::<Result<_>>()?,
        None => synthetic_corpus(&CorpusParams::default(), seed)
            .iter()
            .map(CorpusDoc::from)
            .collect(),
    };
    let params = ClusterParams {
        k,
        seed,
        ..ClusterParams::default()
    };
    let model = ClusterModel::build(&docs, &params)?;
    for c in 0..model.k {
        let size = model.assignments.values().filter(|&&a| a == c).count();
        let words = model
            .topics
            .as_ref()
            .and_then(|t| t.get(c))
            .map(|t| t.top_words(0, 5).join(" "))
            .unwrap_or_default();
        println!(
            "cluster {c:>2}  {:<12} {size:>3} docs  {words}",
            model.labels[c]
        );
    }
    if docs.iter().all(|d| d.label.is_some()) {
        let assign: Vec<usize> = docs.iter().map(|d| model.assignments[&d.id]).collect();
        let truth: Vec<&str> = docs
            .iter()
            .map(|d| d.label.as_deref().unwrap_or_default())
            .collect();
        println!("purity {:.4}", purity(&assign, &truth, model.k));
    }
    for text in identify {
        let m = model.identify_domain(text)?;
        println!(
            "identify: {} (cluster {}, confidence {:.4}{})",
            m.domain(),
            m.cluster,
            m.confidence,
            if m.low_confidence {
                ", low confidence"
            } else {
                ""
            }
        );
    }
    if let Some(out) = out {
        model.save(out)?;
    }
    Ok(())
}

fn cmd_train_trust(cfg: &Config, out: Option<&Path>) -> Result<()> {
    let model = train_configured(&cfg.trust)?;
    println!(
        "folds {:?} mean accuracy {:.4}",
        model
            .fold_accuracies
            .iter()
            .map(|a| format!("{a:.4}"))
            .collect::<Vec<_>>(),
        model.mean_accuracy
    );
    let target = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.trust_model.as_ref().map(|p| cfg.resolve(p)));
    if let Some(p) = target {
        std::fs::write(&p, model.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

/// Exit status 2 with the failing stage named on stderr.
fn cmd_evaluate(cfg: &Config, request: &Path, out_dir: Option<&Path>) -> Result<ExitCode> {
    let text = std::fs::read_to_string(request)
        .with_context(|| format!("reading {}", request.display()))?;
    let req = match AccessRequest::parse_block(&text) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: stage interpret: {e}");
            return Ok(ExitCode::from(2));
        }
    };
    let engine = engine_with_data(cfg)?;
    let ev = match engine.evaluate(&req) {
        Ok(ev) => ev,
        Err(e) => {
            eprintln!("error: stage {}: {}", e.stage, e.source);
            return Ok(ExitCode::from(2));
        }
    };
    let dir = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.resolve(&cfg.output_dir));
    let paths = ev.write_outputs(&dir)?;
    println!("trust:       {}", ev.trust);
    println!("sensitivity: {}", ev.finding.level);
    println!(
        "strategy:    {} ({})",
        ev.strategy.name,
        ev.strategy.technique()
    );
    println!("score:       {:.4}", ev.result.score);
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn split_batch(text: &str) -> Result<Vec<AccessRequest>> {
    let mut out = Vec::new();
    let mut block = String::new();
    for line in text.lines().chain(std::iter::once("---")) {
        if line.trim() == "---" {
            if !block.trim().is_empty() {
                out.push(
                    AccessRequest::parse_block(&block)
                        .with_context(|| format!("request {}", out.len() + 1))?,
                );
            }
            block.clear();
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    Ok(out)
}

fn cmd_domain_scores(
    cfg: &Config,
    batch: Option<&Path>,
    synthetic: bool,
    rows: usize,
) -> Result<()> {
    let (engine, requests) = if synthetic {
        let mut engine = Engine::from_config(cfg)?;
        let mut requests = Vec::new();
        for (i, d) in KnownDomain::ALL.into_iter().enumerate() {
            let ds = synth::domain_dataset(d, rows, i as u64 + 1);
            ds.ingest(&mut engine.store)?;
            requests.extend(synth::batch_requests(&ds));
        }
        (engine, requests)
    } else {
        let Some(path) = batch else {
            bail!("give --batch FILE or --synthetic");
        };
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        (engine_with_data(cfg)?, split_batch(&text)?)
    };
    let evaluations = requests
        .iter()
        .map(|r| {
            engine
                .evaluate(r)
                .map_err(|e| anyhow::anyhow!("{} ({}): {e}", r.source_file, r.email))
        })
        .collect::<Result<Vec<_>>>()?;
    print!("{}", format_domain_scores(&domain_scores(&evaluations)?));
    Ok(())
}

fn cmd_verify(cfg: &Config, report_path: &Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(report_path)
        .with_context(|| format!("reading {}", report_path.display()))?;
    let report = Report::from_text(&text)?;
    let base = report_path
        .to_str()
        .and_then(|s| s.strip_suffix(".report"))
        .context("report path must end in .report")?;
    let read = |ext: &str| {
        let p = format!("{base}.{ext}");
        std::fs::read_to_string(&p).with_context(|| format!("reading {p}"))
    };
    let result = load_result(&read("csv")?, &read("audit.jsonl")?, report.score)?;
    let engine = engine_with_data(cfg)?;
    let metadata = engine
        .store
        .metadata(&report.dataset)
        .with_context(|| format!("dataset {} not found in the data directory", report.dataset))?;
    let req = AccessRequest::new(
        report.requester.clone(),
        report.purpose.clone(),
        result.slice.columns.clone(),
        report.dataset.clone(),
    )?;
    let original = engine
        .store
        .fetch(&engine.store.build_query(&req, metadata)?)?;
    match verify_trace(&original, &result, metadata) {
        TraceVerdict::Pass => {
            println!(
                "PASS {} cells, score {:.4}",
                result.audit.len(),
                result.score
            );
            Ok(ExitCode::SUCCESS)
        }
        v => {
            println!("FAIL {v}");
            Ok(ExitCode::FAILURE)
        }
    }
}

fn cmd_synth(dir: &Path, rows: usize, seed: u64) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut sets = vec![synth::finance_dataset(rows, seed)];
    for (i, d) in KnownDomain::ALL.into_iter().enumerate() {
        if d != KnownDomain::Finance {
            sets.push(synth::domain_dataset(
                d,
                rows,
                seed.wrapping_add(i as u64 + 1),
            ));
        }
    }
    for ds in sets {
        println!("wrote {}", ds.write_to(dir)?.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = || load_config(cli.config.as_deref());
    match &cli.command {
        Command::Ingest {
            paths,
            sidecar,
            metadata_out,
        } => cmd_ingest(paths, sidecar.as_deref(), metadata_out.as_deref())?,
        Command::BuildRepo {
            source,
            curated,
            out,
        } => cmd_build_repo(source.as_deref(), *curated, out.as_deref())?,
        Command::Cluster {
            corpus,
            seed,
            k,
            out,
            identify,
        } => cmd_cluster(corpus.as_deref(), *seed, *k, out.as_deref(), identify)?,
        Command::TrainTrust { out } => cmd_train_trust(&cfg()?, out.as_deref())?,
        Command::Evaluate { request, out_dir } => {
            return cmd_evaluate(&cfg()?, request, out_dir.as_deref())
        }
        Command::DomainScores {
            batch,
            synthetic,
            rows,
        } => cmd_domain_scores(&cfg()?, batch.as_deref(), *synthetic, *rows)?,
        Command::Verify { report } => return cmd_verify(&cfg()?, report),
        Command::Synth { dir, rows, seed } => cmd_synth(dir, *rows, *seed)?,
        Command::Serve { addr } => service::serve(engine_with_data(&cfg()?)?, addr)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
