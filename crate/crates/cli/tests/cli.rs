use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

const REQUEST: &str = "User Request:
Email: person_1@gmail.com
Purpose: Organisational Use
Requested Attributes: annual_income, loan_status, monthly_expenditure
Source File: Finance_Banking_Adult_FinanceBanking.csv
";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_privgov"));
    c.env_remove("PRIVGOV_CONFIG");
    c
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A workspace with synthetic data, a config and the finance request.
fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = run(bin()
        .arg("synth")
        .arg(dir.path().join("data"))
        .args(["--rows", "50"]));
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::write(
        dir.path().join("privgov.toml"),
        "key = \"cli-test\"\ndata_dir = \"data\"\noutput_dir = \"out\"\n[trust]\nuse_model = false\n",
    )
    .unwrap();
    std::fs::write(dir.path().join("req.txt"), REQUEST).unwrap();
    dir
}

fn evaluate(dir: &Path, out: &str) -> Output {
    run(bin()
        .env("PRIVGOV_CONFIG", dir.join("privgov.toml"))
        .arg("evaluate")
        .arg(dir.join("req.txt"))
        .arg("--out-dir")
        .arg(dir.join(out)))
}

fn report_path(dir: &Path) -> PathBuf {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|x| x == "report"))
        .expect("report written")
}

#[test]
fn evaluate_writes_outputs_and_verifies() {
    let ws = workspace();
    let o = evaluate(ws.path(), "out");
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("trust:       Moderate"));
    assert!(text.contains("sensitivity: High"));
    assert!(text.contains("partial masking"));
    let report = report_path(&ws.path().join("out"));
    let name = report.file_name().unwrap().to_str().unwrap();
    assert!(name.starts_with("Finance_Banking_Adult_FinanceBanking.") && name.ends_with(".report"));

    let cfg = ws.path().join("privgov.toml");
    let v = run(bin().arg("--config").arg(&cfg).arg("verify").arg(&report));
    assert!(v.status.success(), "{}{}", stdout(&v), stderr(&v));
    assert!(stdout(&v).starts_with("PASS 150 cells"));

    // flip one cell of the anonymized CSV
    let csv = report.with_extension("csv");
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut lines: Vec<String> = body.lines().map(String::from).collect();
    let mut cells: Vec<String> = lines[3].split(',').map(String::from).collect();
    cells[1] = "tampered".into();
    lines[3] = cells.join(",");
    std::fs::write(&csv, lines.join("\n") + "\n").unwrap();
    let v = run(bin().arg("--config").arg(&cfg).arg("verify").arg(&report));
    assert!(!v.status.success());
    assert_eq!(
        stdout(&v).trim(),
        "FAIL diverged at row 2, column loan_status"
    );
}

#[test]
fn evaluation_is_byte_identical_across_runs() {
    let ws = workspace();
    assert!(evaluate(ws.path(), "a").status.success());
    assert!(evaluate(ws.path(), "b").status.success());
    for ext in ["csv", "report", "audit.jsonl"] {
        let a = report_path(&ws.path().join("a"));
        let name = a
            .file_name()
            .unwrap()
            .to_str()
            .unwrap()
            .replace("report", ext);
        let x = std::fs::read(ws.path().join("a").join(&name)).unwrap();
        let y = std::fs::read(ws.path().join("b").join(&name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn malformed_request_names_interpret_stage() {
    let ws = workspace();
    std::fs::write(
        ws.path().join("req.txt"),
        REQUEST.replace("person_1@gmail.com", "person_1"),
    )
    .unwrap();
    let o = evaluate(ws.path(), "out");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stage interpret"), "{}", stderr(&o));

    std::fs::write(
        ws.path().join("req.txt"),
        REQUEST.replace("loan_status", "credit_score"),
    )
    .unwrap();
    let o = evaluate(ws.path(), "out");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stage interpret") && stderr(&o).contains("credit_score"));
}

#[test]
fn unmatched_domain_takes_the_lenient_cell() {
    let ws = workspace();
    let data = ws.path().join("data");
    std::fs::write(
        data.join("Agriculture_Farmer_Crops.csv"),
        "farm_id,crop,yield\nF1,Wheat,3.5\nF2,Rice,4.0\n",
    )
    .unwrap();
    std::fs::write(
        ws.path().join("req.txt"),
        "Email: a@agri.org\nPurpose: Organisational Use\nRequested Attributes: crop, yield\nSource File: Agriculture_Farmer_Crops.csv\n",
    )
    .unwrap();
    let o = evaluate(ws.path(), "out");
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("sensitivity: Low"));
    assert!(stdout(&o).contains("strategy:    Raw (No Anonymisation)"));
    assert!(stdout(&o).contains("score:       0.0000"));
}

#[test]
fn env_config_is_used_and_flag_wins() {
    let ws = workspace();
    let o = run(bin()
        .env("PRIVGOV_CONFIG", ws.path().join("missing.toml"))
        .arg("evaluate")
        .arg(ws.path().join("req.txt")));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing.toml"));
    let o = run(bin()
        .env("PRIVGOV_CONFIG", ws.path().join("missing.toml"))
        .arg("--config")
        .arg(ws.path().join("privgov.toml"))
        .arg("evaluate")
        .arg(ws.path().join("req.txt")));
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn build_repo_curated_has_twenty_tuples() {
    let o = run(bin().args(["build-repo", "--curated"]));
    assert!(o.status.success());
    let tuples = stdout(&o)
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .count();
    assert_eq!(tuples, 20);
    let o = run(bin().arg("build-repo"));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(
        "Adult Individual;Healthcare;OnlyIf:Share:explicit consent:Sec 7(f–g);Doctors,Insurers"
    ));
}

#[test]
fn domain_scores_tables() {
    let o = run(bin().args(["domain-scores", "--synthetic", "--rows", "20"]));
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 10);
    for r in rows {
        let mean: f64 = r.split_whitespace().last().unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&mean));
    }

    let ws = workspace();
    let cfg = ws.path().join("privgov.toml");
    std::fs::write(
        ws.path().join("one.txt"),
        format!("{REQUEST}---\n{REQUEST}"),
    )
    .unwrap();
    let o = run(bin()
        .arg("--config")
        .arg(&cfg)
        .args(["domain-scores", "--batch"])
        .arg(ws.path().join("one.txt")));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
    assert!(stdout(&o).contains("Finance"));

    std::fs::write(ws.path().join("empty.txt"), "\n---\n").unwrap();
    let o = run(bin()
        .arg("--config")
        .arg(&cfg)
        .args(["domain-scores", "--batch"])
        .arg(ws.path().join("empty.txt")));
    assert!(!o.status.success());
    assert!(stderr(&o).contains("empty request batch"));
}

#[test]
fn ingest_and_cluster_report() {
    let ws = workspace();
    let o = run(bin().arg("ingest").arg(
        ws.path()
            .join("data/Finance_Banking_Adult_FinanceBanking.csv"),
    ));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("domain: Finance & Banking (Finance & Banking)"));
    assert!(stdout(&o).contains("owner:  Adult Individual"));

    let model = ws.path().join("clusters.json");
    let o = run(bin()
        .args(["cluster", "--identify", "loan credit emi borrower", "--out"])
        .arg(&model));
    assert!(o.status.success(), "{}", stderr(&o));
    let purity: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("purity "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(purity >= 0.9);
    assert!(stdout(&o).contains("identify: Finance & Banking"));
    assert!(model.exists());
}

#[test]
fn service_answers_json_requests() {
    let ws = workspace();
    let mut child = bin()
        .arg("--config")
        .arg(ws.path().join("privgov.toml"))
        .args(["serve", "--addr", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line
        .trim()
        .strip_prefix("listening on ")
        .expect("address line")
        .to_string();

    let post = |body: &str| -> String {
        let mut s = TcpStream::connect(&addr).unwrap();
        write!(
            s,
            "POST /evaluate HTTP/1.1\r\nHost: x\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        let mut resp = String::new();
        s.read_to_string(&mut resp).unwrap();
        resp
    };
    let ok = post(
        r#"{"email":"person_1@gmail.com","purpose":"Organisational Use","requested_attributes":["annual_income"],"source_file":"Finance_Banking_Adult_FinanceBanking.csv"}"#,
    );
    let bad = post(
        r#"{"email":"nobody","purpose":"x","requested_attributes":["annual_income"],"source_file":"Finance_Banking_Adult_FinanceBanking.csv"}"#,
    );
    child.kill().ok();
    child.wait().ok();
    assert!(ok.starts_with("HTTP/1.1 200"), "{ok}");
    assert!(
        ok.contains("\"trust\":\"Moderate\"") && ok.contains("\"columns\":[\"annual_income\"]")
    );
    assert!(bad.starts_with("HTTP/1.1 422"), "{bad}");
    assert!(bad.contains("\"stage\":\"interpret\""));
}
