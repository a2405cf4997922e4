use std::process::{Command, Output};
use std::sync::OnceLock;

use qsynth_client::{Client, ClientError};
use qsynth_core::api::{ApproxRequest, ErrorKind, ExactSynthRequest};
use qsynth_core::experiments::{read_scaling_csv, SCALING_HEADER};
use qsynth_core::gates::{GateSequence, GateSet};

/// One server per test binary, on its own runtime thread.
fn server() -> &'static str {
    static URL: OnceLock<String> = OnceLock::new();
    URL.get_or_init(|| {
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let rt = tokio::runtime::Runtime::new().unwrap();
            rt.block_on(async {
                let addr = qsynth_server::spawn("127.0.0.1:0").await.unwrap();
                tx.send(format!("http://{addr}")).unwrap();
                std::future::pending::<()>().await;
            });
        });
        rx.recv().unwrap()
    })
}

fn qsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsynth")).arg("--server").arg(server()).args(args).output().unwrap()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn synth_exact_point_writes_gseq() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.gseq");
    let o = qsynth(&["synth", "exact", "--set", "v5", "--point", "1,2,0,0", "--out", out.to_str().unwrap()]);
    let v = stdout_json(&o);
    assert_eq!(v["g_count"], 1);
    assert_eq!(v["lde"], 1);
    let word = std::fs::read_to_string(&out).unwrap();
    assert_eq!(word.trim(), v["word"].as_str().unwrap());
    // The written word evaluates back to the same channel as the point.
    let seq = GateSequence::parse_for(GateSet::CliffordV(5), word.trim()).unwrap();
    let expected = qsynth_core::su2::UnitaryChannel::new([1.0, 2.0, 0.0, 0.0]).unwrap();
    assert!(seq.evaluate_channel().diamond_distance(&expected) < 1e-12);
}

#[test]
fn synth_exact_matrix_form() {
    let v = stdout_json(&qsynth(&["synth", "exact", "--set", "t", "--entries", "1,1,1,-1", "--scale", "2"]));
    assert_eq!(v["g_count"], 0);
    assert_eq!(v["lde"], 1);
}

#[test]
fn synth_exact_rejects_non_synthesizable() {
    let o = qsynth(&["synth", "exact", "--set", "t", "--point", "1,1,1,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not exactly synthesizable"));
}

#[test]
fn synth_approx_json_shape() {
    let v = stdout_json(&qsynth(&["synth", "approx", "--target", "q:(1,0.2,0,0)", "--set", "t", "--eps", "0.1", "--budget", "12"]));
    assert!(v["distance"].as_f64().unwrap() <= 0.1 + 1e-14);
    assert!(v["count"].is_u64());
    assert!(v["word"].is_string());
}

#[test]
fn prob_synth_json_shape() {
    let v = stdout_json(&qsynth(&["prob-synth", "--target", "rz:0.3", "--set", "t", "--eps", "0.04", "--budget", "12"]));
    let w = v["weights"].as_array().unwrap();
    let total: f64 = w.iter().map(|p| p[1].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(v["value"].as_f64().unwrap() <= 0.04 + 1e-9);
}

#[test]
fn enumerate_writes_point_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("points.csv");
    let v = stdout_json(&qsynth(&["enumerate", "--set", "v5", "--level", "2", "--out", out.to_str().unwrap()]));
    // r4(25) = 248
    assert_eq!(v["count"], 248);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "level,alpha_a,alpha_b,beta_a,beta_b,gamma_a,gamma_b,delta_a,delta_b,n"
    );
    for l in lines {
        let f: Vec<i64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[0], 2);
        assert_eq!(f[1] * f[1] + f[3] * f[3] + f[5] * f[5] + f[7] * f[7], f[9]);
    }
}

#[test]
fn experiment_scaling_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scaling.toml");
    let csv = dir.path().join("rows.csv");
    let summary = dir.path().join("summary.json");
    std::fs::write(
        &cfg,
        format!(
            "[run]\ngate_set = \"v5\"\nbudget = 6\nseed = 3\nprob = true\n\n[targets]\nspecs = [\"haar:2\", \"edge:ones3\"]\n\n\
             [grid]\neps = [0.4, 0.3, 0.2]\n\n[output]\ncsv = {:?}\nsummary = {:?}\n",
            csv.to_str().unwrap(),
            summary.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = qsynth(&["experiment", "scaling", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.code() == Some(0) || o.status.code() == Some(1), "{:?}", o);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), SCALING_HEADER.join(","));
    let rows = read_scaling_csv(&text).unwrap();
    assert_eq!(rows.len(), 9);
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    let ids: Vec<&String> = s.as_object().unwrap().keys().collect();
    assert_eq!(ids, ["edge-ones3", "haar-0", "haar-1"]);
}

#[test]
fn experiment_covering_exit_code_tracks_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cov.toml");
    std::fs::write(&cfg, "[covering]\ngate_set = \"v5\"\nk_max = 3\nsamples = 500\nseed = 2\n").unwrap();
    let o = qsynth(&["experiment", "covering", "--config", cfg.to_str().unwrap()]);
    let v = stdout_json(&o);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn experiment_liouville_small() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("l.toml");
    std::fs::write(&cfg, "[liouville]\nn_max = 2\n").unwrap();
    let v = stdout_json(&qsynth(&["experiment", "liouville", "--config", cfg.to_str().unwrap()]));
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 2);
    assert!(comps.iter().all(|c| c["lower_ok"] == true && c["upper_ok"] == true));
}

#[test]
fn missing_config_section_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "").unwrap();
    let o = qsynth(&["experiment", "liouville", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[tokio::test]
async fn library_client_maps_errors() {
    let c = Client::new(server());
    assert_eq!(c.health().await.unwrap()["status"], "ok");
    let err = c
        .synth_approx(&ApproxRequest { target: "rz:0.3".into(), set: GateSet::CliffordT, eps: 1e-3, budget: 2 })
        .await
        .unwrap_err();
    match err {
        ClientError::Api { status, error } => {
            assert_eq!(status, 422);
            assert_eq!(error.kind, ErrorKind::Unsatisfiable);
        }
        e => panic!("unexpected {e}"),
    }
    let err = c.synth_exact(&ExactSynthRequest { set: GateSet::CliffordT, matrix: None, point: None }).await.unwrap_err();
    assert!(matches!(err, ClientError::Api { status: 400, .. }));
}
