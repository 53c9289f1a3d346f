use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Mutex;

use rfp::io::{csv, read_features, rfpf, RunManifest};
use rfp::Matrix;
use tempfile::TempDir;

fn rfp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rfp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn graph_file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TRIANGLE: &str = "0 1\n1 2\n0 2\n";
const K4: &str = "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";
const C4: &str = "0 1\n1 2\n2 3\n3 0\n";

fn value<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

#[test]
fn pe_triangle_qr_collapses() {
    // Â of K3 is J/3, rank one, so two QR channels cannot stay independent
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "tri.txt", TRIANGLE);
    let out = dir.path().join("pe.rfpf");
    let o = rfp(&["pe", "--graph", s(&g), "--k", "2", "--steps", "3", "--norm", "qr", "--seed", "7", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!out.exists());
}

#[test]
fn pe_three_nodes_shape_and_repeatability() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "p3.txt", "0 1\n1 2\n");
    let out = dir.path().join("pe.rfpf");
    let args = [
        "pe", "--graph", s(&g), "--operator", "adj-norm", "--k", "2", "--steps", "3", "--norm", "qr", "--seed",
        "7", "--out", s(&out),
    ];
    assert_eq!(rfp(&args).status.code(), Some(0));
    let first = std::fs::read(&out).unwrap();
    let block = rfpf::decode(&first).unwrap();
    assert_eq!((block.rows(), block.cols()), (3, 8));

    assert_eq!(rfp(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn pe_rejects_k_above_node_count() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "tri.txt", TRIANGLE);
    let out = dir.path().join("pe.rfpf");
    let o = rfp(&["pe", "--graph", s(&g), "--k", "5", "--steps", "2", "--norm", "qr", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    assert!(!out.exists());
}

#[test]
fn pe_error_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("pe.rfpf");
    let missing = dir.path().join("missing.txt");
    let o = rfp(&["pe", "--graph", s(&missing), "--k", "1", "--steps", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));

    let bad = graph_file(&dir, "bad.txt", "0 1\n1 x\n");
    let o = rfp(&["pe", "--graph", s(&bad), "--k", "1", "--steps", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let o = rfp(&["pe", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));

    // unnormalized raw adjacency of K4 grows like 3^p and overflows
    let k4 = graph_file(&dir, "k4.txt", K4);
    let o = rfp(&[
        "pe", "--graph", s(&k4), "--operator", "adj-raw", "--k", "1", "--steps", "700", "--norm", "none", "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn pe_csv_output_and_input_features() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "c4.txt", C4);
    let f_in = Matrix::from_rows(&[vec![1.0, -2.0], vec![0.5, 0.0], vec![3.25, 1e-3], vec![-7.0, 2.0]]).unwrap();
    let f_csv = graph_file(&dir, "f.csv", &csv::encode(&f_in));
    let f_bin = dir.path().join("f.rfpf");
    std::fs::write(&f_bin, rfpf::encode(&f_in)).unwrap();

    let mut outputs = Vec::new();
    for (features, format) in [(&f_csv, "csv"), (&f_bin, "rfpf")] {
        let out = dir.path().join(format!("pe.{format}"));
        let o = rfp(&[
            "pe", "--graph", s(&g), "--k", "1", "--steps", "2", "--trajectories", "2", "--features",
            s(features), "--format", format, "--out", s(&out),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let block = read_features(&out).unwrap();
        assert_eq!((block.rows(), block.cols()), (4, 2 + 2 * 3));
        assert_eq!(block.column_range(0, 2), f_in);
        outputs.push(block);
    }
    assert_eq!(outputs[0], outputs[1]);

    let wrong_rows = graph_file(&dir, "short.csv", "node,c0\n0,1.0\n");
    let out = dir.path().join("x.rfpf");
    let o = rfp(&["pe", "--graph", s(&g), "--k", "1", "--steps", "1", "--features", s(&wrong_rows), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn manifest_reproduces_run() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "tri.txt", TRIANGLE);
    let out = dir.path().join("pe.rfpf");
    let o = rfp(&[
        "pe", "--graph", s(&g), "--operator", "lap-norm", "--k", "2", "--steps", "4", "--norm", "l2", "--norm-every",
        "2", "--dist", "rademacher", "--trajectories", "3", "--seed", "19", "--out", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("pe.rfpf.manifest")).unwrap();
    let manifest = RunManifest::parse(&text).unwrap();
    assert_eq!(manifest.config.seed, 19);
    assert_eq!(manifest.config.norm_every, 2);

    let rerun = dir.path().join("rerun.rfpf");
    let args = manifest.pe_args(s(&rerun));
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_eq!(rfp(&args).status.code(), Some(0));
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&rerun).unwrap());
}

#[test]
fn eigcheck_reports_and_certifies() {
    let dir = TempDir::new().unwrap();
    // path on three nodes: Â is nonsingular, so k = n reaches the full space
    let p3 = graph_file(&dir, "p3.txt", "0 1\n1 2\n");
    let o = rfp(&["eigcheck", "--graph", s(&p3), "--k", "3", "--steps", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("p\tmax_angle\tresidual\n"));
    assert_eq!(text.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count(), 20);
    assert_eq!(value(&text, "converged_at"), Some("1"));
    assert_eq!(value(&text, "degenerate"), Some("false"));
    assert_eq!(value(&text, "oracle_gap"), Some("0.0"));
}

#[test]
fn eigcheck_single_edge_full_space_is_rank_deficient() {
    let dir = TempDir::new().unwrap();
    let edge = graph_file(&dir, "edge.txt", "0 1\n");
    let o = rfp(&["eigcheck", "--graph", s(&edge), "--k", "2", "--steps", "20"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rank"));
}

#[test]
fn eigcheck_flags_degenerate_spectrum() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "tri.txt", TRIANGLE);
    let o = rfp(&["eigcheck", "--graph", s(&g), "--operator", "lap-norm", "--k", "2", "--steps", "5"]);
    let text = stdout(&o);
    assert_eq!(value(&text, "degenerate"), Some("true"));
    assert_eq!(value(&text, "certified"), Some("false"));
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn eigcheck_too_few_steps() {
    let dir = TempDir::new().unwrap();
    let path: String = (0..29).map(|i| format!("{i} {}\n", i + 1)).collect();
    let g = graph_file(&dir, "path.txt", &path);
    let o = rfp(&["eigcheck", "--graph", s(&g), "--k", "1", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(5));
    assert_eq!(value(&stdout(&o), "converged_at"), Some("none"));
}

#[test]
fn eigcheck_oracle_cap() {
    let dir = TempDir::new().unwrap();
    let g = graph_file(&dir, "big.txt", "n 2049\n0 1\n");
    let o = rfp(&["eigcheck", "--graph", s(&g), "--k", "1", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn count_exact_examples() {
    let dir = TempDir::new().unwrap();
    let k4 = graph_file(&dir, "k4.txt", K4);
    let c4 = graph_file(&dir, "c4.txt", C4);
    let o = rfp(&["count", "--graph", s(&k4), "--what", "triangles", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value(&stdout(&o), "exact"), Some("4"));
    let o = rfp(&["count", "--graph", s(&c4), "--what", "quadrangles", "--mode", "exact"]);
    assert_eq!(value(&stdout(&o), "exact"), Some("1"));
    let o = rfp(&["count", "--graph", s(&c4), "--what", "walks", "--walk-length", "3", "--mode", "exact"]);
    assert_eq!(value(&stdout(&o), "exact"), Some("0"));
    let o = rfp(&["count", "--graph", s(&c4), "--what", "walks", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn count_guaranteed_modes() {
    let dir = TempDir::new().unwrap();
    let k4 = graph_file(&dir, "k4.txt", K4);
    let o = rfp(&["count", "--graph", s(&k4), "--what", "triangles", "--mode", "guaranteed", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(value(&text, "rank"), Some("4"));
    let rho: f64 = value(&text, "rho").unwrap().parse().unwrap();
    assert!((rho - 1.25).abs() < 1e-12);
    // ⌈6 · 4 · 1.5625 · ln 80⌉
    assert_eq!(value(&text, "m_required"), Some("165"));
    assert_eq!(value(&text, "m_used"), Some("165"));
    let estimate: f64 = value(&text, "estimate").unwrap().parse().unwrap();
    assert!((estimate - 4.0).abs() <= 2.0);

    let c4 = graph_file(&dir, "c4.txt", C4);
    let o = rfp(&["count", "--graph", s(&c4), "--what", "triangles", "--mode", "guaranteed"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(value(&stdout(&o), "warning").is_some());
    assert_eq!(value(&stdout(&o), "m_required"), Some("none"));

    let o = rfp(&["count", "--graph", s(&c4), "--what", "quadrangles", "--mode", "guaranteed"]);
    assert_eq!(o.status.code(), Some(2));

    let big = graph_file(&dir, "big.txt", "n 3000\n0 1\n1 2\n0 2\n");
    let o = rfp(&["count", "--graph", s(&big), "--what", "triangles", "--mode", "guaranteed"]);
    assert_eq!(o.status.code(), Some(6));
}

#[test]
fn count_estimates_are_seeded() {
    let dir = TempDir::new().unwrap();
    let k4 = graph_file(&dir, "k4.txt", K4);
    let run = |seed: &str| {
        stdout(&rfp(&[
            "count", "--graph", s(&k4), "--what", "quadrangles", "--mode", "estimate", "--samples", "4000", "--seed",
            seed,
        ]))
    };
    assert_eq!(run("5"), run("5"));
    let estimate: f64 = value(&run("5"), "estimate").unwrap().parse().unwrap();
    // K4 has three 4-cycles
    assert!((estimate - 3.0).abs() < 1.0, "{estimate}");
}

// timing tests run one at a time
static TIMING: Mutex<()> = Mutex::new(());

fn bench_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit()))
        .map(|l| l.split('\t').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn bench_single_size_has_no_summary() {
    let o = rfp(&["bench", "--sizes", "256:512", "--repeats", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(bench_rows(&text).len(), 1);
    assert!(value(&text, "per_edge_ratio_max_min").is_none());
}

#[test]
fn bench_doubling_edges_roughly_doubles_time() {
    let _guard = TIMING.lock().unwrap_or_else(|e| e.into_inner());
    let o = rfp(&["bench", "--sizes", "4096:8192,8192:16384", "--k", "8", "--steps", "20", "--repeats", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let ratio: f64 = value(&text, "time_ratio_last_first").unwrap().parse().unwrap();
    assert!((1.5..=3.0).contains(&ratio), "{ratio}");
}

#[test]
fn bench_doubling_k() {
    let _guard = TIMING.lock().unwrap_or_else(|e| e.into_inner());
    let time = |k: &str| {
        let o = rfp(&["bench", "--sizes", "8192:16384", "--k", k, "--steps", "20", "--repeats", "7"]);
        bench_rows(&stdout(&o))[0][3]
    };
    let ratio = time("16") / time("8");
    assert!(ratio <= 2.5, "{ratio}");
}

#[test]
fn bench_rejects_bad_sizes() {
    assert_eq!(rfp(&["bench", "--sizes", "10:7"]).status.code(), Some(2));
    assert_eq!(rfp(&["bench", "--sizes", "nonsense"]).status.code(), Some(2));
}
