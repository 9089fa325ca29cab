use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn posmild(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_posmild"))
        .arg("--out")
        .arg(dir)
        .arg("--quiet")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_config(dir: &Path, text: &str, verb: &str) -> Output {
    let cfg = write_config(dir, "run.toml", text);
    posmild(dir, &["--config", cfg.to_str().unwrap(), verb])
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn certify_epidemic_uses_analytic_shift() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "model = \"epidemic\"\n[epidemic]\ncells = 20\nbeta = 0.7\n[certify]\nm = 1.0\n",
        "certify",
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(dir.path().join("certification.json"));
    assert_eq!(report["certified"], true);
    assert_eq!(report["lambda_hat"], 0.7);
    assert_eq!(report["m"], 1.0);
}

#[test]
fn certify_rejects_invalid_parameters() {
    let dir = TempDir::new().unwrap();
    let out = run_config(dir.path(), "model = \"epidemic\"\n[epidemic]\nbeta = -1.0\n", "certify");
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn certify_flags_outflow_at_zero() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "model = \"polynomial\"\n[polynomial]\ncoefficients = [-0.5, 0.0, 1.0]\n[certify]\nm = 1.0\n",
        "certify",
    );
    assert_eq!(code(&out), 2);
    let report = json(dir.path().join("certification.json"));
    assert_eq!(report["certified"], false);
    assert_eq!(report["worst_violation"]["component"], 0);
}

#[test]
fn missing_or_broken_config_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&posmild(dir.path(), &["simulate"])), 1);
    assert_eq!(code(&posmild(dir.path(), &["--config", "/no/such/file.toml", "certify"])), 1);
    assert_eq!(code(&run_config(dir.path(), "model = [", "simulate")), 1);
    assert_eq!(code(&run_config(dir.path(), "model = \"unknown\"", "simulate")), 1);
    assert_eq!(code(&posmild(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&posmild(dir.path(), &["--help"])), 0);
}

#[test]
fn simulate_epidemic_writes_positive_trajectory() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "model = \"epidemic\"\n[epidemic]\ncells = 30\n[solver]\nhorizon = 5.0\n",
        "simulate",
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(header[0], "t");
    assert_eq!(header[1], "S");
    assert_eq!(header.len(), 32);
    for w in rows.windows(2) {
        assert!(w[1][0] > w[0][0]);
    }
    assert_eq!(rows.last().unwrap()[0], 5.0);
    for r in &rows {
        let norm = r[1] + r[2..].iter().sum::<f64>();
        assert!(r[1..].iter().all(|v| *v >= -1e-12 * (1.0 + norm)));
    }
    let meta = json(dir.path().join("metadata.json"));
    assert_eq!(meta["model"], "epidemic");
    assert!(meta["blow_up"].is_null());
    assert!(meta["window_count"].as_u64().unwrap() > 0);
}

#[test]
fn simulate_blow_up_exits_three_with_outputs() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "model = \"polynomial\"\n[initial]\ny = 2.0\n[solver]\nhorizon = 3.0\nquadrature_nodes_per_window = 32\n",
        "simulate",
    );
    assert_eq!(code(&out), 3);
    let meta = json(dir.path().join("metadata.json"));
    let t = meta["blow_up"]["time_estimate"].as_f64().unwrap();
    assert!((t - 0.5).abs() <= 0.05, "{t}");
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn simulate_zero_horizon_gives_initial_row() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "model = \"polynomial\"\n[initial]\nstate = [0.3]\n[solver]\nhorizon = 0.0\n",
        "simulate",
    );
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(header, vec!["t", "y"]);
    assert_eq!(rows, vec![vec![0.0, 0.3]]);
}

#[test]
fn simulate_solver_error_exits_four_with_json() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "model = \"polynomial\"\n[initial]\ny = 1.0\n[solver]\nhorizon = 1.0\nmax_picard_iters = 1\n",
        "simulate",
    );
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    let err = json(dir.path().join("error.json"));
    assert!(err["error"]["kind"].is_string());
}

#[test]
fn csv_round_trips_full_precision() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "model = \"predator_prey\"\n[predator_prey]\ncells = 10\n[solver]\nhorizon = 0.5\nkeep_node_states = true\n",
        "simulate",
    );
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    for line in text.lines().skip(1) {
        for field in line.split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(posmild::solver::format_f64(v), field);
        }
    }
}

#[test]
fn norms_columns_are_labelled() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "model = \"oncology\"\n[oncology]\ngrid = { kind = \"interval\", length = 1.0, cells = 8 }\n[solver]\nhorizon = 0.2\n[output]\ncolumns = \"norms\"\n",
        "simulate",
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, _) = csv_rows(&dir.path().join("trajectory.csv"));
    assert_eq!(header, vec!["t", "|y1|", "|y2|", "|y3|"]);
}

#[test]
fn convergence_ladders() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "[convergence]\nbenchmark = \"epidemic_mass_balance\"\nladder = [25, 50, 100]\n",
        "convergence",
    );
    assert_eq!(code(&out), 0);
    let (header, rows) = csv_rows(&dir.path().join("convergence.csv"));
    assert_eq!(header, vec!["resolution", "error"]);
    assert_eq!(rows.len(), 3);
    assert!(rows[1][1] < rows[0][1] && rows[2][1] < rows[1][1]);

    let out = run_config(
        dir.path(),
        "[convergence]\nbenchmark = \"predator_reduction\"\nladder = [100, 200]\n",
        "convergence",
    );
    assert_eq!(code(&out), 0);
    let (_, rows) = csv_rows(&dir.path().join("convergence.csv"));
    assert!(rows[1][1] < rows[0][1]);

    let out = run_config(
        dir.path(),
        "[convergence]\nbenchmark = \"oncology_reduction\"\nladder = [200]\n",
        "convergence",
    );
    assert_eq!(code(&out), 0);
    assert_eq!(csv_rows(&dir.path().join("convergence.csv")).1.len(), 1);

    let out = run_config(dir.path(), "[convergence]\nbenchmark = \"nope\"\n", "convergence");
    assert_eq!(code(&out), 1);
}

#[test]
fn convergence_reports_error_growth() {
    let dir = TempDir::new().unwrap();
    let out = run_config(
        dir.path(),
        "[convergence]\nbenchmark = \"epidemic_mass_balance\"\nladder = [100, 25]\n",
        "convergence",
    );
    assert_eq!(code(&out), 4);
}

#[test]
fn plot_outputs() {
    let dir = TempDir::new().unwrap();
    let two = write_config(dir.path(), "two.csv", "t,y\n0,1\n0.5,2\n1,4\n");
    let svg = dir.path().join("two.svg");
    let out = posmild(dir.path(), &["plot", two.to_str().unwrap(), svg.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let first = fs::read(&svg).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    assert_eq!(text.matches("<polyline").count(), 1);
    assert_eq!(code(&posmild(dir.path(), &["plot", two.to_str().unwrap(), svg.to_str().unwrap()])), 0);
    assert_eq!(fs::read(&svg).unwrap(), first);

    let epi = run_config(dir.path(), "model = \"epidemic\"\n[epidemic]\ncells = 12\n", "simulate");
    assert_eq!(code(&epi), 0);
    let traj = dir.path().join("trajectory.csv");
    assert_eq!(code(&posmild(dir.path(), &["plot", traj.to_str().unwrap()])), 0);
    let text = fs::read_to_string(dir.path().join("trajectory.svg")).unwrap();
    assert_eq!(text.matches("<polyline").count(), 1);
    assert!(text.contains("I (cell index up)"));

    let empty = write_config(dir.path(), "empty.csv", "t,y\n");
    assert_eq!(code(&posmild(dir.path(), &["plot", empty.to_str().unwrap()])), 1);
    let ragged = write_config(dir.path(), "ragged.csv", "t,y\n0,1,2\n");
    assert_eq!(code(&posmild(dir.path(), &["plot", ragged.to_str().unwrap()])), 1);
}
