use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lane_emden_cli::{report_run, RunManifest};
use tempfile::TempDir;

const CONSTANT: &str = "\
# constant solution 2^(2/3)
domain = interval
nodes = 257
p1 = 2
p2 = 2
alpha1 = -0.5
beta1 = -0.5
alpha2 = -0.5
beta2 = -0.5
recipe = T1
lambda = 10
";

fn lane_emden(args: &[&str], dir: &Path, config: &str) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    Command::new(env!("CARGO_BIN_EXE_lane-emden"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("LE_THREADS", "2")
        .output()
        .unwrap()
}

fn manifest(dir: &Path) -> RunManifest {
    RunManifest::load(&dir.join("out")).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_reproduces_constant_solution() {
    let tmp = TempDir::new().unwrap();
    let o = lane_emden(&["solve"], tmp.path(), CONSTANT);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(tmp.path());
    assert_eq!(m.schema_version, 1);
    assert_eq!(m.status, "ok");
    let sol = m.solution.unwrap();
    assert!(sol.converged && sol.enclosure);
    assert!((sol.u_max - 2f64.powf(2.0 / 3.0)).abs() < 1e-6);
    assert!(m.certificate.unwrap().passed);
    for file in m.files.values() {
        assert!(tmp.path().join("out").join(file).exists(), "{file}");
    }
    assert!(m.files.contains_key("u") && m.files.contains_key("v_upper"));
}

#[test]
fn runs_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    assert_eq!(lane_emden(&["solve"], a.path(), CONSTANT).status.code(), Some(0));
    assert_eq!(lane_emden(&["solve"], b.path(), CONSTANT).status.code(), Some(0));
    let (ma, mb) = (manifest(a.path()), manifest(b.path()));
    for file in ma.files.values() {
        let x = fs::read(a.path().join("out").join(file)).unwrap();
        let y = fs::read(b.path().join("out").join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
    let strip = |mut m: RunManifest| {
        m.timings.clear();
        m
    };
    assert_eq!(strip(ma), strip(mb));
}

#[test]
fn recipe_mismatch_exits_2() {
    let tmp = TempDir::new().unwrap();
    let o = lane_emden(&["construct"], tmp.path(), &CONSTANT.replace("recipe = T1", "recipe = T5"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("recipe mismatch"), "{}", stderr(&o));
    assert_eq!(manifest(tmp.path()).exit_code, 2);
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let tmp = TempDir::new().unwrap();
    let o = lane_emden(&["solve"], tmp.path(), &CONSTANT.replace("alpha1 = -0.5", "alpha1 = -1.5"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha1"), "{}", stderr(&o));
    let o = lane_emden(&["solve"], tmp.path(), &format!("{CONSTANT}bogus = 1\n"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 12"), "{}", stderr(&o));
}

#[test]
fn failed_certificate_exits_3() {
    let tmp = TempDir::new().unwrap();
    // No lambda works: -alpha2 exceeds p2 - 1.
    let cfg = CONSTANT
        .replace("p2 = 2", "p2 = 1.6")
        .replace("alpha2 = -0.5", "alpha2 = -0.9")
        .replace("lambda = 10", "lambda = auto")
        .replace("nodes = 257", "nodes = 33");
    let o = lane_emden(&["verify"], tmp.path(), &cfg);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert_eq!(manifest(tmp.path()).status, "certificate_failed");
}

#[test]
fn below_floor_certificate_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = CONSTANT.replace("lambda = 10", "lambda = 1.01");
    let o = lane_emden(&["verify"], tmp.path(), &cfg);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let cert = manifest(tmp.path()).certificate.unwrap();
    assert!(!cert.passed);
}

#[test]
fn iteration_limit_exits_4() {
    let tmp = TempDir::new().unwrap();
    let o = lane_emden(&["solve"], tmp.path(), &format!("{CONSTANT}max_outer = 2\n"));
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let m = manifest(tmp.path());
    assert_eq!(m.status, "not_converged");
    assert!(!m.solution.unwrap().converged);
    assert!(m.files.contains_key("u"));
}

#[test]
fn uniqueness_subcommand_passes_in_regime() {
    let tmp = TempDir::new().unwrap();
    let cfg = format!("{}tol_outer = 1e-11\ntol_res = 1e-13\n", CONSTANT.replace("nodes = 257", "nodes = 65"));
    let o = lane_emden(&["uniqueness"], tmp.path(), &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = manifest(tmp.path()).uniqueness.unwrap();
    assert!(report.passed);
    assert!((report.tau - 1.0).abs() < 1e-6);
    assert!(report.sup_distance <= 1e-6);
}

#[test]
fn boundedness_on_square() {
    let tmp = TempDir::new().unwrap();
    let cfg = "domain = rectangle\nnodes = 17, 17\nlevels = 3\np1 = 2\np2 = 2\n\
               alpha1 = -0.5\nbeta1 = -0.5\nalpha2 = -0.5\nbeta2 = -0.5\ngamma = -0.4\n";
    let o = lane_emden(&["boundedness"], tmp.path(), cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(tmp.path());
    assert_eq!(m.boundedness.len(), 1);
    let r = &m.boundedness[0];
    assert!(r.condition_holds);
    assert_eq!(r.sup_norms.len(), 3);
    assert!(r.drift < 0.05);
}

#[test]
fn eigen_and_torsion_subcommands() {
    let tmp = TempDir::new().unwrap();
    let cfg = CONSTANT.replace("nodes = 257", "nodes = 65").replace("p2 = 2", "p2 = 3") + "eigen_restarts = 3\n";
    let o = lane_emden(&["eigen", "--seed", "7"], tmp.path(), &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(tmp.path());
    assert_eq!(m.seed, Some(7));
    assert_eq!(m.restart_checks.len(), 2);
    assert!(m.restart_checks.iter().all(|c| c.consistent));
    assert!(m.files.contains_key("eigen_dirichlet_u") && m.files.contains_key("eigen_dirichlet_v"));

    let tmp = TempDir::new().unwrap();
    let o = lane_emden(&["torsion"], tmp.path(), &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m = manifest(tmp.path());
    assert_eq!(m.torsion.len(), 4);
    assert_eq!(m.files.len(), 4);
}

#[test]
fn report_emits_plot_data() {
    let tmp = TempDir::new().unwrap();
    let cfg = CONSTANT.replace("domain = interval\nnodes = 257", "domain = rectangle\nnodes = 9, 9");
    assert_eq!(lane_emden(&["solve"], tmp.path(), &cfg).status.code(), Some(0));
    let run = tmp.path().join("out");
    let written = report_run(&run, "u").unwrap();
    assert_eq!(written.len(), 2);
    let mid = fs::read_to_string(run.join("u.midline.csv")).unwrap();
    assert!(mid.starts_with("x,y,value\n"));
    assert_eq!(mid.lines().count(), 10);

    let all = report_run(&run, "all").unwrap();
    assert_eq!(all.len(), 2 * manifest(tmp.path()).files.len());

    let err = report_run(&run, "w").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("u_lower") && msg.contains("v"), "{msg}");
    assert_eq!(err.exit_code(), 2);

    let o = Command::new(env!("CARGO_BIN_EXE_lane-emden"))
        .args(["report", "--field", "v", "--out"])
        .arg(&run)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(run.join("v.midline.csv").exists());
}
