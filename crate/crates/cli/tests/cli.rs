use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pwlnn::affine::linspace;
use pwlnn::catalog;
use pwlnn::dnn::{Activation, DenseLayer, InitScheme, PwlNetwork};
use pwlnn::repr::PwlFunction;
use pwlnn::{AffineFunction, ConventionalPwl};
use tempfile::TempDir;

fn pwlnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pwlnn")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(o: &Output, key: &str) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")).map(str::to_owned))
        .unwrap_or_else(|| panic!("no `{key}` in:\n{}", stdout(o)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn three_piece_csv(dir: &TempDir) -> PathBuf {
    let c = catalog::three_piece_cplr();
    let mut text = String::from("x,y\n");
    for x in linspace(-3.0, 3.0, 121) {
        text.push_str(&format!("{x},{}\n", c.eval(&[x]).unwrap()));
    }
    write(dir, "three.csv", &text)
}

fn ridge_csv(dir: &TempDir) -> PathBuf {
    let mut text = String::new();
    for x in linspace(0.0, 1.0, 41) {
        for y in linspace(0.0, 1.0, 41) {
            text.push_str(&format!("{x},{y},{}\n", catalog::ridge_value(&[x, y])));
        }
    }
    write(dir, "ridge.csv", &text)
}

fn relu_net(units: &[(Vec<f64>, f64)]) -> PwlNetwork {
    let n = units[0].0.len();
    let mut h = DenseLayer::zeros(n, units.len(), Activation::Relu);
    for (i, (w, b)) in units.iter().enumerate() {
        h.weights[i * n..(i + 1) * n].copy_from_slice(w);
        h.bias[i] = *b;
    }
    let mut o = DenseLayer::zeros(units.len(), 1, Activation::Identity);
    o.weights = vec![1.0; units.len()];
    PwlNetwork::new(n, vec![h], o).unwrap()
}

#[test]
fn fit_hh_reports_small_rmse() {
    let dir = TempDir::new().unwrap();
    let data = three_piece_csv(&dir);
    let model = dir.path().join("m.txt");
    let trace = dir.path().join("t.csv");
    let o = pwlnn(&["fit", "--data", s(&data), "--kind", "hh", "--max-terms", "2", "--out", s(&model), "--trace", s(&trace)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rmse: f64 = field(&o, "train_rmse").parse().unwrap();
    assert!(rmse <= 1e-6, "rmse {rmse}");
    assert_eq!(field(&o, "valid_rmse"), "none");
    assert!(fs::read_to_string(&model).unwrap().starts_with("pwl-hh v1"));
    assert!(fs::read_to_string(&trace).unwrap().starts_with("step,terms,train_sse,valid_sse,action"));
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn usage_errors_exit_64() {
    let dir = TempDir::new().unwrap();
    let data = three_piece_csv(&dir);
    let out = dir.path().join("m.txt");
    let o = pwlnn(&["fit", "--data", s(&data), "--kind", "hh", "--max-terms", "0", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(64));
    assert!(!out.exists());
    assert_eq!(pwlnn(&["fit", "--bogus"]).status.code(), Some(64));
    assert_eq!(pwlnn(&["frobnicate"]).status.code(), Some(64));
    let cfg = write(&dir, "bad.cfg", "max_terms = 0\n");
    let o = pwlnn(&["fit", "--data", s(&data), "--kind", "sbf", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(64));
    assert!(pwlnn(&["--help"]).status.success());
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let data = three_piece_csv(&dir);
    let out = dir.path().join("m.txt");
    let cfg = write(&dir, "fit.cfg", "# shallow settings\nmax_terms = 1\nseed = 3\n");
    let o = pwlnn(&["fit", "--data", s(&data), "--kind", "hh", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success());
    assert_eq!(field(&o, "terms"), "1");
    assert_eq!(field(&o, "seed"), "3");
    let o = pwlnn(&["fit", "--data", s(&data), "--kind", "hh", "--config", s(&cfg), "--max-terms", "2", "--out", s(&out)]);
    assert_eq!(field(&o, "terms"), "2");
}

#[test]
fn unreadable_or_bad_data_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.txt");
    let o = pwlnn(&["fit", "--data", "/nonexistent/data.csv", "--kind", "hh", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let bad = write(&dir, "bad.csv", "x,y\n1,2\n3,oops\n");
    let o = pwlnn(&["fit", "--data", s(&bad), "--kind", "hh", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn dnn_fit_is_byte_identical_per_seed() {
    let dir = TempDir::new().unwrap();
    let data = ridge_csv(&dir);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let trace = dir.path().join(format!("{name}.csv"));
        let o = pwlnn(&["fit", "--data", s(&data), "--kind", "dnn", "--seed", "7", "--epochs", "5", "--out", s(&out), "--trace", s(&trace)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (fs::read(out).unwrap(), fs::read(trace).unwrap(), stdout(&o).lines().filter(|l| !l.starts_with("model") && !l.starts_with("trace")).collect::<Vec<_>>().join("\n"))
    };
    let (m1, t1, s1) = run("a.txt");
    let (m2, t2, s2) = run("b.txt");
    assert_eq!(m1, m2);
    assert_eq!(t1, t2);
    assert_eq!(s1, s2);
    assert!(String::from_utf8(m1).unwrap().starts_with("pwl-net v1 inputs=2 layers=3"));
}

#[test]
fn eval_examples() {
    let dir = TempDir::new().unwrap();
    let lattice = write(&dir, "l.txt", &catalog::five_piece_lattice().to_text());
    let o = pwlnn(&["eval", "--model", s(&lattice), "--grid", "0:5:0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().any(|l| l == "2.5,2"));

    let nested = write(&dir, "n.txt", &catalog::ridge_nested().to_text());
    let pts = write(&dir, "p.csv", "x1,x2\n1,1\n0,0\n");
    let o = pwlnn(&["eval", "--model", s(&nested), "--points", s(&pts)]);
    assert_eq!(stdout(&o), "x1,x2,f\n1,1,20\n0,0,0\n");

    let empty = write(&dir, "e.csv", "");
    let o = pwlnn(&["eval", "--model", s(&nested), "--points", s(&empty)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "");

    let o = pwlnn(&["eval", "--model", s(&nested), "--grid", "0:1:0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let garbage = write(&dir, "g.txt", "pwl-cplr v1 dim=1 terms=1\naffine J=1 b=0\n");
    assert_eq!(pwlnn(&["eval", "--model", s(&garbage), "--grid", "0:1:1"]).status.code(), Some(2));
}

#[test]
fn convert_examples() {
    let dir = TempDir::new().unwrap();
    let five = write(&dir, "five.txt", &catalog::five_piece().to_text());
    let out = dir.path().join("lat.txt");
    let o = pwlnn(&["convert", "--model", s(&five), "--to", "lattice", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for (k, want) in ["{1,3,4,5}", "{2,3,4,5}", "{2,3,4}", "{1,2,3,4}", "{1,2,3,5}"].iter().enumerate() {
        assert_eq!(field(&o, &format!("S{}", k + 1)), *want);
    }
    assert_eq!(field(&o, "max_deviation"), "0");

    let ridge = write(&dir, "ridge.txt", &catalog::ridge_conventional().to_text());
    let o = pwlnn(&["convert", "--model", s(&ridge), "--to", "cplr", "--out", s(&dir.path().join("c.txt"))]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("inconsistent variation"));

    let cplr = write(&dir, "cplr.txt", &catalog::three_piece_cplr().to_text());
    let hh = dir.path().join("hh.txt");
    let o = pwlnn(&["convert", "--model", s(&cplr), "--to", "hh", "--out", s(&hh)]);
    assert!(o.status.success());
    assert_eq!(field(&o, "max_deviation"), "0");
    assert_eq!(field(&o, "equivalent"), "true");

    let o = pwlnn(&["convert", "--model", s(&cplr), "--to", "lattice", "--out", s(&dir.path().join("x.txt"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("supported"));

    let dc = dir.path().join("dc.txt");
    assert!(pwlnn(&["convert", "--model", s(&hh), "--to", "dc", "--out", s(&dc)]).status.success());
    let ghh = dir.path().join("ghh.txt");
    let o = pwlnn(&["convert", "--model", s(&dc), "--to", "ghh", "--out", s(&ghh)]);
    assert!(o.status.success());
    assert!(fs::read_to_string(ghh).unwrap().starts_with("pwl-ghh v1"));
}

#[test]
fn validate_examples() {
    let dir = TempDir::new().unwrap();
    let broken = write(&dir, "b.txt", &catalog::five_piece_broken().to_text());
    let o = pwlnn(&["validate", "--model", s(&broken)]);
    assert_eq!(o.status.code(), Some(5));
    let text = stdout(&o);
    assert!(text.contains("x=1.8 "), "{text}");
    assert!(text.contains("x=3.2 "), "{text}");

    let two = write(&dir, "t.txt", &catalog::two_piece_3d().to_text());
    let o = pwlnn(&["validate", "--model", s(&two)]);
    assert!(o.status.success());
    assert_eq!(field(&o, "continuous"), "true");
    assert_eq!(field(&o, "cplr_representable"), "true");

    let affine = ConventionalPwl::affine(AffineFunction::new(vec![1.0, 2.0], 3.0), None);
    let a = write(&dir, "a.txt", &affine.to_text());
    let o = pwlnn(&["validate", "--model", s(&a)]);
    assert!(o.status.success());
    assert_eq!(field(&o, "continuity_violations"), "0");

    let ghh = write(&dir, "g.txt", &catalog::ridge_ghh().to_text());
    assert!(pwlnn(&["validate", "--model", s(&ghh)]).status.success());
}

#[test]
fn regions_examples() {
    let dir = TempDir::new().unwrap();
    let three = relu_net(&[(vec![1.0, 0.0], 0.0), (vec![0.0, 1.0], 0.0), (vec![1.0, 1.0], -0.5)]);
    let net = write(&dir, "n.txt", &three.to_text());
    let certs = dir.path().join("r.csv");
    let o = pwlnn(&["regions", "--model", s(&net), "--box", "-2:2,-2:2", "--out", s(&certs)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(field(&o, "count"), "7");
    assert_eq!(field(&o, "bound"), "7");
    let csv = fs::read_to_string(certs).unwrap();
    assert!(csv.starts_with("x1,x2,pattern,j1,j2,b\n"));
    assert_eq!(csv.lines().count(), 8);
    let o = pwlnn(&["regions", "--model", s(&net), "--box", "-2:2,-2:2", "--method", "grid"]);
    assert_eq!(field(&o, "count"), "7");

    let quad = write(&dir, "q.txt", &relu_net(&[(vec![1.0, 0.0], 0.0), (vec![0.0, 1.0], 0.0)]).to_text());
    let o = pwlnn(&["regions", "--model", s(&quad), "--box", "-1:1,-1:1"]);
    assert_eq!(field(&o, "count"), "4");

    let big = PwlNetwork::init(2, &[(25, Activation::Relu)], InitScheme::ScaledNormal, 0).unwrap();
    let big = write(&dir, "big.txt", &big.to_text());
    let o = pwlnn(&["regions", "--model", s(&big), "--box", "-1:1,-1:1"]);
    assert_eq!(o.status.code(), Some(6));
    assert!(String::from_utf8_lossy(&o.stderr).contains("limit is 20"));
}

#[test]
fn equiv_and_trace_export() {
    let dir = TempDir::new().unwrap();
    let nested = write(&dir, "n.txt", &catalog::ridge_nested().to_text());
    let ghh = write(&dir, "g.txt", &catalog::ridge_ghh().to_text());
    let o = pwlnn(&["equiv", "--a", s(&nested), "--b", s(&ghh), "--box", "-2:2,-2:2"]);
    assert!(o.status.success());
    assert_eq!(field(&o, "max_deviation"), "0");
    let shifted = write(&dir, "s.txt", "pwl-ghh v1 dim=2 terms=1\nterm w=1 affines=1\nJ=0,0 b=1\n");
    let o = pwlnn(&["equiv", "--a", s(&nested), "--b", s(&shifted), "--box", "-2:2,-2:2"]);
    assert_eq!(o.status.code(), Some(5));

    let data = three_piece_csv(&dir);
    let plot = dir.path().join("plot.csv");
    let o = pwlnn(&["trace-export", "--data", s(&data), "--kind", "sbf", "--validation-split", "0.25", "--out", s(&plot)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(plot).unwrap();
    assert!(csv.starts_with("step,terms,train_sse,valid_sse,train_rmse,valid_rmse,action\n"));
    assert!(csv.lines().nth(1).unwrap().ends_with(",init"));
}
