use std::fs;
use std::path::Path;
use std::process::Command;

use qhje::cli::run;
use tempfile::TempDir;

fn qhje(dir: &TempDir, args: &[&str]) -> i32 {
    let mut argv = vec!["qhje"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--out", dir.path().to_str().unwrap()]);
    run(argv)
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

impl Csv {
    fn read(path: &Path) -> Csv {
        let text = fs::read_to_string(path).unwrap();
        assert!(!text.contains('\r'));
        assert!(text.ends_with('\n'));
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines
            .map(|l| l.split(',').map(|c| (!c.is_empty()).then(|| c.parse().unwrap())).collect())
            .collect();
        Csv { header, rows }
    }

    fn col(&self, name: &str) -> Vec<Option<f64>> {
        let k = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[k]).collect()
    }

    fn dense(&self, name: &str) -> Vec<f64> {
        self.col(name).into_iter().map(Option::unwrap).collect()
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn solve_family_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qhje(&dir, &["solve", "--n", "2", "--grid", "-8:8:2001"]), 0);
    let csv = Csv::read(&dir.path().join("solution.csv"));
    assert_eq!(csv.header, ["x", "V", "psi", "psi_oracle", "X", "Xp", "Y", "pL_im"]);
    assert_eq!(csv.rows.len(), 2001);
    assert!(max_diff(&csv.dense("psi"), &csv.dense("psi_oracle")) <= 1e-6);

    // action columns are filled on the allowed region only
    let xp: Vec<f64> = csv.col("Xp").into_iter().flatten().collect();
    let xa: Vec<f64> = csv.col("X").into_iter().flatten().collect();
    assert!(xp.len() > 100 && xp.len() < 2001);
    assert!(xp.iter().all(|&v| v > 0.0));
    assert!(xa.windows(2).all(|w| w[1] > w[0]));
    assert!((xa[xa.len() - 1] - 2.5 * std::f64::consts::PI).abs() <= 1e-6);
    assert!(csv.col("pL_im").iter().all(Option::is_none));
}

#[test]
fn solve_polar_and_both() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qhje(&dir, &["solve", "--n", "1", "--grid", "-8:8:2001", "--method", "polar"]), 0);
    let csv = Csv::read(&dir.path().join("solution.csv"));
    assert!(max_diff(&csv.dense("psi"), &csv.dense("psi_oracle")) <= 1e-4);
    assert!(csv.col("X").iter().all(Option::is_none));

    assert_eq!(qhje(&dir, &["solve", "--potential", "morse", "--n", "2", "--method", "both"]), 0);
    let csv = Csv::read(&dir.path().join("solution.csv"));
    assert!(max_diff(&csv.dense("psi"), &csv.dense("psi_oracle")) <= 1e-5);
    assert!(csv.col("pL_im").iter().filter(|v| v.is_some()).count() > 1000);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qhje(&dir, &["solve", "--potential", "morse", "--n", "9"]), 2);
    assert_eq!(qhje(&dir, &["solve", "--n", "2", "--energy", "2.51"]), 3);
    assert_eq!(qhje(&dir, &["solve", "--grid", "-8:8:2000"]), 2);
    assert_eq!(qhje(&dir, &["solve", "--grid", "8:-8:2001"]), 2);
    assert_eq!(qhje(&dir, &["solve", "--method", "magic"]), 2);
    assert_eq!(qhje(&dir, &["solve", "--potential", "tabulated"]), 2);
    assert_eq!(qhje(&dir, &["solve", "--hbar=-1"]), 2);
    assert_eq!(qhje(&dir, &["solve", "--bogus"]), 2);
    assert_eq!(qhje(&dir, &["poles", "--n", "40", "--hbar", "0.05", "--grid", "-8:8:101", "--method", "polar"]), 4);
    assert_eq!(qhje(&dir, &["poles", "--method", "family"]), 2);
    assert_eq!(run(["qhje", "--help"]), 0);
}

#[test]
fn binary_reports_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let status = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_qhje"))
            .args(args)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap()
            .status
            .code()
    };
    assert_eq!(status(&["solve", "--n", "0"]), Some(0));
    assert_eq!(status(&["solve", "--n", "0", "--energy", "0.6"]), Some(3));
    assert!(dir.path().join("solution.csv").exists());
}

#[test]
fn poles_of_low_states() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qhje(&dir, &["poles", "--n", "2", "--method", "polar", "--grid", "-8:8:2001"]), 0);
    let csv = Csv::read(&dir.path().join("poles.csv"));
    assert_eq!(csv.header, ["x0", "residue_re", "residue_im"]);
    let x0 = csv.dense("x0");
    assert_eq!(x0.len(), 2);
    assert!((x0[0] + 0.5f64.sqrt()).abs() <= 0.008 && (x0[1] - 0.5f64.sqrt()).abs() <= 0.008);
    for (re, im) in csv.dense("residue_re").iter().zip(csv.dense("residue_im")) {
        assert!(re.abs() <= 1e-6 && (im + 1.0).abs() <= 1e-6);
    }

    assert_eq!(qhje(&dir, &["poles", "--n", "0", "--method", "both", "--hbar", "0.5"]), 0);
    let csv = Csv::read(&dir.path().join("poles.csv"));
    assert!(csv.rows.is_empty());
}

#[test]
fn residue_follows_hbar() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qhje(&dir, &["poles", "--n", "3", "--method", "polar", "--hbar", "0.5", "--mass", "2"]), 0);
    let csv = Csv::read(&dir.path().join("poles.csv"));
    assert_eq!(csv.rows.len(), 3);
    assert!(csv.dense("residue_im").iter().all(|v| (v + 0.5).abs() <= 1e-6));
}

#[test]
fn sweep_shrinks_with_hbar() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qhje(&dir, &["sweep-hbar"]), 0);
    let csv = Csv::read(&dir.path().join("sweep.csv"));
    assert_eq!(csv.header, ["hbar", "sup_Xp_minus_pc", "sup_Yp"]);
    assert_eq!(csv.dense("hbar"), [1.0, 0.5, 0.25, 0.1]);
    let gap = csv.dense("sup_Xp_minus_pc");
    assert!(gap.windows(2).all(|w| w[1] < w[0]));
    for (h, y) in csv.dense("hbar").iter().zip(csv.dense("sup_Yp")) {
        assert!(y < 0.6 * h);
    }

    assert_eq!(qhje(&dir, &["sweep-hbar", "--hbar-list", ""]), 2);
    assert_eq!(qhje(&dir, &["sweep-hbar", "--hbar-list", "0.5,1"]), 2);
}

#[test]
fn figures_write_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qhje(&dir, &["figures", "1", "2", "3", "4", "--emit", "csv,svg"]), 0);
    let heads = [
        vec!["x", "X", "W0"],
        vec!["x", "Xp", "pC"],
        vec!["x", "envelope", "phase_factor", "product"],
        vec!["x", "Y1", "Y3", "X", "psi"],
    ];
    for (k, head) in heads.iter().enumerate() {
        let csv = Csv::read(&dir.path().join(format!("fig{}.csv", k + 1)));
        assert_eq!(&csv.header, head);
        let svg = fs::read_to_string(dir.path().join(format!("fig{}.svg", k + 1))).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("<path"));
    }

    let fig1 = Csv::read(&dir.path().join("fig1.csv"));
    let w0 = fig1.dense("W0");
    assert!(w0.windows(2).all(|w| w[1] >= w[0]));
    assert!((w0[w0.len() - 1] - 2.5 * std::f64::consts::PI).abs() <= 1e-6);

    let fig4 = Csv::read(&dir.path().join("fig4.csv"));
    let psi = fig4.dense("psi");
    let x = fig4.dense("x");
    let norm: f64 = x.windows(2).zip(psi.windows(2)).map(|(x, p)| 0.5 * (x[1] - x[0]) * (p[0] * p[0] + p[1] * p[1])).sum();
    assert!((norm - 1.0).abs() <= 1e-5, "{norm}");

    assert_eq!(qhje(&dir, &["figures", "5"]), 2);
    assert_eq!(qhje(&dir, &["figures", "1", "--emit", "png"]), 2);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "potential = morse\nn = 1\nmethod = both\ngrid = -2:12:1001\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    assert_eq!(qhje(&dir, &["solve", "--config", cfg]), 0);
    let csv = Csv::read(&dir.path().join("solution.csv"));
    assert_eq!(csv.rows.len(), 1001);
    assert!(csv.dense("V")[0] > 10.0);

    assert_eq!(qhje(&dir, &["solve", "--config", cfg, "--grid", "-2:12:501", "--n", "0"]), 0);
    let csv = Csv::read(&dir.path().join("solution.csv"));
    assert_eq!(csv.rows.len(), 501);
    let psi = csv.dense("psi");
    assert!(psi.iter().all(|&v| v >= -1e-9), "ground state has no node");

    fs::write(dir.path().join("bad.cfg"), "potential morse\n").unwrap();
    let bad = dir.path().join("bad.cfg");
    assert_eq!(qhje(&dir, &["solve", "--config", bad.to_str().unwrap()]), 2);
    assert_eq!(qhje(&dir, &["solve", "--config", "/nonexistent/run.cfg"]), 2);
}

#[test]
fn tabulated_potential_against_numerov() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("v.dat");
    let text: String = (0..=400)
        .map(|i| {
            let x = -10.0 + 0.05 * i as f64;
            format!("{x} {}\n", 0.5 * x * x)
        })
        .collect();
    fs::write(&table, format!("# harmonic well\n{text}")).unwrap();
    let table = table.to_str().unwrap();
    let base = ["solve", "--potential", "tabulated", "--table", table, "--n", "2"];

    let mut args = base.to_vec();
    args.extend_from_slice(&["--energy", "2.5", "--grid", "-8:8:2001"]);
    assert_eq!(qhje(&dir, &args), 0);
    let csv = Csv::read(&dir.path().join("solution.csv"));
    assert!(max_diff(&csv.dense("psi"), &csv.dense("psi_oracle")) <= 1e-5);

    assert_eq!(qhje(&dir, &base), 2, "tabulated needs --energy");
    let mut args = base.to_vec();
    args.extend_from_slice(&["--energy", "2.5", "--grid", "-12:8:2001"]);
    assert_eq!(qhje(&dir, &args), 2, "grid outside the table");
}

#[test]
fn csv_round_trips_at_printed_precision() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qhje(&dir, &["solve", "--n", "3", "--grid", "-8:8:1001"]), 0);
    let csv = Csv::read(&dir.path().join("solution.csv"));
    let x = csv.dense("x");
    let v = csv.dense("V");
    for (x, v) in x.iter().zip(&v) {
        assert!((0.5 * x * x - v).abs() <= 1e-11 * v.max(1.0));
    }
    let text = fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    for cell in text.lines().skip(1).flat_map(|l| l.split(',')).filter(|c| !c.is_empty()) {
        let mantissa: String = cell.split('e').next().unwrap().chars().filter(char::is_ascii_digit).collect();
        assert!(mantissa.trim_start_matches('0').len() <= 12, "{cell}");
    }
}
