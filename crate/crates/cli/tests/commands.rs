use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn deck(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../decks").join(name)
}

fn lsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsim"))
        .args(args)
        .env_remove("LSIM_WORKERS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn csv_rows(p: &Path) -> Vec<String> {
    std::fs::read_to_string(p).unwrap().lines().map(String::from).collect()
}

#[test]
fn run_writes_waves_report_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let (w, r, p) = (dir.path().join("waves.csv"), dir.path().join("report.csv"), dir.path().join("w.svg"));
    let ulpls = deck("ulpls.sp");
    let o = lsim(&[
        "run", s(&ulpls), "--vin", "0.1", "--tstop", "20u", "--out", s(&w), "--report", s(&r), "--plot", s(&p),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let waves = csv_rows(&w);
    assert!(waves[0].starts_with("time,"));
    assert_eq!(waves.len(), 20_001 + 1);
    let report = csv_rows(&r);
    assert_eq!(report.len(), 2);
    assert!(report[1].starts_with("1.00000000e-1,"));
    let svg = std::fs::read_to_string(&p).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let ulpls = deck("ulpls.sp");
    assert_eq!(code(&lsim(&["validate", s(&ulpls)])), 0);

    let bad = write(dir.path(), "bad.sp", "t\nR1 a 0 1q\n");
    assert_eq!(code(&lsim(&["validate", s(&bad)])), 1);
    let floating = write(dir.path(), "float.sp", "t\nV1 a 0 DC 1\nR1 a 0 1k\nR2 a b 1k\n");
    assert_eq!(code(&lsim(&["run", s(&floating), "--tstop", "10n"])), 1);

    let source_loop = write(dir.path(), "loop.sp", "t\nV1 a 0 DC 1\nV2 a 0 DC 2\nR1 a 0 1k\n.tran 1n 10n\n");
    assert_eq!(code(&lsim(&["run", s(&source_loop)])), 2);

    assert_eq!(code(&lsim(&["run", s(&ulpls), "--vin", "10m"])), 3);
    assert_eq!(code(&lsim(&["minvin", s(&ulpls), "--lo", "0.2", "--hi", "0.4"])), 3);

    assert_eq!(code(&lsim(&["run", s(&ulpls), "--vin", "-1"])), 4);
    assert_eq!(code(&lsim(&["run", s(&ulpls), "--tstop", "0"])), 4);
    assert_eq!(code(&lsim(&["run", s(&ulpls), "--temp", "300"])), 4);
    assert_eq!(code(&lsim(&["run", "missing.sp"])), 4);
    assert_eq!(code(&lsim(&["frobnicate"])), 4);
    assert_eq!(code(&lsim(&["wc-sizing", s(&ulpls), "--devices", "MN1"])), 4);
    let p = dir.path().join("x.svg");
    assert_eq!(code(&lsim(&["run", s(&ulpls), "--plot", s(&p), "--plot-nodes", "in,nowhere"])), 4);
    assert!(!p.exists());
    assert_eq!(code(&lsim(&["--help"])), 0);
}

#[test]
fn minvin_prints_millivolts() {
    let o = lsim(&["minvin", s(&deck("ulpls.sp")), "--lo", "0.02", "--hi", "0.4"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let mv: f64 = out
        .trim()
        .strip_prefix("min V_in: ")
        .and_then(|r| r.strip_suffix(" mV"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(mv > 20.0 && mv <= 150.0, "{mv}");
}

#[test]
fn mc_output_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let ulpls = deck("ulpls.sp");
    let mut tables = Vec::new();
    for workers in ["1", "3"] {
        let (out, hist) = (dir.path().join(format!("mc{workers}.csv")), dir.path().join(format!("h{workers}.csv")));
        let o = Command::new(env!("CARGO_BIN_EXE_lsim"))
            .args(["mc", s(&ulpls), "-n", "6", "--seed", "42", "--vin", "0.1", "--out", s(&out), "--hist", s(&hist)])
            .env("LSIM_WORKERS", workers)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(csv_rows(&hist).len(), 21);
        tables.push((std::fs::read(&out).unwrap(), std::fs::read(&hist).unwrap()));
    }
    assert_eq!(tables[0], tables[1]);
    assert_eq!(String::from_utf8_lossy(&tables[0].0).lines().count(), 7);
}

#[test]
fn campaign_tables_have_one_row_per_variant() {
    let ulpls = deck("ulpls.sp");
    let cases: [(&[&str], usize); 5] = [
        (&["sweep", s(&ulpls), "--param", "vin", "--values", "0.1,0.2,0.4"], 3),
        (&["sweep", s(&ulpls), "--param", "temp", "--values", "-40,125", "--vin", "0.1"], 2),
        (&["corners", s(&ulpls), "--vin", "0.1"], 4),
        (&["wc-sizing", s(&ulpls), "--vin", "0.1"], 4),
        (&["temp-sweep", s(&ulpls), "--vin", "0.1"], 4),
    ];
    for (args, rows) in cases {
        let o = lsim(args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let out = String::from_utf8(o.stdout).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[0].starts_with("variant,label,vin,"), "{}", lines[0]);
        assert_eq!(lines.len(), rows + 1, "{args:?}");
        assert!(lines[1..].iter().all(|l| l.ends_with(",true")), "{args:?}: {out}");
    }
}

#[test]
fn vddl_sweep_tracks_input_amplitude() {
    let o = lsim(&["sweep", s(&deck("ulpls.sp")), "--param", "vddl", "--values", "0.3"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let row = out.lines().nth(1).unwrap();
    assert!(row.contains(",3.00000000e-1,3.00000000e-1,8.00000000e-1,"), "{row}");
}
