//! End-to-end runs of the `cvfmri` binary.

use std::path::Path;
use std::process::{Command, Output};

use cvfmri::metrics::MetricsRow;

fn cvfmri(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvfmri")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = cvfmri(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn quick_fit(data: &Path, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["fit", "--data", p(data), "--config", p(config), "--iters", "200", "--out", p(out)];
    args.extend_from_slice(extra);
    ok(&args)
}

#[test]
fn simulate_fit_evaluate_three_replicates() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let res = dir.path().join("res");
    ok(&["simulate", "--study", "ar1", "--seed", "5", "--replicates", "3", "--T", "80", "--out", p(&sim)]);
    for r in 0..3 {
        let rep = sim.join(format!("replicate_{r}"));
        for f in ["data.cvf", "truth_activation.csv", "truth_magnitude.csv", "fit.conf"] {
            assert!(rep.join(f).exists(), "missing {f}");
        }
        quick_fit(&rep.join("data.cvf"), &rep.join("fit.conf"), &res.join(format!("replicate_{r}")), &[]);
    }
    let table_path = dir.path().join("metrics.csv");
    ok(&["evaluate", "--truth", p(&sim), "--result", p(&res), "--out", p(&table_path)]);

    let table = std::fs::read_to_string(&table_path).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 5, "{table}");
    assert!(lines[0].starts_with("label,accuracy,precision,recall,f1,auc"));
    let parse = |line: &str| MetricsRow::parse_csv(line.split_once(',').unwrap().1).unwrap();
    let rows: Vec<MetricsRow> = lines[1..4].iter().map(|l| parse(l)).collect();
    assert!(lines[4].starts_with("mean,"));
    let mean = parse(lines[4]);
    for k in 0..8 {
        let want = rows.iter().map(|r| r.fields()[k].unwrap()).sum::<f64>() / 3.0;
        let got = mean.fields()[k].unwrap();
        // Fields go through the CSV text, so compare at the precision written.
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "column {k}: {got} vs {want}");
    }
}

#[test]
fn evaluating_truth_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&["simulate", "--study", "iid", "--seed", "2", "--T", "80", "--out", p(&sim)]);
    let res = dir.path().join("res");
    std::fs::create_dir_all(&res).unwrap();
    let act = std::fs::read_to_string(sim.join("truth_activation.csv")).unwrap();
    std::fs::write(res.join("activation.csv"), &act).unwrap();
    std::fs::write(res.join("incl_prob.csv"), &act).unwrap();
    std::fs::copy(sim.join("truth_magnitude.csv"), res.join("magnitude.csv")).unwrap();
    let out = dir.path().join("m.csv");
    ok(&["evaluate", "--truth", p(&sim), "--result", p(&res), "--out", p(&out)]);
    let table = std::fs::read_to_string(&out).unwrap();
    let row = MetricsRow::parse_csv(table.lines().nth(1).unwrap().split_once(',').unwrap().1).unwrap();
    assert_eq!(row.accuracy, Some(1.0));
    assert_eq!(row.f1, Some(1.0));
    assert_eq!(row.auc, Some(1.0));
    assert_eq!(row.xy_mse, Some(0.0));
}

#[test]
fn fit_writes_every_output_and_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    ok(&["simulate", "--study", "ar1", "--seed", "9", "--T", "80", "--out", p(&sim)]);
    let out = dir.path().join("fit");
    quick_fit(
        &sim.join("data.cvf"),
        &sim.join("fit.conf"),
        &out,
        &["--G", "4", "--seed", "77", "--workers", "2", "--trace-voxel", "1275"],
    );
    for f in [
        "activation.csv",
        "magnitude.csv",
        "phase.csv",
        "incl_prob.csv",
        "mcse.csv",
        "activation.pgm",
        "magnitude.pgm",
        "summary.csv",
        "manifest.txt",
        "timing.txt",
        "trace.csv",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let manifest = cvfmri::io::read_key_values(&out.join("manifest.txt")).unwrap();
    assert_eq!(manifest["G"], "4");
    assert_eq!(manifest["seed"], "77");
    assert_eq!(manifest["n_iter"], "200");
    assert!(!manifest.contains_key("workers"));
    assert_eq!(std::fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 5);
    assert_eq!(std::fs::read_to_string(out.join("trace.csv")).unwrap().lines().count(), 201);
    let pgm = std::fs::read(out.join("activation.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n50 50\n255\n"));
    assert_eq!(pgm.len(), b"P5\n50 50\n255\n".len() + 2500);

    // Map CSVs survive read then write unchanged.
    for f in ["magnitude.csv", "phase.csv", "incl_prob.csv"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        let field: cvfmri::Field<f64> = cvfmri::io::field_from_csv(&text, &out.join(f)).unwrap();
        assert_eq!(cvfmri::io::field_to_csv(&field), text, "{f}");
    }
}

#[test]
fn errors_map_to_category_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");

    let missing = cvfmri(&["fit", "--data", p(&dir.path().join("nope.cvf")), "--out", p(&out)]);
    assert_eq!(missing.status.code(), Some(4));

    let junk = dir.path().join("junk.cvf");
    std::fs::write(&junk, b"NOPE0000000000000000").unwrap();
    let bad = cvfmri(&["fit", "--data", p(&junk), "--out", p(&out)]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("magic"));

    let sim = dir.path().join("sim");
    ok(&["simulate", "--study", "iid", "--seed", "1", "--T", "80", "--out", p(&sim)]);
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "# typo\npsy = 0.1\n").unwrap();
    let typo = cvfmri(&["fit", "--data", p(&sim.join("data.cvf")), "--config", p(&conf), "--out", p(&out)]);
    assert_eq!(typo.status.code(), Some(2));

    let g = cvfmri(&["fit", "--data", p(&sim.join("data.cvf")), "--G", "0", "--out", p(&out)]);
    assert_eq!(g.status.code(), Some(2));

    let usage = cvfmri(&["fit"]);
    assert!(!usage.status.success());
}

#[test]
fn simulate_is_deterministic_in_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["simulate", "--study", "ar1", "--seed", "3", "--T", "80", "--out", p(&a)]);
    ok(&["simulate", "--study", "ar1", "--seed", "3", "--T", "80", "--out", p(&b)]);
    for f in ["data.cvf", "truth_activation.csv", "truth_magnitude.csv", "fit.conf"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}
