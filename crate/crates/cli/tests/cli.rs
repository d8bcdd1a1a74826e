use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hwsim_cli::commands::{fig2_cutoff, fig2_cutoffs, parse_grid, threshold_crossing};
use hwsim_cli::table::{parse, CsvTable, SCHEMA_LINE};
use hwsim_cli::Manifest;

const FIG1_CFG: &str = "h=4\nd=1\ntheta=0.4\nbeta=3\npi_g=0.025\npi_h_given_gc=0.5\ninfectious_period=constant\nn=200\n";

fn hwsim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hwsim"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = hwsim(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    parse(&fs::read_to_string(path).unwrap()).unwrap()
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

#[test]
fn every_output_is_versioned_and_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("c.txt"), FIG1_CFG).unwrap();
    for (cmd, out) in [
        (vec!["generate"], "g"),
        (vec!["simulate", "--runs", "50"], "s"),
        (vec!["census"], "ce"),
        (vec!["tables", "--fine", "--library-size", "2000"], "t"),
        (vec!["analyze"], "a"),
        (vec!["sweep", "--theta", "0.1,0.3", "--d", "1", "--laws", "constant"], "sw"),
    ] {
        let mut args = cmd.clone();
        args.extend(["-c", "c.txt", "-o", out]);
        ok(&args, d);
        let m = Manifest::load(&d.join(out).join("manifest.json")).unwrap();
        assert_eq!(m.subcommand, cmd[0]);
        assert_eq!(m.argv[0], cmd[0]);
        assert!(m.config.as_deref().unwrap().contains("theta=0.4"));
        assert!(!m.outputs.is_empty());
        for (name, hash) in &m.outputs {
            let text = fs::read_to_string(d.join(out).join(name)).unwrap();
            if name.ends_with(".csv") {
                assert!(text.starts_with(&format!("{SCHEMA_LINE}\n")), "{name}");
                assert!(!text.contains('\r'));
            }
            assert_eq!(*hash, hwsim_cli::manifest::sha256_file(&d.join(out).join(name)).unwrap());
        }
    }
}

#[test]
fn simulate_columns_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("c.txt"), FIG1_CFG).unwrap();
    ok(&["simulate", "-c", "c.txt", "-o", "s", "--runs", "300", "--cutoff", "20"], d);
    let (h, rows) = read_csv(&d.join("s/runs.csv"));
    assert_eq!(h, ["run", "n", "final_size", "severity", "initial", "major"]);
    assert_eq!(rows.len(), 300);
    let majors = rows.iter().filter(|r| r[5] == "1").count();
    for r in &rows {
        let z: usize = r[2].parse().unwrap();
        assert_eq!(r[5] == "1", z >= 20);
    }
    let (h, s) = read_csv(&d.join("s/summary.csv"));
    assert_eq!(s[0][col(&h, "major")], majors.to_string());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(hwsim(&["simulate", "-o", "x"], d).status.code(), Some(2));
    fs::write(d.join("bad.txt"), "h=4\nd=1\n").unwrap();
    assert_eq!(hwsim(&["analyze", "-c", "bad.txt", "-o", "x"], d).status.code(), Some(2));
    fs::write(d.join("odd.txt"), "h=4\nd=2\ntheta=0.1\nbeta_h=1\nbeta_w=1\nbeta_g=0\nn=12\n").unwrap();
    assert_eq!(hwsim(&["simulate", "-c", "odd.txt", "-o", "x"], d).status.code(), Some(2));
    assert_eq!(hwsim(&["fig1", "-o", "x", "--bogus"], d).status.code(), Some(2));

    // no run ever reaches the cutoff, so the major-outbreak sampler gives up
    fs::write(d.join("low.txt"), "h=4\nd=1\ntheta=0.1\nbeta=0.2\npi_g=0.1\npi_h_given_gc=0.5\n").unwrap();
    let out = hwsim(
        &["fig2", "-c", "low.txt", "-o", "x", "--d", "1", "--n", "960", "--rho-runs", "10", "--majors", "1"],
        d,
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn fig1_with_no_runs_writes_headers() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["fig1", "-o", "f", "--n-sims", "0"], dir.path());
    for k in 1..=4 {
        let text = fs::read_to_string(dir.path().join(format!("f/fig1_panel{k}.csv"))).unwrap();
        assert_eq!(text, "#schema=v1\nrun,n,theta,final_size,fraction\n");
    }
}

#[test]
fn fig1_panels() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["fig1", "-o", "f", "--n-sims", "100"], dir.path());
    let expected = [("0.075", "1000"), ("0.4", "1000"), ("0.4", "600"), ("0.4", "200")];
    for (k, (theta, n)) in expected.iter().enumerate() {
        let (_, rows) = read_csv(&dir.path().join(format!("f/fig1_panel{}.csv", k + 1)));
        assert_eq!(rows.len(), 100);
        assert!(rows.iter().all(|r| r[1] == *n && r[2] == *theta));
    }
}

#[test]
fn fig2_adjusts_n_and_keeps_limits_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        &["fig2", "-o", "f", "--d", "1,3", "--n", "240,250", "--rho-runs", "200", "--majors", "20"],
        dir.path(),
    );
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning: n=250 is not a multiple of w=4; using n=248"), "{err}");
    assert!(err.contains("n=250 is not a multiple of w=12; using n=240"));
    let (h, rows) = read_csv(&dir.path().join("f/fig2.csv"));
    let (n, d, cut) = (col(&h, "n"), col(&h, "d"), col(&h, "cutoff"));
    let got: Vec<(&str, &str, &str)> = rows.iter().map(|r| (r[n].as_str(), r[d].as_str(), r[cut].as_str())).collect();
    assert_eq!(got, [("240", "1", "75"), ("248", "1", "6"), ("240", "3", "50"), ("240", "3", "50")]);
    for dd in ["1", "3"] {
        let block: Vec<&Vec<String>> = rows.iter().filter(|r| r[d] == dd).collect();
        for c in ["rho_analytic", "z_analytic"] {
            assert!(block.iter().all(|r| r[col(&h, c)] == block[0][col(&h, c)]));
        }
    }
}

#[test]
fn fig2_cutoff_table() {
    let grid = fig2_cutoffs();
    assert_eq!(grid.len(), 3);
    assert!(grid.values().all(|v| v.len() == 9));
    let d3: Vec<usize> = grid[&3].iter().map(|&(n, _)| n).collect();
    assert_eq!(d3, [120, 240, 480, 960, 1440, 1920, 2556, 3204, 3840]);
    assert!(grid[&3].iter().all(|&(n, _)| n % 12 == 0));
    assert_eq!([fig2_cutoff(1, 120), fig2_cutoff(1, 240), fig2_cutoff(1, 480)], [36, 75, 150]);
    assert_eq!([fig2_cutoff(2, 120), fig2_cutoff(2, 240), fig2_cutoff(2, 480)], [50, 100, 150]);
    assert_eq!([fig2_cutoff(3, 120), fig2_cutoff(3, 240), fig2_cutoff(3, 480)], [25, 50, 100]);
    assert!(grid.iter().all(|(_, v)| v.iter().all(|&(n, c)| n <= 480 || c == 200)));
    assert_eq!(fig2_cutoff(1, 5000), 200);
}

#[test]
fn replay_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("c.txt"), FIG1_CFG).unwrap();
    ok(&["--threads", "2", "simulate", "--config=c.txt", "--out=s", "--runs", "64"], d);
    let out = ok(&["--threads", "1", "replay", "s/manifest.json", "-o", "r"], d);
    assert!(String::from_utf8_lossy(&out.stdout).contains("runs.csv: identical"));
    let replayed = Manifest::load(&d.join("r/manifest.json")).unwrap();
    assert_eq!(replayed.threads, 1);
    assert!(replayed.argv.contains(&"r".to_string()));
    assert!(!replayed.argv.iter().any(|a| a.contains("threads")));

    // the config file changing afterwards does not matter: the snapshot is used
    fs::write(d.join("c.txt"), FIG1_CFG.replace("theta=0.4", "theta=0.9")).unwrap();
    ok(&["replay", "s/manifest.json", "-o", "r2"], d);

    let mut m = Manifest::load(&d.join("s/manifest.json")).unwrap();
    m.outputs.insert("runs.csv".into(), "0".repeat(64));
    m.write(&d.join("s")).unwrap();
    assert_eq!(hwsim(&["replay", "s/manifest.json", "-o", "r3"], d).status.code(), Some(1));
}

#[test]
fn grids_and_thresholds() {
    let g = parse_grid("0:0.05:1").unwrap();
    assert_eq!(g.len(), 21);
    assert_eq!(g[0], 0.0);
    assert_eq!(g[7], 0.35);
    assert_eq!(g[20], 1.0);
    assert_eq!(parse_grid("0.1, 0.4").unwrap(), [0.1, 0.4]);
    assert!(parse_grid("1:0:2").is_err());
    assert!(parse_grid("a,b").is_err());

    assert_eq!(threshold_crossing(&[(0.0, 0.5), (0.1, 0.8)]), None);
    // 1/R* goes 2 -> 0.5, crossing 1 a third of the way
    let t = threshold_crossing(&[(0.0, 0.2), (0.1, 0.5), (0.2, 2.0), (0.3, f64::INFINITY)]).unwrap();
    assert!((t - (0.1 + 0.1 / 1.5)).abs() < 1e-12);
    let t = threshold_crossing(&[(0.0, 0.5), (0.1, f64::INFINITY)]).unwrap();
    assert!((t - 0.05).abs() < 1e-12);
}

#[test]
fn schema_parsing() {
    let mut t = CsvTable::new(&["a", "b"]);
    t.row(&["1".into(), "2".into()]);
    let (h, rows) = parse(t.as_str()).unwrap();
    assert_eq!(h, ["a", "b"]);
    assert_eq!(rows, [["1", "2"]]);
    assert!(parse("#schema=v2\na,b\n").is_err());
    assert!(parse("a,b\n1,2\n").is_err());
    assert!(parse("#schema=v1\na,b\n1\n").is_err());
}

#[test]
fn analyze_quantity_selects_columns() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("c.txt"), FIG1_CFG.replace("constant", "exponential")).unwrap();
    ok(&["analyze", "-c", "c.txt", "-o", "a", "--quantity", "rstar", "--mc-samples", "5000"], d);
    let (h, rows) = read_csv(&d.join("a/analysis.csv"));
    let r = &rows[0];
    assert_eq!(r[col(&h, "n_mc")], "5000");
    assert!(!r[col(&h, "R_L")].is_empty() && !r[col(&h, "R_star")].is_empty());
    assert!(r[col(&h, "z")].is_empty() && r[col(&h, "rho")].is_empty());
    ok(&["analyze", "-c", "c.txt", "-o", "b", "--quantity", "z", "--n-mc", "5000"], d);
    let (h, rows) = read_csv(&d.join("b/analysis.csv"));
    assert!(!rows[0][col(&h, "z")].is_empty() && rows[0][col(&h, "rho")].is_empty());
}
