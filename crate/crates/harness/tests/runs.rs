use std::fs;
use std::process::Command;

use sic_harness::{run_complexity, run_convergence, run_decoding, run_sweep, RunOutput, Scenario};

fn small(extra: &str) -> Scenario {
    Scenario::parse(&format!(
        "tag = t\nsinr_db = -10, 0\nframes = 24\nrealizations = 3\nworkers = 1\n\
         algorithms = kalman-cascade-approx, nlms, rls\n{extra}"
    ))
    .unwrap()
}

fn ys(out: &RunOutput, metric: &str, algo: &str, tag: &str) -> Vec<(f64, f64)> {
    out.find(metric, algo, tag)
        .unwrap_or_else(|| panic!("no {metric}_{algo}_{tag}"))
        .points
        .clone()
}

#[test]
fn decoding_without_decoder_reproduces_sweep() {
    let s = small("");
    let sweep = run_sweep(&s).unwrap();
    let dec = run_decoding(&s).unwrap();
    for algo in ["kalman-cascade-approx", "nlms", "rls"] {
        for metric in ["srinr", "sysdist-w", "rate"] {
            assert_eq!(ys(&sweep, metric, algo, "t"), ys(&dec, metric, algo, "t-static-none"), "{metric} {algo}");
        }
    }
    assert_eq!(ys(&sweep, "capacity", "reference", "t"), ys(&dec, "capacity", "reference", "t"));
}

#[test]
fn worker_count_does_not_change_results() {
    let a = run_sweep(&small("")).unwrap();
    let mut s = small("");
    s.workers = 3;
    let b = run_sweep(&s).unwrap();
    assert_eq!(a.series, b.series);
}

#[test]
fn seed_changes_results() {
    let a = run_sweep(&small("")).unwrap();
    let mut s = small("");
    s.seed = 2;
    let b = run_sweep(&s).unwrap();
    assert_ne!(ys(&a, "srinr", "rls", "t"), ys(&b, "srinr", "rls", "t"));
}

#[test]
fn convergence_series_cover_every_frame() {
    let mut s = small("");
    s.sinr_db = vec![-15.0];
    let out = run_convergence(&s).unwrap();
    for algo in ["kalman-cascade-approx", "nlms", "rls"] {
        for metric in ["srinr", "srinr-smoothed", "sysdist-w", "sysdist-a1", "sysdist-a2", "sysdist-a2-smoothed"] {
            let pts = ys(&out, metric, algo, "t");
            let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
            assert_eq!(xs, (1..=24).map(f64::from).collect::<Vec<_>>(), "{metric}");
            assert!(pts.iter().all(|p| p.1.is_finite()));
        }
        let raw = ys(&out, "srinr", algo, "t");
        let smooth = ys(&out, "srinr-smoothed", algo, "t");
        let want = raw[19..24].iter().map(|p| p.1).sum::<f64>() / 5.0;
        assert!((smooth[23].1 - want).abs() < 1e-12);
    }
}

#[test]
fn multiple_sinr_points_get_tagged_convergence_series() {
    let out = run_convergence(&small("")).unwrap();
    assert!(out.find("srinr", "rls", "t-sinr-10").is_some());
    assert!(out.find("srinr", "rls", "t-sinr0").is_some());
}

#[test]
fn sweep_references() {
    let s = small("noise_db = -20\n");
    let out = run_sweep(&s).unwrap();
    assert_eq!(ys(&out, "snr-ceiling", "reference", "t"), vec![(-10.0, 20.0), (0.0, 20.0)]);
    assert_eq!(ys(&out, "min-srinr", "reference", "t"), vec![(-10.0, 0.0), (0.0, 0.0)]);
    assert_eq!(ys(&out, "tin", "reference", "t"), vec![(-10.0, -10.0), (0.0, 0.0)]);
    let cap = ys(&out, "capacity", "reference", "t");
    for algo in ["kalman-cascade-approx", "nlms", "rls"] {
        for (r, c) in ys(&out, "rate", algo, "t").iter().zip(&cap) {
            assert!(r.1 <= c.1 + 1e-9, "{algo} rate {} above capacity {}", r.1, c.1);
        }
    }
}

#[test]
fn complexity_grids_match_scenario() {
    let s = Scenario::parse(
        "tag = c\nalgorithms = nlms, kalman-parallel-full\ncomplexity_l = 4, 8\ncomplexity_r = 8, 16\ncomplexity_n = 1, 2\ncomplexity_frames = 2\n",
    )
    .unwrap();
    let out = run_complexity(&s).unwrap();
    assert_eq!(out.series.len(), 2 * 3 * 2);
    let nlms = ys(&out, "ops", "nlms", "c-vs-l");
    assert_eq!(nlms.iter().map(|p| p.0).collect::<Vec<_>>(), vec![4.0, 8.0]);
    // NLMS per sample: stacked inner product, norm and update, N*L taps each.
    assert!(nlms[1].1 > nlms[0].1);
    let full = ys(&out, "ops", "kalman-parallel-full", "c-vs-r");
    let arith = ys(&out, "ops-arith", "kalman-parallel-full", "c-vs-r");
    for (t, a) in full.iter().zip(&arith) {
        assert!(t.1 > a.1);
    }
}

#[test]
fn cli_writes_named_tsv_files_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("s.scn");
    fs::write(&scn, "tag = cli\nsinr_db = 0\nframes = 8\nrealizations = 2\n").unwrap();
    let out = dir.path().join("out");
    let status = Command::new(env!("CARGO_BIN_EXE_sic"))
        .args(["sweep", "--scenario"])
        .arg(&scn)
        .arg("--out")
        .arg(&out)
        .args(["--seed", "9", "--realizations", "3", "--algo", "nlms,rls"])
        .status()
        .unwrap();
    assert!(status.success());
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for want in ["rate_nlms_cli.tsv", "srinr_rls_cli.tsv", "sysdist-w_rls_cli.tsv", "capacity_reference_cli.tsv", "run.meta"] {
        assert!(names.contains(&want.to_string()), "{want} missing from {names:?}");
    }
    assert!(!names.iter().any(|n| n.contains("kalman")));

    let tsv = fs::read_to_string(out.join("srinr_rls_cli.tsv")).unwrap();
    assert!(!tsv.contains('\r'));
    for line in tsv.lines() {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols.len(), 2, "{line}");
        for c in cols {
            let digits = c.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
            assert!(digits.trim_start_matches('0').len() <= 6, "{c}");
            c.parse::<f64>().unwrap();
        }
    }

    let meta = fs::read_to_string(out.join("run.meta")).unwrap();
    let mut s = Scenario::load(&scn).unwrap();
    s.seed = 9;
    s.realizations = 3;
    s.algorithms = vec![sic_core::canceller::AlgorithmId::Nlms, sic_core::canceller::AlgorithmId::Rls];
    assert!(meta.contains(&format!("scenario_hash\t{}\n", s.hash())), "{meta}");
    assert!(meta.contains("seed\t9\n"));
    assert!(meta.contains("clipped_files\t"));
}

#[test]
fn cli_rejects_unknown_scenario_key() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("bad.scn");
    fs::write(&scn, "tag = x\nspeed = 3\n").unwrap();
    let output = Command::new(env!("CARGO_BIN_EXE_sic"))
        .args(["sweep", "--scenario"])
        .arg(&scn)
        .arg("--out")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("speed") && err.contains("line 2"), "{err}");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn cli_rejects_unknown_algorithm() {
    let output = Command::new(env!("CARGO_BIN_EXE_sic"))
        .args(["complexity", "--algo", "nlms,lms"])
        .output()
        .unwrap();
    assert!(!output.status.success());
}
