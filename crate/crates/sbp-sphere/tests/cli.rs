//! End-to-end checks of the command-line interface: flag resolution, file
//! outputs, manifests, exit codes, and bit-for-bit reproducibility.

use sbp_sphere::cli::{dispatch, RunManifest};
use sbp_sphere::swe;

fn run_cli(args: &[&str]) -> i32 {
    let mut argv = vec!["sbp-sphere"];
    argv.extend_from_slice(args);
    dispatch(argv)
}

#[test]
fn operators_verify_passes_for_every_family() {
    for order in ["21", "42", "63-poly", "63-wave"] {
        let code = run_cli(&["operators", "--order", order, "--n", "16", "--verify"]);
        assert_eq!(code, 0, "verification failed for order {order}");
    }
}

#[test]
fn operators_dump_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ops.csv");
    let code = run_cli(&[
        "operators",
        "--order",
        "42",
        "--n",
        "12",
        "--dump",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("matrix,row,col,value\n"));
    for name in ["dcv,", "dvc,", "pvc,", "pcv,", "hv,", "hc,", "l,", "r,"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "missing {name}");
    }
    let manifest = RunManifest::read(&dir.path().join("ops.manifest.json")).unwrap();
    assert_eq!(manifest.command, "operators");
    assert_eq!(manifest.config.get("n").map(String::as_str), Some("12"));
}

#[test]
fn spectrum_writes_one_eigenvalue_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eigs.csv");
    let code = run_cli(&[
        "spectrum",
        "--order",
        "42",
        "--n",
        "24",
        "--method",
        "sat",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // The second derivative maps the n+1 vertices to themselves.
    assert_eq!(lines.len(), 25);
    for line in lines {
        line.trim().parse::<f64>().expect("eigenvalue line parses as a float");
    }
    assert!(dir.path().join("eigs.manifest.json").is_file());
}

#[test]
fn spectrum_rejects_unknown_method() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("eigs.csv");
    let code = run_cli(&[
        "spectrum",
        "--order",
        "42",
        "--n",
        "8",
        "--method",
        "galerkin",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
}

#[test]
fn grid_dumps_have_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let nc = 12usize;
    // Per panel: (nc+1)² h, nc(nc+1) x1, (nc+1)nc x2, nc² zeta points.
    let points = 6 * ((nc + 1) * (nc + 1) + 2 * nc * (nc + 1) + nc * nc);
    for dump in ["points", "metric"] {
        let out = dir.path().join(format!("{dump}.csv"));
        let code = run_cli(&["grid", "--nc", "12", "--dump", dump, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), points + 1, "{dump} row count");
    }
    let text = std::fs::read_to_string(dir.path().join("points.csv")).unwrap();
    assert!(text.starts_with("panel,i,j,pointset,x,y,z\n"));
    let text = std::fs::read_to_string(dir.path().join("metric.csv")).unwrap();
    assert!(text.starts_with("panel,i,j,pointset,J,Q11,Q12,Q22\n"));
}

#[test]
fn run_writes_snapshots_diagnostics_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let code = run_cli(&[
        "run",
        "--case",
        "gauss1",
        "--order",
        "42",
        "--nc",
        "12",
        "--days",
        "0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    let manifest = RunManifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!(manifest.command, "run");
    assert_eq!(manifest.config.get("case").map(String::as_str), Some("gauss1"));
    for name in &manifest.outputs {
        assert!(out.join(name).is_file(), "missing declared output {name}");
    }

    let snap = swe::read_snapshot(&out.join("h_final.bin")).unwrap();
    assert_eq!(snap.nc, 12);
    assert_eq!(snap.values.len(), 6 * 13 * 13);
    assert!(snap.values.iter().all(|v| v.is_finite()));

    let diag = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let mut lines = diag.lines();
    assert_eq!(lines.next(), Some("t_seconds,mass,energy,tangential_jump"));
    // 9 steps of 2400 s sampled every 6 h: rows at t = 0 and t = 21600.
    assert_eq!(lines.count(), 2);
}

#[test]
fn identical_run_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &std::path::Path| {
        vec![
            "run".to_string(),
            "--case".into(),
            "gauss2".into(),
            "--order".into(),
            "63-wave".into(),
            "--nc".into(),
            "12".into(),
            "--days".into(),
            "0.25".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let argv: Vec<String> = std::iter::once("sbp-sphere".to_string())
            .chain(args(out))
            .collect();
        assert_eq!(dispatch(argv), 0);
    }
    for name in ["h_final.bin", "v1_final.bin", "v2_final.bin", "diagnostics.csv"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn converge_writes_rates_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("study");
    let code = run_cli(&[
        "converge",
        "--case",
        "solid",
        "--order",
        "21",
        "--nc-list",
        "12,24",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(out.join("rates.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "Nc,l2,linf,rate_l2,rate_linf");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("12,"));
    assert!(lines[2].starts_with("24,"));
    // The second row carries the fitted rate between the two grids.
    let fields: Vec<&str> = lines[2].split(',').collect();
    assert!(!fields[3].is_empty() && !fields[4].is_empty());
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.cfg");
    let out = dir.path().join("study");
    std::fs::write(
        &cfg,
        format!(
            "case=solid\norder=21\nnc-list=12,24\nout={}\n",
            out.display()
        ),
    )
    .unwrap();
    // --order overrides the config file's 21.
    let code = run_cli(&["converge", "--config", cfg.to_str().unwrap(), "--order", "42"]);
    assert_eq!(code, 0);
    let manifest = RunManifest::read(&out.join("manifest.json")).unwrap();
    assert_eq!(manifest.config.get("order").map(String::as_str), Some("42"));
    assert_eq!(manifest.config.get("case").map(String::as_str), Some("solid"));
}

#[test]
fn validation_failures_exit_with_code_one() {
    // Unknown flag.
    assert_eq!(run_cli(&["operators", "--orderr", "42", "--n", "8"]), 1);
    // Unknown case.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    assert_eq!(
        run_cli(&["run", "--case", "vortex", "--out", out.to_str().unwrap()]),
        1
    );
    // Missing required option.
    assert_eq!(run_cli(&["spectrum", "--order", "42", "--n", "8"]), 1);
    // Unknown config key.
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "order=42\nn=8\nmystery=1\n").unwrap();
    assert_eq!(
        run_cli(&["operators", "--config", cfg.to_str().unwrap(), "--verify"]),
        1
    );
    // A convergence study of the deliberately under-resolved case is
    // rejected: it has no reference solution.
    assert_eq!(
        run_cli(&[
            "converge",
            "--case",
            "poor:4",
            "--nc-list",
            "12,24",
            "--out",
            out.to_str().unwrap()
        ]),
        1
    );
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(run_cli(&["--help"]), 0);
    assert_eq!(run_cli(&["--version"]), 0);
    assert_eq!(run_cli(&["run", "--help"]), 0);
}
