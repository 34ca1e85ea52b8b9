mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use elastic_tr::io;
use elastic_tr::phantom::{make_phantom, PhantomKind};

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn run_cfg(cmd: &str, cfg: &Path, out: &Path) -> Output {
    run(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn key_value(path: &Path, key: &str) -> String {
    csv_rows(path)
        .into_iter()
        .find(|r| r[0] == key)
        .map(|r| r[1].clone())
        .unwrap()
}

#[test]
fn forward_writes_three_files_and_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.toml", &cli_config(64, 1.0, BUMP_PHANTOM));
    let out = tmp.path().join("out");
    let o = run_cfg("forward", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["energy.csv", "final_state.ews", "manifest.toml", "trace.ebt"]);

    let manifest: toml::Table = std::fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap();
    let resolved = manifest["resolved"].as_table().unwrap();
    for key in ["cfl", "dt", "t_final"] {
        assert!(resolved.contains_key(key), "manifest lacks {key}");
    }
    assert_eq!(resolved["t_final"].as_float(), Some(1.0));
    // every output is hashed
    let outputs = manifest["outputs"].as_table().unwrap();
    let bytes = std::fs::read(out.join("trace.ebt")).unwrap();
    assert_eq!(outputs["trace.ebt"].as_str().unwrap(), elastic_tr::cli::sha256_hex(&bytes));
}

#[test]
fn cfl_violation_exits_2_naming_dt() {
    let tmp = tempfile::tempdir().unwrap();
    let text = cli_config(64, 1.0, BUMP_PHANTOM).replace("cfl = 0.5", "cfl = 0.5\ndt = 0.05");
    let cfg = write(tmp.path(), "run.toml", &text);
    let o = run_cfg("forward", &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("solver.dt"), "{}", stderr(&o));
}

#[test]
fn configuration_problems_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        (cli_config(64, 1.0, "").replace("mu = 1.0", "mu = 1.0\nrho = 2.0"), "medium.rho"),
        (cli_config(64, 1.0, ""), "phantom"),
        (cli_config(64, 1.0, "").replace("omega_radius = 1.0", "omega_radius = 0.5"), "domain.omega0"),
        (cli_config(64, 1.0, "").replace("t_final = 1", "t_final = -1"), "solver.t_final"),
        (cli_config(64, 1.0, "[phantom]\nkind = \"star\"\n"), "phantom.kind"),
        ("[grid\n".to_string(), "config"),
    ];
    for (text, key) in cases {
        let cfg = write(tmp.path(), "bad.toml", &text);
        let o = run_cfg("forward", &cfg, &out);
        assert_eq!(o.status.code(), Some(2), "{key}: {}", stderr(&o));
        assert!(stderr(&o).contains(key), "expected `{key}` in: {}", stderr(&o));
    }
    let o = run(&["forward", "--config", tmp.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    // clap usage errors share the code
    assert_eq!(run(&["forward"]).status.code(), Some(2));
}

#[test]
fn missing_trace_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "run.toml",
        &cli_config(64, 1.0, "[reconstruction]\ntrace = \"nowhere.ebt\"\n"),
    );
    let o = run_cfg("reconstruct", &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("reconstruction.trace"));
}

#[test]
fn zero_trace_gives_zero_field_in_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let zero_phantom = BUMP_PHANTOM.replace("[[1.0, 0.5]]", "[[0.0, 0.0]]");
    let cfg = write(tmp.path(), "fwd.toml", &cli_config(48, 0.8, &zero_phantom).replace("n = 48", "n = 64"));
    let fwd = tmp.path().join("fwd");
    assert!(run_cfg("forward", &cfg, &fwd).status.success());

    let rec = write(
        tmp.path(),
        "rec.toml",
        &cli_config(64, 0.8, "[reconstruction]\ntrace = \"fwd/trace.ebt\"\n"),
    );
    let out = tmp.path().join("rec");
    let o = run_cfg("reconstruct", &rec, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out.join("report.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
    let (g, _) = disk(64, 0.6);
    let f = io::decode_field(&std::fs::read(out.join("terminal.ewf")).unwrap(), &g).unwrap();
    assert_eq!(f.max_abs(), 0.0);
}

#[test]
fn disk_benchmark_error_column_decreases_geometrically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/disk128.toml");
    let out = tmp.path().join("out");
    let o = run_cfg("reconstruct", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&out.join("report.csv"));
    assert_eq!(rows.len(), 9);
    let err: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(err.windows(2).all(|w| w[1] < w[0]), "{err:?}");
    assert!(*err.last().unwrap() <= 0.02);
    let ratios: Vec<f64> = rows[1..].iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(ratios.iter().all(|r| *r < 1.0), "{ratios:?}");
    // the timing column stays zero unless requested
    assert!(rows.iter().all(|r| r[5].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn below_visibility_time_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "run.toml",
        &cli_config(64, 0.2, &format!("{BUMP_PHANTOM}\n[reconstruction]\nmax_iters = 40\ntol = 1e-14\n")),
    );
    let o = run_cfg("reconstruct", &cfg, &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("no progress"));
}

#[test]
fn visibility_certificates_through_files() {
    let tmp = tempfile::tempdir().unwrap();
    for (t, verdict) in [(1.1, "pass"), (0.5, "fail")] {
        let cfg = write(tmp.path(), "run.toml", &cli_config(64, t, "[visibility]\ndump_rays = true\n"));
        let out = tmp.path().join(format!("vis_{t}"));
        let o = run_cfg("visibility", &cfg, &out);
        assert!(o.status.success(), "{}", stderr(&o));
        let cert = out.join("certificate.csv");
        assert_eq!(key_value(&cert, "verdict"), verdict);
        let sharp: f64 = key_value(&cert, "sharp_t_estimate").parse().unwrap();
        assert!((sharp - 1.0).abs() < 1e-2);
        // the worst sample is the center of the disk
        let origin: Vec<f64> = key_value(&cert, "worst_origin")
            .split(' ')
            .map(|x| x.parse().unwrap())
            .collect();
        assert!(origin.iter().all(|x| x.abs() < 1e-12));
        assert!(csv_rows(&out.join("rays.csv")).len() > 100);
    }
}

#[test]
fn oracle_reports_contraction() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/oracle.toml");
    let out = tmp.path().join("out");
    let o = run_cfg("oracle", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let norm: f64 = key_value(&out.join("oracle.csv"), "h_norm").parse().unwrap();
    assert!(norm < 0.999, "{norm}");
    let lambda = std::fs::read_to_string(out.join("lambda_hat.csv")).unwrap();
    let unknowns: usize = key_value(&out.join("oracle.csv"), "unknowns").parse().unwrap();
    assert_eq!(lambda.lines().next().unwrap().split(',').count(), unknowns);

    let big = write(tmp.path(), "big.toml", &cli_config(64, 1.0, ""));
    let o = run_cfg("oracle", &big, &tmp.path().join("big"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("grid.n"));
}

#[test]
fn sweep_is_independent_of_job_count() {
    let tmp = tempfile::tempdir().unwrap();
    let text = format!(
        "{}\n[sweep]\ncommand = \"forward\"\nkey = \"solver.t_final\"\nvalues = [0.4, 0.8, 1.2]\n",
        cli_config(64, 1.0, BUMP_PHANTOM)
    );
    let cfg = write(tmp.path(), "sweep.toml", &text);
    let mut summaries = Vec::new();
    for jobs in ["1", "3"] {
        let out = tmp.path().join(format!("jobs{jobs}"));
        let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--jobs", jobs]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(out.join("sweep_002/trace.ebt").exists());
        summaries.push(std::fs::read(out.join("sweep.csv")).unwrap());
    }
    assert_eq!(summaries[0], summaries[1]);
    let rows = csv_rows(&tmp.path().join("jobs1/sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[2] == "0"));
}

#[test]
fn file_inputs_are_read_and_hashed() {
    let tmp = tempfile::tempdir().unwrap();
    let (g, dom) = disk(64, 0.6);
    let f = make_phantom(&PhantomKind::Bumps(vec![compact([0.0, 0.1], 0.3, [0.5, 1.0])]), &dom).unwrap();
    std::fs::write(tmp.path().join("f.ewf"), io::encode_field(&f)).unwrap();
    let mu: Vec<f64> = (0..g.len()).map(|i| 1.0 + 0.1 * g.point(i)[0].powi(2)).collect();
    std::fs::write(tmp.path().join("mu.ewf"), io::encode_scalar(&g, &mu)).unwrap();

    let text = cli_config(
        64,
        1.0,
        "[phantom]\nkind = \"file\"\nfile = \"f.ewf\"\n\n[reconstruction]\nground_truth = \"f.ewf\"\nmax_iters = 2\n",
    )
    .replace("mu = 1.0", "mu_file = \"mu.ewf\"");
    let cfg = write(tmp.path(), "run.toml", &text);
    let out = tmp.path().join("out");
    let o = run_cfg("reconstruct", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest: toml::Table = std::fs::read_to_string(out.join("manifest.toml")).unwrap().parse().unwrap();
    let inputs = manifest["inputs"].as_table().unwrap();
    assert!(inputs.keys().any(|k| k.ends_with("mu.ewf")));
    assert!(inputs.keys().any(|k| k.ends_with("f.ewf")));
    let rows = csv_rows(&out.join("report.csv"));
    assert!(rows.iter().all(|r| !r[2].is_empty()));

    // a raw field on the wrong grid is a configuration error
    std::fs::write(tmp.path().join("mu.ewf"), io::encode_scalar(&disk(32, 0.6).0, &vec![1.0; 32 * 32])).unwrap();
    let o = run_cfg("reconstruct", &cfg, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("medium.mu_file"));
}
