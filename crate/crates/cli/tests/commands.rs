use std::fs;
use std::path::Path;
use std::process::Command;

use nwkernel::io::parse_matrix_csv;
use nwkernel_cli::{run, EXIT_BUDGET, EXIT_INPUT, EXIT_OK, EXIT_PSD_FAIL};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(
        std::iter::once("nwkernel").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn lines(s: &str) -> Vec<&str> {
    s.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn nw_reproduces_worked_examples() {
    let plain = cli(&["nw", "--r", "2,5,3", "--c", "5,1,4"]);
    assert_eq!(plain.code, EXIT_OK);
    assert_eq!(plain.stdout, "[[2,0,0],[3,1,1],[0,0,3]]\n");

    let permuted = cli(&[
        "nw",
        "--r",
        "2,5,3",
        "--c",
        "5,1,4",
        "--sigma",
        "3,1,2",
        "--sigma-prime",
        "3,2,1",
    ]);
    assert_eq!(permuted.stdout, "[[0,1,1],[5,0,0],[0,0,3]]\n");

    let identity = cli(&[
        "nw",
        "--r",
        "2,5,3",
        "--c",
        "5,1,4",
        "--sigma",
        "(1,2,3)",
        "--sigma-prime",
        "1,2,3",
    ]);
    assert_eq!(identity.stdout, plain.stdout);
}

#[test]
fn nw_reads_pair_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "pair.txt", "# r then c\n[2,5,3]\n[5,1,4]\n");
    let run = cli(&["nw", "--input", &input]);
    assert_eq!(run.stdout, "[[2,0,0],[3,1,1],[0,0,3]]\n");

    let three = write(dir.path(), "three.txt", "1\n1\n1\n");
    let run = cli(&["nw", "--input", &three]);
    assert_eq!(run.code, EXIT_INPUT);
    assert!(run.stderr.contains("exactly two"), "{}", run.stderr);
}

#[test]
fn nw_rejects_bad_input() {
    assert_eq!(cli(&["nw", "--r", "1,2", "--c", "4"]).code, EXIT_INPUT);
    assert_eq!(cli(&["nw", "--r", "1,2", "--c", "2,2"]).code, EXIT_INPUT);
    let run = cli(&[
        "nw",
        "--r",
        "1,2",
        "--c",
        "2,1",
        "--sigma",
        "1,1",
        "--sigma-prime",
        "1,2",
    ]);
    assert_eq!(run.code, EXIT_INPUT);
    assert!(run.stderr.contains("--sigma"), "{}", run.stderr);
    assert_eq!(cli(&["nw", "--r", "1,2"]).code, EXIT_INPUT);
}

#[test]
fn enumerate_examples() {
    let run = cli(&["enumerate", "--r", "7,23", "--c", "12,18"]);
    assert_eq!(run.code, EXIT_OK);
    assert!(run.stdout.starts_with("# count=8\n"));
    assert_eq!(lines(&run.stdout).len(), 8);

    let run = cli(&["enumerate", "--r", "1", "--c", "1"]);
    assert_eq!(lines(&run.stdout), vec!["1"]);

    let run = cli(&["enumerate", "--r", "1,1", "--c", "1,1"]);
    assert_eq!(lines(&run.stdout), vec!["0,1,1,0", "1,0,0,1"]);
}

#[test]
fn enumerate_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tables");
    let run = cli(&[
        "enumerate",
        "--r",
        "7,23",
        "--c",
        "12,18",
        "--budget",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.code, EXIT_BUDGET);
    assert!(run.stderr.contains("wrote 5 of 8"), "{}", run.stderr);
    let written = fs::read_to_string(out.join("tables.csv")).unwrap();
    assert_eq!(lines(&written).len(), 5);
}

#[test]
fn gram_volume_with_unit_weights_counts_tables() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "data.txt", "1,1\n2,0\n");
    let weights = write(dir.path(), "ones.txt", "1 1\n1 1\n");
    let out = dir.path().join("out");
    let run = cli(&[
        "gram",
        "--kernel",
        "volume",
        "--input",
        &input,
        "--weights",
        &weights,
        "--weights-mode",
        "weight",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    let (n, values) = parse_matrix_csv(&fs::read_to_string(out.join("gram.csv")).unwrap()).unwrap();
    assert_eq!(n, 2);
    assert_eq!(values, vec![2.0, 1.0, 1.0, 1.0]);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["kernel_id"], "volume");
    assert_eq!(manifest["config"]["seed"], 0);
    assert_eq!(manifest["certificate"]["verdict"], "pass");
    assert_eq!(manifest["dataset_hash"].as_str().unwrap().len(), 64);
    assert!(out.join("certificate.json").exists());
}

#[test]
fn gram_rejects_mixed_mass_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "data.txt", "# dataset\n1,1\n\n2,0\n3,0\n");
    let weights = write(dir.path(), "w.txt", "mode: weight\n1 1\n1 1\n");
    let run = cli(&[
        "gram",
        "--input",
        &input,
        "--weights",
        &weights,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(run.code, EXIT_INPUT);
    assert!(run.stderr.contains("line 5"), "{}", run.stderr);
    assert!(run.stderr.contains("Σ_d^N"), "{}", run.stderr);
}

#[test]
fn gram_reports_parse_errors_and_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let weights = write(dir.path(), "w.txt", "mode: weight\n1 1\n1 1\n");

    let bad = write(dir.path(), "bad.txt", "1,1\n1,x\n");
    let run = cli(&["gram", "--input", &bad, "--weights", &weights, "--out", out]);
    assert_eq!(run.code, EXIT_INPUT);
    assert!(run.stderr.contains("line 2"), "{}", run.stderr);

    let wide = write(dir.path(), "wide.txt", "1,1,0\n0,1,1\n");
    let run = cli(&[
        "gram",
        "--input",
        &wide,
        "--weights",
        &weights,
        "--out",
        out,
    ]);
    assert_eq!(run.code, EXIT_INPUT);
    assert!(run.stderr.contains("dimension 3"), "{}", run.stderr);

    let good = write(dir.path(), "good.txt", "1,1\n2,0\n");
    let headerless = write(dir.path(), "h.txt", "1 1\n1 1\n");
    let run = cli(&[
        "gram",
        "--input",
        &good,
        "--weights",
        &headerless,
        "--out",
        out,
    ]);
    assert_eq!(run.code, EXIT_INPUT);
}

#[test]
fn gram_replays_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "data.txt",
        "3,0,1,2\n1,1,1,3\n0,0,6,0\n2,2,2,0\n",
    );
    let weights = write(
        dir.path(),
        "cost.txt",
        "mode: cost\n0 1 2 3\n1 0 1 2\n2 1 0 1\n3 2 1 0\n",
    );
    let first = dir.path().join("first");
    let run = cli(&[
        "gram",
        "--kernel",
        "nw",
        "--seed",
        "7",
        "--r-size",
        "8",
        "--input",
        &input,
        "--weights",
        &weights,
        "--out",
        first.to_str().unwrap(),
    ]);
    assert!(
        run.code == EXIT_OK || run.code == EXIT_PSD_FAIL,
        "{}",
        run.stderr
    );

    let replay = dir.path().join("replay");
    let manifest = first.join("manifest.json");
    let again = cli(&[
        "gram",
        "--manifest",
        manifest.to_str().unwrap(),
        "--out",
        replay.to_str().unwrap(),
    ]);
    assert_eq!(again.code, run.code);
    for file in ["gram.csv", "manifest.json", "certificate.json"] {
        assert_eq!(
            fs::read(first.join(file)).unwrap(),
            fs::read(replay.join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn gram_seed_changes_nw_gram() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "data.txt",
        "3,0,1,2,0\n1,1,1,3,0\n0,0,6,0,0\n2,2,0,0,2\n",
    );
    let weights = write(
        dir.path(),
        "cost.txt",
        "mode: cost\n0 1 2 3 4\n1 0 1 2 3\n2 1 0 1 2\n3 2 1 0 1\n4 3 2 1 0\n",
    );
    let gram = |seed: &str| {
        let out = dir.path().join(seed);
        cli(&[
            "gram",
            "--seed",
            seed,
            "--r-size",
            "4",
            "--input",
            &input,
            "--weights",
            &weights,
            "--out",
            out.to_str().unwrap(),
        ]);
        fs::read_to_string(out.join("gram.csv")).unwrap()
    };
    assert_ne!(gram("1"), gram("2"));
}

#[test]
fn psd_check_on_gram_and_weights() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.csv", "2,1\n1,1\n");
    let run = cli(&["psd-check", "--input", &good]);
    assert_eq!(run.code, EXIT_OK);
    let cert: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(cert["verdict"], "pass");

    let bad = write(dir.path(), "bad.csv", "1,2\n2,1\n");
    let out = dir.path().join("cert");
    let run = cli(&["psd-check", "--input", &bad, "--out", out.to_str().unwrap()]);
    assert_eq!(run.code, EXIT_PSD_FAIL);
    let cert: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["verdict"], "fail");
    assert!((cert["min_eigenvalue"].as_f64().unwrap() + 1.0).abs() < 1e-12);

    let skew = write(dir.path(), "skew.csv", "1,0.5\n0.4,1\n");
    assert_eq!(cli(&["psd-check", "--input", &skew]).code, EXIT_INPUT);

    let weights = write(dir.path(), "w.txt", "mode: weight\n1 0.5\n0.5 1\n");
    assert_eq!(cli(&["psd-check", "--weights", &weights]).code, EXIT_OK);
    let weights = write(dir.path(), "w2.txt", "mode: weight\n1 2\n2 1\n");
    assert_eq!(
        cli(&["psd-check", "--weights", &weights]).code,
        EXIT_PSD_FAIL
    );
}

#[test]
fn ot_total_variation() {
    let dir = tempfile::tempdir().unwrap();
    let weights = write(dir.path(), "tv.txt", "mode: cost\n0 1 1\n1 0 1\n1 1 0\n");
    let run = cli(&["ot", "--r", "3,1,0", "--c", "0,1,3", "--weights", &weights]);
    assert_eq!(run.code, EXIT_OK, "{}", run.stderr);
    assert!(run.stdout.starts_with("cost 3\n"), "{}", run.stdout);
    assert!(run.stdout.contains("plan [["));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(cli(&["frobnicate"]).code, EXIT_INPUT);
    assert_eq!(cli(&["gram", "--kernel", "volume"]).code, EXIT_INPUT);
    assert_eq!(
        cli(&["gram", "--kernel", "mystery", "--out", "x"]).code,
        EXIT_INPUT
    );
    assert_eq!(cli(&["--help"]).code, EXIT_OK);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_nwkernel");
    let status = Command::new(bin)
        .args(["nw", "--r", "2,5,3", "--c", "5,1,4"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&status.stdout),
        "[[2,0,0],[3,1,1],[0,0,3]]\n"
    );

    let status = Command::new(bin)
        .args(["enumerate", "--r", "7,23", "--c", "12,18", "--budget", "2"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
}
