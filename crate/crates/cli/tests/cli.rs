use std::path::Path;
use std::process::{Command, Output};

fn murmur(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_murmur"))
        .args(args)
        .current_dir(dir)
        .env_remove("MURMUR_WORKERS")
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn summary_field(o: &Output, key: &str) -> f64 {
    let text = stdout(o);
    let token = text
        .split_whitespace()
        .find_map(|t| t.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"));
    token.parse().unwrap()
}

#[test]
fn density_ils_vanishes_below_the_support() {
    let dir = tempfile::tempdir().unwrap();
    let o = murmur(
        dir.path(),
        &["density-ils", "--phi", "bump", "1", "2", "--sign", "+1", "--out", "ils"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let edge = 1.0 / (16.0 * std::f64::consts::PI.powi(2));
    let data = rows(&dir.path().join("ils.csv"));
    assert_eq!(data.len(), 1000);
    assert!(data.iter().any(|r| r[1] > 0.0));
    for r in &data {
        if r[0] < edge {
            assert_eq!(r[1], 0.0, "y={}", r[0]);
        }
    }
    let head = std::fs::read_to_string(dir.path().join("ils.csv")).unwrap();
    assert!(head.starts_with("y,value\n"));
}

#[test]
fn dirichlet_writes_one_row_per_bin() {
    let dir = tempfile::tempdir().unwrap();
    let o = murmur(
        dir.path(),
        &[
            "dirichlet",
            "--x",
            "100000",
            "--phi",
            "indicator",
            "1",
            "2",
            "--sign",
            "+1",
            "--bins",
            "100",
            "--plot",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("murmur.csv")).unwrap();
    assert!(text.starts_with("y,value,count\n"));
    assert_eq!(rows(&dir.path().join("murmur.csv")).len(), 100);
    let svg = std::fs::read_to_string(dir.path().join("murmur.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn petersson_minus_class_peaks_negative() {
    let dir = tempfile::tempdir().unwrap();
    let o = murmur(dir.path(), &["petersson", "--k-window", "40", "80", "--sign", "-1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(summary_field(&o, "peak_value") < 0.0);
    let plus = murmur(dir.path(), &["petersson", "--k-window", "40", "80", "--sign", "+1"]);
    assert!(summary_field(&plus, "peak_value") > 0.0);
}

#[test]
fn density_nu_emits_atoms_first() {
    let dir = tempfile::tempdir().unwrap();
    let o = murmur(
        dir.path(),
        &["density-nu", "--e", "4", "5", "--q-max", "50", "--out", "nu"],
    );
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("nu.csv")).unwrap();
    let first = text.lines().next().unwrap();
    assert_eq!(first, "#atom 4.0 1.3333333333333333");
}

#[test]
fn old_kernel_pairings_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = murmur(
        dir.path(),
        &["old-kernel", "--parity", "both", "--theta", "0.5", "--out", "k"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Inside (−1, 1) both kernels pair to φ̂(0) + ½∫φ̂.
    assert_eq!(summary_field(&o, "even_pairing"), summary_field(&o, "odd_pairing"));
    assert!(dir.path().join("k.csv").exists() && dir.path().join("k.odd.csv").exists());
}

const FIXTURE: &str = "#murmur-family v1\r\nlabel,conductor,root_number\r\na,11,-1\r\nb,14,1\r\nc,15,1\r\n\r\nlabel,p,ap\r\na,2,-2\r\na,3,-1\r\nb,2,-1\r\nb,3,-2\r\nc,2,-1\r\nc,3,0\r\n";

#[test]
fn ingest_run_and_canonical_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("fam.csv"), FIXTURE).unwrap();
    let o = murmur(
        dir.path(),
        &[
            "ingest-run",
            "--input",
            "fam.csv",
            "--x",
            "10",
            "--phi",
            "indicator",
            "1",
            "2",
            "--sign",
            "+1",
            "--bins",
            "1",
            "--y-range",
            "0.1",
            "0.35",
            "--canonical",
            "canon.csv",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let data = rows(&dir.path().join("murmur.csv"));
    // Bin over p = 2, 3 with the two root-number +1 records: ((−1 + −1) + (−2 + 0)) / 4.
    assert_eq!(data.len(), 1);
    assert!((data[0][0] - 0.225).abs() < 1e-15);
    assert_eq!(&data[0][1..], &[-1.0, 2.0]);
    let canon = std::fs::read_to_string(dir.path().join("canon.csv")).unwrap();
    assert_eq!(canon, FIXTURE.replace("\r\n", "\n"));
}

#[test]
fn exit_codes_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let code = |args: &[&str]| murmur(d, args).status.code().unwrap();
    assert_eq!(code(&["dirichlet", "--x", "100", "--bins", "0"]), 1);
    assert_eq!(code(&["no-such-command"]), 1);
    assert_eq!(code(&["dirichlet"]), 1);
    assert_eq!(code(&["density-ils", "--phi", "wedge", "1", "2"]), 1);
    assert_eq!(code(&["ingest-run", "--input", "missing.csv", "--x", "10"]), 2);
    std::fs::write(
        d.join("bad.csv"),
        "#murmur-family v1\nlabel,conductor,root_number\na,11,0\n",
    )
    .unwrap();
    assert_eq!(code(&["ingest-run", "--input", "bad.csv", "--x", "10"]), 2);
    std::fs::write(
        d.join("thin.csv"),
        "#murmur-family v1\nlabel,conductor,root_number\na,11,1\n\na,2,1\n",
    )
    .unwrap();
    assert_eq!(
        code(&[
            "ingest-run",
            "--input",
            "thin.csv",
            "--x",
            "10",
            "--y-range",
            "0.1",
            "0.5"
        ]),
        2
    );
    assert_eq!(
        code(&[
            "petersson",
            "--k-window",
            "40",
            "80",
            "--sign",
            "-1",
            "--tail-tol",
            "1e-300",
            "--max-cutoff",
            "2000"
        ]),
        3
    );
    assert_eq!(code(&["petersson", "--k-window", "4", "6", "--sign", "-1"]), 4);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["dirichlet", "--x", "20000", "--phi", "bump", "0.5", "2", "--bins", "50"];
    let mut outputs = Vec::new();
    for workers in ["1", "3", "8"] {
        let o = Command::new(env!("CARGO_BIN_EXE_murmur"))
            .args(args)
            .args(["--out", &format!("w{workers}")])
            .current_dir(dir.path())
            .env("MURMUR_WORKERS", workers)
            .output()
            .unwrap();
        assert!(o.status.success());
        for tag in ["", ".minus"] {
            outputs.push((
                tag,
                std::fs::read(dir.path().join(format!("w{workers}{tag}.csv"))).unwrap(),
            ));
        }
    }
    assert_eq!(outputs[0], outputs[2]);
    assert_eq!(outputs[0], outputs[4]);
    assert_eq!(outputs[1], outputs[3]);
    assert_eq!(outputs[1], outputs[5]);

    let bad = Command::new(env!("CARGO_BIN_EXE_murmur"))
        .args(args)
        .current_dir(dir.path())
        .env("MURMUR_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["petersson", "--k-window", "40", "60", "--sign", "+1", "--plot"],
        vec!["symsq", "--k-window", "40", "60"],
        vec!["density-nu", "--e", "1/2", "50", "--q-max", "100"],
    ] {
        let mut files = Vec::new();
        for run in ["a", "b"] {
            let mut full = args.clone();
            full.extend(["--out", run]);
            let o = murmur(dir.path(), &full);
            assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
            files.push(std::fs::read(dir.path().join(format!("{run}.csv"))).unwrap());
        }
        assert_eq!(files[0], files[1], "{args:?}");
    }
}
