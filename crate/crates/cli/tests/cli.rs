use std::path::{Path, PathBuf};

use hybeam::experiment::CONFIG_KEYS;
use hybeam_cli::{flag_name, resolve_config, run, EXIT_CONFIG, EXIT_OK};

fn invoke(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("hybeam").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

#[test]
fn golden_sweep_reproduces_committed_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let conf = golden_dir().join("golden.conf");
    let (code, _, err) =
        invoke(&["sweep", "--config", conf.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    for name in ["records.csv", "summary.csv"] {
        let got = std::fs::read(dir.path().join(name)).unwrap();
        let want = std::fs::read(golden_dir().join(name)).unwrap();
        assert!(got == want, "{name} differs from the golden file");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = golden_dir().join("golden.conf");
    let (code, _, err) = invoke(&[
        "sweep",
        "--config",
        conf.to_str().unwrap(),
        "--trials",
        "1",
        "--snr-db",
        "-20:10:0",
        "--algorithms",
        "joint",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3);
    assert!(summary.lines().skip(1).all(|l| l.contains(",joint,1,")));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, out, err) = invoke(&["sweep", "--bogus", "1", "--out-dir", "x"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(out.is_empty());
    assert!(err.contains("--bogus") && err.contains("Usage"), "{err}");
}

#[test]
fn invalid_value_is_a_config_error() {
    let (code, _, err) = invoke(&["simulate", "--streams", "9", "--antennas", "8"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.starts_with("error:"), "{err}");
    let (code, _, _) = invoke(&["simulate", "--rf-chains", "2", "--streams", "4"]);
    assert_eq!(code, EXIT_CONFIG);
    let (code, _, _) = invoke(&["simulate", "--config", "/nonexistent/file.conf"]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn unknown_key_in_config_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    std::fs::write(&conf, "antennas = 8\nwibble = 3\n").unwrap();
    let (code, _, err) = invoke(&["simulate", "--config", conf.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("wibble"), "{err}");
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = blocker.join("sub");
    let (code, _, _) = invoke(&[
        "sweep",
        "--antennas",
        "8",
        "--bits",
        "3",
        "--streams",
        "1",
        "--trials",
        "1",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, hybeam_cli::EXIT_RUNTIME);
}

#[test]
fn codebook_inspect_reports_64_vectors() {
    let (code, out, _) = invoke(&["codebook", "inspect", "--bits", "6", "--antennas", "128"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.lines().any(|l| l == "vectors: 64"), "{out}");
    // Angles θ and π − θ share a sine, so half of the beams repeat.
    assert!(out.lines().any(|l| l == "distinct_beams: 32"), "{out}");
}

#[test]
fn codebook_inspect_dedupe_and_angles() {
    let (code, out, _) = invoke(&["codebook", "inspect", "--bits", "3", "--antennas", "8", "--dedupe", "--angles"]);
    assert_eq!(code, EXIT_OK);
    // Sines {±1/√2, ±1, 0}; at half-wavelength spacing +1 and −1 coincide too.
    assert!(out.contains("vectors: 4\n"), "{out}");
    assert!(out.contains("deduplicated: true\n"));
    let rows: Vec<&str> = out.lines().skip_while(|l| *l != "index,angle_deg").skip(1).collect();
    assert_eq!(rows.len(), 4);
    let (code, _, _) = invoke(&["codebook", "inspect", "--bits", "0", "--antennas", "8"]);
    assert_eq!(code, EXIT_CONFIG);
}

#[test]
fn simulate_prints_every_algorithm() {
    let (code, out, err) = invoke(&["simulate", "--antennas", "16", "--bits", "4", "--streams", "2", "--snr-db", "10"]);
    assert_eq!(code, EXIT_OK, "{err}");
    for alg in ["[joint]", "[greedy_no_deflation]", "[full_digital]"] {
        assert!(out.contains(alg), "{out}");
    }
    let sinr_lines: Vec<&str> = out.lines().filter(|l| l.trim_start().starts_with("sinr_db:")).collect();
    assert_eq!(sinr_lines.len(), 3);
    assert!(sinr_lines.iter().all(|l| l.split_whitespace().count() == 3));
    assert_eq!(out.matches("tx_beams:").count(), 2);
    assert!(out.contains("spectral_efficiency:") && out.contains("sum_rate:"));
}

#[test]
fn channel_sample_writes_rays_and_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.csv");
    let (code, _, err) = invoke(&[
        "channel",
        "sample",
        "--antennas",
        "4",
        "--streams",
        "1",
        "--clusters",
        "2",
        "--rays",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "cluster,ray,re_alpha,im_alpha,aod_rad,aoa_rad");
    assert_eq!(lines[7], "row,col,re,im");
    assert_eq!(lines.len(), 1 + 6 + 1 + 16);

    let (code, stdout, _) = invoke(&["channel", "sample", "--antennas", "4", "--streams", "1", "--clusters", "2", "--rays", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(stdout, text);
}

#[test]
fn help_lists_every_key_with_default() {
    for sub in ["sweep", "simulate"] {
        let (code, out, _) = invoke(&[sub, "--help"]);
        assert_eq!(code, EXIT_OK);
        for key in CONFIG_KEYS {
            let flag = format!("--{}", flag_name(key.name));
            let line = out.lines().find(|l| l.split_whitespace().next() == Some(flag.as_str()));
            let line = line.unwrap_or_else(|| panic!("{flag} missing from `{sub} --help`"));
            assert!(line.contains(&format!("[default: {}]", key.default)), "{line}");
        }
    }
}

#[test]
fn readme_documents_every_key() {
    let readme = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap();
    for key in CONFIG_KEYS {
        assert!(readme.contains(&format!("`{}`", key.name)), "README lacks key {}", key.name);
        assert!(readme.contains(&format!("--{}", flag_name(key.name))), "README lacks flag for {}", key.name);
    }
}

#[test]
fn default_invocation_matches_reference_setup() {
    let argv = [
        "hybeam",
        "--antennas",
        "128",
        "--rf-chains",
        "4",
        "--streams",
        "4",
        "--bits",
        "6",
        "--clusters",
        "10",
        "--rays",
        "10",
        "--angle-spread-deg",
        "2.5",
    ];
    let sub = hybeam_cli::command().find_subcommand("simulate").unwrap().clone();
    let explicit = resolve_config(&sub.clone().try_get_matches_from(argv).unwrap()).unwrap();
    let bare = resolve_config(&sub.try_get_matches_from(["hybeam"]).unwrap()).unwrap();
    assert_eq!(explicit, bare);
    assert_eq!(explicit.channel.tx.n_elements, 128);
    assert_eq!(explicit.channel.rx.n_elements, 128);
    assert_eq!(explicit.n_streams, 4);
    assert_eq!((explicit.codebook_bits_tx, explicit.codebook_bits_rx), (6, 6));
    assert_eq!((explicit.channel.n_clusters, explicit.channel.n_rays), (10, 10));
    assert!((explicit.channel.angle_spread - 2.5f64.to_radians()).abs() < 1e-15);
}
