use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_muoam");
const SCENARIO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/uca_three_users.toml");

fn muoam(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn muoam")
}

fn run_ok(args: &[&str]) {
    let out = muoam(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn split(path: &Path) -> (Vec<String>, String) {
    let text = fs::read_to_string(path).unwrap();
    let header = text.lines().take_while(|l| l.starts_with('#')).map(String::from).collect();
    let body = text.lines().skip_while(|l| l.starts_with('#')).collect::<Vec<_>>().join("\n");
    (header, body)
}

fn header_value(header: &[String], key: &str) -> String {
    header
        .iter()
        .find_map(|l| l.strip_prefix(&format!("# {key}: ")).map(String::from))
        .unwrap_or_else(|| panic!("no {key} line"))
}

fn reader(path: &Path) -> csv::Reader<fs::File> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap()
}

fn out_dir(tmp: &tempfile::TempDir, name: &str) -> PathBuf {
    tmp.path().join(name)
}

#[test]
fn list_presets_has_ten() {
    let out = muoam(&["list-presets"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(names, ["fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13", "fig14a", "fig14b", "table1"]);
    assert!(text.contains("B=190 MHz") && text.contains("ρ=0.35"));
}

#[test]
fn usage_and_config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(muoam(&["se", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(muoam(&["se", "--preset", "fig99"]).status.code(), Some(2));
    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "schema_version = 1\nsnr_db = \"loud\"\n").unwrap();
    assert_eq!(muoam(&["estimate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(muoam(&["estimate", "--trials", "0"]).status.code(), Some(2));
}

#[test]
fn pipeline_failure_exits_1_and_leaves_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "o");
    // The four-ring UCCA precoder exceeds the conditioning limit.
    let out = muoam(&["precoder-dump", "--preset", "fig13", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(fs::read_dir(&dir).unwrap().count(), 0);
}

#[test]
fn estimate_csv_schema_and_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "e");
    run_ok(&["estimate", "--preset", "fig7", "--trials", "2", "--out", dir.to_str().unwrap()]);
    let path = dir.join("fig7.csv");
    let (header, _) = split(&path);
    assert_eq!(header_value(&header, "seed"), "1");
    assert_eq!(header_value(&header, "pipeline"), "estimate");
    assert_eq!(header_value(&header, "config_sha256").len(), 64);
    let mut rdr = reader(&path);
    let cols: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(&cols[..12], ["user", "r_true", "r_hat", "theta_true", "theta_hat", "phi_true", "phi_hat", "nmse_r", "nmse_theta", "nmse_phi", "seed", "snr_db"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        let truth: f64 = r[1].parse().unwrap();
        let est: f64 = r[2].parse().unwrap();
        assert!((truth - est).abs() < 0.05, "{r:?}");
    }
    let mut summary = reader(&dir.join("fig7_summary.csv"));
    assert_eq!(summary.headers().unwrap(), vec!["snr_db", "param", "param_value", "user", "mode", "metric", "value", "trials", "seed"]);
    assert!(summary.records().all(|r| r.unwrap()[6].parse::<f64>().is_ok()));
}

#[test]
fn config_file_matches_preset_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (out_dir(&tmp, "a"), out_dir(&tmp, "b"));
    run_ok(&["complexity", "--preset", "fig7", "--out", a.to_str().unwrap()]);
    run_ok(&["complexity", "--config", SCENARIO, "--out", b.to_str().unwrap()]);
    let (ha, _) = split(&a.join("fig7.csv"));
    let (hb, _) = split(&b.join("complexity.csv"));
    assert_eq!(header_value(&ha, "config_sha256"), header_value(&hb, "config_sha256"));
}

#[test]
fn single_thread_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<PathBuf> = ["s1", "s2", "p"].iter().map(|n| out_dir(&tmp, n)).collect();
    let base = ["ber", "--preset", "fig11", "--trials", "1", "--snr", "10", "--seed", "7"];
    for (d, extra) in dirs.iter().zip([vec!["--single-thread"], vec!["--single-thread"], vec!["--threads", "3"]]) {
        let mut args: Vec<&str> = base.to_vec();
        args.extend(extra);
        args.extend(["--out", d.to_str().unwrap()]);
        run_ok(&args);
    }
    let files: Vec<String> = dirs.iter().map(|d| fs::read_to_string(d.join("fig11.csv")).unwrap()).collect();
    assert_eq!(files[0], files[1]);
    assert_eq!(split(&dirs[0].join("fig11.csv")).1, split(&dirs[2].join("fig11.csv")).1);
}

#[test]
fn channel_dump_shapes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_dir(&tmp, "c");
    run_ok(&["channel-dump", "--config", SCENARIO, "--out", dir.to_str().unwrap()]);
    let count = |name: &str| reader(&dir.join(name)).records().count();
    assert_eq!(count("channel_dump.csv"), 128 * 63 * 63);
    assert_eq!(count("channel_dump_oam.csv"), 128 * 60 * 60);
}
