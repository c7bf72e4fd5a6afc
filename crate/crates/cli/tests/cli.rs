use std::fs;
use std::path::Path;
use std::process::Command;

fn mkdv(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mkdv")).args(args).env_remove("MKDV_OUTPUT_DIR").output().expect("spawn mkdv")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn unknown_field_is_a_config_error_naming_the_field() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "bad.cfg", "# evolve run\nt_end = 5\nstep = 0.1\n");
    let out = mkdv(&["evolve", "-c", &cfg, "-o", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3") && err.contains("'step'"), "{err}");
}

#[test]
fn malformed_values_are_config_errors() {
    let d = tempfile::tempdir().unwrap();
    for (name, text, field) in [
        ("a.cfg", "dt0 = fast\n", "dt0"),
        ("b.cfg", "epsilon = 0.5\n", "epsilon"),
        ("c.cfg", "mode = implicit\n", "mode"),
        ("d.cfg", "profile = no_such_profile\n", "profile"),
        ("e.cfg", "t_end = -1\n", "t_end"),
    ] {
        let cfg = write(d.path(), name, text);
        let out = mkdv(&["evolve", "-c", &cfg, "-o", d.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains(field), "{name}");
    }
    assert_eq!(mkdv(&["verify", "--suite", "everything"]).status.code(), Some(2));
}

#[test]
fn blow_up_exits_with_instability_code() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "big.cfg", "amplitude = 40\nt_end = 30\n");
    let out = mkdv(&["evolve", "-c", &cfg, "-o", d.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "run.cfg", "profile = random\nseed = 7\nt_end = 4\np_max = 6\nsnapshots = 2\n");
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = d.path().join(run);
        let out = mkdv(&["evolve", "-c", &cfg, "-o", dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
            .unwrap()
            .map(|e| e.unwrap())
            .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert_eq!(outputs[0].len(), 4);
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn seed_changes_the_random_profile() {
    let d = tempfile::tempdir().unwrap();
    let mut csv = Vec::new();
    for seed in [1, 2] {
        let cfg = write(d.path(), "r.cfg", &format!("profile = random\nseed = {seed}\npoints = 11\n"));
        let dir = d.path().join(format!("s{seed}"));
        assert!(mkdv(&["reconstruct", "-c", &cfg, "-o", dir.to_str().unwrap()]).status.success());
        csv.push(fs::read_to_string(dir.join("physical.csv")).unwrap());
    }
    assert_ne!(csv[0], csv[1]);
}

#[test]
fn airy_table_and_output_dir_override() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "airy.cfg", "output_dir = ignored\nz_min = -1\nz_max = 1\npoints = 3\n");
    let dir = d.path().join("chosen");
    let out = mkdv(&["airy", "-c", &cfg, "-o", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(dir.join("airy.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "z,ai_re,ai_im,dai_re,dai_im");
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("0,0.2461"));
    assert!(!d.path().join("ignored").exists());
}

#[test]
fn selfsimilar_profile_round_trips_through_the_profile_file() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "s.cfg", "c = 0.05\nalpha = 0.02\nresolve_time = 1\n");
    let dir = d.path().join("ss");
    assert!(mkdv(&["selfsimilar", "-c", &cfg, "-o", dir.to_str().unwrap()]).status.success());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("selfsimilar.json")).unwrap()).unwrap();
    assert!((json["jump"][1].as_f64().unwrap() - 0.009549296585513721).abs() < 1e-15);
    // feed the written profile back in as data for another subcommand
    let prof = dir.join("selfsimilar_profile.txt");
    let cfg2 = write(d.path(), "r.cfg", &format!("profile = {}\npoints = 5\n", prof.display()));
    let out = mkdv(&["reconstruct", "-c", &cfg2, "-o", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_selfsim_suite_passes() {
    let d = tempfile::tempdir().unwrap();
    let out = mkdv(&["verify", "--suite", "selfsim", "-o", d.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.path().join("verify_selfsim.json")).unwrap()).unwrap();
    for c in report["checks"].as_array().unwrap() {
        assert!(c["window"].as_str().is_some_and(|w| !w.is_empty()));
        assert!(c["bound"].as_str().is_some_and(|b| !b.is_empty()));
    }
}
