use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stereo_decorr::aecsim::material::{speech_like, white_noise};
use stereo_decorr::wav::{read_wav, write_wav, BitDepth};
use stereo_decorr::AudioBuffer;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stereo-decorr"));
    c.env_remove("STEREO_DECORR_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stereo_fixture(dir: &Path) -> PathBuf {
    let sr = 16_000;
    let s = speech_like(3 * sr as usize, sr, 4);
    let right: Vec<f64> = std::iter::once(0.0).chain(s.iter().map(|v| 0.8 * v)).take(s.len()).collect();
    let path = dir.join("in.wav");
    write_wav(&path, &AudioBuffer::stereo(s, right, sr).unwrap(), BitDepth::Pcm16).unwrap();
    path
}

#[test]
fn process_is_deterministic_and_changes_the_signal() {
    let dir = tempfile::tempdir().unwrap();
    let input = stereo_fixture(dir.path());
    let (a, b, c) = (dir.path().join("a.wav"), dir.path().join("b.wav"), dir.path().join("c.wav"));
    for out in [&a, &b] {
        let o = run(&["process", p(&input), p(out), "--seed", "3"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&input).unwrap());

    let o = bin().args(["process", p(&input), p(&c)]).env("STEREO_DECORR_SEED", "4").output().unwrap();
    assert!(o.status.success());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());

    let wa = read_wav(&a).unwrap();
    assert_eq!(wa.channels(), 2);
    assert_eq!(wa.audio.len(), read_wav(&input).unwrap().audio.len());
}

#[test]
fn method_none_copies_samples() {
    let dir = tempfile::tempdir().unwrap();
    let input = stereo_fixture(dir.path());
    let out = dir.path().join("none.wav");
    assert!(run(&["process", p(&input), p(&out), "--method", "none"]).status.success());
    assert_eq!(read_wav(&out).unwrap().audio, read_wav(&input).unwrap().audio);
}

#[test]
fn bad_parameters_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = stereo_fixture(dir.path());
    let out = dir.path().join("o.wav");
    for args in [
        vec!["--beta", "1.5"],
        vec!["--nmin", "9", "--nmax", "5"],
        vec!["--method", "noise", "--beta", "0.2"],
        vec!["--window", "7"],
    ] {
        let mut all = vec!["process", p(&input), p(&out)];
        all.extend(args.iter());
        let o = run(&all);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    assert!(!out.exists());
}

#[test]
fn missing_input_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["process", p(&dir.path().join("nope.wav")), p(&dir.path().join("o.wav"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn analyze_reports_bands_and_rejects_mono() {
    let dir = tempfile::tempdir().unwrap();
    let input = stereo_fixture(dir.path());
    let json = dir.path().join("c.json");
    let csv = dir.path().join("c.csv");
    let o = run(&["analyze", p(&input), "--fft", "512", "--csv", p(&csv), "--json", p(&json)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    // The right channel is a scaled, delayed copy of the left.
    assert!(v["full"].as_f64().unwrap() > 0.95, "{v}");
    assert_eq!(v["fft_size"], 512);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 257);

    let mono = dir.path().join("mono.wav");
    write_wav(&mono, &AudioBuffer::mono(white_noise(8000, 1, 0.1), 16_000).unwrap(), BitDepth::Pcm16).unwrap();
    assert_eq!(run(&["analyze", p(&mono)]).status.code(), Some(2));
}

#[test]
fn preset_output_round_trips_through_simulate_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("desk.json");
    assert!(run(&["preset", "desk_stereo", "-o", p(&cfg)]).status.success());
    let text = std::fs::read_to_string(&cfg).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["schema_version"] = 99.into();
    std::fs::write(&cfg, v.to_string()).unwrap();
    let o = run(&["simulate", p(&cfg), "-o", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema_version"));
}

#[test]
fn mono_sanity_simulation_converges_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["simulate", "--preset", "mono_sanity", "-o", p(out), "--dump-wav"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let strip = |dir: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
        for row in v["rows"].as_array_mut().unwrap() {
            row.as_object_mut().unwrap().remove("runtime_ms");
        }
        v
    };
    let (ra, rb) = (strip(&a), strip(&b));
    assert_eq!(ra, rb);
    let final_db = ra["rows"][0]["final_misalignment_db"].as_f64().unwrap();
    assert!(final_db < -20.0, "{final_db}");
    assert_eq!(std::fs::read(a.join("traces.csv")).unwrap(), std::fs::read(b.join("traces.csv")).unwrap());
    let wavs: Vec<_> = std::fs::read_dir(a.join("wav")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(wavs.len(), 3);
    for name in wavs {
        assert_eq!(std::fs::read(a.join("wav").join(&name)).unwrap(), std::fs::read(b.join("wav").join(&name)).unwrap());
    }
}

#[test]
fn response_csv_is_flat_for_stable_filter() {
    let o = run(&["response", "--alpha", "0.4", "--bins", "64"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| h.contains("mag")).unwrap();
    let mags: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(mags.len(), 64);
    assert!(mags.iter().all(|m| (m - 1.0).abs() < 1e-9));
    assert_eq!(run(&["response", "--alpha", "0.8"]).status.code(), Some(2));
}
