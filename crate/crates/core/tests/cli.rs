use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lmcam(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmcam"))
        .args(args)
        .current_dir(dir)
        .env_remove("LMCAM_SEED")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = lmcam(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn png_files(dir: &Path) -> Vec<Vec<u8>> {
    let mut names: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "png"))
        .collect();
    names.sort();
    names.iter().map(|p| std::fs::read(p).unwrap()).collect()
}

/// Writes a conditioned clip of `frames` frames for `motion` into `out`.
fn clip(dir: &Path, motion: &str, frames: &str, out: &str) {
    let traj = format!("{out}.json");
    ok(dir, &["trajectory", "gen", "--motion", motion, "--width", "64", "--height", "48", "--out", &traj]);
    ok(dir, &["condition", "--trajectory", &traj, "--frames", frames, "--out", out]);
}

#[test]
fn unknown_motion_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let out = lmcam(d.path(), &["trajectory", "gen", "--motion", "barrel-roll", "--out", "t.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("barrel-roll"));
    assert_eq!(code(&lmcam(d.path(), &["no-such-command"])), 2);
}

#[test]
fn generated_trajectory_samples_to_its_endpoints() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["trajectory", "gen", "--motion", "arc-left", "--azimuth", "10", "--out", "t.json"]);
    let t = json(d.path().join("t.json"));
    assert_eq!(t["image"]["w"], 512);
    assert_eq!(t["keyframes"].as_array().unwrap().len(), 2);
    assert_eq!(t["frames"], 81);

    let out = ok(d.path(), &["trajectory", "sample", "--trajectory", "t.json"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 82, "header plus 81 frames");
    assert!(rows[1].starts_with('0'));

    ok(d.path(), &["trajectory", "sample", "--trajectory", "t.json", "--frames", "5", "--out", "s.csv"]);
    assert_eq!(std::fs::read_to_string(d.path().join("s.csv")).unwrap().lines().count(), 6);
}

#[test]
fn condition_writes_clip_landmarks_and_provenance() {
    let d = tempfile::tempdir().unwrap();
    clip(d.path(), "pan-left", "9", "c");
    let c = d.path().join("c");
    assert_eq!(png_files(&c).len(), 9);
    let lm = json(c.join("landmarks.json"));
    assert_eq!(lm["frames"].as_array().unwrap().len(), 9);
    let prov = json(c.join("provenance.json"));
    assert_eq!(prov["op"]["op"], "condition");
    assert!(prov["argv"].as_array().unwrap().len() > 3);
}

#[test]
fn static_trajectory_gives_identical_frames() {
    let d = tempfile::tempdir().unwrap();
    let traj = serde_json::json!({
        "image": {"w": 96, "h": 80},
        "keyframes": [
            {"time": 0.0, "center": [0.0, 0.0, -6.0], "look_at": [0.0, 0.0, 0.0], "up": [0.0, -1.0, 0.0], "fov_deg": 40.0},
            {"time": 1.0, "center": [0.0, 0.0, -6.0], "look_at": [0.0, 0.0, 0.0], "up": [0.0, -1.0, 0.0], "fov_deg": 40.0}
        ]
    });
    std::fs::write(d.path().join("t.json"), traj.to_string()).unwrap();
    ok(d.path(), &["condition", "--trajectory", "t.json", "--frames", "6", "--out", "c"]);
    let frames = png_files(&d.path().join("c"));
    assert_eq!(frames.len(), 6);
    assert!(frames.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["trajectory", "gen", "--motion", "zoom-in", "--out", "t.json"]);
    let missing = lmcam(d.path(), &["condition", "--template", "nope.json", "--trajectory", "t.json", "--out", "c"]);
    assert_eq!(code(&missing), 3);

    std::fs::write(d.path().join("bad.json"), "{\"image\": 3}").unwrap();
    assert_eq!(code(&lmcam(d.path(), &["condition", "--trajectory", "bad.json", "--out", "c"])), 3);

    let away = serde_json::json!({
        "image": {"w": 64, "h": 64},
        "keyframes": [{"time": 0.0, "center": [0.0, 0.0, -6.0], "look_at": [0.0, 0.0, -12.0], "up": [0.0, -1.0, 0.0], "fov_deg": 40.0}]
    });
    std::fs::write(d.path().join("away.json"), away.to_string()).unwrap();
    let behind = lmcam(d.path(), &["condition", "--trajectory", "away.json", "--frames", "2", "--out", "c"]);
    assert_eq!(code(&behind), 4, "{}", String::from_utf8_lossy(&behind.stderr));
}

#[test]
fn identity_zoom_returns_the_input() {
    let d = tempfile::tempdir().unwrap();
    clip(d.path(), "arc-up", "4", "c");
    ok(d.path(), &["datagen", "zoom", "--input", "c", "--s-start", "1.0", "--s-end", "1.0", "--out", "z"]);
    assert_eq!(png_files(&d.path().join("c")), png_files(&d.path().join("z")));
    let prov = json(d.path().join("z/provenance.json"));
    assert_eq!(prov["op"]["scales"], serde_json::json!([1.0, 1.0, 1.0, 1.0]));
}

#[test]
fn seeded_ops_need_a_seed_and_reproduce() {
    let d = tempfile::tempdir().unwrap();
    for (i, m) in ["pan-left", "pan-up", "zoom-in", "arc-left", "arc-down"].iter().enumerate() {
        clip(d.path(), m, "6", &format!("c{i}"));
    }
    let clips = ["c0", "c1", "c2", "c3", "c4"];
    let mut args = vec!["datagen", "stitch", "--clips"];
    args.extend(clips);
    args.extend(["--out", "s1"]);
    assert_eq!(code(&lmcam(d.path(), &args)), 2, "stitch without a seed");

    let run = |out: &str| {
        let mut a = vec!["--seed", "7", "datagen", "stitch", "--clips"];
        a.extend(clips);
        a.extend(["--out", out]);
        ok(d.path(), &a);
    };
    run("s1");
    run("s2");
    let (a, b) = (png_files(&d.path().join("s1")), png_files(&d.path().join("s2")));
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let prov = json(d.path().join("s1/provenance.json"));
    assert_eq!(prov["seed"], 7);
    let total: u64 = prov["op"]["stitch"]["segments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["end"].as_u64().unwrap() - s["start"].as_u64().unwrap() + 1)
        .sum();
    assert_eq!(total as usize, a.len());

    let out = lmcam(d.path(), &["datagen", "zoom", "--input", "c0", "--out", "z"]);
    assert_eq!(code(&out), 2, "seeded zoom without a seed");
}

#[test]
fn augment_records_scales_in_range() {
    let d = tempfile::tempdir().unwrap();
    clip(d.path(), "pan-left", "3", "src");
    clip(d.path(), "pan-right", "3", "tgt");
    let out = Command::new(env!("CARGO_BIN_EXE_lmcam"))
        .args(["datagen", "augment", "--source", "src", "--target", "tgt", "--out", "aug"])
        .current_dir(d.path())
        .env("LMCAM_SEED", "11")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let prov = json(d.path().join("aug/provenance.json"));
    for key in ["scale_source", "scale_target"] {
        let s = prov["op"][key].as_f64().unwrap();
        assert!((0.75..=1.25).contains(&s), "{key} = {s}");
    }
    assert_eq!(png_files(&d.path().join("aug/source")).len(), 3);
    assert_eq!(png_files(&d.path().join("aug/target")).len(), 3);
}

#[test]
fn eval_scores_identical_clips() {
    let d = tempfile::tempdir().unwrap();
    clip(d.path(), "zoom-in", "5", "zoom-in");
    let out = ok(d.path(), &["eval", "--videos", "zoom-in", "--reference", "zoom-in", "--out", "r.json"]);
    assert!(out.status.success());
    let r = json(d.path().join("r.json"));
    let v = &r["videos"][0];
    assert_eq!(v["ssim"], 1.0);
    assert_eq!(v["psnr_db"], "inf");
    assert_eq!(v["intended"], "zoom-in");
    assert_eq!(v["correct"], true);
    assert_eq!(r["external"]["lpips"], "external: not computed");

    clip(d.path(), "zoom-out", "4", "short");
    let mismatch = lmcam(d.path(), &["eval", "--videos", "zoom-in", "--reference", "short", "--out", "r2.json"]);
    assert_eq!(code(&mismatch), 3);
}

#[test]
fn config_file_sets_style_and_seed() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("cfg.toml"), "seed = 5\n[style]\nbackground = [10, 20, 30]\nconnectivity = false\n").unwrap();
    ok(d.path(), &["trajectory", "gen", "--motion", "pan-up", "--width", "32", "--height", "32", "--out", "t.json"]);
    ok(d.path(), &["--config", "cfg.toml", "condition", "--trajectory", "t.json", "--frames", "2", "--out", "c"]);
    let img = image::open(d.path().join("c/frame_00000.png")).unwrap().to_rgb8();
    assert_eq!(img.get_pixel(0, 0).0, [10, 20, 30]);
    let prov = json(d.path().join("c/provenance.json"));
    assert_eq!(prov["seed"], 5);

    std::fs::write(d.path().join("bad.toml"), "[thresholds]\ntau_px = -1\n").unwrap();
    let bad = lmcam(d.path(), &["--config", "bad.toml", "trajectory", "gen", "--motion", "pan-up", "--out", "u.json"]);
    assert_eq!(code(&bad), 2);
}
