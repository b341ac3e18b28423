use std::path::PathBuf;
use std::process::{Command, Output};

use image::RgbaImage;
use serde_json::{json, Value};
use uvlink_core::geometry::lat_long_sphere;
use uvlink_core::persistence::{export_png, import_png, write_obj};

fn uvlink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uvlink")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("sphere.obj"), write_obj(&lat_long_sphere(32, 16, 1.0), None)).unwrap();
        let mut art = RgbaImage::new(256, 256);
        // A black frame as line art; the rest stays transparent.
        for (x, y, p) in art.enumerate_pixels_mut() {
            if x < 2 || y < 2 || x > 253 || y > 253 {
                p.0 = [0, 0, 0, 255];
            }
        }
        export_png(&art, &dir.path().join("front.png")).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn script(&self, name: &str, commands: Value) -> String {
        let text = json!({
            "version": 1,
            "camera": {
                "position": [0.0, 3.0, 0.0],
                "target": [0.0, 0.0, 0.0],
                "up": [0.0, 0.0, -1.0],
                "vfov_degrees": 60.0,
                "viewport": [800, 800]
            },
            "commands": commands
        });
        std::fs::write(self.path(name), text.to_string()).unwrap();
        self.arg(name)
    }

    fn run(&self, script: &str, out: &str, extra: &[&str]) -> Output {
        let mut args = vec!["run", "--mesh", &self.arg("sphere.obj")].into_iter().map(String::from).collect::<Vec<_>>();
        args.extend(["--image".into(), self.arg("front.png"), "--script".into(), script.into()]);
        args.extend(["--out".into(), self.arg(out)]);
        args.extend(extra.iter().map(|s| s.to_string()));
        uvlink(&args.iter().map(String::as_str).collect::<Vec<_>>())
    }
}

fn top_cap_scenario() -> Value {
    let ring: Vec<[i64; 2]> = (0..20)
        .map(|k| {
            let a = k as f64 * std::f64::consts::TAU / 20.0;
            [400 + (50.0 * a.cos()) as i64, 400 + (50.0 * a.sin()) as i64]
        })
        .collect();
    json!([
        {"cmd": "set_color", "color": "#2040ff"},
        {"cmd": "set_brush_radius", "radius": 12},
        {"cmd": "stroke_model_screen", "points": ring},
        {"cmd": "stroke_image", "points": [[128, 30], [100, 30]]},
        {"cmd": "save_group"},
        {"cmd": "set_mode", "mode": "user"},
        {"cmd": "set_color", "color": "#ff0000"},
        {"cmd": "fill", "point": [130, 31]},
        {"cmd": "export", "target": "model", "path": "exported"}
    ])
}

#[test]
fn inspect_reports_sphere_counts() {
    let fx = Fixture::new();
    let out = uvlink(&["inspect", &fx.arg("sphere.obj")]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("triangles:            960"), "{text}");
    assert!(text.contains("vertices (unified):   559"), "{text}");
    assert!(text.contains("degenerate triangles: 0"), "{text}");
}

#[test]
fn inspect_rejects_bad_meshes() {
    let fx = Fixture::new();
    std::fs::write(fx.path("nouv.obj"), "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
    let out = uvlink(&["inspect", &fx.arg("nouv.obj")]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("[load-mesh]"));
    assert_eq!(code(&uvlink(&["inspect", &fx.arg("missing.obj")])), 4);
    assert_eq!(code(&uvlink(&["inspect"])), 2);
}

#[test]
fn run_paints_the_top_cap_red() {
    let fx = Fixture::new();
    let script = fx.script("cap.json", top_cap_scenario());
    let out = fx.run(&script, "out", &[]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let transcript: Value = serde_json::from_str(&std::fs::read_to_string(fx.path("out/transcript.json")).unwrap()).unwrap();
    let rel: Value = serde_json::from_str(&std::fs::read_to_string(fx.path("out/relations.json")).unwrap()).unwrap();
    let words = rel["groups"][0]["word_points"].as_array().unwrap();
    assert_eq!(words.len(), 20);
    for dir in ["out/model", "out/exported"] {
        let tex = import_png(&fx.path(dir).join("texture.png")).unwrap();
        for w in words {
            let (x, y) = (w["x"].as_u64().unwrap() as u32, w["y"].as_u64().unwrap() as u32);
            assert_eq!(tex.get_pixel(x, y).0, [255, 0, 0, 255], "{dir} at ({x}, {y})");
        }
    }
    let image = import_png(&fx.path("out/image.png")).unwrap();
    assert_eq!(image.get_pixel(128, 30).0, [255, 0, 0, 255]);
    // Line art stays on top of the paint.
    assert_eq!(image.get_pixel(0, 0).0, [0, 0, 0, 255]);
    assert_eq!(transcript["entries"].as_array().unwrap().len(), 9);
}

#[test]
fn save_before_marking_aborts_with_missing_data() {
    let fx = Fixture::new();
    let script = fx.script(
        "bad.json",
        json!([{"cmd": "stroke_image", "points": [[10, 10]]}, {"cmd": "save_group"}, {"cmd": "revoke"}]),
    );
    let out = fx.run(&script, "out", &[]);
    assert_eq!(code(&out), 5);
    let text = std::fs::read_to_string(fx.path("out/transcript.json")).unwrap();
    let t: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(t["aborted_at"], 1);
    assert_eq!(t["entries"][1]["error"]["code"], "MISSING_DATA");
    assert!(t["entries"][1]["error"]["message"].as_str().unwrap().contains("missing data"));

    let out = fx.run(&script, "out2", &["--continue-on-error"]);
    assert_eq!(code(&out), 0);
    let t: Value = serde_json::from_str(&std::fs::read_to_string(fx.path("out2/transcript.json")).unwrap()).unwrap();
    assert_eq!(t["entries"].as_array().unwrap().len(), 3);
}

#[test]
fn run_rejects_unknown_commands_before_loading() {
    let fx = Fixture::new();
    let script = fx.script("odd.json", json!([{"cmd": "teleport"}]));
    let out = fx.run(&script, "out", &[]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("[parse-script]"));
}

#[test]
fn verify_suites() {
    let out = uvlink(&["verify"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.lines().any(|l| l.ends_with(" Fail")), "{text}");
    for suite in ["raycast", "disc", "lookup", "f-threshold", "stamps"] {
        assert!(text.lines().any(|l| l.starts_with(suite)), "{suite} missing");
    }
    let out = uvlink(&["verify", "--suite", "f-threshold"]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&uvlink(&["verify", "--suite", "f-threshold", "--f", "0"])), 6);
    assert_eq!(code(&uvlink(&["verify", "--suite", "nope"])), 2);
}
