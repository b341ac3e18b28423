//! Built-in oracle suites: each suite checks a fast path against a brute-force
//! recomputation and reports one row per check.

use std::time::{Duration, Instant};

use image::RgbaImage;
use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canvas::{rasterize_stamp, BrushStamp, PaintCanvas};
use crate::geometry::{intersect_exhaustive, lat_long_sphere, AccelIndex, Mesh, Ray, DEFAULT_MAX_T};
use crate::pixel::{PixelPos, Rgba};
use crate::relation::{MarkerPoint, RelationGroup, RelationSet, DEFAULT_F};
use crate::session::{Command, Script, Session, SessionConfig};

pub const SUITES: &[&str] = &["raycast", "disc", "lookup", "f-threshold", "stamps"];

/// f values swept by the threshold matrix.
pub const F_SWEEP: [f64; 11] = [0.1, 0.5, 1.0, 3.0, 5.0, 8.0, 10.0, 20.0, 50.0, 100.0, 1000.0];

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Threshold used where a suite needs the configured standard f.
    pub f: f64,
    pub seed: u64,
    pub rays: usize,
    pub stamp_budget: Duration,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            f: DEFAULT_F,
            seed: 0x5eed,
            rays: 10_000,
            stamp_budget: Duration::from_secs(2),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckRow {
    pub description: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: &'static str,
    pub rows: Vec<CheckRow>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }
}

fn row(description: impl Into<String>, expected: impl ToString, actual: impl ToString, pass: bool) -> CheckRow {
    CheckRow {
        description: description.into(),
        expected: expected.to_string(),
        actual: actual.to_string(),
        pass,
    }
}

/// Runs one suite by name; `None` for an unknown name.
pub fn run_suite(name: &str, opts: &VerifyOptions) -> Option<SuiteReport> {
    let start = Instant::now();
    let (name, rows) = match name {
        "raycast" => ("raycast", raycast_suite(opts)),
        "disc" => ("disc", disc_suite()),
        "lookup" => ("lookup", lookup_suite(opts)),
        "f-threshold" => ("f-threshold", f_threshold_suite(opts)),
        "stamps" => ("stamps", stamps_suite(opts)),
        _ => return None,
    };
    Some(SuiteReport {
        name,
        rows,
        elapsed: start.elapsed(),
    })
}

pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteReport> {
    SUITES.iter().filter_map(|s| run_suite(s, opts)).collect()
}

/// Rays from a shell around the origin aimed at points inside the unit ball.
pub fn random_rays(rng: &mut impl Rng, count: usize, shell: f64) -> Vec<Ray> {
    let unit = |rng: &mut dyn rand::RngCore| loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            break v;
        }
    };
    (0..count)
        .map(|_| {
            let origin = unit(rng).normalize() * shell;
            let aim = unit(rng) * 1.1;
            Ray::new(origin, aim - origin).expect("origin and aim differ")
        })
        .collect()
}

pub fn unit_quad() -> Mesh {
    Mesh::new(
        vec![
            Vector3::new(-1.0, -1.0, 0.0),
            Vector3::new(1.0, -1.0, 0.0),
            Vector3::new(1.0, 1.0, 0.0),
            Vector3::new(-1.0, 1.0, 0.0),
        ],
        vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .expect("quad is valid")
}

fn raycast_suite(opts: &VerifyOptions) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    [("sphere 32x16", lat_long_sphere(32, 16, 1.0)), ("quad", unit_quad())]
        .into_iter()
        .map(|(label, mesh)| {
            let accel = AccelIndex::build(&mesh);
            let rays = random_rays(&mut rng, opts.rays, 3.0);
            let fast = accel.intersect_batch(&mesh, &rays, DEFAULT_MAX_T);
            let slow = crate::par::map_slice(&rays, |r| intersect_exhaustive(&mesh, r, DEFAULT_MAX_T));
            let mut hits = 0;
            let mismatches = fast
                .iter()
                .zip(&slow)
                .filter(|(a, b)| {
                    hits += a.is_some() as usize;
                    match (a, b) {
                        (None, None) => false,
                        (Some(a), Some(b)) => a.triangle_index != b.triangle_index || (a.t - b.t).abs() > 1e-6,
                        _ => true,
                    }
                })
                .count();
            row(
                format!("{label}: {} rays, index vs exhaustive ({hits} hits)", rays.len()),
                "0 mismatches",
                format!("{mismatches} mismatches"),
                mismatches == 0,
            )
        })
        .collect()
}

fn disc_suite() -> Vec<CheckRow> {
    let mut bad = Vec::new();
    for radius in 1..=32u32 {
        let size = 2 * radius + 9;
        let c = (radius + 4) as i32;
        let mut buf = RgbaImage::new(size, size);
        rasterize_stamp(&mut buf, &BrushStamp::new((c, c), radius, Rgba::RED));
        let r2 = (radius * radius) as i64;
        let agree = buf.enumerate_pixels().all(|(x, y, p)| {
            let (dx, dy) = (x as i64 - c as i64, y as i64 - c as i64);
            (dx * dx + dy * dy <= r2) == (p.0 == Rgba::RED.0)
        });
        if !agree {
            bad.push(radius);
        }
    }
    vec![row(
        "radius 1..=32 discs vs exhaustive pixel scan",
        "all agree",
        if bad.is_empty() { "all agree".to_string() } else { format!("radius {bad:?} differ") },
        bad.is_empty(),
    )]
}

fn lookup_suite(opts: &VerifyOptions) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x100c);
    let mut rows = Vec::new();
    for trial in 0..5 {
        let groups: Vec<RelationGroup> = (0..rng.random_range(1..30u32))
            .map(|id| RelationGroup {
                id,
                label_color: Rgba::BLACK,
                pic_points: (0..rng.random_range(1..8))
                    .map(|_| MarkerPoint {
                        x: rng.random_range(0..200),
                        y: rng.random_range(0..200),
                        radius: 4,
                    })
                    .collect(),
                word_points: vec![MarkerPoint { x: 0, y: 0, radius: 4 }],
            })
            .collect();
        let set = match RelationSet::from_groups(opts.f, (200, 200), (16, 16), groups.clone()) {
            Ok(set) => set,
            Err(e) => {
                rows.push(row(format!("relation set {trial} with f={}", opts.f), "valid", e, false));
                return rows;
            }
        };
        let mut mismatches = 0;
        for _ in 0..200 {
            let pos = PixelPos::new(rng.random_range(-10..210), rng.random_range(-10..210));
            let brute: Vec<u32> = groups
                .iter()
                .filter(|g| {
                    let min = g
                        .pic_points
                        .iter()
                        .map(|m| (((m.x - pos.x) as f64).powi(2) + ((m.y - pos.y) as f64).powi(2)).sqrt())
                        .fold(f64::INFINITY, f64::min);
                    min < opts.f
                })
                .map(|g| g.id)
                .collect();
            mismatches += (set.lookup_groups(pos) != brute) as usize;
        }
        rows.push(row(
            format!("set {trial}: {} groups, 200 positions, f={}", set.len(), opts.f),
            "0 mismatches",
            format!("{mismatches} mismatches"),
            mismatches == 0,
        ));
    }
    rows
}

fn fill_matches(f: f64, markers: &[(i32, i32)], tap: (i32, i32)) -> Result<Vec<u32>, String> {
    let groups = markers
        .iter()
        .enumerate()
        .map(|(id, &(x, y))| RelationGroup {
            id: id as u32,
            label_color: Rgba::BLACK,
            pic_points: vec![MarkerPoint { x, y, radius: 4 }],
            word_points: vec![MarkerPoint { x: 8, y: 8, radius: 4 }],
        })
        .collect();
    let set = RelationSet::from_groups(f, (200, 200), (16, 16), groups).map_err(|e| e.to_string())?;
    let mut image = PaintCanvas::new(200, 200, Rgba::WHITE, None).map_err(|e| e.to_string())?;
    let mut uv = PaintCanvas::new(16, 16, Rgba::WHITE, None).map_err(|e| e.to_string())?;
    Ok(set.fill(PixelPos::new(tap.0, tap.1), Rgba::RED, &mut image, &mut uv).matched)
}

fn f_threshold_suite(opts: &VerifyOptions) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    let configured_ok = opts.f.is_finite() && opts.f > 0.0;
    rows.push(row(
        format!("configured f = {}", opts.f),
        "finite and > 0",
        if configured_ok { "valid" } else { "invalid" },
        configured_ok,
    ));
    let outcome = |r: Result<Vec<u32>, String>| match r {
        Ok(ids) if ids.is_empty() => "miss".to_string(),
        Ok(ids) => format!("hit {ids:?}"),
        Err(e) => format!("error: {e}"),
    };
    for f in F_SWEEP {
        let got = fill_matches(f, &[(100, 100)], (102, 100));
        let expect_hit = f > 2.0;
        let pass = matches!(&got, Ok(ids) if ids.is_empty() != expect_hit);
        rows.push(row(
            format!("f = {f}: tap 2 px from marker"),
            if expect_hit { "hit" } else { "miss" },
            outcome(got),
            pass,
        ));
    }
    for (d, expect_hit) in [(7, true), (8, false), (9, false)] {
        let got = fill_matches(opts.f, &[(100, 100)], (100 + d, 100));
        let pass = matches!(&got, Ok(ids) if ids.is_empty() != expect_hit);
        rows.push(row(
            format!("f = {}: tap {d} px from marker", opts.f),
            if expect_hit { "hit" } else { "miss" },
            outcome(got),
            pass,
        ));
    }
    for (f, expected) in [(50.0, vec![0, 1]), (opts.f, vec![0])] {
        let got = fill_matches(f, &[(100, 100), (140, 100)], (105, 100));
        let pass = got.as_ref() == Ok(&expected);
        rows.push(row(
            format!("f = {f}: two groups 40 px apart, tap 5 px from the first"),
            format!("hit {expected:?}"),
            outcome(got),
            pass,
        ));
    }
    rows
}

fn stamps_suite(opts: &VerifyOptions) -> Vec<CheckRow> {
    let config = SessionConfig {
        f: if opts.f.is_finite() && opts.f > 0.0 { opts.f } else { DEFAULT_F },
        ..SessionConfig::default()
    };
    let image = RgbaImage::from_pixel(64, 64, image::Rgba([255; 4]));
    let mut session = match Session::new(config, lat_long_sphere(32, 16, 1.0), image, None) {
        Ok(s) => s,
        Err(e) => return vec![row("create session", "ok", e, false)],
    };
    let points: Vec<[f64; 2]> = (0..6000)
        .map(|i| {
            let (u, v) = ((i % 100) as f64 / 100.0, (i / 100) as f64 / 60.0);
            [u + 0.004, v + 0.004]
        })
        .collect();
    let commands: Vec<Command> = points
        .chunks(100)
        .map(|c| Command::StrokeModelUv { points: c.to_vec() })
        .collect();
    let start = Instant::now();
    let transcript = session.run_script(&Script::new(commands));
    let composite = session.uv_canvas().composite();
    let elapsed = start.elapsed();
    let warnings: Vec<&str> = transcript.warnings().collect();
    let pending = session.uv_canvas().pending().len();
    vec![
        row("6000 pending stamps queued", 6000, pending, pending == 6000 && transcript.completed()),
        row(
            "soft warning when pending first exceeds 3000",
            "1 warning",
            format!("{} warning(s)", warnings.len()),
            warnings.len() == 1 && warnings[0].starts_with("3001 "),
        ),
        row(
            format!("queue + composite {}x{}", composite.width(), composite.height()),
            format!("< {:?}", opts.stamp_budget),
            format!("{elapsed:.2?}"),
            elapsed < opts.stamp_budget,
        ),
    ]
}
