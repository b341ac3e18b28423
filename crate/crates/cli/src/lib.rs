//! Subcommand implementations for the `uvlink` binary.

pub mod serve;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::RgbaImage;
use uvlink_core::persistence::{self, PersistError};
use uvlink_core::session::{Session, SessionConfig, Transcript};
use uvlink_core::verify::{self, VerifyOptions};
use uvlink_core::Mesh;

/// Process exit codes. Stable; documented in the README.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 3;
    pub const LOAD: u8 = 4;
    pub const SCRIPT: u8 = 5;
    pub const VERIFY: u8 = 6;
    pub const IO: u8 = 7;
}

/// An error tagged with the stage that produced it and its exit code.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub code: u8,
    pub message: String,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.message)
    }
}

impl std::error::Error for StageError {}

fn stage(stage: &'static str, code: u8) -> impl Fn(&dyn fmt::Display) -> StageError {
    move |e| StageError {
        stage,
        code,
        message: e.to_string(),
    }
}

fn persist_code(e: &PersistError) -> u8 {
    match e {
        PersistError::Io { .. } => exit::LOAD,
        _ => exit::PARSE,
    }
}

pub fn load_mesh(path: &Path) -> Result<Mesh, StageError> {
    persistence::load_obj(path).map_err(|e| stage("load-mesh", exit::LOAD)(&e))
}

/// The front-view image becomes a line-art overlay on a white canvas of the
/// same size.
pub fn load_front_view(path: &Path) -> Result<(RgbaImage, RgbaImage), StageError> {
    let overlay = persistence::import_png(path).map_err(|e| stage("load-image", exit::LOAD)(&e))?;
    let base = RgbaImage::from_pixel(overlay.width(), overlay.height(), image::Rgba([255; 4]));
    Ok((base, overlay))
}

pub fn build_session(
    mesh: Mesh,
    image: &Path,
    relations: Option<&Path>,
    config: SessionConfig,
) -> Result<Session, StageError> {
    let (base, overlay) = load_front_view(image)?;
    let mut session =
        Session::new(config, mesh, base, Some(overlay)).map_err(|e| stage("session", exit::LOAD)(&e))?;
    if let Some(path) = relations {
        let set = persistence::load_relations(path).map_err(|e| stage("load-relations", persist_code(&e))(&e))?;
        session
            .replace_relations(set)
            .map_err(|e| stage("load-relations", exit::LOAD)(&e))?;
    }
    Ok(session)
}

pub fn inspect(mesh_path: &Path, out: &mut impl Write) -> Result<(), StageError> {
    let model = persistence::read_obj(mesh_path).map_err(|e| stage("load-mesh", exit::LOAD)(&e))?;
    let degenerate = model.degenerate_triangles();
    let (lo, hi) = model.uvs.iter().fold(
        ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
        |(lo, hi), uv| ([lo[0].min(uv.x), lo[1].min(uv.y)], [hi[0].max(uv.x), hi[1].max(uv.y)]),
    );
    let _ = writeln!(out, "mesh:                 {}", mesh_path.display());
    let _ = writeln!(out, "position records:     {}", model.source_positions);
    let _ = writeln!(out, "uv records:           {}", model.source_uvs);
    let _ = writeln!(out, "vertices (unified):   {}", model.positions.len());
    let _ = writeln!(out, "triangles:            {}", model.triangles.len());
    let _ = writeln!(out, "uv bounds:            [{}, {}] .. [{}, {}]", lo[0], lo[1], hi[0], hi[1]);
    let outside = lo[0] < 0.0 || lo[1] < 0.0 || hi[0] > 1.0 || hi[1] > 1.0;
    if outside {
        let _ = writeln!(out, "warning:              uvs outside [0, 1] will be clamped");
    }
    let _ = writeln!(out, "degenerate triangles: {}", degenerate.len());
    model
        .into_mesh(mesh_path)
        .map(|_| ())
        .map_err(|e| stage("validate-mesh", exit::LOAD)(&e))
}

pub struct RunArgs {
    pub mesh: PathBuf,
    pub image: PathBuf,
    pub script: PathBuf,
    pub out: PathBuf,
    pub relations: Option<PathBuf>,
    pub continue_on_error: bool,
}

/// Runs a script headlessly and writes `transcript.json`, `image.png`,
/// `uv.png`, `relations.json` and `model/` into the output directory.
pub fn run(args: &RunArgs, log: &mut impl Write) -> Result<Transcript, StageError> {
    let mut script =
        persistence::parse_script(&args.script).map_err(|e| stage("parse-script", persist_code(&e))(&e))?;
    script.continue_on_error |= args.continue_on_error;
    let mesh = load_mesh(&args.mesh)?;
    let mut session = build_session(mesh, &args.image, args.relations.as_deref(), SessionConfig::default())?;
    std::fs::create_dir_all(&args.out).map_err(|e| stage("output", exit::IO)(&e))?;
    session.set_export_root(&args.out);

    let transcript = session.run_script(&script);
    let io = stage("export", exit::IO);
    let text = serde_json::to_string_pretty(&transcript).expect("transcript serializes");
    std::fs::write(args.out.join("transcript.json"), text).map_err(|e| io(&e))?;
    persistence::export_png(&session.image_canvas().composite(), &args.out.join("image.png")).map_err(|e| io(&e))?;
    persistence::export_png(&session.uv_canvas().composite(), &args.out.join("uv.png")).map_err(|e| io(&e))?;
    persistence::save_relations(session.relations(), &args.out.join("relations.json")).map_err(|e| io(&e))?;
    persistence::export_colored_model(session.mesh(), &session.uv_canvas().composite(), &args.out.join("model"))
        .map_err(|e| io(&e))?;

    let _ = writeln!(
        log,
        "{} commands run, {} failed, {} groups saved",
        transcript.entries.len(),
        transcript.failures().count(),
        session.relations().len()
    );
    for warning in transcript.warnings() {
        let _ = writeln!(log, "warning: {warning}");
    }
    for f in transcript.failures() {
        let e = f.error.as_ref().expect("failed entries carry an error");
        let _ = writeln!(log, "failed: command {} ({}): {} {}", f.index, f.command, e.code, e.message);
    }
    if let Some(index) = transcript.aborted_at {
        return Err(StageError {
            stage: "script",
            code: exit::SCRIPT,
            message: format!("aborted at command {index}"),
        });
    }
    Ok(transcript)
}

/// Runs the oracle suites and prints a pass/fail table.
pub fn verify(suite: Option<&str>, opts: &VerifyOptions, out: &mut impl Write) -> Result<(), StageError> {
    let names: Vec<&str> = match suite {
        Some(s) if verify::SUITES.contains(&s) => vec![s],
        Some(s) => {
            return Err(StageError {
                stage: "verify",
                code: exit::USAGE,
                message: format!("unknown suite {s:?}; choose from {}", verify::SUITES.join(", ")),
            })
        }
        None => verify::SUITES.to_vec(),
    };
    let _ = writeln!(out, "{:<12} {:<62} {:<16} {:<22} Pass/Fail", "Suite", "Check", "Expected", "Actual");
    let mut failed = Vec::new();
    for name in names {
        let report = verify::run_suite(name, opts).expect("suite name checked");
        for row in &report.rows {
            let _ = writeln!(
                out,
                "{:<12} {:<62} {:<16} {:<22} {}",
                report.name,
                row.description,
                row.expected,
                row.actual,
                if row.pass { "Pass" } else { "Fail" }
            );
        }
        let _ = writeln!(out, "{:<12} ({:.2?})", "", report.elapsed);
        if !report.passed() {
            failed.push(report.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(StageError {
            stage: "verify",
            code: exit::VERIFY,
            message: format!("failed suites: {}", failed.join(", ")),
        })
    }
}
