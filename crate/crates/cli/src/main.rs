use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use uvlink::serve::{Server, SessionSeed};
use uvlink::{exit, StageError};
use uvlink_core::persistence;
use uvlink_core::session::SessionConfig;
use uvlink_core::verify::VerifyOptions;

#[derive(Parser)]
#[command(name = "uvlink", version, about = "Mark 2D/3D region correspondences and paint through them")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print counts, UV bounds and degenerate triangles of an OBJ mesh.
    Inspect { mesh: PathBuf },
    /// Run a script headlessly and export the results.
    Run {
        #[arg(long)]
        mesh: PathBuf,
        /// Front-view line art (PNG); transparent areas show the paint.
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Relation file to load before the script runs.
        #[arg(long)]
        relations: Option<PathBuf>,
        #[arg(long)]
        continue_on_error: bool,
    },
    /// Run the built-in oracle suites.
    Verify {
        #[arg(long)]
        suite: Option<String>,
        /// Distance threshold to check as the standard f.
        #[arg(long, default_value_t = 8.0)]
        f: f64,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Serve the live-session protocol (newline-delimited JSON over TCP).
    Serve {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        image: PathBuf,
        /// 0 picks a free port; the bound address is printed on stdout.
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        relations: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("UVLINK_LOG", "warn")).init();
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    let result = match cli.command {
        Cmd::Inspect { mesh } => uvlink::inspect(&mesh, &mut stdout),
        Cmd::Run {
            mesh,
            image,
            script,
            out,
            relations,
            continue_on_error,
        } => uvlink::run(
            &uvlink::RunArgs {
                mesh,
                image,
                script,
                out,
                relations,
                continue_on_error,
            },
            &mut stdout,
        )
        .map(|_| ()),
        Cmd::Verify { suite, f, seed } => {
            let opts = VerifyOptions {
                f,
                seed,
                ..VerifyOptions::default()
            };
            uvlink::verify(suite.as_deref(), &opts, &mut stdout)
        }
        Cmd::Serve {
            mesh,
            image,
            port,
            host,
            relations,
        } => serve(mesh, image, host, port, relations),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(e) => {
            eprintln!("error {e}");
            ExitCode::from(e.code)
        }
    }
}

fn serve(mesh: PathBuf, image: PathBuf, host: String, port: u16, relations: Option<PathBuf>) -> Result<(), StageError> {
    let fail = |stage: &'static str, code: u8| {
        move |e: &dyn std::fmt::Display| StageError {
            stage,
            code,
            message: e.to_string(),
        }
    };
    let mesh = uvlink::load_mesh(&mesh)?;
    let (base, overlay) = uvlink::load_front_view(&image)?;
    let relations = relations
        .map(|p| persistence::load_relations(&p))
        .transpose()
        .map_err(|e| fail("load-relations", exit::PARSE)(&e))?;
    let mut server = Server::new(SessionSeed {
        mesh,
        image: base,
        overlay: Some(overlay),
        config: SessionConfig::default(),
        relations,
    })
    .map_err(|e| fail("session", exit::LOAD)(&e))?;
    let io = fail("serve", exit::IO);
    let listener = TcpListener::bind((host.as_str(), port)).map_err(|e| io(&e))?;
    println!("listening on {}", listener.local_addr().map_err(|e| io(&e))?);
    server.run(listener).map_err(|e| io(&e))
}
