//! Newline-delimited JSON protocol over TCP.
//!
//! Requests are `{"id": N, "cmd": NAME, "params": {...}}`; each gets exactly
//! one response `{"id": N, "ok": true, "result": ...}` or
//! `{"id": N, "ok": false, "error": {"code", "message"}}`. Successful
//! mutating commands are preceded by `dirty` events carrying the changed
//! rectangle of the composited canvas as base64 RGBA, numbered by a
//! per-server `seq` that only increases.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use image::RgbaImage;
use serde_json::{json, Map, Value};
use uvlink_core::geometry::Mesh;
use uvlink_core::pixel::Rect;
use uvlink_core::relation::RelationSet;
use uvlink_core::session::{CanvasKind, Command, Session, SessionConfig, SessionError};

/// Everything needed to (re)create a session for a client.
pub struct SessionSeed {
    pub mesh: Mesh,
    pub image: RgbaImage,
    pub overlay: Option<RgbaImage>,
    pub config: SessionConfig,
    /// Loaded into every new session.
    pub relations: Option<RelationSet>,
}

impl SessionSeed {
    pub fn build(&self, config: SessionConfig) -> Result<Session, SessionError> {
        let mut session = Session::new(config, self.mesh.clone(), self.image.clone(), self.overlay.clone())?;
        if let Some(set) = &self.relations {
            session.replace_relations(set.clone())?;
        }
        Ok(session)
    }
}

pub struct Server {
    seed: SessionSeed,
    session: Session,
    seq: u64,
}

struct Failure {
    code: &'static str,
    message: String,
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        Failure {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

fn bad_request(message: impl Into<String>) -> Failure {
    Failure {
        code: "BAD_REQUEST",
        message: message.into(),
    }
}

/// Raw RGBA bytes of `rect`, row-major.
pub fn crop_rgba(image: &RgbaImage, rect: Rect) -> Vec<u8> {
    let row_len = 4 * image.width() as usize;
    let raw = image.as_raw();
    let mut out = Vec::with_capacity(4 * (rect.width * rect.height) as usize);
    for y in rect.y..rect.bottom() {
        let start = y as usize * row_len + 4 * rect.x as usize;
        out.extend_from_slice(&raw[start..start + 4 * rect.width as usize]);
    }
    out
}

fn canvas_param(params: &Map<String, Value>) -> Result<CanvasKind, Failure> {
    let v = params.get("canvas").cloned().unwrap_or(Value::Null);
    serde_json::from_value(v).map_err(|_| bad_request("params.canvas must be \"image\" or \"uv\""))
}

impl Server {
    pub fn new(seed: SessionSeed) -> Result<Self, SessionError> {
        let session = seed.build(seed.config.clone())?;
        Ok(Self { seed, session, seq: 0 })
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    /// Handles one request line and returns the lines to send back, events
    /// first and the response last.
    pub fn handle_line(&mut self, line: &str) -> Vec<Value> {
        let request: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(e) => return vec![error_response(Value::Null, bad_request(format!("invalid JSON: {e}")))],
        };
        let id = request.get("id").cloned().unwrap_or(Value::Null);
        if !id.is_u64() && !id.is_i64() {
            return vec![error_response(id, bad_request("request needs an integer \"id\""))];
        }
        let Some(cmd) = request.get("cmd").and_then(Value::as_str) else {
            return vec![error_response(id, bad_request("request needs a string \"cmd\""))];
        };
        let params = match request.get("params") {
            None | Some(Value::Null) => Map::new(),
            Some(Value::Object(m)) => m.clone(),
            Some(_) => return vec![error_response(id, bad_request("\"params\" must be an object"))],
        };
        let mut events = Vec::new();
        let response = match self.dispatch(cmd, params, &mut events) {
            Ok(result) => json!({ "id": id, "ok": true, "result": result }),
            Err(f) => {
                events.clear();
                error_response(id, f)
            }
        };
        events.push(response);
        events
    }

    fn dispatch(&mut self, cmd: &str, params: Map<String, Value>, events: &mut Vec<Value>) -> Result<Value, Failure> {
        match cmd {
            "new_session" => {
                let config: SessionConfig = if params.is_empty() {
                    self.seed.config.clone()
                } else {
                    serde_json::from_value(Value::Object(params)).map_err(|e| bad_request(e.to_string()))?
                };
                self.session = self.seed.build(config)?;
                Ok(self.state())
            }
            "get_state" => Ok(self.state()),
            "get_texture" => {
                let canvas = canvas_param(&params)?;
                let image = self.session.canvas(canvas).composite();
                let mut png = std::io::Cursor::new(Vec::new());
                image
                    .write_to(&mut png, image::ImageFormat::Png)
                    .map_err(|e| Failure {
                        code: "IO",
                        message: e.to_string(),
                    })?;
                Ok(json!({
                    "canvas": canvas,
                    "width": image.width(),
                    "height": image.height(),
                    "png": B64.encode(png.into_inner()),
                }))
            }
            "get_mesh" => {
                let mesh = self.session.mesh();
                Ok(json!({
                    "positions": mesh.positions().iter().map(|p| [p.x, p.y, p.z]).collect::<Vec<_>>(),
                    "uvs": mesh.uvs().iter().map(|uv| [uv.x, uv.y]).collect::<Vec<_>>(),
                    "triangles": mesh.triangles(),
                }))
            }
            name if Command::NAMES.contains(&name) => {
                let mut record = params;
                record.insert("cmd".into(), Value::String(name.into()));
                let command: Command =
                    serde_json::from_value(Value::Object(record)).map_err(|e| bad_request(e.to_string()))?;
                let outcome = self.session.apply(&command)?;
                for region in &outcome.dirty {
                    let image = self.session.canvas(region.canvas).composite();
                    self.seq += 1;
                    events.push(json!({
                        "event": "dirty",
                        "seq": self.seq,
                        "canvas": region.canvas,
                        "rect": region.rect,
                        "data": B64.encode(crop_rgba(&image, region.rect)),
                    }));
                }
                Ok(serde_json::to_value(&outcome).expect("outcome serializes"))
            }
            other => Err(Failure {
                code: "UNKNOWN_COMMAND",
                message: format!("unknown command {other:?}"),
            }),
        }
    }

    fn state(&self) -> Value {
        let s = &self.session;
        let dims = |k: CanvasKind| {
            let (w, h) = s.canvas(k).dimensions();
            json!({ "width": w, "height": h })
        };
        json!({
            "mode": s.mode(),
            "color": s.color(),
            "brush_radius": s.brush_radius(),
            "groups": s.relations().len(),
            "f": s.relations().f(),
            "pending": { "image": s.image_canvas().pending().len(), "uv": s.uv_canvas().pending().len() },
            "draft": { "pic_points": s.draft().pic_points.len(), "word_points": s.draft().word_points.len() },
            "image": dims(CanvasKind::Image),
            "uv": dims(CanvasKind::Uv),
        })
    }

    /// Serves one connection until the client closes it.
    pub fn serve_connection(&mut self, stream: TcpStream) -> std::io::Result<()> {
        let peer = stream.peer_addr().ok();
        log::info!("client connected: {peer:?}");
        let mut writer = std::io::BufWriter::new(stream.try_clone()?);
        for line in BufReader::new(stream).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            for out in self.handle_line(&line) {
                serde_json::to_writer(&mut writer, &out)?;
                writer.write_all(b"\n")?;
            }
            writer.flush()?;
        }
        log::info!("client disconnected: {peer:?}");
        Ok(())
    }

    /// Accepts clients one at a time, forever.
    pub fn run(&mut self, listener: TcpListener) -> std::io::Result<()> {
        for stream in listener.incoming() {
            match stream {
                Ok(s) => {
                    if let Err(e) = self.serve_connection(s) {
                        log::warn!("connection ended with error: {e}");
                    }
                }
                Err(e) => log::warn!("accept failed: {e}"),
            }
        }
        Ok(())
    }
}

fn error_response(id: Value, f: Failure) -> Value {
    json!({ "id": id, "ok": false, "error": { "code": f.code, "message": f.message } })
}
