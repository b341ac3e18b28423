//! Region-correspondence painting engine.
//!
//! Creators mark matching regions on a mesh's UV texture and on a front-view
//! image; the saved marker groups then let an end user color the model by
//! tapping the image.
//!
//! The modules build on each other bottom-up: [`geometry`] turns screen
//! pixels into texels, [`canvas`] holds paint, [`relation`] stores marker
//! groups and performs fills, [`session`] drives the whole workflow from
//! [`session::Command`]s, and [`persistence`] reads and writes every file.

pub mod canvas;
pub mod geometry;
mod par;
pub mod persistence;
pub mod pixel;
pub mod relation;
pub mod session;
pub mod verify;

pub use canvas::{BrushStamp, PaintCanvas};
pub use geometry::{AccelIndex, Camera, Mesh, Ray};
pub use par::is_parallel;
pub use pixel::{PixelPos, Rect, Rgba};
pub use relation::{RelationGroup, RelationSet};
pub use session::{Command, Mode, Session, SessionConfig};
