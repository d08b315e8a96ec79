//! HTTP streaming service over a quality ladder of encoded streams.
//!
//! Routes:
//!
//! | route | response |
//! |---|---|
//! | `GET /manifest` | manifest JSON |
//! | `GET /header/{q}` | stream header bytes |
//! | `GET /gof/{q}/{i}` | frame records of GOF `i` |
//! | `GET /trailer/{q}` | seek index bytes |
//! | `GET /render?quality&frame&yaw&pitch&radius&w&h` | PNG |
//! | `GET /stats` | decode, render and cache metrics |
//!
//! Concatenating the header, every GOF in order and the trailer yields the
//! stream file byte for byte. Frames are decoded server-side; a request
//! for frame `t` decodes only frames of `t`'s GOF, starting from the
//! nearest frame already decoded.

mod error;
mod routes;
mod state;
mod stats;

use std::net::SocketAddr;
use std::sync::Arc;

pub use error::ServiceError;
pub use routes::{router, RenderQuery};
pub use state::{orbit_camera, render_png, AppState, OrbitView, ServiceConfig};
pub use stats::{CacheStats, DecodeStats, Histogram, Stats};

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
