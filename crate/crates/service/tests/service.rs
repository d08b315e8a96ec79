use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use rerf_core::codec::encode_sequence;
use rerf_core::{
    generate_sequence, Decoder, EncodeConfig, Manifest, QualityLevel, RgbImage, SceneSpec,
};
use rerf_service::{render_png, router, AppState, OrbitView, ServiceConfig};
use tower::ServiceExt;

const FRAMES: usize = 40;
const GOF: u32 = 20;

/// Encodes the demo scene at each S_q into `dir` and writes a manifest.
fn fixture(dir: &Path, ladder: &[f32]) -> PathBuf {
    let seq = generate_sequence(&SceneSpec::demo(32, FRAMES, 2)).unwrap();
    let cfg = EncodeConfig {
        s_q: ladder.to_vec(),
        gof_length: GOF,
        ..EncodeConfig::default()
    };
    let streams = encode_sequence(&seq.grids, &seq.motions, &cfg).unwrap();
    let qualities = streams
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let name = format!("q{i}.rrfv");
            std::fs::write(dir.join(&name), &s.bytes).unwrap();
            QualityLevel {
                s_q: s.s_q,
                avg_kbps: Manifest::kbps(s.bytes.len() as u64, FRAMES as u32, cfg.frame_rate),
                path: name,
            }
        })
        .collect();
    let manifest = Manifest {
        frame_count: FRAMES as u32,
        gof_length: GOF,
        frame_rate: cfg.frame_rate,
        qualities,
    };
    let path = dir.join("manifest.json");
    manifest.save(&path).unwrap();
    path
}

fn app(manifest: &Path) -> (Arc<AppState>, Router) {
    let mut cfg = ServiceConfig::new(manifest);
    cfg.samples = 96;
    let state = Arc::new(AppState::new(cfg).unwrap());
    (state.clone(), router(state))
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    let resp = app
        .clone()
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let body = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, body.to_vec())
}

fn render_uri(q: usize, frame: usize, yaw: f32, pitch: f32) -> String {
    format!("/render?quality={q}&frame={frame}&yaw={yaw}&pitch={pitch}&radius=3.5&w=40&h=32")
}

#[tokio::test]
async fn manifest_lists_every_quality() {
    let dir = tempfile::tempdir().unwrap();
    let one = tempfile::tempdir().unwrap();
    let (_, app3) = app(&fixture(dir.path(), &[0.1, 1.0, 8.0]));
    let (_, app1) = app(&fixture(one.path(), &[1.0]));

    let (status, body) = get(&app3, "/manifest").await;
    assert_eq!(status, StatusCode::OK);
    let m: Manifest = serde_json::from_slice(&body).unwrap();
    assert_eq!(m.qualities.len(), 3);
    assert!(m
        .qualities
        .windows(2)
        .all(|w| w[0].avg_kbps > w[1].avg_kbps));
    assert_eq!(m.gof_count(), 2);

    let (_, body) = get(&app1, "/manifest").await;
    let m: Manifest = serde_json::from_slice(&body).unwrap();
    assert_eq!(m.qualities.len(), 1);

    std::fs::remove_file(dir.path().join("q2.rrfv")).unwrap();
    let (status, _) = get(&app3, "/manifest").await;
    assert_eq!(status, StatusCode::INTERNAL_SERVER_ERROR);
}

#[tokio::test]
async fn served_pieces_reassemble_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture(dir.path(), &[0.5]);
    let (state, app) = app(&manifest);
    let mut bytes = get(&app, "/header/0").await.1;
    for g in 0..2 {
        let (status, body) = get(&app, &format!("/gof/0/{g}")).await;
        assert_eq!(status, StatusCode::OK);
        bytes.extend(body);
    }
    bytes.extend(get(&app, "/trailer/0").await.1);
    assert_eq!(bytes, std::fs::read(dir.path().join("q0.rrfv")).unwrap());
    assert_eq!(state.stats().bytes_served, bytes.len() as u64);

    assert_eq!(get(&app, "/gof/0/2").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/gof/1/0").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/header/7").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn second_gof_decodes_without_the_first() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture(dir.path(), &[0.5]);
    let (_, app) = app(&manifest);
    let header = get(&app, "/header/0").await.1;
    let gof1 = get(&app, "/gof/0/1").await.1;
    let trailer = get(&app, "/trailer/0").await.1;

    // Rebuild a stream where GOF 0's bytes were never fetched.
    let full = std::fs::read(dir.path().join("q0.rrfv")).unwrap();
    let mut partial = header.clone();
    partial.resize(full.len() - gof1.len() - trailer.len(), 0);
    partial.extend(&gof1);
    partial.extend(&trailer);
    let partial_dec = Decoder::open(partial.as_slice()).unwrap();
    let full_dec = Decoder::open(full.as_slice()).unwrap();
    for t in 20..40 {
        assert_eq!(
            partial_dec.decode_frame(t).unwrap(),
            full_dec.decode_frame(t).unwrap()
        );
    }
}

#[tokio::test]
async fn render_matches_direct_decode_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture(dir.path(), &[0.5]);
    let (state, app) = app(&manifest);
    let uri = render_uri(0, 17, 30.0, 20.0);
    let (status, a) = get(&app, &uri).await;
    assert_eq!(status, StatusCode::OK);
    let (_, b) = get(&app, &uri).await;
    assert_eq!(a, b);

    let dec = Decoder::open(std::fs::read(dir.path().join("q0.rrfv")).unwrap()).unwrap();
    let grid = dec.decode_frame(17).unwrap();
    let view = OrbitView {
        yaw: 30.0,
        pitch: 20.0,
        radius: 3.5,
        width: 40,
        height: 32,
    };
    let direct = render_png(&grid, &dec.header().decoder, view, state.config().samples).unwrap();
    assert_eq!(a, direct);
    let img = RgbImage::from_png(&a).unwrap();
    assert_eq!((img.width(), img.height()), (40, 32));
}

#[tokio::test]
async fn seeking_decodes_only_the_needed_gofs() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture(dir.path(), &[0.5]);
    let (state, app) = app(&manifest);
    for frame in [0, 37, 5] {
        assert_eq!(
            get(&app, &render_uri(0, frame, 0.0, 10.0)).await.0,
            StatusCode::OK
        );
    }
    let stats = state.stats();
    let per_gof: Vec<(&str, u64)> = stats
        .decode
        .per_gof
        .iter()
        .map(|(k, v)| (k.as_str(), *v))
        .collect();
    // 0 alone, then 20..=37, then 1..=5 continuing from the decoded frame 0.
    assert_eq!(per_gof, vec![("0/0", 6), ("0/1", 18)]);
    assert_eq!(stats.decode.calls, 3);
    assert_eq!(stats.cache.misses, 3);
}

#[tokio::test]
async fn stats_account_for_decode_time() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture(dir.path(), &[0.5]);
    let (_, app) = app(&manifest);

    let (status, body) = get(&app, "/stats").await;
    assert_eq!(status, StatusCode::OK);
    let fresh: serde_json::Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(fresh["decode"]["calls"], 0);
    assert_eq!(fresh["render"]["count"], 0);
    assert_eq!(fresh["cache"]["hits"], 0);

    get(&app, &render_uri(0, 3, 0.0, 0.0)).await;
    let one: serde_json::Value = serde_json::from_slice(&get(&app, "/stats").await.1).unwrap();
    assert_eq!(one["decode"]["calls"], 1);
    assert_eq!(one["render"]["count"], 1);
    for stage in ["io", "entropy", "dequantize", "idct", "warp_add"] {
        assert_eq!(one["decode"]["stages"][stage]["count"], 1, "{stage}");
    }

    // A seek storm across both GOFs.
    for frame in [39, 2, 25, 11, 30, 19, 21, 0] {
        get(&app, &render_uri(0, frame, 0.0, 0.0)).await;
    }
    let s: serde_json::Value = serde_json::from_slice(&get(&app, "/stats").await.1).unwrap();
    let stages: f64 = ["io", "entropy", "dequantize", "idct", "warp_add"]
        .iter()
        .map(|n| s["decode"]["stages"][n]["total_ms"].as_f64().unwrap())
        .sum();
    let wall = s["decode"]["wall"]["total_ms"].as_f64().unwrap();
    assert!(
        (stages - wall).abs() <= 0.1 * wall,
        "stages {stages} ms vs wall {wall} ms"
    );
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_requests_match_sequential_ones() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture(dir.path(), &[0.5, 4.0]);
    let uris: Vec<String> = (0..8)
        .map(|i| {
            render_uri(
                i % 2,
                [3, 37, 12, 25, 3, 19, 38, 20][i],
                45.0 * i as f32,
                10.0,
            )
        })
        .collect();

    let (_, seq_app) = app(&manifest);
    let mut sequential = Vec::new();
    for u in &uris {
        sequential.push(get(&seq_app, u).await);
    }

    let (_, storm_app) = app(&manifest);
    let handles: Vec<_> = uris
        .iter()
        .cloned()
        .map(|u| {
            let a = storm_app.clone();
            tokio::spawn(async move { get(&a, &u).await })
        })
        .collect();
    for (h, want) in handles.into_iter().zip(&sequential) {
        let got = h.await.unwrap();
        assert_eq!(got.0, StatusCode::OK);
        assert_eq!(&got, want);
    }
}

#[tokio::test]
async fn malformed_requests_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture(dir.path(), &[0.5]);
    let (_, app) = app(&manifest);
    for uri in [
        "/render?quality=0&frame=1",
        "/render?quality=0&frame=1&yaw=a&pitch=0&radius=3&w=8&h=8",
        "/render?quality=0&frame=1&yaw=0&pitch=0&radius=-1&w=8&h=8",
        "/render?quality=0&frame=1&yaw=0&pitch=0&radius=3&w=0&h=8",
        "/render?quality=0&frame=1&yaw=0&pitch=0&radius=3&w=5000&h=8",
        "/gof/x/0",
    ] {
        assert_eq!(get(&app, uri).await.0, StatusCode::BAD_REQUEST, "{uri}");
    }
    assert_eq!(
        get(&app, &render_uri(0, 40, 0.0, 0.0)).await.0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        get(&app, &render_uri(3, 0, 0.0, 0.0)).await.0,
        StatusCode::NOT_FOUND
    );
}
