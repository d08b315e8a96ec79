use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::Instant;

use lru::LruCache;
use rerf_core::{
    render_image, ByteSource, Camera, Decoder, FeatureGrid, FileSource, Manifest, RenderConfig,
    StageTimes,
};

use crate::error::ServiceError;
use crate::stats::Stats;

pub type StreamDecoder = Decoder<FileSource>;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub manifest_path: PathBuf,
    /// Decoded grids kept in the LRU cache.
    pub cache_frames: usize,
    pub max_width: u32,
    pub max_height: u32,
    /// Ray samples for `/render`.
    pub samples: usize,
}

impl ServiceConfig {
    pub fn new(manifest_path: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            manifest_path: manifest_path.into(),
            cache_frames: 8,
            max_width: 1024,
            max_height: 1024,
            samples: RenderConfig::default().samples,
        }
    }
}

/// Orbit view requested through `/render`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitView {
    pub yaw: f32,
    pub pitch: f32,
    pub radius: f32,
    pub width: u32,
    pub height: u32,
}

type FrameKey = (usize, usize);

pub struct AppState {
    config: ServiceConfig,
    manifest_dir: PathBuf,
    manifest: Manifest,
    streams: Vec<Mutex<Option<Arc<StreamDecoder>>>>,
    cache: Mutex<LruCache<FrameKey, Arc<FeatureGrid>>>,
    /// Most recently decoded grid of every `(quality, gof)`.
    pins: Mutex<HashMap<FrameKey, (usize, Arc<FeatureGrid>)>>,
    flights: Mutex<HashMap<FrameKey, Arc<Mutex<()>>>>,
    stats: Mutex<Stats>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl AppState {
    /// Loads the manifest. Stream files are opened on first use, so a
    /// missing stream surfaces as a request error rather than a failed
    /// start.
    pub fn new(config: ServiceConfig) -> Result<Self, ServiceError> {
        let manifest = Manifest::load(&config.manifest_path)?;
        let manifest_dir = config
            .manifest_path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let capacity = NonZeroUsize::new(config.cache_frames)
            .ok_or_else(|| ServiceError::BadRequest("cache must hold at least one frame".into()))?;
        let mut stats = Stats::default();
        stats.cache.capacity = capacity.get();
        Ok(AppState {
            streams: manifest
                .qualities
                .iter()
                .map(|_| Mutex::new(None))
                .collect(),
            manifest,
            manifest_dir,
            cache: Mutex::new(LruCache::new(capacity)),
            pins: Mutex::default(),
            flights: Mutex::default(),
            stats: Mutex::new(stats),
            config,
        })
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    /// Re-reads the manifest and checks that every stream file is present.
    pub fn current_manifest(&self) -> Result<Manifest, ServiceError> {
        let m = Manifest::load(&self.config.manifest_path)?;
        for q in 0..m.qualities.len() {
            let path = m
                .stream_path(&self.manifest_dir, q)
                .expect("index in range");
            if !path.is_file() {
                return Err(ServiceError::Internal(format!(
                    "stream file {} is missing",
                    path.display()
                )));
            }
        }
        Ok(m)
    }

    pub fn stats(&self) -> Stats {
        let mut s = lock(&self.stats).clone();
        s.cache.entries = lock(&self.cache).len();
        s
    }

    pub fn add_bytes_served(&self, n: usize) {
        lock(&self.stats).bytes_served += n as u64;
    }

    pub fn decoder(&self, quality: usize) -> Result<Arc<StreamDecoder>, ServiceError> {
        let slot = self
            .streams
            .get(quality)
            .ok_or_else(|| ServiceError::NotFound(format!("unknown quality {quality}")))?;
        let mut slot = lock(slot);
        if let Some(d) = slot.as_ref() {
            return Ok(d.clone());
        }
        let path = self
            .manifest
            .stream_path(&self.manifest_dir, quality)
            .expect("index in range");
        let source = FileSource::open(&path)
            .map_err(|e| ServiceError::Internal(format!("cannot open {}: {e}", path.display())))?;
        let d = Arc::new(Decoder::open(source)?);
        *slot = Some(d.clone());
        Ok(d)
    }

    /// Raw bytes of `range` in the stream of `quality`.
    pub fn stream_bytes(
        &self,
        quality: usize,
        range: impl FnOnce(&StreamDecoder) -> rerf_core::Result<std::ops::Range<u64>>,
    ) -> Result<Vec<u8>, ServiceError> {
        let d = self.decoder(quality)?;
        let r = range(&d)?;
        let bytes = d.reader().source().read_range(r)?;
        self.add_bytes_served(bytes.len());
        Ok(bytes)
    }

    fn flight(&self, key: FrameKey) -> Arc<Mutex<()>> {
        lock(&self.flights).entry(key).or_default().clone()
    }

    /// Latest already-decoded frame of `frame`'s GOF at or before it.
    fn best_start(
        &self,
        quality: usize,
        gof: usize,
        gof_start: usize,
        frame: usize,
    ) -> Option<(usize, Arc<FeatureGrid>)> {
        let pinned = lock(&self.pins)
            .get(&(quality, gof))
            .filter(|(f, _)| *f <= frame)
            .cloned();
        let cache = lock(&self.cache);
        let cached = (gof_start..=frame)
            .rev()
            .find_map(|f| cache.peek(&(quality, f)).map(|g| (f, g.clone())));
        match (pinned, cached) {
            (Some(p), Some(c)) => Some(if p.0 >= c.0 { p } else { c }),
            (p, c) => p.or(c),
        }
    }

    /// Decoded grid of `frame`, from the cache or by decoding forward from
    /// the nearest decoded frame of its GOF. Concurrent requests within one
    /// GOF share a single decode.
    pub fn frame(&self, quality: usize, frame: usize) -> Result<Arc<FeatureGrid>, ServiceError> {
        let dec = self.decoder(quality)?;
        if frame >= dec.frame_count() {
            return Err(ServiceError::NotFound(format!(
                "frame {frame} past the end ({} frames)",
                dec.frame_count()
            )));
        }
        let key = (quality, frame);
        if let Some(g) = lock(&self.cache).get(&key).cloned() {
            lock(&self.stats).record_lookup(true);
            return Ok(g);
        }
        let gof_start = dec.reader().gof_start(frame);
        let gof = gof_start / dec.header().gof_length as usize;
        let flight = self.flight((quality, gof));
        let _guard = lock(&flight);
        if let Some(g) = lock(&self.cache).get(&key).cloned() {
            lock(&self.stats).record_lookup(true);
            return Ok(g);
        }
        lock(&self.stats).record_lookup(false);

        let (from, reference) = match self.best_start(quality, gof, gof_start, frame) {
            Some((f, g)) if f == frame => {
                lock(&self.cache).put(key, g.clone());
                return Ok(g);
            }
            Some((f, g)) => (f + 1, Some(Arc::unwrap_or_clone(g))),
            None => (gof_start, None),
        };
        let mut times = StageTimes::default();
        let mut frames = 0u64;
        let start = Instant::now();
        let grid = dec.decode_from(from, reference, frame, &mut times, &mut |_, _| frames += 1)?;
        let wall = start.elapsed();
        lock(&self.stats).record_decode(quality, gof, frames, &times, wall);

        let grid = Arc::new(grid);
        lock(&self.pins).insert((quality, gof), (frame, grid.clone()));
        lock(&self.cache).put(key, grid.clone());
        Ok(grid)
    }

    /// Renders `frame` from an orbit view and encodes it as PNG.
    pub fn render(
        &self,
        quality: usize,
        frame: usize,
        view: OrbitView,
    ) -> Result<Vec<u8>, ServiceError> {
        if view.width == 0
            || view.height == 0
            || view.width > self.config.max_width
            || view.height > self.config.max_height
        {
            return Err(ServiceError::BadRequest(format!(
                "image size {}x{} outside 1..={}x1..={}",
                view.width, view.height, self.config.max_width, self.config.max_height
            )));
        }
        if ![view.yaw, view.pitch, view.radius]
            .iter()
            .all(|v| v.is_finite())
            || view.radius <= 0.0
        {
            return Err(ServiceError::BadRequest(
                "yaw, pitch and radius must be finite, radius positive".into(),
            ));
        }
        let grid = self.frame(quality, frame)?;
        let dec = self.decoder(quality)?;
        let start = Instant::now();
        let png = render_png(&grid, &dec.header().decoder, view, self.config.samples)?;
        lock(&self.stats).render.record(start.elapsed());
        Ok(png)
    }
}

/// The orbit camera and render settings used for `/render`.
pub fn orbit_camera(grid: &FeatureGrid, view: OrbitView) -> Camera {
    Camera::orbit_bbox(
        &grid.bbox(),
        view.radius,
        view.yaw,
        view.pitch,
        view.width,
        view.height,
    )
}

pub fn render_png(
    grid: &FeatureGrid,
    decoder: &rerf_core::ColorDecoder,
    view: OrbitView,
    samples: usize,
) -> rerf_core::Result<Vec<u8>> {
    let camera = orbit_camera(grid, view);
    camera.validate()?;
    let cfg = RenderConfig {
        samples,
        ..RenderConfig::fit(&grid.bbox(), &camera)
    };
    render_image(grid, decoder, &camera, &cfg)?.to_png()
}
