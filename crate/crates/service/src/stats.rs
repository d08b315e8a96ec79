use std::collections::BTreeMap;
use std::time::Duration;

use rerf_core::StageTimes;
use serde::Serialize;

/// Upper bucket bounds in milliseconds; the last bucket is open.
const BUCKETS_MS: [f64; 12] = [
    0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0, 25.0, 50.0, 100.0, 250.0, 1000.0,
];

#[derive(Debug, Clone, Serialize)]
pub struct Histogram {
    pub count: u64,
    pub total_ms: f64,
    pub max_ms: f64,
    /// `(upper bound in ms, samples)`; `None` marks the open last bucket.
    pub buckets: Vec<(Option<f64>, u64)>,
}

impl Default for Histogram {
    fn default() -> Self {
        Histogram {
            count: 0,
            total_ms: 0.0,
            max_ms: 0.0,
            buckets: BUCKETS_MS
                .iter()
                .map(|b| Some(*b))
                .chain([None])
                .map(|b| (b, 0))
                .collect(),
        }
    }
}

impl Histogram {
    pub fn record(&mut self, d: Duration) {
        let ms = d.as_secs_f64() * 1e3;
        self.count += 1;
        self.total_ms += ms;
        self.max_ms = self.max_ms.max(ms);
        let slot = BUCKETS_MS
            .iter()
            .position(|b| ms <= *b)
            .unwrap_or(BUCKETS_MS.len());
        self.buckets[slot].1 += 1;
    }

    pub fn mean_ms(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total_ms / self.count as f64
        }
    }
}

/// One sample per decode call, split by stage.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DecodeStats {
    /// Decode calls (cache misses that ran the decoder).
    pub calls: u64,
    pub frames_decoded: u64,
    pub wall: Histogram,
    pub stages: BTreeMap<&'static str, Histogram>,
    /// Frames decoded per `"quality/gof"`.
    pub per_gof: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub hit_rate: f64,
    pub entries: usize,
    pub capacity: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Stats {
    pub decode: DecodeStats,
    pub render: Histogram,
    pub cache: CacheStats,
    pub bytes_served: u64,
}

impl Stats {
    pub fn record_decode(
        &mut self,
        quality: usize,
        gof: usize,
        frames: u64,
        times: &StageTimes,
        wall: Duration,
    ) {
        let d = &mut self.decode;
        d.calls += 1;
        d.frames_decoded += frames;
        d.wall.record(wall);
        for (name, t) in times.stages() {
            d.stages.entry(name).or_default().record(t);
        }
        *d.per_gof.entry(format!("{quality}/{gof}")).or_default() += frames;
    }

    pub fn record_lookup(&mut self, hit: bool) {
        if hit {
            self.cache.hits += 1;
        } else {
            self.cache.misses += 1;
        }
        let n = self.cache.hits + self.cache.misses;
        self.cache.hit_rate = self.cache.hits as f64 / n as f64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_buckets() {
        let mut h = Histogram::default();
        h.record(Duration::from_micros(50));
        h.record(Duration::from_millis(3));
        h.record(Duration::from_secs(5));
        assert_eq!(h.count, 3);
        assert_eq!(h.buckets[0].1, 1);
        assert_eq!(h.buckets[5], (Some(5.0), 1));
        assert_eq!(h.buckets.last().unwrap(), &(None, 1));
        assert!((h.max_ms - 5000.0).abs() < 1e-9);
    }

    #[test]
    fn hit_rate() {
        let mut s = Stats::default();
        s.record_lookup(true);
        s.record_lookup(false);
        s.record_lookup(false);
        s.record_lookup(true);
        assert_eq!(s.cache.hit_rate, 0.5);
    }
}
