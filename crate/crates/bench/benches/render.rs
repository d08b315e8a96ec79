use criterion::{criterion_group, criterion_main, Criterion};
use rerf_core::{render_image, Camera, ColorDecoder, DecoderMlp, RenderConfig};

fn render(c: &mut Criterion) {
    let seq = rerf_bench::sequence(32, 1);
    let grid = &seq.grids[0];
    let camera = Camera::orbit_bbox(&grid.bbox(), 3.0, 30.0, 15.0, 64, 48);
    let cfg = RenderConfig::fit(&grid.bbox(), &camera);
    let mut g = c.benchmark_group("render 64x48");
    g.sample_size(10);
    g.bench_function("direct", |b| {
        b.iter(|| render_image(grid, &ColorDecoder::Direct, &camera, &cfg).unwrap())
    });
    let mlp = ColorDecoder::Mlp(DecoderMlp::seeded(grid.channels() - 1, 1));
    g.bench_function("mlp", |b| {
        b.iter(|| render_image(grid, &mlp, &camera, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, render);
criterion_main!(benches);
