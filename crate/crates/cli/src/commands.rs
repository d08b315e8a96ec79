use std::fs;
use std::io::Read;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use anyhow::Context;
use rerf_core::codec::{encode_sequence, grid_psnr, image_psnr, PSNR_INF_TEXT};
use rerf_core::container::STREAM_MAGIC;
use rerf_core::grid::{read_grid_file, write_grid_file};
use rerf_core::synth::{load_sequence, write_sequence};
use rerf_core::{
    generate_sequence, render_image, Camera, ColorDecoder, Decoder, DecoderMlp, EncodeConfig,
    EncodeReport, FileSource, Manifest, QualityLevel, RenderConfig, RgbImage, SceneSpec,
    StageTimes, StreamReader,
};
use rerf_service::{AppState, ServiceConfig};

use crate::{
    required, CliError, DecodeArgs, EncodeArgs, InfoArgs, PsnrArgs, RenderArgs, ServeArgs,
    SynthArgs,
};

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> anyhow::Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {what} {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {what} {}", path.display()))
}

pub fn synth(a: SynthArgs) -> Result<(), CliError> {
    let out = required(a.out, "out")?;
    let mut spec = match a.spec {
        Some(p) => {
            if a.size.is_some() || a.frames.is_some() || a.velocity.is_some() {
                return Err(CliError::Usage(
                    "--size/--frames/--velocity only apply to the demo scene".into(),
                ));
            }
            read_json::<SceneSpec>(&p, "scene spec")?
        }
        None => SceneSpec::demo(
            a.size.unwrap_or(64),
            a.frames.unwrap_or(40),
            a.velocity.unwrap_or(2),
        ),
    };
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    let seq = generate_sequence(&spec)?;
    write_sequence(&out, &seq).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "wrote {} frames of {} x {} channels to {}",
        seq.grids.len(),
        spec.dims,
        spec.channels,
        out.display()
    );
    Ok(())
}

pub fn encode(a: EncodeArgs) -> Result<(), CliError> {
    let grids_dir = required(a.grids, "grids")?;
    let motions_dir = a.motions.unwrap_or_else(|| grids_dir.clone());
    let out = required(a.out, "out")?;
    let decoder = match &a.decoder {
        Some(p) => ColorDecoder::Mlp(
            DecoderMlp::load(p).with_context(|| format!("loading decoder {}", p.display()))?,
        ),
        None => ColorDecoder::Direct,
    };
    let defaults = EncodeConfig::default();
    let cfg = EncodeConfig {
        s_q: a.sq.unwrap_or(defaults.s_q),
        tau: a.tau.unwrap_or(defaults.tau),
        gof_length: a.gof.unwrap_or(defaults.gof_length),
        pool_kernel: a.kernel.unwrap_or(defaults.pool_kernel),
        pca_rank: a.pca_rank,
        frame_rate: a.fps.unwrap_or(defaults.frame_rate),
        decoder,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let (grids, motions) = load_sequence(&grids_dir, &motions_dir).context("loading sequence")?;
    let streams = encode_sequence(&grids, &motions, &cfg)?;

    if let [single] = streams.as_slice() {
        fs::write(&out, &single.bytes).with_context(|| format!("writing {}", out.display()))?;
    } else {
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let mut qualities = Vec::new();
        for (i, s) in streams.iter().enumerate() {
            let name = format!("q{i}.rrfv");
            fs::write(out.join(&name), &s.bytes)
                .with_context(|| format!("writing {}", out.join(&name).display()))?;
            qualities.push(QualityLevel {
                s_q: s.s_q,
                avg_kbps: Manifest::kbps(s.bytes.len() as u64, grids.len() as u32, cfg.frame_rate),
                path: name,
            });
        }
        let manifest = Manifest {
            frame_count: grids.len() as u32,
            gof_length: cfg.gof_length,
            frame_rate: cfg.frame_rate,
            qualities,
        };
        manifest.save(out.join("manifest.json"))?;
    }
    for s in &streams {
        print!("{}", s.report.to_text());
    }
    if let Some(p) = a.report {
        let reports: Vec<&EncodeReport> = streams.iter().map(|s| &s.report).collect();
        fs::write(
            &p,
            serde_json::to_string_pretty(&reports).context("serializing report")?,
        )
        .with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn stage_text(times: &StageTimes) -> String {
    let parts: Vec<String> = times
        .stages()
        .iter()
        .map(|(n, d)| format!("{n} {:.3} ms", d.as_secs_f64() * 1e3))
        .collect();
    format!(
        "{}; total {:.3} ms; largest {}",
        parts.join(", "),
        times.total().as_secs_f64() * 1e3,
        times.dominant()
    )
}

pub fn decode(a: DecodeArgs) -> Result<(), CliError> {
    let input = required(a.input, "in")?;
    let t = required(a.frame, "frame")?;
    let out = required(a.out, "out")?;
    let dec = Decoder::open(FileSource::open(&input)?)?;
    let (grid, times) = dec.decode_frame_timed(t)?;
    write_grid_file(&out, &grid).with_context(|| format!("writing {}", out.display()))?;
    if a.json {
        println!(
            "{}",
            serde_json::json!({ "frame": t, "stages": times, "dominant": times.dominant() })
        );
    } else {
        println!("frame {t}: {}", stage_text(&times));
    }
    Ok(())
}

pub fn info(a: InfoArgs) -> Result<(), CliError> {
    let input = required(a.input, "in")?;
    let reader = StreamReader::open(FileSource::open(&input)?)?;
    let h = reader.header();
    let report = EncodeReport::from_reader(&reader)?;
    let gofs = (0..reader.gof_count())
        .map(|g| {
            let r = reader.gof_range(g)?;
            let first = g * h.gof_length as usize;
            let last = (first + h.gof_length as usize).min(reader.frame_count()) - 1;
            Ok((g, first, last, r))
        })
        .collect::<rerf_core::Result<Vec<_>>>()?;
    let decoder = match &h.decoder {
        ColorDecoder::Direct => "direct".to_string(),
        ColorDecoder::Mlp(m) => format!("mlp ({} features)", m.feature_dim()),
    };
    if a.json {
        let doc = serde_json::json!({
            "header": {
                "dims": h.dims.as_array(),
                "channels": h.channels,
                "bbox": h.bbox,
                "gof_length": h.gof_length,
                "pool_kernel": h.pool_kernel,
                "pca_rank": h.pca_rank,
                "s_q": h.quant.scale(),
                "frame_rate": h.frame_rate,
                "frame_count": h.frame_count,
                "decoder": decoder,
            },
            "gofs": gofs.iter().map(|(g, first, last, r)| serde_json::json!({
                "index": g, "first_frame": first, "last_frame": last,
                "offset": r.start, "bytes": r.end - r.start,
            })).collect::<Vec<_>>(),
            "report": report,
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).context("serializing info")?
        );
        return Ok(());
    }
    println!("stream {}", input.display());
    println!(
        "grid {} x {} channels, bbox {:?}..{:?}",
        h.dims, h.channels, h.bbox.min, h.bbox.max
    );
    println!(
        "frames {}  fps {}  GOF {}  pooling {}  PCA rank {}  decoder {decoder}",
        h.frame_count, h.frame_rate, h.gof_length, h.pool_kernel, h.pca_rank
    );
    println!("GOFs {}", gofs.len());
    println!(
        "{:>4} {:>7} {:>10} {:>10}",
        "gof", "frames", "offset", "bytes"
    );
    for (g, first, last, r) in &gofs {
        println!(
            "{g:>4} {:>7} {:>10} {:>10}",
            format!("{first}-{last}"),
            r.start,
            r.end - r.start
        );
    }
    print!("{}", report.to_text());
    Ok(())
}

fn load_decoder(path: &Path) -> anyhow::Result<ColorDecoder> {
    let mut magic = [0u8; 4];
    fs::File::open(path)
        .and_then(|mut f| f.read_exact(&mut magic))
        .with_context(|| format!("reading {}", path.display()))?;
    if magic == STREAM_MAGIC {
        let dec = Decoder::open(FileSource::open(path)?)?;
        Ok(dec.header().decoder.clone())
    } else {
        Ok(ColorDecoder::Mlp(DecoderMlp::load(path).with_context(
            || format!("loading decoder {}", path.display()),
        )?))
    }
}

pub fn render(a: RenderArgs) -> Result<(), CliError> {
    let grid_path = required(a.grid, "grid")?;
    let cam_path = required(a.camera, "camera")?;
    let out = required(a.out, "out")?;
    let grid =
        read_grid_file(&grid_path).with_context(|| format!("reading {}", grid_path.display()))?;
    let camera: Camera = read_json(&cam_path, "camera")?;
    let decoder = match &a.decoder {
        Some(p) => load_decoder(p)?,
        None => ColorDecoder::Direct,
    };
    let fit = RenderConfig::fit(&grid.bbox(), &camera);
    let cfg = RenderConfig {
        samples: a.samples.unwrap_or(fit.samples),
        ..fit
    };
    let image = render_image(&grid, &decoder, &camera, &cfg)?;
    if out.extension().is_some_and(|e| e == "rrfi") {
        image.save_raw(&out)?;
    } else {
        image.save_png(&out)?;
    }
    Ok(())
}

enum Loaded {
    Grid(rerf_core::FeatureGrid),
    Image(RgbImage),
}

fn load_any(path: &Path) -> Result<Loaded, CliError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let ctx = || format!("reading {}", path.display());
    match ext {
        "rrfg" => Ok(Loaded::Grid(read_grid_file(path).with_context(ctx)?)),
        "png" => Ok(Loaded::Image(
            RgbImage::from_png(&fs::read(path).with_context(ctx)?).with_context(ctx)?,
        )),
        "rrfi" => Ok(Loaded::Image(RgbImage::load_raw(path).with_context(ctx)?)),
        _ => Err(CliError::Usage(format!(
            "{}: expected a .rrfg grid or a .png/.rrfi image",
            path.display()
        ))),
    }
}

pub fn psnr(a: PsnrArgs) -> Result<(), CliError> {
    let r = load_any(&required(a.reference, "ref")?)?;
    let t = load_any(&required(a.test, "test")?)?;
    let db = match (r, t) {
        (Loaded::Grid(r), Loaded::Grid(t)) => grid_psnr(&r, &t)?,
        (Loaded::Image(r), Loaded::Image(t)) => image_psnr(&r, &t)?,
        _ => {
            return Err(CliError::Usage(
                "cannot compare a grid with an image".into(),
            ))
        }
    };
    if db.is_infinite() {
        println!("{PSNR_INF_TEXT}");
    } else {
        println!("{db:.4}");
    }
    Ok(())
}

pub fn serve(a: ServeArgs, threads: Option<usize>) -> Result<(), CliError> {
    let manifest = required(a.manifest, "manifest")?;
    let mut cfg = ServiceConfig::new(manifest);
    if let Some(c) = a.cache {
        cfg.cache_frames = c;
    }
    if let Some(m) = a.max_size {
        cfg.max_width = m;
        cfg.max_height = m;
    }
    if let Some(s) = a.samples {
        cfg.samples = s;
    }
    let host = a.host.unwrap_or_else(|| "127.0.0.1".into());
    let addr: SocketAddr = format!("{host}:{}", a.port.unwrap_or(8080))
        .parse()
        .map_err(|e| CliError::Usage(format!("bad listen address: {e}")))?;
    let state = Arc::new(AppState::new(cfg).map_err(|e| CliError::Data(e.into()))?);
    let _ = tracing_subscriber::fmt::try_init();
    let mut rt = tokio::runtime::Builder::new_multi_thread();
    if let Some(n) = threads {
        rt.worker_threads(n);
    }
    let rt = rt.enable_all().build().context("starting runtime")?;
    rt.block_on(rerf_service::serve(state, addr))
        .with_context(|| format!("serving on {addr}"))?;
    Ok(())
}
