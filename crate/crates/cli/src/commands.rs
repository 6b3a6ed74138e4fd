use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use mrds::julia::{
    backward_orbit_cloud, check_backward_separating, check_kernel_empty, clouds_for_all, render_filled_set,
    repelling_fixed_points, CloudParams, KernelVerdict, Sampler, Separation, DEFAULT_MIN_MARGIN,
};
use mrds::sampler::{boundary_band, marked_fraction, render_random_filled_set, run_orbit, sample_word};
use mrds::tinf::{sweep_t, ReadPolicy, SweepMethod};
use mrds::{FieldVertex, Raster, SpherePoint64, System64, Window};
use serde::Serialize;
use serde_json::json;

use crate::args::{CloudMethod, Command, Common, Grid, TinfMethod};
use crate::output::{sha256_hex, ConfigRef, OutputDir, RunManifest};
use crate::{CheckFailed, ConfigError};

/// Per-pixel node budget for tree enumerations started from the CLI.
pub const NODE_BUDGET: usize = 20_000;

const FIELD_MAXVAL: u16 = u16::MAX;
const MASK_MAXVAL: u16 = u8::MAX as u16;

pub struct Loaded {
    pub system: System64,
    pub config: ConfigRef,
}

pub fn load_config(path: &Path) -> Result<Loaded> {
    let bytes = fs::read(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| ConfigError(format!("{}: not UTF-8", path.display())))?;
    let system = mrds::parse_system(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Loaded { system, config: ConfigRef { path: path.display().to_string(), sha256: sha256_hex(&bytes) } })
}

fn require_config(common: &Common) -> Result<Loaded> {
    let path = common.config.as_ref().ok_or_else(|| ConfigError("--config is required".into()))?;
    load_config(path)
}

fn vertex_index(s: &System64, vertex: usize) -> Result<usize> {
    if vertex == 0 || vertex > s.vertex_count() {
        return Err(ConfigError(format!("vertex {vertex} out of range 1..={}", s.vertex_count())).into());
    }
    Ok(vertex - 1)
}

fn raster_for(s: &System64, grid: &Grid) -> Result<Raster<f64>> {
    let window = match grid.window {
        Some([x0, x1, y0, y1]) => Window::new(x0, x1, y0, y1).map_err(|e| ConfigError(e.to_string()))?,
        None => s.default_window().unwrap_or(Window::square(2.0)),
    };
    Ok(Raster::new(window, grid.res.0, grid.res.1))
}

fn describe(manifest: &mut RunManifest, loaded: &Loaded, raster: Option<Raster<f64>>) {
    manifest.config = Some(loaded.config.clone());
    manifest.escape_radius = Some(loaded.system.escape_radius());
    if let Some(r) = raster {
        manifest.window = Some(r.window.bounds());
        manifest.resolution = Some([r.nx, r.ny]);
    }
}

/// Runs one subcommand, writing its artifacts under `common.out`.
/// `verify` is dispatched by the caller.
pub fn execute(common: &Common, command: &Command, log: &mut dyn Write) -> Result<RunManifest> {
    let start = Instant::now();
    let mut out = OutputDir::create(&common.out, common.format)?;
    let mut failed = None;
    let manifest = match command {
        Command::Check { points } => check(common, *points, &mut out, log, &mut failed)?,
        Command::Tinf { grid, method, depth, samples, tol, max_iter } => {
            tinf(common, grid, *method, *depth, *samples, *tol, *max_iter, &mut out, log)?
        }
        Command::Julia { grid, vertex, points, method } => julia(common, grid, *vertex, *points, *method, &mut out, log)?,
        Command::Filled { grid, vertex, depth } => filled(common, grid, *vertex, *depth, &mut out, log)?,
        Command::Jxi { grid, vertex, length, stream } => jxi(common, grid, *vertex, *length, *stream, &mut out, log)?,
        Command::Orbit { z, vertex, steps, stream } => orbit(common, *z, *vertex, *steps, *stream, &mut out, log)?,
        Command::Fixedpoints { vertex, max_word_len, words } => {
            fixedpoints(common, *vertex, *max_word_len, *words, &mut out, log)?
        }
        Command::Verify { .. } => unreachable!("verify is not an artifact command"),
    };
    let manifest = out.finish(manifest, start.elapsed())?;
    match failed {
        Some(f) => Err(f.into()),
        None => Ok(manifest),
    }
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub irreducible: bool,
    pub essentially_nondeterministic: bool,
    pub escape_radius: f64,
    pub stationary: Option<Vec<f64>>,
    pub backward_separating: String,
    /// Smallest preimage-cloud distance, or the witness distance.
    pub separation_distance: Option<f64>,
    pub witness: Option<String>,
    pub kernel: String,
    pub failures: Vec<String>,
}

/// Structural checks on `s`, using backward-orbit clouds of `points` points
/// per vertex for the separation test.
pub fn check_system(s: &System64, points: usize, seed: u64) -> mrds::Result<CheckReport> {
    let irreducible = s.is_irreducible();
    let essentially_nondeterministic = s.is_essentially_nondeterministic();
    let stationary = if irreducible { Some(s.stationary_vector()?) } else { None };
    let (label, distance, witness, kernel) = match clouds_for_all(s, CloudParams::new(points, seed)) {
        Ok(clouds) => {
            let sep = check_backward_separating(s, &clouds, DEFAULT_MIN_MARGIN)?;
            let (distance, witness) = match &sep {
                Separation::Separated { margin } | Separation::Inconclusive { margin } => {
                    (margin.is_finite().then_some(*margin), None)
                }
                Separation::Violated { witness: w } => (
                    Some(w.distance),
                    Some(format!(
                        "vertex {}: edge {} atom {} vs edge {} atom {}",
                        w.vertex, w.first.0, w.first.1, w.second.0, w.second.1
                    )),
                ),
            };
            (sep.label().to_string(), distance, witness, check_kernel_empty(s, &sep))
        }
        // a vertex without incoming edges has no Julia set to sample
        Err(mrds::Error::DeadEnd { vertex }) => {
            ("UNAVAILABLE".to_string(), None, Some(format!("vertex {vertex} has no incoming edge")), KernelVerdict::Unknown)
        }
        Err(e) => return Err(e),
    };
    let mut failures = Vec::new();
    if !irreducible {
        failures.push("irreducible".to_string());
    }
    if !essentially_nondeterministic {
        failures.push("essentially-non-deterministic".to_string());
    }
    if label != "SEPARATED" {
        failures.push("backward-separating".to_string());
    }
    if kernel != KernelVerdict::EmptyByLemma {
        failures.push("kernel".to_string());
    }
    Ok(CheckReport {
        irreducible,
        essentially_nondeterministic,
        escape_radius: s.escape_radius(),
        stationary,
        backward_separating: label,
        separation_distance: distance,
        witness,
        kernel: kernel.label().to_string(),
        failures,
    })
}

fn check(
    common: &Common,
    points: usize,
    out: &mut OutputDir,
    log: &mut dyn Write,
    failed: &mut Option<CheckFailed>,
) -> Result<RunManifest> {
    let loaded = require_config(common)?;
    let s = &loaded.system;
    let report = check_system(s, points, common.seed)?;
    writeln!(log, "irreducible = {}", report.irreducible)?;
    writeln!(log, "essentially-non-deterministic = {}", report.essentially_nondeterministic)?;
    writeln!(log, "escape radius = {}", report.escape_radius)?;
    match &report.stationary {
        Some(p) => writeln!(log, "stationary p = {p:?}")?,
        None => writeln!(log, "stationary p = n/a")?,
    }
    let detail = match (&report.witness, report.separation_distance) {
        (Some(w), Some(d)) => format!(" ({w}, distance {d:e})"),
        (Some(w), None) => format!(" ({w})"),
        (None, Some(d)) => format!(" (margin {d:e})"),
        (None, None) => String::new(),
    };
    writeln!(log, "backward-separating = {}{detail}", report.backward_separating)?;
    writeln!(log, "kernel = {}", report.kernel)?;
    let text = serde_json::to_string_pretty(&report)?;
    out.write_with("check.json", |w| writeln!(w, "{text}"))?;
    let mut manifest = RunManifest::new("check", common.seed);
    describe(&mut manifest, &loaded, None);
    manifest.param("points", points);
    if !report.failures.is_empty() {
        *failed = Some(CheckFailed(report.failures.join(", ")));
    }
    Ok(manifest)
}

#[allow(clippy::too_many_arguments)]
fn tinf(
    common: &Common,
    grid: &Grid,
    method: TinfMethod,
    depth: usize,
    samples: usize,
    tol: f64,
    max_iter: usize,
    out: &mut OutputDir,
    log: &mut dyn Write,
) -> Result<RunManifest> {
    let loaded = require_config(common)?;
    let s = &loaded.system;
    let raster = raster_for(s, grid)?;
    let mut manifest = RunManifest::new("tinf", common.seed);
    describe(&mut manifest, &loaded, Some(raster));
    let sweep = match method {
        TinfMethod::Tree => {
            manifest.param("depth", depth).param("node_budget", NODE_BUDGET);
            SweepMethod::Tree { depth, node_budget: NODE_BUDGET }
        }
        TinfMethod::MonteCarlo => {
            manifest.param("samples", samples).param("max_steps", depth);
            SweepMethod::MonteCarlo { samples, max_steps: depth, seed: common.seed }
        }
        TinfMethod::Operator => {
            let policy = ReadPolicy::default();
            manifest
                .param("tol", tol)
                .param("max_iter", max_iter)
                .param("certify_depth", policy.certify_depth)
                .param("certify_budget", policy.certify_budget);
            SweepMethod::OperatorIteration { tol, max_iter, policy }
        }
    };
    manifest.param("method", sweep.name());
    let result = sweep_t(s, raster, sweep)?;
    manifest.out_of_window = result.report.out_of_window;
    manifest.param("truncated_pixels", result.report.truncated);
    if matches!(method, TinfMethod::Operator) {
        manifest.param("iterations", result.report.iterations).param("last_change", result.report.last_change);
    }
    for (i, f) in result.vertex_fields.iter().enumerate() {
        out.write_field(&format!("T_v{}", i + 1), f, FIELD_MAXVAL)?;
    }
    if let Some(agg) = &result.aggregate {
        out.write_field("T_aggregate", agg, FIELD_MAXVAL)?;
        out.write_field("one_minus_T", &agg.map(|v| 1.0 - v), FIELD_MAXVAL)?;
        writeln!(log, "aggregate T: min {} max {}", agg.min(), agg.max())?;
    } else {
        writeln!(log, "system is not irreducible; no aggregate field")?;
    }
    for (i, f) in result.vertex_fields.iter().enumerate() {
        writeln!(log, "vertex {} T: min {} max {}", i + 1, f.min(), f.max())?;
    }
    Ok(manifest)
}

fn julia(
    common: &Common,
    grid: &Grid,
    vertex: usize,
    points: usize,
    method: CloudMethod,
    out: &mut OutputDir,
    log: &mut dyn Write,
) -> Result<RunManifest> {
    let loaded = require_config(common)?;
    let s = &loaded.system;
    let v = vertex_index(s, vertex)?;
    let raster = raster_for(s, grid)?;
    let sampler = match method {
        CloudMethod::Chain => Sampler::RandomChain,
        CloudMethod::Tree => Sampler::PixelTree { pitch: None },
    };
    let params = CloudParams::new(points, common.seed).with_sampler(sampler);
    let cloud = backward_orbit_cloud(s, v, params)?;
    out.write_with(&format!("julia_v{vertex}_points.csv"), |w| cloud.write_csv(w))?;
    let mask = mrds::julia::geometry::rasterize(&cloud.points, raster, FieldVertex::Vertex(v));
    out.write_field(&format!("julia_v{vertex}"), &mask, MASK_MAXVAL)?;
    writeln!(log, "{} points at vertex {vertex}", cloud.len())?;
    let mut manifest = RunManifest::new("julia", common.seed);
    describe(&mut manifest, &loaded, Some(raster));
    manifest
        .param("vertex", vertex)
        .param("points", points)
        .param("method", if method == CloudMethod::Chain { "chain" } else { "tree" })
        .param("burn_in", params.burn_in)
        .param("chains", params.chains)
        .param("cloud_size", cloud.len());
    Ok(manifest)
}

fn filled(
    common: &Common,
    grid: &Grid,
    vertex: usize,
    depth: usize,
    out: &mut OutputDir,
    log: &mut dyn Write,
) -> Result<RunManifest> {
    let loaded = require_config(common)?;
    let s = &loaded.system;
    let v = vertex_index(s, vertex)?;
    let raster = raster_for(s, grid)?;
    let (field, truncated) = render_filled_set(s, v, raster, depth, NODE_BUDGET);
    out.write_field(&format!("filled_v{vertex}"), &field, MASK_MAXVAL)?;
    writeln!(log, "filled set at vertex {vertex}: {:.4} of the window", marked_fraction(&field))?;
    let mut manifest = RunManifest::new("filled", common.seed);
    describe(&mut manifest, &loaded, Some(raster));
    manifest
        .param("vertex", vertex)
        .param("depth", depth)
        .param("node_budget", NODE_BUDGET)
        .param("truncated_pixels", truncated);
    Ok(manifest)
}

fn jxi(
    common: &Common,
    grid: &Grid,
    vertex: usize,
    length: usize,
    stream: u64,
    out: &mut OutputDir,
    log: &mut dyn Write,
) -> Result<RunManifest> {
    let loaded = require_config(common)?;
    let s = &loaded.system;
    let v = vertex_index(s, vertex)?;
    let raster = raster_for(s, grid)?;
    let word = sample_word(s, v, length, common.seed, stream)?;
    let filled = render_random_filled_set(s, &word, raster, length, 1);
    let band = boundary_band(&filled);
    out.write_with("word.csv", |w| {
        writeln!(w, "step,edge,atom")?;
        for (n, st) in word.steps.iter().enumerate() {
            writeln!(w, "{},{},{}", n + 1, st.edge + 1, st.atom + 1)?;
        }
        Ok(())
    })?;
    out.write_field("K_xi", &filled, MASK_MAXVAL)?;
    out.write_field("J_xi", &band, MASK_MAXVAL)?;
    writeln!(log, "K_xi fraction {:.5}, J_xi band fraction {:.5}", marked_fraction(&filled), marked_fraction(&band))?;
    let mut manifest = RunManifest::new("jxi", common.seed);
    describe(&mut manifest, &loaded, Some(raster));
    manifest.param("vertex", vertex).param("length", length).param("stream", stream);
    Ok(manifest)
}

fn orbit(
    common: &Common,
    z: (f64, f64),
    vertex: usize,
    steps: usize,
    stream: u64,
    out: &mut OutputDir,
    log: &mut dyn Write,
) -> Result<RunManifest> {
    let loaded = require_config(common)?;
    let s = &loaded.system;
    let v = vertex_index(s, vertex)?;
    let word = sample_word(s, v, steps, common.seed, stream)?;
    let trace = run_orbit(s, SpherePoint64::new(z.0, z.1), &word, steps);
    let mut rows = vec!["step,vertex,edge,atom,re,im".to_string()];
    for (n, (p, vx)) in trace.points.iter().zip(&trace.vertices).enumerate() {
        let (edge, atom) = match n.checked_sub(1).map(|k| word.steps[k]) {
            Some(st) => ((st.edge + 1).to_string(), (st.atom + 1).to_string()),
            None => (String::new(), String::new()),
        };
        let (re, im) = match p.finite() {
            Some(w) => (w.re.to_string(), w.im.to_string()),
            None => ("inf".to_string(), "inf".to_string()),
        };
        rows.push(format!("{n},{},{edge},{atom},{re},{im}", vx + 1));
    }
    for r in &rows {
        writeln!(log, "{r}")?;
    }
    match trace.escaped_at {
        Some(n) => writeln!(log, "escaped at step {n}")?,
        None => writeln!(log, "no escape within {steps} steps")?,
    }
    out.write_with("orbit.csv", |w| rows.iter().try_for_each(|r| writeln!(w, "{r}")))?;
    let mut manifest = RunManifest::new("orbit", common.seed);
    describe(&mut manifest, &loaded, None);
    manifest
        .param("z", json!([z.0, z.1]))
        .param("vertex", vertex)
        .param("steps", steps)
        .param("stream", stream)
        .param("escaped_at", trace.escaped_at);
    Ok(manifest)
}

fn fixedpoints(
    common: &Common,
    vertex: usize,
    max_word_len: usize,
    words: usize,
    out: &mut OutputDir,
    log: &mut dyn Write,
) -> Result<RunManifest> {
    let loaded = require_config(common)?;
    let s = &loaded.system;
    let v = vertex_index(s, vertex)?;
    let found = repelling_fixed_points(s, v, max_word_len, words, common.seed)?;
    out.write_with("fixedpoints.csv", |w| {
        writeln!(w, "re,im,multiplier,word")?;
        for p in &found.points {
            let word: Vec<String> = p.word.iter().map(|st| format!("{}:{}", st.edge + 1, st.atom + 1)).collect();
            writeln!(w, "{},{},{},{}", p.location.re, p.location.im, p.multiplier_modulus, word.join(" "))?;
        }
        Ok(())
    })?;
    writeln!(
        log,
        "{} repelling fixed points from {} words ({} unconverged)",
        found.points.len(),
        found.words,
        found.unconverged_words
    )?;
    let mut manifest = RunManifest::new("fixedpoints", common.seed);
    describe(&mut manifest, &loaded, None);
    manifest
        .param("vertex", vertex)
        .param("max_word_len", max_word_len)
        .param("words", words)
        .param("unconverged_words", found.unconverged_words);
    Ok(manifest)
}
