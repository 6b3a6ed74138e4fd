//! Built-in acceptance suite. Each criterion measures one property of the
//! shipped systems at a fixed tolerance and reports the measured values.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use mrds::examples;
use mrds::julia::geometry::{fraction_within, rasterize, PointIndex};
use mrds::julia::{
    backward_orbit_cloud, clouds_for_all, nonconstancy_mask, repelling_fixed_points, self_similarity_defect,
    CloudParams, PointCloud, Sampler,
};
use mrds::sampler::{boundary_band, marked_fraction, render_random_filled_set, sample_word};
use mrds::tinf::{
    aggregate, markov_step, monte_carlo_t, operator_iteration, some_branch_escapes, sweep_t, tree_bounds_with_budget,
    ReadPolicy, SweepMethod,
};
use mrds::{rng, Complex64, FieldVertex, GridField64, Raster, SpherePoint64, System64, Window};
use num_complex::Complex;

use crate::args::{Cli, Command, Common, Format, Grid};
use crate::commands::{self, check_system, NODE_BUDGET};
use crate::output::MANIFEST_FILE;

pub const SEED: u64 = 1;

/// Measured result of one criterion before the runtime check.
#[derive(Clone, Debug, PartialEq)]
pub struct Measured {
    pub passed: bool,
    pub detail: String,
}

impl Measured {
    fn new(passed: bool, detail: String) -> Self {
        Measured { passed, detail }
    }
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub budget: Duration,
    pub run: fn() -> Result<Measured>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {}: {} [{:.1} s / {} s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "stationary vector", budget: secs(1), run: stationary_vector },
        Criterion { id: 2, name: "single square map", budget: secs(10), run: single_square_map },
        Criterion { id: 3, name: "monte carlo inside tree bounds", budget: secs(120), run: estimator_agreement },
        Criterion { id: 4, name: "escape field is a fixed point", budget: secs(120), run: operator_fixed_point },
        Criterion { id: 5, name: "nonconstancy mask matches julia cloud", budget: secs(300), run: mask_matches_cloud },
        Criterion { id: 6, name: "self-similarity defect", budget: secs(120), run: self_similarity },
        Criterion { id: 7, name: "repelling fixed points on the cloud", budget: secs(60), run: repelling_density },
        Criterion { id: 8, name: "aggregate positive and not constant", budget: secs(600), run: positive_not_constant },
        Criterion { id: 9, name: "adjacent jumps shrink with resolution", budget: secs(600), run: continuity_proxy },
        Criterion { id: 10, name: "checker verdicts", budget: secs(60), run: checker_verdicts },
        Criterion { id: 11, name: "random julia boundary band", budget: secs(300), run: boundary_bands },
        Criterion { id: 12, name: "thread-count determinism", budget: secs(300), run: determinism },
    ]
}

pub fn run_criterion(c: &Criterion) -> Outcome {
    let start = Instant::now();
    let measured = (c.run)().unwrap_or_else(|e| Measured::new(false, format!("error: {e:#}")));
    let elapsed = start.elapsed();
    let in_time = elapsed <= c.budget;
    let detail = if in_time { measured.detail } else { format!("{} (over time budget)", measured.detail) };
    Outcome { id: c.id, name: c.name, passed: measured.passed && in_time, detail, elapsed, budget: c.budget }
}

/// Runs the criteria with ids in `only` (all when empty), writing one line
/// per criterion to `log` as each finishes.
pub fn run_selected(only: &[usize], log: &mut dyn Write) -> Result<Vec<Outcome>> {
    let all = criteria();
    for id in only {
        ensure!(all.iter().any(|c| c.id == *id), "no criterion {id}");
    }
    let mut outcomes = Vec::new();
    for c in all.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let o = run_criterion(c);
        writeln!(log, "{}", o.line())?;
        log.flush()?;
        outcomes.push(o);
    }
    Ok(outcomes)
}

fn two_vertex_raster(n: usize) -> Raster<f64> {
    Raster::new(Window::square(3.0), n, n)
}

fn pixel_tree_cloud(s: &System64, vertex: usize, n_points: usize) -> Result<PointCloud<f64>> {
    let params = CloudParams::new(n_points, SEED).with_sampler(Sampler::PixelTree { pitch: None });
    Ok(backward_orbit_cloud(s, vertex, params)?)
}

fn stationary_vector() -> Result<Measured> {
    let s = examples::two_vertex::<f64>();
    let p = s.stationary_vector()?;
    // two-state chain: p_1 = P_21 / (P_12 + P_21)
    let t = s.transition();
    let oracle = [t[1][0] / (t[0][1] + t[1][0]), t[0][1] / (t[0][1] + t[1][0])];
    let error = p.iter().zip(oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let residual = mrds::model::graph::stationary_residual(&p, t);
    let exact = (p[0] - 2.0 / 3.0).abs().max((p[1] - 1.0 / 3.0).abs());
    Ok(Measured::new(
        error <= 1e-12 && exact <= 1e-12 && residual <= 1e-12,
        format!("p = ({:.15}, {:.15}), |p - oracle| = {error:.1e}, residual = {residual:.1e}", p[0], p[1]),
    ))
}

fn single_square_map() -> Result<Measured> {
    let s = examples::square::<f64>();
    let raster = Raster::new(Window::square(2.0), 512, 512);
    let sweep = sweep_t(&s, raster, SweepMethod::Tree { depth: 30, node_budget: NODE_BUDGET })?;
    let field = &sweep.vertex_fields[0];
    let band = 2.0 * raster.pitch();
    let mut outside_band = 0usize;
    let mut mismatched = 0usize;
    for (idx, &v) in field.values.iter().enumerate() {
        let z = raster.center_of(idx);
        let indicator = if z.norm() > 1.0 { 1.0 } else { 0.0 };
        if (v - indicator).abs() > 1e-12 {
            mismatched += 1;
            if (z.norm() - 1.0).abs() > band {
                outside_band += 1;
            }
        }
    }
    let cloud = backward_orbit_cloud(&s, 0, CloudParams::new(10_000, SEED))?;
    let off_circle = cloud.points.iter().map(|w| (w.norm() - 1.0).abs()).fold(0.0, f64::max);
    let fixed = repelling_fixed_points(&s, 0, 1, 10, SEED)?;
    let only_one = fixed.points.len() == 1 && (fixed.points[0].location - Complex64::new(1.0, 0.0)).norm() <= 1e-12;
    Ok(Measured::new(
        outside_band == 0 && off_circle <= 1e-6 && only_one,
        format!(
            "{mismatched} mismatched pixels, {outside_band} beyond 2 px of |z| = 1; cloud max ||w|-1| = {off_circle:.1e}; \
             repelling fixed points [{}]",
            fixed.points.iter().map(|p| p.location.to_string()).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn estimator_agreement() -> Result<Measured> {
    let s = examples::two_vertex::<f64>();
    let (samples, depth) = (10_000usize, 24usize);
    let mut rng = rng::stream(SEED, u64::MAX);
    let mut inside = 0usize;
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let z = Complex::new(rng::unit(&mut rng) * 6.0 - 3.0, rng::unit(&mut rng) * 6.0 - 3.0);
        let vertex = usize::from(rng::unit(&mut rng) < 0.5);
        let b = tree_bounds_with_budget(&s, z.into(), vertex, depth, mrds::tinf::DEFAULT_NODE_BUDGET);
        ensure!(!b.truncated, "tree budget exhausted at {z}");
        let mc = monte_carlo_t(&s, z.into(), vertex, samples, depth, SEED, k * samples as u64)?;
        let slack = 4.0 * mc.stderr;
        if mc.mean >= b.lower - slack && mc.mean <= b.upper + slack {
            inside += 1;
        }
        let outside = (b.lower - mc.mean).max(mc.mean - b.upper).max(0.0);
        worst = worst.max(outside);
    }
    Ok(Measured::new(
        inside >= 97,
        format!("{inside}/100 estimates inside [lower - 4σ, upper + 4σ]; largest excursion {worst:.2e}"),
    ))
}

fn operator_fixed_point() -> Result<Measured> {
    let s = examples::two_vertex::<f64>();
    let tol = 1e-3;
    let policy = ReadPolicy::default();
    let out = operator_iteration(&s, two_vertex_raster(512), tol, 500, policy)?;
    ensure!(out.converged, "no convergence after {} steps", out.iterations);
    let (next, _) = markov_step(&s, &out.fields, policy)?;
    let change = out.fields.iter().zip(&next).map(|(a, b)| a.sup_distance(b)).fold(0.0, f64::max);
    Ok(Measured::new(
        change < 2.0 * tol,
        format!(
            "converged in {} steps; one more step changes sup norm by {change:.2e} (limit {:.0e})",
            out.iterations,
            2.0 * tol
        ),
    ))
}

fn mask_matches_cloud() -> Result<Measured> {
    let s = examples::two_vertex::<f64>();
    let raster = two_vertex_raster(1024);
    let out = operator_iteration(&s, raster, 1e-3, 500, ReadPolicy::default())?;
    ensure!(out.converged, "operator iteration did not converge");
    let mask = nonconstancy_mask(&out.fields[0], 0.05);
    let cloud = pixel_tree_cloud(&s, 0, 200_000)?;
    let cloud_mask = rasterize(&cloud.points, raster, FieldVertex::Vertex(0));
    let count = |m: &GridField64| m.values.iter().filter(|&&v| v > 0.0).count();
    let (n_mask, n_cloud) = (count(&mask), count(&cloud_mask));
    let mask_to_cloud = fraction_within(&mask, &cloud_mask, 2);
    let cloud_to_mask = fraction_within(&cloud_mask, &mask, 2);
    let pooled = (mask_to_cloud * n_mask as f64 + cloud_to_mask * n_cloud as f64) / (n_mask + n_cloud) as f64;
    Ok(Measured::new(
        pooled >= 0.95,
        format!(
            "{pooled:.4} of {} marked pixels within 2 px of the other set (mask->cloud {mask_to_cloud:.4} of \
             {n_mask}, cloud->mask {cloud_to_mask:.4} of {n_cloud})",
            n_mask + n_cloud
        ),
    ))
}

fn self_similarity() -> Result<Measured> {
    let s = examples::two_vertex::<f64>();
    let limit = 2.0 * two_vertex_raster(1024).pitch();
    let params = |n| CloudParams::new(n, SEED).with_sampler(Sampler::PixelTree { pitch: None });
    let small = self_similarity_defect(&s, &clouds_for_all(&s, params(100_000))?)?;
    let large = self_similarity_defect(&s, &clouds_for_all(&s, params(200_000))?)?;
    Ok(Measured::new(
        small <= limit && large < small,
        format!("defect {small:.5} at 1e5 points (limit {limit:.5}), {large:.5} at 2e5"),
    ))
}

fn repelling_density() -> Result<Measured> {
    let s = examples::two_vertex::<f64>();
    let px = two_vertex_raster(1024).pitch();
    let found = repelling_fixed_points(&s, 0, 3, 10_000, SEED)?;
    ensure!(found.unconverged_words == 0, "{} words without converged fixed points", found.unconverged_words);
    let cloud = pixel_tree_cloud(&s, 0, 100_000)?;
    let index = PointIndex::new(&cloud.points);
    let distances: Vec<f64> = found.points.iter().map(|p| index.nearest_distance(p.location) / px).collect();
    let near = distances.iter().filter(|&&d| d <= 2.0).count();
    let worst = distances.iter().copied().fold(0.0, f64::max);
    Ok(Measured::new(
        near == distances.len() && !distances.is_empty(),
        format!("{near}/{} repelling fixed points within 2 px; farthest {worst:.2} px", distances.len()),
    ))
}

fn positive_not_constant() -> Result<Measured> {
    let s = examples::four_vertex::<f64>();
    let raster = Raster::new(Window::square(16.0), 512, 512);
    let p = s.stationary_vector()?;
    let m = s.vertex_count();

    // positivity: some branch from some vertex escapes, else Monte Carlo
    let certified: Vec<bool> = {
        use rayon::prelude::*;
        (0..raster.len())
            .into_par_iter()
            .map(|idx| {
                let z = SpherePoint64::Finite(raster.center_of(idx));
                (0..m).any(|v| some_branch_escapes(&s, z, v, 20, NODE_BUDGET).0)
            })
            .collect()
    };
    let unresolved: Vec<usize> = (0..raster.len()).filter(|&i| !certified[i]).collect();
    let mut mc_positive = 0usize;
    for &idx in &unresolved {
        let z = SpherePoint64::Finite(raster.center_of(idx));
        let mut positive = false;
        for v in 0..m {
            let est = monte_carlo_t(&s, z, v, 10_000, 200, SEED, (idx * m + v) as u64 * 10_000)?;
            positive |= est.mean - 3.0 * est.stderr > 0.0;
        }
        mc_positive += usize::from(positive);
    }
    let min_positive = mc_positive == unresolved.len();

    // non-constancy: smallest aggregate value on the grid, cross-checked
    let out = operator_iteration(&s, raster, 1e-3, 500, ReadPolicy::default())?;
    ensure!(out.converged, "operator iteration did not converge");
    let agg = aggregate(&p, &out.fields);
    let (argmin, min) = agg.values.iter().copied().enumerate().fold((0, f64::INFINITY), |a, (i, v)| {
        if v < a.1 {
            (i, v)
        } else {
            a
        }
    });
    let z = raster.center_of(argmin);
    let (mut mean, mut var) = (0.0, 0.0);
    for (v, &pv) in p.iter().enumerate() {
        let est = monte_carlo_t(&s, z.into(), v, 10_000, 200, SEED, u64::MAX / 2 + v as u64 * 10_000)?;
        mean += pv * est.mean;
        var += pv * pv * est.stderr * est.stderr;
    }
    let upper = mean + 3.0 * var.sqrt();
    Ok(Measured::new(
        min_positive && min < 0.99 && upper < 0.99,
        format!(
            "{} of {} pixels certified by an escaping branch, {mc_positive}/{} more by Monte Carlo; \
             min field {min:.4} at {z:.3}, Monte Carlo {mean:.4} + 3σ = {upper:.4}",
            raster.len() - unresolved.len(),
            raster.len(),
            unresolved.len()
        ),
    ))
}

/// Largest adjacent-pixel jump of the tree-midpoint aggregate over pixels
/// whose aggregate interval is narrower than `width`.
fn narrow_jump(s: &System64, n: usize, width: f64) -> Result<(f64, usize)> {
    let raster = two_vertex_raster(n);
    let sweep = sweep_t(s, raster, SweepMethod::Tree { depth: 24, node_budget: NODE_BUDGET })?;
    let (lo, hi) = sweep.aggregate_bounds(s).context("no aggregate")?;
    let mid = sweep.aggregate.context("no aggregate")?;
    let narrow: Vec<bool> = lo.values.iter().zip(&hi.values).map(|(l, h)| h - l < width).collect();
    let mut jump = 0.0f64;
    for row in 0..n {
        for col in 0..n {
            let i = row * n + col;
            if !narrow[i] {
                continue;
            }
            for j in [(col + 1 < n).then_some(i + 1), (row + 1 < n).then_some(i + n)].into_iter().flatten() {
                if narrow[j] {
                    jump = jump.max((mid.values[i] - mid.values[j]).abs());
                }
            }
        }
    }
    Ok((jump, narrow.iter().filter(|&&b| b).count()))
}

fn continuity_proxy() -> Result<Measured> {
    let s = examples::two_vertex::<f64>();
    let mut jumps = Vec::new();
    let mut detail = Vec::new();
    for n in [128, 256, 512] {
        let (jump, narrow) = narrow_jump(&s, n, 0.05)?;
        detail.push(format!("{n}: {jump:.5} over {narrow} px"));
        jumps.push(jump);
    }
    let decreasing = jumps.windows(2).all(|w| w[1] < w[0]);
    Ok(Measured::new(decreasing, format!("max jump {}", detail.join(", "))))
}

fn checker_verdicts() -> Result<Measured> {
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, s) in [("two-vertex", examples::two_vertex::<f64>()), ("four-vertex", examples::four_vertex::<f64>())] {
        let r = check_system(&s, 4000, SEED)?;
        ok &= r.irreducible
            && r.essentially_nondeterministic
            && r.backward_separating == "SEPARATED"
            && r.kernel == "EMPTY_BY_LEMMA";
        detail.push(format!(
            "{name}: irreducible={} nondeterministic={} {} {}",
            r.irreducible, r.essentially_nondeterministic, r.backward_separating, r.kernel
        ));
    }
    let parallel = check_system(&examples::parallel_squares::<f64>(), 4000, SEED)?;
    ok &= parallel.backward_separating == "VIOLATED";
    detail.push(format!("parallel squares: {}", parallel.backward_separating));
    let one_way = check_system(&examples::one_way::<f64>(), 4000, SEED)?;
    ok &= !one_way.irreducible;
    detail.push(format!("one-way: irreducible={}", one_way.irreducible));
    Ok(Measured::new(ok, detail.join("; ")))
}

fn boundary_bands() -> Result<Measured> {
    let s = examples::two_vertex::<f64>();
    let length = 40;
    let mut ok = true;
    let mut worst = (0.0f64, 0.0f64);
    for stream in 0..10u64 {
        let word = sample_word(&s, 0, length, SEED, stream)?;
        let coarse = marked_fraction(&boundary_band(&render_random_filled_set(
            &s,
            &word,
            two_vertex_raster(512),
            length,
            1,
        )));
        let fine = marked_fraction(&boundary_band(&render_random_filled_set(
            &s,
            &word,
            two_vertex_raster(1024),
            length,
            1,
        )));
        ok &= coarse < 0.05 && fine < coarse;
        if coarse > worst.0 {
            worst = (coarse, fine);
        }
    }
    Ok(Measured::new(
        ok,
        format!("10 words; largest band fraction {:.5} at 512² (then {:.5} at 1024²)", worst.0, worst.1),
    ))
}

/// Every artifact command on small grids, run under each thread count;
/// outputs must match byte for byte apart from the manifest wall time.
fn determinism() -> Result<Measured> {
    let configs = tempfile::tempdir()?;
    let two = configs.path().join("two_vertex.toml");
    let square = configs.path().join("square.toml");
    std::fs::write(&two, examples::TWO_VERTEX_TOML)?;
    std::fs::write(&square, examples::SQUARE_TOML)?;
    let grid = |n: usize| Grid { window: None, res: (n, n) };
    let runs: Vec<(&Path, Command)> = vec![
        (&two, Command::Check { points: 1000 }),
        (
            &two,
            Command::Tinf {
                grid: grid(48),
                method: crate::args::TinfMethod::Tree,
                depth: 16,
                samples: 0,
                tol: 1e-3,
                max_iter: 500,
            },
        ),
        (
            &two,
            Command::Tinf {
                grid: grid(24),
                method: crate::args::TinfMethod::MonteCarlo,
                depth: 24,
                samples: 64,
                tol: 1e-3,
                max_iter: 500,
            },
        ),
        (
            &two,
            Command::Tinf {
                grid: grid(64),
                method: crate::args::TinfMethod::Operator,
                depth: 24,
                samples: 0,
                tol: 1e-3,
                max_iter: 500,
            },
        ),
        (
            &square,
            Command::Tinf {
                grid: grid(64),
                method: crate::args::TinfMethod::Tree,
                depth: 24,
                samples: 0,
                tol: 1e-3,
                max_iter: 500,
            },
        ),
        (&two, Command::Julia { grid: grid(128), vertex: 1, points: 5000, method: crate::args::CloudMethod::Chain }),
        (&two, Command::Julia { grid: grid(128), vertex: 2, points: 5000, method: crate::args::CloudMethod::Tree }),
        (&two, Command::Filled { grid: grid(64), vertex: 2, depth: 16 }),
        (&two, Command::Jxi { grid: grid(128), vertex: 1, length: 30, stream: 3 }),
        (&two, Command::Orbit { z: (0.4, 1.1), vertex: 1, steps: 30, stream: 0 }),
        (&two, Command::Fixedpoints { vertex: 1, max_word_len: 3, words: 1000 }),
    ];
    let max = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let mut files = 0usize;
    for (k, (config, command)) in runs.iter().enumerate() {
        let mut reference: Option<Vec<(String, Vec<u8>)>> = None;
        for threads in [1, 4, max] {
            let dir = tempfile::tempdir()?;
            let cli = Cli {
                common: Common {
                    config: Some(config.to_path_buf()),
                    out: dir.path().to_path_buf(),
                    format: Format::Both,
                    seed: SEED,
                    threads,
                },
                command: command.clone(),
            };
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
            pool.install(|| commands::execute(&cli.common, &cli.command, &mut std::io::sink()))
                .with_context(|| format!("run {k} with {threads} threads"))?;
            let snapshot = snapshot(dir.path())?;
            match &reference {
                None => reference = Some(snapshot),
                Some(r) => {
                    if *r != snapshot {
                        return Ok(Measured::new(
                            false,
                            format!("run {k} ({command:?}) differs between 1 and {threads} threads"),
                        ));
                    }
                }
            }
        }
        files += reference.map_or(0, |r| r.len());
    }
    Ok(Measured::new(
        true,
        format!("{} runs, {files} files identical under 1, 4 and {max} threads", runs.len()),
    ))
}

/// Sorted `(name, bytes)` of a run directory with the manifest wall time
/// blanked.
fn snapshot(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let mut bytes = std::fs::read(entry.path())?;
        if name == MANIFEST_FILE {
            let mut v: serde_json::Value = serde_json::from_slice(&bytes)?;
            v["wall_time_s"] = serde_json::Value::Null;
            bytes = serde_json::to_vec(&v)?;
        }
        out.push((name, bytes));
    }
    out.sort();
    Ok(out)
}
