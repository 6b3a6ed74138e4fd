use crate::model::{SpherePoint, System};
use crate::rng;
use crate::sampler::{draw_choice, is_escaped};
use crate::{Result, Scalar};

/// Sample mean of escape indicators with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbEstimate<T> {
    pub mean: T,
    pub stderr: T,
    pub n_samples: usize,
}

impl<T: Scalar> ProbEstimate<T> {
    pub fn from_count(escaped: usize, n_samples: usize) -> Self {
        let mean = T::lit(escaped as f64 / n_samples as f64);
        let stderr = (mean * (T::one() - mean) / T::lit(n_samples as f64)).sqrt();
        ProbEstimate { mean, stderr, n_samples }
    }
}

/// Does the orbit of `z` along a fresh word drawn from stream `stream_id`
/// escape within `max_steps`? The draws match [`crate::sampler::sample_word`]
/// for the same stream, so the outcome equals running that word.
pub fn sample_escapes<T: Scalar>(
    s: &System<T>,
    z: SpherePoint<T>,
    vertex: usize,
    max_steps: usize,
    seed: u64,
    stream_id: u64,
) -> Result<bool> {
    let radius = s.escape_radius();
    if is_escaped(&z, radius) {
        return Ok(true);
    }
    let mut rng = rng::stream(seed, stream_id);
    let (mut w, mut v) = (z, vertex);
    for _ in 0..max_steps {
        let c = draw_choice(s, v, &mut rng)?;
        w = s.map(&c).eval_sphere(w);
        v = c.to;
        if is_escaped(&w, radius) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Monte Carlo estimate of the depth-`max_steps` escape probability from
/// `(z, vertex)`; sample `k` uses stream `stream_base + k`.
pub fn monte_carlo_t<T: Scalar>(
    s: &System<T>,
    z: SpherePoint<T>,
    vertex: usize,
    n_samples: usize,
    max_steps: usize,
    seed: u64,
    stream_base: u64,
) -> Result<ProbEstimate<T>> {
    assert!(n_samples >= 1, "at least one sample");
    let mut escaped = 0usize;
    for k in 0..n_samples as u64 {
        if sample_escapes(s, z, vertex, max_steps, seed, stream_base.wrapping_add(k))? {
            escaped += 1;
        }
    }
    Ok(ProbEstimate::from_count(escaped, n_samples))
}
