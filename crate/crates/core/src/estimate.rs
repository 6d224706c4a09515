//! Monte Carlo means and ratios, Metropolis sampling, and quadrature.
//!
//! # Reproducibility
//!
//! Samples are drawn in chunks of `chunk_size`. Chunk `c` uses a ChaCha8
//! stream seeded with `seed` and stream id `c`, and chunk statistics are merged
//! in chunk order. The result is therefore bitwise identical for a fixed
//! `(seed, samples, chunk_size)` no matter how many worker threads ran the
//! chunks.
//!
//! # Error bars
//!
//! Independent samplers use the sample covariance of the draws. Markov
//! samplers run one chain per chunk and use batch means over chunks, so they
//! need enough chunks (at least [`MIN_MARKOV_BATCHES`]) for a meaningful error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::Configuration;
use crate::{Error, Result};

pub type Stream = ChaCha8Rng;

/// Samples closer than this to a coincidence (relative to the configuration
/// diameter) are rejected and counted.
pub const SINGULAR_RADIUS: f64 = 1e-12;

pub const MIN_MARKOV_BATCHES: u64 = 8;

pub const DEFAULT_CHUNK_SIZE: u64 = 4096;

/// Independent random stream `index` of the generator seeded with `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McParams {
    pub samples: u64,
    pub seed: u64,
    pub chunk_size: u64,
}

impl McParams {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, chunk_size: DEFAULT_CHUNK_SIZE }
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    fn chunks(&self) -> u64 {
        self.samples.div_ceil(self.chunk_size.max(1))
    }
}

/// A mean with its standard error and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub seed: u64,
    pub n_rejected: u64,
}

impl MCEstimate {
    /// `|mean − target|` in units of the standard error; `0` or `∞` when the error vanishes.
    pub fn sigmas_from(&self, target: f64) -> f64 {
        let gap = (self.mean - target).abs();
        if self.stderr > 0.0 {
            gap / self.stderr
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Source of configurations for Monte Carlo integration.
pub trait Sampler: Sync {
    /// Draw stream for one chunk. Markov samplers start a fresh chain here.
    fn draws<'a>(&'a self, rng: Stream) -> Box<dyn Iterator<Item = Configuration> + 'a>;

    fn is_markov(&self) -> bool {
        false
    }

    /// Relative distance to a coincidence below which draws are rejected.
    fn rejection_radius(&self) -> f64 {
        SINGULAR_RADIUS
    }
}

/// Wraps an exact per-draw closure as a [`Sampler`].
pub struct IidSampler<F>(pub F);

impl<F> Sampler for IidSampler<F>
where
    F: Fn(&mut Stream) -> Configuration + Sync,
{
    fn draws<'a>(&'a self, mut rng: Stream) -> Box<dyn Iterator<Item = Configuration> + 'a> {
        Box::new(std::iter::repeat_with(move || (self.0)(&mut rng)))
    }
}

/// Draws `count` points in `R^dim` with independent `N(0, sd²)` coordinates.
pub fn normal_sampler(dim: usize, count: usize, sd: f64) -> impl Sampler {
    IidSampler(move |rng: &mut Stream| {
        let coords = (0..dim * count).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
        Configuration::from_raw(dim, coords)
    })
}

pub type Integrand<'a> = &'a (dyn Fn(&Configuration) -> f64 + Sync);

/// Running first and second moments of a vector of integrands.
#[derive(Debug, Clone)]
struct Accumulator {
    n: u64,
    rejected: u64,
    mean: Vec<f64>,
    comoment: Vec<f64>,
}

impl Accumulator {
    fn new(k: usize) -> Self {
        Self { n: 0, rejected: 0, mean: vec![0.0; k], comoment: vec![0.0; k * k] }
    }

    fn push(&mut self, values: &[f64]) {
        let k = self.mean.len();
        self.n += 1;
        let n = self.n as f64;
        let delta: Vec<f64> = values.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m += d / n;
        }
        for a in 0..k {
            let after = values[a] - self.mean[a];
            for b in 0..k {
                self.comoment[a * k + b] += delta[b] * after;
            }
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.rejected += other.rejected;
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            self.n = other.n;
            self.mean.clone_from(&other.mean);
            self.comoment.clone_from(&other.comoment);
            return;
        }
        let k = self.mean.len();
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta: Vec<f64> = other.mean.iter().zip(&self.mean).map(|(b, a)| b - a).collect();
        for a in 0..k {
            for b in 0..k {
                self.comoment[a * k + b] += other.comoment[a * k + b] + delta[a] * delta[b] * na * nb / n;
            }
        }
        for (m, d) in self.mean.iter_mut().zip(&delta) {
            *m += d * nb / n;
        }
        self.n += other.n;
    }
}

/// Joint means of several integrands on shared draws.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub means: Vec<f64>,
    /// Covariance matrix of the mean estimators, row-major.
    pub cov: Vec<f64>,
    pub n_samples: u64,
    pub n_rejected: u64,
    pub seed: u64,
}

impl Moments {
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn cov(&self, a: usize, b: usize) -> f64 {
        self.cov[a * self.len() + b]
    }

    pub fn estimate(&self, a: usize) -> MCEstimate {
        self.wrap(self.means[a], self.cov(a, a).max(0.0).sqrt())
    }

    /// First-order error of a smooth function of the means with the given gradient.
    pub fn delta_stderr(&self, grad: &[f64]) -> f64 {
        let k = self.len();
        let mut var = 0.0;
        for a in 0..k {
            for b in 0..k {
                var += grad[a] * grad[b] * self.cov(a, b);
            }
        }
        var.max(0.0).sqrt()
    }

    /// Estimate of `g(means)` with delta-method error.
    pub fn function(&self, value: f64, grad: &[f64]) -> MCEstimate {
        self.wrap(value, self.delta_stderr(grad))
    }

    /// `means[num] / means[den]` with delta-method error.
    pub fn ratio(&self, num: usize, den: usize) -> Result<MCEstimate> {
        let (a, b) = (self.means[num], self.means[den]);
        let se_b = self.cov(den, den).max(0.0).sqrt();
        if !(b.abs() >= 5.0 * se_b) || b == 0.0 {
            return Err(Error::DenominatorNearZero { mean: b, stderr: se_b });
        }
        let r = a / b;
        let mut grad = vec![0.0; self.len()];
        grad[num] += 1.0 / b;
        grad[den] -= r / b;
        Ok(self.function(r, &grad))
    }

    fn wrap(&self, mean: f64, stderr: f64) -> MCEstimate {
        MCEstimate {
            mean,
            stderr,
            n_samples: self.n_samples,
            seed: self.seed,
            n_rejected: self.n_rejected,
        }
    }
}

fn is_singular(x: &Configuration, radius: f64) -> bool {
    if radius <= 0.0 || x.count() < 2 {
        return false;
    }
    let diam = x.diameter();
    diam == 0.0 || x.min_pair_distance() < radius * diam
}

/// Sample means and their covariance for several integrands on shared draws.
pub fn mc_moments(integrands: &[Integrand<'_>], sampler: &dyn Sampler, params: McParams) -> Result<Moments> {
    if params.samples < 2 {
        return Err(Error::InvalidInput("at least two samples are required".into()));
    }
    if params.chunk_size == 0 {
        return Err(Error::InvalidInput("chunk size must be positive".into()));
    }
    let k = integrands.len();
    let chunks = params.chunks();
    let radius = sampler.rejection_radius();
    let per_chunk: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let take = params.chunk_size.min(params.samples - c * params.chunk_size);
            let mut acc = Accumulator::new(k);
            let mut values = vec![0.0; k];
            for x in sampler.draws(stream(params.seed, c)).take(take as usize) {
                if is_singular(&x, radius) {
                    acc.rejected += 1;
                    continue;
                }
                for (v, f) in values.iter_mut().zip(integrands) {
                    *v = f(&x);
                }
                if values.iter().all(|v| v.is_finite()) {
                    acc.push(&values);
                } else {
                    acc.rejected += 1;
                }
            }
            acc
        })
        .collect();

    let mut total = Accumulator::new(k);
    for acc in &per_chunk {
        total.merge(acc);
    }
    if total.n == 0 {
        return Err(Error::AllRejected(params.samples));
    }
    let n = total.n as f64;
    let cov = if sampler.is_markov() {
        let batches: Vec<&Accumulator> = per_chunk.iter().filter(|a| a.n > 0).collect();
        let nb = batches.len();
        if (nb as u64) < MIN_MARKOV_BATCHES.min(chunks).max(2) {
            return Err(Error::InvalidInput(format!(
                "Markov sampling needs at least {} non-empty chunks, got {nb}",
                MIN_MARKOV_BATCHES
            )));
        }
        // weighted batch means
        let mut cov = vec![0.0; k * k];
        for b in &batches {
            let w = b.n as f64 / n;
            for a in 0..k {
                for c in 0..k {
                    cov[a * k + c] += w * w * (b.mean[a] - total.mean[a]) * (b.mean[c] - total.mean[c]);
                }
            }
        }
        let scale = nb as f64 / (nb as f64 - 1.0);
        cov.iter().map(|v| v * scale).collect()
    } else {
        total.comoment.iter().map(|m| m / ((n - 1.0).max(1.0) * n)).collect()
    };
    Ok(Moments {
        means: total.mean,
        cov,
        n_samples: total.n,
        n_rejected: total.rejected,
        seed: params.seed,
    })
}

/// Sample mean of `integrand` over `sampler` draws.
pub fn mc_mean(integrand: Integrand<'_>, sampler: &dyn Sampler, params: McParams) -> Result<MCEstimate> {
    Ok(mc_moments(&[integrand], sampler, params)?.estimate(0))
}

/// `E[num]/E[den]` on shared draws, with delta-method error accounting for covariance.
pub fn mc_ratio(
    numerator: Integrand<'_>,
    denominator: Integrand<'_>,
    sampler: &dyn Sampler,
    params: McParams,
) -> Result<MCEstimate> {
    mc_moments(&[numerator, denominator], sampler, params)?.ratio(0, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetropolisConfig {
    /// Standard deviation of the isotropic Gaussian step.
    pub step: f64,
    pub burn_in: usize,
    pub thinning: usize,
    /// Probability of a pair-dilation move instead of a Gaussian step.
    pub dilation_prob: f64,
    /// Standard deviation of `ln λ` in dilation moves.
    pub dilation_scale: f64,
    /// Adapt `step` during burn-in towards an acceptance rate in `[0.2, 0.5]`.
    pub tune: bool,
}

impl Default for MetropolisConfig {
    fn default() -> Self {
        Self {
            step: 0.5,
            burn_in: 2000,
            thinning: 4,
            dilation_prob: 0.3,
            dilation_scale: 1.0,
            tune: true,
        }
    }
}

/// Random-walk Metropolis sampler for an unnormalized log-density on `R^{dN}`.
///
/// Two proposal kinds are mixed:
///
/// * an isotropic Gaussian step of all coordinates;
/// * a pair dilation: pick `i<j`, draw `λ = exp(σξ)` and replace
///   `x_i − x_j` by `λ(x_i − x_j)` keeping the midpoint fixed. The Jacobian
///   `λ^d` enters the acceptance ratio. These moves let a chain cross the
///   many length scales of densities with integrable singularities at
///   coincidences.
///
/// A proposal where the log-density is not finite (zero density) is always
/// rejected.
pub struct MetropolisSampler<F> {
    log_density: F,
    init: Configuration,
    config: MetropolisConfig,
}

impl<F> MetropolisSampler<F>
where
    F: Fn(&Configuration) -> f64 + Sync,
{
    pub fn new(log_density: F, init: Configuration, config: MetropolisConfig) -> Result<Self> {
        if !log_density(&init).is_finite() {
            return Err(Error::ZeroDensityInit);
        }
        if !(config.step > 0.0) || config.thinning == 0 {
            return Err(Error::InvalidInput("step must be positive and thinning at least 1".into()));
        }
        Ok(Self { log_density, init, config })
    }

    pub fn chain(&self, rng: Stream) -> Chain<'_, F> {
        let lp = (self.log_density)(&self.init);
        let mut chain = Chain {
            sampler: self,
            rng,
            current: self.init.clone(),
            current_lp: lp,
            step: self.config.step,
            proposed: 0,
            accepted: 0,
        };
        chain.burn_in();
        chain
    }
}

impl<F> Sampler for MetropolisSampler<F>
where
    F: Fn(&Configuration) -> f64 + Sync,
{
    fn draws<'a>(&'a self, rng: Stream) -> Box<dyn Iterator<Item = Configuration> + 'a> {
        Box::new(self.chain(rng))
    }

    fn is_markov(&self) -> bool {
        true
    }

    fn rejection_radius(&self) -> f64 {
        0.0
    }
}

/// One Metropolis chain; yields thinned states after burn-in.
pub struct Chain<'a, F> {
    sampler: &'a MetropolisSampler<F>,
    rng: Stream,
    current: Configuration,
    current_lp: f64,
    step: f64,
    proposed: u64,
    accepted: u64,
}

impl<F> Chain<'_, F>
where
    F: Fn(&Configuration) -> f64 + Sync,
{
    /// Acceptance rate since burn-in ended.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    fn burn_in(&mut self) {
        let cfg = self.sampler.config;
        const WINDOW: usize = 100;
        for t in 0..cfg.burn_in {
            self.advance();
            if cfg.tune && (t + 1) % WINDOW == 0 {
                let rate = self.acceptance_rate();
                if rate > 0.5 {
                    self.step *= 1.25;
                } else if rate < 0.2 {
                    self.step *= 0.7;
                }
                self.proposed = 0;
                self.accepted = 0;
            }
        }
        log::debug!(
            "metropolis burn-in done: step {:.4}, last-window acceptance {:.3}",
            self.step,
            self.acceptance_rate()
        );
        self.proposed = 0;
        self.accepted = 0;
    }

    fn advance(&mut self) {
        let cfg = self.sampler.config;
        let dim = self.current.dim();
        let count = self.current.count();
        let mut proposal = self.current.clone();
        let mut log_jacobian = 0.0;
        if count >= 2 && self.rng.random::<f64>() < cfg.dilation_prob {
            let i = self.rng.random_range(0..count);
            let mut j = self.rng.random_range(0..count - 1);
            if j >= i {
                j += 1;
            }
            let log_lambda = cfg.dilation_scale * self.rng.sample::<f64, _>(StandardNormal);
            let lambda = log_lambda.exp();
            let coords = proposal.coords_mut();
            for c in 0..dim {
                let (xi, xj) = (coords[i * dim + c], coords[j * dim + c]);
                let mid = 0.5 * (xi + xj);
                let half = 0.5 * (xi - xj) * lambda;
                coords[i * dim + c] = mid + half;
                coords[j * dim + c] = mid - half;
            }
            log_jacobian = dim as f64 * log_lambda;
        } else {
            for c in proposal.coords_mut() {
                *c += self.step * self.rng.sample::<f64, _>(StandardNormal);
            }
        }
        self.proposed += 1;
        let lp = (self.sampler.log_density)(&proposal);
        if !lp.is_finite() {
            return;
        }
        let log_ratio = lp - self.current_lp + log_jacobian;
        if log_ratio >= 0.0 || self.rng.random::<f64>().ln() < log_ratio {
            self.current = proposal;
            self.current_lp = lp;
            self.accepted += 1;
        }
    }
}

impl<F> Iterator for Chain<'_, F>
where
    F: Fn(&Configuration) -> f64 + Sync,
{
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        for _ in 0..self.sampler.config.thinning {
            self.advance();
        }
        Some(self.current.clone())
    }
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Interval {
    Finite(f64, f64),
    /// `[a, ∞)`
    HalfLine(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleFamily {
    /// Gauss–Legendre, finite intervals only; `n` doubles per refinement.
    GaussLegendre,
    /// tanh-sinh on finite intervals, exp-sinh on half-lines; step halves per refinement.
    DoubleExponential,
}

/// Nodes and positive weights of a 1D rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly (Gauss rules), 0 when not applicable.
    pub order: usize,
}

impl QuadratureGrid {
    /// `n`-point Gauss–Legendre rule on `[a, b]`, exact for degree `2n − 1`.
    pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Self {
        assert!(n >= 1);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let kf = k as f64;
                    (p0, p1) = (p1, ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf);
                }
                if n == 1 {
                    p1 = x;
                    p0 = 1.0;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            if n == 1 {
                x = 0.0;
                dp = 1.0;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = mid - half * x;
            nodes[n - 1 - i] = mid + half * x;
            weights[i] = half * w;
            weights[n - 1 - i] = half * w;
        }
        Self { nodes, weights, order: 2 * n - 1 }
    }

    /// tanh-sinh rule on `[a, b]` with step `h`; endpoint-singular integrands are fine.
    pub fn tanh_sinh(h: f64, a: f64, b: f64) -> Self {
        use std::f64::consts::FRAC_PI_2;
        let half = 0.5 * (b - a);
        let (mut nodes, mut weights) = (Vec::new(), Vec::new());
        let kmax = (4.0 / h).ceil() as i64;
        for k in -kmax..=kmax {
            let t = k as f64 * h;
            let u = FRAC_PI_2 * t.sinh();
            let e = (-2.0 * u.abs()).exp();
            // distance to the nearer endpoint: half·(1 − tanh|u|)
            let gap = half * 2.0 * e / (1.0 + e);
            if gap <= 0.0 {
                continue;
            }
            let x = if t >= 0.0 { b - gap } else { a + gap };
            let cosh_u = u.cosh();
            let w = h * half * FRAC_PI_2 * t.cosh() / (cosh_u * cosh_u);
            if w > 0.0 && w.is_finite() && x > a && x < b {
                nodes.push(x);
                weights.push(w);
            }
        }
        Self { nodes, weights, order: 0 }
    }

    /// exp-sinh rule on `[a, ∞)` with step `h`.
    pub fn exp_sinh(h: f64, a: f64) -> Self {
        use std::f64::consts::FRAC_PI_2;
        let (mut nodes, mut weights) = (Vec::new(), Vec::new());
        let kmax = (7.0 / h).ceil() as i64;
        for k in -kmax..=kmax {
            let t = k as f64 * h;
            let e = (FRAC_PI_2 * t.sinh()).exp();
            if e < f64::MIN_POSITIVE || e > EXP_SINH_MAX_NODE {
                continue;
            }
            let w = h * FRAC_PI_2 * t.cosh() * e;
            if w.is_finite() && w > 0.0 {
                nodes.push(a + e);
                weights.push(w);
            }
        }
        Self { nodes, weights, order: 0 }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    fn at_level(family: RuleFamily, interval: Interval, level: u32) -> Result<Self> {
        match (family, interval) {
            (RuleFamily::GaussLegendre, Interval::Finite(a, b)) => Ok(Self::gauss_legendre(8 << level, a, b)),
            (RuleFamily::GaussLegendre, Interval::HalfLine(_)) => Err(Error::InvalidInput(
                "Gauss–Legendre needs a finite interval".into(),
            )),
            (RuleFamily::DoubleExponential, Interval::Finite(a, b)) => {
                Ok(Self::tanh_sinh(0.5f64.powi(level as i32), a, b))
            }
            (RuleFamily::DoubleExponential, Interval::HalfLine(a)) => {
                Ok(Self::exp_sinh(0.5f64.powi(level as i32), a))
            }
        }
    }
}

/// Outcome of a refined quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Relative change between the last two refinements.
    pub last_delta: f64,
    pub levels: u32,
}

/// Largest exp-sinh abscissa offset; integrands are assumed negligible beyond it.
const EXP_SINH_MAX_NODE: f64 = 1e100;
const QUAD_TARGET: f64 = 1e-13;
const QUAD_ACCEPT: f64 = 1e-8;
const QUAD_MAX_LEVEL: u32 = 7;
const TENSOR_NODE_BUDGET: usize = 20_000_000;

fn rel_change(new: f64, old: f64) -> f64 {
    let scale = new.abs().max(old.abs());
    if scale == 0.0 {
        0.0
    } else {
        (new - old).abs() / scale
    }
}

/// Integrates `f` over `interval`, refining until two successive levels agree
/// to `1e-13` relative. Fails with [`Error::NonConvergent`] if the last change
/// still exceeds `1e-8`.
pub fn radial_quadrature<F: Fn(f64) -> f64>(f: F, interval: Interval, family: RuleFamily) -> Result<QuadratureResult> {
    let mut prev = QuadratureGrid::at_level(family, interval, 0)?.integrate(&f);
    let mut delta = f64::INFINITY;
    for level in 1..=QUAD_MAX_LEVEL {
        let value = QuadratureGrid::at_level(family, interval, level)?.integrate(&f);
        delta = rel_change(value, prev);
        prev = value;
        if !value.is_finite() {
            return Err(Error::NonConvergent(f64::INFINITY));
        }
        if delta <= QUAD_TARGET && level >= 2 {
            return Ok(QuadratureResult { value, last_delta: delta, levels: level });
        }
    }
    if delta <= QUAD_ACCEPT {
        Ok(QuadratureResult { value: prev, last_delta: delta, levels: QUAD_MAX_LEVEL })
    } else {
        Err(Error::NonConvergent(delta))
    }
}

/// Product-rule integral of `f` over a box of up to four intervals.
pub fn tensor_quadrature<F: Fn(&[f64]) -> f64>(
    f: F,
    intervals: &[Interval],
    family: RuleFamily,
) -> Result<QuadratureResult> {
    let dims = intervals.len();
    if dims == 0 || dims > 4 {
        return Err(Error::InvalidInput(format!("tensor quadrature supports 1 to 4 dimensions, got {dims}")));
    }
    let eval = |level: u32| -> Result<Option<f64>> {
        let grids = intervals
            .iter()
            .map(|iv| QuadratureGrid::at_level(family, *iv, level))
            .collect::<Result<Vec<_>>>()?;
        let total: usize = grids.iter().map(|g| g.nodes.len()).product();
        if total > TENSOR_NODE_BUDGET {
            return Ok(None);
        }
        let mut idx = vec![0usize; dims];
        let mut point = vec![0.0; dims];
        let mut sum = 0.0;
        'outer: loop {
            let mut w = 1.0;
            for (k, g) in grids.iter().enumerate() {
                point[k] = g.nodes[idx[k]];
                w *= g.weights[idx[k]];
            }
            sum += w * f(&point);
            for k in (0..dims).rev() {
                idx[k] += 1;
                if idx[k] < grids[k].nodes.len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        Ok(Some(sum))
    };
    let mut prev = eval(0)?.ok_or(Error::NonConvergent(f64::INFINITY))?;
    let mut delta = f64::INFINITY;
    let mut levels = 0;
    for level in 1..=QUAD_MAX_LEVEL {
        let Some(value) = eval(level)? else { break };
        delta = rel_change(value, prev);
        prev = value;
        levels = level;
        if delta <= QUAD_TARGET && level >= 2 {
            break;
        }
    }
    if delta <= QUAD_ACCEPT && prev.is_finite() {
        Ok(QuadratureResult { value: prev, last_delta: delta, levels })
    } else {
        Err(Error::NonConvergent(delta))
    }
}
