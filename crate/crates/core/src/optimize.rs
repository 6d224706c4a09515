//! Searches: the curvature ratio `K` over weighted atomic measures, the
//! one-dimensional sharpness family over `δ`, and trial-family parameters.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimate::{stream, MCEstimate, McParams, Stream};
use crate::functionals::{hardy_quotient, QuotientResult};
use crate::geometry::{circumradius_inv_sq, dist_sq, Configuration};
use crate::trials::{gaussian_product, sharpness_1d, sharpness_pair_integrals, SharpnessParams};
use crate::{Error, Result};

/// How triples with a repeated atom are counted in [`k_objective`].
pub const K_TRIPLE_CONVENTION: &str = "ordered sums over distinct indices; repeated-index triples contribute 0 (R = infinity)";

/// Atoms in `R^d` with nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMeasure {
    pub atoms: Configuration,
    pub weights: Vec<f64>,
}

impl WeightedMeasure {
    pub fn new(atoms: Configuration, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != atoms.count() {
            return Err(Error::InvalidInput(format!(
                "{} weights for {} atoms",
                weights.len(),
                atoms.count()
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { atoms, weights })
    }

    pub fn uniform(atoms: Configuration) -> Self {
        let n = atoms.count();
        Self { atoms, weights: vec![1.0 / n as f64; n] }
    }

    /// Weights `softmax(logits)`.
    pub fn from_logits(atoms: Configuration, logits: &[f64]) -> Result<Self> {
        let weights = softmax(logits);
        if weights.len() != atoms.count() {
            return Err(Error::InvalidInput("one logit per atom is required".into()));
        }
        Ok(Self { atoms, weights })
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// `[Σ_{i,j,k distinct} w_i w_j w_k / R²] / [Σ_{i≠j} w_i w_j / r²]`.
///
/// Scale invariant. Zero in one dimension and for fewer than three atoms.
pub fn k_objective(measure: &WeightedMeasure) -> Result<f64> {
    let x = &measure.atoms;
    let w = &measure.weights;
    let n = x.count();
    let mut pairs = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let r2 = dist_sq(x.point(i), x.point(j));
            if r2 == 0.0 {
                return Err(Error::CoincidentAtoms(i, j));
            }
            pairs += w[i] * w[j] / r2;
        }
    }
    let mut triples = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let wijk = w[i] * w[j] * w[k];
                if wijk > 0.0 {
                    triples += wijk * circumradius_inv_sq(x.point(i), x.point(j), x.point(k))?;
                }
            }
        }
    }
    if pairs == 0.0 {
        return Ok(0.0);
    }
    Ok(6.0 * triples / (2.0 * pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KConfig {
    pub iters: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Initial ascent step length in parameter space.
    pub step: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for KConfig {
    fn default() -> Self {
        Self { iters: 2000, restarts: 8, seed: 0, step: 0.1, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub restart: usize,
    pub value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KResult {
    pub measure: WeightedMeasure,
    pub value: f64,
    /// Best-so-far objective of the winning restart, one entry per iteration.
    pub trace: Vec<f64>,
    pub restarts: Vec<RestartOutcome>,
    pub convention: String,
}

struct Ascent {
    measure: WeightedMeasure,
    value: f64,
    trace: Vec<f64>,
    iterations: usize,
}

fn unpack(theta: &[f64], d: usize, n: usize) -> WeightedMeasure {
    let atoms = Configuration::new(d, theta[..d * n].to_vec()).expect("finite parameters");
    WeightedMeasure::from_logits(atoms, &theta[d * n..]).expect("one logit per atom")
}

fn objective(theta: &[f64], d: usize, n: usize) -> f64 {
    if theta.iter().any(|t| !t.is_finite()) {
        return f64::NEG_INFINITY;
    }
    k_objective(&unpack(theta, d, n)).unwrap_or(f64::NEG_INFINITY)
}

/// Recenters the atoms at their weighted mean, rescales them to unit RMS
/// radius, and shifts the logits to mean zero. The objective is unchanged.
fn normalize(theta: &mut [f64], d: usize, n: usize) {
    let w = softmax(&theta[d * n..]);
    let mut center = vec![0.0; d];
    for i in 0..n {
        for c in 0..d {
            center[c] += w[i] * theta[i * d + c];
        }
    }
    for i in 0..n {
        for c in 0..d {
            theta[i * d + c] -= center[c];
        }
    }
    let rms = (theta[..d * n].iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if rms > 0.0 {
        for v in &mut theta[..d * n] {
            *v /= rms;
        }
    }
    let mean = theta[d * n..].iter().sum::<f64>() / n as f64;
    for v in &mut theta[d * n..] {
        *v -= mean;
    }
}

fn fd_gradient(theta: &[f64], d: usize, n: usize, rel: f64) -> Vec<f64> {
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|k| {
            let h = rel * theta[k].abs().max(1.0);
            let orig = probe[k];
            probe[k] = orig + h;
            let plus = objective(&probe, d, n);
            probe[k] = orig - h;
            let minus = objective(&probe, d, n);
            probe[k] = orig;
            let g = (plus - minus) / (2.0 * h);
            if g.is_finite() {
                g
            } else {
                0.0
            }
        })
        .collect()
}

fn ascend(mut theta: Vec<f64>, d: usize, n: usize, cfg: &KConfig) -> Ascent {
    normalize(&mut theta, d, n);
    let mut value = objective(&theta, d, n);
    let mut step = cfg.step;
    let mut trace = Vec::with_capacity(cfg.iters);
    let mut iterations = 0;
    for _ in 0..cfg.iters {
        iterations += 1;
        let g = fd_gradient(&theta, d, n, cfg.fd_step);
        let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gnorm > 0.0 {
            let mut accepted = false;
            for _ in 0..40 {
                let mut trial: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t + step * gi / gnorm).collect();
                normalize(&mut trial, d, n);
                let v = objective(&trial, d, n);
                if v > value {
                    theta = trial;
                    value = v;
                    step *= 1.5;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                step = cfg.step * 1e-3;
            }
        }
        trace.push(value);
        if step < 1e-14 {
            break;
        }
    }
    Ascent { measure: unpack(&theta, d, n), value, trace, iterations }
}

fn random_start(rng: &mut Stream, d: usize, n: usize) -> Vec<f64> {
    let mut theta: Vec<f64> = (0..d * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    theta.extend((0..n).map(|_| 0.1 * rng.sample::<f64, _>(StandardNormal)));
    theta
}

fn measure_params(m: &WeightedMeasure) -> Vec<f64> {
    let mut theta = m.atoms.coords().to_vec();
    theta.extend(m.weights.iter().map(|w| w.max(1e-300).ln()));
    theta
}

/// Gradient ascent of [`k_objective`] over atom positions and softmax weight
/// logits from `cfg.restarts` random starts (restart `r` uses stream `r` of
/// `cfg.seed`), plus an optional warm start. Returns the best restart; ties go
/// to the lower restart index.
pub fn maximize_k(d: usize, n_atoms: usize, cfg: &KConfig, warm_start: Option<&WeightedMeasure>) -> Result<KResult> {
    if n_atoms < 3 {
        return Err(Error::InvalidInput(format!("K needs at least 3 atoms, got {n_atoms}")));
    }
    if d == 0 {
        return Err(Error::InvalidInput("dimension must be at least 1".into()));
    }
    let mut starts: Vec<Vec<f64>> =
        (0..cfg.restarts).map(|r| random_start(&mut stream(cfg.seed, r as u64), d, n_atoms)).collect();
    if let Some(w) = warm_start {
        if w.atoms.dim() != d || w.atoms.count() > n_atoms {
            return Err(Error::InvalidInput("warm start must fit the requested d and atom count".into()));
        }
        let mut theta = w.atoms.coords().to_vec();
        let extra = random_start(&mut stream(cfg.seed, cfg.restarts as u64), d, n_atoms);
        theta.extend_from_slice(&extra[w.atoms.count() * d..n_atoms * d]);
        let mut logits = measure_params(w)[w.atoms.count() * d..].to_vec();
        // new atoms start with negligible weight, so the warm start keeps its value
        logits.extend(std::iter::repeat_n(-30.0, n_atoms - w.atoms.count()));
        theta.extend(logits);
        starts.push(theta);
    }
    if starts.is_empty() {
        return Err(Error::InvalidInput("at least one restart is required".into()));
    }
    let runs: Vec<Ascent> = starts.into_par_iter().map(|theta| ascend(theta, d, n_atoms, cfg)).collect();
    let restarts = runs
        .iter()
        .enumerate()
        .map(|(restart, a)| RestartOutcome { restart, value: a.value, iterations: a.iterations })
        .collect();
    let mut best = 0;
    for (i, a) in runs.iter().enumerate() {
        if a.value > runs[best].value {
            best = i;
        }
    }
    let winner = runs.into_iter().nth(best).expect("nonempty");
    let mut running = f64::NEG_INFINITY;
    let trace = winner
        .trace
        .iter()
        .map(|v| {
            running = running.max(*v);
            running
        })
        .collect();
    log::info!("K search d={d} n={n_atoms}: best {:.12} from restart {best}", winner.value);
    Ok(KResult {
        measure: winner.measure,
        value: winner.value,
        trace,
        restarts,
        convention: K_TRIPLE_CONVENTION.into(),
    })
}

/// Runs [`maximize_k`] for `3..=max_atoms`, warm-starting each size from the
/// previous best so the reported values are nested lower bounds.
pub fn maximize_k_sweep(d: usize, max_atoms: usize, cfg: &KConfig) -> Result<Vec<KResult>> {
    let mut out: Vec<KResult> = Vec::new();
    for n in 3..=max_atoms {
        let warm = out.last().map(|r| r.measure.clone());
        out.push(maximize_k(d, n, cfg, warm.as_ref())?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Sharpness family
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessPoint {
    /// Particle count.
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
    pub quotient: MCEstimate,
    pub beta: MCEstimate,
    /// `8α²(1 + β)`.
    pub upper: MCEstimate,
    pub lower: f64,
    /// Exact quotient and `β` when `N = 2`.
    pub exact_quotient: Option<f64>,
    pub exact_beta: Option<f64>,
}

fn scale_estimate(e: &MCEstimate, mean: f64, stderr: f64) -> MCEstimate {
    MCEstimate { mean, stderr, ..*e }
}

fn sharpness_point(n: usize, delta: f64, params: McParams) -> Result<(SharpnessPoint, QuotientResult)> {
    let sp = SharpnessParams::new(delta)?;
    let v = sharpness_1d(n, sp)?;
    let r = hardy_quotient(&v, params)?;
    let x = *r.x.estimate().expect("monte carlo");
    let q = *r.quotient.estimate().expect("monte carlo");
    let a2 = 8.0 * sp.alpha * sp.alpha;
    let beta_mean = 1.0 / (a2 * x.mean);
    let beta = scale_estimate(&x, beta_mean, beta_mean * x.stderr / x.mean);
    let upper = scale_estimate(&x, a2 * (1.0 + beta.mean), a2 * beta.stderr);
    let (exact_quotient, exact_beta) = if n == 2 {
        let (mass, t, pair) = sharpness_pair_integrals(sp.alpha);
        (Some(t / pair), Some(mass / (a2 * pair)))
    } else {
        (None, None)
    };
    Ok((
        SharpnessPoint { n, delta, alpha: sp.alpha, quotient: q, beta, upper, lower: 0.5, exact_quotient, exact_beta },
        r,
    ))
}

/// `β(δ) = ∫v² / (8α² ∫v² Σ 1/r_ij²)` by Metropolis sampling.
pub fn beta_delta(n: usize, delta: f64, params: McParams) -> Result<MCEstimate> {
    Ok(sharpness_point(n, delta, params)?.0.beta)
}

/// Quotient, `β` and the upper bound `8α²(1+β)` for each `δ`, each on its own
/// seed stream `seed + index`.
pub fn sharpness_scan(n: usize, deltas: &[f64], params: McParams) -> Result<Vec<SharpnessPoint>> {
    deltas
        .iter()
        .enumerate()
        .map(|(i, &delta)| {
            let p = McParams { seed: params.seed.wrapping_add(i as u64), ..params };
            Ok(sharpness_point(n, delta, p)?.0)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Quotient minimization over family parameters
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotientFamily {
    /// Isotropic Gaussian product; parameter `ln s`.
    GaussianScale,
    /// Unit-scale Gaussian product with free centers; parameters are the `N·d` center coordinates.
    GaussianCenters,
}

impl QuotientFamily {
    pub fn dimension(&self, d: usize, n: usize) -> usize {
        match self {
            QuotientFamily::GaussianScale => 1,
            QuotientFamily::GaussianCenters => d * n,
        }
    }

    fn quotient(&self, d: usize, n: usize, p: &[f64], mc: McParams) -> Result<QuotientResult> {
        match self {
            QuotientFamily::GaussianScale => hardy_quotient(&gaussian_product(d, n, p[0].exp())?, mc),
            QuotientFamily::GaussianCenters => {
                let centers = Configuration::new(d, p.to_vec())?;
                hardy_quotient(&gaussian_product(d, n, 1.0)?.with_centers(&centers)?, mc)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub family: QuotientFamily,
    pub d: usize,
    pub n: usize,
    pub params: Vec<f64>,
    /// Quotient at `params` re-estimated on an independent stream.
    pub result: QuotientResult,
    pub evaluations: usize,
    /// Best quotient seen after each successful evaluation.
    pub trace: Vec<f64>,
}

/// Nelder–Mead on the Monte Carlo quotient with common random numbers (every
/// evaluation uses `mc.seed`). The best point is re-estimated with seed
/// `mc.seed + 1` so the reported value is not biased by the selection.
pub fn minimize_quotient(
    family: QuotientFamily,
    d: usize,
    n: usize,
    initial: &[f64],
    budget: usize,
    mc: McParams,
) -> Result<MinimizeResult> {
    let dim = family.dimension(d, n);
    if initial.len() != dim {
        return Err(Error::InvalidInput(format!("{family:?} takes {dim} parameters, got {}", initial.len())));
    }
    let mut trace: Vec<f64> = Vec::new();
    let mut evaluations = 0;
    let mut f = |p: &[f64]| -> f64 {
        evaluations += 1;
        let v = family.quotient(d, n, p, mc).map(|r| r.quotient.value()).unwrap_or(f64::INFINITY);
        // failed evaluations are left out of the trace
        if v.is_finite() {
            trace.push(trace.last().map_or(v, |b: &f64| b.min(v)));
        }
        v
    };
    let best = if budget == 0 { initial.to_vec() } else { nelder_mead(&mut f, initial, 0.25, budget) };
    let result = family.quotient(d, n, &best, McParams { seed: mc.seed.wrapping_add(1), ..mc })?;
    Ok(MinimizeResult { family, d, n, params: best, result, evaluations, trace })
}

/// Minimizes `f` with at most `budget` evaluations from an axis-aligned simplex of size `size`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: &mut F, x0: &[f64], size: f64, budget: usize) -> Vec<f64> {
    let m = x0.len();
    let mut used = 0;
    let mut eval = |x: &[f64], used: &mut usize| {
        *used += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut used)));
    for k in 0..m {
        if used >= budget {
            break;
        }
        let mut x = x0.to_vec();
        x[k] += size;
        let v = eval(&x, &mut used);
        simplex.push((x, v));
    }
    if simplex.len() < m + 1 {
        return best_of(&simplex);
    }
    while used + 2 <= budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let worst = simplex[m].clone();
        let centroid: Vec<f64> =
            (0..m).map(|k| simplex[..m].iter().map(|(x, _)| x[k]).sum::<f64>() / m as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
        let xr = along(1.0);
        let fr = eval(&xr, &mut used);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, &mut used);
            simplex[m] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[m - 1].1 {
            simplex[m] = (xr, fr);
        } else {
            let xc = if fr < worst.1 { along(0.5) } else { along(-0.5) };
            let fc = eval(&xc, &mut used);
            if fc < worst.1.min(fr) {
                simplex[m] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    if used >= budget {
                        break;
                    }
                    let x: Vec<f64> = best.iter().zip(&entry.0).map(|(b, x)| b + 0.5 * (x - b)).collect();
                    let v = eval(&x, &mut used);
                    *entry = (x, v);
                }
            }
        }
    }
    best_of(&simplex)
}

fn best_of(simplex: &[(Vec<f64>, f64)]) -> Vec<f64> {
    simplex.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|(x, _)| x.clone()).expect("nonempty simplex")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn equilateral() -> WeightedMeasure {
        let h = 3f64.sqrt() / 2.0;
        WeightedMeasure::uniform(Configuration::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.5, h]).unwrap())
    }

    #[test]
    fn k_examples() {
        assert_relative_eq!(k_objective(&equilateral()).unwrap(), 1.0, epsilon = 1e-12);
        let line = WeightedMeasure::uniform(Configuration::new(1, vec![0.0, 1.0, 3.0, 7.0]).unwrap());
        assert_eq!(k_objective(&line).unwrap(), 0.0);
        let two = WeightedMeasure::uniform(Configuration::new(2, vec![0.0, 0.0, 1.0, 1.0]).unwrap());
        assert_eq!(k_objective(&two).unwrap(), 0.0);
        let tet = WeightedMeasure::uniform(
            Configuration::new(3, vec![1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0, 1.0]).unwrap(),
        );
        assert_relative_eq!(k_objective(&tet).unwrap(), 1.5, epsilon = 1e-12);
        let dup = WeightedMeasure::uniform(Configuration::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap());
        assert_eq!(k_objective(&dup).unwrap_err(), Error::CoincidentAtoms(0, 2));
    }

    #[test]
    fn k_invariances() {
        let m = WeightedMeasure::new(
            Configuration::new(2, vec![0.1, 0.3, 1.2, -0.4, 0.5, 0.9, -0.7, 0.2]).unwrap(),
            vec![0.1, 0.2, 0.3, 0.4],
        )
        .unwrap();
        let k = k_objective(&m).unwrap();
        let scaled = WeightedMeasure { atoms: m.atoms.scaled(7.3), ..m.clone() };
        assert!((k_objective(&scaled).unwrap() - k).abs() <= 1e-12 * k);
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let rotated: Vec<f64> = m
            .atoms
            .points()
            .flat_map(|p| [c * p[0] - s * p[1] + 2.0, s * p[0] + c * p[1] - 1.0])
            .collect();
        let rot = WeightedMeasure { atoms: Configuration::new(2, rotated).unwrap(), ..m.clone() };
        assert!((k_objective(&rot).unwrap() - k).abs() <= 1e-12 * k);
    }

    #[test]
    fn three_atoms_reach_equilateral_value() {
        let cfg = KConfig { seed: 1, ..KConfig::default() };
        let r = maximize_k(2, 3, &cfg, None).unwrap();
        assert!(r.value >= 1.0 - 1e-6, "{}", r.value);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
        let again = maximize_k(2, 3, &cfg, None).unwrap();
        assert_eq!(r.value.to_bits(), again.value.to_bits());
        let scaled = WeightedMeasure { atoms: r.measure.atoms.scaled(3.0), ..r.measure.clone() };
        assert!((k_objective(&scaled).unwrap() - r.value).abs() <= 1e-12);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let mut f = |x: &[f64]| (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2);
        let x = nelder_mead(&mut f, &[0.0, 0.0], 0.5, 400);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn budget_zero_returns_initial_point() {
        let mc = McParams::new(20_000, 2);
        let r = minimize_quotient(QuotientFamily::GaussianScale, 3, 2, &[0.0], 0, mc).unwrap();
        assert_eq!(r.params, vec![0.0]);
        assert_eq!(r.evaluations, 0);
        assert!(r.result.quotient.estimate().unwrap().sigmas_from(3.0) < 4.0);
    }
}
