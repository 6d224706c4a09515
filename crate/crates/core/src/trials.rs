//! Trial-function families on `R^{dN}`.
//!
//! Every family implements [`TrialFunction`]: value, analytic gradient, and
//! optionally an exact sampler of `|u|²/∫|u|²`, an importance proposal that
//! concentrates near particle coincidences, and closed-form integrals.
//!
//! The Aharonov–Bohm single modes are complex valued and live in [`AbMode`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::json;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::bounds::sphere_area;
use crate::estimate::Stream;
use crate::geometry::{dist_sq, Configuration};
use crate::{Error, Result};

/// Named integrals available in closed form.
///
/// `pair` is the singular term of the family's own quotient: `Σ_{i<j}∫|u|²/r_ij²`
/// for many-particle families and `∫|u|²/|x|²` for single-particle ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClosedForms {
    pub mass: Option<f64>,
    pub kinetic: Option<f64>,
    pub pair: Option<f64>,
}

impl ClosedForms {
    pub fn quotient(&self) -> Option<f64> {
        Some(self.kinetic? / self.pair?)
    }
}

/// An importance density `h` on `R^{dN}` with an exact sampler.
pub trait Proposal: Send + Sync {
    fn sample(&self, rng: &mut Stream) -> Configuration;
    /// `ln h(x)` including normalization.
    fn ln_density(&self, x: &Configuration) -> f64;
}

pub trait TrialFunction: Send + Sync {
    fn name(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn count(&self) -> usize;
    fn value(&self, x: &Configuration) -> f64;
    /// `∇u`, laid out like the configuration coordinates.
    fn gradient(&self, x: &Configuration) -> Vec<f64>;

    /// `ln|u|`; `-∞` where `u` vanishes.
    fn ln_abs(&self, x: &Configuration) -> f64 {
        self.value(x).abs().ln()
    }

    /// `∇u/u`; `None` where `u` vanishes.
    fn score(&self, x: &Configuration) -> Option<Vec<f64>> {
        let v = self.value(x);
        if v == 0.0 || !v.is_finite() {
            return None;
        }
        Some(self.gradient(x).into_iter().map(|g| g / v).collect())
    }

    /// Exact draw from `|u|²/∫|u|²`, if the family has one.
    fn sample(&self, _rng: &mut Stream) -> Option<Configuration> {
        None
    }

    /// `ln(|u|²/∫|u|²)`, available together with [`TrialFunction::sample`].
    fn ln_normalized_density(&self, _x: &Configuration) -> Option<f64> {
        None
    }

    /// Importance proposal with finite-variance weights for the pair term.
    fn pair_proposal(&self) -> Option<Box<dyn Proposal + '_>> {
        None
    }

    fn closed_forms(&self) -> ClosedForms {
        ClosedForms::default()
    }

    /// A configuration where `u ≠ 0`, used to start Markov chains.
    fn initial_configuration(&self) -> Configuration;

    fn params(&self) -> serde_json::Value;
}

fn check_dims(dim: usize, count: usize) -> Result<()> {
    if dim == 0 || count == 0 {
        return Err(Error::InvalidInput(format!("need dim ≥ 1 and count ≥ 1, got d={dim}, N={count}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn normal_vec(rng: &mut Stream, n: usize, sd: f64) -> Vec<f64> {
    (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Spread-out starting point: particle `i` at `i·spacing` along the first axis.
fn line_configuration(dim: usize, count: usize, spacing: f64) -> Configuration {
    let mut coords = vec![0.0; dim * count];
    let offset = 0.5 * spacing * (count as f64 - 1.0);
    for i in 0..count {
        coords[i * dim] = i as f64 * spacing - offset;
        if dim > 1 {
            coords[i * dim + 1] = 0.1 * spacing * (i as f64).sin();
        }
    }
    // small generic offsets keep the point away from the origin and from symmetry planes
    for (k, c) in coords.iter_mut().enumerate() {
        *c += 0.05 * spacing * ((k + 1) as f64).sqrt();
    }
    Configuration::from_raw(dim, coords)
}

// ---------------------------------------------------------------------------
// Gaussian product
// ---------------------------------------------------------------------------

/// `u(x) = Π_i exp(−|x_i − c_i|²/(2s²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianProduct {
    dim: usize,
    count: usize,
    scale: f64,
    centers: Vec<f64>,
}

pub fn gaussian_product(dim: usize, count: usize, scale: f64) -> Result<GaussianProduct> {
    check_dims(dim, count)?;
    check_positive("scale", scale)?;
    Ok(GaussianProduct { dim, count, scale, centers: vec![0.0; dim * count] })
}

impl GaussianProduct {
    /// Shifts particle `i` to center `c_i`; a product of Gaussians at distinct centers.
    pub fn with_centers(mut self, centers: &Configuration) -> Result<Self> {
        if centers.dim() != self.dim || centers.count() != self.count {
            return Err(Error::InvalidInput("centers must have the trial's d and N".into()));
        }
        self.centers = centers.coords().to_vec();
        Ok(self)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    fn is_centered(&self) -> bool {
        let d = self.dim;
        (1..self.count).all(|i| self.centers[i * d..(i + 1) * d] == self.centers[..d])
    }

    /// Per-coordinate standard deviation of `|u|²`.
    fn sigma(&self) -> f64 {
        self.scale / 2f64.sqrt()
    }
}

impl TrialFunction for GaussianProduct {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn count(&self) -> usize {
        self.count
    }

    fn value(&self, x: &Configuration) -> f64 {
        self.ln_abs(x).exp()
    }

    fn ln_abs(&self, x: &Configuration) -> f64 {
        -dist_sq(x.coords(), &self.centers) / (2.0 * self.scale * self.scale)
    }

    fn gradient(&self, x: &Configuration) -> Vec<f64> {
        let v = self.value(x);
        let s2 = self.scale * self.scale;
        x.coords().iter().zip(&self.centers).map(|(xi, c)| -v * (xi - c) / s2).collect()
    }

    fn score(&self, x: &Configuration) -> Option<Vec<f64>> {
        let s2 = self.scale * self.scale;
        Some(x.coords().iter().zip(&self.centers).map(|(xi, c)| -(xi - c) / s2).collect())
    }

    fn sample(&self, rng: &mut Stream) -> Option<Configuration> {
        let sd = self.sigma();
        let coords = normal_vec(rng, self.dim * self.count, sd)
            .into_iter()
            .zip(&self.centers)
            .map(|(z, c)| z + c)
            .collect();
        Some(Configuration::from_raw(self.dim, coords))
    }

    fn ln_normalized_density(&self, x: &Configuration) -> Option<f64> {
        let var = self.sigma().powi(2);
        let m = (self.dim * self.count) as f64;
        Some(-dist_sq(x.coords(), &self.centers) / (2.0 * var) - 0.5 * m * (2.0 * PI * var).ln())
    }

    fn pair_proposal(&self) -> Option<Box<dyn Proposal + '_>> {
        if self.dim < 3 || self.count < 2 {
            return None;
        }
        Some(Box::new(GaussianPairMixture::new(self)))
    }

    fn closed_forms(&self) -> ClosedForms {
        let (d, n) = (self.dim as i32, self.count as i32);
        let s2 = self.scale * self.scale;
        let mass1 = (PI * s2).powf(d as f64 / 2.0);
        let kinetic1 = d as f64 / (2.0 * s2) * mass1;
        let pair = if self.dim >= 3 && self.is_centered() {
            // ∫∫ φ(x)²φ(y)²/|x−y|² = π^d s^{2d−2}/(d−2)
            let m = PI.powi(d) * s2.powi(d - 1) / (d as f64 - 2.0);
            Some(0.5 * (n * (n - 1)) as f64 * m * mass1.powi(n - 2))
        } else if self.count == 1 {
            Some(0.0)
        } else {
            None
        };
        ClosedForms {
            mass: Some(mass1.powi(n)),
            kinetic: Some(n as f64 * kinetic1 * mass1.powi(n - 1)),
            pair: if self.count == 1 { None } else { pair },
        }
    }

    fn initial_configuration(&self) -> Configuration {
        let shift = line_configuration(self.dim, self.count, self.scale);
        let coords = shift.coords().iter().zip(&self.centers).map(|(a, c)| a + c).collect();
        Configuration::from_raw(self.dim, coords)
    }

    fn params(&self) -> serde_json::Value {
        json!({ "d": self.dim, "N": self.count, "scale": self.scale, "centers": self.centers })
    }
}

/// Importance density for Gaussian products that resolves pair coincidences.
///
/// With probability ½ draws `|u|²` exactly. Otherwise picks a pair `(i, j)`
/// uniformly, draws the other particles and the pair midpoint from `|u|²`, and
/// draws the difference `z = x_i − x_j` from `∝ exp(−|z|²/(4σ²))/|z|²`, that
/// is `|z|²/(4σ²) ~ Gamma((d−2)/2)` with a uniform direction. The `1/|z|²` factor makes
/// `|u|²·Σ 1/r²` bounded relative to the proposal, so both Rayleigh-quotient
/// integrands have finite variance. Requires `d ≥ 3`.
pub struct GaussianPairMixture<'a> {
    trial: &'a GaussianProduct,
    pairs: Vec<(usize, usize)>,
    /// Per-coordinate variance of `|u|²`.
    var: f64,
    ln_zdiff_norm: f64,
    radial: Gamma<f64>,
}

impl<'a> GaussianPairMixture<'a> {
    fn new(trial: &'a GaussianProduct) -> Self {
        let n = trial.count;
        let d = trial.dim as f64;
        let var = trial.sigma().powi(2);
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        // ∫ exp(−|z|²/(4σ²))/|z|² dz = |S^{d−1}|·½(4σ²)^{(d−2)/2}Γ((d−2)/2)
        let ln_zdiff_norm = sphere_area(trial.dim).ln()
            + 0.5f64.ln()
            + 0.5 * (d - 2.0) * (4.0 * var).ln()
            + ln_gamma(0.5 * (d - 2.0));
        let radial = Gamma::new(0.5 * (d - 2.0), 1.0).expect("shape positive for d ≥ 3");
        Self { trial, pairs, var, ln_zdiff_norm, radial }
    }

    fn pair_ln_density(&self, x: &Configuration, (i, j): (usize, usize)) -> f64 {
        let d = self.trial.dim;
        let c = &self.trial.centers;
        let gauss = |dev2: f64, var: f64, dims: usize| -dev2 / (2.0 * var) - 0.5 * dims as f64 * (2.0 * PI * var).ln();
        let mut lp = 0.0;
        for k in 0..self.trial.count {
            if k != i && k != j {
                lp += gauss(dist_sq(x.point(k), &c[k * d..(k + 1) * d]), self.var, d);
            }
        }
        let (xi, xj) = (x.point(i), x.point(j));
        let (ci, cj) = (&c[i * d..(i + 1) * d], &c[j * d..(j + 1) * d]);
        let mut mid_dev = 0.0;
        let mut z2 = 0.0;
        for a in 0..d {
            let m = 0.5 * (xi[a] + xj[a]) - 0.5 * (ci[a] + cj[a]);
            mid_dev += m * m;
            let z = xi[a] - xj[a];
            z2 += z * z;
        }
        let z_part = -z2 / (4.0 * self.var) - z2.ln() - self.ln_zdiff_norm;
        lp + gauss(mid_dev, 0.5 * self.var, d) + z_part
    }
}

impl Proposal for GaussianPairMixture<'_> {
    fn sample(&self, rng: &mut Stream) -> Configuration {
        let exact: bool = rng.random::<f64>() < 0.5;
        let mut x = self.trial.sample(rng).expect("gaussian sampler");
        if exact {
            return x;
        }
        let (i, j) = self.pairs[rng.random_range(0..self.pairs.len())];
        let d = self.trial.dim;
        let c = &self.trial.centers;
        let mid_sd = (0.5 * self.var).sqrt();
        let t = self.radial.sample(rng);
        let r = (4.0 * self.var * t).sqrt();
        let dir = normal_vec(rng, d, 1.0);
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        let z: Vec<f64> = dir.iter().map(|v| r * v / norm).collect();
        let coords = x.coords_mut();
        for a in 0..d {
            let m = 0.5 * (c[i * d + a] + c[j * d + a]) + mid_sd * rng.sample::<f64, _>(StandardNormal);
            coords[i * d + a] = m + 0.5 * z[a];
            coords[j * d + a] = m - 0.5 * z[a];
        }
        x
    }

    fn ln_density(&self, x: &Configuration) -> f64 {
        let exact = self.trial.ln_normalized_density(x).expect("gaussian density");
        let k = self.pairs.len() as f64;
        let mut terms = vec![exact + 0.5f64.ln()];
        terms.extend(self.pairs.iter().map(|&p| self.pair_ln_density(x, p) + (0.5 / k).ln()));
        log_sum_exp(&terms)
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

// ---------------------------------------------------------------------------
// One-dimensional sharpness family
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharpnessParams {
    pub delta: f64,
    pub alpha: f64,
}

impl SharpnessParams {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { delta, alpha: 0.25 + delta })
    }
}

/// `v(x) = Π_{i<j}|x_i − x_j|^{2α} e^{−|x|}` on `R^N` (`d = 1`), `α = 1/4 + δ`.
///
/// `|x|` is the Euclidean norm of the whole configuration. On a diagonal the
/// value and the gradient are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Sharpness1d {
    count: usize,
    params: SharpnessParams,
}

pub fn sharpness_1d(count: usize, params: SharpnessParams) -> Result<Sharpness1d> {
    if count < 2 {
        return Err(Error::InvalidInput(format!("sharpness family needs N ≥ 2, got {count}")));
    }
    SharpnessParams::new(params.delta)?;
    Ok(Sharpness1d { count, params: SharpnessParams::new(params.delta)? })
}

impl Sharpness1d {
    pub fn params_struct(&self) -> SharpnessParams {
        self.params
    }

    /// `Σ_i Σ_{j≠i, k≠i, j≠k} 1/((x_i − x_j)(x_i − x_k))`, identically zero off the diagonals.
    pub fn cross_term(x: &Configuration) -> f64 {
        let c = x.coords();
        let n = c.len();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != j && i != k && j != k {
                        sum += 1.0 / ((c[i] - c[j]) * (c[i] - c[k]));
                    }
                }
            }
        }
        sum
    }

    /// `Σ_i Σ_{j≠i, k≠i, j≠k} |1/((x_i − x_j)(x_i − x_k))|`, the scale for [`Self::cross_term`].
    pub fn cross_term_scale(x: &Configuration) -> f64 {
        let c = x.coords();
        let n = c.len();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != j && i != k && j != k {
                        sum += (1.0 / ((c[i] - c[j]) * (c[i] - c[k]))).abs();
                    }
                }
            }
        }
        sum
    }
}

impl TrialFunction for Sharpness1d {
    fn name(&self) -> &'static str {
        "sharpness"
    }

    fn dim(&self) -> usize {
        1
    }

    fn count(&self) -> usize {
        self.count
    }

    fn value(&self, x: &Configuration) -> f64 {
        self.ln_abs(x).exp()
    }

    fn ln_abs(&self, x: &Configuration) -> f64 {
        let c = x.coords();
        let mut s = 0.0;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                s += (c[i] - c[j]).abs().ln();
            }
        }
        2.0 * self.params.alpha * s - x.norm()
    }

    fn gradient(&self, x: &Configuration) -> Vec<f64> {
        let v = self.value(x);
        match self.score(x) {
            Some(s) => s.into_iter().map(|g| v * g).collect(),
            None => vec![0.0; self.count],
        }
    }

    fn score(&self, x: &Configuration) -> Option<Vec<f64>> {
        let c = x.coords();
        let norm = x.norm();
        if norm == 0.0 {
            return None;
        }
        let mut out = Vec::with_capacity(c.len());
        for i in 0..c.len() {
            let mut s = 0.0;
            for j in 0..c.len() {
                if j != i {
                    let r = c[i] - c[j];
                    if r == 0.0 {
                        return None;
                    }
                    s += 1.0 / r;
                }
            }
            out.push(2.0 * self.params.alpha * s - c[i] / norm);
        }
        Some(out)
    }

    fn closed_forms(&self) -> ClosedForms {
        if self.count == 2 {
            let (mass, kinetic, pair) = sharpness_pair_integrals(self.params.alpha);
            ClosedForms { mass: Some(mass), kinetic: Some(kinetic), pair: Some(pair) }
        } else {
            ClosedForms::default()
        }
    }

    fn initial_configuration(&self) -> Configuration {
        line_configuration(1, self.count, 1.0)
    }

    fn params(&self) -> serde_json::Value {
        json!({ "d": 1, "N": self.count, "delta": self.params.delta, "alpha": self.params.alpha })
    }
}

/// `∫_0^{2π} |cos φ|^p dφ` for `p > −1`.
fn cos_power_integral(p: f64) -> f64 {
    2.0 * gamma(0.5 * (p + 1.0)) * gamma(0.5) / gamma(0.5 * p + 1.0)
}

/// `(∫v², ∫|∇v|², ∫v²/r²)` for the two-particle sharpness function.
///
/// In polar coordinates on `R²` with `x₁ − x₂ = √2 ρ cos φ`, `v² = 2^{2α}ρ^{4α}|cos φ|^{4α}e^{−2ρ}`,
/// so every integral factors into a Gamma function and [`cos_power_integral`].
/// `|∇v|² = v²(8α²/r² − 4α/|x| + 1)`.
pub fn sharpness_pair_integrals(alpha: f64) -> (f64, f64, f64) {
    let a = 4.0 * alpha;
    let angular = 2f64.powf(0.5 * a);
    let mass = gamma(a + 2.0) / 2f64.powf(a + 2.0) * angular * cos_power_integral(a);
    let pair = gamma(a) / 2f64.powf(a) * angular / 2.0 * cos_power_integral(a - 2.0);
    let inv_norm = gamma(a + 1.0) / 2f64.powf(a + 1.0) * angular * cos_power_integral(a);
    let kinetic = 8.0 * alpha * alpha * pair - 4.0 * alpha * inv_norm + mass;
    (mass, kinetic, pair)
}

// ---------------------------------------------------------------------------
// Slater determinant of shifted Gaussians
// ---------------------------------------------------------------------------

/// `u(x) = det[φ_k(x_i)]` with `φ_k(y) = exp(−|y − c_k|²/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaterGaussian {
    dim: usize,
    count: usize,
    centers: Configuration,
}

pub fn slater_gaussian(dim: usize, count: usize, centers: &Configuration) -> Result<SlaterGaussian> {
    check_dims(dim, count)?;
    if centers.dim() != dim || centers.count() != count {
        return Err(Error::InvalidInput("centers must have the trial's d and N".into()));
    }
    for i in 0..count {
        for j in i + 1..count {
            if centers.point(i) == centers.point(j) {
                return Err(Error::DegenerateOrbitals(i, j));
            }
        }
    }
    Ok(SlaterGaussian { dim, count, centers: centers.clone() })
}

/// Centers `±e₁`, `±2e₁`, … spread symmetrically along the first axis.
pub fn default_slater_centers(dim: usize, count: usize) -> Configuration {
    line_configuration(dim, count, 2.0)
}

/// Determinant by partial-pivot elimination in a fixed row order.
pub fn determinant(mut a: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    det
}

fn minor(a: &[f64], n: usize, skip_row: usize, skip_col: usize) -> Vec<f64> {
    let mut m = Vec::with_capacity((n - 1) * (n - 1));
    for r in (0..n).filter(|&r| r != skip_row) {
        for c in (0..n).filter(|&c| c != skip_col) {
            m.push(a[r * n + c]);
        }
    }
    m
}

impl SlaterGaussian {
    fn orbital(&self, y: &[f64], k: usize) -> f64 {
        (-0.5 * dist_sq(y, self.centers.point(k))).exp()
    }

    fn matrix(&self, x: &Configuration) -> Vec<f64> {
        let n = self.count;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                a[i * n + k] = self.orbital(x.point(i), k);
            }
        }
        a
    }

    pub fn centers(&self) -> &Configuration {
        &self.centers
    }
}

impl TrialFunction for SlaterGaussian {
    fn name(&self) -> &'static str {
        "slater"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn count(&self) -> usize {
        self.count
    }

    fn value(&self, x: &Configuration) -> f64 {
        determinant(self.matrix(x), self.count)
    }

    fn gradient(&self, x: &Configuration) -> Vec<f64> {
        let (n, d) = (self.count, self.dim);
        let a = self.matrix(x);
        let mut grad = vec![0.0; n * d];
        for i in 0..n {
            for k in 0..n {
                let sign = if (i + k) % 2 == 0 { 1.0 } else { -1.0 };
                let cof = if n == 1 { 1.0 } else { sign * determinant(minor(&a, n, i, k), n - 1) };
                let phi = a[i * n + k];
                let (xi, ck) = (x.point(i), self.centers.point(k));
                for c in 0..d {
                    grad[i * d + c] += cof * phi * (ck[c] - xi[c]);
                }
            }
        }
        grad
    }

    fn initial_configuration(&self) -> Configuration {
        // slightly off the centers so the determinant is dominated by its diagonal
        let mut x = self.centers.clone();
        for (k, c) in x.coords_mut().iter_mut().enumerate() {
            *c += 0.05 * ((k + 1) as f64).sin();
        }
        x
    }

    fn params(&self) -> serde_json::Value {
        json!({ "d": self.dim, "N": self.count, "centers": self.centers.coords() })
    }
}

// ---------------------------------------------------------------------------
// Odd one-particle Gaussian
// ---------------------------------------------------------------------------

/// `u(x) = x₁ e^{−|x|²/2}` on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddGaussian {
    dim: usize,
}

pub fn odd_gaussian(dim: usize) -> Result<OddGaussian> {
    if dim < 2 {
        return Err(Error::Domain(format!("odd_gaussian needs d ≥ 2, got {dim}")));
    }
    Ok(OddGaussian { dim })
}

impl OddGaussian {
    /// Radial factor `g(r) = e^{−r²/2}` and its derivative, so `u = x₁ g(|x|)`.
    pub fn radial(&self, r: f64) -> (f64, f64) {
        let g = (-0.5 * r * r).exp();
        (g, -r * g)
    }
}

impl TrialFunction for OddGaussian {
    fn name(&self) -> &'static str {
        "odd"
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn count(&self) -> usize {
        1
    }

    fn value(&self, x: &Configuration) -> f64 {
        let r2 = x.norm().powi(2);
        x.coords()[0] * (-0.5 * r2).exp()
    }

    fn gradient(&self, x: &Configuration) -> Vec<f64> {
        let c = x.coords();
        let g = (-0.5 * x.norm().powi(2)).exp();
        c.iter()
            .enumerate()
            .map(|(k, xk)| g * (if k == 0 { 1.0 } else { 0.0 } - c[0] * xk))
            .collect()
    }

    fn sample(&self, rng: &mut Stream) -> Option<Configuration> {
        // |u|² = x₁² e^{−x₁²} Π e^{−x_k²}: x₁² ~ Gamma(3/2, 1), the rest N(0, 1/2)
        let t: f64 = Gamma::new(1.5, 1.0).expect("valid gamma").sample(rng);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let mut coords = normal_vec(rng, self.dim, 0.5f64.sqrt());
        coords[0] = sign * t.sqrt();
        Some(Configuration::from_raw(self.dim, coords))
    }

    fn ln_normalized_density(&self, x: &Configuration) -> Option<f64> {
        let mass = self.closed_forms().mass?;
        Some(2.0 * self.ln_abs(x) - mass.ln())
    }

    fn closed_forms(&self) -> ClosedForms {
        let d = self.dim as f64;
        let p = PI.powf(0.5 * d);
        ClosedForms { mass: Some(0.5 * p), kinetic: Some(p * (d + 2.0) / 4.0), pair: Some(p / d) }
    }

    fn initial_configuration(&self) -> Configuration {
        let mut c = vec![0.0; self.dim];
        c[0] = 1.0;
        Configuration::from_raw(self.dim, c)
    }

    fn params(&self) -> serde_json::Value {
        json!({ "d": self.dim, "N": 1 })
    }
}

// ---------------------------------------------------------------------------
// Aharonov–Bohm single modes
// ---------------------------------------------------------------------------

/// Radial profiles `f(r)` for planar modes `f(r)e^{imθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    /// `r^β e^{−γr}`.
    PowerExp { beta: f64, gamma: f64 },
    /// `h(ln r)` with `h = 1` on `[0, ln R]` and `sin²` ramps of width `w` on both sides.
    LogPlateau { radius: f64, width: f64 },
}

impl RadialProfile {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RadialProfile::PowerExp { beta, gamma } => {
                if !(beta > 0.0 && gamma > 0.0 && beta.is_finite() && gamma.is_finite()) {
                    return Err(Error::NonIntegrableProfile(format!(
                        "r^β e^(−γr) needs β > 0 and γ > 0, got β={beta}, γ={gamma}"
                    )));
                }
            }
            RadialProfile::LogPlateau { radius, width } => {
                if !(radius >= 1.0 && width > 0.0 && radius.is_finite() && width.is_finite()) {
                    return Err(Error::NonIntegrableProfile(format!(
                        "log-plateau needs R ≥ 1 and w > 0, got R={radius}, w={width}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(f(r), f'(r))`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        match *self {
            RadialProfile::PowerExp { beta, gamma } => {
                if r <= 0.0 {
                    return (0.0, 0.0);
                }
                let f = r.powf(beta) * (-gamma * r).exp();
                (f, f * (beta / r - gamma))
            }
            RadialProfile::LogPlateau { .. } => {
                if r <= 0.0 {
                    return (0.0, 0.0);
                }
                let (h, dh) = self.log_profile(r.ln());
                (h, dh / r)
            }
        }
    }

    /// `(h(t), h'(t))` in the logarithmic variable; only for [`RadialProfile::LogPlateau`].
    pub fn log_profile(&self, t: f64) -> (f64, f64) {
        let RadialProfile::LogPlateau { radius, width } = *self else {
            let r = t.exp();
            let (f, df) = self.eval(r);
            return (f, df * r);
        };
        let l = radius.ln();
        let k = PI / (2.0 * width);
        if t <= -width || t >= l + width {
            (0.0, 0.0)
        } else if t < 0.0 {
            let s = k * (t + width);
            (s.sin().powi(2), k * (2.0 * s).sin())
        } else if t <= l {
            (1.0, 0.0)
        } else {
            let s = k * (l + width - t);
            (s.sin().powi(2), -k * (2.0 * s).sin())
        }
    }

    /// `(∫|f'|² r dr, ∫|f|²/r dr)` in closed form.
    pub fn radial_integrals(&self) -> (f64, f64) {
        match *self {
            RadialProfile::PowerExp { beta, gamma: g } => {
                let mass = (ln_gamma(2.0 * beta) - 2.0 * beta * (2.0 * g).ln()).exp();
                (0.5 * beta * mass, mass)
            }
            RadialProfile::LogPlateau { radius, width } => {
                (PI * PI / (4.0 * width), radius.ln() + 0.75 * width)
            }
        }
    }
}

/// `u(r, θ) = f(r) e^{imθ}` on `R²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbMode {
    pub m: i64,
    pub profile: RadialProfile,
}

pub fn ab_mode(m: i64, profile: RadialProfile) -> Result<AbMode> {
    profile.validate()?;
    Ok(AbMode { m, profile })
}

impl AbMode {
    pub fn value(&self, x: f64, y: f64) -> Complex64 {
        let r = x.hypot(y);
        let (f, _) = self.profile.eval(r);
        Complex64::from_polar(f, self.m as f64 * y.atan2(x))
    }
}

// ---------------------------------------------------------------------------
// Checks shared by tests and verification suites
// ---------------------------------------------------------------------------

/// Largest relative deviation between [`TrialFunction::gradient`] and central
/// differences with step `h`, scaled by the gradient norm.
pub fn fd_gradient_error(u: &dyn TrialFunction, x: &Configuration, h: f64) -> f64 {
    let g = u.gradient(x);
    let mut y = x.clone();
    let mut worst: f64 = 0.0;
    let scale = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(u.value(x).abs()).max(f64::MIN_POSITIVE);
    for k in 0..g.len() {
        let orig = y.coords()[k];
        y.coords_mut()[k] = orig + h;
        let plus = u.value(&y);
        y.coords_mut()[k] = orig - h;
        let minus = u.value(&y);
        y.coords_mut()[k] = orig;
        let fd = (plus - minus) / (2.0 * h);
        worst = worst.max((fd - g[k]).abs() / scale);
    }
    worst
}

/// Swaps particles `i` and `j`.
pub fn transpose(x: &Configuration, i: usize, j: usize) -> Configuration {
    let d = x.dim();
    let mut y = x.clone();
    for c in 0..d {
        y.coords_mut().swap(i * d + c, j * d + c);
    }
    y
}

/// Checks `u(τx) = −u(x)` for every adjacent transposition at `points` random configurations.
pub fn check_antisymmetric(u: &dyn TrialFunction, rng: &mut Stream, points: usize) -> Result<()> {
    let (d, n) = (u.dim(), u.count());
    if n < 2 {
        return Err(Error::NotAntisymmetric("a single particle has no exchange symmetry".into()));
    }
    for _ in 0..points {
        let x = Configuration::from_raw(d, normal_vec(rng, d * n, 1.0));
        let v = u.value(&x);
        for i in 0..n - 1 {
            let w = u.value(&transpose(&x, i, i + 1));
            if (v + w).abs() > 1e-12 * v.abs().max(w.abs()).max(f64::MIN_POSITIVE) {
                return Err(Error::NotAntisymmetric(format!(
                    "u = {v:e} but u after swapping {i} and {} = {w:e}",
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

/// Checks `u(−x) = −u(x)` at `points` random configurations.
pub fn check_odd(u: &dyn TrialFunction, rng: &mut Stream, points: usize) -> Result<()> {
    let m = u.dim() * u.count();
    for _ in 0..points {
        let c = normal_vec(rng, m, 1.0);
        let x = Configuration::from_raw(u.dim(), c.clone());
        let neg = Configuration::from_raw(u.dim(), c.iter().map(|v| -v).collect());
        let (a, b) = (u.value(&x), u.value(&neg));
        if (a + b).abs() > 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            return Err(Error::NotOdd(format!("u(x) = {a:e}, u(−x) = {b:e}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::stream;
    use approx::assert_relative_eq;

    fn random_config(rng: &mut Stream, d: usize, n: usize) -> Configuration {
        Configuration::from_raw(d, normal_vec(rng, d * n, 1.0))
    }

    #[test]
    fn gaussian_closed_forms() {
        let g = gaussian_product(3, 1, 1.0).unwrap();
        let cf = g.closed_forms();
        assert_relative_eq!(cf.kinetic.unwrap() / cf.mass.unwrap(), 1.5, max_relative = 1e-15);
        let g3 = gaussian_product(3, 3, 1.0).unwrap();
        assert_relative_eq!(g3.closed_forms().quotient().unwrap(), 1.5, max_relative = 1e-14);
        let g2 = gaussian_product(3, 2, 1.0).unwrap();
        assert_relative_eq!(g2.closed_forms().quotient().unwrap(), 3.0, max_relative = 1e-14);
        for s in [0.3, 1.0, 4.0] {
            let q = gaussian_product(4, 3, s).unwrap().closed_forms().quotient().unwrap();
            assert_relative_eq!(q, 4.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = stream(7, 0);
        let centers = default_slater_centers(2, 3);
        let families: Vec<Box<dyn TrialFunction>> = vec![
            Box::new(gaussian_product(3, 3, 1.3).unwrap()),
            Box::new(sharpness_1d(3, SharpnessParams::new(0.1).unwrap()).unwrap()),
            Box::new(slater_gaussian(2, 3, &centers).unwrap()),
            Box::new(odd_gaussian(3).unwrap()),
        ];
        for u in &families {
            for _ in 0..100 {
                let x = random_config(&mut rng, u.dim(), u.count());
                let err = fd_gradient_error(u.as_ref(), &x, 1e-5);
                assert!(err < 1e-6, "{} {err}", u.name());
            }
        }
    }

    #[test]
    fn fd_error_decays_quadratically() {
        let mut rng = stream(8, 0);
        let u = slater_gaussian(2, 2, &default_slater_centers(2, 2)).unwrap();
        let x = random_config(&mut rng, 2, 2);
        let coarse = fd_gradient_error(&u, &x, 1e-2);
        let fine = fd_gradient_error(&u, &x, 5e-3);
        assert!((coarse / fine - 4.0).abs() < 0.5, "{coarse} {fine}");
    }

    #[test]
    fn sharpness_values() {
        let v = sharpness_1d(2, SharpnessParams::new(0.2).unwrap()).unwrap();
        let x = Configuration::new(1, vec![0.0, 1.0]).unwrap();
        assert_relative_eq!(v.value(&x), (-1f64).exp(), max_relative = 1e-15);
        let diag = Configuration::new(1, vec![0.5, 0.5]).unwrap();
        assert_eq!(v.value(&diag), 0.0);
        assert_eq!(v.gradient(&diag), vec![0.0, 0.0]);
    }

    #[test]
    fn sharpness_cross_term_cancels() {
        let mut rng = stream(9, 0);
        for n in 3..7 {
            for _ in 0..100 {
                let x = random_config(&mut rng, 1, n);
                let scale = Sharpness1d::cross_term_scale(&x);
                assert!(Sharpness1d::cross_term(&x).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn sharpness_pair_quotient_is_half_plus_four_delta() {
        for delta in [0.2, 0.1, 0.05, 0.01] {
            let (_, t, x) = sharpness_pair_integrals(0.25 + delta);
            assert_relative_eq!(t / x, 0.5 + 4.0 * delta, max_relative = 1e-12);
        }
    }

    #[test]
    fn slater_antisymmetry_and_pauli() {
        let u = slater_gaussian(2, 2, &Configuration::new(2, vec![1.0, 0.0, -1.0, 0.0]).unwrap()).unwrap();
        let x = Configuration::new(2, vec![0.3, -0.2, 1.1, 0.4]).unwrap();
        assert_eq!(u.value(&transpose(&x, 0, 1)), -u.value(&x));
        let same = Configuration::new(2, vec![0.3, -0.2, 0.3, -0.2]).unwrap();
        assert_eq!(u.value(&same), 0.0);
        let mut rng = stream(10, 0);
        check_antisymmetric(&u, &mut rng, 20).unwrap();
        let u4 = slater_gaussian(3, 4, &default_slater_centers(3, 4)).unwrap();
        check_antisymmetric(&u4, &mut rng, 20).unwrap();
        let sym = gaussian_product(2, 2, 1.0).unwrap();
        assert!(matches!(check_antisymmetric(&sym, &mut rng, 20), Err(Error::NotAntisymmetric(_))));
    }

    #[test]
    fn slater_rejects_repeated_centers() {
        let c = Configuration::new(1, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(slater_gaussian(1, 3, &c).unwrap_err(), Error::DegenerateOrbitals(0, 2));
    }

    #[test]
    fn determinant_small_cases() {
        assert_eq!(determinant(vec![2.0, 1.0, 1.0, 3.0], 2), 5.0);
        assert_eq!(determinant(vec![0.0, 1.0, 1.0, 0.0], 2), -1.0);
        assert_eq!(determinant(vec![1.0, 2.0, 2.0, 4.0], 2), 0.0);
    }

    #[test]
    fn odd_gaussian_is_odd_with_exact_moments() {
        let u = odd_gaussian(3).unwrap();
        let mut rng = stream(11, 0);
        check_odd(&u, &mut rng, 50).unwrap();
        assert_relative_eq!(u.closed_forms().quotient().unwrap(), 3.75, max_relative = 1e-15);
        // sampler second moments: E[x₁²] = 3/2, E[x₂²] = 1/2
        let n = 200_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let x = u.sample(&mut rng).unwrap();
            m1 += x.coords()[0].powi(2);
            m2 += x.coords()[1].powi(2);
        }
        assert!((m1 / n as f64 - 1.5).abs() < 0.02);
        assert!((m2 / n as f64 - 0.5).abs() < 0.01);
        assert!(odd_gaussian(1).is_err());
    }

    #[test]
    fn gaussian_sampler_moments() {
        let g = gaussian_product(2, 2, 2.0).unwrap();
        let mut rng = stream(12, 0);
        let n = 100_000;
        let mut m = 0.0;
        for _ in 0..n {
            m += g.sample(&mut rng).unwrap().coords()[3].powi(2);
        }
        // |u|² has variance s²/2 per coordinate
        assert!((m / n as f64 - 2.0).abs() < 0.05);
    }

    #[test]
    fn pair_mixture_density_is_normalized() {
        // E_h[p/h] = 1 for the exact density p of |u|²
        let g = gaussian_product(3, 3, 1.0).unwrap();
        let h = g.pair_proposal().unwrap();
        let mut rng = stream(13, 0);
        let n = 100_000;
        let mut s = 0.0;
        for _ in 0..n {
            let x = h.sample(&mut rng);
            s += (g.ln_normalized_density(&x).unwrap() - h.ln_density(&x)).exp();
        }
        assert!((s / n as f64 - 1.0).abs() < 0.01, "{}", s / n as f64);
    }

    #[test]
    fn ab_profiles() {
        let p = RadialProfile::PowerExp { beta: 1.5, gamma: 0.7 };
        let (k, m) = p.radial_integrals();
        assert_relative_eq!(k / m, 0.75, max_relative = 1e-14);
        assert!(ab_mode(1, RadialProfile::PowerExp { beta: 0.0, gamma: 1.0 }).is_err());
        assert!(ab_mode(1, RadialProfile::LogPlateau { radius: 10.0, width: 0.0 }).is_err());
        let u = ab_mode(2, RadialProfile::PowerExp { beta: 1.0, gamma: 1.0 }).unwrap();
        let z = u.value(0.0, 1.0);
        assert_relative_eq!(z.re, -(-1f64).exp(), epsilon = 1e-15);
        let plateau = RadialProfile::LogPlateau { radius: 100.0, width: 1.0 };
        assert_eq!(plateau.eval(10.0).0, 1.0);
        assert_eq!(plateau.eval(1e-3).0, 0.0);
    }
}
