//! Quadratic-form quantities `T = ∫|∇u|²`, `X = Σ_{i<j}∫|u|²/r_ij²`,
//! `Z = Σ_{i<j<k}∫|u|²/R_ijk²` and the inequality checks built from them.
//!
//! Monte Carlo quantities are reported per unit mass, i.e. divided by
//! `∫|u|²`, so they do not depend on the normalization of `u`. All quantities
//! of one call are estimated on shared draws.
//!
//! Sampling strategy, chosen per trial function:
//!
//! * a pair-resolving importance proposal when the family provides one
//!   (weights `|u|²/h`);
//! * otherwise a Metropolis chain on `q = |∇u|² + |u|²W`, `W = Σ 1/r_ij²`,
//!   with weights `|u|²/q`. Both `|∇u|²/q` and `|u|²W/q` are bounded by one,
//!   so the kinetic and pair integrands have finite variance even where `u`
//!   has nodes or the pair weight is singular.

use serde::{Deserialize, Serialize};

use crate::bounds::{fermi_bound, hardy_lower_bound, sphere_area};
use crate::estimate::{
    mc_moments, radial_quadrature, stream, IidSampler, Integrand, Interval, MCEstimate, McParams,
    MetropolisConfig, MetropolisSampler, Moments, RuleFamily, Sampler,
};
use crate::fields::{
    field_center, field_center_div, field_f3, field_f3_div, field_g, field_g_div, field_pair, field_pair_div,
    field_radial, field_radial_div,
};
use crate::geometry::{pair_density, triple_density, Configuration};
use crate::trials::{check_antisymmetric, check_odd, AbMode, GaussianProduct, OddGaussian, RadialProfile, TrialFunction};
use crate::{Error, Result};

/// Pass threshold for bound checks, in standard errors.
pub const SIGMA_THRESHOLD: f64 = 3.0;

/// Stream id reserved for the random points of symmetry pre-checks.
const PRECHECK_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    Exact { value: f64 },
    MonteCarlo(MCEstimate),
}

impl Quantity {
    pub fn value(&self) -> f64 {
        match self {
            Quantity::Exact { value } => *value,
            Quantity::MonteCarlo(e) => e.mean,
        }
    }

    pub fn stderr(&self) -> f64 {
        match self {
            Quantity::Exact { .. } => 0.0,
            Quantity::MonteCarlo(e) => e.stderr,
        }
    }

    pub fn estimate(&self) -> Option<&MCEstimate> {
        match self {
            Quantity::Exact { .. } => None,
            Quantity::MonteCarlo(e) => Some(e),
        }
    }
}

/// A one-sided check `value ≥ bound`, with the margin in raw units and in standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub bound: f64,
    pub value: f64,
    pub margin: f64,
    /// `margin / stderr`; absent for exact comparisons.
    pub margin_sigma: Option<f64>,
    pub pass: bool,
}

impl BoundCheck {
    /// Checks `value ≥ bound` where `stderr` is the error of `value − bound`.
    pub fn new(name: impl Into<String>, value: f64, bound: f64, stderr: f64) -> Self {
        let margin = value - bound;
        let margin_sigma = (stderr > 0.0).then(|| margin / stderr);
        let pass = match margin_sigma {
            Some(m) => m >= -SIGMA_THRESHOLD,
            None => margin >= -1e-12 * bound.abs().max(value.abs()),
        };
        Self { name: name.into(), bound, value, margin, margin_sigma, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientResult {
    pub t: Quantity,
    pub x: Quantity,
    pub z: Option<Quantity>,
    pub quotient: Quantity,
    pub bound_checked: Option<BoundCheck>,
    /// Sampling path: `exact`, `importance`, `metropolis` or `closed_form`.
    pub method: String,
}

// ---------------------------------------------------------------------------
// Shared weighted sampling
// ---------------------------------------------------------------------------

/// Per-draw quantities handed to integrands.
pub struct Draw<'a> {
    pub x: &'a Configuration,
    /// `∇u/u`.
    pub score: &'a [f64],
    /// Ratio of the normalized `|u|²` to the sampling density, up to a constant.
    pub weight: f64,
}

type DrawFn<'a> = &'a (dyn Fn(&Draw<'_>) -> f64 + Sync);

enum Path<'a> {
    Importance(Box<dyn crate::trials::Proposal + 'a>),
    Metropolis,
}

fn choose_path(u: &dyn TrialFunction) -> Path<'_> {
    match u.pair_proposal() {
        Some(p) => Path::Importance(p),
        None => Path::Metropolis,
    }
}

fn path_name(path: &Path<'_>) -> &'static str {
    match path {
        Path::Importance(_) => "importance",
        Path::Metropolis => "metropolis",
    }
}

fn metropolis_target(u: &dyn TrialFunction, x: &Configuration) -> f64 {
    let Some(s) = u.score(x) else { return f64::NEG_INFINITY };
    let w = if u.count() >= 2 { pair_density(x).unwrap_or(f64::INFINITY) } else { 0.0 };
    let s2: f64 = s.iter().map(|v| v * v).sum();
    2.0 * u.ln_abs(x) + (s2 + w).ln()
}

/// Means of `weight·f_k` for each integrand, followed by the mean of `weight`.
fn weighted_moments(u: &dyn TrialFunction, fns: &[DrawFn<'_>], params: McParams) -> Result<(Moments, &'static str)> {
    let path = choose_path(u);
    let name = path_name(&path);
    let weight_of = |x: &Configuration, s: &[f64]| -> f64 {
        match &path {
            Path::Importance(h) => {
                (u.ln_normalized_density(x).expect("importance families are normalized") - h.ln_density(x)).exp()
            }
            Path::Metropolis => {
                let w = if u.count() >= 2 { pair_density(x).unwrap_or(f64::INFINITY) } else { 0.0 };
                1.0 / (s.iter().map(|v| v * v).sum::<f64>() + w)
            }
        }
    };
    let mut integrands: Vec<Box<dyn Fn(&Configuration) -> f64 + Sync + '_>> = Vec::new();
    for f in fns {
        let f = *f;
        let weight_of = &weight_of;
        integrands.push(Box::new(move |x: &Configuration| {
            let Some(score) = u.score(x) else { return f64::NAN };
            let weight = weight_of(x, &score);
            weight * f(&Draw { x, score: &score, weight })
        }));
    }
    integrands.push(Box::new(|x: &Configuration| match u.score(x) {
        Some(s) => weight_of(x, &s),
        None => f64::NAN,
    }));
    let refs: Vec<Integrand<'_>> = integrands.iter().map(|b| b.as_ref() as Integrand<'_>).collect();
    let moments = match &path {
        Path::Importance(h) => {
            let sampler = IidSampler(|rng: &mut crate::estimate::Stream| h.sample(rng));
            mc_moments(&refs, &sampler, params)?
        }
        Path::Metropolis => {
            let sampler = MetropolisSampler::new(
                |x: &Configuration| metropolis_target(u, x),
                u.initial_configuration(),
                MetropolisConfig::default(),
            )?;
            mc_moments(&refs, &sampler as &dyn Sampler, params)?
        }
    };
    Ok((moments, name))
}

/// `means[k]/means[last]` with delta-method error.
fn per_mass(m: &Moments, k: usize) -> Result<MCEstimate> {
    m.ratio(k, m.len() - 1)
}

fn kinetic(d: &Draw<'_>) -> f64 {
    d.score.iter().map(|v| v * v).sum()
}

fn pair_term(d: &Draw<'_>) -> f64 {
    pair_density(d.x).unwrap_or(f64::NAN)
}

fn triple_term(d: &Draw<'_>) -> f64 {
    triple_density(d.x).unwrap_or(f64::NAN)
}

fn require_pairs(u: &dyn TrialFunction) -> Result<()> {
    if u.count() < 2 {
        return Err(Error::InvalidInput("the pair term needs at least two particles".into()));
    }
    Ok(())
}

/// `T`, `X`, `Z` per unit mass and the quotient `T/X`, jointly on shared draws.
fn forms(u: &dyn TrialFunction, params: McParams) -> Result<(QuotientResult, Moments)> {
    require_pairs(u)?;
    let with_z = u.count() >= 3;
    let mut fns: Vec<DrawFn<'_>> = vec![&kinetic, &pair_term];
    if with_z {
        fns.push(&triple_term);
    }
    let (m, method) = weighted_moments(u, &fns, params)?;
    let t = per_mass(&m, 0)?;
    let x = per_mass(&m, 1)?;
    let z = if with_z { Some(Quantity::MonteCarlo(per_mass(&m, 2)?)) } else { None };
    let quotient = m.ratio(0, 1)?;
    Ok((
        QuotientResult {
            t: Quantity::MonteCarlo(t),
            x: Quantity::MonteCarlo(x),
            z,
            quotient: Quantity::MonteCarlo(quotient),
            bound_checked: None,
            method: method.into(),
        },
        m,
    ))
}

/// Monte Carlo Rayleigh quotient `T/X`, checked against the many-particle
/// Hardy lower bound when `d ≥ 3`.
pub fn hardy_quotient(u: &dyn TrialFunction, params: McParams) -> Result<QuotientResult> {
    let (mut r, _) = forms(u, params)?;
    if u.dim() >= 3 {
        let lb = hardy_lower_bound(u.dim(), u.count())?.value;
        r.bound_checked = Some(BoundCheck::new("hardy_lower", r.quotient.value(), lb, r.quotient.stderr()));
    }
    Ok(r)
}

/// The quotient from the family's closed forms, when it has them.
pub fn hardy_quotient_exact(u: &dyn TrialFunction) -> Option<QuotientResult> {
    let cf = u.closed_forms();
    let (mass, t, x) = (cf.mass?, cf.kinetic?, cf.pair?);
    let q = t / x;
    let bound_checked = if u.dim() >= 3 && u.count() >= 2 {
        hardy_lower_bound(u.dim(), u.count()).ok().map(|lb| BoundCheck::new("hardy_lower", q, lb.value, 0.0))
    } else {
        None
    };
    Some(QuotientResult {
        t: Quantity::Exact { value: t / mass },
        x: Quantity::Exact { value: x / mass },
        z: None,
        quotient: Quantity::Exact { value: q },
        bound_checked,
        method: "closed_form".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", rename_all = "snake_case")]
pub enum FieldSelector {
    /// `F₃ = Σ_{k≠j}(x_j−x_k)/r_jk²`.
    F3,
    /// Three-particle `G`.
    G,
    /// `x/(|x|²+ε²)` on `R^{dN}`.
    Radial { eps: f64 },
    /// Single pair field for particles `(j, k)`.
    Pair { j: usize, k: usize },
    /// Center-of-mass field.
    Center,
}

impl FieldSelector {
    fn div_and_norm(&self, x: &Configuration) -> Result<(f64, f64)> {
        Ok(match *self {
            FieldSelector::F3 => (field_f3_div(x, 0.0)?, field_f3(x, 0.0)?.norm_sq()),
            FieldSelector::G => (field_g_div(x, 0.0)?, field_g(x, 0.0)?.norm_sq()),
            FieldSelector::Radial { eps } => (field_radial_div(x, eps)?, field_radial(x, eps)?.norm_sq()),
            FieldSelector::Pair { j, k } => (field_pair_div(x, j, k)?, field_pair(x, j, k, 0.0)?.norm_sq()),
            FieldSelector::Center => (field_center_div(x)?, field_center(x, 0.0)?.norm_sq()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivLemmaResult {
    /// `(∫|u|² div F)² / (4∫|u|²|F|²)` per unit mass.
    pub rhs: MCEstimate,
    /// `∫|∇u|²` per unit mass.
    pub t: MCEstimate,
    /// `T ≥ rhs`, with the joint error of `T − rhs`.
    pub check: BoundCheck,
}

/// Both sides of the divergence-lemma inequality `T ≥ (∫|u|² div F)²/(4∫|u|²|F|²)`.
pub fn div_lemma_bound(u: &dyn TrialFunction, field: FieldSelector, params: McParams) -> Result<DivLemmaResult> {
    let div = |d: &Draw<'_>| field.div_and_norm(d.x).map(|v| v.0).unwrap_or(f64::NAN);
    let norm = |d: &Draw<'_>| field.div_and_norm(d.x).map(|v| v.1).unwrap_or(f64::NAN);
    let (m, _) = weighted_moments(u, &[&kinetic, &div, &norm], params)?;
    let (mt, md, mf, mw) = (m.means[0], m.means[1], m.means[2], m.means[3]);
    let rhs = md * md / (4.0 * mf * mw);
    let grad_rhs = [0.0, 2.0 * md / (4.0 * mf * mw), -rhs / mf, -rhs / mw];
    let t = mt / mw;
    let grad_t = [1.0 / mw, 0.0, 0.0, -t / mw];
    let grad_diff: Vec<f64> = grad_t.iter().zip(&grad_rhs).map(|(a, b)| a - b).collect();
    Ok(DivLemmaResult {
        rhs: m.function(rhs, &grad_rhs),
        t: m.function(t, &grad_t),
        check: BoundCheck::new("div_lemma", t, rhs, m.delta_stderr(&grad_diff)),
    })
}

/// Jointly estimates `T`, `X`, `Z` and checks `T ≥ (d−2)² X²/(2X+Z)` for `d ≥ 3`.
pub fn divmain_check(u: &dyn TrialFunction, params: McParams) -> Result<QuotientResult> {
    require_pairs(u)?;
    let mut fns: Vec<DrawFn<'_>> = vec![&kinetic, &pair_term, &triple_term];
    if u.count() < 3 {
        fns.truncate(2);
    }
    let (m, method) = weighted_moments(u, &fns, params)?;
    let w = m.len() - 1;
    let (mt, mx, mw) = (m.means[0], m.means[1], m.means[w]);
    let mz = if u.count() >= 3 { m.means[2] } else { 0.0 };
    let t = per_mass(&m, 0)?;
    let x = per_mass(&m, 1)?;
    let z = if u.count() >= 3 { per_mass(&m, 2)? } else { MCEstimate { mean: 0.0, stderr: 0.0, ..x } };
    let quotient = m.ratio(0, 1)?;
    let bound_checked = if u.dim() >= 3 {
        let c = (u.dim() as f64 - 2.0).powi(2);
        // rhs = c·mx²/((2mx + mz)·mw), all divided by the mass mean mw
        let den = 2.0 * mx + mz;
        let rhs = c * mx * mx / (den * mw);
        let value = mt / mw;
        let mut grad = vec![0.0; m.len()];
        grad[0] = 1.0 / mw;
        grad[1] = -(c * (2.0 * mx * den - 2.0 * mx * mx) / (den * den * mw));
        if u.count() >= 3 {
            grad[2] = c * mx * mx / (den * den * mw);
        }
        grad[w] = -value / mw + rhs / mw;
        Some(BoundCheck::new("divmain", value, rhs, m.delta_stderr(&grad)))
    } else {
        None
    };
    Ok(QuotientResult {
        t: Quantity::MonteCarlo(t),
        x: Quantity::MonteCarlo(x),
        z: Some(Quantity::MonteCarlo(z)),
        quotient: Quantity::MonteCarlo(quotient),
        bound_checked,
        method: method.into(),
    })
}

/// Rayleigh quotient of an antisymmetric trial, checked against `d²/N`.
pub fn fermi_quotient(u: &dyn TrialFunction, params: McParams) -> Result<QuotientResult> {
    check_antisymmetric(u, &mut stream(params.seed, PRECHECK_STREAM), 20)?;
    let (mut r, _) = forms(u, params)?;
    let b = fermi_bound(u.dim(), u.count())?;
    r.bound_checked = Some(BoundCheck::new("fermi", r.quotient.value(), b, r.quotient.stderr()));
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddQuotient {
    pub kinetic: f64,
    /// `∫|u|²/|x|²`.
    pub weighted_mass: f64,
    pub quotient: f64,
    pub last_delta: f64,
    pub check: f64,
}

/// `∫|∇u|² / ∫|u|²/|x|²` for `u = x₁ g(|x|)` by radial quadrature.
///
/// With the angular average of `x₁²` equal to `r²/d`:
/// `∫|∇u|² = |S^{d−1}|∫ r^{d−1}(g² + (2r/d)gg' + (r²/d)g'²) dr` and
/// `∫|u|²/|x|² = |S^{d−1}|∫ r^{d−1} g²/d dr`.
pub fn odd_quotient(u: &OddGaussian, seed: u64) -> Result<OddQuotient> {
    check_odd(u, &mut stream(seed, PRECHECK_STREAM), 20)?;
    let d = u.dim() as f64;
    let area = sphere_area(u.dim());
    let kin = radial_quadrature(
        |r| {
            let (g, dg) = u.radial(r);
            if g == 0.0 {
                return 0.0;
            }
            r.powf(d - 1.0) * (g * g + 2.0 * r / d * g * dg + r * r / d * dg * dg)
        },
        Interval::HalfLine(0.0),
        RuleFamily::DoubleExponential,
    )?;
    let mass = radial_quadrature(
        |r| {
            let (g, _) = u.radial(r);
            if g == 0.0 {
                return 0.0;
            }
            r.powf(d - 1.0) * g * g / d
        },
        Interval::HalfLine(0.0),
        RuleFamily::DoubleExponential,
    )?;
    let quotient = kin.value / mass.value;
    Ok(OddQuotient {
        kinetic: area * kin.value,
        weighted_mass: area * mass.value,
        quotient,
        last_delta: kin.last_delta.max(mass.last_delta),
        check: quotient - d * d / 4.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbQuotient {
    pub value: f64,
    /// `(α − m)²`.
    pub angular: f64,
    /// `∫|f'|² r dr / ∫|f|²/r dr`.
    pub radial: f64,
    /// `min_k (k − α)²`, the per-mode lower bound.
    pub floor: f64,
}

/// `[∫|f'|² r dr + (α−m)²∫|f|²/r dr] / ∫|f|²/r dr` by quadrature.
pub fn ab_mode_quotient(alpha: f64, mode: &AbMode) -> Result<AbQuotient> {
    if !alpha.is_finite() {
        return Err(Error::Domain(format!("flux must be finite, got {alpha}")));
    }
    mode.profile.validate()?;
    let (num, den) = match mode.profile {
        RadialProfile::PowerExp { beta, gamma } => {
            // |f|²/r = r^{2β−1}e^{−2γr} and |f'|²r = (β − γr)²·|f|²/r, kept in
            // log form so neither factor overflows at the extreme nodes
            let weight = move |r: f64| ((2.0 * beta - 1.0) * r.ln() - 2.0 * gamma * r).exp();
            let num = radial_quadrature(
                |r| (beta - gamma * r).powi(2) * weight(r),
                Interval::HalfLine(0.0),
                RuleFamily::DoubleExponential,
            )?;
            let den = radial_quadrature(
                weight,
                Interval::HalfLine(0.0),
                RuleFamily::DoubleExponential,
            )?;
            (num.value, den.value)
        }
        RadialProfile::LogPlateau { radius, width } => {
            // in t = ln r: ∫|f'|² r dr = ∫h'² dt and ∫|f|²/r dr = ∫h² dt
            let p = mode.profile;
            let l = radius.ln();
            let pieces = [(-width, 0.0), (l, l + width)];
            let mut num = 0.0;
            let mut den = l;
            for (a, b) in pieces {
                num += radial_quadrature(|t| p.log_profile(t).1.powi(2), Interval::Finite(a, b), RuleFamily::DoubleExponential)?
                    .value;
                den += radial_quadrature(|t| p.log_profile(t).0.powi(2), Interval::Finite(a, b), RuleFamily::DoubleExponential)?
                    .value;
            }
            (num, den)
        }
    };
    if !(den > 0.0 && den.is_finite() && num.is_finite()) {
        return Err(Error::NonIntegrableProfile(format!("radial integrals {num}, {den}")));
    }
    let angular = (alpha - mode.m as f64).powi(2);
    let radial = num / den;
    let frac = alpha - alpha.floor();
    Ok(AbQuotient { value: angular + radial, angular, radial, floor: frac.min(1.0 - frac).powi(2) })
}

/// `(N Σ|ξ_j|², Σ_{j<k}|ξ_j − ξ_k|² + |Σ ξ_j|²)`.
pub fn nn_identity_terms(xi: &Configuration) -> (f64, f64) {
    let n = xi.count();
    let lhs = n as f64 * xi.coords().iter().map(|v| v * v).sum::<f64>();
    let mut pairs = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            pairs += crate::geometry::dist_sq(xi.point(j), xi.point(k));
        }
    }
    let mut total = vec![0.0; xi.dim()];
    for p in xi.points() {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    (lhs, pairs + total.iter().map(|v| v * v).sum::<f64>())
}

/// `N Σ|ξ_j|² − (Σ_{j<k}|ξ_j − ξ_k|² + |Σ ξ_j|²)`, zero up to rounding.
pub fn nn_identity_residual(xi: &Configuration) -> f64 {
    let (l, r) = nn_identity_terms(xi);
    l - r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub lambda: f64,
    /// `(T − cX)` of the dilated, mass-normalized trial.
    pub value: f64,
    /// `value / value(λ = 1)`.
    pub ratio: f64,
}

/// `Q_c(u_λ) = λ²(T − cX)` from per-mass `T` and `X` of the undilated trial.
pub fn scaling_demo(t: f64, x: f64, coupling: f64, lambdas: &[f64]) -> Vec<ScalingPoint> {
    let base = t - coupling * x;
    lambdas
        .iter()
        .map(|&lambda| ScalingPoint { lambda, value: lambda * lambda * base, ratio: lambda * lambda })
        .collect()
}

/// Dilates a Gaussian product by `u(λx)` (scale `s/λ`) and evaluates `T − cX`
/// per unit mass from the dilated trial's own closed forms.
pub fn gaussian_scaling_demo(u: &GaussianProduct, coupling: f64, lambdas: &[f64]) -> Result<Vec<ScalingPoint>> {
    let form = |scale: f64| -> Result<f64> {
        let v = crate::trials::gaussian_product(u.dim(), u.count(), scale)?;
        let cf = v.closed_forms();
        match (cf.mass, cf.kinetic, cf.pair) {
            (Some(m), Some(t), Some(x)) => Ok((t - coupling * x) / m),
            _ => Err(Error::InvalidInput("closed forms need d ≥ 3 and N ≥ 2".into())),
        }
    };
    let base = form(u.scale())?;
    lambdas
        .iter()
        .map(|&lambda| {
            if !(lambda > 0.0) {
                return Err(Error::Domain(format!("dilation must be positive, got {lambda}")));
            }
            let value = form(u.scale() / lambda)?;
            Ok(ScalingPoint { lambda, value, ratio: value / base })
        })
        .collect()
}
