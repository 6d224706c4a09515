//! Verification suites: deterministic identity checks and seeded Monte Carlo
//! inequality checks, each reported as a [`CheckOutcome`].

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{gaussian_trial_upper_bound, gaussian_upper_bound, hardy_lower_bound, magnetic_constant_exact, magnetic_constant_float, RationalFlux};
use crate::estimate::{stream, McParams, Stream};
use crate::fields::*;
use crate::functionals::{
    ab_mode_quotient, div_lemma_bound, divmain_check, fermi_quotient, gaussian_scaling_demo, hardy_quotient, hardy_quotient_exact,
    nn_identity_terms, odd_quotient, BoundCheck, FieldSelector, SIGMA_THRESHOLD,
};
use crate::geometry::{circumradius_inv_sq, dist_sq, menger_b, mm_identity_residual, rho_sq, triangle_chain, triple_density, Configuration};
use crate::optimize::{k_objective, maximize_k, sharpness_scan, KConfig, WeightedMeasure};
use crate::report::{CheckOutcome, ResultItem};
use crate::trials::{ab_mode, default_slater_centers, gaussian_product, odd_gaussian, slater_gaussian, RadialProfile, TrialFunction};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Geometry,
    Fields,
    Identities,
    Hardy,
    Sharpness,
    Fermion,
    Magnetic,
    Curvature,
    All,
}

impl Suite {
    /// Every concrete suite, in the order `All` runs them.
    pub const EACH: [Suite; 8] = [
        Suite::Geometry,
        Suite::Fields,
        Suite::Identities,
        Suite::Hardy,
        Suite::Sharpness,
        Suite::Fermion,
        Suite::Magnetic,
        Suite::Curvature,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Geometry => "geometry",
            Suite::Fields => "fields",
            Suite::Identities => "identities",
            Suite::Hardy => "hardy",
            Suite::Sharpness => "sharpness",
            Suite::Fermion => "fermion",
            Suite::Magnetic => "magnetic",
            Suite::Curvature => "curvature",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Monte Carlo samples per estimate.
    pub samples: u64,
    pub chunk_size: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: 0, samples: 200_000, chunk_size: 4096 }
    }
}

impl VerifyConfig {
    fn mc(&self, stream_offset: u64) -> McParams {
        McParams::new(self.samples, self.seed.wrapping_add(stream_offset)).with_chunk_size(self.chunk_size)
    }

    /// Random stream for the deterministic suites, one per check.
    fn rng(&self, index: u64) -> Stream {
        stream(self.seed, index)
    }
}

/// Runs `suite` and returns its checks together with any tables it produces.
pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Vec<ResultItem> {
    match suite {
        Suite::All => Suite::EACH.iter().flat_map(|s| run_suite(*s, cfg)).collect(),
        Suite::Geometry => checks(geometry(cfg)),
        Suite::Fields => checks(fields(cfg)),
        Suite::Identities => checks(identities(cfg)),
        Suite::Hardy => checks(hardy(cfg)),
        Suite::Sharpness => sharpness(cfg),
        Suite::Fermion => checks(fermion(cfg)),
        Suite::Magnetic => checks(magnetic(cfg)),
        Suite::Curvature => checks(curvature(cfg)),
    }
}

/// True iff every check in `items` passed.
pub fn all_pass(items: &[ResultItem]) -> bool {
    items.iter().all(|i| !matches!(i, ResultItem::Check(c) if !c.pass))
}

pub fn failures(items: &[ResultItem]) -> Vec<&CheckOutcome> {
    items
        .iter()
        .filter_map(|i| match i {
            ResultItem::Check(c) if !c.pass => Some(c),
            _ => None,
        })
        .collect()
}

fn checks(v: Vec<CheckOutcome>) -> Vec<ResultItem> {
    v.into_iter().map(ResultItem::Check).collect()
}

// ---------------------------------------------------------------------------
// Outcome helpers
// ---------------------------------------------------------------------------

/// `|value − target| ≤ tol · scale`.
fn close(suite: Suite, name: impl Into<String>, value: f64, target: f64, tol: f64, scale: f64) -> CheckOutcome {
    let pass = (value - target).abs() <= tol * scale;
    CheckOutcome::new(suite.name(), name, pass, value, target, tol).with_detail(format!("|value - target| <= {tol:e} * {scale:e}"))
}

/// The worst observed relative error over a batch, against `tol`.
fn worst(suite: Suite, name: impl Into<String>, worst: f64, tol: f64, cases: usize) -> CheckOutcome {
    CheckOutcome::new(suite.name(), name, worst <= tol, worst, 0.0, tol).with_detail(format!("max relative error over {cases} cases"))
}

/// A count of violations that must be zero.
fn none_of(suite: Suite, name: impl Into<String>, violations: usize, cases: usize) -> CheckOutcome {
    CheckOutcome::new(suite.name(), name, violations == 0, violations as f64, 0.0, 0.0).with_detail(format!("violations out of {cases} cases"))
}

fn from_bound(suite: Suite, name: impl Into<String>, b: &BoundCheck, stderr: f64) -> CheckOutcome {
    let mut c = CheckOutcome::new(suite.name(), name, b.pass, b.value, b.bound, SIGMA_THRESHOLD)
        .with_detail(format!("{}: value >= target - {SIGMA_THRESHOLD} sigma", b.name));
    if stderr > 0.0 {
        c = c.with_stderr(stderr);
    }
    c
}

/// Two-sided agreement of an estimate with an exact value within `SIGMA_THRESHOLD` standard errors.
fn within_sigma(suite: Suite, name: impl Into<String>, value: f64, stderr: f64, target: f64) -> CheckOutcome {
    let pass = stderr > 0.0 && (value - target).abs() <= SIGMA_THRESHOLD * stderr;
    CheckOutcome::new(suite.name(), name, pass, value, target, SIGMA_THRESHOLD)
        .with_stderr(stderr)
        .with_detail(format!("|value - target| <= {SIGMA_THRESHOLD} sigma"))
}

fn errored(suite: Suite, name: impl Into<String>, e: &Error) -> CheckOutcome {
    CheckOutcome::new(suite.name(), name, false, 0.0, 0.0, 0.0).with_detail(format!("error: {e}"))
}

fn attempt(suite: Suite, name: &str, f: impl FnOnce() -> Result<Vec<CheckOutcome>>) -> Vec<CheckOutcome> {
    f().unwrap_or_else(|e| vec![errored(suite, name, &e)])
}

fn normal_vec(rng: &mut Stream, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

fn normal_config(rng: &mut Stream, d: usize, n: usize) -> Configuration {
    loop {
        if let Ok(c) = Configuration::new(d, normal_vec(rng, d * n)) {
            if n < 2 || c.min_pair_distance() > 1e-3 * c.diameter() {
                return c;
            }
        }
    }
}

/// Orthonormal vectors `e1, e2` in `R^d` (`d ≥ 2`) by Gram–Schmidt.
fn random_frame(rng: &mut Stream, d: usize) -> (Vec<f64>, Vec<f64>) {
    let unit = |v: Vec<f64>| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect::<Vec<_>>()
    };
    let e1 = unit(normal_vec(rng, d));
    let v = normal_vec(rng, d);
    let p: f64 = v.iter().zip(&e1).map(|(a, b)| a * b).sum();
    let e2 = unit(v.iter().zip(&e1).map(|(a, b)| a - p * b).collect());
    (e1, e2)
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

const TRIANGLES: usize = 10_000;
/// Smallest angle sine of a triangle counted as nondegenerate.
pub const MIN_SINE: f64 = 0.01;
const FIELD_CONFIGS: usize = 1_000;

fn geometry(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let s = Suite::Geometry;
    let mut out = Vec::new();
    for (i, d) in [2usize, 3, 5].into_iter().enumerate() {
        out.extend(attempt(s, &format!("triangles[d={d}]"), || {
            let mut rng = cfg.rng(i as u64);
            let (mut circ, mut mm, mut order, mut used) = (0.0f64, 0.0f64, 0, 0);
            while used < TRIANGLES {
                let c = normal_config(&mut rng, d, 3);
                let (p, q, r) = (c.point(0), c.point(1), c.point(2));
                let inv_r2 = circumradius_inv_sq(p, q, r)?;
                let shortest = dist_sq(p, q).min(dist_sq(p, r)).min(dist_sq(q, r));
                // sin²θ = side²/(4R²) for the opposite angle; nondegenerate means every sin θ ≥ MIN_SINE
                if shortest * inv_r2 / 4.0 < MIN_SINE * MIN_SINE {
                    continue;
                }
                used += 1;
                circ = circ.max((2.0 * menger_b(p, q, r)? / inv_r2 - 1.0).abs());
                mm = mm.max(mm_identity_residual(p, q, r).abs() / rho_sq(p, q, r));
                let [a, b, e] = triangle_chain(p, q, r)?;
                if a > b * (1.0 + 1e-12) || b > e * (1.0 + 1e-12) {
                    order += 1;
                }
            }
            Ok(vec![
                worst(s, format!("circumradius_menger[d={d}]"), circ, 1e-9, used),
                worst(s, format!("mm_identity[d={d}]"), mm, 1e-10, used),
                none_of(s, format!("triangle_chain_order[d={d}]"), order, used),
            ])
        }));
        out.extend(attempt(s, &format!("equilateral[d={d}]"), || {
            let mut rng = cfg.rng(100 + i as u64);
            let mut dev = 0.0f64;
            for _ in 0..100 {
                let (e1, e2) = random_frame(&mut rng, d);
                let center = normal_vec(&mut rng, d);
                let side = rng.random_range(0.01..100.0);
                let pts: Vec<Vec<f64>> = (0..3)
                    .map(|k| {
                        let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                        let r = side / 3f64.sqrt();
                        (0..d).map(|c| center[c] + r * (t.cos() * e1[c] + t.sin() * e2[c])).collect()
                    })
                    .collect();
                let [a, b, e] = triangle_chain(&pts[0], &pts[1], &pts[2])?;
                dev = dev.max((a / b - 1.0).abs()).max((e / b - 1.0).abs());
            }
            Ok(vec![worst(s, format!("triangle_chain_equality[d={d}]"), dev, 1e-12, 100)])
        }));
    }
    out.extend(attempt(s, "line", || {
        let mut rng = cfg.rng(200);
        let mut nonzero = 0;
        for _ in 0..TRIANGLES {
            let c = normal_config(&mut rng, 1, 3);
            if menger_b(c.point(0), c.point(1), c.point(2))? != 0.0 || triple_density(&c)? != 0.0 {
                nonzero += 1;
            }
        }
        Ok(vec![none_of(s, "menger_vanishes_on_line", nonzero, TRIANGLES)])
    }));
    out
}

fn fields(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let s = Suite::Fields;
    let mut out = Vec::new();
    let mut index = 0u64;
    for d in [1usize, 2, 3] {
        for n in [3usize, 5] {
            index += 1;
            out.extend(attempt(s, &format!("f3[d={d},N={n}]"), || {
                let mut rng = cfg.rng(index);
                let (mut div_err, mut norm_err) = (0.0f64, 0.0f64);
                let (mut g_div, mut g_norm, mut g_fd) = (0.0f64, 0.0f64, 0.0f64);
                for _ in 0..FIELD_CONFIGS {
                    let c = normal_config(&mut rng, d, n);
                    let h = 1e-4 * c.min_pair_distance();
                    let x = crate::geometry::pair_density(&c)?;
                    // div F₃ vanishes identically in d = 2, so errors are relative to the pair density
                    let fd = fd_divergence(|y| field_f3(y, 0.0), &c, h)?;
                    div_err = div_err.max((fd - field_f3_div(&c, 0.0)?).abs() / x);
                    let direct = field_f3(&c, 0.0)?.norm_sq();
                    norm_err = norm_err.max((field_f3_norm_sq(&c)? - direct).abs() / direct);
                    if n == 3 {
                        let rho2 = rho_sq(c.point(0), c.point(1), c.point(2));
                        let scale = 6.0 / rho2;
                        let want = 6.0 * (d as f64 - 1.0) / rho2;
                        g_div = g_div.max((field_g_div(&c, 0.0)? - want).abs() / scale);
                        g_fd = g_fd.max((fd_divergence(|y| field_g(y, 0.0), &c, h)? - want).abs() / scale);
                        g_norm = g_norm.max((field_g(&c, 0.0)?.norm_sq() - 3.0 / rho2).abs() * rho2 / 3.0);
                    }
                }
                let mut v = vec![
                    worst(s, format!("f3_divergence_fd[d={d},N={n}]"), div_err, 1e-6, FIELD_CONFIGS),
                    worst(s, format!("f3_norm_direct_sum[d={d},N={n}]"), norm_err, 1e-10, FIELD_CONFIGS),
                ];
                if n == 3 {
                    v.push(worst(s, format!("g_divergence[d={d}]"), g_div, 1e-10, FIELD_CONFIGS));
                    v.push(worst(s, format!("g_divergence_fd[d={d}]"), g_fd, 1e-6, FIELD_CONFIGS));
                    v.push(worst(s, format!("g_norm[d={d}]"), g_norm, 1e-10, FIELD_CONFIGS));
                }
                Ok(v)
            }));
        }
    }
    out.extend(attempt(s, "auxiliary_fields", || {
        let mut rng = cfg.rng(50);
        let (mut pair, mut center, mut radial) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..FIELD_CONFIGS / 10 {
            let d = rng.random_range(1..=4);
            let n = rng.random_range(2..=5);
            let c = normal_config(&mut rng, d, n);
            let s2: f64 = (0..d).map(|k| c.points().map(|p| p[k]).sum::<f64>().powi(2)).sum();
            let h = 1e-4 * c.min_pair_distance().min(s2.sqrt());
            let fd = fd_divergence(|y| field_pair(y, 0, 1, 0.0), &c, h)?;
            let r2 = dist_sq(c.point(0), c.point(1));
            pair = pair.max((fd - field_pair_div(&c, 0, 1)?).abs() * r2);
            let fd = fd_divergence(|y| field_center(y, 0.0), &c, h)?;
            // the divergence (d−2)/|S|² vanishes in the plane, so errors are scaled by |S|²
            center = center.max((fd - field_center_div(&c)?).abs() * s2);
            let fd = fd_divergence(|y| field_radial(y, 0.5), &c, 1e-4)?;
            let exact = field_radial_div(&c, 0.5)?;
            radial = radial.max((fd - exact).abs() / exact.abs());
        }
        let cases = FIELD_CONFIGS / 10;
        Ok(vec![
            worst(s, "pair_divergence_fd", pair, 1e-6, cases),
            worst(s, "center_divergence_fd", center, 1e-6, cases),
            worst(s, "radial_divergence_fd", radial, 1e-6, cases),
        ])
    }));
    out.extend(attempt(s, "complex_sum_identity", || {
        let mut rng = cfg.rng(60);
        let mut err = 0.0f64;
        for _ in 0..FIELD_CONFIGS {
            let n = rng.random_range(2..=8);
            let c = normal_config(&mut rng, 2, n);
            let (lhs, rhs) = complex_sum_identity(&c)?;
            err = err.max((lhs - rhs).abs() / rhs);
        }
        Ok(vec![worst(s, "complex_sum_identity", err, 1e-10, FIELD_CONFIGS)])
    }));
    out
}

fn identities(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let s = Suite::Identities;
    let mut out = attempt(s, "fourier_identity", || {
        let mut rng = cfg.rng(1);
        let mut err = 0.0f64;
        let cases = 10_000;
        for _ in 0..cases {
            let n = rng.random_range(1..=10);
            let d = rng.random_range(1..=6);
            let xi = Configuration::new(d, normal_vec(&mut rng, d * n))?;
            let (l, r) = nn_identity_terms(&xi);
            err = err.max((l - r).abs() / l.max(f64::MIN_POSITIVE));
        }
        Ok(vec![worst(s, "fourier_identity", err, 1e-12, cases)])
    });
    out.extend(attempt(s, "scaling", || {
        let u = gaussian_product(3, 3, 1.0)?;
        let coupling = 4.0;
        let pts = gaussian_scaling_demo(&u, coupling, &[1.0, 2.0, 4.0, 8.0])?;
        let mut v = vec![CheckOutcome::new(s.name(), "scaling_form_negative", pts[0].value < 0.0, pts[0].value, 0.0, 0.0)
            .with_detail("T - cX < 0 at c = 4")];
        for p in &pts[1..] {
            let l2 = p.lambda * p.lambda;
            v.push(close(s, format!("scaling_ratio[lambda={}]", p.lambda), p.ratio, l2, 1e-9, l2));
        }
        Ok(v)
    }));
    out
}

fn hardy(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let s = Suite::Hardy;
    let mut out = attempt(s, "bracket", || {
        Ok(vec![
            close(s, "lower_bound[d=3,N=3]", hardy_lower_bound(3, 3)?.value, 1.0 / (1.0 + 7f64.sqrt() / 2.0), 1e-6, 1.0),
            close(s, "lower_bound_printed[d=3,N=3]", hardy_lower_bound(3, 3)?.value, 0.430500, 1e-6, 1.0),
            close(s, "upper_bound[d=3,N=3]", gaussian_upper_bound(3, 3)?, 3.0 * std::f64::consts::PI.powi(2) / 8.0, 1e-6, 1.0),
        ])
    });
    let mut offset = 0u64;
    for n in [3usize, 2] {
        offset += 1;
        out.extend(attempt(s, &format!("gaussian[d=3,N={n}]"), || {
            let u = gaussian_product(3, n, 1.0)?;
            let exact = hardy_quotient_exact(&u).ok_or_else(|| Error::InvalidInput("no closed form".into()))?;
            let r = hardy_quotient(&u, cfg.mc(offset))?;
            let (q, se) = (r.quotient.value(), r.quotient.stderr());
            let upper = gaussian_upper_bound(3, n)?;
            Ok(vec![
                close(s, format!("gaussian_closed_form[d=3,N={n}]"), exact.quotient.value(), gaussian_trial_upper_bound(3, n)?, 1e-12, 1.0),
                within_sigma(s, format!("gaussian_mc_vs_closed_form[d=3,N={n}]"), q, se, exact.quotient.value()),
                CheckOutcome::new(s.name(), format!("gaussian_upper_inequality[d=3,N={n}]"), q <= upper + SIGMA_THRESHOLD * se, q, upper, SIGMA_THRESHOLD)
                    .with_stderr(se)
                    .with_detail("value <= target + 3 sigma"),
            ])
        }));
    }
    for d in [3usize, 4, 5] {
        for n in [2usize, 3, 4] {
            let trials: Vec<(&str, Result<Box<dyn TrialFunction>>)> = vec![
                ("gaussian", gaussian_product(d, n, 1.0).map(|u| Box::new(u) as Box<dyn TrialFunction>)),
                ("slater", slater_gaussian(d, n, &default_slater_centers(d, n)).map(|u| Box::new(u) as Box<dyn TrialFunction>)),
            ];
            for (family, u) in trials {
                offset += 1;
                let tag = format!("{family}[d={d},N={n}]");
                out.extend(attempt(s, &tag, || {
                    let u = u?;
                    let r = hardy_quotient(u.as_ref(), cfg.mc(offset))?;
                    let m = divmain_check(u.as_ref(), cfg.mc(offset))?;
                    let mut v = Vec::new();
                    if let Some(b) = &r.bound_checked {
                        v.push(from_bound(s, format!("lower_bound_compliance.{tag}"), b, r.quotient.stderr()));
                    }
                    if let Some(b) = &m.bound_checked {
                        let se = b.margin_sigma.map(|z| (b.margin / z).abs()).unwrap_or(0.0);
                        v.push(from_bound(s, format!("divmain.{tag}"), b, se));
                    }
                    Ok(v)
                }));
            }
        }
    }
    let fields_list = [
        ("f3", FieldSelector::F3),
        ("g", FieldSelector::G),
        ("radial", FieldSelector::Radial { eps: 0.0 }),
        ("pair", FieldSelector::Pair { j: 0, k: 1 }),
        ("center", FieldSelector::Center),
    ];
    for (name, field) in fields_list {
        offset += 1;
        out.extend(attempt(s, &format!("div_lemma.{name}"), || {
            let u = gaussian_product(3, 3, 1.0)?;
            let r = div_lemma_bound(&u, field, cfg.mc(offset))?;
            let se = r.check.margin_sigma.map(|z| (r.check.margin / z).abs()).unwrap_or(0.0);
            Ok(vec![from_bound(s, format!("div_lemma.{name}[d=3,N=3]"), &r.check, se)])
        }));
    }
    out
}

/// The `δ` values of the sharpness scan.
pub const SHARPNESS_DELTAS: [f64; 3] = [0.2, 0.1, 0.05];

fn sharpness(cfg: &VerifyConfig) -> Vec<ResultItem> {
    let s = Suite::Sharpness;
    let pts = match sharpness_scan(2, &SHARPNESS_DELTAS, cfg.mc(0)) {
        Ok(p) => p,
        Err(e) => return checks(vec![errored(s, "sharpness_scan[N=2]", &e)]),
    };
    let mut out: Vec<ResultItem> = pts.iter().cloned().map(ResultItem::Sharpness).collect();
    let mut v = Vec::new();
    for p in &pts {
        let q = p.quotient;
        v.push(
            CheckOutcome::new(s.name(), format!("sandwich_lower[delta={}]", p.delta), q.mean >= p.lower - SIGMA_THRESHOLD * q.stderr, q.mean, p.lower, SIGMA_THRESHOLD)
                .with_stderr(q.stderr)
                .with_detail("value >= target - 3 sigma"),
        );
        let se = q.stderr.hypot(p.upper.stderr);
        v.push(
            CheckOutcome::new(s.name(), format!("sandwich_upper[delta={}]", p.delta), q.mean <= p.upper.mean + SIGMA_THRESHOLD * se, q.mean, p.upper.mean, SIGMA_THRESHOLD)
                .with_stderr(se)
                .with_detail("value <= target + 3 sigma (joint error)"),
        );
        if let Some(exact) = p.exact_quotient {
            v.push(within_sigma(s, format!("closed_form[delta={}]", p.delta), q.mean, q.stderr, exact));
        }
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0].quotient, w[1].quotient);
        let se = a.stderr.hypot(b.stderr);
        v.push(
            CheckOutcome::new(
                s.name(),
                format!("decreasing[delta={}->{}]", w[0].delta, w[1].delta),
                a.mean - b.mean >= -SIGMA_THRESHOLD * se,
                a.mean - b.mean,
                0.0,
                SIGMA_THRESHOLD,
            )
            .with_stderr(se)
            .with_detail("q(larger delta) - q(smaller delta) >= -3 sigma"),
        );
    }
    out.extend(checks(v));
    out
}

fn fermion(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let s = Suite::Fermion;
    let mut out = Vec::new();
    for (i, (d, n)) in [(1usize, 2usize), (2, 2), (2, 3), (3, 2)].into_iter().enumerate() {
        out.extend(attempt(s, &format!("slater[d={d},N={n}]"), || {
            let u = slater_gaussian(d, n, &default_slater_centers(d, n))?;
            let r = fermi_quotient(&u, cfg.mc(i as u64))?;
            let b = r.bound_checked.as_ref().expect("fermi quotient is always checked");
            Ok(vec![from_bound(s, format!("fermi_bound.slater[d={d},N={n}]"), b, r.quotient.stderr())])
        }));
    }
    out.extend(attempt(s, "odd[d=3]", || {
        let r = odd_quotient(&odd_gaussian(3)?, cfg.seed)?;
        Ok(vec![close(s, "odd_quadrature[d=3]", r.quotient, 15.0 / 4.0, 1e-6, 1.0)])
    }));
    for d in 2..=5usize {
        out.extend(attempt(s, &format!("odd[d={d}]"), || {
            let r = odd_quotient(&odd_gaussian(d)?, cfg.seed)?;
            let floor = (d * d) as f64 / 4.0;
            Ok(vec![CheckOutcome::new(s.name(), format!("odd_bound[d={d}]"), r.quotient >= floor - 1e-10, r.quotient, floor, 1e-10)
                .with_detail("value >= target - tolerance")])
        }));
    }
    out
}

/// `min_{1≤l<N} min_k (|k − lα|/l)²` by scanning `k` over a window around `lα`
/// in exact rational arithmetic.
pub fn magnetic_brute_force(n: usize, alpha: RationalFlux) -> Ratio<i128> {
    let a = Ratio::new(alpha.numer() as i128, alpha.denom() as i128);
    let mut best: Option<Ratio<i128>> = None;
    for l in 1..n as i128 {
        let la = a * l;
        let centre = la.floor().to_integer();
        for k in centre - 2..=centre + 2 {
            let diff = Ratio::from_integer(k) - la;
            let dist = if diff < Ratio::from_integer(0) { -diff } else { diff } / l;
            let v = dist * dist;
            if best.is_none_or(|b| v < b) {
                best = Some(v);
            }
        }
    }
    best.unwrap_or_else(|| Ratio::from_integer(0))
}

fn magnetic(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let s = Suite::Magnetic;
    let mut out = attempt(s, "table", || {
        let exact = |n: usize, p: i64, q: i64| -> Result<(Ratio<i128>, Ratio<i128>)> {
            let a = RationalFlux::new(p, q)?;
            Ok((magnetic_constant_exact(n, a)?, magnetic_brute_force(n, a)))
        };
        let mut v = Vec::new();
        let (got, brute) = exact(2, 1, 2)?;
        v.push(CheckOutcome::new(s.name(), "D[N=2,alpha=1/2]", got == Ratio::new(1, 4) && brute == got, 0.25, 0.25, 0.0));
        let (got, brute) = exact(3, 1, 3)?;
        v.push(CheckOutcome::new(s.name(), "D[N=3,alpha=1/3]", got == Ratio::new(1, 36) && brute == got, 1.0 / 36.0, 1.0 / 36.0, 0.0));
        let mut bad = 0;
        let mut cases = 0;
        for n in 2..=8 {
            for k in -3..=3 {
                cases += 1;
                let (got, brute) = exact(n, k, 1)?;
                if got != Ratio::from_integer(0) || brute != got {
                    bad += 1;
                }
            }
        }
        v.push(none_of(s, "D_vanishes_at_integer_flux", bad, cases));
        let mut bad = 0;
        let mut rng = cfg.rng(1);
        for _ in 0..500 {
            let q = rng.random_range(1..=24);
            let p = rng.random_range(-60..=60);
            let n = rng.random_range(2..=12);
            let a = RationalFlux::new(p, q)?;
            let e = magnetic_constant_exact(n, a)?;
            let f = magnetic_constant_float(n, a.to_f64())?;
            let ef = *e.numer() as f64 / *e.denom() as f64;
            if e != magnetic_brute_force(n, a) || (f - ef).abs() > 1e-12 {
                bad += 1;
            }
        }
        v.push(none_of(s, "D_matches_brute_force", bad, 500));
        Ok(v)
    });
    out.extend(attempt(s, "ab_modes", || {
        let mut rng = cfg.rng(2);
        let mut bad = 0;
        let mut worst_margin = f64::INFINITY;
        let cases = 100;
        for _ in 0..cases {
            let alpha: f64 = rng.random_range(-3.0..3.0);
            let m = rng.random_range(-3..=3);
            let profile = if rng.random_bool(0.5) {
                RadialProfile::PowerExp { beta: rng.random_range(0.2..3.0), gamma: rng.random_range(0.5..3.0) }
            } else {
                RadialProfile::LogPlateau { radius: rng.random_range(1.0..50.0), width: rng.random_range(0.2..2.0) }
            };
            let r = ab_mode_quotient(alpha, &ab_mode(m, profile)?)?;
            let margin = r.value - r.floor;
            worst_margin = worst_margin.min(margin);
            if margin < -1e-10 {
                bad += 1;
            }
        }
        Ok(vec![none_of(s, "ab_mode_bound", bad, cases).with_detail(format!("violations out of {cases}; smallest margin {worst_margin:e}"))])
    }));
    out
}

fn curvature(cfg: &VerifyConfig) -> Vec<CheckOutcome> {
    let s = Suite::Curvature;
    let mut out = attempt(s, "equilateral", || {
        let h = 3f64.sqrt() / 2.0;
        let atoms = Configuration::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.5, h])?;
        let k = k_objective(&WeightedMeasure::uniform(atoms))?;
        Ok(vec![close(s, "k_equilateral", k, 1.0, 1e-12, 1.0)])
    });
    out.extend(attempt(s, "invariance", || {
        let mut rng = cfg.rng(1);
        let mut err = 0.0f64;
        let cases = 100;
        for _ in 0..cases {
            let n = rng.random_range(3..=7);
            let atoms = normal_config(&mut rng, 3, n);
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
            let base = k_objective(&WeightedMeasure::new(atoms.clone(), weights.clone())?)?;
            let (e1, e2) = random_frame(&mut rng, 3);
            let e3 = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
            let lambda = rng.random_range(0.1..10.0);
            let shift = normal_vec(&mut rng, 3);
            let moved: Vec<f64> = atoms
                .points()
                .flat_map(|p| {
                    let shift = &shift;
                    let rot = [
                        e1.iter().zip(p).map(|(a, b)| a * b).sum::<f64>(),
                        e2.iter().zip(p).map(|(a, b)| a * b).sum::<f64>(),
                        e3.iter().zip(p).map(|(a, b)| a * b).sum::<f64>(),
                    ];
                    (0..3).map(move |c| lambda * rot[c] + shift[c]).collect::<Vec<_>>()
                })
                .collect();
            let k = k_objective(&WeightedMeasure::new(Configuration::new(3, moved)?, weights)?)?;
            err = err.max((k - base).abs() / base.abs().max(f64::MIN_POSITIVE));
        }
        Ok(vec![worst(s, "k_similarity_invariance", err, 1e-12, cases)])
    }));
    out.extend(attempt(s, "maximize", || {
        let kc = KConfig { seed: cfg.seed, ..KConfig::default() };
        let r = maximize_k(2, 3, &kc, None)?;
        Ok(vec![CheckOutcome::new(s.name(), "maximize_k[d=2,atoms=3]", r.value >= 1.0 - 1e-6, r.value, 1.0, 1e-6)
            .with_detail("value >= target - tolerance")])
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::EACH.into_iter().chain([Suite::All]) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn brute_force_examples() {
        let half = RationalFlux::new(1, 2).unwrap();
        assert_eq!(magnetic_brute_force(2, half), Ratio::new(1, 4));
        let third = RationalFlux::new(1, 3).unwrap();
        assert_eq!(magnetic_brute_force(3, third), Ratio::new(1, 36));
        assert_eq!(magnetic_brute_force(5, RationalFlux::new(-7, 1).unwrap()), Ratio::from_integer(0));
    }

    #[test]
    fn deterministic_suites_pass() {
        let cfg = VerifyConfig { seed: 7, ..VerifyConfig::default() };
        for suite in [Suite::Geometry, Suite::Fields, Suite::Identities, Suite::Magnetic] {
            let items = run_suite(suite, &cfg);
            let failed = failures(&items);
            assert!(failed.is_empty(), "{failed:?}");
        }
    }
}
