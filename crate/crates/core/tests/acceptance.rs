//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits nonzero
//! if any criterion fails. Every tolerance is a literal in this file.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use hardy_core::bounds::{bound_table, fermi_bound, hardy_lower_bound, magnetic_constant_exact, RationalFlux};
use hardy_core::estimate::{stream, McParams, Stream};
use hardy_core::fields::{complex_sum_identity, field_f3, field_f3_div, field_f3_norm_sq, field_g, field_g_div, field_g_norm_sq};
use hardy_core::functionals::{
    ab_mode_quotient, divmain_check, fermi_quotient, gaussian_scaling_demo, hardy_quotient, nn_identity_terms,
    odd_quotient,
};
use hardy_core::geometry::{menger_b, mm_identity_residual, triangle_chain, Configuration};
use hardy_core::optimize::{k_objective, maximize_k, sharpness_scan, KConfig, WeightedMeasure};
use hardy_core::report::RunReport;
use hardy_core::trials::{
    ab_mode, default_slater_centers, gaussian_product, odd_gaussian, slater_gaussian, RadialProfile, TrialFunction,
};
use hardy_core::verify::{run_suite, Suite, VerifyConfig};
use rand::Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 20240917;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn gauss(rng: &mut Stream, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `1/R²` from `R = abc/(4·Area)`, with the area from the Gram determinant.
fn oracle_inv_r2(p: &[f64], q: &[f64], r: &[f64]) -> f64 {
    let u = sub(q, p);
    let v = sub(r, p);
    let gram = dot(&u, &u) * dot(&v, &v) - dot(&u, &v).powi(2);
    let area_sq = 0.25 * gram.max(0.0);
    let w = sub(r, q);
    16.0 * area_sq / (dot(&u, &u) * dot(&v, &v) * dot(&w, &w))
}

/// Smallest sine over the three angles.
fn min_sine(p: &[f64], q: &[f64], r: &[f64]) -> f64 {
    let pts = [p, q, r];
    (0..3)
        .map(|i| {
            let a = sub(pts[(i + 1) % 3], pts[i]);
            let b = sub(pts[(i + 2) % 3], pts[i]);
            let c = dot(&a, &b) / (dot(&a, &a) * dot(&b, &b)).sqrt();
            (1.0 - c * c).max(0.0).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

fn oracle_pairs(c: &Configuration) -> f64 {
    let mut s = 0.0;
    for i in 0..c.count() {
        for j in i + 1..c.count() {
            let d = sub(c.point(i), c.point(j));
            s += 1.0 / dot(&d, &d);
        }
    }
    s
}

fn oracle_triples(c: &Configuration) -> f64 {
    let mut s = 0.0;
    for i in 0..c.count() {
        for j in i + 1..c.count() {
            for k in j + 1..c.count() {
                s += oracle_inv_r2(c.point(i), c.point(j), c.point(k));
            }
        }
    }
    s
}

/// Central-difference divergence of a field given block-wise.
fn oracle_divergence(f: impl Fn(&Configuration) -> Vec<f64>, c: &Configuration, h: f64) -> f64 {
    let mut total = 0.0;
    for idx in 0..c.coords().len() {
        let mut plus = c.coords().to_vec();
        let mut minus = c.coords().to_vec();
        plus[idx] += h;
        minus[idx] -= h;
        let fp = f(&Configuration::new(c.dim(), plus).unwrap())[idx];
        let fm = f(&Configuration::new(c.dim(), minus).unwrap())[idx];
        total += (fp - fm) / (2.0 * h);
    }
    total
}

fn criterion_1() -> Outcome {
    let mut rng = stream(SEED, 1);
    let (mut circ, mut mm, mut chain_bad, mut tested) = (0.0f64, 0.0f64, 0usize, 0usize);
    for d in [2usize, 3, 5] {
        let mut done = 0;
        while done < 10_000 {
            let (p, q, r) = (gauss(&mut rng, d), gauss(&mut rng, d), gauss(&mut rng, d));
            if min_sine(&p, &q, &r) < 0.01 {
                continue;
            }
            done += 1;
            let inv_r2 = oracle_inv_r2(&p, &q, &r);
            circ = circ.max((2.0 / inv_r2 * menger_b(&p, &q, &r).unwrap() - 1.0).abs());
            let rho2 = dot(&sub(&p, &q), &sub(&p, &q)) + dot(&sub(&p, &r), &sub(&p, &r)) + dot(&sub(&q, &r), &sub(&q, &r));
            mm = mm.max(mm_identity_residual(&p, &q, &r).abs() / rho2);
            let [a, b, c] = triangle_chain(&p, &q, &r).unwrap();
            let slack = 1e-12 * c;
            if !(a <= b + slack && b <= c + slack) || (a - inv_r2).abs() > 1e-9 * inv_r2 {
                chain_bad += 1;
            }
        }
        tested += done;
    }
    let mut equi = 0.0f64;
    for _ in 0..100 {
        let s: f64 = rng.random_range(0.1..10.0);
        let (p, q, r) = ([0.0, 0.0], [s, 0.0], [0.5 * s, 0.5 * 3f64.sqrt() * s]);
        let [a, b, c] = triangle_chain(&p, &q, &r).unwrap();
        let want = 3.0 / (s * s);
        equi = equi.max(((a - want).abs()).max((b - want).abs()).max((c - want).abs()) / want);
    }
    let mut line_nonzero = 0usize;
    for _ in 0..1000 {
        let (p, q, r) = (gauss(&mut rng, 1), gauss(&mut rng, 1), gauss(&mut rng, 1));
        if menger_b(&p, &q, &r).unwrap() != 0.0 {
            line_nonzero += 1;
        }
        let c = Configuration::new(1, vec![p[0], q[0], r[0], p[0] + 1.0]).unwrap();
        if hardy_core::geometry::triple_density(&c).unwrap() != 0.0 {
            line_nonzero += 1;
        }
    }
    let pass = circ <= 1e-9 && mm <= 1e-10 && chain_bad == 0 && equi <= 1e-12 && line_nonzero == 0;
    outcome(
        pass,
        format!(
            "{tested} triangles: |2R²b−1| ≤ {circ:.2e}, MM residual {mm:.2e}, chain violations {chain_bad}, equilateral {equi:.2e}, nonzero d=1 terms {line_nonzero}"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = stream(SEED, 2);
    let (mut div, mut norm, mut gdiv, mut gnorm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    for d in [1usize, 2, 3] {
        for n in [3usize, 5] {
            for _ in 0..1000 {
                let c = Configuration::new(d, gauss(&mut rng, d * n)).unwrap();
                let h = 1e-4 * c.min_pair_distance();
                let x = oracle_pairs(&c);
                let fd = oracle_divergence(|y| field_f3(y, 0.0).unwrap().components().to_vec(), &c, h);
                div = div.max((fd - field_f3_div(&c, 0.0).unwrap()).abs() / x);
                let direct: f64 = field_f3(&c, 0.0).unwrap().components().iter().map(|v| v * v).sum();
                norm = norm.max((field_f3_norm_sq(&c).unwrap() - direct).abs() / direct);
                let closed = 2.0 * x + oracle_triples(&c);
                norm = norm.max((field_f3_norm_sq(&c).unwrap() - closed).abs() / closed);
                if n == 3 {
                    let (p, q, r) = (c.point(0), c.point(1), c.point(2));
                    let rho2 = dot(&sub(p, q), &sub(p, q)) + dot(&sub(p, r), &sub(p, r)) + dot(&sub(q, r), &sub(q, r));
                    let want = 6.0 * (d as f64 - 1.0) / rho2;
                    let scale = 6.0 / rho2;
                    let fd = oracle_divergence(|y| field_g(y, 0.0).unwrap().components().to_vec(), &c, h);
                    gdiv = gdiv.max((fd - want).abs() / scale).max((field_g_div(&c, 0.0).unwrap() - want).abs() / scale);
                    let direct: f64 = field_g(&c, 0.0).unwrap().components().iter().map(|v| v * v).sum();
                    gnorm = gnorm
                        .max((direct - 3.0 / rho2).abs() * rho2 / 3.0)
                        .max((field_g_norm_sq(&c, 0.0).unwrap() - 3.0 / rho2).abs() * rho2 / 3.0);
                }
                cases += 1;
            }
        }
    }
    let mut complex = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=8);
        let c = Configuration::new(2, gauss(&mut rng, 2 * n)).unwrap();
        let mut lhs = 0.0;
        for j in 0..n {
            let (mut re, mut im) = (0.0, 0.0);
            for k in 0..n {
                if k != j {
                    let (a, b) = (c.point(j)[0] - c.point(k)[0], c.point(j)[1] - c.point(k)[1]);
                    let m = a * a + b * b;
                    re += a / m;
                    im -= b / m;
                }
            }
            lhs += re * re + im * im;
        }
        let rhs = 2.0 * oracle_pairs(&c) + oracle_triples(&c);
        let (l, r) = complex_sum_identity(&c).unwrap();
        complex = complex.max((lhs - rhs).abs() / rhs).max((l - lhs).abs() / lhs).max((r - rhs).abs() / rhs);
    }
    let pass = div <= 1e-6 && norm <= 1e-10 && gdiv <= 1e-6 && gnorm <= 1e-10 && complex <= 1e-10;
    outcome(
        pass,
        format!(
            "{cases} configs: div F3 {div:.2e}, |F3|² {norm:.2e}, div G {gdiv:.2e}, |G|² {gnorm:.2e}; 1000 planar clouds: complex sum {complex:.2e}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = stream(SEED, 3);
    let mut err = 0.0f64;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=10);
        let d = rng.random_range(1..=6);
        let xi = Configuration::new(d, gauss(&mut rng, d * n)).unwrap();
        // |Σξ|² expanded as Σ_j Σ_k <ξ_j, ξ_k>
        let mut gram = 0.0;
        let mut pairs = 0.0;
        for j in 0..n {
            for k in 0..n {
                gram += dot(xi.point(j), xi.point(k));
                if j < k {
                    let v = sub(xi.point(j), xi.point(k));
                    pairs += dot(&v, &v);
                }
            }
        }
        let lhs = n as f64 * dot(xi.coords(), xi.coords());
        let rhs = pairs + gram;
        let (l, r) = nn_identity_terms(&xi);
        err = err.max((lhs - rhs).abs() / lhs).max((l - r).abs() / l).max((l - lhs).abs() / lhs);
    }
    outcome(err <= 1e-12, format!("10000 inputs: worst relative residual {err:.2e}"))
}

fn criterion_4() -> Outcome {
    let rows = bound_table(3, 3, None, None).unwrap();
    let get = |name: &str| rows.iter().find(|r| r.name == name).and_then(|r| r.value).unwrap();
    let lower = get("hardy_lower_bound");
    let upper = get("gaussian_upper_bound");
    let bounds_ok = (lower - 0.430500).abs() <= 1e-6 && (upper - 3.701101).abs() <= 1e-6;

    let target3 = 3.0 * PI * PI / 8.0;
    let r3 = hardy_quotient(&gaussian_product(3, 3, 1.0).unwrap(), McParams::new(1_000_000, SEED)).unwrap();
    let (q3, s3) = (r3.quotient.value(), r3.quotient.stderr());
    let mc3_ok = (q3 - target3).abs() <= 3.0 * s3 && s3 <= 0.01 * q3;

    let target2 = 3.0 * PI * PI / 4.0;
    let r2 = hardy_quotient(&gaussian_product(3, 2, 1.0).unwrap(), McParams::new(1_000_000, SEED + 1)).unwrap();
    let (q2, s2) = (r2.quotient.value(), r2.quotient.stderr());
    let mc2_ok = (q2 - target2).abs() <= 3.0 * s2;

    outcome(
        bounds_ok && mc3_ok && mc2_ok,
        format!(
            "lower {lower:.6}, upper {upper:.6}; gaussian(3,3) {q3:.5} ± {s3:.5} vs {target3:.5} ({:.1}σ); gaussian(3,2) {q2:.5} ± {s2:.5} vs {target2:.5} ({:.1}σ)",
            (q3 - target3).abs() / s3,
            (q2 - target2).abs() / s2
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut failures = Vec::new();
    let (mut worst_q, mut worst_div) = (f64::INFINITY, f64::INFINITY);
    let mut seed = SEED;
    for d in [3usize, 4, 5] {
        for n in [2usize, 3, 4] {
            let trials: [(&str, Box<dyn TrialFunction>); 2] = [
                ("gaussian", Box::new(gaussian_product(d, n, 1.0).unwrap())),
                ("slater", Box::new(slater_gaussian(d, n, &default_slater_centers(d, n)).unwrap())),
            ];
            for (name, u) in trials {
                seed += 1;
                let lb = hardy_lower_bound(d, n).unwrap().value;
                let r = hardy_quotient(u.as_ref(), McParams::new(100_000, seed)).unwrap();
                let z = (r.quotient.value() - lb) / r.quotient.stderr();
                worst_q = worst_q.min(z);
                if z < -3.0 {
                    failures.push(format!("{name}(d={d},N={n}) quotient"));
                }
                let m = divmain_check(u.as_ref(), McParams::new(100_000, seed)).unwrap();
                let b = m.bound_checked.unwrap();
                let zd = b.margin_sigma.unwrap_or(if b.margin >= 0.0 { f64::INFINITY } else { f64::NEG_INFINITY });
                worst_div = worst_div.min(zd);
                if zd < -3.0 {
                    failures.push(format!("{name}(d={d},N={n}) divmain"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "18 trials: min (quotient − lower)/σ = {worst_q:.1}, min divmain margin/σ = {worst_div:.1}; failures {failures:?}"
        ),
    )
}

fn criterion_6() -> Outcome {
    let pts = sharpness_scan(2, &[0.2, 0.1, 0.05], McParams::new(200_000, SEED)).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for p in &pts {
        let (q, s) = (p.quotient.mean, p.quotient.stderr);
        let alpha = 0.25 + p.delta;
        let upper = 8.0 * alpha * alpha * (1.0 + p.beta.mean);
        let upper_se = 8.0 * alpha * alpha * p.beta.stderr;
        pass &= q >= 0.5 - 3.0 * s && q <= upper + 3.0 * (s * s + upper_se * upper_se).sqrt();
        detail.push(format!("δ={}: {q:.4}±{s:.4} in [0.5, {upper:.4}]", p.delta));
    }
    for w in pts.windows(2) {
        let combined = (w[0].quotient.stderr.powi(2) + w[1].quotient.stderr.powi(2)).sqrt();
        pass &= w[1].quotient.mean <= w[0].quotient.mean + 3.0 * combined;
    }
    outcome(pass, detail.join("; "))
}

/// `min_{1≤l<N} min_k (k − lα)²/l²` as an exact fraction `(num, den)`, scanning
/// every `k` in `[−N·|p|−1, N·|p|+1]`.
fn oracle_magnetic(n: i128, p: i128, q: i128) -> (i128, i128) {
    let mut best: Option<(i128, i128)> = None;
    let span = n * p.abs() / q + 2;
    for l in 1..n {
        for k in -span..=span {
            let num = (k * q - l * p).pow(2);
            let den = q * q * l * l;
            if best.is_none_or(|(bn, bd)| num * bd < bn * den) {
                best = Some((num, den));
            }
        }
    }
    best.expect("N ≥ 2")
}

fn criterion_7() -> Outcome {
    let exact = |n: usize, p: i64, q: i64| {
        let v = magnetic_constant_exact(n, RationalFlux::new(p, q).unwrap()).unwrap();
        (*v.numer(), *v.denom())
    };
    let same = |(a, b): (i128, i128), (c, d): (i128, i128)| a * d == b * c;
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, p, q, want) in [(2usize, 1i64, 2i64, (1i128, 4i128)), (3, 1, 3, (1, 36))] {
        let got = exact(n, p, q);
        let brute = oracle_magnetic(n as i128, p as i128, q as i128);
        pass &= same(got, want) && same(brute, want);
        detail.push(format!("D({n},{p}/{q}) = {}/{}", got.0, got.1));
    }
    for n in 2..=8usize {
        for a in -5i64..=5 {
            let got = exact(n, a, 1);
            pass &= got.0 == 0 && oracle_magnetic(n as i128, a as i128, 1).0 == 0;
        }
    }
    let mut rng = stream(SEED, 7);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = rng.random_range(2..=9usize);
        let q = rng.random_range(1..=40i64);
        let p = rng.random_range(-100..=100i64);
        let g = RationalFlux::new(p, q).unwrap();
        let got = exact(n, p, q);
        if !same(got, oracle_magnetic(n as i128, g.numer() as i128, g.denom() as i128)) {
            mismatches += 1;
        }
    }
    pass &= mismatches == 0;
    let mut ab_worst = f64::INFINITY;
    for i in 0..100 {
        let alpha: f64 = rng.random_range(-3.0..3.0);
        let m = rng.random_range(-4..=4i64);
        let profile = if i % 2 == 0 {
            RadialProfile::PowerExp { beta: rng.random_range(0.2..4.0), gamma: rng.random_range(0.2..4.0) }
        } else {
            RadialProfile::LogPlateau { radius: rng.random_range(1.0..100.0), width: rng.random_range(0.2..3.0) }
        };
        let r = ab_mode_quotient(alpha, &ab_mode(m, profile).unwrap()).unwrap();
        let floor = (-10i64..=10).map(|k| (k as f64 - alpha).powi(2)).fold(f64::INFINITY, f64::min);
        ab_worst = ab_worst.min(r.value - floor);
    }
    pass &= ab_worst >= -1e-10;
    outcome(
        pass,
        format!("{}; integer flux gives 0; 500 random fluxes, {mismatches} mismatches; AB modes min margin {ab_worst:.3e}", detail.join(", ")),
    )
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (i, (d, n)) in [(1usize, 2usize), (2, 2), (2, 3), (3, 2)].into_iter().enumerate() {
        let u = slater_gaussian(d, n, &default_slater_centers(d, n)).unwrap();
        let r = fermi_quotient(&u, McParams::new(200_000, SEED + i as u64)).unwrap();
        let b = fermi_bound(d, n).unwrap();
        let (q, s) = (r.quotient.value(), r.quotient.stderr());
        pass &= q >= b - 3.0 * s;
        detail.push(format!("({d},{n}) {q:.3}±{s:.3} ≥ {b:.3}"));
    }
    let odd = odd_quotient(&odd_gaussian(3).unwrap(), SEED).unwrap();
    pass &= (odd.quotient - 3.75).abs() <= 1e-6 && odd.quotient >= 9.0 / 4.0;
    for d in 2..=5usize {
        pass &= odd_quotient(&odd_gaussian(d).unwrap(), SEED).unwrap().quotient >= (d * d) as f64 / 4.0;
    }
    detail.push(format!("odd(3) = {:.9}", odd.quotient));
    outcome(pass, detail.join("; "))
}

fn criterion_9() -> Outcome {
    let u = gaussian_product(3, 3, 1.0).unwrap();
    let pts = gaussian_scaling_demo(&u, 4.0, &[1.0, 2.0, 4.0, 8.0]).unwrap();
    let base = pts[0].value;
    let mut worst = 0.0f64;
    for p in &pts[1..] {
        worst = worst.max((p.value / base - p.lambda * p.lambda).abs() / (p.lambda * p.lambda));
    }
    outcome(base < 0.0 && worst <= 1e-9, format!("Q_c(u) = {base:.6}, worst |ratio/λ² − 1| = {worst:.2e}"))
}

fn criterion_10() -> Outcome {
    let s3 = 3f64.sqrt();
    let tri = Configuration::new(2, vec![0.0, 0.0, 1.0, 0.0, 0.5, 0.5 * s3]).unwrap();
    let equi = k_objective(&WeightedMeasure::uniform(tri)).unwrap();

    let best = maximize_k(2, 3, &KConfig { restarts: 8, seed: SEED, ..KConfig::default() }, None).unwrap();

    let mut rng = stream(SEED, 10);
    let mut invariance = 0.0f64;
    for _ in 0..100 {
        let atoms = rng.random_range(3..=7usize);
        let c = Configuration::new(3, gauss(&mut rng, 3 * atoms)).unwrap();
        let raw: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let w: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let k0 = k_objective(&WeightedMeasure::new(c.clone(), w.clone()).unwrap()).unwrap();
        // rotation by Gram–Schmidt on a random frame, then a scale and a shift
        let a = gauss(&mut rng, 3);
        let na = dot(&a, &a).sqrt();
        let e1: Vec<f64> = a.iter().map(|v| v / na).collect();
        let b = gauss(&mut rng, 3);
        let bp = sub(&b, &e1.iter().map(|v| v * dot(&b, &e1)).collect::<Vec<_>>());
        let nb = dot(&bp, &bp).sqrt();
        let e2: Vec<f64> = bp.iter().map(|v| v / nb).collect();
        let e3 = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
        let lambda: f64 = rng.random_range(0.01..100.0);
        let moved: Vec<f64> = c
            .points()
            .flat_map(|p| [lambda * dot(p, &e1) + 1.0, lambda * dot(p, &e2) - 2.0, lambda * dot(p, &e3) + 0.5])
            .collect();
        let k1 = k_objective(&WeightedMeasure::new(Configuration::new(3, moved).unwrap(), w).unwrap()).unwrap();
        invariance = invariance.max((k1 - k0).abs() / k0);
    }
    let pass = (equi - 1.0).abs() <= 1e-12 && best.value >= 1.0 - 1e-6 && invariance <= 1e-12;
    outcome(
        pass,
        format!("equilateral {equi:.15}, best over 8 restarts {:.9}, invariance {invariance:.2e}", best.value),
    )
}

fn criterion_11() -> Outcome {
    let verify_json = |chunk: u64| {
        let cfg = VerifyConfig { seed: SEED, samples: 20_000, chunk_size: chunk };
        let mut r = RunReport::new("verify", "test").param("suite", "sharpness");
        r.results = run_suite(Suite::Sharpness, &cfg);
        r.to_json()
    };
    let quotient_json = || {
        let u = slater_gaussian(2, 3, &default_slater_centers(2, 3)).unwrap();
        let r = fermi_quotient(&u, McParams::new(50_000, SEED).with_chunk_size(1000)).unwrap();
        serde_json::to_string(&r).unwrap()
    };
    let a = verify_json(2048);
    let b = verify_json(2048);
    let c = quotient_json();
    let e = quotient_json();
    outcome(a == b && c == e, format!("verify sharpness {} bytes identical: {}; quotient identical: {}", a.len(), a == b, c == e))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("geometry identities", criterion_1),
        ("field identities", criterion_2),
        ("fourier identity", criterion_3),
        ("d=3 constants and gaussian quotients", criterion_4),
        ("lower-bound compliance", criterion_5),
        ("1D sharpness", criterion_6),
        ("magnetic constants", criterion_7),
        ("fermionic bound", criterion_8),
        ("unboundedness by dilation", criterion_9),
        ("K optimizer", criterion_10),
        ("reproducibility", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name} [{:.1}s]: {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
