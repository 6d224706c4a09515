use hardy_core::bounds::{bound_table, gaussian_upper_bound, BoundKind, Flux};
use hardy_core::estimate::McParams;
use hardy_core::functionals::{ab_mode_quotient, fermi_quotient, hardy_quotient, hardy_quotient_exact, odd_quotient, SIGMA_THRESHOLD};
use hardy_core::optimize::{maximize_k, minimize_quotient, sharpness_scan, KConfig, QuotientFamily};
use hardy_core::report::{CheckOutcome, Labels, ResultItem, RunReport};
use hardy_core::trials::{ab_mode, default_slater_centers, gaussian_product, odd_gaussian, slater_gaussian, RadialProfile};
use hardy_core::verify::{all_pass, failures, run_suite, Suite, VerifyConfig};

use crate::{BoundsArgs, Failure, Family, OptimizeArgs, Profile, QuotientArgs, SearchFamily, SuiteArg, Target, VerifyArgs, VERSION};

/// Rows describing general (non-fermionic, non-magnetic) functions; their
/// lower bounds must sit below their upper bounds.
const GENERAL_ROWS: [&str; 4] = ["hardy_lower_bound", "naive_bound", "gaussian_upper_bound", "gaussian_trial_upper_bound"];

pub fn failed_checks(report: &RunReport) -> Vec<&CheckOutcome> {
    failures(&report.results)
}

fn required<T>(v: Option<T>, flag: &str, family: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for {family}")))
}

fn parse_flux(s: &str) -> Result<Flux, Failure> {
    Flux::parse(s).map_err(Failure::from)
}

pub fn bounds(a: &BoundsArgs) -> Result<RunReport, Failure> {
    let alpha = a.alpha.as_deref().map(parse_flux).transpose()?;
    if let Some(k) = a.k {
        if !(k.is_finite() && k >= 0.0) {
            return Err(Failure::Usage(format!("--K must be a finite non-negative number, got {k}")));
        }
    }
    let rows = bound_table(a.d, a.n, alpha, a.k)?;
    let general = rows.iter().filter(|r| GENERAL_ROWS.contains(&r.name.as_str()));
    let lower = general.clone().filter(|r| r.kind == BoundKind::Lower).filter_map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    let upper = general.filter(|r| r.kind == BoundKind::Upper).filter_map(|r| r.value).fold(f64::INFINITY, f64::min);
    if lower > upper {
        return Err(Failure::Check(format!("lower bound {lower} exceeds upper bound {upper}")));
    }
    let mut report = RunReport::new("bounds", VERSION).param("d", a.d).param("N", a.n);
    if let Some(al) = &alpha {
        report = report.param("alpha", al.to_string());
    }
    if let Some(k) = a.k {
        report = report.param("K", k);
    }
    report.results = rows.into_iter().map(ResultItem::Bound).collect();
    Ok(report)
}

fn suite(s: SuiteArg) -> Suite {
    match s {
        SuiteArg::Geometry => Suite::Geometry,
        SuiteArg::Fields => Suite::Fields,
        SuiteArg::Identities => Suite::Identities,
        SuiteArg::Hardy => Suite::Hardy,
        SuiteArg::Sharpness => Suite::Sharpness,
        SuiteArg::Fermion => Suite::Fermion,
        SuiteArg::Magnetic => Suite::Magnetic,
        SuiteArg::Curvature => Suite::Curvature,
        SuiteArg::All => Suite::All,
    }
}

fn check_sampling(samples: u64, chunk_size: u64) -> Result<(), Failure> {
    if samples == 0 || chunk_size == 0 {
        return Err(Failure::Usage("--samples and --chunk-size must be positive".into()));
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Result<RunReport, Failure> {
    let s = &a.sampling;
    check_sampling(s.samples, s.chunk_size)?;
    let cfg = VerifyConfig { seed: s.seed, samples: s.samples, chunk_size: s.chunk_size };
    let suite = suite(a.suite);
    let results = run_suite(suite, &cfg);
    let mut report = RunReport::new("verify", VERSION)
        .param("suite", suite.name())
        .param("samples", s.samples)
        .param("chunk_size", s.chunk_size);
    report.seed = Some(s.seed);
    report.suite_pass = Some(all_pass(&results));
    report.results = results;
    Ok(report)
}

fn labels(d: Option<usize>, n: Option<usize>) -> Labels {
    Labels { d, n, alpha: None }
}

pub fn quotient(a: &QuotientArgs) -> Result<RunReport, Failure> {
    let s = &a.sampling;
    check_sampling(s.samples, s.chunk_size)?;
    let mc = McParams::new(s.samples, s.seed).with_chunk_size(s.chunk_size);
    let mut report = RunReport::new("quotient", VERSION);
    report.seed = Some(s.seed);
    let mut items = Vec::new();
    let family = match a.family {
        Family::Gaussian => {
            let (d, n) = (required(a.d, "d", "gaussian")?, required(a.n, "N", "gaussian")?);
            if d < 3 || n < 2 {
                return Err(Failure::Usage("the pair quotient of a Gaussian product needs d >= 3 and N >= 2".into()));
            }
            let u = gaussian_product(d, n, a.scale)?;
            report = report.param("d", d).param("N", n).param("scale", a.scale);
            let r = hardy_quotient(&u, mc)?;
            let q = r.quotient;
            items.push(ResultItem::Quotient { name: "gaussian".into(), labels: labels(Some(d), Some(n)), result: r });
            if let Some(exact) = hardy_quotient_exact(&u) {
                items.push(ResultItem::Quotient { name: "gaussian_closed_form".into(), labels: labels(Some(d), Some(n)), result: exact });
            }
            let upper = gaussian_upper_bound(d, n)?;
            items.push(ResultItem::Check(
                CheckOutcome::new("quotient", "below_gaussian_upper_bound", q.value() <= upper + SIGMA_THRESHOLD * q.stderr(), q.value(), upper, SIGMA_THRESHOLD)
                    .with_stderr(q.stderr())
                    .with_detail("value <= target + 3 sigma"),
            ));
            "gaussian"
        }
        Family::Sharpness1d => {
            let n = required(a.n, "N", "sharpness1d")?;
            let delta = required(a.delta, "delta", "sharpness1d")?;
            report = report.param("N", n).param("delta", delta);
            let p = sharpness_scan(n, &[delta], mc)?.remove(0);
            let q = p.quotient;
            let se_up = q.stderr.hypot(p.upper.stderr);
            items.push(ResultItem::Check(
                CheckOutcome::new("quotient", "sandwich_lower", q.mean >= p.lower - SIGMA_THRESHOLD * q.stderr, q.mean, p.lower, SIGMA_THRESHOLD)
                    .with_stderr(q.stderr)
                    .with_detail("value >= target - 3 sigma"),
            ));
            items.push(ResultItem::Check(
                CheckOutcome::new("quotient", "sandwich_upper", q.mean <= p.upper.mean + SIGMA_THRESHOLD * se_up, q.mean, p.upper.mean, SIGMA_THRESHOLD)
                    .with_stderr(se_up)
                    .with_detail("value <= target + 3 sigma (joint error)"),
            ));
            items.insert(0, ResultItem::Sharpness(p));
            "sharpness1d"
        }
        Family::Slater => {
            let (d, n) = (required(a.d, "d", "slater")?, required(a.n, "N", "slater")?);
            report = report.param("d", d).param("N", n);
            let u = slater_gaussian(d, n, &default_slater_centers(d, n))?;
            let r = fermi_quotient(&u, mc)?;
            items.push(ResultItem::Quotient { name: "slater".into(), labels: labels(Some(d), Some(n)), result: r });
            "slater"
        }
        Family::Odd => {
            let d = required(a.d, "d", "odd")?;
            report = report.param("d", d);
            let r = odd_quotient(&odd_gaussian(d)?, s.seed)?;
            let l = labels(Some(d), Some(1));
            for (name, value) in [("odd.kinetic", r.kinetic), ("odd.weighted_mass", r.weighted_mass), ("odd.quotient", r.quotient)] {
                items.push(ResultItem::Value { name: name.into(), labels: l.clone(), value });
            }
            let floor = (d * d) as f64 / 4.0;
            items.push(ResultItem::Check(
                CheckOutcome::new("quotient", "odd_bound", r.quotient >= floor - 1e-10, r.quotient, floor, 1e-10)
                    .with_detail(format!("value >= target - tolerance; quadrature refinement change {:e}", r.last_delta)),
            ));
            "odd"
        }
        Family::Abmode => {
            let alpha_s = required(a.alpha.clone(), "alpha", "abmode")?;
            let alpha = match parse_flux(&alpha_s)? {
                Flux::Rational(r) => r.to_f64(),
                Flux::Real(v) => v,
            };
            let profile = match a.profile {
                Profile::PowerExp => RadialProfile::PowerExp { beta: a.beta, gamma: a.gamma },
                Profile::LogPlateau => RadialProfile::LogPlateau { radius: a.radius, width: a.width },
            };
            report = report.param("alpha", &alpha_s).param("m", a.m).param("profile", profile);
            let r = ab_mode_quotient(alpha, &ab_mode(a.m, profile)?)?;
            let l = Labels { d: Some(2), n: Some(1), alpha: Some(alpha_s) };
            for (name, value) in [("abmode.quotient", r.value), ("abmode.angular", r.angular), ("abmode.radial", r.radial), ("abmode.floor", r.floor)] {
                items.push(ResultItem::Value { name: name.into(), labels: l.clone(), value });
            }
            items.push(ResultItem::Check(
                CheckOutcome::new("quotient", "ab_mode_bound", r.value >= r.floor - 1e-10, r.value, r.floor, 1e-10)
                    .with_detail("value >= target - tolerance"),
            ));
            "abmode"
        }
    };
    report = report.param("family", family).param("samples", s.samples).param("chunk_size", s.chunk_size);
    let bound_pass = items.iter().all(|i| match i {
        ResultItem::Quotient { result, .. } => result.bound_checked.as_ref().is_none_or(|b| b.pass),
        ResultItem::Check(c) => c.pass,
        _ => true,
    });
    report.suite_pass = Some(bound_pass);
    report.results = items;
    Ok(report)
}

pub fn optimize(a: &OptimizeArgs) -> Result<RunReport, Failure> {
    let mut report = RunReport::new("optimize", VERSION).param("d", a.d);
    report.seed = Some(a.seed);
    let trace = match a.target {
        Target::K => {
            let defaults = KConfig::default();
            let cfg = KConfig { iters: a.iters.unwrap_or(defaults.iters), restarts: a.restarts, seed: a.seed, ..defaults };
            if cfg.restarts == 0 || cfg.iters == 0 {
                return Err(Failure::Usage("--iters and --restarts must be positive".into()));
            }
            report = report.param("target", "K").param("atoms", a.atoms).param("iters", cfg.iters).param("restarts", cfg.restarts);
            let r = maximize_k(a.d, a.atoms, &cfg, None)?;
            let trace = r.trace.clone();
            report.results.push(ResultItem::CurvatureSearch(r));
            trace
        }
        Target::Quotient => {
            let n = a.n.ok_or_else(|| Failure::Usage("--N is required for --target quotient".into()))?;
            check_sampling(a.samples, a.chunk_size)?;
            if a.d < 3 || n < 2 {
                return Err(Failure::Usage("the Gaussian pair quotient needs d >= 3 and N >= 2".into()));
            }
            let (family, initial) = match a.family {
                SearchFamily::Gaussian => (QuotientFamily::GaussianScale, vec![0.0]),
                SearchFamily::GaussianCenters => {
                    (QuotientFamily::GaussianCenters, default_slater_centers(a.d, n).coords().iter().map(|c| 0.1 * c).collect())
                }
            };
            let budget = a.iters.unwrap_or(40);
            let mc = McParams::new(a.samples, a.seed).with_chunk_size(a.chunk_size);
            report = report
                .param("target", "quotient")
                .param("family", family)
                .param("N", n)
                .param("iters", budget)
                .param("samples", a.samples)
                .param("chunk_size", a.chunk_size);
            let r = minimize_quotient(family, a.d, n, &initial, budget, mc)?;
            let q = r.result.quotient;
            let upper = gaussian_upper_bound(a.d, n)?;
            let trace = r.trace.clone();
            report.results.push(ResultItem::QuotientSearch(r));
            report.results.push(ResultItem::Check(
                CheckOutcome::new("optimize", "below_gaussian_upper_bound", q.value() <= upper + SIGMA_THRESHOLD * q.stderr(), q.value(), upper, SIGMA_THRESHOLD)
                    .with_stderr(q.stderr())
                    .with_detail("value <= target + 3 sigma"),
            ));
            report.suite_pass = Some(all_pass(&report.results));
            trace
        }
    };
    if let Some(path) = &a.out {
        write_trace(path, &trace).map_err(|e| Failure::Check(format!("cannot write {}: {e}", path.display())))?;
        report = report.param("out", path.display().to_string());
    }
    Ok(report)
}

fn write_trace(path: &std::path::Path, trace: &[f64]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "best"])?;
    for (i, v) in trace.iter().enumerate() {
        w.write_record([i.to_string(), format!("{v:.17e}")])?;
    }
    w.flush()?;
    Ok(())
}
