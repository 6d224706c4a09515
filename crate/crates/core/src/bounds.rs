//! Closed-form constants for the Hardy-type inequalities.
//!
//! `C(d,N)` denotes the best constant in
//! `∫|∇u|² ≥ C(d,N) Σ_{i<j} ∫|u|²/r_ij²` on `R^{dN}`. Lower bounds come from
//! the vector-field method; upper bounds from Gaussian product trial
//! functions. Every value can be packaged as a [`BoundReport`].

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
    Exact,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Lower => "lower",
            Self::Upper => "upper",
            Self::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub d: Option<usize>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub alpha: Option<String>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
}

/// A named constant with the formula it evaluates.
///
/// `value` is `None` when the constant does not apply to the requested
/// parameters (for instance the non-fermionic bounds in `d ≤ 2`); `note`
/// then says why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub value: Option<f64>,
    pub kind: BoundKind,
    pub params: BoundParams,
    pub formula: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    fn new(name: &str, value: f64, kind: BoundKind, params: BoundParams, formula: &str) -> Self {
        Self {
            name: name.into(),
            value: Some(value),
            kind,
            params,
            formula: formula.into(),
            note: None,
        }
    }

    fn inapplicable(name: &str, kind: BoundKind, params: BoundParams, formula: &str, why: &str) -> Self {
        Self {
            name: name.into(),
            value: None,
            kind,
            params,
            formula: formula.into(),
            note: Some(why.into()),
        }
    }
}

fn need_d3(d: usize) -> Result<()> {
    if d < 3 {
        Err(Error::Domain(format!("d = {d}; this constant needs d ≥ 3")))
    } else {
        Ok(())
    }
}

fn need_n2(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::Domain(format!("N = {n}; at least two particles are needed")))
    } else {
        Ok(())
    }
}

/// `Γ(d/2)` for a positive integer `d` by the half-integer recursion
/// `Γ(1/2) = √π`, `Γ(1) = 1`, `Γ(x+1) = xΓ(x)`.
pub fn gamma_half(d: usize) -> f64 {
    assert!(d > 0, "Γ(0) is undefined");
    let (mut x, mut g) = if d % 2 == 0 { (1.0, 1.0) } else { (0.5, std::f64::consts::PI.sqrt()) };
    while x < d as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area `|S^{d−1}| = 2π^{d/2}/Γ(d/2)` of the unit sphere in `R^d`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// Which term attains the maximum in [`hardy_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBranch {
    /// `1/N`
    Counting,
    /// `1/(1 + √(1 + 3(d−2)²(N−1)(N−2)/(2(d−1)²)))`
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    pub branch: LowerBranch,
}

/// `(d−2)² · max{1/N, 1/(1+√(1+3(d−2)²(N−1)(N−2)/(2(d−1)²)))}` for `d ≥ 3`, `N ≥ 2`.
///
/// Ties (always the case at `N = 2`) report [`LowerBranch::Counting`].
pub fn hardy_lower_bound(d: usize, n: usize) -> Result<LowerBound> {
    need_d3(d)?;
    need_n2(n)?;
    let (df, nf) = (d as f64, n as f64);
    let counting = 1.0 / nf;
    let ell = 3.0 * (nf - 1.0) * (nf - 2.0) / (2.0 * (df - 1.0).powi(2));
    let quadratic = case_b_bound(d, ell)? / (df - 2.0).powi(2);
    let (v, branch) = if quadratic > counting {
        (quadratic, LowerBranch::Quadratic)
    } else {
        (counting, LowerBranch::Counting)
    };
    Ok(LowerBound { value: (df - 2.0).powi(2) * v, branch })
}

/// The pairwise-summed bound `(d−2)²/(2N−2)`.
pub fn naive_bound(d: usize, n: usize) -> Result<f64> {
    need_d3(d)?;
    need_n2(n)?;
    Ok(((d - 2) * (d - 2)) as f64 / (2 * n - 2) as f64)
}

/// Antisymmetric functions: `d²/N`, valid in every dimension.
pub fn fermi_bound(d: usize, n: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("d must be positive".into()));
    }
    need_n2(n)?;
    Ok((d * d) as f64 / n as f64)
}

/// The sharp constant `1/2` for particles on the line.
pub const fn one_d_constant() -> f64 {
    0.5
}

/// Closed-form value `(d/4)·π^{d/2}·Γ(d/2)` used as an upper estimate for
///
/// `D(d) = inf_φ ∫|∇φ|² ∫|φ|² / ∫∫ |φ(x)|²|φ(y)|²/|x−y|²`.
///
/// It assembles the Gaussian kinetic and mass integrals with the pair
/// integral taken as `|S^{d−1}|`. The actual Gaussian pair integral is
/// `π^d/(d−2)` (see [`gaussian_pair_integral`]), so this value exceeds the
/// Gaussian Rayleigh value [`gaussian_rayleigh_dd`] and remains a valid,
/// if loose, upper bound on `D(d)`.
pub fn gaussian_dd(d: usize) -> Result<f64> {
    need_d3(d)?;
    let df = d as f64;
    Ok(df / 4.0 * std::f64::consts::PI.powf(df / 2.0) * gamma_half(d))
}

/// `∫|φ|²` for `φ = e^{−|x|²/2}`: `π^{d/2}`.
pub fn gaussian_mass(d: usize) -> f64 {
    std::f64::consts::PI.powf(d as f64 / 2.0)
}

/// `∫|∇φ|²` for `φ = e^{−|x|²/2}`: `(d/2)·π^{d/2}`.
pub fn gaussian_kinetic(d: usize) -> f64 {
    d as f64 / 2.0 * gaussian_mass(d)
}

/// `∫∫ |φ(x)|²|φ(y)|²/|x−y|²` for `φ = e^{−|x|²/2}`: `π^d/(d−2)`, finite for `d ≥ 3`.
///
/// `x − y` is a standard normal vector under the normalized product density,
/// and `E|Z|^{−2} = 1/(d−2)` for `Z ~ N(0, I_d)`.
pub fn gaussian_pair_integral(d: usize) -> Result<f64> {
    need_d3(d)?;
    Ok(std::f64::consts::PI.powi(d as i32) / (d as f64 - 2.0))
}

/// Rayleigh value of `φ = e^{−|x|²/2}` for `D(d)`: `d(d−2)/2`.
pub fn gaussian_rayleigh_dd(d: usize) -> Result<f64> {
    Ok(gaussian_kinetic(d) * gaussian_mass(d) / gaussian_pair_integral(d)?)
}

/// `C(d,N) ≤ 2·D(d)/(N−1)` evaluated with [`gaussian_dd`].
pub fn gaussian_upper_bound(d: usize, n: usize) -> Result<f64> {
    need_n2(n)?;
    Ok(2.0 * gaussian_dd(d)? / (n - 1) as f64)
}

/// `C(d,N) ≤ 2·D(d)/(N−1)` evaluated with [`gaussian_rayleigh_dd`], i.e. `d(d−2)/(N−1)`,
/// the exact Rayleigh quotient of the isotropic Gaussian product.
pub fn gaussian_trial_upper_bound(d: usize, n: usize) -> Result<f64> {
    need_n2(n)?;
    need_d3(d)?;
    Ok((d * (d - 2)) as f64 / (n - 1) as f64)
}

/// Limit bound `lim N·C(d,N) ≥ (d−2)²/(2+K)` for a curvature ratio `K ≥ 0`.
pub fn k_asymptotic_bound(d: usize, k: f64) -> Result<f64> {
    need_d3(d)?;
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("K = {k} must be nonnegative")));
    }
    Ok(((d - 2) * (d - 2)) as f64 / (2.0 + k))
}

/// Root of `X² − 2XT/(d−2)² − ℓT²/(d−2)² = 0` in the ratio `T/X`:
/// `(d−2)²/(1 + √(1 + ℓ(d−2)²))`.
pub fn case_b_bound(d: usize, ell: f64) -> Result<f64> {
    need_d3(d)?;
    if !(ell >= 0.0) {
        return Err(Error::Domain(format!("ℓ = {ell} must be nonnegative")));
    }
    let a = ((d - 2) * (d - 2)) as f64;
    Ok(a / (1.0 + (1.0 + ell * a).sqrt()))
}

/// A magnetic flux `p/q` in lowest terms with `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RationalFlux {
    p: i64,
    q: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

impl RationalFlux {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidInput("flux denominator is zero".into()));
        }
        let g = gcd(p, q).max(1);
        let s = q.signum();
        Ok(Self { p: s * p / g, q: s * q / g })
    }

    pub fn numer(&self) -> i64 {
        self.p
    }

    pub fn denom(&self) -> i64 {
        self.q
    }

    pub fn to_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for RationalFlux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

impl FromStr for RationalFlux {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("'{s}' is not a rational p/q"));
        match s.split_once('/') {
            Some((p, q)) => Self::new(
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ),
            None => Self::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

/// A flux given either exactly or as a float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Flux {
    Rational(RationalFlux),
    Real(f64),
}

impl Flux {
    /// `p/q` (or a bare integer) is exact; anything with a decimal point or
    /// exponent goes to the float path.
    pub fn parse(s: &str) -> Result<Self> {
        if s.contains('/') || s.trim().parse::<i64>().is_ok() {
            return s.parse().map(Self::Rational);
        }
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("'{s}' is not a flux value")))?;
        if !v.is_finite() {
            return Err(Error::InvalidInput("flux must be finite".into()));
        }
        Ok(Self::Real(v))
    }
}

impl fmt::Display for Flux {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Rational(r) => r.fmt(f),
            Self::Real(v) => v.fmt(f),
        }
    }
}

/// `D_{N,α} = min_{l=1..N−1} (min_{k∈Z} |k − lα| / l)²` in exact arithmetic.
///
/// For `α = p/q`, `min_k |k − lp/q| = min(m, q−m)/q` with `m = lp mod q`.
pub fn magnetic_constant_exact(n: usize, alpha: RationalFlux) -> Result<Ratio<i128>> {
    need_n2(n)?;
    let (p, q) = (alpha.p as i128, alpha.q as i128);
    let mut best: Option<Ratio<i128>> = None;
    for l in 1..n as i128 {
        let m = (l * p).rem_euclid(q);
        let dist = m.min(q - m);
        let v = Ratio::new(dist * dist, q * q * l * l);
        best = Some(match best {
            Some(b) if b <= v => b,
            _ => v,
        });
    }
    Ok(best.expect("N ≥ 2 gives at least one l"))
}

/// Float version of [`magnetic_constant_exact`], scanning `k ∈ [⌊lα⌋−1, ⌈lα⌉+1]`.
pub fn magnetic_constant_float(n: usize, alpha: f64) -> Result<f64> {
    need_n2(n)?;
    let mut best = f64::INFINITY;
    for l in 1..n {
        let la = l as f64 * alpha;
        let lo = la.floor() as i64 - 1;
        let hi = la.ceil() as i64 + 1;
        let dist = (lo..=hi).map(|k| (k as f64 - la).abs()).fold(f64::INFINITY, f64::min);
        best = best.min((dist / l as f64).powi(2));
    }
    Ok(best)
}

pub fn magnetic_constant(n: usize, alpha: Flux) -> Result<f64> {
    match alpha {
        Flux::Rational(r) => {
            let v = magnetic_constant_exact(n, r)?;
            Ok(*v.numer() as f64 / *v.denom() as f64)
        }
        Flux::Real(a) => magnetic_constant_float(n, a),
    }
}

/// The rows emitted by the `bounds` command.
///
/// Non-fermionic constants need `d ≥ 3`; below that they appear with
/// `value = None` because no such inequality holds for general functions.
pub fn bound_table(d: usize, n: usize, alpha: Option<Flux>, k: Option<f64>) -> Result<Vec<BoundReport>> {
    if d == 0 {
        return Err(Error::Domain("d must be positive".into()));
    }
    need_n2(n)?;
    let params = BoundParams { d: Some(d), n: Some(n), alpha: None, k: None };
    let mut rows = Vec::new();
    const LOWER: &str = "(d-2)^2 * max{1/N, 1/(1+sqrt(1+3(d-2)^2(N-1)(N-2)/(2(d-1)^2)))}";
    const NAIVE: &str = "(d-2)^2/(2N-2)";
    const UPPER: &str = "2*D(d)/(N-1), D(d) = (d/4) pi^(d/2) Gamma(d/2)";
    const TRIAL: &str = "d(d-2)/(N-1), Rayleigh quotient of the isotropic Gaussian product";
    const WHY: &str = "no Hardy inequality of this type holds for general functions when d <= 2";
    if d >= 3 {
        let lb = hardy_lower_bound(d, n)?;
        rows.push(BoundReport::new("hardy_lower_bound", lb.value, BoundKind::Lower, params.clone(), LOWER));
        rows.push(BoundReport::new("naive_bound", naive_bound(d, n)?, BoundKind::Lower, params.clone(), NAIVE));
        rows.push(BoundReport::new(
            "gaussian_upper_bound",
            gaussian_upper_bound(d, n)?,
            BoundKind::Upper,
            params.clone(),
            UPPER,
        ));
        rows.push(BoundReport::new(
            "gaussian_trial_upper_bound",
            gaussian_trial_upper_bound(d, n)?,
            BoundKind::Upper,
            params.clone(),
            TRIAL,
        ));
    } else {
        for (name, kind, formula) in [
            ("hardy_lower_bound", BoundKind::Lower, LOWER),
            ("naive_bound", BoundKind::Lower, NAIVE),
            ("gaussian_upper_bound", BoundKind::Upper, UPPER),
            ("gaussian_trial_upper_bound", BoundKind::Upper, TRIAL),
        ] {
            rows.push(BoundReport::inapplicable(name, kind, params.clone(), formula, WHY));
        }
    }
    rows.push(BoundReport::new(
        "fermi_bound",
        fermi_bound(d, n)?,
        BoundKind::Lower,
        params.clone(),
        "d^2/N for antisymmetric functions",
    ));
    if d == 1 {
        rows.push(BoundReport::new(
            "one_d_constant",
            one_d_constant(),
            BoundKind::Exact,
            params.clone(),
            "1/2, sharp for particles on the line",
        ));
    }
    if let Some(a) = alpha {
        let p = BoundParams { alpha: Some(a.to_string()), ..params.clone() };
        rows.push(BoundReport::new(
            "magnetic_constant",
            magnetic_constant(n, a)?,
            BoundKind::Lower,
            p,
            "min_{l=1..N-1} (min_k |k - l*alpha| / l)^2",
        ));
    }
    if let Some(kv) = k {
        let p = BoundParams { k: Some(kv), ..params.clone() };
        if d >= 3 {
            rows.push(BoundReport::new(
                "k_asymptotic_bound",
                k_asymptotic_bound(d, kv)?,
                BoundKind::Lower,
                p,
                "lim N*C(d,N) >= (d-2)^2/(2+K)",
            ));
        } else {
            rows.push(BoundReport::inapplicable(
                "k_asymptotic_bound",
                BoundKind::Lower,
                p,
                "lim N*C(d,N) >= (d-2)^2/(2+K)",
                WHY,
            ));
        }
    }
    Ok(rows)
}
