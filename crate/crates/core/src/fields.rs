//! Vector fields on `R^{dN}` with closed-form divergences and norms.
//!
//! A field value has the same layout as a [`Configuration`]: one `d`-block per
//! particle. Each field accepts a regularization `eps ≥ 0` that replaces the
//! singular denominator `r²` (or `ρ²`) by `r² + eps²`; `eps = 0` is the exact
//! field.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{dist_sq, pair_density, rho_sq, triple_density, Configuration};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldValue {
    dim: usize,
    components: Vec<f64>,
}

impl FieldValue {
    pub fn zeros(dim: usize, count: usize) -> Self {
        Self { dim, components: vec![0.0; dim * count] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.components.len() / self.dim
    }

    pub fn block(&self, j: usize) -> &[f64] {
        &self.components[j * self.dim..(j + 1) * self.dim]
    }

    pub fn block_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.components[j * self.dim..(j + 1) * self.dim]
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    /// Squared Euclidean norm, accumulated block by block.
    pub fn norm_sq(&self) -> f64 {
        self.components.iter().map(|c| c * c).sum()
    }
}

fn regularized(r2: f64, eps: f64, (i, j): (usize, usize)) -> Result<f64> {
    let den = r2 + eps * eps;
    if den == 0.0 {
        Err(Error::CoincidentPoints(i, j))
    } else {
        Ok(den)
    }
}

/// `F₃`: block `j` is `Σ_{k≠j} (x_j − x_k)/(r_jk² + eps²)`.
pub fn field_f3(config: &Configuration, eps: f64) -> Result<FieldValue> {
    let (n, d) = (config.count(), config.dim());
    let mut out = FieldValue::zeros(d, n);
    for j in 0..n {
        for k in j + 1..n {
            let (xj, xk) = (config.point(j), config.point(k));
            let den = regularized(dist_sq(xj, xk), eps, (j, k))?;
            for c in 0..d {
                let t = (xj[c] - xk[c]) / den;
                out.components[j * d + c] += t;
                out.components[k * d + c] -= t;
            }
        }
    }
    Ok(out)
}

/// `div F₃ = Σ_{i<j} 2(d/(r²+ε²) − 2r²/(r²+ε²)²)`, i.e. `2(d−2)·X` at `eps = 0`.
pub fn field_f3_div(config: &Configuration, eps: f64) -> Result<f64> {
    let (n, d) = (config.count(), config.dim() as f64);
    if eps == 0.0 {
        return Ok(2.0 * (d - 2.0) * pair_density(config)?);
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let r2 = dist_sq(config.point(i), config.point(j));
            let den = regularized(r2, eps, (i, j))?;
            sum += 2.0 * (d / den - 2.0 * r2 / (den * den));
        }
    }
    Ok(sum)
}

/// `|F₃|² = 2·Σ_{i<j} 1/r_ij² + Σ_{i<j<k} 1/R_ijk²` (unregularized field).
pub fn field_f3_norm_sq(config: &Configuration) -> Result<f64> {
    Ok(2.0 * pair_density(config)? + triple_density(config)?)
}

/// The three-particle field `G = (2x₁−x₂−x₃, 2x₂−x₁−x₃, 2x₃−x₁−x₂)/(ρ² + eps²)`.
pub fn field_g(config: &Configuration, eps: f64) -> Result<FieldValue> {
    let (p1, p2, p3) = three_points(config)?;
    let den = rho_sq(p1, p2, p3) + eps * eps;
    if den == 0.0 {
        return Err(Error::CoincidentPoints(0, 1));
    }
    let d = config.dim();
    let mut out = FieldValue::zeros(d, 3);
    for c in 0..d {
        out.components[c] = (2.0 * p1[c] - p2[c] - p3[c]) / den;
        out.components[d + c] = (2.0 * p2[c] - p1[c] - p3[c]) / den;
        out.components[2 * d + c] = (2.0 * p3[c] - p1[c] - p2[c]) / den;
    }
    Ok(out)
}

/// `div G = 6d/(ρ²+ε²) − 6ρ²/(ρ²+ε²)²`, which is `6(d−1)/ρ²` at `eps = 0`.
pub fn field_g_div(config: &Configuration, eps: f64) -> Result<f64> {
    let (p1, p2, p3) = three_points(config)?;
    let r = rho_sq(p1, p2, p3);
    let den = r + eps * eps;
    if den == 0.0 {
        return Err(Error::CoincidentPoints(0, 1));
    }
    let d = config.dim() as f64;
    Ok(6.0 * d / den - 6.0 * r / (den * den))
}

/// `|G|² = 3ρ²/(ρ²+ε²)²`, which is `3/ρ²` at `eps = 0`.
pub fn field_g_norm_sq(config: &Configuration, eps: f64) -> Result<f64> {
    let (p1, p2, p3) = three_points(config)?;
    let r = rho_sq(p1, p2, p3);
    let den = r + eps * eps;
    if den == 0.0 {
        return Err(Error::CoincidentPoints(0, 1));
    }
    Ok(3.0 * r / (den * den))
}

fn three_points(config: &Configuration) -> Result<(&[f64], &[f64], &[f64])> {
    if config.count() != 3 {
        return Err(Error::InvalidInput(format!(
            "G is a three-particle field, got {} particles",
            config.count()
        )));
    }
    Ok((config.point(0), config.point(1), config.point(2)))
}

/// `F₁` for the pair `(j, k)`: `+(x_j−x_k)/r_jk²` in block `j`, the negative in block `k`.
pub fn field_pair(config: &Configuration, j: usize, k: usize, eps: f64) -> Result<FieldValue> {
    let (n, d) = (config.count(), config.dim());
    if j >= n || k >= n || j == k {
        return Err(Error::InvalidInput(format!("invalid pair ({j}, {k}) for {n} particles")));
    }
    let (xj, xk) = (config.point(j), config.point(k));
    let den = regularized(dist_sq(xj, xk), eps, (j, k))?;
    let mut out = FieldValue::zeros(d, n);
    for c in 0..d {
        let t = (xj[c] - xk[c]) / den;
        out.components[j * d + c] = t;
        out.components[k * d + c] = -t;
    }
    Ok(out)
}

/// `div F₁ = 2(d−2)/r_jk²` (unregularized).
pub fn field_pair_div(config: &Configuration, j: usize, k: usize) -> Result<f64> {
    let r2 = dist_sq(config.point(j), config.point(k));
    if r2 == 0.0 {
        return Err(Error::CoincidentPoints(j, k));
    }
    Ok(2.0 * (config.dim() as f64 - 2.0) / r2)
}

/// Center-of-mass field: every block equals `S/(N·(|S|² + eps²))` with `S = Σ_j x_j`.
///
/// With this normalization `div = (d−2)/|S|²` and `|F|² = 1/(N|S|²)`.
pub fn field_center(config: &Configuration, eps: f64) -> Result<FieldValue> {
    let (n, d) = (config.count(), config.dim());
    let s = center_sum(config);
    let den = s.iter().map(|c| c * c).sum::<f64>() + eps * eps;
    if den == 0.0 {
        return Err(Error::InvalidInput("coordinate sum vanishes".into()));
    }
    let mut out = FieldValue::zeros(d, n);
    for j in 0..n {
        for c in 0..d {
            out.components[j * d + c] = s[c] / (n as f64 * den);
        }
    }
    Ok(out)
}

pub fn field_center_div(config: &Configuration) -> Result<f64> {
    let s2: f64 = center_sum(config).iter().map(|c| c * c).sum();
    if s2 == 0.0 {
        return Err(Error::InvalidInput("coordinate sum vanishes".into()));
    }
    Ok((config.dim() as f64 - 2.0) / s2)
}

fn center_sum(config: &Configuration) -> Vec<f64> {
    let mut s = vec![0.0; config.dim()];
    for p in config.points() {
        for (acc, x) in s.iter_mut().zip(p) {
            *acc += x;
        }
    }
    s
}

/// Point-singularity field `x/(|x|² + eps²)` on the whole of `R^{dN}`.
pub fn field_radial(config: &Configuration, eps: f64) -> Result<FieldValue> {
    let den = config.norm().powi(2) + eps * eps;
    if den == 0.0 {
        return Err(Error::InvalidInput("radial field is singular at the origin".into()));
    }
    Ok(FieldValue {
        dim: config.dim(),
        components: config.coords().iter().map(|c| c / den).collect(),
    })
}

/// `div = m/(|x|²+ε²) − 2|x|²/(|x|²+ε²)²` with `m = dN`.
pub fn field_radial_div(config: &Configuration, eps: f64) -> Result<f64> {
    let r2 = config.norm().powi(2);
    let den = r2 + eps * eps;
    if den == 0.0 {
        return Err(Error::InvalidInput("radial field is singular at the origin".into()));
    }
    let m = config.coords().len() as f64;
    Ok(m / den - 2.0 * r2 / (den * den))
}

/// Aharonov–Bohm potential on `N` planar particles:
/// `F_j = α(−Σ_k (x_j2−x_k2)/r_jk², Σ_k (x_j1−x_k1)/r_jk²)`, i.e. `α` times
/// the 90° rotation of each `F₃` block.
pub fn ab_field(config: &Configuration, alpha: f64) -> Result<FieldValue> {
    if config.dim() != 2 {
        return Err(Error::InvalidInput("the Aharonov–Bohm field is planar".into()));
    }
    let f3 = field_f3(config, 0.0)?;
    let mut out = FieldValue::zeros(2, config.count());
    for j in 0..config.count() {
        let b = f3.block(j);
        out.components[2 * j] = -alpha * b[1];
        out.components[2 * j + 1] = alpha * b[0];
    }
    Ok(out)
}

/// Both sides of `Σ_j |Σ_{k≠j} 1/(z_j−z_k)|² = 2·Σ_{i<j} 1/r_ij² + Σ_{i<j<k} 1/R_ijk²`.
///
/// The left side is evaluated in complex arithmetic, the right side from the
/// unordered geometric kernels. Per unordered triple the ordered cross terms
/// `(k,l)`, `k≠l`, summed over the three choices of `j` give `2·b_jkl = 1/R²`.
pub fn complex_sum_identity(config: &Configuration) -> Result<(f64, f64)> {
    if config.dim() != 2 {
        return Err(Error::InvalidInput("the complex-sum identity is planar".into()));
    }
    config.check_distinct()?;
    let z: Vec<Complex64> = config.points().map(|p| Complex64::new(p[0], p[1])).collect();
    let lhs = z
        .iter()
        .enumerate()
        .map(|(j, zj)| {
            z.iter()
                .enumerate()
                .filter(|(k, _)| *k != j)
                .map(|(_, zk)| (zj - zk).inv())
                .sum::<Complex64>()
                .norm_sqr()
        })
        .sum();
    let rhs = 2.0 * pair_density(config)? + triple_density(config)?;
    Ok((lhs, rhs))
}

/// Central-difference divergence over all `N·d` coordinates.
///
/// Error is `O(h²)` for smooth fields. Returns [`Error::SingularStencil`] when
/// the field cannot be evaluated at a stencil point.
pub fn fd_divergence<F>(field: F, config: &Configuration, h: f64) -> Result<f64>
where
    F: Fn(&Configuration) -> Result<FieldValue>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    let mut x = config.clone();
    let mut div = 0.0;
    for idx in 0..config.coords().len() {
        let orig = x.coords()[idx];
        x.coords_mut()[idx] = orig + h;
        let plus = field(&x).map_err(|_| Error::SingularStencil)?.components[idx];
        x.coords_mut()[idx] = orig - h;
        let minus = field(&x).map_err(|_| Error::SingularStencil)?.components[idx];
        x.coords_mut()[idx] = orig;
        div += (plus - minus) / (2.0 * h);
    }
    Ok(div)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn f3_two_particles() {
        let c = Configuration::from_points(&[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]).unwrap();
        let f = field_f3(&c, 0.0).unwrap();
        assert_eq!(f.block(0), &[0.5, 0.0, 0.0]);
        assert_eq!(f.block(1), &[-0.5, 0.0, 0.0]);
    }

    #[test]
    fn f3_equilateral_points_outward() {
        let s = 3f64.sqrt();
        let c = Configuration::from_points(&[[1.0, 0.0], [-0.5, s / 2.0], [-0.5, -s / 2.0]])
            .unwrap();
        let f = field_f3(&c, 0.0).unwrap();
        for j in 0..3 {
            let (b, p) = (f.block(j), c.point(j));
            let cross = b[0] * p[1] - b[1] * p[0];
            assert!(cross.abs() < 1e-14);
            assert!(b[0] * p[0] + b[1] * p[1] > 0.0);
        }
    }

    #[test]
    fn f3_divergence_vanishes_in_the_plane() {
        let c = Configuration::from_points(&[[0.1, 0.3], [1.2, -0.4], [0.7, 2.0]]).unwrap();
        assert_eq!(field_f3_div(&c, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn f3_norm_in_one_dimension_has_no_triple_term() {
        let c = Configuration::new(1, vec![0.2, -1.0, 3.5, 0.9]).unwrap();
        assert_eq!(field_f3_norm_sq(&c).unwrap(), 2.0 * pair_density(&c).unwrap());
        let direct = field_f3(&c, 0.0).unwrap().norm_sq();
        assert_relative_eq!(direct, field_f3_norm_sq(&c).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn regularized_f3_divergence_matches_fd() {
        let c = Configuration::from_points(&[[0.1, 0.3, 0.0], [0.2, -0.1, 0.3], [0.0, 0.0, 0.05]])
            .unwrap();
        let eps = 0.2;
        let fd = fd_divergence(|x| field_f3(x, eps), &c, 1e-4).unwrap();
        assert_relative_eq!(fd, field_f3_div(&c, eps).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn g_centered_equilateral() {
        let s = 3f64.sqrt();
        let c = Configuration::from_points(&[[1.0, 0.0], [-0.5, s / 2.0], [-0.5, -s / 2.0]])
            .unwrap();
        let rho2 = rho_sq(c.point(0), c.point(1), c.point(2));
        let g = field_g(&c, 0.0).unwrap();
        for j in 0..3 {
            for k in 0..2 {
                assert_relative_eq!(g.block(j)[k], 3.0 * c.point(j)[k] / rho2, epsilon = 1e-15);
            }
        }
        assert!(field_g(&Configuration::new(2, vec![1.0; 6]).unwrap(), 0.0).is_err());
    }

    #[test]
    fn regularized_g_closed_forms() {
        let c = Configuration::from_points(&[[0.1, 0.3], [1.2, -0.4], [0.7, 2.0]]).unwrap();
        let eps = 0.7;
        let fd = fd_divergence(|x| field_g(x, eps), &c, 1e-4).unwrap();
        assert_relative_eq!(fd, field_g_div(&c, eps).unwrap(), max_relative = 1e-7);
        assert_relative_eq!(
            field_g(&c, eps).unwrap().norm_sq(),
            field_g_norm_sq(&c, eps).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn pair_and_center_fields() {
        let c = Configuration::from_points(&[[1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        let f = field_pair(&c, 0, 1, 0.0).unwrap();
        assert_eq!(f.block(0), &[1.0, 0.0, 0.0]);
        assert_eq!(f.block(1), &[-1.0, 0.0, 0.0]);
        assert!(field_pair(&c, 1, 1, 0.0).is_err());

        let c = Configuration::from_points(&[[1.5, 0.0], [0.5, 0.0]]).unwrap();
        let f = field_center(&c, 0.0).unwrap();
        assert_eq!(f.block(0), &[0.25, 0.0]);
        assert_eq!(f.block(1), &[0.25, 0.0]);
        let fd = fd_divergence(|x| field_center(x, 0.0), &c, 1e-4).unwrap();
        assert_relative_eq!(fd, field_center_div(&c).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn center_field_is_not_translation_invariant() {
        let c = Configuration::from_points(&[[1.0, 0.2, 0.0], [0.5, -1.0, 0.3]]).unwrap();
        let shifted = Configuration::from_points(&[[2.0, 0.2, 0.0], [1.5, -1.0, 0.3]]).unwrap();
        assert_ne!(field_center(&c, 0.0).unwrap(), field_center(&shifted, 0.0).unwrap());
        let a = field_f3(&c, 0.0).unwrap();
        let b = field_f3(&shifted, 0.0).unwrap();
        for (x, y) in a.components().iter().zip(b.components()) {
            assert_relative_eq!(x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn ab_field_examples() {
        let c = Configuration::from_points(&[[1.0, 0.0], [-1.0, 0.0]]).unwrap();
        let f = ab_field(&c, 1.0).unwrap();
        assert_eq!(f.block(0), &[0.0, 0.5]);
        assert_eq!(f.block(1), &[0.0, -0.5]);
        assert!(ab_field(&c, 0.0).unwrap().components().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn complex_identity_small_cases() {
        let c = Configuration::from_points(&[[0.0, 0.0], [0.0, 2.0]]).unwrap();
        let (l, r) = complex_sum_identity(&c).unwrap();
        assert_relative_eq!(l, 0.5, epsilon = 1e-15);
        assert_relative_eq!(r, 0.5, epsilon = 1e-15);
        let c = Configuration::from_points(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]).unwrap();
        assert_eq!(triple_density(&c).unwrap(), 0.0);
        let (l, r) = complex_sum_identity(&c).unwrap();
        assert_relative_eq!(l, r, max_relative = 1e-14);
    }

    #[test]
    fn fd_divergence_of_identity_field() {
        let c = Configuration::new(3, vec![0.3, -0.2, 1.0, 2.0, 0.5, -0.7]).unwrap();
        let id = |x: &Configuration| {
            Ok(FieldValue { dim: x.dim(), components: x.coords().to_vec() })
        };
        assert_relative_eq!(fd_divergence(id, &c, 1e-3).unwrap(), 6.0, epsilon = 1e-10);
        assert!(fd_divergence(id, &c, 0.0).is_err());
    }
}
