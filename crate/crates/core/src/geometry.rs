//! Pair-distance and circumradius kernels.
//!
//! Every kernel is dimension agnostic: a configuration in `R^1` is handled by
//! the same code as one in `R^5`.
//!
//! Conventions: all sums over particles are unordered (`i<j`, `i<j<k`).
//! Collinear triples have infinite circumradius, so `1/R² = 0`. Coincident
//! points are an error because the densities genuinely diverge there.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative threshold below which `1/R²` is treated as an exact zero.
pub const COLLINEAR_CLAMP: f64 = 1e-14;

/// `N` points in `R^d`, stored row-major (`coords[i*d + k]` is `x_{i,k}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    dim: usize,
    coords: Vec<f64>,
}

impl Configuration {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::InvalidInput(format!(
                "{} coordinates do not form points of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("coordinates must be finite".into()));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points
            .first()
            .map(|p| p.as_ref().len())
            .ok_or_else(|| Error::InvalidInput("no points".into()))?;
        if points.iter().any(|p| p.as_ref().len() != dim) {
            return Err(Error::InvalidInput("points of mixed dimension".into()));
        }
        Self::new(dim, points.iter().flat_map(|p| p.as_ref().iter().copied()).collect())
    }

    /// Builds a configuration without validation; for hot loops that already
    /// guarantee the layout.
    pub(crate) fn from_raw(dim: usize, coords: Vec<f64>) -> Self {
        debug_assert!(dim > 0 && coords.len() % dim == 0);
        Self { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Multiplies every coordinate by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self::from_raw(self.dim, self.coords.iter().map(|c| c * lambda).collect())
    }

    /// Euclidean norm of the whole configuration as a vector of `R^{dN}`.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Largest pairwise distance.
    pub fn diameter(&self) -> f64 {
        let n = self.count();
        let mut best = 0.0_f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(dist_sq(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }

    /// Smallest pairwise distance, `+∞` for a single point.
    pub fn min_pair_distance(&self) -> f64 {
        let n = self.count();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                best = best.min(dist_sq(self.point(i), self.point(j)));
            }
        }
        best.sqrt()
    }

    /// Returns the first coincident pair, if any.
    pub fn check_distinct(&self) -> Result<()> {
        let n = self.count();
        for i in 0..n {
            for j in i + 1..n {
                if dist_sq(self.point(i), self.point(j)) == 0.0 {
                    return Err(Error::CoincidentPoints(i, j));
                }
            }
        }
        Ok(())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Side lengths, circumradius and Menger term of a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleMetrics {
    /// Squared side lengths opposite to the first, second and third vertex.
    pub side_sq: [f64; 3],
    /// `1/R²`; zero iff the triangle is degenerate.
    pub inv_circum_sq: f64,
    /// `b_ijk`, equal to `inv_circum_sq / 2` for `d ≥ 2`.
    pub menger_b: f64,
}

impl TriangleMetrics {
    pub fn new(p1: &[f64], p2: &[f64], p3: &[f64]) -> Result<Self> {
        Ok(Self {
            side_sq: [dist_sq(p2, p3), dist_sq(p1, p3), dist_sq(p1, p2)],
            inv_circum_sq: circumradius_inv_sq(p1, p2, p3)?,
            menger_b: menger_b(p1, p2, p3)?,
        })
    }
}

fn check_triangle(p1: &[f64], p2: &[f64], p3: &[f64]) -> Result<[f64; 3]> {
    let c2 = dist_sq(p1, p2);
    let b2 = dist_sq(p1, p3);
    let a2 = dist_sq(p2, p3);
    if c2 == 0.0 {
        return Err(Error::CoincidentPoints(0, 1));
    }
    if b2 == 0.0 {
        return Err(Error::CoincidentPoints(0, 2));
    }
    if a2 == 0.0 {
        return Err(Error::CoincidentPoints(1, 2));
    }
    Ok([a2, b2, c2])
}

/// `1/R²` for the triangle `p1 p2 p3`, computed as `16·Area²/(a²b²c²)`.
///
/// The area comes from the cancellation-free arrangement of Heron's formula
/// with sides sorted `a ≥ b ≥ c`. Values below
/// `COLLINEAR_CLAMP / max(a², b², c²)` are clamped to zero. On the line every
/// triple is collinear and the result is exactly `0`; Heron's rounding error
/// on slivers would otherwise leak through the clamp.
pub fn circumradius_inv_sq(p1: &[f64], p2: &[f64], p3: &[f64]) -> Result<f64> {
    let sq = check_triangle(p1, p2, p3)?;
    if p1.len() == 1 {
        return Ok(0.0);
    }
    let mut s = [sq[0].sqrt(), sq[1].sqrt(), sq[2].sqrt()];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let area16 = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    let area16 = area16.max(0.0);
    let inv = area16 / (sq[0] * sq[1] * sq[2]);
    if inv < COLLINEAR_CLAMP / (a * a) {
        Ok(0.0)
    } else {
        Ok(inv)
    }
}

/// The Menger term
/// `b = <x_i−x_j, x_i−x_k>/(r_ij² r_ik²) + <x_j−x_i, x_j−x_k>/(r_ij² r_jk²) + <x_k−x_i, x_k−x_j>/(r_ik² r_jk²)`.
///
/// Evaluated through the equivalent reduced form
/// `2(|a|²|b|² − (a·b)²)/(|a|²|b|²|a−b|²)` with `a = x_i−x_j`, `b = x_i−x_k`,
/// where the numerator uses the Lagrange identity `Σ_{k<l}(a_k b_l − a_l b_k)²`.
/// That sum is empty in one dimension, so `b ≡ 0` there without a special case.
pub fn menger_b(p1: &[f64], p2: &[f64], p3: &[f64]) -> Result<f64> {
    let [a2, b2, c2] = check_triangle(p1, p2, p3)?;
    let u = diff(p1, p2);
    let v = diff(p1, p3);
    let d = u.len();
    let mut wedge = 0.0;
    for k in 0..d {
        for l in k + 1..d {
            let w = u[k] * v[l] - u[l] * v[k];
            wedge += w * w;
        }
    }
    Ok(2.0 * wedge / (c2 * b2 * a2))
}

/// `ρ² = r_12² + r_13² + r_23²`.
pub fn rho_sq(p1: &[f64], p2: &[f64], p3: &[f64]) -> f64 {
    dist_sq(p1, p2) + dist_sq(p1, p3) + dist_sq(p2, p3)
}

/// The ordered chain `(1/R², 9/ρ², Σ 1/side²)`.
pub fn triangle_chain(p1: &[f64], p2: &[f64], p3: &[f64]) -> Result<[f64; 3]> {
    let [a2, b2, c2] = check_triangle(p1, p2, p3)?;
    let inv_r2 = circumradius_inv_sq(p1, p2, p3)?;
    Ok([inv_r2, 9.0 / (a2 + b2 + c2), 1.0 / a2 + 1.0 / b2 + 1.0 / c2])
}

/// `ρ² − 2(<x1−x2, x1−x3> + <x2−x1, x2−x3> + <x3−x1, x3−x2>)`; zero up to rounding.
pub fn mm_identity_residual(p1: &[f64], p2: &[f64], p3: &[f64]) -> f64 {
    let d12 = diff(p1, p2);
    let d13 = diff(p1, p3);
    let d23 = diff(p2, p3);
    let rhs = dot(&d12, &d13) - dot(&d12, &d23) + dot(&d13, &d23);
    rho_sq(p1, p2, p3) - 2.0 * rhs
}

/// `X`-density: `Σ_{i<j} 1/r_ij²`.
pub fn pair_density(config: &Configuration) -> Result<f64> {
    let n = config.count();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let r2 = dist_sq(config.point(i), config.point(j));
            if r2 == 0.0 {
                return Err(Error::CoincidentPoints(i, j));
            }
            sum += 1.0 / r2;
        }
    }
    Ok(sum)
}

/// `Z`-density: `Σ_{i<j<k} 1/R_ijk²`.
pub fn triple_density(config: &Configuration) -> Result<f64> {
    let n = config.count();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                sum += circumradius_inv_sq(config.point(i), config.point(j), config.point(k))
                    .map_err(|e| reindex(e, [i, j, k]))?;
            }
        }
    }
    Ok(sum)
}

fn reindex(e: Error, idx: [usize; 3]) -> Error {
    match e {
        Error::CoincidentPoints(a, b) => Error::CoincidentPoints(idx[a], idx[b]),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn equilateral(side: f64) -> [Vec<f64>; 3] {
        [
            vec![0.0, 0.0],
            vec![side, 0.0],
            vec![side / 2.0, side * 3f64.sqrt() / 2.0],
        ]
    }

    fn unit_square() -> Configuration {
        Configuration::from_points(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn pair_density_examples() {
        let two = Configuration::from_points(&[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(pair_density(&two).unwrap(), 1.0);
        let [a, b, c] = equilateral(2.0);
        let tri = Configuration::from_points(&[a, b, c]).unwrap();
        assert_relative_eq!(pair_density(&tri).unwrap(), 0.75, epsilon = 1e-15);
        // four sides of length 1 and two diagonals of length √2
        assert_relative_eq!(pair_density(&unit_square()).unwrap(), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn coincident_points_are_errors() {
        let c = Configuration::from_points(&[[0.0, 1.0], [2.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(pair_density(&c), Err(Error::CoincidentPoints(0, 2)));
        assert_eq!(triple_density(&c), Err(Error::CoincidentPoints(0, 2)));
        assert!(circumradius_inv_sq(&[0.0], &[0.0], &[1.0]).is_err());
        assert!(menger_b(&[1.0, 2.0], &[0.0, 0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn circumradius_examples() {
        let r = circumradius_inv_sq(&[0.0, 0.0], &[3.0, 0.0], &[0.0, 4.0]).unwrap();
        assert_relative_eq!(r, 4.0 / 25.0, epsilon = 1e-15);
        let [a, b, c] = equilateral(1.7);
        assert_relative_eq!(
            circumradius_inv_sq(&a, &b, &c).unwrap(),
            3.0 / (1.7 * 1.7),
            max_relative = 1e-14
        );
        assert_eq!(circumradius_inv_sq(&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn menger_examples() {
        let [a, b, c] = equilateral(0.5);
        assert_relative_eq!(menger_b(&a, &b, &c).unwrap(), 1.5 / 0.25, max_relative = 1e-14);
        assert_eq!(menger_b(&[0.3], &[-1.7], &[2.9]).unwrap(), 0.0);
    }

    #[test]
    fn triple_density_examples() {
        let line = Configuration::new(1, vec![0.0, 0.4, -3.0, 7.5, 1.1]).unwrap();
        assert_eq!(triple_density(&line).unwrap(), 0.0);
        let [a, b, c] = equilateral(1.0);
        let tri = Configuration::from_points(&[a, b, c]).unwrap();
        assert_relative_eq!(triple_density(&tri).unwrap(), 3.0, max_relative = 1e-14);
        // every corner triple of the square has the diagonal as diameter: R² = 1/2
        assert_relative_eq!(triple_density(&unit_square()).unwrap(), 8.0, max_relative = 1e-14);
    }

    #[test]
    fn rho_and_chain_examples() {
        let [a, b, c] = equilateral(2.0);
        assert_relative_eq!(rho_sq(&a, &b, &c), 12.0, epsilon = 1e-14);
        assert_eq!(rho_sq(&[0.0], &[1.0], &[2.0]), 6.0);

        let [a, b, c] = equilateral(1.0);
        let chain = triangle_chain(&a, &b, &c).unwrap();
        for v in chain {
            assert!((v - 3.0).abs() <= 1e-12, "{chain:?}");
        }

        let chain = triangle_chain(&[0.0, 0.0], &[3.0, 0.0], &[0.0, 4.0]).unwrap();
        assert_relative_eq!(chain[0], 0.16, epsilon = 1e-15);
        assert_relative_eq!(chain[1], 0.18, epsilon = 1e-15);
        assert_relative_eq!(chain[2], 1.0 / 9.0 + 1.0 / 16.0 + 1.0 / 25.0, epsilon = 1e-15);
        assert!(chain[0] <= chain[1] && chain[1] <= chain[2]);

        let sliver = triangle_chain(&[0.0, 0.0], &[1.0, 1e-9], &[2.0, 0.0]).unwrap();
        assert!(sliver[0] < 1e-15);
        assert!(sliver[0] <= sliver[1] && sliver[1] <= sliver[2]);

        let collinear = triangle_chain(&[0.0, 0.0], &[1.0, 0.0], &[3.0, 0.0]).unwrap();
        assert_eq!(collinear[0], 0.0);
    }

    #[test]
    fn mm_identity_examples() {
        let [a, b, c] = equilateral(1.3);
        assert!(mm_identity_residual(&a, &b, &c).abs() < 1e-14);
        let p = [1.0, -2.0, 0.5];
        assert_eq!(mm_identity_residual(&p, &p, &p), 0.0);
    }

    #[test]
    fn configuration_validation() {
        assert!(Configuration::new(0, vec![]).is_err());
        assert!(Configuration::new(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(Configuration::new(1, vec![1.0, f64::NAN]).is_err());
        let c = Configuration::new(2, vec![0.0, 0.0, 3.0, 4.0]).unwrap();
        assert_eq!(c.count(), 2);
        assert_eq!(c.diameter(), 5.0);
        assert_eq!(c.min_pair_distance(), 5.0);
    }
}
