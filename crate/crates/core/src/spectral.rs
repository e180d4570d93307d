//! Eigensystem representation of the elliptic operator `A`, with projection
//! onto and synthesis from coefficient space.

use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Error, Result};

/// Largest tolerated entry of `G - I`, where `G` is the discrete Gram matrix.
pub const GRAM_TOL: f64 = 1e-8;

/// Coefficients `c_k`, stored 0-based (`c[0]` is mode `k = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefVector(Vec<f64>);

impl CoefVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("coefficient k={} is not finite", i + 1));
        }
        Ok(CoefVector(values))
    }

    pub fn zeros(n: usize) -> Self {
        CoefVector(vec![0.0; n])
    }

    /// Unit vector for mode `k` (1-based).
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = vec![0.0; n];
        v[k - 1] = 1.0;
        CoefVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        CoefVector(self.0.iter().map(|c| s * c).collect())
    }
}

impl std::ops::Index<usize> for CoefVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Truncated eigensystem `(λ_k, v_k)`, `k = 1..N`, of a positive self-adjoint
/// operator on `(0, L)`, with eigenfunctions sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    length: f64,
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

/// On-disk form of a user-supplied eigensystem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorSpec {
    #[serde(rename = "L")]
    pub length: f64,
    pub lambda: Vec<f64>,
    pub eigenfunction_grid: Vec<Vec<f64>>,
}

fn trapezoid_weights(points: usize, length: f64) -> Vec<f64> {
    let h = length / (points - 1) as f64;
    let mut w = vec![h; points];
    w[0] = 0.5 * h;
    w[points - 1] = 0.5 * h;
    w
}

impl SpectralOperator {
    /// Build from explicit eigendata, checking positivity, ordering and
    /// discrete orthonormality.
    pub fn from_eigensystem(length: f64, eigenvalues: Vec<f64>, eigenfunctions: Vec<Vec<f64>>) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return domain(format!("domain length L must be positive, got {length}"));
        }
        if eigenvalues.is_empty() {
            return domain("at least one eigenpair is required");
        }
        if eigenvalues.len() != eigenfunctions.len() {
            return shape(format!(
                "{} eigenvalues but {} eigenfunctions",
                eigenvalues.len(),
                eigenfunctions.len()
            ));
        }
        if !(eigenvalues[0] > 0.0) {
            return domain(format!("lambda_1 must be positive, got {}", eigenvalues[0]));
        }
        for (i, w) in eigenvalues.windows(2).enumerate() {
            if !(w[1] >= w[0]) || !w[1].is_finite() {
                return domain(format!(
                    "eigenvalues must be non-decreasing: lambda_{} = {} after {}",
                    i + 2,
                    w[1],
                    w[0]
                ));
            }
        }
        let points = eigenfunctions[0].len();
        if points < 3 {
            return domain("eigenfunction grid needs at least three points");
        }
        if let Some(k) = eigenfunctions.iter().position(|v| v.len() != points) {
            return shape(format!(
                "eigenfunction {} has {} samples, expected {points}",
                k + 1,
                eigenfunctions[k].len()
            ));
        }
        let op = SpectralOperator {
            length,
            weights: trapezoid_weights(points, length),
            eigenvalues,
            eigenfunctions,
        };
        let dev = op.gram_deviation();
        if !(dev <= GRAM_TOL) {
            return domain(format!(
                "eigenfunctions are not orthonormal on the grid: max |G - I| = {dev:e}"
            ));
        }
        Ok(op)
    }

    pub fn from_spec(spec: OperatorSpec) -> Result<Self> {
        SpectralOperator::from_eigensystem(spec.length, spec.lambda, spec.eigenfunction_grid)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: OperatorSpec =
            serde_json::from_str(text).map_err(|e| Error::Domain(format!("operator spec: {e}")))?;
        SpectralOperator::from_spec(spec)
    }

    pub fn to_spec(&self) -> OperatorSpec {
        OperatorSpec {
            length: self.length,
            lambda: self.eigenvalues.clone(),
            eigenfunction_grid: self.eigenfunctions.clone(),
        }
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `λ_k`, 1-based.
    pub fn lambda(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    /// Samples of `v_k`, 1-based.
    pub fn eigenfunction(&self, k: usize) -> &[f64] {
        &self.eigenfunctions[k - 1]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grid_points(&self) -> usize {
        self.weights.len()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.length * i as f64 / (self.grid_points() - 1) as f64
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
    }

    pub fn norm_sq(&self, h: &[f64]) -> f64 {
        self.inner(h, h)
    }

    /// `max_{j,k} |(v_j, v_k) - δ_jk|` under the grid quadrature.
    pub fn gram_deviation(&self) -> f64 {
        let n = self.modes();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for k in j..n {
                let g = self.inner(&self.eigenfunctions[j], &self.eigenfunctions[k]);
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }

    fn check_samples(&self, h: &[f64]) -> Result<()> {
        if h.len() != self.grid_points() {
            return shape(format!(
                "{} samples for a spatial grid of {} points",
                h.len(),
                self.grid_points()
            ));
        }
        Ok(())
    }

    /// Fourier coefficients `c_k = (h, v_k)`.
    pub fn project(&self, h: &[f64]) -> Result<CoefVector> {
        self.check_samples(h)?;
        CoefVector::new(self.eigenfunctions.iter().map(|v| self.inner(h, v)).collect())
    }

    /// Pointwise `Σ c_k v_k`.
    pub fn synthesize(&self, c: &CoefVector) -> Result<Vec<f64>> {
        if c.len() != self.modes() {
            return shape(format!(
                "{} coefficients for an operator with {} modes",
                c.len(),
                self.modes()
            ));
        }
        let mut out = vec![0.0; self.grid_points()];
        for (ck, v) in c.as_slice().iter().zip(&self.eigenfunctions) {
            if *ck == 0.0 {
                continue;
            }
            for (o, vi) in out.iter_mut().zip(v) {
                *o += ck * vi;
            }
        }
        Ok(out)
    }
}

/// `-v'' = λ v` on `(0, π)` with Dirichlet ends: `λ_k = k²`,
/// `v_k = √(2/π) sin(kx)`, sampled at `P + 1` uniform points.
pub fn dirichlet_laplacian_1d(n: usize, p: usize) -> Result<SpectralOperator> {
    if n == 0 {
        return domain("need at least one mode (N >= 1)");
    }
    if p < 8 * n {
        return domain(format!("spatial grid too coarse: P = {p} < 8N = {}", 8 * n));
    }
    let length = std::f64::consts::PI;
    let amp = (2.0 / length).sqrt();
    let eigenvalues = (1..=n).map(|k| (k * k) as f64).collect();
    let eigenfunctions = (1..=n)
        .map(|k| {
            (0..=p)
                .map(|i| {
                    // sin(k i π / P) via exact reduction keeps the Dirichlet ends at 0
                    let arg = (k * i) as f64 / p as f64;
                    amp * crate::special::sin_pi(arg)
                })
                .collect()
        })
        .collect();
    SpectralOperator::from_eigensystem(length, eigenvalues, eigenfunctions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_mode_values() {
        let op = dirichlet_laplacian_1d(1, 64).unwrap();
        assert_eq!(op.lambda(1), 1.0);
        assert!((op.eigenfunction(1)[32] - 0.7978845608).abs() < 1e-10);
        assert_eq!(op.eigenfunction(1)[0], 0.0);
        assert_eq!(op.eigenfunction(1)[64], 0.0);
    }

    #[test]
    fn eigenvalues_follow_square_law() {
        let op = dirichlet_laplacian_1d(3, 64).unwrap();
        assert_eq!(op.eigenvalues(), &[1.0, 4.0, 9.0]);
    }

    #[test]
    fn undersampled_grid_rejected() {
        assert!(matches!(dirichlet_laplacian_1d(4, 31), Err(Error::Domain(_))));
        assert!(dirichlet_laplacian_1d(4, 32).is_ok());
        assert!(dirichlet_laplacian_1d(0, 32).is_err());
    }

    #[test]
    fn projection_of_sine() {
        let op = dirichlet_laplacian_1d(1, 64).unwrap();
        let h: Vec<f64> = (0..=64).map(|i| op.x(i).sin()).collect();
        let c = op.project(&h).unwrap();
        assert!((c[0] - 1.2533141373).abs() < 1e-8);
    }

    #[test]
    fn shape_errors() {
        let op = dirichlet_laplacian_1d(2, 64).unwrap();
        assert!(matches!(op.project(&[0.0; 10]), Err(Error::Shape(_))));
        assert!(matches!(op.synthesize(&CoefVector::zeros(3)), Err(Error::Shape(_))));
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let op = dirichlet_laplacian_1d(3, 32).unwrap();
        let text = serde_json::to_string(&op.to_spec()).unwrap();
        assert_eq!(SpectralOperator::from_json(&text).unwrap(), op);

        let mut bad = op.to_spec();
        bad.lambda = vec![4.0, 1.0, 9.0];
        assert!(SpectralOperator::from_spec(bad).is_err());

        let mut bad = op.to_spec();
        bad.eigenfunction_grid[1][5] += 1e-3;
        assert!(SpectralOperator::from_spec(bad).is_err());

        let mut bad = op.to_spec();
        bad.lambda[0] = 0.0;
        assert!(SpectralOperator::from_spec(bad).is_err());
    }

    #[test]
    fn non_finite_coefficients_rejected() {
        assert!(CoefVector::new(vec![1.0, f64::NAN]).is_err());
    }
}
