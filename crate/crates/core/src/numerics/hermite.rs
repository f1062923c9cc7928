//! Gauss–Hermite rules for the standard normal weight (probabilists'
//! convention) via the Golub–Welsch eigenvalue method.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Nodes and weights of the k-point rule with ∫ p dN(0,1) = Σ w_i p(x_i)
/// exact for polynomials of degree ≤ 2k − 1. Nodes are sorted and
/// symmetrized; weights sum to 1.
pub fn gauss_hermite(k: usize) -> Result<Vec<(f64, f64)>> {
    if k == 0 {
        return Err(Error::Domain("Gauss–Hermite rule needs k ≥ 1".into()));
    }
    let mut jacobi = DMatrix::<f64>::zeros(k, k);
    for j in 1..k {
        let b = (j as f64).sqrt();
        jacobi[(j - 1, j)] = b;
        jacobi[(j, j - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], v0 * v0)
        })
        .collect();
    if pairs.iter().any(|(x, w)| !x.is_finite() || !w.is_finite()) {
        return Err(Error::Numeric(format!("eigen-decomposition failed for k = {k}")));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let sym: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let (x, w) = pairs[i];
            let (xm, wm) = pairs[k - 1 - i];
            let node = 0.5 * (x - xm);
            (if 2 * i + 1 == k { 0.0 } else { node }, 0.5 * (w + wm))
        })
        .collect();
    let total: f64 = sym.iter().map(|p| p.1).sum();
    Ok(sym.into_iter().map(|(x, w)| (x, w / total)).collect())
}
