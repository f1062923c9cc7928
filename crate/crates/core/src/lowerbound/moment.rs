//! Bounded symmetric laws matching the low-order standard normal moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gauss_hermite, Law};
use crate::sim_model::matched_atoms;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentMatchedLaw {
    pub q: u32,
    /// Largest atom magnitude.
    pub b: f64,
    /// (location, weight) pairs, sorted by location.
    pub atoms: Vec<(f64, f64)>,
}

/// Gauss–Hermite law with ⌈(q+1)/2⌉ atoms; it reproduces E Z^k for k ≤ q.
pub fn build_moment_matched(q: u32) -> Result<MomentMatchedLaw> {
    if q == 0 {
        return Err(Error::Domain("moment order q must be at least 1".into()));
    }
    let atoms = gauss_hermite(matched_atoms(q))?;
    let b = atoms.iter().fold(0.0f64, |m, a| m.max(a.0.abs()));
    Ok(MomentMatchedLaw { q, b, atoms })
}

impl MomentMatchedLaw {
    pub fn moment(&self, k: u32) -> f64 {
        self.atoms.iter().map(|(x, w)| w * x.powi(k as i32)).sum()
    }

    pub fn law(&self) -> Law {
        Law::atoms(&self.atoms).expect("weights sum to one")
    }
}

/// E Z^k for Z ~ N(0, 1): 0 for odd k, (k − 1)!! for even k.
pub fn normal_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..k).step_by(2).map(|j| j as f64).product()
    }
}
