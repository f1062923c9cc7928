//! First-, second- and third-lag differences of the responses.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSet {
    /// R_i = Y_{i+1} − Y_i, i = 0..n−1.
    pub r: Vec<f64>,
    /// R̃_i = Y_{i+2} − Y_i, i = 0..n−2.
    pub r_tilde: Vec<f64>,
    /// S_i = Y_{i+3} − Y_i, i = 0..n−3.
    pub s: Vec<f64>,
}

pub fn lag_differences(y: &[f64], lag: usize) -> Vec<f64> {
    y.iter().skip(lag).zip(y).map(|(a, b)| a - b).collect()
}

impl DifferenceSet {
    /// Differences of Y_0..Y_n; needs n ≥ 4.
    pub fn new(y: &[f64]) -> Result<Self> {
        if y.len() < 5 {
            return Err(Error::Shape(format!("need at least 5 responses (n ≥ 4), got {}", y.len())));
        }
        Ok(Self { r: lag_differences(y, 1), r_tilde: lag_differences(y, 2), s: lag_differences(y, 3) })
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }
}

pub(crate) fn squares(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v * v).collect()
}
