//! Monic rational forms of the scalar recurrence.
//!
//! With `n_j = b²_0 ⋯ b²_{j-1}` the orthonormal values are `P_j = π_j/√n_j`
//! and `Q_j = σ_j/√n_j`, where `π`, `σ` obey
//! `π_{j+1} = (z - a_j) π_j - b²_{j-1} π_{j-1}` with `π_0 = 1`, `σ_0 = 0`,
//! `σ_1 = 1`. Everything stays rational when `a_j`, `b²_j` and `z` are.

use crate::exactq::BigRational;
use crate::operator::BlockJacobi;

use super::PolyError;

/// Bit budget per entry before the exact path gives up.
const EXACT_BIT_LIMIT: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactScalarTable {
    pub z: BigRational,
    pub a: Vec<BigRational>,
    pub b2: Vec<BigRational>,
    pub pi: Vec<BigRational>,
    pub sigma: Vec<BigRational>,
    /// `n_j = Π_{k<j} b²_k`.
    pub norm: Vec<BigRational>,
}

impl ExactScalarTable {
    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    /// `Q_j/P_j = σ_j/π_j`.
    pub fn ratio(&self, j: usize) -> Result<BigRational, PolyError> {
        Ok(self.sigma[j].checked_div(&self.pi[j])?)
    }

    /// Correctly signed double value of `u/√n_j`.
    pub fn orthonormal(&self, u: &BigRational, j: usize) -> f64 {
        let sq = (u * u).checked_div(&self.norm[j]).expect("positive norm");
        f64::from(u.signum()) * sq.sqrt_to_f64()
    }

    pub fn p_f64(&self, j: usize) -> f64 {
        self.orthonormal(&self.pi[j], j)
    }

    pub fn q_f64(&self, j: usize) -> f64 {
        self.orthonormal(&self.sigma[j], j)
    }

    /// `C·π_j - D·σ_j`, the monic form of `C·P_j - D·Q_j`.
    pub fn combination(&self, c: &BigRational, d: &BigRational, j: usize) -> BigRational {
        c * &self.pi[j] - d * &self.sigma[j]
    }
}

/// Monic tables for `j = 0..=N` at a rational point.
pub fn exact_table(op: &BlockJacobi, z: &BigRational, n: usize) -> Result<ExactScalarTable, PolyError> {
    let (a, b2) = match op.exact_coefficients(n.max(1)) {
        None => return Err(PolyError::ExactUnavailable),
        Some(r) => r?,
    };
    let mut pi = vec![BigRational::one()];
    let mut sigma = vec![BigRational::zero()];
    let mut norm = vec![BigRational::one()];
    for j in 0..n {
        let s = z - &a[j];
        let mut p_next = &s * &pi[j];
        let mut s_next = if j == 0 { BigRational::one() } else { &s * &sigma[j] };
        if j > 0 {
            p_next = p_next - &b2[j - 1] * &pi[j - 1];
            s_next = s_next - &b2[j - 1] * &sigma[j - 1];
        }
        if p_next.numer().bits() + p_next.denom().bits() > EXACT_BIT_LIMIT {
            return Err(PolyError::Overflow { j: j + 1 });
        }
        pi.push(p_next);
        sigma.push(s_next);
        norm.push(&norm[j] * &b2[j]);
    }
    Ok(ExactScalarTable { z: z.clone(), a, b2, pi, sigma, norm })
}
