//! The system data: poles `lambda_i` (eigenvalues of `A0`) and the matrix `A1`.

use crate::{CMat, Error, Result, C64};

/// Resonance class of a diagonal entry `lambda'_k = (A1)_kk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// `lambda'_k` is not an integer.
    Generic,
    /// `lambda'_k = -1`.
    Jordan,
    /// `lambda'_k = N >= 0`.
    ResonantNonneg(u32),
    /// `lambda'_k = N <= -2`.
    ResonantNeg(i32),
}

impl CaseTag {
    /// `true` for every integer class.
    pub fn is_integer(self) -> bool {
        !matches!(self, CaseTag::Generic)
    }

    /// Short label used in reports.
    pub fn label(self) -> String {
        match self {
            CaseTag::Generic => "generic".into(),
            CaseTag::Jordan => "jordan".into(),
            CaseTag::ResonantNonneg(n) => format!("resonant_nonneg({n})"),
            CaseTag::ResonantNeg(n) => format!("resonant_neg({n})"),
        }
    }
}

/// Exact classification of `lambda'`. No rounding is applied: `2.0000001`
/// is generic.
pub fn classify(lp: C64) -> CaseTag {
    if lp.im != 0.0 || !lp.re.is_finite() || lp.re.fract() != 0.0 || lp.re.abs() > 1e9 {
        return CaseTag::Generic;
    }
    let n = lp.re as i64;
    match n {
        -1 => CaseTag::Jordan,
        n if n >= 0 => CaseTag::ResonantNonneg(n as u32),
        n => CaseTag::ResonantNeg(n as i32),
    }
}

/// Validated system data.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSystem {
    lambda: Vec<C64>,
    a1: CMat,
    lambda_prime: Vec<C64>,
}

/// Checks shapes and distinctness of the poles.
pub fn validate_system(n: usize, lambda: Vec<C64>, a1: CMat) -> Result<RankOneSystem> {
    if n < 2 {
        return Err(Error::DimensionMismatch(format!("n = {n}, need n >= 2")));
    }
    if lambda.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues for n = {n}",
            lambda.len()
        )));
    }
    if a1.nrows() != n || a1.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "A1 is {}x{}, expected {n}x{n}",
            a1.nrows(),
            a1.ncols()
        )));
    }
    if lambda.iter().any(|l| !l.is_finite()) || a1.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidArgument("non-finite input".into()));
    }
    for i in 0..n {
        for j in i + 1..n {
            let d = (lambda[i] - lambda[j]).norm();
            if d == 0.0 {
                return Err(Error::DuplicateEigenvalue { i, j, distance: d });
            }
        }
    }
    let lambda_prime = (0..n).map(|k| a1[(k, k)]).collect();
    Ok(RankOneSystem {
        lambda,
        a1,
        lambda_prime,
    })
}

impl RankOneSystem {
    /// Convenience constructor taking the dimension from `lambda`.
    pub fn new(lambda: Vec<C64>, a1: CMat) -> Result<Self> {
        validate_system(lambda.len(), lambda, a1)
    }

    /// Dimension.
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// Poles of the Fuchsian system.
    pub fn lambda(&self) -> &[C64] {
        &self.lambda
    }

    /// The matrix `A1`.
    pub fn a1(&self) -> &CMat {
        &self.a1
    }

    /// Diagonal of `A1`.
    pub fn lambda_prime(&self) -> &[C64] {
        &self.lambda_prime
    }

    /// Resonance class of pole `k`.
    pub fn case(&self, k: usize) -> CaseTag {
        classify(self.lambda_prime[k])
    }

    /// Distance from `lambda_k` to the nearest other pole.
    pub fn nearest_distance(&self, k: usize) -> f64 {
        (0..self.n())
            .filter(|&j| j != k)
            .map(|j| (self.lambda[j] - self.lambda[k]).norm())
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest pairwise pole distance.
    pub fn min_separation(&self) -> f64 {
        (0..self.n())
            .map(|k| self.nearest_distance(k))
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest pairwise pole distance.
    pub fn max_separation(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n() {
            for j in 0..self.n() {
                d = d.max((self.lambda[i] - self.lambda[j]).norm());
            }
        }
        d
    }

    /// Threshold under which resonance data is treated as exactly zero.
    pub fn zero_threshold(&self) -> f64 {
        1e-10 * self.a1.norm()
    }

    /// `B_k = -E_k (A1 + I)`: the residue of the Fuchsian system at `lambda_k`.
    pub fn residue(&self, k: usize) -> CMat {
        let n = self.n();
        let mut b = CMat::zeros(n, n);
        for j in 0..n {
            let id = if j == k { 1.0 } else { 0.0 };
            b[(k, j)] = -(self.a1[(k, j)] + id);
        }
        b
    }

    /// `A0 = diag(lambda)`.
    pub fn a0(&self) -> CMat {
        CMat::from_diagonal(&crate::CVec::from_vec(self.lambda.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn classify_cases() {
        assert_eq!(classify(c(0.3, 0.0)), CaseTag::Generic);
        assert_eq!(classify(c(-1.0, 0.0)), CaseTag::Jordan);
        assert_eq!(classify(c(-3.0, 0.0)), CaseTag::ResonantNeg(-3));
        assert_eq!(classify(c(2.0, 0.0)), CaseTag::ResonantNonneg(2));
        assert_eq!(classify(c(0.0, 0.0)), CaseTag::ResonantNonneg(0));
        assert_eq!(classify(c(2.0, 1e-300)), CaseTag::Generic);
        assert_eq!(classify(c(2.0 + 1e-15, 0.0)), CaseTag::Generic);
    }

    #[test]
    fn validation() {
        let a1 = CMat::from_row_slice(2, 2, &[c(0.3, 0.), c(0.5, 0.), c(0.2, 0.), c(-0.7, 0.)]);
        let s = validate_system(2, vec![c(0., 0.), c(1., 0.)], a1.clone()).unwrap();
        assert_eq!(s.lambda_prime(), &[c(0.3, 0.), c(-0.7, 0.)]);
        assert!(matches!(
            validate_system(2, vec![c(0., 0.), c(0., 0.)], a1.clone()),
            Err(Error::DuplicateEigenvalue { .. })
        ));
        assert!(matches!(
            validate_system(3, vec![c(0., 0.), c(1., 0.), c(0., 1.)], a1),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn residue_has_single_row() {
        let a1 = CMat::from_fn(3, 3, |i, j| c((i * 3 + j) as f64, 0.0));
        let s = RankOneSystem::new(vec![c(0., 0.), c(1., 0.), c(0., 1.)], a1).unwrap();
        let b = s.residue(1);
        for i in [0, 2] {
            for j in 0..3 {
                assert_eq!(b[(i, j)], C64::new(0.0, 0.0));
            }
        }
        assert_eq!(b[(1, 1)], c(-5.0, 0.0));
    }
}
