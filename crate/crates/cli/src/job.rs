use std::fmt;

use serde::{Deserialize, Serialize};
use stokes_core::{sample, validate_system, CMat, RankOneSystem, C64};

/// One scalar of the input: an integer token, a real, or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> C64 {
        match self {
            Entry::Int(i) => C64::new(i as f64, 0.0),
            Entry::Real(x) => C64::new(x, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }

    fn from_value(z: C64) -> Self {
        Entry::Complex([z.re, z.im])
    }
}

/// The input file, with defaults applied by [`JobSpec::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Entry>>,
    #[serde(rename = "A1", default, skip_serializing_if = "Option::is_none")]
    pub a1: Option<Vec<Vec<Entry>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error: {}", self.0)
    }
}

impl std::error::Error for ParseError {}

pub const DEFAULT_ORDER: usize = 80;
pub const DEFAULT_TOL: f64 = 1e-12;

impl JobSpec {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError(e.to_string()))
    }

    /// Fills in defaults and CLI overrides; a seed without explicit data
    /// generates a random generic system, which is then written back so the
    /// echo is self-contained.
    pub fn resolve(mut self, eta: Option<f64>, order: Option<usize>, tol: Option<f64>) -> Result<Self, ParseError> {
        if eta.is_some() {
            self.eta = eta;
        }
        self.series_order = order.or(self.series_order).or(Some(DEFAULT_ORDER));
        self.tol = tol.or(self.tol).or(Some(DEFAULT_TOL));
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(ParseError(format!("tolerance must be positive, got {t}")));
            }
        }
        if self.lambda.is_none() && self.a1.is_none() {
            let (n, seed) = match (self.n, self.seed) {
                (Some(n), Some(seed)) => (n, seed),
                _ => return Err(ParseError("need lambda and A1, or n and seed".into())),
            };
            if n < 2 {
                return Err(ParseError(format!("n must be at least 2, got {n}")));
            }
            let sys = sample::random_generic(n, seed);
            self.lambda = Some(sys.lambda().iter().map(|&z| Entry::from_value(z)).collect());
            self.a1 = Some(
                (0..n)
                    .map(|i| (0..n).map(|j| Entry::from_value(sys.a1()[(i, j)])).collect())
                    .collect(),
            );
        }
        Ok(self)
    }

    pub fn system(&self) -> Result<RankOneSystem, ParseError> {
        let lambda: Vec<C64> = self
            .lambda
            .as_ref()
            .ok_or_else(|| ParseError("missing lambda".into()))?
            .iter()
            .map(|e| e.value())
            .collect();
        let rows = self.a1.as_ref().ok_or_else(|| ParseError("missing A1".into()))?;
        let n = self.n.unwrap_or(lambda.len());
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(ParseError(format!("A1 must be {n} x {n}")));
        }
        let a1 = CMat::from_fn(n, n, |i, j| rows[i][j].value());
        validate_system(n, lambda, a1).map_err(|e| ParseError(e.to_string()))
    }

    pub fn order(&self) -> usize {
        self.series_order.unwrap_or(DEFAULT_ORDER)
    }

    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_tokens_stay_integers() {
        let j = JobSpec::parse(r#"{"lambda": [0, [1.0, 0.0]], "A1": [[2, 0.5], [0.2, -0.7]]}"#).unwrap();
        assert_eq!(j.a1.as_ref().unwrap()[0][0], Entry::Int(2));
        let s = j.system().unwrap();
        assert_eq!(s.case(0), stokes_core::CaseTag::ResonantNonneg(2));
        let back = JobSpec::parse(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back, j);
    }

    #[test]
    fn seeded_systems_are_written_back() {
        let j = JobSpec::parse(r#"{"n": 3, "seed": 4}"#).unwrap().resolve(None, None, None).unwrap();
        assert_eq!(j.lambda.as_ref().unwrap().len(), 3);
        assert_eq!(j.series_order, Some(80));
        assert!(j.system().is_ok());
    }

    #[test]
    fn rejects_bad_shapes() {
        let j = JobSpec::parse(r#"{"lambda": [0, 1], "A1": [[1, 2]]}"#).unwrap();
        assert!(j.system().is_err());
        assert!(JobSpec::parse("{\"lambda\": 3").is_err());
    }
}
