//! End-to-end analysis: frame, local bases, connection matrix, monodromy and
//! Stokes data, with an optional cross-check against the direct oracle.

use std::sync::Arc;

use crate::continuation::connection_matrix;
use crate::local::{build_all, LocalBasis, DEFAULT_ORDER};
use crate::monodromy::{monodromy_data, stokes_factors, MonodromyData};
use crate::oracle::{formal_series, stokes_direct_with};
use crate::{linalg, CMat, ConnectionMatrix, DirectionFrame, RankOneSystem, Result};

/// Knobs of [`analyze`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// Cut direction; the midpoint of the widest critical gap when `None`.
    pub eta: Option<f64>,
    /// Local series order.
    pub order: usize,
    /// Integration tolerance.
    pub tol: f64,
    /// Whether to compute the Stokes factors `W_nu` (one connection matrix each).
    pub factors: bool,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            eta: None,
            order: DEFAULT_ORDER,
            tol: 1e-12,
            factors: true,
        }
    }
}

/// Everything computed by [`analyze`].
#[derive(Debug, Clone)]
pub struct Analysis {
    /// Cut-plane frame.
    pub frame: DirectionFrame,
    /// Local bases at every pole.
    pub bases: Vec<LocalBasis>,
    /// Connection coefficients.
    pub connection: ConnectionMatrix,
    /// Monodromy and Stokes data.
    pub monodromy: MonodromyData,
}

/// Frame at `eta`, or at the default direction.
pub fn frame_for(sys: &RankOneSystem, eta: Option<f64>) -> Result<DirectionFrame> {
    match eta {
        Some(e) => DirectionFrame::new(sys, e),
        None => DirectionFrame::default_for(sys),
    }
}

/// Runs the Fuchsian pipeline.
pub fn analyze(sys: &RankOneSystem, opts: &Options) -> Result<Analysis> {
    let frame = frame_for(sys, opts.eta)?;
    let bases = build_all(sys, opts.order)?;
    let connection = connection_matrix(sys, &frame, &bases, opts.tol)?;
    let w = if opts.factors {
        stokes_factors(sys, &frame, &bases, opts.tol)?
    } else {
        Vec::new()
    };
    let monodromy = monodromy_data(sys, &frame, &connection, w);
    Ok(Analysis {
        frame,
        bases,
        connection,
        monodromy,
    })
}

/// Stokes matrices from the connection matrix next to their direct oracle values.
#[derive(Debug, Clone)]
pub struct Verification {
    /// `S_nu` from the oracle.
    pub s_plus_oracle: CMat,
    /// `S_{nu+mu}^{-1}` from the oracle.
    pub s_minus_inv_oracle: CMat,
    /// `max |S_+ - S_nu|`.
    pub diff_plus: f64,
    /// `max |S_-^{-1} - S_{nu+mu}^{-1}|`.
    pub diff_minus: f64,
    /// Largest oracle sampling spread.
    pub spread: f64,
}

impl Verification {
    /// Largest of the two differences.
    pub fn max_diff(&self) -> f64 {
        self.diff_plus.max(self.diff_minus)
    }
}

/// Compares the Stokes matrices of `an` with the direct oracle.
pub fn verify(sys: &RankOneSystem, an: &Analysis, tol: f64) -> Result<Verification> {
    let crit = &an.frame.criticals;
    let nu = an.frame.nu;
    let formal = Arc::new(formal_series(sys, crate::oracle::sector::DEFAULT_DEPTH));
    let oracle_tol = tol.max(1e-13);
    let (a, b) = rayon::join(
        || stokes_direct_with(sys, crit, formal.clone(), nu, oracle_tol),
        || stokes_direct_with(sys, crit, formal.clone(), nu + crit.mu as i64, oracle_tol),
    );
    let (a, b) = (a?, b?);
    let b_inv = linalg::inverse(&b.s).ok_or(crate::Error::OverlapConditioning { spread: f64::INFINITY })?;
    let m = &an.monodromy;
    Ok(Verification {
        diff_plus: linalg::max_abs(&(&m.s_plus - &a.s)),
        diff_minus: linalg::max_abs(&(&m.s_minus_inv - &b_inv)),
        spread: a.spread.max(b.spread),
        s_plus_oracle: a.s,
        s_minus_inv_oracle: b_inv,
    })
}
