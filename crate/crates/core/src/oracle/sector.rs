//! Canonical sector solutions `Y_nu` by asymptotic anchoring and transport.
//!
//! Column `k` of `Y_nu(z) e^{-lambda_k z} z^{-lambda'_k}` is pinned down by the
//! `n` bilinear conditions `w_a(z) . y_k(z) = delta_ak`, where `w_a` are the rows
//! of `Y_nu^{-1}` in the gauge of `k`. Each row is anchored on a ray where the
//! truncated formal inverse is reliable for that row and carried to the target
//! with the transposed adjoint system. Rows dominating `k` at the target travel
//! together as an orthonormalised flag so that the `k` row is only known modulo
//! their span, which is all the solve needs.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use super::formal::{formal_series, FormalSeries};
use crate::frame::CriticalDirections;
use crate::taylor::{arc_points, ZSystem};
use crate::{linalg, CMat, CVec, Error, RankOneSystem, Result, C64};

/// Default depth of the formal series.
pub const DEFAULT_DEPTH: usize = 80;

const ARC_STEP: f64 = 0.25;

/// A point on the universal cover of the punctured plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorPoint {
    /// Modulus.
    pub r: f64,
    /// Argument (not reduced).
    pub theta: f64,
}

impl SectorPoint {
    /// Builds a point.
    pub fn new(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }

    /// Complex value.
    pub fn z(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }

    /// `ln z` on this sheet.
    pub fn ln(&self) -> C64 {
        C64::new(self.r.ln(), self.theta)
    }
}

/// Evaluator of `Y_nu` on the open sector `(tau_nu - pi, tau_{nu+1})`.
#[derive(Debug, Clone)]
pub struct SectorSolution {
    /// Sector index.
    pub nu: i64,
    /// Lower end of the sector.
    pub lo: f64,
    /// Upper end of the sector.
    pub hi: f64,
    /// Anchoring radius.
    pub anchor_radius: f64,
    sys: RankOneSystem,
    formal: Arc<FormalSeries>,
    adjoints: Vec<ZSystem>,
    margin: f64,
    arc_radius: f64,
    tol: f64,
}

/// Builds the sector solution with a fresh formal series of depth 80.
pub fn sector_solution(sys: &RankOneSystem, crit: &CriticalDirections, nu: i64, tol: f64) -> Result<SectorSolution> {
    let formal = Arc::new(formal_series(sys, DEFAULT_DEPTH));
    SectorSolution::new(sys, crit, formal, nu, tol)
}

impl SectorSolution {
    /// Builds the evaluator from a precomputed formal series.
    pub fn new(
        sys: &RankOneSystem,
        crit: &CriticalDirections,
        formal: Arc<FormalSeries>,
        nu: i64,
        tol: f64,
    ) -> Result<Self> {
        if !(tol >= 1e-13) {
            return Err(Error::InvalidArgument(format!("tolerance {tol} below 1e-13")));
        }
        if formal.smallest_term > tol {
            return Err(Error::AnchorAccuracyInsufficient {
                smallest: formal.smallest_term,
            });
        }
        let lo = crit.tau(nu) - PI;
        let hi = crit.tau(nu + 1);
        let margin = (0.25 * crit.min_gap()).min(0.2);
        let adjoints = (0..sys.n()).map(|k| ZSystem::gauged_adjoint(sys, k)).collect();
        Ok(Self {
            nu,
            lo,
            hi,
            anchor_radius: formal.optimal_radius,
            sys: sys.clone(),
            formal,
            adjoints,
            margin,
            arc_radius: 2.0 / sys.max_separation(),
            tol,
        })
    }

    /// Same solution anchored at `factor` times the optimal radius.
    pub fn with_anchor_scale(mut self, factor: f64) -> Self {
        self.anchor_radius *= factor;
        self
    }

    /// Bisector of the sector.
    pub fn bisector(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Whether `theta` lies in the open sector.
    pub fn contains(&self, theta: f64) -> bool {
        theta > self.lo && theta < self.hi
    }

    fn growth(&self, j: usize, k: usize, theta: f64) -> f64 {
        let d = self.sys.lambda()[j] - self.sys.lambda()[k];
        (d * C64::from_polar(1.0, theta)).re
    }

    /// Direction in the margined sector maximising `Re((lambda_j - lambda_k) e^{i theta})`.
    fn anchor_direction(&self, j: usize, k: usize) -> f64 {
        let (a, b) = (self.lo + self.margin, self.hi - self.margin);
        let d = self.sys.lambda()[j] - self.sys.lambda()[k];
        let mut best = (self.growth(j, k, a), a);
        let g = self.growth(j, k, b);
        if g > best.0 {
            best = (g, b);
        }
        let peak = -d.arg();
        for h in -2..=2 {
            let t = peak + 2.0 * PI * h as f64;
            if t > a && t < b {
                best = (d.norm(), t);
            }
        }
        best.1
    }

    fn transport(&self, k: usize, pts: &[C64], y0: CMat, rhs: &mut C64, flag: bool) -> Result<CMat> {
        let tol = self.tol;
        let mut hook = |y: &mut CMat| {
            let m = y.ncols();
            for _ in 0..2 {
                for c in 0..m {
                    for p in 0..c {
                        let proj = y.column(p).dotc(&y.column(c));
                        let col_p = y.column(p).clone_owned();
                        let mut col = y.column_mut(c);
                        col.axpy(-proj, &col_p, C64::new(1.0, 0.0));
                    }
                    let nrm = y.column(c).norm();
                    if nrm > 0.0 {
                        y.column_mut(c).unscale_mut(nrm);
                        if c + 1 == m && flag {
                            *rhs /= nrm;
                        }
                    }
                }
            }
        };
        let hook_ref: &mut dyn FnMut(&mut CMat) = &mut hook;
        let t = self.adjoints[k].march(pts, y0, tol, Some(hook_ref))?;
        Ok(t.value)
    }

    /// Column `k` of `Y_nu(z) e^{-A0 z} z^{-Lambda'}` at `p`.
    pub fn yhat_column(&self, k: usize, p: SectorPoint) -> Result<CVec> {
        let n = self.sys.n();
        if !self.contains(p.theta) {
            return Err(Error::InvalidArgument(format!(
                "angle {} outside sector ({}, {})",
                p.theta, self.lo, self.hi
            )));
        }
        if !(p.r > 0.0) {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        let target = p.z();
        let dominant: Vec<usize> = (0..n).filter(|&a| a != k && self.growth(a, k, p.theta) > 0.0).collect();
        let mut rows: Vec<CVec> = Vec::with_capacity(n);
        let mut rhs = CVec::zeros(n);

        // flag of dominant rows plus row k, anchored on the target ray
        let r0 = self.anchor_radius.max(p.r);
        let z0 = C64::from_polar(r0, p.theta);
        let mut cols: Vec<CVec> = dominant.iter().map(|&a| self.formal.inverse_row(a, z0)).collect();
        cols.push(self.formal.inverse_row(k, z0));
        let y0 = CMat::from_columns(&cols);
        let mut s = C64::new(1.0, 0.0);
        let flag = self.transport(k, &[z0, target], y0, &mut s, true)?;
        for c in 0..flag.ncols() {
            rows.push(flag.column(c).clone_owned());
        }
        rhs[flag.ncols() - 1] = s;

        // remaining rows: each descends its own anchor ray inside a flag of the
        // rows that outgrow it there, then all of them return to the target together
        let r_path = p.r.min(self.arc_radius);
        let rest: Vec<usize> = (0..n).filter(|&j| j != k && !dominant.contains(&j)).collect();
        let mut block: Vec<CVec> = Vec::with_capacity(rest.len());
        for &j in &rest {
            let th = self.anchor_direction(j, k);
            let za = C64::from_polar(self.anchor_radius.max(p.r), th);
            let rate = self.growth(j, k, th);
            let mut faster: Vec<(f64, usize)> = (0..n)
                .filter(|&a| a != k && a != j)
                .map(|a| (self.growth(a, k, th), a))
                .filter(|&(g, _)| g > rate)
                .collect();
            faster.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
            let mut cols: Vec<CVec> = faster.iter().map(|&(_, a)| self.formal.inverse_row(a, za)).collect();
            cols.push(self.formal.inverse_row(j, za));
            let mut dummy = C64::new(0.0, 0.0);
            let mut pts = vec![za, C64::from_polar(r_path, th)];
            let down = self.transport(k, &pts, CMat::from_columns(&cols), &mut dummy, false)?;
            pts = arc_points(r_path, th, p.theta, ARC_STEP);
            let v = CMat::from_columns(&[down.column(down.ncols() - 1).clone_owned()]);
            let v = self.transport(k, &pts, v, &mut dummy, false)?;
            block.push(v.column(0).clone_owned());
        }
        if !block.is_empty() {
            let mut dummy = C64::new(0.0, 0.0);
            let start = C64::from_polar(r_path, p.theta);
            let out = self.transport(k, &[start, target], CMat::from_columns(&block), &mut dummy, false)?;
            for c in 0..out.ncols() {
                rows.push(out.column(c).clone_owned());
            }
        }
        let mut a = CMat::zeros(n, n);
        for (i, r) in rows.iter().enumerate() {
            a.set_row(i, &r.transpose());
        }
        linalg::solve(&a, &rhs).ok_or(Error::IllConditionedDecomposition {
            j: k,
            k,
            cond: f64::INFINITY,
        })
    }

    /// `Y_nu(z) e^{-A0 z} z^{-Lambda'}` at `p`.
    pub fn yhat(&self, p: SectorPoint) -> Result<CMat> {
        let cols: Vec<CVec> = (0..self.sys.n())
            .into_par_iter()
            .map(|k| self.yhat_column(k, p))
            .collect::<Result<_>>()?;
        Ok(CMat::from_columns(&cols))
    }

    /// `Y_nu(z)` with `ln z` taken on the sheet of `p`.
    pub fn y(&self, p: SectorPoint) -> Result<CMat> {
        let yh = self.yhat(p)?;
        Ok(yh * self.exponential(p))
    }

    /// `e^{A0 z} z^{Lambda'}` on the sheet of `p`.
    pub fn exponential(&self, p: SectorPoint) -> CMat {
        let (z, lz) = (p.z(), p.ln());
        let d: Vec<C64> = (0..self.sys.n())
            .map(|k| (self.sys.lambda()[k] * z + self.sys.lambda_prime()[k] * lz).exp())
            .collect();
        CMat::from_diagonal(&CVec::from_vec(d))
    }
}

/// Direct Stokes matrix with its inter-point spread.
#[derive(Debug, Clone)]
pub struct StokesEstimate {
    /// Averaged `S_nu`.
    pub s: CMat,
    /// Largest deviation of a single sample from the average.
    pub spread: f64,
}

/// Largest spread accepted by [`stokes_direct`].
pub const MAX_SPREAD: f64 = 1e-4;

/// `S_nu = Y_nu^{-1} Y_{nu+mu}` averaged over five points of the overlap bisector.
pub fn stokes_direct(sys: &RankOneSystem, crit: &CriticalDirections, nu: i64, tol: f64) -> Result<StokesEstimate> {
    let formal = Arc::new(formal_series(sys, DEFAULT_DEPTH));
    stokes_direct_with(sys, crit, formal, nu, tol)
}

/// [`stokes_direct`] reusing a formal series.
pub fn stokes_direct_with(
    sys: &RankOneSystem,
    crit: &CriticalDirections,
    formal: Arc<FormalSeries>,
    nu: i64,
    tol: f64,
) -> Result<StokesEstimate> {
    let a = SectorSolution::new(sys, crit, formal.clone(), nu, tol)?;
    let b = SectorSolution::new(sys, crit, formal, nu + crit.mu as i64, tol)?;
    let theta = 0.5 * (crit.tau(nu) + crit.tau(nu + 1));
    let base = 1.0 / sys.max_separation();
    let n = sys.n();
    let samples: Vec<CMat> = [1.0, 1.4, 2.0, 2.8, 4.0]
        .par_iter()
        .map(|f| {
            let p = SectorPoint::new(base * f, theta);
            let ya = a.yhat(p)?;
            let yb = b.yhat(p)?;
            let inv = linalg::inverse(&ya).ok_or(Error::OverlapConditioning { spread: f64::INFINITY })?;
            let mut s = inv * yb;
            let (z, lz) = (p.z(), p.ln());
            for j in 0..n {
                for k in 0..n {
                    let e = (sys.lambda()[k] - sys.lambda()[j]) * z + (sys.lambda_prime()[k] - sys.lambda_prime()[j]) * lz;
                    s[(j, k)] *= e.exp();
                }
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut mean = CMat::zeros(n, n);
    for s in &samples {
        mean += s;
    }
    mean /= C64::new(samples.len() as f64, 0.0);
    let spread = samples
        .iter()
        .map(|s| linalg::max_abs(&(s - &mean)))
        .fold(0.0, f64::max);
    if spread > MAX_SPREAD {
        return Err(Error::OverlapConditioning { spread });
    }
    Ok(StokesEstimate { s: mean, spread })
}

/// Continues a fundamental matrix of the original system once around the
/// origin (`turns = 1` counter-clockwise, `-1` clockwise) starting at `p`.
pub fn transport_around_origin(sys: &RankOneSystem, p: SectorPoint, y: CMat, turns: i32, tol: f64) -> Result<CMat> {
    let zs = ZSystem::original(sys);
    let end = p.theta + 2.0 * PI * turns as f64;
    let pts = arc_points(p.r, p.theta, end, ARC_STEP);
    Ok(zs.march(&pts, y, tol, None)?.value)
}
