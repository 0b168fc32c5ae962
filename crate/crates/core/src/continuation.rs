//! Continuation of `Psi_k` through the cut plane and extraction of the
//! connection coefficients `c_jk`.
//!
//! Paths are planned in the rotated coordinate `w = lambda e^{-i eta}` where
//! every cut points along the positive real axis. A path leaves the disk of
//! `lambda_k`, runs left of all poles, moves vertically and enters the disk
//! of `lambda_j` horizontally, so it never meets a cut.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::frame::{BranchPoint, DirectionFrame};
use crate::local::LocalBasis;
use crate::{linalg, taylor, CMat, CVec, Error, RankOneSystem, Result, C64};

/// Condition number above which a decomposition point is rejected.
pub const MAX_COND: f64 = 1e10;
/// Start and end points sit at this fraction of the validity radius; the
/// fractions 0.25 and 0.75 are tried when the nominal ones clear poorly.
pub const POINT_FRACTION: f64 = 0.5;

const OFFSETS: [f64; 7] = [
    -PI,
    -5.0 * PI / 6.0,
    -7.0 * PI / 6.0,
    -2.0 * PI / 3.0,
    -4.0 * PI / 3.0,
    -PI / 2.0,
    -1.5 * PI,
];

/// A polyline inside the cut plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationPath {
    /// Vertices with their branches.
    pub waypoints: Vec<BranchPoint>,
    /// Minimum distance to any pole or cut.
    pub clearance: f64,
}

impl ContinuationPath {
    /// First vertex.
    pub fn start(&self) -> &BranchPoint {
        &self.waypoints[0]
    }

    /// Last vertex.
    pub fn end(&self) -> &BranchPoint {
        self.waypoints.last().unwrap()
    }
}

fn seg_point_dist(a: C64, b: C64, p: C64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * ab.conj()).re / l2).clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

/// Distance from segment `[a, b]` to the ray `{c + t, t >= 0}` (rotated frame).
fn seg_ray_dist(a: C64, b: C64, c: C64) -> f64 {
    let point_ray = |p: C64| {
        if p.re >= c.re {
            (p.im - c.im).abs()
        } else {
            (p - c).norm()
        }
    };
    if (a.im - c.im) * (b.im - c.im) <= 0.0 {
        let x = if a.im == b.im {
            a.re.max(b.re)
        } else {
            a.re + (c.im - a.im) / (b.im - a.im) * (b.re - a.re)
        };
        if x >= c.re {
            return 0.0;
        }
    }
    seg_point_dist(a, b, c).min(point_ray(a)).min(point_ray(b))
}

fn polyline_clearance(pts: &[C64], poles: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for w in pts.windows(2) {
        for &p in poles {
            best = best.min(seg_ray_dist(w[0], w[1], p));
        }
    }
    best
}

fn rotated_polyline(wk: C64, wj: C64, rs: f64, re: f64, fs: f64, fe: f64, x: f64) -> Vec<C64> {
    let s = wk + C64::from_polar(rs, fs);
    let e = wj + C64::from_polar(re, fe);
    vec![s, C64::new(x, s.im), C64::new(x, e.im), e]
}

/// All candidate paths from pole `k` to pole `j`, best clearance first.
pub fn candidate_paths(sys: &RankOneSystem, frame: &DirectionFrame, k: usize, j: usize) -> Vec<ContinuationPath> {
    let rot = C64::from_polar(1.0, -frame.eta);
    let w: Vec<C64> = sys.lambda().iter().map(|&l| l * rot).collect();
    let dmin = sys.min_separation();
    let x = w.iter().map(|z| z.re).fold(f64::INFINITY, f64::min) - dmin;
    let rk = crate::local::RADIUS_FRACTION * sys.nearest_distance(k);
    let rj = crate::local::RADIUS_FRACTION * sys.nearest_distance(j);
    let mut ends = Vec::new();
    for frac in [POINT_FRACTION, 0.25, 0.75] {
        for &fe in &OFFSETS {
            for &fs in &OFFSETS {
                ends.push((frac * rk, fs, frac * rj, fe));
            }
        }
    }
    let mut out: Vec<(f64, usize, ContinuationPath)> = Vec::new();
    let mut rank = 0;
    for (rs, fs, re, fe) in ends {
        {
            let pts = rotated_polyline(w[k], w[j], rs, re, fs, fe, x);
            // the local expansions hold only on the pole's side of other cuts
            let radial_ok = |pole: usize, p: C64| {
                (0..w.len()).all(|i| i == pole || seg_ray_dist(w[pole], p, w[i]) > 0.0)
            };
            let clearance = if radial_ok(k, pts[0]) && radial_ok(j, pts[3]) {
                polyline_clearance(&pts, &w)
            } else {
                0.0
            };
            let waypoints = pts.iter().map(|&p| frame.branch_point(p / rot)).collect();
            out.push((
                clearance,
                rank,
                ContinuationPath {
                    waypoints,
                    clearance,
                },
            ));
            rank += 1;
        }
    }
    // prefer the nominal directions unless another choice clears clearly better
    out.sort_by(|a, b| {
        let qa = (a.0 / dmin * 20.0).floor();
        let qb = (b.0 / dmin * 20.0).floor();
        qb.partial_cmp(&qa).unwrap().then(a.1.cmp(&b.1))
    });
    out.into_iter().map(|t| t.2).collect()
}

/// Plans a path from the disk of `lambda_k` to the disk of `lambda_j`.
pub fn plan_path(sys: &RankOneSystem, frame: &DirectionFrame, k: usize, j: usize) -> Result<ContinuationPath> {
    if k == j || k >= sys.n() || j >= sys.n() {
        return Err(Error::InvalidArgument(format!("plan_path needs distinct poles, got {k}, {j}")));
    }
    let best = candidate_paths(sys, frame, k, j).into_iter().next().unwrap();
    if best.clearance <= 0.05 * sys.min_separation() {
        return Err(Error::PathPlanningFailure {
            k,
            j,
            clearance: best.clearance,
        });
    }
    Ok(best)
}

/// Continues a vector solution along the path. Returns the end value and an
/// absolute error estimate.
pub fn continue_vector(
    sys: &RankOneSystem,
    path: &ContinuationPath,
    value: &CVec,
    tol: f64,
) -> Result<(CVec, f64)> {
    let pts: Vec<C64> = path.waypoints.iter().map(|p| p.value).collect();
    let y0 = CMat::from_column_slice(value.len(), 1, value.as_slice());
    let t = taylor::march_fuchs(sys, &pts, y0, tol)?;
    let v = t.value.column(0).into_owned();
    let scale = v.norm().max(value.norm());
    if t.error > 1e4 * tol.max(1e-14) * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ToleranceNotMet {
            estimate: t.error,
            tol,
        });
    }
    Ok((v, t.error))
}

/// One extracted coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    /// `c_jk`.
    pub value: C64,
    /// Error estimate.
    pub err: f64,
    /// Equilibrated condition number of the local fundamental matrix used.
    pub cond: f64,
}

/// `c_jk` for `j != k`.
pub fn connection_coefficient(
    sys: &RankOneSystem,
    frame: &DirectionFrame,
    bases: &[LocalBasis],
    k: usize,
    j: usize,
    tol: f64,
) -> Result<Coefficient> {
    if j == k {
        return Err(Error::InvalidArgument("connection_coefficient needs j != k".into()));
    }
    let zero = Coefficient {
        value: C64::new(0.0, 0.0),
        err: 0.0,
        cond: 1.0,
    };
    let ell = match &bases[j].sing_functional {
        Some(l) if bases[j].epsilon => l,
        _ => return Ok(zero),
    };
    if bases[k].psi_k_is_zero() {
        return Ok(zero);
    }
    let cands = candidate_paths(sys, frame, k, j);
    let dmin = sys.min_separation();
    let mut best_cond = f64::INFINITY;
    let mut tried = 0;
    let mut seen_end: Vec<C64> = Vec::new();
    for path in cands {
        if path.clearance <= 0.05 * dmin || tried >= 3 {
            break;
        }
        let e = path.end().value;
        if seen_end.iter().any(|&s| (s - e).norm() < 1e-12) {
            continue;
        }
        seen_end.push(e);
        tried += 1;
        let f = bases[j].eval_fundamental(path.end())?;
        let cond = linalg::cond_equilibrated(&f);
        best_cond = best_cond.min(cond);
        if cond > MAX_COND {
            continue;
        }
        let v0 = bases[k].eval_psi_k(path.start())?;
        let (v, cont_err) = continue_vector(sys, &path, &v0, tol)?;
        let x = linalg::solve(&f, &v).ok_or(Error::IllConditionedDecomposition { j, k, cond })?;
        let value = ell.dot(&x);
        let rel = cont_err / v.norm().max(f64::MIN_POSITIVE) + bases[j].tail_bound + bases[k].tail_bound + 1e-15;
        let l1: f64 = ell.iter().map(|z| z.norm()).sum();
        let err = cond * rel * l1 * linalg::max_abs_vec(&x);
        return Ok(Coefficient { value, err, cond });
    }
    if tried == 0 {
        return Err(Error::PathPlanningFailure { k, j, clearance: 0.0 });
    }
    Err(Error::IllConditionedDecomposition { j, k, cond: best_cond })
}

/// The connection matrix at the frame's direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionMatrix {
    /// Entries `c_jk`.
    pub c: CMat,
    /// Direction used.
    pub eta: f64,
    /// Error estimates.
    pub err: nalgebra::DMatrix<f64>,
    /// Rows forced to zero because `epsilon_j = 0`.
    pub zero_rows: Vec<bool>,
    /// Columns forced to zero because `Psi_k` vanishes.
    pub zero_cols: Vec<bool>,
    /// Eigenvalue of `A1` within `1e-8` of an integer, if any.
    pub integer_eigenvalue: Option<C64>,
}

/// Eigenvalue of `A1` closest to an integer when within `tol`.
pub fn near_integer_eigenvalue(sys: &RankOneSystem, tol: f64) -> Option<C64> {
    linalg::eigenvalues(sys.a1())
        .into_iter()
        .map(|e| (e, (e - C64::new(e.re.round(), 0.0)).norm()))
        .filter(|&(_, d)| d <= tol)
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(e, _)| e)
}

/// Assembles all `c_jk`; pairs are computed concurrently.
pub fn connection_matrix(
    sys: &RankOneSystem,
    frame: &DirectionFrame,
    bases: &[LocalBasis],
    tol: f64,
) -> Result<ConnectionMatrix> {
    let n = sys.n();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (0..n).filter(move |&k| k != j).map(move |k| (j, k)))
        .collect();
    let vals: Vec<Result<Coefficient>> = pairs
        .par_iter()
        .map(|&(j, k)| connection_coefficient(sys, frame, bases, k, j, tol))
        .collect();
    let mut c = CMat::zeros(n, n);
    let mut err = nalgebra::DMatrix::zeros(n, n);
    for (&(j, k), v) in pairs.iter().zip(vals) {
        let v = v?;
        c[(j, k)] = v.value;
        err[(j, k)] = v.err;
    }
    for k in 0..n {
        c[(k, k)] = if sys.case(k).is_integer() {
            C64::new(0.0, 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
    }
    let zero_rows = bases.iter().map(|b| !b.epsilon).collect();
    let zero_cols = bases.iter().map(|b| b.psi_k_is_zero()).collect();
    Ok(ConnectionMatrix {
        c,
        eta: frame.eta,
        err,
        zero_rows,
        zero_cols,
        integer_eigenvalue: near_integer_eigenvalue(sys, 1e-8),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::build_all;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn collinear_path_clears_middle_cut() {
        let sys = RankOneSystem::new(vec![c(0.0), c(1.0), c(2.0)], CMat::from_element(3, 3, c(0.1))).unwrap();
        let f = DirectionFrame::new(&sys, PI / 2.0).unwrap();
        let p = plan_path(&sys, &f, 0, 2).unwrap();
        assert!(p.clearance > 0.05);
        for w in &p.waypoints {
            for &a in &w.args {
                assert!(a > f.eta - 2.0 * PI && a < f.eta);
            }
        }
        assert!(plan_path(&sys, &f, 1, 1).is_err());
    }

    #[test]
    fn diagonal_gives_identity() {
        let a1 = CMat::from_diagonal(&CVec::from_vec(vec![c(0.3), c(-0.7)]));
        let sys = RankOneSystem::new(vec![c(0.0), c(1.0)], a1).unwrap();
        let f = DirectionFrame::new(&sys, PI / 2.0).unwrap();
        let b = build_all(&sys, 40).unwrap();
        let cm = connection_matrix(&sys, &f, &b, 1e-13).unwrap();
        assert!(linalg::max_abs(&(cm.c - CMat::identity(2, 2))) < 1e-13);
    }
}
