//! Cut-plane geometry: critical directions, Stokes rays, branches and the
//! dominance order attached to an admissible direction `eta`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;

use crate::{Error, RankOneSystem, Result, C64};

/// Tolerance for merging coincident critical values and for admissibility.
pub const ANGLE_TOL: f64 = 1e-12;

/// Reduces `a` into the half-open window `(eta - 2 pi, eta]`.
pub fn arg_in_window(a: f64, eta: f64) -> f64 {
    let k = ((eta - a) / TAU).floor();
    let r = a + k * TAU;
    if r <= eta - TAU {
        r + TAU
    } else {
        r
    }
}

/// Distance between two angles modulo `2 pi`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Critical values `eta_nu` in one window `(-pi/2, 3pi/2]`, indexed so that
/// `eta_{nu + h m} = eta_nu - 2 pi h`.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalDirections {
    values: Vec<f64>,
    /// Number of critical values per turn.
    pub m: usize,
    /// `m / 2`.
    pub mu: usize,
}

/// Collects `arg(lambda_j - lambda_k)` for all ordered pairs.
pub fn critical_directions(sys: &RankOneSystem) -> CriticalDirections {
    let lam = sys.lambda();
    let n = sys.n();
    let mut raw = Vec::with_capacity(n * (n - 1));
    for j in 0..n {
        for k in 0..n {
            if j != k {
                let mut a = (lam[j] - lam[k]).arg();
                if a <= -FRAC_PI_2 {
                    a += TAU;
                }
                raw.push(a);
            }
        }
    }
    raw.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut values: Vec<f64> = Vec::new();
    for a in raw {
        match values.last() {
            Some(&last) if last - a <= ANGLE_TOL => {}
            _ => values.push(a),
        }
    }
    if values.len() > 1 {
        let first = values[0];
        let last = *values.last().unwrap();
        if angle_distance(first, last) <= ANGLE_TOL {
            values.pop();
        }
    }
    let m = values.len();
    CriticalDirections {
        values,
        m,
        mu: m / 2,
    }
}

impl CriticalDirections {
    /// Fundamental window, decreasing.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `eta_nu` for any integer `nu`.
    pub fn eta(&self, nu: i64) -> f64 {
        let m = self.m as i64;
        let h = nu.div_euclid(m);
        self.values[nu.rem_euclid(m) as usize] - TAU * h as f64
    }

    /// Stokes ray `tau_nu = 3 pi / 2 - eta_nu`.
    pub fn tau(&self, nu: i64) -> f64 {
        1.5 * PI - self.eta(nu)
    }

    /// Stokes rays of the fundamental window.
    pub fn tau_values(&self) -> Vec<f64> {
        self.values.iter().map(|e| 1.5 * PI - e).collect()
    }

    /// Distance (mod `2 pi`) from `eta` to the nearest critical value.
    pub fn distance(&self, eta: f64) -> f64 {
        self.values
            .iter()
            .map(|&v| angle_distance(v, eta))
            .fold(f64::INFINITY, f64::min)
    }

    /// Index `nu` with `eta_{nu+1} < eta < eta_nu`.
    pub fn interval(&self, eta: f64) -> Result<i64> {
        let d = self.distance(eta);
        if d <= ANGLE_TOL {
            return Err(Error::InadmissibleDirection { eta, distance: d });
        }
        let h = ((1.5 * PI - eta) / TAU).floor();
        let et = eta + TAU * h;
        let h = h as i64;
        let mut nu0: i64 = -1;
        for (r, &v) in self.values.iter().enumerate() {
            if v > et {
                nu0 = r as i64;
            }
        }
        Ok(nu0 + h * self.m as i64)
    }

    /// Midpoint of `(eta_{nu+1}, eta_nu)`.
    pub fn midpoint(&self, nu: i64) -> f64 {
        0.5 * (self.eta(nu) + self.eta(nu + 1))
    }

    /// Midpoint of the widest gap between consecutive critical values,
    /// reduced into `(-pi/2, 3pi/2]`.
    pub fn widest_gap_midpoint(&self) -> f64 {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for nu in 0..self.m as i64 {
            let gap = self.eta(nu) - self.eta(nu + 1);
            if gap > best.0 + 1e-12 {
                best = (gap, self.midpoint(nu));
            }
        }
        let mut e = best.1;
        while e <= -FRAC_PI_2 {
            e += TAU;
        }
        while e > 1.5 * PI {
            e -= TAU;
        }
        e
    }

    /// Smallest gap between consecutive critical values.
    pub fn min_gap(&self) -> f64 {
        (0..self.m as i64)
            .map(|nu| self.eta(nu) - self.eta(nu + 1))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A point of the cut plane with the branch of every `arg(lambda - lambda_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPoint {
    /// The point `lambda`.
    pub value: C64,
    /// Determinations of `arg(lambda - lambda_k)` in `(eta - 2 pi, eta)`.
    pub args: Vec<f64>,
}

impl BranchPoint {
    /// `ln(lambda - lambda_k)` on this branch.
    pub fn ln(&self, k: usize, lambda_k: C64) -> C64 {
        C64::new((self.value - lambda_k).norm().ln(), self.args[k])
    }
}

/// An admissible direction with its geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionFrame {
    /// The direction of the cuts.
    pub eta: f64,
    /// Index of the critical interval containing `eta`.
    pub nu: i64,
    /// Critical values.
    pub criticals: CriticalDirections,
    /// `eta_jk`: determination of `arg(lambda_j - lambda_k)` in the window.
    pub eta_jk: DMatrix<f64>,
    prec: DMatrix<bool>,
    order: Vec<usize>,
    lambda: Vec<C64>,
}

impl DirectionFrame {
    /// Builds the frame, rejecting critical directions.
    pub fn new(sys: &RankOneSystem, eta: f64) -> Result<Self> {
        let criticals = critical_directions(sys);
        let nu = criticals.interval(eta)?;
        let n = sys.n();
        let lam = sys.lambda();
        let mut eta_jk = DMatrix::zeros(n, n);
        let mut prec = DMatrix::from_element(n, n, false);
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    let a = arg_in_window((lam[j] - lam[k]).arg(), eta);
                    eta_jk[(j, k)] = a;
                    prec[(j, k)] = a > eta - PI && a < eta;
                }
            }
        }
        let rot = C64::from_polar(1.0, -eta);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let (ia, ib) = ((lam[a] * rot).im, (lam[b] * rot).im);
            ia.partial_cmp(&ib).unwrap().then(a.cmp(&b))
        });
        Ok(Self {
            eta,
            nu,
            criticals,
            eta_jk,
            prec,
            order,
            lambda: lam.to_vec(),
        })
    }

    /// Frame at the midpoint of the widest critical gap.
    pub fn default_for(sys: &RankOneSystem) -> Result<Self> {
        Self::new(sys, critical_directions(sys).widest_gap_midpoint())
    }

    /// Dimension.
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// `j ≺ k`: the cut `L_j` lies to the right of `L_k`.
    pub fn precedes(&self, j: usize, k: usize) -> bool {
        self.prec[(j, k)]
    }

    /// Linear extension of the dominance order, least element first.
    pub fn dominance_order(&self) -> &[usize] {
        &self.order
    }

    /// Position of each pole in [`Self::dominance_order`].
    pub fn rank(&self) -> Vec<usize> {
        let mut r = vec![0; self.n()];
        for (pos, &k) in self.order.iter().enumerate() {
            r[k] = pos;
        }
        r
    }

    /// Stokes rays bounding the overlap `S(tau_nu, tau_{nu+1})`.
    pub fn stokes_rays(&self) -> (f64, f64) {
        (self.criticals.tau(self.nu), self.criticals.tau(self.nu + 1))
    }

    /// Attaches branches to a point of the cut plane.
    pub fn branch_point(&self, value: C64) -> BranchPoint {
        let args = self
            .lambda
            .iter()
            .map(|&l| arg_in_window((value - l).arg(), self.eta))
            .collect();
        BranchPoint { value, args }
    }

    /// The same geometry with `eta` replaced by `eta - 2 pi`.
    pub fn shifted_down(&self) -> Self {
        let mut f = self.clone();
        f.eta -= TAU;
        f.nu += self.criticals.m as i64;
        f.eta_jk.iter_mut().for_each(|a| {
            if *a != 0.0 {
                *a -= TAU
            }
        });
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CMat;

    fn sys(l: &[(f64, f64)]) -> RankOneSystem {
        let n = l.len();
        RankOneSystem::new(
            l.iter().map(|&(a, b)| C64::new(a, b)).collect(),
            CMat::from_element(n, n, C64::new(0.1, 0.0)),
        )
        .unwrap()
    }

    #[test]
    fn two_real_poles() {
        let s = sys(&[(0., 0.), (1., 0.)]);
        let c = critical_directions(&s);
        assert_eq!(c.m, 2);
        assert_eq!(c.mu, 1);
        assert!((c.values()[0] - PI).abs() < 1e-15);
        assert!(c.values()[1].abs() < 1e-15);
        let t = c.tau_values();
        assert!((t[0] - FRAC_PI_2).abs() < 1e-15 && (t[1] - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn vertical_pair() {
        let c = critical_directions(&sys(&[(0., 0.), (0., 1.)]));
        assert_eq!(c.m, 2);
        assert!((c.values()[0] - 1.5 * PI).abs() < 1e-15);
        assert!((c.values()[1] - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn frame_two_poles() {
        let s = sys(&[(0., 0.), (1., 0.)]);
        let f = DirectionFrame::new(&s, FRAC_PI_2).unwrap();
        assert!((f.eta_jk[(0, 1)] + PI).abs() < 1e-15);
        assert!(f.eta_jk[(1, 0)].abs() < 1e-15);
        assert!(f.precedes(1, 0));
        assert!(!f.precedes(0, 1));
        assert!(!f.precedes(0, 0));
        assert_eq!(f.dominance_order(), &[1, 0]);
        assert!(matches!(
            DirectionFrame::new(&s, PI),
            Err(Error::InadmissibleDirection { .. })
        ));
    }

    #[test]
    fn interval_indexing() {
        let s = sys(&[(0., 0.), (1., 0.), (1., 1.)]);
        let c = critical_directions(&s);
        for nu in -7..13i64 {
            let e = c.midpoint(nu);
            assert_eq!(c.interval(e).unwrap(), nu, "nu = {nu}");
        }
    }

    #[test]
    fn window_reduction() {
        for &eta in &[0.3, -2.0, 7.5] {
            for i in 0..50 {
                let a = -10.0 + 0.4 * i as f64;
                let r = arg_in_window(a, eta);
                assert!(r > eta - TAU && r <= eta);
                assert!(angle_distance(r, a) < 1e-12);
            }
        }
    }
}
