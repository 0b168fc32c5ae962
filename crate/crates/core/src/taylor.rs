//! Taylor-series integrators.
//!
//! Both systems have polynomial coefficients after clearing denominators, so
//! the Taylor coefficients of a solution around a regular point follow from a
//! short linear recursion. Steps are limited to half the distance to the
//! nearest singularity, which makes the series converge geometrically.

use crate::{linalg, CMat, Error, RankOneSystem, Result, C64};

const MAX_TERMS: usize = 400;

/// Result of transporting a matrix of solutions along a polyline.
#[derive(Debug, Clone)]
pub struct Transport {
    /// Value at the end point.
    pub value: CMat,
    /// Accumulated absolute error estimate (max-abs norm).
    pub error: f64,
    /// Number of Taylor steps taken.
    pub steps: usize,
}

/// Evaluates `sum c_t h^t`.
pub fn horner(c: &[CMat], h: C64) -> CMat {
    let mut acc = c.last().unwrap().clone();
    for ct in c.iter().rev().skip(1) {
        acc *= h;
        acc += ct;
    }
    acc
}

/// Evaluates the derivative `sum t c_t h^{t-1}`.
pub fn horner_deriv(c: &[CMat], h: C64) -> CMat {
    let (nr, nc) = c[0].shape();
    let mut acc = CMat::zeros(nr, nc);
    for t in (1..c.len()).rev() {
        acc *= h;
        acc += &c[t] * C64::new(t as f64, 0.0);
    }
    acc
}

fn stop(terms: &[f64], scale: f64, tol: f64) -> bool {
    let l = terms.len();
    l >= 3 && terms[l - 1] <= tol * scale && terms[l - 2] <= tol * scale
}

/// Taylor coefficients at a regular point `lam0` of `(A0 - lambda) Psi' = (A1 + I) Psi`
/// for the initial value `y0`, enough to reach `|h| = radius` with relative accuracy `tol`.
pub fn fuchs_taylor(sys: &RankOneSystem, lam0: C64, y0: &CMat, radius: f64, tol: f64) -> Vec<CMat> {
    let n = sys.n();
    let dinv: Vec<C64> = sys.lambda().iter().map(|&l| 1.0 / (l - lam0)).collect();
    let a1p = sys.a1() + CMat::identity(n, n);
    let scale = linalg::max_abs(y0).max(f64::MIN_POSITIVE);
    let mut c = vec![y0.clone()];
    let mut mags = vec![scale];
    let mut rp = 1.0;
    for t in 0..MAX_TERMS {
        let ct = &c[t];
        let mut next = &a1p * ct + ct * C64::new(t as f64, 0.0);
        for i in 0..n {
            let f = dinv[i] / (t as f64 + 1.0);
            for j in 0..next.ncols() {
                next[(i, j)] *= f;
            }
        }
        rp *= radius;
        mags.push(linalg::max_abs(&next) * rp);
        c.push(next);
        if stop(&mags, scale, tol) {
            break;
        }
    }
    c
}

fn tail_estimate(c: &[CMat], h: f64) -> f64 {
    let l = c.len();
    let a = linalg::max_abs(&c[l - 1]) * h.powi(l as i32 - 1);
    let b = linalg::max_abs(&c[l - 2]) * h.powi(l as i32 - 2);
    2.0 * (a + b)
}

/// Transports solutions of the Fuchsian system along the polyline `pts`.
pub fn march_fuchs(sys: &RankOneSystem, pts: &[C64], y0: CMat, tol: f64) -> Result<Transport> {
    let mut y = y0;
    let mut err = 0.0;
    let mut steps = 0;
    let span = sys.max_separation().max(1.0);
    for w in pts.windows(2) {
        let (mut z, end) = (w[0], w[1]);
        loop {
            let rem = (end - z).norm();
            if rem <= 1e-15 * span {
                break;
            }
            let dist = sys
                .lambda()
                .iter()
                .map(|&l| (l - z).norm())
                .fold(f64::INFINITY, f64::min);
            if dist < 1e-9 * span {
                return Err(Error::StepUnderflow { at: z });
            }
            let hmag = (0.5 * dist).min(rem);
            let h = (end - z) / rem * hmag;
            let c = fuchs_taylor(sys, z, &y, hmag, tol * 0.1);
            err += tail_estimate(&c, hmag);
            y = horner(&c, h);
            z = if hmag == rem { end } else { z + h };
            steps += 1;
        }
    }
    Ok(Transport {
        value: y,
        error: err,
        steps,
    })
}

/// The system `z y' = (P z + Q) y`. With `P = A0`, `Q = A1` this is the
/// original rank-one system; the oracle also integrates gauged adjoints.
#[derive(Debug, Clone)]
pub struct ZSystem {
    /// Coefficient of `z`.
    pub p: CMat,
    /// Constant coefficient.
    pub q: CMat,
    pnorm: f64,
}

impl ZSystem {
    /// Wraps the coefficient pair.
    pub fn new(p: CMat, q: CMat) -> Self {
        let pnorm = (0..p.nrows())
            .map(|i| p.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max);
        Self { p, q, pnorm }
    }

    /// The rank-one system itself.
    pub fn original(sys: &RankOneSystem) -> Self {
        Self::new(sys.a0(), sys.a1().clone())
    }

    /// Transposed adjoint gauged by `e^{lambda_k z} z^{lambda'_k}`: its
    /// columns are rows `w` of inverse solutions multiplied by that scalar.
    pub fn gauged_adjoint(sys: &RankOneSystem, k: usize) -> Self {
        let n = sys.n();
        let id = CMat::identity(n, n);
        let p = -(sys.a0() - &id * sys.lambda()[k]);
        let q = -(sys.a1() - &id * sys.lambda_prime()[k]).transpose();
        Self::new(p, q)
    }

    /// Maximal step length at `z`.
    pub fn max_step(&self, z: C64) -> f64 {
        let lim = if self.pnorm > 0.0 { 1.0 / self.pnorm } else { f64::INFINITY };
        (0.5 * z.norm()).min(lim)
    }

    /// Taylor coefficients at `z0`.
    pub fn taylor(&self, z0: C64, y0: &CMat, radius: f64, tol: f64) -> Vec<CMat> {
        let n = self.p.nrows();
        let base = &self.p * z0 + &self.q;
        let scale = linalg::max_abs(y0).max(f64::MIN_POSITIVE);
        let mut c = vec![y0.clone()];
        let mut mags = vec![scale];
        let mut rp = 1.0;
        let inv_z0 = 1.0 / z0;
        for t in 0..MAX_TERMS {
            let mut next = &base * &c[t] - &c[t] * C64::new(t as f64, 0.0);
            if t > 0 {
                next += &self.p * &c[t - 1];
            }
            next *= inv_z0 / (t as f64 + 1.0);
            rp *= radius;
            mags.push(linalg::max_abs(&next) * rp);
            c.push(next);
            if stop(&mags, scale, tol) {
                break;
            }
        }
        debug_assert_eq!(c[0].nrows(), n);
        c
    }

    /// Transports along a polyline (points on the universal cover are given
    /// as complex numbers; consecutive points must not wind around 0).
    /// `renorm` is called after each step and may rescale or recombine columns.
    pub fn march(
        &self,
        pts: &[C64],
        y0: CMat,
        tol: f64,
        mut renorm: Option<&mut dyn FnMut(&mut CMat)>,
    ) -> Result<Transport> {
        let mut y = y0;
        let mut err = 0.0;
        let mut steps = 0;
        for w in pts.windows(2) {
            let (mut z, end) = (w[0], w[1]);
            loop {
                let rem = (end - z).norm();
                if rem <= 1e-15 * end.norm().max(1.0) {
                    break;
                }
                let hmax = self.max_step(z);
                if hmax < 1e-12 {
                    return Err(Error::StepUnderflow { at: z });
                }
                let hmag = hmax.min(rem);
                let h = (end - z) / rem * hmag;
                let c = self.taylor(z, &y, hmag, tol * 0.1);
                let scale = linalg::max_abs(&y).max(f64::MIN_POSITIVE);
                y = horner(&c, h);
                err = err * linalg::max_abs(&y) / scale + tail_estimate(&c, hmag);
                if let Some(f) = renorm.as_mut() {
                    let before = linalg::max_abs(&y).max(f64::MIN_POSITIVE);
                    f(&mut y);
                    err *= linalg::max_abs(&y) / before;
                }
                z = if hmag == rem { end } else { z + h };
                steps += 1;
            }
        }
        Ok(Transport {
            value: y,
            error: err,
            steps,
        })
    }
}

/// Points of an arc of radius `r` from angle `a` to angle `b`, spaced at
/// most `max_step` radians apart (both end points included).
pub fn arc_points(r: f64, a: f64, b: f64, max_step: f64) -> Vec<C64> {
    let k = (((b - a).abs() / max_step).ceil() as usize).max(1);
    (0..=k)
        .map(|i| C64::from_polar(r, a + (b - a) * i as f64 / k as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CVec;

    #[test]
    fn scalar_power_law() {
        // (A0 - lambda) psi' = (a + 1) psi with n = 2 decoupled: psi_1 = (lambda - l1)^{-(a+1)}
        let a1 = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(0.3, 0.0), C64::new(-0.7, 0.0)]));
        let sys = RankOneSystem::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)], a1).unwrap();
        let p0 = C64::new(0.2, -0.3);
        let p1 = C64::new(0.5, -1.0);
        let p2 = C64::new(1.3, -0.2);
        let f = |l: C64| CMat::from_row_slice(2, 1, &[l.powc(C64::new(-1.3, 0.0)), (l - 1.0).powc(C64::new(-0.3, 0.0))]);
        let t = march_fuchs(&sys, &[p0, p1, p2], f(p0), 1e-14).unwrap();
        assert!(linalg::max_abs(&(t.value - f(p2))) < 1e-12);
    }

    #[test]
    fn z_system_exponential() {
        // z y' = (p z + q) y, scalar: y = z^q e^{p z}
        let p = C64::new(-1.0, 0.5);
        let q = C64::new(0.3, 0.2);
        let s = ZSystem::new(CMat::from_element(1, 1, p), CMat::from_element(1, 1, q));
        let exact = |z: C64| z.powc(q) * (p * z).exp();
        let z0 = C64::new(1.0, 1.0);
        let mut pts = vec![z0];
        pts.extend(arc_points(z0.norm(), z0.arg(), 2.0, 0.3));
        pts.push(C64::from_polar(6.0, 2.0));
        let t = s.march(&pts, CMat::from_element(1, 1, exact(z0)), 1e-14, None).unwrap();
        let e = exact(C64::from_polar(6.0, 2.0));
        assert!((t.value[(0, 0)] - e).norm() < 1e-12 * e.norm());
    }
}
