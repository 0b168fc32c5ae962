//! Columns of the sector solution as Laplace integrals of Fuchsian solutions.
//!
//! The path hugs the cut `L_k`. Inside the local disk the integrand is a
//! truncated Frobenius series and each term integrates in closed form; the
//! rest of the cut is covered by Gauss-Legendre panels with the Fuchsian
//! solution continued along the cut by Taylor steps.

use std::f64::consts::TAU;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::local::{Column, LocalBasis, Series};
use crate::taylor::march_fuchs;
use crate::{CMat, CVec, CaseTag, DirectionFrame, Error, RankOneSystem, Result, C64, TWO_PI_I};

const NODES: usize = 20;
const MAX_PANELS: usize = 5000;
const STEP_TOL: f64 = 1e-13;
const CIRCLE_PANELS: usize = 16;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut v = GaussLegendre::new(NonZeroUsize::new(NODES).unwrap())
            .as_node_weight_pairs()
            .to_vec();
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        v
    })
}

fn check_half_plane(z: C64, eta: f64) -> Result<f64> {
    let c = -(z * C64::from_polar(1.0, eta)).re;
    if c > 0.0 {
        Ok(c)
    } else {
        Err(Error::InvalidArgument(format!("z = {z} not in Re(z e^(i eta)) < 0")))
    }
}

/// `sum_l b_l sum_m z^m u_R^{l+m+s+1} / (m! (l+m+s+1))` on the branch
/// `ln u_R = ln r + i eta`: the termwise integral of `e^{z u} S(u)` from 0 to
/// `u_R` for integer `s >= 0`, and, times `1 - e^{-2 pi i s}`, over the part of
/// the loop inside the disk otherwise.
fn termwise(series: &Series, z: C64, r: f64, eta: f64) -> CVec {
    let n = series.coeffs[0].len();
    let lnr = C64::new(r.ln(), eta);
    let w = z * C64::from_polar(r, eta);
    let mut acc = CVec::zeros(n);
    for (l, b) in series.coeffs.iter().enumerate() {
        let p0 = series.exponent + (l as f64 + 1.0);
        let mut term = C64::new(1.0, 0.0);
        let mut sum = C64::new(0.0, 0.0);
        let mut peak: f64 = 0.0;
        for m in 0..400 {
            if m > 0 {
                term *= w / m as f64;
            }
            let add = term / (p0 + m as f64);
            sum += add;
            peak = peak.max(add.norm());
            if m as f64 > w.norm() && add.norm() <= 1e-18 * peak {
                break;
            }
        }
        acc += b * (sum * (p0 * lnr).exp());
    }
    acc
}

/// `int_r^inf e^{z t e^{i eta}} Psi(lambda_k + t e^{i eta}) e^{i eta} dt`, with `Psi`
/// continued from its value `start` at `t = r`.
fn ray_integral(sys: &RankOneSystem, k: usize, start: CVec, z: C64, r: f64, eta: f64) -> Result<CVec> {
    let lk = sys.lambda()[k];
    let dir = C64::from_polar(1.0, eta);
    let zd = z * dir;
    let n = sys.n();
    let mut acc = CVec::zeros(n);
    let mut psi = CMat::from_columns(&[start]);
    let mut pos = lk + dir * r;
    let mut t = r;
    let mut peak: f64 = 0.0;
    let mut quiet = 0;
    for _ in 0..MAX_PANELS {
        let dist = sys
            .lambda()
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &l)| (l - pos).norm())
            .fold(f64::INFINITY, f64::min);
        let h = (4.0 / z.norm()).min(1.0).min(0.5 * dist);
        let mut panel = CVec::zeros(n);
        for &(x, wgt) in rule() {
            let tn = t + 0.5 * h * (x + 1.0);
            let node = lk + dir * tn;
            psi = march_fuchs(sys, &[pos, node], psi, STEP_TOL)?.value;
            pos = node;
            panel += psi.column(0) * ((zd * tn).exp() * dir * (0.5 * h * wgt));
        }
        let end = lk + dir * (t + h);
        psi = march_fuchs(sys, &[pos, end], psi, STEP_TOL)?.value;
        pos = end;
        t += h;
        acc += &panel;
        let size = panel.norm();
        peak = peak.max(size);
        let edge = (zd * t).exp().norm() * psi.column(0).norm();
        if size <= 1e-17 * peak.max(f64::MIN_POSITIVE) && edge <= 1e-17 * peak.max(f64::MIN_POSITIVE) {
            quiet += 1;
            if quiet >= 3 {
                return Ok(acc);
            }
        } else {
            quiet = 0;
        }
        if peak == 0.0 && edge == 0.0 {
            return Ok(acc);
        }
    }
    Err(Error::QuadratureNotConverged { k })
}

fn basis_for(bases: &[LocalBasis], k: usize) -> Result<&LocalBasis> {
    bases
        .get(k)
        .filter(|b| b.k == k)
        .ok_or_else(|| Error::InvalidArgument(format!("no local basis for pole {k}")))
}

/// Column `k` of the canonical solution for the sector of `frame`, evaluated at
/// `z` with `Re(z e^{i eta}) < 0`, from the case-appropriate Laplace integral.
pub fn laplace_column(
    sys: &RankOneSystem,
    frame: &DirectionFrame,
    bases: &[LocalBasis],
    k: usize,
    z: C64,
) -> Result<CVec> {
    let eta = frame.eta;
    check_half_plane(z, eta)?;
    let b = basis_for(bases, k)?;
    let n = sys.n();
    let r = 0.5 * b.radius;
    let lp = sys.lambda_prime()[k];
    let lnr = C64::new(r.ln(), eta);
    let u_r = C64::from_polar(r, eta);
    let mut v = match &b.psi_k {
        Some(s) => {
            let inner = termwise(s, z, r, eta);
            let outer = ray_integral(sys, k, s.eval(u_r, lnr), z, r, eta)?;
            inner + outer
        }
        None => CVec::zeros(n),
    };
    match b.case {
        CaseTag::Generic => v *= (C64::new(1.0, 0.0) - (TWO_PI_I * lp).exp()) / TWO_PI_I,
        CaseTag::ResonantNonneg(nn) => {
            let nn = nn as usize;
            let mut zq = C64::new(1.0, 0.0);
            for q in 0..=nn {
                if q > 0 {
                    zq *= z / q as f64;
                }
                v += &b.poly_p[nn - q] * zq;
            }
        }
        CaseTag::Jordan | CaseTag::ResonantNeg(_) => {}
    }
    Ok(v * (sys.lambda()[k] * z).exp())
}

/// The same column from the closed loop around the cut: a circle around
/// `lambda_k` plus both edges of the cut, each edge continued separately.
/// Only defined when `Psi_k^(sing)` is not identically zero and the pole is
/// not in the negative resonant case.
pub fn laplace_loop_column(
    sys: &RankOneSystem,
    frame: &DirectionFrame,
    bases: &[LocalBasis],
    k: usize,
    z: C64,
) -> Result<CVec> {
    let eta = frame.eta;
    check_half_plane(z, eta)?;
    let b = basis_for(bases, k)?;
    let col: &Column = match (&b.psi_sing, b.case) {
        (_, CaseTag::ResonantNeg(_)) | (None, _) => {
            return Err(Error::InvalidArgument(format!("no loop representation at pole {k}")))
        }
        (Some(c), _) => c,
    };
    let n = sys.n();
    let r = 0.5 * b.radius;
    let mut circle = CVec::zeros(n);
    let span = TAU / CIRCLE_PANELS as f64;
    for p in 0..CIRCLE_PANELS {
        let a = eta - TAU + span * p as f64;
        for &(x, w) in rule() {
            let phi = a + 0.5 * span * (x + 1.0);
            let u = C64::from_polar(r, phi);
            let val = col.eval(u, C64::new(r.ln(), phi));
            circle += val * ((z * u).exp() * C64::new(0.0, 1.0) * u * (0.5 * span * w));
        }
    }
    let u_r = C64::from_polar(r, eta);
    let right = col.eval(u_r, C64::new(r.ln(), eta));
    let left = col.eval(u_r, C64::new(r.ln(), eta - TAU));
    let edges = ray_integral(sys, k, right, z, r, eta)? - ray_integral(sys, k, left, z, r, eta)?;
    Ok((circle + edges) * ((sys.lambda()[k] * z).exp() / TWO_PI_I))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::build_all;

    #[test]
    fn diagonal_generic_closed_form() {
        let lp = C64::new(0.3, 0.0);
        let a1 = CMat::from_diagonal(&CVec::from_vec(vec![lp, C64::new(-0.7, 0.0)]));
        let sys = RankOneSystem::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)], a1).unwrap();
        let frame = DirectionFrame::new(&sys, std::f64::consts::FRAC_PI_2).unwrap();
        let bases = build_all(&sys, 40).unwrap();
        // arg z in (tau - pi, tau) with tau = 3 pi / 2 - eta = pi
        let z = C64::from_polar(6.0, 2.5);
        let v = laplace_column(&sys, &frame, &bases, 0, z).unwrap();
        let expect = (C64::new(z.norm().ln(), 2.5) * lp).exp();
        assert!((v[0] - expect).norm() < 1e-10 * expect.norm());
        assert!(v[1].norm() < 1e-12);
        let w = laplace_loop_column(&sys, &frame, &bases, 0, z).unwrap();
        assert!((w[0] - expect).norm() < 1e-10 * expect.norm());
    }

    #[test]
    fn rejects_wrong_half_plane() {
        let sys = RankOneSystem::new(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)], CMat::identity(2, 2) * C64::new(0.2, 0.0)).unwrap();
        let frame = DirectionFrame::new(&sys, std::f64::consts::FRAC_PI_2).unwrap();
        let bases = build_all(&sys, 20).unwrap();
        assert!(laplace_column(&sys, &frame, &bases, 0, C64::new(0.0, -3.0)).is_err());
    }
}
