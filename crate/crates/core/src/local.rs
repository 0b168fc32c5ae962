//! Frobenius bases of the Fuchsian system at each pole.
//!
//! Write `u = lambda - lambda_k` and `d_i = lambda_k - lambda_i`. Substituting
//! `sum_t q_t u^{t + rho}` into the system, with an optional right-hand side
//! produced by a logarithmic term, gives for every `t`
//!
//! ```text
//! i != k:  -(t + rho) d_i q_{t,i} = (t - 1 + rho) q_{t-1,i} + ((A1 + I) q_{t-1})_i + h_i(t - 1)
//! i == k:  -(t + rho + lambda'_k + 1) q_{t,k} = sum_{j != k} (A1)_kj q_{t,j} + h_k(t)
//! ```
//!
//! A vanishing left coefficient turns the equation into a consistency
//! condition; this is where resonance data (`r` vector or row) comes from.

use rayon::prelude::*;

use crate::frame::BranchPoint;
use crate::linalg::{factorial, gamma};
use crate::{CMat, CVec, CaseTag, Error, RankOneSystem, Result, C64};

/// Fraction of the nearest-pole distance used as validity radius.
pub const RADIUS_FRACTION: f64 = 0.4;
/// Default truncation order.
pub const DEFAULT_ORDER: usize = 80;
/// Tail bound above which a basis is rejected.
pub const MAX_TAIL: f64 = 1e-6;

/// `u^exponent * sum_t coeffs[t] u^t` with vector coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    /// Leading exponent.
    pub exponent: C64,
    /// Vector coefficients.
    pub coeffs: Vec<CVec>,
}

impl Series {
    fn power(&self, lnu: C64) -> C64 {
        if self.exponent == C64::new(0.0, 0.0) {
            C64::new(1.0, 0.0)
        } else {
            (self.exponent * lnu).exp()
        }
    }

    /// Value at `u` with `ln u` supplied by the caller (branch choice).
    pub fn eval(&self, u: C64, lnu: C64) -> CVec {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc *= u;
            acc += c;
        }
        acc * self.power(lnu)
    }

    /// Derivative with respect to `u`.
    pub fn eval_deriv(&self, u: C64, lnu: C64) -> CVec {
        let n = self.coeffs[0].len();
        let mut acc = CVec::zeros(n);
        for t in (0..self.coeffs.len()).rev() {
            acc *= u;
            acc += &self.coeffs[t] * (self.exponent + t as f64);
        }
        acc * self.power(lnu) / u
    }

    /// Coefficient of `u^{s + rho}` where `rho = self.exponent - delta`.
    fn at(&self, s: i64, delta: i64) -> Option<&CVec> {
        let idx = s - delta;
        if idx < 0 {
            None
        } else {
            self.coeffs.get(idx as usize)
        }
    }

    fn scaled(&self, f: C64) -> Series {
        Series {
            exponent: self.exponent,
            coeffs: self.coeffs.iter().map(|c| c * f).collect(),
        }
    }

    /// Relative size of the last two terms at radius `r`.
    fn tail(&self, r: f64) -> f64 {
        let mags: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(t, c)| c.iter().map(|z| z.norm()).fold(0.0, f64::max) * r.powi(t as i32))
            .collect();
        let peak = mags.iter().cloned().fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let l = mags.len();
        2.0 * (mags[l - 1] + mags[l - 2]) / peak
    }
}

/// One column of a local fundamental matrix: `main(u) + ln(u) * log(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    /// Power-series part.
    pub main: Series,
    /// Coefficient series of `ln u`, if any.
    pub log: Option<Series>,
}

impl Column {
    /// Value at `u`.
    pub fn eval(&self, u: C64, lnu: C64) -> CVec {
        let mut v = self.main.eval(u, lnu);
        if let Some(g) = &self.log {
            v += g.eval(u, lnu) * lnu;
        }
        v
    }

    /// Derivative with respect to `u`.
    pub fn eval_deriv(&self, u: C64, lnu: C64) -> CVec {
        let mut v = self.main.eval_deriv(u, lnu);
        if let Some(g) = &self.log {
            v += g.eval(u, lnu) / u + g.eval_deriv(u, lnu) * lnu;
        }
        v
    }
}

/// Conditioning alerts raised while building a basis.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// A non-integer `lambda'_k` lies within `1e-6` of an integer.
    NearResonance {
        /// the offending value
        lambda_prime: C64,
    },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::NearResonance { lambda_prime } => {
                write!(f, "lambda' = {lambda_prime} is within 1e-6 of an integer")
            }
        }
    }
}

/// Frobenius fundamental system at pole `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    /// Pole index.
    pub k: usize,
    /// The pole.
    pub lambda_k: C64,
    /// Resonance class.
    pub case: CaseTag,
    /// Truncation length.
    pub order: usize,
    /// Columns of the local fundamental matrix.
    pub columns: Vec<Column>,
    /// `Psi_k`, `None` when it vanishes identically.
    pub psi_k: Option<Series>,
    /// `Psi_k^(sing)`, `None` when it vanishes identically.
    pub psi_sing: Option<Column>,
    /// Functional `l` with `c_jk = l . x` for the decomposition `x` of a
    /// continued column; `None` when `epsilon` is 0.
    pub sing_functional: Option<CVec>,
    /// Resonance vector (nonnegative case) or row (negative case).
    pub r: Option<CVec>,
    /// Coefficients of `P_N` (nonnegative case).
    pub poly_p: Vec<CVec>,
    /// Existence of a singular solution.
    pub epsilon: bool,
    /// Validity radius.
    pub radius: f64,
    /// Relative truncation estimate at the radius.
    pub tail_bound: f64,
    /// Conditioning alerts.
    pub warnings: Vec<Warning>,
}

struct Rec {
    a1p: CMat,
    arow: Vec<C64>,
    d: Vec<C64>,
    k: usize,
    lp: C64,
    n: usize,
}

impl Rec {
    fn new(sys: &RankOneSystem, k: usize) -> Self {
        let n = sys.n();
        let lam = sys.lambda();
        Rec {
            a1p: sys.a1() + CMat::identity(n, n),
            arow: (0..n).map(|j| sys.a1()[(k, j)]).collect(),
            d: (0..n).map(|i| lam[k] - lam[i]).collect(),
            k,
            lp: sys.lambda_prime()[k],
            n,
        }
    }

    fn unit(&self, j: usize) -> CVec {
        let mut e = CVec::zeros(self.n);
        e[j] = C64::new(1.0, 0.0);
        e
    }

    /// Right-hand sides of the rows `i != k` at step `t`.
    fn rows_rhs(&self, t: usize, rho: C64, q_prev: &CVec, h_prev: &CVec) -> CVec {
        let mut r = &self.a1p * q_prev + q_prev * (rho + (t as f64 - 1.0)) + h_prev;
        r[self.k] = C64::new(0.0, 0.0);
        r
    }

    fn rows(&self, t: usize, rho: C64, q_prev: &CVec, h_prev: &CVec) -> CVec {
        let r = self.rows_rhs(t, rho, q_prev, h_prev);
        let c = rho + t as f64;
        debug_assert!(c != C64::new(0.0, 0.0));
        let mut q = CVec::zeros(self.n);
        for i in 0..self.n {
            if i != self.k {
                q[i] = -r[i] / (c * self.d[i]);
            }
        }
        q
    }

    fn k_rhs(&self, q: &CVec, hk: C64) -> C64 {
        let mut s = hk;
        for j in 0..self.n {
            if j != self.k {
                s += self.arow[j] * q[j];
            }
        }
        s
    }

    fn k_coef(&self, t: usize, rho: C64) -> C64 {
        rho + self.lp + (t as f64 + 1.0)
    }

    /// Fills `q` up to `len` coefficients; every left coefficient is assumed nonzero.
    fn extend(&self, q: &mut Vec<CVec>, rho: C64, len: usize, h: &dyn Fn(i64) -> CVec) {
        while q.len() < len {
            let t = q.len();
            let mut next = self.rows(t, rho, &q[t - 1], &h(t as i64 - 1));
            let hk = h(t as i64)[self.k];
            next[self.k] = -self.k_rhs(&next, hk) / self.k_coef(t, rho);
            q.push(next);
        }
    }

    /// Right-hand side `D(u) G(u) / u`, scaled, as coefficients of `u^{s + rho}`.
    fn forcing<'a>(&'a self, g: &'a Series, delta: i64) -> impl Fn(i64) -> CVec + 'a {
        move |s| {
            let mut h = CVec::zeros(self.n);
            let a = g.at(s, delta);
            let b = g.at(s + 1, delta);
            for i in 0..self.n {
                let mut v = a.map_or(C64::new(0.0, 0.0), |c| c[i]);
                if i != self.k {
                    if let Some(b) = b {
                        v += self.d[i] * b[i];
                    }
                }
                h[i] = v;
            }
            h
        }
    }

    fn zero(&self) -> impl Fn(i64) -> CVec + '_ {
        move |_| CVec::zeros(self.n)
    }

    fn analytic(&self, q0: CVec, len: usize) -> Series {
        let mut q = vec![q0];
        self.extend(&mut q, C64::new(0.0, 0.0), len, &self.zero());
        Series {
            exponent: C64::new(0.0, 0.0),
            coeffs: q,
        }
    }
}

fn analytic_column(s: Series) -> Column {
    Column { main: s, log: None }
}

/// Builds the Frobenius basis at pole `k` with `order` coefficients per series.
pub fn build_local_basis(sys: &RankOneSystem, k: usize, order: usize) -> Result<LocalBasis> {
    if k >= sys.n() {
        return Err(Error::InvalidArgument(format!("pole index {k} out of range")));
    }
    let case = sys.case(k);
    let nk = match case {
        CaseTag::ResonantNonneg(n) => n as usize,
        CaseTag::ResonantNeg(n) => (-n) as usize,
        CaseTag::Jordan => 1,
        CaseTag::Generic => 0,
    };
    if order < 10.max(nk + 5) {
        return Err(Error::InvalidArgument(format!(
            "order {order} below max(10, |N|+5) = {}",
            10.max(nk + 5)
        )));
    }
    let rec = Rec::new(sys, k);
    let n = sys.n();
    let lp = sys.lambda_prime()[k];
    let thr = sys.zero_threshold();
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mut warnings = Vec::new();

    let mut columns: Vec<Option<Column>> = vec![None; n];
    let psi_k: Option<Series>;
    let psi_sing: Option<Column>;
    let mut sing_functional = None;
    let mut r = None;
    let mut poly_p = Vec::new();
    let epsilon: bool;

    let standard_q0 = |j: usize| {
        let mut q0 = rec.unit(j);
        q0[k] = -rec.arow[j] / (lp + 1.0);
        q0
    };

    match case {
        CaseTag::Generic => {
            if (lp.re - lp.re.round()).abs() < 1e-6 && lp.im.abs() < 1e-6 {
                warnings.push(Warning::NearResonance { lambda_prime: lp });
            }
            for j in (0..n).filter(|&j| j != k) {
                columns[j] = Some(analytic_column(rec.analytic(standard_q0(j), order)));
            }
            let rho = -lp - 1.0;
            let mut q = vec![rec.unit(k) * gamma(lp + 1.0)];
            rec.extend(&mut q, rho, order, &rec.zero());
            let s = Series {
                exponent: rho,
                coeffs: q,
            };
            columns[k] = Some(analytic_column(s.clone()));
            psi_k = Some(s.clone());
            psi_sing = Some(analytic_column(s));
            sing_functional = Some(rec.unit(k));
            epsilon = true;
        }
        CaseTag::Jordan => {
            let anorm2: f64 = (0..n).filter(|&j| j != k).map(|j| rec.arow[j].norm_sqr()).sum();
            let g = rec.analytic(-rec.unit(k), order);
            if anorm2.sqrt() <= thr {
                for j in (0..n).filter(|&j| j != k) {
                    columns[j] = Some(analytic_column(rec.analytic(rec.unit(j), order)));
                }
                columns[k] = Some(analytic_column(g.clone()));
                psi_sing = None;
                epsilon = false;
            } else {
                let p = (0..n)
                    .filter(|&j| j != k)
                    .max_by(|&a, &b| rec.arow[a].norm().partial_cmp(&rec.arow[b].norm()).unwrap())
                    .unwrap();
                for j in (0..n).filter(|&j| j != k && j != p) {
                    let mut q0 = rec.unit(j);
                    q0[p] = -rec.arow[j] / rec.arow[p];
                    columns[j] = Some(analytic_column(rec.analytic(q0, order)));
                }
                columns[p] = Some(analytic_column(g.clone()));
                let mut q0 = CVec::zeros(n);
                for j in (0..n).filter(|&j| j != k) {
                    q0[j] = rec.arow[j].conj() / anorm2;
                }
                let mut q = vec![q0];
                rec.extend(&mut q, zero, order, &rec.forcing(&g, 0));
                let col = Column {
                    main: Series {
                        exponent: zero,
                        coeffs: q,
                    },
                    log: Some(g.clone()),
                };
                columns[k] = Some(col.clone());
                psi_sing = Some(col);
                sing_functional = Some(rec.unit(k));
                epsilon = true;
            }
            psi_k = Some(g);
        }
        CaseTag::ResonantNonneg(nn) => {
            let nn = nn as usize;
            for j in (0..n).filter(|&j| j != k) {
                columns[j] = Some(analytic_column(rec.analytic(standard_q0(j), order)));
            }
            let rho = C64::new(-(nn as f64) - 1.0, 0.0);
            let mut q = vec![rec.unit(k) * C64::from(factorial(nn as u32))];
            rec.extend(&mut q, rho, nn + 1, &rec.zero());
            poly_p = q.clone();
            // obstruction of the rows i != k at t = N + 1 fixes the leading vector of Psi_k
            let res = rec.rows_rhs(nn + 1, rho, &q[nn], &CVec::zeros(n));
            let mut d0 = CVec::zeros(n);
            for i in (0..n).filter(|&i| i != k) {
                d0[i] = -res[i] / rec.d[i];
            }
            let rmax = d0.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if rmax <= thr {
                d0 = CVec::zeros(n);
            }
            d0[k] = -rec.k_rhs(&d0, zero) / (nn as f64 + 1.0);
            let mut rv = d0.clone();
            rv[k] = zero;
            r = Some(rv);
            let g = if rmax <= thr {
                None
            } else {
                Some(rec.analytic(d0.clone(), order))
            };
            let mut next = CVec::zeros(n);
            next[k] = -rec.k_rhs(&next, d0[k]) / (nn as f64 + 1.0);
            q.push(next);
            match &g {
                Some(g) => rec.extend(&mut q, rho, order, &rec.forcing(g, nn as i64 + 1)),
                None => rec.extend(&mut q, rho, order, &rec.zero()),
            }
            let col = Column {
                main: Series {
                    exponent: rho,
                    coeffs: q,
                },
                log: g.clone(),
            };
            columns[k] = Some(col.clone());
            psi_sing = Some(col);
            sing_functional = Some(rec.unit(k));
            psi_k = g;
            epsilon = true;
        }
        CaseTag::ResonantNeg(nn) => {
            let rs = (-nn - 1) as usize;
            let rho_s = C64::new(rs as f64, 0.0);
            let sign = if nn % 2 == 0 { 1.0 } else { -1.0 };
            let b0 = rec.unit(k) * C64::from(sign / factorial(rs as u32));
            let mut qk = vec![b0.clone()];
            rec.extend(&mut qk, rho_s, order, &rec.zero());
            let g = Series {
                exponent: rho_s,
                coeffs: qk,
            };
            let mut partial: Vec<(usize, Vec<CVec>)> = Vec::new();
            let mut rv = CVec::zeros(n);
            for j in (0..n).filter(|&j| j != k) {
                let mut q = vec![standard_q0(j)];
                rec.extend(&mut q, zero, rs, &rec.zero());
                let mut last = rec.rows(rs, zero, &q[rs - 1], &CVec::zeros(n));
                rv[j] = -rec.k_rhs(&last, zero) / b0[k];
                last[k] = zero;
                q.push(last);
                partial.push((j, q));
            }
            let rmax = rv.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if rmax <= thr {
                rv = CVec::zeros(n);
            }
            let mut mains = vec![None; n];
            for (j, mut q) in partial {
                let rj = rv[j];
                let gj = g.scaled(rj);
                rec.extend(&mut q, zero, order, &rec.forcing(&gj, rs as i64));
                let main = Series {
                    exponent: zero,
                    coeffs: q,
                };
                mains[j] = Some(main.clone());
                columns[j] = Some(Column {
                    main,
                    log: if rj == zero { None } else { Some(gj) },
                });
            }
            columns[k] = Some(analytic_column(g.clone()));
            epsilon = rmax > thr;
            if epsilon {
                let p = (0..n)
                    .filter(|&j| j != k)
                    .max_by(|&a, &b| rv[a].norm().partial_cmp(&rv[b].norm()).unwrap())
                    .unwrap();
                psi_sing = Some(Column {
                    main: mains[p].as_ref().unwrap().scaled(one / rv[p]),
                    log: Some(g.clone()),
                });
                sing_functional = Some(rv.clone());
            } else {
                psi_sing = None;
            }
            r = Some(rv);
            psi_k = Some(g);
        }
    }

    let columns: Vec<Column> = columns.into_iter().map(|c| c.unwrap()).collect();
    let radius = RADIUS_FRACTION * sys.nearest_distance(k);
    let mut tail_bound: f64 = 0.0;
    for c in &columns {
        tail_bound = tail_bound.max(c.main.tail(radius));
        if let Some(g) = &c.log {
            tail_bound = tail_bound.max(g.tail(radius));
        }
    }
    if let Some(s) = &psi_sing {
        tail_bound = tail_bound.max(s.main.tail(radius));
    }
    if !(tail_bound <= MAX_TAIL) {
        return Err(Error::SeriesDivergence { k, tail: tail_bound });
    }
    Ok(LocalBasis {
        k,
        lambda_k: sys.lambda()[k],
        case,
        order,
        columns,
        psi_k,
        psi_sing,
        sing_functional,
        r,
        poly_p,
        epsilon,
        radius,
        tail_bound,
        warnings,
    })
}

/// Like [`build_local_basis`], doubling the order (up to 4 times) on divergence.
pub fn build_local_basis_auto(sys: &RankOneSystem, k: usize, order: usize) -> Result<LocalBasis> {
    let mut order = order;
    let mut last = None;
    for _ in 0..5 {
        match build_local_basis(sys, k, order) {
            Err(e @ Error::SeriesDivergence { .. }) => {
                last = Some(e);
                order *= 2;
            }
            other => return other,
        }
    }
    Err(last.unwrap())
}

/// Bases at every pole, built concurrently.
pub fn build_all(sys: &RankOneSystem, order: usize) -> Result<Vec<LocalBasis>> {
    (0..sys.n())
        .into_par_iter()
        .map(|k| build_local_basis_auto(sys, k, order))
        .collect()
}

impl LocalBasis {
    fn local_coord(&self, p: &BranchPoint) -> Result<(C64, C64)> {
        let u = p.value - self.lambda_k;
        let dist = u.norm();
        if dist > self.radius * (1.0 + 1e-9) {
            return Err(Error::OutOfRadius {
                k: self.k,
                distance: dist,
                radius: self.radius,
            });
        }
        Ok((u, C64::new(dist.ln(), p.args[self.k])))
    }

    /// Local fundamental matrix at `p`.
    pub fn eval_fundamental(&self, p: &BranchPoint) -> Result<CMat> {
        let (u, lnu) = self.local_coord(p)?;
        Ok(self.fundamental_at(u, lnu))
    }

    /// Local fundamental matrix from `u` and an explicit `ln u`.
    pub fn fundamental_at(&self, u: C64, lnu: C64) -> CMat {
        let n = self.columns.len();
        let mut m = CMat::zeros(n, n);
        for (j, c) in self.columns.iter().enumerate() {
            m.set_column(j, &c.eval(u, lnu));
        }
        m
    }

    /// `Psi_k(p)`; the zero vector when `Psi_k` vanishes identically.
    pub fn eval_psi_k(&self, p: &BranchPoint) -> Result<CVec> {
        let (u, lnu) = self.local_coord(p)?;
        Ok(self.psi_k_at(u, lnu))
    }

    /// `Psi_k` from `u` and `ln u`.
    pub fn psi_k_at(&self, u: C64, lnu: C64) -> CVec {
        match &self.psi_k {
            Some(s) => s.eval(u, lnu),
            None => CVec::zeros(self.columns.len()),
        }
    }

    /// `Psi_k^(sing)(p)`; `None` signals the zero solution.
    pub fn eval_psi_sing(&self, p: &BranchPoint) -> Result<Option<CVec>> {
        let (u, lnu) = self.local_coord(p)?;
        Ok(self.psi_sing.as_ref().map(|c| c.eval(u, lnu)))
    }

    /// `true` when `Psi_k` vanishes identically.
    pub fn psi_k_is_zero(&self) -> bool {
        self.psi_k.is_none()
    }
}
