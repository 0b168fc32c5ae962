//! Objects derived from the connection matrix: monodromy matrices, Stokes
//! matrices, Stokes factors and trace invariants.

use crate::continuation::{connection_matrix, ConnectionMatrix};
use crate::frame::{angle_distance, DirectionFrame};
use crate::local::LocalBasis;
use crate::{classify, linalg, CMat, Error, RankOneSystem, Result, C64, TWO_PI_I};

/// `alpha = e^{-2 pi i lp} - 1`, or `2 pi i` for integer `lp`.
pub fn alpha(lp: C64) -> C64 {
    if classify(lp).is_integer() {
        TWO_PI_I
    } else {
        (-TWO_PI_I * lp).exp() - 1.0
    }
}

/// `beta = -e^{2 pi i lp} alpha`.
pub fn beta(lp: C64) -> C64 {
    -(TWO_PI_I * lp).exp() * alpha(lp)
}

/// `M_k` and their closed-form inverses.
pub fn monodromy_matrices(c: &CMat, lp: &[C64]) -> (Vec<CMat>, Vec<CMat>) {
    let n = lp.len();
    let mut ms = Vec::with_capacity(n);
    let mut inv = Vec::with_capacity(n);
    for k in 0..n {
        let (a, b) = (alpha(lp[k]), beta(lp[k]));
        let mut m = CMat::identity(n, n);
        let mut mi = CMat::identity(n, n);
        for j in 0..n {
            if j != k {
                m[(k, j)] = a * c[(k, j)];
                mi[(k, j)] = b * c[(k, j)];
            }
        }
        m[(k, k)] = (-TWO_PI_I * lp[k]).exp();
        mi[(k, k)] = (TWO_PI_I * lp[k]).exp();
        ms.push(m);
        inv.push(mi);
    }
    (ms, inv)
}

/// `M_k*`, available when no eigenvalue of `A1` is within `1e-8` of a negative integer.
pub fn mstar_matrices(c: &CMat, lp: &[C64], a1_eigs: &[C64]) -> Result<Vec<CMat>> {
    for &e in a1_eigs {
        let r = e.re.round();
        if r < 0.0 && (e - C64::new(r, 0.0)).norm() <= 1e-8 {
            return Err(Error::Unavailable { eigenvalue: e });
        }
    }
    let n = lp.len();
    Ok((0..n)
        .map(|k| {
            let a = alpha(lp[k]);
            let mut m = CMat::identity(n, n);
            for j in 0..n {
                if j != k {
                    m[(j, k)] = a * c[(j, k)];
                }
            }
            m[(k, k)] = (-TWO_PI_I * lp[k]).exp();
            m
        })
        .collect())
}

/// `S_+`: `[S_+]_jk = e^{2 pi i lp_k} alpha_k c_jk` for `j ≺ k`.
pub fn stokes_plus(c: &CMat, lp: &[C64], frame: &DirectionFrame) -> CMat {
    let n = lp.len();
    CMat::from_fn(n, n, |j, k| {
        if j == k {
            C64::new(1.0, 0.0)
        } else if frame.precedes(j, k) {
            (TWO_PI_I * lp[k]).exp() * alpha(lp[k]) * c[(j, k)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `S_-^{-1}`: `-e^{2 pi i (lp_k - lp_j)} alpha_k c_jk` for `j ≻ k`.
pub fn stokes_minus_inv(c: &CMat, lp: &[C64], frame: &DirectionFrame) -> CMat {
    let n = lp.len();
    CMat::from_fn(n, n, |j, k| {
        if j == k {
            C64::new(1.0, 0.0)
        } else if frame.precedes(k, j) {
            -(TWO_PI_I * (lp[k] - lp[j])).exp() * alpha(lp[k]) * c[(j, k)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Stokes factor `W_nu` from a connection matrix computed at a direction of
/// the interval `(eta_{nu+1}, eta_nu)` described by `frame`.
pub fn stokes_factor(sys: &RankOneSystem, frame: &DirectionFrame, c: &CMat) -> CMat {
    let n = sys.n();
    let lam = sys.lambda();
    let lp = sys.lambda_prime();
    let eta_nu = frame.criticals.eta(frame.nu);
    CMat::from_fn(n, n, |j, k| {
        if j == k {
            C64::new(1.0, 0.0)
        } else if angle_distance((lam[j] - lam[k]).arg(), eta_nu) <= 1e-10 {
            -alpha(lp[k]) * c[(j, k)]
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `W_{nu+1}, ..., W_{nu+m}`, each from a connection matrix recomputed at
/// the midpoint of its critical interval.
pub fn stokes_factors(
    sys: &RankOneSystem,
    frame: &DirectionFrame,
    bases: &[LocalBasis],
    tol: f64,
) -> Result<Vec<(i64, CMat)>> {
    let m = frame.criticals.m as i64;
    (frame.nu + 1..=frame.nu + m)
        .map(|nu| {
            let f = DirectionFrame::new(sys, frame.criticals.midpoint(nu))?;
            debug_assert_eq!(f.nu, nu);
            let cm = connection_matrix(sys, &f, bases, tol)?;
            Ok((nu, stokes_factor(sys, &f, &cm.c)))
        })
        .collect()
}

/// `(W_{nu+mu} ... W_{nu+1})^{-1}` and `W_{nu+m} ... W_{nu+mu+1}` from the
/// output of [`stokes_factors`].
pub fn factor_products(w: &[(i64, CMat)], mu: usize) -> (CMat, CMat) {
    let n = w[0].1.nrows();
    let mut plus = CMat::identity(n, n);
    for (_, f) in &w[..mu] {
        plus = f * plus;
    }
    let mut minus = CMat::identity(n, n);
    for (_, f) in &w[mu..] {
        minus = f * minus;
    }
    (linalg::inverse(&plus).expect("unit triangular"), minus)
}

/// `e^{-2 pi i Lambda'} C e^{2 pi i Lambda'}`: the connection matrix at `eta - 2 pi`.
pub fn eta_shift(c: &CMat, lp: &[C64]) -> CMat {
    linalg::exp_diag(lp, -TWO_PI_I) * c * linalg::exp_diag(lp, TWO_PI_I)
}

/// Traces and their closed forms.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    /// `Tr M_k`.
    pub tr: Vec<C64>,
    /// `n - 1 + e^{-2 pi i lp_k}`.
    pub tr_closed: Vec<C64>,
    /// `Tr(M_j M_k)`.
    pub tr_pair: CMat,
    /// Closed form through the Stokes matrices.
    pub tr_pair_closed: CMat,
    /// Largest discrepancy.
    pub max_diff: f64,
}

/// Computes [`TraceTable`].
pub fn trace_invariants(
    m: &[CMat],
    s_plus: &CMat,
    s_minus_inv: &CMat,
    lp: &[C64],
    frame: &DirectionFrame,
) -> TraceTable {
    let n = lp.len();
    let nf = n as f64;
    let e: Vec<C64> = lp.iter().map(|&l| (-TWO_PI_I * l).exp()).collect();
    let tr: Vec<C64> = m.iter().map(|x| x.trace()).collect();
    let tr_closed: Vec<C64> = e.iter().map(|&x| x + (nf - 1.0)).collect();
    let mut tr_pair = CMat::zeros(n, n);
    let mut tr_pair_closed = CMat::zeros(n, n);
    let mut max_diff: f64 = 0.0;
    for k in 0..n {
        max_diff = max_diff.max((tr[k] - tr_closed[k]).norm());
    }
    for j in 0..n {
        for k in 0..n {
            if j == k {
                continue;
            }
            tr_pair[(j, k)] = (&m[j] * &m[k]).trace();
            let (a, b) = if frame.precedes(j, k) { (j, k) } else { (k, j) };
            tr_pair_closed[(j, k)] =
                e[j] + e[k] + (nf - 2.0) - e[a] * s_plus[(a, b)] * s_minus_inv[(b, a)];
            max_diff = max_diff.max((tr_pair[(j, k)] - tr_pair_closed[(j, k)]).norm());
        }
    }
    TraceTable {
        tr,
        tr_closed,
        tr_pair,
        tr_pair_closed,
        max_diff,
    }
}

/// Monodromy at infinity and its spectral comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct InfinityReport {
    /// `M_{k_n} ... M_{k_1}` with `k_1 ≺ ... ≺ k_n`.
    pub m_inf: CMat,
    /// Its eigenvalues.
    pub eigenvalues: Vec<C64>,
    /// `e^{-2 pi i mu}` for the eigenvalues `mu` of `A1`.
    pub expected: Vec<C64>,
    /// Matching distance between the two spectra.
    pub distance: f64,
    /// Whether `Psi` is a fundamental matrix (`C` invertible).
    pub fundamental: bool,
}

/// Product of the `M_k` along the cut ordering of `frame`.
pub fn monodromy_at_infinity(m: &[CMat], frame: &DirectionFrame, a1_eigs: &[C64], fundamental: bool) -> InfinityReport {
    let n = m.len();
    let mut p = CMat::identity(n, n);
    for &k in frame.dominance_order() {
        p = &m[k] * p;
    }
    let eigenvalues = linalg::eigenvalues(&p);
    let expected: Vec<C64> = a1_eigs.iter().map(|&mu| (-TWO_PI_I * mu).exp()).collect();
    let distance = linalg::spectral_distance(&eigenvalues, &expected);
    InfinityReport {
        m_inf: p,
        eigenvalues,
        expected,
        distance,
        fundamental,
    }
}

/// Everything derived from one connection matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyData {
    /// `M_k`.
    pub m: Vec<CMat>,
    /// `M_k^{-1}` in closed form.
    pub m_inv: Vec<CMat>,
    /// `M_k*` or the reason it is unavailable.
    pub m_star: std::result::Result<Vec<CMat>, Error>,
    /// `S_+`.
    pub s_plus: CMat,
    /// `S_-^{-1}`.
    pub s_minus_inv: CMat,
    /// Stokes factors `W_nu`, when requested.
    pub w: Vec<(i64, CMat)>,
    /// `Lambda'`.
    pub lambda_prime: Vec<C64>,
    /// `alpha_k`.
    pub alpha: Vec<C64>,
    /// `beta_k`.
    pub beta: Vec<C64>,
    /// Trace invariants.
    pub traces: TraceTable,
    /// Monodromy at infinity.
    pub infinity: InfinityReport,
    /// Degeneracy flags copied from the connection matrix.
    pub zero_rows: Vec<bool>,
    /// Degeneracy flags copied from the connection matrix.
    pub zero_cols: Vec<bool>,
    /// Near-integer eigenvalue flag copied from the connection matrix.
    pub integer_eigenvalue: Option<C64>,
}

/// Assembles [`MonodromyData`].
pub fn monodromy_data(
    sys: &RankOneSystem,
    frame: &DirectionFrame,
    cm: &ConnectionMatrix,
    w: Vec<(i64, CMat)>,
) -> MonodromyData {
    let lp = sys.lambda_prime().to_vec();
    let (m, m_inv) = monodromy_matrices(&cm.c, &lp);
    let eigs = linalg::eigenvalues(sys.a1());
    let m_star = mstar_matrices(&cm.c, &lp, &eigs);
    let s_plus = stokes_plus(&cm.c, &lp, frame);
    let s_minus_inv = stokes_minus_inv(&cm.c, &lp, frame);
    let traces = trace_invariants(&m, &s_plus, &s_minus_inv, &lp, frame);
    let fundamental = cm.c.determinant().norm() > 1e-8;
    let infinity = monodromy_at_infinity(&m, frame, &eigs, fundamental);
    MonodromyData {
        alpha: lp.iter().map(|&l| alpha(l)).collect(),
        beta: lp.iter().map(|&l| beta(l)).collect(),
        m,
        m_inv,
        m_star,
        s_plus,
        s_minus_inv,
        w,
        lambda_prime: lp,
        traces,
        infinity,
        zero_rows: cm.zero_rows.clone(),
        zero_cols: cm.zero_cols.clone(),
        integer_eigenvalue: cm.integer_eigenvalue,
    }
}
