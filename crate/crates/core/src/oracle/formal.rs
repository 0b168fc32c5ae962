//! Formal solution `Y = (I + F_1/z + F_2/z^2 + ...) z^{Lambda'} e^{A0 z}` at infinity.

use crate::{linalg, CMat, RankOneSystem, C64};

/// Formal series and its formal inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalSeries {
    /// Truncation depth.
    pub depth: usize,
    /// `F_0 = I, F_1, ..., F_K`.
    pub f: Vec<CMat>,
    /// Coefficients of the inverse series, `G_0 = I, ...`.
    pub g: Vec<CMat>,
    /// Smallest radius at which the smallest term drops below the target.
    pub optimal_radius: f64,
    /// Smallest relative term reached at `optimal_radius`.
    pub smallest_term: f64,
}

/// Target size of the smallest term at the anchoring radius.
pub const ANCHOR_TARGET: f64 = 1e-16;

/// Solves the order-by-order equations up to depth `depth`.
pub fn formal_series(sys: &RankOneSystem, depth: usize) -> FormalSeries {
    let n = sys.n();
    let lam = sys.lambda();
    let lp = sys.lambda_prime();
    let a1 = sys.a1();
    let mut f = vec![CMat::identity(n, n)];
    for l in 0..depth {
        let fl = &f[l];
        let af = a1 * fl;
        let mut next = CMat::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    next[(j, k)] = (fl[(j, k)] * (lp[k] - l as f64) - af[(j, k)]) / (lam[j] - lam[k]);
                }
            }
        }
        for k in 0..n {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..n {
                if i != k {
                    s += a1[(k, i)] * next[(i, k)];
                }
            }
            next[(k, k)] = -s / (l as f64 + 1.0);
        }
        f.push(next);
    }
    let mut g = vec![CMat::identity(n, n)];
    for l in 1..=depth {
        let mut s = CMat::zeros(n, n);
        for i in 1..=l {
            s += &f[i] * &g[l - i];
        }
        g.push(-s);
    }
    let mut fs = FormalSeries {
        depth,
        f,
        g,
        optimal_radius: 0.0,
        smallest_term: 0.0,
    };
    let scale = 1.0 / sys.max_separation();
    let (mut lo, mut hi) = (scale, scale * 1e4);
    if fs.smallest(lo) <= ANCHOR_TARGET {
        hi = lo;
    } else {
        for _ in 0..100 {
            let mid = (lo * hi).sqrt();
            if fs.smallest(mid) <= ANCHOR_TARGET {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi / lo < 1.001 {
                break;
            }
        }
    }
    fs.optimal_radius = hi;
    fs.smallest_term = fs.smallest(hi);
    fs
}

impl FormalSeries {
    fn term(&self, l: usize, r: f64) -> f64 {
        linalg::max_abs(&self.f[l]).max(linalg::max_abs(&self.g[l])) * r.powi(-(l as i32))
    }

    /// Smallest term over `1..=K` at radius `r`.
    pub fn smallest(&self, r: f64) -> f64 {
        (1..=self.depth).map(|l| self.term(l, r)).fold(f64::INFINITY, f64::min)
    }

    fn cut(&self, mats: &[CMat], row: Option<usize>, z: C64) -> usize {
        let r = z.norm();
        let mut best = (f64::INFINITY, self.depth + 1);
        for l in 1..=self.depth {
            let m = match row {
                Some(j) => mats[l].row(j).iter().map(|x| x.norm()).fold(0.0, f64::max),
                None => linalg::max_abs(&mats[l]),
            };
            let t = m * r.powi(-(l as i32));
            if t < best.0 {
                best = (t, l);
            }
        }
        best.1
    }

    /// Optimally truncated `I + sum F_l z^{-l}`.
    pub fn eval(&self, z: C64) -> CMat {
        let stop = self.cut(&self.f, None, z);
        let zi = 1.0 / z;
        let mut acc = self.f[stop - 1].clone();
        for l in (0..stop - 1).rev() {
            acc *= zi;
            acc += &self.f[l];
        }
        acc
    }

    /// Row `j` of the optimally truncated inverse series, as a column vector.
    pub fn inverse_row(&self, j: usize, z: C64) -> crate::CVec {
        let stop = self.cut(&self.g, Some(j), z);
        let zi = 1.0 / z;
        let mut acc = self.g[stop - 1].row(j).transpose();
        for l in (0..stop - 1).rev() {
            acc *= zi;
            acc += self.g[l].row(j).transpose();
        }
        acc
    }
}
