//! Small dense complex helpers and the complex Gamma function.

use std::f64::consts::PI;

use crate::{CMat, CVec, C64};

/// Maximum modulus of the entries.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Maximum modulus of a vector.
pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CVec) -> Option<CVec> {
    a.clone().lu().solve(b)
}

/// Matrix inverse.
pub fn inverse(a: &CMat) -> Option<CMat> {
    a.clone().try_inverse()
}

/// Eigenvalues through a complex Schur decomposition.
pub fn eigenvalues(a: &CMat) -> Vec<C64> {
    let schur = a.clone().schur();
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// 2-norm condition number after scaling every column to unit length.
pub fn cond_equilibrated(a: &CMat) -> f64 {
    let mut s = a.clone();
    for j in 0..s.ncols() {
        let nrm = s.column(j).norm();
        if nrm == 0.0 {
            return f64::INFINITY;
        }
        s.column_mut(j).unscale_mut(nrm);
    }
    let sv = s.singular_values();
    let mx = sv.iter().cloned().fold(0.0, f64::max);
    let mn = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if mn == 0.0 {
        f64::INFINITY
    } else {
        mx / mn
    }
}

/// `diag(exp(factor * d_k))`.
pub fn exp_diag(d: &[C64], factor: C64) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(d.len(), d.iter().map(|&x| (factor * x).exp())))
}

/// Largest distance in an optimal matching of two equally long point sets.
pub fn spectral_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n <= 7 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let d = (0..n).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max);
            best = best.min(d);
        });
        best
    } else {
        let mut used = vec![false; n];
        let mut worst: f64 = 0.0;
        for &x in a {
            let (j, d) = (0..n)
                .filter(|&j| !used[j])
                .map(|j| (j, (x - b[j]).norm()))
                .min_by(|p, q| p.1.partial_cmp(&q.1).unwrap())
                .unwrap();
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }
}

fn permute(p: &mut Vec<usize>, i: usize, f: &mut dyn FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `n!` as a float.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Complex Gamma function (Lanczos, reflection for `Re z < 1/2`).
/// Exact products are used at positive integers. Poles return infinity.
pub fn gamma(z: C64) -> C64 {
    if z.im == 0.0 && z.re.fract() == 0.0 {
        if z.re <= 0.0 {
            return C64::new(f64::INFINITY, 0.0);
        }
        if z.re < 171.0 {
            return C64::new(factorial(z.re as u32 - 1), 0.0);
        }
    }
    if z.re < 0.5 {
        let s = (C64::new(PI, 0.0) * z).sin();
        return C64::new(PI, 0.0) / (s * gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}
