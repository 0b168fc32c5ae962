//! Seeded random systems used by tests, the acceptance suite and the CLI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{linalg, CMat, RankOneSystem, C64};

/// Smallest pole separation of sampled systems.
pub const MIN_SEPARATION: f64 = 0.5;

/// Smallest angle between distinct pair directions (mod `pi`).
pub const MIN_DIRECTION_GAP: f64 = 0.08;

/// Smallest distance of sampled `lambda'_k` and eigenvalues from the integers.
pub const INTEGER_MARGIN: f64 = 0.05;

/// Deterministic generator for `seed`.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the closed unit disk.
pub fn unit_disk<R: Rng>(rng: &mut R) -> C64 {
    loop {
        let z = C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if z.norm() <= 1.0 {
            return z;
        }
    }
}

fn dist_to_integers(z: C64) -> f64 {
    (z - C64::new(z.re.round(), 0.0)).norm()
}

fn directions_separated(lam: &[C64]) -> bool {
    let mut dirs = Vec::new();
    for j in 0..lam.len() {
        for k in j + 1..lam.len() {
            dirs.push((lam[j] - lam[k]).arg().rem_euclid(std::f64::consts::PI));
        }
    }
    for a in 0..dirs.len() {
        for b in a + 1..dirs.len() {
            let d = (dirs[a] - dirs[b]).abs();
            if d.min(std::f64::consts::PI - d) < MIN_DIRECTION_GAP {
                return false;
            }
        }
    }
    true
}

/// `n` poles in the square `[-1, 1]^2` (scaled up for larger `n`), pairwise
/// at least [`MIN_SEPARATION`] apart, with no two pair directions parallel.
pub fn random_poles<R: Rng>(rng: &mut R, n: usize) -> Vec<C64> {
    let half = 1.0f64.max(0.5 * (n as f64).sqrt());
    loop {
        let lam: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.gen_range(-half..=half), rng.gen_range(-half..=half)))
            .collect();
        let sep_ok = (0..n).all(|j| (j + 1..n).all(|k| (lam[j] - lam[k]).norm() >= MIN_SEPARATION));
        if sep_ok && directions_separated(&lam) {
            return lam;
        }
    }
}

fn random_matrix<R: Rng>(rng: &mut R, n: usize) -> CMat {
    CMat::from_fn(n, n, |_, _| unit_disk(rng))
}

/// Random system with `lambda'` and the eigenvalues of `A1` off the integers.
pub fn random_generic(n: usize, seed: u64) -> RankOneSystem {
    let mut rng = rng(seed);
    let lam = random_poles(&mut rng, n);
    loop {
        let a1 = random_matrix(&mut rng, n);
        let diag_ok = (0..n).all(|k| dist_to_integers(a1[(k, k)]) >= INTEGER_MARGIN);
        let eig_ok = linalg::eigenvalues(&a1)
            .iter()
            .all(|&e| dist_to_integers(e) >= INTEGER_MARGIN);
        if diag_ok && eig_ok {
            return RankOneSystem::new(lam, a1).expect("sampled poles are distinct");
        }
    }
}

/// Random system whose diagonal is overwritten by `lp`.
pub fn random_with_diagonal(seed: u64, lp: &[C64]) -> RankOneSystem {
    let n = lp.len();
    let mut rng = rng(seed);
    let lam = random_poles(&mut rng, n);
    let mut a1 = random_matrix(&mut rng, n);
    for k in 0..n {
        a1[(k, k)] = lp[k];
    }
    RankOneSystem::new(lam, a1).expect("sampled poles are distinct")
}

/// `A1 = V - (1/2 + nu) I` with a random real skew-symmetric `V`.
pub fn random_skew(n: usize, seed: u64, nu: f64) -> RankOneSystem {
    let mut rng = rng(seed);
    let lam = random_poles(&mut rng, n);
    let mut a1 = CMat::zeros(n, n);
    for j in 0..n {
        for k in j + 1..n {
            let v = rng.gen_range(-1.0..=1.0);
            a1[(j, k)] = C64::new(v, 0.0);
            a1[(k, j)] = C64::new(-v, 0.0);
        }
        a1[(j, j)] = C64::new(-0.5 - nu, 0.0);
    }
    RankOneSystem::new(lam, a1).expect("sampled poles are distinct")
}

/// `A1 = P diag(mu) P^{-1}` with a random well-conditioned `P`.
pub fn with_eigenvalues(seed: u64, mu: &[C64]) -> RankOneSystem {
    let n = mu.len();
    let mut rng = rng(seed);
    let lam = random_poles(&mut rng, n);
    loop {
        let p = CMat::identity(n, n) + random_matrix(&mut rng, n) * C64::new(0.4, 0.0);
        if linalg::cond_equilibrated(&p) > 20.0 {
            continue;
        }
        let pinv = linalg::inverse(&p).expect("conditioned");
        let d = CMat::from_diagonal(&crate::CVec::from_vec(mu.to_vec()));
        let a1 = &p * d * pinv;
        if (0..n).all(|k| dist_to_integers(a1[(k, k)]) >= INTEGER_MARGIN) {
            return RankOneSystem::new(lam, a1).expect("sampled poles are distinct");
        }
    }
}
