use proptest::prelude::*;

use stokes_core::linalg::{self, max_abs};
use stokes_core::local::build_all;
use stokes_core::monodromy::{eta_shift, monodromy_matrices};
use stokes_core::oracle::{formal_series, stokes_direct};
use stokes_core::pipeline::{analyze, Options};
use stokes_core::{connection_matrix, critical_directions, sample, CMat, DirectionFrame, C64};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 12,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn criticals_are_periodic_and_decreasing(seed in 0u64..10_000, n in 2usize..5) {
        let sys = sample::random_generic(n, seed);
        let crit = critical_directions(&sys);
        prop_assert_eq!(crit.m, n * (n - 1));
        prop_assert_eq!(crit.mu * 2, crit.m);
        for nu in -3i64..10 {
            prop_assert!(crit.eta(nu + 1) < crit.eta(nu));
            prop_assert!((crit.eta(nu + crit.m as i64) - (crit.eta(nu) - std::f64::consts::TAU)).abs() < 1e-12);
            prop_assert!((crit.tau(nu) - (1.5 * std::f64::consts::PI - crit.eta(nu))).abs() < 1e-12);
        }
    }

    #[test]
    fn dominance_is_a_total_order(seed in 0u64..10_000, n in 2usize..5, frac in 0.05f64..0.95) {
        let sys = sample::random_generic(n, seed);
        let crit = critical_directions(&sys);
        let eta = crit.eta(1) + frac * (crit.eta(0) - crit.eta(1));
        let frame = DirectionFrame::new(&sys, eta).unwrap();
        let rank = frame.rank();
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    prop_assert!(frame.precedes(j, k) != frame.precedes(k, j));
                    prop_assert_eq!(frame.precedes(j, k), rank[j] < rank[k]);
                }
            }
        }
    }

    #[test]
    fn first_formal_coefficient(seed in 0u64..10_000, n in 2usize..5) {
        let sys = sample::random_generic(n, seed);
        let fs = formal_series(&sys, 4);
        let (lam, a) = (sys.lambda(), sys.a1());
        for j in 0..n {
            let mut diag = C64::new(0.0, 0.0);
            for k in 0..n {
                if j != k {
                    let expect = -a[(j, k)] / (lam[j] - lam[k]);
                    prop_assert!((fs.f[1][(j, k)] - expect).norm() < 1e-12 * (1.0 + expect.norm()));
                    diag += a[(j, k)] * a[(k, j)] / (lam[k] - lam[j]);
                }
            }
            prop_assert!((fs.f[1][(j, j)] - diag).norm() < 1e-12 * (1.0 + diag.norm()));
        }
    }

    #[test]
    fn connection_diagonal_rule(seed in 0u64..10_000, which in 0usize..5) {
        let lp = [
            C64::new(0.31, 0.12),
            C64::new(-1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(3.0, 0.0),
            C64::new(-2.0, 0.0),
        ];
        let sys = sample::random_with_diagonal(seed, &[lp[which], C64::new(-0.43, 0.2), C64::new(0.18, -0.3)]);
        let an = analyze(&sys, &Options { factors: false, ..Options::default() }).unwrap();
        let c = &an.connection.c;
        let expect0 = if which == 0 { 1.0 } else { 0.0 };
        prop_assert_eq!(c[(0, 0)], C64::new(expect0, 0.0));
        prop_assert_eq!(c[(1, 1)], C64::new(1.0, 0.0));
        prop_assert_eq!(c[(2, 2)], C64::new(1.0, 0.0));
    }

    #[test]
    fn connection_is_constant_on_an_interval(seed in 0u64..10_000, nu in 0i64..6, a in 0.1f64..0.9, b in 0.1f64..0.9) {
        let sys = sample::random_generic(3, seed);
        let crit = critical_directions(&sys);
        let bases = build_all(&sys, 80).unwrap();
        let (hi, lo) = (crit.eta(nu), crit.eta(nu + 1));
        let f1 = DirectionFrame::new(&sys, lo + a * (hi - lo)).unwrap();
        let f2 = DirectionFrame::new(&sys, lo + b * (hi - lo)).unwrap();
        let c1 = connection_matrix(&sys, &f1, &bases, 1e-12).unwrap().c;
        let c2 = connection_matrix(&sys, &f2, &bases, 1e-12).unwrap().c;
        prop_assert!(max_abs(&(&c1 - &c2)) <= 1e-9 * max_abs(&c1));
        let down = connection_matrix(&sys, &f1.shifted_down(), &bases, 1e-12).unwrap().c;
        let expect = eta_shift(&c1, sys.lambda_prime());
        prop_assert!(max_abs(&(down - &expect)) <= 1e-9 * max_abs(&expect));
    }

    #[test]
    fn monodromy_inverses(seed in 0u64..10_000, n in 2usize..5) {
        let sys = sample::random_generic(n, seed);
        let an = analyze(&sys, &Options { factors: false, ..Options::default() }).unwrap();
        let (m, mi) = monodromy_matrices(&an.connection.c, sys.lambda_prime());
        for k in 0..n {
            let p = &m[k] * &mi[k];
            prop_assert!(max_abs(&(p - CMat::identity(n, n))) < 1e-12 * max_abs(&m[k]).powi(2));
        }
    }

    #[test]
    fn oracle_stokes_matrix_is_triangular(seed in 0u64..10_000) {
        let sys = sample::random_generic(3, seed);
        let an = analyze(&sys, &Options { factors: false, ..Options::default() }).unwrap();
        let st = stokes_direct(&sys, &an.frame.criticals, an.frame.nu, 1e-12).unwrap();
        for j in 0..3 {
            prop_assert!((st.s[(j, j)] - C64::new(1.0, 0.0)).norm() < 1e-8);
            for k in 0..3 {
                if j != k && an.frame.precedes(k, j) {
                    prop_assert!(st.s[(j, k)].norm() <= 1e-8_f64.max(10.0 * st.spread), "S[{}][{}] = {}", j, k, st.s[(j, k)]);
                }
            }
        }
    }
}

#[test]
fn gamma_matches_statrs() {
    for i in 0..200 {
        let x = -4.75 + 0.0731 * i as f64;
        if (x - x.round()).abs() < 1e-3 {
            continue;
        }
        let ours = linalg::gamma(C64::new(x, 0.0));
        let reference = statrs::function::gamma::gamma(x);
        assert!((ours.re - reference).abs() <= 1e-12 * reference.abs().max(1.0), "x = {x}");
        assert!(ours.im.abs() <= 1e-12 * reference.abs().max(1.0));
    }
}
