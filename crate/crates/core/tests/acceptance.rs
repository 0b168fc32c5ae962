//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use stokes_core::continuation::{continue_vector, plan_path};
use stokes_core::linalg::{self, max_abs};
use stokes_core::local::build_all;
use stokes_core::monodromy::{alpha, eta_shift, factor_products};
use stokes_core::oracle::{laplace_column, sector_solution, transport_around_origin, SectorPoint};
use stokes_core::pipeline::{analyze, verify, Analysis, Options};
use stokes_core::taylor::{arc_points, march_fuchs};
use stokes_core::{connection_matrix, sample, CMat, CVec, CaseTag, DirectionFrame, RankOneSystem, C64, TWO_PI_I};

type Outcome = Result<String, String>;

const TOL: f64 = 1e-12;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn opts(factors: bool) -> Options {
    Options {
        factors,
        ..Options::default()
    }
}

fn run(sys: &RankOneSystem, factors: bool) -> Result<Analysis, String> {
    analyze(sys, &opts(factors)).map_err(|e| e.to_string())
}

/// The four resonance classes exercised by criteria 2, 8 and 10.
const CASES: [(&str, f64, f64); 4] = [("generic", 0.37, 0.21), ("jordan", -1.0, 0.0), ("nonneg(2)", 2.0, 0.0), ("neg(-3)", -3.0, 0.0)];

/// `n`-dimensional system whose `lambda'_k` is `lp`, other diagonal entries generic.
fn with_case(n: usize, seed: u64, k: usize, lp: C64) -> RankOneSystem {
    let mut d: Vec<C64> = [c(0.23, -0.31), c(-0.41, 0.17), c(0.62, 0.08)][..n].to_vec();
    d[k] = lp;
    sample::random_with_diagonal(seed, &d)
}

fn check(max: f64, tol: f64, what: &str) -> Outcome {
    if max <= tol {
        Ok(format!("{what} {max:.2e} <= {tol:.0e}"))
    } else {
        Err(format!("{what} {max:.2e} > {tol:.0e}"))
    }
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut slowest: f64 = 0.0;
    let seeds = 1..=24u64;
    let count = seeds.clone().count();
    for seed in seeds {
        let n = if seed % 2 == 0 { 3 } else { 2 };
        let sys = sample::random_generic(n, seed);
        let t = Instant::now();
        let an = run(&sys, false)?;
        let v = verify(&sys, &an, TOL).map_err(|e| format!("seed {seed}: {e}"))?;
        slowest = slowest.max(t.elapsed().as_secs_f64());
        worst = worst.max(v.max_diff());
    }
    let msg = format!("{count} systems, max diff {worst:.2e}, slowest {slowest:.2}s");
    if worst <= 1e-6 && slowest <= 10.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut traces: f64 = 0.0;
    let mut seen = Vec::new();
    for (i, &(name, re, im)) in CASES.iter().enumerate().skip(1) {
        for n in [2, 3] {
            let k = i % n;
            let sys = with_case(n, 40 + i as u64, k, c(re, im));
            if !sys.case(k).is_integer() {
                return Err(format!("{name}: not classified as integer"));
            }
            let an = run(&sys, false)?;
            let v = verify(&sys, &an, TOL).map_err(|e| format!("{name}, n={n}: {e}"))?;
            worst = worst.max(v.max_diff());
            traces = traces.max(an.monodromy.traces.max_diff);
            seen.push(sys.case(k));
        }
    }
    // a nonneg resonance with index 0 as well
    let sys = with_case(2, 47, 1, c(0.0, 0.0));
    let an = run(&sys, false)?;
    let v = verify(&sys, &an, TOL).map_err(|e| format!("lp=0: {e}"))?;
    worst = worst.max(v.max_diff());
    traces = traces.max(an.monodromy.traces.max_diff);
    seen.push(sys.case(1));
    let msg = format!("{} systems, oracle {worst:.2e} (tol 1e-5), traces {traces:.2e} (tol 1e-8)", seen.len());
    let all = [CaseTag::Jordan, CaseTag::ResonantNonneg(0), CaseTag::ResonantNonneg(2), CaseTag::ResonantNeg(-3)];
    if !all.iter().all(|t| seen.contains(t)) {
        return Err(format!("missing case: {msg}"));
    }
    if worst <= 1e-5 && traces <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_3() -> Outcome {
    let diags: [&[C64]; 3] = [
        &[c(0.3, 0.1), c(-0.7, 0.0)],
        &[c(0.25, 0.0), c(-1.0, 0.0), c(2.0, 0.0)],
        &[c(-3.0, 0.0), c(0.5, 0.4), c(0.0, 0.0), c(-0.45, 0.0)],
    ];
    let mut worst: f64 = 0.0;
    for (seed, d) in diags.iter().enumerate() {
        let n = d.len();
        let lam = sample::random_poles(&mut sample::rng(seed as u64 + 70), n);
        let sys = RankOneSystem::new(lam, CMat::from_diagonal(&CVec::from_vec(d.to_vec()))).map_err(|e| e.to_string())?;
        let an = run(&sys, false)?;
        let pattern = CMat::from_fn(n, n, |i, j| {
            if i == j && !sys.case(i).is_integer() {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let id = CMat::identity(n, n);
        worst = worst
            .max(max_abs(&(&an.connection.c - pattern)))
            .max(max_abs(&(&an.monodromy.s_plus - &id)))
            .max(max_abs(&(&an.monodromy.s_minus_inv - &id)));
        for m in &an.monodromy.m {
            let off = CMat::from_fn(n, n, |i, j| if i == j { c(0.0, 0.0) } else { m[(i, j)] });
            worst = worst.max(max_abs(&off));
        }
    }
    check(worst, 1e-10, "max deviation")
}

fn criterion_4() -> Outcome {
    let cases: [(u64, [C64; 3], usize); 3] = [
        (81, [c(1.0, 0.0), c(0.3, 0.2), c(-0.6, 0.0)], 0),
        (82, [c(0.45, -0.2), c(-2.0, 0.0), c(0.7, 0.1)], 1),
        (83, [c(-0.35, 0.0), c(0.2, 0.3), c(0.0, 0.0)], 2),
    ];
    let mut singular: f64 = 0.0;
    let mut perturbed = f64::INFINITY;
    for (seed, mu, i) in cases {
        let sys = sample::with_eigenvalues(seed, &mu);
        singular = singular.max(run(&sys, false)?.connection.c.determinant().norm());
        let mut mu2 = mu;
        mu2[i] += 0.1;
        let sys = sample::with_eigenvalues(seed, &mu2);
        perturbed = perturbed.min(run(&sys, false)?.connection.c.determinant().norm());
    }
    let msg = format!("integer eigenvalue |det C| <= {singular:.2e}, perturbed |det C| >= {perturbed:.2e}");
    if singular < 1e-8 && perturbed > 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    for nu in [0.3, 0.5] {
        for seed in 1..=5u64 {
            let sys = sample::random_skew(3, 90 + seed, nu);
            let an = run(&sys, false)?;
            let s = &an.monodromy.s_plus;
            let a = alpha(sys.lambda_prime()[0]);
            let lhs = s * (TWO_PI_I * nu).exp() + s.transpose() + &an.connection.c * a;
            worst = worst
                .max(max_abs(&lhs))
                .max(max_abs(&(&an.monodromy.s_minus_inv - s.transpose())));
        }
    }
    check(worst, 1e-8, "10 systems, max residual")
}

fn criterion_6() -> Outcome {
    let mut stab: f64 = 0.0;
    let mut shift: f64 = 0.0;
    let mut frames = 0;
    for seed in [100u64, 101, 113, 117] {
        let n = if seed == 101 { 2 } else { 3 };
        let sys = sample::random_generic(n, seed);
        let bases = build_all(&sys, 80).map_err(|e| e.to_string())?;
        let crit = stokes_core::critical_directions(&sys);
        for nu in 0..crit.m as i64 {
            let (hi, lo) = (crit.eta(nu), crit.eta(nu + 1));
            let f1 = DirectionFrame::new(&sys, 0.9 * hi + 0.1 * lo).map_err(|e| e.to_string())?;
            let f2 = DirectionFrame::new(&sys, 0.1 * hi + 0.9 * lo).map_err(|e| e.to_string())?;
            if f1.nu != f2.nu {
                return Err("directions in different intervals".into());
            }
            let c1 = connection_matrix(&sys, &f1, &bases, TOL).map_err(|e| e.to_string())?.c;
            let c2 = connection_matrix(&sys, &f2, &bases, TOL).map_err(|e| e.to_string())?.c;
            let scale = max_abs(&c1);
            stab = stab.max(max_abs(&(&c1 - c2)) / scale);
            let down = connection_matrix(&sys, &f1.shifted_down(), &bases, TOL).map_err(|e| e.to_string())?.c;
            let expect = eta_shift(&c1, sys.lambda_prime());
            shift = shift.max(max_abs(&(&down - &expect)) / max_abs(&expect));
            frames += 2;
        }
    }
    let msg = format!("{frames} frames over every interval, stability {stab:.2e}, 2pi shift {shift:.2e} (relative, tol 1e-8)");
    if stab <= 1e-8 && shift <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_7() -> Outcome {
    let mut plus_err: f64 = 0.0;
    let mut minus_rel: f64 = 0.0;
    for seed in 110..116u64 {
        let sys = sample::random_generic(3, seed);
        let an = run(&sys, true)?;
        let mu = an.frame.criticals.mu;
        if an.frame.criticals.m != 6 || an.monodromy.w.len() != 6 {
            return Err(format!("seed {seed}: m = {}", an.frame.criticals.m));
        }
        let (plus, minus) = factor_products(&an.monodromy.w, mu);
        plus_err = plus_err.max(max_abs(&(plus - &an.monodromy.s_plus)));
        let sm = &an.monodromy.s_minus_inv;
        minus_rel = minus_rel.max(max_abs(&(minus - sm)) / max_abs(sm));
    }
    let msg = format!("6 systems, S+ {plus_err:.2e} (tol 1e-8), S-^-1 relative {minus_rel:.2e}");
    if plus_err <= 1e-8 && minus_rel <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Representative of `theta + 2 pi h` inside the sector, if any.
fn in_sector(theta: f64, lo: f64, hi: f64) -> Option<f64> {
    (-3..=3).map(|h| theta + TAU * h as f64).find(|t| *t > lo && *t < hi)
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    for (i, &(name, re, im)) in CASES.iter().enumerate() {
        let k = 1;
        let base = with_case(3, 120 + i as u64, k, c(re, im));
        // put the tested pole at the origin so that e^{lambda_k z} = 1
        let lam: Vec<C64> = base.lambda().iter().map(|&l| l - base.lambda()[k]).collect();
        let sys = RankOneSystem::new(lam, base.a1().clone()).map_err(|e| e.to_string())?;
        let frame = DirectionFrame::default_for(&sys).map_err(|e| e.to_string())?;
        let bases = build_all(&sys, 80).map_err(|e| e.to_string())?;
        let sec = sector_solution(&sys, &frame.criticals, frame.nu, TOL).map_err(|e| e.to_string())?;
        for (r, d) in [(5.0, -0.4), (10.0, 0.0), (20.0, 0.4)] {
            let theta = in_sector(PI - frame.eta + d, sec.lo, sec.hi).ok_or("test point outside the sector")?;
            let p = SectorPoint::new(r, theta);
            let lap = laplace_column(&sys, &frame, &bases, k, p.z()).map_err(|e| format!("{name}: {e}"))?;
            let y = sec.y(p).map_err(|e| format!("{name}: {e}"))?;
            let diff = linalg::max_abs_vec(&(lap - y.column(k)));
            worst = worst.max(diff);
            let scale = (sys.lambda_prime()[k] * p.ln()).exp().norm();
            worst_rel = worst_rel.max(diff / scale);
        }
    }
    let msg = format!("4 case tags x 3 points, |diff| {worst:.2e} (tol 1e-6), normalised {worst_rel:.2e}");
    if worst <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_9() -> Outcome {
    let mut cyc: f64 = 0.0;
    let mut spec: f64 = 0.0;
    for seed in 130..136u64 {
        let n = 2 + (seed % 2) as usize;
        let sys = sample::random_generic(n, seed);
        let an = run(&sys, false)?;
        spec = spec.max(an.monodromy.infinity.distance);
        let sec = sector_solution(&sys, &an.frame.criticals, an.frame.nu, TOL).map_err(|e| e.to_string())?;
        let p = SectorPoint::new(2.0 / sys.max_separation(), sec.bisector());
        let y = sec.y(p).map_err(|e| e.to_string())?;
        let moved = transport_around_origin(&sys, p, y.clone(), 1, TOL).map_err(|e| e.to_string())?;
        let s_inv = linalg::inverse(&an.monodromy.s_plus).ok_or("singular S+")?;
        let expect = &y * linalg::exp_diag(sys.lambda_prime(), TWO_PI_I) * &an.monodromy.s_minus_inv * s_inv;
        cyc = cyc.max(max_abs(&(moved - &expect)) / max_abs(&expect));
    }
    let msg = format!("6 systems, cyclic relation {cyc:.2e}, spectrum at infinity {spec:.2e} (tol 1e-6)");
    if cyc <= 1e-6 && spec <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// `|Psi_k(loop around lambda_j) - Psi_k - alpha_j c_jk Psi_j|`, relative.
fn loop_defect(sys: &RankOneSystem, an: &Analysis, k: usize, j: usize) -> Result<f64, String> {
    let frame = &an.frame;
    let path = plan_path(sys, frame, k, j).map_err(|e| e.to_string())?;
    let start = an.bases[k].eval_psi_k(path.start()).map_err(|e| e.to_string())?;
    let (psi, _) = continue_vector(sys, &path, &start, TOL).map_err(|e| e.to_string())?;
    let end = path.end();
    let lj = sys.lambda()[j];
    let u = end.value - lj;
    let pts: Vec<C64> = arc_points(u.norm(), u.arg(), u.arg() + TAU, 0.2).into_iter().map(|w| w + lj).collect();
    let after = march_fuchs(sys, &pts, CMat::from_columns(&[psi.clone()]), TOL)
        .map_err(|e| e.to_string())?
        .value
        .column(0)
        .clone_owned();
    let psi_j = an.bases[j].eval_psi_k(end).map_err(|e| e.to_string())?;
    let jump = psi_j * (alpha(sys.lambda_prime()[j]) * an.connection.c[(j, k)]);
    let scale = linalg::max_abs_vec(&psi).max(linalg::max_abs_vec(&jump));
    Ok(linalg::max_abs_vec(&(after - psi - &jump)) / scale)
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    for (i, &(name, re, im)) in CASES.iter().enumerate() {
        let j = 0;
        let sys = with_case(3, 140 + i as u64, j, c(re, im));
        let an = run(&sys, false)?;
        for k in 1..3 {
            worst = worst.max(loop_defect(&sys, &an, k, j).map_err(|e| format!("{name}: {e}"))?);
        }
    }
    check(worst, 1e-6, "4 case tags x 2 columns, max relative defect")
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 generic Stokes matrices vs direct integration", criterion_1),
        ("2 resonant cases", criterion_2),
        ("3 diagonal A1", criterion_3),
        ("4 invertibility of C", criterion_4),
        ("5 skew-symmetric family", criterion_5),
        ("6 eta stability and 2pi shift", criterion_6),
        ("7 Stokes factor products", criterion_7),
        ("8 Laplace vs sector columns", criterion_8),
        ("9 cyclic relation and monodromy at infinity", criterion_9),
        ("10 loop monodromy of Psi", criterion_10),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let out = f();
        let secs = t.elapsed().as_secs_f64();
        match out {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
