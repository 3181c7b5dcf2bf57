//! Acceptance suite: ten criteria, one PASS/FAIL line each.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsectl::load_system;
use sparsectl_core::controllability::block_controllability_matrix;
use sparsectl_core::criteria::Analysis;
use sparsectl_core::matops::{
    numerical_rank, numerical_rank_scaled, pseudo_inverse, spectral_norm,
};
use sparsectl_core::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn pol() -> TolerancePolicy {
    TolerancePolicy::default()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(t: Instant, limit: Duration) -> Result<(), String> {
    ensure(t.elapsed() < limit, || {
        format!("took {:.2?}, limit {limit:?}", t.elapsed())
    })
}

fn fixture(name: &str) -> LinearSystem {
    load_system(&fixture_dir().join(format!("{name}.json"))).expect("bundled fixture loads")
}

fn fixture_dir() -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures"]
        .iter()
        .collect()
}

fn int_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: i32, hi: i32) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(lo..=hi) as f64)
}

fn random_system(
    rng: &mut ChaCha8Rng,
    max_n: usize,
    max_m: usize,
    max_out: usize,
    lo: i32,
    hi: i32,
) -> LinearSystem {
    let n = rng.random_range(1..=max_n);
    let m = rng.random_range(1..=max_m);
    let p = rng.random_range(1..=max_out);
    let a = int_matrix(rng, n, n, lo, hi);
    let b = int_matrix(rng, n, m, lo, hi);
    let c = int_matrix(rng, p, n, lo, hi);
    LinearSystem::new(a, b, c).unwrap()
}

fn real_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

fn example_reproduction(sys: &LinearSystem, n: usize) -> Result<(), String> {
    let an = Analysis::new(sys, &pol()).map_err(|e| e.to_string())?;
    ensure(an.rank_cw() == n && sys.output_dim() == n, || {
        format!("rank(CW) = {}", an.rank_cw())
    })?;
    ensure(an.profile.max_metric().0 == 2, || {
        format!("max R_i = {}", an.profile.max_metric().0)
    })?;
    ensure(an.necessary_bound() == Ratio::new(1, 1), || {
        format!("max running mean = {}", an.necessary_bound())
    })?;
    ensure(an.necessary(1).unwrap().holds, || {
        "necessary(1) fails".into()
    })?;
    ensure(!an.sufficient(1).unwrap().holds, || {
        "sufficient(1) holds".into()
    })
}

fn c1_example1() -> Outcome {
    let t = Instant::now();
    example_reproduction(&fixture("example1"), 3)?;
    within(t, Duration::from_secs(1))?;
    Ok("rank(CW)=3, max R=2, max mean=1, nec(1) holds, suf(1) fails".into())
}

fn c2_example1_oracle() -> Outcome {
    let t = Instant::now();
    let sys = fixture("example1");
    let k = default_horizon(&sys, 1, &pol()).map_err(|e| e.to_string())?;
    let v = brute_force_check(&sys, 1, k, &pol()).map_err(|e| e.to_string())?;
    ensure(v.status == OracleStatus::NotWithinHorizon, || {
        format!("{v:?}")
    })?;
    within(t, Duration::from_secs(30))?;
    Ok(format!("not controllable within K_max = {k}"))
}

fn c3_example2() -> Outcome {
    let t = Instant::now();
    example_reproduction(&fixture("example2"), 2)?;
    let b2 = fixture("example2_b2");
    let k = default_horizon(&b2, 1, &pol()).map_err(|e| e.to_string())?;
    let v = brute_force_check(&b2, 1, k, &pol()).map_err(|e| e.to_string())?;
    ensure(v.is_controllable(), || format!("restricted system: {v:?}"))?;
    within(t, Duration::from_secs(10))?;
    Ok(format!(
        "reproduced; restricted system controllable at K = {}",
        v.horizon_found.unwrap()
    ))
}

fn c4_sandwich() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut cases, mut controllable) = (0, 0);
    for _ in 0..150 {
        let sys = random_system(&mut rng, 4, 3, 2, -1, 1);
        let an = Analysis::new(&sys, &pol()).map_err(|e| e.to_string())?;
        for s in 1..=sys.input_dim() {
            let k = default_horizon(&sys, s, &pol()).map_err(|e| e.to_string())?;
            let v = brute_force_check(&sys, s, k, &pol()).map_err(|e| e.to_string())?;
            cases += 1;
            controllable += usize::from(v.is_controllable());
            ensure(
                !an.sufficient(s).unwrap().holds || v.is_controllable(),
                || format!("sufficient but oracle negative: {sys:?} s={s}"),
            )?;
            ensure(
                !v.is_controllable() || an.necessary(s).unwrap().holds,
                || format!("oracle positive but necessary fails: {sys:?} s={s}"),
            )?;
        }
    }
    within(t, Duration::from_secs(300))?;
    Ok(format!(
        "150 systems, {cases} (system, s) cases, {controllable} controllable, 0 violations"
    ))
}

fn c5_chain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0;
    for _ in 0..500 {
        let sys = random_system(&mut rng, 5, 3, 3, -2, 2);
        let an = Analysis::new(&sys, &pol()).map_err(|e| e.to_string())?;
        if an.output_controllable() {
            ensure(an.necessary_bound().le_int(sys.input_dim()), || {
                format!("m < necessary bound: {sys:?}")
            })?;
        }
        for s in 1..=sys.input_dim() {
            let v = an.verdict(s).unwrap();
            cases += 1;
            ensure(!v.corollary2_holds || v.sufficient_holds, || {
                format!("N-rank(A) test => sufficient: {sys:?} s={s}")
            })?;
            ensure(!v.sufficient_holds || v.necessary_holds, || {
                format!("sufficient => necessary: {sys:?} s={s}")
            })?;
            ensure(!v.necessary_holds || v.theorem_c_necessary, || {
                format!("necessary => spectral: {sys:?} s={s}")
            })?;
        }
    }
    Ok(format!("500 systems, {cases} cases, 0 violations"))
}

fn c6_identity_output() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut positives = 0;
    for _ in 0..200 {
        let base = random_system(&mut rng, 5, 3, 1, -2, 2);
        let n = base.state_dim();
        let sys =
            LinearSystem::new(base.a().clone(), base.b().clone(), Matrix::identity(n, n)).unwrap();
        let an = Analysis::new(&sys, &pol()).map_err(|e| e.to_string())?;
        for s in 1..=sys.input_dim() {
            let pbh = an.pbh_state_sparse(s).unwrap().holds;
            positives += usize::from(pbh);
            let (nec, suf) = (
                an.necessary(s).unwrap().holds,
                an.sufficient(s).unwrap().holds,
            );
            ensure(nec == pbh && suf == pbh, || {
                format!("nec={nec} suf={suf} pbh={pbh}: {sys:?} s={s}")
            })?;
        }
    }
    Ok(format!(
        "200 systems, {positives} positive verdicts, 0 violations"
    ))
}

fn c7_symmetric() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let n = rng.random_range(1..=5);
        let (m, p) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let g = int_matrix(&mut rng, n, n, -2, 2);
        let sys = LinearSystem::new(
            &g + g.transpose(),
            int_matrix(&mut rng, n, m, -2, 2),
            int_matrix(&mut rng, p, n, -2, 2),
        )
        .unwrap();
        let an = Analysis::new(&sys, &pol()).map_err(|e| e.to_string())?;
        let c1 = an.corollary1();
        ensure(c1.applies, || format!("max R_i != R_0: {sys:?}"))?;
        for s in 1..=m {
            let r = c1.reduced_condition(s);
            ensure(
                r == an.necessary(s).unwrap().holds && r == an.sufficient(s).unwrap().holds,
                || format!("reduced condition disagrees: {sys:?} s={s}"),
            )?;
        }
    }
    Ok("100 symmetric systems, all apply, 0 disagreements".into())
}

fn c8_path_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let sys = random_system(&mut rng, 5, 3, 3, -2, 2);
        let big_n = sys.state_dim();
        let form = kalman_decompose(&sys, &pol()).map_err(|e| e.to_string())?;
        let profile = rank_profile(&sys, &pol()).map_err(|e| e.to_string())?;
        let mut aiw = block_controllability_matrix(sys.a(), sys.b(), big_n);
        let mut reduced = form.c_reduced.clone();
        let (norm_a, norm_c) = (spectral_norm(sys.a()), spectral_norm(sys.c()));
        for i in 0..=big_n {
            // Integer products are exact in floating point.
            let direct = numerical_rank(&(sys.c() * &aiw), &pol());
            let via_form = numerical_rank_scaled(&reduced, norm_c * norm_a.powi(i as i32), &pol());
            ensure(direct == via_form && direct == profile.ranks[i], || {
                format!(
                    "i = {i}: direct {direct}, reduced {via_form}, profile {}: {sys:?}",
                    profile.ranks[i]
                )
            })?;
            aiw = sys.a() * aiw;
            reduced *= &form.a_reduced;
        }
    }
    Ok("200 systems, all rank sequences equal".into())
}

fn c9_pseudo_inverse_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (r, c) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let m = real_matrix(&mut rng, r, c);
        let q = real_matrix(&mut rng, r, r).qr().q();
        let lhs = pseudo_inverse(&(&q * &m), &pol());
        let rhs = pseudo_inverse(&m, &pol()) * q.transpose();
        let rel = (&lhs - &rhs).norm() / rhs.norm();
        worst = worst.max(rel);
        ensure(rel <= 1e-8, || {
            format!("pseudo-inverse rotation error {rel:e}")
        })?;
    }
    for _ in 0..100 {
        let (r, c, k) = (
            rng.random_range(1..=6),
            rng.random_range(1..=8),
            rng.random_range(1..=4),
        );
        let a = real_matrix(&mut rng, r, r);
        let w = real_matrix(&mut rng, r, k) * real_matrix(&mut rng, k, c);
        let aw = &a * &w;
        let projected = &aw * pseudo_inverse(&w, &pol()) * &w;
        let rel = (&projected - &aw).norm() / aw.norm().max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
        ensure(rel <= 1e-8, || format!("A W W^+ W != A W, error {rel:e}"))?;
        let lhs = numerical_rank(&aw, &pol());
        let rhs = numerical_rank(&(&aw * pseudo_inverse(&w, &pol())), &pol());
        ensure(lhs == rhs, || {
            format!("rank(AW) = {lhs}, rank(AWW^+) = {rhs}")
        })?;
    }
    Ok(format!("200 instances, worst relative error {worst:.1e}"))
}

fn c10_design() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let (mut designed, mut greedy_failures) = (0, 0);
    let check = |sys: &LinearSystem, x0: &Vector, yf: &Vector, sol: &DesignSolution, s: usize| {
        let sim = verify_design(sys, x0, sol, yf).map_err(|e| e.to_string())?;
        ensure(sim <= 1e-8, || {
            format!("{:?}: simulated residual {sim:e}", sys.name())
        })?;
        ensure(sparsity_of(&sol.inputs) <= s, || {
            format!("{:?}: input denser than {s}", sys.name())
        })
    };
    for p in &paths {
        let sys = load_system(p).unwrap();
        let (big_n, n, m) = (sys.state_dim(), sys.output_dim(), sys.input_dim());
        for s in 1..=m {
            let k = default_horizon(&sys, s, &pol()).unwrap();
            let v = brute_force_check(&sys, s, k, &pol()).unwrap();
            let Some(k_found) = v.horizon_found else {
                continue;
            };
            let mut horizons = vec![n, k_found, big_n, k];
            horizons.dedup();
            for _ in 0..5 {
                let x0 = real_matrix(&mut rng, big_n, 1).column(0).into_owned();
                let yf = real_matrix(&mut rng, n, 1).column(0).into_owned();
                let mut done = false;
                for &h in &horizons {
                    let prob =
                        DesignProblem::new(&sys, x0.clone(), yf.clone(), s, 1e-9).with_horizon(h);
                    if let Ok(sol) = design_sparse_inputs(&prob, &pol()) {
                        check(&sys, &x0, &yf, &sol, s)?;
                        done = true;
                        break;
                    }
                }
                designed += usize::from(done);
                greedy_failures += usize::from(!done);
            }
        }
    }
    ensure(designed > 0, || "no fixture was designed".into())?;
    let mut full_budget = 0;
    let candidates = paths
        .iter()
        .map(|p| load_system(p).unwrap())
        .chain((0..200).map(|_| random_system(&mut rng, 5, 3, 3, -2, 2)));
    let systems: Vec<LinearSystem> = candidates.collect();
    for sys in &systems {
        if !criteria::check_output_controllable(sys, &pol()).unwrap() {
            continue;
        }
        let m = sys.input_dim();
        let x0 = real_matrix(&mut rng, sys.state_dim(), 1)
            .column(0)
            .into_owned();
        let yf = real_matrix(&mut rng, sys.output_dim(), 1)
            .column(0)
            .into_owned();
        let prob =
            DesignProblem::new(sys, x0.clone(), yf.clone(), m, 1e-9).with_horizon(sys.state_dim());
        let sol = design_sparse_inputs(&prob, &pol())
            .map_err(|e| format!("s = m design failed: {e}: {sys:?}"))?;
        check(sys, &x0, &yf, &sol, m)?;
        full_budget += 1;
    }
    Ok(format!(
        "{designed} fixture targets reached ({greedy_failures} greedy failures skipped), \
         {full_budget} full-budget designs at residual <= 1e-8"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("example1 fixture ranks and bounds", c1_example1),
        ("example1 oracle", c2_example1_oracle),
        ("example2 fixture and restriction", c3_example2),
        ("sandwich property", c4_sandwich),
        ("implication chain and input bound", c5_chain),
        ("identity output reduction", c6_identity_output),
        ("symmetric A reduced condition", c7_symmetric),
        ("Kalman-form path equivalence", c8_path_equivalence),
        (
            "pseudo-inverse and rank identities",
            c9_pseudo_inverse_identities,
        ),
        ("design closure", c10_design),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = t.elapsed();
        match outcome {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {name} ({elapsed:.2?}): {detail}",
                i + 1
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "criterion {:>2} FAIL  {name} ({elapsed:.2?}): {detail}",
                    i + 1
                );
            }
        }
    }
    if failed == 0 {
        println!("acceptance: 10/10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria failed");
        ExitCode::FAILURE
    }
}
