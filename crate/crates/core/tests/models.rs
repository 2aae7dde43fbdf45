//! Monte Carlo checks of the process models against closed forms and
//! independent oracles.

use swarm_stability::analysis::stats::ks_two_sample;
use swarm_stability::analysis::{
    birth_death_stationary, estimate_growth_slope, estimate_h0_scaling, estimate_nk, estimate_series_sum,
    estimate_survival, estimate_time_average, lambda_star, SlopeMethod, ThresholdModel,
};
use swarm_stability::kernel::{replicate, replicate_map, run_ctmc, FnGenerator, RngStream, StoppingRule};
use swarm_stability::processes::{
    run_wz_to_extinction, simulate_branching, simulate_free, simulate_rbh, simulate_saturated_lumped, simulate_yule,
    v_chain_simulate, v_chain_step, BranchingParams, FreeParams, KillSchedule, ProcessSpec, RbhParams,
    SaturatedParams, VChainParams, YuleParams,
};

fn rbh21() -> RbhParams {
    RbhParams::new(2.0, 1.0).unwrap()
}

#[test]
fn two_state_chain_occupation() {
    let (a, b) = (1.0, 2.0);
    let gen = FnGenerator::new(1, &[&[1], &[-1]], move |s, r| {
        r[0] = if s[0] == 0 { a } else { 0.0 };
        r[1] = if s[0] == 1 { b } else { 0.0 };
    });
    let traj = run_ctmc(&gen, &[0], &StoppingRule::horizon(1e4), &mut RngStream::new(11, 0)).unwrap();
    let in_zero = 1.0 - traj.time_average(0, 0.0, 1e4);
    let target = b / (a + b);
    assert!((in_zero - target).abs() / target < 0.01, "{in_zero} vs {target}");
}

#[test]
fn yule_means() {
    let p = YuleParams::new(1.0).unwrap();
    let stop = StoppingRule::horizon(1.0);
    for (y0, target) in [(1, std::f64::consts::E), (5, 5.0 * std::f64::consts::E)] {
        let s = replicate(10_000, 12 + y0 as u64, |rng| {
            Ok(simulate_yule(&p, y0, &stop, rng)?.final_state()[0] as f64)
        })
        .unwrap();
        assert!(s.z_score(target) < 3.0, "y0={y0}: {} vs {target}", s.mean);
    }
}

#[test]
fn branching_representation_extinction() {
    let rbh = rbh21();
    let q = rbh.extinction_prob();
    assert!((q - 0.5).abs() < 1e-15);
    // From 200 particles extinction has probability 2^-200.
    let stop = StoppingRule::horizon(1e6).with_absorb(|s| s[0] == 0 || s[0] >= 200);
    let reps = 40_000;
    let z = replicate(reps, 13, |rng| {
        Ok(f64::from(u8::from(simulate_rbh(&rbh, 1, &stop, rng)?.0.final_state()[0] == 0)))
    })
    .unwrap();
    let bp = BranchingParams::from_rbh(&rbh);
    assert!((bp.lambda - 3.0).abs() < 1e-15 && (bp.p - 2.0 / 3.0).abs() < 1e-15);
    let b = replicate(reps, 14, |rng| {
        Ok(f64::from(u8::from(simulate_branching(&bp, 1, &stop, rng)?.final_state()[0] == 0)))
    })
    .unwrap();
    for s in [z, b] {
        assert!((s.mean - q).abs() / q < 0.02, "{} vs {q}", s.mean);
    }
}

#[test]
fn free_second_coordinate_is_the_birth_death_process() {
    let free = FreeParams::new(0.5, 4.0, 1.0, 1.0).unwrap();
    let stop = StoppingRule::horizon(2.0);
    let a = replicate_map(5000, 15, |rng| Ok(simulate_free(&free, [0, 0], &stop, rng)?.final_state()[1] as f64)).unwrap();
    let b = replicate_map(5000, 16, |rng| Ok(simulate_rbh(&rbh21(), 0, &stop, rng)?.0.final_state()[0] as f64)).unwrap();
    let ks = ks_two_sample(&a, &b).unwrap();
    assert!(ks.p_value > 0.001, "{ks:?}");
}

#[test]
fn free_process_drift() {
    let spec = ProcessSpec::Free {
        params: FreeParams::new(1.0, 1.0, 2.0, 2.0).unwrap(),
        y0: [0, 0],
    };
    let s = estimate_growth_slope(&spec, Some(0), 2000.0, SlopeMethod::Endpoint, 100, 17).unwrap();
    let target = 2.0 - lambda_star(ThresholdModel::FreeOrOne, 1.0, 2.0, 1.0).unwrap();
    assert!(s.z_score(target) < 3.0, "{} ± {} vs {target}", s.mean, s.std_error);
}

#[test]
fn free_process_without_arrivals_never_gains() {
    let free = FreeParams::new(1.0, 1.0, 2.0, 0.0).unwrap();
    let traj = simulate_free(&free, [5, 1], &StoppingRule::horizon(50.0), &mut RngStream::new(18, 0)).unwrap();
    for i in 1..traj.len() {
        assert!(traj.state(i)[0] <= traj.state(i - 1)[0]);
    }
    assert!(traj.final_state()[0] < 0);
}

#[test]
fn birth_death_long_run_matches_stationary_law() {
    let p = RbhParams::new(1.0, 2.0).unwrap();
    let h = 1e4;
    let (traj, _) = simulate_rbh(&p, 0, &StoppingRule::horizon(h), &mut RngStream::new(19, 0)).unwrap();
    let pi = birth_death_stationary(0.5, 60).unwrap();
    let mut tv = 0.0;
    for (z, &target) in pi.iter().enumerate() {
        let occupied = traj.integral(0.0, h, |s| f64::from(u8::from(s[0] == z as i64))) / h;
        tv += (occupied - target).abs();
    }
    tv /= 2.0;
    assert!(tv < 0.02, "total variation {tv}");
}

#[test]
fn supercritical_martingale_limit_is_positive() {
    let stop = StoppingRule::horizon(5.0);
    let s = replicate(10_000, 20, |rng| {
        Ok((-5.0f64).exp() * simulate_rbh(&rbh21(), 1, &stop, rng)?.0.final_state()[0] as f64)
    })
    .unwrap();
    assert!(s.mean > 0.0 && s.excludes_zero(), "{s:?}");
}

#[test]
fn saturated_case_one_grows() {
    // Case 1 with the first queue lumped; the mean of the second queue grows like e^t.
    let p = SaturatedParams::new(2.0, 3.0, 2.0).unwrap();
    let means: Vec<f64> = [2.5, 5.0, 10.0]
        .into_iter()
        .map(|t| {
            let stop = StoppingRule::horizon(t);
            replicate(400, 21, |rng| Ok(simulate_saturated_lumped(&p, [1, 0], &stop, rng)?.final_state()[1] as f64))
                .unwrap()
                .mean
        })
        .collect();
    assert!(means.windows(2).all(|w| w[1] > 2.0 * w[0]), "{means:?}");
}

#[test]
fn saturated_case_two_time_averages_settle() {
    let spec = ProcessSpec::Saturated {
        params: SaturatedParams::new(0.5, 4.0, 1.0).unwrap(),
        z0: [1, 0],
    };
    for coord in [0, 1] {
        let d = estimate_time_average(&spec, Some(coord), 1000.0, None, 40, 22).unwrap();
        assert!(d.relative_change() < 0.10, "coordinate {coord}: {d:?}");
    }
}

#[test]
fn killed_yule_with_empty_schedule_survives() {
    let (alive, mw) = estimate_survival(1.0, 1, &KillSchedule::empty(), 3.0, 10_000, 23).unwrap();
    assert_eq!(alive.mean, 1.0);
    assert!(mw.z_score(1.0) < 3.0, "{mw:?}");
}

#[test]
fn later_kills_do_not_hurt_survival() {
    let reps = 10_000;
    let early = KillSchedule::arithmetic(1.0).unwrap();
    let late = KillSchedule::custom(|n| n as f64 + 0.5);
    let (a, _) = estimate_survival(1.0, 1, &early, 20.0, reps, 24).unwrap();
    let (b, _) = estimate_survival(1.0, 1, &late, 20.0, reps, 24).unwrap();
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!(b.mean >= a.mean - 3.0 * se, "{} vs {}", b.mean, a.mean);
}

#[test]
fn logarithmic_kills_are_fatal() {
    let (alive, _) = estimate_survival(1.0, 1, &KillSchedule::logarithmic(), 50.0, 10_000, 25).unwrap();
    assert_eq!(alive.mean, 0.0);
    assert!(alive.contains(0.0) && alive.upper() < 0.01);
}

#[test]
fn wz_envelope_bound_and_finite_extinction() {
    let mu_w = 0.1;
    let rbh = rbh21();
    let outcomes = replicate_map(10_000, 26, |rng| run_wz_to_extinction(mu_w, &rbh, [1, 0], rng, 1e3)).unwrap();
    assert!(outcomes.iter().all(|o| o.extinct));
    for w0 in [1, 10, 100] {
        let outcomes = replicate_map(500, 27 + w0 as u64, |rng| run_wz_to_extinction(mu_w, &rbh, [w0, 3], rng, 1e3)).unwrap();
        for o in outcomes {
            assert!((o.z_at_h0 - 3) as f64 <= (mu_w * o.h0).exp() * o.my_star * (1.0 + 1e-12), "{o:?}");
        }
    }
}

#[test]
fn h0_means_grow_along_the_grid() {
    let table = estimate_h0_scaling(0.1, &rbh21(), &[1, 10, 100, 1000], 400, 28, 1e3).unwrap();
    let means: Vec<f64> = table.rows.iter().map(|r| r.estimate.mean).collect();
    assert!(means.windows(2).all(|w| w[1] >= w[0]), "{means:?}");
}

#[test]
fn sparse_thinning_usually_empties_the_chain() {
    let params = VChainParams::new(0.01, 0.1, rbh21()).unwrap();
    let s = replicate(2000, 29, |rng| Ok(f64::from(u8::from(v_chain_step(&params, 10, rng)? == 0)))).unwrap();
    assert!(s.mean > 0.8, "{}", s.mean);
}

#[test]
fn v_chain_keeps_returning() {
    let params = VChainParams::new(0.5, 0.1, rbh21()).unwrap();
    let steps = 2000;
    let run = v_chain_simulate(&params, 0, steps, 50, &mut RngStream::new(30, 0)).unwrap();
    let returns = |path: &[i64]| path.iter().filter(|&&v| v <= 50).count();
    let (first, second) = (returns(&run.path[..steps / 2]), returns(&run.path[steps / 2..]));
    assert!(first > steps / 10 && second > steps / 10, "{first} {second}");
}

#[test]
fn heavier_thinning_reaches_the_target_sooner() {
    let light = VChainParams::new(0.01, 0.1, rbh21()).unwrap();
    let heavy = VChainParams::new(0.9, 0.1, rbh21()).unwrap();
    let a = estimate_nk(&light, 50, &[100], 200, 31, 10_000).unwrap();
    let b = estimate_nk(&heavy, 50, &[100], 200, 31, 10_000).unwrap();
    assert!(a.rows[0].estimate.mean <= b.rows[0].estimate.mean, "{:?} {:?}", a.rows[0], b.rows[0]);
}

/// `f(z) = E_z sum_n exp(-gamma sigma_n)` from the first-step equations of
/// the embedded chain, truncated at `n` with a reflecting top state.
fn series_oracle(gamma: f64, mu_z: f64, nu: f64, n: usize) -> Vec<f64> {
    let (mut lower, mut diag, mut upper, mut rhs) = (vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]);
    for z in 0..=n {
        let birth = mu_z * z.max(1) as f64;
        let death = nu * z as f64;
        diag[z] = birth + death + gamma;
        rhs[z] = birth;
        lower[z] = -death;
        if z < n {
            upper[z] = -birth;
        } else {
            diag[z] -= birth;
        }
    }
    // Thomas algorithm.
    for z in 1..=n {
        let m = lower[z] / diag[z - 1];
        diag[z] -= m * upper[z - 1];
        rhs[z] -= m * rhs[z - 1];
    }
    let mut f = vec![0.0; n + 1];
    f[n] = rhs[n] / diag[n];
    for z in (0..n).rev() {
        f[z] = (rhs[z] - upper[z] * f[z + 1]) / diag[z];
    }
    f
}

#[test]
fn series_sum_matches_first_step_oracle() {
    let gamma = 4.0;
    let f = series_oracle(gamma, 2.0, 1.0, 2000);
    let g = series_oracle(gamma, 2.0, 1.0, 4000);
    assert!((f[0] - g[0]).abs() < 1e-6, "{} {}", f[0], g[0]);
    let (s, diag) = estimate_series_sum(gamma, &rbh21(), 0, 4.0, 4000, 32).unwrap();
    assert!(diag.stabilized);
    assert!(s.z_score(f[0]) < 3.0, "{} ± {} vs {}", s.mean, s.std_error, f[0]);
}
