//! Acceptance suite: one test per criterion, each printing a pass line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Every tolerance is pinned here; the oracles (closed forms, enumerations,
//! sweep constructions, Monte Carlo dominance checks) are independent of the
//! implementation paths they certify.

use std::time::Instant;

use approx::assert_relative_eq;
use conc::bounds::{
    effective_sample_size, nn_bound, oracle_inequality_bound, theorem_bound, BetaSource,
    BoundInputs,
};
use conc::chaining::{
    entropy_integral_gamma_bound, gamma_exact_small, gamma_value, greedy_admissible_sequence,
    FiniteMetricSpace,
};
use conc::coupling::{block_layout, maximal_coupling, total_variation};
use conc::erm::{Activation, PerceptronParams};
use conc::harness::{
    render_records, run_concentration_experiment, run_erm_experiment_detailed, BasicCheckConfig,
    BoundForm, ConcentrationBoundConfig, ConcentrationConfig, ErmConfig, OutputFormat,
    ResultRecord, ScalarLossFamily,
};
use conc::mixing::{beta_coefficient_exact, MarkovChainSpec};
use conc::rng::rng_from_seed;
use conc::subweibull::{
    centering_const_c3, estimate_psi_norm, latala_const_c4, lp_bound_from_psi, moment_const_c1,
    sum_const_c2, tail_bound, Sample,
};
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

fn flip_chain(p: f64, q: f64) -> MarkovChainSpec {
    MarkovChainSpec::new(vec![vec![1.0 - p, p], vec![q, 1.0 - q]], None).unwrap()
}

fn random_chain(m: usize, rng: &mut impl Rng) -> MarkovChainSpec {
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let raw: Vec<f64> = (0..m).map(|_| 0.05 + rng.random::<f64>()).collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|v| v / sum).collect()
        })
        .collect();
    MarkovChainSpec::new(rows, None).unwrap()
}

#[test]
fn acceptance_1_subweibull_calculus() {
    let start = Instant::now();

    // psi_1 norm of Exp(1) is exactly 2 (analytic oracle: E e^{X/c} = 2 at c = 2)
    let mut rng = rng_from_seed(1001);
    let exp = Exp::new(1.0).unwrap();
    let exp_sample = Sample::new((0..100_000).map(|_| exp.sample(&mut rng)).collect()).unwrap();
    let exp_params = estimate_psi_norm(&exp_sample, 1.0).unwrap();
    assert!(
        (exp_params.norm() - 2.0).abs() <= 0.05 * 2.0,
        "Exp(1) psi_1 norm {} outside 2 +- 5%",
        exp_params.norm()
    );

    // Gaussian tails dominated by the estimated-norm bound on a 50-point grid
    let mut rng = rng_from_seed(1002);
    let mut gauss: Vec<f64> =
        (0..1_000_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let gauss_params = estimate_psi_norm(&Sample::new(gauss.clone()).unwrap(), 2.0)
        .unwrap()
        .inflate(1.05)
        .unwrap();
    for v in gauss.iter_mut() {
        *v = v.abs();
    }
    gauss.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = gauss.len() as f64;
    for step in 1..=50 {
        let eps = 4.5 * step as f64 / 50.0;
        let empirical = (gauss.len() - gauss.partition_point(|v| *v < eps)) as f64 / n;
        let bound = tail_bound(eps, &gauss_params).unwrap();
        assert!(
            empirical <= bound,
            "Gaussian survival {empirical} above bound {bound} at eps = {eps}"
        );
    }

    // empirical L_p norms of Exp(1) dominated by the psi-moment bound
    for p in 1..=6u32 {
        let emp = (exp_sample
            .values()
            .iter()
            .map(|v| v.abs().powi(p as i32))
            .sum::<f64>()
            / exp_sample.len() as f64)
            .powf(1.0 / p as f64);
        let bound = lp_bound_from_psi(p, &exp_params).unwrap();
        assert!(emp <= bound, "L_{p} norm {emp} above bound {bound}");
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "criterion 1 runtime {elapsed:.1?} over 30 s");
    println!("acceptance 1 (sub-Weibull calculus): PASS ({elapsed:.1?})");
}

#[test]
fn acceptance_2_constants_regression() {
    assert_eq!(sum_const_c2(0.5).unwrap(), 4.0);
    assert_eq!(sum_const_c2(2.0).unwrap(), 1.0);
    assert_eq!(latala_const_c4(1.0).unwrap(), 4.0 * std::f64::consts::E);

    // frozen one-time evaluations at 20-digit precision
    assert_relative_eq!(moment_const_c1(0.5).unwrap(), 35.536489876546376, max_relative = 1e-12);
    assert_relative_eq!(moment_const_c1(1.0).unwrap(), 6.5493038901317706, max_relative = 1e-12);
    assert_relative_eq!(moment_const_c1(2.0).unwrap(), 3.5592324598646795, max_relative = 1e-12);
    assert_relative_eq!(centering_const_c3(0.5).unwrap(), 299.85819089145371, max_relative = 1e-12);
    assert_relative_eq!(centering_const_c3(1.0).unwrap(), 10.448648243567902, max_relative = 1e-12);
    assert_relative_eq!(centering_const_c3(2.0).unwrap(), 5.2750738656235848, max_relative = 1e-12);
    println!("acceptance 2 (constants regression): PASS");
}

#[test]
fn acceptance_3_chaining_oracle_equivalence() {
    let start = Instant::now();
    let mut rng = rng_from_seed(3001);
    for trial in 0..100 {
        let points: Vec<Vec<f64>> =
            (0..5).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let space = FiniteMetricSpace::from_euclidean(&points).unwrap();
        for &alpha in &[1.0, 2.0] {
            let exact = gamma_exact_small(&space, alpha).unwrap();
            let greedy =
                gamma_value(&space, &greedy_admissible_sequence(&space), alpha).unwrap();
            let entropy = entropy_integral_gamma_bound(&space, alpha).unwrap();
            assert!(
                exact <= greedy + 1e-12,
                "trial {trial}: exact {exact} above greedy {greedy} (alpha {alpha})"
            );
            assert!(
                exact <= entropy + 1e-12,
                "trial {trial}: exact {exact} above entropy bound {entropy} (alpha {alpha})"
            );
        }
    }

    // pinned exact values
    let two = FiniteMetricSpace::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    assert_eq!(gamma_exact_small(&two, 2.0).unwrap(), 0.0);
    let three = FiniteMetricSpace::new(vec![
        vec![0.0, 1.0, 1.0],
        vec![1.0, 0.0, 1.0],
        vec![1.0, 1.0, 0.0],
    ])
    .unwrap();
    assert_relative_eq!(gamma_exact_small(&three, 2.0).unwrap(), 1.0, max_relative = 1e-14);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "criterion 3 runtime {elapsed:.1?} over 60 s");
    println!("acceptance 3 (chaining oracle equivalence): PASS ({elapsed:.1?})");
}

/// Joint-distribution oracle: propagate the conditional rows of (Z_0, Z_l)
/// forward one lag at a time (no matrix powering).
fn beta_joint_oracle(spec: &MarkovChainSpec, l: u64) -> f64 {
    let m = spec.num_states();
    let pi = spec.stationary();
    let mut joint: Vec<Vec<f64>> = (0..m)
        .map(|x| {
            let mut row = vec![0.0; m];
            row[x] = pi[x];
            row
        })
        .collect();
    for _ in 0..l {
        joint = joint
            .iter()
            .map(|row| {
                let mut next = vec![0.0; m];
                for (y, &mass) in row.iter().enumerate() {
                    if mass != 0.0 {
                        for (z, slot) in next.iter_mut().enumerate() {
                            *slot += mass * spec.transition(y, z);
                        }
                    }
                }
                next
            })
            .collect();
    }
    let mut acc = 0.0;
    for x in 0..m {
        for y in 0..m {
            acc += (joint[x][y] - pi[x] * pi[y]).abs();
        }
    }
    0.5 * acc
}

#[test]
fn acceptance_4_beta_exactness() {
    let mut rng = rng_from_seed(4001);
    for _ in 0..200 {
        let m = 2 + rng.random_range(0..4usize);
        let spec = random_chain(m, &mut rng);
        let mut prev = f64::INFINITY;
        for l in 0..=10u64 {
            let fast = beta_coefficient_exact(&spec, l);
            let oracle = beta_joint_oracle(&spec, l);
            assert!(
                (fast - oracle).abs() <= 1e-12,
                "beta({l}) = {fast} disagrees with joint oracle {oracle} on {m}-state chain"
            );
            assert!(fast <= prev + 1e-12, "beta not nonincreasing at lag {l}");
            prev = fast;
        }
    }

    // closed form for the symmetric flip chain
    let spec = flip_chain(0.3, 0.3);
    for l in 1..=14u64 {
        assert_relative_eq!(
            beta_coefficient_exact(&spec, l),
            0.5 * 0.4_f64.powi(l as i32),
            max_relative = 1e-12
        );
    }
    println!("acceptance 4 (beta exactness): PASS");
}

#[test]
fn acceptance_5_coupling() {
    // mismatch frequency vs analytic TV over 50 random pairs
    let mut rng = rng_from_seed(5001);
    for pair in 0..50 {
        let m = 2 + rng.random_range(0..4usize);
        let sample_dist = |rng: &mut rand_chacha::ChaCha12Rng| -> Vec<f64> {
            let raw: Vec<f64> = (0..m).map(|_| 0.02 + rng.random::<f64>()).collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|v| v / sum).collect()
        };
        let p = sample_dist(&mut rng);
        let q = sample_dist(&mut rng);
        let tv = total_variation(&p, &q).unwrap();
        let reps = 100_000;
        let mismatches = (0..reps)
            .filter(|_| !maximal_coupling(&p, &q, &mut rng).unwrap().matched)
            .count();
        let freq = mismatches as f64 / reps as f64;
        assert!(
            (freq - tv).abs() <= 0.02,
            "pair {pair}: mismatch frequency {freq} not within 2% of TV {tv}"
        );
    }

    // exhaustive block-layout index audit for T <= 200
    for t in 1..=200u64 {
        for n in 1..=t {
            let Ok(layout) = block_layout(t, n) else { continue };
            let m = layout.num_columns();
            assert!(m as f64 > t as f64 / (n as f64 + 1.0));
            assert!(m as f64 <= t as f64 / n as f64);
            let mut hits = vec![0u32; t as usize + 1];
            for i in 0..=n {
                for j in 0..m {
                    if let Some(tt) = layout.entry(i, j) {
                        hits[tt as usize] += 1;
                    }
                }
            }
            assert!(hits[1..].iter().all(|&h| h == 1), "audit failed at T={t}, n={n}");
        }
    }
    println!("acceptance 5 (coupling): PASS");
}

fn exceedance_frequency(records: &[ResultRecord]) -> f64 {
    records.iter().filter(|r| r.exceeded).count() as f64 / records.len() as f64
}

#[test]
fn acceptance_6_theorem_dominance() {
    let start = Instant::now();
    let level = 0.05;
    let band = 2.0 * (level * (1.0 - level) / 500.0_f64).sqrt();

    // A1/A2 constants for g(z, theta) = (v(z) - theta)^2 with v in {0, 1}
    // and theta in [-1, 1]: centered increments are bounded by
    // 2|theta_1 - theta_2|, so C_Theta = 3 > 2/log 2 covers the psi_1 norm;
    // sup_theta |g(z1,.) - g(z2,.)| <= 4 |v(z1) - v(z2)| gives C_Z = 4 with
    // r = s = 2. The gamma inputs are safe upper bounds for the interval
    // (entropy-number route), which only inflate the threshold.
    let bound = ConcentrationBoundConfig {
        alpha: 1.0,
        c_theta: 3.0,
        c_z: 4.0,
        r: 2.0,
        s: 2.0,
        gamma2: 16.5,
        gamma_alpha: 2.0,
        n: None,
        zeta_for_n: Some(10.0),
        eps1: None,
        target_prob: Some(level),
        eps2: 1.0,
        beta: BetaSource::Chain { spec: flip_chain(0.3, 0.3) },
        form: BoundForm::Compact,
    };
    let dependent = ConcentrationConfig {
        seed: None,
        chain: flip_chain(0.3, 0.3),
        t_grid: vec![2000],
        replications: 500,
        g: ScalarLossFamily {
            theta_min: -1.0,
            theta_max: 1.0,
            points: 201,
            state_values: Some(vec![0.0, 1.0]),
        },
        bound,
    };
    let records = run_concentration_experiment(&dependent, 6001).unwrap();
    assert_eq!(records.len(), 500);
    let freq = exceedance_frequency(&records);
    assert!(
        freq <= level + band,
        "dependent-chain exceedance {freq} above {level} + 2-sigma band {band}"
    );

    // independent reduction: rows equal to pi, beta == 0, n = T
    let mut iid = dependent.clone();
    iid.chain =
        MarkovChainSpec::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]], None).unwrap();
    iid.bound.beta = BetaSource::Zero;
    iid.bound.n = Some(2000);
    iid.bound.zeta_for_n = None;
    let records = run_concentration_experiment(&iid, 6002).unwrap();
    let freq = exceedance_frequency(&records);
    assert!(
        freq <= level + band,
        "iid-reduced exceedance {freq} above {level} + 2-sigma band {band}"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "criterion 6 runtime {elapsed:.1?} over 5 min");
    println!("acceptance 6 (theorem dominance): PASS ({elapsed:.1?})");
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn acceptance_7_erm_oracle_inequality() {
    let start = Instant::now();
    let cfg = ErmConfig {
        seed: None,
        phi: 0.6,
        sigma: 0.8,
        noise_sd: 0.1,
        k: 2,
        d: 2,
        activation: Activation::Tanh,
        c_theta: 1.0,
        teacher: Some(PerceptronParams {
            w: vec![vec![0.6, 0.5], vec![-0.4, 0.7]],
            psi: vec![0.8, -0.6],
        }),
        t_grid: vec![256, 512, 1024, 2048, 4096, 8192],
        replications: 50,
        restarts: 6,
        steps: 350,
        step0: None,
        risk_draws: 50_000,
        oracle_factor: 10,
        oracle_draws: 200_000,
        zeta: 10.0,
        bound_c: 1.0,
        basic_check: Some(BasicCheckConfig { points_per_axis: 3, draws: 1000 }),
    };
    let outcomes = run_erm_experiment_detailed(&cfg, 7001).unwrap();
    assert_eq!(outcomes.len(), 6 * 50);

    // per-replication basic inequality holds 100% of the time
    for outcome in &outcomes {
        let basic = outcome.basic.expect("basic check configured");
        assert!(basic.pass, "basic inequality failed: {basic:?}");
    }

    // median excess risk per T
    let mut medians = Vec::new();
    let mut ns = Vec::new();
    for &t in &cfg.t_grid {
        let mut excesses: Vec<f64> = outcomes
            .iter()
            .filter(|o| o.record.t == t)
            .map(|o| o.record.observed)
            .collect();
        assert_eq!(excesses.len(), 50);
        medians.push(median(&mut excesses));
        ns.push(effective_sample_size(t, cfg.zeta).unwrap().n as f64);
    }
    println!("  erm medians (T = 2^8..2^13): {medians:?}");

    let inversions = medians.windows(2).filter(|w| w[1] > w[0]).count();
    assert!(
        inversions <= 1,
        "median excess risk has {inversions} inversions across the T grid: {medians:?}"
    );

    assert!(
        medians.iter().all(|m| *m > 0.0),
        "median excess must be positive for the log-log slope: {medians:?}"
    );
    let log_n: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let log_med: Vec<f64> = medians.iter().map(|m| m.ln()).collect();
    let slope = least_squares_slope(&log_n, &log_med);
    assert!(slope <= -0.25, "log-log slope {slope} above -0.25 (medians {medians:?})");

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 900.0, "criterion 7 runtime {elapsed:.1?} over 15 min");
    println!("acceptance 7 (ERM oracle inequality): PASS (slope {slope:.3}, {elapsed:.1?})");
}

#[test]
fn acceptance_8_bound_evaluators() {
    let ess = effective_sample_size(10_000, 10.0).unwrap();
    assert_eq!(ess.eta, 0.5);
    assert_eq!(ess.n, 100);

    let oracle = oracle_inequality_bound(1_000_000, 10.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    assert_relative_eq!(oracle.terms[0], 0.083112906813455496, max_relative = 1e-12);
    assert_relative_eq!(oracle.terms[1], 0.0069077552789821371, max_relative = 1e-12);
    assert_relative_eq!(oracle.terms[2], 0.031622776601683793, max_relative = 1e-12);

    let nn = nn_bound(1_000_000, 10.0, 4, 1.0).unwrap();
    assert_relative_eq!(nn.terms[0], 0.16622581362691099, max_relative = 1e-12);
    assert_relative_eq!(nn.terms[1], 0.027631021115928548, max_relative = 1e-12);
    assert_relative_eq!(nn.terms[2], 0.037232974110590341, max_relative = 1e-12);

    // monotonicity grid over 500 random tuples
    let mut rng = rng_from_seed(8001);
    let mut checked = 0;
    while checked < 500 {
        let t = 100 + rng.random_range(0..5000u64);
        let n = 2 + rng.random_range(0..((t as f64).sqrt() as u64));
        if block_layout(t, n).is_err() || block_layout(t, n - 1).is_err() {
            continue;
        }
        let base = BoundInputs {
            alpha: 0.4 + 2.0 * rng.random::<f64>(),
            c_theta: 0.1 + rng.random::<f64>(),
            c_z: 0.1 + rng.random::<f64>(),
            r: 1.0 + rng.random::<f64>(),
            s: 0.5 + rng.random::<f64>(),
            gamma2: rng.random::<f64>() * 3.0,
            gamma_alpha: rng.random::<f64>() * 3.0,
            t,
            n,
            beta: BetaSource::Zero,
            eps1: 2.0 + 3.0 * rng.random::<f64>(),
            eps2: 0.5 + rng.random::<f64>(),
        };
        let reference = theorem_bound(&base).unwrap().compact;
        let bump = 1.0 + rng.random::<f64>();
        for field in 0..6 {
            let mut varied = base.clone();
            match field {
                0 => varied.c_theta *= bump,
                1 => varied.c_z *= bump,
                2 => varied.gamma2 += bump,
                3 => varied.gamma_alpha += bump,
                4 => varied.eps1 += bump,
                _ => varied.eps2 += bump,
            }
            assert!(
                theorem_bound(&varied).unwrap().compact.threshold
                    >= reference.threshold - 1e-12,
                "threshold not monotone in field {field}"
            );
        }
        let mut smaller_n = base.clone();
        smaller_n.n -= 1;
        assert!(
            theorem_bound(&smaller_n).unwrap().compact.threshold
                >= reference.threshold - 1e-12,
            "threshold increased with n"
        );
        checked += 1;
    }
    println!("acceptance 8 (bound evaluators): PASS");
}

#[test]
fn acceptance_9_reproducibility() {
    let concentration = ConcentrationConfig {
        seed: None,
        chain: flip_chain(0.3, 0.3),
        t_grid: vec![150, 300],
        replications: 10,
        g: ScalarLossFamily {
            theta_min: -1.0,
            theta_max: 1.0,
            points: 31,
            state_values: None,
        },
        bound: ConcentrationBoundConfig {
            alpha: 1.0,
            c_theta: 3.0,
            c_z: 4.0,
            r: 2.0,
            s: 2.0,
            gamma2: 2.0,
            gamma_alpha: 2.0,
            n: Some(12),
            zeta_for_n: None,
            eps1: Some(4.0),
            target_prob: None,
            eps2: 10.0,
            beta: BetaSource::Chain { spec: flip_chain(0.3, 0.3) },
            form: BoundForm::Compact,
        },
    };
    let erm = ErmConfig {
        seed: None,
        phi: 0.5,
        sigma: 0.8,
        noise_sd: 0.1,
        k: 1,
        d: 1,
        activation: Activation::Tanh,
        c_theta: 1.0,
        teacher: Some(PerceptronParams { w: vec![vec![0.7]], psi: vec![0.6] }),
        t_grid: vec![64, 128],
        replications: 4,
        restarts: 3,
        steps: 100,
        step0: None,
        risk_draws: 1000,
        oracle_factor: 2,
        oracle_draws: 1000,
        zeta: 10.0,
        bound_c: 1.0,
        basic_check: None,
    };

    // byte-identical output modulo the timing column, serial vs parallel
    let strip_timing = |records: &[ResultRecord]| {
        let mut rs = records.to_vec();
        for r in rs.iter_mut() {
            r.wall_ms = 0.0;
        }
        render_records(&rs, OutputFormat::Csv)
    };
    let serial_pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();

    let parallel = run_concentration_experiment(&concentration, 9001).unwrap();
    let rerun = run_concentration_experiment(&concentration, 9001).unwrap();
    let serial =
        serial_pool.install(|| run_concentration_experiment(&concentration, 9001)).unwrap();
    assert_eq!(strip_timing(&parallel), strip_timing(&rerun), "re-run differs");
    assert_eq!(strip_timing(&parallel), strip_timing(&serial), "serial differs");
    let other_seed = run_concentration_experiment(&concentration, 9002).unwrap();
    assert_ne!(strip_timing(&parallel), strip_timing(&other_seed), "seed has no effect");

    let parallel: Vec<ResultRecord> = run_erm_experiment_detailed(&erm, 9003)
        .unwrap()
        .into_iter()
        .map(|o| o.record)
        .collect();
    let serial: Vec<ResultRecord> = serial_pool
        .install(|| run_erm_experiment_detailed(&erm, 9003))
        .unwrap()
        .into_iter()
        .map(|o| o.record)
        .collect();
    assert_eq!(strip_timing(&parallel), strip_timing(&serial), "ERM serial differs");
    println!("acceptance 9 (reproducibility): PASS");
}
