//! Temporary probe for optimizer settings (deleted before delivery).

use conc::erm::{
    population_risk, train_erm, Activation, Ar1PerceptronGenerator, MonteCarloConfig,
    PerceptronParams, PerceptronSpec, RegressionGenerator, TrainConfig,
};

#[test]
#[ignore]
fn probe_training_floor() {
    let spec = PerceptronSpec::new(2, 2, Activation::Tanh, 1.0).unwrap();
    let teacher = PerceptronParams {
        w: vec![vec![0.6, 0.5], vec![-0.4, 0.7]],
        psi: vec![0.8, -0.6],
    };
    let generator =
        Ar1PerceptronGenerator::new(0.6, 0.8, 0.1, spec, Some(teacher)).unwrap();
    let mc = MonteCarloConfig { draws: 100_000, seed: 999 };

    for (restarts, steps, step0) in [
        (6usize, 350usize, None),
        (6, 350, Some(0.15)),
        (6, 700, Some(0.15)),
        (6, 700, Some(0.3)),
        (10, 700, Some(0.3)),
        (6, 1000, Some(0.3)),
    ] {
        let t0 = std::time::Instant::now();
        let mut risks = Vec::new();
        for rep in 0..5u64 {
            let data = generator.sample_path(8192, 31 + rep).unwrap();
            let fitted = train_erm(
                &spec,
                &data,
                &TrainConfig { restarts, steps, step0, seed: 100 + rep },
            )
            .unwrap();
            let pop = population_risk(&spec, &fitted, &generator, &mc).unwrap();
            risks.push(pop.mean);
        }
        println!(
            "restarts={restarts} steps={steps} step0={step0:?}: pop risks {:?} ({:.1?}/5 reps)",
            risks.iter().map(|r| (r - 0.01) * 1e4).collect::<Vec<_>>(),
            t0.elapsed()
        );
    }
}
