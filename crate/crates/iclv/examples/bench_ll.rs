//! Rough timing of the simulated log-likelihood at recovery scale.
use std::time::Instant;

use iclv::draws::DrawSettings;
use iclv::formats::read_params_file;
use iclv::likelihood::{LikelihoodEvaluator, ParamBlock};
use iclv::synthetic::{random_design, simulate_dataset, CovariateSampler, DesignSpec};

fn main() {
    let loaded = read_params_file(std::path::Path::new("fixtures/sp50/true-params.json")).unwrap();
    let design = random_design(&DesignSpec::survey_default(), 11).unwrap();
    let t0 = Instant::now();
    let ds = simulate_dataset(&design, &loaded.spec, &loaded.params, 1000,
        &CovariateSampler::survey_marginals(), 13).unwrap();
    println!("simulate 1000: {:?}", t0.elapsed());

    let settings = DrawSettings { n_draws: 500, seed: 1, ..Default::default() };
    let t0 = Instant::now();
    let mut ev = LikelihoodEvaluator::new(&loaded.spec, &ds, &settings).unwrap();
    println!("evaluator build: {:?}", t0.elapsed());

    let t0 = Instant::now();
    let ll = ev.log_likelihood(&loaded.params).unwrap();
    println!("full eval: {:?}  ll={:.3}", t0.elapsed(), ll.total);

    let t0 = Instant::now();
    for _ in 0..5 { ev.log_likelihood(&loaded.params).unwrap(); }
    println!("full eval x5: {:?}", t0.elapsed());

    ev.refresh_base(&loaded.params).unwrap();
    let mut p2 = loaded.params.clone();
    p2.measurement[1].loading += 1e-5;
    let t0 = Instant::now();
    for _ in 0..5 { ev.log_likelihood_perturbed(&p2, ParamBlock::MeasurementOnly).unwrap(); }
    println!("meas-only x5: {:?}", t0.elapsed());
    let mut p3 = loaded.params.clone();
    p3.beta[3].1 += 1e-5;
    let t0 = Instant::now();
    for _ in 0..5 { ev.log_likelihood_perturbed(&p3, ParamBlock::ChoiceOnly).unwrap(); }
    println!("choice-only x5: {:?}", t0.elapsed());
}
