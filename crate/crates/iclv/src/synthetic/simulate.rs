//! Simulation of complete choice datasets from known parameters, for
//! parameter-recovery studies and fixtures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::covariates::CovariateVector;
use crate::model::dataset::{ChoiceDataset, ChoiceTask, Chosen, Individual};
use crate::model::kernels::{ordered_logit_prob, structural_mean, systematic_utility};
use crate::model::params::ParameterSet;
use crate::model::spec::ModelSpec;
use crate::synthetic::Design;

/// Marginal sampling weights for each covariate group. The default matches
/// the survey's descriptive statistics: age drawn uniformly within the four
/// published age brackets, dummies drawn from the published shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateSampler {
    /// (lower age, upper age, weight)
    pub age_bins: Vec<(f64, f64, f64)>,
    pub female: f64,
    /// (certificate, postgraduate, undergraduate); remainder is "other".
    pub education: (f64, f64, f64),
    /// (full time, part time)
    pub employment: (f64, f64),
    /// (couple with kids, couple without kids, single parent, single)
    pub household: (f64, f64, f64, f64),
    /// (one, two, three or more)
    pub vehicles: (f64, f64, f64),
    /// (low, high); remainder is the middle reference band.
    pub income: (f64, f64),
    /// (house, apartment)
    pub dwelling: (f64, f64),
    /// (owner, owner with mortgage, renter)
    pub tenure: (f64, f64, f64),
}

impl CovariateSampler {
    /// Shares from the survey's descriptive summary (unspecified income is
    /// folded into the middle reference band).
    pub fn survey_marginals() -> Self {
        CovariateSampler {
            age_bins: vec![
                (18.0, 30.0, 0.2314),
                (31.0, 45.0, 0.2807),
                (46.0, 65.0, 0.3420),
                (66.0, 85.0, 0.1459),
            ],
            female: 0.5102,
            education: (0.3188, 0.2100, 0.3941),
            employment: (0.4275, 0.1933),
            household: (0.3076, 0.3578, 0.0539, 0.1738),
            vehicles: (0.4981, 0.3550, 0.1115),
            income: (0.2900, 0.3132),
            dwelling: (0.6710, 0.2193),
            tenure: (0.3615, 0.3253, 0.2946),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> CovariateVector {
        let mut cov = CovariateVector::default();
        let total: f64 = self.age_bins.iter().map(|b| b.2).sum();
        let mut u = rng.gen_range(0.0..total);
        let mut years = self.age_bins[0].0;
        for &(lo, hi, w) in &self.age_bins {
            if u < w {
                years = rng.gen_range(lo..=hi);
                break;
            }
            u -= w;
        }
        cov.set_age_years(years);
        cov.female = (rng.gen_range(0.0..1.0) < self.female) as u8 as f64;

        fn one_of<R: Rng>(rng: &mut R, weights: &[f64]) -> Option<usize> {
            let mut u = rng.gen_range(0.0..1.0);
            for (i, w) in weights.iter().enumerate() {
                if u < *w {
                    return Some(i);
                }
                u -= w;
            }
            None
        }

        let (cert, post, under) = self.education;
        match one_of(rng, &[cert, post, under]) {
            Some(0) => cov.edu_certificate = 1.0,
            Some(1) => cov.edu_postgraduate = 1.0,
            Some(2) => cov.edu_undergraduate = 1.0,
            _ => {}
        }
        let (full, part) = self.employment;
        match one_of(rng, &[full, part]) {
            Some(0) => cov.emp_full_time = 1.0,
            Some(1) => cov.emp_part_time = 1.0,
            _ => {}
        }
        let (ck, cnk, sp, single) = self.household;
        match one_of(rng, &[ck, cnk, sp, single]) {
            Some(0) => cov.hh_couple_kids = 1.0,
            Some(1) => cov.hh_couple_no_kids = 1.0,
            Some(2) => cov.hh_single_parent = 1.0,
            Some(3) => cov.hh_single = 1.0,
            _ => {}
        }
        let (v1, v2, v3) = self.vehicles;
        match one_of(rng, &[v1, v2, v3]) {
            Some(0) => cov.veh_one = 1.0,
            Some(1) => cov.veh_two = 1.0,
            Some(2) => cov.veh_three_plus = 1.0,
            _ => {}
        }
        let (lo, hi) = self.income;
        match one_of(rng, &[lo, hi]) {
            Some(0) => cov.inc_low = 1.0,
            Some(1) => cov.inc_high = 1.0,
            _ => {}
        }
        let (house, apt) = self.dwelling;
        match one_of(rng, &[house, apt]) {
            Some(0) => cov.acc_house = 1.0,
            Some(1) => cov.acc_apartment = 1.0,
            _ => {}
        }
        let (own, mortgage, rent) = self.tenure;
        match one_of(rng, &[own, mortgage, rent]) {
            Some(0) => cov.ten_owner = 1.0,
            Some(1) => cov.ten_owner_mortgage = 1.0,
            Some(2) => cov.ten_renter = 1.0,
            _ => {}
        }
        cov
    }
}

fn gumbel<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    -(-u.ln()).ln()
}

/// Simulates a complete dataset from known parameters.
///
/// Individuals are assigned to design blocks round-robin, sample covariates
/// from `sampler`, draw latents from the structural equations, answer every
/// indicator from the ordered-logit measurement model, and choose in every
/// task of their block by maximizing Gumbel-perturbed utilities. Fully
/// reproducible per seed.
pub fn simulate_dataset(
    design: &Design,
    spec: &ModelSpec,
    true_params: &ParameterSet,
    n_individuals: usize,
    sampler: &CovariateSampler,
    seed: u64,
) -> Result<ChoiceDataset> {
    spec.validate()?;
    true_params.validate(spec)?;
    let n_lat = spec.n_latents();
    let mut individuals = Vec::with_capacity(n_individuals);
    for i in 0..n_individuals {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(i as u64).to_le_bytes());
        key[16] = 0xda;
        let mut rng = ChaCha8Rng::from_seed(key);

        let covariates = sampler.sample(&mut rng);
        let z = spec.structural_regressors(&covariates)?;
        let mut att = structural_mean(true_params, &z)?;
        for l in 0..n_lat {
            let e: f64 = StandardNormal.sample(&mut rng);
            att.0[l] += true_params.delta_scale[l] * e;
        }

        let indicators = true_params
            .measurement
            .iter()
            .map(|meas| {
                let signal = meas.loading * att[meas.latent];
                let mut u = rng.gen_range(0.0..1.0);
                let mut level = 5u8;
                for candidate in 1..=5u8 {
                    let p = ordered_logit_prob(&meas.thresholds, signal, candidate);
                    if u < p {
                        level = candidate;
                        break;
                    }
                    u -= p;
                }
                Some(level)
            })
            .collect();

        let block = i % design.n_blocks;
        let tasks = design
            .block_tasks(block)
            .into_iter()
            .map(|task| {
                let v1 = systematic_utility(true_params, Some(&task.alts[0]), &att)?;
                let v2 = systematic_utility(true_params, Some(&task.alts[1]), &att)?;
                let u = [
                    v1 + gumbel(&mut rng),
                    v2 + gumbel(&mut rng),
                    gumbel(&mut rng),
                ];
                let chosen = if u[0] >= u[1] && u[0] >= u[2] {
                    Chosen::Alt1
                } else if u[1] >= u[2] {
                    Chosen::Alt2
                } else {
                    Chosen::OptOut
                };
                Ok(ChoiceTask {
                    alt1: task.alts[0].clone(),
                    alt2: task.alts[1].clone(),
                    chosen,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        individuals.push(Individual {
            id: i as u64,
            covariates,
            indicators,
            tasks,
        });
    }
    Ok(ChoiceDataset {
        tasks_per_individual: design.tasks_per_respondent,
        individuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::attributes::Attribute;
    use crate::synthetic::{random_design, DesignSpec};

    fn spec_and_params() -> (ModelSpec, ParameterSet) {
        let spec = ModelSpec::paper_default();
        let mut p = ParameterSet::zeros(&spec);
        for row in &mut p.structural {
            row[0] = 3.0;
        }
        p.delta_scale = vec![0.5, 0.5, 0.5];
        for m in &mut p.measurement {
            m.thresholds = [1.5, 2.5, 3.5, 4.5];
        }
        p.beta = spec
            .choice_attributes
            .iter()
            .map(|&a| {
                (
                    a,
                    match a {
                        Attribute::Price => -1.0,
                        Attribute::RebateUpfront => 0.2,
                        _ => 0.05,
                    },
                )
            })
            .collect();
        (spec, p)
    }

    #[test]
    fn deterministic_per_seed_and_valid() {
        let (spec, params) = spec_and_params();
        let design = random_design(&DesignSpec::survey_default(), 2).unwrap();
        let sampler = CovariateSampler::survey_marginals();
        let a = simulate_dataset(&design, &spec, &params, 40, &sampler, 77).unwrap();
        let b = simulate_dataset(&design, &spec, &params, 40, &sampler, 77).unwrap();
        assert_eq!(a, b);
        a.validate(&spec).unwrap();
        assert_eq!(a.individuals[0].tasks.len(), 8);
    }

    #[test]
    fn female_share_matches_marginals() {
        let (spec, params) = spec_and_params();
        let design = random_design(&DesignSpec::survey_default(), 2).unwrap();
        let sampler = CovariateSampler::survey_marginals();
        let ds = simulate_dataset(&design, &spec, &params, 3000, &sampler, 5).unwrap();
        let share = ds
            .individuals
            .iter()
            .map(|i| i.covariates.female)
            .sum::<f64>()
            / ds.individuals.len() as f64;
        assert!((share - 0.51).abs() < 0.03, "female share {share}");
    }

    #[test]
    fn extreme_utilities_make_choices_deterministic() {
        let (spec, mut params) = spec_and_params();
        params.delta_scale = vec![0.0, 0.0, 0.0];
        // price dominates every other term by construction
        for (attr, b) in &mut params.beta {
            *b = if *attr == Attribute::Price { 1e4 } else { 0.0 };
        }
        let design = random_design(&DesignSpec::survey_default(), 9).unwrap();
        let sampler = CovariateSampler::survey_marginals();
        let ds = simulate_dataset(&design, &spec, &params, 30, &sampler, 3).unwrap();
        let mut checked = 0;
        for ind in &ds.individuals {
            for task in &ind.tasks {
                // ties between equal prices are settled by noise; skip them
                if task.alt1.price == task.alt2.price {
                    continue;
                }
                let expected = if task.alt1.price > task.alt2.price {
                    Chosen::Alt1
                } else {
                    Chosen::Alt2
                };
                assert_eq!(task.chosen, expected);
                checked += 1;
            }
        }
        assert!(checked > 50);
    }

    #[test]
    fn multinomial_shares_match_known_probabilities() {
        // one task, fixed utilities chosen so P = (0.5, 0.3, 0.2)
        let spec = ModelSpec {
            latents: vec![],
            covariates: vec![],
            indicators: vec![],
            choice_attributes: vec![Attribute::Price, Attribute::SetupCost],
            interactions: vec![],
            estimate_asc: false,
        };
        let mut params = ParameterSet::zeros(&spec);
        let p = [0.5f64, 0.3, 0.2];
        // V3 = 0 fixed; choose V1, V2 to match
        let v1 = (p[0] / p[2]).ln();
        let v2 = (p[1] / p[2]).ln();
        params.beta = vec![(Attribute::Price, v1), (Attribute::SetupCost, v2)];
        let mut design = random_design(&DesignSpec::survey_default(), 1).unwrap();
        design.n_blocks = 1;
        design.tasks_per_respondent = 1;
        design.tasks.truncate(1);
        design.tasks[0].block = 0;
        let mut alt1 = crate::model::attributes::AlternativeAttributes::zeroed();
        alt1.price = 1.0;
        alt1.setup_cost = 0.0;
        let mut alt2 = crate::model::attributes::AlternativeAttributes::zeroed();
        alt2.price = 0.0;
        alt2.setup_cost = 1.0;
        design.tasks[0].alts = [alt1, alt2];
        let sampler = CovariateSampler::survey_marginals();
        let n = 100_000;
        let ds = simulate_dataset(&design, &spec, &params, n, &sampler, 123).unwrap();
        let mut counts = [0usize; 3];
        for ind in &ds.individuals {
            counts[ind.tasks[0].chosen.index()] += 1;
        }
        for (j, &expected) in p.iter().enumerate() {
            let share = counts[j] as f64 / n as f64;
            assert!((share - expected).abs() < 0.01, "alt {j}: {share} vs {expected}");
        }
    }
}
