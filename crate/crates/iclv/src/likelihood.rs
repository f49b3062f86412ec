//! Joint simulated log-likelihood of choices and indicator responses over
//! panel data.
//!
//! For individual n with latent draws att_r (one draw shared by all of the
//! panel's tasks) the simulated likelihood is
//!
//!   L_n = (1/R) sum_r [ prod_t P(chosen_t | att_r) * prod_k P(I_k | att_r) ]
//!
//! evaluated throughout in log space: per-draw log factors are summed and
//! combined with a log-sum-exp minus log R, so ten indicator factors times
//! eight choice factors cannot underflow.
//!
//! [`LikelihoodEvaluator`] precompiles the dataset (regressors, attribute
//! columns, draws) once, evaluates individuals in parallel and accumulates
//! the total in ascending id order, so serial and parallel runs agree bit
//! for bit. It can also cache the per-draw latent, measurement and choice
//! terms at a base point and re-evaluate single-block perturbations cheaply;
//! the finite-difference code in the estimation module leans on this.

use rayon::prelude::*;

use crate::draws::{generate_draws, DrawSettings};
use crate::error::{Error, Result};
use crate::model::dataset::ChoiceDataset;
use crate::model::kernels::ordered_logit_prob;
use crate::model::params::ParameterSet;
use crate::model::spec::ModelSpec;
use crate::model::Individual;

/// Which parameter block changed relative to the cached base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamBlock {
    /// Anything may have changed; recompute from scratch.
    Full,
    /// Only measurement loadings/thresholds changed.
    MeasurementOnly,
    /// Only choice coefficients (beta, interactions, asc) changed.
    ChoiceOnly,
}

impl ParamBlock {
    /// The block covering changes from both operands.
    pub fn join(self, other: ParamBlock) -> ParamBlock {
        if self == other {
            self
        } else {
            ParamBlock::Full
        }
    }
}

/// Total and per-individual log-likelihood values.
#[derive(Debug, Clone)]
pub struct LogLikelihood {
    pub total: f64,
    /// One entry per individual, in dataset order.
    pub per_individual: Vec<f64>,
}

struct PersonData {
    id: u64,
    /// Structural regressors [1, covariates...].
    z: Vec<f64>,
    /// Flat draws, row-major (n_draws x n_latents).
    draws: Vec<f64>,
    /// Observed indicator responses: (measurement index, level).
    indicators: Vec<(usize, u8)>,
    /// Per task: chosen index and, per EV alternative, the attribute values
    /// for the spec's beta columns then its interaction columns.
    tasks: Vec<TaskData>,
}

struct TaskData {
    chosen: usize,
    /// beta columns then interaction columns, for alt1 then alt2.
    columns: [Vec<f64>; 2],
}

#[derive(Default, Clone)]
struct PersonCache {
    /// Flat latents at the base point (n_draws x n_latents).
    att: Vec<f64>,
    /// Per-draw sum of log choice probabilities at the base point.
    choice: Vec<f64>,
    /// Per-draw sum of log indicator probabilities at the base point.
    measurement: Vec<f64>,
}

/// Precompiled likelihood evaluation context for one (spec, dataset, draws)
/// triple.
pub struct LikelihoodEvaluator {
    n_latents: usize,
    n_beta: usize,
    n_draws: usize,
    people: Vec<PersonData>,
    /// Individual evaluation order for the deterministic reduction
    /// (ascending id).
    reduce_order: Vec<usize>,
    caches: Vec<PersonCache>,
    has_base: bool,
}

impl LikelihoodEvaluator {
    pub fn new(
        spec: &ModelSpec,
        dataset: &ChoiceDataset,
        settings: &DrawSettings,
    ) -> Result<Self> {
        spec.validate()?;
        dataset.validate(spec)?;
        if dataset.individuals.is_empty() {
            return Err(Error::Config("dataset has no individuals".into()));
        }
        let n_latents = spec.n_latents();
        let people = dataset
            .individuals
            .iter()
            .map(|ind| PersonData::compile(spec, ind, settings, n_latents))
            .collect::<Result<Vec<_>>>()?;
        let mut reduce_order: Vec<usize> = (0..people.len()).collect();
        reduce_order.sort_by_key(|&i| people[i].id);
        for w in reduce_order.windows(2) {
            if people[w[0]].id == people[w[1]].id {
                return Err(Error::Config(format!(
                    "duplicate individual id {}",
                    people[w[0]].id
                )));
            }
        }
        let n = people.len();
        Ok(LikelihoodEvaluator {
            n_latents,
            n_beta: spec.choice_attributes.len(),
            n_draws: if n_latents == 0 { 1 } else { settings.n_draws },
            people,
            reduce_order,
            caches: vec![PersonCache::default(); n],
            has_base: false,
        })
    }

    pub fn n_individuals(&self) -> usize {
        self.people.len()
    }

    /// Full log-likelihood at `params`. Parallel across individuals; the
    /// total is reduced in ascending id order regardless of worker count.
    pub fn log_likelihood(&self, params: &ParameterSet) -> Result<LogLikelihood> {
        let per: Vec<Result<f64>> = self
            .people
            .par_iter()
            .map(|p| self.person_loglik(params, p, ParamBlock::Full, None))
            .collect();
        self.reduce(per)
    }

    /// Full evaluation that also records per-person draw-level terms so
    /// subsequent [`Self::log_likelihood_perturbed`] calls can reuse them.
    pub fn refresh_base(&mut self, params: &ParameterSet) -> Result<LogLikelihood> {
        let results: Vec<Result<(f64, PersonCache)>> = self
            .people
            .par_iter()
            .map(|p| {
                let mut cache = PersonCache::default();
                let ll = self.person_loglik(params, p, ParamBlock::Full, Some(&mut cache))?;
                Ok((ll, cache))
            })
            .collect();
        let mut per = Vec::with_capacity(results.len());
        let mut caches = Vec::with_capacity(results.len());
        for r in results {
            let (ll, cache) = r?;
            per.push(Ok(ll));
            caches.push(cache);
        }
        self.caches = caches;
        self.has_base = true;
        self.reduce(per)
    }

    /// Log-likelihood of a perturbation of the base point. `block` declares
    /// which parameter block differs from the base; unchanged per-draw terms
    /// are taken from the cache, making measurement-only and choice-only
    /// probes substantially cheaper than full evaluations. Results are bit
    /// identical to a full evaluation at the same point.
    pub fn log_likelihood_perturbed(
        &self,
        params: &ParameterSet,
        block: ParamBlock,
    ) -> Result<f64> {
        if block == ParamBlock::Full || !self.has_base {
            return Ok(self.log_likelihood(params)?.total);
        }
        let per: Vec<Result<f64>> = self
            .people
            .par_iter()
            .zip(self.caches.par_iter())
            .map(|(p, cache)| self.person_loglik_cached(params, p, cache, block))
            .collect();
        Ok(self.reduce(per)?.total)
    }

    fn reduce(&self, per: Vec<Result<f64>>) -> Result<LogLikelihood> {
        let mut values = Vec::with_capacity(per.len());
        for (i, r) in per.into_iter().enumerate() {
            match r {
                Ok(v) => values.push(v),
                Err(e) => {
                    return Err(Error::NonFinite(format!(
                        "individual {}: {e}",
                        self.people[i].id
                    )))
                }
            }
        }
        let mut total = 0.0;
        for &i in &self.reduce_order {
            total += values[i];
        }
        Ok(LogLikelihood {
            total,
            per_individual: values,
        })
    }

    /// Per-draw latents at `params` for one person, flat (r x L).
    fn latents_for(&self, params: &ParameterSet, person: &PersonData) -> Vec<f64> {
        let n_lat = self.n_latents;
        let mut mean = vec![0.0; n_lat];
        for l in 0..n_lat {
            mean[l] = params.structural[l]
                .iter()
                .zip(&person.z)
                .map(|(a, z)| a * z)
                .sum();
        }
        let mut att = vec![0.0; self.n_draws * n_lat];
        for r in 0..self.n_draws {
            for l in 0..n_lat {
                att[r * n_lat + l] = mean[l] + params.delta_scale[l] * person.draws[r * n_lat + l];
            }
        }
        att
    }

    /// Per-draw sum of log indicator probabilities.
    fn measurement_terms(&self, params: &ParameterSet, person: &PersonData, att: &[f64]) -> Vec<f64> {
        let n_lat = self.n_latents;
        let mut m = vec![0.0; self.n_draws];
        for r in 0..self.n_draws {
            // Probabilities are multiplied and logged once, flushing the
            // partial product before it can underflow.
            let mut prod = 1.0;
            let mut acc = 0.0;
            for &(k, level) in &person.indicators {
                let meas = &params.measurement[k];
                let signal = meas.loading * att[r * n_lat + meas.latent];
                prod *= ordered_logit_prob(&meas.thresholds, signal, level);
                if prod < 1e-280 {
                    acc += prod.ln();
                    prod = 1.0;
                }
            }
            m[r] = acc + prod.ln();
        }
        m
    }

    /// Per-draw sum of log choice probabilities over the person's tasks.
    fn choice_terms(&self, params: &ParameterSet, person: &PersonData, att: &[f64]) -> Vec<f64> {
        let n_lat = self.n_latents;
        let n_beta = self.n_beta;
        let mut c = vec![0.0; self.n_draws];
        // Per task and EV alternative: draw-independent base utility and the
        // per-latent interaction weights.
        let mut bases = Vec::with_capacity(person.tasks.len());
        for task in &person.tasks {
            let mut pair = [(0.0, [0.0; 8]), (0.0, [0.0; 8])];
            for (a, cols) in task.columns.iter().enumerate() {
                let mut base = params.asc;
                for (b, &(_, beta)) in params.beta.iter().enumerate() {
                    base += beta * cols[b];
                }
                let mut w = [0.0f64; 8];
                for (i, inter) in params.interactions.iter().enumerate() {
                    w[inter.latent] += inter.coefficient * cols[n_beta + i];
                }
                pair[a] = (base, w);
            }
            bases.push(pair);
        }
        for r in 0..self.n_draws {
            let att_r = &att[r * n_lat..(r + 1) * n_lat];
            // Per-task softmax denominators are in [1, 3] after
            // max-subtraction, so short runs of them are multiplied and
            // logged once per chunk instead of once per task.
            let mut sum = 0.0;
            let mut denom_prod = 1.0;
            let mut chunk = 0u32;
            for (task, pair) in person.tasks.iter().zip(&bases) {
                let mut v = [0.0f64; 3];
                for a in 0..2 {
                    let (base, w) = &pair[a];
                    let mut u = *base;
                    for l in 0..n_lat {
                        u += w[l] * att_r[l];
                    }
                    v[a] = u;
                }
                let max = v[0].max(v[1]).max(v[2]);
                let mut denom = 0.0;
                for vi in v {
                    let d = vi - max;
                    denom += if d == 0.0 { 1.0 } else { d.exp() };
                }
                sum += v[task.chosen] - max;
                denom_prod *= denom;
                chunk += 1;
                if chunk == 32 {
                    sum -= denom_prod.ln();
                    denom_prod = 1.0;
                    chunk = 0;
                }
            }
            c[r] = sum - denom_prod.ln();
        }
        c
    }

    fn person_loglik(
        &self,
        params: &ParameterSet,
        person: &PersonData,
        _block: ParamBlock,
        cache_out: Option<&mut PersonCache>,
    ) -> Result<f64> {
        let att = self.latents_for(params, person);
        let m = self.measurement_terms(params, person, &att);
        let c = self.choice_terms(params, person, &att);
        let ll = combine_terms(&c, &m, self.n_draws);
        if let Some(cache) = cache_out {
            cache.att = att;
            cache.choice = c;
            cache.measurement = m;
        }
        if !ll.is_finite() {
            return Err(Error::NonFinite("log-likelihood is not finite".into()));
        }
        Ok(ll)
    }

    fn person_loglik_cached(
        &self,
        params: &ParameterSet,
        person: &PersonData,
        cache: &PersonCache,
        block: ParamBlock,
    ) -> Result<f64> {
        let ll = match block {
            ParamBlock::MeasurementOnly => {
                let m = self.measurement_terms(params, person, &cache.att);
                combine_terms(&cache.choice, &m, self.n_draws)
            }
            ParamBlock::ChoiceOnly => {
                let c = self.choice_terms(params, person, &cache.att);
                combine_terms(&c, &cache.measurement, self.n_draws)
            }
            ParamBlock::Full => unreachable!("full evaluations do not use the cache"),
        };
        if !ll.is_finite() {
            return Err(Error::NonFinite("log-likelihood is not finite".into()));
        }
        Ok(ll)
    }
}

/// log( (1/R) sum_r exp(c_r + m_r) ) via log-sum-exp.
fn combine_terms(c: &[f64], m: &[f64], n_draws: usize) -> f64 {
    debug_assert_eq!(c.len(), n_draws);
    let mut max = f64::NEG_INFINITY;
    for r in 0..n_draws {
        let s = c[r] + m[r];
        if s > max {
            max = s;
        }
    }
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut sum = 0.0;
    for r in 0..n_draws {
        sum += (c[r] + m[r] - max).exp();
    }
    max + sum.ln() - (n_draws as f64).ln()
}

impl PersonData {
    fn compile(
        spec: &ModelSpec,
        ind: &Individual,
        settings: &DrawSettings,
        n_latents: usize,
    ) -> Result<PersonData> {
        let z = spec.structural_regressors(&ind.covariates)?;
        let draws = if n_latents == 0 {
            Vec::new()
        } else {
            let nested = generate_draws(settings, ind.id, n_latents)?;
            let mut flat = Vec::with_capacity(nested.len() * n_latents);
            for d in nested {
                flat.extend_from_slice(&d);
            }
            flat
        };
        let indicators = ind
            .indicators
            .iter()
            .enumerate()
            .filter_map(|(k, resp)| resp.map(|level| (k, level)))
            .collect();
        let tasks = ind
            .tasks
            .iter()
            .map(|task| {
                let columns = [&task.alt1, &task.alt2].map(|alt| {
                    let mut cols =
                        Vec::with_capacity(spec.choice_attributes.len() + spec.interactions.len());
                    for &a in &spec.choice_attributes {
                        cols.push(alt.value(a));
                    }
                    for inter in &spec.interactions {
                        cols.push(alt.value(inter.attribute));
                    }
                    cols
                });
                TaskData {
                    chosen: task.chosen.index(),
                    columns,
                }
            })
            .collect();
        Ok(PersonData {
            id: ind.id,
            z,
            draws,
            indicators,
            tasks,
        })
    }
}

/// Simulated log-likelihood of a single individual with explicit draws.
///
/// Same math as the batch evaluator: all tasks share each latent draw, and
/// the per-draw products are combined in log space.
pub fn individual_log_likelihood(
    spec: &ModelSpec,
    params: &ParameterSet,
    individual: &Individual,
    draws: &[Vec<f64>],
) -> Result<f64> {
    if individual.tasks.is_empty() {
        return Err(Error::Config("individual has no tasks".into()));
    }
    if draws.is_empty() && spec.n_latents() > 0 {
        return Err(Error::Config("draws must be nonempty".into()));
    }
    params.validate(spec)?;
    let dataset = ChoiceDataset {
        tasks_per_individual: individual.tasks.len(),
        individuals: vec![individual.clone()],
    };
    // Compile through the evaluator machinery, then substitute the caller's
    // draws so both paths share one implementation.
    let settings = DrawSettings {
        n_draws: draws.len().max(1),
        ..DrawSettings::default()
    };
    let mut ev = LikelihoodEvaluator::new(spec, &dataset, &settings)?;
    if spec.n_latents() > 0 {
        let n_lat = spec.n_latents();
        let mut flat = Vec::with_capacity(draws.len() * n_lat);
        for d in draws {
            if d.len() != n_lat {
                return Err(Error::Config(format!(
                    "draw dimension {} does not match {} latents",
                    d.len(),
                    n_lat
                )));
            }
            flat.extend_from_slice(d);
        }
        ev.people[0].draws = flat;
        ev.n_draws = draws.len();
    }
    Ok(ev.log_likelihood(params)?.per_individual[0])
}

/// Joint simulated log-likelihood of the whole panel.
pub fn log_likelihood(
    spec: &ModelSpec,
    params: &ParameterSet,
    dataset: &ChoiceDataset,
    settings: &DrawSettings,
) -> Result<LogLikelihood> {
    params.validate(spec)?;
    LikelihoodEvaluator::new(spec, dataset, settings)?.log_likelihood(params)
}

/// Log-likelihood of the equal-probability null model: 1/3 per choice task
/// and 1/5 per observed indicator response.
pub fn null_log_likelihood(dataset: &ChoiceDataset) -> f64 {
    let ln_third = (1.0f64 / 3.0).ln();
    let ln_fifth = (1.0f64 / 5.0).ln();
    dataset
        .individuals
        .iter()
        .map(|ind| {
            let k_obs = ind.indicators.iter().filter(|r| r.is_some()).count();
            ind.tasks.len() as f64 * ln_third + k_obs as f64 * ln_fifth
        })
        .sum()
}

/// McFadden-style pseudo R-squared against the null model.
pub fn rho_square(ll: f64, ll0: f64) -> f64 {
    1.0 - ll / ll0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::attributes::{AlternativeAttributes, Attribute, BodyType};
    use crate::model::covariates::CovariateVector;
    use crate::model::dataset::{ChoiceTask, Chosen};
    use crate::model::params::ParameterSet;

    fn compact_spec() -> ModelSpec {
        let mut spec = ModelSpec::paper_default();
        spec.covariates = vec!["age".into(), "female".into()];
        spec.indicators.truncate(6);
        // reallocate: 2 safety, 2 environment, 2 design
        for (k, ind) in spec.indicators.iter_mut().enumerate() {
            ind.latent = ["safety", "safety", "environment", "environment", "design", "design"]
                [k]
                .to_string();
            ind.fix_loading = k % 2 == 0;
        }
        spec
    }

    fn person(id: u64, n_tasks: usize, spec: &ModelSpec) -> Individual {
        let mut cov = CovariateVector::default();
        cov.set_age_years(40.0 + id as f64);
        cov.female = (id % 2) as f64;
        let mut alt1 = AlternativeAttributes::zeroed();
        alt1.body_type = BodyType::Hatchback;
        alt1.price = 0.5;
        alt1.range_km = 3.0;
        let mut alt2 = AlternativeAttributes::zeroed();
        alt2.body_type = BodyType::LargeSedan;
        alt2.price = 0.9;
        alt2.range_km = 4.5;
        let chosen = [Chosen::Alt1, Chosen::Alt2, Chosen::OptOut][(id % 3) as usize];
        Individual {
            id,
            covariates: cov,
            indicators: (0..spec.indicators.len())
                .map(|k| if k == 3 { None } else { Some(1 + ((id as usize + k) % 5) as u8) })
                .collect(),
            tasks: vec![
                ChoiceTask {
                    alt1: alt1.clone(),
                    alt2: alt2.clone(),
                    chosen,
                };
                n_tasks
            ],
        }
    }

    fn plausible_params(spec: &ModelSpec) -> ParameterSet {
        let mut p = ParameterSet::zeros(spec);
        for (l, row) in p.structural.iter_mut().enumerate() {
            row[0] = 2.0 + 0.5 * l as f64;
            row[1] = -1.0;
            row[2] = 0.4;
        }
        p.delta_scale = vec![0.6, 0.5, 0.7];
        for (k, m) in p.measurement.iter_mut().enumerate() {
            m.loading = if spec.indicators[k].fix_loading { 1.0 } else { 0.8 };
            m.thresholds = [0.5, 1.5, 2.5, 3.5];
        }
        p.beta[0].1 = 0.4; // hatchback
        p.beta[3].1 = -0.9; // price
        p.interactions[0].coefficient = 0.2;
        p.interactions[1].coefficient = 0.05;
        p.interactions[2].coefficient = 0.1;
        p.interactions[3].coefficient = 0.08;
        p
    }

    #[test]
    fn symmetric_latent_free_case_is_one_third() {
        // one task, no indicators, all utilities equal -> exactly 1/3
        let mut spec = compact_spec();
        spec.indicators.clear();
        spec.interactions.clear();
        spec.choice_attributes.clear();
        let params = ParameterSet::zeros(&spec);
        let mut ind = person(1, 1, &spec);
        ind.indicators.clear();
        let draws = generate_draws(&DrawSettings::default(), 1, 3).unwrap();
        let ll = individual_log_likelihood(&spec, &params, &ind, &draws).unwrap();
        assert!((ll - (1.0f64 / 3.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_scale_equals_deterministic_product() {
        let spec = compact_spec();
        let mut params = plausible_params(&spec);
        params.delta_scale = vec![0.0, 0.0, 0.0];
        let ind = person(2, 4, &spec);
        let draws = generate_draws(&DrawSettings { n_draws: 33, ..Default::default() }, 2, 3).unwrap();
        let ll = individual_log_likelihood(&spec, &params, &ind, &draws).unwrap();

        // analytic product at the structural mean
        let z = spec.structural_regressors(&ind.covariates).unwrap();
        let mean = crate::model::kernels::structural_mean(&params, &z).unwrap();
        let mut expected = 0.0;
        for (k, resp) in ind.indicators.iter().enumerate() {
            if let Some(level) = resp {
                expected += crate::model::kernels::indicator_prob(&params.measurement[k], &mean, *level)
                    .unwrap()
                    .ln();
            }
        }
        for task in &ind.tasks {
            let v1 = crate::model::kernels::systematic_utility(&params, Some(&task.alt1), &mean).unwrap();
            let v2 = crate::model::kernels::systematic_utility(&params, Some(&task.alt2), &mean).unwrap();
            let probs = crate::model::kernels::choice_prob([v1, v2, 0.0], [true; 3]).unwrap();
            expected += probs[task.chosen.index()].ln();
        }
        assert!((ll - expected).abs() < 1e-10, "{ll} vs {expected}");
    }

    #[test]
    fn task_order_does_not_change_likelihood() {
        let spec = compact_spec();
        let params = plausible_params(&spec);
        let mut ind = person(3, 5, &spec);
        ind.tasks[0].chosen = Chosen::Alt1;
        ind.tasks[1].chosen = Chosen::OptOut;
        ind.tasks[2].chosen = Chosen::Alt2;
        let draws = generate_draws(&DrawSettings { n_draws: 64, ..Default::default() }, 3, 3).unwrap();
        let a = individual_log_likelihood(&spec, &params, &ind, &draws).unwrap();
        ind.tasks.reverse();
        let b = individual_log_likelihood(&spec, &params, &ind, &draws).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn total_is_sum_and_doubles_with_duplication() {
        let spec = compact_spec();
        let params = plausible_params(&spec);
        let settings = DrawSettings { n_draws: 16, ..Default::default() };
        let one = ChoiceDataset {
            tasks_per_individual: 3,
            individuals: vec![person(7, 3, &spec)],
        };
        let ll1 = log_likelihood(&spec, &params, &one, &settings).unwrap();
        assert_eq!(ll1.total, ll1.per_individual[0]);

        // duplicating every individual doubles the total exactly (the clone
        // keeps the same id-derived draws via a distinct id with identical
        // data? no: same data, new id -> same draws only if ids map to same
        // segment). Use two copies with the same id rejected; instead check
        // additivity across disjoint individuals.
        let two = ChoiceDataset {
            tasks_per_individual: 3,
            individuals: vec![person(7, 3, &spec), person(9, 3, &spec)],
        };
        let ll2 = log_likelihood(&spec, &params, &two, &settings).unwrap();
        assert!((ll2.total - (ll2.per_individual[0] + ll2.per_individual[1])).abs() == 0.0);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let spec = compact_spec();
        let settings = DrawSettings::default();
        let ds = ChoiceDataset {
            tasks_per_individual: 3,
            individuals: vec![person(7, 3, &spec), person(7, 3, &spec)],
        };
        assert!(LikelihoodEvaluator::new(&spec, &ds, &settings).is_err());
    }

    #[test]
    fn serial_and_parallel_totals_bit_equal() {
        let spec = compact_spec();
        let params = plausible_params(&spec);
        let settings = DrawSettings { n_draws: 32, ..Default::default() };
        let ds = ChoiceDataset {
            tasks_per_individual: 4,
            individuals: (0..50).map(|i| person(i, 4, &spec)).collect(),
        };
        let parallel = log_likelihood(&spec, &params, &ds, &settings).unwrap();
        let serial_pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let serial = serial_pool
            .install(|| log_likelihood(&spec, &params, &ds, &settings))
            .unwrap();
        assert_eq!(parallel.total.to_bits(), serial.total.to_bits());
        for (a, b) in parallel
            .per_individual
            .iter()
            .zip(&serial.per_individual)
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn perturbed_block_evaluation_matches_full() {
        let spec = compact_spec();
        let params = plausible_params(&spec);
        let settings = DrawSettings { n_draws: 16, ..Default::default() };
        let ds = ChoiceDataset {
            tasks_per_individual: 3,
            individuals: (0..8).map(|i| person(i, 3, &spec)).collect(),
        };
        let mut ev = LikelihoodEvaluator::new(&spec, &ds, &settings).unwrap();
        ev.refresh_base(&params).unwrap();

        let mut meas_shift = params.clone();
        meas_shift.measurement[1].loading += 1e-3;
        let fast = ev
            .log_likelihood_perturbed(&meas_shift, ParamBlock::MeasurementOnly)
            .unwrap();
        let slow = ev.log_likelihood(&meas_shift).unwrap().total;
        assert_eq!(fast.to_bits(), slow.to_bits());

        let mut beta_shift = params.clone();
        beta_shift.beta[1].1 += 1e-3;
        let fast = ev
            .log_likelihood_perturbed(&beta_shift, ParamBlock::ChoiceOnly)
            .unwrap();
        let slow = ev.log_likelihood(&beta_shift).unwrap().total;
        assert_eq!(fast.to_bits(), slow.to_bits());
    }

    #[test]
    fn null_ll_closed_form() {
        let spec = ModelSpec::paper_default();
        let mut ind = person(1, 8, &compact_spec());
        ind.indicators = vec![Some(3); 10];
        let ds = ChoiceDataset {
            tasks_per_individual: 8,
            individuals: vec![ind],
        };
        let ll0 = null_log_likelihood(&ds);
        let expected = 8.0 * (1.0f64 / 3.0).ln() + 10.0 * (1.0f64 / 5.0).ln();
        assert!((ll0 - expected).abs() < 1e-12);
        let _ = spec;
    }

    #[test]
    fn null_ll_without_indicators() {
        let mut ind = person(1, 8, &compact_spec());
        ind.indicators = vec![None; 6];
        let ds = ChoiceDataset {
            tasks_per_individual: 8,
            individuals: vec![ind],
        };
        let expected = 8.0 * (1.0f64 / 3.0).ln();
        assert!((null_log_likelihood(&ds) - expected).abs() < 1e-12);
    }

    #[test]
    fn rho_square_zero_at_null() {
        assert_eq!(rho_square(-100.0, -100.0), 0.0);
    }
}
