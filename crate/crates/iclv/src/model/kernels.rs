//! Pure probability kernels of the ICLV model: structural latent means,
//! latent draws, ordered-logit indicator probabilities, systematic utilities
//! with latent interactions, and MNL choice probabilities.
//!
//! Everything here is a pure function of its inputs and safe to call
//! concurrently with shared read-only parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::attributes::AlternativeAttributes;
use crate::model::params::{IndicatorParams, ParameterSet};

/// Latent attitude values, ordered as the model's latent list.
///
/// For the default three-latent model the order is design, environment,
/// safety; the named accessors assume that ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentAttitudes(pub Vec<f64>);

impl LatentAttitudes {
    pub fn design(&self) -> f64 {
        self.0[0]
    }

    pub fn environment(&self) -> f64 {
        self.0[1]
    }

    pub fn safety(&self) -> f64 {
        self.0[2]
    }
}

impl std::ops::Deref for LatentAttitudes {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Standard logistic CDF.
#[inline]
pub fn logistic(x: f64) -> f64 {
    // Evaluate through exp(-|x|) so the argument of exp never overflows.
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Deterministic structural means: `A · z` with `z = [1, covariates...]`.
///
/// `z` must match the structural matrix columns (constant included).
pub fn structural_mean(params: &ParameterSet, z: &[f64]) -> Result<LatentAttitudes> {
    let mut out = Vec::with_capacity(params.structural.len());
    for (l, row) in params.structural.iter().enumerate() {
        if row.len() != z.len() {
            return Err(Error::Config(format!(
                "structural row {l} expects {} regressors, covariate vector supplies {} \
                 (is a covariate missing from the spec?)",
                row.len(),
                z.len()
            )));
        }
        out.push(row.iter().zip(z).map(|(a, zv)| a * zv).sum());
    }
    Ok(LatentAttitudes(out))
}

/// Applies disturbance draws to a structural mean: `mean + scale ⊙ draw`.
///
/// Each draw is a standard-normal vector of the latent dimension.
pub fn draw_latents(
    params: &ParameterSet,
    mean: &LatentAttitudes,
    draws: &[Vec<f64>],
) -> Result<Vec<LatentAttitudes>> {
    let n_lat = mean.len();
    if params.delta_scale.len() != n_lat {
        return Err(Error::Config(format!(
            "delta_scale has {} entries, latent dimension is {n_lat}",
            params.delta_scale.len()
        )));
    }
    draws
        .iter()
        .map(|d| {
            if d.len() != n_lat {
                return Err(Error::Config(format!(
                    "draw has dimension {}, latent dimension is {n_lat}",
                    d.len()
                )));
            }
            Ok(LatentAttitudes(
                (0..n_lat)
                    .map(|l| mean[l] + params.delta_scale[l] * d[l])
                    .collect(),
            ))
        })
        .collect()
}

/// Ordered-logit probability of one response level (1..=5) for indicator
/// parameters `meas` at latent signal `att`.
///
/// P(level j) = sigma(tau_j - gamma*att) - sigma(tau_{j-1} - gamma*att), with
/// tau_0 = -inf and tau_5 = +inf.
pub fn indicator_prob(meas: &IndicatorParams, att: &LatentAttitudes, level: u8) -> Result<f64> {
    meas.validate()?;
    if !(1..=5).contains(&level) {
        return Err(Error::Domain(format!("indicator level {level} outside 1..=5")));
    }
    let signal = meas.loading * att[meas.latent];
    Ok(ordered_logit_prob(&meas.thresholds, signal, level))
}

/// sigma(a) - sigma(b) for a >= b, evaluated without catastrophic
/// cancellation in the tails. A direct difference of two logistic CDFs
/// rounds to 0 once both arguments pass ~37, which would turn finite
/// log-probabilities into -inf.
#[inline]
fn logistic_diff(a: f64, b: f64) -> f64 {
    debug_assert!(a >= b);
    if b >= 0.0 {
        // both in the upper tail: (e^-b - e^-a) / ((1+e^-a)(1+e^-b))
        let ea = (-a).exp();
        let eb = (-b).exp();
        let gap = -(-(a - b)).exp_m1(); // 1 - e^-(a-b)
        eb * gap / ((1.0 + ea) * (1.0 + eb))
    } else if a <= 0.0 {
        // both in the lower tail: (e^a - e^b) / ((1+e^a)(1+e^b))
        let ea = a.exp();
        let eb = b.exp();
        let gap = -(b - a).exp_m1(); // 1 - e^(b-a)
        ea * gap / ((1.0 + ea) * (1.0 + eb))
    } else {
        logistic(a) - logistic(b)
    }
}

/// Ordered-logit level probability without parameter re-validation; the hot
/// path used by the likelihood once parameters have been checked.
#[inline]
pub fn ordered_logit_prob(thresholds: &[f64; 4], signal: f64, level: u8) -> f64 {
    match level {
        1 => logistic(thresholds[0] - signal),
        5 => logistic(signal - thresholds[3]),
        _ => {
            let hi = thresholds[(level - 1) as usize] - signal;
            let lo = thresholds[(level - 2) as usize] - signal;
            logistic_diff(hi, lo)
        }
    }
}

/// Systematic utility of an EV alternative (`Some(alt)`) or the opt-out
/// (`None`, normalized to 0).
///
/// V = sum beta_a x_a + sum c (att_l * x_a) + asc.
pub fn systematic_utility(
    params: &ParameterSet,
    alt: Option<&AlternativeAttributes>,
    att: &LatentAttitudes,
) -> Result<f64> {
    let Some(alt) = alt else {
        return Ok(0.0);
    };
    let mut v = params.asc;
    for &(attr, beta) in &params.beta {
        v += beta * alt.value(attr);
    }
    for inter in &params.interactions {
        if inter.latent >= att.len() {
            return Err(Error::Config(format!(
                "interaction on `{}` references latent index {} but only {} latents supplied",
                inter.attribute.as_str(),
                inter.latent,
                att.len()
            )));
        }
        v += inter.coefficient * att[inter.latent] * alt.value(inter.attribute);
    }
    Ok(v)
}

/// MNL choice probabilities over three alternatives with availability flags.
///
/// Softmax over the available alternatives with max-subtraction, so inputs
/// with |V| up to ~700 stay finite. Unavailable alternatives get probability
/// 0; the remaining probabilities sum to 1.
pub fn choice_prob(utilities: [f64; 3], availability: [bool; 3]) -> Result<[f64; 3]> {
    if !availability.iter().any(|&a| a) {
        return Err(Error::Domain(
            "choice_prob requires at least one available alternative".into(),
        ));
    }
    let max = utilities
        .iter()
        .zip(&availability)
        .filter(|(_, &a)| a)
        .map(|(&v, _)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut num = [0.0; 3];
    let mut denom = 0.0;
    for i in 0..3 {
        if availability[i] {
            num[i] = (utilities[i] - max).exp();
            denom += num[i];
        }
    }
    Ok([num[0] / denom, num[1] / denom, num[2] / denom])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::attributes::{Attribute, BodyType};
    use crate::model::params::Interaction;
    use crate::model::spec::ModelSpec;

    fn empty_params(n_lat: usize, n_cols: usize) -> ParameterSet {
        ParameterSet {
            structural: vec![vec![0.0; n_cols]; n_lat],
            delta_scale: vec![1.0; n_lat],
            measurement: vec![],
            beta: vec![],
            interactions: vec![],
            asc: 0.0,
        }
    }

    #[test]
    fn structural_mean_is_matrix_product() {
        let mut p = empty_params(2, 3);
        p.structural = vec![vec![1.0, 2.0, 0.0], vec![0.5, 0.0, -1.0]];
        let att = structural_mean(&p, &[1.0, 0.5, 2.0]).unwrap();
        assert_eq!(att.0, vec![2.0, -1.5]);
    }

    #[test]
    fn structural_mean_dimension_mismatch_names_problem() {
        let p = empty_params(1, 4);
        let err = structural_mean(&p, &[1.0, 2.0]).unwrap_err();
        assert!(err.to_string().contains("4 regressors"));
    }

    #[test]
    fn zero_draw_returns_mean() {
        let p = empty_params(3, 1);
        let mean = LatentAttitudes(vec![1.0, -2.0, 0.5]);
        let out = draw_latents(&p, &mean, &[vec![0.0, 0.0, 0.0]]).unwrap();
        assert_eq!(out[0].0, mean.0);
    }

    #[test]
    fn unit_scale_draw_is_identity_shift() {
        let p = empty_params(3, 1);
        let mean = LatentAttitudes(vec![0.0, 0.0, 0.0]);
        let out = draw_latents(&p, &mean, &[vec![1.0, -1.0, 2.0]]).unwrap();
        assert_eq!(out[0].0, vec![1.0, -1.0, 2.0]);
    }

    #[test]
    fn indicator_prob_symmetric_about_midpoint() {
        let m = IndicatorParams {
            latent: 0,
            loading: 1.0,
            thresholds: [-2.0, -1.0, 1.0, 2.0],
        };
        // gamma*att exactly at the midpoint of the symmetric thresholds
        let att = LatentAttitudes(vec![0.0]);
        let p2 = indicator_prob(&m, &att, 2).unwrap();
        let p4 = indicator_prob(&m, &att, 4).unwrap();
        let p1 = indicator_prob(&m, &att, 1).unwrap();
        let p5 = indicator_prob(&m, &att, 5).unwrap();
        assert!((p2 - p4).abs() < 1e-15);
        assert!((p1 - p5).abs() < 1e-15);
    }

    #[test]
    fn indicator_prob_direct_logistic_values() {
        let m = IndicatorParams {
            latent: 0,
            loading: 1.0,
            thresholds: [-1.0, 0.0, 1.0, 2.0],
        };
        let att = LatentAttitudes(vec![0.0]);
        let p1 = indicator_prob(&m, &att, 1).unwrap();
        let p2 = indicator_prob(&m, &att, 2).unwrap();
        assert!((p1 - logistic(-1.0)).abs() < 1e-15);
        assert!((p2 - (logistic(0.0) - logistic(-1.0))).abs() < 1e-15);
        assert!((p1 - 0.2689).abs() < 5e-4);
        assert!((p2 - 0.2311).abs() < 5e-4);
    }

    #[test]
    fn indicator_probs_sum_to_one() {
        let m = IndicatorParams {
            latent: 0,
            loading: 0.8,
            thresholds: [-0.3, 0.9, 2.4, 3.1],
        };
        let att = LatentAttitudes(vec![2.7]);
        let total: f64 = (1..=5)
            .map(|lvl| indicator_prob(&m, &att, lvl).unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_monotone_thresholds_rejected() {
        let m = IndicatorParams {
            latent: 0,
            loading: 1.0,
            thresholds: [1.0, 0.5, 2.0, 3.0],
        };
        let att = LatentAttitudes(vec![0.0]);
        assert!(matches!(
            indicator_prob(&m, &att, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn ordered_logit_stays_positive_deep_in_the_tails() {
        let thresholds = [-1.0, 0.0, 1.0, 2.0];
        for signal in [-499.0, -100.0, -40.0, 40.0, 100.0, 499.0] {
            let mut total = 0.0;
            for level in 1..=5u8 {
                let p = ordered_logit_prob(&thresholds, signal, level);
                assert!(p > 0.0, "level {level} at signal {signal} gave {p}");
                assert!(p.ln().is_finite());
                total += p;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_utility_is_zero() {
        let p = empty_params(3, 1);
        let alt = AlternativeAttributes::zeroed();
        let att = LatentAttitudes(vec![0.0, 0.0, 0.0]);
        assert_eq!(systematic_utility(&p, Some(&alt), &att).unwrap(), 0.0);
        assert_eq!(systematic_utility(&p, None, &att).unwrap(), 0.0);
    }

    #[test]
    fn price_contribution_with_design_interaction() {
        // price coefficient -7.98, design x price interaction 2.38,
        // design latent 3.12: net price contribution (-7.98 + 2.38*3.12) * 1.0
        let spec = ModelSpec::paper_default();
        let mut p = ParameterSet::zeros(&spec);
        p.beta = vec![(Attribute::Price, -7.98)];
        p.interactions = vec![Interaction {
            latent: 0,
            attribute: Attribute::Price,
            coefficient: 2.38,
        }];
        let mut alt = AlternativeAttributes::zeroed();
        alt.body_type = BodyType::LargeSedan;
        alt.price = 1.0;
        let att = LatentAttitudes(vec![3.12, 0.0, 0.0]);
        let v = systematic_utility(&p, Some(&alt), &att).unwrap();
        assert!((v - (-7.98 + 2.38 * 3.12)).abs() < 1e-12);
        assert!((v - (-0.5544)).abs() < 1e-10);
    }

    #[test]
    fn hatchback_dummy_alone() {
        let spec = ModelSpec::paper_default();
        let mut p = ParameterSet::zeros(&spec);
        p.beta = vec![(Attribute::Hatchback, 0.49)];
        let mut alt = AlternativeAttributes::zeroed();
        alt.body_type = BodyType::Hatchback;
        let att = LatentAttitudes(vec![0.0, 0.0, 0.0]);
        let v = systematic_utility(&p, Some(&alt), &att).unwrap();
        assert!((v - 0.49).abs() < 1e-15);
    }

    #[test]
    fn choice_prob_symmetric() {
        let p = choice_prob([0.0, 0.0, 0.0], [true, true, true]).unwrap();
        for pi in p {
            assert!((pi - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn choice_prob_two_alternative_logistic() {
        let p = choice_prob([1.0, 0.0, 0.0], [true, true, false]).unwrap();
        let e = std::f64::consts::E;
        assert!((p[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((p[1] - 1.0 / (e + 1.0)).abs() < 1e-15);
        assert_eq!(p[2], 0.0);
        assert!((p[0] - 0.7311).abs() < 1e-4);
    }

    #[test]
    fn choice_prob_no_overflow_at_extreme_utility() {
        let p = choice_prob([1000.0, 0.0, 0.0], [true, true, true]).unwrap();
        assert!(p.iter().all(|x| x.is_finite()));
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(p[1] < 1e-12 && p[2] < 1e-12);
    }

    #[test]
    fn choice_prob_all_unavailable_is_domain_error() {
        assert!(matches!(
            choice_prob([0.0, 0.0, 0.0], [false, false, false]),
            Err(Error::Domain(_))
        ));
    }
}
