//! Free parameters of the ICLV model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::attributes::Attribute;
use crate::model::spec::ModelSpec;

/// Ordered-logit parameters of one Likert indicator.
///
/// Five response levels, four strictly increasing thresholds. There is no
/// separate intercept: threshold shifts absorb it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorParams {
    /// Index into the model's latent list.
    pub latent: usize,
    pub loading: f64,
    pub thresholds: [f64; 4],
}

impl IndicatorParams {
    pub fn validate(&self) -> Result<()> {
        for w in self.thresholds.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "thresholds must be strictly increasing, got {:?}",
                    self.thresholds
                )));
            }
        }
        if !self.loading.is_finite() {
            return Err(Error::InvalidParameter("non-finite loading".into()));
        }
        Ok(())
    }
}

/// Measurement block: one [`IndicatorParams`] per indicator, in the order of
/// [`ModelSpec::indicators`].
pub type MeasurementParams = Vec<IndicatorParams>;

/// Latent × attribute interaction coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    /// Index into the model's latent list.
    pub latent: usize,
    pub attribute: Attribute,
    pub coefficient: f64,
}

/// All free parameters: structural matrix, latent disturbance scales,
/// measurement loadings/thresholds and choice coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    /// Structural coefficients; `structural[l]` is the row for latent `l`
    /// over [constant, covariates...].
    pub structural: Vec<Vec<f64>>,
    /// Standard deviations of the latent disturbances, one per latent.
    pub delta_scale: Vec<f64>,
    pub measurement: MeasurementParams,
    /// Main-effect choice coefficients, keyed by attribute.
    pub beta: Vec<(Attribute, f64)>,
    pub interactions: Vec<Interaction>,
    /// Shared EV alternative-specific constant (opt-out normalized to 0).
    #[serde(default)]
    pub asc: f64,
}

impl ParameterSet {
    /// Zero starting point for a spec: zero structural matrix, unit scales,
    /// unit loadings, thresholds at the logistic quintiles, zero betas.
    pub fn zeros(spec: &ModelSpec) -> Self {
        let quintiles = [
            (0.2f64 / 0.8).ln(),
            (0.4f64 / 0.6).ln(),
            (0.6f64 / 0.4).ln(),
            (0.8f64 / 0.2).ln(),
        ];
        ParameterSet {
            structural: vec![vec![0.0; spec.n_structural_cols()]; spec.n_latents()],
            delta_scale: vec![1.0; spec.n_latents()],
            measurement: spec
                .indicators
                .iter()
                .map(|ind| IndicatorParams {
                    latent: spec.latent_index(&ind.latent).expect("validated spec"),
                    loading: 1.0,
                    thresholds: quintiles,
                })
                .collect(),
            beta: spec.choice_attributes.iter().map(|&a| (a, 0.0)).collect(),
            interactions: spec
                .interactions
                .iter()
                .map(|i| Interaction {
                    latent: spec.latent_index(&i.latent).expect("validated spec"),
                    attribute: i.attribute,
                    coefficient: 0.0,
                })
                .collect(),
            asc: 0.0,
        }
    }

    pub fn beta_for(&self, attribute: Attribute) -> Option<f64> {
        self.beta
            .iter()
            .find(|(a, _)| *a == attribute)
            .map(|(_, b)| *b)
    }

    /// Shape and validity checks against a spec: row/column counts, positive
    /// scales, threshold monotonicity, resolvable latent indices.
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        let n_lat = spec.n_latents();
        if self.structural.len() != n_lat {
            return Err(Error::Config(format!(
                "structural matrix has {} rows, spec declares {} latents",
                self.structural.len(),
                n_lat
            )));
        }
        for (l, row) in self.structural.iter().enumerate() {
            if row.len() != spec.n_structural_cols() {
                return Err(Error::Config(format!(
                    "structural row {l} has {} columns, expected {} \
                     (constant + {} covariates)",
                    row.len(),
                    spec.n_structural_cols(),
                    spec.covariates.len()
                )));
            }
        }
        if self.delta_scale.len() != n_lat {
            return Err(Error::Config(format!(
                "delta_scale has {} entries, expected {n_lat}",
                self.delta_scale.len()
            )));
        }
        for (l, s) in self.delta_scale.iter().enumerate() {
            if !(*s > 0.0) && !(*s == 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "delta_scale[{l}] must be >= 0, got {s}"
                )));
            }
        }
        if self.measurement.len() != spec.indicators.len() {
            return Err(Error::Config(format!(
                "measurement block has {} indicators, spec declares {}",
                self.measurement.len(),
                spec.indicators.len()
            )));
        }
        for (k, m) in self.measurement.iter().enumerate() {
            m.validate()?;
            if m.latent >= n_lat {
                return Err(Error::Config(format!(
                    "indicator {k} references latent index {} out of range",
                    m.latent
                )));
            }
        }
        // beta and interaction entries are positional against the spec
        if self.beta.len() != spec.choice_attributes.len()
            || self
                .beta
                .iter()
                .zip(&spec.choice_attributes)
                .any(|((a, _), s)| a != s)
        {
            return Err(Error::Config(format!(
                "beta attributes {:?} must match the spec's choice attributes {:?}",
                self.beta.iter().map(|(a, _)| a.as_str()).collect::<Vec<_>>(),
                spec.choice_attributes
                    .iter()
                    .map(|a| a.as_str())
                    .collect::<Vec<_>>()
            )));
        }
        if self.interactions.len() != spec.interactions.len() {
            return Err(Error::Config(format!(
                "parameter set has {} interactions, spec declares {}",
                self.interactions.len(),
                spec.interactions.len()
            )));
        }
        for (inter, ispec) in self.interactions.iter().zip(&spec.interactions) {
            if inter.latent >= n_lat {
                return Err(Error::Config(format!(
                    "interaction on `{}` references latent index {} out of range",
                    inter.attribute.as_str(),
                    inter.latent
                )));
            }
            let expected = spec.latent_index(&ispec.latent)?;
            if inter.latent != expected || inter.attribute != ispec.attribute {
                return Err(Error::Config(format!(
                    "interaction ({}, {}) does not match the spec's ({}, {})",
                    inter.latent,
                    inter.attribute.as_str(),
                    ispec.latent,
                    ispec.attribute.as_str()
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_matches_paper_spec_shape() {
        let spec = ModelSpec::paper_default();
        let p = ParameterSet::zeros(&spec);
        p.validate(&spec).unwrap();
        assert_eq!(p.structural.len(), 3);
        assert_eq!(p.structural[0].len(), 24);
        assert_eq!(p.measurement.len(), 10);
        assert_eq!(p.beta.len(), 10);
        assert_eq!(p.interactions.len(), 4);
    }

    #[test]
    fn quintile_thresholds_are_increasing() {
        let spec = ModelSpec::paper_default();
        let p = ParameterSet::zeros(&spec);
        for m in &p.measurement {
            m.validate().unwrap();
        }
    }

    #[test]
    fn non_monotone_thresholds_rejected() {
        let m = IndicatorParams {
            latent: 0,
            loading: 1.0,
            thresholds: [-1.0, 0.5, 0.5, 2.0],
        };
        assert!(m.validate().is_err());
    }
}
