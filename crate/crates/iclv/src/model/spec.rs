//! Declarative model specification: which covariates drive which latents,
//! which indicators measure them, which attributes enter the utility, and
//! the identification choices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::attributes::Attribute;
use crate::model::covariates::{CovariateVector, COVARIATE_NAMES};

/// One Likert indicator and the latent it loads on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSpec {
    pub label: String,
    /// Latent name; must appear in [`ModelSpec::latents`].
    pub latent: String,
    /// Identification: loading fixed to 1 instead of estimated.
    #[serde(default)]
    pub fix_loading: bool,
}

/// Latent × attribute interaction entering the systematic utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub latent: String,
    pub attribute: Attribute,
}

/// Declarative ICLV model layout.
///
/// `latents` may be empty, in which case the model collapses to a plain MNL
/// over `choice_attributes` (no indicators, no interactions, no draws).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Latent variable names, e.g. design / environment / safety.
    pub latents: Vec<String>,
    /// Covariate columns of the structural equations, by canonical name.
    /// The constant column is implicit and always first.
    pub covariates: Vec<String>,
    pub indicators: Vec<IndicatorSpec>,
    /// Attributes with a main-effect choice coefficient.
    pub choice_attributes: Vec<Attribute>,
    pub interactions: Vec<InteractionSpec>,
    /// Estimate a shared alternative-specific constant for the EV
    /// alternatives (opt-out stays normalized to 0). Default: fixed at 0.
    #[serde(default)]
    pub estimate_asc: bool,
}

impl ModelSpec {
    /// The paper's full specification: three latents, all 23 covariates,
    /// ten indicators (1-2 safety, 3-4 environment, 5-10 design), the ten
    /// significant choice attributes and the four latent interactions.
    pub fn paper_default() -> Self {
        let latents = ["design", "environment", "safety"];
        let alloc: [usize; 10] = [2, 2, 1, 1, 0, 0, 0, 0, 0, 0];
        let mut seen = [false; 3];
        let indicators = alloc
            .iter()
            .enumerate()
            .map(|(k, &l)| {
                let fix = !seen[l];
                seen[l] = true;
                IndicatorSpec {
                    label: format!("ind_{}", k + 1),
                    latent: latents[l].to_string(),
                    fix_loading: fix,
                }
            })
            .collect();
        ModelSpec {
            latents: latents.iter().map(|s| s.to_string()).collect(),
            covariates: COVARIATE_NAMES.iter().map(|s| s.to_string()).collect(),
            indicators,
            choice_attributes: vec![
                Attribute::Hatchback,
                Attribute::SmallSedan,
                Attribute::SmallSuv,
                Attribute::Price,
                Attribute::SetupCost,
                Attribute::OperatingCost,
                Attribute::RechargeTime,
                Attribute::RebateUpfront,
                Attribute::EnergyDiscount,
                Attribute::MarketUptake,
            ],
            interactions: vec![
                InteractionSpec {
                    latent: "design".into(),
                    attribute: Attribute::Price,
                },
                InteractionSpec {
                    latent: "environment".into(),
                    attribute: Attribute::RangeKm,
                },
                InteractionSpec {
                    latent: "safety".into(),
                    attribute: Attribute::LargeSuv,
                },
                InteractionSpec {
                    latent: "safety".into(),
                    attribute: Attribute::LargeSedan,
                },
            ],
            estimate_asc: false,
        }
    }

    pub fn n_latents(&self) -> usize {
        self.latents.len()
    }

    /// Structural covariate dimension including the constant column.
    pub fn n_structural_cols(&self) -> usize {
        1 + self.covariates.len()
    }

    pub fn latent_index(&self, name: &str) -> Result<usize> {
        self.latents
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::Config(format!("unknown latent `{name}`")))
    }

    /// Builds the structural regressor vector [1, covariates...] for one
    /// respondent. Errors name the first covariate that does not resolve.
    pub fn structural_regressors(&self, cov: &CovariateVector) -> Result<Vec<f64>> {
        let mut z = Vec::with_capacity(self.n_structural_cols());
        z.push(1.0);
        for name in &self.covariates {
            z.push(cov.value(name)?);
        }
        Ok(z)
    }

    /// Cross-checks internal references: latent names in indicators and
    /// interactions, covariate names, duplicate latents.
    pub fn validate(&self) -> Result<()> {
        for (i, l) in self.latents.iter().enumerate() {
            if self.latents[..i].contains(l) {
                return Err(Error::Config(format!("duplicate latent `{l}`")));
            }
        }
        for name in &self.covariates {
            if !COVARIATE_NAMES.contains(&name.as_str()) {
                return Err(Error::Config(format!("unknown covariate `{name}`")));
            }
        }
        for ind in &self.indicators {
            self.latent_index(&ind.latent)?;
        }
        for inter in &self.interactions {
            self.latent_index(&inter.latent)?;
        }
        if !self.latents.is_empty() {
            for (l, name) in self.latents.iter().enumerate() {
                let fixed = self
                    .indicators
                    .iter()
                    .filter(|ind| ind.latent == *name && ind.fix_loading)
                    .count();
                if self.indicators.iter().any(|ind| ind.latent == *name) && fixed != 1 {
                    return Err(Error::Config(format!(
                        "latent `{}` (index {l}) must fix exactly one loading to 1, found {fixed}",
                        name
                    )));
                }
            }
        } else if !self.indicators.is_empty() || !self.interactions.is_empty() {
            return Err(Error::Config(
                "indicators and interactions require at least one latent".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_default_is_valid() {
        let spec = ModelSpec::paper_default();
        spec.validate().unwrap();
        assert_eq!(spec.n_latents(), 3);
        assert_eq!(spec.n_structural_cols(), 24);
        assert_eq!(spec.indicators.len(), 10);
        // indicators 1-2 safety, 3-4 environment, 5-10 design
        assert_eq!(spec.indicators[0].latent, "safety");
        assert_eq!(spec.indicators[3].latent, "environment");
        assert_eq!(spec.indicators[9].latent, "design");
    }

    #[test]
    fn unresolved_interaction_latent_rejected() {
        let mut spec = ModelSpec::paper_default();
        spec.interactions[0].latent = "styling".into();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn regressors_start_with_constant() {
        let spec = ModelSpec::paper_default();
        let mut cov = CovariateVector::default();
        cov.set_age_years(50.0);
        cov.female = 1.0;
        let z = spec.structural_regressors(&cov).unwrap();
        assert_eq!(z.len(), 24);
        assert_eq!(z[0], 1.0);
        assert_eq!(z[1], 0.5);
        assert_eq!(z[4], 1.0);
    }
}
