//! Panel dataset of individuals, indicator responses and choice tasks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::attributes::AlternativeAttributes;
use crate::model::covariates::CovariateVector;
use crate::model::spec::ModelSpec;

/// Which option a respondent picked in a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Chosen {
    Alt1,
    Alt2,
    OptOut,
}

impl Chosen {
    pub fn as_str(self) -> &'static str {
        match self {
            Chosen::Alt1 => "alt1",
            Chosen::Alt2 => "alt2",
            Chosen::OptOut => "opt_out",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "alt1" => Ok(Chosen::Alt1),
            "alt2" => Ok(Chosen::Alt2),
            "opt_out" => Ok(Chosen::OptOut),
            other => Err(Error::Config(format!("unknown chosen value `{other}`"))),
        }
    }

    /// Index into the (alt1, alt2, opt-out) utility triple.
    pub fn index(self) -> usize {
        match self {
            Chosen::Alt1 => 0,
            Chosen::Alt2 => 1,
            Chosen::OptOut => 2,
        }
    }
}

/// One stated-preference task: two EV alternatives plus the implicit opt-out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceTask {
    pub alt1: AlternativeAttributes,
    pub alt2: AlternativeAttributes,
    pub chosen: Chosen,
}

/// One respondent: covariates, Likert responses and a panel of tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: u64,
    pub covariates: CovariateVector,
    /// One entry per spec indicator; `None` marks a missing response.
    pub indicators: Vec<Option<u8>>,
    pub tasks: Vec<ChoiceTask>,
}

/// Panel dataset. `tasks_per_individual` declares the panel length; the
/// survey design uses 8.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceDataset {
    pub tasks_per_individual: usize,
    pub individuals: Vec<Individual>,
}

impl ChoiceDataset {
    pub fn validate(&self, spec: &ModelSpec) -> Result<()> {
        if self.tasks_per_individual < 1 {
            return Err(Error::Config("panel length must be >= 1".into()));
        }
        for ind in &self.individuals {
            if ind.tasks.len() != self.tasks_per_individual {
                return Err(Error::Config(format!(
                    "individual {} has {} tasks, dataset declares {}",
                    ind.id,
                    ind.tasks.len(),
                    self.tasks_per_individual
                )));
            }
            if ind.indicators.len() != spec.indicators.len() {
                return Err(Error::Config(format!(
                    "individual {} has {} indicator responses, spec declares {}",
                    ind.id,
                    ind.indicators.len(),
                    spec.indicators.len()
                )));
            }
            for (k, resp) in ind.indicators.iter().enumerate() {
                if let Some(level) = resp {
                    if !(1..=5).contains(level) {
                        return Err(Error::Config(format!(
                            "individual {}: indicator {} response {} outside 1..=5",
                            ind.id,
                            k + 1,
                            level
                        )));
                    }
                }
            }
            for task in &ind.tasks {
                task.alt1.validate()?;
                task.alt2.validate()?;
            }
            ind.covariates.validate().map_err(|e| {
                Error::Config(format!("individual {}: {e}", ind.id))
            })?;
        }
        Ok(())
    }

    pub fn n_individuals(&self) -> usize {
        self.individuals.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::attributes::AlternativeAttributes;

    fn tiny_individual(id: u64, n_tasks: usize, n_ind: usize) -> Individual {
        let mut cov = CovariateVector::default();
        cov.set_age_years(40.0);
        let task = ChoiceTask {
            alt1: AlternativeAttributes::zeroed(),
            alt2: AlternativeAttributes::zeroed(),
            chosen: Chosen::OptOut,
        };
        Individual {
            id,
            covariates: cov,
            indicators: vec![Some(3); n_ind],
            tasks: vec![task; n_tasks],
        }
    }

    #[test]
    fn panel_length_mismatch_rejected() {
        let spec = ModelSpec::paper_default();
        let ds = ChoiceDataset {
            tasks_per_individual: 8,
            individuals: vec![tiny_individual(1, 7, 10)],
        };
        assert!(ds.validate(&spec).is_err());
    }

    #[test]
    fn valid_dataset_passes() {
        let spec = ModelSpec::paper_default();
        let ds = ChoiceDataset {
            tasks_per_individual: 8,
            individuals: vec![tiny_individual(1, 8, 10), tiny_individual(2, 8, 10)],
        };
        ds.validate(&spec).unwrap();
    }

    #[test]
    fn indicator_level_out_of_range_rejected() {
        let spec = ModelSpec::paper_default();
        let mut ind = tiny_individual(1, 8, 10);
        ind.indicators[3] = Some(6);
        let ds = ChoiceDataset {
            tasks_per_individual: 8,
            individuals: vec![ind],
        };
        assert!(ds.validate(&spec).is_err());
    }
}
