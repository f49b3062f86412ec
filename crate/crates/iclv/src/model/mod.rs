//! Domain types and pure probability kernels of the ICLV model.

pub mod attributes;
pub mod covariates;
pub mod dataset;
pub mod kernels;
pub mod params;
pub mod spec;

pub use attributes::{AlternativeAttributes, Attribute, BodyType};
pub use covariates::{CovariateVector, COVARIATE_NAMES};
pub use dataset::{ChoiceDataset, ChoiceTask, Chosen, Individual};
pub use kernels::{
    choice_prob, draw_latents, indicator_prob, logistic, structural_mean, systematic_utility,
    LatentAttitudes,
};
pub use params::{IndicatorParams, Interaction, MeasurementParams, ParameterSet};
pub use spec::{IndicatorSpec, InteractionSpec, ModelSpec};
