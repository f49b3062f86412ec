//! Maximum simulated likelihood estimation with identification constraints,
//! numerical gradients, quasi-Newton ascent and inverse-Hessian standard
//! errors.

pub mod bfgs;
pub mod gradient;
pub mod param_map;

use std::cell::RefCell;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::draws::DrawSettings;
use crate::error::{Error, Result};
use crate::likelihood::{null_log_likelihood, rho_square, LikelihoodEvaluator, ParamBlock};
use crate::model::dataset::ChoiceDataset;
use crate::model::params::{IndicatorParams, ParameterSet};
use crate::model::spec::ModelSpec;

pub use gradient::{numerical_gradient, numerical_hessian};
pub use param_map::FreeParameterMap;

/// Relative step for the second-difference Hessian.
const HESSIAN_REL_STEP: f64 = 1e-4;

/// Where the optimizer starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "params")]
pub enum StartingValues {
    /// Zero coefficients, unit loadings and scales, thresholds at the
    /// logistic quintiles.
    ZerosWithUnitScales,
    UserSupplied(Box<ParameterSet>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationSettings {
    pub max_iterations: usize,
    /// Relative central-difference step for the gradient.
    pub gradient_step: f64,
    /// Gradient max-norm threshold declaring convergence.
    pub convergence_tol: f64,
    pub draw_settings: DrawSettings,
    pub starting_values: StartingValues,
}

impl Default for EstimationSettings {
    fn default() -> Self {
        EstimationSettings {
            max_iterations: 500,
            gradient_step: 1e-5,
            convergence_tol: 1e-4,
            draw_settings: DrawSettings::default(),
            starting_values: StartingValues::ZerosWithUnitScales,
        }
    }
}

impl EstimationSettings {
    fn validate(&self) -> Result<()> {
        if !(self.gradient_step > 0.0) || !(self.convergence_tol > 0.0) {
            return Err(Error::Config(
                "gradient_step and convergence_tol must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// One accepted optimizer iterate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub log_likelihood: f64,
    pub gradient_max_norm: f64,
    pub step_size: f64,
    /// Smallest threshold gap across indicators at this iterate; positive by
    /// construction of the reparameterization.
    pub min_threshold_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimationResult {
    pub params: ParameterSet,
    /// Standard errors in the same shape as `params` (0 for fixed entries);
    /// `None` when the Hessian was singular or not negative definite.
    pub std_errors: Option<ParameterSet>,
    /// estimate / std_error where the standard error is positive.
    pub t_stats: Option<ParameterSet>,
    pub final_ll: f64,
    pub null_ll: f64,
    pub rho_square: f64,
    pub iterations: usize,
    pub converged: bool,
    pub settings: EstimationSettings,
    /// Natural-space names of the free coordinates.
    pub free_names: Vec<String>,
    /// Natural-space estimates aligned with `free_names`.
    pub free_estimates: Vec<f64>,
    /// Natural-space standard errors aligned with `free_names`.
    pub free_std_errors: Option<Vec<f64>>,
    pub trace: Vec<TraceRecord>,
}

/// An all-zero container with the shape of a parameter set, used to scatter
/// standard errors and t-statistics.
fn zeroed_like(spec: &ModelSpec) -> ParameterSet {
    let mut p = ParameterSet::zeros(spec);
    for row in &mut p.structural {
        row.iter_mut().for_each(|v| *v = 0.0);
    }
    p.delta_scale.iter_mut().for_each(|v| *v = 0.0);
    for m in &mut p.measurement {
        *m = IndicatorParams {
            latent: m.latent,
            loading: 0.0,
            thresholds: [0.0; 4],
        };
    }
    p
}

/// Writes `values[k]` into the parameter-set slot of free coordinate `k`.
fn scatter(map: &FreeParameterMap, spec: &ModelSpec, values: &[f64]) -> ParameterSet {
    let mut out = zeroed_like(spec);
    map.scatter_natural(values, &mut out);
    out
}

/// Maximum simulated likelihood estimation of `spec` on `dataset`.
pub fn estimate(
    dataset: &ChoiceDataset,
    spec: &ModelSpec,
    settings: &EstimationSettings,
) -> Result<EstimationResult> {
    settings.validate()?;
    let map = FreeParameterMap::new(spec)?;
    let start_params = match &settings.starting_values {
        StartingValues::ZerosWithUnitScales => ParameterSet::zeros(spec),
        StartingValues::UserSupplied(p) => {
            p.validate(spec)?;
            (**p).clone()
        }
    };
    let v0 = map.pack(&start_params)?;
    let evaluator = RefCell::new(LikelihoodEvaluator::new(
        spec,
        dataset,
        &settings.draw_settings,
    )?);

    let gap_log = RefCell::new(Vec::<f64>::new());
    let min_gap = |p: &ParameterSet| {
        p.measurement
            .iter()
            .flat_map(|m| m.thresholds.windows(2).map(|w| w[1] - w[0]).collect::<Vec<_>>())
            .fold(f64::INFINITY, f64::min)
    };

    let fg = |v: &[f64]| -> Result<(f64, Vec<f64>)> {
        let params = map.unpack(v)?;
        gap_log.borrow_mut().push(min_gap(&params));
        let base = evaluator.borrow_mut().refresh_base(&params)?;
        let mut grad = vec![0.0; v.len()];
        let mut probe = v.to_vec();
        let ev = evaluator.borrow();
        for i in 0..v.len() {
            let h = gradient::fd_step(v[i], settings.gradient_step);
            let block = map.block(i);
            probe[i] = v[i] + h;
            let fp = ev.log_likelihood_perturbed(&map.unpack(&probe)?, block)?;
            probe[i] = v[i] - h;
            let fm = ev.log_likelihood_perturbed(&map.unpack(&probe)?, block)?;
            probe[i] = v[i];
            if !fp.is_finite() || !fm.is_finite() {
                return Err(Error::NonFinite(format!(
                    "objective not finite when perturbing `{}`",
                    map.names()[i]
                )));
            }
            grad[i] = (fp - fm) / (2.0 * h);
        }
        Ok((base.total, grad))
    };
    let f_only = |v: &[f64]| -> Result<f64> {
        let params = map.unpack(v)?;
        Ok(evaluator.borrow().log_likelihood(&params)?.total)
    };

    let outcome = bfgs::maximize(
        fg,
        f_only,
        v0,
        settings.convergence_tol,
        settings.max_iterations,
    )?;

    let params = map.unpack(&outcome.point)?;
    let final_ll = outcome.objective;
    let null_ll = null_log_likelihood(dataset);
    let gaps = gap_log.into_inner();
    let trace: Vec<TraceRecord> = outcome
        .trace
        .iter()
        .zip(&gaps)
        .map(|(r, &gap)| TraceRecord {
            iteration: r.iteration,
            log_likelihood: r.objective,
            gradient_max_norm: r.gradient_max_norm,
            step_size: r.step_size,
            min_threshold_gap: gap,
        })
        .collect();

    // standard errors: inverse of the negated numerical Hessian at the
    // optimum, pushed through the reparameterization jacobian
    evaluator.borrow_mut().refresh_base(&params)?;
    let hess_objective = |v: &[f64], touched: &[usize]| -> Result<f64> {
        let block = touched
            .iter()
            .fold(None::<ParamBlock>, |acc, &i| {
                let b = map.block(i);
                Some(acc.map_or(b, |a| a.join(b)))
            })
            .unwrap_or(ParamBlock::Full);
        evaluator
            .borrow()
            .log_likelihood_perturbed(&map.unpack(v)?, block)
    };
    let free_se = numerical_hessian(hess_objective, &outcome.point, final_ll, HESSIAN_REL_STEP)
        .ok()
        .and_then(|h| covariance_from_hessian(&h))
        .map(|cov_free| {
            let j = map.jacobian(&outcome.point);
            let cov_nat = &j * &cov_free * j.transpose();
            (0..map.n_free())
                .map(|k| cov_nat[(k, k)])
                .collect::<Vec<f64>>()
        })
        .filter(|diag| diag.iter().all(|&v| v.is_finite() && v >= 0.0))
        .map(|diag| diag.iter().map(|v| v.sqrt()).collect::<Vec<f64>>());

    let free_estimates = map.natural(&params);
    let (std_errors, t_stats) = match &free_se {
        Some(se) => {
            let se_params = scatter(&map, spec, se);
            let t: Vec<f64> = free_estimates
                .iter()
                .zip(se)
                .map(|(est, s)| if *s > 0.0 { est / s } else { 0.0 })
                .collect();
            (Some(se_params), Some(scatter(&map, spec, &t)))
        }
        None => (None, None),
    };

    Ok(EstimationResult {
        rho_square: rho_square(final_ll, null_ll),
        params,
        std_errors,
        t_stats,
        final_ll,
        null_ll,
        iterations: outcome.iterations,
        converged: outcome.converged,
        settings: settings.clone(),
        free_names: map.names().to_vec(),
        free_estimates,
        free_std_errors: free_se,
        trace,
    })
}

/// Covariance of the estimator: inverse of the negated log-likelihood
/// Hessian. Cholesky first (guaranteeing positive definiteness), LU as a
/// fallback; `None` when both fail.
fn covariance_from_hessian(h: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let n = h.len();
    let neg = DMatrix::from_fn(n, n, |i, j| -h[i][j]);
    if let Some(chol) = neg.clone().cholesky() {
        return Some(chol.inverse());
    }
    neg.try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_settings_are_specified_defaults() {
        let s = EstimationSettings::default();
        assert_eq!(s.max_iterations, 500);
        assert_eq!(s.gradient_step, 1e-5);
        assert_eq!(s.convergence_tol, 1e-4);
        assert_eq!(s.draw_settings.n_draws, 500);
    }

    #[test]
    fn invalid_tolerances_rejected() {
        let mut s = EstimationSettings::default();
        s.convergence_tol = 0.0;
        assert!(s.validate().is_err());
    }
}
