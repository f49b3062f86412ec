//! Bijection between the free-parameter vector seen by the optimizer and
//! [`ParameterSet`].
//!
//! Identification constraints are baked into the map: one loading per latent
//! is fixed to 1, reference-category covariates never enter the structural
//! columns, and the opt-out utility stays at 0 unless the spec asks for an
//! EV constant. Positive quantities are reparameterized (disturbance scales
//! as logs, thresholds as a base value plus log-gaps) so that threshold
//! monotonicity and scale positivity hold at every iterate by construction.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::likelihood::ParamBlock;
use crate::model::params::ParameterSet;
use crate::model::spec::ModelSpec;

/// One free coordinate: where it lives and how it is transformed.
#[derive(Debug, Clone, PartialEq)]
enum Coord {
    Structural { latent: usize, col: usize },
    LogDeltaScale { latent: usize },
    Loading { indicator: usize },
    ThresholdBase { indicator: usize },
    /// Log of the gap tau_{j+1} - tau_j; `gap` in 0..3.
    ThresholdLogGap { indicator: usize, gap: usize },
    Beta { index: usize },
    InteractionCoef { index: usize },
    Asc,
}

/// Ordered map of free parameters for a validated spec.
#[derive(Debug, Clone)]
pub struct FreeParameterMap {
    spec: ModelSpec,
    coords: Vec<Coord>,
    names: Vec<String>,
}

impl FreeParameterMap {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        // Identification needs multiple manifest indicators per latent.
        for (l, latent) in spec.latents.iter().enumerate() {
            let count = spec.indicators.iter().filter(|i| i.latent == *latent).count();
            if count < 2 {
                return Err(Error::Identification(format!(
                    "latent `{latent}` (index {l}) has {count} indicator(s); \
                     at least 2 are required"
                )));
            }
        }
        let mut coords = Vec::new();
        let mut names = Vec::new();
        let cols: Vec<String> = std::iter::once("const".to_string())
            .chain(spec.covariates.iter().cloned())
            .collect();
        for (l, latent) in spec.latents.iter().enumerate() {
            for (c, col) in cols.iter().enumerate() {
                coords.push(Coord::Structural { latent: l, col: c });
                names.push(format!("structural[{latent}][{col}]"));
            }
        }
        for (l, latent) in spec.latents.iter().enumerate() {
            coords.push(Coord::LogDeltaScale { latent: l });
            names.push(format!("delta_scale[{latent}]"));
        }
        for (k, ind) in spec.indicators.iter().enumerate() {
            if !ind.fix_loading {
                coords.push(Coord::Loading { indicator: k });
                names.push(format!("loading[{}]", ind.label));
            }
        }
        for (k, ind) in spec.indicators.iter().enumerate() {
            coords.push(Coord::ThresholdBase { indicator: k });
            names.push(format!("threshold[{}][1]", ind.label));
            for gap in 0..3 {
                coords.push(Coord::ThresholdLogGap { indicator: k, gap });
                names.push(format!("threshold[{}][{}]", ind.label, gap + 2));
            }
        }
        for (b, attr) in spec.choice_attributes.iter().enumerate() {
            coords.push(Coord::Beta { index: b });
            names.push(format!("beta[{}]", attr.as_str()));
        }
        for (i, inter) in spec.interactions.iter().enumerate() {
            coords.push(Coord::InteractionCoef { index: i });
            names.push(format!("interaction[{}*{}]", inter.latent, inter.attribute.as_str()));
        }
        if spec.estimate_asc {
            coords.push(Coord::Asc);
            names.push("asc".to_string());
        }
        Ok(FreeParameterMap {
            spec: spec.clone(),
            coords,
            names,
        })
    }

    pub fn n_free(&self) -> usize {
        self.coords.len()
    }

    /// Natural-space names of the free coordinates, aligned with
    /// [`Self::natural`].
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// The likelihood block a coordinate belongs to, for cheap
    /// finite-difference probes.
    pub fn block(&self, coord: usize) -> ParamBlock {
        match self.coords[coord] {
            Coord::Structural { .. } | Coord::LogDeltaScale { .. } => ParamBlock::Full,
            Coord::Loading { .. }
            | Coord::ThresholdBase { .. }
            | Coord::ThresholdLogGap { .. } => ParamBlock::MeasurementOnly,
            Coord::Beta { .. } | Coord::InteractionCoef { .. } | Coord::Asc => {
                ParamBlock::ChoiceOnly
            }
        }
    }

    /// Packs a parameter set into the free vector. Fails on values the
    /// reparameterization cannot represent (non-positive scales or gaps).
    pub fn pack(&self, params: &ParameterSet) -> Result<Vec<f64>> {
        params.validate(&self.spec)?;
        self.coords
            .iter()
            .map(|coord| match *coord {
                Coord::Structural { latent, col } => Ok(params.structural[latent][col]),
                Coord::LogDeltaScale { latent } => {
                    let s = params.delta_scale[latent];
                    if s <= 0.0 {
                        return Err(Error::InvalidParameter(format!(
                            "delta_scale[{latent}] must be > 0 to estimate, got {s}"
                        )));
                    }
                    Ok(s.ln())
                }
                Coord::Loading { indicator } => Ok(params.measurement[indicator].loading),
                Coord::ThresholdBase { indicator } => {
                    Ok(params.measurement[indicator].thresholds[0])
                }
                Coord::ThresholdLogGap { indicator, gap } => {
                    let t = &params.measurement[indicator].thresholds;
                    Ok((t[gap + 1] - t[gap]).ln())
                }
                Coord::Beta { index } => Ok(params.beta[index].1),
                Coord::InteractionCoef { index } => Ok(params.interactions[index].coefficient),
                Coord::Asc => Ok(params.asc),
            })
            .collect()
    }

    /// Expands a free vector into a full parameter set (fixed loadings at 1,
    /// asc at 0 unless estimated).
    pub fn unpack(&self, v: &[f64]) -> Result<ParameterSet> {
        if v.len() != self.coords.len() {
            return Err(Error::Config(format!(
                "free vector has {} entries, map expects {}",
                v.len(),
                self.coords.len()
            )));
        }
        let mut params = ParameterSet::zeros(&self.spec);
        for m in &mut params.measurement {
            m.loading = 1.0;
        }
        for (coord, &x) in self.coords.iter().zip(v) {
            match *coord {
                Coord::Structural { latent, col } => params.structural[latent][col] = x,
                Coord::LogDeltaScale { latent } => params.delta_scale[latent] = x.exp(),
                Coord::Loading { indicator } => params.measurement[indicator].loading = x,
                Coord::ThresholdBase { indicator } => {
                    params.measurement[indicator].thresholds[0] = x
                }
                Coord::ThresholdLogGap { indicator, gap } => {
                    // gaps are applied below once the base is known
                    params.measurement[indicator].thresholds[gap + 1] = x;
                }
                Coord::Beta { index } => params.beta[index].1 = x,
                Coord::InteractionCoef { index } => {
                    params.interactions[index].coefficient = x
                }
                Coord::Asc => params.asc = x,
            }
        }
        for m in &mut params.measurement {
            for j in 1..4 {
                m.thresholds[j] = m.thresholds[j - 1] + m.thresholds[j].exp();
            }
        }
        Ok(params)
    }

    /// Natural-space values of the free coordinates: scales instead of their
    /// logs and thresholds instead of base/log-gaps.
    pub fn natural(&self, params: &ParameterSet) -> Vec<f64> {
        self.coords
            .iter()
            .map(|coord| match *coord {
                Coord::Structural { latent, col } => params.structural[latent][col],
                Coord::LogDeltaScale { latent } => params.delta_scale[latent],
                Coord::Loading { indicator } => params.measurement[indicator].loading,
                Coord::ThresholdBase { indicator } => params.measurement[indicator].thresholds[0],
                Coord::ThresholdLogGap { indicator, gap } => {
                    params.measurement[indicator].thresholds[gap + 1]
                }
                Coord::Beta { index } => params.beta[index].1,
                Coord::InteractionCoef { index } => params.interactions[index].coefficient,
                Coord::Asc => params.asc,
            })
            .collect()
    }

    /// Writes natural-space values (one per free coordinate) into the
    /// corresponding slots of a parameter-set container. Used to shape
    /// standard errors and t-statistics like the estimates.
    pub fn scatter_natural(&self, values: &[f64], out: &mut ParameterSet) {
        debug_assert_eq!(values.len(), self.coords.len());
        for (coord, &x) in self.coords.iter().zip(values) {
            match *coord {
                Coord::Structural { latent, col } => out.structural[latent][col] = x,
                Coord::LogDeltaScale { latent } => out.delta_scale[latent] = x,
                Coord::Loading { indicator } => out.measurement[indicator].loading = x,
                Coord::ThresholdBase { indicator } => {
                    out.measurement[indicator].thresholds[0] = x
                }
                Coord::ThresholdLogGap { indicator, gap } => {
                    out.measurement[indicator].thresholds[gap + 1] = x
                }
                Coord::Beta { index } => out.beta[index].1 = x,
                Coord::InteractionCoef { index } => out.interactions[index].coefficient = x,
                Coord::Asc => out.asc = x,
            }
        }
    }

    /// Jacobian of the natural coordinates with respect to the free vector,
    /// used to push covariance estimates through the reparameterization.
    pub fn jacobian(&self, v: &[f64]) -> DMatrix<f64> {
        let n = self.coords.len();
        let mut j = DMatrix::zeros(n, n);
        for (row, coord) in self.coords.iter().enumerate() {
            match *coord {
                Coord::LogDeltaScale { .. } => {
                    j[(row, row)] = v[row].exp();
                }
                Coord::ThresholdBase { .. } => {
                    j[(row, row)] = 1.0;
                }
                Coord::ThresholdLogGap { indicator, gap } => {
                    // tau_{gap+2} = base + sum_{g <= gap} exp(free_g)
                    for (col, other) in self.coords.iter().enumerate() {
                        match *other {
                            Coord::ThresholdBase { indicator: i2 } if i2 == indicator => {
                                j[(row, col)] = 1.0;
                            }
                            Coord::ThresholdLogGap { indicator: i2, gap: g2 }
                                if i2 == indicator && g2 <= gap =>
                            {
                                j[(row, col)] = v[col].exp();
                            }
                            _ => {}
                        }
                    }
                }
                _ => {
                    j[(row, row)] = 1.0;
                }
            }
        }
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::spec::ModelSpec;

    #[test]
    fn paper_spec_free_count() {
        let spec = ModelSpec::paper_default();
        let map = FreeParameterMap::new(&spec).unwrap();
        // 10 indicators x 4 threshold parameters + 7 free loadings
        let meas_free = map
            .names()
            .iter()
            .filter(|n| n.starts_with("threshold") || n.starts_with("loading"))
            .count();
        assert_eq!(meas_free, 10 * 4 + 7);
        // full count: structural 3x24 + scales 3 + measurement 47 + beta 10
        // + interactions 4
        assert_eq!(map.n_free(), 72 + 3 + 47 + 10 + 4);
    }

    #[test]
    fn pack_unpack_round_trip() {
        let spec = ModelSpec::paper_default();
        let map = FreeParameterMap::new(&spec).unwrap();
        let mut params = ParameterSet::zeros(&spec);
        params.structural[1][3] = -0.7;
        params.delta_scale = vec![0.4, 1.3, 2.2];
        params.measurement[2].loading = 0.85;
        params.measurement[5].thresholds = [-1.0, 0.25, 0.5, 3.0];
        params.beta[3].1 = -7.98;
        params.interactions[0].coefficient = 2.38;
        let v = map.pack(&params).unwrap();
        let back = map.unpack(&v).unwrap();
        for (a, b) in map.natural(&params).iter().zip(map.natural(&back).iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        let v2 = map.pack(&back).unwrap();
        for (a, b) in v.iter().zip(&v2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_indicator_latent_is_identification_error() {
        let mut spec = ModelSpec::paper_default();
        // drop one of the two safety indicators
        spec.indicators.remove(1);
        let err = FreeParameterMap::new(&spec).unwrap_err();
        assert!(matches!(err, Error::Identification(_)), "{err}");
        assert!(err.to_string().contains("safety"));
    }

    #[test]
    fn unpacked_thresholds_always_increase() {
        let spec = ModelSpec::paper_default();
        let map = FreeParameterMap::new(&spec).unwrap();
        let v: Vec<f64> = (0..map.n_free()).map(|i| ((i * 37) % 13) as f64 - 6.0).collect();
        let params = map.unpack(&v).unwrap();
        for m in &params.measurement {
            for w in m.thresholds.windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let spec = ModelSpec::paper_default();
        let map = FreeParameterMap::new(&spec).unwrap();
        let v: Vec<f64> = (0..map.n_free())
            .map(|i| 0.1 + 0.01 * ((i % 7) as f64))
            .collect();
        let j = map.jacobian(&v);
        let h = 1e-6;
        for col in [0usize, 75, 80, 90, 131] {
            let mut vp = v.clone();
            vp[col] += h;
            let mut vm = v.clone();
            vm[col] -= h;
            let np = map.natural(&map.unpack(&vp).unwrap());
            let nm = map.natural(&map.unpack(&vm).unwrap());
            for row in 0..map.n_free() {
                let fd = (np[row] - nm[row]) / (2.0 * h);
                assert!(
                    (j[(row, col)] - fd).abs() < 1e-6,
                    "row {row} col {col}: {} vs {fd}",
                    j[(row, col)]
                );
            }
        }
    }
}
