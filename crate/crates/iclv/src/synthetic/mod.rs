//! Stated-preference design machinery: attribute grids, random designs,
//! D-error scoring and coordinate-exchange improvement, plus synthetic
//! dataset simulation for recovery studies.

pub mod simulate;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::attributes::{AlternativeAttributes, Attribute, BodyType};

pub use simulate::{simulate_dataset, CovariateSampler};

/// Utility columns of the design model: every attribute that varies in the
/// grid, with minivan as the body-type reference.
pub const DESIGN_COLUMNS: [Attribute; 17] = [
    Attribute::Hatchback,
    Attribute::SmallSedan,
    Attribute::LargeSedan,
    Attribute::SmallSuv,
    Attribute::LargeSuv,
    Attribute::Price,
    Attribute::SetupCost,
    Attribute::OperatingCost,
    Attribute::RechargeTime,
    Attribute::RangeKm,
    Attribute::FastChargeSpacing,
    Attribute::BusLane,
    Attribute::RebateUpfront,
    Attribute::ParkingRebate,
    Attribute::EnergyDiscount,
    Attribute::MarketUptake,
    Attribute::StampDuty,
];

/// Attribute levels of the survey grid, in the model's scaled units, plus
/// the blocking layout. "NA" levels of the optional support schemes are
/// encoded as 0 (no support).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub n_tasks: usize,
    pub n_blocks: usize,
    pub tasks_per_respondent: usize,
    /// Price levels per budget band (dollars / 100,000).
    pub price_bands: Vec<Vec<f64>>,
    pub setup_levels: Vec<f64>,
    pub operating_levels: Vec<f64>,
    pub recharge_levels: Vec<f64>,
    pub range_levels: Vec<f64>,
    pub fastcharge_levels: Vec<f64>,
    pub bus_lane_levels: Vec<f64>,
    pub rebate_levels: Vec<f64>,
    pub parking_levels: Vec<f64>,
    pub energy_levels: Vec<f64>,
    pub stamp_levels: Vec<f64>,
    pub uptake_levels: Vec<f64>,
}

impl DesignSpec {
    /// The survey grid: 144 tasks in 18 blocks of 8, six body types, three
    /// four-level price bands conditioned on budget, and the remaining
    /// attribute levels of the published task battery.
    pub fn survey_default() -> Self {
        DesignSpec {
            n_tasks: 144,
            n_blocks: 18,
            tasks_per_respondent: 8,
            price_bands: vec![
                vec![0.25, 0.35, 0.45, 0.55],
                vec![0.55, 0.70, 0.85, 1.00],
                vec![1.00, 1.20, 1.40, 1.60],
            ],
            setup_levels: vec![1.0, 1.75, 2.5, 3.25],
            operating_levels: vec![3.0, 6.0, 9.0, 12.0],
            recharge_levels: vec![0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75],
            range_levels: vec![1.2, 1.8, 2.4, 3.0, 3.6, 4.2, 4.8, 5.4],
            fastcharge_levels: vec![0.5, 1.0, 1.5, 2.0],
            bus_lane_levels: vec![0.0, 1.0],
            rebate_levels: vec![0.0, 0.3, 0.65, 1.0],
            parking_levels: vec![0.0, 0.1, 0.25, 0.4],
            energy_levels: vec![0.0, 0.25, 0.75, 1.0],
            stamp_levels: vec![0.0, 0.05, 0.15, 0.25],
            uptake_levels: vec![0.01, 0.30, 0.60, 0.90],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tasks != self.n_blocks * self.tasks_per_respondent {
            return Err(Error::Config(format!(
                "n_tasks ({}) must equal n_blocks ({}) x tasks_per_respondent ({})",
                self.n_tasks, self.n_blocks, self.tasks_per_respondent
            )));
        }
        let level_sets: [(&str, &Vec<f64>); 11] = [
            ("setup_levels", &self.setup_levels),
            ("operating_levels", &self.operating_levels),
            ("recharge_levels", &self.recharge_levels),
            ("range_levels", &self.range_levels),
            ("fastcharge_levels", &self.fastcharge_levels),
            ("bus_lane_levels", &self.bus_lane_levels),
            ("rebate_levels", &self.rebate_levels),
            ("parking_levels", &self.parking_levels),
            ("energy_levels", &self.energy_levels),
            ("stamp_levels", &self.stamp_levels),
            ("uptake_levels", &self.uptake_levels),
        ];
        for (name, levels) in level_sets {
            if levels.is_empty() {
                return Err(Error::Config(format!("{name} must be nonempty")));
            }
        }
        if self.price_bands.is_empty() || self.price_bands.iter().any(|b| b.is_empty()) {
            return Err(Error::Config("price_bands must be nonempty".into()));
        }
        Ok(())
    }
}

/// One generated choice task: two EV alternatives within a block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignTask {
    pub block: usize,
    /// Budget band the block was assigned to.
    pub band: usize,
    pub alts: [AlternativeAttributes; 2],
}

/// A full stated-preference design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub n_blocks: usize,
    pub tasks_per_respondent: usize,
    pub tasks: Vec<DesignTask>,
}

impl Design {
    /// Tasks belonging to one block, in design order.
    pub fn block_tasks(&self, block: usize) -> Vec<&DesignTask> {
        self.tasks.iter().filter(|t| t.block == block).collect()
    }
}

fn pick<R: Rng>(rng: &mut R, levels: &[f64]) -> f64 {
    levels[rng.gen_range(0..levels.len())]
}

fn random_alternative<R: Rng>(rng: &mut R, spec: &DesignSpec, band: usize) -> AlternativeAttributes {
    AlternativeAttributes {
        body_type: BodyType::ALL[rng.gen_range(0..BodyType::ALL.len())],
        price: pick(rng, &spec.price_bands[band]),
        setup_cost: pick(rng, &spec.setup_levels),
        operating_cost: pick(rng, &spec.operating_levels),
        recharge_time: pick(rng, &spec.recharge_levels),
        range_km: pick(rng, &spec.range_levels),
        rebate_upfront: pick(rng, &spec.rebate_levels),
        energy_discount: pick(rng, &spec.energy_levels),
        market_uptake: pick(rng, &spec.uptake_levels),
        fastcharge_spacing: pick(rng, &spec.fastcharge_levels),
        bus_lane: pick(rng, &spec.bus_lane_levels),
        parking_rebate: pick(rng, &spec.parking_levels),
        stamp_duty: pick(rng, &spec.stamp_levels),
    }
}

/// Uniform independent level draws per attribute, alternative and task.
/// Budget bands are assigned uniformly per block, so every task a respondent
/// sees prices within one band. Deterministic per seed.
pub fn random_design(spec: &DesignSpec, seed: u64) -> Result<Design> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bands: Vec<usize> = (0..spec.n_blocks)
        .map(|_| rng.gen_range(0..spec.price_bands.len()))
        .collect();
    let tasks = (0..spec.n_tasks)
        .map(|t| {
            let block = t / spec.tasks_per_respondent;
            let band = bands[block];
            DesignTask {
                block,
                band,
                alts: [
                    random_alternative(&mut rng, spec, band),
                    random_alternative(&mut rng, spec, band),
                ],
            }
        })
        .collect();
    Ok(Design {
        n_blocks: spec.n_blocks,
        tasks_per_respondent: spec.tasks_per_respondent,
        tasks,
    })
}

/// D-error of a design under prior MNL coefficients.
#[derive(Debug, Clone)]
pub struct DErrorReport {
    /// det(Omega)^(1/K); +inf when the information matrix is singular.
    pub value: f64,
    /// Attributes implicated in a singular information matrix.
    pub collinear: Vec<Attribute>,
}

fn prior_vector(prior_beta: &[(Attribute, f64)]) -> Result<Vec<f64>> {
    DESIGN_COLUMNS
        .iter()
        .map(|col| {
            prior_beta
                .iter()
                .find(|(a, _)| a == col)
                .map(|(_, b)| *b)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "prior beta missing design attribute `{}`",
                        col.as_str()
                    ))
                })
        })
        .collect()
}

/// D-error: det of the asymptotic MNL variance-covariance matrix, scaled by
/// the coefficient count, `det(Omega)^(1/K)`. Lower is better. The opt-out
/// alternative enters each task with all-zero attributes.
pub fn d_error(design: &Design, prior_beta: &[(Attribute, f64)]) -> Result<DErrorReport> {
    let prior = prior_vector(prior_beta)?;
    let k = DESIGN_COLUMNS.len();
    let mut info = vec![vec![0.0; k]; k];
    let mut x = [[0.0; 17]; 3]; // alt1, alt2, opt-out columns
    for task in &design.tasks {
        for (a, alt) in task.alts.iter().enumerate() {
            for (c, col) in DESIGN_COLUMNS.iter().enumerate() {
                x[a][c] = alt.value(*col);
            }
        }
        x[2] = [0.0; 17];
        let v: Vec<f64> = (0..3)
            .map(|j| x[j].iter().zip(&prior).map(|(xi, b)| xi * b).sum::<f64>())
            .collect();
        let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = v.iter().map(|vi| (vi - max).exp()).collect();
        let denom: f64 = e.iter().sum();
        let p: Vec<f64> = e.iter().map(|ei| ei / denom).collect();
        let mut mean = [0.0; 17];
        for j in 0..3 {
            for c in 0..k {
                mean[c] += p[j] * x[j][c];
            }
        }
        for j in 0..3 {
            for r in 0..k {
                let dr = x[j][r] - mean[r];
                if dr == 0.0 {
                    continue;
                }
                for c in 0..k {
                    info[r][c] += p[j] * dr * (x[j][c] - mean[c]);
                }
            }
        }
    }

    // Eigendecomposition rather than Cholesky: rank-deficient information
    // matrices must be detected reliably, and rounding can push a Cholesky
    // of a singular matrix through with garbage pivots.
    let m = nalgebra::DMatrix::from_fn(k, k, |i, j| info[i][j]);
    let eig = nalgebra::SymmetricEigen::new(m);
    let max_ev = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let tol = max_ev.max(f64::MIN_POSITIVE) * 1e-10;
    if eig.eigenvalues.iter().all(|ev| *ev > tol) {
        let log_det_info: f64 = eig.eigenvalues.iter().map(|ev| ev.ln()).sum();
        return Ok(DErrorReport {
            value: (-log_det_info / k as f64).exp(),
            collinear: Vec::new(),
        });
    }
    // Implicate the attributes loading on near-null eigenvectors.
    let mut collinear = Vec::new();
    for (i, ev) in eig.eigenvalues.iter().enumerate() {
        if *ev <= tol {
            let vec = eig.eigenvectors.column(i);
            for (c, col) in DESIGN_COLUMNS.iter().enumerate() {
                if vec[c].abs() > 1e-6 && !collinear.contains(col) {
                    collinear.push(*col);
                }
            }
        }
    }
    Ok(DErrorReport {
        value: f64::INFINITY,
        collinear,
    })
}

/// Coordinate-exchange hill climb: propose single attribute-level swaps and
/// keep them only when the D-error strictly decreases. The returned design
/// never scores worse than the input.
pub fn improve_design(
    design: &Design,
    prior_beta: &[(Attribute, f64)],
    spec: &DesignSpec,
    swaps: usize,
    seed: u64,
) -> Result<(Design, DErrorReport)> {
    spec.validate()?;
    let mut current = design.clone();
    let mut score = d_error(&current, prior_beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_d0e5);
    for _ in 0..swaps {
        let t = rng.gen_range(0..current.tasks.len());
        let a = rng.gen_range(0..2);
        let band = current.tasks[t].band;
        let attr_kind = rng.gen_range(0..13);
        let old = current.tasks[t].alts[a].clone();
        {
            let alt = &mut current.tasks[t].alts[a];
            match attr_kind {
                0 => alt.body_type = BodyType::ALL[rng.gen_range(0..6)],
                1 => alt.price = pick(&mut rng, &spec.price_bands[band]),
                2 => alt.setup_cost = pick(&mut rng, &spec.setup_levels),
                3 => alt.operating_cost = pick(&mut rng, &spec.operating_levels),
                4 => alt.recharge_time = pick(&mut rng, &spec.recharge_levels),
                5 => alt.range_km = pick(&mut rng, &spec.range_levels),
                6 => alt.rebate_upfront = pick(&mut rng, &spec.rebate_levels),
                7 => alt.energy_discount = pick(&mut rng, &spec.energy_levels),
                8 => alt.market_uptake = pick(&mut rng, &spec.uptake_levels),
                9 => alt.fastcharge_spacing = pick(&mut rng, &spec.fastcharge_levels),
                10 => alt.bus_lane = pick(&mut rng, &spec.bus_lane_levels),
                11 => alt.parking_rebate = pick(&mut rng, &spec.parking_levels),
                _ => alt.stamp_duty = pick(&mut rng, &spec.stamp_levels),
            }
        }
        let candidate = d_error(&current, prior_beta)?;
        if candidate.value < score.value {
            score = candidate;
        } else {
            current.tasks[t].alts[a] = old;
        }
    }
    Ok((current, score))
}

/// A deliberately mild default prior: costs negative, supports positive.
/// The survey's own priors are unpublished, so these are only meant to give
/// the D-error a plausible ordering of designs.
pub fn default_priors() -> Vec<(Attribute, f64)> {
    vec![
        (Attribute::Hatchback, 0.1),
        (Attribute::SmallSedan, 0.1),
        (Attribute::LargeSedan, 0.05),
        (Attribute::SmallSuv, 0.1),
        (Attribute::LargeSuv, 0.05),
        (Attribute::Price, -1.0),
        (Attribute::SetupCost, -0.05),
        (Attribute::OperatingCost, -0.05),
        (Attribute::RechargeTime, -0.3),
        (Attribute::RangeKm, 0.05),
        (Attribute::FastChargeSpacing, -0.05),
        (Attribute::BusLane, 0.05),
        (Attribute::RebateUpfront, 0.15),
        (Attribute::ParkingRebate, 0.05),
        (Attribute::EnergyDiscount, 0.2),
        (Attribute::MarketUptake, 0.3),
        (Attribute::StampDuty, 0.1),
    ]
}
