//! Policy scenario machinery: cohort profiles, cohort latents, age
//! contribution curves, simulated measurement profiles, and the six
//! attribute sensitivity sweeps around a reference vehicle.

use serde::{Deserialize, Serialize};

use crate::draws::{generate_draws, DrawScheme, DrawSettings};
use crate::error::{Error, Result};
use crate::model::attributes::{AlternativeAttributes, BodyType};
use crate::model::kernels::{
    choice_prob, indicator_prob, structural_mean, systematic_utility, LatentAttitudes,
};
use crate::model::params::ParameterSet;
use crate::model::spec::ModelSpec;
use crate::model::CovariateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Education {
    Certificate,
    Postgraduate,
    Undergraduate,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Employment {
    FullTime,
    PartTime,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Household {
    CoupleKids,
    CoupleNoKids,
    SingleParent,
    Single,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VehicleCount {
    None,
    One,
    Two,
    ThreePlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncomeBand {
    Low,
    Middle,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dwelling {
    House,
    Apartment,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tenure {
    Owner,
    OwnerMortgage,
    Renter,
    Other,
}

/// A named socio-demographic profile used in policy simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    pub name: String,
    pub age_years: f64,
    pub gender: Gender,
    pub education: Education,
    pub employment: Employment,
    pub household: Household,
    pub vehicles: VehicleCount,
    pub income: IncomeBand,
    pub dwelling: Dwelling,
    pub tenure: Tenure,
}

impl CohortSpec {
    pub fn to_covariates(&self) -> CovariateVector {
        let mut z = CovariateVector::default();
        z.set_age_years(self.age_years);
        z.female = (self.gender == Gender::Female) as u8 as f64;
        match self.education {
            Education::Certificate => z.edu_certificate = 1.0,
            Education::Postgraduate => z.edu_postgraduate = 1.0,
            Education::Undergraduate => z.edu_undergraduate = 1.0,
            Education::Other => {}
        }
        match self.employment {
            Employment::FullTime => z.emp_full_time = 1.0,
            Employment::PartTime => z.emp_part_time = 1.0,
            Employment::Other => {}
        }
        match self.household {
            Household::CoupleKids => z.hh_couple_kids = 1.0,
            Household::CoupleNoKids => z.hh_couple_no_kids = 1.0,
            Household::SingleParent => z.hh_single_parent = 1.0,
            Household::Single => z.hh_single = 1.0,
            Household::Other => {}
        }
        match self.vehicles {
            VehicleCount::One => z.veh_one = 1.0,
            VehicleCount::Two => z.veh_two = 1.0,
            VehicleCount::ThreePlus => z.veh_three_plus = 1.0,
            VehicleCount::None => {}
        }
        match self.income {
            IncomeBand::Low => z.inc_low = 1.0,
            IncomeBand::High => z.inc_high = 1.0,
            IncomeBand::Middle => {}
        }
        match self.dwelling {
            Dwelling::House => z.acc_house = 1.0,
            Dwelling::Apartment => z.acc_apartment = 1.0,
            Dwelling::Other => {}
        }
        match self.tenure {
            Tenure::Owner => z.ten_owner = 1.0,
            Tenure::OwnerMortgage => z.ten_owner_mortgage = 1.0,
            Tenure::Renter => z.ten_renter = 1.0,
            Tenure::Other => {}
        }
        z
    }

    /// The generation label half of the name, e.g. "gen_y" for
    /// "gen_y_female".
    pub fn generation(&self) -> &str {
        self.name
            .rsplit_once('_')
            .map(|(g, _)| g)
            .unwrap_or(&self.name)
    }
}

/// The six target-group profiles of the simulation exercise: three
/// generations with male/female variants.
pub fn target_cohorts() -> Vec<CohortSpec> {
    let mut cohorts = Vec::new();
    let base = [
        (
            "gen_z",
            20.0,
            Education::Certificate,
            Employment::PartTime,
            Household::Other,
            IncomeBand::Middle,
            Tenure::Renter,
        ),
        (
            "gen_y",
            37.0,
            Education::Undergraduate,
            Employment::FullTime,
            Household::CoupleKids,
            IncomeBand::High,
            Tenure::OwnerMortgage,
        ),
        (
            "gen_x",
            50.0,
            Education::Undergraduate,
            Employment::FullTime,
            Household::CoupleKids,
            IncomeBand::High,
            Tenure::Owner,
        ),
    ];
    for (gen, age, education, employment, household, income, tenure) in base {
        for gender in [Gender::Male, Gender::Female] {
            cohorts.push(CohortSpec {
                name: format!(
                    "{gen}_{}",
                    match gender {
                        Gender::Male => "male",
                        Gender::Female => "female",
                    }
                ),
                age_years: age,
                gender,
                education,
                employment,
                household,
                vehicles: VehicleCount::One,
                income,
                dwelling: Dwelling::House,
                tenure,
            });
        }
    }
    cohorts
}

/// Latent attitudes of a cohort at the structural means (zero disturbance).
pub fn cohort_latents(
    params: &ParameterSet,
    spec: &ModelSpec,
    cohort: &CohortSpec,
) -> Result<LatentAttitudes> {
    let z = spec.structural_regressors(&cohort.to_covariates())?;
    structural_mean(params, &z)
}

/// Latent values against age with all other covariates at zero.
///
/// Ages must lie within the observed 18..=85 range.
pub fn age_profile(
    params: &ParameterSet,
    spec: &ModelSpec,
    age_grid: &[f64],
) -> Result<Vec<(f64, LatentAttitudes)>> {
    age_grid
        .iter()
        .map(|&age| {
            if !(18.0..=85.0).contains(&age) {
                return Err(Error::Config(format!(
                    "age {age} outside the observed range 18..=85"
                )));
            }
            let mut cov = CovariateVector::default();
            cov.set_age_years(age);
            let z = spec.structural_regressors(&cov)?;
            Ok((age, structural_mean(params, &z)?))
        })
        .collect()
}

/// Five-level response probabilities per indicator at a cohort's latents.
pub fn measurement_profile(
    params: &ParameterSet,
    spec: &ModelSpec,
    cohort: &CohortSpec,
) -> Result<Vec<[f64; 5]>> {
    if params.measurement.is_empty() {
        return Err(Error::Config(
            "measurement parameters absent: supply estimated or synthetic \
             loadings and thresholds"
                .into(),
        ));
    }
    let att = cohort_latents(params, spec, cohort)?;
    params
        .measurement
        .iter()
        .map(|meas| {
            let mut row = [0.0; 5];
            for level in 1..=5u8 {
                row[(level - 1) as usize] = indicator_prob(meas, &att, level)?;
            }
            Ok(row)
        })
        .collect()
}

/// The reference vehicle of the simulation exercise, in scaled units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseVehicle {
    pub body_type: BodyType,
    pub price: f64,
    pub setup_cost: f64,
    pub operating_cost: f64,
    pub recharge_time: f64,
    pub range_km: f64,
    pub rebate_upfront: f64,
    pub energy_discount: f64,
    pub market_uptake: f64,
}

impl Default for BaseVehicle {
    /// A premium large-sedan EV: $100k price, $10k setup, 450 km range,
    /// 75 min recharge, 6.12 c/km running cost, 1% baseline market uptake.
    fn default() -> Self {
        BaseVehicle {
            body_type: BodyType::LargeSedan,
            price: 1.00,
            setup_cost: 10.0,
            operating_cost: 6.12,
            recharge_time: 0.125,
            range_km: 4.50,
            rebate_upfront: 0.0,
            energy_discount: 0.0,
            market_uptake: 0.01,
        }
    }
}

impl BaseVehicle {
    pub fn to_attributes(&self) -> AlternativeAttributes {
        AlternativeAttributes {
            body_type: self.body_type,
            price: self.price,
            setup_cost: self.setup_cost,
            operating_cost: self.operating_cost,
            recharge_time: self.recharge_time,
            range_km: self.range_km,
            rebate_upfront: self.rebate_upfront,
            energy_discount: self.energy_discount,
            market_uptake: self.market_uptake,
            fastcharge_spacing: 0.0,
            bus_lane: 0.0,
            parking_rebate: 0.0,
            stamp_duty: 0.0,
        }
    }
}

/// Simulation-level configuration: the opt-out calibration constant and the
/// optional Monte-Carlo integration over latent disturbances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// Utility of the opt-out alternative in the two-option simulation
    /// choice set. Fit once so the rebate-scenario anchor holds, then
    /// frozen; 0 reproduces the raw estimation normalization.
    #[serde(default)]
    pub opt_out_utility: f64,
    /// When set, average choice probabilities over this many disturbance
    /// draws instead of evaluating at the latent means.
    #[serde(default)]
    pub monte_carlo_draws: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            opt_out_utility: 0.0,
            monte_carlo_draws: None,
            seed: 0,
        }
    }
}

/// The six sensitivity scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptField {
    /// Scenario 1: subsidy to manufacturers, lowering the sticker price.
    PriceSubsidy,
    /// Scenario 2: rebate on the upfront cost.
    RebateUpfront,
    /// Scenario 3: range improvement.
    RangeKm,
    /// Scenario 4: recharge-time reduction.
    RechargeTime,
    /// Scenario 5: energy-bill discount.
    EnergyDiscount,
    /// Scenario 6: market uptake.
    MarketUptake,
}

impl SweptField {
    pub fn for_scenario(id: u8) -> Result<SweptField> {
        Ok(match id {
            1 => SweptField::PriceSubsidy,
            2 => SweptField::RebateUpfront,
            3 => SweptField::RangeKm,
            4 => SweptField::RechargeTime,
            5 => SweptField::EnergyDiscount,
            6 => SweptField::MarketUptake,
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario id {other}; scenarios are 1..=6"
                )))
            }
        })
    }

    /// Unit of the sweep's x axis as written to curve files.
    pub fn x_unit(self) -> &'static str {
        match self {
            SweptField::PriceSubsidy | SweptField::RebateUpfront => "dollars",
            SweptField::RangeKm => "km",
            SweptField::RechargeTime => "minutes",
            SweptField::EnergyDiscount | SweptField::MarketUptake => "fraction",
        }
    }
}

/// A policy sweep: scenario, grid in natural units, cohorts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSweep {
    pub scenario_id: u8,
    pub swept_field: SweptField,
    /// Monotone grid in the field's natural units (dollars, km, minutes or
    /// fractions).
    pub grid: Vec<f64>,
    pub cohorts: Vec<CohortSpec>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

impl ScenarioSweep {
    /// The published sweep ranges: incentives 0..$50k, range 450..700 km,
    /// recharge 75..25 minutes, discount 0..100%, uptake 1..90%.
    pub fn standard(scenario_id: u8, cohorts: Vec<CohortSpec>) -> Result<Self> {
        let swept_field = SweptField::for_scenario(scenario_id)?;
        let grid = match swept_field {
            SweptField::PriceSubsidy | SweptField::RebateUpfront => linspace(0.0, 50_000.0, 11),
            SweptField::RangeKm => linspace(450.0, 700.0, 11),
            SweptField::RechargeTime => linspace(75.0, 25.0, 11),
            SweptField::EnergyDiscount => linspace(0.0, 1.0, 11),
            SweptField::MarketUptake => linspace(0.01, 0.90, 11),
        };
        Ok(ScenarioSweep {
            scenario_id,
            swept_field,
            grid,
            cohorts,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if SweptField::for_scenario(self.scenario_id)? != self.swept_field {
            return Err(Error::Config(format!(
                "scenario {} sweeps {:?}, not {:?}",
                self.scenario_id,
                SweptField::for_scenario(self.scenario_id)?,
                self.swept_field
            )));
        }
        if self.grid.is_empty() {
            return Err(Error::Config("sweep grid must be nonempty".into()));
        }
        let increasing = self.grid.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.grid.windows(2).all(|w| w[0] > w[1]);
        if self.grid.len() > 1 && !increasing && !decreasing {
            return Err(Error::Config("sweep grid must be monotone".into()));
        }
        if self.cohorts.is_empty() {
            return Err(Error::Config("sweep needs at least one cohort".into()));
        }
        Ok(())
    }

    /// Applies one grid value to the base vehicle. Returns the adjusted
    /// attributes and whether the value extrapolates beyond the survey grid.
    fn apply(&self, base: &BaseVehicle, x: f64) -> Result<(AlternativeAttributes, bool)> {
        let mut alt = base.to_attributes();
        let extrapolated = match self.swept_field {
            SweptField::PriceSubsidy => {
                alt.price = base.price - x / 100_000.0;
                if alt.price < 0.0 {
                    return Err(Error::Config(format!(
                        "price subsidy {x} exceeds the vehicle price"
                    )));
                }
                !(0.25..=1.60).contains(&alt.price)
            }
            SweptField::RebateUpfront => {
                alt.rebate_upfront = x / 10_000.0;
                !(0.0..=1.0).contains(&alt.rebate_upfront)
            }
            SweptField::RangeKm => {
                alt.range_km = x / 100.0;
                !(1.2..=5.4).contains(&alt.range_km)
            }
            SweptField::RechargeTime => {
                alt.recharge_time = x / 60.0 / 10.0;
                !(0.05..=0.75).contains(&alt.recharge_time)
            }
            SweptField::EnergyDiscount => {
                alt.energy_discount = x;
                false
            }
            SweptField::MarketUptake => {
                alt.market_uptake = x;
                false
            }
        };
        Ok((alt, extrapolated))
    }
}

/// One curve point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub scenario: u8,
    pub cohort: String,
    pub gender: Gender,
    pub x: f64,
    pub probability: f64,
}

/// Sweep output: curve points ordered by (cohort, grid index), plus warning
/// annotations for extrapolated grid values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub warnings: Vec<String>,
}

/// P(choose the EV) against the opt-out for each cohort over the sweep grid.
///
/// Latents enter at their structural means; with `monte_carlo_draws` set the
/// probability is instead averaged over disturbance draws (per-cohort draw
/// streams, deterministic per seed).
pub fn scenario_sweep(
    params: &ParameterSet,
    spec: &ModelSpec,
    sweep: &ScenarioSweep,
    base: &BaseVehicle,
    config: &PolicyConfig,
) -> Result<SweepResult> {
    sweep.validate()?;
    // the swept attribute must actually enter the utility
    let swept_attr = match sweep.swept_field {
        SweptField::PriceSubsidy => crate::model::attributes::Attribute::Price,
        SweptField::RebateUpfront => crate::model::attributes::Attribute::RebateUpfront,
        SweptField::RangeKm => crate::model::attributes::Attribute::RangeKm,
        SweptField::RechargeTime => crate::model::attributes::Attribute::RechargeTime,
        SweptField::EnergyDiscount => crate::model::attributes::Attribute::EnergyDiscount,
        SweptField::MarketUptake => crate::model::attributes::Attribute::MarketUptake,
    };
    let has_coefficient = params.beta_for(swept_attr).is_some()
        || params.interactions.iter().any(|i| i.attribute == swept_attr);
    if !has_coefficient {
        return Err(Error::Config(format!(
            "scenario {} sweeps `{}` but the parameter set has no coefficient for it",
            sweep.scenario_id,
            swept_attr.as_str()
        )));
    }
    let mut points = Vec::with_capacity(sweep.cohorts.len() * sweep.grid.len());
    let mut warnings = Vec::new();
    for (c, cohort) in sweep.cohorts.iter().enumerate() {
        let mean = cohort_latents(params, spec, cohort)?;
        let latent_sets: Vec<LatentAttitudes> = match config.monte_carlo_draws {
            None => vec![mean.clone()],
            Some(n) => {
                let settings = DrawSettings {
                    n_draws: n,
                    scheme: DrawScheme::QuasiRandomLowDiscrepancy,
                    seed: config.seed,
                    scramble: false,
                };
                crate::model::kernels::draw_latents(
                    params,
                    &mean,
                    &generate_draws(&settings, c as u64, spec.n_latents())?,
                )?
            }
        };
        for (g, &x) in sweep.grid.iter().enumerate() {
            let (alt, extrapolated) = sweep.apply(base, x)?;
            if extrapolated && g == sweep.grid.len() - 1 {
                warnings.push(format!(
                    "scenario {}: grid value {x} extrapolates beyond the survey attribute levels",
                    sweep.scenario_id
                ));
            }
            let mut prob = 0.0;
            for att in &latent_sets {
                let v_ev = systematic_utility(params, Some(&alt), att)?;
                let p = choice_prob(
                    [v_ev, config.opt_out_utility, 0.0],
                    [true, true, false],
                )?;
                prob += p[0];
            }
            prob /= latent_sets.len() as f64;
            points.push(SweepPoint {
                scenario: sweep.scenario_id,
                cohort: cohort.name.clone(),
                gender: cohort.gender,
                x,
                probability: prob,
            });
        }
    }
    warnings.dedup();
    Ok(SweepResult { points, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_target_cohorts_with_gender_split() {
        let cohorts = target_cohorts();
        assert_eq!(cohorts.len(), 6);
        assert_eq!(cohorts[0].name, "gen_z_male");
        assert_eq!(cohorts[0].generation(), "gen_z");
        assert_eq!(cohorts[5].name, "gen_x_female");
        for c in &cohorts {
            c.to_covariates().validate().unwrap();
        }
    }

    #[test]
    fn gen_z_profile_dummy_coding() {
        let cohorts = target_cohorts();
        let z = cohorts[0].to_covariates();
        assert_eq!(z.age, 0.2);
        assert_eq!(z.edu_certificate, 1.0);
        assert_eq!(z.emp_part_time, 1.0);
        assert_eq!(z.hh_couple_kids + z.hh_couple_no_kids + z.hh_single_parent + z.hh_single, 0.0);
        assert_eq!(z.inc_low + z.inc_high, 0.0);
        assert_eq!(z.ten_renter, 1.0);
    }

    #[test]
    fn scenario_field_mapping() {
        assert_eq!(SweptField::for_scenario(1).unwrap(), SweptField::PriceSubsidy);
        assert_eq!(SweptField::for_scenario(6).unwrap(), SweptField::MarketUptake);
        assert!(SweptField::for_scenario(7).is_err());
    }

    #[test]
    fn mismatched_scenario_field_rejected() {
        let mut sweep = ScenarioSweep::standard(2, target_cohorts()).unwrap();
        sweep.swept_field = SweptField::RangeKm;
        assert!(sweep.validate().is_err());
    }

    #[test]
    fn subsidy_beyond_price_is_error() {
        let sweep = ScenarioSweep {
            scenario_id: 1,
            swept_field: SweptField::PriceSubsidy,
            grid: vec![150_000.0],
            cohorts: target_cohorts(),
        };
        let params = ParameterSet::zeros(&ModelSpec::paper_default());
        let err = scenario_sweep(
            &params,
            &ModelSpec::paper_default(),
            &sweep,
            &BaseVehicle::default(),
            &PolicyConfig::default(),
        );
        assert!(err.is_err());
    }

    #[test]
    fn range_extrapolation_warns_but_succeeds() {
        let spec = ModelSpec::paper_default();
        let params = ParameterSet::zeros(&spec);
        let sweep = ScenarioSweep::standard(3, vec![target_cohorts().remove(0)]).unwrap();
        let out = scenario_sweep(
            &params,
            &spec,
            &sweep,
            &BaseVehicle::default(),
            &PolicyConfig::default(),
        )
        .unwrap();
        assert!(!out.warnings.is_empty());
        assert_eq!(out.points.len(), 11);
    }

    #[test]
    fn zero_loading_measurement_row_is_cohort_independent() {
        let spec = ModelSpec::paper_default();
        let mut params = ParameterSet::zeros(&spec);
        for row in &mut params.structural {
            row[0] = 3.0;
        }
        for m in &mut params.measurement {
            m.loading = 0.0;
            m.thresholds = [0.5, 1.5, 2.5, 3.5];
        }
        let cohorts = target_cohorts();
        let a = measurement_profile(&params, &spec, &cohorts[0]).unwrap();
        let b = measurement_profile(&params, &spec, &cohorts[3]).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            for (pa, pb) in ra.iter().zip(rb) {
                assert!((pa - pb).abs() < 1e-15);
            }
            assert!((ra.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_measurement_params_is_config_error() {
        let spec = ModelSpec::paper_default();
        let mut params = ParameterSet::zeros(&spec);
        params.measurement.clear();
        let cohorts = target_cohorts();
        let err = measurement_profile(&params, &spec, &cohorts[0]).unwrap_err();
        assert!(err.to_string().contains("measurement parameters absent"));
    }

    #[test]
    fn age_grid_bounds_enforced() {
        let spec = ModelSpec::paper_default();
        let params = ParameterSet::zeros(&spec);
        assert!(age_profile(&params, &spec, &[17.0]).is_err());
        assert!(age_profile(&params, &spec, &[18.0, 85.0]).is_ok());
    }
}
