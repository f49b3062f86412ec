//! File formats of the command-line pipeline.
//!
//! Datasets travel as two CSVs: a per-individual file (covariates and Likert
//! responses) and a per-(individual, task, alternative) file. Parameters,
//! specs, settings, cohorts and design grids are JSON. Every float written
//! to CSV uses 17 significant digits so outputs are byte-identical across
//! runs and parse back to the same value; JSON uses serde's exact
//! round-trip float encoding.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::attributes::{AlternativeAttributes, Attribute, BodyType};
use crate::model::covariates::{CovariateVector, COVARIATE_NAMES};
use crate::model::dataset::{ChoiceDataset, ChoiceTask, Chosen, Individual};
use crate::model::params::{IndicatorParams, Interaction, ParameterSet};
use crate::model::spec::{IndicatorSpec, InteractionSpec, ModelSpec};
use crate::policy::{PolicyConfig, SweepResult};
use crate::synthetic::{Design, DesignTask};

pub const SCHEMA_VERSION: u32 = 1;

/// 17-significant-digit float encoding used in every CSV numeric field.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_float(file: &str, line: u64, field: &str, raw: &str) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| {
        Error::schema(file, Some(line), format!("field `{field}`: invalid number `{raw}`"))
    })
}

fn parse_int(file: &str, line: u64, field: &str, raw: &str) -> Result<u64> {
    raw.trim().parse::<u64>().map_err(|_| {
        Error::schema(file, Some(line), format!("field `{field}`: invalid integer `{raw}`"))
    })
}

// ---------------------------------------------------------------------------
// parameter files
// ---------------------------------------------------------------------------

/// Unit declarations echoed in every parameter file so the scaling decisions
/// are self-describing.
pub fn unit_declarations() -> BTreeMap<String, String> {
    [
        ("age", "years/100"),
        ("price", "dollars/100000"),
        ("setup_cost", "dollars/1000"),
        ("operating_cost", "cents_per_km"),
        ("recharge_time", "hours/10"),
        ("range_km", "km/100"),
        ("rebate_upfront", "dollars/10000"),
        ("energy_discount", "fraction"),
        ("market_uptake", "fraction"),
        ("fastcharge_spacing", "km/10"),
        ("bus_lane", "flag"),
        ("parking_rebate", "dollars/1000"),
        ("stamp_duty", "fraction"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementEntry {
    pub label: String,
    pub latent: String,
    #[serde(default)]
    pub fix_loading: bool,
    pub loading: f64,
    pub thresholds: [f64; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionEntry {
    pub latent: String,
    pub attribute: String,
    pub coefficient: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyBlock {
    /// Opt-out utility for the two-option policy choice set, fit once
    /// against the rebate anchor and then frozen.
    #[serde(default)]
    pub opt_out_utility: f64,
    #[serde(default = "default_uptake")]
    pub baseline_market_uptake: f64,
}

fn default_uptake() -> f64 {
    0.01
}

impl Default for PolicyBlock {
    fn default() -> Self {
        PolicyBlock {
            opt_out_utility: 0.0,
            baseline_market_uptake: default_uptake(),
        }
    }
}

/// JSON parameter file: model layout plus coefficient values. Measurement
/// and disturbance blocks may be null (the published tables omit them); a
/// null measurement block means the loaded spec has no indicators.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParamsFile {
    pub schema_version: u32,
    pub units: BTreeMap<String, String>,
    pub latents: Vec<String>,
    pub covariates: Vec<String>,
    /// latent name -> { "const" + covariate name -> coefficient }.
    pub structural: BTreeMap<String, BTreeMap<String, f64>>,
    pub delta_scale: Option<BTreeMap<String, f64>>,
    pub measurement: Option<Vec<MeasurementEntry>>,
    /// Attribute order of the utility's main effects.
    pub choice_attributes: Vec<String>,
    pub beta: BTreeMap<String, f64>,
    pub interactions: Vec<InteractionEntry>,
    #[serde(default)]
    pub asc: f64,
    #[serde(default)]
    pub policy: PolicyBlock,
}

/// A parameter file resolved against its own layout.
#[derive(Debug, Clone)]
pub struct LoadedParams {
    pub spec: ModelSpec,
    pub params: ParameterSet,
    pub policy: PolicyBlock,
}

impl ParamsFile {
    pub fn resolve(&self) -> Result<LoadedParams> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let indicators = self
            .measurement
            .as_ref()
            .map(|entries| {
                entries
                    .iter()
                    .map(|e| IndicatorSpec {
                        label: e.label.clone(),
                        latent: e.latent.clone(),
                        fix_loading: e.fix_loading,
                    })
                    .collect()
            })
            .unwrap_or_default();
        let choice_attributes = self
            .choice_attributes
            .iter()
            .map(|s| Attribute::parse(s))
            .collect::<Result<Vec<_>>>()?;
        let spec = ModelSpec {
            latents: self.latents.clone(),
            covariates: self.covariates.clone(),
            indicators,
            choice_attributes,
            interactions: self
                .interactions
                .iter()
                .map(|e| {
                    Ok(InteractionSpec {
                        latent: e.latent.clone(),
                        attribute: Attribute::parse(&e.attribute)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            estimate_asc: false,
        };
        spec.validate().map_err(|e| match e {
            // indicator-free files are legitimate parameter carriers
            Error::Config(msg) if msg.contains("must fix exactly one loading") => {
                Error::Config(msg)
            }
            other => other,
        })?;

        let structural = self
            .latents
            .iter()
            .map(|latent| {
                let row = self.structural.get(latent).ok_or_else(|| {
                    Error::Config(format!("structural block missing latent `{latent}`"))
                })?;
                let mut out = Vec::with_capacity(1 + self.covariates.len());
                out.push(*row.get("const").ok_or_else(|| {
                    Error::Config(format!("structural[{latent}] missing `const`"))
                })?);
                for cov in &self.covariates {
                    out.push(*row.get(cov).ok_or_else(|| {
                        Error::Config(format!("structural[{latent}] missing covariate `{cov}`"))
                    })?);
                }
                for key in row.keys() {
                    if key != "const" && !self.covariates.contains(key) {
                        return Err(Error::Config(format!(
                            "structural[{latent}] has unknown covariate `{key}`"
                        )));
                    }
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;

        let delta_scale = match &self.delta_scale {
            Some(map) => self
                .latents
                .iter()
                .map(|l| {
                    map.get(l).copied().ok_or_else(|| {
                        Error::Config(format!("delta_scale missing latent `{l}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            // unpublished disturbance scales: zero (latents at their means)
            None => vec![0.0; self.latents.len()],
        };

        let measurement = self
            .measurement
            .as_ref()
            .map(|entries| {
                entries
                    .iter()
                    .map(|e| {
                        Ok(IndicatorParams {
                            latent: spec.latent_index(&e.latent)?,
                            loading: e.loading,
                            thresholds: e.thresholds,
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?
            .unwrap_or_default();

        let beta = spec
            .choice_attributes
            .iter()
            .map(|&a| {
                self.beta
                    .get(a.as_str())
                    .map(|&v| (a, v))
                    .ok_or_else(|| Error::Config(format!("beta missing `{}`", a.as_str())))
            })
            .collect::<Result<Vec<_>>>()?;
        for key in self.beta.keys() {
            let attr = Attribute::parse(key)?;
            if !spec.choice_attributes.contains(&attr) {
                return Err(Error::Config(format!(
                    "beta key `{key}` not listed in choice_attributes"
                )));
            }
        }

        let interactions = self
            .interactions
            .iter()
            .map(|e| {
                Ok(Interaction {
                    latent: spec.latent_index(&e.latent)?,
                    attribute: Attribute::parse(&e.attribute)?,
                    coefficient: e.coefficient,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let params = ParameterSet {
            structural,
            delta_scale,
            measurement,
            beta,
            interactions,
            asc: self.asc,
        };
        params.validate(&spec)?;
        Ok(LoadedParams {
            spec,
            params,
            policy: self.policy.clone(),
        })
    }

    /// Rebuilds a file representation from resolved pieces.
    pub fn from_model(spec: &ModelSpec, params: &ParameterSet, policy: &PolicyBlock) -> Self {
        let structural = spec
            .latents
            .iter()
            .enumerate()
            .map(|(l, latent)| {
                let mut row = BTreeMap::new();
                row.insert("const".to_string(), params.structural[l][0]);
                for (c, cov) in spec.covariates.iter().enumerate() {
                    row.insert(cov.clone(), params.structural[l][c + 1]);
                }
                (latent.clone(), row)
            })
            .collect();
        ParamsFile {
            schema_version: SCHEMA_VERSION,
            units: unit_declarations(),
            latents: spec.latents.clone(),
            covariates: spec.covariates.clone(),
            structural,
            delta_scale: Some(
                spec.latents
                    .iter()
                    .cloned()
                    .zip(params.delta_scale.iter().copied())
                    .collect(),
            ),
            measurement: Some(
                spec.indicators
                    .iter()
                    .zip(&params.measurement)
                    .map(|(ind, m)| MeasurementEntry {
                        label: ind.label.clone(),
                        latent: ind.latent.clone(),
                        fix_loading: ind.fix_loading,
                        loading: m.loading,
                        thresholds: m.thresholds,
                    })
                    .collect(),
            ),
            choice_attributes: spec
                .choice_attributes
                .iter()
                .map(|a| a.as_str().to_string())
                .collect(),
            beta: params
                .beta
                .iter()
                .map(|(a, v)| (a.as_str().to_string(), *v))
                .collect(),
            interactions: params
                .interactions
                .iter()
                .map(|i| InteractionEntry {
                    latent: spec.latents[i.latent].clone(),
                    attribute: i.attribute.as_str().to_string(),
                    coefficient: i.coefficient,
                })
                .collect(),
            asc: params.asc,
            policy: policy.clone(),
        }
    }
}

impl From<&PolicyBlock> for PolicyConfig {
    fn from(block: &PolicyBlock) -> Self {
        PolicyConfig {
            opt_out_utility: block.opt_out_utility,
            monte_carlo_draws: None,
            seed: 0,
        }
    }
}

pub fn read_params_file(path: &Path) -> Result<LoadedParams> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::schema(path.display().to_string(), None, e.to_string()))?;
    let file: ParamsFile = serde_json::from_str(&text).map_err(|e| {
        Error::schema(path.display().to_string(), Some(e.line() as u64), e.to_string())
    })?;
    file.resolve()
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::schema(path.display().to_string(), None, e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::schema(path.display().to_string(), Some(e.line() as u64), e.to_string())
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// dataset CSVs
// ---------------------------------------------------------------------------

fn persons_header(n_indicators: usize) -> Vec<String> {
    let mut h = vec!["individual_id".to_string()];
    h.extend(COVARIATE_NAMES.iter().filter(|n| !n.ends_with("_sq") && !n.ends_with("_cu")).map(|n| n.to_string()));
    h.extend((1..=n_indicators).map(|k| format!("ind_{k}")));
    h
}

/// Scalar attribute columns of task and design CSVs; body type travels as
/// its own string column.
const TASK_ATTR_COLUMNS: [Attribute; 12] = [
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
    Attribute::StampDuty,
    Attribute::MarketUptake,
];

fn tasks_header() -> Vec<String> {
    let mut h = vec![
        "individual_id".to_string(),
        "task_index".to_string(),
        "alt".to_string(),
        "body_type".to_string(),
    ];
    h.extend(TASK_ATTR_COLUMNS.iter().map(|a| a.as_str().to_string()));
    h.push("chosen".to_string());
    h
}

fn write_alt_fields(record: &mut Vec<String>, alt: &AlternativeAttributes) {
    record.push(alt.body_type.as_str().to_string());
    for a in &TASK_ATTR_COLUMNS {
        record.push(fmt_float(alt.value(*a)));
    }
}

/// Writes persons.csv and tasks.csv for a dataset.
pub fn write_dataset(
    persons_path: &Path,
    tasks_path: &Path,
    spec: &ModelSpec,
    dataset: &ChoiceDataset,
) -> Result<()> {
    let mut w = csv::Writer::from_path(persons_path)?;
    w.write_record(persons_header(spec.indicators.len()))?;
    for ind in &dataset.individuals {
        let mut rec = vec![ind.id.to_string()];
        for name in COVARIATE_NAMES {
            if name.ends_with("_sq") || name.ends_with("_cu") {
                continue;
            }
            rec.push(fmt_float(ind.covariates.value(name)?));
        }
        for resp in &ind.indicators {
            rec.push(resp.map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(tasks_path)?;
    w.write_record(tasks_header())?;
    for ind in &dataset.individuals {
        for (t, task) in ind.tasks.iter().enumerate() {
            for (a, alt) in [&task.alt1, &task.alt2].into_iter().enumerate() {
                let mut rec = vec![ind.id.to_string(), t.to_string(), (a + 1).to_string()];
                write_alt_fields(&mut rec, alt);
                rec.push(task.chosen.as_str().to_string());
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn header_index(file: &str, header: &csv::StringRecord, name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::schema(file, Some(1), format!("missing column `{name}`")))
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

/// Reads persons.csv + tasks.csv back into a dataset. The expected indicator
/// count comes from the spec; panel length is inferred and must be uniform.
pub fn read_dataset(
    persons_path: &Path,
    tasks_path: &Path,
    spec: &ModelSpec,
) -> Result<ChoiceDataset> {
    let pfile = persons_path.display().to_string();
    let mut rdr = csv::Reader::from_path(persons_path)?;
    let header = rdr.headers()?.clone();
    let id_col = header_index(&pfile, &header, "individual_id")?;
    let mut cov_cols = Vec::new();
    for name in COVARIATE_NAMES {
        if name.ends_with("_sq") || name.ends_with("_cu") {
            continue;
        }
        cov_cols.push((name, header_index(&pfile, &header, name)?));
    }
    let mut ind_cols = Vec::new();
    for k in 1..=spec.indicators.len() {
        ind_cols.push(header_index(&pfile, &header, &format!("ind_{k}"))?);
    }

    let mut order = Vec::new();
    let mut persons: BTreeMap<u64, Individual> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        let id = parse_int(&pfile, line, "individual_id", &record[id_col])?;
        let mut cov = CovariateVector::default();
        for (name, col) in &cov_cols {
            cov.set_value(name, parse_float(&pfile, line, name, &record[*col])?)?;
        }
        // derived powers are recomputed exactly from the stored scaled age
        cov.age_sq = cov.age * cov.age;
        cov.age_cu = cov.age_sq * cov.age;
        let indicators = ind_cols
            .iter()
            .enumerate()
            .map(|(k, col)| {
                let raw = record[*col].trim();
                if raw.is_empty() {
                    Ok(None)
                } else {
                    let v = parse_int(&pfile, line, &format!("ind_{}", k + 1), raw)?;
                    if !(1..=5).contains(&v) {
                        return Err(Error::schema(
                            &pfile,
                            Some(line),
                            format!("ind_{} level {v} outside 1..=5", k + 1),
                        ));
                    }
                    Ok(Some(v as u8))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if persons
            .insert(
                id,
                Individual {
                    id,
                    covariates: cov,
                    indicators,
                    tasks: Vec::new(),
                },
            )
            .is_some()
        {
            return Err(Error::schema(
                &pfile,
                Some(line),
                format!("duplicate individual_id {id}"),
            ));
        }
        order.push(id);
    }

    let tfile = tasks_path.display().to_string();
    let mut rdr = csv::Reader::from_path(tasks_path)?;
    let header = rdr.headers()?.clone();
    let id_col = header_index(&tfile, &header, "individual_id")?;
    let task_col = header_index(&tfile, &header, "task_index")?;
    let alt_col = header_index(&tfile, &header, "alt")?;
    let body_col = header_index(&tfile, &header, "body_type")?;
    let chosen_col = header_index(&tfile, &header, "chosen")?;
    let mut attr_cols = Vec::new();
    for a in &TASK_ATTR_COLUMNS {
        attr_cols.push((*a, header_index(&tfile, &header, a.as_str())?));
    }

    // (id, task_index) -> per-alt attributes
    let mut pending: BTreeMap<(u64, u64), (Option<AlternativeAttributes>, Option<AlternativeAttributes>, Chosen)> =
        BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        let id = parse_int(&tfile, line, "individual_id", &record[id_col])?;
        if !persons.contains_key(&id) {
            return Err(Error::schema(
                &tfile,
                Some(line),
                format!("individual_id {id} not present in persons file"),
            ));
        }
        let task_index = parse_int(&tfile, line, "task_index", &record[task_col])?;
        let alt_no = parse_int(&tfile, line, "alt", &record[alt_col])?;
        if alt_no != 1 && alt_no != 2 {
            return Err(Error::schema(
                &tfile,
                Some(line),
                format!("alt must be 1 or 2, got {alt_no}"),
            ));
        }
        let body = BodyType::parse(record[body_col].trim())
            .map_err(|e| Error::schema(&tfile, Some(line), e.to_string()))?;
        let mut alt = AlternativeAttributes::zeroed();
        alt.body_type = body;
        for (a, col) in &attr_cols {
            let v = parse_float(&tfile, line, a.as_str(), &record[*col])?;
            match a {
                Attribute::Price => alt.price = v,
                Attribute::SetupCost => alt.setup_cost = v,
                Attribute::OperatingCost => alt.operating_cost = v,
                Attribute::RechargeTime => alt.recharge_time = v,
                Attribute::RangeKm => alt.range_km = v,
                Attribute::FastChargeSpacing => alt.fastcharge_spacing = v,
                Attribute::BusLane => alt.bus_lane = v,
                Attribute::RebateUpfront => alt.rebate_upfront = v,
                Attribute::ParkingRebate => alt.parking_rebate = v,
                Attribute::EnergyDiscount => alt.energy_discount = v,
                Attribute::StampDuty => alt.stamp_duty = v,
                Attribute::MarketUptake => alt.market_uptake = v,
                _ => unreachable!(),
            }
        }
        let chosen = Chosen::parse(record[chosen_col].trim())
            .map_err(|e| Error::schema(&tfile, Some(line), e.to_string()))?;
        let entry = pending
            .entry((id, task_index))
            .or_insert((None, None, chosen));
        if entry.2 != chosen {
            return Err(Error::schema(
                &tfile,
                Some(line),
                format!("inconsistent chosen value for individual {id} task {task_index}"),
            ));
        }
        let slot = if alt_no == 1 { &mut entry.0 } else { &mut entry.1 };
        if slot.is_some() {
            return Err(Error::schema(
                &tfile,
                Some(line),
                format!("duplicate alt {alt_no} for individual {id} task {task_index}"),
            ));
        }
        *slot = Some(alt);
    }

    for ((id, task_index), (alt1, alt2, chosen)) in pending {
        let person = persons.get_mut(&id).expect("validated above");
        let (Some(alt1), Some(alt2)) = (alt1, alt2) else {
            return Err(Error::schema(
                &tfile,
                None,
                format!("individual {id} task {task_index} is missing an alternative row"),
            ));
        };
        person.tasks.push(ChoiceTask { alt1, alt2, chosen });
    }

    let individuals: Vec<Individual> = order
        .into_iter()
        .map(|id| persons.remove(&id).expect("inserted above"))
        .collect();
    let tasks_per_individual = individuals
        .first()
        .map(|i| i.tasks.len())
        .unwrap_or_default()
        .max(1);
    let dataset = ChoiceDataset {
        tasks_per_individual,
        individuals,
    };
    if !dataset.individuals.is_empty() {
        dataset.validate(spec)?;
    }
    Ok(dataset)
}

// ---------------------------------------------------------------------------
// design CSV
// ---------------------------------------------------------------------------

pub fn write_design(path: &Path, design: &Design) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![
        "task_index".to_string(),
        "block".to_string(),
        "band".to_string(),
        "alt".to_string(),
        "body_type".to_string(),
    ];
    header.extend(TASK_ATTR_COLUMNS.iter().map(|a| a.as_str().to_string()));
    w.write_record(&header)?;
    for (t, task) in design.tasks.iter().enumerate() {
        for (a, alt) in task.alts.iter().enumerate() {
            let mut rec = vec![
                t.to_string(),
                task.block.to_string(),
                task.band.to_string(),
                (a + 1).to_string(),
            ];
            write_alt_fields(&mut rec, alt);
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_design(path: &Path) -> Result<Design> {
    let file = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    let task_col = header_index(&file, &header, "task_index")?;
    let block_col = header_index(&file, &header, "block")?;
    let band_col = header_index(&file, &header, "band")?;
    let alt_col = header_index(&file, &header, "alt")?;
    let body_col = header_index(&file, &header, "body_type")?;
    let mut attr_cols = Vec::new();
    for a in &TASK_ATTR_COLUMNS {
        attr_cols.push((*a, header_index(&file, &header, a.as_str())?));
    }
    let mut tasks: BTreeMap<u64, DesignTask> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record_line(&record);
        let t = parse_int(&file, line, "task_index", &record[task_col])?;
        let block = parse_int(&file, line, "block", &record[block_col])? as usize;
        let band = parse_int(&file, line, "band", &record[band_col])? as usize;
        let alt_no = parse_int(&file, line, "alt", &record[alt_col])? as usize;
        if alt_no != 1 && alt_no != 2 {
            return Err(Error::schema(&file, Some(line), "alt must be 1 or 2"));
        }
        let mut alt = AlternativeAttributes::zeroed();
        alt.body_type = BodyType::parse(record[body_col].trim())
            .map_err(|e| Error::schema(&file, Some(line), e.to_string()))?;
        for (a, col) in &attr_cols {
            let v = parse_float(&file, line, a.as_str(), &record[*col])?;
            match a {
                Attribute::Price => alt.price = v,
                Attribute::SetupCost => alt.setup_cost = v,
                Attribute::OperatingCost => alt.operating_cost = v,
                Attribute::RechargeTime => alt.recharge_time = v,
                Attribute::RangeKm => alt.range_km = v,
                Attribute::FastChargeSpacing => alt.fastcharge_spacing = v,
                Attribute::BusLane => alt.bus_lane = v,
                Attribute::RebateUpfront => alt.rebate_upfront = v,
                Attribute::ParkingRebate => alt.parking_rebate = v,
                Attribute::EnergyDiscount => alt.energy_discount = v,
                Attribute::StampDuty => alt.stamp_duty = v,
                Attribute::MarketUptake => alt.market_uptake = v,
                _ => unreachable!(),
            }
        }
        let entry = tasks.entry(t).or_insert_with(|| DesignTask {
            block,
            band,
            alts: [AlternativeAttributes::zeroed(), AlternativeAttributes::zeroed()],
        });
        entry.alts[alt_no - 1] = alt;
    }
    let tasks: Vec<DesignTask> = tasks.into_values().collect();
    let n_blocks = tasks.iter().map(|t| t.block + 1).max().unwrap_or(1);
    let tasks_per_respondent = if n_blocks > 0 { tasks.len() / n_blocks } else { 0 };
    Ok(Design {
        n_blocks,
        tasks_per_respondent,
        tasks,
    })
}

// ---------------------------------------------------------------------------
// curves CSV
// ---------------------------------------------------------------------------

pub fn write_curves(path: &Path, result: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["scenario", "cohort", "gender", "x", "probability"])?;
    for p in &result.points {
        w.write_record([
            p.scenario.to_string(),
            p.cohort.clone(),
            match p.gender {
                crate::policy::Gender::Male => "male".to_string(),
                crate::policy::Gender::Female => "female".to_string(),
            },
            fmt_float(p.x),
            fmt_float(p.probability),
        ])?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// priors
// ---------------------------------------------------------------------------

/// Reads a priors JSON ({attribute: coefficient}) for design scoring.
pub fn read_priors(path: &Path) -> Result<Vec<(Attribute, f64)>> {
    let map: BTreeMap<String, f64> = read_json(path)?;
    map.into_iter()
        .map(|(k, v)| Attribute::parse(&k).map(|a| (a, v)))
        .collect()
}

// ---------------------------------------------------------------------------
// run manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileStamp {
    pub path: String,
    pub sha256: String,
}

/// Reproducibility record written once per output directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub inputs: Vec<FileStamp>,
    pub outputs: Vec<FileStamp>,
    pub settings: serde_json::Value,
    pub warnings: Vec<String>,
    pub metadata: serde_json::Value,
    pub wall_clock_seconds: f64,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn stamp(path: &Path) -> Result<FileStamp> {
    Ok(FileStamp {
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            settings: serde_json::Value::Null,
            warnings: Vec::new(),
            metadata: serde_json::Value::Null,
            wall_clock_seconds: 0.0,
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        let mut f = fs::File::create(&path)?;
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        f.write_all(text.as_bytes())?;
        Ok(path)
    }
}
