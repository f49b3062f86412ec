//! Regenerates the JSON fixtures bundled under fixtures/.
//!
//! Usage: cargo run -p iclv --example regenerate_fixtures -- <fixtures-dir>
//!
//! The 50-person demo dataset is produced separately with
//!   iclv generate --design-spec fixtures/designspec-table2.json \
//!     --params fixtures/sp50/true-params.json --n 50 --seed 7 \
//!     --out-dir fixtures/sp50

use std::collections::BTreeMap;
use std::path::Path;

use iclv::formats::{write_json, ParamsFile, PolicyBlock};
use iclv::model::attributes::Attribute;
use iclv::model::params::{IndicatorParams, Interaction, ParameterSet};
use iclv::model::spec::{IndicatorSpec, InteractionSpec, ModelSpec};
use iclv::policy::target_cohorts;
use iclv::synthetic::{default_priors, DesignSpec};

/// Opt-out utility of the two-option policy choice set. Fit once so the
/// full-rebate scenario lifts the reference cohort by about 21 percentage
/// points, then frozen.
const OPT_OUT_UTILITY: f64 = -2.546727744;

fn published_params() -> (ModelSpec, ParameterSet) {
    let mut spec = ModelSpec::paper_default();
    // the published tables omit the measurement block
    spec.indicators.clear();

    let mut params = ParameterSet::zeros(&spec);
    // structural coefficients per latent, in canonical covariate order:
    // const, age, age^2, age^3, female, certificate, postgraduate,
    // undergraduate, full time, part time, couple+kids, couple no kids,
    // single parent, single, 1 vehicle, 2 vehicles, 3+ vehicles, low income,
    // high income, house, apartment, owner, owner w/ mortgage, renter
    params.structural = vec![
        vec![
            3.97, -3.33, -8.71, 12.2, 0.086, -0.15, 0.444, 0.196, 0.362, 0.122, 0.49, -0.042,
            0.053, -0.128, -0.093, -0.207, -0.317, 0.409, 0.038, -0.047, -0.206, 0.524, 0.349,
            0.379,
        ],
        vec![
            5.41, -9.36, 13.6, -5.61, 0.266, 0.174, 0.355, 0.266, 0.155, -0.065, 0.431, 0.283,
            0.209, 0.363, -0.343, -0.379, -0.217, 0.017, 0.111, -0.161, -0.179, -0.581, -0.585,
            -0.568,
        ],
        vec![
            3.05, 2.58, -27.5, 27.4, 0.347, -0.053, 0.736, 0.157, 0.368, 0.354, 0.665, -0.041,
            0.449, -0.019, -0.635, -0.954, -1.34, 0.396, 0.067, 0.123, -0.05, 0.436, 0.269, 0.205,
        ],
    ];
    params.delta_scale = vec![0.0, 0.0, 0.0];
    params.measurement.clear();
    params.beta = vec![
        (Attribute::Hatchback, 0.49),
        (Attribute::SmallSedan, 0.417),
        (Attribute::SmallSuv, 0.499),
        (Attribute::Price, -7.98),
        (Attribute::SetupCost, -0.038),
        (Attribute::OperatingCost, -0.46),
        (Attribute::RechargeTime, -0.477),
        (Attribute::RebateUpfront, 0.183),
        (Attribute::EnergyDiscount, 0.309),
        (Attribute::MarketUptake, 0.344),
    ];
    params.interactions = vec![
        Interaction {
            latent: 0,
            attribute: Attribute::Price,
            coefficient: 2.38,
        },
        Interaction {
            latent: 1,
            attribute: Attribute::RangeKm,
            coefficient: 0.023,
        },
        Interaction {
            latent: 2,
            attribute: Attribute::LargeSuv,
            coefficient: 0.139,
        },
        Interaction {
            latent: 2,
            attribute: Attribute::LargeSedan,
            coefficient: 0.084,
        },
    ];
    (spec, params)
}

fn demo_params() -> (ModelSpec, ParameterSet) {
    // published structural & choice blocks plus a synthetic measurement
    // block, so the full pipeline (indicators included) can run end to end
    let spec = ModelSpec::paper_default();
    let (_, published) = published_params();
    let mut params = ParameterSet::zeros(&spec);
    params.structural = published.structural.clone();
    params.delta_scale = vec![0.5, 0.5, 0.5];
    let loadings = [1.0, 0.85, 1.0, 0.9, 1.0, 0.8, 0.9, 1.1, 0.95, 1.05];
    for (k, m) in params.measurement.iter_mut().enumerate() {
        m.loading = loadings[k];
        m.thresholds = [1.5, 2.5, 3.5, 4.5];
    }
    params.beta = published.beta.clone();
    params.interactions = published.interactions.clone();
    (spec, params)
}

fn recovery_spec() -> ModelSpec {
    let latents = ["design", "environment", "safety"];
    ModelSpec {
        latents: latents.iter().map(|s| s.to_string()).collect(),
        covariates: vec!["age".into(), "female".into(), "inc_low".into()],
        indicators: (0..6)
            .map(|k| IndicatorSpec {
                label: format!("ind_{}", k + 1),
                latent: latents[k / 2].to_string(),
                fix_loading: k % 2 == 0,
            })
            .collect(),
        // price enters only through the design interaction so every latent
        // location is identified through the choice side
        choice_attributes: vec![
            Attribute::Hatchback,
            Attribute::SmallSedan,
            Attribute::SmallSuv,
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

fn recovery_true_params(spec: &ModelSpec) -> ParameterSet {
    let mut p = ParameterSet::zeros(spec);
    // columns: const, age, female, inc_low
    p.structural = vec![
        vec![2.2, -0.8, 0.25, 0.45],
        vec![2.8, 0.6, 0.35, -0.3],
        vec![1.8, 0.9, 0.5, 0.3],
    ];
    p.delta_scale = vec![0.5, 0.5, 0.5];
    let loadings = [1.0, 0.85, 1.0, 1.2, 1.0, 0.8];
    for (k, m) in p.measurement.iter_mut().enumerate() {
        m.loading = loadings[k];
        m.thresholds = [0.5, 1.5, 2.5, 3.5];
    }
    p.beta = vec![
        (Attribute::Hatchback, 0.4),
        (Attribute::SmallSedan, 0.3),
        (Attribute::SmallSuv, 0.45),
        (Attribute::SetupCost, -0.06),
        (Attribute::OperatingCost, -0.05),
        (Attribute::RechargeTime, -0.6),
        (Attribute::RebateUpfront, 0.25),
        (Attribute::EnergyDiscount, 0.35),
        (Attribute::MarketUptake, 0.5),
    ];
    // net price sensitivity is perception-driven: -0.35 * design
    p.interactions[0].coefficient = -0.35;
    p.interactions[1].coefficient = 0.06;
    p.interactions[2].coefficient = 0.15;
    p.interactions[3].coefficient = 0.1;
    p
}

fn main() -> iclv::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "fixtures".to_string());
    let dir = Path::new(&dir);
    std::fs::create_dir_all(dir.join("sp50"))?;

    let policy = PolicyBlock {
        opt_out_utility: OPT_OUT_UTILITY,
        baseline_market_uptake: 0.01,
    };

    let (spec, params) = published_params();
    let file = ParamsFile::from_model(&spec, &params, &policy);
    // the source tables publish neither disturbance scales nor measurement
    let file = ParamsFile {
        delta_scale: None,
        measurement: None,
        ..file
    };
    write_json(&dir.join("paper-params.json"), &file)?;

    let (demo_spec, demo) = demo_params();
    write_json(
        &dir.join("demo-params.json"),
        &ParamsFile::from_model(&demo_spec, &demo, &policy),
    )?;

    write_json(&dir.join("cohorts-table5.json"), &target_cohorts())?;
    write_json(&dir.join("designspec-table2.json"), &DesignSpec::survey_default())?;

    let priors: BTreeMap<String, f64> = default_priors()
        .into_iter()
        .map(|(a, v)| (a.as_str().to_string(), v))
        .collect();
    write_json(&dir.join("priors-default.json"), &priors)?;

    let rec_spec = recovery_spec();
    rec_spec.validate()?;
    let rec_params = recovery_true_params(&rec_spec);
    rec_params.validate(&rec_spec)?;
    write_json(
        &dir.join("sp50").join("true-params.json"),
        &ParamsFile::from_model(&rec_spec, &rec_params, &PolicyBlock::default()),
    )?;
    write_json(&dir.join("sp50").join("spec.json"), &rec_spec)?;
    write_json(
        &dir.join("sp50").join("settings.json"),
        &iclv::estimation::EstimationSettings {
            max_iterations: 400,
            convergence_tol: 1e-3,
            draw_settings: iclv::draws::DrawSettings {
                n_draws: 200,
                seed: 1,
                ..Default::default()
            },
            ..Default::default()
        },
    )?;

    println!("fixtures written to {}", dir.display());
    Ok(())
}
