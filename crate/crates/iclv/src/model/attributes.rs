//! Alternative attributes for the stated-preference vehicle alternatives.
//!
//! All magnitudes are stored in the model's scaled units, declared once in
//! [`AlternativeAttributes`] and echoed by the file formats so that
//! coefficient values and attribute values always agree:
//!
//! * price: dollars / 100,000
//! * setup cost: dollars / 1,000
//! * operating cost: cents per km (unscaled)
//! * recharge time: hours / 10
//! * range: km / 100
//! * upfront rebate: dollars / 10,000
//! * energy-bill discount: fraction in [0, 1]
//! * market uptake: fraction in [0, 1]
//! * fast-charge spacing: km / 10
//! * parking rebate: dollars / 1,000
//! * stamp-duty discount: fraction in [0, 1]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vehicle body type; six levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyType {
    Hatchback,
    SmallSedan,
    LargeSedan,
    SmallSuv,
    LargeSuv,
    Minivan,
}

impl BodyType {
    pub const ALL: [BodyType; 6] = [
        BodyType::Hatchback,
        BodyType::SmallSedan,
        BodyType::LargeSedan,
        BodyType::SmallSuv,
        BodyType::LargeSuv,
        BodyType::Minivan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BodyType::Hatchback => "hatchback",
            BodyType::SmallSedan => "small_sedan",
            BodyType::LargeSedan => "large_sedan",
            BodyType::SmallSuv => "small_suv",
            BodyType::LargeSuv => "large_suv",
            BodyType::Minivan => "minivan",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        BodyType::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown body type `{s}`")))
    }
}

/// One utility-relevant column of an alternative.
///
/// Body-type levels appear as 0/1 dummies; everything else is a scaled
/// magnitude. `beta` maps and interaction terms key on this enum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Hatchback,
    SmallSedan,
    LargeSedan,
    SmallSuv,
    LargeSuv,
    Minivan,
    Price,
    SetupCost,
    OperatingCost,
    RechargeTime,
    RangeKm,
    RebateUpfront,
    EnergyDiscount,
    MarketUptake,
    FastChargeSpacing,
    BusLane,
    ParkingRebate,
    StampDuty,
}

impl Attribute {
    pub const ALL: [Attribute; 18] = [
        Attribute::Hatchback,
        Attribute::SmallSedan,
        Attribute::LargeSedan,
        Attribute::SmallSuv,
        Attribute::LargeSuv,
        Attribute::Minivan,
        Attribute::Price,
        Attribute::SetupCost,
        Attribute::OperatingCost,
        Attribute::RechargeTime,
        Attribute::RangeKm,
        Attribute::RebateUpfront,
        Attribute::EnergyDiscount,
        Attribute::MarketUptake,
        Attribute::FastChargeSpacing,
        Attribute::BusLane,
        Attribute::ParkingRebate,
        Attribute::StampDuty,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Hatchback => "hatchback",
            Attribute::SmallSedan => "small_sedan",
            Attribute::LargeSedan => "large_sedan",
            Attribute::SmallSuv => "small_suv",
            Attribute::LargeSuv => "large_suv",
            Attribute::Minivan => "minivan",
            Attribute::Price => "price",
            Attribute::SetupCost => "setup_cost",
            Attribute::OperatingCost => "operating_cost",
            Attribute::RechargeTime => "recharge_time",
            Attribute::RangeKm => "range_km",
            Attribute::RebateUpfront => "rebate_upfront",
            Attribute::EnergyDiscount => "energy_discount",
            Attribute::MarketUptake => "market_uptake",
            Attribute::FastChargeSpacing => "fastcharge_spacing",
            Attribute::BusLane => "bus_lane",
            Attribute::ParkingRebate => "parking_rebate",
            Attribute::StampDuty => "stamp_duty",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown attribute `{s}`")))
    }
}

/// Attributes of one EV alternative in a choice task, in scaled units.
///
/// The last four fields are carried for dataset fidelity; the estimated
/// choice model of the source data excludes them, but designs and datasets
/// still record them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlternativeAttributes {
    pub body_type: BodyType,
    /// Dollars / 100,000.
    pub price: f64,
    /// Dollars / 1,000.
    pub setup_cost: f64,
    /// Cents per km.
    pub operating_cost: f64,
    /// Hours / 10.
    pub recharge_time: f64,
    /// Km / 100.
    pub range_km: f64,
    /// Dollars / 10,000.
    pub rebate_upfront: f64,
    /// Fraction in [0, 1].
    pub energy_discount: f64,
    /// Fraction in [0, 1].
    pub market_uptake: f64,
    /// Km / 10 (carried, unused in utility).
    pub fastcharge_spacing: f64,
    /// 0/1 flag (carried, unused in utility).
    pub bus_lane: f64,
    /// Dollars / 1,000 (carried, unused in utility).
    pub parking_rebate: f64,
    /// Fraction in [0, 1] (carried, unused in utility).
    pub stamp_duty: f64,
}

impl AlternativeAttributes {
    /// Value of one utility column for this alternative.
    pub fn value(&self, attribute: Attribute) -> f64 {
        match attribute {
            Attribute::Hatchback => (self.body_type == BodyType::Hatchback) as u8 as f64,
            Attribute::SmallSedan => (self.body_type == BodyType::SmallSedan) as u8 as f64,
            Attribute::LargeSedan => (self.body_type == BodyType::LargeSedan) as u8 as f64,
            Attribute::SmallSuv => (self.body_type == BodyType::SmallSuv) as u8 as f64,
            Attribute::LargeSuv => (self.body_type == BodyType::LargeSuv) as u8 as f64,
            Attribute::Minivan => (self.body_type == BodyType::Minivan) as u8 as f64,
            Attribute::Price => self.price,
            Attribute::SetupCost => self.setup_cost,
            Attribute::OperatingCost => self.operating_cost,
            Attribute::RechargeTime => self.recharge_time,
            Attribute::RangeKm => self.range_km,
            Attribute::RebateUpfront => self.rebate_upfront,
            Attribute::EnergyDiscount => self.energy_discount,
            Attribute::MarketUptake => self.market_uptake,
            Attribute::FastChargeSpacing => self.fastcharge_spacing,
            Attribute::BusLane => self.bus_lane,
            Attribute::ParkingRebate => self.parking_rebate,
            Attribute::StampDuty => self.stamp_duty,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("price", self.price),
            ("setup_cost", self.setup_cost),
            ("operating_cost", self.operating_cost),
            ("recharge_time", self.recharge_time),
            ("range_km", self.range_km),
            ("rebate_upfront", self.rebate_upfront),
            ("fastcharge_spacing", self.fastcharge_spacing),
            ("parking_rebate", self.parking_rebate),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "attribute {name} must be finite and >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [
            ("energy_discount", self.energy_discount),
            ("market_uptake", self.market_uptake),
            ("stamp_duty", self.stamp_duty),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!(
                    "attribute {name} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(())
    }

    /// A zero-attribute placeholder (all magnitudes 0, minivan body).
    pub fn zeroed() -> Self {
        AlternativeAttributes {
            body_type: BodyType::Minivan,
            price: 0.0,
            setup_cost: 0.0,
            operating_cost: 0.0,
            recharge_time: 0.0,
            range_km: 0.0,
            rebate_upfront: 0.0,
            energy_discount: 0.0,
            market_uptake: 0.0,
            fastcharge_spacing: 0.0,
            bus_lane: 0.0,
            parking_rebate: 0.0,
            stamp_duty: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_type_dummies_are_exclusive() {
        let mut alt = AlternativeAttributes::zeroed();
        alt.body_type = BodyType::LargeSedan;
        let sum: f64 = Attribute::ALL[..6].iter().map(|a| alt.value(*a)).sum();
        assert_eq!(sum, 1.0);
        assert_eq!(alt.value(Attribute::LargeSedan), 1.0);
    }

    #[test]
    fn attribute_names_round_trip() {
        for a in Attribute::ALL {
            assert_eq!(Attribute::parse(a.as_str()).unwrap(), a);
        }
        assert!(Attribute::parse("no_such_attr").is_err());
    }

    #[test]
    fn fraction_bounds_enforced() {
        let mut alt = AlternativeAttributes::zeroed();
        alt.energy_discount = 1.2;
        assert!(alt.validate().is_err());
    }
}
