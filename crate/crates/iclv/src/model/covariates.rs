//! Socio-demographic covariates entering the structural equations.
//!
//! Age is stored as years / 100 with exact square and cube powers; all other
//! fields are 0/1 dummies against the reference categories of the source
//! survey coding (education "other", employment other, household other,
//! no vehicle, middle income, accommodation other, tenure other).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical covariate column names, in the order used by structural
/// coefficient matrices (the constant column is implicit and comes first).
pub const COVARIATE_NAMES: [&str; 23] = [
    "age",
    "age_sq",
    "age_cu",
    "female",
    "edu_certificate",
    "edu_postgraduate",
    "edu_undergraduate",
    "emp_full_time",
    "emp_part_time",
    "hh_couple_kids",
    "hh_couple_no_kids",
    "hh_single_parent",
    "hh_single",
    "veh_one",
    "veh_two",
    "veh_three_plus",
    "inc_low",
    "inc_high",
    "acc_house",
    "acc_apartment",
    "ten_owner",
    "ten_owner_mortgage",
    "ten_renter",
];

/// One respondent's covariates, scaled and dummy-coded.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CovariateVector {
    /// Years / 100.
    pub age: f64,
    pub age_sq: f64,
    pub age_cu: f64,
    pub female: f64,
    pub edu_certificate: f64,
    pub edu_postgraduate: f64,
    pub edu_undergraduate: f64,
    pub emp_full_time: f64,
    pub emp_part_time: f64,
    pub hh_couple_kids: f64,
    pub hh_couple_no_kids: f64,
    pub hh_single_parent: f64,
    pub hh_single: f64,
    pub veh_one: f64,
    pub veh_two: f64,
    pub veh_three_plus: f64,
    pub inc_low: f64,
    pub inc_high: f64,
    pub acc_house: f64,
    pub acc_apartment: f64,
    pub ten_owner: f64,
    pub ten_owner_mortgage: f64,
    pub ten_renter: f64,
}

impl CovariateVector {
    /// Sets the age fields from age in years (scaled by 1/100, with exact
    /// powers).
    pub fn set_age_years(&mut self, years: f64) {
        let a = years / 100.0;
        self.age = a;
        self.age_sq = a * a;
        self.age_cu = a * a * a;
    }

    pub fn value(&self, name: &str) -> Result<f64> {
        let v = match name {
            "age" => self.age,
            "age_sq" => self.age_sq,
            "age_cu" => self.age_cu,
            "female" => self.female,
            "edu_certificate" => self.edu_certificate,
            "edu_postgraduate" => self.edu_postgraduate,
            "edu_undergraduate" => self.edu_undergraduate,
            "emp_full_time" => self.emp_full_time,
            "emp_part_time" => self.emp_part_time,
            "hh_couple_kids" => self.hh_couple_kids,
            "hh_couple_no_kids" => self.hh_couple_no_kids,
            "hh_single_parent" => self.hh_single_parent,
            "hh_single" => self.hh_single,
            "veh_one" => self.veh_one,
            "veh_two" => self.veh_two,
            "veh_three_plus" => self.veh_three_plus,
            "inc_low" => self.inc_low,
            "inc_high" => self.inc_high,
            "acc_house" => self.acc_house,
            "acc_apartment" => self.acc_apartment,
            "ten_owner" => self.ten_owner,
            "ten_owner_mortgage" => self.ten_owner_mortgage,
            "ten_renter" => self.ten_renter,
            other => return Err(Error::Config(format!("unknown covariate `{other}`"))),
        };
        Ok(v)
    }

    pub fn set_value(&mut self, name: &str, v: f64) -> Result<()> {
        match name {
            "age" => self.age = v,
            "age_sq" => self.age_sq = v,
            "age_cu" => self.age_cu = v,
            "female" => self.female = v,
            "edu_certificate" => self.edu_certificate = v,
            "edu_postgraduate" => self.edu_postgraduate = v,
            "edu_undergraduate" => self.edu_undergraduate = v,
            "emp_full_time" => self.emp_full_time = v,
            "emp_part_time" => self.emp_part_time = v,
            "hh_couple_kids" => self.hh_couple_kids = v,
            "hh_couple_no_kids" => self.hh_couple_no_kids = v,
            "hh_single_parent" => self.hh_single_parent = v,
            "hh_single" => self.hh_single = v,
            "veh_one" => self.veh_one = v,
            "veh_two" => self.veh_two = v,
            "veh_three_plus" => self.veh_three_plus = v,
            "inc_low" => self.inc_low = v,
            "inc_high" => self.inc_high = v,
            "acc_house" => self.acc_house = v,
            "acc_apartment" => self.acc_apartment = v,
            "ten_owner" => self.ten_owner = v,
            "ten_owner_mortgage" => self.ten_owner_mortgage = v,
            "ten_renter" => self.ten_renter = v,
            other => return Err(Error::Config(format!("unknown covariate `{other}`"))),
        }
        Ok(())
    }

    /// Checks dummy exclusivity per group, the 0/1 coding and the age
    /// invariants (age in (0, 1.2], exact powers).
    pub fn validate(&self) -> Result<()> {
        if !(self.age > 0.0 && self.age <= 1.2) {
            return Err(Error::Config(format!(
                "scaled age must lie in (0, 1.2], got {}",
                self.age
            )));
        }
        let sq = self.age * self.age;
        if self.age_sq != sq || self.age_cu != sq * self.age {
            return Err(Error::Config(
                "age_sq/age_cu must equal exact powers of age".into(),
            ));
        }
        let groups: [&[f64]; 8] = [
            &[self.female],
            &[
                self.edu_certificate,
                self.edu_postgraduate,
                self.edu_undergraduate,
            ],
            &[self.emp_full_time, self.emp_part_time],
            &[
                self.hh_couple_kids,
                self.hh_couple_no_kids,
                self.hh_single_parent,
                self.hh_single,
            ],
            &[self.veh_one, self.veh_two, self.veh_three_plus],
            &[self.inc_low, self.inc_high],
            &[self.acc_house, self.acc_apartment],
            &[self.ten_owner, self.ten_owner_mortgage, self.ten_renter],
        ];
        for group in groups {
            let mut sum = 0.0;
            for &d in group {
                if d != 0.0 && d != 1.0 {
                    return Err(Error::Config(format!("dummy value must be 0 or 1, got {d}")));
                }
                sum += d;
            }
            if sum > 1.0 {
                return Err(Error::Config(
                    "at most one dummy per group may be set".into(),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn age_powers_are_exact() {
        let mut z = CovariateVector::default();
        z.set_age_years(50.0);
        assert_eq!(z.age, 0.5);
        assert_eq!(z.age_sq, 0.25);
        assert_eq!(z.age_cu, 0.125);
        assert!(z.validate().is_ok());
    }

    #[test]
    fn exclusive_dummies_rejected() {
        let mut z = CovariateVector::default();
        z.set_age_years(30.0);
        z.ten_owner = 1.0;
        z.ten_renter = 1.0;
        assert!(z.validate().is_err());
    }

    #[test]
    fn every_canonical_name_resolves() {
        let z = CovariateVector::default();
        for name in COVARIATE_NAMES {
            z.value(name).unwrap();
        }
        assert!(z.value("height").is_err());
    }
}
