//! Coulomb-counting battery accounting and lifetime estimation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard upper bound on repeller draw, mA.
pub const MAX_REPELLER_CURRENT_MA: f64 = 200.0;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("current and duration must be non-negative, got {current_ma} mA for {duration_s} s")]
    NegativeInput { current_ma: f64, duration_s: f64 },
    #[error("duty fractions must sum to 1, got {0}")]
    InvalidDuty(f64),
    #[error("invalid power profile: {0}")]
    InvalidProfile(String),
    #[error("invalid battery: {0}")]
    InvalidBattery(String),
}

/// Current draw per operating mode, mA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub sleep_ma: f64,
    pub rx_ma: f64,
    pub tx_ma: f64,
    pub repeller_ma: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        Self {
            sleep_ma: 0.05,
            rx_ma: 30.0,
            tx_ma: 35.0,
            repeller_ma: 200.0,
        }
    }
}

impl PowerProfile {
    pub fn validate(&self) -> Result<(), EnergyError> {
        if !(self.sleep_ma < self.rx_ma && self.rx_ma <= self.tx_ma) {
            return Err(EnergyError::InvalidProfile(format!(
                "expected sleep < rx <= tx, got {} / {} / {}",
                self.sleep_ma, self.rx_ma, self.tx_ma
            )));
        }
        if self.repeller_ma > MAX_REPELLER_CURRENT_MA {
            return Err(EnergyError::InvalidProfile(format!(
                "repeller draw {} mA exceeds the {} mA bound",
                self.repeller_ma, MAX_REPELLER_CURRENT_MA
            )));
        }
        Ok(())
    }
}

/// A battery tracked by charge in mAh, optionally solar-assisted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Battery {
    pub capacity_mah: f64,
    pub charge_mah: f64,
    pub solar_recharge_ma: f64,
}

impl Battery {
    pub fn new(capacity_mah: f64) -> Result<Self, EnergyError> {
        if !(capacity_mah >= 0.0) {
            return Err(EnergyError::InvalidBattery(format!(
                "capacity must be non-negative, got {capacity_mah}"
            )));
        }
        Ok(Self {
            capacity_mah,
            charge_mah: capacity_mah,
            solar_recharge_ma: 0.0,
        })
    }

    pub fn with_solar(mut self, solar_recharge_ma: f64) -> Self {
        self.solar_recharge_ma = solar_recharge_ma;
        self
    }

    pub fn is_depleted(&self) -> bool {
        self.charge_mah <= 0.0
    }

    /// Removes the given charge, flooring at zero.
    pub fn drain_mah(&mut self, mah: f64) {
        self.charge_mah = (self.charge_mah - mah).max(0.0);
    }
}

/// Draws `current_ma` for `duration_s` from the battery. Charge floors at
/// zero; the battery reports depleted once it gets there.
pub fn consume(battery: &mut Battery, current_ma: f64, duration_s: f64) -> Result<(), EnergyError> {
    if current_ma < 0.0 || duration_s < 0.0 {
        return Err(EnergyError::NegativeInput {
            current_ma,
            duration_s,
        });
    }
    battery.drain_mah(current_ma * duration_s / 3600.0);
    Ok(())
}

/// Fraction of time spent in each power mode. Must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DutyCycle {
    pub sleep: f64,
    pub rx: f64,
    pub tx: f64,
    pub repeller: f64,
}

impl DutyCycle {
    pub fn sleeping(sleep: f64, tx: f64) -> Self {
        Self {
            sleep,
            rx: 0.0,
            tx,
            repeller: 0.0,
        }
    }

    fn total(&self) -> f64 {
        self.sleep + self.rx + self.tx + self.repeller
    }
}

/// Outcome of a lifetime estimate: either a finite horizon in hours or
/// indefinitely sustained operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Lifetime {
    Hours(f64),
    Indefinite,
}

impl Lifetime {
    pub fn hours(&self) -> Option<f64> {
        match self {
            Lifetime::Hours(h) => Some(*h),
            Lifetime::Indefinite => None,
        }
    }
}

impl std::fmt::Display for Lifetime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Lifetime::Hours(h) => write!(f, "{h:.1} h"),
            Lifetime::Indefinite => write!(f, "indefinite"),
        }
    }
}

/// Estimated battery lifetime for a weighted-average current draw.
/// Solar input (when configured) is derated by `daylight_fraction` of each
/// 24 h period; a net draw at or below zero means indefinite operation.
pub fn lifetime_estimate(
    battery: &Battery,
    profile: &PowerProfile,
    duty: &DutyCycle,
    daylight_fraction: f64,
) -> Result<Lifetime, EnergyError> {
    let total = duty.total();
    if (total - 1.0).abs() > 1e-9 {
        return Err(EnergyError::InvalidDuty(total));
    }
    let avg_ma = duty.sleep * profile.sleep_ma
        + duty.rx * profile.rx_ma
        + duty.tx * profile.tx_ma
        + duty.repeller * profile.repeller_ma;
    let net_ma = if battery.solar_recharge_ma > 0.0 {
        avg_ma - battery.solar_recharge_ma * daylight_fraction
    } else {
        avg_ma
    };
    if net_ma <= 0.0 {
        return Ok(Lifetime::Indefinite);
    }
    Ok(Lifetime::Hours(battery.capacity_mah / net_ma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn consume_is_plain_coulomb_counting() {
        let mut b = Battery::new(2000.0).unwrap();
        consume(&mut b, 200.0, 3600.0).unwrap();
        assert_relative_eq!(b.charge_mah, 1800.0, epsilon = 1e-9);
        consume(&mut b, 0.0, 9999.0).unwrap();
        assert_relative_eq!(b.charge_mah, 1800.0, epsilon = 1e-9);
    }

    #[test]
    fn consume_floors_at_zero_and_flags_depleted() {
        let mut b = Battery::new(10.0).unwrap();
        consume(&mut b, 200.0, 3600.0).unwrap();
        assert_eq!(b.charge_mah, 0.0);
        assert!(b.is_depleted());
    }

    #[test]
    fn consume_rejects_negative_inputs() {
        let mut b = Battery::new(10.0).unwrap();
        assert!(consume(&mut b, -1.0, 1.0).is_err());
        assert!(consume(&mut b, 1.0, -1.0).is_err());
    }

    #[test]
    fn lifetime_pure_sleep() {
        let b = Battery::new(2000.0).unwrap();
        let p = PowerProfile::default();
        let duty = DutyCycle::sleeping(1.0, 0.0);
        let lt = lifetime_estimate(&b, &p, &duty, 0.5).unwrap();
        assert_relative_eq!(lt.hours().unwrap(), 40_000.0, epsilon = 1e-6);
    }

    #[test]
    fn lifetime_weighted_duty() {
        let b = Battery::new(2000.0).unwrap();
        let p = PowerProfile::default();
        let duty = DutyCycle::sleeping(0.999, 0.001);
        let lt = lifetime_estimate(&b, &p, &duty, 0.5).unwrap();
        // avg = 0.999 * 0.05 + 0.001 * 35 = 0.08495 mA
        assert_relative_eq!(lt.hours().unwrap(), 2000.0 / 0.08495, epsilon = 1e-6);
        // Comfortably more than a year.
        assert!(lt.hours().unwrap() > 8760.0);
    }

    #[test]
    fn lifetime_with_strong_solar_is_indefinite() {
        let b = Battery::new(2000.0).unwrap().with_solar(10.0);
        let p = PowerProfile::default();
        let duty = DutyCycle::sleeping(0.999, 0.001);
        assert_eq!(
            lifetime_estimate(&b, &p, &duty, 0.5).unwrap(),
            Lifetime::Indefinite
        );
    }

    #[test]
    fn lifetime_zero_draw_is_indefinite() {
        let b = Battery::new(2000.0).unwrap();
        let p = PowerProfile {
            sleep_ma: 0.0,
            rx_ma: 30.0,
            tx_ma: 35.0,
            repeller_ma: 200.0,
        };
        let duty = DutyCycle::sleeping(1.0, 0.0);
        assert_eq!(
            lifetime_estimate(&b, &p, &duty, 0.5).unwrap(),
            Lifetime::Indefinite
        );
    }

    #[test]
    fn lifetime_rejects_bad_duty() {
        let b = Battery::new(2000.0).unwrap();
        let p = PowerProfile::default();
        let duty = DutyCycle::sleeping(0.9, 0.0);
        assert!(matches!(
            lifetime_estimate(&b, &p, &duty, 0.5),
            Err(EnergyError::InvalidDuty(_))
        ));
    }

    #[test]
    fn profile_bounds_enforced() {
        assert!(PowerProfile::default().validate().is_ok());
        assert!(PowerProfile {
            repeller_ma: 250.0,
            ..PowerProfile::default()
        }
        .validate()
        .is_err());
        assert!(PowerProfile {
            sleep_ma: 50.0,
            ..PowerProfile::default()
        }
        .validate()
        .is_err());
    }

    proptest! {
        /// Draining never increases charge and never goes negative.
        #[test]
        fn charge_monotone_non_increasing(
            capacity in 1.0f64..5000.0,
            draws in proptest::collection::vec((0.0f64..300.0, 0.0f64..5000.0), 0..20),
        ) {
            let mut b = Battery::new(capacity).unwrap();
            let mut prev = b.charge_mah;
            for (ma, secs) in draws {
                consume(&mut b, ma, secs).unwrap();
                prop_assert!(b.charge_mah <= prev);
                prop_assert!(b.charge_mah >= 0.0);
                prev = b.charge_mah;
            }
        }
    }
}
