//! Two-device problem instances.

use crate::error::{Error, Result};

/// Normalised channel gains (1/W): BS→robot, BS→actuator, robot→actuator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

/// One downlink instance: a robot (device 1) with a reliability constraint
/// and an actuator (device 2) whose error is minimised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    data_bits: u32,
    budget_symbols: u32,
    energy_budget: f64,
    eps1_max: f64,
    gains: Gains,
}

impl Scenario {
    /// Validated scenario. Requires `h1 > h2`, i.e. the robot is the
    /// stronger receiver.
    ///
    /// `energy_budget` is in watt·symbols (joules times bandwidth).
    pub fn new(
        data_bits: u32,
        budget_symbols: u32,
        energy_budget: f64,
        eps1_max: f64,
        gains: Gains,
    ) -> Result<Self> {
        if !(gains.h1 > gains.h2) {
            return Err(Error::InvalidScenario(format!(
                "robot gain h1 = {} must exceed actuator gain h2 = {}",
                gains.h1, gains.h2
            )));
        }
        Self::new_unordered(data_bits, budget_symbols, energy_budget, eps1_max, gains)
    }

    /// Like [`Scenario::new`] but without the gain ordering requirement.
    /// Faded channel draws can swap which device is stronger.
    pub fn new_unordered(
        data_bits: u32,
        budget_symbols: u32,
        energy_budget: f64,
        eps1_max: f64,
        gains: Gains,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if data_bits < 1 {
            return bad("packet size must be at least one bit".into());
        }
        if budget_symbols < 2 {
            return bad(format!("need at least 2 symbols, got {budget_symbols}"));
        }
        if !(energy_budget > 0.0 && energy_budget.is_finite()) {
            return bad(format!(
                "energy budget must be positive, got {energy_budget}"
            ));
        }
        if !(eps1_max > 0.0 && eps1_max < 0.1) {
            return bad(format!("robot error target {eps1_max} outside (0, 0.1)"));
        }
        for (name, h) in [("h1", gains.h1), ("h2", gains.h2), ("h3", gains.h3)] {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("{name} must be positive, got {h}"));
            }
        }
        Ok(Scenario {
            data_bits,
            budget_symbols,
            energy_budget,
            eps1_max,
            gains,
        })
    }

    pub fn data_bits(&self) -> u32 {
        self.data_bits
    }

    pub fn budget_symbols(&self) -> u32 {
        self.budget_symbols
    }

    pub fn energy_budget(&self) -> f64 {
        self.energy_budget
    }

    pub fn eps1_max(&self) -> f64 {
        self.eps1_max
    }

    pub fn gains(&self) -> Gains {
        self.gains
    }

    pub fn h1(&self) -> f64 {
        self.gains.h1
    }

    pub fn h2(&self) -> f64 {
        self.gains.h2
    }

    pub fn h3(&self) -> f64 {
        self.gains.h3
    }

    pub fn with_budget_symbols(&self, m: u32) -> Result<Self> {
        Self::new_unordered(
            self.data_bits,
            m,
            self.energy_budget,
            self.eps1_max,
            self.gains,
        )
    }

    pub fn with_energy_budget(&self, e: f64) -> Result<Self> {
        Self::new_unordered(
            self.data_bits,
            self.budget_symbols,
            e,
            self.eps1_max,
            self.gains,
        )
    }

    pub fn with_data_bits(&self, d: u32) -> Result<Self> {
        Self::new_unordered(
            d,
            self.budget_symbols,
            self.energy_budget,
            self.eps1_max,
            self.gains,
        )
    }
}
