//! Fixed instances shared by the benchmarks.

use urllc_core::harness::{build_scenario, Template};
use urllc_core::{ChannelModel, Gains, Scenario};

/// Default geometry: robot 200 m, actuator 500 m, 50 W·symbols.
pub fn default_scenario() -> Scenario {
    build_scenario(&ChannelModel::default(), &Template::default(), None)
        .expect("default template is valid")
}

/// Small instance with hand-set gains.
pub fn tiny_scenario() -> Scenario {
    let gains = Gains {
        h1: 20.0,
        h2: 4.0,
        h3: 10.0,
    };
    Scenario::new(32, 40, 30.0, 1e-3, gains).expect("tiny instance is valid")
}
