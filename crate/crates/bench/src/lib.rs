//! Shared fixtures for the criterion benches.

use std::f64::consts::TAU;

use kleinbarrier::{mode_from_n2, BarrierSetup, IncidentMode};

/// `m = 1`, `v = 10`, `wL = 2π`.
pub fn reference_setup() -> BarrierSetup {
    BarrierSetup::from_dimensionless(1.0, 10.0, TAU).expect("valid setup")
}

/// `count` modes spread over the open tunneling interval of `setup`.
pub fn tunneling_modes(setup: &BarrierSetup, count: usize) -> Vec<IncidentMode> {
    let v = setup.v();
    let lo = (v / 2.0 - 1.0).max(0.0);
    let hi = v / 2.0 + 1.0;
    (0..count)
        .map(|i| {
            let n2 = lo + (hi - lo) * (i as f64 + 0.5) / count as f64;
            mode_from_n2(setup, n2).expect("propagating mode")
        })
        .collect()
}

/// `count` modes from the Klein zone up to `n² = v/2 + 3`.
pub fn mixed_modes(setup: &BarrierSetup, count: usize) -> Vec<IncidentMode> {
    let top = setup.v() / 2.0 + 3.0;
    (1..=count)
        .map(|i| mode_from_n2(setup, top * i as f64 / count as f64).expect("propagating mode"))
        .collect()
}
