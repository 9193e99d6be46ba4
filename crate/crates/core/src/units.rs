//! Conversions from natural units (ħ = c = 1) to MeV and picometres, for
//! display only. Energies are taken to be in MeV.

/// ħc in MeV·pm.
pub const HBAR_C_MEV_PM: f64 = 0.1973269804;
/// ħ in MeV·s.
pub const HBAR_MEV_S: f64 = 6.582119569e-22;

/// Length in pm for a natural-unit length (inverse MeV).
pub fn length_pm(l: f64) -> f64 {
    l * HBAR_C_MEV_PM
}

/// Time in seconds for a natural-unit time (inverse MeV).
pub fn time_s(t: f64) -> f64 {
    t * HBAR_MEV_S
}

/// Natural-unit length (inverse MeV) for a length in pm.
pub fn length_from_pm(pm: f64) -> f64 {
    pm / HBAR_C_MEV_PM
}
