//! Classical traversal time, stationary-phase (phase) time and its limits.
//!
//! The canonical output is the dimensionless ratio `t_φ/τ` with
//! `τ = L·E/k` (barrier width over incident group velocity) and
//! `t_φ = dφ/dE`, `φ = arg T`. In `n`, `t_φ/τ = (dφ/dn)/(wL)`.

mod nr;

pub use nr::{nr_phase_time, nr_point, nr_transmission, NRPoint, NRReference};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    barrier_channel, classify_mode, edge_mode, mode_from_kinetic, mode_from_n2, zone_gaps,
    BarrierSetup, Edge, IncidentMode, Zone,
};
use crate::numeric::{richardson_central, sinh_cosh_excess, sinhc};
use crate::scattering::match_boundaries;

/// Relative tolerance between successive Richardson estimates.
pub const RICHARDSON_TOLERANCE: f64 = 1e-8;
const MAX_HALVINGS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Closed-form ratio `f/g` in the tunneling zone.
    Eq7,
    /// Richardson-extrapolated central difference of `arg T` from exact matching.
    NumericDerivative,
    /// Leading term of the ratio as `ρ(n)wL → 0`.
    SmallRho,
    /// Edge value of the leading term, independent of the width.
    EdgeLimit,
    /// Analytic derivative of the exact linear-channel solution on an edge.
    EdgeExact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimeResult {
    pub tau: f64,
    pub t_phi: f64,
    /// `t_φ/τ`; `None` when `L = 0`, where both vanish.
    pub ratio: Option<f64>,
    pub method: Method,
}

impl PhaseTimeResult {
    fn from_ratio(tau: f64, ratio: f64, method: Method) -> Self {
        if tau == 0.0 {
            return PhaseTimeResult {
                tau,
                t_phi: 0.0,
                ratio: None,
                method,
            };
        }
        PhaseTimeResult {
            tau,
            t_phi: ratio * tau,
            ratio: Some(ratio),
            method,
        }
    }

    fn from_time(tau: f64, t_phi: f64, method: Method) -> Self {
        PhaseTimeResult {
            tau,
            t_phi,
            ratio: (tau > 0.0).then(|| t_phi / tau),
            method,
        }
    }
}

/// `τ = L·E/k`.
pub fn classical_tau(setup: &BarrierSetup, mode: &IncidentMode) -> Result<f64> {
    if setup.l() == 0.0 {
        return Err(Error::ZeroLength);
    }
    Ok(tau_unchecked(setup, mode))
}

fn tau_unchecked(setup: &BarrierSetup, mode: &IncidentMode) -> f64 {
    setup.l() * mode.energy() / mode.k()
}

/// The ratio `f/g` with `f` and `g` transcribed term by term.
///
/// `ρ(n)` uses the sign that vanishes on the zone edges. Near the edges both
/// brackets cancel to `O(ρ(n)²)`, so prefer [`phase_ratio`] there.
pub fn phase_ratio_printed(n2: f64, v: f64, wl: f64) -> f64 {
    let s = (1.0 + 2.0 * n2 * v).sqrt();
    let x = crate::kinematics::rho_n2(n2, v).sqrt() * wl;
    let f = 8.0 * n2 * ((2.0 + 8.0 * n2 * v + v * v) - (4.0 * n2 + 3.0 * v) * s)
        + 4.0
            * ((4.0 + 4.0 * n2 * v + v * v) * s - 2.0 * v * (2.0 + 3.0 * n2 * v))
            * (x.sinh() * x.cosh() / x);
    let g = 16.0 * n2 * (2.0 * (1.0 + 2.0 * n2 * v) - s * (2.0 * n2 + v))
        + 2.0
            * ((4.0 + 8.0 * n2 * v + v * v) * s - 4.0 * v * (1.0 + 2.0 * n2 * v))
            * x.sinh().powi(2);
    f / g
}

/// The same ratio with the common factor `ρ(n)²` removed analytically.
///
/// With `s = sqrt(1 + 2n²v)` and `x = ρ(n)wL`,
///
/// ```text
/// f/ρ(n)² = 8(4n²s − sv + 2) + 4B (wL)² (sinh x cosh x / x − 1)/x²
/// g/ρ(n)² = 32 n² s + 2D (wL)² (sinh x / x)²
/// B = (2s − v)(s² − sv + 1),  D = s(2s − v)²
/// ```
///
/// which stays finite and continuous at `ρ(n) = 0` and, for large `x`, is
/// evaluated divided through by `(sinh x / x)²` to avoid overflow.
pub fn phase_ratio(n2: f64, rho_n2: f64, v: f64, wl: f64) -> f64 {
    let s = (1.0 + 2.0 * n2 * v).sqrt();
    let b = (2.0 * s - v) * (s * s - s * v + 1.0);
    let d = s * (2.0 * s - v).powi(2);
    let f0 = 8.0 * (4.0 * n2 * s - s * v + 2.0);
    let g0 = 32.0 * n2 * s;
    let wl2 = wl * wl;
    let x = rho_n2.max(0.0).sqrt() * wl;
    if x < 1.0 {
        let f = f0 + 4.0 * b * wl2 * sinh_cosh_excess(x);
        let g = g0 + 2.0 * d * wl2 * sinhc(x).powi(2);
        f / g
    } else {
        let sh = x.sinh();
        let q = (x / sh).powi(2);
        let excess_over_sinhc2 = 1.0 / (x.tanh() * x) - 1.0 / (sh * sh);
        let f = f0 * q + 4.0 * b * wl2 * excess_over_sinhc2;
        let g = g0 * q + 2.0 * d * wl2;
        f / g
    }
}

fn tunneling_rho_n2(setup: &BarrierSetup, mode: &IncidentMode) -> Result<f64> {
    match classify_mode(setup, mode) {
        Zone::Tunneling => {}
        Zone::EdgeLower | Zone::EdgeUpper => return Err(Error::EdgeDegenerate),
        found => {
            return Err(Error::Zone {
                expected: "Tunneling",
                found,
            })
        }
    }
    match barrier_channel(setup, mode).rho_n {
        Some(r) if r > 0.0 => Ok(r * r),
        _ => Err(Error::EdgeDegenerate),
    }
}

/// Closed-form phase time in the tunneling zone.
pub fn phase_time_eq7(setup: &BarrierSetup, n2: f64) -> Result<PhaseTimeResult> {
    let mode = mode_from_n2(setup, n2)?;
    let rho_n2 = tunneling_rho_n2(setup, &mode)?;
    let ratio = phase_ratio(n2, rho_n2, setup.v(), setup.wl());
    Ok(PhaseTimeResult::from_ratio(
        tau_unchecked(setup, &mode),
        ratio,
        Method::Eq7,
    ))
}

/// Default initial finite-difference half-step in kinetic energy,
/// `1e-3·min(m, V0)`.
///
/// For `v ≪ 1` the phase varies on the scale of `V0`. Smaller starting steps
/// leave the Richardson sequence dominated by roundoff in `arg T` before it
/// meets its tolerance, notably for thin, high barriers.
pub fn default_step(setup: &BarrierSetup) -> f64 {
    1e-3 * setup.m().min(setup.v0())
}

/// Distance in energy from `mode` to the nearest point where the interior
/// channel changes (the two zone edges and the rest-mass threshold).
fn distance_to_edge(setup: &BarrierSetup, mode: &IncidentMode) -> f64 {
    let gaps = zone_gaps(setup, mode.kinetic());
    gaps.lower.abs().min(gaps.upper.abs()).min(mode.kinetic())
}

/// `dφ/dE` by Richardson-extrapolated central differences of `arg T` from
/// [`match_boundaries`], branch-consistent through `arg(T(E ± h) / T(E))`.
///
/// `de` defaults to [`default_step`]; it is clamped to a tenth of the
/// distance to the nearest zone edge.
pub fn phase_time_numeric(
    setup: &BarrierSetup,
    mode: &IncidentMode,
    de: Option<f64>,
) -> Result<PhaseTimeResult> {
    if setup.l() == 0.0 {
        return Ok(PhaseTimeResult::from_time(
            0.0,
            0.0,
            Method::NumericDerivative,
        ));
    }
    let h_requested = de.unwrap_or_else(|| default_step(setup));
    if !(h_requested > 0.0) {
        return Err(Error::domain(format!(
            "step must be positive, got {h_requested}"
        )));
    }
    let distance = distance_to_edge(setup, mode);
    let tol = crate::kinematics::EDGE_TOLERANCE * setup.m();
    if distance <= tol {
        return Err(Error::ZoneCrossing {
            energy: mode.energy(),
        });
    }
    let h0 = h_requested.min(distance / 10.0);
    let t0 = match_boundaries(setup, mode)?.t;
    let zone = classify_mode(setup, mode);
    let kinetic = mode.kinetic();
    let tau = tau_unchecked(setup, mode);

    let phase_offset = |dk: f64| -> Result<f64> {
        let shifted = mode_from_kinetic(setup, kinetic + dk)?;
        if classify_mode(setup, &shifted) != zone {
            return Err(Error::ZoneCrossing {
                energy: mode.energy(),
            });
        }
        let t = match_boundaries(setup, &shifted)?.t;
        Ok((t * t0.conj()).arg())
    };
    let d = richardson_central(
        phase_offset,
        0.0,
        h0,
        RICHARDSON_TOLERANCE,
        tau,
        MAX_HALVINGS,
    )?;
    Ok(PhaseTimeResult::from_time(
        tau,
        d.value,
        Method::NumericDerivative,
    ))
}

/// Phase time on a zone edge from the analytic energy derivative of the
/// exact linear-channel solution.
///
/// Writing `T = 1/D(E)` with `D = C − i((k² + p²)/2k) S`, `C = cos(pL)`,
/// `S = sin(pL)/p` as entire functions of `p²`, one has `t_φ = −Im(D'/D)`.
/// On the edge (`p² = 0`) this gives a width-dependent value that tends to
/// [`edge_limit_ratio`] only as `wL → ∞`.
pub fn phase_time_edge(setup: &BarrierSetup, edge: Edge) -> Result<PhaseTimeResult> {
    let mode = edge_mode(setup, edge)?;
    let (k, e) = (mode.k(), mode.energy());
    let dp2_de = 2.0 * (e - setup.v0());
    let t_phi = edge_phase_time(k, e / k, dp2_de, setup.l());
    Ok(PhaseTimeResult::from_time(
        tau_unchecked(setup, &mode),
        t_phi,
        Method::EdgeExact,
    ))
}

/// `−Im(D'/D)` at `p² = 0` for `D = C − i((k² + p²)/2k) S`.
pub(crate) fn edge_phase_time(k: f64, dk_de: f64, dp2_de: f64, l: f64) -> f64 {
    let c = k / 2.0;
    let d = Complex64::new(1.0, -c * l);
    let dc_dp2 = -l * l / 2.0;
    let ds_dp2 = -l * l * l / 6.0;
    let dc_de = dk_de / 2.0 + dp2_de / (2.0 * k);
    let d_prime = Complex64::new(dc_dp2 * dp2_de, -(dc_de * l + c * ds_dp2 * dp2_de));
    -(d_prime / d).im
}

/// Best available phase time: closed form in the tunneling zone, the exact
/// edge derivative on an edge, the numeric derivative elsewhere.
pub fn phase_time(setup: &BarrierSetup, mode: &IncidentMode) -> Result<PhaseTimeResult> {
    match classify_mode(setup, mode) {
        Zone::NonPropagating => Err(Error::NonPropagating {
            energy: mode.energy(),
            mass: setup.m(),
        }),
        Zone::Tunneling => phase_time_eq7(setup, mode.n2()),
        Zone::EdgeLower => phase_time_edge(setup, Edge::Lower),
        Zone::EdgeUpper => phase_time_edge(setup, Edge::Upper),
        Zone::Klein | Zone::AboveBarrier => phase_time_numeric(setup, mode, None),
    }
}

/// Leading term of the ratio as `ρ(n)wL → 0`:
/// `(4/3)[(4 + 4n²v + v²)s − 2v(2 + 3n²v)] / [(4 + 8n²v + v²)s − 4v(1 + 2n²v)]`.
pub fn small_rho_leading(v: f64, n2: f64) -> f64 {
    let s = (1.0 + 2.0 * n2 * v).sqrt();
    let num = (4.0 + 4.0 * n2 * v + v * v) * s - 2.0 * v * (2.0 + 3.0 * n2 * v);
    let den = (4.0 + 8.0 * n2 * v + v * v) * s - 4.0 * v * (1.0 + 2.0 * n2 * v);
    4.0 / 3.0 * num / den
}

fn edge_n2(v: f64, edge: Edge) -> Result<f64> {
    if edge == Edge::Lower && v <= 2.0 {
        return Err(Error::domain(format!(
            "lower edge n² = v/2 − 1 needs v > 2, got v = {v}"
        )));
    }
    Ok(edge.n2(v))
}

/// `−(4/3) / (1 ± 2n²)` at `n² = v/2 ∓ 1`.
pub fn edge_limit_ratio(v: f64, edge: Edge) -> Result<f64> {
    let n2 = edge_n2(v, edge)?;
    let sign = match edge {
        Edge::Lower => 1.0,
        Edge::Upper => -1.0,
    };
    Ok(-(4.0 / 3.0) / (1.0 + sign * 2.0 * n2))
}

/// `[1 + (wL)² / (2v ∓ 4)]^{−1/2}`, the ρ(n) → 0 value of the printed
/// tunneling magnitude formula.
pub fn edge_limit_magnitude_paper(v: f64, wl: f64, edge: Edge) -> Result<f64> {
    let n2 = edge_n2(v, edge)?;
    Ok(1.0 / (1.0 + wl * wl / (4.0 * n2)).sqrt())
}

/// `[1 + (mL)²]^{−1/2}`, the `v ≫ 1` form of [`edge_limit_magnitude_paper`].
pub fn edge_limit_magnitude_ultrarelativistic(ml: f64) -> f64 {
    1.0 / ml.hypot(1.0)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;
    use crate::kinematics::rho_n2;

    fn setup(v: f64, wl: f64) -> BarrierSetup {
        BarrierSetup::from_dimensionless(1.0, v, wl).unwrap()
    }

    #[test]
    fn tau_examples() {
        let s = BarrierSetup::new(1.0, 10.0, 1.0).unwrap();
        let mode = crate::kinematics::mode_from_energy(&s, 101f64.sqrt()).unwrap();
        assert_relative_eq!(classical_tau(&s, &mode).unwrap(), 101f64.sqrt() / 10.0);
        let fast = crate::kinematics::mode_from_momentum(&s, 1e6).unwrap();
        assert_relative_eq!(classical_tau(&s, &fast).unwrap(), 1.0, max_relative = 1e-11);
        let zero = s.with_width(0.0).unwrap();
        assert!(matches!(
            classical_tau(&zero, &mode),
            Err(Error::ZeroLength)
        ));
    }

    #[test]
    fn reference_ratio() {
        let s = setup(10.0, TAU);
        let r = phase_time_eq7(&s, 5.0).unwrap();
        // mpmath derivative of the exact phase
        assert_relative_eq!(r.ratio.unwrap(), 0.02093053305098312, max_relative = 1e-12);
        let printed = phase_ratio_printed(5.0, 10.0, TAU);
        assert_relative_eq!(printed, r.ratio.unwrap(), max_relative = 1e-10);
        let numeric = phase_time_numeric(&s, &mode_from_n2(&s, 5.0).unwrap(), None).unwrap();
        assert_relative_eq!(
            numeric.ratio.unwrap(),
            r.ratio.unwrap(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn frozen_grid_values() {
        let cases = [
            (1.0, 0.1, 0.382_891_063_055_759_3),
            (1.0, 1.4, 0.552_941_943_838_441_3),
            (2.0, 1.0, 0.17994205553834207),
            (5.0, 1.6, -0.20945971258957033),
            (5.0, 3.4, 0.20616173994344196),
            (10.0, 4.1, -0.10891117960697818),
            (100.0, 49.1, -0.01098637570424138),
            (100.0, 50.0, 0.00114178480380682),
        ];
        for (v, n2, expected) in cases {
            let r = phase_ratio(n2, rho_n2(n2, v), v, TAU);
            assert_relative_eq!(r, expected, max_relative = 1e-11);
        }
    }

    #[test]
    fn factored_form_is_continuous_at_branch_switch() {
        // x = ρ(n) wL crosses 1
        let (v, n2) = (10.0, 5.0);
        let rho2: f64 = rho_n2(n2, v);
        let wl = 1.0 / rho2.sqrt();
        let lo = phase_ratio(n2, rho2, v, wl * (1.0 - 1e-13));
        let hi = phase_ratio(n2, rho2, v, wl * (1.0 + 1e-13));
        assert_relative_eq!(lo, hi, max_relative = 1e-11);
        assert_relative_eq!(lo, phase_ratio_printed(n2, v, wl), max_relative = 1e-10);
    }

    #[test]
    fn opaque_limit_is_finite() {
        let r = phase_ratio(0.5, rho_n2(0.5, 1e-3), 1e-3, 5000.0);
        assert!(r.is_finite() && r > 0.0);
    }

    #[test]
    fn edge_ratio_values() {
        assert_relative_eq!(edge_limit_ratio(10.0, Edge::Lower).unwrap(), -4.0 / 27.0);
        assert_relative_eq!(edge_limit_ratio(10.0, Edge::Upper).unwrap(), 4.0 / 33.0);
        assert!(edge_limit_ratio(2.0, Edge::Lower).is_err());
        assert!(edge_limit_ratio(1e12, Edge::Lower).unwrap().abs() < 1e-11);
        assert!(edge_limit_ratio(1e12, Edge::Upper).unwrap().abs() < 1e-11);
    }

    #[test]
    fn small_rho_term_at_edges_is_edge_limit() {
        assert_relative_eq!(small_rho_leading(0.0, 0.3), 4.0 / 3.0);
        for v in [3.0, 10.0, 57.0] {
            assert_relative_eq!(
                small_rho_leading(v, v / 2.0 - 1.0),
                edge_limit_ratio(v, Edge::Lower).unwrap(),
                max_relative = 1e-10
            );
            assert_relative_eq!(
                small_rho_leading(v, v / 2.0 + 1.0),
                edge_limit_ratio(v, Edge::Upper).unwrap(),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn exact_edge_times() {
        let s = setup(10.0, TAU);
        let lower = phase_time_edge(&s, Edge::Lower).unwrap();
        let upper = phase_time_edge(&s, Edge::Upper).unwrap();
        assert_relative_eq!(
            lower.ratio.unwrap(),
            -0.1348809042977061,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            upper.ratio.unwrap(),
            0.12901211263865126,
            max_relative = 1e-12
        );
        // the closed form extends continuously onto the edge
        for (edge, r) in [(Edge::Lower, lower), (Edge::Upper, upper)] {
            let at_edge = phase_ratio(edge.n2(10.0), 0.0, 10.0, TAU);
            assert_relative_eq!(at_edge, r.ratio.unwrap(), max_relative = 1e-12);
        }
        // and approaches the width-independent value for wide barriers
        let wide = setup(10.0, 1e4);
        let r = phase_time_edge(&wide, Edge::Lower).unwrap().ratio.unwrap();
        assert_relative_eq!(r, -4.0 / 27.0, max_relative = 1e-6);
    }

    #[test]
    fn numeric_refuses_edges_and_handles_zero_width() {
        let s = setup(10.0, TAU);
        let edge = edge_mode(&s, Edge::Upper).unwrap();
        assert!(matches!(
            phase_time_numeric(&s, &edge, None),
            Err(Error::ZoneCrossing { .. })
        ));
        let zero = s.with_width(0.0).unwrap();
        let r = phase_time_numeric(&zero, &mode_from_n2(&zero, 5.0).unwrap(), None).unwrap();
        assert_eq!(r.t_phi, 0.0);
        assert_eq!(r.ratio, None);
        assert_eq!(phase_time_eq7(&zero, 5.0).unwrap().ratio, None);
    }

    #[test]
    fn numeric_matches_edge_derivative_nearby() {
        let s = setup(10.0, TAU);
        for edge in [Edge::Lower, Edge::Upper] {
            let exact = phase_time_edge(&s, edge).unwrap().ratio.unwrap();
            for offset in [1e-4, -1e-4] {
                let mode = mode_from_n2(&s, edge.n2(10.0) + offset).unwrap();
                let r = phase_time_numeric(&s, &mode, None).unwrap().ratio.unwrap();
                assert!(
                    (r - exact).abs() < 1e-3,
                    "{edge:?} {offset}: {r} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn classical_limit_above_barrier() {
        let s = setup(10.0, TAU);
        let r = phase_time(&s, &mode_from_n2(&s, 50.0).unwrap()).unwrap();
        assert_eq!(r.method, Method::NumericDerivative);
        assert!((r.ratio.unwrap() - 1.0).abs() < 0.05, "{r:?}");
    }

    #[test]
    fn printed_edge_magnitudes() {
        assert_relative_eq!(
            edge_limit_magnitude_paper(10.0, TAU, Edge::Lower).unwrap(),
            0.5370292721463151,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            edge_limit_magnitude_paper(10.0, TAU, Edge::Upper).unwrap(),
            0.6148831256886991,
            max_relative = 1e-12
        );
        assert_eq!(
            edge_limit_magnitude_paper(10.0, 0.0, Edge::Lower).unwrap(),
            1.0
        );
        let v = 1e4;
        let wl = 0.1 * (2.0f64 * v).sqrt();
        let t = edge_limit_magnitude_paper(v, wl, Edge::Upper).unwrap();
        assert_relative_eq!(t, 1.01f64.powf(-0.5), max_relative = 1e-3);
        assert_relative_eq!(
            edge_limit_magnitude_ultrarelativistic(0.1),
            1.01f64.powf(-0.5)
        );
    }

    proptest! {
        #[test]
        fn closed_form_matches_numeric(v in 0.5f64..100.0, frac in 0.02f64..0.98, wl in 0.5f64..12.0) {
            let s = setup(v, wl);
            let lo = (v / 2.0 - 1.0).max(0.0);
            let n2 = lo + frac * (v / 2.0 + 1.0 - lo);
            let mode = mode_from_n2(&s, n2).unwrap();
            prop_assume!(classify_mode(&s, &mode) == Zone::Tunneling);
            let closed = phase_time_eq7(&s, n2).unwrap().ratio.unwrap();
            let numeric = phase_time_numeric(&s, &mode, None).unwrap().ratio.unwrap();
            prop_assert!((closed - numeric).abs() <= 1e-6 * closed.abs().max(1.0), "{} vs {}", closed, numeric);
        }
    }
}
