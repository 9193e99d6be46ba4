//! Barrier configuration, relativistic dispersion and the energy-zone map.
//!
//! Everything is in natural units (ħ = c = 1): energies and momenta share a
//! unit, lengths and times carry the inverse of it. The dimensionless
//! parameterization used throughout the crate is
//!
//! * `w = sqrt(2 m V0)`, the non-relativistic momentum scale of the barrier,
//! * `v = V0 / m`, barrier height in units of the rest mass,
//! * `n² = k² / w²`, the incident energy coordinate,
//! * `wL`, the barrier width in units of `1/w`.
//!
//! The interior wavenumber squared is `p² = (E − V0)² − m²`. It is evaluated
//! as `−(V0 − K)(2m + K − V0)` with `K = E − m`, which keeps full relative
//! precision both in the non-relativistic limit (`K, V0 ≪ m`) and next to
//! the zone edges where one factor vanishes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Edges `E = V0 ± m` are detected within this multiple of `m`.
pub const EDGE_TOLERANCE: f64 = 1e-12;

/// Rectangular barrier of height `V0` on `0 ≤ x ≤ L` seen by a particle of mass `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierSetup {
    m: f64,
    v0: f64,
    l: f64,
}

impl BarrierSetup {
    pub fn new(m: f64, v0: f64, l: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::domain(format!(
                "mass must be positive and finite, got {m}"
            )));
        }
        if !(v0.is_finite() && v0 > 0.0) {
            return Err(Error::domain(format!(
                "barrier height must be positive and finite, got {v0}"
            )));
        }
        if !(l.is_finite() && l >= 0.0) {
            return Err(Error::domain(format!(
                "barrier width must be non-negative and finite, got {l}"
            )));
        }
        Ok(Self { m, v0, l })
    }

    /// Builds the setup from `m`, `v = V0/m` and `wL`.
    pub fn from_dimensionless(m: f64, v: f64, wl: f64) -> Result<Self> {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!(
                "v must be positive and finite, got {v}"
            )));
        }
        if !(wl.is_finite() && wl >= 0.0) {
            return Err(Error::domain(format!(
                "wL must be non-negative and finite, got {wl}"
            )));
        }
        let v0 = v * m;
        let w = (2.0 * m * v0).sqrt();
        Self::new(m, v0, wl / w)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn w(&self) -> f64 {
        (2.0 * self.m * self.v0).sqrt()
    }

    pub fn v(&self) -> f64 {
        self.v0 / self.m
    }

    pub fn wl(&self) -> f64 {
        self.w() * self.l
    }

    pub fn ml(&self) -> f64 {
        self.m * self.l
    }

    /// Same barrier with a different width.
    pub fn with_width(&self, l: f64) -> Result<Self> {
        Self::new(self.m, self.v0, l)
    }
}

/// One incident plane-wave component.
///
/// Carries the kinetic energy `K = E − m` next to `E` so downstream code never
/// has to recover it by subtraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncidentMode {
    energy: f64,
    kinetic: f64,
    k: f64,
    n2: f64,
}

impl IncidentMode {
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `E − m`.
    pub fn kinetic(&self) -> f64 {
        self.kinetic
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n2(&self) -> f64 {
        self.n2
    }

    pub fn n(&self) -> f64 {
        self.n2.sqrt()
    }

    /// Group velocity `dE/dk = k/E`.
    pub fn group_velocity(&self) -> f64 {
        self.k / self.energy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    NonPropagating,
    Klein,
    EdgeLower,
    Tunneling,
    EdgeUpper,
    AboveBarrier,
}

impl Zone {
    pub const ALL: [Zone; 6] = [
        Zone::NonPropagating,
        Zone::Klein,
        Zone::EdgeLower,
        Zone::Tunneling,
        Zone::EdgeUpper,
        Zone::AboveBarrier,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Zone::NonPropagating => "NonPropagating",
            Zone::Klein => "Klein",
            Zone::EdgeLower => "EdgeLower",
            Zone::Tunneling => "Tunneling",
            Zone::EdgeUpper => "EdgeUpper",
            Zone::AboveBarrier => "AboveBarrier",
        }
    }

    pub fn edge(&self) -> Option<Edge> {
        match self {
            Zone::EdgeLower => Some(Edge::Lower),
            Zone::EdgeUpper => Some(Edge::Upper),
            _ => None,
        }
    }

    /// Klein or above-barrier: the interior solution oscillates.
    pub fn is_oscillatory(&self) -> bool {
        matches!(self, Zone::Klein | Zone::AboveBarrier)
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Zone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Zone::ALL
            .into_iter()
            .find(|z| z.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown zone tag {s:?}")))
    }
}

/// The two boundaries of the tunneling zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Edge {
    /// `E = V0 − m`, `n² = v/2 − 1`.
    Lower,
    /// `E = V0 + m`, `n² = v/2 + 1`.
    Upper,
}

impl Edge {
    pub fn zone(&self) -> Zone {
        match self {
            Edge::Lower => Zone::EdgeLower,
            Edge::Upper => Zone::EdgeUpper,
        }
    }

    /// `n²` of the edge for a given `v`. Negative for the lower edge when `v < 2`.
    pub fn n2(&self, v: f64) -> f64 {
        match self {
            Edge::Lower => v / 2.0 - 1.0,
            Edge::Upper => v / 2.0 + 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ChannelKind {
    /// `ρ² = m² − (E − V0)² > 0`.
    Evanescent { rho: f64 },
    /// `q² = (E − V0)² − m² > 0`.
    Oscillatory { q: f64 },
    /// `E = V0 ± m`, interior solution `a + b x`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierChannel {
    pub kind: ChannelKind,
    /// Dimensionless `ρ(n) = ρ / w`, only for the evanescent channel.
    pub rho_n: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ZoneGaps {
    /// `E − (V0 − m)`.
    pub lower: f64,
    /// `(V0 + m) − E`.
    pub upper: f64,
}

pub(crate) fn zone_gaps(setup: &BarrierSetup, kinetic: f64) -> ZoneGaps {
    let (m, v0) = (setup.m, setup.v0);
    ZoneGaps {
        lower: (2.0 * m - v0) + kinetic,
        upper: v0 - kinetic,
    }
}

fn zone_from_gaps(setup: &BarrierSetup, gaps: ZoneGaps) -> Zone {
    let tol = EDGE_TOLERANCE * setup.m;
    if gaps.upper.abs() <= tol {
        Zone::EdgeUpper
    } else if gaps.lower.abs() <= tol {
        Zone::EdgeLower
    } else if gaps.upper < 0.0 {
        Zone::AboveBarrier
    } else if gaps.lower < 0.0 {
        Zone::Klein
    } else {
        Zone::Tunneling
    }
}

/// Interior `p² = (E − V0)² − m²`, exactly zero on the edges.
pub(crate) fn interior_p2(setup: &BarrierSetup, mode: &IncidentMode) -> f64 {
    let gaps = zone_gaps(setup, mode.kinetic);
    match zone_from_gaps(setup, gaps) {
        Zone::EdgeLower | Zone::EdgeUpper => 0.0,
        _ => -(gaps.upper * gaps.lower),
    }
}

pub fn mode_from_energy(setup: &BarrierSetup, energy: f64) -> Result<IncidentMode> {
    if !(energy > setup.m) || !energy.is_finite() {
        return Err(Error::NonPropagating {
            energy,
            mass: setup.m,
        });
    }
    mode_from_kinetic(setup, energy - setup.m)
}

/// Mode with kinetic energy `K = E − m > 0`.
pub fn mode_from_kinetic(setup: &BarrierSetup, kinetic: f64) -> Result<IncidentMode> {
    if !(kinetic > 0.0) || !kinetic.is_finite() {
        return Err(Error::NonPropagating {
            energy: setup.m + kinetic,
            mass: setup.m,
        });
    }
    let m = setup.m;
    let k2 = kinetic * (kinetic + 2.0 * m);
    Ok(IncidentMode {
        energy: m + kinetic,
        kinetic,
        k: k2.sqrt(),
        n2: k2 / (2.0 * m * setup.v0),
    })
}

/// Mode with incident momentum `k > 0`.
pub fn mode_from_momentum(setup: &BarrierSetup, k: f64) -> Result<IncidentMode> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::domain(format!(
            "incident momentum must be positive, got {k}"
        )));
    }
    let m = setup.m;
    let energy = k.hypot(m);
    Ok(IncidentMode {
        energy,
        kinetic: k * k / (energy + m),
        k,
        n2: k * k / (2.0 * m * setup.v0),
    })
}

/// Mode at `n² = k²/w²`; `E = m·sqrt(1 + 2 n² v)`.
pub fn mode_from_n2(setup: &BarrierSetup, n2: f64) -> Result<IncidentMode> {
    if !(n2 > 0.0) || !n2.is_finite() {
        return Err(Error::domain(format!(
            "n² must be positive and finite, got {n2}"
        )));
    }
    let m = setup.m;
    let x = 2.0 * n2 * setup.v();
    let s = (1.0 + x).sqrt();
    Ok(IncidentMode {
        energy: m * s,
        kinetic: m * x / (s + 1.0),
        k: setup.w() * n2.sqrt(),
        n2,
    })
}

/// Mode sitting exactly on a zone edge.
pub fn edge_mode(setup: &BarrierSetup, edge: Edge) -> Result<IncidentMode> {
    let (m, v0) = (setup.m, setup.v0);
    let kinetic = match edge {
        Edge::Lower => {
            if v0 <= 2.0 * m {
                return Err(Error::domain(format!(
                    "lower edge E = V0 − m needs v > 2, got v = {}",
                    setup.v()
                )));
            }
            v0 - 2.0 * m
        }
        Edge::Upper => v0,
    };
    mode_from_kinetic(setup, kinetic)
}

pub fn classify_zone(setup: &BarrierSetup, energy: f64) -> Zone {
    if !(energy > setup.m) {
        return Zone::NonPropagating;
    }
    zone_from_gaps(setup, zone_gaps(setup, energy - setup.m))
}

pub fn classify_mode(setup: &BarrierSetup, mode: &IncidentMode) -> Zone {
    zone_from_gaps(setup, zone_gaps(setup, mode.kinetic))
}

pub fn barrier_channel(setup: &BarrierSetup, mode: &IncidentMode) -> BarrierChannel {
    let p2 = interior_p2(setup, mode);
    if p2 < 0.0 {
        let rho = (-p2).sqrt();
        BarrierChannel {
            kind: ChannelKind::Evanescent { rho },
            rho_n: Some(rho / setup.w()),
        }
    } else if p2 > 0.0 {
        BarrierChannel {
            kind: ChannelKind::Oscillatory { q: p2.sqrt() },
            rho_n: None,
        }
    } else {
        BarrierChannel {
            kind: ChannelKind::Linear,
            rho_n: None,
        }
    }
}

/// `(n² − v/2)² < 1` with `n² > 0`.
pub fn in_tunneling_interval(n2: f64, v: f64) -> bool {
    n2 > 0.0 && (n2 - v / 2.0).powi(2) < 1.0
}

/// `ρ(n)² = sqrt(1 + 2n²v) − n² − v/2`, evaluated as
/// `(1 − d)(1 + d) / (sqrt(1 + 2n²v) + n² + v/2)` with `d = n² − v/2` so that
/// it stays accurate near the zone edges for large `v`.
pub fn rho_n2(n2: f64, v: f64) -> f64 {
    let d = n2 - v / 2.0;
    (1.0 - d) * (1.0 + d) / ((1.0 + 2.0 * n2 * v).sqrt() + n2 + v / 2.0)
}

/// `sqrt(1 + 2n²v) − (n² − v/2)`, the sign variant that does not vanish on
/// the tunneling-zone edges. Kept only to document the difference.
pub fn rho_n2_printed(n2: f64, v: f64) -> f64 {
    (1.0 + 2.0 * n2 * v).sqrt() - (n2 - v / 2.0)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    fn setup_v10() -> BarrierSetup {
        BarrierSetup::new(1.0, 10.0, 1.0).unwrap()
    }

    #[test]
    fn derived_parameters() {
        let s = BarrierSetup::new(0.5, 3.0, 2.0).unwrap();
        assert_relative_eq!(s.w() * s.w(), 2.0 * 0.5 * 3.0, max_relative = 1e-15);
        assert_relative_eq!(s.v(), s.w().powi(2) / (2.0 * 0.25), max_relative = 1e-15);
        assert_relative_eq!(s.wl(), s.w() * 2.0);
        let d = BarrierSetup::from_dimensionless(1.0, 10.0, std::f64::consts::TAU).unwrap();
        assert_relative_eq!(d.wl(), std::f64::consts::TAU, max_relative = 1e-15);
        assert_eq!(d.v0(), 10.0);
    }

    #[test]
    fn rejects_bad_setups() {
        assert!(BarrierSetup::new(0.0, 1.0, 1.0).is_err());
        assert!(BarrierSetup::new(1.0, -1.0, 1.0).is_err());
        assert!(BarrierSetup::new(1.0, 1.0, -0.1).is_err());
        assert!(BarrierSetup::new(1.0, 1.0, f64::NAN).is_err());
        assert!(BarrierSetup::new(1.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn mode_from_energy_examples() {
        let s = setup_v10();
        let mode = mode_from_energy(&s, 101f64.sqrt()).unwrap();
        assert_relative_eq!(mode.k(), 10.0, max_relative = 1e-14);
        assert_relative_eq!(mode.n2(), 5.0, max_relative = 1e-14);

        let mode = mode_from_energy(&s, 3.0).unwrap();
        assert_relative_eq!(mode.k(), 8f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(mode.n2(), 0.4, max_relative = 1e-15);

        assert!(matches!(
            mode_from_energy(&s, 1.0),
            Err(Error::NonPropagating { .. })
        ));
        assert!(mode_from_energy(&s, 0.5).is_err());
    }

    #[test]
    fn mode_from_n2_examples() {
        let s = setup_v10();
        let mode = mode_from_n2(&s, 5.0).unwrap();
        assert_relative_eq!(mode.energy(), 101f64.sqrt(), max_relative = 1e-15);
        assert!(mode_from_n2(&s, 0.0).is_err());
        assert!(mode_from_n2(&s, -1.0).is_err());

        let tiny = mode_from_n2(&s, 1e-14).unwrap();
        assert_relative_eq!(tiny.energy(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn non_relativistic_kinetic_energy() {
        // v -> 0: E - m -> n² w² / 2m = E_NR
        let s = BarrierSetup::new(1.0, 1e-9, 1.0).unwrap();
        let mode = mode_from_n2(&s, 0.3).unwrap();
        let e_nr = 0.3 * s.w().powi(2) / 2.0;
        assert_relative_eq!(mode.kinetic(), e_nr, max_relative = 1e-8);
    }

    #[test]
    fn momentum_route_matches_energy_route() {
        let s = setup_v10();
        let a = mode_from_momentum(&s, 10.0).unwrap();
        let b = mode_from_energy(&s, 101f64.sqrt()).unwrap();
        assert_relative_eq!(a.energy(), b.energy(), max_relative = 1e-15);
        assert_relative_eq!(a.kinetic(), b.kinetic(), max_relative = 1e-14);
        assert_relative_eq!(a.n2(), b.n2(), max_relative = 1e-14);
    }

    #[test]
    fn zone_examples() {
        let s = setup_v10();
        assert_eq!(classify_zone(&s, 5.0), Zone::Klein);
        assert_eq!(classify_zone(&s, 10.0), Zone::Tunneling);
        assert_eq!(classify_zone(&s, 12.0), Zone::AboveBarrier);
        assert_eq!(classify_zone(&s, 9.0), Zone::EdgeLower);
        assert_eq!(classify_zone(&s, 11.0), Zone::EdgeUpper);
        assert_eq!(classify_zone(&s, 1.0), Zone::NonPropagating);
        assert_eq!(classify_zone(&s, 0.2), Zone::NonPropagating);
        assert_eq!(classify_zone(&s, 9.0 + 1e-13), Zone::EdgeLower);
        assert_eq!(classify_zone(&s, 9.0 + 1e-10), Zone::Tunneling);
    }

    #[test]
    fn low_barrier_has_no_klein_zone() {
        let s = BarrierSetup::new(1.0, 1.5, 1.0).unwrap();
        assert_eq!(classify_zone(&s, 1.01), Zone::Tunneling);
        assert!(edge_mode(&s, Edge::Lower).is_err());
        assert_eq!(
            classify_mode(&s, &edge_mode(&s, Edge::Upper).unwrap()),
            Zone::EdgeUpper
        );
    }

    #[test]
    fn channel_examples() {
        let s = setup_v10();
        let mode = mode_from_n2(&s, 5.0).unwrap();
        let ch = barrier_channel(&s, &mode);
        let rho_n = ch.rho_n.unwrap();
        // both routes: sqrt(1+2n²v) − n² − v/2 and (m² − (E−V0)²)/w²
        assert_relative_eq!(rho_n * rho_n, 101f64.sqrt() - 10.0, max_relative = 1e-12);
        assert_relative_eq!(rho_n * rho_n, rho_n2(5.0, 10.0), max_relative = 1e-12);
        assert_relative_eq!(rho_n, 0.223328504944824, max_relative = 1e-13);
        let ChannelKind::Evanescent { rho } = ch.kind else {
            panic!("expected evanescent channel, got {ch:?}")
        };
        let e = mode.energy();
        assert_relative_eq!(rho * rho, 1.0 - (e - 10.0).powi(2), max_relative = 1e-12);

        let edge = mode_from_energy(&s, 9.0).unwrap();
        assert_eq!(barrier_channel(&s, &edge).kind, ChannelKind::Linear);

        let above = mode_from_energy(&s, 12.0).unwrap();
        match barrier_channel(&s, &above).kind {
            ChannelKind::Oscillatory { q } => {
                assert_relative_eq!(q, 3f64.sqrt(), max_relative = 1e-15)
            }
            other => panic!("expected oscillatory channel, got {other:?}"),
        }
    }

    #[test]
    fn printed_rho_sign_differs() {
        // The printed variant stays far from zero on the edges, the corrected one vanishes.
        assert!(rho_n2(4.0, 10.0).abs() < 1e-14);
        assert!(rho_n2(6.0, 10.0).abs() < 1e-14);
        assert_relative_eq!(rho_n2_printed(4.0, 10.0), 10.0);
        assert_relative_eq!(rho_n2_printed(5.0, 10.0), 101f64.sqrt());
    }

    #[test]
    fn edge_modes_sit_on_edges() {
        let s = setup_v10();
        let lo = edge_mode(&s, Edge::Lower).unwrap();
        let hi = edge_mode(&s, Edge::Upper).unwrap();
        assert_eq!(classify_mode(&s, &lo), Zone::EdgeLower);
        assert_eq!(classify_mode(&s, &hi), Zone::EdgeUpper);
        assert_relative_eq!(lo.n2(), 4.0, max_relative = 1e-15);
        assert_relative_eq!(hi.n2(), 6.0, max_relative = 1e-15);
        assert_eq!(Edge::Lower.n2(10.0), 4.0);
    }

    #[test]
    fn zone_tags_round_trip_through_strings() {
        for z in Zone::ALL {
            assert_eq!(z.as_str().parse::<Zone>().unwrap(), z);
        }
        assert!("Nowhere".parse::<Zone>().is_err());
    }
}
