//! Non-relativistic (Schrödinger) rectangular barrier, used as the `v → 0`
//! reference. Everything here is computed from its own dispersion
//! `k² = 2m·E_NR`, independently of the relativistic code path.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::edge_phase_time;
use crate::error::{Error, Result};
use crate::kinematics::{BarrierSetup, Zone, EDGE_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NRReference {
    pub e_nr: f64,
    pub k: f64,
    /// `κ = sqrt(2m(V0 − E_NR))`.
    pub kappa: f64,
    pub magnitude: f64,
    pub phase: f64,
    /// Set by [`nr_phase_time`].
    pub t_phi: Option<f64>,
    pub tau: Option<f64>,
    pub ratio: Option<f64>,
}

/// Non-relativistic result at an arbitrary energy `E_NR > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NRPoint {
    /// `Tunneling`, `EdgeUpper` (at `E_NR = V0`) or `AboveBarrier`.
    pub zone: Zone,
    pub e_nr: f64,
    pub k: f64,
    pub magnitude: f64,
    pub phase: f64,
    pub t_phi: f64,
    /// `L·m/k`.
    pub tau: f64,
    pub ratio: Option<f64>,
}

fn check_tunneling(setup: &BarrierSetup, e_nr: f64) -> Result<()> {
    if !(e_nr > 0.0 && e_nr < setup.v0()) {
        return Err(Error::domain(format!(
            "non-relativistic tunneling needs 0 < E_NR < V0 = {}, got {e_nr}",
            setup.v0()
        )));
    }
    Ok(())
}

/// Schrödinger `|T|` and `arg T` for `0 < E_NR < V0`.
pub fn nr_transmission(setup: &BarrierSetup, e_nr: f64) -> Result<NRReference> {
    check_tunneling(setup, e_nr)?;
    let p = nr_point(setup, e_nr)?;
    Ok(NRReference {
        e_nr,
        k: p.k,
        kappa: (2.0 * setup.m() * (setup.v0() - e_nr)).sqrt(),
        magnitude: p.magnitude,
        phase: p.phase,
        t_phi: None,
        tau: None,
        ratio: None,
    })
}

/// [`nr_transmission`] plus the analytic phase time `dφ/dE_NR` and `τ = Lm/k`.
pub fn nr_phase_time(setup: &BarrierSetup, e_nr: f64) -> Result<NRReference> {
    let mut r = nr_transmission(setup, e_nr)?;
    let p = nr_point(setup, e_nr)?;
    r.t_phi = Some(p.t_phi);
    r.tau = Some(p.tau);
    r.ratio = p.ratio;
    Ok(r)
}

/// Schrödinger transmission and phase time at any `E_NR > 0`.
pub fn nr_point(setup: &BarrierSetup, e_nr: f64) -> Result<NRPoint> {
    if !(e_nr > 0.0) || !e_nr.is_finite() {
        return Err(Error::domain(format!("E_NR must be positive, got {e_nr}")));
    }
    let (m, v0, l) = (setup.m(), setup.v0(), setup.l());
    let k = (2.0 * m * e_nr).sqrt();
    let tau = l * m / k;
    let gap = v0 - e_nr;

    let (zone, magnitude, phase, t_phi) = if gap.abs() <= EDGE_TOLERANCE * v0 {
        let t = 2.0 / num_complex::Complex64::new(2.0, -k * l);
        (
            Zone::EdgeUpper,
            t.norm(),
            t.arg(),
            edge_phase_time(k, m / k, 2.0 * m, l),
        )
    } else if gap > 0.0 {
        let kappa = (2.0 * m * gap).sqrt();
        let x = kappa * l;
        let (sh, ch, th) = (x.sinh(), x.cosh(), x.tanh());
        let a = (k * k - kappa * kappa) / (2.0 * k * kappa);
        let b = (k * k + kappa * kappa) / (2.0 * k * kappa);
        let magnitude = 1.0 / (b * sh).hypot(1.0);
        let phase = (a * th).atan();
        let da = m * (k * k + kappa * kappa).powi(2) / (2.0 * (k * kappa).powi(3));
        let sech2 = if x > 350.0 { 0.0 } else { 1.0 / (ch * ch) };
        let dth = -(m * l / kappa) * sech2;
        let t_phi = (da * th + a * dth) / (1.0 + (a * th).powi(2));
        (Zone::Tunneling, magnitude, phase, t_phi)
    } else {
        let q = (2.0 * m * -gap).sqrt();
        let theta = q * l;
        let c = (k * k + q * q) / (2.0 * k * q);
        let d = (k * k - q * q) / (2.0 * k * q);
        let magnitude = 1.0 / (d * theta.sin()).hypot(1.0);
        let j = (theta / PI).round();
        let reduced = theta - j * PI;
        let phase = (c * reduced.sin()).atan2(reduced.cos().max(0.0)) + j * PI;
        let dc = -m * (k * k - q * q).powi(2) / (2.0 * (k * q).powi(3));
        let dtheta = l * m / q;
        let (sin, cos) = theta.sin_cos();
        let t_phi = (dc * sin * cos + c * dtheta) / (cos * cos + (c * sin).powi(2));
        (Zone::AboveBarrier, magnitude, phase, t_phi)
    };

    Ok(NRPoint {
        zone,
        e_nr,
        k,
        magnitude,
        phase,
        t_phi,
        tau,
        ratio: (tau > 0.0).then(|| t_phi / tau),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use approx::assert_relative_eq;

    use super::*;
    use crate::numeric::richardson_central;

    #[test]
    fn symmetric_point() {
        let s = BarrierSetup::new(1.0, 2.0, 0.7).unwrap();
        let r = nr_transmission(&s, 1.0).unwrap();
        assert_relative_eq!(r.k, r.kappa);
        let expected = 1.0 / (1.0 + (r.kappa * 0.7).sinh().powi(2)).sqrt();
        assert_relative_eq!(r.magnitude, expected, max_relative = 1e-14);
        assert!(nr_transmission(&s, 2.0).is_err());
        assert!(nr_transmission(&s, 0.0).is_err());
    }

    #[test]
    fn analytic_phase_time_matches_difference_quotient() {
        let s = BarrierSetup::new(1.0, 2.0, 1.3).unwrap();
        for e in [0.3, 1.0, 1.9, 2.2, 5.0] {
            let p = nr_point(&s, e).unwrap();
            let d = richardson_central(|x| Ok(nr_point(&s, x)?.phase), e, 1e-4, 1e-10, 0.0, 20)
                .unwrap();
            assert_relative_eq!(p.t_phi, d.value, max_relative = 1e-8);
        }
    }

    #[test]
    fn hartman_plateau() {
        // n² = 1/2, κL = 20 and 40: t_φ saturates at 2m/(kκ)
        let s = BarrierSetup::from_dimensionless(1.0, 1.0, 20.0 * 2f64.sqrt()).unwrap();
        let wide = s.with_width(2.0 * s.l()).unwrap();
        let e = 0.5 * s.v0();
        let a = nr_phase_time(&s, e).unwrap();
        let b = nr_phase_time(&wide, e).unwrap();
        assert_relative_eq!(a.kappa * s.l(), 20.0, max_relative = 1e-14);
        let (ta, tb) = (a.t_phi.unwrap(), b.t_phi.unwrap());
        assert!((ta - tb).abs() < 1e-6 * ta);
        assert_relative_eq!(ta, 2.0 / (a.k * a.kappa), max_relative = 1e-12);
        // the ratio itself halves, since τ doubles
        assert_relative_eq!(
            a.ratio.unwrap() / b.ratio.unwrap(),
            2.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn edge_is_continuous() {
        let s = BarrierSetup::from_dimensionless(1.0, 1.0, TAU).unwrap();
        let v0 = s.v0();
        let at = nr_point(&s, v0).unwrap();
        assert_eq!(at.zone, Zone::EdgeUpper);
        for e in [v0 * (1.0 - 1e-7), v0 * (1.0 + 1e-7)] {
            let p = nr_point(&s, e).unwrap();
            assert!((p.magnitude - at.magnitude).abs() < 1e-5);
            assert!((p.phase - at.phase).abs() < 1e-5);
            assert!((p.t_phi - at.t_phi).abs() < 1e-4 * at.tau);
        }
    }
}
