//! Stationary scattering off the rectangular barrier.
//!
//! The exact solution matches, at `x = 0` and `x = L`, the piecewise ansatz
//!
//! ```text
//! x < 0      e^{ikx} + R e^{−ikx}
//! 0 < x < L  interior solution of φ'' = −p² φ,  p² = (E − V0)² − m²
//! x > L      T e^{ik(x−L)}
//! ```
//!
//! The interior is propagated with the fundamental pair `C = cos(pL)`,
//! `S = sin(pL)/p` (their hyperbolic or linear versions for `p² ≤ 0`), which
//! turns the four continuity conditions into a 2×2 system for `(R, T)`.
//! Because `C S' − S C' = 1`, the transmitted amplitude reduces to
//! `T = −2ik / det` with no cancellation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    barrier_channel, classify_mode, edge_mode, BarrierSetup, ChannelKind, Edge, IncidentMode, Zone,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Interior part of the exact solution, stored in a form that is safe to
/// evaluate across the barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Interior {
    /// `α e^{−ρx} + β_L e^{ρ(x−L)}`, with `β = β_L e^{−ρL}`.
    Evanescent {
        rho: f64,
        alpha: Complex64,
        beta_at_l: Complex64,
    },
    /// `α e^{−iqx} + β e^{iqx}`.
    Oscillatory {
        q: f64,
        alpha: Complex64,
        beta: Complex64,
    },
    /// `a + b x`.
    Linear { a: Complex64, b: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringSolution {
    pub r: Complex64,
    pub t: Complex64,
    /// Coefficient of the decaying (or `e^{−iqx}`, or constant) interior mode.
    pub alpha: Complex64,
    /// Coefficient of the growing (or `e^{+iqx}`, or linear) interior mode.
    pub beta: Complex64,
    pub zone: Zone,
    pub k: f64,
    pub l: f64,
    pub interior: Interior,
}

/// Relative mismatch of φ and φ' at both interfaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityResiduals {
    pub value_at_0: f64,
    pub slope_at_0: f64,
    pub value_at_l: f64,
    pub slope_at_l: f64,
}

impl ContinuityResiduals {
    pub fn max(&self) -> f64 {
        self.value_at_0
            .max(self.slope_at_0)
            .max(self.value_at_l)
            .max(self.slope_at_l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionPoint {
    pub magnitude: f64,
    /// Phase of `T`, on the branch continuous in the barrier width from `L = 0`.
    pub phase: f64,
    pub probability: f64,
    /// Multiple of 2π (or of π for the closed oscillatory form) added to the
    /// principal value.
    pub branch: i64,
}

impl ScatteringSolution {
    pub fn phi_left(&self, x: f64) -> Complex64 {
        (I * self.k * x).exp() + self.r * (-I * self.k * x).exp()
    }

    pub fn phi_right(&self, x: f64) -> Complex64 {
        self.t * (I * self.k * (x - self.l)).exp()
    }

    pub fn phi_barrier(&self, x: f64) -> Complex64 {
        match self.interior {
            Interior::Evanescent {
                rho,
                alpha,
                beta_at_l,
            } => alpha * (-rho * x).exp() + beta_at_l * (rho * (x - self.l)).exp(),
            Interior::Oscillatory { q, alpha, beta } => {
                alpha * (-I * q * x).exp() + beta * (I * q * x).exp()
            }
            Interior::Linear { a, b } => a + b * x,
        }
    }

    pub fn dphi_barrier(&self, x: f64) -> Complex64 {
        match self.interior {
            Interior::Evanescent {
                rho,
                alpha,
                beta_at_l,
            } => -rho * alpha * (-rho * x).exp() + rho * beta_at_l * (rho * (x - self.l)).exp(),
            Interior::Oscillatory { q, alpha, beta } => {
                -I * q * alpha * (-I * q * x).exp() + I * q * beta * (I * q * x).exp()
            }
            Interior::Linear { b, .. } => b,
        }
    }

    /// Mismatches at `x = 0` are relative to the unit incident amplitude, those
    /// at `x = L` relative to `|T|`.
    pub fn residuals(&self) -> ContinuityResiduals {
        let k = self.k;
        let left = 1.0 + self.r;
        let dleft = I * k * (1.0 - self.r);
        let right = self.t;
        let dright = I * k * self.t;
        let t_scale = self.t.norm().max(f64::MIN_POSITIVE);
        ContinuityResiduals {
            value_at_0: (self.phi_barrier(0.0) - left).norm(),
            slope_at_0: (self.dphi_barrier(0.0) - dleft).norm() / k,
            value_at_l: (self.phi_barrier(self.l) - right).norm() / t_scale,
            slope_at_l: (self.dphi_barrier(self.l) - dright).norm() / (k * t_scale),
        }
    }

    /// `|R|² + |T|² − 1`.
    pub fn unitarity_residual(&self) -> f64 {
        self.r.norm_sqr() + self.t.norm_sqr() - 1.0
    }

    pub fn transmission(&self) -> TransmissionPoint {
        let principal = self.t.arg();
        let branch = match self.interior {
            Interior::Oscillatory { q, .. } => {
                // The L-continuous phase stays within π/2 of jπ, j = round(qL/π).
                let centre = (q * self.l / PI).round() * PI;
                ((centre - principal) / (2.0 * PI)).round() as i64
            }
            _ => 0,
        };
        let magnitude = self.t.norm();
        TransmissionPoint {
            magnitude,
            phase: principal + 2.0 * PI * branch as f64,
            probability: magnitude * magnitude,
            branch,
        }
    }
}

/// Map `(φ(0), φ'(0)) → (φ(L), φ'(L))` across the barrier, stored divided by
/// `cosh(ρL)` in the evanescent case (`scale` holds `1/cosh(ρL)`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Propagator {
    pub c: f64,
    pub s: f64,
    pub dc: f64,
    pub ds: f64,
    pub scale: f64,
}

impl Propagator {
    pub(crate) fn across(kind: ChannelKind, l: f64) -> Self {
        match kind {
            ChannelKind::Evanescent { rho } => {
                let x = rho * l;
                let th = x.tanh();
                Propagator {
                    c: 1.0,
                    s: th / rho,
                    dc: rho * th,
                    ds: 1.0,
                    scale: 1.0 / x.cosh(),
                }
            }
            ChannelKind::Oscillatory { q } => {
                let (sin, cos) = (q * l).sin_cos();
                Propagator {
                    c: cos,
                    s: sin / q,
                    dc: -q * sin,
                    ds: cos,
                    scale: 1.0,
                }
            }
            ChannelKind::Linear => Propagator {
                c: 1.0,
                s: l,
                dc: 0.0,
                ds: 1.0,
                scale: 1.0,
            },
        }
    }

    /// The same region traversed from right to left (`P M⁻¹ P`, `P = diag(1, −1)`).
    #[cfg(test)]
    pub(crate) fn mirrored(&self) -> Self {
        Propagator {
            c: self.ds,
            s: self.s,
            dc: self.dc,
            ds: self.c,
            scale: self.scale,
        }
    }
}

/// Solves for `(R, T)` given the interior propagator.
pub(crate) fn solve_with_propagator(k: f64, p: &Propagator) -> (Complex64, Complex64) {
    //   −(C − ikS) R +    T = C + ikS
    //  −(C' − ikS') R + ikT = C' + ikS'
    let ik = I * k;
    let det = -ik * p.c - k * k * p.s + p.dc - ik * p.ds;
    let t = -2.0 * ik * p.scale / det;
    let r = (ik * p.c - k * k * p.s - p.dc - ik * p.ds) / det;
    (r, t)
}

/// Exact `R`, `T` and interior coefficients from boundary matching.
pub fn match_boundaries(setup: &BarrierSetup, mode: &IncidentMode) -> Result<ScatteringSolution> {
    let zone = classify_mode(setup, mode);
    if zone == Zone::NonPropagating {
        return Err(Error::NonPropagating {
            energy: mode.energy(),
            mass: setup.m(),
        });
    }
    let k = mode.k();
    let l = setup.l();
    let channel = barrier_channel(setup, mode);
    let (r, t) = solve_with_propagator(k, &Propagator::across(channel.kind, l));

    let value0 = 1.0 + r;
    let slope0 = I * k * (1.0 - r);
    let (interior, alpha, beta) = match channel.kind {
        ChannelKind::Evanescent { rho } => {
            let alpha = 0.5 * (value0 - slope0 / rho);
            // Growing-mode coefficient taken from the x = L side.
            let beta_at_l = 0.5 * t * (1.0 + I * k / rho);
            let beta = beta_at_l * (-rho * l).exp();
            (
                Interior::Evanescent {
                    rho,
                    alpha,
                    beta_at_l,
                },
                alpha,
                beta,
            )
        }
        ChannelKind::Oscillatory { q } => {
            let alpha = 0.5 * (value0 - slope0 / (I * q));
            let beta = 0.5 * (value0 + slope0 / (I * q));
            (Interior::Oscillatory { q, alpha, beta }, alpha, beta)
        }
        ChannelKind::Linear => (
            Interior::Linear {
                a: value0,
                b: slope0,
            },
            value0,
            slope0,
        ),
    };

    Ok(ScatteringSolution {
        r,
        t,
        alpha,
        beta,
        zone,
        k,
        l,
        interior,
    })
}

/// `|T| = [1 + ((n² + ρ(n)²)² / (4n²ρ(n)²)) sinh²(ρ(n) wL)]^{−1/2}`.
pub fn magnitude_corrected(n2: f64, rho_n2: f64, wl: f64) -> f64 {
    let x = rho_n2.sqrt() * wl;
    let a = (n2 + rho_n2) / (2.0 * (n2 * rho_n2).sqrt());
    1.0 / (a * x.sinh()).hypot(1.0)
}

/// `|T|` exactly as printed: `[1 + sinh²(ρ(n) wL) / (4n²ρ(n)²)]^{−1/2}`.
pub fn magnitude_printed(n2: f64, rho_n2: f64, wl: f64) -> f64 {
    let x = rho_n2.sqrt() * wl;
    let a = 1.0 / (2.0 * (n2 * rho_n2).sqrt());
    1.0 / (a * x.sinh()).hypot(1.0)
}

/// `φ = arctan[((n² − ρ(n)²) / (2nρ(n))) tanh(ρ(n) wL)]`.
pub fn closed_form_phase(n2: f64, rho_n2: f64, wl: f64) -> f64 {
    let rho_n = rho_n2.sqrt();
    ((n2 - rho_n2) / (2.0 * n2.sqrt() * rho_n) * (rho_n * wl).tanh()).atan()
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

/// Closed-form transmission in the tunneling zone, with the magnitude factor
/// `(n² + ρ(n)²)²` that exact matching requires.
pub fn transmission_closed_form(
    setup: &BarrierSetup,
    mode: &IncidentMode,
) -> Result<TransmissionPoint> {
    let rho_n2 = tunneling_rho_n2(setup, mode)?;
    let magnitude = magnitude_corrected(mode.n2(), rho_n2, setup.wl());
    Ok(TransmissionPoint {
        magnitude,
        phase: closed_form_phase(mode.n2(), rho_n2, setup.wl()),
        probability: magnitude * magnitude,
        branch: 0,
    })
}

/// The tunneling magnitude formula as printed, without the `(n² + ρ(n)²)²`
/// factor. Differs from [`match_boundaries`] except as `v → 0`.
pub fn paper_eq4_magnitude(setup: &BarrierSetup, mode: &IncidentMode) -> Result<f64> {
    let rho_n2 = tunneling_rho_n2(setup, mode)?;
    Ok(magnitude_printed(mode.n2(), rho_n2, setup.wl()))
}

/// Closed form in the Klein and above-barrier zones (`ρ → iq`).
pub fn oscillatory_transmission(
    setup: &BarrierSetup,
    mode: &IncidentMode,
) -> Result<TransmissionPoint> {
    let zone = classify_mode(setup, mode);
    let ChannelKind::Oscillatory { q } = barrier_channel(setup, mode).kind else {
        return Err(Error::Zone {
            expected: "Klein or AboveBarrier",
            found: zone,
        });
    };
    let k = mode.k();
    let ql = q * setup.l();
    let (k2, q2) = (k * k, q * q);
    let magnitude = 1.0 / ((k2 - q2) / (2.0 * k * q) * ql.sin()).hypot(1.0);
    // arctan[c tan(qL)] + jπ with j = round(qL/π), evaluated on the reduced
    // angle so the branch is unambiguous at qL = (j + ½)π.
    let j = (ql / PI).round();
    let reduced = ql - j * PI;
    let c = (k2 + q2) / (2.0 * k * q);
    let phase = (c * reduced.sin()).atan2(reduced.cos().max(0.0)) + j * PI;
    Ok(TransmissionPoint {
        magnitude,
        phase,
        probability: magnitude * magnitude,
        branch: j as i64,
    })
}

/// `T = 2 / (2 − ikL)` on a zone edge, where the interior solution is linear.
pub fn edge_transmission(setup: &BarrierSetup, edge: Edge) -> Result<TransmissionPoint> {
    let mode = edge_mode(setup, edge)?;
    let t = 2.0 / Complex64::new(2.0, -mode.k() * setup.l());
    Ok(TransmissionPoint {
        magnitude: t.norm(),
        phase: t.arg(),
        probability: t.norm_sqr(),
        branch: 0,
    })
}
