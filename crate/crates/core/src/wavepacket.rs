//! Gaussian wave packets built from the stationary solutions.
//!
//! The incident packet `∫ g(k − k0) e^{i(kx − E(k)t)} dk`, with
//! `g(k − k0) = exp(−(k − k0)²/4σ²)` and `E(k) = +sqrt(k² + m²)`, peaks at
//! `x = 0` when `t = 0`. Its transmitted part beyond the barrier is
//! `∫ g T(k) e^{i(k(x − L) − E t)} dk`, whose peak reaches `x = L` at
//! `t ≈ t_φ(k0)` when the spectrum is narrow and weakly filtered.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{mode_from_momentum, BarrierSetup};
use crate::numeric::{parabolic_offset, simpson_refine, simpson_weights};
use crate::phasetime::phase_time;
use crate::scattering::match_boundaries;

pub const DEFAULT_SUPPORT_HALFWIDTH: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub k0: f64,
    pub sigma_k: f64,
    /// Truncation of the support at `k0 ± W·σ_k`.
    pub support_halfwidth: f64,
}

impl SpectrumSpec {
    pub fn new(k0: f64, sigma_k: f64) -> Result<Self> {
        Self::with_support(k0, sigma_k, DEFAULT_SUPPORT_HALFWIDTH)
    }

    pub fn with_support(k0: f64, sigma_k: f64, support_halfwidth: f64) -> Result<Self> {
        if !(sigma_k > 0.0) || !sigma_k.is_finite() {
            return Err(Error::domain(format!(
                "sigma_k must be positive, got {sigma_k}"
            )));
        }
        if !(support_halfwidth > 0.0) || !support_halfwidth.is_finite() {
            return Err(Error::domain(format!(
                "support half-width must be positive, got {support_halfwidth}"
            )));
        }
        let spec = SpectrumSpec {
            k0,
            sigma_k,
            support_halfwidth,
        };
        let lower_edge = spec.k_min();
        if !(lower_edge > 0.0) {
            return Err(Error::SupportCrossesThreshold { lower_edge });
        }
        Ok(spec)
    }

    pub fn k_min(&self) -> f64 {
        self.k0 - self.support_halfwidth * self.sigma_k
    }

    pub fn k_max(&self) -> f64 {
        self.k0 + self.support_halfwidth * self.sigma_k
    }

    pub fn amplitude(&self, k: f64) -> f64 {
        let u = (k - self.k0) / (2.0 * self.sigma_k);
        (-u * u).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Coarsest grid tried, as `log2` of the interval count.
    pub min_log2: u32,
    /// Finest grid, as `log2` of the interval count.
    pub max_log2: u32,
    /// Successive intensities must agree to this relative tolerance.
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            min_log2: 5,
            max_log2: 14,
            rel_tol: 1e-8,
        }
    }
}

/// Spectrum with the barrier response tabulated on the finest dyadic grid.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    spectrum: SpectrumSpec,
    quadrature: QuadratureOptions,
    l: f64,
    mass: f64,
    h: f64,
    k: Vec<f64>,
    energy: Vec<f64>,
    g: Vec<f64>,
    g_t: Vec<Complex64>,
    g_r: Vec<Complex64>,
    /// `(∫ g dk)²`, the peak intensity of the free packet.
    reference_intensity: f64,
}

impl SpectralGrid {
    pub fn new(
        setup: &BarrierSetup,
        spectrum: &SpectrumSpec,
        quadrature: QuadratureOptions,
    ) -> Result<Self> {
        let spectrum =
            SpectrumSpec::with_support(spectrum.k0, spectrum.sigma_k, spectrum.support_halfwidth)?;
        if quadrature.min_log2 < 1 || quadrature.min_log2 > quadrature.max_log2 {
            return Err(Error::domain("quadrature needs 1 ≤ min_log2 ≤ max_log2"));
        }
        let n = 1usize << quadrature.max_log2;
        let (a, b) = (spectrum.k_min(), spectrum.k_max());
        let h = (b - a) / n as f64;
        let k: Vec<f64> = (0..=n).map(|j| a + j as f64 * h).collect();
        let amplitudes: Vec<(Complex64, Complex64)> = k
            .par_iter()
            .map(|&kj| {
                let sol = match_boundaries(setup, &mode_from_momentum(setup, kj)?)?;
                Ok((sol.t, sol.r))
            })
            .collect::<Result<_>>()?;
        let g: Vec<f64> = k.iter().map(|&kj| spectrum.amplitude(kj)).collect();
        let energy = k.iter().map(|&kj| kj.hypot(setup.m())).collect();
        let g_t = g
            .iter()
            .zip(&amplitudes)
            .map(|(gj, (t, _))| gj * t)
            .collect();
        let g_r = g
            .iter()
            .zip(&amplitudes)
            .map(|(gj, (_, r))| gj * r)
            .collect();
        let w = simpson_weights(n, h);
        let integral_g: f64 = w.iter().zip(&g).map(|(wj, gj)| wj * gj).sum();
        Ok(SpectralGrid {
            spectrum,
            quadrature,
            l: setup.l(),
            mass: setup.m(),
            h,
            k,
            energy,
            g,
            g_t,
            g_r,
            reference_intensity: integral_g * integral_g,
        })
    }

    pub fn spectrum(&self) -> &SpectrumSpec {
        &self.spectrum
    }

    fn integrate(&self, amplitude: impl Fn(usize) -> Complex64) -> Result<Complex64> {
        let floor = 1e-6 * self.reference_intensity;
        let tol = self.quadrature.rel_tol;
        let (value, _) = simpson_refine(
            amplitude,
            self.h,
            self.quadrature.min_log2,
            self.quadrature.max_log2,
            |prev, cur| {
                let (ip, ic) = (prev.norm_sqr(), cur.norm_sqr());
                (ip - ic).abs() <= tol * ic.max(floor)
            },
        )?;
        Ok(value)
    }

    /// Transmitted amplitude at `x ≥ L`.
    pub fn transmitted(&self, x: f64, t: f64) -> Result<Complex64> {
        if x < self.l {
            return Err(Error::domain(format!(
                "transmitted packet lives at x ≥ L = {}, got x = {x}",
                self.l
            )));
        }
        let dx = x - self.l;
        self.integrate(|j| self.g_t[j] * Complex64::cis(self.k[j] * dx - self.energy[j] * t))
    }

    /// Free (incident) amplitude, `T ≡ 1`.
    pub fn incident(&self, x: f64, t: f64) -> Result<Complex64> {
        self.integrate(|j| self.g[j] * Complex64::cis(self.k[j] * x - self.energy[j] * t))
    }

    /// Reflected amplitude at `x ≤ 0`.
    pub fn reflected(&self, x: f64, t: f64) -> Result<Complex64> {
        if x > 0.0 {
            return Err(Error::domain(format!(
                "reflected packet lives at x ≤ 0, got x = {x}"
            )));
        }
        self.integrate(|j| self.g_r[j] * Complex64::cis(-self.k[j] * x - self.energy[j] * t))
    }

    /// Spectral distortion of the transmitted packet on the finest grid.
    #[allow(clippy::needless_range_loop)]
    pub fn distortion(&self) -> DistortionMetrics {
        let n = self.k.len() - 1;
        let w = simpson_weights(n, self.h);
        let (mut g2, mut t2, mut kg2, mut kt2, mut overlap) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for j in 0..=n {
            let a = self.g[j] * self.g[j];
            let b = self.g_t[j].norm_sqr();
            g2 += w[j] * a;
            t2 += w[j] * b;
            kg2 += w[j] * self.k[j] * a;
            kt2 += w[j] * self.k[j] * b;
            overlap += w[j] * self.g[j] * self.g_t[j].norm();
        }
        let transmitted_norm = t2 / g2;
        if t2 == 0.0 {
            return DistortionMetrics {
                transmitted_norm,
                shape_distance: std::f64::consts::SQRT_2,
                mean_k_shift: 0.0,
            };
        }
        // ‖a/‖a‖ − b/‖b‖‖² = 2 − 2⟨a, b⟩/(‖a‖‖b‖)
        let cosine = (overlap / (g2 * t2).sqrt()).min(1.0);
        DistortionMetrics {
            transmitted_norm,
            shape_distance: (2.0 - 2.0 * cosine).max(0.0).sqrt(),
            mean_k_shift: kt2 / t2 - kg2 / g2,
        }
    }

    /// Temporal width `1/(2σ_k v_g)` of the free packet intensity at fixed `x`.
    pub fn temporal_width(&self) -> f64 {
        let k0 = self.spectrum.k0;
        let vg = k0 / k0.hypot(self.mass);
        1.0 / (2.0 * self.spectrum.sigma_k * vg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalEstimate {
    pub t_peak: f64,
    pub t_predicted: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionMetrics {
    /// `∫|T g|² dk / ∫|g|² dk`.
    pub transmitted_norm: f64,
    /// L² distance between unit-normalised `|T| g` and `g`.
    pub shape_distance: f64,
    /// Centroid of `|T g|²` minus centroid of `|g|²`.
    pub mean_k_shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub t: f64,
    pub intensity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketOptions {
    pub time_samples: usize,
    /// Half-window in units of `max(τ, |t_φ|)`.
    pub window_factor: f64,
    pub quadrature: QuadratureOptions,
}

impl Default for PacketOptions {
    fn default() -> Self {
        PacketOptions {
            time_samples: 2001,
            window_factor: 5.0,
            quadrature: QuadratureOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketRun {
    pub setup: BarrierSetup,
    pub spectrum: SpectrumSpec,
    pub time_window: (f64, f64),
    /// Intensity `|ψ(L, t)|²` of the transmitted packet.
    pub samples: Vec<TimeSample>,
    pub tau: f64,
    pub arrival: ArrivalEstimate,
    pub distortion: DistortionMetrics,
}

/// Locates the intensity maximum with three-point parabolic refinement and
/// compares it with `t_predicted`.
///
/// The gap is normalised by `max(|t_predicted|, τ)`, or by `fallback_scale`
/// when both vanish.
pub fn estimate_arrival(
    samples: &[TimeSample],
    t_predicted: f64,
    tau: f64,
    fallback_scale: f64,
) -> Result<ArrivalEstimate> {
    if samples.len() < 3 {
        return Err(Error::NoPeak);
    }
    let rising = samples.windows(2).all(|p| p[1].intensity >= p[0].intensity);
    let falling = samples.windows(2).all(|p| p[1].intensity <= p[0].intensity);
    if rising || falling {
        return Err(Error::NoPeak);
    }
    let (imax, _) = samples
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, s)| {
            if s.intensity > best.1 {
                (i, s.intensity)
            } else {
                best
            }
        });
    if imax == 0 || imax == samples.len() - 1 {
        return Err(Error::Clipped { t: samples[imax].t });
    }
    let (l, c, r) = (&samples[imax - 1], &samples[imax], &samples[imax + 1]);
    let dt = 0.5 * (r.t - l.t);
    let t_peak = c.t + dt * parabolic_offset(l.intensity, c.intensity, r.intensity);
    let mut scale = t_predicted.abs().max(tau);
    if scale == 0.0 {
        scale = fallback_scale;
    }
    Ok(ArrivalEstimate {
        t_peak,
        t_predicted,
        relative_gap: (t_peak - t_predicted).abs() / scale,
    })
}

/// Stationary-phase check for one setup and spectrum: samples the transmitted
/// intensity at `x = L` around `t_φ(k0)`, locates the peak and measures the
/// spectral distortion.
pub fn run_packet(
    setup: &BarrierSetup,
    spectrum: &SpectrumSpec,
    options: &PacketOptions,
) -> Result<PacketRun> {
    if options.time_samples < 3 {
        return Err(Error::domain("need at least three time samples"));
    }
    let grid = SpectralGrid::new(setup, spectrum, options.quadrature)?;
    let mode = mode_from_momentum(setup, spectrum.k0)?;
    let pt = phase_time(setup, &mode)?;
    let (t_pred, tau) = (pt.t_phi, pt.tau);
    let mut half = options.window_factor * tau.max(t_pred.abs());
    if half == 0.0 {
        half = options.window_factor * grid.temporal_width();
    }
    let (t_min, t_max) = (t_pred - half, t_pred + half);
    let last = (options.time_samples - 1) as f64;
    let l = setup.l();
    let samples: Vec<TimeSample> = (0..options.time_samples)
        .into_par_iter()
        .map(|i| {
            let t = t_min + (t_max - t_min) * i as f64 / last;
            Ok(TimeSample {
                t,
                intensity: grid.transmitted(l, t)?.norm_sqr(),
            })
        })
        .collect::<Result<_>>()?;
    let arrival = estimate_arrival(&samples, t_pred, tau, grid.temporal_width())?;
    Ok(PacketRun {
        setup: *setup,
        spectrum: *grid.spectrum(),
        time_window: (t_min, t_max),
        samples,
        tau,
        arrival,
        distortion: grid.distortion(),
    })
}

/// Spectral distortion without sampling any time trace.
pub fn distortion(setup: &BarrierSetup, spectrum: &SpectrumSpec) -> Result<DistortionMetrics> {
    Ok(SpectralGrid::new(setup, spectrum, QuadratureOptions::default())?.distortion())
}

/// Writes `t,intensity` rows.
pub fn write_samples_csv(samples: &[TimeSample], path: &Path) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyRecords);
    }
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    for s in samples {
        w.serialize(s).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;
    use crate::kinematics::mode_from_n2;
    use crate::numeric::simpson_weights;

    fn spec_at(setup: &BarrierSetup, n2: f64, frac: f64) -> SpectrumSpec {
        let k0 = mode_from_n2(setup, n2).unwrap().k();
        SpectrumSpec::new(k0, frac * k0).unwrap()
    }

    #[test]
    fn spectrum_validation() {
        assert!(matches!(
            SpectrumSpec::new(1.0, 0.2),
            Err(Error::SupportCrossesThreshold { .. })
        ));
        assert!(SpectrumSpec::new(1.0, 0.0).is_err());
        let s = SpectrumSpec::new(10.0, 0.2).unwrap();
        assert_relative_eq!(s.amplitude(10.3), s.amplitude(9.7));
        assert_eq!(s.amplitude(10.0), 1.0);
    }

    #[test]
    fn zero_width_barrier_is_identity_filter() {
        let s = BarrierSetup::new(1.0, 10.0, 0.0).unwrap();
        let spec = SpectrumSpec::new(10.0, 0.2).unwrap();
        let grid = SpectralGrid::new(&s, &spec, QuadratureOptions::default()).unwrap();
        for (x, t) in [(0.0, 0.0), (0.5, 1.0), (3.0, -2.0)] {
            let a = grid.transmitted(x, t).unwrap();
            let b = grid.incident(x, t).unwrap();
            assert!((a - b).norm() < 1e-12 * b.norm().max(1e-3));
        }
        let d = grid.distortion();
        assert_relative_eq!(d.transmitted_norm, 1.0, max_relative = 1e-14);
        assert!(d.shape_distance < 1e-7);
        assert!(d.mean_k_shift.abs() < 1e-12);
        let run = run_packet(&s, &spec, &PacketOptions::default()).unwrap();
        assert!(run.arrival.t_peak.abs() < 1e-6 * grid.temporal_width());
    }

    #[test]
    fn free_packet_is_centred_and_moves_at_group_velocity() {
        let s = BarrierSetup::new(1.0, 10.0, 0.0).unwrap();
        let spec = SpectrumSpec::new(10.0, 0.2).unwrap();
        let grid = SpectralGrid::new(&s, &spec, QuadratureOptions::default()).unwrap();
        let peak = |t: f64, centre: f64, span: f64| {
            let xs: Vec<f64> = (0..=400)
                .map(|i| centre - span + 2.0 * span * i as f64 / 400.0)
                .collect();
            let samples: Vec<TimeSample> = xs
                .iter()
                .map(|&x| TimeSample {
                    t: x,
                    intensity: grid.incident(x, t).unwrap().norm_sqr(),
                })
                .collect();
            estimate_arrival(&samples, 0.0, 1.0, 1.0).unwrap().t_peak
        };
        assert!(peak(0.0, 0.0, 5.0).abs() < 1e-6);
        let vg = 10.0 / 101f64.sqrt();
        let t = 50.0;
        let x = peak(t, vg * t, 10.0);
        assert!((x / (vg * t) - 1.0).abs() < 0.01, "{x} vs {}", vg * t);
    }

    #[test]
    fn norm_is_conserved() {
        let s = BarrierSetup::new(1.0, 10.0, 0.0).unwrap();
        let spec = SpectrumSpec::new(10.0, 0.5).unwrap();
        let grid = SpectralGrid::new(&s, &spec, QuadratureOptions::default()).unwrap();
        let norm_at = |t: f64| {
            let centre = t * 10.0 / 101f64.sqrt();
            let n = 2000;
            let (a, b) = (centre - 12.0, centre + 12.0);
            let h = (b - a) / n as f64;
            simpson_weights(n, h)
                .iter()
                .enumerate()
                .map(|(i, w)| w * grid.incident(a + i as f64 * h, t).unwrap().norm_sqr())
                .sum::<f64>()
        };
        let n0 = norm_at(0.0);
        // Parseval: 2π ∫ g² dk = 2π σ √(2π)
        assert_relative_eq!(
            n0,
            2.0 * std::f64::consts::PI * 0.5 * (2.0 * std::f64::consts::PI).sqrt(),
            max_relative = 1e-6
        );
        for t in [5.0, 20.0] {
            assert_relative_eq!(norm_at(t), n0, max_relative = 1e-6);
        }
    }

    #[test]
    fn quadrature_is_self_consistent() {
        let s = BarrierSetup::from_dimensionless(1.0, 10.0, 0.1 * 20f64.sqrt()).unwrap();
        let spec = spec_at(&s, 5.0, 0.05);
        let grid = SpectralGrid::new(&s, &spec, QuadratureOptions::default()).unwrap();
        let forced = QuadratureOptions {
            min_log2: 14,
            max_log2: 15,
            rel_tol: 1e-8,
        };
        let finer = SpectralGrid::new(&s, &spec, forced).unwrap();
        for t in [-0.3, 0.04, 0.5] {
            let ia = grid.transmitted(s.l(), t).unwrap().norm_sqr();
            let ib = finer.transmitted(s.l(), t).unwrap().norm_sqr();
            assert!((ia - ib).abs() < 1e-8 * ia, "{ia} vs {ib}");
        }
    }

    #[test]
    fn narrow_spectra_follow_stationary_phase() {
        let s = BarrierSetup::from_dimensionless(1.0, 10.0, 0.1 * 20f64.sqrt()).unwrap();
        let mut gaps = Vec::new();
        for frac in [0.1, 0.05, 0.02] {
            let run = run_packet(&s, &spec_at(&s, 5.0, frac), &PacketOptions::default()).unwrap();
            gaps.push(run.arrival.relative_gap);
        }
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 0.05);
    }

    #[test]
    fn transmitted_norm_tracks_centre_transmission() {
        let s = BarrierSetup::from_dimensionless(1.0, 10.0, 0.1 * 20f64.sqrt()).unwrap();
        let mode = mode_from_n2(&s, 5.0).unwrap();
        let t2 = match_boundaries(&s, &mode).unwrap().t.norm_sqr();
        let errors: Vec<f64> = [0.04, 0.02, 0.01]
            .iter()
            .map(|&frac| {
                (distortion(&s, &spec_at(&s, 5.0, frac))
                    .unwrap()
                    .transmitted_norm
                    - t2)
                    .abs()
            })
            .collect();
        for pair in errors.windows(2) {
            let reduction = pair[0] / pair[1];
            assert!((3.5..4.5).contains(&reduction), "{errors:?}");
        }
    }

    #[test]
    fn non_relativistic_opaque_barrier_filters() {
        // v = 1e-4, n² = 1/2, κL = 10
        let s = BarrierSetup::from_dimensionless(1.0, 1e-4, 10.0 * 2f64.sqrt()).unwrap();
        let d = distortion(&s, &spec_at(&s, 0.5, 0.02)).unwrap();
        assert!(d.mean_k_shift > 0.0);
        assert!(d.transmitted_norm < 1e-6);
    }

    #[test]
    fn accelerated_arrival_near_lower_edge() {
        let s = BarrierSetup::from_dimensionless(1.0, 10.0, 0.1 * 20f64.sqrt()).unwrap();
        let run = run_packet(&s, &spec_at(&s, 4.05, 0.02), &PacketOptions::default()).unwrap();
        assert!(run.arrival.t_peak < run.tau, "{:?}", run.arrival);
    }

    #[test]
    fn arrival_errors() {
        let rising: Vec<TimeSample> = (0..5)
            .map(|i| TimeSample {
                t: i as f64,
                intensity: i as f64,
            })
            .collect();
        assert!(matches!(
            estimate_arrival(&rising, 0.0, 1.0, 1.0),
            Err(Error::NoPeak)
        ));
        let clipped: Vec<TimeSample> = [3.0, 1.0, 2.0, 0.5]
            .iter()
            .enumerate()
            .map(|(i, &y)| TimeSample {
                t: i as f64,
                intensity: y,
            })
            .collect();
        assert!(matches!(
            estimate_arrival(&clipped, 0.0, 1.0, 1.0),
            Err(Error::Clipped { .. })
        ));
    }

    #[test]
    fn runs_are_bit_identical() {
        let s = BarrierSetup::from_dimensionless(1.0, 10.0, 0.1 * 20f64.sqrt()).unwrap();
        let opts = PacketOptions {
            time_samples: 101,
            ..Default::default()
        };
        let spec = spec_at(&s, 5.0, 0.05);
        let a = run_packet(&s, &spec, &opts).unwrap();
        let b = run_packet(&s, &spec, &opts).unwrap();
        assert_eq!(a, b);
    }
}
