//! Small numerical kernels shared by the phase-time, wave-packet and sweep code.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Result of a Richardson-extrapolated central difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub value: f64,
    /// Smallest half-step used.
    pub step: f64,
    /// Change between the last two extrapolated estimates.
    pub change: f64,
}

/// Central difference `[f(x+h) − f(x−h)] / 2h` with Richardson extrapolation
/// over step halving.
///
/// Halving stops once two successive extrapolated estimates differ by at most
/// `rel_tol · max(|estimate|, scale)`. `scale` sets the magnitude below which
/// the comparison becomes absolute; pass zero for a purely relative test.
pub fn richardson_central<F>(
    mut f: F,
    x: f64,
    h0: f64,
    rel_tol: f64,
    scale: f64,
    max_halvings: usize,
) -> Result<Derivative>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut central = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };

    let mut h = h0;
    let mut coarse = central(h)?;
    let mut previous: Option<f64> = None;
    let mut last_change = f64::INFINITY;
    for _ in 0..max_halvings {
        h *= 0.5;
        let fine = central(h)?;
        let extrapolated = (4.0 * fine - coarse) / 3.0;
        if let Some(prev) = previous {
            last_change = (extrapolated - prev).abs();
            if last_change <= rel_tol * extrapolated.abs().max(scale) {
                return Ok(Derivative {
                    value: extrapolated,
                    step: h,
                    change: last_change,
                });
            }
        }
        previous = Some(extrapolated);
        coarse = fine;
    }
    Err(Error::NonConvergent {
        last_change: last_change / previous.map_or(1.0, |p| p.abs().max(scale)),
    })
}

/// Composite Simpson rule over a dyadic grid of `2^max_log2` intervals of
/// width `h`, refined by halving from `2^min_log2` intervals until
/// `converged(previous, current)` holds.
///
/// `sample(j)` returns the integrand at the j-th node of the finest grid.
/// Returns the integral and the number of intervals used.
pub fn simpson_refine<F, C>(
    sample: F,
    h: f64,
    min_log2: u32,
    max_log2: u32,
    mut converged: C,
) -> Result<(Complex64, usize)>
where
    F: Fn(usize) -> Complex64,
    C: FnMut(Complex64, Complex64) -> bool,
{
    debug_assert!(min_log2 >= 1 && min_log2 <= max_log2);
    let n_max = 1usize << max_log2;

    // Trapezoid sums T_l on 2^l intervals; Simpson S_l = (4 T_l − T_{l−1}) / 3.
    let mut trap = 0.5 * (n_max as f64) * h * (sample(0) + sample(n_max));
    let mut simpson_prev: Option<Complex64> = None;
    for level in 1..=max_log2 {
        let stride = n_max >> level;
        let step = h * stride as f64;
        let mut odd = Complex64::new(0.0, 0.0);
        let mut j = stride;
        while j < n_max {
            odd += sample(j);
            j += 2 * stride;
        }
        let refined = 0.5 * trap + step * odd;
        let simpson = (4.0 * refined - trap) / 3.0;
        trap = refined;
        if level > min_log2 {
            if let Some(prev) = simpson_prev {
                if converged(prev, simpson) {
                    return Ok((simpson, 1 << level));
                }
            }
        }
        simpson_prev = Some(simpson);
    }
    Err(Error::QuadratureNonConvergent { intervals: n_max })
}

/// Simpson weights for `n` (even) equal intervals of width `h`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2 && n % 2 == 0, "Simpson needs an even interval count");
    (0..=n)
        .map(|j| {
            let c = if j == 0 || j == n {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}

/// Vertex offset (in sample units, within ±0.5) of the parabola through three
/// equally spaced samples centred on the middle one.
pub fn parabolic_offset(left: f64, centre: f64, right: f64) -> f64 {
    let curvature = left - 2.0 * centre + right;
    if curvature == 0.0 {
        return 0.0;
    }
    (0.5 * (left - right) / curvature).clamp(-0.5, 0.5)
}

/// Adds multiples of 2π so consecutive phases never jump by more than π.
pub fn unwrap_in_place(phases: &mut [f64]) {
    let mut shift = 0.0;
    for i in 1..phases.len() {
        let raw = phases[i] + shift;
        let jump = raw - phases[i - 1];
        let turns = (jump / (2.0 * PI)).round();
        shift -= turns * 2.0 * PI;
        phases[i] = raw - turns * 2.0 * PI;
    }
}

/// `sinh(x)/x`, exact at zero.
pub fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 * (1.0 + x2 / 20.0)
    } else {
        x.sinh() / x
    }
}

/// `(sinh x cosh x / x − 1) / x²`, which tends to 2/3 at zero.
pub fn sinh_cosh_excess(x: f64) -> f64 {
    let x2 = x * x;
    if x.abs() < 0.1 {
        // (sinh(2x)/(2x) − 1)/x² = Σ_{j≥1} 4^j x^{2j−2} / (2j+1)!
        2.0 / 3.0
            + x2 * (2.0 / 15.0 + x2 * (4.0 / 315.0 + x2 * (2.0 / 2835.0 + x2 * (4.0 / 155925.0))))
    } else {
        ((2.0 * x).sinh() / (2.0 * x) - 1.0) / x2
    }
}

/// Least-squares slope of `y` against `x`.
pub fn linear_fit_slope(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
