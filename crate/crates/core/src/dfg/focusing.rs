//! Focusing function h(mu, xi) for collinear Gaussian-beam difference-frequency
//! generation, and the search for the focusing that maximises it.
//!
//! ```text
//! h = (1/N) ∫∫ exp(-i (t - t') s) / (1 - i A (t - t') + t t') dt dt'
//! ```
//!
//! with `s = dk b / 2`, `xi = L / b`, `mu = k_s / k_p` and a coupling
//! coefficient `A(mu)`. Swapping `t` and `t'` conjugates the integrand, so the
//! integral over any square domain is real; the imaginary part that survives
//! the quadrature is reported as a consistency residual.

use num_complex::Complex64;
use rayon::prelude::*;

use super::quadrature::{exact, integrate, Estimate, Tolerance};
use crate::error::{Error, Result};

/// Which printed form of the focusing integral to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FocusingKernel {
    /// Focus at the crystal centre: domain `[-xi, xi]^2`, normalisation `1/(4 xi)`,
    /// `A = ((1+mu)/(1-mu) - (1-mu)/(1+mu)) / 2`. Tends to `h = xi` for loose focusing.
    #[default]
    Centered,
    /// Focus on the entrance face: domain `[0, xi]^2`, normalisation `1/(2 xi)`,
    /// same `A`. Tends to `h = xi / 2` for loose focusing.
    EntranceFace,
    /// Centred domain with the summed coupling `A = (1+mu)/(1-mu) + (1-mu)/(1+mu)`.
    SumCoupling,
}

impl FocusingKernel {
    pub fn coupling(&self, mu: f64) -> f64 {
        let up = (1.0 + mu) / (1.0 - mu);
        let down = (1.0 - mu) / (1.0 + mu);
        match self {
            FocusingKernel::Centered | FocusingKernel::EntranceFace => 0.5 * (up - down),
            FocusingKernel::SumCoupling => up + down,
        }
    }

    fn domain(&self, xi: f64) -> (f64, f64) {
        match self {
            FocusingKernel::EntranceFace => (0.0, xi),
            _ => (-xi, xi),
        }
    }

    fn normalisation(&self, xi: f64) -> f64 {
        match self {
            FocusingKernel::EntranceFace => 1.0 / (2.0 * xi),
            _ => 1.0 / (4.0 * xi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusingInput {
    /// Wavevector ratio `k_s / k_p`.
    pub mu: f64,
    /// Focusing parameter `L / b`.
    pub xi: f64,
    /// Reduced phase mismatch `dk b / 2`.
    pub dk_half_b: f64,
}

impl FocusingInput {
    pub fn new(mu: f64, xi: f64, dk_half_b: f64) -> Self {
        Self { mu, xi, dk_half_b }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::InvalidInput(format!(
                "mu must lie in (0, 1), got {}",
                self.mu
            )));
        }
        if !(self.xi.is_finite() && self.xi > 0.0) {
            return Err(Error::InvalidInput(format!(
                "xi must be positive, got {}",
                self.xi
            )));
        }
        if !self.dk_half_b.is_finite() {
            return Err(Error::InvalidInput("phase mismatch must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FocusingOptions {
    pub kernel: FocusingKernel,
    pub tolerance: Tolerance,
}

impl Default for FocusingOptions {
    fn default() -> Self {
        Self {
            kernel: FocusingKernel::Centered,
            tolerance: Tolerance::default(),
        }
    }
}

impl FocusingOptions {
    pub fn with_kernel(kernel: FocusingKernel) -> Self {
        Self {
            kernel,
            ..Self::default()
        }
    }

    pub fn with_relative_tolerance(mut self, rel: f64) -> Self {
        self.tolerance.relative = rel;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusingValue {
    pub h: f64,
    /// Imaginary part of the normalised integral; zero in exact arithmetic.
    pub imag_residual: f64,
    /// Absolute error estimate on `h`.
    pub error: f64,
}

/// `h` with the default (centred) kernel and a 1e-8 relative tolerance.
pub fn focusing_function(input: &FocusingInput) -> Result<f64> {
    focusing_function_with(input, &FocusingOptions::default()).map(|v| v.h)
}

/// Nested adaptive quadrature over `t'` (inner) and `t` (outer).
///
/// Away from phase matching the outer integral cancels strongly, so inner
/// errors relative to each inner value would swamp the target. A coarse
/// first pass sizes the integral and the inner integrals are then held to an
/// absolute tolerance a twentieth of the outer target spread over the domain.
pub fn focusing_function_with(input: &FocusingInput, opts: &FocusingOptions) -> Result<FocusingValue> {
    input.validate()?;
    let a_coef = opts.kernel.coupling(input.mu);
    let s = input.dk_half_b;
    let (lo, hi) = opts.kernel.domain(input.xi);
    let span = hi - lo;
    let integrand = move |t: f64, tp: f64| {
        let d = t - tp;
        let num = Complex64::new(0.0, -d * s).exp();
        let den = Complex64::new(1.0 + t * tp, -a_coef * d);
        num / den
    };
    let nested = |outer: &Tolerance, inner: &Tolerance| {
        integrate(
            |t| integrate(|tp| exact(integrand(t, tp)), lo, hi, inner),
            lo,
            hi,
            outer,
        )
    };

    // |integrand| <= 1 on the domain, so span^2 bounds the integral
    let bound = span * span;
    let rough = nested(
        &Tolerance {
            relative: 1e-5,
            absolute: 1e-9 * bound,
            ..opts.tolerance
        },
        &Tolerance {
            relative: 0.0,
            absolute: 1e-10 * span,
            ..opts.tolerance
        },
    )?;
    let floor = opts.tolerance.absolute.max(1e-14 * bound);
    let target = floor.max(opts.tolerance.relative * rough.value.norm());
    let outer = Tolerance {
        absolute: floor,
        ..opts.tolerance
    };
    let inner = Tolerance {
        relative: 0.0,
        absolute: 0.05 * target / span,
        ..opts.tolerance
    };
    let raw: Estimate = nested(&outer, &inner)?;
    let norm = opts.kernel.normalisation(input.xi);
    Ok(FocusingValue {
        h: raw.value.re * norm,
        imag_residual: raw.value.im * norm,
        error: raw.error * norm,
    })
}

/// Phase mismatch maximising `h` at fixed `mu` and `xi`, with the maximum.
///
/// Scans `s` around the coupling coefficient (where the small-`xi` optimum
/// sits) and refines the best bracket by golden section.
pub fn best_phase_mismatch(mu: f64, xi: f64, opts: &FocusingOptions) -> Result<(f64, f64)> {
    let centre = opts.kernel.coupling(mu);
    let h_at = |s: f64| focusing_function_with(&FocusingInput::new(mu, xi, s), opts).map(|v| v.h);
    let step = 0.25;
    let count = 49;
    let grid: Vec<f64> = (0..count)
        .map(|j| centre + step * (j as f64 - (count / 2) as f64))
        .collect();
    let mut values = Vec::with_capacity(count);
    for &s in &grid {
        values.push(h_at(s)?);
    }
    let best = argmax(&values);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(count - 1)];
    let (s, h) = golden_max(h_at, lo, hi, 1e-6)?;
    if h >= values[best] {
        Ok((s, h))
    } else {
        Ok((grid[best], values[best]))
    }
}

/// One point of a focusing scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusSample {
    pub xi: f64,
    pub h: f64,
    pub dk_half_b: f64,
}

/// `h` on `points` log-spaced values of `xi` in `[xi_min, xi_max]`, either at
/// the fixed mismatch `dk_half_b` or with the mismatch optimised at each `xi`.
pub fn scan_xi(
    mu: f64,
    xi_min: f64,
    xi_max: f64,
    points: usize,
    optimize_dk: bool,
    dk_half_b: f64,
    opts: &FocusingOptions,
) -> Result<Vec<FocusSample>> {
    if !(xi_min > 0.0 && xi_max > xi_min && points >= 2) {
        return Err(Error::InvalidInput(format!(
            "bad xi scan [{xi_min}, {xi_max}] with {points} points"
        )));
    }
    let ratio = (xi_max / xi_min).ln();
    (0..points)
        .into_par_iter()
        .map(|j| {
            let xi = xi_min * (ratio * j as f64 / (points - 1) as f64).exp();
            sample(mu, xi, optimize_dk, dk_half_b, opts)
        })
        .collect()
}

fn sample(mu: f64, xi: f64, optimize_dk: bool, dk_half_b: f64, opts: &FocusingOptions) -> Result<FocusSample> {
    if optimize_dk {
        let (s, h) = best_phase_mismatch(mu, xi, opts)?;
        Ok(FocusSample { xi, h, dk_half_b: s })
    } else {
        let h = focusing_function_with(&FocusingInput::new(mu, xi, dk_half_b), opts)?.h;
        Ok(FocusSample {
            xi,
            h,
            dk_half_b,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimumFocus {
    pub xi: f64,
    pub h: f64,
    pub dk_half_b: f64,
    /// The coarse scan the optimum was refined from.
    pub profile: Vec<FocusSample>,
}

impl OptimumFocus {
    /// True when the coarse profile has a single local maximum.
    pub fn is_unimodal(&self) -> bool {
        let h: Vec<f64> = self.profile.iter().map(|p| p.h).collect();
        count_local_maxima(&h) == 1
    }
}

pub const OPTIMUM_XI_MIN: f64 = 0.05;
pub const OPTIMUM_XI_MAX: f64 = 6.0;
const OPTIMUM_GRID: usize = 60;

/// Focusing parameter maximising `h` over `xi` in `[0.05, 6]`: 60 log-spaced
/// samples, then golden section to 1e-3 relative around the best one. With
/// `optimize_dk` the mismatch is re-optimised at every `xi`; otherwise it is 0.
pub fn optimum_focusing(mu: f64, optimize_dk: bool, opts: &FocusingOptions) -> Result<OptimumFocus> {
    FocusingInput::new(mu, 1.0, 0.0).validate()?;
    let profile = scan_xi(mu, OPTIMUM_XI_MIN, OPTIMUM_XI_MAX, OPTIMUM_GRID, optimize_dk, 0.0, opts)?;
    let h: Vec<f64> = profile.iter().map(|p| p.h).collect();
    let best = argmax(&h);
    let lo = profile[best.saturating_sub(1)].xi;
    let hi = profile[(best + 1).min(profile.len() - 1)].xi;
    let h_of_xi = |xi: f64| sample(mu, xi, optimize_dk, 0.0, opts).map(|p| p.h);
    let (xi, _) = golden_max(h_of_xi, lo, hi, 1e-3 * profile[best].xi)?;
    let refined = sample(mu, xi, optimize_dk, 0.0, opts)?;
    let top = if refined.h >= profile[best].h {
        refined
    } else {
        profile[best]
    };
    Ok(OptimumFocus {
        xi: top.xi,
        h: top.h,
        dk_half_b: top.dk_half_b,
        profile,
    })
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

pub(crate) fn count_local_maxima(v: &[f64]) -> usize {
    if v.len() < 2 {
        return v.len();
    }
    let n = v.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || v[i] > v[i - 1];
            let right = i == n - 1 || v[i] >= v[i + 1];
            left && right
        })
        .count()
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximisation on `[lo, hi]` down to bracket width `tol`.
fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}
