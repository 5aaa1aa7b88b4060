//! One-dimensional scalar wave optics with a thin conversion plane.

pub mod fringe;
pub mod visibility;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

pub use fringe::{fringe_analysis, FringeReport};
pub use visibility::{visibility_vs_occupation, Saturating, VisibilityCurve, VisibilityModel, BETA_FIT};

use crate::error::{Error, Result};
use crate::kinematics::idler_wavelength;
use crate::scene::{DetectionMode, Detection, Element, IdlerFrame, Scene, Source, Wavefront};

/// Spectral power fraction allowed where the propagation kernel is undersampled.
pub const ALIASING_POWER_FRACTION: f64 = 1e-6;

/// Complex amplitude on a uniform transverse grid `x_j = origin + j dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    pub samples: Vec<Complex64>,
    pub dx: f64,
    pub wavelength_vac: f64,
    pub origin: f64,
}

impl Field1D {
    pub fn new(samples: Vec<Complex64>, dx: f64, wavelength_vac: f64, origin: f64) -> Result<Self> {
        let field = Self {
            samples,
            dx,
            wavelength_vac,
            origin,
        };
        field.validate()?;
        Ok(field)
    }

    /// `n` samples over `[-window/2, window/2)` filled from `f(x)`.
    pub fn from_fn(n: usize, window: f64, wavelength_vac: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let dx = window / n as f64;
        let origin = -0.5 * window;
        let samples = (0..n).map(|j| f(origin + j as f64 * dx)).collect();
        Self::new(samples, dx, wavelength_vac, origin)
    }

    pub fn plane(n: usize, window: f64, wavelength_vac: f64) -> Result<Self> {
        Self::from_fn(n, window, wavelength_vac, |_| Complex64::new(1.0, 0.0))
    }

    /// Gaussian amplitude `exp(-(x - center)^2 / waist^2)` with flat phase.
    pub fn gaussian(n: usize, window: f64, wavelength_vac: f64, waist: f64, center: f64) -> Result<Self> {
        Self::from_fn(n, window, wavelength_vac, |x| {
            let u = (x - center) / waist;
            Complex64::new((-u * u).exp(), 0.0)
        })
    }

    /// Plane wave `exp(i kx x)`.
    pub fn tilted(n: usize, window: f64, wavelength_vac: f64, kx: f64) -> Result<Self> {
        Self::from_fn(n, window, wavelength_vac, |x| Complex64::new(0.0, kx * x).exp())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.samples.len();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!("field needs an even sample count >= 2, got {n}")));
        }
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(Error::InvalidInput(format!("grid spacing must be positive, got {}", self.dx)));
        }
        if !(self.wavelength_vac.is_finite() && self.wavelength_vac > 0.0) {
            return Err(Error::InvalidInput("field wavelength must be positive".into()));
        }
        if !self.power().is_finite() {
            return Err(Error::InvalidInput("field power is not finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength_vac
    }

    /// `sum |E|^2 dx`.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dx
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn conj(&self) -> Self {
        Self {
            samples: self.samples.iter().map(|a| a.conj()).collect(),
            ..self.clone()
        }
    }

    fn same_grid(&self, other: &Field1D) -> bool {
        let tol = 1e-12 * self.dx;
        self.len() == other.len()
            && (self.dx - other.dx).abs() <= tol
            && (self.origin - other.origin).abs() <= tol * self.len() as f64
    }
}

/// Propagated field with the undersampling flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagated {
    pub field: Field1D,
    /// More than [`ALIASING_POWER_FRACTION`] of the spectrum sat where the
    /// kernel phase changes by over pi between neighbouring frequency samples.
    pub aliasing: bool,
    /// Spectral power dropped by the band limit.
    pub removed_fraction: f64,
}

fn spatial_frequency(j: usize, n: usize, dx: f64) -> f64 {
    let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
    2.0 * PI * m / (n as f64 * dx)
}

/// `exp(i z (sqrt(k^2 - kx^2) - k))`, decaying for evanescent components.
fn kernel(k: f64, kx: f64, z: f64) -> Complex64 {
    let kz2 = k * k - kx * kx;
    if kz2 >= 0.0 {
        // sqrt(k^2 - kx^2) - k without cancellation
        let dphase = -kx * kx / (kz2.sqrt() + k);
        Complex64::from_polar(1.0, dphase * z)
    } else {
        Complex64::new((-(-kz2).sqrt() * z).exp(), 0.0)
    }
}

fn kernel_phase(k: f64, kx: f64, z: f64) -> Option<f64> {
    let kz2 = k * k - kx * kx;
    (kz2 >= 0.0).then(|| -kx * kx / (kz2.sqrt() + k) * z)
}

/// Band-limited angular-spectrum propagation by `distance >= 0`.
///
/// Spectral components whose kernel phase is undersampled are dropped rather
/// than allowed to wrap around the periodic window; power is conserved
/// whenever nothing is dropped.
pub fn fresnel_propagate(field: &Field1D, distance: f64) -> Result<Propagated> {
    fresnel_propagate_limited(field, distance, distance)
}

/// As [`fresnel_propagate`], with the band limit set for `band_distance`
/// instead of `distance`. Splitting a path into several steps needs the
/// limit of the whole path, or light can walk out of the window piecewise.
pub fn fresnel_propagate_limited(field: &Field1D, distance: f64, band_distance: f64) -> Result<Propagated> {
    field.validate()?;
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "propagation distance must be >= 0, got {distance}"
        )));
    }
    if !(band_distance.is_finite() && band_distance >= distance) {
        return Err(Error::InvalidInput(format!(
            "band-limit distance {band_distance} must be >= the propagation distance {distance}"
        )));
    }
    if distance == 0.0 {
        return Ok(Propagated {
            field: field.clone(),
            aliasing: false,
            removed_fraction: 0.0,
        });
    }
    let n = field.len();
    let k = field.wavenumber();
    let mut planner = FftPlanner::<f64>::new();
    let mut spectrum = field.samples.clone();
    planner.plan_fft_forward(n).process(&mut spectrum);

    let total: f64 = spectrum.iter().map(|a| a.norm_sqr()).sum();
    let step = |a: f64, b: f64| match (kernel_phase(k, a, band_distance), kernel_phase(k, b, band_distance)) {
        (Some(pa), Some(pb)) => (pb - pa).abs(),
        _ => 0.0,
    };
    let dk = 2.0 * PI / (n as f64 * field.dx);
    let mut removed = 0.0;
    for (j, a) in spectrum.iter_mut().enumerate() {
        let kx = spatial_frequency(j, n, field.dx);
        if step(kx - dk, kx).max(step(kx, kx + dk)) > PI {
            // band limit: these components would leave the window and wrap
            removed += a.norm_sqr();
            *a = Complex64::new(0.0, 0.0);
        } else {
            *a *= kernel(k, kx, distance);
        }
    }
    planner.plan_fft_inverse(n).process(&mut spectrum);
    let removed_fraction = if total > 0.0 { removed / total } else { 0.0 };
    let scale = 1.0 / n as f64;
    for a in spectrum.iter_mut() {
        *a *= scale;
    }
    Ok(Propagated {
        field: Field1D {
            samples: spectrum,
            ..field.clone()
        },
        aliasing: removed_fraction > ALIASING_POWER_FRACTION,
        removed_fraction,
    })
}

/// Applies a mask or thin lens in place.
pub fn apply_element(field: &Field1D, element: &Element) -> Result<Field1D> {
    let mut out = field.clone();
    match element {
        Element::Mask(mask) => {
            for (j, a) in out.samples.iter_mut().enumerate() {
                *a *= mask.transmission(field.x(j));
            }
        }
        Element::ThinLens(f) => {
            let c = -PI / (field.wavelength_vac * f);
            for (j, a) in out.samples.iter_mut().enumerate() {
                let x = field.x(j);
                *a *= Complex64::from_polar(1.0, c * x * x);
            }
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "apply_element takes a mask or a thin lens, got {other:?}"
            )))
        }
    }
    Ok(out)
}

/// Pump amplitude on the signal grid: flat, or the quadratic phase of a
/// wave diverging from a point `R` before the crystal.
pub fn pump_field(like: &Field1D, pump_wavelength: f64, wavefront: &Wavefront) -> Result<Field1D> {
    let k = 2.0 * PI / pump_wavelength;
    let samples = (0..like.len())
        .map(|j| match *wavefront {
            Wavefront::Plane => Complex64::new(1.0, 0.0),
            Wavefront::Spherical(r) => {
                let x = like.x(j);
                Complex64::from_polar(1.0, k * x * x / (2.0 * r))
            }
        })
        .collect();
    Field1D::new(samples, like.dx, pump_wavelength, like.origin)
}

/// Thin-crystal conversion `E_i = coupling E_p conj(E_s)` at the idler wavelength.
pub fn qm_convert(signal: &Field1D, pump: &Field1D, coupling: f64) -> Result<Field1D> {
    if !signal.same_grid(pump) {
        return Err(Error::GridMismatch(format!(
            "signal {} samples at {} m from {} m, pump {} samples at {} m from {} m",
            signal.len(),
            signal.dx,
            signal.origin,
            pump.len(),
            pump.dx,
            pump.origin
        )));
    }
    let lambda_i = idler_wavelength(pump.wavelength_vac, signal.wavelength_vac)?;
    let samples = signal
        .samples
        .iter()
        .zip(&pump.samples)
        .map(|(s, p)| coupling * p * s.conj())
        .collect();
    Field1D::new(samples, signal.dx, lambda_i, signal.origin)
}

/// Adds the uncorrelated background for singles detection.
pub fn detect(intensity: &[f64], detection: &Detection, mode: DetectionMode) -> Vec<f64> {
    match mode {
        DetectionMode::Coincidence => intensity.to_vec(),
        DetectionMode::Singles => {
            let mean = if intensity.is_empty() {
                0.0
            } else {
                intensity.iter().sum::<f64>() / intensity.len() as f64
            };
            let level = detection.background * mean;
            intensity.iter().map(|i| i + level).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneOutput {
    /// Field in front of the detector, before background is added.
    pub field: Field1D,
    pub intensity: Vec<f64>,
    pub fringes: Option<FringeReport>,
    pub warnings: Vec<String>,
}

fn source_field(scene: &Scene) -> Result<Field1D> {
    let (n, w, lambda) = (scene.grid_samples, scene.window, scene.signal_wavelength);
    match scene.source {
        Source::Plane => Field1D::plane(n, w, lambda),
        Source::Gaussian { waist, center } => Field1D::gaussian(n, w, lambda, waist, center),
        Source::Tilted { kx } => Field1D::tilted(n, w, lambda, kx),
    }
}

/// Runs the source through the element chain and returns the detector field.
pub fn propagate_scene(scene: &Scene) -> Result<(Field1D, Vec<String>)> {
    scene.validate()?;
    let mut field = source_field(scene)?;
    let mut warnings = Vec::new();
    let path: f64 = scene
        .elements
        .iter()
        .map(|e| if let Element::FreeSpace(d) = e { *d } else { 0.0 })
        .sum();
    for (idx, element) in scene.elements.iter().enumerate() {
        field = match element {
            Element::FreeSpace(d) => {
                let p = fresnel_propagate_limited(&field, *d, path)?;
                if p.aliasing {
                    warnings.push(format!(
                        "element {idx}: propagation over {d} m dropped {:.3e} of the spectrum (band limit)",
                        p.removed_fraction
                    ));
                }
                p.field
            }
            Element::QuantumMirror {
                pump_wavelength,
                pump,
            } => {
                let idler = qm_convert(&field, &pump_field(&field, *pump_wavelength, pump)?, 1.0)?;
                match scene.frame {
                    IdlerFrame::Conjugate => idler,
                    IdlerFrame::Mirror => idler.conj(),
                }
            }
            other => apply_element(&field, other)?,
        };
    }
    Ok((field, warnings))
}

/// Full scene with detection: intensity after background and, when fringes
/// are present, their period and visibility.
pub fn simulate_scene(scene: &Scene, mode: DetectionMode) -> Result<SceneOutput> {
    let (field, mut warnings) = propagate_scene(scene)?;
    let intensity = detect(&field.intensity(), &scene.detection, mode);
    let fringes = match fringe_analysis(&intensity, field.dx) {
        Ok(r) => Some(r),
        Err(Error::NoFringes { extrema }) => {
            warnings.push(format!("no fringes in the central window ({extrema} extrema)"));
            None
        }
        Err(e) => return Err(e),
    };
    Ok(SceneOutput {
        field,
        intensity,
        fringes,
        warnings,
    })
}

/// Peak intensity after propagating `field` to each candidate distance;
/// returns the distance with the highest peak and the scanned profile.
pub fn sharpest_plane(field: &Field1D, distances: &[f64]) -> Result<(f64, Vec<(f64, f64)>)> {
    if distances.is_empty() {
        return Err(Error::InvalidInput("no candidate distances".into()));
    }
    let profile: Vec<(f64, f64)> = distances
        .par_iter()
        .map(|&z| {
            let f = fresnel_propagate(field, z)?.field;
            let peak = f.samples.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
            Ok((z, peak))
        })
        .collect::<Result<_>>()?;
    let best = profile
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| p.0)
        .expect("non-empty");
    Ok((best, profile))
}

/// Least-squares mean of the local phase gradient over samples whose
/// intensity exceeds `floor` times the peak: the transverse wavenumber of a
/// tilted wave.
pub fn mean_phase_gradient(field: &Field1D, floor: f64) -> f64 {
    let peak = field.samples.iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    let mut sum = 0.0;
    let mut count = 0usize;
    for w in field.samples.windows(2) {
        if w[0].norm_sqr() > floor * peak && w[1].norm_sqr() > floor * peak {
            sum += (w[1] * w[0].conj()).arg();
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / (count as f64 * field.dx)
    }
}

/// Radius of the quadratic phase `k x^2 / (2 R)` fitted over `|x| <= half_width`:
/// positive for a diverging wave, negative for one converging to a point `|R|` ahead.
pub fn phase_curvature_radius(field: &Field1D, half_width: f64) -> f64 {
    // unwrap from the centre outwards, then fit phase = c0 + c2 x^2
    let n = field.len();
    let centre = ((0.0 - field.origin) / field.dx).round() as usize;
    let mut phase = vec![0.0; n];
    phase[centre] = field.samples[centre].arg();
    for j in centre + 1..n {
        phase[j] = phase[j - 1] + (field.samples[j] * field.samples[j - 1].conj()).arg();
    }
    for j in (0..centre).rev() {
        phase[j] = phase[j + 1] + (field.samples[j] * field.samples[j + 1].conj()).arg();
    }
    let (mut s1, mut su, mut suu, mut sp, mut sup) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (j, &p) in phase.iter().enumerate() {
        let x = field.x(j);
        if x.abs() <= half_width {
            let u = x * x;
            s1 += 1.0;
            su += u;
            suu += u * u;
            sp += p;
            sup += u * p;
        }
    }
    let c2 = (s1 * sup - su * sp) / (s1 * suu - su * su);
    field.wavenumber() / (2.0 * c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{angular_frequency, qm_reflection_angle};
    use crate::ray::sqm_image_distance;
    use crate::scene::Mask;

    const N: usize = 1 << 14;

    fn rms_width(f: &Field1D) -> f64 {
        let i = f.intensity();
        let total: f64 = i.iter().sum();
        let mean = i.iter().enumerate().map(|(j, v)| v * f.x(j)).sum::<f64>() / total;
        (i.iter().enumerate().map(|(j, v)| v * (f.x(j) - mean).powi(2)).sum::<f64>() / total).sqrt()
    }

    #[test]
    fn plane_wave_is_unchanged_in_magnitude() {
        let f = Field1D::plane(1024, 1e-2, 800e-9).unwrap();
        let p = fresnel_propagate(&f, 3.0).unwrap();
        assert!(!p.aliasing);
        assert!(p.field.samples.iter().all(|a| (a.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn gaussian_spreads_as_predicted() {
        let (w0, lambda) = (100e-6, 800e-9);
        let f = Field1D::gaussian(N, 20e-3, lambda, w0, 0.0).unwrap();
        let zr = PI * w0 * w0 / lambda;
        for z in [0.5 * zr, zr, 3.0 * zr] {
            let p = fresnel_propagate(&f, z).unwrap();
            assert!(!p.aliasing);
            // amplitude exp(-x^2/w^2) has intensity rms width w/2
            let expected = 0.5 * w0 * (1.0 + (z / zr).powi(2)).sqrt();
            assert!((rms_width(&p.field) / expected - 1.0).abs() < 0.005);
            assert!((p.field.power() / f.power() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn propagation_composes() {
        let f = Field1D::gaussian(4096, 10e-3, 800e-9, 200e-6, 1e-3).unwrap();
        let two = fresnel_propagate(&fresnel_propagate(&f, 0.07).unwrap().field, 0.05).unwrap().field;
        let one = fresnel_propagate(&f, 0.12).unwrap().field;
        let err: f64 = one.samples.iter().zip(&two.samples).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!((err / one.samples.iter().map(|a| a.norm_sqr()).sum::<f64>()).sqrt() < 1e-8);
    }

    #[test]
    fn negative_distance_rejected() {
        let f = Field1D::plane(16, 1.0, 1e-6).unwrap();
        assert!(fresnel_propagate(&f, -1.0).is_err());
        assert!(Field1D::new(vec![Complex64::new(1.0, 0.0); 3], 1.0, 1e-6, 0.0).is_err());
    }

    #[test]
    fn double_slit_period() {
        let (lambda, d, z) = (800e-9, 200e-6, 0.5);
        // 80 mm holds the central diffraction lobe; the band limit drops ~5% of the spectrum
        let f = Field1D::plane(4 * N, 80e-3, lambda).unwrap();
        let f = apply_element(
            &f,
            &Element::Mask(Mask::DoubleSlit {
                center: 0.0,
                separation: d,
                width: 20e-6,
            }),
        )
        .unwrap();
        let p = fresnel_propagate(&f, z).unwrap().field;
        let r = fringe_analysis(&p.intensity(), p.dx).unwrap();
        assert!(r.visibility > 0.99);
        assert!((r.period - lambda * z / d).abs() <= p.dx, "period {}", r.period);
    }

    #[test]
    fn lens_elements() {
        let f = Field1D::gaussian(1024, 1e-2, 800e-9, 1e-3, 0.0).unwrap();
        assert_eq!(apply_element(&f, &Element::Mask(Mask::Open)).unwrap(), f);
        let back = apply_element(&apply_element(&f, &Element::ThinLens(0.2)).unwrap(), &Element::ThinLens(-0.2)).unwrap();
        let err = f.samples.iter().zip(&back.samples).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        assert!(apply_element(&f, &Element::FreeSpace(1.0)).is_err());
    }

    #[test]
    fn lens_focuses_plane_wave() {
        let (lambda, focal, aperture) = (800e-9, 0.2, 4e-3);
        let f = Field1D::plane(N, 20e-3, lambda).unwrap();
        let f = apply_element(&f, &Element::Mask(Mask::Slit { center: 0.0, width: aperture })).unwrap();
        let f = apply_element(&f, &Element::ThinLens(focal)).unwrap();
        let p = fresnel_propagate(&f, focal).unwrap().field;
        let i = p.intensity();
        let peak = i.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(p.x(peak).abs() <= p.dx);
        // first zero of the sinc^2 spot at lambda f / D
        let mut j = peak;
        while i[j + 1] < i[j] {
            j += 1;
        }
        let zero = p.x(j) - p.x(peak);
        assert!((zero - lambda * focal / aperture).abs() <= 2.0 * p.dx, "zero at {zero}");
    }

    #[test]
    fn conversion_checks() {
        let s = Field1D::plane(64, 1e-3, 800e-9).unwrap();
        let p = Field1D::plane(64, 1e-3, 400e-9).unwrap();
        let i = qm_convert(&s, &p, 0.5).unwrap();
        assert!(i.samples.iter().all(|a| (*a - 0.5).norm() < 1e-15));
        assert!((i.wavelength_vac - 800e-9).abs() < 1e-18);
        let other = Field1D::plane(64, 2e-3, 400e-9).unwrap();
        assert!(matches!(qm_convert(&s, &other, 1.0), Err(Error::GridMismatch(_))));
        assert!(matches!(qm_convert(&p, &s, 1.0), Err(Error::NonPositiveIdler { .. })));
        let nondeg = qm_convert(&Field1D::plane(64, 1e-3, 1064e-9).unwrap(), &Field1D::plane(64, 1e-3, 532e-9 * 1.5).unwrap(), 1.0);
        assert!(nondeg.is_ok_and(|f| (f.wavelength_vac - 1064e-9).abs() > 1e-9));
    }

    #[test]
    fn tilt_matches_reflection_law() {
        let (lp, ls) = (532e-9, 800e-9);
        let theta: f64 = 0.01;
        let ks = 2.0 * PI / ls;
        let s = Field1D::tilted(N, 20e-3, ls, ks * theta.sin()).unwrap();
        let p = Field1D::plane(N, 20e-3, lp).unwrap();
        let idler = qm_convert(&s, &p, 1.0).unwrap();
        let measured = mean_phase_gradient(&idler, 0.0);
        let theta_i = qm_reflection_angle(theta, angular_frequency(ls).unwrap(), angular_frequency(lp).unwrap()).unwrap();
        let expected = idler.wavenumber() * theta_i.sin();
        assert!((measured.abs() / expected - 1.0).abs() < 1e-6);
        assert!(measured < 0.0, "emitted idler tilts the other way");
    }

    #[test]
    fn degenerate_plane_mirror_is_phase_conjugator() {
        let z = 0.1;
        let obj = Field1D::gaussian(4 * N, 80e-3, 800e-9, 150e-6, 0.7e-3).unwrap();
        let obj = apply_element(&obj, &Element::Mask(Mask::Bar { center: 0.7e-3, width: 60e-6 })).unwrap();
        let at_crystal = fresnel_propagate(&obj, z).unwrap();
        assert!(!at_crystal.aliasing);
        let at_crystal = at_crystal.field;
        let pump = pump_field(&at_crystal, 400e-9, &Wavefront::Plane).unwrap();
        let idler = qm_convert(&at_crystal, &pump, 1.0).unwrap();
        let back = fresnel_propagate(&idler, z).unwrap().field;
        let num: f64 = obj.samples.iter().zip(&back.samples).map(|(a, b)| (a.norm() - b.norm()).powi(2)).sum();
        let den: f64 = obj.samples.iter().map(|a| a.norm_sqr()).sum();
        assert!((num / den).sqrt() < 0.01);
    }

    #[test]
    fn spherical_pump_sets_idler_curvature() {
        let (a, r, ls, lp) = (0.08, 0.1, 800e-9, 532e-9);
        let point = Field1D::gaussian(N, 20e-3, ls, 5e-6, 0.0).unwrap();
        let at_crystal = fresnel_propagate(&point, a).unwrap().field;
        let pump = pump_field(&at_crystal, lp, &Wavefront::Spherical(r)).unwrap();
        let idler = qm_convert(&at_crystal, &pump, 1.0).unwrap().conj();
        let radius = phase_curvature_radius(&idler, 1e-3);
        let b = sqm_image_distance(a, ls, lp, r).unwrap();
        assert!((-radius / b - 1.0).abs() < 0.01, "radius {radius} vs b {b}");
    }

    #[test]
    fn background_only_in_singles() {
        let i = vec![0.0, 2.0, 1.0, 1.0];
        let det = Detection {
            mode: DetectionMode::Singles,
            background: 0.5,
        };
        assert_eq!(detect(&i, &det, DetectionMode::Coincidence), i);
        assert_eq!(detect(&i, &det, DetectionMode::Singles), vec![0.5, 2.5, 1.5, 1.5]);
    }
}
