//! Meridional ray tracing through free space, thin lenses, masks and a
//! quantum mirror, plus the two imaging laws of the quantum mirror.
//!
//! Rays travel along +z. At a quantum mirror the signal ray is replaced by
//! an idler ray at the same height whose direction follows from transverse
//! momentum conservation against the local pump direction:
//!
//! ```text
//! omega_i sin(theta_i) = omega_p sin(theta_p) - omega_s sin(theta_s)
//! ```
//!
//! See [`IdlerFrame`] for how the outgoing idler is drawn.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{angular_frequency, difference_frequency, vacuum_wavelength};
use crate::rng::stream_rng;
use crate::scene::{Element, IdlerFrame, Scene, Wavefront};

/// Slopes beyond this are flagged as leaving the paraxial regime.
pub const PARAXIAL_LIMIT: f64 = 0.2;

/// Bracket width at which the best-focus search stops, m.
pub const FOCUS_TOLERANCE: f64 = 1e-6;

const SCAN_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub x: f64,
    /// `tan(theta)`; equal to the angle in the paraxial mode.
    pub slope: f64,
    pub wavelength_vac: f64,
    pub weight: f64,
}

impl Ray {
    pub fn new(x: f64, slope: f64, wavelength_vac: f64) -> Self {
        Self {
            x,
            slope,
            wavelength_vac,
            weight: 1.0,
        }
    }

    pub fn at(&self, distance: f64) -> f64 {
        self.x + self.slope * distance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RayMode {
    /// Small-angle law on slopes.
    #[default]
    Paraxial,
    /// Law on the sines of the true angles; `NoPropagatingIdler` past grazing.
    Exact,
}

/// One signal-to-idler conversion, with slopes as drawn in the emission
/// (`Conjugate`) frame regardless of the tracer's frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QmInteraction {
    pub x: f64,
    pub omega_p: f64,
    pub omega_s: f64,
    pub omega_i: f64,
    pub pump_slope: f64,
    pub signal_slope: f64,
    pub idler_slope: f64,
    pub mode: RayMode,
}

impl QmInteraction {
    fn sine(&self, slope: f64) -> f64 {
        match self.mode {
            RayMode::Paraxial => slope,
            RayMode::Exact => slope / slope.hypot(1.0),
        }
    }

    /// `|omega_p sin_p - omega_s sin_s - omega_i sin_i|` over the largest term.
    /// With a plane pump this is the reflection law
    /// `omega_s sin(theta_ps) = omega_i sin(theta_pi)`.
    pub fn momentum_residual(&self) -> f64 {
        let p = self.omega_p * self.sine(self.pump_slope);
        let s = self.omega_s * self.sine(self.signal_slope);
        let i = self.omega_i * self.sine(self.idler_slope);
        let scale = p.abs().max(s.abs()).max(i.abs());
        if scale == 0.0 {
            0.0
        } else {
            (p - s - i).abs() / scale
        }
    }
}

/// Record of a trace: conversions and the steepest slope seen.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceLog {
    pub interactions: Vec<QmInteraction>,
    pub max_abs_slope: f64,
}

impl TraceLog {
    pub fn paraxial_warning(&self) -> bool {
        self.max_abs_slope > PARAXIAL_LIMIT
    }

    fn merge(&mut self, other: TraceLog) {
        self.interactions.extend(other.interactions);
        self.max_abs_slope = self.max_abs_slope.max(other.max_abs_slope);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Tracer {
    pub mode: RayMode,
    pub frame: IdlerFrame,
}

impl Tracer {
    pub fn new(mode: RayMode, frame: IdlerFrame) -> Self {
        Self { mode, frame }
    }

    pub fn apply(&self, ray: &Ray, element: &Element, log: &mut TraceLog) -> Result<Ray> {
        log.max_abs_slope = log.max_abs_slope.max(ray.slope.abs());
        let mut out = *ray;
        match element {
            Element::FreeSpace(d) => out.x += ray.slope * d,
            Element::ThinLens(f) => out.slope -= ray.x / f,
            Element::Mask(mask) => out.weight *= mask.transmission(ray.x),
            Element::QuantumMirror {
                pump_wavelength,
                pump,
            } => {
                let event = self.convert(ray, *pump_wavelength, pump)?;
                out.wavelength_vac = vacuum_wavelength(event.omega_i)?;
                out.slope = match self.frame {
                    IdlerFrame::Conjugate => event.idler_slope,
                    IdlerFrame::Mirror => -event.idler_slope,
                };
                log.interactions.push(event);
            }
        }
        log.max_abs_slope = log.max_abs_slope.max(out.slope.abs());
        Ok(out)
    }

    fn convert(&self, ray: &Ray, pump_wavelength: f64, pump: &Wavefront) -> Result<QmInteraction> {
        let omega_p = angular_frequency(pump_wavelength)?;
        let omega_s = angular_frequency(ray.wavelength_vac)?;
        let omega_i = difference_frequency(omega_p, omega_s)?;
        let pump_slope = pump.slope(ray.x);
        let idler_slope = match self.mode {
            RayMode::Paraxial => (omega_p * pump_slope - omega_s * ray.slope) / omega_i,
            RayMode::Exact => {
                let sin_p = pump_slope / pump_slope.hypot(1.0);
                let sin_s = ray.slope / ray.slope.hypot(1.0);
                let sine = (omega_p * sin_p - omega_s * sin_s) / omega_i;
                if sine.abs() >= 1.0 {
                    return Err(Error::NoPropagatingIdler { sine });
                }
                sine / ((1.0 - sine) * (1.0 + sine)).sqrt()
            }
        };
        Ok(QmInteraction {
            x: ray.x,
            omega_p,
            omega_s,
            omega_i,
            pump_slope,
            signal_slope: ray.slope,
            idler_slope,
            mode: self.mode,
        })
    }

    pub fn trace(&self, ray: &Ray, elements: &[Element], log: &mut TraceLog) -> Result<Ray> {
        elements.iter().try_fold(*ray, |r, e| self.apply(&r, e, log))
    }

    /// Traces every ray; output order matches input order.
    pub fn trace_all(&self, rays: &[Ray], elements: &[Element]) -> Result<(Vec<Ray>, TraceLog)> {
        let traced: Vec<(Ray, TraceLog)> = rays
            .par_iter()
            .map(|r| {
                let mut log = TraceLog::default();
                self.trace(r, elements, &mut log).map(|out| (out, log))
            })
            .collect::<Result<_>>()?;
        let mut log = TraceLog::default();
        let mut out = Vec::with_capacity(traced.len());
        for (r, l) in traced {
            out.push(r);
            log.merge(l);
        }
        Ok((out, log))
    }
}

/// One element with the default paraxial tracer in the emission frame.
pub fn propagate(ray: &Ray, element: &Element) -> Result<Ray> {
    Tracer::default().apply(ray, element, &mut TraceLog::default())
}

/// Image distance `b` behind a quantum mirror for an object `a` in front of
/// it, from
///
/// ```text
/// 1/(lambda_s a) + 1/(lambda_i b) = 1/(lambda_p R)
/// ```
///
/// Positive `b` is a real image on the idler side. `R` is the pump radius at
/// the crystal (positive for a diverging pump); pass `f64::INFINITY` for a
/// plane pump.
pub fn sqm_image_distance(a: f64, lambda_s: f64, lambda_p: f64, radius: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidInput(format!("object distance must be positive, got {a}")));
    }
    if !(lambda_p > 0.0 && lambda_s > lambda_p) {
        return Err(Error::NonPositiveIdler {
            omega_p: 1.0 / lambda_p,
            omega_s: 1.0 / lambda_s,
        });
    }
    if radius == 0.0 || radius.is_nan() {
        return Err(Error::InvalidInput("pump radius must be non-zero".into()));
    }
    let inv_idler = 1.0 / lambda_p - 1.0 / lambda_s;
    let lhs = 1.0 / (lambda_p * radius) - 1.0 / (lambda_s * a);
    if lhs == 0.0 {
        return Err(Error::ImageAtInfinity);
    }
    Ok(inv_idler / lhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhostLens {
    /// `1/S1 + 1/(d1 + r d2) - 1/f`, 1/m; zero when in focus.
    pub residual: f64,
    /// `(d1 + r d2) / S1`.
    pub magnification: f64,
}

/// Thin-lens law for a lens in the signal arm followed by a plane quantum
/// mirror: the idler leg `d2` counts as `r d2` with `r = omega_s / omega_i`.
pub fn ghost_thin_lens(s1: f64, f: f64, d1: f64, d2: f64, omega_ratio: f64) -> Result<GhostLens> {
    if !(s1 > 0.0 && d1 >= 0.0 && d2 >= 0.0 && omega_ratio > 0.0 && f != 0.0) {
        return Err(Error::InvalidInput(format!(
            "bad thin-lens geometry S1={s1} f={f} d1={d1} d2={d2} ratio={omega_ratio}"
        )));
    }
    let path = d1 + omega_ratio * d2;
    Ok(GhostLens {
        residual: 1.0 / s1 + 1.0 / path - 1.0 / f,
        magnification: path / s1,
    })
}

/// Result of a best-focus search behind the last element of a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct BestFocus {
    /// Distance behind the last element, m; negative for a virtual image.
    pub distance: f64,
    pub rms_spot: f64,
    /// Weighted mean ray height at `distance`.
    pub centroid: f64,
    /// Coarse scan `(distance, rms)` the search started from.
    pub profile: Vec<(f64, f64)>,
    pub log: TraceLog,
}

/// Deterministic fan of `n` rays from `(0, object_x)` filling
/// `[-aperture, aperture]` at the first lens or mirror.
pub fn ray_fan(scene: &Scene, object_x: f64, n: usize) -> Result<Vec<Ray>> {
    let d = scene.distance_to_first_optic();
    if d <= 0.0 {
        return Err(Error::InvalidInput(
            "object must sit some distance before the first optic".into(),
        ));
    }
    let a = scene.aperture;
    Ok((0..n)
        .map(|j| {
            let y = -a + 2.0 * a * (j as f64 + 0.5) / n as f64;
            Ray::new(object_x, (y - object_x) / d, scene.signal_wavelength)
        })
        .collect())
}

/// `n` rays from `(0, object_x)` aimed at uniformly random heights in
/// `[-aperture, aperture]` at the first optic; ray `j` draws from stream `j`
/// of `seed`, so the fan does not depend on how tracing is partitioned.
pub fn random_fan(scene: &Scene, object_x: f64, n: usize, seed: u64) -> Result<Vec<Ray>> {
    let d = scene.distance_to_first_optic();
    if d <= 0.0 {
        return Err(Error::InvalidInput(
            "object must sit some distance before the first optic".into(),
        ));
    }
    let a = scene.aperture;
    Ok((0..n)
        .map(|j| {
            let y = stream_rng(seed, j as u64).gen_range(-a..a);
            Ray::new(object_x, (y - object_x) / d, scene.signal_wavelength)
        })
        .collect())
}

/// Weighted mean and RMS spread of ray heights `z` behind the chain.
pub fn spot(rays: &[Ray], z: f64) -> Option<(f64, f64)> {
    let total: f64 = rays.iter().map(|r| r.weight).sum();
    if total <= 0.0 {
        return None;
    }
    let mean = rays.iter().map(|r| r.weight * r.at(z)).sum::<f64>() / total;
    let var = rays
        .iter()
        .map(|r| {
            let u = r.at(z) - mean;
            r.weight * u * u
        })
        .sum::<f64>()
        / total;
    Some((mean, var.sqrt()))
}

/// Paraxial best focus in the scene's idler frame.
pub fn trace_best_focus(scene: &Scene, object_x: f64, n_rays: usize, search_range: (f64, f64)) -> Result<BestFocus> {
    trace_best_focus_with(&Tracer::new(RayMode::Paraxial, scene.frame), scene, object_x, n_rays, search_range)
}

/// Best focus for the deterministic fan of [`ray_fan`].
pub fn trace_best_focus_with(
    tracer: &Tracer,
    scene: &Scene,
    object_x: f64,
    n_rays: usize,
    search_range: (f64, f64),
) -> Result<BestFocus> {
    focus_search(tracer, scene, &ray_fan(scene, object_x, n_rays)?, search_range)
}

/// Golden-section search for the detector distance minimising the RMS spot
/// of `fan`, after a 201-point scan that must show a single interior minimum.
pub fn focus_search(tracer: &Tracer, scene: &Scene, fan: &[Ray], search_range: (f64, f64)) -> Result<BestFocus> {
    scene.validate()?;
    let n_rays = fan.len();
    if n_rays < 100 {
        return Err(Error::InvalidInput(format!("need at least 100 rays, got {n_rays}")));
    }
    let (lo, hi) = search_range;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidInput(format!("bad search range [{lo}, {hi}]")));
    }
    let (rays, log) = tracer.trace_all(fan, &scene.elements)?;
    let rms = |z: f64| {
        spot(&rays, z)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::NoConvergence("every ray was blocked".into()))
    };

    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let mut profile = Vec::with_capacity(SCAN_POINTS);
    for j in 0..SCAN_POINTS {
        let z = lo + step * j as f64;
        profile.push((z, rms(z)?));
    }
    let values: Vec<f64> = profile.iter().map(|p| p.1).collect();
    let minima = count_local_minima(&values);
    if minima != 1 {
        return Err(Error::NoConvergence(format!(
            "spot size has {minima} local minima over [{lo}, {hi}] m"
        )));
    }
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(Error::NoConvergence(format!(
            "smallest spot at the edge of [{lo}, {hi}] m"
        )));
    }

    let mut a = profile[best - 1].0;
    let mut b = profile[best + 1].0;
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut z1 = b - INV_PHI * (b - a);
    let mut z2 = a + INV_PHI * (b - a);
    let mut f1 = rms(z1)?;
    let mut f2 = rms(z2)?;
    while b - a > FOCUS_TOLERANCE {
        if f1 <= f2 {
            b = z2;
            z2 = z1;
            f2 = f1;
            z1 = b - INV_PHI * (b - a);
            f1 = rms(z1)?;
        } else {
            a = z1;
            z1 = z2;
            f1 = f2;
            z2 = a + INV_PHI * (b - a);
            f2 = rms(z2)?;
        }
    }
    let distance = 0.5 * (a + b);
    let (centroid, rms_spot) = spot(&rays, distance).expect("weights checked above");
    Ok(BestFocus {
        distance,
        rms_spot,
        centroid,
        profile,
        log,
    })
}

fn count_local_minima(v: &[f64]) -> usize {
    let n = v.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || v[i] < v[i - 1];
            let right = i == n - 1 || v[i] <= v[i + 1];
            left && right
        })
        .count()
}

/// Image plane and lateral magnification measured by tracing two object points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracedImage {
    pub distance: f64,
    /// Signed; negative for an inverted image.
    pub magnification: f64,
}

/// Best focus of the on-axis point, then the centroid shift there between
/// objects at `+offset` and `-offset`.
pub fn traced_magnification(scene: &Scene, offset: f64, n_rays: usize, search_range: (f64, f64)) -> Result<TracedImage> {
    let tracer = Tracer::new(RayMode::Paraxial, scene.frame);
    let focus = trace_best_focus_with(&tracer, scene, 0.0, n_rays, search_range)?;
    let centroid = |x: f64| -> Result<f64> {
        let (rays, _) = tracer.trace_all(&ray_fan(scene, x, n_rays)?, &scene.elements)?;
        spot(&rays, focus.distance)
            .map(|(m, _)| m)
            .ok_or_else(|| Error::NoConvergence("every ray was blocked".into()))
    };
    let magnification = (centroid(offset)? - centroid(-offset)?) / (2.0 * offset);
    Ok(TracedImage {
        distance: focus.distance,
        magnification,
    })
}
