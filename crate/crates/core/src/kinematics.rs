//! Photon bookkeeping for three-wave mixing: energy and momentum conservation,
//! phase mismatch and the frequency-scaled reflection law of a quantum mirror.
//!
//! Frequencies are angular frequencies (rad/s) internally; wavelengths are
//! accepted at the boundaries and converted once with [`angular_frequency`].
//! Angles are measured from the pump propagation axis and are non-negative.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity, F/m (CODATA 2018).
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// Cartesian wavevector in rad/m.
pub type Wavevector = [f64; 3];

/// Named physical constants, for callers that want them as a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub c: f64,
    pub eps0: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        c: SPEED_OF_LIGHT,
        eps0: VACUUM_PERMITTIVITY,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// Angular frequency of light with the given vacuum wavelength.
pub fn angular_frequency(wavelength_vac: f64) -> Result<f64> {
    check_positive("wavelength", wavelength_vac)?;
    Ok(2.0 * PI * SPEED_OF_LIGHT / wavelength_vac)
}

/// Vacuum wavelength of light with the given angular frequency.
pub fn vacuum_wavelength(omega: f64) -> Result<f64> {
    check_positive("angular frequency", omega)?;
    Ok(2.0 * PI * SPEED_OF_LIGHT / omega)
}

/// Idler frequency `omega_p - omega_s` from energy conservation.
pub fn difference_frequency(omega_p: f64, omega_s: f64) -> Result<f64> {
    check_positive("pump frequency", omega_p)?;
    check_positive("signal frequency", omega_s)?;
    if omega_s >= omega_p {
        return Err(Error::NonPositiveIdler { omega_p, omega_s });
    }
    Ok(omega_p - omega_s)
}

/// Idler vacuum wavelength for the given pump and signal wavelengths.
pub fn idler_wavelength(lambda_p: f64, lambda_s: f64) -> Result<f64> {
    let omega_i = difference_frequency(angular_frequency(lambda_p)?, angular_frequency(lambda_s)?)?;
    vacuum_wavelength(omega_i)
}

/// Idler wavevector `k_p - k_s` from momentum conservation.
pub fn idler_wavevector(k_p: Wavevector, k_s: Wavevector) -> Wavevector {
    [k_p[0] - k_s[0], k_p[1] - k_s[1], k_p[2] - k_s[2]]
}

/// Collinear phase mismatch `k_p - k_s - k_i`, sign preserved.
///
/// For quasi-phase-matched media subtract the grating vector from `k_i`
/// (or add it to `k_s`) before calling.
pub fn phase_mismatch(k_p: f64, k_s: f64, k_i: f64) -> f64 {
    k_p - k_s - k_i
}

/// Wavenumber `2 pi n / lambda` in a medium of index `n`.
pub fn wavevector_magnitude(lambda_vac: f64, n: f64) -> Result<f64> {
    check_positive("wavelength", lambda_vac)?;
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "refractive index must be >= 1, got {n}"
        )));
    }
    Ok(2.0 * PI * n / lambda_vac)
}

/// Angle of the "reflected" idler for a signal incident at `theta_ps` on a
/// plane-pumped quantum mirror, from `omega_s sin(theta_ps) = omega_i sin(theta_pi)`.
///
/// Evaluated as `atan2(r sin t, sqrt(cos^2 t + (1 - r^2) sin^2 t))` with
/// `r = omega_s / omega_i`, which stays exact to round-off in the degenerate
/// case and near grazing incidence where `asin` loses half its digits.
pub fn qm_reflection_angle(theta_ps: f64, omega_s: f64, omega_p: f64) -> Result<f64> {
    if !(0.0..=PI / 2.0).contains(&theta_ps) {
        return Err(Error::InvalidInput(format!(
            "incidence angle must lie in [0, pi/2], got {theta_ps}"
        )));
    }
    let omega_i = difference_frequency(omega_p, omega_s)?;
    let ratio = omega_s / omega_i;
    let (sin_t, cos_t) = theta_ps.sin_cos();
    let cos_sq = cos_t * cos_t + (1.0 - ratio) * (1.0 + ratio) * sin_t * sin_t;
    if cos_sq < 0.0 {
        return Err(Error::NoPropagatingIdler {
            sine: ratio * sin_t,
        });
    }
    Ok((ratio * sin_t).atan2(cos_sq.sqrt()))
}

/// Pump, signal and idler frequencies and wavevectors of one conversion event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonTriad {
    pub omega_p: f64,
    pub omega_s: f64,
    pub omega_i: f64,
    pub k_p: Wavevector,
    pub k_s: Wavevector,
    pub k_i: Wavevector,
}

impl PhotonTriad {
    /// Completes the triad with the idler fixed by energy and momentum conservation.
    pub fn new(omega_p: f64, omega_s: f64, k_p: Wavevector, k_s: Wavevector) -> Result<Self> {
        let omega_i = difference_frequency(omega_p, omega_s)?;
        Ok(Self {
            omega_p,
            omega_s,
            omega_i,
            k_p,
            k_s,
            k_i: idler_wavevector(k_p, k_s),
        })
    }

    /// Collinear triad along +z in vacuum from pump and signal wavelengths.
    pub fn collinear(lambda_p: f64, lambda_s: f64) -> Result<Self> {
        let omega_p = angular_frequency(lambda_p)?;
        let omega_s = angular_frequency(lambda_s)?;
        let k_p = [0.0, 0.0, omega_p / SPEED_OF_LIGHT];
        let k_s = [0.0, 0.0, omega_s / SPEED_OF_LIGHT];
        Self::new(omega_p, omega_s, k_p, k_s)
    }

    pub fn idler_wavelength(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.omega_i
    }

    /// `omega_p - omega_s - omega_i`; zero up to round-off for a valid triad.
    pub fn energy_residual(&self) -> f64 {
        self.omega_p - self.omega_s - self.omega_i
    }

    pub fn momentum_residual(&self) -> Wavevector {
        [
            self.k_p[0] - self.k_s[0] - self.k_i[0],
            self.k_p[1] - self.k_s[1] - self.k_i[1],
            self.k_p[2] - self.k_s[2] - self.k_i[2],
        ]
    }
}

/// Incidence and reflection angles at a plane-pumped quantum mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionGeometry {
    pub theta_ps: f64,
    pub theta_pi: f64,
}

impl ReflectionGeometry {
    pub fn solve(theta_ps: f64, omega_s: f64, omega_p: f64) -> Result<Self> {
        Ok(Self {
            theta_ps,
            theta_pi: qm_reflection_angle(theta_ps, omega_s, omega_p)?,
        })
    }
}
