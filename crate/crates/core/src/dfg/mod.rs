//! Difference-frequency generation: focused Gaussian-beam power, the
//! plane-wave phase-matching curve and quasi-phase-matching helpers.

pub mod focusing;
pub mod quadrature;

use std::f64::consts::PI;

pub use focusing::{
    best_phase_mismatch, focusing_function, focusing_function_with, optimum_focusing, scan_xi,
    FocusSample, FocusingInput, FocusingKernel, FocusingOptions, FocusingValue, OptimumFocus, OPTIMUM_XI_MAX,
    OPTIMUM_XI_MIN,
};

use crate::error::{Error, Result};
use crate::kinematics::{angular_frequency, difference_frequency, wavevector_magnitude, PhysicalConstants};

/// Nonlinear crystal parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalConfig {
    /// Length, m.
    pub length: f64,
    pub n_pump: f64,
    pub n_signal: f64,
    pub n_idler: f64,
    /// Effective nonlinear coefficient, m/V.
    pub d_eff: f64,
    /// Idler absorption coefficient, 1/m.
    pub absorption: f64,
    /// Miller factor; informational once folded into `d_eff`.
    pub miller: f64,
}

impl CrystalConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidInput(format!("crystal {what} invalid: {v}")));
        if !(self.length.is_finite() && self.length > 0.0) {
            return bad("length", self.length);
        }
        for (name, n) in [
            ("pump index", self.n_pump),
            ("signal index", self.n_signal),
            ("idler index", self.n_idler),
        ] {
            if !(n.is_finite() && n >= 1.0) {
                return bad(name, n);
            }
        }
        if !(self.d_eff.is_finite() && self.d_eff > 0.0) {
            return bad("d_eff", self.d_eff);
        }
        if !(self.absorption.is_finite() && self.absorption >= 0.0) {
            return bad("absorption", self.absorption);
        }
        if !(self.miller > 0.0 && self.miller <= 1.0) {
            return bad("Miller factor", self.miller);
        }
        Ok(())
    }
}

/// TEM00 beam inside the crystal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBeam {
    /// W.
    pub power: f64,
    /// Waist radius w0, m.
    pub waist: f64,
    pub wavelength_vac: f64,
    /// Confocal parameter `b = k w0^2`, m.
    pub confocal: f64,
    /// Refractive index the beam propagates in.
    pub index: f64,
}

impl GaussianBeam {
    pub fn from_waist(power: f64, waist: f64, wavelength_vac: f64, index: f64) -> Result<Self> {
        let k = wavevector_magnitude(wavelength_vac, index)?;
        let confocal = confocal_parameter(k, waist)?;
        let beam = Self {
            power,
            waist,
            wavelength_vac,
            confocal,
            index,
        };
        beam.validate()?;
        Ok(beam)
    }

    pub fn from_confocal(power: f64, confocal: f64, wavelength_vac: f64, index: f64) -> Result<Self> {
        let k = wavevector_magnitude(wavelength_vac, index)?;
        if !(confocal.is_finite() && confocal > 0.0) {
            return Err(Error::InvalidInput(format!("confocal parameter must be positive, got {confocal}")));
        }
        let beam = Self {
            power,
            waist: (confocal / k).sqrt(),
            wavelength_vac,
            confocal,
            index,
        };
        beam.validate()?;
        Ok(beam)
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI * self.index / self.wavelength_vac
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("power", self.power),
            ("waist", self.waist),
            ("wavelength", self.wavelength_vac),
            ("confocal parameter", self.confocal),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidInput(format!("beam {name} must be positive, got {v}")));
            }
        }
        let expected = self.wavenumber() * self.waist * self.waist;
        if ((self.confocal - expected) / expected).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "confocal parameter {} inconsistent with waist (k w0^2 = {expected})",
                self.confocal
            )));
        }
        Ok(())
    }
}

/// `b = k w0^2`.
pub fn confocal_parameter(k: f64, waist: f64) -> Result<f64> {
    if !(k > 0.0 && waist > 0.0 && k.is_finite() && waist.is_finite()) {
        return Err(Error::InvalidInput(format!("need k > 0 and waist > 0, got {k}, {waist}")));
    }
    Ok(k * waist * waist)
}

/// `xi = L / b`.
pub fn focusing_parameter(length: f64, confocal: f64) -> Result<f64> {
    if !(length > 0.0 && confocal > 0.0 && length.is_finite() && confocal.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "need L > 0 and b > 0, got {length}, {confocal}"
        )));
    }
    Ok(length / confocal)
}

/// Options for the focused power formula.
#[derive(Debug, Clone, Copy)]
pub struct DfgOptions {
    /// Dimensionless factor multiplying the whole formula.
    pub calibration: f64,
    pub focusing: FocusingOptions,
    pub constants: PhysicalConstants,
}

impl Default for DfgOptions {
    fn default() -> Self {
        Self {
            calibration: 1.0,
            focusing: FocusingOptions::default(),
            constants: PhysicalConstants::SI,
        }
    }
}

/// Focused-beam result with the intermediate quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusedPower {
    /// Idler power, W.
    pub power: f64,
    pub omega_idler: f64,
    pub confocal: f64,
    pub xi: f64,
    pub mu: f64,
    pub h: f64,
}

/// Largest relative confocal-parameter mismatch accepted between pump and signal.
pub const CONFOCAL_TOLERANCE: f64 = 0.05;

/// Idler power for confocally matched Gaussian pump and signal beams focused
/// at the crystal centre, with default options.
pub fn dfg_power_focused(
    pump: &GaussianBeam,
    signal: &GaussianBeam,
    crystal: &CrystalConfig,
    dk: f64,
) -> Result<f64> {
    dfg_power_focused_with(pump, signal, crystal, dk, &DfgOptions::default()).map(|r| r.power)
}

/// ```text
/// P_i = cal * 4/(pi eps0 c^3) * w_i^2 d^2/(n_i n_s n_p) * L b/(w_s^2 + w_p^2) * h * P_p P_s * exp(-alpha L)
/// ```
///
/// With `b = k_s w_s^2 = k_p w_p^2` the factor `b/(w_s^2 + w_p^2)` equals
/// `k_s k_p/(k_s + k_p)`, so the power is linear in `L h(xi)` and grows as
/// `L^2` for loose focusing.
pub fn dfg_power_focused_with(
    pump: &GaussianBeam,
    signal: &GaussianBeam,
    crystal: &CrystalConfig,
    dk: f64,
    opts: &DfgOptions,
) -> Result<FocusedPower> {
    pump.validate()?;
    signal.validate()?;
    crystal.validate()?;
    if !dk.is_finite() {
        return Err(Error::InvalidInput("phase mismatch must be finite".into()));
    }
    let spread = (pump.confocal - signal.confocal).abs() / pump.confocal.max(signal.confocal);
    if spread > CONFOCAL_TOLERANCE {
        return Err(Error::MismatchedConfocal {
            pump: pump.confocal,
            signal: signal.confocal,
        });
    }
    let omega_i = difference_frequency(
        angular_frequency(pump.wavelength_vac)?,
        angular_frequency(signal.wavelength_vac)?,
    )?;
    let b = 0.5 * (pump.confocal + signal.confocal);
    let xi = focusing_parameter(crystal.length, b)?;
    let mu = signal.wavenumber() / pump.wavenumber();
    let h = focusing_function_with(&FocusingInput::new(mu, xi, dk * b / 2.0), &opts.focusing)?.h;

    let PhysicalConstants { c, eps0 } = opts.constants;
    let prefactor = 4.0 / (PI * eps0 * c.powi(3));
    let material = crystal.d_eff * crystal.d_eff / (crystal.n_idler * crystal.n_signal * crystal.n_pump);
    let geometry = crystal.length * b / (signal.waist.powi(2) + pump.waist.powi(2));
    let power = opts.calibration
        * prefactor
        * omega_i
        * omega_i
        * material
        * geometry
        * h
        * pump.power
        * signal.power
        * (-crystal.absorption * crystal.length).exp();
    Ok(FocusedPower {
        power,
        omega_idler: omega_i,
        confocal: b,
        xi,
        mu,
        h,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWavePower {
    /// `d^2 L^2/(n_i n_s n_p) w_i^2 P_p P_s sinc^2`, arbitrary units.
    pub raw: f64,
    /// Relative to the phase-matched value.
    pub normalized: f64,
}

/// `sin(x)/x` with `x = pi t`, exactly zero at non-zero integer `t`.
fn sinc_pi(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else if t.fract() == 0.0 {
        0.0
    } else {
        let x = PI * t;
        x.sin() / x
    }
}

/// Plane-wave idler power and phase-matching curve.
pub fn dfg_power_planewave(
    pump_power: f64,
    signal_power: f64,
    crystal: &CrystalConfig,
    omega_i: f64,
    dk: f64,
) -> Result<PlaneWavePower> {
    crystal.validate()?;
    if !(pump_power > 0.0 && signal_power > 0.0 && omega_i > 0.0) || !dk.is_finite() {
        return Err(Error::InvalidInput(
            "plane-wave DFG needs positive powers and idler frequency".into(),
        ));
    }
    let l = crystal.length;
    let matched = crystal.d_eff.powi(2) * l * l / (crystal.n_idler * crystal.n_signal * crystal.n_pump)
        * omega_i
        * omega_i
        * pump_power
        * signal_power;
    let s = sinc_pi(dk.abs() * l / (2.0 * PI));
    let normalized = s * s;
    Ok(PlaneWavePower {
        raw: matched * normalized,
        normalized,
    })
}

/// First-order QPM effective coefficient `d_raw (2/pi) M`.
pub fn qpm_effective_d(d_raw: f64, miller: f64) -> f64 {
    d_raw * (2.0 / PI) * miller
}

/// Normalised conversion efficiency in %/(W cm).
pub fn conversion_efficiency(idler_power: f64, pump1: f64, pump2: f64, length: f64) -> f64 {
    100.0 * idler_power / (pump1 * pump2 * (length * 100.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn crystal(length: f64) -> CrystalConfig {
        CrystalConfig {
            length,
            n_pump: 2.17,
            n_signal: 2.16,
            n_idler: 2.08,
            d_eff: 14.6e-12,
            absorption: 0.0,
            miller: 0.85,
        }
    }

    fn beams(b: f64) -> (GaussianBeam, GaussianBeam) {
        (
            GaussianBeam::from_confocal(0.12, b, 812e-9, 2.17).unwrap(),
            GaussianBeam::from_confocal(0.98, b, 1064e-9, 2.16).unwrap(),
        )
    }

    #[test]
    fn confocal_and_focusing_parameters() {
        assert_eq!(confocal_parameter(1.0, 1.0).unwrap(), 1.0);
        let k = 2.0 * PI * 2.17 / 812e-9;
        let b = confocal_parameter(k, 2.0e-4).unwrap();
        assert_relative_eq!(confocal_parameter(k, 4.0e-4).unwrap(), 4.0 * b, max_relative = 1e-15);
        let w = (24e-3 / k).sqrt();
        assert_relative_eq!(confocal_parameter(k, w).unwrap(), 24e-3, max_relative = 1e-12);
        assert_relative_eq!(focusing_parameter(50e-3, 24e-3).unwrap(), 2.083_333, max_relative = 1e-6);
        assert_eq!(focusing_parameter(1.0, 1.0).unwrap(), 1.0);
        assert!(focusing_parameter(0.0, 1.0).is_err());
    }

    #[test]
    fn qpm_and_efficiency_arithmetic() {
        assert_relative_eq!(qpm_effective_d(27e-12, 0.85), 14.61e-12, max_relative = 1e-3);
        assert_relative_eq!(qpm_effective_d(PI / 2.0, 1.0), 1.0, max_relative = 1e-15);
        assert_relative_eq!(qpm_effective_d(1.0, 0.5), 0.5 * qpm_effective_d(1.0, 1.0));
        assert_relative_eq!(conversion_efficiency(0.1176e-3, 0.12, 0.98, 0.05), 0.02, max_relative = 1e-3);
        assert_relative_eq!(conversion_efficiency(1.0, 1.0, 1.0, 0.01), 100.0, max_relative = 1e-12);
        assert_relative_eq!(
            conversion_efficiency(1.0, 1.0, 1.0, 0.005),
            2.0 * conversion_efficiency(1.0, 1.0, 1.0, 0.01),
            max_relative = 1e-15
        );
    }

    #[test]
    fn focused_power_is_bilinear() {
        let (p, s) = beams(24e-3);
        let c = crystal(0.05);
        let base = dfg_power_focused(&p, &s, &c, 0.0).unwrap();
        let p2 = GaussianBeam { power: 2.0 * p.power, ..p };
        let s3 = GaussianBeam { power: 3.0 * s.power, ..s };
        let scaled = dfg_power_focused(&p2, &s3, &c, 0.0).unwrap();
        assert_relative_eq!(scaled, 6.0 * base, max_relative = 1e-14);
    }

    #[test]
    fn absorption_attenuates() {
        let (p, s) = beams(24e-3);
        let lossless = dfg_power_focused(&p, &s, &crystal(0.05), 0.0).unwrap();
        let lossy = CrystalConfig {
            absorption: 2f64.ln() / 0.05,
            ..crystal(0.05)
        };
        assert_relative_eq!(dfg_power_focused(&p, &s, &lossy, 0.0).unwrap(), 0.5 * lossless, max_relative = 1e-14);
    }

    #[test]
    fn loose_focusing_scales_with_length_squared() {
        let b = 10.0;
        let (p, s) = beams(b);
        let short = dfg_power_focused(&p, &s, &crystal(0.01 * b), 0.0).unwrap();
        let long = dfg_power_focused(&p, &s, &crystal(0.02 * b), 0.0).unwrap();
        assert!((long / short / 4.0 - 1.0).abs() < 0.02);
    }

    #[test]
    fn mismatched_confocal_rejected() {
        let p = GaussianBeam::from_confocal(0.1, 24e-3, 812e-9, 2.17).unwrap();
        let s = GaussianBeam::from_confocal(0.1, 26e-3, 1064e-9, 2.16).unwrap();
        assert!(matches!(
            dfg_power_focused(&p, &s, &crystal(0.05), 0.0),
            Err(Error::MismatchedConfocal { .. })
        ));
        let s = GaussianBeam::from_confocal(0.1, 24.9e-3, 1064e-9, 2.16).unwrap();
        assert!(dfg_power_focused(&p, &s, &crystal(0.05), 0.0).is_ok());
    }

    #[test]
    fn plane_wave_curve() {
        let c = crystal(0.01);
        let w = 5e14;
        let at = |dk: f64| dfg_power_planewave(0.1, 0.2, &c, w, dk).unwrap();
        assert_eq!(at(0.0).normalized, 1.0);
        assert_eq!(at(2.0 * PI / c.length).normalized, 0.0);
        assert_eq!(at(-4.0 * PI / c.length).normalized, 0.0);
        for dk in [13.0, -250.0, 777.7, 1e4] {
            let x = dk * c.length / 2.0;
            let expected = (x.sin() / x).powi(2);
            assert!((at(dk).normalized - expected).abs() < 1e-12);
        }
        let doubled = dfg_power_planewave(0.1, 0.2, &c, 2.0 * w, 0.0).unwrap();
        assert_relative_eq!(doubled.raw / at(0.0).raw, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn crystal_validation() {
        assert!(crystal(0.05).validate().is_ok());
        assert!(CrystalConfig { n_idler: 0.9, ..crystal(0.05) }.validate().is_err());
        assert!(CrystalConfig { miller: 1.1, ..crystal(0.05) }.validate().is_err());
        assert!(CrystalConfig { absorption: -1.0, ..crystal(0.05) }.validate().is_err());
        assert!(crystal(0.0).validate().is_err());
    }
}
