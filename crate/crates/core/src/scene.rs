//! Optical elements and scenes shared by the ray and wave engines.

use crate::error::{Error, Result};

/// Amplitude transmission profile of a thin mask. All shapes are binary
/// (0 or 1) except `Gaussian`, which is a soft aperture.
#[derive(Debug, Clone, PartialEq)]
pub enum Mask {
    Open,
    /// Single transmitting slit.
    Slit { center: f64, width: f64 },
    /// Two slits of equal width, `separation` apart centre to centre.
    DoubleSlit {
        center: f64,
        separation: f64,
        width: f64,
    },
    /// Opaque strip on a clear background.
    Bar { center: f64, width: f64 },
    /// Ronchi-type grating; `duty` is the open fraction of each period.
    Grating { period: f64, duty: f64 },
    /// Amplitude `exp(-(x - center)^2 / radius^2)`.
    Gaussian { center: f64, radius: f64 },
}

impl Mask {
    pub fn transmission(&self, x: f64) -> f64 {
        match *self {
            Mask::Open => 1.0,
            Mask::Slit { center, width } => inside(x - center, width),
            Mask::DoubleSlit {
                center,
                separation,
                width,
            } => {
                let u = x - center;
                inside(u - separation / 2.0, width).max(inside(u + separation / 2.0, width))
            }
            Mask::Bar { center, width } => 1.0 - inside(x - center, width),
            Mask::Grating { period, duty } => {
                let phase = (x / period).rem_euclid(1.0);
                if phase < duty {
                    1.0
                } else {
                    0.0
                }
            }
            Mask::Gaussian { center, radius } => {
                let u = (x - center) / radius;
                (-u * u).exp()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Mask::Open => true,
            Mask::Slit { width, .. } | Mask::Bar { width, .. } => width > 0.0,
            Mask::DoubleSlit {
                separation, width, ..
            } => width > 0.0 && separation > width,
            Mask::Grating { period, duty } => period > 0.0 && (0.0..=1.0).contains(&duty),
            Mask::Gaussian { radius, .. } => radius > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("malformed mask {self:?}")))
        }
    }
}

fn inside(u: f64, width: f64) -> f64 {
    if u.abs() <= width / 2.0 {
        1.0
    } else {
        0.0
    }
}

/// Pump wavefront at the crystal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wavefront {
    Plane,
    /// Radius of curvature; positive for a pump diverging from a point
    /// `radius` before the crystal, negative for one converging to a point after it.
    Spherical(f64),
}

impl Wavefront {
    /// Local pump ray slope at transverse position `x`.
    pub fn slope(&self, x: f64) -> f64 {
        match *self {
            Wavefront::Plane => 0.0,
            Wavefront::Spherical(r) => x / r,
        }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            Wavefront::Plane => f64::INFINITY,
            Wavefront::Spherical(r) => r,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    FreeSpace(f64),
    ThinLens(f64),
    Mask(Mask),
    /// Thin pumped crystal converting signal into idler.
    QuantumMirror {
        pump_wavelength: f64,
        pump: Wavefront,
    },
}

impl Element {
    pub fn validate(&self) -> Result<()> {
        match self {
            Element::FreeSpace(d) if !(d.is_finite() && *d >= 0.0) => Err(Error::InvalidInput(
                format!("free-space distance must be >= 0, got {d}"),
            )),
            Element::ThinLens(f) if !(f.is_finite() && *f != 0.0) => Err(Error::InvalidInput(
                format!("focal length must be finite and non-zero, got {f}"),
            )),
            Element::Mask(m) => m.validate(),
            Element::QuantumMirror {
                pump_wavelength,
                pump,
            } => {
                if !(pump_wavelength.is_finite() && *pump_wavelength > 0.0) {
                    return Err(Error::InvalidInput("pump wavelength must be positive".into()));
                }
                if let Wavefront::Spherical(r) = pump {
                    if !(r.is_finite() && *r != 0.0) {
                        return Err(Error::InvalidInput(
                            "pump radius must be finite and non-zero".into(),
                        ));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// How the idler leaving a quantum mirror is drawn.
///
/// `Conjugate` follows the physically emitted idler forward from the crystal:
/// its transverse momentum is the pump's minus the signal's, so a diverging
/// signal leaves as a converging idler. `Mirror` draws the idler as the
/// reflection of the signal path, straightened out: slopes change sign
/// relative to `Conjugate` and image distances are those of the
/// quantum-mirror imaging laws (a degenerate plane mirror is transparent).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IdlerFrame {
    #[default]
    Conjugate,
    Mirror,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DetectionMode {
    /// Every detection counted; uncorrelated events add a flat background.
    Singles,
    /// Pair-gated detection; the uncorrelated background is rejected.
    #[default]
    Coincidence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub mode: DetectionMode,
    /// Uncorrelated background in singles mode, in units of the mean
    /// correlated intensity across the detector window.
    pub background: f64,
}

impl Default for Detection {
    fn default() -> Self {
        Self {
            mode: DetectionMode::Coincidence,
            background: 0.0,
        }
    }
}

/// Illumination launched at the object plane (z = 0) by the wave engine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    Plane,
    Gaussian { waist: f64, center: f64 },
    /// Tilted plane wave with the given transverse wavenumber, rad/m.
    Tilted { kx: f64 },
}

/// An object plane at z = 0 followed by an ordered element chain ending just
/// before the detector.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub signal_wavelength: f64,
    pub elements: Vec<Element>,
    pub frame: IdlerFrame,
    pub detection: Detection,
    /// Ray fan half-width at the first lens or mirror.
    pub aperture: f64,
    pub source: Source,
    pub grid_samples: usize,
    pub window: f64,
}

impl Scene {
    pub fn new(signal_wavelength: f64, elements: Vec<Element>) -> Self {
        Self {
            signal_wavelength,
            elements,
            frame: IdlerFrame::default(),
            detection: Detection::default(),
            aperture: 5e-3,
            source: Source::Plane,
            grid_samples: 1 << 14,
            window: 20e-3,
        }
    }

    pub fn with_frame(mut self, frame: IdlerFrame) -> Self {
        self.frame = frame;
        self
    }

    pub fn with_aperture(mut self, aperture: f64) -> Self {
        self.aperture = aperture;
        self
    }

    pub fn with_grid(mut self, samples: usize, window: f64) -> Self {
        self.grid_samples = samples;
        self.window = window;
        self
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    pub fn with_detection(mut self, detection: Detection) -> Self {
        self.detection = detection;
        self
    }

    pub fn quantum_mirror_count(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, Element::QuantumMirror { .. }))
            .count()
    }

    /// Checks the element chain and requires exactly one quantum mirror.
    pub fn validate(&self) -> Result<()> {
        if !(self.signal_wavelength.is_finite() && self.signal_wavelength > 0.0) {
            return Err(Error::InvalidInput("signal wavelength must be positive".into()));
        }
        for e in &self.elements {
            e.validate()?;
        }
        match self.quantum_mirror_count() {
            1 => Ok(()),
            n => Err(Error::InvalidInput(format!(
                "scene needs exactly one quantum mirror, found {n}"
            ))),
        }
    }

    /// Distance from the object plane to the first lens or quantum mirror.
    pub fn distance_to_first_optic(&self) -> f64 {
        let mut z = 0.0;
        for e in &self.elements {
            match e {
                Element::FreeSpace(d) => z += d,
                Element::Mask(_) => {}
                Element::ThinLens(_) | Element::QuantumMirror { .. } => return z,
            }
        }
        z
    }
}
