//! Scenario documents: a sectioned `key = value` format with unit suffixes.
//!
//! ```text
//! [scenario]
//! name = sqm-law
//! engine = ray            # dfg | ray | wave | visibility | xi-scan
//!
//! [pump]
//! wavelength = 532 nm
//! wavefront = 100 mm      # or "plane"
//!
//! [arm.signal]
//! wavelength = 800 nm
//! element = free 80 mm
//!
//! [arm.idler]
//! frame = mirror
//!
//! [detector]
//! search = 10 mm 1000 mm
//! ```
//!
//! The quantum mirror sits between the signal and idler arms. Lines starting
//! with `#` or `;` are comments, as is anything after ` #` on a line.
//! Unknown sections and keys are errors, and so are repeated keys (except
//! `element`).

use std::collections::BTreeSet;

use super::units::{format_quantity, take_number, take_quantity, tokenize, Dimension, Token, UnitError};
use crate::dfg::{qpm_effective_d, CrystalConfig, FocusingKernel};
use crate::error::{Error, Result};
use crate::scene::{Detection, DetectionMode, Element, IdlerFrame, Mask, Scene, Source, Wavefront};
use crate::wave::BETA_FIT;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Dfg,
    Ray,
    Wave,
    Visibility,
    XiScan,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Dfg => "dfg",
            Engine::Ray => "ray",
            Engine::Wave => "wave",
            Engine::Visibility => "visibility",
            Engine::XiScan => "xi-scan",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "dfg" => Engine::Dfg,
            "ray" => Engine::Ray,
            "wave" => Engine::Wave,
            "visibility" => Engine::Visibility,
            "xi-scan" => Engine::XiScan,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpSection {
    pub wavelength: f64,
    pub wavefront: Wavefront,
    pub power: Option<f64>,
    /// Confocal parameter inside the crystal.
    pub confocal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSection {
    pub length: f64,
    pub n_pump: f64,
    pub n_signal: f64,
    pub n_idler: f64,
    /// Bulk coefficient before the first-order QPM factor.
    pub d_raw: f64,
    pub miller: f64,
    pub absorption: f64,
    pub phase_mismatch: f64,
    pub calibration: f64,
    pub kernel: FocusingKernel,
    /// Measured idler power to compare against.
    pub measured_power: Option<f64>,
}

impl CrystalSection {
    pub fn config(&self) -> CrystalConfig {
        CrystalConfig {
            length: self.length,
            n_pump: self.n_pump,
            n_signal: self.n_signal,
            n_idler: self.n_idler,
            d_eff: qpm_effective_d(self.d_raw, self.miller),
            absorption: self.absorption,
            miller: self.miller,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalArm {
    pub wavelength: f64,
    pub power: Option<f64>,
    pub source: Source,
    pub aperture: f64,
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdlerArm {
    pub frame: IdlerFrame,
    pub elements: Vec<Element>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSection {
    pub mode: DetectionMode,
    /// Singles background in units of the mean intensity.
    pub background: f64,
    pub samples: usize,
    pub window: f64,
    /// Best-focus search range behind the idler arm.
    pub search: (f64, f64),
    /// Extra distance covered by the intensity map; 0 disables the map.
    pub map_depth: f64,
    pub map_planes: usize,
    pub map_columns: usize,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            mode: DetectionMode::Coincidence,
            background: 0.0,
            samples: 1 << 14,
            window: 20e-3,
            search: (-1.0, 1.0),
            map_depth: 0.0,
            map_planes: 32,
            map_columns: 256,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fan {
    #[default]
    Uniform,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub seed: u64,
    pub rays: usize,
    pub fan: Fan,
    /// Object height used to measure magnification.
    pub object_offset: f64,
    pub output: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 1,
            rays: 401,
            fan: Fan::Uniform,
            object_offset: 1e-3,
            output: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilitySection {
    pub beta: f64,
    pub photons_min: f64,
    pub photons_max: f64,
    pub points: usize,
}

impl Default for VisibilitySection {
    fn default() -> Self {
        Self {
            beta: BETA_FIT,
            photons_min: 1e3,
            photons_max: 1e9,
            points: 61,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSection {
    /// `k_s / k_p`; derived from the pump, signal and crystal when absent.
    pub mu: Option<f64>,
    pub xi_min: f64,
    pub xi_max: f64,
    pub points: usize,
    pub optimize_dk: bool,
    pub kernel: FocusingKernel,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            mu: None,
            xi_min: 0.05,
            xi_max: 6.0,
            points: 60,
            optimize_dk: false,
            kernel: FocusingKernel::Centered,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub engine: Engine,
    pub pump: PumpSection,
    pub crystal: Option<CrystalSection>,
    pub signal: SignalArm,
    pub idler: IdlerArm,
    pub detector: DetectorSection,
    pub run: RunSection,
    pub visibility: VisibilitySection,
    pub scan: ScanSection,
}

impl Scenario {
    /// Signal arm, quantum mirror and idler arm as one element chain.
    pub fn scene(&self) -> Scene {
        let mut elements = self.signal.elements.clone();
        elements.push(Element::QuantumMirror {
            pump_wavelength: self.pump.wavelength,
            pump: self.pump.wavefront,
        });
        elements.extend(self.idler.elements.iter().cloned());
        Scene::new(self.signal.wavelength, elements)
            .with_frame(self.idler.frame)
            .with_aperture(self.signal.aperture)
            .with_grid(self.detector.samples, self.detector.window)
            .with_source(self.signal.source)
            .with_detection(Detection {
                mode: self.detector.mode,
                background: self.detector.background,
            })
    }

    /// Checks cross-field invariants; failures are `Validation` errors.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(m));
        if self.name.is_empty() || self.name.contains(char::is_whitespace) {
            return fail(format!("scenario name '{}' must be a single non-empty word", self.name));
        }
        if !(self.pump.wavelength > 0.0) || !(self.signal.wavelength > self.pump.wavelength) {
            return fail(format!(
                "signal wavelength {} m must exceed pump wavelength {} m",
                self.signal.wavelength, self.pump.wavelength
            ));
        }
        let scene = self.scene();
        scene.validate().map_err(|e| Error::Validation(e.to_string()))?;
        if scene.quantum_mirror_count() != 1 {
            return fail("exactly one quantum mirror is required".into());
        }
        if !(self.signal.aperture > 0.0) {
            return fail("aperture must be positive".into());
        }
        for (name, p) in [("pump power", self.pump.power), ("signal power", self.signal.power)] {
            if let Some(p) = p {
                if !(p > 0.0) {
                    return fail(format!("{name} must be positive"));
                }
            }
        }
        let d = &self.detector;
        if d.samples < 2 || !d.samples.is_multiple_of(2) {
            return fail(format!("detector samples must be even and >= 2, got {}", d.samples));
        }
        if !(d.window > 0.0) || !(d.background >= 0.0) || !(d.search.1 > d.search.0) || !(d.map_depth >= 0.0) {
            return fail("detector window, background, search range or map depth out of range".into());
        }
        if d.map_planes < 2 || d.map_columns < 1 || d.map_columns > d.samples {
            return fail("map needs at least 2 planes and between 1 and `samples` columns".into());
        }
        if self.run.rays < 100 {
            return fail(format!("at least 100 rays are needed, got {}", self.run.rays));
        }
        if !(self.run.object_offset > 0.0) {
            return fail("object offset must be positive".into());
        }
        let v = &self.visibility;
        if !(v.beta > 0.0 && v.photons_min > 0.0 && v.photons_max > v.photons_min && v.points >= 2) {
            return fail("visibility sweep needs beta > 0, 0 < photons_min < photons_max and >= 2 points".into());
        }
        let s = &self.scan;
        if !(s.xi_min > 0.0 && s.xi_max > s.xi_min && s.points >= 2) {
            return fail("xi scan needs 0 < xi_min < xi_max and >= 2 points".into());
        }
        if let Some(mu) = s.mu {
            if !(mu > 0.0 && mu < 1.0) {
                return fail(format!("mu must lie in (0, 1), got {mu}"));
            }
        }
        if let Some(c) = &self.crystal {
            c.config().validate().map_err(|e| Error::Validation(e.to_string()))?;
            if !(c.calibration > 0.0) {
                return fail("calibration must be positive".into());
            }
        }
        match self.engine {
            Engine::Dfg => {
                if self.crystal.is_none() {
                    return fail("the dfg engine needs a [crystal] section".into());
                }
                if self.pump.power.is_none() || self.signal.power.is_none() || self.pump.confocal.is_none() {
                    return fail("the dfg engine needs pump power, pump confocal and signal power".into());
                }
            }
            Engine::XiScan if s.mu.is_none() && self.crystal.is_none() => {
                return fail("xi-scan needs [scan] mu or a [crystal] section to derive it".into());
            }
            _ => {}
        }
        Ok(())
    }
}

struct Line<'a> {
    number: usize,
    /// Byte column of the value's first character (0-based).
    value_col: usize,
    key: &'a str,
    value: &'a str,
}

fn parse_error(line: usize, col0: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: col0 + 1,
        message: message.into(),
    }
}

fn unit_error(line: &Line<'_>, e: UnitError) -> Error {
    parse_error(line.number, line.value_col + e.offset, e.message)
}

const SECTIONS: &[&str] = &[
    "scenario",
    "pump",
    "crystal",
    "arm.signal",
    "arm.idler",
    "detector",
    "run",
    "visibility",
    "scan",
];

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut b = Builder::default();
    let mut section: Option<&str> = None;
    let mut seen_sections = BTreeSet::new();
    let mut seen_keys: BTreeSet<(String, String)> = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let number = idx + 1;
        let content = strip_comment(raw);
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(number, lead, "section header must end with ']'"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(parse_error(number, lead + 1, format!("unknown section [{name}]")));
            }
            if !seen_sections.insert(name.to_string()) {
                return Err(parse_error(number, lead + 1, format!("section [{name}] repeated")));
            }
            section = SECTIONS.iter().find(|s| **s == name).copied();
            continue;
        }
        let Some(eq) = content.find('=') else {
            return Err(parse_error(number, lead, "expected 'key = value'"));
        };
        let key = content[..eq].trim();
        let after = &content[eq + 1..];
        let value_col = eq + 1 + (after.len() - after.trim_start().len());
        let line = Line {
            number,
            value_col,
            key,
            value: after.trim(),
        };
        let Some(sec) = section else {
            return Err(parse_error(number, lead, "key outside of any section"));
        };
        if key != "element" && !seen_keys.insert((sec.to_string(), key.to_string())) {
            return Err(parse_error(number, lead, format!("key '{key}' repeated in [{sec}]")));
        }
        if line.value.is_empty() {
            return Err(parse_error(number, value_col, format!("key '{key}' has no value")));
        }
        b.set(sec, &line, lead)?;
    }
    let scenario = b.finish()?;
    scenario.validate()?;
    Ok(scenario)
}

fn strip_comment(line: &str) -> &str {
    let t = line.trim_start();
    if t.starts_with('#') || t.starts_with(';') {
        return "";
    }
    match line.find(" #").or_else(|| line.find("\t#")) {
        Some(i) => &line[..i],
        None => line,
    }
}

#[derive(Default)]
struct Builder {
    name: Option<String>,
    engine: Option<Engine>,
    pump_wavelength: Option<f64>,
    pump_wavefront: Option<Wavefront>,
    pump_power: Option<f64>,
    pump_confocal: Option<f64>,
    crystal_seen: bool,
    length: Option<f64>,
    n_pump: Option<f64>,
    n_signal: Option<f64>,
    n_idler: Option<f64>,
    d_raw: Option<f64>,
    miller: Option<f64>,
    absorption: Option<f64>,
    phase_mismatch: Option<f64>,
    calibration: Option<f64>,
    crystal_kernel: Option<FocusingKernel>,
    measured_power: Option<f64>,
    signal_wavelength: Option<f64>,
    signal_power: Option<f64>,
    source: Option<Source>,
    aperture: Option<f64>,
    signal_elements: Vec<Element>,
    frame: Option<IdlerFrame>,
    idler_elements: Vec<Element>,
    detector: DetectorSection,
    run: RunSection,
    visibility: VisibilitySection,
    scan: ScanSection,
}

fn single(line: &Line<'_>, dim: Dimension) -> Result<f64> {
    let tokens = tokenize(line.value);
    let mut pos = 0;
    let v = take_quantity(&tokens, &mut pos, dim, line.value.len()).map_err(|e| unit_error(line, e))?;
    expect_end(line, &tokens, pos)?;
    Ok(v)
}

fn plain(line: &Line<'_>) -> Result<f64> {
    let tokens = tokenize(line.value);
    let mut pos = 0;
    let v = take_number(&tokens, &mut pos, line.value.len()).map_err(|e| unit_error(line, e))?;
    expect_end(line, &tokens, pos)?;
    Ok(v)
}

fn count(line: &Line<'_>) -> Result<usize> {
    line.value
        .parse::<usize>()
        .map_err(|_| parse_error(line.number, line.value_col, format!("expected a whole number, found '{}'", line.value)))
}

fn expect_end(line: &Line<'_>, tokens: &[Token<'_>], pos: usize) -> Result<()> {
    match tokens.get(pos) {
        None => Ok(()),
        Some(t) => Err(parse_error(
            line.number,
            line.value_col + t.offset,
            format!("unexpected '{}'", t.text),
        )),
    }
}

fn keyword<T>(line: &Line<'_>, options: &[(&str, T)]) -> Result<T>
where
    T: Copy,
{
    options
        .iter()
        .find(|(k, _)| *k == line.value)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(k, _)| *k).collect();
            parse_error(
                line.number,
                line.value_col,
                format!("expected one of {}, found '{}'", names.join(", "), line.value),
            )
        })
}

const KERNELS: &[(&str, FocusingKernel)] = &[
    ("centered", FocusingKernel::Centered),
    ("entrance-face", FocusingKernel::EntranceFace),
    ("sum-coupling", FocusingKernel::SumCoupling),
];

fn kernel_name(k: FocusingKernel) -> &'static str {
    KERNELS.iter().find(|(_, v)| *v == k).map(|(n, _)| *n).expect("all kernels named")
}

fn parse_element(line: &Line<'_>) -> Result<Element> {
    let tokens = tokenize(line.value);
    let kind = tokens[0].text;
    let mut pos = 1;
    let end = line.value.len();
    let len = |pos: &mut usize| take_quantity(&tokens, pos, Dimension::Length, end).map_err(|e| unit_error(line, e));
    let element = match kind {
        "free" => Element::FreeSpace(len(&mut pos)?),
        "lens" => Element::ThinLens(len(&mut pos)?),
        "open" => Element::Mask(Mask::Open),
        "slit" => Element::Mask(Mask::Slit {
            center: len(&mut pos)?,
            width: len(&mut pos)?,
        }),
        "double-slit" => Element::Mask(Mask::DoubleSlit {
            center: len(&mut pos)?,
            separation: len(&mut pos)?,
            width: len(&mut pos)?,
        }),
        "bar" => Element::Mask(Mask::Bar {
            center: len(&mut pos)?,
            width: len(&mut pos)?,
        }),
        "grating" => {
            let period = len(&mut pos)?;
            let duty = take_number(&tokens, &mut pos, end).map_err(|e| unit_error(line, e))?;
            Element::Mask(Mask::Grating { period, duty })
        }
        "gaussian" => Element::Mask(Mask::Gaussian {
            center: len(&mut pos)?,
            radius: len(&mut pos)?,
        }),
        other => {
            return Err(parse_error(
                line.number,
                line.value_col,
                format!("unknown element '{other}' (free, lens, open, slit, double-slit, bar, grating, gaussian)"),
            ))
        }
    };
    expect_end(line, &tokens, pos)?;
    element
        .validate()
        .map_err(|e| parse_error(line.number, line.value_col, e.to_string()))?;
    Ok(element)
}

fn format_element(e: &Element) -> String {
    let l = |v: f64| format_quantity(v, Dimension::Length);
    match e {
        Element::FreeSpace(d) => format!("free {}", l(*d)),
        Element::ThinLens(f) => format!("lens {}", l(*f)),
        Element::Mask(Mask::Open) => "open".into(),
        Element::Mask(Mask::Slit { center, width }) => format!("slit {} {}", l(*center), l(*width)),
        Element::Mask(Mask::DoubleSlit {
            center,
            separation,
            width,
        }) => format!("double-slit {} {} {}", l(*center), l(*separation), l(*width)),
        Element::Mask(Mask::Bar { center, width }) => format!("bar {} {}", l(*center), l(*width)),
        Element::Mask(Mask::Grating { period, duty }) => format!("grating {} {duty:e}", l(*period)),
        Element::Mask(Mask::Gaussian { center, radius }) => format!("gaussian {} {}", l(*center), l(*radius)),
        Element::QuantumMirror { .. } => unreachable!("the mirror is implicit between the arms"),
    }
}

fn parse_source(line: &Line<'_>) -> Result<Source> {
    let tokens = tokenize(line.value);
    let end = line.value.len();
    let mut pos = 1;
    let src = match tokens[0].text {
        "plane" => Source::Plane,
        "gaussian" => {
            let waist = take_quantity(&tokens, &mut pos, Dimension::Length, end).map_err(|e| unit_error(line, e))?;
            let center = take_quantity(&tokens, &mut pos, Dimension::Length, end).map_err(|e| unit_error(line, e))?;
            if !(waist > 0.0) {
                return Err(parse_error(line.number, line.value_col, "source waist must be positive"));
            }
            Source::Gaussian { waist, center }
        }
        "tilted" => Source::Tilted {
            kx: take_quantity(&tokens, &mut pos, Dimension::Wavenumber, end).map_err(|e| unit_error(line, e))?,
        },
        other => {
            return Err(parse_error(
                line.number,
                line.value_col,
                format!("unknown source '{other}' (plane, gaussian, tilted)"),
            ))
        }
    };
    expect_end(line, &tokens, pos)?;
    Ok(src)
}

fn parse_bool(line: &Line<'_>) -> Result<bool> {
    keyword(line, &[("true", true), ("false", false)])
}

impl Builder {
    fn set(&mut self, section: &str, line: &Line<'_>, key_col: usize) -> Result<()> {
        use Dimension::*;
        let key = line.key;
        match (section, key) {
            ("scenario", "name") => self.name = Some(line.value.to_string()),
            ("scenario", "engine") => {
                self.engine = Some(Engine::parse(line.value).ok_or_else(|| {
                    parse_error(
                        line.number,
                        line.value_col,
                        format!("unknown engine '{}' (dfg, ray, wave, visibility, xi-scan)", line.value),
                    )
                })?)
            }
            ("pump", "wavelength") => self.pump_wavelength = Some(single(line, Length)?),
            ("pump", "wavefront") => {
                self.pump_wavefront = Some(if line.value == "plane" {
                    Wavefront::Plane
                } else {
                    Wavefront::Spherical(single(line, Length)?)
                })
            }
            ("pump", "power") => self.pump_power = Some(single(line, Power)?),
            ("pump", "confocal") => self.pump_confocal = Some(single(line, Length)?),
            ("crystal", k) => {
                self.crystal_seen = true;
                match k {
                    "length" => self.length = Some(single(line, Length)?),
                    "n_pump" => self.n_pump = Some(plain(line)?),
                    "n_signal" => self.n_signal = Some(plain(line)?),
                    "n_idler" => self.n_idler = Some(plain(line)?),
                    "d_raw" => self.d_raw = Some(single(line, Nonlinear)?),
                    "miller" => self.miller = Some(plain(line)?),
                    "absorption" => self.absorption = Some(single(line, InverseLength)?),
                    "phase_mismatch" => self.phase_mismatch = Some(single(line, Wavenumber)?),
                    "calibration" => self.calibration = Some(plain(line)?),
                    "kernel" => self.crystal_kernel = Some(keyword(line, KERNELS)?),
                    "measured_power" => self.measured_power = Some(single(line, Power)?),
                    _ => return Err(unknown_key(section, line, key_col)),
                }
            }
            ("arm.signal", "wavelength") => self.signal_wavelength = Some(single(line, Length)?),
            ("arm.signal", "power") => self.signal_power = Some(single(line, Power)?),
            ("arm.signal", "source") => self.source = Some(parse_source(line)?),
            ("arm.signal", "aperture") => self.aperture = Some(single(line, Length)?),
            ("arm.signal", "element") => self.signal_elements.push(parse_element(line)?),
            ("arm.idler", "frame") => {
                self.frame = Some(keyword(line, &[("conjugate", IdlerFrame::Conjugate), ("mirror", IdlerFrame::Mirror)])?)
            }
            ("arm.idler", "element") => self.idler_elements.push(parse_element(line)?),
            ("detector", "mode") => {
                self.detector.mode = keyword(
                    line,
                    &[("singles", DetectionMode::Singles), ("coincidence", DetectionMode::Coincidence)],
                )?
            }
            ("detector", "background") => self.detector.background = plain(line)?,
            ("detector", "samples") => self.detector.samples = count(line)?,
            ("detector", "window") => self.detector.window = single(line, Length)?,
            ("detector", "search") => {
                let tokens = tokenize(line.value);
                let mut pos = 0;
                let end = line.value.len();
                let a = take_quantity(&tokens, &mut pos, Length, end).map_err(|e| unit_error(line, e))?;
                let b = take_quantity(&tokens, &mut pos, Length, end).map_err(|e| unit_error(line, e))?;
                expect_end(line, &tokens, pos)?;
                self.detector.search = (a, b);
            }
            ("detector", "map_depth") => self.detector.map_depth = single(line, Length)?,
            ("detector", "map_planes") => self.detector.map_planes = count(line)?,
            ("detector", "map_columns") => self.detector.map_columns = count(line)?,
            ("run", "seed") => {
                self.run.seed = line.value.parse().map_err(|_| {
                    parse_error(line.number, line.value_col, format!("seed must be a 64-bit unsigned integer, found '{}'", line.value))
                })?
            }
            ("run", "rays") => self.run.rays = count(line)?,
            ("run", "fan") => self.run.fan = keyword(line, &[("uniform", Fan::Uniform), ("random", Fan::Random)])?,
            ("run", "object_offset") => self.run.object_offset = single(line, Length)?,
            ("run", "output") => self.run.output = Some(line.value.to_string()),
            ("visibility", "beta") => self.visibility.beta = plain(line)?,
            ("visibility", "photons_min") => self.visibility.photons_min = plain(line)?,
            ("visibility", "photons_max") => self.visibility.photons_max = plain(line)?,
            ("visibility", "points") => self.visibility.points = count(line)?,
            ("scan", "mu") => self.scan.mu = Some(plain(line)?),
            ("scan", "xi_min") => self.scan.xi_min = plain(line)?,
            ("scan", "xi_max") => self.scan.xi_max = plain(line)?,
            ("scan", "points") => self.scan.points = count(line)?,
            ("scan", "optimize_dk") => self.scan.optimize_dk = parse_bool(line)?,
            ("scan", "kernel") => self.scan.kernel = keyword(line, KERNELS)?,
            _ => return Err(unknown_key(section, line, key_col)),
        }
        Ok(())
    }

    fn finish(self) -> Result<Scenario> {
        let missing = |what: &str| Error::Validation(format!("missing required key {what}"));
        let crystal = if self.crystal_seen {
            Some(CrystalSection {
                length: self.length.ok_or_else(|| missing("[crystal] length"))?,
                n_pump: self.n_pump.ok_or_else(|| missing("[crystal] n_pump"))?,
                n_signal: self.n_signal.ok_or_else(|| missing("[crystal] n_signal"))?,
                n_idler: self.n_idler.ok_or_else(|| missing("[crystal] n_idler"))?,
                d_raw: self.d_raw.ok_or_else(|| missing("[crystal] d_raw"))?,
                miller: self.miller.unwrap_or(1.0),
                absorption: self.absorption.unwrap_or(0.0),
                phase_mismatch: self.phase_mismatch.unwrap_or(0.0),
                calibration: self.calibration.unwrap_or(1.0),
                kernel: self.crystal_kernel.unwrap_or_default(),
                measured_power: self.measured_power,
            })
        } else {
            None
        };
        Ok(Scenario {
            name: self.name.unwrap_or_else(|| "scenario".into()),
            engine: self.engine.unwrap_or(Engine::Ray),
            pump: PumpSection {
                wavelength: self.pump_wavelength.ok_or_else(|| missing("[pump] wavelength"))?,
                wavefront: self.pump_wavefront.unwrap_or(Wavefront::Plane),
                power: self.pump_power,
                confocal: self.pump_confocal,
            },
            crystal,
            signal: SignalArm {
                wavelength: self.signal_wavelength.ok_or_else(|| missing("[arm.signal] wavelength"))?,
                power: self.signal_power,
                source: self.source.unwrap_or(Source::Plane),
                aperture: self.aperture.unwrap_or(5e-3),
                elements: self.signal_elements,
            },
            idler: IdlerArm {
                frame: self.frame.unwrap_or_default(),
                elements: self.idler_elements,
            },
            detector: self.detector,
            run: self.run,
            visibility: self.visibility,
            scan: self.scan,
        })
    }
}

fn unknown_key(section: &str, line: &Line<'_>, key_col: usize) -> Error {
    parse_error(line.number, key_col, format!("unknown key '{}' in [{section}]", line.key))
}

/// Writes a document that parses back to an identical scenario.
pub fn serialize_scenario(s: &Scenario) -> String {
    use std::fmt::Write;
    use Dimension::*;
    let q = format_quantity;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "[scenario]\nname = {}\nengine = {}\n", s.name, s.engine.name());

    let _ = writeln!(w, "[pump]\nwavelength = {}", q(s.pump.wavelength, Length));
    let _ = match s.pump.wavefront {
        Wavefront::Plane => writeln!(w, "wavefront = plane"),
        Wavefront::Spherical(r) => writeln!(w, "wavefront = {}", q(r, Length)),
    };
    if let Some(p) = s.pump.power {
        let _ = writeln!(w, "power = {}", q(p, Power));
    }
    if let Some(b) = s.pump.confocal {
        let _ = writeln!(w, "confocal = {}", q(b, Length));
    }
    let _ = writeln!(w);

    if let Some(c) = &s.crystal {
        let _ = writeln!(w, "[crystal]\nlength = {}", q(c.length, Length));
        let _ = writeln!(w, "n_pump = {:e}\nn_signal = {:e}\nn_idler = {:e}", c.n_pump, c.n_signal, c.n_idler);
        let _ = writeln!(w, "d_raw = {}\nmiller = {:e}", q(c.d_raw, Nonlinear), c.miller);
        let _ = writeln!(w, "absorption = {}", q(c.absorption, InverseLength));
        let _ = writeln!(w, "phase_mismatch = {}", q(c.phase_mismatch, Wavenumber));
        let _ = writeln!(w, "calibration = {:e}\nkernel = {}", c.calibration, kernel_name(c.kernel));
        if let Some(p) = c.measured_power {
            let _ = writeln!(w, "measured_power = {}", q(p, Power));
        }
        let _ = writeln!(w);
    }

    let _ = writeln!(w, "[arm.signal]\nwavelength = {}", q(s.signal.wavelength, Length));
    if let Some(p) = s.signal.power {
        let _ = writeln!(w, "power = {}", q(p, Power));
    }
    let _ = match s.signal.source {
        Source::Plane => writeln!(w, "source = plane"),
        Source::Gaussian { waist, center } => writeln!(w, "source = gaussian {} {}", q(waist, Length), q(center, Length)),
        Source::Tilted { kx } => writeln!(w, "source = tilted {}", q(kx, Wavenumber)),
    };
    let _ = writeln!(w, "aperture = {}", q(s.signal.aperture, Length));
    for e in &s.signal.elements {
        let _ = writeln!(w, "element = {}", format_element(e));
    }
    let _ = writeln!(w);

    let frame = match s.idler.frame {
        IdlerFrame::Conjugate => "conjugate",
        IdlerFrame::Mirror => "mirror",
    };
    let _ = writeln!(w, "[arm.idler]\nframe = {frame}");
    for e in &s.idler.elements {
        let _ = writeln!(w, "element = {}", format_element(e));
    }
    let _ = writeln!(w);

    let d = &s.detector;
    let mode = match d.mode {
        DetectionMode::Singles => "singles",
        DetectionMode::Coincidence => "coincidence",
    };
    let _ = writeln!(w, "[detector]\nmode = {mode}\nbackground = {:e}\nsamples = {}", d.background, d.samples);
    let _ = writeln!(w, "window = {}", q(d.window, Length));
    let _ = writeln!(w, "search = {} {}", q(d.search.0, Length), q(d.search.1, Length));
    let _ = writeln!(w, "map_depth = {}\nmap_planes = {}\nmap_columns = {}\n", q(d.map_depth, Length), d.map_planes, d.map_columns);

    let r = &s.run;
    let fan = match r.fan {
        Fan::Uniform => "uniform",
        Fan::Random => "random",
    };
    let _ = writeln!(w, "[run]\nseed = {}\nrays = {}\nfan = {fan}", r.seed, r.rays);
    let _ = writeln!(w, "object_offset = {}", q(r.object_offset, Length));
    if let Some(o) = &r.output {
        let _ = writeln!(w, "output = {o}");
    }
    let _ = writeln!(w);

    let v = &s.visibility;
    let _ = writeln!(
        w,
        "[visibility]\nbeta = {:e}\nphotons_min = {:e}\nphotons_max = {:e}\npoints = {}\n",
        v.beta, v.photons_min, v.photons_max, v.points
    );

    let sc = &s.scan;
    let _ = writeln!(w, "[scan]");
    if let Some(mu) = sc.mu {
        let _ = writeln!(w, "mu = {mu:e}");
    }
    let _ = writeln!(
        w,
        "xi_min = {:e}\nxi_max = {:e}\npoints = {}\noptimize_dk = {}\nkernel = {}",
        sc.xi_min,
        sc.xi_max,
        sc.points,
        sc.optimize_dk,
        kernel_name(sc.kernel)
    );
    out
}
