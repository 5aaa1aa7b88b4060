//! Scenario execution: engine dispatch, the run report and output files.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::output::{write_csv, write_pgm, write_text, Image, Table};
use super::scenario::{Engine, Fan, Scenario};
use crate::dfg::{
    conversion_efficiency, dfg_power_focused_with, dfg_power_planewave, optimum_focusing, scan_xi, DfgOptions,
    FocusSample, FocusingOptions, GaussianBeam, OPTIMUM_XI_MAX, OPTIMUM_XI_MIN,
};
use crate::error::{Error, Result};
use crate::kinematics::{angular_frequency, idler_wavelength};
use crate::ray::{
    focus_search, random_fan, ray_fan, sqm_image_distance, traced_magnification, RayMode, Tracer,
};
use crate::scene::{DetectionMode, Element, IdlerFrame, Wavefront};
use crate::wave::{detect, fresnel_propagate_limited, fringe_analysis, simulate_scene, Saturating, VisibilityModel};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A named derived value.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub engine: Engine,
    pub version: String,
    pub seed: u64,
    /// Seconds; shown on the console only, never written to files.
    pub wall_time: f64,
    pub quantities: Vec<Quantity>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.quantities.iter().find(|q| q.name == name).map(|q| q.value)
    }

    /// Every numeric field must be finite.
    pub fn check_finite(&self) -> Result<()> {
        if !self.wall_time.is_finite() {
            return Err(Error::NonFinite("wall time".into()));
        }
        match self.quantities.iter().find(|q| !q.value.is_finite()) {
            Some(q) => Err(Error::NonFinite(format!("{} = {}", q.name, q.value))),
            None => Ok(()),
        }
    }

    /// Deterministic text: everything except the wall time.
    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario {}", self.name);
        let _ = writeln!(s, "engine {}", self.engine.name());
        let _ = writeln!(s, "version {}", self.version);
        let _ = writeln!(s, "seed {}", self.seed);
        for q in &self.quantities {
            let _ = writeln!(s, "{} = {:.16e} {}", q.name, q.value, q.unit);
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning: {w}");
        }
        s
    }

    /// Console summary: the report text plus the wall time.
    pub fn summary(&self) -> String {
        format!("{}wall_time = {:.3} s\n", self.text(), self.wall_time)
    }
}

/// Tables and images produced by an engine, keyed by file suffix.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunData {
    pub tables: Vec<(String, Table)>,
    pub images: Vec<(String, Image)>,
}

#[derive(Debug, Default)]
struct Collector {
    quantities: Vec<Quantity>,
    warnings: Vec<String>,
    data: RunData,
}

impl Collector {
    fn put(&mut self, name: &str, value: f64, unit: &str) {
        self.quantities.push(Quantity {
            name: name.into(),
            value,
            unit: unit.into(),
        });
    }
}

/// Runs the declared engine. Engine errors carry the scenario name.
pub fn run_scenario(scenario: &Scenario) -> Result<(RunReport, RunData)> {
    scenario.validate()?;
    let start = Instant::now();
    let mut c = Collector::default();
    let outcome = match scenario.engine {
        Engine::Dfg => run_dfg(scenario, &mut c),
        Engine::Ray => run_ray(scenario, &mut c),
        Engine::Wave => run_wave(scenario, &mut c),
        Engine::Visibility => run_visibility(scenario, &mut c),
        Engine::XiScan => run_xi_scan(scenario, &mut c),
    };
    outcome.map_err(|e| e.context(format!("scenario '{}'", scenario.name)))?;
    let report = RunReport {
        name: scenario.name.clone(),
        engine: scenario.engine,
        version: VERSION.into(),
        seed: scenario.run.seed,
        wall_time: start.elapsed().as_secs_f64(),
        quantities: c.quantities,
        warnings: c.warnings,
    };
    report
        .check_finite()
        .map_err(|e| e.context(format!("scenario '{}'", scenario.name)))?;
    Ok((report, c.data))
}

/// Writes `<prefix>_<suffix>.csv`, `<prefix>_<suffix>.pgm` (with sidecar) and
/// `<prefix>_report.txt`; returns the paths in writing order.
pub fn emit_outputs(report: &RunReport, data: &RunData, prefix: &Path) -> Result<Vec<PathBuf>> {
    let path = |suffix: &str, ext: &str| {
        let mut s = prefix.as_os_str().to_owned();
        s.push(format!("_{suffix}.{ext}"));
        PathBuf::from(s)
    };
    let mut written = Vec::new();
    for (suffix, table) in &data.tables {
        let p = path(suffix, "csv");
        write_csv(&p, table)?;
        written.push(p);
    }
    for (suffix, image) in &data.images {
        let p = path(suffix, "pgm");
        write_pgm(&p, image)?;
        written.push(p);
    }
    let p = path("report", "txt");
    write_text(&p, &report.text())?;
    written.push(p);
    Ok(written)
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn run_dfg(s: &Scenario, c: &mut Collector) -> Result<()> {
    let crystal = s.crystal.as_ref().expect("validated");
    let config = crystal.config();
    let b = s.pump.confocal.expect("validated");
    let pump = GaussianBeam::from_confocal(s.pump.power.expect("validated"), b, s.pump.wavelength, crystal.n_pump)?;
    let signal = GaussianBeam::from_confocal(s.signal.power.expect("validated"), b, s.signal.wavelength, crystal.n_signal)?;
    let opts = DfgOptions {
        calibration: crystal.calibration,
        focusing: FocusingOptions::with_kernel(crystal.kernel),
        ..DfgOptions::default()
    };
    let dk = crystal.phase_mismatch;
    let r = dfg_power_focused_with(&pump, &signal, &config, dk, &opts)?;
    let efficiency = |p: f64| conversion_efficiency(p, pump.power, signal.power, config.length);

    c.put("idler_wavelength", idler_wavelength(s.pump.wavelength, s.signal.wavelength)?, "m");
    c.put("phase_mismatch", dk, "rad/m");
    c.put("d_eff", config.d_eff, "m/V");
    c.put("confocal", r.confocal, "m");
    c.put("xi", r.xi, "");
    c.put("mu", r.mu, "");
    c.put("h", r.h, "");
    c.put("idler_power", r.power, "W");
    c.put("efficiency_model", efficiency(r.power), "%/(W cm)");
    if let Some(measured) = crystal.measured_power {
        c.put("idler_power_measured", measured, "W");
        c.put("efficiency_measured", efficiency(measured), "%/(W cm)");
        c.put("model_over_measured", r.power / measured, "");
    }

    // phase-matching curve over |dk L| <= 4 pi
    let mut table = Table::new(&["dk_rad_per_m", "dk_l", "normalized", "raw"]);
    let l = config.length;
    for j in 0..=200 {
        let dkl = -4.0 * PI + 8.0 * PI * j as f64 / 200.0;
        let p = dfg_power_planewave(pump.power, signal.power, &config, r.omega_idler, dkl / l)?;
        table.push(vec![dkl / l, dkl, p.normalized, p.raw]);
    }
    c.data.tables.push(("phase_matching".into(), table));
    Ok(())
}

/// Analytic image distance behind the idler arm for the shapes the imaging
/// laws cover: a spherical (or plane) quantum mirror at distance `a`, or a
/// lens followed by a plane quantum mirror. Signed in the scene's frame.
fn law_image_distance(s: &Scenario) -> Option<Result<f64>> {
    let optics = |els: &[Element]| -> Vec<Element> {
        els.iter().filter(|e| !matches!(e, Element::Mask(_))).cloned().collect()
    };
    if !optics(&s.idler.elements).is_empty() {
        return None;
    }
    let (lp, ls) = (s.pump.wavelength, s.signal.wavelength);
    let law = match (optics(&s.signal.elements).as_slice(), s.pump.wavefront) {
        ([Element::FreeSpace(a)], wf) => sqm_image_distance(*a, ls, lp, wf.radius()),
        ([Element::FreeSpace(s1), Element::ThinLens(f), Element::FreeSpace(d1)], Wavefront::Plane) => {
            let ratio = match idler_wavelength(lp, ls) {
                Ok(li) => li / ls,
                Err(e) => return Some(Err(e)),
            };
            let image = 1.0 / (1.0 / f - 1.0 / s1);
            if !image.is_finite() {
                Err(Error::ImageAtInfinity)
            } else {
                Ok((image - d1) / ratio)
            }
        }
        _ => return None,
    };
    Some(law.map(|b| match s.idler.frame {
        IdlerFrame::Mirror => b,
        IdlerFrame::Conjugate => -b,
    }))
}

/// Free-space path from the last signal lens (or the object) to the quantum
/// mirror plus the idler path to `b`, with `b` taken in the mirror frame.
fn unfolded_distance(s: &Scenario, b: f64) -> f64 {
    let after_lens: f64 = s
        .signal
        .elements
        .iter()
        .rev()
        .take_while(|e| !matches!(e, Element::ThinLens(_)))
        .map(|e| if let Element::FreeSpace(d) = e { *d } else { 0.0 })
        .sum();
    let idler: f64 = s
        .idler
        .elements
        .iter()
        .map(|e| if let Element::FreeSpace(d) = e { *d } else { 0.0 })
        .sum();
    let b_mirror = match s.idler.frame {
        IdlerFrame::Mirror => b,
        IdlerFrame::Conjugate => -b,
    };
    after_lens + idler + b_mirror
}

fn run_ray(s: &Scenario, c: &mut Collector) -> Result<()> {
    let scene = s.scene();
    let tracer = Tracer::new(RayMode::Paraxial, scene.frame);
    let n = s.run.rays;
    let fan = match s.run.fan {
        Fan::Uniform => ray_fan(&scene, 0.0, n)?,
        Fan::Random => random_fan(&scene, 0.0, n, s.run.seed)?,
    };
    let focus = focus_search(&tracer, &scene, &fan, s.detector.search)?;
    let image = traced_magnification(&scene, s.run.object_offset, n, s.detector.search)?;
    let residual = focus
        .log
        .interactions
        .iter()
        .map(|i| i.momentum_residual())
        .fold(0.0, f64::max);

    c.put("idler_wavelength", idler_wavelength(s.pump.wavelength, s.signal.wavelength)?, "m");
    c.put("image_distance", focus.distance, "m");
    if let Some(law) = law_image_distance(s) {
        let law = law?;
        c.put("image_distance_law", law, "m");
        c.put("image_distance_relative_error", (focus.distance - law).abs() / law.abs(), "");
    }
    c.put("unfolded_distance", unfolded_distance(s, focus.distance), "m");
    c.put("rms_spot", focus.rms_spot, "m");
    c.put("magnification", image.magnification, "");
    c.put("max_momentum_residual", residual, "");
    c.put("max_abs_slope", focus.log.max_abs_slope, "");
    if focus.log.paraxial_warning() {
        c.warnings.push(format!(
            "ray slopes reach {:.3}, beyond the paraxial range",
            focus.log.max_abs_slope
        ));
    }
    let mut table = Table::new(&["distance_m", "rms_spot_m"]);
    for &(z, r) in &focus.profile {
        table.push(vec![z, r]);
    }
    c.data.tables.push(("spot_profile".into(), table));
    Ok(())
}

fn run_wave(s: &Scenario, c: &mut Collector) -> Result<()> {
    let scene = s.scene();
    let coincidence = simulate_scene(&scene, DetectionMode::Coincidence)?;
    let singles_intensity = detect(&coincidence.field.intensity(), &scene.detection, DetectionMode::Singles);
    let singles = fringe_analysis(&singles_intensity, coincidence.field.dx).ok();
    c.warnings.extend(coincidence.warnings.iter().cloned());

    c.put("idler_wavelength", idler_wavelength(s.pump.wavelength, s.signal.wavelength)?, "m");
    c.put("grid_step", coincidence.field.dx, "m");
    c.put("detector_power", coincidence.field.power(), "");
    if let Some(f) = coincidence.fringes {
        c.put("fringe_period", f.period, "m");
        c.put("visibility_coincidence", f.visibility, "");
    }
    if let Some(f) = singles {
        c.put("visibility_singles", f.visibility, "");
    }
    if s.detector.mode == DetectionMode::Singles && singles.is_none() {
        c.warnings.push("no fringes in singles detection".into());
    }

    let field = &coincidence.field;
    let mut table = Table::new(&["x_m", "coincidence", "singles"]);
    for (j, (a, b)) in coincidence.intensity.iter().zip(&singles_intensity).enumerate() {
        table.push(vec![field.x(j), *a, *b]);
    }
    c.data.tables.push(("intensity".into(), table));

    if s.detector.map_depth > 0.0 {
        let d = &s.detector;
        let path: f64 = scene
            .elements
            .iter()
            .map(|e| if let Element::FreeSpace(z) = e { *z } else { 0.0 })
            .sum();
        let planes: Vec<f64> = (0..d.map_planes)
            .map(|j| d.map_depth * j as f64 / (d.map_planes - 1) as f64)
            .collect();
        let rows: Vec<Vec<f64>> = planes
            .par_iter()
            .map(|&z| {
                let p = fresnel_propagate_limited(field, z, path + d.map_depth)?;
                Ok(bin(&p.field.intensity(), d.map_columns))
            })
            .collect::<Result<_>>()?;
        c.data.images.push((
            "intensity_map".into(),
            Image {
                width: d.map_columns,
                height: rows.len(),
                pixels: rows.concat(),
            },
        ));
    }
    Ok(())
}

/// Averages `v` into `columns` contiguous bins.
fn bin(v: &[f64], columns: usize) -> Vec<f64> {
    let n = v.len();
    (0..columns)
        .map(|j| {
            let (a, b) = (j * n / columns, (j + 1) * n / columns);
            v[a..b].iter().sum::<f64>() / (b - a) as f64
        })
        .collect()
}

fn run_visibility(s: &Scenario, c: &mut Collector) -> Result<()> {
    let v = &s.visibility;
    let model = VisibilityModel::new(v.beta, Saturating);
    let ratio = (v.photons_max / v.photons_min).ln();
    let mut table = Table::new(&["mean_photon_number", "occupation", "visibility"]);
    let mut monotone = true;
    let mut last = f64::NEG_INFINITY;
    for j in 0..v.points {
        let n = v.photons_min * (ratio * j as f64 / (v.points - 1) as f64).exp();
        let vis = model.visibility(n);
        monotone &= vis > last;
        last = vis;
        table.push(vec![n, model.occupation(n), vis]);
    }
    c.put("beta", v.beta, "");
    c.put("visibility_at_inverse_beta", model.visibility(1.0 / v.beta), "");
    c.put("visibility_min", model.visibility(v.photons_min), "");
    c.put("visibility_max", model.visibility(v.photons_max), "");
    c.put("decades", (v.photons_max / v.photons_min).log10(), "");
    c.put("strictly_increasing", if monotone { 1.0 } else { 0.0 }, "");
    c.data.tables.push(("visibility".into(), table));
    Ok(())
}

/// `k_s / k_p` from the scan section or the crystal indices.
fn scan_mu(s: &Scenario) -> Result<f64> {
    if let Some(mu) = s.scan.mu {
        return Ok(mu);
    }
    let crystal = s.crystal.as_ref().expect("validated");
    let ks = crystal.n_signal * angular_frequency(s.signal.wavelength)?;
    let kp = crystal.n_pump * angular_frequency(s.pump.wavelength)?;
    Ok(ks / kp)
}

fn run_xi_scan(s: &Scenario, c: &mut Collector) -> Result<()> {
    let sc = &s.scan;
    let mu = scan_mu(s)?;
    let opts = FocusingOptions::with_kernel(sc.kernel);
    let optimum = optimum_focusing(mu, sc.optimize_dk, &opts)?;
    let standard = sc.xi_min == OPTIMUM_XI_MIN && sc.xi_max == OPTIMUM_XI_MAX && sc.points == optimum.profile.len();
    let profile: Vec<FocusSample> = if standard {
        optimum.profile.clone()
    } else {
        scan_xi(mu, sc.xi_min, sc.xi_max, sc.points, sc.optimize_dk, 0.0, &opts)?
    };
    c.put("mu", mu, "");
    c.put("xi_optimum", optimum.xi, "");
    c.put("h_optimum", optimum.h, "");
    c.put("dk_half_b_optimum", optimum.dk_half_b, "");
    c.put("unimodal", if optimum.is_unimodal() { 1.0 } else { 0.0 }, "");
    if sc.optimize_dk {
        let fixed = optimum_focusing(mu, false, &opts)?;
        c.put("xi_optimum_dk0", fixed.xi, "");
        c.put("h_optimum_dk0", fixed.h, "");
    }
    let mut table = Table::new(&["xi", "h", "dk_half_b"]);
    for p in &profile {
        table.push(vec![p.xi, p.h, p.dk_half_b]);
    }
    c.data.tables.push(("xi_scan".into(), table));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_text_excludes_wall_time() {
        let r = RunReport {
            name: "x".into(),
            engine: Engine::Ray,
            version: VERSION.into(),
            seed: 3,
            wall_time: 1.25,
            quantities: vec![Quantity {
                name: "b".into(),
                value: 0.5,
                unit: "m".into(),
            }],
            warnings: vec![],
        };
        assert!(!r.text().contains("wall"));
        assert!(r.text().contains("b = 5.0000000000000000e-1 m"));
        assert!(r.summary().contains("wall_time"));
    }

    #[test]
    fn finiteness_sweep() {
        let mut r = RunReport {
            name: "x".into(),
            engine: Engine::Dfg,
            version: VERSION.into(),
            seed: 0,
            wall_time: 0.0,
            quantities: vec![],
            warnings: vec![],
        };
        assert!(r.check_finite().is_ok());
        r.quantities.push(Quantity {
            name: "h".into(),
            value: f64::NAN,
            unit: String::new(),
        });
        assert!(matches!(r.check_finite(), Err(Error::NonFinite(_))));
    }

    #[test]
    fn binning_averages() {
        assert_eq!(bin(&[1.0, 3.0, 5.0, 7.0], 2), vec![2.0, 6.0]);
    }

    #[test]
    fn pool_installs() {
        let n = with_threads(Some(2), rayon::current_num_threads).unwrap();
        assert_eq!(n, 2);
    }
}
