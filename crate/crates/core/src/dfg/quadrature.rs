//! Globally adaptive 15-point Gauss-Kronrod quadrature for complex integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the embedded 7-point Gauss nodes.
// Tabulated to 36 digits, as published.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Integral value with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
    pub max_segments: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            relative: 1e-8,
            absolute: 1e-14,
            max_segments: 500,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    est: Estimate,
}

/// One Kronrod panel. `f` returns the integrand together with the absolute
/// error it already carries (non-zero when it is itself a quadrature); that
/// error is integrated with the Kronrod weights and added to the rule error.
fn panel<F>(f: &mut F, a: f64, b: f64) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<Estimate>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc.value * WGK[7];
    let mut gauss = fc.value * WG[3];
    let mut carried = fc.error * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let lo = f(center - dx)?;
        let hi = f(center + dx)?;
        let sum = lo.value + hi.value;
        kronrod += sum * WGK[j];
        carried += (lo.error + hi.error) * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }
    Ok(Estimate {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm() + carried * half.abs(),
    })
}

/// Adaptive integral of `f` over `[a, b]`, bisecting the worst panel until the
/// summed error estimate drops below `max(absolute, relative * |I|)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: &Tolerance) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<Estimate>,
{
    let mut segments = vec![Segment {
        a,
        b,
        est: panel(&mut f, a, b)?,
    }];
    loop {
        let value: Complex64 = segments.iter().map(|s| s.est.value).sum();
        let error: f64 = segments.iter().map(|s| s.est.error).sum();
        let target = tol.absolute.max(tol.relative * value.norm());
        if error <= target {
            return Ok(Estimate { value, error });
        }
        if segments.len() >= tol.max_segments {
            return Err(Error::QuadratureFailure {
                estimate: error,
                tolerance: target,
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.est.error.total_cmp(&y.1.est.error))
            .map(|(i, _)| i)
            .expect("at least one segment");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if mid <= s.a || mid >= s.b {
            return Err(Error::QuadratureFailure {
                estimate: error,
                tolerance: target,
            });
        }
        segments.push(Segment {
            a: s.a,
            b: mid,
            est: panel(&mut f, s.a, mid)?,
        });
        segments.push(Segment {
            a: mid,
            b: s.b,
            est: panel(&mut f, mid, s.b)?,
        });
    }
}

/// Shorthand for integrands that carry no error of their own.
pub fn exact(value: Complex64) -> Result<Estimate> {
    Ok(Estimate { value, error: 0.0 })
}
