//! Fringe period and visibility from a sampled intensity profile.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeReport {
    /// Mean spacing of neighbouring minima, m.
    pub period: f64,
    pub visibility: f64,
    pub i_max: f64,
    pub i_min: f64,
}

/// Extrema must stand out from their neighbourhood by this fraction of the
/// window's intensity range to count.
const PROMINENCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Extremum {
    position: f64,
    value: f64,
    is_max: bool,
}

/// Analyses the central half of `intensity` (sample spacing `dx`).
///
/// Extrema are found by hysteresis, so ripple smaller than 2% of the local
/// range is ignored; positions and values are refined with a three-point
/// parabola. The period is the mean spacing of consecutive minima (of maxima
/// when fewer than two minima are present): under a slowly varying envelope
/// the crests are pulled towards the envelope peak while the troughs stay on
/// the zeros of the carrier. The visibility uses the largest maximum and the
/// smallest minimum.
pub fn fringe_analysis(intensity: &[f64], dx: f64) -> Result<FringeReport> {
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::InvalidInput(format!("sample spacing must be positive, got {dx}")));
    }
    let n = intensity.len();
    let lo = n / 4;
    let hi = (3 * n).div_ceil(4).min(n);
    let window = &intensity[lo..hi];
    let extrema = find_extrema(window);
    if extrema.len() < 3 {
        return Err(Error::NoFringes {
            extrema: extrema.len(),
        });
    }
    let refined: Vec<Extremum> = extrema
        .iter()
        .map(|&(i, is_max)| refine(window, i, is_max))
        .collect();

    let spacing = |is_max: bool| -> Option<f64> {
        let pos: Vec<f64> = refined.iter().filter(|e| e.is_max == is_max).map(|e| e.position).collect();
        (pos.len() >= 2).then(|| (pos[pos.len() - 1] - pos[0]) / (pos.len() - 1) as f64)
    };
    let period_samples = spacing(false)
        .or_else(|| spacing(true))
        .ok_or(Error::NoFringes {
            extrema: refined.len(),
        })?;

    let i_max = refined
        .iter()
        .filter(|e| e.is_max)
        .map(|e| e.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let i_min = refined
        .iter()
        .filter(|e| !e.is_max)
        .map(|e| e.value)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let visibility = if i_max + i_min > 0.0 {
        ((i_max - i_min) / (i_max + i_min)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(FringeReport {
        period: period_samples * dx,
        visibility,
        i_max,
        i_min,
    })
}

/// Alternating maxima and minima by hysteresis on the window range.
fn find_extrema(v: &[f64]) -> Vec<(usize, bool)> {
    if v.len() < 3 {
        return Vec::new();
    }
    let (min, max) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let threshold = PROMINENCE * (max - min);
    if !(threshold > 0.0) {
        return Vec::new();
    }
    let mut out = Vec::new();
    // direction: None until the first excursion, then Some(rising)
    let mut rising: Option<bool> = None;
    let mut hi_idx = 0;
    let mut lo_idx = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[hi_idx] {
            hi_idx = i;
        }
        if x < v[lo_idx] {
            lo_idx = i;
        }
        match rising {
            None => {
                if v[hi_idx] - x > threshold {
                    // an interior max only if the signal rose into it
                    if hi_idx > 0 && v[hi_idx] - v[..hi_idx].iter().cloned().fold(f64::INFINITY, f64::min) > threshold {
                        out.push((hi_idx, true));
                    }
                    rising = Some(false);
                    lo_idx = i;
                } else if x - v[lo_idx] > threshold {
                    if lo_idx > 0 && v[..lo_idx].iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v[lo_idx] > threshold {
                        out.push((lo_idx, false));
                    }
                    rising = Some(true);
                    hi_idx = i;
                }
            }
            Some(true) => {
                if v[hi_idx] - x > threshold {
                    out.push((hi_idx, true));
                    rising = Some(false);
                    lo_idx = i;
                }
            }
            Some(false) => {
                if x - v[lo_idx] > threshold {
                    out.push((lo_idx, false));
                    rising = Some(true);
                    hi_idx = i;
                }
            }
        }
    }
    out
}

fn refine(v: &[f64], i: usize, is_max: bool) -> Extremum {
    if i == 0 || i + 1 >= v.len() {
        return Extremum {
            position: i as f64,
            value: v[i],
            is_max,
        };
    }
    let (a, b, c) = (v[i - 1], v[i], v[i + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 {
        (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Extremum {
        position: i as f64 + shift,
        value: b - 0.25 * (a - c) * shift,
        is_max,
    }
}
