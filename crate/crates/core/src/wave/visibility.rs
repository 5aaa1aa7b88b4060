//! Visibility of stimulated ghost interference against the seed occupation.

/// Fitted occupation per mean seed photon number.
pub const BETA_FIT: f64 = 7.74e-7;

/// Maps the stimulated occupation `N` to a fringe visibility.
pub trait VisibilityCurve: Send + Sync {
    fn visibility(&self, occupation: f64) -> f64;
}

/// `V = N/(N+1)`: stimulated emission scaling with `N` on top of a
/// spontaneous floor of one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Saturating;

impl VisibilityCurve for Saturating {
    fn visibility(&self, occupation: f64) -> f64 {
        occupation / (occupation + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityModel<C = Saturating> {
    pub beta: f64,
    pub curve: C,
}

impl Default for VisibilityModel {
    fn default() -> Self {
        Self {
            beta: BETA_FIT,
            curve: Saturating,
        }
    }
}

impl<C: VisibilityCurve> VisibilityModel<C> {
    pub fn new(beta: f64, curve: C) -> Self {
        Self { beta, curve }
    }

    /// `N = beta <n>`.
    pub fn occupation(&self, mean_photon: f64) -> f64 {
        self.beta * mean_photon
    }

    pub fn visibility(&self, mean_photon: f64) -> f64 {
        self.curve.visibility(self.occupation(mean_photon))
    }
}

/// Visibility at mean seed photon number `mean_photon` under the default curve.
pub fn visibility_vs_occupation(mean_photon: f64, beta: f64) -> f64 {
    VisibilityModel::new(beta, Saturating).visibility(mean_photon)
}
