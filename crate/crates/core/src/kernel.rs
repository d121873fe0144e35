//! Compact-support sparse kernel.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    /// Support radius ℓ in meters.
    pub length_scale: f64,
    /// Peak value σ0 at zero distance.
    pub signal_scale: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self {
            length_scale: 0.3,
            signal_scale: 1.0,
        }
    }
}

impl KernelParams {
    pub fn new(length_scale: f64, signal_scale: f64) -> Result<Self> {
        let p = Self {
            length_scale,
            signal_scale,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_scale.is_finite() && self.length_scale > 0.0) {
            return Err(Error::validation(format!(
                "length_scale = {} must be finite and > 0",
                self.length_scale
            )));
        }
        if !(self.signal_scale.is_finite() && self.signal_scale > 0.0) {
            return Err(Error::validation(format!(
                "signal_scale = {} must be finite and > 0",
                self.signal_scale
            )));
        }
        Ok(())
    }

    /// Distance beyond which the kernel is exactly zero.
    pub fn support_radius(&self) -> f64 {
        self.length_scale
    }

    /// Kernel value at distance `d`, without input checks.
    ///
    /// σ0·[(2 + cos 2πr)(1 − r)/3 + sin(2πr)/2π] for r = d/ℓ < 1, else 0.
    #[inline]
    pub fn eval_unchecked(&self, d: f64) -> f64 {
        if d >= self.length_scale {
            return 0.0;
        }
        let r = d / self.length_scale;
        let t = 2.0 * PI * r;
        let v = (2.0 + t.cos()) * (1.0 - r) / 3.0 + t.sin() / (2.0 * PI);
        // the bracket is non-negative in exact arithmetic; rounding near r = 1
        // can push it a hair below zero
        self.signal_scale * v.max(0.0)
    }
}

/// Kernel weight of a measurement at distance `d` meters.
pub fn sparse_kernel(d: f64, params: &KernelParams) -> Result<f64> {
    if !d.is_finite() || d < 0.0 {
        return Err(Error::validation(format!(
            "distance {d} must be finite and >= 0"
        )));
    }
    Ok(params.eval_unchecked(d))
}

pub fn support_radius(params: &KernelParams) -> f64 {
    params.support_radius()
}
