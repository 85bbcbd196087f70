use crate::error::{Error, Result};
use crate::fft::bin_frequency;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Log-Gabor filter bank design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterBankParams {
    pub n_scales: usize,
    pub n_orients: usize,
    /// Wavelength of the smallest-scale filter, pixels.
    pub min_wavelength: f64,
    /// Ratio between successive center wavelengths.
    pub scale_mult: f64,
    /// Ratio of the radial bandwidth parameter to the center frequency.
    pub sigma_ratio: f64,
    /// Angular spread multiplier; the angular std is `0.5 * (pi / n_orients) * angular_overlap`.
    pub angular_overlap: f64,
    pub dc_zeroed: bool,
}

impl Default for FilterBankParams {
    fn default() -> Self {
        Self {
            n_scales: 4,
            n_orients: 6,
            min_wavelength: 3.0,
            scale_mult: 2.1,
            sigma_ratio: 0.55,
            angular_overlap: 1.2,
            dc_zeroed: true,
        }
    }
}

impl FilterBankParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.n_scales < 1 {
            return bad("n_scales must be >= 1");
        }
        if self.n_orients < 1 {
            return bad("n_orients must be >= 1");
        }
        if !(self.min_wavelength >= 2.0) {
            return bad("min_wavelength must be >= 2");
        }
        if !(self.scale_mult > 1.0) {
            return bad("scale_mult must be > 1");
        }
        if !(self.sigma_ratio > 0.0 && self.sigma_ratio < 1.0) {
            return bad("sigma_ratio must lie in (0, 1)");
        }
        if !(self.angular_overlap > 0.0) {
            return bad("angular_overlap must be > 0");
        }
        Ok(())
    }

    /// Center frequency (cycles/pixel) of scale `n` (zero-based).
    pub fn center_frequency(&self, n: usize) -> f64 {
        1.0 / (self.min_wavelength * self.scale_mult.powi(n as i32))
    }

    /// Filter orientation `o` (zero-based), radians in `[0, pi)`.
    pub fn orientation_angle(&self, o: usize) -> f64 {
        o as f64 * PI / self.n_orients as f64
    }

    pub fn angular_sigma(&self) -> f64 {
        0.5 * (PI / self.n_orients as f64) * self.angular_overlap
    }

    /// Width of the border strip corrupted by circular convolution wrap-around.
    pub fn border_margin(&self) -> usize {
        let longest = self.min_wavelength * self.scale_mult.powi(self.n_scales as i32 - 1);
        (longest / 2.0).ceil() as usize
    }

    /// Sum of relative scale gains `sum_n (1/scale_mult)^n`.
    pub fn scale_gain_sum(&self) -> f64 {
        let r = 1.0 / self.scale_mult;
        (1.0 - r.powi(self.n_scales as i32)) / (1.0 - r)
    }
}

/// Radial log-Gabor transfer `exp(-ln(w/w0)^2 / (2 ln(sigma_ratio)^2))`.
pub fn radial_gain(omega: f64, omega0: f64, sigma_ratio: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let num = (omega / omega0).ln();
    let den = sigma_ratio.ln();
    (-(num * num) / (2.0 * den * den)).exp()
}

/// Frequency-domain filter set for one image size.
///
/// Radial and angular components are stored separately; the transfer of
/// filter `(n, o)` is their product.
#[derive(Debug, Clone)]
pub struct LogGaborBank<T> {
    width: usize,
    height: usize,
    params: FilterBankParams,
    radial: Vec<Vec<T>>,
    angular: Vec<Vec<T>>,
}

pub fn build_log_gabor_bank<T: Real>(
    width: usize,
    height: usize,
    params: &FilterBankParams,
) -> Result<LogGaborBank<T>> {
    params.validate()?;
    if width == 0 || height == 0 {
        return Err(Error::ZeroDimensions);
    }
    let n = width * height;
    let mut radius = Vec::with_capacity(n);
    let mut theta = Vec::with_capacity(n);
    for y in 0..height {
        let v = bin_frequency(y, height);
        for x in 0..width {
            let u = bin_frequency(x, width);
            radius.push(u.hypot(v));
            theta.push(v.atan2(u));
        }
    }

    let radial = (0..params.n_scales)
        .map(|s| {
            let w0 = params.center_frequency(s);
            radius
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    if i == 0 && params.dc_zeroed {
                        T::zero()
                    } else {
                        T::lit(radial_gain(r, w0, params.sigma_ratio))
                    }
                })
                .collect()
        })
        .collect();

    let sigma = params.angular_sigma();
    let angular = (0..params.n_orients)
        .map(|o| {
            let (sin_o, cos_o) = params.orientation_angle(o).sin_cos();
            theta
                .iter()
                .map(|&t| {
                    let (sin_t, cos_t) = t.sin_cos();
                    let ds = sin_t * cos_o - cos_t * sin_o;
                    let dc = cos_t * cos_o + sin_t * sin_o;
                    let d = ds.atan2(dc).abs();
                    T::lit((-(d * d) / (2.0 * sigma * sigma)).exp())
                })
                .collect()
        })
        .collect();

    Ok(LogGaborBank {
        width,
        height,
        params: *params,
        radial,
        angular,
    })
}

impl<T: Real> LogGaborBank<T> {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn params(&self) -> &FilterBankParams {
        &self.params
    }

    pub fn radial(&self, scale: usize) -> &[T] {
        &self.radial[scale]
    }

    pub fn angular(&self, orient: usize) -> &[T] {
        &self.angular[orient]
    }

    /// Full transfer function of filter `(scale, orient)`.
    pub fn transfer(&self, scale: usize, orient: usize) -> Vec<T> {
        self.radial[scale]
            .iter()
            .zip(&self.angular[orient])
            .map(|(&r, &a)| r * a)
            .collect()
    }
}
