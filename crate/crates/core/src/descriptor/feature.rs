use crate::error::{Error, Result};
use crate::phasecong::{build_log_gabor_bank, fold_degrees, phase_features, FilterBankParams, PCParams};
use crate::raster::Image;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMode {
    PhaseCongruency,
    Gradient,
}

/// Phase-congruency settings used when `FeatureMode::PhaseCongruency` is
/// selected.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureParams {
    pub bank: FilterBankParams,
    pub pc: PCParams,
}

/// Per-pixel feature amplitude and folded orientation (degrees, `[0, 180)`).
#[derive(Debug, Clone)]
pub struct FeatureField<T> {
    pub amplitude: Image<T>,
    pub orientation: Image<T>,
    pub mode: FeatureMode,
}

impl<T: Real> FeatureField<T> {
    pub fn new(amplitude: Image<T>, orientation: Image<T>, mode: FeatureMode) -> Result<Self> {
        if amplitude.dims() != orientation.dims() {
            return Err(Error::DimensionMismatch("amplitude vs orientation".into()));
        }
        let orientation = orientation.map(fold_degrees);
        Ok(Self {
            amplitude,
            orientation,
            mode,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.amplitude.dims()
    }
}

pub fn compute_feature_field<T: Real>(
    img: &Image<T>,
    mode: FeatureMode,
    params: &FeatureParams,
) -> Result<FeatureField<T>> {
    match mode {
        FeatureMode::Gradient => Ok(gradient_field(img)),
        FeatureMode::PhaseCongruency => {
            let (w, h) = img.dims();
            let bank = build_log_gabor_bank(w, h, &params.bank)?;
            let (pc, orient) = phase_features(img, &bank, &params.pc)?;
            FeatureField::new(pc.amplitude, orient.folded(), mode)
        }
    }
}

/// Central-difference gradient magnitude and folded direction; one-sided
/// differences on the image border.
pub fn gradient_field<T: Real>(img: &Image<T>) -> FeatureField<T> {
    let (w, h) = img.dims();
    let half = T::lit(0.5);
    let diff = |lo: T, hi: T, span: usize| -> T {
        if span == 2 {
            (hi - lo) * half
        } else if span == 1 {
            hi - lo
        } else {
            T::zero()
        }
    };
    let mut amp = Image::zeros(w, h);
    let mut ori = Image::zeros(w, h);
    for y in 0..h {
        let (ya, yb) = (y.saturating_sub(1), (y + 1).min(h - 1));
        for x in 0..w {
            let (xa, xb) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let gx = diff(img.get(xa, y), img.get(xb, y), xb - xa);
            let gy = diff(img.get(x, ya), img.get(x, yb), yb - ya);
            amp.set(x, y, gx.hypot(gy));
            ori.set(x, y, fold_degrees(gy.atan2(gx).to_degrees()));
        }
    }
    FeatureField {
        amplitude: amp,
        orientation: ori,
        mode: FeatureMode::Gradient,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_gradient() {
        let w = 32;
        let img = Image::from_fn(w, 16, |x, _| x as f64 / w as f64);
        let f = gradient_field(&img);
        for y in 1..15 {
            for x in 1..w - 1 {
                assert!((f.amplitude.get(x, y) - 1.0 / w as f64).abs() < 1e-15);
                assert_eq!(f.orientation.get(x, y), 0.0);
            }
        }
    }

    #[test]
    fn vertical_ramp_is_ninety_degrees() {
        let img = Image::from_fn(8, 8, |_, y| 0.1 * y as f64);
        let f = gradient_field(&img);
        assert!((f.orientation.get(4, 4) - 90.0).abs() < 1e-12);
        // a decreasing ramp folds onto the same orientation
        let f = gradient_field(&img.map(|v| 1.0 - v));
        assert!((f.orientation.get(4, 4) - 90.0).abs() < 1e-12);
    }

    #[test]
    fn constant_image_pc_is_zero() {
        let img = Image::filled(64, 48, 0.37f64);
        let f = compute_feature_field(&img, FeatureMode::PhaseCongruency, &FeatureParams::default()).unwrap();
        let max = f.amplitude.min_max().1;
        assert!(max < 1e-12, "max pc {max}");
    }
}
