use crate::error::{Error, Result};
use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Ncc,
    Mi,
    HogNcc,
    HopcNcc,
}

impl MetricKind {
    pub const ALL: [MetricKind; 4] = [Self::Ncc, Self::Mi, Self::HogNcc, Self::HopcNcc];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ncc => "ncc",
            Self::Mi => "mi",
            Self::HogNcc => "hogncc",
            Self::HopcNcc => "hopcncc",
        }
    }

    pub fn uses_descriptor(&self) -> bool {
        matches!(self, Self::HogNcc | Self::HopcNcc)
    }
}

impl std::fmt::Display for MetricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParams(format!("unknown metric {s:?}")))
    }
}

/// Scores over the integer offsets `[-r, r]^2` of a search square,
/// stored row-major by `(dy, dx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilaritySurface {
    pub radius: usize,
    pub metric: MetricKind,
    pub scores: Vec<f64>,
}

/// Integer peak of a surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Peak {
    pub dx: isize,
    pub dy: isize,
    pub at_boundary: bool,
}

impl SimilaritySurface {
    pub fn new(radius: usize, metric: MetricKind, scores: Vec<f64>) -> Result<Self> {
        let side = 2 * radius + 1;
        if scores.len() != side * side {
            return Err(Error::LengthMismatch(scores.len(), side * side));
        }
        Ok(Self {
            radius,
            metric,
            scores,
        })
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn get(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        self.scores[((dy + r) as usize) * self.side() + (dx + r) as usize]
    }

    /// Highest score; ties go to the smallest offset magnitude, then to
    /// row-major order.
    pub fn argmax(&self) -> Result<Peak> {
        let first = self.scores[0];
        if self.scores.iter().all(|&s| s == first) {
            return Err(Error::DegenerateSurface);
        }
        let r = self.radius as isize;
        let mut best: Option<(f64, isize, isize)> = None;
        for dy in -r..=r {
            for dx in -r..=r {
                let s = self.get(dx, dy);
                if s.is_nan() {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bs, bx, by)) => s > bs || (s == bs && dx * dx + dy * dy < bx * bx + by * by),
                };
                if better {
                    best = Some((s, dx, dy));
                }
            }
        }
        let (_, dx, dy) = best.ok_or(Error::DegenerateSurface)?;
        Ok(Peak {
            dx,
            dy,
            at_boundary: dx.abs() == r || dy.abs() == r,
        })
    }

    /// Subpixel correction around an interior integer peak; `None` when the
    /// fitted quadratic has no maximum within one pixel.
    pub fn subpixel_peak(&self, peak: Peak) -> Option<(f64, f64)> {
        if peak.at_boundary {
            return None;
        }
        let mut z = [0.0; 9];
        for (k, v) in z.iter_mut().enumerate() {
            let (ox, oy) = ((k % 3) as isize - 1, (k / 3) as isize - 1);
            *v = self.get(peak.dx + ox, peak.dy + oy);
        }
        fit_quadratic_peak(&z)
    }
}

/// Least-squares fit of `f = a x^2 + b y^2 + c xy + d x + e y + f0` to a 3x3
/// neighborhood (row-major, offsets -1..=1) and its stationary point.
pub fn fit_quadratic_peak(z: &[f64; 9]) -> Option<(f64, f64)> {
    let mut design = SMatrix::<f64, 9, 6>::zeros();
    for k in 0..9 {
        let x = (k % 3) as f64 - 1.0;
        let y = (k / 3) as f64 - 1.0;
        let row = [x * x, y * y, x * y, x, y, 1.0];
        for (c, v) in row.into_iter().enumerate() {
            design[(k, c)] = v;
        }
    }
    let rhs = SVector::<f64, 9>::from_column_slice(z);
    let normal = design.transpose() * design;
    let coef = normal.cholesky()?.solve(&(design.transpose() * rhs));
    let (a, b, c, d, e) = (coef[0], coef[1], coef[2], coef[3], coef[4]);
    // Hessian [[2a, c], [c, 2b]] must be negative definite
    let det = 4.0 * a * b - c * c;
    if !(a < 0.0 && det > 0.0) {
        return None;
    }
    let x = (c * e - 2.0 * b * d) / det;
    let y = (c * d - 2.0 * a * e) / det;
    if !(x.is_finite() && y.is_finite()) || x.hypot(y) > 1.0 {
        return None;
    }
    Some((x, y))
}
