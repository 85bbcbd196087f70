use crate::descriptor::TemplateDescriptor;
use crate::error::{Error, Result};
use crate::scalar::Real;

const VARIANCE_FLOOR: f64 = 1e-12;

/// Correlation score; `degenerate` marks a zero-variance input, in which
/// case `score` is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub score: f64,
    pub degenerate: bool,
}

/// Normalized correlation coefficient (Pearson) of two equal-length sequences.
pub fn ncc<T: Real>(a: &[T], b: &[T]) -> Result<Correlation> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParams("ncc needs at least two samples".into()));
    }
    let n = a.len() as f64;
    let mean_a = a.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let mean_b = b.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let da = x.as_f64() - mean_a;
        let db = y.as_f64() - mean_b;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa / n < VARIANCE_FLOOR || sbb / n < VARIANCE_FLOOR {
        return Ok(Correlation {
            score: 0.0,
            degenerate: true,
        });
    }
    Ok(Correlation {
        score: (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

#[inline]
fn bin_of(v: f64, bins: usize) -> usize {
    ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1)
}

/// Mutual information in bits from a `bins x bins` joint histogram over
/// `[0, 1]^2`. Values outside `[0, 1]` are clamped into the edge bins.
pub fn mi<T: Real>(a: &[T], b: &[T], bins: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if bins < 2 {
        return Err(Error::InvalidParams("mi needs at least two bins".into()));
    }
    let ia: Vec<u16> = a.iter().map(|v| bin_of(v.as_f64(), bins) as u16).collect();
    let ib: Vec<u16> = b.iter().map(|v| bin_of(v.as_f64(), bins) as u16).collect();
    let mut scratch = MiScratch::new(bins);
    Ok(scratch.mi_binned(&ia, &ib))
}

/// Reusable histogram buffers for mutual information on pre-binned samples.
pub(crate) struct MiScratch {
    bins: usize,
    joint: Vec<u32>,
    pa: Vec<u32>,
    pb: Vec<u32>,
}

impl MiScratch {
    pub fn new(bins: usize) -> Self {
        Self {
            bins,
            joint: vec![0; bins * bins],
            pa: vec![0; bins],
            pb: vec![0; bins],
        }
    }

    pub fn quantize<T: Real>(&self, v: T) -> u16 {
        bin_of(v.as_f64(), self.bins) as u16
    }

    pub fn mi_binned(&mut self, a: &[u16], b: &[u16]) -> f64 {
        let bins = self.bins;
        self.joint.iter_mut().for_each(|v| *v = 0);
        self.pa.iter_mut().for_each(|v| *v = 0);
        self.pb.iter_mut().for_each(|v| *v = 0);
        for (&x, &y) in a.iter().zip(b) {
            self.joint[x as usize * bins + y as usize] += 1;
            self.pa[x as usize] += 1;
            self.pb[y as usize] += 1;
        }
        let n = a.len() as f64;
        if n == 0.0 {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..bins {
            if self.pa[i] == 0 {
                continue;
            }
            for j in 0..bins {
                let c = self.joint[i * bins + j];
                if c == 0 {
                    continue;
                }
                let pij = c as f64 / n;
                let pi = self.pa[i] as f64 / n;
                let pj = self.pb[j] as f64 / n;
                total += pij * (pij / (pi * pj)).log2();
            }
        }
        total.max(0.0)
    }
}

/// Correlation of two template descriptors (HOPC_ncc or HOG_ncc depending on
/// the features they were built from).
pub fn descriptor_ncc<T: Real>(a: &TemplateDescriptor<T>, b: &TemplateDescriptor<T>) -> Result<Correlation> {
    if !a.same_layout(b) {
        return Err(Error::GeometryMismatch);
    }
    ncc(&a.values, &b.values)
}
