use crate::error::{Error, Result};
use crate::raster::{Homography, Point2};
use nalgebra::{DMatrix, Matrix3};

/// Least-squares projective model with per-point residuals.
#[derive(Debug, Clone)]
pub struct ProjectiveFit {
    pub homography: Homography,
    /// Euclidean distance between the mapped master point and the slave point.
    pub residuals: Vec<f64>,
    pub rmse: f64,
}

/// Similarity transform moving the centroid to the origin with mean distance sqrt(2).
fn normalizer(pts: &[Point2]) -> Option<Matrix3<f64>> {
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let mean_d = pts.iter().map(|p| (p.x - cx).hypot(p.y - cy)).sum::<f64>() / n;
    if !(mean_d > 1e-12) {
        return None;
    }
    let s = std::f64::consts::SQRT_2 / mean_d;
    Some(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

fn apply3(m: &Matrix3<f64>, p: Point2) -> (f64, f64) {
    let v = m * nalgebra::Vector3::new(p.x, p.y, 1.0);
    (v.x / v.z, v.y / v.z)
}

/// Normalized direct linear transform over all pairs, mapping `master` to
/// `slave`.
pub fn fit_projective(master: &[Point2], slave: &[Point2]) -> Result<ProjectiveFit> {
    let n = master.len();
    if slave.len() != n {
        return Err(Error::LengthMismatch(n, slave.len()));
    }
    if n < 4 {
        return Err(Error::InsufficientPoints { needed: 4, got: n });
    }
    let tm = normalizer(master).ok_or(Error::DegenerateConfiguration)?;
    let ts = normalizer(slave).ok_or(Error::DegenerateConfiguration)?;
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (&pm, &ps)) in master.iter().zip(slave).enumerate() {
        let (x, y) = apply3(&tm, pm);
        let (u, v) = apply3(&ts, ps);
        let r0 = 2 * i;
        let r1 = r0 + 1;
        a[(r0, 0)] = -x;
        a[(r0, 1)] = -y;
        a[(r0, 2)] = -1.0;
        a[(r0, 6)] = u * x;
        a[(r0, 7)] = u * y;
        a[(r0, 8)] = u;
        a[(r1, 3)] = -x;
        a[(r1, 4)] = -y;
        a[(r1, 5)] = -1.0;
        a[(r1, 6)] = v * x;
        a[(r1, 7)] = v * y;
        a[(r1, 8)] = v;
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::DegenerateConfiguration)?;
    // singular values are not sorted by nalgebra
    let mut order: Vec<usize> = (0..9).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let largest = svd.singular_values[order[0]];
    let second_smallest = svd.singular_values[order[7]];
    if !(second_smallest > 1e-10 * largest) {
        return Err(Error::DegenerateConfiguration);
    }
    let h = v_t.row(order[8]);
    let hn = Matrix3::from_row_slice(&h.iter().copied().collect::<Vec<_>>());
    let ts_inv = ts.try_inverse().ok_or(Error::DegenerateConfiguration)?;
    let homography = Homography::from_matrix(ts_inv * hn * tm)?;
    let residuals = residuals(&homography, master, slave);
    let rmse = rms(&residuals);
    Ok(ProjectiveFit {
        homography,
        residuals,
        rmse,
    })
}

pub fn residuals(h: &Homography, master: &[Point2], slave: &[Point2]) -> Vec<f64> {
    master
        .iter()
        .zip(slave)
        .map(|(&m, &s)| h.apply(m).map(|q| q.distance(s)).unwrap_or(f64::INFINITY))
        .collect()
}

pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|r| r * r).sum::<f64>() / values.len() as f64).sqrt()
}

/// Least-squares affine map `master -> slave`, as a homography with a unit
/// bottom row.
pub fn fit_affine(master: &[Point2], slave: &[Point2]) -> Result<Homography> {
    let n = master.len();
    if n < 3 || slave.len() != n {
        return Err(Error::InsufficientPoints { needed: 3, got: n.min(slave.len()) });
    }
    let mut a = DMatrix::<f64>::zeros(n, 3);
    let mut bx = DMatrix::<f64>::zeros(n, 1);
    let mut by = DMatrix::<f64>::zeros(n, 1);
    for (i, (m, s)) in master.iter().zip(slave).enumerate() {
        a[(i, 0)] = 1.0;
        a[(i, 1)] = m.x;
        a[(i, 2)] = m.y;
        bx[(i, 0)] = s.x;
        by[(i, 0)] = s.y;
    }
    let svd = a.svd(true, true);
    let cx = svd.solve(&bx, 1e-12).map_err(|_| Error::DegenerateConfiguration)?;
    let cy = svd.solve(&by, 1e-12).map_err(|_| Error::DegenerateConfiguration)?;
    Homography::affine([cx[0], cx[1], cx[2]], [cy[0], cy[1], cy[2]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_h() -> Homography {
        Homography::from_row_major([1.02, 0.03, 4.0, -0.02, 0.98, -3.0, 1e-5, -2e-5, 1.0]).unwrap()
    }

    #[test]
    fn exact_four_points() {
        let h = sample_h();
        let m = [
            Point2::new(0.0, 0.0),
            Point2::new(100.0, 0.0),
            Point2::new(100.0, 80.0),
            Point2::new(0.0, 80.0),
        ];
        let s: Vec<Point2> = m.iter().map(|&p| h.apply(p).unwrap()).collect();
        let fit = fit_projective(&m, &s).unwrap();
        assert!(fit.residuals.iter().all(|&r| r < 1e-9));
        let a = fit.homography.to_row_major();
        let b = h.to_row_major();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn too_few_and_collinear() {
        let m = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(2.0, 1.0)];
        assert!(matches!(
            fit_projective(&m, &m),
            Err(Error::InsufficientPoints { needed: 4, got: 3 })
        ));
        let line: Vec<Point2> = (0..6).map(|i| Point2::new(i as f64, 2.0 * i as f64)).collect();
        assert!(matches!(
            fit_projective(&line, &line),
            Err(Error::DegenerateConfiguration)
        ));
    }

    #[test]
    fn affine_fit_is_exact_on_affine_data() {
        let m = [Point2::new(0.0, 0.0), Point2::new(10.0, 0.0), Point2::new(0.0, 10.0), Point2::new(7.0, 3.0)];
        let s: Vec<Point2> = m.iter().map(|p| Point2::new(1.0 + 2.0 * p.x, -3.0 + p.x + p.y)).collect();
        let h = fit_affine(&m, &s).unwrap();
        for (a, b) in m.iter().zip(&s) {
            assert!(h.apply(*a).unwrap().distance(*b) < 1e-9);
        }
    }
}
