use super::projective::{fit_affine, fit_projective};
use crate::error::{Error, Result};
use crate::raster::{Homography, Image, Point2};
use crate::scalar::Real;
use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use spade::handles::FixedFaceHandle;
use spade::{DelaunayTriangulation, HasPosition, PositionInTriangulation, Triangulation};

#[derive(Debug, Clone, Copy)]
struct Vertex {
    master: Point2,
    slave: Point2,
}

impl HasPosition for Vertex {
    type Scalar = f64;

    fn position(&self) -> spade::Point2<f64> {
        spade::Point2::new(self.master.x, self.master.y)
    }
}

/// Affine map of one triangle: `x' = a0 + a1 x + a2 y`, `y' = b0 + b1 x + b2 y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleAffine {
    pub vertices: [Point2; 3],
    pub a: [f64; 3],
    pub b: [f64; 3],
}

impl TriangleAffine {
    pub fn apply(&self, p: Point2) -> Point2 {
        Point2::new(
            self.a[0] + self.a[1] * p.x + self.a[2] * p.y,
            self.b[0] + self.b[1] * p.x + self.b[2] * p.y,
        )
    }
}

fn solve_affine(master: [Point2; 3], slave: [Point2; 3]) -> Result<([f64; 3], [f64; 3])> {
    let m = Matrix3::from_fn(|r, c| match c {
        0 => 1.0,
        1 => master[r].x,
        _ => master[r].y,
    });
    let lu = m.lu();
    let xs = Vector3::new(slave[0].x, slave[1].x, slave[2].x);
    let ys = Vector3::new(slave[0].y, slave[1].y, slave[2].y);
    let a = lu.solve(&xs).ok_or(Error::DegenerateConfiguration)?;
    let b = lu.solve(&ys).ok_or(Error::DegenerateConfiguration)?;
    Ok(([a[0], a[1], a[2]], [b[0], b[1], b[2]]))
}

/// Where a query point was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Triangle(usize),
    Vertex,
    Outside,
}

/// Master-to-slave mapping made of one affine per Delaunay triangle of the
/// master control points, with a global fallback outside their hull.
#[derive(Debug, Clone)]
pub struct PiecewiseLinearTransform {
    tri: DelaunayTriangulation<Vertex>,
    triangles: Vec<TriangleAffine>,
    /// Spade face index to position in `triangles`.
    face_slot: Vec<usize>,
    fallback: Homography,
}

impl PiecewiseLinearTransform {
    pub fn triangles(&self) -> &[TriangleAffine] {
        &self.triangles
    }

    pub fn fallback(&self) -> &Homography {
        &self.fallback
    }

    fn slot(&self, face: FixedFaceHandle<spade::handles::InnerTag>) -> usize {
        self.face_slot[face.index()]
    }

    pub fn locate(&self, p: Point2) -> Region {
        match self.tri.locate(spade::Point2::new(p.x, p.y)) {
            PositionInTriangulation::OnFace(f) => Region::Triangle(self.slot(f)),
            PositionInTriangulation::OnEdge(e) => {
                let edge = self.tri.directed_edge(e);
                [edge.face(), edge.rev().face()]
                    .iter()
                    .filter_map(|f| f.fix().as_inner())
                    .map(|f| self.slot(f))
                    .min()
                    .map_or(Region::Outside, Region::Triangle)
            }
            PositionInTriangulation::OnVertex(_) => Region::Vertex,
            _ => Region::Outside,
        }
    }

    /// Maps a master-grid point to slave coordinates.
    pub fn apply(&self, p: Point2) -> Result<Point2> {
        match self.tri.locate(spade::Point2::new(p.x, p.y)) {
            PositionInTriangulation::OnVertex(v) => Ok(self.tri.vertex(v).data().slave),
            _ => match self.locate(p) {
                Region::Triangle(i) => Ok(self.triangles[i].apply(p)),
                _ => self.fallback.apply(p),
            },
        }
    }
}

/// Builds the piecewise-linear transform. Points are inserted in lexicographic
/// order of master coordinates so the triangulation does not depend on the
/// input order.
pub fn build_piecewise_linear(master: &[Point2], slave: &[Point2]) -> Result<PiecewiseLinearTransform> {
    if master.len() != slave.len() {
        return Err(Error::LengthMismatch(master.len(), slave.len()));
    }
    if master.len() < 3 {
        return Err(Error::InsufficientPoints {
            needed: 3,
            got: master.len(),
        });
    }
    let mut verts: Vec<Vertex> = master
        .iter()
        .zip(slave)
        .map(|(&m, &s)| Vertex { master: m, slave: s })
        .collect();
    verts.sort_by(|p, q| p.master.x.total_cmp(&q.master.x).then(p.master.y.total_cmp(&q.master.y)));
    let sorted_master: Vec<Point2> = verts.iter().map(|v| v.master).collect();
    let sorted_slave: Vec<Point2> = verts.iter().map(|v| v.slave).collect();

    let mut tri = DelaunayTriangulation::<Vertex>::new();
    for v in verts {
        if !v.master.is_finite() {
            return Err(Error::InvalidParams("non-finite control point".into()));
        }
        tri.insert(v).map_err(|_| Error::DegenerateConfiguration)?;
    }
    if tri.num_inner_faces() == 0 {
        return Err(Error::DegenerateConfiguration);
    }

    let mut triangles = Vec::with_capacity(tri.num_inner_faces());
    let mut face_slot = vec![usize::MAX; tri.num_all_faces()];
    for face in tri.inner_faces() {
        let vs = face.vertices().map(|v| *v.data());
        let (a, b) = solve_affine(vs.map(|v| v.master), vs.map(|v| v.slave))?;
        face_slot[face.fix().index()] = triangles.len();
        triangles.push(TriangleAffine {
            vertices: vs.map(|v| v.master),
            a,
            b,
        });
    }

    let fallback = match fit_projective(&sorted_master, &sorted_slave) {
        Ok(f) => f.homography,
        Err(_) => fit_affine(&sorted_master, &sorted_slave)?,
    };

    Ok(PiecewiseLinearTransform {
        tri,
        triangles,
        face_slot,
        fallback,
    })
}

/// Inverse-maps every output pixel through `t` and samples `slave`
/// bilinearly; pixels mapping outside the slave image are 0.
pub fn warp_image<T: Real>(slave: &Image<T>, t: &PiecewiseLinearTransform, out_size: (usize, usize)) -> Image<T> {
    let (w, h) = out_size;
    let mut data = vec![T::zero(); w * h];
    data.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            let p = Point2::new(x as f64, y as f64);
            if let Some(v) = t.apply(p).ok().and_then(|q| slave.sample_bilinear(q)) {
                *out = v;
            }
        }
    });
    Image::new(w, h, data).expect("dimensions match buffer")
}

/// Warps with a single homography mapping output coordinates to `src`.
pub fn warp_homography<T: Real>(src: &Image<T>, h: &Homography, out_size: (usize, usize)) -> Image<T> {
    let (w, hgt) = out_size;
    let mut data = vec![T::zero(); w * hgt];
    data.par_chunks_mut(w.max(1)).enumerate().for_each(|(y, row)| {
        for (x, out) in row.iter_mut().enumerate() {
            if let Some(v) = h.apply(Point2::new(x as f64, y as f64)).ok().and_then(|q| src.sample_bilinear(q)) {
                *out = v;
            }
        }
    });
    Image::new(w, hgt, data).expect("dimensions match buffer")
}
