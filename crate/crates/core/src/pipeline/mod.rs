//! Interest points, bidirectional matching, projective refinement and
//! piecewise-linear warping.

mod harris;
mod piecewise;
mod projective;
mod refine;
mod register;

pub use harris::{detect_interest_points, harris_response, InterestPointConfig};
pub use piecewise::{
    build_piecewise_linear, warp_homography, warp_image, PiecewiseLinearTransform, Region, TriangleAffine,
};
pub use projective::{fit_affine, fit_projective, residuals, rms, ProjectiveFit};
pub use refine::{iterative_refine, master_order, write_control_point_set, ControlPoint, ControlPointSet, RefineConfig, RefineOutcome};
pub use register::{
    bidirectional_match, default_border_margin, register, BidirectionalOutcome, RegisterConfig, RegisterReport,
    Registration, RejectReason, Rejection, StageCounts, StageTiming,
};
