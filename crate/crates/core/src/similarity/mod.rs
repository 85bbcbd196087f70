//! Similarity metrics (NCC, MI, HOG_ncc, HOPC_ncc), template matching over a
//! search square and subpixel peak refinement.

mod matching;
mod metrics;
mod surface;

pub use matching::{
    match_points, match_template, naive_match_points, naive_match_template, naive_similarity_surface,
    resolve_match, similarity_surface, MatchConfig, MatchResult, PreparedImage,
};
pub use metrics::{descriptor_ncc, mi, ncc, Correlation};
pub use surface::{fit_quadratic_peak, MetricKind, Peak, SimilaritySurface};
