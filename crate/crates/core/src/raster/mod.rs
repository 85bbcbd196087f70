//! Image containers, file formats, sampling and plane geometry.

mod geometry;
mod image;
pub mod io;

pub use geometry::{Homography, Point2};
pub use image::Image;
pub use io::{load_image, save_image, ImageFormat};
