//! In-memory raster cube: parcel rasterization, buffered masks, zonal statistics.

mod cube;
mod io;
mod morph;
mod parcels;
mod zonal;

pub use cube::{Cube, GridSpec};
pub use io::{read_cube_dir, read_parcels_geojson, write_cube_dir, RejectedRow};
pub use morph::{inward_buffer, outward_cloud_buffer};
pub use parcels::{rasterize_parcels, Parcel, ParcelIdRaster, ParcelSet};
pub use zonal::{zonal_stats, Reducer, ZonalMode, ZonalRow};

#[derive(Debug, thiserror::Error)]
pub enum CubeError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("cube and raster grids differ")]
    GridMismatch,
    #[error("bad cube shape: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("dates must be strictly increasing")]
    UnsortedDates,
    #[error("grid must have positive dimensions and pixel size")]
    BadGrid,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}
