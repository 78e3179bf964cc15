//! Lattice geometry on Z^d (d = 2 or 3): sites, nearest-neighbour edges,
//! oriented boxes with their upper/lower boundary split, the subadditive
//! tiling of a box, and exhaustive interface enumeration for tiny boxes.
//!
//! Sites are stored as `[i32; 3]`; in two dimensions the third coordinate
//! is always zero.

mod direction;
mod interfaces;
mod region;
mod system;
mod tiling;

pub use direction::Direction;
pub use interfaces::{interfaces_enumerate, separates, ENUMERATION_CAP};
pub(crate) use interfaces::separated_by;
pub use region::{build_rect, build_rect_relaxed, min_side, RectRegion, RegionSpec, Side};
pub use system::{Edge, EdgeSystem};
pub use tiling::{tile_subadditive, Tiling};

use thiserror::Error;

/// A lattice point. Unused trailing coordinates are zero.
pub type Site = [i32; 3];

/// Tolerance band for strict-interior membership and the boundary split.
pub const INTERIOR_TOL: f64 = 1e-9;

/// Tolerance for unit-norm and orthonormality checks on frames.
pub const FRAME_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    Dimension(usize),
    #[error("box side {name} = {value} is below the usable size {min}")]
    SizeTooSmall {
        name: &'static str,
        value: f64,
        min: f64,
    },
    #[error("invalid frame: {0}")]
    BadFrame(String),
    #[error("tiling needs L >= 4*sqrt(d)*l, got L = {length}, l = {sub}")]
    RatioViolation { length: f64, sub: f64 },
    #[error("edge set has {edges} edges, above the enumeration cap of {cap}")]
    TooLarge { edges: usize, cap: usize },
    #[error("sites {0:?} and {1:?} are not nearest neighbours")]
    NotAnEdge(Site, Site),
}

pub(crate) fn check_dim(dim: usize) -> Result<(), GeometryError> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(GeometryError::Dimension(dim))
    }
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn site_to_f64(s: &Site) -> [f64; 3] {
    [s[0] as f64, s[1] as f64, s[2] as f64]
}

/// The 2d unit steps of Z^d.
pub(crate) fn unit_steps(dim: usize) -> impl Iterator<Item = Site> {
    (0..dim).flat_map(|k| {
        let mut plus = [0; 3];
        plus[k] = 1;
        let mut minus = [0; 3];
        minus[k] = -1;
        [plus, minus]
    })
}

pub(crate) fn add_site(a: &Site, b: &Site) -> Site {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
