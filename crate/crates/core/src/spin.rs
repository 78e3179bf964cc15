//! Spin configurations and spin boundary conditions shared by the exact
//! Ising enumeration and the Monte Carlo samplers.

use serde::{Deserialize, Serialize};

use crate::geometry::{RectRegion, Side, Site};

/// Boundary condition on the inner boundary of a box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinBc {
    /// Every boundary spin is `+1`.
    Plus,
    /// `+1` on the upper boundary, `-1` on the lower boundary.
    Mixed,
}

/// A spin configuration over an indexed site list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinConfig {
    pub sites: Vec<Site>,
    pub spins: Vec<i8>,
}

impl SpinConfig {
    pub fn magnetization(&self) -> f64 {
        if self.spins.is_empty() {
            return 0.0;
        }
        self.spins.iter().map(|&s| s as f64).sum::<f64>() / self.spins.len() as f64
    }

    pub fn get(&self, s: &Site) -> Option<i8> {
        self.sites.iter().position(|t| t == s).map(|i| self.spins[i])
    }
}

/// Clamped spins for the sites of `region.system()`: boundary sites carry
/// the boundary-condition value, interior sites are free (`None`).
pub fn region_clamps(region: &RectRegion, bc: SpinBc) -> Vec<Option<i8>> {
    region
        .system_sides()
        .iter()
        .map(|side| match (side, bc) {
            (Side::Interior, _) => None,
            (_, SpinBc::Plus) | (Side::Upper, SpinBc::Mixed) => Some(1),
            (Side::Lower, SpinBc::Mixed) => Some(-1),
        })
        .collect()
}
