use rayon::prelude::*;

use super::{GeometryError, RectRegion, Side};
use crate::unionfind::UnionFind;

/// Largest edge count handled by exhaustive subset enumeration.
pub const ENUMERATION_CAP: usize = 22;

/// `true` when no path of open edges joins the upper and lower boundary.
pub fn separates<F>(region: &RectRegion, open: F) -> bool
where
    F: Fn(usize) -> bool,
{
    let sys = region.system();
    let sides = region.system_sides();
    let mut uf = UnionFind::new(sys.num_sites());
    for (i, [u, v]) in sys.edges().iter().enumerate() {
        if open(i) {
            uf.union(*u, *v);
        }
    }
    separated_by(&mut uf, sides)
}

pub(crate) fn separated_by(uf: &mut UnionFind, sides: &[Side]) -> bool {
    let mut upper_roots = Vec::new();
    for (s, side) in sides.iter().enumerate() {
        if *side == Side::Upper {
            upper_roots.push(uf.find(s));
        }
    }
    upper_roots.sort_unstable();
    for (s, side) in sides.iter().enumerate() {
        if *side == Side::Lower && upper_roots.binary_search(&uf.find(s)).is_ok() {
            return false;
        }
    }
    true
}

/// All interfaces of a region: minimal edge sets whose closure disconnects
/// the upper from the lower boundary. Each interface is a sorted list of
/// edge indices into `region.system()`.
pub fn interfaces_enumerate(region: &RectRegion) -> Result<Vec<Vec<usize>>, GeometryError> {
    let m = region.system().num_edges();
    if m > ENUMERATION_CAP {
        return Err(GeometryError::TooLarge { edges: m, cap: ENUMERATION_CAP });
    }
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    // disconnected[closed] for every closed-edge mask.
    let disconnected: Vec<bool> = (0..=full)
        .into_par_iter()
        .map(|closed| separates(region, |e| closed >> e & 1 == 0))
        .collect();
    let interfaces = (0..=full)
        .filter(|&closed| {
            disconnected[closed as usize]
                && (0..m).all(|e| closed >> e & 1 == 0 || !disconnected[(closed & !(1 << e)) as usize])
        })
        .map(|closed| (0..m).filter(|e| closed >> e & 1 == 1).collect())
        .collect();
    Ok(interfaces)
}
