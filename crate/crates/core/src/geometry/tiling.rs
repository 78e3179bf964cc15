use super::{build_rect, region::min_side, Direction, GeometryError, RectRegion};

/// Disjoint lattice-centered sub-boxes `R_{z_i, l, H}(S', n)` packed inside
/// `R_{0, L, H + √d/2}(S, n)`.
#[derive(Clone, Debug)]
pub struct Tiling {
    pub parent: RectRegion,
    pub tiles: Vec<RectRegion>,
    /// Index vector `i ∈ Z^{d-1}` of each tile.
    pub indices: Vec<Vec<i32>>,
    pub sub_length: f64,
}

impl Tiling {
    /// `|C|`.
    pub fn count(&self) -> usize {
        self.tiles.len()
    }

    /// `(l/L)^{d-1} |C|`, at most one.
    pub fn coverage(&self) -> f64 {
        let d = self.parent.dim() as i32;
        (self.sub_length / self.parent.length()).powi(d - 1) * self.count() as f64
    }
}

/// Lattice point `z` with `p ∈ z + [-1/2, 1/2)^d`.
pub(crate) fn snap(p: &[f64; 3], dim: usize) -> [i32; 3] {
    let mut z = [0; 3];
    for k in 0..dim {
        z[k] = (p[k] + 0.5).floor() as i32;
    }
    z
}

/// Center of the tile with index `i`, snapped to the lattice.
pub(crate) fn tile_center(index: &[i32], sub_length: f64, subframe: &Direction) -> [i32; 3] {
    let dim = subframe.dim();
    let step = sub_length + (dim as f64).sqrt();
    let mut p = [0.0; 3];
    for (ik, u) in index.iter().zip(subframe.frame()) {
        for c in 0..3 {
            p[c] += step * (*ik as f64) * u[c];
        }
    }
    snap(&p, dim)
}

/// Tiles the parent box with sub-boxes of side `l`.
///
/// `dir` carries `(S, n)` for the parent and `subframe` carries `(S', n)`
/// for the tiles; both must share the normal.
pub fn tile_subadditive(
    length: f64,
    half_height: f64,
    sub_length: f64,
    dir: &Direction,
    subframe: &Direction,
) -> Result<Tiling, GeometryError> {
    let dim = dir.dim();
    let min = min_side(dim);
    if subframe.dim() != dim {
        return Err(GeometryError::BadFrame("frames of different dimension".into()));
    }
    let (n, m) = (dir.normal(), subframe.normal());
    if (0..3).any(|k| (n[k] - m[k]).abs() > super::FRAME_TOL) {
        return Err(GeometryError::BadFrame("tiles must share the parent normal".into()));
    }
    for (name, v) in [("H", half_height), ("l", sub_length)] {
        if v < min {
            return Err(GeometryError::SizeTooSmall { name, value: v, min });
        }
    }
    if length < 4.0 * (dim as f64).sqrt() * sub_length {
        return Err(GeometryError::RatioViolation { length, sub: sub_length });
    }
    let sqrt_d = (dim as f64).sqrt();
    let parent = build_rect(&vec![0.0; dim], length, half_height + sqrt_d / 2.0, dir)?;
    let reach = (length / (sub_length + sqrt_d)).ceil() as i32 + 1;

    let mut indices = Vec::new();
    let mut tiles = Vec::new();
    let ranges: Vec<i32> = (-reach..=reach).collect();
    let candidates: Vec<Vec<i32>> = if dim == 2 {
        ranges.iter().map(|&a| vec![a]).collect()
    } else {
        ranges
            .iter()
            .flat_map(|&a| ranges.iter().map(move |&b| vec![a, b]))
            .collect()
    };
    for idx in candidates {
        let z = tile_center(&idx, sub_length, subframe);
        let center: Vec<f64> = z[..dim].iter().map(|&c| c as f64).collect();
        let tile = build_rect(&center, sub_length, half_height, subframe)?;
        if tile.corners().iter().all(|c| parent.contains_point(c)) {
            indices.push(idx);
            tiles.push(tile);
        }
    }
    Ok(Tiling {
        parent,
        tiles,
        indices,
        sub_length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_violation() {
        let d = Direction::axis(2, 1).unwrap();
        let err = tile_subadditive(30.0, 3.0, 10.0, &d, &d).unwrap_err();
        assert!(matches!(err, GeometryError::RatioViolation { .. }));
    }

    #[test]
    fn snapping_is_half_open() {
        assert_eq!(snap(&[0.5, -0.5, 0.0], 2), [1, 0, 0]);
        assert_eq!(snap(&[0.49, -0.51, 0.0], 2), [0, -1, 0]);
    }
}
