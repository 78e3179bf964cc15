use serde::{Deserialize, Serialize};

use super::{check_dim, dot, GeometryError, FRAME_TOL};

/// A unit normal `n` together with an orthonormal frame `(u_1, .., u_{d-1})`
/// of the hyperplane orthogonal to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    dim: usize,
    normal: [f64; 3],
    frame: [[f64; 3]; 2],
    /// Integer lattice vector the normal was built from, when there is one.
    lattice: Option<[i32; 3]>,
}

impl Direction {
    /// The coordinate axis `e_k` (0-based), with the remaining axes as frame.
    pub fn axis(dim: usize, k: usize) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        if k >= dim {
            return Err(GeometryError::BadFrame(format!("axis {k} out of range")));
        }
        let mut v = [0; 3];
        v[k] = 1;
        Self::lattice(dim, v)
    }

    /// Normal proportional to an integer vector, e.g. `[1, 1, 0]` for the
    /// planar diagonal.
    pub fn lattice(dim: usize, v: [i32; 3]) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        if dim == 2 && v[2] != 0 {
            return Err(GeometryError::BadFrame("third component in 2D".into()));
        }
        let norm = ((v[0] as f64).powi(2) + (v[1] as f64).powi(2) + (v[2] as f64).powi(2)).sqrt();
        if norm == 0.0 {
            return Err(GeometryError::BadFrame("zero lattice vector".into()));
        }
        let n = [v[0] as f64 / norm, v[1] as f64 / norm, v[2] as f64 / norm];
        let mut d = Self::from_normal(dim, n)?;
        d.lattice = Some(v);
        Ok(d)
    }

    /// Normalizes `n` and completes it to an orthonormal frame.
    pub fn from_normal(dim: usize, n: [f64; 3]) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        if dim == 2 && n[2] != 0.0 {
            return Err(GeometryError::BadFrame("third component in 2D".into()));
        }
        let norm = dot(&n, &n).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(GeometryError::BadFrame("normal has zero length".into()));
        }
        let n = [n[0] / norm, n[1] / norm, n[2] / norm];
        let frame = if dim == 2 {
            [[n[1], -n[0], 0.0], [0.0; 3]]
        } else {
            // Helper axis least aligned with n.
            let k = (0..3)
                .min_by(|&a, &b| n[a].abs().total_cmp(&n[b].abs()))
                .unwrap_or(0);
            let mut h = [0.0; 3];
            h[k] = 1.0;
            let p = dot(&h, &n);
            let mut u1 = [h[0] - p * n[0], h[1] - p * n[1], h[2] - p * n[2]];
            let l = dot(&u1, &u1).sqrt();
            u1.iter_mut().for_each(|c| *c /= l);
            let u2 = cross(&n, &u1);
            [u1, u2]
        };
        Ok(Direction {
            dim,
            normal: n,
            frame,
            lattice: None,
        })
    }

    /// Explicit normal and frame; both are validated, not repaired.
    pub fn with_frame(dim: usize, n: [f64; 3], frame: &[[f64; 3]]) -> Result<Self, GeometryError> {
        check_dim(dim)?;
        if frame.len() != dim - 1 {
            return Err(GeometryError::BadFrame(format!(
                "expected {} frame vectors, got {}",
                dim - 1,
                frame.len()
            )));
        }
        let mut f = [[0.0; 3]; 2];
        f[..frame.len()].copy_from_slice(frame);
        let d = Direction {
            dim,
            normal: n,
            frame: f,
            lattice: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        check_dim(self.dim)?;
        let mut basis: Vec<[f64; 3]> = self.frame[..self.dim - 1].to_vec();
        basis.push(self.normal);
        for (i, a) in basis.iter().enumerate() {
            if self.dim == 2 && a[2] != 0.0 {
                return Err(GeometryError::BadFrame("third component in 2D".into()));
            }
            for (j, b) in basis.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot(a, b) - want).abs() > FRAME_TOL {
                    return Err(GeometryError::BadFrame(format!(
                        "basis vectors {i},{j} have inner product {}",
                        dot(a, b)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normal(&self) -> [f64; 3] {
        self.normal
    }

    /// The `d - 1` in-plane frame vectors.
    pub fn frame(&self) -> &[[f64; 3]] {
        &self.frame[..self.dim - 1]
    }

    pub fn lattice_vector(&self) -> Option<[i32; 3]> {
        self.lattice
    }

    /// `‖n‖_1`.
    pub fn l1_norm(&self) -> f64 {
        self.normal.iter().map(|c| c.abs()).sum()
    }

    /// Same normal, a different in-plane frame (rotated by `angle` in 2D the
    /// frame can only flip; in 3D it rotates about `n`).
    pub fn rotated_frame(&self, angle: f64) -> Self {
        let mut d = self.clone();
        if self.dim == 3 {
            let (s, c) = angle.sin_cos();
            let [u1, u2] = self.frame;
            let r1 = [0, 1, 2].map(|k| c * u1[k] + s * u2[k]);
            let r2 = [0, 1, 2].map(|k| -s * u1[k] + c * u2[k]);
            d.frame = [r1, r2];
        }
        d
    }

    /// Compact label used in CSV output, e.g. `1:1` or `0.6:0.8`.
    pub fn label(&self) -> String {
        match self.lattice {
            Some(v) => v[..self.dim]
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(":"),
            None => self.normal[..self.dim]
                .iter()
                .map(|c| format!("{c:.6}"))
                .collect::<Vec<_>>()
                .join(":"),
        }
    }
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
