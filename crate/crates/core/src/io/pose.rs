use crate::error::{Error, Result};
use crate::map::SemanticPoint;

const ORTHO_TOL: f64 = 1e-9;

/// Rigid sensor-to-world transform stored as a row-major 4×4 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    m: [[f64; 4]; 4],
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        m: [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ],
    };

    /// Validates `m` as a rigid transform.
    pub fn from_matrix(m: [[f64; 4]; 4]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::validation("pose has non-finite entries"));
        }
        if m[3] != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::validation("pose last row must be (0, 0, 0, 1)"));
        }
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = (0..3).map(|r| m[r][a] * m[r][b]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                if (dot - want).abs() > ORTHO_TOL {
                    return Err(Error::validation("pose rotation block is not orthonormal"));
                }
            }
        }
        let r = |i: usize, j: usize| m[i][j];
        let det = r(0, 0) * (r(1, 1) * r(2, 2) - r(1, 2) * r(2, 1))
            - r(0, 1) * (r(1, 0) * r(2, 2) - r(1, 2) * r(2, 0))
            + r(0, 2) * (r(1, 0) * r(2, 1) - r(1, 1) * r(2, 0));
        if (det - 1.0).abs() > ORTHO_TOL {
            return Err(Error::validation(format!(
                "pose rotation determinant is {det}, expected +1"
            )));
        }
        Ok(Self { m })
    }

    /// The top three rows, row-major, as stored in pose files.
    pub fn from_rows(v: [f64; 12]) -> Result<Self> {
        let mut m = Self::IDENTITY.m;
        for (r, row) in m.iter_mut().take(3).enumerate() {
            row.copy_from_slice(&v[r * 4..r * 4 + 4]);
        }
        Self::from_matrix(m)
    }

    pub fn to_rows(&self) -> [f64; 12] {
        let mut v = [0.0; 12];
        for r in 0..3 {
            v[r * 4..r * 4 + 4].copy_from_slice(&self.m[r]);
        }
        v
    }

    /// Rotation by `yaw` radians about +z followed by translation `t`.
    pub fn from_yaw_translation(yaw: f64, t: [f64; 3]) -> Self {
        let (s, c) = yaw.sin_cos();
        Self {
            m: [
                [c, -s, 0.0, t[0]],
                [s, c, 0.0, t[1]],
                [0.0, 0.0, 1.0, t[2]],
                [0.0, 0.0, 0.0, 1.0],
            ],
        }
    }

    pub fn translation(t: [f64; 3]) -> Self {
        Self::from_yaw_translation(0.0, t)
    }

    pub fn matrix(&self) -> &[[f64; 4]; 4] {
        &self.m
    }

    /// R·p + t.
    #[inline]
    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        [
            m[0][0] * p[0] + m[0][1] * p[1] + m[0][2] * p[2] + m[0][3],
            m[1][0] * p[0] + m[1][1] * p[1] + m[1][2] * p[2] + m[1][3],
            m[2][0] * p[0] + m[2][1] * p[1] + m[2][2] * p[2] + m[2][3],
        ]
    }

    /// Rᵀ(p − t), the inverse mapping.
    pub fn apply_inverse(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.m;
        let d = [p[0] - m[0][3], p[1] - m[1][3], p[2] - m[2][3]];
        [
            m[0][0] * d[0] + m[1][0] * d[1] + m[2][0] * d[2],
            m[0][1] * d[0] + m[1][1] * d[1] + m[2][1] * d[2],
            m[0][2] * d[0] + m[1][2] * d[1] + m[2][2] * d[2],
        ]
    }

    /// Matrix product `self · other`: applies `other` first.
    pub fn compose(&self, other: &Pose) -> Pose {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Pose { m }
    }
}

/// Maps every position by the pose; payloads are untouched.
pub fn transform_points(pose: &Pose, points: &[SemanticPoint]) -> Vec<SemanticPoint> {
    points
        .iter()
        .map(|p| SemanticPoint {
            position: pose.apply(p.position),
            payload: p.payload.clone(),
        })
        .collect()
}
