//! Exponential map ↔ rotation matrix ↔ Euler angle conversions.

use crate::error::{Error, Result};

pub type Mat3 = [[f64; 3]; 3];

/// Rodrigues' formula. Angles below 1e-12 return the identity.
pub fn expmap_to_rotmat(r: [f64; 3]) -> Mat3 {
    let theta = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if theta < 1e-12 {
        return identity();
    }
    let k = [r[0] / theta, r[1] / theta, r[2] / theta];
    let kx = [[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]];
    let kx2 = mul(&kx, &kx);
    let (s, c) = theta.sin_cos();
    let mut out = identity();
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += s * kx[i][j] + (1.0 - c) * kx2[i][j];
        }
    }
    out
}

/// Intrinsic z-y-x extraction: returns `[roll, pitch, yaw]` (angles about x, y, z)
/// with `R = Rz(yaw) · Ry(pitch) · Rx(roll)`. At gimbal lock
/// (`|R₃₁| ≥ 1 − 1e-9`) roll is fixed to 0.
pub fn rotmat_to_euler(r: &Mat3) -> Result<[f64; 3]> {
    let err = orthonormality_error(r);
    if !(err <= 1e-6) {
        return Err(Error::arg(format!(
            "matrix is not orthonormal (max deviation {err:e})"
        )));
    }
    let s = r[2][0];
    if s.abs() >= 1.0 - 1e-9 {
        let pitch = if s < 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            -std::f64::consts::FRAC_PI_2
        };
        let yaw = (-r[0][1]).atan2(r[1][1]);
        return Ok([0.0, pitch, yaw]);
    }
    let pitch = -s.asin();
    let roll = r[2][1].atan2(r[2][2]);
    let yaw = r[1][0].atan2(r[0][0]);
    Ok([roll, pitch, yaw])
}

/// Inverse of [`rotmat_to_euler`], composed from elementary axis rotations.
pub fn euler_to_rotmat(e: [f64; 3]) -> Mat3 {
    let rx = expmap_to_rotmat([e[0], 0.0, 0.0]);
    let ry = expmap_to_rotmat([0.0, e[1], 0.0]);
    let rz = expmap_to_rotmat([0.0, 0.0, e[2]]);
    mul(&rz, &mul(&ry, &rx))
}

/// `‖RᵀR − I‖∞` combined with `|det R − 1|`.
pub fn orthonormality_error(r: &Mat3) -> f64 {
    let rtr = mul(&transpose(r), r);
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((rtr[i][j] - target).abs());
        }
    }
    worst.max((det(r) - 1.0).abs())
}

pub fn identity() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

pub fn det(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Rotation via unit quaternion, independent of Rodrigues' formula.
    fn quaternion_oracle(r: [f64; 3]) -> Mat3 {
        let theta = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        let (w, x, y, z) = if theta == 0.0 {
            (1.0, 0.0, 0.0, 0.0)
        } else {
            let s = (theta / 2.0).sin() / theta;
            ((theta / 2.0).cos(), r[0] * s, r[1] * s, r[2] * s)
        };
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    fn max_diff(a: &Mat3, b: &Mat3) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((a[i][j] - b[i][j]).abs());
            }
        }
        m
    }

    #[test]
    fn zero_is_identity() {
        assert_eq!(expmap_to_rotmat([0.0; 3]), identity());
        assert_eq!(rotmat_to_euler(&identity()).unwrap(), [0.0; 3]);
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = expmap_to_rotmat([0.0, 0.0, PI / 2.0]);
        let want = [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(max_diff(&r, &want) < 1e-15);
    }

    #[test]
    fn matches_quaternion_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..2000 {
            let r = [
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
                rng.random_range(-4.0..4.0),
            ];
            let got = expmap_to_rotmat(r);
            assert!(max_diff(&got, &quaternion_oracle(r)) <= 1e-10);
            assert!(orthonormality_error(&got) <= 1e-9);
        }
    }

    #[test]
    fn euler_round_trip_at_matrix_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let r = [
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ];
            let m = expmap_to_rotmat(r);
            let e = rotmat_to_euler(&m).unwrap();
            assert!(max_diff(&euler_to_rotmat(e), &m) <= 1e-8);
        }
    }

    #[test]
    fn gimbal_lock_fixes_roll() {
        let m = euler_to_rotmat([0.0, PI / 2.0, 0.7]);
        let e = rotmat_to_euler(&m).unwrap();
        assert_eq!(e[0], 0.0);
        assert!(max_diff(&euler_to_rotmat(e), &m) <= 1e-8);
        let m = euler_to_rotmat([0.0, -PI / 2.0, -1.1]);
        let e = rotmat_to_euler(&m).unwrap();
        assert!(max_diff(&euler_to_rotmat(e), &m) <= 1e-8);
    }

    #[test]
    fn rejects_non_orthonormal() {
        let mut m = identity();
        m[0][0] = 1.1;
        assert!(rotmat_to_euler(&m).is_err());
    }

    /// Coarse-to-fine grid search for the angles reproducing `target`.
    fn grid_oracle(target: &Mat3) -> [f64; 3] {
        let mut best = [0.0; 3];
        let mut span = [PI, PI / 2.0, PI];
        let mut center = [0.0; 3];
        for _ in 0..40 {
            let mut best_err = f64::INFINITY;
            let steps = 10;
            for a in 0..=steps {
                for b in 0..=steps {
                    for c in 0..=steps {
                        let e = [
                            center[0] + span[0] * (2.0 * a as f64 / steps as f64 - 1.0),
                            (center[1] + span[1] * (2.0 * b as f64 / steps as f64 - 1.0))
                                .clamp(-PI / 2.0, PI / 2.0),
                            center[2] + span[2] * (2.0 * c as f64 / steps as f64 - 1.0),
                        ];
                        let err = max_diff(&euler_to_rotmat(e), target);
                        if err < best_err {
                            best_err = err;
                            best = e;
                        }
                    }
                }
            }
            center = best;
            span.iter_mut().for_each(|s| *s *= 0.5);
        }
        best
    }

    #[test]
    fn matches_grid_search_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..5 {
            let e = [
                rng.random_range(-2.5..2.5),
                rng.random_range(-1.2..1.2),
                rng.random_range(-2.5..2.5),
            ];
            let m = euler_to_rotmat(e);
            let got = rotmat_to_euler(&m).unwrap();
            let oracle = grid_oracle(&m);
            for k in 0..3 {
                assert!((got[k] - oracle[k]).abs() < 1e-6, "{got:?} vs {oracle:?}");
            }
        }
    }
}
