//! Pose algebra for the 6-D end-effector state.
//!
//! Orientation is carried as Tait-Bryan angles `(roll, pitch, yaw)` composed
//! extrinsically about X, then Y, then Z: `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.
//! A reference frame maps encoded columns `[time, position, orientation]`
//! between frame-local and global coordinates with the block matrix
//! `A = diag(1, R, I3)` and origin vector `b = [0, position, orientation]`.
//! The orientation block is the identity, so orientations transform
//! additively.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, SMatrix, SVector, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pose dimension `D`.
pub const POSE_DIM: usize = 6;
/// Encoded column dimension `1 + D`.
pub const ENCODED_DIM: usize = POSE_DIM + 1;

/// Tag written into model files so a reader can reject a different angle convention.
pub const EULER_CONVENTION: &str = "extrinsic-xyz";

pub type Vector7 = SVector<f64, ENCODED_DIM>;
pub type Matrix7 = SMatrix<f64, ENCODED_DIM, ENCODED_DIM>;

/// End-effector or target pose: position in meters, Tait-Bryan angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 6]", into = "[f64; 6]")]
pub struct Pose6 {
    pub position: Vector3<f64>,
    pub orientation: Vector3<f64>,
}

impl From<[f64; 6]> for Pose6 {
    fn from(v: [f64; 6]) -> Self {
        Self::from_array(v)
    }
}

impl From<Pose6> for [f64; 6] {
    fn from(p: Pose6) -> Self {
        p.to_array()
    }
}

impl Pose6 {
    pub fn new(position: Vector3<f64>, orientation: Vector3<f64>) -> Self {
        Self { position, orientation }
    }

    pub fn identity() -> Self {
        Self::new(Vector3::zeros(), Vector3::zeros())
    }

    /// `[x, y, z, roll, pitch, yaw]`
    pub fn from_array(v: [f64; 6]) -> Self {
        Self::new(Vector3::new(v[0], v[1], v[2]), Vector3::new(v[3], v[4], v[5]))
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self::new(v.fixed_rows::<3>(0).into_owned(), v.fixed_rows::<3>(3).into_owned())
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.position.x,
            self.position.y,
            self.position.z,
            self.orientation.x,
            self.orientation.y,
            self.orientation.z,
        ]
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        Vector6::from_column_slice(&self.to_array())
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Orientation with each angle mapped into `(-pi, pi]`.
    pub fn canonical(&self) -> Self {
        Self::new(self.position, self.orientation.map(canonical_angle))
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        rotation_from_euler(&self.orientation)
    }

    pub fn quaternion(&self) -> UnitQuat {
        euler_to_quat(&self.orientation)
    }
}

/// Maps an angle into `(-pi, pi]`.
pub fn canonical_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Removes `2 pi` jumps so that successive differences lie in `(-pi, pi]`.
pub fn unwrap_angles(angles: &mut [f64]) {
    for i in 1..angles.len() {
        let step = angles[i] - angles[i - 1];
        let turns = (step - canonical_angle(step)) / (2.0 * PI);
        if turns != 0.0 {
            angles[i] -= turns.round() * 2.0 * PI;
        }
    }
}

/// Unwraps each orientation dimension of a trajectory independently.
pub fn unwrap_trajectory(poses: &mut [Pose6]) {
    for d in 0..3 {
        let mut col: Vec<f64> = poses.iter().map(|p| p.orientation[d]).collect();
        unwrap_angles(&mut col);
        for (p, a) in poses.iter_mut().zip(col) {
            p.orientation[d] = a;
        }
    }
}

pub fn rotation_from_euler(orientation: &Vector3<f64>) -> Rotation3<f64> {
    // nalgebra applies roll, then pitch, then yaw about fixed axes.
    Rotation3::from_euler_angles(orientation.x, orientation.y, orientation.z)
}

/// A reference frame as an origin vector and block-diagonal linear map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTransform {
    origin: Pose6,
    rotation: Matrix3<f64>,
}

impl FrameTransform {
    pub fn identity() -> Self {
        Self {
            origin: Pose6::identity(),
            rotation: Matrix3::identity(),
        }
    }

    /// Frame whose origin is `pose`. Fails on non-finite input.
    pub fn from_pose(pose: &Pose6) -> Result<Self> {
        if !pose.is_finite() {
            return Err(Error::invalid("frame pose must be finite"));
        }
        Ok(Self {
            origin: *pose,
            rotation: *pose.rotation().matrix(),
        })
    }

    pub fn origin(&self) -> &Pose6 {
        &self.origin
    }

    /// Position block `R_j`.
    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    /// Origin vector `b = [0, position, orientation]`.
    pub fn b(&self) -> Vector7 {
        let mut b = Vector7::zeros();
        b.fixed_rows_mut::<6>(1).copy_from(&self.origin.to_vector());
        b
    }

    /// Block matrix `A = diag(1, R, I3)`.
    pub fn a(&self) -> Matrix7 {
        let mut a = Matrix7::identity();
        a.fixed_view_mut::<3, 3>(1, 1).copy_from(&self.rotation);
        a
    }

    /// `A * local + b`
    pub fn to_global(&self, local: &Vector7) -> Vector7 {
        let mut out = *local;
        let p = self.rotation * local.fixed_rows::<3>(1) + self.origin.position;
        out.fixed_rows_mut::<3>(1).copy_from(&p);
        let r = local.fixed_rows::<3>(4) + self.origin.orientation;
        out.fixed_rows_mut::<3>(4).copy_from(&r);
        out
    }

    /// `A^-1 * (global - b)`
    pub fn to_frame(&self, global: &Vector7) -> Vector7 {
        let mut out = *global;
        let p = self.rotation.transpose() * (global.fixed_rows::<3>(1) - self.origin.position);
        out.fixed_rows_mut::<3>(1).copy_from(&p);
        let r = global.fixed_rows::<3>(4) - self.origin.orientation;
        out.fixed_rows_mut::<3>(4).copy_from(&r);
        out
    }

    /// Slice form of [`to_global`](Self::to_global) with a dimension check.
    pub fn to_global_slice(&self, local: &[f64]) -> Result<Vector7> {
        Ok(self.to_global(&encoded_from_slice(local)?))
    }

    /// Slice form of [`to_frame`](Self::to_frame) with a dimension check.
    pub fn to_frame_slice(&self, global: &[f64]) -> Result<Vector7> {
        Ok(self.to_frame(&encoded_from_slice(global)?))
    }

    pub fn pose_to_frame(&self, pose: &Pose6) -> Pose6 {
        Pose6::new(
            self.rotation.transpose() * (pose.position - self.origin.position),
            pose.orientation - self.origin.orientation,
        )
    }

    pub fn pose_to_global(&self, pose: &Pose6) -> Pose6 {
        Pose6::new(
            self.rotation * pose.position + self.origin.position,
            pose.orientation + self.origin.orientation,
        )
    }

    /// Expresses a frame-local velocity command globally. Only the
    /// translational part rotates; angle rates pass through.
    pub fn rate_to_global(&self, rate: &Vector6<f64>) -> Vector6<f64> {
        let mut out = *rate;
        let p = self.rotation * rate.fixed_rows::<3>(0);
        out.fixed_rows_mut::<3>(0).copy_from(&p);
        out
    }
}

/// Frame with origin at `pose`; see [`FrameTransform::from_pose`].
pub fn frame_from_pose(pose: &Pose6) -> Result<FrameTransform> {
    FrameTransform::from_pose(pose)
}

pub fn encoded_from_slice(v: &[f64]) -> Result<Vector7> {
    if v.len() != ENCODED_DIM {
        return Err(Error::invalid(format!(
            "encoded column has {} entries, expected {ENCODED_DIM}",
            v.len()
        )));
    }
    Ok(Vector7::from_column_slice(v))
}

/// Encoded column `[time, pose]`.
pub fn encode_column(time: f64, pose: &Pose6) -> Vector7 {
    let mut c = Vector7::zeros();
    c[0] = time;
    c.fixed_rows_mut::<6>(1).copy_from(&pose.to_vector());
    c
}

pub fn pose_of_column(c: &Vector7) -> Pose6 {
    Pose6::from_vector(&c.fixed_rows::<6>(1).into_owned())
}

/// Unit quaternion normalized to `w >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuat(UnitQuaternion<f64>);

impl UnitQuat {
    pub fn from_rotation(r: &Rotation3<f64>) -> Self {
        Self::canonical(UnitQuaternion::from_rotation_matrix(r))
    }

    fn canonical(q: UnitQuaternion<f64>) -> Self {
        if q.w < 0.0 {
            Self(UnitQuaternion::new_unchecked(-q.into_inner()))
        } else {
            Self(q)
        }
    }

    pub fn w(&self) -> f64 {
        self.0.w
    }

    /// `[w, x, y, z]`
    pub fn to_array(&self) -> [f64; 4] {
        let q = self.0.quaternion();
        [q.w, q.i, q.j, q.k]
    }

    pub fn dot(&self, other: &UnitQuat) -> f64 {
        self.0.quaternion().dot(other.0.quaternion())
    }

    pub fn to_rotation(&self) -> Rotation3<f64> {
        self.0.to_rotation_matrix()
    }

    /// Rotation angle between two orientations, `2 acos |q1 . q2|`.
    pub fn angle_to(&self, other: &UnitQuat) -> f64 {
        2.0 * self.dot(other).abs().clamp(-1.0, 1.0).acos()
    }
}

pub fn euler_to_quat(orientation: &Vector3<f64>) -> UnitQuat {
    UnitQuat::canonical(UnitQuaternion::from_euler_angles(
        orientation.x,
        orientation.y,
        orientation.z,
    ))
}

/// Total travelled distance along a pose sequence: summed Euclidean steps
/// (meters) and summed quaternion angles (radians).
pub fn path_length(poses: &[Pose6]) -> Result<(f64, f64)> {
    if poses.is_empty() {
        return Err(Error::invalid("path_length needs at least one pose"));
    }
    let quats: Vec<UnitQuat> = poses.iter().map(Pose6::quaternion).collect();
    let mut translation = 0.0;
    let mut rotation = 0.0;
    for i in 1..poses.len() {
        translation += (poses[i].position - poses[i - 1].position).norm();
        rotation += quats[i - 1].angle_to(&quats[i]);
    }
    Ok((translation, rotation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn rx(a: f64) -> Matrix3<f64> {
        Matrix3::new(1.0, 0.0, 0.0, 0.0, a.cos(), -a.sin(), 0.0, a.sin(), a.cos())
    }
    fn ry(a: f64) -> Matrix3<f64> {
        Matrix3::new(a.cos(), 0.0, a.sin(), 0.0, 1.0, 0.0, -a.sin(), 0.0, a.cos())
    }
    fn rz(a: f64) -> Matrix3<f64> {
        Matrix3::new(a.cos(), -a.sin(), 0.0, a.sin(), a.cos(), 0.0, 0.0, 0.0, 1.0)
    }

    #[test]
    fn identity_pose_gives_identity_frame() {
        let f = frame_from_pose(&Pose6::identity()).unwrap();
        assert_eq!(f.a(), Matrix7::identity());
        assert_eq!(f.b(), Vector7::zeros());
    }

    #[test]
    fn central_goal_origin_vector() {
        let f = frame_from_pose(&Pose6::from_array([0.22, 0.27, -0.26, 0.0, 0.0, 1.46])).unwrap();
        let b: Vec<f64> = f.b().iter().copied().collect();
        assert_eq!(b, vec![0.0, 0.22, 0.27, -0.26, 0.0, 0.0, 1.46]);
    }

    #[test]
    fn yaw_quarter_turn_maps_x_to_y() {
        let f = frame_from_pose(&Pose6::from_array([0.0, 0.0, 0.0, 0.0, 0.0, PI / 2.0])).unwrap();
        let v = f.rotation() * Vector3::x();
        assert_relative_eq!(v, Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn rotation_matches_explicit_composition() {
        let o = Vector3::new(0.3, -0.7, 2.1);
        let expected = rz(o.z) * ry(o.y) * rx(o.x);
        assert_relative_eq!(*rotation_from_euler(&o).matrix(), expected, epsilon = 1e-14);
    }

    #[test]
    fn non_finite_pose_rejected() {
        let p = Pose6::from_array([0.0, f64::NAN, 0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(frame_from_pose(&p), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn to_global_cases() {
        let c = Vector7::from_column_slice(&[3.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        assert_eq!(FrameTransform::identity().to_global(&c), c);

        let t = frame_from_pose(&Pose6::from_array([1.0, 2.0, 3.0, 0.0, 0.0, 0.0])).unwrap();
        let g = t.to_global(&Vector7::zeros());
        assert_eq!(g.fixed_rows::<3>(1).into_owned(), Vector3::new(1.0, 2.0, 3.0));

        let pose = Pose6::from_array([0.5, -0.2, 0.1, 0.0, 0.0, PI / 2.0]);
        let y = frame_from_pose(&pose).unwrap();
        let mut local = Vector7::zeros();
        local[1] = 0.1;
        let g = y.to_global(&local);
        let offset = g.fixed_rows::<3>(1) - pose.position;
        assert_relative_eq!(offset, Vector3::new(0.0, 0.1, 0.0), epsilon = 1e-15);
        // block form agrees with the dense product
        assert_relative_eq!(g, y.a() * local + y.b(), epsilon = 1e-15);
    }

    #[test]
    fn slice_dimension_mismatch() {
        let f = FrameTransform::identity();
        assert!(matches!(f.to_global_slice(&[0.0; 6]), Err(Error::InvalidArgument(_))));
        assert!(matches!(f.to_frame_slice(&[0.0; 8]), Err(Error::InvalidArgument(_))));
        assert!(f.to_frame_slice(&[0.0; 7]).is_ok());
    }

    #[test]
    fn frame_origin_maps_to_local_zero() {
        let f = frame_from_pose(&Pose6::from_array([0.22, 0.27, -0.26, 0.0, 0.0, 1.46])).unwrap();
        let local = f.to_frame(&f.b());
        assert!(local.iter().skip(1).all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn roundtrip_thousand_columns() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let pose = Pose6::from_array(std::array::from_fn(|_| rng.random_range(-3.0..3.0)));
            let f = frame_from_pose(&pose).unwrap();
            let c = Vector7::from_fn(|_, _| rng.random_range(-2.0..2.0));
            worst = worst.max((f.to_frame(&f.to_global(&c)) - c).amax());
        }
        assert!(worst < 1e-12, "max error {worst}");
    }

    #[test]
    fn quaternion_examples() {
        assert_eq!(euler_to_quat(&Vector3::zeros()).to_array(), [1.0, 0.0, 0.0, 0.0]);
        // half-angle formula: yaw pi -> (cos(pi/2), 0, 0, sin(pi/2))
        let q = euler_to_quat(&Vector3::new(0.0, 0.0, PI)).to_array();
        assert!(q[0].abs() < 1e-15);
        assert_relative_eq!(q[3].abs(), 1.0, epsilon = 1e-15);
        assert!(q[1].abs() < 1e-15 && q[2].abs() < 1e-15);
    }

    #[test]
    fn quaternion_matrix_roundtrip() {
        let o = Vector3::new(0.4, -1.1, 2.9);
        let q = euler_to_quat(&o);
        let back = UnitQuat::from_rotation(&q.to_rotation());
        for (a, b) in q.to_array().iter().zip(back.to_array()) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        assert!(q.w() >= 0.0);
    }

    #[test]
    fn path_length_examples() {
        let p = Pose6::from_array([0.1, 0.2, 0.3, 0.1, 0.2, 0.3]);
        assert_eq!(path_length(&[p; 10]).unwrap(), (0.0, 0.0));

        let mut q = p;
        q.position.x += 0.1;
        let (t, r) = path_length(&[p, q]).unwrap();
        assert_relative_eq!(t, 0.1, epsilon = 1e-15);
        assert!(r.abs() < 1e-7);

        let a = Pose6::identity();
        let b = Pose6::from_array([0.0, 0.0, 0.0, 0.0, 0.0, PI / 2.0]);
        // q = (cos(pi/4), 0, 0, sin(pi/4)), dot with identity = cos(pi/4)
        let (t, r) = path_length(&[a, b]).unwrap();
        assert_eq!(t, 0.0);
        assert_relative_eq!(r, PI / 2.0, epsilon = 1e-12);

        assert!(matches!(path_length(&[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn canonical_and_unwrap() {
        assert_relative_eq!(canonical_angle(3.0 * PI), PI, epsilon = 1e-12);
        assert_relative_eq!(canonical_angle(-PI), PI, epsilon = 1e-12);
        assert_relative_eq!(canonical_angle(0.5), 0.5);
        let mut a = vec![3.0, -3.0, 3.1];
        unwrap_angles(&mut a);
        assert_relative_eq!(a[1], -3.0 + 2.0 * PI, epsilon = 1e-12);
        assert_relative_eq!(a[2], 3.1, epsilon = 1e-12);
    }

    fn pose_strategy() -> impl Strategy<Value = Pose6> {
        prop::array::uniform6(-4.0f64..4.0).prop_map(Pose6::from_array)
    }

    proptest! {
        #[test]
        fn rotation_block_is_proper(pose in pose_strategy()) {
            let f = frame_from_pose(&pose).unwrap();
            let r = f.rotation();
            prop_assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-9);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn frame_roundtrip(pose in pose_strategy(), c in prop::array::uniform7(-5.0f64..5.0)) {
            let f = frame_from_pose(&pose).unwrap();
            let c = Vector7::from_column_slice(&c);
            prop_assert!((f.to_frame(&f.to_global(&c)) - c).amax() < 1e-12);
        }

        #[test]
        fn path_length_translation_invariant(
            poses in prop::collection::vec(pose_strategy(), 2..12),
            shift in prop::array::uniform3(-2.0f64..2.0),
        ) {
            let shift = Vector3::from_column_slice(&shift);
            let moved: Vec<Pose6> = poses.iter().map(|p| Pose6::new(p.position + shift, p.orientation)).collect();
            let (t0, r0) = path_length(&poses).unwrap();
            let (t1, r1) = path_length(&moved).unwrap();
            prop_assert!((t0 - t1).abs() < 1e-9);
            prop_assert_eq!(r0, r1);
        }

        #[test]
        fn path_length_additive(poses in prop::collection::vec(pose_strategy(), 3..12), split in 1usize..10) {
            let split = split.min(poses.len() - 1);
            let (t, r) = path_length(&poses).unwrap();
            let (ta, ra) = path_length(&poses[..=split]).unwrap();
            let (tb, rb) = path_length(&poses[split..]).unwrap();
            prop_assert!((t - ta - tb).abs() < 1e-9);
            prop_assert!((r - ra - rb).abs() < 1e-9);
        }

        #[test]
        fn angle_ignores_quaternion_sign(a in prop::array::uniform3(-3.0f64..3.0), b in prop::array::uniform3(-3.0f64..3.0)) {
            let qa = euler_to_quat(&Vector3::from_column_slice(&a));
            let qb = euler_to_quat(&Vector3::from_column_slice(&b));
            let flipped = UnitQuat(UnitQuaternion::new_unchecked(-qb.0.into_inner()));
            prop_assert!((qa.angle_to(&qb) - qa.angle_to(&flipped)).abs() < 1e-12);
        }
    }
}
