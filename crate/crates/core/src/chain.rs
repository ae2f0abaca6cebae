//! The linkage model: vertex form, (lengths, angles) form, strong simplicity,
//! and embeddings of partially straightened states.
//!
//! Joints are indexed `1..=n` for a chain with vertices `b0..b(n+1)`; edge `k`
//! joins vertex `k` to vertex `k + 1`. The bend angle at joint `i` is
//! `pi - turn(i)`, where `turn(i)` is the signed left turn in `(-pi, pi)`, so a
//! straight joint sits at exactly `pi`. Bending a joint keeps the subchain
//! containing `b0` fixed and rotates the rest rigidly about the joint.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{overlapping_pairs, point_segment_distance, segment_distance, Aabb, Point, Segment, Tolerance};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("a chain needs at least two vertices, got {0}")]
    TooFewPoints(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("link {index} is degenerate (length {length})")]
    DegenerateLink { index: usize, length: f64 },
    #[error("joint {0} reverses direction (turn of +-pi)")]
    ReversalAngle(usize),
    #[error("bend angle at joint {joint} is {angle}, outside (0, 2pi)")]
    AngleOutOfRange { joint: usize, angle: f64 },
    #[error("expected {expected} bend angles for {links} links, got {got}")]
    LengthMismatch { links: usize, expected: usize, got: usize },
    #[error("chain is not strongly simple: edges {0} and {1} come within clearance")]
    NotStronglySimple(usize, usize),
    #[error("joint {joint} is outside 1..={n}")]
    JointOutOfRange { joint: usize, n: usize },
    #[error("joint {0} is already in the straightened set")]
    IndexInS(usize),
}

/// Placement of `b0` and the direction of the first link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose<T> {
    pub origin: Point<T>,
    /// Radians from the +x axis.
    pub heading: T,
}

impl<T: Scalar> Default for Pose<T> {
    fn default() -> Self {
        Pose { origin: Point::new(T::zero(), T::zero()), heading: T::zero() }
    }
}

/// Set of joint indices in `1..=n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointSet(FixedBitSet);

impl JointSet {
    pub fn empty(n: usize) -> Self {
        JointSet(FixedBitSet::with_capacity(n + 1))
    }

    pub fn full(n: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(n + 1);
        bits.insert_range(1..n + 1);
        JointSet(bits)
    }

    pub fn from_joints(n: usize, joints: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(n);
        for j in joints {
            s.insert(j);
        }
        s
    }

    /// Number of joints in the underlying chain.
    pub fn capacity(&self) -> usize {
        self.0.len() - 1
    }

    #[inline]
    pub fn contains(&self, joint: usize) -> bool {
        self.0.contains(joint)
    }

    /// Panics when `joint` is outside `1..=n`.
    pub fn insert(&mut self, joint: usize) {
        assert!(joint >= 1 && joint <= self.capacity(), "joint {joint} out of range");
        self.0.insert(joint);
    }

    pub fn remove(&mut self, joint: usize) {
        self.0.set(joint, false);
    }

    pub fn with(&self, joint: usize) -> Self {
        let mut s = self.clone();
        s.insert(joint);
        s
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.capacity()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    /// Joints not in the set.
    pub fn complement(&self) -> Self {
        let n = self.capacity();
        JointSet::from_joints(n, (1..=n).filter(|&j| !self.contains(j)))
    }
}

impl fmt::Debug for JointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Embeds a chain from link lengths and bend angles. Each link after the
/// first turns left by `pi - angle` relative to its predecessor.
pub fn embed<T: Scalar>(lengths: &[T], angles: &[T], pose: Pose<T>) -> Vec<Point<T>> {
    assert_eq!(angles.len() + 1, lengths.len(), "need exactly one angle per interior joint");
    let mut pts = Vec::with_capacity(lengths.len() + 1);
    let mut heading = pose.heading;
    let mut at = pose.origin;
    pts.push(at);
    for (k, &len) in lengths.iter().enumerate() {
        if k > 0 {
            heading = wrap_angle(heading + (T::PI() - angles[k - 1]));
        }
        at = at + Point::from_angle(heading) * len;
        pts.push(at);
    }
    pts
}

/// Maps an angle into `(-pi, pi]`. Values already in range are untouched.
pub(crate) fn wrap_angle<T: Scalar>(a: T) -> T {
    let pi = T::PI();
    if a > pi || a <= -pi {
        let tau = pi + pi;
        let w = a - tau * (a / tau).round();
        if w <= -pi {
            w + tau
        } else {
            w
        }
    } else {
        a
    }
}

/// Separation measure for edges `e1 < e2` of a vertex list. Adjacent edges
/// share a vertex, so for them this is the distance of each far endpoint to
/// the other edge; otherwise it is the segment-to-segment distance.
pub(crate) fn edge_pair_distance<T: Scalar>(points: &[Point<T>], e1: usize, e2: usize) -> T {
    debug_assert!(e1 < e2);
    let s1 = Segment::new(points[e1], points[e1 + 1]);
    let s2 = Segment::new(points[e2], points[e2 + 1]);
    if e2 == e1 + 1 {
        point_segment_distance(s1.a, &s2).min(point_segment_distance(s2.b, &s1))
    } else {
        segment_distance(&s1, &s2)
    }
}

/// First pair of edges violating strong simplicity, by exhaustive pairing.
pub fn first_violation_naive<T: Scalar>(points: &[Point<T>], tol: &Tolerance<T>) -> Option<(usize, usize)> {
    let edges = points.len().saturating_sub(1);
    for e1 in 0..edges {
        for e2 in e1 + 1..edges {
            if edge_pair_distance(points, e1, e2) < tol.clearance {
                return Some((e1, e2));
            }
        }
    }
    None
}

/// Some pair of edges violating strong simplicity, found with a
/// sweep-and-prune broad phase. Agrees with [`first_violation_naive`] on
/// whether a violation exists; the reported pair may differ.
pub fn find_violation<T: Scalar>(points: &[Point<T>], tol: &Tolerance<T>) -> Option<(usize, usize)> {
    let edges = points.len().saturating_sub(1);
    if edges < 2 {
        return None;
    }
    let boxes: Vec<Aabb<T>> = (0..edges).map(|k| Aabb::of_points(&points[k..k + 2]).inflate(tol.clearance)).collect();
    let mut found = None;
    overlapping_pairs(&boxes, |e1, e2| {
        if edge_pair_distance(points, e1, e2) < tol.clearance {
            found = Some((e1, e2));
            true
        } else {
            false
        }
    });
    found
}

/// Every pair of non-adjacent edges is at least `clearance` apart, and
/// adjacent edges meet only at their shared vertex.
pub fn is_strongly_simple<T: Scalar>(points: &[Point<T>], tol: &Tolerance<T>) -> bool {
    find_violation(points, tol).is_none()
}

/// Signed left turn at the middle of three points, in `[-pi, pi]`.
fn turn_at<T: Scalar>(prev: Point<T>, at: Point<T>, next: Point<T>) -> T {
    let d0 = at - prev;
    let d1 = next - at;
    d0.cross(d1).atan2(d0.dot(d1))
}

/// A validated, strongly simple planar chain.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain<T> {
    vertices: Vec<Point<T>>,
    lengths: Vec<T>,
    angles: Vec<T>,
    pose: Pose<T>,
    tol: Tolerance<T>,
}

impl<T: Scalar> Chain<T> {
    pub fn from_vertices(points: &[Point<T>], tol: Tolerance<T>) -> Result<Self, ChainError> {
        if points.len() < 2 {
            return Err(ChainError::TooFewPoints(points.len()));
        }
        if let Some(k) = points.iter().position(|p| !p.is_finite()) {
            return Err(ChainError::NonFinite(k));
        }
        let lengths: Vec<T> = points.windows(2).map(|w| w[0].dist(w[1])).collect();
        if let Some(index) = lengths.iter().position(|&l| l < tol.clearance) {
            return Err(ChainError::DegenerateLink { index, length: lengths[index].to_f64().unwrap_or(0.0) });
        }
        let mut angles = Vec::with_capacity(points.len() - 2);
        for i in 1..points.len() - 1 {
            let turn = turn_at(points[i - 1], points[i], points[i + 1]);
            if turn.abs() >= T::PI() {
                return Err(ChainError::ReversalAngle(i));
            }
            angles.push(T::PI() - turn);
        }
        if let Some((e1, e2)) = find_violation(points, &tol) {
            return Err(ChainError::NotStronglySimple(e1, e2));
        }
        let pose = Pose { origin: points[0], heading: (points[1] - points[0]).angle() };
        Ok(Chain { vertices: points.to_vec(), lengths, angles, pose, tol })
    }

    pub fn from_lengths_angles(
        lengths: &[T],
        angles: &[T],
        pose: Pose<T>,
        tol: Tolerance<T>,
    ) -> Result<Self, ChainError> {
        if lengths.is_empty() {
            return Err(ChainError::TooFewPoints(0));
        }
        if angles.len() + 1 != lengths.len() {
            return Err(ChainError::LengthMismatch {
                links: lengths.len(),
                expected: lengths.len() - 1,
                got: angles.len(),
            });
        }
        if let Some(index) = lengths.iter().position(|&l| !(l.is_finite() && l >= tol.clearance)) {
            return Err(ChainError::DegenerateLink { index, length: lengths[index].to_f64().unwrap_or(f64::NAN) });
        }
        let tau = T::PI() + T::PI();
        if let Some(k) = angles.iter().position(|&a| !(a > T::zero() && a < tau)) {
            return Err(ChainError::AngleOutOfRange { joint: k + 1, angle: angles[k].to_f64().unwrap_or(f64::NAN) });
        }
        if !(pose.origin.is_finite() && pose.heading.is_finite()) {
            return Err(ChainError::NonFinite(0));
        }
        let vertices = embed(lengths, angles, pose);
        if let Some(k) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(ChainError::NonFinite(k));
        }
        if let Some((e1, e2)) = find_violation(&vertices, &tol) {
            return Err(ChainError::NotStronglySimple(e1, e2));
        }
        Ok(Chain { vertices, lengths: lengths.to_vec(), angles: angles.to_vec(), pose, tol })
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn lengths(&self) -> &[T] {
        &self.lengths
    }

    /// Bend angles; entry `k` belongs to joint `k + 1`.
    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn pose(&self) -> Pose<T> {
        self.pose
    }

    pub fn tolerance(&self) -> &Tolerance<T> {
        &self.tol
    }

    /// Number of joints `n`.
    pub fn joint_count(&self) -> usize {
        self.angles.len()
    }

    /// Original bend angle of joint `i` (1-based).
    pub fn angle(&self, joint: usize) -> T {
        self.angles[joint - 1]
    }

    pub fn total_length(&self) -> T {
        self.lengths.iter().fold(T::zero(), |acc, &l| acc + l)
    }

    pub fn check_joint(&self, joint: usize) -> Result<(), ChainError> {
        let n = self.joint_count();
        if joint == 0 || joint > n {
            Err(ChainError::JointOutOfRange { joint, n })
        } else {
            Ok(())
        }
    }

    /// Angles of `P(S)`: `pi` on `straightened`, original elsewhere.
    pub fn state_angles(&self, straightened: &JointSet) -> Vec<T> {
        self.angles.iter().enumerate().map(|(k, &a)| if straightened.contains(k + 1) { T::PI() } else { a }).collect()
    }

    /// The partially straightened chain `P(S)`. The result need not be simple.
    pub fn state_embedding(&self, straightened: &JointSet) -> FoldState<'_, T> {
        debug_assert_eq!(straightened.capacity(), self.joint_count());
        let embedding = embed(&self.lengths, &self.state_angles(straightened), self.pose);
        FoldState { base: self, straightened: straightened.clone(), embedding }
    }

    /// `P(S; i, theta)`: joints in `S` straight, joint `i` at `theta`.
    pub fn state_at_angle(&self, straightened: &JointSet, joint: usize, theta: T) -> Result<Vec<Point<T>>, ChainError> {
        self.check_joint(joint)?;
        if straightened.contains(joint) {
            return Err(ChainError::IndexInS(joint));
        }
        let tau = T::PI() + T::PI();
        if !(theta > T::zero() && theta < tau) {
            return Err(ChainError::AngleOutOfRange { joint, angle: theta.to_f64().unwrap_or(f64::NAN) });
        }
        let mut angles = self.state_angles(straightened);
        angles[joint - 1] = theta;
        Ok(embed(&self.lengths, &angles, self.pose))
    }
}

/// A chain together with a set of straightened joints and its embedding.
#[derive(Clone, Debug)]
pub struct FoldState<'a, T> {
    pub base: &'a Chain<T>,
    pub straightened: JointSet,
    pub embedding: Vec<Point<T>>,
}

impl<T: Scalar> FoldState<'_, T> {
    /// Current angle at `joint`.
    pub fn joint_angle(&self, joint: usize) -> T {
        if self.straightened.contains(joint) {
            T::PI()
        } else {
            self.base.angle(joint)
        }
    }

    pub fn is_strongly_simple(&self) -> bool {
        is_strongly_simple(&self.embedding, self.base.tolerance())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Joints are bent from their angle to `pi`.
    Straighten,
    /// Joints are bent from `pi` to their angle, starting from the straight wire.
    Form,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0:?} is not a permutation of 1..={1}")]
pub struct NotAPermutation(pub Vec<usize>, pub usize);

/// An ordering of all joints, read in `direction`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FoldPlan {
    pub order: Vec<usize>,
    pub direction: Direction,
}

impl FoldPlan {
    pub fn new(order: Vec<usize>, direction: Direction, n: usize) -> Result<Self, NotAPermutation> {
        let mut seen = vec![false; n + 1];
        let ok = order.len() == n
            && order.iter().all(|&j| {
                let fresh = (1..=n).contains(&j) && !seen[j];
                if fresh {
                    seen[j] = true;
                }
                fresh
            });
        if ok {
            Ok(FoldPlan { order, direction })
        } else {
            Err(NotAPermutation(order, n))
        }
    }

    pub fn straighten(order: Vec<usize>, n: usize) -> Result<Self, NotAPermutation> {
        Self::new(order, Direction::Straighten, n)
    }

    /// The same physical sequence read in the opposite direction.
    pub fn reversed(&self) -> Self {
        let order = self.order.iter().rev().copied().collect();
        let direction = match self.direction {
            Direction::Straighten => Direction::Form,
            Direction::Form => Direction::Straighten,
        };
        FoldPlan { order, direction }
    }

    pub fn to_straighten(&self) -> Self {
        match self.direction {
            Direction::Straighten => self.clone(),
            Direction::Form => self.reversed(),
        }
    }

    pub fn to_form(&self) -> Self {
        match self.direction {
            Direction::Form => self.clone(),
            Direction::Straighten => self.reversed(),
        }
    }
}
