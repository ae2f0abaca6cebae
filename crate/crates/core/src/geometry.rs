//! Planar primitives and clearance-aware proximity predicates.
//!
//! Every predicate here answers "closer than the clearance?" rather than
//! "intersecting?": touching within [`Tolerance::clearance`] is a collision.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::Scalar;

/// A point (or free vector) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

// Serialized as `[x, y]`.
impl<T: Serialize> Serialize for Point<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [&self.x, &self.y].serialize(s)
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Point<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y] = <[T; 2]>::deserialize(d)?;
        Ok(Point { x, y })
    }
}

impl<T> From<[T; 2]> for Point<T> {
    fn from([x, y]: [T; 2]) -> Self {
        Point { x, y }
    }
}

impl<T> From<Point<T>> for [T; 2] {
    fn from(p: Point<T>) -> Self {
        [p.x, p.y]
    }
}

impl<T: Scalar> Point<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    /// Unit vector at `angle` radians from the +x axis.
    #[inline]
    pub fn from_angle(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Point { x: c, y: s }
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product.
    #[inline]
    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    /// Polar angle in (-pi, pi].
    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn lerp(self, o: Self, t: T) -> Self {
        self + (o - self) * t
    }
}

impl<T: Scalar> Add for Point<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Point { x: self.x + o.x, y: self.y + o.y }
    }
}

impl<T: Scalar> Sub for Point<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Point { x: self.x - o.x, y: self.y - o.y }
    }
}

impl<T: Scalar> Mul<T> for Point<T> {
    type Output = Self;
    #[inline]
    fn mul(self, k: T) -> Self {
        Point { x: self.x * k, y: self.y * k }
    }
}

impl<T: Scalar> Neg for Point<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Point { x: -self.x, y: -self.y }
    }
}

/// Closed line segment from `a` to `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment<T> {
    pub a: Point<T>,
    pub b: Point<T>,
}

impl<T: Scalar> Segment<T> {
    #[inline]
    pub fn new(a: Point<T>, b: Point<T>) -> Self {
        Segment { a, b }
    }

    /// Like [`Segment::new`] but rejects zero-length segments.
    pub fn try_new(a: Point<T>, b: Point<T>) -> Option<Self> {
        (a.dist(b) > T::zero()).then_some(Segment { a, b })
    }

    #[inline]
    pub fn direction(&self) -> Point<T> {
        self.b - self.a
    }

    #[inline]
    pub fn length(&self) -> T {
        self.a.dist(self.b)
    }

    #[inline]
    pub fn at(&self, t: T) -> Point<T> {
        self.a.lerp(self.b, t)
    }

    /// Sub-segment between parameters `t0` and `t1`.
    #[inline]
    pub fn slice(&self, t0: T, t1: T) -> Self {
        Segment { a: self.at(t0), b: self.at(t1) }
    }

    pub fn bbox(&self) -> Aabb<T> {
        Aabb::of_points(&[self.a, self.b])
    }
}

/// Circular arc around `center`, starting at polar angle `start_angle` and
/// turning by `sweep` radians (counterclockwise when positive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc<T> {
    pub center: Point<T>,
    pub radius: T,
    pub start_angle: T,
    pub sweep: T,
}

impl<T: Scalar> Arc<T> {
    pub fn new(center: Point<T>, radius: T, start_angle: T, sweep: T) -> Self {
        debug_assert!(radius > T::zero());
        debug_assert!(sweep != T::zero() && sweep.abs() < T::PI() + T::PI());
        Arc { center, radius, start_angle, sweep }
    }

    /// Arc traced by `start` when rotated about `center` by `sweep`.
    pub fn traced_by(center: Point<T>, start: Point<T>, sweep: T) -> Self {
        let v = start - center;
        Arc::new(center, v.norm(), v.angle(), sweep)
    }

    #[inline]
    pub fn point_at_angle(&self, phi: T) -> Point<T> {
        self.center + Point::from_angle(phi) * self.radius
    }

    pub fn start_point(&self) -> Point<T> {
        self.point_at_angle(self.start_angle)
    }

    pub fn end_point(&self) -> Point<T> {
        self.point_at_angle(self.start_angle + self.sweep)
    }

    /// Whether the polar direction `phi` (about the center) lies in the
    /// angular range covered by the arc.
    pub fn contains_angle(&self, phi: T) -> bool {
        let tau = T::PI() + T::PI();
        let offset = if self.sweep > T::zero() { phi - self.start_angle } else { self.start_angle - phi };
        let mut delta = offset % tau;
        if delta < T::zero() {
            delta = delta + tau;
        }
        delta <= self.sweep.abs()
    }
}

/// Global minimum-separation tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance<T> {
    pub clearance: T,
}

impl<T: Scalar> Tolerance<T> {
    /// Returns `None` unless `clearance` is finite and positive.
    pub fn new(clearance: T) -> Option<Self> {
        (clearance.is_finite() && clearance > T::zero()).then_some(Tolerance { clearance })
    }
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Tolerance { clearance: T::default_clearance() }
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb<T> {
    pub min: Point<T>,
    pub max: Point<T>,
}

impl<T: Scalar> Aabb<T> {
    pub fn of_points(points: &[Point<T>]) -> Self {
        let mut min = points[0];
        let mut max = points[0];
        for p in &points[1..] {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Aabb { min, max }
    }

    pub fn inflate(self, by: T) -> Self {
        let d = Point::new(by, by);
        Aabb { min: self.min - d, max: self.max + d }
    }

    pub fn union(self, o: Self) -> Self {
        Aabb {
            min: Point::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Point::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }

    #[inline]
    pub fn overlaps(&self, o: &Self) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }
}

/// Orientation of `r` relative to the directed line `p -> q`: `+1` for a
/// left turn, `-1` for a right turn, `0` when one of `q`, `r` lies within
/// clearance of the line through `p` and the other (or when either equals
/// `p`). The test is symmetric in `q` and `r`, so swapping them negates it.
pub fn orient<T: Scalar>(p: Point<T>, q: Point<T>, r: Point<T>, tol: &Tolerance<T>) -> i8 {
    let (pq, pr) = (q - p, r - p);
    let len = pq.norm().max(pr.norm());
    if len == T::zero() {
        return 0;
    }
    let height = pq.cross(pr) / len;
    if height > tol.clearance {
        1
    } else if height < -tol.clearance {
        -1
    } else {
        0
    }
}

/// Euclidean distance from `p` to the closed segment `s`.
pub fn point_segment_distance<T: Scalar>(p: Point<T>, s: &Segment<T>) -> T {
    let d = s.direction();
    let len2 = d.dot(d);
    if len2 == T::zero() {
        return p.dist(s.a);
    }
    let t = ((p - s.a).dot(d) / len2).max(T::zero()).min(T::one());
    p.dist(s.at(t))
}

/// Whether the interiors of `s1` and `s2` properly cross (sign test on the raw
/// cross products, no tolerance).
fn properly_cross<T: Scalar>(s1: &Segment<T>, s2: &Segment<T>) -> bool {
    let d1 = s1.direction();
    let d2 = s2.direction();
    let o1 = d1.cross(s2.a - s1.a);
    let o2 = d1.cross(s2.b - s1.a);
    let o3 = d2.cross(s1.a - s2.a);
    let o4 = d2.cross(s1.b - s2.a);
    let z = T::zero();
    ((o1 > z && o2 < z) || (o1 < z && o2 > z)) && ((o3 > z && o4 < z) || (o3 < z && o4 > z))
}

/// Minimum distance between two closed segments; `0` when they cross.
pub fn segment_distance<T: Scalar>(s1: &Segment<T>, s2: &Segment<T>) -> T {
    if properly_cross(s1, s2) {
        return T::zero();
    }
    point_segment_distance(s1.a, s2)
        .min(point_segment_distance(s1.b, s2))
        .min(point_segment_distance(s2.a, s1))
        .min(point_segment_distance(s2.b, s1))
}

/// True iff the two segments come closer than the clearance.
pub fn seg_seg_close<T: Scalar>(s1: &Segment<T>, s2: &Segment<T>, tol: &Tolerance<T>) -> bool {
    segment_distance(s1, s2) < tol.clearance
}

/// Distance from `p` to the arc (as a curve, endpoints included).
pub fn point_arc_distance<T: Scalar>(p: Point<T>, arc: &Arc<T>) -> T {
    let v = p - arc.center;
    let rho = v.norm();
    if rho > T::zero() && arc.contains_angle(v.angle()) {
        return (rho - arc.radius).abs();
    }
    p.dist(arc.start_point()).min(p.dist(arc.end_point()))
}

/// Minimum distance between a closed segment and an arc.
///
/// The minimum is attained either at an endpoint of one curve, at a common
/// point, or at the foot of the perpendicular from the center onto the
/// segment paired with the arc point on the same ray.
pub fn segment_arc_distance<T: Scalar>(s: &Segment<T>, arc: &Arc<T>) -> T {
    let mut best = point_arc_distance(s.a, arc)
        .min(point_arc_distance(s.b, arc))
        .min(point_segment_distance(arc.start_point(), s))
        .min(point_segment_distance(arc.end_point(), s));

    let d = s.direction();
    let len2 = d.dot(d);
    if len2 == T::zero() {
        return best;
    }
    let w = s.a - arc.center;
    // |w + t d|^2 = r^2
    let half_b = w.dot(d);
    let c = w.dot(w) - arc.radius * arc.radius;
    let disc = half_b * half_b - len2 * c;
    if disc >= T::zero() {
        let root = disc.sqrt();
        for t in [(-half_b - root) / len2, (-half_b + root) / len2] {
            if t >= T::zero() && t <= T::one() && arc.contains_angle((s.at(t) - arc.center).angle()) {
                return T::zero();
            }
        }
    }
    let t_foot = -half_b / len2;
    if t_foot > T::zero() && t_foot < T::one() {
        let foot = s.at(t_foot) - arc.center;
        let rho = foot.norm();
        if rho > T::zero() && arc.contains_angle(foot.angle()) {
            best = best.min((arc.radius - rho).abs());
        }
    }
    best
}

/// True iff the segment comes closer than the clearance to the arc
/// (tangential contact included).
pub fn seg_arc_close<T: Scalar>(s: &Segment<T>, arc: &Arc<T>, tol: &Tolerance<T>) -> bool {
    segment_arc_distance(s, arc) < tol.clearance
}

/// Rotates `p` about `center` by `angle` radians (counterclockwise positive).
pub fn rotate_about<T: Scalar>(p: Point<T>, center: Point<T>, angle: T) -> Point<T> {
    let (s, c) = angle.sin_cos();
    let v = p - center;
    center + Point::new(v.x * c - v.y * s, v.x * s + v.y * c)
}

/// Sweep-and-prune over bounding boxes: calls `visit(i, j)` (with `i < j`)
/// for every pair whose boxes overlap, stopping early when `visit` returns
/// `true`. Returns whether it stopped early.
pub(crate) fn overlapping_pairs<T: Scalar>(boxes: &[Aabb<T>], mut visit: impl FnMut(usize, usize) -> bool) -> bool {
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| boxes[a].min.x.partial_cmp(&boxes[b].min.x).expect("finite boxes"));
    let mut active: Vec<usize> = Vec::new();
    for &k in &order {
        let bk = &boxes[k];
        active.retain(|&a| boxes[a].max.x >= bk.min.x);
        for &a in &active {
            if boxes[a].overlaps(bk) && visit(a.min(k), a.max(k)) {
                return true;
            }
        }
        active.push(k);
    }
    false
}
