//! Can one joint be completely straightened from a given state?
//!
//! While joint `i` opens to `pi`, every point of the moving subchain travels
//! on an arc about `b_i`. Along a piece of the moving subchain between
//! consecutive vertices and perpendicular feet of the pivot, the distance to
//! the pivot is monotone, so the region swept by that piece is bounded by two
//! arcs and its start and end positions. The fixed subchain is connected and
//! the start position is already clear, so the bend is collision-free exactly
//! when (1) no arc traced by a vertex or foot comes within clearance of the
//! fixed subchain and (2) the final configuration is strongly simple.
//!
//! [`foldable_sampled`] decides the same question by brute-force sampling of
//! intermediate angles and is kept as an independent check.

use serde::Serialize;
use thiserror::Error;

use crate::chain::{edge_pair_distance, find_violation, ChainError, FoldState};
use crate::geometry::{
    overlapping_pairs, point_segment_distance, segment_arc_distance, Aabb, Arc, Point, Segment, Tolerance,
};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeasibilityError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("state is not strongly simple: edges {0} and {1} come within clearance")]
    StateNotSimple(usize, usize),
    #[error("sample count must be at least 2, got {0}")]
    TooFewSamples(usize),
}

/// Region swept by the moving subchain during one complete bend.
#[derive(Clone, Debug, PartialEq)]
pub struct SweptRegion<T> {
    pub pivot: Point<T>,
    /// Signed rotation applied to the moving subchain (from its current angle to `pi`).
    pub rotation_sweep: T,
    /// Vertices of the moving subchain (pivot excluded) and the pivot's
    /// perpendicular feet on its edges, in chain order.
    pub sample_points: Vec<Point<T>>,
    /// One arc per sample point, all centered at the pivot.
    pub arcs: Vec<Arc<T>>,
    /// Moving subchain after the bend, starting at the pivot.
    pub moved_subchain: Vec<Point<T>>,
}

/// Why a bend is infeasible.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Collision<T> {
    /// The arc traced by `source` comes within clearance of fixed edge `edge`.
    ArcMeetsEdge { arc: Arc<T>, source: Point<T>, edge: usize, segment: Segment<T>, distance: T },
    /// After the bend, moving edge `moving_edge` is too close to fixed edge `fixed_edge`.
    FinalOverlap { fixed_edge: usize, moving_edge: usize, fixed: Segment<T>, moving: Segment<T>, distance: T },
    /// An intermediate configuration of the sampling check is not strongly simple.
    SampledOverlap { angle: T, edges: (usize, usize) },
}

impl<T: Scalar> Collision<T> {
    /// Re-evaluates the offending pair with the geometry kernel.
    pub fn violates(&self, tol: &Tolerance<T>) -> bool {
        match self {
            Collision::ArcMeetsEdge { arc, segment, .. } => segment_arc_distance(segment, arc) < tol.clearance,
            Collision::FinalOverlap { fixed_edge, moving_edge, fixed, moving, .. } => {
                let d = if moving_edge == &(fixed_edge + 1) {
                    point_segment_distance(fixed.a, moving).min(point_segment_distance(moving.b, fixed))
                } else {
                    crate::geometry::segment_distance(fixed, moving)
                };
                d < tol.clearance
            }
            Collision::SampledOverlap { .. } => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldVerdict<T> {
    pub joint: usize,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Collision<T>>,
}

impl<T> FoldVerdict<T> {
    pub fn feasible(joint: usize) -> Self {
        FoldVerdict { joint, feasible: true, witness: None }
    }

    pub fn blocked(joint: usize, why: Collision<T>) -> Self {
        FoldVerdict { joint, feasible: false, witness: Some(why) }
    }
}

/// Which pair enumeration decides the two conditions. Both produce the same
/// verdict and witness. `Naive` visits every pair, rejecting far ones with
/// an O(1) bound; `Pruned` never visits them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Route {
    #[default]
    Pruned,
    Naive,
}

/// Perpendicular feet of `pivot` that land strictly inside an edge of
/// `subchain` (more than the clearance away from both endpoints).
pub fn projection_points<T: Scalar>(pivot: Point<T>, subchain: &[Point<T>], tol: &Tolerance<T>) -> Vec<Point<T>> {
    subchain.windows(2).filter_map(|w| interior_foot(pivot, w[0], w[1], tol)).collect()
}

fn interior_foot<T: Scalar>(pivot: Point<T>, a: Point<T>, b: Point<T>, tol: &Tolerance<T>) -> Option<Point<T>> {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == T::zero() {
        return None;
    }
    let t = (pivot - a).dot(d) / len2;
    let len = len2.sqrt();
    (t * len > tol.clearance && (T::one() - t) * len > tol.clearance).then(|| a + d * t)
}

/// The set U for a moving subchain: its vertices and the interior feet of
/// the pivot, in chain order. Points within clearance of the pivot or of the
/// previously kept point are dropped.
pub fn sample_points<T: Scalar>(pivot: Point<T>, subchain: &[Point<T>], tol: &Tolerance<T>) -> Vec<Point<T>> {
    let mut out: Vec<Point<T>> = Vec::with_capacity(subchain.len() * 2);
    let keep = |q: Point<T>, out: &mut Vec<Point<T>>| {
        if q.dist(pivot) >= tol.clearance && out.last().is_none_or(|l| l.dist(q) >= tol.clearance) {
            out.push(q);
        }
    };
    for (k, &v) in subchain.iter().enumerate() {
        keep(v, &mut out);
        if let Some(&next) = subchain.get(k + 1) {
            if let Some(f) = interior_foot(pivot, v, next, tol) {
                keep(f, &mut out);
            }
        }
    }
    out
}

/// Builds the swept region for straightening `joint`. Returns `None` when
/// the joint is already straight (empty sweep).
pub fn swept_region<T: Scalar>(state: &FoldState<'_, T>, joint: usize) -> Option<SweptRegion<T>> {
    let sweep = state.joint_angle(joint) - T::PI();
    if sweep == T::zero() {
        return None;
    }
    let tol = state.base.tolerance();
    let pivot = state.embedding[joint];
    let sample_points = sample_points(pivot, &state.embedding[joint..], tol);
    let arcs = sample_points.iter().map(|&u| Arc::traced_by(pivot, u, sweep)).collect();
    let after = state.base.state_embedding(&state.straightened.with(joint));
    Some(SweptRegion {
        pivot,
        rotation_sweep: sweep,
        sample_points,
        arcs,
        moved_subchain: after.embedding[joint..].to_vec(),
    })
}

/// Decides whether `joint` can be straightened from `state`.
pub fn is_foldable<T: Scalar>(state: &FoldState<'_, T>, joint: usize) -> Result<FoldVerdict<T>, FeasibilityError> {
    check_preconditions(state, joint)?;
    Ok(fold_verdict(state, joint, Route::Pruned))
}

fn check_preconditions<T: Scalar>(state: &FoldState<'_, T>, joint: usize) -> Result<(), FeasibilityError> {
    state.base.check_joint(joint)?;
    if state.straightened.contains(joint) {
        return Err(ChainError::IndexInS(joint).into());
    }
    if let Some((e1, e2)) = find_violation(&state.embedding, state.base.tolerance()) {
        return Err(FeasibilityError::StateNotSimple(e1, e2));
    }
    Ok(())
}

/// The foldability decision without precondition checks. `state` must be
/// strongly simple and `joint` must be a bent joint of it.
pub fn fold_verdict<T: Scalar>(state: &FoldState<'_, T>, joint: usize, route: Route) -> FoldVerdict<T> {
    let Some(region) = swept_region(state, joint) else {
        return FoldVerdict::feasible(joint);
    };
    let tol = state.base.tolerance();
    let fixed = &state.embedding[..=joint];
    if let Some(hit) = arcs_against_fixed(&region, fixed, tol, route) {
        return FoldVerdict::blocked(joint, hit);
    }
    let mut after = fixed.to_vec();
    after.extend_from_slice(&region.moved_subchain[1..]);
    if let Some(hit) = final_overlap(&after, joint, tol, route) {
        return FoldVerdict::blocked(joint, hit);
    }
    FoldVerdict::feasible(joint)
}

/// Condition (1): scans fixed edges in order and, per edge, arcs by
/// increasing radius; reports the first close pair.
fn arcs_against_fixed<T: Scalar>(
    region: &SweptRegion<T>,
    fixed: &[Point<T>],
    tol: &Tolerance<T>,
    route: Route,
) -> Option<Collision<T>> {
    let mut by_radius: Vec<usize> = (0..region.arcs.len()).collect();
    by_radius.sort_by(|&a, &b| region.arcs[a].radius.partial_cmp(&region.arcs[b].radius).expect("finite radius"));
    let radii: Vec<T> = by_radius.iter().map(|&k| region.arcs[k].radius).collect();
    let slack = tol.clearance + tol.clearance;

    for (edge, w) in fixed.windows(2).enumerate() {
        let segment = Segment::new(w[0], w[1]);
        let near = point_segment_distance(region.pivot, &segment) - slack;
        let far = region.pivot.dist(w[0]).max(region.pivot.dist(w[1])) + slack;
        let range = match route {
            Route::Naive => 0..radii.len(),
            Route::Pruned => radii.partition_point(|&r| r < near)..radii.partition_point(|&r| r <= far),
        };
        for &k in &by_radius[range] {
            let arc = region.arcs[k];
            if arc.radius < near || arc.radius > far {
                continue;
            }
            let distance = segment_arc_distance(&segment, &arc);
            if distance < tol.clearance {
                return Some(Collision::ArcMeetsEdge { arc, source: region.sample_points[k], edge, segment, distance });
            }
        }
    }
    None
}

/// Condition (2) on the final vertex list: fixed edges `0..joint` against
/// moving edges `joint..`. Reports the lexicographically smallest
/// `(fixed, moving)` violating pair.
fn final_overlap<T: Scalar>(
    after: &[Point<T>],
    joint: usize,
    tol: &Tolerance<T>,
    route: Route,
) -> Option<Collision<T>> {
    let edges = after.len() - 1;
    let mut worst: Option<(usize, usize, T)> = None;
    let mut consider = |f: usize, m: usize| {
        let d = edge_pair_distance(after, f, m);
        if d < tol.clearance && worst.is_none_or(|(wf, wm, _)| (f, m) < (wf, wm)) {
            worst = Some((f, m, d));
        }
    };
    let boxes: Vec<Aabb<T>> = (0..edges).map(|k| Aabb::of_points(&after[k..k + 2]).inflate(tol.clearance)).collect();
    match route {
        Route::Naive => {
            for f in 0..joint {
                for m in joint..edges {
                    if boxes[f].overlaps(&boxes[m]) {
                        consider(f, m);
                    }
                }
            }
        }
        Route::Pruned => {
            overlapping_pairs(&boxes, |a, b| {
                if a < joint && b >= joint {
                    consider(a, b);
                }
                false
            });
        }
    }
    worst.map(|(f, m, distance)| Collision::FinalOverlap {
        fixed_edge: f,
        moving_edge: m,
        fixed: Segment::new(after[f], after[f + 1]),
        moving: Segment::new(after[m], after[m + 1]),
        distance,
    })
}

/// Smallest separation between the moving and fixed subchains over the
/// whole bend, measured the same way the predicate measures it. Feasible
/// bends have a value of at least the clearance.
pub fn motion_clearance<T: Scalar>(state: &FoldState<'_, T>, joint: usize) -> T {
    let fixed = &state.embedding[..=joint];
    let mut best = T::infinity();
    let after: Vec<Point<T>> = match swept_region(state, joint) {
        Some(region) => {
            for w in fixed.windows(2) {
                let segment = Segment::new(w[0], w[1]);
                for arc in &region.arcs {
                    best = best.min(segment_arc_distance(&segment, arc));
                }
            }
            fixed.iter().chain(&region.moved_subchain[1..]).copied().collect()
        }
        None => state.embedding.clone(),
    };
    for f in 0..joint {
        for m in joint..after.len() - 1 {
            best = best.min(edge_pair_distance(&after, f, m));
        }
    }
    best
}

/// Brute-force check: the chain is strongly simple at each of `samples + 1`
/// evenly spaced angles from the joint's current angle to `pi`, inclusive.
pub fn foldable_sampled<T: Scalar>(
    state: &FoldState<'_, T>,
    joint: usize,
    samples: usize,
) -> Result<bool, FeasibilityError> {
    Ok(sampled_verdict(state, joint, samples)?.feasible)
}

/// [`foldable_sampled`] with the first failing sample as witness.
pub fn sampled_verdict<T: Scalar>(
    state: &FoldState<'_, T>,
    joint: usize,
    samples: usize,
) -> Result<FoldVerdict<T>, FeasibilityError> {
    if samples < 2 {
        return Err(FeasibilityError::TooFewSamples(samples));
    }
    check_preconditions(state, joint)?;
    let start = state.joint_angle(joint);
    let span = T::PI() - start;
    let k_total = T::from_usize(samples).expect("sample count");
    let tol = state.base.tolerance();
    for k in 0..=samples {
        let angle =
            if k == samples { T::PI() } else { start + span * (T::from_usize(k).expect("sample index") / k_total) };
        let pts = state.base.state_at_angle(&state.straightened, joint, angle)?;
        if let Some(edges) = find_violation(&pts, tol) {
            return Ok(FoldVerdict::blocked(joint, Collision::SampledOverlap { angle, edges }));
        }
    }
    Ok(FoldVerdict::feasible(joint))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{Chain, JointSet};

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    fn chain(v: &[(f64, f64)]) -> Chain<f64> {
        let pts: Vec<_> = v.iter().map(|&(x, y)| p(x, y)).collect();
        Chain::from_vertices(&pts, Tolerance::default()).unwrap()
    }

    #[test]
    fn projection_examples() {
        let tol = Tolerance::default();
        let o = p(0., 0.);
        assert!(projection_points(o, &[p(1., 1.), p(3., 1.)], &tol).is_empty());
        assert_eq!(sample_points(o, &[p(1., 1.), p(3., 1.)], &tol), vec![p(1., 1.), p(3., 1.)]);
        assert_eq!(projection_points(o, &[p(-1., 1.), p(1., 1.)], &tol), vec![p(0., 1.)]);
        let mut u = sample_points(o, &[p(-1., 1.), p(1., 1.), p(1., 3.)], &tol);
        let mut expected = vec![p(-1., 1.), p(1., 1.), p(1., 3.), p(0., 1.)];
        let key = |q: &Point<f64>| (q.x.to_bits(), q.y.to_bits());
        u.sort_by_key(key);
        expected.sort_by_key(key);
        assert_eq!(u, expected);
    }

    #[test]
    fn l_chain_is_foldable() {
        let c = chain(&[(0., 0.), (1., 0.), (1., 1.)]);
        let s = c.state_embedding(&JointSet::empty(1));
        let v = is_foldable(&s, 1).unwrap();
        assert!(v.feasible);
        assert!(v.witness.is_none());
        assert!(foldable_sampled(&s, 1, 16).unwrap());
        let region = swept_region(&s, 1).unwrap();
        assert!(region.moved_subchain[1].dist(p(2., 0.)) < 1e-12);
    }

    #[test]
    fn straight_joint_is_noop() {
        let c = chain(&[(0., 0.), (1., 0.), (2., 0.), (2., 1.)]);
        let s = c.state_embedding(&JointSet::empty(2));
        assert!(swept_region(&s, 1).is_none());
        assert!(is_foldable(&s, 1).unwrap().feasible);
        let after = c.state_embedding(&JointSet::from_joints(2, [1]));
        assert_eq!(after.embedding, s.embedding);
    }

    #[test]
    fn u_shape_first_joint() {
        let c = chain(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        let s = c.state_embedding(&JointSet::empty(2));
        assert!(is_foldable(&s, 1).unwrap().feasible);
        assert!(foldable_sampled(&s, 1, 256).unwrap());
        // b3 travels from (0,1) to (2,1) on the radius-sqrt(2) circle about (1,0)
        let region = swept_region(&s, 1).unwrap();
        let tip = region.arcs.iter().find(|a| (a.radius - 2f64.sqrt()).abs() < 1e-12).unwrap();
        assert!(tip.start_point().dist(p(0., 1.)) < 1e-12);
        assert!(tip.end_point().dist(p(2., 1.)) < 1e-12);
    }

    fn hook() -> Chain<f64> {
        let r = 1.2 / 2f64.sqrt();
        chain(&[(0., 0.), (2., 0.), (2., 1.), (1., 1.), (1. + r, 1. - r)])
    }

    #[test]
    fn hook_that_sweeps_through_its_base_is_blocked() {
        // Joint 3 opens clockwise by 3pi/4; the last link points straight
        // down halfway through and crosses the first link.
        let c = hook();
        let s = c.state_embedding(&JointSet::empty(3));
        let v = is_foldable(&s, 3).unwrap();
        assert!(!v.feasible);
        let why = v.witness.as_ref().unwrap();
        assert!(matches!(why, Collision::ArcMeetsEdge { edge: 0, .. }));
        assert!(why.violates(c.tolerance()));
        assert!(!foldable_sampled(&s, 3, 64).unwrap());
        assert_eq!(fold_verdict(&s, 3, Route::Naive), v);
        assert!(motion_clearance(&s, 3) < c.tolerance().clearance);
    }

    fn poke() -> Chain<f64> {
        // The first vertex pokes above the x axis, which is exactly where
        // straightening joint 4 lays the last link.
        chain(&[(1., 0.1), (1., -1.), (-1., -1.), (-1., 0.), (0., 0.), (0., 2.)])
    }

    #[test]
    fn final_overlap_without_arc_contact() {
        let c = poke();
        let s = c.state_embedding(&JointSet::empty(4));
        let v = is_foldable(&s, 4).unwrap();
        match v.witness.as_ref() {
            Some(w @ Collision::FinalOverlap { fixed_edge: 0, moving_edge: 4, .. }) => {
                assert!(w.violates(c.tolerance()))
            }
            other => panic!("unexpected witness {other:?}"),
        }
        assert_eq!(fold_verdict(&s, 4, Route::Naive), v);
        assert!(!foldable_sampled(&s, 4, 256).unwrap());
    }

    #[test]
    fn non_simple_state_is_rejected() {
        let c = poke();
        let s = c.state_embedding(&JointSet::from_joints(4, [4]));
        assert!(!s.is_strongly_simple());
        assert!(matches!(is_foldable(&s, 1), Err(FeasibilityError::StateNotSimple(..))));
        assert!(matches!(foldable_sampled(&s, 1, 8), Err(FeasibilityError::StateNotSimple(..))));
    }

    #[test]
    fn input_errors() {
        let c = chain(&[(0., 0.), (1., 0.), (1., 1.)]);
        let s = c.state_embedding(&JointSet::from_joints(1, [1]));
        assert!(matches!(is_foldable(&s, 1), Err(FeasibilityError::Chain(ChainError::IndexInS(1)))));
        let s = c.state_embedding(&JointSet::empty(1));
        assert!(matches!(is_foldable(&s, 2), Err(FeasibilityError::Chain(ChainError::JointOutOfRange { .. }))));
        assert!(matches!(foldable_sampled(&s, 1, 1), Err(FeasibilityError::TooFewSamples(1))));
    }
}
