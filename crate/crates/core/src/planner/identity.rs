//! The sequential (identity) order in the forming direction.
//!
//! Forming joint `i` after joints `1..i` are in place rotates the straight
//! remainder `b_i b_{n+1}` about `b_i`, sweeping a circular sector whose
//! outer boundary is the arc `gamma` traced by the tip. The already formed
//! prefix `P0 = b0..b_i` is connected and reaches the pivot from outside the
//! sector, so the bend is clear iff the final segment is clear and `gamma`
//! misses the part of `P0`'s boundary facing the sector. That part is found
//! by shooting the rays through the segment's initial and final positions
//! and walking `P0`'s boundary between their hit points. Walked stretches are
//! painted and never walked again, which is what keeps the total work low.

use serde::Serialize;

use crate::chain::{edge_pair_distance, Chain, Direction, FoldPlan};
use crate::feasibility::{Collision, FoldVerdict};
use crate::geometry::{point_segment_distance, segment_arc_distance, segment_distance, Arc, Point, Segment, Tolerance};
use crate::planner::PlanResult;
use crate::Scalar;

/// Which rays through the moving segment's start and end position meet `P0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WedgeCase {
    /// The joint is straight; nothing moves.
    Straight,
    BothMiss,
    BothHit,
    /// Only the ray through the initial position hits.
    StartHits,
    /// Only the ray through the final position hits.
    EndHits,
}

/// Painted parameter intervals of the fixed chain's boundary, per edge and
/// side, in the edge's own parameter `t in [0, 1]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PaintRecord<T> {
    /// `edges[k] = [right side, left side]`, each a sorted list of disjoint intervals.
    pub edges: Vec<[Vec<(T, T)>; 2]>,
}

impl<T: Scalar> PaintRecord<T> {
    /// Painted fraction of edge `k`, averaged over its two sides.
    pub fn fraction(&self, edge: usize) -> T {
        let side_len = |v: &Vec<(T, T)>| v.iter().fold(T::zero(), |acc, &(a, b)| acc + (b - a));
        let [r, l] = &self.edges[edge];
        (side_len(r) + side_len(l)) / T::lit(2.0)
    }

    /// Union of both sides' painted intervals on edge `k`, merged.
    pub fn union(&self, edge: usize) -> Vec<(T, T)> {
        let mut all: Vec<(T, T)> = self.edges[edge].iter().flatten().copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite paint"));
        merge_sorted(all, T::zero())
    }

    /// Every edge's painted portion is empty or a single interval.
    pub fn is_connected(&self) -> bool {
        (0..self.edges.len()).all(|k| self.union(k).len() <= 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityStep<T> {
    pub joint: usize,
    pub case: WedgeCase,
    /// Pivot-to-tip length of the moving segment.
    pub reach: T,
    /// Boundary pieces tested against the tip arc during this step.
    pub pieces_tested: usize,
}

/// Per-run bookkeeping of the painting walk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityReport<T> {
    pub steps: Vec<IdentityStep<T>>,
    pub paint: PaintRecord<T>,
    /// No side's painted fraction ever shrank between steps.
    pub paint_monotone: bool,
    /// `reach` strictly decreased from step to step.
    pub reach_decreasing: bool,
}

const RIGHT: usize = 0;
const LEFT: usize = 1;

#[derive(Clone, Copy, Debug)]
struct Hit<T> {
    edge: usize,
    t: T,
    along: T,
    side: usize,
}

/// Hits of the ray `origin + s * dir` (`s > 0`) with edges `0..edges`. The
/// side is the one a point travelling outwards along the ray meets.
fn shoot<T: Scalar>(pts: &[Point<T>], edges: usize, origin: Point<T>, dir: Point<T>) -> Vec<Hit<T>> {
    let mut hits = Vec::new();
    for k in 0..edges {
        let q = pts[k];
        let e = pts[k + 1] - q;
        let denom = dir.cross(e);
        if denom == T::zero() {
            continue;
        }
        let w = q - origin;
        let along = w.cross(e) / denom;
        let t = w.cross(dir) / denom;
        if along > T::zero() && t >= T::zero() && t <= T::one() {
            let side = if e.cross(dir) < T::zero() { LEFT } else { RIGHT };
            hits.push(Hit { edge: k, t, along, side });
        }
    }
    hits
}

fn nearest<T: Scalar>(hits: &[Hit<T>]) -> Option<Hit<T>> {
    hits.iter().copied().min_by(|a, b| a.along.partial_cmp(&b.along).expect("finite hit"))
}

/// The hit met first by a point coming in from infinity along the ray.
fn farthest<T: Scalar>(hits: &[Hit<T>]) -> Option<Hit<T>> {
    hits.iter()
        .copied()
        .max_by(|a, b| a.along.partial_cmp(&b.along).expect("finite hit"))
        .map(|h| Hit { side: 1 - h.side, ..h })
}

fn merge_sorted<T: Scalar>(sorted: Vec<(T, T)>, gap: T) -> Vec<(T, T)> {
    let mut out: Vec<(T, T)> = Vec::with_capacity(sorted.len());
    for (a, b) in sorted {
        match out.last_mut() {
            Some(last) if a <= last.1 + gap => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

struct Walk<'c, T> {
    pts: &'c [Point<T>],
    tol: Tolerance<T>,
    /// Painted intervals in walk parameter `s` (`t` on right sides, `1 - t` on left).
    paint: Vec<[Vec<(T, T)>; 2]>,
}

impl<T: Scalar> Walk<'_, T> {
    /// Boundary loop of `P0` with `edges` edges, counterclockwise:
    /// right sides forward, then left sides backward.
    fn side_at(edges: usize, idx: usize) -> (usize, usize) {
        if idx < edges {
            (idx, RIGHT)
        } else {
            (2 * edges - 1 - idx, LEFT)
        }
    }

    fn position(edges: usize, hit: &Hit<T>) -> (usize, T) {
        if hit.side == RIGHT {
            (hit.edge, hit.t)
        } else {
            (2 * edges - 1 - hit.edge, T::one() - hit.t)
        }
    }

    fn to_t(side: usize, s: T) -> T {
        if side == RIGHT {
            s
        } else {
            T::one() - s
        }
    }

    /// Walks from `from` to `to` along the loop (`ccw` selects the
    /// direction), testing each unpainted stretch against `gamma` and painting
    /// it. Returns the first blocking edge, and the number of stretches tested.
    fn run(
        &mut self,
        edges: usize,
        from: (usize, T),
        to: (usize, T),
        ccw: bool,
        gamma: &Arc<T>,
    ) -> (Option<usize>, usize) {
        let sides = 2 * edges;
        let (mut idx, mut s) = from;
        let mut tested = 0;
        for _ in 0..=2 * sides {
            let ahead = if ccw { to.1 >= s } else { to.1 <= s };
            let finish = idx == to.0 && ahead;
            let (lo, hi) = match (finish, ccw) {
                (true, true) => (s, to.1),
                (true, false) => (to.1, s),
                (false, true) => (s, T::one()),
                (false, false) => (T::zero(), s),
            };
            let (edge, side) = Self::side_at(edges, idx);
            for (a, b) in self.unpainted(edge, side, lo, hi) {
                tested += 1;
                let seg = Segment::new(self.pts[edge], self.pts[edge + 1]);
                let (t0, t1) = (Self::to_t(side, a), Self::to_t(side, b));
                if segment_arc_distance(&seg.slice(t0, t1), gamma) < self.tol.clearance {
                    return (Some(edge), tested);
                }
            }
            self.apply(edge, side, lo, hi);
            if finish {
                break;
            }
            if ccw {
                idx = (idx + 1) % sides;
                s = T::zero();
            } else {
                idx = (idx + sides - 1) % sides;
                s = T::one();
            }
        }
        (None, tested)
    }

    fn unpainted(&self, edge: usize, side: usize, lo: T, hi: T) -> Vec<(T, T)> {
        let mut gaps = Vec::new();
        let mut at = lo;
        for &(a, b) in &self.paint[edge][side] {
            if b <= at {
                continue;
            }
            if a >= hi {
                break;
            }
            if a > at {
                gaps.push((at, a));
            }
            at = at.max(b);
        }
        if at < hi {
            gaps.push((at, hi));
        }
        gaps
    }

    fn apply(&mut self, edge: usize, side: usize, lo: T, hi: T) {
        let list = &mut self.paint[edge][side];
        list.push((lo, hi));
        list.sort_by(|a, b| a.partial_cmp(b).expect("finite paint"));
        // stretches ending exactly where another starts should read as one
        let len = self.pts[edge].dist(self.pts[edge + 1]);
        let joined = merge_sorted(std::mem::take(list), self.tol.clearance / len);
        *list = joined;
    }

    fn painted(&self, edge: usize, side: usize) -> T {
        self.paint[edge][side].iter().fold(T::zero(), |acc, &(a, b)| acc + (b - a))
    }

    fn record(&self) -> PaintRecord<T> {
        let edges = self
            .paint
            .iter()
            .map(|[r, l]| {
                let left = l.iter().rev().map(|&(a, b)| (T::one() - b, T::one() - a)).collect();
                [r.clone(), left]
            })
            .collect();
        PaintRecord { edges }
    }
}

/// Final-position check for forming joint `i`: the moving part is
/// `b_i b_{i+1}` followed by the straight rest out to the tip.
fn final_collision<T: Scalar>(chain: &Chain<T>, i: usize, tip: Point<T>, tol: &Tolerance<T>) -> Option<Collision<T>> {
    let pts = chain.vertices();
    let n = chain.joint_count();
    let first = Segment::new(pts[i], pts[i + 1]);
    let rest = (i < n).then(|| Segment::new(pts[i + 1], tip));
    let dir = first.direction() * (T::one() / first.length());
    let lengths = chain.lengths();
    for f in 0..i {
        let fixed = Segment::new(pts[f], pts[f + 1]);
        let d_first = if f + 1 == i {
            point_segment_distance(fixed.a, &first).min(point_segment_distance(first.b, &fixed))
        } else {
            segment_distance(&fixed, &first)
        };
        if d_first < tol.clearance {
            return Some(Collision::FinalOverlap {
                fixed_edge: f,
                moving_edge: i,
                fixed,
                moving: first,
                distance: d_first,
            });
        }
        let Some(rest) = rest else { continue };
        if segment_distance(&fixed, &rest) >= tol.clearance {
            continue;
        }
        // locate the offending link on the straight remainder
        let mut a = pts[i + 1];
        let mut along = T::zero();
        let mut fallback = None;
        for (m, &len) in lengths.iter().enumerate().skip(i + 1) {
            along = along + len;
            let b = pts[i + 1] + dir * along;
            let moving = Segment::new(a, b);
            let distance = segment_distance(&fixed, &moving);
            if distance < tol.clearance {
                return Some(Collision::FinalOverlap { fixed_edge: f, moving_edge: m, fixed, moving, distance });
            }
            fallback.get_or_insert((m, moving, distance));
            a = b;
        }
        let (m, moving, distance) = fallback.expect("remainder has a link");
        return Some(Collision::FinalOverlap { fixed_edge: f, moving_edge: m, fixed, moving, distance });
    }
    None
}

/// Decides whether forming joints `1, 2, ..., n` in order is collision-free.
pub fn verify_identity<T: Scalar>(chain: &Chain<T>) -> PlanResult<T> {
    verify_identity_report(chain).0
}

/// [`verify_identity`] with the per-step record of the painting walk.
pub fn verify_identity_report<T: Scalar>(chain: &Chain<T>) -> (PlanResult<T>, IdentityReport<T>) {
    let n = chain.joint_count();
    let pts = chain.vertices();
    let tol = *chain.tolerance();
    let lengths = chain.lengths();
    let mut reach_from = vec![T::zero(); n + 2];
    for k in (0..=n).rev() {
        reach_from[k] = reach_from[k + 1] + lengths[k];
    }

    let mut walk = Walk { pts, tol, paint: vec![[Vec::new(), Vec::new()]; n + 1] };
    let mut steps = Vec::with_capacity(n);
    let mut trace = Vec::with_capacity(n);
    let mut paint_monotone = true;
    let mut reach_decreasing = true;
    let mut blocked = false;

    for i in 1..=n {
        let reach = reach_from[i];
        if let Some(prev) = steps.last().map(|s: &IdentityStep<T>| s.reach) {
            reach_decreasing &= reach < prev;
        }
        let tau = T::PI() - chain.angle(i);
        let p = pts[i];
        let d = (p - pts[i - 1]) * (T::one() / lengths[i - 1]);
        let d1 = (pts[i + 1] - p) * (T::one() / lengths[i]);
        let start_tip = p + d * reach;
        let mut step = IdentityStep { joint: i, case: WedgeCase::Straight, reach, pieces_tested: 0 };
        if tau == T::zero() {
            steps.push(step);
            trace.push(FoldVerdict::feasible(i));
            continue;
        }

        let end_tip = pts[i + 1] + d1 * (reach - lengths[i]);
        if let Some(hit) = final_collision(chain, i, end_tip, &tol) {
            step.case = classify(pts, i, p, d, d1).0;
            steps.push(step);
            trace.push(FoldVerdict::blocked(i, hit));
            blocked = true;
            break;
        }

        let (case, endpoints) = classify(pts, i, p, d, d1);
        step.case = case;
        let before: Vec<[T; 2]> = (0..i).map(|k| [walk.painted(k, RIGHT), walk.painted(k, LEFT)]).collect();
        let mut hit_edge = None;
        if let Some((from, to)) = endpoints {
            let gamma = Arc::traced_by(p, start_tip, tau);
            let from = Walk::position(i, &from);
            let to = Walk::position(i, &to);
            let (edge, tested) = walk.run(i, from, to, tau < T::zero(), &gamma);
            step.pieces_tested = tested;
            hit_edge = edge.map(|e| (e, gamma));
        }
        for (k, was) in before.iter().enumerate() {
            paint_monotone &= walk.painted(k, RIGHT) >= was[0] && walk.painted(k, LEFT) >= was[1];
        }
        steps.push(step);
        if let Some((edge, arc)) = hit_edge {
            let segment = Segment::new(pts[edge], pts[edge + 1]);
            let distance = segment_arc_distance(&segment, &arc);
            trace.push(FoldVerdict::blocked(
                i,
                Collision::ArcMeetsEdge { arc, source: start_tip, edge, segment, distance },
            ));
            blocked = true;
            break;
        }
        trace.push(FoldVerdict::feasible(i));
    }
    debug_assert!(blocked || (1..n).all(|i| edge_pair_distance(pts, i - 1, i) >= tol.clearance));

    let forming = FoldPlan { order: (1..=n).collect(), direction: Direction::Form };
    let found = !blocked;
    let result =
        PlanResult { found, plan: found.then(|| forming.to_straighten()), forming: found.then_some(forming), trace };
    let report = IdentityReport { steps, paint: walk.record(), paint_monotone, reach_decreasing };
    (result, report)
}

type WalkEnds<T> = Option<(Hit<T>, Hit<T>)>;

/// Shoots both rays from the pivot past `P0` (the pivot's own edge
/// excluded) and picks the walk endpoints.
fn classify<T: Scalar>(pts: &[Point<T>], i: usize, p: Point<T>, d: Point<T>, d1: Point<T>) -> (WedgeCase, WalkEnds<T>) {
    let start = shoot(pts, i - 1, p, d);
    let end = shoot(pts, i - 1, p, d1);
    match (nearest(&start), nearest(&end)) {
        (None, None) => (WedgeCase::BothMiss, None),
        (Some(a), Some(b)) => (WedgeCase::BothHit, Some((a, b))),
        (Some(a), None) => (WedgeCase::StartHits, farthest(&start).map(|b| (a, b))),
        (None, Some(b)) => (WedgeCase::EndHits, farthest(&end).map(|a| (a, b))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::Chain;

    fn chain(v: &[(f64, f64)]) -> Chain<f64> {
        let pts: Vec<_> = v.iter().map(|&(x, y)| Point::new(x, y)).collect();
        Chain::from_vertices(&pts, Tolerance::default()).unwrap()
    }

    #[test]
    fn straight_chain_is_all_noops() {
        let c = chain(&[(0., 0.), (1., 0.), (2., 0.), (3., 0.), (4., 0.)]);
        let (r, rep) = verify_identity_report(&c);
        assert!(r.found);
        assert!(rep.steps.iter().all(|s| s.case == WedgeCase::Straight));
        assert_eq!(r.forming.unwrap().order, vec![1, 2, 3]);
        assert_eq!(r.plan.unwrap().order, vec![3, 2, 1]);
    }

    #[test]
    fn u_shape_forms_in_order() {
        let c = chain(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)]);
        let (r, rep) = verify_identity_report(&c);
        assert!(r.found);
        assert_eq!(rep.steps[0].case, WedgeCase::BothMiss);
        assert!(rep.reach_decreasing && rep.paint_monotone);
    }

    #[test]
    fn arc_dips_through_base_link() {
        // Forming joint 3 swings the last link from pointing at -x round
        // through straight down, below the first link, before it settles.
        let c = chain(&[(0., 0.), (2., 0.), (2., 1.), (1., 1.), (1.7, 0.2)]);
        let (r, rep) = verify_identity_report(&c);
        assert_eq!(rep.steps[2].case, WedgeCase::EndHits);
        assert!(!r.found);
        let w = r.trace.last().unwrap().witness.as_ref().unwrap();
        assert!(matches!(w, Collision::ArcMeetsEdge { edge: 0, .. }));
        assert!(w.violates(c.tolerance()));
        assert!(rep.steps[2].pieces_tested > 0);
    }

    #[test]
    fn paint_record_helpers() {
        let rec: PaintRecord<f64> =
            PaintRecord { edges: vec![[vec![(0.0, 0.5)], vec![(0.25, 1.0)]], [vec![(0.0, 0.1)], vec![(0.5, 1.0)]]] };
        assert!((rec.fraction(0) - 0.625).abs() < 1e-15);
        assert_eq!(rec.union(0), vec![(0.0, 1.0)]);
        assert!(!rec.is_connected());
    }
}
