//! Verification of bend orders and search for feasible ones.
//!
//! Searches run in the forming direction (from the straight wire toward the
//! target shape) where the order shapes are defined, and every result carries
//! both the forming order and its straightening reversal. Forming joint `k`
//! while the joints in `S` are still straight is the time reversal of
//! straightening `k` from `P(S \ {k})`, so every edge of every search graph is
//! one exact feasibility test, memoized by `(S, k)`.

use std::collections::{HashMap, HashSet, VecDeque};

use dashmap::DashMap;
use serde::Serialize;
use thiserror::Error;

use crate::chain::{Chain, Direction, FoldPlan, JointSet, NotAPermutation};
use crate::feasibility::{fold_verdict, FoldVerdict, Route};
use crate::Scalar;

pub mod identity;

pub use identity::{verify_identity, verify_identity_report, IdentityReport, IdentityStep, PaintRecord, WedgeCase};

/// Largest joint count accepted by [`Planner::plan_exhaustive`] by default.
pub const EXHAUSTIVE_CAP: usize = 20;
/// Largest joint count accepted by [`Planner::enumerate_foldable_permutations`].
pub const ENUMERATION_CAP: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("chain has {n} joints, above the cap of {cap} for this search")]
    CapExceeded { n: usize, cap: usize },
    #[error(transparent)]
    NotAPermutation(#[from] NotAPermutation),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlanResult<T> {
    pub found: bool,
    /// Straightening order, when found.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<FoldPlan>,
    /// The same order read in the forming direction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forming: Option<FoldPlan>,
    /// One verdict per step taken, ending at the first failure.
    pub trace: Vec<FoldVerdict<T>>,
}

impl<T> PlanResult<T> {
    fn not_found() -> Self {
        PlanResult { found: false, plan: None, forming: None, trace: Vec::new() }
    }
}

/// A state of the interval searches: the formed joints are `{i..=j}`
/// (outwards) or `{1..=i} + {j..=n}` (inwards).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IntervalState {
    pub i: usize,
    pub j: usize,
}

/// Planner over one chain, memoizing feasibility tests by `(S, joint)`.
///
/// The memo is concurrent, so one planner may be shared across threads.
pub struct Planner<'a, T> {
    chain: &'a Chain<T>,
    route: Route,
    exhaustive_cap: usize,
    memo: DashMap<(JointSet, usize), FoldVerdict<T>>,
}

impl<'a, T: Scalar> Planner<'a, T> {
    pub fn new(chain: &'a Chain<T>) -> Self {
        Self::with_route(chain, Route::default())
    }

    pub fn with_route(chain: &'a Chain<T>, route: Route) -> Self {
        Planner { chain, route, exhaustive_cap: EXHAUSTIVE_CAP, memo: DashMap::new() }
    }

    pub fn exhaustive_cap(mut self, cap: usize) -> Self {
        self.exhaustive_cap = cap;
        self
    }

    pub fn chain(&self) -> &'a Chain<T> {
        self.chain
    }

    /// Number of distinct `(S, joint)` tests evaluated so far.
    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    /// Exact test for straightening `joint` from `P(S)`. Every state reached
    /// by a search is strongly simple, since it is the end of a feasible bend
    /// or the input chain itself.
    pub fn straighten_verdict(&self, straightened: &JointSet, joint: usize) -> FoldVerdict<T> {
        let key = (straightened.clone(), joint);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let state = self.chain.state_embedding(straightened);
        let v = fold_verdict(&state, joint, self.route);
        self.memo.entry(key).or_insert(v).clone()
    }

    /// Forming `joint` while the joints in `straight` are straight.
    fn form_verdict(&self, straight: &JointSet, joint: usize) -> FoldVerdict<T> {
        let mut after = straight.clone();
        after.remove(joint);
        self.straighten_verdict(&after, joint)
    }

    /// Replays an order through the exact test. A forming plan is reversed first.
    pub fn verify_permutation(&self, plan: &FoldPlan) -> Result<PlanResult<T>, PlanError> {
        let n = self.chain.joint_count();
        let plan = FoldPlan::new(plan.order.clone(), plan.direction, n)?.to_straighten();
        let mut s = JointSet::empty(n);
        let mut trace = Vec::with_capacity(n);
        for &joint in &plan.order {
            let v = self.straighten_verdict(&s, joint);
            let ok = v.feasible;
            trace.push(v);
            if !ok {
                return Ok(PlanResult { found: false, plan: None, forming: None, trace });
            }
            s.insert(joint);
        }
        Ok(PlanResult { found: true, forming: Some(plan.to_form()), plan: Some(plan), trace })
    }

    /// The sequential forming order `1..n`, decided by the painting walk.
    pub fn verify_identity(&self) -> PlanResult<T> {
        verify_identity(self.chain)
    }

    /// Breadth-first search for a forming order whose formed joints are
    /// always one interval. Extends at the high end before the low end.
    pub fn plan_outwards(&self) -> PlanResult<T> {
        let n = self.chain.joint_count();
        if n == 0 {
            return self.finish(Vec::new());
        }
        let straight_except = |st: IntervalState| JointSet::from_joints(n, (1..=n).filter(|&k| k < st.i || k > st.j));
        let mut parent = HashMap::new();
        let mut queue = VecDeque::new();
        let full = JointSet::full(n);
        for k in 1..=n {
            if self.form_verdict(&full, k).feasible {
                let st = IntervalState { i: k, j: k };
                parent.insert(st, None);
                queue.push_back(st);
            }
        }
        let goal = IntervalState { i: 1, j: n };
        while let Some(st) = queue.pop_front() {
            if st == goal {
                return self.finish(forming_from_parents(
                    &parent,
                    goal,
                    |from, to| {
                        if to.j > from.j {
                            to.j
                        } else {
                            to.i
                        }
                    },
                ));
            }
            let straight = straight_except(st);
            let mut next = Vec::with_capacity(2);
            if st.j < n {
                next.push((IntervalState { i: st.i, j: st.j + 1 }, st.j + 1));
            }
            if st.i > 1 {
                next.push((IntervalState { i: st.i - 1, j: st.j }, st.i - 1));
            }
            for (to, joint) in next {
                if !parent.contains_key(&to) && self.form_verdict(&straight, joint).feasible {
                    parent.insert(to, Some(st));
                    queue.push_back(to);
                }
            }
        }
        PlanResult::not_found()
    }

    /// Breadth-first search for a forming order whose formed joints are
    /// always a prefix plus a suffix. State `(i, j)` has `1..=i` and `j..=n`
    /// formed. Extends the prefix before the suffix.
    pub fn plan_inwards(&self) -> PlanResult<T> {
        let n = self.chain.joint_count();
        let straight_between = |st: IntervalState| JointSet::from_joints(n, st.i + 1..st.j);
        let mut parent = HashMap::new();
        let start = IntervalState { i: 0, j: n + 1 };
        parent.insert(start, None);
        let mut queue = VecDeque::from([start]);
        while let Some(st) = queue.pop_front() {
            if st.i + 1 == st.j {
                return self.finish(forming_from_parents(
                    &parent,
                    st,
                    |from, to| {
                        if to.i > from.i {
                            to.i
                        } else {
                            to.j
                        }
                    },
                ));
            }
            let straight = straight_between(st);
            let mut next = vec![(IntervalState { i: st.i + 1, j: st.j }, st.i + 1)];
            if st.j - 1 > st.i + 1 {
                next.push((IntervalState { i: st.i, j: st.j - 1 }, st.j - 1));
            }
            for (to, joint) in next {
                if !parent.contains_key(&to) && self.form_verdict(&straight, joint).feasible {
                    parent.insert(to, Some(st));
                    queue.push_back(to);
                }
            }
        }
        PlanResult::not_found()
    }

    /// Depth-first search over the subset lattice of straightened joints,
    /// lowest feasible joint first, remembering dead subsets.
    pub fn plan_exhaustive(&self) -> Result<PlanResult<T>, PlanError> {
        let n = self.chain.joint_count();
        if n > self.exhaustive_cap {
            return Err(PlanError::CapExceeded { n, cap: self.exhaustive_cap });
        }
        let mut dead = HashSet::new();
        let mut order = Vec::with_capacity(n);
        if self.exhaustive_from(&mut JointSet::empty(n), &mut order, &mut dead) {
            let forming = FoldPlan { order, direction: Direction::Straighten }.to_form();
            Ok(self.finish(forming.order))
        } else {
            Ok(PlanResult::not_found())
        }
    }

    fn exhaustive_from(&self, s: &mut JointSet, order: &mut Vec<usize>, dead: &mut HashSet<JointSet>) -> bool {
        if s.is_full() {
            return true;
        }
        if dead.contains(s) {
            return false;
        }
        for joint in 1..=s.capacity() {
            if s.contains(joint) || !self.straighten_verdict(s, joint).feasible {
                continue;
            }
            s.insert(joint);
            order.push(joint);
            if self.exhaustive_from(s, order, dead) {
                return true;
            }
            order.pop();
            s.remove(joint);
        }
        dead.insert(s.clone());
        false
    }

    /// Every straightening order that passes [`verify_permutation`], in
    /// lexicographic order.
    ///
    /// [`verify_permutation`]: Planner::verify_permutation
    pub fn enumerate_foldable_permutations(&self) -> Result<Vec<FoldPlan>, PlanError> {
        let n = self.chain.joint_count();
        if n > ENUMERATION_CAP {
            return Err(PlanError::CapExceeded { n, cap: ENUMERATION_CAP });
        }
        let mut out = Vec::new();
        let mut order = Vec::with_capacity(n);
        self.enumerate_from(&mut JointSet::empty(n), &mut order, &mut out);
        Ok(out)
    }

    fn enumerate_from(&self, s: &mut JointSet, order: &mut Vec<usize>, out: &mut Vec<FoldPlan>) {
        let n = s.capacity();
        if order.len() == n {
            out.push(FoldPlan { order: order.clone(), direction: Direction::Straighten });
            return;
        }
        for joint in 1..=n {
            if s.contains(joint) || !self.straighten_verdict(s, joint).feasible {
                continue;
            }
            s.insert(joint);
            order.push(joint);
            self.enumerate_from(s, order, out);
            order.pop();
            s.remove(joint);
        }
    }

    /// Wraps a found forming order, replaying it as a soundness check.
    fn finish(&self, forming: Vec<usize>) -> PlanResult<T> {
        let n = self.chain.joint_count();
        let plan = FoldPlan::new(forming, Direction::Form, n).expect("search yields a permutation");
        let replay = self.verify_permutation(&plan).expect("valid plan");
        assert!(replay.found, "search produced an order that fails replay: {:?}", plan.order);
        replay
    }
}

fn forming_from_parents(
    parent: &HashMap<IntervalState, Option<IntervalState>>,
    goal: IntervalState,
    added: impl Fn(IntervalState, IntervalState) -> usize,
) -> Vec<usize> {
    let mut order = Vec::new();
    let mut at = goal;
    while let Some(prev) = parent[&at] {
        order.push(added(prev, at));
        at = prev;
    }
    if at.i == at.j {
        // outwards seed state (k, k)
        order.push(at.i);
    }
    order.reverse();
    order
}

/// The formed joints after each prefix of a forming order are one interval.
pub fn is_outwards(forming: &[usize]) -> bool {
    let (mut lo, mut hi) = (usize::MAX, 0);
    forming.iter().enumerate().all(|(k, &j)| {
        lo = lo.min(j);
        hi = hi.max(j);
        hi - lo == k
    })
}

/// The formed joints after each prefix of a forming order are `{1..=a}`
/// together with `{b..=n}`.
pub fn is_inwards(forming: &[usize], n: usize) -> bool {
    let (mut a, mut b) = (0, n + 1);
    forming.iter().all(|&j| {
        if j == a + 1 {
            a += 1;
            true
        } else if j + 1 == b {
            b -= 1;
            true
        } else {
            false
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Tolerance};

    fn chain(v: &[(f64, f64)]) -> Chain<f64> {
        let pts: Vec<_> = v.iter().map(|&(x, y)| Point::new(x, y)).collect();
        Chain::from_vertices(&pts, Tolerance::default()).unwrap()
    }

    fn u_shape() -> Chain<f64> {
        chain(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.)])
    }

    fn straight(n: usize) -> Chain<f64> {
        let v: Vec<_> = (0..n + 2).map(|k| (k as f64, 0.0)).collect();
        chain(&v)
    }

    #[test]
    fn straight_chain_any_order() {
        let c = straight(3);
        let p = Planner::new(&c);
        assert!(p.verify_permutation(&FoldPlan::straighten(vec![2, 3, 1], 3).unwrap()).unwrap().found);
        assert_eq!(p.enumerate_foldable_permutations().unwrap().len(), 6);
        assert_eq!(p.plan_outwards().forming.unwrap().order, vec![1, 2, 3]);
        assert_eq!(p.plan_inwards().forming.unwrap().order, vec![1, 2, 3]);
        assert!(p.verify_identity().found);
    }

    #[test]
    fn u_shape_plans() {
        let c = u_shape();
        let p = Planner::new(&c);
        let r = p.verify_permutation(&FoldPlan::straighten(vec![1, 2], 2).unwrap()).unwrap();
        assert!(r.found);
        assert_eq!(r.trace.len(), 2);
        assert_eq!(r.forming.unwrap().order, vec![2, 1]);
        let ident = p.verify_identity();
        let reversed = p.verify_permutation(&FoldPlan::new(vec![1, 2], Direction::Form, 2).unwrap()).unwrap();
        assert_eq!(ident.found, reversed.found);
    }

    #[test]
    fn single_joint() {
        let c = chain(&[(0., 0.), (1., 0.), (1., 1.)]);
        let p = Planner::new(&c);
        let r = p.plan_exhaustive().unwrap();
        assert_eq!(r.plan.unwrap().order, vec![1]);
        assert!(p.plan_inwards().found);
        assert!(p.plan_outwards().found);
        let all = p.enumerate_foldable_permutations().unwrap();
        assert_eq!(all, vec![FoldPlan::straighten(vec![1], 1).unwrap()]);
    }

    #[test]
    fn no_joints() {
        let c = chain(&[(0., 0.), (1., 0.)]);
        let p = Planner::new(&c);
        assert!(p.plan_outwards().found);
        assert!(p.plan_inwards().found);
        assert!(p.plan_exhaustive().unwrap().found);
        assert!(p.verify_identity().found);
    }

    #[test]
    fn caps() {
        let c = straight(9);
        let p = Planner::new(&c);
        assert_eq!(p.enumerate_foldable_permutations(), Err(PlanError::CapExceeded { n: 9, cap: ENUMERATION_CAP }));
        let p = Planner::new(&c).exhaustive_cap(4);
        assert!(matches!(p.plan_exhaustive(), Err(PlanError::CapExceeded { n: 9, cap: 4 })));
    }

    #[test]
    fn bad_permutation() {
        let c = u_shape();
        let p = Planner::new(&c);
        let bad = FoldPlan { order: vec![1, 1], direction: Direction::Straighten };
        assert!(matches!(p.verify_permutation(&bad), Err(PlanError::NotAPermutation(_))));
    }

    #[test]
    fn shape_predicates() {
        assert!(is_outwards(&[2, 3, 4, 5, 1]));
        assert!(is_outwards(&[3, 2, 4, 1]));
        assert!(!is_outwards(&[1, 3, 2]));
        assert!(is_inwards(&[1, 5, 4, 2, 3], 5));
        assert!(is_inwards(&[5, 4, 3, 2, 1], 5));
        assert!(!is_inwards(&[2, 1, 3], 3));
    }
}
