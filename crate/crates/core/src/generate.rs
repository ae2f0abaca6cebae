//! Seeded random strongly simple chains for test corpora.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chain::{edge_pair_distance, Chain};
use crate::geometry::{Aabb, Point, Tolerance};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no strongly simple chain with {joints} joints found within {attempts} attempts (seed {seed})")]
pub struct GenerationFailed {
    pub joints: usize,
    pub seed: u64,
    pub attempts: usize,
}

/// Sampling ranges for [`random_chain_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainDistribution {
    pub min_length: f64,
    pub max_length: f64,
    /// Turns are drawn from `(-max_turn, max_turn)` radians.
    pub max_turn: f64,
    /// Rejected proposals at one vertex before backing up a vertex.
    pub tries_per_vertex: usize,
}

impl Default for ChainDistribution {
    fn default() -> Self {
        ChainDistribution {
            min_length: 0.5,
            max_length: 2.0,
            max_turn: 0.9 * std::f64::consts::PI,
            tries_per_vertex: 16,
        }
    }
}

const MAX_BACKOFF: usize = 64;

pub const DEFAULT_ATTEMPTS: usize = 1_000_000;

/// A strongly simple chain with `joints` joints, grown link by link from
/// the origin along +x. Deterministic in `seed`.
pub fn random_chain<T: Scalar>(
    joints: usize,
    seed: u64,
    attempts: usize,
    tol: Tolerance<T>,
) -> Result<Chain<T>, GenerationFailed> {
    random_chain_with(joints, seed, attempts, tol, &ChainDistribution::default())
}

pub fn random_chain_with<T: Scalar>(
    joints: usize,
    seed: u64,
    attempts: usize,
    tol: Tolerance<T>,
    dist: &ChainDistribution,
) -> Result<Chain<T>, GenerationFailed> {
    let failed = GenerationFailed { joints, seed, attempts };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw_length = |rng: &mut ChaCha8Rng| T::lit(rng.random_range(dist.min_length..=dist.max_length));

    let first = draw_length(&mut rng);
    let mut pts = vec![Point::new(T::zero(), T::zero()), Point::new(first, T::zero())];
    // heading of the edge ending at each vertex, parallel to `pts`
    let mut headings = vec![T::zero(), T::zero()];
    let mut grid = Grid::new(dist.max_length);
    grid.insert(&pts, 0, tol.clearance);

    let mut rejects = 0usize;
    let mut backoff = 1usize;
    let mut stuck_at = pts.len();
    let mut spent = 0usize;
    while pts.len() < joints + 2 {
        if spent >= attempts {
            return Err(failed);
        }
        spent += 1;
        let turn = T::lit(rng.random_range(-dist.max_turn..dist.max_turn));
        let heading = crate::chain::wrap_angle(*headings.last().expect("non-empty") + turn);
        let next = *pts.last().expect("non-empty") + Point::from_angle(heading) * draw_length(&mut rng);
        pts.push(next);
        let new_edge = pts.len() - 2;
        let clear = grid
            .near(&pts, new_edge, tol.clearance)
            .into_iter()
            .all(|e| edge_pair_distance(&pts, e, new_edge) >= tol.clearance);
        if clear {
            headings.push(heading);
            grid.insert(&pts, new_edge, tol.clearance);
            rejects = 0;
            if pts.len() > stuck_at {
                backoff = 1;
            }
            continue;
        }
        pts.pop();
        rejects += 1;
        if rejects >= dist.tries_per_vertex {
            // stuck: back up, one vertex further each time the previous
            // dead end is not passed
            stuck_at = pts.len();
            for _ in 0..backoff.min(pts.len() - 2) {
                grid.remove(&pts, pts.len() - 2, tol.clearance);
                pts.pop();
                headings.pop();
            }
            backoff = (backoff + 1).min(MAX_BACKOFF);
            rejects = 0;
        }
    }
    Chain::from_vertices(&pts, tol).map_err(|_| failed)
}

/// Uniform bucket grid over edge bounding boxes.
struct Grid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl Grid {
    fn new(cell: f64) -> Self {
        Grid { cell, buckets: HashMap::new() }
    }

    fn cells<T: Scalar>(&self, pts: &[Point<T>], edge: usize, pad: T) -> impl Iterator<Item = (i64, i64)> {
        let b = Aabb::of_points(&pts[edge..edge + 2]).inflate(pad);
        let f = |v: T| (v.to_f64().unwrap_or(0.0) / self.cell).floor() as i64;
        let (x0, x1, y0, y1) = (f(b.min.x), f(b.max.x), f(b.min.y), f(b.max.y));
        (x0..=x1).flat_map(move |x| (y0..=y1).map(move |y| (x, y)))
    }

    fn insert<T: Scalar>(&mut self, pts: &[Point<T>], edge: usize, pad: T) {
        let cells: Vec<_> = self.cells(pts, edge, pad).collect();
        for c in cells {
            self.buckets.entry(c).or_default().push(edge);
        }
    }

    fn remove<T: Scalar>(&mut self, pts: &[Point<T>], edge: usize, pad: T) {
        let cells: Vec<_> = self.cells(pts, edge, pad).collect();
        for c in cells {
            if let Some(v) = self.buckets.get_mut(&c) {
                v.retain(|&e| e != edge);
            }
        }
    }

    /// Earlier edges whose cells overlap those of `edge`, ascending.
    fn near<T: Scalar>(&self, pts: &[Point<T>], edge: usize, pad: T) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .cells(pts, edge, pad)
            .filter_map(|c| self.buckets.get(&c))
            .flatten()
            .copied()
            .filter(|&e| e < edge)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::is_strongly_simple;

    #[test]
    fn single_link_is_straight_segment() {
        let c = random_chain::<f64>(0, 3, DEFAULT_ATTEMPTS, Tolerance::default()).unwrap();
        assert_eq!(c.joint_count(), 0);
        assert_eq!(c.vertices().len(), 2);
        assert_eq!(c.vertices()[1].y, 0.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = random_chain::<f64>(9, 42, DEFAULT_ATTEMPTS, Tolerance::default()).unwrap();
        let b = random_chain::<f64>(9, 42, DEFAULT_ATTEMPTS, Tolerance::default()).unwrap();
        let c = random_chain::<f64>(9, 43, DEFAULT_ATTEMPTS, Tolerance::default()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.vertices(), c.vertices());
    }

    #[test]
    fn samples_respect_ranges() {
        let c = random_chain::<f64>(40, 7, DEFAULT_ATTEMPTS, Tolerance::default()).unwrap();
        assert!(c.lengths().iter().all(|&l| (0.5 - 1e-12..=2.0 + 1e-12).contains(&l)));
        let pi = std::f64::consts::PI;
        assert!(c.angles().iter().all(|&a| a > 0.1 * pi - 1e-9 && a < 1.9 * pi + 1e-9));
    }

    #[test]
    fn exhausted_attempts_is_an_error() {
        let err = random_chain::<f64>(50, 1, 10, Tolerance::default()).unwrap_err();
        assert_eq!(err.attempts, 10);
    }

    #[test]
    fn twelve_joint_self_check() {
        let tol = Tolerance::default();
        for seed in 0..1000 {
            let c = random_chain::<f64>(12, seed, DEFAULT_ATTEMPTS, tol).unwrap();
            assert!(is_strongly_simple(c.vertices(), &tol), "seed {seed}");
        }
    }

    #[test]
    fn single_precision_chain() {
        let c = random_chain::<f32>(8, 5, DEFAULT_ATTEMPTS, Tolerance::default()).unwrap();
        assert_eq!(c.joint_count(), 8);
    }
}
