use bendplan::chain::is_strongly_simple;
use bendplan::document::Representation;
use bendplan::feasibility::foldable_sampled;
use bendplan::generate::{random_chain, DEFAULT_ATTEMPTS};
use bendplan::render::render_plan;
use bendplan::{Chain, ChainDocument, Direction, JointSet, Planner, RenderSpec, Tolerance};
use rand::seq::IndexedRandom;
use rand::SeedableRng;

fn chain(n: usize, seed: u64) -> Chain {
    random_chain(n, seed, DEFAULT_ATTEMPTS, Tolerance::default()).unwrap()
}

#[test]
fn save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..50 {
        let c = chain(1 + (seed as usize % 30), seed);
        for repr in [Representation::Vertices, Representation::LengthsAngles] {
            let path = dir.path().join(format!("chain_{seed}.json"));
            ChainDocument::from_chain(&c, repr).named("round trip").save(&path).unwrap();
            let doc = ChainDocument::load(&path).unwrap();
            assert_eq!(doc.name.as_deref(), Some("round trip"));
            let back = doc.to_chain(Tolerance::default()).unwrap();
            assert_eq!(back.joint_count(), c.joint_count());
            for (p, q) in c.vertices().iter().zip(back.vertices()) {
                assert!((p.x - q.x).abs() <= 1e-12 && (p.y - q.y).abs() <= 1e-12, "seed {seed} {repr:?}");
            }
        }
    }
}

/// Samples rendered frames and checks each shows the state it claims, and
/// that the bend it belongs to passes the sampling oracle.
#[test]
fn rendered_frames_spot_check() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let spec = RenderSpec { frames: 12, ..Default::default() };
    let mut checked = 0;
    for seed in 0..40u64 {
        let c = chain(6, 500 + seed);
        let Some(plan) = Planner::new(&c).plan_exhaustive().unwrap().plan else { continue };
        for plan in [plan.clone(), plan.reversed()] {
            let frames = render_plan(&c, &plan, &spec).unwrap();
            assert!(frames.iter().all(|f| f.svg.starts_with("<svg") && f.svg.trim_end().ends_with("</svg>")));
            let straight_first = plan.to_straighten();
            for f in frames.choose_multiple(&mut rng, 10) {
                let joint = f.joint.unwrap();
                let k = straight_first.order.iter().position(|&j| j == joint).unwrap();
                let s = JointSet::from_joints(c.joint_count(), straight_first.order[..k].iter().copied());
                let want = c.state_at_angle(&s, joint, f.angle).unwrap();
                assert!(f.vertices.iter().zip(&want).all(|(p, q)| p.dist(*q) < 1e-12));
                assert!(is_strongly_simple(&f.vertices, c.tolerance()));
                assert!(foldable_sampled(&c.state_embedding(&s), joint, 256).unwrap());
                checked += 1;
            }
            if plan.direction == Direction::Form {
                let last = &frames.last().unwrap().vertices;
                assert!(last.iter().zip(c.vertices()).all(|(p, q)| p.dist(*q) < 1e-9));
            }
        }
    }
    assert!(checked >= 10);
}
