//! `bendplan`: check chains, test bends, verify and search bend orders.
//!
//! Exit status is 0 when the answer is positive (simple, feasible, plan
//! found), 1 when it is a proven negative, and 2 on any input error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bendplan::chain::ChainError;
use bendplan::document::Representation;
use bendplan::feasibility::{self, Collision};
use bendplan::generate::{random_chain, DEFAULT_ATTEMPTS};
use bendplan::planner::{verify_identity_report, Planner};
use bendplan::render::render_plan;
use bendplan::{
    Chain, ChainDocument, Direction, DocumentError, FoldPlan, FoldVerdict, JointSet, PlanResult, RenderError,
    RenderSpec, Tolerance,
};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

const CLEARANCE_ENV: &str = "BENDPLAN_CLEARANCE";

#[derive(Parser, Debug)]
#[command(name = "bendplan", version, about = "Bend sequences for planar wire chains")]
struct Cli {
    /// Minimum separation below which features count as touching. Takes
    /// precedence over a chain file's own clearance and over BENDPLAN_CLEARANCE.
    #[arg(long, global = true)]
    clearance: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Identity,
    Outwards,
    Inwards,
    Exhaustive,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Is the chain strongly simple?
    Check { chain: PathBuf },
    /// Can one joint be straightened completely from a partial state?
    Feasible {
        chain: PathBuf,
        /// Joints already straightened, e.g. `1,3`.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        state: Vec<usize>,
        #[arg(long)]
        joint: usize,
        /// Also run the sampling check with this many intervals.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Replay a bend order.
    Verify {
        chain: PathBuf,
        /// Straightening order, e.g. `1,5,4,3,2`.
        #[arg(long, value_delimiter = ',', conflicts_with = "identity", required_unless_present = "identity")]
        perm: Option<Vec<usize>>,
        /// Read `--perm` as a forming order.
        #[arg(long, requires = "perm")]
        forming: bool,
        /// Form joints 1..n in order, decided by the painting walk.
        #[arg(long)]
        identity: bool,
    },
    /// Search for a bend order.
    Plan {
        chain: PathBuf,
        #[arg(long, value_enum, default_value_t = Strategy::Exhaustive)]
        strategy: Strategy,
    },
    /// List every feasible straightening order (at most 8 joints).
    Enumerate { chain: PathBuf },
    /// Write a random strongly simple chain.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ATTEMPTS)]
        attempts: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write one SVG per frame of a bend order.
    Render {
        chain: PathBuf,
        #[arg(long, value_delimiter = ',')]
        plan: Vec<usize>,
        /// Read `--plan` as a forming order.
        #[arg(long)]
        forming: bool,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = RenderSpec::default().frames)]
        frames: usize,
        #[arg(long, default_value_t = RenderSpec::default().stroke_width)]
        stroke_width: f64,
        #[arg(long, default_value_t = RenderSpec::default().padding)]
        padding: f64,
        /// Draw the moving part in the same style as the fixed part.
        #[arg(long)]
        no_highlight: bool,
    },
}

enum Outcome {
    Yes,
    No,
}

impl Outcome {
    fn from(positive: bool) -> Self {
        if positive {
            Outcome::Yes
        } else {
            Outcome::No
        }
    }
}

struct Ctx {
    flag: Option<f64>,
    format: Format,
}

impl Ctx {
    /// Flag, then the environment; the chain file's own clearance sits
    /// between the two and is applied in [`Ctx::load`].
    fn env_tolerance(&self) -> Result<Tolerance> {
        let value = match std::env::var(CLEARANCE_ENV) {
            Ok(v) => Some(v.trim().parse::<f64>().with_context(|| format!("{CLEARANCE_ENV}={v:?} is not a number"))?),
            Err(_) => None,
        };
        match value {
            Some(c) => {
                Tolerance::new(c).with_context(|| format!("{CLEARANCE_ENV} must be finite and positive, got {c}"))
            }
            None => Ok(Tolerance::default()),
        }
    }

    fn tolerance(&self, doc: &ChainDocument) -> Result<Tolerance> {
        if let Some(c) = self.flag {
            return Tolerance::new(c).with_context(|| format!("--clearance must be finite and positive, got {c}"));
        }
        Ok(doc.tolerance(self.env_tolerance()?)?)
    }

    fn read(&self, path: &Path) -> Result<ChainDocument> {
        ChainDocument::load(path).with_context(|| format!("reading {}", path.display()))
    }

    fn load(&self, path: &Path) -> Result<Chain> {
        let doc = self.read(path)?;
        let tol = self.tolerance(&doc)?;
        doc.to_chain_with(tol).with_context(|| format!("loading {}", path.display()))
    }

    fn emit<V: Serialize>(&self, value: &V, text: impl FnOnce() -> String) -> Result<()> {
        match self.format {
            Format::Json => println!("{}", serde_json::to_string_pretty(value)?),
            Format::Text => print!("{}", text()),
        }
        Ok(())
    }
}

fn joints(order: &[usize]) -> String {
    order.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")
}

fn describe(v: &FoldVerdict) -> String {
    match &v.witness {
        None => format!("joint {}: feasible", v.joint),
        Some(Collision::ArcMeetsEdge { edge, distance, source, .. }) => format!(
            "joint {}: blocked, arc traced by ({}, {}) comes within {distance:e} of edge {edge}",
            v.joint, source.x, source.y
        ),
        Some(Collision::FinalOverlap { fixed_edge, moving_edge, distance, .. }) => format!(
            "joint {}: blocked, final edge {moving_edge} comes within {distance:e} of edge {fixed_edge}",
            v.joint
        ),
        Some(Collision::SampledOverlap { angle, edges }) => {
            format!("joint {}: blocked at angle {angle}, edges {} and {} touch", v.joint, edges.0, edges.1)
        }
    }
}

fn plan_text(r: &PlanResult) -> String {
    let mut s = String::new();
    match (&r.plan, &r.forming) {
        (Some(p), Some(f)) => {
            s.push_str(&format!("found\nstraighten: {}\nform: {}\n", joints(&p.order), joints(&f.order)));
        }
        _ => s.push_str("not found\n"),
    }
    for v in &r.trace {
        s.push_str(&describe(v));
        s.push('\n');
    }
    s
}

#[derive(Serialize)]
struct CheckReport {
    strongly_simple: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<(usize, usize)>,
    joints: usize,
}

#[derive(Serialize)]
struct FeasibleReport<'a> {
    #[serde(flatten)]
    verdict: &'a FoldVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    sampled: Option<bool>,
}

fn run(cli: Cli) -> Result<Outcome> {
    let ctx = Ctx { flag: cli.clearance, format: cli.format };
    match cli.command {
        Command::Check { chain } => {
            let doc = ctx.read(&chain)?;
            let tol = ctx.tolerance(&doc)?;
            let (report, ok) = match doc.to_chain_with(tol) {
                Ok(c) => (CheckReport { strongly_simple: true, edges: None, joints: c.joint_count() }, true),
                Err(DocumentError::Chain(ChainError::NotStronglySimple(a, b))) => {
                    let joints = doc
                        .vertices
                        .as_ref()
                        .map_or_else(|| doc.angles.as_ref().map_or(0, Vec::len), |v| v.len().saturating_sub(2));
                    (CheckReport { strongly_simple: false, edges: Some((a, b)), joints }, false)
                }
                Err(e) => return Err(e).with_context(|| format!("loading {}", chain.display())),
            };
            ctx.emit(&report, || match report.edges {
                None => format!("strongly simple ({} joints)\n", report.joints),
                Some((a, b)) => format!("not strongly simple: edges {a} and {b} come within clearance\n"),
            })?;
            Ok(Outcome::from(ok))
        }
        Command::Feasible { chain, state, joint, samples } => {
            let c = ctx.load(&chain)?;
            let n = c.joint_count();
            if let Some(&bad) = state.iter().find(|&&j| j == 0 || j > n) {
                bail!("state joint {bad} is outside 1..={n}");
            }
            let s = JointSet::from_joints(n, state);
            let st = c.state_embedding(&s);
            let verdict = feasibility::is_foldable(&st, joint)?;
            let sampled = samples.map(|k| feasibility::foldable_sampled(&st, joint, k)).transpose()?;
            let report = FeasibleReport { verdict: &verdict, sampled };
            ctx.emit(&report, || {
                let mut t = describe(&verdict);
                if let Some(ok) = sampled {
                    t.push_str(if ok { "\nsampled: feasible" } else { "\nsampled: blocked" });
                }
                t.push('\n');
                t
            })?;
            Ok(Outcome::from(verdict.feasible))
        }
        Command::Verify { chain, perm, forming, identity } => {
            let c = ctx.load(&chain)?;
            let result = if identity {
                let (r, report) = verify_identity_report(&c);
                debug_assert!(report.paint_monotone && report.reach_decreasing);
                r
            } else {
                let order = perm.expect("clap requires --perm without --identity");
                let dir = if forming { Direction::Form } else { Direction::Straighten };
                let plan = FoldPlan::new(order, dir, c.joint_count())?;
                Planner::new(&c).verify_permutation(&plan)?
            };
            ctx.emit(&result, || plan_text(&result))?;
            Ok(Outcome::from(result.found))
        }
        Command::Plan { chain, strategy } => {
            let c = ctx.load(&chain)?;
            let p = Planner::new(&c);
            let result = match strategy {
                Strategy::Identity => p.verify_identity(),
                Strategy::Outwards => p.plan_outwards(),
                Strategy::Inwards => p.plan_inwards(),
                Strategy::Exhaustive => p.plan_exhaustive()?,
            };
            ctx.emit(&result, || plan_text(&result))?;
            Ok(Outcome::from(result.found))
        }
        Command::Enumerate { chain } => {
            let c = ctx.load(&chain)?;
            let all = Planner::new(&c).enumerate_foldable_permutations()?;
            let orders: Vec<&Vec<usize>> = all.iter().map(|p| &p.order).collect();
            ctx.emit(&orders, || {
                let mut t = format!("{} feasible straightening orders\n", all.len());
                for p in &all {
                    t.push_str(&joints(&p.order));
                    t.push('\n');
                }
                t
            })?;
            Ok(Outcome::from(!all.is_empty()))
        }
        Command::Gen { n, seed, attempts, out } => {
            let tol = match ctx.flag {
                Some(c) => {
                    Tolerance::new(c).with_context(|| format!("--clearance must be finite and positive, got {c}"))?
                }
                None => ctx.env_tolerance()?,
            };
            let c = random_chain(n, seed, attempts, tol)?;
            let doc =
                ChainDocument::from_chain(&c, Representation::Vertices).named(format!("random n={n} seed={seed}"));
            match out {
                Some(path) => doc.save(&path).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{}", doc.to_json()),
            }
            Ok(Outcome::Yes)
        }
        Command::Render { chain, plan, forming, out, frames, stroke_width, padding, no_highlight } => {
            let c = ctx.load(&chain)?;
            let dir = if forming { Direction::Form } else { Direction::Straighten };
            let plan = FoldPlan::new(plan, dir, c.joint_count())?;
            let spec = RenderSpec { frames, stroke_width, padding, highlight_moving: !no_highlight };
            let rendered = match render_plan(&c, &plan, &spec) {
                Ok(f) => f,
                Err(RenderError::InfeasiblePlan { step, joint }) => {
                    eprintln!("plan fails at step {step}: joint {joint} cannot be bent");
                    return Ok(Outcome::No);
                }
                Err(e) => return Err(e.into()),
            };
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            let mut written = Vec::with_capacity(rendered.len());
            for (k, frame) in rendered.iter().enumerate() {
                let path = out.join(format!("frame_{k:04}.svg"));
                fs::write(&path, &frame.svg).with_context(|| format!("writing {}", path.display()))?;
                written.push(path.display().to_string());
            }
            ctx.emit(&written, || format!("wrote {} frames to {}\n", written.len(), out.display()))?;
            Ok(Outcome::Yes)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
