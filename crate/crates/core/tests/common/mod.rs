#![allow(dead_code)]

use fastlimit::graph::{Knot, MonotoneGraph, Tail};
use fastlimit::grid::Grid1D;
use fastlimit::lab::SweepSetup;
use fastlimit::reaction::{InitialData, ReactionSystemSpec, ReactionTerm};
use fastlimit::trajectory::TimeSpec;
use rand::Rng;

pub const EVANS_KS: [f64; 4] = [10.0, 100.0, 1000.0, 10000.0];

/// Heaviside graph, canonical reaction, `d1 = 1`, `d2 = 0.5`, no sources,
/// data projected from `a = 1 + cos(2πx)`, `b = -2x` on `(0, 1)`.
pub fn evans_setup(n: usize, t_end: f64, dt: f64, stride: usize) -> SweepSetup {
    evans_setup_with(n, t_end, dt, stride, "1 + cos(2*pi*x)", "-2*x")
}

pub fn evans_setup_with(n: usize, t_end: f64, dt: f64, stride: usize, a: &str, b: &str) -> SweepSetup {
    let grid = Grid1D::unit(n).unwrap();
    let graph = MonotoneGraph::heaviside();
    let spec = ReactionSystemSpec::new(graph.clone(), ReactionTerm::canonical(), 1.0, 0.5, 1.0).unwrap();
    let a = grid.field_from_expr(&fastlimit::parse_profile(a).unwrap()).unwrap();
    let b = grid.field_from_expr(&fastlimit::parse_profile(b).unwrap()).unwrap();
    let init = InitialData::projected(&graph, &a, &b, 1.0, 10.0).unwrap();
    SweepSetup {
        spec,
        grid,
        time: TimeSpec::new(t_end, dt, stride),
        init,
        ks: EVANS_KS.to_vec(),
        jobs: 1,
        tau_multiples: vec![2, 4, 8],
        config_hash: "acceptance".into(),
    }
}

/// A random maximal monotone piecewise-linear graph with 1 to 5 knots,
/// possibly with vertical jumps and vertical end rays.
pub fn random_graph<R: Rng>(rng: &mut R) -> MonotoneGraph {
    let n = rng.gen_range(1..=5);
    let mut u = rng.gen_range(-3.0..0.0);
    let mut vs: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-4.0..4.0)).collect();
    vs.sort_by(f64::total_cmp);
    let mut knots = Vec::with_capacity(n);
    for i in 0..n {
        let (lo, hi) = if rng.gen_bool(0.5) {
            (vs[2 * i], vs[2 * i + 1])
        } else {
            (vs[2 * i], vs[2 * i])
        };
        knots.push(Knot::jump(u, lo, hi));
        u += rng.gen_range(0.1..2.0);
    }
    let left = if rng.gen_bool(0.3) {
        knots[0].v_lo = fastlimit::graph::Extended::NegInf;
        Tail::End
    } else {
        Tail::Slope(rng.gen_range(0.0..3.0))
    };
    let right = if rng.gen_bool(0.3) {
        knots[n - 1].v_hi = fastlimit::graph::Extended::PosInf;
        Tail::End
    } else {
        Tail::Slope(rng.gen_range(0.0..3.0))
    };
    MonotoneGraph::new(knots, left, right).expect("random graph is valid")
}

pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
