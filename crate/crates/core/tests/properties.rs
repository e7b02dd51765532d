mod common;

use common::{random_graph, sgn};
use fastlimit::expr::{parse, Expr};
use fastlimit::graph::{Extended, MonotoneGraph};
use fastlimit::grid::{Field, Grid1D};
use fastlimit::metrics::{error_ls, tail_mass};
use fastlimit::rd::reaction_substep_cell;
use fastlimit::reaction::{canonical_f, evans_f, project_to_zero_set, ReactionSystemSpec, ReactionTerm};
use fastlimit::trajectory::SpaceTime;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn graph(seed: u64) -> MonotoneGraph {
    random_graph(&mut StdRng::seed_from_u64(seed))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn resolvent_is_a_monotone_contraction(seed: u64, lambda in 0.05..5.0f64, s1 in -20.0..20.0f64, s2 in -20.0..20.0f64) {
        let g = graph(seed);
        let j1 = g.resolvent(lambda, s1).unwrap();
        let j2 = g.resolvent(lambda, s2).unwrap();
        prop_assert!((j1 - j2).abs() <= (s1 - s2).abs() + 1e-12);
        prop_assert!((j1 - j2) * (s1 - s2) >= -1e-12);
    }

    #[test]
    fn resolvent_inverts_the_graph(seed: u64, lambda in 0.05..5.0f64, s in -20.0..20.0f64) {
        let g = graph(seed);
        let j = g.resolvent(lambda, s).unwrap();
        let section = g.section(j).unwrap();
        prop_assert!(section.contains((s - j) / lambda, 1e-10 * (1.0 + s.abs())));
    }

    #[test]
    fn resolvent_fixes_points_on_the_curve(seed: u64, u in -6.0..6.0f64, theta in 0.0..1.0f64) {
        let g = graph(seed);
        let u = g.clamp_to_domain(u);
        let sec = g.section(u).unwrap();
        let lo = sec.lo.finite().unwrap_or(-50.0);
        let hi = sec.hi.finite().unwrap_or(50.0);
        let v = lo + theta * (hi - lo);
        prop_assert!(close(g.resolvent(1.0, u + v).unwrap(), u, 1e-12));
    }

    #[test]
    fn beta_is_monotone_and_lipschitz(seed: u64, d1 in 0.01..4.0f64, d2 in 0.0..4.0f64, s1 in -20.0..20.0f64, s2 in -20.0..20.0f64) {
        let g = graph(seed);
        let b1 = g.beta(d1, d2, s1).unwrap();
        let b2 = g.beta(d1, d2, s2).unwrap();
        prop_assert!((b1 - b2) * (s1 - s2) >= -1e-12);
        prop_assert!((b1 - b2).abs() <= d1.max(d2) * (s1 - s2).abs() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn limit_pair_lies_on_the_graph(seed: u64, z in -20.0..20.0f64) {
        let g = graph(seed);
        let (u, v) = g.limit_pair(z).unwrap();
        prop_assert!(close(u + v, z, 1e-14));
        prop_assert!(g.section(u).unwrap().contains(v, 1e-12 * (1.0 + z.abs())));
    }

    #[test]
    fn yosida_is_lipschitz(seed: u64, delta in 0.01..3.0f64, s1 in -20.0..20.0f64, s2 in -20.0..20.0f64) {
        let g = graph(seed);
        let y1 = g.yosida(delta, s1).unwrap();
        let y2 = g.yosida(delta, s2).unwrap();
        prop_assert!((y1 - y2).abs() <= (s1 - s2).abs() / delta * (1.0 + 1e-12) + 1e-12);
        prop_assert!((y1 - y2) * (s1 - s2) >= -1e-12);
    }

    #[test]
    fn inverse_is_an_involution(seed: u64, s in -20.0..20.0f64) {
        let g = graph(seed);
        let inv = g.inverse();
        let back = inv.inverse();
        let j = g.resolvent(1.0, s).unwrap();
        // (I + α⁻¹)⁻¹ = I - (I + α)⁻¹
        prop_assert!(close(inv.resolvent(1.0, s).unwrap(), s - j, 1e-12));
        prop_assert!(close(back.resolvent(1.0, s).unwrap(), j, 1e-12));
        prop_assert_eq!(back.knots().len(), g.knots().len());
    }

    #[test]
    fn canonical_f_sign_inequality(
        seed: u64,
        u1 in -6.0..6.0f64, v1 in -6.0..6.0f64,
        u2 in -6.0..6.0f64, v2 in -6.0..6.0f64,
        tie in 0u8..4,
    ) {
        let g = graph(seed);
        // ties exercise the sgn(0) = 0 branch
        let (u2, v2) = match tie {
            0 => (u1, v2),
            1 => (u2, v1),
            _ => (u2, v2),
        };
        let df = canonical_f(&g, u1, v1).unwrap() - canonical_f(&g, u2, v2).unwrap();
        prop_assert!(df * (sgn(u1 - u2) - sgn(v1 - v2)) >= -1e-12);
    }

    #[test]
    fn evans_f_sign_inequality(
        u1 in -3.0..3.0f64, v1 in -3.0..3.0f64,
        u2 in -3.0..3.0f64, v2 in -3.0..3.0f64,
        tie in 0u8..4,
    ) {
        let (u2, v2) = match tie {
            0 => (u1, v2),
            1 => (u2, v1),
            _ => (u2, v2),
        };
        let df = evans_f(u1, v1) - evans_f(u2, v2);
        prop_assert!(df * (sgn(u1 - u2) - sgn(v1 - v2)) >= -1e-12);
    }

    #[test]
    fn canonical_f_sign_dichotomy(seed: u64, u in -6.0..6.0f64, v in -20.0..20.0f64) {
        let g = graph(seed);
        let u = g.clamp_to_domain(u);
        let sec = g.section(u).unwrap();
        let f = canonical_f(&g, u, v).unwrap();
        let below = matches!(sec.lo, Extended::Finite(lo) if v < lo - 1e-9) || matches!(sec.lo, Extended::PosInf);
        let above = matches!(sec.hi, Extended::Finite(hi) if v > hi + 1e-9) || matches!(sec.hi, Extended::NegInf);
        if below {
            prop_assert!(f > 0.0, "v = {v} below α({u}) but F = {f}");
        } else if above {
            prop_assert!(f < 0.0, "v = {v} above α({u}) but F = {f}");
        } else {
            prop_assert!(f.abs() <= 1e-8, "v = {v} in α({u}) but F = {f}");
        }
    }

    #[test]
    fn canonical_f_is_monotone_in_each_argument(seed: u64, u in -6.0..6.0f64, v in -6.0..6.0f64, d in 1e-6..1.0f64) {
        let g = graph(seed);
        let f = canonical_f(&g, u, v).unwrap();
        let fu = canonical_f(&g, u + d, v).unwrap();
        let fv = canonical_f(&g, u, v + d).unwrap();
        prop_assert!(fu >= f - 1e-12 && fu - f <= d + 1e-12);
        prop_assert!(fv <= f + 1e-12 && f - fv <= d + 1e-12);
    }

    #[test]
    fn projection_preserves_the_sum(seed: u64, values in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 1..40)) {
        let g = graph(seed);
        let a = Field(values.iter().map(|p| p.0).collect());
        let b = Field(values.iter().map(|p| p.1).collect());
        let (u, v) = project_to_zero_set(&g, &a, &b).unwrap();
        for i in 0..a.len() {
            let s = a[i] + b[i];
            // one ulp at the scale of the summands
            let scale = s.abs().max(u[i].abs()).max(v[i].abs());
            prop_assert!((u[i] + v[i] - s).abs() <= f64::EPSILON * scale);
            prop_assert!(canonical_f(&g, u[i], v[i]).unwrap().abs() <= 1e-12 * (1.0 + s.abs()));
        }
    }

    #[test]
    fn reaction_substep_moves_toward_the_zero_set(
        seed: u64,
        u in -5.0..5.0f64, v in -5.0..5.0f64,
        k in 0.1..1e4f64, dt in 1e-5..1e-1f64,
    ) {
        let g = graph(seed);
        let spec = ReactionSystemSpec::new(g.clone(), ReactionTerm::canonical(), 1.0, 1.0, k).unwrap();
        let (u1, v1) = reaction_substep_cell(&spec, u, v, dt).unwrap();
        prop_assert!(close(u1 + v1, u + v, 1e-12));
        let f = canonical_f(&g, u1, v1).unwrap();
        prop_assert!(f * (u1 - u) <= 1e-10 * (1.0 + u.abs() + v.abs()));
    }
}

/// Expression tree kept separate from the library's, rendered to source text
/// and evaluated by its own tree walk.
#[derive(Debug, Clone)]
enum Tree {
    Num(f64),
    U,
    V,
    Neg(Box<Tree>),
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Min(Box<Tree>, Box<Tree>),
    Max(Box<Tree>, Box<Tree>),
    Abs(Box<Tree>),
    Pos(Box<Tree>),
    Sin(Box<Tree>),
    Cos(Box<Tree>),
}

impl Tree {
    fn source(&self) -> String {
        match self {
            Tree::Num(c) => format!("{c}"),
            Tree::U => "u".into(),
            Tree::V => "v".into(),
            Tree::Neg(a) => format!("-({})", a.source()),
            Tree::Add(a, b) => format!("({}) + ({})", a.source(), b.source()),
            Tree::Sub(a, b) => format!("({}) - ({})", a.source(), b.source()),
            Tree::Mul(a, b) => format!("({}) * ({})", a.source(), b.source()),
            Tree::Min(a, b) => format!("min({}, {})", a.source(), b.source()),
            Tree::Max(a, b) => format!("max({}, {})", a.source(), b.source()),
            Tree::Abs(a) => format!("abs({})", a.source()),
            Tree::Pos(a) => format!("pospart({})", a.source()),
            Tree::Sin(a) => format!("sin({})", a.source()),
            Tree::Cos(a) => format!("cos({})", a.source()),
        }
    }

    fn eval(&self, u: f64, v: f64) -> f64 {
        match self {
            Tree::Num(c) => *c,
            Tree::U => u,
            Tree::V => v,
            Tree::Neg(a) => -a.eval(u, v),
            Tree::Add(a, b) => a.eval(u, v) + b.eval(u, v),
            Tree::Sub(a, b) => a.eval(u, v) - b.eval(u, v),
            Tree::Mul(a, b) => a.eval(u, v) * b.eval(u, v),
            Tree::Min(a, b) => a.eval(u, v).min(b.eval(u, v)),
            Tree::Max(a, b) => a.eval(u, v).max(b.eval(u, v)),
            Tree::Abs(a) => a.eval(u, v).abs(),
            Tree::Pos(a) => a.eval(u, v).max(0.0),
            Tree::Sin(a) => a.eval(u, v).sin(),
            Tree::Cos(a) => a.eval(u, v).cos(),
        }
    }
}

fn tree() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        (0.0..100.0f64).prop_map(Tree::Num),
        (0u32..20).prop_map(|n| Tree::Num(n as f64)),
        Just(Tree::U),
        Just(Tree::V),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        let b = |t: Tree| Box::new(t);
        prop_oneof![
            inner.clone().prop_map(move |a| Tree::Neg(b(a))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Tree::Add(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Tree::Sub(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Tree::Mul(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Tree::Min(b(x), b(y))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| Tree::Max(b(x), b(y))),
            inner.clone().prop_map(move |a| Tree::Abs(b(a))),
            inner.clone().prop_map(move |a| Tree::Pos(b(a))),
            inner.clone().prop_map(move |a| Tree::Sin(b(a))),
            inner.prop_map(move |a| Tree::Cos(b(a))),
        ]
    })
}

fn same(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn eval_matches_reference_tree_walk(t in tree(), u in -5.0..5.0f64, v in -5.0..5.0f64) {
        let e = parse(&t.source()).unwrap();
        let got = e.eval(u, v).unwrap();
        let want = t.eval(u, v);
        prop_assert!(same(got, want), "{} at ({u}, {v}): {got} vs {want}", t.source());
    }

    #[test]
    fn print_parse_is_idempotent(t in tree()) {
        let e: Expr = parse(&t.source()).unwrap();
        let printed = e.to_string();
        let again = parse(&printed).unwrap();
        prop_assert_eq!(&again, &e);
        prop_assert_eq!(again.to_string(), printed);
    }
}

fn frames(values: &[f64], n: usize) -> Vec<Field> {
    values.chunks(n).map(|c| Field(c.to_vec())).collect()
}

/// Direct quadrature: midpoint in space, trapezoid in time on uniform snapshots.
fn brute_error_ls(a: &[f64], b: &[f64], n: usize, dt: f64, s: f64) -> f64 {
    let nt = a.len() / n;
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    for j in 0..nt {
        let w = if j == 0 || j == nt - 1 { 0.5 * dt } else { dt };
        for i in 0..n {
            total += w * h * (a[j * n + i] - b[j * n + i]).abs().powf(s);
        }
    }
    total.powf(1.0 / s)
}

fn space_time() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..12, 2usize..8).prop_flat_map(|(n, nt)| {
        let len = n * nt;
        (
            Just(n),
            Just(nt),
            prop::collection::vec(-3.0..3.0f64, len),
            prop::collection::vec(-3.0..3.0f64, len),
            prop::collection::vec(-3.0..3.0f64, len),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn error_ls_is_a_norm_of_the_difference(
        (n, nt, a, b, c) in space_time(),
        s in 1.0..2.0f64,
        lambda in -4.0..4.0f64,
    ) {
        let grid = Grid1D::unit(n).unwrap();
        let dt = 0.1;
        let times: Vec<f64> = (0..nt).map(|j| j as f64 * dt).collect();
        let (fa, fb, fc) = (frames(&a, n), frames(&b, n), frames(&c, n));
        let zero = frames(&vec![0.0; a.len()], n);
        let e = |x: &[Field], y: &[Field]| {
            error_ls(&SpaceTime::new(&grid, &times, x), &SpaceTime::new(&grid, &times, y), s).unwrap()
        };

        let oracle = brute_error_ls(&a, &b, n, dt, s);
        prop_assert!(close(e(&fa, &fb), oracle, 1e-14));

        prop_assert!(e(&fa, &fc) <= e(&fa, &fb) + e(&fb, &fc) + 1e-12);

        let scaled: Vec<f64> = a.iter().map(|x| lambda * x).collect();
        let fs = frames(&scaled, n);
        prop_assert!(close(e(&fs, &zero), lambda.abs() * e(&fa, &zero), 1e-12));
        prop_assert!(close(e(&fa, &fb), e(&fb, &fa), 1e-15));
    }

    #[test]
    fn tail_mass_respects_the_holder_bound(
        (n, nt, a, _b, _c) in space_time(),
        s in 1.0..2.0f64,
        theta in 0.05..0.95f64,
    ) {
        let grid = Grid1D::unit(n).unwrap();
        let times: Vec<f64> = (0..nt).map(|j| j as f64 * 0.05).collect();
        let fa = frames(&a, n);
        let tm = tail_mass(&SpaceTime::new(&grid, &times, &fa), s, theta).unwrap();
        prop_assert!(tm.value <= tm.bound * (1.0 + 1e-12) + 1e-14);
        let total = times[nt - 1];
        prop_assert!(close(tm.measure, (1.0 - theta) * total, 1e-10));
    }
}
