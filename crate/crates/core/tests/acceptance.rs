//! Acceptance suite. Prints one line per criterion and exits nonzero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::error::Error as StdError;
use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use wgraph_core::esa::L2Class;
use wgraph_core::operator::{laplacian_of, quadratic_form};
use wgraph_core::trials::{random_function, seeded, TrialRng};
use wgraph_core::*;

type Run = std::result::Result<Outcome, Box<dyn StdError>>;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn vid(x: u64) -> VertexId {
    VertexId(x)
}

fn rel(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn range(lo: u64, hi: u64) -> Vec<VertexId> {
    (lo..=hi).map(VertexId).collect()
}

/// Families with a pool of vertices to draw test functions from.
fn identity_families(rng: &mut TrialRng) -> Result<Vec<(String, WeightedGraph, Vec<VertexId>)>> {
    let omega: Vec<f64> = (0..5).map(|_| rng.random_range(0.5..=2.0)).collect();
    let cond: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..=3.0)).collect();
    let mut tree = FamilySpec::binary_tree();
    tree.alpha = 1.0;
    tree.beta = 0.5;
    Ok(vec![
        ("power(1,-2)".into(), build_family(&FamilySpec::power(1.0, -2.0))?, range(1, 40)),
        (
            "power(1.5,0.5,eps=0.25)".into(),
            build_family(&FamilySpec::power(1.5, 0.5).with_epsilon(0.25))?,
            range(1, 40),
        ),
        ("log".into(), build_family(&FamilySpec::log())?, range(2, 40)),
        ("random table".into(), build_family(&FamilySpec::table(omega, cond))?, range(1, 40)),
        ("binary tree(1,0.5)".into(), build_family(&tree)?, range(1, 63)),
    ])
}

/// Support of f together with its neighbors.
fn closure(g: &WeightedGraph, f: &FiniteSupportFn) -> Result<BTreeSet<VertexId>> {
    let mut out = BTreeSet::new();
    for x in f.support() {
        out.insert(x);
        out.extend(g.neighbors(x)?);
    }
    Ok(out)
}

/// A random connected graph on ≤ 70 vertices, a nonnegative potential and a
/// combinatorial ball K around 0 with |K| ≤ 50, nonempty boundary and
/// connected interior.
fn random_region(rng: &mut TrialRng) -> std::result::Result<(SchrodingerData, FiniteRegion), Box<dyn StdError>> {
    loop {
        let m: u64 = rng.random_range(10..=70);
        let mut b = FiniteGraph::builder();
        let mut seen = BTreeSet::new();
        for v in 1..m {
            let p = rng.random_range(0..v);
            seen.insert((p, v));
            b = b.edge(p, v, rng.random_range(0.2..=5.0));
        }
        for _ in 0..m / 3 {
            let (x, y) = (rng.random_range(0..m), rng.random_range(0..m));
            let key = (x.min(y), x.max(y));
            if x != y && seen.insert(key) {
                b = b.edge(key.0, key.1, rng.random_range(0.2..=5.0));
            }
        }
        let g = WeightedGraph::new(b.build()?);
        let mut w = BTreeMap::new();
        for x in 0..m {
            if rng.random_bool(0.5) {
                w.insert(vid(x), rng.random_range(0.0..=2.0));
            }
        }
        let s = SchrodingerData::combinatorial(g.clone()).with_potential(Potential::Table(Arc::new(w)));
        let region = combinatorial_ball(&g, vid(0), rng.random_range(1..=4))?;
        if region.len() > 50 || region.boundary().is_empty() {
            continue;
        }
        if !is_connected_interior(&g, &region)?.holds() {
            continue;
        }
        return Ok((s, region));
    }
}

fn criterion_1() -> Run {
    let s = gauge_to_schrodinger(&build_family(&FamilySpec::power(1.0, -2.0))?);
    let mut worst = 0.0f64;
    for n in 2..=10_000u64 {
        let x = n as f64;
        worst = worst.max(rel(s.w(vid(n))?, -x * (2.0 * x + 1.0)));
    }
    Ok(Outcome::new(
        worst <= 1e-9,
        format!("W(n) vs -n(2n+1), n=2..1e4: max rel err {worst:.1e} (tol 1e-9)"),
    ))
}

fn criterion_2() -> Run {
    let mut rng = seeded(2);
    let families = identity_families(&mut rng)?;
    let mut worst = 0.0f64;
    let mut points = 0usize;
    for trial in 0..100 {
        let (_, g, pool) = &families[trial % families.len()];
        let s = gauge_to_schrodinger(g);
        let f = random_function(&mut rng, pool);
        let wf = conjugate_u_omega(g, &f)?;
        for x in closure(g, &f)? {
            let lhs = apply_schrodinger(&s, &wf, x)?;
            let rhs = g.omega(x)? * apply_laplacian(g, &f, x)?;
            // size of the terms that cancel in the left-hand side
            let mut scale = (s.w(x)? * wf.get(x)).abs();
            for y in g.neighbors(x)? {
                scale += s.a(x, y)? * (wf.get(x).abs() + wf.get(y).abs());
            }
            if scale > 0.0 {
                worst = worst.max((lhs - rhs).abs() / scale);
            }
            points += 1;
        }
    }
    Ok(Outcome::new(
        worst <= 1e-10,
        format!("100 functions over 5 families, {points} points: max rel err {worst:.1e} (tol 1e-10)"),
    ))
}

/// Σ_x Σ_{y∼x} c |h(x)| |f(x) − f(y)|, the size of the terms of ⟨Δf, h⟩_ω.
fn pairing_scale(g: &WeightedGraph, f: &FiniteSupportFn, h: &FiniteSupportFn) -> Result<f64> {
    let mut total = 0.0;
    for x in h.support() {
        for y in g.neighbors(x)? {
            total += g.conductance(x, y)? * h.get(x).abs() * (f.get(x) - f.get(y)).abs();
        }
    }
    Ok(total)
}

fn criterion_3() -> Run {
    let mut rng = seeded(3);
    let families = identity_families(&mut rng)?;
    let (mut green, mut symmetry) = (0.0f64, 0.0f64);
    let mut negative = 0;
    for trial in 0..500 {
        let (_, g, pool) = &families[trial % families.len()];
        let f = random_function(&mut rng, pool);
        let h = random_function(&mut rng, pool);
        let lf = laplacian_of(g, &f)?;
        let lh = laplacian_of(g, &h)?;
        let q = quadratic_form(g, &f)?;
        if q < 0.0 {
            negative += 1;
        }
        let scale = pairing_scale(g, &f, &f)?;
        if scale > 0.0 {
            green = green.max((inner_product_omega(g, &lf, &f)? - q).abs() / scale);
        }
        let scale = pairing_scale(g, &f, &h)?.max(pairing_scale(g, &h, &f)?);
        if scale > 0.0 {
            let gap = inner_product_omega(g, &lf, &h)? - inner_product_omega(g, &f, &lh)?;
            symmetry = symmetry.max(gap.abs() / scale);
        }
    }
    Ok(Outcome::new(
        green <= 1e-10 && symmetry <= 1e-10 && negative == 0,
        format!(
            "500 pairs: <Df,f> vs Q(f) {green:.1e}, <Df,h> vs <f,Dh> {symmetry:.1e} (tol 1e-10), Q < 0 in {negative}"
        ),
    ))
}

fn path(n: u64) -> Result<WeightedGraph> {
    let mut b = FiniteGraph::builder();
    for x in 0..n {
        b = b.edge(x, x + 1, 1.0);
    }
    Ok(WeightedGraph::new(b.build()?))
}

/// The two hand cases, each embedded in a longer path so that the outer
/// vertices of the region are its boundary.
fn dirichlet_hand_cases() -> std::result::Result<f64, Box<dyn StdError>> {
    let opts = DirichletOptions::default();
    let g = path(5)?;
    let region = FiniteRegion::new(&g, range(1, 4))?;
    let p = DirichletProblem::new(
        SchrodingerData::combinatorial(g),
        region,
        BTreeMap::from([(vid(1), 0.0), (vid(4), 3.0)]),
    )?;
    let f = solve_dirichlet(&p, &opts)?.f;
    let mut worst = (f.get(vid(2)) - 1.0).abs().max((f.get(vid(3)) - 2.0).abs());

    let g = path(4)?;
    let region = FiniteRegion::new(&g, range(1, 3))?;
    let s = SchrodingerData::combinatorial(g).with_potential(Potential::Table(Arc::new(BTreeMap::from([(vid(2), 1.0)]))));
    let f = solve_dirichlet(&DirichletProblem::constant_boundary(s, region, 1.0)?, &opts)?.f;
    worst = worst.max((f.get(vid(2)) - 2.0 / 3.0).abs());
    Ok(worst)
}

fn criterion_4() -> Run {
    let mut rng = seeded(4);
    let opts = DirichletOptions::default();
    let (mut linearity, mut nonpositive, mut residual_fail, mut sizes) = (0.0f64, 0usize, 0usize, 0usize);
    for _ in 0..100 {
        let (s, region) = random_region(&mut rng)?;
        sizes = sizes.max(region.len());
        let boundary: Vec<VertexId> = region.boundary().iter().copied().collect();
        let draw = |rng: &mut TrialRng| -> BTreeMap<VertexId, f64> {
            boundary.iter().map(|&x| (x, rng.random_range(-1.0..=1.0))).collect()
        };
        let u1 = draw(&mut rng);
        let u2 = draw(&mut rng);
        let u12: BTreeMap<VertexId, f64> = u1.iter().map(|(&x, &v)| (x, v + u2[&x])).collect();
        let base = DirichletProblem::new(s.clone(), region.clone(), u1)?;
        let mut solve = |p: &DirichletProblem| -> std::result::Result<FiniteSupportFn, Box<dyn StdError>> {
            let sol = solve_dirichlet(p, &opts)?;
            if sol.residual > sol.residual_bound {
                residual_fail += 1;
            }
            Ok(sol.f)
        };
        let f1 = solve(&base)?;
        let f2 = solve(&base.with_boundary(u2)?)?;
        let f12 = solve(&base.with_boundary(u12)?)?;
        let size = f12.max_abs().max(1.0);
        for &x in region.interior() {
            linearity = linearity.max((f12.get(x) - f1.get(x) - f2.get(x)).abs() / size);
        }

        // u ≥ 0, u ≢ 0
        let mut u: BTreeMap<VertexId, f64> = boundary
            .iter()
            .map(|&x| (x, if rng.random_bool(0.4) { 0.0 } else { rng.random_range(0.0..=1.0) }))
            .collect();
        if u.values().all(|&v| v == 0.0) {
            u.insert(boundary[0], 1.0);
        }
        let f = solve(&base.with_boundary(u)?)?;
        nonpositive += region.interior().iter().filter(|&&x| f.get(x) <= 0.0 || f.get(x).is_nan()).count();
    }
    let hand = dirichlet_hand_cases()?;
    Ok(Outcome::new(
        linearity <= 1e-10 && nonpositive == 0 && residual_fail == 0 && hand <= 1e-12,
        format!(
            "100 trials (|K| <= {sizes}): linearity residual {linearity:.1e} (tol 1e-10), \
             non-positive interior values {nonpositive}, residual failures {residual_fail}; \
             hand cases off by {hand:.1e} (tol 1e-12)"
        ),
    ))
}

fn criterion_5() -> Run {
    let mut rng = seeded(5);
    let opts = DirichletOptions::default();
    let (mut trials, mut pairs, mut violations) = (0usize, 0usize, 0usize);
    let mut tightest = f64::INFINITY;
    while trials < 100 || pairs < 10_000 {
        let (s, region) = random_region(&mut rng)?;
        let u: BTreeMap<VertexId, f64> = region
            .boundary()
            .iter()
            .map(|&x| (x, rng.random_range(0.1..=1.0)))
            .collect();
        let sol = solve_dirichlet(&DirichletProblem::new(s.clone(), region.clone(), u)?, &opts)?;
        let cert = harnack_constant(&s, &region, EdgeSum::Unordered)?;
        let verifier = HarnackVerifier::new(&s, &region, &sol.f, cert, 1e-10)?;
        for &x in region.interior() {
            for &y in region.interior() {
                if x == y {
                    continue;
                }
                let v = verifier.verify(x, y)?;
                pairs += 1;
                if !v.holds {
                    violations += 1;
                }
                tightest = tightest.min(v.bound.ln() - v.ratio.ln().abs());
            }
        }
        trials += 1;
    }
    Ok(Outcome::new(
        violations == 0,
        format!(
            "{trials} trials, {pairs} interior pairs, {violations} violations of 1/k <= phi(x)/phi(y) <= k; \
             smallest margin ln k - |ln ratio| = {tightest:.2e}"
        ),
    ))
}

fn section2_operator() -> Result<SchrodingerData> {
    Ok(gauge_to_schrodinger(&build_family(&FamilySpec::power(1.0, -2.0))?))
}

fn harmonic_options() -> HarmonicOptions {
    HarmonicOptions {
        window: 30,
        n_max: 200,
        tol: 1e-8,
        ..HarmonicOptions::default()
    }
}

fn criterion_6() -> Run {
    let s = section2_operator()?;
    let profile = build_harmonic(&s, vid(1), &harmonic_options())?;
    let positive = profile.values.iter().all(|(_, v)| v > 0.0);
    let anchor = profile.get(vid(1));
    let envelope = harnack_envelope(&s, &profile)?;
    let broken = envelope.iter().filter(|e| !e.holds).count();
    // ω itself is P-harmonic, so Φ = ω/ω(1) = 1/n
    let mut off = 0.0f64;
    for (x, v) in profile.values.iter() {
        off = off.max(rel(v, 1.0 / x.index() as f64));
    }
    Ok(Outcome::new(
        profile.converged && positive && anchor == 1.0 && profile.residual <= 1e-7 && broken == 0,
        format!(
            "converged {} after {} radii, Phi > 0 {positive}, Phi(x0) = {anchor}, residual {:.1e} (tol 1e-7), \
             envelope violations {broken} of {}; max rel gap to 1/n {off:.1e}",
            profile.converged,
            profile.history.len(),
            profile.residual,
            envelope.len()
        ),
    ))
}

fn criterion_7() -> Run {
    let mut rng = seeded(7);
    let shifted = SchrodingerData::combinatorial(build_family(&FamilySpec::power(0.0, 0.0))?)
        .with_potential(Potential::Constant(0.1));
    let operators = [section2_operator()?, shifted];
    let (mut form_gap, mut a_gap, mut w_gap) = (0.0f64, 0.0f64, 0.0f64);
    for (i, s) in operators.iter().enumerate() {
        let profile = build_harmonic(s, vid(1), &harmonic_options())?;
        let u = unitarize(s, &profile)?;
        let inner: Vec<VertexId> = u.window().interior().iter().copied().collect();
        for _ in 0..50 {
            let g = random_function(&mut rng, &inner);
            let (lhs, rhs) = u.form_pair(s, &g)?;
            form_gap = form_gap.max(rel(rhs, lhs));
        }
        let back = gauge_to_schrodinger(u.graph());
        for &x in &inner {
            let mut degree = 0.0;
            for y in s.neighbors(x)? {
                a_gap = a_gap.max(rel(back.a(x, y)?, s.a(x, y)?));
                degree += s.a(x, y)?;
            }
            w_gap = w_gap.max((back.w(x)? - s.w(x)?).abs() / s.w(x)?.abs().max(degree));
        }
        if i == 0 && !profile.converged {
            return Ok(Outcome::new(false, "harmonic construction did not converge"));
        }
    }
    Ok(Outcome::new(
        form_gap <= 1e-8 && a_gap <= 1e-9 && w_gap <= 1e-9,
        format!(
            "100 g over 2 operators: form rel gap {form_gap:.1e} (tol 1e-8); round trip a {a_gap:.1e}, \
             W {w_gap:.1e} (tol 1e-9)"
        ),
    ))
}

type MetricCase = (String, MetricContext, Vec<VertexId>);

fn metric_families(rng: &mut TrialRng) -> std::result::Result<Vec<MetricCase>, Box<dyn StdError>> {
    let (s, region) = random_region(rng)?;
    let finite_pool: Vec<VertexId> = region.vertices().iter().copied().collect();
    Ok(vec![
        ("power(1,0)".into(), MetricContext::gauge(&build_family(&FamilySpec::power(1.0, 0.0))?), range(1, 100)),
        ("log".into(), MetricContext::gauge(&build_family(&FamilySpec::log())?), range(2, 60)),
        ("power(1,-2)".into(), MetricContext::gauge(&build_family(&FamilySpec::power(1.0, -2.0))?), range(1, 60)),
        ("binary tree".into(), MetricContext::gauge(&build_family(&FamilySpec::binary_tree())?), range(1, 63)),
        ("random graph".into(), MetricContext::new(s), finite_pool),
    ])
}

fn closed_form_complete(alpha: f64, beta: f64) -> bool {
    alpha - 0.5 * beta <= 1.0
}

fn criterion_8() -> Run {
    let mut rng = seeded(8);
    let budget = metric::DEFAULT_BUDGET;
    let families = metric_families(&mut rng)?;
    let (mut axiom_fail, mut edge_fail, mut triples) = (0usize, 0usize, 0usize);
    for (_, ctx, pool) in &families {
        for _ in 0..100 {
            let pick = |rng: &mut TrialRng| pool[rng.random_range(0..pool.len())];
            let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            let dxy = delta_a(ctx, x, y, budget)?;
            let dyx = delta_a(ctx, y, x, budget)?;
            let dyz = delta_a(ctx, y, z, budget)?;
            let dxz = delta_a(ctx, x, z, budget)?;
            let dxx = delta_a(ctx, x, x, budget)?;
            let slack = 1e-12 * (dxy + dyz + dxz);
            let ok = dxx == 0.0
                && (x == y) == (dxy == 0.0)
                && (dxy - dyx).abs() <= 1e-12 * dxy
                && dxz <= dxy + dyz + slack;
            axiom_fail += usize::from(!ok);
            triples += 1;
            for n in ctx.graph().neighbors(x)? {
                let bound = ctx.edge_length(x, n)?;
                if delta_a(ctx, x, n, budget)? > bound * (1.0 + 1e-12) {
                    edge_fail += 1;
                }
            }
        }
    }

    // cutoff: 1 on B_R, 0 off B_{R+1}, 1-Lipschitz along every edge near the ball
    let mut lipschitz_fail = 0usize;
    let mut cutoffs = 0usize;
    let cases: Vec<(usize, VertexId, Vec<f64>)> = vec![
        (0, vid(1), vec![0.5, 1.0, 2.0, 3.0]),
        (1, vid(2), vec![0.5, 1.0, 1.5]),
        (3, vid(1), vec![1.5, 3.0]),
        (4, vid(0), vec![0.5, 1.0]),
    ];
    for (i, x0, radii) in cases {
        let ctx = &families[i].1;
        for r in radii {
            let f = cutoff(ctx, x0, r, budget)?;
            let inner = metric_ball(ctx, x0, r, budget)?;
            let outer = metric_ball(ctx, x0, r + 1.0, budget)?;
            cutoffs += 1;
            for &x in inner.vertices() {
                lipschitz_fail += usize::from(f.get(x) != 1.0);
            }
            for x in f.support() {
                lipschitz_fail += usize::from(!outer.contains(x));
            }
            for &x in outer.vertices() {
                for y in ctx.graph().neighbors(x)? {
                    let step = (f.get(x) - f.get(y)).abs();
                    if step > delta_a(ctx, x, y, budget)? + 1e-12 {
                        lipschitz_fail += 1;
                    }
                }
            }
            let members: Vec<VertexId> = outer.vertices().iter().copied().collect();
            for _ in 0..20 {
                let x = members[rng.random_range(0..members.len())];
                let y = members[rng.random_range(0..members.len())];
                if (f.get(x) - f.get(y)).abs() > delta_a(ctx, x, y, budget)? + 1e-12 {
                    lipschitz_fail += 1;
                }
            }
        }
    }

    // (label, spec, α, effective β with a_n ~ n^{2α−β'} in the gauge)
    let verdicts: Vec<(&str, FamilySpec, Completeness)> = vec![
        ("power a=1 b=0", FamilySpec::power(1.0, 0.0), oracle(closed_form_complete(1.0, 0.0))),
        ("power a=3 b=0", FamilySpec::power(3.0, 0.0), oracle(closed_form_complete(3.0, 0.0))),
        // a_n ~ n² ln²n: Σ 1/(n ln n) diverges
        ("log", FamilySpec::log(), Completeness::Complete),
        // a_n = n^{2+ε} is c_n = n^{2+ε} with ω ≡ 1, i.e. β' = −(2+ε)
        (
            "a_n = n^(2+eps), eps=1",
            FamilySpec::power(0.0, -2.0).with_epsilon(1.0),
            oracle(closed_form_complete(0.0, -3.0)),
        ),
        ("power a=1 b=-2", FamilySpec::power(1.0, -2.0), oracle(closed_form_complete(1.0, -2.0))),
    ];
    let mut verdict_fail = Vec::new();
    let mut summary = Vec::new();
    for (label, spec, want) in verdicts {
        let report = completeness_diagnostic(&spec, spec.start + 100_000)?;
        if report.verdict != want || report.numeric.verdict != want {
            verdict_fail.push(label);
        }
        summary.push(format!("{label}: {:?}/{:?}", report.verdict, report.numeric.verdict));
    }
    Ok(Outcome::new(
        axiom_fail == 0 && edge_fail == 0 && lipschitz_fail == 0 && verdict_fail.is_empty(),
        format!(
            "{triples} triples over 5 graphs: axiom failures {axiom_fail}, edge-bound failures {edge_fail}; \
             {cutoffs} cutoffs, Lipschitz failures {lipschitz_fail}; verdicts (overall/numeric) {}",
            summary.join(", ")
        ),
    ))
}

fn oracle(complete: bool) -> Completeness {
    if complete {
        Completeness::Complete
    } else {
        Completeness::Incomplete
    }
}

/// −n ln n[(n+1)ln(1+1/n) + (n−1)ln(1−1/n)], the closed form
/// 2n²ln²n − n ln n[(n+1)ln(n+1) + (n−1)ln(n−1)] without the cancellation.
fn log_closed_form(n: u64) -> f64 {
    let x = n as f64;
    -x * x.ln() * ((x + 1.0) * (1.0 / x).ln_1p() + (x - 1.0) * (-1.0 / x).ln_1p())
}

/// Closed-form log-family potential evaluated at 30 digits.
#[allow(clippy::excessive_precision)]
const LOG_REFERENCE: [(u64, f64); 8] = [
    (3, -1.1199190179377939917),
    (4, -1.4011085201208661312),
    (10, -2.3064381681333707845),
    (57, -4.0432586931505135471),
    (100, -4.6052469418948024408),
    (1000, -6.9077564302751440663),
    (9999, -9.2102403823293205915),
    (10000, -9.2103403873267500841),
];

fn criterion_9() -> Run {
    let s = gauge_to_schrodinger(&build_family(&FamilySpec::log())?);
    let mut closed = 0.0f64;
    for n in 3..=10_000u64 {
        closed = closed.max(rel(s.w(vid(n))?, log_closed_form(n)));
    }
    let mut reference = 0.0f64;
    for (n, want) in LOG_REFERENCE {
        reference = reference.max(rel(s.w(vid(n))?, want)).max(rel(log_closed_form(n), want));
    }
    let w2 = s.w(vid(2))?;
    let gaps: Vec<f64> = [100u64, 1000, 10_000]
        .iter()
        .map(|&n| Ok((s.w(vid(n))? / (n as f64).ln() + 1.0).abs()))
        .collect::<Result<_>>()?;
    let shrinking = gaps.windows(2).all(|w| w[1] < w[0]);

    let mut ratios = Vec::new();
    let mut power_ok = true;
    for (alpha, beta) in [(2.0, 0.0), (3.0, 1.0)] {
        let p = gauge_to_schrodinger(&build_family(&FamilySpec::power(alpha, beta))?);
        let leading = |n: u64| -alpha * (alpha - beta - 1.0) * (n as f64).powf(2.0 * alpha - beta - 2.0);
        let g2 = (p.w(vid(100))? / leading(100) - 1.0).abs();
        let g4 = (p.w(vid(10_000))? / leading(10_000) - 1.0).abs();
        power_ok &= g4 <= g2 && g4 <= 1e-2;
        ratios.push(format!("({alpha},{beta}) |ratio-1| {g2:.1e} -> {g4:.1e}"));
    }
    Ok(Outcome::new(
        closed <= 1e-9 && reference <= 1e-9 && shrinking && power_ok,
        format!(
            "log W vs closed form n=3..1e4 {closed:.1e}, vs 30-digit values {reference:.1e} (tol 1e-9); \
             n=2 endpoint W = {w2:.6} where the closed form gives {:.6} (no vertex 1); \
             |W/ln n + 1| at 1e2,1e3,1e4 = {:.3}, {:.3}, {:.3}; {}",
            log_closed_form(2),
            gaps[0],
            gaps[1],
            gaps[2],
            ratios.join(", ")
        ),
    ))
}

fn criterion_10() -> Run {
    let mut rng = seeded(10);
    let specs = [
        FamilySpec::power(0.0, 0.0),
        FamilySpec::power(1.0, 0.0),
        FamilySpec::power(1.0, -2.0),
        FamilySpec::power(0.5, 0.5),
        FamilySpec::log(),
        FamilySpec::table(vec![1.0, 2.0, 0.5], vec![1.5, 0.7]),
    ];
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let spec = &specs[trial % specs.len()];
        let s = gauge_to_schrodinger(&build_family(spec)?);
        let lambda = rng.random_range(-3.0..=1.0);
        let start = spec.start;
        let sol = deficiency_recurrence(&s, rng.random_range(0.5..=2.0), start + 120, lambda)?;
        let f = if trial % 10 == 9 && spec.kind == FamilyKind::HalfLinePower && spec.alpha <= 1.0 && spec.beta == 0.0 {
            cutoff(&MetricContext::new(s.clone()), vid(start), 1.0, metric::DEFAULT_BUDGET)?
        } else {
            random_function(&mut rng, &range(start, start + 100))
        };
        worst = worst.max(agmon_identity_check(&s, &sol, &f)?.relative_gap);
    }
    Ok(Outcome::new(
        worst <= 1e-9,
        format!("100 (family, lambda, f) trials: max relative spread of the three forms {worst:.1e} (tol 1e-9)"),
    ))
}

fn criterion_11() -> Run {
    let opts = ProbeOptions::default();
    let mut failures = Vec::new();
    let mut bounded = Vec::new();

    // constant ω: l2-divergent with a long strictly increasing witness
    let mut rng = seeded(11);
    let mut constant = vec![
        ("c=1", FamilySpec::power(0.0, 0.0)),
        ("c=n", FamilySpec::power(0.0, -1.0)),
        ("c=n^2", FamilySpec::power(0.0, -2.0)),
    ];
    for label in ["table A", "table B"] {
        let c: Vec<f64> = (0..7).map(|_| rng.random_range(0.5..=2.0)).collect();
        constant.push((label, FamilySpec::table(vec![1.0], c)));
    }
    let mut shortest = usize::MAX;
    for (label, spec) in &constant {
        let report = esa_probe(spec, ProbeMode::Laplacian, &opts)?;
        let length = report.growth_witness.as_ref().map_or(0, |w| w.length);
        shortest = shortest.min(length);
        if report.classification.class != L2Class::L2Divergent || length < 100 {
            failures.push(format!("{label}: {:?}, witness {length}", report.classification.class));
        }
        if report.classification.class == L2Class::L2Bounded {
            bounded.push(label.to_string());
        }
        // independent check of strict growth along the chain
        let s = gauge_to_schrodinger(&build_family(spec)?);
        let sol = deficiency_recurrence(&s, 1.0, spec.start + 2_000, -1.0)?;
        let chain = growth_witness(&s, &sol)?;
        let logs: Vec<f64> = chain.indices.iter().map(|&x| sol.ln_abs(x)).collect::<Result<_>>()?;
        let signs_agree = chain.indices.iter().all(|&x| sol.value(x).is_ok_and(|v| v * chain.sign > 0.0));
        if !logs.windows(2).all(|w| w[1] > w[0]) || !signs_agree {
            failures.push(format!("{label}: witness not strictly increasing"));
        }
    }

    // a_n = n^{2+ε}: v tends to a positive constant, so Σv² grows only
    // linearly; the classification is recorded and must not be l2-bounded
    let steep = esa_probe(&FamilySpec::power(0.0, -2.0).with_epsilon(1.0), ProbeMode::Laplacian, &opts)?;
    let steep_class = steep.classification.class;
    let steep_witness = steep.growth_witness.as_ref().map_or(0, |w| w.length);
    if steep_class == L2Class::L2Bounded {
        bounded.push("a=n^(2+eps)".into());
    }
    if steep_witness < 100 {
        failures.push(format!("a=n^(2+eps): witness {steep_witness}"));
    }

    let unit = gauge_to_schrodinger(&build_family(&FamilySpec::power(0.0, 0.0))?);
    let head = deficiency_recurrence(&unit, 1.0, 5, -1.0)?.values().unwrap_or_default();
    if head != [1.0, 2.0, 5.0, 13.0, 34.0] {
        failures.push(format!("unit line gives {head:?}"));
    }

    // complete families: sandwich at λ = k − 2
    let complete = [
        ("power(1,0)", FamilySpec::power(1.0, 0.0)),
        ("power(0.5,0)", FamilySpec::power(0.5, 0.0)),
        ("c=1", FamilySpec::power(0.0, 0.0)),
        ("c=n", FamilySpec::power(0.0, -1.0)),
        ("log", FamilySpec::log()),
    ];
    let (mut certificates, mut shell_only) = (0usize, 0usize);
    let mut radii_note = Vec::new();
    for (label, spec) in &complete {
        let report = esa_probe(spec, ProbeMode::Laplacian, &opts)?;
        if report.completeness != Completeness::Complete {
            failures.push(format!("{label}: metric not diagnosed complete"));
        }
        let radii: Vec<f64> = report.sandwich.iter().map(|c| c.radius).collect();
        let wanted: Vec<f64> = (3..=10).map(f64::from).collect();
        if radii != wanted {
            radii_note.push(format!("{label} R={radii:?}"));
        }
        if radii.is_empty() {
            failures.push(format!("{label}: no sandwich certificate"));
        }
        for c in &report.sandwich {
            certificates += 1;
            shell_only += usize::from(!c.shell_holds);
            if !c.holds() {
                failures.push(format!("{label}: sandwich fails at R={}", c.radius));
            }
        }
        if report.classification.class == L2Class::L2Bounded {
            bounded.push(label.to_string());
        }
    }

    // W bounded below, probed with the shift
    for (label, spec) in [
        ("power(1,0) shifted", FamilySpec::power(1.0, 0.0)),
        ("power(0.5,0) shifted", FamilySpec::power(0.5, 0.0)),
        ("table shifted", FamilySpec::table(vec![1.0, 2.0, 0.5], vec![1.5, 0.7])),
    ] {
        let report = esa_probe(&spec, ProbeMode::SchrodingerWithShift, &opts)?;
        if report.classification.class == L2Class::L2Bounded {
            bounded.push(label.to_string());
        }
    }
    if !bounded.is_empty() {
        failures.push(format!("l2-bounded: {}", bounded.join(", ")));
    }

    let mut detail = format!(
        "{} constant-weight families l2-divergent, shortest witness {shortest}; a=n^(2+eps) recorded as {steep_class:?} \
         (witness {steep_witness}); 1,2,5,13,34 exact; \
         {certificates} sandwich certificates at lambda = k-2 ({shell_only} where only the reported shell bound fails); \
         no l2-bounded verdicts among {} guaranteed families",
        constant.len(),
        constant.len() + complete.len() + 4
    );
    if !radii_note.is_empty() {
        detail.push_str(&format!("; radii differing from 3..10: {}", radii_note.join(", ")));
    }
    if !failures.is_empty() {
        detail.push_str(&format!("; FAILURES: {}", failures.join("; ")));
    }
    Ok(Outcome::new(failures.is_empty(), detail))
}

type Criterion = (u32, &'static str, fn() -> Run);

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [Criterion; 11] = [
        (1, "gauge closed form", criterion_1),
        (2, "gauge conjugation identity", criterion_2),
        (3, "Green formula and symmetry", criterion_3),
        (4, "Dirichlet uniqueness and positivity", criterion_4),
        (5, "Harnack inequality", criterion_5),
        (6, "harmonic construction", criterion_6),
        (7, "unitarization", criterion_7),
        (8, "metric, cutoff and completeness", criterion_8),
        (9, "potential asymptotics", criterion_9),
        (10, "Agmon identity", criterion_10),
        (11, "ESA probes", criterion_11),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let started = Instant::now();
        let (passed, detail) = match panic::catch_unwind(AssertUnwindSafe(run)) {
            Ok(Ok(o)) => (o.passed, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".into()),
        };
        failed += usize::from(!passed);
        println!(
            "criterion {id:>2} {} {name}: {detail} [{:.2} s]",
            if passed { "PASS" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
