//! The path metric δ_a with edge lengths 1/√a, metric balls, the Lipschitz
//! cutoff and completeness diagnostics for half-line families.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_family, FamilyKind, FamilySpec, FiniteRegion, VertexId, WeightedGraph};
use crate::operator::{gauge_to_schrodinger, FiniteSupportFn, SchrodingerData};

/// Default cap on vertices settled by one shortest-path exploration.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Edge lengths 1/√a_{x,y} over a graph, evaluated on demand.
#[derive(Clone, Debug)]
pub struct MetricContext {
    op: SchrodingerData,
}

impl MetricContext {
    /// Uses the edge coefficients of `op`.
    pub fn new(op: SchrodingerData) -> Self {
        MetricContext { op }
    }

    /// a = c/(ω_x ω_y).
    pub fn gauge(g: &WeightedGraph) -> Self {
        Self::new(gauge_to_schrodinger(g))
    }

    /// a = c.
    pub fn conductance(g: &WeightedGraph) -> Self {
        Self::new(SchrodingerData::combinatorial(g.clone()))
    }

    pub fn graph(&self) -> &WeightedGraph {
        self.op.graph()
    }

    pub fn edge_length(&self, x: VertexId, y: VertexId) -> Result<f64> {
        let len = 1.0 / self.op.a(x, y)?.sqrt();
        if len.is_finite() && len > 0.0 {
            Ok(len)
        } else {
            Err(Error::Numeric(format!("edge length of {{{x},{y}}} is {len}")))
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Label(f64, VertexId);

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    // ties broken by vertex id
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Incremental label-setting search; each step settles one vertex.
struct Search<'a, F> {
    ctx: &'a MetricContext,
    allowed: F,
    best: BTreeMap<VertexId, f64>,
    settled: BTreeSet<VertexId>,
    heap: BinaryHeap<Reverse<Label>>,
}

impl<'a, F: Fn(VertexId) -> bool> Search<'a, F> {
    fn new(ctx: &'a MetricContext, sources: &[VertexId], allowed: F) -> Result<Self> {
        let mut search = Search {
            ctx,
            allowed,
            best: BTreeMap::new(),
            settled: BTreeSet::new(),
            heap: BinaryHeap::new(),
        };
        for &s in sources {
            ctx.graph().check_vertex(s)?;
            search.best.insert(s, 0.0);
            search.heap.push(Reverse(Label(0.0, s)));
        }
        Ok(search)
    }

    fn settled_count(&self) -> usize {
        self.settled.len()
    }

    /// Settles the next closest vertex; None once the reachable set is exhausted.
    fn step(&mut self) -> Result<Option<(VertexId, f64)>> {
        while let Some(Reverse(Label(d, x))) = self.heap.pop() {
            if !self.settled.insert(x) {
                continue;
            }
            for y in self.ctx.graph().neighbors(x)? {
                if self.settled.contains(&y) || !(self.allowed)(y) {
                    continue;
                }
                let nd = d + self.ctx.edge_length(x, y)?;
                if self.best.get(&y).is_none_or(|&old| nd < old) {
                    self.best.insert(y, nd);
                    self.heap.push(Reverse(Label(nd, y)));
                }
            }
            return Ok(Some((x, d)));
        }
        Ok(None)
    }

    /// Smallest tentative label not yet settled.
    fn frontier(&self) -> Option<f64> {
        self.heap.peek().map(|Reverse(Label(d, _))| *d)
    }
}

fn everywhere(_: VertexId) -> bool {
    true
}

/// δ_a(x, y). Searches from both ends in turn and stops at whichever reaches
/// the other first, so the cost is set by the cheaper direction; each search
/// settles at most `budget` vertices.
pub fn delta_a(ctx: &MetricContext, x: VertexId, y: VertexId, budget: usize) -> Result<f64> {
    let mut from_x = Search::new(ctx, &[x], everywhere)?;
    let mut from_y = Search::new(ctx, &[y], everywhere)?;
    let (mut open_x, mut open_y) = (true, true);
    while open_x || open_y {
        for (search, open, target) in [(&mut from_x, &mut open_x, y), (&mut from_y, &mut open_y, x)] {
            if !*open {
                continue;
            }
            match search.step()? {
                Some((v, d)) if v == target => return Ok(d),
                Some(_) if search.settled_count() < budget => {}
                _ => *open = false,
            }
        }
    }
    Err(Error::Unreachable { from: x, to: y })
}

/// Distances from `x0` to every vertex with δ_a ≤ r.
pub fn distances_within(
    ctx: &MetricContext,
    x0: VertexId,
    r: f64,
    budget: usize,
) -> Result<BTreeMap<VertexId, f64>> {
    let mut out = BTreeMap::new();
    if r < 0.0 {
        ctx.graph().check_vertex(x0)?;
        return Ok(out);
    }
    let mut search = Search::new(ctx, &[x0], everywhere)?;
    while search.frontier().is_some_and(|d| d <= r) {
        if search.settled_count() >= budget {
            return Err(Error::Budget {
                budget,
                what: format!("metric ball of radius {r} around {x0}"),
            });
        }
        if let Some((v, d)) = search.step()? {
            out.insert(v, d);
        }
    }
    Ok(out)
}

/// B_R = {x : δ_a(x₀, x) ≤ R}.
pub fn metric_ball(ctx: &MetricContext, x0: VertexId, r: f64, budget: usize) -> Result<FiniteRegion> {
    let d = distances_within(ctx, x0, r, budget)?;
    FiniteRegion::new(ctx.graph(), d.into_keys())
}

/// f = min(1, δ_a(·, V∖B_{R+1})): 1 on B_R, 0 off B_{R+1}.
pub fn cutoff(ctx: &MetricContext, x0: VertexId, r: f64, budget: usize) -> Result<FiniteSupportFn> {
    let g = ctx.graph();
    let outer = distances_within(ctx, x0, r + 1.0, budget)?;
    let mut layer = BTreeSet::new();
    for &x in outer.keys() {
        for y in g.neighbors(x)? {
            if !outer.contains_key(&y) {
                layer.insert(y);
            }
        }
    }
    let mut f = FiniteSupportFn::new();
    if layer.is_empty() {
        // nothing lies outside B_{R+1}: distance to the empty set is +∞
        for &x in outer.keys() {
            f.set(x, 1.0);
        }
        return Ok(f);
    }
    let sources: Vec<VertexId> = layer.iter().copied().collect();
    let mut search = Search::new(ctx, &sources, |y| outer.contains_key(&y))?;
    while let Some((v, d)) = search.step()? {
        if let Some(&from_center) = outer.get(&v) {
            let value = if from_center <= r { 1.0 } else { d.min(1.0) };
            if value > 0.0 {
                f.set(v, value);
            }
        }
    }
    Ok(f)
}

/// A set of vertices for [`distance_to_set`].
#[derive(Clone)]
pub enum VertexSet {
    Empty,
    Finite(BTreeSet<VertexId>),
    Predicate(Arc<dyn Fn(VertexId) -> bool + Send + Sync>),
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexSet::Empty => f.write_str("Empty"),
            VertexSet::Finite(s) => write!(f, "Finite({s:?})"),
            VertexSet::Predicate(_) => f.write_str("Predicate"),
        }
    }
}

impl VertexSet {
    pub fn contains(&self, x: VertexId) -> bool {
        match self {
            VertexSet::Empty => false,
            VertexSet::Finite(s) => s.contains(&x),
            VertexSet::Predicate(p) => p(x),
        }
    }
}

/// min over s ∈ S of δ_a(x, s); +∞ for the empty set.
pub fn distance_to_set(ctx: &MetricContext, x: VertexId, set: &VertexSet, budget: usize) -> Result<f64> {
    if let VertexSet::Empty = set {
        ctx.graph().check_vertex(x)?;
        return Ok(f64::INFINITY);
    }
    let mut search = Search::new(ctx, &[x], everywhere)?;
    while search.settled_count() < budget {
        match search.step()? {
            Some((v, d)) if set.contains(v) => return Ok(d),
            Some(_) => {}
            None => break,
        }
    }
    Err(Error::Undetermined(format!("no member of the set found within {budget} vertices of {x}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Completeness {
    Complete,
    Incomplete,
    Undetermined,
}

impl fmt::Display for Completeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Completeness::Complete => "complete",
            Completeness::Incomplete => "incomplete",
            Completeness::Undetermined => "undetermined",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericVerdict {
    pub verdict: Completeness,
    /// Fitted p in t_k ≈ C k^{−p} over the last decade of increments.
    pub fitted_exponent: f64,
    /// Whether t_k·k·ln k was nondecreasing over the last decade.
    pub bertrand_nondecreasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompletenessReport {
    pub family: FamilySpec,
    /// (n, δ_a(x₀, n)) at log-spaced n up to the probe limit.
    pub partial_sums: Vec<(u64, f64)>,
    pub verdict: Completeness,
    pub closed_form: Option<Completeness>,
    /// Summand exponent p of the series Σ 1/√a_k ~ Σ k^{−p} (log factors aside).
    pub closed_form_exponent: Option<f64>,
    pub numeric: NumericVerdict,
}

/// Margin around p = 1 inside which the p-test defers.
const P_MARGIN: f64 = 0.25;

/// Completeness of a half-line family from its closed form and from the
/// partial sums δ_a(x₀, n), n ≤ `n_probe`.
pub fn completeness_diagnostic(spec: &FamilySpec, n_probe: u64) -> Result<CompletenessReport> {
    if !spec.is_half_line() {
        return Err(Error::Unsupported(format!(
            "completeness is only diagnosed on half-lines, not `{}`",
            spec.kind.name()
        )));
    }
    let g = build_family(spec)?;
    let ctx = MetricContext::gauge(&g);
    let start = spec.start;
    if n_probe < start + 20 {
        return Err(Error::Domain(format!("n_probe must be at least start + 20 = {}", start + 20)));
    }

    let mut lengths = Vec::with_capacity((n_probe - start) as usize);
    for k in start..n_probe {
        lengths.push(ctx.edge_length(VertexId(k), VertexId(k + 1))?);
    }
    let mut partial_sums = Vec::new();
    let mut s = 0.0;
    let mut next = start;
    for (i, len) in lengths.iter().enumerate() {
        let n = start + i as u64;
        if n == next {
            partial_sums.push((n, s));
            next = (n + 1).max((n as f64 * 1.12) as u64);
        }
        s += len;
    }
    partial_sums.push((n_probe, s));

    let numeric = numeric_verdict(start, &lengths);
    let (closed_form, closed_form_exponent) = match closed_form(spec) {
        Some((v, p)) => (Some(v), p),
        None => (None, None),
    };
    Ok(CompletenessReport {
        family: spec.clone(),
        partial_sums,
        verdict: closed_form.unwrap_or(numeric.verdict),
        closed_form,
        closed_form_exponent,
        numeric,
    })
}

fn closed_form(spec: &FamilySpec) -> Option<(Completeness, Option<f64>)> {
    let q = spec.conductance_exponent();
    match spec.kind {
        // a_k ~ k^{2α+q}, so 1/√a_k ~ k^{−p} with p = α + q/2
        FamilyKind::HalfLinePower => {
            let p = spec.alpha + q / 2.0;
            let v = if p <= 1.0 {
                Completeness::Complete
            } else {
                Completeness::Incomplete
            };
            Some((v, Some(p)))
        }
        // a_k ~ k^{2+q} ln²k: for q = 0 the summand is 1/(k ln k) and the series diverges
        FamilyKind::HalfLineLog => {
            let p = 1.0 + q / 2.0;
            let v = if p <= 1.0 {
                Completeness::Complete
            } else {
                Completeness::Incomplete
            };
            Some((v, Some(p)))
        }
        // periodic a is bounded, so the summand is bounded below
        FamilyKind::HalfLineTable => Some((Completeness::Complete, Some(0.0))),
        _ => None,
    }
}

fn numeric_verdict(start: u64, lengths: &[f64]) -> NumericVerdict {
    let n = start + lengths.len() as u64;
    let from = (n / 10).max(start.max(2));
    let tail: Vec<(f64, f64)> = (from..n)
        .map(|k| (k as f64, lengths[(k - start) as usize]))
        .collect();

    let m = tail.len() as f64;
    let (sx, sy) = tail
        .iter()
        .fold((0.0, 0.0), |(a, b), &(k, t)| (a + k.ln(), b + t.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(k, t) in &tail {
        sxy += (k.ln() - mx) * (t.ln() - my);
        sxx += (k.ln() - mx).powi(2);
    }
    let fitted_exponent = -sxy / sxx;

    let q: Vec<f64> = tail.iter().map(|&(k, t)| t * k * k.ln()).collect();
    let bertrand_nondecreasing = q.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));

    let verdict = if bertrand_nondecreasing || fitted_exponent < 1.0 - P_MARGIN {
        Completeness::Complete
    } else if fitted_exponent > 1.0 + P_MARGIN {
        Completeness::Incomplete
    } else {
        Completeness::Undetermined
    };
    NumericVerdict {
        verdict,
        fitted_exponent,
        bertrand_nondecreasing,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::FiniteGraph;

    fn vid(x: u64) -> VertexId {
        VertexId(x)
    }

    fn unit_line() -> MetricContext {
        MetricContext::gauge(&build_family(&FamilySpec::power(0.0, 0.0)).unwrap())
    }

    #[test]
    fn unit_distances() {
        let ctx = unit_line();
        assert_eq!(delta_a(&ctx, vid(4), vid(4), 10).unwrap(), 0.0);
        assert_eq!(delta_a(&ctx, vid(2), vid(7), 100).unwrap(), 5.0);
        assert_eq!(delta_a(&ctx, vid(7), vid(2), 100).unwrap(), 5.0);
        assert!(matches!(delta_a(&ctx, vid(1), vid(500), 100), Err(Error::Unreachable { .. })));
    }

    #[test]
    fn log_family_distance_is_the_series() {
        let g = build_family(&FamilySpec::log()).unwrap();
        let ctx = MetricContext::gauge(&g);
        let expected: f64 = (2..40u64)
            .map(|k| {
                let (k, k1) = (k as f64, k as f64 + 1.0);
                1.0 / (k * k1 * k.ln() * k1.ln()).sqrt()
            })
            .sum();
        let d = delta_a(&ctx, vid(2), vid(40), 1000).unwrap();
        assert!((d - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn balls() {
        let ctx = unit_line();
        let b = metric_ball(&ctx, vid(1), 2.5, 100).unwrap();
        assert_eq!(b.vertices().iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(metric_ball(&ctx, vid(4), 0.0, 100).unwrap().len(), 1);
        assert!(metric_ball(&ctx, vid(4), -1.0, 100).unwrap().is_empty());
        assert!(matches!(metric_ball(&ctx, vid(1), 50.0, 10), Err(Error::Budget { .. })));
    }

    #[test]
    fn cutoff_on_unit_line() {
        let ctx = unit_line();
        let f = cutoff(&ctx, vid(1), 2.0, 100).unwrap();
        for x in 1..=4 {
            assert_eq!(f.get(vid(x)), 1.0, "vertex {x}");
        }
        assert_eq!(f.get(vid(5)), 0.0);

        let half = cutoff(&ctx, vid(1), 2.5, 100).unwrap();
        assert_eq!(half.get(vid(4)), 1.0);
        assert_eq!(half.get(vid(5)), 0.0);
        let fine = MetricContext::new(
            SchrodingerData::combinatorial(build_family(&FamilySpec::power(0.0, 0.0)).unwrap())
                .with_potential(crate::operator::Potential::Zero),
        );
        assert_eq!(cutoff(&fine, vid(1), 0.0, 100).unwrap().get(vid(2)), 1.0);
    }

    #[test]
    fn cutoff_on_whole_finite_graph() {
        let g = WeightedGraph::new(FiniteGraph::builder().edge(1, 2, 1.0).edge(2, 3, 1.0).build().unwrap());
        let f = cutoff(&MetricContext::conductance(&g), vid(1), 10.0, 100).unwrap();
        assert!((1..=3).all(|x| f.get(vid(x)) == 1.0));
    }

    #[test]
    fn cutoff_is_lipschitz_with_short_edges() {
        // edge lengths 1/2, so the cutoff ramps over two edges
        let g = WeightedGraph::new(
            (1..30u64)
                .fold(FiniteGraph::builder(), |b, k| b.edge(k, k + 1, 4.0))
                .build()
                .unwrap(),
        );
        let ctx = MetricContext::conductance(&g);
        let f = cutoff(&ctx, vid(1), 2.0, 100).unwrap();
        assert_eq!(f.get(vid(5)), 1.0);
        assert_eq!(f.get(vid(7)), 0.5);
        assert_eq!(f.get(vid(8)), 0.0);
        for k in 1..29 {
            let d = delta_a(&ctx, vid(k), vid(k + 1), 100).unwrap();
            assert!((f.get(vid(k)) - f.get(vid(k + 1))).abs() <= d + 1e-15);
        }
    }

    #[test]
    fn set_distances() {
        let ctx = unit_line();
        assert_eq!(distance_to_set(&ctx, vid(3), &VertexSet::Empty, 10).unwrap(), f64::INFINITY);
        let tail = VertexSet::Predicate(Arc::new(|x: VertexId| x.0 >= 6));
        assert_eq!(distance_to_set(&ctx, vid(3), &tail, 100).unwrap(), 3.0);
        assert_eq!(distance_to_set(&ctx, vid(7), &tail, 100).unwrap(), 0.0);
        let far = VertexSet::Finite(BTreeSet::from([vid(10_000)]));
        assert!(matches!(distance_to_set(&ctx, vid(1), &far, 100), Err(Error::Undetermined(_))));
    }

    #[test]
    fn completeness_verdicts() {
        let check = |spec: FamilySpec, want: Completeness| {
            let r = completeness_diagnostic(&spec, 20_000).unwrap();
            assert_eq!(r.closed_form, Some(want), "{spec:?}");
            assert_eq!(r.numeric.verdict, want, "{spec:?} {:?}", r.numeric);
            assert!(r.partial_sums.windows(2).all(|w| w[0].1 <= w[1].1));
        };
        check(FamilySpec::power(1.0, 0.0), Completeness::Complete);
        check(FamilySpec::power(3.0, 0.0), Completeness::Incomplete);
        check(FamilySpec::log(), Completeness::Complete);
        check(FamilySpec::power(0.0, -2.0).with_epsilon(1.0), Completeness::Incomplete);
        check(FamilySpec::power(0.0, 0.0), Completeness::Complete);
        assert!(matches!(
            completeness_diagnostic(&FamilySpec::binary_tree(), 100),
            Err(Error::Unsupported(_))
        ));
    }
}
