//! Locally finite weighted graphs.
//!
//! A graph is only ever queried locally: neighbors of a vertex, its weight
//! ω_x and the conductance c_{x,y} of an incident edge. Infinite families
//! (half-lines, the binary tree) answer those queries from closed forms and
//! are never enumerated.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::ops::Deref;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

impl VertexId {
    pub fn index(self) -> u64 {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for VertexId {
    fn from(v: u64) -> Self {
        VertexId(v)
    }
}

/// Local query interface of a weighted graph.
///
/// Implementations must keep adjacency symmetric, loop free and finite at
/// every vertex, and return `conductance(x, y)` bit-identical to
/// `conductance(y, x)`.
pub trait Graph: fmt::Debug + Send + Sync {
    fn contains(&self, x: VertexId) -> bool;

    /// Adjacent vertices in ascending id order.
    fn neighbors(&self, x: VertexId) -> Result<Vec<VertexId>>;

    fn omega(&self, x: VertexId) -> Result<f64>;

    fn conductance(&self, x: VertexId, y: VertexId) -> Result<f64>;

    /// 1/ω_x. Families with an exact closed form for the reciprocal override this.
    fn inv_omega(&self, x: VertexId) -> Result<f64> {
        Ok(self.omega(x)?.recip())
    }

    /// 1/ω_x − 1/ω_y for adjacent x, y.
    ///
    /// Gauge potentials are second differences of 1/ω, so this gap is where
    /// cancellation happens; closed-form families evaluate it without
    /// subtracting two rounded reciprocals.
    fn inv_omega_gap(&self, x: VertexId, y: VertexId) -> Result<f64> {
        Ok(self.inv_omega(x)? - self.inv_omega(y)?)
    }

    /// Uniform degree bound, when known without enumeration.
    fn valence_hint(&self) -> Option<usize> {
        None
    }

    /// First vertex when the graph is a half-line n ∼ n+1.
    fn ray_start(&self) -> Option<VertexId> {
        None
    }

    /// All vertices, for finite graphs only.
    fn vertices(&self) -> Option<Vec<VertexId>> {
        None
    }
}

/// Shared handle to an immutable graph.
#[derive(Clone)]
pub struct WeightedGraph(Arc<dyn Graph>);

impl WeightedGraph {
    pub fn new(graph: impl Graph + 'static) -> Self {
        WeightedGraph(Arc::new(graph))
    }

    pub fn from_arc(graph: Arc<dyn Graph>) -> Self {
        WeightedGraph(graph)
    }

    pub fn is_half_line(&self) -> bool {
        self.0.ray_start().is_some()
    }

    pub(crate) fn check_vertex(&self, x: VertexId) -> Result<()> {
        if self.0.contains(x) {
            Ok(())
        } else {
            Err(Error::UnknownVertex(x))
        }
    }
}

impl Deref for WeightedGraph {
    type Target = dyn Graph;

    fn deref(&self) -> &Self::Target {
        &*self.0
    }
}

impl fmt::Debug for WeightedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn neighbors(g: &WeightedGraph, x: VertexId) -> Result<Vec<VertexId>> {
    g.neighbors(x)
}

fn positive(what: &str, at: impl fmt::Display, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidWeight {
            what: format!("{what} at {at}"),
            value,
        })
    }
}

fn edge_key(x: VertexId, y: VertexId) -> (VertexId, VertexId) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

// ---------------------------------------------------------------------------
// Finite graphs

#[derive(Clone, Debug, Default)]
pub struct FiniteGraph {
    adjacency: BTreeMap<VertexId, Vec<VertexId>>,
    omega: BTreeMap<VertexId, f64>,
    conductance: BTreeMap<(VertexId, VertexId), f64>,
}

impl FiniteGraph {
    pub fn builder() -> FiniteGraphBuilder {
        FiniteGraphBuilder::default()
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.conductance.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = ((VertexId, VertexId), f64)> + '_ {
        self.conductance.iter().map(|(&k, &c)| (k, c))
    }
}

impl Graph for FiniteGraph {
    fn contains(&self, x: VertexId) -> bool {
        self.adjacency.contains_key(&x)
    }

    fn neighbors(&self, x: VertexId) -> Result<Vec<VertexId>> {
        self.adjacency
            .get(&x)
            .cloned()
            .ok_or(Error::UnknownVertex(x))
    }

    fn omega(&self, x: VertexId) -> Result<f64> {
        self.omega.get(&x).copied().ok_or(Error::UnknownVertex(x))
    }

    fn conductance(&self, x: VertexId, y: VertexId) -> Result<f64> {
        self.conductance
            .get(&edge_key(x, y))
            .copied()
            .ok_or(Error::NotAnEdge(x, y))
    }

    fn vertices(&self) -> Option<Vec<VertexId>> {
        Some(self.adjacency.keys().copied().collect())
    }
}

/// Collects vertices and edges; validation happens in [`FiniteGraphBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct FiniteGraphBuilder {
    omega: BTreeMap<VertexId, f64>,
    edges: Vec<(VertexId, VertexId, f64)>,
}

impl FiniteGraphBuilder {
    /// Declares a vertex with weight 1 unless a weight is set later.
    pub fn vertex(mut self, x: impl Into<VertexId>) -> Self {
        self.omega.entry(x.into()).or_insert(1.0);
        self
    }

    pub fn omega(mut self, x: impl Into<VertexId>, omega: f64) -> Self {
        self.omega.insert(x.into(), omega);
        self
    }

    pub fn edge(mut self, x: impl Into<VertexId>, y: impl Into<VertexId>, c: f64) -> Self {
        let (x, y) = (x.into(), y.into());
        self.omega.entry(x).or_insert(1.0);
        self.omega.entry(y).or_insert(1.0);
        self.edges.push((x, y, c));
        self
    }

    pub fn has_vertex(&self, x: VertexId) -> bool {
        self.omega.contains_key(&x)
    }

    pub fn build(self) -> Result<FiniteGraph> {
        let mut graph = FiniteGraph::default();
        for (&x, &w) in &self.omega {
            positive("vertex weight", x, w)?;
            graph.omega.insert(x, w);
            graph.adjacency.insert(x, Vec::new());
        }
        for (x, y, c) in self.edges {
            if x == y {
                return Err(Error::InvalidGraph(format!("self-loop at {x}")));
            }
            positive("conductance", format!("{{{x},{y}}}"), c)?;
            if graph.conductance.insert(edge_key(x, y), c).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge {{{x},{y}}}")));
            }
            graph.adjacency.get_mut(&x).expect("declared").push(y);
            graph.adjacency.get_mut(&y).expect("declared").push(x);
        }
        for list in graph.adjacency.values_mut() {
            list.sort_unstable();
        }
        Ok(graph)
    }
}

// ---------------------------------------------------------------------------
// Half-line families: V = {start, start+1, ...}, n ∼ n+1.

#[derive(Clone, Debug)]
enum HalfLineLaw {
    /// ω_n = n^{-alpha}, c_{n,n+1} = (n+1)^{cond_exp}.
    Power { alpha: f64, cond_exp: f64 },
    /// ω_n = 1/(n ln n), c_{n,n+1} = (n+1)^{cond_exp}.
    Log { cond_exp: f64 },
    /// Periodic tables indexed by n − start.
    Table {
        omega: Vec<f64>,
        conductance: Vec<f64>,
    },
}

#[derive(Clone, Debug)]
pub struct HalfLine {
    start: u64,
    law: HalfLineLaw,
}

const EXACT_INT_LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53

impl HalfLine {
    fn check(&self, x: VertexId) -> Result<u64> {
        if x.0 >= self.start {
            Ok(x.0)
        } else {
            Err(Error::UnknownVertex(x))
        }
    }

    fn lower_end(&self, x: VertexId, y: VertexId) -> Result<u64> {
        let (a, b) = (self.check(x)?, self.check(y)?);
        match a.abs_diff(b) {
            1 => Ok(a.min(b)),
            _ => Err(Error::NotAnEdge(x, y)),
        }
    }

    fn table_index(&self, n: u64, len: usize) -> usize {
        ((n - self.start) % len as u64) as usize
    }
}

/// x^α − y^α for |x − y| = 1 without cancellation.
fn power_gap(x: f64, y: f64, alpha: f64) -> f64 {
    if alpha >= 0.0 && alpha.fract() == 0.0 && x.max(y).powf(alpha) < EXACT_INT_LIMIT {
        // integer powers below 2^53 are exact
        return x.powf(alpha) - y.powf(alpha);
    }
    -x.powf(alpha) * (alpha * ((y - x) / x).ln_1p()).exp_m1()
}

/// x ln x − y ln y for y = x ± 1.
fn xlogx_gap(x: f64, y: f64) -> f64 {
    let d = y - x;
    -d * x.ln() - y * (d / x).ln_1p()
}

impl Graph for HalfLine {
    fn contains(&self, x: VertexId) -> bool {
        x.0 >= self.start
    }

    fn neighbors(&self, x: VertexId) -> Result<Vec<VertexId>> {
        let n = self.check(x)?;
        let next = n
            .checked_add(1)
            .ok_or_else(|| Error::Domain(format!("vertex {n} at the end of the id range")))?;
        if n == self.start {
            Ok(vec![VertexId(next)])
        } else {
            Ok(vec![VertexId(n - 1), VertexId(next)])
        }
    }

    fn omega(&self, x: VertexId) -> Result<f64> {
        let n = self.check(x)?;
        let value = match &self.law {
            HalfLineLaw::Power { alpha, .. } => (n as f64).powf(-alpha),
            HalfLineLaw::Log { .. } => {
                let n = n as f64;
                1.0 / (n * n.ln())
            }
            HalfLineLaw::Table { omega, .. } => omega[self.table_index(n, omega.len())],
        };
        positive("vertex weight", x, value)
    }

    fn inv_omega(&self, x: VertexId) -> Result<f64> {
        let n = self.check(x)?;
        let value = match &self.law {
            HalfLineLaw::Power { alpha, .. } => (n as f64).powf(*alpha),
            HalfLineLaw::Log { .. } => {
                let n = n as f64;
                n * n.ln()
            }
            HalfLineLaw::Table { omega, .. } => omega[self.table_index(n, omega.len())].recip(),
        };
        positive("reciprocal vertex weight", x, value)
    }

    fn inv_omega_gap(&self, x: VertexId, y: VertexId) -> Result<f64> {
        self.lower_end(x, y)?;
        let (xf, yf) = (x.0 as f64, y.0 as f64);
        match &self.law {
            HalfLineLaw::Power { alpha, .. } => Ok(power_gap(xf, yf, *alpha)),
            HalfLineLaw::Log { .. } => Ok(xlogx_gap(xf, yf)),
            HalfLineLaw::Table { .. } => Ok(self.inv_omega(x)? - self.inv_omega(y)?),
        }
    }

    fn conductance(&self, x: VertexId, y: VertexId) -> Result<f64> {
        let n = self.lower_end(x, y)?;
        let value = match &self.law {
            HalfLineLaw::Power { cond_exp, .. } | HalfLineLaw::Log { cond_exp } => {
                ((n + 1) as f64).powf(*cond_exp)
            }
            HalfLineLaw::Table { conductance, .. } => {
                conductance[self.table_index(n, conductance.len())]
            }
        };
        positive("conductance", format!("{{{n},{}}}", n + 1), value)
    }

    fn valence_hint(&self) -> Option<usize> {
        Some(2)
    }

    fn ray_start(&self) -> Option<VertexId> {
        Some(VertexId(self.start))
    }
}

// ---------------------------------------------------------------------------
// Rooted binary tree, heap numbering: root 1, children 2x and 2x+1.

#[derive(Clone, Debug)]
pub struct BinaryTree {
    alpha: f64,
    beta: f64,
}

impl BinaryTree {
    fn depth(x: u64) -> u32 {
        63 - x.leading_zeros()
    }
}

impl Graph for BinaryTree {
    fn contains(&self, x: VertexId) -> bool {
        x.0 >= 1
    }

    fn neighbors(&self, x: VertexId) -> Result<Vec<VertexId>> {
        if x.0 == 0 {
            return Err(Error::UnknownVertex(x));
        }
        let left = x
            .0
            .checked_mul(2)
            .filter(|l| *l < u64::MAX)
            .ok_or_else(|| Error::Domain(format!("vertex {x} is too deep to expand")))?;
        let mut out = Vec::with_capacity(3);
        if x.0 > 1 {
            out.push(VertexId(x.0 / 2));
        }
        out.push(VertexId(left));
        out.push(VertexId(left + 1));
        Ok(out)
    }

    fn omega(&self, x: VertexId) -> Result<f64> {
        if x.0 == 0 {
            return Err(Error::UnknownVertex(x));
        }
        let d = f64::from(Self::depth(x.0));
        positive("vertex weight", x, (d + 1.0).powf(-self.alpha))
    }

    fn conductance(&self, x: VertexId, y: VertexId) -> Result<f64> {
        let (p, child) = edge_key(x, y);
        if p.0 == 0 || child.0 / 2 != p.0 {
            return Err(Error::NotAnEdge(x, y));
        }
        let d = f64::from(Self::depth(child.0));
        positive("conductance", format!("{{{p},{child}}}"), (d + 1.0).powf(-self.beta))
    }
}

// ---------------------------------------------------------------------------
// Family specifications

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    HalfLinePower,
    HalfLineLog,
    HalfLineTable,
    BinaryTree,
    FiniteFile,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::HalfLinePower => "half-line-power",
            FamilyKind::HalfLineLog => "half-line-log",
            FamilyKind::HalfLineTable => "half-line-table",
            FamilyKind::BinaryTree => "binary-tree",
            FamilyKind::FiniteFile => "finite-file",
        }
    }

    pub fn is_half_line(self) -> bool {
        matches!(
            self,
            FamilyKind::HalfLinePower | FamilyKind::HalfLineLog | FamilyKind::HalfLineTable
        )
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "half-line-power" | "power" => Ok(FamilyKind::HalfLinePower),
            "half-line-log" | "log" => Ok(FamilyKind::HalfLineLog),
            "half-line-table" | "table" => Ok(FamilyKind::HalfLineTable),
            "binary-tree" | "tree" => Ok(FamilyKind::BinaryTree),
            "finite-file" | "file" => Ok(FamilyKind::FiniteFile),
            other => Err(format!("unknown family `{other}`")),
        }
    }
}

/// Parameters of a generated graph family.
///
/// * `half-line-power`: ω_n = n^{−α}, c_{n,n+1} = (n+1)^{ε−β}.
/// * `half-line-log`: ω_n = 1/(n ln n), c_{n,n+1} = (n+1)^{ε−β}; start ≥ 2.
/// * `half-line-table`: ω and c read periodically from the two tables.
/// * `binary-tree`: ω_x = (depth+1)^{−α}, c = (depth of child + 1)^{−β}.
/// * `finite-file`: edge-list file, see [`crate::format::parse_edge_list`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub start: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub omega_table: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conductance_table: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl FamilySpec {
    pub fn new(kind: FamilyKind) -> Self {
        FamilySpec {
            kind,
            alpha: 0.0,
            beta: 0.0,
            epsilon: 0.0,
            start: if kind == FamilyKind::HalfLineLog { 2 } else { 1 },
            omega_table: Vec::new(),
            conductance_table: Vec::new(),
            file: None,
        }
    }

    pub fn power(alpha: f64, beta: f64) -> Self {
        FamilySpec {
            alpha,
            beta,
            ..Self::new(FamilyKind::HalfLinePower)
        }
    }

    pub fn log() -> Self {
        Self::new(FamilyKind::HalfLineLog)
    }

    pub fn table(omega: Vec<f64>, conductance: Vec<f64>) -> Self {
        FamilySpec {
            omega_table: omega,
            conductance_table: conductance,
            ..Self::new(FamilyKind::HalfLineTable)
        }
    }

    pub fn binary_tree() -> Self {
        Self::new(FamilyKind::BinaryTree)
    }

    pub fn finite_file(path: impl Into<PathBuf>) -> Self {
        FamilySpec {
            file: Some(path.into()),
            ..Self::new(FamilyKind::FiniteFile)
        }
    }

    pub fn with_start(mut self, start: u64) -> Self {
        self.start = start;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Exponent of the conductance law c_{n,n+1} = (n+1)^{ε−β}.
    pub fn conductance_exponent(&self) -> f64 {
        self.epsilon - self.beta
    }

    pub fn is_half_line(&self) -> bool {
        self.kind.is_half_line()
    }

    /// True when every vertex carries the same weight.
    pub fn has_constant_omega(&self) -> bool {
        match self.kind {
            FamilyKind::HalfLinePower | FamilyKind::BinaryTree => self.alpha == 0.0,
            FamilyKind::HalfLineLog => false,
            FamilyKind::HalfLineTable => self.omega_table.windows(2).all(|w| w[0] == w[1]),
            FamilyKind::FiniteFile => false,
        }
    }
}

/// Builds the lazy graph described by `spec`.
pub fn build_family(spec: &FamilySpec) -> Result<WeightedGraph> {
    for (name, v) in [("alpha", spec.alpha), ("beta", spec.beta), ("epsilon", spec.epsilon)] {
        if !v.is_finite() {
            return Err(Error::InvalidWeight {
                what: format!("parameter {name}"),
                value: v,
            });
        }
    }
    let law = match spec.kind {
        FamilyKind::HalfLinePower => {
            if spec.start < 1 {
                return Err(Error::Domain("power family needs start >= 1".into()));
            }
            HalfLineLaw::Power {
                alpha: spec.alpha,
                cond_exp: spec.conductance_exponent(),
            }
        }
        FamilyKind::HalfLineLog => {
            if spec.start < 2 {
                return Err(Error::Domain(
                    "log family needs start >= 2 so that ln n > 0".into(),
                ));
            }
            HalfLineLaw::Log {
                cond_exp: spec.conductance_exponent(),
            }
        }
        FamilyKind::HalfLineTable => {
            if spec.omega_table.is_empty() || spec.conductance_table.is_empty() {
                return Err(Error::Domain("table family needs non-empty tables".into()));
            }
            for (i, &w) in spec.omega_table.iter().enumerate() {
                positive("omega table entry", i, w)?;
            }
            for (i, &c) in spec.conductance_table.iter().enumerate() {
                positive("conductance table entry", i, c)?;
            }
            HalfLineLaw::Table {
                omega: spec.omega_table.clone(),
                conductance: spec.conductance_table.clone(),
            }
        }
        FamilyKind::BinaryTree => {
            let tree = BinaryTree {
                alpha: spec.alpha,
                beta: spec.beta,
            };
            tree.omega(VertexId(1))?;
            tree.conductance(VertexId(1), VertexId(2))?;
            return Ok(WeightedGraph::new(tree));
        }
        FamilyKind::FiniteFile => {
            let path = spec
                .file
                .as_ref()
                .ok_or_else(|| Error::Domain("finite-file family needs a file".into()))?;
            let text = std::fs::read_to_string(path)?;
            return Ok(WeightedGraph::new(crate::format::parse_edge_list(&text)?));
        }
    };
    let line = HalfLine {
        start: spec.start,
        law,
    };
    let first = VertexId(spec.start);
    line.omega(first)?;
    line.inv_omega(first)?;
    line.conductance(first, VertexId(spec.start + 1))?;
    Ok(WeightedGraph::new(line))
}

// ---------------------------------------------------------------------------
// Regions

/// A finite vertex set K with its interior (vertices whose neighbors all lie
/// in K) and boundary K ∖ interior.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FiniteRegion {
    vertices: BTreeSet<VertexId>,
    interior: BTreeSet<VertexId>,
    boundary: BTreeSet<VertexId>,
}

impl FiniteRegion {
    pub fn new(g: &WeightedGraph, vertices: impl IntoIterator<Item = VertexId>) -> Result<Self> {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();
        let mut interior = BTreeSet::new();
        let mut boundary = BTreeSet::new();
        for &x in &vertices {
            if g.neighbors(x)?.iter().all(|y| vertices.contains(y)) {
                interior.insert(x);
            } else {
                boundary.insert(x);
            }
        }
        Ok(FiniteRegion {
            vertices,
            interior,
            boundary,
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn vertices(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn interior(&self) -> &BTreeSet<VertexId> {
        &self.interior
    }

    pub fn boundary(&self) -> &BTreeSet<VertexId> {
        &self.boundary
    }

    pub fn contains(&self, x: VertexId) -> bool {
        self.vertices.contains(&x)
    }

    pub fn is_interior(&self, x: VertexId) -> bool {
        self.interior.contains(&x)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// The interior viewed as a region of its own.
    pub fn interior_region(&self, g: &WeightedGraph) -> Result<FiniteRegion> {
        FiniteRegion::new(g, self.interior.iter().copied())
    }

    pub fn union(&self, g: &WeightedGraph, other: &FiniteRegion) -> Result<FiniteRegion> {
        FiniteRegion::new(g, self.vertices.union(&other.vertices).copied())
    }
}

/// Maximum degree over `region`; built-in half-lines answer 2 directly.
pub fn valence_bound(g: &WeightedGraph, region: &FiniteRegion) -> Result<usize> {
    if let Some(n) = g.valence_hint() {
        return Ok(n);
    }
    let mut best = 0;
    for &x in region.vertices() {
        best = best.max(g.neighbors(x)?.len());
    }
    Ok(best)
}

/// ℬ_n(x₀): vertices within `radius` edges of `x0`.
pub fn combinatorial_ball(g: &WeightedGraph, x0: VertexId, radius: usize) -> Result<FiniteRegion> {
    capped_ball(g, x0, radius, usize::MAX)
}

/// Like [`combinatorial_ball`], but fails with [`Error::Capacity`] as soon as
/// more than `cap` vertices have been reached.
pub fn capped_ball(g: &WeightedGraph, x0: VertexId, radius: usize, cap: usize) -> Result<FiniteRegion> {
    g.check_vertex(x0)?;
    let mut seen = BTreeSet::from([x0]);
    let mut queue = VecDeque::from([(x0, 0usize)]);
    while let Some((x, d)) = queue.pop_front() {
        if d == radius {
            continue;
        }
        for y in g.neighbors(x)? {
            if seen.insert(y) {
                if seen.len() > cap {
                    return Err(Error::Capacity { size: seen.len(), cap });
                }
                queue.push_back((y, d + 1));
            }
        }
    }
    FiniteRegion::new(g, seen)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Connectivity {
    Connected,
    /// Empty interior: connected only in the vacuous sense.
    Vacuous,
    Disconnected,
}

impl Connectivity {
    /// Vacuous interiors count as connected.
    pub fn holds(self) -> bool {
        !matches!(self, Connectivity::Disconnected)
    }
}

/// Whether the interior of `region` is connected through interior-interior edges.
pub fn is_connected_interior(g: &WeightedGraph, region: &FiniteRegion) -> Result<Connectivity> {
    let interior = region.interior();
    let Some(&first) = interior.iter().next() else {
        return Ok(Connectivity::Vacuous);
    };
    let mut seen = BTreeSet::from([first]);
    let mut stack = vec![first];
    while let Some(x) = stack.pop() {
        for y in g.neighbors(x)? {
            if interior.contains(&y) && seen.insert(y) {
                stack.push(y);
            }
        }
    }
    Ok(if seen.len() == interior.len() {
        Connectivity::Connected
    } else {
        Connectivity::Disconnected
    })
}

/// Edge-count distance between two interior vertices, through the interior.
pub fn interior_distance(
    g: &WeightedGraph,
    region: &FiniteRegion,
    x: VertexId,
    y: VertexId,
) -> Result<Option<usize>> {
    if !region.is_interior(x) || !region.is_interior(y) {
        return Err(Error::Domain(format!("{x} or {y} is not interior")));
    }
    let mut dist = BTreeMap::from([(x, 0usize)]);
    let mut queue = VecDeque::from([x]);
    while let Some(u) = queue.pop_front() {
        let du = dist[&u];
        if u == y {
            return Ok(Some(du));
        }
        for v in g.neighbors(u)? {
            if region.is_interior(v) && !dist.contains_key(&v) {
                dist.insert(v, du + 1);
                queue.push_back(v);
            }
        }
    }
    Ok(None)
}
