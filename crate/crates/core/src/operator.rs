//! The weighted Laplacian Δ_{ω,c}, Schrödinger operators Δ_{1,a} + W and the
//! gauge U_ω f = ωf relating them.
//!
//! Sign convention: Δ is positive semidefinite,
//! (Δ_{ω,c} f)(x) = ω_x⁻² Σ_{y∼x} c_{x,y} (f(x) − f(y)).
//! Every neighbor sum runs in ascending vertex id.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{FiniteRegion, VertexId, WeightedGraph};

/// Real function with finite support; absent vertices read as 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FiniteSupportFn {
    values: BTreeMap<VertexId, f64>,
}

impl FiniteSupportFn {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn indicator(x: VertexId) -> Self {
        Self::from_iter([(x, 1.0)])
    }

    pub fn constant_on<'a>(vertices: impl IntoIterator<Item = &'a VertexId>, value: f64) -> Self {
        vertices.into_iter().map(|&x| (x, value)).collect()
    }

    pub fn get(&self, x: VertexId) -> f64 {
        self.values.get(&x).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, x: VertexId, value: f64) {
        self.values.insert(x, value);
    }

    pub fn support(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.values.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, f64)> + '_ {
        self.values.iter().map(|(&x, &v)| (x, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, mut op: impl FnMut(VertexId, f64) -> f64) -> Self {
        self.iter().map(|(x, v)| (x, op(x, v))).collect()
    }

    pub fn scaled(&self, t: f64) -> Self {
        self.map(|_, v| t * v)
    }

    /// Pointwise `self − other` over the union of supports.
    pub fn sub(&self, other: &FiniteSupportFn) -> Self {
        let keys: BTreeSet<VertexId> = self.support().chain(other.support()).collect();
        keys.into_iter()
            .map(|x| (x, self.get(x) - other.get(x)))
            .collect()
    }

    pub fn restrict(&self, keep: &BTreeSet<VertexId>) -> Self {
        self.iter().filter(|(x, _)| keep.contains(x)).collect()
    }
}

impl FromIterator<(VertexId, f64)> for FiniteSupportFn {
    fn from_iter<I: IntoIterator<Item = (VertexId, f64)>>(iter: I) -> Self {
        FiniteSupportFn {
            values: iter.into_iter().collect(),
        }
    }
}

/// Anything that can be evaluated at a vertex.
/// Serializes as a map from vertex id to value.
impl Serialize for FiniteSupportFn {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_map(self.iter().map(|(x, v)| (x.0, v)))
    }
}

pub trait VertexFn {
    fn value_at(&self, x: VertexId) -> f64;
}

impl VertexFn for FiniteSupportFn {
    fn value_at(&self, x: VertexId) -> f64 {
        self.get(x)
    }
}

impl<F: Fn(VertexId) -> f64> VertexFn for F {
    fn value_at(&self, x: VertexId) -> f64 {
        self(x)
    }
}

type EdgeFn = Arc<dyn Fn(VertexId, VertexId) -> f64 + Send + Sync>;
type PotentialFn = Arc<dyn Fn(VertexId) -> f64 + Send + Sync>;

/// Edge coefficients a_{x,y} of a Schrödinger operator.
#[derive(Clone)]
pub enum EdgeCoefficients {
    /// a = c, the graph's conductance.
    Conductance,
    /// a = t·c.
    Scaled(f64),
    /// a = c/(ω_x ω_y).
    Gauge,
    /// Receives the endpoints in ascending order.
    Custom(EdgeFn),
}

/// Vertex potential W.
#[derive(Clone)]
pub enum Potential {
    Zero,
    Constant(f64),
    /// W = −(1/ω) Δ_{1,a} ω with a the gauge coefficients, by exact neighbor sum.
    Gauge,
    /// Missing vertices read as 0.
    Table(Arc<BTreeMap<VertexId, f64>>),
    Custom(PotentialFn),
}

impl fmt::Debug for EdgeCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeCoefficients::Conductance => f.write_str("Conductance"),
            EdgeCoefficients::Scaled(t) => write!(f, "Scaled({t})"),
            EdgeCoefficients::Gauge => f.write_str("Gauge"),
            EdgeCoefficients::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => f.write_str("Zero"),
            Potential::Constant(w) => write!(f, "Constant({w})"),
            Potential::Gauge => f.write_str("Gauge"),
            Potential::Table(t) => write!(f, "Table({} entries)", t.len()),
            Potential::Custom(_) => f.write_str("Custom"),
        }
    }
}

/// The operator Δ_{1,a} + W on a graph.
#[derive(Clone, Debug)]
pub struct SchrodingerData {
    graph: WeightedGraph,
    edges: EdgeCoefficients,
    potential: Potential,
}

impl SchrodingerData {
    pub fn new(graph: WeightedGraph, edges: EdgeCoefficients, potential: Potential) -> Self {
        SchrodingerData {
            graph,
            edges,
            potential,
        }
    }

    /// Δ_{1,c} with zero potential.
    pub fn combinatorial(graph: WeightedGraph) -> Self {
        Self::new(graph, EdgeCoefficients::Conductance, Potential::Zero)
    }

    pub fn with_potential(mut self, potential: Potential) -> Self {
        self.potential = potential;
        self
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn edges(&self) -> &EdgeCoefficients {
        &self.edges
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn neighbors(&self, x: VertexId) -> Result<Vec<VertexId>> {
        self.graph.neighbors(x)
    }

    /// a_{x,y} for adjacent x, y; symmetric bit for bit.
    pub fn a(&self, x: VertexId, y: VertexId) -> Result<f64> {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let value = match &self.edges {
            EdgeCoefficients::Conductance => self.graph.conductance(lo, hi)?,
            EdgeCoefficients::Scaled(t) => t * self.graph.conductance(lo, hi)?,
            EdgeCoefficients::Gauge => {
                self.graph.conductance(lo, hi)?
                    * self.graph.inv_omega(lo)?
                    * self.graph.inv_omega(hi)?
            }
            EdgeCoefficients::Custom(f) => {
                self.graph.conductance(lo, hi)?;
                f(lo, hi)
            }
        };
        if value.is_finite() && value > 0.0 {
            Ok(value)
        } else if value == 0.0 {
            Err(Error::Numeric(format!("a_{{{lo},{hi}}} underflows to 0")))
        } else {
            Err(Error::InvalidWeight {
                what: format!("edge coefficient {{{lo},{hi}}}"),
                value,
            })
        }
    }

    pub fn w(&self, x: VertexId) -> Result<f64> {
        match &self.potential {
            Potential::Zero => {
                self.graph.check_vertex(x)?;
                Ok(0.0)
            }
            Potential::Constant(w) => {
                self.graph.check_vertex(x)?;
                Ok(*w)
            }
            Potential::Gauge => {
                let mut sum = 0.0;
                for y in self.graph.neighbors(x)? {
                    sum += self.graph.conductance(x, y)? * self.graph.inv_omega_gap(x, y)?;
                }
                Ok(self.graph.inv_omega(x)? * sum)
            }
            Potential::Table(t) => {
                self.graph.check_vertex(x)?;
                Ok(t.get(&x).copied().unwrap_or(0.0))
            }
            Potential::Custom(f) => {
                self.graph.check_vertex(x)?;
                Ok(f(x))
            }
        }
    }

    /// Σ_{y∼x} a_{x,y}, the off-potential part of the diagonal.
    pub fn degree(&self, x: VertexId) -> Result<f64> {
        let mut sum = 0.0;
        for y in self.neighbors(x)? {
            sum += self.a(x, y)?;
        }
        Ok(sum)
    }
}

/// (Δ_{ω,c} f)(x).
pub fn apply_laplacian(g: &WeightedGraph, f: &impl VertexFn, x: VertexId) -> Result<f64> {
    let fx = f.value_at(x);
    let mut sum = 0.0;
    for y in g.neighbors(x)? {
        sum += g.conductance(x, y)? * (fx - f.value_at(y));
    }
    let w = g.omega(x)?;
    Ok(sum / (w * w))
}

/// ((Δ_{1,a} + W) f)(x).
pub fn apply_schrodinger(s: &SchrodingerData, f: &impl VertexFn, x: VertexId) -> Result<f64> {
    let fx = f.value_at(x);
    let mut sum = 0.0;
    for y in s.neighbors(x)? {
        sum += s.a(x, y)? * (fx - f.value_at(y));
    }
    Ok(sum + s.w(x)? * fx)
}

fn extended_support(g: &WeightedGraph, f: &FiniteSupportFn) -> Result<BTreeSet<VertexId>> {
    let mut out = BTreeSet::new();
    for x in f.support() {
        out.insert(x);
        out.extend(g.neighbors(x)?);
    }
    Ok(out)
}

/// Δ_{ω,c} f as a finitely supported function (support of f plus neighbors).
pub fn laplacian_of(g: &WeightedGraph, f: &FiniteSupportFn) -> Result<FiniteSupportFn> {
    extended_support(g, f)?
        .into_iter()
        .map(|x| Ok((x, apply_laplacian(g, f, x)?)))
        .collect()
}

/// (Δ_{1,a} + W) f as a finitely supported function.
pub fn schrodinger_of(s: &SchrodingerData, f: &FiniteSupportFn) -> Result<FiniteSupportFn> {
    extended_support(s.graph(), f)?
        .into_iter()
        .map(|x| Ok((x, apply_schrodinger(s, f, x)?)))
        .collect()
}

/// Q_c(f) = Σ_{{x,y}∈E} c_{x,y} (f(x) − f(y))².
pub fn quadratic_form(g: &WeightedGraph, f: &FiniteSupportFn) -> Result<f64> {
    let mut sum = 0.0;
    for (x, fx) in f.iter() {
        for y in g.neighbors(x)? {
            let in_support = f.values.contains_key(&y);
            // each edge once: from its smaller endpoint when both are in the support
            if !in_support || x < y {
                let d = fx - f.get(y);
                sum += g.conductance(x, y)? * d * d;
            }
        }
    }
    Ok(sum)
}

/// ⟨f, h⟩ in ℓ²_ω: Σ ω_x² f(x) h(x).
pub fn inner_product_omega(g: &WeightedGraph, f: &FiniteSupportFn, h: &FiniteSupportFn) -> Result<f64> {
    let mut sum = 0.0;
    for (x, fx) in f.iter() {
        if let Some(&hx) = h.values.get(&x) {
            let w = g.omega(x)?;
            sum += w * w * fx * hx;
        }
    }
    Ok(sum)
}

/// Plain ℓ² inner product.
pub fn inner_product(f: &FiniteSupportFn, h: &FiniteSupportFn) -> f64 {
    f.iter()
        .filter_map(|(x, fx)| h.values.get(&x).map(|hx| fx * hx))
        .sum()
}

/// Edge coefficients a = c/(ω_x ω_y) and potential W = −(1/ω) Δ_{1,a} ω, so
/// that (Δ_{1,a} + W)(ω f) = ω Δ_{ω,c} f.
pub fn gauge_to_schrodinger(g: &WeightedGraph) -> SchrodingerData {
    SchrodingerData::new(g.clone(), EdgeCoefficients::Gauge, Potential::Gauge)
}

/// U_ω f = ω f.
pub fn conjugate_u_omega(g: &WeightedGraph, f: &FiniteSupportFn) -> Result<FiniteSupportFn> {
    f.iter().map(|(x, v)| Ok((x, g.omega(x)? * v))).collect()
}

/// U_ω⁻¹ f = f / ω.
pub fn conjugate_u_omega_inverse(g: &WeightedGraph, f: &FiniteSupportFn) -> Result<FiniteSupportFn> {
    f.iter().map(|(x, v)| Ok((x, v / g.omega(x)?))).collect()
}

/// Operator whose quadratic form is being bounded.
#[derive(Clone, Copy, Debug)]
pub enum OperatorRef<'a> {
    /// Δ_{ω,c} in ℓ²_ω; bounded through its gauge transform.
    Laplacian(&'a WeightedGraph),
    Schrodinger(&'a SchrodingerData),
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundScope {
    /// Valid for functions supported in this region.
    Region(FiniteRegion),
    /// Valid on all of C₀(V), for the stated reason.
    Global(String),
}

/// ⟨Hf, f⟩ ≥ k‖f‖² on the stated scope.
#[derive(Clone, Debug, Serialize)]
pub struct FormBound {
    pub k: f64,
    pub scope: BoundScope,
}

impl FormBound {
    /// k = 0 for a gauge-transformed Laplacian, whose form equals Q_c(g/ω) ≥ 0.
    pub fn gauge_nonnegative() -> Self {
        FormBound {
            k: 0.0,
            scope: BoundScope::Global("unitarily equivalent to a nonnegative Laplacian".into()),
        }
    }

    /// Whether the bound applies to functions supported in `region`.
    pub fn covers(&self, region: &FiniteRegion) -> bool {
        match &self.scope {
            BoundScope::Global(_) => true,
            BoundScope::Region(r) => region.vertices().is_subset(r.vertices()),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FormBoundOptions {
    pub dense_cap: usize,
}

impl Default for FormBoundOptions {
    fn default() -> Self {
        FormBoundOptions { dense_cap: 2000 }
    }
}

/// Matrix of Δ_{1,a} + W on functions supported in `vertices`, in ascending id order.
/// Diagonal entries include edges leaving the set.
pub fn schrodinger_matrix(s: &SchrodingerData, vertices: &BTreeSet<VertexId>) -> Result<DMatrix<f64>> {
    let index: BTreeMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let n = vertices.len();
    let mut m = DMatrix::zeros(n, n);
    for (&x, &i) in &index {
        let mut diag = s.w(x)?;
        for y in s.neighbors(x)? {
            let a = s.a(x, y)?;
            diag += a;
            if let Some(&j) = index.get(&y) {
                m[(i, j)] = -a;
            }
        }
        m[(i, i)] = diag;
    }
    Ok(m)
}

/// Smallest eigenvalue of the operator restricted to functions supported in `region`.
pub fn form_lower_bound(op: OperatorRef<'_>, region: &FiniteRegion, opts: FormBoundOptions) -> Result<FormBound> {
    if region.is_empty() {
        return Err(Error::Domain("form bound over an empty region".into()));
    }
    if region.len() > opts.dense_cap {
        return Err(Error::Capacity {
            size: region.len(),
            cap: opts.dense_cap,
        });
    }
    let gauge;
    let s = match op {
        OperatorRef::Schrodinger(s) => s,
        OperatorRef::Laplacian(g) => {
            gauge = gauge_to_schrodinger(g);
            &gauge
        }
    };
    let m = schrodinger_matrix(s, region.vertices())?;
    let k = SymmetricEigen::new(m).eigenvalues.min();
    if !k.is_finite() {
        return Err(Error::Numeric("eigenvalue computation diverged".into()));
    }
    Ok(FormBound {
        k,
        scope: BoundScope::Region(region.clone()),
    })
}
