//! Dirichlet problems on finite regions, the minimum principle and the local
//! Harnack constant.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{is_connected_interior, Connectivity, FiniteRegion, VertexId};
use crate::linalg::{conjugate_gradient, dense_lu, SparseRows};
use crate::operator::{
    apply_schrodinger, form_lower_bound, FiniteSupportFn, FormBoundOptions, OperatorRef,
    SchrodingerData,
};

/// Find f on K with (Pf) = 0 on the interior and f = u on the boundary.
#[derive(Clone, Debug)]
pub struct DirichletProblem {
    operator: SchrodingerData,
    region: FiniteRegion,
    boundary: BTreeMap<VertexId, f64>,
}

impl DirichletProblem {
    /// Checks that `boundary` covers exactly ∂K and that the interior is
    /// nonempty and connected.
    pub fn new(
        operator: SchrodingerData,
        region: FiniteRegion,
        boundary: BTreeMap<VertexId, f64>,
    ) -> Result<Self> {
        require_connected_interior(&operator, &region)?;
        let keys: BTreeSet<VertexId> = boundary.keys().copied().collect();
        if &keys != region.boundary() {
            return Err(Error::Domain(
                "boundary data must be given on exactly the boundary of the region".into(),
            ));
        }
        if let Some((x, v)) = boundary.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Domain(format!("boundary value {v} at {x} is not finite")));
        }
        Ok(DirichletProblem {
            operator,
            region,
            boundary,
        })
    }

    /// Same boundary value everywhere on ∂K.
    pub fn constant_boundary(operator: SchrodingerData, region: FiniteRegion, value: f64) -> Result<Self> {
        let boundary = region.boundary().iter().map(|&x| (x, value)).collect();
        Self::new(operator, region, boundary)
    }

    pub fn operator(&self) -> &SchrodingerData {
        &self.operator
    }

    pub fn region(&self) -> &FiniteRegion {
        &self.region
    }

    pub fn boundary(&self) -> &BTreeMap<VertexId, f64> {
        &self.boundary
    }

    pub fn with_boundary(&self, boundary: BTreeMap<VertexId, f64>) -> Result<Self> {
        Self::new(self.operator.clone(), self.region.clone(), boundary)
    }
}

fn require_connected_interior(s: &SchrodingerData, region: &FiniteRegion) -> Result<()> {
    match is_connected_interior(s.graph(), region)? {
        Connectivity::Connected => Ok(()),
        Connectivity::Vacuous => Err(Error::Domain("region has an empty interior".into())),
        Connectivity::Disconnected => Err(Error::Domain("region interior is not connected".into())),
    }
}

#[derive(Clone, Debug)]
pub struct DirichletOptions {
    /// Interiors up to this size use dense LU, larger ones conjugate gradient.
    pub lu_limit: usize,
    pub cg_rel_tol: f64,
    /// Residual bound factor, see [`residual_bound`].
    pub residual_tol: f64,
    /// Verify positive definiteness with a dense eigensolve first.
    pub check_positivity: bool,
    pub form: FormBoundOptions,
}

impl Default for DirichletOptions {
    fn default() -> Self {
        DirichletOptions {
            lu_limit: 500,
            cg_rel_tol: 1e-12,
            residual_tol: 1e-10,
            check_positivity: true,
            form: FormBoundOptions::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    DenseLu,
    ConjugateGradient { iterations: usize },
}

#[derive(Clone, Debug)]
pub struct DirichletSolution {
    /// Values on all of K.
    pub f: FiniteSupportFn,
    /// max over the interior of |Pf|.
    pub residual: f64,
    pub residual_bound: f64,
    pub method: SolveMethod,
    /// Smallest eigenvalue of the interior matrix, when it was computed.
    pub form_bound: Option<f64>,
}

/// max over `vertices` of Σ_y a_{x,y} + |W(x)|: the size of a matrix row.
pub fn row_scale(s: &SchrodingerData, vertices: &BTreeSet<VertexId>) -> Result<f64> {
    let mut scale: f64 = 0.0;
    for &x in vertices {
        scale = scale.max(s.degree(x)? + s.w(x)?.abs());
    }
    Ok(scale)
}

/// Residual allowance tol·(1 + max|f|)·max(1, row scale).
///
/// The row scale keeps the bound meaningful for operators whose coefficients
/// are far from unit size.
pub fn residual_bound(tol: f64, max_abs_f: f64, row_scale: f64) -> f64 {
    tol * (1.0 + max_abs_f) * row_scale.max(1.0)
}

/// max over the interior of |(Pf)(x)|.
pub fn interior_residual(s: &SchrodingerData, region: &FiniteRegion, f: &FiniteSupportFn) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in region.interior() {
        worst = worst.max(apply_schrodinger(s, f, x)?.abs());
    }
    Ok(worst)
}

pub fn solve_dirichlet(p: &DirichletProblem, opts: &DirichletOptions) -> Result<DirichletSolution> {
    let s = &p.operator;
    let interior = p.region.interior();
    let index: BTreeMap<VertexId, usize> = interior.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let n = interior.len();

    let mut form_bound = None;
    if opts.check_positivity && n <= opts.form.dense_cap {
        let inner = FiniteRegion::new(s.graph(), interior.iter().copied())?;
        let k = form_lower_bound(OperatorRef::Schrodinger(s), &inner, opts.form)?.k;
        if k <= 0.0 {
            return Err(Error::Precondition(format!(
                "operator is not positive definite on the interior (smallest eigenvalue {k:e})"
            )));
        }
        form_bound = Some(k);
    }

    let mut matrix = SparseRows::new(n);
    let mut rhs = vec![0.0; n];
    for (&x, &i) in &index {
        let mut diag = s.w(x)?;
        for y in s.neighbors(x)? {
            let a = s.a(x, y)?;
            diag += a;
            match index.get(&y) {
                Some(&j) => matrix.push(i, j, -a),
                None => {
                    let u = p.boundary.get(&y).ok_or_else(|| {
                        Error::Internal(format!("interior vertex {x} has neighbor {y} outside K"))
                    })?;
                    rhs[i] += a * u;
                }
            }
        }
        matrix.push(i, i, diag);
    }

    let (values, method) = if n <= opts.lu_limit {
        (dense_lu(&matrix, &rhs)?, SolveMethod::DenseLu)
    } else {
        let (x, iterations) = conjugate_gradient(&matrix, &rhs, opts.cg_rel_tol, 20 * n + 100)?;
        (x, SolveMethod::ConjugateGradient { iterations })
    };

    let mut f: FiniteSupportFn = p.boundary.iter().map(|(&x, &u)| (x, u)).collect();
    for (&x, &i) in &index {
        f.set(x, values[i]);
    }
    let residual = interior_residual(s, &p.region, &f)?;
    let bound = residual_bound(opts.residual_tol, f.max_abs(), row_scale(s, interior)?);
    if !(residual <= bound) {
        return Err(Error::Internal(format!(
            "Dirichlet residual {residual:e} exceeds {bound:e}"
        )));
    }
    Ok(DirichletSolution {
        f,
        residual,
        residual_bound: bound,
        method,
        form_bound,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict")]
pub enum MinimumPrinciple {
    /// Some hypothesis fails.
    NotApplicable { reason: String },
    /// Hypotheses hold and f is constant on K.
    ApplicableAndConstant,
    /// Hypotheses hold but f is not constant: an upstream bug.
    Violation { at: VertexId, minimum: f64 },
}

/// Checks the minimum principle: with W > 0 and Pf ≥ 0 on the interior, a
/// nonpositive interior minimum forces f to be constant on K.
///
/// `tol` is a relative slack for the sign test on Pf and the constancy test.
pub fn minimum_principle_check(
    s: &SchrodingerData,
    region: &FiniteRegion,
    f: &FiniteSupportFn,
    tol: f64,
) -> Result<MinimumPrinciple> {
    require_connected_interior(s, region)?;
    for &x in region.vertices() {
        let w = s.w(x)?;
        if w <= 0.0 {
            return Ok(MinimumPrinciple::NotApplicable {
                reason: format!("W({x}) = {w} is not positive"),
            });
        }
    }
    let slack = tol * (1.0 + f.max_abs()) * row_scale(s, region.interior())?.max(1.0);
    for &x in region.interior() {
        let pf = apply_schrodinger(s, f, x)?;
        if pf < -slack {
            return Ok(MinimumPrinciple::NotApplicable {
                reason: format!("(Pf)({x}) = {pf:e} is negative"),
            });
        }
    }
    // ties resolve to the lowest id
    let (at, minimum) = region
        .interior()
        .iter()
        .map(|&x| (x, f.get(x)))
        .fold(None, |best: Option<(VertexId, f64)>, (x, v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((x, v)),
        })
        .expect("interior is nonempty");
    if minimum > 0.0 {
        return Ok(MinimumPrinciple::NotApplicable {
            reason: format!("interior minimum {minimum:e} is positive"),
        });
    }
    let spread = region
        .vertices()
        .iter()
        .map(|&x| (f.get(x) - minimum).abs())
        .fold(0.0, f64::max);
    if spread <= tol * (1.0 + f.max_abs()) {
        Ok(MinimumPrinciple::ApplicableAndConstant)
    } else {
        Ok(MinimumPrinciple::Violation { at, minimum })
    }
}

/// How the sum A of edge coefficients over K counts edges.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeSum {
    /// Each unordered edge once.
    #[default]
    Unordered,
    /// Each edge once per orientation, doubling A.
    Ordered,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackCertificate {
    pub k0: f64,
    /// Smallest edge coefficient inside K.
    pub alpha: f64,
    /// Sum of edge coefficients inside K.
    pub a_sum: f64,
    /// max(0, max_K W).
    pub max_w: f64,
    pub edge_sum: EdgeSum,
}

/// k₀ = (max(0, max_K W) + A)/α over edges with both endpoints in K.
pub fn harnack_constant(s: &SchrodingerData, region: &FiniteRegion, edge_sum: EdgeSum) -> Result<HarnackCertificate> {
    let mut alpha = f64::INFINITY;
    let mut a_sum = 0.0;
    let mut max_w: f64 = 0.0;
    let mut edges = 0usize;
    for &x in region.vertices() {
        max_w = max_w.max(s.w(x)?);
        for y in s.neighbors(x)? {
            if x < y && region.contains(y) {
                let a = s.a(x, y)?;
                alpha = alpha.min(a);
                a_sum += a;
                edges += 1;
            }
        }
    }
    if edges == 0 {
        return Err(Error::Domain("region contains no edge".into()));
    }
    if edge_sum == EdgeSum::Ordered {
        a_sum *= 2.0;
    }
    Ok(HarnackCertificate {
        k0: (max_w + a_sum) / alpha,
        alpha,
        a_sum,
        max_w,
        edge_sum,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackVerdict {
    pub x: VertexId,
    pub y: VertexId,
    /// φ(x)/φ(y)
    pub ratio: f64,
    /// Interior edge distance between x and y.
    pub distance: usize,
    /// k₀^d, the asserted bound.
    pub bound: f64,
    /// k₀^(d−1), reported only.
    pub tighter_bound: f64,
    pub holds: bool,
    pub tighter_holds: bool,
}

/// Validates φ once and then checks the Harnack bound for many pairs.
pub struct HarnackVerifier<'a> {
    region: &'a FiniteRegion,
    phi: &'a FiniteSupportFn,
    cert: HarnackCertificate,
    distances: BTreeMap<VertexId, BTreeMap<VertexId, usize>>,
}

impl<'a> HarnackVerifier<'a> {
    /// Requires φ > 0 on K and |Pφ| within the residual allowance on the interior.
    pub fn new(
        s: &SchrodingerData,
        region: &'a FiniteRegion,
        phi: &'a FiniteSupportFn,
        cert: HarnackCertificate,
        tol: f64,
    ) -> Result<Self> {
        require_connected_interior(s, region)?;
        if let Some(x) = region.vertices().iter().find(|&&x| !(phi.get(x) > 0.0)) {
            return Err(Error::Domain(format!("phi is not positive at {x}")));
        }
        let residual = interior_residual(s, region, phi)?;
        let bound = residual_bound(tol, phi.max_abs(), row_scale(s, region.interior())?);
        if residual > bound {
            return Err(Error::Domain(format!(
                "phi is not harmonic on the interior (residual {residual:e} > {bound:e})"
            )));
        }
        Ok(HarnackVerifier {
            region,
            phi,
            cert,
            distances: interior_distances(s, region)?,
        })
    }

    pub fn certificate(&self) -> &HarnackCertificate {
        &self.cert
    }

    pub fn verify(&self, x: VertexId, y: VertexId) -> Result<HarnackVerdict> {
        if !self.region.is_interior(x) || !self.region.is_interior(y) {
            return Err(Error::Domain(format!("{x} and {y} must both be interior")));
        }
        let distance = self.distances[&x][&y];
        let ratio = self.phi.get(x) / self.phi.get(y);
        let k0 = self.cert.k0;
        let bound = k0.powi(distance as i32);
        let tighter_bound = k0.powi(distance as i32 - 1);
        let within = |k: f64| 1.0 / k <= ratio && ratio <= k;
        Ok(HarnackVerdict {
            x,
            y,
            ratio,
            distance,
            bound,
            tighter_bound,
            holds: within(bound),
            tighter_holds: within(tighter_bound),
        })
    }
}

fn interior_distances(
    s: &SchrodingerData,
    region: &FiniteRegion,
) -> Result<BTreeMap<VertexId, BTreeMap<VertexId, usize>>> {
    let mut adjacency: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for &x in region.interior() {
        let inner = s
            .neighbors(x)?
            .into_iter()
            .filter(|y| region.is_interior(*y))
            .collect();
        adjacency.insert(x, inner);
    }
    let mut all = BTreeMap::new();
    for &source in region.interior() {
        let mut dist = BTreeMap::from([(source, 0usize)]);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            for &v in &adjacency[&u] {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(du + 1);
                    queue.push_back(v);
                }
            }
        }
        all.insert(source, dist);
    }
    Ok(all)
}

/// Checks 1/k ≤ φ(x)/φ(y) ≤ k with k = k₀^d for one pair.
pub fn harnack_verify(
    s: &SchrodingerData,
    region: &FiniteRegion,
    phi: &FiniteSupportFn,
    x: VertexId,
    y: VertexId,
    tol: f64,
) -> Result<HarnackVerdict> {
    let cert = harnack_constant(s, region, EdgeSum::Unordered)?;
    HarnackVerifier::new(s, region, phi, cert, tol)?.verify(x, y)
}
