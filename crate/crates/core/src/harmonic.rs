//! Positive harmonic functions by ball exhaustion, and the unitary map from a
//! positive Schrödinger operator to a Laplacian.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dirichlet::{
    harnack_constant, interior_residual, solve_dirichlet, DirichletOptions, DirichletProblem, EdgeSum,
};
use crate::error::{Error, Result};
use crate::graph::{capped_ball, combinatorial_ball, interior_distance, FiniteGraph, FiniteRegion, VertexId, WeightedGraph};
use crate::operator::{
    apply_laplacian, apply_schrodinger, inner_product, inner_product_omega, FiniteSupportFn, SchrodingerData,
};

#[derive(Clone, Debug)]
pub struct HarmonicOptions {
    pub n_max: usize,
    /// Radius of the ball ℬ_window on which Φ is reported.
    pub window: usize,
    /// Sup-difference tolerance between consecutive Φ_n.
    pub tol: f64,
    /// Residual allowance factor: |PΦ| ≤ residual_tol·(1 + max Φ).
    pub residual_tol: f64,
    /// Vertices whose Φ_n values are kept for every n; defaults to the
    /// first 64 vertices of the window.
    pub probes: Option<Vec<VertexId>>,
    /// Largest ball the exhaustion will solve on.
    pub max_ball: usize,
    pub dirichlet: DirichletOptions,
}

impl Default for HarmonicOptions {
    fn default() -> Self {
        HarmonicOptions {
            n_max: 200,
            window: 30,
            tol: 1e-8,
            residual_tol: 1e-8,
            probes: None,
            max_ball: 200_000,
            dirichlet: DirichletOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HistoryEntry {
    pub n: usize,
    /// Φ_n on the probe set.
    pub values: BTreeMap<VertexId, f64>,
    /// sup over the window of |Φ_n − Φ_{n−1}|; absent for the first entry.
    pub sup_change: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicProfile {
    pub anchor: VertexId,
    pub window: FiniteRegion,
    /// The last Φ_n restricted to the window.
    pub values: FiniteSupportFn,
    /// max |PΦ| over the window interior.
    pub residual: f64,
    pub residual_bound: f64,
    pub converged: bool,
    pub history: Vec<HistoryEntry>,
    /// Limits of the even and odd subsequences when the sequence did not
    /// settle; both are last-seen values.
    pub even_candidate: Option<FiniteSupportFn>,
    pub odd_candidate: Option<FiniteSupportFn>,
}

impl HarmonicProfile {
    /// Converged, positive, normalized and within the residual bound.
    pub fn accepted(&self) -> bool {
        self.converged
            && self.residual <= self.residual_bound
            && self.values.get(self.anchor) == 1.0
            && self.values.iter().all(|(_, v)| v > 0.0)
    }

    pub fn get(&self, x: VertexId) -> f64 {
        self.values.get(x)
    }
}

/// Solves Pψ_n = 0 on ℬ_n(x₀) with ψ_n ≡ 1 on ∂ℬ_n and normalizes at x₀, for
/// n = window+1 ..= n_max, stopping once the window values have moved by at
/// most `tol` for three consecutive n.
pub fn build_harmonic(s: &SchrodingerData, x0: VertexId, opts: &HarmonicOptions) -> Result<HarmonicProfile> {
    let g = s.graph();
    let window = capped_ball(g, x0, opts.window, opts.max_ball)?;
    if !window.is_interior(x0) {
        return Err(Error::Domain(format!("anchor {x0} is not interior to the window")));
    }
    let probes: BTreeSet<VertexId> = match &opts.probes {
        Some(p) => {
            if let Some(x) = p.iter().find(|x| !window.contains(**x)) {
                return Err(Error::Domain(format!("probe {x} lies outside the window")));
            }
            p.iter().copied().collect()
        }
        None => window.vertices().iter().copied().take(64).collect(),
    };

    let mut history: Vec<HistoryEntry> = Vec::new();
    let mut last: Option<FiniteSupportFn> = None;
    let mut even = None;
    let mut odd = None;
    let mut streak = 0;
    let mut converged = false;

    for n in opts.window + 1..=opts.n_max {
        let ball = capped_ball(g, x0, n, opts.max_ball)?;
        let problem = DirichletProblem::constant_boundary(s.clone(), ball, 1.0)?;
        let psi = solve_dirichlet(&problem, &opts.dirichlet).map_err(|e| match e {
            Error::Precondition(m) => Error::Precondition(format!("ball of radius {n} around {x0}: {m}")),
            other => other,
        })?;
        let anchor = psi.f.get(x0);
        if !(anchor > 0.0) {
            return Err(Error::Internal(format!(
                "psi_{n}({x0}) = {anchor:e} is not positive"
            )));
        }
        let phi = psi.f.restrict(window.vertices()).map(|x, v| if x == x0 { 1.0 } else { v / anchor });

        let sup_change = last.as_ref().map(|prev| {
            window
                .vertices()
                .iter()
                .map(|&x| (phi.get(x) - prev.get(x)).abs())
                .fold(0.0, f64::max)
        });
        history.push(HistoryEntry {
            n,
            values: probes.iter().map(|&x| (x, phi.get(x))).collect(),
            sup_change,
        });
        if n % 2 == 0 {
            even = Some(phi.clone());
        } else {
            odd = Some(phi.clone());
        }
        last = Some(phi);
        match sup_change {
            Some(d) if d <= opts.tol => streak += 1,
            _ => streak = 0,
        }
        if streak >= 3 {
            converged = true;
            break;
        }
    }

    let values = last.ok_or_else(|| Error::Domain("n_max must exceed the window radius".into()))?;
    let residual = interior_residual(s, &window, &values)?;
    let residual_bound = opts.residual_tol * (1.0 + values.max_abs());
    let (even_candidate, odd_candidate) = if converged { (None, None) } else { (even, odd) };
    Ok(HarmonicProfile {
        anchor: x0,
        window,
        values,
        residual,
        residual_bound,
        converged,
        history,
        even_candidate,
        odd_candidate,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeCheck {
    pub vertex: VertexId,
    /// First radius whose ball has both the vertex and the anchor inside.
    pub n0: usize,
    /// k₀(ℬ_{n₀})^d with d the interior distance to the anchor.
    pub bound: f64,
    pub min_seen: f64,
    pub max_seen: f64,
    pub holds: bool,
}

/// Checks every recorded Φ_n(x) against the Harnack interval [1/k, k] taken
/// from the first ball ℬ_{n₀} having x and x₀ as interior vertices.
pub fn harnack_envelope(s: &SchrodingerData, profile: &HarmonicProfile) -> Result<Vec<EnvelopeCheck>> {
    let g = s.graph();
    let x0 = profile.anchor;
    let probes: BTreeSet<VertexId> = profile
        .history
        .iter()
        .flat_map(|h| h.values.keys().copied())
        .collect();
    let mut out = Vec::new();
    for x in probes {
        let mut n0 = 1;
        let ball = loop {
            let ball = combinatorial_ball(g, x0, n0)?;
            if ball.is_interior(x) && ball.is_interior(x0) {
                break ball;
            }
            if n0 > profile.window.len() + 1 {
                return Err(Error::Internal(format!("{x} never becomes interior")));
            }
            n0 += 1;
        };
        let cert = harnack_constant(s, &ball, EdgeSum::Unordered)?;
        let d = interior_distance(g, &ball, x, x0)?
            .ok_or_else(|| Error::Internal(format!("{x} and {x0} are not joined inside the ball")))?;
        let bound = cert.k0.powi(d as i32);
        let seen: Vec<f64> = profile
            .history
            .iter()
            .filter(|h| h.n >= n0)
            .filter_map(|h| h.values.get(&x).copied())
            .collect();
        let min_seen = seen.iter().copied().fold(f64::INFINITY, f64::min);
        let max_seen = seen.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out.push(EnvelopeCheck {
            vertex: x,
            n0,
            bound,
            min_seen,
            max_seen,
            holds: seen.iter().all(|&v| 1.0 / bound <= v && v <= bound),
        });
    }
    Ok(out)
}

/// Δ_{ω,c} with ω = Φ and c = aΦ(x)Φ(y), on the profile window.
#[derive(Clone, Debug)]
pub struct UnitarizedLaplacian {
    pub omega: BTreeMap<VertexId, f64>,
    pub conductance: BTreeMap<(VertexId, VertexId), f64>,
    window: FiniteRegion,
    graph: WeightedGraph,
}

impl UnitarizedLaplacian {
    pub fn window(&self) -> &FiniteRegion {
        &self.window
    }

    /// The window as a finite graph. Only interior window vertices see all
    /// their edges.
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    /// ⟨Pg, g⟩ and ⟨Δ_{ω,c}(g/Φ), g/Φ⟩_{ℓ²_ω}; g must live on the window interior.
    pub fn form_pair(&self, s: &SchrodingerData, g: &FiniteSupportFn) -> Result<(f64, f64)> {
        if let Some(x) = g.support().find(|&x| !self.window.is_interior(x)) {
            return Err(Error::Domain(format!(
                "test function reaches {x}, too close to the window edge"
            )));
        }
        let pg: FiniteSupportFn = g
            .support()
            .map(|x| Ok((x, apply_schrodinger(s, g, x)?)))
            .collect::<Result<_>>()?;
        let lhs = inner_product(&pg, g);
        let h = g.map(|x, v| v / self.omega[&x]);
        let lap: FiniteSupportFn = h
            .support()
            .map(|x| Ok((x, apply_laplacian(&self.graph, &h, x)?)))
            .collect::<Result<_>>()?;
        let rhs = inner_product_omega(&self.graph, &lap, &h)?;
        Ok((lhs, rhs))
    }
}

/// Builds (ω, c) = (Φ, aΦΦ) on the profile window.
pub fn unitarize(s: &SchrodingerData, phi: &HarmonicProfile) -> Result<UnitarizedLaplacian> {
    if let Some((x, v)) = phi.values.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::Domain(format!("Φ({x}) = {v} is not positive")));
    }
    if phi.residual > phi.residual_bound {
        return Err(Error::Domain(format!(
            "Φ residual {:e} exceeds {:e}",
            phi.residual, phi.residual_bound
        )));
    }
    let window = &phi.window;
    let omega: BTreeMap<VertexId, f64> = window.vertices().iter().map(|&x| (x, phi.get(x))).collect();
    let mut conductance = BTreeMap::new();
    let mut builder = FiniteGraph::builder();
    for &x in window.vertices() {
        builder = builder.vertex(x).omega(x, omega[&x]);
        for y in s.neighbors(x)? {
            if x < y && window.contains(y) {
                let c = s.a(x, y)? * omega[&x] * omega[&y];
                conductance.insert((x, y), c);
                builder = builder.edge(x, y, c);
            }
        }
    }
    Ok(UnitarizedLaplacian {
        omega,
        conductance,
        window: window.clone(),
        graph: WeightedGraph::new(builder.build()?),
    })
}
