//! Numerical probes of essential self-adjointness on half-lines: deficiency
//! recurrences, growth witnesses, the Agmon identity and the cutoff sandwich.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_family, FamilyKind, FamilySpec, VertexId};
use crate::metric::{completeness_diagnostic, cutoff, metric_ball, Completeness, MetricContext, DEFAULT_BUDGET};
use crate::operator::{
    apply_schrodinger, form_lower_bound, gauge_to_schrodinger, FiniteSupportFn, FormBound, FormBoundOptions,
    OperatorRef, SchrodingerData,
};

/// Values are stored as mantissa·RESCALE^scale once they grow past RESCALE.
const RESCALE: f64 = 1e250;
const LN_RESCALE: f64 = 575.646_273_248_511_4;

/// A solution of (H − λ)v = 0 on a half-line, from v(n₀) = v0 to v(N).
#[derive(Clone, Debug, Serialize)]
pub struct DeficiencySolution {
    pub start: u64,
    pub lambda: f64,
    pub v0: f64,
    mantissa: Vec<f64>,
    scale: Vec<u32>,
    /// ln Σ_{k≤n} v(k)², −∞ while every term is 0.
    log_partial_l2: Vec<f64>,
    /// Relative residual of the vertex equation at every index but the last.
    pub residuals: Vec<f64>,
    /// Set once values were rescaled to avoid overflow.
    pub rescaled: bool,
    /// Set when the recurrence stopped early on a non-finite value.
    pub truncated: bool,
}

impl DeficiencySolution {
    pub fn len(&self) -> usize {
        self.mantissa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mantissa.is_empty()
    }

    pub fn last_vertex(&self) -> VertexId {
        VertexId(self.start + self.len() as u64 - 1)
    }

    pub fn contains(&self, x: VertexId) -> bool {
        x.0 >= self.start && x.0 < self.start + self.len() as u64
    }

    fn index(&self, x: VertexId) -> Result<usize> {
        if self.contains(x) {
            Ok((x.0 - self.start) as usize)
        } else {
            Err(Error::Domain(format!("{x} lies outside the solution horizon")))
        }
    }

    /// v(x); infinite once the true value exceeds the f64 range.
    pub fn value(&self, x: VertexId) -> Result<f64> {
        let i = self.index(x)?;
        Ok(self.mantissa[i] * RESCALE.powi(self.scale[i] as i32))
    }

    /// ln |v(x)|.
    pub fn ln_abs(&self, x: VertexId) -> Result<f64> {
        let i = self.index(x)?;
        Ok(self.mantissa[i].abs().ln() + self.scale[i] as f64 * LN_RESCALE)
    }

    /// All values as plain reals, when no rescaling happened.
    pub fn values(&self) -> Option<Vec<f64>> {
        (!self.rescaled).then(|| self.mantissa.clone())
    }

    /// Σ_{k≤x} v(k)², possibly infinite.
    pub fn partial_l2(&self, x: VertexId) -> Result<f64> {
        Ok(self.log_partial_l2(x)?.exp())
    }

    pub fn log_partial_l2(&self, x: VertexId) -> Result<f64> {
        Ok(self.log_partial_l2[self.index(x)?])
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    fn sign(&self, i: usize) -> f64 {
        if self.mantissa[i] > 0.0 {
            1.0
        } else if self.mantissa[i] < 0.0 {
            -1.0
        } else {
            0.0
        }
    }

    /// Compares σ·v(i) with σ·v(j) across rescaling frames.
    fn cmp_signed(&self, i: usize, j: usize, sigma: f64) -> Ordering {
        let (a, b) = (sigma * self.mantissa[i], sigma * self.mantissa[j]);
        if self.scale[i] == self.scale[j] {
            return a.total_cmp(&b);
        }
        let (si, sj) = (a.signum() * (a != 0.0) as i32 as f64, b.signum() * (b != 0.0) as i32 as f64);
        if si != sj {
            return si.total_cmp(&sj);
        }
        let li = a.abs().ln() + self.scale[i] as f64 * LN_RESCALE;
        let lj = b.abs().ln() + self.scale[j] as f64 * LN_RESCALE;
        if si >= 0.0 {
            li.total_cmp(&lj)
        } else {
            lj.total_cmp(&li)
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn ray_start(s: &SchrodingerData) -> Result<u64> {
    s.graph()
        .ray_start()
        .map(|x| x.0)
        .ok_or_else(|| Error::Unsupported("deficiency recurrences need a half-line".into()))
}

/// Solves (H − λ)v = 0 on the half-line from v(n₀) = v0 up to v(`last`),
/// using the endpoint equation for v(n₀+1) and the three-term recurrence after.
pub fn deficiency_recurrence(s: &SchrodingerData, v0: f64, last: u64, lambda: f64) -> Result<DeficiencySolution> {
    let start = ray_start(s)?;
    if last <= start {
        return Err(Error::Domain(format!("horizon {last} must exceed the start vertex {start}")));
    }
    if !v0.is_finite() {
        return Err(Error::Domain("v0 must be finite".into()));
    }
    let cap = (last - start + 1) as usize;
    let mut mantissa = Vec::with_capacity(cap);
    let mut scale = Vec::with_capacity(cap);
    let mut residuals = Vec::with_capacity(cap);
    let mut rescaled = false;
    let mut truncated = false;

    let mut frame = 0u32;
    let (mut prev, mut cur) = (0.0, v0);
    mantissa.push(v0);
    scale.push(0);
    let mut a_prev = 0.0;
    for n in start..last {
        if cur.abs() > RESCALE {
            prev /= RESCALE;
            cur /= RESCALE;
            frame += 1;
            rescaled = true;
        }
        let x = VertexId(n);
        let a_next = s.a(x, VertexId(n + 1))?;
        let shifted = s.w(x)? - lambda;
        let flux_in = if n == start { 0.0 } else { a_prev * (cur - prev) };
        let next = cur + (flux_in + shifted * cur) / a_next;
        if !next.is_finite() {
            truncated = true;
            break;
        }
        let lhs = flux_in + a_next * (cur - next) + shifted * cur;
        let size = a_prev * (cur.abs() + prev.abs()) * (n != start) as u8 as f64
            + a_next * (cur.abs() + next.abs())
            + shifted.abs() * cur.abs();
        residuals.push(if size == 0.0 { 0.0 } else { lhs.abs() / size });
        mantissa.push(next);
        scale.push(frame);
        prev = cur;
        cur = next;
        a_prev = a_next;
    }

    let mut log_partial_l2 = Vec::with_capacity(mantissa.len());
    let mut acc = f64::NEG_INFINITY;
    for (m, e) in mantissa.iter().zip(&scale) {
        if *m != 0.0 {
            acc = log_add(acc, 2.0 * (m.abs().ln() + *e as f64 * LN_RESCALE));
        }
        log_partial_l2.push(acc);
    }
    Ok(DeficiencySolution {
        start,
        lambda,
        v0,
        mantissa,
        scale,
        log_partial_l2,
        residuals,
        rescaled,
        truncated,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum L2Class {
    /// No ℓ² solution in this one-parameter family: consistent with ESA.
    L2Divergent,
    /// Bounded within the horizon; advisory only.
    L2Bounded,
    Undetermined,
}

impl std::fmt::Display for L2Class {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            L2Class::L2Divergent => "l2-divergent",
            L2Class::L2Bounded => "l2-bounded",
            L2Class::Undetermined => "undetermined",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub class: L2Class,
    pub log_partial_l2: f64,
    pub log_threshold: f64,
    /// v² nondecreasing over the last tenth of the horizon.
    pub tail_nondecreasing: bool,
    /// Mean ratio v(k+1)²/v(k)² over the tail.
    pub tail_ratio: f64,
    /// Fitted p in v(k)² ≈ C k^{−p} over the tail.
    pub tail_exponent: f64,
}

/// Threshold factor on v0² for the divergence verdict.
pub const L2_THRESHOLD: f64 = 1e12;
const RATIO_MARGIN: f64 = 0.05;
const EXPONENT_MARGIN: f64 = 0.25;

/// Classifies the growth of Σ v² along the horizon.
pub fn classify_l2(sol: &DeficiencySolution) -> Classification {
    let n = sol.len();
    let final_log = sol.log_partial_l2.last().copied().unwrap_or(f64::NEG_INFINITY);
    let reference = sol.mantissa.iter().zip(&sol.scale).find(|(m, _)| **m != 0.0);
    let undetermined = |log_threshold| Classification {
        class: L2Class::Undetermined,
        log_partial_l2: final_log,
        log_threshold,
        tail_nondecreasing: false,
        tail_ratio: f64::NAN,
        tail_exponent: f64::NAN,
    };
    let Some((m, e)) = reference else {
        return undetermined(f64::INFINITY);
    };
    let log_threshold = L2_THRESHOLD.ln() + 2.0 * (m.abs().ln() + *e as f64 * LN_RESCALE);
    if n < 50 {
        return undetermined(log_threshold);
    }

    let tail_len = (n / 10).max(10);
    let from = n - tail_len;
    let log_sq: Vec<f64> = (from..n)
        .map(|i| 2.0 * (sol.mantissa[i].abs().ln() + sol.scale[i] as f64 * LN_RESCALE))
        .collect();
    let tail_nondecreasing = log_sq.windows(2).all(|w| w[1] >= w[0]);
    let steps: Vec<f64> = log_sq.windows(2).map(|w| w[1] - w[0]).filter(|d| d.is_finite()).collect();
    let tail_ratio = if steps.is_empty() {
        f64::NAN
    } else {
        (steps.iter().sum::<f64>() / steps.len() as f64).exp()
    };
    let points: Vec<(f64, f64)> = (from..n)
        .zip(&log_sq)
        .filter(|(_, l)| l.is_finite())
        .map(|(i, &l)| (((sol.start + i as u64) as f64).ln(), l))
        .collect();
    let tail_exponent = if points.len() >= 2 {
        let m = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
        let my = points.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        -sxy / sxx
    } else {
        f64::NAN
    };

    let class = if final_log > log_threshold && tail_nondecreasing {
        L2Class::L2Divergent
    } else if tail_ratio <= 1.0 - RATIO_MARGIN || tail_exponent > 1.0 + EXPONENT_MARGIN {
        L2Class::L2Bounded
    } else {
        L2Class::Undetermined
    };
    Classification {
        class,
        log_partial_l2: final_log,
        log_threshold,
        tail_nondecreasing,
        tail_ratio,
        tail_exponent,
    }
}

/// Greedy chain of vertices along which ±v strictly increases.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthWitness {
    /// +1 when v itself increases, −1 when −v does.
    pub sign: f64,
    pub indices: Vec<VertexId>,
}

/// From the first vertex where v ≠ 0, repeatedly steps to the neighbor
/// maximizing ±v. Needs W − λ > 0 along the chain, which makes some
/// neighbor strictly larger at every step.
pub fn growth_witness(s: &SchrodingerData, sol: &DeficiencySolution) -> Result<GrowthWitness> {
    let Some(first) = (0..sol.len()).find(|&i| sol.mantissa[i] != 0.0) else {
        return Err(Error::Domain("the zero solution has no growth witness".into()));
    };
    let sigma = sol.sign(first);
    let last = sol.len() - 1;
    let mut indices = vec![VertexId(sol.start + first as u64)];
    let mut i = first;
    while i < last {
        let x = VertexId(sol.start + i as u64);
        let shifted = s.w(x)? - sol.lambda;
        if !(shifted > 0.0) {
            return Err(Error::Precondition(format!(
                "W({x}) − λ = {shifted:e} is not positive"
            )));
        }
        let mut best: Option<usize> = None;
        for y in s.neighbors(x)? {
            if !sol.contains(y) {
                continue;
            }
            let j = (y.0 - sol.start) as usize;
            if best.is_none_or(|b| sol.cmp_signed(j, b, sigma) == Ordering::Greater) {
                best = Some(j);
            }
        }
        let j = best.ok_or_else(|| Error::Internal(format!("{x} has no neighbor in the horizon")))?;
        if sol.cmp_signed(j, i, sigma) != Ordering::Greater {
            return Err(Error::Violation(format!(
                "no neighbor of {x} increases the solution"
            )));
        }
        indices.push(VertexId(sol.start + j as u64));
        i = j;
    }
    Ok(GrowthWitness { sign: sigma, indices })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgmonCheck {
    /// ⟨fv, (H − λ)(fv)⟩.
    pub inner_product: f64,
    /// Σ_{{x,y}∈E} a v(x)v(y)(f(x) − f(y))².
    pub edge_sum: f64,
    /// ½ Σ_x v(x) Σ_{y∼x} a v(y)(f(x) − f(y))².
    pub vertex_sum: f64,
    /// Largest pairwise difference over the largest magnitude.
    pub relative_gap: f64,
}

fn vertices_near(s: &SchrodingerData, f: &FiniteSupportFn) -> Result<BTreeSet<VertexId>> {
    let mut out = BTreeSet::new();
    for x in f.support() {
        out.insert(x);
        out.extend(s.neighbors(x)?);
    }
    Ok(out)
}

/// Evaluates the three forms of the Agmon identity for f with finite support.
pub fn agmon_identity_check(
    s: &SchrodingerData,
    sol: &DeficiencySolution,
    f: &FiniteSupportFn,
) -> Result<AgmonCheck> {
    let lambda = sol.lambda;
    let near = vertices_near(s, f)?;
    let mut v = FiniteSupportFn::new();
    for &x in &near {
        let i = sol.index(x).map_err(|_| {
            Error::Precondition(format!("{x} lies outside the horizon of the solution"))
        })?;
        if i + 1 >= sol.len() {
            return Err(Error::Precondition(format!(
                "the equation is not enforced at the horizon vertex {x}"
            )));
        }
        if sol.scale[i] != 0 {
            return Err(Error::Precondition(format!("v was rescaled at {x}")));
        }
        if sol.residuals[i] > 1e-10 {
            return Err(Error::Precondition(format!(
                "v has residual {:e} at {x}",
                sol.residuals[i]
            )));
        }
        v.set(x, sol.mantissa[i]);
    }
    // one more ring so that (H − λ)(fv) sees v at every neighbor
    let fv: FiniteSupportFn = f.iter().map(|(x, fx)| (x, fx * v.get(x))).collect();

    let mut inner_product = 0.0;
    for (x, fvx) in fv.iter() {
        inner_product += fvx * (apply_schrodinger(s, &fv, x)? - lambda * fvx);
    }
    let mut edge_sum = 0.0;
    let mut vertex_sum = 0.0;
    for &x in &near {
        for y in s.neighbors(x)? {
            let d = f.get(x) - f.get(y);
            if d == 0.0 {
                continue;
            }
            let term = s.a(x, y)? * v.get(x) * v.get(y) * d * d;
            vertex_sum += term;
            if x < y {
                edge_sum += term;
            }
        }
    }
    vertex_sum *= 0.5;
    let values = [inner_product, edge_sum, vertex_sum];
    let magnitude = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let spread = values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().copied().fold(f64::INFINITY, f64::min);
    let relative_gap = if magnitude == 0.0 { 0.0 } else { spread / magnitude };
    Ok(AgmonCheck {
        inner_product,
        edge_sum,
        vertex_sum,
        relative_gap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichCertificate {
    pub radius: f64,
    pub lambda: f64,
    pub k: f64,
    /// Σ_{B_R} v².
    pub ball_mass: f64,
    /// ⟨fv, (H − λ)(fv)⟩ with f the cutoff.
    pub form: f64,
    /// (N/2) Σ v² over vertices with a neighbor of different cutoff value.
    pub layer_bound: f64,
    /// (N/2) Σ_{B_{R+1}∖B_R} v², reported only.
    pub shell_bound: f64,
    pub lower_holds: bool,
    pub layer_holds: bool,
    pub shell_holds: bool,
}

impl SandwichCertificate {
    /// Both asserted inequalities.
    pub fn holds(&self) -> bool {
        self.lower_holds && self.layer_holds
    }
}

/// Relative slack on the asserted inequalities, for rounding in the form.
const SANDWICH_SLACK: f64 = 1e-9;

/// Σ_{B_R} v² ≤ ⟨fv,(H−λ)fv⟩ ≤ (N/2) Σ_layer v² for the cutoff f of radius R.
#[allow(clippy::too_many_arguments)]
pub fn sandwich_check(
    s: &SchrodingerData,
    sol: &DeficiencySolution,
    ctx: &MetricContext,
    x0: VertexId,
    radius: f64,
    k: &FormBound,
    valence: usize,
    budget: usize,
) -> Result<SandwichCertificate> {
    let lambda = sol.lambda;
    if !(lambda < k.k - 1.0) {
        return Err(Error::Precondition(format!("λ = {lambda} is not below k − 1 = {}", k.k - 1.0)));
    }
    let outer = metric_ball(ctx, x0, radius + 1.0, budget)?;
    if !k.covers(&outer) {
        return Err(Error::Precondition("the form bound does not cover B_{R+1}".into()));
    }
    let inner = metric_ball(ctx, x0, radius, budget)?;
    let f = cutoff(ctx, x0, radius, budget)?;
    let form = agmon_identity_check(s, sol, &f)?.inner_product;

    let sq = |x: VertexId| -> Result<f64> {
        let v = sol.value(x)?;
        Ok(v * v)
    };
    let mut ball_mass = 0.0;
    for &x in inner.vertices() {
        ball_mass += sq(x)?;
    }
    let mut shell = 0.0;
    for &x in outer.vertices() {
        if !inner.contains(x) {
            shell += sq(x)?;
        }
    }
    let mut layer = 0.0;
    for x in vertices_near(s, &f)? {
        let mut differs = false;
        for y in s.neighbors(x)? {
            differs |= f.get(x) != f.get(y);
        }
        if differs {
            layer += sq(x)?;
        }
    }
    let half_n = valence as f64 / 2.0;
    let layer_bound = half_n * layer;
    let shell_bound = half_n * shell;
    let slack = SANDWICH_SLACK * form.abs().max(ball_mass);
    Ok(SandwichCertificate {
        radius,
        lambda,
        k: k.k,
        ball_mass,
        form,
        layer_bound,
        shell_bound,
        lower_holds: ball_mass <= form + slack,
        layer_holds: form <= layer_bound + slack,
        shell_holds: form <= shell_bound + slack,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeMode {
    /// Δ_{ω,c} through its gauge transform, at λ = −1.
    Laplacian,
    /// Δ_{1,a} + W shifted so that W − λ ≥ 1, or λ = k − 2 when W is unbounded below.
    SchrodingerWithShift,
}

impl std::str::FromStr for ProbeMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "laplacian" => Ok(ProbeMode::Laplacian),
            "schrodinger-with-shift" | "schrodinger" => Ok(ProbeMode::SchrodingerWithShift),
            other => Err(format!("unknown probe mode `{other}`")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeOptions {
    pub v0: f64,
    /// First horizon tried; grown eightfold while the verdict is undetermined.
    pub initial_terms: u64,
    pub max_terms: u64,
    /// Sandwich radii; by default the integers 3..=10 that fit the horizon,
    /// else 0.5, 1 and 1.5.
    pub sandwich_radii: Option<Vec<f64>>,
    pub form: FormBoundOptions,
    pub budget: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            v0: 1.0,
            initial_terms: 2_000,
            max_terms: 1_000_000,
            sandwich_radii: None,
            form: FormBoundOptions::default(),
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessSummary {
    pub length: usize,
    pub first: VertexId,
    pub last: VertexId,
    pub head: Vec<VertexId>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub family: FamilySpec,
    pub mode: ProbeMode,
    pub lambda: f64,
    pub horizon: VertexId,
    pub classification: Classification,
    pub max_residual: f64,
    /// A lower bound κ for W when one exists.
    pub potential_lower_bound: Option<f64>,
    pub growth_witness: Option<WitnessSummary>,
    pub completeness: Completeness,
    pub sandwich: Vec<SandwichCertificate>,
    pub notes: Vec<String>,
}

/// A lower bound for W on the family, or None when W is unbounded below.
fn potential_lower_bound(spec: &FamilySpec, s: &SchrodingerData, horizon: u64) -> Result<Option<f64>> {
    let start = spec.start;
    let step = ((horizon - start) / 4000).max(1);
    let mut samples = Vec::new();
    let mut n = start;
    while n <= horizon {
        samples.push(s.w(VertexId(n))?);
        n += step;
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    match spec.kind {
        FamilyKind::HalfLinePower => {
            // W_n ~ −α(α+q−1) n^{2α+q−2}
            let q = spec.conductance_exponent();
            let coefficient = spec.alpha * (spec.alpha + q - 1.0);
            let exponent = 2.0 * spec.alpha + q - 2.0;
            if coefficient > 0.0 && exponent > 0.0 {
                return Ok(None);
            }
            if coefficient != 0.0 || spec.alpha == 0.0 {
                return Ok(Some(min));
            }
        }
        FamilyKind::HalfLineTable => return Ok(Some(min)),
        _ => {}
    }
    // no closed form: accept the sampled minimum only if W stopped decreasing
    let half = samples.len() / 2;
    let early = samples[..half].iter().copied().fold(f64::INFINITY, f64::min);
    let late = samples[half..].iter().copied().fold(f64::INFINITY, f64::min);
    Ok((late >= early).then_some(min))
}

/// Runs the deficiency recurrence on a half-line family and collects the
/// evidence for or against essential self-adjointness.
pub fn esa_probe(spec: &FamilySpec, mode: ProbeMode, opts: &ProbeOptions) -> Result<ProbeReport> {
    if !spec.is_half_line() {
        return Err(Error::Unsupported(format!("ESA probes need a half-line, not `{}`", spec.kind.name())));
    }
    let g = build_family(spec)?;
    let s = gauge_to_schrodinger(&g);
    let start = spec.start;
    let x0 = VertexId(start);
    let mut notes = Vec::new();

    let kappa = potential_lower_bound(spec, &s, start + opts.max_terms.min(100_000))?;
    let lambda = match (mode, kappa) {
        (ProbeMode::Laplacian, _) => -1.0,
        (ProbeMode::SchrodingerWithShift, Some(kappa)) => {
            notes.push(format!("W ≥ {kappa:e} on the sampled range; λ = κ − 1"));
            kappa - 1.0
        }
        (ProbeMode::SchrodingerWithShift, None) => {
            notes.push("W is unbounded below; λ = k − 2 with the gauge form bound k = 0".into());
            -2.0
        }
    };

    let mut terms = opts.initial_terms.min(opts.max_terms).max(60);
    let (sol, classification) = loop {
        let sol = deficiency_recurrence(&s, opts.v0, start + terms, lambda)?;
        let c = classify_l2(&sol);
        if c.class != L2Class::Undetermined || terms >= opts.max_terms || sol.truncated {
            break (sol, c);
        }
        terms = (terms * 8).min(opts.max_terms);
    };
    if sol.truncated {
        notes.push("recurrence stopped early on a non-finite value".into());
    }
    if classification.class == L2Class::L2Bounded {
        notes.push("v stays bounded in ℓ² within the horizon; this is advisory, not a proof".into());
    }

    let growth_witness = if spec.has_constant_omega() && mode == ProbeMode::Laplacian {
        let w = growth_witness(&s, &sol)?;
        Some(WitnessSummary {
            length: w.indices.len(),
            first: w.indices[0],
            last: *w.indices.last().expect("nonempty chain"),
            head: w.indices.iter().copied().take(16).collect(),
        })
    } else {
        None
    };

    let completeness = completeness_diagnostic(spec, start + 20_000)?.verdict;
    let sandwich = if completeness == Completeness::Complete {
        sandwich_certificates(spec, &s, x0, opts, &mut notes)?
    } else {
        Vec::new()
    };

    Ok(ProbeReport {
        family: spec.clone(),
        mode,
        lambda,
        horizon: sol.last_vertex(),
        max_residual: sol.max_residual(),
        classification,
        potential_lower_bound: kappa,
        growth_witness,
        completeness,
        sandwich,
        notes,
    })
}

fn sandwich_certificates(
    spec: &FamilySpec,
    s: &SchrodingerData,
    x0: VertexId,
    opts: &ProbeOptions,
    notes: &mut Vec<String>,
) -> Result<Vec<SandwichCertificate>> {
    let ctx = MetricContext::new(s.clone());
    let start = spec.start;
    let limit = start + opts.max_terms;
    // δ_a(x₀, n) along the ray
    let mut reach = Vec::new();
    let mut d = 0.0;
    for n in start..limit {
        reach.push(d);
        d += ctx.edge_length(VertexId(n), VertexId(n + 1))?;
    }
    let fits = |r: f64| reach.last().is_some_and(|&far| far > r + 1.0);
    let radii: Vec<f64> = match &opts.sandwich_radii {
        Some(r) => r.iter().copied().filter(|&r| fits(r)).collect(),
        None => {
            let wide: Vec<f64> = (3..=10).map(f64::from).filter(|&r| fits(r)).collect();
            if wide.is_empty() {
                notes.push("balls of radius 3 and more exceed the horizon; sandwich radii 0.5, 1, 1.5".into());
                [0.5, 1.0, 1.5].into_iter().filter(|&r| fits(r)).collect()
            } else {
                wide
            }
        }
    };
    let Some(r_max) = radii.iter().copied().reduce(f64::max) else {
        notes.push("no sandwich radius fits the horizon".into());
        return Ok(Vec::new());
    };
    let far = start + reach.iter().position(|&d| d > r_max + 1.0).expect("radius fits") as u64;

    let outer = metric_ball(&ctx, x0, r_max + 1.0, opts.budget)?;
    let bound = if outer.len() <= opts.form.dense_cap {
        let b = form_lower_bound(OperatorRef::Schrodinger(s), &outer, opts.form)?;
        FormBound { k: b.k.max(0.0), ..b }
    } else {
        FormBound::gauge_nonnegative()
    };
    let sol = deficiency_recurrence(s, opts.v0, far + 2, bound.k - 2.0)?;
    let valence = s.graph().valence_hint().unwrap_or(2);
    radii
        .into_iter()
        .map(|r| sandwich_check(s, &sol, &ctx, x0, r, &bound, valence, opts.budget))
        .collect()
}
