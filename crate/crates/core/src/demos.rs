//! Worked examples on half-line families. Each pipeline records named checks
//! so the command line and the test suite assert the same facts.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::dirichlet::row_scale;
use crate::error::Result;
use crate::esa::{esa_probe, L2Class, ProbeMode, ProbeOptions};
use crate::graph::{build_family, combinatorial_ball, FamilySpec, VertexId};
use crate::metric::{completeness_diagnostic, Completeness};
use crate::operator::{form_lower_bound, gauge_to_schrodinger, FormBoundOptions, OperatorRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    /// ω_n = 1/n, c_{n,n+1} = (n+1)²: W(n) = −n(2n+1).
    WojciechowskiWeights,
    /// ω_n = 1/(n ln n), c ≡ 1: complete metric, W unbounded below.
    LogWeights,
    /// ω_n = n^{−α}, c_n = n^{−β}: complete iff α − β/2 ≤ 1.
    PowerWeights,
    /// a_n = n^{2+ε}: incomplete metric, yet essentially self-adjoint.
    IncompleteMetric,
}

impl Example {
    pub const ALL: [Example; 4] = [
        Example::WojciechowskiWeights,
        Example::LogWeights,
        Example::PowerWeights,
        Example::IncompleteMetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Example::WojciechowskiWeights => "wojciechowski-weights",
            Example::LogWeights => "log-weights",
            Example::PowerWeights => "power-weights",
            Example::IncompleteMetric => "incomplete-metric",
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Example {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Example::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown example `{s}`"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub example: Example,
    pub version: String,
    pub inputs: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    /// Observations that are reported but not asserted.
    pub notes: Vec<String>,
    pub wall_time_ms: f64,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Recorder {
    checks: Vec<Check>,
    notes: Vec<String>,
    inputs: BTreeMap<String, String>,
    tolerances: BTreeMap<String, f64>,
}

impl Recorder {
    fn new() -> Self {
        Recorder {
            checks: Vec::new(),
            notes: Vec::new(),
            inputs: BTreeMap::new(),
            tolerances: BTreeMap::new(),
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    fn input(&mut self, key: &str, value: impl fmt::Display) {
        self.inputs.insert(key.into(), value.to_string());
    }

    fn tolerance(&mut self, key: &str, value: f64) -> f64 {
        self.tolerances.insert(key.into(), value);
        value
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

fn shown<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "n/a".into(), |v| v.to_string())
}

/// −n(2n+1), the potential of the ω = 1/n, c = (n+1)² family away from n = 1.
pub fn wojciechowski_potential(n: u64) -> f64 {
    let n = n as f64;
    -n * (2.0 * n + 1.0)
}

/// 2n²ln²n − n ln n[(n+1)ln(n+1) + (n−1)ln(n−1)], rearranged as
/// −n ln n[(n+1)ln(1+1/n) + (n−1)ln(1−1/n)] to avoid cancellation.
pub fn log_potential_closed_form(n: u64) -> f64 {
    let x = n as f64;
    let inv = 1.0 / x;
    -x * x.ln() * ((x + 1.0) * inv.ln_1p() + (x - 1.0) * (-inv).ln_1p())
}

/// Leading term −α(α−β−1)n^{2α−β−2} of the power-family potential.
pub fn power_potential_leading(alpha: f64, beta: f64, n: u64) -> f64 {
    -alpha * (alpha - beta - 1.0) * (n as f64).powf(2.0 * alpha - beta - 2.0)
}

/// Runs one example pipeline.
pub fn run_example(example: Example) -> Result<RunRecord> {
    let started = Instant::now();
    let mut rec = Recorder::new();
    match example {
        Example::WojciechowskiWeights => wojciechowski(&mut rec)?,
        Example::LogWeights => log_weights(&mut rec)?,
        Example::PowerWeights => power_weights(&mut rec)?,
        Example::IncompleteMetric => incomplete_metric(&mut rec)?,
    }
    Ok(RunRecord {
        example,
        version: env!("CARGO_PKG_VERSION").into(),
        inputs: rec.inputs,
        tolerances: rec.tolerances,
        checks: rec.checks,
        notes: rec.notes,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

fn probe_not_bounded(rec: &mut Recorder, name: &str, spec: &FamilySpec, mode: ProbeMode) -> Result<()> {
    let report = esa_probe(spec, mode, &ProbeOptions::default())?;
    let class = report.classification.class;
    rec.check(
        name,
        class != L2Class::L2Bounded,
        format!("classification {class} at λ = {} up to {}", report.lambda, report.horizon),
    );
    if !report.sandwich.is_empty() {
        let all = report.sandwich.iter().all(|c| c.holds());
        let radii: Vec<f64> = report.sandwich.iter().map(|c| c.radius).collect();
        rec.check(&format!("{name}-sandwich"), all, format!("radii {radii:?}"));
    }
    Ok(())
}

fn wojciechowski(rec: &mut Recorder) -> Result<()> {
    let spec = FamilySpec::power(1.0, -2.0);
    rec.input("family", "half-line-power alpha=1 beta=-2");
    let tol = rec.tolerance("closed-form-relative", 1e-9);
    let s = gauge_to_schrodinger(&build_family(&spec)?);

    let mut worst = (0, 0.0);
    for n in 2..=10_000u64 {
        let e = rel_err(s.w(VertexId(n))?, wojciechowski_potential(n));
        if e > worst.1 {
            worst = (n, e);
        }
    }
    rec.check(
        "potential-closed-form",
        worst.1 <= tol,
        format!("max relative error {:e} over 2..=10000", worst.1),
    );
    let w5 = s.w(VertexId(5))?;
    rec.check("potential-at-5", rel_err(w5, -55.0) <= 1e-12, format!("W(5) = {w5}"));
    // only one neighbor at the endpoint: W(1) = c_{1,2}(1 − 2) = −4
    let w1 = s.w(VertexId(1))?;
    rec.check("potential-endpoint", rel_err(w1, -4.0) <= 1e-12, format!("W(1) = {w1}"));
    let negative = (1..=10_000u64).map(|n| s.w(VertexId(n))).collect::<Result<Vec<f64>>>()?;
    rec.check(
        "potential-negative",
        negative.iter().all(|&w| w < 0.0),
        format!("max W over 1..=10000 is {}", negative.iter().copied().fold(f64::MIN, f64::max)),
    );
    let ball = combinatorial_ball(s.graph(), VertexId(1), 40)?;
    let k = form_lower_bound(OperatorRef::Schrodinger(&s), &ball, FormBoundOptions::default())?.k;
    let scale = row_scale(&s, ball.vertices())?;
    rec.check(
        "form-nonnegative",
        k >= -1e-12 * scale,
        format!("smallest eigenvalue {k:e} on the ball of radius 40 (row scale {scale:e})"),
    );
    let report = esa_probe(&spec, ProbeMode::Laplacian, &ProbeOptions::default())?;
    rec.notes.push(format!(
        "deficiency probe at λ = −1: {} up to {} (metric {})",
        report.classification.class, report.horizon, report.completeness
    ));
    Ok(())
}

fn log_weights(rec: &mut Recorder) -> Result<()> {
    let spec = FamilySpec::log();
    rec.input("family", "half-line-log start=2");
    let tol = rec.tolerance("closed-form-relative", 1e-9);
    let asym = rec.tolerance("asymptotic-relative-at-100", 0.25);
    let s = gauge_to_schrodinger(&build_family(&spec)?);

    let report = completeness_diagnostic(&spec, 100_000)?;
    rec.check(
        "metric-complete",
        report.verdict == Completeness::Complete && report.numeric.verdict == Completeness::Complete,
        format!(
            "closed form {}, numeric {}, δ_a(2, 10^5) = {}",
            shown(report.closed_form),
            report.numeric.verdict,
            report.partial_sums.last().map_or(0.0, |p| p.1)
        ),
    );

    let mut worst = (0, 0.0);
    for n in 3..=10_000u64 {
        let e = rel_err(s.w(VertexId(n))?, log_potential_closed_form(n));
        if e > worst.1 {
            worst = (n, e);
        }
    }
    rec.check(
        "potential-closed-form",
        worst.1 <= tol,
        format!("max relative error {:e} at n = {} over 3..=10000", worst.1, worst.0),
    );
    // the printed expression counts a neighbor n − 1 = 1 that is not a vertex
    let w2 = s.w(VertexId(2))?;
    let l2 = 2f64.ln();
    let endpoint = 2.0 * l2 * (2.0 * l2 - 3.0 * 3f64.ln());
    rec.check(
        "potential-endpoint",
        rel_err(w2, endpoint) <= tol,
        format!("W(2) = {w2}, one-neighbor sum {endpoint}, printed expression {}", log_potential_closed_form(2)),
    );

    let ratio = |n: u64| -> Result<f64> { Ok(s.w(VertexId(n))? / (n as f64).ln()) };
    let (r2, r4) = (ratio(100)?, ratio(10_000)?);
    rec.check(
        "potential-over-log",
        (r2 + 1.0).abs() <= asym && (r4 + 1.0).abs() < (r2 + 1.0).abs(),
        format!("W(n)/ln n = {r2} at n = 100, {r4} at n = 10^4"),
    );
    let unbounded = [10u64, 100, 1_000, 10_000, 100_000]
        .windows(2)
        .map(|w| Ok(s.w(VertexId(w[1]))? < s.w(VertexId(w[0]))?))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);
    rec.check(
        "potential-unbounded-below",
        unbounded,
        format!("W(10^5) = {}", s.w(VertexId(100_000))?),
    );
    probe_not_bounded(rec, "esa-probe", &spec, ProbeMode::SchrodingerWithShift)
}

fn power_weights(rec: &mut Recorder) -> Result<()> {
    rec.input("complete", "alpha=1 beta=0");
    rec.input("incomplete", "alpha=3 beta=0");
    let tail = rec.tolerance("asymptotic-relative-at-10000", 1e-2);
    for (alpha, beta, want) in [(1.0, 0.0, Completeness::Complete), (3.0, 0.0, Completeness::Incomplete)] {
        let r = completeness_diagnostic(&FamilySpec::power(alpha, beta), 20_000)?;
        rec.check(
            &format!("metric-alpha{alpha}-beta{beta}"),
            r.verdict == want && r.numeric.verdict == want,
            format!(
                "closed form {} (p = {}), numeric {} (fitted p = {})",
                shown(r.closed_form),
                shown(r.closed_form_exponent),
                r.numeric.verdict,
                r.numeric.fitted_exponent
            ),
        );
    }
    for (alpha, beta) in [(2.0, 0.0), (3.0, 1.0)] {
        let s = gauge_to_schrodinger(&build_family(&FamilySpec::power(alpha, beta))?);
        let gap = |n: u64| -> Result<f64> {
            Ok((s.w(VertexId(n))? / power_potential_leading(alpha, beta, n) - 1.0).abs())
        };
        let (g2, g4) = (gap(100)?, gap(10_000)?);
        rec.check(
            &format!("potential-asymptotics-alpha{alpha}-beta{beta}"),
            g4 <= g2 && g4 <= tail,
            format!("|ratio − 1| = {g2:e} at n = 100, {g4:e} at n = 10^4"),
        );
    }
    probe_not_bounded(rec, "esa-probe-alpha1-beta0", &FamilySpec::power(1.0, 0.0), ProbeMode::SchrodingerWithShift)
}

fn incomplete_metric(rec: &mut Recorder) -> Result<()> {
    // ω ≡ 1 and c_{n,n+1} = (n+1)^3, so a_n ~ n^{2+ε} with ε = 1
    let spec = FamilySpec::power(0.0, -2.0).with_epsilon(1.0);
    rec.input("family", "half-line-power alpha=0 beta=-2 epsilon=1");
    let r = completeness_diagnostic(&spec, 20_000)?;
    rec.check(
        "metric-incomplete",
        r.verdict == Completeness::Incomplete && r.numeric.verdict == Completeness::Incomplete,
        format!(
            "closed form {}, numeric {}, δ_a(1, 20000) = {}",
            shown(r.closed_form),
            r.numeric.verdict,
            r.partial_sums.last().map_or(0.0, |p| p.1)
        ),
    );
    // a_n = 1/n^{2+ε} as printed gives lengths n^{1+ε/2}, a divergent series
    let printed = completeness_diagnostic(&FamilySpec::power(0.0, 3.0), 20_000)?;
    rec.check(
        "printed-coefficients-complete",
        printed.verdict == Completeness::Complete,
        format!("a_n = n^-3 gives verdict {}", printed.verdict),
    );

    let report = esa_probe(&spec, ProbeMode::Laplacian, &ProbeOptions::default())?;
    rec.check(
        "esa-probe",
        report.classification.class != L2Class::L2Bounded,
        format!("classification {} up to {}", report.classification.class, report.horizon),
    );
    let witness = report.growth_witness.as_ref().map_or(0, |w| w.length);
    rec.check(
        "growth-witness",
        witness >= 100,
        format!("strictly increasing chain of length {witness}"),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_names_round_trip() {
        for e in Example::ALL {
            assert_eq!(e.name().parse::<Example>().unwrap(), e);
        }
        assert!("nope".parse::<Example>().is_err());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(wojciechowski_potential(5), -55.0);
        assert!((log_potential_closed_form(100) - -4.605_246_941_894_802).abs() < 1e-12);
        assert_eq!(power_potential_leading(2.0, 0.0, 10), -200.0);
    }
}
