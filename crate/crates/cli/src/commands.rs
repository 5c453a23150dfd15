use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};
use wgraph_core::demos::{run_example, Example, RunRecord};
use wgraph_core::format::{fmt_real, parse_boundary_data, parse_config, parse_edge_list, parse_vertex_values, CsvTable, GraphConfig};
use wgraph_core::metric::DEFAULT_BUDGET;
use wgraph_core::trials::{random_function, seeded};
use wgraph_core::*;

use crate::*;

type CliResult<T> = std::result::Result<T, CliError>;

/// A resolved graph, with its family parameters when it came from one.
struct Source {
    graph: WeightedGraph,
    spec: Option<FamilySpec>,
}

impl Source {
    /// First vertex: the start of a half-line, the root of the tree, or the
    /// smallest id of a finite graph.
    fn first(&self) -> VertexId {
        match &self.spec {
            Some(spec) if spec.kind == FamilyKind::BinaryTree => vid(1),
            Some(spec) if spec.kind != FamilyKind::FiniteFile => vid(spec.start),
            _ => self
                .graph
                .vertices()
                .and_then(|v| v.first().copied())
                .unwrap_or(vid(0)),
        }
    }

    fn half_line_spec(&self) -> CliResult<&FamilySpec> {
        match &self.spec {
            Some(spec) if spec.is_half_line() => Ok(spec),
            _ => Err(CliError::Domain("this command needs a half-line family".into())),
        }
    }

    /// `--from`/`--to` on a family (20 vertices by default), or every vertex
    /// of a finite graph inside the bounds.
    fn range(&self, range: &RangeArgs) -> CliResult<Vec<VertexId>> {
        if let Some(all) = self.graph.vertices() {
            let lo = range.from.unwrap_or(0);
            let hi = range.to.unwrap_or(u64::MAX);
            return Ok(all.into_iter().filter(|x| (lo..=hi).contains(&x.0)).collect());
        }
        let lo = range.from.unwrap_or(self.first().0);
        let hi = range.to.unwrap_or(lo + 19);
        if hi < lo {
            return Err(CliError::Domain(format!("empty vertex range {lo}..={hi}")));
        }
        let out: Vec<VertexId> = (lo..=hi).map(vid).collect();
        for &x in &out {
            if !self.graph.contains(x) {
                return Err(wgraph_core::Error::UnknownVertex(x).into());
            }
        }
        Ok(out)
    }
}

fn read(path: &std::path::Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn resolve(args: &GraphArgs) -> CliResult<Source> {
    if let Some(path) = &args.graph_file {
        let graph = WeightedGraph::new(parse_edge_list(&read(path)?)?);
        return Ok(Source { graph, spec: None });
    }
    let mut spec = match &args.config {
        Some(path) => match parse_config(&read(path)?)? {
            GraphConfig::Family(spec) => spec,
            GraphConfig::Finite(g) => {
                return Ok(Source {
                    graph: WeightedGraph::new(g),
                    spec: None,
                })
            }
        },
        None => {
            let kind = args.family.ok_or_else(|| {
                CliError::Domain("one of --family, --config or --graph-file is required".into())
            })?;
            FamilySpec::new(kind)
        }
    };
    if let Some(kind) = args.family {
        if kind != spec.kind {
            spec = FamilySpec { kind, ..spec };
        }
    }
    spec.alpha = args.alpha.unwrap_or(spec.alpha);
    spec.beta = args.beta.unwrap_or(spec.beta);
    spec.epsilon = args.epsilon.unwrap_or(spec.epsilon);
    spec.start = args.start.unwrap_or(spec.start);
    let graph = build_family(&spec)?;
    Ok(Source {
        graph,
        spec: Some(spec),
    })
}

fn emit(output: &OutputArgs, csv: impl FnOnce() -> CsvTable, json: impl FnOnce() -> Value) -> CliResult<()> {
    let text = match output.format {
        Format::Csv => csv().render(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json()).expect("JSON values serialize");
            s.push('\n');
            s
        }
    };
    match &output.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// The serialized (kebab-case) name of a unit enum variant.
fn label<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn opt_real(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

pub fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Laplacian(LaplacianCommand::Apply {
            graph,
            function,
            seed,
            range,
            output,
        }) => laplacian_apply(&graph, function.as_deref(), seed, &range, &output),
        Command::Gauge(GaugeCommand::ToSchrodinger { graph, range, output }) => gauge_table(&graph, &range, &output),
        Command::Dirichlet(DirichletCommand::Solve {
            graph,
            operator,
            center,
            radius,
            boundary,
            boundary_value,
            tol,
            harnack,
            output,
        }) => {
            let source = resolve(&graph)?;
            let boundary = match boundary {
                Some(path) => Some(parse_boundary_data(&read(&path)?)?),
                None => None,
            };
            let request = DirichletRequest {
                operator,
                center,
                radius,
                boundary,
                boundary_value,
                tol,
                harnack,
            };
            dirichlet_solve(&source, request, &output)
        }
        Command::Harmonic(HarmonicCommand::Build {
            graph,
            anchor,
            n_max,
            window,
            tol,
            output,
        }) => harmonic_build(&graph, anchor, n_max, window, tol, &output),
        Command::Metric(MetricCommand::Distance {
            graph,
            from,
            to,
            coefficients,
            output,
        }) => {
            let source = resolve(&graph)?;
            let ctx = context(&source, coefficients);
            let d = delta_a(&ctx, vid(from), vid(to), DEFAULT_BUDGET)?;
            match (output.format, &output.out) {
                // a bare number on the terminal
                (Format::Csv, None) => {
                    println!("{d:?}");
                    Ok(())
                }
                _ => emit(
                    &output,
                    || {
                        let mut t = CsvTable::new(&["from", "to", "distance"]);
                        t.push(vec![from.to_string(), to.to_string(), fmt_real(d)]);
                        t
                    },
                    || json!({ "from": from, "to": to, "distance": d }),
                ),
            }
        }
        Command::Metric(MetricCommand::Ball {
            graph,
            center,
            radius,
            coefficients,
            output,
        }) => {
            let source = resolve(&graph)?;
            let ctx = context(&source, coefficients);
            let center = center.map(vid).unwrap_or(source.first());
            let d = metric::distances_within(&ctx, center, radius, DEFAULT_BUDGET)?;
            emit(
                &output,
                || {
                    let mut t = CsvTable::new(&["vertex", "distance"]);
                    for (x, v) in &d {
                        t.push(vec![x.to_string(), fmt_real(*v)]);
                    }
                    t
                },
                || {
                    let rows: Vec<Value> = d.iter().map(|(x, v)| json!({ "vertex": x, "distance": v })).collect();
                    json!({ "center": center, "radius": radius, "vertices": rows })
                },
            )
        }
        Command::Metric(MetricCommand::Completeness { graph, n_max, output }) => {
            let source = resolve(&graph)?;
            let spec = source.half_line_spec()?;
            let report = completeness_diagnostic(spec, spec.start + n_max)?;
            emit(
                &output,
                || {
                    let mut t = CsvTable::new(&[
                        "family",
                        "verdict",
                        "closed_form",
                        "closed_form_exponent",
                        "numeric_verdict",
                        "fitted_exponent",
                        "bertrand_nondecreasing",
                        "probe_limit",
                        "distance_at_limit",
                    ]);
                    let last = report.partial_sums.last().copied().unwrap_or((spec.start, 0.0));
                    t.push(vec![
                        spec.kind.name().into(),
                        label(&report.verdict),
                        report.closed_form.map(|c| label(&c)).unwrap_or_default(),
                        opt_real(report.closed_form_exponent),
                        label(&report.numeric.verdict),
                        fmt_real(report.numeric.fitted_exponent),
                        report.numeric.bertrand_nondecreasing.to_string(),
                        last.0.to_string(),
                        fmt_real(last.1),
                    ]);
                    t
                },
                || serde_json::to_value(&report).expect("report serializes"),
            )
        }
        Command::Esa(EsaCommand::Probe {
            graph,
            mode,
            n_max,
            output,
        }) => esa(&graph, mode, n_max, &output),
        Command::Examples { name, output } => examples(&name, &output),
    }
}

fn context(source: &Source, coefficients: Coefficients) -> MetricContext {
    match coefficients {
        Coefficients::Conductance => MetricContext::conductance(&source.graph),
        Coefficients::Gauge => MetricContext::gauge(&source.graph),
    }
}

fn laplacian_apply(
    graph: &GraphArgs,
    function: Option<&std::path::Path>,
    seed: u64,
    range: &RangeArgs,
    output: &OutputArgs,
) -> CliResult<()> {
    let source = resolve(graph)?;
    let g = &source.graph;
    let f = match function {
        Some(path) => parse_vertex_values(&read(path)?)?,
        None => random_function(&mut seeded(seed), &source.range(range)?),
    };
    let mut points = BTreeSet::new();
    for x in f.support() {
        points.insert(x);
        points.extend(g.neighbors(x)?);
    }
    let mut rows = Vec::new();
    for x in points {
        rows.push((x, f.get(x), apply_laplacian(g, &f, x)?));
    }
    emit(
        output,
        || {
            let mut t = CsvTable::new(&["vertex", "f", "laplacian"]);
            for &(x, fx, lx) in &rows {
                t.push(vec![x.to_string(), fmt_real(fx), fmt_real(lx)]);
            }
            t
        },
        || {
            let rows: Vec<Value> = rows
                .iter()
                .map(|&(x, fx, lx)| json!({ "vertex": x, "f": fx, "laplacian": lx }))
                .collect();
            json!({ "seed": seed, "values": rows })
        },
    )
}

fn gauge_table(graph: &GraphArgs, range: &RangeArgs, output: &OutputArgs) -> CliResult<()> {
    let source = resolve(graph)?;
    let g = &source.graph;
    let s = gauge_to_schrodinger(g);
    let mut rows = Vec::new();
    for x in source.range(range)? {
        rows.push((x, g.omega(x)?, s.w(x)?, s.degree(x)?));
    }
    emit(
        output,
        || {
            let mut t = CsvTable::new(&["vertex", "omega", "w", "a_sum"]);
            for &(x, omega, w, a) in &rows {
                t.push(vec![x.to_string(), fmt_real(omega), fmt_real(w), fmt_real(a)]);
            }
            t
        },
        || {
            let rows: Vec<Value> = rows
                .iter()
                .map(|&(x, omega, w, a)| json!({ "vertex": x, "omega": omega, "w": w, "a_sum": a }))
                .collect();
            json!({ "family": source.spec, "vertices": rows })
        },
    )
}

struct DirichletRequest {
    operator: OperatorKind,
    center: Option<u64>,
    radius: usize,
    boundary: Option<BTreeMap<VertexId, f64>>,
    boundary_value: f64,
    tol: f64,
    harnack: bool,
}

fn dirichlet_solve(source: &Source, req: DirichletRequest, output: &OutputArgs) -> CliResult<()> {
    let s = match req.operator {
        OperatorKind::Laplacian => gauge_to_schrodinger(&source.graph),
        OperatorKind::Combinatorial => SchrodingerData::combinatorial(source.graph.clone()),
    };
    let center = req.center.map(vid).unwrap_or(source.first());
    let region = combinatorial_ball(&source.graph, center, req.radius)?;
    let problem = match req.boundary {
        Some(b) => DirichletProblem::new(s.clone(), region.clone(), b)?,
        None => DirichletProblem::constant_boundary(s.clone(), region.clone(), req.boundary_value)?,
    };
    let opts = DirichletOptions {
        residual_tol: req.tol,
        ..DirichletOptions::default()
    };
    let sol = solve_dirichlet(&problem, &opts)?;

    let mut harnack = None;
    if req.harnack {
        let cert = harnack_constant(&s, &region, EdgeSum::Unordered)?;
        let k0 = cert.k0;
        let verifier = HarnackVerifier::new(&s, &region, &sol.f, cert, req.tol)?;
        let (mut pairs, mut violations) = (0usize, Vec::new());
        for &x in region.interior() {
            for &y in region.interior() {
                if x != y {
                    pairs += 1;
                    let v = verifier.verify(x, y)?;
                    if !v.holds {
                        violations.push((x, y));
                    }
                }
            }
        }
        eprintln!("harnack: k0 = {k0:e}, {pairs} interior pairs, {} violations", violations.len());
        harnack = Some((k0, pairs, violations));
    }

    emit(
        output,
        || {
            let mut t = CsvTable::new(&["vertex", "role", "value"]);
            for (x, v) in sol.f.iter() {
                let role = if region.is_interior(x) { "interior" } else { "boundary" };
                t.push(vec![x.to_string(), role.into(), fmt_real(v)]);
            }
            t
        },
        || {
            let values: Vec<Value> = sol
                .f
                .iter()
                .map(|(x, v)| json!({ "vertex": x, "interior": region.is_interior(x), "value": v }))
                .collect();
            json!({
                "center": center,
                "radius": req.radius,
                "method": sol.method,
                "residual": sol.residual,
                "residual_bound": sol.residual_bound,
                "form_bound": sol.form_bound,
                "harnack": harnack.as_ref().map(|(k0, pairs, v)| json!({ "k0": k0, "pairs": pairs, "violations": v })),
                "values": values,
            })
        },
    )?;
    if let Some((_, _, violations)) = &harnack {
        if let Some((x, y)) = violations.first() {
            return Err(CliError::Verification(format!(
                "Harnack inequality fails for {} pairs, first ({x}, {y})",
                violations.len()
            )));
        }
    }
    Ok(())
}

fn harmonic_build(
    graph: &GraphArgs,
    anchor: Option<u64>,
    n_max: usize,
    window: usize,
    tol: f64,
    output: &OutputArgs,
) -> CliResult<()> {
    let source = resolve(graph)?;
    let s = gauge_to_schrodinger(&source.graph);
    let anchor = anchor.map(vid).unwrap_or(source.first());
    let opts = HarmonicOptions {
        n_max,
        window,
        tol,
        ..HarmonicOptions::default()
    };
    let profile = build_harmonic(&s, anchor, &opts)?;
    let candidate = |c: &Option<FiniteSupportFn>, x: VertexId| c.as_ref().map(|f| fmt_real(f.get(x))).unwrap_or_default();
    emit(
        output,
        || {
            let mut t = CsvTable::new(&["vertex", "phi", "even", "odd"]);
            for (x, v) in profile.values.iter() {
                t.push(vec![
                    x.to_string(),
                    fmt_real(v),
                    candidate(&profile.even_candidate, x),
                    candidate(&profile.odd_candidate, x),
                ]);
            }
            t
        },
        || {
            json!({
                "anchor": profile.anchor,
                "converged": profile.converged,
                "residual": profile.residual,
                "residual_bound": profile.residual_bound,
                "radii": profile.history.len(),
                "values": profile.values,
                "even_candidate": profile.even_candidate,
                "odd_candidate": profile.odd_candidate,
            })
        },
    )?;
    if profile.accepted() {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "no convergence within n_max = {n_max} (residual {:e}); even and odd candidates reported",
            profile.residual
        )))
    }
}

fn esa(graph: &GraphArgs, mode: ProbeMode, n_max: u64, output: &OutputArgs) -> CliResult<()> {
    let source = resolve(graph)?;
    let spec = source.half_line_spec()?;
    let opts = ProbeOptions {
        max_terms: n_max,
        ..ProbeOptions::default()
    };
    let report = esa_probe(spec, mode, &opts)?;
    emit(
        output,
        || {
            let mut t = CsvTable::new(&[
                "family",
                "mode",
                "lambda",
                "horizon",
                "classification",
                "log_partial_l2",
                "max_residual",
                "potential_lower_bound",
                "witness_length",
                "completeness",
                "sandwich_radii",
                "sandwich_holds",
            ]);
            let radii: Vec<String> = report.sandwich.iter().map(|c| c.radius.to_string()).collect();
            t.push(vec![
                spec.kind.name().into(),
                label(&report.mode),
                fmt_real(report.lambda),
                report.horizon.to_string(),
                label(&report.classification.class),
                fmt_real(report.classification.log_partial_l2),
                fmt_real(report.max_residual),
                opt_real(report.potential_lower_bound),
                report.growth_witness.as_ref().map(|w| w.length.to_string()).unwrap_or_default(),
                label(&report.completeness),
                radii.join(";"),
                report.sandwich.iter().all(|c| c.holds()).to_string(),
            ]);
            t
        },
        || serde_json::to_value(&report).expect("report serializes"),
    )?;
    let failed: Vec<String> = report
        .sandwich
        .iter()
        .filter(|c| !c.holds())
        .map(|c| c.radius.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("sandwich inequality fails at R = {}", failed.join(", "))))
    }
}

fn examples(name: &str, output: &OutputArgs) -> CliResult<()> {
    let selected: Vec<Example> = if name == "all" {
        Example::ALL.to_vec()
    } else {
        vec![name.parse().map_err(CliError::Domain)?]
    };
    let records: Vec<RunRecord> = selected.into_iter().map(run_example).collect::<Result<_>>()?;
    emit(
        output,
        || {
            let mut t = CsvTable::new(&["example", "check", "passed", "detail"]);
            for r in &records {
                for c in &r.checks {
                    t.push(vec![r.example.name().into(), c.name.clone(), c.passed.to_string(), c.detail.clone()]);
                }
            }
            t
        },
        || {
            if records.len() == 1 {
                serde_json::to_value(&records[0]).expect("record serializes")
            } else {
                serde_json::to_value(&records).expect("records serialize")
            }
        },
    )?;
    let failed: Vec<String> = records
        .iter()
        .flat_map(|r| r.failures().map(move |c| format!("{}/{}", r.example.name(), c.name)))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(format!("failing checks: {}", failed.join(", "))))
    }
}
