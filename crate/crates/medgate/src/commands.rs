//! Subcommand implementations.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use serde_json::{json, Value};

use medgate_core::dynamics::{
    fit_quadratic_through_origin, robustness_sweep, scan_mediated_gates, scan_windows, scaling_report, Protocol,
    SpinGeometry, Topology,
};
use medgate_core::entanglement::{is_perfect_entangler, makhlin_invariants, max_concurrence, weyl_coordinates};
use medgate_core::synthesis::{
    default_menu, replay_figure, synthesize, synthesize_template, synthesize_w_odd, target_registry, CircuitTemplate,
    DepthPolicy, FigureId, GateLibrary, GateMenu, GateTag, OptimizerConfig, SynthesisReport, SynthesisTarget,
};

use crate::cli::{
    Cli, Command, DeriveArgs, Format, GlobalArgs, ReplayArgs, RobustnessArgs, ScalingArgs, SynthArgs, Table1Args,
    WeylArgs,
};
use crate::error::CliError;
use crate::exec::RayonExecutor;
use crate::io::{self, cell, format_sequence, report_json, write_csv, write_json};
use crate::num::{complex, nums, Num};

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    /// One line for stdout.
    pub summary: String,
    pub files: Vec<PathBuf>,
    /// Set when the outputs were written but the run must still fail.
    pub failure: Option<CliError>,
}

impl Outcome {
    fn ok(summary: String, file: PathBuf) -> Self {
        Self { summary, files: vec![file], failure: None }
    }
}

/// Output of one command, writable as JSON or CSV.
struct Output {
    stem: String,
    json: Value,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::from_str(&serde_json::to_string(x).expect("serializable")).expect("valid JSON")
}

fn emit(g: &GlobalArgs, config: &Value, default: Format, out: Output) -> Result<PathBuf, CliError> {
    let dir = io::resolve_out_dir(g.out.as_deref());
    let format = g.format.unwrap_or(default);
    let path = match format {
        Format::Json => dir.join(format!("{}.json", out.stem)),
        Format::Csv => dir.join(format!("{}.csv", out.stem)),
    };
    match format {
        Format::Json => write_json(&path, config, out.json)?,
        Format::Csv => write_csv(&path, config, &out.header, &out.rows)?,
    }
    Ok(path)
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    if cli.global.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let config = to_value(cli);
    match &cli.command {
        Command::Derive(a) => derive(&cli.global, &config, a),
        Command::Weyl(a) => weyl(&cli.global, &config, a),
        Command::Synth(a) => synth(&cli.global, &config, a),
        Command::Replay(a) => replay(&cli.global, &config, a),
        Command::Table1(a) => table1(&cli.global, &config, a),
        Command::Robustness(a) => robustness(&cli.global, &config, a),
        Command::Scaling(a) => scaling(&cli.global, &config, a),
    }
}

fn geometry(a: &DeriveArgs) -> Result<SpinGeometry, CliError> {
    let base = SpinGeometry::from_name(&a.geometry, a.j)?;
    match a.j_ratio {
        None => Ok(base),
        Some(r) if base.topology() == Topology::Linear3 => Ok(SpinGeometry::linear3(a.j, a.j * r)?),
        Some(_) => Err(CliError::Usage("--J-ratio applies to linear-3 only".into())),
    }
}

fn derive(g: &GlobalArgs, config: &Value, a: &DeriveArgs) -> Result<Outcome, CliError> {
    let geo = geometry(a)?;
    let t_max = a.t_max.unwrap_or(match geo.topology() {
        Topology::Linear3 => 4.0 * PI / a.j,
        Topology::Star(_) => 8.0 * PI / a.j,
    });
    let header = vec!["t", "multiple", "residual", "tag"];
    let (json, rows, summary) = if geo.has_equal_couplings() {
        let fam = scan_mediated_gates(&geo, t_max, a.grid)?;
        let members: Vec<Value> = fam
            .members
            .iter()
            .map(|m| {
                json!({
                    "t": Num(m.t), "multiple": Num(m.multiple), "residual": Num(m.residual),
                    "tag": m.tag, "gate": io::matrix_json(m.gate.matrix()),
                })
            })
            .collect();
        let rows = fam.members.iter().map(|m| vec![cell(m.t), cell(m.multiple), cell(m.residual), m.tag.clone()]).collect();
        let first = fam.first_nontrivial();
        let summary = format!(
            "{}: base period {:.12} ({} windows up to t = {:.6}); first gate {} at t = {}",
            geo.name(),
            fam.base_period,
            fam.members.len(),
            t_max,
            first.map_or("none", |m| m.tag.as_str()),
            first.map_or("-".into(), |m| format!("{:.12}", m.t)),
        );
        let body = to_value(&json!({
            "geometry": geo.name(), "gate_name": geo.gate_name(), "couplings": nums(geo.couplings()),
            "t_max": Num(t_max), "grid": a.grid, "base_period": Num(fam.base_period), "windows": members,
        }));
        (body, rows, summary)
    } else {
        let windows = scan_windows(&geo, t_max, a.grid, g.tolerance)?;
        let base = windows.first().map(|w| w.t);
        let list: Vec<Value> = windows
            .iter()
            .map(|w| {
                let tag = if w.is_trivial(g.tolerance.max(1e-9)) { "identity" } else { "gate" };
                json!({
                    "t": Num(w.t), "multiple": base.map(|b| Num(w.t / b)), "residual": Num(w.residual),
                    "tag": tag, "gate": io::matrix_json(w.gate.matrix()),
                })
            })
            .collect();
        let rows = windows
            .iter()
            .map(|w| {
                let tag = if w.is_trivial(g.tolerance.max(1e-9)) { "identity" } else { "gate" };
                vec![cell(w.t), base.map_or("".into(), |b| cell(w.t / b)), cell(w.residual), tag.into()]
            })
            .collect();
        let note = "unequal couplings: factorization times located numerically on the scan grid; \
                    windows closer than the grid spacing may be merged and uniqueness is not established";
        let summary = format!("{}: {} factorization windows up to t = {:.6}", geo.name(), windows.len(), t_max);
        let body = to_value(&json!({
            "geometry": geo.name(), "couplings": nums(geo.couplings()), "t_max": Num(t_max),
            "grid": a.grid, "tolerance": Num(g.tolerance), "windows": list, "notes": [note],
        }));
        (body, rows, summary)
    };
    let stem = format!("derive-{}", geo.name());
    let path = emit(g, config, Format::Json, Output { stem, json, header, rows })?;
    Ok(Outcome::ok(summary, path))
}

fn weyl(g: &GlobalArgs, config: &Value, a: &WeylArgs) -> Result<Outcome, CliError> {
    let (name, u) = io::load_gate(&a.gate)?;
    if u.dim() != 4 {
        return Err(CliError::Usage(format!("`{}` acts on {} dimensions; weyl needs a two-qubit gate", a.gate, u.dim())));
    }
    let p = weyl_coordinates(&u)?;
    let m = makhlin_invariants(&u)?;
    let pe = is_perfect_entangler(&u)?;
    let cmax = max_concurrence(&u, a.restarts)?;
    let c = p.as_array();
    let json = json!({
        "gate": name,
        "weyl": nums(&c),
        "weyl_in_pi": nums(&c.map(|x| x / PI)),
        "makhlin": { "g1": complex(m.g1), "g2": Num(m.g2) },
        "perfect_entangler": pe,
        "max_concurrence": Num(cmax),
        "restarts": a.restarts,
    });
    let header = vec!["gate", "c1", "c2", "c3", "g1_re", "g1_im", "g2", "perfect_entangler", "max_concurrence"];
    let rows = vec![vec![
        name.clone(),
        cell(c[0]),
        cell(c[1]),
        cell(c[2]),
        cell(m.g1.re),
        cell(m.g1.im),
        cell(m.g2),
        pe.to_string(),
        cell(cmax),
    ]];
    let summary = format!(
        "{name}: weyl = ({:.6}, {:.6}, {:.6}) pi, perfect entangler = {pe}, max concurrence = {cmax:.6}",
        c[0] / PI,
        c[1] / PI,
        c[2] / PI
    );
    let path = emit(g, config, Format::Json, Output { stem: format!("weyl-{name}"), json: to_value(&json), header, rows })?;
    Ok(Outcome::ok(summary, path))
}

fn optimizer_config(g: &GlobalArgs, a: &SynthArgs) -> OptimizerConfig {
    OptimizerConfig {
        restarts: a.restarts,
        rounds: a.rounds,
        cluster_radius: a.cluster_radius,
        x_tol: a.x_tol,
        f_tol: a.f_tol,
        max_iterations: a.max_iterations,
        seed: g.seed,
        depth: match a.depth {
            Some(d) => DepthPolicy::Fixed(d),
            None => DepthPolicy::Incremental { max: a.max_depth },
        },
        max_sequences: a.max_sequences,
        ..OptimizerConfig::default()
    }
}

fn parse_menu(text: &str, n_qubits: usize) -> Result<GateMenu, CliError> {
    let tags: Vec<GateTag> =
        text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(GateTag::parse).collect::<Result<_, _>>()?;
    if tags.is_empty() {
        return Err(CliError::Usage("--menu lists no gates".into()));
    }
    Ok(GateMenu::all_subsets(n_qubits, &tags)?)
}

/// Odd W states beyond the registry size use the one-star-gate construction.
fn odd_w_size(target: &SynthesisTarget) -> Option<usize> {
    let k: usize = target.name.strip_prefix('w')?.parse().ok()?;
    (k >= 5 && k % 2 == 1).then_some(k)
}

fn report_rows(reports: &[&SynthesisReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            vec![
                r.target.clone(),
                r.kind.into(),
                r.depth.to_string(),
                format_sequence(&r.gate_sequence),
                r.active.iter().map(u32::to_string).collect::<Vec<_>>().join(" "),
                r.angles.iter().map(|&x| cell(x)).collect::<Vec<_>>().join(" "),
                cell(r.objective),
                r.converged.to_string(),
                r.seed.to_string(),
                r.wall_time_ms.map_or(String::new(), cell),
            ]
        })
        .collect()
}

const REPORT_HEADER: [&str; 10] =
    ["target", "kind", "depth", "sequence", "active", "angles", "objective", "converged", "seed", "wall_time_ms"];

fn run_synthesis(
    target: &SynthesisTarget,
    a: &SynthArgs,
    cfg: &OptimizerConfig,
    exec: &RayonExecutor,
) -> Result<SynthesisReport, CliError> {
    if let Some(seq) = &a.sequence {
        let sequence = io::parse_sequence(seq)?;
        let mut lib = GateLibrary::standard();
        for e in sequence.iter().flatten() {
            lib.ensure(e.tag)?;
        }
        let active = (1..=target.n_qubits as u32).collect();
        let template = CircuitTemplate::new(target.ordering(), sequence, active)?;
        return Ok(synthesize_template(target, &template, &lib, cfg, exec)?);
    }
    if a.menu.is_none() {
        if let Some(k) = odd_w_size(target) {
            return Ok(synthesize_w_odd((k - 1) / 2, cfg, exec)?);
        }
    }
    let menu = match &a.menu {
        Some(m) => parse_menu(m, target.n_qubits)?,
        None => default_menu(target)?,
    };
    Ok(synthesize(target, &menu, cfg, exec)?)
}

fn synth(g: &GlobalArgs, config: &Value, a: &SynthArgs) -> Result<Outcome, CliError> {
    let target = io::load_target(&a.target)?;
    let cfg = optimizer_config(g, a);
    cfg.validate()?;
    let exec = RayonExecutor::new(g.workers)?;
    let start = Instant::now();
    let mut report = run_synthesis(&target, a, &cfg, &exec)?;
    report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    let summary = format!(
        "{}: depth {} [{}] objective {:.3e} {}",
        report.target,
        report.depth,
        format_sequence(&report.gate_sequence),
        report.objective,
        if report.converged { "converged" } else { "NOT converged" }
    );
    let out = Output {
        stem: format!("synth-{}", report.target),
        json: report_json(&report, g.angles_in_pi),
        header: REPORT_HEADER.to_vec(),
        rows: report_rows(&[&report]),
    };
    let path = emit(g, config, Format::Json, out)?;
    let failure = (a.require_converged && !report.converged)
        .then(|| CliError::NotConverged(format!("{} did not converge (objective {:.3e})", report.target, report.objective)));
    Ok(Outcome { summary, files: vec![path], failure })
}

fn replay(g: &GlobalArgs, config: &Value, a: &ReplayArgs) -> Result<Outcome, CliError> {
    let ids: Vec<FigureId> =
        if a.figure == "all" { FigureId::ALL.to_vec() } else { vec![FigureId::parse(&a.figure)?] };
    let mut items = Vec::new();
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    for id in ids {
        let r = replay_figure(id)?;
        let provenance = format!("{:?}", r.provenance).to_lowercase();
        let mut entry = report_json(&r.report, g.angles_in_pi);
        if let Value::Object(map) = &mut entry {
            map.insert("figure".into(), json!(id.name()));
            map.insert("provenance".into(), json!(provenance));
            map.insert("bound".into(), to_value(&Num(r.bound)));
            map.insert("passed".into(), json!(r.passed));
        }
        items.push(entry);
        rows.push(vec![
            id.name().into(),
            provenance,
            cell(r.report.objective),
            cell(r.bound),
            r.passed.to_string(),
            format_sequence(&r.report.gate_sequence),
        ]);
        if !r.passed {
            failed.push(id.name());
        }
    }
    let total = rows.len();
    let summary = format!("replay: {}/{} figures within bound{}", total - failed.len(), total, if failed.is_empty() {
        String::new()
    } else {
        format!("; missed: {}", failed.join(", "))
    });
    let out = Output {
        stem: format!("replay-{}", a.figure),
        json: json!({ "figures": items }),
        header: vec!["figure", "provenance", "objective", "bound", "passed", "sequence"],
        rows,
    };
    let path = emit(g, config, Format::Json, out)?;
    let failure = (!failed.is_empty()).then(|| CliError::Numerical(format!("bound missed for {}", failed.join(", "))));
    Ok(Outcome { summary, files: vec![path], failure })
}

fn table1(g: &GlobalArgs, config: &Value, a: &Table1Args) -> Result<Outcome, CliError> {
    let exec = RayonExecutor::new(g.workers)?;
    let mut rows = Vec::new();
    let mut items = Vec::new();
    let mut matched = 0;
    let mut run = 0;
    for target in target_registry() {
        let mediated = target.reference_depth_mediated.unwrap_or(0);
        let pairwise = target.reference_depth_pairwise.unwrap_or(0);
        if target.name == "toffoli" && !a.full {
            rows.push(vec![
                target.name.clone(),
                target.kind().into(),
                String::new(),
                mediated.to_string(),
                pairwise.to_string(),
                String::new(),
                String::new(),
                "skipped".into(),
                String::new(),
                String::new(),
                "run with --full".into(),
            ]);
            items.push(json!({ "target": target.name, "skipped": true, "reference_mediated": mediated, "reference_pairwise": pairwise }));
            continue;
        }
        let cfg = OptimizerConfig {
            restarts: a.restarts,
            rounds: a.rounds,
            seed: g.seed,
            depth: DepthPolicy::Incremental { max: mediated as usize + 1 },
            ..OptimizerConfig::default()
        };
        let start = Instant::now();
        let (mut report, method) = match odd_w_size(&target) {
            Some(k) => (synthesize_w_odd((k - 1) / 2, &cfg, &exec)?, "odd-w star gate"),
            None => (synthesize(&target, &default_menu(&target)?, &cfg, &exec)?, "menu search"),
        };
        report.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
        run += 1;
        if report.converged && report.depth == mediated as usize {
            matched += 1;
        }
        let note = report.notes.join("; ");
        rows.push(vec![
            target.name.clone(),
            target.kind().into(),
            if report.converged { report.depth.to_string() } else { String::new() },
            mediated.to_string(),
            pairwise.to_string(),
            cell(report.objective),
            report.converged.to_string(),
            method.into(),
            format_sequence(&report.gate_sequence),
            report.wall_time_ms.map_or(String::new(), cell),
            note,
        ]);
        let mut entry = report_json(&report, g.angles_in_pi);
        if let Value::Object(map) = &mut entry {
            map.insert("reference_mediated".into(), json!(mediated));
            map.insert("reference_pairwise".into(), json!(pairwise));
            map.insert("method".into(), json!(method));
        }
        items.push(entry);
    }
    let out = Output {
        stem: "table1".into(),
        json: json!({ "rows": items }),
        header: vec![
            "target",
            "kind",
            "found_depth",
            "reference_mediated",
            "reference_pairwise",
            "objective",
            "converged",
            "method",
            "sequence",
            "wall_time_ms",
            "note",
        ],
        rows,
    };
    let path = emit(g, config, Format::Csv, out)?;
    Ok(Outcome::ok(format!("table1: {matched}/{run} targets reach the reference mediated depth"), path))
}

fn robustness(g: &GlobalArgs, config: &Value, a: &RobustnessArgs) -> Result<Outcome, CliError> {
    if !(a.delta_max > 0.0 && a.delta_max <= 1.0) {
        return Err(CliError::Usage(format!("--delta-max must lie in (0, 1], got {}", a.delta_max)));
    }
    let sweep = robustness_sweep(a.delta_max, a.points)?;
    let small: Vec<(f64, f64)> = sweep.samples.iter().copied().filter(|&(d, _)| d <= 0.1 + 1e-12).collect();
    let small_k = fit_quadratic_through_origin(&small);
    let json = json!({
        "delta": nums(&sweep.samples.iter().map(|s| s.0).collect::<Vec<_>>()),
        "infidelity": nums(&sweep.samples.iter().map(|s| s.1).collect::<Vec<_>>()),
        "coefficient": Num(sweep.coefficient),
        "coefficient_small_delta": Num(small_k),
        "small_delta_max": Num(0.1),
    });
    let rows = sweep.samples.iter().map(|&(d, y)| vec![cell(d), cell(y)]).collect();
    let summary = format!(
        "robustness: 1 - F ~ {:.4} delta^2 on [0, {}] ({:.4} for delta <= 0.1)",
        sweep.coefficient, a.delta_max, small_k
    );
    let out = Output { stem: "robustness".into(), json: to_value(&json), header: vec!["delta", "infidelity"], rows };
    let path = emit(g, config, Format::Csv, out)?;
    Ok(Outcome::ok(summary, path))
}

fn scaling(g: &GlobalArgs, config: &Value, a: &ScalingArgs) -> Result<Outcome, CliError> {
    if let Some(n) = a.n.iter().find(|&&n| n % 2 == 0) {
        return Err(CliError::Usage(format!("bus length must be odd, got {n}")));
    }
    let mut rows = Vec::new();
    let mut items = Vec::new();
    for &n in &a.n {
        for p in Protocol::ALL {
            let r = scaling_report(n, p)?;
            rows.push(vec![
                n.to_string(),
                p.name().into(),
                r.mediated_depth.to_string(),
                cell(r.mediated_time_factor),
                r.pairwise_depth.to_string(),
            ]);
            items.push(json!({
                "bus_length": n, "protocol": p.name(), "mediated_depth": r.mediated_depth,
                "mediated_time_factor": Num(r.mediated_time_factor), "pairwise_depth": r.pairwise_depth,
            }));
        }
    }
    let out = Output {
        stem: "scaling".into(),
        json: to_value(&json!({ "rows": items })),
        header: vec!["bus_length", "protocol", "mediated_depth", "mediated_time_factor", "pairwise_depth"],
        rows,
    };
    let path = emit(g, config, Format::Csv, out)?;
    let lengths: Vec<String> = a.n.iter().map(u32::to_string).collect();
    Ok(Outcome::ok(format!("scaling: {} rows for N = {}", a.n.len() * Protocol::ALL.len(), lengths.join(",")), path))
}

