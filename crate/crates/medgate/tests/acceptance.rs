//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test -p medgate --test acceptance` runs everything; numeric
//! arguments select criteria (`-- 1 4 7`). Criteria listed in
//! `KNOWN_UNATTAINABLE` still print FAIL but do not fail the process unless
//! `MEDGATE_ACCEPTANCE_STRICT=1`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use medgate_core::dynamics::{
    closed_form_u, evolve, mediated_gate_constant, robustness_sweep, s3_operators, scan_mediated_gates, MediatedGate,
    SpinGeometry, ANCILLA, DEFAULT_SCAN_GRID,
};
use medgate_core::entanglement::{
    concurrence, is_perfect_entangler, max_concurrence, weyl_coordinates, WeylPoint, DEFAULT_CONCURRENCE_RESTARTS,
};
use medgate_core::gates;
use medgate_core::linalg::{herm_exp, kron, reduced_density};
use medgate_core::optimize::{job_rng, uniform_point, Sequential};
use medgate_core::synthesis::{
    default_menu, evaluate_circuit, find_target, project_even_w, replay_figure, synthesize, synthesize_template,
    synthesize_w_odd, w_state, CircuitTemplate, DepthPolicy, Entangler, FigureId, GateLibrary, OptimizerConfig,
    Rotation, SynthesisTarget,
};
use medgate_core::{ComplexMatrix, QubitOrdering, StateVector, Unitary, C64};

const KNOWN_UNATTAINABLE: &[u32] = &[7];
const SEED: u64 = 2024;

struct Verdict {
    passed: bool,
    detail: String,
    lines: Vec<String>,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into(), lines: Vec::new() }
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Verdict,
}

fn random_state(rng: &mut impl Rng, n_spins: usize) -> StateVector {
    let amps = (0..1 << n_spins).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
    StateVector::normalized(amps).unwrap()
}

fn random_rotation(rng: &mut impl Rng) -> ComplexMatrix {
    let [a, b, c]: [f64; 3] = core::array::from_fn(|_| 2.0 * PI * rng.random::<f64>());
    Rotation::new(a, b, c).matrix()
}

fn random_two_qubit(rng: &mut impl Rng) -> Unitary {
    let a = ComplexMatrix::from_fn(4, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let h = a.add(&a.adjoint()).scale(C64::new(2.0, 0.0));
    herm_exp(&h, 1.0).unwrap()
}

fn weyl_diff(a: &WeylPoint, b: [f64; 3]) -> f64 {
    a.max_abs_diff(&WeylPoint { c1: b[0], c2: b[1], c3: b[2] })
}

fn exact_gate_derivation() -> Verdict {
    let g = SpinGeometry::linear3(1.0, 1.0).unwrap();
    let fam = scan_mediated_gates(&g, 4.0 * PI, DEFAULT_SCAN_GRID).unwrap();
    let Some(m) = fam.first_nontrivial() else {
        return Verdict::new(false, "no nontrivial window");
    };
    let dt = (m.t - 4.0 * PI / 3.0).abs();
    let err = m.gate.matrix().max_abs_diff_up_to_phase(mediated_gate_constant(MediatedGate::U2).matrix());
    Verdict::new(dt < 1e-9 && err < 1e-9, format!("t = {:.15} (|dt| = {dt:.1e}), gate error {err:.1e}", m.t))
}

fn closed_form_oracle() -> Verdict {
    let mut rng = job_rng(SEED, 2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let ratio = 0.1 + 2.9 * rng.random::<f64>();
        let t = 10.0 * rng.random::<f64>();
        let closed = closed_form_u(ratio, 1.0, t).unwrap();
        let spectral = evolve(&SpinGeometry::linear3(ratio, 1.0).unwrap(), t).unwrap();
        worst = worst.max(closed.matrix().max_abs_diff(spectral.matrix()));
    }
    Verdict::new(worst < 1e-9, format!("200 samples, worst max-norm difference {worst:.1e}"))
}

fn u3_family() -> Verdict {
    let g = SpinGeometry::from_name("star-3", 1.0).unwrap();
    let fam = scan_mediated_gates(&g, 8.0 * PI, DEFAULT_SCAN_GRID).unwrap();
    let u3 = mediated_gate_constant(MediatedGate::U3).matrix().clone();
    let id = ComplexMatrix::identity(8);
    let minus = C64::new(-1.0, 0.0);
    let expected = [(2.0 * PI, u3.clone()), (4.0 * PI, id.scale(minus)), (6.0 * PI, u3.scale(minus)), (8.0 * PI, id)];
    let mut worst: f64 = 0.0;
    let ok_count = fam.members.len() == expected.len();
    for (m, (t, gate)) in fam.members.iter().zip(&expected) {
        worst = worst.max((m.t - t).abs()).max(m.gate.matrix().max_abs_diff(gate));
    }
    let tags: Vec<&str> = fam.members.iter().map(|m| m.tag.as_str()).collect();
    Verdict::new(ok_count && worst < 1e-9, format!("windows {tags:?}, worst deviation {worst:.1e}"))
}

fn weyl_characterization() -> Verdict {
    let iswap = Unitary::new(ComplexMatrix::from_fn(4, |r, c| match (r, c) {
        (0, 0) | (3, 3) => C64::new(1.0, 0.0),
        (1, 2) | (2, 1) => C64::new(0.0, 1.0),
        _ => C64::new(0.0, 0.0),
    }))
    .unwrap();
    let h = PI / 2.0;
    let q = PI / 4.0;
    let cases: [(&str, Unitary, [f64; 3]); 7] = [
        ("identity", Unitary::identity(4), [0.0, 0.0, 0.0]),
        ("cnot", gates::cnot(), [h, 0.0, 0.0]),
        ("b", gates::b_gate(), [h, q, 0.0]),
        ("iswap", iswap, [h, h, 0.0]),
        ("swap", gates::swap(), [h, h, h]),
        ("sqrtswap", gates::sqrt_swap(), [q, q, q]),
        ("u2", mediated_gate_constant(MediatedGate::U2), [2.0 * PI / 3.0, PI / 3.0, PI / 3.0]),
    ];
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (name, u, expect) in &cases {
        let p = weyl_coordinates(u).unwrap();
        let d = weyl_diff(&p, *expect);
        worst = worst.max(d);
        lines.push(format!("{name}: ({:.10}, {:.10}, {:.10}) deviation {d:.1e}", p.c1, p.c2, p.c3));
    }
    let flags = [
        is_perfect_entangler(&gates::cnot()).unwrap(),
        !is_perfect_entangler(&mediated_gate_constant(MediatedGate::U2)).unwrap(),
        !is_perfect_entangler(&Unitary::identity(4)).unwrap(),
    ];
    let flags_ok = flags.iter().all(|&f| f);
    let mut v = Verdict::new(worst < 1e-8 && flags_ok, format!("worst coordinate deviation {worst:.1e}, flags ok = {flags_ok}"));
    v.lines = lines;
    v
}

fn entangling_power() -> Verdict {
    let cu2 = max_concurrence(&mediated_gate_constant(MediatedGate::U2), DEFAULT_CONCURRENCE_RESTARTS).unwrap();
    let ccnot = max_concurrence(&gates::cnot(), DEFAULT_CONCURRENCE_RESTARTS).unwrap();
    let e2 = (cu2 - 3f64.sqrt() / 2.0).abs();
    let e1 = (ccnot - 1.0).abs();
    Verdict::new(e2 < 1e-6 && e1 < 1e-6, format!("C_max(U2) = {cu2:.10} (err {e2:.1e}), C_max(CNOT) = {ccnot:.10} (err {e1:.1e})"))
}

fn robustness() -> Verdict {
    let s = robustness_sweep(0.4, 41).unwrap();
    Verdict::new((s.coefficient - 0.97).abs() <= 0.02, format!("coefficient {:.4}", s.coefficient))
}

fn figure_regression() -> Verdict {
    let ids = [FigureId::Fig3a, FigureId::Fig4a, FigureId::Fig4c, FigureId::Fig4e, FigureId::Fig4g, FigureId::Fig5d, FigureId::Fig6];
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for id in ids {
        let r = replay_figure(id).unwrap();
        lines.push(format!(
            "{}: objective {:.2e} bound {:.0e} ({:?}) {}",
            id.name(),
            r.report.objective,
            r.bound,
            r.provenance,
            if r.passed { "ok" } else { "missed" }
        ));
        if !r.passed {
            failed.push(id.name());
        }
    }
    let detail = if failed.is_empty() { "all figures within bound".to_string() } else { format!("missed: {}", failed.join(", ")) };
    let mut v = Verdict::new(failed.is_empty(), detail);
    v.lines = lines;
    v
}

fn fixed_depth(target: &SynthesisTarget, depth: usize) -> (bool, f64, Duration) {
    let cfg = OptimizerConfig { depth: DepthPolicy::Fixed(depth), ..OptimizerConfig::default() };
    let start = Instant::now();
    let r = synthesize(target, &default_menu(target).unwrap(), &cfg, &Sequential).unwrap();
    (r.converged, r.objective, start.elapsed())
}

fn fresh_synthesis() -> Verdict {
    let budget = Duration::from_secs(600);
    let cases = [("bell", 2), ("ghz3", 1), ("w3", 2), ("cnot", 4), ("bgate", 5), ("swap", 5), ("sqrtswap", 4), ("c4", 4)];
    let mut lines = Vec::new();
    let mut all = true;
    for (name, n) in cases {
        let target = find_target(name).unwrap();
        let (conv, obj, t) = fixed_depth(&target, n);
        let at_n = conv && t <= budget;
        let mut line = format!("{name}: n={n} objective {obj:.2e} in {:.1} s", t.as_secs_f64());
        let below = if n > 1 {
            let (conv_m, obj_m, t_m) = fixed_depth(&target, n - 1);
            line += &format!("; n={} objective {obj_m:.2e} in {:.1} s", n - 1, t_m.as_secs_f64());
            !conv_m && t_m <= budget
        } else {
            line += "; no shallower depth";
            true
        };
        line += if at_n && below { " ok" } else { " FAILED" };
        all &= at_n && below;
        lines.push(line);
    }
    let mut v = Verdict::new(all, "converged at the reference depth and not one below, per-target budget 600 s");
    v.lines = lines;
    v
}

fn odd_w_scaling() -> Verdict {
    let mut lines = Vec::new();
    let mut ok = true;
    let cfg = OptimizerConfig::default();
    for n in [2usize, 3] {
        let r = synthesize_w_odd(n, &cfg, &Sequential).unwrap();
        let good = r.converged && r.depth == 3 && r.active == [1, 2] && r.angles.len() == 2 * 3 * 2;
        ok &= good;
        lines.push(format!("W{}: depth {} objective {:.2e} active {:?}", 2 * n + 1, r.depth, r.objective, r.active));
    }
    for n in 1..=3usize {
        let (state, p) = project_even_w(n, 1, 0).unwrap();
        let expect = 2.0 * n as f64 / (2.0 * n as f64 + 1.0);
        let overlap = state.inner(&w_state(2 * n).unwrap()).unwrap().norm();
        let good = (p - expect).abs() < 1e-12 && (1.0 - overlap).abs() < 1e-12;
        ok &= good;
        lines.push(format!("project W{} -> W{}: P = {p:.15} (expected {expect:.15})", 2 * n + 1, 2 * n));
    }
    let mut v = Verdict::new(ok, "W5, W7 at depth 3 with two optimized rotations; even-W projection probabilities");
    v.lines = lines;
    v
}

fn mixed_menu_recovery() -> Verdict {
    let ordering = QubitOrdering::qubits(&[1, 2, 3]).unwrap();
    let sequence = vec![
        vec![Entangler::u3(1, 2, 3)],
        vec![Entangler::u2(1, 3)],
        vec![Entangler::u3(1, 2, 3)],
        vec![Entangler::u2(2, 3)],
    ];
    let template = CircuitTemplate::new(ordering, sequence, vec![1, 2, 3]).unwrap();
    let mut rng = job_rng(99, 0);
    let angles = uniform_point(&mut rng, template.param_count(), -PI, PI);
    let target = SynthesisTarget::gate("mixed", evaluate_circuit(&template.instantiate(&angles).unwrap()).unwrap());
    let cfg = OptimizerConfig { depth: DepthPolicy::Fixed(4), ..OptimizerConfig::default() };
    let r = synthesize_template(&target, &template, &GateLibrary::standard(), &cfg, &Sequential).unwrap();
    Verdict::new(
        r.converged,
        format!("depth-4 U2/U3 gate target, {} angles recovered from random starts, objective {:.2e}", r.angles.len(), r.objective),
    )
}

fn property_suites() -> Verdict {
    let mut rng = job_rng(SEED, 11);
    let mut lines = Vec::new();

    let g = SpinGeometry::linear3(1.0, 1.0).unwrap();
    let u = evolve(&g, 4.0 * PI / 3.0).unwrap();
    let mut anc_err: f64 = 0.0;
    for _ in 0..50 {
        let chi = random_state(&mut rng, 2);
        let a = random_state(&mut rng, 1);
        let out = u.apply(&chi.kron(&a)).unwrap();
        let rho = reduced_density(&out, g.ordering(), &[ANCILLA]).unwrap();
        anc_err = anc_err.max(rho.max_abs_diff(&a.density()));
    }
    lines.push(format!("ancilla restoration: 50 states, worst deviation {anc_err:.1e}"));

    let mut weyl_err: f64 = 0.0;
    let mut conc_err: f64 = 0.0;
    for _ in 0..100 {
        let gate = random_two_qubit(&mut rng);
        let before = kron(&random_rotation(&mut rng), &random_rotation(&mut rng)).unwrap();
        let after = kron(&random_rotation(&mut rng), &random_rotation(&mut rng)).unwrap();
        let dressed = Unitary::new(after.matmul(gate.matrix()).matmul(&before)).unwrap();
        let p = weyl_coordinates(&gate).unwrap();
        weyl_err = weyl_err.max(p.max_abs_diff(&weyl_coordinates(&dressed).unwrap()));
        let psi = random_state(&mut rng, 2);
        let moved = Unitary::new(before).unwrap().apply(&psi).unwrap();
        conc_err = conc_err.max((concurrence(&psi).unwrap() - concurrence(&moved).unwrap()).abs());
    }
    lines.push(format!("local-unitary invariance: 100 dressings, Weyl {weyl_err:.1e}, concurrence {conc_err:.1e}"));

    let ops = s3_operators();
    // Permutations of the spins (1, ancilla, 2) as position maps, in operator order.
    let perms: [[usize; 3]; 6] = [[0, 1, 2], [1, 0, 2], [2, 1, 0], [0, 2, 1], [0, 0, 0], [0, 0, 0]];
    let compose = |a: [usize; 3], b: [usize; 3]| [a[b[0]], a[b[1]], a[b[2]]];
    let mut perms = perms;
    perms[4] = compose(perms[3], perms[1]);
    perms[5] = compose(perms[1], perms[3]);
    let mut cayley_ok = true;
    let mut cayley_err: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let k = perms.iter().position(|p| *p == compose(perms[i], perms[j])).unwrap();
            let d = ops[i].mul(&ops[j]).matrix().max_abs_diff(ops[k].matrix());
            cayley_err = cayley_err.max(d);
            cayley_ok &= d < 1e-12;
        }
    }
    lines.push(format!("S3 Cayley table: 36 products, worst deviation {cayley_err:.1e}"));

    let u2 = mediated_gate_constant(MediatedGate::U2);
    let u3 = mediated_gate_constant(MediatedGate::U3);
    let e2 = u2.pow(3).matrix().max_abs_diff(&ComplexMatrix::identity(4));
    let e3 = u3.pow(2).matrix().max_abs_diff(&ComplexMatrix::identity(8).scale(C64::new(-1.0, 0.0)));
    lines.push(format!("U2^3 = I: {e2:.1e}; U3^2 = -I: {e3:.1e}"));

    let ok = anc_err < 1e-9 && weyl_err < 1e-8 && conc_err < 1e-10 && cayley_ok && e2 < 1e-12 && e3 < 1e-12;
    let mut v = Verdict::new(ok, "ancilla restoration, local-unitary invariance, S3 table, gate identities");
    v.lines = lines;
    v
}

fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "exact-gate derivation", budget: Duration::from_secs(5), run: exact_gate_derivation },
        Criterion { id: 2, name: "closed-form evolution oracle", budget: Duration::from_secs(10), run: closed_form_oracle },
        Criterion { id: 3, name: "three-qubit gate family", budget: Duration::from_secs(10), run: u3_family },
        Criterion { id: 4, name: "Weyl characterization", budget: Duration::from_secs(1), run: weyl_characterization },
        Criterion { id: 5, name: "entangling power", budget: Duration::from_secs(30), run: entangling_power },
        Criterion { id: 6, name: "detuning robustness", budget: Duration::from_secs(5), run: robustness },
        Criterion { id: 7, name: "figure regression", budget: Duration::from_secs(10), run: figure_regression },
        // Per-target budgets are checked inside.
        Criterion { id: 8, name: "fresh synthesis at reference depths", budget: Duration::MAX, run: fresh_synthesis },
        Criterion { id: 9, name: "odd-W scaling", budget: Duration::from_secs(300), run: odd_w_scaling },
        Criterion { id: 10, name: "mixed-menu recovery", budget: Duration::MAX, run: mixed_menu_recovery },
        Criterion { id: 11, name: "property suites", budget: Duration::from_secs(60), run: property_suites },
    ]
}

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let strict = std::env::var("MEDGATE_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut fatal = false;
    let mut summary = Vec::new();
    for c in criteria() {
        if !selected.is_empty() && !selected.contains(&c.id) {
            continue;
        }
        let start = Instant::now();
        let v = (c.run)();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= c.budget;
        let passed = v.passed && in_budget;
        let budget = if c.budget == Duration::MAX { String::new() } else { format!(", budget {} s", c.budget.as_secs()) };
        let timing = format!("{:.2} s{budget}{}", elapsed.as_secs_f64(), if in_budget { "" } else { ", OVER BUDGET" });
        println!("criterion {:>2} {}  {}: {} ({timing})", c.id, if passed { "PASS" } else { "FAIL" }, c.name, v.detail);
        for l in &v.lines {
            println!("      {l}");
        }
        if !passed {
            let known = KNOWN_UNATTAINABLE.contains(&c.id);
            fatal |= strict || !known;
            summary.push(format!("{}{}", c.id, if known { " (known unattainable)" } else { "" }));
        }
    }
    if summary.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: failing criteria: {}", summary.join(", "));
    }
    if fatal {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
