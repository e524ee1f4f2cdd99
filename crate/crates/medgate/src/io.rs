//! Gate and target files, report encoding and output files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use medgate_core::dynamics::{mediated_gate_constant, MediatedGate};
use medgate_core::gates;
use medgate_core::synthesis::{find_target, Entangler, GateTag, SynthesisReport, SynthesisTarget, TargetPayload};
use medgate_core::{ComplexMatrix, StateVector, Unitary, C64};

use crate::error::CliError;
use crate::num::{complex, fmt17, nums, Num};

/// Named gates accepted wherever a gate is expected.
pub fn named_gate(name: &str) -> Option<Unitary> {
    let g = match name.to_ascii_lowercase().as_str() {
        "cnot" => gates::cnot(),
        "swap" => gates::swap(),
        "sqrtswap" => gates::sqrt_swap(),
        "bgate" | "b" => gates::b_gate(),
        "toffoli" => gates::toffoli(),
        "identity" | "i" | "i4" => Unitary::identity(4),
        "u2" => mediated_gate_constant(MediatedGate::U2),
        "u3" => mediated_gate_constant(MediatedGate::U3),
        "u2^2" | "u2_sq" => mediated_gate_constant(MediatedGate::U2Squared),
        "u3^3" | "u3_cubed" => mediated_gate_constant(MediatedGate::U3Cubed),
        _ => return None,
    };
    Some(g)
}

fn entry(v: &Value) -> Option<C64> {
    match v {
        Value::Number(n) => Some(C64::new(n.as_f64()?, 0.0)),
        Value::Array(p) if p.len() == 2 => Some(C64::new(p[0].as_f64()?, p[1].as_f64()?)),
        _ => None,
    }
}

fn parse_rows(v: &Value) -> Result<ComplexMatrix, CliError> {
    let rows = v.as_array().ok_or_else(|| CliError::Usage("matrix must be an array of rows".into()))?;
    let mut out = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let cells = row.as_array().ok_or_else(|| CliError::Usage(format!("row {r} is not an array")))?;
        let parsed: Option<Vec<C64>> = cells.iter().map(entry).collect();
        out.push(parsed.ok_or_else(|| CliError::Usage(format!("row {r} has an entry that is not a number or [re, im]")))?);
    }
    Ok(ComplexMatrix::from_rows(out)?)
}

fn parse_vector(v: &Value) -> Result<Vec<C64>, CliError> {
    let items = v.as_array().ok_or_else(|| CliError::Usage("amplitudes must be an array".into()))?;
    let parsed: Option<Vec<C64>> = items.iter().map(entry).collect();
    parsed.ok_or_else(|| CliError::Usage("amplitude is not a number or [re, im]".into()))
}

/// Matrix JSON: an array of rows (entries `x` or `[re, im]`), optionally
/// wrapped as `{"matrix": rows}`.
pub fn parse_matrix_json(text: &str) -> Result<ComplexMatrix, CliError> {
    let v: Value = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("matrix file is not JSON: {e}")))?;
    match v.get("matrix") {
        Some(m) => parse_rows(m),
        None => parse_rows(&v),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// A named gate or a matrix file; the file must hold a unitary.
pub fn load_gate(source: &str) -> Result<(String, Unitary), CliError> {
    if let Some(u) = named_gate(source) {
        return Ok((source.to_ascii_lowercase(), u));
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(CliError::Usage(format!("`{source}` is neither a known gate nor a readable file")));
    }
    let m = parse_matrix_json(&read(path)?)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("gate").to_string();
    Ok((name, Unitary::new(m)?))
}

#[derive(Debug, Deserialize)]
struct TargetFile {
    name: Option<String>,
    kind: String,
    amplitudes: Option<Value>,
    input: Option<Value>,
    matrix: Option<Value>,
}

/// A registry name (`bell`, `w5`, `cnot`, ...) or a target file.
pub fn load_target(source: &str) -> Result<SynthesisTarget, CliError> {
    if let Ok(t) = find_target(source) {
        return Ok(t);
    }
    let path = Path::new(source);
    if !path.exists() {
        return Err(CliError::Usage(format!("`{source}` is neither a registry target nor a readable file")));
    }
    let file: TargetFile =
        serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("bad target file: {e}")))?;
    let name = file.name.unwrap_or_else(|| path.file_stem().and_then(|s| s.to_str()).unwrap_or("target").into());
    match file.kind.as_str() {
        "state" => {
            let amps = file.amplitudes.ok_or_else(|| CliError::Usage("state target needs `amplitudes`".into()))?;
            let mut t = SynthesisTarget::state(&name, StateVector::new(parse_vector(&amps)?)?);
            if let Some(input) = file.input {
                t = t.with_input(StateVector::new(parse_vector(&input)?)?)?;
            }
            Ok(t)
        }
        "gate" => {
            let m = file.matrix.ok_or_else(|| CliError::Usage("gate target needs `matrix`".into()))?;
            Ok(SynthesisTarget::gate(&name, Unitary::new(parse_rows(&m)?)?))
        }
        other => Err(CliError::Usage(format!("target kind must be `state` or `gate`, got `{other}`"))),
    }
}

/// `U2(1,2);U3(1,2,3)`, with `+` joining simultaneous gates in one layer.
pub fn parse_sequence(text: &str) -> Result<Vec<Vec<Entangler>>, CliError> {
    let bad = |s: &str| CliError::Usage(format!("cannot parse entangler `{s}`; expected e.g. U2(1,2)"));
    let mut layers = Vec::new();
    for layer in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let mut ents = Vec::new();
        for item in layer.split('+').map(str::trim) {
            let open = item.find('(').ok_or_else(|| bad(item))?;
            let inner = item[open + 1..].strip_suffix(')').ok_or_else(|| bad(item))?;
            let tag = GateTag::parse(&item[..open])?;
            let qubits: Vec<u32> =
                inner.split(',').map(|q| q.trim().parse::<u32>()).collect::<Result<_, _>>().map_err(|_| bad(item))?;
            ents.push(Entangler::new(tag, &qubits)?);
        }
        layers.push(ents);
    }
    Ok(layers)
}

pub fn format_sequence(seq: &[Vec<Entangler>]) -> String {
    seq.iter()
        .map(|l| l.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("+"))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Serialize)]
struct GateJson {
    tag: String,
    qubits: Vec<u32>,
    layer: usize,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    target: &'a str,
    kind: &'a str,
    n_qubits: usize,
    depth: usize,
    gate_sequence: Vec<GateJson>,
    active: &'a [u32],
    angles: Vec<Num>,
    #[serde(skip_serializing_if = "Option::is_none")]
    angles_in_pi: Option<Vec<Num>>,
    objective: Num,
    seed: u64,
    restarts: usize,
    sequences_tried: usize,
    wall_time_ms: Option<Num>,
    converged: bool,
    norm: &'a str,
    notes: &'a [String],
}

/// JSON object for a report; `config` is embedded when given.
pub fn report_json(r: &SynthesisReport, angles_in_pi: bool) -> Value {
    let gate_sequence = r
        .gate_sequence
        .iter()
        .enumerate()
        .flat_map(|(layer, l)| l.iter().map(move |e| GateJson { tag: e.tag.to_string(), qubits: e.qubits.clone(), layer }))
        .collect();
    let j = ReportJson {
        target: &r.target,
        kind: r.kind,
        n_qubits: r.n_qubits,
        depth: r.depth,
        gate_sequence,
        active: &r.active,
        angles: nums(&r.angles),
        angles_in_pi: angles_in_pi.then(|| r.angles.iter().map(|a| Num(a / std::f64::consts::PI)).collect()),
        objective: Num(r.objective),
        seed: r.seed,
        restarts: r.restarts_used,
        sequences_tried: r.sequences_tried,
        wall_time_ms: r.wall_time_ms.map(Num),
        converged: r.converged,
        norm: r.norm,
        notes: &r.notes,
    };
    // Num writes raw tokens, so go through text to keep all 17 digits.
    serde_json::from_str(&serde_json::to_string(&j).expect("report serializes")).expect("valid JSON")
}

#[derive(Deserialize)]
struct GateIn {
    tag: String,
    qubits: Vec<u32>,
    layer: usize,
}

#[derive(Deserialize)]
struct ReportIn {
    target: String,
    kind: String,
    n_qubits: usize,
    depth: usize,
    gate_sequence: Vec<GateIn>,
    active: Vec<u32>,
    angles: Vec<f64>,
    objective: Option<f64>,
    seed: u64,
    restarts: usize,
    sequences_tried: usize,
    wall_time_ms: Option<f64>,
    converged: bool,
    #[serde(default)]
    notes: Vec<String>,
}

/// Reads a report written by [`report_json`]; angles come back bit-exact.
pub fn parse_report(text: &str) -> Result<SynthesisReport, CliError> {
    let r: ReportIn = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("bad report: {e}")))?;
    let mut layers: Vec<Vec<Entangler>> = vec![Vec::new(); r.depth];
    for g in r.gate_sequence {
        let slot = layers
            .get_mut(g.layer)
            .ok_or_else(|| CliError::Usage(format!("gate layer {} exceeds depth {}", g.layer, r.depth)))?;
        slot.push(Entangler::new(GateTag::parse(&g.tag)?, &g.qubits)?);
    }
    let kind = match r.kind.as_str() {
        "state" => "state",
        "gate" => "gate",
        other => return Err(CliError::Usage(format!("unknown report kind `{other}`"))),
    };
    Ok(SynthesisReport {
        target: r.target,
        kind,
        n_qubits: r.n_qubits,
        depth: r.depth,
        gate_sequence: layers,
        active: r.active,
        angles: r.angles,
        objective: r.objective.unwrap_or(f64::INFINITY),
        seed: r.seed,
        restarts_used: r.restarts,
        sequences_tried: r.sequences_tried,
        wall_time_ms: r.wall_time_ms,
        converged: r.converged,
        norm: "frobenius",
        notes: r.notes,
    })
}

pub fn matrix_json(m: &ComplexMatrix) -> Value {
    let rows: Vec<Vec<[Num; 2]>> = m.rows().map(|row| row.iter().map(|&z| complex(z)).collect()).collect();
    serde_json::from_str(&serde_json::to_string(&rows).expect("matrix serializes")).expect("valid JSON")
}

/// Target as a file `load_target` reads back.
pub fn target_json(t: &SynthesisTarget) -> Value {
    let vec_json = |s: &StateVector| -> Value {
        let v: Vec<[Num; 2]> = s.amplitudes().iter().map(|&z| complex(z)).collect();
        serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap()
    };
    match &t.payload {
        TargetPayload::State { state, input } => serde_json::json!({
            "name": t.name, "kind": "state", "amplitudes": vec_json(state), "input": vec_json(input),
        }),
        TargetPayload::Gate(u) => serde_json::json!({
            "name": t.name, "kind": "gate", "matrix": matrix_json(u.matrix()),
        }),
    }
}

/// Output directory: explicit flag, then `MEDGATE_OUT_DIR`, then `.`.
pub fn resolve_out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(crate::OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes `body` with the config echo under `"config"`.
pub fn write_json(path: &Path, config: &Value, mut body: Value) -> Result<(), CliError> {
    if let Value::Object(map) = &mut body {
        map.insert("config".into(), config.clone());
    }
    let text = serde_json::to_string_pretty(&body).map_err(|e| CliError::Io(e.into()))?;
    write_file(path, &(text + "\n"))
}

/// Writes a CSV table whose first line is `# config: <json>`.
pub fn write_csv(path: &Path, config: &Value, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.into()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.into()))?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Io(anyhow::anyhow!("{e}")))?)
        .map_err(|e| CliError::Io(e.into()))?;
    write_file(path, &format!("# config: {config}\n{body}"))
}

/// Reads a CSV written by [`write_csv`], skipping the config line.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let text = read(path)?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| CliError::Io(e.into()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| CliError::Io(e.into()))?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(e.into()))?;
    }
    fs::write(path, text).map_err(|e| CliError::Io(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}

pub fn cell(x: f64) -> String {
    fmt17(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_text_round_trip() {
        let text = "U2(1,2);U3(1,2,3);U2(1,2)+U2(3,4)";
        let seq = parse_sequence(text).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(seq[2].len(), 2);
        assert_eq!(format_sequence(&seq), text);
        assert!(parse_sequence("V2(1,2)").is_err());
        assert!(parse_sequence("U2(1,1)").is_err());
    }

    #[test]
    fn matrix_entries_real_or_pairs() {
        let m = parse_matrix_json("[[1, 0], [0, [0, 1]]]").unwrap();
        assert_eq!(m[(1, 1)], C64::new(0.0, 1.0));
        let w = parse_matrix_json(r#"{"matrix": [[0, 1], [1, 0]]}"#).unwrap();
        assert_eq!(w[(0, 1)], C64::new(1.0, 0.0));
        assert!(parse_matrix_json("[[1, 2], [3]]").is_err());
        assert!(parse_matrix_json("not json").is_err());
    }

    #[test]
    fn shorthand_names_resolve() {
        for n in ["cnot", "swap", "sqrtswap", "bgate", "toffoli", "u2", "u3"] {
            assert!(named_gate(n).is_some(), "{n}");
        }
        assert!(named_gate("nope").is_none());
    }
}
