//! File helpers: atomic writes, trial-state text files and numeric CSV input.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use gonogo_core::fermion::{parse_fcidump, MolecularIntegrals};
use gonogo_core::pauli::StateVector;
use num_complex::Complex64;

use crate::CliError;

/// Writes `contents` through a sibling temporary file so readers never see a
/// truncated result.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    fs::write(&tmp, contents).map_err(|e| CliError::compute(format!("writing {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::compute(format!("renaming to {}: {e}", path.display())))
}

/// Creates the output directory if needed.
pub fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))
}

/// Appends `.partial` to the file name.
pub fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))
}

pub fn load_fcidump(path: &Path) -> Result<MolecularIntegrals, CliError> {
    let text = read_input(path)?;
    parse_fcidump(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

/// Name used in reports: the file stem.
pub fn molecule_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// `qubits: n` followed by one `re im` line per amplitude, big-endian index
/// order; values carry enough digits to round-trip exactly.
pub fn state_to_text(state: &StateVector) -> String {
    let mut out = format!("qubits: {}\n", state.n_qubits());
    for a in state.amplitudes() {
        let _ = writeln!(out, "{:.17e} {:.17e}", a.re, a.im);
    }
    out
}

pub fn parse_state(text: &str) -> Result<StateVector, CliError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (_, header) = lines.next().ok_or_else(|| CliError::usage("empty state file"))?;
    let n: usize = header
        .trim()
        .strip_prefix("qubits:")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| CliError::usage(format!("state file must start with `qubits: n`, got {header:?}")))?;
    if n > gonogo_core::pauli::MAX_STATE_QUBITS {
        return Err(CliError::usage(format!("state file declares {n} qubits")));
    }
    let mut amps = Vec::with_capacity(1 << n);
    for (i, line) in lines {
        let mut it = line.split_whitespace().map(str::parse::<f64>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(re)), Some(Ok(im)), None) if re.is_finite() && im.is_finite() => amps.push(Complex64::new(re, im)),
            _ => return Err(CliError::usage(format!("state file line {}: expected `re im`", i + 1))),
        }
    }
    if amps.len() != 1 << n {
        return Err(CliError::usage(format!(
            "state file has {} amplitudes, {n} qubits need {}",
            amps.len(),
            1usize << n
        )));
    }
    StateVector::from_amplitudes(n, amps).map_err(|e| CliError::usage(format!("state file: {e}")))
}

/// Reads two numeric columns; a non-numeric first row is taken as a header.
/// Blank lines and `#` comments are skipped.
pub fn read_columns(text: &str, x_col: usize, y_col: usize) -> Result<Vec<(f64, f64)>, CliError> {
    let mut out = Vec::new();
    let mut seen_row = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |c: usize| fields.get(c).map(|s| s.parse::<f64>());
        match (get(x_col), get(y_col)) {
            (Some(Ok(x)), Some(Ok(y))) if x.is_finite() && y.is_finite() => out.push((x, y)),
            (Some(Err(_)), _) | (_, Some(Err(_))) if !seen_row => {}
            _ => {
                return Err(CliError::usage(format!(
                    "line {}: expected finite numbers in columns {x_col} and {y_col}, got {line:?}",
                    i + 1
                )))
            }
        }
        seen_row = true;
    }
    if out.is_empty() {
        return Err(CliError::usage("no data rows"));
    }
    Ok(out)
}
