//! Plain-text state files: a `d=<n>` header, then one `re im` line per
//! amplitude. Blank lines and `#` comments are skipped.

use hdbsm_core::{BasisShape, StateVector, MAX_DIM, MIN_DIM};
use num_complex::Complex64;

use crate::usage;

/// Largest tolerated `|‖ψ‖ − 1|`.
pub const NORM_TOL: f64 = 1e-6;

#[derive(Debug)]
pub struct ParsedState {
    pub state: StateVector,
    /// Norm before renormalization.
    pub norm: f64,
}

pub fn parse(text: &str) -> anyhow::Result<ParsedState> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (n, header) = lines.next().ok_or_else(|| usage("state file is empty"))?;
    let d: usize = header
        .strip_prefix("d=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| usage(format!("line {n}: expected header `d=<n>`, found `{header}`")))?;
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(usage(format!(
            "line {n}: dimension {d} outside {MIN_DIM}..={MAX_DIM}"
        )));
    }

    let expected = d.pow(4);
    let mut amps = Vec::with_capacity(expected);
    for (n, line) in lines {
        let mut fields = line.split_whitespace();
        let parsed = match (fields.next(), fields.next(), fields.next()) {
            (Some(re), Some(im), None) => re.parse::<f64>().ok().zip(im.parse::<f64>().ok()),
            _ => None,
        };
        let (re, im) =
            parsed.ok_or_else(|| usage(format!("line {n}: expected `re im`, found `{line}`")))?;
        if !re.is_finite() || !im.is_finite() {
            return Err(usage(format!("line {n}: non-finite amplitude")));
        }
        amps.push(Complex64::new(re, im));
    }
    if amps.len() != expected {
        return Err(usage(format!(
            "expected {expected} amplitudes for d={d}, found {}",
            amps.len()
        )));
    }

    let shape = BasisShape::uniform(d, 4).map_err(|e| usage(e.to_string()))?;
    let state = StateVector::new(shape, amps).map_err(|e| usage(e.to_string()))?;
    let norm = state.norm();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(usage(format!(
            "state is not normalized: norm {norm:.9}, deficit {:.3e} exceeds {NORM_TOL:e}",
            1.0 - norm
        )));
    }
    Ok(ParsedState {
        state: state.normalized(),
        norm,
    })
}
