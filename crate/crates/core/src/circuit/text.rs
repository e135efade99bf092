//! Line-oriented circuit text format.
//!
//! ```text
//! qubits 3
//! 0: h 0
//! 1: cx 0 1
//! 2: rx 2 1.500000000000
//! ```

use std::fmt::Write as _;

use super::circuit::{Circuit, Placement};
use super::gates::GateKind;
use crate::error::{Error, Result};

pub fn serialize(circuit: &Circuit) -> String {
    let mut out = format!("qubits {}\n", circuit.num_qubits());
    for (s, slot) in circuit.slots().iter().enumerate() {
        for p in slot {
            let _ = write!(out, "{s}: {}", p.kind);
            for q in &p.qubits {
                let _ = write!(out, " {q}");
            }
            if let Some(theta) = p.param {
                let _ = write!(out, " {theta:.12}");
            }
            out.push('\n');
        }
    }
    out
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated fields of a line with their 1-based starting columns.
fn fields(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push((s + 1, &line[s..i]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

pub fn parse(text: &str) -> Result<Circuit> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, 1, "empty document"))?;
    let num_qubits = match fields(header).as_slice() {
        [(_, "qubits"), (col, n)] => n
            .parse::<usize>()
            .map_err(|_| err(1, *col, format!("invalid qubit count '{n}'")))?,
        _ => return Err(err(1, 1, "expected header 'qubits <N>'")),
    };

    let mut slots: Vec<Vec<Placement>> = Vec::new();
    let mut last_slot = 0usize;
    for (lineno, line) in lines {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let f = fields(line);
        let (col, slot_tok) = f[0];
        let slot = slot_tok
            .strip_suffix(':')
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| err(lineno, col, format!("expected '<slot>:' but found '{slot_tok}'")))?;
        if slot < last_slot {
            return Err(err(lineno, col, "slots must be ascending"));
        }
        last_slot = slot;

        let (col, kind_tok) = *f
            .get(1)
            .ok_or_else(|| err(lineno, line.len() + 1, "missing gate name"))?;
        let kind: GateKind = kind_tok.parse().map_err(|e: String| err(lineno, col, e))?;
        let expected = 2 + kind.arity() + kind.num_params();
        if f.len() != expected {
            let col = f.get(expected).map_or(line.len() + 1, |(c, _)| *c);
            return Err(err(
                lineno,
                col,
                format!(
                    "'{kind}' takes {} qubit(s) and {} angle(s)",
                    kind.arity(),
                    kind.num_params()
                ),
            ));
        }
        let mut qubits = Vec::with_capacity(kind.arity());
        for &(col, tok) in &f[2..2 + kind.arity()] {
            qubits.push(
                tok.parse::<usize>()
                    .map_err(|_| err(lineno, col, format!("invalid qubit '{tok}'")))?,
            );
        }
        let param = match f.get(2 + kind.arity()) {
            Some(&(col, tok)) => Some(
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(lineno, col, format!("invalid angle '{tok}'")))?,
            ),
            None => None,
        };
        if slots.len() <= slot {
            slots.resize_with(slot + 1, Vec::new);
        }
        slots[slot].push(Placement::new(kind, qubits, param));
    }
    Ok(Circuit::from_slots(num_qubits, slots))
}
