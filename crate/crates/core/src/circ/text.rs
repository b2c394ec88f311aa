//! Line-oriented circuit text format.
//!
//! ```text
//! # comment
//! qubits 3
//! role q0 state
//! ry(-0.5003932626860825) q2
//! h q0
//! cx q0 q1
//! measure q0
//! ```

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::{Circuit, CliffordT, Gate, Role};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    MissingHeader,
    BadHeader,
    UnknownGate(String),
    BadQubit(String),
    BadAngle(String),
    WrongArity { expected: usize, found: usize },
    IndexOverflow { index: usize, n_qubits: usize },
    EqualControlTarget,
    UnknownRole(String),
    GateAfterMeasure,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::MissingHeader => f.write_str("expected `qubits <n>` header"),
            ParseErrorKind::BadHeader => f.write_str("malformed `qubits <n>` header"),
            ParseErrorKind::UnknownGate(g) => write!(f, "unknown gate `{g}`"),
            ParseErrorKind::BadQubit(q) => write!(f, "expected qubit like `q0`, found `{q}`"),
            ParseErrorKind::BadAngle(a) => write!(f, "malformed angle `{a}`"),
            ParseErrorKind::WrongArity { expected, found } => {
                write!(f, "expected {expected} operand(s), found {found}")
            }
            ParseErrorKind::IndexOverflow { index, n_qubits } => {
                write!(f, "qubit q{index} out of range for {n_qubits} qubits")
            }
            ParseErrorKind::EqualControlTarget => f.write_str("CNOT control equals target"),
            ParseErrorKind::UnknownRole(r) => write!(f, "unknown role `{r}`"),
            ParseErrorKind::GateAfterMeasure => f.write_str("gate after terminal measurement"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = line.split('#').next().unwrap_or("");
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in code.char_indices() {
        match (ch.is_whitespace(), start) {
            (true, Some(s)) => {
                tokens.push(Token {
                    text: &code[s..i],
                    column: code[..s].chars().count() + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &code[s..],
            column: code[..s].chars().count() + 1,
        });
    }
    tokens
}

pub fn parse_text(source: &str) -> Result<Circuit, ParseError> {
    let mut circuit: Option<Circuit> = None;
    let mut measuring = false;

    for (line_idx, line) in source.lines().enumerate() {
        let line_no = line_idx + 1;
        let tokens = tokenize(line);
        let Some(head) = tokens.first() else { continue };
        let err = |column: usize, kind: ParseErrorKind| ParseError {
            line: line_no,
            column,
            kind,
        };

        let Some(c) = circuit.as_mut() else {
            if head.text != "qubits" {
                return Err(err(head.column, ParseErrorKind::MissingHeader));
            }
            let n = match tokens.as_slice() {
                [_, n] => n
                    .text
                    .parse::<usize>()
                    .map_err(|_| err(n.column, ParseErrorKind::BadHeader))?,
                _ => return Err(err(head.column, ParseErrorKind::BadHeader)),
            };
            circuit = Some(Circuit::new(n));
            continue;
        };
        let n_qubits = c.n_qubits();
        let operands = &tokens[1..];
        let arity = |expected: usize| {
            if operands.len() == expected {
                Ok(())
            } else {
                Err(err(
                    head.column,
                    ParseErrorKind::WrongArity {
                        expected,
                        found: operands.len(),
                    },
                ))
            }
        };
        let qubit = |tok: &Token<'_>| -> Result<usize, ParseError> {
            let index = tok
                .text
                .strip_prefix('q')
                .and_then(|d| d.parse::<usize>().ok())
                .ok_or_else(|| err(tok.column, ParseErrorKind::BadQubit(tok.text.to_string())))?;
            if index >= n_qubits {
                return Err(err(
                    tok.column,
                    ParseErrorKind::IndexOverflow { index, n_qubits },
                ));
            }
            Ok(index)
        };

        match head.text {
            "role" => {
                arity(2)?;
                let q = qubit(&operands[0])?;
                let role = Role::from_name(operands[1].text).ok_or_else(|| {
                    err(
                        operands[1].column,
                        ParseErrorKind::UnknownRole(operands[1].text.to_string()),
                    )
                })?;
                c.roles.insert(q, role);
            }
            "measure" => {
                arity(1)?;
                let q = qubit(&operands[0])?;
                c.measured.push(q);
                measuring = true;
            }
            _ if measuring => return Err(err(head.column, ParseErrorKind::GateAfterMeasure)),
            "cx" => {
                arity(2)?;
                let control = qubit(&operands[0])?;
                let target = qubit(&operands[1])?;
                if control == target {
                    return Err(err(operands[1].column, ParseErrorKind::EqualControlTarget));
                }
                c.gates.push(Gate::cnot(control, target));
            }
            name if name.starts_with("ry(") => {
                let inner = name
                    .strip_prefix("ry(")
                    .and_then(|s| s.strip_suffix(')'))
                    .ok_or_else(|| err(head.column, ParseErrorKind::BadAngle(name.to_string())))?;
                let angle = inner
                    .parse::<f64>()
                    .ok()
                    .filter(|a| a.is_finite())
                    .ok_or_else(|| {
                        err(head.column + 3, ParseErrorKind::BadAngle(inner.to_string()))
                    })?;
                arity(1)?;
                c.gates.push(Gate::ry(qubit(&operands[0])?, angle));
            }
            name => {
                let op = CliffordT::from_name(name).ok_or_else(|| {
                    err(head.column, ParseErrorKind::UnknownGate(name.to_string()))
                })?;
                arity(1)?;
                c.gates.push(op.on(qubit(&operands[0])?));
            }
        }
    }
    circuit.ok_or(ParseError {
        line: source.lines().count().max(1),
        column: 1,
        kind: ParseErrorKind::MissingHeader,
    })
}

/// Serializes a circuit. Angles use the shortest decimal form that parses
/// back to the identical `f64`.
pub fn emit_text(circuit: &Circuit) -> String {
    let mut out = String::new();
    writeln!(out, "qubits {}", circuit.n_qubits()).unwrap();
    for (q, role) in circuit.roles() {
        writeln!(out, "role q{q} {}", role.name()).unwrap();
    }
    for gate in circuit.gates() {
        match *gate {
            Gate::Single { op, qubit } => writeln!(out, "{op} q{qubit}"),
            Gate::Ry { qubit, angle } => writeln!(out, "ry({angle:?}) q{qubit}"),
            Gate::Cnot { control, target } => writeln!(out, "cx q{control} q{target}"),
        }
        .unwrap();
    }
    for q in circuit.measured() {
        writeln!(out, "measure q{q}").unwrap();
    }
    out
}
