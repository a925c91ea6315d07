//! Text format for context systems (`.obs` files).
//!
//! ```text
//! # Mermin square, first row
//! qubits 2
//! set X1, X2, X1 X2 = +1
//! ```
//!
//! A `qubits N` header precedes every `set` line. Each `set` lists
//! comma-separated observables in Pauli token syntax, optionally followed by
//! `= +1` or `= -1` (default `+1`). `#` starts a comment; blank lines are
//! skipped; LF and CRLF line endings are both accepted.

use std::fmt;

use thiserror::Error;

use crate::constructions::{Context, ContextSystem};
use crate::pauli::{ParsePauliError, PauliError, PauliOperator, MAX_QUBITS};
use crate::Outcome;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct DslError {
    pub line: usize,
    pub column: usize,
    pub kind: DslErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslErrorKind {
    #[error("expected `qubits N` before the first set")]
    MissingHeader,
    #[error("duplicate `qubits` declaration")]
    DuplicateHeader,
    #[error("`qubits` needs one integer in 1..={MAX_QUBITS}")]
    BadHeader,
    #[error("unknown keyword {0:?}")]
    UnknownKeyword(String),
    #[error("set has no observables")]
    EmptySet,
    #[error("empty observable between commas")]
    EmptyObservable,
    #[error("sign must be +1 or -1, found {0:?}")]
    BadSign(String),
    #[error("{0}")]
    Observable(ParsePauliError),
}

/// Char-based column (1-based) of byte offset `byte` within `line`.
fn column_of(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

fn err(line: usize, column: usize, kind: DslErrorKind) -> DslError {
    DslError { line, column, kind }
}

/// Parses a document into a context system. Validation is left to the caller.
pub fn parse_document(text: &str) -> Result<ContextSystem, DslError> {
    let mut qubits: Option<usize> = None;
    let mut contexts = Vec::new();

    for (idx, raw) in text.split('\n').enumerate() {
        let lineno = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let kw_start = content.len() - trimmed.len();
        let kw_end = trimmed.find(char::is_whitespace).map_or(content.len(), |p| kw_start + p);
        let keyword = &content[kw_start..kw_end];
        let rest = &content[kw_end..];

        match keyword {
            "qubits" => {
                if qubits.is_some() {
                    return Err(err(lineno, column_of(line, kw_start), DslErrorKind::DuplicateHeader));
                }
                let arg = rest.trim();
                let arg_col = column_of(line, kw_end + (rest.len() - rest.trim_start().len()));
                let n: usize = match arg.parse() {
                    Ok(n) if (1..=MAX_QUBITS).contains(&n) && !arg.starts_with('+') => n,
                    _ => return Err(err(lineno, arg_col, DslErrorKind::BadHeader)),
                };
                qubits = Some(n);
            }
            "set" => {
                let n = qubits.ok_or_else(|| err(lineno, column_of(line, kw_start), DslErrorKind::MissingHeader))?;
                contexts.push(parse_set(line, kw_end, rest, lineno, n)?);
            }
            other => {
                return Err(err(
                    lineno,
                    column_of(line, kw_start),
                    DslErrorKind::UnknownKeyword(other.to_string()),
                ))
            }
        }
    }

    let n = qubits.ok_or_else(|| err(1, 1, DslErrorKind::MissingHeader))?;
    Ok(ContextSystem::new(n, contexts).expect("parsed observables match the declared size"))
}

/// `body` is the text after `set`, starting at byte `offset` of `line`.
fn parse_set(line: &str, offset: usize, body: &str, lineno: usize, n: usize) -> Result<Context, DslError> {
    let (list, sign) = match body.rfind('=') {
        Some(eq) => {
            let sign_text = &body[eq + 1..];
            let sign_col = column_of(line, offset + eq + 1 + (sign_text.len() - sign_text.trim_start().len()));
            let sign = match sign_text.trim() {
                "+1" => Outcome::Plus,
                "-1" => Outcome::Minus,
                other => return Err(err(lineno, sign_col, DslErrorKind::BadSign(other.to_string()))),
            };
            (&body[..eq], sign)
        }
        None => (body, Outcome::Plus),
    };
    if list.trim().is_empty() {
        return Err(err(lineno, column_of(line, offset), DslErrorKind::EmptySet));
    }

    let mut observables = Vec::new();
    let mut item_start = 0;
    for item in list.split(',') {
        let item_offset = offset + item_start;
        item_start += item.len() + 1;
        if item.trim().is_empty() {
            return Err(err(lineno, column_of(line, item_offset), DslErrorKind::EmptyObservable));
        }
        let op = PauliOperator::parse(item, n).map_err(|e| {
            let column0 = column_of(line, item_offset) - 1;
            match e {
                PauliError::Parse(p) => {
                    let p = p.shift_column(column0);
                    let column = p.column().unwrap_or(column0 + 1);
                    err(lineno, column, DslErrorKind::Observable(p))
                }
                other => unreachable!("parse only fails with parse errors here: {other}"),
            }
        })?;
        observables.push(op);
    }
    Ok(Context::new(observables, sign))
}

/// Canonical text for `system`; [`parse_document`] reads it back unchanged.
pub fn serialize(system: &ContextSystem) -> String {
    let mut out = format!("qubits {}\n", system.num_qubits());
    for ctx in system.contexts() {
        let items: Vec<String> = ctx.observables.iter().map(|o| o.to_string()).collect();
        out.push_str(&format!("set {} = {}\n", items.join(", "), ctx.expected_sign));
    }
    out
}

/// Wrapper that renders a system in document form via `Display`.
pub struct Document<'a>(pub &'a ContextSystem);

impl fmt::Display for Document<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{generalized_sets, mermin_square};

    fn p(text: &str, n: usize) -> PauliOperator {
        PauliOperator::parse(text, n).unwrap()
    }

    #[test]
    fn one_set_default_sign() {
        let sys = parse_document("qubits 2\nset X1, X2, X1 X2 = +1").unwrap();
        assert_eq!(sys.num_qubits(), 2);
        assert_eq!(sys.contexts().len(), 1);
        let ctx = &sys.contexts()[0];
        assert_eq!(ctx.observables, vec![p("X1", 2), p("X2", 2), p("X1 X2", 2)]);
        assert_eq!(ctx.expected_sign, Outcome::Plus);

        let sys = parse_document("qubits 1\nset Z1").unwrap();
        assert_eq!(sys.contexts()[0].expected_sign, Outcome::Plus);
    }

    #[test]
    fn final_z_context() {
        let sys = parse_document("qubits 3\nset Z1, Z2, Z3, Z1 Z2 Z3 = +1").unwrap();
        assert_eq!(sys.contexts()[0], generalized_sets(3).unwrap().contexts()[4]);
    }

    #[test]
    fn index_beyond_header_points_at_token() {
        let e = parse_document("qubits 2\nset X3").unwrap_err();
        assert_eq!((e.line, e.column), (2, 5));
        assert!(matches!(
            e.kind,
            DslErrorKind::Observable(ParsePauliError::IndexOutOfRange { index: 3, .. })
        ));
        let e = parse_document("qubits 2\nset X1, X2 Z9 = -1").unwrap_err();
        assert_eq!((e.line, e.column), (2, 12));
    }

    #[test]
    fn header_errors() {
        assert_eq!(
            parse_document("qubits 2\nqubits 2\n").unwrap_err().kind,
            DslErrorKind::DuplicateHeader
        );
        assert_eq!(parse_document("set X1").unwrap_err().kind, DslErrorKind::MissingHeader);
        assert_eq!(parse_document("qubits 0").unwrap_err().kind, DslErrorKind::BadHeader);
        assert_eq!(parse_document("qubits two").unwrap_err().kind, DslErrorKind::BadHeader);
        assert_eq!(parse_document("qubits 2 3").unwrap_err().kind, DslErrorKind::BadHeader);
        assert_eq!(parse_document("").unwrap_err().kind, DslErrorKind::MissingHeader);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse_document("qubits 2\nset X1, , X2").unwrap_err();
        assert_eq!(e.kind, DslErrorKind::EmptyObservable);
        assert_eq!((e.line, e.column), (2, 8));
        let e = parse_document("qubits 2\nset X1 = 2").unwrap_err();
        assert_eq!(e.kind, DslErrorKind::BadSign("2".into()));
        assert_eq!(e.column, 10);
        let e = parse_document("qubits 2\n  sets X1").unwrap_err();
        assert_eq!(e.kind, DslErrorKind::UnknownKeyword("sets".into()));
        assert_eq!(e.column, 3);
        assert_eq!(parse_document("qubits 2\nset = -1").unwrap_err().kind, DslErrorKind::EmptySet);
    }

    #[test]
    fn comments_blank_lines_and_crlf() {
        let text = "# header\r\nqubits 2 # two qubits\r\n\r\n   \r\nset X1, X2, X1 X2 = +1 # row\r\n";
        let sys = parse_document(text).unwrap();
        assert_eq!(sys.contexts().len(), 1);
    }

    #[test]
    fn phased_observables_round_trip() {
        let text = "qubits 1\nset -i Y1, X1 = -1\n";
        let sys = parse_document(text).unwrap();
        assert_eq!(sys.contexts()[0].observables[0], p("X1 Z1", 1));
        assert_eq!(serialize(&sys), text);
    }

    #[test]
    fn serialize_shapes() {
        let sq = serialize(&mermin_square().unwrap());
        assert_eq!(sq.lines().filter(|l| l.starts_with("set ")).count(), 6);
        assert!(sq.contains("set X1 X2, Z1 Z2, Y1 Y2 = -1"));
        let g = serialize(&generalized_sets(3).unwrap());
        assert_eq!(g.lines().filter(|l| l.starts_with("set ")).count(), 5);
        let empty = ContextSystem::new(4, vec![]).unwrap();
        assert_eq!(serialize(&empty), "qubits 4\n");
        assert_eq!(parse_document(&serialize(&empty)).unwrap(), empty);
    }
}
