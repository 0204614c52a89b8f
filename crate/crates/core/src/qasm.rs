//! OpenQASM 2.0 interchange for the `{h, rx, rz, cx, measure}` gate set.
//!
//! OpenQASM 2.0 has no parameter variables, so free angles are emitted as
//! `0.0` and described by a trailing comment block that third-party readers
//! ignore:
//!
//! ```text
//! // PARAMS: gamma_1 beta_1
//! // PARAM 3 gamma_1 1.0000000000000000e0
//! ```
//!
//! The first line declares the parameters in order; each `PARAM` line says
//! that gate statement `3` (0-based, gates only) has angle
//! `1.0 * gamma_1`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::domain::{Angle, CircuitError, Gate, QuantumCircuit};

const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
const PARAMS_TAG: &str = "PARAMS:";
const PARAM_TAG: &str = "PARAM";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QasmError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown gate '{name}' at line {line}")]
    UnknownGate { name: String, line: usize },
    #[error("register size mismatch: qreg has {qreg} qubits, creg has {creg} bits")]
    RegisterMismatch { qreg: usize, creg: usize },
    #[error("qubit index {index} out of range for register of size {size} at line {line}")]
    QubitOutOfRange {
        index: usize,
        size: usize,
        line: usize,
    },
    #[error("unsupported measurement at line {line}: {message}")]
    Measurement { line: usize, message: String },
    #[error("malformed parameter block at line {line}: {message}")]
    Sidecar { line: usize, message: String },
    #[error("angle of gate {index} is not finite")]
    NonFiniteAngle { index: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

fn format_real(x: f64) -> String {
    // 17 significant digits round-trip every f64 exactly
    format!("{x:.16e}")
}

/// Renders `circuit` as an OpenQASM 2.0 program. Output is byte-identical
/// for equal circuits.
pub fn emit(circuit: &QuantumCircuit) -> Result<String, QasmError> {
    circuit.validate()?;
    let n = circuit.num_qubits;
    let mut out = String::from(HEADER);
    let _ = writeln!(out, "qreg q[{n}];");
    let _ = writeln!(out, "creg c[{n}];");

    let mut params = Vec::new();
    for (index, gate) in circuit.gates.iter().enumerate() {
        let angle_text = |angle: &Angle, params: &mut Vec<(usize, String, f64)>| match angle {
            Angle::Value(v) if v.is_finite() => Ok(format_real(*v)),
            Angle::Value(_) => Err(QasmError::NonFiniteAngle { index }),
            Angle::Param { param, scale } if scale.is_finite() => {
                params.push((index, param.clone(), *scale));
                Ok("0.0".to_string())
            }
            Angle::Param { .. } => Err(QasmError::NonFiniteAngle { index }),
        };
        match gate {
            Gate::H { qubit } => {
                let _ = writeln!(out, "h q[{qubit}];");
            }
            Gate::Rx { qubit, angle } => {
                let a = angle_text(angle, &mut params)?;
                let _ = writeln!(out, "rx({a}) q[{qubit}];");
            }
            Gate::Rz { qubit, angle } => {
                let a = angle_text(angle, &mut params)?;
                let _ = writeln!(out, "rz({a}) q[{qubit}];");
            }
            Gate::Cx { control, target } => {
                let _ = writeln!(out, "cx q[{control}],q[{target}];");
            }
        }
    }
    if circuit.measured {
        for k in 0..n {
            let _ = writeln!(out, "measure q[{k}] -> c[{k}];");
        }
    }
    if !circuit.parameters.is_empty() {
        let _ = writeln!(out, "// {PARAMS_TAG} {}", circuit.parameters.join(" "));
        for (index, name, scale) in params {
            let _ = writeln!(out, "// {PARAM_TAG} {index} {name} {}", format_real(scale));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexed {
    tokens: Vec<Token>,
    /// `(line, text after "//")` for every comment.
    comments: Vec<(usize, String)>,
}

fn lex(src: &str) -> Result<Lexed, QasmError> {
    let mut tokens = Vec::new();
    let mut comments = Vec::new();
    for (li, line) in src.lines().enumerate() {
        let lineno = li + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let push = |tokens: &mut Vec<Token>, tok| tokens.push(Token { tok, line: lineno, column });
            if c.is_whitespace() {
                i += 1;
            } else if c == '/' && chars.get(i + 1) == Some(&'/') {
                comments.push((lineno, chars[i + 2..].iter().collect()));
                break;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                push(&mut tokens, Tok::Ident(chars[start..i].iter().collect()));
            } else if c.is_ascii_digit() || c == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    i += 1;
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                        i += 1;
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                push(&mut tokens, Tok::Number(chars[start..i].iter().collect()));
            } else if c == '"' {
                let start = i + 1;
                let end = chars[start..]
                    .iter()
                    .position(|&ch| ch == '"')
                    .ok_or_else(|| QasmError::Syntax {
                        line: lineno,
                        column,
                        message: "unterminated string".into(),
                    })?;
                push(&mut tokens, Tok::Str(chars[start..start + end].iter().collect()));
                i = start + end + 1;
            } else {
                let sym = match (c, chars.get(i + 1)) {
                    ('-', Some('>')) => "->",
                    (';', _) => ";",
                    (',', _) => ",",
                    ('[', _) => "[",
                    (']', _) => "]",
                    ('(', _) => "(",
                    (')', _) => ")",
                    ('-', _) => "-",
                    _ => {
                        return Err(QasmError::Syntax {
                            line: lineno,
                            column,
                            message: format!("unexpected character '{c}'"),
                        })
                    }
                };
                i += sym.len();
                push(&mut tokens, Tok::Sym(sym));
            }
        }
    }
    Ok(Lexed { tokens, comments })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error_here(&self, message: impl Into<String>) -> QasmError {
        let (line, column) = self
            .peek()
            .map(|t| (t.line, t.column))
            .unwrap_or((self.last_line, 1));
        QasmError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<Token, QasmError> {
        let t = self
            .peek()
            .cloned()
            .ok_or_else(|| self.error_here("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<(), QasmError> {
        match self.peek() {
            Some(Token { tok: Tok::Sym(s), .. }) if *s == sym => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(QasmError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("expected '{sym}'"),
            }),
            None => Err(self.error_here(format!("expected '{sym}'"))),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize), QasmError> {
        let t = self.next()?;
        match t.tok {
            Tok::Ident(s) => Ok((s, t.line)),
            _ => Err(QasmError::Syntax {
                line: t.line,
                column: t.column,
                message: "expected identifier".into(),
            }),
        }
    }

    fn expect_index(&mut self) -> Result<usize, QasmError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Number(s) => s.parse().map_err(|_| QasmError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("expected integer, found '{s}'"),
            }),
            _ => Err(QasmError::Syntax {
                line: t.line,
                column: t.column,
                message: "expected integer".into(),
            }),
        }
    }

    fn real(&mut self) -> Result<f64, QasmError> {
        let negative = matches!(self.peek(), Some(Token { tok: Tok::Sym("-"), .. }));
        if negative {
            self.pos += 1;
        }
        let t = self.next()?;
        let value: f64 = match &t.tok {
            Tok::Number(s) => s.parse().map_err(|_| QasmError::Syntax {
                line: t.line,
                column: t.column,
                message: format!("invalid number '{s}'"),
            })?,
            _ => {
                return Err(QasmError::Syntax {
                    line: t.line,
                    column: t.column,
                    message: "expected decimal angle".into(),
                })
            }
        };
        Ok(if negative { -value } else { value })
    }

    /// `name[index]` against a register of `size`.
    fn operand(&mut self, register: &str, size: usize) -> Result<usize, QasmError> {
        let (name, line) = self.expect_ident()?;
        if name != register {
            return Err(QasmError::Syntax {
                line,
                column: self.tokens[self.pos - 1].column,
                message: format!("unknown register '{name}'"),
            });
        }
        self.expect_sym("[")?;
        let index = self.expect_index()?;
        self.expect_sym("]")?;
        if index >= size {
            return Err(QasmError::QubitOutOfRange { index, size, line });
        }
        Ok(index)
    }

    fn register_decl(&mut self, keyword: &str) -> Result<(String, usize), QasmError> {
        let (kw, _) = self.expect_ident()?;
        if kw != keyword {
            self.pos -= 1;
            return Err(self.error_here(format!("expected '{keyword}' declaration")));
        }
        let (name, _) = self.expect_ident()?;
        self.expect_sym("[")?;
        let size = self.expect_index()?;
        self.expect_sym("]")?;
        self.expect_sym(";")?;
        Ok((name, size))
    }
}

/// Parses a program in the supported subset back into a circuit.
pub fn parse(src: &str) -> Result<QuantumCircuit, QasmError> {
    let lexed = lex(src)?;
    let mut p = Parser {
        last_line: src.lines().count().max(1),
        tokens: lexed.tokens,
        pos: 0,
    };

    let (kw, _) = p.expect_ident().map_err(|_| p.error_here("expected 'OPENQASM 2.0;'"))?;
    if kw != "OPENQASM" {
        p.pos -= 1;
        return Err(p.error_here("expected 'OPENQASM 2.0;'"));
    }
    match p.next()?.tok {
        Tok::Number(v) if v == "2.0" => {}
        _ => {
            p.pos -= 1;
            return Err(p.error_here("only OpenQASM 2.0 is supported"));
        }
    }
    p.expect_sym(";")?;
    if matches!(p.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == "include") {
        p.pos += 1;
        match p.next()?.tok {
            Tok::Str(_) => {}
            _ => {
                p.pos -= 1;
                return Err(p.error_here("expected include path"));
            }
        }
        p.expect_sym(";")?;
    }
    let (qname, n) = p.register_decl("qreg")?;
    let (cname, m) = p.register_decl("creg")?;
    if n != m {
        return Err(QasmError::RegisterMismatch { qreg: n, creg: m });
    }

    let mut gates = Vec::new();
    let mut measured_order = Vec::new();
    while let Some(tok) = p.peek().cloned() {
        let (name, line) = p.expect_ident().map_err(|_| QasmError::Syntax {
            line: tok.line,
            column: tok.column,
            message: "expected statement".into(),
        })?;
        if name == "measure" {
            let q = p.operand(&qname, n)?;
            p.expect_sym("->")?;
            let c = p.operand(&cname, m)?;
            p.expect_sym(";")?;
            if q != c || q != measured_order.len() {
                return Err(QasmError::Measurement {
                    line,
                    message: "qubits must be measured in order into matching bits".into(),
                });
            }
            measured_order.push(q);
            continue;
        }
        if !measured_order.is_empty() {
            return Err(QasmError::Measurement {
                line,
                message: "gates after measurement are not supported".into(),
            });
        }
        let gate = match name.as_str() {
            "h" => Gate::H { qubit: p.operand(&qname, n)? },
            "rx" | "rz" => {
                p.expect_sym("(")?;
                let angle = Angle::Value(p.real()?);
                p.expect_sym(")")?;
                let qubit = p.operand(&qname, n)?;
                if name == "rx" {
                    Gate::Rx { qubit, angle }
                } else {
                    Gate::Rz { qubit, angle }
                }
            }
            "cx" => {
                let control = p.operand(&qname, n)?;
                p.expect_sym(",")?;
                let target = p.operand(&qname, n)?;
                Gate::Cx { control, target }
            }
            _ => return Err(QasmError::UnknownGate { name, line }),
        };
        p.expect_sym(";")?;
        gates.push(gate);
    }
    if !measured_order.is_empty() && measured_order.len() != n {
        return Err(QasmError::Measurement {
            line: p.last_line,
            message: format!("{} of {n} qubits measured", measured_order.len()),
        });
    }

    let mut circuit = QuantumCircuit::new(n);
    circuit.measured = !measured_order.is_empty();
    apply_sidecar(&lexed.comments, &mut circuit, &mut gates)?;
    for g in gates {
        circuit.push(g)?;
    }
    Ok(circuit)
}

fn apply_sidecar(
    comments: &[(usize, String)],
    circuit: &mut QuantumCircuit,
    gates: &mut [Gate],
) -> Result<(), QasmError> {
    let mut declared = false;
    for (line, text) in comments {
        let mut words = text.split_whitespace();
        match words.next() {
            Some(PARAMS_TAG) => {
                if declared {
                    return Err(QasmError::Sidecar {
                        line: *line,
                        message: "parameters declared twice".into(),
                    });
                }
                declared = true;
                for name in words {
                    circuit.declare_parameter(name).map_err(|e| QasmError::Sidecar {
                        line: *line,
                        message: e.to_string(),
                    })?;
                }
            }
            Some(PARAM_TAG) => {
                let bad = |message: &str| QasmError::Sidecar {
                    line: *line,
                    message: message.into(),
                };
                if !declared {
                    return Err(bad("PARAM before PARAMS declaration"));
                }
                let index: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| bad("expected statement index"))?;
                let name = words.next().ok_or_else(|| bad("expected parameter name"))?;
                let scale: f64 = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| bad("expected scale"))?;
                if words.next().is_some() {
                    return Err(bad("trailing tokens"));
                }
                if !circuit.parameters.iter().any(|p| p == name) {
                    return Err(bad(&format!("undeclared parameter '{name}'")));
                }
                let angle = match gates.get_mut(index) {
                    Some(Gate::Rx { angle, .. } | Gate::Rz { angle, .. }) => angle,
                    Some(_) => return Err(bad(&format!("statement {index} has no angle"))),
                    None => return Err(bad(&format!("statement {index} does not exist"))),
                };
                *angle = Angle::param(name, scale);
            }
            // ordinary comment
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;
    use crate::domain::IsingModel;
    use crate::qaoa::build_qaoa_circuit;

    fn program(body: &str) -> String {
        format!("{HEADER}qreg q[3];\ncreg c[3];\n{body}")
    }

    #[test]
    fn single_gate_program() {
        let mut c = QuantumCircuit::new(1);
        c.push(Gate::H { qubit: 0 }).unwrap();
        assert_eq!(
            emit(&c).unwrap(),
            "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\ncreg c[1];\nh q[0];\n"
        );
    }

    #[test]
    fn single_edge_ansatz_sidecar() {
        let mut m = IsingModel::new(2);
        m.add_coupling(0, 1, 0.5);
        let c = build_qaoa_circuit(&m, 1).unwrap();
        let text = emit(&c).unwrap();
        let gate_lines = text
            .lines()
            .skip(4)
            .filter(|l| !l.starts_with("//"))
            .count();
        assert_eq!(gate_lines, 7);
        assert!(text.contains("// PARAMS: gamma_1 beta_1\n"));
        assert!(text.contains("// PARAM 3 gamma_1 1.0000000000000000e0\n"));
        assert!(text.contains("// PARAM 5 beta_1 2.0000000000000000e0\n"));
        assert!(text.contains("// PARAM 6 beta_1 2.0000000000000000e0\n"));
        assert_eq!(parse(&text).unwrap(), c);
    }

    #[test]
    fn parse_h() {
        let c = parse(&program("h q[0];\n")).unwrap();
        assert_eq!(c.gates, vec![Gate::H { qubit: 0 }]);
        assert_eq!(c.num_qubits, 3);
        assert!(!c.measured);
    }

    #[test]
    fn parse_literal_angle() {
        let c = parse(&program("rz(1.5707963267948966) q[2];\n")).unwrap();
        match &c.gates[0] {
            Gate::Rz { qubit: 2, angle: Angle::Value(v) } => assert!((v - FRAC_PI_2).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        let c = parse(&program("rx(-2.5e-1) q[1];\n")).unwrap();
        assert_eq!(c.gates[0], Gate::Rx { qubit: 1, angle: Angle::Value(-0.25) });
    }

    #[test]
    fn unknown_gate_reports_line() {
        let err = parse(&program("h q[0];\ncz q[0],q[1];\n")).unwrap_err();
        assert_eq!(err, QasmError::UnknownGate { name: "cz".into(), line: 6 });
        assert_eq!(err.to_string(), "unknown gate 'cz' at line 6");
    }

    #[test]
    fn register_errors() {
        let src = format!("{HEADER}qreg q[2];\ncreg c[3];\n");
        assert_eq!(parse(&src), Err(QasmError::RegisterMismatch { qreg: 2, creg: 3 }));
        assert!(matches!(
            parse(&program("h q[3];\n")),
            Err(QasmError::QubitOutOfRange { index: 3, size: 3, line: 5 })
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse(&program("h q[0]\nh q[1];\n")) {
            Err(QasmError::Syntax { line, column, .. }) => assert_eq!((line, column), (6, 1)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse("OPENQASM 3.0;\n"),
            Err(QasmError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse(&program("rx(pi) q[0];\n")),
            Err(QasmError::Syntax { line: 5, .. })
        ));
    }

    #[test]
    fn measurements_round_trip() {
        let mut c = QuantumCircuit::new(2);
        c.push(Gate::H { qubit: 0 }).unwrap();
        c.push(Gate::Cx { control: 0, target: 1 }).unwrap();
        c.measured = true;
        let text = emit(&c).unwrap();
        assert!(text.ends_with("measure q[0] -> c[0];\nmeasure q[1] -> c[1];\n"));
        assert_eq!(parse(&text).unwrap(), c);
        let partial = text.replace("measure q[1] -> c[1];\n", "");
        assert!(matches!(parse(&partial), Err(QasmError::Measurement { .. })));
    }

    #[test]
    fn sidecar_must_name_declared_parameters() {
        let src = program("rz(0.0) q[0];\n// PARAMS: gamma_1\n// PARAM 0 beta_1 2.0\n");
        assert!(matches!(parse(&src), Err(QasmError::Sidecar { line: 7, .. })));
        let src = program("h q[0];\n// PARAMS: gamma_1\n// PARAM 0 gamma_1 2.0\n");
        assert!(matches!(parse(&src), Err(QasmError::Sidecar { .. })));
    }

    #[test]
    fn unused_parameters_survive() {
        let mut c = QuantumCircuit::new(1);
        c.declare_parameter("gamma_1").unwrap();
        c.declare_parameter("beta_1").unwrap();
        c.push(Gate::H { qubit: 0 }).unwrap();
        c.push(Gate::Rx { qubit: 0, angle: Angle::param("beta_1", 2.0) }).unwrap();
        assert_eq!(parse(&emit(&c).unwrap()).unwrap(), c);
    }

    #[test]
    fn non_finite_angles_are_refused() {
        let mut c = QuantumCircuit::new(1);
        c.push(Gate::Rx { qubit: 0, angle: Angle::Value(f64::NAN) }).unwrap();
        assert_eq!(emit(&c), Err(QasmError::NonFiniteAngle { index: 0 }));
    }
}
