//! Circuit IR, the supported OpenQASM 2.0 subset, and ASAP timeslicing.
//!
//! Only circuit *structure* matters downstream: which qubits each gate touches
//! and whether it is a one- or two-qubit gate. Labels and angles are carried
//! as opaque payload so that circuits survive a serialize/parse round trip.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

/// One-qubit gate mnemonics accepted by the parser.
pub const ONE_QUBIT_GATES: &[&str] = &[
    "h", "x", "y", "z", "s", "sdg", "t", "tdg", "rx", "ry", "rz", "u1", "u2", "u3",
];

/// Two-qubit gate mnemonics accepted by the parser.
pub const TWO_QUBIT_GATES: &[&str] = &["cx", "cz", "cp", "crz", "swap"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    OneQubit,
    TwoQubit,
}

/// Qubit operands of a gate. Two-qubit operands are ordered (control first).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operands {
    One(usize),
    Two(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub label: String,
    pub operands: Operands,
    pub params: Vec<f64>,
}

impl Gate {
    pub fn one(label: impl Into<String>, q: usize) -> Self {
        Gate {
            label: label.into(),
            operands: Operands::One(q),
            params: Vec::new(),
        }
    }

    pub fn two(label: impl Into<String>, a: usize, b: usize) -> Self {
        Gate {
            label: label.into(),
            operands: Operands::Two(a, b),
            params: Vec::new(),
        }
    }

    pub fn with_params(mut self, params: Vec<f64>) -> Self {
        self.params = params;
        self
    }

    pub fn kind(&self) -> GateKind {
        match self.operands {
            Operands::One(_) => GateKind::OneQubit,
            Operands::Two(..) => GateKind::TwoQubit,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind() == GateKind::TwoQubit
    }

    /// Qubit indices in operand order.
    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let (first, second) = match self.operands {
            Operands::One(q) => (q, None),
            Operands::Two(a, b) => (a, Some(b)),
        };
        std::iter::once(first).chain(second)
    }

    /// The unordered qubit pair of a two-qubit gate.
    pub fn pair(&self) -> Option<QubitPair> {
        match self.operands {
            Operands::Two(a, b) => Some(QubitPair::new(a, b)),
            Operands::One(_) => None,
        }
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.qubits().any(|x| x == q)
    }
}

/// Unordered pair of distinct qubits, stored as `(low, high)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitPair(usize, usize);

impl QubitPair {
    pub fn new(a: usize, b: usize) -> Self {
        debug_assert_ne!(a, b, "qubit pair endpoints must differ");
        if a < b {
            QubitPair(a, b)
        } else {
            QubitPair(b, a)
        }
    }

    pub fn low(&self) -> usize {
        self.0
    }

    pub fn high(&self) -> usize {
        self.1
    }

    pub fn contains(&self, q: usize) -> bool {
        self.0 == q || self.1 == q
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("a circuit needs at least one qubit")]
    NoQubits,
    #[error("gate {index} (`{label}`) uses qubit {qubit} but the circuit has {num_qubits} qubits")]
    QubitOutOfRange {
        index: usize,
        label: String,
        qubit: usize,
        num_qubits: usize,
    },
    #[error("gate {index} (`{label}`) repeats qubit {qubit}")]
    DuplicateQubit {
        index: usize,
        label: String,
        qubit: usize,
    },
}

/// An ordered gate list over `num_qubits` logical qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        let mut circuit = Circuit {
            num_qubits,
            gates: Vec::with_capacity(gates.len()),
        };
        for gate in gates {
            circuit.push(gate)?;
        }
        Ok(circuit)
    }

    pub fn empty(num_qubits: usize) -> Result<Self, CircuitError> {
        Self::new(num_qubits, Vec::new())
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        let index = self.gates.len();
        for q in gate.qubits() {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    index,
                    label: gate.label.clone(),
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if let Operands::Two(a, b) = gate.operands {
            if a == b {
                return Err(CircuitError::DuplicateQubit {
                    index,
                    label: gate.label.clone(),
                    qubit: a,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn num_two_qubit_gates(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }
}

/// A set of gates acting on pairwise-disjoint qubits.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timeslice {
    gates: Vec<Gate>,
}

impl Timeslice {
    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// One pair per two-qubit gate, in gate order.
    pub fn interacting_pairs(&self) -> Vec<QubitPair> {
        self.gates.iter().filter_map(Gate::pair).collect()
    }

    pub fn acts_on(&self, q: usize) -> bool {
        self.gates.iter().any(|g| g.acts_on(q))
    }

    /// `partners[q]` is the other endpoint of the two-qubit gate on `q`, if any.
    pub fn partners(&self, num_qubits: usize) -> Vec<Option<usize>> {
        let mut partners = vec![None; num_qubits];
        for pair in self.interacting_pairs() {
            partners[pair.low()] = Some(pair.high());
            partners[pair.high()] = Some(pair.low());
        }
        partners
    }

    /// Marks every qubit touched by any gate of the slice.
    pub fn busy(&self, num_qubits: usize) -> Vec<bool> {
        let mut busy = vec![false; num_qubits];
        for q in self.gates.iter().flat_map(Gate::qubits) {
            busy[q] = true;
        }
        busy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeslicedCircuit {
    num_qubits: usize,
    slices: Vec<Timeslice>,
}

impl TimeslicedCircuit {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn slices(&self) -> &[Timeslice] {
        &self.slices
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn slice(&self, t: usize) -> &Timeslice {
        &self.slices[t]
    }
}

/// Greedy ASAP layering: each gate lands one slice after the latest slice
/// that already holds one of its qubits.
pub fn timeslice(circuit: &Circuit) -> TimeslicedCircuit {
    let mut next_free = vec![0usize; circuit.num_qubits()];
    let mut slices: Vec<Timeslice> = Vec::new();
    for gate in circuit.gates() {
        let level = gate.qubits().map(|q| next_free[q]).max().unwrap_or(0);
        if level == slices.len() {
            slices.push(Timeslice::default());
        }
        slices[level].gates.push(gate.clone());
        for q in gate.qubits() {
            next_free[q] = level + 1;
        }
    }
    TimeslicedCircuit {
        num_qubits: circuit.num_qubits(),
        slices,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QasmErrorKind {
    Syntax(String),
    Unsupported(String),
    UnknownRegister(String),
    QubitOutOfRange {
        register: String,
        index: usize,
        width: usize,
    },
    DuplicateQubit(usize),
    NoQubits,
}

impl fmt::Display for QasmErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QasmErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            QasmErrorKind::Unsupported(what) => write!(f, "unsupported statement: {what}"),
            QasmErrorKind::UnknownRegister(name) => write!(f, "unknown register `{name}`"),
            QasmErrorKind::QubitOutOfRange {
                register,
                index,
                width,
            } => write!(f, "qubit {register}[{index}] out of range (width {width})"),
            QasmErrorKind::DuplicateQubit(q) => write!(f, "duplicate qubit {q} in gate"),
            QasmErrorKind::NoQubits => write!(f, "program declares no qubits"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct QasmError {
    pub line: usize,
    pub column: usize,
    pub kind: QasmErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, QasmError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, msg: String| QasmError {
        line,
        column,
        kind: QasmErrorKind::Syntax(msg),
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col, start_idx) = (line, col, i);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit))
        {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            if real {
                Tok::Real(
                    s.parse()
                        .map_err(|_| err(start_line, start_col, format!("bad number `{s}`")))?,
                )
            } else {
                Tok::Int(
                    s.parse()
                        .map_err(|_| err(start_line, start_col, format!("bad integer `{s}`")))?,
                )
            }
        } else if c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(err(start_line, start_col, "unterminated string".into()));
            }
            let s = chars[start..i].iter().collect();
            i += 1;
            Tok::Str(s)
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            Tok::Arrow
        } else if "()[];,+-*/^{}".contains(c) {
            i += 1;
            Tok::Sym(c)
        } else {
            return Err(err(
                start_line,
                start_col,
                format!("unexpected character `{c}`"),
            ));
        };
        col += i - start_idx;
        tokens.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    Ok(tokens)
}

fn expected_params(label: &str) -> usize {
    match label {
        "rx" | "ry" | "rz" | "u1" | "cp" | "crz" => 1,
        "u2" => 2,
        "u3" => 3,
        _ => 0,
    }
}

struct Register {
    offset: usize,
    width: usize,
}

/// A gate argument: either one qubit or a whole register.
enum Arg {
    Qubit(usize),
    Register(usize, usize),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    qregs: HashMap<String, Register>,
    cregs: HashMap<String, usize>,
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.tokens.get(self.pos).or_else(|| self.tokens.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        }
    }

    fn error(&self, kind: QasmErrorKind) -> QasmError {
        let (line, column) = self.here();
        QasmError { line, column, kind }
    }

    fn syntax(&self, msg: impl Into<String>) -> QasmError {
        self.error(QasmErrorKind::Syntax(msg.into()))
    }

    fn next(&mut self) -> Result<Tok, QasmError> {
        let tok = self
            .tokens
            .get(self.pos)
            .map(|t| t.tok.clone())
            .ok_or_else(|| self.syntax("unexpected end of input"))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.syntax(format!("expected `{c}`"))),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, QasmError> {
        match self.peek() {
            Some(Tok::Ident(name)) => {
                let name = name.clone();
                self.pos += 1;
                Ok(name)
            }
            _ => Err(self.syntax("expected identifier")),
        }
    }

    fn int(&mut self) -> Result<usize, QasmError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v as usize;
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.syntax("expected integer")),
        }
    }

    fn program(&mut self) -> Result<(), QasmError> {
        if matches!(self.peek(), Some(Tok::Ident(k)) if k == "OPENQASM") {
            self.pos += 1;
            match self.next()? {
                Tok::Real(2.0) => {}
                Tok::Int(2) => {}
                _ => {
                    self.pos -= 1;
                    return Err(self.error(QasmErrorKind::Unsupported(
                        "only OPENQASM 2.0 is supported".into(),
                    )));
                }
            }
            self.expect_sym(';')?;
        }
        while self.pos < self.tokens.len() {
            self.statement()?;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), QasmError> {
        let start = self.pos;
        let keyword = self.ident()?;
        match keyword.as_str() {
            "include" => {
                match self.next()? {
                    Tok::Str(path) if path == "qelib1.inc" => {}
                    Tok::Str(path) => {
                        self.pos -= 1;
                        return Err(
                            self.error(QasmErrorKind::Unsupported(format!("include \"{path}\"")))
                        );
                    }
                    _ => {
                        self.pos -= 1;
                        return Err(self.syntax("expected file name string"));
                    }
                }
                self.expect_sym(';')
            }
            "qreg" | "creg" => {
                let name = self.ident()?;
                self.expect_sym('[')?;
                let width = self.int()?;
                self.expect_sym(']')?;
                self.expect_sym(';')?;
                if self.qregs.contains_key(&name) || self.cregs.contains_key(&name) {
                    self.pos = start;
                    return Err(self.syntax(format!("register `{name}` redeclared")));
                }
                if keyword == "qreg" {
                    self.qregs.insert(
                        name,
                        Register {
                            offset: self.num_qubits,
                            width,
                        },
                    );
                    self.num_qubits += width;
                } else {
                    self.cregs.insert(name, width);
                }
                Ok(())
            }
            "measure" => {
                self.qarg()?;
                match self.next()? {
                    Tok::Arrow => {}
                    _ => {
                        self.pos -= 1;
                        return Err(self.syntax("expected `->`"));
                    }
                }
                self.carg()?;
                self.expect_sym(';')
            }
            "barrier" => {
                self.qarg()?;
                while self.eat_sym(',') {
                    self.qarg()?;
                }
                self.expect_sym(';')
            }
            name if ONE_QUBIT_GATES.contains(&name) || TWO_QUBIT_GATES.contains(&name) => {
                self.gate(name.to_string(), start)
            }
            other => {
                self.pos = start;
                Err(self.error(QasmErrorKind::Unsupported(format!("`{other}`"))))
            }
        }
    }

    fn gate(&mut self, label: String, start: usize) -> Result<(), QasmError> {
        let mut params = Vec::new();
        if self.eat_sym('(') && !self.eat_sym(')') {
            params.push(self.expr()?);
            while self.eat_sym(',') {
                params.push(self.expr()?);
            }
            self.expect_sym(')')?;
        }
        let arity = if TWO_QUBIT_GATES.contains(&label.as_str()) {
            2
        } else {
            1
        };
        let want = expected_params(&label);
        if params.len() != want {
            self.pos = start;
            return Err(self.syntax(format!(
                "`{label}` takes {want} parameter(s), got {}",
                params.len()
            )));
        }
        let mut args = vec![self.qarg()?];
        while self.eat_sym(',') {
            args.push(self.qarg()?);
        }
        if args.len() != arity {
            self.pos = start;
            return Err(self.syntax(format!(
                "`{label}` takes {arity} qubit argument(s), got {}",
                args.len()
            )));
        }
        self.expect_sym(';')?;

        // Register arguments broadcast; all register widths must agree.
        let mut width = None;
        for arg in &args {
            if let Arg::Register(_, w) = arg {
                if width.is_some_and(|x| x != *w) {
                    self.pos = start;
                    return Err(self.syntax("register arguments differ in width"));
                }
                width = Some(*w);
            }
        }
        let resolve = |arg: &Arg, k: usize| match arg {
            Arg::Qubit(q) => *q,
            Arg::Register(offset, _) => offset + k,
        };
        for k in 0..width.unwrap_or(1) {
            let qubits: Vec<usize> = args.iter().map(|a| resolve(a, k)).collect();
            let operands = match qubits[..] {
                [q] => Operands::One(q),
                [a, b] if a == b => {
                    self.pos = start;
                    return Err(self.error(QasmErrorKind::DuplicateQubit(a)));
                }
                [a, b] => Operands::Two(a, b),
                _ => unreachable!("arity checked above"),
            };
            self.gates.push(Gate {
                label: label.clone(),
                operands,
                params: params.clone(),
            });
        }
        Ok(())
    }

    fn qarg(&mut self) -> Result<Arg, QasmError> {
        let at = self.pos;
        let name = self.ident()?;
        let Some(reg) = self.qregs.get(&name) else {
            self.pos = at;
            return Err(self.error(QasmErrorKind::UnknownRegister(name)));
        };
        let (offset, width) = (reg.offset, reg.width);
        if self.eat_sym('[') {
            let index_at = self.pos;
            let index = self.int()?;
            self.expect_sym(']')?;
            if index >= width {
                self.pos = index_at;
                return Err(self.error(QasmErrorKind::QubitOutOfRange {
                    register: name,
                    index,
                    width,
                }));
            }
            Ok(Arg::Qubit(offset + index))
        } else {
            Ok(Arg::Register(offset, width))
        }
    }

    fn carg(&mut self) -> Result<(), QasmError> {
        let at = self.pos;
        let name = self.ident()?;
        let Some(&width) = self.cregs.get(&name) else {
            self.pos = at;
            return Err(self.error(QasmErrorKind::UnknownRegister(name)));
        };
        if self.eat_sym('[') {
            let index = self.int()?;
            if index >= width {
                self.pos -= 1;
                return Err(self.syntax(format!("bit {name}[{index}] out of range")));
            }
            self.expect_sym(']')?;
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<f64, QasmError> {
        let mut value = self.term()?;
        loop {
            if self.eat_sym('+') {
                value += self.term()?;
            } else if self.eat_sym('-') {
                value -= self.term()?;
            } else {
                return Ok(value);
            }
        }
    }

    fn term(&mut self) -> Result<f64, QasmError> {
        let mut value = self.factor()?;
        loop {
            if self.eat_sym('*') {
                value *= self.factor()?;
            } else if self.eat_sym('/') {
                value /= self.factor()?;
            } else {
                return Ok(value);
            }
        }
    }

    fn factor(&mut self) -> Result<f64, QasmError> {
        let base = self.unary()?;
        if self.eat_sym('^') {
            Ok(base.powf(self.factor()?))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<f64, QasmError> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        match self.next()? {
            Tok::Int(v) => Ok(v as f64),
            Tok::Real(v) => Ok(v),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Tok::Ident(name) if name == "pi" => Ok(std::f64::consts::PI),
            Tok::Ident(name) => {
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => {
                        self.pos -= 1;
                        return Err(
                            self.syntax(format!("unknown identifier `{name}` in expression"))
                        );
                    }
                };
                self.expect_sym('(')?;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(f(v))
            }
            _ => {
                self.pos -= 1;
                Err(self.syntax("expected expression"))
            }
        }
    }
}

/// Parses the supported OpenQASM 2.0 subset.
///
/// All `qreg`s are concatenated into one flat index space in declaration
/// order. `creg`, `measure` and `barrier` are accepted and dropped.
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
        qregs: HashMap::new(),
        cregs: HashMap::new(),
        num_qubits: 0,
        gates: Vec::new(),
    };
    parser.program()?;
    if parser.num_qubits == 0 {
        return Err(parser.error(QasmErrorKind::NoQubits));
    }
    Ok(Circuit {
        num_qubits: parser.num_qubits,
        gates: parser.gates,
    })
}

/// Canonical text: header, a single `q` register and one gate per line.
pub fn serialize_qasm(circuit: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{}];", circuit.num_qubits());
    for gate in circuit.gates() {
        out.push_str(&gate.label);
        if !gate.params.is_empty() {
            out.push('(');
            for (i, p) in gate.params.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                // Debug formatting is the shortest representation that round-trips.
                let _ = write!(out, "{p:?}");
            }
            out.push(')');
        }
        match gate.operands {
            Operands::One(q) => {
                let _ = writeln!(out, " q[{q}];");
            }
            Operands::Two(a, b) => {
                let _ = writeln!(out, " q[{a}],q[{b}];");
            }
        }
    }
    out
}
