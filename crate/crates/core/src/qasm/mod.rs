//! OpenQASM 2.0 frontend for the QASMBench dialect.
//!
//! Parsing flattens all quantum registers into one index space, expands user
//! `gate` definitions down to built-in calls and drops measurements and
//! barriers. [`lower`] then turns the built-in calls into the device's
//! primitive set of unary and singly-controlled gates.

mod expr;
pub mod gates;
mod lexer;
mod lower;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use expr::{BinOp, Expr, Func};
use lexer::{tokenize, Tok};

pub use gates::{controlled_base, gate_matrix, BuiltinKind};
pub use lower::{lower, lower_statement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

fn at(pos: &Option<Pos>) -> String {
    pos.map(|p| format!("{p}: ")).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QasmError {
    #[error("{pos}: syntax error: {message}")]
    Syntax { pos: Pos, message: String },
    #[error("{}unknown gate `{name}`", at(pos))]
    UnknownGate { pos: Option<Pos>, name: String },
    #[error("{pos}: opaque gate `{name}` is not supported")]
    OpaqueGate { pos: Pos, name: String },
    #[error("{pos}: {register}[{index}] out of range (size {size})")]
    OperandOutOfRange { pos: Pos, register: String, index: usize, size: usize },
    #[error("{}gate `{name}` takes {expected} parameter(s), got {found}", at(pos))]
    ParamArity { pos: Option<Pos>, name: String, expected: usize, found: usize },
    #[error("{pos}: gate `{name}` takes {expected} qubit(s), got {found}")]
    QubitArity { pos: Pos, name: String, expected: usize, found: usize },
    #[error("{pos}: unknown register `{name}`")]
    UnknownRegister { pos: Pos, name: String },
    #[error("{pos}: qubit used twice in one `{name}` call")]
    DuplicateOperand { pos: Pos, name: String },
    #[error("{pos}: {what} is not supported")]
    Unsupported { pos: Pos, what: String },
}

impl QasmError {
    pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        QasmError::Syntax { pos, message: message.into() }
    }

    pub fn pos(&self) -> Option<Pos> {
        match self {
            QasmError::Syntax { pos, .. }
            | QasmError::OpaqueGate { pos, .. }
            | QasmError::OperandOutOfRange { pos, .. }
            | QasmError::QubitArity { pos, .. }
            | QasmError::UnknownRegister { pos, .. }
            | QasmError::DuplicateOperand { pos, .. }
            | QasmError::Unsupported { pos, .. } => Some(*pos),
            QasmError::UnknownGate { pos, .. } | QasmError::ParamArity { pos, .. } => *pos,
        }
    }

    fn with_pos(self, p: Pos) -> Self {
        match self {
            QasmError::UnknownGate { pos: None, name } => QasmError::UnknownGate { pos: Some(p), name },
            QasmError::ParamArity { pos: None, name, expected, found } => {
                QasmError::ParamArity { pos: Some(p), name, expected, found }
            }
            other => other,
        }
    }
}

/// A non-fatal diagnostic, e.g. a dropped `measure`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.pos, self.message)
    }
}

/// One built-in gate application on flattened qubit indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statement {
    pub name: String,
    /// Radians.
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceCircuit {
    pub n_qubits: usize,
    pub statements: Vec<Statement>,
    pub warnings: Vec<Warning>,
}

/// Parses OpenQASM 2.0 text into built-in gate applications in program order.
pub fn parse_qasm(text: &str) -> Result<SourceCircuit, QasmError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, i: 0, qregs: Vec::new(), cregs: HashMap::new(), defs: HashMap::new(), n_qubits: 0 };
    let mut out = SourceCircuit { n_qubits: 0, statements: Vec::new(), warnings: Vec::new() };
    p.program(&mut out)?;
    out.n_qubits = p.n_qubits;
    Ok(out)
}

struct QReg {
    name: String,
    offset: usize,
    size: usize,
}

struct GateDef {
    params: Vec<String>,
    qargs: Vec<String>,
    body: Vec<BodyCall>,
}

struct BodyCall {
    name: String,
    params: Vec<Expr>,
    args: Vec<usize>,
}

/// Operand of a top-level call: a single qubit or a whole register.
#[derive(Clone, Copy)]
enum Operand {
    Qubit(usize),
    Register { offset: usize, size: usize },
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    qregs: Vec<QReg>,
    cregs: HashMap<String, usize>,
    defs: HashMap<String, GateDef>,
    n_qubits: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, QasmError> {
        let (t, pos) = self.next();
        if t == tok {
            Ok(pos)
        } else {
            Err(QasmError::syntax(pos, format!("expected {}, found {}", tok.describe(), t.describe())))
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), QasmError> {
        match self.next() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (t, pos) => Err(QasmError::syntax(pos, format!("expected identifier, found {}", t.describe()))),
        }
    }

    fn int(&mut self) -> Result<usize, QasmError> {
        match self.next() {
            (Tok::Int(v), _) => Ok(v as usize),
            (t, pos) => Err(QasmError::syntax(pos, format!("expected integer, found {}", t.describe()))),
        }
    }

    fn program(&mut self, out: &mut SourceCircuit) -> Result<(), QasmError> {
        if matches!(self.peek(), Tok::Ident(s) if s == "OPENQASM") {
            self.next();
            let (t, pos) = self.next();
            match t {
                Tok::Real(2.0) | Tok::Int(2) => {}
                other => {
                    return Err(QasmError::Unsupported { pos, what: format!("OPENQASM version {}", other.describe()) })
                }
            }
            self.expect(Tok::Semi)?;
        }
        while *self.peek() != Tok::Eof {
            self.statement(out)?;
        }
        Ok(())
    }

    fn statement(&mut self, out: &mut SourceCircuit) -> Result<(), QasmError> {
        let (kw, pos) = self.ident()?;
        match kw.as_str() {
            "include" => {
                let (t, p) = self.next();
                match t {
                    Tok::Str(f) if f == "qelib1.inc" => {}
                    Tok::Str(f) => return Err(QasmError::Unsupported { pos: p, what: format!("include of \"{f}\"") }),
                    t => return Err(QasmError::syntax(p, format!("expected file name, found {}", t.describe()))),
                }
                self.expect(Tok::Semi)?;
            }
            "qreg" | "creg" => {
                let (name, _) = self.ident()?;
                self.expect(Tok::LBracket)?;
                let size = self.int()?;
                self.expect(Tok::RBracket)?;
                self.expect(Tok::Semi)?;
                if self.cregs.contains_key(&name) || self.qregs.iter().any(|r| r.name == name) {
                    return Err(QasmError::syntax(pos, format!("register `{name}` declared twice")));
                }
                if kw == "qreg" {
                    self.qregs.push(QReg { name, offset: self.n_qubits, size });
                    self.n_qubits += size;
                } else {
                    self.cregs.insert(name, size);
                }
            }
            "gate" => self.gate_def()?,
            "opaque" => {
                let (name, _) = self.ident()?;
                return Err(QasmError::OpaqueGate { pos, name });
            }
            "measure" => {
                self.classical_arg()?;
                self.expect(Tok::Arrow)?;
                self.classical_arg()?;
                self.expect(Tok::Semi)?;
                out.warnings.push(Warning { pos, message: "measure ignored (pure state evolution)".into() });
            }
            "barrier" => {
                self.operand_list()?;
                self.expect(Tok::Semi)?;
            }
            "reset" => return Err(QasmError::Unsupported { pos, what: "reset".into() }),
            "if" => return Err(QasmError::Unsupported { pos, what: "classically controlled `if`".into() }),
            _ => {
                let params = self.param_list()?;
                let env = HashMap::new();
                let values = params.iter().map(|e| e.eval(&env)).collect::<Result<Vec<_>, _>>()?;
                let operands = self.operand_list()?;
                self.expect(Tok::Semi)?;
                self.top_level_call(&kw, &values, &operands, pos, out)?;
            }
        }
        Ok(())
    }

    /// `measure` operands: either register may be quantum or classical.
    fn classical_arg(&mut self) -> Result<(), QasmError> {
        let (name, pos) = self.ident()?;
        let size = match self.qregs.iter().find(|r| r.name == name) {
            Some(r) => r.size,
            None => *self.cregs.get(&name).ok_or(QasmError::UnknownRegister { pos, name: name.clone() })?,
        };
        if self.eat(&Tok::LBracket) {
            let idx = self.int()?;
            self.expect(Tok::RBracket)?;
            if idx >= size {
                return Err(QasmError::OperandOutOfRange { pos, register: name, index: idx, size });
            }
        }
        Ok(())
    }

    fn operand_list(&mut self) -> Result<Vec<(Operand, Pos)>, QasmError> {
        let mut ops = vec![self.operand()?];
        while self.eat(&Tok::Comma) {
            ops.push(self.operand()?);
        }
        Ok(ops)
    }

    fn operand(&mut self) -> Result<(Operand, Pos), QasmError> {
        let (name, pos) = self.ident()?;
        let reg = self
            .qregs
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| QasmError::UnknownRegister { pos, name: name.clone() })?;
        let (offset, size) = (reg.offset, reg.size);
        if self.eat(&Tok::LBracket) {
            let idx = self.int()?;
            self.expect(Tok::RBracket)?;
            if idx >= size {
                return Err(QasmError::OperandOutOfRange { pos, register: name, index: idx, size });
            }
            Ok((Operand::Qubit(offset + idx), pos))
        } else {
            Ok((Operand::Register { offset, size }, pos))
        }
    }

    fn param_list(&mut self) -> Result<Vec<Expr>, QasmError> {
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            params.push(self.expr()?);
            while self.eat(&Tok::Comma) {
                params.push(self.expr()?);
            }
            self.expect(Tok::RParen)?;
        }
        Ok(params)
    }

    fn expr(&mut self) -> Result<Expr, QasmError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, QasmError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, QasmError> {
        if self.eat(&Tok::Minus) {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat(&Tok::Caret) {
            // right-associative, binds tighter than unary minus on its right
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, QasmError> {
        let (t, pos) = self.next();
        match t {
            Tok::Int(v) => Ok(Expr::Num(v as f64)),
            Tok::Real(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) if name == "pi" => Ok(Expr::Pi),
            Tok::Ident(name) => match Func::from_name(&name) {
                Some(f) if *self.peek() == Tok::LParen => {
                    self.next();
                    let e = self.expr()?;
                    self.expect(Tok::RParen)?;
                    Ok(Expr::Call(f, Box::new(e)))
                }
                _ => Ok(Expr::Param(name, pos)),
            },
            t => Err(QasmError::syntax(pos, format!("expected expression, found {}", t.describe()))),
        }
    }

    fn gate_def(&mut self) -> Result<(), QasmError> {
        let (name, _) = self.ident()?;
        let mut params = Vec::new();
        if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
            params.push(self.ident()?.0);
            while self.eat(&Tok::Comma) {
                params.push(self.ident()?.0);
            }
            self.expect(Tok::RParen)?;
        }
        let mut qargs = vec![self.ident()?.0];
        while self.eat(&Tok::Comma) {
            qargs.push(self.ident()?.0);
        }
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let (callee, pos) = self.ident()?;
            if callee == "barrier" {
                while !self.eat(&Tok::Semi) {
                    if *self.peek() == Tok::Eof {
                        return Err(QasmError::syntax(self.pos(), "unterminated gate body"));
                    }
                    self.next();
                }
                continue;
            }
            let call_params = self.param_list()?;
            let mut refs = Vec::new();
            for e in &call_params {
                e.params(&mut refs);
            }
            if let Some((unknown, p)) = refs.into_iter().find(|(r, _)| !params.contains(r)) {
                return Err(QasmError::syntax(p, format!("unknown parameter `{unknown}` in gate `{name}`")));
            }
            let mut args = Vec::new();
            loop {
                let (a, apos) = self.ident()?;
                if *self.peek() == Tok::LBracket {
                    return Err(QasmError::syntax(self.pos(), "indexed operand inside gate body"));
                }
                let idx = qargs
                    .iter()
                    .position(|q| *q == a)
                    .ok_or_else(|| QasmError::syntax(apos, format!("unknown qubit argument `{a}`")))?;
                args.push(idx);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::Semi)?;
            self.check_signature(&callee, call_params.len(), args.len(), pos)?;
            if has_duplicates(&args) {
                return Err(QasmError::DuplicateOperand { pos, name: callee });
            }
            body.push(BodyCall { name: callee, params: call_params, args });
        }
        self.defs.insert(name, GateDef { params, qargs, body });
        Ok(())
    }

    fn check_signature(&self, name: &str, n_params: usize, n_qubits: usize, pos: Pos) -> Result<(), QasmError> {
        let (exp_params, exp_qubits) = if let Some(d) = self.defs.get(name) {
            (d.params.len(), d.qargs.len())
        } else if let Some(b) = gates::builtin(name) {
            (b.n_params, b.n_qubits)
        } else {
            return Err(QasmError::UnknownGate { pos: Some(pos), name: name.to_string() });
        };
        if n_params != exp_params {
            return Err(QasmError::ParamArity {
                pos: Some(pos),
                name: name.to_string(),
                expected: exp_params,
                found: n_params,
            });
        }
        if n_qubits != exp_qubits {
            return Err(QasmError::QubitArity { pos, name: name.to_string(), expected: exp_qubits, found: n_qubits });
        }
        Ok(())
    }

    fn top_level_call(
        &self,
        name: &str,
        params: &[f64],
        operands: &[(Operand, Pos)],
        pos: Pos,
        out: &mut SourceCircuit,
    ) -> Result<(), QasmError> {
        self.check_signature(name, params.len(), operands.len(), pos)?;
        let mut width = None;
        for (op, p) in operands {
            if let Operand::Register { size, .. } = op {
                match width {
                    None => width = Some(*size),
                    Some(w) if w != *size => {
                        return Err(QasmError::syntax(*p, "registers of different sizes in one call"))
                    }
                    _ => {}
                }
            }
        }
        for j in 0..width.unwrap_or(1) {
            let qubits: Vec<usize> = operands
                .iter()
                .map(|(op, _)| match *op {
                    Operand::Qubit(q) => q,
                    Operand::Register { offset, .. } => offset + j,
                })
                .collect();
            if has_duplicates(&qubits) {
                return Err(QasmError::DuplicateOperand { pos, name: name.to_string() });
            }
            self.expand(name, params, &qubits, pos, out)?;
        }
        Ok(())
    }

    fn expand(
        &self,
        name: &str,
        params: &[f64],
        qubits: &[usize],
        pos: Pos,
        out: &mut SourceCircuit,
    ) -> Result<(), QasmError> {
        if let Some(def) = self.defs.get(name) {
            let env: HashMap<String, f64> = def.params.iter().cloned().zip(params.iter().copied()).collect();
            for call in &def.body {
                let vals = call.params.iter().map(|e| e.eval(&env)).collect::<Result<Vec<_>, _>>()?;
                let qs: Vec<usize> = call.args.iter().map(|&a| qubits[a]).collect();
                // diagnostics point at the outermost call site
                self.expand(&call.name, &vals, &qs, pos, out)?;
            }
            return Ok(());
        }
        if gates::builtin(name).is_none() {
            return Err(QasmError::UnknownGate { pos: Some(pos), name: name.to_string() });
        }
        out.statements.push(Statement { name: name.to_string(), params: params.to_vec(), qubits: qubits.to_vec(), pos });
        Ok(())
    }
}

fn has_duplicates(v: &[usize]) -> bool {
    v.iter().enumerate().any(|(i, a)| v[i + 1..].contains(a))
}
