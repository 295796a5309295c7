//! Scalar fields over `x, y, z, t` and the metric definition file format.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | variable | function '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus (`-x^2 = -(x^2)`) and is right
//! associative. Variables are `x y z t`; functions are `sin cos exp sqrt abs`.

use std::fmt;

use thiserror::Error;

use crate::point::Point4;

/// Maximum depth of a parsed expression tree.
pub const MAX_TREE_DEPTH: usize = 100;
/// Maximum nesting of parentheses, unary minus and `^` chains while parsing.
const MAX_NESTING: usize = 256;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }

    fn syntax(offset: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            offset,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative argument {0}")]
    NegativeSqrt(f64),
    #[error("negative base {base} raised to non-integer or negative exponent {exponent}")]
    NegativeBase { base: f64, exponent: f64 },
    #[error("non-finite result in {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
    T,
}

impl Var {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "z" => Some(Var::Z),
            "t" => Some(Var::T),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
            Var::T => "t",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        arg: Box<Expr>,
    },
}

impl Expr {
    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Neg(e) | Expr::Call { arg: e, .. } => 1 + e.depth(),
            Expr::Binary { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
        }
    }

    fn eval(&self, vars: &[f64; 4]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => vars[v.index()],
            Expr::Neg(e) => -e.eval(vars)?,
            Expr::Binary { op, lhs, rhs } => {
                let l = lhs.eval(vars)?;
                let r = rhs.eval(vars)?;
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r == 0.0 {
                            return Err(EvalError::DivisionByZero);
                        }
                        l / r
                    }
                    BinOp::Pow => pow(l, r)?,
                }
            }
            Expr::Call { func, arg } => {
                let a = arg.eval(vars)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Abs => a.abs(),
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::NegativeSqrt(a));
                        }
                        a.sqrt()
                    }
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite(self.kind()))
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Expr::Const(_) => "constant",
            Expr::Var(_) => "variable",
            Expr::Neg(_) => "negation",
            Expr::Binary { op, .. } => match op {
                BinOp::Add => "addition",
                BinOp::Sub => "subtraction",
                BinOp::Mul => "multiplication",
                BinOp::Div => "division",
                BinOp::Pow => "power",
            },
            Expr::Call { func, .. } => func.name(),
        }
    }
}

fn pow(base: f64, exponent: f64) -> Result<f64, EvalError> {
    let nonneg_integer = exponent >= 0.0 && exponent.fract() == 0.0;
    if base < 0.0 && !nonneg_integer {
        return Err(EvalError::NegativeBase { base, exponent });
    }
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    Ok(base.powf(exponent))
}

/// Renders fully parenthesised; the output parses back to an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            Expr::Call { func, arg } => write!(f, "{}({arg})", func.name()),
        }
    }
}

/// A real-valued field over `(x, y, z, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    root: Expr,
}

impl Default for ScalarField {
    fn default() -> Self {
        Self::zero()
    }
}

impl ScalarField {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// # Panics
    ///
    /// Panics if `value` is not finite.
    pub fn constant(value: f64) -> Self {
        assert!(value.is_finite(), "constant field must be finite");
        Self {
            root: Expr::Const(value),
        }
    }

    pub fn parse(source: &str) -> Result<Self, ParseError> {
        parse_field(source)
    }

    pub fn expr(&self) -> &Expr {
        &self.root
    }

    /// The field `-self`.
    pub fn negated(&self) -> Self {
        Self {
            root: Expr::Neg(Box::new(self.root.clone())),
        }
    }

    /// True when the tree is the literal constant zero.
    pub fn is_literal_zero(&self) -> bool {
        matches!(self.root, Expr::Const(c) if c == 0.0)
    }

    pub fn eval(&self, p: &Point4) -> Result<f64, EvalError> {
        self.root.eval(&p.coords())
    }

    pub fn render(&self) -> String {
        self.root.to_string()
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

pub fn parse_field(source: &str) -> Result<ScalarField, ParseError> {
    let tokens = tokenize(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        nesting: 0,
    };
    if parser.peek().kind == Tok::End {
        return Err(ParseError::syntax(parser.peek().offset, "empty expression"));
    }
    let root = parser.expr()?;
    let next = parser.peek();
    if next.kind != Tok::End {
        return Err(ParseError::syntax(
            next.offset,
            format!("unexpected {}", next.kind.describe()),
        ));
    }
    Ok(ScalarField { root })
}

pub fn eval_field(field: &ScalarField, p: &Point4) -> Result<f64, EvalError> {
    field.eval(p)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number {n}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    offset: usize,
}

fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let kind = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                i = scan_number(bytes, i);
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| ParseError::syntax(start, format!("malformed number `{text}`")))?;
                if !value.is_finite() {
                    return Err(ParseError::syntax(
                        start,
                        format!("number `{text}` overflows"),
                    ));
                }
                out.push(Token {
                    kind: Tok::Num(value),
                    offset: start,
                });
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token {
                    kind: Tok::Ident(src[start..i].to_string()),
                    offset: start,
                });
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(ParseError::syntax(
                    start,
                    format!("unexpected character {ch:?}"),
                ));
            }
        };
        i += 1;
        out.push(Token {
            kind,
            offset: start,
        });
    }
    out.push(Token {
        kind: Tok::End,
        offset: bytes.len(),
    });
    Ok(out)
}

fn scan_number(bytes: &[u8], mut i: usize) -> usize {
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    nesting: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn enter(&mut self, offset: usize) -> Result<(), ParseError> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(ParseError::syntax(offset, "expression nested too deeply"));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.nesting -= 1;
    }

    fn node(offset: usize, e: Expr) -> Result<Expr, ParseError> {
        if e.depth() > MAX_TREE_DEPTH {
            return Err(ParseError::syntax(offset, "expression nested too deeply"));
        }
        Ok(e)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let offset = self.bump().offset;
            let rhs = self.term()?;
            lhs = Self::node(offset, binary(op, lhs, rhs))?;
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let offset = self.bump().offset;
            let rhs = self.unary()?;
            lhs = Self::node(offset, binary(op, lhs, rhs))?;
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().kind == Tok::Minus {
            let offset = self.bump().offset;
            self.enter(offset)?;
            let inner = self.unary()?;
            self.leave();
            return Self::node(offset, Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek().kind != Tok::Caret {
            return Ok(base);
        }
        let offset = self.bump().offset;
        self.enter(offset)?;
        let exponent = self.unary()?;
        self.leave();
        Self::node(offset, binary(BinOp::Pow, base, exponent))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let tok = self.bump();
        match tok.kind {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::LParen => {
                self.enter(tok.offset)?;
                let inner = self.expr()?;
                self.expect_rparen(tok.offset)?;
                self.leave();
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(v) = Var::from_name(&name) {
                    return Ok(Expr::Var(v));
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(ParseError::UnknownIdentifier {
                        offset: tok.offset,
                        name,
                    });
                };
                let open = self.bump();
                if open.kind != Tok::LParen {
                    return Err(ParseError::syntax(
                        open.offset,
                        format!(
                            "expected `(` after `{name}`, found {}",
                            open.kind.describe()
                        ),
                    ));
                }
                self.enter(open.offset)?;
                let arg = self.expr()?;
                self.expect_rparen(open.offset)?;
                self.leave();
                Self::node(
                    tok.offset,
                    Expr::Call {
                        func,
                        arg: Box::new(arg),
                    },
                )
            }
            other => Err(ParseError::syntax(
                tok.offset,
                format!(
                    "expected a number, variable, function or `(`, found {}",
                    other.describe()
                ),
            )),
        }
    }

    fn expect_rparen(&mut self, open_offset: usize) -> Result<(), ParseError> {
        let t = self.bump();
        if t.kind == Tok::RParen {
            Ok(())
        } else {
            Err(ParseError::syntax(
                t.offset,
                format!(
                    "expected `)` to close `(` at byte {open_offset}, found {}",
                    t.kind.describe()
                ),
            ))
        }
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    Expr::Binary {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    }
}

// ---------------------------------------------------------------------------
// Metric definition files

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricFileError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, column {column}: {source}")]
    Field {
        line: usize,
        column: usize,
        source: ParseError,
    },
    #[error("line {line}: g[{row}][{col}] already assigned on line {first_line}")]
    DuplicateComponent {
        line: usize,
        row: u64,
        col: u64,
        first_line: usize,
    },
    #[error("line {line}: index g[{row}][{col}] out of range 1..4")]
    IndexOutOfRange { line: usize, row: u64, col: u64 },
}

impl MetricFileError {
    pub fn line(&self) -> usize {
        match self {
            MetricFileError::Syntax { line, .. }
            | MetricFileError::Field { line, .. }
            | MetricFileError::DuplicateComponent { line, .. }
            | MetricFileError::IndexOutOfRange { line, .. } => *line,
        }
    }
}

/// A named 4×4 grid of component fields `g[r][c]`, indexed from 1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricDefinition {
    pub name: Option<String>,
    components: [[ScalarField; 4]; 4],
}

impl MetricDefinition {
    pub fn new(name: Option<String>, components: [[ScalarField; 4]; 4]) -> Self {
        Self { name, components }
    }

    /// Component `g[row][col]` with 1-based indices.
    pub fn get(&self, row: usize, col: usize) -> Option<&ScalarField> {
        if (1..=4).contains(&row) && (1..=4).contains(&col) {
            Some(&self.components[row - 1][col - 1])
        } else {
            None
        }
    }

    pub fn components(&self) -> &[[ScalarField; 4]; 4] {
        &self.components
    }

    pub fn into_components(self) -> [[ScalarField; 4]; 4] {
        self.components
    }

    /// Renders the definition in the file format, omitting literal zeros.
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(name) = &self.name {
            out.push_str(&format!("name = \"{name}\"\n"));
        }
        for (r, row) in self.components.iter().enumerate() {
            for (c, field) in row.iter().enumerate() {
                if !field.is_literal_zero() {
                    out.push_str(&format!("g[{}][{}] = {}\n", r + 1, c + 1, field));
                }
            }
        }
        out
    }
}

pub fn parse_metric_file(source: &str) -> Result<MetricDefinition, MetricFileError> {
    let mut def = MetricDefinition::default();
    let mut assigned: [[Option<usize>; 4]; 4] = [[None; 4]; 4];
    let mut name_line: Option<usize> = None;

    for (idx, raw) in source.lines().enumerate() {
        let line = idx + 1;
        let mut cursor = LineCursor::new(raw, line);
        cursor.skip_ws();
        if cursor.at_end_or_comment() {
            continue;
        }
        if cursor.eat_keyword("name") {
            cursor.skip_ws();
            cursor.expect(b'=')?;
            cursor.skip_ws();
            let label = cursor.quoted()?;
            cursor.skip_ws();
            if !cursor.at_end_or_comment() {
                return Err(cursor.error("unexpected text after name"));
            }
            if let Some(first) = name_line {
                return Err(MetricFileError::Syntax {
                    line,
                    message: format!("name already set on line {first}"),
                });
            }
            name_line = Some(line);
            def.name = Some(label);
            continue;
        }

        cursor.expect(b'g')?;
        let row = cursor.index()?;
        let col = cursor.index()?;
        cursor.skip_ws();
        cursor.expect(b'=')?;
        if !(1..=4).contains(&row) || !(1..=4).contains(&col) {
            return Err(MetricFileError::IndexOutOfRange { line, row, col });
        }
        let (r, c) = (row as usize - 1, col as usize - 1);
        if let Some(first_line) = assigned[r][c] {
            return Err(MetricFileError::DuplicateComponent {
                line,
                row,
                col,
                first_line,
            });
        }
        let expr_start = cursor.pos;
        let expr_src = strip_comment(&raw[expr_start..]);
        let field = parse_field(expr_src).map_err(|source| MetricFileError::Field {
            line,
            column: expr_start + source.offset() + 1,
            source,
        })?;
        def.components[r][c] = field;
        assigned[r][c] = Some(line);
    }
    Ok(def)
}

fn strip_comment(s: &str) -> &str {
    match s.find('#') {
        Some(k) => &s[..k],
        None => s,
    }
}

struct LineCursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> LineCursor<'a> {
    fn new(text: &'a str, line: usize) -> Self {
        Self { text, pos: 0, line }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn error(&self, message: impl Into<String>) -> MetricFileError {
        MetricFileError::Syntax {
            line: self.line,
            message: format!("column {}: {}", self.pos + 1, message.into()),
        }
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn at_end_or_comment(&self) -> bool {
        let rest = self.rest();
        rest.is_empty() || rest.starts_with('#')
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        let rest = self.rest();
        let boundary = rest[kw.len().min(rest.len())..]
            .chars()
            .next()
            .is_none_or(|c| !(c.is_ascii_alphanumeric() || c == '_'));
        if rest.starts_with(kw) && boundary {
            self.pos += kw.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), MetricFileError> {
        if self.rest().as_bytes().first() == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self
                .rest()
                .chars()
                .next()
                .map_or("end of line".to_string(), |c| format!("{c:?}"));
            Err(self.error(format!("expected `{}`, found {found}", byte as char)))
        }
    }

    /// Parses `[ <digits> ]` with optional surrounding whitespace.
    fn index(&mut self) -> Result<u64, MetricFileError> {
        self.skip_ws();
        self.expect(b'[')?;
        self.skip_ws();
        let digits = self.rest().bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.error("expected an integer index"));
        }
        let text = &self.rest()[..digits];
        let value = text
            .parse::<u64>()
            .map_err(|_| self.error(format!("index `{text}` is too large")))?;
        self.pos += digits;
        self.skip_ws();
        self.expect(b']')?;
        Ok(value)
    }

    fn quoted(&mut self) -> Result<String, MetricFileError> {
        self.expect(b'"')?;
        let rest = self.rest();
        let Some(end) = rest.find('"') else {
            return Err(self.error("unterminated string"));
        };
        let label = rest[..end].to_string();
        self.pos += end + 1;
        Ok(label)
    }
}
