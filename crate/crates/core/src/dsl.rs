//! A small, total expression language for potentials in config files.
//!
//! Grammar (precedence low → high): `+ −`, `* /`, unary `−`, `^`
//! (right-associative, binding tighter than unary minus), atoms.  Variables
//! are `r`, `x1`, `x2`, `x3`; functions are exp, log, sqrt, abs and binary
//! min/max; named constants are inlined at bind time.
//!
//! Evaluation is total by rejection: division by zero, log of a
//! non-positive number, fractional powers of negatives and any non-finite
//! intermediate surface as errors carrying the source span — a NaN must
//! never leak into an energy sum.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DslError {
    #[error("syntax error at {span}: expected {expected}, found {found}")]
    Syntax { span: Span, expected: String, found: String },
    #[error("unknown identifier `{name}` at {span}")]
    UnknownIdent { name: String, span: Span },
    #[error("evaluation error at {span}: {what}")]
    Eval { span: Span, what: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn name(&self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    fn arity(&self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            _ => return None,
        })
    }
}

/// Expression tree with source spans.  Structural equality ignores spans.
#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    Var(String, Span),
    Neg(Box<Expr>, Span),
    Bin(BinOp, Box<Expr>, Box<Expr>, Span),
    Call(Func, Vec<Expr>, Span),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Num(a), Expr::Num(b)) => a == b,
            (Expr::Var(a, _), Expr::Var(b, _)) => a == b,
            (Expr::Neg(a, _), Expr::Neg(b, _)) => a == b,
            (Expr::Bin(o1, a1, b1, _), Expr::Bin(o2, a2, b2, _)) => {
                o1 == o2 && a1 == a2 && b1 == b2
            }
            (Expr::Call(f1, a1, _), Expr::Call(f2, a2, _)) => f1 == f2 && a1 == a2,
            _ => false,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(n, _) => write!(f, "{n}"),
            Expr::Neg(e, _) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b, _) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(fun, args, _) => {
                write!(f, "{}(", fun.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

// ---------------------------------------------------------------- lexer --

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(x) => write!(f, "number {x}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Op(c) => write!(f, "`{c}`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Comma => write!(f, "`,`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

struct Lexer {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

fn lex(src: &str) -> Result<Lexer, DslError> {
    let mut toks = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0usize;
    while i < bytes.len() {
        let c = bytes[i];
        let span = Span { line, col };
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => {}
            '+' | '-' | '*' | '/' | '^' => toks.push((Tok::Op(c), span)),
            '(' => toks.push((Tok::LParen, span)),
            ')' => toks.push((Tok::RParen, span)),
            ',' => toks.push((Tok::Comma, span)),
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == '.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == 'e' || bytes[i] == 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == '+' || bytes[j] == '-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = bytes[start..i].iter().collect();
                let val = text.parse::<f64>().map_err(|_| DslError::Syntax {
                    span,
                    expected: "a number".into(),
                    found: format!("`{text}`"),
                })?;
                col += (i - start) as u32;
                toks.push((Tok::Num(val), span));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                col += (i - start) as u32;
                toks.push((Tok::Ident(text), span));
                continue;
            }
            other => {
                return Err(DslError::Syntax {
                    span,
                    expected: "an operator, number, identifier or parenthesis".into(),
                    found: format!("`{other}`"),
                })
            }
        }
        i += 1;
        col += 1;
    }
    toks.push((Tok::End, Span { line, col }));
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> &(Tok, Span) {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<Span, DslError> {
        let (t, span) = self.next();
        if t == want {
            Ok(span)
        } else {
            Err(DslError::Syntax { span, expected: expected.into(), found: t.to_string() })
        }
    }
}

// --------------------------------------------------------------- parser --

/// Parse a source string into an expression tree.
pub fn parse(src: &str) -> Result<Expr, DslError> {
    let mut lx = lex(src)?;
    let e = parse_sum(&mut lx)?;
    let (t, span) = lx.next();
    if t != Tok::End {
        return Err(DslError::Syntax {
            span,
            expected: "end of input or an operator".into(),
            found: t.to_string(),
        });
    }
    Ok(e)
}

fn parse_sum(lx: &mut Lexer) -> Result<Expr, DslError> {
    let mut lhs = parse_term(lx)?;
    loop {
        match lx.peek() {
            (Tok::Op('+'), _) | (Tok::Op('-'), _) => {
                let (t, span) = lx.next();
                let op = if t == Tok::Op('+') { BinOp::Add } else { BinOp::Sub };
                let rhs = parse_term(lx)?;
                lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), span);
            }
            _ => return Ok(lhs),
        }
    }
}

fn parse_term(lx: &mut Lexer) -> Result<Expr, DslError> {
    let mut lhs = parse_unary(lx)?;
    loop {
        match lx.peek() {
            (Tok::Op('*'), _) | (Tok::Op('/'), _) => {
                let (t, span) = lx.next();
                let op = if t == Tok::Op('*') { BinOp::Mul } else { BinOp::Div };
                let rhs = parse_unary(lx)?;
                lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), span);
            }
            _ => return Ok(lhs),
        }
    }
}

fn parse_unary(lx: &mut Lexer) -> Result<Expr, DslError> {
    if let (Tok::Op('-'), _) = lx.peek() {
        let (_, span) = lx.next();
        let inner = parse_unary(lx)?;
        return Ok(Expr::Neg(Box::new(inner), span));
    }
    parse_power(lx)
}

fn parse_power(lx: &mut Lexer) -> Result<Expr, DslError> {
    let base = parse_atom(lx)?;
    if let (Tok::Op('^'), _) = lx.peek() {
        let (_, span) = lx.next();
        // Right-associative, binding tighter than unary minus on the right:
        // 2^-3 parses and -x^2 = -(x^2).
        let exp = parse_unary(lx)?;
        return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp), span));
    }
    Ok(base)
}

fn parse_atom(lx: &mut Lexer) -> Result<Expr, DslError> {
    let (t, span) = lx.next();
    match t {
        Tok::Num(x) => Ok(Expr::Num(x)),
        Tok::LParen => {
            let e = parse_sum(lx)?;
            lx.expect(Tok::RParen, "`)`")?;
            Ok(e)
        }
        Tok::Ident(name) => {
            if let (Tok::LParen, _) = lx.peek() {
                let f = Func::from_name(&name)
                    .ok_or_else(|| DslError::UnknownIdent { name: name.clone(), span })?;
                lx.next(); // consume (
                let mut args = vec![parse_sum(lx)?];
                while let (Tok::Comma, _) = lx.peek() {
                    lx.next();
                    args.push(parse_sum(lx)?);
                }
                lx.expect(Tok::RParen, "`)` or `,`")?;
                if args.len() != f.arity() {
                    return Err(DslError::Syntax {
                        span,
                        expected: format!("{} argument(s) to {}", f.arity(), f.name()),
                        found: format!("{}", args.len()),
                    });
                }
                Ok(Expr::Call(f, args, span))
            } else {
                Ok(Expr::Var(name, span))
            }
        }
        other => Err(DslError::Syntax {
            span,
            expected: "a number, identifier or `(`".into(),
            found: other.to_string(),
        }),
    }
}

impl Expr {
    /// Free variables, sorted and deduplicated.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(n, _) => out.push(n.clone()),
            Expr::Neg(e, _) => e.collect_vars(out),
            Expr::Bin(_, a, b, _) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Call(_, args, _) => {
                for a in args {
                    a.collect_vars(out);
                }
            }
        }
    }

    /// Resolve variables to slot indices, inlining named constants.  Any
    /// identifier that is neither a slot variable nor a constant is an
    /// unknown-identifier error.
    pub fn bind(
        &self,
        slots: &[&str],
        consts: &HashMap<String, f64>,
    ) -> Result<CompiledExpr, DslError> {
        Ok(CompiledExpr { node: self.bind_node(slots, consts)?, n_slots: slots.len() })
    }

    fn bind_node(&self, slots: &[&str], consts: &HashMap<String, f64>) -> Result<Node, DslError> {
        Ok(match self {
            Expr::Num(x) => Node::Num(*x),
            Expr::Var(n, span) => {
                if let Some(i) = slots.iter().position(|s| s == n) {
                    Node::Slot(i, *span)
                } else if let Some(&v) = consts.get(n) {
                    Node::Num(v)
                } else {
                    return Err(DslError::UnknownIdent { name: n.clone(), span: *span });
                }
            }
            Expr::Neg(e, span) => Node::Neg(Box::new(e.bind_node(slots, consts)?), *span),
            Expr::Bin(op, a, b, span) => Node::Bin(
                *op,
                Box::new(a.bind_node(slots, consts)?),
                Box::new(b.bind_node(slots, consts)?),
                *span,
            ),
            Expr::Call(f, args, span) => {
                let mut bound = Vec::with_capacity(args.len());
                for a in args {
                    bound.push(a.bind_node(slots, consts)?);
                }
                Node::Call(*f, bound, *span)
            }
        })
    }

    /// Evaluate against named bindings (variables and constants together).
    pub fn eval(&self, bindings: &HashMap<String, f64>) -> Result<f64, DslError> {
        let names: Vec<&str> = bindings.keys().map(|s| s.as_str()).collect();
        let compiled = self.bind(&names, &HashMap::new())?;
        let slots: Vec<f64> = names.iter().map(|n| bindings[*n]).collect();
        compiled.eval(&slots)
    }
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Slot(usize, Span),
    Neg(Box<Node>, Span),
    Bin(BinOp, Box<Node>, Box<Node>, Span),
    Call(Func, Vec<Node>, Span),
}

/// Slot-resolved expression ready for per-node evaluation in hot loops.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    node: Node,
    n_slots: usize,
}

impl CompiledExpr {
    pub fn eval(&self, slots: &[f64]) -> Result<f64, DslError> {
        debug_assert!(slots.len() >= self.n_slots);
        eval_node(&self.node, slots)
    }
}

fn eval_node(node: &Node, slots: &[f64]) -> Result<f64, DslError> {
    let finite = |v: f64, span: &Span, what: &str| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(DslError::Eval { span: *span, what: format!("{what} produced {v}") })
        }
    };
    match node {
        Node::Num(x) => Ok(*x),
        Node::Slot(i, _) => Ok(slots[*i]),
        Node::Neg(e, _) => Ok(-eval_node(e, slots)?),
        Node::Bin(op, a, b, span) => {
            let x = eval_node(a, slots)?;
            let y = eval_node(b, slots)?;
            match op {
                BinOp::Add => finite(x + y, span, "addition"),
                BinOp::Sub => finite(x - y, span, "subtraction"),
                BinOp::Mul => finite(x * y, span, "multiplication"),
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(DslError::Eval {
                            span: *span,
                            what: "division by zero".into(),
                        });
                    }
                    finite(x / y, span, "division")
                }
                BinOp::Pow => {
                    if x < 0.0 && y.fract() != 0.0 {
                        return Err(DslError::Eval {
                            span: *span,
                            what: format!("fractional power of negative base {x}"),
                        });
                    }
                    if x == 0.0 && y < 0.0 {
                        return Err(DslError::Eval {
                            span: *span,
                            what: "zero raised to a negative power".into(),
                        });
                    }
                    finite(x.powf(y), span, "power")
                }
            }
        }
        Node::Call(f, args, span) => {
            let x = eval_node(&args[0], slots)?;
            match f {
                Func::Exp => finite(x.exp(), span, "exp"),
                Func::Abs => Ok(x.abs()),
                Func::Log => {
                    if x <= 0.0 {
                        return Err(DslError::Eval {
                            span: *span,
                            what: format!("log of non-positive value {x}"),
                        });
                    }
                    Ok(x.ln())
                }
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err(DslError::Eval {
                            span: *span,
                            what: format!("sqrt of negative value {x}"),
                        });
                    }
                    Ok(x.sqrt())
                }
                Func::Min => Ok(x.min(eval_node(&args[1], slots)?)),
                Func::Max => Ok(x.max(eval_node(&args[1], slots)?)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval1(src: &str, r: f64) -> f64 {
        let e = parse(src).unwrap();
        let c = e.bind(&["r", "x1", "x2", "x3"], &HashMap::new()).unwrap();
        c.eval(&[r, 0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(eval1("1 + 0.5*exp(-r^2)", 0.0), 1.5);
        assert_eq!(eval1("r^2", 3.0), 9.0);
        assert_eq!(eval1("2^3^2", 0.0), 512.0); // right-assoc
        assert_eq!(eval1("-2^2", 0.0), -4.0); // ^ binds tighter than unary −
        assert_eq!(eval1("2^-2", 0.0), 0.25);
        assert_eq!(eval1("2*3+4", 0.0), 10.0);
        assert_eq!(eval1("2+3*4", 0.0), 14.0);
        assert_eq!(eval1("1 - 2 - 3", 0.0), -4.0); // left-assoc
    }

    #[test]
    fn constants_in_bind() {
        let consts = HashMap::from([("m".to_string(), 2.0)]);
        let e = parse("m - 0.5*min((r-1)^2, 1)").unwrap();
        let c = e.bind(&["r"], &consts).unwrap();
        assert_eq!(c.eval(&[1.0]).unwrap(), 2.0);
        assert_eq!(c.eval(&[0.0]).unwrap(), 1.5);
    }

    #[test]
    fn cartesian_variables() {
        let e = parse("x1*x2").unwrap();
        let c = e.bind(&["r", "x1", "x2", "x3"], &HashMap::new()).unwrap();
        assert_eq!(c.eval(&[0.0, 1.0, -2.0, 0.0]).unwrap(), -2.0);
    }

    #[test]
    fn syntax_error_with_position() {
        match parse("2*(3+") {
            Err(DslError::Syntax { span, .. }) => assert_eq!(span.col, 6),
            other => panic!("expected syntax error, got {other:?}"),
        }
        assert!(parse("min(1)").is_err()); // arity
        assert!(parse("2 +* 3").is_err());
        assert!(parse("foo(2)").is_err()); // unknown function
    }

    #[test]
    fn unknown_identifier_at_bind() {
        let e = parse("a + r").unwrap();
        match e.bind(&["r"], &HashMap::new()) {
            Err(DslError::UnknownIdent { name, .. }) => assert_eq!(name, "a"),
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn guarded_evaluation() {
        let e = parse("1/(r-1)").unwrap();
        let c = e.bind(&["r"], &HashMap::new()).unwrap();
        assert!(matches!(c.eval(&[1.0]), Err(DslError::Eval { .. })));
        assert_eq!(c.eval(&[3.0]).unwrap(), 0.5);
        let e = parse("log(r)").unwrap();
        let c = e.bind(&["r"], &HashMap::new()).unwrap();
        assert!(c.eval(&[0.0]).is_err());
        let e = parse("(-2)^0.5").unwrap();
        let c = e.bind(&[], &HashMap::new()).unwrap();
        assert!(c.eval(&[]).is_err());
        // overflow is rejected, never propagated
        let e = parse("exp(r)^4").unwrap();
        let c = e.bind(&["r"], &HashMap::new()).unwrap();
        assert!(c.eval(&[400.0]).is_err());
    }

    #[test]
    fn print_parse_roundtrip_is_idempotent() {
        for src in [
            "1 + 0.5*exp(-r^2)",
            "m - 0.5*min((r-1)^2, 1)",
            "-r^2 + max(x1, 2)/(1 + abs(x2))",
            "2^-3^0.5",
            "sqrt(r)*log(1+r)",
        ] {
            let e1 = parse(src).unwrap();
            let printed = e1.to_string();
            let e2 = parse(&printed).unwrap();
            assert_eq!(e1, e2, "round-trip changed `{src}` → `{printed}`");
            assert_eq!(printed, parse(&printed).unwrap().to_string());
        }
    }

    #[test]
    fn variables_listing() {
        let e = parse("x1 + r*max(x1, b)").unwrap();
        assert_eq!(e.variables(), vec!["b".to_string(), "r".into(), "x1".into()]);
    }
}
