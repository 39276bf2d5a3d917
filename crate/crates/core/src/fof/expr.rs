//! Expression trees and the deterministic renderer for emitted conjectures.
//!
//! The grammar is the arithmetic fragment of TPTP FOF that MetiTarski-class
//! provers accept: sums, products, quotients, integer powers, `abs`, `sqrt`,
//! and the five comparison operators. Rendering is byte-deterministic so
//! emitted problems can be diffed against goldens; the parenthesization and
//! spacing rules are frozen by the tests at the bottom of this file and must
//! not drift.

use std::fmt;

/// Arithmetic expression. Construction is unrestricted; whether every
/// variable is bound is checked at the conjecture level, not here.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Non-negative integer power, rendered `base^n`.
    Pow(Box<Expr>, u32),
    Abs(Box<Expr>),
    Sqrt(Box<Expr>),
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        Expr::Num(x)
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(base: Expr, n: u32) -> Expr {
        Expr::Pow(Box::new(base), n)
    }

    pub fn abs(inner: Expr) -> Expr {
        Expr::Abs(Box::new(inner))
    }

    pub fn sqrt(inner: Expr) -> Expr {
        Expr::Sqrt(Box::new(inner))
    }

    fn is_additive(&self) -> bool {
        matches!(self, Expr::Add(..) | Expr::Sub(..))
    }

    /// Visit every variable occurrence.
    pub fn visit_vars<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => f(v),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
            Expr::Pow(a, _) | Expr::Abs(a) | Expr::Sqrt(a) => a.visit_vars(f),
        }
    }

    /// Visit every numeric literal.
    pub fn visit_nums(&self, f: &mut impl FnMut(f64)) {
        match self {
            Expr::Num(x) => f(*x),
            Expr::Var(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_nums(f);
                b.visit_nums(f);
            }
            Expr::Pow(a, _) | Expr::Abs(a) | Expr::Sqrt(a) => a.visit_nums(f),
        }
    }
}

/// Comparison operator of an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
}

impl RelOp {
    pub fn token(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Lt => "<",
            RelOp::Gt => ">",
            RelOp::Le => "<=",
            RelOp::Ge => ">=",
        }
    }
}

impl fmt::Display for RelOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// One comparison, e.g. `abs(V_1) <= (...)`. Hypotheses and the conclusion
/// are both atoms; the connective structure between them is fixed by the
/// conjecture shape and never nests.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub lhs: Expr,
    pub op: RelOp,
    pub rhs: Expr,
}

impl Atom {
    pub fn new(lhs: Expr, op: RelOp, rhs: Expr) -> Atom {
        Atom { lhs, op, rhs }
    }
}

/// Shortest decimal that round-trips to the same f64. `Display` for floats
/// never switches to scientific notation, which the emitted syntax forbids.
pub fn format_num(x: f64) -> String {
    format!("{x}")
}

/// Render a standalone expression. A top-level sum joins spaced, as it
/// would inside a relation operand, but without the operand parens.
pub fn render_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_chain(e, &mut out, true);
    out
}

/// Render an atom with single spaces around the operator. A sum on either
/// side is parenthesized and its top-level chain spaced; everything nested
/// deeper is tight.
pub fn render_atom(atom: &Atom) -> String {
    let mut out = String::new();
    write_rel_operand(&atom.lhs, &mut out);
    out.push(' ');
    out.push_str(atom.op.token());
    out.push(' ');
    write_rel_operand(&atom.rhs, &mut out);
    out
}

fn write_rel_operand(e: &Expr, out: &mut String) {
    if e.is_additive() {
        out.push('(');
        write_chain(e, out, true);
        out.push(')');
    } else {
        write_value(e, out);
    }
}

/// Left-associated +/- chain. `spaced` holds only for the chain a relation
/// operand exposes directly; nested chains always join tight.
fn write_chain(e: &Expr, out: &mut String, spaced: bool) {
    match e {
        Expr::Add(l, r) => {
            write_chain(l, out, spaced);
            out.push_str(if spaced { " + " } else { "+" });
            write_sum_operand(r, out);
        }
        Expr::Sub(l, r) => {
            write_chain(l, out, spaced);
            out.push_str(if spaced { " - " } else { "-" });
            write_sum_operand(r, out);
        }
        _ => write_value(e, out),
    }
}

/// Non-leading sum operand: parenthesized unless it is already atomic
/// (number, variable, power, or function call).
fn write_sum_operand(e: &Expr, out: &mut String) {
    match e {
        Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..) | Expr::Div(..) => {
            out.push('(');
            write_chain(e, out, false);
            out.push(')');
        }
        _ => write_value(e, out),
    }
}

fn write_value(e: &Expr, out: &mut String) {
    match e {
        Expr::Num(x) => out.push_str(&format_num(*x)),
        Expr::Var(v) => out.push_str(v),
        Expr::Mul(l, r) => {
            write_product_lead(l, out);
            out.push('*');
            write_product_operand(r, out);
        }
        Expr::Div(l, r) => {
            write_product_lead(l, out);
            out.push('/');
            write_product_operand(r, out);
        }
        Expr::Pow(b, n) => {
            write_pow_base(b, out);
            out.push('^');
            out.push_str(&n.to_string());
        }
        Expr::Abs(inner) => {
            out.push_str("abs(");
            write_chain(inner, out, false);
            out.push(')');
        }
        Expr::Sqrt(inner) => {
            out.push_str("sqrt(");
            write_chain(inner, out, false);
            out.push(')');
        }
        // A bare sum can only get here through a context that supplies its
        // own delimiters; render it tight.
        Expr::Add(..) | Expr::Sub(..) => write_chain(e, out, false),
    }
}

/// Leading factor of a product: only a sum needs parens, so left-nested
/// products flatten to `a*b*c`.
fn write_product_lead(e: &Expr, out: &mut String) {
    if e.is_additive() {
        out.push('(');
        write_chain(e, out, false);
        out.push(')');
    } else {
        write_value(e, out);
    }
}

/// Non-leading factor: parenthesized unless atomic, so right nesting and
/// mixed chains stay unambiguous.
fn write_product_operand(e: &Expr, out: &mut String) {
    match e {
        Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..) | Expr::Div(..) => {
            out.push('(');
            write_chain(e, out, false);
            out.push(')');
        }
        _ => write_value(e, out),
    }
}

fn write_pow_base(e: &Expr, out: &mut String) {
    match e {
        Expr::Var(_) | Expr::Abs(_) | Expr::Sqrt(_) => write_value(e, out),
        Expr::Num(x) if *x >= 0.0 => write_value(e, out),
        _ => {
            out.push('(');
            write_chain(e, out, false);
            out.push(')');
        }
    }
}
