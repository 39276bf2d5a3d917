//! Recursive-descent parser for the emitted conjecture syntax.
//!
//! This reads the fragment `render` produces, not general TPTP: one fof
//! clause tagged conjecture, a universal then an existential quantifier
//! block, a conjunction of comparison atoms, and one conclusion atom behind
//! `=>`. Arithmetic covers +, -, *, /, integer `^`, `abs`, `sqrt`, decimal
//! literals, and upper-case variables. `%` comments run to end of line.
//!
//! Hypothesis atoms that start on the same source line form one group, so a
//! parse inverts `render` group for group. Errors carry 1-based line and
//! column of the offending token.

use super::expr::{Atom, Expr, RelOp};
use super::{FofConjecture, FofError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Num(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Bang,
    Question,
    Amp,
    Implies,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Num(x) => format!("number {x}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Question => "`?`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Implies => "`=>`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> FofError {
    FofError::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Spanned>, FofError> {
    let mut toks = Vec::new();
    let mut chars = src.char_indices().peekable();
    let mut line = 1usize;
    let mut col = 1usize;

    macro_rules! push {
        ($tok:expr, $n:expr) => {{
            toks.push(Spanned {
                tok: $tok,
                line,
                col,
            });
            col += $n;
        }};
    }

    while let Some((i, c)) = chars.next() {
        match c {
            '\n' => {
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => col += 1,
            '%' => {
                // Comment to end of line; the newline is handled above.
                while let Some(&(_, nc)) = chars.peek() {
                    if nc == '\n' {
                        break;
                    }
                    chars.next();
                }
                col = 1;
            }
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            '[' => push!(Tok::LBracket, 1),
            ']' => push!(Tok::RBracket, 1),
            ',' => push!(Tok::Comma, 1),
            ':' => push!(Tok::Colon, 1),
            '!' => push!(Tok::Bang, 1),
            '?' => push!(Tok::Question, 1),
            '&' => push!(Tok::Amp, 1),
            '+' => push!(Tok::Plus, 1),
            '-' => push!(Tok::Minus, 1),
            '*' => push!(Tok::Star, 1),
            '/' => push!(Tok::Slash, 1),
            '^' => push!(Tok::Caret, 1),
            '<' => {
                if chars.next_if(|&(_, nc)| nc == '=').is_some() {
                    push!(Tok::Le, 2);
                } else {
                    push!(Tok::Lt, 1);
                }
            }
            '>' => {
                if chars.next_if(|&(_, nc)| nc == '=').is_some() {
                    push!(Tok::Ge, 2);
                } else {
                    push!(Tok::Gt, 1);
                }
            }
            '=' => {
                if chars.next_if(|&(_, nc)| nc == '>').is_some() {
                    push!(Tok::Implies, 2);
                } else {
                    push!(Tok::Eq, 1);
                }
            }
            '.' => push!(Tok::Dot, 1),
            c if c.is_ascii_digit() => {
                let mut end = i + 1;
                while let Some(&(j, nc)) = chars.peek() {
                    if nc.is_ascii_digit() {
                        chars.next();
                        end = j + 1;
                    } else {
                        break;
                    }
                }
                // A dot joins the literal only when digits follow, so the
                // fof terminator after a trailing number stays its own token.
                if let Some(&(j, '.')) = chars.peek() {
                    let mut ahead = chars.clone();
                    ahead.next();
                    if ahead.peek().is_some_and(|&(_, nc)| nc.is_ascii_digit()) {
                        chars.next();
                        end = j + 1;
                        while let Some(&(j, nc)) = chars.peek() {
                            if nc.is_ascii_digit() {
                                chars.next();
                                end = j + 1;
                            } else {
                                break;
                            }
                        }
                    }
                }
                let text = &src[i..end];
                let value: f64 = text
                    .parse()
                    .map_err(|_| err(line, col, format!("bad numeric literal {text:?}")))?;
                push!(Tok::Num(value), text.len());
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = i + c.len_utf8();
                while let Some(&(j, nc)) = chars.peek() {
                    if nc.is_ascii_alphanumeric() || nc == '_' {
                        chars.next();
                        end = j + 1;
                    } else {
                        break;
                    }
                }
                let word = &src[i..end];
                push!(Tok::Word(word.to_string()), word.len());
            }
            other => return Err(err(line, col, format!("unexpected character {other:?}"))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Every variable occurrence, for the post-parse binding check.
    vars_seen: Vec<(String, usize, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Spanned, FofError> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| self.eof("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn eof(&self, msg: &str) -> FofError {
        let (line, col) = self
            .toks
            .last()
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1));
        err(line, col, msg)
    }

    fn expect(&mut self, want: &Tok) -> Result<Spanned, FofError> {
        let t = self.next()?;
        if &t.tok == want {
            Ok(t)
        } else {
            Err(err(
                t.line,
                t.col,
                format!("expected {}, found {}", want.describe(), t.tok.describe()),
            ))
        }
    }

    fn expect_word(&mut self, want: &str) -> Result<(), FofError> {
        let t = self.next()?;
        match &t.tok {
            Tok::Word(w) if w == want => Ok(()),
            other => Err(err(
                t.line,
                t.col,
                format!("expected `{want}`, found {}", other.describe()),
            )),
        }
    }

    fn var_list(&mut self) -> Result<Vec<String>, FofError> {
        self.expect(&Tok::LBracket)?;
        let mut vars = Vec::new();
        loop {
            let t = self.next()?;
            match t.tok {
                Tok::Word(w) => {
                    if !w.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                        return Err(err(
                            t.line,
                            t.col,
                            format!("variable `{w}` must start with an upper-case letter"),
                        ));
                    }
                    vars.push(w);
                }
                other => {
                    return Err(err(
                        t.line,
                        t.col,
                        format!("expected a variable, found {}", other.describe()),
                    ))
                }
            }
            let t = self.next()?;
            match t.tok {
                Tok::Comma => continue,
                Tok::RBracket => break,
                other => {
                    return Err(err(
                        t.line,
                        t.col,
                        format!("expected `,` or `]`, found {}", other.describe()),
                    ))
                }
            }
        }
        Ok(vars)
    }

    fn relop(&mut self) -> Result<RelOp, FofError> {
        let t = self.next()?;
        match t.tok {
            Tok::Eq => Ok(RelOp::Eq),
            Tok::Lt => Ok(RelOp::Lt),
            Tok::Gt => Ok(RelOp::Gt),
            Tok::Le => Ok(RelOp::Le),
            Tok::Ge => Ok(RelOp::Ge),
            other => Err(err(
                t.line,
                t.col,
                format!("expected a comparison operator, found {}", other.describe()),
            )),
        }
    }

    fn atom(&mut self) -> Result<Atom, FofError> {
        let lhs = self.expr()?;
        let op = self.relop()?;
        let rhs = self.expr()?;
        Ok(Atom::new(lhs, op, rhs))
    }

    fn expr(&mut self) -> Result<Expr, FofError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = Expr::add(acc, self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = Expr::sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, FofError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = Expr::mul(acc, self.factor()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    acc = Expr::div(acc, self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, FofError> {
        let base = self.primary()?;
        if self.peek().map(|t| &t.tok) == Some(&Tok::Caret) {
            self.pos += 1;
            let t = self.next()?;
            match t.tok {
                Tok::Num(x) if x.fract() == 0.0 && (0.0..=u32::MAX as f64).contains(&x) => {
                    Ok(Expr::pow(base, x as u32))
                }
                other => Err(err(
                    t.line,
                    t.col,
                    format!(
                        "exponent must be a non-negative integer, found {}",
                        other.describe()
                    ),
                )),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr, FofError> {
        let t = self.next()?;
        match t.tok {
            Tok::Num(x) => Ok(Expr::num(x)),
            Tok::Minus => {
                let n = self.next()?;
                match n.tok {
                    Tok::Num(x) => Ok(Expr::num(-x)),
                    other => Err(err(
                        n.line,
                        n.col,
                        format!("`-` must prefix a number, found {}", other.describe()),
                    )),
                }
            }
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(inner)
            }
            Tok::Word(w) if w == "abs" || w == "sqrt" => {
                self.expect(&Tok::LParen)?;
                let inner = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(if w == "abs" {
                    Expr::abs(inner)
                } else {
                    Expr::sqrt(inner)
                })
            }
            Tok::Word(w) => {
                if w.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
                    self.vars_seen.push((w.clone(), t.line, t.col));
                    Ok(Expr::var(w))
                } else {
                    Err(err(
                        t.line,
                        t.col,
                        format!("unknown function or constant `{w}`"),
                    ))
                }
            }
            other => Err(err(
                t.line,
                t.col,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }
}

/// Parse a bare arithmetic expression, as used for conjecture conclusions.
pub fn parse_expr(text: &str) -> Result<Expr, FofError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars_seen: Vec::new(),
    };
    if p.toks.is_empty() {
        return Err(err(1, 1, "empty expression"));
    }
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(err(
            t.line,
            t.col,
            format!("trailing input {}", t.tok.describe()),
        ));
    }
    Ok(e)
}

/// Parse a complete problem back into a conjecture. Inverse of
/// [`FofConjecture::render`] on everything the emitter produces, including
/// the line grouping of hypotheses.
pub fn parse_conjecture(text: &str) -> Result<FofConjecture, FofError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars_seen: Vec::new(),
    };

    p.expect_word("fof")?;
    p.expect(&Tok::LParen)?;
    let name = match p.next()? {
        Spanned {
            tok: Tok::Word(w), ..
        } => w,
        t => {
            return Err(err(
                t.line,
                t.col,
                format!("expected a conjecture name, found {}", t.tok.describe()),
            ))
        }
    };
    p.expect(&Tok::Comma)?;
    p.expect_word("conjecture")?;
    p.expect(&Tok::Comma)?;

    p.expect(&Tok::Bang)?;
    let universal_vars = p.var_list()?;
    p.expect(&Tok::Colon)?;
    p.expect(&Tok::Question)?;
    let existential_vars = p.var_list()?;
    p.expect(&Tok::Colon)?;

    p.expect(&Tok::LParen)?;
    let mut groups: Vec<Vec<Atom>> = Vec::new();
    let mut group_line = 0usize;
    loop {
        let at_line = p
            .peek()
            .ok_or_else(|| p.eof("unexpected end of input in hypotheses"))?
            .line;
        let atom = p.atom()?;
        if at_line == group_line {
            groups.last_mut().unwrap().push(atom);
        } else {
            groups.push(vec![atom]);
            group_line = at_line;
        }
        let t = p.next()?;
        match t.tok {
            Tok::Amp => continue,
            Tok::Implies => break,
            other => {
                return Err(err(
                    t.line,
                    t.col,
                    format!("expected `&` or `=>`, found {}", other.describe()),
                ))
            }
        }
    }
    let conclusion = p.atom()?;
    p.expect(&Tok::RParen)?;
    p.expect(&Tok::RParen)?;
    p.expect(&Tok::Dot)?;
    if let Some(t) = p.peek() {
        return Err(err(
            t.line,
            t.col,
            format!("trailing input {}", t.tok.describe()),
        ));
    }

    let bound: std::collections::BTreeSet<&str> = universal_vars
        .iter()
        .chain(&existential_vars)
        .map(|s| s.as_str())
        .collect();
    if let Some((name, line, col)) = p
        .vars_seen
        .iter()
        .find(|(v, _, _)| !bound.contains(v.as_str()))
    {
        return Err(FofError::UnboundVariable {
            name: name.clone(),
            line: *line,
            col: *col,
        });
    }

    let conj = FofConjecture {
        name,
        universal_vars,
        existential_vars,
        hypotheses: groups,
        conclusion,
    };
    conj.validate()?;
    Ok(conj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{RobustBounds, VBoundTemplate};
    use crate::fof::{emit_conjecture, vdot_conclusion};
    use crate::lyapunov::{Branch, LyapunovCert};
    use crate::{Vec3, Vec6};

    fn sample_conjecture(branch: Branch, e: Vec6) -> FofConjecture {
        let bounds = RobustBounds::new(0.001, 0.003, 0.001, 1.2, 0.5, 170.5, 173.0, 0.01).unwrap();
        let template =
            VBoundTemplate::new(Vec3::new(0.004, 0.004, 0.482675), Vec3::new(17.5, 17.5, 1.8))
                .unwrap();
        let cert = LyapunovCert::new(
            crate::controller::Gains::new(Vec3::from_element(2.0), Vec3::from_element(3.0))
                .unwrap(),
        )
        .unwrap();
        let poly = vdot_conclusion(&cert, &bounds, branch);
        emit_conjecture(&bounds, &template, &e, &poly, "", branch).unwrap()
    }

    #[test]
    fn round_trips_both_branches() {
        for branch in [Branch::Outside, Branch::BoundaryLayer] {
            let conj = sample_conjecture(
                branch,
                Vec6::from_column_slice(&[1.6, 3.1, 2.0, 9.3, 6.8, 4.8]),
            );
            let text = conj.render();
            let back = parse_conjecture(&text).unwrap();
            assert_eq!(back, conj);
            assert_eq!(back.render(), text);
        }
    }

    #[test]
    fn expression_precedence_and_grouping() {
        let e = parse_expr("1+2*3").unwrap();
        assert_eq!(
            e,
            Expr::add(Expr::num(1.0), Expr::mul(Expr::num(2.0), Expr::num(3.0)))
        );
        let e = parse_expr("(1+2)*3").unwrap();
        assert_eq!(
            e,
            Expr::mul(Expr::add(Expr::num(1.0), Expr::num(2.0)), Expr::num(3.0))
        );
        let e = parse_expr("A-B-C").unwrap();
        assert_eq!(
            e,
            Expr::sub(Expr::sub(Expr::var("A"), Expr::var("B")), Expr::var("C"))
        );
        let e = parse_expr("sqrt(X^2+Y^2)/2").unwrap();
        assert_eq!(
            e,
            Expr::div(
                Expr::sqrt(Expr::add(
                    Expr::pow(Expr::var("X"), 2),
                    Expr::pow(Expr::var("Y"), 2)
                )),
                Expr::num(2.0)
            )
        );
    }

    #[test]
    fn error_positions_are_one_based_line_and_column() {
        let text = "fof(T,conjecture, ![X] : ?[Y]:\n( X = 1\n=> X @ 2 )).\n";
        match parse_conjecture(text) {
            Err(FofError::Parse { line, col, msg }) => {
                assert_eq!(line, 3);
                assert_eq!(col, 6);
                assert!(msg.contains("unexpected character"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unbound_variable_is_named_with_position() {
        let text = "fof(T,conjecture, ![X] : ?[Y]:\n( X = 1\n=> Z < 2 )).\n";
        match parse_conjecture(text) {
            Err(FofError::UnboundVariable { name, line, col }) => {
                assert_eq!(name, "Z");
                assert_eq!(line, 3);
                assert_eq!(col, 4);
            }
            other => panic!("expected unbound variable, got {other:?}"),
        }
    }

    #[test]
    fn rejects_trailing_input_and_missing_terminator() {
        let good = sample_conjecture(Branch::Outside, Vec6::zeros()).render();
        assert!(parse_conjecture(&format!("{good}junk")).is_err());
        assert!(parse_conjecture(good.trim_end_matches(".\n")).is_err());
    }

    #[test]
    fn number_dot_boundary() {
        assert_eq!(parse_expr("170.5").unwrap(), Expr::num(170.5));
        // A dot with no digit after it is a terminator, not a decimal point,
        // even right after a literal.
        let e = parse_expr("25.").unwrap_err();
        assert!(e.to_string().contains("trailing"), "{e}");
    }

    #[test]
    fn groups_follow_source_lines() {
        let text = "fof(T,conjecture, ![X,Y] : ?[Z]:\n( X = 1 & Y = 2\n& X < 3\n=> Z < 4 )).\n";
        let conj = parse_conjecture(text).unwrap();
        assert_eq!(conj.hypotheses.len(), 2);
        assert_eq!(conj.hypotheses[0].len(), 2);
        assert_eq!(conj.hypotheses[1].len(), 1);
    }

    #[test]
    fn comments_are_skipped_anywhere() {
        let text =
            "% header\nfof(T,conjecture, ![X] : ?[Y]:\n% assumptions\n( X = 1 % inline\n=> X < 2 )).\n";
        assert!(parse_conjecture(text).is_ok());
    }

    #[test]
    fn unary_minus_binds_to_literals_only() {
        assert_eq!(parse_expr("-1.5708").unwrap(), Expr::num(-1.5708));
        assert!(parse_expr("-X").is_err());
    }

    proptest::proptest! {
        #[test]
        fn fuzzed_instances_round_trip(
            e in proptest::array::uniform6(-50.0f64..50.0),
            outside in proptest::prelude::any::<bool>(),
        ) {
            let branch = if outside { Branch::Outside } else { Branch::BoundaryLayer };
            let conj = sample_conjecture(branch, Vec6::from_column_slice(&e));
            let back = parse_conjecture(&conj.render()).unwrap();
            proptest::prop_assert_eq!(back, conj);
        }
    }
}
