//! First-order conjectures over the certified decrease bound.
//!
//! A run's robustness budget, uncertainty template, and a sampled error
//! vector pin every free constant in the closed-loop decrease bound. This
//! module turns that instance into a TPTP FOF problem a MetiTarski-class
//! prover can decide: `emit_conjecture` builds the formula, `render` prints
//! it byte-deterministically, `parse_conjecture` reads the same syntax back,
//! and `run_prover` shells out to an installed prover and classifies its
//! SZS verdict.
//!
//! Emission and parsing are exercised against each other: for any conjecture
//! this module produces, `parse_conjecture(render(c))` reconstructs `c`
//! exactly, including the grouping of hypotheses onto lines.

mod conclusion;
mod expr;
mod parse;
mod prover;

pub use conclusion::vdot_conclusion;
pub use expr::{format_num, render_atom, Atom, Expr, RelOp};
pub use parse::{parse_conjecture, parse_expr};
pub use prover::{run_prover, ProverCmd, SzsResult, SzsStatus};

use crate::controller::{RobustBounds, VBoundTemplate};
use crate::lyapunov::Branch;
use crate::Vec6;
use std::io;
use std::path::PathBuf;

/// Errors from conjecture construction, TPTP parsing, and prover dispatch.
/// Prover absence surfaces as `Spawn`, a capability problem distinct from
/// any verdict.
#[derive(Debug, thiserror::Error)]
pub enum FofError {
    #[error("invalid conjecture: {0}")]
    Invalid(String),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unbound variable {name} at {line}:{col}")]
    UnboundVariable {
        name: String,
        line: usize,
        col: usize,
    },
    #[error("failed to launch prover {}: {source}", path.display())]
    Spawn { path: PathBuf, source: io::Error },
    #[error("prover i/o: {0}")]
    Io(#[from] io::Error),
}

/// Half-width of the attitude box hypothesis. Slightly outside the true
/// envelope so the box is closed under rounding of the boundary.
const ANGLE_BOX: f64 = 1.5708;

/// One universally/existentially quantified implication: a conjunction of
/// hypothesis atoms entailing a strict decrease. Hypotheses are grouped;
/// each group renders as one line and the groups survive a parse round-trip.
#[derive(Debug, Clone, PartialEq)]
pub struct FofConjecture {
    pub name: String,
    pub universal_vars: Vec<String>,
    pub existential_vars: Vec<String>,
    pub hypotheses: Vec<Vec<Atom>>,
    pub conclusion: Atom,
}

impl FofConjecture {
    /// Structural checks: well-formed names, no duplicate binders, no empty
    /// hypothesis group, every referenced variable bound, every literal
    /// finite.
    pub fn validate(&self) -> Result<(), FofError> {
        fn is_name(s: &str) -> bool {
            !s.is_empty()
                && s.chars().next().unwrap().is_ascii_alphabetic()
                && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        }
        fn is_var(s: &str) -> bool {
            is_name(s) && s.chars().next().unwrap().is_ascii_uppercase()
        }

        if !is_name(&self.name) {
            return Err(FofError::Invalid(format!("bad conjecture name {:?}", self.name)));
        }
        let mut bound = std::collections::BTreeSet::new();
        for v in self.universal_vars.iter().chain(&self.existential_vars) {
            if !is_var(v) {
                return Err(FofError::Invalid(format!("bad variable name {v:?}")));
            }
            if !bound.insert(v.as_str()) {
                return Err(FofError::Invalid(format!("variable {v} bound twice")));
            }
        }
        if self.hypotheses.is_empty() || self.hypotheses.iter().any(|g| g.is_empty()) {
            return Err(FofError::Invalid("empty hypothesis group".into()));
        }

        let mut err = None;
        let mut check = |atom: &Atom, what: &str| {
            for side in [&atom.lhs, &atom.rhs] {
                side.visit_vars(&mut |v| {
                    if err.is_none() && !bound.contains(v) {
                        err = Some(FofError::Invalid(format!(
                            "unbound variable {v} in {what}"
                        )));
                    }
                });
                let mut bad_num = false;
                side.visit_nums(&mut |x| bad_num |= !x.is_finite());
                if bad_num && err.is_none() {
                    err = Some(FofError::Invalid(format!("non-finite literal in {what}")));
                }
            }
        };
        for group in &self.hypotheses {
            for atom in group {
                check(atom, "hypotheses");
            }
        }
        check(&self.conclusion, "conclusion");
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Print the complete problem. The layout is frozen: quantifier header,
    /// an assumptions comment, one line per hypothesis group with `&`
    /// continuation, an implication comment, then the conclusion. Ends with
    /// the fof terminator and a newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "fof({},conjecture, ![{}] : ?[{}]:\n",
            self.name,
            self.universal_vars.join(","),
            self.existential_vars.join(","),
        ));
        out.push_str("% assumptions\n");
        for (i, group) in self.hypotheses.iter().enumerate() {
            out.push_str(if i == 0 { "( " } else { "& " });
            let atoms: Vec<String> = group.iter().map(render_atom).collect();
            out.push_str(&atoms.join(" & "));
            out.push('\n');
        }
        out.push_str("% implies\n");
        out.push_str(&format!("=> {} )).\n", render_atom(&self.conclusion)));
        out
    }
}

/// Canonical conjecture name for a controller branch.
pub fn default_name(branch: Branch) -> &'static str {
    match branch {
        Branch::Outside => "Stability_Eq15",
        Branch::BoundaryLayer => "Stability_Eq16",
    }
}

/// Build the stability conjecture for one sampled error vector.
///
/// `vdot_poly` is the decrease bound as polynomial text, normally from
/// [`vdot_conclusion`]; it is parsed here so anything this function accepts
/// is also in the parser's fragment. An empty `name` selects the branch's
/// canonical name.
pub fn emit_conjecture(
    bounds: &RobustBounds,
    template: &VBoundTemplate,
    e: &Vec6,
    vdot_poly: &str,
    name: &str,
    branch: Branch,
) -> Result<FofConjecture, FofError> {
    let name = if name.is_empty() {
        default_name(branch).to_string()
    } else {
        name.to_string()
    };

    let evar = |i: usize| Expr::var(format!("E_{}", i + 1));

    let equalities = (0..6)
        .map(|i| Atom::new(evar(i), RelOp::Eq, Expr::num(e[i])))
        .collect();

    let angle_box = ["Phi", "Theta"]
        .into_iter()
        .flat_map(|v| {
            [
                Atom::new(Expr::var(v), RelOp::Gt, Expr::num(-ANGLE_BOX)),
                Atom::new(Expr::var(v), RelOp::Lt, Expr::num(ANGLE_BOX)),
            ]
        })
        .collect();

    // abs(V_i) <= xi*(H + a_i*abs(E_{i+3}) + b_i*abs(E_i)) + beta_max*(S + D),
    // the same envelope the controller computes numerically.
    let v_bound_group = |i: usize| {
        let inner = Expr::add(
            Expr::add(
                Expr::num(bounds.ref_accel_max),
                Expr::mul(Expr::num(template.rate_coeff[i]), Expr::abs(evar(i + 3))),
            ),
            Expr::mul(Expr::num(template.err_coeff[i]), Expr::abs(evar(i))),
        );
        let rhs = Expr::add(
            Expr::mul(Expr::num(bounds.inertia_mismatch_max), inner),
            Expr::mul(
                Expr::num(bounds.beta_max),
                Expr::add(Expr::num(bounds.delta_n_max), Expr::num(bounds.delta_d_max)),
            ),
        );
        vec![Atom::new(
            Expr::abs(Expr::var(format!("V_{}", i + 1))),
            RelOp::Le,
            rhs,
        )]
    };

    let v_norm = Expr::sqrt(Expr::add(
        Expr::add(
            Expr::pow(Expr::var("V_1"), 2),
            Expr::pow(Expr::var("V_2"), 2),
        ),
        Expr::pow(Expr::var("V_3"), 2),
    ));
    let switching_floor = vec![
        Atom::new(Expr::var("Delta_E"), RelOp::Gt, Expr::num(0.0)),
        Atom::new(
            Expr::var("Delta_E"),
            RelOp::Ge,
            Expr::div(v_norm, Expr::num(bounds.beta_min)),
        ),
    ];

    let conclusion = Atom::new(parse_expr(vdot_poly)?, RelOp::Lt, Expr::num(0.0));

    let conj = FofConjecture {
        name,
        universal_vars: (1..=6)
            .map(|i| format!("E_{i}"))
            .chain(["Phi".into(), "Theta".into()])
            .collect(),
        existential_vars: (1..=3)
            .map(|i| format!("V_{i}"))
            .chain(["Delta_E".into()])
            .collect(),
        hypotheses: vec![
            equalities,
            angle_box,
            v_bound_group(0),
            v_bound_group(1),
            v_bound_group(2),
            switching_floor,
        ],
        conclusion,
    };
    conj.validate()?;
    Ok(conj)
}
