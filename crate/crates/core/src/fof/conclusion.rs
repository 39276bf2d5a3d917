//! Symbolic form of the certified decrease bound, for the conjecture's
//! conclusion.
//!
//! The closed-loop decrease rate along E is bounded above by
//!
//! ```text
//! -E'PE + 2 s'V - c * Delta_E * R(s)        s = B'QE
//! ```
//!
//! where the switching term R depends on the controller branch: outside the
//! boundary layer c = 2 beta_min and R = ||s||, inside c = 2 beta_min / sigma
//! and R = ||s||^2. Expanding s componentwise gives a polynomial in the
//! symbols E_1..E_6, V_1..V_3 and Delta_E, plus one radical. The conjecture
//! asserts this bound is negative under the hypothesis box.
//!
//! Term order is deterministic: positive terms first, then negative, each
//! group sorted by total degree and then lexicographically on the exponent
//! vector (E_1 most significant, the radical last), descending. Coefficients
//! that are 1 are omitted; signs live in the chain, not the coefficients.

use super::expr::{render_expr, Expr};
use crate::controller::RobustBounds;
use crate::lyapunov::{Branch, LyapunovCert};

/// E_1..E_6, V_1..V_3, Delta_E, then the radical pseudo-factor.
const NVARS: usize = 11;
const DELTA_IDX: usize = 9;
const RADICAL_IDX: usize = 10;

/// Relative threshold under which a coefficient is treated as solver noise
/// and dropped rather than rendered.
const DUST: f64 = 1e-12;

#[derive(Clone, Copy)]
struct Monomial {
    coeff: f64,
    exps: [u8; NVARS],
}

impl Monomial {
    fn degree(&self) -> u32 {
        self.exps.iter().map(|&e| e as u32).sum()
    }
}

fn mono(coeff: f64, factors: &[(usize, u8)]) -> Monomial {
    let mut exps = [0u8; NVARS];
    for &(idx, e) in factors {
        exps[idx] += e;
    }
    Monomial { coeff, exps }
}

/// Drop near-zero coefficients, then order: sign partition, positives first,
/// and grlex descending within each partition.
fn tidy(mut monos: Vec<Monomial>) -> Vec<Monomial> {
    let max = monos.iter().fold(0.0f64, |m, t| m.max(t.coeff.abs()));
    monos.retain(|t| t.coeff.abs() > DUST * max);
    monos.sort_by(|a, b| {
        let sign = |m: &Monomial| if m.coeff > 0.0 { 0u8 } else { 1u8 };
        sign(a)
            .cmp(&sign(b))
            .then(b.degree().cmp(&a.degree()))
            .then(b.exps.cmp(&a.exps))
    });
    monos
}

fn var_name(idx: usize) -> String {
    match idx {
        0..=5 => format!("E_{}", idx + 1),
        6..=8 => format!("V_{}", idx - 5),
        DELTA_IDX => "Delta_E".to_string(),
        _ => unreachable!("radical has no name"),
    }
}

/// One term with an explicit coefficient to render; the chain decides
/// whether that is the signed or absolute value. `radical` is consumed by
/// the at most one monomial that references it.
fn term_expr(coeff: f64, m: &Monomial, radical: &mut Option<Expr>) -> Expr {
    let mut factors = Vec::new();
    if coeff != 1.0 || m.exps.iter().all(|&e| e == 0) {
        factors.push(Expr::num(coeff));
    }
    for idx in 0..NVARS {
        match (idx, m.exps[idx]) {
            (_, 0) => {}
            (RADICAL_IDX, _) => factors.push(radical.take().expect("radical used twice")),
            (_, 1) => factors.push(Expr::var(var_name(idx))),
            (_, n) => factors.push(Expr::pow(Expr::var(var_name(idx)), n as u32)),
        }
    }
    let mut it = factors.into_iter();
    let first = it.next().expect("empty monomial");
    it.fold(first, Expr::mul)
}

/// Fold ordered monomials into a left-associated chain. A leading negative
/// term keeps its sign inside the coefficient; later terms contribute their
/// absolute value under a minus.
fn chain(monos: &[Monomial], mut radical: Option<Expr>) -> Expr {
    let mut it = monos.iter();
    let head = it.next().expect("empty polynomial");
    let mut acc = term_expr(head.coeff, head, &mut radical);
    for m in it {
        let t = term_expr(m.coeff.abs(), m, &mut radical);
        acc = if m.coeff > 0.0 {
            Expr::add(acc, t)
        } else {
            Expr::sub(acc, t)
        };
    }
    acc
}

/// Render the decrease bound for `branch` as polynomial text, ready to be
/// embedded as a conjecture conclusion.
pub fn vdot_conclusion(cert: &LyapunovCert, bounds: &RobustBounds, branch: Branch) -> String {
    let p = cert.p();
    let q = cert.q();

    let mut head = Vec::new();
    // -E'PE, exploiting symmetry.
    for i in 0..6 {
        head.push(mono(-p[(i, i)], &[(i, 2)]));
        for j in (i + 1)..6 {
            head.push(mono(-2.0 * p[(i, j)], &[(i, 1), (j, 1)]));
        }
    }
    // 2 s'V with s_k = sum_j q[k+3][j] E_j.
    for k in 0..3 {
        for j in 0..6 {
            head.push(mono(2.0 * q[(k + 3, j)], &[(j, 1), (6 + k, 1)]));
        }
    }

    // ||s||^2 expanded over E, shared by both branches.
    let mut ssq = Vec::new();
    for j in 0..6 {
        for l in j..6 {
            let mut c = 0.0;
            for k in 0..3 {
                c += q[(k + 3, j)] * q[(k + 3, l)];
            }
            if j != l {
                c *= 2.0;
            }
            ssq.push(mono(c, &[(j, 1), (l, 1)]));
        }
    }
    let ssq = tidy(ssq);
    let ssq_expr = chain(&ssq, None);

    let (scale, radical) = match branch {
        Branch::Outside => (2.0 * bounds.beta_min, Expr::sqrt(ssq_expr)),
        Branch::BoundaryLayer => (2.0 * bounds.beta_min / bounds.sigma, ssq_expr),
    };
    head.push(mono(-scale, &[(DELTA_IDX, 1), (RADICAL_IDX, 1)]));

    render_expr(&chain(&tidy(head), Some(radical)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::Gains;
    use crate::Vec3;

    fn cert() -> LyapunovCert {
        LyapunovCert::new(
            Gains::new(Vec3::from_element(2.0), Vec3::from_element(3.0)).unwrap(),
        )
        .unwrap()
    }

    fn bounds() -> RobustBounds {
        RobustBounds::new(0.001, 0.003, 0.001, 1.2, 0.5, 170.5, 173.0, 0.01).unwrap()
    }

    // For uniform gains (2,3) the certificate blocks are dyadic, Q's lower
    // rows are [0.25 I  0.25 I], and P = I, so every coefficient below is
    // exact and the text is stable down to the byte.
    const SSQ: &str = "0.0625*E_1^2+(0.125*E_1*E_4)+(0.0625*E_2^2)+(0.125*E_2*E_5)\
+(0.0625*E_3^2)+(0.125*E_3*E_6)+(0.0625*E_4^2)+(0.0625*E_5^2)+(0.0625*E_6^2)";

    fn head() -> String {
        "0.5*E_1*V_1 + (0.5*E_2*V_2) + (0.5*E_3*V_3) + (0.5*E_4*V_1) + (0.5*E_5*V_2) \
+ (0.5*E_6*V_3) - E_1^2 - E_2^2 - E_3^2 - E_4^2 - E_5^2 - E_6^2"
            .to_string()
    }

    #[test]
    fn outside_branch_matches_hand_expansion() {
        let text = vdot_conclusion(&cert(), &bounds(), Branch::Outside);
        assert_eq!(text, format!("{} - (341*Delta_E*sqrt({}))", head(), SSQ));
    }

    #[test]
    fn boundary_branch_divides_by_sigma_and_drops_the_root() {
        let text = vdot_conclusion(&cert(), &bounds(), Branch::BoundaryLayer);
        assert_eq!(text, format!("{} - (34100*Delta_E*({}))", head(), SSQ));
    }

    #[test]
    fn per_axis_gains_shape_the_cross_terms() {
        let cert = LyapunovCert::new(
            Gains::new(Vec3::new(2.0, 2.0, 8.0), Vec3::new(3.0, 3.0, 6.0)).unwrap(),
        )
        .unwrap();
        let text = vdot_conclusion(&cert, &bounds(), Branch::Outside);
        // Third-axis switching row becomes 0.0625 E_3 + 0.09375 E_6.
        assert!(text.contains("0.125*E_3*V_3"), "{text}");
        assert!(text.contains("0.1875*E_6*V_3"), "{text}");
        assert!(text.contains("0.01171875*E_3*E_6"), "{text}");
        // P stays the identity for any valid gains.
        assert!(text.contains("- E_1^2 - E_2^2 - E_3^2"), "{text}");
    }

    #[test]
    fn term_order_is_sign_partition_then_graded_lex() {
        let text = vdot_conclusion(&cert(), &bounds(), Branch::Outside);
        let first_minus = text.find(" - ").unwrap();
        let positives = &text[..first_minus];
        assert!(positives.find("E_1*V_1").unwrap() < positives.find("E_2*V_2").unwrap());
        assert!(positives.find("E_3*V_3").unwrap() < positives.find("E_4*V_1").unwrap());
        assert!(!positives.contains("E_1^2"));
        assert!(text.find("E_6^2").unwrap() < text.find("341").unwrap());
    }
}
