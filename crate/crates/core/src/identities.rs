//! Catalogue of the constructive su(2) identities used to build the whole
//! enveloping algebra from `{X, Z, Z²}`, and their mechanical verification.
//!
//! Several identities hold only up to an unnamed polynomial of lower degree.
//! Those are tested modulo the span of canonical monomials of degree ≤ χ,
//! both symbolically (after Casimir reduction) and numerically at spin j.

use serde::Serialize;

use crate::linalg::{self, ComplexMatrix};
use crate::su2::{
    self, casimir_reduce, casimir_value, coeff, eval_poly, imag, normal_order_str, poly_commutator, real, to_c64,
    Coeff, Convention, Gen, SpinPoly,
};

#[derive(Clone, Debug)]
pub struct TopTerm {
    pub label: String,
    pub poly: SpinPoly,
    /// Coefficient as printed; `None` when the text leaves it unspecified.
    pub stated: Option<Coeff>,
}

#[derive(Clone, Debug)]
pub enum Mode {
    /// `lhs − rhs` orders to zero.
    Exact,
    /// `lhs − rhs` reduces to zero modulo the Casimir relation.
    ExactCasimir,
    /// `lhs − rhs` has no component above degree χ.
    ModuloLower,
    /// Coefficients of the listed terms are fitted on the part above degree χ.
    Fit(Vec<TopTerm>),
}

#[derive(Clone, Debug)]
pub struct IdentityCase {
    pub name: String,
    pub instance: String,
    pub chi: u32,
    pub lhs: SpinPoly,
    pub rhs: SpinPoly,
    pub mode: Mode,
    /// The right-hand side exactly as printed, when it differs from `rhs`.
    pub literal: Option<SpinPoly>,
    /// Compare in the spin-j quotient (Casimir-reduced) rather than in the
    /// free enveloping algebra.
    pub casimir: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityOutcome {
    pub name: String,
    pub instance: String,
    pub mode: &'static str,
    pub chi: u32,
    /// Norm of the symbolic remainder that is not allowed by the mode.
    pub symbolic_residual: f64,
    /// Relative residual of the spin-j image outside the degree ≤ χ span.
    pub span_residual: f64,
    pub fitted: Vec<(String, [f64; 2])>,
    pub printed: Vec<(String, Option<[f64; 2]>)>,
    pub matches_printed: bool,
    pub pass: bool,
}

pub const SPAN_TOL: f64 = 1e-9;
const FIT_TOL: f64 = 1e-12;

fn w(conv: &Convention, s: &str) -> SpinPoly {
    let mapped: String = s
        .chars()
        .map(|ch| match ch {
            'A' => gen_char(conv.a),
            'B' => gen_char(conv.b),
            'C' => gen_char(conv.c),
            other => other,
        })
        .collect();
    normal_order_str(&mapped).expect("catalogue words use known labels")
}

fn gen_char(g: Gen) -> char {
    match g {
        Gen::X => 'X',
        Gen::Y => 'Y',
        Gen::Z => 'Z',
    }
}

fn rep(s: &str, k: u32) -> String {
    s.repeat(k as usize)
}

fn sum(polys: impl IntoIterator<Item = SpinPoly>) -> SpinPoly {
    polys.into_iter().fold(SpinPoly::zero(), |acc, p| &acc + &p)
}

fn combo(terms: &[TopTerm]) -> SpinPoly {
    let mut out = SpinPoly::zero();
    for t in terms {
        if let Some(c) = &t.stated {
            out.add_scaled(&t.poly, c);
        }
    }
    out
}

fn jj(two_j: u32) -> Coeff {
    coeff(casimir_value(two_j), num_traits::Zero::zero())
}

fn case(name: &str, instance: String, chi: u32, lhs: SpinPoly, rhs: SpinPoly, mode: Mode) -> IdentityCase {
    IdentityCase {
        name: name.to_string(),
        instance,
        chi,
        lhs,
        rhs,
        casimir: matches!(mode, Mode::ExactCasimir),
        mode,
        literal: None,
    }
}

fn fit_case(name: &str, instance: String, chi: u32, lhs: SpinPoly, terms: Vec<TopTerm>, casimir: bool) -> IdentityCase {
    let rhs = combo(&terms);
    let mut c = case(name, instance, chi, lhs, rhs, Mode::Fit(terms));
    c.casimir = casimir;
    c
}

fn term(label: &str, poly: SpinPoly, stated: Option<Coeff>) -> TopTerm {
    TopTerm {
        label: label.to_string(),
        poly,
        stated,
    }
}

/// The full catalogue at spin `j = two_j / 2`.
pub fn catalogue(two_j: u32) -> Vec<IdentityCase> {
    let cyc = Convention::CYCLIC;
    let conventions = [Convention::CYCLIC, Convention::ANTICYCLIC];
    let mut out = Vec::new();

    let x = SpinPoly::gen(Gen::X);
    let z2 = SpinPoly::mono(0, 0, 2);
    let zy = w(&cyc, "CB");
    let zy_sym = &zy + &w(&cyc, "BC");
    out.push(case(
        "zy",
        "[Z²,X] = 2iZY − X".into(),
        1,
        poly_commutator(&z2, &x),
        &zy.scale(&imag(2, 1)) - &x,
        Mode::Exact,
    ));
    out.push(case(
        "zy_symmetric",
        "[Z²,X] = i(ZY + YZ)".into(),
        1,
        poly_commutator(&z2, &x),
        zy_sym.scale(&imag(1, 1)),
        Mode::Exact,
    ));
    out.push(case(
        "y_zx",
        "[Y,ZX] = −i(Z² − X²)".into(),
        1,
        poly_commutator(&w(&cyc, "B"), &w(&cyc, "CA")),
        (&w(&cyc, "CC") - &w(&cyc, "AA")).scale(&imag(-1, 1)),
        Mode::Exact,
    ));
    out.push(case(
        "x_zy",
        "[X,ZY] = i(Z² − Y²)".into(),
        1,
        poly_commutator(&w(&cyc, "A"), &w(&cyc, "CB")),
        (&w(&cyc, "CC") - &w(&cyc, "BB")).scale(&imag(1, 1)),
        Mode::Exact,
    ));
    out.push(case(
        "x2_z",
        "[X²,Z] = −i(XY + YX)".into(),
        1,
        poly_commutator(&w(&cyc, "AA"), &w(&cyc, "C")),
        (&w(&cyc, "AB") + &w(&cyc, "BA")).scale(&imag(-1, 1)),
        Mode::Exact,
    ));
    out.push(case(
        "casimir",
        format!("X² + Y² + Z² = j(j+1), 2j = {two_j}"),
        0,
        sum([w(&cyc, "AA"), w(&cyc, "BB"), w(&cyc, "CC")]),
        SpinPoly::constant(jj(two_j)),
        Mode::ExactCasimir,
    ));

    // [A^k, O] = Σ_{p+q=k−1} A^p [A,O] A^q
    for k in [2u32, 3] {
        let a = w(&cyc, "A");
        let o = w(&cyc, "BC");
        let inner = poly_commutator(&a, &o);
        let rhs = sum((0..k).map(|p| a.pow(p).mul(&inner).mul(&a.pow(k - 1 - p))));
        out.push(case(
            "power_commutator",
            format!("k = {k}, O = BC"),
            k,
            poly_commutator(&a.pow(k), &o),
            rhs,
            Mode::Exact,
        ));
    }

    for chi in [2u32, 3] {
        for conv in conventions {
            let s = |p: Gen, q: Gen| conv.s(p, q);
            let (a, b, c) = (conv.a, conv.b, conv.c);
            let inst = format!("χ = {chi}, (A,B,C) = {}", conv.label());
            let lhs = &poly_commutator(&w(&conv, &format!("{}B", rep("A", chi - 1))), &w(&conv, "CA"))
                - &poly_commutator(&w(&conv, &format!("{}C", rep("A", chi - 1))), &w(&conv, "BA"));
            let top = w(&conv, &rep("A", chi + 1));
            let a_b2 = w(&conv, &format!("{}BB", rep("A", chi - 1)));
            let a_c2 = w(&conv, &format!("{}CC", rep("A", chi - 1)));
            let sum_c = sum((0..=chi - 2).map(|p| w(&conv, &format!("{}C{}AC", rep("A", p), rep("A", chi - 2 - p)))));
            let sum_b = sum((0..=chi - 2).map(|p| w(&conv, &format!("{}B{}AB", rep("A", p), rep("A", chi - 2 - p)))));
            let n = (chi - 1) as i64;

            let chi1 = vec![
                term("A^{χ+1}", top.clone(), Some(imag(s(b, c) - s(c, b), 1))),
                term("A^{χ−1}B²", a_b2.clone(), Some(imag(-s(c, a), 1))),
                term("A^{χ−1}C²", a_c2.clone(), Some(imag(s(b, a), 1))),
                term("ΣA^pCA^qAC", sum_c.clone(), Some(imag(-s(a, b), 1))),
                term("ΣA^pBA^qAB", sum_b.clone(), Some(imag(s(a, c), 1))),
            ];
            out.push(case("chi1", inst.clone(), chi, lhs.clone(), combo(&chi1), Mode::ModuloLower));

            out.push(case(
                "chi1_ordering",
                format!("ΣA^pBA^qAB = nA^{{χ−1}}B², {inst}"),
                chi,
                sum_b.clone(),
                a_b2.scale(&real(n, 1)),
                Mode::ModuloLower,
            ));
            out.push(case(
                "chi1_ordering",
                format!("ΣA^pCA^qAC = nA^{{χ−1}}C², {inst}"),
                chi,
                sum_c,
                a_c2.scale(&real(n, 1)),
                Mode::ModuloLower,
            ));

            out.push(fit_case(
                "chi4",
                inst.clone(),
                chi,
                lhs.clone(),
                vec![
                    term("A^{χ+1}", top.clone(), Some(imag(2 * s(b, c), 1))),
                    term("A^{χ−1}(B²+C²)", &a_b2 + &a_c2, Some(imag((n + 1) * s(b, a), 1))),
                ],
                false,
            ));
            out.push(fit_case(
                "chi5",
                inst,
                chi,
                lhs,
                vec![
                    term("A^{χ+1}", top, Some(imag((3 + n) * s(b, c), 1))),
                    term(
                        "A^{χ−1}j(j+1)",
                        w(&conv, &rep("A", chi - 1)).scale(&jj(two_j)),
                        Some(imag((n + 1) * s(b, a), 1)),
                    ),
                ],
                true,
            ));
        }
    }

    // [A^{χ−γ+1}, B^{γ+1}] = i s_AB Σ A^p B^t C B^s A^q
    for (chi, gamma) in [(2u32, 1u32), (3, 1), (3, 2)] {
        let conv = cyc;
        let inst = format!("χ = {chi}, γ = {gamma}");
        let lhs = poly_commutator(&w(&conv, &rep("A", chi - gamma + 1)), &w(&conv, &rep("B", gamma + 1)));
        let mut terms = Vec::new();
        for p in 0..=chi - gamma {
            for t in 0..=gamma {
                terms.push(w(
                    &conv,
                    &format!("{}{}C{}{}", rep("A", p), rep("B", t), rep("B", gamma - t), rep("A", chi - gamma - p)),
                ));
            }
        }
        let count = terms.len() as i64;
        let total = sum(terms);
        out.push(case(
            "chi6_expansion",
            inst.clone(),
            chi,
            lhs,
            total.scale(&imag(conv.s(conv.a, conv.b), 1)),
            Mode::Exact,
        ));
        out.push(case(
            "chi6",
            format!("sum = {count}·A^{{χ−γ}}B^γC, {inst}"),
            chi,
            total,
            w(&conv, &format!("{}{}C", rep("A", chi - gamma), rep("B", gamma))).scale(&real(count, 1)),
            Mode::ModuloLower,
        ));
    }

    // A^{χ−2−γ}B^γ C(A²+B²) = j(j+1) A^{χ−2−γ}B^γ C − A^{χ−2−γ}B^γ C³
    for (chi, gamma) in [(3u32, 1u32), (4, 1), (4, 2)] {
        let conv = cyc;
        let head = format!("{}{}", rep("A", chi - 2 - gamma), rep("B", gamma));
        let lhs = w(&conv, &format!("{head}C")).mul(&(&w(&conv, "AA") + &w(&conv, "BB")));
        let rhs = &w(&conv, &format!("{head}C")).scale(&jj(two_j)) - &w(&conv, &format!("{head}CCC"));
        out.push(case("chi7", format!("χ = {chi}, γ = {gamma}"), chi, lhs, rhs, Mode::ExactCasimir));
    }

    // [A^p, A^α B^β C] = i m s_AB A^{α+p−1}B^{β−1}C² + i n s_AC A^{α+p−1}B^{β+1} + p(χ)
    for (p, alpha, beta) in [(1u32, 1u32, 1u32), (2, 0, 2), (2, 1, 2)] {
        for conv in conventions {
            let chi = p + alpha + beta - 1;
            let e = alpha + p - 1;
            let s_ab = conv.s(conv.a, conv.b);
            let s_ac = conv.s(conv.a, conv.c);
            let inst = format!("p = {p}, α = {alpha}, β = {beta}, (A,B,C) = {}", conv.label());
            let lhs = poly_commutator(
                &w(&conv, &rep("A", p)),
                &w(&conv, &format!("{}{}C", rep("A", alpha), rep("B", beta))),
            );
            let t1 = w(&conv, &format!("{}{}CC", rep("A", e), rep("B", beta - 1)));
            let t2 = w(&conv, &format!("{}{}", rep("A", e), rep("B", beta + 1)));
            let t3 = w(&conv, &format!("{}{}AA", rep("A", e), rep("B", beta - 1)));
            // Term counts: m = pβ orderings carry C², n = p carry B^{β+1}.
            let (m, n) = ((p * beta) as i64, p as i64);
            out.push(fit_case(
                "chi9",
                inst.clone(),
                chi,
                lhs.clone(),
                vec![
                    term("A^{α+p−1}B^{β−1}C²", t1.clone(), Some(imag(m * s_ab, 1))),
                    term("A^{α+p−1}B^{β+1}", t2.clone(), Some(imag(n * s_ac, 1))),
                ],
                false,
            ));
            let chi10_rhs = &(&w(&conv, &format!("{}{}", rep("A", e), rep("B", beta - 1))).scale(&jj(two_j)) - &t3)
                - &t1;
            out.push(case("chi10", inst.clone(), chi, t2, chi10_rhs, Mode::ExactCasimir));
            out.push(fit_case(
                "chi11",
                inst,
                chi,
                lhs,
                vec![
                    term("A^{α+p−1}B^{β−1}C²", t1, Some(imag((m + n) * s_ab, 1))),
                    term("A^{α+p−1}B^{β−1}A²", t3, Some(imag(n * s_ac, 1))),
                ],
                true,
            ));
        }
    }

    // A^{χ−3−γ}B^γ C²(A²+B²) = A^{χ−3−γ}B^γ C² j(j+1) − A^{χ−3−γ}B^γ C⁴
    for (chi, gamma) in [(3u32, 0u32), (4, 0), (4, 1)] {
        let conv = cyc;
        let head = format!("{}{}", rep("A", chi - 3 - gamma), rep("B", gamma));
        let base = w(&conv, &format!("{head}CC"));
        let lhs = base.mul(&(&w(&conv, "AA") + &w(&conv, "BB")));
        let rhs = &base.scale(&jj(two_j)) - &w(&conv, &format!("{head}CCCC"));
        let literal_head = format!("{}{}", rep("A", chi - 2 - gamma), rep("B", gamma));
        let literal = &base.scale(&jj(two_j)) - &w(&conv, &format!("{literal_head}CCCC"));
        let mut c = case("chi12", format!("χ = {chi}, γ = {gamma}"), chi, lhs, rhs, Mode::ExactCasimir);
        c.literal = Some(literal);
        out.push(c);
    }

    out
}

fn mode_name(m: &Mode) -> &'static str {
    match m {
        Mode::Exact => "exact",
        Mode::ExactCasimir => "exact_mod_casimir",
        Mode::ModuloLower => "modulo_lower_degree",
        Mode::Fit(_) => "fit_top_degree",
    }
}

fn pair(c: &Coeff) -> [f64; 2] {
    let z = to_c64(c);
    [z.re, z.im]
}

/// Relative Frobenius residual of `m` outside the span of the spin-j images
/// of canonical monomials of degree ≤ `chi`.
fn span_residual(m: &ComplexMatrix, two_j: u32, chi: u32, scale: f64) -> f64 {
    let cols: Vec<ComplexMatrix> = su2::canonical_monomials(chi)
        .into_iter()
        .map(|mono| eval_poly(&SpinPoly::monomial(mono, real(1, 1)), two_j))
        .collect();
    let (_, res) = linalg::complex_lstsq(&cols, m);
    res / scale.max(1.0)
}

/// Least squares on the coefficients above degree χ.
fn fit_top(lhs: &SpinPoly, terms: &[SpinPoly], chi: u32) -> (Vec<linalg::C64>, f64) {
    let top_l = lhs.above(chi);
    let tops: Vec<SpinPoly> = terms.iter().map(|t| t.above(chi)).collect();
    let mut keys: Vec<su2::Monomial> = top_l.terms().keys().copied().collect();
    for t in &tops {
        keys.extend(t.terms().keys().copied());
    }
    keys.sort();
    keys.dedup();
    if keys.is_empty() {
        return (vec![linalg::c64(0.0, 0.0); terms.len()], 0.0);
    }
    let cols: Vec<ComplexMatrix> = tops
        .iter()
        .map(|t| ComplexMatrix::from_iterator(keys.len(), 1, keys.iter().map(|k| to_c64(&t.coefficient(k)))))
        .collect();
    let target = ComplexMatrix::from_iterator(keys.len(), 1, keys.iter().map(|k| to_c64(&top_l.coefficient(k))));
    linalg::complex_lstsq(&cols, &target)
}

pub fn evaluate(case: &IdentityCase, two_j: u32) -> IdentityOutcome {
    let reduce = |p: &SpinPoly| {
        if case.casimir {
            casimir_reduce(p, two_j)
        } else {
            p.clone()
        }
    };
    let lhs_scale = linalg::frobenius(&eval_poly(&case.lhs, two_j));
    let above_zero = |p: &SpinPoly| reduce(p).above(case.chi).is_zero();

    let (symbolic_residual, span_res, fitted, printed, fit_ok, coeffs_match) = match &case.mode {
        Mode::Exact | Mode::ExactCasimir => {
            let d = reduce(&(&case.lhs - &case.rhs));
            let numeric = linalg::frobenius(&eval_poly(&d, two_j)) / lhs_scale.max(1.0);
            (d.coeff_norm(), numeric, vec![], vec![], d.is_zero(), true)
        }
        Mode::ModuloLower => {
            let d = reduce(&(&case.lhs - &case.rhs));
            let top = d.above(case.chi);
            let numeric = span_residual(&eval_poly(&d, two_j), two_j, case.chi, lhs_scale);
            (top.coeff_norm(), numeric, vec![], vec![], top.is_zero(), true)
        }
        Mode::Fit(terms) => {
            let reduced: Vec<SpinPoly> = terms.iter().map(|t| reduce(&t.poly)).collect();
            let lhs_r = reduce(&case.lhs);
            let (kappa, res) = fit_top(&lhs_r, &reduced, case.chi);
            let mut img = eval_poly(&lhs_r, two_j);
            let mut fitted = Vec::new();
            let mut printed = Vec::new();
            let mut all_match = true;
            for ((t, r), k) in terms.iter().zip(&reduced).zip(&kappa) {
                printed.push((t.label.clone(), t.stated.as_ref().map(pair)));
                // Terms that live entirely at degree ≤ χ are part of the remainder.
                if r.degree().is_some_and(|d| d > case.chi) {
                    fitted.push((t.label.clone(), [k.re, k.im]));
                    img -= eval_poly(r, two_j) * *k;
                    if let Some(p) = &t.stated {
                        all_match &= (to_c64(p) - k).norm() <= 1e-9;
                    }
                }
            }
            let scale = lhs_r.above(case.chi).coeff_norm().max(1.0);
            let numeric = span_residual(&img, two_j, case.chi, lhs_scale);
            (res, numeric, fitted, printed, res <= FIT_TOL * scale, all_match)
        }
    };

    let matches_printed = match &case.literal {
        Some(lit) => above_zero(&(&case.lhs - lit)),
        None => fit_ok && coeffs_match,
    };
    let span_ok = span_res <= SPAN_TOL;
    IdentityOutcome {
        name: case.name.clone(),
        instance: case.instance.clone(),
        mode: mode_name(&case.mode),
        chi: case.chi,
        symbolic_residual,
        span_residual: span_res,
        fitted,
        printed,
        matches_printed,
        pass: fit_ok && span_ok,
    }
}

/// Evaluates the whole catalogue at spin `two_j / 2`.
pub fn verify_procedure_identities(two_j: u32) -> Vec<IdentityOutcome> {
    catalogue(two_j).iter().map(|c| evaluate(c, two_j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_identities_pass_at_spin_two() {
        for o in verify_procedure_identities(4) {
            assert!(o.pass, "{} [{}] failed: {:?}", o.name, o.instance, o);
        }
    }

    #[test]
    fn printed_mismatches_are_the_known_ones() {
        let outcomes = verify_procedure_identities(4);
        let mut bad: Vec<&str> = outcomes
            .iter()
            .filter(|o| !o.matches_printed)
            .map(|o| o.name.as_str())
            .collect();
        bad.dedup();
        assert_eq!(bad, vec!["chi11", "chi12"]);
    }

    #[test]
    fn chi9_fit_recovers_term_counts() {
        let outcomes = verify_procedure_identities(4);
        for o in outcomes.iter().filter(|o| o.name == "chi9") {
            assert!(o.matches_printed, "{o:?}");
        }
    }
}
