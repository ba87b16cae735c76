use num_traits::{One, Zero};

use super::method::CONDITION_COUNT;
use super::{rational as q, to_f64, ConditionClaim, EvaluationBatch, ExpRKMethod, PhiPolynomial, PhiTerm, SchemeError, Tableau, Target, Q};

/// Names accepted by [`method_by_name`].
pub const METHOD_NAMES: [&str; 6] = ["expRK2s2", "expRK3s3", "expRK4s5", "expRK4s6", "expRK5s8", "expRK5s10"];

/// Tolerance on the residual of the fifth-order node equation.
const NODE_EQUATION_TOL: f64 = 1e-12;

/// Default catalog entry by (case-insensitive) name.
pub fn method_by_name(name: &str) -> Result<ExpRKMethod, SchemeError> {
    match name.to_ascii_lowercase().as_str() {
        "exprk4s6" => build_exp_rk4s6(q(1, 2), q(1, 2), q(1, 3), q(1, 3)),
        "exprk5s10" => build_exp_rk5s10(Rk5s10Nodes::default()),
        _ => build_legacy(name),
    }
}

/// Legacy schemes with their default nodes.
pub fn build_legacy(name: &str) -> Result<ExpRKMethod, SchemeError> {
    match name.to_ascii_lowercase().as_str() {
        "exprk2s2" => build_exp_rk2s2(q(1, 2)),
        "exprk3s3" => build_exp_rk3s3(q(1, 2)),
        "exprk4s5" => build_exp_rk4s5(),
        "exprk5s8" => build_exp_rk5s8(),
        _ => Err(SchemeError::UnknownMethod(name.to_string())),
    }
}

fn check_node(name: &str, c: Q) -> Result<(), SchemeError> {
    if c <= Q::zero() || c > Q::one() {
        return Err(SchemeError::NodeOutOfRange { name: name.into(), value: c.to_string() });
    }
    Ok(())
}

fn distinct(names: &[(&str, Q)]) -> Result<(), SchemeError> {
    for (i, (ni, ci)) in names.iter().enumerate() {
        for (nj, cj) in &names[i + 1..] {
            if ci == cj {
                return Err(SchemeError::Constraint(format!("{ni} and {nj} must differ (both {ci})")));
            }
        }
    }
    Ok(())
}

fn phi(k: usize, c: Q, coef: Q) -> PhiTerm {
    PhiTerm { order: k, scaling: c, coef }
}

fn poly(terms: impl IntoIterator<Item = PhiTerm>) -> Result<PhiPolynomial, SchemeError> {
    PhiPolynomial::from_terms(terms)
}

fn claims(entries: &[(usize, ConditionClaim)]) -> [ConditionClaim; CONDITION_COUNT] {
    let mut out = [ConditionClaim::NotApplicable; CONDITION_COUNT];
    for &(n, c) in entries {
        out[n - 1] = c;
    }
    out
}

fn claim_range(lo: usize, hi: usize, c: ConditionClaim) -> Vec<(usize, ConditionClaim)> {
    (lo..=hi).map(|n| (n, c)).collect()
}

fn batch(stages: usize, outputs: &[(Q, Target)]) -> Result<EvaluationBatch, SchemeError> {
    EvaluationBatch::new(stages, outputs.to_vec())
}

/// `c^k`.
fn pow(c: Q, k: usize) -> Q {
    (0..k).fold(Q::one(), |acc, _| acc * c)
}

/// Second-order scheme with free node `c2`.
pub fn build_exp_rk2s2(c2: Q) -> Result<ExpRKMethod, SchemeError> {
    check_node("c2", c2)?;
    let mut t = Tableau::new(&[c2]);
    t.set_b(2, PhiPolynomial::term(2, Q::one(), c2.recip())?);
    let plan = vec![
        batch(2, &[(c2, Target::Stage(2))])?.with(1, 0, Q::one()),
        batch(2, &[(Q::one(), Target::Next)])?.with(1, 0, Q::one()).with(2, 2, c2.recip()),
    ];
    ExpRKMethod::new("expRK2s2", 2, t, plan, claims(&[(1, ConditionClaim::Strong)]))
}

/// Third-order scheme with free node `c2 ≠ 2/3`; `c3 = 2/3`.
pub fn build_exp_rk3s3(c2: Q) -> Result<ExpRKMethod, SchemeError> {
    check_node("c2", c2)?;
    let c3 = q(2, 3);
    if c2 == c3 {
        return Err(SchemeError::Constraint("c2 must differ from 2/3".into()));
    }
    let mut t = Tableau::new(&[c2, c3]);
    t.set_a(3, 2, PhiPolynomial::term(2, c3, q(4, 9) / c2)?);
    t.set_b(3, PhiPolynomial::term(2, Q::one(), q(3, 2))?);
    let plan = vec![
        batch(3, &[(c2, Target::Stage(2))])?.with(1, 0, Q::one()),
        batch(3, &[(c3, Target::Stage(3))])?.with(1, 0, Q::one()).with(2, 2, c2.recip()),
        batch(3, &[(Q::one(), Target::Next)])?.with(1, 0, Q::one()).with(2, 3, q(3, 2)),
    ];
    let claimed = claims(&[(1, ConditionClaim::Strong), (2, ConditionClaim::WeakAtZero), (3, ConditionClaim::Strong)]);
    ExpRKMethod::new("expRK3s3", 3, t, plan, claimed)
}

/// Fourth-order five-stage scheme, nodes `(1/2, 1/2, 1, 1/2)`.
pub fn build_exp_rk4s5() -> Result<ExpRKMethod, SchemeError> {
    let (half, one) = (q(1, 2), Q::one());
    let mut t = Tableau::new(&[half, half, one, half]);
    t.set_a(3, 2, poly([phi(2, half, one)])?);
    t.set_a(4, 2, poly([phi(2, one, one)])?);
    t.set_a(4, 3, poly([phi(2, one, one)])?);
    let a5_23 = poly([phi(2, half, q(1, 2)), phi(3, half, q(-1, 2)), phi(2, one, q(1, 4)), phi(3, one, q(-1, 1))])?;
    t.set_a(5, 2, a5_23.clone());
    t.set_a(5, 3, a5_23);
    t.set_a(5, 4, poly([phi(2, half, q(-1, 4)), phi(3, half, q(1, 2)), phi(2, one, q(-1, 4)), phi(3, one, one)])?);
    t.set_b(4, poly([phi(2, one, q(-1, 1)), phi(3, one, q(4, 1))])?);
    t.set_b(5, poly([phi(2, one, q(4, 1)), phi(3, one, q(-8, 1))])?);

    let inv_sq = pow(half, 2).recip();
    let plan = vec![
        batch(5, &[(half, Target::Stage(2))])?.with(1, 0, one),
        batch(5, &[(half, Target::Stage(3))])?.with(1, 0, one).with(2, 2, inv_sq),
        batch(5, &[(one, Target::Stage(4))])?.with(1, 0, one).with(2, 2, one).with(2, 3, one),
        batch(5, &[(half, Target::Stage(5))])?
            .with(1, 0, one)
            .with(2, 2, q(2, 1))
            .with(2, 3, q(2, 1))
            .with(2, 4, q(-1, 1))
            .with(3, 2, -inv_sq)
            .with(3, 3, -inv_sq)
            .with(3, 4, inv_sq),
        batch(5, &[(one, Target::Stage(5))])?
            .with(2, 2, q(1, 4))
            .with(2, 3, q(1, 4))
            .with(2, 4, q(-1, 4))
            .with(3, 2, q(-1, 1))
            .with(3, 3, q(-1, 1))
            .with(3, 4, one),
        batch(5, &[(one, Target::Next)])?
            .with(1, 0, one)
            .with(2, 4, q(-1, 1))
            .with(2, 5, q(4, 1))
            .with(3, 4, q(4, 1))
            .with(3, 5, q(-8, 1)),
    ];
    let mut entries = claim_range(1, 3, ConditionClaim::Strong);
    entries.push((4, ConditionClaim::WeakAtZero));
    entries.push((5, ConditionClaim::WeakenedB0));
    // Conditions 6 and 7 hold without weakening.
    entries.extend(claim_range(6, 7, ConditionClaim::Strong));
    ExpRKMethod::new("expRK4s5", 4, t, plan, claims(&entries))
}

/// One term `coef · φ_k(ρ z) h D_basis` of a stage written out in full.
struct ListingTerm {
    k: usize,
    basis: usize,
    coef: Q,
}

fn lt(k: usize, basis: usize, coef: Q) -> ListingTerm {
    ListingTerm { k, basis, coef }
}

/// Adds one single-scaling bracket of a written-out stage to the tableau and
/// returns the corresponding batch with `v_k = V_k / ρ^k`.
fn listing_bracket(
    t: &mut Tableau,
    rho: Q,
    target: Target,
    with_f: bool,
    terms: &[ListingTerm],
) -> Result<EvaluationBatch, SchemeError> {
    let mut b = batch(t.stages(), &[(rho, target)])?;
    if with_f {
        b = b.with(1, 0, Q::one());
    }
    for term in terms {
        let p = PhiPolynomial::term(term.k, rho, term.coef)?;
        match target {
            Target::Stage(i) => t.add_a(i, term.basis, &p),
            Target::Next => t.add_b(term.basis, &p),
        }
        b = b.with(term.k, term.basis, term.coef / pow(rho, term.k));
    }
    Ok(b)
}

/// Fifth-order eight-stage scheme, nodes `(1/2, 1/2, 1/4, 1/2, 1/5, 2/3, 1)`.
pub fn build_exp_rk5s8() -> Result<ExpRKMethod, SchemeError> {
    let (half, quarter, fifth, two_thirds, one) = (q(1, 2), q(1, 4), q(1, 5), q(2, 3), Q::one());
    let mut t = Tableau::new(&[half, half, quarter, half, fifth, two_thirds, one]);
    let s = Target::Stage;
    let plan = vec![
        listing_bracket(&mut t, half, s(2), true, &[])?,
        listing_bracket(&mut t, half, s(3), true, &[lt(2, 2, q(1, 2))])?,
        listing_bracket(&mut t, quarter, s(4), true, &[lt(2, 3, q(1, 8))])?,
        listing_bracket(&mut t, half, s(5), true, &[lt(2, 3, q(-1, 2)), lt(2, 4, q(2, 1)), lt(3, 3, q(2, 1)), lt(3, 4, q(-4, 1))])?,
        listing_bracket(
            &mut t,
            fifth,
            s(6),
            true,
            &[lt(2, 4, q(8, 25)), lt(2, 5, q(-2, 25)), lt(3, 4, q(-32, 125)), lt(3, 5, q(16, 125))],
        )?,
        listing_bracket(
            &mut t,
            two_thirds,
            s(7),
            true,
            &[lt(2, 5, q(-16, 27)), lt(2, 6, q(100, 27)), lt(3, 5, q(320, 81)), lt(3, 6, q(-800, 81))],
        )?,
        listing_bracket(
            &mut t,
            fifth,
            s(7),
            false,
            &[
                lt(2, 4, q(-20, 81)),
                lt(2, 5, q(5, 243)),
                lt(2, 6, q(125, 486)),
                lt(3, 4, q(16, 81)),
                lt(3, 5, q(-4, 243)),
                lt(3, 6, q(-50, 243)),
            ],
        )?,
        listing_bracket(
            &mut t,
            one,
            s(8),
            true,
            &[
                lt(2, 5, q(-16, 3)),
                lt(2, 6, q(250, 21)),
                lt(2, 7, q(27, 14)),
                lt(3, 5, q(208, 3)),
                lt(3, 6, q(-250, 3)),
                lt(3, 7, q(-27, 1)),
                lt(4, 5, q(-240, 1)),
                lt(4, 6, q(1500, 7)),
                lt(4, 7, q(810, 7)),
            ],
        )?,
        listing_bracket(
            &mut t,
            fifth,
            s(8),
            false,
            &[
                lt(2, 5, q(-4, 7)),
                lt(2, 6, q(25, 49)),
                lt(2, 7, q(27, 98)),
                lt(3, 5, q(8, 5)),
                lt(3, 6, q(-10, 7)),
                lt(3, 7, q(-27, 35)),
                lt(4, 5, q(-48, 35)),
                lt(4, 6, q(60, 49)),
                lt(4, 7, q(162, 245)),
            ],
        )?,
        listing_bracket(
            &mut t,
            two_thirds,
            s(8),
            false,
            &[
                lt(2, 5, q(-288, 35)),
                lt(2, 6, q(360, 49)),
                lt(2, 7, q(972, 245)),
                lt(3, 5, q(384, 5)),
                lt(3, 6, q(-480, 7)),
                lt(3, 7, q(-1296, 35)),
                lt(4, 5, q(-1536, 7)),
                lt(4, 6, q(9600, 49)),
                lt(4, 7, q(5184, 49)),
            ],
        )?,
        listing_bracket(
            &mut t,
            one,
            Target::Next,
            true,
            &[
                lt(2, 6, q(125, 14)),
                lt(2, 7, q(-27, 14)),
                lt(2, 8, q(1, 2)),
                lt(3, 6, q(-625, 14)),
                lt(3, 7, q(162, 7)),
                lt(3, 8, q(-13, 2)),
                lt(4, 6, q(1125, 14)),
                lt(4, 7, q(-405, 7)),
                lt(4, 8, q(45, 2)),
            ],
        )?,
    ];
    let mut entries = claim_range(1, 7, ConditionClaim::Strong);
    entries.push((8, ConditionClaim::WeakAtZero));
    entries.extend(claim_range(9, 10, ConditionClaim::WeakenedB0));
    entries.extend(claim_range(11, 16, ConditionClaim::Strong));
    ExpRKMethod::new("expRK5s8", 5, t, plan, claims(&entries))
}

/// `a_ij` of a stage solving `ψ_{2,i} = ψ_{3,i} = 0` with two predecessors
/// `j, k`: `(−c_i² c_k φ_2(c_i z) + 2 c_i³ φ_3(c_i z)) / (c_j (c_j − c_k))`.
fn two_point(ci: Q, cj: Q, ck: Q) -> Result<PhiPolynomial, SchemeError> {
    let d = cj * (cj - ck);
    poly([phi(2, ci, -ci * ci * ck / d), phi(3, ci, q(2, 1) * pow(ci, 3) / d)])
}

/// Coefficients `(α_j, β_j, γ_j)` of the three-point formulas, `{k, l}` the other two nodes.
fn three_point_weights(cj: Q, ck: Q, cl: Q) -> (Q, Q, Q) {
    let d = cj * (cj - ck) * (cj - cl);
    (ck * cl / d, q(2, 1) * (ck + cl) / d, q(6, 1) / d)
}

/// Fourth-order six-stage family; `c5 = (4c6 − 3)/(6c6 − 4)`.
pub fn build_exp_rk4s6(c2: Q, c3: Q, c4: Q, c6: Q) -> Result<ExpRKMethod, SchemeError> {
    for (n, c) in [("c2", c2), ("c3", c3), ("c4", c4), ("c6", c6)] {
        check_node(n, c)?;
    }
    distinct(&[("c3", c3), ("c4", c4)])?;
    let denom = q(6, 1) * c6 - q(4, 1);
    if denom.is_zero() {
        return Err(SchemeError::Constraint("c5 = (4c6-3)/(6c6-4) undefined at c6 = 2/3".into()));
    }
    let c5 = (q(4, 1) * c6 - q(3, 1)) / denom;
    if c5 <= Q::zero() || c5 > Q::one() {
        return Err(SchemeError::Constraint(format!("c5 = (4c6-3)/(6c6-4) = {c5} outside (0, 1]")));
    }
    distinct(&[("c5", c5), ("c6", c6)])?;

    let one = Q::one();
    let mut t = Tableau::new(&[c2, c3, c4, c5, c6]);
    t.set_a(3, 2, PhiPolynomial::term(2, c3, c3 * c3 / c2)?);
    t.set_a(4, 2, PhiPolynomial::term(2, c4, c4 * c4 / c2)?);
    for i in [5, 6] {
        let ci = t.node(i);
        t.set_a(i, 3, two_point(ci, c3, c4)?);
        t.set_a(i, 4, two_point(ci, c4, c3)?);
    }
    t.set_b(5, two_point(one, c5, c6)?);
    t.set_b(6, two_point(one, c6, c5)?);

    let d34 = c3 - c4;
    let d56 = c5 - c6;
    let plan = vec![
        batch(6, &[(c2, Target::Stage(2))])?.with(1, 0, one),
        batch(6, &[(c3, Target::Stage(3)), (c4, Target::Stage(4))])?.with(1, 0, one).with(2, 2, c2.recip()),
        batch(6, &[(c5, Target::Stage(5)), (c6, Target::Stage(6))])?
            .with(1, 0, one)
            .with(2, 3, -c4 / (d34 * c3))
            .with(2, 4, c3 / (d34 * c4))
            .with(3, 3, q(2, 1) / (d34 * c3))
            .with(3, 4, q(-2, 1) / (d34 * c4)),
        batch(6, &[(one, Target::Next)])?
            .with(1, 0, one)
            .with(2, 5, -c6 / (d56 * c5))
            .with(2, 6, c5 / (d56 * c6))
            .with(3, 5, q(2, 1) / (d56 * c5))
            .with(3, 6, q(-2, 1) / (d56 * c6)),
    ];
    let mut entries = claim_range(1, 7, ConditionClaim::Strong);
    entries[3] = (4, ConditionClaim::WeakAtZero);
    ExpRKMethod::new("expRK4s6", 4, t, plan, claims(&entries))
}

/// Nodes `c2 … c10` of the fifth-order ten-stage family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rk5s10Nodes(pub [Q; 9]);

impl Default for Rk5s10Nodes {
    fn default() -> Self {
        Rk5s10Nodes([q(1, 2), q(1, 2), q(1, 3), q(1, 2), q(1, 3), q(1, 4), q(3, 10), q(3, 4), Q::one()])
    }
}

impl Rk5s10Nodes {
    /// `c_i`, `2 ≤ i ≤ 10`.
    pub fn c(&self, i: usize) -> Q {
        self.0[i - 2]
    }

    /// Residual of `(c8+c9+c10)/4 − (c8c9+c8c10+c9c10)/3 + c8c9c10/2 − 1/5`.
    pub fn node_equation_residual(&self) -> Q {
        let (a, b, c) = (self.c(8), self.c(9), self.c(10));
        (a + b + c) / q(4, 1) - (a * b + a * c + b * c) / q(3, 1) + a * b * c / q(2, 1) - q(1, 5)
    }
}

/// Fifth-order ten-stage family.
pub fn build_exp_rk5s10(nodes: Rk5s10Nodes) -> Result<ExpRKMethod, SchemeError> {
    for i in 2..=10 {
        check_node(&format!("c{i}"), nodes.c(i))?;
    }
    let c = |i: usize| nodes.c(i);
    distinct(&[("c3", c(3)), ("c4", c(4))])?;
    distinct(&[("c5", c(5)), ("c6", c(6)), ("c7", c(7))])?;
    distinct(&[("c8", c(8)), ("c9", c(9)), ("c10", c(10))])?;
    let residual = to_f64(nodes.node_equation_residual()).abs();
    if residual > NODE_EQUATION_TOL {
        return Err(SchemeError::NodeEquation { residual, tolerance: NODE_EQUATION_TOL });
    }

    let one = Q::one();
    let mut t = Tableau::new(&nodes.0);
    t.set_a(3, 2, PhiPolynomial::term(2, c(3), c(3) * c(3) / c(2))?);
    t.set_a(4, 2, PhiPolynomial::term(2, c(4), c(4) * c(4) / c(2))?);
    for i in 5..=7 {
        t.set_a(i, 3, two_point(c(i), c(3), c(4))?);
        t.set_a(i, 4, two_point(c(i), c(4), c(3))?);
    }
    let others = |j: usize, group: [usize; 3]| -> (usize, usize) {
        let rest: Vec<usize> = group.into_iter().filter(|&x| x != j).collect();
        (rest[0], rest[1])
    };
    let three = |ci: Q, j: usize, group: [usize; 3]| -> Result<PhiPolynomial, SchemeError> {
        let (k, l) = others(j, group);
        let (alpha, beta, gamma) = three_point_weights(c(j), c(k), c(l));
        poly([phi(2, ci, pow(ci, 2) * alpha), phi(3, ci, -pow(ci, 3) * beta), phi(4, ci, pow(ci, 4) * gamma)])
    };
    for i in 8..=10 {
        for j in 5..=7 {
            t.set_a(i, j, three(c(i), j, [5, 6, 7])?);
        }
    }
    for i in 8..=10 {
        t.set_b(i, three(one, i, [8, 9, 10])?);
    }

    let d34 = c(3) - c(4);
    let mut b4 = batch(10, &[(c(8), Target::Stage(8)), (c(9), Target::Stage(9)), (c(10), Target::Stage(10))])?.with(1, 0, one);
    for j in 5..=7 {
        let (k, l) = others(j, [5, 6, 7]);
        let (alpha, beta, gamma) = three_point_weights(c(j), c(k), c(l));
        b4 = b4.with(2, j, alpha).with(3, j, -beta).with(4, j, gamma);
    }
    let mut b5 = batch(10, &[(one, Target::Next)])?.with(1, 0, one);
    for i in 8..=10 {
        let (k, l) = others(i, [8, 9, 10]);
        let (alpha, beta, gamma) = three_point_weights(c(i), c(k), c(l));
        b5 = b5.with(2, i, alpha).with(3, i, -beta).with(4, i, gamma);
    }
    let plan = vec![
        batch(10, &[(c(2), Target::Stage(2))])?.with(1, 0, one),
        batch(10, &[(c(3), Target::Stage(3)), (c(4), Target::Stage(4))])?.with(1, 0, one).with(2, 2, c(2).recip()),
        batch(10, &[(c(5), Target::Stage(5)), (c(6), Target::Stage(6)), (c(7), Target::Stage(7))])?
            .with(1, 0, one)
            .with(2, 3, -c(4) / (c(3) * d34))
            .with(2, 4, c(3) / (c(4) * d34))
            .with(3, 3, q(2, 1) / (c(3) * d34))
            .with(3, 4, q(-2, 1) / (c(4) * d34)),
        b4,
        b5,
    ];
    let mut entries = claim_range(1, 16, ConditionClaim::Strong);
    entries[7] = (8, ConditionClaim::WeakAtZero);
    ExpRKMethod::new("expRK5s10", 5, t, plan, claims(&entries))
}
