use std::collections::HashMap;
use std::fmt;

use num_traits::{Signed, Zero};
use rayon::prelude::*;

use super::{standard_probes, ConditionProbe, OrderCondError, PROBE_DIM};
use crate::matfun::{factorial, phi_stack, DenseMatrix, PhiStack};
use crate::schemes::{to_f64, ConditionClaim, ExpRKMethod, PhiPolynomial, Tableau, CONDITION_COUNT, Q};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_PROBE_COUNT: usize = 5;
pub const DEFAULT_SEED: u64 = 20_240_611;

const MIN_PROBES: usize = 3;
/// Highest φ order any condition needs (`ψ_5`).
const CONDITION_PHI_ORDER: usize = 5;
/// Conditions of the form `ψ_j = 0`; their relaxed form is the identity at `Z = 0`.
const QUADRATURE: [(usize, usize); 4] = [(1, 2), (2, 3), (4, 4), (8, 5)];

fn quadrature_order(number: usize) -> Option<usize> {
    QUADRATURE.iter().find(|(n, _)| *n == number).map(|(_, j)| *j)
}

/// `ψ_j(Z) = Σ_i b_i(Z) c_i^{j-1}/(j-1)! − φ_j(Z)`, `2 ≤ j ≤ 5`.
pub fn psi(method: &ExpRKMethod, j: usize, z: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>, OrderCondError> {
    if !(2..=5).contains(&j) {
        return Err(OrderCondError::Index(format!("psi order {j} outside 2..=5")));
    }
    let tab = method.tableau();
    let n = z.ensure_square()?;
    let mut out = phi_stack(z, j)?.get(j).scaled(-1.0);
    for i in 1..=tab.stages() {
        let w = to_f64(tab.node(i)).powi(j as i32 - 1) / factorial(j - 1);
        if w != 0.0 {
            out.add_scaled(w, &tab.b(i).eval_matrix(z)?);
        }
    }
    debug_assert_eq!(out.rows(), n);
    Ok(out)
}

/// `ψ_{j,i}(Z) = Σ_k a_ik(Z) c_k^{j-1}/(j-1)! − c_i^j φ_j(c_i Z)`, `2 ≤ i ≤ s`.
pub fn psi_stage(
    method: &ExpRKMethod,
    j: usize,
    i: usize,
    z: &DenseMatrix<f64>,
) -> Result<DenseMatrix<f64>, OrderCondError> {
    let tab = method.tableau();
    if !(2..=5).contains(&j) {
        return Err(OrderCondError::Index(format!("psi order {j} outside 2..=5")));
    }
    if !(2..=tab.stages()).contains(&i) {
        return Err(OrderCondError::Index(format!("stage {i} outside 2..={}", tab.stages())));
    }
    let ci = to_f64(tab.node(i));
    let mut out = phi_stack(&z.scaled(ci), j)?.get(j).scaled(-ci.powi(j as i32));
    for k in 2..i {
        let w = to_f64(tab.node(k)).powi(j as i32 - 1) / factorial(j - 1);
        if w != 0.0 {
            out.add_scaled(w, &tab.a(i, k).eval_matrix(z)?);
        }
    }
    Ok(out)
}

/// A matrix together with an upper bound on the sum of the norms of the
/// terms it was assembled from; the bound is the scale residuals are
/// measured against.
#[derive(Clone)]
struct Val {
    m: DenseMatrix<f64>,
    bound: f64,
}

impl Val {
    fn of(m: DenseMatrix<f64>) -> Self {
        let bound = m.norm_fro();
        Self { m, bound }
    }

    fn zeros(rows: usize, cols: usize) -> Self {
        Self { m: DenseMatrix::zeros(rows, cols), bound: 0.0 }
    }

    fn plus(mut self, other: &Val) -> Self {
        self.m.add_scaled(1.0, &other.m);
        self.bound += other.bound;
        self
    }

    fn times(&self, other: &Val) -> Self {
        Self { m: self.m.matmul(&other.m), bound: self.bound * other.bound }
    }

    fn scaled(&self, c: f64) -> Self {
        Self { m: self.m.scaled(c), bound: self.bound * c.abs() }
    }
}

/// All quantities of one tableau at one probe.
struct Evaluation<'a> {
    probe: &'a ConditionProbe,
    s: usize,
    c: Vec<f64>,
    b: Vec<Val>,
    b0: Vec<Val>,
    a: Vec<Vec<Val>>,
    /// `phi[j] = φ_j(Z)`.
    phi: Vec<Val>,
    /// `psi_st[j][i] = ψ_{j,i}(Z)` for `j = 2, 3, 4`.
    psi_st: Vec<Vec<Val>>,
    j: Val,
    k: Val,
    l: Val,
}

fn eval_poly(p: &PhiPolynomial, stacks: &HashMap<Q, PhiStack<f64>>, d: usize) -> Val {
    let mut out = Val::zeros(d, d);
    for t in p.terms() {
        let term = stacks[&t.scaling].get(t.order);
        let coef = to_f64(t.coef);
        out.m.add_scaled(coef, term);
        out.bound += coef.abs() * term.norm_fro();
    }
    out
}

impl<'a> Evaluation<'a> {
    fn new(tab: &Tableau, probe: &'a ConditionProbe) -> Result<Self, OrderCondError> {
        let d = probe.validate()?;
        let s = tab.stages();
        let q = CONDITION_PHI_ORDER.max(tab.max_order());
        let mut scalings: Vec<Q> = tab.nodes()[1..].to_vec();
        scalings.push(Q::from_integer(1));
        for (_, p) in tab.entries() {
            scalings.extend(p.terms().iter().map(|t| t.scaling));
        }
        let mut stacks = HashMap::new();
        for c in scalings {
            if let std::collections::hash_map::Entry::Vacant(e) = stacks.entry(c) {
                e.insert(phi_stack(&probe.z.scaled(to_f64(c)), q)?);
            }
        }
        let c: Vec<f64> = tab.nodes().iter().map(|&x| to_f64(x)).collect();
        // Index 0 is unused padding so that stage indices stay 1-based.
        let mut b = vec![Val::zeros(d, d)];
        let mut b0 = vec![Val::zeros(d, d)];
        let mut a = vec![Vec::new()];
        for i in 1..=s {
            b.push(eval_poly(tab.b(i), &stacks, d));
            b0.push(Val::of(DenseMatrix::identity(d).scaled(tab.b(i).value_at_zero_f64())));
            let row = (0..=s).map(|j| if j >= 2 && j < i { eval_poly(tab.a(i, j), &stacks, d) } else { Val::zeros(d, d) });
            a.push(row.collect());
        }
        let unit = &stacks[&Q::from_integer(1)];
        let phi = (0..=CONDITION_PHI_ORDER).map(|j| Val::of(unit.get(j).clone())).collect();
        let mut psi_st = vec![Vec::new(); 2];
        for j in 2..=4 {
            let mut row = vec![Val::zeros(d, d); 2];
            for i in 2..=s {
                let ci = tab.node(i);
                let mut v = Val::of(stacks[&ci].get(j).scaled(-c[i - 1].powi(j as i32)));
                for k in 2..i {
                    let w = c[k - 1].powi(j as i32 - 1) / factorial(j - 1);
                    v = v.plus(&a[i][k].scaled(w));
                }
                row.push(v);
            }
            psi_st.push(row);
        }
        Ok(Self {
            probe,
            s,
            c,
            b,
            b0,
            a,
            phi,
            psi_st,
            j: Val::of(probe.j.clone()),
            k: Val::of(probe.k.clone()),
            l: Val::of(probe.l.clone()),
        })
    }

    fn node(&self, i: usize) -> f64 {
        self.c[i - 1]
    }

    fn d(&self) -> usize {
        self.probe.dim()
    }

    /// `Σ_{i≥2} b_i · f(i)` with `b` the full or the frozen weights.
    fn weighted(&self, b: &[Val], f: impl Fn(usize) -> Val) -> Val {
        let mut out: Option<Val> = None;
        for i in 2..=self.s {
            let term = b[i].times(&f(i));
            out = Some(match out {
                Some(acc) => acc.plus(&term),
                None => term,
            });
        }
        out.unwrap_or_else(|| Val::zeros(self.d(), self.d()))
    }

    /// `Σ_{k<i} a_ik · f(k)` at stage `i`.
    fn stage_sum(&self, i: usize, f: &dyn Fn(usize) -> Val) -> Val {
        let mut out = Val::zeros(self.d(), self.d());
        for k in 2..i {
            out = out.plus(&self.a[i][k].times(&f(k)));
        }
        out
    }

    fn psi2(&self, i: usize) -> &Val {
        &self.psi_st[2][i]
    }

    fn quadrature(&self, j: usize) -> Val {
        let mut out = self.phi[j].scaled(-1.0);
        for i in 2..=self.s {
            out = out.plus(&self.b[i].scaled(self.node(i).powi(j as i32 - 1) / factorial(j - 1)));
        }
        out
    }

    fn s_j2(&self, i: usize) -> Val {
        self.stage_sum(i, &|k| self.j.times(self.psi2(k)))
    }

    fn bilinear_psi2(&self, i: usize) -> Val {
        let p = self.psi2(i);
        let u = p.m.matvec(&self.probe.x);
        let v = p.m.matvec(&self.probe.y);
        let w = self.probe.bilinear(&u, &v);
        let norm_b = self.probe.b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n = w.len();
        Val { m: DenseMatrix::from_fn(n, 1, |(r, _)| w[r]), bound: norm_b * p.bound * p.bound }
    }

    /// Left-hand side of condition `number`; `frozen` replaces `b_i(Z)` by `b_i(0)`.
    fn lhs(&self, number: usize, frozen: bool) -> Val {
        if let Some(j) = quadrature_order(number) {
            return self.quadrature(j);
        }
        let b = if frozen { &self.b0 } else { &self.b };
        let j = &self.j;
        let k = &self.k;
        match number {
            3 => self.weighted(b, |i| j.times(self.psi2(i))),
            5 => self.weighted(b, |i| j.times(&self.psi_st[3][i])),
            6 => self.weighted(b, |i| j.times(&self.s_j2(i))),
            7 => self.weighted(b, |i| k.times(self.psi2(i)).scaled(self.node(i))),
            9 => self.weighted(b, |i| j.times(&self.psi_st[4][i])),
            10 => self.weighted(b, |i| j.times(&self.stage_sum(i, &|m| j.times(&self.psi_st[3][m])))),
            11 => self.weighted(b, |i| j.times(&self.stage_sum(i, &|m| j.times(&self.s_j2(m))))),
            12 => self.weighted(b, |i| j.times(&self.stage_sum(i, &|m| k.times(self.psi2(m)).scaled(self.node(m))))),
            13 => self.weighted(b, |i| k.times(&self.psi_st[3][i]).scaled(self.node(i))),
            14 => self.weighted(b, |i| k.times(&self.s_j2(i)).scaled(self.node(i))),
            15 => self.weighted(b, |i| self.bilinear_psi2(i)),
            16 => self.weighted(b, |i| self.l.times(self.psi2(i)).scaled(self.node(i).powi(2))),
            _ => unreachable!("condition numbers are 1..=16"),
        }
    }
}

/// Exact scalar identity `Σ b_i(0) c_i^{j-1}/(j-1)! − 1/j!`; returns
/// `(residual, scale)`.
fn weak_at_zero(tab: &Tableau, j: usize) -> (f64, f64) {
    let fact = |n: usize| Q::from_integer((1..=n as i128).product());
    let target = Q::from_integer(1) / fact(j);
    let mut sum = Q::zero();
    let mut scale = to_f64(target);
    for i in 2..=tab.stages() {
        let term = tab.b(i).value_at_zero() * num_traits::pow(tab.node(i), j - 1) / fact(j - 1);
        scale += to_f64(term.abs());
        sum += term;
    }
    (to_f64((sum - target).abs()), scale)
}

/// Outcome of one condition.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionResult {
    pub number: usize,
    pub claimed: ConditionClaim,
    /// Strongest form that holds, `None` if no form holds.
    pub achieved: Option<ConditionClaim>,
    /// Largest `‖lhs‖ / scale` of the strong form over all probes.
    pub strong_residual: f64,
    /// Same for the relaxed form (weak-at-zero or weakened-b(0)).
    pub relaxed_residual: f64,
}

impl ConditionResult {
    /// `"skipped"` for conditions the method makes no claim about.
    pub fn form_checked(&self) -> String {
        match self.claimed {
            ConditionClaim::NotApplicable => "skipped".into(),
            c => c.to_string(),
        }
    }

    pub fn passed(&self) -> bool {
        self.claimed == ConditionClaim::NotApplicable || self.achieved == Some(self.claimed)
    }

    /// Relaxed form available for this condition.
    pub fn relaxed_form(&self) -> ConditionClaim {
        if quadrature_order(self.number).is_some() {
            ConditionClaim::WeakAtZero
        } else {
            ConditionClaim::WeakenedB0
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderConditionReport {
    pub method: String,
    pub tolerance: f64,
    pub probes: usize,
    pub results: Vec<ConditionResult>,
}

impl OrderConditionReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(ConditionResult::passed)
    }

    pub fn result(&self, number: usize) -> &ConditionResult {
        &self.results[number - 1]
    }

    pub fn mismatches(&self) -> Vec<Mismatch> {
        self.results
            .iter()
            .filter(|r| !r.passed())
            .map(|r| Mismatch {
                number: r.number,
                claimed: r.claimed,
                achieved: r.achieved,
                strong_residual: r.strong_residual,
                relaxed_residual: r.relaxed_residual,
            })
            .collect()
    }
}

impl fmt::Display for OrderConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "order conditions for {} ({} probes, tol {:e})", self.method, self.probes, self.tolerance)?;
        writeln!(f, "{:>3}  {:<14} {:<14} {:>12} {:>12}  status", "no", "claimed", "achieved", "strong", "relaxed")?;
        for r in &self.results {
            let achieved = r.achieved.map_or("none".to_string(), |c| c.to_string());
            let status = match (r.claimed, r.passed()) {
                (ConditionClaim::NotApplicable, _) => "skip",
                (_, true) => "pass",
                (_, false) => "FAIL",
            };
            writeln!(
                f,
                "{:>3}  {:<14} {:<14} {:>12.3e} {:>12.3e}  {status}",
                r.number,
                r.form_checked(),
                achieved,
                r.strong_residual,
                r.relaxed_residual
            )?;
        }
        Ok(())
    }
}

/// A condition whose strongest satisfied form differs from the claim.
#[derive(Clone, Debug, PartialEq)]
pub struct Mismatch {
    pub number: usize,
    pub claimed: ConditionClaim,
    pub achieved: Option<ConditionClaim>,
    pub strong_residual: f64,
    pub relaxed_residual: f64,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let achieved = self.achieved.map_or("none".to_string(), |c| c.to_string());
        write!(
            f,
            "condition {}: claimed {}, achieved {} (strong residual {:.3e}, relaxed residual {:.3e})",
            self.number, self.claimed, achieved, self.strong_residual, self.relaxed_residual
        )
    }
}

/// Evaluates all sixteen conditions on every probe.
///
/// The residual of a form is `‖lhs‖ / scale`, where `scale` bounds the sum of
/// the norms of the terms that make up `lhs`; a form holds when the largest
/// residual over the probes is at most `tol`.
pub fn check_conditions(
    method: &ExpRKMethod,
    probes: &[ConditionProbe],
    tol: f64,
) -> Result<OrderConditionReport, OrderCondError> {
    if probes.len() < MIN_PROBES {
        return Err(OrderCondError::TooFewProbes { required: MIN_PROBES, found: probes.len() });
    }
    let d = probes[0].validate()?;
    for p in probes {
        if p.validate()? != d {
            return Err(OrderCondError::Probe(format!("probe dimensions differ: {d} vs {}", p.dim())));
        }
    }
    let tab = method.tableau();
    let per_probe: Vec<Vec<(f64, f64)>> = probes
        .par_iter()
        .map(|p| {
            let ev = Evaluation::new(tab, p)?;
            if ev.s >= 2 && ev.psi2(2).m.norm_fro() <= 1e-8 * ev.psi2(2).bound.max(f64::MIN_POSITIVE) {
                return Err(OrderCondError::VacuousProbe { seed: p.seed });
            }
            Ok((1..=CONDITION_COUNT)
                .map(|n| {
                    let rel = |v: Val| if v.bound > 0.0 { v.m.norm_fro() / v.bound } else { v.m.norm_fro() };
                    let strong = rel(ev.lhs(n, false));
                    let relaxed = if quadrature_order(n).is_some() { f64::NAN } else { rel(ev.lhs(n, true)) };
                    (strong, relaxed)
                })
                .collect())
        })
        .collect::<Result<_, OrderCondError>>()?;
    let results = (1..=CONDITION_COUNT)
        .map(|n| {
            let strong = per_probe.iter().map(|r| r[n - 1].0).fold(0.0, f64::max);
            let (relaxed, relaxed_form) = match quadrature_order(n) {
                Some(j) => {
                    let (res, scale) = weak_at_zero(tab, j);
                    (res / scale, ConditionClaim::WeakAtZero)
                }
                None => (per_probe.iter().map(|r| r[n - 1].1).fold(0.0, f64::max), ConditionClaim::WeakenedB0),
            };
            let achieved = if strong <= tol {
                Some(ConditionClaim::Strong)
            } else if relaxed <= tol {
                Some(relaxed_form)
            } else {
                None
            };
            ConditionResult {
                number: n,
                claimed: method.claim(n),
                achieved,
                strong_residual: strong,
                relaxed_residual: relaxed,
            }
        })
        .collect();
    Ok(OrderConditionReport { method: method.name().to_string(), tolerance: tol, probes: probes.len(), results })
}

/// [`verify_claims_with`] using the default probes and tolerance.
pub fn verify_claims(method: &ExpRKMethod) -> Result<OrderConditionReport, OrderCondError> {
    verify_claims_with(method, &standard_probes(DEFAULT_PROBE_COUNT, PROBE_DIM, DEFAULT_SEED), DEFAULT_TOLERANCE)
}

/// Checks that the strongest satisfied form of every claimed condition is
/// exactly the claimed form.
pub fn verify_claims_with(
    method: &ExpRKMethod,
    probes: &[ConditionProbe],
    tol: f64,
) -> Result<OrderConditionReport, OrderCondError> {
    let report = check_conditions(method, probes, tol)?;
    let mismatches = report.mismatches();
    if mismatches.is_empty() {
        Ok(report)
    } else {
        Err(OrderCondError::ClaimMismatch { method: method.name().to_string(), mismatches })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::{build_exp_rk2s2, method_by_name, METHOD_NAMES};

    fn probes(seed: u64) -> Vec<ConditionProbe> {
        standard_probes(DEFAULT_PROBE_COUNT, PROBE_DIM, seed)
    }

    fn max_abs_diff(a: &DenseMatrix<f64>, b: &DenseMatrix<f64>) -> f64 {
        a.sub(b).norm_fro()
    }

    #[test]
    fn rk2s2_first_quadrature_identity_holds() {
        let m = build_exp_rk2s2(Q::new(1, 2)).unwrap();
        for p in probes(3) {
            assert!(psi(&m, 2, &p.z).unwrap().norm_fro() < 1e-12);
            assert!(psi(&m, 3, &p.z).unwrap().norm_fro() > 1e-3);
        }
    }

    #[test]
    fn second_stage_defect_is_never_zero() {
        for name in METHOD_NAMES {
            let m = method_by_name(name).unwrap();
            let c2 = to_f64(m.nodes()[1]);
            for p in probes(11) {
                let got = psi_stage(&m, 2, 2, &p.z).unwrap();
                let expected = phi_stack(&p.z.scaled(c2), 2).unwrap().get(2).scaled(-c2 * c2);
                assert!(max_abs_diff(&got, &expected) < 1e-14, "{name}");
                assert!(got.norm_fro() > 1e-2);
            }
        }
    }

    #[test]
    fn rk4s6_fifth_stage_defects_vanish() {
        let m = method_by_name("expRK4s6").unwrap();
        for p in probes(5) {
            assert!(psi_stage(&m, 2, 5, &p.z).unwrap().norm_fro() < 1e-12);
            assert!(psi_stage(&m, 3, 5, &p.z).unwrap().norm_fro() < 1e-12);
        }
    }

    #[test]
    fn index_errors() {
        let m = method_by_name("expRK4s6").unwrap();
        let z = DenseMatrix::identity(2);
        assert!(matches!(psi(&m, 1, &z), Err(OrderCondError::Index(_))));
        assert!(matches!(psi(&m, 6, &z), Err(OrderCondError::Index(_))));
        assert!(matches!(psi_stage(&m, 2, 1, &z), Err(OrderCondError::Index(_))));
        assert!(matches!(psi_stage(&m, 2, 7, &z), Err(OrderCondError::Index(_))));
    }

    #[test]
    fn catalog_matches_claims() {
        for name in METHOD_NAMES {
            let m = method_by_name(name).unwrap();
            let report = verify_claims(&m).unwrap_or_else(|e| panic!("{e}"));
            assert!(report.passed());
            assert!(report.results.iter().all(|r| r.strong_residual >= 0.0 && r.relaxed_residual >= 0.0));
        }
    }

    #[test]
    fn rk4s6_pattern() {
        let m = method_by_name("expRK4s6").unwrap();
        let r = check_conditions(&m, &probes(1), DEFAULT_TOLERANCE).unwrap();
        for n in [1, 2, 3, 5, 6, 7] {
            assert_eq!(r.result(n).achieved, Some(ConditionClaim::Strong), "condition {n}");
        }
        assert_eq!(r.result(4).achieved, Some(ConditionClaim::WeakAtZero));
        assert_eq!(r.result(4).relaxed_residual, 0.0);
    }

    #[test]
    fn corrupted_b5_breaks_quadrature_conditions() {
        let m = method_by_name("expRK4s6").unwrap();
        let bad = m.with_scaled_entry((5, 0), Q::new(101, 100)).unwrap();
        match verify_claims(&bad) {
            Err(OrderCondError::ClaimMismatch { mismatches, .. }) => {
                let numbers: Vec<usize> = mismatches.iter().map(|x| x.number).collect();
                assert!(numbers.contains(&1) && numbers.contains(&2), "{numbers:?}");
            }
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn any_single_term_perturbation_is_detected() {
        let m = method_by_name("expRK4s6").unwrap();
        for (entry, poly) in m.tableau().entries() {
            for term in 0..poly.terms().len() {
                let bad = m.perturbed(entry, term, Q::new(101, 100)).unwrap();
                assert!(verify_claims(&bad).is_err(), "entry {entry:?} term {term}");
            }
        }
    }

    #[test]
    fn residuals_are_linear_in_j() {
        let m = method_by_name("expRK4s6").unwrap();
        let p = ConditionProbe::random(PROBE_DIM, 8);
        let mut p2 = p.clone();
        p2.j = p.j.scaled(2.0);
        let tab = m.tableau();
        let e1 = Evaluation::new(tab, &p).unwrap();
        let e2 = Evaluation::new(tab, &p2).unwrap();
        for (n, power) in [(3, 1), (5, 1), (9, 1), (6, 2), (10, 2), (11, 3)] {
            let a = e1.lhs(n, false).m.scaled(2f64.powi(power));
            let b = e2.lhs(n, false).m;
            assert!(max_abs_diff(&a, &b) <= 1e-13 * (1.0 + b.norm_fro()), "condition {n}");
        }
    }

    #[test]
    fn verdicts_stable_across_seeds() {
        for name in ["expRK4s5", "expRK5s8"] {
            let m = method_by_name(name).unwrap();
            let verdicts: Vec<Vec<Option<ConditionClaim>>> = (0..5u64)
                .map(|s| {
                    let r = check_conditions(&m, &probes(1000 + 17 * s), DEFAULT_TOLERANCE).unwrap();
                    r.results.iter().map(|x| x.achieved).collect()
                })
                .collect();
            assert!(verdicts.windows(2).all(|w| w[0] == w[1]), "{name}");
        }
    }

    #[test]
    fn weak_identity_is_exact() {
        let m = method_by_name("expRK4s6").unwrap();
        let (res, scale) = weak_at_zero(m.tableau(), 4);
        assert_eq!(res, 0.0);
        assert!(scale > 1.0 / 24.0);
    }

    #[test]
    fn probe_errors() {
        let m = method_by_name("expRK4s6").unwrap();
        assert!(matches!(
            check_conditions(&m, &probes(1)[..2], 1e-9),
            Err(OrderCondError::TooFewProbes { found: 2, .. })
        ));
        let mut mixed = probes(1);
        mixed[2] = ConditionProbe::random(4, 9);
        assert!(matches!(check_conditions(&m, &mixed, 1e-9), Err(OrderCondError::Probe(_))));
    }

    #[test]
    fn report_renders_table() {
        let m = method_by_name("expRK4s6").unwrap();
        let text = verify_claims(&m).unwrap().to_string();
        assert!(text.contains("expRK4s6"));
        assert_eq!(text.lines().filter(|l| l.ends_with("pass")).count(), 7);
        assert_eq!(text.lines().filter(|l| l.ends_with("skip")).count(), 9);
    }
}
