use std::fmt;

use super::plan::{check_plan_matches, completion_batches};
use super::{EvaluationBatch, PhiPolynomial, PhiTerm, SchemeError, Tableau, Q};

/// Number of stiff order conditions tracked (orders up to five).
pub const CONDITION_COUNT: usize = 16;

/// Form in which a method satisfies one stiff order condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ConditionClaim {
    /// Holds as an identity in the matrix argument.
    Strong,
    /// Only the scalar identity at `Z = 0` holds.
    WeakAtZero,
    /// Holds after replacing every `b_i(Z)` by `b_i(0)`.
    WeakenedB0,
    /// Not required for the method's order.
    NotApplicable,
}

impl fmt::Display for ConditionClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionClaim::Strong => "strong",
            ConditionClaim::WeakAtZero => "weak-at-zero",
            ConditionClaim::WeakenedB0 => "weakened-b(0)",
            ConditionClaim::NotApplicable => "n/a",
        })
    }
}

/// An explicit exponential Runge–Kutta method with its evaluation plan.
#[derive(Clone, Debug)]
pub struct ExpRKMethod {
    name: String,
    order: usize,
    tableau: Tableau,
    plan: Vec<EvaluationBatch>,
    claims: [ConditionClaim; CONDITION_COUNT],
    completion: Vec<usize>,
}

impl ExpRKMethod {
    /// Assembles a method, checking that `plan` reproduces `tableau` exactly.
    pub fn new(
        name: impl Into<String>,
        order: usize,
        tableau: Tableau,
        plan: Vec<EvaluationBatch>,
        claims: [ConditionClaim; CONDITION_COUNT],
    ) -> Result<Self, SchemeError> {
        check_plan_matches(&tableau, &plan)?;
        let completion = completion_batches(tableau.stages(), &plan)?;
        Ok(Self { name: name.into(), order, tableau, plan, claims, completion })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn stages(&self) -> usize {
        self.tableau.stages()
    }

    /// `[c_1 = 0, c_2, …, c_s]`.
    pub fn nodes(&self) -> &[Q] {
        self.tableau.nodes()
    }

    pub fn tableau(&self) -> &Tableau {
        &self.tableau
    }

    pub fn plan(&self) -> &[EvaluationBatch] {
        &self.plan
    }

    pub fn batch_count(&self) -> usize {
        self.plan.len()
    }

    /// Claimed form of condition `1 ≤ number ≤ 16`.
    pub fn claim(&self, number: usize) -> ConditionClaim {
        self.claims[number - 1]
    }

    pub fn claims(&self) -> &[ConditionClaim; CONDITION_COUNT] {
        &self.claims
    }

    /// Batch after which stage `i` is fully assembled.
    pub(crate) fn completion_batch(&self, i: usize) -> usize {
        self.completion[i]
    }

    /// Copy whose tableau entry `entry` (as in [`Tableau::entries`]) has term
    /// `term` multiplied by `factor`. The plan is left untouched, so the copy
    /// deliberately violates plan/tableau equivalence; it exists to exercise
    /// the order-condition checker.
    pub fn perturbed(&self, entry: (usize, usize), term: usize, factor: Q) -> Result<Self, SchemeError> {
        let current = if entry.1 == 0 { self.tableau.b(entry.0) } else { self.tableau.a(entry.0, entry.1) };
        if term >= current.terms().len() {
            return Err(SchemeError::Constraint(format!("entry {entry:?} has no term {term}")));
        }
        let terms = current.terms().iter().enumerate().map(|(idx, t)| PhiTerm {
            coef: if idx == term { t.coef * factor } else { t.coef },
            ..t.clone()
        });
        let mut tableau = self.tableau.clone();
        tableau.replace_entry(entry, PhiPolynomial::from_terms(terms)?);
        Ok(Self { name: format!("{}~perturbed", self.name), tableau, ..self.clone() })
    }

    /// Copy with every term of entry `entry` multiplied by `factor`; see [`Self::perturbed`].
    pub fn with_scaled_entry(&self, entry: (usize, usize), factor: Q) -> Result<Self, SchemeError> {
        let current = if entry.1 == 0 { self.tableau.b(entry.0) } else { self.tableau.a(entry.0, entry.1) };
        let scaled = current.scale(factor);
        let mut tableau = self.tableau.clone();
        tableau.replace_entry(entry, scaled);
        Ok(Self { name: format!("{}~perturbed", self.name), tableau, ..self.clone() })
    }

    /// Structured text dump of nodes, tableau and batch plan.
    pub fn describe(&self) -> String {
        let mut out = format!(
            "method {}\norder {}\nstages {}\nbatches {}\n",
            self.name,
            self.order,
            self.stages(),
            self.batch_count()
        );
        out.push_str(&self.tableau.to_string());
        for (b, batch) in self.plan.iter().enumerate() {
            let outs: Vec<String> = batch.scalings().iter().zip(batch.targets()).map(|(r, t)| format!("{t}@{r}")).collect();
            out.push_str(&format!("batch {} -> [{}]\n", b + 1, outs.join(", ")));
            for k in 1..=batch.max_order() {
                let mut parts = Vec::new();
                for basis in 0..batch.basis_len() {
                    let w = batch.weight(k, basis);
                    if w != Q::from_integer(0) {
                        let sym = if basis == 0 { "F".to_string() } else { format!("D{basis}") };
                        parts.push(format!("({w})·{sym}"));
                    }
                }
                if !parts.is_empty() {
                    out.push_str(&format!("  v{k} = h[{}]\n", parts.join(" + ")));
                }
            }
        }
        out
    }
}
