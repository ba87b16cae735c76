use std::fmt;

use num_traits::{One, Zero};

use super::{PhiPolynomial, PhiTerm, SchemeError, Tableau, Q};

/// Where a batch output is accumulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    /// Internal stage `U_ni`, `2 ≤ i ≤ s`.
    Stage(usize),
    /// The update `u_{n+1}`.
    Next,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Stage(i) => write!(f, "U{i}"),
            Target::Next => write!(f, "u+"),
        }
    }
}

/// One simultaneous evaluation `L_ρ = Σ_k φ_k(ρ hA) ρ^k v_k` for every `ρ` in
/// `scalings`, all sharing the vectors
/// `v_k = h Σ_basis weight(k, basis) · basis`.
///
/// Basis index `0` is `F(t_n, u_n)`, index `j ≥ 2` is `D_nj`; index `1` is unused.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationBatch {
    scalings: Vec<Q>,
    targets: Vec<Target>,
    /// `weights[k - 1][basis]`.
    weights: Vec<Vec<Q>>,
}

impl EvaluationBatch {
    /// Pairs `(ρ, target)` in any order; stored with ascending `ρ`.
    pub fn new(stages: usize, mut outputs: Vec<(Q, Target)>) -> Result<Self, SchemeError> {
        if outputs.is_empty() {
            return Err(SchemeError::Plan("batch without outputs".into()));
        }
        outputs.sort_by(|a, b| a.0.cmp(&b.0));
        if outputs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(SchemeError::Plan("batch scalings must be distinct".into()));
        }
        for (rho, target) in &outputs {
            if *rho <= Q::zero() || *rho > Q::one() {
                return Err(SchemeError::Plan(format!("scaling {rho} outside (0, 1]")));
            }
            if let Target::Stage(i) = target {
                if *i < 2 || *i > stages {
                    return Err(SchemeError::Plan(format!("target stage {i} outside 2..={stages}")));
                }
            }
        }
        let (scalings, targets) = outputs.into_iter().unzip();
        Ok(Self { scalings, targets, weights: Vec::new() })
    }

    /// Adds `value` to the weight of `basis` in `v_k`.
    pub fn with(mut self, k: usize, basis: usize, value: Q) -> Self {
        assert!(k >= 1 && basis != 1, "invalid weight slot (k = {k}, basis = {basis})");
        if self.weights.len() < k {
            self.weights.resize(k, Vec::new());
        }
        let row = &mut self.weights[k - 1];
        if row.len() <= basis {
            row.resize(basis + 1, Q::zero());
        }
        row[basis] += value;
        self
    }

    pub fn scalings(&self) -> &[Q] {
        &self.scalings
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    /// Weight of `basis` in `v_k` (zero when absent).
    pub fn weight(&self, k: usize, basis: usize) -> Q {
        self.weights.get(k - 1).and_then(|row| row.get(basis)).copied().unwrap_or_else(Q::zero)
    }

    /// Largest `k` with a nonzero weight.
    pub fn max_order(&self) -> usize {
        (1..=self.weights.len()).rev().find(|&k| self.weights[k - 1].iter().any(|w| !w.is_zero())).unwrap_or(0)
    }

    /// Highest basis index + 1 over all rows.
    pub fn basis_len(&self) -> usize {
        self.weights.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Orders `k` with at least one nonzero weight.
    pub fn orders_used(&self) -> Vec<usize> {
        (1..=self.weights.len()).filter(|&k| self.weights[k - 1].iter().any(|w| !w.is_zero())).collect()
    }

    /// Stage indices `j` whose `D_nj` appears with a nonzero weight.
    pub fn referenced_stages(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (2..self.basis_len())
            .filter(|&j| self.weights.iter().any(|row| row.get(j).is_some_and(|w| !w.is_zero())))
            .collect();
        out.dedup();
        out
    }
}

/// For each stage `2..=s`, the index of the last batch writing to it.
pub(crate) fn completion_batches(stages: usize, plan: &[EvaluationBatch]) -> Result<Vec<usize>, SchemeError> {
    let mut last = vec![usize::MAX; stages + 1];
    for (b, batch) in plan.iter().enumerate() {
        for t in batch.targets() {
            if let Target::Stage(i) = t {
                last[*i] = b;
            }
        }
    }
    if let Some(i) = (2..=stages).find(|&i| last[i] == usize::MAX) {
        return Err(SchemeError::Plan(format!("stage {i} is never assembled")));
    }
    Ok(last)
}

/// Checks that every batch only references `D_nj` of stages completed by earlier batches.
pub fn check_explicit(stages: usize, plan: &[EvaluationBatch]) -> Result<(), SchemeError> {
    let done = completion_batches(stages, plan)?;
    for (b, batch) in plan.iter().enumerate() {
        if batch.basis_len() > stages + 1 {
            return Err(SchemeError::Plan(format!("batch {b} references a stage beyond {stages}")));
        }
        for j in batch.referenced_stages() {
            if done[j] >= b {
                return Err(SchemeError::Plan(format!("batch {b} uses D_{j} before stage {j} is complete")));
            }
        }
    }
    if !plan.iter().any(|batch| batch.targets().contains(&Target::Next)) {
        return Err(SchemeError::Plan("no batch produces u_{n+1}".into()));
    }
    Ok(())
}

/// Result of executing a plan on formal symbols `φ_k(c z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolicExecution {
    pub tableau: Tableau,
    /// Coefficient of `hF` in stage `i` (index `i`); index `0` holds the update.
    pub f_weights: Vec<PhiPolynomial>,
}

/// Expands every batch into `a_ij(z) = Σ w · ρ^k φ_k(ρ z)` contributions.
pub fn execute_symbolically(nodes_from_2: &[Q], plan: &[EvaluationBatch]) -> Result<SymbolicExecution, SchemeError> {
    let mut tableau = Tableau::new(nodes_from_2);
    let s = tableau.stages();
    let mut f_weights = vec![PhiPolynomial::zero(); s + 1];
    for batch in plan {
        for (&rho, &target) in batch.scalings().iter().zip(batch.targets()) {
            for k in 1..=batch.max_order() {
                let rho_k = (0..k).fold(Q::one(), |acc, _| acc * rho);
                for basis in 0..batch.basis_len() {
                    let w = batch.weight(k, basis);
                    if w.is_zero() {
                        continue;
                    }
                    let p = PhiPolynomial::from_terms([PhiTerm { order: k, scaling: rho, coef: w * rho_k }])?;
                    match (target, basis) {
                        (Target::Stage(i), 0) => f_weights[i] = f_weights[i].add(&p),
                        (Target::Next, 0) => f_weights[0] = f_weights[0].add(&p),
                        (Target::Stage(i), j) => {
                            if j >= i {
                                return Err(SchemeError::Plan(format!("stage {i} depends on D_{j}")));
                            }
                            tableau.add_a(i, j, &p);
                        }
                        (Target::Next, j) => tableau.add_b(j, &p),
                    }
                }
            }
        }
    }
    Ok(SymbolicExecution { tableau, f_weights })
}

/// Verifies term-for-term that `plan` reproduces `tableau`, including the
/// implicit `c_i φ_1(c_i z)` weight on `F`.
pub fn check_plan_matches(tableau: &Tableau, plan: &[EvaluationBatch]) -> Result<(), SchemeError> {
    let s = tableau.stages();
    check_explicit(s, plan)?;
    let exec = execute_symbolically(&tableau.nodes()[1..], plan)?;
    for i in 0..=s {
        if i == 1 {
            continue;
        }
        let c = if i == 0 { Q::one() } else { tableau.node(i) };
        let expected = PhiPolynomial::term(1, c, c)?;
        if exec.f_weights[i] != expected {
            let who = if i == 0 { "u_{n+1}".to_string() } else { format!("U_{i}") };
            return Err(SchemeError::Plan(format!("F weight of {who} is {} instead of {expected}", exec.f_weights[i])));
        }
    }
    for i in 2..=s {
        for j in 2..i {
            if exec.tableau.a(i, j) != tableau.a(i, j) {
                return Err(SchemeError::Plan(format!(
                    "a_{i},{j}: plan gives {} but tableau has {}",
                    exec.tableau.a(i, j),
                    tableau.a(i, j)
                )));
            }
        }
        if exec.tableau.b(i) != tableau.b(i) {
            return Err(SchemeError::Plan(format!("b_{i}: plan gives {} but tableau has {}", exec.tableau.b(i), tableau.b(i))));
        }
    }
    Ok(())
}
