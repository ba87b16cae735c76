use std::fmt;

use num_traits::Zero;

use super::{PhiPolynomial, Q};

/// Coefficients `a_ij(z)`, `b_i(z)` and nodes `c_i` of an `s`-stage method.
///
/// Indices are 1-based as in the stage formulas; `a_ij` is meaningful for
/// `2 ≤ j < i ≤ s` and `b_i` for `2 ≤ i ≤ s`. The `φ_1` weight on `F` is
/// implicit: `c_i φ_1(c_i z)` for stages and `φ_1(z)` for the update.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    nodes: Vec<Q>,
    a: Vec<Vec<PhiPolynomial>>,
    b: Vec<PhiPolynomial>,
}

impl Tableau {
    /// Zero tableau with nodes `c_1 = 0, c_2, …, c_s`.
    pub fn new(nodes_from_2: &[Q]) -> Self {
        let mut nodes = vec![Q::zero()];
        nodes.extend_from_slice(nodes_from_2);
        let s = nodes.len();
        Self { nodes, a: vec![vec![PhiPolynomial::zero(); s + 1]; s + 1], b: vec![PhiPolynomial::zero(); s + 1] }
    }

    pub fn stages(&self) -> usize {
        self.nodes.len()
    }

    /// `c_i`, `1 ≤ i ≤ s`.
    pub fn node(&self, i: usize) -> Q {
        self.nodes[i - 1]
    }

    /// `[c_1, …, c_s]`.
    pub fn nodes(&self) -> &[Q] {
        &self.nodes
    }

    pub fn a(&self, i: usize, j: usize) -> &PhiPolynomial {
        &self.a[i][j]
    }

    pub fn b(&self, i: usize) -> &PhiPolynomial {
        &self.b[i]
    }

    pub fn set_a(&mut self, i: usize, j: usize, p: PhiPolynomial) {
        assert!(2 <= j && j < i && i <= self.stages(), "a_({i},{j}) outside the strictly lower tableau");
        self.a[i][j] = p;
    }

    pub fn set_b(&mut self, i: usize, p: PhiPolynomial) {
        assert!(2 <= i && i <= self.stages(), "b_{i} outside 2..={}", self.stages());
        self.b[i] = p;
    }

    pub(crate) fn add_a(&mut self, i: usize, j: usize, p: &PhiPolynomial) {
        let sum = self.a[i][j].add(p);
        self.set_a(i, j, sum);
    }

    pub(crate) fn add_b(&mut self, i: usize, p: &PhiPolynomial) {
        let sum = self.b[i].add(p);
        self.set_b(i, sum);
    }

    /// Highest φ order appearing anywhere.
    pub fn max_order(&self) -> usize {
        let a = self.a.iter().flatten().map(PhiPolynomial::max_order);
        a.chain(self.b.iter().map(PhiPolynomial::max_order)).max().unwrap_or(0)
    }

    /// Every nonzero entry as `((i, j), poly)` with `j = 0` marking `b_i`.
    pub fn entries(&self) -> Vec<((usize, usize), &PhiPolynomial)> {
        let s = self.stages();
        let mut out = Vec::new();
        for i in 2..=s {
            for j in 2..i {
                if !self.a[i][j].is_zero() {
                    out.push(((i, j), &self.a[i][j]));
                }
            }
        }
        for i in 2..=s {
            if !self.b[i].is_zero() {
                out.push(((i, 0), &self.b[i]));
            }
        }
        out
    }

    /// Replaces the entry addressed as in [`Tableau::entries`].
    pub fn replace_entry(&mut self, (i, j): (usize, usize), p: PhiPolynomial) {
        if j == 0 {
            self.set_b(i, p);
        } else {
            self.set_a(i, j, p);
        }
    }
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.stages();
        let nodes: Vec<String> = self.nodes.iter().map(|c| c.to_string()).collect();
        writeln!(f, "c = [{}]", nodes.join(", "))?;
        for ((i, j), p) in self.entries() {
            if j == 0 {
                writeln!(f, "b_{i}(z) = {p}")?;
            } else {
                writeln!(f, "a_{i},{j}(z) = {p}")?;
            }
        }
        if s == 1 {
            writeln!(f, "(no internal stages)")?;
        }
        Ok(())
    }
}
