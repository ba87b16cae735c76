//! Adaptive sub-stepping Krylov evaluation of
//! `w(ρ) = Σ_{k=0}^{q} ρ^k φ_k(ρM) v_k` at several scalings at once.
//!
//! `w` is the top block of `exp(τ Ã) x₀` with the augmented matrix
//!
//! ```text
//!     Ã = [ M   η·[v_q … v_1] ]      x₀ = [ v_0     ]
//!         [ 0        J        ]           [ e_q / η ]
//! ```
//!
//! where `J` is the `q x q` upper shift and `η` a power of two balancing the
//! two blocks. The interval `[0, ρ_r]` is crossed in sub-steps; each sub-step
//! builds a fresh Krylov basis at the current state, and sub-step endpoints
//! are forced onto every requested `ρ_i`.

use std::collections::VecDeque;

use super::arnoldi::ArnoldiProcess;
use super::{KrylovError, LinearOperator};
use crate::matfun::{expm, DenseMatrix};
use crate::scalar::{norm2, Scalar};

/// Safety factor on step-size predictions.
const GAMMA: f64 = 0.8;
/// Largest Krylov dimension the controller will use.
const MAX_KRYLOV_DIM: usize = 128;
/// Bound on the growth of the preferred step between sub-steps.
const MAX_STEP_GROWTH: f64 = 1000.0;
/// A preferred step within this factor of the next target is stretched onto it.
const STRETCH: f64 = 1.25;
/// Assumed error reduction per extra Krylov vector when only one dimension was tried.
const DEFAULT_RATIO: f64 = 0.25;
/// Bounds on the observed reduction factor used for extrapolation.
const MIN_RATIO: f64 = 1e-3;
const MAX_RATIO: f64 = 0.9;
/// Number of controller events kept for diagnostics.
const TRACE_LEN: usize = 32;

/// Request for `outputs[i] = Σ_k φ_k(ρ_i M) ρ_i^k v_k`.
#[derive(Clone, Copy)]
pub struct PhiCombinationTask<'a, T: Scalar> {
    pub operator: &'a dyn LinearOperator<T>,
    /// `v_0 … v_q`.
    pub vectors: &'a [Vec<T>],
    /// Strictly increasing, each in `(0, 1]`.
    pub scalings: &'a [f64],
    pub tolerance: f64,
    pub initial_krylov_dim: usize,
    pub iom_length: usize,
    /// Budget on sub-step attempts, accepted or rejected.
    pub max_substeps: usize,
}

impl<'a, T: Scalar> PhiCombinationTask<'a, T> {
    pub const DEFAULT_TOLERANCE: f64 = 1e-12;
    pub const DEFAULT_KRYLOV_DIM: usize = 1;
    pub const DEFAULT_IOM: usize = 2;

    pub fn new(operator: &'a dyn LinearOperator<T>, vectors: &'a [Vec<T>], scalings: &'a [f64]) -> Self {
        Self {
            operator,
            vectors,
            scalings,
            tolerance: Self::DEFAULT_TOLERANCE,
            initial_krylov_dim: Self::DEFAULT_KRYLOV_DIM,
            iom_length: Self::DEFAULT_IOM,
            max_substeps: 200_000,
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_iom(mut self, iom: usize) -> Self {
        self.iom_length = iom;
        self
    }

    pub fn with_initial_dim(mut self, m: usize) -> Self {
        self.initial_krylov_dim = m;
        self
    }

    pub fn validate(&self) -> Result<(), KrylovError> {
        let n = self.operator.dim();
        if self.scalings.is_empty() {
            return Err(KrylovError::InvalidTask("no scalings requested".into()));
        }
        if let Some(bad) = self.scalings.iter().find(|r| !(**r > 0.0 && **r <= 1.0)) {
            return Err(KrylovError::InvalidTask(format!("scaling {bad} outside (0, 1]")));
        }
        if self.scalings.windows(2).any(|w| w[0] >= w[1]) {
            return Err(KrylovError::InvalidTask("scalings must be strictly increasing".into()));
        }
        if self.vectors.is_empty() {
            return Err(KrylovError::InvalidTask("no input vectors".into()));
        }
        if let Some(bad) = self.vectors.iter().find(|v| v.len() != n) {
            return Err(KrylovError::DimensionMismatch { expected: n, found: bad.len() });
        }
        if !(self.tolerance > 0.0) {
            return Err(KrylovError::InvalidTask(format!("tolerance {} must be positive", self.tolerance)));
        }
        if self.initial_krylov_dim == 0 || self.iom_length == 0 {
            return Err(KrylovError::InvalidTask("Krylov dimension and IOM length must be positive".into()));
        }
        Ok(())
    }
}

/// Work counters of one evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct KrylovStats {
    /// Krylov bases built (one per accepted sub-step start).
    pub krylov_steps: usize,
    /// Accepted sub-steps.
    pub substeps: usize,
    pub rejected: usize,
    /// Krylov dimension in use at the end.
    pub final_dim: usize,
    pub operator_applications: usize,
}

impl KrylovStats {
    pub fn accumulate(&mut self, other: &KrylovStats) {
        self.krylov_steps += other.krylov_steps;
        self.substeps += other.substeps;
        self.rejected += other.rejected;
        self.final_dim = self.final_dim.max(other.final_dim);
        self.operator_applications += other.operator_applications;
    }
}

#[derive(Clone, Debug)]
pub struct PhiCombinationResult<T> {
    pub outputs: Vec<Vec<T>>,
    pub stats: KrylovStats,
}

/// One controller decision, kept for failure diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerEvent {
    pub tau: f64,
    pub step: f64,
    pub dim: usize,
    pub omega: f64,
    pub accepted: bool,
}

/// `Ã` acting on `[top; tail]` without materialising it.
struct Augmented<'a, T: Scalar> {
    inner: &'a dyn LinearOperator<T>,
    /// `η v_q, …, η v_1`; column `j` multiplies tail entry `j`.
    columns: Vec<Vec<T>>,
    n: usize,
}

impl<T: Scalar> LinearOperator<T> for Augmented<'_, T> {
    fn dim(&self) -> usize {
        self.n + self.columns.len()
    }

    fn apply(&self, x: &[T], y: &mut [T]) {
        let (xt, xs) = x.split_at(self.n);
        let (yt, ys) = y.split_at_mut(self.n);
        self.inner.apply(xt, yt);
        for (col, &c) in self.columns.iter().zip(xs) {
            if c != T::zero() {
                crate::scalar::axpy(c, col, yt);
            }
        }
        let q = xs.len();
        for j in 0..q {
            ys[j] = if j + 1 < q { xs[j + 1] } else { T::zero() };
        }
    }

    fn cost_hint(&self) -> f64 {
        self.inner.cost_hint() + 2.0 * (self.columns.len() * self.n) as f64
    }
}

fn is_zero<T: Scalar>(v: &[T]) -> bool {
    v.iter().all(|x| *x == T::zero())
}

fn power_of_two_near(x: f64) -> f64 {
    2f64.powi(x.log2().round() as i32)
}

/// Evaluates the task by adaptive Krylov sub-stepping.
pub fn evaluate_combination<T: Scalar>(task: &PhiCombinationTask<'_, T>) -> Result<PhiCombinationResult<T>, KrylovError> {
    task.validate()?;
    let n = task.operator.dim();
    let r = task.scalings.len();

    let mut q = task.vectors.len() - 1;
    while q > 0 && is_zero(&task.vectors[q]) {
        q -= 1;
    }
    let max_tail = task.vectors[1..=q].iter().map(|v| norm2(v)).fold(0.0, f64::max);
    let eta = if max_tail > 0.0 { power_of_two_near(1.0 / max_tail) } else { 1.0 };
    let columns: Vec<Vec<T>> = (1..=q).rev().map(|k| task.vectors[k].iter().map(|x| x.scale(eta)).collect()).collect();
    let aug = Augmented { inner: task.operator, columns, n };
    let dim = n + q;

    let mut x = vec![T::zero(); dim];
    x[..n].copy_from_slice(&task.vectors[0]);
    if q > 0 {
        x[dim - 1] = T::from_f64(1.0 / eta);
    }

    let mut stats = KrylovStats::default();
    let mut outputs = Vec::with_capacity(r);
    if is_zero(&x) {
        outputs.resize(r, vec![T::zero(); n]);
        return Ok(PhiCombinationResult { outputs, stats });
    }

    let iom = task.iom_length;
    let m_max = dim.min(MAX_KRYLOV_DIM);
    let tau_end = task.scalings[r - 1];
    let controller = Controller {
        mv_cost: aug.cost_hint() + 4.0 * (iom.min(m_max) + 1) as f64 * dim as f64,
        dim,
        m_max,
    };
    let mut m = task.initial_krylov_dim.min(m_max);
    let mut s_pref = tau_end;
    let mut tau = 0.0;
    let mut attempts = 0usize;
    let mut trace: VecDeque<ControllerEvent> = VecDeque::with_capacity(TRACE_LEN);
    let mut cand = vec![T::zero(); dim];
    let mut last_dim = 0;

    'outer: while outputs.len() < r {
        let mut proc = match ArnoldiProcess::new(&x, iom) {
            Ok(p) => p,
            Err(KrylovError::DegenerateSeed) => {
                // The state decayed to exactly zero; it stays there.
                while outputs.len() < r {
                    outputs.push(vec![T::zero(); n]);
                }
                break 'outer;
            }
            Err(e) => return Err(e),
        };
        stats.krylov_steps += 1;
        let x_top = norm2(&x[..n]);
        loop {
            attempts += 1;
            if attempts > task.max_substeps {
                return Err(KrylovError::NoConvergence {
                    tau,
                    attempts: attempts - 1,
                    trace: trace.into_iter().collect(),
                });
            }
            let target = task.scalings[outputs.len()];
            let remaining = target - tau;
            // Avoid leaving a sliver before the next target: stretch onto it
            // when close, split the remainder evenly when within two steps.
            let truncated = s_pref * STRETCH >= remaining;
            let s = if truncated {
                remaining
            } else if 2.0 * s_pref >= remaining {
                0.5 * remaining
            } else {
                s_pref
            };

            proc.extend(&aug, m)?;
            let m_eff = proc.steps().min(m);
            let exact = proc.exact_at(m_eff);
            last_dim = m_eff;
            let (y, err) = projected_exponential(&proc, m_eff, s, exact)?;
            proc.combine(&y, &mut cand);
            let cand_top = norm2(&cand[..n]);
            let mut scale = x_top.max(cand_top);
            if scale == 0.0 {
                scale = norm2(&cand);
            }
            let omega = if exact { 0.0 } else { err / (task.tolerance * (s / tau_end) * scale) };
            if !omega.is_finite() || !cand_top.is_finite() {
                return Err(KrylovError::NumericalBreakdown(format!(
                    "non-finite error estimate at tau = {tau}, step = {s}, m = {m_eff}"
                )));
            }
            let accepted = omega <= 1.0;
            if trace.len() == TRACE_LEN {
                trace.pop_front();
            }
            trace.push_back(ControllerEvent { tau, step: s, dim: m_eff, omega, accepted });

            let ratio = if exact || m_eff < 2 {
                DEFAULT_RATIO
            } else {
                let prev = error_estimate(&proc, m_eff - 1, s)? / (task.tolerance * (s / tau_end) * scale);
                (omega / prev).clamp(MIN_RATIO, MAX_RATIO)
            };

            if accepted {
                std::mem::swap(&mut x, &mut cand);
                stats.substeps += 1;
                if truncated {
                    tau = target;
                    outputs.push(x[..n].to_vec());
                } else {
                    tau += s;
                }
                if exact {
                    m = m_eff.max(1);
                    s_pref = s_pref.max(s * MAX_STEP_GROWTH);
                } else {
                    let (m_new, s_new) = controller.plan(s, m_eff, omega, ratio, m_eff);
                    m = m_new;
                    s_pref = if truncated { s_pref.max(s_new) } else { s_new };
                }
                break;
            }

            stats.rejected += 1;
            let (m_new, s_new) = controller.plan(s, m_eff, omega, ratio, m_eff);
            m = m_new;
            s_pref = s_new.min(s);
        }
        stats.operator_applications += proc.applications;
    }
    stats.final_dim = last_dim;
    Ok(PhiCombinationResult { outputs, stats })
}

struct Controller {
    mv_cost: f64,
    dim: usize,
    m_max: usize,
}

impl Controller {
    /// Work of one sub-step with dimension `m`.
    fn substep_cost(&self, m: usize) -> f64 {
        let k = (m + 1) as f64;
        m as f64 * self.mv_cost + 20.0 * k * k * k + 2.0 * (self.dim * m) as f64
    }

    /// Chooses the next `(m, s)` minimising work per unit `τ`. The error ratio
    /// `ω` is extrapolated to neighbouring dimensions by the observed factor
    /// `ratio` per extra Krylov vector and assumed to scale like `s^m`.
    fn plan(&self, s: f64, m: usize, omega: f64, ratio: f64, m_floor: usize) -> (usize, f64) {
        let om = omega.max(1e-300);
        let lo = m_floor.max((3 * m).div_ceil(4)).max(1);
        let hi = ((4 * m).div_ceil(3) + 1).min(self.m_max).max(lo);
        let mut best = (m, 0.0, f64::INFINITY);
        for cand in lo..=hi {
            let predicted = om * ratio.powi(cand as i32 - m as i32);
            let step = (s * GAMMA * predicted.powf(-1.0 / cand as f64)).min(s * MAX_STEP_GROWTH);
            let cost = self.substep_cost(cand) / step;
            if cost < best.2 {
                best = (cand, step, cost);
            }
        }
        (best.0, best.1)
    }
}

/// Error estimate alone, for the leading `m` steps.
fn error_estimate<T: Scalar>(proc: &ArnoldiProcess<T>, m: usize, s: f64) -> Result<f64, KrylovError> {
    Ok(projected_exponential(proc, m, s, false)?.1)
}

/// `β exp(sH_m) e_1` and the error estimate `β h_{m+1,m} s |e_mᵀ φ_1(sH_m) e_1|`,
/// both read off `exp([[sH_m, e_1], [0, 0]])`.
fn projected_exponential<T: Scalar>(
    proc: &ArnoldiProcess<T>,
    m: usize,
    s: f64,
    exact: bool,
) -> Result<(Vec<T>, f64), KrylovError> {
    let h = proc.hessenberg(m);
    let mut k = DenseMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            k[(i, j)] = h[(i, j)].scale(s);
        }
    }
    k[(0, m)] = T::one();
    let e = expm(&k)?;
    let y: Vec<T> = (0..m).map(|i| e[(i, 0)].scale(proc.beta)).collect();
    let err = if exact { 0.0 } else { proc.beta * proc.h_next(m) * s * e[(m - 1, m)].modulus() };
    Ok((y, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krylov::DiagonalOperator;
    use crate::matfun::phi_combination_dense;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec<T: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<T> {
        (0..n).map(|_| T::from_parts(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    fn rel_err<T: Scalar>(a: &[T], b: &[T]) -> f64 {
        let d: Vec<T> = a.iter().zip(b).map(|(x, y)| *x - *y).collect();
        norm2(&d) / norm2(b).max(1e-300)
    }

    #[test]
    fn diagonal_exponential() {
        let d = vec![-3.0, 0.5, -0.1, 1.2];
        let op = DiagonalOperator::new(d.clone());
        let u = vec![1.0, -2.0, 0.3, 4.0];
        let vectors = vec![u.clone(), vec![0.0; 4]];
        let task = PhiCombinationTask::new(&op, &vectors, &[1.0]);
        let res = evaluate_combination(&task).unwrap();
        for j in 0..4 {
            let exact = d[j].exp() * u[j];
            assert!((res.outputs[0][j] - exact).abs() <= 1e-12 * exact.abs());
        }
    }

    #[test]
    fn half_step_phi1_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 50;
        let a = DenseMatrix::from_fn(n, n, |_| rng.gen_range(-1.0..1.0)).scaled(0.3);
        let v: Vec<f64> = random_vec(&mut rng, n);
        let vectors = vec![vec![0.0; n], v.clone()];
        let task = PhiCombinationTask::new(&a, &vectors, &[0.5]);
        let res = evaluate_combination(&task).unwrap();
        let oracle = phi_combination_dense(&a, &vectors, 0.5).unwrap();
        assert!(rel_err(&res.outputs[0], &oracle) < 1e-10);
        // Equivalent form: (1/2) φ_1(M/2) v.
        let stack = crate::matfun::phi_stack(&a.scaled(0.5), 1).unwrap();
        let direct: Vec<f64> = stack.get(1).matvec(&v).iter().map(|x| 0.5 * x).collect();
        assert!(rel_err(&res.outputs[0], &direct) < 1e-10);
    }

    #[test]
    fn multiple_scalings_match_single_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 40;
        let a = DenseMatrix::from_fn(n, n, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .scaled(Complex64::new(0.4, 0.0));
        let vectors: Vec<Vec<Complex64>> = (0..4).map(|_| random_vec(&mut rng, n)).collect();
        let both = evaluate_combination(&PhiCombinationTask::new(&a, &vectors, &[1.0 / 3.0, 0.5])).unwrap();
        for (i, rho) in [1.0 / 3.0, 0.5].into_iter().enumerate() {
            let single = evaluate_combination(&PhiCombinationTask::new(&a, &vectors, &[rho])).unwrap();
            assert!(rel_err(&both.outputs[i], &single.outputs[0]) < 1e-11);
        }
    }

    #[test]
    fn zero_vectors_give_zero() {
        let op = DiagonalOperator::new(vec![1.0, 2.0]);
        let vectors = vec![vec![0.0; 2]; 3];
        let res = evaluate_combination(&PhiCombinationTask::new(&op, &vectors, &[0.5, 1.0])).unwrap();
        assert_eq!(res.outputs, vec![vec![0.0; 2]; 2]);
    }

    #[test]
    fn invalid_tasks_are_rejected() {
        let op = DiagonalOperator::new(vec![1.0, 2.0]);
        let vectors = vec![vec![1.0; 2]];
        for scalings in [&[][..], &[0.5, 0.5][..], &[1.5][..], &[0.0][..]] {
            let task = PhiCombinationTask::new(&op, &vectors, scalings);
            assert!(matches!(evaluate_combination(&task), Err(KrylovError::InvalidTask(_))));
        }
        let short = vec![vec![1.0; 3]];
        assert!(matches!(
            evaluate_combination(&PhiCombinationTask::new(&op, &short, &[1.0])),
            Err(KrylovError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reports_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = DenseMatrix::from_fn(30, 30, |_| rng.gen_range(-1.0..1.0)).scaled(10.0);
        let vectors = vec![random_vec::<f64>(&mut rng, 30)];
        let mut task = PhiCombinationTask::new(&a, &vectors, &[1.0]);
        task.max_substeps = 3;
        match evaluate_combination(&task) {
            Err(KrylovError::NoConvergence { trace, attempts, .. }) => {
                assert_eq!(attempts, 3);
                assert_eq!(trace.len(), 3);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }
}
