//! A trace monoid acting on a finite state set with an absorbing sink, its
//! Möbius matrix, theta polynomial, characteristic root and cocycle.
//!
//! The sink is encoded as `None` wherever a state is an `Option<StateId>`.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::{null_space, PolyMatrix};
use crate::petri_net::{PetriNet, ReachabilityGraph};
use crate::poly::Polynomial;
use crate::roots::{smallest_root_unit, CertifiedRoot};
use crate::scalar::Scalar;
use crate::trace_monoid::{Clique, Letter, Trace, TraceMonoid};

pub type StateId = usize;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsyncSystem {
    monoid: TraceMonoid,
    labels: Vec<String>,
    /// `action[s][a]`
    action: Vec<Vec<Option<StateId>>>,
    cliques: Vec<Clique>,
}

impl AsyncSystem {
    /// System of reachable markings; states are labelled `M0, M1, …` in
    /// reachability order.
    pub fn from_net(net: &PetriNet, graph: &ReachabilityGraph, clique_cap: usize) -> Result<Self> {
        let (letters, pairs) = net.independence_alphabet();
        let monoid = TraceMonoid::new(letters, &pairs)?;
        let n = graph.markings.len();
        let mut action = vec![vec![None; monoid.size()]; n];
        for &(from, t, to) in &graph.edges {
            action[from][t] = Some(to);
        }
        let labels = (0..n).map(|i| format!("M{i}")).collect();
        Self::from_table(monoid, labels, action, clique_cap)
    }

    /// Builds a system from an explicit letter action table, checking that
    /// independent letters commute at every state.
    pub fn from_table(
        monoid: TraceMonoid,
        labels: Vec<String>,
        action: Vec<Vec<Option<StateId>>>,
        clique_cap: usize,
    ) -> Result<Self> {
        if labels.len() != action.len() || labels.is_empty() {
            return Err(Error::Invalid(
                "one action row per state is required".into(),
            ));
        }
        for row in &action {
            if row.len() != monoid.size() || row.iter().flatten().any(|&t| t >= labels.len()) {
                return Err(Error::Invalid("malformed action table".into()));
            }
        }
        let cliques = monoid.cliques(clique_cap)?;
        let sys = Self {
            monoid,
            labels,
            action,
            cliques,
        };
        sys.check_commutation()?;
        Ok(sys)
    }

    fn check_commutation(&self) -> Result<()> {
        for s in 0..self.labels.len() {
            for (a, b) in self.monoid.independent_pairs() {
                if self.act_word(s, &[a, b]) != self.act_word(s, &[b, a]) {
                    return Err(Error::IllDefinedAction {
                        state: self.labels[s].clone(),
                        a: self.monoid.letter_name(a).into(),
                        b: self.monoid.letter_name(b).into(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn monoid(&self) -> &TraceMonoid {
        &self.monoid
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    pub fn clique_index(&self, c: &Clique) -> Option<usize> {
        self.cliques.binary_search(c).ok()
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn state_label(&self, s: StateId) -> &str {
        &self.labels[s]
    }

    pub fn state(&self, label: &str) -> Result<StateId> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Invalid(format!("unknown state `{label}`")))
    }

    pub fn action_table(&self) -> &[Vec<Option<StateId>>] {
        &self.action
    }

    pub fn act_letter(&self, s: StateId, a: Letter) -> Option<StateId> {
        self.action[s][a]
    }

    pub fn act_word(&self, s: StateId, word: &[Letter]) -> Option<StateId> {
        word.iter().try_fold(s, |s, &a| self.action[s][a])
    }

    pub fn act_clique(&self, s: StateId, c: &Clique) -> Option<StateId> {
        self.act_word(s, c.letters())
    }

    pub fn act(&self, s: StateId, x: &Trace) -> Option<StateId> {
        x.cliques().iter().try_fold(s, |s, c| self.act_clique(s, c))
    }

    /// Every state reaches every state (itself included) by a non-empty trace.
    pub fn is_irreducible(&self) -> bool {
        let n = self.state_count();
        let forward: Vec<Vec<StateId>> = self
            .action
            .iter()
            .map(|row| row.iter().flatten().copied().collect())
            .collect();
        let mut backward = vec![Vec::new(); n];
        for (s, outs) in forward.iter().enumerate() {
            for &t in outs {
                backward[t].push(s);
            }
        }
        let reach_all = |adj: &[Vec<StateId>]| {
            let mut seen = vec![false; n];
            seen[0] = true;
            let mut queue = VecDeque::from([0]);
            while let Some(s) = queue.pop_front() {
                for &t in &adj[s] {
                    if !seen[t] {
                        seen[t] = true;
                        queue.push_back(t);
                    }
                }
            }
            seen.iter().all(|&b| b)
        };
        forward.iter().all(|o| !o.is_empty()) && reach_all(&forward) && reach_all(&backward)
    }

    /// `M[s][t] = Σ (−1)^|γ| z^|γ|` over cliques `γ` (the empty one included)
    /// with `s·γ = t`.
    pub fn mobius_matrix(&self) -> PolyMatrix<BigInt> {
        let n = self.state_count();
        let mut m = PolyMatrix::identity(n);
        for s in 0..n {
            for c in &self.cliques {
                if let Some(t) = self.act_clique(s, c) {
                    let sign = if c.len() % 2 == 0 { 1 } else { -1 };
                    m.add_to(s, t, &Polynomial::monomial(BigInt::from(sign), c.len()));
                }
            }
        }
        m
    }

    /// `g[s][t][k]`: number of traces `x` with `|x| = k` and `s·x = t`, for
    /// `k ≤ n`; dynamic programming over (last clique, state, length).
    pub fn growth_matrix_coefficients(
        &self,
        n: usize,
        max_length: usize,
    ) -> Result<Vec<Vec<Vec<BigInt>>>> {
        if n > max_length {
            return Err(Error::Cap {
                what: "series order",
                requested: n,
                cap: max_length,
            });
        }
        let states = self.state_count();
        let nc = self.cliques.len();
        let successors: Vec<Vec<usize>> = self
            .cliques
            .iter()
            .map(|g| {
                (0..nc)
                    .filter(|&j| self.monoid.is_normal_pair(g, &self.cliques[j]))
                    .collect()
            })
            .collect();
        let mut out = vec![vec![vec![BigInt::zero(); n + 1]; states]; states];
        for s in 0..states {
            out[s][s][0] = BigInt::from(1);
            // count[k][clique][state]
            let mut count = vec![vec![vec![BigInt::zero(); states]; nc]; n + 1];
            for (j, c) in self.cliques.iter().enumerate() {
                if c.len() > n {
                    continue;
                }
                if let Some(t) = self.act_clique(s, c) {
                    count[c.len()][j][t] += 1;
                }
            }
            for k in 1..=n {
                for j in 0..nc {
                    for t in 0..states {
                        if count[k][j][t].is_zero() {
                            continue;
                        }
                        let v = count[k][j][t].clone();
                        out[s][t][k] += &v;
                        for &next in &successors[j] {
                            let len = k + self.cliques[next].len();
                            if len > n {
                                continue;
                            }
                            if let Some(u) = self.act_clique(t, &self.cliques[next]) {
                                count[len][next][u] += &v;
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Growth matrix truncated to order `n` as a polynomial matrix.
    pub fn growth_matrix(&self, n: usize, max_length: usize) -> Result<PolyMatrix<BigInt>> {
        let g = self.growth_matrix_coefficients(n, max_length)?;
        Ok(PolyMatrix::from_rows(
            g.into_iter()
                .map(|row| row.into_iter().map(Polynomial::new).collect())
                .collect(),
        ))
    }

    pub fn theta_polynomial(&self) -> Polynomial<BigInt> {
        self.mobius_matrix().determinant()
    }

    /// Smallest positive root of the theta polynomial in `(0, 1]`.
    pub fn characteristic_root(&self, tol: f64) -> Result<CharacteristicRoot> {
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let root = smallest_root_unit(&self.theta_polynomial(), tol)?;
        let degenerate = root.exact && root.hi == num_rational::BigRational::from_integer(1.into());
        Ok(CharacteristicRoot { root, degenerate })
    }

    /// State weights `h` spanning the kernel of `M(q0)`, normalized at the
    /// first state; `Γ(s, t) = h(t) / h(s)`.
    pub fn cocycle<T: Scalar>(&self, q0: &CharacteristicRoot, tol: T) -> Result<Cocycle<T>> {
        let q = T::of(q0.root.midpoint());
        let m = self.mobius_matrix().eval_float(q);
        let basis = null_space(&m, tol);
        let to_f64 = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<f64>>();
        if basis.len() != 1 {
            return Err(Error::KernelDimension {
                dimension: basis.len(),
                basis: basis.iter().map(|v| to_f64(v)).collect(),
            });
        }
        let v = &basis[0];
        let pivot = v[0];
        let largest = v.iter().fold(T::zero(), |a, x| a.max(x.abs()));
        if pivot.abs() <= tol * largest {
            return Err(Error::NonPositiveKernel(to_f64(v)));
        }
        let h: Vec<T> = v.iter().map(|&x| x / pivot).collect();
        if h.iter().any(|&x| x <= T::zero()) {
            return Err(Error::NonPositiveKernel(to_f64(&h)));
        }
        let residual = m
            .iter()
            .map(|row| row.iter().zip(&h).map(|(&a, &b)| a * b).sum::<T>().abs())
            .fold(T::zero(), T::max);
        if residual > tol {
            return Err(Error::Residual {
                residual: residual.as_f64(),
                tolerance: tol.as_f64(),
            });
        }
        Ok(Cocycle::from_weights(q, q0.root.clone(), h, residual))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicRoot {
    pub root: CertifiedRoot,
    /// the root is exactly 1
    pub degenerate: bool,
}

impl CharacteristicRoot {
    pub fn value(&self) -> f64 {
        self.root.midpoint()
    }
}

/// Characteristic root together with the positive state weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle<T> {
    q0: T,
    root: CertifiedRoot,
    h: Vec<T>,
    gamma: Vec<Vec<T>>,
    residual: T,
}

impl<T: Scalar> Cocycle<T> {
    pub fn from_weights(q0: T, root: CertifiedRoot, h: Vec<T>, residual: T) -> Self {
        let gamma = h
            .iter()
            .map(|&hs| h.iter().map(|&ht| ht / hs).collect())
            .collect();
        Self {
            q0,
            root,
            h,
            gamma,
            residual,
        }
    }

    pub fn q0(&self) -> T {
        self.q0
    }

    pub fn root(&self) -> &CertifiedRoot {
        &self.root
    }

    pub fn weights(&self) -> &[T] {
        &self.h
    }

    pub fn gamma(&self, s: StateId, t: StateId) -> T {
        self.gamma[s][t]
    }

    pub fn gamma_table(&self) -> &[Vec<T>] {
        &self.gamma
    }

    pub fn residual(&self) -> T {
        self.residual
    }

    /// Copy with a different characteristic value and unchanged weights.
    pub fn with_q0(&self, q0: T) -> Self {
        Self { q0, ..self.clone() }
    }

    /// Copy whose `Γ(s, t)` entry alone is multiplied by `factor`; breaks the
    /// cocycle identity on purpose.
    pub fn with_corrupted_gamma(&self, s: StateId, t: StateId, factor: T) -> Self {
        let mut out = self.clone();
        out.gamma[s][t] = out.gamma[s][t] * factor;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri_net::{parse_net, DEFAULT_MAX_STATES};
    use crate::reference::REFERENCE_NET_JSON;
    use crate::trace_monoid::DEFAULT_MAX_CLIQUES;

    fn reference() -> AsyncSystem {
        let net = parse_net(REFERENCE_NET_JSON).unwrap();
        let g = net.reachability_graph(DEFAULT_MAX_STATES).unwrap();
        AsyncSystem::from_net(&net, &g, DEFAULT_MAX_CLIQUES).unwrap()
    }

    fn one_state(letters: &[&str], pairs: &[(&str, &str)]) -> AsyncSystem {
        let m = TraceMonoid::from_names(letters, pairs).unwrap();
        let row = vec![Some(0); m.size()];
        AsyncSystem::from_table(m, vec!["S".into()], vec![row], DEFAULT_MAX_CLIQUES).unwrap()
    }

    #[test]
    fn reference_action_table() {
        let sys = reference();
        let m = sys.monoid();
        let row = |s: StateId| -> Vec<Option<StateId>> {
            ["a", "b", "c", "d", "e"]
                .iter()
                .map(|l| sys.act_letter(s, m.letter(l).unwrap()))
                .collect()
        };
        assert_eq!(row(0), vec![Some(0), Some(1), None, Some(0), Some(0)]);
        assert_eq!(row(1), vec![None, None, Some(0), Some(1), Some(1)]);
    }

    #[test]
    fn acting_traces() {
        let sys = reference();
        let m = sys.monoid();
        for s in 0..2 {
            assert_eq!(sys.act(s, &Trace::empty()), Some(s));
        }
        assert_eq!(sys.act(0, &m.normalize_str("adebc").unwrap()), Some(0));
        assert_eq!(sys.act(0, &m.normalize_str("bc").unwrap()), Some(0));
        assert_eq!(sys.act(0, &m.normalize_str("c").unwrap()), None);
        // the sink absorbs
        assert_eq!(sys.act(0, &m.normalize_str("cb").unwrap()), None);
    }

    #[test]
    fn irreducibility() {
        assert!(reference().is_irreducible());
        let m = TraceMonoid::from_names(&["x"], &[]).unwrap();
        let dead = AsyncSystem::from_table(
            m.clone(),
            vec!["A".into(), "B".into()],
            vec![vec![Some(1)], vec![None]],
            100,
        )
        .unwrap();
        assert!(!dead.is_irreducible());
        let split = AsyncSystem::from_table(
            m,
            vec!["A".into(), "B".into()],
            vec![vec![Some(0)], vec![Some(1)]],
            100,
        )
        .unwrap();
        assert!(!split.is_irreducible());
        assert_eq!(split.characteristic_root(1e-12), Err(Error::NotIrreducible));
    }

    #[test]
    fn ill_defined_action_is_rejected() {
        let m = TraceMonoid::from_names(&["x", "y"], &[("x", "y")]).unwrap();
        let r = AsyncSystem::from_table(
            m,
            vec!["A".into(), "B".into()],
            vec![vec![Some(1), Some(0)], vec![Some(1), None]],
            100,
        );
        assert!(matches!(r, Err(Error::IllDefinedAction { .. })));
    }

    #[test]
    fn reference_mobius_matrix_and_theta() {
        let sys = reference();
        let p = Polynomial::<BigInt>::from_i64;
        let expect = PolyMatrix::from_rows(vec![
            vec![p(&[1, -3, 2]), p(&[0, -1, 2])],
            vec![p(&[0, -1, 1]), p(&[1, -2])],
        ]);
        assert_eq!(sys.mobius_matrix(), expect);
        assert_eq!(sys.theta_polynomial(), p(&[1, -5, 7, -1, -2]));
    }

    #[test]
    fn one_state_systems() {
        let free = one_state(&["x", "y", "z"], &[]);
        assert_eq!(free.theta_polynomial(), Polynomial::from_i64(&[1, -3]));
        let q = free.characteristic_root(1e-12).unwrap();
        assert!((q.value() - 1.0 / 3.0).abs() < 1e-12);
        assert!(!q.degenerate);
        let loop1 = one_state(&["x"], &[]);
        assert_eq!(
            loop1.mobius_matrix().get(0, 0),
            &Polynomial::from_i64(&[1, -1])
        );
        let parallel = one_state(&["x", "y"], &[("x", "y")]);
        assert_eq!(
            parallel.theta_polynomial(),
            Polynomial::from_i64(&[1, -2, 1])
        );
        let q = parallel.characteristic_root(1e-12).unwrap();
        assert!(q.degenerate);
        assert_eq!(q.value(), 1.0);
    }

    #[test]
    fn theta_at_zero_is_one() {
        for sys in [reference(), one_state(&["x", "y"], &[])] {
            assert_eq!(sys.theta_polynomial().coeff(0), BigInt::from(1));
        }
    }

    #[test]
    fn growth_coefficients_of_reference() {
        let sys = reference();
        let g = sys.growth_matrix_coefficients(4, 10).unwrap();
        let as_i64 = |v: &Vec<BigInt>| {
            v.iter()
                .map(|c| i64::try_from(c).unwrap())
                .collect::<Vec<_>>()
        };
        // frozen from brute-force enumeration of words
        assert_eq!(as_i64(&g[0][0]), vec![1, 3, 8, 20, 49]);
        assert_eq!(as_i64(&g[0][1]), vec![0, 1, 3, 8, 20]);
        assert_eq!(as_i64(&g[1][0]), vec![0, 1, 4, 13, 38]);
        assert_eq!(as_i64(&g[1][1]), vec![1, 2, 5, 12, 29]);
        assert!(matches!(
            sys.growth_matrix_coefficients(11, 10),
            Err(Error::Cap { .. })
        ));
    }

    #[test]
    fn growth_matrix_inverts_mobius_matrix() {
        let sys = reference();
        let order = 11;
        let g = sys.growth_matrix(order - 1, 10).unwrap();
        let prod = g.mul_truncated(&sys.mobius_matrix(), order);
        assert_eq!(prod, PolyMatrix::identity(2));
    }

    #[test]
    fn reference_cocycle() {
        let sys = reference();
        let q0 = sys.characteristic_root(1e-12).unwrap();
        assert!((q0.value() - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        let c: Cocycle<f64> = sys.cocycle(&q0, 1e-9).unwrap();
        assert!((c.gamma(0, 1) - 2f64.sqrt()).abs() < 1e-9);
        assert!((c.gamma(1, 0) - 1.0 / 2f64.sqrt()).abs() < 1e-9);
        for s in 0..2 {
            assert_eq!(c.gamma(s, s), 1.0);
        }
        // closed-form value of Γ(M0, M1) at the computed root
        let q = c.q0();
        let lambda = (-1.0 + 3.0 * q) / (1.0 - 2.0 * q);
        assert!((lambda - c.weights()[1]).abs() < 1e-9);
        assert!(c.residual() <= 1e-9);
    }

    #[test]
    fn single_precision_cocycle() {
        let sys = reference();
        let q0 = sys.characteristic_root(1e-9).unwrap();
        let c: Cocycle<f32> = sys.cocycle(&q0, 1e-5).unwrap();
        assert!((c.gamma(0, 1) - std::f32::consts::SQRT_2).abs() < 1e-5);
    }
}
