//! Markov chain of states-and-cliques and seeded sampling of executions.
//!
//! A chain state is a pair `(s, γ)` where `γ` is the clique just fired and
//! `s` the state reached after firing it. From `(s, γ)` the next clique is
//! drawn from the first-clique law at `s` restricted to the cliques that may
//! follow `γ` in normal form, renormalized.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::async_system::StateId;
use crate::error::{Error, Result};
use crate::measure::{FirstCliqueLaw, OracleLimits, UniformMeasure};
use crate::scalar::Scalar;
use crate::trace_monoid::{Clique, Letter};

pub const MIN_VALIDATION_RUNS: usize = 1000;
pub const DEFAULT_VALIDATION_RUNS: usize = 100_000;
pub const Z_THRESHOLD: f64 = 4.0;

pub type Pair = (StateId, Clique);

#[derive(Clone, Debug, PartialEq)]
pub struct CliqueChain<T> {
    start: StateId,
    pairs: Vec<Pair>,
    initial: Vec<T>,
    /// sparse rows, columns ascending
    rows: Vec<Vec<(usize, T)>>,
}

/// Law of the first pair: `(s0·γ, γ) ↦ κ_{s0}(γ)`, over cliques of positive weight.
pub fn initial_law<T: Scalar>(um: &UniformMeasure<T>, s0: StateId) -> Result<Vec<(Pair, T)>> {
    let law = um.first_clique_law(s0)?;
    let sys = um.system();
    Ok(sys
        .cliques()
        .iter()
        .zip(&law.weights)
        .filter(|(_, &w)| w > T::zero())
        .map(|(c, &w)| {
            let t = sys
                .act_clique(s0, c)
                .expect("positive weight implies enabled");
            ((t, c.clone()), w)
        })
        .collect())
}

pub fn build_chain<T: Scalar>(um: &UniformMeasure<T>, s0: StateId) -> Result<CliqueChain<T>> {
    // at q0 = 1 the measure exists only if every first-clique law does
    let q0 = um.cocycle().q0();
    if q0 > T::one() {
        return Err(Error::DegenerateRoot);
    }
    let degenerate = q0 == T::one();
    let sys = um.system();
    let monoid = sys.monoid();
    let cliques = sys.cliques();
    let mut laws: HashMap<StateId, FirstCliqueLaw<T>> = HashMap::new();
    let mut law_at = |s: StateId| -> Result<FirstCliqueLaw<T>> {
        if let Some(l) = laws.get(&s) {
            return Ok(l.clone());
        }
        let l =
            um.first_clique_law(s)
                .map_err(|e| if degenerate { Error::DegenerateRoot } else { e })?;
        laws.insert(s, l.clone());
        Ok(l)
    };

    // pairs keyed by (state, clique index) during discovery
    let mut index: HashMap<(StateId, usize), usize> = HashMap::new();
    let mut found: Vec<(StateId, usize)> = Vec::new();
    let mut initial_raw: Vec<((StateId, usize), T)> = Vec::new();
    let mut queue = VecDeque::new();
    for ((t, c), w) in
        initial_law(um, s0).map_err(|e| if degenerate { Error::DegenerateRoot } else { e })?
    {
        let key = (t, sys.clique_index(&c).expect("known clique"));
        initial_raw.push((key, w));
        if let Entry::Vacant(v) = index.entry(key) {
            v.insert(found.len());
            found.push(key);
            queue.push_back(key);
        }
    }
    type Key = (StateId, usize);
    let mut raw_rows: HashMap<Key, Vec<(Key, T)>> = HashMap::new();
    while let Some((t, g)) = queue.pop_front() {
        let law = law_at(t)?;
        let admissible: Vec<usize> = (0..cliques.len())
            .filter(|&j| {
                law.weights[j] > T::zero() && monoid.is_normal_pair(&cliques[g], &cliques[j])
            })
            .collect();
        let mass: T = admissible.iter().map(|&j| law.weights[j]).sum();
        if mass <= T::zero() {
            return Err(Error::ZeroContinuation {
                state: sys.state_label(t).into(),
                clique: monoid.clique_name(&cliques[g]),
            });
        }
        let mut row = Vec::with_capacity(admissible.len());
        for j in admissible {
            let u = sys
                .act_clique(t, &cliques[j])
                .expect("positive weight implies enabled");
            let key = (u, j);
            if let Entry::Vacant(v) = index.entry(key) {
                v.insert(found.len());
                found.push(key);
                queue.push_back(key);
            }
            row.push((key, law.weights[j] / mass));
        }
        raw_rows.insert((t, g), row);
    }

    // canonical order: state, then clique order
    found.sort();
    let position: HashMap<(StateId, usize), usize> =
        found.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let mut initial = vec![T::zero(); found.len()];
    for (k, w) in initial_raw {
        initial[position[&k]] = w;
    }
    let rows = found
        .iter()
        .map(|k| {
            let mut r: Vec<(usize, T)> = raw_rows[k]
                .iter()
                .map(|(to, v)| (position[to], *v))
                .collect();
            r.sort_by_key(|e| e.0);
            r
        })
        .collect();
    Ok(CliqueChain {
        start: s0,
        pairs: found
            .into_iter()
            .map(|(s, j)| (s, cliques[j].clone()))
            .collect(),
        initial,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Lumping<T> {
    /// aggregated transition matrix between groups
    Lumpable { matrix: Vec<Vec<T>> },
    /// every pair of rows of one group whose next-group masses disagree;
    /// `aggregated[g]` is set for groups whose rows all agree
    NotLumpable {
        conflicts: Vec<(usize, usize)>,
        aggregated: Vec<Option<Vec<T>>>,
    },
}

/// Strong lumpability of a dense row-stochastic matrix under a grouping of
/// its rows (and columns).
pub fn lumping_check_dense<T: Scalar>(
    rows: &[Vec<T>],
    group_of: &[usize],
    groups: usize,
    tol: f64,
) -> Lumping<T> {
    let masses: Vec<Vec<T>> = rows
        .iter()
        .map(|r| {
            let mut m = vec![T::zero(); groups];
            for (j, &v) in r.iter().enumerate() {
                m[group_of[j]] = m[group_of[j]] + v;
            }
            m
        })
        .collect();
    let tol = T::of(tol);
    let mut conflicts = Vec::new();
    let mut aggregated: Vec<Option<Vec<T>>> = vec![None; groups];
    for g in 0..groups {
        let members: Vec<usize> = (0..rows.len()).filter(|&i| group_of[i] == g).collect();
        let mut consistent = true;
        for (k, &i) in members.iter().enumerate() {
            for &j in &members[k + 1..] {
                let differs = masses[i]
                    .iter()
                    .zip(&masses[j])
                    .any(|(a, b)| (*a - *b).abs() > tol);
                if differs {
                    conflicts.push((i, j));
                    consistent = false;
                }
            }
        }
        if consistent {
            aggregated[g] = members.first().map(|&i| masses[i].clone());
        }
    }
    if conflicts.is_empty() {
        Lumping::Lumpable {
            matrix: aggregated
                .into_iter()
                .map(|r| r.unwrap_or_else(|| vec![T::zero(); groups]))
                .collect(),
        }
    } else {
        Lumping::NotLumpable {
            conflicts,
            aggregated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub clique: Vec<Letter>,
    pub state: StateId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionSample {
    pub seed: u64,
    pub run: u64,
    pub start: StateId,
    pub steps: Vec<(Clique, StateId)>,
}

impl ExecutionSample {
    /// Firing sequence obtained by firing each clique's letters in order.
    pub fn linearization(&self) -> Vec<Letter> {
        self.steps
            .iter()
            .flat_map(|(c, _)| c.letters().iter().copied())
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OracleConditional<T> {
    pub predecessor: StateId,
    pub oracle: T,
}

/// Inverse-CDF draw over `(index, weight)` entries in canonical order.
fn draw<T: Scalar>(
    rng: &mut ChaCha8Rng,
    entries: impl Iterator<Item = (usize, T)> + Clone,
) -> usize {
    let u = T::of(rng.gen::<f64>());
    let mut acc = T::zero();
    let mut last = None;
    for (i, w) in entries {
        if w <= T::zero() {
            continue;
        }
        acc = acc + w;
        last = Some(i);
        if u < acc {
            return i;
        }
    }
    last.expect("row with positive mass")
}

impl<T: Scalar> CliqueChain<T> {
    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn position(&self, state: StateId, clique: &Clique) -> Option<usize> {
        self.pairs
            .iter()
            .position(|(s, c)| *s == state && c == clique)
    }

    pub fn initial(&self) -> &[T] {
        &self.initial
    }

    pub fn row(&self, i: usize) -> &[(usize, T)] {
        &self.rows[i]
    }

    pub fn transition(&self, from: usize, to: usize) -> T {
        self.rows[from]
            .iter()
            .find(|e| e.0 == to)
            .map_or(T::zero(), |e| e.1)
    }

    pub fn dense_matrix(&self) -> Vec<Vec<T>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![T::zero(); self.pairs.len()];
                for &(j, v) in r {
                    d[j] = v;
                }
                d
            })
            .collect()
    }

    /// Row sums within `tol` of one and support restricted to normal
    /// successors reached through the action.
    pub fn check_rows(&self, um: &UniformMeasure<T>, tol: f64) -> Result<()> {
        let sys = um.system();
        let monoid = sys.monoid();
        for (i, row) in self.rows.iter().enumerate() {
            let sum: T = row.iter().map(|e| e.1).sum();
            let (s, g) = &self.pairs[i];
            let label = || format!("({},{})", sys.state_label(*s), monoid.clique_name(g));
            if (sum - T::one()).abs().as_f64() > tol {
                return Err(Error::Invalid(format!("row {} sums to {}", label(), sum)));
            }
            for &(j, v) in row {
                let (u, h) = &self.pairs[j];
                if v < T::zero()
                    || (v > T::zero()
                        && (!monoid.is_normal_pair(g, h) || sys.act_clique(*s, h) != Some(*u)))
                {
                    return Err(Error::Invalid(format!("invalid entry in row {}", label())));
                }
            }
        }
        Ok(())
    }

    pub fn lumping_check(&self, state_count: usize, tol: f64) -> Lumping<T> {
        let groups: Vec<usize> = self.pairs.iter().map(|p| p.0).collect();
        lumping_check_dense(&self.dense_matrix(), &groups, state_count, tol)
    }

    /// `P(C2 = γ' | C1 = γ)` from the prefix oracle, started at the first
    /// state `p` with `p·γ` equal to the row's state and positive `P(C1 = γ)`.
    pub fn oracle_conditional(
        &self,
        um: &UniformMeasure<T>,
        from: usize,
        to: usize,
    ) -> Result<Option<OracleConditional<T>>> {
        let sys = um.system();
        let (t, g) = &self.pairs[from];
        let (_, h) = &self.pairs[to];
        let limits = OracleLimits::default();
        for p in 0..sys.state_count() {
            if sys.act_clique(p, g) != Some(*t) {
                continue;
            }
            let first = um.prefix_probability_oracle(p, std::slice::from_ref(g), limits)?;
            if first <= um.dust() {
                continue;
            }
            let both = um.prefix_probability_oracle(p, &[g.clone(), h.clone()], limits)?;
            return Ok(Some(OracleConditional {
                predecessor: p,
                oracle: both / first,
            }));
        }
        Ok(None)
    }

    /// One execution of `steps` cliques on the substream `run` of `seed`.
    pub fn sample_run(&self, steps: usize, seed: u64, run: u64) -> Result<ExecutionSample> {
        if steps == 0 {
            return Err(Error::EmptyRequest("at least one step is required"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(run);
        let mut cur = draw(&mut rng, self.initial.iter().copied().enumerate());
        let mut out = Vec::with_capacity(steps);
        out.push(self.pairs[cur].clone());
        for _ in 1..steps {
            cur = draw(&mut rng, self.rows[cur].iter().copied());
            out.push(self.pairs[cur].clone());
        }
        Ok(ExecutionSample {
            seed,
            run,
            start: self.start,
            steps: out.into_iter().map(|(s, c)| (c, s)).collect(),
        })
    }

    pub fn sample_execution(&self, steps: usize, seed: u64) -> Result<ExecutionSample> {
        self.sample_run(steps, seed, 0)
    }

    /// Runs `0..runs`, each on its own substream; the result does not depend
    /// on how the runs are scheduled.
    pub fn sample_runs(
        &self,
        runs: usize,
        steps: usize,
        seed: u64,
    ) -> Result<Vec<ExecutionSample>> {
        (0..runs as u64)
            .into_par_iter()
            .map(|r| self.sample_run(steps, seed, r))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationCell {
    pub prefix: Vec<String>,
    pub expected: f64,
    pub observed: u64,
    pub frequency: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub runs: usize,
    pub steps: usize,
    pub seed: u64,
    pub threshold: f64,
    pub depth1: Vec<ValidationCell>,
    pub depth2: Vec<ValidationCell>,
    pub max_abs_z: f64,
    pub cells: usize,
    /// union bound on the chance of a spurious failure across all cells
    pub family_false_alarm_bound: f64,
    pub pass: bool,
}

fn cell(prefix: Vec<String>, expected: f64, observed: u64, n: usize) -> ValidationCell {
    let n_f = n as f64;
    let freq = observed as f64 / n_f;
    let z = if expected <= 0.0 {
        if observed == 0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else if expected >= 1.0 {
        if observed as usize == n {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (freq - expected) / (expected * (1.0 - expected) / n_f).sqrt()
    };
    ValidationCell {
        prefix,
        expected,
        observed,
        frequency: freq,
        z,
        pass: z.abs() < Z_THRESHOLD,
    }
}

/// Compares empirical frequencies of the first clique and of the first two
/// cliques against the measure, cell by cell, at four standard deviations.
pub fn empirical_validation<T: Scalar>(
    chain: &CliqueChain<T>,
    um: &UniformMeasure<T>,
    runs: usize,
    steps: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if runs < MIN_VALIDATION_RUNS {
        return Err(Error::TooFewRuns {
            min: MIN_VALIDATION_RUNS,
            got: runs,
        });
    }
    let sys = um.system();
    let monoid = sys.monoid();
    let cliques = sys.cliques();
    let s0 = chain.start();
    let firsts: Vec<(usize, Option<usize>)> = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let sample = chain.sample_run(steps, seed, r)?;
            let idx = |k: usize| {
                sample
                    .steps
                    .get(k)
                    .map(|(c, _)| sys.clique_index(c).expect("known clique"))
            };
            Ok((idx(0).expect("non-empty sample"), idx(1)))
        })
        .collect::<Result<_>>()?;
    let mut one: BTreeMap<usize, u64> = BTreeMap::new();
    let mut two: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for &(a, b) in &firsts {
        *one.entry(a).or_default() += 1;
        if let Some(b) = b {
            *two.entry((a, b)).or_default() += 1;
        }
    }
    let name = |i: usize| monoid.clique_name(&cliques[i]);
    let weights = um.first_clique_weights(s0);
    let depth1: Vec<ValidationCell> = (0..cliques.len())
        .map(|i| {
            cell(
                vec![name(i)],
                weights[i].as_f64(),
                one.get(&i).copied().unwrap_or(0),
                runs,
            )
        })
        .collect();
    let mut depth2 = Vec::new();
    if steps >= 2 {
        let limits = OracleLimits::default();
        for i in 0..cliques.len() {
            for j in 0..cliques.len() {
                if !monoid.is_normal_pair(&cliques[i], &cliques[j]) {
                    continue;
                }
                let observed = two.get(&(i, j)).copied().unwrap_or(0);
                let p = um.prefix_probability_oracle(
                    s0,
                    &[cliques[i].clone(), cliques[j].clone()],
                    limits,
                )?;
                depth2.push(cell(vec![name(i), name(j)], p.as_f64(), observed, runs));
            }
        }
    }
    let max_abs_z = depth1
        .iter()
        .chain(&depth2)
        .map(|c| c.z.abs())
        .fold(0.0, f64::max);
    let cells = depth1.len() + depth2.len();
    // two-sided tail of the standard normal beyond 4
    let tail = 6.334e-5;
    Ok(ValidationReport {
        runs,
        steps,
        seed,
        threshold: Z_THRESHOLD,
        pass: depth1.iter().chain(&depth2).all(|c| c.pass),
        depth1,
        depth2,
        max_abs_z,
        cells,
        family_false_alarm_bound: (cells as f64 * tail).min(1.0),
    })
}
