//! Uniform measure on infinite traces: cylinder values, the law of the first
//! normal-form clique, and an inclusion–exclusion oracle for the probability
//! of a given sequence of leading cliques.

use std::collections::HashSet;

use crate::async_system::{AsyncSystem, Cocycle, StateId};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::trace_monoid::{Clique, Trace};

pub const DEFAULT_PROBABILITY_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_ORACLE_DEPTH: usize = 3;
pub const DEFAULT_ORACLE_GENERATORS: usize = 20;
pub const DEFAULT_ORACLE_TERMS: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_depth: usize,
    pub max_generators: usize,
    pub max_terms: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_depth: DEFAULT_ORACLE_DEPTH,
            max_generators: DEFAULT_ORACLE_GENERATORS,
            max_terms: DEFAULT_ORACLE_TERMS,
        }
    }
}

#[derive(Clone, Debug)]
pub struct UniformMeasure<T> {
    system: AsyncSystem,
    cocycle: Cocycle<T>,
    tolerance: T,
    dust: T,
}

/// Law of the first clique from a fixed state, aligned with
/// [`AsyncSystem::cliques`].
#[derive(Clone, Debug, PartialEq)]
pub struct FirstCliqueLaw<T> {
    pub state: StateId,
    pub weights: Vec<T>,
}

impl<T: Scalar> FirstCliqueLaw<T> {
    pub fn total(&self) -> T {
        self.weights.iter().copied().sum()
    }
}

impl<T: Scalar> UniformMeasure<T> {
    /// Weights whose magnitude stays under the dust level are treated as
    /// zero; it is the larger of 1e-12 and ten times the width of the root
    /// enclosure.
    pub fn new(system: AsyncSystem, cocycle: Cocycle<T>) -> Self {
        let dust = T::of(1e-12)
            .max(T::of(10.0 * cocycle.root().width()))
            .max(T::epsilon() * T::of(1e4));
        Self {
            system,
            cocycle,
            tolerance: T::of(DEFAULT_PROBABILITY_TOLERANCE),
            dust,
        }
    }

    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn system(&self) -> &AsyncSystem {
        &self.system
    }

    pub fn cocycle(&self) -> &Cocycle<T> {
        &self.cocycle
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    pub fn dust(&self) -> T {
        self.dust
    }

    /// `q0^|x| Γ(s, s·x)`, or zero when `x` is disabled at `s`.
    pub fn cylinder_probability(&self, s: StateId, x: &Trace) -> T {
        match self.system.act(s, x) {
            Some(t) => self.cocycle.q0().powi(x.len() as i32) * self.cocycle.gamma(s, t),
            None => T::zero(),
        }
    }

    fn clique_cylinder(&self, s: StateId, c: &Clique) -> T {
        match self.system.act_clique(s, c) {
            Some(t) => self.cocycle.q0().powi(c.len() as i32) * self.cocycle.gamma(s, t),
            None => T::zero(),
        }
    }

    /// Möbius inversion over super-cliques, without any sign or total check.
    pub fn first_clique_weights(&self, s: StateId) -> Vec<T> {
        let cliques = self.system.cliques();
        cliques
            .iter()
            .map(|g| {
                cliques
                    .iter()
                    .filter(|sup| g.is_subset(sup))
                    .map(|sup| {
                        let v = self.clique_cylinder(s, sup);
                        if (sup.len() - g.len()) % 2 == 0 {
                            v
                        } else {
                            -v
                        }
                    })
                    .sum()
            })
            .collect()
    }

    /// Law of the first clique under the measure started at `s`.
    pub fn first_clique_law(&self, s: StateId) -> Result<FirstCliqueLaw<T>> {
        let mut weights = self.first_clique_weights(s);
        for (w, c) in weights.iter_mut().zip(self.system.cliques()) {
            if w.abs() <= self.dust {
                *w = T::zero();
            } else if *w < T::zero() {
                return Err(Error::NegativeWeight {
                    state: self.system.state_label(s).into(),
                    clique: self.system.monoid().clique_name(c),
                    weight: w.as_f64(),
                });
            }
        }
        let law = FirstCliqueLaw { state: s, weights };
        let total = law.total();
        if (total - T::one()).abs() > self.tolerance {
            return Err(Error::Invalid(format!(
                "first-clique law at {} sums to {}",
                self.system.state_label(s),
                total
            )));
        }
        Ok(law)
    }

    /// Probability that the normal form of a random infinite trace started at
    /// `s` begins with exactly `prefix`.
    ///
    /// The event is the cylinder of the prefix minus the cylinders of every
    /// trace obtained by merging one extra letter into one of its cliques;
    /// the union is expanded by inclusion–exclusion, with intersections of
    /// cylinders given by least upper bounds.
    pub fn prefix_probability_oracle(
        &self,
        s: StateId,
        prefix: &[Clique],
        limits: OracleLimits,
    ) -> Result<T> {
        if prefix.len() > limits.max_depth {
            return Err(Error::Cap {
                what: "oracle depth",
                requested: prefix.len(),
                cap: limits.max_depth,
            });
        }
        let monoid = self.system.monoid();
        for w in prefix.windows(2) {
            if !monoid.is_normal_pair(&w[0], &w[1]) {
                return Err(Error::Invalid(
                    "prefix is not a normal clique sequence".into(),
                ));
            }
        }
        let word: Vec<_> = prefix
            .iter()
            .flat_map(|c| c.letters().iter().copied())
            .collect();
        let x = monoid.normalize(&word)?;
        let base = self.cylinder_probability(s, &x);
        if base == T::zero() {
            return Ok(T::zero());
        }

        let mut seen = HashSet::new();
        let mut generators = Vec::new();
        for (i, c) in prefix.iter().enumerate() {
            for a in 0..monoid.size() {
                if c.contains(a) || !c.letters().iter().all(|&b| monoid.independent(a, b)) {
                    continue;
                }
                let mut w = Vec::with_capacity(word.len() + 1);
                for (j, d) in prefix.iter().enumerate() {
                    w.extend_from_slice(d.letters());
                    if j == i {
                        w.push(a);
                    }
                }
                let y = monoid.normalize(&w)?;
                if let Some(z) = monoid.lub(&x, &y) {
                    if self.system.act(s, &z).is_some() && seen.insert(z.clone()) {
                        generators.push(z);
                    }
                }
            }
        }
        if generators.len() > limits.max_generators {
            return Err(Error::Cap {
                what: "oracle generator count",
                requested: generators.len(),
                cap: limits.max_generators,
            });
        }

        struct Search<'a, T> {
            um: &'a UniformMeasure<T>,
            s: StateId,
            generators: &'a [Trace],
            terms: usize,
            max_terms: usize,
        }
        impl<T: Scalar> Search<'_, T> {
            // signed sum over non-empty subsets of generators[start..] joined with `current`
            fn expand(&mut self, start: usize, current: &Trace, sign: T) -> Result<T> {
                let monoid = self.um.system.monoid();
                let mut total = T::zero();
                for j in start..self.generators.len() {
                    let Some(z) = monoid.lub(current, &self.generators[j]) else {
                        continue;
                    };
                    // a disabled bound stays disabled for every larger subset
                    if self.um.system.act(self.s, &z).is_none() {
                        continue;
                    }
                    self.terms += 1;
                    if self.terms > self.max_terms {
                        return Err(Error::Cap {
                            what: "oracle term count",
                            requested: self.terms,
                            cap: self.max_terms,
                        });
                    }
                    total = total + sign * self.um.cylinder_probability(self.s, &z);
                    total = total + self.expand(j + 1, &z, -sign)?;
                }
                Ok(total)
            }
        }
        let mut search = Search {
            um: self,
            s,
            generators: &generators,
            terms: 0,
            max_terms: limits.max_terms,
        };
        Ok(base + search.expand(0, &x, -T::one())?)
    }
}
