//! Trace monoids over a finite alphabet with an independence relation.
//!
//! Traces are stored in Cartier–Foata normal form: a sequence of cliques in
//! which every letter of a clique is blocked by some letter of the clique
//! before it.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

pub type Letter = usize;

pub const DEFAULT_MAX_CLIQUES: usize = 1 << 16;
pub const DEFAULT_MAX_TRACE_LENGTH: usize = 10;

/// Non-empty set of pairwise independent letters, kept sorted.
///
/// Cliques order by size first, then lexicographically by letter index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clique(Vec<Letter>);

impl Clique {
    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: Letter) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    pub fn is_subset(&self, other: &Clique) -> bool {
        self.0.iter().all(|a| other.contains(*a))
    }
}

impl Ord for Clique {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Clique {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Trace {
    cliques: Vec<Clique>,
}

impl Trace {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn cliques(&self) -> &[Clique] {
        &self.cliques
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.cliques.iter().map(Clique::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn height(&self) -> usize {
        self.cliques.len()
    }

    /// Clique-by-clique linearization.
    pub fn word(&self) -> Vec<Letter> {
        self.cliques
            .iter()
            .flat_map(|c| c.0.iter().copied())
            .collect()
    }
}

impl From<Clique> for Trace {
    fn from(c: Clique) -> Self {
        Self { cliques: vec![c] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceMonoid {
    letters: Vec<String>,
    independent: Vec<Vec<bool>>,
}

impl TraceMonoid {
    pub fn new(letters: Vec<String>, pairs: &[(Letter, Letter)]) -> Result<Self> {
        let n = letters.len();
        let mut independent = vec![vec![false; n]; n];
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(Error::UnknownLetter(format!("#{}", a.max(b))));
            }
            if a == b {
                return Err(Error::Reflexive(letters[a].clone()));
            }
            independent[a][b] = true;
            independent[b][a] = true;
        }
        Ok(Self {
            letters,
            independent,
        })
    }

    /// Builds a monoid from letter names and independent name pairs.
    pub fn from_names(letters: &[&str], pairs: &[(&str, &str)]) -> Result<Self> {
        let names: Vec<String> = letters.iter().map(|s| s.to_string()).collect();
        let idx = |s: &str| {
            names
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| Error::UnknownLetter(s.to_string()))
        };
        let pairs = pairs
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, &pairs)
    }

    pub fn size(&self) -> usize {
        self.letters.len()
    }

    pub fn letter_names(&self) -> &[String] {
        &self.letters
    }

    pub fn letter_name(&self, a: Letter) -> &str {
        &self.letters[a]
    }

    pub fn letter(&self, name: &str) -> Result<Letter> {
        self.letters
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }

    /// Letters of `word`; whitespace-separated names, or one character per
    /// letter when the string has no whitespace.
    pub fn word(&self, word: &str) -> Result<Vec<Letter>> {
        if word.contains(char::is_whitespace) {
            word.split_whitespace().map(|n| self.letter(n)).collect()
        } else {
            word.chars().map(|c| self.letter(&c.to_string())).collect()
        }
    }

    pub fn independent(&self, a: Letter, b: Letter) -> bool {
        self.independent[a][b]
    }

    pub fn independent_pairs(&self) -> Vec<(Letter, Letter)> {
        let n = self.size();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|&(a, b)| self.independent[a][b])
            .collect()
    }

    pub fn clique(&self, letters: &[Letter]) -> Result<Clique> {
        let mut v = letters.to_vec();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(Error::Invalid("a clique is non-empty".into()));
        }
        for (i, &a) in v.iter().enumerate() {
            if a >= self.size() {
                return Err(Error::UnknownLetter(format!("#{a}")));
            }
            for &b in &v[i + 1..] {
                if !self.independent(a, b) {
                    return Err(Error::NotIndependent(
                        self.letters[a].clone(),
                        self.letters[b].clone(),
                    ));
                }
            }
        }
        Ok(Clique(v))
    }

    pub fn clique_named(&self, word: &str) -> Result<Clique> {
        self.clique(&self.word(word)?)
    }

    pub fn clique_name(&self, c: &Clique) -> String {
        c.0.iter().map(|&a| self.letters[a].as_str()).collect()
    }

    /// All non-empty cliques in canonical order.
    pub fn cliques(&self, cap: usize) -> Result<Vec<Clique>> {
        fn extend(
            m: &TraceMonoid,
            current: &mut Vec<Letter>,
            candidates: &[Letter],
            out: &mut Vec<Clique>,
            cap: usize,
        ) -> Result<()> {
            for (i, &a) in candidates.iter().enumerate() {
                current.push(a);
                if out.len() >= cap {
                    return Err(Error::CliqueLimit(cap));
                }
                out.push(Clique(current.clone()));
                let next: Vec<Letter> = candidates[i + 1..]
                    .iter()
                    .copied()
                    .filter(|&b| m.independent(a, b))
                    .collect();
                extend(m, current, &next, out, cap)?;
                current.pop();
            }
            Ok(())
        }
        let mut out = Vec::new();
        let all: Vec<Letter> = (0..self.size()).collect();
        extend(self, &mut Vec::new(), &all, &mut out, cap)?;
        out.sort();
        Ok(out)
    }

    /// `first → second`: every letter of `second` is blocked by a letter of
    /// `first`.
    pub fn is_normal_pair(&self, first: &Clique, second: &Clique) -> bool {
        second
            .0
            .iter()
            .all(|&b| first.0.iter().any(|&a| !self.independent(a, b)))
    }

    /// Cartier–Foata normal form of a word.
    pub fn normalize(&self, word: &[Letter]) -> Result<Trace> {
        let mut levels: Vec<Vec<Letter>> = Vec::new();
        for &a in word {
            if a >= self.size() {
                return Err(Error::UnknownLetter(format!("#{a}")));
            }
            let mut level = 0;
            for (i, l) in levels.iter().enumerate().rev() {
                if l.iter().any(|&b| b == a || !self.independent(a, b)) {
                    level = i + 1;
                    break;
                }
            }
            if level == levels.len() {
                levels.push(Vec::new());
            }
            levels[level].push(a);
        }
        Ok(Trace {
            cliques: levels
                .into_iter()
                .map(|mut l| {
                    l.sort_unstable();
                    Clique(l)
                })
                .collect(),
        })
    }

    pub fn normalize_str(&self, word: &str) -> Result<Trace> {
        self.normalize(&self.word(word)?)
    }

    pub fn trace_equal(&self, w1: &[Letter], w2: &[Letter]) -> Result<bool> {
        Ok(self.normalize(w1)? == self.normalize(w2)?)
    }

    pub fn concat(&self, x: &Trace, y: &Trace) -> Trace {
        let mut w = x.word();
        w.extend(y.word());
        self.normalize(&w).expect("letters of valid traces")
    }

    /// `x ≤ xi` in the prefix order: removes minimal letters of `xi` one by one
    /// following a linearization of `x`.
    pub fn is_prefix(&self, x: &Trace, xi: &Trace) -> bool {
        let mut rest = xi.word();
        for a in x.word() {
            let Some(pos) = rest.iter().position(|&b| b == a) else {
                return false;
            };
            if rest[..pos].iter().any(|&b| !self.independent(a, b)) {
                return false;
            }
            rest.remove(pos);
        }
        true
    }

    fn project(&self, word: &[Letter], a: Letter, b: Letter) -> Vec<Letter> {
        word.iter().copied().filter(|&c| c == a || c == b).collect()
    }

    /// Least upper bound in the prefix order, `None` when `x` and `y` have no
    /// common upper bound.
    ///
    /// Two traces are bounded iff their projections onto every pair of
    /// dependent letters (and every single letter) are prefix-comparable; the
    /// bound is rebuilt from the longer projections.
    pub fn lub(&self, x: &Trace, y: &Trace) -> Option<Trace> {
        let (wx, wy) = (x.word(), y.word());
        let n = self.size();
        // chosen projection for every dependent pair (a <= b)
        let mut proj: Vec<Vec<Option<Vec<Letter>>>> = vec![vec![None; n]; n];
        for a in 0..n {
            for b in a..n {
                if a != b && self.independent(a, b) {
                    continue;
                }
                let (px, py) = (self.project(&wx, a, b), self.project(&wy, a, b));
                let (short, long) = if px.len() <= py.len() {
                    (px, py)
                } else {
                    (py, px)
                };
                if long[..short.len()] != short[..] {
                    return None;
                }
                proj[a][b] = Some(long);
            }
        }
        let count: Vec<usize> = (0..n)
            .map(|a| proj[a][a].as_ref().map_or(0, Vec::len))
            .collect();
        let total: usize = count.iter().sum();
        let mut used = vec![0usize; n];
        let mut pos = vec![vec![0usize; n]; n];
        let mut word = Vec::with_capacity(total);
        while word.len() < total {
            let a = (0..n).find(|&a| {
                used[a] < count[a]
                    && (0..n).all(|b| {
                        if b != a && self.independent(a, b) {
                            return true;
                        }
                        let (lo, hi) = (a.min(b), a.max(b));
                        let p = proj[lo][hi].as_ref().expect("dependent pair projected");
                        p.get(pos[lo][hi]) == Some(&a)
                    })
            })?;
            for b in 0..n {
                if b == a || !self.independent(a, b) {
                    let (lo, hi) = (a.min(b), a.max(b));
                    pos[lo][hi] += 1;
                }
            }
            used[a] += 1;
            word.push(a);
        }
        let z = self.normalize(&word).expect("valid letters");
        debug_assert!(self.is_prefix(x, &z) && self.is_prefix(y, &z));
        Some(z)
    }

    pub fn mobius_polynomial(&self, cap: usize) -> Result<Polynomial<BigInt>> {
        Ok(mobius_from_cliques(&self.cliques(cap)?))
    }

    /// λ(0..=n): number of traces of each length, from `G(z) = 1/μ(z)`.
    pub fn growth_coefficients(&self, n: usize, cap: usize) -> Result<Vec<BigInt>> {
        Ok(self.mobius_polynomial(cap)?.series_inverse(n + 1))
    }

    /// Every trace with at most `n` letters, by depth-first search over normal
    /// clique sequences.
    pub fn enumerate_traces(&self, n: usize, max_length: usize, cap: usize) -> Result<Vec<Trace>> {
        let mut out = Vec::new();
        self.walk_traces(n, max_length, cap, |t| out.push(t.clone()))?;
        Ok(out)
    }

    /// Number of traces of each length `0..=n`, counted by the same search
    /// without materializing the traces.
    pub fn count_traces(&self, n: usize, max_length: usize, cap: usize) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; n + 1];
        self.walk_traces(n, max_length, cap, |t| counts[t.len()] += 1)?;
        Ok(counts)
    }

    fn walk_traces(
        &self,
        n: usize,
        max_length: usize,
        cap: usize,
        mut visit: impl FnMut(&Trace),
    ) -> Result<()> {
        if n > max_length {
            return Err(Error::Cap {
                what: "trace length",
                requested: n,
                cap: max_length,
            });
        }
        let cliques = self.cliques(cap)?;
        let successors: Vec<Vec<usize>> = cliques
            .iter()
            .map(|g| {
                (0..cliques.len())
                    .filter(|&j| self.is_normal_pair(g, &cliques[j]))
                    .collect()
            })
            .collect();
        let mut current = Trace::empty();
        visit(&current);
        fn dfs(
            cliques: &[Clique],
            successors: &[Vec<usize>],
            options: &[usize],
            budget: usize,
            current: &mut Trace,
            visit: &mut dyn FnMut(&Trace),
        ) {
            for &j in options {
                let c = &cliques[j];
                if c.len() > budget {
                    continue;
                }
                current.cliques.push(c.clone());
                visit(current);
                dfs(
                    cliques,
                    successors,
                    &successors[j],
                    budget - c.len(),
                    current,
                    visit,
                );
                current.cliques.pop();
            }
        }
        let all: Vec<usize> = (0..cliques.len()).collect();
        dfs(&cliques, &successors, &all, n, &mut current, &mut visit);
        Ok(())
    }

    /// Names of the letters of each clique, e.g. `[["a","d"],["b","e"],["c"]]`.
    pub fn trace_names(&self, x: &Trace) -> Vec<Vec<String>> {
        x.cliques
            .iter()
            .map(|c| c.0.iter().map(|&a| self.letters[a].clone()).collect())
            .collect()
    }

    pub fn display<'a>(&'a self, x: &'a Trace) -> TraceDisplay<'a> {
        TraceDisplay {
            monoid: self,
            trace: x,
        }
    }
}

/// `Σ_γ (−1)^|γ| z^|γ|` over the given non-empty cliques plus the empty one.
pub fn mobius_from_cliques(cliques: &[Clique]) -> Polynomial<BigInt> {
    let max = cliques.iter().map(Clique::len).max().unwrap_or(0);
    let mut coeffs = vec![BigInt::from(0); max + 1];
    coeffs[0] = BigInt::one();
    for c in cliques {
        let k = c.len();
        if k % 2 == 0 {
            coeffs[k] += 1;
        } else {
            coeffs[k] -= 1;
        }
    }
    Polynomial::new(coeffs)
}

pub struct TraceDisplay<'a> {
    monoid: &'a TraceMonoid,
    trace: &'a Trace,
}

impl fmt::Display for TraceDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trace.is_empty() {
            return write!(f, "ε");
        }
        for c in &self.trace.cliques {
            write!(f, "({})", self.monoid.clique_name(c))?;
        }
        Ok(())
    }
}
