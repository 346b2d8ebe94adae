//! Bundled reference net (two reachable markings, five transitions) together
//! with its published closed-form values, and a report comparing a derived
//! chain against the published transition matrix.
//!
//! Published entries are written as `a + b·√2` pairs.

use serde::Serialize;

use crate::chain::{lumping_check_dense, CliqueChain, Lumping};
use crate::measure::UniformMeasure;
use crate::petri_net::PetriNet;
use crate::scalar::Scalar;

pub const REFERENCE_NET_JSON: &str = include_str!("../fixtures/reference_net.json");

/// Closed form `a + b·√2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Surd(pub f64, pub f64);

impl Surd {
    pub fn value(self) -> f64 {
        self.0 + self.1 * std::f64::consts::SQRT_2
    }
}

const O: Surd = Surd(0.0, 0.0);

pub fn is_reference_net(net: &PetriNet) -> bool {
    let reference = crate::petri_net::parse_net(REFERENCE_NET_JSON).expect("bundled fixture");
    net.content_hash() == reference.content_hash()
}

/// Published first-clique law at the initial marking, in canonical clique
/// order `a b c d e ad ae bd be ce`.
pub const PUBLISHED_KAPPA: [(&str, Surd); 10] = [
    ("a", Surd(-7.0, 5.0)),
    ("b", Surd(10.0, -7.0)),
    ("c", O),
    ("d", O),
    ("e", O),
    ("ad", Surd(3.0, -2.0)),
    ("ae", Surd(3.0, -2.0)),
    ("bd", Surd(-4.0, 3.0)),
    ("be", Surd(-4.0, 3.0)),
    ("ce", O),
];

/// Row and column labels of the published transition matrix, as
/// `(marking after the clique, clique)`.
pub const PUBLISHED_PAIRS: [(&str, &str); 10] = [
    ("M0", "a"),
    ("M0", "c"),
    ("M0", "ad"),
    ("M0", "ae"),
    ("M0", "ce"),
    ("M1", "b"),
    ("M1", "d"),
    ("M1", "e"),
    ("M1", "bd"),
    ("M1", "be"),
];

const KAPPA_ROW: [Surd; 10] = [
    Surd(-7.0, 5.0),
    O,
    Surd(3.0, -2.0),
    Surd(3.0, -2.0),
    O,
    Surd(10.0, -7.0),
    O,
    O,
    Surd(-4.0, 3.0),
    Surd(-4.0, 3.0),
];

const M1_ROW: [Surd; 10] = [
    O,
    Surd(3.0, -2.0),
    O,
    O,
    Surd(-2.0, 1.5),
    O,
    Surd(-1.0, 1.0),
    Surd(1.0, -0.5),
    O,
    O,
];

pub const PUBLISHED_MATRIX: [[Surd; 10]; 10] = [
    [Surd(-1.0, 1.0), O, O, O, O, Surd(2.0, -1.0), O, O, O, O],
    [
        Surd(-2.0, 1.5),
        O,
        Surd(1.0, -0.5),
        O,
        O,
        Surd(3.0, -2.0),
        O,
        O,
        Surd(-1.0, 1.0),
        O,
    ],
    KAPPA_ROW,
    KAPPA_ROW,
    KAPPA_ROW,
    M1_ROW,
    M1_ROW,
    [O, O, O, O, O, O, Surd(2.0, -1.0), Surd(-1.0, 1.0), O, O],
    M1_ROW,
    M1_ROW,
];

/// Published aggregated marking chain.
pub const PUBLISHED_LUMPED: [[Surd; 2]; 2] = [
    [Surd(-1.0, 1.0), Surd(2.0, -1.0)],
    [Surd(1.0, -0.5), Surd(0.0, 0.5)],
];

pub fn published_matrix() -> Vec<Vec<f64>> {
    PUBLISHED_MATRIX
        .iter()
        .map(|r| r.iter().map(|s| s.value()).collect())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RowComparison {
    pub pair: String,
    pub published: Vec<f64>,
    pub derived: Vec<f64>,
    pub max_abs_diff: f64,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleConfirmation {
    pub pair: String,
    pub next: String,
    pub predecessor: String,
    pub transition: f64,
    pub oracle: f64,
    pub abs_diff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyReport {
    pub columns: Vec<String>,
    pub rows: Vec<RowComparison>,
    pub flagged: Vec<String>,
    /// oracle conditionals for every positive entry of the flagged rows
    pub oracle: Vec<OracleConfirmation>,
    /// row pairs that break strong lumpability of the published matrix
    pub published_lumping_conflicts: Vec<(String, String)>,
    pub published_lumped_claim: Vec<Vec<f64>>,
}

fn label(pair: (&str, &str)) -> String {
    format!("({},{})", pair.0, pair.1)
}

/// Compares a derived chain with the published matrix, entry by entry, and
/// backs every flagged row with prefix-oracle conditionals.
pub fn discrepancy_report<T: Scalar>(
    um: &UniformMeasure<T>,
    chain: &CliqueChain<T>,
    tol: f64,
) -> crate::error::Result<DiscrepancyReport> {
    let sys = um.system();
    let labels: Vec<String> = chain
        .pairs()
        .iter()
        .map(|(s, g)| format!("({},{})", sys.state_label(*s), sys.monoid().clique_name(g)))
        .collect();
    let published = published_matrix();
    let columns: Vec<String> = PUBLISHED_PAIRS.iter().map(|&p| label(p)).collect();
    // position of each published label in the derived chain
    let position: Vec<Option<usize>> = columns
        .iter()
        .map(|c| labels.iter().position(|l| l == c))
        .collect();
    let dense = chain.dense_matrix();
    let mut rows = Vec::new();
    let mut flagged = Vec::new();
    let mut oracle = Vec::new();
    for (i, col) in columns.iter().enumerate() {
        let derived: Vec<f64> = match position[i] {
            Some(r) => position
                .iter()
                .map(|c| c.map_or(0.0, |c| dense[r][c].as_f64()))
                .collect(),
            None => vec![f64::NAN; columns.len()],
        };
        let max_abs_diff = derived
            .iter()
            .zip(&published[i])
            .map(|(d, p)| (d - p).abs())
            .fold(0.0, f64::max);
        let matches = max_abs_diff <= tol;
        if !matches {
            flagged.push(col.clone());
            if let Some(r) = position[i] {
                for (c, &v) in derived.iter().enumerate() {
                    if v <= 0.0 {
                        continue;
                    }
                    let target = position[c].expect("positive entry has a column");
                    if let Some(check) = chain.oracle_conditional(um, r, target)? {
                        oracle.push(OracleConfirmation {
                            pair: col.clone(),
                            next: columns[c].clone(),
                            predecessor: sys.state_label(check.predecessor).to_string(),
                            transition: v,
                            oracle: check.oracle.as_f64(),
                            abs_diff: (check.oracle.as_f64() - v).abs(),
                        });
                    }
                }
            }
        }
        rows.push(RowComparison {
            pair: col.clone(),
            published: published[i].clone(),
            derived,
            max_abs_diff,
            matches,
        });
    }
    let groups: Vec<usize> = PUBLISHED_PAIRS
        .iter()
        .map(|(m, _)| usize::from(*m == "M1"))
        .collect();
    let published_lumping_conflicts = match lumping_check_dense(&published, &groups, 2, tol) {
        Lumping::Lumpable { .. } => Vec::new(),
        Lumping::NotLumpable { conflicts, .. } => conflicts
            .into_iter()
            .map(|(a, b)| (columns[a].clone(), columns[b].clone()))
            .collect(),
    };
    Ok(DiscrepancyReport {
        columns,
        rows,
        flagged,
        oracle,
        published_lumping_conflicts,
        published_lumped_claim: PUBLISHED_LUMPED
            .iter()
            .map(|r| r.iter().map(|s| s.value()).collect())
            .collect(),
    })
}
