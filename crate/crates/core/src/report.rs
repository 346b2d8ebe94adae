//! End-to-end analysis of a net and the serializable reports built from it.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::Value;

use crate::async_system::{AsyncSystem, CharacteristicRoot, StateId};
use crate::chain::{build_chain, CliqueChain, ExecutionSample, Lumping};
use crate::error::{Error, Result};
use crate::measure::UniformMeasure;
use crate::petri_net::{PetriNet, ReachabilityGraph, DEFAULT_MAX_STATES};
use crate::poly::Polynomial;
use crate::reference::{discrepancy_report, is_reference_net, DiscrepancyReport};
use crate::roots::{smallest_root_unit, RootSummary};
use crate::trace_monoid::DEFAULT_MAX_CLIQUES;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug)]
pub struct AnalysisOptions {
    pub root_tolerance: f64,
    pub probability_tolerance: f64,
    pub max_states: usize,
    pub max_cliques: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            root_tolerance: 1e-12,
            probability_tolerance: 1e-9,
            max_states: DEFAULT_MAX_STATES,
            max_cliques: DEFAULT_MAX_CLIQUES,
        }
    }
}

/// Everything computed from a net up to the uniform measure.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub net: PetriNet,
    pub graph: ReachabilityGraph,
    pub root: CharacteristicRoot,
    pub measure: UniformMeasure<f64>,
}

impl Analysis {
    /// Fails on contact, reducibility, a kernel that is not a positive line,
    /// or a negative first-clique weight at any state; with a root at 1 the
    /// last two are reported as a degenerate root.
    pub fn run(net: PetriNet, opts: &AnalysisOptions) -> Result<Self> {
        let graph = net.reachability_graph(opts.max_states)?;
        let sys = AsyncSystem::from_net(&net, &graph, opts.max_cliques)?;
        let root = sys.characteristic_root(opts.root_tolerance)?;
        let degenerate = |e| {
            if root.degenerate {
                Error::DegenerateRoot
            } else {
                e
            }
        };
        let cocycle = sys
            .cocycle(&root, opts.probability_tolerance)
            .map_err(degenerate)?;
        let measure = UniformMeasure::new(sys, cocycle).with_tolerance(opts.probability_tolerance);
        for s in 0..measure.system().state_count() {
            measure.first_clique_law(s).map_err(degenerate)?;
        }
        Ok(Self {
            net,
            graph,
            root,
            measure,
        })
    }

    pub fn system(&self) -> &AsyncSystem {
        self.measure.system()
    }

    pub fn marking_names(&self, s: StateId) -> Vec<String> {
        self.net.marking_names(&self.graph.markings[s])
    }

    pub fn pair_label(&self, pair: &crate::chain::Pair) -> String {
        let sys = self.system();
        format!(
            "({},{})",
            sys.state_label(pair.0),
            sys.monoid().clique_name(&pair.1)
        )
    }
}

/// Integer coefficients as JSON numbers, or strings when they overflow `i64`.
pub fn coefficients(p: &Polynomial<BigInt>) -> Vec<Value> {
    let c = p.coeffs();
    if c.is_empty() {
        return vec![Value::from(0)];
    }
    c.iter()
        .map(|v| {
            v.to_i64()
                .map_or_else(|| Value::from(v.to_string()), Value::from)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PolynomialReport {
    pub coefficients: Vec<Value>,
    pub text: String,
}

impl From<&Polynomial<BigInt>> for PolynomialReport {
    fn from(p: &Polynomial<BigInt>) -> Self {
        Self {
            coefficients: coefficients(p),
            text: p.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StateReport {
    pub label: String,
    pub marking: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NetSummary {
    pub content_hash: String,
    pub places: usize,
    pub transitions: usize,
    pub reference_fixture: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub net: NetSummary,
    pub letters: Vec<String>,
    pub independence_pairs: Vec<String>,
    pub dead_transitions: Vec<String>,
    pub state_count: usize,
    pub states: Vec<StateReport>,
    /// rows are states, columns letters; `null` is the sink
    pub action_table: Vec<Vec<Option<String>>>,
    pub cliques: Vec<String>,
    pub mobius_polynomial: PolynomialReport,
    pub monoid_root: RootSummary,
    pub mobius_matrix: Vec<Vec<PolynomialReport>>,
    pub theta: PolynomialReport,
    pub characteristic_root: RootSummary,
    pub state_weights: Vec<f64>,
    pub gamma: Vec<Vec<f64>>,
    pub cocycle_residual: f64,
    /// first-clique law at every state, aligned with `cliques`
    pub first_clique_laws: Vec<Vec<f64>>,
}

pub fn analysis_report(
    a: &Analysis,
    timestamp: Option<String>,
    opts: &AnalysisOptions,
) -> Result<AnalysisReport> {
    let sys = a.system();
    let monoid = sys.monoid();
    let mu = monoid.mobius_polynomial(opts.max_cliques)?;
    let cocycle = a.measure.cocycle();
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        timestamp,
        net: NetSummary {
            content_hash: a.net.content_hash(),
            places: a.net.places().len(),
            transitions: a.net.transitions().len(),
            reference_fixture: is_reference_net(&a.net),
        },
        letters: monoid.letter_names().to_vec(),
        independence_pairs: monoid
            .independent_pairs()
            .into_iter()
            .map(|(x, y)| format!("{}{}", monoid.letter_name(x), monoid.letter_name(y)))
            .collect(),
        dead_transitions: a
            .graph
            .dead_transitions
            .iter()
            .map(|&t| monoid.letter_name(t).to_string())
            .collect(),
        state_count: sys.state_count(),
        states: (0..sys.state_count())
            .map(|s| StateReport {
                label: sys.state_label(s).into(),
                marking: a.marking_names(s),
            })
            .collect(),
        action_table: sys
            .action_table()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| t.map(|t| sys.state_label(t).to_string()))
                    .collect()
            })
            .collect(),
        cliques: sys
            .cliques()
            .iter()
            .map(|c| monoid.clique_name(c))
            .collect(),
        mobius_polynomial: (&mu).into(),
        monoid_root: smallest_root_unit(&mu, opts.root_tolerance)?.summary(),
        mobius_matrix: sys
            .mobius_matrix()
            .rows()
            .iter()
            .map(|r| r.iter().map(PolynomialReport::from).collect())
            .collect(),
        theta: (&sys.theta_polynomial()).into(),
        characteristic_root: a.root.root.summary(),
        state_weights: cocycle.weights().to_vec(),
        gamma: cocycle.gamma_table().to_vec(),
        cocycle_residual: cocycle.residual(),
        first_clique_laws: (0..sys.state_count())
            .map(|s| a.measure.first_clique_law(s).map(|l| l.weights))
            .collect::<Result<_>>()?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct KappaEntry {
    pub clique: String,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LumpingReport {
    Lumpable {
        groups: Vec<String>,
        matrix: Vec<Vec<f64>>,
    },
    NotLumpable {
        groups: Vec<String>,
        conflicts: Vec<(String, String)>,
        /// next-marking masses of the groups whose rows agree
        aggregated: Vec<Option<Vec<f64>>>,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub start: String,
    pub pairs: Vec<String>,
    pub kappa: Vec<KappaEntry>,
    pub initial: Vec<f64>,
    pub matrix: Vec<Vec<f64>>,
    pub lumping: LumpingReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<DiscrepancyReport>,
}

pub fn chain_report(
    a: &Analysis,
    chain: &CliqueChain<f64>,
    timestamp: Option<String>,
    tol: f64,
) -> Result<ChainReport> {
    let sys = a.system();
    let monoid = sys.monoid();
    let law = a.measure.first_clique_law(chain.start())?;
    let label = |i: usize| a.pair_label(&chain.pairs()[i]);
    let groups: Vec<String> = (0..sys.state_count())
        .map(|s| sys.state_label(s).to_string())
        .collect();
    let lumping = match chain.lumping_check(sys.state_count(), tol) {
        Lumping::Lumpable { matrix } => LumpingReport::Lumpable { groups, matrix },
        Lumping::NotLumpable {
            conflicts,
            aggregated,
        } => LumpingReport::NotLumpable {
            groups,
            conflicts: conflicts
                .into_iter()
                .map(|(i, j)| (label(i), label(j)))
                .collect(),
            aggregated,
        },
    };
    let discrepancy = if is_reference_net(&a.net) {
        Some(discrepancy_report(&a.measure, chain, tol)?)
    } else {
        None
    };
    Ok(ChainReport {
        schema_version: SCHEMA_VERSION,
        timestamp,
        start: sys.state_label(chain.start()).into(),
        pairs: (0..chain.len()).map(label).collect(),
        kappa: sys
            .cliques()
            .iter()
            .zip(&law.weights)
            .map(|(c, &w)| KappaEntry {
                clique: monoid.clique_name(c),
                weight: w,
            })
            .collect(),
        initial: chain.initial().to_vec(),
        matrix: chain.dense_matrix(),
        lumping,
        discrepancy,
    })
}

/// Chain started at the initial marking.
pub fn initial_chain(a: &Analysis) -> Result<CliqueChain<f64>> {
    build_chain(&a.measure, 0)
}

/// Square matrix as CSV with labelled rows and columns.
pub fn matrix_csv(labels: &[String], rows: &[Vec<f64>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
    w.write_record(std::iter::once("").chain(labels.iter().map(String::as_str)))
        .map_err(io)?;
    for (label, row) in labels.iter().zip(rows) {
        w.write_record(std::iter::once(label.clone()).chain(row.iter().map(|v| v.to_string())))
            .map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub clique: Vec<String>,
    pub marking: Vec<String>,
}

pub fn step_records(a: &Analysis, sample: &ExecutionSample) -> Vec<StepRecord> {
    let monoid = a.system().monoid();
    sample
        .steps
        .iter()
        .enumerate()
        .map(|(k, (c, s))| StepRecord {
            k: k + 1,
            clique: c
                .letters()
                .iter()
                .map(|&l| monoid.letter_name(l).to_string())
                .collect(),
            marking: a.marking_names(*s),
        })
        .collect()
}

pub fn firing_line(a: &Analysis, sample: &ExecutionSample) -> String {
    let monoid = a.system().monoid();
    sample
        .linearization()
        .iter()
        .map(|&l| monoid.letter_name(l))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthTable {
    pub from: String,
    pub to: String,
    pub recurrence: Vec<String>,
    pub brute_force: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnumerationReport {
    pub schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub length: usize,
    pub lambda_recurrence: Vec<String>,
    pub lambda_brute_force: Vec<String>,
    pub growth: Vec<GrowthTable>,
    pub consistent: bool,
}

/// Growth tables of a net's system by recurrence and by brute force; needs
/// only the reachability graph, not the measure.
pub fn enumeration_report(
    net: &PetriNet,
    length: usize,
    opts: &AnalysisOptions,
    max_length: usize,
    timestamp: Option<String>,
) -> Result<EnumerationReport> {
    let graph = net.reachability_graph(opts.max_states)?;
    let sys = AsyncSystem::from_net(net, &graph, opts.max_cliques)?;
    let monoid = sys.monoid();
    if length > max_length {
        return Err(Error::Cap {
            what: "trace length",
            requested: length,
            cap: max_length,
        });
    }
    let strings = |v: &[BigInt]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    let lambda_recurrence = strings(&monoid.growth_coefficients(length, opts.max_cliques)?);
    let lambda_brute_force: Vec<String> = monoid
        .count_traces(length, max_length, opts.max_cliques)?
        .iter()
        .map(|x| x.to_string())
        .collect();
    let g = sys.growth_matrix_coefficients(length, max_length)?;
    let traces = monoid.enumerate_traces(length, max_length, opts.max_cliques)?;
    let n = sys.state_count();
    let mut growth = Vec::new();
    let mut consistent = lambda_recurrence == lambda_brute_force;
    for s in 0..n {
        let mut counts = vec![vec![0u64; length + 1]; n];
        for x in &traces {
            if let Some(t) = sys.act(s, x) {
                counts[t][x.len()] += 1;
            }
        }
        for t in 0..n {
            let recurrence = strings(&g[s][t]);
            let brute_force: Vec<String> = counts[t].iter().map(|c| c.to_string()).collect();
            consistent &= recurrence == brute_force;
            growth.push(GrowthTable {
                from: sys.state_label(s).into(),
                to: sys.state_label(t).into(),
                recurrence,
                brute_force,
            });
        }
    }
    Ok(EnumerationReport {
        schema_version: SCHEMA_VERSION,
        timestamp,
        length,
        lambda_recurrence,
        lambda_brute_force,
        growth,
        consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri_net::parse_net;
    use crate::reference::REFERENCE_NET_JSON;

    fn analysis() -> Analysis {
        Analysis::run(
            parse_net(REFERENCE_NET_JSON).unwrap(),
            &AnalysisOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn analysis_report_of_reference_net() {
        let a = analysis();
        let r = analysis_report(&a, None, &AnalysisOptions::default()).unwrap();
        assert_eq!(r.independence_pairs, ["ad", "ae", "bd", "be", "ce"]);
        assert_eq!(r.theta.coefficients, [1, -5, 7, -1, -2].map(Value::from));
        assert_eq!(r.mobius_polynomial.text, "1 - 5z + 5z^2");
        assert_eq!(
            r.action_table[1],
            [
                None,
                None,
                Some("M0".into()),
                Some("M1".into()),
                Some("M1".into())
            ]
        );
        assert!((r.characteristic_root.midpoint - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!(r.net.reference_fixture);
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("timestamp"));
    }

    #[test]
    fn chain_report_flags_one_row() {
        let a = analysis();
        let chain = initial_chain(&a).unwrap();
        let r = chain_report(&a, &chain, None, 1e-9).unwrap();
        let d = r.discrepancy.unwrap();
        assert_eq!(d.flagged, ["(M1,b)"]);
        assert!(matches!(r.lumping, LumpingReport::NotLumpable { .. }));
        let csv = matrix_csv(&r.pairs, &r.matrix).unwrap();
        assert!(csv.starts_with(",\"(M0,a)\",\"(M0,c)\""));
        assert_eq!(csv.lines().count(), 11);
    }

    #[test]
    fn step_records_serialize_in_order() {
        let a = analysis();
        let chain = initial_chain(&a).unwrap();
        let sample = chain.sample_execution(3, 5).unwrap();
        let recs = step_records(&a, &sample);
        let line = serde_json::to_string(&recs[0]).unwrap();
        assert!(line.starts_with("{\"k\":1,\"clique\":["));
        assert!(line.contains("\"marking\":[\"p"));
        assert_eq!(
            firing_line(&a, &sample).split(' ').count(),
            sample.linearization().len()
        );
    }

    #[test]
    fn enumeration_of_reference_net() {
        let net = parse_net(REFERENCE_NET_JSON).unwrap();
        let r = enumeration_report(&net, 2, &AnalysisOptions::default(), 10, None).unwrap();
        assert_eq!(r.lambda_recurrence, ["1", "5", "20"]);
        assert!(r.consistent);
        let r0 = enumeration_report(&net, 0, &AnalysisOptions::default(), 10, None).unwrap();
        assert_eq!(r0.lambda_recurrence, ["1"]);
        assert!(enumeration_report(&net, 11, &AnalysisOptions::default(), 10, None).is_err());
    }
}
