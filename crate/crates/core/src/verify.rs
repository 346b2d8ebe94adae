//! Oracle suite: each check recomputes a quantity by an independent route
//! and reports the largest disagreement.

use serde::Serialize;

use crate::async_system::AsyncSystem;
use crate::chain::build_chain;
use crate::error::{Error, Result};
use crate::matrix::PolyMatrix;
use crate::measure::UniformMeasure;
use crate::petri_net::PetriNet;

pub const COFACTOR_LIMIT: usize = 6;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// series order for the inverse identity
    pub order: usize,
    /// trace length for enumeration checks
    pub length: usize,
    /// trace length for the chain rule
    pub depth: usize,
    pub root_tolerance: f64,
    pub probability_tolerance: f64,
    pub chain_rule_tolerance: f64,
    pub max_states: usize,
    pub max_cliques: usize,
    /// multiply `Γ(s, t)` by a factor before the measure checks
    pub corrupt_gamma: Option<(usize, usize, f64)>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            order: 10,
            length: 6,
            depth: 2,
            root_tolerance: 1e-12,
            probability_tolerance: 1e-9,
            chain_rule_tolerance: 1e-12,
            max_states: crate::petri_net::DEFAULT_MAX_STATES,
            max_cliques: crate::trace_monoid::DEFAULT_MAX_CLIQUES,
            corrupt_gamma: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub residual: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, residual: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            outcome: if pass { Outcome::Pass } else { Outcome::Fail },
            residual,
            detail: detail.into(),
        }
    }

    fn skipped(name: &str, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            outcome: Outcome::Skipped,
            residual: 0.0,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// `G(z)·M(z) ≡ I (mod z^(order+1))`, in exact integers.
pub fn check_inverse_identity(sys: &AsyncSystem, order: usize) -> Result<Check> {
    let g = sys.growth_matrix(order, order)?;
    let product = g.mul_truncated(&sys.mobius_matrix(), order + 1);
    let identity = PolyMatrix::identity(sys.state_count());
    let bad = (0..sys.state_count())
        .flat_map(|s| (0..sys.state_count()).map(move |t| (s, t)))
        .filter(|&(s, t)| product.get(s, t) != identity.get(s, t))
        .count();
    Ok(Check::new(
        "inverse_identity",
        bad == 0,
        bad as f64,
        format!("order {order}, {bad} mismatched entries"),
    ))
}

/// Growth coefficients of the monoid and of the system against brute-force
/// enumeration of traces.
pub fn check_enumeration(sys: &AsyncSystem, length: usize, cap: usize) -> Result<Check> {
    let monoid = sys.monoid();
    let recurrence = monoid.growth_coefficients(length, cap)?;
    let brute = monoid.count_traces(length, length, cap)?;
    let mut mismatches = recurrence
        .iter()
        .zip(&brute)
        .filter(|(r, b)| **r != num_bigint::BigInt::from(**b))
        .count();
    let traces = monoid.enumerate_traces(length, length, cap)?;
    let g = sys.growth_matrix_coefficients(length, length)?;
    let n = sys.state_count();
    for s in 0..n {
        let mut counts = vec![vec![0u64; length + 1]; n];
        for x in &traces {
            if let Some(t) = sys.act(s, x) {
                counts[t][x.len()] += 1;
            }
        }
        for t in 0..n {
            for k in 0..=length {
                if g[s][t][k] != num_bigint::BigInt::from(counts[t][k]) {
                    mismatches += 1;
                }
            }
        }
    }
    let lambda: Vec<String> = recurrence.iter().map(|v| v.to_string()).collect();
    Ok(Check::new(
        "enumeration",
        mismatches == 0,
        mismatches as f64,
        format!("length {length}, lambda [{}]", lambda.join(",")),
    ))
}

pub fn check_determinant(sys: &AsyncSystem) -> Check {
    if sys.state_count() > COFACTOR_LIMIT {
        return Check::skipped(
            "determinant",
            format!(
                "{} states exceed the cofactor limit {COFACTOR_LIMIT}",
                sys.state_count()
            ),
        );
    }
    let m = sys.mobius_matrix();
    let ok = m.determinant() == m.determinant_cofactor();
    Check::new(
        "determinant",
        ok,
        f64::from(u8::from(!ok)),
        "Bareiss against cofactor expansion",
    )
}

/// `ν_s(↑xy) = ν_s(↑x)·ν_{s·x}(↑y)` for every state and every pair of traces
/// with at most `depth` letters each.
pub fn check_chain_rule(
    um: &UniformMeasure<f64>,
    depth: usize,
    tol: f64,
    cap: usize,
) -> Result<Check> {
    let sys = um.system();
    let monoid = sys.monoid();
    let traces = monoid.enumerate_traces(depth, depth, cap)?;
    let mut worst = 0.0f64;
    let mut pairs = 0usize;
    for s in 0..sys.state_count() {
        for x in &traces {
            let Some(t) = sys.act(s, x) else { continue };
            let px = um.cylinder_probability(s, x);
            for y in &traces {
                let lhs = um.cylinder_probability(s, &monoid.concat(x, y));
                let rhs = px * um.cylinder_probability(t, y);
                worst = worst.max((lhs - rhs).abs());
                pairs += 1;
            }
        }
    }
    Ok(Check::new(
        "chain_rule",
        worst <= tol,
        worst,
        format!("{pairs} enabled pairs, length <= {depth}"),
    ))
}

pub fn check_cocycle(um: &UniformMeasure<f64>, tol: f64) -> Check {
    let c = um.cocycle();
    let n = um.system().state_count();
    let mut worst = c.residual();
    for s in 0..n {
        for t in 0..n {
            for u in 0..n {
                worst = worst.max((c.gamma(s, t) * c.gamma(t, u) - c.gamma(s, u)).abs());
            }
        }
    }
    Check::new(
        "cocycle",
        worst <= tol,
        worst,
        "kernel residual and Γ(s,t)Γ(t,u) = Γ(s,u)",
    )
}

pub fn check_first_clique_laws(um: &UniformMeasure<f64>) -> Check {
    for s in 0..um.system().state_count() {
        if let Err(e) = um.first_clique_law(s) {
            return Check::new("first_clique_law", false, f64::NAN, e.to_string());
        }
    }
    Check::new(
        "first_clique_law",
        true,
        0.0,
        "non-negative and normalized at every state",
    )
}

/// Every admissible chain entry against the prefix oracle.
pub fn check_oracle_conditionals(um: &UniformMeasure<f64>, tol: f64) -> Result<Check> {
    let chain = build_chain(um, 0)?;
    let monoid = um.system().monoid();
    let mut worst = 0.0f64;
    let mut compared = 0usize;
    for i in 0..chain.len() {
        for j in 0..chain.len() {
            if !monoid.is_normal_pair(&chain.pairs()[i].1, &chain.pairs()[j].1) {
                continue;
            }
            if let Some(c) = chain.oracle_conditional(um, i, j)? {
                worst = worst.max((c.oracle - chain.transition(i, j)).abs());
                compared += 1;
            }
        }
    }
    Ok(Check::new(
        "oracle_conditionals",
        worst <= tol,
        worst,
        format!("{compared} entries over {} pairs", chain.len()),
    ))
}

/// Structural checks always; measure checks when the system is irreducible
/// and its cocycle exists.
pub fn verify_net(net: &PetriNet, opts: &VerifyOptions) -> Result<VerifyReport> {
    let graph = net.reachability_graph(opts.max_states)?;
    let sys = AsyncSystem::from_net(net, &graph, opts.max_cliques)?;
    verify_system(sys, opts)
}

pub fn verify_system(sys: AsyncSystem, opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = vec![
        check_inverse_identity(&sys, opts.order)?,
        check_enumeration(&sys, opts.length, opts.max_cliques)?,
        check_determinant(&sys),
    ];
    let measure = sys
        .characteristic_root(opts.root_tolerance)
        .and_then(|q0| sys.cocycle::<f64>(&q0, opts.probability_tolerance));
    let names = [
        "cocycle",
        "first_clique_law",
        "chain_rule",
        "oracle_conditionals",
    ];
    match measure {
        Err(e @ (Error::NotIrreducible | Error::NoRootInRange)) => {
            checks.extend(names.iter().map(|n| Check::skipped(n, e.to_string())));
        }
        Err(e) => checks.extend(
            names
                .iter()
                .map(|n| Check::new(n, false, f64::NAN, e.to_string())),
        ),
        Ok(mut cocycle) => {
            if let Some((s, t, factor)) = opts.corrupt_gamma {
                if s >= sys.state_count() || t >= sys.state_count() {
                    return Err(Error::Invalid(format!("no Γ entry ({s},{t})")));
                }
                cocycle = cocycle.with_corrupted_gamma(s, t, factor);
            }
            let um = UniformMeasure::new(sys, cocycle);
            checks.push(check_cocycle(&um, opts.probability_tolerance));
            let laws = check_first_clique_laws(&um);
            let laws_ok = laws.outcome == Outcome::Pass;
            checks.push(laws);
            checks.push(check_chain_rule(
                &um,
                opts.depth,
                opts.chain_rule_tolerance,
                opts.max_cliques,
            )?);
            if !laws_ok {
                checks.push(Check::skipped(
                    "oracle_conditionals",
                    "first-clique law unavailable",
                ));
            } else if um.cocycle().q0() > 1.0 {
                checks.push(Check::skipped(
                    "oracle_conditionals",
                    "characteristic root exceeds 1",
                ));
            } else {
                match check_oracle_conditionals(&um, opts.probability_tolerance) {
                    Ok(c) => checks.push(c),
                    Err(e @ Error::Cap { .. }) => {
                        checks.push(Check::skipped("oracle_conditionals", e.to_string()))
                    }
                    Err(e) => checks.push(Check::new(
                        "oracle_conditionals",
                        false,
                        f64::NAN,
                        e.to_string(),
                    )),
                }
            }
        }
    }
    let pass = checks.iter().all(|c| c.outcome != Outcome::Fail);
    Ok(VerifyReport { checks, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::petri_net::parse_net;
    use crate::random_nets::random_safe_net;
    use crate::reference::REFERENCE_NET_JSON;

    #[test]
    fn reference_net_passes() {
        let net = parse_net(REFERENCE_NET_JSON).unwrap();
        let report = verify_net(&net, &VerifyOptions::default()).unwrap();
        for c in &report.checks {
            assert_eq!(c.outcome, Outcome::Pass, "{c:?}");
        }
    }

    #[test]
    fn corrupted_gamma_breaks_chain_rule() {
        let net = parse_net(REFERENCE_NET_JSON).unwrap();
        let opts = VerifyOptions {
            corrupt_gamma: Some((0, 1, 1.01)),
            ..VerifyOptions::default()
        };
        let report = verify_net(&net, &opts).unwrap();
        assert!(!report.pass);
        let rule = report
            .checks
            .iter()
            .find(|c| c.name == "chain_rule")
            .unwrap();
        assert_eq!(rule.outcome, Outcome::Fail);
    }

    #[test]
    fn random_nets_pass_structural_checks() {
        let opts = VerifyOptions {
            order: 6,
            length: 4,
            ..VerifyOptions::default()
        };
        for seed in 0..8 {
            let net = random_safe_net(seed, 6);
            let report = verify_net(&net, &opts).unwrap();
            for c in report.checks.iter().take(3) {
                assert_ne!(c.outcome, Outcome::Fail, "seed {seed}: {c:?}");
            }
        }
    }
}
