//! Constrained serial dictatorship.
//!
//! Agents move in a fixed order. At step k agent `i_k` adds contracts it
//! signs that no earlier agent signs, picking the addition that makes its
//! share of the pool best, subject to the pool staying inside some
//! individually rational outcome. The last agent takes no step: every
//! contract has two signers, so all of X is reachable through the first
//! `|I| - 1` agents.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitset::{AgentSet, ContractSet};
use crate::error::{Error, Result};
use crate::market::{AgentId, Market};
use crate::stability::Auditor;

/// A permutation of the market's agents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgentOrder(Vec<AgentId>);

impl AgentOrder {
    pub fn new(m: &Market, agents: Vec<AgentId>) -> Result<Self> {
        let mut seen = AgentSet::EMPTY;
        for &a in &agents {
            if a.0 >= m.agent_count() {
                return Err(Error::InvalidOrdering(format!(
                    "unknown agent index {}",
                    a.0
                )));
            }
            if seen.contains(a.0) {
                return Err(Error::InvalidOrdering(format!(
                    "agent `{}` appears twice",
                    m.agent_name(a)
                )));
            }
            seen.insert(a.0);
        }
        if agents.len() != m.agent_count() {
            let missing: Vec<&str> = m
                .agents()
                .filter(|a| !seen.contains(a.0))
                .map(|a| m.agent_name(a))
                .collect();
            return Err(Error::InvalidOrdering(format!(
                "missing agents: {}",
                missing.join(", ")
            )));
        }
        Ok(Self(agents))
    }

    /// Market file order.
    pub fn identity(m: &Market) -> Self {
        Self(m.agents().collect())
    }

    /// Parses a comma-separated list of agent names.
    pub fn parse(m: &Market, text: &str) -> Result<Self> {
        let agents = text
            .split(',')
            .map(|name| {
                m.agent_by_name(name.trim())
                    .ok_or_else(|| Error::InvalidOrdering(format!("unknown agent `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, agents)
    }

    /// Uniformly random permutation determined by `seed`.
    pub fn random(m: &Market, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut agents: Vec<AgentId> = m.agents().collect();
        agents.shuffle(&mut rng);
        Self(agents)
    }

    /// Every ordering of the market's agents, in lexicographic index order.
    pub fn all(m: &Market) -> Vec<Self> {
        fn rec(prefix: &mut Vec<AgentId>, rest: &mut Vec<AgentId>, out: &mut Vec<AgentOrder>) {
            if rest.is_empty() {
                out.push(AgentOrder(prefix.clone()));
                return;
            }
            for k in 0..rest.len() {
                let a = rest.remove(k);
                prefix.push(a);
                rec(prefix, rest, out);
                prefix.pop();
                rest.insert(k, a);
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), &mut m.agents().collect(), &mut out);
        out
    }

    pub fn agents(&self) -> &[AgentId] {
        &self.0
    }

    pub fn format(&self, m: &Market) -> String {
        self.0
            .iter()
            .map(|&a| m.agent_name(a))
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsdStep {
    pub agent: AgentId,
    /// Feasible additions the agent chose among.
    pub candidates_considered: usize,
    pub chosen: ContractSet,
    pub pool_after: ContractSet,
    /// The winning portfolio is unacceptable, so the choice among the
    /// candidates was decided by the completion rule for unlisted sets.
    pub completion_rule_used: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CsdTrace {
    pub order: AgentOrder,
    pub steps: Vec<CsdStep>,
    pub outcome: ContractSet,
}

impl CsdTrace {
    pub fn to_text(&self, m: &Market) -> String {
        let mut out = String::new();
        for (k, s) in self.steps.iter().enumerate() {
            let _ = write!(
                out,
                "step {} agent={} chose={} pool={}",
                k + 1,
                m.agent_name(s.agent),
                m.format_set(s.chosen),
                m.format_set(s.pool_after)
            );
            if s.completion_rule_used {
                out.push_str(" [completion-rule]");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "result={}", m.format_set(self.outcome));
        out
    }

    pub fn to_structured(&self, m: &Market) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "order={}", self.order.format(m));
        for (k, s) in self.steps.iter().enumerate() {
            let k = k + 1;
            let _ = writeln!(out, "step.{k}.agent={}", m.agent_name(s.agent));
            let _ = writeln!(out, "step.{k}.candidates={}", s.candidates_considered);
            let _ = writeln!(out, "step.{k}.chose={}", m.format_set(s.chosen));
            let _ = writeln!(out, "step.{k}.pool={}", m.format_set(s.pool_after));
            let _ = writeln!(out, "step.{k}.completion_rule={}", s.completion_rule_used);
        }
        let _ = writeln!(out, "result={}", m.format_set(self.outcome));
        out
    }
}

fn extendable(ir: &[ContractSet], set: ContractSet) -> bool {
    ir.iter().any(|&y| set.is_subset(y))
}

/// Every `Z ⊆ X_agent \ X_forbidden` such that `pool ∪ Z` lies inside some
/// individually rational outcome, in canonical order. Always contains the
/// empty set.
pub fn csd_feasible_extensions(
    auditor: &Auditor<'_>,
    pool: ContractSet,
    agent: AgentId,
    forbidden: AgentSet,
) -> Result<Vec<ContractSet>> {
    let m = auditor.market();
    let ir = auditor.enumerate_ir();
    if !extendable(ir, pool) {
        return Err(Error::PoolNotExtendable(m.format_set(pool)));
    }
    let free = m
        .portfolio(agent)
        .difference(m.restrict_group(m.all_contracts(), forbidden));
    let elems = m.canonical_elems(free);
    Ok(auditor
        .exec()
        .filter_subsets(&elems, |z| extendable(ir, pool.union(z))))
}

/// Runs the algorithm for one ordering.
pub fn csd(auditor: &Auditor<'_>, order: &AgentOrder) -> CsdTrace {
    let m = auditor.market();
    let step_count = order.0.len().saturating_sub(1);
    let mut pool = ContractSet::EMPTY;
    let mut forbidden = AgentSet::EMPTY;
    let mut steps = Vec::with_capacity(step_count);
    for &agent in &order.0[..step_count] {
        let candidates = csd_feasible_extensions(auditor, pool, agent, forbidden)
            .expect("pool built by earlier steps stays extendable");
        let held = m.restrict(pool, agent);
        let (chosen, standing) = candidates
            .iter()
            .map(|&z| (z, m.standing(agent, held.union(z))))
            .min_by(|a, b| a.1.cmp(&b.1))
            .expect("the empty extension is always feasible");
        pool = pool.union(chosen);
        forbidden.insert(agent.0);
        steps.push(CsdStep {
            agent,
            candidates_considered: candidates.len(),
            chosen,
            pool_after: pool,
            completion_rule_used: standing.is_unacceptable() && candidates.len() > 1,
        });
    }
    CsdTrace {
        order: order.clone(),
        steps,
        outcome: pool,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::text::parse_market;

    fn set(m: &Market, s: &str) -> ContractSet {
        m.parse_set(s).unwrap()
    }

    #[test]
    fn market3_walkthrough() {
        let m = fixtures::market3();
        let a = Auditor::new(&m).unwrap();
        let t = csd(&a, &AgentOrder::parse(&m, "i1,i2,i3").unwrap());
        assert_eq!(t.outcome, set(&m, "{x,z,u}"));
        assert_eq!(t.steps.len(), 2);
        assert_eq!(t.steps[0].chosen, set(&m, "{x,u}"));
        assert_eq!(t.steps[1].chosen, set(&m, "{z}"));
        assert!(t.steps.iter().all(|s| !s.completion_rule_used));
        assert_eq!(
            t.to_text(&m),
            "step 1 agent=i1 chose={u,x} pool={u,x}\n\
             step 2 agent=i2 chose={z} pool={u,x,z}\n\
             result={u,x,z}\n"
        );
    }

    #[test]
    fn market3_reverse_order() {
        let m = fixtures::market3();
        let a = Auditor::new(&m).unwrap();
        let t = csd(&a, &AgentOrder::parse(&m, "i3,i2,i1").unwrap());
        assert_eq!(
            t.to_text(&m),
            "step 1 agent=i3 chose={u,z} pool={u,z}\n\
             step 2 agent=i2 chose={x} pool={u,x,z}\n\
             result={u,x,z}\n"
        );
    }

    #[test]
    fn feasible_extensions() {
        let m = fixtures::market3();
        let a = Auditor::new(&m).unwrap();
        let i1 = m.parse_agent("i1").unwrap();
        let ext = csd_feasible_extensions(&a, ContractSet::EMPTY, i1, AgentSet::EMPTY).unwrap();
        assert!(ext.contains(&set(&m, "{x,u}")));
        assert!(!ext.contains(&set(&m, "{x,y,u}")));
        assert_eq!(ext[0], ContractSet::EMPTY);

        let i2 = m.parse_agent("i2").unwrap();
        let only_i1: AgentSet = [i1.0].into_iter().collect();
        let ext = csd_feasible_extensions(&a, set(&m, "{x,u}"), i2, only_i1).unwrap();
        assert_eq!(ext, vec![ContractSet::EMPTY, set(&m, "{z}")]);

        assert!(matches!(
            csd_feasible_extensions(&a, set(&m, "{y,u}"), i2, only_i1),
            Err(Error::PoolNotExtendable(_))
        ));
    }

    #[test]
    fn empty_preferences_give_empty_outcome() {
        let m = parse_market("agents A B C\ncontract x A B\ncontract y B C\n").unwrap();
        let a = Auditor::new(&m).unwrap();
        for order in AgentOrder::all(&m) {
            let t = csd(&a, &order);
            assert_eq!(t.outcome, ContractSet::EMPTY);
            assert_eq!(t.steps.len(), 2);
        }
    }

    #[test]
    fn market5_setwise_stable_outcome() {
        let m = fixtures::market5();
        let a = Auditor::new(&m).unwrap();
        let t = csd(&a, &AgentOrder::parse(&m, "Ana,Bob,Carol").unwrap());
        assert_eq!(t.outcome, set(&m, "{x,z,u}"));
        assert!(a.audit(t.outcome).setwise_stable);
    }

    #[test]
    fn orderings() {
        let m = fixtures::market4();
        assert_eq!(AgentOrder::all(&m).len(), 6);
        assert!(AgentOrder::parse(&m, "Ana,Bob").is_err());
        assert!(AgentOrder::parse(&m, "Ana,Bob,Bob").is_err());
        assert!(AgentOrder::parse(&m, "Ana,Bob,Dave").is_err());
        assert_eq!(AgentOrder::random(&m, 7), AgentOrder::random(&m, 7));
    }

    #[test]
    fn single_agent_and_empty_markets() {
        let m = parse_market("agents A\n").unwrap();
        let a = Auditor::new(&m).unwrap();
        let t = csd(&a, &AgentOrder::identity(&m));
        assert!(t.steps.is_empty());
        let m = parse_market("").unwrap();
        let a = Auditor::new(&m).unwrap();
        assert_eq!(
            csd(&a, &AgentOrder::identity(&m)).outcome,
            ContractSet::EMPTY
        );
    }
}
