//! Exhaustive checkers for preference conditions.
//!
//! Each checker scans its whole quantifier domain over subsets of X_i and
//! either certifies the condition or returns the first violated instance.
//! Scan order: the larger set in canonical order, then the smaller one in
//! canonical order, then any remaining set or contract in id order.

use std::fmt;
use std::fmt::Write as _;

use crate::bitset::{canonical_subsets, ContractSet};
use crate::error::Result;
use crate::exec::Exec;
use crate::market::{AgentId, Market, Preferred};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    Complementary,
    ScaleEconomies,
    SingleContractSe,
    DifferentGroupComplementary,
    OrdinalSe,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::Complementary,
        Condition::ScaleEconomies,
        Condition::SingleContractSe,
        Condition::DifferentGroupComplementary,
        Condition::OrdinalSe,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::Complementary => "complementary",
            Condition::ScaleEconomies => "scale_economies",
            Condition::SingleContractSe => "single_contract_se",
            Condition::DifferentGroupComplementary => "different_group_complementary",
            Condition::OrdinalSe => "ordinal_se",
        }
    }

    /// Accepts the snake_case names and their kebab-case spellings.
    pub fn parse(name: &str) -> Option<Self> {
        let norm = name.replace('-', "_");
        Self::ALL.into_iter().find(|c| c.as_str() == norm)
    }

    pub fn check(self, m: &Market, agent: AgentId) -> Result<ConditionReport> {
        match self {
            Condition::Complementary => check_complementary(m, agent),
            Condition::ScaleEconomies => check_scale_economies(m, agent),
            Condition::SingleContractSe => check_single_contract_se(m, agent),
            Condition::DifferentGroupComplementary => check_different_group_complementary(m, agent),
            Condition::OrdinalSe => check_ordinal_scale_economies(m, agent),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The quantifier instance at which a condition fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Counterexample {
    /// `C(smaller)` is not contained in `C(larger)`.
    Complementary {
        smaller: ContractSet,
        larger: ContractSet,
    },
    /// Signers of the dropped contracts are not covered by signers of the
    /// newly chosen ones.
    ScaleEconomies {
        smaller: ContractSet,
        larger: ContractSet,
    },
    /// `dropped` leaves the choice when `arriving` is added to `base`, yet
    /// `N(dropped)` is not contained in `N(arriving)`.
    SingleContractSe {
        base: ContractSet,
        dropped: usize,
        arriving: usize,
    },
    /// `dropped` leaves the choice when `added` (no contract of its signer
    /// group) joins the self-chosen `base`.
    DifferentGroup {
        base: ContractSet,
        added: ContractSet,
        dropped: usize,
    },
    /// `better` beats `worse`, both self-chosen, but `better ∪ reinstated`
    /// is not self-chosen.
    OrdinalSe {
        worse: ContractSet,
        better: ContractSet,
        reinstated: ContractSet,
    },
}

impl Counterexample {
    pub fn condition(&self) -> Condition {
        match self {
            Counterexample::Complementary { .. } => Condition::Complementary,
            Counterexample::ScaleEconomies { .. } => Condition::ScaleEconomies,
            Counterexample::SingleContractSe { .. } => Condition::SingleContractSe,
            Counterexample::DifferentGroup { .. } => Condition::DifferentGroupComplementary,
            Counterexample::OrdinalSe { .. } => Condition::OrdinalSe,
        }
    }

    /// Re-evaluates the defining clause at this instance; true when it is
    /// indeed violated.
    pub fn is_violation(&self, m: &Market, i: AgentId) -> bool {
        let own = m.portfolio(i);
        match *self {
            Counterexample::Complementary { smaller, larger } => {
                smaller.is_subset(larger)
                    && smaller != larger
                    && larger.is_subset(own)
                    && !m.choose(i, smaller).is_subset(m.choose(i, larger))
            }
            Counterexample::ScaleEconomies { smaller, larger } => {
                let (c, c2) = (m.choose(i, smaller), m.choose(i, larger));
                smaller.is_subset(larger)
                    && smaller != larger
                    && larger.is_subset(own)
                    && !m
                        .signers(c.difference(c2))
                        .is_subset(m.signers(c2.difference(c)))
            }
            Counterexample::SingleContractSe {
                base,
                dropped,
                arriving,
            } => {
                base.is_subset(own)
                    && base.contains(dropped)
                    && own.contains(arriving)
                    && !base.contains(arriving)
                    && m.choose(i, base).contains(dropped)
                    && !m
                        .choose(i, base.union(ContractSet::singleton(arriving)))
                        .contains(dropped)
                    && !m
                        .contract_signers(dropped)
                        .is_subset(m.contract_signers(arriving))
            }
            Counterexample::DifferentGroup {
                base,
                added,
                dropped,
            } => {
                let group = m.contract_signers(dropped);
                base.union(added).is_subset(own)
                    && base.is_disjoint(added)
                    && m.choose(i, base) == base
                    && base.contains(dropped)
                    && added.iter().all(|z| m.contract_signers(z) != group)
                    && !m.choose(i, base.union(added)).contains(dropped)
            }
            Counterexample::OrdinalSe {
                worse,
                better,
                reinstated,
            } => {
                let new_partners = m.signers(better.difference(worse));
                let after = better.union(reinstated);
                worse.union(better).is_subset(own)
                    && m.choose(i, worse) == worse
                    && m.choose(i, better) == better
                    && m.compare_unchecked(i, better, worse) == Preferred::First
                    && reinstated.is_subset(worse.difference(better))
                    && reinstated
                        .iter()
                        .all(|x| !m.contract_signers(x).is_subset(new_partners))
                    && m.choose(i, after) != after
            }
        }
    }

    pub fn describe(&self, m: &Market) -> String {
        let s = |x: ContractSet| m.format_set(x);
        let c = |x: usize| m.contract(x).id.as_str();
        match *self {
            Counterexample::Complementary { smaller, larger }
            | Counterexample::ScaleEconomies { smaller, larger } => {
                format!("Y={} Y'={}", s(smaller), s(larger))
            }
            Counterexample::SingleContractSe {
                base,
                dropped,
                arriving,
            } => format!("Y={} x={} y={}", s(base), c(dropped), c(arriving)),
            Counterexample::DifferentGroup {
                base,
                added,
                dropped,
            } => format!("Y={} Z={} x={}", s(base), s(added), c(dropped)),
            Counterexample::OrdinalSe {
                worse,
                better,
                reinstated,
            } => format!("Y={} Y'={} Z={}", s(worse), s(better), s(reinstated)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub agent: AgentId,
    pub condition: Condition,
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

impl ConditionReport {
    fn from_search(agent: AgentId, condition: Condition, cx: Option<Counterexample>) -> Self {
        Self {
            agent,
            condition,
            holds: cx.is_none(),
            counterexample: cx,
        }
    }
}

/// Subsets of X_i in canonical order, with their chosen sets.
struct Domain {
    elems: Vec<usize>,
    subsets: Vec<(ContractSet, ContractSet)>,
}

impl Domain {
    fn new(m: &Market, i: AgentId) -> Result<Self> {
        m.ensure_agent_within_cap(i)?;
        let elems = m.canonical_elems(m.portfolio(i));
        let subsets = canonical_subsets(&elems)
            .map(|s| (s, m.choose(i, s)))
            .collect();
        Ok(Self { elems, subsets })
    }

    /// Proper subsets of `set`, canonical order.
    fn proper_subsets<'a>(
        &'a self,
        m: &'a Market,
        i: AgentId,
        set: ContractSet,
    ) -> impl Iterator<Item = (ContractSet, ContractSet)> + 'a {
        let inner: Vec<usize> = self
            .elems
            .iter()
            .copied()
            .filter(|&x| set.contains(x))
            .collect();
        canonical_subsets_owned(inner)
            .filter(move |&s| s != set)
            .map(move |s| (s, m.choose(i, s)))
    }
}

fn canonical_subsets_owned(elems: Vec<usize>) -> impl Iterator<Item = ContractSet> {
    let n = elems.len();
    (0..=n).flat_map(move |k| crate::bitset::Combinations::new(&elems, k).collect::<Vec<_>>())
}

/// Ordered pairs `Y ⊂ Y' ⊆ X_i`, first violation of `violates`.
fn first_nested_pair(
    m: &Market,
    i: AgentId,
    violates: impl Fn(ContractSet, ContractSet) -> bool,
) -> Result<Option<(ContractSet, ContractSet)>> {
    let dom = Domain::new(m, i)?;
    for &(larger, c_larger) in &dom.subsets {
        for (smaller, c_smaller) in dom.proper_subsets(m, i, larger) {
            if violates(c_smaller, c_larger) {
                return Ok(Some((smaller, larger)));
            }
        }
    }
    Ok(None)
}

/// C_i(Y) ⊆ C_i(Y') whenever Y ⊂ Y' ⊆ X_i.
pub fn check_complementary(m: &Market, i: AgentId) -> Result<ConditionReport> {
    let cx = first_nested_pair(m, i, |c, c2| !c.is_subset(c2))?
        .map(|(smaller, larger)| Counterexample::Complementary { smaller, larger });
    Ok(ConditionReport::from_search(
        i,
        Condition::Complementary,
        cx,
    ))
}

/// N(C_i(Y) \ C_i(Y')) ⊆ N(C_i(Y') \ C_i(Y)) whenever Y ⊂ Y' ⊆ X_i.
pub fn check_scale_economies(m: &Market, i: AgentId) -> Result<ConditionReport> {
    let cx = first_nested_pair(m, i, |c, c2| {
        !m.signers(c.difference(c2))
            .is_subset(m.signers(c2.difference(c)))
    })?
    .map(|(smaller, larger)| Counterexample::ScaleEconomies { smaller, larger });
    Ok(ConditionReport::from_search(
        i,
        Condition::ScaleEconomies,
        cx,
    ))
}

/// A contract is only dropped for a single arriving contract whose signer
/// set contains its own.
pub fn check_single_contract_se(m: &Market, i: AgentId) -> Result<ConditionReport> {
    let dom = Domain::new(m, i)?;
    let mut cx = None;
    'outer: for &(base, chosen) in &dom.subsets {
        for &arriving in dom.elems.iter().filter(|&&y| !base.contains(y)) {
            let after = m.choose(i, base.union(ContractSet::singleton(arriving)));
            for &dropped in dom.elems.iter().filter(|&&x| chosen.contains(x)) {
                if !after.contains(dropped)
                    && !m
                        .contract_signers(dropped)
                        .is_subset(m.contract_signers(arriving))
                {
                    cx = Some(Counterexample::SingleContractSe {
                        base,
                        dropped,
                        arriving,
                    });
                    break 'outer;
                }
            }
        }
    }
    Ok(ConditionReport::from_search(
        i,
        Condition::SingleContractSe,
        cx,
    ))
}

/// Adding contracts of other signer groups to a self-chosen set never
/// drops a contract.
pub fn check_different_group_complementary(m: &Market, i: AgentId) -> Result<ConditionReport> {
    let dom = Domain::new(m, i)?;
    let own = m.portfolio(i);
    let mut cx = None;
    'outer: for &(base, chosen) in &dom.subsets {
        if chosen != base {
            continue;
        }
        let rest: Vec<usize> = dom
            .elems
            .iter()
            .copied()
            .filter(|&x| !base.contains(x))
            .collect();
        debug_assert!(base.is_subset(own));
        for added in canonical_subsets_owned(rest) {
            if added.is_empty() {
                continue;
            }
            let after = m.choose(i, base.union(added));
            for &x in dom.elems.iter().filter(|&&x| base.contains(x)) {
                let group = m.contract_signers(x);
                if !after.contains(x) && added.iter().all(|z| m.contract_signers(z) != group) {
                    cx = Some(Counterexample::DifferentGroup {
                        base,
                        added,
                        dropped: x,
                    });
                    break 'outer;
                }
            }
        }
    }
    Ok(ConditionReport::from_search(
        i,
        Condition::DifferentGroupComplementary,
        cx,
    ))
}

/// After an improving swap between self-chosen sets, reinstating any
/// dropped contracts that involve partners absent from the new contracts
/// keeps the set self-chosen.
pub fn check_ordinal_scale_economies(m: &Market, i: AgentId) -> Result<ConditionReport> {
    let dom = Domain::new(m, i)?;
    let stable_sets: Vec<ContractSet> = dom
        .subsets
        .iter()
        .filter(|(s, c)| s == c)
        .map(|&(s, _)| s)
        .collect();
    let mut cx = None;
    'outer: for &better in &stable_sets {
        for &worse in &stable_sets {
            if m.compare_unchecked(i, better, worse) != Preferred::First {
                continue;
            }
            let new_partners = m.signers(better.difference(worse));
            let eligible: Vec<usize> = dom
                .elems
                .iter()
                .copied()
                .filter(|&x| {
                    worse.contains(x)
                        && !better.contains(x)
                        && !m.contract_signers(x).is_subset(new_partners)
                })
                .collect();
            for reinstated in canonical_subsets_owned(eligible) {
                let after = better.union(reinstated);
                if m.choose(i, after) != after {
                    cx = Some(Counterexample::OrdinalSe {
                        worse,
                        better,
                        reinstated,
                    });
                    break 'outer;
                }
            }
        }
    }
    Ok(ConditionReport::from_search(i, Condition::OrdinalSe, cx))
}

/// Violation of the one-contract-per-group structure: an acceptable
/// portfolio holding two contracts with the same signer set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupViolation {
    pub agent: AgentId,
    pub portfolio: ContractSet,
    pub first: usize,
    pub second: usize,
}

/// Every acceptable portfolio of every agent holds at most one contract per
/// signer group. Returns the first offending portfolio per agent.
pub fn check_one_contract_per_group(m: &Market) -> Vec<GroupViolation> {
    m.agents()
        .filter_map(|i| {
            m.preference(i).ranked().iter().find_map(|&p| {
                let members = m.canonical_elems(p);
                members.iter().enumerate().find_map(|(k, &a)| {
                    members[k + 1..]
                        .iter()
                        .find(|&&b| m.contract_signers(a) == m.contract_signers(b))
                        .map(|&b| GroupViolation {
                            agent: i,
                            portfolio: p,
                            first: a,
                            second: b,
                        })
                })
            })
        })
        .collect()
}

/// Agent-by-condition results plus the market-level group flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionTable {
    pub reports: Vec<ConditionReport>,
    pub group_violations: Vec<GroupViolation>,
}

impl ConditionTable {
    pub fn compute(m: &Market, conditions: &[Condition], exec: Exec) -> Result<Self> {
        m.ensure_within_cap()?;
        let jobs: Vec<(AgentId, Condition)> = m
            .agents()
            .flat_map(|i| conditions.iter().map(move |&c| (i, c)))
            .collect();
        let reports = exec
            .map(&jobs, |&(i, c)| c.check(m, i))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            reports,
            group_violations: check_one_contract_per_group(m),
        })
    }

    pub fn holds_for_all(&self, c: Condition) -> bool {
        self.reports
            .iter()
            .filter(|r| r.condition == c)
            .all(|r| r.holds)
    }

    pub fn get(&self, agent: AgentId, c: Condition) -> Option<&ConditionReport> {
        self.reports
            .iter()
            .find(|r| r.agent == agent && r.condition == c)
    }

    fn conditions(&self) -> Vec<Condition> {
        let mut cs: Vec<Condition> = Vec::new();
        for r in &self.reports {
            if !cs.contains(&r.condition) {
                cs.push(r.condition);
            }
        }
        cs
    }

    pub fn to_text(&self, m: &Market) -> String {
        let cs = self.conditions();
        let width = m
            .agent_names()
            .iter()
            .map(String::len)
            .max()
            .unwrap_or(0)
            .max("agent".len());
        let mut out = String::new();
        let _ = write!(out, "{:width$}", "agent");
        for c in &cs {
            let _ = write!(out, "  {}", c.as_str());
        }
        out.push('\n');
        for i in m.agents() {
            let mut row = format!("{:width$}", m.agent_name(i));
            for c in &cs {
                let cell = self
                    .get(i, *c)
                    .map_or("-", |r| if r.holds { "yes" } else { "no" });
                let _ = write!(row, "  {:w$}", cell, w = c.as_str().len());
            }
            out.push_str(row.trim_end());
            out.push('\n');
        }
        let failures: Vec<&ConditionReport> = self.reports.iter().filter(|r| !r.holds).collect();
        if !failures.is_empty() {
            out.push_str("\ncounterexamples:\n");
            for r in failures {
                let cx = r
                    .counterexample
                    .expect("failed report carries a counterexample");
                let _ = writeln!(
                    out,
                    "  {} {}: {}",
                    m.agent_name(r.agent),
                    r.condition,
                    cx.describe(m)
                );
            }
        }
        let _ = writeln!(
            out,
            "\none_contract_per_group: {}",
            if self.group_violations.is_empty() {
                "yes"
            } else {
                "no"
            }
        );
        for v in &self.group_violations {
            let _ = writeln!(
                out,
                "  {} accepts {} with {} and {} signed by the same group",
                m.agent_name(v.agent),
                m.format_set(v.portfolio),
                m.contract(v.first).id,
                m.contract(v.second).id
            );
        }
        out
    }

    pub fn to_structured(&self, m: &Market) -> String {
        let mut out = String::new();
        for r in &self.reports {
            let name = m.agent_name(r.agent);
            let _ = writeln!(out, "{name}.{}={}", r.condition, r.holds);
            if let Some(cx) = r.counterexample {
                let _ = writeln!(
                    out,
                    "{name}.{}.counterexample={}",
                    r.condition,
                    cx.describe(m)
                );
            }
        }
        let _ = writeln!(
            out,
            "one_contract_per_group={}",
            self.group_violations.is_empty()
        );
        for v in &self.group_violations {
            let _ = writeln!(
                out,
                "one_contract_per_group.{}={}",
                m.agent_name(v.agent),
                m.format_set(v.portfolio)
            );
        }
        out
    }
}

/// Fails with [`crate::Error::CapExceeded`] if any agent's domain is too large.
pub fn ensure_checkable(m: &Market) -> Result<()> {
    m.ensure_within_cap()?;
    for i in m.agents() {
        m.ensure_agent_within_cap(i)?;
    }
    Ok(())
}
