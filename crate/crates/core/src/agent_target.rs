//! Agent-target markets.
//!
//! Contracts bundle elementary cooperations that share one implementer set,
//! and each agent pursues targets that each need a set of cooperations
//! involving it. An agent ranks portfolios by the targets they achieve:
//! more targets first (ties broken lexicographically on sorted target ids),
//! then fewer contracts, then sorted contract ids. Portfolios achieving no
//! target are unacceptable.
//!
//! File format:
//!
//! ```text
//! agents A B C
//! coop e1 A B
//! coop e2 A C
//! contract x e1
//! contract y e2
//! target A t e1 e2
//! ```

use std::cmp::Reverse;
use std::collections::{HashMap, HashSet};

use crate::bitset::{canonical_subsets, AgentSet, ContractSet, CoopSet, MAX_INDEX};
use crate::error::{Diagnostic, Error, Result};
use crate::market::{AgentId, Contract, Market};
use crate::text::{is_token, tokens};

/// Largest X_i for which a full ranked list is materialized.
pub const MAX_INDUCED_CONTRACTS: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cooperation {
    pub id: String,
    pub implementers: AgentSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtmContract {
    pub id: String,
    pub cooperations: CoopSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Target {
    pub id: String,
    pub agent: AgentId,
    pub required: CoopSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct AtmSpec {
    pub agents: Vec<String>,
    pub cooperations: Vec<Cooperation>,
    pub contracts: Vec<AtmContract>,
    pub targets: Vec<Target>,
}

impl AtmSpec {
    /// Parses and validates an agent-target file.
    pub fn parse(text: &str) -> Result<Self> {
        let mut diags = Vec::new();
        let mut spec = AtmSpec::default();
        let mut agent_ix: HashMap<String, usize> = HashMap::new();
        let mut coop_ix: HashMap<String, usize> = HashMap::new();
        let mut contract_ids: HashSet<String> = HashSet::new();
        let mut target_ids: HashSet<(usize, String)> = HashSet::new();

        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let toks = tokens(line);
            let Some((&head, rest)) = toks.split_first() else {
                continue;
            };
            if let Some(bad) = rest.iter().find(|t| !is_token(t)) {
                diags.push(Diagnostic::at(line_no, format!("invalid token `{bad}`")));
                continue;
            }
            match head {
                "agents" if !rest.is_empty() => {
                    for name in rest {
                        if agent_ix.contains_key(*name) {
                            diags
                                .push(Diagnostic::at(line_no, format!("duplicate agent `{name}`")));
                        } else {
                            agent_ix.insert((*name).to_owned(), spec.agents.len());
                            spec.agents.push((*name).to_owned());
                        }
                    }
                }
                "coop" if rest.len() >= 2 => {
                    let id = rest[0];
                    let mut implementers = AgentSet::EMPTY;
                    for name in &rest[1..] {
                        match agent_ix.get(*name) {
                            Some(&i) => implementers.insert(i),
                            None => diags
                                .push(Diagnostic::at(line_no, format!("unknown agent `{name}`"))),
                        }
                    }
                    if implementers.len() < 2 {
                        diags.push(Diagnostic::at(
                            line_no,
                            format!("cooperation `{id}` must have >=2 implementers"),
                        ));
                    }
                    if coop_ix.contains_key(id) {
                        diags.push(Diagnostic::at(
                            line_no,
                            format!("duplicate cooperation `{id}`"),
                        ));
                    } else {
                        coop_ix.insert(id.to_owned(), spec.cooperations.len());
                        spec.cooperations.push(Cooperation {
                            id: id.to_owned(),
                            implementers,
                        });
                    }
                }
                "contract" if rest.len() >= 2 => {
                    let id = rest[0];
                    let mut coops = CoopSet::EMPTY;
                    for c in &rest[1..] {
                        match coop_ix.get(*c) {
                            Some(&e) => coops.insert(e),
                            None => diags.push(Diagnostic::at(
                                line_no,
                                format!("unknown cooperation `{c}`"),
                            )),
                        }
                    }
                    let groups: HashSet<AgentSet> = coops
                        .iter()
                        .map(|e| spec.cooperations[e].implementers)
                        .collect();
                    if groups.len() > 1 {
                        diags.push(Diagnostic::at(
                            line_no,
                            format!("contract `{id}` must have uniform signer set"),
                        ));
                    }
                    if !contract_ids.insert(id.to_owned()) {
                        diags.push(Diagnostic::at(
                            line_no,
                            format!("duplicate contract `{id}`"),
                        ));
                    }
                    spec.contracts.push(AtmContract {
                        id: id.to_owned(),
                        cooperations: coops,
                    });
                }
                "target" if rest.len() >= 3 => {
                    let (name, id) = (rest[0], rest[1]);
                    let Some(&agent) = agent_ix.get(name) else {
                        diags.push(Diagnostic::at(line_no, format!("unknown agent `{name}`")));
                        continue;
                    };
                    let mut required = CoopSet::EMPTY;
                    for c in &rest[2..] {
                        match coop_ix.get(*c) {
                            Some(&e) if spec.cooperations[e].implementers.contains(agent) => {
                                required.insert(e)
                            }
                            Some(_) => diags.push(Diagnostic::at(
                                line_no,
                                format!("cooperation `{c}` does not involve `{name}`"),
                            )),
                            None => diags.push(Diagnostic::at(
                                line_no,
                                format!("unknown cooperation `{c}`"),
                            )),
                        }
                    }
                    if !target_ids.insert((agent, id.to_owned())) {
                        diags.push(Diagnostic::at(
                            line_no,
                            format!("duplicate target `{id}` for `{name}`"),
                        ));
                    }
                    spec.targets.push(Target {
                        id: id.to_owned(),
                        agent: AgentId(agent),
                        required,
                    });
                }
                "agents" | "coop" | "contract" | "target" => {
                    diags.push(Diagnostic::at(
                        line_no,
                        format!("too few arguments for `{head}`"),
                    ));
                }
                other => diags.push(Diagnostic::at(
                    line_no,
                    format!("unknown directive `{other}`"),
                )),
            }
        }
        for (what, n) in [
            ("agents", spec.agents.len()),
            ("cooperations", spec.cooperations.len()),
            ("contracts", spec.contracts.len()),
        ] {
            if n > MAX_INDEX {
                diags.push(Diagnostic::new(
                    None,
                    format!("at most {MAX_INDEX} {what} are supported"),
                ));
            }
        }
        if diags.is_empty() {
            Ok(spec)
        } else {
            Err(Error::Invalid(diags))
        }
    }

    /// Common implementer set of a contract's cooperations.
    pub fn contract_signers(&self, x: usize) -> AgentSet {
        self.contracts[x]
            .cooperations
            .iter()
            .next()
            .map_or(AgentSet::EMPTY, |e| self.cooperations[e].implementers)
    }

    /// Contracts involving `agent`.
    pub fn agent_contracts(&self, agent: AgentId) -> ContractSet {
        (0..self.contracts.len())
            .filter(|&x| self.contract_signers(x).contains(agent.0))
            .collect()
    }

    fn covered(&self, y: ContractSet) -> CoopSet {
        y.iter().fold(CoopSet::EMPTY, |acc, x| {
            acc.union(self.contracts[x].cooperations)
        })
    }

    /// T_i(Y): target indices of `agent` whose required cooperations the
    /// contracts of `y` cover, ordered by target id.
    pub fn achieved_targets(&self, agent: AgentId, y: ContractSet) -> Vec<usize> {
        let covered = self.covered(y);
        let mut hit: Vec<usize> = self
            .targets
            .iter()
            .enumerate()
            .filter(|(_, t)| t.agent == agent && t.required.is_subset(covered))
            .map(|(k, _)| k)
            .collect();
        hit.sort_by(|&a, &b| self.targets[a].id.cmp(&self.targets[b].id));
        hit
    }

    fn contract_id_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.contracts.len()).collect();
        order.sort_by(|&a, &b| self.contracts[a].id.cmp(&self.contracts[b].id));
        order
    }

    /// Ranked acceptable portfolios of `agent`, best first.
    pub fn induce_preference(&self, agent: AgentId) -> Result<Vec<ContractSet>> {
        let own = self.agent_contracts(agent);
        if own.len() > MAX_INDUCED_CONTRACTS {
            return Err(Error::CapExceeded {
                what: "agent portfolio size",
                size: own.len(),
                cap: MAX_INDUCED_CONTRACTS,
            });
        }
        let order = self.contract_id_order();
        let elems: Vec<usize> = order.iter().copied().filter(|&x| own.contains(x)).collect();
        let mut keyed: Vec<_> = canonical_subsets(&elems)
            .filter_map(|y| {
                let achieved = self.achieved_targets(agent, y);
                if achieved.is_empty() {
                    return None;
                }
                let target_ids: Vec<String> = achieved
                    .iter()
                    .map(|&t| self.targets[t].id.clone())
                    .collect();
                let contract_ids: Vec<&str> = order
                    .iter()
                    .filter(|&&x| y.contains(x))
                    .map(|&x| self.contracts[x].id.as_str())
                    .collect();
                Some((
                    (Reverse(achieved.len()), target_ids, y.len(), contract_ids),
                    y,
                ))
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(keyed.into_iter().map(|(_, y)| y).collect())
    }

    /// The equivalent core market.
    pub fn compile(&self) -> Result<Market> {
        let contracts = (0..self.contracts.len())
            .map(|x| Contract {
                id: self.contracts[x].id.clone(),
                signers: self.contract_signers(x),
            })
            .collect();
        let ranked = (0..self.agents.len())
            .map(|i| self.induce_preference(AgentId(i)))
            .collect::<Result<Vec<_>>>()?;
        Market::from_parts(self.agents.clone(), contracts, ranked)
    }
}

/// Exhaustively checks that the compiled preference of `agent` honours
/// both ranking assumptions: strictly more targets is strictly better, and
/// with equal targets a strict subset is strictly better.
pub fn check_assumptions(spec: &AtmSpec, market: &Market, agent: AgentId) -> Result<(), String> {
    let own = market.portfolio(agent);
    let subsets: Vec<(ContractSet, HashSet<usize>)> = crate::bitset::submasks(own)
        .map(|y| (y, spec.achieved_targets(agent, y).into_iter().collect()))
        .collect();
    for (y, ty) in &subsets {
        for (y2, ty2) in &subsets {
            let more_targets = ty2.is_subset(ty) && ty2.len() < ty.len();
            let fewer_contracts = ty == ty2 && y.is_subset(*y2) && y != y2;
            if (more_targets || fewer_contracts) && !market.prefers(agent, *y, *y2) {
                return Err(format!(
                    "{} does not rank {} above {}",
                    market.agent_name(agent),
                    market.format_set(*y),
                    market.format_set(*y2)
                ));
            }
        }
    }
    Ok(())
}
