//! The market model: agents, multi-signer contracts and ranked portfolio
//! preferences, together with the set algebra and choice functions every
//! other module is built on.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::bitset::{AgentSet, ContractSet, MAX_INDEX};
use crate::error::{Diagnostic, Error, Result};

/// Largest contract count the exhaustive engines accept.
pub const MAX_CONTRACTS: usize = 24;
/// Largest agent count the exhaustive engines accept.
pub const MAX_AGENTS: usize = 12;

/// Dense agent index, assigned in file order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contract {
    pub id: String,
    pub signers: AgentSet,
}

/// Result of comparing two portfolios from one agent's point of view.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preferred {
    First,
    Second,
    Equal,
}

/// Position of a portfolio in an agent's total order. Smaller is better.
///
/// Listed portfolios come first by rank, then the empty set, then every
/// unlisted set ordered by cardinality and the sorted sequence of contract
/// id ranks.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Standing {
    Ranked(usize),
    Empty,
    Unacceptable(usize, Vec<usize>),
}

impl Standing {
    pub fn is_unacceptable(&self) -> bool {
        matches!(self, Standing::Unacceptable(..))
    }
}

/// One agent's ranked list of acceptable portfolios, best first.
#[derive(Clone, Debug, Default)]
pub struct Preference {
    ranked: Vec<ContractSet>,
    rank_of: HashMap<ContractSet, usize>,
}

impl Preference {
    fn new(ranked: Vec<ContractSet>) -> Self {
        let rank_of = ranked.iter().enumerate().map(|(r, &s)| (s, r)).collect();
        Self { ranked, rank_of }
    }

    pub fn ranked(&self) -> &[ContractSet] {
        &self.ranked
    }

    pub fn rank(&self, set: ContractSet) -> Option<usize> {
        self.rank_of.get(&set).copied()
    }

    pub fn is_acceptable(&self, set: ContractSet) -> bool {
        self.rank_of.contains_key(&set)
    }
}

impl PartialEq for Preference {
    fn eq(&self, other: &Self) -> bool {
        self.ranked == other.ranked
    }
}

impl Eq for Preference {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Market {
    agents: Vec<String>,
    contracts: Vec<Contract>,
    preferences: Vec<Preference>,
    /// X_i for every agent.
    portfolios: Vec<ContractSet>,
    /// Contract indices sorted by id.
    id_order: Vec<usize>,
    /// Position of each contract in `id_order`.
    id_rank: Vec<usize>,
}

impl Market {
    /// Builds a market from already-resolved parts, checking every invariant.
    pub fn from_parts(
        agents: Vec<String>,
        contracts: Vec<Contract>,
        ranked: Vec<Vec<ContractSet>>,
    ) -> Result<Self> {
        let mut diags = Vec::new();
        if agents.len() > MAX_INDEX {
            diags.push(Diagnostic::new(
                None,
                format!("at most {MAX_INDEX} agents are supported"),
            ));
        }
        if contracts.len() > MAX_INDEX {
            diags.push(Diagnostic::new(
                None,
                format!("at most {MAX_INDEX} contracts are supported"),
            ));
        }
        if !diags.is_empty() {
            return Err(Error::Invalid(diags));
        }
        let mut seen = HashMap::new();
        for name in &agents {
            if seen.insert(name.as_str(), ()).is_some() {
                diags.push(Diagnostic::new(None, format!("duplicate agent `{name}`")));
            }
        }
        let all_agents = AgentSet::full(agents.len());
        let mut seen = HashMap::new();
        for c in &contracts {
            if seen.insert(c.id.as_str(), ()).is_some() {
                diags.push(Diagnostic::new(
                    None,
                    format!("duplicate contract `{}`", c.id),
                ));
            }
            if c.signers.len() < 2 {
                diags.push(Diagnostic::new(
                    None,
                    format!("contract `{}` must have >=2 signers", c.id),
                ));
            }
            if !c.signers.is_subset(all_agents) {
                diags.push(Diagnostic::new(
                    None,
                    format!("contract `{}` references an unknown agent", c.id),
                ));
            }
        }
        if ranked.len() != agents.len() {
            diags.push(Diagnostic::new(
                None,
                format!(
                    "expected {} preferences, found {}",
                    agents.len(),
                    ranked.len()
                ),
            ));
        }
        if !diags.is_empty() {
            return Err(Error::Invalid(diags));
        }

        let portfolios: Vec<ContractSet> = (0..agents.len())
            .map(|i| {
                contracts
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.signers.contains(i))
                    .map(|(x, _)| x)
                    .collect()
            })
            .collect();
        let all_contracts = ContractSet::full(contracts.len());
        for (i, list) in ranked.iter().enumerate() {
            let mut seen = HashMap::new();
            for (r, &set) in list.iter().enumerate() {
                if set.is_empty() {
                    diags.push(Diagnostic::new(
                        None,
                        format!("preference of `{}`: entry {} is empty", agents[i], r + 1),
                    ));
                } else if !set.is_subset(all_contracts) {
                    diags.push(Diagnostic::new(
                        None,
                        format!(
                            "preference of `{}`: entry {} references an unknown contract",
                            agents[i],
                            r + 1
                        ),
                    ));
                } else if !set.is_subset(portfolios[i]) {
                    diags.push(Diagnostic::new(
                        None,
                        format!(
                            "preference of `{}`: entry {} not in X_i (contains a contract the agent does not sign)",
                            agents[i],
                            r + 1
                        ),
                    ));
                }
                if seen.insert(set, ()).is_some() {
                    diags.push(Diagnostic::new(
                        None,
                        format!("preference of `{}`: duplicate entry {}", agents[i], r + 1),
                    ));
                }
            }
        }
        if !diags.is_empty() {
            return Err(Error::Invalid(diags));
        }

        let mut id_order: Vec<usize> = (0..contracts.len()).collect();
        id_order.sort_by(|&a, &b| contracts[a].id.cmp(&contracts[b].id));
        let mut id_rank = vec![0; contracts.len()];
        for (pos, &x) in id_order.iter().enumerate() {
            id_rank[x] = pos;
        }
        Ok(Self {
            agents,
            contracts,
            preferences: ranked.into_iter().map(Preference::new).collect(),
            portfolios,
            id_order,
            id_rank,
        })
    }

    /// Same market with one agent's ranked list replaced.
    pub fn with_preference(&self, agent: AgentId, ranked: Vec<ContractSet>) -> Result<Self> {
        let mut lists: Vec<Vec<ContractSet>> =
            self.preferences.iter().map(|p| p.ranked.clone()).collect();
        lists[agent.0] = ranked;
        Self::from_parts(self.agents.clone(), self.contracts.clone(), lists)
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn contract_count(&self) -> usize {
        self.contracts.len()
    }

    pub fn agents(&self) -> impl ExactSizeIterator<Item = AgentId> + Clone {
        (0..self.agents.len()).map(AgentId)
    }

    pub fn agent_name(&self, agent: AgentId) -> &str {
        &self.agents[agent.0]
    }

    pub fn agent_names(&self) -> &[String] {
        &self.agents
    }

    pub fn agent_by_name(&self, name: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a == name).map(AgentId)
    }

    pub fn contracts(&self) -> &[Contract] {
        &self.contracts
    }

    pub fn contract(&self, index: usize) -> &Contract {
        &self.contracts[index]
    }

    pub fn contract_by_id(&self, id: &str) -> Option<usize> {
        self.contracts.iter().position(|c| c.id == id)
    }

    pub fn preference(&self, agent: AgentId) -> &Preference {
        &self.preferences[agent.0]
    }

    /// X, every contract in the market.
    pub fn all_contracts(&self) -> ContractSet {
        ContractSet::full(self.contracts.len())
    }

    pub fn all_agents(&self) -> AgentSet {
        AgentSet::full(self.agents.len())
    }

    /// X_i, the contracts agent `agent` signs.
    pub fn portfolio(&self, agent: AgentId) -> ContractSet {
        self.portfolios[agent.0]
    }

    pub fn contract_signers(&self, x: usize) -> AgentSet {
        self.contracts[x].signers
    }

    /// Contract indices sorted by contract id.
    pub fn id_order(&self) -> &[usize] {
        &self.id_order
    }

    /// Members of `set` sorted by contract id; the element order used by
    /// every canonical enumeration.
    pub fn canonical_elems(&self, set: ContractSet) -> Vec<usize> {
        self.id_order
            .iter()
            .copied()
            .filter(|&x| set.contains(x))
            .collect()
    }

    /// Canonical set order: ascending cardinality, then lexicographic on
    /// sorted contract ids.
    pub fn canonical_cmp(&self, a: ContractSet, b: ContractSet) -> Ordering {
        a.len()
            .cmp(&b.len())
            .then_with(|| self.id_ranks(a).cmp(&self.id_ranks(b)))
    }

    fn id_ranks(&self, set: ContractSet) -> Vec<usize> {
        let mut ranks: Vec<usize> = set.iter().map(|x| self.id_rank[x]).collect();
        ranks.sort_unstable();
        ranks
    }

    /// Fails when the market exceeds the exhaustive engines' size caps.
    pub fn ensure_within_cap(&self) -> Result<()> {
        if self.contracts.len() > MAX_CONTRACTS {
            return Err(Error::CapExceeded {
                what: "contract count",
                size: self.contracts.len(),
                cap: MAX_CONTRACTS,
            });
        }
        if self.agents.len() > MAX_AGENTS {
            return Err(Error::CapExceeded {
                what: "agent count",
                size: self.agents.len(),
                cap: MAX_AGENTS,
            });
        }
        Ok(())
    }

    pub fn ensure_agent_within_cap(&self, agent: AgentId) -> Result<()> {
        let n = self.portfolio(agent).len();
        if n > MAX_CONTRACTS {
            return Err(Error::CapExceeded {
                what: "agent portfolio size",
                size: n,
                cap: MAX_CONTRACTS,
            });
        }
        Ok(())
    }

    /// Y_i = {x in Y | i signs x}.
    #[inline]
    pub fn restrict(&self, set: ContractSet, agent: AgentId) -> ContractSet {
        set.intersection(self.portfolios[agent.0])
    }

    /// Y_J, the union of Y_i over i in J.
    pub fn restrict_group(&self, set: ContractSet, group: AgentSet) -> ContractSet {
        group.iter().fold(ContractSet::EMPTY, |acc, i| {
            acc.union(self.restrict(set, AgentId(i)))
        })
    }

    /// N(Y), every agent signing some contract of Y.
    pub fn signers(&self, set: ContractSet) -> AgentSet {
        set.iter().fold(AgentSet::EMPTY, |acc, x| {
            acc.union(self.contracts[x].signers)
        })
    }

    /// Where `set` sits in the agent's total order. `set` must be a subset
    /// of X_i.
    pub fn standing(&self, agent: AgentId, set: ContractSet) -> Standing {
        debug_assert!(set.is_subset(self.portfolio(agent)));
        if let Some(r) = self.preferences[agent.0].rank(set) {
            Standing::Ranked(r)
        } else if set.is_empty() {
            Standing::Empty
        } else {
            Standing::Unacceptable(set.len(), self.id_ranks(set))
        }
    }

    /// Strict total order over subsets of X_i.
    pub fn compare(&self, agent: AgentId, a: ContractSet, b: ContractSet) -> Result<Preferred> {
        let own = self.portfolio(agent);
        for s in [a, b] {
            if !s.is_subset(own) {
                return Err(Error::NotAgentPortfolio {
                    agent: self.agent_name(agent).to_owned(),
                    set: self.format_set(s),
                });
            }
        }
        Ok(self.compare_unchecked(agent, a, b))
    }

    pub(crate) fn compare_unchecked(
        &self,
        agent: AgentId,
        a: ContractSet,
        b: ContractSet,
    ) -> Preferred {
        if a == b {
            return Preferred::Equal;
        }
        match self.standing(agent, a).cmp(&self.standing(agent, b)) {
            Ordering::Less => Preferred::First,
            Ordering::Greater => Preferred::Second,
            Ordering::Equal => unreachable!("distinct sets share a standing"),
        }
    }

    /// `a` strictly preferred to `b` by `agent`; both must lie in X_i.
    #[inline]
    pub fn prefers(&self, agent: AgentId, a: ContractSet, b: ContractSet) -> bool {
        self.compare_unchecked(agent, a, b) == Preferred::First
    }

    /// C_i(Y): the first ranked portfolio contained in Y_i, else the empty set.
    pub fn choose(&self, agent: AgentId, set: ContractSet) -> ContractSet {
        let avail = self.restrict(set, agent);
        self.preferences[agent.0]
            .ranked
            .iter()
            .copied()
            .find(|p| p.is_subset(avail))
            .unwrap_or(ContractSet::EMPTY)
    }

    /// Formats a set as `{id,id}` with ids in sorted order.
    pub fn format_set(&self, set: ContractSet) -> String {
        let ids: Vec<&str> = self
            .canonical_elems(set)
            .into_iter()
            .map(|x| self.contracts[x].id.as_str())
            .collect();
        format!("{{{}}}", ids.join(","))
    }

    pub fn format_agents(&self, set: AgentSet) -> String {
        let names: Vec<&str> = set.iter().map(|i| self.agents[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Parses a `{id,id}` literal against this market's contract ids.
    pub fn parse_set(&self, text: &str) -> Result<ContractSet> {
        let ids = crate::text::parse_set_tokens(text).map_err(Error::Parse)?;
        let mut set = ContractSet::EMPTY;
        for id in ids {
            let x = self
                .contract_by_id(&id)
                .ok_or_else(|| Error::Parse(format!("unknown contract `{id}`")))?;
            set.insert(x);
        }
        Ok(set)
    }

    pub fn parse_agent(&self, name: &str) -> Result<AgentId> {
        self.agent_by_name(name)
            .ok_or_else(|| Error::Parse(format!("unknown agent `{name}`")))
    }
}

/// Displays a contract set through its market.
pub struct SetDisplay<'a>(pub &'a Market, pub ContractSet);

impl fmt::Display for SetDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.format_set(self.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn set(m: &Market, s: &str) -> ContractSet {
        m.parse_set(s).unwrap()
    }

    #[test]
    fn restrict_and_signers_on_market3() {
        let m = fixtures::market3();
        let i1 = m.parse_agent("i1").unwrap();
        assert_eq!(m.restrict(set(&m, "{x,z,u}"), i1), set(&m, "{x,u}"));
        assert_eq!(m.restrict(ContractSet::EMPTY, i1), ContractSet::EMPTY);
        let only_i1: AgentSet = [i1.0].into_iter().collect();
        assert_eq!(
            m.restrict_group(m.all_contracts(), only_i1),
            set(&m, "{x,y,u}")
        );
        assert_eq!(
            m.restrict_group(set(&m, "{x,y}"), AgentSet::EMPTY),
            ContractSet::EMPTY
        );
        assert_eq!(
            m.restrict_group(set(&m, "{y,z}"), m.all_agents()),
            set(&m, "{y,z}")
        );
        assert_eq!(m.format_agents(m.signers(set(&m, "{y,z}"))), "{i1,i2,i3}");
        assert_eq!(m.signers(ContractSet::EMPTY), AgentSet::EMPTY);
    }

    #[test]
    fn restrict_and_signers_on_market4() {
        let m = fixtures::market4();
        let carol = m.parse_agent("Carol").unwrap();
        assert_eq!(m.restrict(set(&m, "{y,z,u}"), carol), set(&m, "{z,u}"));
        assert_eq!(m.format_agents(m.signers(set(&m, "{x}"))), "{Ana,Bob}");
    }

    #[test]
    fn compare_on_market1() {
        let m = fixtures::market1();
        let ana = m.parse_agent("Ana").unwrap();
        assert_eq!(
            m.compare(ana, set(&m, "{x,y}"), set(&m, "{x}")).unwrap(),
            Preferred::First
        );
        assert_eq!(
            m.compare(ana, set(&m, "{x}"), set(&m, "{x}")).unwrap(),
            Preferred::Equal
        );
        assert_eq!(
            m.compare(ana, set(&m, "{y}"), ContractSet::EMPTY).unwrap(),
            Preferred::Second
        );
    }

    #[test]
    fn compare_rejects_foreign_sets() {
        let m = fixtures::market3();
        let i3 = m.parse_agent("i3").unwrap();
        assert!(matches!(
            m.compare(i3, set(&m, "{x}"), ContractSet::EMPTY),
            Err(Error::NotAgentPortfolio { .. })
        ));
    }

    #[test]
    fn completion_rule_orders_unacceptable_sets() {
        let m = fixtures::market2();
        let bob = m.parse_agent("Bob").unwrap();
        // unlisted: {x}, {z}, {x,y}, {y,z}, {x,y,z}
        assert!(m.prefers(bob, ContractSet::EMPTY, set(&m, "{x}")));
        assert!(m.prefers(bob, set(&m, "{x}"), set(&m, "{z}")));
        assert!(m.prefers(bob, set(&m, "{z}"), set(&m, "{x,y}")));
        assert!(m.prefers(bob, set(&m, "{x,y}"), set(&m, "{y,z}")));
        assert!(m.prefers(bob, set(&m, "{y,z}"), set(&m, "{x,y,z}")));
    }

    #[test]
    fn choose_examples() {
        let m1 = fixtures::market1();
        let bob = m1.parse_agent("Bob").unwrap();
        assert_eq!(m1.choose(bob, set(&m1, "{x,y}")), set(&m1, "{y}"));
        assert_eq!(m1.choose(bob, ContractSet::EMPTY), ContractSet::EMPTY);
        let m2 = fixtures::market2();
        let ana = m2.parse_agent("Ana").unwrap();
        assert_eq!(m2.choose(ana, set(&m2, "{x,y,z}")), set(&m2, "{x,y}"));
    }

    #[test]
    fn format_and_parse_sets() {
        let m = fixtures::market4();
        assert_eq!(m.format_set(set(&m, "{z,y,u}")), "{u,y,z}");
        assert_eq!(m.format_set(ContractSet::EMPTY), "{}");
        assert!(m.parse_set("{q}").is_err());
        assert!(m.parse_set("{x, y}").is_err());
    }
}
