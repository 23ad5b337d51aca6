//! Seeded random markets and agent-target specifications.
//!
//! All randomness comes from a ChaCha8 stream seeded with the caller's
//! seed, so output is a pure function of the parameters.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agent_target::{AtmContract, AtmSpec, Cooperation, Target};
use crate::bitset::{canonical_subsets, AgentSet, ContractSet, CoopSet};
use crate::conditions::Condition;
use crate::error::{Error, Result};
use crate::market::{AgentId, Contract, Market, MAX_AGENTS, MAX_CONTRACTS};

/// Rejection-sampling budget per agent.
pub const MAX_ATTEMPTS: usize = 10_000;

/// Above this portfolio size acceptable sets are drawn one by one instead
/// of thinning the full power set.
const FAMILY_ENUMERATION_LIMIT: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomMarketParams {
    pub agents: usize,
    pub contracts: usize,
    pub max_signers: usize,
    pub max_portfolios: usize,
    pub seed: u64,
}

impl RandomMarketParams {
    pub fn validate(&self) -> Result<()> {
        if self.agents > MAX_AGENTS {
            return Err(Error::CapExceeded {
                what: "agent count",
                size: self.agents,
                cap: MAX_AGENTS,
            });
        }
        if self.contracts > MAX_CONTRACTS {
            return Err(Error::CapExceeded {
                what: "contract count",
                size: self.contracts,
                cap: MAX_CONTRACTS,
            });
        }
        if self.contracts > 0 && self.agents < 2 {
            return Err(Error::Parse("contracts need at least two agents".into()));
        }
        if self.max_signers < 2 {
            return Err(Error::Parse("max signers must be at least 2".into()));
        }
        Ok(())
    }
}

/// Per-agent rejection-sampling counts.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SamplingStats {
    pub attempts: Vec<usize>,
}

impl SamplingStats {
    pub fn total(&self) -> usize {
        self.attempts.iter().sum()
    }
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    let width = n.to_string().len();
    (1..=n).map(|k| format!("{prefix}{k:0width$}")).collect()
}

fn random_signers(rng: &mut ChaCha8Rng, agents: usize, max_signers: usize) -> AgentSet {
    let size = rng.gen_range(2..=max_signers.min(agents));
    let mut all: Vec<usize> = (0..agents).collect();
    all.shuffle(rng);
    all.into_iter().take(size).collect()
}

/// A uniformly thinned family of nonempty subsets of `own`, shuffled into a
/// ranking and truncated to `max_portfolios`.
pub fn random_ranking(
    rng: &mut ChaCha8Rng,
    own: ContractSet,
    max_portfolios: usize,
) -> Vec<ContractSet> {
    let elems: Vec<usize> = own.iter().collect();
    let mut family: Vec<ContractSet> = if elems.len() <= FAMILY_ENUMERATION_LIMIT {
        canonical_subsets(&elems)
            .skip(1)
            .filter(|_| rng.gen_bool(0.5))
            .collect()
    } else {
        let mut picked = Vec::new();
        for _ in 0..max_portfolios {
            let s: ContractSet = elems
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            if !s.is_empty() && !picked.contains(&s) {
                picked.push(s);
            }
        }
        picked
    };
    family.shuffle(rng);
    family.truncate(max_portfolios);
    family
}

/// Random market, no condition filter.
pub fn random_market(params: &RandomMarketParams) -> Result<Market> {
    random_market_filtered(params, None).map(|(m, _)| m)
}

/// Random market whose agents all satisfy `condition`. Each agent's ranking
/// is redrawn until it passes, up to [`MAX_ATTEMPTS`] draws per agent.
pub fn random_market_filtered(
    params: &RandomMarketParams,
    condition: Option<Condition>,
) -> Result<(Market, SamplingStats)> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let agent_names = ids("a", params.agents);
    let contracts: Vec<Contract> = ids("x", params.contracts)
        .into_iter()
        .map(|id| Contract {
            id,
            signers: random_signers(&mut rng, params.agents, params.max_signers),
        })
        .collect();
    let owns: Vec<ContractSet> = (0..params.agents)
        .map(|i| {
            (0..contracts.len())
                .filter(|&x| contracts[x].signers.contains(i))
                .collect()
        })
        .collect();
    let ranked = owns
        .iter()
        .map(|&own| random_ranking(&mut rng, own, params.max_portfolios))
        .collect();
    let mut market = Market::from_parts(agent_names, contracts, ranked)?;
    let mut stats = SamplingStats {
        attempts: vec![1; params.agents],
    };
    let Some(condition) = condition else {
        return Ok((market, stats));
    };
    for (i, &own) in owns.iter().enumerate() {
        let agent = AgentId(i);
        loop {
            if condition.check(&market, agent)?.holds {
                break;
            }
            if stats.attempts[i] >= MAX_ATTEMPTS {
                return Err(Error::SamplingExhausted {
                    agent: market.agent_name(agent).to_owned(),
                    condition: condition.as_str(),
                    attempts: stats.total(),
                });
            }
            stats.attempts[i] += 1;
            let ranking = random_ranking(&mut rng, own, params.max_portfolios);
            market = market.with_preference(agent, ranking)?;
        }
    }
    Ok((market, stats))
}

/// Size limits for random agent-target specifications.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomAtmParams {
    pub agents: usize,
    pub max_cooperations: usize,
    pub max_contracts: usize,
    pub max_targets_per_agent: usize,
    pub max_implementers: usize,
    pub seed: u64,
}

impl Default for RandomAtmParams {
    fn default() -> Self {
        Self {
            agents: 3,
            max_cooperations: 5,
            max_contracts: 5,
            max_targets_per_agent: 4,
            max_implementers: 3,
            seed: 0,
        }
    }
}

fn random_subset(rng: &mut ChaCha8Rng, items: &[usize]) -> Vec<usize> {
    loop {
        let pick: Vec<usize> = items
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.5))
            .collect();
        if !pick.is_empty() {
            return pick;
        }
    }
}

pub fn random_atm_spec(params: &RandomAtmParams) -> AtmSpec {
    assert!(params.agents >= 2, "agent-target specs need two agents");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let agents = ids("a", params.agents);
    let n_coop = rng.gen_range(1..=params.max_cooperations.max(1));
    let cooperations: Vec<Cooperation> = ids("e", n_coop)
        .into_iter()
        .map(|id| Cooperation {
            id,
            implementers: random_signers(&mut rng, params.agents, params.max_implementers),
        })
        .collect();
    let n_contracts = rng.gen_range(1..=params.max_contracts.max(1));
    let contracts = ids("x", n_contracts)
        .into_iter()
        .map(|id| {
            let seed_coop = rng.gen_range(0..n_coop);
            let group = cooperations[seed_coop].implementers;
            let same: Vec<usize> = (0..n_coop)
                .filter(|&e| cooperations[e].implementers == group)
                .collect();
            AtmContract {
                id,
                cooperations: random_subset(&mut rng, &same)
                    .into_iter()
                    .collect::<CoopSet>(),
            }
        })
        .collect();
    let mut targets = Vec::new();
    for i in 0..params.agents {
        let mine: Vec<usize> = (0..n_coop)
            .filter(|&e| cooperations[e].implementers.contains(i))
            .collect();
        if mine.is_empty() {
            continue;
        }
        let k = rng.gen_range(0..=params.max_targets_per_agent);
        for id in ids("t", k) {
            targets.push(Target {
                id,
                agent: AgentId(i),
                required: random_subset(&mut rng, &mine).into_iter().collect(),
            });
        }
    }
    AtmSpec {
        agents,
        cooperations,
        contracts,
        targets,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::market_to_text;

    fn params(seed: u64) -> RandomMarketParams {
        RandomMarketParams {
            agents: 3,
            contracts: 4,
            max_signers: 3,
            max_portfolios: 4,
            seed,
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let a = market_to_text(&random_market(&params(42)).unwrap());
        let b = market_to_text(&random_market(&params(42)).unwrap());
        assert_eq!(a, b);
        let c = market_to_text(&random_market(&params(43)).unwrap());
        assert_ne!(a, c);
    }

    #[test]
    fn filtered_markets_pass_their_condition() {
        for seed in 0..10 {
            let (m, stats) =
                random_market_filtered(&params(seed), Some(Condition::ScaleEconomies)).unwrap();
            assert!(stats.total() >= 3);
            for i in m.agents() {
                assert!(Condition::ScaleEconomies.check(&m, i).unwrap().holds);
            }
        }
    }

    #[test]
    fn caps_enforced() {
        let mut p = params(0);
        p.contracts = MAX_CONTRACTS + 1;
        assert!(matches!(random_market(&p), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn random_specs_compile() {
        for seed in 0..20 {
            let spec = random_atm_spec(&RandomAtmParams {
                seed,
                ..Default::default()
            });
            spec.compile().unwrap();
        }
    }
}
