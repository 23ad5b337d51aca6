//! Brute-force reference implementations and seeded market corpora shared by
//! the integration suites.
//!
//! The oracle works on raw `u64` masks and the market's ranked lists only.
//! It does not call the library's choice function, comparison or search
//! code, so agreement between the two is evidence rather than tautology.

#![allow(dead_code)]

pub mod golden;

use multimatch::random::{random_market_filtered, RandomMarketParams};
use multimatch::{AgentId, AgentOrder, Condition, ContractSet, Error, Market};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cs(bits: u64) -> ContractSet {
    ContractSet::from_bits(bits)
}

/// All submasks of `mask`, including 0 and `mask`.
pub fn subsets(mask: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut s = mask;
    loop {
        out.push(s);
        if s == 0 {
            break;
        }
        s = (s - 1) & mask;
    }
    out
}

fn is_sub(a: u64, b: u64) -> bool {
    a & !b == 0
}

pub struct Oracle<'m> {
    pub m: &'m Market,
    pub all: u64,
    signers: Vec<u64>,
    own: Vec<u64>,
    ranked: Vec<Vec<u64>>,
}

/// Sort key for a portfolio, smaller is better: listed sets by rank, then
/// the empty set, then unlisted sets by size and sorted id strings.
type Key = (u8, usize, usize, Vec<String>);

impl<'m> Oracle<'m> {
    pub fn new(m: &'m Market) -> Self {
        let n = m.contract_count();
        let signers = (0..n).map(|x| m.contract(x).signers.bits()).collect();
        let own = m
            .agents()
            .map(|i| {
                (0..n)
                    .filter(|&x| m.contract(x).signers.contains(i.0))
                    .fold(0u64, |acc, x| acc | 1 << x)
            })
            .collect();
        let ranked = m
            .agents()
            .map(|i| m.preference(i).ranked().iter().map(|s| s.bits()).collect())
            .collect();
        Self {
            m,
            all: if n == 0 { 0 } else { u64::MAX >> (64 - n) },
            signers,
            own,
            ranked,
        }
    }

    pub fn agents(&self) -> std::ops::Range<usize> {
        0..self.own.len()
    }

    pub fn own(&self, i: usize) -> u64 {
        self.own[i]
    }

    pub fn key(&self, i: usize, s: u64) -> Key {
        if let Some(r) = self.ranked[i].iter().position(|&p| p == s) {
            return (0, r, 0, Vec::new());
        }
        if s == 0 {
            return (1, 0, 0, Vec::new());
        }
        let mut ids: Vec<String> = (0..64)
            .filter(|x| s >> x & 1 == 1)
            .map(|x| self.m.contract(x).id.clone())
            .collect();
        ids.sort();
        (2, 0, s.count_ones() as usize, ids)
    }

    pub fn better(&self, i: usize, a: u64, b: u64) -> bool {
        self.key(i, a) < self.key(i, b)
    }

    /// Best subset of `y ∩ X_i` by full scan.
    pub fn choose(&self, i: usize, y: u64) -> u64 {
        subsets(y & self.own[i])
            .into_iter()
            .min_by_key(|&s| self.key(i, s))
            .unwrap()
    }

    pub fn group(&self, z: u64) -> Vec<usize> {
        self.agents().filter(|&i| self.own[i] & z != 0).collect()
    }

    pub fn signers_of(&self, s: u64) -> u64 {
        (0..64)
            .filter(|x| s >> x & 1 == 1)
            .fold(0, |acc, x| acc | self.signers[x])
    }

    pub fn ir(&self, y: u64) -> bool {
        self.agents().all(|i| self.choose(i, y) == y & self.own[i])
    }

    pub fn blocks(&self, y: u64) -> Vec<u64> {
        subsets(self.all & !y)
            .into_iter()
            .filter(|&z| z != 0)
            .filter(|&z| {
                self.group(z)
                    .into_iter()
                    .all(|i| is_sub(z & self.own[i], self.choose(i, y | z)))
            })
            .collect()
    }

    pub fn is_blocked(&self, y: u64) -> bool {
        !self.blocks(y).is_empty()
    }

    pub fn weak_setwise_pair(&self, y: u64, z: u64, ys: u64) -> bool {
        z != 0
            && z & y == 0
            && is_sub(ys, y | z)
            && self.group(z).into_iter().all(|i| {
                let mine = ys & self.own[i];
                mine == self.choose(i, y | z) && is_sub(z & self.own[i], mine)
            })
    }

    /// Direct search over every (Z, Y*) pair.
    pub fn is_weak_setwise_blocked(&self, y: u64) -> bool {
        subsets(self.all & !y).into_iter().any(|z| {
            z != 0
                && subsets(y | z)
                    .into_iter()
                    .any(|ys| self.weak_setwise_pair(y, z, ys))
        })
    }

    pub fn setwise_pair(&self, y: u64, z: u64, ys: u64) -> bool {
        z != 0
            && z & y == 0
            && is_sub(z, ys)
            && is_sub(ys, y | z)
            && self.group(z).into_iter().all(|i| {
                let mine = ys & self.own[i];
                self.better(i, mine, y & self.own[i]) && self.choose(i, ys) == mine
            })
    }

    /// Direct search over every (Z, Y*) pair.
    pub fn is_setwise_blocked(&self, y: u64) -> bool {
        subsets(self.all & !y).into_iter().any(|z| {
            z != 0
                && subsets(y | z)
                    .into_iter()
                    .any(|ys| self.setwise_pair(y, z, ys))
        })
    }

    pub fn ir_outcomes(&self) -> Vec<u64> {
        subsets(self.all)
            .into_iter()
            .filter(|&y| self.ir(y))
            .collect()
    }

    pub fn dominates(&self, a: u64, b: u64) -> bool {
        let mut strict = false;
        for i in self.agents() {
            let (ai, bi) = (a & self.own[i], b & self.own[i]);
            if ai == bi {
                continue;
            }
            if !self.better(i, ai, bi) {
                return false;
            }
            strict = true;
        }
        strict
    }

    pub fn constrained_efficient(&self, y: u64) -> bool {
        self.ir(y) && !self.ir_outcomes().into_iter().any(|o| self.dominates(o, y))
    }

    pub fn stable(&self, y: u64) -> bool {
        self.ir(y) && !self.is_blocked(y)
    }

    pub fn weakly_setwise_stable(&self, y: u64) -> bool {
        self.ir(y) && !self.is_weak_setwise_blocked(y)
    }

    pub fn setwise_stable(&self, y: u64) -> bool {
        self.ir(y) && !self.is_setwise_blocked(y)
    }

    fn proper_pairs(&self, i: usize) -> Vec<(u64, u64)> {
        let own = self.own[i];
        let mut out = Vec::new();
        for big in subsets(own) {
            for small in subsets(big) {
                if small != big {
                    out.push((small, big));
                }
            }
        }
        out
    }

    pub fn complementary(&self, i: usize) -> bool {
        self.proper_pairs(i)
            .into_iter()
            .all(|(s, b)| is_sub(self.choose(i, s), self.choose(i, b)))
    }

    pub fn scale_economies(&self, i: usize) -> bool {
        self.proper_pairs(i).into_iter().all(|(s, b)| {
            let (cs, cb) = (self.choose(i, s), self.choose(i, b));
            is_sub(self.signers_of(cs & !cb), self.signers_of(cb & !cs))
        })
    }

    pub fn single_contract_se(&self, i: usize) -> bool {
        let own = self.own[i];
        subsets(own).into_iter().all(|y| {
            let before = self.choose(i, y);
            (0..64).filter(|b| (own & !y) >> b & 1 == 1).all(|b| {
                let after = self.choose(i, y | 1 << b);
                (0..64)
                    .filter(|a| (before & !after) >> a & 1 == 1)
                    .all(|a| is_sub(self.signers[a], self.signers[b]))
            })
        })
    }

    pub fn different_group_complementary(&self, i: usize) -> bool {
        let own = self.own[i];
        subsets(own)
            .into_iter()
            .filter(|&y| self.choose(i, y) == y)
            .all(|y| {
                subsets(own & !y).into_iter().all(|z| {
                    let after = self.choose(i, y | z);
                    (0..64).filter(|x| y >> x & 1 == 1).all(|x| {
                        let separate = (0..64)
                            .filter(|w| z >> w & 1 == 1)
                            .all(|w| self.signers[w] != self.signers[x]);
                        !separate || after >> x & 1 == 1
                    })
                })
            })
    }

    pub fn ordinal_se(&self, i: usize) -> bool {
        let own = self.own[i];
        let rational: Vec<u64> = subsets(own)
            .into_iter()
            .filter(|&y| self.choose(i, y) == y)
            .collect();
        for &y in &rational {
            for &yp in &rational {
                if !self.better(i, yp, y) {
                    continue;
                }
                let gone = self.signers_of(yp & !y);
                for z in subsets(y & !yp) {
                    let reaches = (0..64)
                        .filter(|x| z >> x & 1 == 1)
                        .all(|x| self.signers[x] & !gone != 0);
                    if reaches && self.choose(i, yp | z) != yp | z {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn condition(&self, c: Condition, i: usize) -> bool {
        match c {
            Condition::Complementary => self.complementary(i),
            Condition::ScaleEconomies => self.scale_economies(i),
            Condition::SingleContractSe => self.single_contract_se(i),
            Condition::DifferentGroupComplementary => self.different_group_complementary(i),
            Condition::OrdinalSe => self.ordinal_se(i),
        }
    }
}

/// Market sizes for seed `seed`: 2..=max_agents agents, 1..=max_contracts
/// contracts.
pub fn params(seed: u64, max_agents: usize, max_contracts: usize) -> RandomMarketParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let agents = rng.gen_range(2..=max_agents);
    RandomMarketParams {
        agents,
        contracts: rng.gen_range(1..=max_contracts),
        max_signers: rng.gen_range(2..=agents.min(3)),
        max_portfolios: rng.gen_range(2..=5),
        seed,
    }
}

/// `count` random markets, optionally filtered so that every agent
/// satisfies `condition`. Seeds whose sampling budget runs out are skipped.
pub fn corpus(
    count: usize,
    max_agents: usize,
    max_contracts: usize,
    condition: Option<Condition>,
    base_seed: u64,
) -> Vec<Market> {
    let mut out = Vec::with_capacity(count);
    let mut seed = base_seed;
    while out.len() < count {
        match random_market_filtered(&params(seed, max_agents, max_contracts), condition) {
            Ok((m, _)) => out.push(m),
            Err(Error::SamplingExhausted { .. }) => {}
            Err(e) => panic!("seed {seed}: {e}"),
        }
        seed += 1;
    }
    out
}

/// Every ordering for small markets, otherwise ten seeded ones.
pub fn orderings(m: &Market, seed: u64) -> Vec<AgentOrder> {
    if m.agent_count() <= 4 {
        AgentOrder::all(m)
    } else {
        (0..10)
            .map(|k| AgentOrder::random(m, seed * 31 + k))
            .collect()
    }
}

pub fn agent(i: usize) -> AgentId {
    AgentId(i)
}
