mod common;

use common::{cs, subsets, Oracle};
use multimatch::stability::validate_witness;
use multimatch::{
    csd, market_to_text, parse_market, AgentOrder, Auditor, Contract, ContractSet, Market,
    Preferred, StabilityReport,
};
use proptest::prelude::*;

/// Up to 4 agents, up to `max_contracts` contracts, arbitrary ranked lists.
fn market(max_contracts: usize) -> impl Strategy<Value = Market> {
    (2usize..=4, 1usize..=max_contracts)
        .prop_flat_map(|(agents, n)| {
            let signer_sets = prop::collection::vec(any::<u8>(), n);
            let raw_prefs =
                prop::collection::vec(prop::collection::vec(any::<u64>(), 0..6), agents);
            (Just(agents), signer_sets, raw_prefs)
        })
        .prop_map(|(agents, signer_sets, raw_prefs)| {
            let contracts: Vec<Contract> = signer_sets
                .iter()
                .enumerate()
                .map(|(x, &bits)| {
                    let mut s: Vec<usize> = (0..agents).filter(|a| bits >> a & 1 == 1).collect();
                    // pad to two signers deterministically
                    let mut next = x % agents;
                    while s.len() < 2 {
                        if !s.contains(&next) {
                            s.push(next);
                        }
                        next = (next + 1) % agents;
                    }
                    Contract {
                        id: format!("c{x}"),
                        signers: s.into_iter().collect(),
                    }
                })
                .collect();
            let ranked = (0..agents)
                .map(|i| {
                    let own: u64 = contracts
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| c.signers.contains(i))
                        .fold(0, |acc, (x, _)| acc | 1 << x);
                    let mut list: Vec<ContractSet> = Vec::new();
                    for &r in &raw_prefs[i] {
                        let s = ContractSet::from_bits(r & own);
                        if !s.is_empty() && !list.contains(&s) {
                            list.push(s);
                        }
                    }
                    list
                })
                .collect();
            let names = (0..agents).map(|i| format!("p{i}")).collect();
            Market::from_parts(names, contracts, ranked).expect("generated market is valid")
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn choice_is_a_maximal_subset(m in market(6)) {
        let o = Oracle::new(&m);
        for i in m.agents() {
            for y in subsets(o.all) {
                let c = m.choose(i, cs(y));
                prop_assert!(c.is_subset(m.restrict(cs(y), i)));
                prop_assert_eq!(m.choose(i, c), c);
                for s in subsets(y & o.own(i.0)) {
                    prop_assert!(!m.prefers(i, cs(s), c));
                }
            }
        }
    }

    #[test]
    fn compare_is_a_strict_total_order(m in market(4)) {
        let o = Oracle::new(&m);
        for i in m.agents() {
            let own = subsets(o.own(i.0));
            for &a in &own {
                for &b in &own {
                    let ab = m.compare(i, cs(a), cs(b)).unwrap();
                    let ba = m.compare(i, cs(b), cs(a)).unwrap();
                    prop_assert_eq!(ab == Preferred::Equal, a == b);
                    prop_assert_eq!(ab == Preferred::First, ba == Preferred::Second);
                    for &c in &own {
                        if m.prefers(i, cs(a), cs(b)) && m.prefers(i, cs(b), cs(c)) {
                            prop_assert!(m.prefers(i, cs(a), cs(c)));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn market_text_round_trips(m in market(8)) {
        let text = market_to_text(&m);
        let back = parse_market(&text).unwrap();
        prop_assert_eq!(market_to_text(&back), text);
        for i in m.agents() {
            prop_assert_eq!(back.preference(i).ranked(), m.preference(i).ranked());
        }
    }

    #[test]
    fn reports_round_trip_and_witnesses_validate(m in market(6)) {
        let a = Auditor::new(&m).unwrap();
        for y in subsets(m.all_contracts().bits()) {
            let r = a.audit(cs(y));
            let back = StabilityReport::parse_structured(&m, &r.to_structured(&m)).unwrap();
            prop_assert_eq!(&back, &r);
            for w in [&r.block, &r.weak_setwise_block, &r.setwise_block].into_iter().flatten() {
                prop_assert!(validate_witness(&m, cs(y), w).is_ok());
            }
            // weak setwise stability is weaker than stability
            if r.stable {
                prop_assert!(r.weakly_setwise_stable);
            }
        }
    }

    #[test]
    fn csd_output_is_rational_and_efficient(m in market(7)) {
        let a = Auditor::new(&m).unwrap();
        for order in AgentOrder::all(&m) {
            let t = csd(&a, &order);
            prop_assert!(a.is_individually_rational(t.outcome));
            prop_assert!(a.is_constrained_efficient(t.outcome).unwrap());
            prop_assert_eq!(t.steps.len(), m.agent_count() - 1);
            let mut pool = ContractSet::EMPTY;
            for s in &t.steps {
                prop_assert!(s.chosen.is_subset(m.portfolio(s.agent)));
                pool = pool.union(s.chosen);
                prop_assert_eq!(pool, s.pool_after);
            }
        }
    }
}
