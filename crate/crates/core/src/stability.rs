//! Exhaustive stability auditing.
//!
//! Three blocking notions are checked for an outcome `Y`:
//!
//! * a **block** is a fresh nonempty `Z` whose contracts every signer keeps
//!   in its best choice from `Y ∪ Z`;
//! * a **weak setwise block** is a block where the signers' best choices
//!   also agree on a single deviation outcome `Y*`;
//! * a **setwise block** is a deviation `Y* ⊇ Z` that every signer of `Z`
//!   strictly prefers and would not unilaterally trim, whether or not it is
//!   anyone's best choice.
//!
//! All searches run in canonical order (ascending cardinality, then
//! lexicographic on sorted ids), so the returned witness is the first one
//! in that order.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::bitset::{AgentSet, ContractSet};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::market::{AgentId, Market, Preferred};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Block,
    WeakSetwise,
    Setwise,
}

impl BlockKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::Block => "block",
            BlockKind::WeakSetwise => "weak_setwise",
            BlockKind::Setwise => "setwise",
        }
    }
}

/// Certificate that an outcome is blocked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockWitness {
    pub kind: BlockKind,
    pub z: ContractSet,
    /// The deviation outcome; absent for plain blocks.
    pub y_star: Option<ContractSet>,
}

/// Runs the exhaustive auditors over one market, memoizing the list of
/// individually rational outcomes.
pub struct Auditor<'m> {
    market: &'m Market,
    exec: Exec,
    ir: OnceLock<Vec<ContractSet>>,
}

impl<'m> Auditor<'m> {
    pub fn new(market: &'m Market) -> Result<Self> {
        Self::with_exec(market, Exec::default())
    }

    pub fn with_exec(market: &'m Market, exec: Exec) -> Result<Self> {
        market.ensure_within_cap()?;
        Ok(Self {
            market,
            exec,
            ir: OnceLock::new(),
        })
    }

    pub fn market(&self) -> &'m Market {
        self.market
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    /// Agents for which `Y_i != C_i(Y)`.
    pub fn ir_failures(&self, y: ContractSet) -> Vec<AgentId> {
        let m = self.market;
        m.agents()
            .filter(|&i| m.restrict(y, i) != m.choose(i, y))
            .collect()
    }

    pub fn is_individually_rational(&self, y: ContractSet) -> bool {
        is_individually_rational(self.market, y)
    }

    /// First `Z ⊆ X \ Y` in canonical order with `Z_i ⊆ C_i(Y ∪ Z)` for all
    /// signers `i` of `Z`.
    pub fn find_block(&self, y: ContractSet) -> Option<BlockWitness> {
        let m = self.market;
        let fresh = m.canonical_elems(m.all_contracts().difference(y));
        self.exec.first_subset(&fresh, 1, |z| {
            blocks(m, y, z).then_some(BlockWitness {
                kind: BlockKind::Block,
                z,
                y_star: None,
            })
        })
    }

    /// First block `Z` whose signers' choices are mutually consistent. The
    /// deviation outcome is the union of those choices.
    pub fn find_weak_setwise_block(&self, y: ContractSet) -> Option<BlockWitness> {
        let m = self.market;
        let fresh = m.canonical_elems(m.all_contracts().difference(y));
        self.exec.first_subset(&fresh, 1, |z| {
            weak_setwise_deviation(m, y, z).map(|y_star| BlockWitness {
                kind: BlockKind::WeakSetwise,
                z,
                y_star: Some(y_star),
            })
        })
    }

    /// First deviation `Y*` in canonical order that setwise blocks `Y` via
    /// `Z = Y* \ Y`.
    pub fn find_setwise_block(&self, y: ContractSet) -> Option<BlockWitness> {
        let m = self.market;
        let all = m.canonical_elems(m.all_contracts());
        self.exec.first_subset(&all, 1, |y_star| {
            let z = y_star.difference(y);
            (!z.is_empty() && setwise_deviation_ok(m, y, y_star)).then_some(BlockWitness {
                kind: BlockKind::Setwise,
                z,
                y_star: Some(y_star),
            })
        })
    }

    /// Every individually rational outcome in canonical order. Always
    /// contains the empty outcome.
    pub fn enumerate_ir(&self) -> &[ContractSet] {
        self.ir.get_or_init(|| {
            let m = self.market;
            let all = m.canonical_elems(m.all_contracts());
            self.exec
                .filter_subsets(&all, |y| is_individually_rational(m, y))
        })
    }

    pub fn pareto_dominates(&self, better: ContractSet, y: ContractSet) -> bool {
        pareto_dominates(self.market, better, y)
    }

    /// `Ok(None)` when `Y` is constrained efficient, otherwise the first
    /// individually rational outcome dominating it.
    pub fn constrained_efficiency(&self, y: ContractSet) -> Result<Option<ContractSet>> {
        if !self.is_individually_rational(y) {
            return Err(Error::NotIndividuallyRational(self.market.format_set(y)));
        }
        let m = self.market;
        Ok(self.exec.find_map_first(self.enumerate_ir(), |&other| {
            pareto_dominates(m, other, y).then_some(other)
        }))
    }

    pub fn is_constrained_efficient(&self, y: ContractSet) -> Result<bool> {
        Ok(self.constrained_efficiency(y)?.is_none())
    }

    /// The constrained-efficient members of the individually rational list.
    pub fn enumerate_efficient(&self) -> Vec<ContractSet> {
        let m = self.market;
        let ir = self.enumerate_ir();
        self.exec.filter(ir, |&y| {
            !ir.iter().any(|&other| pareto_dominates(m, other, y))
        })
    }

    pub fn audit(&self, y: ContractSet) -> StabilityReport {
        let ir_failures = self.ir_failures(y);
        let ir = ir_failures.is_empty();
        let block = self.find_block(y);
        let weak_setwise_block = self.find_weak_setwise_block(y);
        let setwise_block = self.find_setwise_block(y);
        let dominator = if ir {
            Some(
                self.constrained_efficiency(y)
                    .expect("outcome is individually rational"),
            )
        } else {
            None
        };
        StabilityReport {
            outcome: y,
            individually_rational: ir,
            ir_failures,
            stable: ir && block.is_none(),
            block,
            weakly_setwise_stable: ir && weak_setwise_block.is_none(),
            weak_setwise_block,
            setwise_stable: ir && setwise_block.is_none(),
            setwise_block,
            constrained_efficient: dominator.map(|d| d.is_none()),
            dominator: dominator.flatten(),
        }
    }
}

pub fn is_individually_rational(m: &Market, y: ContractSet) -> bool {
    m.agents().all(|i| m.restrict(y, i) == m.choose(i, y))
}

/// Every agent weakly prefers `better` and some agent strictly prefers it.
pub fn pareto_dominates(m: &Market, better: ContractSet, y: ContractSet) -> bool {
    let mut strict = false;
    for i in m.agents() {
        match m.compare_unchecked(i, m.restrict(better, i), m.restrict(y, i)) {
            Preferred::First => strict = true,
            Preferred::Equal => {}
            Preferred::Second => return false,
        }
    }
    strict
}

fn blocks(m: &Market, y: ContractSet, z: ContractSet) -> bool {
    let avail = y.union(z);
    m.signers(z).iter().all(|i| {
        m.restrict(z, AgentId(i))
            .is_subset(m.choose(AgentId(i), avail))
    })
}

/// The deviation outcome certifying a weak setwise block by `z`, if any.
///
/// A valid `Y*` must agree with `C_i(Y ∪ Z)` on agent `i`'s contracts for
/// every blocking agent, so the union of those choices is valid whenever any
/// `Y*` is, and is the smallest one.
fn weak_setwise_deviation(m: &Market, y: ContractSet, z: ContractSet) -> Option<ContractSet> {
    let avail = y.union(z);
    let coalition = m.signers(z);
    let mut choices = Vec::with_capacity(coalition.len());
    let mut y_star = ContractSet::EMPTY;
    for i in coalition.iter().map(AgentId) {
        let c = m.choose(i, avail);
        if !m.restrict(z, i).is_subset(c) {
            return None;
        }
        y_star = y_star.union(c);
        choices.push((i, c));
    }
    choices
        .iter()
        .all(|&(i, c)| m.restrict(y_star, i) == c)
        .then_some(y_star)
}

fn setwise_deviation_ok(m: &Market, y: ContractSet, y_star: ContractSet) -> bool {
    let z = y_star.difference(y);
    m.signers(z).iter().map(AgentId).all(|i| {
        let mine = m.restrict(y_star, i);
        m.prefers(i, mine, m.restrict(y, i)) && mine == m.choose(i, y_star)
    })
}

/// Re-checks a witness against the definition of its kind, clause by
/// clause. Returns the first violated clause.
pub fn validate_witness(m: &Market, y: ContractSet, w: &BlockWitness) -> Result<(), String> {
    let z = w.z;
    if z.is_empty() {
        return Err("Z is empty".into());
    }
    if !z.is_disjoint(y) {
        return Err("Z intersects Y".into());
    }
    let avail = y.union(z);
    let coalition: Vec<AgentId> = m
        .agents()
        .filter(|&i| !m.restrict(z, i).is_empty())
        .collect();
    match w.kind {
        BlockKind::Block => {
            for &i in &coalition {
                let best = m.choose(i, avail);
                for x in m.restrict(z, i).iter() {
                    if !best.contains(x) {
                        return Err(format!(
                            "{} does not choose {} from Y ∪ Z",
                            m.agent_name(i),
                            m.contract(x).id
                        ));
                    }
                }
            }
        }
        BlockKind::WeakSetwise => {
            let y_star = w.y_star.ok_or("missing Y*")?;
            if !y_star.is_subset(avail) {
                return Err("Y* is not contained in Y ∪ Z".into());
            }
            for &i in &coalition {
                let best = m.choose(i, avail);
                let mine = m.restrict(y_star, i);
                if mine != best {
                    return Err(format!("Y* differs from {}'s choice", m.agent_name(i)));
                }
                if !m.restrict(z, i).is_subset(mine) {
                    return Err(format!("Z is not in {}'s part of Y*", m.agent_name(i)));
                }
            }
        }
        BlockKind::Setwise => {
            let y_star = w.y_star.ok_or("missing Y*")?;
            if !z.is_subset(y_star) {
                return Err("Z is not contained in Y*".into());
            }
            if !y_star.is_subset(avail) {
                return Err("Y* is not contained in Y ∪ Z".into());
            }
            for &i in &coalition {
                let mine = m.restrict(y_star, i);
                if m.compare_unchecked(i, mine, m.restrict(y, i)) != Preferred::First {
                    return Err(format!("{} is not better off", m.agent_name(i)));
                }
                if m.choose(i, y_star) != mine {
                    return Err(format!(
                        "Y* is not individually rational for {}",
                        m.agent_name(i)
                    ));
                }
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilityReport {
    pub outcome: ContractSet,
    pub individually_rational: bool,
    pub ir_failures: Vec<AgentId>,
    pub stable: bool,
    pub block: Option<BlockWitness>,
    pub weakly_setwise_stable: bool,
    pub weak_setwise_block: Option<BlockWitness>,
    pub setwise_stable: bool,
    pub setwise_block: Option<BlockWitness>,
    /// `None` when the outcome is not individually rational.
    pub constrained_efficient: Option<bool>,
    pub dominator: Option<ContractSet>,
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl StabilityReport {
    pub fn to_text(&self, m: &Market) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "outcome {}", m.format_set(self.outcome));
        let failures: AgentSet = self.ir_failures.iter().map(|a| a.0).collect();
        let ir_note = if self.individually_rational {
            String::new()
        } else {
            format!("   (fails for {})", m.format_agents(failures))
        };
        let _ = writeln!(
            out,
            "  individually rational  {}{ir_note}",
            yes_no(self.individually_rational)
        );
        let witness = |w: &Option<BlockWitness>| match w {
            None => String::new(),
            Some(w) => match w.y_star {
                None => format!("   (Z={})", m.format_set(w.z)),
                Some(ys) => format!("   (Z={}, Y*={})", m.format_set(w.z), m.format_set(ys)),
            },
        };
        let _ = writeln!(
            out,
            "  stable                 {}{}",
            yes_no(self.stable),
            witness(&self.block)
        );
        let _ = writeln!(
            out,
            "  weakly setwise stable  {}{}",
            yes_no(self.weakly_setwise_stable),
            witness(&self.weak_setwise_block)
        );
        let _ = writeln!(
            out,
            "  setwise stable         {}{}",
            yes_no(self.setwise_stable),
            witness(&self.setwise_block)
        );
        let ce = match (self.constrained_efficient, self.dominator) {
            (None, _) => "n/a".to_owned(),
            (Some(true), _) => "yes".to_owned(),
            (Some(false), Some(d)) => format!("no   (dominated by {})", m.format_set(d)),
            (Some(false), None) => "no".to_owned(),
        };
        let _ = writeln!(out, "  constrained efficient  {ce}");
        out
    }

    /// Line-oriented `key=value` form; [`StabilityReport::parse_structured`]
    /// inverts it.
    pub fn to_structured(&self, m: &Market) -> String {
        let set = |s: Option<ContractSet>| s.map_or_else(|| "none".to_owned(), |s| m.format_set(s));
        let failures: AgentSet = self.ir_failures.iter().map(|a| a.0).collect();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("outcome", m.format_set(self.outcome));
        kv(
            "individually_rational",
            self.individually_rational.to_string(),
        );
        kv("ir_failures", m.format_agents(failures));
        kv("stable", self.stable.to_string());
        kv("block.z", set(self.block.map(|w| w.z)));
        kv(
            "weakly_setwise_stable",
            self.weakly_setwise_stable.to_string(),
        );
        kv(
            "weak_setwise_block.z",
            set(self.weak_setwise_block.map(|w| w.z)),
        );
        kv(
            "weak_setwise_block.ystar",
            set(self.weak_setwise_block.and_then(|w| w.y_star)),
        );
        kv("setwise_stable", self.setwise_stable.to_string());
        kv("setwise_block.z", set(self.setwise_block.map(|w| w.z)));
        kv(
            "setwise_block.ystar",
            set(self.setwise_block.and_then(|w| w.y_star)),
        );
        kv(
            "constrained_efficient",
            self.constrained_efficient
                .map_or_else(|| "n/a".to_owned(), |b| b.to_string()),
        );
        kv("dominator", set(self.dominator));
        out
    }

    pub fn parse_structured(m: &Market, text: &str) -> Result<Self> {
        let mut kv: HashMap<&str, &str> = HashMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{line}`")))?;
            if kv.insert(k, v).is_some() {
                return Err(Error::Parse(format!("duplicate key `{k}`")));
            }
        }
        let get = |k: &str| {
            kv.get(k)
                .copied()
                .ok_or_else(|| Error::Parse(format!("missing key `{k}`")))
        };
        let flag = |k: &str| -> Result<bool> {
            get(k)?
                .parse()
                .map_err(|_| Error::Parse(format!("`{k}` is not a boolean")))
        };
        let opt_set = |k: &str| -> Result<Option<ContractSet>> {
            match get(k)? {
                "none" => Ok(None),
                v => m.parse_set(v).map(Some),
            }
        };
        let witness =
            |kind: BlockKind, zk: &str, yk: Option<&str>| -> Result<Option<BlockWitness>> {
                let z = opt_set(zk)?;
                let y_star = match yk {
                    Some(yk) => opt_set(yk)?,
                    None => None,
                };
                Ok(z.map(|z| BlockWitness { kind, z, y_star }))
            };
        let failures_text = get("ir_failures")?;
        let names = crate::text::parse_set_tokens(failures_text).map_err(Error::Parse)?;
        let mut ir_failures = names
            .iter()
            .map(|n| m.parse_agent(n))
            .collect::<Result<Vec<_>>>()?;
        ir_failures.sort();
        Ok(Self {
            outcome: m.parse_set(get("outcome")?)?,
            individually_rational: flag("individually_rational")?,
            ir_failures,
            stable: flag("stable")?,
            block: witness(BlockKind::Block, "block.z", None)?,
            weakly_setwise_stable: flag("weakly_setwise_stable")?,
            weak_setwise_block: witness(
                BlockKind::WeakSetwise,
                "weak_setwise_block.z",
                Some("weak_setwise_block.ystar"),
            )?,
            setwise_stable: flag("setwise_stable")?,
            setwise_block: witness(
                BlockKind::Setwise,
                "setwise_block.z",
                Some("setwise_block.ystar"),
            )?,
            constrained_efficient: match get("constrained_efficient")? {
                "n/a" => None,
                _ => Some(flag("constrained_efficient")?),
            },
            dominator: opt_set("dominator")?,
        })
    }
}
