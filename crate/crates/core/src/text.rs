//! Line-based market file format.
//!
//! ```text
//! # comment
//! agents Ana Bob
//! contract x Ana Bob
//! contract y Ana Bob
//! pref Ana {x,y} {x}
//! pref Bob {y} {x}
//! ```
//!
//! Sets are listed best first and the empty set is implicitly last. An
//! agent without a `pref` line finds nothing acceptable.

use std::collections::{HashMap, HashSet};

use crate::bitset::{AgentSet, ContractSet};
use crate::error::{Diagnostic, Error, Result};
use crate::market::{Contract, Market};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawMarket {
    pub agents: Vec<(usize, String)>,
    pub contracts: Vec<RawContract>,
    pub prefs: Vec<RawPref>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawContract {
    pub line: usize,
    pub id: String,
    pub signers: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawPref {
    pub line: usize,
    pub agent: String,
    pub sets: Vec<Vec<String>>,
}

/// Identifier tokens: nonempty, no whitespace, no set punctuation, no `#`.
pub fn is_token(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '{' | '}' | ',' | '#'))
}

/// Splits `{a,b,c}` into its tokens. `{}` yields no tokens; whitespace,
/// empty members and repeated members are errors.
pub fn parse_set_tokens(text: &str) -> std::result::Result<Vec<String>, String> {
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| format!("malformed set `{text}`: expected {{id,id,...}}"))?;
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in inner.split(',') {
        if !is_token(part) {
            return Err(format!("malformed set `{text}`"));
        }
        if out.iter().any(|p| p == part) {
            return Err(format!("malformed set `{text}`: `{part}` repeated"));
        }
        out.push(part.to_owned());
    }
    Ok(out)
}

/// Strips a trailing comment and splits into whitespace tokens.
pub(crate) fn tokens(line: &str) -> Vec<&str> {
    let content = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    content.split_whitespace().collect()
}

/// Syntax pass: directives and arity only.
pub fn parse_raw(text: &str) -> std::result::Result<RawMarket, Vec<Diagnostic>> {
    let mut raw = RawMarket::default();
    let mut diags = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        let toks = tokens(line);
        let Some((&head, rest)) = toks.split_first() else {
            continue;
        };
        match head {
            "agents" => {
                if rest.is_empty() {
                    diags.push(Diagnostic::at(lineno, "`agents` needs at least one name"));
                }
                for name in rest {
                    if is_token(name) {
                        raw.agents.push((lineno, (*name).to_owned()));
                    } else {
                        diags.push(Diagnostic::at(
                            lineno,
                            format!("invalid agent name `{name}`"),
                        ));
                    }
                }
            }
            "contract" => match rest.split_first() {
                Some((id, signers)) if is_token(id) && signers.iter().all(|s| is_token(s)) => {
                    raw.contracts.push(RawContract {
                        line: lineno,
                        id: (*id).to_owned(),
                        signers: signers.iter().map(|s| (*s).to_owned()).collect(),
                    });
                }
                Some(_) => diags.push(Diagnostic::at(lineno, "invalid token in `contract` line")),
                None => diags.push(Diagnostic::at(lineno, "`contract` needs an id and signers")),
            },
            "pref" => match rest.split_first() {
                Some((agent, sets)) if !sets.is_empty() && is_token(agent) => {
                    let mut parsed = Vec::new();
                    for s in sets {
                        match parse_set_tokens(s) {
                            Ok(ids) if ids.is_empty() => diags.push(Diagnostic::at(
                                lineno,
                                "the empty set is implicit and may not be listed",
                            )),
                            Ok(ids) => parsed.push(ids),
                            Err(e) => diags.push(Diagnostic::at(lineno, e)),
                        }
                    }
                    raw.prefs.push(RawPref {
                        line: lineno,
                        agent: (*agent).to_owned(),
                        sets: parsed,
                    });
                }
                _ => diags.push(Diagnostic::at(
                    lineno,
                    "`pref` needs an agent and at least one set",
                )),
            },
            other => diags.push(Diagnostic::at(
                lineno,
                format!("unknown directive `{other}`"),
            )),
        }
    }
    if diags.is_empty() {
        Ok(raw)
    } else {
        Err(diags)
    }
}

/// Semantic pass: resolves names and checks every market invariant,
/// reporting the offending line for each problem.
pub fn validate_market(raw: &RawMarket) -> std::result::Result<Market, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut agent_index: HashMap<&str, usize> = HashMap::new();
    let mut agents = Vec::new();
    for (line, name) in &raw.agents {
        if agent_index.contains_key(name.as_str()) {
            diags.push(Diagnostic::at(*line, format!("duplicate agent `{name}`")));
        } else {
            agent_index.insert(name, agents.len());
            agents.push(name.clone());
        }
    }

    let mut contract_index: HashMap<&str, usize> = HashMap::new();
    let mut contracts: Vec<Contract> = Vec::new();
    for rc in &raw.contracts {
        if contract_index.contains_key(rc.id.as_str()) {
            diags.push(Diagnostic::at(
                rc.line,
                format!("duplicate contract `{}`", rc.id),
            ));
            continue;
        }
        let mut signers = AgentSet::EMPTY;
        let mut ok = true;
        for s in &rc.signers {
            match agent_index.get(s.as_str()) {
                Some(&i) if signers.contains(i) => {
                    diags.push(Diagnostic::at(rc.line, format!("signer `{s}` repeated")));
                    ok = false;
                }
                Some(&i) => signers.insert(i),
                None => {
                    diags.push(Diagnostic::at(rc.line, format!("unknown agent `{s}`")));
                    ok = false;
                }
            }
        }
        if ok && signers.len() < 2 {
            diags.push(Diagnostic::at(
                rc.line,
                format!("contract `{}` must have >=2 signers", rc.id),
            ));
        }
        contract_index.insert(&rc.id, contracts.len());
        contracts.push(Contract {
            id: rc.id.clone(),
            signers,
        });
    }

    let mut ranked: Vec<Option<Vec<ContractSet>>> = vec![None; agents.len()];
    for rp in &raw.prefs {
        let Some(&i) = agent_index.get(rp.agent.as_str()) else {
            diags.push(Diagnostic::at(
                rp.line,
                format!("unknown agent `{}`", rp.agent),
            ));
            continue;
        };
        if ranked[i].is_some() {
            diags.push(Diagnostic::at(
                rp.line,
                format!("duplicate `pref` line for agent `{}`", rp.agent),
            ));
            continue;
        }
        let mut list = Vec::new();
        let mut seen = HashSet::new();
        for ids in &rp.sets {
            let mut set = ContractSet::EMPTY;
            for id in ids {
                match contract_index.get(id.as_str()) {
                    Some(&x) if contracts[x].signers.contains(i) => set.insert(x),
                    Some(_) => diags.push(Diagnostic::at(
                        rp.line,
                        format!(
                            "entry not in X_i: contract `{id}` is not signed by `{}`",
                            rp.agent
                        ),
                    )),
                    None => diags.push(Diagnostic::at(rp.line, format!("unknown contract `{id}`"))),
                }
            }
            if !seen.insert(set) {
                diags.push(Diagnostic::at(
                    rp.line,
                    format!("duplicate preference entry {{{}}}", ids.join(",")),
                ));
            }
            list.push(set);
        }
        ranked[i] = Some(list);
    }

    if !diags.is_empty() {
        return Err(diags);
    }
    let ranked = ranked.into_iter().map(Option::unwrap_or_default).collect();
    Market::from_parts(agents, contracts, ranked).map_err(|e| match e {
        Error::Invalid(d) => d,
        other => vec![Diagnostic::new(None, other.to_string())],
    })
}

/// Parses and validates a market file.
pub fn parse_market(text: &str) -> Result<Market> {
    let raw = parse_raw(text).map_err(Error::Invalid)?;
    validate_market(&raw).map_err(Error::Invalid)
}

/// Canonical market file: agents in index order, contracts in index order
/// with signers in agent order, sets with ids sorted.
pub fn market_to_text(market: &Market) -> String {
    let mut out = String::new();
    if market.agent_count() > 0 {
        out.push_str("agents");
        for name in market.agent_names() {
            out.push(' ');
            out.push_str(name);
        }
        out.push('\n');
    }
    for c in market.contracts() {
        out.push_str("contract ");
        out.push_str(&c.id);
        for i in c.signers.iter() {
            out.push(' ');
            out.push_str(&market.agent_names()[i]);
        }
        out.push('\n');
    }
    for agent in market.agents() {
        let ranked = market.preference(agent).ranked();
        if ranked.is_empty() {
            continue;
        }
        out.push_str("pref ");
        out.push_str(market.agent_name(agent));
        for &set in ranked {
            out.push(' ');
            out.push_str(&market.format_set(set));
        }
        out.push('\n');
    }
    out
}
