//! Text formats: explicit-state chain files and an HOA subset for Rabin
//! automata. All parse errors carry 1-based line numbers.

mod hoa;

pub use hoa::{parse_hoa, to_hoa};

use std::fmt::Write as _;
use std::str::FromStr;

use crate::chain::{ChainParts, MarkovChain, StateId};
use crate::error::{ModelError, ParseError};

/// Non-blank lines paired with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, ParseError> {
    let tok = tok.ok_or_else(|| ParseError::new(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| ParseError::new(line, format!("bad {what} {tok:?}")))
}

fn no_more<'a>(mut toks: impl Iterator<Item = &'a str>, line: usize) -> Result<(), ParseError> {
    match toks.next() {
        Some(t) => Err(ParseError::new(line, format!("unexpected trailing token {t:?}"))),
        None => Ok(()),
    }
}

/// Parses `.tra`: returns the declared state count and the transitions.
pub fn parse_tra(text: &str) -> Result<(usize, Vec<(StateId, StateId, f64)>), ParseError> {
    let mut it = lines(text);
    let (hl, header) = it.next().ok_or_else(|| ParseError::new(1, "empty transition file"))?;
    let mut toks = header.split_whitespace();
    let n: usize = field(toks.next(), hl, "state count")?;
    let m: usize = field(toks.next(), hl, "transition count")?;
    no_more(toks, hl)?;
    let mut out = Vec::with_capacity(m);
    let mut last_line = hl;
    for (ln, l) in it {
        let mut toks = l.split_whitespace();
        let src = field(toks.next(), ln, "source state")?;
        let dst = field(toks.next(), ln, "target state")?;
        let p = field(toks.next(), ln, "probability")?;
        no_more(toks, ln)?;
        out.push((src, dst, p));
        last_line = ln;
    }
    if out.len() != m {
        return Err(ParseError::new(
            last_line,
            format!("header declares {m} transitions, found {}", out.len()),
        ));
    }
    Ok((n, out))
}

/// Parses `.lab`: label names indexed by id, and `(state, id)` pairs.
pub fn parse_lab(text: &str) -> Result<(Vec<String>, Vec<(StateId, usize)>), ParseError> {
    let mut it = lines(text);
    let Some((hl, header)) = it.next() else {
        return Ok((Vec::new(), Vec::new()));
    };
    let decls = parse_label_header(header, hl)?;
    let mut names = vec![None; decls.len()];
    for (id, name) in decls {
        if id >= names.len() {
            return Err(ParseError::new(hl, format!("label ids must be 0..{}", names.len())));
        }
        if names[id].replace(name).is_some() {
            return Err(ParseError::new(hl, format!("label id {id} declared twice")));
        }
    }
    let names: Vec<String> = names.into_iter().map(Option::unwrap).collect();
    let mut pairs = Vec::new();
    for (ln, l) in it {
        let (s, rest) = l
            .split_once(':')
            .ok_or_else(|| ParseError::new(ln, "expected \"<state>: <id> ...\""))?;
        let s: StateId = field(Some(s.trim()), ln, "state")?;
        for tok in rest.split_whitespace() {
            let id: usize = field(Some(tok), ln, "label id")?;
            if id >= names.len() {
                return Err(ParseError::new(ln, format!("undeclared label id {id}")));
            }
            pairs.push((s, id));
        }
    }
    Ok((names, pairs))
}

fn parse_label_header(header: &str, line: usize) -> Result<Vec<(usize, String)>, ParseError> {
    let err = |m: &str| ParseError::new(line, m.to_string());
    let mut out = Vec::new();
    let mut rest = header.trim_start();
    while !rest.is_empty() {
        let eq = rest.find('=').ok_or_else(|| err("expected id=\"name\""))?;
        let id: usize = field(Some(rest[..eq].trim()), line, "label id")?;
        let after = rest[eq + 1..].trim_start();
        let body = after.strip_prefix('"').ok_or_else(|| err("label name must be quoted"))?;
        let close = body.find('"').ok_or_else(|| err("unterminated label name"))?;
        out.push((id, body[..close].to_string()));
        rest = body[close + 1..].trim_start();
    }
    Ok(out)
}

fn parse_pairs(text: &str, what: &str) -> Result<Vec<(StateId, f64)>, ParseError> {
    lines(text)
        .map(|(ln, l)| {
            let mut toks = l.split_whitespace();
            let s = field(toks.next(), ln, "state")?;
            let v = field(toks.next(), ln, what)?;
            no_more(toks, ln)?;
            Ok((s, v))
        })
        .collect()
}

/// Builds a chain from the four files. Without `init` the chain starts in
/// state 0; without `rew` all rewards are zero.
pub fn parse_chain(
    tra: &str,
    lab: &str,
    rew: Option<&str>,
    init: Option<&str>,
) -> Result<MarkovChain, ModelError> {
    let (n_states, transitions) = parse_tra(tra)?;
    let (label_names, labels) = parse_lab(lab)?;
    let rewards = rew.map(|t| parse_pairs(t, "reward")).transpose()?.unwrap_or_default();
    let initial = init.map(|t| parse_pairs(t, "probability")).transpose()?.unwrap_or_default();
    Ok(MarkovChain::new(ChainParts {
        n_states,
        transitions,
        initial,
        label_names,
        labels,
        rewards,
        declared_pmin: None,
    })?)
}

pub fn to_tra(chain: &MarkovChain) -> String {
    let mut out = format!("{} {}\n", chain.n_states(), chain.n_transitions());
    for s in 0..chain.n_states() {
        for &(t, p) in chain.row(s) {
            let _ = writeln!(out, "{s} {t} {p}");
        }
    }
    out
}

pub fn to_lab(chain: &MarkovChain) -> String {
    let header: Vec<String> = chain
        .label_names()
        .iter()
        .enumerate()
        .map(|(i, n)| format!("{i}=\"{n}\""))
        .collect();
    let mut out = header.join(" ");
    out.push('\n');
    for s in 0..chain.n_states() {
        let ids = chain.labels_of(s);
        if !ids.is_empty() {
            let ids: Vec<String> = ids.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{s}: {}", ids.join(" "));
        }
    }
    out
}

/// Nonzero rewards only.
pub fn to_rew(chain: &MarkovChain) -> String {
    let mut out = String::new();
    for (s, r) in chain.rewards().iter().enumerate() {
        if *r != 0.0 {
            let _ = writeln!(out, "{s} {r}");
        }
    }
    out
}

pub fn to_init(chain: &MarkovChain) -> String {
    let mut out = String::new();
    for &(s, p) in chain.initial() {
        let _ = writeln!(out, "{s} {p}");
    }
    out
}
