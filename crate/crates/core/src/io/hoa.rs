//! HOA subset: state-based Rabin acceptance, explicit labels only.

use std::fmt::{self, Write as _};

use crate::automaton::{LabelExpr, RabinAutomaton, RabinPair, MAX_AP};
use crate::error::{ModelError, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    /// `name:`
    Header(String),
    Ident(String),
    Int(u64),
    Str(String),
    Punct(char),
    Body,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Header(h) => write!(f, "{h}:"),
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(i) => write!(f, "{i}"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Punct(c) => write!(f, "{c}"),
            Tok::Body => f.write_str("--BODY--"),
            Tok::End => f.write_str("--END--"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut line = 1;
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'/' if b.get(i + 1) == Some(&b'*') => {
                let start = line;
                i += 2;
                loop {
                    match b.get(i) {
                        None => return Err(ParseError::new(start, "unterminated comment")),
                        Some(b'*') if b.get(i + 1) == Some(&b'/') => {
                            i += 2;
                            break;
                        }
                        Some(b'\n') => line += 1,
                        _ => {}
                    }
                    i += 1;
                }
            }
            b'"' => {
                let start = line;
                let mut s = Vec::new();
                i += 1;
                loop {
                    match b.get(i) {
                        None => return Err(ParseError::new(start, "unterminated string")),
                        Some(b'"') => break,
                        Some(b'\\') if i + 1 < b.len() => {
                            s.push(b[i + 1]);
                            i += 1;
                        }
                        Some(&ch) => {
                            if ch == b'\n' {
                                line += 1;
                            }
                            s.push(ch);
                        }
                    }
                    i += 1;
                }
                i += 1;
                out.push((Tok::Str(String::from_utf8_lossy(&s).into_owned()), start));
            }
            b'-' if text[i..].starts_with("--BODY--") => {
                out.push((Tok::Body, line));
                i += 8;
            }
            b'-' if text[i..].starts_with("--END--") => {
                out.push((Tok::End, line));
                i += 7;
            }
            b'0'..=b'9' => {
                let j = i + b[i..].iter().take_while(|c| c.is_ascii_digit()).count();
                let v = text[i..j]
                    .parse()
                    .map_err(|_| ParseError::new(line, "integer too large"))?;
                out.push((Tok::Int(v), line));
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let j = i + b[i..]
                    .iter()
                    .take_while(|c| c.is_ascii_alphanumeric() || **c == b'_' || **c == b'-')
                    .count();
                let word = text[i..j].to_string();
                if b.get(j) == Some(&b':') {
                    out.push((Tok::Header(word), line));
                    i = j + 1;
                } else {
                    out.push((Tok::Ident(word), line));
                    i = j;
                }
            }
            b'[' | b']' | b'{' | b'}' | b'(' | b')' | b'!' | b'&' | b'|' => {
                out.push((Tok::Punct(c as char), line));
                i += 1;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(ParseError::new(line, format!("unexpected character {ch:?}")));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    last_line: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |&(_, l)| l)
    }

    fn err(&self, reason: impl Into<String>) -> ParseError {
        ParseError::new(self.line(), reason)
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        let t = self
            .toks
            .get(self.pos)
            .map(|(t, _)| t.clone())
            .ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, want: &Tok) -> Result<(), ParseError> {
        let line = self.line();
        let got = self.next()?;
        if &got == want {
            Ok(())
        } else {
            Err(ParseError::new(line, format!("expected {want}, found {got}")))
        }
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        let line = self.line();
        match self.next()? {
            Tok::Int(v) => Ok(v),
            t => Err(ParseError::new(line, format!("expected integer, found {t}"))),
        }
    }

    fn ident(&mut self, want: &str) -> Result<(), ParseError> {
        self.expect(&Tok::Ident(want.to_string()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int_set(&mut self) -> Result<Vec<u64>, ParseError> {
        let mut out = Vec::new();
        if self.eat(&Tok::Punct('{')) {
            while !self.eat(&Tok::Punct('}')) {
                out.push(self.int()?);
            }
        }
        Ok(out)
    }

    // e := conj ('|' conj)*; conj := unary ('&' unary)*; unary := '!' unary | atom
    fn label_or(&mut self) -> Result<LabelExpr, ParseError> {
        let mut e = self.label_and()?;
        while self.eat(&Tok::Punct('|')) {
            e = LabelExpr::Or(Box::new(e), Box::new(self.label_and()?));
        }
        Ok(e)
    }

    fn label_and(&mut self) -> Result<LabelExpr, ParseError> {
        let mut e = self.label_unary()?;
        while self.eat(&Tok::Punct('&')) {
            e = LabelExpr::And(Box::new(e), Box::new(self.label_unary()?));
        }
        Ok(e)
    }

    fn label_unary(&mut self) -> Result<LabelExpr, ParseError> {
        let line = self.line();
        if self.depth > 256 {
            return Err(ParseError::new(line, "label expression nested too deeply"));
        }
        self.depth += 1;
        let e = self.label_atom(line);
        self.depth -= 1;
        e
    }

    fn label_atom(&mut self, line: usize) -> Result<LabelExpr, ParseError> {
        match self.next()? {
            Tok::Punct('!') => Ok(LabelExpr::Not(Box::new(self.label_unary()?))),
            Tok::Punct('(') => {
                let e = self.label_or()?;
                self.expect(&Tok::Punct(')'))?;
                Ok(e)
            }
            Tok::Ident(s) if s == "t" => Ok(LabelExpr::True),
            Tok::Ident(s) if s == "f" => Ok(LabelExpr::False),
            Tok::Int(v) => u32::try_from(v)
                .map(LabelExpr::Ap)
                .map_err(|_| ParseError::new(line, "AP index too large")),
            t => Err(ParseError::new(line, format!("unexpected {t} in label"))),
        }
    }

    /// One `Fin(a) & Inf(b)` term, optionally parenthesized.
    fn rabin_pair(&mut self) -> Result<(u64, u64), ParseError> {
        if self.eat(&Tok::Punct('(')) {
            if self.depth > 256 {
                return Err(self.err("acceptance condition nested too deeply"));
            }
            self.depth += 1;
            let p = self.rabin_pair();
            self.depth -= 1;
            let p = p?;
            self.expect(&Tok::Punct(')'))?;
            return Ok(p);
        }
        let set = |p: &mut Self, name: &str| -> Result<u64, ParseError> {
            p.ident(name)?;
            p.expect(&Tok::Punct('('))?;
            let v = p.int()?;
            p.expect(&Tok::Punct(')'))?;
            Ok(v)
        };
        let fin = set(self, "Fin")?;
        self.expect(&Tok::Punct('&'))?;
        let inf = set(self, "Inf")?;
        Ok((fin, inf))
    }

    fn skip_header_values(&mut self) {
        while !matches!(self.peek(), None | Some(Tok::Header(_)) | Some(Tok::Body)) {
            self.pos += 1;
        }
    }
}

fn parse_inner(text: &str) -> Result<RabinAutomaton, ModelError> {
    let toks = lex(text)?;
    let last_line = toks.last().map_or(1, |&(_, l)| l);
    let mut p = Parser { toks, pos: 0, last_line, depth: 0 };

    p.expect(&Tok::Header("HOA".into()))?;
    p.ident("v1")?;
    let mut n_states = None;
    let mut start = None;
    let mut aps: Option<Vec<String>> = None;
    let mut n_sets = None;
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut acc_name_pairs = None;
    loop {
        let line = p.line();
        match p.next()? {
            Tok::Body => break,
            Tok::Header(h) => match h.as_str() {
                "States" => n_states = Some(p.int()?),
                "Start" => {
                    if start.replace(p.int()?).is_some() {
                        return Err(ParseError::new(line, "only one start state is supported").into());
                    }
                    if p.peek() == Some(&Tok::Punct('&')) {
                        return Err(p.err("start state conjunctions are not supported").into());
                    }
                }
                "AP" => {
                    let count = p.int()?;
                    if count as usize > MAX_AP {
                        return Err(ParseError::new(line, format!("at most {MAX_AP} atomic propositions")).into());
                    }
                    let mut names = Vec::new();
                    for _ in 0..count {
                        let l = p.line();
                        match p.next()? {
                            Tok::Str(s) => names.push(s),
                            t => return Err(ParseError::new(l, format!("expected AP name, found {t}")).into()),
                        }
                    }
                    aps = Some(names);
                }
                "Acceptance" => {
                    n_sets = Some(p.int()?);
                    pairs.push(p.rabin_pair()?);
                    while p.eat(&Tok::Punct('|')) {
                        pairs.push(p.rabin_pair()?);
                    }
                    if p.peek() == Some(&Tok::Punct('&')) {
                        return Err(p.err("Rabin pairs must be joined by |").into());
                    }
                }
                "acc-name" => {
                    p.ident("Rabin")?;
                    acc_name_pairs = Some((p.int()?, line));
                }
                h if h.starts_with(|c: char| c.is_ascii_lowercase()) => p.skip_header_values(),
                h => return Err(ParseError::new(line, format!("unsupported header {h}:")).into()),
            },
            t => return Err(ParseError::new(line, format!("expected header, found {t}")).into()),
        }
    }
    let body_line = p.line();
    let missing = |what: &str| ParseError::new(body_line, format!("missing {what} header"));
    let n = n_states.ok_or_else(|| missing("States:"))? as usize;
    let start = start.ok_or_else(|| missing("Start:"))? as usize;
    let ap_names = aps.ok_or_else(|| missing("AP:"))?;
    let n_sets = n_sets.ok_or_else(|| missing("Acceptance:"))?;

    // pair i must be Fin(2i) & Inf(2i+1), each i exactly once
    let k = pairs.len() as u64;
    if n_sets != 2 * k {
        return Err(ParseError::new(body_line, format!("{n_sets} sets declared for {k} Rabin pairs")).into());
    }
    let mut seen = vec![false; k as usize];
    for &(fin, inf) in &pairs {
        if fin % 2 != 0 || inf != fin + 1 || fin / 2 >= k || std::mem::replace(&mut seen[(fin / 2) as usize], true) {
            return Err(ParseError::new(
                body_line,
                format!("acceptance term Fin({fin})&Inf({inf}) is not a Rabin pair Fin(2i)&Inf(2i+1)"),
            )
            .into());
        }
    }
    if let Some((declared, line)) = acc_name_pairs {
        if declared != k {
            return Err(ParseError::new(line, format!("acc-name declares {declared} pairs, acceptance has {k}")).into());
        }
    }

    let mut transitions: Vec<Option<Vec<(LabelExpr, usize)>>> = vec![None; n];
    let mut state_lines = vec![0; n];
    let mut avoid = vec![Vec::new(); k as usize];
    let mut visit = vec![Vec::new(); k as usize];
    loop {
        let line = p.line();
        match p.next()? {
            Tok::End => break,
            Tok::Header(h) if h == "State" => {
                if p.peek() == Some(&Tok::Punct('[')) {
                    return Err(p.err("state labels are not supported").into());
                }
                let q = p.int()? as usize;
                if q >= n {
                    return Err(ParseError::new(line, format!("state {q} out of range (States: {n})")).into());
                }
                if transitions[q].is_some() {
                    return Err(ParseError::new(line, format!("state {q} defined twice")).into());
                }
                if matches!(p.peek(), Some(Tok::Str(_))) {
                    p.pos += 1;
                }
                for set in p.int_set()? {
                    if set >= n_sets {
                        return Err(ParseError::new(line, format!("acceptance set {set} not declared")).into());
                    }
                    let i = (set / 2) as usize;
                    if set % 2 == 0 { &mut avoid[i] } else { &mut visit[i] }.push(q);
                }
                state_lines[q] = line;
                let mut edges = Vec::new();
                while p.peek() == Some(&Tok::Punct('[')) {
                    p.pos += 1;
                    let e = p.label_or()?;
                    p.expect(&Tok::Punct(']'))?;
                    let dl = p.line();
                    let dst = p.int()? as usize;
                    if dst >= n {
                        return Err(ParseError::new(dl, format!("state {dst} out of range (States: {n})")).into());
                    }
                    if let Some(i) = e.max_ap() {
                        if i as usize >= ap_names.len() {
                            return Err(ParseError::new(dl, format!("AP index {i} not declared")).into());
                        }
                    }
                    if p.peek() == Some(&Tok::Punct('{')) {
                        return Err(p.err("transition-based acceptance is not supported").into());
                    }
                    edges.push((e, dst));
                }
                if matches!(p.peek(), Some(Tok::Int(_))) {
                    return Err(p.err("implicit edge labels are not supported").into());
                }
                transitions[q] = Some(edges);
            }
            t => return Err(ParseError::new(line, format!("expected State: or --END--, found {t}")).into()),
        }
    }
    if let Some((t, l)) = p.toks.get(p.pos) {
        return Err(ParseError::new(*l, format!("unexpected {t} after --END--")).into());
    }
    let transitions = transitions
        .into_iter()
        .enumerate()
        .map(|(q, t)| t.ok_or_else(|| ParseError::new(body_line, format!("state {q} has no definition"))))
        .collect::<Result<Vec<_>, _>>()?;
    let pairs = avoid
        .into_iter()
        .zip(visit)
        .map(|(avoid, visit)| RabinPair { avoid, visit })
        .collect();
    Ok(RabinAutomaton::new(start, ap_names, transitions, pairs, &state_lines)?)
}

/// Parses the HOA subset into a validated deterministic Rabin automaton.
pub fn parse_hoa(text: &str) -> Result<RabinAutomaton, ModelError> {
    parse_inner(text)
}

fn write_expr(out: &mut String, e: &LabelExpr, prec: u8) {
    // precedence: | = 0, & = 1, ! = 2
    match e {
        LabelExpr::True => out.push('t'),
        LabelExpr::False => out.push('f'),
        LabelExpr::Ap(i) => {
            let _ = write!(out, "{i}");
        }
        LabelExpr::Not(a) => {
            out.push('!');
            write_expr(out, a, 2);
        }
        LabelExpr::And(a, b) | LabelExpr::Or(a, b) => {
            let (op, p) = if matches!(e, LabelExpr::And(..)) { ('&', 1) } else { ('|', 0) };
            if prec > p {
                out.push('(');
            }
            write_expr(out, a, p);
            out.push(op);
            write_expr(out, b, p + 1);
            if prec > p {
                out.push(')');
            }
        }
    }
}

/// Writes an automaton back in the same subset.
pub fn to_hoa(a: &RabinAutomaton) -> String {
    let mut out = String::from("HOA: v1\n");
    let k = a.pairs().len();
    let _ = writeln!(out, "States: {}", a.n_states());
    let _ = writeln!(out, "Start: {}", a.start());
    let _ = write!(out, "AP: {}", a.ap_names().len());
    for name in a.ap_names() {
        let _ = write!(out, " {name:?}");
    }
    out.push('\n');
    let _ = writeln!(out, "acc-name: Rabin {k}");
    let terms: Vec<String> = (0..k).map(|i| format!("(Fin({})&Inf({}))", 2 * i, 2 * i + 1)).collect();
    let _ = writeln!(out, "Acceptance: {} {}", 2 * k, terms.join(" | "));
    out.push_str("--BODY--\n");
    for q in 0..a.n_states() {
        let mut sets = Vec::new();
        for (i, pair) in a.pairs().iter().enumerate() {
            if pair.avoid.contains(&q) {
                sets.push(2 * i);
            }
            if pair.visit.contains(&q) {
                sets.push(2 * i + 1);
            }
        }
        let _ = write!(out, "State: {q}");
        if !sets.is_empty() {
            let sets: Vec<String> = sets.iter().map(usize::to_string).collect();
            let _ = write!(out, " {{{}}}", sets.join(" "));
        }
        out.push('\n');
        for (e, dst) in a.transitions(q) {
            out.push('[');
            write_expr(&mut out, e, 0);
            let _ = writeln!(out, "] {dst}");
        }
    }
    out.push_str("--END--\n");
    out
}
