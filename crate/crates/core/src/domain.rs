//! Multiplicity domains: eventually periodic subsets of ℕ.
//!
//! A domain is built from progression terms `start..end step k` (with `end`
//! possibly unbounded) and stored in a canonical form: a list of maximal
//! finite intervals followed by an optional periodic tail with minimal
//! period and minimal threshold. Two domains are equal iff they contain the
//! same numbers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::DomainError;

/// Upper bound on the work done while normalizing: enumerated points of
/// stepped terms, and the least common multiple of unbounded steps.
pub const NORMALIZE_LIMIT: u64 = 1_000_000;

/// One progression `start, start+step, ...` up to `end` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Term {
    pub start: u64,
    pub step: u64,
    pub end: Option<u64>,
}

impl Term {
    pub fn single(n: u64) -> Self {
        Term { start: n, step: 1, end: Some(n) }
    }

    pub fn range(start: u64, end: u64) -> Self {
        Term { start, step: 1, end: Some(end) }
    }

    pub fn from(start: u64) -> Self {
        Term { start, step: 1, end: None }
    }

    pub fn contains(&self, c: u64) -> bool {
        c >= self.start
            && (c - self.start).is_multiple_of(self.step)
            && self.end.is_none_or(|e| c <= e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Tail {
    start: u64,
    period: u64,
    /// Offsets from `start`, sorted, all `< period`, always containing 0.
    residues: Vec<u64>,
}

impl Tail {
    fn contains(&self, c: u64) -> bool {
        c >= self.start && self.residues.binary_search(&((c - self.start) % self.period)).is_ok()
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiplicityDomain {
    /// Disjoint, non-adjacent, sorted, all below the tail start.
    intervals: Vec<(u64, u64)>,
    tail: Option<Tail>,
}

impl MultiplicityDomain {
    pub fn new(terms: &[Term]) -> Result<Self, DomainError> {
        let d = normalize(terms)?;
        if d.intervals.is_empty() && d.tail.is_none() {
            return Err(DomainError::Empty);
        }
        if d.intervals == [(0, 0)] && d.tail.is_none() {
            return Err(DomainError::OnlyZero);
        }
        Ok(d)
    }

    pub fn singleton(n: u64) -> Result<Self, DomainError> {
        Self::new(&[Term::single(n)])
    }

    /// The default domain `{1}`.
    pub fn one() -> Self {
        MultiplicityDomain { intervals: vec![(1, 1)], tail: None }
    }

    pub fn range(start: u64, end: u64) -> Result<Self, DomainError> {
        if end < start {
            return Err(DomainError::EmptyRange { start, end });
        }
        Self::new(&[Term::range(start, end)])
    }

    pub fn at_least(start: u64) -> Result<Self, DomainError> {
        Self::new(&[Term::from(start)])
    }

    pub fn from_values<I: IntoIterator<Item = u64>>(values: I) -> Result<Self, DomainError> {
        let terms: Vec<Term> = values.into_iter().map(Term::single).collect();
        Self::new(&terms)
    }

    pub fn contains(&self, c: u64) -> bool {
        if let Some(t) = &self.tail {
            if c >= t.start {
                return t.contains(c);
            }
        }
        let i = self.intervals.partition_point(|&(_, hi)| hi < c);
        self.intervals.get(i).is_some_and(|&(lo, _)| lo <= c)
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0)
    }

    pub fn is_finite(&self) -> bool {
        self.tail.is_none()
    }

    pub fn min(&self) -> u64 {
        match (self.intervals.first(), &self.tail) {
            (Some(&(lo, _)), _) => lo,
            (None, Some(t)) => t.start,
            (None, None) => unreachable!("domains are never empty"),
        }
    }

    /// Largest member, or `None` for infinite domains.
    pub fn max(&self) -> Option<u64> {
        match &self.tail {
            Some(_) => None,
            None => self.intervals.last().map(|&(_, hi)| hi),
        }
    }

    /// All members `<= cap`, ascending.
    pub fn members_up_to(&self, cap: u64) -> Vec<u64> {
        let mut out = Vec::new();
        for &(lo, hi) in &self.intervals {
            if lo > cap {
                return out;
            }
            out.extend(lo..=hi.min(cap));
        }
        if let Some(t) = &self.tail {
            let mut base = t.start;
            'outer: while base <= cap {
                for &r in &t.residues {
                    match base.checked_add(r) {
                        Some(c) if c <= cap => out.push(c),
                        _ => break 'outer,
                    }
                }
                match base.checked_add(t.period) {
                    Some(b) => base = b,
                    None => break,
                }
            }
        }
        out
    }

    /// Number of members in `lo..=hi`, computed without enumerating.
    pub fn count_between(&self, lo: u64, hi: u64) -> u64 {
        if hi < lo {
            return 0;
        }
        let mut n: u64 = 0;
        for &(a, b) in &self.intervals {
            let (x, y) = (a.max(lo), b.min(hi));
            if x <= y {
                n = n.saturating_add(y - x + 1);
            }
        }
        if let Some(t) = &self.tail {
            for &r in &t.residues {
                let Some(first) = t.start.checked_add(r) else { continue };
                if hi < first {
                    continue;
                }
                let from = if lo <= first { 0 } else { (lo - first).div_ceil(t.period) };
                let to = (hi - first) / t.period;
                if to >= from {
                    n = n.saturating_add(to - from + 1);
                }
            }
        }
        n
    }

    /// Canonical term list; `new(&d.terms()) == d`.
    pub fn terms(&self) -> Vec<Term> {
        let mut out: Vec<Term> = self
            .intervals
            .iter()
            .map(|&(lo, hi)| Term::range(lo, hi))
            .collect();
        if let Some(t) = &self.tail {
            for &r in &t.residues {
                out.push(Term { start: t.start + r, step: t.period, end: None });
            }
        }
        out
    }

    /// Fails only when the combined period exceeds [`NORMALIZE_LIMIT`].
    pub fn union(&self, other: &MultiplicityDomain) -> Result<MultiplicityDomain, DomainError> {
        let mut terms = self.terms();
        terms.extend(other.terms());
        normalize(&terms)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn too_large() -> DomainError {
    DomainError::TooLarge { limit: NORMALIZE_LIMIT }
}

fn merge_intervals(mut v: Vec<(u64, u64)>) -> Vec<(u64, u64)> {
    v.sort_unstable();
    let mut out: Vec<(u64, u64)> = Vec::with_capacity(v.len());
    for (lo, hi) in v {
        if let Some(last) = out.last_mut() {
            if lo <= last.1.saturating_add(1) {
                last.1 = last.1.max(hi);
                continue;
            }
        }
        out.push((lo, hi));
    }
    out
}

fn in_intervals(v: &[(u64, u64)], c: u64) -> bool {
    let i = v.partition_point(|&(_, hi)| hi < c);
    v.get(i).is_some_and(|&(lo, _)| lo <= c)
}

/// Appends the points of `start, start+step, ...` that are `<= last`.
fn push_points(
    out: &mut Vec<(u64, u64)>,
    start: u64,
    step: u64,
    last: u64,
    budget: &mut u64,
) -> Result<(), DomainError> {
    if start > last {
        return Ok(());
    }
    if step == 1 {
        out.push((start, last));
        return Ok(());
    }
    let count = (last - start) / step + 1;
    if count > *budget {
        return Err(too_large());
    }
    *budget -= count;
    let mut c = start;
    for _ in 0..count {
        out.push((c, c));
        c += step;
    }
    Ok(())
}

fn normalize(terms: &[Term]) -> Result<MultiplicityDomain, DomainError> {
    let mut budget = NORMALIZE_LIMIT;
    for t in terms {
        if t.step == 0 {
            return Err(DomainError::ZeroStep);
        }
        if let Some(e) = t.end {
            if e < t.start {
                return Err(DomainError::EmptyRange { start: t.start, end: e });
            }
        }
    }
    let unbounded: Vec<&Term> = terms.iter().filter(|t| t.end.is_none()).collect();
    if unbounded.is_empty() {
        let mut pts = Vec::new();
        for t in terms {
            let e = t.end.unwrap_or(t.start);
            let last = e - (e - t.start) % t.step;
            push_points(&mut pts, t.start, t.step, last, &mut budget)?;
        }
        return Ok(MultiplicityDomain { intervals: merge_intervals(pts), tail: None });
    }

    // Beyond `t0` only unbounded terms contribute, with period `l`.
    let mut l: u64 = 1;
    for t in &unbounded {
        l = l / gcd(l, t.step) * t.step;
        if l > NORMALIZE_LIMIT {
            return Err(too_large());
        }
    }
    let mut t0: u64 = 0;
    for t in terms {
        let edge = match t.end {
            Some(e) => e.checked_add(1).ok_or_else(too_large)?,
            None => t.start,
        };
        t0 = t0.max(edge);
    }
    t0.checked_add(2 * l).ok_or_else(too_large)?;

    // members below t0
    let mut pts = Vec::new();
    for t in terms {
        let hi = match t.end {
            Some(e) => e,
            None => {
                if t.start >= t0 {
                    continue;
                }
                t0 - 1
            }
        };
        if hi < t.start {
            continue;
        }
        let last = hi - (hi - t.start) % t.step;
        push_points(&mut pts, t.start, t.step, last, &mut budget)?;
    }
    let below = merge_intervals(pts);

    // residue pattern on [t0, t0 + l)
    let pattern: Vec<bool> = (0..l)
        .map(|r| unbounded.iter().any(|t| t.contains(t0 + r)))
        .collect();
    let mut period = l;
    for p in 1..l {
        if l.is_multiple_of(p) && (0..l).all(|r| pattern[r as usize] == pattern[(r % p) as usize]) {
            period = p;
            break;
        }
    }
    let tail_member = |c: u64| pattern[((c - t0) % l) as usize];
    let member = |c: u64| {
        if c >= t0 {
            tail_member(c)
        } else {
            in_intervals(&below, c)
        }
    };

    // Walk the threshold back while the periodic pattern keeps matching.
    let mut threshold = t0;
    while threshold > 0 {
        let x = threshold - 1;
        let want = member(x + period);
        if member(x) != want {
            break;
        }
        if period == 1 && want {
            // full tail: jump across the whole interval containing x
            let i = below.partition_point(|&(_, hi)| hi < x);
            threshold = below[i].0;
        } else {
            threshold = x;
        }
    }

    let mut start = threshold;
    while !member(start) {
        start += 1;
    }
    let residues: Vec<u64> = (0..period).filter(|&r| member(start + r)).collect();
    let intervals: Vec<(u64, u64)> = below
        .into_iter()
        .filter(|&(lo, _)| lo < threshold)
        .map(|(lo, hi)| (lo, hi.min(threshold - 1)))
        .collect();
    Ok(MultiplicityDomain {
        intervals,
        tail: Some(Tail { start, period, residues }),
    })
}

/// Renders canonical terms: `a`, `a..b`, `s..*`, `s..* step p`, comma separated.
impl fmt::Display for MultiplicityDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for t in self.terms() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            match t.end {
                Some(e) if e == t.start => write!(f, "{}", t.start)?,
                Some(e) => write!(f, "{}..{}", t.start, e)?,
                None if t.step == 1 => write!(f, "{}..*", t.start)?,
                None => write!(f, "{}..* step {}", t.start, t.step)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiplicityDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainParseError {
    /// Byte offset into the parsed text.
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for DomainParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for DomainParseError {}

/// Parses `term (, term)*` where `term := UINT | UINT .. (UINT | *) (step UINT)?`.
pub fn parse_terms(text: &str) -> Result<Vec<Term>, DomainParseError> {
    let mut p = TermParser { s: text.as_bytes(), i: 0 };
    let mut terms = vec![p.term()?];
    loop {
        p.ws();
        if p.i == p.s.len() {
            return Ok(terms);
        }
        p.expect(b',')?;
        terms.push(p.term()?);
    }
}

struct TermParser<'a> {
    s: &'a [u8],
    i: usize,
}

impl TermParser<'_> {
    fn err(&self, message: impl Into<String>) -> DomainParseError {
        DomainParseError { offset: self.i, message: message.into() }
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), DomainParseError> {
        self.ws();
        if self.s.get(self.i) == Some(&b) {
            self.i += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", b as char)))
        }
    }

    fn uint(&mut self) -> Result<u64, DomainParseError> {
        self.ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if start == self.i {
            return Err(self.err("expected a number"));
        }
        let txt = std::str::from_utf8(&self.s[start..self.i]).expect("ascii digits");
        txt.parse().map_err(|_| DomainParseError {
            offset: start,
            message: format!("number {txt} is out of range"),
        })
    }

    fn term(&mut self) -> Result<Term, DomainParseError> {
        let start = self.uint()?;
        self.ws();
        if !self.s[self.i..].starts_with(b"..") {
            return Ok(Term::single(start));
        }
        self.i += 2;
        self.ws();
        let end = if self.s.get(self.i) == Some(&b'*') {
            self.i += 1;
            None
        } else {
            Some(self.uint()?)
        };
        self.ws();
        let mut step = 1;
        if self.s[self.i..].starts_with(b"step") {
            self.i += 4;
            step = self.uint()?;
        }
        Ok(Term { start, step, end })
    }
}

impl FromStr for MultiplicityDomain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let terms = parse_terms(s).map_err(|e| e.to_string())?;
        MultiplicityDomain::new(&terms).map_err(|e| e.to_string())
    }
}

impl Serialize for MultiplicityDomain {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MultiplicityDomain {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
