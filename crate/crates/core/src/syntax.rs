//! Text formats: multiset literals, multiset files and the CFD DSL.
//!
//! ```text
//! mset   := '[' item (',' item)* ']' | '[]'
//! item   := (IDENT | mset) ('^' UINT)?
//!
//! cfd    := 'feature' IDENT block
//! block  := '{' member* '}'
//! member := IDENT dom? block? ';'?
//!         | 'group' '<' domain '>' '{' member* '}'
//! dom    := '[' domain ']'
//! ```
//!
//! Whitespace is insignificant and `//` starts a line comment in diagram
//! text. Multiset files hold one literal per line with `#` comments.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::cfd::{Cfd, CfdParts, Group, Violation};
use crate::domain::{parse_terms, MultiplicityDomain};
use crate::feature::{is_ident_char, FeatureId};
use crate::multiset::HMultiset;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A located message; lines and columns are 1-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseDiagnostic {
    fn error(pos: Pos, message: impl Into<String>) -> Self {
        ParseDiagnostic { severity: Severity::Error, line: pos.line, column: pos.col, message: message.into() }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseDiagnostic {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    col: usize,
}

struct Cursor<'a> {
    src: &'a str,
    i: usize,
    line: usize,
    col: usize,
    slash_comments: bool,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, slash_comments: bool) -> Self {
        Cursor { src, i: 0, line: 1, col: 1, slash_comments }
    }

    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.i..].chars().next()
    }

    fn rest(&self) -> &'a str {
        &self.src[self.i..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.i += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') if self.slash_comments && self.rest().starts_with("//") => {
                    while !matches!(self.peek(), None | Some('\n')) {
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.peek().is_none()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn describe_next(&mut self) -> String {
        self.skip_ws();
        match self.peek() {
            None => "end of input".to_string(),
            Some(c) => format!("{c:?}"),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseDiagnostic> {
        if self.eat(c) {
            Ok(())
        } else {
            let found = self.describe_next();
            Err(ParseDiagnostic::error(self.pos(), format!("expected '{c}', found {found}")))
        }
    }

    fn ident(&mut self) -> Result<(FeatureId, Pos), ParseDiagnostic> {
        self.skip_ws();
        let pos = self.pos();
        let start = self.i;
        while self.peek().is_some_and(is_ident_char) {
            self.bump();
        }
        if start == self.i {
            let found = self.describe_next();
            return Err(ParseDiagnostic::error(pos, format!("expected a feature name, found {found}")));
        }
        let id = FeatureId::new(&self.src[start..self.i]).expect("identifier characters checked");
        Ok((id, pos))
    }

    fn uint(&mut self) -> Result<u64, ParseDiagnostic> {
        self.skip_ws();
        let pos = self.pos();
        let start = self.i;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.bump();
        }
        let txt = &self.src[start..self.i];
        if txt.is_empty() {
            let found = self.describe_next();
            return Err(ParseDiagnostic::error(pos, format!("expected a number, found {found}")));
        }
        txt.parse()
            .map_err(|_| ParseDiagnostic::error(pos, format!("number {txt} is out of range")))
    }

    /// Position of byte offset `off` within `self.src`, for offsets at or
    /// after the cursor.
    fn pos_at(&self, off: usize) -> Pos {
        let mut p = self.pos();
        for c in self.src[self.i..off].chars() {
            if c == '\n' {
                p.line += 1;
                p.col = 1;
            } else {
                p.col += 1;
            }
        }
        p
    }
}

// ---------------------------------------------------------------- multisets

fn mset_inner(cur: &mut Cursor) -> Result<HMultiset, ParseDiagnostic> {
    cur.expect('[')?;
    let mut m = HMultiset::new();
    if cur.eat(']') {
        return Ok(m);
    }
    loop {
        cur.skip_ws();
        let pos = cur.pos();
        enum Item {
            Atom(FeatureId),
            Nested(HMultiset),
        }
        let item = if cur.peek() == Some('[') {
            Item::Nested(mset_inner(cur)?)
        } else {
            Item::Atom(cur.ident()?.0)
        };
        let count = if cur.eat('^') { cur.uint()? } else { 1 };
        let res = match item {
            Item::Atom(f) => m.insert_atom(f, count),
            Item::Nested(n) => m.insert_nested(n, count),
        };
        res.map_err(|e| ParseDiagnostic::error(pos, e.to_string()))?;
        if cur.eat(']') {
            return Ok(m);
        }
        if !cur.eat(',') {
            let found = cur.describe_next();
            return Err(ParseDiagnostic::error(cur.pos(), format!("expected ',' or ']', found {found}")));
        }
    }
}

/// Parses one multiset literal.
pub fn parse_mset(text: &str) -> Result<HMultiset, ParseDiagnostic> {
    let mut cur = Cursor::new(text, false);
    let m = mset_inner(&mut cur)?;
    if !cur.at_end() {
        let found = cur.describe_next();
        return Err(ParseDiagnostic::error(cur.pos(), format!("unexpected {found} after multiset")));
    }
    Ok(m)
}

/// Parses a multiset file: one literal per line, blank lines and `#`
/// comments ignored. Order and duplicates are preserved.
pub fn parse_mset_file(text: &str) -> Result<Vec<HMultiset>, ParseDiagnostic> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let m = parse_mset(body).map_err(|mut d| {
            d.line = n + 1;
            d
        })?;
        out.push(m);
    }
    Ok(out)
}

pub fn emit_mset(m: &HMultiset) -> String {
    m.to_string()
}

impl FromStr for HMultiset {
    type Err = ParseDiagnostic;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_mset(s)
    }
}

/// Parses a literal known to be valid. Panics otherwise.
pub fn mset(text: &str) -> HMultiset {
    parse_mset(text).unwrap_or_else(|e| panic!("bad multiset literal {text:?}: {e}"))
}

// ----------------------------------------------------------------- diagrams

#[derive(Default)]
struct Locations {
    features: BTreeMap<FeatureId, Pos>,
    groups: BTreeMap<Group, Pos>,
}

struct DslParser<'a> {
    cur: Cursor<'a>,
    parts: CfdParts,
    locs: Locations,
}

impl DslParser<'_> {
    fn domain(&mut self, close: char) -> Result<MultiplicityDomain, ParseDiagnostic> {
        self.cur.skip_ws();
        let start_pos = self.cur.pos();
        let start = self.cur.i;
        let Some(len) = self.cur.rest().find(close) else {
            return Err(ParseDiagnostic::error(start_pos, format!("missing '{close}'")));
        };
        let text = &self.cur.src[start..start + len];
        let terms = parse_terms(text).map_err(|e| {
            ParseDiagnostic::error(self.cur.pos_at(start + e.offset), format!("bad domain: {}", e.message))
        })?;
        let d = MultiplicityDomain::new(&terms)
            .map_err(|e| ParseDiagnostic::error(start_pos, format!("bad domain: {e}")))?;
        while self.cur.i < start + len {
            self.cur.bump();
        }
        self.cur.expect(close)?;
        Ok(d)
    }

    fn is_group_start(&mut self) -> bool {
        self.cur.skip_ws();
        let rest = self.cur.rest();
        if let Some(after) = rest.strip_prefix("group") {
            let after = after.trim_start();
            return after.starts_with('<');
        }
        false
    }

    fn add(&mut self, f: FeatureId, pos: Pos, parent: &FeatureId, d: MultiplicityDomain) -> Result<(), ParseDiagnostic> {
        if self.locs.features.contains_key(&f) {
            return Err(ParseDiagnostic::error(pos, format!("duplicate feature name {f}")));
        }
        self.locs.features.insert(f.clone(), pos);
        self.parts.add_feature(f, parent.clone(), d);
        Ok(())
    }

    /// Members up to the closing `}` of the current block.
    fn members(&mut self, parent: &FeatureId, in_group: Option<&mut Vec<FeatureId>>) -> Result<(), ParseDiagnostic> {
        let mut grouped = in_group;
        loop {
            if self.cur.eat('}') {
                return Ok(());
            }
            if self.cur.at_end() {
                return Err(ParseDiagnostic::error(self.cur.pos(), "expected '}', found end of input"));
            }
            if self.is_group_start() {
                let pos = self.cur.pos();
                if grouped.is_some() {
                    return Err(ParseDiagnostic::error(pos, "groups cannot contain groups"));
                }
                for _ in 0.."group".len() {
                    self.cur.bump();
                }
                self.cur.expect('<')?;
                let card = self.domain('>')?;
                self.cur.expect('{')?;
                let mut members = Vec::new();
                self.members(parent, Some(&mut members))?;
                let g: Group = members.into_iter().collect();
                self.locs.groups.entry(g.clone()).or_insert(pos);
                self.parts.groups.insert(g, card);
                continue;
            }
            let (f, pos) = self.cur.ident()?;
            let d = if self.cur.eat('[') { self.domain(']')? } else { MultiplicityDomain::one() };
            self.add(f.clone(), pos, parent, d)?;
            if let Some(g) = grouped.as_deref_mut() {
                g.push(f.clone());
            }
            if self.cur.eat('{') {
                self.members(&f, None)?;
            }
            self.cur.eat(';');
        }
    }
}

fn parse_with_locations(text: &str) -> Result<(CfdParts, Locations), ParseDiagnostic> {
    let mut cur = Cursor::new(text, true);
    cur.skip_ws();
    let kw_pos = cur.pos();
    let (kw, _) = cur.ident().map_err(|_| ParseDiagnostic::error(kw_pos, "expected 'feature'"))?;
    if kw.as_str() != "feature" {
        return Err(ParseDiagnostic::error(kw_pos, format!("expected 'feature', found {kw}")));
    }
    let (root, root_pos) = cur.ident()?;
    let mut p = DslParser { cur, parts: CfdParts::new(root.clone()), locs: Locations::default() };
    p.locs.features.insert(root.clone(), root_pos);
    p.cur.expect('{')?;
    p.members(&root, None)?;
    if !p.cur.at_end() {
        let found = p.cur.describe_next();
        return Err(ParseDiagnostic::error(p.cur.pos(), format!("unexpected {found} after diagram")));
    }
    Ok((p.parts, p.locs))
}

/// Parses the DSL without checking well-formedness.
pub fn parse_cfd_parts(text: &str) -> Result<CfdParts, ParseDiagnostic> {
    parse_with_locations(text).map(|(p, _)| p)
}

fn violation_pos(v: &Violation, locs: &Locations, root: Pos) -> Pos {
    let f = match v {
        Violation::RootHasParent(f)
        | Violation::RootHasCard(f)
        | Violation::Cycle(f)
        | Violation::MissingCard(f)
        | Violation::CardForUnknown(f) => Some(f),
        Violation::UnknownParent { feature, .. } => Some(feature),
        Violation::GroupsOverlap { shared, .. } => Some(shared),
        Violation::GroupTooSmall(g)
        | Violation::GroupContainsRoot(g)
        | Violation::GroupNotSiblings(g)
        | Violation::GroupCardUnbounded(g)
        | Violation::GroupCardExceedsSize { group: g, .. }
        | Violation::GroupUnknownMember { group: g, .. } => {
            return locs.groups.get(g).copied().unwrap_or(root);
        }
    };
    f.and_then(|f| locs.features.get(f).copied()).unwrap_or(root)
}

/// Parses and validates a diagram. On success the vector holds warnings.
pub fn parse_cfd_checked(text: &str) -> Result<(Cfd, Vec<ParseDiagnostic>), Vec<ParseDiagnostic>> {
    let (parts, locs) = parse_with_locations(text).map_err(|d| vec![d])?;
    let root_pos = locs.features[&parts.root];
    let report = crate::cfd::validate(&parts);
    if !report.is_ok() {
        return Err(report
            .violations
            .iter()
            .map(|v| ParseDiagnostic::error(violation_pos(v, &locs, root_pos), v.to_string()))
            .collect());
    }
    let warnings = report
        .warnings
        .iter()
        .map(|w| {
            let crate::cfd::Warning::GroupedFeatureAllowsZero(f) = w;
            let pos = locs.features.get(f).copied().unwrap_or(root_pos);
            ParseDiagnostic {
                severity: Severity::Warning,
                line: pos.line,
                column: pos.col,
                message: w.to_string(),
            }
        })
        .collect();
    let cfd = Cfd::new(parts).expect("validated above");
    Ok((cfd, warnings))
}

pub fn parse_cfd(text: &str) -> Result<Cfd, Vec<ParseDiagnostic>> {
    parse_cfd_checked(text).map(|(c, _)| c)
}

/// Parses a diagram known to be valid. Panics otherwise.
pub fn cfd(text: &str) -> Cfd {
    parse_cfd(text).unwrap_or_else(|e| {
        let msgs: Vec<String> = e.iter().map(|d| d.to_string()).collect();
        panic!("bad diagram: {}", msgs.join("; "))
    })
}

impl FromStr for Cfd {
    type Err = Vec<ParseDiagnostic>;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_cfd(s)
    }
}

/// Renders the DSL: four-space indentation, solitary children before
/// groups, names in order, `[1]` omitted.
pub fn emit_cfd(cfd: &Cfd) -> String {
    let mut out = format!("feature {} {{", cfd.root());
    let body = emit_block(cfd, cfd.root(), 1);
    if body.is_empty() {
        out.push_str("}\n");
    } else {
        out.push('\n');
        out.push_str(&body);
        out.push_str("}\n");
    }
    out
}

fn emit_block(cfd: &Cfd, f: &FeatureId, level: usize) -> String {
    let mut out = String::new();
    let pad = "    ".repeat(level);
    for c in cfd.solitary_children(f).expect("known feature") {
        emit_member(cfd, c, level, &mut out);
    }
    for g in cfd.child_groups(f).expect("known feature") {
        let card = cfd.group_card(g).expect("known group");
        out.push_str(&format!("{pad}group <{card}> {{\n"));
        for m in g {
            emit_member(cfd, m, level + 1, &mut out);
        }
        out.push_str(&format!("{pad}}}\n"));
    }
    out
}

fn emit_member(cfd: &Cfd, f: &FeatureId, level: usize, out: &mut String) {
    let pad = "    ".repeat(level);
    out.push_str(&pad);
    out.push_str(f.as_str());
    let card = cfd.card(f).expect("non-root feature");
    if *card != MultiplicityDomain::one() {
        out.push_str(&format!(" [{card}]"));
    }
    let body = emit_block(cfd, f, level + 1);
    if body.is_empty() {
        out.push('\n');
    } else {
        out.push_str(" {\n");
        out.push_str(&body);
        out.push_str(&pad);
        out.push_str("}\n");
    }
}

/// Set of distinct multisets in a file, for set-valued inputs.
pub fn mset_set(items: Vec<HMultiset>) -> BTreeSet<HMultiset> {
    items.into_iter().collect()
}
