use std::fmt::Write as _;
use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cfd_core::flat::{enumerate_flat, flat_product_report};
use cfd_core::hier::{check_flatten_bijection, enumerate_hier, hier_product_report};
use cfd_core::merge::{
    completeness_report, merge_report, mergeable_via_relaxed, representative_cfd, reverse_engineer, verify_minimal,
};
use cfd_core::syntax::parse_cfd_parts;
use cfd_core::treelike::{cfd_from_tree_like, decompose, tree_like_report, PadNamer};
use cfd_core::{
    compose, emit_cfd, parse_cfd_checked, parse_mset, parse_mset_file, Cfd, ComposeOp, HMultiset, MergeError,
    MergeInput, SemanticsError, DEFAULT_LIMIT,
};

#[derive(Parser)]
#[command(name = "cfd", version, about = "Flat and hierarchical semantics of cardinality-based feature diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Enumeration {
    /// Diagram file (DSL or JSON), or `-` for stdin.
    cfd: String,
    /// Largest multiplicity choice considered.
    #[arg(long)]
    bound: u64,
    /// Abort if there would be more products than this.
    #[arg(long, default_value_t = DEFAULT_LIMIT)]
    limit: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a diagram for well-formedness.
    Validate { cfd: String },
    /// Is the multiset a flat product of the diagram?
    CheckFlat { cfd: String, mset: String },
    /// Is the multiset a hierarchical product of the diagram?
    CheckHier { cfd: String, mset: String },
    /// List flat products with multiplicities up to the bound.
    EnumFlat(Enumeration),
    /// List hierarchical products with multiplicities up to the bound.
    EnumHier(Enumeration),
    /// Multiply counts along nesting down to a flat multiset.
    Flatten { mset: String },
    /// Set every count in the multiset to 1.
    Relax { mset: String },
    /// Is the multiset tree-like? Prints the reason when it is not.
    IsTreelike { mset: String },
    /// Print the tree, groups and multiplicities of a tree-like multiset.
    Decompose { mset: String },
    /// Build a diagram whose hierarchical theory holds the multiset.
    FromTreelike {
        mset: String,
        #[arg(long)]
        json: bool,
    },
    /// Do the multisets share a representative diagram?
    CheckMergeable {
        #[arg(required = true)]
        msets: Vec<String>,
        /// Decide on the relaxed set by construction instead.
        #[arg(long)]
        relaxed: bool,
    },
    /// Print a representative diagram of the multisets.
    Representative {
        #[arg(required = true)]
        msets: Vec<String>,
        /// Also check that no single-value domain tightening still holds them.
        #[arg(long)]
        verify_minimal: bool,
        #[arg(long)]
        json: bool,
    },
    /// Are the multisets exactly some diagram's hierarchical theory?
    CheckComplete {
        #[arg(required = true)]
        msets: Vec<String>,
    },
    /// Print the diagram whose hierarchical theory is exactly the multisets.
    ReverseEngineer {
        #[arg(required = true)]
        msets: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Merge, intersect or unite two diagrams through their theories.
    Compose {
        #[arg(long)]
        op: ComposeOp,
        cfd1: String,
        cfd2: String,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: u64,
        #[arg(long)]
        json: bool,
    },
    /// Check that flattening maps hierarchical products one-to-one onto flat ones.
    BijectionCheck {
        cfd: String,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: u64,
        /// Print every pair.
        #[arg(long)]
        verbose: bool,
    },
}

enum Failure {
    /// Located parse or validation messages, printed as they are.
    Diagnostics(String),
    Usage(String),
    Explosion(String),
}

impl From<SemanticsError> for Failure {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::Explosion { .. } => Failure::Explosion(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Standard output and the decision it carries.
struct Report {
    out: String,
    affirmative: bool,
}

impl Report {
    fn yes(out: String) -> Self {
        Report { out, affirmative: true }
    }

    fn no(out: String) -> Self {
        Report { out, affirmative: false }
    }
}

fn read_source(arg: &str) -> Result<String, Failure> {
    if arg == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("{arg}: {e}")))
    }
}

fn located(source: &str, d: impl std::fmt::Display) -> String {
    let name = if source == "-" { "<stdin>" } else { source };
    format!("{name}:{d}")
}

/// Syntax errors are usage errors; a well-formed but invalid diagram is
/// returned as `Ok(Err(diagnostics))` so `validate` can answer "no".
type Checked = Result<(Cfd, Vec<String>), Vec<String>>;

fn load_cfd_checked(arg: &str) -> Result<Checked, Failure> {
    let text = read_source(arg)?;
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{arg}: {e}")))?;
        let parts = Cfd::parts_from_json(&value).map_err(|e| Failure::Usage(format!("{arg}: {e}")))?;
        return Ok(match Cfd::new(parts) {
            Ok(c) => {
                let warnings = c.warnings().iter().map(|w| format!("{arg}: warning: {w}")).collect();
                Ok((c, warnings))
            }
            Err(e) => Err(vec![format!("{arg}: error: {e}")]),
        });
    }
    if let Err(d) = parse_cfd_parts(&text) {
        return Err(Failure::Diagnostics(located(arg, d)));
    }
    Ok(match parse_cfd_checked(&text) {
        Ok((c, warnings)) => Ok((c, warnings.iter().map(|d| located(arg, d)).collect())),
        Err(errors) => Err(errors.iter().map(|d| located(arg, d)).collect()),
    })
}

fn load_cfd(arg: &str) -> Result<Cfd, Failure> {
    match load_cfd_checked(arg)? {
        Ok((c, warnings)) => {
            for w in warnings {
                eprintln!("{w}");
            }
            Ok(c)
        }
        Err(errors) => Err(Failure::Diagnostics(errors.join("\n"))),
    }
}

/// A literal when it starts with `[`, otherwise a file (or `-`) holding
/// one multiset per line.
fn load_msets(arg: &str) -> Result<Vec<HMultiset>, Failure> {
    if arg.trim_start().starts_with('[') {
        return parse_mset(arg).map(|m| vec![m]).map_err(|d| Failure::Diagnostics(located("<argument>", d)));
    }
    let text = read_source(arg)?;
    parse_mset_file(&text).map_err(|d| Failure::Diagnostics(located(arg, d)))
}

fn load_mset(arg: &str) -> Result<HMultiset, Failure> {
    let mut all = load_msets(arg)?;
    if all.len() != 1 {
        return Err(Failure::Usage(format!("{arg}: expected one multiset, found {}", all.len())));
    }
    Ok(all.remove(0))
}

fn load_input(args: &[String]) -> Result<MergeInput, Failure> {
    let mut all = Vec::new();
    for a in args {
        all.extend(load_msets(a)?);
    }
    MergeInput::new(all).map_err(|e| Failure::Usage(e.to_string()))
}

fn render_cfd(c: &Cfd, json: bool) -> String {
    if json {
        let mut s = serde_json::to_string_pretty(&c.to_json()).expect("plain data serializes");
        s.push('\n');
        s
    } else {
        emit_cfd(c)
    }
}

fn sorted_lines<'a, I: IntoIterator<Item = &'a HMultiset>>(items: I) -> Vec<String> {
    let mut lines: Vec<String> = items.into_iter().map(|m| m.to_string()).collect();
    lines.sort();
    lines
}

fn listing(lines: Vec<String>, bound: u64, json: bool) -> String {
    if json {
        let v = serde_json::json!({ "bound": bound, "count": lines.len(), "products": lines });
        let mut s = serde_json::to_string_pretty(&v).expect("plain data serializes");
        s.push('\n');
        s
    } else {
        lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

fn answer(verdict: Option<String>) -> Report {
    match verdict {
        None => Report::yes("yes\n".to_string()),
        Some(why) => Report::no(format!("no: {why}\n")),
    }
}

/// Decision errors about the multiset itself are negative answers.
fn membership(r: Result<Option<String>, SemanticsError>) -> Result<Report, Failure> {
    match r {
        Ok(v) => Ok(answer(v)),
        Err(e @ (SemanticsError::NotFlat { .. } | SemanticsError::UnknownFeatures(_))) => Ok(answer(Some(e.to_string()))),
        Err(e) => Err(e.into()),
    }
}

fn run(command: Command) -> Result<Report, Failure> {
    Ok(match command {
        Command::Validate { cfd } => match load_cfd_checked(&cfd)? {
            Ok((_, warnings)) => {
                let mut out = String::from("valid\n");
                for w in warnings {
                    writeln!(out, "{w}").unwrap();
                }
                Report::yes(out)
            }
            Err(errors) => Report::no(errors.iter().map(|e| format!("{e}\n")).collect()),
        },
        Command::CheckFlat { cfd, mset } => {
            let (c, m) = (load_cfd(&cfd)?, load_mset(&mset)?);
            membership(flat_product_report(&c, &m).map(|v| v.map(|v| v.to_string())))?
        }
        Command::CheckHier { cfd, mset } => {
            let (c, m) = (load_cfd(&cfd)?, load_mset(&mset)?);
            membership(hier_product_report(&c, &m).map(|v| v.map(|v| v.to_string())))?
        }
        Command::EnumFlat(e) => {
            let slice = enumerate_flat(&load_cfd(&e.cfd)?, e.bound, e.limit)?;
            Report::yes(listing(sorted_lines(&slice.products), e.bound, e.json))
        }
        Command::EnumHier(e) => {
            let slice = enumerate_hier(&load_cfd(&e.cfd)?, e.bound, e.limit)?;
            Report::yes(listing(sorted_lines(&slice.products), e.bound, e.json))
        }
        Command::Flatten { mset } => {
            let m = load_mset(&mset)?;
            Report::yes(format!("{}\n", m.flatten().map_err(|e| Failure::Usage(e.to_string()))?))
        }
        Command::Relax { mset } => Report::yes(format!("{}\n", load_mset(&mset)?.relax())),
        Command::IsTreelike { mset } => answer(tree_like_report(&load_mset(&mset)?).err().map(|v| v.to_string())),
        Command::Decompose { mset } => match decompose(&load_mset(&mset)?) {
            Ok(w) => {
                let mut s = serde_json::to_string_pretty(&w.to_json()).expect("plain data serializes");
                s.push('\n');
                Report::yes(s)
            }
            Err(e) => Report::no(format!("no: {e}\n")),
        },
        Command::FromTreelike { mset, json } => match cfd_from_tree_like(&load_mset(&mset)?, &mut PadNamer::default()) {
            Ok(c) => Report::yes(render_cfd(&c, json)),
            Err(e) => Report::no(format!("no: {e}\n")),
        },
        Command::CheckMergeable { msets, relaxed } => {
            let u = load_input(&msets)?;
            if relaxed {
                if mergeable_via_relaxed(&u) {
                    Report::yes("mergeable\n".to_string())
                } else {
                    Report::no("not mergeable\n".to_string())
                }
            } else {
                let r = merge_report(&u);
                if r.is_mergeable() {
                    Report::yes("mergeable\n".to_string())
                } else {
                    let mut out = String::from("not mergeable\n");
                    for c in &r.conflicts {
                        writeln!(out, "  {c}").unwrap();
                    }
                    Report::no(out)
                }
            }
        }
        Command::Representative { msets, verify_minimal: verify, json } => {
            let u = load_input(&msets)?;
            match representative_cfd(&u) {
                Ok(c) => {
                    let out = render_cfd(&c, json);
                    if verify {
                        match verify_minimal(&c, &u) {
                            Ok(r) => match r.tighter {
                                None => eprintln!("minimal among single-value tightenings ({} products)", r.products),
                                Some(t) => {
                                    eprintln!(
                                        "not minimal: dropping {} from {} leaves {} of {} products",
                                        t.removed, t.element, t.products, r.products
                                    );
                                    return Ok(Report::no(out));
                                }
                            },
                            Err(e) => return Err(Failure::Usage(e.to_string())),
                        }
                    }
                    Report::yes(out)
                }
                Err(MergeError::NotMergeable(conflicts)) => {
                    let mut out = String::from("not mergeable\n");
                    for c in &conflicts {
                        writeln!(out, "  {c}").unwrap();
                    }
                    Report::no(out)
                }
                Err(e) => return Err(Failure::Usage(e.to_string())),
            }
        }
        Command::CheckComplete { msets } => {
            let r = completeness_report(&load_input(&msets)?);
            let flag = |b: bool| if b { "yes" } else { "no" };
            let mut out = String::new();
            writeln!(out, "{}", if r.is_complete() { "completely mergeable" } else { "not completely mergeable" })
                .unwrap();
            writeln!(out, "  mergeable: {}", flag(r.mergeable)).unwrap();
            writeln!(out, "  relaxed set completely mergeable: {}", flag(r.relaxed_complete)).unwrap();
            writeln!(out, "  every multiplicity combination present: {}", flag(r.combinations_complete)).unwrap();
            for f in &r.failures {
                writeln!(out, "  {f}").unwrap();
            }
            if r.is_complete() {
                Report::yes(out)
            } else {
                Report::no(out)
            }
        }
        Command::ReverseEngineer { msets, json } => match reverse_engineer(&load_input(&msets)?) {
            Ok(c) => Report::yes(render_cfd(&c, json)),
            Err(MergeError::NotCompletelyMergeable(r)) => {
                let mut out = String::from("not completely mergeable\n");
                for f in &r.failures {
                    writeln!(out, "  {f}").unwrap();
                }
                Report::no(out)
            }
            Err(e) => return Err(Failure::Usage(e.to_string())),
        },
        Command::Compose { op, cfd1, cfd2, bound, limit, json } => {
            let (a, b) = (load_cfd(&cfd1)?, load_cfd(&cfd2)?);
            let r = compose(&a, &b, op, bound, limit)?;
            let out = if json {
                let mut s = serde_json::to_string_pretty(&r.to_json()).expect("plain data serializes");
                s.push('\n');
                s
            } else {
                let scope = if r.exact { "exact" } else { "theories cut at the bound" };
                let mut s = format!("// {op} at bound {bound} ({scope})\n");
                match &r.result {
                    Some(c) => s.push_str(&emit_cfd(c)),
                    None => {
                        writeln!(s, "not composable: {}", r.reason.as_deref().unwrap_or("")).unwrap();
                        for c in &r.conflicts {
                            writeln!(s, "  {c}").unwrap();
                        }
                    }
                }
                s
            };
            if r.is_composable() {
                Report::yes(out)
            } else {
                Report::no(out)
            }
        }
        Command::BijectionCheck { cfd, bound, limit, verbose } => {
            match check_flatten_bijection(&load_cfd(&cfd)?, bound, limit)? {
                Ok(pairs) => {
                    let mut out = format!("bijection: {} pairs\n", pairs.len());
                    if verbose {
                        let mut lines: Vec<String> = pairs.iter().map(|(h, m)| format!("{h} -> {m}")).collect();
                        lines.sort();
                        for l in lines {
                            writeln!(out, "{l}").unwrap();
                        }
                    }
                    Report::yes(out)
                }
                Err(f) => Report::no(format!("not a bijection: {f}\n")),
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(r) => {
            print!("{}", r.out);
            ExitCode::from(if r.affirmative { 0 } else { 1 })
        }
        Err(Failure::Diagnostics(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Explosion(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
