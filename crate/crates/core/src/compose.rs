//! Merge, intersection and union of two diagrams, computed on their
//! hierarchical theories.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::cfd::Cfd;
use crate::error::SemanticsError;
use crate::hier::enumerate_hier;
use crate::merge::{completeness_report, merge_report, representative_cfd, MergeInput};
use crate::multiset::HMultiset;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ComposeOp {
    Merge,
    Intersection,
    Union,
}

impl fmt::Display for ComposeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComposeOp::Merge => "merge",
            ComposeOp::Intersection => "intersection",
            ComposeOp::Union => "union",
        })
    }
}

impl FromStr for ComposeOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "merge" => Ok(ComposeOp::Merge),
            "intersection" => Ok(ComposeOp::Intersection),
            "union" => Ok(ComposeOp::Union),
            other => Err(format!("unknown operation {other:?}; expected merge, intersection or union")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComposeReport {
    pub op: ComposeOp,
    pub bound: u64,
    /// True when both theories were enumerated in full at `bound`.
    pub exact: bool,
    pub result: Option<Cfd>,
    pub reason: Option<String>,
    pub conflicts: Vec<String>,
}

impl ComposeReport {
    pub fn is_composable(&self) -> bool {
        self.result.is_some()
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct J<'a> {
            composable: bool,
            op: String,
            bound: u64,
            exact: bool,
            reason: &'a Option<String>,
            conflicts: &'a [String],
            result_cfd: Option<serde_json::Value>,
        }
        serde_json::to_value(J {
            composable: self.is_composable(),
            op: self.op.to_string(),
            bound: self.bound,
            exact: self.exact,
            reason: &self.reason,
            conflicts: &self.conflicts,
            result_cfd: self.result.as_ref().map(Cfd::to_json),
        })
        .expect("plain data serializes")
    }
}

/// Enumerates both theories at `bound`, combines them with `op` and turns
/// the combined set back into a diagram.
///
/// For merge the result is the reverse-engineered diagram when the union is
/// exactly some diagram's theory, and a representative diagram otherwise.
/// Intersection and union require the combined set to be exactly a theory.
pub fn compose(c1: &Cfd, c2: &Cfd, op: ComposeOp, bound: u64, limit: u64) -> Result<ComposeReport, SemanticsError> {
    let covers = |c: &Cfd| c.max_multiplicity().is_some_and(|m| m <= bound);
    let t1 = enumerate_hier(c1, bound, limit)?.products;
    let t2 = enumerate_hier(c2, bound, limit)?.products;
    let combined: BTreeSet<HMultiset> = match op {
        ComposeOp::Merge | ComposeOp::Union => t1.union(&t2).cloned().collect(),
        ComposeOp::Intersection => t1.intersection(&t2).cloned().collect(),
    };
    let mut report = ComposeReport {
        op,
        bound,
        exact: covers(c1) && covers(c2),
        result: None,
        reason: None,
        conflicts: Vec::new(),
    };
    let Ok(u) = MergeInput::new(combined) else {
        report.reason = Some("the theories have no product in common".to_string());
        return Ok(report);
    };

    let complete = completeness_report(&u);
    if let Some(cfd) = complete.certificate {
        report.result = Some(cfd);
        return Ok(report);
    }
    if op == ComposeOp::Merge {
        let merge = merge_report(&u);
        if merge.is_mergeable() {
            report.result = Some(representative_cfd(&u).expect("mergeable"));
        } else {
            report.reason = Some("the union of the theories is not mergeable".to_string());
            report.conflicts = merge.conflicts.iter().map(ToString::to_string).collect();
        }
        return Ok(report);
    }
    report.reason = Some(if !complete.mergeable {
        format!("the {op} of the theories is not mergeable")
    } else if !complete.relaxed_complete {
        format!("the relaxed {op} is not completely mergeable")
    } else if !complete.combinations_complete {
        format!("the {op} misses some multiplicity combinations")
    } else {
        format!("the {op} is not the theory of its reverse-engineered diagram")
    });
    report.conflicts = complete.failures.iter().map(ToString::to_string).collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_LIMIT;
    use crate::syntax::cfd;

    fn fixture(name: &str) -> Cfd {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/");
        cfd(&std::fs::read_to_string(format!("{path}{name}")).unwrap())
    }

    #[test]
    fn op_names_round_trip() {
        for op in [ComposeOp::Merge, ComposeOp::Intersection, ComposeOp::Union] {
            assert_eq!(op.to_string().parse::<ComposeOp>(), Ok(op));
        }
        assert!("xor".parse::<ComposeOp>().is_err());
    }

    #[test]
    fn idempotent() {
        for name in ["fig12_d.cfd", "vehicle_axle3.cfd", "fig9_rep.cfd"] {
            let d = fixture(name);
            for op in [ComposeOp::Merge, ComposeOp::Intersection, ComposeOp::Union] {
                let r = compose(&d, &d, op, 5, DEFAULT_LIMIT).unwrap();
                assert!(r.exact);
                assert_eq!(r.result.as_ref(), Some(&d), "{name} {op}");
            }
        }
    }

    #[test]
    fn fig3_merge_conflicts_on_parents() {
        let r = compose(&fixture("fig3_d1.cfd"), &fixture("fig3_d2.cfd"), ComposeOp::Merge, 2, DEFAULT_LIMIT).unwrap();
        assert!(!r.is_composable());
        assert!(r.conflicts.iter().any(|c| c.starts_with("parent conflict")), "{:?}", r.conflicts);
        let j = r.to_json();
        assert_eq!(j["composable"], false);
        assert!(j["result_cfd"].is_null());
    }

    #[test]
    fn union_with_a_sub_theory() {
        // D restricted to b = 5.
        let d = fixture("fig12_d.cfd");
        let partial = cfd("feature a { b [5] group <1> { c d [3] } }");
        let r = compose(&d, &partial, ComposeOp::Union, 5, DEFAULT_LIMIT).unwrap();
        assert_eq!(r.result, Some(d.clone()));
        let r = compose(&d, &partial, ComposeOp::Intersection, 5, DEFAULT_LIMIT).unwrap();
        assert_eq!(r.result, Some(partial));

        let lone = cfd("feature a { b [2] group <1> { c d [1] } }");
        let r = compose(&d, &lone, ComposeOp::Union, 5, DEFAULT_LIMIT).unwrap();
        assert!(!r.is_composable());
        let r = compose(&d, &lone, ComposeOp::Merge, 5, DEFAULT_LIMIT).unwrap();
        let rep = r.result.unwrap();
        let dd = rep.card(&crate::feature::fid("d")).unwrap();
        assert!(dd.contains(1) && dd.contains(3));
    }

    #[test]
    fn disjoint_roots() {
        let r = compose(&cfd("feature a {}"), &cfd("feature b {}"), ComposeOp::Intersection, 1, DEFAULT_LIMIT).unwrap();
        assert!(!r.is_composable());
        let r = compose(&cfd("feature a {}"), &cfd("feature b {}"), ComposeOp::Union, 1, DEFAULT_LIMIT).unwrap();
        assert!(r.reason.unwrap().contains("not mergeable"));
    }
}
