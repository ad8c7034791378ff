//! Loci, actions, forks, and designs: the basic material of interaction.
//!
//! Interaction happens at *loci* — addresses coded as finite sequences of
//! naturals, rendered `0.1.1` (the root address is the empty sequence,
//! rendered as the empty string). An *action* either focuses a locus and
//! creates a finite set of subaddresses named by a *ramification*, or is the
//! daimon `†`, the positive give-up step that ends a play.
//!
//! A *design* is a tree of rules over a base *fork* `Γ ⊢ Δ` (`Γ` empty or a
//! single locus, all base loci pairwise prefix-disjoint):
//!
//! * the daimon rule closes any positive fork;
//! * a positive rule picks a focus ξ on the right and a ramification `I`,
//!   opening one negative premise `ξ⋆i ⊢ Λ_i` per `i ∈ I`, where the `Λ_i`
//!   are pairwise disjoint subsets of the remaining positive context
//!   (context loci may also be dropped);
//! * a negative rule on the unique left locus ξ offers a branch per
//!   ramification `J` in a set 𝒩 (possibly empty), each opening a positive
//!   premise `⊢ {ξ⋆j : j ∈ J} ∪ Λ_J`.
//!
//! Designs may be infinite; a [`LazyGen`] node keeps a deterministic
//! generator in the tree (used by [`fax`]) and [`expand`] materializes it to
//! any finite depth.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Errors raised while reading or writing the textual and JSON formats.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum FormatError {
    /// Underlying JSON syntax error.
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    /// A locus string such as `0.1.1` failed to parse.
    #[error("invalid locus `{text}`")]
    Locus { text: String },
    /// An action string such as `(+,0,{{1}})` failed to parse.
    #[error("invalid action `{text}`")]
    Action { text: String },
    /// A ramification string such as `{{1,2}}` failed to parse.
    #[error("invalid ramification `{text}`")]
    Ram { text: String },
    /// A fork string such as `|- 0` failed to parse.
    #[error("invalid fork `{text}`")]
    Fork { text: String },
    /// The base of a design file listed more than one negative locus.
    #[error("design base has {n} negative loci (at most one allowed)")]
    BaseArity { n: usize },
    /// Two branches of one negative rule carried the same ramification.
    #[error("duplicate branch {j} in negative rule")]
    DuplicateBranch { j: String },
    /// The premise keys of a positive rule do not match its ramification.
    #[error("premise keys {keys} do not match ramification {ram}")]
    PremiseKeys { keys: String, ram: String },
    /// A context entry refers to an index outside the ramification.
    #[error("ctx key {key} not in ramification {ram}")]
    CtxKey { key: String, ram: String },
    /// A lazy node named a generator this library does not know.
    #[error("unknown lazy generator `{gen}`")]
    UnknownLazyGen { gen: String },
    /// A lazy node's `args` object was malformed.
    #[error("bad lazy generator args: {detail}")]
    BadLazyArgs { detail: String },
}

/// Errors raised by the core design operations.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum CoreError {
    /// `delocate` met a locus that does not extend the source prefix.
    #[error("PREFIX_MISMATCH: locus `{locus}` does not extend the source prefix")]
    PrefixMismatch { locus: Locus },
    /// A file or text payload failed to parse.
    #[error(transparent)]
    Format(#[from] FormatError),
}

// ---------------------------------------------------------------------------
// Locus
// ---------------------------------------------------------------------------

/// An address in the universe of interaction: a finite sequence of naturals.
///
/// Rendered with dots (`0.1.1`); the root is the empty sequence and renders
/// as the empty string.
///
/// # Examples
///
/// ```
/// use ludics_core::core::{append, Locus};
///
/// let xi: Locus = "0.1".parse().unwrap();
/// assert_eq!(append(&xi, 1).to_string(), "0.1.1");
/// assert!(xi.is_prefix_of(&append(&xi, 1)));
/// ```
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Locus(Vec<u32>);

impl Locus {
    /// The root address (empty sequence).
    pub fn root() -> Self {
        Locus(Vec::new())
    }

    /// Builds a locus from explicit segments.
    pub fn from_segments(segments: Vec<u32>) -> Self {
        Locus(segments)
    }

    /// The segments of the address, outermost first.
    pub fn segments(&self) -> &[u32] {
        &self.0
    }

    /// Number of segments.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True for the root address.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The child address `self ⋆ i`.
    pub fn child(&self, i: u32) -> Locus {
        let mut v = self.0.clone();
        v.push(i);
        Locus(v)
    }

    /// True iff `self` is a (non-strict) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Locus) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// The segments of `self` below `prefix`, if `prefix` is a prefix.
    pub fn strip_prefix(&self, prefix: &Locus) -> Option<&[u32]> {
        if prefix.is_prefix_of(self) {
            Some(&self.0[prefix.0.len()..])
        } else {
            None
        }
    }

    /// Replaces the prefix `from` by `to`, failing if `from` is not a prefix.
    pub fn reroot(&self, from: &Locus, to: &Locus) -> Result<Locus, CoreError> {
        match self.strip_prefix(from) {
            Some(rest) => {
                let mut v = to.0.clone();
                v.extend_from_slice(rest);
                Ok(Locus(v))
            }
            None => Err(CoreError::PrefixMismatch {
                locus: self.clone(),
            }),
        }
    }
}

/// Appends one more segment to a locus: `append(ξ, i) = ξ⋆i`.
pub fn append(l: &Locus, i: u32) -> Locus {
    l.child(i)
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for seg in &self.0 {
            if !first {
                write!(f, ".")?;
            }
            write!(f, "{seg}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Locus {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Locus::root());
        }
        let mut segs = Vec::new();
        for part in s.split('.') {
            let seg = part.trim().parse::<u32>().map_err(|_| FormatError::Locus {
                text: s.to_string(),
            })?;
            segs.push(seg);
        }
        Ok(Locus(segs))
    }
}

// ---------------------------------------------------------------------------
// Polarity, ramification, actions
// ---------------------------------------------------------------------------

/// The polarity of an action or fork: positive acts, negative reacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Polarity {
    Pos,
    Neg,
}

impl Polarity {
    /// The opposite polarity.
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarity::Pos => write!(f, "+"),
            Polarity::Neg => write!(f, "-"),
        }
    }
}

/// A ramification: the finite set of naturals an action creates below its
/// anchor. Rendered `{1,2}`; the empty ramification renders `{}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Ram(BTreeSet<u32>);

impl Ram {
    /// The empty ramification.
    pub fn empty() -> Self {
        Ram(BTreeSet::new())
    }

    pub fn contains(&self, i: u32) -> bool {
        self.0.contains(&i)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True iff every index of `self` also occurs in `bound`.
    pub fn is_subset(&self, bound: &Ram) -> bool {
        self.0.is_subset(&bound.0)
    }
}

impl FromIterator<u32> for Ram {
    /// Builds a ramification from any iterator of indices.
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        Ram(iter.into_iter().collect())
    }
}

impl fmt::Display for Ram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for i in &self.0 {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        write!(f, "}}")
    }
}

impl FromStr for Ram {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = if let Some(stripped) = t.strip_prefix('{') {
            stripped.strip_suffix('}').ok_or_else(|| FormatError::Ram {
                text: s.to_string(),
            })?
        } else {
            t
        };
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(Ram::empty());
        }
        let mut set = BTreeSet::new();
        for part in inner.split(',') {
            let i = part.trim().parse::<u32>().map_err(|_| FormatError::Ram {
                text: s.to_string(),
            })?;
            set.insert(i);
        }
        Ok(Ram(set))
    }
}

/// All subsets of a ramification bound, in a deterministic order.
pub fn subsets(bound: &Ram) -> Vec<Ram> {
    let elems: Vec<u32> = bound.iter().collect();
    let n = elems.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0u64..(1u64 << n) {
        let mut set = BTreeSet::new();
        for (k, &e) in elems.iter().enumerate() {
            if mask & (1 << k) != 0 {
                set.insert(e);
            }
        }
        out.push(Ram(set));
    }
    out.sort();
    out
}

/// An action: the daimon `†`, or a proper action `(ε, ξ, I)` focusing the
/// anchor ξ with ramification `I`.
///
/// # Examples
///
/// ```
/// use ludics_core::core::Action;
///
/// let a: Action = "(+,0.1,{1,2})".parse().unwrap();
/// assert_eq!(a.to_string(), "(+,0.1,{1,2})");
/// assert_eq!("†".parse::<Action>().unwrap(), Action::Daimon);
/// ```
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Action {
    Daimon,
    Proper {
        pol: Polarity,
        anchor: Locus,
        ram: Ram,
    },
}

impl Action {
    /// Shorthand for a positive proper action.
    pub fn pos(anchor: Locus, ram: Ram) -> Self {
        Action::Proper {
            pol: Polarity::Pos,
            anchor,
            ram,
        }
    }

    /// Shorthand for a negative proper action.
    pub fn neg(anchor: Locus, ram: Ram) -> Self {
        Action::Proper {
            pol: Polarity::Neg,
            anchor,
            ram,
        }
    }

    /// The polarity of the action. The daimon counts as positive.
    pub fn polarity(&self) -> Polarity {
        match self {
            Action::Daimon => Polarity::Pos,
            Action::Proper { pol, .. } => *pol,
        }
    }

    pub fn is_daimon(&self) -> bool {
        matches!(self, Action::Daimon)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Daimon => write!(f, "†"),
            Action::Proper { pol, anchor, ram } => write!(f, "({pol},{anchor},{ram})"),
        }
    }
}

impl FromStr for Action {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t == "†" || t == "+†" {
            return Ok(Action::Daimon);
        }
        let err = || FormatError::Action {
            text: s.to_string(),
        };
        let inner = t
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or_else(err)?;
        let (pol_str, rest) = inner.split_once(',').ok_or_else(err)?;
        let pol = match pol_str.trim() {
            "+" => Polarity::Pos,
            "-" | "−" => Polarity::Neg,
            _ => return Err(err()),
        };
        // The anchor runs up to the comma that precedes the `{`.
        let brace = rest.find('{').ok_or_else(err)?;
        let anchor_part = rest[..brace].trim().strip_suffix(',').ok_or_else(err)?;
        let anchor: Locus = anchor_part.trim().parse().map_err(|_| err())?;
        let ram: Ram = rest[brace..].trim().parse().map_err(|_| err())?;
        Ok(Action::Proper { pol, anchor, ram })
    }
}

/// Renders a trace as the concatenation of its action strings.
pub fn trace_string(trace: &[Action]) -> String {
    trace.iter().map(|a| a.to_string()).collect()
}

// ---------------------------------------------------------------------------
// Forks
// ---------------------------------------------------------------------------

/// A fork `Γ ⊢ Δ`: at most one negative locus on the left, a finite set of
/// positive loci on the right, all pairwise prefix-disjoint.
///
/// A fork with empty `Γ` is *positive* (it is the turn of this design to
/// act); a fork with a left locus is *negative*.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Fork {
    pub neg: Option<Locus>,
    pub pos: BTreeSet<Locus>,
}

impl Fork {
    /// A positive fork `⊢ Δ`.
    pub fn positive<I: IntoIterator<Item = Locus>>(pos: I) -> Self {
        Fork {
            neg: None,
            pos: pos.into_iter().collect(),
        }
    }

    /// A negative fork `ξ ⊢ Δ`.
    pub fn negative<I: IntoIterator<Item = Locus>>(neg: Locus, pos: I) -> Self {
        Fork {
            neg: Some(neg),
            pos: pos.into_iter().collect(),
        }
    }

    /// The polarity of the fork.
    pub fn polarity(&self) -> Polarity {
        if self.neg.is_some() {
            Polarity::Neg
        } else {
            Polarity::Pos
        }
    }

    /// All loci of the fork, left first.
    pub fn loci(&self) -> Vec<&Locus> {
        let mut v: Vec<&Locus> = Vec::new();
        if let Some(n) = &self.neg {
            v.push(n);
        }
        v.extend(self.pos.iter());
        v
    }

    /// Checks pairwise prefix-disjointness; returns an offending pair if any.
    pub fn well_formed(&self) -> Result<(), (Locus, Locus)> {
        let loci = self.loci();
        for (i, a) in loci.iter().enumerate() {
            for b in loci.iter().skip(i + 1) {
                if a.is_prefix_of(b) || b.is_prefix_of(a) {
                    return Err(((*a).clone(), (*b).clone()));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Fork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.neg {
            write!(f, "{n} ")?;
        }
        write!(f, "|-")?;
        let mut first = true;
        for p in &self.pos {
            if first {
                write!(f, " {p}")?;
            } else {
                write!(f, ", {p}")?;
            }
            first = false;
        }
        Ok(())
    }
}

impl FromStr for Fork {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FormatError::Fork {
            text: s.to_string(),
        };
        let t = s.replace('⊢', "|-");
        let (left, right) = t.split_once("|-").ok_or_else(err)?;
        let left = left.trim();
        let neg = if left.is_empty() {
            None
        } else {
            Some(left.parse::<Locus>().map_err(|_| err())?)
        };
        let mut pos = BTreeSet::new();
        let right = right.trim();
        if !right.is_empty() {
            for part in right.split(',') {
                pos.insert(part.trim().parse::<Locus>().map_err(|_| err())?);
            }
        }
        Ok(Fork { neg, pos })
    }
}

// ---------------------------------------------------------------------------
// Rule trees and designs
// ---------------------------------------------------------------------------

/// A deterministic generator for an infinite design fragment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum LazyGen {
    /// The fax: the infinite copycat on `left ⊢ right`. One expansion step
    /// produces a negative rule on `left` with one branch per subset `J` of
    /// `ram_bound`, each continuing with `(+, right, J)` and, per `i ∈ J`,
    /// the fax on `right⋆i ⊢ left⋆i`.
    Fax {
        left: Locus,
        right: Locus,
        ram_bound: Ram,
    },
}

impl LazyGen {
    /// Materializes exactly one layer of the generator.
    pub fn materialize(&self) -> RuleNode {
        match self {
            LazyGen::Fax {
                left,
                right,
                ram_bound,
            } => {
                let mut branches = BTreeMap::new();
                for j_set in subsets(ram_bound) {
                    let mut premises = BTreeMap::new();
                    let mut ctx = BTreeMap::new();
                    for i in j_set.iter() {
                        premises.insert(
                            i,
                            RuleNode::Lazy(LazyGen::Fax {
                                left: right.child(i),
                                right: left.child(i),
                                ram_bound: ram_bound.clone(),
                            }),
                        );
                        ctx.insert(i, BTreeSet::from([left.child(i)]));
                    }
                    let tree = RuleNode::Pos {
                        focus: right.clone(),
                        ram: j_set.clone(),
                        premises,
                        ctx,
                    };
                    branches.insert(
                        j_set,
                        Branch {
                            tree,
                            ctx: BTreeSet::from([right.clone()]),
                        },
                    );
                }
                RuleNode::Neg {
                    anchor: left.clone(),
                    branches,
                }
            }
        }
    }
}

/// One branch of a negative rule: the continuation tree and the context loci
/// `Λ_J` carried into the branch's positive premise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Branch {
    pub tree: RuleNode,
    pub ctx: BTreeSet<Locus>,
}

/// A node of a design tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RuleNode {
    /// The daimon `†`: gives up at a positive fork.
    Daimon,
    /// A positive rule `(+, focus, ram)`. `premises[i]` continues at the
    /// negative fork `focus⋆i ⊢ ctx[i]`; the `ctx[i]` are pairwise disjoint
    /// subsets of the fork's remaining positive loci.
    Pos {
        focus: Locus,
        ram: Ram,
        premises: BTreeMap<u32, RuleNode>,
        ctx: BTreeMap<u32, BTreeSet<Locus>>,
    },
    /// A negative rule on `anchor` with a branch per ramification in 𝒩.
    Neg {
        anchor: Locus,
        branches: BTreeMap<Ram, Branch>,
    },
    /// An unexpanded generator.
    Lazy(LazyGen),
}

impl RuleNode {
    /// Depth of the materialized tree in rule layers (lazy nodes count 1).
    pub fn depth(&self) -> usize {
        match self {
            RuleNode::Daimon | RuleNode::Lazy(_) => 1,
            RuleNode::Pos { premises, .. } => {
                1 + premises.values().map(RuleNode::depth).max().unwrap_or(0)
            }
            RuleNode::Neg { branches, .. } => {
                1 + branches.values().map(|b| b.tree.depth()).max().unwrap_or(0)
            }
        }
    }
}

/// A design: a rule tree over a base fork.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Design {
    pub base: Fork,
    pub root: RuleNode,
}

impl Design {
    /// The daimon design on a (positive) base fork.
    pub fn daimon_on(base: Fork) -> Design {
        Design {
            base,
            root: RuleNode::Daimon,
        }
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// How `validate` should treat lazy generator nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LazyPolicy {
    /// Lazy nodes are violations (`LAZY_UNEXPANDED`).
    Forbid,
    /// Lazy nodes are accepted where a negative rule is expected.
    Allow,
}

/// Codes for validation findings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[non_exhaustive]
pub enum ViolationCode {
    PolarityMismatch,
    OrphanFocus,
    AnchorMismatch,
    LazyUnexpanded,
    CtxNotInFork,
    CtxOverlap,
    PremiseMismatch,
    BaseMalformed,
    EmptyRamification,
    EmptyBranchSet,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::PolarityMismatch => "POLARITY_MISMATCH",
            ViolationCode::OrphanFocus => "ORPHAN_FOCUS",
            ViolationCode::AnchorMismatch => "ANCHOR_MISMATCH",
            ViolationCode::LazyUnexpanded => "LAZY_UNEXPANDED",
            ViolationCode::CtxNotInFork => "CTX_NOT_IN_FORK",
            ViolationCode::CtxOverlap => "CTX_OVERLAP",
            ViolationCode::PremiseMismatch => "PREMISE_MISMATCH",
            ViolationCode::BaseMalformed => "BASE_MALFORMED",
            ViolationCode::EmptyRamification => "EMPTY_RAMIFICATION",
            ViolationCode::EmptyBranchSet => "EMPTY_BRANCH_SET",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One validation finding, locating the node by a tree path.
#[derive(Debug, Clone)]
pub struct Violation {
    pub code: ViolationCode,
    pub at: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.at, self.detail)
    }
}

/// The outcome of validating a design: hard violations and advisory
/// warnings (empty ramifications `(+,ξ,∅)` and empty branch sets 𝒩 = ∅ are
/// legal but worth flagging).
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    /// True iff no hard violation was found.
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            writeln!(f, "valid")?;
        } else {
            writeln!(f, "invalid")?;
        }
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Validates a design against the fork discipline, rejecting lazy nodes.
///
/// Checks, per node: polarity against the current fork, focus membership
/// (`ORPHAN_FOCUS`), anchor agreement (`ANCHOR_MISMATCH`), context routing
/// (pairwise disjoint, inside the fork), and premise/ramification agreement.
pub fn validate(d: &Design) -> ValidationReport {
    validate_with(d, LazyPolicy::Forbid)
}

/// Validates a design, with an explicit policy for lazy generator nodes.
pub fn validate_with(d: &Design, policy: LazyPolicy) -> ValidationReport {
    let mut report = ValidationReport::default();
    if let Err((a, b)) = d.base.well_formed() {
        report.violations.push(Violation {
            code: ViolationCode::BaseMalformed,
            at: "base".to_string(),
            detail: format!("base loci `{a}` and `{b}` overlap"),
        });
    }
    check_node(&d.root, &d.base, "root", policy, &mut report);
    report
}

fn check_node(
    node: &RuleNode,
    fork: &Fork,
    path: &str,
    policy: LazyPolicy,
    report: &mut ValidationReport,
) {
    match (fork.polarity(), node) {
        (Polarity::Pos, RuleNode::Daimon) => {}
        (
            Polarity::Pos,
            RuleNode::Pos {
                focus,
                ram,
                premises,
                ctx,
            },
        ) => {
            if !fork.pos.contains(focus) {
                report.violations.push(Violation {
                    code: ViolationCode::OrphanFocus,
                    at: path.to_string(),
                    detail: format!("focus `{focus}` not in fork `{fork}`"),
                });
            }
            if ram.is_empty() {
                report.warnings.push(Violation {
                    code: ViolationCode::EmptyRamification,
                    at: path.to_string(),
                    detail: format!("(+,{focus},{{}}) has no premises"),
                });
            }
            // Premise keys must be exactly the ramification.
            let keys: BTreeSet<u32> = premises.keys().copied().collect();
            let ram_set: BTreeSet<u32> = ram.iter().collect();
            if keys != ram_set {
                report.violations.push(Violation {
                    code: ViolationCode::PremiseMismatch,
                    at: path.to_string(),
                    detail: format!("premises keyed {keys:?} but ramification is {ram}"),
                });
            }
            // Context routing: pairwise disjoint, inside the fork minus focus.
            let mut seen: BTreeSet<&Locus> = BTreeSet::new();
            for (i, lam) in ctx {
                if !ram.contains(*i) {
                    report.violations.push(Violation {
                        code: ViolationCode::PremiseMismatch,
                        at: path.to_string(),
                        detail: format!("ctx routed to index {i} outside ramification {ram}"),
                    });
                    continue;
                }
                for l in lam {
                    if l == focus || !fork.pos.contains(l) {
                        report.violations.push(Violation {
                            code: ViolationCode::CtxNotInFork,
                            at: path.to_string(),
                            detail: format!("ctx locus `{l}` not available in fork `{fork}`"),
                        });
                    }
                    if !seen.insert(l) {
                        report.violations.push(Violation {
                            code: ViolationCode::CtxOverlap,
                            at: path.to_string(),
                            detail: format!("ctx locus `{l}` routed to two premises"),
                        });
                    }
                }
            }
            for (i, prem) in premises {
                let lam = ctx.get(i).cloned().unwrap_or_default();
                let sub = Fork::negative(focus.child(*i), lam);
                let sub_path = format!("{path}/premise {i}");
                check_node(prem, &sub, &sub_path, policy, report);
            }
        }
        (Polarity::Pos, RuleNode::Neg { anchor, .. }) => {
            report.violations.push(Violation {
                code: ViolationCode::PolarityMismatch,
                at: path.to_string(),
                detail: format!("negative rule on `{anchor}` at positive fork `{fork}`"),
            });
        }
        (Polarity::Neg, RuleNode::Neg { anchor, branches }) => {
            let expected = fork.neg.as_ref().expect("negative fork has a left locus");
            if anchor != expected {
                report.violations.push(Violation {
                    code: ViolationCode::AnchorMismatch,
                    at: path.to_string(),
                    detail: format!("anchor `{anchor}` differs from fork locus `{expected}`"),
                });
            }
            if branches.is_empty() {
                report.warnings.push(Violation {
                    code: ViolationCode::EmptyBranchSet,
                    at: path.to_string(),
                    detail: format!("no branches at `{anchor}` (the stuck negative design)"),
                });
            }
            for (j, branch) in branches {
                for l in &branch.ctx {
                    if !fork.pos.contains(l) {
                        report.violations.push(Violation {
                            code: ViolationCode::CtxNotInFork,
                            at: format!("{path}/branch {j}"),
                            detail: format!("branch ctx locus `{l}` not in fork `{fork}`"),
                        });
                    }
                }
                let mut pos: BTreeSet<Locus> = j.iter().map(|i| expected.child(i)).collect();
                pos.extend(branch.ctx.iter().cloned());
                let sub = Fork::positive(pos);
                let sub_path = format!("{path}/branch {j}");
                check_node(&branch.tree, &sub, &sub_path, policy, report);
            }
        }
        (Polarity::Neg, RuleNode::Lazy(_)) if policy == LazyPolicy::Allow => {}
        (_, RuleNode::Lazy(_)) => {
            report.violations.push(Violation {
                code: ViolationCode::LazyUnexpanded,
                at: path.to_string(),
                detail: "lazy generator node; expand the design first".to_string(),
            });
        }
        (Polarity::Neg, RuleNode::Daimon) => {
            report.violations.push(Violation {
                code: ViolationCode::PolarityMismatch,
                at: path.to_string(),
                detail: format!("daimon at negative fork `{fork}`"),
            });
        }
        (Polarity::Neg, RuleNode::Pos { focus, .. }) => {
            report.violations.push(Violation {
                code: ViolationCode::PolarityMismatch,
                at: path.to_string(),
                detail: format!("positive rule on `{focus}` at negative fork `{fork}`"),
            });
        }
    }
}

// ---------------------------------------------------------------------------
// Delocation
// ---------------------------------------------------------------------------

/// Transports a design from the subtree under `from` to the subtree under
/// `to`, replacing the prefix on every locus (base, anchors, foci, contexts,
/// and lazy generators alike).
///
/// Errors with `PREFIX_MISMATCH` if any locus does not extend `from`.
///
/// # Examples
///
/// ```
/// use ludics_core::core::{delocate, Design, Fork, RuleNode, Ram};
///
/// let d = Design::daimon_on(Fork::positive(["0".parse().unwrap()]));
/// let moved = delocate(&d, &"0".parse().unwrap(), &"5".parse().unwrap()).unwrap();
/// assert_eq!(moved.base, Fork::positive(["5".parse().unwrap()]));
/// ```
pub fn delocate(d: &Design, from: &Locus, to: &Locus) -> Result<Design, CoreError> {
    let neg = match &d.base.neg {
        Some(n) => Some(n.reroot(from, to)?),
        None => None,
    };
    let mut pos = BTreeSet::new();
    for p in &d.base.pos {
        pos.insert(p.reroot(from, to)?);
    }
    Ok(Design {
        base: Fork { neg, pos },
        root: reloc_node(&d.root, from, to)?,
    })
}

fn reloc_node(node: &RuleNode, from: &Locus, to: &Locus) -> Result<RuleNode, CoreError> {
    Ok(match node {
        RuleNode::Daimon => RuleNode::Daimon,
        RuleNode::Pos {
            focus,
            ram,
            premises,
            ctx,
        } => {
            let mut new_premises = BTreeMap::new();
            for (i, p) in premises {
                new_premises.insert(*i, reloc_node(p, from, to)?);
            }
            let mut new_ctx = BTreeMap::new();
            for (i, lam) in ctx {
                let mut set = BTreeSet::new();
                for l in lam {
                    set.insert(l.reroot(from, to)?);
                }
                new_ctx.insert(*i, set);
            }
            RuleNode::Pos {
                focus: focus.reroot(from, to)?,
                ram: ram.clone(),
                premises: new_premises,
                ctx: new_ctx,
            }
        }
        RuleNode::Neg { anchor, branches } => {
            let mut new_branches = BTreeMap::new();
            for (j, b) in branches {
                let mut set = BTreeSet::new();
                for l in &b.ctx {
                    set.insert(l.reroot(from, to)?);
                }
                new_branches.insert(
                    j.clone(),
                    Branch {
                        tree: reloc_node(&b.tree, from, to)?,
                        ctx: set,
                    },
                );
            }
            RuleNode::Neg {
                anchor: anchor.reroot(from, to)?,
                branches: new_branches,
            }
        }
        RuleNode::Lazy(LazyGen::Fax {
            left,
            right,
            ram_bound,
        }) => RuleNode::Lazy(LazyGen::Fax {
            left: left.reroot(from, to)?,
            right: right.reroot(from, to)?,
            ram_bound: ram_bound.clone(),
        }),
    })
}

// ---------------------------------------------------------------------------
// Fax, expansion, chronicles
// ---------------------------------------------------------------------------

/// The fax design on `xi ⊢ xi_prime`: the lazily generated copycat that
/// relays every move on one side to the other, for ramifications within
/// `ram_bound`. Normalizing a design against a fax delocates it.
///
/// # Examples
///
/// ```
/// use ludics_core::core::{expand, fax, Ram, RuleNode};
///
/// let f = fax(&"0".parse().unwrap(), &"5".parse().unwrap(), &Ram::from_iter([0]));
/// let e = expand(&f, 1);
/// match &e.root {
///     RuleNode::Neg { branches, .. } => assert_eq!(branches.len(), 2),
///     _ => unreachable!(),
/// }
/// ```
pub fn fax(xi: &Locus, xi_prime: &Locus, ram_bound: &Ram) -> Design {
    Design {
        base: Fork::negative(xi.clone(), [xi_prime.clone()]),
        root: RuleNode::Lazy(LazyGen::Fax {
            left: xi.clone(),
            right: xi_prime.clone(),
            ram_bound: ram_bound.clone(),
        }),
    }
}

/// Materializes lazy generator nodes sitting at tree depth `< depth` (the
/// root is depth 0). Idempotent: expanding an expanded design again at the
/// same depth changes nothing; already-finite designs are returned as-is.
pub fn expand(d: &Design, depth: usize) -> Design {
    Design {
        base: d.base.clone(),
        root: expand_node(&d.root, 0, depth),
    }
}

fn expand_node(node: &RuleNode, at: usize, depth: usize) -> RuleNode {
    match node {
        RuleNode::Lazy(gen) if at < depth => expand_node(&gen.materialize(), at, depth),
        RuleNode::Lazy(_) => node.clone(),
        RuleNode::Daimon => RuleNode::Daimon,
        RuleNode::Pos {
            focus,
            ram,
            premises,
            ctx,
        } => RuleNode::Pos {
            focus: focus.clone(),
            ram: ram.clone(),
            premises: premises
                .iter()
                .map(|(i, p)| (*i, expand_node(p, at + 1, depth)))
                .collect(),
            ctx: ctx.clone(),
        },
        RuleNode::Neg { anchor, branches } => RuleNode::Neg {
            anchor: anchor.clone(),
            branches: branches
                .iter()
                .map(|(j, b)| {
                    (
                        j.clone(),
                        Branch {
                            tree: expand_node(&b.tree, at + 1, depth),
                            ctx: b.ctx.clone(),
                        },
                    )
                })
                .collect(),
        },
    }
}

/// A chronicle: an alternating sequence of actions read off a design tree,
/// with the daimon only in final position.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Chronicle(pub Vec<Action>);

impl Chronicle {
    /// True iff proper actions alternate in polarity and `†` is last.
    pub fn alternates(&self) -> bool {
        for (k, a) in self.0.iter().enumerate() {
            if a.is_daimon() && k + 1 != self.0.len() {
                return false;
            }
            if k > 0 {
                let prev = &self.0[k - 1];
                if !prev.is_daimon() && prev.polarity() == a.polarity() {
                    return false;
                }
            }
        }
        true
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Chronicle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// All nonempty root-to-node action sequences of a design, up to the given
/// length. Lazy fragments are expanded as far as the requested depth first,
/// so the walk only meets materialized rules.
///
/// Every prefix of a chronicle is itself returned (plays are closed under
/// prefixes); the one-node daimon design yields exactly `{⟨†⟩}`.
pub fn chronicles(d: &Design, depth: usize) -> BTreeSet<Chronicle> {
    let e = expand(d, depth);
    let mut out = BTreeSet::new();
    let mut prefix = Vec::new();
    walk_chronicles(&e.root, &mut prefix, depth, &mut out);
    out
}

fn walk_chronicles(
    node: &RuleNode,
    prefix: &mut Vec<Action>,
    depth: usize,
    out: &mut BTreeSet<Chronicle>,
) {
    if prefix.len() >= depth {
        return;
    }
    match node {
        RuleNode::Daimon => {
            prefix.push(Action::Daimon);
            out.insert(Chronicle(prefix.clone()));
            prefix.pop();
        }
        RuleNode::Pos {
            focus,
            ram,
            premises,
            ..
        } => {
            prefix.push(Action::pos(focus.clone(), ram.clone()));
            out.insert(Chronicle(prefix.clone()));
            for p in premises.values() {
                walk_chronicles(p, prefix, depth, out);
            }
            prefix.pop();
        }
        RuleNode::Neg { anchor, branches } => {
            for (j, b) in branches {
                prefix.push(Action::neg(anchor.clone(), j.clone()));
                out.insert(Chronicle(prefix.clone()));
                walk_chronicles(&b.tree, prefix, depth, out);
                prefix.pop();
            }
        }
        RuleNode::Lazy(_) => {
            // Only reachable at the depth boundary; nothing to record.
        }
    }
}

// ---------------------------------------------------------------------------
// JSON layer
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DesignDoc {
    base: BaseDoc,
    tree: NodeDoc,
}

#[derive(Serialize, Deserialize)]
struct BaseDoc {
    #[serde(default)]
    neg: Vec<String>,
    #[serde(default)]
    pos: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
enum NodeDoc {
    Daimon,
    Pos {
        focus: String,
        ram: Vec<u32>,
        #[serde(default)]
        premises: BTreeMap<String, NodeDoc>,
        #[serde(default)]
        ctx: BTreeMap<String, Vec<String>>,
    },
    Neg {
        anchor: String,
        #[serde(default)]
        branches: Vec<BranchDoc>,
    },
    Lazy {
        gen: String,
        args: serde_json::Value,
    },
}

#[derive(Serialize, Deserialize)]
struct BranchDoc {
    #[serde(rename = "J")]
    j: Vec<u32>,
    #[serde(default)]
    ctx: Vec<String>,
    tree: NodeDoc,
}

fn locus_from(text: &str) -> Result<Locus, FormatError> {
    text.parse()
}

fn node_to_doc(node: &RuleNode) -> NodeDoc {
    match node {
        RuleNode::Daimon => NodeDoc::Daimon,
        RuleNode::Pos {
            focus,
            ram,
            premises,
            ctx,
        } => NodeDoc::Pos {
            focus: focus.to_string(),
            ram: ram.iter().collect(),
            premises: premises
                .iter()
                .map(|(i, p)| (i.to_string(), node_to_doc(p)))
                .collect(),
            ctx: ctx
                .iter()
                .filter(|(_, lam)| !lam.is_empty())
                .map(|(i, lam)| (i.to_string(), lam.iter().map(|l| l.to_string()).collect()))
                .collect(),
        },
        RuleNode::Neg { anchor, branches } => NodeDoc::Neg {
            anchor: anchor.to_string(),
            branches: branches
                .iter()
                .map(|(j, b)| BranchDoc {
                    j: j.iter().collect(),
                    ctx: b.ctx.iter().map(|l| l.to_string()).collect(),
                    tree: node_to_doc(&b.tree),
                })
                .collect(),
        },
        RuleNode::Lazy(LazyGen::Fax {
            left,
            right,
            ram_bound,
        }) => NodeDoc::Lazy {
            gen: "fax".to_string(),
            args: serde_json::json!({
                "left": left.to_string(),
                "right": right.to_string(),
                "ram_bound": ram_bound.iter().collect::<Vec<u32>>(),
            }),
        },
    }
}

fn node_from_doc(doc: &NodeDoc) -> Result<RuleNode, FormatError> {
    match doc {
        NodeDoc::Daimon => Ok(RuleNode::Daimon),
        NodeDoc::Pos {
            focus,
            ram,
            premises,
            ctx,
        } => {
            let focus = locus_from(focus)?;
            let ram_set = Ram::from_iter(ram.iter().copied());
            let mut prem = BTreeMap::new();
            for (k, v) in premises {
                let i: u32 = k.parse().map_err(|_| FormatError::PremiseKeys {
                    keys: k.clone(),
                    ram: ram_set.to_string(),
                })?;
                prem.insert(i, node_from_doc(v)?);
            }
            let keys: BTreeSet<u32> = prem.keys().copied().collect();
            let ram_as_set: BTreeSet<u32> = ram_set.iter().collect();
            if keys != ram_as_set {
                return Err(FormatError::PremiseKeys {
                    keys: format!("{keys:?}"),
                    ram: ram_set.to_string(),
                });
            }
            let mut ctx_map: BTreeMap<u32, BTreeSet<Locus>> = BTreeMap::new();
            for i in ram_set.iter() {
                ctx_map.insert(i, BTreeSet::new());
            }
            for (k, v) in ctx {
                let i: u32 = k.parse().map_err(|_| FormatError::CtxKey {
                    key: k.clone(),
                    ram: ram_set.to_string(),
                })?;
                if !ram_set.contains(i) {
                    return Err(FormatError::CtxKey {
                        key: k.clone(),
                        ram: ram_set.to_string(),
                    });
                }
                let mut set = BTreeSet::new();
                for l in v {
                    set.insert(locus_from(l)?);
                }
                ctx_map.insert(i, set);
            }
            Ok(RuleNode::Pos {
                focus,
                ram: ram_set,
                premises: prem,
                ctx: ctx_map,
            })
        }
        NodeDoc::Neg { anchor, branches } => {
            let anchor = locus_from(anchor)?;
            let mut map = BTreeMap::new();
            for b in branches {
                let j = Ram::from_iter(b.j.iter().copied());
                let mut ctx = BTreeSet::new();
                for l in &b.ctx {
                    ctx.insert(locus_from(l)?);
                }
                let branch = Branch {
                    tree: node_from_doc(&b.tree)?,
                    ctx,
                };
                if map.insert(j.clone(), branch).is_some() {
                    return Err(FormatError::DuplicateBranch { j: j.to_string() });
                }
            }
            Ok(RuleNode::Neg {
                anchor,
                branches: map,
            })
        }
        NodeDoc::Lazy { gen, args } => {
            if gen != "fax" {
                return Err(FormatError::UnknownLazyGen { gen: gen.clone() });
            }
            let obj = args.as_object().ok_or_else(|| FormatError::BadLazyArgs {
                detail: "args must be an object".to_string(),
            })?;
            let get_locus = |key: &str| -> Result<Locus, FormatError> {
                obj.get(key)
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| FormatError::BadLazyArgs {
                        detail: format!("missing string field `{key}`"),
                    })
                    .and_then(locus_from)
            };
            let left = get_locus("left")?;
            let right = get_locus("right")?;
            let ram_bound = obj
                .get("ram_bound")
                .and_then(|v| v.as_array())
                .ok_or_else(|| FormatError::BadLazyArgs {
                    detail: "missing array field `ram_bound`".to_string(),
                })?
                .iter()
                .map(|v| {
                    v.as_u64()
                        .map(|n| n as u32)
                        .ok_or_else(|| FormatError::BadLazyArgs {
                            detail: "ram_bound entries must be naturals".to_string(),
                        })
                })
                .collect::<Result<Vec<u32>, _>>()?;
            Ok(RuleNode::Lazy(LazyGen::Fax {
                left,
                right,
                ram_bound: Ram::from_iter(ram_bound),
            }))
        }
    }
}

impl Design {
    /// Serializes to the design JSON document.
    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = DesignDoc {
            base: BaseDoc {
                neg: self.base.neg.iter().map(|l| l.to_string()).collect(),
                pos: self.base.pos.iter().map(|l| l.to_string()).collect(),
            },
            tree: node_to_doc(&self.root),
        };
        serde_json::to_value(doc).expect("design serialization cannot fail")
    }

    /// Pretty-printed JSON text of the design.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value())
            .expect("design serialization cannot fail")
    }

    /// Reads a design from a JSON value.
    pub fn from_json_value(v: &serde_json::Value) -> Result<Design, FormatError> {
        let doc: DesignDoc = serde_json::from_value(v.clone())?;
        if doc.base.neg.len() > 1 {
            return Err(FormatError::BaseArity {
                n: doc.base.neg.len(),
            });
        }
        let neg = match doc.base.neg.first() {
            Some(s) => Some(locus_from(s)?),
            None => None,
        };
        let mut pos = BTreeSet::new();
        for p in &doc.base.pos {
            pos.insert(locus_from(p)?);
        }
        Ok(Design {
            base: Fork { neg, pos },
            root: node_from_doc(&doc.tree)?,
        })
    }

    /// Reads a design from JSON text.
    pub fn from_json_str(s: &str) -> Result<Design, FormatError> {
        let v: serde_json::Value = serde_json::from_str(s)?;
        Design::from_json_value(&v)
    }
}

// ---------------------------------------------------------------------------
// Human-readable rendering
// ---------------------------------------------------------------------------

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "base: {}", self.base)?;
        render_node(&self.root, 0, f)
    }
}

fn render_node(node: &RuleNode, indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let pad = "  ".repeat(indent);
    match node {
        RuleNode::Daimon => writeln!(f, "{pad}†"),
        RuleNode::Pos {
            focus,
            ram,
            premises,
            ctx,
        } => {
            write!(f, "{pad}(+,{focus},{ram})")?;
            let routed: Vec<String> = ctx
                .iter()
                .filter(|(_, lam)| !lam.is_empty())
                .map(|(i, lam)| {
                    let loci: Vec<String> = lam.iter().map(|l| l.to_string()).collect();
                    format!("{i} <- {}", loci.join(","))
                })
                .collect();
            if routed.is_empty() {
                writeln!(f)?;
            } else {
                writeln!(f, "  [ctx {}]", routed.join("; "))?;
            }
            for p in premises.values() {
                render_node(p, indent + 1, f)?;
            }
            Ok(())
        }
        RuleNode::Neg { anchor, branches } => {
            if branches.is_empty() {
                return writeln!(f, "{pad}(-,{anchor},·)  [no branches]");
            }
            for (j, b) in branches {
                write!(f, "{pad}(-,{anchor},{j})")?;
                if b.ctx.is_empty() {
                    writeln!(f)?;
                } else {
                    let loci: Vec<String> = b.ctx.iter().map(|l| l.to_string()).collect();
                    writeln!(f, "  [ctx {}]", loci.join(","))?;
                }
                render_node(&b.tree, indent + 1, f)?;
            }
            Ok(())
        }
        RuleNode::Lazy(LazyGen::Fax {
            left,
            right,
            ram_bound,
        }) => {
            writeln!(f, "{pad}fax {left} |- {right}  (ram bound {ram_bound})")
        }
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
