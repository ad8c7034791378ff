//! Cut-nets and their normalization: running two designs against each other.
//!
//! A *net* pairs a design whose base is `⊢ σ` (the positive role) with one
//! whose base is `σ ⊢ Δ₂` (the negative role); σ is the *cut* locus. The
//! interaction machine executes the positive design's actions against the
//! negative one's reactions:
//!
//! * the daimon converges the run;
//! * a positive action at a locus the other side governs looks up the branch
//!   with the same ramification — if none exists, the run *diverges*;
//! * a positive action at a residual locus (one of the Δ₂ addresses, which
//!   nobody governs) is *emitted* into the result design, and every branch
//!   the environment could choose next is explored in turn, dropping the
//!   divergent ones.
//!
//! A net with `Δ₂ = ∅` is *closed*: it either converges to the daimon,
//! diverges, or exhausts its step budget. Closed-net runs decide
//! [`orthogonal`]ity. Open nets leave a result design on `⊢ Δ₂`; normalizing
//! against a fax produces the delocated design this way.
//!
//! Every step consumes one unit of budget; runs are deterministic, and the
//! trace produced under a smaller budget is a prefix of the trace produced
//! under a larger one. Closed-net traces alternate and end with `†` on
//! convergence. Open-net traces interleave the exploration of environment
//! branches and need not alternate globally.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{validate_with, Action, Branch, Design, Fork, LazyPolicy, Locus, Ram, RuleNode};

/// Errors raised while forming or running a net.
#[derive(Debug, Error)]
#[non_exhaustive]
pub enum NetError {
    /// The two bases share no dual locus.
    #[error("NO_CUT: the designs share no dual locus")]
    NoCut,
    /// The two bases share more than one dual locus.
    #[error("MULTIPLE_CUTS: shared dual loci {loci}")]
    MultipleCuts { loci: String },
    /// A residual locus occurs on (or overlaps a locus of) both bases.
    #[error("BASE_OVERLAP: residual loci `{a}` and `{b}` overlap across the bases")]
    BaseOverlap { a: Locus, b: Locus },
    /// One of the designs fails validation.
    #[error("INVALID_DESIGN: the {which} design is ill-formed: {detail}")]
    InvalidDesign { which: &'static str, detail: String },
    /// The net is not of the runnable shape `⊢ σ` against `σ ⊢ Δ₂`.
    #[error("INVALID_NET: {detail}")]
    InvalidNet { detail: String },
    /// An operation that needs a closed net was given an open one.
    #[error("NOT_CLOSED: residual loci remain ({residuals})")]
    NotClosed { residuals: String },
}

/// A cut-net: a positive-role design on `⊢ σ` cut against a negative-role
/// design on `σ ⊢ Δ₂`. Built by [`make_net`], which sorts out which design
/// plays which role.
#[derive(Debug, Clone)]
pub struct Net {
    pos: Design,
    neg: Design,
    cut: Locus,
}

impl Net {
    /// The design playing the positive role.
    pub fn pos(&self) -> &Design {
        &self.pos
    }

    /// The design playing the negative role.
    pub fn neg(&self) -> &Design {
        &self.neg
    }

    /// The cut locus σ.
    pub fn cut(&self) -> &Locus {
        &self.cut
    }

    /// The residual loci Δ₂ (the base of the normal form).
    pub fn residuals(&self) -> &BTreeSet<Locus> {
        &self.neg.base.pos
    }

    /// True iff the net has no residual loci.
    pub fn is_closed(&self) -> bool {
        self.neg.base.pos.is_empty()
    }
}

/// Forms a net from two designs, assigning roles automatically.
///
/// The designs must validate (lazy generators are fine), share exactly one
/// dual locus, and have prefix-disjoint residual bases. The design whose
/// base is exactly `⊢ σ` takes the positive role.
pub fn make_net(d: &Design, e: &Design) -> Result<Net, NetError> {
    for (which, design) in [("first", d), ("second", e)] {
        let report = validate_with(design, LazyPolicy::Allow);
        if !report.ok() {
            return Err(NetError::InvalidDesign {
                which,
                detail: report
                    .violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            });
        }
    }

    // Dual shared loci: positive in one base, the negative locus of the other.
    let mut cuts: BTreeSet<Locus> = BTreeSet::new();
    if let Some(n) = &e.base.neg {
        if d.base.pos.contains(n) {
            cuts.insert(n.clone());
        }
    }
    if let Some(n) = &d.base.neg {
        if e.base.pos.contains(n) {
            cuts.insert(n.clone());
        }
    }
    let cut = match cuts.len() {
        0 => return Err(NetError::NoCut),
        1 => cuts.into_iter().next().expect("one cut"),
        _ => {
            let loci: Vec<String> = cuts.iter().map(|l| format!("`{l}`")).collect();
            return Err(NetError::MultipleCuts {
                loci: loci.join(", "),
            });
        }
    };

    let (pos, neg) = if e.base.neg.as_ref() == Some(&cut) && d.base.pos.contains(&cut) {
        (d.clone(), e.clone())
    } else {
        (e.clone(), d.clone())
    };

    // Residuals (everything except the cut) must stay prefix-disjoint across
    // the two bases.
    let pos_res: Vec<&Locus> = pos.base.loci().into_iter().filter(|l| **l != cut).collect();
    let neg_res: Vec<&Locus> = neg.base.loci().into_iter().filter(|l| **l != cut).collect();
    for a in &pos_res {
        for b in &neg_res {
            if a.is_prefix_of(b) || b.is_prefix_of(a) {
                return Err(NetError::BaseOverlap {
                    a: (*a).clone(),
                    b: (*b).clone(),
                });
            }
        }
    }

    Ok(Net { pos, neg, cut })
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// The interaction reached the daimon (and, on open nets, finished
    /// assembling the normal form).
    Converged,
    /// A positive action met no matching branch.
    Diverged,
    /// The step budget ran out first.
    Exhausted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Converged => write!(f, "converged"),
            Verdict::Diverged => write!(f, "diverged"),
            Verdict::Exhausted => write!(f, "exhausted"),
        }
    }
}

/// The full record of one normalization run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub verdict: Verdict,
    /// The visible interaction at the cut, in execution order.
    pub trace: Vec<Action>,
    /// On divergence, the positive action that found no branch.
    pub failing: Option<Action>,
    /// Budget units consumed.
    pub steps: usize,
    /// On convergence, the normal form (base `⊢ Δ₂`).
    pub result: Option<Design>,
}

#[derive(Serialize, Deserialize)]
struct OutcomeDoc {
    verdict: String,
    trace: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    failing: Option<String>,
    steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<serde_json::Value>,
}

impl Outcome {
    /// Serializes the outcome to its JSON document.
    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = OutcomeDoc {
            verdict: self.verdict.to_string(),
            trace: self.trace.iter().map(|a| a.to_string()).collect(),
            failing: self.failing.as_ref().map(|a| a.to_string()),
            steps: self.steps,
            result: self.result.as_ref().map(|d| d.to_json_value()),
        };
        serde_json::to_value(doc).expect("outcome serialization cannot fail")
    }

    /// Pretty-printed JSON text of the outcome.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value())
            .expect("outcome serialization cannot fail")
    }
}

/// Which design an environment entry or a step belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    PosSide,
    NegSide,
}

impl Side {
    fn oriented(self, anchor: Locus, ram: Ram) -> Action {
        match self {
            Side::PosSide => Action::pos(anchor, ram),
            Side::NegSide => Action::neg(anchor, ram),
        }
    }
}

type Env = BTreeMap<Locus, (Side, RuleNode)>;

enum RunResult {
    Done(RuleNode),
    Diverged(Action),
    Exhausted,
}

struct Machine {
    budget: usize,
    steps: usize,
    trace: Vec<Action>,
    residuals: BTreeSet<Locus>,
}

impl Machine {
    fn spend(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        self.steps += 1;
        true
    }

    fn keep_locus(&self, l: &Locus) -> bool {
        self.residuals.iter().any(|r| r.is_prefix_of(l))
    }

    /// Resolves an environment-side node to its negative rule, materializing
    /// one lazy layer if needed.
    fn as_neg(node: &RuleNode) -> (Locus, BTreeMap<Ram, Branch>) {
        match node {
            RuleNode::Neg { anchor, branches } => (anchor.clone(), branches.clone()),
            RuleNode::Lazy(gen) => Self::as_neg(&gen.materialize()),
            _ => unreachable!("environment entries sit at negative forks"),
        }
    }

    fn run(&mut self, mut side: Side, mut node: RuleNode, env: &mut Env) -> RunResult {
        loop {
            match node {
                RuleNode::Daimon => {
                    if !self.spend() {
                        return RunResult::Exhausted;
                    }
                    self.trace.push(Action::Daimon);
                    return RunResult::Done(RuleNode::Daimon);
                }
                RuleNode::Pos {
                    focus,
                    ram,
                    premises,
                    ctx,
                } => {
                    if !self.spend() {
                        return RunResult::Exhausted;
                    }
                    if let Some((owner, counter)) = env.get(&focus).cloned() {
                        // Cut step: the focus is governed by the other side.
                        let (_, branches) = Self::as_neg(&counter);
                        let Some(branch) = branches.get(&ram) else {
                            return RunResult::Diverged(Action::pos(focus, ram));
                        };
                        self.trace.push(side.oriented(focus.clone(), ram.clone()));
                        for (i, premise) in premises {
                            env.insert(focus.child(i), (side, premise));
                        }
                        side = owner;
                        node = branch.tree.clone();
                    } else {
                        // Emission step: the focus is a residual address, so
                        // the action belongs to the normal form. Explore every
                        // branch the environment could answer with.
                        let mut out_premises = BTreeMap::new();
                        for (i, premise) in &premises {
                            let (_, branches) = Self::as_neg(premise);
                            let mut kept = BTreeMap::new();
                            for (j, br) in branches {
                                let mut sub_env = env.clone();
                                match self.run(side, br.tree.clone(), &mut sub_env) {
                                    RunResult::Done(tree) => {
                                        let ctx = br
                                            .ctx
                                            .iter()
                                            .filter(|l| self.keep_locus(l))
                                            .cloned()
                                            .collect();
                                        kept.insert(j, Branch { tree, ctx });
                                    }
                                    RunResult::Diverged(_) => {}
                                    RunResult::Exhausted => return RunResult::Exhausted,
                                }
                            }
                            out_premises.insert(
                                *i,
                                RuleNode::Neg {
                                    anchor: focus.child(*i),
                                    branches: kept,
                                },
                            );
                        }
                        let out_ctx = ctx
                            .iter()
                            .map(|(i, lam)| {
                                (
                                    *i,
                                    lam.iter()
                                        .filter(|l| self.keep_locus(l))
                                        .cloned()
                                        .collect::<BTreeSet<Locus>>(),
                                )
                            })
                            .collect();
                        return RunResult::Done(RuleNode::Pos {
                            focus,
                            ram,
                            premises: out_premises,
                            ctx: out_ctx,
                        });
                    }
                }
                RuleNode::Neg { .. } | RuleNode::Lazy(_) => {
                    unreachable!("the running node always sits at a positive fork")
                }
            }
        }
    }
}

/// Runs a net to completion or until the budget runs out.
///
/// The positive-role base must be exactly `⊢ σ` and the negative-role base
/// `σ ⊢ Δ₂` (residuals live on the negative side only); anything else is
/// rejected as `INVALID_NET`.
///
/// # Examples
///
/// ```
/// use ludics_core::core::{Design, Fork, RuleNode};
/// use ludics_core::normalize::{make_net, normalize, Verdict};
///
/// // The daimon converges against the stuck negative design in one step.
/// let d = Design::daimon_on(Fork::positive(["0".parse().unwrap()]));
/// let e = Design {
///     base: Fork::negative("0".parse().unwrap(), []),
///     root: RuleNode::Neg { anchor: "0".parse().unwrap(), branches: Default::default() },
/// };
/// let outcome = normalize(&make_net(&d, &e).unwrap(), 16).unwrap();
/// assert_eq!(outcome.verdict, Verdict::Converged);
/// assert_eq!(outcome.steps, 1);
/// ```
pub fn normalize(net: &Net, budget: usize) -> Result<Outcome, NetError> {
    if net.pos.base.neg.is_some() || net.pos.base.pos.len() != 1 {
        return Err(NetError::InvalidNet {
            detail: format!(
                "positive role must be based on `|- {}` alone, got `{}`",
                net.cut, net.pos.base
            ),
        });
    }
    if net.neg.base.neg.as_ref() != Some(&net.cut) {
        return Err(NetError::InvalidNet {
            detail: format!(
                "negative role must be based on `{} |- ...`, got `{}`",
                net.cut, net.neg.base
            ),
        });
    }

    let mut env: Env = BTreeMap::from([(net.cut.clone(), (Side::NegSide, net.neg.root.clone()))]);
    let mut machine = Machine {
        budget,
        steps: 0,
        trace: Vec::new(),
        residuals: net.residuals().clone(),
    };
    let result = machine.run(Side::PosSide, net.pos.root.clone(), &mut env);
    let base = Fork::positive(net.residuals().iter().cloned());
    Ok(match result {
        RunResult::Done(tree) => Outcome {
            verdict: Verdict::Converged,
            trace: machine.trace,
            failing: None,
            steps: machine.steps,
            result: Some(Design { base, root: tree }),
        },
        RunResult::Diverged(failing) => Outcome {
            verdict: Verdict::Diverged,
            trace: machine.trace,
            failing: Some(failing),
            steps: machine.steps,
            result: None,
        },
        RunResult::Exhausted => Outcome {
            verdict: Verdict::Exhausted,
            trace: machine.trace,
            failing: None,
            steps: machine.steps,
            result: None,
        },
    })
}

/// Forms the net and runs it in one call.
pub fn normalize_pair(d: &Design, e: &Design, budget: usize) -> Result<Outcome, NetError> {
    normalize(&make_net(d, e)?, budget)
}

/// The three-valued answer of a budgeted orthogonality test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriState {
    Yes,
    No,
    /// The budget ran out after this many steps.
    Unknown(usize),
}

impl TriState {
    pub fn is_yes(self) -> bool {
        matches!(self, TriState::Yes)
    }
}

impl fmt::Display for TriState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TriState::Yes => write!(f, "yes"),
            TriState::No => write!(f, "no"),
            TriState::Unknown(steps) => write!(f, "unknown after {steps} steps"),
        }
    }
}

/// Tests orthogonality: the closed net of the two designs converges.
///
/// Requires dual bases `⊢ σ` and `σ ⊢` with no residuals; an open net is a
/// `NOT_CLOSED` error. Budget exhaustion reports [`TriState::Unknown`].
pub fn orthogonal(d: &Design, e: &Design, budget: usize) -> Result<TriState, NetError> {
    let net = make_net(d, e)?;
    if !net.is_closed() {
        let residuals: Vec<String> = net.residuals().iter().map(|l| format!("`{l}`")).collect();
        return Err(NetError::NotClosed {
            residuals: residuals.join(", "),
        });
    }
    let outcome = normalize(&net, budget)?;
    Ok(match outcome.verdict {
        Verdict::Converged => TriState::Yes,
        Verdict::Diverged => TriState::No,
        Verdict::Exhausted => TriState::Unknown(outcome.steps),
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{delocate, fax, trace_string};

    fn loc(s: &str) -> Locus {
        s.parse().unwrap()
    }

    fn ram(s: &str) -> Ram {
        s.parse().unwrap()
    }

    fn neg_node(anchor: &str, branches: Vec<(&str, RuleNode)>) -> RuleNode {
        RuleNode::Neg {
            anchor: loc(anchor),
            branches: branches
                .into_iter()
                .map(|(j, tree)| {
                    (
                        ram(j),
                        Branch {
                            tree,
                            ctx: BTreeSet::new(),
                        },
                    )
                })
                .collect(),
        }
    }

    fn pos_node(focus: &str, r: &str, premises: Vec<(u32, RuleNode)>) -> RuleNode {
        let r: Ram = r.parse().unwrap();
        let ctx = r.iter().map(|i| (i, BTreeSet::new())).collect();
        RuleNode::Pos {
            focus: loc(focus),
            ram: r,
            premises: premises.into_iter().collect(),
            ctx,
        }
    }

    /// The assertion design on ⊢0 (five actions ending in †).
    fn asserter() -> Design {
        Design {
            base: Fork::positive([loc("0")]),
            root: pos_node(
                "0",
                "{1}",
                vec![(
                    1,
                    neg_node(
                        "0.1",
                        vec![(
                            "{1,2}",
                            pos_node(
                                "0.1.1",
                                "{1}",
                                vec![(1, neg_node("0.1.1.1", vec![("{1}", RuleNode::Daimon)]))],
                            ),
                        )],
                    ),
                )],
            ),
        }
    }

    /// The engaged counter-design on 0⊢ that lets the assertion finish.
    fn engager() -> Design {
        Design {
            base: Fork::negative(loc("0"), []),
            root: neg_node(
                "0",
                vec![(
                    "{1}",
                    pos_node(
                        "0.1",
                        "{1,2}",
                        vec![
                            (
                                1,
                                neg_node(
                                    "0.1.1",
                                    vec![(
                                        "{1}",
                                        pos_node(
                                            "0.1.1.1",
                                            "{1}",
                                            vec![(1, neg_node("0.1.1.1.1", vec![]))],
                                        ),
                                    )],
                                ),
                            ),
                            (2, neg_node("0.1.2", vec![])),
                        ],
                    ),
                )],
            ),
        }
    }

    /// A counter-design that changes the subject: answers the opening with a
    /// ramification the asserter never anticipated.
    fn subject_changer() -> Design {
        Design {
            base: Fork::negative(loc("0"), []),
            root: neg_node(
                "0",
                vec![(
                    "{1}",
                    pos_node("0.1", "{3}", vec![(3, neg_node("0.1.3", vec![]))]),
                )],
            ),
        }
    }

    // -- closed nets -----------------------------------------------------------

    #[test]
    fn assertion_dialogue_converges_with_the_golden_trace() {
        let outcome = normalize_pair(&asserter(), &engager(), 64).unwrap();
        assert_eq!(outcome.verdict, Verdict::Converged);
        assert_eq!(outcome.steps, 5);
        assert_eq!(
            trace_string(&outcome.trace),
            "(+,0,{1})(-,0.1,{1,2})(+,0.1.1,{1})(-,0.1.1.1,{1})†"
        );
        let normal_form = outcome.result.unwrap();
        assert_eq!(normal_form, Design::daimon_on(Fork::positive([])));
    }

    #[test]
    fn roles_are_assigned_regardless_of_argument_order() {
        let a = normalize_pair(&asserter(), &engager(), 64).unwrap();
        let b = normalize_pair(&engager(), &asserter(), 64).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(trace_string(&a.trace), trace_string(&b.trace));
    }

    #[test]
    fn unanticipated_branch_diverges() {
        let outcome = normalize_pair(&asserter(), &subject_changer(), 64).unwrap();
        assert_eq!(outcome.verdict, Verdict::Diverged);
        assert_eq!(outcome.steps, 2);
        assert_eq!(trace_string(&outcome.trace), "(+,0,{1})");
        assert_eq!(outcome.failing, Some("(+,0.1,{3})".parse().unwrap()));
        assert!(outcome.result.is_none());
    }

    #[test]
    fn budget_exhaustion_is_reported_and_traces_are_prefix_monotone() {
        let full = normalize_pair(&asserter(), &engager(), 64).unwrap();
        for budget in 0..5 {
            let cut = normalize_pair(&asserter(), &engager(), budget).unwrap();
            assert_eq!(cut.verdict, Verdict::Exhausted);
            assert_eq!(cut.steps, budget);
            assert!(
                cut.trace == full.trace[..cut.trace.len()],
                "budget {budget}: {} not a prefix of {}",
                trace_string(&cut.trace),
                trace_string(&full.trace)
            );
        }
    }

    #[test]
    fn zero_budget_exhausts_immediately() {
        let outcome = normalize_pair(&asserter(), &engager(), 0).unwrap();
        assert_eq!(outcome.verdict, Verdict::Exhausted);
        assert_eq!(outcome.steps, 0);
        assert!(outcome.trace.is_empty());
    }

    #[test]
    fn daimon_converges_against_the_stuck_design() {
        let d = Design::daimon_on(Fork::positive([loc("0")]));
        let stuck = Design {
            base: Fork::negative(loc("0"), []),
            root: neg_node("0", vec![]),
        };
        let outcome = normalize_pair(&d, &stuck, 8).unwrap();
        assert_eq!(outcome.verdict, Verdict::Converged);
        assert_eq!(outcome.steps, 1);
        assert_eq!(trace_string(&outcome.trace), "†");
    }

    // -- orthogonality -----------------------------------------------------------

    #[test]
    fn orthogonality_follows_the_verdict() {
        assert_eq!(
            orthogonal(&asserter(), &engager(), 64).unwrap(),
            TriState::Yes
        );
        assert_eq!(
            orthogonal(&asserter(), &subject_changer(), 64).unwrap(),
            TriState::No
        );
        assert_eq!(
            orthogonal(&asserter(), &engager(), 3).unwrap(),
            TriState::Unknown(3)
        );
    }

    #[test]
    fn orthogonality_needs_a_closed_net() {
        let d = asserter();
        let f = fax(&loc("0"), &loc("5"), &ram("{1,2}"));
        assert!(matches!(
            orthogonal(&d, &f, 64),
            Err(NetError::NotClosed { .. })
        ));
    }

    // -- open nets and delocation ---------------------------------------------

    #[test]
    fn normalizing_against_the_fax_delocates() {
        let d = asserter();
        let f = fax(&loc("0"), &loc("5"), &ram("{1,2}"));
        let outcome = normalize_pair(&d, &f, 256).unwrap();
        assert_eq!(outcome.verdict, Verdict::Converged);
        let moved = outcome.result.unwrap();
        assert_eq!(moved, delocate(&d, &loc("0"), &loc("5")).unwrap());
        assert_eq!(moved.base, Fork::positive([loc("5")]));
        // The visible trace is the same dialogue the closed net produces.
        assert_eq!(
            trace_string(&outcome.trace),
            "(+,0,{1})(-,0.1,{1,2})(+,0.1.1,{1})(-,0.1.1.1,{1})†"
        );
        assert_eq!(outcome.steps, 13);
    }

    #[test]
    fn fax_composes_along_delocations() {
        let d = asserter();
        let via_five = normalize_pair(&d, &fax(&loc("0"), &loc("5"), &ram("{1,2}")), 256)
            .unwrap()
            .result
            .unwrap();
        let back = normalize_pair(&via_five, &fax(&loc("5"), &loc("0"), &ram("{1,2}")), 256)
            .unwrap()
            .result
            .unwrap();
        assert_eq!(back, d);
    }

    // -- net formation errors ----------------------------------------------------

    #[test]
    fn nets_require_exactly_one_cut() {
        let d = asserter();
        let elsewhere = Design {
            base: Fork::negative(loc("1"), []),
            root: neg_node("1", vec![]),
        };
        assert!(matches!(make_net(&d, &elsewhere), Err(NetError::NoCut)));

        let left = Design {
            base: Fork::negative(loc("1"), [loc("0")]),
            root: neg_node("1", vec![]),
        };
        let right = Design {
            base: Fork::negative(loc("0"), [loc("1")]),
            root: neg_node("0", vec![]),
        };
        assert!(matches!(
            make_net(&left, &right),
            Err(NetError::MultipleCuts { .. })
        ));
    }

    #[test]
    fn nets_reject_overlapping_residuals() {
        let d = Design {
            base: Fork::positive([loc("0"), loc("3")]),
            root: pos_node("0", "{}", vec![]),
        };
        let e = Design {
            base: Fork::negative(loc("0"), [loc("3.1")]),
            root: neg_node("0", vec![]),
        };
        assert!(matches!(
            make_net(&d, &e),
            Err(NetError::BaseOverlap { .. })
        ));
    }

    #[test]
    fn nets_reject_invalid_designs() {
        let bad = Design {
            base: Fork::positive([loc("0")]),
            root: neg_node("0", vec![]),
        };
        let e = engager();
        assert!(matches!(
            make_net(&bad, &e),
            Err(NetError::InvalidDesign { .. })
        ));
    }

    #[test]
    fn runs_reject_positive_side_residuals() {
        let d = Design {
            base: Fork::positive([loc("0"), loc("7")]),
            root: pos_node("0", "{}", vec![]),
        };
        let e = Design {
            base: Fork::negative(loc("0"), []),
            root: neg_node("0", vec![("{}", RuleNode::Daimon)]),
        };
        let net = make_net(&d, &e).unwrap();
        assert!(matches!(
            normalize(&net, 16),
            Err(NetError::InvalidNet { .. })
        ));
    }

    // -- outcome json -------------------------------------------------------------

    #[test]
    fn outcome_json_has_the_documented_shape() {
        let outcome = normalize_pair(&asserter(), &engager(), 64).unwrap();
        let v = outcome.to_json_value();
        assert_eq!(v["verdict"], "converged");
        assert_eq!(v["steps"], 5);
        assert_eq!(v["trace"].as_array().unwrap().len(), 5);
        assert_eq!(v["trace"][0], "(+,0,{1})");
        assert!(v.get("failing").is_none());
        assert!(v["result"]["base"]["pos"].as_array().unwrap().is_empty());

        let divergent = normalize_pair(&asserter(), &subject_changer(), 64).unwrap();
        let w = divergent.to_json_value();
        assert_eq!(w["verdict"], "diverged");
        assert_eq!(w["failing"], "(+,0.1,{3})");
        assert!(w.get("result").is_none());
    }
}
