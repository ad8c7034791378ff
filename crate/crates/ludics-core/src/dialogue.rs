//! Dialogue scripts compiled to pairs of designs and executed through
//! normalization.
//!
//! A [`Script`] is an ordered list of turns between two speakers.  Each turn
//! carries a natural-language gloss and a payload: a single action, a
//! *chronicle* (several consecutive actions by one speaker, used for
//! presupposition tricks), or a *plan* (a declared branch division such as
//! "by dramatic art I only mean tragedy and comedy").  [`compile_script`]
//! turns a script into the two designs it describes — one per point of view —
//! and [`run`] normalizes the pair and re-attaches speakers and glosses to
//! the interaction trace.
//!
//! Scripts compile to *minimal* designs: each negative rule carries only the
//! branches actually played (or declared by a plan).  Richer strategies can
//! be supplied as raw design files instead.  When an interaction fails, the
//! run report names the failing action and the branch set that was actually
//! available, which turns "the stratagem does not converge" into a concrete
//! diagnostic.
//!
//! Non-goals: natural-language understanding, dialogues with more than two
//! speakers, and retraction/replay of a failed branch.  Retraction is
//! mentioned in the literature as a repair device but comes with no
//! procedure, so it is out of scope here; a failed run simply reports the
//! divergence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{
    trace_string, Action, Branch, Design, Fork, FormatError, Locus, Polarity, Ram, RuleNode,
};
use crate::normalize::{make_net, normalize, NetError, Outcome, Verdict};

/// Errors from script loading, validation, compilation, and running.
#[derive(Debug, Error)]
pub enum DialogueError {
    /// The script file is not valid JSON.
    #[error("BAD_SCRIPT: {0}")]
    Json(#[from] serde_json::Error),
    /// A locus or action inside the script failed to parse.
    #[error(transparent)]
    Format(#[from] FormatError),
    /// An action anchor used an alias that the script does not declare.
    #[error("UNKNOWN_ALIAS: no alias named {name:?} is declared")]
    UnknownAlias { name: String },
    /// The script has no turns.
    #[error("NON_ALTERNATING: the script has no turns")]
    EmptyScript,
    /// The first event is not a proper positive action at the base.
    #[error("NON_ALTERNATING: {detail}")]
    FirstAction { detail: String },
    /// Consecutive proper actions have the same polarity.
    #[error("NON_ALTERNATING: {detail}")]
    Alternation { detail: String },
    /// A single-action turn's polarity does not match its speaker's role.
    #[error("NON_ALTERNATING: {detail}")]
    SpeakerPolarity { detail: String },
    /// An action's anchor was never opened by the preceding action.
    #[error("ANCHOR_NOT_CREATED: {action}: {detail}")]
    AnchorNotCreated { action: String, detail: String },
    /// A daimon appears before the last turn or inside a chronicle.
    #[error("NON_ALTERNATING: the daimon may only appear as the final turn")]
    DaimonNotFinal,
    /// The daimon is spoken by the wrong side.
    #[error("NON_ALTERNATING: {detail}")]
    DaimonSpeaker { detail: String },
    /// A plan turn appears anywhere but directly after its speaker's own
    /// positive action with a singleton ramification.
    #[error("PLAN_PLACEMENT: {detail}")]
    PlanPlacement { detail: String },
    /// After a plan, the observed reply fell outside the declared branches
    /// but the script kept going.
    #[error("PLAN_MISMATCH: {detail}")]
    PlanMismatchContinuation { detail: String },
    /// A turn-level structural problem (missing or ambiguous payload).
    #[error("BAD_TURN: turn {index}: {detail}")]
    Turn { index: usize, detail: String },
    /// The compiled pair could not be wired into a net.
    #[error(transparent)]
    Net(#[from] NetError),
    /// The question/justification interaction diverged.
    #[error("DIVERGED_QUESTION: the interaction failed at {failing}")]
    DivergedQuestion { failing: String },
    /// The question/justification interaction ran out of budget.
    #[error("BUDGET_EXHAUSTED: no verdict after {steps} steps")]
    BudgetExhausted { steps: usize },
}

/// One turn's payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    /// A single dialogue action.
    Action(Action),
    /// Several consecutive actions by the same speaker (the presupposition
    /// pattern: the contested action is wrapped inside a longer chronicle so
    /// the addressee never gets to answer it in isolation).
    Chronicle(Vec<Action>),
    /// A declared division of the current locus into branches, e.g. "by
    /// dramatic art I only mean tragedy and comedy".  The speaker commits to
    /// defending exactly these ramifications.
    Plan(Vec<Ram>),
}

/// One scripted turn: who speaks, the surface gloss, and the payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub by: String,
    pub gloss: String,
    pub payload: Payload,
}

/// A two-speaker dialogue script.
///
/// The JSON form is
///
/// ```json
/// {"speakers": ["A", "B"],
///  "base": "0",
///  "aliases": {"xi": "0"},
///  "turns": [{"by": "A", "gloss": "…", "action": "(+,xi,{1})"}]}
/// ```
///
/// Each turn carries exactly one of `"action"`, `"chronicle"` (a list of
/// action strings), or `"branches"` (a list of ramification strings, a
/// [`Payload::Plan`]).  Anchors may spell loci through declared aliases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub speakers: (String, String),
    pub base: Locus,
    pub aliases: BTreeMap<String, Locus>,
    pub turns: Vec<Turn>,
}

#[derive(Serialize, Deserialize)]
struct ScriptDoc {
    speakers: (String, String),
    base: String,
    #[serde(default)]
    aliases: BTreeMap<String, String>,
    turns: Vec<TurnDoc>,
}

#[derive(Serialize, Deserialize)]
struct TurnDoc {
    by: String,
    gloss: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    action: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chronicle: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    branches: Option<Vec<String>>,
}

/// Parses an action string, resolving alias-headed anchors.
///
/// Accepts `†`, `daimon`, or `(pol,anchor,{ram})` where `anchor` is either a
/// plain dotted locus or `alias` / `alias.i.j` for a declared alias.
fn parse_action(text: &str, aliases: &BTreeMap<String, Locus>) -> Result<Action, DialogueError> {
    let t = text.trim();
    if t == "†" || t.eq_ignore_ascii_case("daimon") {
        return Ok(Action::Daimon);
    }
    let inner = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| FormatError::Action {
            text: t.to_string(),
        })?;
    let mut parts = inner.splitn(3, ',');
    let pol = parts.next().unwrap_or("").trim();
    let anchor_text = parts.next().unwrap_or("").trim().to_string();
    let ram_text = parts.next().unwrap_or("").trim().to_string();
    if anchor_text.is_empty() || ram_text.is_empty() {
        return Err(FormatError::Action {
            text: t.to_string(),
        }
        .into());
    }
    let pol = match pol {
        "+" => Polarity::Pos,
        "-" | "−" => Polarity::Neg,
        _ => {
            return Err(FormatError::Action {
                text: t.to_string(),
            }
            .into())
        }
    };
    let anchor = resolve_locus(&anchor_text, aliases)?;
    let ram = Ram::from_str(&ram_text)?;
    Ok(Action::Proper { pol, anchor, ram })
}

/// Resolves a locus string whose head segment may be a declared alias.
fn resolve_locus(text: &str, aliases: &BTreeMap<String, Locus>) -> Result<Locus, DialogueError> {
    let head = text.split('.').next().unwrap_or(text);
    if head.parse::<u32>().is_ok() {
        return Ok(Locus::from_str(text)?);
    }
    let Some(base) = aliases.get(head) else {
        return Err(DialogueError::UnknownAlias {
            name: head.to_string(),
        });
    };
    let mut locus = base.clone();
    for seg in text.split('.').skip(1) {
        let i: u32 = seg.parse().map_err(|_| FormatError::Locus {
            text: text.to_string(),
        })?;
        locus = locus.child(i);
    }
    Ok(locus)
}

/// Renders a locus back through the alias table, using the alias with the
/// longest matching value as prefix.
fn render_locus(locus: &Locus, aliases: &BTreeMap<String, Locus>) -> String {
    let mut best: Option<(&String, &Locus)> = None;
    for (name, value) in aliases {
        if value.is_prefix_of(locus) {
            let better = match best {
                Some((_, b)) => value.len() > b.len(),
                None => true,
            };
            if better {
                best = Some((name, value));
            }
        }
    }
    match best {
        Some((name, value)) => {
            let mut out = name.clone();
            for seg in locus.strip_prefix(value).unwrap_or(&[]) {
                out.push('.');
                out.push_str(&seg.to_string());
            }
            out
        }
        None => locus.to_string(),
    }
}

/// Renders an action through the alias table (`(+,xi.1,{3})` style).
fn render_action(action: &Action, aliases: &BTreeMap<String, Locus>) -> String {
    match action {
        Action::Daimon => "†".to_string(),
        Action::Proper { pol, anchor, ram } => {
            let sign = match pol {
                Polarity::Pos => "+",
                Polarity::Neg => "-",
            };
            format!("({},{},{})", sign, render_locus(anchor, aliases), ram)
        }
    }
}

impl Script {
    /// Parses a script from its JSON document.
    ///
    /// # Examples
    ///
    /// ```
    /// use ludics_core::dialogue::Script;
    ///
    /// let s = Script::from_json_str(
    ///     r#"{"speakers":["A","B"],"base":"0","turns":[
    ///         {"by":"A","gloss":"opening","action":"(+,0,{1})"},
    ///         {"by":"B","gloss":"reply","action":"(-,0.1,{1})"}]}"#,
    /// )
    /// .unwrap();
    /// assert_eq!(s.turns.len(), 2);
    /// ```
    pub fn from_json_str(s: &str) -> Result<Script, DialogueError> {
        let doc: ScriptDoc = serde_json::from_str(s)?;
        let base = Locus::from_str(&doc.base)?;
        let mut aliases = BTreeMap::new();
        for (name, value) in &doc.aliases {
            aliases.insert(name.clone(), Locus::from_str(value)?);
        }
        let mut turns = Vec::new();
        for (index, t) in doc.turns.iter().enumerate() {
            let given = [
                t.action.is_some(),
                t.chronicle.is_some(),
                t.branches.is_some(),
            ]
            .iter()
            .filter(|b| **b)
            .count();
            if given != 1 {
                return Err(DialogueError::Turn {
                    index,
                    detail: "expected exactly one of \"action\", \"chronicle\", \"branches\""
                        .to_string(),
                });
            }
            let payload = if let Some(a) = &t.action {
                Payload::Action(parse_action(a, &aliases)?)
            } else if let Some(c) = &t.chronicle {
                if c.is_empty() {
                    return Err(DialogueError::Turn {
                        index,
                        detail: "a chronicle payload needs at least one action".to_string(),
                    });
                }
                let mut actions = Vec::new();
                for a in c {
                    actions.push(parse_action(a, &aliases)?);
                }
                Payload::Chronicle(actions)
            } else {
                let mut branches = Vec::new();
                for b in t.branches.as_ref().unwrap() {
                    branches.push(Ram::from_str(b)?);
                }
                if branches.is_empty() {
                    return Err(DialogueError::Turn {
                        index,
                        detail: "a branches payload needs at least one ramification".to_string(),
                    });
                }
                Payload::Plan(branches)
            };
            turns.push(Turn {
                by: t.by.clone(),
                gloss: t.gloss.clone(),
                payload,
            });
        }
        Ok(Script {
            speakers: doc.speakers,
            base,
            aliases,
            turns,
        })
    }

    /// The speaker of the first turn: the proponent, whose design sits on
    /// the positive base.
    pub fn proponent(&self) -> &str {
        self.turns
            .first()
            .map(|t| t.by.as_str())
            .unwrap_or(&self.speakers.0)
    }

    /// The other declared speaker.
    pub fn opponent(&self) -> &str {
        if self.proponent() == self.speakers.0 {
            &self.speakers.1
        } else {
            &self.speakers.0
        }
    }
}

/// One flattened script event.
#[derive(Debug, Clone)]
enum Event {
    Act {
        action: Action,
        by: String,
        gloss: Option<String>,
        /// Chronicle members skip the speaker-polarity check: a chronicle
        /// deliberately packs both polarities into one speaker's turn.
        exempt: bool,
    },
    Plan {
        branches: Vec<Ram>,
        by: String,
    },
}

impl Event {
    fn action(&self) -> Option<&Action> {
        match self {
            Event::Act { action, .. } => Some(action),
            Event::Plan { .. } => None,
        }
    }
}

/// Flattens the turns and checks every script-level invariant.
fn validate_script(script: &Script) -> Result<Vec<Event>, DialogueError> {
    if script.turns.is_empty() {
        return Err(DialogueError::EmptyScript);
    }
    let proponent = script.proponent().to_string();
    let opponent = script.opponent().to_string();
    for (index, turn) in script.turns.iter().enumerate() {
        if turn.by != script.speakers.0 && turn.by != script.speakers.1 {
            return Err(DialogueError::Turn {
                index,
                detail: format!("speaker {:?} is not one of the declared speakers", turn.by),
            });
        }
    }

    let mut events = Vec::new();
    for turn in &script.turns {
        match &turn.payload {
            Payload::Action(action) => events.push(Event::Act {
                action: action.clone(),
                by: turn.by.clone(),
                gloss: Some(turn.gloss.clone()),
                exempt: false,
            }),
            Payload::Chronicle(actions) => {
                for (i, action) in actions.iter().enumerate() {
                    events.push(Event::Act {
                        action: action.clone(),
                        by: turn.by.clone(),
                        gloss: if i == 0 {
                            Some(turn.gloss.clone())
                        } else {
                            None
                        },
                        exempt: true,
                    });
                }
            }
            Payload::Plan(branches) => {
                events.push(Event::Plan {
                    branches: branches.clone(),
                    by: turn.by.clone(),
                });
            }
        }
    }

    // First event: a proper positive action anchored at the base.  The one
    // exception is the degenerate single-turn script that opens (and closes)
    // with the daimon.
    match &events[0] {
        Event::Act {
            action:
                Action::Proper {
                    pol: Polarity::Pos,
                    anchor,
                    ..
                },
            ..
        } if *anchor == script.base => {}
        Event::Act {
            action: Action::Daimon,
            exempt: false,
            ..
        } if events.len() == 1 => {}
        Event::Act { action, .. } => {
            return Err(DialogueError::FirstAction {
                detail: format!(
                    "the dialogue must open with a positive action at {}, got {}",
                    script.base, action
                ),
            });
        }
        Event::Plan { .. } => {
            return Err(DialogueError::PlanPlacement {
                detail: "a branch declaration cannot open the dialogue".to_string(),
            });
        }
    }

    let mut prev_proper: Option<&Action> = None;
    let mut pending_plan: Option<(&Vec<Ram>, &Action)> = None;
    for (k, event) in events.iter().enumerate() {
        match event {
            Event::Plan { branches, by } => {
                // A plan must directly follow its speaker's own positive
                // action with a singleton ramification (the locus being
                // divided).
                let Some(Event::Act {
                    action:
                        prev @ Action::Proper {
                            pol: Polarity::Pos,
                            ram,
                            ..
                        },
                    by: prev_by,
                    ..
                }) = (k > 0).then(|| &events[k - 1])
                else {
                    return Err(DialogueError::PlanPlacement {
                        detail: "a branch declaration must directly follow a positive action"
                            .to_string(),
                    });
                };
                if prev_by != by {
                    return Err(DialogueError::PlanPlacement {
                        detail: "a branch declaration must follow the speaker's own action"
                            .to_string(),
                    });
                }
                if ram.len() != 1 {
                    return Err(DialogueError::PlanPlacement {
                        detail: format!(
                            "branches can only be declared for a single new locus, \
                             but the preceding action opened {}",
                            ram
                        ),
                    });
                }
                pending_plan = Some((branches, prev));
            }
            Event::Act {
                action: Action::Daimon,
                by,
                ..
            } => {
                if k + 1 != events.len() {
                    return Err(DialogueError::DaimonNotFinal);
                }
                if matches!(event, Event::Act { exempt: true, .. }) {
                    return Err(DialogueError::DaimonNotFinal);
                }
                // The daimon is a positive action: it belongs to whichever
                // side is due to play positively next.
                let due = match prev_proper {
                    Some(Action::Proper {
                        pol: Polarity::Pos, ..
                    }) => opponent.as_str(),
                    Some(Action::Proper {
                        pol: Polarity::Neg, ..
                    }) => proponent.as_str(),
                    _ => proponent.as_str(),
                };
                if by != due {
                    return Err(DialogueError::DaimonSpeaker {
                        detail: format!(
                            "the daimon here belongs to {:?}, but {:?} speaks it",
                            due, by
                        ),
                    });
                }
            }
            Event::Act {
                action:
                    action @ Action::Proper {
                        pol,
                        anchor,
                        ram: _,
                    },
                by,
                exempt,
                ..
            } => {
                if let Some(prev @ Action::Proper { pol: prev_pol, .. }) = prev_proper {
                    if *pol == *prev_pol {
                        return Err(DialogueError::Alternation {
                            detail: format!(
                                "{} and {} have the same polarity; proper actions must alternate",
                                prev, action
                            ),
                        });
                    }
                    // Adjacency: each action is justified by the action just
                    // before it.  Scripts with non-adjacent justifications
                    // are not supported.
                    let Action::Proper {
                        anchor: prev_anchor,
                        ram: prev_ram,
                        ..
                    } = prev
                    else {
                        unreachable!()
                    };
                    let created = prev_ram.iter().any(|i| prev_anchor.child(i) == *anchor);
                    if !created {
                        let detail = if anchor
                            .strip_prefix(prev_anchor)
                            .map(|rest| rest.len() == 1)
                            .unwrap_or(false)
                        {
                            format!(
                                "the preceding action {} did not open the branch for {}",
                                prev, anchor
                            )
                        } else {
                            format!(
                                "{} does not answer {}; non-adjacent justification \
                                 is not supported",
                                anchor, prev
                            )
                        };
                        return Err(DialogueError::AnchorNotCreated {
                            action: render_action(action, &script.aliases),
                            detail,
                        });
                    }
                }
                if !*exempt {
                    let due = match pol {
                        Polarity::Pos => proponent.as_str(),
                        Polarity::Neg => opponent.as_str(),
                    };
                    if by != due {
                        return Err(DialogueError::SpeakerPolarity {
                            detail: format!(
                                "{} is a {} action and belongs to {:?}, but {:?} speaks it",
                                action,
                                match pol {
                                    Polarity::Pos => "positive",
                                    Polarity::Neg => "negative",
                                },
                                due,
                                by
                            ),
                        });
                    }
                }
                if let Some((branches, planned)) = pending_plan.take() {
                    // The observed answer to a plan either lands in a
                    // declared branch (and the dialogue may continue) or it
                    // refuses the division (and must end the script, since
                    // the planner prepared nothing for it).
                    let Action::Proper {
                        anchor: planned_anchor,
                        ram: planned_ram,
                        ..
                    } = planned
                    else {
                        unreachable!()
                    };
                    let child = planned_anchor.child(planned_ram.iter().next().unwrap());
                    let in_plan = *anchor == child
                        && branches
                            .iter()
                            .any(|b| matches!(action, Action::Proper { ram, .. } if ram == b));
                    if !in_plan && k + 1 != events.len() {
                        return Err(DialogueError::PlanMismatchContinuation {
                            detail: format!(
                                "{} falls outside the declared branches; the script \
                                 cannot continue past it",
                                render_action(action, &script.aliases)
                            ),
                        });
                    }
                }
                prev_proper = Some(action);
            }
        }
    }
    Ok(events)
}

/// What the next event (from a given position) looks like.
enum Follow<'a> {
    Nothing,
    Daimon,
    Act(&'a Action, usize),
}

/// Index of the next event after `k`, skipping at most one plan.
fn next_event(events: &[Event], k: usize) -> Option<usize> {
    let mut n = k + 1;
    if matches!(events.get(n), Some(Event::Plan { .. })) {
        n += 1;
    }
    if n < events.len() {
        Some(n)
    } else {
        None
    }
}

fn follow_of(events: &[Event], k: usize) -> Follow<'_> {
    match next_event(events, k) {
        None => Follow::Nothing,
        Some(n) => match events[n].action() {
            Some(Action::Daimon) => Follow::Daimon,
            Some(a) => Follow::Act(a, n),
            None => Follow::Nothing,
        },
    }
}

/// Builds one side's rule tree from the flattened events.
///
/// `prop` selects the point of view: on the proponent side, positive script
/// actions are the player's own rules; on the opponent side they are the
/// observed branches of negative rules, and vice versa.
fn build(events: &[Event], k: usize, prop: bool) -> RuleNode {
    let action = match events[k].action() {
        Some(a) => a,
        // A plan event never starts a subtree; its branches are folded into
        // the preceding positive rule's premise below.
        None => return RuleNode::Daimon,
    };
    match action {
        Action::Daimon => RuleNode::Daimon,
        Action::Proper { pol, anchor, ram } => {
            let mine = (*pol == Polarity::Pos) == prop;
            if mine {
                let plan = match events.get(k + 1) {
                    Some(Event::Plan { branches, by: _ }) => Some(branches),
                    _ => None,
                };
                let mut premises = BTreeMap::new();
                let mut ctx = BTreeMap::new();
                if let Some(branches) = plan {
                    // The planner divides the single new locus into declared
                    // branches.  The observed reply (if it matches one)
                    // continues that branch; every other declared branch is
                    // answered by the daimon ("I am prepared to win there").
                    let i = ram.iter().next().expect("plan placement is validated");
                    let child = anchor.child(i);
                    let observed = follow_of(events, k);
                    let mut branch_map = BTreeMap::new();
                    for b in branches {
                        let tree = match &observed {
                            Follow::Act(
                                Action::Proper {
                                    anchor: oa,
                                    ram: or,
                                    ..
                                },
                                n,
                            ) if *oa == child && or == b => match follow_of(events, *n) {
                                Follow::Nothing | Follow::Daimon => RuleNode::Daimon,
                                Follow::Act(_, m) => build(events, m, prop),
                            },
                            _ => RuleNode::Daimon,
                        };
                        branch_map.insert(
                            b.clone(),
                            Branch {
                                tree,
                                ctx: BTreeSet::new(),
                            },
                        );
                    }
                    premises.insert(
                        i,
                        RuleNode::Neg {
                            anchor: child,
                            branches: branch_map,
                        },
                    );
                    ctx.insert(i, BTreeSet::new());
                } else {
                    for i in ram.iter() {
                        let child = anchor.child(i);
                        let premise = match follow_of(events, k) {
                            Follow::Act(Action::Proper { anchor: oa, .. }, n) if *oa == child => {
                                build(events, n, prop)
                            }
                            // No scripted answer arrives here: an empty
                            // negative rule, honestly unprepared.
                            _ => RuleNode::Neg {
                                anchor: child,
                                branches: BTreeMap::new(),
                            },
                        };
                        premises.insert(i, premise);
                        ctx.insert(i, BTreeSet::new());
                    }
                }
                RuleNode::Pos {
                    focus: anchor.clone(),
                    ram: ram.clone(),
                    premises,
                    ctx,
                }
            } else {
                // The other side speaks: from this point of view that is a
                // negative rule holding exactly the observed branch.
                let tree = match follow_of(events, k) {
                    Follow::Nothing => {
                        return RuleNode::Neg {
                            anchor: anchor.clone(),
                            branches: BTreeMap::new(),
                        };
                    }
                    Follow::Daimon => RuleNode::Daimon,
                    Follow::Act(_, n) => build(events, n, prop),
                };
                let mut branches = BTreeMap::new();
                branches.insert(
                    ram.clone(),
                    Branch {
                        tree,
                        ctx: BTreeSet::new(),
                    },
                );
                RuleNode::Neg {
                    anchor: anchor.clone(),
                    branches,
                }
            }
        }
    }
}

/// Compiles a script into the pair of designs it describes.
///
/// The first design is the proponent's point of view on the positive base
/// `⊢ base`; the second is the opponent's on the dual base `base ⊢`.  The
/// designs are minimal: every negative rule carries only the branches the
/// script actually plays (or declares through a plan).
///
/// # Examples
///
/// ```
/// use ludics_core::core::{validate, Locus};
/// use ludics_core::dialogue::{compile_script, Script};
///
/// let s = Script::from_json_str(
///     r#"{"speakers":["A","B"],"base":"0","turns":[
///         {"by":"A","gloss":"opening","action":"(+,0,{1})"},
///         {"by":"B","gloss":"reply","action":"(-,0.1,{1})"},
///         {"by":"A","gloss":"enough","action":"†"}]}"#,
/// )
/// .unwrap();
/// let (pro, opp) = compile_script(&s, &Locus::root().child(0)).unwrap();
/// assert!(validate(&pro).ok());
/// assert!(validate(&opp).ok());
/// ```
pub fn compile_script(script: &Script, base: &Locus) -> Result<(Design, Design), DialogueError> {
    let events = validate_script(script)?;
    if *base != script.base {
        return Err(DialogueError::FirstAction {
            detail: format!(
                "the script opens at {} but compilation was requested at {}",
                script.base, base
            ),
        });
    }
    // A single-turn daimon script: the proponent just gives up, and the
    // opponent never learns anything.
    if events.len() == 1 && matches!(events[0].action(), Some(Action::Daimon)) {
        let pro = Design::daimon_on(Fork::positive([base.clone()]));
        let opp = Design {
            base: Fork::negative(base.clone(), []),
            root: RuleNode::Neg {
                anchor: base.clone(),
                branches: BTreeMap::new(),
            },
        };
        return Ok((pro, opp));
    }
    let pro = Design {
        base: Fork::positive([base.clone()]),
        root: build(&events, 0, true),
    };
    let opp = Design {
        base: Fork::negative(base.clone(), []),
        root: build(&events, 0, false),
    };
    Ok((pro, opp))
}

/// One annotated interaction step: the action, who played it, and the gloss
/// from the script, when the step matches a scripted action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedStep {
    pub action: String,
    pub by: String,
    pub gloss: Option<String>,
}

/// The report produced by [`run`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: Outcome,
    pub annotated: Vec<AnnotatedStep>,
    /// Human-readable explanation of a divergence; empty on convergence.
    pub diagnostics: String,
}

impl RunReport {
    /// Serializes the report (verdict, annotated trace, diagnostics).
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "verdict": self.outcome.verdict.to_string(),
            "steps": self.annotated.iter().map(|s| {
                serde_json::json!({
                    "action": s.action,
                    "by": s.by,
                    "gloss": s.gloss,
                })
            }).collect::<Vec<_>>(),
            "diagnostics": self.diagnostics,
        })
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.outcome.verdict)?;
        for step in &self.annotated {
            match &step.gloss {
                Some(g) => writeln!(f, "  {:10} {}  — {}", step.by, step.action, g)?,
                None => writeln!(f, "  {:10} {}", step.by, step.action)?,
            }
        }
        if !self.diagnostics.is_empty() {
            writeln!(f, "  {}", self.diagnostics)?;
        }
        Ok(())
    }
}

/// Finds the branch set of the first negative rule anchored at `anchor`.
fn branches_at<'a>(node: &'a RuleNode, anchor: &Locus) -> Option<Vec<&'a Ram>> {
    match node {
        RuleNode::Daimon | RuleNode::Lazy(_) => None,
        RuleNode::Neg {
            anchor: a,
            branches,
        } => {
            if a == anchor {
                Some(branches.keys().collect())
            } else {
                branches.values().find_map(|b| branches_at(&b.tree, anchor))
            }
        }
        RuleNode::Pos { premises, .. } => premises.values().find_map(|p| branches_at(p, anchor)),
    }
}

/// Compiles and normalizes a script, re-attaching speakers and glosses to
/// the trace.
///
/// Converged runs report every step; diverged runs additionally name the
/// failing action and the branch set that was actually available at its
/// anchor, which is what makes a stratagem's failure point inspectable.
///
/// # Examples
///
/// ```
/// use ludics_core::dialogue::{run, Script};
/// use ludics_core::normalize::Verdict;
///
/// let s = Script::from_json_str(
///     r#"{"speakers":["A","B"],"base":"0","turns":[
///         {"by":"A","gloss":"opening","action":"(+,0,{1})"},
///         {"by":"B","gloss":"reply","action":"(-,0.1,{1})"},
///         {"by":"A","gloss":"enough","action":"†"}]}"#,
/// )
/// .unwrap();
/// let report = run(&s, 32).unwrap();
/// assert_eq!(report.outcome.verdict, Verdict::Converged);
/// assert_eq!(report.annotated.len(), 3);
/// ```
pub fn run(script: &Script, budget: usize) -> Result<RunReport, DialogueError> {
    let events = validate_script(script)?;
    let (pro, opp) = compile_script(script, &script.base)?;
    let net = make_net(&pro, &opp)?;
    let outcome = normalize(&net, budget)?;

    let proponent = script.proponent().to_string();
    let opponent = script.opponent().to_string();
    let mut queue: Vec<(&Action, &str, Option<&String>)> = Vec::new();
    for event in &events {
        if let Event::Act {
            action, by, gloss, ..
        } = event
        {
            queue.push((action, by, gloss.as_ref()));
        }
    }
    let mut queue = queue.into_iter().peekable();

    let mut annotated = Vec::new();
    let mut prev_rendered: Option<&Action> = None;
    for action in &outcome.trace {
        let step = match queue.peek() {
            Some((scripted, _, _)) if **scripted == *action => {
                let (_, by, gloss) = queue.next().unwrap();
                AnnotatedStep {
                    action: render_action(action, &script.aliases),
                    by: by.to_string(),
                    gloss: gloss.cloned(),
                }
            }
            _ => {
                // Off-script step: attribute it by polarity; a daimon
                // belongs to whoever is due to play positively.
                let by = match action {
                    Action::Proper {
                        pol: Polarity::Pos, ..
                    } => proponent.clone(),
                    Action::Proper {
                        pol: Polarity::Neg, ..
                    } => opponent.clone(),
                    Action::Daimon => match prev_rendered {
                        Some(Action::Proper {
                            pol: Polarity::Pos, ..
                        }) => opponent.clone(),
                        _ => proponent.clone(),
                    },
                };
                AnnotatedStep {
                    action: render_action(action, &script.aliases),
                    by,
                    gloss: None,
                }
            }
        };
        annotated.push(step);
        prev_rendered = Some(action);
    }

    let mut diagnostics = String::new();
    if outcome.verdict == Verdict::Diverged {
        if let Some(failing) = &outcome.failing {
            // The failing action is positive from its actor's view.  The
            // proponent played the trace's even positions, so the actor of
            // the next (failing) step follows from the trace length.
            let actor = if outcome.trace.len() % 2 == 0 {
                "proponent"
            } else {
                "opponent"
            };
            let (word, other_design) = if actor == "proponent" {
                ("proponent", &opp)
            } else {
                ("opponent", &pro)
            };
            let rendered = render_action(failing, &script.aliases);
            if let Action::Proper { anchor, ram, .. } = failing {
                match branches_at(&other_design.root, anchor) {
                    Some(available) => {
                        let set = available
                            .iter()
                            .map(|r| r.to_string())
                            .collect::<Vec<_>>()
                            .join(",");
                        diagnostics = format!(
                            "{}'s {} has no matching branch in {{{}}}; missing branch {}",
                            word, rendered, set, ram
                        );
                    }
                    None => {
                        diagnostics = format!(
                            "{}'s {} has no matching branch; no negative rule awaits at {}",
                            word,
                            rendered,
                            render_locus(anchor, &script.aliases)
                        );
                    }
                }
            }
        }
    }

    Ok(RunReport {
        outcome,
        annotated,
        diagnostics,
    })
}

/// Normalizes a justification against a wh-question design and returns the
/// residual answer design.
///
/// The question sits on a base `S ⊢ A` — negative at the judged locus `S`,
/// with a spare locus `A` for storing the answer — and the justification on
/// `⊢ S`.  When the interaction converges, the normal form is a design on
/// `⊢ A` whose first action selects the answer index (read it back with
/// [`read_answer`]).
pub fn wh_answer(
    question: &Design,
    justification: &Design,
    budget: usize,
) -> Result<Design, DialogueError> {
    let net = make_net(justification, question)?;
    let outcome = normalize(&net, budget)?;
    match outcome.verdict {
        Verdict::Converged => Ok(outcome
            .result
            .expect("a converged open net always carries its normal form")),
        Verdict::Diverged => Err(DialogueError::DivergedQuestion {
            failing: outcome
                .failing
                .map(|a| a.to_string())
                .unwrap_or_else(|| "†".to_string()),
        }),
        Verdict::Exhausted => Err(DialogueError::BudgetExhausted {
            steps: outcome.steps,
        }),
    }
}

/// Reads the answer index off an answer design: the index selected by a
/// root positive action with a singleton ramification.
///
/// # Examples
///
/// ```
/// use ludics_core::core::Design;
/// use ludics_core::dialogue::read_answer;
///
/// let d = Design::from_json_str(
///     r#"{"base":{"pos":["1"]},
///         "tree":{"rule":"pos","focus":"1","ram":[2],
///                 "premises":{"2":{"rule":"neg","anchor":"1.2","branches":[]}}}}"#,
/// )
/// .unwrap();
/// assert_eq!(read_answer(&d), Some(2));
/// ```
pub fn read_answer(d: &Design) -> Option<u32> {
    match &d.root {
        RuleNode::Pos { ram, .. } if ram.len() == 1 => ram.iter().next(),
        _ => None,
    }
}

/// Renders a one-line summary of the annotated trace (for reports).
pub fn trace_line(report: &RunReport) -> String {
    trace_string(&report.outcome.trace)
}
