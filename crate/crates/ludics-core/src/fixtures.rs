//! Embedded example files: the dialogue designs and scripts, the linguist
//! designs behind the ambiguous assertion, and the sequent proofs that
//! compile to them.
//!
//! Everything is baked in with `include_str!` so the library and its
//! command-line front end can run the worked examples without touching the
//! filesystem.  [`design`], [`script`], and [`proof`] look entries up by
//! name; the `*_names` functions list what ships (that is what the CLI's
//! `--fixtures` flag prints).

use std::collections::BTreeMap;

use crate::behaviour::Universe;
use crate::core::{Branch, Design, Fork, Locus, Ram, RuleNode};
use crate::hscalc::FiniteDomains;

// ---------------------------------------------------------------------------
// Designs
// ---------------------------------------------------------------------------

/// The party dialogue from A's point of view (converges on the daimon).
pub const AB_PROPONENT_DESIGN: &str = include_str!("../fixtures/ab_proponent.design");
/// The party dialogue from B's point of view.
pub const AB_OPPONENT_DESIGN: &str = include_str!("../fixtures/ab_opponent.design");
/// The drama stratagem from the proponent's side: ready for tragedy and
/// comedy, nothing else.
pub const SCHOPENHAUER_PROPONENT_DESIGN: &str =
    include_str!("../fixtures/schopenhauer_proponent.design");
/// The drama stratagem from the opponent's side: the opera counterattack.
pub const SCHOPENHAUER_OPPONENT_DESIGN: &str =
    include_str!("../fixtures/schopenhauer_opponent.design");
/// The loaded-question dialogue from the judge's point of view.
pub const JUDGE_JUDGE_DESIGN: &str = include_str!("../fixtures/judge_judge.design");
/// The loaded-question dialogue from the man's point of view.
pub const JUDGE_MAN_DESIGN: &str = include_str!("../fixtures/judge_man.design");
/// The stuck justification attempt `D` for the ambiguous assertion.
pub const LINGUIST_D_DESIGN: &str = include_str!("../fixtures/linguist_d.design");
/// The completed justification `D′` (every leaf answered by a data axiom).
pub const LINGUIST_DPRIME_DESIGN: &str = include_str!("../fixtures/linguist_dprime.design");
/// The opponent reading `E` that presses the first-reading question.
pub const LINGUIST_E_DESIGN: &str = include_str!("../fixtures/linguist_e.design");
/// The wh-question design: stores the answer at a spare locus and verifies
/// the speaker's evidence through copycat.
pub const WH_QUESTION_DESIGN: &str = include_str!("../fixtures/wh_question.design");

// ---------------------------------------------------------------------------
// Scripts
// ---------------------------------------------------------------------------

/// The five-turn party dialogue (ends on "that is what I wanted to know").
pub const AB_SCRIPT: &str = include_str!("../fixtures/ab.script");
/// The drama stratagem: claim, division into branches, opera counterattack.
pub const SCHOPENHAUER_SCRIPT: &str = include_str!("../fixtures/schopenhauer.script");
/// The loaded question, packed into a single three-action chronicle.
pub const JUDGE_SCRIPT: &str = include_str!("../fixtures/judge.script");

// ---------------------------------------------------------------------------
// Sequent proofs
// ---------------------------------------------------------------------------

/// The proof attempt behind `D`: three open obligations per reading left
/// unproved.
pub const S_ATTEMPT_PROOF: &str = include_str!("../fixtures/s_attempt.hsproof");
/// The completed proof behind `D′`: every leaf closed by a data axiom.
pub const S_DPRIME_PROOF: &str = include_str!("../fixtures/s_dprime.hsproof");
/// The opponent paraproof behind `E`: tests the first reading, concedes the
/// second with the daimon.
pub const S_OPPONENT_PROOF: &str = include_str!("../fixtures/s_opponent.hsproof");
/// A flat three-part tensor with three open obligations.
pub const ANNEX_TENSOR_PROOF: &str = include_str!("../fixtures/annex_tensor.hsproof");
/// The same content written with an inner shift: still exactly three open
/// obligations, two rule layers deeper.
pub const ANNEX_SHIFT_PROOF: &str = include_str!("../fixtures/annex_shift.hsproof");
/// The atom axiom `P ⊢ P`.
pub const AXIOM_ATOM_PROOF: &str = include_str!("../fixtures/axiom_atom.hsproof");
/// The unit axiom `⊢ 1`.
pub const AXIOM_ONE_PROOF: &str = include_str!("../fixtures/axiom_one.hsproof");
/// The top axiom `⊢ ↓T, Γ`.
pub const AXIOM_TOP_PROOF: &str = include_str!("../fixtures/axiom_top.hsproof");
/// The daimon rule closing an arbitrary positive sequent.
pub const AXIOM_DAIMON_PROOF: &str = include_str!("../fixtures/axiom_daimon.hsproof");
/// The eta-expanded identity on an atom: compiles to a copycat fax.
pub const ETA_IDENTITY_PROOF: &str = include_str!("../fixtures/eta_identity.hsproof");

// ---------------------------------------------------------------------------
// The ambiguous assertion
// ---------------------------------------------------------------------------

/// The ambiguous assertion "everybody who is a linguist speaks some african
/// language": one reading per disjunct.  `L(x)` reads "x is a linguist",
/// `A(y)` "y is african", `P(x, y)` "x speaks y".
pub const AMBIGUOUS_SENTENCE: &str = "(all x:Ind. ((up L(x)) -o (some y:Lang. ((up A(y)) * (up P(x,y)))))) + (up (some y:Lang. ((up A(y)) * (all x:Ind. ((up L(x)) -o P(x,y))))))";

/// The finite domains the assertion is grounded over: three individuals and
/// three languages.  `e` sits at index 1, which is why the worked answer
/// designs select ramification `{1}`.
pub fn sentence_domains() -> FiniteDomains {
    let mut domains = FiniteDomains::new();
    domains.insert(
        "Ind",
        vec!["d".to_string(), "d'".to_string(), "d''".to_string()],
    );
    domains.insert(
        "Lang",
        vec!["e'".to_string(), "e".to_string(), "e''".to_string()],
    );
    domains
}

// ---------------------------------------------------------------------------
// Lookup
// ---------------------------------------------------------------------------

const DESIGNS: &[(&str, &str)] = &[
    ("ab_proponent", AB_PROPONENT_DESIGN),
    ("ab_opponent", AB_OPPONENT_DESIGN),
    ("schopenhauer_proponent", SCHOPENHAUER_PROPONENT_DESIGN),
    ("schopenhauer_opponent", SCHOPENHAUER_OPPONENT_DESIGN),
    ("judge_judge", JUDGE_JUDGE_DESIGN),
    ("judge_man", JUDGE_MAN_DESIGN),
    ("linguist_d", LINGUIST_D_DESIGN),
    ("linguist_dprime", LINGUIST_DPRIME_DESIGN),
    ("linguist_e", LINGUIST_E_DESIGN),
    ("wh_question", WH_QUESTION_DESIGN),
];

const SCRIPTS: &[(&str, &str)] = &[
    ("ab", AB_SCRIPT),
    ("schopenhauer", SCHOPENHAUER_SCRIPT),
    ("judge", JUDGE_SCRIPT),
];

const PROOFS: &[(&str, &str)] = &[
    ("s_attempt", S_ATTEMPT_PROOF),
    ("s_dprime", S_DPRIME_PROOF),
    ("s_opponent", S_OPPONENT_PROOF),
    ("annex_tensor", ANNEX_TENSOR_PROOF),
    ("annex_shift", ANNEX_SHIFT_PROOF),
    ("axiom_atom", AXIOM_ATOM_PROOF),
    ("axiom_one", AXIOM_ONE_PROOF),
    ("axiom_top", AXIOM_TOP_PROOF),
    ("axiom_daimon", AXIOM_DAIMON_PROOF),
    ("eta_identity", ETA_IDENTITY_PROOF),
];

fn lookup(table: &[(&str, &'static str)], name: &str) -> Option<&'static str> {
    table
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// The JSON source of a shipped design, by name.
pub fn design(name: &str) -> Option<&'static str> {
    lookup(DESIGNS, name)
}

/// The JSON source of a shipped dialogue script, by name.
pub fn script(name: &str) -> Option<&'static str> {
    lookup(SCRIPTS, name)
}

/// The JSON source of a shipped sequent proof, by name.
pub fn proof(name: &str) -> Option<&'static str> {
    lookup(PROOFS, name)
}

/// Names of all shipped designs.
pub fn design_names() -> Vec<&'static str> {
    DESIGNS.iter().map(|(n, _)| *n).collect()
}

/// Names of all shipped scripts.
pub fn script_names() -> Vec<&'static str> {
    SCRIPTS.iter().map(|(n, _)| *n).collect()
}

/// Names of all shipped proofs.
pub fn proof_names() -> Vec<&'static str> {
    PROOFS.iter().map(|(n, _)| *n).collect()
}

// ---------------------------------------------------------------------------
// The linguist counter-universe
// ---------------------------------------------------------------------------

fn locus(text: &str) -> Locus {
    text.parse().expect("fixture loci parse")
}

fn ram<const N: usize>(items: [u32; N]) -> Ram {
    Ram::from_iter(items)
}

fn neg(anchor: &str, branches: Vec<(Ram, RuleNode)>) -> RuleNode {
    RuleNode::Neg {
        anchor: locus(anchor),
        branches: branches
            .into_iter()
            .map(|(j, tree)| {
                (
                    j,
                    Branch {
                        tree,
                        ctx: Default::default(),
                    },
                )
            })
            .collect(),
    }
}

fn pos(focus: &str, r: Ram, premises: Vec<(u32, RuleNode)>) -> RuleNode {
    let premises: BTreeMap<u32, RuleNode> = premises.into_iter().collect();
    let ctx = premises.keys().map(|i| (*i, Default::default())).collect();
    RuleNode::Pos {
        focus: locus(focus),
        ram: r,
        premises,
        ctx,
    }
}

/// A probe that accepts the first reading, asks which language the
/// individual at `speak_code` speaks, and then demands the speaking fact
/// itself — converging exactly when the justification can produce the data.
///
/// Against the stuck attempt `D` this diverges (the fact is missing);
/// against `D′` it converges on the data axiom.
fn data_prober(reading: [u32; 2], fact: u32) -> Design {
    let [ask, tell] = reading;
    let anchor = format!("0.0.{tell}");
    let challenge = format!("0.0.{tell}.{fact}");
    let leaf = format!("0.0.{tell}.{fact}.0");
    Design {
        base: Fork::negative(locus("0"), []),
        root: neg(
            "0",
            vec![(
                ram([0]),
                pos(
                    "0.0",
                    ram(reading),
                    vec![
                        (ask, neg(&format!("0.0.{ask}"), vec![])),
                        (
                            tell,
                            neg(
                                &anchor,
                                vec![(
                                    ram([fact, fact + 1]),
                                    pos(
                                        &challenge,
                                        ram([0]),
                                        vec![(
                                            0,
                                            neg(&leaf, vec![(Ram::empty(), RuleNode::Daimon)]),
                                        )],
                                    ),
                                )],
                            ),
                        ),
                    ],
                ),
            )],
        ),
    }
}

/// An opponent in the style of `E` that presses the question for one
/// individual and then accepts whatever evidence arrives.
fn accepting_asker(reading: [u32; 2]) -> Design {
    let [ask, tell] = reading;
    let anchor = format!("0.0.{tell}");
    let accept = vec![
        (ram([0, 1]), RuleNode::Daimon),
        (ram([2, 3]), RuleNode::Daimon),
        (ram([4, 5]), RuleNode::Daimon),
    ];
    Design {
        base: Fork::negative(locus("0"), []),
        root: neg(
            "0",
            vec![
                (
                    ram([0]),
                    pos(
                        "0.0",
                        ram(reading),
                        vec![
                            (ask, neg(&format!("0.0.{ask}"), vec![])),
                            (tell, neg(&anchor, accept)),
                        ],
                    ),
                ),
                (ram([1]), RuleNode::Daimon),
            ],
        ),
    }
}

/// The curated counter-universe for the linguist example: every design
/// interrogates the assertion on the dual base `0 ⊢`.
///
/// Its nine designs: the shipped opponent `E` (which *is* the accepting
/// asker for the first individual), accepting askers for the other two
/// individuals, three data probers (one per individual) that separate `D`
/// from `D′`, a shallow accepter, a second-reading-only accepter, and the
/// empty refuser.
pub fn linguist_universe() -> Universe {
    let mut designs = vec![
        Design::from_json_str(LINGUIST_E_DESIGN).expect("fixture designs parse"),
        // One data prober per individual: reading {0,1} asks about d (who
        // speaks e), {2,3} about d' (e'), {4,5} about d''(e'').
        data_prober([0, 1], 2),
        data_prober([2, 3], 0),
        data_prober([4, 5], 4),
        accepting_asker([2, 3]),
        accepting_asker([4, 5]),
        // Accepts either reading outright.
        Design {
            base: Fork::negative(locus("0"), []),
            root: neg(
                "0",
                vec![(ram([0]), RuleNode::Daimon), (ram([1]), RuleNode::Daimon)],
            ),
        },
        // Only accepts the second reading.
        Design {
            base: Fork::negative(locus("0"), []),
            root: neg("0", vec![(ram([1]), RuleNode::Daimon)]),
        },
        // Refuses to listen at all.
        Design {
            base: Fork::negative(locus("0"), []),
            root: neg("0", vec![]),
        },
    ];
    designs.sort();
    Universe::custom(
        Fork::negative(locus("0"), []),
        Ram::from_iter(0..=5),
        designs,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{validate_with, LazyPolicy};
    use crate::dialogue::{compile_script, Script};
    use crate::hscalc::{check_proof, expand_quantifiers, formula_fixture, HsProof};
    use crate::normalize::orthogonal;

    #[test]
    fn every_shipped_design_validates() {
        for name in design_names() {
            let d = Design::from_json_str(design(name).unwrap())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            let report = validate_with(&d, LazyPolicy::Allow);
            assert!(report.ok(), "{name}: {report}");
        }
    }

    #[test]
    fn every_shipped_script_parses_and_compiles() {
        for name in script_names() {
            let s = Script::from_json_str(script(name).unwrap())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            compile_script(&s, &s.base.clone()).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn every_shipped_proof_parses_and_checks() {
        for name in proof_names() {
            let p = HsProof::from_json_str(proof(name).unwrap())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            let report = check_proof(&p);
            assert!(report.valid, "{name}: {report}");
        }
    }

    #[test]
    fn lookups_reject_unknown_names() {
        assert!(design("no_such").is_none());
        assert!(script("no_such").is_none());
        assert!(proof("no_such").is_none());
    }

    #[test]
    fn the_sentence_grounds_over_its_domains() {
        let (q, pol) = expand_quantifiers(AMBIGUOUS_SENTENCE, &sentence_domains()).unwrap();
        assert_eq!(pol, crate::core::Polarity::Pos);
        // Two readings, each a single slot.
        let arities: Vec<usize> = q.disjuncts().unwrap().iter().map(|t| t.0.len()).collect();
        assert_eq!(arities, [1, 1]);
    }

    #[test]
    fn the_sentence_proofs_compile_to_the_linguist_designs() {
        let (q, _) = expand_quantifiers(AMBIGUOUS_SENTENCE, &sentence_domains()).unwrap();
        let pairs = formula_fixture(&q, &locus("0")).unwrap();
        let by_name: BTreeMap<&str, &Design> =
            pairs.iter().map(|p| (p.name.as_str(), &p.design)).collect();
        assert_eq!(
            *by_name["D"],
            Design::from_json_str(LINGUIST_D_DESIGN).unwrap()
        );
        assert_eq!(
            *by_name["Dprime"],
            Design::from_json_str(LINGUIST_DPRIME_DESIGN).unwrap()
        );
        assert_eq!(
            *by_name["E"],
            Design::from_json_str(LINGUIST_E_DESIGN).unwrap()
        );
    }

    #[test]
    fn the_linguist_universe_separates_the_attempt_from_its_completion() {
        let universe = linguist_universe();
        assert!(universe.len() >= 8);
        let d = Design::from_json_str(LINGUIST_D_DESIGN).unwrap();
        let dprime = Design::from_json_str(LINGUIST_DPRIME_DESIGN).unwrap();
        let mut converges_d = 0;
        let mut witnesses = 0;
        for t in &universe.designs {
            let with_d = orthogonal(&d, t, 256).unwrap().is_yes();
            let with_dprime = orthogonal(&dprime, t, 256).unwrap().is_yes();
            if with_d {
                converges_d += 1;
                assert!(with_dprime, "an interaction converged on D but not on D′");
            }
            if with_dprime && !with_d {
                witnesses += 1;
            }
        }
        assert!(converges_d > 0, "the universe never exercises D");
        assert!(witnesses >= 3, "the data probers must separate D′ from D");
    }
}
