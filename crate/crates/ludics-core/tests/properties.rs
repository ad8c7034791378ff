//! Cross-module property tests: text and JSON round-trips, normalization
//! laws, closure laws over enumerated universes, and the script/design
//! correspondence.
//!
//! The interaction-heavy blocks share one orthogonality table over the
//! depth-2 universes on `⊢ 0` and `0 ⊢` (290 × 1296 designs, budget 64 —
//! a closed depth-2 interaction finishes in at most nine steps).

use std::str::FromStr;
use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::sample::Index;

use ludics_core::behaviour::{behaviour_oplus, enumerate_universe, precedes, OrthTable, Universe};
use ludics_core::core::{
    chronicles, delocate, expand, fax, validate_with, Action, Design, Fork, LazyPolicy, Locus,
    Polarity, Ram,
};
use ludics_core::dialogue::{compile_script, Payload, Script, Turn};
use ludics_core::hscalc::{parse_formula, render_formula, HsFormula, Tensor};
use ludics_core::normalize::{normalize_pair, orthogonal, Verdict};

fn locus(text: &str) -> Locus {
    text.parse().unwrap()
}

/// The 290 designs on `⊢ 0` of depth at most 2 over ramifications `{0,1}`.
fn pos_universe() -> &'static Universe {
    static U: OnceLock<Universe> = OnceLock::new();
    U.get_or_init(|| {
        enumerate_universe(&Fork::positive([locus("0")]), 2, &Ram::from_iter([0, 1])).unwrap()
    })
}

/// The 1296 counter-designs on `0 ⊢` of depth at most 2.
fn neg_universe() -> &'static Universe {
    static U: OnceLock<Universe> = OnceLock::new();
    U.get_or_init(|| {
        enumerate_universe(&Fork::negative(locus("0"), []), 2, &Ram::from_iter([0, 1])).unwrap()
    })
}

/// The depth-1 counter-designs on `0 ⊢` (a cheaper pole for preorder and
/// sum tests).
fn shallow_neg_universe() -> &'static Universe {
    static U: OnceLock<Universe> = OnceLock::new();
    U.get_or_init(|| {
        enumerate_universe(&Fork::negative(locus("0"), []), 1, &Ram::from_iter([0, 1])).unwrap()
    })
}

fn orth_table() -> &'static OrthTable {
    static T: OnceLock<OrthTable> = OnceLock::new();
    T.get_or_init(|| {
        OrthTable::build(&pos_universe().designs, &neg_universe().designs, 64).unwrap()
    })
}

fn arb_locus() -> impl Strategy<Value = Locus> {
    proptest::collection::vec(0u32..6, 1..5).prop_map(Locus::from_segments)
}

fn arb_ram() -> impl Strategy<Value = Ram> {
    proptest::collection::btree_set(0u32..6, 0..4).prop_map(Ram::from_iter)
}

fn arb_action() -> impl Strategy<Value = Action> {
    prop_oneof![
        1 => Just(Action::Daimon),
        4 => (any::<bool>(), arb_locus(), arb_ram()).prop_map(|(positive, l, r)| {
            if positive {
                Action::pos(l, r)
            } else {
                Action::neg(l, r)
            }
        }),
    ]
}

/// Positive-normal-form formulas: atoms with constant arguments, units, the
/// stored top, and sums of tensor clauses.
fn arb_formula() -> impl Strategy<Value = HsFormula> {
    let leaf = prop_oneof![
        3 => ("[a-c]", proptest::collection::vec("[d-f]", 0..3)).prop_map(|(name, args)| {
            HsFormula::Atom { name, args }
        }),
        1 => Just(HsFormula::One),
        1 => Just(HsFormula::Top),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        proptest::collection::vec(proptest::collection::vec(inner, 1..3), 1..3)
            .prop_map(|clauses| HsFormula::Plus(clauses.into_iter().map(Tensor).collect()))
    })
}

proptest! {
    // -- textual round-trips --------------------------------------------------

    #[test]
    fn locus_display_parses_back(l in arb_locus()) {
        prop_assert_eq!(Locus::from_str(&l.to_string()).unwrap(), l);
    }

    #[test]
    fn ram_display_parses_back(r in arb_ram()) {
        prop_assert_eq!(Ram::from_str(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn action_display_parses_back(a in arb_action()) {
        prop_assert_eq!(Action::from_str(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn rendered_formulas_parse_back(q in arb_formula(), positive in any::<bool>()) {
        let pol = if positive { Polarity::Pos } else { Polarity::Neg };
        let text = render_formula(&q, pol);
        let (back, back_pol) = parse_formula(&text)
            .unwrap_or_else(|e| panic!("rendered `{text}` failed to parse: {e}"));
        prop_assert_eq!(back, q);
        prop_assert_eq!(back_pol, pol);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // -- designs under serialization and delocation ---------------------------

    #[test]
    fn design_json_round_trips(idx in any::<Index>()) {
        let d = &pos_universe().designs[idx.index(pos_universe().len())];
        let back = Design::from_json_str(&d.to_json_string()).unwrap();
        prop_assert_eq!(&back, d);
    }

    #[test]
    fn delocation_round_trips(idx in any::<Index>()) {
        let d = &pos_universe().designs[idx.index(pos_universe().len())];
        let there = delocate(d, &locus("0"), &locus("5")).unwrap();
        prop_assert!(validate_with(&there, LazyPolicy::Forbid).ok());
        let back = delocate(&there, &locus("5"), &locus("0")).unwrap();
        prop_assert_eq!(&back, d);
    }

    #[test]
    fn expansion_is_idempotent(k in 0usize..6) {
        let f = fax(&locus("0"), &locus("5"), &Ram::from_iter([0, 1]));
        let once = expand(&f, k);
        prop_assert_eq!(&expand(&once, k), &once);
    }

    #[test]
    fn chronicles_alternate_with_final_daimon(idx in any::<Index>()) {
        let d = &pos_universe().designs[idx.index(pos_universe().len())];
        for c in chronicles(d, 5) {
            prop_assert!(c.alternates(), "{d} produced a non-alternating chronicle");
        }
    }

    // -- interaction laws ------------------------------------------------------

    #[test]
    fn orthogonality_is_symmetric(i in any::<Index>(), j in any::<Index>()) {
        let d = &pos_universe().designs[i.index(pos_universe().len())];
        let e = &neg_universe().designs[j.index(neg_universe().len())];
        prop_assert_eq!(
            orthogonal(d, e, 64).unwrap(),
            orthogonal(e, d, 64).unwrap()
        );
    }

    #[test]
    fn traces_are_prefix_monotone(
        i in any::<Index>(),
        j in any::<Index>(),
        b1 in 0usize..12,
        extra in 0usize..12,
    ) {
        let d = &pos_universe().designs[i.index(pos_universe().len())];
        let e = &neg_universe().designs[j.index(neg_universe().len())];
        let short = normalize_pair(d, e, b1).unwrap();
        let long = normalize_pair(d, e, b1 + extra).unwrap();
        prop_assert!(long.trace.starts_with(&short.trace));
    }

    #[test]
    fn the_daimon_converges_everywhere(j in any::<Index>()) {
        let daimon = Design::daimon_on(Fork::positive([locus("0")]));
        let e = &neg_universe().designs[j.index(neg_universe().len())];
        prop_assert!(orthogonal(&daimon, e, 8).unwrap().is_yes());
    }

    #[test]
    fn the_table_matches_direct_checks(i in any::<Index>(), j in any::<Index>()) {
        let r = i.index(pos_universe().len());
        let c = j.index(neg_universe().len());
        let direct = orthogonal(
            &pos_universe().designs[r],
            &neg_universe().designs[c],
            64,
        )
        .unwrap();
        prop_assert_eq!(orth_table().get(r, c), direct.is_yes());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // -- closure laws over the shared table ------------------------------------

    #[test]
    fn closure_is_extensive(rows in proptest::collection::vec(any::<Index>(), 0..6)) {
        let t = orth_table();
        let rows: Vec<usize> = rows.iter().map(|i| i.index(t.n_rows())).collect();
        let closed = t.biorth_of_rows(&rows);
        prop_assert!(rows.iter().all(|r| closed.contains(r)));
    }

    #[test]
    fn closure_is_monotone(
        rows in proptest::collection::vec(any::<Index>(), 0..6),
        extra in any::<Index>(),
    ) {
        let t = orth_table();
        let small: Vec<usize> = rows.iter().map(|i| i.index(t.n_rows())).collect();
        let mut big = small.clone();
        big.push(extra.index(t.n_rows()));
        big.sort_unstable();
        big.dedup();
        let closed_small = t.biorth_of_rows(&small);
        let closed_big = t.biorth_of_rows(&big);
        prop_assert!(closed_small.iter().all(|r| closed_big.contains(r)));
    }

    #[test]
    fn closure_is_idempotent(rows in proptest::collection::vec(any::<Index>(), 0..6)) {
        let t = orth_table();
        let rows: Vec<usize> = rows.iter().map(|i| i.index(t.n_rows())).collect();
        let once = t.biorth_of_rows(&rows);
        prop_assert_eq!(t.biorth_of_rows(&once), once);
    }

    // -- dialogue scripts reconstructed from traces -----------------------------

    #[test]
    fn converged_traces_replay_as_scripts(i in any::<Index>(), j in any::<Index>()) {
        let d = &pos_universe().designs[i.index(pos_universe().len())];
        let e = &neg_universe().designs[j.index(neg_universe().len())];
        let outcome = normalize_pair(d, e, 64).unwrap();
        if outcome.verdict != Verdict::Converged {
            return Ok(());
        }
        let mut turns = Vec::new();
        for (k, action) in outcome.trace.iter().enumerate() {
            let by = match action {
                Action::Proper { pol: Polarity::Pos, .. } => "A",
                Action::Proper { pol: Polarity::Neg, .. } => "B",
                Action::Daimon => match outcome.trace.get(k.wrapping_sub(1)) {
                    Some(Action::Proper { pol: Polarity::Pos, .. }) => "B",
                    _ => "A",
                },
            };
            turns.push(Turn {
                by: by.to_string(),
                gloss: format!("step {k}"),
                payload: Payload::Action(action.clone()),
            });
        }
        let script = Script {
            speakers: ("A".to_string(), "B".to_string()),
            base: locus("0"),
            aliases: Default::default(),
            turns,
        };
        let (pro, opp) = compile_script(&script, &locus("0")).unwrap();
        let replay = normalize_pair(&pro, &opp, 64).unwrap();
        prop_assert_eq!(replay.verdict, Verdict::Converged);
        prop_assert_eq!(replay.trace, outcome.trace);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // -- the refinement preorder ------------------------------------------------

    #[test]
    fn precedes_is_reflexive(i in any::<Index>()) {
        let d = &pos_universe().designs[i.index(pos_universe().len())];
        prop_assert!(precedes(d, d, shallow_neg_universe(), 64).unwrap());
    }

    #[test]
    fn precedes_is_transitive(
        i in any::<Index>(),
        j in any::<Index>(),
        k in any::<Index>(),
    ) {
        let u = pos_universe();
        let a = &u.designs[i.index(u.len())];
        let b = &u.designs[j.index(u.len())];
        let c = &u.designs[k.index(u.len())];
        let pole = shallow_neg_universe();
        if precedes(a, b, pole, 64).unwrap() && precedes(b, c, pole, 64).unwrap() {
            prop_assert!(precedes(a, c, pole, 64).unwrap());
        }
    }

    #[test]
    fn precedes_is_orthogonal_set_inclusion(i in any::<Index>(), j in any::<Index>()) {
        let t = orth_table();
        let r1 = i.index(t.n_rows());
        let r2 = j.index(t.n_rows());
        let direct = precedes(
            &pos_universe().designs[r1],
            &pos_universe().designs[r2],
            neg_universe(),
            64,
        )
        .unwrap();
        let included = (0..t.n_cols()).all(|c| !t.get(r1, c) || t.get(r2, c));
        prop_assert_eq!(direct, included);
    }

    // -- sums by internal completeness -------------------------------------------

    #[test]
    fn sum_members_are_injections_or_the_daimon(
        c_idx in proptest::collection::vec(any::<Index>(), 1..4),
        d_idx in proptest::collection::vec(any::<Index>(), 1..4),
    ) {
        let first_universe = enumerate_universe(
            &Fork::negative(locus("0.0"), []),
            1,
            &Ram::from_iter([0, 1]),
        )
        .unwrap();
        let second_universe = enumerate_universe(
            &Fork::negative(locus("0.1"), []),
            1,
            &Ram::from_iter([0, 1]),
        )
        .unwrap();
        let first: Vec<Design> = c_idx
            .iter()
            .map(|i| first_universe.designs[i.index(first_universe.len())].clone())
            .collect();
        let second: Vec<Design> = d_idx
            .iter()
            .map(|i| second_universe.designs[i.index(second_universe.len())].clone())
            .collect();
        let sum = behaviour_oplus(
            &first,
            &second,
            shallow_neg_universe(),
            pos_universe(),
            64,
        )
        .unwrap();
        for m in &sum.members {
            let fine = match &m.root {
                ludics_core::core::RuleNode::Daimon => true,
                ludics_core::core::RuleNode::Pos { focus, ram, .. } => {
                    *focus == locus("0") && ram.len() == 1 && ram.iter().next().unwrap() <= 1
                }
                _ => false,
            };
            prop_assert!(fine, "unexpected sum member shape: {m}");
        }
    }
}

/// Every enumerated design passes validation — the enumerator and the
/// validator agree on what a design is.
#[test]
fn enumerated_designs_validate() {
    for d in &pos_universe().designs {
        assert!(validate_with(d, LazyPolicy::Forbid).ok(), "{d}");
    }
    for d in &shallow_neg_universe().designs {
        assert!(validate_with(d, LazyPolicy::Forbid).ok(), "{d}");
    }
}
