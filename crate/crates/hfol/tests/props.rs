//! Property tests for the stable syntactic invariants: fresh names,
//! disjunction canonicalization, and printer round-trips on randomly
//! generated material.

use std::collections::BTreeSet;

use proptest::prelude::*;

use hfol::frontend::{parse_document, parse_sentence, print_sentence, print_workspace, Workspace};
use hfol::gen::Gen;
use hfol::sig::fresh_name;
use hfol::syntax::Sentence;

proptest! {
    #[test]
    fn fresh_names_avoid_taken_names(
        base in "[a-z][a-z0-9]{0,5}",
        taken in prop::collection::btree_set("[a-z][a-z0-9!]{0,4}", 0..12),
    ) {
        let taken: BTreeSet<String> = taken;
        let name = fresh_name(&base, &taken);
        prop_assert!(!taken.contains(&name));
        prop_assert!(name.starts_with(base.split('!').next().unwrap()));
    }

    #[test]
    fn disjunction_ignores_order_and_duplicates(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let sig = g.signature();
        let items: Vec<Sentence> = (0..4).map(|_| g.sentence(&sig, 1)).collect();
        let mut doubled: Vec<Sentence> = items.iter().rev().cloned().collect();
        doubled.extend(items.iter().cloned());
        prop_assert_eq!(Sentence::or(items), Sentence::or(doubled));
    }

    #[test]
    fn printed_sentences_reparse(seed in any::<u64>(), depth in 1usize..4) {
        let mut g = Gen::new(seed);
        let sig = g.signature();
        let s = g.sentence(&sig, depth);
        let printed = print_sentence(&s);
        let back = parse_sentence(&sig, &printed)
            .unwrap_or_else(|e| panic!("{printed}: {e}"));
        prop_assert_eq!(back, s);
    }

    #[test]
    fn printed_workspaces_reparse(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let sig = g.signature();
        let chi = g.morphism(&sig);
        let model = g.model(&chi.target, 2, 2, "w");
        let mut ws = Workspace::default();
        ws.signatures.insert("A".into(), sig.clone());
        ws.signatures.insert("B".into(), chi.target.clone());
        ws.morphisms.insert("f".into(), chi);
        ws.models.insert("M".into(), model);
        ws.sentences.insert("S".into(), ("A".into(), vec![g.sentence(&sig, 2)]));
        let printed = print_workspace(&ws);
        let back = parse_document(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
        prop_assert_eq!(&back, &ws);
        prop_assert_eq!(print_workspace(&back), printed);
    }
}
