use ssc_core::tm::validate::validate_action;
use ssc_core::tm::{parse_pddl_actions, pretty_print, semantic_equiv, to_dnf, virtualhome_domain, Universe};
use ssc_core::ViolationKind;

const REFERENCE: &str = include_str!("fixtures/reference_actions.pddl");

#[test]
fn all_four_actions_parse() {
    let set = parse_pddl_actions(REFERENCE).unwrap();
    let names: Vec<&str> = set.iter().map(|a| a.name.as_str()).collect();
    for name in ["hang_up_clothes", "put_to", "pick_and_place", "bow"] {
        assert!(names.contains(&name), "{name} missing from {names:?}");
    }
}

#[test]
fn pretty_print_is_a_fixed_point() {
    let once = pretty_print(&parse_pddl_actions(REFERENCE).unwrap());
    let reparsed = parse_pddl_actions(&once).unwrap();
    assert_eq!(reparsed, parse_pddl_actions(REFERENCE).unwrap());
    assert_eq!(pretty_print(&reparsed), once);
}

#[test]
fn hang_up_clothes_dnf_is_equivalent() {
    let set = parse_pddl_actions(REFERENCE).unwrap();
    let a = set.get("hang_up_clothes").unwrap();
    let dnf = to_dnf(&a.precondition).unwrap().to_clause();
    assert!(semantic_equiv(&a.precondition, &dnf, &a.parameters, &Universe::new(3, 1)).unwrap());
}

#[test]
fn clean_actions_validate() {
    let set = parse_pddl_actions(REFERENCE).unwrap();
    for name in ["pick_and_place", "bow"] {
        let v = validate_action(set.get(name).unwrap(), virtualhome_domain());
        assert!(v.is_empty(), "{name}: {v:?}");
    }
}

/// The reference text itself is not fully consistent with the domain it
/// was written for; these pin down exactly where.
#[test]
fn known_reference_defects() {
    let set = parse_pddl_actions(REFERENCE).unwrap();
    let domain = virtualhome_domain();

    let put_to = validate_action(set.get("put_to").unwrap(), domain);
    assert!(!put_to.is_empty());
    assert!(put_to.iter().all(|v| v.kind == ViolationKind::UnknownPredicate), "{put_to:?}");
    assert!(put_to.iter().any(|v| v.detail.contains("hold_lh")));
    assert!(put_to.iter().any(|v| v.detail.contains("hold_rh")));

    let hang = validate_action(set.get("hang_up_clothes").unwrap(), domain);
    assert_eq!(hang.len(), 1, "{hang:?}");
    assert_eq!(hang[0].kind, ViolationKind::TypeMismatch);
    assert!(hang[0].detail.contains("ontop"));
}
