use specify_core::knowledge::{
    adapt_to_type, load_knowledge, split_id, LookupError, MField, ModelPattern, PatternItem, Store,
};
use specify_core::terms::{render, SrcPos, Term, Typ, TypeContext};

fn path(s: &str) -> Vec<String> {
    split_id(s)
}

#[test]
fn demo_problem_is_loaded() {
    let store = Store::shipped();
    let p = store.lookup_problem(&path("univariate_calculus/Optimisation")).unwrap();
    assert_eq!(p.guh, "pbl_opti_univ");
    let given: Vec<String> = p
        .model
        .items
        .iter()
        .filter(|i| i.field == MField::Given)
        .map(|i| format!("{} {}", i.descriptor, render(&i.placeholder)))
        .collect();
    assert_eq!(given, ["Constants fixes"]);
    assert_eq!(p.where_.len(), 1);
    assert_eq!(render(&p.where_[0].term), "0 < fixes");
    assert_eq!(p.solve_mets, vec![path("Optimisation/by_univariate_calculus")]);
    let find: Vec<&str> =
        p.model.items.iter().filter(|i| i.field == MField::Find).map(|i| i.descriptor.as_str()).collect();
    assert_eq!(find, ["Maximum", "AdditionalValues"]);
}

#[test]
fn lookups() {
    let store = Store::shipped();
    assert!(matches!(store.lookup_problem(&[]), Err(LookupError::NotFound(_))));
    let lin = store.lookup_problem(&path("univariate/equation/linear")).unwrap();
    assert_eq!(render(&lin.where_[0].term), "is_linear_in(e_e, v_v)");
    assert!(store.lookup_method(&path("Optimisation/by_univariate_calculus")).is_ok());
    assert!(store.lookup_example("Diff_App/coil-kernel").is_ok());
    assert!(store.lookup_example("nope").is_err());
    let kids: Vec<String> =
        store.problems.children(&path("univariate/equation")).iter().map(|p| p[2].clone()).collect();
    assert_eq!(kids, ["linear", "root", "polynomial", "rational"]);
}

#[test]
fn demo_example_items_are_lint_clean() {
    let store = Store::shipped();
    let f = store.lookup_example("Diff_App/coil-kernel").unwrap();
    assert_eq!(f.items.len(), 12);
    let p = store.lookup_problem(&f.refs.problem).unwrap();
    let m = store.lookup_method(&f.refs.method).unwrap();
    for item in &f.items {
        let (d, _) = item.term.as_descriptor_app().unwrap();
        assert!(p.model.find(d).is_some() || m.guard.find(d).is_some(), "{d}");
    }
}

#[test]
fn theories_scope_functions() {
    let store = Store::shipped();
    assert!(store.theory_context("Diff_App").functions.len() == 2);
    assert!(store.theory_context("PolyEq").functions.is_empty());
    assert_eq!(store.theory_context("PolyEq").lookup("π"), Some(&Typ::Real));
}

#[test]
fn loads_from_directory() {
    let dir = tempdir();
    for (name, text) in Store::shipped_sources() {
        std::fs::write(dir.join(name), text).unwrap();
    }
    std::fs::write(dir.join("ignored.txt"), "garbage").unwrap();
    let store = load_knowledge(&[&dir]).unwrap();
    assert_eq!(store.examples.len(), 1);
    std::fs::remove_dir_all(&dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("kb-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn pattern(items: &[(&str, &str)]) -> ModelPattern {
    ModelPattern {
        items: items
            .iter()
            .map(|(d, p)| PatternItem {
                field: MField::Given,
                descriptor: d.to_string(),
                placeholder: Term::var(*p),
                pos: SrcPos::START,
            })
            .collect(),
    }
}

#[test]
fn adapt_pattern() {
    let ctx = TypeContext::default().with_binding("fixes", Typ::ListOf(Box::new(Typ::Bool)));
    let mp = pattern(&[("Constants", "fixes")]);
    let adapted = adapt_to_type(&ctx, &mp).unwrap();
    assert_eq!(adapted.items[0].placeholder, Term::typed_var("fixes", Typ::ListOf(Box::new(Typ::Bool))));
    assert_eq!(adapt_to_type(&ctx, &adapted).unwrap(), adapted);
    let err = adapt_to_type(&ctx, &pattern(&[("Maximum", "maxx")])).unwrap_err();
    assert_eq!(err.name, "maxx");
}

#[test]
fn shipped_patterns_are_already_adapted() {
    let store = Store::shipped();
    for (_, p) in store.problems.iter() {
        let ctx = store.theory_context(&p.theory);
        assert_eq!(adapt_to_type(&ctx, &p.model).unwrap(), p.model);
    }
}
