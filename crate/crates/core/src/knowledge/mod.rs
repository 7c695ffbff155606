//! Authored content: theories, problem patterns, method guards and example
//! formalisations, loaded from knowledge files into an immutable store.

mod descriptors;
pub(crate) mod file;
mod load;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use descriptors::{ArgShape, Descriptor, DescriptorRegistry, PATH_REF_TEMPLATE, THEORY_REF_TEMPLATE};
pub use load::{load_knowledge, load_sources};

use crate::terms::{adapt_term_to_type, Func, SrcPos, Term, Typ, TypeContext, TypeError};

/// Slash-separated identifiers split into segments.
pub type IdPath = Vec<String>;

pub fn split_id(s: &str) -> IdPath {
    if s.is_empty() {
        return Vec::new();
    }
    s.split('/').map(str::to_string).collect()
}

pub fn join_id(path: &[String]) -> String {
    path.join("/")
}

/// Rule sets a problem may name for evaluating its preconditions.
pub const RULE_SETS: &[&str] = &["eval_rls"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MField {
    Given,
    Find,
    Relate,
}

impl MField {
    pub const ALL: [MField; 3] = [MField::Given, MField::Find, MField::Relate];

    pub fn name(self) -> &'static str {
        match self {
            MField::Given => "Given",
            MField::Find => "Find",
            MField::Relate => "Relate",
        }
    }

    pub fn from_name(s: &str) -> Option<MField> {
        MField::ALL.into_iter().find(|f| f.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for MField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternItem {
    pub field: MField,
    pub descriptor: String,
    pub placeholder: Term,
    pub pos: SrcPos,
}

impl PatternItem {
    pub fn placeholder_name(&self) -> &str {
        self.placeholder.as_var().expect("placeholders are variables")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModelPattern {
    pub items: Vec<PatternItem>,
}

impl ModelPattern {
    pub fn find(&self, descriptor: &str) -> Option<&PatternItem> {
        self.items.iter().find(|i| i.descriptor == descriptor)
    }

    pub fn find_in(&self, field: MField, descriptor: &str) -> Option<&PatternItem> {
        self.items.iter().find(|i| i.field == field && i.descriptor == descriptor)
    }

    pub fn placeholders(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(PatternItem::placeholder_name)
    }
}

/// A precondition with the text it was parsed from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precond {
    pub term: Term,
    pub source: String,
    pub pos: SrcPos,
}

/// `solve (e_e, v_v)`: a head symbol and placeholder parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CasPattern {
    pub head: String,
    pub params: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemDef {
    pub guh: String,
    pub id: IdPath,
    pub theory: String,
    pub mathauthors: Vec<String>,
    pub start_refine: Option<IdPath>,
    pub cas: Option<CasPattern>,
    pub solve_mets: Vec<IdPath>,
    pub where_rls: String,
    pub where_: Vec<Precond>,
    pub model: ModelPattern,
    /// Postcondition text, kept for display only.
    pub post: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDef {
    pub id: IdPath,
    pub theory: String,
    pub guard: ModelPattern,
    pub program_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormItem {
    pub text: String,
    pub term: Term,
    /// Explicit variant indices; `None` means numbered by appearance.
    pub variants: Option<BTreeSet<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct References {
    pub theory: String,
    pub problem: IdPath,
    pub method: IdPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Formalisation {
    pub id: String,
    pub text: String,
    pub items: Vec<FormItem>,
    pub refs: References,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    pub id: String,
    pub imports: Option<String>,
    pub functions: BTreeSet<Func>,
    pub consts: Vec<String>,
}

/// Nodes keyed by id segments, children kept in declaration order.
/// Intermediate nodes may carry no value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree<T> {
    value: Option<T>,
    children: Vec<(String, Tree<T>)>,
}

impl<T> Default for Tree<T> {
    fn default() -> Self {
        Tree { value: None, children: Vec::new() }
    }
}

impl<T> Tree<T> {
    fn node(&self, path: &[String]) -> Option<&Tree<T>> {
        match path.split_first() {
            None => Some(self),
            Some((head, rest)) => self.children.iter().find(|(k, _)| k == head)?.1.node(rest),
        }
    }

    pub fn get(&self, path: &[String]) -> Option<&T> {
        if path.is_empty() {
            return None;
        }
        self.node(path)?.value.as_ref()
    }

    /// Inserts at `path`; gives the value back if the slot is taken.
    pub fn insert(&mut self, path: &[String], value: T) -> Result<(), T> {
        let mut cur = self;
        for seg in path {
            let idx = match cur.children.iter().position(|(k, _)| k == seg) {
                Some(i) => i,
                None => {
                    cur.children.push((seg.clone(), Tree::default()));
                    cur.children.len() - 1
                }
            };
            cur = &mut cur.children[idx].1;
        }
        if cur.value.is_some() {
            return Err(value);
        }
        cur.value = Some(value);
        Ok(())
    }

    /// Nearest valued descendants of `path`, in declaration order.
    pub fn children(&self, path: &[String]) -> Vec<IdPath> {
        let mut out = Vec::new();
        if let Some(node) = self.node(path) {
            node.collect_children(&mut path.to_vec(), &mut out);
        }
        out
    }

    fn collect_children(&self, prefix: &mut IdPath, out: &mut Vec<IdPath>) {
        for (k, child) in &self.children {
            prefix.push(k.clone());
            if child.value.is_some() {
                out.push(prefix.clone());
            } else {
                child.collect_children(prefix, out);
            }
            prefix.pop();
        }
    }

    /// All valued nodes in pre-order.
    pub fn iter(&self) -> Vec<(IdPath, &T)> {
        let mut out = Vec::new();
        self.walk(&mut Vec::new(), &mut out);
        out
    }

    fn walk<'a>(&'a self, prefix: &mut IdPath, out: &mut Vec<(IdPath, &'a T)>) {
        if let Some(v) = &self.value {
            out.push((prefix.clone(), v));
        }
        for (k, child) in &self.children {
            prefix.push(k.clone());
            child.walk(prefix, out);
            prefix.pop();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum LookupError {
    #[error("not found: {0}")]
    NotFound(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{file}:{pos}: {msg}")]
pub struct AuthoringError {
    pub file: String,
    pub pos: SrcPos,
    pub msg: String,
}

#[derive(Debug, Clone, Default)]
pub struct Store {
    pub problems: Tree<ProblemDef>,
    pub methods: Tree<MethodDef>,
    pub examples: BTreeMap<String, Formalisation>,
    pub theories: BTreeMap<String, Theory>,
    pub descriptors: DescriptorRegistry,
}

const SHIPPED: &[(&str, &str)] = &[
    ("base.kb", include_str!("../../knowledge/base.kb")),
    ("diff_app.kb", include_str!("../../knowledge/diff_app.kb")),
    ("equations.kb", include_str!("../../knowledge/equations.kb")),
];

impl Store {
    /// The knowledge pack compiled into the library.
    pub fn shipped() -> Store {
        let sources: Vec<(String, String)> = SHIPPED.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect();
        load_sources(&sources).expect("shipped knowledge is well-formed")
    }

    /// Sources of the shipped pack, for tools that want to inspect them.
    pub fn shipped_sources() -> &'static [(&'static str, &'static str)] {
        SHIPPED
    }

    pub fn lookup_problem(&self, path: &[String]) -> Result<&ProblemDef, LookupError> {
        self.problems.get(path).ok_or_else(|| LookupError::NotFound(format!("problem \"{}\"", join_id(path))))
    }

    pub fn lookup_method(&self, path: &[String]) -> Result<&MethodDef, LookupError> {
        self.methods.get(path).ok_or_else(|| LookupError::NotFound(format!("method \"{}\"", join_id(path))))
    }

    pub fn lookup_example(&self, id: &str) -> Result<&Formalisation, LookupError> {
        self.examples.get(id).ok_or_else(|| LookupError::NotFound(format!("example \"{id}\"")))
    }

    pub fn lookup_theory(&self, id: &str) -> Result<&Theory, LookupError> {
        self.theories.get(id).ok_or_else(|| LookupError::NotFound(format!("theory \"{id}\"")))
    }

    /// Typing context of a theory: its functions and constants together
    /// with those of everything it imports.
    pub fn theory_context(&self, id: &str) -> TypeContext {
        let mut ctx = TypeContext::new(id);
        let mut seen = BTreeSet::new();
        let mut cur = Some(id.to_string());
        while let Some(name) = cur.take() {
            if !seen.insert(name.clone()) {
                break;
            }
            if let Some(th) = self.theories.get(&name) {
                ctx.functions.extend(th.functions.iter().copied());
                for c in &th.consts {
                    ctx.bindings.entry(c.clone()).or_insert(Typ::Real);
                }
                cur = th.imports.clone();
            }
        }
        ctx
    }

    /// Whether theory `id` is `ancestor` or imports it, directly or not.
    pub fn theory_extends(&self, id: &str, ancestor: &str) -> bool {
        let mut seen = BTreeSet::new();
        let mut cur = Some(id.to_string());
        while let Some(name) = cur.take() {
            if name == ancestor {
                return true;
            }
            if !seen.insert(name.clone()) {
                return false;
            }
            cur = self.theories.get(&name).and_then(|t| t.imports.clone());
        }
        false
    }
}

/// Applies `adapt_term_to_type` to every placeholder of the pattern.
pub fn adapt_to_type(ctx: &TypeContext, mp: &ModelPattern) -> Result<ModelPattern, TypeError> {
    let items = mp
        .items
        .iter()
        .map(|i| {
            adapt_term_to_type(ctx, &i.placeholder)
                .map(|placeholder| PatternItem { placeholder, ..i.clone() })
                .map_err(|e| TypeError { pos: Some(i.pos), ..e })
        })
        .collect::<Result<_, _>>()?;
    Ok(ModelPattern { items })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> IdPath {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn id_paths_round_trip() {
        for s in ["univariate_calculus/Optimisation", "a", "x/y/z"] {
            assert_eq!(join_id(&split_id(s)), s);
        }
        assert!(split_id("").is_empty());
    }

    #[test]
    fn tree_keeps_declaration_order() {
        let mut t: Tree<u32> = Tree::default();
        for (i, k) in ["linear", "root", "polynomial", "rational"].iter().enumerate() {
            t.insert(&ids(&["eq", k]), i as u32).unwrap();
        }
        t.insert(&ids(&["eq"]), 9).unwrap();
        assert_eq!(t.insert(&ids(&["eq"]), 10), Err(10));
        let kids: Vec<String> = t.children(&ids(&["eq"])).into_iter().map(|p| p[1].clone()).collect();
        assert_eq!(kids, ["linear", "root", "polynomial", "rational"]);
        assert_eq!(t.get(&[]), None);
        assert_eq!(t.iter().len(), 5);
    }

    #[test]
    fn children_skip_valueless_nodes() {
        let mut t: Tree<u32> = Tree::default();
        t.insert(&ids(&["a", "b", "c"]), 1).unwrap();
        assert_eq!(t.children(&ids(&["a"])), vec![ids(&["a", "b", "c"])]);
        assert_eq!(t.get(&ids(&["a", "b"])), None);
    }
}
