use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::terms::Typ;

/// How a descriptor's argument is written; selects the input template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgShape {
    ListOfEq,
    ListOfAtoms,
    Single,
    StringRef,
}

impl ArgShape {
    pub fn template(self) -> &'static str {
        match self {
            ArgShape::ListOfEq => "[__=__, __=__]",
            ArgShape::ListOfAtoms => "[__, __]",
            ArgShape::Single => "__",
            ArgShape::StringRef => "\"__\"",
        }
    }

    pub fn is_list(self) -> bool {
        matches!(self, ArgShape::ListOfEq | ArgShape::ListOfAtoms)
    }

    pub fn from_name(s: &str) -> Option<ArgShape> {
        match s {
            "list_of_eq" => Some(ArgShape::ListOfEq),
            "list_of_atoms" => Some(ArgShape::ListOfAtoms),
            "single" => Some(ArgShape::Single),
            _ => None,
        }
    }
}

/// Template shown for a theory reference.
pub const THEORY_REF_TEMPLATE: &str = "\"__\"";
/// Template shown for problem and method references.
pub const PATH_REF_TEMPLATE: &str = "\"__/__\"";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    pub name: String,
    pub arg_shape: ArgShape,
    /// Type of the whole argument.
    pub typ: Typ,
}

impl Descriptor {
    pub fn new(name: &str, arg_shape: ArgShape, single: Typ) -> Descriptor {
        let typ = match arg_shape {
            ArgShape::ListOfEq => Typ::ListOf(Box::new(Typ::Bool)),
            ArgShape::ListOfAtoms => Typ::ListOf(Box::new(Typ::Real)),
            _ => single,
        };
        Descriptor { name: name.to_string(), arg_shape, typ }
    }

    pub fn template(&self) -> &'static str {
        self.arg_shape.template()
    }

    /// Type of a single value: list elements for list shapes.
    pub fn element_typ(&self) -> &Typ {
        match &self.typ {
            Typ::ListOf(inner) if self.arg_shape.is_list() => inner,
            t => t,
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DescriptorRegistry(BTreeMap<String, Descriptor>);

impl DescriptorRegistry {
    pub fn builtin() -> DescriptorRegistry {
        use ArgShape::*;
        let table = [
            ("Constants", ListOfEq, Typ::Bool),
            ("Maximum", Single, Typ::Real),
            ("AdditionalValues", ListOfAtoms, Typ::Real),
            ("Extremum", Single, Typ::Bool),
            ("SideConditions", ListOfEq, Typ::Bool),
            ("FunctionVariable", Single, Typ::Real),
            ("Domain", Single, Typ::SetOfReal),
            ("ErrorBound", Single, Typ::Bool),
            ("Equation", Single, Typ::Bool),
            ("SolveFor", Single, Typ::Real),
            ("Solutions", ListOfEq, Typ::Bool),
        ];
        DescriptorRegistry(table.into_iter().map(|(n, s, t)| (n.to_string(), Descriptor::new(n, s, t))).collect())
    }

    pub fn get(&self, name: &str) -> Option<&Descriptor> {
        self.0.get(name)
    }

    /// Adds a descriptor; `false` if the name is taken.
    pub fn register(&mut self, d: Descriptor) -> bool {
        if self.0.contains_key(&d.name) {
            return false;
        }
        self.0.insert(d.name.clone(), d);
        true
    }

    pub fn iter(&self) -> impl Iterator<Item = &Descriptor> {
        self.0.values()
    }
}
