use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::file::{parse_file, RawDecl, RawField, RawStr};
use super::*;
use crate::terms::{greek_from_ascii, parse_call, parse_term, SrcPos, Term, TypeContext};

/// Loads knowledge files; directories contribute their `*.kb` files in
/// name order.
pub fn load_knowledge<P: AsRef<Path>>(paths: &[P]) -> Result<Store, AuthoringError> {
    let mut files: Vec<PathBuf> = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let io_err = |e: std::io::Error| AuthoringError {
            file: p.display().to_string(),
            pos: SrcPos::START,
            msg: e.to_string(),
        };
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(p)
                .map_err(io_err)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "kb"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.to_path_buf());
        }
    }
    let mut sources = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).map_err(|e| AuthoringError {
            file: f.display().to_string(),
            pos: SrcPos::START,
            msg: e.to_string(),
        })?;
        sources.push((f.display().to_string(), text));
    }
    load_sources(&sources)
}

struct Located<T> {
    file: String,
    theory: String,
    decl: T,
}

struct Loader {
    store: Store,
}

fn err(file: &str, pos: SrcPos, msg: impl Into<String>) -> AuthoringError {
    AuthoringError { file: file.to_string(), pos, msg: msg.into() }
}

/// Loads `(file name, contents)` pairs as one store.
pub fn load_sources(sources: &[(String, String)]) -> Result<Store, AuthoringError> {
    let mut decls: Vec<Located<RawDecl>> = Vec::new();
    for (file, text) in sources {
        let parsed = parse_file(text).map_err(|(pos, msg)| err(file, pos, msg))?;
        let mut theory = "Base".to_string();
        for d in parsed {
            if let RawDecl::Theory { name, .. } = &d {
                theory = name.text.clone();
            }
            decls.push(Located { file: file.clone(), theory: theory.clone(), decl: d });
        }
    }
    let mut loader = Loader { store: Store { descriptors: DescriptorRegistry::builtin(), ..Store::default() } };
    // theories and descriptors first: everything else is parsed against them
    for d in &decls {
        match &d.decl {
            RawDecl::Theory { name, imports, fields } => loader.theory(&d.file, name, imports, fields)?,
            RawDecl::Descriptor { name, shape, typ } => loader.descriptor(&d.file, name, shape, typ)?,
            _ => {}
        }
    }
    for d in &decls {
        if let RawDecl::Theory { name, imports: Some(imp), .. } = &d.decl {
            if !loader.store.theories.contains_key(&imp.text) {
                return Err(err(&d.file, imp.pos, format!("unknown theory \"{}\"", imp.text)));
            }
            if loader.store.theory_extends(&imp.text, &name.text) {
                return Err(err(&d.file, imp.pos, format!("theory \"{}\" imports itself", name.text)));
            }
        }
    }
    let mut guhs: BTreeMap<String, ()> = BTreeMap::new();
    let mut pending_refs = Vec::new();
    for d in &decls {
        match &d.decl {
            RawDecl::Problem { guh, id, rls, fields } => {
                let (p, refs) = loader.problem(&d.file, &d.theory, guh, id, rls, fields)?;
                if guhs.insert(p.guh.clone(), ()).is_some() {
                    return Err(err(&d.file, id.pos, format!("duplicate guh '{}'", p.guh)));
                }
                let path = p.id.clone();
                loader
                    .store
                    .problems
                    .insert(&path, p)
                    .map_err(|_| err(&d.file, id.pos, format!("problem \"{}\" is defined twice", id.text)))?;
                pending_refs.extend(refs.into_iter().map(|r| (d.file.clone(), r)));
            }
            RawDecl::Method { id, fields } => {
                let m = loader.method(&d.file, &d.theory, id, fields)?;
                let path = m.id.clone();
                loader
                    .store
                    .methods
                    .insert(&path, m)
                    .map_err(|_| err(&d.file, id.pos, format!("method \"{}\" is defined twice", id.text)))?;
            }
            _ => {}
        }
    }
    for (file, r) in pending_refs {
        loader.check_ref(&file, &r)?;
    }
    for d in &decls {
        if let RawDecl::Example { id, fields } = &d.decl {
            let f = loader.example(&d.file, id, fields)?;
            if loader.store.examples.insert(f.id.clone(), f).is_some() {
                return Err(err(&d.file, id.pos, format!("example \"{}\" is defined twice", id.text)));
            }
        }
    }
    Ok(loader.store)
}

enum Ref {
    Problem(RawStr),
    Method(RawStr),
}

fn single<'a>(file: &str, f: &'a RawField) -> Result<&'a RawStr, AuthoringError> {
    match f.values.as_slice() {
        [v] => Ok(v),
        _ => Err(err(file, f.pos, format!("field '{}' takes exactly one value", f.name))),
    }
}

fn no_variants(file: &str, f: &RawField) -> Result<(), AuthoringError> {
    if f.variants.is_some() {
        return Err(err(file, f.pos, format!("field '{}' takes no variant annotation", f.name)));
    }
    Ok(())
}

impl Loader {
    fn theory(
        &mut self,
        file: &str,
        name: &RawStr,
        imports: &Option<RawStr>,
        fields: &[RawField],
    ) -> Result<(), AuthoringError> {
        let mut th = Theory {
            id: name.text.clone(),
            imports: imports.as_ref().map(|s| s.text.clone()),
            functions: BTreeSet::new(),
            consts: Vec::new(),
        };
        for f in fields {
            no_variants(file, f)?;
            match f.name.as_str() {
                "Functions" => {
                    for v in &f.values {
                        let func = Func::from_name(v.text.trim())
                            .ok_or_else(|| err(file, v.pos, format!("unknown function '{}'", v.text)))?;
                        th.functions.insert(func);
                    }
                }
                "Consts" => {
                    for v in &f.values {
                        let c = v.text.trim();
                        let c = greek_from_ascii(c).map(String::from).unwrap_or_else(|| c.to_string());
                        th.consts.push(c);
                    }
                }
                other => return Err(err(file, f.pos, format!("unknown theory field '{other}'"))),
            }
        }
        if self.store.theories.insert(th.id.clone(), th).is_some() {
            return Err(err(file, name.pos, format!("theory \"{}\" is defined twice", name.text)));
        }
        Ok(())
    }

    fn descriptor(
        &mut self,
        file: &str,
        name: &RawStr,
        shape: &(String, SrcPos),
        typ: &Option<(String, SrcPos)>,
    ) -> Result<(), AuthoringError> {
        let arg_shape = ArgShape::from_name(&shape.0)
            .ok_or_else(|| err(file, shape.1, format!("unknown argument shape '{}'", shape.0)))?;
        let typ = match typ {
            None => Typ::Real,
            Some((t, pos)) => match t.as_str() {
                "real" => Typ::Real,
                "bool" => Typ::Bool,
                "set" => Typ::SetOfReal,
                _ => return Err(err(file, *pos, format!("unknown type '{t}'"))),
            },
        };
        if !self.store.descriptors.register(Descriptor::new(&name.text, arg_shape, typ)) {
            return Err(err(file, name.pos, format!("descriptor \"{}\" is already defined", name.text)));
        }
        Ok(())
    }

    fn parse(&self, file: &str, ctx: &TypeContext, s: &RawStr) -> Result<Term, AuthoringError> {
        parse_term(&s.text, ctx).map_err(|e| err(file, s.pos.offset(e.pos), e.msg))
    }

    /// Items `Descriptor placeholder` of one model field.
    fn pattern_items(
        &self,
        file: &str,
        ctx: &TypeContext,
        field: MField,
        f: &RawField,
        into: &mut ModelPattern,
    ) -> Result<(), AuthoringError> {
        no_variants(file, f)?;
        for v in &f.values {
            let t = self.parse(file, ctx, v)?;
            let Some((d, arg)) = t.as_descriptor_app() else {
                return Err(err(file, v.pos, "expected a descriptor followed by a placeholder"));
            };
            let Some(desc) = self.store.descriptors.get(d) else {
                return Err(err(file, v.pos, format!("unknown descriptor '{d}'")));
            };
            let Some(name) = arg.as_var() else {
                return Err(err(file, v.pos, format!("the argument of '{d}' must be a placeholder")));
            };
            if into.find_in(field, d).is_some() {
                return Err(err(file, v.pos, format!("descriptor '{d}' appears twice in {field}")));
            }
            if into.placeholders().any(|p| p == name) {
                return Err(err(file, v.pos, format!("placeholder '{name}' is used twice")));
            }
            into.items.push(PatternItem {
                field,
                descriptor: d.to_string(),
                placeholder: Term::typed_var(name, desc.typ.clone()),
                pos: v.pos,
            });
        }
        Ok(())
    }

    fn pattern_ctx(&self, theory: &str, mp: &ModelPattern) -> TypeContext {
        let mut ctx = self.store.theory_context(theory);
        for i in &mp.items {
            if let Term::Var { name, typ } = &i.placeholder {
                ctx.bindings.insert(name.clone(), typ.clone());
            }
        }
        ctx
    }

    fn problem(
        &self,
        file: &str,
        theory: &str,
        guh: &Option<String>,
        id: &RawStr,
        rls: &Option<(String, SrcPos)>,
        fields: &[RawField],
    ) -> Result<(ProblemDef, Vec<Ref>), AuthoringError> {
        let path = split_id(&id.text);
        if path.is_empty() || path.iter().any(String::is_empty) {
            return Err(err(file, id.pos, "malformed problem id"));
        }
        let ctx = self.store.theory_context(theory);
        let mut model = ModelPattern::default();
        let mut refs = Vec::new();
        let mut p = ProblemDef {
            guh: guh.clone().unwrap_or_else(|| format!("pbl_{}", path.join("_"))),
            id: path,
            theory: theory.to_string(),
            mathauthors: Vec::new(),
            start_refine: None,
            cas: None,
            solve_mets: Vec::new(),
            where_rls: "eval_rls".into(),
            where_: Vec::new(),
            model: ModelPattern::default(),
            post: None,
        };
        if let Some((name, pos)) = rls {
            if !RULE_SETS.contains(&name.as_str()) {
                return Err(err(file, *pos, format!("unknown rule set '{name}'")));
            }
            p.where_rls = name.clone();
        }
        // model fields first so Where and CAS can refer to placeholders
        for f in fields {
            if let Some(field) = MField::from_name(&f.name).filter(|m| m.name() == f.name) {
                self.pattern_items(file, &ctx, field, f, &mut model)?;
            }
        }
        let pctx = self.pattern_ctx(theory, &model);
        for f in fields {
            if MField::from_name(&f.name).is_some_and(|m| m.name() == f.name) {
                continue;
            }
            match f.name.as_str() {
                "Where" => {
                    no_variants(file, f)?;
                    for v in &f.values {
                        let t = self.parse(file, &pctx, v)?;
                        if let Some(bad) = t.vars().into_iter().find(|x| !pctx.bindings.contains_key(*x)) {
                            let pos = crate::terms::locate_ident(&v.text, bad).map_or(v.pos, |p| v.pos.offset(p));
                            return Err(err(file, pos, format!("'{bad}' in Where is not a placeholder of the model")));
                        }
                        p.where_.push(Precond { term: t, source: v.text.clone(), pos: v.pos });
                    }
                }
                "Method_Ref" => {
                    no_variants(file, f)?;
                    for v in &f.values {
                        p.solve_mets.push(split_id(&v.text));
                        refs.push(Ref::Method(v.clone()));
                    }
                }
                "Start_Refine" => {
                    let v = single(file, f)?;
                    p.start_refine = Some(split_id(&v.text));
                    refs.push(Ref::Problem(v.clone()));
                }
                "CAS" => {
                    let v = single(file, f)?;
                    let (head, args) = parse_call(&v.text, &pctx).map_err(|e| err(file, v.pos.offset(e.pos), e.msg))?;
                    let mut params = Vec::new();
                    for a in &args {
                        match a.as_var() {
                            Some(n) if model.placeholders().any(|p| p == n) => params.push(n.to_string()),
                            _ => return Err(err(file, v.pos, format!("CAS argument '{a}' is not a placeholder"))),
                        }
                    }
                    p.cas = Some(CasPattern { head, params });
                }
                "Authors" => p.mathauthors.extend(f.values.iter().map(|v| v.text.clone())),
                "Post" => p.post = Some(single(file, f)?.text.clone()),
                other => return Err(err(file, f.pos, format!("unknown problem field '{other}'"))),
            }
        }
        p.model = adapt_to_type(&pctx, &model).map_err(|e| err(file, e.pos.unwrap_or(id.pos), e.to_string()))?;
        Ok((p, refs))
    }

    fn method(&self, file: &str, theory: &str, id: &RawStr, fields: &[RawField]) -> Result<MethodDef, AuthoringError> {
        let path = split_id(&id.text);
        if path.is_empty() || path.iter().any(String::is_empty) {
            return Err(err(file, id.pos, "malformed method id"));
        }
        let ctx = self.store.theory_context(theory);
        let mut guard = ModelPattern::default();
        let mut program_ref = String::new();
        for f in fields {
            match MField::from_name(&f.name).filter(|m| m.name() == f.name) {
                Some(field) => self.pattern_items(file, &ctx, field, f, &mut guard)?,
                None if f.name == "Program" => program_ref = single(file, f)?.text.clone(),
                None => return Err(err(file, f.pos, format!("unknown method field '{}'", f.name))),
            }
        }
        if guard.items.is_empty() {
            return Err(err(file, id.pos, "a method guard needs at least one item"));
        }
        Ok(MethodDef { id: path, theory: theory.to_string(), guard, program_ref })
    }

    fn check_ref(&self, file: &str, r: &Ref) -> Result<(), AuthoringError> {
        match r {
            Ref::Problem(s) if self.store.lookup_problem(&split_id(&s.text)).is_err() => {
                Err(err(file, s.pos, format!("unknown problem \"{}\"", s.text)))
            }
            Ref::Method(s) if self.store.lookup_method(&split_id(&s.text)).is_err() => {
                Err(err(file, s.pos, format!("unknown method \"{}\"", s.text)))
            }
            _ => Ok(()),
        }
    }

    fn example(&self, file: &str, id: &RawStr, fields: &[RawField]) -> Result<Formalisation, AuthoringError> {
        let refs_field = fields
            .iter()
            .find(|f| f.name == "Refs")
            .ok_or_else(|| err(file, id.pos, format!("example \"{}\" has no Refs", id.text)))?;
        let [th, pbl, met] = refs_field.values.as_slice() else {
            return Err(err(file, refs_field.pos, "Refs takes a theory, a problem and a method"));
        };
        if !self.store.theories.contains_key(&th.text) {
            return Err(err(file, th.pos, format!("unknown theory \"{}\"", th.text)));
        }
        self.check_ref(file, &Ref::Problem(pbl.clone()))?;
        self.check_ref(file, &Ref::Method(met.clone()))?;
        let refs = References { theory: th.text.clone(), problem: split_id(&pbl.text), method: split_id(&met.text) };
        let problem = self.store.lookup_problem(&refs.problem).expect("checked");
        let method = self.store.lookup_method(&refs.method).expect("checked");
        let ctx = self.store.theory_context(&refs.theory);

        let mut text = String::new();
        let mut items = Vec::new();
        for f in fields {
            match f.name.as_str() {
                "Refs" => {}
                "Text" => text = single(file, f)?.text.clone(),
                "Item" => {
                    for v in &f.values {
                        let term = self.parse(file, &ctx, v)?;
                        let Some((d, _)) = term.as_descriptor_app() else {
                            return Err(err(file, v.pos, "an item starts with a descriptor"));
                        };
                        if problem.model.find(d).is_none() && method.guard.find(d).is_none() {
                            return Err(err(
                                file,
                                v.pos,
                                format!("descriptor '{d}' occurs in neither the problem nor the method"),
                            ));
                        }
                        items.push(FormItem {
                            text: v.text.clone(),
                            term,
                            variants: f.variants.as_ref().map(|vs| vs.iter().copied().collect()),
                        });
                    }
                }
                other => return Err(err(file, f.pos, format!("unknown example field '{other}'"))),
            }
        }
        Ok(Formalisation { id: id.text.clone(), text, items, refs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PROBLEM: &str = r#"
theory "T"
problem "a/b" =
  eval_rls
  Given: "Constants fixes"
  Where: "0 < fixes"
  Find: "Maximum maxx"
"#;

    fn load(src: &str) -> Result<Store, AuthoringError> {
        load_sources(&[("t.kb".to_string(), src.to_string())])
    }

    #[test]
    fn empty_file_gives_empty_store() {
        let s = load("").unwrap();
        assert!(s.examples.is_empty() && s.theories.is_empty());
        assert!(s.problems.iter().is_empty());
    }

    #[test]
    fn loads_a_problem() {
        let s = load(PROBLEM).unwrap();
        let p = s.lookup_problem(&split_id("a/b")).unwrap();
        assert_eq!(p.guh, "pbl_a_b");
        assert_eq!(p.model.items.len(), 2);
        assert_eq!(p.where_[0].source, "0 < fixes");
    }

    #[test]
    fn where_placeholder_must_be_in_model() {
        let src = PROBLEM.replace("0 < fixes", "0 < bound");
        let e = load(&src).unwrap_err();
        assert!(e.msg.contains("'bound'"), "{e}");
        assert_eq!((e.pos.line, e.pos.col), (6, 15));
    }

    #[test]
    fn duplicate_guh_is_rejected() {
        let src = "problem g : \"a\" =\n Given: \"Maximum m\"\nproblem g : \"b\" =\n Given: \"Maximum m\"";
        assert!(load(src).unwrap_err().msg.contains("duplicate guh"));
    }

    #[test]
    fn unresolved_refs_are_rejected() {
        let src = format!("{PROBLEM}  Method_Ref: \"no/such\"");
        let e = load(&src).unwrap_err();
        assert!(e.msg.contains("unknown method"), "{e}");
    }

    #[test]
    fn syntax_errors_point_into_the_file() {
        let src = PROBLEM.replace("Maximum maxx", "Maximum (maxx");
        let e = load(&src).unwrap_err();
        assert_eq!(e.pos.line, 7);
        assert!(e.pos.col > 9);
    }

    #[test]
    fn unknown_descriptor_in_pattern() {
        let e = load("problem \"p\" =\n  Given: \"Bogus x\"").unwrap_err();
        assert!(e.msg.contains("unknown descriptor"));
    }

    #[test]
    fn example_items_must_match_pattern_descriptors() {
        let src = format!(
            "{PROBLEM}\nmethod \"m\" =\n  Given: \"Constants fixes\"\nexample \"e\" =\n  Item: \"Domain {{0 <..< 1}}\"\n  Refs: \"T\" \"a/b\" \"m\""
        );
        let e = load(&src).unwrap_err();
        assert!(e.msg.contains("neither"), "{e}");
    }
}
