use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use super::TypeAllowlist;
use crate::code_model::{
    build_class_call_graph, BodyShape, Callable, CodeModel, Language, TypeDecl, TypeKind, TypeRef, Visibility,
};

/// One method selected for test generation.
#[derive(Debug, Clone, Copy)]
pub struct FocalTarget<'m> {
    pub focal_method: &'m Callable,
    pub focal_class: &'m TypeDecl,
    pub inherited_from_abstract: bool,
}

impl FocalTarget<'_> {
    /// `pkg.Class#method(T1,T2)`, with the focal class as owner even for
    /// inherited methods.
    pub fn id(&self) -> String {
        let key = self.focal_method.key();
        let local = key.split_once('#').map(|(_, rest)| rest).unwrap_or(&key);
        format!("{}#{local}", self.focal_class.qualified_name)
    }
}

fn override_key(c: &Callable) -> (String, Vec<String>) {
    (c.name.clone(), c.params.iter().map(|p| p.ty.display()).collect())
}

fn is_visible(c: &Callable) -> bool {
    matches!(c.visibility, Visibility::Public | Visibility::Protected | Visibility::Package)
}

/// Methods of `focal_class` to generate tests for.
///
/// Abstract classes and interfaces contribute only their non-private static
/// methods. Concrete classes contribute their visible declared methods plus
/// implementations inherited through a chain of abstract superclasses.
pub fn compute_testing_scope<'m>(focal_class: &'m TypeDecl, model: &'m CodeModel) -> Vec<FocalTarget<'m>> {
    let target = |m: &'m Callable, inherited| FocalTarget { focal_method: m, focal_class, inherited_from_abstract: inherited };
    if focal_class.is_abstract() || focal_class.kind == TypeKind::Interface {
        return focal_class
            .methods()
            .filter(|m| m.is_static && !m.visibility.is_private())
            .map(|m| target(m, false))
            .collect();
    }
    let mut out: Vec<FocalTarget<'m>> = focal_class.methods().filter(|m| is_visible(m)).map(|m| target(m, false)).collect();
    let mut seen: BTreeSet<_> = focal_class.methods().map(override_key).collect();
    let mut visited = BTreeSet::new();
    let mut next = focal_class.superclass.as_ref().and_then(|s| model.decl_of(s));
    while let Some(sup) = next {
        if sup.kind != TypeKind::AbstractClass || !visited.insert(sup.qualified_name.as_str()) {
            break;
        }
        for m in sup.methods() {
            if m.is_abstract || m.is_static || !is_visible(m) {
                continue;
            }
            if seen.insert(override_key(m)) {
                out.push(target(m, true));
            }
        }
        next = sup.superclass.as_ref().and_then(|s| model.decl_of(s));
    }
    out
}

/// A constructor usable from a test, possibly the implicit default one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstructorSig {
    pub owner: String,
    pub key: String,
    pub signature: String,
    pub param_types: Vec<TypeRef>,
    pub implicit: bool,
}

impl ConstructorSig {
    fn declared(c: &Callable, language: Language) -> Self {
        ConstructorSig {
            owner: c.owner.clone().unwrap_or_default(),
            key: c.key(),
            signature: c.signature_for(language),
            param_types: c.params.iter().map(|p| p.ty.clone()).collect(),
            implicit: false,
        }
    }

    fn implicit_default(decl: &TypeDecl, language: Language) -> Self {
        let signature = match language {
            Language::Java => format!("public {}()", decl.simple_name),
            Language::Python => format!("{}()", decl.simple_name),
        };
        ConstructorSig {
            owner: decl.qualified_name.clone(),
            key: format!("{}#{}()", decl.qualified_name, decl.simple_name),
            signature,
            param_types: Vec::new(),
            implicit: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConstructorOptions {
    /// Maximum number of constructor hops from the seed types; `None`
    /// follows parameter types until no new type appears.
    pub max_depth: Option<usize>,
}

/// Constructors a test can call to instantiate `decl`.
pub(crate) fn usable_constructors(decl: &TypeDecl, language: Language) -> Vec<ConstructorSig> {
    if decl.kind != TypeKind::Class || decl.is_anonymous {
        return Vec::new();
    }
    let declared: Vec<&Callable> = decl.constructors().collect();
    if declared.is_empty() {
        return vec![ConstructorSig::implicit_default(decl, language)];
    }
    declared
        .into_iter()
        .filter(|c| !c.visibility.is_private())
        .map(|c| ConstructorSig::declared(c, language))
        .collect()
}

fn language_of(model: &CodeModel, decl: &TypeDecl) -> Language {
    model.unit_of_type(&decl.qualified_name).map(|u| u.language).unwrap_or(Language::Java)
}

/// Constructors of the application types in `seeds`, closed over the
/// application-typed parameters of every constructor found.
pub fn constructor_closure(seeds: &[TypeRef], model: &CodeModel, options: ConstructorOptions) -> Vec<ConstructorSig> {
    let mut out: Vec<ConstructorSig> = Vec::new();
    let mut keys = BTreeSet::new();
    let mut visited = BTreeSet::new();
    let mut queue: VecDeque<(&str, usize)> = VecDeque::new();
    for s in seeds.iter().filter(|s| s.is_application()) {
        if visited.insert(s.qualified_name.as_str()) {
            queue.push_back((s.qualified_name.as_str(), 0));
        }
    }
    while let Some((name, depth)) = queue.pop_front() {
        let Some(decl) = model.type_decl(name) else { continue };
        let language = language_of(model, decl);
        for sig in usable_constructors(decl, language) {
            if !keys.insert(sig.key.clone()) {
                continue;
            }
            if options.max_depth.is_none_or(|max| depth < max) {
                for p in sig.param_types.iter().filter(|p| p.is_application()) {
                    if let Some(d) = model.type_decl(&p.qualified_name) {
                        if visited.insert(d.qualified_name.as_str()) {
                            queue.push_back((d.qualified_name.as_str(), depth + 1));
                        }
                    }
                }
            }
            out.push(sig);
        }
    }
    out
}

/// Constructors needed to build the receiver (for instance methods) and the
/// application-typed arguments of the focal method, transitively.
pub fn collect_relevant_constructors(
    target: &FocalTarget<'_>,
    model: &CodeModel,
    options: ConstructorOptions,
) -> Vec<ConstructorSig> {
    let mut seeds = Vec::new();
    if !target.focal_method.is_static {
        seeds.push(TypeRef::qualified(&target.focal_class.qualified_name, crate::code_model::TypeClass::Application));
    }
    seeds.extend(target.focal_method.params.iter().map(|p| p.ty.clone()));
    constructor_closure(&seeds, model, options)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Accessor {
    Getter,
    Setter,
}

fn accessor_by_name(c: &Callable) -> Option<Accessor> {
    let prefixed = |p: &str| {
        c.name
            .strip_prefix(p)
            .and_then(|rest| rest.chars().next())
            .is_some_and(|ch| ch.is_uppercase() || ch == '_')
    };
    let returns = c.return_type.as_ref().is_some_and(|r| !r.is_void() && !r.written.is_empty());
    if prefixed("get") && c.arity() == 0 && returns {
        Some(Accessor::Getter)
    } else if prefixed("is")
        && c.arity() == 0
        && c.return_type.as_ref().is_some_and(|r| matches!(r.written.as_str(), "boolean" | "Boolean"))
    {
        Some(Accessor::Getter)
    } else if prefixed("set") && c.arity() == 1 {
        Some(Accessor::Setter)
    } else {
        None
    }
}

fn accessor_by_body(c: &Callable, owner: &TypeDecl) -> Option<Accessor> {
    match &c.body_shape {
        BodyShape::ReturnsName(f) if c.arity() == 0 && owner.field(f).is_some() => Some(Accessor::Getter),
        BodyShape::AssignsName { target, value }
            if c.arity() == 1 && c.params[0].name == *value && owner.field(target).is_some() =>
        {
            Some(Accessor::Setter)
        }
        _ => None,
    }
}

fn accessor_kind(c: &Callable, owner: &TypeDecl) -> Option<Accessor> {
    if c.is_constructor() || c.is_static || c.visibility.is_private() {
        return None;
    }
    accessor_by_name(c).or_else(|| accessor_by_body(c, owner))
}

#[derive(Debug, Clone, Default)]
pub struct AuxiliaryMethods<'m> {
    pub setters: Vec<&'m Callable>,
    pub getters: Vec<&'m Callable>,
}

/// Setters of the focal class and of application-typed parameter types;
/// getters of the focal class and of an application return type.
pub fn collect_auxiliary_methods<'m>(target: &FocalTarget<'m>, model: &'m CodeModel) -> AuxiliaryMethods<'m> {
    let mut setter_types: Vec<&'m TypeDecl> = vec![target.focal_class];
    for p in target.focal_method.params.iter().filter(|p| p.ty.is_application()) {
        if let Some(d) = model.decl_of(&p.ty) {
            if !setter_types.iter().any(|t| t.qualified_name == d.qualified_name) {
                setter_types.push(d);
            }
        }
    }
    let mut getter_types: Vec<&'m TypeDecl> = vec![target.focal_class];
    if let Some(d) = target.focal_method.return_type.as_ref().filter(|r| r.is_application()).and_then(|r| model.decl_of(r)) {
        if d.qualified_name != target.focal_class.qualified_name {
            getter_types.push(d);
        }
    }
    let pick = |types: &[&'m TypeDecl], want: Accessor| -> Vec<&'m Callable> {
        types
            .iter()
            .flat_map(|t| t.methods().filter(move |m| accessor_kind(m, t) == Some(want)))
            .filter(|m| !std::ptr::eq(*m, target.focal_method))
            .collect()
    };
    AuxiliaryMethods {
        setters: pick(&setter_types, Accessor::Setter),
        getters: pick(&getter_types, Accessor::Getter),
    }
}

/// Path from a non-private member to a private method of the same class.
#[derive(Debug, Clone)]
pub struct CallChain<'m> {
    pub entry: &'m Callable,
    /// Starts at `entry`, ends at the private method.
    pub path: Vec<&'m Callable>,
}

impl CallChain<'_> {
    pub fn render(&self) -> String {
        self.path.iter().map(|c| c.signature()).collect::<Vec<_>>().join(" -> ")
    }
}

/// One shortest chain per (non-private entry, reachable private method) pair.
pub fn find_private_call_chains(focal_class: &TypeDecl) -> Vec<CallChain<'_>> {
    let graph = build_class_call_graph(focal_class);
    let members = &focal_class.callables;
    let mut out = Vec::new();
    for (entry, callable) in members.iter().enumerate() {
        if callable.visibility.is_private() {
            continue;
        }
        for target in graph.reachable_from(entry) {
            if !members[target].visibility.is_private() {
                continue;
            }
            if let Some(path) = graph.shortest_path(entry, target) {
                out.push(CallChain { entry: callable, path: path.into_iter().map(|i| &members[i]).collect() });
            }
        }
    }
    out
}

fn supertypes_closure<'m>(decl: &'m TypeDecl, model: &'m CodeModel) -> Vec<&'m TypeRef> {
    let mut out = Vec::new();
    let mut visited = BTreeSet::new();
    let mut stack: Vec<&'m TypeDecl> = vec![decl];
    while let Some(d) = stack.pop() {
        if !visited.insert(d.qualified_name.as_str()) {
            continue;
        }
        for s in d.supertypes() {
            out.push(s);
            if let Some(sd) = model.decl_of(s) {
                stack.push(sd);
            }
        }
    }
    out
}

/// `decl` extends or implements, directly or transitively, a listed type.
pub fn is_service_entry_class(decl: &TypeDecl, model: &CodeModel, service_entries: &TypeAllowlist) -> bool {
    supertypes_closure(decl, model).into_iter().any(|s| service_entries.contains(s))
}

/// `method` is marked `@Override` or a supertype in the model declares a
/// method with the same name and arity.
pub fn is_overridden(method: &Callable, decl: &TypeDecl, model: &CodeModel) -> bool {
    if method.is_constructor() || method.is_static || method.visibility.is_private() {
        return false;
    }
    if method.has_annotation("Override") {
        return true;
    }
    supertypes_closure(decl, model)
        .into_iter()
        .filter_map(|s| model.decl_of(s))
        .any(|sd| sd.methods().any(|m| m.name == method.name && m.arity() == method.arity()))
}
