use std::collections::{BTreeMap, BTreeSet};

use tree_sitter::{Node, Tree};

use super::syntax::{erase_type, named_children, text};
use super::{
    callable_key, python_module_name, BodyShape, CallSite, Callable, CallableKind, CodeUnit, FieldDecl, Import,
    Language, Param, Span, TypeDecl, TypeKind, TypeRef, Visibility,
};

pub(crate) fn extract(path: &str, src: &str, tree: &Tree) -> CodeUnit {
    let module = python_module_name(path);
    let is_package_init = path.ends_with("__init__.py");
    let root = tree.root_node();

    let mut imports = Vec::new();
    for child in named_children(root) {
        match child.kind() {
            "import_statement" => {
                for item in named_children(child) {
                    match item.kind() {
                        "dotted_name" => imports.push(Import::simple(text(item, src))),
                        "aliased_import" => {
                            let name = item.child_by_field_name("name").map(|n| text(n, src)).unwrap_or_default();
                            let alias = item.child_by_field_name("alias").map(|n| text(n, src).to_string());
                            imports.push(Import { alias, ..Import::simple(name) });
                        }
                        _ => {}
                    }
                }
            }
            "import_from_statement" => {
                let Some(module_node) = child.child_by_field_name("module_name") else { continue };
                let base = absolute_module(text(module_node, src), &module, is_package_init);
                if named_children(child).iter().any(|n| n.kind() == "wildcard_import") {
                    imports.push(Import { is_wildcard: true, ..Import::simple(&base) });
                }
                let mut cursor = child.walk();
                for item in child.children_by_field_name("name", &mut cursor) {
                    let (name, alias) = match item.kind() {
                        "aliased_import" => (
                            item.child_by_field_name("name").map(|n| text(n, src)).unwrap_or_default(),
                            item.child_by_field_name("alias").map(|n| text(n, src).to_string()),
                        ),
                        _ => (text(item, src), None),
                    };
                    let full = if base.is_empty() { name.to_string() } else { format!("{base}.{name}") };
                    imports.push(Import { alias, ..Import::simple(&full) });
                }
            }
            _ => {}
        }
    }

    let mut known_classes: BTreeSet<String> = BTreeSet::new();
    collect_class_names(root, src, &mut known_classes);
    let mut x = Extractor { src, module: module.clone(), types: Vec::new(), known_classes };
    let mut functions = Vec::new();
    for child in named_children(root) {
        let (def, decorators) = unwrap_decorated(child, src);
        match def.kind() {
            "class_definition" => x.class(def, None, decorators),
            "function_definition" => functions.push(x.function(def, None, decorators, &BTreeMap::new())),
            _ => {}
        }
    }
    CodeUnit {
        path: path.to_string(),
        language: Language::Python,
        namespace: Some(module),
        imports,
        types: x.types,
        functions,
        source_text: src.to_string(),
    }
}

/// Turn `.shapes` / `..pkg` into an absolute dotted module path.
fn absolute_module(written: &str, current: &str, is_package_init: bool) -> String {
    let dots = written.chars().take_while(|c| *c == '.').count();
    if dots == 0 {
        return written.to_string();
    }
    let rest = &written[dots..];
    let mut parts: Vec<&str> = current.split('.').filter(|p| !p.is_empty()).collect();
    let pops = if is_package_init { dots - 1 } else { dots };
    for _ in 0..pops {
        parts.pop();
    }
    if !rest.is_empty() {
        parts.push(rest);
    }
    parts.join(".")
}

fn collect_class_names(node: Node<'_>, src: &str, out: &mut BTreeSet<String>) {
    for child in named_children(node) {
        let (def, _) = unwrap_decorated(child, src);
        if def.kind() == "class_definition" {
            if let Some(name) = def.child_by_field_name("name") {
                out.insert(text(name, src).to_string());
            }
            if let Some(body) = def.child_by_field_name("body") {
                collect_class_names(body, src, out);
            }
        }
    }
}

fn unwrap_decorated<'t>(node: Node<'t>, src: &str) -> (Node<'t>, Vec<String>) {
    if node.kind() != "decorated_definition" {
        return (node, Vec::new());
    }
    let decorators = named_children(node)
        .into_iter()
        .filter(|c| c.kind() == "decorator")
        .map(|d| {
            let t = text(d, src).trim_start_matches('@').trim();
            t.split('(').next().unwrap_or(t).trim().to_string()
        })
        .collect();
    let def = node.child_by_field_name("definition").unwrap_or(node);
    (def, decorators)
}

fn annotation_ref(node: Node<'_>, src: &str) -> TypeRef {
    let raw = text(node, src).trim_matches(|c| c == '"' || c == '\'');
    let (name, _) = erase_type(&raw.replace('[', "<").replace(']', ">"));
    let name = name.trim_start_matches("Optional").to_string();
    TypeRef::written(&name, 0, Language::Python)
}

fn untyped() -> TypeRef {
    TypeRef::written("", 0, Language::Python)
}

struct Extractor<'s> {
    src: &'s str,
    module: String,
    types: Vec<TypeDecl>,
    known_classes: BTreeSet<String>,
}

impl<'s> Extractor<'s> {
    fn class(&mut self, node: Node<'_>, enclosing: Option<&str>, decorators: Vec<String>) {
        let src = self.src;
        let Some(name_node) = node.child_by_field_name("name") else { return };
        let name = text(name_node, src).to_string();
        let qname = match enclosing {
            Some(outer) => format!("{outer}.{name}"),
            None => format!("{}.{name}", self.module),
        };
        let mut bases = Vec::new();
        let mut abstract_meta = false;
        if let Some(args) = node.child_by_field_name("superclasses") {
            for arg in named_children(args) {
                match arg.kind() {
                    "identifier" | "attribute" => bases.push(TypeRef::written(text(arg, src), 0, Language::Python)),
                    "keyword_argument" => abstract_meta |= text(arg, src).contains("ABCMeta"),
                    _ => {}
                }
            }
        }
        let idx = self.types.len();
        self.types.push(TypeDecl {
            qualified_name: qname.clone(),
            simple_name: name.clone(),
            kind: TypeKind::Class,
            superclass: None,
            interfaces: Vec::new(),
            fields: Vec::new(),
            callables: Vec::new(),
            visibility: Visibility::from_python_name(&name),
            annotations: decorators,
            is_anonymous: false,
            enclosing: enclosing.map(str::to_string),
            span: Span::of(&node),
        });

        let mut fields: Vec<FieldDecl> = Vec::new();
        let mut callables = Vec::new();
        let mut defs = Vec::new();
        if let Some(body) = node.child_by_field_name("body") {
            for stmt in named_children(body) {
                let (def, decorators) = unwrap_decorated(stmt, src);
                match def.kind() {
                    "function_definition" => defs.push((def, decorators)),
                    "class_definition" => self.class(def, Some(&qname), decorators),
                    "expression_statement" => {
                        for assign in named_children(def).into_iter().filter(|a| a.kind() == "assignment") {
                            if let Some(left) = assign.child_by_field_name("left").filter(|l| l.kind() == "identifier")
                            {
                                let ty = assign.child_by_field_name("type").map(|t| annotation_ref(t, src));
                                push_field(&mut fields, text(left, src), ty.unwrap_or_else(untyped), &qname, false);
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        // instance attributes assigned in __init__
        for (def, _) in &defs {
            if def.child_by_field_name("name").map(|n| text(n, src)) == Some("__init__") {
                let param_types: BTreeMap<String, TypeRef> = self
                    .params(*def, true)
                    .into_iter()
                    .map(|p| (p.name, p.ty))
                    .collect();
                if let Some(body) = def.child_by_field_name("body") {
                    self.self_assignments(body, &param_types, &qname, &mut fields);
                }
            }
        }
        let field_types: BTreeMap<String, TypeRef> =
            fields.iter().map(|f| (f.name.clone(), f.declared_type.clone())).collect();
        for (def, decorators) in defs {
            callables.push(self.function(def, Some(&qname), decorators, &field_types));
        }
        let is_abstract = abstract_meta
            || bases.iter().any(|b| b.written == "ABC" || b.written == "abc.ABC")
            || callables.iter().any(|c: &Callable| c.is_abstract);
        let decl = &mut self.types[idx];
        if is_abstract {
            decl.kind = TypeKind::AbstractClass;
        }
        let mut bases = bases.into_iter().filter(|b| b.written != "object");
        decl.superclass = bases.next();
        decl.interfaces = bases.collect();
        decl.fields = fields;
        decl.callables = callables;
    }

    fn self_assignments(
        &self,
        node: Node<'_>,
        params: &BTreeMap<String, TypeRef>,
        owner: &str,
        fields: &mut Vec<FieldDecl>,
    ) {
        let src = self.src;
        for child in named_children(node) {
            if child.kind() == "assignment" {
                let target = child.child_by_field_name("left").filter(|l| l.kind() == "attribute");
                if let Some(target) = target {
                    let is_self = target.child_by_field_name("object").map(|o| text(o, src)) == Some("self");
                    if let (true, Some(attr)) = (is_self, target.child_by_field_name("attribute")) {
                        let ty = child
                            .child_by_field_name("type")
                            .map(|t| annotation_ref(t, src))
                            .or_else(|| {
                                let right = child.child_by_field_name("right")?;
                                self.value_type(right, params)
                            })
                            .unwrap_or_else(untyped);
                        push_field(fields, text(attr, src), ty, owner, false);
                    }
                }
            }
            if !matches!(child.kind(), "function_definition" | "class_definition" | "lambda") {
                self.self_assignments(child, params, owner, fields);
            }
        }
    }

    fn value_type(&self, value: Node<'_>, scope: &BTreeMap<String, TypeRef>) -> Option<TypeRef> {
        let src = self.src;
        match value.kind() {
            "identifier" => scope.get(text(value, src)).cloned(),
            "call" => {
                let func = value.child_by_field_name("function")?;
                let name = text(func, src);
                let simple = super::simple_name(name);
                (self.known_classes.contains(simple) || simple.starts_with(|c: char| c.is_ascii_uppercase()))
                    .then(|| TypeRef::written(name, 0, Language::Python))
            }
            _ => None,
        }
    }

    fn params(&self, def: Node<'_>, drop_receiver: bool) -> Vec<Param> {
        let src = self.src;
        let Some(params) = def.child_by_field_name("parameters") else { return Vec::new() };
        let mut out = Vec::new();
        for p in named_children(params) {
            let (name, ty) = match p.kind() {
                "identifier" => (text(p, src).to_string(), untyped()),
                "typed_parameter" => {
                    let name = named_children(p)
                        .into_iter()
                        .find(|c| c.kind() == "identifier")
                        .map(|n| text(n, src).to_string());
                    let Some(name) = name else { continue };
                    let ty = p.child_by_field_name("type").map(|t| annotation_ref(t, src)).unwrap_or_else(untyped);
                    (name, ty)
                }
                "default_parameter" | "typed_default_parameter" => {
                    let Some(name) = p.child_by_field_name("name") else { continue };
                    let ty = p.child_by_field_name("type").map(|t| annotation_ref(t, src)).unwrap_or_else(untyped);
                    (text(name, src).to_string(), ty)
                }
                _ => continue,
            };
            out.push(Param { name, ty });
        }
        if drop_receiver && out.first().is_some_and(|p| p.name == "self" || p.name == "cls") {
            out.remove(0);
        }
        out
    }

    fn function(
        &mut self,
        node: Node<'_>,
        owner: Option<&str>,
        decorators: Vec<String>,
        fields: &BTreeMap<String, TypeRef>,
    ) -> Callable {
        let src = self.src;
        let name = node.child_by_field_name("name").map(|n| text(n, src).to_string()).unwrap_or_default();
        let is_static = decorators.iter().any(|d| d == "staticmethod" || d == "classmethod");
        let in_class = owner.is_some();
        let params = self.params(node, in_class && !decorators.iter().any(|d| d == "staticmethod"));
        let kind = match (in_class, name.as_str()) {
            (true, "__init__") => CallableKind::Constructor,
            (true, _) => CallableKind::Method,
            (false, _) => CallableKind::Function,
        };
        let return_type = match kind {
            CallableKind::Constructor => None,
            _ => Some(node.child_by_field_name("return_type").map(|t| annotation_ref(t, src)).unwrap_or_else(untyped)),
        };
        let is_abstract = decorators.iter().any(|d| d.ends_with("abstractmethod"));
        let key = callable_key(owner, &name, &params);
        let body = node.child_by_field_name("body");
        let mut call_sites = Vec::new();
        let mut body_shape = BodyShape::Absent;
        if let Some(body) = body {
            let mut locals: BTreeMap<String, TypeRef> = params
                .iter()
                .filter(|p| !p.ty.written.is_empty())
                .map(|p| (p.name.clone(), p.ty.clone()))
                .collect();
            self.collect_locals(body, &mut locals);
            self.walk_calls(body, &key, &locals, fields, &mut call_sites);
            body_shape = body_shape_of(body, src);
        }
        Callable {
            visibility: Visibility::from_python_name(&name),
            name,
            owner: owner.map(str::to_string),
            kind,
            is_static,
            is_abstract,
            params,
            return_type,
            annotations: decorators,
            throws: Vec::new(),
            call_sites,
            span: Span::of(&node),
            body_span: body.map(|b| Span::of(&b)),
            body_shape,
        }
    }

    fn collect_locals(&self, node: Node<'_>, locals: &mut BTreeMap<String, TypeRef>) {
        let src = self.src;
        if node.kind() == "assignment" {
            if let Some(left) = node.child_by_field_name("left").filter(|l| l.kind() == "identifier") {
                let ty = node.child_by_field_name("type").map(|t| annotation_ref(t, src)).or_else(|| {
                    let right = node.child_by_field_name("right")?;
                    self.value_type(right, locals)
                });
                if let Some(ty) = ty {
                    locals.insert(text(left, src).to_string(), ty);
                }
            }
        }
        if matches!(node.kind(), "class_definition") {
            return;
        }
        for child in named_children(node) {
            self.collect_locals(child, locals);
        }
    }

    fn walk_calls(
        &self,
        node: Node<'_>,
        key: &str,
        locals: &BTreeMap<String, TypeRef>,
        fields: &BTreeMap<String, TypeRef>,
        out: &mut Vec<CallSite>,
    ) {
        if node.kind() == "class_definition" {
            return;
        }
        if node.kind() == "call" {
            if let Some(cs) = self.call(node, key, locals, fields) {
                out.push(cs);
            }
        }
        for child in named_children(node) {
            self.walk_calls(child, key, locals, fields, out);
        }
    }

    fn call(
        &self,
        node: Node<'_>,
        key: &str,
        locals: &BTreeMap<String, TypeRef>,
        fields: &BTreeMap<String, TypeRef>,
    ) -> Option<CallSite> {
        let src = self.src;
        let func = node.child_by_field_name("function")?;
        let arg_count = node
            .child_by_field_name("arguments")
            .map(|a| match a.kind() {
                "argument_list" => named_children(a).into_iter().filter(|c| c.kind() != "comment").count(),
                _ => 1,
            })
            .unwrap_or(0);
        let mut cs = CallSite {
            callee_name: String::new(),
            receiver: None,
            receiver_type: None,
            target_type: None,
            is_constructor_call: false,
            is_static_call: false,
            arg_count,
            enclosing: key.to_string(),
            span: Span::of(&node),
        };
        let is_class_name = |n: &str| self.known_classes.contains(n) || n.starts_with(|c: char| c.is_ascii_uppercase());
        match func.kind() {
            "identifier" => {
                let name = text(func, src);
                cs.callee_name = name.to_string();
                if is_class_name(name) {
                    cs.is_constructor_call = true;
                    cs.target_type = Some(TypeRef::written(name, 0, Language::Python));
                }
            }
            "attribute" => {
                let object = func.child_by_field_name("object")?;
                let attr = text(func.child_by_field_name("attribute")?, src);
                let obj_text = text(object, src);
                cs.callee_name = attr.to_string();
                cs.receiver = Some(obj_text.to_string());
                if attr.starts_with(|c: char| c.is_ascii_uppercase()) {
                    cs.is_constructor_call = true;
                    cs.target_type = Some(TypeRef::written(text(func, src), 0, Language::Python));
                } else if matches!(obj_text, "self" | "cls") {
                } else if object.kind() == "identifier" {
                    if let Some(t) = locals.get(obj_text) {
                        cs.receiver_type = Some(t.clone());
                    } else if is_class_name(obj_text) {
                        cs.is_static_call = true;
                        cs.target_type = Some(TypeRef::written(obj_text, 0, Language::Python));
                    }
                } else if object.kind() == "attribute" {
                    let inner = object.child_by_field_name("object").map(|o| text(o, src));
                    let field = object.child_by_field_name("attribute").map(|a| text(a, src));
                    if let (Some("self"), Some(field)) = (inner, field) {
                        cs.receiver_type = fields.get(field).filter(|t| !t.written.is_empty()).cloned();
                    }
                }
            }
            _ => return None,
        }
        Some(cs)
    }
}

fn push_field(fields: &mut Vec<FieldDecl>, name: &str, ty: TypeRef, owner: &str, is_static: bool) {
    if let Some(existing) = fields.iter_mut().find(|f| f.name == name) {
        if existing.declared_type.written.is_empty() {
            existing.declared_type = ty;
        }
        return;
    }
    fields.push(FieldDecl {
        name: name.to_string(),
        declared_type: ty,
        owner: owner.to_string(),
        visibility: Visibility::from_python_name(name),
        is_static,
    });
}

fn body_shape_of(body: Node<'_>, src: &str) -> BodyShape {
    let stmts: Vec<Node<'_>> = named_children(body)
        .into_iter()
        .filter(|c| c.kind() != "comment" && c.kind() != "pass_statement")
        .filter(|c| {
            // docstrings
            !(c.kind() == "expression_statement" && named_children(*c).first().is_some_and(|e| e.kind() == "string"))
        })
        .collect();
    let self_attr = |n: Node<'_>| -> Option<String> {
        match n.kind() {
            "attribute" if n.child_by_field_name("object").map(|o| text(o, src)) == Some("self") => {
                n.child_by_field_name("attribute").map(|a| text(a, src).to_string())
            }
            _ => None,
        }
    };
    match stmts.as_slice() {
        [] => BodyShape::Empty,
        [stmt] if stmt.kind() == "return_statement" => named_children(*stmt)
            .into_iter()
            .next()
            .and_then(self_attr)
            .map(BodyShape::ReturnsName)
            .unwrap_or(BodyShape::Other),
        [stmt] if stmt.kind() == "expression_statement" => {
            let Some(assign) = named_children(*stmt).into_iter().find(|a| a.kind() == "assignment") else {
                return BodyShape::Other;
            };
            let target = assign.child_by_field_name("left").and_then(self_attr);
            let value = assign
                .child_by_field_name("right")
                .filter(|r| r.kind() == "identifier")
                .map(|r| text(r, src).to_string());
            match (target, value) {
                (Some(target), Some(value)) => BodyShape::AssignsName { target, value },
                _ => BodyShape::Other,
            }
        }
        _ => BodyShape::Other,
    }
}
