use std::collections::{BTreeMap, HashMap};

use tree_sitter::{Node, Tree};

use super::syntax::{erase_type, named_children, text};
use super::{
    callable_key, BodyShape, CallSite, Callable, CallableKind, CodeUnit, FieldDecl, Import, Language, Param,
    Span, TypeDecl, TypeKind, TypeRef, Visibility,
};

const TYPE_DECLS: &[&str] = &[
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
    "record_declaration",
    "annotation_type_declaration",
];

pub(crate) fn extract(path: &str, src: &str, tree: &Tree) -> CodeUnit {
    let mut x = Extractor {
        src,
        package: None,
        static_members: BTreeMap::new(),
        types: Vec::new(),
        anon_counters: HashMap::new(),
    };
    let mut imports = Vec::new();
    let root = tree.root_node();
    for child in named_children(root) {
        match child.kind() {
            "package_declaration" => {
                x.package = named_children(child)
                    .into_iter()
                    .find(|n| matches!(n.kind(), "scoped_identifier" | "identifier"))
                    .map(|n| text(n, src).to_string());
            }
            "import_declaration" => {
                let import = parse_import(child, src);
                if import.is_static && !import.is_wildcard {
                    if let Some((class, member)) = import.name.rsplit_once('.') {
                        x.static_members.insert(member.to_string(), class.to_string());
                    }
                }
                imports.push(import);
            }
            _ => {}
        }
    }
    for child in named_children(root) {
        if TYPE_DECLS.contains(&child.kind()) {
            x.type_decl(child, None);
        }
    }
    CodeUnit {
        path: path.to_string(),
        language: Language::Java,
        namespace: x.package,
        imports,
        types: x.types,
        functions: Vec::new(),
        source_text: src.to_string(),
    }
}

fn parse_import(node: Node<'_>, src: &str) -> Import {
    let mut is_static = false;
    let mut is_wildcard = false;
    let mut name = String::new();
    let mut cursor = node.walk();
    for child in node.children(&mut cursor) {
        match child.kind() {
            "static" => is_static = true,
            "asterisk" => is_wildcard = true,
            "scoped_identifier" | "identifier" => name = text(child, src).to_string(),
            _ => {}
        }
    }
    Import { name, is_static, is_wildcard, alias: None }
}

#[derive(Default)]
struct Modifiers {
    keywords: Vec<String>,
    annotations: Vec<String>,
}

impl Modifiers {
    fn has(&self, kw: &str) -> bool {
        self.keywords.iter().any(|k| k == kw)
    }

    fn visibility(&self, default: Visibility) -> Visibility {
        if self.has("public") {
            Visibility::Public
        } else if self.has("protected") {
            Visibility::Protected
        } else if self.has("private") {
            Visibility::Private
        } else {
            default
        }
    }
}

fn modifiers_of(node: Node<'_>, src: &str) -> Modifiers {
    let mut m = Modifiers::default();
    let Some(mods) = named_children(node).into_iter().find(|n| n.kind() == "modifiers") else {
        return m;
    };
    let mut cursor = mods.walk();
    for child in mods.children(&mut cursor) {
        match child.kind() {
            "marker_annotation" | "annotation" => {
                if let Some(name) = child.child_by_field_name("name") {
                    m.annotations.push(text(name, src).to_string());
                }
            }
            _ if !child.is_named() => m.keywords.push(text(child, src).to_string()),
            _ => {}
        }
    }
    m
}

fn type_ref(node: Node<'_>, src: &str, extra_dims: u8) -> TypeRef {
    let (name, dims) = erase_type(text(node, src));
    TypeRef::written(&name, dims + extra_dims, Language::Java)
}

fn dims_of(node: Node<'_>, src: &str) -> u8 {
    node.child_by_field_name("dimensions")
        .map(|d| text(d, src).matches('[').count() as u8)
        .unwrap_or(0)
}

struct BodyCtx<'a> {
    owner: &'a str,
    enclosing_key: String,
    locals: BTreeMap<String, TypeRef>,
    fields: &'a BTreeMap<String, TypeRef>,
}

struct Extractor<'s> {
    src: &'s str,
    package: Option<String>,
    static_members: BTreeMap<String, String>,
    types: Vec<TypeDecl>,
    anon_counters: HashMap<String, usize>,
}

impl<'s> Extractor<'s> {
    fn type_decl(&mut self, node: Node<'_>, enclosing: Option<&str>) {
        let src = self.src;
        let Some(name_node) = node.child_by_field_name("name") else {
            return;
        };
        let name = text(name_node, src).to_string();
        let qname = match (enclosing, &self.package) {
            (Some(outer), _) => format!("{outer}${name}"),
            (None, Some(pkg)) => format!("{pkg}.{name}"),
            (None, None) => name.clone(),
        };
        let mods = modifiers_of(node, src);
        let kind = match node.kind() {
            "interface_declaration" | "annotation_type_declaration" => TypeKind::Interface,
            "enum_declaration" => TypeKind::Enum,
            _ if mods.has("abstract") => TypeKind::AbstractClass,
            _ => TypeKind::Class,
        };
        let superclass = node
            .child_by_field_name("superclass")
            .and_then(|s| named_children(s).into_iter().next())
            .map(|t| type_ref(t, src, 0));
        let mut interfaces = Vec::new();
        for child in named_children(node) {
            if matches!(child.kind(), "super_interfaces" | "extends_interfaces") {
                for list in named_children(child) {
                    for t in named_children(list) {
                        interfaces.push(type_ref(t, src, 0));
                    }
                }
            }
        }
        let default_vis = if enclosing.is_some() && self.is_interface(enclosing) {
            Visibility::Public
        } else {
            Visibility::Package
        };
        let idx = self.types.len();
        self.types.push(TypeDecl {
            qualified_name: qname.clone(),
            simple_name: name,
            kind,
            superclass,
            interfaces,
            fields: Vec::new(),
            callables: Vec::new(),
            visibility: mods.visibility(default_vis),
            annotations: mods.annotations,
            is_anonymous: false,
            enclosing: enclosing.map(str::to_string),
            span: Span::of(&node),
        });

        let mut fields = Vec::new();
        let mut callables = Vec::new();
        if node.kind() == "record_declaration" {
            if let Some(params) = node.child_by_field_name("parameters") {
                let ps = self.params(params);
                for p in &ps {
                    fields.push(FieldDecl {
                        name: p.name.clone(),
                        declared_type: p.ty.clone(),
                        owner: qname.clone(),
                        visibility: Visibility::Private,
                        is_static: false,
                    });
                }
                callables.push(Callable {
                    name: self.types[idx].simple_name.clone(),
                    owner: Some(qname.clone()),
                    kind: CallableKind::Constructor,
                    visibility: Visibility::Public,
                    is_static: false,
                    is_abstract: false,
                    params: ps,
                    return_type: None,
                    annotations: Vec::new(),
                    throws: Vec::new(),
                    call_sites: Vec::new(),
                    span: Span::of(&params),
                    body_span: None,
                    body_shape: BodyShape::Absent,
                });
            }
        }
        if let Some(body) = node.child_by_field_name("body") {
            self.members(body, &qname, kind == TypeKind::Interface, &mut fields, &mut callables);
        }
        self.types[idx].fields = fields;
        self.types[idx].callables = callables;
    }

    fn is_interface(&self, qname: Option<&str>) -> bool {
        qname
            .and_then(|q| self.types.iter().find(|t| t.qualified_name == q))
            .is_some_and(|t| t.kind == TypeKind::Interface)
    }

    fn members(
        &mut self,
        body: Node<'_>,
        owner: &str,
        in_interface: bool,
        fields: &mut Vec<FieldDecl>,
        callables: &mut Vec<Callable>,
    ) {
        let src = self.src;
        let mut member_nodes = Vec::new();
        for child in named_children(body) {
            if child.kind() == "enum_body_declarations" {
                member_nodes.extend(named_children(child));
            } else {
                member_nodes.push(child);
            }
        }
        // fields first so method bodies can type their receivers
        for child in &member_nodes {
            if matches!(child.kind(), "field_declaration" | "constant_declaration") {
                let mods = modifiers_of(*child, src);
                let vis = mods.visibility(if in_interface { Visibility::Public } else { Visibility::Package });
                let Some(ty_node) = child.child_by_field_name("type") else { continue };
                let mut cursor = child.walk();
                for decl in child.children_by_field_name("declarator", &mut cursor) {
                    let Some(name) = decl.child_by_field_name("name") else { continue };
                    fields.push(FieldDecl {
                        name: text(name, src).to_string(),
                        declared_type: type_ref(ty_node, src, dims_of(decl, src)),
                        owner: owner.to_string(),
                        visibility: vis,
                        is_static: mods.has("static") || in_interface,
                    });
                }
            }
        }
        let field_types: BTreeMap<String, TypeRef> =
            fields.iter().map(|f| (f.name.clone(), f.declared_type.clone())).collect();
        for child in member_nodes {
            match child.kind() {
                "method_declaration" => {
                    callables.push(self.callable(child, owner, in_interface, CallableKind::Method, &field_types))
                }
                "constructor_declaration" | "compact_constructor_declaration" => callables.push(self.callable(
                    child,
                    owner,
                    in_interface,
                    CallableKind::Constructor,
                    &field_types,
                )),
                k if TYPE_DECLS.contains(&k) => self.type_decl(child, Some(owner)),
                _ => {}
            }
        }
    }

    fn params(&self, params: Node<'_>) -> Vec<Param> {
        let src = self.src;
        let mut out = Vec::new();
        for p in named_children(params) {
            match p.kind() {
                "formal_parameter" => {
                    let (Some(ty), Some(name)) = (p.child_by_field_name("type"), p.child_by_field_name("name"))
                    else {
                        continue;
                    };
                    out.push(Param { name: text(name, src).to_string(), ty: type_ref(ty, src, dims_of(p, src)) });
                }
                "spread_parameter" => {
                    let children = named_children(p);
                    let ty = children.iter().find(|c| c.kind() != "modifiers" && c.kind() != "variable_declarator");
                    let name = children
                        .iter()
                        .find(|c| c.kind() == "variable_declarator")
                        .and_then(|d| d.child_by_field_name("name"));
                    if let (Some(ty), Some(name)) = (ty, name) {
                        out.push(Param { name: text(name, src).to_string(), ty: type_ref(*ty, src, 1) });
                    }
                }
                _ => {}
            }
        }
        out
    }

    fn callable(
        &mut self,
        node: Node<'_>,
        owner: &str,
        in_interface: bool,
        kind: CallableKind,
        fields: &BTreeMap<String, TypeRef>,
    ) -> Callable {
        let src = self.src;
        let mods = modifiers_of(node, src);
        let name = node
            .child_by_field_name("name")
            .map(|n| text(n, src).to_string())
            .unwrap_or_default();
        let params = node.child_by_field_name("parameters").map(|p| self.params(p)).unwrap_or_default();
        let return_type = match kind {
            CallableKind::Constructor => None,
            _ => node.child_by_field_name("type").map(|t| type_ref(t, src, dims_of(node, src))),
        };
        let throws = named_children(node)
            .into_iter()
            .filter(|c| c.kind() == "throws")
            .flat_map(named_children)
            .map(|t| type_ref(t, src, 0))
            .collect();
        let body = node.child_by_field_name("body");
        let is_static = mods.has("static");
        let visibility = mods.visibility(if in_interface { Visibility::Public } else { Visibility::Package });
        let is_abstract = mods.has("abstract")
            || (in_interface && body.is_none() && !is_static && visibility != Visibility::Private);
        let key = callable_key(Some(owner), &name, &params);

        let mut call_sites = Vec::new();
        let mut body_shape = BodyShape::Absent;
        if let Some(body) = body {
            let mut locals: BTreeMap<String, TypeRef> =
                params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect();
            collect_locals(body, src, &mut locals);
            let ctx = BodyCtx { owner, enclosing_key: key, locals, fields };
            self.walk_calls(body, &ctx, &mut call_sites);
            body_shape = body_shape_of(body, src);
        }
        Callable {
            name,
            owner: Some(owner.to_string()),
            kind,
            visibility,
            is_static,
            is_abstract,
            params,
            return_type,
            annotations: mods.annotations,
            throws,
            call_sites,
            span: Span::of(&node),
            body_span: body.map(|b| Span::of(&b)),
            body_shape,
        }
    }

    fn walk_calls(&mut self, node: Node<'_>, ctx: &BodyCtx<'_>, out: &mut Vec<CallSite>) {
        let src = self.src;
        match node.kind() {
            "method_invocation" => {
                out.push(self.method_call(node, ctx));
                for child in named_children(node) {
                    self.walk_calls(child, ctx, out);
                }
            }
            "object_creation_expression" => {
                if let Some(ty) = node.child_by_field_name("type") {
                    let target = type_ref(ty, src, 0);
                    out.push(CallSite {
                        callee_name: super::simple_name(&target.written).to_string(),
                        receiver: None,
                        receiver_type: None,
                        target_type: Some(target.clone()),
                        is_constructor_call: true,
                        is_static_call: false,
                        arg_count: node.child_by_field_name("arguments").map(count_args).unwrap_or(0),
                        enclosing: ctx.enclosing_key.clone(),
                        span: Span::of(&node),
                    });
                    if let Some(body) = named_children(node).into_iter().find(|c| c.kind() == "class_body") {
                        self.anonymous(body, ctx.owner, target);
                    }
                }
                if let Some(args) = node.child_by_field_name("arguments") {
                    self.walk_calls(args, ctx, out);
                }
            }
            "explicit_constructor_invocation" => {
                if let Some(args) = node.child_by_field_name("arguments") {
                    self.walk_calls(args, ctx, out);
                }
            }
            k if TYPE_DECLS.contains(&k) => self.type_decl(node, Some(ctx.owner)),
            _ => {
                for child in named_children(node) {
                    self.walk_calls(child, ctx, out);
                }
            }
        }
    }

    fn method_call(&self, node: Node<'_>, ctx: &BodyCtx<'_>) -> CallSite {
        let src = self.src;
        let callee = node.child_by_field_name("name").map(|n| text(n, src).to_string()).unwrap_or_default();
        let arg_count = node.child_by_field_name("arguments").map(count_args).unwrap_or(0);
        let mut cs = CallSite {
            callee_name: callee.clone(),
            receiver: None,
            receiver_type: None,
            target_type: None,
            is_constructor_call: false,
            is_static_call: false,
            arg_count,
            enclosing: ctx.enclosing_key.clone(),
            span: Span::of(&node),
        };
        let Some(object) = node.child_by_field_name("object") else {
            if let Some(class) = self.static_members.get(&callee) {
                cs.is_static_call = true;
                cs.target_type = Some(TypeRef::written(class, 0, Language::Java));
            }
            return cs;
        };
        let obj_text = text(object, src);
        cs.receiver = Some(obj_text.to_string());
        match object.kind() {
            "this" | "super" => {}
            "identifier" => {
                if let Some(t) = ctx.locals.get(obj_text).or_else(|| ctx.fields.get(obj_text)) {
                    cs.receiver_type = Some(t.clone());
                } else if obj_text.starts_with(|c: char| c.is_ascii_uppercase()) {
                    cs.is_static_call = true;
                    cs.target_type = Some(TypeRef::written(obj_text, 0, Language::Java));
                }
            }
            "field_access" => {
                let inner = object.child_by_field_name("object");
                let field = object.child_by_field_name("field").map(|f| text(f, src));
                if inner.is_some_and(|i| i.kind() == "this") {
                    if let Some(t) = field.and_then(|f| ctx.fields.get(f)) {
                        cs.receiver_type = Some(t.clone());
                    }
                } else if is_dotted_path(obj_text)
                    && super::simple_name(obj_text).starts_with(|c: char| c.is_ascii_uppercase())
                {
                    cs.is_static_call = true;
                    cs.target_type = Some(TypeRef::written(obj_text, 0, Language::Java));
                }
            }
            _ => {}
        }
        cs
    }

    fn anonymous(&mut self, body: Node<'_>, owner: &str, supertype: TypeRef) {
        let counter = self.anon_counters.entry(owner.to_string()).or_insert(0);
        *counter += 1;
        let qname = format!("{owner}${counter}");
        let idx = self.types.len();
        self.types.push(TypeDecl {
            qualified_name: qname.clone(),
            simple_name: qname.rsplit('$').next().unwrap_or_default().to_string(),
            kind: TypeKind::Class,
            superclass: Some(supertype),
            interfaces: Vec::new(),
            fields: Vec::new(),
            callables: Vec::new(),
            visibility: Visibility::Private,
            annotations: Vec::new(),
            is_anonymous: true,
            enclosing: Some(owner.to_string()),
            span: Span::of(&body),
        });
        let mut fields = Vec::new();
        let mut callables = Vec::new();
        self.members(body, &qname, false, &mut fields, &mut callables);
        self.types[idx].fields = fields;
        self.types[idx].callables = callables;
    }
}

fn is_dotted_path(s: &str) -> bool {
    s.split('.').all(|seg| !seg.is_empty() && seg.chars().all(|c| c.is_alphanumeric() || c == '_'))
}

fn count_args(args: Node<'_>) -> usize {
    named_children(args).into_iter().filter(|c| !c.kind().ends_with("comment")).count()
}

fn collect_locals(node: Node<'_>, src: &str, locals: &mut BTreeMap<String, TypeRef>) {
    match node.kind() {
        "local_variable_declaration" => {
            if let Some(ty) = node.child_by_field_name("type") {
                let mut cursor = node.walk();
                for decl in node.children_by_field_name("declarator", &mut cursor) {
                    if let Some(name) = decl.child_by_field_name("name") {
                        let (written, _) = erase_type(text(ty, src));
                        if written != "var" {
                            locals.insert(text(name, src).to_string(), type_ref(ty, src, dims_of(decl, src)));
                        }
                    }
                }
            }
        }
        "enhanced_for_statement" | "resource" => {
            if let (Some(ty), Some(name)) = (node.child_by_field_name("type"), node.child_by_field_name("name")) {
                locals.insert(text(name, src).to_string(), type_ref(ty, src, 0));
            }
        }
        "catch_formal_parameter" => {
            let ty = named_children(node).into_iter().find(|c| c.kind() == "catch_type");
            let name = node.child_by_field_name("name");
            if let (Some(ty), Some(name)) = (ty.and_then(|t| named_children(t).into_iter().next()), name) {
                locals.insert(text(name, src).to_string(), type_ref(ty, src, 0));
            }
        }
        "class_body" => return,
        _ => {}
    }
    for child in named_children(node) {
        collect_locals(child, src, locals);
    }
}

fn body_shape_of(body: Node<'_>, src: &str) -> BodyShape {
    let stmts: Vec<Node<'_>> =
        named_children(body).into_iter().filter(|c| !c.kind().ends_with("comment")).collect();
    match stmts.as_slice() {
        [] => BodyShape::Empty,
        [stmt] => match stmt.kind() {
            "return_statement" => named_children(*stmt)
                .into_iter()
                .next()
                .and_then(|e| plain_name(e, src))
                .map(BodyShape::ReturnsName)
                .unwrap_or(BodyShape::Other),
            "expression_statement" => {
                let Some(expr) = named_children(*stmt).into_iter().next() else {
                    return BodyShape::Other;
                };
                if expr.kind() != "assignment_expression"
                    || expr.child_by_field_name("operator").map(|o| text(o, src)) != Some("=")
                {
                    return BodyShape::Other;
                }
                let target = expr.child_by_field_name("left").and_then(|l| plain_name(l, src));
                let value = expr
                    .child_by_field_name("right")
                    .filter(|r| r.kind() == "identifier")
                    .map(|r| text(r, src).to_string());
                match (target, value) {
                    (Some(target), Some(value)) => BodyShape::AssignsName { target, value },
                    _ => BodyShape::Other,
                }
            }
            _ => BodyShape::Other,
        },
        _ => BodyShape::Other,
    }
}

/// `x` or `this.x`.
fn plain_name(node: Node<'_>, src: &str) -> Option<String> {
    match node.kind() {
        "identifier" => Some(text(node, src).to_string()),
        "field_access" => {
            let obj = node.child_by_field_name("object")?;
            (obj.kind() == "this").then(|| node.child_by_field_name("field").map(|f| text(f, src).to_string()))?
        }
        _ => None,
    }
}
