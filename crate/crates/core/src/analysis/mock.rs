use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use super::{is_overridden, is_service_entry_class, FocalTarget, TypeAllowlist};
use crate::code_model::{build_class_call_graph, CallSite, Callable, CodeModel, FieldDecl, TypeClass, TypeDecl, TypeRef};

/// Candidate mock targets of a focal method: allowlisted types reachable
/// through constructor parameters, and allowlisted fields of the focal class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MockedFieldsAndTypes<'m> {
    /// Sorted by qualified name.
    pub types: Vec<TypeRef>,
    /// Declaration order.
    pub fields: Vec<&'m FieldDecl>,
}

fn element_type(t: &TypeRef) -> TypeRef {
    TypeRef { array_dims: 0, ..t.clone() }
}

pub fn identify_mocked_fields_and_types<'m>(
    focal_method: &Callable,
    focal_class: &'m TypeDecl,
    t_apis: &TypeAllowlist,
    model: &CodeModel,
) -> MockedFieldsAndTypes<'m> {
    let fields = focal_class.fields.iter().filter(|f| t_apis.contains(&f.declared_type)).collect();

    let mut types: BTreeMap<String, TypeRef> = BTreeMap::new();
    let mut visited = BTreeSet::new();
    let mut worklist: VecDeque<TypeRef> = VecDeque::new();
    let mut push = |t: TypeRef, worklist: &mut VecDeque<TypeRef>| {
        if !t.qualified_name.is_empty() && visited.insert(t.qualified_name.clone()) {
            worklist.push_back(t);
        }
    };
    push(TypeRef::qualified(&focal_class.qualified_name, TypeClass::Application), &mut worklist);
    for p in &focal_method.params {
        push(element_type(&p.ty), &mut worklist);
    }
    while let Some(t) = worklist.pop_front() {
        if t_apis.contains(&t) {
            types.entry(t.qualified_name.clone()).or_insert_with(|| t.clone());
        }
        let decl = if t.qualified_name == focal_class.qualified_name { Some(focal_class) } else { model.decl_of(&t) };
        for ctor in decl.into_iter().flat_map(|d| d.constructors()) {
            for p in &ctor.params {
                push(element_type(&p.ty), &mut worklist);
            }
        }
    }
    MockedFieldsAndTypes { types: types.into_values().collect(), fields }
}

/// Members examined for stubbing and the call sites classified within them.
#[derive(Debug, Clone, Default)]
pub struct MockingScope<'m> {
    pub scope: Vec<&'m Callable>,
    pub constructor_calls: Vec<&'m CallSite>,
    pub static_calls: Vec<&'m CallSite>,
    pub api_calls: Vec<&'m CallSite>,
}

pub fn identify_mocking_scope<'m>(
    focal_method: &'m Callable,
    focal_class: &'m TypeDecl,
    t_apis: &TypeAllowlist,
    service_entries: &TypeAllowlist,
    model: &'m CodeModel,
) -> MockingScope<'m> {
    let mut scope: Vec<&'m Callable> = Vec::new();
    let add = |c: &'m Callable, scope: &mut Vec<&'m Callable>| {
        if !scope.iter().any(|s| std::ptr::eq(*s, c)) {
            scope.push(c);
        }
    };
    add(focal_method, &mut scope);
    for c in focal_class.constructors() {
        add(c, &mut scope);
    }
    let declaring = match focal_method.owner.as_deref() {
        Some(o) if o != focal_class.qualified_name => model.type_decl(o),
        _ => Some(focal_class),
    };
    if let Some(decl) = declaring {
        if let Some(idx) = decl.callables.iter().position(|c| std::ptr::eq(c, focal_method)) {
            let graph = build_class_call_graph(decl);
            for j in graph.reachable_from(idx) {
                add(&decl.callables[j], &mut scope);
            }
        }
    }
    if is_service_entry_class(focal_class, model, service_entries) {
        for m in focal_class.methods().filter(|m| is_overridden(m, focal_class, model)) {
            add(m, &mut scope);
        }
    }

    let mut out = MockingScope { scope, ..Default::default() };
    for member in &out.scope {
        for cs in &member.call_sites {
            let typed_in = |t: Option<&TypeRef>| t.is_some_and(|t| t_apis.contains(t));
            if cs.is_constructor_call && typed_in(cs.call_type()) {
                out.constructor_calls.push(cs);
            }
            if cs.is_static_call && typed_in(cs.call_type()) {
                out.static_calls.push(cs);
            }
            if typed_in(cs.receiver_type.as_ref()) {
                out.api_calls.push(cs);
            }
        }
    }
    out
}

/// Everything needed to render a mocking skeleton for one focal target.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MockPlan {
    pub mockable_fields: Vec<FieldDecl>,
    pub mockable_types: Vec<TypeRef>,
    pub constructor_calls: Vec<CallSite>,
    pub static_calls: Vec<CallSite>,
    pub api_calls: Vec<CallSite>,
    pub api_allowlist: TypeAllowlist,
}

impl MockPlan {
    pub fn is_empty(&self) -> bool {
        self.mockable_fields.is_empty()
            && self.mockable_types.is_empty()
            && self.constructor_calls.is_empty()
            && self.static_calls.is_empty()
            && self.api_calls.is_empty()
    }
}

pub fn plan_mocks(
    target: &FocalTarget<'_>,
    t_apis: &TypeAllowlist,
    service_entries: &TypeAllowlist,
    model: &CodeModel,
) -> MockPlan {
    let ft = identify_mocked_fields_and_types(target.focal_method, target.focal_class, t_apis, model);
    let scope = identify_mocking_scope(target.focal_method, target.focal_class, t_apis, service_entries, model);
    MockPlan {
        mockable_fields: ft.fields.into_iter().cloned().collect(),
        mockable_types: ft.types,
        constructor_calls: scope.constructor_calls.into_iter().cloned().collect(),
        static_calls: scope.static_calls.into_iter().cloned().collect(),
        api_calls: scope.api_calls.into_iter().cloned().collect(),
        api_allowlist: t_apis.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("mock plan is empty")]
pub struct EmptyPlan;

/// Line the model replaces with the test body.
pub const COMPLETION_MARKER: &str = "// @generate-test-body";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StubKind {
    Constructor,
    Static,
    Api,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StubSlot {
    pub call_site: String,
    pub kind: StubKind,
    pub stanza: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestSkeleton {
    pub test_class: String,
    pub mock_declarations: Vec<String>,
    pub setup_fixture: String,
    pub stub_slots: Vec<StubSlot>,
    pub completion_marker: &'static str,
    pub text: String,
}

impl TestSkeleton {
    pub fn fill(&self, body: &str) -> String {
        self.text.replacen(COMPLETION_MARKER, body, 1)
    }
}

fn lower_camel(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn upper_first(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn package_of(qualified_name: &str) -> &str {
    let outer = qualified_name.split('$').next().unwrap_or(qualified_name);
    outer.rsplit_once('.').map(|(p, _)| p).unwrap_or("")
}

/// Name to use in test source, plus an import if one is needed.
fn source_name(t: &TypeRef, package: &str) -> (String, Option<String>) {
    let canonical = t.qualified_name.replace('$', ".");
    if t.written.contains('.') || !t.qualified_name.contains('.') {
        return (t.written.replace('$', "."), None);
    }
    let pkg = package_of(&t.qualified_name);
    let local = canonical[pkg.len() + 1..].to_string();
    let import = (pkg != package && pkg != "java.lang").then(|| format!("{pkg}.{}", local.split('.').next().unwrap_or(&local)));
    (local, import)
}

struct Names(BTreeSet<String>);

impl Names {
    fn fresh(&mut self, base: &str) -> String {
        let mut name = base.to_string();
        let mut n = 2;
        while !self.0.insert(name.clone()) {
            name = format!("{base}{n}");
            n += 1;
        }
        name
    }
}

fn any_args(n: usize) -> String {
    vec!["any()"; n].join(", ")
}

/// Render a JUnit 5 + Mockito test class with mocks, fixtures and commented
/// stub templates; the model completes the body at [`COMPLETION_MARKER`].
pub fn build_mock_skeleton(plan: &MockPlan, target: &FocalTarget<'_>) -> Result<TestSkeleton, EmptyPlan> {
    if plan.is_empty() {
        return Err(EmptyPlan);
    }
    let focal = target.focal_class;
    let package = package_of(&focal.qualified_name).to_string();
    let test_class = format!("{}Test", focal.simple_name);
    let mut imports: BTreeSet<String> = BTreeSet::new();
    let mut names = Names(BTreeSet::new());
    // mock variable per type, fields take precedence
    let mut mock_var: BTreeMap<String, String> = BTreeMap::new();
    let mut mock_declarations = Vec::new();

    for f in &plan.mockable_fields {
        let (ty, import) = source_name(&f.declared_type, &package);
        imports.extend(import);
        let var = names.fresh(&f.name);
        mock_var.entry(f.declared_type.qualified_name.clone()).or_insert_with(|| var.clone());
        mock_declarations.push(format!("    @Mock\n    private {ty} {var};\n"));
    }
    for t in &plan.mockable_types {
        let (ty, import) = source_name(t, &package);
        imports.extend(import);
        let var = names.fresh(&lower_camel(t.simple_name()));
        mock_var.entry(t.qualified_name.clone()).or_insert_with(|| var.clone());
        mock_declarations.push(format!("    @Mock\n    private {ty} {var};\n"));
    }

    let mut setup_lines = Vec::new();
    let mut teardown_lines = Vec::new();
    let mut static_var: BTreeMap<String, String> = BTreeMap::new();
    let mut construction_var: BTreeMap<String, String> = BTreeMap::new();
    for (calls, vars, kind) in [
        (&plan.static_calls, &mut static_var, "Static"),
        (&plan.constructor_calls, &mut construction_var, "Construction"),
    ] {
        for cs in calls.iter() {
            let Some(t) = cs.call_type() else { continue };
            if vars.contains_key(&t.qualified_name) {
                continue;
            }
            let (ty, import) = source_name(t, &package);
            imports.extend(import);
            let var = names.fresh(&format!("{}{kind}", lower_camel(t.simple_name())));
            let (holder, factory) = if kind == "Static" {
                ("MockedStatic", "mockStatic")
            } else {
                ("MockedConstruction", "mockConstruction")
            };
            mock_declarations.push(format!("    private {holder}<{ty}> {var};\n"));
            setup_lines.push(format!("        {var} = Mockito.{factory}({ty}.class);\n"));
            teardown_lines.push(format!("        {var}.close();\n"));
            vars.insert(t.qualified_name.clone(), var);
        }
    }

    let instance = !target.focal_method.is_static && !focal.is_abstract();
    let focal_var = names.fresh(&lower_camel(&focal.simple_name));
    let mut setup_fixture = String::new();
    if instance {
        setup_fixture.push_str(&format!("    @InjectMocks\n    private {} {focal_var};\n\n", focal.simple_name));
    }
    setup_fixture.push_str("    @BeforeEach\n    void setUp() {\n");
    for l in &setup_lines {
        setup_fixture.push_str(l);
    }
    setup_fixture.push_str("    }\n");
    if !teardown_lines.is_empty() {
        setup_fixture.push_str("\n    @AfterEach\n    void tearDown() {\n");
        for l in &teardown_lines {
            setup_fixture.push_str(l);
        }
        setup_fixture.push_str("    }\n");
    }

    let mut stub_slots = Vec::new();
    for cs in &plan.constructor_calls {
        let Some(t) = cs.call_type() else { continue };
        let (ty, _) = source_name(t, &package);
        let var = &construction_var[&t.qualified_name];
        stub_slots.push(StubSlot {
            call_site: cs.display(),
            kind: StubKind::Constructor,
            stanza: format!("new {ty}({}) is intercepted; use {var}.constructed()", any_args(cs.arg_count)),
        });
    }
    for cs in &plan.static_calls {
        let Some(t) = cs.call_type() else { continue };
        let (ty, _) = source_name(t, &package);
        let var = &static_var[&t.qualified_name];
        stub_slots.push(StubSlot {
            call_site: cs.display(),
            kind: StubKind::Static,
            stanza: format!(
                "{var}.when(() -> {ty}.{}({})).thenReturn(/* value */);",
                cs.callee_name,
                any_args(cs.arg_count)
            ),
        });
    }
    for cs in &plan.api_calls {
        let receiver = cs
            .receiver_type
            .as_ref()
            .and_then(|t| mock_var.get(&t.qualified_name).cloned())
            .or_else(|| cs.receiver.as_ref().map(|r| r.trim_start_matches("this.").to_string()))
            .unwrap_or_default();
        stub_slots.push(StubSlot {
            call_site: cs.display(),
            kind: StubKind::Api,
            stanza: format!("when({receiver}.{}({})).thenReturn(/* value */);", cs.callee_name, any_args(cs.arg_count)),
        });
    }

    let mut text = String::new();
    if !package.is_empty() {
        let _ = writeln!(text, "package {package};\n");
    }
    text.push_str("import static org.junit.jupiter.api.Assertions.*;\nimport static org.mockito.ArgumentMatchers.any;\nimport static org.mockito.Mockito.*;\n\n");
    let mut framework = vec![
        "org.junit.jupiter.api.BeforeEach",
        "org.junit.jupiter.api.Test",
        "org.junit.jupiter.api.extension.ExtendWith",
        "org.mockito.Mock",
        "org.mockito.junit.jupiter.MockitoExtension",
    ];
    if !teardown_lines.is_empty() {
        framework.extend(["org.junit.jupiter.api.AfterEach", "org.mockito.Mockito"]);
    }
    if instance {
        framework.push("org.mockito.InjectMocks");
    }
    if !static_var.is_empty() {
        framework.push("org.mockito.MockedStatic");
    }
    if !construction_var.is_empty() {
        framework.push("org.mockito.MockedConstruction");
    }
    imports.extend(framework.into_iter().map(String::from));
    for i in &imports {
        let _ = writeln!(text, "import {i};");
    }
    let _ = write!(text, "\n@ExtendWith(MockitoExtension.class)\npublic class {test_class} {{\n\n");
    for d in &mock_declarations {
        text.push_str(d);
        text.push('\n');
    }
    text.push_str(&setup_fixture);
    let _ = write!(text, "\n    @Test\n    void test{}() {{\n", upper_first(&target.focal_method.name));
    for slot in &stub_slots {
        let _ = writeln!(text, "        // {}", slot.stanza);
    }
    let _ = write!(text, "        {COMPLETION_MARKER}\n    }}\n}}\n");

    Ok(TestSkeleton {
        test_class,
        mock_declarations,
        setup_fixture,
        stub_slots,
        completion_marker: COMPLETION_MARKER,
        text,
    })
}
