use super::*;

fn java(src: &str) -> CodeUnit {
    parse_unit("A.java", src, Language::Java).expect("parses")
}

fn py(path: &str, src: &str) -> CodeUnit {
    parse_unit(path, src, Language::Python).expect("parses")
}

#[test]
fn java_single_class_single_method() {
    let unit = java("class A { public int f(int x){return x;} }");
    assert_eq!(unit.types.len(), 1);
    let a = &unit.types[0];
    assert_eq!(a.qualified_name, "A");
    assert_eq!(a.kind, TypeKind::Class);
    assert_eq!(a.callables.len(), 1);
    let f = &a.callables[0];
    assert_eq!(f.name, "f");
    assert_eq!(f.visibility, Visibility::Public);
    assert_eq!(f.params.len(), 1);
    assert_eq!(f.params[0].name, "x");
    assert_eq!(f.params[0].ty.written, "int");
    assert_eq!(f.params[0].ty.classification, TypeClass::Primitive);
    assert_eq!(f.body_shape, BodyShape::ReturnsName("x".into()));
}

#[test]
fn python_top_level_function() {
    let unit = py("time_utils.py", "def to_minutes(h):\n    return h * 60\n");
    assert!(unit.types.is_empty());
    assert_eq!(unit.functions.len(), 1);
    assert_eq!(unit.functions[0].kind, CallableKind::Function);
    assert_eq!(unit.namespace.as_deref(), Some("time_utils"));
}

#[test]
fn unbalanced_java_is_syntax_error() {
    let err = parse_unit("A.java", "class A {", Language::Java).unwrap_err();
    assert_eq!(err.path, "A.java");
    assert_eq!(err.line, 1);
}

#[test]
fn spans_lie_within_text() {
    let src = "package p;\nimport java.util.List;\npublic class A {\n  private int n;\n  A(int n) { this.n = n; }\n  int get() { return n; }\n  class In { void z() {} }\n}\n";
    let unit = java(src);
    for t in &unit.types {
        assert!(t.span.end_byte <= src.len());
        for c in &t.callables {
            assert!(t.span.contains(&c.span));
            if let Some(b) = c.body_span {
                assert!(c.span.contains(&b));
            }
        }
    }
    assert_eq!(unit.imports[0].name, "java.util.List");
    let names: Vec<_> = unit.types.iter().map(|t| t.qualified_name.as_str()).collect();
    assert_eq!(names, ["p.A", "p.A$In"]);
}

#[test]
fn java_modifiers_and_kinds() {
    let unit = java(
        "public abstract class Base { public static int s(){return 1;} protected abstract void v(); void pkg(){} private void p(){} }\n\
         interface I { void m(); default void d(){} static void st(){} }\n\
         enum E { X, Y; public int code(){ return 1; } }",
    );
    let base = &unit.types[0];
    assert_eq!(base.kind, TypeKind::AbstractClass);
    let vis: Vec<_> = base.callables.iter().map(|c| (c.name.as_str(), c.visibility, c.is_static, c.is_abstract)).collect();
    assert_eq!(
        vis,
        [
            ("s", Visibility::Public, true, false),
            ("v", Visibility::Protected, false, true),
            ("pkg", Visibility::Package, false, false),
            ("p", Visibility::Private, false, false),
        ]
    );
    let i = &unit.types[1];
    assert_eq!(i.kind, TypeKind::Interface);
    let flags: Vec<_> = i.callables.iter().map(|c| (c.visibility, c.is_abstract)).collect();
    assert_eq!(flags, [(Visibility::Public, true), (Visibility::Public, false), (Visibility::Public, false)]);
    assert_eq!(unit.types[2].kind, TypeKind::Enum);
    assert_eq!(unit.types[2].callables[0].name, "code");
}

#[test]
fn java_call_site_classification() {
    let unit = java(
        "import ext.Util;\nclass Svc { private Conn c;\n  int handle(Request r) { c.query(r); Util.now(); Socket s = new Socket(); s.close(); helper(1); this.helper(2); return 0; }\n  void helper(int x) {} }",
    );
    let handle = &unit.types[0].callables[0];
    let summary: Vec<_> = handle
        .call_sites
        .iter()
        .map(|cs| {
            (
                cs.callee_name.as_str(),
                cs.is_constructor_call,
                cs.is_static_call,
                cs.receiver_type.as_ref().map(|t| t.written.as_str()),
                cs.target_type.as_ref().map(|t| t.written.as_str()),
            )
        })
        .collect();
    assert_eq!(
        summary,
        [
            ("query", false, false, Some("Conn"), None),
            ("now", false, true, None, Some("Util")),
            ("Socket", true, false, None, Some("Socket")),
            ("close", false, false, Some("Socket"), None),
            ("helper", false, false, None, None),
            ("helper", false, false, None, None),
        ]
    );
    for cs in &handle.call_sites {
        assert!(!(cs.is_constructor_call && cs.is_static_call));
        assert_eq!(cs.enclosing, handle.key());
    }
}

#[test]
fn anonymous_and_nested_naming() {
    let unit = java(
        "class Outer { void run() { Runnable r = new Runnable() { public void run() { go(); } }; r.run(); } class Inner {} static class Nested { class Deep {} } }",
    );
    let names: Vec<_> = unit.types.iter().map(|t| (t.qualified_name.as_str(), t.is_anonymous)).collect();
    assert!(names.contains(&("Outer$1", true)));
    assert!(names.contains(&("Outer$Inner", false)));
    assert!(names.contains(&("Outer$Nested$Deep", false)));
    let run = &unit.types[0].callables[0];
    // the anonymous body's go() is not attributed to Outer.run
    let callees: Vec<_> = run.call_sites.iter().map(|c| c.callee_name.as_str()).collect();
    assert_eq!(callees, ["Runnable", "run"]);
}

#[test]
fn generics_are_erased() {
    let unit = java("class A { java.util.Map<String, java.util.List<Integer>> m(List<String>[] xs) { return null; } }");
    let m = &unit.types[0].callables[0];
    assert_eq!(m.return_type.as_ref().unwrap().written, "java.util.Map");
    assert_eq!(m.params[0].ty.written, "List");
    assert_eq!(m.params[0].ty.array_dims, 1);
}

#[test]
fn python_visibility_and_members() {
    let unit = py(
        "pkg/shapes.py",
        "import math\nfrom .base import Shape\n\nclass Circle(Shape):\n    def __init__(self, r: float):\n        self.r = r\n    def area(self):\n        return math.pi * self._sq()\n    def _sq(self):\n        return self.r ** 2\n    def __secret(self):\n        pass\n\ndef _helper():\n    return Circle(1)\n",
    );
    assert_eq!(unit.namespace.as_deref(), Some("pkg.shapes"));
    assert_eq!(unit.imports[1].name, "pkg.base.Shape");
    let circle = &unit.types[0];
    assert_eq!(circle.qualified_name, "pkg.shapes.Circle");
    assert_eq!(circle.superclass.as_ref().unwrap().written, "Shape");
    let vis: Vec<_> = circle.callables.iter().map(|c| (c.name.as_str(), c.kind, c.visibility)).collect();
    assert_eq!(
        vis,
        [
            ("__init__", CallableKind::Constructor, Visibility::Public),
            ("area", CallableKind::Method, Visibility::Public),
            ("_sq", CallableKind::Method, Visibility::Protected),
            ("__secret", CallableKind::Method, Visibility::NameMangled),
        ]
    );
    assert_eq!(circle.callables[0].params.len(), 1, "self dropped");
    assert_eq!(circle.fields[0].name, "r");
    assert_eq!(circle.fields[0].declared_type.written, "float");
    let helper = &unit.functions[0];
    assert_eq!(helper.visibility, Visibility::Protected);
    assert!(helper.call_sites[0].is_constructor_call);
}

#[test]
fn resolution_application_library_unresolved() {
    let options = parse_unit(
        "com/app/Options.java",
        "package com.app; public class Options { public Options(Registry r) {} }",
        Language::Java,
    )
    .unwrap();
    let registry =
        parse_unit("com/app/Registry.java", "package com.app; public class Registry { }", Language::Java).unwrap();
    let user = parse_unit(
        "com/other/User.java",
        "package com.other; import com.app.Options; class User { void m(Options o, String s, Optoins typo, java.sql.Connection c) {} }",
        Language::Java,
    )
    .unwrap();
    let model = CodeModel::build(vec![options, registry, user]).unwrap();
    let m = &model.type_decl("com.other.User").unwrap().callables[0];
    let classes: Vec<_> = m.params.iter().map(|p| (p.ty.qualified_name.as_str(), p.ty.classification)).collect();
    assert_eq!(
        classes,
        [
            ("com.app.Options", TypeClass::Application),
            ("java.lang.String", TypeClass::Library),
            ("Optoins", TypeClass::Unresolved),
            ("java.sql.Connection", TypeClass::Library),
        ]
    );
    let opts_ref = TypeRef::qualified("com.app.Options", TypeClass::Unresolved);
    assert!(matches!(resolve_type(&opts_ref, &model), Resolution::Application(d) if d.qualified_name == "com.app.Options"));
    assert_eq!(resolve_type(&TypeRef::qualified("java.lang.String", TypeClass::Unresolved), &model), Resolution::Library);
    assert_eq!(resolve_type(&m.params[2].ty, &model), Resolution::Unresolved);
    // same-package reference without import
    let ctor = model.type_decl("com.app.Options").unwrap().constructors().next().unwrap();
    assert_eq!(ctor.params[0].ty.qualified_name, "com.app.Registry");
    assert!(ctor.params[0].ty.is_application());
}

#[test]
fn duplicate_types_rejected() {
    let a = java("class A {}");
    let b = parse_unit("B.java", "class A {}", Language::Java).unwrap();
    assert!(matches!(CodeModel::build(vec![a, b]), Err(ModelError::DuplicateType(n)) if n == "A"));
}

#[test]
fn python_import_resolution() {
    let shapes = py("shapes.py", "class Circle:\n    def __init__(self, r):\n        self.r = r\n");
    let app = py(
        "app.py",
        "import shapes\nfrom shapes import Circle\nimport os\n\ndef build(c: Circle, s: shapes.Circle, p: os.PathLike, n: int):\n    return c\n",
    );
    let model = CodeModel::build(vec![shapes, app]).unwrap();
    let build = &model.module("app").unwrap().functions[0];
    let classes: Vec<_> = build.params.iter().map(|p| (p.ty.qualified_name.as_str(), p.ty.classification)).collect();
    assert_eq!(
        classes,
        [
            ("shapes.Circle", TypeClass::Application),
            ("shapes.Circle", TypeClass::Application),
            ("os.PathLike", TypeClass::Library),
            ("int", TypeClass::Primitive),
        ]
    );
}

#[test]
fn class_call_graph_examples() {
    let unit = java("class C { public void p(){ q(); } private void q(){} }");
    let g = build_class_call_graph(&unit.types[0]);
    assert_eq!(g.edge_keys(), [("C#p()", "C#q()")]);

    let unit = java("class C { public void a(){ System.out.println(1); } void b(){ other.x(); } }");
    assert!(build_class_call_graph(&unit.types[0]).edges().is_empty());

    let unit = java("class C { public void p(){ q(); } private void q(){ r(); } private void r(){} }");
    let g = build_class_call_graph(&unit.types[0]);
    assert_eq!(g.edge_keys(), [("C#p()", "C#q()"), ("C#q()", "C#r()")]);
}

#[test]
fn overloads_resolve_by_arity_then_order() {
    let unit = java("class C { void go(){ f(1, 2); f(); g(9); } void f(){} void f(int a, int b){} void g(){} void g(int x, int y){} }");
    let g = build_class_call_graph(&unit.types[0]);
    let edges = g.edge_keys();
    assert!(edges.contains(&("C#go()", "C#f(int,int)")));
    assert!(edges.contains(&("C#go()", "C#f()")));
    // no arity match: first declared overload
    assert!(edges.contains(&("C#go()", "C#g()")));
}

#[test]
fn snippet_reparse_matches_call_sites() {
    let src = "class A { A(int x) { this(); foo(x); } A() {} void m() { a.b(1); new B(c.d()); } }";
    let unit = java(src);
    for c in unit.callables() {
        let body = c.body_span.unwrap();
        let again = snippet_call_sites(body.text(src), Language::Java, c.is_constructor(), body.start_col).unwrap();
        let orig: Vec<_> = c.call_sites.iter().map(|cs| (cs.callee_name.clone(), cs.arg_count)).collect();
        assert_eq!(again, orig);
    }
    let psrc = "class K:\n    def m(self, x):\n        y = f(x)\n        if y:\n            self.g(y, 2)\n        return h()\n";
    let unit = py("k.py", psrc);
    let m = &unit.types[0].callables[0];
    let body = m.body_span.unwrap();
    let again = snippet_call_sites(body.text(psrc), Language::Python, false, body.start_col).unwrap();
    assert_eq!(again, [("f".to_string(), 1), ("g".to_string(), 2), ("h".to_string(), 0)]);
}
