mod common;

use std::collections::BTreeSet;

use polytest_core::analysis::*;
use polytest_core::code_model::{parse_unit, CodeModel, Language};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model(files: &[(&str, &str)]) -> CodeModel {
    let units = files.iter().map(|(p, s)| parse_unit(p, s, Language::Java).unwrap()).collect();
    CodeModel::build(units).unwrap()
}

fn target_names(targets: &[FocalTarget<'_>]) -> Vec<(String, bool)> {
    targets.iter().map(|t| (t.focal_method.name.clone(), t.inherited_from_abstract)).collect()
}

fn apis(entries: &[&str]) -> TypeAllowlist {
    TypeAllowlist::new(entries).unwrap()
}

#[test]
fn scope_visibility_filter() {
    let m = model(&[("C.java", "class C { public void a(){} private void b(){} protected void c(){} void d(){} }")]);
    let c = m.type_decl("C").unwrap();
    let names = target_names(&compute_testing_scope(c, &m));
    assert_eq!(names, [("a".into(), false), ("c".into(), false), ("d".into(), false)]);
}

#[test]
fn scope_inherits_from_abstract_superclass_only() {
    let m = model(&[
        ("A.java", "abstract class A { public int m(){ return 1; } public abstract void n(); public void o(){} }"),
        ("B.java", "class B { public void fromConcrete(){} }"),
        ("C.java", "class C extends A { public void n(){} public void o(){} }"),
        ("D.java", "class D extends B { public void own(){} }"),
    ]);
    let c = m.type_decl("C").unwrap();
    let names = target_names(&compute_testing_scope(c, &m));
    assert_eq!(names, [("n".into(), false), ("o".into(), false), ("m".into(), true)]);
    let d = m.type_decl("D").unwrap();
    assert_eq!(target_names(&compute_testing_scope(d, &m)), [("own".into(), false)]);
}

#[test]
fn scope_abstract_class_is_static_only() {
    let m = model(&[("A.java", "abstract class A { static int s(){ return 0; } public void v(){} private static void hidden(){} }")]);
    let a = m.type_decl("A").unwrap();
    assert_eq!(target_names(&compute_testing_scope(a, &m)), [("s".into(), false)]);
}

fn ctor_sigs(sigs: &[ConstructorSig]) -> Vec<String> {
    sigs.iter().map(|s| s.signature.clone()).collect()
}

#[test]
fn relevant_constructors_examples() {
    let m = model(&[
        ("app/Options.java", "package app; public class Options { public Options(Registry r) {} }"),
        ("app/Registry.java", "package app; public class Registry { public Registry() {} }"),
        (
            "app/Focal.java",
            "package app; public class Focal { public Focal(int n) {} public static int s(int x){ return x; } public void m(Options o){} public void t(String s){} }",
        ),
    ]);
    let focal = m.type_decl("app.Focal").unwrap();
    let scope = compute_testing_scope(focal, &m);
    let by_name = |n: &str| scope.iter().find(|t| t.focal_method.name == n).unwrap();
    let opts = ConstructorOptions::default();
    assert!(collect_relevant_constructors(by_name("s"), &m, opts).is_empty());
    assert_eq!(
        ctor_sigs(&collect_relevant_constructors(by_name("m"), &m, opts)),
        ["public Focal(int n)", "public Options(Registry r)", "public Registry()"]
    );
    assert_eq!(ctor_sigs(&collect_relevant_constructors(by_name("t"), &m, opts)), ["public Focal(int n)"]);
    let capped = collect_relevant_constructors(by_name("m"), &m, ConstructorOptions { max_depth: Some(0) });
    assert_eq!(ctor_sigs(&capped), ["public Focal(int n)", "public Options(Registry r)"]);
}

#[test]
fn relevant_constructors_cycle_and_implicit_default() {
    let m = model(&[
        ("A.java", "class A { A(B b) {} }"),
        ("B.java", "class B { B(A a) {} private B() {} }"),
        ("F.java", "class F { void m(A a) {} }"),
    ]);
    let f = m.type_decl("F").unwrap();
    let t = compute_testing_scope(f, &m);
    let sigs = collect_relevant_constructors(&t[0], &m, ConstructorOptions::default());
    assert_eq!(ctor_sigs(&sigs), ["public F()", "A(B b)", "B(A a)"]);
    assert!(sigs[0].implicit);
}

#[test]
fn auxiliary_methods_examples() {
    let m = model(&[
        (
            "p/Person.java",
            "package p; public class Person { private String name; private int age;\n public void setName(String n){ this.name = n; } public String getName(){ return name; }\n public void age(int a){ age = a; } public int years(){ return age; } public boolean isAdult(){ return age > 17; }\n public void greet(){} public Report report(){ return null; } public void join(Team t){} }",
        ),
        ("p/Report.java", "package p; public class Report { private int total; public int getTotal(){ return total; } public void setTotal(int t){ total = t; } }"),
        ("p/Team.java", "package p; public class Team { public void setLead(Person p){} public String getTitle(){ return null; } }"),
    ]);
    let person = m.type_decl("p.Person").unwrap();
    let scope = compute_testing_scope(person, &m);
    let by_name = |n: &str| scope.iter().find(|t| t.focal_method.name == n).unwrap();
    let names = |cs: &[&polytest_core::code_model::Callable]| cs.iter().map(|c| c.key()).collect::<Vec<_>>();

    let aux = collect_auxiliary_methods(by_name("greet"), &m);
    assert_eq!(names(&aux.setters), ["p.Person#setName(String)", "p.Person#age(int)"]);
    assert_eq!(names(&aux.getters), ["p.Person#getName()", "p.Person#years()", "p.Person#isAdult()"]);

    let aux = collect_auxiliary_methods(by_name("report"), &m);
    assert!(names(&aux.getters).contains(&"p.Report#getTotal()".to_string()));
    assert!(!names(&aux.setters).iter().any(|s| s.starts_with("p.Report")));

    let aux = collect_auxiliary_methods(by_name("join"), &m);
    assert!(names(&aux.setters).contains(&"p.Team#setLead(Person)".to_string()));
    assert!(!names(&aux.getters).iter().any(|s| s.starts_with("p.Team")));
}

#[test]
fn private_chain_examples() {
    let chains = |src: &str| {
        let unit = parse_unit("C.java", src, Language::Java).unwrap();
        let decl = unit.types[0].clone();
        find_private_call_chains(&decl).iter().map(|c| c.path.iter().map(|m| m.name.clone()).collect::<Vec<_>>()).collect::<Vec<_>>()
    };
    assert_eq!(chains("class C { public void p(){ q(); } private void q(){} }"), [vec!["p", "q"]]);
    assert_eq!(
        chains("class C { public void p(){ q(); } private void q(){ r(); } private void r(){ q(); } }"),
        [vec!["p", "q"], vec!["p", "q", "r"]]
    );
    assert!(chains("class C { public void p(){ q(); } void q(){} }").is_empty());
}

const SVC: &str = "package app;\nimport db.Conn;\nimport db.Factory;\nimport db.Request;\nimport db.Util;\nimport db.Socket;\npublic class Svc {\n  private Conn c;\n  private int n;\n  public Svc(Factory f) {}\n  public int handle(Request r) {\n    c.query(r);\n    Util.now();\n    Socket s = new Socket();\n    return 0;\n  }\n  public void idle() {}\n}\n";

#[test]
fn alg_fields_and_types_example() {
    let m = model(&[("app/Svc.java", SVC)]);
    let svc = m.type_decl("app.Svc").unwrap();
    let handle = svc.methods().find(|c| c.name == "handle").unwrap();
    let out = identify_mocked_fields_and_types(handle, svc, &apis(&["db.Conn", "db.Factory", "db.Request"]), &m);
    assert_eq!(out.fields.iter().map(|f| f.name.as_str()).collect::<Vec<_>>(), ["c"]);
    let types: Vec<_> = out.types.iter().map(|t| t.qualified_name.as_str()).collect();
    assert_eq!(types, ["db.Factory", "db.Request"]);

    let empty = identify_mocked_fields_and_types(handle, svc, &TypeAllowlist::default(), &m);
    assert!(empty.fields.is_empty() && empty.types.is_empty());
}

#[test]
fn alg_expands_constructors_of_non_member_types() {
    let m = model(&[
        ("P.java", "class P { P(Q q) {} }"),
        ("Q.java", "class Q {}"),
        ("F.java", "class F { void m(P p) {} }"),
    ]);
    let f = m.type_decl("F").unwrap();
    let out = identify_mocked_fields_and_types(&f.callables[0], f, &apis(&["Q"]), &m);
    assert_eq!(out.types.iter().map(|t| t.qualified_name.as_str()).collect::<Vec<_>>(), ["Q"]);
}

#[test]
fn alg_mocking_scope_example() {
    let m = model(&[("app/Svc.java", SVC)]);
    let svc = m.type_decl("app.Svc").unwrap();
    let handle = svc.methods().find(|c| c.name == "handle").unwrap();
    let allow = apis(&["db.Conn", "db.Util", "db.Socket"]);
    let scope = identify_mocking_scope(handle, svc, &allow, &TypeAllowlist::default(), &m);
    let show = |v: &[&polytest_core::code_model::CallSite]| v.iter().map(|c| c.display()).collect::<Vec<_>>();
    assert_eq!(show(&scope.api_calls), ["c.query(_)"]);
    assert_eq!(show(&scope.static_calls), ["Util.now()"]);
    assert_eq!(show(&scope.constructor_calls), ["new Socket()"]);

    let idle = svc.methods().find(|c| c.name == "idle").unwrap();
    let scope = identify_mocking_scope(idle, svc, &allow, &TypeAllowlist::default(), &m);
    assert!(scope.api_calls.is_empty() && scope.static_calls.is_empty() && scope.constructor_calls.is_empty());
}

#[test]
fn alg_service_entry_branch() {
    let src = "package web;\nimport javax.servlet.http.HttpServlet;\nimport db.Conn;\npublic class Page extends HttpServlet {\n  private Conn c;\n  public void render() {}\n  @Override\n  protected void doGet(Object req, Object resp) { c.query(); }\n}\n";
    let m = model(&[("web/Page.java", src)]);
    let page = m.type_decl("web.Page").unwrap();
    let render = &page.callables[0];
    let allow = apis(&["db.*"]);
    let plain = identify_mocking_scope(render, page, &allow, &TypeAllowlist::default(), &m);
    assert!(plain.api_calls.is_empty());
    let service = apis(&["javax.servlet.http.HttpServlet"]);
    let scoped = identify_mocking_scope(render, page, &allow, &service, &m);
    assert_eq!(scoped.api_calls.len(), 1);
    assert_eq!(scoped.api_calls[0].callee_name, "query");
}

fn plan_for(src: &str, method: &str, allow: &[&str]) -> (CodeModel, MockPlan) {
    let m = model(&[("app/Svc.java", src)]);
    let plan = {
        let svc = m.type_decl("app.Svc").unwrap();
        let t = compute_testing_scope(svc, &m).into_iter().find(|t| t.focal_method.name == method).unwrap();
        plan_mocks(&t, &apis(allow), &TypeAllowlist::default(), &m)
    };
    (m, plan)
}

fn skeleton_parses(text: &str) {
    let unit = parse_unit("SvcTest.java", text, Language::Java);
    assert!(unit.is_ok(), "{text}\n{unit:?}");
}

#[test]
fn skeleton_field_mock_with_api_stub() {
    let (m, plan) = plan_for(SVC, "handle", &["db.Conn"]);
    let svc = m.type_decl("app.Svc").unwrap();
    let t = compute_testing_scope(svc, &m).into_iter().find(|t| t.focal_method.name == "handle").unwrap();
    let sk = build_mock_skeleton(&plan, &t).unwrap();
    assert_eq!(sk.mock_declarations, ["    @Mock\n    private Conn c;\n"]);
    assert_eq!(sk.stub_slots.len(), 1);
    assert_eq!(sk.stub_slots[0].stanza, "when(c.query(any())).thenReturn(/* value */);");
    assert!(sk.text.contains("import db.Conn;"));
    assert!(sk.text.contains("@InjectMocks\n    private Svc svc;"));
    assert!(sk.text.contains(COMPLETION_MARKER));
    skeleton_parses(&sk.fill(""));
    skeleton_parses(&sk.fill("assertEquals(0, svc.handle(null));"));
}

#[test]
fn skeleton_static_only() {
    let (m, plan) = plan_for(SVC, "handle", &["db.Util"]);
    assert!(plan.mockable_fields.is_empty() && plan.mockable_types.is_empty() && plan.api_calls.is_empty());
    let svc = m.type_decl("app.Svc").unwrap();
    let t = compute_testing_scope(svc, &m).into_iter().find(|t| t.focal_method.name == "handle").unwrap();
    let sk = build_mock_skeleton(&plan, &t).unwrap();
    assert_eq!(sk.mock_declarations, ["    private MockedStatic<Util> utilStatic;\n"]);
    assert!(sk.setup_fixture.contains("utilStatic = Mockito.mockStatic(Util.class);"));
    assert!(sk.setup_fixture.contains("utilStatic.close();"));
    assert_eq!(sk.stub_slots.len(), 1);
    skeleton_parses(&sk.fill(""));
}

#[test]
fn skeleton_empty_plan() {
    let (m, plan) = plan_for(SVC, "idle", &[]);
    let svc = m.type_decl("app.Svc").unwrap();
    let t = compute_testing_scope(svc, &m).into_iter().find(|t| t.focal_method.name == "idle").unwrap();
    assert_eq!(build_mock_skeleton(&plan, &t).unwrap_err(), EmptyPlan);
}

#[test]
fn skeleton_full_plan_one_stanza_per_element() {
    let (m, plan) = plan_for(SVC, "handle", &["db.*"]);
    let svc = m.type_decl("app.Svc").unwrap();
    let t = compute_testing_scope(svc, &m).into_iter().find(|t| t.focal_method.name == "handle").unwrap();
    let sk = build_mock_skeleton(&plan, &t).unwrap();
    let stubs = plan.constructor_calls.len() + plan.static_calls.len() + plan.api_calls.len();
    assert_eq!(sk.stub_slots.len(), stubs);
    let mock_stanzas = sk.mock_declarations.iter().filter(|d| d.contains("@Mock")).count();
    assert_eq!(mock_stanzas, plan.mockable_fields.len() + plan.mockable_types.len());
    skeleton_parses(&sk.fill(""));
}

#[test]
fn analyses_are_deterministic_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let project = common::generate(&mut rng);
        let allow = TypeAllowlist::parse(&project.apis_text).unwrap();
        let service = apis(&[common::SERVICE_BASE]);
        let m1 = project.model();
        let m2 = project.model();
        let run = |m: &CodeModel| {
            let focal = m.type_decl(&project.focal_qname()).unwrap();
            let fm = &focal.methods().collect::<Vec<_>>()[project.focal_method];
            let ft = identify_mocked_fields_and_types(fm, focal, &allow, m);
            let sc = identify_mocking_scope(fm, focal, &allow, &service, m);
            let scope_keys: BTreeSet<String> = sc.scope.iter().map(|c| c.key()).collect();
            // every classified call site lies inside a scope member
            for cs in sc.constructor_calls.iter().chain(&sc.static_calls).chain(&sc.api_calls) {
                assert!(sc.scope.iter().any(|mbr| mbr.span.contains(&cs.span)));
            }
            (
                ft.types,
                ft.fields.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
                scope_keys,
                sc.api_calls.iter().map(|c| c.span.start_line).collect::<Vec<_>>(),
            )
        };
        assert_eq!(run(&m1), run(&m2));
    }
}

#[test]
fn alg_and_constructors_match_oracles_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for round in 0..200 {
        let project = common::generate(&mut rng);
        let m = project.model();
        let allow = TypeAllowlist::parse(&project.apis_text).unwrap();
        let service = apis(&[common::SERVICE_BASE]);
        let focal = m.type_decl(&project.focal_qname()).unwrap();
        let fm = focal.methods().nth(project.focal_method).unwrap();
        let ft = identify_mocked_fields_and_types(fm, focal, &allow, &m);
        let got_types: BTreeSet<String> = ft.types.iter().map(|t| t.qualified_name.clone()).collect();
        let got_fields: BTreeSet<String> = ft.fields.iter().map(|f| f.name.clone()).collect();
        assert_eq!(got_types, project.oracle_mocked_types(), "round {round}\n{:#?}", project.sources);
        assert_eq!(got_fields, project.oracle_mocked_fields(), "round {round}");
        let sc = identify_mocking_scope(fm, focal, &allow, &service, &m);
        let lines = |v: &[&polytest_core::code_model::CallSite]| v.iter().map(|c| c.span.start_line).collect::<BTreeSet<_>>();
        let expected = project.oracle_mocking_scope();
        let got = [lines(&sc.constructor_calls), lines(&sc.static_calls), lines(&sc.api_calls)];
        assert_eq!(got, expected, "round {round}\n{}", project.sources[project.focal].1);

        let target = FocalTarget { focal_method: fm, focal_class: focal, inherited_from_abstract: false };
        let sigs = collect_relevant_constructors(&target, &m, ConstructorOptions::default());
        let mut seeds = vec![project.focal];
        seeds.extend(project.types[project.focal].methods[project.focal_method].params.iter().filter_map(|p| match p {
            common::Ty::App(i) => Some(*i),
            _ => None,
        }));
        let got: BTreeSet<String> = sigs.iter().map(|s| s.key.clone()).collect();
        assert_eq!(got, project.oracle_constructor_keys(&seeds), "round {round}");
    }
}
