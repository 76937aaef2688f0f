mod common;

use std::collections::HashMap;
use std::path::PathBuf;

use common::fixtures::fixtures_dir;
use polytest_core::code_model::{parse_unit, CodeModel, CodeUnit, Language};
use polytest_core::naturalness::*;
use proptest::prelude::*;

/// Edit distance by memoized recursion over suffixes.
fn oracle_distance(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    if let Some(d) = memo.get(&(a.len(), b.len())) {
        return *d;
    }
    let d = if a[0] == b[0] {
        oracle_distance(&a[1..], &b[1..], memo)
    } else {
        1 + oracle_distance(&a[1..], b, memo)
            .min(oracle_distance(a, &b[1..], memo))
            .min(oracle_distance(&a[1..], &b[1..], memo))
    };
    memo.insert((a.len(), b.len()), d);
    d
}

fn oracle_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.to_lowercase().chars().collect();
    let b: Vec<char> = b.to_lowercase().chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - oracle_distance(&a, &b, &mut HashMap::new()) as f64 / longest as f64
}

fn oracle_best(word: &str, pool: &[&str]) -> f64 {
    pool.iter().map(|p| oracle_similarity(word, p)).fold(0.0, f64::max)
}

fn naturalness_dir() -> PathBuf {
    fixtures_dir().join("naturalness")
}

fn cli_model() -> CodeModel {
    CodeModel::load_dir(&naturalness_dir().join("cli-project"), Language::Java).unwrap()
}

fn unit(rel: &str) -> CodeUnit {
    let path = naturalness_dir().join(rel);
    let lang = Language::from_path(&path).unwrap();
    parse_unit(rel, &std::fs::read_to_string(&path).unwrap(), lang).unwrap()
}

fn java(src: &str) -> CodeUnit {
    parse_unit("T.java", src, Language::Java).unwrap()
}

fn python(src: &str) -> CodeUnit {
    parse_unit("test_t.py", src, Language::Python).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

// similarity

#[test]
fn levenshtein_known_values() {
    assert_eq!(levenshtein("kitten", "sitting"), 3);
    assert_eq!(levenshtein("", "abc"), 3);
    assert_eq!(levenshtein("flaw", "lawn"), 2);
    assert!(close(similarity("Parser", "parser"), 1.0));
    assert!(close(similarity("", ""), 1.0));
    assert!(close(similarity("abc", ""), 0.0));
}

proptest! {
    #[test]
    fn levenshtein_matches_oracle(a in "[a-dA-D0-9]{0,9}", b in "[a-dA-D0-9]{0,9}") {
        let ca: Vec<char> = a.chars().collect();
        let cb: Vec<char> = b.chars().collect();
        prop_assert_eq!(levenshtein(&a, &b), oracle_distance(&ca, &cb, &mut HashMap::new()));
        prop_assert!(close(similarity(&a, &b), oracle_similarity(&a, &b)));
        let s = similarity(&a, &b);
        prop_assert!((0.0..=1.0).contains(&s));
    }

    #[test]
    fn appending_never_increases_similarity(word in "[a-z]{1,8}", tail in "[a-z0-9]{1,6}") {
        let longer = format!("{word}{tail}");
        prop_assert!(similarity(&longer, &word) <= similarity(&word, &word));
    }

    #[test]
    fn name_scores_are_bounded(name in "[a-zA-Z0-9_]{1,30}", cands in proptest::collection::vec("[a-zA-Z]{1,8}", 0..3)) {
        let ids = vec!["flatten".to_string(), "options".to_string()];
        let s = test_name_score(&name, &cands, &ids, &["IllegalArgumentException".to_string()]);
        prop_assert!((0.0..=1.0).contains(&s.total));
        prop_assert!((0.0..=1.0).contains(&s.token_closeness));
        let focal = if s.focal_match { 0.5 } else { 0.0 };
        prop_assert!(close(s.total, focal + 0.5 * s.token_closeness));
    }
}

#[test]
fn identifiers_split_on_case_digits_and_underscores() {
    assert_eq!(split_identifier("parseXMLFile2"), ["parse", "xml", "file", "2"]);
    assert_eq!(split_identifier("test_addOption_longArgs"), ["test", "add", "option", "long", "args"]);
    assert_eq!(segments("to_minutes"), [vec!["to".to_string()], vec!["minutes".to_string()]]);
}

// test names

#[test]
fn option_test_name_tokenization() {
    let cands = vec!["addOption".to_string()];
    let t = split_test_name("test_addOption_longArgs_throwsException", &cands);
    assert_eq!(t.focal.as_deref(), Some("addOption"));
    assert_eq!(t.tokens, ["long", "args"]);
    assert_eq!(t.merged, ["longargs"]);
    assert_eq!(t.exception_phrases, [vec!["throws".to_string(), "exception".to_string()]]);
    let ids: Vec<String> = ["Options", "addOption", "opt", "longOpt", "hasArg", "description"].map(String::from).to_vec();
    let exc = vec!["IllegalArgumentException".to_string()];
    let s = test_name_score("test_addOption_longArgs_throwsException", &cands, &ids, &exc);
    assert!(s.focal_match);
    let pool: Vec<&str> = ids.iter().chain(&exc).map(String::as_str).collect();
    let expected = (oracle_best("long", &pool) + oracle_best("args", &pool) + oracle_best("longargs", &pool) + 1.0) / 4.0;
    assert!(close(s.token_closeness, expected));
    assert!(close(s.total - 0.5 * s.token_closeness, 0.5));
}

#[test]
fn numbered_name_scores_near_zero() {
    let ids: Vec<String> = ["BasicParser", "flatten", "options", "arguments", "stopAtNonOption"].map(String::from).to_vec();
    let s = test_name_score("test01", &["flatten".to_string()], &ids, &[]);
    assert!(!s.focal_match);
    let pool: Vec<&str> = ids.iter().map(String::as_str).collect();
    assert!(close(s.token_closeness, oracle_best("01", &pool)));
    assert!(s.total < 0.1);
}

#[test]
fn test_plus_focal_name_is_perfect() {
    let s = test_name_score("testFlatten", &["flatten".to_string()], &[], &[]);
    assert!(close(s.total, 1.0));
    let s = test_name_score("test_to_minutes", &["to_minutes".to_string()], &[], &[]);
    assert!(close(s.total, 1.0));
}

#[test]
fn focal_match_is_case_insensitive_and_prefers_longest() {
    let cands = vec!["add".to_string(), "addOption".to_string()];
    let t = split_test_name("testADDOPTIONWorks", &cands);
    assert_eq!(t.focal.as_deref(), Some("addOption"));
    let t = split_test_name("testToMinutesRounds", &["to_minutes".to_string()]);
    assert_eq!(t.tokens, ["rounds"]);
}

// focal methods

#[test]
fn java_focal_methods_come_from_the_named_class() {
    let model = cli_model();
    let u = java(
        "class OptionsTest {\n  @Test void t() {\n    Options o = new Options();\n    o.addOption(\"a\", null, false, \"x\");\n    helper();\n    assertTrue(o.hasOption(\"a\"));\n  }\n  void helper() {}\n}\n",
    );
    assert_eq!(infer_focal_methods(&u, Some(&model), Language::Java), ["addOption", "hasOption"]);
    assert_eq!(focal_class_name("BasicParser_ESTest"), "BasicParser");
    assert_eq!(focal_class_name("TestOptions"), "Options");
}

#[test]
fn python_focal_methods_are_all_called_names() {
    let u = python("from geo.units import to_minutes\n\ndef test_m():\n    assert to_minutes(2) == 120\n");
    assert_eq!(infer_focal_methods(&u, None, Language::Python), ["to_minutes"]);
    let empty = python("def test_nothing():\n    assert True\n");
    assert!(infer_focal_methods(&empty, None, Language::Python).is_empty());
}

// variable names

fn var<'a>(tests: &'a [TestVariables], name: &str) -> &'a VariableScore {
    tests.iter().flat_map(|t| &t.variables).find(|v| v.name == name).unwrap()
}

#[test]
fn descriptive_variable_outscores_numbered_one() {
    let model = cli_model();
    let natural = variable_name_score(&unit("suites/focal-named/BasicParserTest.java"), Some(&model));
    let generated = variable_name_score(&unit("suites/numbered/BasicParser_ESTest.java"), Some(&model));
    let flattened = var(&natural, "flattenedArguments");
    let numbered = var(&generated, "stringArray1");
    let context = ["flatten", "options", "arguments", "stopAtNonOption"];
    assert_eq!(flattened.context, context);
    assert_eq!(numbered.context, context);
    assert_eq!(flattened.group, VarGroup::DataStructure);
    assert!(close(flattened.score, oracle_best("flattenedArguments", &context)));
    assert!(close(numbered.score, oracle_best("stringArray1", &context)));
    assert_eq!(flattened.best_match.as_deref(), Some("arguments"));
    assert!(flattened.score > numbered.score);
}

#[test]
fn type_name_suffix_counts_as_a_full_match() {
    let model = cli_model();
    let natural = variable_name_score(&unit("suites/focal-named/BasicParserTest.java"), Some(&model));
    let parser = var(&natural, "parser");
    assert_eq!(parser.group, VarGroup::Other);
    assert_eq!(parser.type_name.as_deref(), Some("BasicParser"));
    assert!(close(parser.score, 1.0));
}

#[test]
fn variable_named_like_a_parameter_scores_one() {
    let model = cli_model();
    let u = java("class BasicParserTest {\n  @Test void t() {\n    String[] arguments = new BasicParser().flatten(null, null, true);\n  }\n}\n");
    let scores = variable_name_score(&u, Some(&model));
    assert!(close(var(&scores, "arguments").score, 1.0));
}

#[test]
fn tests_without_variables_have_no_score() {
    let u = java("class XTest {\n  @Test void t() {\n    assertTrue(true);\n  }\n}\n");
    let scores = variable_name_score(&u, None);
    assert_eq!(scores.len(), 1);
    assert!(scores[0].score.is_none());
}

#[test]
fn python_variables_use_called_function_context() {
    let model = CodeModel::load_dir(&fixtures_dir().join("python-geo"), Language::Python).unwrap();
    let u = python("from geo.units import to_minutes\nfrom geo.shapes import Circle\n\ndef test_x():\n    minutes = to_minutes(2)\n    circle = Circle(1.0)\n    assert minutes == 120\n");
    let scores = variable_name_score(&u, Some(&model));
    let minutes = var(&scores, "minutes");
    assert_eq!(minutes.context, ["to_minutes", "hours"]);
    assert!(close(minutes.score, oracle_best("minutes", &["to_minutes", "hours"])));
    let circle = var(&scores, "circle");
    assert_eq!(circle.group, VarGroup::Other);
    assert!(close(circle.score, 1.0));
}

// assertion metrics

#[test]
fn five_test_fixture_metrics() {
    let m = assertion_metrics(&unit("assertions/MetricsTest.java")).unwrap();
    assert_eq!(m.tests.len(), 5);
    assert!(close(m.pct_no_assertions, 20.0));
    assert!(close(m.pct_duplicate_assertions, 25.0));
    assert!(close(m.pct_null_assertions, 25.0));
    assert!(close(m.pct_exception_assertions, 25.0));
    let ratios: Vec<(usize, usize)> = m.tests.iter().map(|t| (t.assertions, t.statements)).collect();
    assert_eq!(ratios, [(0, 2), (2, 3), (1, 2), (1, 2), (2, 4)]);
    assert!(close(m.assertion_ratio, (0.0 + 2.0 / 3.0 + 0.5 + 0.5 + 0.5) / 5.0));
}

#[test]
fn ratio_of_two_in_five() {
    let u = java("class XTest {\n  @Test void t() {\n    int a = 1;\n    int b = 2;\n    a++;\n    assertEquals(1, a - b + 2);\n    assertTrue(b > a);\n  }\n}\n");
    let m = assertion_metrics(&u).unwrap();
    assert!(close(m.tests[0].ratio(), 0.4));
}

#[test]
fn denominator_excludes_tests_without_assertions() {
    let u = java("class XTest {\n  @Test void none() {\n    int a = 1;\n  }\n  @Test void one() {\n    assertNull(null);\n  }\n}\n");
    let m = assertion_metrics(&u).unwrap();
    assert!(close(m.pct_no_assertions, 50.0));
    assert!(close(m.pct_null_assertions, 100.0));
}

#[test]
fn duplicates_ignore_whitespace() {
    let u = java("class XTest {\n  @Test void t() {\n    assertEquals(a,b);\n    assertEquals(a, b);\n  }\n}\n");
    assert!(assertion_metrics(&u).unwrap().tests[0].has_duplicate);
}

#[test]
fn python_assertion_forms() {
    let u = python(
        "import pytest\n\ndef test_none():\n    x = f()\n    assert x is None\n\ndef test_raise():\n    with pytest.raises(ValueError):\n        f(-1)\n\ndef test_plain():\n    assert f() == 2\n    assert f() == 2\n\ndef test_empty():\n    f()\n",
    );
    let m = assertion_metrics(&u).unwrap();
    let flags: Vec<(bool, bool, bool)> = m.tests.iter().map(|t| (t.has_null, t.has_exception, t.has_duplicate)).collect();
    assert_eq!(flags, [(true, false, false), (false, true, false), (false, false, true), (false, false, false)]);
    assert!(close(m.pct_no_assertions, 25.0));
    assert_eq!(m.tests[1].statements, 2);
}

#[test]
fn junit4_expected_exception_counts() {
    let u = java("class XTest {\n  @Test(expected = IllegalStateException.class)\n  public void t() {\n    run();\n  }\n}\n");
    let m = assertion_metrics(&u).unwrap();
    assert_eq!(m.tests[0].assertions, 1);
    assert!(m.tests[0].has_exception);
}

#[test]
fn file_without_tests_is_rejected() {
    let u = java("class Helper { void x() {} }\n");
    assert_eq!(assertion_metrics(&u), Err(NotATestFile("T.java".into())));
}

// reports

fn projects() -> Projects {
    Projects {
        java: Some(cli_model()),
        python: Some(CodeModel::load_dir(&fixtures_dir().join("python-geo"), Language::Python).unwrap()),
    }
}

#[test]
fn numbered_suite_scores_lower_than_focal_named() {
    let dir = naturalness_dir().join("suites");
    let suites = vec![("focal".to_string(), dir.join("focal-named")), ("numbered".to_string(), dir.join("numbered"))];
    let report = naturalness_report(&suites, &projects()).unwrap();
    let focal = &report.suites[0].aggregates;
    let numbered = &report.suites[1].aggregates;
    assert_eq!((focal.tests, numbered.tests), (4, 4));
    assert!(numbered.name_score < focal.name_score, "{} vs {}", numbered.name_score, focal.name_score);
    assert!(numbered.var_score < focal.var_score);
}

#[test]
fn aggregates_are_means_of_constituents() {
    let dir = naturalness_dir().join("suites");
    let report = naturalness_report(&[("f".to_string(), dir.join("focal-named"))], &projects()).unwrap();
    let s = &report.suites[0];
    let names: Vec<f64> = s.files.iter().flat_map(|f| f.tests.iter().map(|t| t.name_score.total)).collect();
    assert!(close(s.aggregates.name_score, names.iter().sum::<f64>() / names.len() as f64));
    let ratios: Vec<f64> = s.files.iter().map(|f| f.assertion_metrics.assertion_ratio).collect();
    assert!(close(s.aggregates.assertion_ratio, ratios.iter().sum::<f64>() / ratios.len() as f64));
}

#[test]
fn mixed_suite_is_partitioned_by_language() {
    let dir = naturalness_dir().join("suites/mixed");
    let report = naturalness_report(&[("mixed".to_string(), dir)], &projects()).unwrap();
    let s = &report.suites[0];
    assert_eq!(s.by_language.len(), 2);
    assert_eq!(s.by_language[&Language::Java].files, 1);
    assert_eq!(s.by_language[&Language::Python].tests, 2);
    let py = s.files.iter().find(|f| f.language == Language::Python).unwrap();
    assert_eq!(py.tests[0].focal_candidates, ["to_minutes"]);
    assert!(py.tests[0].name_score.focal_match);
}

#[test]
fn empty_suite_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let report = naturalness_report(&[("e".to_string(), dir.path().to_path_buf())], &Projects::default()).unwrap();
    assert!(report.suites[0].empty);
    assert_eq!(report.suites[0].aggregates, Aggregates::default());
}

#[test]
fn missing_suite_dir_is_an_io_error() {
    let err = naturalness_report(&[("x".to_string(), PathBuf::from("/nonexistent/suite"))], &Projects::default());
    assert!(matches!(err, Err(NaturalnessError::Io { .. })));
}

#[test]
fn reports_are_deterministic() {
    let dir = naturalness_dir().join("suites");
    let suites = vec![("a".to_string(), dir.join("numbered")), ("b".to_string(), dir.join("mixed"))];
    let one = serde_json::to_string(&naturalness_report(&suites, &projects()).unwrap()).unwrap();
    let two = serde_json::to_string(&naturalness_report(&suites, &projects()).unwrap()).unwrap();
    assert_eq!(one, two);
}
