use std::collections::BTreeSet;

use proptest::prelude::*;

use wasmsmell::checkers::{check_function, CheckerSet, CHECKERS};
use wasmsmell::engine::{Budget, BudgetReport};
use wasmsmell::flow::resolve_with_globals;
use wasmsmell::frontend::SourceUnit;

type Key = (String, u32, u32, String);

fn run(src: &str, set: &CheckerSet, budget: Budget) -> (Vec<Key>, BudgetReport) {
    let su = SourceUnit::parse(src.as_bytes());
    let mut keys = vec![];
    let mut report = BudgetReport::default();
    for f in su.functions() {
        let table = resolve_with_globals(&su.unit, f);
        let r = check_function(f, &table, set, &[], budget);
        report.merge(&r.report);
        keys.extend(
            r.findings
                .into_iter()
                .map(|f| (f.checker, f.span.line, f.span.column, f.message)),
        );
    }
    (keys, report)
}

fn simple_stmt() -> impl Strategy<Value = String> {
    let d = 0..2usize;
    prop_oneof![
        d.clone().prop_map(|i| format!("d{i} = malloc(8);")),
        d.clone().prop_map(|i| format!("free(d{i});")),
        d.clone().prop_map(|i| format!("d{i}++;")),
        d.clone()
            .prop_map(|i| format!("f{i} = fopen(\"x\", \"r\");")),
        d.clone().prop_map(|i| format!("fclose(f{i});")),
        d.clone()
            .prop_map(|i| format!("printf(\"%s %d\\n\", d{i});")),
        Just("e = getenv(\"HOME\");".to_string()),
        d.clone()
            .prop_map(|i| format!("if (fputs(\"s\", f{i}) == 0) n = 1;")),
        Just("wprintf(L\"%ls\", L\"w\");".to_string()),
        Just("fwide(stdout, 1);".to_string()),
        Just("n = u + 1;".to_string()),
        Just("u = 2;".to_string()),
        Just("n = d0 - d1;".to_string()),
        d.prop_map(|i| format!("d{i} = alloca(4);")),
    ]
}

fn stmt() -> impl Strategy<Value = String> {
    simple_stmt().prop_recursive(3, 12, 3, |inner| {
        let body = prop::collection::vec(inner, 1..3).prop_map(|v| v.join(" "));
        prop_oneof![
            (0..3usize, body.clone()).prop_map(|(c, b)| format!("if (c{c}) {{ {b} }}")),
            (0..3usize, body.clone(), body.clone())
                .prop_map(|(c, b, e)| format!("if (c{c}) {{ {b} }} else {{ {e} }}")),
            (0..2usize, body.clone()).prop_map(|(i, b)| format!("if (d{i} != NULL) {{ {b} }}")),
            (0..2usize, body.clone()).prop_map(|(i, b)| format!("if (!f{i}) {{ {b} }}")),
            (0..3usize, body).prop_map(|(c, b)| format!("while (c{c}) {{ {b} }}")),
        ]
    })
}

/// One statement per line so findings keep their lines under reformatting.
fn program() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(stmt(), 1..8)
}

fn render(stmts: &[String], indent: &str) -> String {
    let mut s = String::from("void f(int c0, int c1, int c2) {\n");
    s += &format!(
        "{indent}char *d0 = 0; char *d1 = 0; FILE *f0 = 0; FILE *f1 = 0; char *e; int n; int u;\n"
    );
    for st in stmts {
        s += &format!("{indent}{st}\n");
    }
    s += "}\n";
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn analysis_is_deterministic(p in program(), k in 1usize..64) {
        let src = render(&p, "    ");
        let budget = Budget { max_paths: k, unroll: 2 };
        prop_assert_eq!(run(&src, &CheckerSet::all(), budget), run(&src, &CheckerSet::all(), budget));
    }

    #[test]
    fn paths_within_budget(p in program(), k in 1usize..64) {
        let (_, r) = run(&render(&p, "    "), &CheckerSet::all(), Budget { max_paths: k, unroll: 2 });
        prop_assert!(r.paths_completed + r.paths_truncated <= k);
        if r.exhausted {
            prop_assert_eq!(r.paths_completed + r.paths_truncated, k);
        }
    }

    #[test]
    fn budget_is_monotone(p in program(), k in 1usize..48) {
        let src = render(&p, "    ");
        let set = CheckerSet::all();
        let (a, _) = run(&src, &set, Budget { max_paths: k, unroll: 2 });
        let (b, _) = run(&src, &set, Budget { max_paths: k + 1, unroll: 2 });
        let (a, b): (BTreeSet<_>, BTreeSet<_>) = (a.into_iter().collect(), b.into_iter().collect());
        prop_assert!(a.is_subset(&b), "{:?} not within {:?}", a, b);
    }

    #[test]
    fn disabling_removes_only_that_checker(p in program(), which in 0usize..13) {
        let src = render(&p, "    ");
        let id = CHECKERS[which].id;
        let mut set = CheckerSet::all();
        set.disable(id).unwrap();
        let (all, _) = run(&src, &CheckerSet::all(), Budget::default());
        let (without, _) = run(&src, &set, Budget::default());
        let expect: Vec<Key> = all.into_iter().filter(|k| k.0 != id).collect();
        prop_assert_eq!(without, expect);
    }

    #[test]
    fn stable_under_indentation(p in program(), indent in "[ \t]{0,6}") {
        let line_keys = |src: &str| -> Vec<(String, u32)> {
            run(src, &CheckerSet::all(), Budget::default()).0.into_iter().map(|k| (k.0, k.1)).collect()
        };
        prop_assert_eq!(line_keys(&render(&p, "")), line_keys(&render(&p, &indent)));
    }

    #[test]
    fn single_loop_paths(u in 0u32..6) {
        let (_, r) = run(
            "void f(int c) { int a = 0; while (c) { a = a + 1; } }",
            &CheckerSet::none(),
            Budget { max_paths: 4096, unroll: u },
        );
        prop_assert_eq!(r.paths_completed, u as usize + 1);
    }
}
