//! Acceptance suite: one PASS/FAIL line per criterion over the eleven
//! servant grammars of the functional-language case study.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use gramconv::anf::normalize;
use gramconv::bgf::{canonical_eq, parse_bgf, Grammar};
use gramconv::cli::full_script;
use gramconv::converge::{converge, trigger_mutations, verify, ConvergenceResult};
use gramconv::prodsig::match_grammars;
use gramconv::xbgf::{apply_step, invert_step, StepKind};
use rand::rngs::StdRng;
use rand::SeedableRng;

use common::{load, master, oracle, random_anf, random_bgf, perturbed_servant, SERVANTS};

/// Grammars in ANF after mutation and normalization.
const ANF: [(&str, &str); 11] = [
    ("antlr", "program : function+ ; function : ID ID+ expr NEWLINE+ ;
        expr : ID ; expr : INT ; expr : expr_1 ; expr : expr_2 ; expr : expr_3 ;
        expr_1 : expr ops expr ; expr_2 : ID expr+ ; expr_3 : expr expr expr ;"),
    ("dcg", "program : function+ ; function : name name+ expr newline+ ;
        expr : int ; expr : name ; expr : expr_1 ; expr : expr_2 ; expr : expr_3 ;
        expr_1 : expr ops expr ; expr_2 : name expr+ ; expr_3 : expr expr expr ;"),
    ("emf", "Expr : Expr_1 ; Expr : str ; Expr : Expr_2 ; Expr : Expr_3 ; Expr : int ;
        Function : str str+ Expr ; ProgramType : Function+ ;
        Expr_1 : str Expr+ ; Expr_2 : Ops Expr Expr ; Expr_3 : Expr Expr Expr ;"),
    ("jaxb", "Expr : Expr_1 ; Expr : str ; Expr : Expr_2 ; Expr : Expr_3 ; Expr : int ;
        Function : str str* Expr ; Program : Function* ;
        Expr_1 : str Expr* ; Expr_2 : Ops Expr Expr ; Expr_3 : Expr Expr Expr ;"),
    ("om", "Expr : Expr_1 ; Expr : str ; Expr : Expr_2 ; Expr : Expr_3 ; Expr : int ;
        Function : str str* Expr ; Program : Function* ;
        Expr_1 : str Expr* ; Expr_2 : Ops Expr Expr ; Expr_3 : Expr Expr Expr ;"),
    ("python", "_Literal : Literal ;
        expr : int ; expr : str ; expr : expr_1 ; expr : expr_2 ; expr : expr_3 ;
        function : str str+ expr ; program : function+ StringEnd ;
        expr_1 : _IF expr _THEN expr _ELSE expr ; expr_2 : expr operators expr ;
        expr_3 : str expr+ ;"),
    ("rascal-a", "FLPrg : FLFun* ; FLFun : str str* FLExpr ;
        FLExpr : FLExpr_1 ; FLExpr : FLExpr_2 ; FLExpr : FLExpr_3 ; FLExpr : str ; FLExpr : int ;
        FLExpr_1 : FLExpr FLOp FLExpr ; FLExpr_2 : str FLExpr* ;
        FLExpr_3 : FLExpr FLExpr FLExpr ;"),
    ("rascal-c", "Program : Function+ ;
        Expr : Expr_1 ; Expr : Int ; Expr : Name ; Expr : Expr_2 ; Expr : Expr_3 ;
        Function : Name Name+ Expr ; Expr_1 : Expr Expr Expr ; Expr_2 : Expr Ops Expr ;
        Expr_3 : Name Expr+ ;"),
    ("sdf", "Program : Function+ ; Function : Name Name+ Expr Newline+ ;
        Expr : Expr_1 ; Expr : Expr_2 ; Expr : Expr_3 ; Expr : Name ; Expr : Int ;
        Expr_1 : Expr Ops Expr ; Expr_2 : Name Expr+ ; Expr_3 : Expr Expr Expr ;"),
    ("txl", "program : fun+ ; fun : id id+ expression newline ;
        expression : expression_1 ; expression : expression_2 ; expression : expression_3 ;
        expression : id ; expression : number ;
        expression_1 : expression op expression ; expression_2 : id expression+ ;
        expression_3 : expression expression expression ;"),
    ("xsd", "Program : Function+ ; Fragment : Expr ; Function : str str+ Expr ;
        Expr : int ; Expr : str ; Expr : Expr_1 ; Expr : Expr_2 ; Expr : Expr_3 ;
        Expr_1 : Ops Expr Expr ; Expr_2 : Expr Expr Expr ; Expr_3 : str Expr+ ;"),
];

/// Nominal mappings; `w` stands for ω.
const MAPPINGS: [(&str, &str); 11] = [
    ("antlr", "program:program expr_3:conditional expr_1:binary function:function ID:str
        expr:expression INT:int ops:operator NEWLINE:w expr_2:apply"),
    ("dcg", "program:program expr_3:conditional expr_1:binary function:function name:str
        expr:expression int:int ops:operator newline:w expr_2:apply"),
    ("emf", "Expr_2:binary ProgramType:program Expr_3:conditional str:str int:int
        Function:function Expr:expression Expr_1:apply Ops:operator"),
    ("jaxb", "Expr_2:binary Program:program Expr_3:conditional str:str int:int
        Function:function Expr:expression Expr_1:apply Ops:operator"),
    ("om", "Expr_2:binary Program:program Expr_3:conditional str:str int:int
        Function:function Expr:expression Expr_1:apply Ops:operator"),
    ("python", "expr_2:binary program:program function:function expr_1:conditional
        expr:expression str:str int:int StringEnd:w _ELSE:w _IF:w _THEN:w expr_3:apply
        operators:operator"),
    ("rascal-a", "FLFun:function FLExpr_2:apply FLPrg:program FLExpr:expression int:int
        str:str FLExpr_3:conditional FLOp:operator FLExpr_1:binary"),
    ("rascal-c", "Expr_2:binary Int:int Expr_1:conditional Function:function Program:program
        Name:str Expr_3:apply Expr:expression Ops:operator"),
    ("sdf", "Expr_3:conditional Int:int Expr_1:binary Newline:w Function:function
        Program:program Name:str Expr:expression Ops:operator Expr_2:apply"),
    ("txl", "program:program expression_2:apply fun:function expression:expression id:str
        expression_1:binary op:operator number:int newline:w expression_3:conditional"),
    ("xsd", "Expr_1:binary str:str int:int Expr_2:conditional Function:function
        Program:program Expr_3:apply Expr:expression Ops:operator"),
];

/// Structural steps by kind.
const STRUCTURAL: [(&str, &[(StepKind, usize)]); 11] = [
    ("antlr", &[(StepKind::Project, 1)]),
    ("dcg", &[(StepKind::Project, 1)]),
    ("emf", &[(StepKind::Permute, 1)]),
    ("jaxb", &[(StepKind::Narrow, 3), (StepKind::Permute, 1)]),
    ("om", &[(StepKind::Narrow, 3), (StepKind::Permute, 1)]),
    ("python", &[(StepKind::Project, 4), (StepKind::Eliminate, 1)]),
    ("rascal-a", &[(StepKind::Narrow, 3)]),
    ("rascal-c", &[]),
    ("sdf", &[(StepKind::Project, 1)]),
    ("txl", &[(StepKind::Project, 1)]),
    ("xsd", &[(StepKind::Reroot, 1), (StepKind::Eliminate, 1), (StepKind::Permute, 1)]),
];

const RANDOM_CASES: u64 = 100;

type Outcome = Result<(), String>;

fn production_multiset(g: &Grammar) -> Vec<String> {
    let mut v: Vec<String> = g.productions.iter().map(|p| p.to_string()).collect();
    v.sort();
    v
}

fn runs() -> Result<BTreeMap<&'static str, ConvergenceResult>, String> {
    let m = master();
    SERVANTS
        .iter()
        .map(|&name| {
            converge(&load(name), &m)
                .map(|r| (name, r))
                .map_err(|e| format!("{name}: {e}"))
        })
        .collect()
}

fn anf_tables(runs: &BTreeMap<&str, ConvergenceResult>) -> Outcome {
    for (name, text) in ANF {
        let expected = parse_bgf(text).map_err(|e| format!("{name}: {e}"))?;
        let got = &runs[name].anf;
        if production_multiset(got) != production_multiset(&expected) {
            return Err(format!("{name}: got\n{got}"));
        }
    }
    Ok(())
}

fn mappings(runs: &BTreeMap<&str, ConvergenceResult>) -> Outcome {
    for (name, text) in MAPPINGS {
        let expected: BTreeSet<(String, Option<String>)> = text
            .split_whitespace()
            .map(|pair| {
                let (s, t) = pair.split_once(':').expect("servant:master");
                (s.to_string(), (t != "w").then(|| t.to_string()))
            })
            .collect();
        let got: BTreeSet<(String, Option<String>)> =
            runs[name].mapping().pairs.iter().cloned().collect();
        if got != expected {
            return Err(format!("{name}: got {got:?}"));
        }
    }
    Ok(())
}

fn structural(runs: &BTreeMap<&str, ConvergenceResult>) -> Outcome {
    for (name, expected) in STRUCTURAL {
        let mut got: BTreeMap<StepKind, usize> = BTreeMap::new();
        for s in &runs[name].structural {
            *got.entry(s.kind()).or_default() += 1;
        }
        let expected: BTreeMap<StepKind, usize> = expected.iter().copied().collect();
        if got != expected {
            return Err(format!("{name}: got {got:?}"));
        }
    }
    Ok(())
}

fn verified(runs: &BTreeMap<&str, ConvergenceResult>) -> Outcome {
    let m = master();
    for (name, r) in runs {
        if !verify(r, &m) || !canonical_eq(&r.final_grammar, &m) {
            return Err(format!("{name}: final grammar\n{}", r.final_grammar));
        }
    }
    Ok(())
}

fn step_inversion(runs: &BTreeMap<&str, ConvergenceResult>) -> Outcome {
    for (name, r) in runs {
        let mut g = r.source.clone();
        for (k, s) in full_script(r).iter().enumerate() {
            let at = || format!("{name} step {k} ({})", s.kind().name());
            let (next, done) = apply_step(&g, s).map_err(|e| format!("{}: {e}", at()))?;
            let inverse = invert_step(&done).map_err(|e| format!("{}: {e}", at()))?;
            let (back, _) = apply_step(&next, &inverse).map_err(|e| format!("{}: inverse {e}", at()))?;
            if !canonical_eq(&back, &g) {
                return Err(format!("{}: inverse does not restore", at()));
            }
            let (again, _) = apply_step(&back, &done).map_err(|e| format!("{}: reapply {e}", at()))?;
            if !canonical_eq(&again, &next) {
                return Err(format!("{}: reapplication differs", at()));
            }
            g = next;
        }
    }
    Ok(())
}

fn agrees_with_oracle(servant: &Grammar, master: &Grammar) -> Outcome {
    let best = oracle::best_strong_count(servant, master);
    match (match_grammars(servant, master), best) {
        (Ok(r), Some(best)) => {
            let strong = oracle::check_assignment(servant, master, &r)?;
            if strong != best {
                return Err(format!("strong count {strong}, oracle {best}"));
            }
            Ok(())
        }
        (Err(_), None) => Ok(()),
        (Ok(_), None) => Err("matched where the oracle finds no assignment".into()),
        (Err(e), Some(best)) => Err(format!("{e}; oracle finds {best} strong")),
    }
}

fn matching_oracle() -> Outcome {
    let m = master();
    for name in SERVANTS {
        let (mutated, _) = trigger_mutations(&load(name)).map_err(|e| e.to_string())?;
        let anf = normalize(&mutated).map_err(|e| e.to_string())?.grammar;
        agrees_with_oracle(&anf, &m).map_err(|e| format!("{name}: {e}"))?;
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    for case in 0..RANDOM_CASES {
        let master = random_anf(&mut rng, 6);
        let servant = if case % 4 == 3 {
            random_anf(&mut rng, 8)
        } else {
            perturbed_servant(&mut rng, &master, 8)
        };
        agrees_with_oracle(&servant, &master)
            .map_err(|e| format!("case {case}: {e}\nservant:\n{servant}master:\n{master}"))?;
    }
    Ok(())
}

fn idempotent(g: &Grammar) -> Outcome {
    let once = normalize(g).map_err(|e| format!("{e}\n{g}"))?.grammar;
    let twice = normalize(&once).map_err(|e| format!("second pass: {e}"))?.grammar;
    if canonical_eq(&once, &twice) {
        Ok(())
    } else {
        Err(format!("not idempotent on\n{g}"))
    }
}

fn normalization_idempotent() -> Outcome {
    for name in SERVANTS.iter().chain(&["master"]) {
        idempotent(&load(name)).map_err(|e| format!("{name}: {e}"))?;
    }
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    for case in 0..RANDOM_CASES {
        idempotent(&random_bgf(&mut rng, 8)).map_err(|e| format!("case {case}: {e}"))?;
    }
    Ok(())
}

fn master_onto_itself() -> Outcome {
    let m = master();
    let r = converge(&m, &m).map_err(|e| e.to_string())?;
    if !r.mutations.is_empty() || !r.renames.is_empty() || !r.structural.is_empty() {
        return Err("nonempty scripts".into());
    }
    if !verify(&r, &m) {
        return Err("verify is false".into());
    }
    Ok(())
}

fn main() {
    let start = Instant::now();
    let runs = runs();
    let with_runs = |f: fn(&BTreeMap<&str, ConvergenceResult>) -> Outcome| -> Outcome {
        match &runs {
            Ok(r) => f(r),
            Err(e) => Err(e.clone()),
        }
    };
    let criteria: Vec<(&str, Outcome)> = vec![
        ("ANF tables reproduced for all servants", with_runs(anf_tables)),
        ("nominal mappings equal the expected pairs", with_runs(mappings)),
        ("structural step multisets", with_runs(structural)),
        ("every convergence verifies", with_runs(verified)),
        ("apply, invert, apply restores every step", with_runs(step_inversion)),
        ("matching agrees with the brute-force oracle", matching_oracle()),
        ("normalization is idempotent", normalization_idempotent()),
        ("master converges onto itself trivially", master_onto_itself()),
    ];
    let mut failed = 0;
    for (k, (title, outcome)) in criteria.iter().enumerate() {
        match outcome {
            Ok(()) => println!("criterion {}: PASS  {title}", k + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL  {title}\n    {}", k + 1, e.replace('\n', "\n    "));
            }
        }
    }
    println!("acceptance: {} of {} passed in {:.2?}", criteria.len() - failed, criteria.len(), start.elapsed());
    if failed > 0 {
        std::process::exit(1);
    }
}
