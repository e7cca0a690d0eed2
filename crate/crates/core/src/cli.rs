//! Command-line front end of the `gramconv` binary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Parser, Subcommand};

use crate::anf::{is_anf, normalize};
use crate::bgf::{canonical_eq, parse_bgf, render_production, serialize_bgf, Grammar};
use crate::converge::{converge, verify, ConvergenceResult};
use crate::prodsig::{match_grammars, production_signature};
use crate::report::{generate_report, ReportOptions};
use crate::xbgf::{apply_script, invert_script, parse_script, render_step, serialize_script, Script};

#[derive(Debug, Parser)]
#[command(name = "gramconv", version, about = "Guided grammar convergence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a grammar (BGF text by default).
    Show {
        file: PathBuf,
        #[arg(long, conflicts_with = "notation")]
        json: bool,
        /// One `p(label, lhs, rhs)` line per production.
        #[arg(long)]
        notation: bool,
    },
    /// Normalize to ANF; the trace is printed as comments.
    Normalize {
        file: PathBuf,
        /// Only test whether the grammar is already in ANF (exit 0 or 1).
        #[arg(long)]
        check: bool,
    },
    /// Production signatures of the grammar in ANF.
    Sig { file: PathBuf },
    /// Match a servant grammar against a master grammar.
    Match {
        servant: PathBuf,
        master: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Converge a servant grammar (or every grammar in a directory) onto the master.
    ///
    /// Takes `SERVANT MASTER`, or only `MASTER` together with `--all DIR`.
    Converge {
        #[arg(value_name = "GRAMMAR", num_args = 1..=2, required = true)]
        paths: Vec<PathBuf>,
        /// Converge every `.bgf` file of this directory except the master.
        #[arg(long, value_name = "DIR")]
        all: Option<PathBuf>,
        /// Write the full script (single run) to this file.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// With `--all`, stop reporting at the first grammar that fails.
        #[arg(long)]
        fail_fast: bool,
    },
    /// Apply a script to a grammar.
    Apply {
        grammar: PathBuf,
        script: PathBuf,
        /// Apply the script and then its inverse.
        #[arg(long)]
        roundtrip: bool,
    },
    /// Compare two grammars up to production order.
    Diff { left: PathBuf, right: PathBuf },
    /// Markdown report of a convergence run.
    Report {
        servant: PathBuf,
        master: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        show_noop_renames: bool,
    },
}

/// Failure with its exit code: 1 for domain failures, 2 for usage or I/O.
struct Failure {
    code: i32,
    phase: &'static str,
    detail: String,
}

fn domain(phase: &'static str, detail: impl ToString) -> Failure {
    Failure {
        code: 1,
        phase,
        detail: detail.to_string(),
    }
}

fn io(detail: impl ToString) -> Failure {
    Failure {
        code: 2,
        phase: "io",
        detail: detail.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io(format!("{}: {e}", path.display())))
}

/// Reads BGF text, or JSON when the file ends in `.json`.
pub fn load_grammar(path: &Path) -> Result<Grammar, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        Grammar::from_json_str(&text)
    } else {
        parse_bgf(&text)
    };
    parsed.map_err(|e| format!("{}: {e}", path.display()))
}

fn grammar(path: &Path) -> Result<Grammar, Failure> {
    read(path)?;
    load_grammar(path).map_err(|e| Failure {
        code: 2,
        phase: "parse",
        detail: e,
    })
}

fn in_anf(g: Grammar) -> Result<Grammar, Failure> {
    if is_anf(&g) {
        Ok(g)
    } else {
        normalize(&g)
            .map(|a| a.grammar)
            .map_err(|e| domain("normalize", e))
    }
}

fn color() -> bool {
    std::env::var("GRAMCONV_COLOR").is_ok_and(|v| v == "1")
}

fn paint(text: &str, ok: bool) -> String {
    if color() {
        format!("\x1b[{}m{text}\x1b[0m", if ok { 32 } else { 31 })
    } else {
        text.to_string()
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io(format!("{}: {e}", path.display())))
}

pub fn full_script(r: &ConvergenceResult) -> Script {
    [&r.mutations, &r.normalization, &r.renames, &r.structural]
        .into_iter()
        .flatten()
        .cloned()
        .collect()
}

fn summary(name: &str, r: &ConvergenceResult, ok: bool) -> String {
    format!(
        "{name}: {} mutations={} normalization={} renames={} structural={}",
        paint(if ok { "PASS" } else { "FAIL" }, ok),
        r.mutations.len(),
        r.normalization.len(),
        r.renames.len(),
        r.structural.len()
    )
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn converge_all(
    dir: &Path,
    master_path: &Path,
    fail_fast: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let master = grammar(master_path)?;
    let master_canonical = std::fs::canonicalize(master_path).ok();
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "bgf"))
        .filter(|p| std::fs::canonicalize(p).ok() != master_canonical)
        .collect();
    files.sort();
    let stop = AtomicBool::new(false);
    let lines: Vec<(String, bool)> = std::thread::scope(|scope| {
        let handles: Vec<_> = files
            .iter()
            .map(|path| {
                let (master, stop) = (&master, &stop);
                scope.spawn(move || {
                    let name = stem(path);
                    if stop.load(Ordering::Relaxed) {
                        return (format!("{name}: skipped"), false);
                    }
                    let outcome = load_grammar(path).and_then(|g| {
                        converge(&g, master).map_err(|e| e.to_string())
                    });
                    let line = match outcome {
                        Ok(r) => {
                            let ok = verify(&r, master);
                            (summary(&name, &r, ok), ok)
                        }
                        Err(e) => (format!("{name}: {} {e}", paint("FAIL", false)), false),
                    };
                    if !line.1 && fail_fast {
                        stop.store(true, Ordering::Relaxed);
                    }
                    line
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| ("worker panicked".into(), false)))
            .collect()
    });
    let mut failed = 0;
    for (line, ok) in &lines {
        let _ = writeln!(out, "{line}");
        failed += usize::from(!ok);
        if !ok && fail_fast {
            break;
        }
    }
    if failed > 0 {
        Err(domain("converge", format!("{failed} of {} grammars did not converge", lines.len())))
    } else {
        Ok(())
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Show {
            file,
            json,
            notation,
        } => {
            let g = grammar(&file)?;
            let text = if json {
                serde_json::to_string_pretty(&g.to_json()).expect("json value") + "\n"
            } else if notation {
                let mut s = format!("roots: {}\n", g.roots.join(" "));
                for p in &g.productions {
                    s.push_str(&render_production(p));
                    s.push('\n');
                }
                s
            } else {
                serialize_bgf(&g)
            };
            let _ = out.write_all(text.as_bytes());
        }
        Command::Normalize { file, check } => {
            let g = grammar(&file)?;
            if check {
                let anf = is_anf(&g);
                let _ = writeln!(out, "{}", if anf { "ANF" } else { "not ANF" });
                if !anf {
                    return Err(domain("normalize", "grammar is not in ANF"));
                }
                return Ok(());
            }
            let a = normalize(&g).map_err(|e| domain("normalize", e))?;
            for s in &a.trace {
                let _ = writeln!(out, "# {}", render_step(s));
            }
            let _ = out.write_all(serialize_bgf(&a.grammar).as_bytes());
        }
        Command::Sig { file } => {
            let g = in_anf(grammar(&file)?)?;
            let mut rows: Vec<(String, String, String)> = Vec::new();
            for p in &g.productions {
                let sig = production_signature(p).map_err(|e| domain("sig", e))?;
                rows.push((p.lhs.clone(), sig.to_string(), render_production(p)));
            }
            rows.sort();
            for (_, sig, p) in rows {
                let _ = writeln!(out, "{p}  =>  {sig}");
            }
        }
        Command::Match {
            servant,
            master,
            json,
        } => {
            let s = in_anf(grammar(&servant)?)?;
            let m = grammar(&master)?;
            let r = match_grammars(&s, &m).map_err(|e| domain("match", e))?;
            if json {
                let matches: Vec<serde_json::Value> = r
                    .matches
                    .iter()
                    .map(|x| {
                        serde_json::json!({
                            "servant": render_production(&x.servant),
                            "servant_lhs": x.servant.lhs,
                            "master": x.master.as_ref().map(render_production),
                            "master_lhs": x.master.as_ref().map(|q| q.lhs.clone()),
                            "kind": x.kind.as_ref().map(|k| if k.is_strong() { "strong" } else { "weak" }),
                        })
                    })
                    .collect();
                let mapping: Vec<serde_json::Value> = r
                    .mapping
                    .pairs
                    .iter()
                    .map(|(a, b)| serde_json::json!({ "servant": a, "master": b }))
                    .collect();
                let doc = serde_json::json!({ "matches": matches, "mapping": mapping });
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json value"));
            } else {
                for x in &r.matches {
                    match (&x.master, &x.kind) {
                        (Some(q), Some(k)) => {
                            let _ = writeln!(
                                out,
                                "{} {} {}",
                                render_production(&x.servant),
                                k.symbol(),
                                render_production(q)
                            );
                        }
                        _ => {
                            let _ = writeln!(out, "{} ∅", render_production(&x.servant));
                        }
                    }
                }
                for (a, b) in &r.mapping.pairs {
                    let _ = writeln!(out, "{a} -> {}", b.as_deref().unwrap_or("ω"));
                }
            }
        }
        Command::Converge {
            paths,
            all,
            output,
            fail_fast,
        } => {
            let usage = |detail: &str| Failure {
                code: 2,
                phase: "usage",
                detail: detail.to_string(),
            };
            let (servant, master) = match (all, paths.as_slice()) {
                (Some(dir), [master]) => return converge_all(&dir, master, fail_fast, out),
                (Some(_), _) => return Err(usage("--all DIR takes only the MASTER grammar")),
                (None, [servant, master]) => (servant.clone(), master.clone()),
                (None, _) => return Err(usage("expected SERVANT MASTER")),
            };
            let s = grammar(&servant)?;
            let m = grammar(&master)?;
            let r = converge(&s, &m).map_err(|e| domain("converge", e))?;
            let ok = verify(&r, &m);
            if let Some(path) = output {
                write_file(&path, &serialize_script(&full_script(&r)))?;
            }
            let _ = writeln!(out, "{}", summary(&stem(&servant), &r, ok));
            if !ok {
                return Err(domain("verify", "result differs from the master grammar"));
            }
        }
        Command::Apply {
            grammar: gpath,
            script,
            roundtrip,
        } => {
            let g = grammar(&gpath)?;
            let steps = parse_script(&read(&script)?).map_err(|e| Failure {
                code: 2,
                phase: "parse",
                detail: format!("{}: {e}", script.display()),
            })?;
            let (result, done) = apply_script(&g, &steps).map_err(|e| domain("apply", e))?;
            if roundtrip {
                let inverse = invert_script(&done).map_err(|e| domain("invert", e))?;
                let (back, _) = apply_script(&result, &inverse).map_err(|e| domain("invert", e))?;
                if !canonical_eq(&back, &g) {
                    return Err(domain("invert", "inverse script does not restore the grammar"));
                }
                let _ = writeln!(out, "round trip restores the grammar ({} steps)", done.len());
            } else {
                let _ = out.write_all(serialize_bgf(&result).as_bytes());
            }
        }
        Command::Diff { left, right } => {
            let (a, b) = (grammar(&left)?, grammar(&right)?);
            if canonical_eq(&a, &b) {
                let _ = writeln!(out, "equal");
                return Ok(());
            }
            if a.roots != b.roots {
                let _ = writeln!(out, "- roots: {}", a.roots.join(" "));
                let _ = writeln!(out, "+ roots: {}", b.roots.join(" "));
            }
            let mut rest = b.productions.clone();
            for p in &a.productions {
                match rest.iter().position(|q| q == p) {
                    Some(k) => {
                        rest.remove(k);
                    }
                    None => {
                        let _ = writeln!(out, "- {}", render_production(p));
                    }
                }
            }
            for q in &rest {
                let _ = writeln!(out, "+ {}", render_production(q));
            }
            return Err(domain("diff", "grammars differ"));
        }
        Command::Report {
            servant,
            master,
            output,
            show_noop_renames,
        } => {
            let s = grammar(&servant)?;
            let m = grammar(&master)?;
            let r = converge(&s, &m).map_err(|e| domain("converge", e))?;
            let text = generate_report(&stem(&servant), &r, &m, &ReportOptions { show_noop_renames });
            match output {
                Some(path) => write_file(&path, &text)?,
                None => {
                    let _ = out.write_all(text.as_bytes());
                }
            }
        }
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run(args: impl IntoIterator<Item = String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "ERROR {} {}", f.phase, f.detail);
            f.code
        }
    }
}
