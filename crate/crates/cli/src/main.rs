//! `npt`: check, normalize, explore and golden-test `.npt` files.

use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use npt_core::diagnostic::{Diagnostic, ErrorCode};
use npt_core::eval::{Machine, Strategy};
use npt_core::signature::Signature;
use npt_core::stdlib::{
    lib_dir, load_corpus, load_file, load_prelude, load_source, normalize_def, render_goldens, LoadError,
    LoadOptions, PRELUDE,
};
use npt_core::surface::elaborate::Elaborator;
use npt_core::surface::parser::{parse_binders, parse_expr};
use npt_core::surface::pretty::{pretty, pretty_telescope, show_in};
use npt_core::telescope::Telescope;

const EXIT_OK: u8 = 0;
const EXIT_DIAG: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "npt", version, about = "Nullary parametric type theory checker")]
struct Cli {
    /// Reduction step budget.
    #[arg(long, global = true, default_value_t = npt_core::eval::DEFAULT_BUDGET,
          value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
    /// Print the reduction trace after normal forms.
    #[arg(long, global = true)]
    trace: bool,
    /// Do not load lib/prelude.npt first.
    #[arg(long, global = true)]
    no_prelude: bool,
    #[arg(long, global = true, value_enum, default_value_t = DiagFormat::Text)]
    diag_format: DiagFormat,
    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::Lo)]
    strategy: StrategyArg,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check files in order.
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Print the normal form of a definition's body.
    Norm { path: PathBuf, name: String },
    /// Interactive session.
    Repl,
    /// Compare marked definitions against NAME.golden files.
    Golden {
        dir: PathBuf,
        /// Rewrite golden files instead of comparing.
        #[arg(long)]
        bless: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DiagFormat {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Lo,
    Ri,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Lo => Strategy::Lo,
            StrategyArg::Ri => Strategy::Ri,
        }
    }
}

#[derive(Serialize)]
struct DiagRecord<'a> {
    code: &'a str,
    file: &'a str,
    line: usize,
    col: usize,
    message: String,
}

struct Ctx {
    cli: Cli,
}

impl Ctx {
    fn report(&self, file: &str, src: &str, d: &Diagnostic) {
        match self.cli.diag_format {
            DiagFormat::Text => eprintln!("{}", d.render(file, src)),
            DiagFormat::Structured => {
                let (line, col) = d.span.map_or((1, 1), |s| s.line_col(src));
                let message = match &d.decl {
                    Some(n) => format!("in `{n}`: {}", d.message),
                    None => d.message.clone(),
                };
                let rec = DiagRecord {
                    code: d.code.as_str(),
                    file,
                    line,
                    col,
                    message,
                };
                eprintln!("{}", serde_json::to_string(&rec).expect("serializable"));
            }
        }
    }

    /// Reports a load failure and returns its exit code.
    fn load_failure(&self, e: &LoadError) -> u8 {
        match e {
            LoadError::Io { path, error } => {
                eprintln!("error: cannot read {}: {error}", path.display());
                EXIT_IO
            }
            LoadError::Check { file, src, diag } => {
                self.report(file, src, diag);
                EXIT_DIAG
            }
        }
    }

    fn opts(&self) -> LoadOptions {
        LoadOptions {
            budget: self.cli.budget,
        }
    }

    fn prelude_path(&self) -> Option<PathBuf> {
        lib_dir().join(PRELUDE).canonicalize().ok()
    }

    fn is_prelude(&self, p: &Path) -> bool {
        !self.cli.no_prelude
            && matches!((p.canonicalize(), self.prelude_path()), (Ok(a), Some(b)) if a == b)
    }

    fn base_signature(&self) -> Result<Signature, u8> {
        if self.cli.no_prelude {
            return Ok(Signature::new());
        }
        load_prelude(&lib_dir()).map_err(|e| self.load_failure(&e))
    }

    /// Base signature plus `paths`; the prelude itself is not loaded twice.
    fn load_all(&self, paths: &[PathBuf]) -> Result<(Signature, Option<npt_core::stdlib::FileReport>), u8> {
        let mut sig = self.base_signature()?;
        let mut last = None;
        for p in paths {
            if self.is_prelude(p) {
                continue;
            }
            last = Some(load_file(&mut sig, p, self.opts()).map_err(|e| self.load_failure(&e))?);
        }
        Ok((sig, last))
    }

    fn check(&self, paths: &[PathBuf]) -> u8 {
        if let Some(p) = paths.iter().find(|p| !p.is_file()) {
            eprintln!("error: cannot read {}", p.display());
            return EXIT_IO;
        }
        match self.load_all(paths) {
            Ok(_) => EXIT_OK,
            Err(code) => code,
        }
    }

    fn norm(&self, path: &Path, name: &str) -> u8 {
        let (sig, report) = match self.load_all(&[path.to_path_buf()]) {
            Ok(r) => r,
            Err(code) => return code,
        };
        let budget = report.map_or(self.cli.budget, |r| r.budget);
        match normalize_def(&sig, name, budget, self.cli.strategy.into(), self.cli.trace) {
            Ok((nf, trace)) => {
                println!("{}", pretty(&sig, &nf));
                if self.cli.trace {
                    println!("-- trace");
                    for s in trace {
                        println!("{}", s.rule);
                    }
                }
                EXIT_OK
            }
            Err(d) => {
                self.report(&path.display().to_string(), "", &d);
                if d.code == ErrorCode::BudgetExceeded {
                    EXIT_BUDGET
                } else {
                    EXIT_DIAG
                }
            }
        }
    }

    fn golden(&self, dir: &Path, bless: bool) -> u8 {
        let mut cases: Vec<PathBuf> = match std::fs::read_dir(dir) {
            Ok(rd) => rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "npt"))
                .collect(),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", dir.display());
                return EXIT_IO;
            }
        };
        cases.sort();
        let mut failed = 0;
        for case in &cases {
            let golden_path = case.with_extension("golden");
            let name = case.file_stem().unwrap_or_default().to_string_lossy().to_string();
            let actual = self.golden_case(case);
            let actual = match actual {
                Ok(a) => a,
                Err(code) => {
                    if code == EXIT_IO {
                        return EXIT_IO;
                    }
                    println!("FAIL {name}: does not check");
                    failed += 1;
                    continue;
                }
            };
            if bless {
                if let Err(e) = std::fs::write(&golden_path, &actual) {
                    eprintln!("error: cannot write {}: {e}", golden_path.display());
                    return EXIT_IO;
                }
                println!("BLESS {name}");
                continue;
            }
            match std::fs::read_to_string(&golden_path) {
                Ok(expected) if expected == actual => println!("PASS {name}"),
                Ok(expected) => {
                    println!("FAIL {name}");
                    print_diff(&expected, &actual);
                    failed += 1;
                }
                Err(_) => {
                    println!("FAIL {name}: missing {}", golden_path.display());
                    failed += 1;
                }
            }
        }
        println!("{} cases, {} passed, {} failed", cases.len(), cases.len() - failed, failed);
        if failed == 0 {
            EXIT_OK
        } else {
            EXIT_DIAG
        }
    }

    fn golden_case(&self, case: &Path) -> Result<String, u8> {
        // goldens run against the whole shipped library
        let mut sig = self.base_signature()?;
        if !self.cli.no_prelude {
            load_corpus(&mut sig, &lib_dir()).map_err(|e| self.load_failure(&e))?;
        }
        let src = std::fs::read_to_string(case).map_err(|e| {
            eprintln!("error: cannot read {}: {e}", case.display());
            EXIT_IO
        })?;
        let file = case.display().to_string();
        let report = load_source(&mut sig, &src, self.opts()).map_err(|d| {
            self.report(&file, &src, &d);
            EXIT_DIAG
        })?;
        render_goldens(&sig, &report, self.cli.strategy.into()).map_err(|d| {
            self.report(&file, &src, &d);
            EXIT_DIAG
        })
    }

    fn repl(&self) -> u8 {
        let mut sig = match self.base_signature() {
            Ok(s) => s,
            Err(code) => return code,
        };
        let mut tele = Telescope::new();
        let stdin = io::stdin();
        let mut out = io::stdout();
        loop {
            print!("npt> ");
            let _ = out.flush();
            let mut line = String::new();
            match stdin.lock().read_line(&mut line) {
                Ok(0) => break,
                Ok(_) => {}
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_IO;
                }
            }
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (cmd, rest) = match line.split_once(char::is_whitespace) {
                Some((c, r)) if c.starts_with(':') => (c, r.trim()),
                _ if line.starts_with(':') => (line, ""),
                _ => (":n", line),
            };
            let r = match cmd {
                ":q" | ":quit" => break,
                ":t" => self.repl_expr(&sig, &tele, rest, false),
                ":n" => self.repl_expr(&sig, &tele, rest, true),
                ":ctx" => Ok(pretty_telescope(&sig, &tele)),
                ":def" => load_source(&mut sig, rest, self.opts()).map(|r| {
                    format!("defined {}", r.names.join(", "))
                }),
                ":assume" => parse_binders(rest).and_then(|bs| {
                    let mut el =
                        Elaborator::with_telescope(&sig, self.cli.budget, tele.clone());
                    el.elab_binders(&bs)?;
                    tele = el.telescope().clone();
                    Ok(pretty_telescope(&sig, &tele))
                }),
                other => Ok(format!(
                    "unknown command `{other}`; try :t :n :def :ctx :assume :q"
                )),
            };
            match r {
                Ok(s) if s.is_empty() => {}
                Ok(s) => println!("{s}"),
                Err(d) => self.report("<repl>", rest, &d),
            }
        }
        EXIT_OK
    }

    fn repl_expr(
        &self,
        sig: &Signature,
        tele: &Telescope,
        src: &str,
        norm: bool,
    ) -> Result<String, Diagnostic> {
        let e = parse_expr(src)?;
        let mut el = Elaborator::with_telescope(sig, self.cli.budget, tele.clone());
        let (t, ty) = el.infer(&e)?;
        if !norm {
            return Ok(show_in(sig, tele, &ty));
        }
        let mut m = Machine::new(sig)
            .with_budget(self.cli.budget)
            .with_strategy(self.cli.strategy.into());
        if self.cli.trace {
            m = m.tracing();
        }
        let nf = m.normalize(tele, &t)?;
        let mut s = show_in(sig, tele, &nf);
        if self.cli.trace {
            s.push_str("\n-- trace");
            for step in m.take_trace() {
                s.push('\n');
                s.push_str(step.rule.name());
            }
        }
        Ok(s)
    }
}

fn print_diff(expected: &str, actual: &str) {
    let e: Vec<&str> = expected.lines().collect();
    let a: Vec<&str> = actual.lines().collect();
    for i in 0..e.len().max(a.len()) {
        match (e.get(i), a.get(i)) {
            (Some(x), Some(y)) if x == y => println!("  {x}"),
            (x, y) => {
                if let Some(x) = x {
                    println!("- {x}");
                }
                if let Some(y) = y {
                    println!("+ {y}");
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // clap's own usage errors use exit code 2, which is our I/O code;
            // help and version are successes.
            return ExitCode::from(if e.use_stderr() { EXIT_DIAG } else { EXIT_OK });
        }
    };
    let ctx = Ctx { cli };
    let code = match &ctx.cli.command {
        Command::Check { paths } => ctx.check(paths),
        Command::Norm { path, name } => ctx.norm(path, name),
        Command::Repl => ctx.repl(),
        Command::Golden { dir, bless } => ctx.golden(dir, *bless),
    };
    ExitCode::from(code)
}
