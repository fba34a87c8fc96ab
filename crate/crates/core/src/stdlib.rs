//! Loading `.npt` sources: pragmas, golden marks, and the shipped library.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::diagnostic::{Diagnostic, ErrorCode, Span};
use crate::eval::{Machine, Strategy, TraceStep, DEFAULT_BUDGET};
use crate::signature::Signature;
use crate::surface::elaborate::elaborate_decl;
use crate::surface::parser::{parse, DeclKind, SurfaceDecl};
use crate::surface::pretty::pretty;
use crate::syntax::Term;
use crate::telescope::Telescope;
use crate::typecheck::CoreDecl;

pub const PRELUDE: &str = "prelude.npt";
pub const CORPUS: &str = "corpus.npt";
pub const EXTRAS: &str = "extras.npt";

/// A definition marked `{-# golden #-}` or `{-# golden trace #-}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenMark {
    pub name: String,
    pub trace: bool,
}

/// What loading one file added to the signature.
#[derive(Clone, Debug, Default)]
pub struct FileReport {
    /// Declared names, in order (generated eliminators excluded).
    pub names: Vec<String>,
    pub goldens: Vec<GoldenMark>,
    /// Budget in force at the end of the file.
    pub budget: u64,
    pub decls: Vec<CoreDecl>,
}

#[derive(Clone, Copy, Debug)]
pub struct LoadOptions {
    pub budget: u64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            budget: DEFAULT_BUDGET,
        }
    }
}

enum Pragma {
    Budget(u64),
    Golden { trace: bool },
}

fn parse_pragma(p: &str, span: Span) -> Result<Pragma, Diagnostic> {
    let words: Vec<&str> = p.split_whitespace().collect();
    match words.as_slice() {
        ["budget", n] => match n.parse::<u64>() {
            Ok(n) if n > 0 => Ok(Pragma::Budget(n)),
            _ => Err(Diagnostic::new(
                ErrorCode::SyntaxError,
                format!("budget must be a positive integer, got `{n}`"),
            )
            .with_span(span)),
        },
        ["golden"] => Ok(Pragma::Golden { trace: false }),
        ["golden", "trace"] => Ok(Pragma::Golden { trace: true }),
        _ => Err(
            Diagnostic::new(ErrorCode::SyntaxError, format!("unknown pragma `{p}`")).with_span(span),
        ),
    }
}

fn decl_name(d: &SurfaceDecl) -> Option<&str> {
    match &d.kind {
        DeclKind::Def { name, .. } | DeclKind::Postulate { name, .. } | DeclKind::Data { name, .. } => {
            Some(name)
        }
        DeclKind::Pragma(_) => None,
    }
}

/// Parses, elaborates and checks `src`, extending `sig`. On error `sig`
/// keeps every declaration before the failing one.
pub fn load_source(
    sig: &mut Signature,
    src: &str,
    opts: LoadOptions,
) -> Result<FileReport, Diagnostic> {
    let decls = parse(src)?;
    let mut report = FileReport {
        budget: opts.budget,
        ..Default::default()
    };
    let mut pending_golden: Option<(bool, Span)> = None;
    for d in &decls {
        if let DeclKind::Pragma(p) = &d.kind {
            match parse_pragma(p, d.span)? {
                Pragma::Budget(n) => report.budget = n,
                Pragma::Golden { trace } => pending_golden = Some((trace, d.span)),
            }
            continue;
        }
        let Some(core) = elaborate_decl(sig, d, report.budget)? else {
            continue;
        };
        sig.add_decl(core.clone(), report.budget)
            .map_err(|e| e.with_span(d.span))?;
        let name = decl_name(d).expect("non-pragma").to_string();
        if let Some((trace, span)) = pending_golden.take() {
            if !matches!(d.kind, DeclKind::Def { .. }) {
                return Err(Diagnostic::new(
                    ErrorCode::SyntaxError,
                    "`golden` must precede a definition",
                )
                .with_span(span));
            }
            report.goldens.push(GoldenMark {
                name: name.clone(),
                trace,
            });
        }
        report.names.push(name);
        report.decls.push(core);
    }
    if let Some((_, span)) = pending_golden {
        return Err(Diagnostic::new(
            ErrorCode::SyntaxError,
            "`golden` must precede a definition",
        )
        .with_span(span));
    }
    Ok(report)
}

/// A diagnostic together with the file it arose in.
#[derive(Debug)]
pub enum LoadError {
    Io { path: PathBuf, error: std::io::Error },
    Check { file: String, src: String, diag: Box<Diagnostic> },
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io { path, error } => write!(f, "cannot read {}: {error}", path.display()),
            LoadError::Check { file, src, diag } => f.write_str(&diag.render(file, src)),
        }
    }
}

impl std::error::Error for LoadError {}

impl LoadError {
    pub fn diagnostic(&self) -> Option<&Diagnostic> {
        match self {
            LoadError::Check { diag, .. } => Some(diag),
            LoadError::Io { .. } => None,
        }
    }
}

pub fn load_file(
    sig: &mut Signature,
    path: &Path,
    opts: LoadOptions,
) -> Result<FileReport, LoadError> {
    let src = std::fs::read_to_string(path).map_err(|error| LoadError::Io {
        path: path.to_path_buf(),
        error,
    })?;
    load_source(sig, &src, opts).map_err(|diag| LoadError::Check {
        file: path.display().to_string(),
        src,
        diag: Box::new(diag),
    })
}

/// One line of `lib/MANIFEST`: a file and the names it must define.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub file: String,
    pub names: Vec<String>,
}

/// Lines are `FILE NAME...`; `#` starts a comment. A file may span
/// several lines.
pub fn parse_manifest(text: &str) -> Vec<ManifestEntry> {
    let mut out: Vec<ManifestEntry> = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("");
        let mut words = line.split_whitespace();
        let Some(file) = words.next() else { continue };
        let names = words.map(str::to_string);
        match out.iter_mut().find(|e| e.file == file) {
            Some(e) => e.names.extend(names),
            None => out.push(ManifestEntry {
                file: file.to_string(),
                names: names.collect(),
            }),
        }
    }
    out
}

/// `NPT_LIB` if set, else the `lib/` directory of this source tree.
pub fn lib_dir() -> PathBuf {
    std::env::var_os("NPT_LIB")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../lib"))
}

pub fn manifest(lib: &Path) -> Result<Vec<ManifestEntry>, LoadError> {
    let path = lib.join("MANIFEST");
    std::fs::read_to_string(&path)
        .map(|t| parse_manifest(&t))
        .map_err(|error| LoadError::Io { path, error })
}

/// Loads `file` from `lib` and asserts the names the manifest lists for it.
pub fn load_lib_file(sig: &mut Signature, lib: &Path, file: &str) -> Result<FileReport, LoadError> {
    let entries = manifest(lib)?;
    let path = lib.join(file);
    let report = load_file(sig, &path, LoadOptions::default())?;
    if let Some(e) = entries.iter().find(|e| e.file == file) {
        if let Some(missing) = e.names.iter().find(|n| !sig.contains(n)) {
            return Err(LoadError::Check {
                file: path.display().to_string(),
                src: String::new(),
                diag: Box::new(Diagnostic::new(
                    ErrorCode::UnboundName,
                    format!("manifest lists `{missing}` but {file} does not define it"),
                )),
            });
        }
    }
    Ok(report)
}

pub fn load_prelude(lib: &Path) -> Result<Signature, LoadError> {
    let mut sig = Signature::new();
    load_lib_file(&mut sig, lib, PRELUDE)?;
    Ok(sig)
}

pub fn load_corpus(sig: &mut Signature, lib: &Path) -> Result<FileReport, LoadError> {
    load_lib_file(sig, lib, CORPUS)
}

/// Expects the corpus to be loaded already.
pub fn load_extras(sig: &mut Signature, lib: &Path) -> Result<FileReport, LoadError> {
    load_lib_file(sig, lib, EXTRAS)
}

/// Normal form of the body of definition `name`, and the trace when asked.
pub fn normalize_def(
    sig: &Signature,
    name: &str,
    budget: u64,
    strategy: Strategy,
    trace: bool,
) -> Result<(Term, Vec<TraceStep>), Diagnostic> {
    let body = sig.definition(name).ok_or_else(|| {
        Diagnostic::new(ErrorCode::UnboundName, format!("no definition named `{name}`"))
    })?;
    let mut m = Machine::new(sig).with_budget(budget).with_strategy(strategy);
    if trace {
        m = m.tracing();
    }
    let nf = m.normalize(&Telescope::new(), body)?;
    Ok((nf, m.take_trace()))
}

/// Golden text for every marked definition: `name := <normal form>`, then
/// for traced ones a `-- trace` line and one rule name per line.
/// `strategy` only affects how the normal form is computed.
pub fn render_goldens(
    sig: &Signature,
    report: &FileReport,
    strategy: Strategy,
) -> Result<String, Diagnostic> {
    let mut out = String::new();
    for g in &report.goldens {
        let (nf, _) = normalize_def(sig, &g.name, report.budget, strategy, false)?;
        out.push_str(&format!("{} := {}\n", g.name, pretty(sig, &nf)));
        if g.trace {
            // the recorded chain is always the leftmost-outermost one
            let (_, trace) = normalize_def(sig, &g.name, report.budget, Strategy::Lo, true)?;
            out.push_str("-- trace\n");
            for s in trace {
                out.push_str(s.rule.name());
                out.push('\n');
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_merges_lines_and_skips_comments() {
        let m = parse_manifest("# header\nprelude.npt a b  # trailing\n\nprelude.npt c\ncorpus.npt d\n");
        assert_eq!(
            m,
            vec![
                ManifestEntry {
                    file: "prelude.npt".into(),
                    names: vec!["a".into(), "b".into(), "c".into()]
                },
                ManifestEntry {
                    file: "corpus.npt".into(),
                    names: vec!["d".into()]
                },
            ]
        );
    }

    #[test]
    fn pragmas_and_goldens() {
        let mut sig = Signature::new();
        let r = load_source(
            &mut sig,
            "{-# budget 50 #-}\ndata Unit : U where | tt : Unit\n{-# golden trace #-}\ndef u : Unit := tt",
            LoadOptions::default(),
        )
        .unwrap();
        assert_eq!(r.budget, 50);
        assert_eq!(r.names, vec!["Unit", "u"]);
        assert_eq!(
            r.goldens,
            vec![GoldenMark {
                name: "u".into(),
                trace: true
            }]
        );
    }

    #[test]
    fn dangling_golden_is_an_error() {
        let mut sig = Signature::new();
        let e = load_source(&mut sig, "{-# golden #-}", LoadOptions::default()).unwrap_err();
        assert_eq!(e.code, ErrorCode::SyntaxError);
    }

    #[test]
    fn empty_file_is_empty_signature() {
        let mut sig = Signature::new();
        let r = load_source(&mut sig, "", LoadOptions::default()).unwrap();
        assert!(r.names.is_empty() && sig.is_empty());
    }
}
