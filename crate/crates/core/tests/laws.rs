use npt_core::stdlib::{lib_dir, load_corpus, load_extras, load_prelude};
use npt_core::surface::elaborate::Elaborator;
use npt_core::surface::parser::{parse_binders, parse_expr};
use npt_core::surface::pretty::show_in;
use npt_core::typecheck::Checker;
use npt_core::{Diagnostic, ErrorCode, Signature, Telescope, Term};

fn library() -> Signature {
    let lib = lib_dir();
    let mut sig = load_prelude(&lib).unwrap();
    load_corpus(&mut sig, &lib).unwrap();
    load_extras(&mut sig, &lib).unwrap();
    sig
}

fn elab(sig: &Signature, binders: &str, src: &str) -> Result<(Telescope, Term, Term), Diagnostic> {
    let mut el = Elaborator::new(sig, 100_000);
    if !binders.is_empty() {
        el.elab_binders(&parse_binders(binders)?)?;
    }
    let (t, ty) = el.infer(&parse_expr(src)?)?;
    Ok((el.telescope().clone(), t, ty))
}

fn nf(sig: &Signature, binders: &str, src: &str) -> String {
    let (tele, t, _) = elab(sig, binders, src).unwrap_or_else(|e| panic!("{src}: {e:?}"));
    let n = Checker::new(sig).normalize(&tele, &t).unwrap();
    show_in(sig, &tele, &n)
}

fn conv(sig: &Signature, binders: &str, lhs: &str, rhs: &str) -> bool {
    let (tele, l, ty) = elab(sig, binders, lhs).unwrap_or_else(|e| panic!("{lhs}: {e:?}"));
    let (_, r, _) = elab(sig, binders, rhs).unwrap_or_else(|e| panic!("{rhs}: {e:?}"));
    Checker::new(sig).conv(&tele, &l, &r, &ty).unwrap()
}

fn code(sig: &Signature, binders: &str, src: &str) -> ErrorCode {
    match elab(sig, binders, src) {
        Ok(_) => panic!("{src} was accepted"),
        Err(e) => e.code,
    }
}

#[test]
fn tighten_separates_fresh_and_constant_bridges() {
    let sig = library();
    assert_eq!(nf(&sig, "", "tighten (\\(x : @I). name x)"), "inl tt");
    assert_eq!(nf(&sig, "(y : @I)", "tighten (\\(x : @I). name y)"), "inr (name y)");
    assert_eq!(nf(&sig, "", "loosen (inl tt)"), "\\(x : @I). name x");
    assert!(conv(&sig, "(y : @I)", "loosen (tighten (\\(x : @I). name y))", "\\(x : @I). name y"));
    assert!(conv(&sig, "", "loosen (tighten (\\(x : @I). name x))", "\\(x : @I). name x"));
}

#[test]
fn swap_exchanges_exactly_the_two_names() {
    let sig = library();
    let ctx = "(z : @I) (x : @I) (y : @I)";
    assert_eq!(nf(&sig, ctx, "swap Nm x y (name x)"), "name y");
    assert_eq!(nf(&sig, ctx, "swap Nm x y (name y)"), "name x");
    assert_eq!(nf(&sig, ctx, "swap Nm x y (name z)"), "name z");
}

#[test]
fn nu_and_gel_are_inverse() {
    let sig = library();
    let ctx = "(y : @I) (x : @I)";
    assert!(conv(&sig, ctx, "gel (nu Nm (\\(x : @I). gel (name y) x)) x", "gel (name y) x"));
    assert!(conv(&sig, ctx, "nu Nm (\\(x : @I). gel (name y) x)", "name y"));
    assert!(conv(
        &sig,
        "(g : (z : @I) -o Gel Nat z) (x : @I)",
        "gel (nu Nat g) x",
        "g x"
    ));
}

#[test]
fn matchbind_computes_on_bind() {
    let sig = library();
    let ctx = "(B : @I -o U) (C : U) (f : (x : @I) -o B x -> Gel C x) (b' : (x : @I) -o B x) (x : @I)";
    assert!(conv(&sig, ctx, "gel (matchbind B C f b') x", "f x (b' x)"));
}

#[test]
fn name_induction_on_fresh_and_bound_names() {
    let sig = library();
    assert_eq!(nf(&sig, "(y : @I)", "t1 (\\(x : @I). name y)"), "\\(x : @I). inr (gel (name y) x)");
    assert_eq!(nf(&sig, "", "t1 (\\(x : @I). name x)"), "\\(x : @I). inl tt");
}

#[test]
fn church_encoded_lambda_decodes() {
    let sig = library();
    assert_eq!(nf(&sig, "", "ubd_hid"), "lam (\\(x : @I). var (name x))");
}

#[test]
fn constructors_resolve_from_expected_type() {
    let sig = library();
    // `nil` belongs to both process types; the ascription picks one
    let (_, _, ty) = elab(&sig, "", "(nil : AProc)").unwrap();
    assert_eq!(ty, Term::data("AProc", vec![]));
    assert_eq!(code(&sig, "", "nil"), ErrorCode::CannotInfer);
    // a partially applied constructor is eta-expanded against a function type
    let (tele, t, _) = elab(&sig, "", "(suc : Nat -> Nat)").unwrap();
    let n = Checker::new(&sig).normalize(&tele, &Term::app(t, Term::ctor("Nat", "zero", vec![], vec![]))).unwrap();
    assert_eq!(show_in(&sig, &tele, &n), "suc zero");
}

#[test]
fn elaborator_reports_side_conditions() {
    let sig = library();
    assert_eq!(code(&sig, "(x : @I) (a' : @I -o Nm)", "a' x"), ErrorCode::AffinityViolation);
    assert_eq!(code(&sig, "(x : @I)", "gel (name x) x"), ErrorCode::GelFreshnessViolation);
    assert_eq!(code(&sig, "(a : Nm)", "name a"), ErrorCode::KindMismatch);
    assert_eq!(code(&sig, "", "nosuch"), ErrorCode::UnboundName);
    assert_eq!(code(&sig, "(x : @I) (n : Nat)", "forg Nat x (gel n x)"), ErrorCode::GelFreshnessViolation);
}

#[test]
fn bare_refl_in_j_takes_its_type_from_the_motive() {
    let sig = library();
    assert_eq!(nf(&sig, "", "J (\\(y : Nat) (e : Id Nat zero y). Nat) (suc zero) refl"), "suc zero");
    assert_eq!(
        code(&sig, "(n : Nat)", "J (\\(y : Nat) (e : Id Nat zero y). Nat) zero n"),
        ErrorCode::TypeMismatch
    );
}
