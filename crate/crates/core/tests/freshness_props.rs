use npt_core::freshness::{capture_ix, is_fresh, is_fresh_ix, restrict_term, supports};
use npt_core::syntax::{instantiate_aff, mentions, shift_from, strengthen_at, subst, Ident, Kind, Repl, Term};
use npt_core::telescope::{Level, Telescope};
use npt_core::Entry;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Kinds of the context, innermost last.
fn telescope_of(kinds: &[bool]) -> Telescope {
    let mut t = Telescope::new();
    for (i, aff) in kinds.iter().enumerate() {
        if *aff {
            t.push_aff(&format!("x{i}"));
        } else {
            t.push_cart(&format!("a{i}"), Term::Nm);
        }
    }
    t
}

/// Restriction by its inductive definition, as kept levels.
fn restrict_oracle(kinds: &[bool], x: usize) -> Vec<usize> {
    match kinds.split_last() {
        None => vec![],
        Some((_, rest)) if rest.len() == x => (0..x).collect(),
        Some((true, rest)) => {
            let mut v = restrict_oracle(rest, x);
            v.push(rest.len());
            v
        }
        Some((false, rest)) => restrict_oracle(rest, x),
    }
}

/// Random well-scoped term; `ctx` holds kinds by de Bruijn index from the end.
fn gen(rng: &mut StdRng, ctx: &mut Vec<Kind>, fuel: u32) -> Term {
    let ix_of = |ctx: &Vec<Kind>, k: Kind, rng: &mut StdRng| -> Option<usize> {
        let ixs: Vec<usize> = (0..ctx.len()).filter(|i| ctx[ctx.len() - 1 - i] == k).collect();
        if ixs.is_empty() {
            None
        } else {
            Some(ixs[rng.gen_range(0..ixs.len())])
        }
    };
    if fuel == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 => ix_of(ctx, Kind::Cart, rng).map(Term::Var).unwrap_or(Term::Nm),
            1 => ix_of(ctx, Kind::Aff, rng).map(Term::Name).unwrap_or(Term::Universe),
            2 => Term::Nm,
            _ => Term::Universe,
        };
    }
    let f = fuel - 1;
    match rng.gen_range(0..10) {
        0 => Term::app(gen(rng, ctx, f), gen(rng, ctx, f)),
        1 => {
            let dom = gen(rng, ctx, f);
            ctx.push(Kind::Cart);
            let b = gen(rng, ctx, f);
            ctx.pop();
            Term::Lam(Ident::new("c"), Box::new(dom), Box::new(b))
        }
        2 => {
            ctx.push(Kind::Aff);
            let b = gen(rng, ctx, f);
            ctx.pop();
            Term::BridgeLam(Ident::new("y"), Box::new(b))
        }
        3 => Term::pair(gen(rng, ctx, f), gen(rng, ctx, f)),
        4 => Term::Fst(Box::new(gen(rng, ctx, f))),
        5 => Term::ung(gen(rng, ctx, f)),
        6..=8 => match ix_of(ctx, Kind::Aff, rng) {
            Some(x) => match rng.gen_range(0..4) {
                0 => Term::bapp(gen(rng, ctx, f), x),
                1 => Term::gel(gen(rng, ctx, f), x),
                2 => Term::gel_ty(gen(rng, ctx, f), x),
                _ => Term::ext(gen(rng, ctx, f), x, gen(rng, ctx, f)),
            },
            None => gen(rng, ctx, f),
        },
        _ => {
            let dom = gen(rng, ctx, f);
            ctx.push(Kind::Cart);
            let b = gen(rng, ctx, f);
            ctx.pop();
            Term::Sigma(Ident::new("s"), Box::new(dom), Box::new(b))
        }
    }
}

fn setup(kinds: &[bool], seed: u64) -> (Telescope, Term) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut ctx: Vec<Kind> = kinds.iter().map(|a| if *a { Kind::Aff } else { Kind::Cart }).collect();
    let t = gen(&mut rng, &mut ctx, 5);
    (telescope_of(kinds), t)
}

fn kinds_strategy() -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 0..9)
}

proptest! {
    #[test]
    fn restrict_matches_inductive_definition(kinds in kinds_strategy()) {
        let tele = telescope_of(&kinds);
        for x in (0..kinds.len()).filter(|l| kinds[*l]) {
            let kept: Vec<usize> = tele.restriction_map(Level(x)).unwrap().into_iter().map(|l| l.0).collect();
            let oracle = restrict_oracle(&kinds, x);
            prop_assert_eq!(&kept, &oracle);
            let r = tele.restrict(Level(x)).unwrap();
            let expected: Vec<Entry> = oracle.iter().map(|l| tele.entries()[*l].clone()).collect();
            prop_assert_eq!(r.entries(), &expected[..]);
        }
        for x in (0..kinds.len()).filter(|l| !kinds[*l]) {
            prop_assert!(tele.restrict(Level(x)).is_err());
        }
    }

    #[test]
    fn supports_match_substitution_probe(kinds in kinds_strategy(), seed in any::<u64>()) {
        let (tele, t) = setup(&kinds, seed);
        let vs = supports(&t);
        let n = tele.len();
        for i in 0..n {
            let probe = if kinds[n - 1 - i] {
                Repl::Aff(n + 7)
            } else {
                Repl::Term(Term::global("probe"))
            };
            let changed = subst(&t, i, &probe).unwrap() != t;
            prop_assert_eq!(vs.contains(i), changed, "index {} in {:?}", i, t);
            prop_assert_eq!(mentions(&t, i), changed);
        }
        for i in &vs.cart {
            prop_assert!(!kinds[n - 1 - i]);
        }
        for i in &vs.aff {
            prop_assert!(kinds[n - 1 - i]);
        }
    }

    #[test]
    fn fresh_iff_supported_by_restriction(kinds in kinds_strategy(), seed in any::<u64>()) {
        let (tele, t) = setup(&kinds, seed);
        let n = tele.len();
        let vs = supports(&t);
        for x in (0..n).filter(|l| kinds[*l]) {
            let kept = restrict_oracle(&kinds, x);
            let in_restriction = vs.cart.iter().chain(&vs.aff).all(|ix| kept.contains(&(n - 1 - ix)));
            let fresh = is_fresh(&tele, Level(x), &t).unwrap();
            prop_assert_eq!(fresh, in_restriction);
            prop_assert_eq!(fresh, is_fresh_ix(&tele, n - 1 - x, &t));
            prop_assert_eq!(restrict_term(&tele, Level(x), &t).unwrap().is_some(), fresh);
        }
    }

    #[test]
    fn capture_then_apply_is_identity(kinds in kinds_strategy(), seed in any::<u64>()) {
        let (tele, t) = setup(&kinds, seed);
        let n = tele.len();
        let vs = supports(&t);
        for x in (0..n).filter(|l| kinds[*l]) {
            let ix = n - 1 - x;
            let blocked = vs.cart.iter().any(|c| *c < ix);
            match capture_ix(&tele, ix, &t, Ident::new("y")) {
                Ok(Term::BridgeLam(_, body)) => {
                    prop_assert!(!blocked);
                    prop_assert!(!mentions(&Term::BridgeLam(Ident::anon(), body.clone()), ix));
                    prop_assert_eq!(instantiate_aff(&body, ix), t.clone());
                }
                Ok(other) => prop_assert!(false, "capture produced {:?}", other),
                Err(_) => prop_assert!(blocked),
            }
        }
    }

    #[test]
    fn weakening_then_strengthening_is_identity(kinds in kinds_strategy(), seed in any::<u64>(), cut in 0usize..9) {
        let (tele, t) = setup(&kinds, seed);
        let cut = cut.min(tele.len());
        let w = shift_from(&t, cut, 1);
        prop_assert!(!mentions(&w, cut));
        prop_assert_eq!(strengthen_at(&w, cut), Some(t));
    }
}
