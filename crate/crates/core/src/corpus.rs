//! Seeded generators of splitting instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::constructions::{singleton_witness, SplitCase};
use crate::semantics::{satisfies, Evaluation, Subset};
use crate::term::{atom_term, ChoiceFunction, Index, Term};
use crate::units::{BaseElem, Sequence, Unit, Window};

/// A model of `term` (for diagonal splits, of `term · c_0−d_{01}`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitInstance {
    pub unit: Unit,
    pub focus: Sequence,
    pub eval: Evaluation,
    pub term: Term,
}

/// A random term over `x_0..x_{vars-1}` and the given indices.
pub fn random_term<R: Rng>(rng: &mut R, vars: usize, indices: &[u32], depth: u32) -> Term {
    let pick = |rng: &mut R| indices[rng.gen_range(0..indices.len())];
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0 => Term::One,
            1 => Term::Zero,
            2 | 3 => {
                let (i, j) = (pick(rng), pick(rng));
                Term::diag(i, j)
            }
            _ => Term::var(rng.gen_range(0..vars)),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..4) {
        0 => Term::not(random_term(rng, vars, indices, d)),
        1 => Term::and(
            random_term(rng, vars, indices, d),
            random_term(rng, vars, indices, d),
        ),
        2 => Term::or(
            random_term(rng, vars, indices, d),
            random_term(rng, vars, indices, d),
        ),
        _ => {
            let i = pick(rng);
            Term::cyl(i, random_term(rng, vars, indices, d))
        }
    }
}

fn random_unit<R: Rng>(rng: &mut R, window: u32, base: u32, density: f64) -> Unit {
    let all = Unit::full_square(
        Window::range(window),
        &(0..base).map(BaseElem).collect::<Vec<_>>(),
    );
    let keep: Vec<Sequence> = all
        .sequences()
        .iter()
        .filter(|_| rng.gen_bool(density))
        .cloned()
        .collect();
    Unit::from_set(Window::range(window), keep).expect("same window")
}

fn random_eval<R: Rng>(rng: &mut R, vars: usize, len: usize) -> Evaluation {
    Evaluation::from_vec(
        (0..vars)
            .map(|_| {
                Subset::from_positions(len, (0..len).filter(|_| rng.gen_bool(0.6)))
                    .expect("in range")
            })
            .collect(),
    )
}

fn first_model(v: &Unit, ev: &Evaluation, t: &Term) -> Option<Sequence> {
    v.sequences()
        .iter()
        .find(|f| satisfies(v, f, ev, t).unwrap_or(false))
        .cloned()
}

/// `count` models of `τ · c_0−d_{01}` with `τ` over indices `{0,1}`.
/// Windows of size 2 force the fresh pair to be added as constants; windows
/// of size 4 already hold it, so both cases of the construction occur.
/// Every other unit is replaced by its diagonalization closure.
pub fn diag_split_corpus(count: usize, seed: u64) -> Vec<SplitInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let side = Term::cyl(0, Term::not(Term::diag(0, 1)));
    let mut out = Vec::with_capacity(count);
    let mut attempt = 0usize;
    while out.len() < count {
        attempt += 1;
        let (window, base) = if attempt.is_multiple_of(2) { (4, 2) } else { (2, 3) };
        let mut v = random_unit(&mut rng, window, base, 0.5);
        if attempt % 4 < 2 {
            v = v.diagonalization_closure();
        }
        if v.is_empty() {
            continue;
        }
        let vars = rng.gen_range(1..=2);
        let term = random_term(&mut rng, vars, &[0, 1], 3);
        let ev = random_eval(&mut rng, vars, v.len());
        if let Some(focus) = first_model(&v, &ev, &Term::and(term.clone(), side.clone())) {
            out.push(SplitInstance {
                unit: v,
                focus,
                eval: ev,
                term,
            });
        }
    }
    out
}

/// Every atom term for `m ≤ 2` with its singleton witness, then random
/// nonzero terms over indices `{0,1,2}` with random models, up to `count`.
pub fn crs_split_corpus(count: usize, seed: u64) -> Vec<SplitInstance> {
    let mut out = Vec::with_capacity(count);
    for m in 1..=2 {
        for q in ChoiceFunction::all(m) {
            let w = singleton_witness(m, &q).expect("m ≥ 1");
            out.push(SplitInstance {
                term: atom_term(m, &q).expect("m ≥ 1"),
                unit: w.unit,
                focus: w.focus,
                eval: w.eval,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let v = random_unit(&mut rng, 3, 2, 0.4);
        if v.is_empty() {
            continue;
        }
        let vars = rng.gen_range(1..=2);
        let term = random_term(&mut rng, vars, &[0, 1, 2], 3);
        let ev = random_eval(&mut rng, vars, v.len());
        if let Some(focus) = first_model(&v, &ev, &term) {
            out.push(SplitInstance {
                unit: v,
                focus,
                eval: ev,
                term,
            });
        }
    }
    out.truncate(count.max(6));
    out
}

/// Which diagonal-split case an instance will take, without building it.
pub fn predicted_case(inst: &SplitInstance) -> Option<SplitCase> {
    let (i, j) = (Index(2), Index(3));
    let w = inst.unit.window();
    if !(w.contains(i) && w.contains(j)) {
        return Some(SplitCase::EqualFresh);
    }
    if inst.term.index_set().iter().any(|k| k.0 >= 2) {
        return None;
    }
    let g = inst.unit.sequences().iter().find(|g| {
        g.equiv_at(&inst.focus, Index(0)).unwrap_or(false) && g.at(Index(0)) != g.at(Index(1))
    })?;
    Some(if g.at(i) == g.at(j) {
        SplitCase::EqualFresh
    } else {
        SplitCase::DistinctFresh
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{split_any_crs, split_atom_diag};
    use std::collections::BTreeSet;

    #[test]
    fn corpora_are_deterministic() {
        assert_eq!(diag_split_corpus(10, 5), diag_split_corpus(10, 5));
        assert_eq!(crs_split_corpus(12, 5), crs_split_corpus(12, 5));
    }

    #[test]
    fn diag_corpus_splits_in_both_cases() {
        let mut cases = BTreeSet::new();
        for inst in diag_split_corpus(40, 1) {
            let cert = split_atom_diag(&inst.unit, &inst.focus, &inst.eval, &inst.term).unwrap();
            assert_eq!(cert.case(), predicted_case(&inst));
            cases.insert(format!("{:?}", cert.case().unwrap()));
            assert!(cert.check_invariance().unwrap().passed());
        }
        assert_eq!(cases.len(), 2);
    }

    #[test]
    fn crs_corpus_splits() {
        let corpus = crs_split_corpus(20, 2);
        assert_eq!(corpus.len(), 20);
        for inst in corpus {
            let cert = split_any_crs(&inst.unit, &inst.focus, &inst.eval, &inst.term).unwrap();
            assert!(cert.check_invariance().unwrap().passed());
        }
    }
}
