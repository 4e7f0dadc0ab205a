//! Evaluation of cylindric terms in full set algebras `P(V)` and in the
//! mapped witness algebra, together with law checkers and a bounded search
//! for counterexamples to term identities.

use std::collections::{BTreeMap, HashMap};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exec;
use crate::term::{Index, Term};
use crate::units::{
    enumerate_units, BaseElem, ClassTag, Sequence, Unit, UnitError, UnitFile, Window,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("index {0} is outside the algebra's dimensions")]
    OffWindow(Index),
    #[error("variable x{0} is not assigned")]
    Unassigned(usize),
    #[error("subset over {got} points used in an algebra with {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("sequence {0} is not a member of the unit")]
    NotMember(String),
    #[error("position {pos} out of range for a unit with {len} sequences")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("bad variable name `{0}` (expected x<k>)")]
    BadVariable(String),
    #[error("mapped algebra dimension must be between 2 and 4, got {0}")]
    BadDimension(u32),
    #[error("malformed evaluation: {0}")]
    Malformed(String),
    #[error(transparent)]
    Unit(#[from] UnitError),
}

/// A subset of a finite carrier, identified by member positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subset(FixedBitSet);

impl Subset {
    pub fn empty(len: usize) -> Subset {
        Subset(FixedBitSet::with_capacity(len))
    }

    pub fn full(len: usize) -> Subset {
        let mut b = FixedBitSet::with_capacity(len);
        b.insert_range(..);
        Subset(b)
    }

    pub fn from_positions<I: IntoIterator<Item = usize>>(
        len: usize,
        positions: I,
    ) -> Result<Subset, SemanticsError> {
        let mut b = FixedBitSet::with_capacity(len);
        for p in positions {
            if p >= len {
                return Err(SemanticsError::PositionOutOfRange { pos: p, len });
            }
            b.insert(p);
        }
        Ok(Subset(b))
    }

    /// The subset whose members are the set bits of `mask`.
    pub fn from_mask(len: usize, mask: u64) -> Subset {
        let mut b = FixedBitSet::with_capacity(len);
        for p in 0..len.min(64) {
            if mask >> p & 1 == 1 {
                b.insert(p);
            }
        }
        Subset(b)
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn count(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.0.contains(p)
    }

    pub fn insert(&mut self, p: usize) {
        self.0.insert(p);
    }

    pub fn positions(&self) -> Vec<usize> {
        self.0.ones().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.ones().next()
    }

    pub fn union(&self, other: &Subset) -> Subset {
        let mut b = self.0.clone();
        b.union_with(&other.0);
        Subset(b)
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        let mut b = self.0.clone();
        b.intersect_with(&other.0);
        Subset(b)
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        let mut b = self.0.clone();
        b.difference_with(&other.0);
        Subset(b)
    }

    pub fn symmetric_difference(&self, other: &Subset) -> Subset {
        let mut b = self.0.clone();
        b.symmetric_difference_with(&other.0);
        Subset(b)
    }

    pub fn complement(&self) -> Subset {
        let mut b = self.0.clone();
        b.toggle_range(..);
        Subset(b)
    }

    pub fn is_subset(&self, other: &Subset) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        self.0.is_disjoint(&other.0)
    }
}

impl Serialize for Subset {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.ones())
    }
}

/// Cylindric-type operations over the subsets of a finite carrier. Boolean
/// structure is plain set algebra on [`Subset`]; implementors supply the
/// cylindrifications and diagonals.
pub trait SetAlgebra {
    fn size(&self) -> usize;

    fn has_index(&self, i: Index) -> bool;

    /// `c_i x`. Only called with indices accepted by `has_index`.
    fn cyl(&self, i: Index, x: &Subset) -> Subset;

    /// `d_ij`. Only called with indices accepted by `has_index`.
    fn diag(&self, i: Index, j: Index) -> Subset;

    fn zero(&self) -> Subset {
        Subset::empty(self.size())
    }

    fn one(&self) -> Subset {
        Subset::full(self.size())
    }
}

/// For every dimension, the partition of the carrier whose blocks are the
/// points that cylindrification along that dimension identifies.
#[derive(Clone, Debug)]
struct Blocks {
    class_of: Vec<u32>,
    classes: usize,
}

impl Blocks {
    fn build<K: Eq + std::hash::Hash>(keys: impl Iterator<Item = K>) -> Blocks {
        let mut ids: HashMap<K, u32> = HashMap::new();
        let class_of = keys
            .map(|k| {
                let next = ids.len() as u32;
                *ids.entry(k).or_insert(next)
            })
            .collect();
        Blocks {
            class_of,
            classes: ids.len(),
        }
    }

    fn saturate(&self, x: &Subset) -> Subset {
        let mut hit = vec![false; self.classes];
        for p in x.0.ones() {
            hit[self.class_of[p] as usize] = true;
        }
        let mut out = FixedBitSet::with_capacity(self.class_of.len());
        for (p, c) in self.class_of.iter().enumerate() {
            if hit[*c as usize] {
                out.insert(p);
            }
        }
        Subset(out)
    }
}

/// The full cylindric-like algebra `P(V)` over a unit.
#[derive(Clone, Debug)]
pub struct FullSetAlgebra {
    unit: Unit,
    blocks: Vec<Blocks>,
}

impl FullSetAlgebra {
    pub fn new(unit: &Unit) -> FullSetAlgebra {
        let blocks = (0..unit.window().len())
            .map(|w| {
                Blocks::build(unit.sequences().iter().map(|f| {
                    let mut key = f.values().to_vec();
                    key.remove(w);
                    key
                }))
            })
            .collect();
        FullSetAlgebra {
            unit: unit.clone(),
            blocks,
        }
    }

    pub fn unit(&self) -> &Unit {
        &self.unit
    }
}

impl SetAlgebra for FullSetAlgebra {
    fn size(&self) -> usize {
        self.unit.len()
    }

    fn has_index(&self, i: Index) -> bool {
        self.unit.window().contains(i)
    }

    fn cyl(&self, i: Index, x: &Subset) -> Subset {
        let w = self.unit.window().position(i).expect("window index");
        self.blocks[w].saturate(x)
    }

    fn diag(&self, i: Index, j: Index) -> Subset {
        let mut out = FixedBitSet::with_capacity(self.unit.len());
        for (p, f) in self.unit.sequences().iter().enumerate() {
            if f.at(i) == f.at(j) {
                out.insert(p);
            }
        }
        Subset(out)
    }
}

/// The non-representable cylindric algebra on `B = ^ΔΔ ∪ {p′}` with
/// `Δ = {0..n-1}`: `p′` is an extra point that cylindrifications see as the
/// identity sequence `p`, but which lies on no proper diagonal.
///
/// Carrier positions `0..n^n` hold `^ΔΔ` in lexicographic order (the same
/// order as `Unit::full_square`); position `n^n` is `p′`.
#[derive(Clone, Debug)]
pub struct MappedUnitAlgebra {
    n: u32,
    points: Vec<Vec<u32>>,
    identity: usize,
    blocks: Vec<Blocks>,
}

impl MappedUnitAlgebra {
    pub fn new(n: u32) -> Result<MappedUnitAlgebra, SemanticsError> {
        if !(2..=4).contains(&n) {
            return Err(SemanticsError::BadDimension(n));
        }
        let square = Unit::full_square(Window::range(n), &(0..n).map(BaseElem).collect::<Vec<_>>());
        let points: Vec<Vec<u32>> = square
            .sequences()
            .iter()
            .map(Sequence::raw_values)
            .collect();
        let p: Vec<u32> = (0..n).collect();
        let identity = points.binary_search(&p).expect("identity sequence");
        let blocks = (0..n as usize)
            .map(|w| {
                Blocks::build((0..=points.len()).map(|pos| {
                    let mut key = points[if pos == points.len() { identity } else { pos }].clone();
                    key.remove(w);
                    key
                }))
            })
            .collect();
        Ok(MappedUnitAlgebra {
            n,
            points,
            identity,
            blocks,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    /// Position of the identity sequence `p`.
    pub fn identity(&self) -> usize {
        self.identity
    }

    /// Position of the extra point `p′`.
    pub fn extra(&self) -> usize {
        self.points.len()
    }

    /// The sequence at a carrier position; `None` for `p′`.
    pub fn point(&self, pos: usize) -> Option<&[u32]> {
        self.points.get(pos).map(Vec::as_slice)
    }

    /// `h`: `p′ ↦ p`, identity elsewhere.
    pub fn relabel(&self, pos: usize) -> &[u32] {
        self.point(pos).unwrap_or(&self.points[self.identity])
    }

    /// The subset `^ΔΔ` (everything but `p′`).
    pub fn square(&self) -> Subset {
        let mut s = Subset::full(self.size());
        s.0.set(self.extra(), false);
        s
    }

    pub fn singleton(&self, pos: usize) -> Subset {
        let mut s = self.zero();
        s.insert(pos);
        s
    }
}

impl SetAlgebra for MappedUnitAlgebra {
    fn size(&self) -> usize {
        self.points.len() + 1
    }

    fn has_index(&self, i: Index) -> bool {
        i.0 < self.n
    }

    fn cyl(&self, i: Index, x: &Subset) -> Subset {
        self.blocks[i.0 as usize].saturate(x)
    }

    fn diag(&self, i: Index, j: Index) -> Subset {
        if i == j {
            return self.one();
        }
        let mut out = FixedBitSet::with_capacity(self.size());
        for (p, q) in self.points.iter().enumerate() {
            if q[i.0 as usize] == q[j.0 as usize] {
                out.insert(p);
            }
        }
        Subset(out)
    }
}

/// An assignment of subsets of one carrier to variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Evaluation(BTreeMap<usize, Subset>);

impl Evaluation {
    pub fn new() -> Evaluation {
        Evaluation::default()
    }

    pub fn with(mut self, k: usize, s: Subset) -> Evaluation {
        self.0.insert(k, s);
        self
    }

    pub fn insert(&mut self, k: usize, s: Subset) {
        self.0.insert(k, s);
    }

    pub fn get(&self, k: usize) -> Option<&Subset> {
        self.0.get(&k)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Subset)> {
        self.0.iter().map(|(k, s)| (*k, s))
    }

    /// Variables `0..m` in order, all assigned.
    pub fn from_vec(values: Vec<Subset>) -> Evaluation {
        Evaluation(values.into_iter().enumerate().collect())
    }

    /// Applies `f` to every assigned subset.
    pub fn map(&self, mut f: impl FnMut(&Subset) -> Subset) -> Evaluation {
        Evaluation(self.0.iter().map(|(k, s)| (*k, f(s))).collect())
    }

    /// Moves every assignment from `from` to `to` through a sequence map;
    /// members without an image in `to` are dropped.
    pub fn transport(
        &self,
        from: &Unit,
        to: &Unit,
        image: impl Fn(&Sequence) -> Option<Sequence>,
    ) -> Evaluation {
        self.map(|s| {
            let mut out = Subset::empty(to.len());
            for p in s.positions() {
                if let Some(q) = image(&from.sequences()[p]).and_then(|g| to.position(&g)) {
                    out.insert(q);
                }
            }
            out
        })
    }

    pub fn to_file(&self) -> BTreeMap<String, Vec<usize>> {
        self.0
            .iter()
            .map(|(k, s)| (format!("x{k}"), s.positions()))
            .collect()
    }

    pub fn from_file(
        file: &BTreeMap<String, Vec<usize>>,
        len: usize,
    ) -> Result<Evaluation, SemanticsError> {
        let mut out = Evaluation::new();
        for (name, positions) in file {
            let k = parse_var_name(name)?;
            out.insert(k, Subset::from_positions(len, positions.iter().copied())?);
        }
        Ok(out)
    }

    /// Parses `{"x0":[0], "x1":[]}` against a carrier of `len` points.
    pub fn from_json(text: &str, len: usize) -> Result<Evaluation, SemanticsError> {
        let file: BTreeMap<String, Vec<usize>> =
            serde_json::from_str(text).map_err(|e| SemanticsError::Malformed(e.to_string()))?;
        Evaluation::from_file(&file, len)
    }
}

impl Serialize for Evaluation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

pub fn parse_var_name(name: &str) -> Result<usize, SemanticsError> {
    name.strip_prefix('x')
        .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| SemanticsError::BadVariable(name.to_string()))
}

fn check_term<A: SetAlgebra + ?Sized>(
    alg: &A,
    t: &Term,
    ev: &Evaluation,
) -> Result<(), SemanticsError> {
    if let Some(i) = t.index_set().into_iter().find(|i| !alg.has_index(*i)) {
        return Err(SemanticsError::OffWindow(i));
    }
    check_assigned(alg, t, ev)
}

fn check_assigned<A: SetAlgebra + ?Sized>(
    alg: &A,
    t: &Term,
    ev: &Evaluation,
) -> Result<(), SemanticsError> {
    match t {
        Term::Var(k) => match ev.get(*k) {
            None => Err(SemanticsError::Unassigned(*k)),
            Some(s) if s.universe() != alg.size() => Err(SemanticsError::SizeMismatch {
                expected: alg.size(),
                got: s.universe(),
            }),
            Some(_) => Ok(()),
        },
        Term::Zero | Term::One | Term::Diag(..) => Ok(()),
        Term::Not(a) | Term::Cyl(_, a) => check_assigned(alg, a, ev),
        Term::And(a, b) | Term::Or(a, b) => {
            check_assigned(alg, a, ev)?;
            check_assigned(alg, b, ev)
        }
    }
}

fn eval_unchecked<A: SetAlgebra + ?Sized>(alg: &A, t: &Term, ev: &Evaluation) -> Subset {
    match t {
        Term::Var(k) => ev.get(*k).expect("checked").clone(),
        Term::Zero => alg.zero(),
        Term::One => alg.one(),
        Term::Diag(i, j) => alg.diag(*i, *j),
        Term::Not(a) => eval_unchecked(alg, a, ev).complement(),
        Term::And(a, b) => eval_unchecked(alg, a, ev).intersection(&eval_unchecked(alg, b, ev)),
        Term::Or(a, b) => eval_unchecked(alg, a, ev).union(&eval_unchecked(alg, b, ev)),
        Term::Cyl(i, a) => alg.cyl(*i, &eval_unchecked(alg, a, ev)),
    }
}

/// Value of `t` in any set algebra under `ev`.
pub fn eval_in<A: SetAlgebra + ?Sized>(
    alg: &A,
    t: &Term,
    ev: &Evaluation,
) -> Result<Subset, SemanticsError> {
    check_term(alg, t, ev)?;
    Ok(eval_unchecked(alg, t, ev))
}

/// `D_ij^[V]`. `D_ii = V` for every `i`, inside the window or not.
pub fn diagonal(v: &Unit, i: Index, j: Index) -> Result<Subset, SemanticsError> {
    if i == j {
        return Ok(Subset::full(v.len()));
    }
    for k in [i, j] {
        if !v.window().contains(k) {
            return Err(SemanticsError::OffWindow(k));
        }
    }
    Ok(FullSetAlgebra::new(v).diag(i, j))
}

/// `C_i^[V] X`.
pub fn cylindrify(v: &Unit, i: Index, x: &Subset) -> Result<Subset, SemanticsError> {
    if !v.window().contains(i) {
        return Err(SemanticsError::OffWindow(i));
    }
    if x.universe() != v.len() {
        return Err(SemanticsError::SizeMismatch {
            expected: v.len(),
            got: x.universe(),
        });
    }
    Ok(FullSetAlgebra::new(v).cyl(i, x))
}

/// Value of `t` in `P(V)`.
pub fn eval(t: &Term, v: &Unit, ev: &Evaluation) -> Result<Subset, SemanticsError> {
    eval_in(&FullSetAlgebra::new(v), t, ev)
}

/// `(V, f, ι) ⊨ t`.
pub fn satisfies(
    v: &Unit,
    f: &Sequence,
    ev: &Evaluation,
    t: &Term,
) -> Result<bool, SemanticsError> {
    let pos = v
        .position(f)
        .ok_or_else(|| SemanticsError::NotMember(f.to_string()))?;
    Ok(eval(t, v, ev)?.contains(pos))
}

/// Value of `t` in the mapped witness algebra.
pub fn mapped_eval(
    t: &Term,
    alg: &MappedUnitAlgebra,
    ev: &Evaluation,
) -> Result<Subset, SemanticsError> {
    eval_in(alg, t, ev)
}

/// Every subset of an `n`-point carrier, ordered by bitmask. `n ≤ 20`.
pub fn all_subsets(n: usize) -> Vec<Subset> {
    assert!(n <= 20, "refusing to enumerate 2^{n} subsets");
    (0u64..1 << n).map(|m| Subset::from_mask(n, m)).collect()
}

/// `count` pseudo-random subsets (each point kept with probability 1/2).
pub fn random_subsets(n: usize, count: usize, seed: u64) -> Vec<Subset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_subset(&mut rng, n)).collect()
}

fn random_subset(rng: &mut impl Rng, n: usize) -> Subset {
    let mut s = Subset::empty(n);
    for p in 0..n {
        if rng.gen_bool(0.5) {
            s.insert(p);
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawWitness {
    pub indices: Vec<Index>,
    pub elements: Vec<Subset>,
}

/// One refuted law instance; serialized as a JSON line
/// `{"law":"CA4","unit":…,"witness":…}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawFailure {
    pub law: String,
    pub unit: Option<UnitFile>,
    pub witness: LawWitness,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub checked: u64,
    pub failed: u64,
    /// The first refuted instances (capped at [`CheckReport::MAX_RECORDED`]).
    pub failures: Vec<LawFailure>,
}

impl CheckReport {
    pub const MAX_RECORDED: usize = 256;

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    pub fn record(&mut self, law: &str, holds: bool, indices: &[Index], elements: &[&Subset]) {
        self.checked += 1;
        if !holds {
            self.failed += 1;
            if self.failures.len() < Self::MAX_RECORDED {
                self.failures.push(LawFailure {
                    law: law.to_string(),
                    unit: None,
                    witness: LawWitness {
                        indices: indices.to_vec(),
                        elements: elements.iter().map(|s| (*s).clone()).collect(),
                    },
                });
            }
        }
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checked += other.checked;
        self.failed += other.failed;
        let room = Self::MAX_RECORDED.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
    }

    /// Tags every recorded failure with the unit it was found in.
    pub fn in_unit(mut self, v: &Unit) -> CheckReport {
        for f in &mut self.failures {
            f.unit = Some(v.to_file());
        }
        self
    }

    pub fn failed_laws(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.failures.iter().map(|f| f.law.as_str()).collect();
        v.dedup();
        v
    }

    pub fn to_json_lines(&self) -> String {
        self.failures
            .iter()
            .map(|f| serde_json::to_string(f).expect("failure serializes") + "\n")
            .collect()
    }
}

/// Pairs of sample positions used for binary laws: all ordered pairs for up
/// to 64 elements, otherwise every element with its successor and with the
/// element half-way round the sample.
fn sample_pairs(n: usize) -> Vec<(usize, usize)> {
    if n <= 64 {
        (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
    } else {
        (0..n)
            .flat_map(|a| [(a, (a + 1) % n), (a, (a + n / 2) % n)])
            .collect()
    }
}

/// Refutes instances of the cylindric postulates CA0–CA7 over the given
/// sample of elements and indices. A clean report is evidence, not proof.
pub fn check_ca_axioms<A: SetAlgebra + ?Sized>(
    alg: &A,
    elems: &[Subset],
    indices: &[Index],
) -> CheckReport {
    let mut r = CheckReport::default();
    let zero = alg.zero();
    let one = alg.one();
    let pairs = sample_pairs(elems.len());

    // CA0: Boolean axioms on the sample.
    for x in elems {
        let nx = x.complement();
        r.record(
            "CA0",
            x.union(&nx) == one && x.intersection(&nx).is_empty(),
            &[],
            &[x],
        );
        r.record("CA0", nx.complement() == *x, &[], &[x]);
    }
    for &(a, b) in &pairs {
        let (x, y) = (&elems[a], &elems[b]);
        let z = &elems[(a + b) % elems.len()];
        r.record(
            "CA0",
            x.union(y).complement() == x.complement().intersection(&y.complement())
                && x.intersection(&y.union(z)) == x.intersection(y).union(&x.intersection(z))
                && x.union(&x.intersection(y)) == *x,
            &[],
            &[x, y, z],
        );
    }

    for &i in indices {
        r.record("CA1", alg.cyl(i, &zero).is_empty(), &[i], &[]);
        r.record("CA5", alg.diag(i, i) == one, &[i], &[]);
        for x in elems {
            let cx = alg.cyl(i, x);
            r.record("CA2", x.union(&cx) == cx, &[i], &[x]);
        }
        for &(a, b) in &pairs {
            let (x, y) = (&elems[a], &elems[b]);
            let cy = alg.cyl(i, y);
            let lhs = alg.cyl(i, &x.intersection(&cy));
            r.record("CA3", lhs == alg.cyl(i, x).intersection(&cy), &[i], &[x, y]);
        }
        for &j in indices {
            if j <= i {
                continue;
            }
            for x in elems {
                let ij = alg.cyl(i, &alg.cyl(j, x));
                let ji = alg.cyl(j, &alg.cyl(i, x));
                r.record("CA4", ij == ji, &[i, j], &[x]);
            }
        }
        for &j in indices {
            for &k in indices {
                if k == i || k == j {
                    continue;
                }
                let rhs = alg.cyl(k, &alg.diag(i, k).intersection(&alg.diag(k, j)));
                r.record("CA6", alg.diag(i, j) == rhs, &[i, j, k], &[]);
            }
            if j == i {
                continue;
            }
            let dij = alg.diag(i, j);
            for x in elems {
                let a = alg.cyl(i, &dij.intersection(x));
                let b = alg.cyl(i, &dij.intersection(&x.complement()));
                r.record("CA7", a.is_disjoint(&b), &[i, j], &[x]);
            }
        }
    }
    r
}

/// Refutes instances of seven basic identities of `P(V)`: `c_i0 = 0`,
/// `x ≤ c_ix`, `c_i(x·c_iy) = c_ix·c_iy`, `c_i(x+y) = c_ix+c_iy`,
/// `c_i−c_ix = −c_ix`, `d_ii = 1` and `c_i(x·d_ij)·d_ij = x·d_ij`.
pub fn check_eq_laws(v: &Unit, elems: &[Subset]) -> CheckReport {
    let alg = FullSetAlgebra::new(v);
    let idx = v.window().indices();
    let one = alg.one();
    let pairs = sample_pairs(elems.len());
    let mut r = CheckReport::default();
    for &i in idx {
        r.record("cyl-zero", alg.cyl(i, &alg.zero()).is_empty(), &[i], &[]);
        r.record("diag-reflexive", alg.diag(i, i) == one, &[i], &[]);
        for x in elems {
            let cx = alg.cyl(i, x);
            r.record("cyl-extensive", x.intersection(&cx) == *x, &[i], &[x]);
            let ncx = cx.complement();
            r.record("cyl-complement-closed", alg.cyl(i, &ncx) == ncx, &[i], &[x]);
        }
        for &(a, b) in &pairs {
            let (x, y) = (&elems[a], &elems[b]);
            let cy = alg.cyl(i, y);
            let cx = alg.cyl(i, x);
            r.record(
                "cyl-modular",
                alg.cyl(i, &x.intersection(&cy)) == cx.intersection(&cy),
                &[i],
                &[x, y],
            );
            r.record(
                "cyl-additive",
                alg.cyl(i, &x.union(y)) == cx.union(&cy),
                &[i],
                &[x, y],
            );
        }
        for &j in idx {
            if j == i {
                continue;
            }
            let dij = alg.diag(i, j);
            for x in elems {
                let xd = x.intersection(&dij);
                r.record(
                    "diag-substitution",
                    alg.cyl(i, &xd).intersection(&dij) == xd,
                    &[i, j],
                    &[x],
                );
            }
        }
    }
    r.in_unit(v)
}

/// Search space of [`bounded_validity`]: units over window
/// `{0..window_size-1}` and base `{0..base_size-1}` with at most `max_seqs`
/// members. Evaluations are enumerated exhaustively when a unit has at most
/// `max_eval_subsets` subsets, otherwise `max_eval_subsets` assignments are
/// sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub window_size: u32,
    pub base_size: u32,
    pub max_seqs: usize,
    pub max_eval_subsets: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SearchOptions {
    pub seed: u64,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub unit: UnitFile,
    #[serde(serialize_with = "ser_sequence")]
    pub focus: Sequence,
    pub eval: Evaluation,
    /// Whether `focus` lies in the left-hand side (and not the right).
    pub in_lhs: bool,
    #[serde(skip)]
    pub unit_ordinal: usize,
}

pub(crate) fn ser_sequence<S: Serializer>(f: &Sequence, s: S) -> Result<S::Ok, S::Error> {
    f.raw_values().serialize(s)
}

/// Outcome of a bounded search. An empty `counterexample` only means none
/// exists within the bounds; it is never a proof of validity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub lhs: String,
    pub rhs: String,
    pub class: ClassTag,
    pub bounds: Bounds,
    pub units_checked: u64,
    pub evaluations_checked: u64,
    /// Every unit's evaluations were enumerated rather than sampled.
    pub exhaustive: bool,
    pub counterexample: Option<Counterexample>,
}

enum EvalPlan {
    All { subsets: u64, vars: u32 },
    Sampled { count: usize },
}

impl EvalPlan {
    fn new(unit_len: usize, vars: usize, max_eval_subsets: usize) -> EvalPlan {
        if unit_len < 63 && (1u64 << unit_len) <= max_eval_subsets as u64 {
            EvalPlan::All {
                subsets: 1 << unit_len,
                vars: vars as u32,
            }
        } else {
            EvalPlan::Sampled {
                count: max_eval_subsets,
            }
        }
    }

    fn len(&self) -> u64 {
        match self {
            EvalPlan::All { subsets, vars } => subsets.pow(*vars),
            EvalPlan::Sampled { count } => *count as u64,
        }
    }
}

/// Searches the units of class `tag` within `bounds` for a point where
/// `lhs` and `rhs` disagree. The reported counterexample is the least one in
/// enumeration order (unit first, then evaluation), whatever the worker
/// count.
pub fn bounded_validity(
    lhs: &Term,
    rhs: &Term,
    tag: ClassTag,
    bounds: Bounds,
    opts: SearchOptions,
) -> Result<ValidityReport, SemanticsError> {
    let window = Window::range(bounds.window_size);
    if let Some(i) = lhs
        .index_set()
        .into_iter()
        .chain(rhs.index_set())
        .find(|i| !window.contains(*i))
    {
        return Err(SemanticsError::OffWindow(i));
    }
    let vars = lhs.var_count().max(rhs.var_count());
    let units: Vec<Unit> =
        enumerate_units(window, bounds.base_size, bounds.max_seqs, tag).collect();
    let plans: Vec<EvalPlan> = units
        .iter()
        .map(|u| EvalPlan::new(u.len(), vars, bounds.max_eval_subsets))
        .collect();
    let indexed: Vec<(usize, &Unit)> = units.iter().enumerate().collect();

    let found = if lhs == rhs {
        None
    } else {
        exec::with_workers(opts.workers, || {
            exec::find_map_first(&indexed, |(ord, unit)| {
                search_unit(lhs, rhs, unit, vars, &plans[*ord], opts.seed, *ord)
                    .map(|(k, cex)| (*ord, k, cex))
            })
        })
    };

    let exhaustive = plans.iter().all(|p| matches!(p, EvalPlan::All { .. }));
    let (units_checked, evaluations_checked, counterexample) = match found {
        Some((ord, k, cex)) => {
            let before: u64 = plans[..ord].iter().map(EvalPlan::len).sum();
            (ord as u64 + 1, before + k + 1, Some(cex))
        }
        None => (
            units.len() as u64,
            plans.iter().map(EvalPlan::len).sum(),
            None,
        ),
    };
    Ok(ValidityReport {
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        class: tag,
        bounds,
        units_checked,
        evaluations_checked,
        exhaustive,
        counterexample,
    })
}

fn search_unit(
    lhs: &Term,
    rhs: &Term,
    unit: &Unit,
    vars: usize,
    plan: &EvalPlan,
    seed: u64,
    ordinal: usize,
) -> Option<(u64, Counterexample)> {
    let alg = FullSetAlgebra::new(unit);
    let n = unit.len();
    let try_eval = |k: u64, ev: Evaluation| {
        let a = eval_unchecked(&alg, lhs, &ev);
        let b = eval_unchecked(&alg, rhs, &ev);
        a.symmetric_difference(&b).first().map(|p| {
            (
                k,
                Counterexample {
                    unit: unit.to_file(),
                    focus: unit.sequences()[p].clone(),
                    eval: ev,
                    in_lhs: a.contains(p),
                    unit_ordinal: ordinal,
                },
            )
        })
    };
    match plan {
        EvalPlan::All { subsets, .. } => (0..plan.len()).find_map(|k| {
            let mut rest = k;
            let ev = Evaluation::from_vec(
                (0..vars)
                    .map(|_| {
                        let mask = rest % subsets;
                        rest /= subsets;
                        Subset::from_mask(n, mask)
                    })
                    .collect(),
            );
            try_eval(k, ev)
        }),
        EvalPlan::Sampled { count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (ordinal as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            (0..*count as u64).find_map(|k| {
                let ev =
                    Evaluation::from_vec((0..vars).map(|_| random_subset(&mut rng, n)).collect());
                try_eval(k, ev)
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn square22() -> Unit {
        Unit::full_square(Window::range(2), &[BaseElem(0), BaseElem(1)])
    }

    fn seq(v: &Unit, vals: &[u32]) -> usize {
        v.position(&Sequence::from_values(v.window(), vals).unwrap())
            .unwrap()
    }

    fn set(v: &Unit, vals: &[&[u32]]) -> Subset {
        Subset::from_positions(v.len(), vals.iter().map(|s| seq(v, s))).unwrap()
    }

    #[test]
    fn diagonal_examples() {
        let v = square22();
        assert_eq!(
            diagonal(&v, Index(0), Index(1)).unwrap(),
            set(&v, &[&[0, 0], &[1, 1]])
        );
        assert_eq!(diagonal(&v, Index(0), Index(0)).unwrap(), Subset::full(4));
        assert_eq!(diagonal(&v, Index(7), Index(7)).unwrap(), Subset::full(4));
        let w = Unit::new(&[0, 1], &[&[0, 1]]).unwrap();
        assert!(diagonal(&w, Index(0), Index(1)).unwrap().is_empty());
        assert_eq!(
            diagonal(&v, Index(0), Index(5)),
            Err(SemanticsError::OffWindow(Index(5)))
        );
    }

    #[test]
    fn cylindrify_examples() {
        let v = square22();
        let x = set(&v, &[&[0, 0]]);
        assert_eq!(
            cylindrify(&v, Index(0), &x).unwrap(),
            set(&v, &[&[0, 0], &[1, 0]])
        );
        for i in [Index(0), Index(1)] {
            assert!(cylindrify(&v, i, &Subset::empty(4)).unwrap().is_empty());
            assert_eq!(
                cylindrify(&v, i, &Subset::full(4)).unwrap(),
                Subset::full(4)
            );
        }
        assert_eq!(
            cylindrify(&v, Index(2), &x),
            Err(SemanticsError::OffWindow(Index(2)))
        );
        assert!(matches!(
            cylindrify(&v, Index(0), &Subset::empty(3)),
            Err(SemanticsError::SizeMismatch {
                expected: 4,
                got: 3
            })
        ));
    }

    #[test]
    fn eval_examples() {
        let v = square22();
        let ev = Evaluation::new().with(0, set(&v, &[&[0, 0]]));
        let e = |s: &str| eval(&parse_term(s, 1).unwrap(), &v, &ev).unwrap();
        assert_eq!(e("c0 x0"), set(&v, &[&[0, 0], &[1, 0]]));
        assert_eq!(e("c0 -d01"), Subset::full(4));
        assert!(e("x0 . -x0").is_empty());
        assert_eq!(
            eval(&parse_term("x1", 2).unwrap(), &v, &ev),
            Err(SemanticsError::Unassigned(1))
        );
        assert_eq!(
            eval(&parse_term("c2 x0", 1).unwrap(), &v, &ev),
            Err(SemanticsError::OffWindow(Index(2)))
        );
    }

    #[test]
    fn satisfies_examples() {
        let v = square22();
        let ev = Evaluation::new().with(0, set(&v, &[&[0, 0]]));
        let f = Sequence::from_values(v.window(), &[0, 0]).unwrap();
        assert!(satisfies(&v, &f, &ev, &Term::diag(0, 1)).unwrap());
        for g in v.sequences() {
            assert!(!satisfies(&v, g, &ev, &Term::Zero).unwrap());
        }
        let stranger = Sequence::from_values(v.window(), &[5, 5]).unwrap();
        assert!(matches!(
            satisfies(&v, &stranger, &ev, &Term::One),
            Err(SemanticsError::NotMember(_))
        ));
    }

    fn mapped_set(a: &MappedUnitAlgebra, pts: &[&[u32]], extra: bool) -> Subset {
        let mut s = a.zero();
        for p in pts {
            s.insert((0..a.extra()).find(|&k| a.point(k) == Some(*p)).unwrap());
        }
        if extra {
            s.insert(a.extra());
        }
        s
    }

    #[test]
    fn mapped_eval_examples() {
        let a = MappedUnitAlgebra::new(2).unwrap();
        assert_eq!(a.size(), 5);
        assert_eq!(a.point(a.identity()), Some(&[0u32, 1][..]));
        let pa = a.singleton(a.identity());
        let pb = a.singleton(a.extra());
        let c0x = parse_term("c0 x0", 1).unwrap();
        let expected = mapped_set(&a, &[&[0, 1], &[1, 1]], true);
        let ev_a = Evaluation::new().with(0, pa.clone());
        let ev_b = Evaluation::new().with(0, pb.clone());
        assert_eq!(mapped_eval(&c0x, &a, &ev_a).unwrap(), expected);
        assert_eq!(mapped_eval(&c0x, &a, &ev_b).unwrap(), expected);
        let y = parse_term("c0 x0 . c1 x0 . -x0", 1).unwrap();
        assert_eq!(mapped_eval(&y, &a, &ev_a).unwrap(), pb);
        assert!(!a.diag(Index(0), Index(1)).contains(a.extra()));
        assert_eq!(a.diag(Index(1), Index(1)), a.one());
        assert_eq!(
            mapped_eval(&parse_term("c2 x0", 1).unwrap(), &a, &ev_a),
            Err(SemanticsError::OffWindow(Index(2)))
        );
        assert!(MappedUnitAlgebra::new(1).is_err());
        assert!(MappedUnitAlgebra::new(5).is_err());
    }

    #[test]
    fn mapped_cylinders_agree_with_the_square() {
        for n in 2..=3 {
            let a = MappedUnitAlgebra::new(n).unwrap();
            let sq = Unit::full_square(Window::range(n), &(0..n).map(BaseElem).collect::<Vec<_>>());
            let full = FullSetAlgebra::new(&sq);
            let restrict = |s: &Subset| {
                Subset::from_positions(
                    sq.len(),
                    s.positions().into_iter().filter(|&p| p < sq.len()),
                )
                .unwrap()
            };
            let lift = |s: &Subset| Subset::from_positions(a.size(), s.positions()).unwrap();
            for x in random_subsets(sq.len(), 200, 11) {
                for i in 0..n {
                    let m = a.cyl(Index(i), &lift(&x));
                    let c = full.cyl(Index(i), &x);
                    assert_eq!(restrict(&m), c);
                    assert_eq!(m.contains(a.extra()), c.contains(a.identity()));
                }
            }
        }
    }

    #[test]
    fn ca_axioms_on_full_square() {
        let v = square22();
        let r = check_ca_axioms(
            &FullSetAlgebra::new(&v),
            &all_subsets(4),
            &[Index(0), Index(1)],
        );
        assert!(r.passed(), "{:?}", r.failures.first());
        assert!(r.checked > 0);
    }

    #[test]
    fn ca4_fails_on_three_point_unit() {
        let v = Unit::new(&[0, 1], &[&[0, 0], &[1, 0], &[1, 1]]).unwrap();
        let x = set(&v, &[&[0, 0]]);
        let alg = FullSetAlgebra::new(&v);
        assert_eq!(
            alg.cyl(Index(0), &alg.cyl(Index(1), &x)),
            set(&v, &[&[0, 0], &[1, 0]])
        );
        assert_eq!(
            alg.cyl(Index(1), &alg.cyl(Index(0), &x)),
            set(&v, &[&[0, 0], &[1, 0], &[1, 1]])
        );
        let r = check_ca_axioms(&alg, &all_subsets(3), &[Index(0), Index(1)]).in_unit(&v);
        assert!(r.failed_laws().contains(&"CA4"));
        let line = r.to_json_lines();
        let first: serde_json::Value =
            serde_json::from_str(line.lines().find(|l| l.contains("CA4")).unwrap()).unwrap();
        assert_eq!(first["law"], "CA4");
        assert_eq!(first["unit"]["window"], serde_json::json!([0, 1]));
    }

    #[test]
    fn eq_laws_named_instances() {
        let v = square22();
        let r = check_eq_laws(&v, &all_subsets(4));
        assert!(r.passed());
        // Each law is instantiated on this unit.
        let alg = FullSetAlgebra::new(&v);
        for x in all_subsets(4) {
            for i in [Index(0), Index(1)] {
                assert!(x.is_subset(&alg.cyl(i, &x)));
                let ncx = alg.cyl(i, &x).complement();
                assert_eq!(alg.cyl(i, &ncx), ncx);
            }
        }
    }

    #[test]
    fn bounded_validity_trivial_and_ca4() {
        let t = parse_term("c0 c1 x0", 1).unwrap();
        let b = Bounds {
            window_size: 2,
            base_size: 2,
            max_seqs: 4,
            max_eval_subsets: 16,
        };
        let r = bounded_validity(&t, &t, ClassTag::Crs, b, SearchOptions::default()).unwrap();
        assert!(r.counterexample.is_none());
        assert_eq!(r.units_checked, 16);

        let s = parse_term("c1 c0 x0", 1).unwrap();
        let r = bounded_validity(&t, &s, ClassTag::Crs, b, SearchOptions::default()).unwrap();
        let cex = r
            .counterexample
            .expect("commutativity fails in some Crs unit");
        let unit = Unit::from_file(&cex.unit).unwrap();
        assert_eq!(unit.len(), 3);
        let lhs = eval(&t, &unit, &cex.eval).unwrap();
        let rhs = eval(&s, &unit, &cex.eval).unwrap();
        let p = unit.position(&cex.focus).unwrap();
        assert_ne!(lhs.contains(p), rhs.contains(p));
        assert_eq!(lhs.contains(p), cex.in_lhs);
    }

    #[test]
    fn bounded_validity_is_worker_independent() {
        let t = parse_term("c0 c1 x0", 1).unwrap();
        let s = parse_term("c1 c0 x0", 1).unwrap();
        let b = Bounds {
            window_size: 3,
            base_size: 2,
            max_seqs: 3,
            max_eval_subsets: 4,
        };
        let run = |w| {
            bounded_validity(
                &t,
                &s,
                ClassTag::Crs,
                b,
                SearchOptions {
                    seed: 7,
                    workers: w,
                },
            )
            .unwrap()
        };
        let one = run(1);
        assert!(!one.exhaustive);
        assert_eq!(one, run(4));
        assert_eq!(one, run(0));
    }

    #[test]
    fn bounded_validity_rejects_off_window_terms() {
        let t = parse_term("c3 x0", 1).unwrap();
        let b = Bounds {
            window_size: 2,
            base_size: 1,
            max_seqs: 1,
            max_eval_subsets: 4,
        };
        assert_eq!(
            bounded_validity(&t, &t, ClassTag::Crs, b, SearchOptions::default()),
            Err(SemanticsError::OffWindow(Index(3)))
        );
    }

    #[test]
    fn evaluation_file_format() {
        let v = square22();
        let ev = Evaluation::from_json(r#"{"x0":[0], "x1":[]}"#, v.len()).unwrap();
        assert_eq!(ev.get(0).unwrap().positions(), vec![0]);
        assert!(ev.get(1).unwrap().is_empty());
        assert_eq!(serde_json::to_string(&ev).unwrap(), r#"{"x0":[0],"x1":[]}"#);
        assert!(matches!(
            Evaluation::from_json(r#"{"y":[0]}"#, 4),
            Err(SemanticsError::BadVariable(_))
        ));
        assert!(matches!(
            Evaluation::from_json(r#"{"x0":[9]}"#, 4),
            Err(SemanticsError::PositionOutOfRange { pos: 9, len: 4 })
        ));
    }
}
