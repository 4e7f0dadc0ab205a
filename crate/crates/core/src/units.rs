//! Finite-window units of sequences.
//!
//! A unit represents a set of sequences of length α through their
//! restriction to a finite window of indices. Every sequence of a unit is
//! taken to agree with every other one at each index outside the window, so
//! updates and cylindrifications at off-window indices are no-ops and terms
//! are only ever evaluated over indices inside the window. Fresh coordinates
//! are materialized explicitly with [`Unit::extend_window`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::Index;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BaseElem(pub u32);

impl fmt::Display for BaseElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("index {0} is outside the window")]
    OffWindow(Index),
    #[error("index {0} is already in the window")]
    IndexCollision(Index),
    #[error("sequence windows differ")]
    WindowMismatch,
    #[error("sequence has {got} values but the window has {expected} indices")]
    Arity { expected: usize, got: usize },
    #[error("duplicate sequence {0}")]
    DuplicateSequence(String),
    #[error("duplicate index {0} in window")]
    DuplicateIndex(Index),
    #[error("malformed unit: {0}")]
    Malformed(String),
}

/// A finite, sorted set of indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Window(Vec<Index>);

impl Window {
    pub fn new<I: IntoIterator<Item = Index>>(indices: I) -> Result<Window, UnitError> {
        let mut v: Vec<Index> = indices.into_iter().collect();
        v.sort();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(UnitError::DuplicateIndex(w[0]));
        }
        Ok(Window(v))
    }

    /// `{0, …, n-1}`.
    pub fn range(n: u32) -> Window {
        Window((0..n).map(Index).collect())
    }

    pub fn indices(&self) -> &[Index] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, i: Index) -> Option<usize> {
        self.0.binary_search(&i).ok()
    }

    pub fn contains(&self, i: Index) -> bool {
        self.position(i).is_some()
    }
}

/// A sequence restricted to a window: `values[k]` is the value at `window[k]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequence {
    window: Window,
    values: Vec<BaseElem>,
}

impl Sequence {
    pub fn new(window: Window, values: Vec<BaseElem>) -> Result<Sequence, UnitError> {
        if window.len() != values.len() {
            return Err(UnitError::Arity {
                expected: window.len(),
                got: values.len(),
            });
        }
        Ok(Sequence { window, values })
    }

    pub fn from_values(window: &Window, values: &[u32]) -> Result<Sequence, UnitError> {
        Sequence::new(
            window.clone(),
            values.iter().map(|&v| BaseElem(v)).collect(),
        )
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn values(&self) -> &[BaseElem] {
        &self.values
    }

    pub fn raw_values(&self) -> Vec<u32> {
        self.values.iter().map(|v| v.0).collect()
    }

    pub fn get(&self, i: Index) -> Option<BaseElem> {
        self.window.position(i).map(|p| self.values[p])
    }

    /// Value at a window index. Panics off-window.
    pub fn at(&self, i: Index) -> BaseElem {
        self.get(i)
            .unwrap_or_else(|| panic!("index {i} is outside the window"))
    }

    /// `f(i/u)`.
    pub fn update(&self, i: Index, u: BaseElem) -> Result<Sequence, UnitError> {
        let p = self.window.position(i).ok_or(UnitError::OffWindow(i))?;
        let mut out = self.clone();
        out.values[p] = u;
        Ok(out)
    }

    /// `f ≡_i g`: agreement at every index other than `i`.
    pub fn equiv_at(&self, other: &Sequence, i: Index) -> Result<bool, UnitError> {
        if self.window != other.window {
            return Err(UnitError::WindowMismatch);
        }
        let p = self.window.position(i).ok_or(UnitError::OffWindow(i))?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .all(|(k, (a, b))| k == p || a == b))
    }

    /// `f ≡_Γ g`: agreement at every window index outside `Γ`.
    pub fn equiv_outside(
        &self,
        other: &Sequence,
        gamma: &BTreeSet<Index>,
    ) -> Result<bool, UnitError> {
        if self.window != other.window {
            return Err(UnitError::WindowMismatch);
        }
        Ok(self
            .window
            .indices()
            .iter()
            .zip(self.values.iter().zip(&other.values))
            .all(|(i, (a, b))| gamma.contains(i) || a == b))
    }

    pub fn range(&self) -> BTreeSet<BaseElem> {
        self.values.iter().copied().collect()
    }

    /// The same sequence with constant values at new indices, as produced
    /// by [`Unit::extend_window`].
    pub fn extend(&self, new: &[(Index, BaseElem)]) -> Result<Sequence, UnitError> {
        if new.is_empty() {
            return Ok(self.clone());
        }
        let window = Window::new(
            self.window
                .indices()
                .iter()
                .copied()
                .chain(new.iter().map(|p| p.0)),
        )?;
        if let Some((i, _)) = new.iter().find(|(i, _)| self.window.contains(*i)) {
            return Err(UnitError::IndexCollision(*i));
        }
        Ok(extend_sequence(self, &window, new))
    }
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.values.iter().join(","))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassTag {
    Crs,
    D,
    G,
    Gs,
}

impl ClassTag {
    pub const ALL: [ClassTag; 4] = [ClassTag::Crs, ClassTag::D, ClassTag::G, ClassTag::Gs];
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ClassTag::Crs => "Crs",
            ClassTag::D => "D",
            ClassTag::G => "G",
            ClassTag::Gs => "Gs",
        };
        f.write_str(s)
    }
}

impl FromStr for ClassTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "crs" => Ok(ClassTag::Crs),
            "d" => Ok(ClassTag::D),
            "g" => Ok(ClassTag::G),
            "gs" => Ok(ClassTag::Gs),
            other => Err(format!(
                "unknown class `{other}` (expected crs, d, g or gs)"
            )),
        }
    }
}

/// On-disk form: `{"window":[0,1], "sequences":[[0,1],[1,1]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitFile {
    pub window: Vec<u32>,
    pub sequences: Vec<Vec<u32>>,
}

/// A finite set of sequences over one window, kept in lexicographic order.
/// Sequence positions (indices into that order) identify members in
/// evaluations and subsets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Unit {
    window: Window,
    seqs: Vec<Sequence>,
}

impl Unit {
    pub fn empty(window: Window) -> Unit {
        Unit {
            window,
            seqs: Vec::new(),
        }
    }

    pub fn from_sequences(window: Window, seqs: Vec<Sequence>) -> Result<Unit, UnitError> {
        let mut seqs = seqs;
        if seqs.iter().any(|s| s.window != window) {
            return Err(UnitError::WindowMismatch);
        }
        seqs.sort();
        if let Some(w) = seqs.windows(2).find(|w| w[0] == w[1]) {
            return Err(UnitError::DuplicateSequence(w[0].to_string()));
        }
        Ok(Unit { window, seqs })
    }

    /// Like [`Unit::from_sequences`] but duplicates are merged.
    pub fn from_set(
        window: Window,
        seqs: impl IntoIterator<Item = Sequence>,
    ) -> Result<Unit, UnitError> {
        let set: BTreeSet<Sequence> = seqs.into_iter().collect();
        Unit::from_sequences(window, set.into_iter().collect())
    }

    pub fn new(window: &[u32], sequences: &[&[u32]]) -> Result<Unit, UnitError> {
        let window = Window::new(window.iter().map(|&i| Index(i)))?;
        let seqs = sequences
            .iter()
            .map(|vs| Sequence::from_values(&window, vs))
            .collect::<Result<Vec<_>, _>>()?;
        Unit::from_sequences(window, seqs)
    }

    /// The full square `^window(base)`.
    pub fn full_square(window: Window, base: &[BaseElem]) -> Unit {
        let seqs = square_sequences(&window, base);
        Unit { window, seqs }
    }

    /// `⋃ ^window(U_k)` over the given blocks.
    pub fn union_of_squares(window: Window, blocks: &[Vec<BaseElem>]) -> Unit {
        let seqs = blocks
            .iter()
            .flat_map(|b| square_sequences(&window, b))
            .collect::<Vec<_>>();
        Unit::from_set(window, seqs).expect("square sequences share the window")
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn sequences(&self) -> &[Sequence] {
        &self.seqs
    }

    pub fn len(&self) -> usize {
        self.seqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seqs.is_empty()
    }

    pub fn position(&self, f: &Sequence) -> Option<usize> {
        self.seqs.binary_search(f).ok()
    }

    pub fn contains(&self, f: &Sequence) -> bool {
        self.position(f).is_some()
    }

    /// Union of the ranges of all member sequences.
    pub fn base(&self) -> BTreeSet<BaseElem> {
        self.seqs
            .iter()
            .flat_map(|s| s.values.iter().copied())
            .collect()
    }

    pub fn is_diagonalizable(&self) -> bool {
        let idx = self.window.indices();
        self.seqs.iter().all(|f| {
            idx.iter().all(|&i| {
                idx.iter()
                    .all(|&j| self.contains(&f.update(i, f.at(j)).expect("window index")))
            })
        })
    }

    /// Union of squares: every member's range square lies inside the unit.
    pub fn is_union_of_squares(&self) -> bool {
        self.seqs.iter().all(|f| {
            let range: Vec<BaseElem> = f.range().into_iter().collect();
            self.contains_square(&range)
        })
    }

    /// Union of pairwise disjoint squares: the square over every connected
    /// component of the "occur together in a sequence" relation lies inside
    /// the unit.
    pub fn is_union_of_disjoint_squares(&self) -> bool {
        self.base_components()
            .iter()
            .all(|block| self.contains_square(block))
    }

    fn contains_square(&self, base: &[BaseElem]) -> bool {
        let n = self.window.len();
        if n == 0 {
            return true;
        }
        (0..n)
            .map(|_| base.iter().copied())
            .multi_cartesian_product()
            .all(|vals| {
                self.contains(&Sequence {
                    window: self.window.clone(),
                    values: vals,
                })
            })
    }

    /// Connected components of the base, in increasing order of least element.
    pub fn base_components(&self) -> Vec<Vec<BaseElem>> {
        let base: Vec<BaseElem> = self.base().into_iter().collect();
        let id: BTreeMap<BaseElem, usize> = base.iter().enumerate().map(|(k, b)| (*b, k)).collect();
        let mut parent: Vec<usize> = (0..base.len()).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut c = x;
            while parent[c] != r {
                let next = parent[c];
                parent[c] = r;
                c = next;
            }
            r
        }
        for f in &self.seqs {
            let mut vals = f.values.iter().map(|v| id[v]);
            if let Some(first) = vals.next() {
                for v in vals {
                    let (a, b) = (find(&mut parent, first), find(&mut parent, v));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut blocks: BTreeMap<usize, Vec<BaseElem>> = BTreeMap::new();
        for (k, b) in base.iter().enumerate() {
            let r = find(&mut parent, k);
            blocks.entry(r).or_default().push(*b);
        }
        blocks.into_values().collect()
    }

    /// Class memberships of `P(V)`. `Crs` is always present.
    pub fn classify(&self) -> BTreeSet<ClassTag> {
        let mut out = BTreeSet::from([ClassTag::Crs]);
        if self.is_diagonalizable() {
            out.insert(ClassTag::D);
            if self.is_union_of_squares() {
                out.insert(ClassTag::G);
                if self.is_union_of_disjoint_squares() {
                    out.insert(ClassTag::Gs);
                }
            }
        }
        out
    }

    pub fn has_class(&self, tag: ClassTag) -> bool {
        match tag {
            ClassTag::Crs => true,
            ClassTag::D => self.is_diagonalizable(),
            ClassTag::G => self.is_diagonalizable() && self.is_union_of_squares(),
            ClassTag::Gs => {
                self.is_diagonalizable()
                    && self.is_union_of_squares()
                    && self.is_union_of_disjoint_squares()
            }
        }
    }

    /// Smallest superset closed under `f ↦ f(i/f(j))` for window `i, j`.
    pub fn diagonalization_closure(&self) -> Unit {
        let idx = self.window.indices().to_vec();
        let mut set: BTreeSet<Sequence> = self.seqs.iter().cloned().collect();
        let mut todo: Vec<Sequence> = self.seqs.clone();
        while let Some(f) = todo.pop() {
            for &i in &idx {
                for &j in &idx {
                    let g = f.update(i, f.at(j)).expect("window index");
                    if set.insert(g.clone()) {
                        todo.push(g);
                    }
                }
            }
        }
        Unit {
            window: self.window.clone(),
            seqs: set.into_iter().collect(),
        }
    }

    /// Adds new window indices, each carrying one constant value in every
    /// sequence. Member order is preserved.
    pub fn extend_window(&self, new: &[(Index, BaseElem)]) -> Result<Unit, UnitError> {
        let mut seen = BTreeSet::new();
        for (i, _) in new {
            if self.window.contains(*i) || !seen.insert(*i) {
                return Err(UnitError::IndexCollision(*i));
            }
        }
        if new.is_empty() {
            return Ok(self.clone());
        }
        let window = Window::new(
            self.window
                .indices()
                .iter()
                .copied()
                .chain(new.iter().map(|p| p.0)),
        )?;
        let seqs = self
            .seqs
            .iter()
            .map(|f| extend_sequence(f, &window, new))
            .collect();
        Ok(Unit { window, seqs })
    }

    pub fn add_sequence(&self, f: Sequence) -> Result<Unit, UnitError> {
        if f.window != self.window {
            return Err(UnitError::WindowMismatch);
        }
        let mut seqs = self.seqs.clone();
        if let Err(p) = seqs.binary_search(&f) {
            seqs.insert(p, f);
        }
        Ok(Unit {
            window: self.window.clone(),
            seqs,
        })
    }

    /// The `n` smallest naturals outside the base.
    pub fn fresh_base(&self, n: usize) -> Vec<BaseElem> {
        let base = self.base();
        (0u32..)
            .map(BaseElem)
            .filter(|b| !base.contains(b))
            .take(n)
            .collect()
    }

    /// The `n` smallest naturals outside both the window and `gamma`.
    pub fn fresh_indices(&self, gamma: &BTreeSet<Index>, n: usize) -> Vec<Index> {
        (0u32..)
            .map(Index)
            .filter(|i| !self.window.contains(*i) && !gamma.contains(i))
            .take(n)
            .collect()
    }

    pub fn to_file(&self) -> UnitFile {
        UnitFile {
            window: self.window.indices().iter().map(|i| i.0).collect(),
            sequences: self.seqs.iter().map(Sequence::raw_values).collect(),
        }
    }

    pub fn from_file(file: &UnitFile) -> Result<Unit, UnitError> {
        let window = Window::new(file.window.iter().map(|&i| Index(i)))?;
        let seqs = file
            .sequences
            .iter()
            .map(|vs| Sequence::from_values(&window, vs))
            .collect::<Result<Vec<_>, _>>()?;
        Unit::from_sequences(window, seqs)
    }

    pub fn from_json(text: &str) -> Result<Unit, UnitError> {
        let file: UnitFile =
            serde_json::from_str(text).map_err(|e| UnitError::Malformed(e.to_string()))?;
        Unit::from_file(&file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("unit serializes")
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.seqs.iter().join(", "))
    }
}

fn square_sequences(window: &Window, base: &[BaseElem]) -> Vec<Sequence> {
    let n = window.len();
    if n == 0 {
        return vec![Sequence {
            window: window.clone(),
            values: vec![],
        }];
    }
    let mut sorted = base.to_vec();
    sorted.sort();
    sorted.dedup();
    (0..n)
        .map(|_| sorted.iter().copied())
        .multi_cartesian_product()
        .map(|values| Sequence {
            window: window.clone(),
            values,
        })
        .collect()
}

fn extend_sequence(f: &Sequence, window: &Window, new: &[(Index, BaseElem)]) -> Sequence {
    let values = window
        .indices()
        .iter()
        .map(|&i| match f.get(i) {
            Some(v) => v,
            None => new.iter().find(|p| p.0 == i).expect("new index").1,
        })
        .collect();
    Sequence {
        window: window.clone(),
        values,
    }
}

/// Every unit over base `{0..base_size-1}` with at most `max_seqs` members
/// carrying `tag`, each exactly once: by size, then lexicographically by the
/// positions of the members in the full square.
pub fn enumerate_units(
    window: Window,
    base_size: u32,
    max_seqs: usize,
    tag: ClassTag,
) -> impl Iterator<Item = Unit> + Clone {
    let base: Vec<BaseElem> = (0..base_size).map(BaseElem).collect();
    let square = square_sequences(&window, &base);
    let max = max_seqs.min(square.len());
    (0..=max)
        .flat_map(move |k| {
            let window = window.clone();
            square
                .clone()
                .into_iter()
                .combinations(k)
                .map(move |seqs| Unit {
                    window: window.clone(),
                    seqs,
                })
        })
        .filter(move |u| u.has_class(tag))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w01() -> Window {
        Window::range(2)
    }

    fn seq(vs: &[u32]) -> Sequence {
        Sequence::from_values(&Window::range(vs.len() as u32), vs).unwrap()
    }

    fn tags(ts: &[ClassTag]) -> BTreeSet<ClassTag> {
        ts.iter().copied().collect()
    }

    #[test]
    fn update_examples() {
        let f = seq(&[0, 1]);
        assert_eq!(f.update(Index(0), BaseElem(1)).unwrap(), seq(&[1, 1]));
        assert_eq!(f.update(Index(1), BaseElem(1)).unwrap(), f);
        assert_eq!(
            f.update(Index(5), BaseElem(0)),
            Err(UnitError::OffWindow(Index(5)))
        );
    }

    #[test]
    fn equivalence_examples() {
        let f = seq(&[0, 1]);
        assert!(f.equiv_at(&seq(&[1, 1]), Index(0)).unwrap());
        assert!(!f.equiv_at(&seq(&[0, 0]), Index(0)).unwrap());
        assert!(f.equiv_at(&f, Index(1)).unwrap());
        assert_eq!(
            f.equiv_at(&seq(&[0, 1, 2]), Index(0)),
            Err(UnitError::WindowMismatch)
        );

        let g0 = BTreeSet::from([Index(0)]);
        assert!(f.equiv_outside(&seq(&[1, 1]), &g0).unwrap());
        assert!(!f.equiv_outside(&seq(&[1, 0]), &g0).unwrap());
        let all = BTreeSet::from([Index(0), Index(1)]);
        assert!(f.equiv_outside(&seq(&[1, 0]), &all).unwrap());
    }

    #[test]
    fn base_examples() {
        let b = |u: Unit| u.base().into_iter().map(|b| b.0).collect::<Vec<_>>();
        assert_eq!(b(Unit::new(&[0, 1], &[&[0, 1]]).unwrap()), vec![0, 1]);
        assert!(b(Unit::empty(w01())).is_empty());
        assert_eq!(
            b(Unit::new(&[0, 1], &[&[0, 0], &[2, 2]]).unwrap()),
            vec![0, 2]
        );
    }

    #[test]
    fn classify_examples() {
        use ClassTag::*;
        let all = tags(&[Crs, D, G, Gs]);
        assert_eq!(
            Unit::new(&[0, 1], &[&[0, 0], &[1, 1]]).unwrap().classify(),
            all
        );
        assert_eq!(
            Unit::new(&[0, 1], &[&[0, 1]]).unwrap().classify(),
            tags(&[Crs])
        );
        let sq = Unit::full_square(w01(), &[BaseElem(0), BaseElem(1)]);
        assert_eq!(sq.len(), 4);
        assert_eq!(sq.classify(), all);
    }

    #[test]
    fn overlapping_squares_are_g_not_gs() {
        use ClassTag::*;
        let blocks = vec![
            vec![BaseElem(0), BaseElem(1)],
            vec![BaseElem(1), BaseElem(2)],
        ];
        let v = Unit::union_of_squares(w01(), &blocks);
        assert_eq!(v.len(), 7);
        assert_eq!(v.classify(), tags(&[Crs, D, G]));
        assert_eq!(
            v.base_components(),
            vec![vec![BaseElem(0), BaseElem(1), BaseElem(2)]]
        );
    }

    #[test]
    fn diagonalizable_but_not_square() {
        let v = Unit::new(&[0, 1], &[&[0, 1]])
            .unwrap()
            .diagonalization_closure();
        assert_eq!(v.classify(), tags(&[ClassTag::Crs, ClassTag::D]));
    }

    #[test]
    fn closure_examples() {
        let v = Unit::new(&[0, 1], &[&[0, 1]]).unwrap();
        assert_eq!(
            v.diagonalization_closure(),
            Unit::new(&[0, 1], &[&[0, 1], &[0, 0], &[1, 1]]).unwrap()
        );
        let sq = Unit::full_square(w01(), &[BaseElem(0), BaseElem(1)]);
        assert_eq!(sq.diagonalization_closure(), sq);
        assert_eq!(
            Unit::empty(w01()).diagonalization_closure(),
            Unit::empty(w01())
        );
    }

    #[test]
    fn extend_window_examples() {
        let v = Unit::new(&[0, 1], &[&[0, 1]]).unwrap();
        let e = v.extend_window(&[(Index(2), BaseElem(0))]).unwrap();
        assert_eq!(e, Unit::new(&[0, 1, 2], &[&[0, 1, 0]]).unwrap());
        assert_eq!(v.extend_window(&[]).unwrap(), v);
        assert_eq!(
            v.extend_window(&[(Index(1), BaseElem(0))]),
            Err(UnitError::IndexCollision(Index(1)))
        );
        assert_eq!(
            v.extend_window(&[(Index(3), BaseElem(0)), (Index(3), BaseElem(1))]),
            Err(UnitError::IndexCollision(Index(3)))
        );
    }

    #[test]
    fn extend_window_interleaves_indices_and_keeps_order() {
        let v = Unit::new(&[0, 3], &[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
        let e = v.extend_window(&[(Index(1), BaseElem(7))]).unwrap();
        assert_eq!(e.window().indices(), &[Index(0), Index(1), Index(3)]);
        for (a, b) in v.sequences().iter().zip(e.sequences()) {
            assert_eq!(a.at(Index(0)), b.at(Index(0)));
            assert_eq!(a.at(Index(3)), b.at(Index(3)));
            assert_eq!(b.at(Index(1)), BaseElem(7));
        }
    }

    #[test]
    fn fresh_helpers() {
        let v = Unit::new(&[0, 1], &[&[0, 1]]).unwrap();
        assert_eq!(v.fresh_base(2), vec![BaseElem(2), BaseElem(3)]);
        let gamma = BTreeSet::from([Index(0), Index(1)]);
        assert_eq!(v.fresh_indices(&gamma, 2), vec![Index(2), Index(3)]);
        let gamma = BTreeSet::from([Index(2)]);
        assert_eq!(v.fresh_indices(&gamma, 2), vec![Index(3), Index(4)]);
        let f = seq(&[0, 1]);
        assert_eq!(v.add_sequence(f).unwrap(), v);
        assert_eq!(v.add_sequence(seq(&[0])), Err(UnitError::WindowMismatch));
    }

    #[test]
    fn enumeration_examples() {
        let crs: Vec<Unit> = enumerate_units(w01(), 1, 1, ClassTag::Crs).collect();
        assert_eq!(
            crs,
            vec![Unit::empty(w01()), Unit::new(&[0, 1], &[&[0, 0]]).unwrap()]
        );

        assert_eq!(enumerate_units(w01(), 2, 16, ClassTag::Crs).count(), 16);

        let gs: Vec<Unit> = enumerate_units(w01(), 2, 16, ClassTag::Gs).collect();
        assert!(gs.contains(&Unit::full_square(w01(), &[BaseElem(0), BaseElem(1)])));
        assert!(gs.contains(&Unit::new(&[0, 1], &[&[0, 0], &[1, 1]]).unwrap()));
        assert!(!gs.contains(&Unit::new(&[0, 1], &[&[0, 1]]).unwrap()));
        // ∅, {00}, {11}, {00,11}, the full square.
        assert_eq!(gs.len(), 5);
    }

    #[test]
    fn singletons_require_diagonalization() {
        for u in enumerate_units(Window::range(3), 2, 1, ClassTag::Crs).skip(1) {
            let c = u.classify();
            let const_seq = u.sequences()[0].range().len() == 1;
            assert_eq!(c.contains(&ClassTag::Gs), const_seq, "{u}");
        }
    }

    #[test]
    fn unit_file_roundtrip_and_errors() {
        let v = Unit::from_json(r#"{"window":[0,1], "sequences":[[1,1],[0,1]]}"#).unwrap();
        assert_eq!(v.sequences()[0], seq(&[0, 1]));
        assert_eq!(Unit::from_json(&v.to_json()).unwrap(), v);
        assert!(matches!(
            Unit::from_json(r#"{"window":[0,1], "sequences":[[1]]}"#),
            Err(UnitError::Arity {
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            Unit::from_json(r#"{"window":[0,1], "sequences":[[1,1],[1,1]]}"#),
            Err(UnitError::DuplicateSequence(_))
        ));
        assert!(matches!(Unit::from_json("{"), Err(UnitError::Malformed(_))));
        assert!(matches!(
            Unit::from_json(r#"{"window":[0,0], "sequences":[]}"#),
            Err(UnitError::DuplicateIndex(Index(0)))
        ));
    }
}
