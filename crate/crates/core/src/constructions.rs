//! Witness and splitting constructions, each returning something a third
//! party can re-check with nothing but term evaluation.
//!
//! * [`singleton_witness`] and [`separation_suite`]: every atom term is
//!   nonzero, and distinct atom terms are separated.
//! * [`zero_dim_check`]: the atom terms do not depend on the choice of
//!   diagonal in diagonalizable units.
//! * [`split_atom_diag`]: below `c_0−d_{01}` nothing is an atom when units
//!   may be extended by one diagonalized point.
//! * [`split_any_crs`]: over arbitrary units nothing nonzero is an atom.
//! * [`witness_algebra`], [`check_e`], [`refute_e_in_gs2`]: the
//!   non-representable algebra on `^ΔΔ ∪ {p′}` and the equation system that
//!   separates it from every disjoint union of squares.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::semantics::{
    all_subsets, bounded_validity, check_ca_axioms, eval, eval_in, random_subsets, satisfies,
    Bounds, CheckReport, Evaluation, FullSetAlgebra, MappedUnitAlgebra, SearchOptions,
    SemanticsError, SetAlgebra, Subset, ValidityReport,
};
use crate::term::{
    self, atom_term, atom_term_at, chi_term, eta_term, parse_term, splitter_term, tau_term, y_term,
    ChoiceFunction, Index, Pivot, Sign, Term, TermError,
};
use crate::units::{BaseElem, ClassTag, Sequence, Unit, UnitError, UnitFile, Window};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("certificate does not verify: {0}")]
    InvalidCertificate(String),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Unit(#[from] UnitError),
    #[error("malformed certificate: {0}")]
    Malformed(String),
}

/// A model `(V, f, ι)` of a term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub unit: Unit,
    pub focus: Sequence,
    pub eval: Evaluation,
}

impl Witness {
    pub fn satisfies(&self, t: &Term) -> Result<bool, SemanticsError> {
        satisfies(&self.unit, &self.focus, &self.eval, t)
    }

    fn to_file(&self) -> WitnessFile {
        WitnessFile {
            unit: self.unit.to_file(),
            focus: self.focus.raw_values(),
            eval: self.eval.to_file(),
        }
    }

    fn from_file(w: &WitnessFile) -> Result<Witness, ConstructionError> {
        let unit = Unit::from_file(&w.unit)?;
        let focus = Sequence::from_values(unit.window(), &w.focus)?;
        let eval = Evaluation::from_file(&w.eval, unit.len())?;
        Ok(Witness { unit, focus, eval })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitCase {
    /// The pivot point agrees on the fresh pair.
    EqualFresh,
    /// The pivot point differs on the fresh pair.
    DistinctFresh,
}

/// How a certificate was produced; carries what the invariance checks need.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Construction {
    /// One new point `n ≡_i g` added to the (window-extended) unit.
    Diagonal {
        case: SplitCase,
        pivot: Pivot,
        gamma: BTreeSet<Index>,
        /// `(V, f, ι)` after window extension, before adding `n`.
        source: Witness,
        /// `g = f(p/u)` with `g(0) ≠ g(1)`.
        pivot_point: Sequence,
        new_point: Sequence,
    },
    /// The `≡_Γ`-class of `f` relabelled at the fresh pair with fresh base
    /// elements `a, b`.
    Relabel {
        gamma: BTreeSet<Index>,
        source: Witness,
        a: BaseElem,
        b: BaseElem,
    },
}

/// Evidence that `original` is not an atom: it meets both `splitter` and
/// its complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitCertificate {
    pub original: Term,
    pub splitter: Term,
    pub fresh: (Index, Index),
    /// Satisfies `original · −splitter`.
    pub negative: Witness,
    /// Satisfies `original · splitter`.
    pub positive: Witness,
    pub construction: Construction,
}

impl SplitCertificate {
    pub fn verify(&self) -> Result<(), ConstructionError> {
        let neg = Term::and(self.original.clone(), Term::not(self.splitter.clone()));
        let pos = Term::and(self.original.clone(), self.splitter.clone());
        if !self.negative.satisfies(&neg)? {
            return Err(ConstructionError::InvalidCertificate(format!(
                "negative witness does not satisfy {neg}"
            )));
        }
        if !self.positive.satisfies(&pos)? {
            return Err(ConstructionError::InvalidCertificate(format!(
                "positive witness does not satisfy {pos}"
            )));
        }
        Ok(())
    }

    pub fn case(&self) -> Option<SplitCase> {
        match &self.construction {
            Construction::Diagonal { case, .. } => Some(*case),
            Construction::Relabel { .. } => None,
        }
    }

    /// Checks, for every subterm `σ` of the original term and every `h` in
    /// the `≡_Γ`-class of the pivot point, that satisfaction is unchanged by
    /// the construction (`ι`, `ι₁`, `ι₂` agree for diagonal splits; `(V,h,ι)`
    /// and `(V*,h*,ι*)` agree for relabelling splits).
    pub fn check_invariance(&self) -> Result<CheckReport, ConstructionError> {
        let mut r = CheckReport::default();
        let subterms = self.original.subterms();
        match &self.construction {
            Construction::Diagonal {
                gamma,
                source,
                pivot_point,
                ..
            } => {
                let class: Vec<&Sequence> = source
                    .unit
                    .sequences()
                    .iter()
                    .filter(|h| h.equiv_outside(pivot_point, gamma).unwrap_or(false))
                    .collect();
                for sigma in &subterms {
                    let base = eval(sigma, &source.unit, &source.eval)?;
                    let one = eval(sigma, &self.negative.unit, &self.negative.eval)?;
                    let two = eval(sigma, &self.positive.unit, &self.positive.eval)?;
                    for h in &class {
                        let b = base.contains(source.unit.position(h).expect("member"));
                        let p1 = one.contains(self.negative.unit.position(h).ok_or_else(|| {
                            ConstructionError::InvalidCertificate(format!("{h} missing from V'"))
                        })?);
                        let p2 = two.contains(self.positive.unit.position(h).ok_or_else(|| {
                            ConstructionError::InvalidCertificate(format!("{h} missing from V'"))
                        })?);
                        r.record("diagonal-invariance", b == p1 && b == p2, &[], &[]);
                    }
                }
            }
            Construction::Relabel {
                gamma,
                source,
                a,
                b,
            } => {
                let star_of = |h: &Sequence| {
                    h.update(self.fresh.0, *a)
                        .and_then(|s| s.update(self.fresh.1, *b))
                };
                let relabelled = if self.positive.unit == source.unit {
                    &self.negative
                } else {
                    &self.positive
                };
                let class: Vec<&Sequence> = source
                    .unit
                    .sequences()
                    .iter()
                    .filter(|h| h.equiv_outside(&source.focus, gamma).unwrap_or(false))
                    .collect();
                for sigma in &subterms {
                    let base = eval(sigma, &source.unit, &source.eval)?;
                    let star = eval(sigma, &relabelled.unit, &relabelled.eval)?;
                    for h in &class {
                        let hs = star_of(h)?;
                        let q = relabelled.unit.position(&hs).ok_or_else(|| {
                            ConstructionError::InvalidCertificate(format!("{hs} missing from V*"))
                        })?;
                        let lhs = base.contains(source.unit.position(h).expect("member"));
                        r.record("relabel-invariance", lhs == star.contains(q), &[], &[]);
                    }
                }
            }
        }
        Ok(r)
    }

    pub fn to_file(&self) -> CertificateFile {
        let construction = match &self.construction {
            Construction::Diagonal {
                case,
                pivot,
                gamma,
                source,
                pivot_point,
                new_point,
            } => ConstructionFile::Diagonal {
                case: *case,
                pivot: *pivot,
                gamma: gamma.iter().map(|i| i.0).collect(),
                source: source.to_file(),
                pivot_point: pivot_point.raw_values(),
                new_point: new_point.raw_values(),
            },
            Construction::Relabel {
                gamma,
                source,
                a,
                b,
            } => ConstructionFile::Relabel {
                gamma: gamma.iter().map(|i| i.0).collect(),
                source: source.to_file(),
                a: a.0,
                b: b.0,
            },
        };
        CertificateFile {
            original: self.original.to_string(),
            splitter: self.splitter.to_string(),
            fresh: [self.fresh.0 .0, self.fresh.1 .0],
            negative: self.negative.to_file(),
            positive: self.positive.to_file(),
            construction,
        }
    }

    pub fn from_file(file: &CertificateFile) -> Result<SplitCertificate, ConstructionError> {
        let construction = match &file.construction {
            ConstructionFile::Diagonal {
                case,
                pivot,
                gamma,
                source,
                pivot_point,
                new_point,
            } => {
                let source = Witness::from_file(source)?;
                let new_window = &Unit::from_file(&file.positive.unit)?;
                Construction::Diagonal {
                    case: *case,
                    pivot: *pivot,
                    gamma: gamma.iter().map(|&i| Index(i)).collect(),
                    pivot_point: Sequence::from_values(source.unit.window(), pivot_point)?,
                    new_point: Sequence::from_values(new_window.window(), new_point)?,
                    source,
                }
            }
            ConstructionFile::Relabel {
                gamma,
                source,
                a,
                b,
            } => Construction::Relabel {
                gamma: gamma.iter().map(|&i| Index(i)).collect(),
                source: Witness::from_file(source)?,
                a: BaseElem(*a),
                b: BaseElem(*b),
            },
        };
        Ok(SplitCertificate {
            original: parse_term(&file.original, usize::MAX)?,
            splitter: parse_term(&file.splitter, usize::MAX)?,
            fresh: (Index(file.fresh[0]), Index(file.fresh[1])),
            negative: Witness::from_file(&file.negative)?,
            positive: Witness::from_file(&file.positive)?,
            construction,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<SplitCertificate, ConstructionError> {
        let file: CertificateFile =
            serde_json::from_str(text).map_err(|e| ConstructionError::Malformed(e.to_string()))?;
        SplitCertificate::from_file(&file)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub unit: UnitFile,
    pub focus: Vec<u32>,
    pub eval: BTreeMap<String, Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructionFile {
    Diagonal {
        case: SplitCase,
        pivot: Pivot,
        gamma: Vec<u32>,
        source: WitnessFile,
        pivot_point: Vec<u32>,
        new_point: Vec<u32>,
    },
    Relabel {
        gamma: Vec<u32>,
        source: WitnessFile,
        a: u32,
        b: u32,
    },
}

/// JSON form of a certificate; terms are in the text syntax.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub original: String,
    pub splitter: String,
    pub fresh: [u32; 2],
    pub negative: WitnessFile,
    pub positive: WitnessFile,
    pub construction: ConstructionFile,
}

/// The singleton unit `{w}` on window `{0,1}` with `w = ⟨0,0⟩` and
/// `ν(x_k) = {w}` exactly when `q(k) = +1`.
pub fn singleton_witness(m: usize, q: &ChoiceFunction) -> Result<Witness, ConstructionError> {
    if m == 0 {
        return Err(TermError::NoGenerators.into());
    }
    if q.arity() != m {
        return Err(TermError::ChoiceArity {
            got: q.arity(),
            expected: m,
        }
        .into());
    }
    let unit = Unit::new(&[0, 1], &[&[0, 0]])?;
    let focus = unit.sequences()[0].clone();
    let eval = Evaluation::from_vec(
        (0..m)
            .map(|k| match q.sign(k) {
                Sign::Pos => Subset::full(1),
                Sign::Neg => Subset::empty(1),
            })
            .collect(),
    );
    Ok(Witness { unit, focus, eval })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationReport {
    pub m: usize,
    pub atoms: usize,
    pub separations: usize,
    pub report: CheckReport,
}

/// For all choice functions `q ≠ q′`, the singleton witness for `q`
/// satisfies `atom_term(m, q)` and refutes `atom_term(m, q′)`.
pub fn separation_suite(m: usize) -> Result<SeparationReport, ConstructionError> {
    let qs: Vec<ChoiceFunction> = ChoiceFunction::all(m).collect();
    let terms = qs
        .iter()
        .map(|q| atom_term(m, q))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = CheckReport::default();
    let mut separations = 0;
    for (a, q) in qs.iter().enumerate() {
        let w = singleton_witness(m, q)?;
        report.record("atom-nonzero", w.satisfies(&terms[a])?, &[], &[]);
        for (b, t) in terms.iter().enumerate() {
            if a != b {
                separations += 1;
                report.record("atom-separation", !w.satisfies(t)?, &[], &[]);
            }
        }
    }
    Ok(SeparationReport {
        m,
        atoms: qs.len(),
        separations,
        report,
    })
}

/// Bounded search for a counterexample to
/// `X^q·−c_0−d_{01} = X^q·−c_i−d_{ij}` over units of class `tag`.
pub fn zero_dim_check(
    m: usize,
    q: &ChoiceFunction,
    i: Index,
    j: Index,
    tag: ClassTag,
    bounds: Bounds,
    opts: SearchOptions,
) -> Result<ValidityReport, ConstructionError> {
    if i == j {
        return Err(ConstructionError::Precondition(
            "zero_dim_check needs i ≠ j".into(),
        ));
    }
    let lhs = atom_term(m, q)?;
    let rhs = atom_term_at(q, i, j);
    Ok(bounded_validity(&lhs, &rhs, tag, bounds, opts)?)
}

fn two_outside(gamma: &BTreeSet<Index>) -> (Index, Index) {
    let mut it = (0u32..).map(Index).filter(|i| !gamma.contains(i));
    (it.next().expect("infinite"), it.next().expect("infinite"))
}

fn with_x0(ev: &Evaluation, len: usize) -> Evaluation {
    let mut ev = ev.clone();
    if ev.get(0).is_none() {
        ev.insert(0, Subset::empty(len));
    }
    ev
}

/// Splits `τ · c_0−d_{01}` into two nonzero parts.
pub fn split_atom_diag(
    v: &Unit,
    f: &Sequence,
    ev: &Evaluation,
    tau: &Term,
) -> Result<SplitCertificate, ConstructionError> {
    split_atom_diag_with_pivot(v, f, ev, tau, Pivot::Zero)
}

/// Splits `τ · c_p−d_{01}` (`p` the pivot) into two nonzero parts, given a
/// model `(V, f, ι)` of it.
///
/// With `g = f(p/u) ∈ −d_{01}` and `i, j` the two least indices outside
/// `Γ = index(τ) ∪ {0,1}` (added to the window as constants `g(1−p)` when
/// missing), one point `n ≡_i g` is added: `g(i/v)` with `v ∈ {g(p),
/// g(1−p)}` differing from `g(j)` when `g(i) = g(j)`, and `g(i/g(j))`
/// otherwise. `ι₁` keeps only points agreeing with `g` on whether `i` and
/// `j` coincide, `ι₂ = ι₁ ∪ {n}`, and `c_p(−d_{01} · c_i(x_0 · ±d_{ij}))`
/// separates them.
pub fn split_atom_diag_with_pivot(
    v: &Unit,
    f: &Sequence,
    ev: &Evaluation,
    tau: &Term,
    pivot: Pivot,
) -> Result<SplitCertificate, ConstructionError> {
    let p = pivot.index();
    let other = Index(1 - p.0);
    let original = Term::and(
        tau.clone(),
        Term::Cyl(p, Box::new(Term::not(Term::diag(0, 1)))),
    );
    let mut gamma = tau.index_set();
    gamma.extend([Index(0), Index(1)]);
    if let Some(k) = gamma.iter().find(|k| !v.window().contains(**k)) {
        return Err(ConstructionError::Precondition(format!(
            "index {k} of the term is outside the window"
        )));
    }
    let ev = with_x0(ev, v.len());
    if !satisfies(v, f, &ev, &original)? {
        return Err(ConstructionError::Precondition(format!(
            "{f} does not satisfy {original}"
        )));
    }
    let g = v
        .sequences()
        .iter()
        .find(|g| g.equiv_at(f, p).unwrap_or(false) && g.at(Index(0)) != g.at(Index(1)))
        .expect("c_p−d01 holds at f")
        .clone();

    let (i, j) = two_outside(&gamma);
    let new: Vec<(Index, BaseElem)> = [i, j]
        .into_iter()
        .filter(|k| !v.window().contains(*k))
        .map(|k| (k, g.at(other)))
        .collect();
    let v_ext = v.extend_window(&new)?;
    let f_ext = f.extend(&new)?;
    let g_ext = g.extend(&new)?;
    let ev_ext = ev.transport(v, &v_ext, |h| h.extend(&new).ok());

    let (case, new_point, sign) = if g_ext.at(i) == g_ext.at(j) {
        let value = [g_ext.at(p), g_ext.at(other)]
            .into_iter()
            .find(|u| *u != g_ext.at(j))
            .expect("g(0) ≠ g(1)");
        (SplitCase::EqualFresh, g_ext.update(i, value)?, Sign::Neg)
    } else {
        (
            SplitCase::DistinctFresh,
            g_ext.update(i, g_ext.at(j))?,
            Sign::Pos,
        )
    };
    let keep_same_shape = |h: &Sequence| (h.at(i) == h.at(j)) == (case == SplitCase::EqualFresh);

    let v2 = v_ext.add_sequence(new_point.clone())?;
    let n_pos = v2.position(&new_point).expect("just added");
    let ev1 = ev_ext.transport(&v_ext, &v2, |h| keep_same_shape(h).then(|| h.clone()));
    let ev2 = ev1.map(|s| {
        let mut s = s.clone();
        s.insert(n_pos);
        s
    });

    let cert = SplitCertificate {
        original,
        splitter: splitter_term(i, j, sign, pivot)?,
        fresh: (i, j),
        negative: Witness {
            unit: v2.clone(),
            focus: f_ext.clone(),
            eval: ev1,
        },
        positive: Witness {
            unit: v2,
            focus: f_ext.clone(),
            eval: ev2,
        },
        construction: Construction::Diagonal {
            case,
            pivot,
            gamma,
            source: Witness {
                unit: v_ext,
                focus: f_ext,
                eval: ev_ext,
            },
            pivot_point: g_ext,
            new_point,
        },
    };
    cert.verify()?;
    Ok(cert)
}

/// Splits any nonzero `τ` over arbitrary units by `d_{ij}` for the two least
/// indices `i, j` outside `index(τ)` (missing ones added to the window as
/// constants). One half is the input model; the other relabels the
/// `≡_Γ`-class of `f` at `i, j` with fresh base elements `a, b`, where
/// `a = b` exactly when `f(i) ≠ f(j)`.
pub fn split_any_crs(
    v: &Unit,
    f: &Sequence,
    ev: &Evaluation,
    tau: &Term,
) -> Result<SplitCertificate, ConstructionError> {
    let gamma = tau.index_set();
    if let Some(k) = gamma.iter().find(|k| !v.window().contains(**k)) {
        return Err(ConstructionError::Precondition(format!(
            "index {k} of the term is outside the window"
        )));
    }
    if !satisfies(v, f, ev, tau)? {
        return Err(ConstructionError::Precondition(format!(
            "{f} does not satisfy {tau}"
        )));
    }
    let (i, j) = two_outside(&gamma);
    let new: Vec<(Index, BaseElem)> = [i, j]
        .into_iter()
        .filter(|k| !v.window().contains(*k))
        .map(|k| (k, BaseElem(0)))
        .collect();
    let v_ext = v.extend_window(&new)?;
    let f_ext = f.extend(&new)?;
    let ev_ext = ev.transport(v, &v_ext, |h| h.extend(&new).ok());

    let fresh = v_ext.fresh_base(2);
    let same = f_ext.at(i) == f_ext.at(j);
    let (a, b) = (fresh[0], if same { fresh[1] } else { fresh[0] });
    let star = |h: &Sequence| h.update(i, a).and_then(|s| s.update(j, b));
    let in_class = |h: &Sequence| h.equiv_outside(&f_ext, &gamma).unwrap_or(false);

    let v_star = Unit::from_set(
        v_ext.window().clone(),
        v_ext
            .sequences()
            .iter()
            .filter(|h| in_class(h))
            .map(star)
            .collect::<Result<Vec<_>, _>>()?,
    )?;
    let ev_star = ev_ext.transport(&v_ext, &v_star, |h| {
        if in_class(h) {
            star(h).ok()
        } else {
            None
        }
    });
    let relabelled = Witness {
        unit: v_star,
        focus: star(&f_ext)?,
        eval: ev_star,
    };
    let source = Witness {
        unit: v_ext,
        focus: f_ext,
        eval: ev_ext,
    };
    let (positive, negative) = if same {
        (source.clone(), relabelled)
    } else {
        (relabelled, source.clone())
    };
    let cert = SplitCertificate {
        original: tau.clone(),
        splitter: Term::Diag(i, j),
        fresh: (i, j),
        negative,
        positive,
        construction: Construction::Relabel {
            gamma,
            source,
            a,
            b,
        },
    };
    cert.verify()?;
    Ok(cert)
}

/// Sub-checks of the witness that `τ(x)` is nonzero in some cylindric
/// algebra while lying below every `−d_{ij}` with `i, j ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessAlgebraReport {
    pub n: u32,
    pub carrier_size: usize,
    /// `y(a) = c_0a·c_1a − a = {p′}`.
    pub y_is_extra_point: bool,
    /// `c_0a = c_0b` and `c_1a = c_1b` with `b = y(a)`.
    pub cylinders_agree: [bool; 2],
    /// `c_1(d_{01}·c_0a)·c_0a ≤ d_{01}` and the same with 0 and 1 swapped.
    pub diagonal_bounds: [bool; 2],
    pub chi_is_one: bool,
    pub tau_is_a: bool,
    /// `τ(a) · d_{ij} = 0` for `2 ≤ i < j < n`.
    pub tau_off_diagonals: Vec<(Index, Index, bool)>,
}

impl WitnessAlgebraReport {
    pub fn all_hold(&self) -> bool {
        self.y_is_extra_point
            && self.cylinders_agree.iter().all(|b| *b)
            && self.diagonal_bounds.iter().all(|b| *b)
            && self.chi_is_one
            && self.tau_is_a
            && self.tau_off_diagonals.iter().all(|t| t.2)
    }
}

/// `τ(a)` and `η(a)` with `a = {p}`.
pub fn witness_values(alg: &MappedUnitAlgebra) -> Result<(Subset, Subset), ConstructionError> {
    let ev = Evaluation::new().with(0, alg.singleton(alg.identity()));
    Ok((
        eval_in(alg, &tau_term(), &ev)?,
        eval_in(alg, &eta_term(), &ev)?,
    ))
}

pub fn witness_algebra(
    n: u32,
) -> Result<(MappedUnitAlgebra, WitnessAlgebraReport), ConstructionError> {
    let alg = MappedUnitAlgebra::new(n)?;
    let a = alg.singleton(alg.identity());
    let ev = Evaluation::new().with(0, a.clone());
    let y = eval_in(&alg, &y_term(), &ev)?;
    let (i0, i1) = (Index(0), Index(1));
    let d01 = alg.diag(i0, i1);
    let bound = |i: Index, k: Index| {
        let ck = alg.cyl(k, &a);
        alg.cyl(i, &d01.intersection(&ck))
            .intersection(&ck)
            .is_subset(&d01)
    };
    let chi = eval_in(&alg, &chi_term(), &ev)?;
    let tau = eval_in(&alg, &tau_term(), &ev)?;
    let tau_off_diagonals = (2..n)
        .flat_map(|i| (i + 1..n).map(move |j| (Index(i), Index(j))))
        .map(|(i, j)| (i, j, tau.is_disjoint(&alg.diag(i, j))))
        .collect();
    let report = WitnessAlgebraReport {
        n,
        carrier_size: alg.size(),
        y_is_extra_point: y == alg.singleton(alg.extra()),
        cylinders_agree: [
            alg.cyl(i0, &a) == alg.cyl(i0, &y),
            alg.cyl(i1, &a) == alg.cyl(i1, &y),
        ],
        diagonal_bounds: [bound(i1, i0), bound(i0, i1)],
        chi_is_one: chi == alg.one(),
        tau_is_a: tau == a,
        tau_off_diagonals,
    };
    Ok((alg, report))
}

/// CA0–CA7 over `samples` seeded random subsets of the mapped algebra.
pub fn mapped_ca_spot_check(alg: &MappedUnitAlgebra, samples: usize, seed: u64) -> CheckReport {
    let elems = random_subsets(alg.size(), samples, seed);
    let indices: Vec<Index> = (0..alg.dimension()).map(Index).collect();
    check_ca_axioms(alg, &elems, &indices)
}

/// The system `E(X, Y)`:
/// `X·Y = 0`, `X ≠ 0`, `c_iX = c_iY` for `i ∈ {0,1}`, and
/// `c_i(d_{01}·c_kX)·c_kX ≤ d_{01}` for `{i,k} = {0,1}`.
pub struct ESystemInstance<'a, A: SetAlgebra + ?Sized> {
    pub algebra: &'a A,
    pub x: Subset,
    pub y: Subset,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EReport {
    pub disjoint: bool,
    pub nonzero: bool,
    pub cylinders_agree: [bool; 2],
    /// `k = 0, i = 1` then `k = 1, i = 0`.
    pub diagonal_bounds: [bool; 2],
}

impl EReport {
    pub fn holds(&self) -> bool {
        self.disjoint
            && self.nonzero
            && self.cylinders_agree.iter().all(|b| *b)
            && self.diagonal_bounds.iter().all(|b| *b)
    }
}

impl<A: SetAlgebra + ?Sized> ESystemInstance<'_, A> {
    pub fn check(&self) -> EReport {
        check_e(self.algebra, &self.x, &self.y)
    }
}

pub fn check_e<A: SetAlgebra + ?Sized>(alg: &A, x: &Subset, y: &Subset) -> EReport {
    let (i0, i1) = (Index(0), Index(1));
    let d01 = alg.diag(i0, i1);
    let bound = |i: Index, k: Index| {
        let ck = alg.cyl(k, x);
        alg.cyl(i, &d01.intersection(&ck))
            .intersection(&ck)
            .is_subset(&d01)
    };
    EReport {
        disjoint: x.is_disjoint(y),
        nonzero: !x.is_empty(),
        cylinders_agree: [
            alg.cyl(i0, x) == alg.cyl(i0, y),
            alg.cyl(i1, x) == alg.cyl(i1, y),
        ],
        diagonal_bounds: [bound(i1, i0), bound(i0, i1)],
    }
}

/// Short-circuiting `check_e(..).holds()`.
pub fn e_holds<A: SetAlgebra + ?Sized>(alg: &A, x: &Subset, y: &Subset) -> bool {
    if x.is_empty() || !x.is_disjoint(y) {
        return false;
    }
    let (i0, i1) = (Index(0), Index(1));
    if alg.cyl(i0, x) != alg.cyl(i0, y) || alg.cyl(i1, x) != alg.cyl(i1, y) {
        return false;
    }
    check_e(alg, x, y).holds()
}

/// All set partitions of `{0..n-1}`, blocks in order of least element.
pub fn set_partitions(n: u32) -> Vec<Vec<Vec<BaseElem>>> {
    fn go(k: u32, n: u32, blocks: &mut Vec<Vec<BaseElem>>, out: &mut Vec<Vec<Vec<BaseElem>>>) {
        if k == n {
            out.push(blocks.clone());
            return;
        }
        for b in 0..blocks.len() {
            blocks[b].push(BaseElem(k));
            go(k + 1, n, blocks, out);
            blocks[b].pop();
        }
        blocks.push(vec![BaseElem(k)]);
        go(k + 1, n, blocks, out);
        blocks.pop();
    }
    let mut out = Vec::new();
    go(0, n, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GsUnitSummary {
    pub blocks: Vec<Vec<BaseElem>>,
    pub sequences: usize,
    pub pairs_checked: u64,
    pub satisfying: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RefuteReport {
    pub max_base: u32,
    pub units: Vec<GsUnitSummary>,
    pub pairs_checked: u64,
    pub satisfying: u64,
    /// The first `(unit, X, Y)` satisfying `E`, if any.
    pub first_satisfying: Option<(UnitFile, Subset, Subset)>,
}

impl RefuteReport {
    pub fn refuted(&self) -> bool {
        self.satisfying == 0
    }

    pub fn to_check_report(&self) -> CheckReport {
        let mut r = CheckReport {
            checked: self.pairs_checked,
            failed: self.satisfying,
            failures: Vec::new(),
        };
        if let Some((unit, x, y)) = &self.first_satisfying {
            r.failures.push(crate::semantics::LawFailure {
                law: "E-fails-in-Gs2".into(),
                unit: Some(unit.clone()),
                witness: crate::semantics::LawWitness {
                    indices: vec![],
                    elements: vec![x.clone(), y.clone()],
                },
            });
        }
        r
    }
}

/// Checks `E(X, Y)` for every pair of subsets of every two-dimensional
/// disjoint union of squares over base `{0..b-1}`, `1 ≤ b ≤ max_base`.
pub fn refute_e_in_gs2(max_base: u32, workers: usize) -> RefuteReport {
    let mut units = Vec::new();
    let mut first = None;
    for b in 1..=max_base {
        for blocks in set_partitions(b) {
            let unit = Unit::union_of_squares(Window::range(2), &blocks);
            let alg = FullSetAlgebra::new(&unit);
            let subsets = all_subsets(unit.len());
            let hits: Vec<Vec<usize>> = exec::with_workers(workers, || {
                exec::map_collect(&subsets, |x| {
                    subsets
                        .iter()
                        .enumerate()
                        .filter(|(_, y)| e_holds(&alg, x, y))
                        .map(|(k, _)| k)
                        .collect()
                })
            });
            let satisfying: u64 = hits.iter().map(|h| h.len() as u64).sum();
            if first.is_none() {
                if let Some((xi, ys)) = hits.iter().enumerate().find(|(_, h)| !h.is_empty()) {
                    first = Some((unit.to_file(), subsets[xi].clone(), subsets[ys[0]].clone()));
                }
            }
            units.push(GsUnitSummary {
                blocks,
                sequences: unit.len(),
                pairs_checked: (subsets.len() * subsets.len()) as u64,
                satisfying,
            });
        }
    }
    RefuteReport {
        max_base,
        pairs_checked: units.iter().map(|u| u.pairs_checked).sum(),
        satisfying: units.iter().map(|u| u.satisfying).sum(),
        units,
        first_satisfying: first,
    }
}

/// One-line summary for logs; the JSON form is the canonical one.
pub fn describe(cert: &SplitCertificate) -> String {
    format!(
        "{} split by {} at fresh ({}, {})",
        term::render_term(&cert.original),
        term::render_term(&cert.splitter),
        cert.fresh.0,
        cert.fresh.1
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::all_subsets;

    fn q(signs: &[i8]) -> ChoiceFunction {
        ChoiceFunction(
            signs
                .iter()
                .map(|s| if *s > 0 { Sign::Pos } else { Sign::Neg })
                .collect(),
        )
    }

    #[test]
    fn singleton_witness_examples() {
        let w = singleton_witness(1, &q(&[1])).unwrap();
        assert_eq!(w.unit, Unit::new(&[0, 1], &[&[0, 0]]).unwrap());
        assert_eq!(w.eval.get(0).unwrap().positions(), vec![0]);
        assert!(w.satisfies(&atom_term(1, &q(&[1])).unwrap()).unwrap());

        let w = singleton_witness(1, &q(&[-1])).unwrap();
        assert!(w.eval.get(0).unwrap().is_empty());
        assert!(w
            .satisfies(&parse_term("-x0 . -c0 -d01", 1).unwrap())
            .unwrap());

        assert!(singleton_witness(0, &q(&[])).is_err());
        assert!(w.unit.has_class(ClassTag::Gs));
    }

    #[test]
    fn separation_counts() {
        for (m, atoms, seps) in [(1, 2, 2), (2, 4, 12), (3, 8, 56)] {
            let r = separation_suite(m).unwrap();
            assert_eq!((r.atoms, r.separations), (atoms, seps));
            assert!(r.report.passed());
            assert_eq!(r.report.checked as usize, atoms + seps);
        }
    }

    #[test]
    fn zero_dim_trivial_pair() {
        let b = Bounds {
            window_size: 2,
            base_size: 2,
            max_seqs: 4,
            max_eval_subsets: 16,
        };
        let r = zero_dim_check(
            1,
            &q(&[1]),
            Index(0),
            Index(1),
            ClassTag::D,
            b,
            SearchOptions::default(),
        )
        .unwrap();
        assert!(r.counterexample.is_none());
        assert_eq!(r.lhs, r.rhs);
    }

    fn full_square_01() -> Unit {
        Unit::full_square(Window::range(2), &[BaseElem(0), BaseElem(1)])
    }

    #[test]
    fn split_full_square_uses_constant_extension() {
        let v = full_square_01();
        let f = Sequence::from_values(v.window(), &[0, 1]).unwrap();
        let ev = Evaluation::new().with(0, Subset::full(4));
        let cert = split_atom_diag(&v, &f, &ev, &Term::var(0)).unwrap();
        assert_eq!(cert.fresh, (Index(2), Index(3)));
        assert_eq!(cert.case(), Some(SplitCase::EqualFresh));
        assert_eq!(cert.splitter.to_string(), "c0(-d01 . c2(x0 . -d23))");
        let Construction::Diagonal {
            pivot_point,
            new_point,
            ..
        } = &cert.construction
        else {
            panic!("diagonal construction expected");
        };
        // g = f itself, extended by the constant g(1) = 1; n = g(2/g(0)).
        assert_eq!(pivot_point.raw_values(), vec![0, 1, 1, 1]);
        assert_eq!(new_point.raw_values(), vec![0, 1, 0, 1]);
        cert.verify().unwrap();
        assert!(cert.check_invariance().unwrap().passed());
    }

    #[test]
    fn split_on_diagonalization_closure() {
        let v = Unit::new(&[0, 1], &[&[0, 1]])
            .unwrap()
            .diagonalization_closure();
        let f = Sequence::from_values(v.window(), &[0, 1]).unwrap();
        let ev = Evaluation::new().with(0, Subset::full(v.len()));
        let cert = split_atom_diag(&v, &f, &ev, &Term::var(0)).unwrap();
        cert.verify().unwrap();
        assert!(cert.check_invariance().unwrap().passed());
    }

    #[test]
    fn split_distinct_fresh_case() {
        // Window already holds 2 and 3 with g(2) ≠ g(3).
        let v = Unit::new(&[0, 1, 2, 3], &[&[0, 1, 0, 1], &[1, 1, 0, 1]]).unwrap();
        let f = Sequence::from_values(v.window(), &[1, 1, 0, 1]).unwrap();
        let ev = Evaluation::new().with(0, Subset::full(2));
        let cert = split_atom_diag(&v, &f, &ev, &Term::var(0)).unwrap();
        assert_eq!(cert.case(), Some(SplitCase::DistinctFresh));
        assert_eq!(cert.splitter.to_string(), "c0(-d01 . c2(x0 . d23))");
        assert!(cert.check_invariance().unwrap().passed());
    }

    #[test]
    fn split_equal_fresh_with_g0_on_the_fresh_value() {
        // g(2) = g(3) = g(0): the new point must take g(1) at 2.
        let v = Unit::new(&[0, 1, 2, 3], &[&[0, 1, 0, 0], &[1, 1, 0, 0]]).unwrap();
        let f = Sequence::from_values(v.window(), &[1, 1, 0, 0]).unwrap();
        let ev = Evaluation::new().with(0, Subset::full(2));
        let cert = split_atom_diag(&v, &f, &ev, &Term::var(0)).unwrap();
        assert_eq!(cert.case(), Some(SplitCase::EqualFresh));
        let Construction::Diagonal { new_point, .. } = &cert.construction else {
            panic!()
        };
        assert_eq!(new_point.raw_values(), vec![0, 1, 1, 0]);
        assert!(cert.check_invariance().unwrap().passed());
    }

    #[test]
    fn split_with_pivot_one() {
        // f ⊨ c1−d01 via g = f(1/0), but f ⊭ c0−d01.
        let v = Unit::new(&[0, 1], &[&[1, 1], &[1, 0]]).unwrap();
        let f = Sequence::from_values(v.window(), &[1, 1]).unwrap();
        let ev = Evaluation::new().with(0, Subset::full(2));
        assert!(split_atom_diag(&v, &f, &ev, &Term::var(0)).is_err());
        let cert = split_atom_diag_with_pivot(&v, &f, &ev, &Term::var(0), Pivot::One).unwrap();
        assert_eq!(cert.splitter.to_string(), "c1(-d01 . c2(x0 . -d23))");
        assert!(cert.check_invariance().unwrap().passed());
    }

    #[test]
    fn split_precondition_errors() {
        let v = Unit::new(&[0, 1], &[&[0, 0]]).unwrap();
        let f = v.sequences()[0].clone();
        let ev = Evaluation::new().with(0, Subset::full(1));
        assert!(matches!(
            split_atom_diag(&v, &f, &ev, &Term::var(0)),
            Err(ConstructionError::Precondition(_))
        ));
        assert!(matches!(
            split_any_crs(&v, &f, &ev, &Term::Zero),
            Err(ConstructionError::Precondition(_))
        ));
        assert!(matches!(
            split_any_crs(&v, &f, &ev, &Term::cyl(4, Term::One)),
            Err(ConstructionError::Precondition(_))
        ));
    }

    #[test]
    fn crs_split_examples() {
        let v = Unit::new(&[0, 1], &[&[0, 1]]).unwrap();
        let f = v.sequences()[0].clone();
        let ev = Evaluation::new().with(0, Subset::full(1));
        let cert = split_any_crs(&v, &f, &ev, &Term::var(0)).unwrap();
        // index(x0) is empty, so the fresh pair is (0, 1).
        assert_eq!(cert.splitter.to_string(), "d01");
        assert!(cert.check_invariance().unwrap().passed());

        let q1 = q(&[1]);
        let w = singleton_witness(1, &q1).unwrap();
        let t = atom_term(1, &q1).unwrap();
        let cert = split_any_crs(&w.unit, &w.focus, &w.eval, &t).unwrap();
        assert!(cert.check_invariance().unwrap().passed());
        // The atom term survives in both halves: not an atom over all units.
        assert!(cert.positive.satisfies(&t).unwrap());
        assert!(cert.negative.satisfies(&t).unwrap());
    }

    #[test]
    fn crs_split_with_window_indices_outside_gamma() {
        // i, j already in the window and f(i) ≠ f(j): then a = b.
        let v = Unit::new(&[0, 1, 2], &[&[0, 1, 2], &[1, 1, 0]]).unwrap();
        let f = Sequence::from_values(v.window(), &[0, 1, 2]).unwrap();
        let ev = Evaluation::new().with(0, Subset::full(2));
        let tau = Term::cyl(1, Term::var(0));
        let cert = split_any_crs(&v, &f, &ev, &tau).unwrap();
        assert_eq!(cert.fresh, (Index(0), Index(2)));
        let Construction::Relabel { a, b, .. } = &cert.construction else {
            panic!()
        };
        assert_eq!(a, b);
        assert!(cert.check_invariance().unwrap().passed());
    }

    #[test]
    fn certificate_json_reverifies() {
        let v = full_square_01();
        let f = Sequence::from_values(v.window(), &[0, 1]).unwrap();
        let ev = Evaluation::new().with(0, Subset::full(4));
        for cert in [
            split_atom_diag(&v, &f, &ev, &Term::var(0)).unwrap(),
            split_any_crs(&v, &f, &ev, &Term::var(0)).unwrap(),
        ] {
            let back = SplitCertificate::from_json(&cert.to_json()).unwrap();
            assert_eq!(back, cert);
            back.verify().unwrap();
            assert!(back.check_invariance().unwrap().passed());
        }
        assert!(SplitCertificate::from_json("{}").is_err());
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let v = full_square_01();
        let f = Sequence::from_values(v.window(), &[0, 1]).unwrap();
        let ev = Evaluation::new().with(0, Subset::full(4));
        let mut cert = split_atom_diag(&v, &f, &ev, &Term::var(0)).unwrap();
        cert.positive.eval = cert.negative.eval.clone();
        assert!(matches!(
            cert.verify(),
            Err(ConstructionError::InvalidCertificate(_))
        ));
    }

    #[test]
    fn witness_algebra_small_dimensions() {
        let (_, r) = witness_algebra(2).unwrap();
        assert!(r.y_is_extra_point);
        assert!(r.chi_is_one);
        assert!(r.tau_off_diagonals.is_empty());
        assert!(r.all_hold());
        let (_, r) = witness_algebra(3).unwrap();
        assert!(r.all_hold());
        assert!(r.tau_off_diagonals.is_empty());
    }

    #[test]
    fn e_system_examples() {
        let alg = MappedUnitAlgebra::new(2).unwrap();
        let (tau, eta) = witness_values(&alg).unwrap();
        assert!(check_e(&alg, &tau, &eta).holds());
        let inst = ESystemInstance {
            algebra: &alg,
            x: alg.zero(),
            y: eta.clone(),
        };
        let r = inst.check();
        assert!(!r.nonzero && !r.holds());

        let v = full_square_01();
        let full = FullSetAlgebra::new(&v);
        let pos = |vals: &[u32]| {
            v.position(&Sequence::from_values(v.window(), vals).unwrap())
                .unwrap()
        };
        let x = Subset::from_positions(4, [pos(&[0, 1])]).unwrap();
        let y = Subset::from_positions(4, [pos(&[1, 0])]).unwrap();
        let r = check_e(&full, &x, &y);
        assert!(!r.cylinders_agree[0]);
        assert!(!r.holds());
        for x in all_subsets(4) {
            assert!(!e_holds(&full, &Subset::empty(4), &x));
        }
    }

    #[test]
    fn partitions_are_bell_numbers() {
        let counts: Vec<usize> = (0..=5).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52]);
        assert_eq!(
            set_partitions(2),
            vec![
                vec![vec![BaseElem(0), BaseElem(1)]],
                vec![vec![BaseElem(0)], vec![BaseElem(1)]]
            ]
        );
    }

    #[test]
    fn refute_small_bases() {
        let r = refute_e_in_gs2(1, 1);
        assert_eq!(r.units.len(), 1);
        assert_eq!(r.pairs_checked, 4);
        assert!(r.refuted());
        let r = refute_e_in_gs2(2, 1);
        assert_eq!(r.units.len(), 3);
        assert!(r.refuted(), "{:?}", r.first_satisfying);
    }
}
