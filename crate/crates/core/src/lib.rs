//! Cylindric-like algebras of sets of sequences at desk scale: term
//! evaluation over finite units, class membership, law checking, and the
//! witness and splitting constructions that locate the atoms of the
//! finitely generated free algebras.

pub mod constructions;
pub mod corpus;
pub mod exec;
pub mod semantics;
pub mod term;
pub mod units;

pub use constructions::{
    check_e, refute_e_in_gs2, separation_suite, singleton_witness, split_any_crs, split_atom_diag,
    witness_algebra, zero_dim_check, ConstructionError, SplitCertificate, Witness,
};
pub use semantics::{
    bounded_validity, check_ca_axioms, check_eq_laws, cylindrify, diagonal, eval, eval_in,
    mapped_eval, satisfies, Bounds, CheckReport, Evaluation, FullSetAlgebra, MappedUnitAlgebra,
    SearchOptions, SemanticsError, SetAlgebra, Subset, ValidityReport,
};
pub use term::{parse_term, render_term, ChoiceFunction, Index, Pivot, Sign, Term, TermError};
pub use units::{enumerate_units, BaseElem, ClassTag, Sequence, Unit, UnitError, Window};
