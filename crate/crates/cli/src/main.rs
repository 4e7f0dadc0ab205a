use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cylset::constructions::{
    check_e, mapped_ca_spot_check, refute_e_in_gs2, separation_suite, split_any_crs,
    split_atom_diag_with_pivot, witness_algebra, witness_values, zero_dim_check, SplitCertificate,
};
use cylset::corpus::{crs_split_corpus, diag_split_corpus};
use cylset::semantics::{all_subsets, parse_var_name, random_subsets};
use cylset::{
    check_ca_axioms, check_eq_laws, eval, parse_term, satisfies, Bounds, CheckReport,
    ChoiceFunction, ClassTag, Evaluation, FullSetAlgebra, Index, Pivot, SearchOptions, Sequence,
    Subset, Term, Unit,
};

#[derive(Parser)]
#[command(
    name = "cylset",
    version,
    about = "Evaluate and check cylindric set terms over finite units"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (0 = all cores); output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TermArgs {
    #[arg(long)]
    term: String,
    /// Number of variables the term may use.
    #[arg(long, default_value_t = 16)]
    vars: usize,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    unit: PathBuf,
    /// `xk=[p,...]`: positions of the members assigned to `xk`.
    #[arg(long)]
    assign: Vec<String>,
    /// Evaluation file `{"x0": [...], ...}`; `--assign` entries override it.
    #[arg(long = "eval")]
    eval_file: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a term and print its canonical form and index set.
    Parse(TermArgs),
    /// Evaluate a term in a unit.
    Eval {
        #[command(flatten)]
        term: TermArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Print the classes a unit belongs to.
    Classify {
        #[arg(long)]
        unit: PathBuf,
    },
    /// Check CA0-CA7 in a unit's set algebra, or with `--window N` in the
    /// N-dimensional witness algebra.
    CheckAxioms {
        #[arg(long, conflicts_with = "window", required_unless_present = "window")]
        unit: Option<PathBuf>,
        #[arg(long)]
        window: Option<u32>,
        /// Random elements used when there are too many subsets to enumerate.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Check the equation laws in a unit's set algebra.
    CheckEqs {
        #[arg(long)]
        unit: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Split a term into two nonzero parts and print the certificate.
    Split {
        #[command(flatten)]
        term: TermArgs,
        #[command(flatten)]
        model: ModelArgs,
        /// `d`: split `term · c0 -d01` (diagonal construction);
        /// `crs`: split `term` itself (relabelling construction).
        #[arg(long, value_enum, default_value_t = SplitClass::D)]
        class: SplitClass,
        /// Point of the unit to split at, e.g. `0,1`; defaults to the first model.
        #[arg(long)]
        focus: Option<String>,
    },
    /// Build the witness algebra on `^n n ∪ {p'}` and run its checks.
    Witness {
        #[arg(long, default_value_t = 4)]
        window: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Check the system E over every two-dimensional disjoint union of squares.
    RefuteE {
        #[arg(long, default_value_t = 3)]
        max_base: u32,
    },
    /// Run the replication suites.
    Replicate {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 2)]
        max_base: u32,
        #[arg(long, default_value_t = 4)]
        max_seqs: usize,
        #[arg(long, default_value_t = 4)]
        window: u32,
        #[arg(long = "class", value_enum, default_value_t = CliClass::D)]
        class: CliClass,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitClass {
    D,
    Crs,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliClass {
    Crs,
    D,
    G,
    Gs,
}

impl From<CliClass> for ClassTag {
    fn from(c: CliClass) -> ClassTag {
        match c {
            CliClass::Crs => ClassTag::Crs,
            CliClass::D => ClassTag::D,
            CliClass::G => ClassTag::G,
            CliClass::Gs => ClassTag::Gs,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    /// Atom terms agree for different diagonals; needs spare window indices.
    ZeroDim,
    /// Singleton witnesses separate all atom terms.
    Separation,
    /// Diagonal splitting below `c0 -d01`.
    DiagSplit,
    /// Relabelling splits over arbitrary units.
    CrsSplit,
    /// The witness algebra at dimension 4.
    WitnessAlgebra,
    /// E fails in every small disjoint union of squares.
    ERefute,
}

/// A report and whether it counts as success (exit 0) or a refutation (exit 1).
struct Outcome {
    ok: bool,
    json: Value,
    text: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match run(cli) {
        Ok(o) => {
            if json {
                println!("{}", o.json);
            } else {
                println!("{}", o.text);
            }
            if o.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_unit(path: &Path) -> Result<Unit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Unit::from_json(&text).with_context(|| format!("parsing unit file {}", path.display()))
}

fn parse_positions(text: &str) -> Result<Vec<usize>> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .with_context(|| format!("expected [p,...], got {text:?}"))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<usize>()
                .with_context(|| format!("bad position {s:?}"))
        })
        .collect()
}

fn read_model(args: &ModelArgs) -> Result<(Unit, Evaluation)> {
    let unit = read_unit(&args.unit)?;
    let mut ev = match &args.eval_file {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Evaluation::from_json(&text, unit.len())?
        }
        None => Evaluation::new(),
    };
    for a in &args.assign {
        let (name, set) = a
            .split_once('=')
            .with_context(|| format!("expected xk=[..], got {a:?}"))?;
        let k = parse_var_name(name.trim())?;
        ev.insert(
            k,
            Subset::from_positions(unit.len(), parse_positions(set)?)?,
        );
    }
    Ok((unit, ev))
}

fn sequences_of(unit: &Unit, s: &Subset) -> Vec<Vec<u32>> {
    s.positions()
        .into_iter()
        .map(|p| unit.sequences()[p].raw_values())
        .collect()
}

fn show_set(unit: &Unit, s: &Subset) -> String {
    let items: Vec<String> = s
        .positions()
        .into_iter()
        .map(|p| unit.sequences()[p].to_string())
        .collect();
    format!("{{{}}}", items.join(", "))
}

fn report_outcome(r: &CheckReport, label: &str) -> Outcome {
    let text = if r.passed() {
        format!("{label}: all {} instances hold", r.checked)
    } else {
        format!(
            "{label}: {} of {} instances fail ({})\n{}",
            r.failed,
            r.checked,
            r.failed_laws().join(", "),
            r.to_json_lines().trim_end()
        )
    };
    Outcome {
        ok: r.passed(),
        json: serde_json::to_value(r).expect("report serializes"),
        text,
    }
}

fn elements(n: usize, samples: usize, seed: u64) -> Vec<Subset> {
    if n <= 16 {
        all_subsets(n)
    } else {
        random_subsets(n, samples, seed)
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let opts = SearchOptions {
        seed: cli.seed,
        workers: cli.workers,
    };
    match cli.command {
        Command::Parse(t) => {
            let term = parse_term(&t.term, t.vars)?;
            let indices: Vec<u32> = term.index_set().iter().map(|i| i.0).collect();
            Ok(Outcome {
                ok: true,
                json: json!({"term": term.to_string(), "index_set": indices, "vars": term.var_count()}),
                text: format!("{term}\nindex set: {indices:?}"),
            })
        }
        Command::Eval { term, model } => {
            let (unit, ev) = read_model(&model)?;
            let t = parse_term(&term.term, term.vars)?;
            let s = eval(&t, &unit, &ev)?;
            Ok(Outcome {
                ok: true,
                json: json!({"positions": s.positions(), "sequences": sequences_of(&unit, &s)}),
                text: show_set(&unit, &s),
            })
        }
        Command::Classify { unit } => {
            let unit = read_unit(&unit)?;
            let tags: Vec<String> = unit.classify().iter().map(|t| t.to_string()).collect();
            let json = json!(tags);
            Ok(Outcome {
                ok: true,
                text: json.to_string(),
                json,
            })
        }
        Command::CheckAxioms {
            unit,
            window,
            samples,
        } => {
            if let Some(n) = window {
                let alg = witness_algebra(n)?.0;
                return Ok(report_outcome(
                    &mapped_ca_spot_check(&alg, samples, cli.seed),
                    "CA0-CA7",
                ));
            }
            let unit = read_unit(&unit.expect("required by clap"))?;
            let alg = FullSetAlgebra::new(&unit);
            let indices: Vec<Index> = unit.window().indices().to_vec();
            let r = check_ca_axioms(&alg, &elements(unit.len(), samples, cli.seed), &indices)
                .in_unit(&unit);
            Ok(report_outcome(&r, "CA0-CA7"))
        }
        Command::CheckEqs { unit, samples } => {
            let unit = read_unit(&unit)?;
            let r = check_eq_laws(&unit, &elements(unit.len(), samples, cli.seed)).in_unit(&unit);
            Ok(report_outcome(&r, "equation laws"))
        }
        Command::Split {
            term,
            model,
            class,
            focus,
        } => {
            let (unit, ev) = read_model(&model)?;
            let tau = parse_term(&term.term, term.vars)?;
            split(&unit, &ev, &tau, class, focus.as_deref())
        }
        Command::Witness { window, samples } => {
            let (alg, r) = witness_algebra(window)?;
            let ca = mapped_ca_spot_check(&alg, samples, cli.seed);
            let (tau, eta) = witness_values(&alg)?;
            let e = check_e(&alg, &tau, &eta);
            let ok = r.all_hold() && ca.passed() && e.holds();
            Ok(Outcome {
                ok,
                json: json!({"report": r, "ca": ca, "e_system": e}),
                text: format!(
                    "witness algebra n={window}: |B| = {}\nsub-checks hold: {}\nCA0-CA7 on {samples} samples: {}\nE(tau, eta) holds: {}",
                    r.carrier_size,
                    r.all_hold(),
                    if ca.passed() { "pass" } else { "FAIL" },
                    e.holds()
                ),
            })
        }
        Command::RefuteE { max_base } => {
            let r = refute_e_in_gs2(max_base, cli.workers);
            Ok(Outcome {
                ok: r.refuted(),
                text: format!(
                    "{} units, {} pairs checked, {} satisfy E",
                    r.units.len(),
                    r.pairs_checked,
                    r.satisfying
                ),
                json: serde_json::to_value(&r)?,
            })
        }
        Command::Replicate {
            suite,
            max_base,
            max_seqs,
            window,
            class,
        } => {
            let bounds = Bounds {
                window_size: window,
                base_size: max_base,
                max_seqs,
                max_eval_subsets: 1 << max_seqs.min(16),
            };
            replicate(suite, bounds, class.into(), opts)
        }
    }
}

fn split(
    unit: &Unit,
    ev: &Evaluation,
    tau: &Term,
    class: SplitClass,
    focus: Option<&str>,
) -> Result<Outcome> {
    let full = match class {
        SplitClass::D => Term::and(tau.clone(), Term::cyl(0, Term::not(Term::diag(0, 1)))),
        SplitClass::Crs => tau.clone(),
    };
    let mut ev = ev.clone();
    if ev.get(0).is_none() {
        ev.insert(0, Subset::empty(unit.len()));
    }
    let f = match focus {
        Some(text) => {
            let values = text
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u32>()
                        .with_context(|| format!("bad focus value {s:?}"))
                })
                .collect::<Result<Vec<_>>>()?;
            let f = Sequence::from_values(unit.window(), &values)?;
            if !unit.contains(&f) {
                bail!("focus {f} is not a member of the unit");
            }
            f
        }
        None => unit
            .sequences()
            .iter()
            .find(|f| satisfies(unit, f, &ev, &full).unwrap_or(false))
            .cloned()
            .with_context(|| format!("no point of the unit satisfies {full}"))?,
    };
    let cert = match class {
        SplitClass::D => {
            let p0 = Term::and(tau.clone(), Term::cyl(0, Term::not(Term::diag(0, 1))));
            let pivot = if satisfies(unit, &f, &ev, &p0)? {
                Pivot::Zero
            } else {
                Pivot::One
            };
            split_atom_diag_with_pivot(unit, &f, &ev, tau, pivot)?
        }
        SplitClass::Crs => split_any_crs(unit, &f, &ev, tau)?,
    };
    let inv = cert.check_invariance()?;
    Ok(Outcome {
        ok: inv.passed(),
        text: format!(
            "{} meets both {} and its complement\ninvariance: {}/{} hold\n{}",
            cert.original,
            cert.splitter,
            inv.checked - inv.failed,
            inv.checked,
            cert.to_json()
        ),
        json: serde_json::to_value(cert.to_file())?,
    })
}

struct SuiteResult {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn replicate(suite: Suite, bounds: Bounds, tag: ClassTag, opts: SearchOptions) -> Result<Outcome> {
    let wanted = |s: Suite| suite == Suite::All || suite == s;
    let mut results = Vec::new();
    if wanted(Suite::ZeroDim) {
        let gamma: BTreeSet<Index> = [Index(0), Index(1)].into();
        let (i, j) = {
            let mut it = (0..bounds.window_size)
                .map(Index)
                .filter(|k| !gamma.contains(k));
            match (it.next(), it.next()) {
                (Some(i), Some(j)) => (i, j),
                _ => bail!("zero-dim suite needs a window of at least 4 indices"),
            }
        };
        let mut found = None;
        let mut units = 0;
        'outer: for m in 1..=2 {
            for q in ChoiceFunction::all(m) {
                let r = zero_dim_check(m, &q, i, j, tag, bounds, opts)?;
                units += r.units_checked;
                if r.counterexample.is_some() {
                    found = Some(serde_json::to_string(&r.counterexample)?);
                    break 'outer;
                }
            }
        }
        results.push(SuiteResult {
            name: "zero-dim",
            ok: found.is_none(),
            detail: match found {
                None => format!("no counterexample over {units} {tag} units (i,j)=({i},{j})"),
                Some(c) => format!("counterexample: {c}"),
            },
        });
    }
    if wanted(Suite::Separation) {
        let mut ok = true;
        let mut detail = Vec::new();
        for m in 1..=3 {
            let r = separation_suite(m)?;
            ok &= r.report.passed();
            detail.push(format!(
                "m={m}: {} atoms, {} separations",
                r.atoms, r.separations
            ));
        }
        results.push(SuiteResult {
            name: "separation",
            ok,
            detail: detail.join("; "),
        });
    }
    if wanted(Suite::DiagSplit) {
        let corpus = diag_split_corpus(60, opts.seed ^ 41);
        let ok = corpus.iter().all(|c| {
            split_atom_diag_with_pivot(&c.unit, &c.focus, &c.eval, &c.term, Pivot::Zero)
                .map(|cert| reverified(&cert))
                .unwrap_or(false)
        });
        results.push(SuiteResult {
            name: "diag-split",
            ok,
            detail: format!("{} instances", corpus.len()),
        });
    }
    if wanted(Suite::CrsSplit) {
        let corpus = crs_split_corpus(60, opts.seed ^ 23);
        let ok = corpus.iter().all(|c| {
            split_any_crs(&c.unit, &c.focus, &c.eval, &c.term)
                .map(|cert| reverified(&cert))
                .unwrap_or(false)
        });
        results.push(SuiteResult {
            name: "crs-split",
            ok,
            detail: format!("{} instances", corpus.len()),
        });
    }
    if wanted(Suite::WitnessAlgebra) {
        let (alg, r) = witness_algebra(4)?;
        let ca = mapped_ca_spot_check(&alg, 1000, opts.seed);
        let (tau, eta) = witness_values(&alg)?;
        let e = check_e(&alg, &tau, &eta).holds();
        results.push(SuiteResult {
            name: "witness-algebra",
            ok: r.all_hold() && ca.passed() && e,
            detail: format!(
                "|B| = {}, CA instances {}, E(tau, eta) = {e}",
                r.carrier_size, ca.checked
            ),
        });
    }
    if wanted(Suite::ERefute) {
        let r = refute_e_in_gs2(bounds.base_size, opts.workers);
        results.push(SuiteResult {
            name: "e-refute",
            ok: r.refuted(),
            detail: format!(
                "{} units, {} pairs, {} satisfying",
                r.units.len(),
                r.pairs_checked,
                r.satisfying
            ),
        });
    }
    let ok = results.iter().all(|r| r.ok);
    let text = results
        .iter()
        .map(|r| {
            format!(
                "{} {}: {}",
                if r.ok { "PASS" } else { "FAIL" },
                r.name,
                r.detail
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let json = json!(results
        .iter()
        .map(|r| json!({"suite": r.name, "ok": r.ok, "detail": r.detail}))
        .collect::<Vec<_>>());
    Ok(Outcome { ok, json, text })
}

fn reverified(cert: &SplitCertificate) -> bool {
    SplitCertificate::from_json(&cert.to_json()).is_ok_and(|c| c.verify().is_ok())
        && cert.check_invariance().is_ok_and(|r| r.passed())
}
