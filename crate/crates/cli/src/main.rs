use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qfwitt::brauer::{self, SymbolSum};
use qfwitt::fields::place::Place;
use qfwitt::lgp::{self, FactStore, LExtras, LgpStatus, PlaceSetKind};
use qfwitt::minv::{self, MVal, Method};
use qfwitt::parse::{parse_elem, parse_field, parse_form, parse_symbols};
use qfwitt::{neighbors, witt, Count, Error, Field, QForm};

mod selftest;

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "qfwitt", version, about = "Witt indices, invariants, LGP verdicts and m-invariants of quadratic forms")]
struct Cli {
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    /// Tables as CSV; other reports fall back to text.
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Witt index of a form.
    Witt {
        field: String,
        form: String,
        /// Omit the certificate tree.
        #[arg(long)]
        no_certificate: bool,
    },
    /// Field invariants, and the local profile of a form over F_q(x).
    Profile { field: String, form: Option<String> },
    /// Determinant, Hasse and Witt invariants and the Witt decomposition.
    Invariants { field: String, form: String },
    /// Brauer class questions for a sum of quaternion symbols.
    Brauer {
        field: String,
        class: String,
        /// Also decide whether the class splits over k(sqrt(d)).
        #[arg(long)]
        split_by: Option<String>,
    },
    /// I^n-neighbor detection.
    Neighbor {
        field: String,
        form: String,
        #[arg(long, default_value_t = 3)]
        n: u32,
    },
    /// Refined local-global principle.
    Lgp {
        #[command(subcommand)]
        cmd: LgpCmd,
    },
    /// Table of refined m-invariants.
    MTable {
        field: String,
        #[arg(long, default_value_t = 10)]
        imax: u32,
        #[arg(long, default_value_t = 1)]
        jmax: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Close a fact store under the derivation rules.
    Derive {
        #[arg(long)]
        facts: PathBuf,
        /// Shift fact ID by J first, written ID:J.
        #[arg(long, allow_hyphen_values = true)]
        shift: Vec<String>,
    },
    /// Run the built-in consistency checks.
    Selftest {
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

#[derive(Subcommand)]
enum LgpCmd {
    /// Verdict for one form.
    Check {
        field: String,
        form: String,
        #[arg(long)]
        r: u32,
        #[arg(long)]
        s: u32,
    },
    /// Build the two-variable counterexample over a finite base.
    Counterexample {
        #[arg(long, default_value = "F(3)")]
        base: String,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long)]
        verify: bool,
        /// Number of variables; emits the symbolic certificate over
        /// base(x1, ..., xr). Implied for infinite bases.
        #[arg(long)]
        vars: Option<u32>,
    },
    /// Close a fact store under the derivation rules.
    Derive {
        #[arg(long)]
        facts: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        shift: Vec<String>,
    },
    /// Bounds on l(k, V).
    LBounds {
        /// u-invariant; omit for infinite.
        #[arg(long)]
        u: Option<u64>,
        #[arg(long)]
        semiglobal: bool,
        #[arg(long)]
        isometry_lgp: bool,
        #[arg(long)]
        known_ce: Option<u32>,
        #[arg(long)]
        tree: Option<bool>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Enumerate,
    Recursion,
    Closed,
}

/// What a handler produced.
pub(crate) struct Report {
    pub result: Value,
    pub text: String,
    pub undecided: bool,
    pub violation: bool,
}

impl Report {
    fn new(result: Value, text: String) -> Report {
        Report {
            result,
            text,
            undecided: false,
            violation: false,
        }
    }
}

type Res<T> = std::result::Result<T, Error>;

fn form_in(field: &str, form: &str) -> Res<(Field, QForm)> {
    let k = parse_field(field)?;
    let q = parse_form(form, &k)?;
    Ok((k, q))
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn witt_cmd(field: &str, form: &str, no_cert: bool) -> Res<Report> {
    let (_, q) = form_in(field, form)?;
    let mut a = witt::witt_index(&q);
    if no_cert {
        a.certificate = None;
    }
    let text = if a.exact {
        format!("i_W({q}) = {}", a.lo)
    } else {
        format!("{} <= i_W({q}) <= {}", a.lo, a.hi)
    };
    let mut r = Report::new(json!({ "form": q, "answer": to_json(&a) }), text);
    r.undecided = !a.exact;
    Ok(r)
}

fn profile_cmd(field: &str, form: Option<&str>) -> Res<Report> {
    let k = parse_field(field)?;
    let p = k.profile();
    let mut result = json!({ "field": k.to_string(), "profile": to_json(&p) });
    let mut text = format!(
        "{k}: u = {}, m = {}, square classes = {}",
        p.u, p.m, p.square_classes
    );
    if let Some(f) = form {
        let q = parse_form(f, &k)?;
        let lp = witt::local_profile(&q)?;
        for (l, a) in &lp.places {
            text.push_str(&format!("\n  {l}: [{}, {}]", a.lo, a.hi));
        }
        text.push_str(&format!("\n  other places: [{}, {}]", lp.good_places.lo, lp.good_places.hi));
        result["local_profile"] = to_json(&lp);
    }
    Ok(Report::new(result, text))
}

fn invariants_cmd(field: &str, form: &str) -> Res<Report> {
    let (_, q) = form_in(field, form)?;
    let det = q.determinant()?;
    let sdet = q.signed_determinant()?;
    let hasse = q.hasse_invariant()?;
    let wi = q.witt_invariant()?;
    let (decomp, undecided) = match witt::witt_decompose(&q) {
        Ok((copies, kernel)) => (json!({ "copies": copies, "kernel": to_json(&kernel) }), false),
        Err(Error::Undecided(why)) => (json!({ "undecided": why }), true),
        Err(e) => return Err(e),
    };
    let text = format!(
        "dim {}, det {det}, signed det {sdet}, Hasse {hasse}, Witt invariant {wi}",
        q.dim()
    );
    let mut r = Report::new(
        json!({
            "form": q,
            "dim": q.dim(),
            "det": det.to_string(),
            "signed_det": sdet.to_string(),
            "hasse": hasse.to_string(),
            "hasse_trivial": brauer::is_trivial(&hasse).ok(),
            "witt_invariant": wi.to_string(),
            "witt_invariant_trivial": brauer::is_trivial(&wi).ok(),
            "decomposition": decomp,
        }),
        text,
    );
    r.undecided = undecided;
    Ok(r)
}

fn brauer_cmd(field: &str, class: &str, split_by: Option<&str>) -> Res<Report> {
    let k = parse_field(field)?;
    let s: SymbolSum = parse_symbols(class, &k)?;
    let (trivial, branch) = brauer::is_trivial_branch(&s)?;
    let mut result = json!({
        "class": s.to_string(),
        "trivial": trivial,
        "branch": to_json(&branch),
    });
    let mut text = format!("{s} is {}trivial ({branch:?})", if trivial { "" } else { "not " });
    if matches!(k.kind(), qfwitt::FieldKind::RationalFunction { .. }) {
        let bad: Vec<String> = brauer::nontrivial_places(&s)?.iter().map(Place::to_string).collect();
        result["nontrivial_places"] = json!(bad);
    }
    let qv = brauer::is_quaternion_class(&s)?;
    result["quaternion"] = json!({
        "value": qv.value,
        "witness": qv.witness.as_ref().map(|(a, b)| [a.to_string(), b.to_string()]),
        "branch": to_json(&qv.branch),
    });
    text.push_str(&format!("\nquaternion class: {}", qv.value));
    if let Some(d) = split_by {
        let d = parse_elem(d, &k)?;
        let v = brauer::split_by_sqrt(&s, &d)?;
        result["split_by_sqrt"] = json!({
            "d": d.to_string(),
            "value": v.value,
            "witness": v.witness.as_ref().map(|e| e.to_string()),
            "branch": to_json(&v.branch),
        });
        text.push_str(&format!("\nsplits over k(sqrt({d})): {}", v.value));
    }
    Ok(Report::new(result, text))
}

fn neighbor_cmd(field: &str, form: &str, n: u32) -> Res<Report> {
    let (_, q) = form_in(field, form)?;
    let v = neighbors::detect_neighbor(&q, n)?;
    let text = match (v.is_neighbor, &v.complement) {
        (Some(true), Some(c)) => format!("{q} is an I^{n}-neighbor with complement {c}"),
        (Some(true), None) => format!("{q} is an I^{n}-neighbor"),
        (Some(false), _) => format!("{q} is not an I^{n}-neighbor"),
        (None, _) => format!("undecided: {}", v.note),
    };
    let mut r = Report::new(to_json(&v), text);
    r.undecided = v.is_neighbor.is_none();
    Ok(r)
}

fn lgp_check_cmd(field: &str, form: &str, r: u32, s: u32) -> Res<Report> {
    let (_, q) = form_in(field, form)?;
    let v = lgp::lgp_check(&q, r, s)?;
    let text = format!("LGP({r},{s}) for {q}: {:?}", v.status);
    let mut rep = Report::new(to_json(&v), text);
    rep.undecided = v.status == LgpStatus::Undecided;
    Ok(rep)
}

fn counterexample_cmd(base: &str, n: u32, verify: bool, vars: Option<u32>) -> Res<Report> {
    let ell = parse_field(base)?;
    if vars.is_some() || !ell.is_finite() {
        let c = lgp::ce_theorem_certificate(&ell, vars.unwrap_or(2), n as u64)?;
        let mut text = format!(
            "{}-dimensional subform of {} over {}(x1..x{}) violates LGP({},{})",
            c.dim, c.form, c.base, c.r, c.claimed.0, c.claimed.1
        );
        text.push_str(&format!("\nq = {}", c.base_form));
        for a in &c.assumptions {
            text.push_str(&format!("\nassumption: {a}"));
        }
        return Ok(Report::new(to_json(&c), text));
    }
    let ce = lgp::build_ce_form(&ell, n)?;
    let (r, s) = ce.claimed;
    let mut result = json!({
        "form": ce.form,
        "binary": ce.binary,
        "n": n,
        "claimed": { "r": r, "s": s },
    });
    let mut text = format!("{} claimed to violate LGP({r},{s})", ce.form);
    let mut rep_violation = false;
    let mut undecided = false;
    if verify {
        let an = lgp::verify_ce_anisotropy(&ce.form)?;
        let sample = lgp::default_sample(ce.form.field())?;
        let local = lgp::verify_ce_local(&ce.form, &sample)?;
        let verdict = lgp::lgp_check(&ce.form, r, s)?;
        text.push_str(&format!(
            "\nanisotropic: {}\nsampled places: {}, min local lo = {}\nverdict: {:?}",
            an.anisotropic,
            local.places.len(),
            local.min_lo,
            verdict.status
        ));
        for a in &verdict.assumptions {
            text.push_str(&format!("\nassumption: {a}"));
        }
        rep_violation = !an.anisotropic || local.min_lo < r || verdict.status == LgpStatus::Satisfied;
        undecided = verdict.status == LgpStatus::Undecided;
        result["anisotropy"] = to_json(&an);
        result["local"] = to_json(&local);
        result["verdict"] = to_json(&verdict);
    }
    let mut rep = Report::new(result, text);
    rep.violation = rep_violation;
    rep.undecided = undecided;
    Ok(rep)
}

fn derive_cmd(facts: &PathBuf, shifts: &[String]) -> Res<Report> {
    let src = std::fs::read_to_string(facts).map_err(|e| Error::Parse(format!("{}: {e}", facts.display())))?;
    let mut store: FactStore = serde_json::from_str(&src).map_err(|e| Error::Parse(format!("fact store: {e}")))?;
    for sh in shifts {
        let (id, j) = sh
            .split_once(':')
            .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<i64>().ok()?)))
            .ok_or_else(|| Error::Parse(format!("shift {sh:?} is not ID:J")))?;
        lgp::shift_lgp(&mut store, id, j)?;
    }
    let added = lgp::going_down_rule(&mut store)?;
    let text = format!("{} facts, {} derived", store.facts.len(), added.len());
    Ok(Report::new(json!({ "store": to_json(&store), "derived": added }), text))
}

fn l_bounds_cmd(u: Option<u64>, semiglobal: bool, iso: bool, ce: Option<u32>, tree: Option<bool>) -> Res<Report> {
    let u = u.map_or(Count::Infinite, Count::Finite);
    let kind = if semiglobal { PlaceSetKind::Semiglobal } else { PlaceSetKind::Discrete };
    let b = lgp::l_invariant_bounds(
        u,
        kind,
        &LExtras {
            isometry_lgp_holds: iso,
            known_ce_at_r: ce,
            semiglobal_tree: tree,
        },
    )?;
    let text = format!("{} <= l <= {}", b.lo, mval(b.hi));
    let mut r = Report::new(to_json(&b), text);
    r.undecided = b.hi != MVal::Fin(b.lo);
    Ok(r)
}

fn mval(v: MVal) -> String {
    match v {
        MVal::Fin(n) => n.to_string(),
        MVal::Inf => "inf".into(),
    }
}

fn m_table_cmd(field: &str, imax: u32, jmax: u32, method: MethodArg, format: Format) -> Res<Report> {
    let k = parse_field(field)?;
    let method = match method {
        MethodArg::Auto => Method::Auto,
        MethodArg::Enumerate => Method::Enumerate,
        MethodArg::Recursion => Method::Recursion,
        MethodArg::Closed => Method::Closed,
    };
    let t = minv::m_table(&k, imax, jmax, method)?;
    let audit = minv::monotonicity_audit(&t);
    let text = if format == Format::Csv {
        let mut s = String::from("i,j,lo,hi,provenance");
        for (&(i, j), e) in &t.entries {
            let prov = serde_json::to_value(e.provenance).expect("serializable");
            s.push_str(&format!("\n{i},{j},{},{},{}", mval(e.lo), mval(e.hi), prov.as_str().unwrap_or("")));
        }
        s
    } else {
        (1..=jmax)
            .map(|j| {
                let row: Vec<String> = (1..=imax)
                    .map(|i| match t.get(i, j) {
                        Some(e) if e.lo == e.hi => mval(e.lo),
                        Some(e) => format!("[{},{}]", mval(e.lo), mval(e.hi)),
                        None => "?".into(),
                    })
                    .collect();
                format!("j={j}: {}", row.join(","))
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let mut r = Report::new(json!({ "table": to_json(&t), "audit": to_json(&audit) }), text);
    r.undecided = t.entries.values().any(|e| e.lo != e.hi);
    r.violation = !audit.is_clean();
    Ok(r)
}

fn run(cli: &Cli) -> Res<Report> {
    match &cli.cmd {
        Cmd::Witt { field, form, no_certificate } => witt_cmd(field, form, *no_certificate),
        Cmd::Profile { field, form } => profile_cmd(field, form.as_deref()),
        Cmd::Invariants { field, form } => invariants_cmd(field, form),
        Cmd::Brauer { field, class, split_by } => brauer_cmd(field, class, split_by.as_deref()),
        Cmd::Neighbor { field, form, n } => neighbor_cmd(field, form, *n),
        Cmd::Lgp { cmd } => match cmd {
            LgpCmd::Check { field, form, r, s } => lgp_check_cmd(field, form, *r, *s),
            LgpCmd::Counterexample { base, n, verify, vars } => counterexample_cmd(base, *n, *verify, *vars),
            LgpCmd::Derive { facts, shift } => derive_cmd(facts, shift),
            LgpCmd::LBounds {
                u,
                semiglobal,
                isometry_lgp,
                known_ce,
                tree,
            } => l_bounds_cmd(*u, *semiglobal, *isometry_lgp, *known_ce, *tree),
        },
        Cmd::MTable { field, imax, jmax, method } => m_table_cmd(field, *imax, *jmax, *method, cli.format),
        Cmd::Derive { facts, shift } => derive_cmd(facts, shift),
        Cmd::Selftest { cases } => Ok(selftest::run(cli.seed, *cases)),
    }
}

fn exit_for_error(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::EvenCharacteristic | Error::CompositeP(_) => 4,
        Error::InconsistentFacts(_) => 3,
        Error::Undecided(_) => 2,
        _ => 1,
    }
}

fn emit(cli: &Cli, body: String) -> bool {
    match &cli.output {
        Some(p) => {
            if let Err(e) = std::fs::write(p, body + "\n") {
                eprintln!("cannot write {}: {e}", p.display());
                return false;
            }
        }
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            // a closed pipe downstream is not an error of ours
            if let Err(e) = writeln!(out, "{body}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("cannot write to stdout: {e}");
                    return false;
                }
            }
        }
    }
    true
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let header = json!({
        "schema": SCHEMA,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cli.seed,
    });
    let (mut doc, text, code) = match run(&cli) {
        Ok(r) => {
            let code = if r.violation {
                3
            } else if r.undecided {
                2
            } else {
                0
            };
            (json!({ "result": r.result }), r.text, code)
        }
        Err(e) => (
            json!({ "error": { "code": e.code(), "message": e.to_string() } }),
            format!("error [{}]: {e}", e.code()),
            exit_for_error(&e),
        ),
    };
    for (k, v) in header.as_object().unwrap() {
        doc[k] = v.clone();
    }
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("serializable"),
        Format::Text | Format::Csv => text,
    };
    if !emit(&cli, body) {
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
