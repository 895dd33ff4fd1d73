//! Seeded consistency checks run by `qfwitt selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use qfwitt::lgp::{self, FactStore, LgpStatus, Statement};
use qfwitt::minv::{self, Method};
use qfwitt::witt::{self, u_certificate};
use qfwitt::{Elem, Field, FieldKind, QForm};

use crate::Report;

fn random_elem(k: &Field, rng: &mut ChaCha8Rng) -> Elem {
    match k.kind() {
        FieldKind::Finite(d) => k.int(rng.gen_range(1..d.p as i64)),
        FieldKind::PAdic { p, .. } => {
            let u = loop {
                let u = rng.gen_range(1..40i64);
                if u % *p as i64 != 0 {
                    break u;
                }
            };
            let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
            &k.int(sign * u) * &k.int(*p as i64).pow(rng.gen_range(-1..3)).unwrap()
        }
        FieldKind::Laurent { base, .. } => {
            let c = k.embed(&random_elem(base, rng)).unwrap();
            let t = k.uniformizer().unwrap();
            let mut e = &c * &t.pow(rng.gen_range(-1..3)).unwrap();
            if rng.gen_bool(0.3) {
                e = &e * &(&k.one() + &t);
            }
            e
        }
        _ => k.one(),
    }
}

fn random_form(k: &Field, dim: usize, rng: &mut ChaCha8Rng) -> QForm {
    QForm::new(k, (0..dim).map(|_| random_elem(k, rng)).collect()).unwrap()
}

struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

pub(crate) fn run(seed: u64, cases: usize) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally {
        checks: 0,
        failures: Vec::new(),
    };
    let f3 = Field::finite(3).unwrap();
    let fields = [
        f3.clone(),
        Field::finite(5).unwrap(),
        Field::padic(3).unwrap(),
        Field::laurent(&f3, "t").unwrap(),
    ];

    for _ in 0..cases {
        let k = &fields[rng.gen_range(0..fields.len())];
        let q = random_form(k, rng.gen_range(1..6), &mut rng);
        let phi = random_form(k, rng.gen_range(1..4), &mut rng);
        let sum = q.orth_sum(&phi).unwrap();
        match (witt::witt_value(&q), witt::witt_value(&phi), witt::witt_value(&sum)) {
            (Ok(a), Ok(b), Ok(c)) => {
                t.check(c <= a + phi.dim() as u32, || format!("i_W({sum}) > i_W({q}) + dim {phi}"));
                t.check(c >= a + b, || format!("i_W({sum}) < i_W({q}) + i_W({phi})"));
            }
            _ => t.check(false, || format!("inexact Witt index over {k}")),
        }
        let u = k.profile().u.finite().unwrap();
        let j = u_certificate(sum.dim(), u);
        t.check(witt::witt_bounds(&sum).0 >= j, || format!("{sum}: dim >= u + 2*{j} - 1 but i_W < {j}"));
    }

    for k in &fields {
        let closed = minv::m_table(k, 5, 2, Method::Closed).unwrap();
        let enumerated = minv::m_table(k, 5, 2, Method::Enumerate).unwrap();
        for (key, e) in &closed.entries {
            let other = &enumerated.entries[key];
            t.check(e.lo == other.lo && e.hi == other.hi, || format!("m{key:?} over {k}: closed and enumerated differ"));
        }
        for tab in [&closed, &enumerated] {
            let audit = minv::monotonicity_audit(tab);
            t.check(audit.is_clean(), || format!("audit of {} over {k}: {:?}", tab.label, audit.violations));
        }
    }

    for n in [0, 1] {
        let ce = lgp::build_ce_form(&f3, n).unwrap();
        let an = lgp::verify_ce_anisotropy(&ce.form).unwrap();
        t.check(an.anisotropic, || format!("counterexample n = {n} not shown anisotropic"));
        let (r, s) = ce.claimed;
        let v = lgp::lgp_check(&ce.form, r, s).unwrap();
        t.check(v.status == LgpStatus::Violated, || format!("counterexample n = {n}: {:?}", v.status));
    }

    let mut store = FactStore::new("k", "V");
    let base = store.add_given(Statement::Lgp { dim: None, r: 1, s: 1 });
    for _ in 0..cases.min(50) {
        let j = rng.gen_range(0..6);
        let up = lgp::shift_lgp(&mut store, base, j).unwrap();
        let down = lgp::shift_lgp(&mut store, up, -j).unwrap();
        t.check(down == base, || format!("shift by {j} and back did not return to the start"));
    }

    let mut r = Report::new(
        json!({ "checks": t.checks, "failures": t.failures }),
        format!("{} checks, {} failures", t.checks, t.failures.len()),
    );
    r.violation = !t.failures.is_empty();
    r
}
