//! The subcommands: each turns a validated configuration into a report.

use kn_core::algebras::{cached_product, grading_analysis, BasisOp};
use kn_core::basis::GradedExpansion;
use kn_core::cocycles::{check_L_invariant, check_multiplicative, gamma_f_basis, gamma_lambda, gamma_v_basis, CheckReport, Cycle};
use kn_core::current::{
    check_L_invariance_current, check_cocycle_conditions, check_jacobi, check_perfectness, ConditionsReport, CurrentCocycleSpec,
    UserMatrix,
};
use kn_core::exact::{format_scalar, int, RationalFunction};
use kn_core::lab::{cocycle_matrix, coboundary_feasible, family_rank, locality_bounds};
use kn_core::window::WindowAlgebra;
use kn_core::KnError;

use crate::config::{default_cocycles, Fault, RunConfig, TargetKind, Task};
use crate::report::{Record, Report, Table};

fn report(cfg: &RunConfig, command: &str, window: i64, records: Vec<Record>) -> Report {
    Report::new(command, cfg.describe_surface(), cfg.lie.name().to_string(), window, records)
}

fn error_record(task: &str, e: KnError) -> Record {
    Record::new(task, false, format!("error: {e}"))
}

fn check_record(task: String, r: &CheckReport) -> Record {
    let detail = match &r.violation {
        None if r.checked == 0 => format!("nothing checked ({} skipped)", r.skipped),
        None => format!("{} checked, {} skipped", r.checked, r.skipped),
        Some(v) => format!("{} checked; first violation: {v}", r.checked),
    };
    Record::new(task, r.passed(), detail)
}

fn conditions_record(task: String, r: Result<ConditionsReport, KnError>) -> Record {
    match r {
        Ok(r) => {
            let detail = match r.first_violation() {
                None => format!("{} checked, {} skipped", r.checked(), r.skipped()),
                Some(v) => format!("{} checked; first violation: {v}", r.checked()),
            };
            let mut t = Table::new(&["condition", "checked", "skipped", "passed"]);
            for c in std::iter::once(&r.antisymmetry).chain(&r.conditions) {
                t.push(vec![c.name.clone(), c.checked.to_string(), c.skipped.to_string(), c.passed().to_string()]);
            }
            Record::new(task, r.passed(), detail).with_table(t)
        }
        Err(e) => error_record(&task, e),
    }
}

fn expansion_text(e: &GradedExpansion) -> String {
    if e.is_zero() {
        return "0".into();
    }
    e.entries.iter().map(|((n, p), c)| format!("{}*f({n},{p})", format_scalar(c))).collect::<Vec<_>>().join(" + ")
}

pub fn cmd_basis(cfg: &RunConfig) -> Report {
    let s = &cfg.surface;
    let points: Vec<String> = s.points().iter().map(|p| p.to_string()).collect();
    let mut records = Vec::new();
    for &lambda in &cfg.lambdas {
        let mut t = Table::new(&["lambda", "n", "p", "section", &format!("orders at {}", points.join(";"))]);
        let mut err = None;
        for n in -cfg.window..=cfg.window {
            for p in 1..=s.k() {
                match s.basis_element(lambda, n, p) {
                    Ok(b) => {
                        let orders: Vec<String> = s
                            .points()
                            .iter()
                            .map(|pt| b.section.order_at(pt).map_or_else(|_| "-".into(), |o| o.to_string()))
                            .collect();
                        t.push(vec![lambda.to_string(), n.to_string(), p.to_string(), b.section.f.to_text(), orders.join(";")]);
                    }
                    Err(e) => err = Some(e),
                }
            }
        }
        records.push(match err {
            None => Record::new(format!("basis lambda={lambda}"), true, format!("{} elements", t.rows.len())).with_table(t),
            Some(e) => error_record(&format!("basis lambda={lambda}"), e),
        });
    }
    report(cfg, "basis", cfg.window, records)
}

fn operations(cfg: &RunConfig) -> Vec<BasisOp> {
    let mut ops = vec![BasisOp::Mul, BasisOp::Bracket];
    ops.extend(cfg.lambdas.iter().map(|&l| BasisOp::Action(l)));
    ops
}

fn grading_record(cfg: &RunConfig, op: BasisOp) -> Record {
    let s = &cfg.surface;
    let r = grading_analysis(s, op, cfg.window);
    let classical_ok = !s.is_classical() || r.upper_shift == 0;
    let mut detail = format!(
        "{} pairs: lower shift {}, upper shift {} (window {}: {})",
        r.pairs_checked,
        r.lower_shift,
        r.upper_shift,
        cfg.window - 1,
        r.upper_shift_previous
    );
    if let Some(v) = &r.leading_violation {
        detail.push_str(&format!("; leading coefficient violation: {v}"));
    }
    if !classical_ok {
        detail.push_str("; the classical surface must be graded");
    }
    Record::new(format!("grading {}", op.name()), r.passed() && classical_ok, detail)
}

pub fn cmd_structure(cfg: &RunConfig) -> Report {
    let s = &cfg.surface;
    let w = cfg.window;
    let mut records = Vec::new();
    for op in operations(cfg) {
        let mut rec = grading_record(cfg, op);
        let mut t = Table::new(&["n", "p", "m", "r", "result"]);
        for n in -w..=w {
            for p in 1..=s.k() {
                for m in -w..=w {
                    for r in 1..=s.k() {
                        let e = cached_product(s, op, (n, p), (m, r));
                        t.push(vec![n.to_string(), p.to_string(), m.to_string(), r.to_string(), expansion_text(&e)]);
                    }
                }
            }
        }
        rec.table = Some(t);
        records.push(rec);
    }
    report(cfg, "structure", w, records)
}

fn matrix_table(m: &kn_core::lab::WindowMatrix) -> Table {
    let mut t = Table::new(&["a", "b", "level", "value"]);
    for i in 0..m.basis.len() {
        for j in i + 1..m.basis.len() {
            let v = m.get(i, j);
            if !num_traits::Zero::is_zero(v) {
                t.push(vec![m.labels[i].clone(), m.labels[j].clone(), m.level(i, j).to_string(), format_scalar(v)]);
            }
        }
    }
    t
}

pub fn cmd_cocycle(cfg: &RunConfig) -> Report {
    let alg = cfg.algebra();
    let records = cfg
        .cocycles
        .iter()
        .map(|c| {
            let task = format!("cocycle {}", c.name);
            match cocycle_matrix(&alg, &c.spec, cfg.window) {
                Ok(m) => {
                    let bounds = locality_bounds(&m).map_or("zero on the window".into(), |(lo, hi)| format!("levels {lo}..{hi}"));
                    let t = matrix_table(&m);
                    Record::new(task, m.is_antisymmetric(), format!("{} nonzero entries above the diagonal, {bounds}", t.rows.len()))
                        .with_table(t)
                }
                Err(e) => error_record(&task, e),
            }
        })
        .collect();
    report(cfg, "cocycle", cfg.window, records)
}

/// `γ^v` on ℒ with a deliberate sign error on every pair involving degree ±3.
fn faulty_gamma_v(cfg: &RunConfig) -> Result<CurrentCocycleSpec, KnError> {
    let s = &cfg.surface;
    let l = WindowAlgebra::vector_fields(s);
    let basis = l.basis(cfg.window);
    let mut m = UserMatrix::new(cfg.window);
    for (i, a) in basis.iter().enumerate() {
        for b in &basis[i + 1..] {
            let v = gamma_v_basis(s, Cycle::Separating, &RationalFunction::zero(), (a.degree(), a.point()), (b.degree(), b.point()))?;
            let flip = a.degree().abs() == 3 || b.degree().abs() == 3;
            m.set(*a, *b, if flip { -v } else { v })?;
        }
    }
    Ok(CurrentCocycleSpec::UserMatrix(m))
}

fn only_separating(spec: &CurrentCocycleSpec) -> bool {
    match spec {
        CurrentCocycleSpec::Affine { cycle, .. } | CurrentCocycleSpec::Mixing { cycle, .. } | CurrentCocycleSpec::VectorField { cycle, .. } => {
            *cycle == Cycle::Separating
        }
        CurrentCocycleSpec::LinearCombination(parts) => parts.iter().all(|(_, p)| only_separating(p)),
        CurrentCocycleSpec::UserMatrix(_) => false,
        CurrentCocycleSpec::ExtendedByZero(inner) => only_separating(inner),
    }
}

fn only_affine(spec: &CurrentCocycleSpec) -> bool {
    match spec {
        CurrentCocycleSpec::Affine { .. } => true,
        CurrentCocycleSpec::LinearCombination(parts) => parts.iter().all(|(_, p)| only_affine(p)),
        _ => false,
    }
}

fn run_task(cfg: &RunConfig, task: Task) -> Vec<Record> {
    let s = &cfg.surface;
    let w = cfg.window;
    let alg = cfg.algebra();
    match task {
        Task::Duality => cfg
            .lambdas
            .iter()
            .map(|&l| {
                let r = s.verify_duality(l, w);
                let detail = match &r.violation {
                    None => format!("{} pairings form the identity pattern", r.pairs_checked),
                    Some(v) => format!("<f({},{}), g({},{})> = {}", v.n, v.p, v.m, v.r, format_scalar(&v.value)),
                };
                Record::new(format!("duality lambda={l}"), r.passed(), detail)
            })
            .collect(),
        Task::Partition => {
            let sum = (1..=s.k()).try_fold(RationalFunction::zero(), |acc, p| s.basis_element(0, 0, p).map(|b| &acc + &b.section.f));
            vec![match sum {
                Ok(f) => Record::new("partition of unity", f == RationalFunction::one(), format!("sum_p A(0,p) = {}", f.to_text())),
                Err(e) => error_record("partition of unity", e),
            }]
        }
        Task::Grading => operations(cfg).into_iter().map(|op| grading_record(cfg, op)).collect(),
        Task::Geometric => {
            let mut out = Vec::new();
            let gf = CurrentCocycleSpec::affine(vec![vec![int(1)]]);
            out.push(conditions_record("gamma_f cocycle identity on A".into(), check_cocycle_conditions(&WindowAlgebra::functions(s), &gf, w)));
            let gv = match cfg.fault {
                Some(Fault::GammaVSign) => faulty_gamma_v(cfg),
                None => Ok(CurrentCocycleSpec::vector_field()),
            };
            let l = WindowAlgebra::vector_fields(s);
            out.push(conditions_record("gamma_v cocycle identity on L".into(), gv.and_then(|gv| check_cocycle_conditions(&l, &gv, w))));
            let d1 = WindowAlgebra::d1(s);
            let gm = CurrentCocycleSpec::mixing(vec![int(1)]);
            out.push(conditions_record("gamma_m cocycle identity on D1".into(), check_cocycle_conditions(&d1, &gm, w)));
            for &l in &cfg.lambdas {
                let spec = CurrentCocycleSpec::from_d1(&gamma_lambda(l as i64));
                out.push(conditions_record(format!("gamma_lambda({l}) cocycle identity on D1"), check_cocycle_conditions(&d1, &spec, w)));
            }
            out
        }
        Task::Jacobi => vec![check_record(format!("Jacobi identity on {}", alg.name()), &check_jacobi(&alg, w))],
        Task::Cocycles => {
            let mut out: Vec<Record> = cfg
                .cocycles
                .iter()
                .map(|c| conditions_record(format!("cocycle conditions {}", c.name), check_cocycle_conditions(&alg, &c.spec, w)))
                .collect();
            let sum = CurrentCocycleSpec::LinearCombination(cfg.cocycles.iter().map(|c| (int(1), c.spec.clone())).collect());
            out.push(conditions_record("cocycle conditions (sum of all)".into(), check_cocycle_conditions(&alg, &sum, w)));
            out
        }
        Task::Locality => cfg
            .cocycles
            .iter()
            .map(|c| {
                let task = format!("locality {}", c.name);
                if !only_separating(&c.spec) {
                    return Record::new(task, true, "not applicable: not integrated over the separating cycle");
                }
                match cocycle_matrix(&alg, &c.spec, w) {
                    Ok(m) => match locality_bounds(&m) {
                        None => Record::new(task, true, "zero on the window"),
                        Some((lo, hi)) => Record::new(task, hi <= 0, format!("nonzero levels {lo}..{hi} (upper bound must be <= 0)")),
                    },
                    Err(e) => error_record(&task, e),
                }
            })
            .collect(),
        Task::Invariance => {
            let mut out = Vec::new();
            for cycle in [Cycle::Separating, Cycle::PerPoint(1)] {
                let form = |a: (i64, usize), b: (i64, usize)| gamma_f_basis(s, cycle, a, b);
                let label = match cycle {
                    Cycle::Separating => "separating".to_string(),
                    Cycle::PerPoint(i) => format!("point {i}"),
                };
                out.push(check_record(format!("gamma_f multiplicative ({label})"), &check_multiplicative(s, &form, w.min(3))));
                out.push(check_record(format!("gamma_f L-invariant ({label})"), &check_L_invariant(s, &form, w.min(3))));
            }
            let cur = alg.current_part();
            for c in cfg.cocycles.iter().filter(|c| only_affine(&c.spec)) {
                let task = format!("L-invariance {}", c.name);
                out.push(match check_L_invariance_current(&cur, &c.spec, w) {
                    Ok(r) => check_record(task, &r),
                    Err(e) => error_record(&task, e),
                });
            }
            out
        }
        Task::Perfectness => {
            if cfg.lie.is_perfect() {
                vec![check_record(format!("perfectness of {}", alg.current_part().name()), &check_perfectness(&alg, w))]
            } else {
                vec![Record::new("perfectness", true, format!("not applicable: {} is not perfect", cfg.lie.name()))]
            }
        }
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Report {
    let records = cfg.tasks.iter().flat_map(|&t| run_task(cfg, t)).collect();
    report(cfg, "verify", cfg.window, records)
}

pub fn cmd_h2loc(cfg: &RunConfig, window: i64) -> Report {
    let mut records = Vec::new();
    for target in &cfg.targets {
        let g = &target.lie;
        let (alg, family) = match target.kind {
            TargetKind::Current => {
                let fam: Vec<_> = default_cocycles(g).into_iter().filter(|c| only_affine(&c.spec)).collect();
                (WindowAlgebra::current(&cfg.surface, g.clone()), fam)
            }
            TargetKind::D1 => (WindowAlgebra::d1g(&cfg.surface, g.clone()), default_cocycles(g)),
        };
        let expected = g.reductive().map(|info| {
            let n = info.abelian_dim;
            let base = n * (n + 1) / 2 + info.simple_count;
            match target.kind {
                TargetKind::Current => base,
                TargetKind::D1 => base + n + 1,
            }
        });
        let specs: Vec<CurrentCocycleSpec> = family.iter().map(|c| c.spec.clone()).collect();
        let rank = match family_rank(&alg, &specs, window) {
            Ok(r) => r,
            Err(e) => {
                records.push(error_record(&format!("h2loc {}", target.label), e));
                continue;
            }
        };
        let mut t = Table::new(&["member", "independent", "certificate"]);
        let mut all_certified = true;
        for (k, c) in family.iter().enumerate() {
            let cert = cocycle_matrix(&alg, &c.spec, window).and_then(|m| coboundary_feasible(&alg, &m));
            let text = match cert {
                Ok(cert) => {
                    all_certified &= cert.is_not_coboundary();
                    cert.summary()
                }
                Err(e) => {
                    all_certified = false;
                    format!("error: {e}")
                }
            };
            t.push(vec![c.name.clone(), rank.independent.contains(&k).to_string(), text]);
        }
        let (passed, expected_text) = match expected {
            Some(e) => (rank.rank == e && all_certified, e.to_string()),
            None => (all_certified, "unknown (not reductive)".into()),
        };
        let detail = format!(
            "expected dimension {expected_text}; certified lower bound {} from a family of {} (window {window}, {} constraints, coboundary rank {})",
            rank.rank,
            family.len(),
            rank.constraints,
            rank.coboundary_rank
        );
        records.push(Record::new(format!("h2loc {}", target.label), passed, detail).with_table(t));
    }
    report(cfg, "h2loc", window, records)
}
