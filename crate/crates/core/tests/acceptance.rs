//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status on
//! any failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use kn_core::algebras::{grading_analysis, BasisOp};
use kn_core::basis::{MarkedSurface, Section};
use kn_core::cocycles::{
    check_L_invariant, check_multiplicative, cocycle_f, cocycle_m, cocycle_v, gamma_f_basis, gamma_lambda, gamma_m_basis,
    gamma_v_basis, ConnectionChoice, Cycle,
};
use kn_core::current::{check_L_invariance_current, check_cocycle_conditions, coboundary_of, CurrentCocycleSpec, UserMatrix};
use kn_core::exact::{int, ratio, RationalFunction, Scalar};
use kn_core::lab::{cocycle_matrix, coboundary_feasible, family_rank, kahler_rank, l_invariant_uniqueness_probe, locality_bounds};
use kn_core::lie::{build_abelian, build_gl, build_sl, direct_sum, FiniteLieAlgebra};
use kn_core::window::{Elem, LinearFunctional, WindowAlgebra};

type Outcome = (bool, String);

fn surfaces() -> Vec<(&'static str, MarkedSurface)> {
    let f = |i: &[i64], o: &[i64]| {
        let i: Vec<Scalar> = i.iter().map(|&v| int(v)).collect();
        let o: Vec<Scalar> = o.iter().map(|&v| int(v)).collect();
        MarkedSurface::from_finite(&i, &o).expect("valid surface")
    };
    vec![
        ("I=[0] O=[inf]", f(&[0], &[])),
        ("I=[0,1] O=[inf]", f(&[0, 1], &[])),
        ("I=[0,1,2] O=[inf]", f(&[0, 1, 2], &[])),
        ("I=[0,1] O=[2,inf]", f(&[0, 1], &[2])),
    ]
}

fn lie_algebras() -> Vec<Arc<FiniteLieAlgebra>> {
    let sl2 = build_sl(2).unwrap();
    vec![
        Arc::new(build_abelian(2).unwrap()),
        Arc::new(sl2.clone()),
        Arc::new(build_gl(2).unwrap()),
        Arc::new(direct_sum(&[sl2.clone(), sl2]).unwrap()),
    ]
}

// ---------------------------------------------------------------------------
// Independent oracle for the classical surface: Laurent polynomials in z as
// maps exponent -> coefficient, residues read off at z^-1. Deliberately shares
// no code with the library's cocycle evaluation.

type Laurent = BTreeMap<i64, Scalar>;

fn monomial(k: i64) -> Laurent {
    BTreeMap::from([(k, int(1))])
}

fn d(f: &Laurent) -> Laurent {
    f.iter().filter(|(k, _)| **k != 0).map(|(k, c)| (k - 1, c * int(*k))).collect()
}

fn times(f: &Laurent, g: &Laurent) -> Laurent {
    let mut out = Laurent::new();
    for (a, x) in f {
        for (b, y) in g {
            *out.entry(a + b).or_insert_with(|| int(0)) += x * y;
        }
    }
    out
}

fn res0(f: &Laurent) -> Scalar {
    f.get(&-1).cloned().unwrap_or_else(|| int(0))
}

/// `res_0 f dg`
fn oracle_f(n: i64, m: i64) -> Scalar {
    res0(&times(&monomial(n), &d(&monomial(m))))
}

/// `res_0 ½(e''' f − e f''')` for `e = z^{n+1}`, `f = z^{m+1}`.
fn oracle_v(n: i64, m: i64) -> Scalar {
    let (e, f) = (monomial(n + 1), monomial(m + 1));
    let a = res0(&times(&d(&d(&d(&e))), &f));
    let b = res0(&times(&e, &d(&d(&d(&f)))));
    (a - b) * ratio(1, 2)
}

/// `res_0 e g''` for `e = z^{n+1}`, `g = z^m`.
fn oracle_m(n: i64, m: i64) -> Scalar {
    res0(&times(&monomial(n + 1), &d(&d(&monomial(m)))))
}

// ---------------------------------------------------------------------------

fn c1_duality() -> Outcome {
    let mut worst = Vec::new();
    let mut count = 0;
    for (name, s) in surfaces() {
        for lambda in [-1, 0, 1, 2] {
            let r = s.verify_duality(lambda, 6);
            count += r.pairs_checked;
            if !r.passed() {
                worst.push(format!("{name} λ={lambda}: {:?}", r.violation));
            }
        }
    }
    (worst.is_empty(), format!("{count} pairings on 4 surfaces x 4 weights, W=6 {}", worst.join("; ")))
}

fn c2_partition_of_unity() -> Outcome {
    let mut bad = Vec::new();
    for (name, s) in surfaces() {
        let mut sum = RationalFunction::zero();
        for p in 1..=s.k() {
            sum = &sum + &s.basis_element(0, 0, p).unwrap().section.f;
        }
        if sum != RationalFunction::one() {
            bad.push(format!("{name}: sum = {}", sum.to_text()));
        }
    }
    (bad.is_empty(), format!("1 = sum_p A(0,p) on 4 surfaces {}", bad.join("; ")))
}

fn c3_grading() -> Outcome {
    let mut bad = Vec::new();
    let mut rows = Vec::new();
    for (name, s) in surfaces() {
        let mut ops = vec![BasisOp::Mul, BasisOp::Bracket];
        ops.extend([-1, 0, 1, 2].map(BasisOp::Action));
        let mut upper = 0;
        for op in ops {
            let r = grading_analysis(&s, op, 5);
            upper = upper.max(r.upper_shift);
            if r.lower_shift != 0 || r.leading_violation.is_some() {
                bad.push(format!("{name} {}: lower {} {:?}", op.name(), r.lower_shift, r.leading_violation));
            }
            if s.is_classical() && r.upper_shift != 0 {
                bad.push(format!("{name} {}: classical upper shift {}", op.name(), r.upper_shift));
            }
        }
        rows.push(format!("{name}: max upper shift {upper}"));
    }
    (bad.is_empty(), format!("lower shift 0, leading coefficients exact, W=5 ({}) {}", rows.join(", "), bad.join("; ")))
}

fn c4_classical() -> Outcome {
    let s = MarkedSurface::classical();
    let zero = RationalFunction::zero();
    let mut bad = Vec::new();
    for n in -6i64..=6 {
        let a = s.basis_element(0, n, 1).unwrap();
        let e = s.basis_element(-1, n, 1).unwrap();
        if a.section.f != RationalFunction::monomial(int(1), n) || e.section.f != RationalFunction::monomial(int(1), n + 1) {
            bad.push(format!("basis at n={n}"));
        }
        for m in -6i64..=6 {
            let fa = Section::new(0, RationalFunction::monomial(int(1), n));
            let fb = Section::new(0, RationalFunction::monomial(int(1), m));
            let va = Section::new(-1, RationalFunction::monomial(int(1), n + 1));
            let vb = Section::new(-1, RationalFunction::monomial(int(1), m + 1));
            let c = Cycle::Separating;
            let f = [cocycle_f(&s, c, &fa, &fb).unwrap(), gamma_f_basis(&s, c, (n, 1), (m, 1)).unwrap()];
            let v = [cocycle_v(&s, c, &zero, &va, &vb).unwrap(), gamma_v_basis(&s, c, &zero, (n, 1), (m, 1)).unwrap()];
            let mx = [cocycle_m(&s, c, &zero, &va, &fb).unwrap(), gamma_m_basis(&s, c, &zero, (n, 1), (m, 1)).unwrap()];
            let delta = |v: i64| if n + m == 0 { int(v) } else { int(0) };
            let (of, ov, om) = (oracle_f(n, m), oracle_v(n, m), oracle_m(n, m));
            if of != delta(-n) || ov != delta(n * n * n - n) || om != delta(n * (n + 1)) {
                bad.push(format!("oracle disagrees with closed form at ({n},{m})"));
            }
            if f.iter().any(|x| *x != of) || v.iter().any(|x| *x != ov) || mx.iter().any(|x| *x != om) {
                bad.push(format!("library disagrees with oracle at ({n},{m})"));
            }
        }
    }
    (bad.is_empty(), format!("A_n=z^n, e_n=z^(n+1)d/dz; -n, n^3-n, n(n+1) vs residue oracle, |n|,|m|<=6 {}", bad.join("; ")))
}

fn c5_cocycle_identities() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0usize;
    let mut record = |label: String, rep: kn_core::Result<kn_core::current::ConditionsReport>, expect_pass: bool, bad: &mut Vec<String>| {
        match rep {
            Ok(r) => {
                checked += r.checked();
                if r.passed() != expect_pass {
                    bad.push(format!("{label}: passed={} {:?}", r.passed(), r.first_violation()));
                } else if !expect_pass && r.first_violation().is_none() {
                    bad.push(format!("{label}: failure not located"));
                }
            }
            Err(e) => bad.push(format!("{label}: {e}")),
        }
    };
    let w = 4;
    let all = surfaces();
    // function / vector field / 𝒟¹ cocycles on all four surfaces
    for (name, s) in &all {
        let fa = WindowAlgebra::functions(s);
        let l = WindowAlgebra::vector_fields(s);
        let d1 = WindowAlgebra::d1(s);
        let gf = CurrentCocycleSpec::affine(vec![vec![int(1)]]);
        record(format!("{name} gamma_f on A"), check_cocycle_conditions(&fa, &gf, w), true, &mut bad);
        record(format!("{name} gamma_v on L"), check_cocycle_conditions(&l, &CurrentCocycleSpec::vector_field(), w), true, &mut bad);
        record(format!("{name} gamma_m on D1"), check_cocycle_conditions(&d1, &CurrentCocycleSpec::mixing(vec![int(1)]), w), true, &mut bad);
        for lambda in [0, 1] {
            let spec = CurrentCocycleSpec::from_d1(&gamma_lambda(lambda));
            record(format!("{name} gamma_lambda({lambda}) on D1"), check_cocycle_conditions(&d1, &spec, w), true, &mut bad);
        }
    }
    // current-algebra cocycles, classical and two-point surfaces
    for (name, s) in all.iter().take(2) {
        for g in lie_algebras() {
            let alg = WindowAlgebra::d1g(s, g.clone());
            let forms = g.invariant_form_space();
            let phis = g.linear_forms_vanishing_on_derived();
            for (k, alpha) in forms.iter().enumerate() {
                let spec = CurrentCocycleSpec::affine(alpha.clone());
                record(format!("{name} {} alpha_{k}", g.name()), check_cocycle_conditions(&alg, &spec, w), true, &mut bad);
            }
            for (k, phi) in phis.iter().enumerate() {
                let spec = CurrentCocycleSpec::mixing(phi.clone());
                record(format!("{name} {} phi_{k}", g.name()), check_cocycle_conditions(&alg, &spec, w), true, &mut bad);
            }
            let alpha = forms.iter().fold(vec![vec![int(0); g.dim()]; g.dim()], |acc, f| {
                acc.iter().zip(f).map(|(r, s)| r.iter().zip(s).map(|(a, b)| a + b).collect()).collect()
            });
            let phi = phis.first().cloned().unwrap_or_else(|| vec![int(0); g.dim()]);
            let assembled = CurrentCocycleSpec::assembled(int(2), alpha, int(-3), phi, ratio(5, 2), &ConnectionChoice::default());
            record(format!("{name} {} assembled", g.name()), check_cocycle_conditions(&alg, &assembled, w), true, &mut bad);
        }
    }
    // negative controls on classical sl(2)
    let s = &all[0].1;
    let sl2 = Arc::new(build_sl(2).unwrap());
    let alg = WindowAlgebra::d1g(s, sl2.clone());
    let mut non_inv = vec![vec![int(0); 3]; 3];
    non_inv[2][2] = int(1);
    record("non-invariant alpha".into(), check_cocycle_conditions(&alg, &CurrentCocycleSpec::affine(non_inv), w), false, &mut bad);
    let phi_h = vec![int(0), int(0), int(1)];
    let rep = check_cocycle_conditions(&alg, &CurrentCocycleSpec::mixing(phi_h), w);
    let located = rep.as_ref().ok().and_then(|r| r.first_violation().map(str::to_owned)).unwrap_or_default();
    record("phi(h)=1 mixing".into(), rep, false, &mut bad);
    (bad.is_empty(), format!("{checked} window checks, W=4; negative controls fail at e.g. {located} {}", bad.join("; ")))
}

fn c6_locality() -> Outcome {
    let mut bad = Vec::new();
    let w = 6;
    for (name, s) in surfaces() {
        let checks = [
            (WindowAlgebra::functions(&s), CurrentCocycleSpec::affine(vec![vec![int(1)]])),
            (WindowAlgebra::vector_fields(&s), CurrentCocycleSpec::vector_field()),
            (WindowAlgebra::d1(&s), CurrentCocycleSpec::mixing(vec![int(1)])),
            (WindowAlgebra::d1(&s), CurrentCocycleSpec::from_d1(&gamma_lambda(2))),
        ];
        for (alg, spec) in checks {
            let m = cocycle_matrix(&alg, &spec, w).unwrap();
            match locality_bounds(&m) {
                Some((_, hi)) if hi > 0 => bad.push(format!("{name} {}: level {hi}", alg.name())),
                None => bad.push(format!("{name} {}: zero matrix", alg.name())),
                _ => {}
            }
        }
    }
    let s = &surfaces()[1].1;
    let fa = WindowAlgebra::functions(s);
    let per = CurrentCocycleSpec::Affine { alpha: vec![vec![int(1)]], cycle: Cycle::PerPoint(1) };
    let per_bounds = locality_bounds(&cocycle_matrix(&fa, &per, w).unwrap());
    let sep_bounds = locality_bounds(&cocycle_matrix(&fa, &CurrentCocycleSpec::affine(vec![vec![int(1)]]), w).unwrap());
    let witness = matches!(per_bounds, Some((lo, _)) if lo <= -2);
    if !witness {
        bad.push(format!("per-point bounds {per_bounds:?}"));
    }
    (
        bad.is_empty(),
        format!(
            "separating specs max level <= 0 on 4 surfaces, W=6; on I=[0,1] separating levels {sep_bounds:?}, per-point levels {per_bounds:?} {}",
            bad.join("; ")
        ),
    )
}

fn c7_invariance() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for (name, s) in surfaces() {
        for cycle in [Cycle::Separating, Cycle::PerPoint(1)] {
            let form = |a: (i64, usize), b: (i64, usize)| gamma_f_basis(&s, cycle, a, b);
            for r in [check_multiplicative(&s, &form, 3), check_L_invariant(&s, &form, 3)] {
                checked += r.checked;
                if !r.passed() {
                    bad.push(format!("{name} {cycle:?} {}: {:?}", r.name, r.violation));
                }
            }
        }
    }
    let s = MarkedSurface::classical();
    let mut probes = Vec::new();
    for g in [Arc::new(build_sl(2).unwrap()), Arc::new(build_abelian(2).unwrap())] {
        let alg = WindowAlgebra::current(&s, g.clone());
        let rep = CurrentCocycleSpec::affine(g.invariant_form_space()[0].clone());
        let inv = check_L_invariance_current(&alg, &rep, 4).unwrap();
        checked += inv.checked;
        if !inv.passed() {
            bad.push(format!("{} affine not L-invariant: {:?}", g.name(), inv.violation));
        }
        let probe = l_invariant_uniqueness_probe(&alg, &rep, 3, 100, 7).unwrap();
        if !probe.passed() {
            bad.push(format!("{} probe: {:?}", g.name(), probe.counterexamples));
        }
        probes.push(format!("{}: {}/{} samples L-invariant, {} nonzero", g.name(), probe.invariant_samples, probe.samples, probe.counterexamples.len()));
    }
    (bad.is_empty(), format!("{checked} identity checks; probe {} {}", probes.join(", "), bad.join("; ")))
}

fn c8_extension_by_zero() -> Outcome {
    let w = 4;
    let s = MarkedSurface::classical();
    let sl2 = Arc::new(build_sl(2).unwrap());
    let ab2 = Arc::new(build_abelian(2).unwrap());
    let mut controls: Vec<(String, Arc<FiniteLieAlgebra>, CurrentCocycleSpec, bool)> = Vec::new();
    controls.push(("sl(2) affine".into(), sl2.clone(), CurrentCocycleSpec::affine(sl2.trace_form().unwrap()), true));
    controls.push(("abelian(2) affine".into(), ab2.clone(), CurrentCocycleSpec::affine(ab2.invariant_form_space()[1].clone()), true));
    let mut phi = LinearFunctional::zero(20);
    phi.values.insert(Elem::Cur { x: 2, n: 0, p: 1 }, int(1));
    let delta = coboundary_of(&WindowAlgebra::current(&s, sl2.clone()), &phi, w).unwrap();
    controls.push(("sl(2) coboundary of phi(h(1))=1".into(), sl2.clone(), delta, false));
    let mut table = UserMatrix::new(w);
    for n in -w..=w {
        table.set(Elem::Cur { x: 0, n, p: 1 }, Elem::Cur { x: 1, n: -n, p: 1 }, int(n * n * n)).unwrap();
    }
    controls.push(("abelian(2) table n^3".into(), ab2.clone(), CurrentCocycleSpec::UserMatrix(table), false));
    let mut bad = Vec::new();
    let mut rows = Vec::new();
    for (label, g, spec, expect) in controls {
        let cur = WindowAlgebra::current(&s, g.clone());
        let on_current = check_cocycle_conditions(&cur, &spec, w).unwrap().passed();
        let inv = check_L_invariance_current(&cur, &spec, w).unwrap().passed();
        let ext = check_cocycle_conditions(&WindowAlgebra::d1g(&s, g), &spec.extended_by_zero(), w).unwrap().passed();
        rows.push(format!("{label}: invariant={inv} extends={ext}"));
        if !on_current || inv != expect || ext != expect {
            bad.push(format!("{label}: cocycle={on_current} invariant={inv} extends={ext}, expected {expect}"));
        }
    }
    (bad.is_empty(), format!("{} {}", rows.join(", "), bad.join("; ")))
}

fn c9_dimensions() -> Outcome {
    let w = 5;
    let s = MarkedSurface::classical();
    let mut bad = Vec::new();
    let mut rows = Vec::new();
    let mut target = |label: &str, alg: WindowAlgebra, specs: Vec<CurrentCocycleSpec>, expected: usize, bad: &mut Vec<String>| {
        let r = family_rank(&alg, &specs, w).unwrap();
        rows.push(format!("{label} {}/{expected}", r.rank));
        if r.rank != expected {
            bad.push(format!("{label}: rank {} expected {expected}", r.rank));
        }
    };
    target(
        "D1",
        WindowAlgebra::d1(&s),
        vec![CurrentCocycleSpec::affine(vec![vec![int(1)]]), CurrentCocycleSpec::mixing(vec![int(1)]), CurrentCocycleSpec::vector_field()],
        3,
        &mut bad,
    );
    let two = &surfaces()[1].1;
    target(
        "D1 (I=[0,1])",
        WindowAlgebra::d1(two),
        vec![CurrentCocycleSpec::affine(vec![vec![int(1)]]), CurrentCocycleSpec::mixing(vec![int(1)]), CurrentCocycleSpec::vector_field()],
        3,
        &mut bad,
    );
    let sl2 = Arc::new(build_sl(2).unwrap());
    target("sl(2)-current", WindowAlgebra::current(&s, sl2.clone()), vec![CurrentCocycleSpec::affine(sl2.trace_form().unwrap())], 1, &mut bad);
    let ss = Arc::new(direct_sum(&[build_sl(2).unwrap(), build_sl(2).unwrap()]).unwrap());
    let specs = ss.invariant_form_space().into_iter().map(CurrentCocycleSpec::affine).collect();
    target("sl(2)+sl(2)-current", WindowAlgebra::current(&s, ss), specs, 2, &mut bad);
    let ab = Arc::new(build_abelian(2).unwrap());
    let specs = ab.invariant_form_space().into_iter().map(CurrentCocycleSpec::affine).collect();
    target("abelian(2)-current", WindowAlgebra::current(&s, ab), specs, 3, &mut bad);
    let gl = Arc::new(build_gl(2).unwrap());
    let specs = vec![
        CurrentCocycleSpec::affine(gl.trace_form().unwrap()),
        CurrentCocycleSpec::affine(gl.trace_outer_form().unwrap()),
        CurrentCocycleSpec::mixing(gl.trace_functional().unwrap()),
        CurrentCocycleSpec::vector_field(),
    ];
    target("gl(2)-D1", WindowAlgebra::d1g(&s, gl), specs, 4, &mut bad);
    (bad.is_empty(), format!("certified lower bounds (rank/expected) at W=5: {} {}", rows.join(", "), bad.join("; ")))
}

fn c10_nontrivial() -> Outcome {
    let w = 5;
    let s = MarkedSurface::classical();
    let sl2 = Arc::new(build_sl(2).unwrap());
    let cur = WindowAlgebra::current(&s, sl2.clone());
    let a = coboundary_feasible(&cur, &cocycle_matrix(&cur, &CurrentCocycleSpec::affine(sl2.trace_form().unwrap()), w).unwrap()).unwrap();
    let l = WindowAlgebra::vector_fields(&s);
    let b = coboundary_feasible(&l, &cocycle_matrix(&l, &CurrentCocycleSpec::vector_field(), w).unwrap()).unwrap();
    (a.is_not_coboundary() && b.is_not_coboundary(), format!("sl(2)-current: {}; L: {}", a.summary(), b.summary()))
}

fn c11_connection_change() -> Outcome {
    let w = 5;
    let mut bad = Vec::new();
    for (name, s) in surfaces() {
        let l = WindowAlgebra::vector_fields(&s);
        // a meromorphic quadratic differential with poles only at marked points
        let mut r = RationalFunction::monomial(int(2), 1);
        for x in s.in_points() {
            r = &r + &RationalFunction::from_root_powers(ratio(3, 2), &[(x.clone(), -2)]);
        }
        let spec = CurrentCocycleSpec::VectorField { r: r.clone(), cycle: Cycle::Separating };
        if let Err(e) = ConnectionChoice::projective(r).validate(&s) {
            bad.push(format!("{name}: {e}"));
            continue;
        }
        let base = cocycle_matrix(&l, &CurrentCocycleSpec::vector_field(), w).unwrap();
        let diff = cocycle_matrix(&l, &spec, w).unwrap().sub(&base).unwrap();
        let cert = coboundary_feasible(&l, &diff).unwrap();
        if diff.is_zero() || !cert.is_coboundary_on_window() || !cert.verified {
            bad.push(format!("{name}: {}", cert.summary()));
        }
    }
    (bad.is_empty(), format!("R' = 2z + sum 3/2 (z-P)^-2 changes gamma_v by a window coboundary on 4 surfaces, W=5 {}", bad.join("; ")))
}

fn c12_kahler() -> Outcome {
    let mut bad = Vec::new();
    let mut rows = Vec::new();
    for (name, s) in surfaces().into_iter().take(3) {
        let n = s.n_points() as i64;
        let (a, b) = (kahler_rank(&s, n).unwrap(), kahler_rank(&s, n + 2).unwrap());
        rows.push(format!("N={n}: {a} (W={n}), {b} (W={})", n + 2));
        if a as i64 != n - 1 || a != b {
            bad.push(format!("{name}: {a}, {b}"));
        }
    }
    (bad.is_empty(), format!("{} {}", rows.join(", "), bad.join("; ")))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("duality", c1_duality),
        ("partition of unity", c2_partition_of_unity),
        ("almost-grading", c3_grading),
        ("classical regression", c4_classical),
        ("cocycle identities", c5_cocycle_identities),
        ("locality", c6_locality),
        ("L-invariance and multiplicativity", c7_invariance),
        ("extension by zero", c8_extension_by_zero),
        ("dimension certificates", c9_dimensions),
        ("non-triviality certificates", c10_nontrivial),
        ("connection independence", c11_connection_change),
        ("Kahler rank", c12_kahler),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {} ({:.1}s)",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            detail.trim_end(),
            start.elapsed().as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
