use faer::Mat;
use proptest::prelude::*;

use psdo::functionals::{bound_f, bound_p, lattice_qnorm, FVariant, LatticeNormParams};
use psdo::harness::{fit_loglog_slope, run_experiment, ExperimentConfig};
use psdo::harness::RunOptions;
use psdo::schatten::{check_holder, check_triangle, qnorm, singular_values_of};
use psdo::symbols::{builtin_family, norm_n, FamilyParams, FnSymbol, NormSampling, SeparableSymbol, Symbol, TMatrix};
use psdo::C64;

fn mat(n: usize, m: usize, seed: &[f64]) -> Mat<C64> {
    Mat::from_fn(n, m, |i, j| {
        let k = 2 * (i * m + j);
        C64::new(seed[k % seed.len()], seed[(k + 1) % seed.len()])
    })
}

fn entries() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 64..=64)
}

fn qn(m: &Mat<C64>, q: f64) -> f64 {
    qnorm(&singular_values_of(m.as_ref(), "t").unwrap(), q, 0.0).unwrap().value
}

/// `I - 2 v v^* / |v|^2`
fn reflection(v: &[C64]) -> Mat<C64> {
    let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    Mat::from_fn(v.len(), v.len(), |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        C64::new(id, 0.0) - v[i] * v[j].conj() * (2.0 / n2)
    })
}

fn gaussian_symbol() -> SeparableSymbol {
    let f = builtin_family("gaussian_bump", &FamilyParams::default()).unwrap();
    f.as_symbol().unwrap().as_ref().clone()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn q_triangle_inequality(a in entries(), b in entries(), n in 2usize..7, q in 0.05f64..=1.0) {
        let (a, b) = (mat(n, n + 1, &a), mat(n, n + 1, &b));
        let r = check_triangle(a.as_ref(), b.as_ref(), q).unwrap();
        prop_assert!(r.holds(1e-10 * r.rhs.max(1.0)), "{r:?}");
    }

    #[test]
    fn holder_inequality(a in entries(), b in entries(), n in 2usize..6, q in 0.2f64..=1.0, theta in 0.05f64..0.95) {
        let (a, b) = (mat(n, n, &a), mat(n, n, &b));
        let r = check_holder(a.as_ref(), b.as_ref(), q / theta, q / (1.0 - theta)).unwrap();
        prop_assert!(r.holds(1e-10), "{r:?}");
    }

    #[test]
    fn unitary_invariance(a in entries(), u in entries(), n in 2usize..6, q in 0.1f64..=1.0) {
        let am = mat(n, n, &a);
        let v1: Vec<C64> = (0..n).map(|i| C64::new(u[i] + 3.0, u[i + 8])).collect();
        let v2: Vec<C64> = (0..n).map(|i| C64::new(u[i + 16], u[i + 24] - 3.0)).collect();
        let (r1, r2) = (reflection(&v1), reflection(&v2));
        let rotated = &(&r1 * &am) * &r2;
        let (x, y) = (qn(&am, q), qn(&rotated, q));
        prop_assert!((x - y).abs() <= 1e-10 * x.max(1.0), "{x} vs {y}");
    }

    #[test]
    fn qnorm_is_homogeneous(a in entries(), n in 2usize..6, q in 0.1f64..=1.0, c in 0.01f64..100.0) {
        let am = mat(n, n, &a);
        let scaled = Mat::from_fn(n, n, |i, j| am[(i, j)] * c);
        let (x, y) = (qn(&am, q), qn(&scaled, q));
        prop_assert!((c * x - y).abs() <= 1e-10 * y.max(1e-300), "{x} {y}");
    }

    #[test]
    fn recover_xy_inverts_forward(
        t in prop::array::uniform4(-3.0f64..3.0),
        x in prop::collection::vec(-5.0f64..5.0, 2),
        y in prop::collection::vec(-5.0f64..5.0, 2),
    ) {
        let Ok(tm) = TMatrix::new(t[0], t[1], t[2], t[3]) else { return Ok(()) };
        let (w, z) = tm.forward(&x, &y);
        let (x2, y2) = tm.recover_xy(&w, &z).unwrap();
        let scale = 1.0 / tm.det().abs();
        for i in 0..2 {
            prop_assert!((x[i] - x2[i]).abs() <= 1e-12 * 50.0 * scale.max(1.0));
            prop_assert!((y[i] - y2[i]).abs() <= 1e-12 * 50.0 * scale.max(1.0));
        }
    }

    #[test]
    fn finite_differences_track_analytic_derivatives(w in -0.9f64..0.9, xi in -0.9f64..0.9, kw in 0usize..=2, kx in 0usize..=2) {
        prop_assume!(kw + kx <= 2);
        let a = gaussian_symbol();
        let inner = a.clone();
        let fd = FnSymbol::new(1, move |w, xi| inner.eval(w, xi));
        let exact = a.deriv(&[kw], &[kx], &[w], &[xi]).unwrap();
        let approx = fd.deriv(&[kw], &[kx], &[w], &[xi]).unwrap();
        prop_assert!((exact - approx).norm() < 1e-4, "{exact} vs {approx}");
    }

    #[test]
    fn norm_is_invariant_under_joint_rescaling(l1 in 0.3f64..3.0, r1 in 0.3f64..3.0, n in 0usize..=2, m in 0usize..=2) {
        let p = gaussian_symbol().0;
        let q = p.rescale(l1, r1).unwrap();
        let s = NormSampling { density: 16.0, max_points: 1 << 14 };
        let a = norm_n(&p, n, n, m, 1.0, 1.0, s).unwrap();
        let b = norm_n(&q, n, n, m, 1.0 / l1, 1.0 / r1, s).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
    }

    #[test]
    fn p_and_f_are_absolutely_homogeneous(
        c in (0.01f64..10.0, -3.0f64..3.0),
        pt in prop::collection::vec(-1.5f64..1.5, 3),
        t in 0.0f64..=1.0,
    ) {
        let c = C64::from_polar(c.0, c.1);
        let a = gaussian_symbol();
        let ca = SeparableSymbol::new(a.0.scaled(c)).unwrap();
        let tm = TMatrix::from_t(t).unwrap();
        let (p1, p2) = (bound_p(&a.0, &tm, 2, 2).unwrap(), bound_p(&ca.0, &tm, 2, 2).unwrap());
        let (x, y) = (p1.eval(&pt), p2.eval(&pt));
        prop_assert!((c.norm() * x - y).abs() <= 1e-12 * y.max(1e-300));
        let (f1, f2) = (bound_f(&a, 2, 2, FVariant::Full).unwrap(), bound_f(&ca, 2, 2, FVariant::Full).unwrap());
        let (x, y) = (f1.eval(&pt[..2]), f2.eval(&pt[..2]));
        prop_assert!((c.norm() * x - y).abs() <= 1e-12 * y.max(1e-300));
    }

    #[test]
    fn lattice_norm_grows_with_truncation(r in 0.3f64..3.0, delta in 0.3f64..3.0, rad in 1.0f64..4.0, shift in -2.0f64..2.0) {
        let h = move |x: &[f64]| (-(x[0] - shift).powi(2)).exp();
        let small = lattice_qnorm(&h, 1, &LatticeNormParams::new(r, delta, rad).unwrap().with_points(8)).unwrap();
        let big = lattice_qnorm(&h, 1, &LatticeNormParams::new(r, delta, rad + 1.0).unwrap().with_points(8)).unwrap();
        prop_assert!(big.value >= small.value * (1.0 - 1e-14));
    }

    #[test]
    fn lattice_norm_with_equal_exponents_is_lr_norm(r in 0.5f64..4.0, s in 0.3f64..2.0) {
        // int exp(-r x^2 / s^2) dx = s sqrt(pi / r)
        let h = move |x: &[f64]| (-(x[0] / s).powi(2)).exp();
        let got = lattice_qnorm(&h, 1, &LatticeNormParams::new(r, r, 12.0).unwrap().with_points(64)).unwrap().value;
        let want = (s * (std::f64::consts::PI / r).sqrt()).powf(1.0 / r);
        prop_assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
    }

    #[test]
    fn slope_is_invariant_under_rescaling(
        e in -3.0f64..3.0,
        c in 1e-3f64..1e3,
        k in 1e-2f64..1e2,
        noise in prop::collection::vec(-0.05f64..0.05, 6),
    ) {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| {
            let p = 2f64.powi(i + 2);
            (p, p.powf(e) * (1.0 + noise[i as usize]))
        }).collect();
        let base = fit_loglog_slope(&pts).unwrap();
        let moved: Vec<(f64, f64)> = pts.iter().map(|(p, y)| (p * k, y * c)).collect();
        let fit = fit_loglog_slope(&moved).unwrap();
        prop_assert!((fit.slope - base.slope).abs() < 1e-12);
    }
}

#[test]
fn report_rows_do_not_depend_on_worker_count() {
    let cfg = ExperimentConfig::from_toml(
        r#"
kind = "smooth_scaling"
q = 0.5
t = 0.5
alpha = [4, 8, 16, 32]
[fixture]
family = "gaussian_bump"
[grid]
half_width = 2.0
n = 64
"#,
    )
    .unwrap();
    let one = run_experiment(&cfg, RunOptions { workers: Some(1), seed: Some(3) }).unwrap();
    let three = run_experiment(&cfg, RunOptions { workers: Some(3), seed: Some(3) }).unwrap();
    assert_eq!(one.rows.len(), 4);
    assert_eq!(serde_json::to_string(&one.rows).unwrap(), serde_json::to_string(&three.rows).unwrap());
    assert_eq!(one.verdict.pass, three.verdict.pass);
}
