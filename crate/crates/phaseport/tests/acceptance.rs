//! Acceptance suite: one test per criterion, each printing a pass line
//! with its measured numbers (visible with `--nocapture`).

use std::time::Instant;

use phaseport::corpus::{self, CORPUS};
use phaseport::expr::{parse_field, Expr, FieldExpr};
use phaseport::flow::{
    build_rectangle, green_check, integrate, BuildParams, IntegrateParams, Terminal,
};
use phaseport::geom::{Point, Rect};
use phaseport::report::analyze;
use phaseport::rng::SplitMix64;
use phaseport::singular::TrichotomyClass;
use phaseport::spectral::FieldClass;
use phaseport::topo::{perturb_constant, poincare_index, CircleSpec};
use phaseport::verdict::{
    check_theorem_a, check_theorem_b, check_theorem_c, AnalyzeParams, Conclusion,
};

fn field(name: &str) -> FieldExpr {
    corpus::parse_entry(corpus::find(name).expect("corpus entry"))
}

fn params(region: Rect) -> AnalyzeParams {
    AnalyzeParams {
        region,
        grid_n: 100,
        ..AnalyzeParams::default()
    }
}

/// Closed-form trace/determinant columns match exact derivatives at 1000
/// seeded points per field, relative error at most 1e-9, in under 5 s.
#[test]
fn criterion_1_table_oracles() {
    let started = Instant::now();
    let mut worst = 0.0f64;
    for name in ["F", "G", "H", "X2", "Y2", "Z2"] {
        let entry = corpus::find(name).unwrap();
        let check = corpus::check_oracles(entry, 1000, 42).unwrap_or_else(|e| panic!("{}", e));
        assert!(
            check.checked >= 900,
            "{}: only {} valid points",
            name,
            check.checked
        );
        worst = worst.max(check.worst_rel);
    }
    let elapsed = started.elapsed();
    assert!(worst <= 1e-9);
    assert!(elapsed.as_secs_f64() < 5.0, "took {:?}", elapsed);
    println!(
        "criterion 1 PASS: 6 fields x 1000 points, worst rel err {:.2e}, {:?}",
        worst, elapsed
    );
}

/// Portrait classifications: the cubic collapse field is a global
/// attractor, the quartic Hamiltonian a global center, and the cubic
/// line field has a suspected non-discrete singular set; under 60 s.
#[test]
fn criterion_2_corpus_verdicts() {
    let started = Instant::now();

    let f = field("F");
    let v = check_theorem_a(&f, &params(Rect::centered(3.0)));
    assert_eq!(
        v.conclusion,
        Conclusion::GloballyAsymptoticallyStable,
        "{:#?}",
        v
    );

    let x2 = field("X2");
    let v = check_theorem_c(&x2, &params(Rect::centered(3.0)));
    assert_eq!(v.conclusion, Conclusion::GlobalCenter, "{:#?}", v);

    let y_line = field("Y_line");
    let v = check_theorem_b(&y_line, &params(Rect::centered(2.0)));
    assert_eq!(
        v.conclusion,
        Conclusion::Trichotomy(TrichotomyClass::NonDiscreteSuspected),
        "{:#?}",
        v
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {:?}", elapsed);
    println!(
        "criterion 2 PASS: attractor, center, non-discrete verdicts in {:?}",
        elapsed
    );
}

/// Every corpus field surveyed Hurwitz-a.e. lands in the allowed
/// singular-set classes; the two-zero field is Mixed with the
/// determinant attaining both signs on the grid.
#[test]
fn criterion_3_trichotomy_property() {
    let mut hurwitz_fields = 0;
    for entry in CORPUS {
        let f = corpus::parse_entry(entry);
        let p = params(entry.region);
        let v = check_theorem_b(&f, &p);
        assert!(v.violation.is_none(), "{}: {:?}", entry.name, v.violation);
        let ev = phaseport::verdict::gather_evidence(&f, &p);
        if ev.survey.field_class == FieldClass::HurwitzAe {
            hurwitz_fields += 1;
            assert!(
                matches!(
                    ev.singularities.trichotomy_class,
                    TrichotomyClass::Empty
                        | TrichotomyClass::OnePoint
                        | TrichotomyClass::NonDiscreteSuspected
                ),
                "{}: Hurwitz a.e. but {:?}",
                entry.name,
                ev.singularities.trichotomy_class
            );
        }
    }
    assert!(
        hurwitz_fields >= 4,
        "only {} Hurwitz-a.e. corpus fields",
        hurwitz_fields
    );

    // contrapositive: two isolated zeros force a determinant sign change
    let y2_entry = corpus::find("Y2").unwrap();
    let y2 = corpus::parse_entry(y2_entry);
    let ev = phaseport::verdict::gather_evidence(&y2, &params(y2_entry.region));
    assert_eq!(ev.survey.field_class, FieldClass::Mixed);
    assert_eq!(ev.singularities.isolated.len(), 2);
    assert!(ev.survey.counts.saddle > 0, "no det < 0 samples");
    assert!(ev.survey.det_positive_fraction > 0.0, "no det > 0 samples");
    println!(
        "criterion 3 PASS: {} Hurwitz-a.e. fields in allowed classes; two-zero field Mixed",
        hurwitz_fields
    );
}

/// Index computations: values, additivity over the saddle/center
/// lattice, and stability under small constant perturbations; under 10 s.
#[test]
fn criterion_4_index_suite() {
    let started = Instant::now();
    let tol = 1e-9;
    let index = |f: &FieldExpr, c: Point, r: f64| {
        poincare_index(f, &CircleSpec::at(c, r).unwrap(), tol)
            .unwrap_or_else(|e| panic!("index at {} r {}: {}", c, r, e))
            .index
    };

    let radial = field("radial");
    assert_eq!(index(&radial, Point::ORIGIN, 1.0), 1);

    let f = field("F");
    assert_eq!(index(&f, Point::ORIGIN, 0.5), 1);

    let z2 = field("Z2");
    assert_eq!(index(&z2, Point::ORIGIN, 0.3), -1);

    // additivity: the radius-2 circle encloses all nine zeros
    let big = index(&z2, Point::ORIGIN, 2.0);
    let r = 0.5f64.sqrt();
    let coords = [-r, 0.0, r];
    let mut sum = 0i64;
    for &x in &coords {
        for &y in &coords {
            sum += index(&z2, Point::new(x, y), 0.15);
        }
    }
    assert_eq!(big, -1);
    assert_eq!(sum, big, "local indices sum {} vs global {}", sum, big);

    // stability under constant perturbations of norm at most 0.01
    let circle = CircleSpec::at(Point::ORIGIN, 0.5).unwrap();
    let base = poincare_index(&f, &circle, tol).unwrap().index;
    let mut rng = SplitMix64::stream(42, 0x1d);
    for _ in 0..20 {
        let theta = rng.range(0.0, std::f64::consts::TAU);
        let mag = rng.range(0.0, 0.01);
        let w = Point::new(mag * theta.cos(), mag * theta.sin());
        let fk = perturb_constant(&f, w);
        assert_eq!(poincare_index(&fk, &circle, tol).unwrap().index, base);
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {:?}", elapsed);
    println!(
        "criterion 4 PASS: indices +1/+1/-1, additivity sum {}, perturbation-stable, {:?}",
        sum, elapsed
    );
}

/// Boundary/area identity: closed-form quarter annulus, a generic
/// rectangle with order-2 refinement, and the Hurwitz-side consequence
/// l_out < l_in on every Hurwitz-a.e. corpus field.
#[test]
fn criterion_5_green_identity() {
    let radial = field("radial");
    let rect = build_rectangle(
        &radial,
        Point::new(0.0, 1.0),
        std::f64::consts::LN_2,
        std::f64::consts::FRAC_PI_2,
        &BuildParams::default(),
    )
    .unwrap();
    let result = green_check(&radial, &rect, 1024).unwrap();
    let expected = -3.0 * std::f64::consts::PI / 8.0;
    assert!(((result.l_out - result.l_in) - expected).abs() <= 1e-6);
    assert!((result.area_integral - expected).abs() <= 1e-6);
    assert!(result.residual <= 1e-6, "residual {}", result.residual);

    // generic rectangle: residual bound and order >= 2 under refinement
    let f = field("F");
    let frect = build_rectangle(
        &f,
        Point::new(1.0, 1.0),
        0.05,
        0.05,
        &BuildParams::default(),
    )
    .unwrap();
    let r512 = green_check(&f, &frect, 512).unwrap().residual;
    assert!(r512 <= 1e-4, "residual {}", r512);
    let floor = 1e-10;
    let mut prev: Option<f64> = None;
    let mut orders = Vec::new();
    for n in [128usize, 256, 512] {
        let r = green_check(&f, &frect, n).unwrap().residual;
        if let Some(p) = prev {
            let order = (p / r).log2();
            orders.push(order);
            assert!(order >= 1.9 || r <= floor, "order {} at n={}", order, n);
        }
        prev = Some(r);
    }

    // trace-sign consequence on every Hurwitz-a.e. corpus entry
    let bases = [
        ("F", Point::new(1.0, 1.0), 0.05, 0.05),
        ("G", Point::new(1.5, 0.5), 0.05, 0.05),
        ("H", Point::new(1.0, 1.0), 0.05, 0.05),
        ("Y_line", Point::new(1.0, 0.5), 0.05, 0.05),
        (
            "radial",
            Point::new(0.0, 1.0),
            std::f64::consts::LN_2,
            std::f64::consts::FRAC_PI_2,
        ),
    ];
    for (name, p1, ft, tt) in bases {
        let entry = corpus::find(name).unwrap();
        assert_eq!(entry.expected_field_class, FieldClass::HurwitzAe);
        let fld = corpus::parse_entry(entry);
        let rect = build_rectangle(&fld, p1, ft, tt, &BuildParams::default())
            .unwrap_or_else(|e| panic!("{}: {}", name, e));
        let g = green_check(&fld, &rect, 512).unwrap();
        assert!(
            g.l_out < g.l_in,
            "{}: l_out {} not below l_in {}",
            name,
            g.l_out,
            g.l_in
        );
    }
    println!(
        "criterion 5 PASS: quarter annulus residual {:.2e}, orders {:?}, l_out < l_in on 5 fields",
        result.residual, orders
    );
}

/// Center corroboration: orbits of the quartic Hamiltonian return to
/// their section start at three radii, and its first integral drifts at
/// most 1e-6 relative over t in [0, 50].
#[test]
fn criterion_6_center_corroboration() {
    let x2 = field("X2");
    let defaults = IntegrateParams::default();
    for r in [0.25, 0.5, 1.0] {
        let start = Point::new(r, 0.0);
        let traj = integrate(&x2, start, 200.0, &defaults);
        match traj.terminal {
            Terminal::PeriodicReturn { period } => {
                let gap = traj.end().dist(start);
                assert!(gap <= 1e-4, "radius {}: return gap {}", r, gap);
                assert!(period > 0.0);
            }
            other => panic!("radius {}: expected return, got {:?}", r, other),
        }
    }

    // first integral of the quartic Hamiltonian
    let h = |p: Point| (p.x - 1.0).powi(4) / 4.0 + p.x + (p.y - 1.0).powi(4) / 4.0 + p.y;
    let long = IntegrateParams {
        detect_return: false,
        ..defaults
    };
    let traj = integrate(&x2, Point::new(0.5, 0.0), 50.0, &long);
    assert!(traj.duration() >= 50.0 - 1e-9);
    let h0 = h(traj.states[0].p);
    let mut worst = 0.0f64;
    for s in &traj.states {
        worst = worst.max((h(s.p) - h0).abs() / h0.abs());
    }
    assert!(worst <= 1e-6, "relative drift {}", worst);
    println!(
        "criterion 6 PASS: returns at radii 0.25/0.5/1.0, energy drift {:.2e}",
        worst
    );
}

/// Attractor corroboration: twenty seeded orbits from the radius-2 ring
/// all land within 1e-6 of the origin.
#[test]
fn criterion_7_attractor_corroboration() {
    let f = field("F");
    let defaults = IntegrateParams::default();
    let mut rng = SplitMix64::stream(42, 0x7a);
    for k in 0..20 {
        let theta = k as f64 / 20.0 * std::f64::consts::TAU + rng.range(0.0, 0.05);
        let start = Point::new(2.0 * theta.cos(), 2.0 * theta.sin());
        let traj = integrate(&f, start, 200.0, &defaults);
        match traj.terminal {
            Terminal::ConvergedToPoint(q) => {
                assert!(q.norm() <= 1e-8, "converged to {}", q);
                assert!(
                    traj.end().norm() <= 1e-6,
                    "seed {}: final distance {}",
                    start,
                    traj.end().norm()
                );
            }
            other => panic!("seed {}: expected convergence, got {:?}", start, other),
        }
    }
    println!("criterion 7 PASS: 20/20 ring orbits reached ||p|| <= 1e-6");
}

/// Sampled injectivity evidence on the positive-determinant set: no two
/// of 5000 seeded samples with det > tol map within 1e-9 of each other
/// unless the samples themselves coincide to 1e-6.
#[test]
fn criterion_8_injectivity_evidence() {
    let f = field("F");
    let region = Rect::centered(3.0);
    let mut rng = SplitMix64::stream(42, 0x117);
    let mut samples: Vec<(Point, Point)> = Vec::new(); // (preimage, image)
    while samples.len() < 5000 {
        let p = Point::new(
            rng.range(region.xmin, region.xmax),
            rng.range(region.ymin, region.ymax),
        );
        let Ok((v, jac)) = f.eval_with_jacobian(p) else {
            continue;
        };
        if jac.det() > 1e-9 {
            samples.push((p, v));
        }
    }
    // sort by image x so near-collisions are adjacent in the scan
    samples.sort_by(|a, b| a.1.x.total_cmp(&b.1.x));
    let mut collisions = 0usize;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            if samples[j].1.x - samples[i].1.x > 1e-9 {
                break;
            }
            if samples[i].1.dist(samples[j].1) <= 1e-9 {
                let pre_dist = samples[i].0.dist(samples[j].0);
                assert!(
                    pre_dist <= 1e-6,
                    "images collide at {} but preimages {} apart",
                    samples[i].1,
                    pre_dist
                );
                collisions += 1;
            }
        }
    }
    println!(
        "criterion 8 PASS: 5000 samples, {} coincident-image pairs, all with coincident preimages",
        collisions
    );
}

/// Numerical hygiene: exact derivatives against central differences on
/// every corpus field, exact parser round-trips, and byte-stable reports
/// under a fixed seed.
#[test]
fn criterion_9_numerical_hygiene() {
    // exact derivatives vs central finite differences
    let h = 1e-5;
    for entry in CORPUS {
        let f = corpus::parse_entry(entry);
        let mut rng = SplitMix64::stream(42, 0x9d);
        let mut checked = 0usize;
        let mut attempts = 0usize;
        while checked < 1000 && attempts < 20_000 {
            attempts += 1;
            let p = Point::new(
                rng.range(entry.region.xmin, entry.region.xmax),
                rng.range(entry.region.ymin, entry.region.ymax),
            );
            let Ok(jac) = f.jacobian(p) else { continue };
            let fd = |e: &Expr, dx: f64, dy: f64| -> Option<f64> {
                let a = e.eval(Point::new(p.x + dx * h, p.y + dy * h)).ok()?;
                let b = e.eval(Point::new(p.x - dx * h, p.y - dy * h)).ok()?;
                Some((a - b) / (2.0 * h))
            };
            let stencil = [
                (jac.a, fd(f.component_x(), 1.0, 0.0)),
                (jac.b, fd(f.component_x(), 0.0, 1.0)),
                (jac.c, fd(f.component_y(), 1.0, 0.0)),
                (jac.d, fd(f.component_y(), 0.0, 1.0)),
            ];
            if stencil.iter().any(|(_, v)| v.is_none()) {
                continue;
            }
            for (ad, num) in stencil {
                let num = num.unwrap();
                assert!(
                    (ad - num).abs() <= 1e-5 * (1.0 + ad.abs()),
                    "{} at {}: ad {} vs fd {}",
                    entry.name,
                    p,
                    ad,
                    num
                );
            }
            checked += 1;
        }
        assert_eq!(
            checked, 1000,
            "{}: only {} comparable points",
            entry.name, checked
        );
    }

    // parser round-trips on all corpus sources and oracles
    for entry in CORPUS {
        for src in [entry.fx, entry.fy, entry.oracle_trace, entry.oracle_det] {
            let f1 = parse_field(src, "0").unwrap();
            let printed = f1.component_x().to_string();
            let f2 = parse_field(&printed, "0").unwrap();
            assert_eq!(f1.component_x(), f2.component_x(), "round trip of {}", src);
        }
    }

    // byte-stable reports under a fixed seed
    let z2_entry = corpus::find("Z2").unwrap();
    let z2 = corpus::parse_entry(z2_entry);
    let p = params(z2_entry.region);
    let a = analyze(&z2, &p).to_json();
    let b = analyze(&z2, &p).to_json();
    assert_eq!(a, b);
    println!("criterion 9 PASS: AD/FD agree at 1000 points x 9 fields, round-trips exact, reports byte-stable");
}
