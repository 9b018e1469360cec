//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use modlab::criteria::{default_epsilons, DivergenceVerdict, EtaParams, FmoParams, FmoVerdict};
use modlab::disk::geodesic;
use modlab::experiments::{run_lower_q_verification, VerdictRecord};
use modlab::mappings::{dilatation, dilatation_fd, multiplicity};
use modlab::modulus::{radial_family, CircleFamilyParams, FamilyKind, SampledCurve};
use modlab::quadrature::{fubini_residual, FubiniResolution};
use modlab::*;

struct Line {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Line {
    Line { pass, detail }
}

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn random_point(rng: &mut ChaCha8Rng, max_r: f64) -> DiskPoint {
    let r = max_r * rng.gen::<f64>().sqrt();
    DiskPoint::from_polar(r, TAU * rng.gen::<f64>()).unwrap()
}

fn c1_mobius_invariance() -> Line {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let c = Complex64::from_polar(2.0 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
        let a = Complex64::from_polar((1.0 + c.norm_sqr()).sqrt(), TAU * rng.gen::<f64>());
        let g = MobiusAutomorphism::new(a, c).unwrap();
        let z1 = random_point(&mut rng, 0.9);
        let z2 = random_point(&mut rng, 0.9);
        worst = worst.max((hyp_distance(g.apply(z1), g.apply(z2)) - hyp_distance(z1, z2)).abs());
    }
    let ms = start.elapsed().as_secs_f64() * 1e3;
    check(worst < 1e-10 && ms < 1000.0, format!("max |Δh| = {worst:.2e} (< 1e-10), {ms:.0} ms (< 1000)"))
}

fn c2_radius_round_trip() -> Line {
    // Near r = 10, 1 − R ≈ 9e-5, so one rounding of R moves r by ~1e-12:
    // the r → R → r error is judged relative to r, the R → r → R error absolutely.
    let mut rel: f64 = 0.0;
    let mut abs_r: f64 = 0.0;
    let mut abs_big: f64 = 0.0;
    for i in 0..1000 {
        let r = 10.0 * i as f64 / 999.0;
        let back = hyp_radius(euclid_radius(r));
        abs_r = abs_r.max((back - r).abs());
        if r > 0.0 {
            rel = rel.max((back - r).abs() / r);
        }
        let big = euclid_radius(r);
        abs_big = abs_big.max((euclid_radius(hyp_radius(big)) - big).abs());
    }
    check(
        rel < 1e-13 && abs_big < 1e-13,
        format!("r→R→r relative {rel:.2e}, R→r→R absolute {abs_big:.2e} (< 1e-13); r→R→r absolute {abs_r:.2e}"),
    )
}

fn c3_circle_length() -> Line {
    let one = ScalarField::constant(1.0);
    let worst = [0.25, 0.5, 1.0, 2.0]
        .iter()
        .map(|&r| {
            let v = circle_integral(&one, r, 2048).unwrap().value;
            (v - TAU * f64::sinh(r)).abs() / (TAU * f64::sinh(r))
        })
        .fold(0.0, f64::max);
    check(worst < 1e-8, format!("max relative error {worst:.2e} (< 1e-8)"))
}

fn c4_fubini() -> Line {
    let start = Instant::now();
    let one = ScalarField::constant(1.0);
    let res = |n: usize| FubiniResolution {
        cartesian: n,
        radial: 256,
        angular: 1024,
    };
    let main = fubini_residual(&one, 1.0, res(400)).unwrap();
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let r100 = fubini_residual(&one, 1.0, res(100)).unwrap().residual;
    let r200 = fubini_residual(&one, 1.0, res(200)).unwrap().residual;
    let orders = [(r100 / r200).log2(), (r200 / main.residual).log2()];
    let order = orders[0].min(orders[1]);
    check(
        main.relative < 5e-3 && order >= 2.0 && ms < 10_000.0,
        format!(
            "relative residual {:.2e} (< 5e-3), halving orders {:.3}, {:.3} (≥ 2), {ms:.0} ms (< 10000)",
            main.relative, orders[0], orders[1]
        ),
    )
}

fn c5_ring_modulus() -> Line {
    let start = Instant::now();
    let ring = RingSpec::centered(0.5, 1.5).unwrap();
    let exact = ring_modulus_exact(&ring).unwrap();
    let dom = DiscretizedDomain::polar(0.5, 1.5, 200, 600).unwrap();
    let curves = radial_family(&dom, 401).unwrap();
    let family = CurveFamily::rasterize(FamilyKind::Connecting, &curves, &dom).unwrap();
    let r = modulus_discrete(&family, &dom, Metric::Hyperbolic, 1e-6).unwrap();
    let rel = (r.value - exact).abs() / exact;
    let secs = start.elapsed().as_secs_f64();
    check(
        rel < 0.05 && secs < 60.0,
        format!("discrete {:.5} vs 2π/log(R₂/R₁) = {exact:.5}, relative {rel:.2e} (< 5e-2), {secs:.1} s (< 60)", r.value),
    )
}

fn c6_metric_equivalence() -> Line {
    let s = 0.4;
    let dom = DiscretizedDomain::cartesian(Window::square(s), 96, 96).unwrap();
    let pt = |x: f64, y: f64| DiskPoint::new(x, y).unwrap();
    let mut curves = Vec::new();
    for i in 0..24 {
        let y0 = -s + 2.0 * s * (i as f64 + 0.5) / 24.0;
        for shift in [-0.2, 0.0, 0.2] {
            let y1 = (y0 + shift).clamp(-s + 1e-3, s - 1e-3);
            curves.push(SampledCurve::once(geodesic(pt(-s + 1e-9, y0), pt(s - 1e-9, y1), 200).unwrap()));
        }
    }
    let family = CurveFamily::rasterize(FamilyKind::Connecting, &curves, &dom).unwrap();
    let h = modulus_discrete(&family, &dom, Metric::Hyperbolic, 1e-6).unwrap().value;
    let e = modulus_discrete(&family, &dom, Metric::Euclidean, 1e-6).unwrap().value;
    let rel = (h - e).abs() / e;
    check(rel < 0.02, format!("hyperbolic {h:.5} vs euclidean {e:.5}, relative {rel:.2e} (< 2e-2)"))
}

fn c7_circle_family() -> Line {
    let ring = RingSpec::centered(0.5, 1.5).unwrap();
    let r = circle_family_modulus(&ring, &ScalarField::constant(1.0), CircleFamilyParams::default()).unwrap();
    // Closed form (1/2π) log(tanh(3/4) / tanh(1/4)).
    let closed = ((0.75f64).tanh() / (0.25f64).tanh()).ln() / TAU;
    let rel = r.relative_gap();
    check(
        rel < 0.02 && (r.reference - closed).abs() / closed < 1e-4,
        format!("modulus {:.6} vs ∫dr/‖Q‖ = {:.6} (closed form {closed:.6}), relative {rel:.2e} (< 2e-2)", r.value, r.reference),
    )
}

/// Equality-constrained Newton on `Σ φ α^q m` subject to `Σ α m = 1`.
fn newton_infimum(atoms: &[(f64, f64)], q: f64) -> f64 {
    let n = atoms.len();
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let mut alpha = vec![1.0 / total; n];
    let objective = |a: &[f64]| -> f64 { a.iter().zip(atoms).map(|(x, (p, m))| p * x.powf(q) * m).sum() };
    for _ in 0..200 {
        let mut kkt = DMatrix::<f64>::zeros(n + 1, n + 1);
        let mut rhs = DVector::<f64>::zeros(n + 1);
        for i in 0..n {
            let (p, m) = atoms[i];
            kkt[(i, i)] = q * (q - 1.0) * p * m * alpha[i].powf(q - 2.0);
            kkt[(i, n)] = m;
            kkt[(n, i)] = m;
            rhs[i] = -q * p * m * alpha[i].powf(q - 1.0);
        }
        let step = kkt.lu().solve(&rhs).expect("KKT system is non-singular");
        let mut t = 1.0;
        while (0..n).any(|i| alpha[i] + t * step[i] <= 0.0) {
            t *= 0.5;
        }
        let f0 = objective(&alpha);
        loop {
            let trial: Vec<f64> = (0..n).map(|i| alpha[i] + t * step[i]).collect();
            if objective(&trial) <= f0 || t < 1e-12 {
                alpha = trial;
                break;
            }
            t *= 0.5;
        }
        if (0..n).map(|i| step[i].abs()).fold(0.0, f64::max) < 1e-15 {
            break;
        }
    }
    objective(&alpha)
}

fn c8_weighted_infimum() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let atoms: Vec<(f64, f64)> = (0..10).map(|_| (rng.gen_range(0.1..10.0), rng.gen_range(0.01..1.0))).collect();
        let q = rng.gen_range(1.2..5.0);
        let closed = weighted_infimum(&atoms, q).unwrap().value;
        let direct = newton_infimum(&atoms, q);
        worst = worst.max((closed - direct).abs() / direct);
    }
    let two = weighted_infimum(&[(1.0, 0.5), (4.0, 0.5)], 2.0).unwrap().value;
    check(
        worst < 1e-6 && (two - 1.6).abs() < 1e-12,
        format!("max relative error {worst:.2e} (< 1e-6), two-atom value {two:.15} (1.6 ± 1e-12)"),
    )
}

fn c9_eta() -> Line {
    let ring = RingSpec::centered(0.5, 1.5).unwrap();
    let r = eta_inequality_check(&ScalarField::constant(1.0), &ring, 500, 9, EtaParams::default()).unwrap();
    check(
        r.equality_rel_error < 1e-6 && r.min_margin >= -1e-9 && r.n_random == 500,
        format!(
            "1/J = {:.6}, equality error {:.2e} (< 1e-6), min margin over {} weights {:.3e} (≥ -1e-9)",
            r.inverse_j, r.equality_rel_error, r.n_random, r.min_margin
        ),
    )
}

fn c10_distortion() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let points: Vec<DiskPoint> = (0..20)
        .map(|_| {
            let r = rng.gen_range(0.1..0.8);
            DiskPoint::from_polar(r, TAU * rng.gen::<f64>()).unwrap()
        })
        .collect();
    let (mut an, mut fd): (f64, f64) = (0.0, 0.0);
    for k in [2u32, 3, 5] {
        for f in [SampleMap::winding(k), SampleMap::radial_stretch(k as f64)] {
            for &z in &points {
                an = an.max((dilatation(&f, z).value() - k as f64).abs());
                fd = fd.max((dilatation_fd(&f, z, 1e-5).value() - k as f64).abs());
            }
        }
    }
    let targets: Vec<DiskPoint> = (0..50)
        .map(|_| {
            let r = rng.gen_range(0.05..0.95);
            DiskPoint::from_polar(r, TAU * rng.gen::<f64>()).unwrap()
        })
        .collect();
    let m = multiplicity(&SampleMap::winding(3), &targets, 32, 1e-12);
    let all_three = m.counts.iter().all(|&c| c == 3) && m.counts.len() == 50;
    check(
        an < 1e-6 && fd < 1e-4 && all_three,
        format!("analytic |K − k| {an:.2e} (< 1e-6), finite-difference {fd:.2e} (< 1e-4), winding(3) multiplicity 3 on {}/50 targets", m.counts.iter().filter(|&&c| c == 3).count()),
    )
}

fn c11_lower_q() -> Line {
    let start = Instant::now();
    let dir = repo().join("configs/suite");
    let run = |name: &str| run_lower_q_verification(&ExperimentConfig::load(dir.join(name)).unwrap()).unwrap().record;
    let id = run("lower_q_identity.json");
    let w2 = run("lower_q_winding2.json");
    let secs = start.elapsed().as_secs_f64();
    let (a, b) = (id.ratio.unwrap(), w2.ratio.unwrap());
    check(
        (a - 1.0).abs() <= 0.05 && (b - 1.0).abs() <= 0.05 && secs < 300.0,
        format!("identity ratio {a:.5}, winding(2) ratio {b:.5} (1 ± 0.05), {secs:.1} s (< 300)"),
    )
}

fn c12_criteria() -> Line {
    let eps = default_epsilons(0.5, 20);
    let fmo = |spec: &str| fmo_check(&ScalarField::parse(spec).unwrap(), DiskPoint::ORIGIN, &eps, FmoParams::default()).unwrap().verdict;
    let ring = RingSpec::centered(0.0, 1.0).unwrap();
    let div = |spec: &str| divergence_check(&ScalarField::parse(spec).unwrap(), &ring, 20).unwrap().verdict;
    let got = [
        (fmo("const:1") == FmoVerdict::Fmo, "fmo(1)"),
        (fmo("log-inv-r") == FmoVerdict::Fmo, "fmo(log 1/|z|)"),
        (fmo("inv-r") == FmoVerdict::NotFmo, "not_fmo(1/|z|)"),
        (div("const:1") == DivergenceVerdict::Diverges, "diverges(1)"),
        (div("radial:inv-h") == DivergenceVerdict::Converges, "converges(1/h)"),
    ];
    let failed: Vec<&str> = got.iter().filter(|g| !g.0).map(|g| g.1).collect();
    check(
        failed.is_empty(),
        if failed.is_empty() {
            "fmo(1), fmo(log 1/|z|), not_fmo(1/|z|), diverges(1), converges(1/h)".into()
        } else {
            format!("wrong verdicts: {}", failed.join(", "))
        },
    )
}

fn read_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                let bytes = std::fs::read(&p).unwrap();
                let bytes = if p.file_name().unwrap() == "record.json" {
                    let r: VerdictRecord = serde_json::from_slice(&bytes).unwrap();
                    r.without_timing().to_json().into_bytes()
                } else if p.file_name().unwrap() == "suite.json" {
                    let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                    for r in v["records"].as_array_mut().unwrap() {
                        r["runtime_ms"] = 0.into();
                    }
                    serde_json::to_vec_pretty(&v).unwrap()
                } else if p.file_name().unwrap() == "summary.csv" {
                    let text = String::from_utf8(bytes).unwrap();
                    let mut rdr = csv::Reader::from_reader(text.as_bytes());
                    let rows: Vec<String> = rdr
                        .records()
                        .map(|r| {
                            let r = r.unwrap();
                            r.iter().enumerate().filter(|(i, _)| *i != 6).map(|(_, f)| f.to_string()).collect::<Vec<_>>().join(",")
                        })
                        .collect();
                    rows.join("\n").into_bytes()
                } else {
                    bytes
                };
                out.push((rel, bytes));
            }
        }
    }
    out.sort();
    out
}

fn c13_determinism() -> Line {
    let configs = repo().join("configs/suite");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_suite(&configs, a.path()).unwrap();
    let rb = run_suite(&configs, b.path()).unwrap();
    let ta = read_tree(a.path());
    let tb = read_tree(b.path());
    let same = ta == tb && !ta.is_empty();
    check(
        same && ra.exit_code == 0 && rb.exit_code == 0,
        format!("{} files identical after removing runtime_ms: {same}; suite exit codes {}, {}", ta.len(), ra.exit_code, rb.exit_code),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Line); 13] = [
        ("Möbius invariance", c1_mobius_invariance),
        ("radius round-trip", c2_radius_round_trip),
        ("circle length", c3_circle_length),
        ("Fubini identity", c4_fubini),
        ("ring modulus", c5_ring_modulus),
        ("metric equivalence", c6_metric_equivalence),
        ("circle-family equality", c7_circle_family),
        ("weighted infimum", c8_weighted_infimum),
        ("η₀ extremality", c9_eta),
        ("distortion", c10_distortion),
        ("lower-Q end-to-end", c11_lower_q),
        ("criteria verdicts", c12_criteria),
        ("determinism", c13_determinism),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let line = f();
        if !line.pass {
            failures += 1;
        }
        println!("{} {:>2} {name}: {}", if line.pass { "PASS" } else { "FAIL" }, i + 1, line.detail);
    }
    println!("acceptance: {}/13 passed", 13 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
