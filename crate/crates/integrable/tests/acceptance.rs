//! Acceptance run: one line per criterion, nonzero exit when any fails.

use std::process::ExitCode;
use std::time::Instant;

use exclusion_core::{int, rat, to_f64, Rational};
use exclusion_integrable::ansatz::*;
use exclusion_integrable::markov::{build_markov, evolve, l1_distance, observables, steady_state};
use exclusion_integrable::transfer::*;
use exclusion_integrable::verifier::{run_suite, sample_points, CheckReport, SkipReason, Status};
use exclusion_integrable::{Model, ModelKind, Rates};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rates() -> Rates {
    Rates::new(int(1), int(1), rat(1, 2), rat(1, 3))
}

fn four_models() -> Vec<Model> {
    vec![
        Model::asep(rates(), int(2)).unwrap(),
        Model::ssep(rates()),
        Model::tasep(int(1), int(1)),
        Model::rd(rates(), int(3)).unwrap(),
    ]
}

fn rd_fast() -> Model {
    Model::rd(rates(), int(3)).unwrap()
}

fn rd_slow() -> Model {
    Model::rd(Rates::new(int(1), rat(2, 3), rat(1, 5), rat(3, 2)), rat(1, 2)).unwrap()
}

fn first_non_pass(reports: &[CheckReport]) -> Option<String> {
    reports.iter().find(|r| !r.status.is_pass()).map(|r| format!("{} {} {:?}: {:?}", r.model, r.check, r.points, r.status))
}

fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn identity_suite() -> Outcome {
    let mut pass = 0;
    let mut skipped = 0;
    for m in four_models() {
        let pts = sample_points(&m, 1, 5).map_err(|e| e.to_string())?;
        let reports = run_suite(&m, &pts);
        for r in &reports {
            match &r.status {
                Status::Pass => pass += 1,
                Status::Fail { .. } => return Err(format!("{} {} {:?}: {:?}", r.model, r.check, r.points, r.status)),
                Status::Skipped(SkipReason::Pole(p)) => return Err(format!("{} {}: pole {p}", r.model, r.check)),
                Status::Skipped(SkipReason::Unsupported(_)) => skipped += 1,
            }
        }
        if m.kind() == ModelKind::Tasep {
            for check in ["r.crossing", "reflection.Ktilde"] {
                let rows: Vec<_> = reports.iter().filter(|r| r.check == check).collect();
                require(!rows.is_empty() && rows.iter().all(|r| matches!(r.status, Status::Skipped(_))), || {
                    format!("TASEP {check} rows are not all skipped")
                })?;
            }
        }
    }
    Ok(format!("{pass} exact passes, {skipped} inapplicable rows skipped, 0 fail"))
}

fn markov_derivative() -> Outcome {
    let mut n = 0;
    for m in four_models() {
        for l in 1..=5 {
            let r = markov_from_transfer(&m, l);
            require(r.status.is_pass(), || format!("{} L={l}: {:?}", m.name(), r.status))?;
            n += 1;
        }
    }
    Ok(format!("{n} (model, L) cases exact"))
}

fn commutation() -> Outcome {
    let pairs = [(int(2), int(5)), (rat(1, 3), rat(7, 2)), (rat(-5, 4), int(3))];
    let mut n = 0;
    for m in four_models() {
        for l in 2..=4 {
            let spec = TransferSpec::homogeneous(m.clone(), l);
            for (x, y) in &pairs {
                let r = check_commutation(&spec, x, y);
                require(r.status.is_pass(), || format!("{} L={l} ({x},{y}): {:?}", m.name(), r.status))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} commutators vanish exactly"))
}

fn eigenvalues() -> Outcome {
    let xs = [rat(7, 3), rat(-5, 4), int(4)];
    let ssep = Model::ssep(rates());
    let asep = Model::asep(rates(), int(2)).unwrap();
    let mut n = 0;
    for l in 1..=3 {
        let specs = [
            TransferSpec::homogeneous(ssep.clone(), l),
            TransferSpec::inhomogeneous(ssep.clone(), [rat(1, 2), rat(2, 3), rat(5, 7)][..l].to_vec()),
            TransferSpec::homogeneous(asep.clone(), l),
            TransferSpec::inhomogeneous(asep.clone(), [int(2), int(3), rat(1, 3)][..l].to_vec()),
        ];
        for spec in &specs {
            let name = spec.model.name();
            let right = match spec.normalization {
                Normalization::HomogeneousWithTrace => {
                    steady_state(&spec.model, l).map_err(|e| e.to_string())?.probabilities()
                }
                Normalization::Unnormalized => {
                    lambda_eigenvector(spec, [&int(3), &rat(5, 2)]).map_err(|e| e.to_string())?
                }
            };
            let ones = vec![int(1); 1 << l];
            for x in &xs {
                let reports = vec![
                    check_eigenpair(spec, x, &right, Side::Right),
                    check_eigenpair(spec, x, &ones, Side::Left),
                    check_crossing_symmetry_t(spec, x),
                ];
                if let Some(bad) = first_non_pass(&reports) {
                    return Err(format!("{bad} thetas={:?}", spec.thetas));
                }
                n += reports.len();
            }
            if spec.normalization == Normalization::Unnormalized {
                for th in &spec.thetas {
                    let v = lambda_eigenvalue(&spec.model, th, &spec.thetas).map_err(|e| e.to_string())?;
                    require(v == int(1), || format!("{name} lambda({th}) = {v}"))?;
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} exact eigenvalue, crossing and lambda(theta)=1 checks"))
}

fn matrix_ansatz() -> Outcome {
    for (a, b) in [(int(1), int(1)), (rat(1, 2), rat(1, 3)), (rat(7, 4), rat(2, 9))] {
        let model = Model::tasep(a.clone(), b.clone());
        for l in 1..=8 {
            let rep = tasep_representation(&a, &b, l + 1).map_err(|e| e.to_string())?;
            let ansatz = steady_from_ansatz(&rep, l).map_err(|e| e.to_string())?.probabilities();
            let exact = steady_state(&model, l).map_err(|e| e.to_string())?.probabilities();
            require(ansatz == exact, || format!("TASEP alpha={a} beta={b} L={l}"))?;
        }
    }
    let example = steady_from_ansatz(&tasep_representation(&int(1), &int(1), 3).unwrap(), 2).unwrap().probabilities();
    require(example == [rat(1, 5), rat(1, 5), rat(2, 5), rat(1, 5)], || format!("L=2 example {example:?}"))?;

    let mut worst = 0.0_f64;
    for model in [rd_fast(), rd_slow()] {
        for l in 1..=6 {
            let exact = steady_state(&model, l).map_err(|e| e.to_string())?;
            let obs = observables(&exact, &model);
            let (approx, _) = rd_steady_converged(&model, l, DEFAULT_TRUNCATION_CAP).map_err(|e| e.to_string())?;
            let approx_obs = observables(&approx, &model);
            let exact_f = exact.to_f64();
            let exact_obs = observables(&exact_f, &model);
            for (a, b) in [
                (approx.probabilities(), exact_f.probabilities()),
                (approx_obs.density, exact_obs.density),
                (approx_obs.current_lat, exact_obs.current_lat),
                (approx_obs.current_eva, exact_obs.current_eva),
            ] {
                worst = worst.max(max_relative_difference(&a, &b));
            }
            let prof: Vec<RdClosedForm<Rational>> = rd_profile(&model, l).map_err(|e| e.to_string())?;
            for (i, site) in prof.iter().enumerate() {
                require(site.exact.density == obs.density[i], || format!("RD closed density L={l} i={}", i + 1))?;
                if i + 1 < l {
                    require(
                        site.exact.current_lat.as_ref() == Some(&obs.current_lat[i])
                            && site.exact.current_eva.as_ref() == Some(&obs.current_eva[i]),
                        || format!("RD closed currents L={l} i={}", i + 1),
                    )?;
                }
            }
        }
    }
    require(worst <= 1e-10, || format!("RD ansatz relative difference {worst:e}"))?;
    for model in [rd_fast(), rd_slow()] {
        for l in 3..=100 {
            let r = check_current_balance(&model, l);
            require(r.status.is_pass(), || format!("balance L={l}: {:?}", r.status))?;
        }
    }
    Ok(format!("TASEP exact L<=8; RD max rel diff {worst:.1e}, closed forms exact; balance exact L<=100"))
}

fn inhomogeneous_eigenvector() -> Outcome {
    let mut worst = 0.0_f64;
    let mut n = 0;
    for thetas in [vec![int(3), rat(5, 2)], vec![rat(1, 3), rat(3, 4)], vec![rat(3, 2), rat(4, 5), rat(5, 3)]] {
        let reports = check_inhomogeneous_eigenvector(&rd_fast(), &thetas, DEFAULT_TRUNCATION_CAP, 1e-10);
        require(reports.len() == 2 * thetas.len(), || format!("{} reports for {thetas:?}", reports.len()))?;
        if let Some(bad) = first_non_pass(&reports) {
            return Err(bad);
        }
        for r in &reports {
            let res = r
                .detail
                .as_deref()
                .and_then(|d| d.split_whitespace().find_map(|w| w.strip_prefix("residual=")))
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| format!("no residual in {:?}", r.detail))?;
            worst = worst.max(res);
            n += 1;
        }
    }
    Ok(format!("{n} checks, max residual {worst:.1e} <= 1e-10"))
}

fn zf_gz() -> Outcome {
    let exclusion = [
        Model::asep(rates(), int(2)).unwrap(),
        Model::ssep(rates()),
        Model::tasep(int(1), rat(2, 3)),
    ];
    let mut n = 0;
    for m in &exclusion {
        for l in 1..=3 {
            for (x1, x2) in [(int(2), rat(7, 2)), (rat(-5, 4), rat(7, 3))] {
                let reports = check_zf_monodromy(m, l, &x1, &x2);
                if let Some(bad) = first_non_pass(&reports) {
                    return Err(format!("L'={l}: {bad}"));
                }
                n += reports.len();
            }
        }
    }
    for m in [rd_fast(), rd_slow()] {
        let mut reports = check_rd_relations(&m, RD_CHECK_TRUNCATION);
        reports.extend(check_zf_rd(&m, RD_CHECK_TRUNCATION, &int(2), &int(3)));
        for x in [int(1), int(2), rat(-3, 5)] {
            reports.extend(check_gz(&m, RD_CHECK_TRUNCATION, &x));
        }
        if let Some(bad) = first_non_pass(&reports) {
            return Err(bad);
        }
        n += reports.len();
    }
    Ok(format!("{n} exact ZF/GZ checks"))
}

fn ssep_conjugation() -> Outcome {
    let m = Model::ssep(rates());
    let mut n = 0;
    for thetas in [vec![rat(1, 2)], vec![rat(1, 2), rat(2, 3)]] {
        let spec = TransferSpec::inhomogeneous(m.clone(), thetas);
        for x in [int(3), rat(2, 5), rat(-7, 3)] {
            let reports = ssep_conjugated(&spec, &x);
            if let Some(bad) = first_non_pass(&reports) {
                return Err(bad);
            }
            n += reports.len();
        }
    }
    Ok(format!("{n} exact checks"))
}

fn profile() -> Outcome {
    let l = 60;
    let fast: Vec<RdClosedForm<f64>> = rd_profile(&rd_fast(), l).map_err(|e| e.to_string())?;
    let slow: Vec<RdClosedForm<f64>> = rd_profile(&rd_slow(), l).map_err(|e| e.to_string())?;
    let edges = |p: &[RdClosedForm<f64>]| -> [Vec<f64>; 2] {
        [
            p.iter().take(6).map(|s| s.exact.density - 0.5).collect(),
            p.iter().rev().take(6).map(|s| s.exact.density - 0.5).collect(),
        ]
    };
    for dev in edges(&fast) {
        require(dev.windows(2).all(|w| w[0] * w[1] > 0.0 && w[1].abs() < w[0].abs()), || {
            format!("kappa=3 layer not monotone: {dev:?}")
        })?;
    }
    for dev in edges(&slow) {
        require(dev.windows(2).all(|w| w[0] * w[1] < 0.0), || format!("kappa=1/2 layer not alternating: {dev:?}"))?;
    }
    let mut bulk = 0.0_f64;
    let mut asym = 0.0_f64;
    for p in [&fast, &slow] {
        for s in &p[25..35] {
            bulk = bulk.max((s.exact.density - 0.5).abs());
        }
        for s in p.iter().take(6).chain(p.iter().rev().take(6)) {
            asym = asym.max((s.exact.density - s.asymptotic.density).abs());
            for (a, b) in [
                (s.exact.current_lat, s.asymptotic.current_lat),
                (s.exact.current_eva, s.asymptotic.current_eva),
            ] {
                if let (Some(a), Some(b)) = (a, b) {
                    asym = asym.max((a - b).abs());
                }
            }
        }
    }
    require(bulk < 1e-6, || format!("bulk deviation {bulk:e}"))?;
    require(asym < 1e-6, || format!("asymptotic mismatch {asym:e}"))?;
    Ok(format!("regimes reproduced; bulk dev {bulk:.1e}, asymptotic dev {asym:.1e}"))
}

fn relaxation() -> Outcome {
    let m = Model::asep(rates(), int(2)).unwrap();
    let l = 4;
    let mk = build_markov(&m, l).map_err(|e| e.to_string())?;
    let exact: Vec<f64> = steady_state(&m, l).map_err(|e| e.to_string())?.probabilities().iter().map(to_f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let raw: Vec<f64> = (0..1 << l).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    let p0: Vec<f64> = raw.iter().map(|v| v / total).collect();
    let p = evolve(&p0, &mk, &int(100), 4000).map_err(|e| e.to_string())?;
    let d = l1_distance(&p.probabilities, &exact);
    require(d < 1e-8, || format!("L1 distance {d:e}"))?;
    Ok(format!("L1 distance {d:.1e} at t=100, neglected mass {:.1e}", p.neglected_mass))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("identity suite", identity_suite),
        ("markov from transfer", markov_derivative),
        ("commutation", commutation),
        ("eigenvalue formulas", eigenvalues),
        ("matrix ansatz vs nullspace", matrix_ansatz),
        ("inhomogeneous eigenvector", inhomogeneous_eigenvector),
        ("ZF/GZ", zf_gz),
        ("SSEP conjugation", ssep_conjugation),
        ("profile regimes", profile),
        ("relaxation", relaxation),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS {name}: {msg} ({secs:.2}s)", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {msg} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
