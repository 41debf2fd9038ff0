use exclusion_core::{int, rat, Rational};
use exclusion_integrable::markov::steady_state;
use exclusion_integrable::transfer::*;
use exclusion_integrable::{Model, Rates};

fn rates() -> Rates {
    Rates::new(int(1), int(1), rat(1, 2), rat(1, 3))
}

fn models() -> Vec<Model> {
    vec![
        Model::asep(rates(), int(2)).unwrap(),
        Model::ssep(rates()),
        Model::tasep(int(1), int(1)),
        Model::rd(rates(), int(3)).unwrap(),
    ]
}

#[test]
fn derivative_gives_markov_matrix() {
    for m in models() {
        for l in 1..=5 {
            let r = markov_from_transfer(&m, l);
            assert!(r.status.is_pass(), "{} L={l}: {:?}", m.name(), r.status);
        }
    }
}

#[test]
fn transfer_matrices_commute() {
    let pairs = [(int(2), int(5)), (rat(1, 3), rat(7, 2)), (rat(-5, 4), int(3))];
    for m in models() {
        for l in 2..=3 {
            let spec = TransferSpec::homogeneous(m.clone(), l);
            for (x, y) in &pairs {
                let r = check_commutation(&spec, x, y);
                assert!(r.status.is_pass(), "{} L={l} ({x},{y}): {:?}", m.name(), r.status);
            }
        }
    }
}

#[test]
fn inhomogeneous_commutation() {
    let m = Model::asep(rates(), int(2)).unwrap();
    let spec = TransferSpec::inhomogeneous(m, vec![int(2), int(3), rat(1, 3)]);
    let r = check_commutation(&spec, &rat(5, 2), &rat(-1, 3));
    assert!(r.status.is_pass(), "{:?}", r.status);
}

fn lambda_specs() -> Vec<TransferSpec> {
    let ssep = Model::ssep(rates());
    let asep = Model::asep(rates(), int(2)).unwrap();
    let mut out = Vec::new();
    for l in 1..=3 {
        out.push(TransferSpec::homogeneous(ssep.clone(), l));
        out.push(TransferSpec::inhomogeneous(ssep.clone(), [rat(1, 2), rat(2, 3), rat(5, 7)][..l].to_vec()));
        out.push(TransferSpec::homogeneous(asep.clone(), l));
        out.push(TransferSpec::inhomogeneous(asep.clone(), [int(2), int(3), rat(1, 3)][..l].to_vec()));
    }
    out
}

#[test]
fn eigenvalue_formulas() {
    let xs = [rat(7, 3), rat(-5, 4), int(4)];
    for spec in lambda_specs() {
        let v = lambda_eigenvector(&spec, [&int(3), &rat(5, 2)]).unwrap();
        let ones = vec![int(1); 1 << spec.l];
        for x in &xs {
            for (vec, side) in [(&v, Side::Right), (&ones, Side::Left)] {
                let r = check_eigenpair(&spec, x, vec, side);
                assert!(r.status.is_pass(), "{} {:?} {x}: {:?}", spec.model.name(), spec.thetas, r.status);
            }
            let c = check_crossing_symmetry_t(&spec, x);
            assert!(c.status.is_pass(), "{} {:?} {x}: {:?}", spec.model.name(), spec.thetas, c.status);
        }
    }
}

#[test]
fn homogeneous_eigenvector_is_the_steady_state() {
    for spec in lambda_specs().into_iter().filter(|s| s.normalization == Normalization::HomogeneousWithTrace) {
        let pi = steady_state(&spec.model, spec.l).unwrap().probabilities();
        let r = check_eigenpair(&spec, &rat(7, 3), &pi, Side::Right);
        assert!(r.status.is_pass(), "{}: {:?}", spec.model.name(), r.status);
    }
}

#[test]
fn ssep_conjugated_identities() {
    let m = Model::ssep(rates());
    for thetas in [vec![rat(1, 2)], vec![rat(1, 2), rat(2, 3)], vec![int(0), int(0)]] {
        let spec = TransferSpec::inhomogeneous(m.clone(), thetas);
        for x in [int(3), rat(2, 5), rat(-7, 3)] {
            let reports = ssep_conjugated(&spec, &x);
            assert!(all_pass(&reports), "{reports:#?}");
        }
    }
}

#[test]
fn homogeneous_limits_match_inhomogeneous_at_identity() {
    for m in [Model::ssep(rates()), Model::asep(rates(), int(2)).unwrap()] {
        let id: Rational = m.convention().identity_point();
        let h = TransferSpec::homogeneous(m.clone(), 2);
        let i = TransferSpec::inhomogeneous(m.clone(), vec![id.clone(), id]);
        let x = rat(5, 3);
        assert_eq!(build_transfer(&h, &x).unwrap(), build_transfer(&i, &x).unwrap());
    }
}
