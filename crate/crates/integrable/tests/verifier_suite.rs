use exclusion_core::{int, rat};
use exclusion_integrable::verifier::{run_suite, sample_points, Status};
use exclusion_integrable::{Model, Rates};

fn models() -> Vec<Model> {
    let r = Rates::new(rat(1, 2), rat(2, 3), rat(1, 5), rat(1, 7));
    vec![
        Model::asep(r.clone(), rat(1, 3)).unwrap(),
        Model::tasep(rat(1, 2), rat(2, 3)),
        Model::ssep(r.clone()),
        Model::rd(r, int(3)).unwrap(),
    ]
}

#[test]
fn no_identity_fails_at_sampled_points() {
    for m in models() {
        let pts = sample_points(&m, 11, 4).unwrap();
        let reports = run_suite(&m, &pts);
        let failures: Vec<_> = reports.iter().filter(|r| r.status.is_fail()).collect();
        assert!(failures.is_empty(), "{}: {failures:#?}", m.name());
        let passed = reports.iter().filter(|r| r.status == Status::Pass).count();
        assert!(passed > reports.len() / 2, "{}: only {passed} of {} passed", m.name(), reports.len());
    }
}
