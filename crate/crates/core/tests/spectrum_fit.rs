//! Finite spectra against the symbol distribution, with reference distances
//! from an independent run stored in `fixtures/ks_reference.toml`.

use bosonic_memory::spectra::finite_spectrum_fit;
use serde::Deserialize;

#[derive(Deserialize)]
struct Fixture {
    match_tolerance: f64,
    case: Vec<Case>,
}

#[derive(Deserialize)]
struct Case {
    mu: f64,
    kappa: f64,
    trim: usize,
    n: Vec<usize>,
    reference: Vec<f64>,
    max_at_last: f64,
}

fn fixture() -> Fixture {
    let text = include_str!("fixtures/ks_reference.toml");
    toml::from_str(text).expect("fixture parses")
}

#[test]
fn distances_match_reference() {
    let fx = fixture();
    for case in &fx.case {
        let rep = finite_spectrum_fit(case.mu, case.kappa, &case.n, Some(case.trim)).unwrap();
        for (row, want) in rep.rows.iter().zip(&case.reference) {
            assert_eq!(row.trimmed_count, case.trim);
            assert!(
                (row.ks_distance - want).abs() <= fx.match_tolerance,
                "({}, {}) n = {}: {} vs {want}",
                case.mu,
                case.kappa,
                row.n,
                row.ks_distance
            );
        }
        let last = rep.rows.last().unwrap().ks_distance;
        assert!(last < case.max_at_last);
        assert!(rep.is_non_increasing(fx.match_tolerance));
    }
}

#[test]
fn memoryless_fit_is_exact() {
    let rep = finite_spectrum_fit(0.0, 0.3, &[5, 50, 100], None).unwrap();
    assert!(rep.rows.iter().all(|r| r.ks_distance == 0.0 && r.trimmed_count == 0));
}

#[test]
fn below_threshold_large_n() {
    let rep = finite_spectrum_fit(0.5, 0.5, &[200], None).unwrap();
    assert!(rep.rows[0].ks_distance < 0.05);
}

#[test]
fn rejects_unsorted_schedule() {
    assert!(finite_spectrum_fit(0.5, 0.5, &[100, 50], None).is_err());
}
