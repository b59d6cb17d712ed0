use std::time::Duration;

use louvre::code::CodeSpec;
use louvre::metrics::{extract_couplers, fmt_ratio, metrics_report, Rational};
use louvre::optimize::{optimize_ordering, SearchBudget};
use louvre::schedule::Scheme;

fn lacross() -> CodeSpec {
    CodeSpec::from_text(6, 6, "1+y+y^2", "1+x+x^2").unwrap()
}

fn bb72() -> CodeSpec {
    CodeSpec::from_text(6, 6, "y+y^2+x^3", "y^3+x+x^2").unwrap()
}

fn budget() -> SearchBudget {
    SearchBudget { max_evaluations: 2_000_000, time_limit: Duration::from_secs(60) }
}

#[test]
fn lacross_l7r_reaches_grid_topology() {
    let code = lacross();
    let r = optimize_ordering(&code, Scheme::Louvre7R, &budget(), 1).unwrap();
    println!("{}", r.schedule.to_table());
    assert!(r.exhaustive);
    assert_eq!((r.avg_degree, r.avg_total_distance), (Rational::new(7, 2), Rational::new(7, 2)));
    let g = extract_couplers(&r.schedule, &code).unwrap();
    assert!(g.couplers.iter().all(|c| c.length == 1));
    assert_eq!(metrics_report(&g).avg_total_distance, Rational::new(7, 2));
}

#[test]
fn bb72_routed_orderings() {
    let code = bb72();
    for (scheme, bound) in [(Scheme::Louvre7R, Rational::new(27, 2)), (Scheme::Louvre8R, Rational::new(21, 2))] {
        let r = optimize_ordering(&code, scheme, &budget(), 1).unwrap();
        println!("{} {} {} evals={} {}ms\n{}", scheme.label(), fmt_ratio(r.avg_degree), fmt_ratio(r.avg_total_distance), r.evaluations, r.elapsed_ms, r.schedule.to_table());
        assert!(r.avg_total_distance <= bound);
    }
}

#[test]
fn search_is_deterministic() {
    let code = lacross();
    let a = optimize_ordering(&code, Scheme::CxSwapOnly, &budget(), 7).unwrap();
    let b = optimize_ordering(&code, Scheme::CxSwapOnly, &budget(), 7).unwrap();
    assert_eq!(a.schedule, b.schedule);
    println!("cx-only {} {}\n{}", fmt_ratio(a.avg_degree), fmt_ratio(a.avg_total_distance), a.schedule.to_table());
}

#[test]
fn local_search_beyond_budget_still_verifies() {
    let code = bb72();
    let small = SearchBudget { max_evaluations: 4_000, time_limit: Duration::from_secs(20) };
    let r = optimize_ordering(&code, Scheme::Louvre7R, &small, 3).unwrap();
    assert!(!r.exhaustive);
    assert!(r.evaluations <= 4_000);
}

#[test]
fn non_routed_scheme_is_rejected() {
    assert!(optimize_ordering(&lacross(), Scheme::Louvre7, &budget(), 0).is_err());
}
