use proptest::prelude::*;

use louvre::circuit::build_circuit;
use louvre::code::{check_matrices, compute_k, stabilizer_support, Class, CodeSpec, QubitId, Role, Term};
use louvre::metrics::{extract_couplers, fast_metrics, metrics_report, DistanceMode};
use louvre::router::{route_multitier, validate_routing};
use louvre::schedule::{
    build_louvre7, build_louvre8, build_regular_default, Cell, Layer, Louvre7Options, Louvre8Options, Schedule, Scheme,
};
use louvre::tracker::AbsentSiteMap;
use louvre::verify::{run_tableau, verify_commutation};

fn poly_text(terms: &[(u32, u32)]) -> String {
    terms.iter().map(|&(a, b)| format!("x^{a}y^{b}")).collect::<Vec<_>>().join("+")
}

/// Random code on an l x m torus with 1..=max distinct terms per polynomial.
fn arb_code(max_side: u32, max_terms: usize) -> impl Strategy<Value = CodeSpec> {
    (2..=max_side, 2..=max_side).prop_flat_map(move |(l, m)| {
        let mono = (0..m, 0..l);
        (
            Just((l, m)),
            prop::collection::btree_set(mono.clone(), 1..=max_terms),
            prop::collection::btree_set(mono, 1..=max_terms),
        )
            .prop_map(|((l, m), a, b)| {
                let a: Vec<_> = a.into_iter().collect();
                let b: Vec<_> = b.into_iter().collect();
                CodeSpec::from_text(l, m, &poly_text(&a), &poly_text(&b)).unwrap()
            })
    })
}

fn naive_rank(mut rows: Vec<Vec<u8>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] == 1) else { continue };
        rows.swap(rank, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][c] == 1 {
                let pivot = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(pivot) {
                    *x ^= y;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn dense_checks(code: &CodeSpec, role: Role) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for j in 0..code.l {
        for i in 0..code.m {
            let mut row = vec![0u8; code.n()];
            for q in stabilizer_support(code, QubitId::new(i, j, role)).unwrap() {
                row[code.qubit_index(q)] ^= 1;
            }
            out.push(row);
        }
    }
    out
}

fn tableau_deterministic(code: &CodeSpec, s: &Schedule) -> Option<bool> {
    let circ = build_circuit(code, s, &AbsentSiteMap::none(), 2).ok()?;
    let run = run_tableau(&circ, 5);
    Some(circ.records.iter().zip(&run.deterministic).all(|(r, &d)| d || (r.round == 0 && r.class == Class::X)))
}

fn bb18() -> CodeSpec {
    CodeSpec::from_text(3, 3, "1+y+xy", "1+x+xy").unwrap()
}

fn builders(code: &CodeSpec) -> Vec<Schedule> {
    let mut v = vec![build_regular_default(code)];
    v.extend(build_louvre7(code, &Louvre7Options::default()));
    v.extend(build_louvre8(code, &Louvre8Options::default()));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn checks_are_orthogonal(code in arb_code(6, 4)) {
        let hx = dense_checks(&code, Role::X);
        let hz = dense_checks(&code, Role::Z);
        for x in &hx {
            for z in &hz {
                let overlap: u32 = x.iter().zip(z).map(|(a, b)| (a & b) as u32).sum();
                prop_assert_eq!(overlap % 2, 0);
            }
        }
        let h = check_matrices(&code);
        prop_assert!(h.hx.mul_transpose(&h.hz).is_zero());
        prop_assert_eq!(compute_k(&code), code.n() - naive_rank(hx) - naive_rank(hz));
    }

    /// The Z check at a unit is the X check of the same unit rotated by 180 degrees
    /// with L and R exchanged.
    #[test]
    fn z_support_is_rotated_x_support(code in arb_code(6, 4), i in 0u32..6, j in 0u32..6) {
        let (i, j) = (i % code.m, j % code.l);
        let rot = |q: QubitId| {
            let role = if q.role == Role::L { Role::R } else { Role::L };
            QubitId::new((2 * i + code.m - q.i) % code.m, (2 * j + code.l - q.j) % code.l, role)
        };
        let mut x: Vec<usize> = stabilizer_support(&code, QubitId::new(i, j, Role::X)).unwrap()
            .into_iter().map(|q| code.qubit_index(rot(q))).collect();
        let mut z: Vec<usize> = stabilizer_support(&code, QubitId::new(i, j, Role::Z)).unwrap()
            .into_iter().map(|q| code.qubit_index(q)).collect();
        x.sort_unstable();
        z.sort_unstable();
        prop_assert_eq!(x, z);
    }

    #[test]
    fn commutation_agrees_with_tableau(
        xs in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
        zs in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
        shift in 0usize..3,
    ) {
        let code = bb18();
        let term = |k: usize| if k < 3 { Term::a(k) } else { Term::b(k - 3) };
        let depth = 6 + shift;
        let layers: Vec<Layer> = (0..depth)
            .map(|k| Layer {
                x: xs.get(k).map(|&t| Cell::cnot(term(t))),
                z: k.checked_sub(shift).and_then(|k| zs.get(k)).map(|&t| Cell::cnot(term(t))),
                phase: 0,
            })
            .collect();
        let s = Schedule::new(Scheme::Custom, layers);
        let tab = tableau_deterministic(&code, &s);
        prop_assume!(tab.is_some());
        let (comm, _) = verify_commutation(&code, &s, &AbsentSiteMap::none()).unwrap();
        prop_assert_eq!(comm, tab.unwrap());
    }

    #[test]
    fn fast_metrics_match_site_metrics(code in arb_code(5, 4)) {
        for s in builders(&code) {
            let m = metrics_report(&extract_couplers(&s, &code).unwrap());
            let (d, l, _) = fast_metrics(&code, &s, DistanceMode::Torus);
            prop_assert_eq!((d, l), (m.avg_degree, m.avg_total_distance), "{:?}", s.scheme);
        }
    }

    #[test]
    fn tables_round_trip(code in arb_code(5, 4)) {
        for s in builders(&code) {
            let back = Schedule::from_table(&s.to_table()).unwrap();
            prop_assert_eq!(&back.layers, &s.layers);
            prop_assert_eq!(&back.init, &s.init);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn routing_is_deterministic_and_valid(code in arb_code(4, 3), seed in 0u64..1000) {
        for s in builders(&code) {
            let g = extract_couplers(&s, &code).unwrap();
            let a = route_multitier(&g, seed).unwrap();
            let b = route_multitier(&g, seed).unwrap();
            prop_assert!(validate_routing(&g, &a));
            prop_assert_eq!(&a.report, &b.report);
            prop_assert_eq!(a.paths, b.paths);
        }
    }
}
