//! Independent index-contraction oracles for the partial trace and the Born
//! rule, compared against the library on random systems of dimension ≤ 64.

use epr_core::linalg::{hermitian_eigenvalues, partial_trace};
use epr_core::quantum::{born_probability, projector, SpinEvent};
use epr_core::{ComplexMatrix, MeasurementAxis, Outcome, QuantumSystem, SubsystemLayout, C64};
use proptest::prelude::*;

fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for p in (0..dims.len()).rev() {
        out[p] = index % dims[p];
        index /= dims[p];
    }
    out
}

/// Straight summation over all (row, col) pairs of the full matrix:
/// `out[k_i, k_j] += ρ[i, j]` whenever the traced digits of `i` and `j` agree.
fn naive_partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Vec<Vec<C64>> {
    let total: usize = dims.iter().product();
    let kdim: usize = keep.iter().map(|&p| dims[p]).product();
    let mut out = vec![vec![C64::new(0.0, 0.0); kdim]; kdim];
    let all: Vec<Vec<usize>> = (0..total).map(|i| digits(i, dims)).collect();
    for i in 0..total {
        for j in 0..total {
            let (di, dj) = (&all[i], &all[j]);
            let traced_equal = (0..dims.len())
                .filter(|p| !keep.contains(p))
                .all(|p| di[p] == dj[p]);
            if !traced_equal {
                continue;
            }
            let ki = keep.iter().fold(0, |acc, &p| acc * dims[p] + di[p]);
            let kj = keep.iter().fold(0, |acc, &p| acc * dims[p] + dj[p]);
            out[ki][kj] += rho[(i, j)];
        }
    }
    out
}

/// `Σ_ij ρ_ij Π_ji` with `Π` built entry by entry from the factor projectors.
fn naive_born(
    rho: &ComplexMatrix,
    dims: &[usize],
    events: &[(usize, MeasurementAxis, Outcome)],
) -> f64 {
    let total: usize = dims.iter().product();
    let projectors: Vec<_> = events
        .iter()
        .map(|(p, a, o)| (*p, projector(a, *o)))
        .collect();
    let mut sum = C64::new(0.0, 0.0);
    let all: Vec<Vec<usize>> = (0..total).map(|i| digits(i, dims)).collect();
    for i in 0..total {
        for j in 0..total {
            let (di, dj) = (&all[i], &all[j]);
            let mut entry = C64::new(1.0, 0.0);
            for p in 0..dims.len() {
                match projectors.iter().find(|(q, _)| *q == p) {
                    Some((_, proj)) => entry *= proj[(dj[p], di[p])],
                    None if dj[p] != di[p] => entry = C64::new(0.0, 0.0),
                    None => {}
                }
            }
            sum += rho[(i, j)] * entry;
        }
    }
    sum.re
}

fn random_density(dim: usize, entries: &[f64]) -> ComplexMatrix {
    let g = ComplexMatrix::new(
        dim,
        dim,
        entries.chunks(2).map(|c| C64::new(c[0], c[1])).collect(),
    )
    .unwrap();
    // The identity shift keeps an all-zero draw a valid state.
    let rho = g
        .matmul(&g.dagger())
        .unwrap()
        .add(&ComplexMatrix::identity(dim).scale(C64::new(1e-3, 0.0)))
        .unwrap();
    let tr = rho.trace().re;
    rho.scale(C64::new(1.0 / tr, 0.0))
}

fn label(p: usize) -> String {
    format!("f{p}")
}

prop_compose! {
    fn system(max_dim: usize, factor_dims: std::ops::RangeInclusive<usize>)
        (dims in prop::collection::vec(factor_dims, 1..=4)
            .prop_filter("total dimension cap", move |d| d.iter().product::<usize>() <= max_dim))
        (entries in prop::collection::vec(-1.0..1.0f64, 2 * dims.iter().product::<usize>().pow(2)),
         keep_mask in prop::collection::vec(any::<bool>(), dims.len()),
         dims in Just(dims))
        -> (Vec<usize>, ComplexMatrix, Vec<bool>)
    {
        let total = dims.iter().product();
        (dims, random_density(total, &entries), keep_mask)
    }
}

fn layout(dims: &[usize]) -> SubsystemLayout {
    SubsystemLayout::new(dims.iter().enumerate().map(|(p, &d)| (label(p), d))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn partial_trace_matches_naive_contraction((dims, rho, mask) in system(64, 1..=4)) {
        let mut keep: Vec<usize> = (0..dims.len()).filter(|&p| mask[p]).collect();
        if keep.is_empty() {
            keep.push(0);
        }
        let labels: Vec<String> = keep.iter().map(|&p| label(p)).collect();
        let got = partial_trace(&rho, &layout(&dims), &labels).unwrap();
        let want = naive_partial_trace(&rho, &dims, &keep);
        for (r, row) in want.iter().enumerate() {
            for (c, w) in row.iter().enumerate() {
                prop_assert!((got[(r, c)] - w).norm() <= 1e-12);
            }
        }
        prop_assert!((got.trace() - rho.trace()).norm() <= 1e-10);
        prop_assert!(got.is_hermitian(1e-10));
        prop_assert!(hermitian_eigenvalues(&got).unwrap()[0] >= -1e-10);
    }

    #[test]
    fn born_matches_naive_contraction(
        (dims, rho, mask) in system(64, 2..=3),
        angles in prop::collection::vec((0.0..=std::f64::consts::PI, 0.0..std::f64::consts::TAU, any::<bool>()), 4),
    ) {
        let events: Vec<(usize, MeasurementAxis, Outcome)> = (0..dims.len())
            .filter(|&p| mask[p] && dims[p] == 2)
            .map(|p| {
                let (t, f, up) = angles[p];
                (p, MeasurementAxis::new(t, f).unwrap(), if up { Outcome::Up } else { Outcome::Down })
            })
            .collect();
        let sys = QuantumSystem::mixed(layout(&dims), rho.clone()).unwrap();
        let spin_events: Vec<SpinEvent> = events.iter().map(|(p, a, o)| SpinEvent::new(label(*p), *a, *o)).collect();
        let got = born_probability(&sys, &spin_events).unwrap();
        prop_assert!((got - naive_born(&rho, &dims, &events)).abs() <= 1e-12);
    }

    #[test]
    fn two_step_trace_equals_one_shot((_, rho, _) in system(8, 2..=2).prop_filter("three qubits", |(d, _, _)| d.len() == 3)) {
        let l = layout(&[2, 2, 2]);
        let one_shot = partial_trace(&rho, &l, &["f1"]).unwrap();
        let step = partial_trace(&rho, &l, &["f1", "f2"]).unwrap();
        let two_step = partial_trace(&step, &l.retain(&["f1", "f2"]).unwrap(), &["f1"]).unwrap();
        prop_assert!(one_shot.approx_eq(&two_step, 1e-12));
    }

    #[test]
    fn kron_is_associative_and_multiplies_traces(
        a in prop::collection::vec(-1.0..1.0f64, 8),
        b in prop::collection::vec(-1.0..1.0f64, 18),
        c in prop::collection::vec(-1.0..1.0f64, 8),
    ) {
        let a = random_density(2, &a).scale(C64::new(1.7, 0.0));
        let b = random_density(3, &b).scale(C64::new(0.3, 0.0));
        let c = random_density(2, &c);
        let left = a.kron(&b).unwrap().kron(&c).unwrap();
        let right = a.kron(&b.kron(&c).unwrap()).unwrap();
        prop_assert!(left.approx_eq(&right, 1e-15));
        let t = a.kron(&b).unwrap().trace();
        prop_assert!((t - a.trace() * b.trace()).norm() <= 1e-12);
        prop_assert_eq!(a.dagger().dagger(), a);
    }

    #[test]
    fn kron_is_exactly_associative_on_dyadic_entries(
        a in prop::collection::vec(-8i32..=8, 8),
        b in prop::collection::vec(-8i32..=8, 18),
        c in prop::collection::vec(-8i32..=8, 8),
    ) {
        // Multiples of 1/8 multiply without rounding, so grouping cannot matter.
        let m = |rows: usize, cols: usize, v: &[i32]| {
            ComplexMatrix::new(rows, cols, v.chunks(2).map(|p| C64::new(p[0] as f64 / 8.0, p[1] as f64 / 8.0)).collect()).unwrap()
        };
        let (a, b, c) = (m(2, 2, &a), m(3, 3, &b), m(2, 2, &c));
        prop_assert_eq!(a.kron(&b).unwrap().kron(&c).unwrap(), a.kron(&b.kron(&c).unwrap()).unwrap());
    }
}
