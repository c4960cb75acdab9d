use housealloc::matching::{has_perfect_matching, max_weight_perfect_matching, WeightedBipartiteGraph};
use num_rational::Ratio;
use proptest::prelude::*;

/// Lexicographically first maximum over all permutations, by enumeration in
/// lexicographic order.
fn brute_force(cells: &[Vec<Option<i64>>]) -> Option<(i64, Vec<usize>)> {
    fn go(
        row: usize,
        cells: &[Vec<Option<i64>>],
        used: &mut [bool],
        current: &mut Vec<usize>,
        acc: i64,
        best: &mut Option<(i64, Vec<usize>)>,
    ) {
        let n = cells.len();
        if row == n {
            if best.as_ref().is_none_or(|(w, _)| acc > *w) {
                *best = Some((acc, current.clone()));
            }
            return;
        }
        for col in 0..n {
            if used[col] {
                continue;
            }
            if let Some(w) = cells[row][col] {
                used[col] = true;
                current.push(col);
                go(row + 1, cells, used, current, acc + w, best);
                current.pop();
                used[col] = false;
            }
        }
    }
    let mut best = None;
    go(0, cells, &mut vec![false; cells.len()], &mut Vec::new(), 0, &mut best);
    best
}

fn graph_strategy() -> impl Strategy<Value = Vec<Vec<Option<i64>>>> {
    (0usize..=8, 0.3f64..=1.0).prop_flat_map(|(n, density)| {
        let cell = prop::option::weighted(density, 0i64..=1);
        proptest::collection::vec(proptest::collection::vec(cell, n), n)
    })
}

fn build<W: housealloc::matching::Weight>(cells: &[Vec<Option<i64>>], f: impl Fn(i64) -> W) -> WeightedBipartiteGraph<W> {
    let n = cells.len();
    let mut g = WeightedBipartiteGraph::new(n, n);
    for (l, row) in cells.iter().enumerate() {
        for (r, c) in row.iter().enumerate() {
            if let Some(w) = c {
                g.set_edge(l, r, f(*w)).unwrap();
            }
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn solver_matches_enumeration(cells in graph_strategy()) {
        let g = build(&cells, |w| w);
        let got = max_weight_perfect_matching(&g).unwrap();
        let expected = brute_force(&cells);
        prop_assert_eq!(has_perfect_matching(&g).unwrap(), expected.is_some());
        match (got, expected) {
            (None, None) => {}
            (Some(m), Some((w, assignment))) => {
                prop_assert_eq!(m.weight(), w);
                prop_assert_eq!(m.assignment(), assignment.as_slice());
            }
            (got, expected) => prop_assert!(false, "solver {:?} vs enumeration {:?}", got, expected),
        }
    }

    #[test]
    fn scalar_types_agree(cells in graph_strategy()) {
        let int = max_weight_perfect_matching(&build(&cells, |w| w)).unwrap();
        let float = max_weight_perfect_matching(&build(&cells, |w| w as f64)).unwrap();
        let exact = max_weight_perfect_matching(&build(&cells, Ratio::from_integer)).unwrap();
        prop_assert_eq!(int.as_ref().map(|m| m.assignment().to_vec()), float.as_ref().map(|m| m.assignment().to_vec()));
        prop_assert_eq!(int.as_ref().map(|m| m.assignment().to_vec()), exact.as_ref().map(|m| m.assignment().to_vec()));
        if let (Some(a), Some(b)) = (&int, &float) {
            prop_assert_eq!(a.weight() as f64, b.weight());
        }
    }

    #[test]
    fn removal_never_raises_optimum_and_restore_is_exact(cells in graph_strategy(), pick in any::<prop::sample::Index>()) {
        let mut g = build(&cells, |w| w);
        let n = cells.len();
        prop_assume!(n > 0);
        let before = max_weight_perfect_matching(&g).unwrap();
        let snapshot = g.clone();
        let delta = g.remove_zero_edges(pick.index(n)).unwrap();
        let after = max_weight_perfect_matching(&g).unwrap();
        if let Some(a) = &after {
            let b = before.as_ref().expect("removal cannot create a perfect matching");
            prop_assert!(a.weight() <= b.weight());
        }
        g.restore(&delta);
        prop_assert_eq!(&g, &snapshot);
        prop_assert_eq!(max_weight_perfect_matching(&g).unwrap(), before);
    }

    #[test]
    fn solver_is_deterministic(cells in graph_strategy()) {
        let a = max_weight_perfect_matching(&build(&cells, |w| w)).unwrap();
        let b = max_weight_perfect_matching(&build(&cells, |w| w)).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn wider_weights_match_enumeration() {
    // Integer weights in -3..=5 on a fixed pseudo-random pattern.
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for _ in 0..200 {
        let n = (next() % 7) as usize;
        let cells: Vec<Vec<Option<i64>>> = (0..n)
            .map(|_| {
                (0..n)
                    .map(|_| if next() % 5 == 0 { None } else { Some((next() % 9) as i64 - 3) })
                    .collect()
            })
            .collect();
        let got = max_weight_perfect_matching(&build(&cells, |w| w)).unwrap();
        let expected = brute_force(&cells);
        assert_eq!(got.map(|m| (m.weight(), m.assignment().to_vec())), expected);
    }
}
