//! Randomized property checks for the linear-algebra core and the
//! enumerator transforms.

use proptest::prelude::*;
use std::collections::HashSet;

use triortho::analysis::{enumerator, macwilliams};
use triortho::gf2::{solve_affine, span_enumerate, BitMatrix, BitVec};
use triortho::ortho::{generate_gk, TriorthogonalMatrix};

fn arb_matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Vec<Vec<bool>>> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r)
    })
}

fn to_bitmatrix(rows: &[Vec<bool>]) -> BitMatrix {
    BitMatrix::from_rows(
        rows.iter()
            .map(|r| BitVec::from_bits(r.len(), r.iter().copied()))
            .collect(),
    )
}

proptest! {
    #[test]
    fn inner_product_symmetry_and_self_weight(
        bits in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..120)
    ) {
        let n = bits.len();
        let u = BitVec::from_bits(n, bits.iter().map(|b| b.0));
        let v = BitVec::from_bits(n, bits.iter().map(|b| b.1));
        prop_assert_eq!(u.inner(&v), v.inner(&u));
        prop_assert_eq!(u.inner(&u), u.weight() % 2 == 1);
    }

    #[test]
    fn rank_plus_nullity_is_column_count(rows in arb_matrix(8, 20)) {
        let m = to_bitmatrix(&rows);
        let ns = m.nullspace();
        prop_assert_eq!(m.rank() + ns.row_count(), m.col_count());
        for v in ns.rows() {
            prop_assert!(m.mul_vec(v).is_zero());
        }
    }

    #[test]
    fn affine_solutions_satisfy_their_system(
        rows in arb_matrix(6, 10),
        rhs_bits in proptest::collection::vec(any::<bool>(), 6),
        coeff_bits in proptest::collection::vec(any::<bool>(), 10),
    ) {
        let a = to_bitmatrix(&rows);
        let b = BitVec::from_bits(a.row_count(), rhs_bits.into_iter().take(a.row_count()));
        if let Some(solution) = solve_affine(&a, &b) {
            let dim = solution.dimension();
            let coeffs = BitVec::from_bits(dim, coeff_bits.into_iter().take(dim));
            let x = solution.member(&coeffs);
            prop_assert_eq!(a.mul_vec(&x), b);
        }
    }

    #[test]
    fn span_visits_two_to_the_rank_distinct_vectors(rows in arb_matrix(6, 16)) {
        let m = to_bitmatrix(&rows);
        let mut seen = HashSet::new();
        let count = span_enumerate(&m, 16, |v| {
            seen.insert(v.clone());
        })
        .unwrap();
        prop_assert_eq!(count, 1u64 << m.rank());
        prop_assert_eq!(seen.len() as u64, count);
    }

    #[test]
    fn macwilliams_matches_direct_dual_enumeration(rows in arb_matrix(4, 12)) {
        let m = to_bitmatrix(&rows);
        let primal = enumerator(&m).unwrap();
        let transformed = macwilliams(&primal, m.col_count(), primal.total()).unwrap();
        let direct = enumerator(&m.nullspace()).unwrap();
        prop_assert_eq!(&transformed, &direct);
        let back = macwilliams(&transformed, m.col_count(), transformed.total()).unwrap();
        prop_assert_eq!(back, primal);
    }

    #[test]
    fn duplicated_column_pairs_preserve_triorthogonality(
        k_half in 0usize..5,
        column_selector in any::<u64>(),
    ) {
        let k = 2 * k_half;
        let g = generate_gk(k).unwrap();
        let n = g.n();
        let j = (column_selector % n as u64) as usize;
        let extended = BitMatrix::from_rows(
            g.matrix()
                .rows()
                .map(|row| {
                    let mut bits: Vec<bool> = (0..n).map(|c| row.get(c)).collect();
                    bits.push(row.get(j));
                    bits.push(row.get(j));
                    BitVec::from_bits(n + 2, bits)
                })
                .collect(),
        );
        prop_assert!(TriorthogonalMatrix::new(extended).is_ok());
    }
}
