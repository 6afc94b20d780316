use num_bigint::BigUint;
use proptest::prelude::*;
use qgamebound::symcomb::*;

fn big(x: usize) -> BigUint {
    BigUint::from(x)
}

#[test]
fn partitions_of_small_numbers() {
    let counts: Vec<usize> = (0..=8).map(|n| partitions(n, n.max(1)).len()).collect();
    assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15, 22]);
    assert_eq!(partitions(4, 2).len(), 3);
    assert_eq!(Partition::new(vec![2, 0]).unwrap().parts(), &[2]);
    assert!(Partition::new(vec![1, 3]).is_err());
    let p = Partition::new(vec![3, 1]).unwrap();
    assert_eq!(p.conjugate(), vec![2, 1, 1]);
}

#[test]
fn hook_lengths_and_dimensions() {
    let p = Partition::new(vec![3, 1]).unwrap();
    assert_eq!(p.hook(0, 0), 4);
    assert_eq!(specht_dim(&p), big(3));
    assert_eq!(schur_dim(&p, 2), big(3));
    assert_eq!(schur_dim(&Partition::new(vec![1, 1, 1]).unwrap(), 2), big(0));
}

#[test]
fn multinomials_and_binomials() {
    assert_eq!(multinomial(4, &TypeVector::new(vec![2, 1, 1])).unwrap(), big(12));
    assert!(multinomial(5, &TypeVector::new(vec![2, 1, 1])).is_err());
    assert_eq!(binomial(10, 3), big(120));
    assert_eq!(binomial(3, 5), big(0));
    assert_eq!(factorial(6), big(720));
}

#[test]
fn contingency_tables_for_small_margins() {
    let t = TypeVector::new(vec![1, 1]);
    let tabs = contingency_tables(&t, &t).unwrap();
    assert_eq!(tabs.len(), 2);
    assert!(contingency_tables(&t, &TypeVector::new(vec![3, 0])).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Σ_λ f_λ² = n! and Σ_λ f_λ · s_λ(d) = dⁿ (Schur–Weyl).
    #[test]
    fn schur_weyl_dimension_counts(n in 1usize..=6, d in 1usize..=3) {
        let all = partitions(n, n);
        let sq: BigUint = all.iter().map(|l| specht_dim(l) * specht_dim(l)).sum();
        prop_assert_eq!(sq, factorial(n));
        let sw: BigUint = partitions(n, d).iter().map(|l| specht_dim(l) * schur_dim(l, d)).sum();
        prop_assert_eq!(sw, big(d.pow(n as u32)));
        for l in &all {
            prop_assert_eq!(big(semistandard_tableaux(l, d).len()), schur_dim(l, d));
        }
    }

    #[test]
    fn types_partition_all_strings(n in 0usize..=5, d in 1usize..=3) {
        let ts = types(n, d);
        prop_assert_eq!(big(ts.len()), binomial(n + d - 1, n));
        let total: BigUint = ts.iter().map(|t| multinomial(n, t).unwrap()).sum();
        prop_assert_eq!(total, big(d.pow(n as u32)));
        for (i, t) in ts.iter().enumerate() {
            prop_assert_eq!(type_index(&ts, t), Some(i));
            prop_assert_eq!(&TypeVector::of_string(&t.canonical_string(), d), t);
        }
    }

    #[test]
    fn orbits_cover_all_pairs(n in 1usize..=4, d in 1usize..=3) {
        let reps = orbit_representatives(n, d);
        let total: BigUint = reps.iter().map(|m| m.orbit_size()).sum();
        prop_assert_eq!(total, big(d.pow(2 * n as u32)));
        for m in &reps {
            let (a, b) = m.representative();
            prop_assert_eq!(&FrequencyMatrix::of_pair(&a, &b, d), m);
            prop_assert_eq!(orbit_index(&reps, &m.transpose()).is_some(), true);
            prop_assert_eq!(m.n(), n);
        }
    }

    #[test]
    fn contingency_tables_have_the_margins(n in 1usize..=4, d in 1usize..=3, i in 0usize..100, j in 0usize..100) {
        let ts = types(n, d);
        let (t, tp) = (&ts[i % ts.len()], &ts[j % ts.len()]);
        let tabs = contingency_tables(t, tp).unwrap();
        prop_assert!(!tabs.is_empty());
        let mut sizes = BigUint::from(0u32);
        for m in &tabs {
            prop_assert_eq!(&m.row_sums(), t);
            prop_assert_eq!(&m.col_sums(), tp);
            sizes += m.orbit_size();
        }
        // every pair (a, b) with types (t, tp) lies in exactly one table's orbit
        prop_assert_eq!(sizes, multinomial(n, t).unwrap() * multinomial(n, tp).unwrap());
    }

    #[test]
    fn distinct_permutations_count(items in prop::collection::vec(0usize..3, 0..6)) {
        let perms = distinct_permutations(&items);
        let d = 3;
        let t = TypeVector::of_string(&items, d);
        prop_assert_eq!(big(perms.len()), multinomial(items.len(), &t).unwrap());
    }
}
