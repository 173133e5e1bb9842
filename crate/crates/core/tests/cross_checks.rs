use nwkernel::io::{format_gram_csv, parse_histograms, parse_matrix_csv};
use nwkernel::northwest::nw_kernel_eval;
use nwkernel::testing::oracles::{normalized_permutation_sum, symmetrization_oracle};
use nwkernel::{
    build_gram, certify_psd, count_tables, enumerate_tables, nw_permuted, weighted_volume,
    EnumerationBudget, Histogram, KernelSpec, PermutationSet, WeightSpec,
};

fn h(v: &[u64]) -> Histogram {
    Histogram::new(v.to_vec()).unwrap()
}

fn banded(d: usize) -> WeightSpec {
    let k = (0..d * d)
        .map(|p| {
            let gap = (p / d).abs_diff(p % d) as f64;
            (-0.5 * gap * gap).exp()
        })
        .collect();
    WeightSpec::from_weight(d, k).unwrap()
}

#[test]
fn symmetrized_gram_matches_volume_gram() {
    let hs = vec![h(&[2, 1, 1]), h(&[0, 4, 0]), h(&[1, 1, 2]), h(&[3, 0, 1])];
    let w = banded(3);
    let oracle = symmetrization_oracle(&hs, &w).unwrap();
    let volume = build_gram(
        &hs,
        &KernelSpec::Volume {
            weights: w,
            budget: EnumerationBudget::default(),
        },
    )
    .unwrap();
    for (a, b) in oracle.values().iter().zip(volume.values()) {
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
    }
    assert!(certify_psd(&oracle, 1e-8).unwrap().passed());
}

#[test]
fn normalized_sum_is_weighted_volume() {
    let w = banded(3);
    for (r, c) in [
        (h(&[3, 2, 1]), h(&[1, 2, 3])),
        (h(&[0, 5, 0]), h(&[2, 2, 1])),
        (h(&[1, 0, 0]), h(&[0, 0, 1])),
    ] {
        let s = normalized_permutation_sum(&r, &c, &w).unwrap();
        let t = weighted_volume(&r, &c, &w, EnumerationBudget::default()).unwrap();
        assert!((s - t).abs() <= 1e-12 * t, "{s} vs {t}");
    }
}

#[test]
fn nw_kernel_terms_are_polytope_vertices_in_the_enumeration() {
    let r = h(&[2, 0, 3, 1]);
    let c = h(&[1, 1, 1, 3]);
    let tables: Vec<_> = enumerate_tables(&r, &c, EnumerationBudget::default())
        .unwrap()
        .map(Result::unwrap)
        .collect();
    let set = PermutationSet::exhaustive(4).unwrap();
    for s in set.perms() {
        for sp in set.perms() {
            let x = nw_permuted(&r, &c, s, sp).unwrap();
            assert!(tables.contains(&x), "{x}");
        }
    }
    assert_eq!(
        tables.len() as u64,
        u64::try_from(count_tables(&r, &c).unwrap()).unwrap()
    );
}

#[test]
fn nw_kernel_with_unit_weights_counts_pairs() {
    let r = h(&[4, 1, 0, 2, 3]);
    let c = h(&[2, 2, 2, 2, 2]);
    let set = PermutationSet::sample(5, 6, 11).unwrap();
    let ones = WeightSpec::ones(5);
    let raw = nw_kernel_eval(&r, &c, &ones, &set, false).unwrap();
    assert_eq!(raw.summands, 36);
    assert!((raw.value - 36.0).abs() < 1e-12);
    let normalized = nw_kernel_eval(&r, &c, &ones, &set, true).unwrap();
    assert!((normalized.value - 1.0).abs() < 1e-12);
}

#[test]
fn gram_csv_round_trips_exactly() {
    let records = parse_histograms("# four bins\n[1,2,0,3]\n0,0,6,0\n2 2 1 1\n").unwrap();
    assert_eq!(records.lines, vec![2, 3, 4]);
    let gram = build_gram(
        &records.histograms,
        &KernelSpec::Nw {
            weights: banded(4),
            perms: PermutationSet::sample(4, 5, 3).unwrap(),
            normalize: false,
        },
    )
    .unwrap();
    let (n, values) = parse_matrix_csv(&format_gram_csv(&gram)).unwrap();
    assert_eq!(n, 3);
    assert_eq!(values, gram.values());
}
