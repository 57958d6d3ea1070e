mod common;

use std::collections::BTreeSet;

use common::*;
use kanon::*;
use proptest::prelude::*;

fn value_tuples(ds: &Dataset, p: &Partition) -> Vec<Vec<String>> {
    let mut clusters: Vec<Vec<String>> = p
        .clusters()
        .iter()
        .map(|c| {
            let mut rows: Vec<String> = c
                .members()
                .iter()
                .map(|&id| {
                    ds.record(id)
                        .unwrap()
                        .values
                        .iter()
                        .map(ToString::to_string)
                        .collect::<Vec<_>>()
                        .join("|")
                })
                .collect();
            rows.sort();
            rows
        })
        .collect();
    clusters.sort();
    clusters
}

fn assert_covers(p: &Partition, n: usize) {
    let mut all: Vec<usize> = p.blocks().concat();
    all.sort();
    assert_eq!(all, (0..n).collect::<Vec<_>>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn global_ranges_bound_every_value(rows in rows_strategy(40, 6)) {
        let ds = dataset(&rows);
        let range = ds.global_range("Age").unwrap();
        prop_assert!(range.min <= range.max);
        for &(age, ..) in &rows {
            prop_assert!(range.contains(age as f64));
        }
    }

    #[test]
    fn sort_view_is_a_stable_permutation(rows in rows_strategy(40, 6)) {
        let ds = dataset(&rows);
        let view = ds.sort_view("Age").unwrap();
        prop_assert_eq!(&view, &ds.sort_view("Age").unwrap());
        let mut sorted = view.clone();
        sorted.sort();
        prop_assert_eq!(sorted, (0..rows.len()).collect::<Vec<_>>());
        for pair in view.windows(2) {
            prop_assert!(rows[pair[0]].0 <= rows[pair[1]].0);
        }
    }

    #[test]
    fn merge_monotonicity(rows in rows_strategy(16, 6), split in any::<prop::sample::Index>(), mask in any::<u32>()) {
        prop_assume!(rows.len() >= 2);
        let ds = dataset(&rows);
        let n = rows.len();
        let cut = 1 + split.index(n - 1);
        let mut ids: Vec<usize> = (0..n).collect();
        // Shuffle deterministically by a mask so the two sides are arbitrary subsets.
        ids.sort_by_key(|&i| (mask.rotate_left(i as u32) & 1, i));
        let (a, b) = ids.split_at(cut);
        for trees in [always(), need_based()] {
            let ca = Cluster::from_members(&ds, a.to_vec()).unwrap();
            let cb = Cluster::from_members(&ds, b.to_vec()).unwrap();
            let cab = Cluster::from_members(&ds, ids.clone()).unwrap();
            let la = cluster_il_canonical(&ca, &ds, &trees).unwrap();
            let lb = cluster_il_canonical(&cb, &ds, &trees).unwrap();
            let lab = cluster_il_canonical(&cab, &ds, &trees).unwrap();
            prop_assert!(lab + 1e-9 >= la + lb, "{lab} < {la} + {lb}");
            prop_assert!(lab <= n as f64 * 3.0 + 1e-9);
        }
    }

    #[test]
    fn report_total_matches_parts(rows in rows_strategy(40, 6)) {
        let ds = dataset(&rows);
        let cfg = EngineConfig::new(2, "Age");
        let p = propose_clusters(&ds, &cfg).unwrap();
        for report in [
            total_il_canonical(&p, &ds, &always()).unwrap(),
            total_il_legacy(&p, &ds, "Age").unwrap(),
        ] {
            let sum: f64 = report.per_cluster.iter().map(|c| c.loss).sum();
            prop_assert!((sum - report.total).abs() <= 1e-9);
            prop_assert!(report.per_cluster.iter().all(|c| c.loss >= 0.0));
        }
    }

    #[test]
    fn canonical_ignores_cluster_order(rows in rows_strategy(30, 6)) {
        let ds = dataset(&rows);
        let p = propose_clusters(&ds, &EngineConfig::new(2, "Age")).unwrap();
        let mut blocks = p.blocks();
        blocks.reverse();
        let reversed = Partition::from_blocks(&ds, blocks).unwrap();
        let a = total_il_canonical(&p, &ds, &always()).unwrap().total;
        let b = total_il_canonical(&reversed, &ds, &always()).unwrap().total;
        prop_assert!((a - b).abs() <= 1e-9);
    }

    #[test]
    fn proposed_partition_properties(rows in rows_strategy(40, 6)) {
        let ds = dataset(&rows);
        let p = propose_clusters(&ds, &EngineConfig::new(2, "Age")).unwrap();
        assert_covers(&p, rows.len());
        let distinct: BTreeSet<usize> = rows.iter().map(|r| r.3).collect();
        prop_assert_eq!(p.len(), distinct.len());
        for c in p.clusters() {
            let values: BTreeSet<usize> = c.members().iter().map(|&id| rows[id].3).collect();
            prop_assert_eq!(values.len(), 1);
        }
        let mins: Vec<f64> = p.clusters().iter().map(|c| c.numeric_range("Age").unwrap().min).collect();
        prop_assert!(mins.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn proposed_is_permutation_invariant(rows in rows_strategy(30, 6), seed in any::<u64>()) {
        let mut shuffled = rows.clone();
        let len = shuffled.len();
        let mut state = seed;
        for i in (1..len).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (state >> 33) as usize % (i + 1));
        }
        let cfg = EngineConfig::new(3, "Age");
        let (a, b) = (dataset(&rows), dataset(&shuffled));
        let pa = propose_clusters(&a, &cfg).unwrap();
        let pb = propose_clusters(&b, &cfg).unwrap();
        prop_assert_eq!(value_tuples(&a, &pa), value_tuples(&b, &pb));
        let sa = systematic_clusters(&a, &EngineConfig::new(1, "Age")).unwrap();
        let sb = systematic_clusters(&b, &EngineConfig::new(1, "Age")).unwrap();
        prop_assert_eq!(value_tuples(&a, &sa), value_tuples(&b, &sb));
    }

    #[test]
    fn systematic_blocks(rows in rows_strategy(50, 6), k in 1usize..8) {
        let ds = dataset(&rows);
        let n = rows.len();
        let cfg = EngineConfig::new(k, "Age");
        let p = match systematic_clusters(&ds, &cfg) {
            Err(Error::Infeasible { .. }) => { prop_assert!(n < k); return Ok(()); }
            other => other.unwrap(),
        };
        prop_assert_eq!(p.len(), n / k);
        let sizes = p.sizes();
        prop_assert!(sizes.iter().all(|&s| s >= k));
        let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        if n % k <= n / k {
            prop_assert!(sizes.iter().all(|&s| s == k || s == k + 1));
        }
        prop_assert_eq!(p.blocks().concat(), ds.sort_view("Age").unwrap());
    }

    #[test]
    fn enforce_k_terminates_valid(rows in rows_strategy(40, 6), k in 1usize..6) {
        let ds = dataset(&rows);
        prop_assume!(rows.len() >= k);
        let cfg = EngineConfig::new(k, "Age").with_merging(true);
        let p = propose_clusters(&ds, &cfg).unwrap();
        let merged = enforce_k(&p, &ds, &cfg).unwrap();
        assert_covers(&merged, rows.len());
        prop_assert!(merged.sizes().iter().all(|&s| s >= k));
        prop_assert!(merged.len() <= p.len());
        let before = total_il_canonical(&p, &ds, &always()).unwrap().total;
        let after = total_il_canonical(&merged, &ds, &always()).unwrap().total;
        prop_assert!(after + 1e-9 >= before);
    }

    #[test]
    fn enforce_k_output_is_k_anonymous(rows in rows_strategy(40, 6), k in prop::sample::select(vec![2usize, 3, 5])) {
        let ds = dataset(&rows);
        prop_assume!(rows.len() >= k);
        let cfg = EngineConfig::new(k, "Age").with_merging(true);
        let merged = enforce_k(&propose_clusters(&ds, &cfg).unwrap(), &ds, &cfg).unwrap();
        let table = generalize_partition(&merged, &ds, &cfg, &always()).unwrap();
        prop_assert!(verify_k_anonymity(&table, k).is_empty());
    }

    #[test]
    fn generalized_values_cover_members(rows in rows_strategy(40, 6), k in 1usize..5, merge in any::<bool>(), policy in any::<bool>()) {
        let ds = dataset(&rows);
        prop_assume!(rows.len() >= k);
        let trees = if policy { always() } else { need_based() };
        let cfg = EngineConfig::new(k, "Age").with_merging(merge);
        for p in [
            enforce_k(&propose_clusters(&ds, &cfg).unwrap(), &ds, &cfg).unwrap(),
            systematic_clusters(&ds, &cfg).unwrap(),
        ] {
            let table = generalize_partition(&p, &ds, &cfg, &trees).unwrap();
            prop_assert_eq!(table.rows.iter().map(|r| r.count).sum::<usize>(), rows.len());
            let gender = gender_tree();
            for (id, &(age, g, z, d)) in rows.iter().enumerate() {
                let row = &table.rows[table.record_rows[id]];
                let interval = &row.generalized_values[0];
                let (lo, hi) = match interval.split_once(" - ") {
                    Some((lo, hi)) => (lo.parse::<f64>().unwrap(), hi.parse::<f64>().unwrap()),
                    None => { let x = interval.parse::<f64>().unwrap(); (x, x) }
                };
                prop_assert!(lo <= age as f64 && age as f64 <= hi);
                prop_assert!(gender.is_ancestor_or_self(&row.generalized_values[1], GENDERS[g]));
                let zip = ZIPS[z];
                let released = &row.generalized_values[2];
                prop_assert!(
                    released == zip
                        || (released[..4] == zip[..4] && released.ends_with("**"))
                        || released.chars().all(|c| c == '*'),
                    "{released} does not cover {zip}"
                );
                prop_assert_eq!(released.len(), zip.len());
                prop_assert_eq!(&row.sensitive_value, DISEASES[d]);
            }
        }
    }

    #[test]
    fn union_height_is_monotone(a in prop::sample::subsequence(DISEASES[..4].to_vec(), 1..=4), extra in prop::sample::subsequence(DISEASES[..4].to_vec(), 0..=4)) {
        let tree = TaxonomyTree::from_edges(
            [("Disease", "Viral"), ("Disease", "Chronic"), ("Viral", "Flu"), ("Viral", "Hepatitis"), ("Chronic", "Diabetes"), ("Chronic", "Cancer")],
            None,
        ).unwrap();
        let u = ValueUnion::new(a.iter().copied()).unwrap();
        let v = ValueUnion::new(a.iter().chain(extra.iter()).copied()).unwrap();
        let (hu, hv) = (tree.union_height(&u).unwrap(), tree.union_height(&v).unwrap());
        prop_assert!(hu <= hv && hv <= tree.height());
        let label = tree.generalize_label(&u, false).unwrap();
        for value in u.iter() {
            prop_assert!(tree.is_ancestor_or_self(label, value));
        }
    }

    #[test]
    fn masking_preserves_length_and_prefix(value in "[0-9a-zA-Z]{0,12}", len in 0usize..8) {
        let rule = MaskRule::new(len, '*');
        match mask_suffix(&value, &rule) {
            Ok(out) => {
                prop_assert_eq!(out.chars().count(), value.chars().count());
                prop_assert_eq!(&out[..value.len() - len], &value[..value.len() - len]);
                prop_assert!(out[value.len() - len..].chars().all(|c| c == '*'));
            }
            Err(_) => prop_assert!(value.len() < len),
        }
    }

    #[test]
    fn strip_identifiers_is_idempotent(rows in rows_strategy(10, 6)) {
        let ds = dataset(&rows);
        let once = ds.strip_identifiers().unwrap();
        prop_assert_eq!(&once, &ds);
        prop_assert_eq!(once.strip_identifiers().unwrap(), once);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn heuristics_never_beat_the_oracle(rows in rows_strategy(8, 4), k in 1usize..4, policy in any::<bool>()) {
        let ds = dataset(&rows);
        let trees = if policy { always() } else { need_based() };
        let best = optimal_partition(&ds, 1, &trees).unwrap();
        let proposed = propose_clusters(&ds, &EngineConfig::new(1, "Age")).unwrap();
        prop_assert!(total_il_canonical(&proposed, &ds, &trees).unwrap().total + 1e-9 >= best.best_il);

        if rows.len() >= k {
            let best_k = optimal_partition(&ds, k, &trees).unwrap();
            let systematic = systematic_clusters(&ds, &EngineConfig::new(k, "Age")).unwrap();
            prop_assert!(total_il_canonical(&systematic, &ds, &trees).unwrap().total + 1e-9 >= best_k.best_il);
            prop_assert!(best_k.best_partition.sizes().iter().all(|&s| s >= k));
            prop_assert_eq!(optimal_partition(&ds, k, &trees).unwrap(), best_k);
        }
    }
}
