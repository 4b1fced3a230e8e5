//! Acceptance suite: one test per criterion, each printing its own
//! pass/fail line through the harness. Tolerances are pinned in the
//! assertions; stated runtime budgets are asserted too.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use corana::ca::FrequencyModel;
use corana::seqclust::{
    cluster_sequence, detect_caesuras, verify_ultrametric, OrderedPoints,
};
use corana::stylometrics::{permutation_test, SequenceProfile};
use corana::tabulate::{ContingencyTable, GroupingMap};
use corana::Axis;

use corana_cli::config::PipelineConfig;
use corana_cli::pipeline::run_pipeline;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// shared generators
// ---------------------------------------------------------------------------

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn random_table(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> ContingencyTable {
    let n_rows = rng.gen_range(2..=max_rows);
    let n_cols = rng.gen_range(2..=max_cols);
    let mut rows: Vec<Vec<f64>> = (0..n_rows)
        .map(|_| (0..n_cols).map(|_| rng.gen_range(0..10) as f64).collect())
        .collect();
    for row in rows.iter_mut() {
        if row.iter().sum::<f64>() == 0.0 {
            row[rng.gen_range(0..n_cols)] = 1.0 + rng.gen_range(0..5) as f64;
        }
    }
    for j in 0..n_cols {
        if rows.iter().map(|r| r[j]).sum::<f64>() == 0.0 {
            rows[rng.gen_range(0..n_rows)][j] = 1.0 + rng.gen_range(0..5) as f64;
        }
    }
    ContingencyTable::new(labels("r", n_rows), labels("c", n_cols), rows).unwrap()
}

fn table_rows(table: &ContingencyTable) -> Vec<Vec<f64>> {
    (0..table.n_rows())
        .map(|i| (0..table.n_cols()).map(|j| table.counts()[(i, j)]).collect())
        .collect()
}

fn factor_distance2(coords: &corana::nalgebra::DMatrix<f64>, a: usize, b: usize) -> f64 {
    (0..coords.ncols())
        .map(|k| {
            let d = coords[(a, k)] - coords[(b, k)];
            d * d
        })
        .sum()
}

// ---------------------------------------------------------------------------
// criterion 1: factor-space distances reproduce chi-squared distances
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_distance_preservation() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let table = random_table(&mut rng, 20, 10);
        let model = FrequencyModel::from_table(&table);
        let space = model.decompose().unwrap();
        for (axis, n, coords) in [
            (Axis::Rows, table.n_rows(), space.row_coords()),
            (Axis::Columns, table.n_cols(), space.col_coords()),
        ] {
            for a in 0..n {
                for b in (a + 1)..n {
                    let d2 = model.chi2_distance(axis, a, b).powi(2);
                    let f2 = factor_distance2(coords, a, b);
                    let rel = (f2 - d2).abs() / d2.max(1.0);
                    worst = worst.max(rel);
                }
            }
        }
    }
    assert!(worst <= 1e-8, "worst relative distance error {worst:e}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
}

// ---------------------------------------------------------------------------
// criterion 2: eigenvalues sum to the double-sum inertia, rank is capped
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_inertia_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    for _ in 0..100 {
        let table = random_table(&mut rng, 20, 10);
        let model = FrequencyModel::from_table(&table);
        let space = model.decompose().unwrap();
        let sum: f64 = space.eigenvalues().iter().sum();
        let direct = model.total_inertia();
        assert!(
            (sum - direct).abs() <= 1e-10,
            "sum of eigenvalues {sum} vs direct inertia {direct}"
        );
        assert!(space.n_factors() <= table.n_rows().min(table.n_cols()) - 1);
    }
}

// ---------------------------------------------------------------------------
// criterion 3: transition formulas round-trip, active elements reproject
// ---------------------------------------------------------------------------

#[test]
fn criterion_03_transition_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    for _ in 0..30 {
        let table = random_table(&mut rng, 15, 8);
        let model = FrequencyModel::from_table(&table);
        let space = model.decompose().unwrap();
        let f = model.frequencies();
        for a in 0..space.n_factors() {
            let scale = space.eigenvalues()[a].sqrt();
            for i in 0..table.n_rows() {
                let from_g: f64 = (0..table.n_cols())
                    .map(|j| f[(i, j)] / model.row_masses()[i] * space.col_coords()[(j, a)])
                    .sum::<f64>()
                    / scale;
                assert!((from_g - space.row_coords()[(i, a)]).abs() <= 1e-8);
            }
            for j in 0..table.n_cols() {
                let from_f: f64 = (0..table.n_rows())
                    .map(|i| f[(i, j)] / model.col_masses()[j] * space.row_coords()[(i, a)])
                    .sum::<f64>()
                    / scale;
                assert!((from_f - space.col_coords()[(j, a)]).abs() <= 1e-8);
            }
        }
        for i in 0..table.n_rows() {
            let p = space
                .project_supplementary(&model.row_profile(i), Axis::Rows)
                .unwrap();
            for a in 0..space.n_factors() {
                assert!((p[a] - space.row_coords()[(i, a)]).abs() <= 1e-8);
            }
        }
        for j in 0..table.n_cols() {
            let p = space
                .project_supplementary(&model.col_profile(j), Axis::Columns)
                .unwrap();
            for a in 0..space.n_factors() {
                assert!((p[a] - space.col_coords()[(j, a)]).abs() <= 1e-8);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 4: distributional equivalence under column split and merge
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_distributional_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC4);
    for _ in 0..50 {
        let table = random_table(&mut rng, 10, 6);
        let model = FrequencyModel::from_table(&table);
        let n = table.n_rows();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
            .collect();
        let before: Vec<f64> = pairs
            .iter()
            .map(|&(a, b)| model.chi2_distance(Axis::Rows, a, b))
            .collect();

        // Split a column into two halves.
        let split_at = rng.gen_range(0..table.n_cols());
        let mut split_rows = Vec::with_capacity(n);
        for row in table_rows(&table) {
            let mut new_row = Vec::with_capacity(table.n_cols() + 1);
            for (j, v) in row.iter().enumerate() {
                if j == split_at {
                    new_row.push(v / 2.0);
                    new_row.push(v / 2.0);
                } else {
                    new_row.push(*v);
                }
            }
            split_rows.push(new_row);
        }
        let mut split_labels = Vec::new();
        for (j, label) in table.col_labels().iter().enumerate() {
            if j == split_at {
                split_labels.push(format!("{label}_a"));
                split_labels.push(format!("{label}_b"));
            } else {
                split_labels.push(label.clone());
            }
        }
        let split =
            ContingencyTable::new(table.row_labels().to_vec(), split_labels, split_rows).unwrap();
        let split_model = FrequencyModel::from_table(&split);
        for (k, &(a, b)) in pairs.iter().enumerate() {
            let after = split_model.chi2_distance(Axis::Rows, a, b);
            assert!(
                (after - before[k]).abs() <= 1e-12,
                "column split moved d({a},{b}) by {:e}",
                (after - before[k]).abs()
            );
        }

        // Merge two columns with identical profiles back together.
        let merge_from = format!("{}_a", table.col_labels()[split_at]);
        let merge_into = format!("{}_b", table.col_labels()[split_at]);
        let grouping: GroupingMap = [
            (merge_from, table.col_labels()[split_at].clone()),
            (merge_into, table.col_labels()[split_at].clone()),
        ]
        .into_iter()
        .collect();
        let merged = split.aggregate(&grouping, Axis::Columns).unwrap();
        let merged_model = FrequencyModel::from_table(&merged);
        for (k, &(a, b)) in pairs.iter().enumerate() {
            let after = merged_model.chi2_distance(Axis::Rows, a, b);
            assert!(
                (after - before[k]).abs() <= 1e-12,
                "column merge moved d({a},{b}) by {:e}",
                (after - before[k]).abs()
            );
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 5: hand-evaluated 2x2 fixture
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_hand_fixture() {
    let table = ContingencyTable::new(
        vec!["r1".into(), "r2".into()],
        vec!["c1".into(), "c2".into()],
        vec![vec![2.0, 0.0], vec![0.0, 2.0]],
    )
    .unwrap();
    let model = FrequencyModel::from_table(&table);
    assert!((model.total_inertia() - 1.0).abs() <= 1e-10);
    assert!((model.chi2_distance(Axis::Rows, 0, 1) - 2.0).abs() <= 1e-10);
    let space = model.decompose().unwrap();
    assert_eq!(space.n_factors(), 1);
    assert!((space.eigenvalues()[0] - 1.0).abs() <= 1e-10);
    assert!((space.row_coords()[(0, 0)] - 1.0).abs() <= 1e-10);
    assert!((space.row_coords()[(1, 0)] + 1.0).abs() <= 1e-10);
}

// ---------------------------------------------------------------------------
// criterion 6: clustering equals brute force; levels never decrease
// ---------------------------------------------------------------------------

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Independent reference: every step enumerates every adjacent segment pair
/// and recomputes its complete-link cost from the raw points; leftmost
/// minimum merges. Returns (left_start, boundary, right_end, level).
fn brute_force_cluster(points: &[Vec<f64>]) -> Vec<(usize, usize, usize, f64)> {
    let n = points.len();
    let mut segs: Vec<(usize, usize)> = (0..n).map(|i| (i, i + 1)).collect();
    let mut merges = Vec::new();
    while segs.len() > 1 {
        let mut best_t = 0;
        let mut best_cost = f64::INFINITY;
        for t in 0..segs.len() - 1 {
            let mut cost = 0.0_f64;
            for a in segs[t].0..segs[t].1 {
                for b in segs[t + 1].0..segs[t + 1].1 {
                    cost = cost.max(euclid(&points[a], &points[b]));
                }
            }
            if cost < best_cost {
                best_cost = cost;
                best_t = t;
            }
        }
        merges.push((segs[best_t].0, segs[best_t].1, segs[best_t + 1].1, best_cost));
        segs[best_t] = (segs[best_t].0, segs[best_t + 1].1);
        segs.remove(best_t + 1);
    }
    merges
}

#[test]
fn criterion_06_clustering_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    for _ in 0..50 {
        let n = rng.gen_range(1..=12);
        let dim = rng.gen_range(1..=4);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let d = cluster_sequence(&OrderedPoints::from_coords(points.clone()).unwrap());
        let oracle = brute_force_cluster(&points);
        assert_eq!(d.merges().len(), oracle.len());
        for (merge, (ls, boundary, re, level)) in d.merges().iter().zip(&oracle) {
            assert_eq!(merge.left.start, *ls);
            assert_eq!(merge.left.end, *boundary);
            assert_eq!(merge.right.end, *re);
            assert!((merge.level - level).abs() <= 1e-12);
        }
    }
    // 200 fuzz sequences up to n = 50: levels never decrease.
    for _ in 0..200 {
        let n = rng.gen_range(1..=50);
        let dim = rng.gen_range(1..=3);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-100.0..100.0)).collect())
            .collect();
        let d = cluster_sequence(&OrderedPoints::from_coords(points).unwrap());
        let mut previous = 0.0;
        for merge in d.merges() {
            assert!(merge.level >= previous);
            previous = merge.level;
        }
    }
}

// ---------------------------------------------------------------------------
// criterion 7: cophenetic matrices are exact ultrametrics
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_ultrametric_induction() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    for _ in 0..60 {
        let n = rng.gen_range(3..=25);
        let dim = rng.gen_range(1..=3);
        let points: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect())
            .collect();
        let u = cluster_sequence(&OrderedPoints::from_coords(points).unwrap()).cophenetic();
        let report = verify_ultrametric(&u.rows(), 0.0).unwrap();
        assert!(report.is_ultrametric(), "violations at zero tolerance");
    }

    // Three leaves, pair merged at 1.0, third joined at 3.5: the cophenetic
    // distances are (3.5, 3.5, 1.0) exactly.
    let points = OrderedPoints::new(
        vec!["x".into(), "y".into(), "z".into()],
        vec![vec![0.0], vec![2.5], vec![3.5]],
    )
    .unwrap();
    let u = cluster_sequence(&points).cophenetic();
    assert_eq!(u.get(0, 1), 3.5);
    assert_eq!(u.get(0, 2), 3.5);
    assert_eq!(u.get(1, 2), 1.0);
    let report = verify_ultrametric(&u.rows(), 0.0).unwrap();
    assert!(report.is_ultrametric());
}

// ---------------------------------------------------------------------------
// criterion 8: planted caesura recovery on synthetic 77-scene corpora
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_caesura_recovery() {
    let start = Instant::now();
    let n_scenes = 77;
    let break_before = 40; // scenes 1..=39 from profile A, 40..=77 from B
    let n_words = 10;
    let mut hits = 0;
    for trial in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC8_000 + trial);
        let mut rows = Vec::with_capacity(n_scenes);
        for scene in 1..=n_scenes {
            let first_half = scene < break_before;
            let row: Vec<f64> = (0..n_words)
                .map(|w| {
                    let base = if first_half == (w < n_words / 2) { 20.0 } else { 0.0 };
                    base + rng.gen_range(0..3) as f64
                })
                .collect();
            rows.push(row);
        }
        let table = ContingencyTable::new(
            (1..=n_scenes).map(|i| format!("s{i:02}")).collect(),
            labels("w", n_words),
            rows,
        )
        .unwrap();
        let model = FrequencyModel::from_table(&table);

        // The planted break must dominate the within-segment noise by 5x.
        if trial == 0 {
            let inter = model.chi2_distance(Axis::Rows, 0, n_scenes - 1);
            let mut intra: f64 = 0.0;
            for a in [0, 10, 20, 45, 60] {
                intra = intra.max(model.chi2_distance(Axis::Rows, a, a + 5));
            }
            assert!(
                inter >= 5.0 * intra,
                "planted break too weak: inter {inter} vs intra {intra}"
            );
        }

        let space = model.decompose().unwrap();
        let points = OrderedPoints::new(
            space.row_labels().to_vec(),
            (0..n_scenes).map(|i| space.point(Axis::Rows, i)).collect(),
        )
        .unwrap();
        let d = cluster_sequence(&points);
        let caesuras = detect_caesuras(&d, 1).unwrap();
        if caesuras[0].position == break_before - 1 {
            hits += 1;
        }
    }
    assert!(hits >= 95, "planted boundary recovered in {hits}/100 trials");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
}

// ---------------------------------------------------------------------------
// criterion 9: Monte Carlo determinism and null-rank uniformity
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_monte_carlo_soundness() {
    let start = Instant::now();

    // Determinism: identical inputs give byte-identical reports.
    let coords = OrderedPoints::from_coords(vec![
        vec![0.3, 1.2],
        vec![1.9, 0.4],
        vec![0.7, 0.9],
        vec![2.4, 1.6],
        vec![1.1, 0.2],
        vec![0.5, 2.0],
    ])
    .unwrap();
    let profile = SequenceProfile::new(coords, vec![31, 27, 45, 12, 38, 22]).unwrap();
    let a = serde_json::to_vec(&permutation_test(&profile, 999, 7).unwrap()).unwrap();
    let b = serde_json::to_vec(&permutation_test(&profile, 999, 7).unwrap()).unwrap();
    assert_eq!(a, b, "reports differ under a fixed seed");

    // Null-rank uniformity: the observed sequence is itself a uniform
    // permutation of fixed materials, so its rank among 99 randomized
    // trials is uniform on 0..=99. Chi-square on rank deciles over 500
    // repetitions, all three statistics, df = 9, alpha = 0.001.
    let n = 10;
    let mut master = ChaCha8Rng::seed_from_u64(0xC9);
    let base_points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..3).map(|_| master.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut base_counts: BTreeSet<u64> = BTreeSet::new();
    while base_counts.len() < n {
        base_counts.insert(master.gen_range(1_000..1_000_000));
    }
    let base_counts: Vec<u64> = base_counts.into_iter().collect();

    let mut deciles = [[0u32; 10]; 3];
    for rep in 0..500 {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut master);
        let points: Vec<Vec<f64>> = order.iter().map(|&i| base_points[i].clone()).collect();
        let counts: Vec<u64> = order.iter().map(|&i| base_counts[i]).collect();
        let profile =
            SequenceProfile::new(OrderedPoints::from_coords(points).unwrap(), counts).unwrap();
        let report = permutation_test(&profile, 99, 0xC9_000 + rep).unwrap();
        for (s, entry) in [
            report.movement_variability,
            report.tempo,
            report.mean_rhythm,
        ]
        .iter()
        .enumerate()
        {
            let rank = (entry.beat_fraction * 99.0).round() as usize;
            assert!(rank <= 99);
            deciles[s][(rank * 10) / 100] += 1;
        }
    }
    // Critical value of chi-square with 9 degrees of freedom at 0.001.
    let critical = 27.877;
    for (s, hist) in deciles.iter().enumerate() {
        let chi2: f64 = hist
            .iter()
            .map(|&obs| {
                let diff = obs as f64 - 50.0;
                diff * diff / 50.0
            })
            .sum();
        assert!(
            chi2 < critical,
            "statistic {s}: chi-square {chi2} over deciles {hist:?}"
        );
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
}

// ---------------------------------------------------------------------------
// criterion 10: end-to-end pipeline determinism and SVG well-formedness
// ---------------------------------------------------------------------------

/// Minimal XML well-formedness check for the SVGs this tool emits: tags
/// balance, attributes are quoted, and exactly one root element exists.
fn assert_well_formed_xml(text: &str) {
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0;
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        rest = &rest[open + 1..];
        let close = rest.find('>').expect("unterminated tag");
        let tag = &rest[..close];
        rest = &rest[close + 1..];
        if tag.starts_with('?') || tag.starts_with('!') {
            continue;
        }
        if let Some(name) = tag.strip_prefix('/') {
            let expected = stack.pop().unwrap_or_else(|| panic!("unmatched </{name}>"));
            assert_eq!(expected, name.trim(), "mismatched closing tag");
            continue;
        }
        let name = tag
            .split([' ', '\t', '\n', '/'])
            .next()
            .expect("tag name")
            .to_string();
        assert!(!name.is_empty());
        assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced quotes in <{name}>");
        if tag.ends_with('/') {
            if stack.is_empty() {
                roots += 1;
            }
            continue;
        }
        if stack.is_empty() {
            roots += 1;
        }
        stack.push(name);
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    assert_eq!(roots, 1, "expected a single root element");
}

fn read_dir_sorted(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    entries.sort();
    entries
}

#[test]
fn criterion_10_pipeline_end_to_end() {
    let config_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline.json");
    let config = PipelineConfig::load(&config_path).unwrap();

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let report_a = run_pipeline(&config, dir_a.path()).unwrap();
    let report_b = run_pipeline(&config, dir_b.path()).unwrap();

    // Ten scenes in, every stage ran.
    assert_eq!(report_a.n_rows, 10);
    assert!(report_a.style.is_some());
    assert!(!report_a.caesuras.is_empty());

    // Byte-identical artifact sets across the two runs.
    let files_a = read_dir_sorted(dir_a.path());
    let files_b = read_dir_sorted(dir_b.path());
    let names_a: Vec<_> = files_a.iter().map(|p| p.file_name().unwrap()).collect();
    let names_b: Vec<_> = files_b.iter().map(|p| p.file_name().unwrap()).collect();
    assert_eq!(names_a, names_b);
    assert!(files_a.len() >= 11, "expected a full artifact set");
    for (a, b) in files_a.iter().zip(&files_b) {
        let bytes_a = std::fs::read(a).unwrap();
        let bytes_b = std::fs::read(b).unwrap();
        assert_eq!(bytes_a, bytes_b, "artifact {:?} differs between runs", a.file_name());
    }
    assert_eq!(
        serde_json::to_string(&report_a).unwrap(),
        serde_json::to_string(&report_b).unwrap()
    );

    // SVGs are well-formed XML with a single root.
    for file in &files_a {
        if file.extension().is_some_and(|e| e == "svg") {
            let text = std::fs::read_to_string(file).unwrap();
            assert_well_formed_xml(&text);
            assert!(text.starts_with("<svg "));
        }
    }

    // Factor-axis annotations cover all information: percents sum to 100.
    let total: f64 = report_a.percent_inertia.iter().sum();
    assert!(
        (total - 100.0).abs() <= 0.1,
        "percent inertia sums to {total}"
    );
}
