mod common;

use std::collections::{BTreeSet, HashSet};

use erbench_core::clustering::confusion_between;
use erbench_core::datamodel::{Dataset, Experiment, MatchRecord};
use erbench_core::exploration::{
    equal_ratio, evaluate_set_expression, explain_error, null_ratio, select_around_threshold, select_outliers,
    venn_regions, OutlierSide, PairMode, PairSource, PairUniverse, SourceKind,
};
use erbench_core::scalar::pairs_of;
use erbench_core::{Clustering, Pair, ScoredPair};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type PairSet = BTreeSet<(usize, usize)>;

fn blank_dataset(n: usize) -> Dataset {
    let ids: Vec<String> = (0..n).map(|i| format!("r{i}")).collect();
    let rows: Vec<(&str, Vec<Option<&str>>)> = ids.iter().map(|id| (id.as_str(), vec![Some("v")])).collect();
    Dataset::from_rows("d", &["v"], &rows).unwrap()
}

fn experiment(id: &str, matches: &[ScoredPair]) -> Experiment {
    Experiment {
        id: id.into(),
        name: id.into(),
        dataset_id: "d".into(),
        solution_id: None,
        matches: matches
            .iter()
            .map(|m| MatchRecord {
                pair: m.pair,
                similarity: m.similarity,
                is_original: true,
            })
            .collect(),
        soft_kpis: None,
        content_hash: String::new(),
    }
}

/// A source together with its explicitly materialized pair sets.
struct Materialized {
    source: PairSource,
    closure: PairSet,
    original: PairSet,
}

impl Materialized {
    fn set(&self, mode: PairMode) -> &PairSet {
        match mode {
            PairMode::Closure => &self.closure,
            PairMode::OriginalOnly => &self.original,
        }
    }
}

fn closure_set(labels: &[usize]) -> PairSet {
    common::all_pairs(labels.len())
        .into_iter()
        .filter(|&(a, b)| labels[a] == labels[b])
        .collect()
}

fn random_sources(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Materialized> {
    let dataset = blank_dataset(n);
    (0..count)
        .map(|i| {
            let id = format!("s{i}");
            if rng.gen_bool(0.3) {
                let labels = common::random_labels(rng, n, n / 2);
                let closure = closure_set(&labels);
                Materialized {
                    source: PairSource::from_clustering(&id, &id, "d", SourceKind::GoldStandard, Clustering::from_labels(&labels)),
                    original: closure.clone(),
                    closure,
                }
            } else {
                let matches = common::random_matches(rng, n, n);
                let edges: Vec<(usize, usize)> = matches.iter().map(|m| m.pair.records()).collect();
                Materialized {
                    source: PairSource::from_experiment(&experiment(&id, &matches), &dataset),
                    closure: closure_set(&common::components(n, &edges)),
                    original: edges.into_iter().collect(),
                }
            }
        })
        .collect()
}

fn as_tuples(pairs: &[Pair]) -> PairSet {
    pairs.iter().map(|p| p.records()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn set_expressions_match_explicit_set_arithmetic(seed in any::<u64>(), n in 2usize..=10, count in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sources = random_sources(&mut rng, n, count);
        let mut include = Vec::new();
        let mut exclude = Vec::new();
        for (i, _) in sources.iter().enumerate() {
            match rng.gen_range(0..3) {
                0 => include.push(i),
                1 => exclude.push(i),
                _ => {}
            }
        }
        if include.is_empty() {
            include.push(0);
            exclude.retain(|&i| i != 0);
        }
        for mode in [PairMode::Closure, PairMode::OriginalOnly] {
            let mut expected: PairSet = sources[include[0]].set(mode).clone();
            for &i in &include[1..] {
                expected = expected.intersection(sources[i].set(mode)).copied().collect();
            }
            for &i in &exclude {
                expected = expected.difference(sources[i].set(mode)).copied().collect();
            }
            let inc: Vec<&PairSource> = include.iter().map(|&i| &sources[i].source).collect();
            let exc: Vec<&PairSource> = exclude.iter().map(|&i| &sources[i].source).collect();
            let got = evaluate_set_expression(&inc, &exc, mode).unwrap();
            prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(as_tuples(&got), expected);
        }
    }

    #[test]
    fn venn_regions_match_membership_signatures(seed in any::<u64>(), n in 2usize..=10, count in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sources = random_sources(&mut rng, n, count);
        let refs: Vec<&PairSource> = sources.iter().map(|m| &m.source).collect();
        for mode in [PairMode::Closure, PairMode::OriginalOnly] {
            let regions = venn_regions(&refs, mode).unwrap();
            prop_assert_eq!(regions.len(), (1 << count) - 1);
            let union: HashSet<(usize, usize)> = sources.iter().flat_map(|m| m.set(mode).iter().copied()).collect();
            prop_assert_eq!(regions.iter().map(|r| r.count).sum::<u64>(), union.len() as u64);
            for region in &regions {
                let expected = union
                    .iter()
                    .filter(|p| (0..count).all(|i| sources[i].set(mode).contains(p) == (region.mask & (1 << i) != 0)))
                    .count() as u64;
                prop_assert_eq!(region.count, expected);
                // the region's own expression selects exactly its pairs
                let inc: Vec<&PairSource> = (0..count).filter(|i| region.mask & (1 << i) != 0).map(|i| refs[i]).collect();
                let exc: Vec<&PairSource> = (0..count).filter(|i| region.mask & (1 << i) == 0).map(|i| refs[i]).collect();
                prop_assert_eq!(evaluate_set_expression(&inc, &exc, mode).unwrap().len() as u64, expected);
            }
        }
    }

    #[test]
    fn confusion_cells_are_set_expressions(seed in any::<u64>(), n in 2usize..=10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matches = common::random_matches(&mut rng, n, n);
        let labels = common::random_labels(&mut rng, n, n / 2);
        let dataset = blank_dataset(n);
        let e = PairSource::from_experiment(&experiment("e", &matches), &dataset);
        let g = PairSource::from_clustering("g", "g", "d", SourceKind::GoldStandard, Clustering::from_labels(&labels));
        let count = |inc: &[&PairSource], exc: &[&PairSource]| evaluate_set_expression(inc, exc, PairMode::Closure).unwrap().len() as u64;
        let tp = count(&[&e, &g], &[]);
        let fp = count(&[&e], &[&g]);
        let fn_ = count(&[&g], &[&e]);
        let tn = pairs_of(n) - tp - fp - fn_;
        let m = confusion_between(e.clustering(), g.clustering()).unwrap();
        prop_assert_eq!((tp, fp, fn_, tn), m.as_tuple());
    }

    #[test]
    fn threshold_neighbourhood_matches_distance_sort(seed in any::<u64>(), count in 1usize..40, k in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matches = common::random_matches(&mut rng, 30, count);
        prop_assume!(matches.iter().any(|m| m.similarity.is_some()));
        let t = rng.gen_range(0..20) as f64 / 20.0;
        let picked = select_around_threshold(&matches, t, k, None).unwrap();
        let mut above: Vec<(f64, Pair)> = matches.iter().filter_map(|m| m.similarity.filter(|&s| s >= t).map(|s| ((s - t).abs(), m.pair))).collect();
        let mut below: Vec<(f64, Pair)> = matches.iter().filter_map(|m| m.similarity.filter(|&s| s < t).map(|s| ((t - s).abs(), m.pair))).collect();
        above.sort_by(|a, b| a.partial_cmp(b).unwrap());
        below.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let k = k.min(above.len() + below.len());
        let mut n_above = k.div_ceil(2);
        let mut n_below = k / 2;
        if n_above > above.len() {
            n_below += n_above - above.len();
            n_above = above.len();
        }
        if n_below > below.len() {
            n_above += n_below - below.len();
            n_below = below.len();
        }
        let expected: BTreeSet<Pair> = above[..n_above].iter().chain(&below[..n_below]).map(|x| x.1).collect();
        let got: BTreeSet<Pair> = picked.iter().map(|p| p.pair).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn outliers_match_brute_force_order(seed in any::<u64>(), count in 1usize..40, k in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matches = common::random_matches(&mut rng, 20, count);
        prop_assume!(matches.iter().any(|m| m.similarity.is_some()));
        let labels = common::random_labels(&mut rng, 20, 8);
        let truth = Clustering::from_labels(&labels);
        let t = 0.5;
        let mut wrong: Vec<(f64, Pair)> = matches
            .iter()
            .filter_map(|m| m.similarity.map(|s| (s, m.pair)))
            .filter(|&(s, p)| (s >= t) != (labels[p.low()] == labels[p.high()]))
            .map(|(s, p)| (-(s - t).abs(), p))
            .collect();
        wrong.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected: Vec<Pair> = wrong.into_iter().take(k).map(|x| x.1).collect();
        let got: Vec<Pair> = select_outliers(&matches, &truth, t, k, OutlierSide::Both).unwrap().into_iter().map(|x| x.0.pair).collect();
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn explain_error_returns_the_brute_force_argmax(seed in any::<u64>(), candidates in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 12;
        let table: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..10) as f64 / 10.0).collect()).collect();
        let sim = |a: usize, b: usize| table[a.min(b)][a.max(b)];
        let wrong = Pair::new(0, 1).unwrap();
        let pool: Vec<Pair> = (0..candidates).filter_map(|_| Pair::new(rng.gen_range(2..n), rng.gen_range(2..n))).collect();
        prop_assume!(!pool.is_empty());
        for q in [1.0, 2.0] {
            let norm = |x: f64, y: f64| if q == 1.0 { x + y } else { (x * x + y * y).sqrt() };
            let scores: Vec<(f64, Pair)> = pool
                .iter()
                .map(|&c| {
                    let (x, y) = (c.low(), c.high());
                    (norm(sim(0, x), sim(1, y)).max(norm(sim(0, y), sim(1, x))), c)
                })
                .collect();
            let top = scores.iter().map(|s| s.0).fold(f64::MIN, f64::max);
            let best = scores.iter().filter(|s| s.0 >= top - 1e-9).map(|s| (top, s.1)).min_by_key(|s| s.1).unwrap();
            let got = explain_error(wrong, &pool, sim, q).unwrap();
            prop_assert_eq!(got.candidate, best.1);
            prop_assert!((got.score - best.0).abs() < 1e-9);
        }
    }
}

/// Six records with nulls and repeated values in both attributes.
fn six_records() -> Dataset {
    Dataset::from_rows(
        "six",
        &["name", "zip"],
        &[
            ("1", vec![Some("ann"), Some("100")]),
            ("2", vec![Some("ann"), None]),
            ("3", vec![None, Some("100")]),
            ("4", vec![Some("bob"), Some("200")]),
            ("5", vec![Some("bob"), Some("200")]),
            ("6", vec![None, None]),
        ],
    )
    .unwrap()
}

fn ratio_oracle(
    d: &Dataset,
    exp: &[usize],
    truth: &[usize],
    universe: &[(usize, usize)],
    property: impl Fn(Option<&str>, Option<&str>) -> bool,
) -> Vec<(u64, u64)> {
    (0..d.attribute_names().len())
        .map(|a| {
            let mut count = 0;
            let mut wrong = 0;
            for &(x, y) in universe {
                if property(d.value(x, a), d.value(y, a)) {
                    count += 1;
                    if (exp[x] == exp[y]) != (truth[x] == truth[y]) {
                        wrong += 1;
                    }
                }
            }
            (count, wrong)
        })
        .collect()
}

#[test]
fn attribute_ratios_match_enumeration_on_six_records() {
    let d = six_records();
    let is_null = |u: Option<&str>, v: Option<&str>| u.is_none() || v.is_none();
    let is_equal = |u: Option<&str>, v: Option<&str>| u.is_some() && u == v;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let exp = common::random_labels(&mut rng, 6, 3);
        let truth = common::random_labels(&mut rng, 6, 3);
        let (ce, ct) = (Clustering::from_labels(&exp), Clustering::from_labels(&truth));
        let everything = common::all_pairs(6);
        let matched: Vec<(usize, usize)> = everything
            .iter()
            .copied()
            .filter(|&(x, y)| exp[x] == exp[y] || truth[x] == truth[y])
            .collect();
        for (which, universe) in [(PairUniverse::AllPairs, &everything), (PairUniverse::ExperimentAndGold, &matched)] {
            let nulls = null_ratio(&d, &ce, &ct, which).unwrap();
            let equals = equal_ratio(&d, &ce, &ct, which).unwrap();
            let got_nulls: Vec<(u64, u64)> = nulls.iter().map(|r| (r.count, r.false_count)).collect();
            let got_equals: Vec<(u64, u64)> = equals.iter().map(|r| (r.count, r.false_count)).collect();
            assert_eq!(got_nulls, ratio_oracle(&d, &exp, &truth, universe, is_null));
            assert_eq!(got_equals, ratio_oracle(&d, &exp, &truth, universe, is_equal));
            for r in nulls.iter().chain(&equals) {
                match r.ratio {
                    Some(v) => assert!((0.0..=1.0).contains(&v) && r.count > 0),
                    None => assert_eq!(r.count, 0),
                }
            }
        }
    }
}
