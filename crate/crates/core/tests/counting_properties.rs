use std::collections::BTreeSet;

use cflab::cf::Word;
use cflab::stats::{
    count_aligned, count_chunked, count_disjoint, count_overlapping, dyadic_decomposition,
    frequency_report, select_ap, CounterSpec, Mode,
};
use cflab::stream::{take_digits, FnSource, VecSource};
use proptest::prelude::*;

/// Re-scans the prefix for every start and checks the stride by division.
fn naive(digits: &[u64], pattern: &[u64], stride: usize, offset: usize) -> u64 {
    let k = pattern.len();
    (0..digits.len())
        .filter(|&i| i + k <= digits.len())
        .filter(|&i| i >= offset && (i - offset).is_multiple_of(stride))
        .filter(|&i| (0..k).all(|j| digits[i + j] == pattern[j]))
        .count() as u64
}

#[derive(Debug, Clone)]
struct Case {
    digits: Vec<u64>,
    pattern: Vec<u64>,
    stride: u64,
    offset: u64,
}

fn case() -> impl Strategy<Value = Case> {
    (
        prop::collection::vec(1u64..=4, 0..=200),
        prop::collection::vec(1u64..=4, 1..=3),
        0u64..5,
        0u64..100,
    )
        .prop_map(|(digits, pattern, extra, o)| {
            let k = pattern.len() as u64;
            let stride = k + extra;
            Case {
                digits,
                pattern,
                stride,
                offset: o % (stride - k + 1),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn counters_match_the_naive_scan(c in case()) {
        let w = Word::new(c.pattern.clone()).unwrap();
        let k = c.pattern.len();
        prop_assert_eq!(count_overlapping(&c.digits, &w).unwrap(), naive(&c.digits, &c.pattern, 1, 0));
        prop_assert_eq!(count_disjoint(&c.digits, &w).unwrap(), naive(&c.digits, &c.pattern, k, 0));
        prop_assert_eq!(
            count_aligned(&c.digits, c.stride, c.offset, &w).unwrap(),
            naive(&c.digits, &c.pattern, c.stride as usize, c.offset as usize)
        );
    }
}

proptest! {
    #[test]
    fn aligned_counts_split_by_full_block(
        digits in prop::collection::vec(1u64..=3, 0..=80),
        pattern in prop::collection::vec(1u64..=3, 1..=3),
        extra in 0u64..4,
        o in 0u64..10,
    ) {
        let k = pattern.len() as u64;
        let m = k + extra;
        let p = o % (m - k + 1);
        let digits = &digits[..digits.len() - digits.len() % m as usize];
        let w = Word::new(pattern.clone()).unwrap();
        let blocks: BTreeSet<Vec<u64>> = digits
            .chunks(m as usize)
            .filter(|b| b[p as usize..(p + k) as usize] == pattern[..])
            .map(|b| b.to_vec())
            .collect();
        let total: u64 = blocks
            .iter()
            .map(|b| count_aligned(digits, m, 0, &Word::new(b.clone()).unwrap()).unwrap())
            .sum();
        prop_assert_eq!(count_aligned(digits, m, p, &w).unwrap(), total);
    }

    #[test]
    fn dyadic_classes_cover_every_occurrence(
        digits in prop::collection::vec(1u64..=2, 0..=512),
        pattern in prop::collection::vec(1u64..=2, 1..=4),
    ) {
        let w = Word::new(pattern.clone()).unwrap();
        let k = pattern.len();
        let n = digits.len();
        let d = dyadic_decomposition(&digits, &w).unwrap();
        let top = if n < k { 1 } else { 1 + (n / k).ilog2() as usize };
        let mut aligned = 0;
        let mut levels = vec![0u64; top.saturating_sub(1)];
        let mut boundary = 0;
        for s in (0..n).filter(|&s| s + k <= n && digits[s..s + k] == pattern[..]) {
            if s % k == 0 {
                aligned += 1;
                continue;
            }
            let crossed = s.div_ceil(k);
            let level = 2 + crossed.trailing_zeros() as usize;
            if level <= top {
                levels[level - 2] += 1;
            } else {
                boundary += 1;
            }
        }
        prop_assert_eq!(d.aligned, aligned);
        prop_assert_eq!(&d.levels, &levels);
        prop_assert_eq!(d.boundary, boundary);
        prop_assert_eq!(d.total(), count_overlapping(&digits, &w).unwrap());
        prop_assert!(d.boundary < k as u64);
    }

    #[test]
    fn chunked_counting_equals_streaming(
        digits in prop::collection::vec(1u64..=3, 3..=3000),
        every in 1u64..400,
        jobs in 1usize..5,
        stride_extra in 0u64..3,
    ) {
        let specs = vec![
            CounterSpec::new(Word::new(vec![1]).unwrap(), Mode::Overlap).unwrap(),
            CounterSpec::new(Word::new(vec![1, 2]).unwrap(), Mode::Overlap).unwrap(),
            CounterSpec::new(Word::new(vec![2, 1, 3]).unwrap(), Mode::Disjoint).unwrap(),
            CounterSpec::new(
                Word::new(vec![3, 3]).unwrap(),
                Mode::Aligned { stride: 2 + stride_extra, offset: stride_extra },
            )
            .unwrap(),
        ];
        let n = digits.len() as u64;
        let mut src = VecSource::new(digits.clone()).unwrap();
        let streamed = frequency_report(&mut src, &specs, n, every).unwrap();
        let chunked = count_chunked(&digits, &specs, every, jobs).unwrap();
        prop_assert_eq!(&streamed.counts, &chunked.counts);
        prop_assert_eq!(&streamed.checkpoints, &chunked.checkpoints);
        for (i, spec) in specs.iter().enumerate() {
            prop_assert_eq!(streamed.counts[i], spec.count(&digits));
        }
        // counts never decrease and never exceed the admissible positions
        for pair in streamed.checkpoints.windows(2) {
            prop_assert!(pair[0].counts.iter().zip(&pair[1].counts).all(|(a, b)| a <= b));
        }
        for c in &streamed.checkpoints {
            for (i, spec) in specs.iter().enumerate() {
                prop_assert!(c.counts[i] <= spec.descriptor().admissible(c.n));
            }
        }
    }

    #[test]
    fn nested_selection_composes(a in 2u64..6, b in 2u64..6) {
        let digit = |i: u64| 1 + (i * 7919 + i / 3) % 13;
        let inner = select_ap(FnSource::new(digit), 1, a).unwrap();
        let nested = take_digits(&mut select_ap(inner, 1, b).unwrap(), 200).0;
        let direct = take_digits(&mut select_ap(FnSource::new(digit), 1, a * b).unwrap(), 200).0;
        prop_assert_eq!(nested, direct);
    }
}

#[test]
fn chunk_seams_inside_large_streams() {
    // longer than one counting block so seams fall between checkpoints
    let digits: Vec<u64> = (0..300_000u64).map(|i| 1 + (i * i + 3 * i) % 3).collect();
    let specs = vec![
        CounterSpec::new(Word::new(vec![1, 3]).unwrap(), Mode::Overlap).unwrap(),
        CounterSpec::new(Word::new(vec![2, 1, 3]).unwrap(), Mode::Overlap).unwrap(),
    ];
    let chunked = count_chunked(&digits, &specs, 100_000, 3).unwrap();
    let mut src = VecSource::new(digits.clone()).unwrap();
    let streamed = frequency_report(&mut src, &specs, digits.len() as u64, 100_000).unwrap();
    assert_eq!(chunked.counts, streamed.counts);
    assert_eq!(chunked.checkpoints, streamed.checkpoints);
    assert_eq!(chunked.counts[0], specs[0].count(&digits));
}
