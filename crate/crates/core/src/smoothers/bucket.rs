//! Wall-of-bricks bucketing: walk key values upward, closing a bucket each
//! time it has gathered at least `c_min` items.

/// Statistic used to bucket a history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BucketKey {
    /// `N(h)`.
    TotalCount,
    /// `N(h) / distinct(h)`.
    AverageCount,
    /// `N(h)` before one occurrence is deleted.
    CountBeforeDeletion,
    /// Product of history and word probabilities (minibucket index).
    CgProduct,
}

impl BucketKey {
    /// Key value from `(N(h), distinct(h))`; unseen histories map to zero.
    pub fn value(self, total: u64, distinct: u64) -> f64 {
        match self {
            BucketKey::AverageCount if distinct > 0 => total as f64 / distinct as f64,
            BucketKey::AverageCount => 0.0,
            _ => total as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BucketMap {
    key: BucketKey,
    c_min: u64,
    c_top: f64,
    // inclusive upper key of every bucket but the last
    bounds: Vec<f64>,
}

impl BucketMap {
    /// `weights` yields `(key, how many items have it)`. A `c_min` of
    /// `u64::MAX` stands for infinity and yields a single bucket.
    pub fn build<I>(key: BucketKey, weights: I, c_min: u64, c_top: f64) -> Self
    where
        I: IntoIterator<Item = (f64, u64)>,
    {
        let c_min = c_min.max(1);
        let mut keyed: Vec<(f64, u64)> = weights
            .into_iter()
            .filter(|&(_, w)| w > 0)
            .map(|(k, w)| (k.min(c_top), w))
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut bounds = Vec::new();
        let mut acc = 0u64;
        let mut i = 0;
        while i < keyed.len() {
            let k = keyed[i].0;
            while i < keyed.len() && keyed[i].0 == k {
                acc = acc.saturating_add(keyed[i].1);
                i += 1;
            }
            if acc >= c_min {
                bounds.push(k);
                acc = 0;
            }
        }
        // the last bucket is open-ended; any undersized remainder (acc < c_min)
        // merges backward into it
        debug_assert!(acc < c_min);
        bounds.pop();
        BucketMap {
            key,
            c_min,
            c_top,
            bounds,
        }
    }

    pub fn single(key: BucketKey) -> Self {
        BucketMap {
            key,
            c_min: u64::MAX,
            c_top: f64::INFINITY,
            bounds: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.bounds.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn key(&self) -> BucketKey {
        self.key
    }

    pub fn c_min(&self) -> u64 {
        self.c_min
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn bucket(&self, key: f64) -> usize {
        let key = key.min(self.c_top);
        self.bounds.partition_point(|&b| b < key)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn undersized_tail_merges_backward() {
        let m = BucketMap::build(BucketKey::TotalCount, [(0.0, 5), (1.0, 5), (2.0, 5)], 10, 1e5);
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn exact_fills_make_separate_buckets() {
        let m = BucketMap::build(BucketKey::TotalCount, [(0.0, 10), (1.0, 10), (2.0, 10)], 10, 1e5);
        assert_eq!(m.len(), 3);
        assert_eq!((m.bucket(0.0), m.bucket(1.0), m.bucket(2.0), m.bucket(7.0)), (0, 1, 2, 2));
    }

    #[test]
    fn single_key_gets_one_bucket() {
        let m = BucketMap::build(BucketKey::TotalCount, [(0.0, 100)], 10, 1e5);
        assert_eq!(m.len(), 1);
        assert_eq!(m.bucket(55.0), 0);
    }

    #[test]
    fn infinite_minimum_and_no_data() {
        let m = BucketMap::build(BucketKey::TotalCount, [(0.0, 100), (9.0, 1000)], u64::MAX, 1e5);
        assert_eq!(m.len(), 1);
        let m = BucketMap::build(BucketKey::AverageCount, std::iter::empty(), 3, 1e5);
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn keys_clamp_at_top() {
        let m = BucketMap::build(BucketKey::TotalCount, [(1.0, 10), (500.0, 10), (900.0, 10)], 10, 100.0);
        // 500 and 900 both clamp to 100 and share a bucket
        assert_eq!(m.len(), 2);
        assert_eq!(m.bucket(100_000.0), m.bucket(500.0));
    }

    #[test]
    fn average_key_separates_spread() {
        assert_eq!(BucketKey::AverageCount.value(10, 1), 10.0);
        assert_eq!(BucketKey::AverageCount.value(10, 10), 1.0);
        assert_eq!(BucketKey::AverageCount.value(0, 0), 0.0);
    }

    proptest! {
        #[test]
        fn buckets_hold_at_least_c_min(
            items in proptest::collection::vec((0u32..200, 1u64..20), 0..60),
            c_min in 1u64..80,
        ) {
            let m = BucketMap::build(
                BucketKey::TotalCount,
                items.iter().map(|&(k, w)| (k as f64, w)),
                c_min,
                150.0,
            );
            let mut fill = vec![0u64; m.len()];
            for &(k, w) in &items {
                fill[m.bucket(k as f64)] += w;
            }
            let total: u64 = fill.iter().sum();
            if total >= c_min {
                for f in &fill {
                    prop_assert!(*f >= c_min);
                }
            } else {
                prop_assert_eq!(m.len(), 1);
            }
            // monotone assignment
            let mut last = 0;
            for k in 0..200 {
                let b = m.bucket(k as f64);
                prop_assert!(b >= last);
                last = b;
            }
        }
    }
}
