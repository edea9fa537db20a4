//! Fenwick tree over nonnegative integer weights, used for O(log n)
//! weighted sampling of stubs during network matching.

#[derive(Debug, Clone)]
pub struct Fenwick {
    tree: Vec<u64>,
    n: usize,
}

impl Fenwick {
    pub fn from_weights(weights: &[u64]) -> Self {
        let n = weights.len();
        let mut tree = vec![0u64; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            let mut idx = i + 1;
            while idx <= n {
                tree[idx] += w;
                idx += idx & idx.wrapping_neg();
            }
        }
        Fenwick { tree, n }
    }

    pub fn total(&self) -> u64 {
        self.prefix_sum(self.n)
    }

    /// Sum of weights for indices < end.
    pub fn prefix_sum(&self, end: usize) -> u64 {
        let mut idx = end.min(self.n);
        let mut s = 0;
        while idx > 0 {
            s += self.tree[idx];
            idx -= idx & idx.wrapping_neg();
        }
        s
    }

    pub fn add(&mut self, i: usize, delta: i64) {
        let mut idx = i + 1;
        while idx <= self.n {
            self.tree[idx] = (self.tree[idx] as i64 + delta) as u64;
            idx += idx & idx.wrapping_neg();
        }
    }

    /// Index i such that prefix_sum(i) <= target < prefix_sum(i+1).
    /// `target` must be < total().
    pub fn find(&self, mut target: u64) -> usize {
        let mut pos = 0usize;
        let mut step = self.n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= self.n && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos
    }
}
