use serde::{Deserialize, Serialize};

/// Sparse attribute-indexed vector. Indices are strictly increasing and no
/// stored value is zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from arbitrary `(index, value)` pairs: duplicates are summed,
    /// zeros dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut out = SparseVector::new();
        for (i, v) in pairs {
            match out.indices.last() {
                Some(&last) if last == i => *out.values.last_mut().unwrap() += v,
                _ => {
                    out.indices.push(i);
                    out.values.push(v);
                }
            }
        }
        out.drop_zeros();
        out
    }

    fn drop_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let (indices, values) = self
            .indices
            .iter()
            .zip(&self.values)
            .filter(|(_, &v)| v != 0.0)
            .map(|(&i, &v)| (i, v))
            .unzip();
        self.indices = indices;
        self.values = values;
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: u32) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn contains(&self, index: u32) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Dot product with a dense vector; indices past its end contribute 0.
    #[inline]
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.iter()
            .map(|(i, v)| dense.get(i as usize).map_or(0.0, |w| v * w))
            .sum()
    }

    /// Merge-join dot product of two sparse vectors.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut a, mut b) = (0, 0);
        let mut acc = 0.0;
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[a] * other.values[b];
                    a += 1;
                    b += 1;
                }
            }
        }
        acc
    }

    pub fn squared_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// `dense += scale * self`
    pub fn add_to_dense(&self, dense: &mut [f64], scale: f64) {
        for (i, v) in self.iter() {
            dense[i as usize] += scale * v;
        }
    }

    pub fn scaled(&self, factor: f64) -> SparseVector {
        let mut out = SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        };
        out.drop_zeros();
        out
    }

    /// Keeps entries whose index satisfies `keep`.
    pub fn retain(&self, mut keep: impl FnMut(u32) -> bool) -> SparseVector {
        let (indices, values) = self.iter().filter(|&(i, _)| keep(i)).unzip();
        SparseVector { indices, values }
    }

    pub fn map_values(&self, mut f: impl FnMut(u32, f64) -> f64) -> SparseVector {
        let mut out = SparseVector {
            indices: self.indices.clone(),
            values: self.iter().map(|(i, v)| f(i, v)).collect(),
        };
        out.drop_zeros();
        out
    }

    pub fn max_index(&self) -> Option<u32> {
        self.indices.last().copied()
    }
}

impl FromIterator<(u32, f64)> for SparseVector {
    fn from_iter<I: IntoIterator<Item = (u32, f64)>>(iter: I) -> Self {
        SparseVector::from_pairs(iter.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn construction_normalizes() {
        let v = SparseVector::from_pairs(vec![(3, 1.0), (1, 2.0), (3, 1.5), (2, 0.0)]);
        assert_eq!(v.indices(), &[1, 3]);
        assert_eq!(v.values(), &[2.0, 2.5]);
        assert_eq!(v.get(3), 2.5);
        assert_eq!(v.get(2), 0.0);
        let cancelled = SparseVector::from_pairs(vec![(0, 1.0), (0, -1.0)]);
        assert!(cancelled.is_empty());
    }

    #[test]
    fn dots() {
        let a: SparseVector = [(0, 1.0), (2, 3.0)].into_iter().collect();
        let b: SparseVector = [(2, 2.0), (5, 7.0)].into_iter().collect();
        assert_eq!(a.dot(&b), 6.0);
        assert_eq!(b.dot_dense(&[1.0, 1.0, 0.5]), 1.0);
        let mut dense = vec![0.0; 6];
        b.add_to_dense(&mut dense, 2.0);
        assert_eq!(dense, [0.0, 0.0, 4.0, 0.0, 0.0, 14.0]);
    }

    proptest! {
        #[test]
        fn sparse_and_dense_dot_agree(
            a in proptest::collection::vec((0u32..40, -5.0f64..5.0), 0..20),
            b in proptest::collection::vec((0u32..40, -5.0f64..5.0), 0..20),
        ) {
            let a = SparseVector::from_pairs(a);
            let b = SparseVector::from_pairs(b);
            let mut dense = vec![0.0; 40];
            b.add_to_dense(&mut dense, 1.0);
            prop_assert!((a.dot(&b) - a.dot_dense(&dense)).abs() < 1e-9);
            prop_assert!(a.values().iter().all(|&v| v != 0.0));
            prop_assert!(a.indices().windows(2).all(|w| w[0] < w[1]));
        }
    }
}
