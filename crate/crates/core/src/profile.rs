use alloc::vec::Vec;

use crate::Site;

/// A real-valued function on a contiguous range of lattice sites,
/// `values[i]` being the value at `x_min + i`.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Profile {
    x_min: Site,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(x_min: Site, values: Vec<f64>) -> Self {
        Profile { x_min, values }
    }

    pub fn zeros(x_min: Site, x_max: Site) -> Self {
        let len = if x_max >= x_min { (x_max - x_min + 1) as usize } else { 0 };
        Profile { x_min, values: alloc::vec![0.0; len] }
    }

    pub fn x_min(&self) -> Site {
        self.x_min
    }

    /// Last site covered; `x_min - 1` when empty.
    pub fn x_max(&self) -> Site {
        self.x_min + self.values.len() as Site - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Value at `x`, zero outside the covered range.
    pub fn get(&self, x: Site) -> f64 {
        if x < self.x_min {
            return 0.0;
        }
        self.values.get((x - self.x_min) as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        self.values.iter().enumerate().map(move |(i, &v)| (self.x_min + i as Site, v))
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `sum_x |a(x) - b(x)|` over the union of both ranges.
    pub fn l1_distance(&self, other: &Profile) -> f64 {
        self.union_range(other)
            .map(|x| (self.get(x) - other.get(x)).abs())
            .sum()
    }

    /// `max_x |a(x) - b(x)|` over the union of both ranges.
    pub fn max_abs_diff(&self, other: &Profile) -> f64 {
        self.union_range(other)
            .map(|x| (self.get(x) - other.get(x)).abs())
            .fold(0.0, f64::max)
    }

    fn union_range(&self, other: &Profile) -> core::ops::RangeInclusive<Site> {
        let lo = self.x_min.min(other.x_min);
        let hi = self.x_max().max(other.x_max());
        lo..=hi
    }
}
