//! Dense row-major lattice storage.

use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

/// Rectangular lattice of values indexed by `(m, n)` with `m` in `0..rows`
/// and `n` in `0..cols`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Grid<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            for n in 0..cols {
                data.push(f(m, n));
            }
        }
        Grid { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "grid data length mismatch");
        Grid { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, m: usize, n: usize) -> Option<&T> {
        if m < self.rows && n < self.cols {
            Some(&self.data[m * self.cols + n])
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        let cols = self.cols;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| ((i / cols, i % cols), v))
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(&mut f).collect(),
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T: Clone> Grid<T> {
    pub fn fill(rows: usize, cols: usize, value: T) -> Self {
        Grid {
            rows,
            cols,
            data: alloc::vec![value; rows * cols],
        }
    }
}

impl<T> Index<(usize, usize)> for Grid<T> {
    type Output = T;
    fn index(&self, (m, n): (usize, usize)) -> &T {
        assert!(m < self.rows && n < self.cols, "grid index out of range");
        &self.data[m * self.cols + n]
    }
}

impl<T> IndexMut<(usize, usize)> for Grid<T> {
    fn index_mut(&mut self, (m, n): (usize, usize)) -> &mut T {
        assert!(m < self.rows && n < self.cols, "grid index out of range");
        &mut self.data[m * self.cols + n]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let g = Grid::from_fn(3, 4, |m, n| 10 * m + n);
        assert_eq!(g[(2, 3)], 23);
        assert_eq!(g.get(3, 0), None);
        assert_eq!(g.iter().count(), 12);
    }
}
