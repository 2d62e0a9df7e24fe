use crate::model::Var;

pub(crate) const NONE: u32 = u32::MAX;

/// Dense augmented GF(2) matrix over one connected component of XOR
/// variables. Each row keeps a basic column (appearing in no other row) and
/// one watched non-basic column.
#[derive(Debug, Clone)]
pub struct GaussMatrix {
    pub(crate) cols: Vec<Var>,
    words: usize,
    bits: Vec<u64>,
    pub(crate) rhs: Vec<bool>,
    pub(crate) basic: Vec<u32>,
    pub(crate) watch: Vec<u32>,
}

/// The rows reduce to `0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inconsistent;

impl GaussMatrix {
    /// Builds the matrix and brings it to reduced row-echelon form. Zero
    /// rows are dropped.
    pub fn build(cols: Vec<Var>, rows: &[(Vec<u32>, bool)]) -> Result<GaussMatrix, Inconsistent> {
        let words = cols.len().div_ceil(64).max(1);
        let mut m = GaussMatrix {
            cols,
            words,
            bits: vec![0; rows.len() * words],
            rhs: Vec::with_capacity(rows.len()),
            basic: Vec::new(),
            watch: Vec::new(),
        };
        for (r, (cs, rhs)) in rows.iter().enumerate() {
            for &c in cs {
                m.bits[r * words + (c as usize >> 6)] ^= 1u64 << (c & 63);
            }
            m.rhs.push(*rhs);
        }
        m.reduce()?;
        Ok(m)
    }

    fn reduce(&mut self) -> Result<(), Inconsistent> {
        let nrows = self.rhs.len();
        let mut pivot_row = 0;
        for c in 0..self.cols.len() as u32 {
            if pivot_row == nrows {
                break;
            }
            let Some(r) = (pivot_row..nrows).find(|&r| self.has(r, c)) else {
                continue;
            };
            self.swap_rows(r, pivot_row);
            for other in 0..nrows {
                if other != pivot_row && self.has(other, c) {
                    self.xor_row_into(pivot_row, other);
                }
            }
            self.basic.push(c);
            pivot_row += 1;
        }
        if self.rhs[pivot_row..].iter().any(|&b| b) {
            return Err(Inconsistent);
        }
        self.bits.truncate(pivot_row * self.words);
        self.rhs.truncate(pivot_row);
        self.watch = (0..pivot_row)
            .map(|r| {
                let b = self.basic[r];
                self.iter_row(r).find(|&c| c != b).unwrap_or(NONE)
            })
            .collect();
        Ok(())
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn vars(&self) -> &[Var] {
        &self.cols
    }

    #[inline]
    pub(crate) fn has(&self, r: usize, c: u32) -> bool {
        self.bits[r * self.words + (c as usize >> 6)] >> (c & 63) & 1 == 1
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words {
            self.bits.swap(a * self.words + w, b * self.words + w);
        }
        self.rhs.swap(a, b);
    }

    /// `dst ^= src`, including the right-hand side.
    pub(crate) fn xor_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words;
        for i in 0..w {
            let s = self.bits[src * w + i];
            self.bits[dst * w + i] ^= s;
        }
        self.rhs[dst] ^= self.rhs[src];
    }

    /// Column indices of row `r` in ascending order.
    pub(crate) fn iter_row(&self, r: usize) -> impl Iterator<Item = u32> + '_ {
        let row = &self.bits[r * self.words..(r + 1) * self.words];
        row.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros();
                w &= w - 1;
                Some(wi as u32 * 64 + tz)
            })
        })
    }

    pub(crate) fn row_vars(&self, r: usize) -> Vec<Var> {
        self.iter_row(r).map(|c| self.cols[c as usize]).collect()
    }

    /// Makes `c` the basic column of row `r` by eliminating it from every
    /// other row. Returns the rows that changed.
    pub(crate) fn pivot(&mut self, r: usize, c: u32) -> Vec<usize> {
        debug_assert!(self.has(r, c));
        let mut changed = Vec::new();
        for other in 0..self.num_rows() {
            if other != r && self.has(other, c) {
                self.xor_row_into(r, other);
                changed.push(other);
            }
        }
        self.basic[r] = c;
        if self.watch[r] == c {
            self.watch[r] = NONE;
        }
        changed
    }

    /// Checks the reduced row-echelon invariant: every basic column is set
    /// in its own row and clear in all others.
    pub fn is_reduced(&self) -> bool {
        (0..self.num_rows()).all(|r| {
            let b = self.basic[r];
            self.has(r, b) && (0..self.num_rows()).all(|o| o == r || !self.has(o, b))
        })
    }

    /// Rows as (vars, rhs) pairs.
    pub fn rows(&self) -> Vec<(Vec<Var>, bool)> {
        (0..self.num_rows()).map(|r| (self.row_vars(r), self.rhs[r])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(n: u32) -> Vec<Var> {
        (1..=n).map(Var::new).collect()
    }

    #[test]
    fn reduces_to_echelon_form() {
        // a^b^c = 1, b^c^d = 0, a^d = 1 (dependent: sum of first two)
        let rows = vec![(vec![0, 1, 2], true), (vec![1, 2, 3], false), (vec![0, 3], true)];
        let m = GaussMatrix::build(vars(4), &rows).unwrap();
        assert_eq!(m.num_rows(), 2);
        assert!(m.is_reduced());
    }

    #[test]
    fn contradictory_duplicates() {
        let rows = vec![(vec![0, 1, 2], true), (vec![0, 1, 2], false)];
        assert_eq!(GaussMatrix::build(vars(3), &rows).unwrap_err(), Inconsistent);
    }

    #[test]
    fn wide_rows_span_words() {
        let cols = vars(130);
        let rows = vec![(vec![0, 64, 129], true), (vec![64, 129], false)];
        let m = GaussMatrix::build(cols, &rows).unwrap();
        assert_eq!(m.rows()[0], (vec![Var::new(1)], true));
        assert_eq!(m.iter_row(1).collect::<Vec<_>>(), vec![64, 129]);
    }

    #[test]
    fn pivot_keeps_reduced_form() {
        let rows = vec![(vec![0, 2, 3], true), (vec![1, 2], false)];
        let mut m = GaussMatrix::build(vars(4), &rows).unwrap();
        let changed = m.pivot(0, 2);
        assert_eq!(changed, vec![1]);
        assert!(m.is_reduced());
    }
}
