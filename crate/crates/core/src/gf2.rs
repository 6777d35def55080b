//! Dense GF(2) row reduction with combination tracking.

/// A bit row packed into `u64` words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitRow {
    words: Vec<u64>,
    len: usize,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        let m = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= m;
        } else {
            self.words[i / 64] &= !m;
        }
    }

    pub fn xor_with(&mut self, other: &BitRow) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                let i = k * 64 + w.trailing_zeros() as usize;
                return (i < self.len).then_some(i);
            }
        }
        None
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

/// Reduced echelon basis of a row space. Every stored row remembers which
/// input rows XOR together to produce it.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    width: usize,
    inputs: usize,
    rows: Vec<(usize, BitRow, BitRow)>,
}

impl EchelonBasis {
    /// Reduces `rows` (all of width `width`). Returns the basis together with
    /// the indices of input rows that were linearly dependent on earlier ones.
    pub fn build(width: usize, rows: &[BitRow]) -> (Self, Vec<usize>) {
        let mut basis = EchelonBasis { width, inputs: rows.len(), rows: Vec::new() };
        let mut dependent = Vec::new();
        for (k, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), width);
            let mut combo = BitRow::zeros(rows.len());
            combo.set(k, true);
            if !basis.insert(r.clone(), combo) {
                dependent.push(k);
            }
        }
        (basis, dependent)
    }

    fn insert(&mut self, mut row: BitRow, mut combo: BitRow) -> bool {
        for (pivot, brow, bcombo) in &self.rows {
            if row.get(*pivot) {
                row.xor_with(brow);
                combo.xor_with(bcombo);
            }
        }
        let Some(pivot) = row.first_one() else {
            return false;
        };
        for (_, brow, bcombo) in self.rows.iter_mut() {
            if brow.get(pivot) {
                brow.xor_with(&row);
                bcombo.xor_with(&combo);
            }
        }
        self.rows.push((pivot, row, combo));
        true
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Expresses `target` as a combination of input rows, or `None` if it is
    /// outside the span.
    pub fn decompose(&self, target: &BitRow) -> Option<BitRow> {
        let mut row = target.clone();
        let mut combo = BitRow::zeros(self.inputs);
        for (pivot, brow, bcombo) in &self.rows {
            if row.get(*pivot) {
                row.xor_with(brow);
                combo.xor_with(bcombo);
            }
        }
        row.is_zero().then_some(combo)
    }
}

/// Rank of a set of rows.
pub fn rank(width: usize, rows: &[BitRow]) -> usize {
    EchelonBasis::build(width, rows).0.rank()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(bits: &str) -> BitRow {
        let mut r = BitRow::zeros(bits.len());
        for (i, c) in bits.chars().enumerate() {
            r.set(i, c == '1');
        }
        r
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![row("1100"), row("0110"), row("1010")];
        let (b, dep) = EchelonBasis::build(4, &rows);
        assert_eq!(b.rank(), 2);
        assert_eq!(dep, vec![2]);
    }

    #[test]
    fn decomposition_reproduces_target() {
        let rows = vec![row("1100"), row("0110"), row("0001")];
        let (b, _) = EchelonBasis::build(4, &rows);
        let target = row("1011");
        let combo = b.decompose(&target).unwrap();
        let mut acc = BitRow::zeros(4);
        for k in combo.ones() {
            acc.xor_with(&rows[k]);
        }
        assert_eq!(acc, target);
        assert!(b.decompose(&row("1000")).is_none());
    }
}
