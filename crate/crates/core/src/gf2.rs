//! Bit-vector linear algebra over GF(2).
//!
//! Vectors of length up to 64 are packed into `u64` words, bit `i` holding
//! coordinate `i`. A linear functional is represented by the same packing and
//! evaluated as the parity of a bitwise AND.

use std::fmt;

/// Parity of `row · v` over GF(2).
#[inline]
pub fn dot(row: u64, v: u64) -> bool {
    (row & v).count_ones() & 1 == 1
}

#[inline]
fn low_mask(nbits: usize) -> u64 {
    if nbits >= 64 {
        u64::MAX
    } else {
        (1u64 << nbits) - 1
    }
}

/// Reduced row echelon form with pivots on the highest set bit.
///
/// Rows are returned sorted by decreasing pivot and every pivot column is
/// cleared in all other rows, which makes the result a canonical basis of the
/// spanned subspace.
pub fn rref<I: IntoIterator<Item = u64>>(vectors: I) -> Vec<u64> {
    let mut rows: Vec<u64> = Vec::new();
    for mut v in vectors {
        for &r in &rows {
            let pivot = 63 - r.leading_zeros();
            if v >> pivot & 1 == 1 {
                v ^= r;
            }
        }
        if v == 0 {
            continue;
        }
        let pivot = 63 - v.leading_zeros();
        for r in rows.iter_mut() {
            if *r >> pivot & 1 == 1 {
                *r ^= v;
            }
        }
        rows.push(v);
    }
    rows.sort_unstable_by(|a, b| b.cmp(a));
    rows
}

/// Basis of `{v in GF(2)^nbits : dot(f, v) = 0 for every f}`.
pub fn kernel(functionals: &[u64], nbits: usize) -> Vec<u64> {
    let mask = low_mask(nbits);
    let rows = rref(functionals.iter().map(|f| f & mask));
    let mut pivots = 0u64;
    for &r in &rows {
        pivots |= 1 << (63 - r.leading_zeros());
    }
    let mut basis = Vec::new();
    for c in 0..nbits {
        if pivots >> c & 1 == 1 {
            continue;
        }
        let mut v = 1u64 << c;
        for &r in &rows {
            if r >> c & 1 == 1 {
                v |= 1 << (63 - r.leading_zeros());
            }
        }
        basis.push(v);
    }
    basis
}

/// A linear subspace of GF(2)^n stored by its canonical basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<u64>,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self::span(ambient, (0..ambient).map(|i| 1u64 << i))
    }

    pub fn span<I: IntoIterator<Item = u64>>(ambient: usize, vectors: I) -> Self {
        let mask = low_mask(ambient);
        Subspace {
            ambient,
            basis: rref(vectors.into_iter().map(|v| v & mask)),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[u64] {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient
    }

    pub fn contains(&self, mut v: u64) -> bool {
        if v & !low_mask(self.ambient) != 0 {
            return false;
        }
        for &r in &self.basis {
            let pivot = 63 - r.leading_zeros();
            if v >> pivot & 1 == 1 {
                v ^= r;
            }
        }
        v == 0
    }

    /// Basis of the orthogonal complement, i.e. functionals cutting out `self`.
    pub fn annihilator(&self) -> Vec<u64> {
        kernel(&self.basis, self.ambient)
    }

    /// All `2^dim` elements, in no particular order.
    pub fn elements(&self) -> Vec<u64> {
        let mut out = vec![0u64];
        for &b in &self.basis {
            let n = out.len();
            for i in 0..n {
                out.push(out[i] ^ b);
            }
        }
        out
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subspace(dim {}/{}: [", self.dim(), self.ambient)?;
        for (i, b) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:0width$b}", b, width = self.ambient.max(1))?;
        }
        write!(f, "])")
    }
}

/// Solve `rows · x = rhs` over GF(2), where `rows[i]` is equation `i` packed
/// over `nvars` unknowns and `rhs` packs the right-hand sides. Returns one
/// solution (free variables set to zero) or `None` when inconsistent.
pub fn solve(rows: &[u64], rhs: u64, nvars: usize) -> Option<u64> {
    // augment each equation with its right-hand side at bit `nvars`
    let aug: Vec<u64> = rows
        .iter()
        .enumerate()
        .map(|(i, &r)| (r & low_mask(nvars)) | (((rhs >> i) & 1) << nvars))
        .collect();
    // pivot on lowest variable bit so the augmented bit never becomes a pivot
    // unless the system is inconsistent
    let mut reduced: Vec<u64> = Vec::new();
    for mut v in aug {
        for &r in &reduced {
            let p = r.trailing_zeros();
            if v >> p & 1 == 1 {
                v ^= r;
            }
        }
        if v == 0 {
            continue;
        }
        let p = v.trailing_zeros();
        if p as usize >= nvars {
            return None;
        }
        for r in reduced.iter_mut() {
            if *r >> p & 1 == 1 {
                *r ^= v;
            }
        }
        reduced.push(v);
    }
    let mut x = 0u64;
    for &r in &reduced {
        if r >> nvars & 1 == 1 {
            x |= 1 << r.trailing_zeros();
        }
    }
    Some(x)
}
