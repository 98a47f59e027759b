//! Row reduction and null spaces over a prime field `F_p`.

use crate::group::mod_inverse;

/// A row-reduced echelon basis: nonzero rows with their pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Echelon {
    pub rows: Vec<Vec<u32>>,
    pub pivots: Vec<usize>,
    pub width: usize,
    pub modulus: u32,
}

/// `sum a_i b_i mod p`.
pub fn dot(a: &[u32], b: &[u32], p: u32) -> u32 {
    let p = p as u64;
    (a.iter().zip(b).map(|(&x, &y)| x as u64 * y as u64 % p).sum::<u64>() % p) as u32
}

/// Reduced row echelon form of the span of `rows` (each of length `width`).
pub fn rref(rows: &[Vec<u32>], width: usize, p: u32) -> Echelon {
    let pm = p as u64;
    let mut m: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|&v| v % p).collect()).collect();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..width {
        let Some(found) = (rank..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(rank, found);
        let inv = mod_inverse(m[rank][col] as u64, pm).expect("nonzero element of a prime field");
        for v in m[rank].iter_mut() {
            *v = (*v as u64 * inv % pm) as u32;
        }
        let pivot_row = m[rank].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == rank || row[col] == 0 {
                continue;
            }
            let f = row[col] as u64;
            for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                *v = ((*v as u64 + pm * pm - f * pv as u64) % pm) as u32;
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    m.truncate(rank);
    Echelon {
        rows: m,
        pivots,
        width,
        modulus: p,
    }
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Basis (itself in echelon form) of `{x : <row, x> = 0 for every row}`.
    pub fn null_space(&self) -> Echelon {
        let p = self.modulus;
        let free: Vec<usize> = (0..self.width).filter(|c| !self.pivots.contains(c)).collect();
        let basis: Vec<Vec<u32>> = free
            .iter()
            .map(|&f| {
                let mut v = vec![0u32; self.width];
                v[f] = 1;
                for (row, &pc) in self.rows.iter().zip(&self.pivots) {
                    v[pc] = (p - row[f]) % p;
                }
                v
            })
            .collect();
        rref(&basis, self.width, p)
    }

    /// Coordinates of `x` in this basis, if `x` lies in the span.
    pub fn coordinates(&self, x: &[u32]) -> Option<Vec<u32>> {
        let p = self.modulus as u64;
        let coeffs: Vec<u32> = self.pivots.iter().map(|&pc| x[pc]).collect();
        let mut recon = vec![0u64; self.width];
        for (row, &a) in self.rows.iter().zip(&coeffs) {
            for (r, &v) in recon.iter_mut().zip(row) {
                *r = (*r + a as u64 * v as u64) % p;
            }
        }
        recon
            .iter()
            .zip(x)
            .all(|(&r, &v)| r == v as u64)
            .then_some(coeffs)
    }

    /// `sum a_j row_j`.
    pub fn combine(&self, coeffs: &[u32]) -> Vec<u32> {
        let p = self.modulus as u64;
        let mut out = vec![0u64; self.width];
        for (row, &a) in self.rows.iter().zip(coeffs) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o = (*o + a as u64 * v as u64) % p;
            }
        }
        out.into_iter().map(|v| v as u32).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_and_null_space() {
        let rows = vec![vec![1, 2, 0], vec![2, 1, 0], vec![0, 0, 0]];
        let e = rref(&rows, 3, 3);
        // (2,1,0) = 2 (1,2,0) mod 3, so rank 1.
        assert_eq!(e.rank(), 1);
        assert_eq!(e.rows, vec![vec![1, 2, 0]]);
        let ns = e.null_space();
        assert_eq!(ns.rank(), 2);
        for v in &ns.rows {
            assert_eq!(dot(v, &e.rows[0], 3), 0);
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let e = rref(&[vec![1, 1, 0, 2], vec![0, 3, 1, 1]], 4, 5);
        for a in 0..5 {
            for b in 0..5 {
                let x = e.combine(&[a, b]);
                assert_eq!(e.coordinates(&x), Some(vec![a, b]));
            }
        }
        let outside = vec![1, 0, 0, 0];
        assert_eq!(e.coordinates(&outside), None);
    }

    #[test]
    fn full_rank_has_trivial_null_space() {
        let e = rref(&[vec![1, 0], vec![1, 1]], 2, 7);
        assert_eq!(e.rank(), 2);
        assert_eq!(e.null_space().rank(), 0);
        let z = rref(&[], 3, 7);
        assert_eq!(z.null_space().rank(), 3);
    }
}
