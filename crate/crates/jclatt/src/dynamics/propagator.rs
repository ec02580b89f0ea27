//! Chebyshev propagation on invariant sectors of a sparse Hamiltonian.
//!
//! Vectors are stored row-major as `dim × ncol` blocks so that a single
//! sweep over the sparse entries acts on every column at once.

use crate::model::SparseMatrix;
use crate::C64;

/// Connected components of the sparsity graph, each sorted ascending,
/// ordered by smallest member.
pub(crate) fn components(pattern: &SparseMatrix) -> Vec<Vec<usize>> {
    let mut uf = UnionFind::new(pattern.dim());
    for i in 0..pattern.dim() {
        for (j, _) in pattern.row(i) {
            uf.union(i, j);
        }
    }
    uf.classes()
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Returns true when two classes were merged.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub(crate) fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}

/// The restriction of a Hamiltonian pattern to one invariant set of states.
/// Entry values are looked up in the full pattern's value array, so any
/// assembled H(t) can be applied without copying.
#[derive(Clone, Debug)]
pub(crate) struct Sector {
    pub states: Vec<usize>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    src: Vec<usize>,
}

impl Sector {
    pub(crate) fn new(pattern: &SparseMatrix, states: Vec<usize>) -> Self {
        let mut local = std::collections::HashMap::with_capacity(states.len());
        for (k, &s) in states.iter().enumerate() {
            local.insert(s, k);
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut src = Vec::new();
        for &s in &states {
            let (a, b) = (pattern.row_ptr()[s], pattern.row_ptr()[s + 1]);
            for idx in a..b {
                let j = pattern.cols()[idx];
                let lj = *local.get(&j).expect("sector not closed under the Hamiltonian");
                cols.push(lj);
                src.push(idx);
            }
            row_ptr.push(cols.len());
        }
        Sector { states, row_ptr, cols, src }
    }

    pub(crate) fn dim(&self) -> usize {
        self.states.len()
    }

    /// Gershgorin enclosure of the spectrum for assembled values `vals`.
    pub(crate) fn bounds(&self, vals: &[C64]) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim() {
            let mut c = 0.0;
            let mut r = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = vals[self.src[p]];
                if self.cols[p] == i {
                    c = v.re;
                } else {
                    r += v.norm();
                }
            }
            lo = lo.min(c - r);
            hi = hi.max(c + r);
        }
        if lo > hi {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    /// y = a·(H − shift)·x + b·z, row-major with `ncol` columns.
    #[allow(clippy::too_many_arguments)]
    fn affine(&self, vals: &[C64], shift: f64, a: f64, x: &[C64], b: f64, z: &[C64], y: &mut [C64], ncol: usize) {
        for i in 0..self.dim() {
            let yi = &mut y[i * ncol..(i + 1) * ncol];
            let xi = &x[i * ncol..(i + 1) * ncol];
            let zi = &z[i * ncol..(i + 1) * ncol];
            for c in 0..ncol {
                yi[c] = zi[c] * b - xi[c] * (a * shift);
            }
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = vals[self.src[p]] * a;
                let j = self.cols[p];
                let xj = &x[j * ncol..(j + 1) * ncol];
                for c in 0..ncol {
                    yi[c] += v * xj[c];
                }
            }
        }
    }

    /// x ← exp(−i H τ) x by a Chebyshev series; returns the number of terms.
    pub(crate) fn expm(&self, vals: &[C64], tau: f64, x: &mut [C64], ncol: usize, tol: f64, work: &mut ChebWork) -> usize {
        let (lo, hi) = self.bounds(vals);
        let centre = 0.5 * (hi + lo);
        let radius = (0.5 * (hi - lo)).max(1e-300) * (1.0 + 1e-12);
        let z = radius * tau;
        let coef = bessel_series(z, tol);
        let n = x.len();
        work.resize(n);
        let ChebWork { prev, cur, next, acc } = work;
        let phase = C64::from_polar(1.0, -centre * tau);
        prev.copy_from_slice(x);
        for (a, v) in acc.iter_mut().zip(x.iter()) {
            *a = v * coef[0];
        }
        if coef.len() > 1 {
            let s = 1.0 / radius;
            self.affine(vals, centre, s, prev, 0.0, prev, cur, ncol);
            let c1 = C64::new(0.0, -2.0) * coef[1];
            for (a, v) in acc.iter_mut().zip(cur.iter()) {
                *a += v * c1;
            }
            let mut mi = C64::new(0.0, -1.0);
            mi *= mi;
            let mut ipow = mi; // (−i)^2
            for &jk in &coef[2..] {
                self.affine(vals, centre, 2.0 * s, cur, -1.0, prev, next, ncol);
                let ck = ipow * (2.0 * jk);
                for (a, v) in acc.iter_mut().zip(next.iter()) {
                    *a += v * ck;
                }
                std::mem::swap(prev, cur);
                std::mem::swap(cur, next);
                ipow *= C64::new(0.0, -1.0);
            }
        }
        for (xv, a) in x.iter_mut().zip(acc.iter()) {
            *xv = a * phase;
        }
        coef.len()
    }
}

#[derive(Default)]
pub(crate) struct ChebWork {
    prev: Vec<C64>,
    cur: Vec<C64>,
    next: Vec<C64>,
    acc: Vec<C64>,
}

impl ChebWork {
    fn resize(&mut self, n: usize) {
        for v in [&mut self.prev, &mut self.cur, &mut self.next, &mut self.acc] {
            v.resize(n, C64::new(0.0, 0.0));
        }
    }
}

/// J_0(z), J_1(z), … up to the first order beyond z where |J_k| < tol.
pub(crate) fn bessel_series(z: f64, tol: f64) -> Vec<f64> {
    // J_1(z) ≈ z/2 is below any useful tolerance here.
    if z < 1e-15 {
        return vec![1.0];
    }
    let j = bessel_j(z, z.ceil() as usize + 40 + (4.0 * z.cbrt()) as usize);
    let mut end = j.len();
    for k in (z.ceil() as usize)..j.len() {
        if j[k].abs() < tol && (k + 1 >= j.len() || j[k + 1].abs() < tol) {
            end = k + 1;
            break;
        }
    }
    j[..end].to_vec()
}

/// J_0(z)..J_kmax(z) for z > 0 by Miller's backward recurrence normalized
/// with J_0 + 2ΣJ_2k = 1.
pub(crate) fn bessel_j(z: f64, kmax: usize) -> Vec<f64> {
    let start = {
        let s = kmax + 20 + (10.0 * (kmax as f64).sqrt()) as usize;
        s + s % 2
    };
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / z * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
            sum *= 1e-250;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            sum += 2.0 * j[k - 1];
        }
    }
    sum += j[0];
    j.truncate(kmax + 1);
    j.iter().map(|v| v / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitary;
    use nalgebra::DMatrix;

    #[test]
    fn bessel_values() {
        let j = bessel_j(1.0, 10);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-15);
        let j = bessel_j(4.0, 10);
        assert!((j[5] - 0.132_086_656_047_098_8).abs() < 1e-14);
        let j = bessel_j(50.0, 80);
        assert!((j[0] - 0.055_812_327_669_251_86).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_matches_dense_exponential() {
        let h = DMatrix::from_fn(6, 6, |i, j| {
            let x = (i * 7 + j * 3) as f64;
            let v = C64::new((x * 0.37).sin(), if i == j { 0.0 } else { (x * 0.11).cos() });
            if i == j {
                C64::new(100.0 * i as f64, 0.0)
            } else {
                v
            }
        });
        let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
        let sp = SparseMatrix::from_dense(&h);
        let sec = Sector::new(&sp, (0..6).collect());
        let mut x: Vec<C64> = (0..12).map(|k| C64::new((k as f64).cos(), (k as f64 * 0.3).sin())).collect();
        let x0 = x.clone();
        let tau = 0.037;
        let mut w = ChebWork::default();
        sec.expm(sp.values(), tau, &mut x, 2, 1e-15, &mut w);
        let u = unitary(&h, tau);
        for c in 0..2 {
            for i in 0..6 {
                let want: C64 = (0..6).map(|j| u[(i, j)] * x0[j * 2 + c]).sum();
                assert!((want - x[i * 2 + c]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn components_split_block_diagonal() {
        let sp = SparseMatrix::from_triplets(
            4,
            vec![(0, 2, C64::new(1.0, 0.0)), (2, 0, C64::new(1.0, 0.0)), (1, 1, C64::new(2.0, 0.0))],
        );
        assert_eq!(components(&sp), vec![vec![0, 2], vec![1], vec![3]]);
    }
}
