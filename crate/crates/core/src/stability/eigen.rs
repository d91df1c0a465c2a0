//! Dense nonsymmetric eigenvalues: balancing, Householder reduction to upper
//! Hessenberg form and Francis double-shift QR with deflation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("matrix rows must have length n".into()));
        }
        Ok(DenseMatrix {
            n,
            data: rows.concat(),
        })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// All eigenvalues of a real square matrix (at most 3000 rows).
pub fn eigenvalues(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    if m.n == 0 {
        return Ok(Vec::new());
    }
    if m.n > 3000 {
        return Err(Error::InvalidParameter(format!("{} rows exceed the dense limit 3000", m.n)));
    }
    if m.data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let mut a = m.clone();
    balance(&mut a);
    hessenberg(&mut a);
    hqr(&mut a)
}

/// Diagonal similarity scaling by powers of 2 so rows and columns have
/// comparable norms (no rounding error is introduced).
fn balance(a: &mut DenseMatrix) {
    const RADIX: f64 = 2.0;
    let n = a.n;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += a.get(j, i).abs();
                    r += a.get(i, j).abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a.data[i * n + j] /= f;
                    a.data[j * n + i] *= f;
                }
            }
        }
    }
}

/// In-place orthogonal similarity to upper Hessenberg form.
fn hessenberg(a: &mut DenseMatrix) {
    let n = a.n;
    let mut v = vec![0.0; n];
    let mut s = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let len = n - k - 1;
        let mut norm2 = 0.0;
        for i in 0..len {
            v[i] = a.get(k + 1 + i, k);
            norm2 += v[i] * v[i];
        }
        if norm2 == 0.0 {
            continue;
        }
        let alpha = -v[0].signum() * norm2.sqrt();
        v[0] -= alpha;
        let vv = v[..len].iter().map(|x| x * x).sum::<f64>();
        if vv == 0.0 {
            continue;
        }
        let beta = 2.0 / vv;
        // left: rows k+1.., columns k..
        s[k..n].iter_mut().for_each(|x| *x = 0.0);
        for i in 0..len {
            let row = &a.data[(k + 1 + i) * n..(k + 2 + i) * n];
            for j in k..n {
                s[j] += v[i] * row[j];
            }
        }
        for i in 0..len {
            let f = beta * v[i];
            let row = &mut a.data[(k + 1 + i) * n..(k + 2 + i) * n];
            for j in k..n {
                row[j] -= f * s[j];
            }
        }
        // right: all rows, columns k+1..
        for i in 0..n {
            let row = &mut a.data[i * n..(i + 1) * n];
            let dot: f64 = row[k + 1..].iter().zip(&v[..len]).map(|(x, y)| x * y).sum();
            let f = beta * dot;
            for (x, y) in row[k + 1..].iter_mut().zip(&v[..len]) {
                *x -= f * y;
            }
        }
        a.set(k + 1, k, alpha);
        for i in k + 2..n {
            a.set(i, k, 0.0);
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix (destroyed).
fn hqr(a: &mut DenseMatrix) -> Result<Vec<Complex64>> {
    let n = a.n;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a.get(i, j).abs();
        }
    }
    let max_sweeps = 30 * n;
    let mut sweeps = 0;
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            // look for a negligible subdiagonal element
            let mut l = nu;
            while l >= 1 {
                let mut s = a.get(l - 1, l - 1).abs() + a.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.get(l, l - 1).abs() + s == s {
                    a.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = a.get(nu, nu);
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a.get(nu - 1, nu - 1);
            let mut w = a.get(nu, nu - 1) * a.get(nu - 1, nu);
            if l + 1 == nu {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if sweeps >= max_sweeps {
                return Err(Error::Convergence(sweeps));
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a.add(i, i, -x);
                }
                let s = a.get(nu, nu - 1).abs() + a.get(nu - 1, nu - 2).abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;
            // two consecutive small subdiagonal elements
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a.get(m, m);
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a.get(m + 1, m) + a.get(m, m + 1);
                q = a.get(m + 1, m + 1) - z - rr - ss;
                r = a.get(m + 2, m + 1);
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a.get(m, m - 1).abs() * (q.abs() + r.abs());
                let v = p.abs() * (a.get(m - 1, m - 1).abs() + z.abs() + a.get(m + 1, m + 1).abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a.set(i, i - 2, 0.0);
                if i != m + 2 {
                    a.set(i, i - 3, 0.0);
                }
            }
            // double QR step on rows l..=nn, columns m..=nn
            let mut k = m;
            while k + 1 <= nu {
                if k != m {
                    p = a.get(k, k - 1);
                    q = a.get(k + 1, k - 1);
                    r = if k + 1 != nu { a.get(k + 2, k - 1) } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            let v = a.get(k, k - 1);
                            a.set(k, k - 1, -v);
                        }
                    } else {
                        a.set(k, k - 1, -s * x);
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    let last = k + 1 == nu;
                    for j in k..=nu {
                        let mut pp = a.get(k, j) + q * a.get(k + 1, j);
                        if !last {
                            pp += r * a.get(k + 2, j);
                            a.add(k + 2, j, -pp * z);
                        }
                        a.add(k + 1, j, -pp * y);
                        a.add(k, j, -pp * x);
                    }
                    let mmin = nu.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a.get(i, k) + y * a.get(i, k + 1);
                        if !last {
                            pp += z * a.get(i, k + 2);
                            a.add(i, k + 2, -pp * r);
                        }
                        a.add(i, k + 1, -pp * q);
                        a.add(i, k, -pp);
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| Complex64::new(re, im)).collect())
}

/// Complex LU with partial pivoting; `None` when exactly singular.
struct ComplexLu {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
}

impl ComplexLu {
    fn new(n: usize, mut lu: Vec<Complex64>) -> Option<Self> {
        let mut piv: Vec<usize> = (0..n).collect();
        for c in 0..n {
            let p = (c..n).max_by(|&a, &b| lu[a * n + c].norm().total_cmp(&lu[b * n + c].norm()))?;
            if lu[p * n + c].norm() == 0.0 {
                return None;
            }
            if p != c {
                for j in 0..n {
                    lu.swap(p * n + j, c * n + j);
                }
                piv.swap(p, c);
            }
            let d = lu[c * n + c];
            for i in c + 1..n {
                let f = lu[i * n + c] / d;
                lu[i * n + c] = f;
                for j in c + 1..n {
                    let u = lu[c * n + j];
                    lu[i * n + j] -= f * u;
                }
            }
        }
        Some(ComplexLu { n, lu, piv })
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// Unit eigenvector for an (approximate) eigenvalue by inverse iteration.
pub fn eigenvector(m: &DenseMatrix, lambda: Complex64) -> Result<Vec<Complex64>> {
    let n = m.n;
    // shift slightly off the eigenvalue so the factorization stays regular
    let shift = lambda + Complex64::new(1e-10, 1e-10) * (1.0 + m.norm());
    let mut a: Vec<Complex64> = m.data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    for i in 0..n {
        a[i * n + i] -= shift;
    }
    let lu = ComplexLu::new(n, a).ok_or_else(|| Error::Domain("shifted matrix singular".into()))?;
    let mut v: Vec<Complex64> = (0..n).map(|k| Complex64::new(1.0, 0.3 * k as f64 / n as f64)).collect();
    for _ in 0..3 {
        v = lu.solve(&v);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
    }
    Ok(v)
}
