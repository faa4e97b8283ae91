//! Small dense vector and symmetric-matrix helpers.
//!
//! Dimensions here are tiny (the ambient space of the measure), so a cyclic
//! Jacobi sweep is enough for every eigenproblem the crate needs.

use crate::Real;

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Real>(a: &[T]) -> T {
    // hypot-style scaling keeps huge coordinates from overflowing
    let scale = a.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let s = a.iter().fold(T::zero(), |acc, &x| {
        let y = x / scale;
        acc + y * y
    });
    scale * s.sqrt()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `a + s·b`
pub fn axpy<T: Real>(a: &[T], s: T, b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + s * y).collect()
}

pub fn distance<T: Real>(a: &[T], b: &[T]) -> T {
    norm(&sub(a, b))
}

/// Dense symmetric matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    /// `self += s · u uᵀ`
    pub fn add_outer(&mut self, s: T, u: &[T]) {
        for i in 0..self.n {
            for j in 0..self.n {
                self.data[i * self.n + j] += s * u[i] * u[j];
            }
        }
    }

    pub fn add_diagonal(&mut self, s: T) {
        for i in 0..self.n {
            self.data[i * self.n + i] += s;
        }
    }

    pub fn add_scaled(&mut self, s: T, other: &Self) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| dot(&self.data[i * self.n..(i + 1) * self.n], v))
            .collect()
    }

    /// Replace the matrix by `(A + Aᵀ)/2`.
    pub fn symmetrize(&mut self) {
        let half = T::lit(0.5);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let m = (self.get(i, j) + self.get(j, i)) * half;
                self.set(i, j, m);
                self.set(j, i, m);
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Eigen-decomposition by cyclic Jacobi rotations, eigenvalues ascending.
    pub fn eigen(&self) -> SymEigen<T> {
        jacobi_eigen(self)
    }
}

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Clone, Debug)]
pub struct SymEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

impl<T: Real> SymEigen<T> {
    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        *self.values.last().expect("non-empty spectrum")
    }

    /// Solve `A z = b` through the decomposition; caller guarantees no zero
    /// eigenvalue.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = b.len();
        let mut z = vec![T::zero(); n];
        for (lambda, q) in self.values.iter().zip(&self.vectors) {
            let c = dot(q, b) / *lambda;
            for i in 0..n {
                z[i] += c * q[i];
            }
        }
        z
    }
}

fn jacobi_eigen<T: Real>(m: &SymMatrix<T>) -> SymEigen<T> {
    let n = m.n;
    let mut a = m.clone();
    a.symmetrize();
    let mut v = SymMatrix::identity(n);

    let off = |a: &SymMatrix<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a.get(i, j) * a.get(i, j);
                }
            }
        }
        s
    };
    let total = a.data.iter().fold(T::zero(), |s, &x| s + x * x);
    let eps = T::epsilon() * T::epsilon();

    for _sweep in 0..100 {
        if off(&a) <= eps * total {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .partial_cmp(&a.get(j, j))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    SymEigen {
        values: order.iter().map(|&i| a.get(i, i)).collect(),
        vectors: order
            .iter()
            .map(|&i| (0..n).map(|k| v.get(k, i)).collect())
            .collect(),
    }
}
