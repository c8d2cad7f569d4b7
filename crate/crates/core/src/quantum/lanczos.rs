//! Extremal-eigenvalue estimation for Hermitian matrices (Lanczos with full
//! reorthogonalization + Sturm bisection on the tridiagonal reduction).
//! Used for the positivity spot checks during propagation.

use ndarray::Array2;
use num_complex::Complex64;

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn matvec(a: &Array2<Complex64>, v: &[Complex64], out: &mut [Complex64]) {
    let n = v.len();
    let data = a.as_slice().expect("contiguous matrix");
    for i in 0..n {
        let row = &data[i * n..(i + 1) * n];
        let mut acc = Complex64::default();
        for j in 0..n {
            acc += row[j] * v[j];
        }
        out[i] = acc;
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Number of eigenvalues of the symmetric tridiagonal (alpha, beta) strictly
/// below x, via the Sturm sequence.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0f64;
    for i in 0..alpha.len() {
        let b2 = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - b2 / d;
        if d == 0.0 {
            d = 1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiag_min_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for i in 0..alpha.len() {
        let bl = if i == 0 { 0.0 } else { beta[i - 1].abs() };
        let br = if i < beta.len() { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - bl - br);
        hi = hi.max(alpha[i] + bl + br);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(alpha, beta, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Estimate the smallest eigenvalue of a Hermitian matrix. `steps` Krylov
/// iterations from a fixed pseudo-random start vector; extremal eigenvalues
/// converge first, which is all the positivity monitor needs.
pub fn min_eigenvalue(a: &Array2<Complex64>, steps: usize) -> f64 {
    let n = a.nrows();
    let m = steps.min(n);
    let mut rng_state = 0x5EED5EED5EEDu64;
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| {
            let r = (splitmix(&mut rng_state) >> 11) as f64 / (1u64 << 53) as f64;
            Complex64::new(r - 0.5, 0.0)
        })
        .collect();
    let norm = dot(&v, &v).re.sqrt();
    for z in &mut v {
        *z /= norm;
    }

    let mut basis: Vec<Vec<Complex64>> = vec![v.clone()];
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![Complex64::default(); n];

    for j in 0..m {
        matvec(a, &basis[j], &mut w);
        let aj = dot(&basis[j], &w).re;
        alpha.push(aj);
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= *vi * aj;
        }
        if j > 0 {
            let bj = beta[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= *vi * bj;
            }
        }
        // full reorthogonalization keeps the small spectrum clean
        for prev in &basis {
            let c = dot(prev, &w);
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= *pi * c;
            }
        }
        let b = dot(&w, &w).re.sqrt();
        if b < 1e-13 || j + 1 == m {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|z| z / b).collect());
    }
    tridiag_min_eigenvalue(&alpha, &beta)
}
