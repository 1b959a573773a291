//! Dense `d × d` matrices stored row-major in slices of length `d²`.

pub fn trace(a: &[f64], d: usize) -> f64 {
    (0..d).map(|i| a[i * d + i]).sum()
}

pub fn transpose(a: &[f64], d: usize) -> Vec<f64> {
    let mut t = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            t[j * d + i] = a[i * d + j];
        }
    }
    t
}

/// Frobenius product `A : B`.
pub fn contract(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn symmetric_part(a: &[f64], d: usize) -> Vec<f64> {
    let t = transpose(a, d);
    a.iter().zip(&t).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// `T(A) = A + Aᵀ - (2/d) tr(A) I`; identically zero for `d = 1`.
pub fn traceless(a: &[f64], d: usize) -> Vec<f64> {
    assert_eq!(a.len(), d * d, "matrix size does not match dimension");
    let tr = trace(a, d);
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = a[i * d + j] + a[j * d + i];
        }
        out[i * d + i] -= 2.0 / d as f64 * tr;
    }
    if d == 1 {
        out[0] = 0.0;
    }
    out
}

/// Newtonian stress `μ(D - tr(D)/d I) + λ tr(D) I`.
pub fn stress(dm: &[f64], mu: f64, lambda: f64, d: usize) -> Vec<f64> {
    assert_eq!(dm.len(), d * d, "matrix size does not match dimension");
    let tr = trace(dm, d);
    let mut out: Vec<f64> = dm.iter().map(|x| mu * x).collect();
    for i in 0..d {
        out[i * d + i] += (lambda - mu / d as f64) * tr;
    }
    if d == 1 {
        out[0] = lambda * dm[0];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn traceless_examples() {
        assert_eq!(traceless(&[1.0, 0.0, 0.0, 0.0], 2), vec![1.0, 0.0, 0.0, -1.0]);
        assert_eq!(traceless(&[3.7], 1), vec![0.0]);
        let a = [1.0, 2.0, 3.0, 4.0];
        let t = traceless(&a, 2);
        assert!((contract(&t, &t) - 2.0 * contract(&t, &a)).abs() < 1e-12);
        assert_eq!(trace(&t, 2), 0.0);
    }

    #[test]
    fn stress_examples() {
        assert_eq!(stress(&[1.0, 0.0, 0.0, 1.0], 2.0, 1.0, 2), vec![2.0, 0.0, 0.0, 2.0]);
        assert_eq!(stress(&[0.0; 9], 1.0, 1.0, 3), vec![0.0; 9]);
        assert_eq!(stress(&[0.5], 3.0, 2.0, 1), vec![1.0]);
    }
}
