//! The alternating binomial functional and reconstruction of a unipotent
//! matrix from its k-th powers.
//!
//! A unipotent M = I + T with T^l = 0 lies in the span of {M^(ak)}, because
//! the binomial coefficient polynomials (t choose b), b < l, evaluated at
//! the arithmetic progression 0, k, ..., (l-1)k form an invertible
//! triangular-leading system. The reconstruction solves that system exactly
//! and is verified by matrix reassembly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::Error;
use crate::matrix::Matrix;

/// A square rational matrix M with nilpotent M - I, together with the
/// nilpotency index l: (M-I)^l = 0 and (M-I)^(l-1) != 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnipotentMatrix {
    matrix: Matrix,
    index: u32,
}

impl UnipotentMatrix {
    pub fn new(matrix: Matrix) -> Result<Self, Error> {
        let index = nilpotency_index(&matrix)?;
        Ok(UnipotentMatrix { matrix, index })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn nilpotency_index(&self) -> u32 {
        self.index
    }
}

/// Minimal l with (M - I)^l = 0, or NotUnipotent when no such l <= dim
/// exists.
pub fn nilpotency_index(m: &Matrix) -> Result<u32, Error> {
    assert!(
        m.is_square() && m.rows() > 0,
        "nilpotency_index: matrix must be square"
    );
    let n = m.rows();
    let t = m - &Matrix::identity(n);
    let mut power = Matrix::identity(n);
    for l in 1..=n as u32 {
        power = &power * &t;
        if power.is_zero_matrix() {
            return Ok(l);
        }
    }
    Err(Error::NotUnipotent)
}

/// Exact binomial coefficient as a rational.
fn binomial(n: u32, k: u32) -> BigRational {
    if k > n {
        return BigRational::zero();
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    BigRational::new(num, den)
}

/// Generalized binomial coefficient (t choose b) for rational t.
fn binomial_poly(t: &BigRational, b: u32) -> BigRational {
    let mut num = BigRational::one();
    for i in 0..b {
        num *= t - BigRational::from(BigInt::from(i));
        num /= BigRational::from(BigInt::from(i + 1));
    }
    num
}

/// Evaluate a polynomial given by ascending coefficients.
fn eval_poly(coefficients: &[BigRational], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in coefficients.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// The alternating binomial functional
/// `g_f^{n,y}(x) = sum_{a=0}^{n} (-1)^a f(x + a y) C(n, a)`.
///
/// For polynomial f of degree < n this vanishes identically; for f = x^n it
/// is the constant n! (-y)^n.
pub fn binomial_g(f: &[BigRational], n: u32, y: &BigRational, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for a in 0..=n {
        let point = x + BigRational::from(BigInt::from(a)) * y;
        let term = eval_poly(f, &point) * binomial(n, a);
        if a % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Write M as an exact Q-linear combination of the powers M^(ak),
/// a = 0, ..., l-1, where l is the nilpotency index.
///
/// With M = I + T, expanding M^(ak) = sum_b C(ak, b) T^b reduces the problem
/// to the linear system sum_a c_a C(ak, b) = [b = 0] + [b = 1] over
/// b = 0..l. The system matrix is invertible (distinct evaluation points of
/// a degree-graded polynomial family), and the solution is verified by
/// reassembling the matrix combination entry by entry.
pub fn reconstruct_from_power(m: &UnipotentMatrix, k: u32) -> Result<Vec<BigRational>, Error> {
    assert!(k >= 1, "reconstruct_from_power: k must be positive");
    let l = m.nilpotency_index();
    let mut rows = Vec::with_capacity(l as usize);
    for b in 0..l {
        let row: Vec<BigRational> = (0..l)
            .map(|a| binomial_poly(&BigRational::from(BigInt::from(a * k)), b))
            .collect();
        rows.push(row);
    }
    let system = Matrix::from_rows(rows);
    let mut rhs = vec![BigRational::zero(); l as usize];
    rhs[0] = BigRational::one();
    if l > 1 {
        rhs[1] = BigRational::one();
    }
    let coefficients = system
        .solve(&rhs)
        .expect("binomial evaluation system is invertible");

    // Reassemble and verify: sum_a c_a M^(ak) must equal M exactly.
    let n = m.matrix().rows();
    let mut sum = Matrix::zero(n, n);
    for (a, c) in coefficients.iter().enumerate() {
        sum = &sum + &m.matrix().pow((a as u32 * k) as u64).scale(c);
    }
    assert_eq!(&sum, m.matrix(), "unipotent reconstruction must be exact");
    Ok(coefficients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::parse_matrix;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn poly(coeffs: &[i64]) -> Vec<BigRational> {
        coeffs.iter().map(|&c| rat(c, 1)).collect()
    }

    #[test]
    fn nilpotency_indices() {
        assert_eq!(nilpotency_index(&Matrix::identity(3)).unwrap(), 1);
        assert_eq!(
            nilpotency_index(&parse_matrix("1,1;0,1").unwrap()).unwrap(),
            2
        );
        assert!(matches!(
            nilpotency_index(&parse_matrix("2,0;0,1").unwrap()),
            Err(Error::NotUnipotent)
        ));
        assert_eq!(
            nilpotency_index(&parse_matrix("1,1,0;0,1,1;0,0,1").unwrap()).unwrap(),
            3
        );
    }

    #[test]
    fn binomial_g_kills_low_degree() {
        // f = x^2, n = 3: degree below n vanishes everywhere.
        assert_eq!(
            binomial_g(&poly(&[0, 0, 1]), 3, &rat(2, 1), &rat(5, 1)),
            rat(0, 1)
        );
        // Constant f with n = 1.
        assert_eq!(
            binomial_g(&poly(&[9]), 1, &rat(3, 1), &rat(-2, 1)),
            rat(0, 1)
        );
    }

    #[test]
    fn binomial_g_top_degree_constant() {
        // f = x^3, n = 3, y = 2: the constant 3! (-2)^3 = -48.
        for x in [-3i64, 0, 5, 11] {
            assert_eq!(
                binomial_g(&poly(&[0, 0, 0, 1]), 3, &rat(2, 1), &rat(x, 1)),
                rat(-48, 1)
            );
        }
    }

    #[test]
    fn binomial_g_vanishing_and_constant_sweep() {
        let mut rng = StdRng::seed_from_u64(61);
        for n in 1..=8u32 {
            for _ in 0..12 {
                let y = rat(rng.gen_range(-6..=6i64).max(1), rng.gen_range(1..=4i64));
                // Random polynomial of degree < n.
                let deg = rng.gen_range(0..n) as usize;
                let f: Vec<BigRational> = (0..=deg)
                    .map(|_| rat(rng.gen_range(-9..=9i64), 1))
                    .collect();
                for _ in 0..5 {
                    let x = rat(rng.gen_range(-20..=20i64), rng.gen_range(1..=5i64));
                    assert_eq!(binomial_g(&f, n, &y, &x), rat(0, 1), "n={n}");
                }
                // f = x^n gives the constant n! (-y)^n.
                let mut top = vec![rat(0, 1); n as usize + 1];
                top[n as usize] = rat(1, 1);
                let mut expected = BigRational::one();
                for i in 1..=n {
                    expected *= rat(i as i64, 1);
                }
                let mut ypow = BigRational::one();
                for _ in 0..n {
                    ypow *= -y.clone();
                }
                expected *= ypow;
                let x = rat(rng.gen_range(-20..=20i64), 1);
                assert_eq!(binomial_g(&top, n, &y, &x), expected, "n={n}");
            }
        }
    }

    #[test]
    fn binomial_g_recursion_identity() {
        // g_f^{n,y}(x) = g_f^{n-1,y}(x) - g_f^{n-1,y}(x+y), from the Pascal
        // identity on the coefficients.
        let mut rng = StdRng::seed_from_u64(67);
        for _ in 0..60 {
            let n = rng.gen_range(2..=7u32);
            let deg = rng.gen_range(0..=6) as usize;
            let f: Vec<BigRational> = (0..=deg)
                .map(|_| rat(rng.gen_range(-9..=9i64), 1))
                .collect();
            let y = rat(rng.gen_range(1..=5i64), rng.gen_range(1..=3i64));
            let x = rat(rng.gen_range(-12..=12i64), rng.gen_range(1..=3i64));
            let lhs = binomial_g(&f, n, &y, &x);
            let rhs = binomial_g(&f, n - 1, &y, &x) - binomial_g(&f, n - 1, &y, &(&x + &y));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn reconstruct_identity() {
        let m = UnipotentMatrix::new(Matrix::identity(3)).unwrap();
        assert_eq!(m.nilpotency_index(), 1);
        for k in 1..=5 {
            assert_eq!(reconstruct_from_power(&m, k).unwrap(), vec![rat(1, 1)]);
        }
    }

    #[test]
    fn reconstruct_jordan_block() {
        let m = UnipotentMatrix::new(parse_matrix("1,1;0,1").unwrap()).unwrap();
        let c = reconstruct_from_power(&m, 2).unwrap();
        // (1/2) I + (1/2) M^2 = M since M^(2a) has 2a in the corner.
        assert_eq!(c, vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn reconstruct_random_unipotent() {
        let mut rng = StdRng::seed_from_u64(71);
        for _ in 0..40 {
            let n = rng.gen_range(2..=6usize);
            // Strictly upper triangular T, then conjugate I + T by a
            // unimodular shear to leave triangular shape.
            let mut m = Matrix::identity(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    m[(i, j)] = rat(rng.gen_range(-3..=3i64), 1);
                }
            }
            let mut shear = Matrix::identity(n);
            if n >= 2 {
                shear[(n - 1, 0)] = rat(rng.gen_range(-2..=2i64), 1);
            }
            let mut inv = Matrix::identity(n);
            inv[(n - 1, 0)] = -shear[(n - 1, 0)].clone();
            let conj = &(&shear * &m) * &inv;
            let u = UnipotentMatrix::new(conj).unwrap();
            let k = rng.gen_range(1..=5u32);
            let c = reconstruct_from_power(&u, k).unwrap();
            assert_eq!(c.len() as u32, u.nilpotency_index());
            // reconstruct_from_power already asserts exact reassembly.
        }
    }
}
