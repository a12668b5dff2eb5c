//! Turn a real constraint row `sum_j c_j k_j <= K` into integer coefficients
//! with the bound relaxed outward, so the constrained lattice count stays a
//! valid upper bound for the covering number.

use crate::bounds::lattice::IntegerConstraint;
use crate::error::{Error, Result};

/// Best rational approximation `num/den` with `den <= max_den`, by the
/// continued-fraction convergents of `|x|`.
fn rational_approx(x: f64, max_den: u64) -> (i128, u64, f64) {
    if x == 0.0 {
        return (0, 1, 0.0);
    }
    let negative = x < 0.0;
    let target = x.abs();
    let (mut h0, mut h1): (i128, i128) = (1, target.floor() as i128);
    let (mut k0, mut k1): (i128, i128) = (0, 1);
    let mut frac = target - target.floor();
    let mut best = (h1, k1);
    for _ in 0..64 {
        if frac.abs() < 1e-18 {
            break;
        }
        let inv = 1.0 / frac;
        let a = inv.floor() as i128;
        frac = inv - inv.floor();
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 as u128 > max_den as u128 {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        best = (h1, k1);
    }
    let err = (target - best.0 as f64 / best.1 as f64).abs();
    (if negative { -best.0 } else { best.0 }, best.1 as u64, err)
}

fn lcm_u128(a: u128, b: u128) -> Option<u128> {
    fn gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    if a == 0 || b == 0 {
        return Some(a.max(b));
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Integerize one scaled constraint row against the l1 budget `K`.
///
/// Each coefficient is replaced by its best rational with denominator at most
/// `precision_denominator`; a common multiple clears the denominators and the
/// bound absorbs the worst-case approximation error over the l1 ball, rounded
/// up. Every integer point satisfying the original row satisfies the output
/// row, so counts computed from it can only grow.
pub fn rationalize_constraints(
    c_tilde_row: &[f64],
    k: u64,
    precision_denominator: u64,
) -> Result<IntegerConstraint> {
    if c_tilde_row.is_empty() {
        return Err(Error::InvalidInput("empty constraint row".into()));
    }
    if precision_denominator == 0 {
        return Err(Error::InvalidInput("precision denominator must be >= 1".into()));
    }
    if c_tilde_row.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidInput("non-finite constraint coefficient".into()));
    }
    let mut approx = Vec::with_capacity(c_tilde_row.len());
    let mut err_max: f64 = 0.0;
    let mut common: u128 = 1;
    for &c in c_tilde_row {
        let (num, den, err) = rational_approx(c, precision_denominator);
        err_max = err_max.max(err);
        common = lcm_u128(common, den as u128)
            .ok_or_else(|| Error::SizeLimit("common denominator overflows".into()))?;
        approx.push((num, den));
    }
    if common > i64::MAX as u128 {
        return Err(Error::SizeLimit("common denominator exceeds i64".into()));
    }
    let mut coeffs = Vec::with_capacity(approx.len());
    for (num, den) in approx {
        let scaled = num
            .checked_mul((common / den as u128) as i128)
            .ok_or_else(|| Error::SizeLimit("integer coefficient overflows".into()))?;
        let g: i64 = scaled
            .try_into()
            .map_err(|_| Error::SizeLimit("integer coefficient exceeds i64".into()))?;
        coeffs.push(g);
    }
    // sum g_j k_j = L * (sum c~_j k_j + sum (g_j/L - c~_j) k_j)
    //            <= L * (K + err_max * K), since sum |k_j| <= K.
    let base = (common as i128) * (k as i128);
    let slack = if err_max > 0.0 {
        ((common as f64) * k as f64 * err_max * (1.0 + 1e-9)).ceil() as i128 + 1
    } else {
        0
    };
    let bound: i64 = (base + slack)
        .try_into()
        .map_err(|_| Error::SizeLimit("relaxed bound exceeds i64".into()))?;
    Ok(IntegerConstraint { coeffs, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::lattice::{enumerate_l1_lattice, walk_constrained, LatticeCountQuery};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_dyadic_rationals() {
        let c = rationalize_constraints(&[0.5, 0.25], 2, 4).unwrap();
        assert_eq!(c.coeffs, vec![2, 1]);
        assert_eq!(c.bound, 8);
    }

    #[test]
    fn one_third_at_denominator_three() {
        let c = rationalize_constraints(&[1.0 / 3.0], 5, 3).unwrap();
        assert_eq!(c.coeffs, vec![1]);
        assert_eq!(c.bound, 15);
    }

    #[test]
    fn zero_row() {
        let c = rationalize_constraints(&[0.0, 0.0], 3, 100).unwrap();
        assert_eq!(c.coeffs, vec![0, 0]);
        assert_eq!(c.bound, 3);
    }

    #[test]
    fn rational_approx_recovers_simple_fractions() {
        let (n, d, e) = rational_approx(0.75, 100);
        assert_eq!((n, d), (3, 4));
        assert!(e < 1e-15);
        let (n, d, _) = rational_approx(-2.2, 10);
        assert_eq!((n, d), (-11, 5));
    }

    /// The rationalized set contains the float-filtered set: counting with
    /// the integerized row can only over-count, never under-count.
    #[test]
    fn relaxation_is_outward() {
        let mut rng = ChaCha8Rng::seed_from_u64(131);
        for _ in 0..200 {
            let p = rng.gen_range(1..=4usize);
            let k = rng.gen_range(1..=6u64);
            let row: Vec<f64> = (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let den = *[3u64, 7, 16, 101, 1000].choose(&mut rng).unwrap();
            let int_row = rationalize_constraints(&row, k, den).unwrap();
            let float_count = enumerate_l1_lattice(p, k)
                .unwrap()
                .iter()
                .filter(|pt| {
                    row.iter().zip(pt.iter()).map(|(c, &v)| c * v as f64).sum::<f64>()
                        <= k as f64
                })
                .count() as u64;
            let mut int_count = 0u64;
            walk_constrained(
                &LatticeCountQuery { p, k, constraints: vec![int_row.clone()] },
                |_| int_count += 1,
            )
            .unwrap();
            assert!(
                int_count >= float_count,
                "rationalization under-counted: {int_count} < {float_count} (row {row:?}, den {den})"
            );
        }
    }
}
