//! Exact integer-point counts in the l1 ball and its linearly constrained
//! versions, by depth-first enumeration with budget pruning.

use crate::error::{Error, Result};
use crate::tol;

/// One integerized constraint row: `sum_j coeffs[j] * k_j <= bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerConstraint {
    pub coeffs: Vec<i64>,
    pub bound: i64,
}

/// Count request for the constrained lattice set: integer vectors of length
/// `p` with l1 norm at most `k` satisfying every constraint row.
#[derive(Debug, Clone)]
pub struct LatticeCountQuery {
    pub p: usize,
    pub k: u64,
    pub constraints: Vec<IntegerConstraint>,
}

/// Closed-form size of the l1 lattice ball, saturating at `u64::MAX`.
/// Used to refuse oversized enumerations before starting them.
pub fn predicted_l1_count(p: usize, k: u64) -> u64 {
    // sum over i of 2^i * C(p, i) * C(k, i), i = 0..=min(p, k).
    let top = (p as u64).min(k);
    let mut total: u128 = 0;
    for i in 0..=top {
        let mut term: u128 = 1;
        let mut overflow = false;
        // 2^i
        if i >= 120 {
            overflow = true;
        } else {
            term <<= i;
        }
        // C(p, i): p <= ~50 in practice, still guard.
        if !overflow {
            match binomial_u128(p as u64, i) {
                Some(b) => term = match term.checked_mul(b) {
                    Some(t) => t,
                    None => {
                        overflow = true;
                        0
                    }
                },
                None => overflow = true,
            }
        }
        if !overflow {
            match binomial_u128(k, i) {
                Some(b) => term = match term.checked_mul(b) {
                    Some(t) => t,
                    None => {
                        overflow = true;
                        0
                    }
                },
                None => overflow = true,
            }
        }
        if overflow {
            return u64::MAX;
        }
        total = match total.checked_add(term) {
            Some(t) => t,
            None => return u64::MAX,
        };
    }
    total.try_into().unwrap_or(u64::MAX)
}

fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc.checked_mul((n - t) as u128)?;
        acc /= (t + 1) as u128;
    }
    Some(acc)
}

/// Natural log of the l1 lattice ball size, numerically stable for large
/// radii. Exact formula evaluated in log space; no enumeration.
pub fn ln_l1_count(p: usize, k: u64) -> f64 {
    if p == 0 || k == 0 {
        return 0.0; // only the origin
    }
    let top = (p as u64).min(k);
    let ln_terms: Vec<f64> = (0..=top)
        .map(|i| i as f64 * std::f64::consts::LN_2 + ln_binomial(p as u64, i) + ln_binomial(k, i))
        .collect();
    let max = ln_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    max + ln_terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let mut acc = 0.0;
    for t in 0..k {
        acc += ((n - t) as f64).ln() - ((t + 1) as f64).ln();
    }
    acc
}

/// Exact `|{k in Z^p : sum |k_j| <= K}|` by depth-first enumeration with
/// remaining-budget pruning. Refuses when the predicted size exceeds
/// [`tol::LATTICE_COUNT_CAP`].
pub fn count_l1_lattice(p: usize, k: u64) -> Result<u64> {
    if p == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    let predicted = predicted_l1_count(p, k);
    if predicted > tol::LATTICE_COUNT_CAP {
        return Err(Error::SizeLimit(format!(
            "predicted l1 lattice count {} exceeds cap {}",
            if predicted == u64::MAX { "(overflow)".to_string() } else { predicted.to_string() },
            tol::LATTICE_COUNT_CAP
        )));
    }
    fn rec(dims_left: usize, budget: u64) -> u64 {
        if dims_left == 1 {
            return 2 * budget + 1;
        }
        let mut total = rec(dims_left - 1, budget); // k_j = 0
        for v in 1..=budget {
            total += 2 * rec(dims_left - 1, budget - v); // k_j = +-v
        }
        total
    }
    Ok(rec(p, k))
}

/// Exact size of the constrained set; always at most [`count_l1_lattice`].
pub fn count_constrained_lattice(query: &LatticeCountQuery) -> Result<u64> {
    if query.p == 0 {
        return Err(Error::InvalidInput("dimension must be >= 1".into()));
    }
    for (i, c) in query.constraints.iter().enumerate() {
        if c.coeffs.len() != query.p {
            return Err(Error::DimensionMismatch(format!(
                "constraint {i} has {} coefficients for dimension {}",
                c.coeffs.len(),
                query.p
            )));
        }
    }
    let predicted = predicted_l1_count(query.p, query.k);
    if predicted > tol::LATTICE_COUNT_CAP {
        return Err(Error::SizeLimit(format!(
            "predicted l1 lattice count {} exceeds cap {}",
            if predicted == u64::MAX { "(overflow)".to_string() } else { predicted.to_string() },
            tol::LATTICE_COUNT_CAP
        )));
    }
    let mut count: u64 = 0;
    walk_constrained(query, |_| count += 1)?;
    Ok(count)
}

/// Visit every point of the constrained set. The capacity check is the
/// caller's: this walker is bounded by the same predicted-size refusal as the
/// counters.
pub fn walk_constrained(
    query: &LatticeCountQuery,
    mut visit: impl FnMut(&[i64]),
) -> Result<()> {
    let p = query.p;
    let v = query.constraints.len();
    // suffix_max[nu][j] = max |coeff| over coordinates >= j: how much one
    // unit of remaining budget can still lower constraint nu.
    let mut suffix_max = vec![vec![0i64; p + 1]; v];
    for (nu, c) in query.constraints.iter().enumerate() {
        for j in (0..p).rev() {
            suffix_max[nu][j] = suffix_max[nu][j + 1].max(c.coeffs[j].abs());
        }
    }

    struct Walk<'a, F: FnMut(&[i64])> {
        query: &'a LatticeCountQuery,
        suffix_max: &'a [Vec<i64>],
        point: Vec<i64>,
        partial: Vec<i128>,
        visit: F,
    }

    impl<F: FnMut(&[i64])> Walk<'_, F> {
        fn feasible_below(&self, j: usize, budget: u64) -> bool {
            // Can the remaining coordinates still bring every constraint
            // under its bound?
            self.query.constraints.iter().enumerate().all(|(nu, c)| {
                let reach = self.suffix_max[nu][j] as i128 * budget as i128;
                self.partial[nu] - reach <= c.bound as i128
            })
        }

        fn rec(&mut self, j: usize, budget: u64) {
            if !self.feasible_below(j, budget) {
                return;
            }
            if j == self.query.p {
                (self.visit)(&self.point);
                return;
            }
            let b = budget as i64;
            for val in -b..=b {
                self.point[j] = val;
                for (nu, c) in self.query.constraints.iter().enumerate() {
                    self.partial[nu] += c.coeffs[j] as i128 * val as i128;
                }
                self.rec(j + 1, budget - val.unsigned_abs());
                for (nu, c) in self.query.constraints.iter().enumerate() {
                    self.partial[nu] -= c.coeffs[j] as i128 * val as i128;
                }
            }
            self.point[j] = 0;
        }
    }

    let mut walk = Walk {
        query,
        suffix_max: &suffix_max,
        point: vec![0; p],
        partial: vec![0; v],
        visit: &mut visit,
    };
    walk.rec(0, query.k);
    Ok(())
}

/// Materialize the unconstrained l1 ball (capped like the counters).
pub fn enumerate_l1_lattice(p: usize, k: u64) -> Result<Vec<Vec<i64>>> {
    let predicted = predicted_l1_count(p, k);
    if predicted > tol::LATTICE_COUNT_CAP {
        return Err(Error::SizeLimit(format!(
            "predicted l1 lattice count {} exceeds cap {}",
            if predicted == u64::MAX { "(overflow)".to_string() } else { predicted.to_string() },
            tol::LATTICE_COUNT_CAP
        )));
    }
    let query = LatticeCountQuery { p, k, constraints: Vec::new() };
    let mut out = Vec::with_capacity(predicted as usize);
    walk_constrained(&query, |pt| out.push(pt.to_vec()))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Independent statement of the combinatorial identity, kept separate
    /// from the production predictor on purpose.
    fn identity_oracle(p: u64, k: u64) -> u64 {
        fn binom(n: u64, r: u64) -> u64 {
            if r > n {
                return 0;
            }
            let r = r.min(n - r);
            let mut acc: u64 = 1;
            for t in 0..r {
                acc = acc * (n - t) / (t + 1);
            }
            acc
        }
        (0..=p.min(k)).map(|i| (1u64 << i) * binom(p, i) * binom(k, i)).sum()
    }

    #[test]
    fn origin_only() {
        assert_eq!(count_l1_lattice(1, 0).unwrap(), 1);
        assert_eq!(count_l1_lattice(4, 0).unwrap(), 1);
    }

    #[test]
    fn small_cross_polytopes() {
        assert_eq!(count_l1_lattice(2, 1).unwrap(), 5);
        assert_eq!(count_l1_lattice(2, 2).unwrap(), 13);
    }

    #[test]
    fn enumeration_matches_identity_for_all_small_cases() {
        for p in 1..=5usize {
            for k in 0..=8u64 {
                let counted = count_l1_lattice(p, k).unwrap();
                assert_eq!(counted, identity_oracle(p as u64, k), "p={p} k={k}");
                // The walker agrees with the closed-form recursion.
                let listed = enumerate_l1_lattice(p, k).unwrap();
                assert_eq!(listed.len() as u64, counted);
            }
        }
    }

    #[test]
    fn ln_count_matches_exact() {
        for p in 1..=5usize {
            for k in 1..=8u64 {
                let exact = (count_l1_lattice(p, k).unwrap() as f64).ln();
                let ln = ln_l1_count(p, k);
                assert!((exact - ln).abs() < 1e-10, "p={p} k={k}: {exact} vs {ln}");
            }
        }
    }

    #[test]
    fn predicted_count_saturates() {
        assert_eq!(predicted_l1_count(50, 1_000_000_000), u64::MAX);
    }

    #[test]
    fn refusal_over_cap() {
        assert!(matches!(
            count_l1_lattice(10, 1_000),
            Err(Error::SizeLimit(_))
        ));
    }

    #[test]
    fn vacuous_constraint_equals_unconstrained() {
        for p in 1..=3usize {
            for k in 0..=5u64 {
                let q = LatticeCountQuery {
                    p,
                    k,
                    constraints: vec![IntegerConstraint {
                        coeffs: vec![0; p],
                        bound: k as i64,
                    }],
                };
                assert_eq!(
                    count_constrained_lattice(&q).unwrap(),
                    count_l1_lattice(p, k).unwrap()
                );
            }
        }
    }

    #[test]
    fn one_dimensional_halfline() {
        // k in {-1, 0, 1} with 10k <= 1 keeps {-1, 0}.
        let q = LatticeCountQuery {
            p: 1,
            k: 1,
            constraints: vec![IntegerConstraint { coeffs: vec![10], bound: 1 }],
        };
        assert_eq!(count_constrained_lattice(&q).unwrap(), 2);
    }

    #[test]
    fn adding_a_constraint_never_increases_the_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(122);
        for _ in 0..100 {
            let p = rng.gen_range(1..=3usize);
            let k = rng.gen_range(0..=5u64);
            let row = |rng: &mut ChaCha8Rng| IntegerConstraint {
                coeffs: (0..p).map(|_| rng.gen_range(-4..=4i64)).collect(),
                bound: rng.gen_range(-4..=10i64),
            };
            let base = vec![row(&mut rng)];
            let mut extended = base.clone();
            extended.push(row(&mut rng));
            let few = count_constrained_lattice(&LatticeCountQuery {
                p,
                k,
                constraints: base,
            })
            .unwrap();
            let more = count_constrained_lattice(&LatticeCountQuery {
                p,
                k,
                constraints: extended,
            })
            .unwrap();
            assert!(more <= few, "count grew from {few} to {more} after adding a row");
        }
    }

    #[test]
    fn constrained_counts_match_filter_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(121);
        for _ in 0..200 {
            let p = rng.gen_range(1..=4usize);
            let k = rng.gen_range(0..=6u64);
            let nv = rng.gen_range(0..=3usize);
            let constraints: Vec<IntegerConstraint> = (0..nv)
                .map(|_| IntegerConstraint {
                    coeffs: (0..p).map(|_| rng.gen_range(-6..=6i64)).collect(),
                    bound: rng.gen_range(-8..=14i64),
                })
                .collect();
            let q = LatticeCountQuery { p, k, constraints: constraints.clone() };
            let counted = count_constrained_lattice(&q).unwrap();
            // Enumerate-then-filter oracle.
            let filtered = enumerate_l1_lattice(p, k)
                .unwrap()
                .into_iter()
                .filter(|pt| {
                    constraints.iter().all(|c| {
                        let s: i64 = c.coeffs.iter().zip(pt).map(|(a, b)| a * b).sum();
                        s <= c.bound
                    })
                })
                .count() as u64;
            assert_eq!(counted, filtered);
            assert!(counted <= count_l1_lattice(p, k).unwrap());
        }
    }
}
