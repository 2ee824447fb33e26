use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{IntMatrix, SolverError};

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Two distinct primes in `(10^6, 2^31)`, chosen deterministically from `seed`.
pub fn pick_primes(seed: u64) -> [u64; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let c: u64 = rng.gen_range(1_000_001..2_000_000_000);
        if is_prime(c) {
            return c;
        }
    };
    let a = draw();
    let mut b = draw();
    while b == a {
        b = draw();
    }
    [a, b]
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut base, mut e, mut acc) = (a % p, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// Rank of an integer matrix over GF(p), by sparse row reduction.
pub fn rank_gfp(a: &IntMatrix, p: u64) -> Result<usize, SolverError> {
    if p <= 1_000_000 || p >= 1 << 31 || !is_prime(p) {
        return Err(SolverError::BadModulus(p));
    }
    let pi = p as i64;
    let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        let mut row: Vec<(usize, u64)> = cols
            .iter()
            .zip(vals)
            .map(|(&j, &v)| (j, v.rem_euclid(pi) as u64))
            .filter(|e| e.1 != 0)
            .collect();
        while let Some(&(lead, c)) = row.first() {
            match pivots.get(&lead) {
                Some(piv) => row = sub_scaled(&row, piv, c, p),
                None => {
                    let inv = inv_mod(c, p);
                    row.iter_mut().for_each(|e| e.1 = e.1 * inv % p);
                    pivots.insert(lead, row);
                    break;
                }
            }
        }
    }
    Ok(pivots.len())
}

// row - c * piv, both sorted by column, piv has leading coefficient 1.
fn sub_scaled(row: &[(usize, u64)], piv: &[(usize, u64)], c: u64, p: u64) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(row.len() + piv.len());
    let (mut i, mut j) = (0, 0);
    while i < row.len() || j < piv.len() {
        let take_row = j == piv.len() || (i < row.len() && row[i].0 < piv[j].0);
        let take_piv = i == row.len() || (j < piv.len() && piv[j].0 < row[i].0);
        if take_row {
            out.push(row[i]);
            i += 1;
        } else if take_piv {
            let v = (p - c * piv[j].1 % p) % p;
            if v != 0 {
                out.push((piv[j].0, v));
            }
            j += 1;
        } else {
            let v = (row[i].1 + p - c * piv[j].1 % p) % p;
            if v != 0 {
                out.push((row[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_are_large_and_distinct() {
        let [a, b] = pick_primes(3);
        assert!(a > 1_000_000 && b > 1_000_000 && a != b);
        assert!(is_prime(a) && is_prime(b));
        assert_eq!(pick_primes(3), [a, b]);
    }

    #[test]
    fn small_modulus_rejected() {
        let m = IntMatrix::zeros(1, 1);
        assert_eq!(rank_gfp(&m, 7), Err(SolverError::BadModulus(7)));
        assert!(rank_gfp(&m, 1_000_004).is_err());
    }

    #[test]
    fn rank_of_known_matrix() {
        let m = IntMatrix::from_triplets(3, 3, &[(0, 0, 1), (0, 1, 2), (1, 0, 2), (1, 1, 4), (2, 2, -3)]);
        assert_eq!(rank_gfp(&m, 1_000_003).unwrap(), 2);
    }
}
