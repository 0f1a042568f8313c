//! Intersection numbers of ψ- and κ-classes on `M̄_{g,n}`.
//!
//! Pure ψ-integrals `⟨τ_{d₁}⋯τ_{dₙ}⟩_g` are computed with the
//! Dijkgraaf–Verlinde–Verlinde recursion (which contains the string and
//! dilaton equations as its `k = −1, 0` cases), starting from
//! `⟨τ₀³⟩₀ = 1` and `⟨τ₁⟩₁ = 1/24`.  Mixed integrals with κ-classes are reduced to pure
//! ψ-integrals through the forgetful pushforward
//! `π_*(ψ_{n+1}^{b₁+1}⋯ψ_{n+m}^{b_m+1}) = Σ_{σ∈S_m} Π_{cycles c} κ_{b(c)}`.
//! All results are memoised in a process-wide table.

use crate::algebra::{int, Rational};
use crate::error::{Error, Result};
use itertools::Itertools;
use num_traits::{One, Zero};
use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::Mutex;

type PsiKey = (u32, Vec<u32>);
type KappaKey = (u32, Vec<u32>, Vec<u32>);

static PSI_MEMO: Lazy<Mutex<HashMap<PsiKey, Rational>>> = Lazy::new(|| Mutex::new(HashMap::new()));
static KAPPA_MEMO: Lazy<Mutex<HashMap<KappaKey, Rational>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// `(2n−1)!!` with the convention `(−1)!! = 1`.
fn double_factorial_odd(n: i64) -> Rational {
    // Returns (2n+1)!! for n ≥ −1.
    let mut acc = Rational::one();
    let mut k = 2 * n + 1;
    while k > 1 {
        acc *= int(k);
        k -= 2;
    }
    acc
}

/// `⟨τ_{d₁}⋯τ_{dₙ}⟩_g`; zero when the dimension does not match or the
/// moduli space is unstable.
pub fn psi_correlator(g: u32, psi: &[u32]) -> Rational {
    let n = psi.len() as i64;
    if 2 * g as i64 - 2 + n <= 0 {
        return Rational::zero();
    }
    let dim = 3 * g as i64 - 3 + n;
    if psi.iter().map(|&d| d as i64).sum::<i64>() != dim {
        return Rational::zero();
    }
    let mut key: Vec<u32> = psi.to_vec();
    key.sort_unstable();
    let memo_key = (g, key.clone());
    if let Some(v) = PSI_MEMO.lock().expect("memo poisoned").get(&memo_key) {
        return v.clone();
    }
    let value = psi_uncached(g, &key);
    PSI_MEMO
        .lock()
        .expect("memo poisoned")
        .insert(memo_key, value.clone());
    value
}

fn psi_uncached(g: u32, d: &[u32]) -> Rational {
    // d is sorted ascending; dimension already matches.
    let n = d.len();
    let top = d[n - 1];
    if top == 0 {
        return if g == 0 && n == 3 {
            Rational::one()
        } else {
            Rational::zero()
        };
    }
    if g == 1 && n == 1 {
        return Rational::new(1.into(), 24.into());
    }
    let k = top as i64 - 1;
    let rest: Vec<u32> = d[..n - 1].to_vec();
    let mut total = Rational::zero();
    // Merging with another insertion.
    for j in 0..rest.len() {
        let dj = rest[j] as i64;
        let coeff = double_factorial_odd(k + dj) / double_factorial_odd(dj - 1);
        let mut next = rest.clone();
        next[j] = (dj + k) as u32;
        total += coeff * psi_correlator(g, &next);
    }
    // Non-separating and separating node terms.
    let half = Rational::new(1.into(), 2.into());
    for r in 0..k {
        let s = k - 1 - r;
        let c = double_factorial_odd(r) * double_factorial_odd(s);
        if g >= 1 {
            let mut next = rest.clone();
            next.push(r as u32);
            next.push(s as u32);
            total += &half * &c * psi_correlator(g - 1, &next);
        }
        let m = rest.len();
        for mask in 0..(1u64 << m) {
            let i_part: Vec<u32> = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| rest[i]).collect();
            let j_part: Vec<u32> = (0..m).filter(|i| mask >> i & 1 == 0).map(|i| rest[i]).collect();
            for g1 in 0..=g {
                let mut a = i_part.clone();
                a.push(r as u32);
                let mut b = j_part.clone();
                b.push(s as u32);
                let x = psi_correlator(g1, &a);
                if x.is_zero() {
                    continue;
                }
                total += &half * &c * x * psi_correlator(g - g1, &b);
            }
        }
    }
    total / double_factorial_odd(k + 1)
}

/// `∫_{M̄_{g,n}} Π ψᵢ^{psi[i]} · Π_j κ_{kappa[j]}` with `n = psi.len()`.
///
/// Returns an error when `2g − 2 + n ≤ 0`; returns zero when the degree
/// differs from `3g − 3 + n`.
pub fn correlator(g: u32, psi: &[u32], kappa: &[u32]) -> Result<Rational> {
    let n = psi.len() as i64;
    if 2 * g as i64 - 2 + n <= 0 {
        return Err(Error::Precondition(format!(
            "M̄_{{{g},{n}}} is unstable"
        )));
    }
    Ok(kappa_correlator(g, psi, kappa))
}

fn kappa_correlator(g: u32, psi: &[u32], kappa: &[u32]) -> Rational {
    let n = psi.len() as i64;
    let dim = 3 * g as i64 - 3 + n;
    let deg: i64 = psi.iter().chain(kappa).map(|&d| d as i64).sum();
    if deg != dim {
        return Rational::zero();
    }
    if kappa.is_empty() {
        return psi_correlator(g, psi);
    }
    let mut p = psi.to_vec();
    p.sort_unstable();
    let mut b = kappa.to_vec();
    b.sort_unstable();
    let key = (g, p.clone(), b.clone());
    if let Some(v) = KAPPA_MEMO.lock().expect("memo poisoned").get(&key) {
        return v.clone();
    }
    // ⟨τ_a τ_{b+1}⟩ = Σ_σ ∫ ψ^a Π_cycles κ_{b(c)}; isolate σ = id.
    let m = b.len();
    let mut full = p.clone();
    full.extend(b.iter().map(|x| x + 1));
    let mut value = psi_correlator(g, &full);
    for perm in (0..m).permutations(m) {
        if perm.iter().enumerate().all(|(i, &j)| i == j) {
            continue;
        }
        let merged = cycle_sums(&perm, &b);
        value -= kappa_correlator(g, &p, &merged);
    }
    KAPPA_MEMO
        .lock()
        .expect("memo poisoned")
        .insert(key, value.clone());
    value
}

/// Sums of `b` over the cycles of the permutation `perm`.
fn cycle_sums(perm: &[usize], b: &[u32]) -> Vec<u32> {
    let m = perm.len();
    let mut seen = vec![false; m];
    let mut out = Vec::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        let mut s = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            s += b[i];
            i = perm[i];
        }
        out.push(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{factorial, rat};

    #[test]
    fn normalisations() {
        assert_eq!(psi_correlator(0, &[0, 0, 0]), int(1));
        assert_eq!(psi_correlator(1, &[1]), rat(1, 24));
        assert_eq!(psi_correlator(1, &[0, 2]), rat(1, 24));
        assert_eq!(correlator(1, &[], &[1]).is_err(), true);
        assert_eq!(correlator(1, &[0], &[1]).unwrap(), rat(1, 24));
    }

    #[test]
    fn genus_zero_closed_form() {
        // ⟨Π τ_{dᵢ}⟩₀ = (n−3)! / Π dᵢ!
        for d in [vec![1, 0, 0, 0], vec![2, 0, 0, 0, 0], vec![1, 1, 0, 0, 0], vec![2, 1, 0, 0, 0, 0]] {
            let n = d.len() as u32;
            let expected = factorial(n - 3) / d.iter().fold(int(1), |a, &x| a * factorial(x));
            assert_eq!(psi_correlator(0, &d), expected);
        }
    }

    #[test]
    fn genus_one_and_top_insertions() {
        for n in 1..6u32 {
            assert_eq!(psi_correlator(1, &vec![1; n as usize]), factorial(n - 1) / int(24));
        }
        assert_eq!(psi_correlator(2, &[4]), rat(1, 1152));
        assert_eq!(psi_correlator(3, &[7]), rat(1, 82944));
    }

    #[test]
    fn kappa_pushforward() {
        // κ₁ on M̄_{0,4} is the pushforward of ψ₅² from M̄_{0,5}: value 1.
        assert_eq!(correlator(0, &[0, 0, 0, 0], &[1]).unwrap(), int(1));
        // κ₁² on M̄_{0,5}: ⟨τ₂τ₂⟩ − ⟨τ₃⟩ via the (0,7) space = 6 − 1 = 5.
        assert_eq!(correlator(0, &[0; 5], &[1, 1]).unwrap(), int(5));
        // κ₀ = 2g − 2 + n.
        assert_eq!(correlator(0, &[0, 0, 0], &[0]).unwrap(), int(1));
        assert_eq!(correlator(1, &[1], &[0]).unwrap(), rat(1, 24));
    }
}
