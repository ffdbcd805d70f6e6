use crate::euclid::AlgorithmKind;
use num_integer::Integer;

/// Euler totients `phi(0..=n)` by a linear sieve (`phi(0) = 0`).
pub fn totients(n: usize) -> Vec<u64> {
    let mut phi = vec![0u64; n + 1];
    if n >= 1 {
        phi[1] = 1;
    }
    let mut primes: Vec<usize> = Vec::new();
    let mut composite = vec![false; n + 1];
    for i in 2..=n {
        if !composite[i] {
            primes.push(i);
            phi[i] = (i - 1) as u64;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            composite[ip] = true;
            if i % p == 0 {
                phi[ip] = phi[i] * p as u64;
                break;
            }
            phi[ip] = phi[i] * (p as u64 - 1);
        }
    }
    phi
}

/// Number of admissible numerators for denominator `v`.
fn per_denominator(kind: AlgorithmKind, v: u64, phi_v: u64) -> u64 {
    match kind {
        AlgorithmKind::Centred => match v {
            0 | 1 => 0,
            2 => 1,
            _ => phi_v / 2,
        },
        _ => phi_v,
    }
}

/// `|Omega_v|` restricted to denominator exactly `v`, for `v = 0..=n`.
pub fn omega_prefix_counts(n: u64, kind: AlgorithmKind) -> Vec<u64> {
    let phi = totients(n as usize);
    let mut out = vec![0u64; n as usize + 1];
    let mut acc = 0u64;
    for v in 1..=n as usize {
        acc += per_denominator(kind, v as u64, phi[v]);
        out[v] = acc;
    }
    out
}

/// `|Omega_N|` via totient summation.
pub fn count_omega(n: u64, kind: AlgorithmKind) -> u64 {
    if n == 0 {
        return 0;
    }
    *omega_prefix_counts(n, kind).last().unwrap()
}

/// `|Omega_N|` by a direct gcd scan.
pub fn count_omega_brute(n: u64, kind: AlgorithmKind) -> u64 {
    let mut c = 0;
    for v in 1..=n {
        for u in 1..=v {
            if kind.accepts_pair(u, v) && u.gcd(&v) == 1 {
                c += 1;
            }
        }
    }
    c
}
