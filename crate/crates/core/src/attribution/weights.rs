use crate::error::{Error, Result};

/// Exact binomial coefficient, `None` on overflow.
pub(crate) fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        // acc * (n - j) is divisible by (j + 1) after the multiplication
        acc = acc.checked_mul((n - j) as u128)? / (j as u128 + 1);
    }
    Some(acc)
}

/// Shapley weight `|S|! (N-|S|-1)! / N!` for a coalition of size `s_size`
/// among `n` players, i.e. `1 / (N * C(N-1, |S|))`.
pub fn shapley_weight(s_size: usize, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("a game needs at least one player".into()));
    }
    if s_size >= n {
        return Err(Error::Domain(format!(
            "coalition size {s_size} must be below player count {n}"
        )));
    }
    match binomial(n - 1, s_size).and_then(|c| c.checked_mul(n as u128)) {
        Some(denom) => Ok(1.0 / denom as f64),
        None => {
            // log-space fallback for very wide games
            let ln = ln_factorial(s_size) + ln_factorial(n - s_size - 1) - ln_factorial(n);
            Ok(ln.exp())
        }
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// KernelSHAP regression weight `(N-1) / (C(N,|S|) |S| (N-|S|))` for a
/// non-trivial coalition.
pub fn kernel_weight(s_size: usize, n: usize) -> Result<f64> {
    if s_size == 0 || s_size >= n {
        return Err(Error::Domain(format!(
            "kernel weight undefined for coalition size {s_size} of {n}"
        )));
    }
    let c = binomial(n, s_size)
        .map(|c| c as f64)
        .ok_or_else(|| Error::Domain(format!("C({n},{s_size}) overflows")))?;
    Ok((n - 1) as f64 / (c * s_size as f64 * (n - s_size) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_weights() {
        assert_eq!(shapley_weight(1, 3).unwrap(), 1.0 / 6.0);
        assert_eq!(shapley_weight(0, 1).unwrap(), 1.0);
        assert_eq!(shapley_weight(4, 8).unwrap(), 1.0 / 280.0);
        // 4!·3!/8! written out
        assert_eq!(shapley_weight(4, 8).unwrap(), 144.0 / 40320.0);
    }

    #[test]
    fn domain_errors() {
        assert!(shapley_weight(3, 3).is_err());
        assert!(shapley_weight(0, 0).is_err());
        assert!(kernel_weight(0, 4).is_err());
        assert!(kernel_weight(4, 4).is_err());
    }

    #[test]
    fn weights_normalize() {
        for n in 1..=20 {
            let total: f64 = (0..n)
                .map(|s| binomial(n - 1, s).unwrap() as f64 * shapley_weight(s, n).unwrap())
                .sum();
            assert!((total - 1.0).abs() < 1e-14, "n={n} total={total}");
        }
    }

    #[test]
    fn matches_factorial_form() {
        let fact = |k: usize| (1..=k).map(|j| j as f64).product::<f64>();
        for n in 1..=20 {
            for s in 0..n {
                let direct = fact(s) * fact(n - s - 1) / fact(n);
                let w = shapley_weight(s, n).unwrap();
                assert!(((w - direct) / direct).abs() < 1e-14, "s={s} n={n}");
            }
        }
    }

    #[test]
    fn wide_games_fall_back_to_log_space() {
        let w = shapley_weight(60, 120).unwrap();
        assert!(w > 0.0 && w.is_finite());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 4), Some(70));
        assert_eq!(binomial(20, 10), Some(184_756));
        assert_eq!(binomial(3, 5), Some(0));
    }
}
