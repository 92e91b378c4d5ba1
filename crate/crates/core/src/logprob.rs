//! Log-domain helpers shared by the decoder and the correction engine.

/// `ln(e^a + e^b)` without overflow; `-inf` is the additive identity.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln Σ e^x`, shifting by the maximum first. Empty input gives `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_infinite() {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Shifts `xs` so that `Σ e^x = 1`.
pub fn normalize_in_place(xs: &mut [f64]) {
    let z = log_sum_exp(xs);
    for x in xs.iter_mut() {
        *x -= z;
    }
}

/// `ln P(bit = 0)` for an LLR `λ = ln P(0)/P(1)`, i.e. `-ln(1 + e^-λ)`.
#[inline]
pub fn ln_prob_zero(llr: f64) -> f64 {
    if llr >= 0.0 {
        -(-llr).exp().ln_1p()
    } else {
        llr - llr.exp().ln_1p()
    }
}

/// `ln P(bit = 1)` for an LLR `λ`.
#[inline]
pub fn ln_prob_one(llr: f64) -> f64 {
    ln_prob_zero(-llr)
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(xs: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in xs.iter().enumerate() {
        match best {
            Some((_, b)) if x <= b => {}
            _ => best = Some((i, x)),
        }
    }
    best.map(|(i, _)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_naive() {
        let xs = [0.1, -2.0, 3.5];
        let naive = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - naive).abs() < 1e-12);
        assert!((log_add(0.1, 3.5) - (0.1f64.exp() + 3.5f64.exp()).ln()).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn bit_probabilities() {
        assert!((ln_prob_zero(0.0) - 0.5f64.ln()).abs() < 1e-15);
        assert!((ln_prob_zero(3f64.ln()).exp() - 0.75).abs() < 1e-15);
        assert!((ln_prob_one(3f64.ln()).exp() - 0.25).abs() < 1e-15);
        assert!(ln_prob_zero(-800.0).is_finite());
    }

    #[test]
    fn argmax_ties_to_lowest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), Some(1));
        assert_eq!(argmax(&[]), None);
        assert_eq!(argmax(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), Some(0));
    }
}
