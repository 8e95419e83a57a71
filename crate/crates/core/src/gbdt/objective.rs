//! Link functions, losses and their first/second derivatives.

/// Floor on probabilities inside logarithms.
const P_EPS: f64 = 1e-15;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = logits.to_vec();
    softmax_in_place(&mut out);
    out
}

pub fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Gradient and hessian of binary log-loss w.r.t. the logit.
pub fn binary_grad_hess(y: f64, logit: f64) -> (f64, f64) {
    let p = sigmoid(logit);
    (p - y, p * (1.0 - p))
}

/// Per-class gradient and (diagonal) hessian of softmax cross-entropy
/// against a target distribution `target` (one-hot for hard labels).
pub fn softmax_grad_hess(target: &[f64], logits: &[f64]) -> Vec<(f64, f64)> {
    softmax(logits)
        .into_iter()
        .zip(target)
        .map(|(p, &y)| (p - y, p * (1.0 - p)))
        .collect()
}

pub fn binary_log_loss(y: f64, logit: f64) -> f64 {
    let p = sigmoid(logit).clamp(P_EPS, 1.0 - P_EPS);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Cross-entropy of `target` against `softmax(logits)`.
pub fn softmax_cross_entropy(target: &[f64], logits: &[f64]) -> f64 {
    softmax(logits)
        .into_iter()
        .zip(target)
        .filter(|(_, &y)| y > 0.0)
        .map(|(p, &y)| -y * p.max(P_EPS).ln())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_at_zero_logit() {
        assert_eq!(binary_grad_hess(1.0, 0.0), (-0.5, 0.25));
        assert_eq!(binary_grad_hess(0.0, 0.0), (0.5, 0.25));
    }

    #[test]
    fn binary_saturates() {
        let (g, h) = binary_grad_hess(1.0, 40.0);
        assert!(g.abs() < 1e-15 && h < 1e-15);
        let (g, h) = binary_grad_hess(0.0, -800.0);
        assert!(g.abs() < 1e-300 && h < 1e-300);
    }

    #[test]
    fn uniform_softmax_gradients() {
        let mut y = [0.0; 7];
        y[0] = 1.0;
        let gh = softmax_grad_hess(&y, &[0.0; 7]);
        assert!((gh[0].0 - (1.0 / 7.0 - 1.0)).abs() < 1e-15);
        assert!((gh[0].0 + 0.857_142_857_142_857).abs() < 1e-12);
        for (g, h) in &gh[1..] {
            assert!((g - 1.0 / 7.0).abs() < 1e-15);
            assert!((h - (1.0 / 7.0) * (6.0 / 7.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn gradients_sum_to_zero() {
        let y = [0.0, 0.0, 1.0, 0.0];
        let gh = softmax_grad_hess(&y, &[3.0, -1.0, 0.5, 7.0]);
        let s: f64 = gh.iter().map(|x| x.0).sum();
        assert!(s.abs() < 1e-15);
        for (g, h) in gh {
            assert!(g > -1.0 && g < 1.0);
            assert!((0.0..=0.25).contains(&h));
        }
    }

    #[test]
    fn dominant_true_class_gives_vanishing_gradients() {
        let y = [1.0, 0.0, 0.0];
        for (g, _) in softmax_grad_hess(&y, &[60.0, 0.0, 0.0]) {
            assert!(g.abs() < 1e-20);
        }
    }

    #[test]
    fn stable_extremes() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        let p = softmax(&[1000.0, 0.0]);
        assert!((p[0] - 1.0).abs() < 1e-15);
        assert!(binary_log_loss(1.0, -1000.0).is_finite());
    }
}
