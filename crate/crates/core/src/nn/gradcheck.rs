use super::{Gradients, Mlp, NnError};

/// Denominator floor for the relative error, so that parameters whose true
/// gradient is (numerically) zero are judged on absolute error instead.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-6;

/// Largest relative error between backprop gradients and central finite
/// differences of the loss, over every parameter.
pub fn gradient_check(mlp: &Mlp, x: &[f64], label: f64, epsilon: f64) -> Result<f64, NnError> {
    let (_, analytic) = mlp.backprop(x, label)?;
    gradient_check_against(mlp, x, label, epsilon, &analytic)
}

/// Same as [`gradient_check`] but compares against a caller-supplied
/// gradient, which lets tests feed a corrupted one.
pub fn gradient_check_against(
    mlp: &Mlp,
    x: &[f64],
    label: f64,
    epsilon: f64,
    analytic: &Gradients,
) -> Result<f64, NnError> {
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(NnError::InvalidConfig(format!("epsilon {epsilon} outside [1e-7, 1e-3]")));
    }
    let mut probe = mlp.clone();
    let mut worst = 0.0f64;
    for (k, &g) in analytic.iter().enumerate() {
        let original = *probe.params_mut().nth(k).expect("gradient layout matches parameters");
        *probe.params_mut().nth(k).expect("index") = original + epsilon;
        let plus = probe.loss(x, label)?;
        *probe.params_mut().nth(k).expect("index") = original - epsilon;
        let minus = probe.loss(x, label)?;
        *probe.params_mut().nth(k).expect("index") = original;
        let numeric = (plus - minus) / (2.0 * epsilon);
        let denom = numeric.abs().max(g.abs()).max(RELATIVE_ERROR_FLOOR);
        worst = worst.max((numeric - g).abs() / denom);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;

    #[test]
    fn backprop_agrees_with_finite_differences() {
        for act in [Activation::Tanh, Activation::Relu] {
            let mlp = Mlp::new(&[5, 4, 3, 1], act, 11).unwrap();
            let x = [0.3, -0.8, 0.5, 0.1, -0.2];
            assert!(gradient_check(&mlp, &x, 1.0, 1e-5).unwrap() < 1e-4);
        }
    }

    #[test]
    fn zero_gradient_point() {
        let mlp = Mlp::zeros(&[3, 2, 1], Activation::Tanh).unwrap();
        let (_, g) = mlp.backprop(&[0.2, 0.4, -0.1], 0.5).unwrap();
        assert!(g.iter().all(|v| *v == 0.0));
        assert!(gradient_check(&mlp, &[0.2, 0.4, -0.1], 0.5, 1e-5).unwrap() < 1e-9);
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let mlp = Mlp::new(&[4, 3, 1], Activation::Tanh, 5).unwrap();
        let x = [0.5, -0.5, 0.25, 0.9];
        let (_, mut g) = mlp.backprop(&x, 0.0).unwrap();
        *g.iter_mut().nth(2).unwrap() *= 1.01;
        assert!(gradient_check_against(&mlp, &x, 0.0, 1e-5, &g).unwrap() > 1e-3);
    }

    #[test]
    fn epsilon_range_enforced() {
        let mlp = Mlp::zeros(&[1, 1], Activation::Tanh).unwrap();
        assert!(gradient_check(&mlp, &[1.0], 1.0, 1e-2).is_err());
    }
}
