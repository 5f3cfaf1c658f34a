use super::Parameters;

/// Denominator floor of the relative error, so that near-zero gradients are
/// compared on an absolute scale.
pub const REL_ERR_FLOOR: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub checked: usize,
    pub max_rel_err: f64,
    pub worst: Option<(String, usize, f64, f64)>,
}

/// `|a - n| / max(|a|, |n|, REL_ERR_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERR_FLOOR)
}

/// Compares `analytic` against central differences of `loss` at every
/// parameter of `model` (or every `stride`-th one).
pub fn check_gradients<P, F>(model: &P, analytic: &P, loss: F, eps: f64, stride: usize) -> GradCheck
where
    P: Parameters + Clone,
    F: Fn(&P) -> f64,
{
    let mut probe = model.clone();
    let mut report = GradCheck {
        checked: 0,
        max_rel_err: 0.0,
        worst: None,
    };
    let names: Vec<(String, usize)> = model.tensors().iter().map(|(n, t)| (n.clone(), t.len())).collect();
    let grads: Vec<Vec<f64>> = analytic.tensors().iter().map(|(_, t)| t.data().to_vec()).collect();
    for (ti, (name, len)) in names.iter().enumerate() {
        for k in (0..*len).step_by(stride.max(1)) {
            let orig = probe.tensors()[ti].1.data()[k];
            probe.tensors_mut()[ti].1.data_mut()[k] = orig + eps;
            let up = loss(&probe);
            probe.tensors_mut()[ti].1.data_mut()[k] = orig - eps;
            let down = loss(&probe);
            probe.tensors_mut()[ti].1.data_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let a = grads[ti][k];
            let err = relative_error(a, numeric);
            report.checked += 1;
            if err > report.max_rel_err || report.worst.is_none() {
                report.max_rel_err = report.max_rel_err.max(err);
                report.worst = Some((name.clone(), k, a, numeric));
            }
        }
    }
    report
}
