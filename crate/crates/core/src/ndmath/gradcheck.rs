/// Central-difference gradient of `f` at `params`, one coordinate at a time.
pub fn finite_diff_grad<F>(mut f: F, params: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let coords: Vec<usize> = (0..params.len()).collect();
    finite_diff_coords(&mut f, params, h, &coords)
}

/// Central differences restricted to `coords`; output is aligned with `coords`.
pub fn finite_diff_coords<F>(mut f: F, params: &[f64], h: f64, coords: &[usize]) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut theta = params.to_vec();
    coords
        .iter()
        .map(|&i| {
            let orig = theta[i];
            theta[i] = orig + h;
            let up = f(&theta);
            theta[i] = orig - h;
            let down = f(&theta);
            theta[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `|a − b| / max(|a|, |b|, 1e-8)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}
