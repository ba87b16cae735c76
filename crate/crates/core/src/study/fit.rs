/// Errors at or below `FLOOR_FACTOR × tol` are treated as tolerance floor.
pub const FLOOR_FACTOR: f64 = 50.0;

/// Indices of the pre-floor segment: the leading run of points (in order of
/// increasing `N`) whose error exceeds `FLOOR_FACTOR × tol` and decreases
/// strictly from one point to the next.
pub fn pre_floor_segment(errors: &[f64], tol: f64) -> Vec<usize> {
    let floor = FLOOR_FACTOR * tol;
    let mut out: Vec<usize> = Vec::new();
    for (i, &e) in errors.iter().enumerate() {
        if !(e.is_finite() && e > floor) {
            break;
        }
        if let Some(&last) = out.last() {
            if e >= errors[last] {
                break;
            }
        }
        out.push(i);
    }
    out
}

/// Observed order: minus the least-squares slope of `log e` against `log N`
/// over the pre-floor segment; `None` with fewer than two usable points.
pub fn fit_order(steps: &[usize], errors: &[f64], tol: f64) -> Option<f64> {
    let idx = pre_floor_segment(errors, tol);
    if idx.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = idx.iter().map(|&i| (steps[i] as f64).ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| errors[i].ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(-sxy / sxx)
}
