//! Small descriptive statistics used by the reports.

/// Kendall's tau-b between `x` and `y`. Returns `None` when either series is
/// constant or shorter than two.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_x, mut ties_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].total_cmp(&x[j]) as i64;
            let dy = y[i].total_cmp(&y[j]) as i64;
            match (dx, dy) {
                (0, 0) => {}
                (0, _) => ties_x += 1,
                (_, 0) => ties_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs_x = (concordant + discordant + ties_y) as f64;
    let pairs_y = (concordant + discordant + ties_x) as f64;
    if pairs_x == 0.0 || pairs_y == 0.0 {
        return None;
    }
    Some((concordant - discordant) as f64 / (pairs_x * pairs_y).sqrt())
}

/// Sample quantile with linear interpolation between order statistics
/// (the "type 7" rule). `q` is clamped to `[0, 1]`.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}
