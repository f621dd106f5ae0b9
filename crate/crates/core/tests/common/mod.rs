//! Test-side oracles, written directly from the recursion and independent of
//! the library's kernel.

#![allow(dead_code)]

/// One full update of the coupled recursion
/// `x_z <- eps (1 - sum_i nu_i (1 - sum_j nu_j x_{z+i-j})^(dc-1))^(dv-1)`
/// for `z = 1..=L`, with `x` read as 0 outside `[1, L]`.
pub fn direct_step(x: &[f64], dv: u32, dc: u32, nu: &[f64], eps: f64) -> Vec<f64> {
    let len = x.len() as i64;
    let w = nu.len() as i64;
    let at = |z: i64| if (1..=len).contains(&z) { x[(z - 1) as usize] } else { 0.0 };
    (1..=len)
        .map(|z| {
            let mut outer = 0.0;
            for i in 0..w {
                let mut inner = 0.0;
                for j in 0..w {
                    inner += nu[j as usize] * at(z + i - j);
                }
                outer += nu[i as usize] * (1.0 - inner).powi(dc as i32 - 1);
            }
            eps * (1.0 - outer).powi(dv as i32 - 1)
        })
        .collect()
}

/// Position of the left front: the (linearly interpolated) first place where
/// the profile rises to `level`, counted from `z = 1`.
pub fn left_crossing(x: &[f64], level: f64) -> Option<f64> {
    let k = x.iter().position(|&v| v >= level)?;
    if k == 0 {
        return Some(1.0);
    }
    let (a, b) = (x[k - 1], x[k]);
    Some(k as f64 + (level - a) / (b - a))
}

/// Mirror image of [`left_crossing`], measured in positions from `z = L`.
pub fn right_crossing(x: &[f64], level: f64) -> Option<f64> {
    let rev: Vec<f64> = x.iter().rev().copied().collect();
    left_crossing(&rev, level)
}

/// Frontier-tracking speed estimate of the left wave: the `eps/2` crossing
/// is followed iteration by iteration; once it has left the boundary region
/// (`skip` positions), the speed is the crossing's advance over the next
/// `span` positions divided by the iterations it took.
pub fn frontier_speed(
    dv: u32,
    dc: u32,
    nu: &[f64],
    len: usize,
    eps: f64,
    skip: f64,
    span: f64,
) -> Option<f64> {
    let mut x = vec![eps; len];
    let level = eps / 2.0;
    let mut start: Option<(usize, f64)> = None;
    for t in 1..=200_000 {
        x = direct_step(&x, dv, dc, nu, eps);
        let p = left_crossing(&x, level)?;
        match start {
            None if p >= skip => start = Some((t, p)),
            Some((t0, p0)) if p - p0 >= span => return Some((p - p0) / (t - t0) as f64),
            _ => {}
        }
    }
    None
}
