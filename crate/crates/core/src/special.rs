//! Scalar special functions: guarded hyperbolic cotangent, Legendre polynomials
//! and spherical Bessel functions of the first kind.

/// `coth(x)` for `x > 0`, switching to `1` above 40 and to the Laurent form below `1e-8`.
pub fn coth(x: f64) -> f64 {
    if x > 40.0 {
        1.0
    } else if x < 1e-8 {
        1.0 / x + x / 3.0
    } else {
        1.0 / x.tanh()
    }
}

/// `coth(x) - 1 = 2 / (e^{2x} - 1)`, accurate for all `x > 0`.
pub fn coth_minus_one(x: f64) -> f64 {
    if x > 350.0 {
        2.0 * (-2.0 * x).exp()
    } else {
        2.0 / (2.0 * x).exp_m1()
    }
}

/// `coth(x) + 1 = 2 / (1 - e^{-2x})`, accurate for all `x > 0`.
pub fn coth_plus_one(x: f64) -> f64 {
    2.0 / -(-2.0 * x).exp_m1()
}

/// `P_0(x), ..., P_{n-1}(x)` by Bonnet's recurrence.
pub fn legendre_all(n: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() >= n);
    if n == 0 {
        return;
    }
    out[0] = 1.0;
    if n == 1 {
        return;
    }
    out[1] = x;
    for k in 1..n - 1 {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * x * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

/// Spherical Bessel functions `j_0(x), ..., j_{n-1}(x)` for real `x`.
///
/// Upward recurrence when `|x|` exceeds the highest order, Miller's downward
/// recurrence otherwise.
pub fn spherical_bessel_all(n: usize, x: f64, out: &mut [f64]) {
    debug_assert!(out.len() >= n);
    if n == 0 {
        return;
    }
    let ax = x.abs();
    let parity = |k: usize| if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
    if ax == 0.0 {
        out[0] = 1.0;
        out[1..n].iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    if ax > n as f64 {
        let (s, c) = ax.sin_cos();
        out[0] = s / ax;
        if n > 1 {
            out[1] = s / (ax * ax) - c / ax;
        }
        for k in 1..n.saturating_sub(1) {
            out[k + 1] = (2.0 * k as f64 + 1.0) / ax * out[k] - out[k - 1];
        }
    } else {
        let start = n + 24 + (2.0 * (n as f64 + ax).sqrt() * 4.0) as usize;
        let mut above = 0.0_f64;
        let mut cur = 1e-300_f64;
        let mut buf = vec![0.0; n];
        for k in (0..=start).rev() {
            // cur holds the unnormalized j_k
            if k < n {
                buf[k] = cur;
            }
            if k == 0 {
                break;
            }
            let below = (2.0 * k as f64 + 1.0) / ax * cur - above;
            above = cur;
            cur = below;
            if cur.abs() > 1e250 {
                let s = 1e-250;
                cur *= s;
                above *= s;
                buf.iter_mut().for_each(|v| *v *= s);
            }
        }
        let (s, c) = ax.sin_cos();
        let j0 = s / ax;
        let j1 = s / (ax * ax) - c / ax;
        let scale = if n == 1 || j0.abs() >= j1.abs() {
            j0 / buf[0]
        } else {
            j1 / buf[1]
        };
        for k in 0..n {
            out[k] = buf[k] * scale;
        }
    }
    for (k, v) in out.iter_mut().enumerate().take(n) {
        *v *= parity(k);
    }
}
