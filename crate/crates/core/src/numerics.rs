//! Small numerical kernels shared by the moment calculus, the condition
//! solver and the simulator.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes in increasing order.
///
/// Newton iteration on the three-term recurrence, started from the
/// Tricomi-style cosine guesses. Accurate to a few ulps for the orders used
/// here (up to a few hundred).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i-th largest root goes to the top, its mirror to the bottom
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The entire functions `phi_n(z) = sum_k z^k / (k + n)!`.
///
/// `phi_0 = e^z`, `phi_1 = (e^z - 1)/z`, `phi_2 = (e^z - 1 - z)/z^2`, and so on.
/// Evaluated by the power series for `|z| < 2` and by the downward-safe
/// recurrence `phi_n = (phi_{n-1} - 1/(n-1)!) / z` otherwise, so there is no
/// cancellation anywhere on the real line.
pub fn phi(n: u32, z: f64) -> f64 {
    if n == 0 {
        return z.exp();
    }
    if z.abs() < 2.0 {
        let mut term = 1.0 / factorial(n);
        let mut sum = term;
        let mut k = 1.0;
        while k < 80.0 {
            term *= z / (k + n as f64);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                break;
            }
            k += 1.0;
        }
        sum
    } else {
        let mut value = z.exp_m1() / z;
        for m in 2..=n {
            value = (value - 1.0 / factorial(m - 1)) / z;
        }
        value
    }
}

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Maximizes a unimodal function on `[lo, hi]` by golden-section search.
/// Returns `(argmax, max)`; the argmax is accurate to `tol` absolute.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a) > tol && iter < 500 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    // compare the interior survivors with the endpoints, the maximum of a
    // concave function on a closed interval may sit on the boundary
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Bisection on a predicate that is `true` on `[lo, x*)` and `false` on
/// `[x*, hi]`. Returns the last point known to satisfy the predicate.
pub fn bisect_last_true<P>(pred: P, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    P: Fn(f64) -> bool,
{
    debug_assert!(pred(lo));
    let mut iter = 0;
    while hi - lo > tol && iter < 400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        iter += 1;
    }
    lo
}

/// Evenly spaced grid including both endpoints; one point yields `start`.
pub fn linspace(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { end } else { start + step * i as f64 })
                .collect()
        }
    }
}
