//! Scaled modified Bessel functions and Legendre polynomials.

/// Largest order handled by [`bessel_i_scaled`].
pub const MAX_BESSEL_ORDER: u32 = 16;

/// `e^{-x} I_m(x)` for `x ≥ 0`.
///
/// Power series below a crossover and Hankel's asymptotic expansion above it.
/// The crossover grows with the order so the expansion is always used well
/// inside its region of validity.
pub fn bessel_i_scaled(m: u32, x: f64) -> f64 {
    assert!(m <= MAX_BESSEL_ORDER, "Bessel order {m} exceeds {MAX_BESSEL_ORDER}");
    assert!(x >= 0.0, "negative Bessel argument {x}");
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let crossover = (2.0 * (m * m) as f64).max(30.0);
    if x <= crossover {
        series(m, x)
    } else {
        asymptotic(m, x)
    }
}

fn series(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    // Leading term (x/2)^m / m!, built up multiplicatively.
    let mut term = 1.0;
    for j in 1..=m {
        term *= half / j as f64;
    }
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + m as f64));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum * (-x).exp()
}

fn asymptotic(m: u32, x: f64) -> f64 {
    let mu = 4.0 * (m * m) as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k: f64 = 1.0;
    loop {
        let next = -term * (mu - (2.0 * k - 1.0).powi(2)) / (k * 8.0 * x);
        if next.abs() >= term.abs() || next.abs() < 1e-17 {
            if next.abs() < term.abs() {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// Legendre polynomial `P_l(t)` by the three-term recurrence.
pub fn legendre(l: usize, t: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => t,
        _ => {
            let (mut p0, mut p1) = (1.0, t);
            for j in 1..l {
                let j = j as f64;
                let p2 = ((2.0 * j + 1.0) * t * p1 - j * p0) / (j + 1.0);
                p0 = p1;
                p1 = p2;
            }
            p1
        }
    }
}
