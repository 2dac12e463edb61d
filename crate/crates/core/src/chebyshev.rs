//! Chebyshev polynomials of the second kind, U_m(x).
//!
//! Inside [-1, 1] the three-term recurrence is used. Outside, where the
//! recurrence amplifies rounding, the hyperbolic closed form
//! U_m(cosh t) = sinh((m+1) t) / sinh t is evaluated directly, with
//! U_m(-x) = (-1)^m U_m(x) for the negative branch.

use crate::scalar::Real;

/// U_m(x) for any integer m >= -2 (U_{-1} = 0, U_{-2} = -1).
pub fn chebyshev_u<T: Real>(m: i64, x: T) -> T {
    match m {
        i64::MIN..=-3 => panic!("U_m requested for m = {m} < -2"),
        -2 => -T::one(),
        -1 => T::zero(),
        0 => T::one(),
        _ if x.abs() <= T::one() => recurrence(m, x),
        _ => with_parity(m, x, hyperbolic(m, x.abs())),
    }
}

/// `(U_{m-1}(x), U_{m-2}(x))`, the pair entering the n-th matrix power.
pub fn chebyshev_pair<T: Real>(n: i64, x: T) -> (T, T) {
    (chebyshev_u(n - 1, x), chebyshev_u(n - 2, x))
}

fn recurrence<T: Real>(m: i64, x: T) -> T {
    let two_x = x + x;
    let mut prev = T::one();
    let mut cur = two_x;
    for _ in 1..m {
        let next = two_x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn hyperbolic<T: Real>(m: i64, x: T) -> T {
    let theta = x.acosh();
    let mp1 = T::from_i64(m + 1).expect("degree fits scalar");
    if theta == T::zero() {
        mp1
    } else {
        (mp1 * theta).sinh() / theta.sinh()
    }
}

fn with_parity<T: Real>(m: i64, x: T, magnitude: T) -> T {
    if x < T::zero() && m % 2 != 0 {
        -magnitude
    } else {
        magnitude
    }
}
