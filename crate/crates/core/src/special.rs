//! Bessel functions of the first kind for integer order.
//!
//! Both the Chebyshev propagator and the ideal-focus initial state need the
//! whole sequence `J_0(x) .. J_K(x)`, so the routine returns all orders at once
//! using Miller's backward recurrence normalized by `J_0 + 2 Σ J_{2k} = 1`.

use crate::scalar::Scalar;

const SERIES_BELOW: f64 = 1e-3;

/// `J_0(x), J_1(x), …, J_{max_order}(x)`.
pub fn bessel_j_sequence<T: Scalar>(x: T, max_order: usize) -> Vec<T> {
    let mut out = vec![T::zero(); max_order + 1];
    if x == T::zero() {
        out[0] = T::one();
        return out;
    }
    let sign_flip = x < T::zero();
    let ax = x.abs();
    let axf = ax.as_f64();
    if axf < SERIES_BELOW {
        // the downward recurrence overflows as x -> 0; the series is exact there
        let half = ax / T::of(2.0);
        let q = -(half * half);
        let mut lead = T::one(); // (x/2)^k / k!
        for (k, v) in out.iter_mut().enumerate() {
            if k > 0 {
                lead = lead * half / T::of(k as f64);
            }
            let (mut term, mut sum) = (lead, lead);
            for m in 1..8 {
                term = term * q / T::of((m * (m + k)) as f64);
                sum = sum + term;
            }
            *v = if sign_flip && k % 2 == 1 { -sum } else { sum };
        }
        return out;
    }

    // J_k(x) is negligible once k exceeds x by a few multiples of x^{1/3}.
    let extra = 30.0 + 12.0 * axf.cbrt() + (40.0 * (max_order.max(1) as f64)).sqrt();
    let mut start = (max_order as f64).max(axf) as usize + extra as usize;
    if start % 2 == 1 {
        start += 1;
    }

    let big = T::of(1e15);
    let small = T::of(1e-15);
    let two = T::of(2.0);

    let mut next = T::zero(); // J_{k+1}
    let mut cur = T::of(1e-30); // J_k
    let mut norm = T::zero();
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let prev = two * T::of(k as f64) / ax * cur - next;
        next = cur;
        cur = prev;
        let order = k - 1;
        if order <= max_order {
            out[order] = cur;
        }
        if order % 2 == 0 && order > 0 {
            norm = norm + two * cur;
        }
        if cur.abs() > big {
            cur = cur * small;
            next = next * small;
            norm = norm * small;
            for v in out.iter_mut().skip(order) {
                *v = *v * small;
            }
        }
    }
    norm = norm + cur;
    for v in out.iter_mut() {
        *v = *v / norm;
    }
    if sign_flip {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for a signed integer order, via `J_{-n} = (-1)^n J_n`.
pub fn bessel_j<T: Scalar>(order: i64, x: T) -> T {
    let n = order.unsigned_abs() as usize;
    let v = bessel_j_sequence(x, n)[n];
    if order < 0 && n % 2 == 1 {
        -v
    } else {
        v
    }
}
