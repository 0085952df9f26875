//! Random model generators for property tests.

use num_complex::Complex64;
use proptest::prelude::*;

use fastsvf::lti::RationalTransfer;
use fastsvf::Polynomial;

/// Pole set of up to `max_order` poles: real ones or conjugate pairs, with
/// real parts of magnitude in `[0.2, 5]`. Unstable sets may flip signs.
pub fn poles(max_order: usize, allow_unstable: bool) -> impl Strategy<Value = Vec<Complex64>> {
    let one = (0.2f64..5.0, 0.1f64..4.0, any::<bool>(), any::<bool>());
    prop::collection::vec(one, 1..=max_order).prop_map(move |specs| {
        let mut out = Vec::new();
        for (mag, im, pair, flip) in specs {
            let re = if allow_unstable && flip { mag } else { -mag };
            if pair && out.len() + 2 <= max_order {
                out.push(Complex64::new(re, im));
                out.push(Complex64::new(re, -im));
            } else if out.len() < max_order {
                out.push(Complex64::new(re, 0.0));
            }
        }
        out
    })
}

/// Transfer function with the given pole strategy and a random numerator of
/// degree below (strict) or up to the pole count.
pub fn transfer(max_order: usize, allow_unstable: bool, strict: bool) -> impl Strategy<Value = RationalTransfer> {
    poles(max_order, allow_unstable).prop_flat_map(move |ps| {
        let n = ps.len();
        let deg = if strict { n - 1 } else { n };
        (Just(ps), prop::collection::vec(-3.0f64..3.0, deg + 1), 0.5f64..3.0).prop_map(|(ps, mut num, lead)| {
            let last = num.len() - 1;
            num[last] = if num[last] >= 0.0 { num[last] + lead } else { num[last] - lead };
            RationalTransfer::new(Polynomial::new(num), Polynomial::from_roots(&ps)).expect("generated model")
        })
    })
}
