//! Reference registers used by tests, the acceptance suite and the CLI
//! documentation. The text forms live in `fixtures/*.nlfsr`.

use crate::cli::spec::parse_spec;
use crate::register::Nlfsr;

macro_rules! fixtures {
    ($($(#[$doc:meta])* $name:ident),* $(,)?) => {
        $(
            $(#[$doc])*
            pub fn $name() -> Nlfsr {
                parse_spec(include_str!(concat!("../fixtures/", stringify!($name), ".nlfsr")))
                    .expect(concat!("fixture ", stringify!($name), " parses"))
            }
        )*

        /// `(name, register)` for every fixture.
        pub fn all() -> Vec<(&'static str, Nlfsr)> {
            vec![$((stringify!($name), $name())),*]
        }

        /// Text form of a fixture by name.
        pub fn source(name: &str) -> Option<&'static str> {
            match name {
                $(stringify!($name) => Some(include_str!(concat!("../fixtures/", stringify!($name), ".nlfsr"))),)*
                _ => None,
            }
        }
    };
}

fixtures! {
    /// `f3 = x0 + x1 + x2 + x1*x3`.
    fib4_nonlinear,
    /// Same bit-3 recurrence as [`fib4_nonlinear`], different outputs.
    galois4_same_recurrence,
    /// Equivalent to [`fib4_nonlinear`] without being uniform.
    galois4_nonuniform_equivalent,
    /// `f3 = x0 + x1*x3`, `f2 = x3`.
    shift_demo4,
    /// 32-bit Fibonacci register with a cubic term.
    fib32_cipher,
    /// Fully shifted form of [`fib32_cipher`].
    galois32_fully_shifted,
    /// Equivalent to [`fib32_cipher`] using five feedback variables.
    galois32_hand_optimized,
    /// Fibonacci LFSR for `x^3 + x + 1`.
    lfsr3_fibonacci,
    /// Galois LFSR for `x^3 + x + 1`.
    lfsr3_galois,
    /// Output period shorter than its state cycle from `0001`.
    galois4_period_divergence,
    /// Full-period register whose output breaks the run distribution.
    galois3_golomb_failure,
}
