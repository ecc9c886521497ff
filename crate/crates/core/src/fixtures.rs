//! Hand-built instances with known structure, used by tests and the CLI
//! examples. Node constants are 0-based ids.
//!
//! * `P3`: a three-node path with one link joining its ends.
//! * `STAR4`: a star with four leaves and links `ab`, `cd`.
//! * `LOCK`: a locked leaf `a` (twin `b`, locking link `bb'`) under `r-v-u`.
//! * `DTREE`: a 3-leaf dangerous subtree at `u` with `b` open to the root.
//! * `DTREE4`: `DTREE` with `b` replaced by a stem `s` over twins `x`, `y`.
//!
//! `LOCK`, `DTREE` and `DTREE4` are rooted at `r`, a degree-one node, so they
//! must be solved with an explicit root.

use crate::instance::Instance;

pub struct Fixture {
    pub name: &'static str,
    pub instance: Instance,
    pub root: usize,
}

fn named(n: usize, edges: &[(usize, usize)], links: &[(usize, usize)], names: &[&str]) -> Instance {
    Instance::new(n, edges.to_vec(), links.to_vec())
        .expect("fixture is a valid instance")
        .with_names(names.iter().map(|s| s.to_string()).collect())
}

pub fn p3() -> Instance {
    Instance::new(3, vec![(0, 1), (1, 2)], vec![(0, 2)]).expect("valid")
}

pub mod star4 {
    pub const R: usize = 0;
    pub const A: usize = 1;
    pub const B: usize = 2;
    pub const C: usize = 3;
    pub const D: usize = 4;
}

pub fn star4() -> Instance {
    use star4::*;
    named(
        5,
        &[(R, A), (R, B), (R, C), (R, D)],
        &[(A, B), (C, D)],
        &["r", "a", "b", "c", "d"],
    )
}

pub mod lock {
    pub const R: usize = 0;
    pub const V: usize = 1;
    pub const U: usize = 2;
    pub const S: usize = 3;
    pub const A: usize = 4;
    pub const B: usize = 5;
    pub const B2: usize = 6;
}

pub fn lock() -> Instance {
    use lock::*;
    named(
        7,
        &[(R, V), (V, U), (U, S), (S, A), (S, B), (U, B2)],
        &[(A, B), (B, B2), (A, U), (B2, R)],
        &["r", "v", "u", "s", "a", "b", "b'"],
    )
}

pub mod dtree {
    pub const R: usize = 0;
    pub const V: usize = 1;
    pub const U: usize = 2;
    pub const B: usize = 3;
    pub const B2: usize = 4;
    pub const A: usize = 5;
}

pub fn dtree() -> Instance {
    use dtree::*;
    named(
        6,
        &[(R, V), (V, U), (U, B), (U, B2), (U, A)],
        &[(B, B2), (A, B2), (B, R)],
        &["r", "v", "u", "b", "b'", "a"],
    )
}

pub mod dtree4 {
    pub const R: usize = 0;
    pub const V: usize = 1;
    pub const U: usize = 2;
    pub const S: usize = 3;
    pub const X: usize = 4;
    pub const Y: usize = 5;
    pub const A: usize = 6;
    pub const B2: usize = 7;
}

pub fn dtree4() -> Instance {
    use dtree4::*;
    named(
        8,
        &[(R, V), (V, U), (U, S), (S, X), (S, Y), (U, A), (U, B2)],
        &[(X, Y), (X, B2), (A, B2), (X, R)],
        &["r", "v", "u", "s", "x", "y", "a", "b'"],
    )
}

pub fn all() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "P3",
            instance: p3(),
            root: 1,
        },
        Fixture {
            name: "STAR4",
            instance: star4(),
            root: star4::R,
        },
        Fixture {
            name: "LOCK",
            instance: lock(),
            root: lock::R,
        },
        Fixture {
            name: "DTREE",
            instance: dtree(),
            root: dtree::R,
        },
        Fixture {
            name: "DTREE4",
            instance: dtree4(),
            root: dtree4::R,
        },
    ]
}
