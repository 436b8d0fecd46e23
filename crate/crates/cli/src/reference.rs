//! Bundled reference data: element numbers, tabulated minimal-model and
//! extended-model results, and experimental ground-state energies.
//!
//! Experimental energies are shown for context only; nothing in the code
//! asserts against them.

/// Element symbols for Z = 1..=30.
const SYMBOLS: [&str; 30] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al",
    "Si", "P", "S", "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe",
    "Co", "Ni", "Cu", "Zn",
];

pub fn element_number(symbol: &str) -> Option<u32> {
    SYMBOLS
        .iter()
        .position(|s| s.eq_ignore_ascii_case(symbol))
        .map(|i| i as u32 + 1)
}

pub fn element_symbol(z: u32) -> Option<&'static str> {
    SYMBOLS.get(z.checked_sub(1)? as usize).copied()
}

/// Minimal-model reference row (3p core, shells through 4s): ground term,
/// subspace dimension, optimized energy, and the experimental ground-state
/// energy where available (both in hartree).
pub struct MinimalRef {
    pub z: u32,
    pub term: &'static str,
    pub dim: usize,
    pub energy: f64,
    pub experimental: Option<f64>,
}

pub const MINIMAL: [MinimalRef; 12] = [
    MinimalRef { z: 19, term: "2S", dim: 1, energy: -596.7993, experimental: Some(-601.9337) },
    MinimalRef { z: 20, term: "1S", dim: 2, energy: -674.2442, experimental: Some(-680.1920) },
    MinimalRef { z: 21, term: "2D", dim: 4, energy: -756.8908, experimental: Some(-763.8673) },
    MinimalRef { z: 22, term: "3F", dim: 5, energy: -845.1599, experimental: Some(-853.3503) },
    MinimalRef { z: 23, term: "4F", dim: 4, energy: -939.1657, experimental: Some(-948.8394) },
    MinimalRef { z: 24, term: "5D", dim: 3, energy: -1039.0409, experimental: Some(-1050.4914) },
    MinimalRef { z: 25, term: "6S", dim: 1, energy: -1144.9715, experimental: Some(-1158.2670) },
    MinimalRef { z: 26, term: "5D", dim: 1, energy: -1256.7813, experimental: Some(-1271.6930) },
    MinimalRef { z: 27, term: "4F", dim: 2, energy: -1374.8903, experimental: Some(-1393.3526) },
    MinimalRef { z: 28, term: "3F", dim: 1, energy: -1499.3759, experimental: Some(-1520.6907) },
    MinimalRef { z: 29, term: "2D", dim: 1, energy: -1630.3692, experimental: Some(-1655.1317) },
    MinimalRef { z: 30, term: "1S", dim: 1, energy: -1768.0729, experimental: None },
];

/// Extended-model reference row (3p core, shells through 4d, 4s occupation
/// pinned): term, dimension, optimized energy, and exponents in shell order
/// 1s 2s 2p 3s 3p 3d 4s 4p 4d; `None` marks shells that cannot influence
/// the state.
pub struct ExtendedRef {
    pub z: u32,
    pub pin: u32,
    pub term: &'static str,
    pub dim: usize,
    pub energy: f64,
    pub exponents: [Option<f64>; 9],
}

pub const EXTENDED: [ExtendedRef; 10] = [
    ExtendedRef {
        z: 20, pin: 1, term: "3D", dim: 2, energy: -674.1634,
        exponents: [Some(19.68), Some(17.41), Some(16.13), Some(12.05), Some(10.38),
                    Some(2.83), Some(5.43), None, Some(2.46)],
    },
    ExtendedRef {
        z: 20, pin: 2, term: "1S", dim: 1, energy: -674.2442,
        exponents: [Some(19.68), Some(17.41), Some(16.13), Some(12.10), Some(10.38),
                    None, Some(5.03), None, None],
    },
    ExtendedRef {
        z: 21, pin: 1, term: "4F", dim: 3, energy: -756.9381,
        exponents: [Some(20.68), Some(18.42), Some(17.15), Some(12.99), Some(11.30),
                    Some(8.26), Some(5.35), None, Some(6.24)],
    },
    ExtendedRef {
        z: 21, pin: 2, term: "2D", dim: 2, energy: -756.9968,
        exponents: [Some(20.68), Some(18.42), Some(17.15), Some(13.06), Some(11.34),
                    Some(10.07), Some(5.31), None, Some(8.46)],
    },
    ExtendedRef {
        z: 22, pin: 1, term: "5F", dim: 8, energy: -845.3714,
        exponents: [Some(21.68), Some(19.43), Some(18.16), Some(13.89), Some(12.18),
                    Some(9.91), Some(5.51), Some(1.45), Some(7.75)],
    },
    ExtendedRef {
        z: 22, pin: 2, term: "3F", dim: 3, energy: -845.4210,
        exponents: [Some(21.68), Some(19.43), Some(18.16), Some(13.98), Some(12.23),
                    Some(11.30), Some(5.52), None, Some(9.67)],
    },
    ExtendedRef {
        z: 23, pin: 1, term: "6D", dim: 17, energy: -939.5952,
        exponents: [Some(22.68), Some(20.44), Some(19.17), Some(14.78), Some(13.04),
                    Some(11.20), Some(5.61), Some(1.88), Some(8.93)],
    },
    ExtendedRef {
        z: 23, pin: 2, term: "4F", dim: 8, energy: -939.6375,
        exponents: [Some(22.68), Some(20.44), Some(19.17), Some(14.86), Some(13.10),
                    Some(12.36), Some(5.70), Some(5.25), Some(10.62)],
    },
    ExtendedRef {
        z: 24, pin: 1, term: "7S", dim: 14, energy: -1039.7864,
        exponents: [Some(23.68), Some(21.44), Some(20.18), Some(15.64), Some(13.89),
                    Some(12.37), Some(5.67), Some(9.51), Some(10.00)],
    },
    ExtendedRef {
        z: 24, pin: 2, term: "5D", dim: 17, energy: -1039.7852,
        exponents: [Some(23.68), Some(21.44), Some(20.18), Some(15.74), Some(13.95),
                    Some(13.36), Some(5.87), Some(0.93), Some(11.49)],
    },
];

pub fn minimal_row(z: u32) -> Option<&'static MinimalRef> {
    MINIMAL.iter().find(|r| r.z == z)
}

pub fn extended_row(z: u32, pin: u32) -> Option<&'static ExtendedRef> {
    EXTENDED.iter().find(|r| r.z == z && r.pin == pin)
}
