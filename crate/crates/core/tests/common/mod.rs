//! Published reference values shared by the integration tests.
#![allow(dead_code)]

use mtm::Scheme;

pub mod props;

pub const NORMAL_THETAS: [f64; 9] = [-25.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 25.0];
pub const FRECHET_BETAS: [f64; 9] = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 25.0];

/// Rows `(a1, b1, a2, b2, values)` of the normal ARE table, sigma = 3.
pub const NORMAL_ARE: [([f64; 4], [f64; 9]); 8] = [
    ([0.02, 0.02, 0.02, 0.02], [0.943; 9]),
    (
        [0.02, 0.02, 0.00, 0.04],
        [
            0.903, 0.931, 0.944, 0.952, 0.946, 0.903, 0.794, 0.599, 0.121,
        ],
    ),
    ([0.05, 0.05, 0.05, 0.05], [0.872; 9]),
    (
        [0.05, 0.05, 0.00, 0.10],
        [
            0.878, 0.890, 0.897, 0.901, 0.883, 0.746, 0.206, 0.334, 0.650,
        ],
    ),
    ([0.10, 0.10, 0.10, 0.10], [0.769; 9]),
    (
        [0.10, 0.10, 0.00, 0.20],
        [
            0.851, 0.850, 0.849, 0.842, 0.805, 0.330, 0.684, 0.797, 0.831,
        ],
    ),
    ([0.15, 0.15, 0.15, 0.15], [0.676; 9]),
    (
        [0.15, 0.15, 0.00, 0.30],
        [
            0.812, 0.809, 0.806, 0.797, 0.753, 0.249, 0.788, 0.810, 0.815,
        ],
    ),
];

/// Rows of the Fréchet ARE table, sigma = 2.
pub const FRECHET_ARE: [([f64; 4], [f64; 9]); 8] = [
    ([0.02, 0.02, 0.02, 0.02], [0.771; 9]),
    (
        [0.02, 0.02, 0.00, 0.04],
        [
            0.259, 0.633, 0.786, 0.815, 0.827, 0.833, 0.834, 0.835, 0.835,
        ],
    ),
    ([0.05, 0.05, 0.05, 0.05], [0.754; 9]),
    (
        [0.05, 0.05, 0.00, 0.10],
        [
            0.458, 0.004, 0.610, 0.759, 0.809, 0.833, 0.840, 0.842, 0.844,
        ],
    ),
    ([0.10, 0.10, 0.10, 0.10], [0.693; 9]),
    (
        [0.10, 0.10, 0.00, 0.20],
        [
            0.760, 0.624, 0.036, 0.560, 0.736, 0.802, 0.819, 0.824, 0.828,
        ],
    ),
    ([0.15, 0.15, 0.15, 0.15], [0.623; 9]),
    (
        [0.15, 0.15, 0.00, 0.30],
        [
            0.812, 0.762, 0.439, 0.296, 0.674, 0.786, 0.810, 0.817, 0.822,
        ],
    ),
];

/// Simulation table row: proportions (`None` for the MLE), mean ratios at
/// n = 100 and n = 1000, and RE at n = 100, 1000 and the limit.
pub struct SimRow {
    pub scheme: Option<[f64; 4]>,
    pub ratio_100: [f64; 2],
    pub ratio_1000: [f64; 2],
    pub re_100: f64,
    pub re_1000: f64,
    pub re_limit: f64,
}

const fn row(scheme: Option<[f64; 4]>, r100: [f64; 2], r1000: [f64; 2], re: [f64; 3]) -> SimRow {
    SimRow {
        scheme,
        ratio_100: r100,
        ratio_1000: r1000,
        re_100: re[0],
        re_1000: re[1],
        re_limit: re[2],
    }
}

/// Normal model, theta = 0.1, sigma = 5.
pub const NORMAL_SIM: [SimRow; 13] = [
    row(None, [0.98, 0.99], [1.00, 1.00], [0.999, 0.994, 1.0]),
    row(
        Some([0.00, 0.00, 0.00, 0.00]),
        [0.98, 0.99],
        [1.00, 1.00],
        [0.999, 0.994, 1.0],
    ),
    row(
        Some([0.00, 0.05, 0.00, 0.05]),
        [1.10, 1.00],
        [1.00, 1.00],
        [0.930, 0.929, 0.932],
    ),
    row(
        Some([0.00, 0.10, 0.00, 0.10]),
        [1.10, 1.00],
        [1.01, 1.00],
        [0.877, 0.876, 0.872],
    ),
    row(
        Some([0.10, 0.00, 0.05, 0.05]),
        [0.84, 1.00],
        [0.98, 1.00],
        [0.874, 0.872, 0.872],
    ),
    row(
        Some([0.05, 0.05, 0.00, 0.10]),
        [1.00, 0.99],
        [1.00, 1.00],
        [0.884, 0.881, 0.883],
    ),
    row(
        Some([0.10, 0.10, 0.00, 0.20]),
        [1.01, 0.99],
        [1.00, 1.00],
        [0.808, 0.805, 0.805],
    ),
    row(
        Some([0.15, 0.15, 0.00, 0.30]),
        [0.97, 0.99],
        [1.01, 1.00],
        [0.753, 0.752, 0.752],
    ),
    row(
        Some([0.00, 0.10, 0.05, 0.05]),
        [1.07, 1.00],
        [1.01, 1.00],
        [0.874, 0.872, 0.876],
    ),
    row(
        Some([0.05, 0.05, 0.10, 0.00]),
        [1.00, 0.99],
        [1.00, 1.00],
        [0.888, 0.881, 0.884],
    ),
    row(
        Some([0.10, 0.10, 0.20, 0.00]),
        [0.99, 0.99],
        [1.00, 1.00],
        [0.807, 0.810, 0.807],
    ),
    row(
        Some([0.15, 0.15, 0.30, 0.00]),
        [1.00, 0.99],
        [1.00, 1.00],
        [0.758, 0.760, 0.754],
    ),
    row(
        Some([0.25, 0.50, 0.50, 0.25]),
        [1.03, 1.00],
        [1.00, 1.00],
        [0.493, 0.488, 0.491],
    ),
];

/// Fréchet model, beta = 5, sigma = 2.
pub const FRECHET_SIM: [SimRow; 13] = [
    row(None, [0.99, 1.17], [1.00, 1.01], [0.729, 0.971, 1.0]),
    row(
        Some([0.00, 0.00, 0.00, 0.00]),
        [0.99, 1.19],
        [1.00, 1.02],
        [0.509, 0.671, 0.690],
    ),
    row(
        Some([0.00, 0.05, 0.00, 0.05]),
        [1.00, 1.18],
        [1.00, 1.02],
        [0.626, 0.831, 0.856],
    ),
    row(
        Some([0.00, 0.10, 0.00, 0.10]),
        [1.00, 1.19],
        [1.00, 1.02],
        [0.629, 0.849, 0.875],
    ),
    row(
        Some([0.10, 0.00, 0.05, 0.05]),
        [1.01, 1.15],
        [1.00, 1.01],
        [0.448, 0.606, 0.627],
    ),
    row(
        Some([0.05, 0.05, 0.00, 0.10]),
        [1.00, 1.17],
        [1.00, 1.02],
        [0.614, 0.809, 0.833],
    ),
    row(
        Some([0.10, 0.10, 0.00, 0.20]),
        [1.00, 1.18],
        [1.00, 1.02],
        [0.583, 0.773, 0.802],
    ),
    row(
        Some([0.15, 0.15, 0.00, 0.30]),
        [1.00, 1.18],
        [1.00, 1.02],
        [0.549, 0.759, 0.786],
    ),
    row(
        Some([0.00, 0.10, 0.05, 0.05]),
        [1.00, 1.19],
        [1.00, 1.02],
        [0.563, 0.753, 0.774],
    ),
    row(
        Some([0.05, 0.05, 0.10, 0.00]),
        [0.99, 1.26],
        [1.00, 1.02],
        [0.378, 0.526, 0.548],
    ),
    row(
        Some([0.10, 0.10, 0.20, 0.00]),
        [0.99, 1.27],
        [1.00, 1.03],
        [0.348, 0.487, 0.509],
    ),
    row(
        Some([0.15, 0.15, 0.30, 0.00]),
        [0.99, 1.29],
        [1.00, 1.03],
        [0.317, 0.470, 0.489],
    ),
    row(
        Some([0.25, 0.50, 0.50, 0.25]),
        [1.00, 1.23],
        [1.00, 1.02],
        [0.308, 0.436, 0.457],
    ),
];

pub fn scheme(p: [f64; 4]) -> Scheme {
    Scheme::new(p[0], p[1], p[2], p[3]).expect("reference scheme is valid")
}

/// Hurricane loss reference values: (theta, sigma, FIT, AIC, BIC) for the
/// lognormal MLE on original and modified data, Fréchet MLE
/// (beta, sigma*, FIT, AIC, BIC), and the lognormal fit with 1/30 trimmed
/// from both ends of both moments.
pub const HURRICANE_LN_MLE: [f64; 5] = [22.80, 0.83, 0.1036, 1446.0, 1449.0];
pub const HURRICANE_LN_MLE_MODIFIED: [f64; 5] = [22.88, 1.10, 0.2932, 1467.0, 1470.0];
pub const HURRICANE_FR_MLE: [f64; 5] = [0.72, 5.35, 0.1277, 1446.0, 1448.0];
pub const HURRICANE_LN_T3: [f64; 5] = [22.77, 0.85, 0.1013, 1446.0, 1449.0];
pub const HURRICANE_MAX: f64 = 72.303;

/// Location of the hurricane loss CSV: `MTM_HURRICANE_CSV` or the
/// crate's `data/hurricane.csv`.
pub fn hurricane_path() -> std::path::PathBuf {
    std::env::var_os("MTM_HURRICANE_CSV")
        .map(Into::into)
        .unwrap_or_else(|| {
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/hurricane.csv")
        })
}
