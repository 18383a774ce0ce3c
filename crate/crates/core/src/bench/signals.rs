use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::wavelet::Signal1D;

use super::BenchError;

/// The four classic piecewise-smooth test signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestSignal {
    Blocks,
    Bumps,
    Heavisine,
    Doppler,
}

impl TestSignal {
    pub const ALL: [TestSignal; 4] = [
        TestSignal::Blocks,
        TestSignal::Bumps,
        TestSignal::Heavisine,
        TestSignal::Doppler,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestSignal::Blocks => "blocks",
            TestSignal::Bumps => "bumps",
            TestSignal::Heavisine => "heavisine",
            TestSignal::Doppler => "doppler",
        }
    }

    /// Value at `t ∈ (0, 1]`.
    pub fn eval(self, t: f64) -> f64 {
        match self {
            TestSignal::Blocks => BLOCKS_POS
                .iter()
                .zip(BLOCKS_HGT)
                .map(|(&p, h)| if t >= p { h } else { 0.0 })
                .sum(),
            TestSignal::Bumps => BUMPS_POS
                .iter()
                .zip(BUMPS_HGT)
                .zip(BUMPS_WIDTH)
                .map(|((&p, h), w)| h * (1.0 + ((t - p) / w).abs()).powi(-4))
                .sum(),
            TestSignal::Heavisine => {
                4.0 * (4.0 * PI * t).sin() - sign(t - 0.3) - sign(0.72 - t)
            }
            TestSignal::Doppler => {
                (t * (1.0 - t)).sqrt() * (2.0 * PI * 1.05 / (t + 0.05)).sin()
            }
        }
    }
}

const BLOCKS_POS: [f64; 11] = [0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81];
const BLOCKS_HGT: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];
const BUMPS_POS: [f64; 11] = BLOCKS_POS;
const BUMPS_HGT: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
const BUMPS_WIDTH: [f64; 11] = [
    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
];

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl fmt::Display for TestSignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestSignal {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TestSignal::ALL
            .into_iter()
            .find(|sig| sig.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| BenchError::UnknownSignal(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestSignalSpec {
    signal: TestSignal,
    n: usize,
}

impl TestSignalSpec {
    pub const MIN_LEN: usize = 64;

    pub fn new(signal: TestSignal, n: usize) -> Result<Self, BenchError> {
        if n < Self::MIN_LEN || !n.is_power_of_two() {
            return Err(BenchError::InvalidLength(n));
        }
        Ok(Self { signal, n })
    }

    pub fn signal(&self) -> TestSignal {
        self.signal
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Samples the signal at `t = i/n`, `i = 1..=n`, with no rescaling.
pub fn generate_signal(spec: &TestSignalSpec) -> Signal1D {
    let n = spec.n as f64;
    let samples = (1..=spec.n).map(|i| spec.signal.eval(i as f64 / n)).collect();
    Signal1D::new(samples).expect("generated samples are finite with power-of-two length")
}
