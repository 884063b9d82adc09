//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use vqh_core::qubo::{chord_qubo, ChordEncoding, ChordSpec, QuboProblem};

pub type Matrix = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn ry(theta: f64) -> [[Complex64; 2]; 2] {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
}

pub fn rz(theta: f64) -> [[Complex64; 2]; 2] {
    let h = theta / 2.0;
    [
        [Complex64::from_polar(1.0, -h), c(0.0, 0.0)],
        [c(0.0, 0.0), Complex64::from_polar(1.0, h)],
    ]
}

/// Full `2^n × 2^n` matrix of a single-qubit gate; qubit `q` is bit `q`
/// of the row/column index.
pub fn embed(n: usize, q: usize, g: [[Complex64; 2]; 2]) -> Matrix {
    let dim = 1 << n;
    let mask = !(1usize << q);
    (0..dim)
        .map(|r| {
            (0..dim)
                .map(|col| {
                    if r & mask != col & mask {
                        c(0.0, 0.0)
                    } else {
                        g[(r >> q) & 1][(col >> q) & 1]
                    }
                })
                .collect()
        })
        .collect()
}

pub fn cnot_matrix(n: usize, control: usize, target: usize) -> Matrix {
    let dim = 1 << n;
    (0..dim)
        .map(|r| {
            (0..dim)
                .map(|col| {
                    let image = if (col >> control) & 1 == 1 { col ^ (1 << target) } else { col };
                    if image == r {
                        c(1.0, 0.0)
                    } else {
                        c(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let dim = a.len();
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| (0..dim).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// Circuit unitary built by multiplying dense gate matrices, then applied to |0…0⟩.
pub fn dense_prepare(n: usize, reps: usize, pairs: &[(usize, usize)], params: &[f64]) -> Vec<Complex64> {
    let dim = 1 << n;
    let mut u: Matrix = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect();
    for layer in 0..=reps {
        if layer > 0 {
            for &(ctl, tgt) in pairs {
                u = matmul(&cnot_matrix(n, ctl, tgt), &u);
            }
        }
        let base = layer * 2 * n;
        for q in 0..n {
            u = matmul(&embed(n, q, ry(params[base + q])), &u);
        }
        for q in 0..n {
            u = matmul(&embed(n, q, rz(params[base + n + q])), &u);
        }
    }
    (0..dim).map(|i| u[i][0]).collect()
}

/// `⟨1|ρ_q|1⟩` from the reduced density matrix of qubit `q`.
pub fn partial_trace_marginals(amps: &[Complex64]) -> Vec<f64> {
    let n = amps.len().trailing_zeros() as usize;
    (0..n)
        .map(|q| {
            let mut rho = [[c(0.0, 0.0); 2]; 2];
            for (k, ak) in amps.iter().enumerate() {
                for (l, al) in amps.iter().enumerate() {
                    // trace out every other qubit: keep pairs that agree off q
                    if (k ^ l) & !(1 << q) == 0 {
                        rho[(k >> q) & 1][(l >> q) & 1] += ak * al.conj();
                    }
                }
            }
            rho[1][1].re
        })
        .collect()
}

/// QUBO cost from a full symmetric matrix with `a_i` on the diagonal.
pub fn matrix_cost(matrix: &[Vec<f64>], bits: &[u8]) -> f64 {
    let n = bits.len();
    let mut total = 0.0;
    for i in 0..n {
        total += matrix[i][i] * f64::from(bits[i]);
        for j in 0..n {
            if i != j {
                total += 0.5 * matrix[i][j] * f64::from(bits[i]) * f64::from(bits[j]);
            }
        }
    }
    total
}

pub fn problem_matrix(q: &QuboProblem) -> Vec<Vec<f64>> {
    let n = q.n();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        m[i][i] = q.linear()[i];
    }
    for (&(i, j), &b) in q.quadratic() {
        m[i][j] = b;
        m[j][i] = b;
    }
    m
}

pub fn bits_of(k: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((k >> i) & 1) as u8).collect()
}

/// Ising energy straight from `z_i = 1 − 2 n_i`, fields and couplings.
pub fn ising_energy_direct(fields: &[f64], couplings: &BTreeMap<(usize, usize), f64>, bits: &[u8]) -> f64 {
    let z: Vec<f64> = bits.iter().map(|&b| 1.0 - 2.0 * f64::from(b)).collect();
    fields.iter().zip(&z).map(|(h, s)| h * s).sum::<f64>()
        + couplings.iter().map(|(&(i, j), b)| b * z[i] * z[j]).sum::<f64>()
}

/// Random QUBO; integer coefficients when `integer` so ties are exact.
pub fn random_qubo(rng: &mut impl Rng, n: usize, integer: bool) -> QuboProblem {
    let draw = |rng: &mut dyn rand::RngCore| {
        if integer {
            f64::from(rng.gen_range(-3i32..=3))
        } else {
            rng.gen_range(-2.0..2.0)
        }
    };
    let linear: Vec<f64> = (0..n).map(|_| draw(rng)).collect();
    let mut quadratic = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.6) {
                quadratic.insert((i, j), draw(rng));
            }
        }
    }
    QuboProblem::unlabeled(linear, quadratic).unwrap()
}

pub fn chord(names: &[&str], encoding: ChordEncoding) -> QuboProblem {
    chord_qubo(&ChordSpec::from_names(names, encoding).unwrap(), 12).unwrap()
}

pub fn c_major_indicator() -> Vec<f64> {
    let mut v = vec![0.0; 12];
    for i in [0, 4, 7] {
        v[i] = 1.0;
    }
    v
}

pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / len as f64).cos())
        .collect()
}

/// Power spectrum `|X_k|²` of a Hann-windowed block, bins `0..=len/2`.
pub fn power_spectrum(samples: &[f32], len: usize) -> Vec<f64> {
    let w = hann(len);
    let mut buf: Vec<Complex64> = (0..len)
        .map(|i| c(f64::from(samples.get(i).copied().unwrap_or(0.0)) * w[i], 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    buf[..=len / 2].iter().map(|x| x.norm_sqr()).collect()
}

/// Welch estimate: Hann blocks with 50% overlap, averaged.
pub fn welch(samples: &[f32], len: usize) -> Vec<f64> {
    let mut acc = vec![0.0; len / 2 + 1];
    let mut count = 0.0;
    let mut start = 0;
    while start + len <= samples.len() {
        for (a, p) in acc.iter_mut().zip(power_spectrum(&samples[start..start + len], len)) {
            *a += p;
        }
        count += 1.0;
        start += len / 2;
    }
    acc.iter().map(|a| a / count).collect()
}

pub fn bin_of(freq: f64, len: usize, sample_rate: u32) -> usize {
    (freq * len as f64 / f64::from(sample_rate)).round() as usize
}

pub fn db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Largest power within `±radius` bins of `centre`.
pub fn peak_near(spectrum: &[f64], centre: usize, radius: usize) -> (usize, f64) {
    let lo = centre.saturating_sub(radius);
    let hi = (centre + radius).min(spectrum.len() - 1);
    (lo..=hi)
        .map(|k| (k, spectrum[k]))
        .fold((lo, f64::MIN), |best, x| if x.1 > best.1 { x } else { best })
}
