//! Counter-based normal variates.
//!
//! Every standard normal used by the engine is a pure function of
//! `(seed, path_index, step)`: Philox4x32-10 maps the counter
//! `(step / 2, path_index)` under key `seed` to 128 random bits, and a
//! Box-Muller transform turns them into the pair of normals for steps
//! `2j` and `2j + 1`. Results therefore never depend on scheduling, and
//! reusing a seed across parameter sets gives common random numbers.

const M0: u32 = 0xD251_1F53;
const M1: u32 = 0xCD9E_8D57;
const W0: u32 = 0x9E37_79B9;
const W1: u32 = 0xBB67_AE85;

#[inline(always)]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = u64::from(a) * u64::from(b);
    ((p >> 32) as u32, p as u32)
}

#[inline(always)]
fn round(c: [u32; 4], k: [u32; 2]) -> [u32; 4] {
    let (hi0, lo0) = mulhilo(M0, c[0]);
    let (hi1, lo1) = mulhilo(M1, c[2]);
    [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0]
}

/// The Philox4x32 bijection with 10 rounds.
#[inline]
pub fn philox4x32_10(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = round(counter, key);
    let mut k = key;
    for _ in 1..10 {
        k = [k[0].wrapping_add(W0), k[1].wrapping_add(W1)];
        c = round(c, k);
    }
    c
}

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Pair of independent standard normals for block `block` of path `path`.
#[inline]
pub fn normal_pair(seed: u64, path: u64, block: u64) -> (f64, f64) {
    let key = [seed as u32, (seed >> 32) as u32];
    let ctr = [
        block as u32,
        (block >> 32) as u32,
        path as u32,
        (path >> 32) as u32,
    ];
    let x = philox4x32_10(ctr, key);
    let m1 = ((u64::from(x[0]) << 32) | u64::from(x[1])) >> 11;
    let m2 = ((u64::from(x[2]) << 32) | u64::from(x[3])) >> 11;
    // u1 in (0, 1] keeps the logarithm finite.
    let u1 = (m1 + 1) as f64 * TWO_POW_M53;
    let u2 = m2 as f64 * TWO_POW_M53;
    let rad = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (rad * c, rad * s)
}

/// Normal variate for `(seed, path, step)`; random access into the stream.
#[inline]
pub fn normal_at(seed: u64, path: u64, step: u64) -> f64 {
    let (a, b) = normal_pair(seed, path, step / 2);
    if step.is_multiple_of(2) {
        a
    } else {
        b
    }
}

/// Sequential reader over one path's noise, equivalent to calling
/// [`normal_at`] for steps `0, 1, 2, ...`.
#[derive(Debug, Clone)]
pub struct NormalStream {
    seed: u64,
    path: u64,
    step: u64,
    spare: f64,
}

impl NormalStream {
    pub fn new(seed: u64, path: u64) -> Self {
        Self {
            seed,
            path,
            step: 0,
            spare: 0.0,
        }
    }

    #[inline]
    pub fn next_normal(&mut self) -> f64 {
        let z = if self.step.is_multiple_of(2) {
            let (a, b) = normal_pair(self.seed, self.path, self.step / 2);
            self.spare = b;
            a
        } else {
            self.spare
        };
        self.step += 1;
        z
    }
}
