//! Latent vectors and the decoder that turns them into level segments.
//!
//! The parametric decoder splits a segment into seven zones of four columns.
//! Zone `i` reads its ground height from `z[i]`, a gap switch from `z[7+i]`,
//! an enemy switch from `z[14+i]` and a coin-row switch from `z[21+i]`;
//! `z[28..32]` describe an optional floating platform.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::LatentError;
use crate::level::{Level, TileKind, SEGMENT_COLS, SEGMENT_ROWS};

pub const LATENT_DIM: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LatentVector([f64; LATENT_DIM]);

impl LatentVector {
    pub const ZERO: LatentVector = LatentVector([0.0; LATENT_DIM]);

    pub fn values(&self) -> &[f64; LATENT_DIM] {
        &self.0
    }

    /// Same vector with one component replaced, then clamped.
    pub fn with(mut self, index: usize, value: f64) -> Self {
        self.0[index] = value.clamp(-1.0, 1.0);
        self
    }
}

impl TryFrom<Vec<f64>> for LatentVector {
    type Error = LatentError;

    fn try_from(raw: Vec<f64>) -> Result<Self, Self::Error> {
        clamp(&raw)
    }
}

impl From<LatentVector> for Vec<f64> {
    fn from(z: LatentVector) -> Self {
        z.0.to_vec()
    }
}

/// Componentwise clamp to `[-1, 1]`.
pub fn clamp(raw: &[f64]) -> Result<LatentVector, LatentError> {
    if raw.len() != LATENT_DIM {
        return Err(LatentError::WrongLength {
            expected: LATENT_DIM,
            got: raw.len(),
        });
    }
    let mut out = [0.0; LATENT_DIM];
    for (i, (o, v)) in out.iter_mut().zip(raw).enumerate() {
        if !v.is_finite() {
            return Err(LatentError::NonFiniteComponent { index: i });
        }
        *o = v.clamp(-1.0, 1.0);
    }
    Ok(LatentVector(out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    Parametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub cols: usize,
    pub rows: usize,
    pub zone_count: usize,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            kind: GeneratorKind::Parametric,
            cols: SEGMENT_COLS,
            rows: SEGMENT_ROWS,
            zone_count: 7,
        }
    }
}

/// Anything that maps a latent vector to a level.
pub trait LevelGenerator {
    fn decode(&self, latent: &LatentVector) -> Level;
}

impl LevelGenerator for GeneratorSpec {
    fn decode(&self, latent: &LatentVector) -> Level {
        match self.kind {
            GeneratorKind::Parametric => decode(latent, self),
        }
    }
}

const ZONE_WIDTH: usize = 4;

fn round_half_up(v: f64) -> usize {
    libm::floor(v + 0.5).max(0.0) as usize
}

pub fn decode(latent: &LatentVector, spec: &GeneratorSpec) -> Level {
    let z = latent.values();
    let zones = spec.zone_count.min(7);
    let (rows, cols) = (spec.rows, spec.cols.max(zones * ZONE_WIDTH));
    let mut tiles = vec![TileKind::Empty; rows * cols];
    let mut put = |height: usize, col: usize, kind: TileKind| {
        if height < rows && col < cols {
            tiles[(rows - 1 - height) * cols + col] = kind;
        }
    };

    let heights: Vec<usize> = (0..zones).map(|i| round_half_up(2.0 + 1.5 * (z[i] + 1.0))).collect();
    for i in 0..zones {
        let h = heights[i];
        let start = i * ZONE_WIDTH;
        let gap = z[7 + i] > 0.5 && i != 0 && i != zones - 1;
        if !gap {
            for col in start..start + ZONE_WIDTH {
                for height in 0..h {
                    put(height, col, TileKind::Solid);
                }
            }
            if z[14 + i] > 0.3 {
                put(h, start + 1, TileKind::Enemy);
            }
        }
        if z[21 + i] > 0.0 {
            for col in start + 1..start + ZONE_WIDTH {
                put(h + 3, col, TileKind::Coin);
            }
        }
    }

    if z[28] > 0.0 {
        let len = round_half_up(2.0 + 2.0 * libm::fabs(z[29]));
        let start = round_half_up(12.0 * (z[30] + 1.0));
        let local = heights[(start / ZONE_WIDTH).min(zones - 1)];
        for col in start..start + len {
            // Heights name bottom edges: coins sit at h + 3, the platform at h + 4.
            put(local + 4, col, TileKind::Platform);
            if z[31] > 0.0 {
                put(local + 5, col, TileKind::Coin);
            }
        }
    }

    Level::new(rows, cols, tiles).expect("decoder grid shape")
}
