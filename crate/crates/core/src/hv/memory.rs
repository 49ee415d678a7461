use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::seq::SliceRandom;

use super::bipolar::BipolarHv;
use super::rng::{stream_rng, LEVEL_BASE_STREAM, LEVEL_ORDER_STREAM};
use super::HvError;

/// Seeded codebook mapping symbol ids to random hypervectors.
///
/// Entries are generated on first access and cached; symbol `s` is always
/// `BipolarHv::random(seed, s, dim)`. An optional capacity restricts the
/// alphabet to `0..capacity`.
#[derive(Debug)]
pub struct ItemMemory {
    seed: u64,
    dim: usize,
    capacity: Option<u64>,
    cache: RwLock<HashMap<u64, Arc<BipolarHv>>>,
}

impl ItemMemory {
    pub fn new(seed: u64, dim: usize) -> Result<Self, HvError> {
        if dim == 0 {
            return Err(HvError::InvalidDimension(dim));
        }
        Ok(ItemMemory {
            seed,
            dim,
            capacity: None,
            cache: RwLock::new(HashMap::new()),
        })
    }

    /// A codebook whose alphabet is exactly `0..capacity`, pre-materialized.
    pub fn with_capacity(seed: u64, dim: usize, capacity: u64) -> Result<Self, HvError> {
        let mut mem = ItemMemory::new(seed, dim)?;
        mem.capacity = Some(capacity);
        {
            let cache = mem.cache.get_mut().expect("fresh lock");
            for s in 0..capacity {
                cache.insert(s, Arc::new(BipolarHv::random(seed, s, dim)?));
            }
        }
        Ok(mem)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn capacity(&self) -> Option<u64> {
        self.capacity
    }

    pub fn get(&self, symbol: u64) -> Result<Arc<BipolarHv>, HvError> {
        if let Some(cap) = self.capacity {
            if symbol >= cap {
                return Err(HvError::UnknownSymbol(symbol));
            }
        }
        if let Some(hv) = self.cache.read().expect("item memory lock").get(&symbol) {
            return Ok(Arc::clone(hv));
        }
        let hv = Arc::new(BipolarHv::random(self.seed, symbol, self.dim)?);
        let mut cache = self.cache.write().expect("item memory lock");
        Ok(Arc::clone(cache.entry(symbol).or_insert(hv)))
    }
}

impl Clone for ItemMemory {
    fn clone(&self) -> Self {
        ItemMemory {
            seed: self.seed,
            dim: self.dim,
            capacity: self.capacity,
            cache: RwLock::new(self.cache.read().expect("item memory lock").clone()),
        }
    }
}

impl PartialEq for ItemMemory {
    fn eq(&self, other: &Self) -> bool {
        self.seed == other.seed && self.dim == other.dim && self.capacity == other.capacity
    }
}

/// Quantized level codebook `L_0 .. L_{Q-1}` with nested flips.
///
/// `L_i` is `L_0` with the first `round(i * floor(D/2) / (Q-1))` entries of
/// `flip_order` negated, so Hamming distance grows linearly with level
/// distance and the endpoints differ in exactly `floor(D/2)` components.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMemory {
    seed: u64,
    dim: usize,
    levels: Vec<BipolarHv>,
    flip_order: Vec<u32>,
}

/// Number of components of `L_0` negated in `L_level`.
fn flips_for(level: usize, dim: usize, q: usize) -> usize {
    let half = dim / 2;
    let denom = q - 1;
    (2 * level * half + denom) / (2 * denom)
}

pub fn make_level_memory(seed: u64, dim: usize, q: usize) -> Result<LevelMemory, HvError> {
    LevelMemory::new(seed, dim, q)
}

impl LevelMemory {
    pub fn new(seed: u64, dim: usize, q: usize) -> Result<Self, HvError> {
        if q < 2 {
            return Err(HvError::InvalidArgument(format!(
                "level count must be at least 2, got {q}"
            )));
        }
        if dim < 2 {
            return Err(HvError::InvalidDimension(dim));
        }
        let dim_u32 =
            u32::try_from(dim).map_err(|_| HvError::InvalidArgument(format!("dimension {dim} exceeds u32")))?;
        let base = BipolarHv::random(seed, LEVEL_BASE_STREAM, dim)?;
        let mut flip_order: Vec<u32> = (0..dim_u32).collect();
        flip_order.shuffle(&mut stream_rng(seed, LEVEL_ORDER_STREAM));

        let mut levels = Vec::with_capacity(q);
        let mut current = base;
        let mut flipped = 0;
        levels.push(current.clone());
        for level in 1..q {
            let target = flips_for(level, dim, q);
            for &idx in &flip_order[flipped..target] {
                current.flip(idx as usize);
            }
            flipped = target;
            levels.push(current.clone());
        }
        Ok(LevelMemory {
            seed,
            dim,
            levels,
            flip_order,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of levels `Q`.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn level(&self, i: usize) -> Result<&BipolarHv, HvError> {
        self.levels
            .get(i)
            .ok_or_else(|| HvError::InvalidArgument(format!("level {i} out of range 0..{}", self.levels.len())))
    }

    pub fn levels(&self) -> &[BipolarHv] {
        &self.levels
    }

    pub fn flip_order(&self) -> &[u32] {
        &self.flip_order
    }
}
