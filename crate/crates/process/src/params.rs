//! Run parameters and schedules.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-stage integer schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    /// M_i = 2^i, the default.
    PowersOfTwo,
    Constant(u64),
    /// Explicit values for stages 1.., last value repeated.
    List(Vec<u64>),
}

impl Schedule {
    pub fn at(&self, stage: u32) -> u64 {
        match self {
            Schedule::PowersOfTwo => 1u64 << stage.min(62),
            Schedule::Constant(c) => (*c).max(1),
            Schedule::List(v) => {
                let idx = (stage as usize).saturating_sub(1);
                *v.get(idx).or_else(|| v.last()).unwrap_or(&1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NSchedule {
    /// N_i derived from the tail bound: smallest integer above k K j / eps.
    Auto,
    List(Vec<u128>),
}

/// How much per-stage re-verification a run performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckLevel {
    /// Structural assertions only.
    Off,
    /// Re-verify the stage invariants after every stage.
    Stage,
}

#[derive(Debug, Clone)]
pub struct ProcessParams {
    pub m: Schedule,
    pub n: NSchedule,
    pub stages: u32,
    pub seed: u64,
    /// eps_i = 1 / eps_denom_base^i with the default base 2.
    pub eps_pow: u32,
    pub check: CheckLevel,
    /// Cap on generated-substructure growth during the run.
    pub gen_cap: usize,
}

impl ProcessParams {
    pub fn new(stages: u32, seed: u64) -> Self {
        ProcessParams {
            m: Schedule::PowersOfTwo,
            n: NSchedule::Auto,
            stages,
            seed,
            eps_pow: 1,
            check: CheckLevel::Off,
            gen_cap: fraisse_core::structure::DEFAULT_GEN_CAP,
        }
    }

    pub fn with_m(mut self, m: Schedule) -> Self {
        self.m = m;
        self
    }

    pub fn with_n(mut self, n: NSchedule) -> Self {
        self.n = n;
        self
    }

    pub fn with_check(mut self, check: CheckLevel) -> Self {
        self.check = check;
        self
    }

    pub fn with_gen_cap(mut self, cap: usize) -> Self {
        self.gen_cap = cap;
        self
    }

    /// One independent substream per stage, so stages are replayable.
    pub fn stage_rng(&self, stage: u32) -> ChaCha8Rng {
        let s = fraisse_core::util::splitmix64(
            fraisse_core::util::splitmix64(self.seed) ^ (stage as u64),
        );
        ChaCha8Rng::seed_from_u64(s)
    }

    /// N_i from the tail bound: the smallest integer exceeding
    /// k * K * j / eps_i, with eps_i = 2^(-eps_pow * i).
    pub fn auto_n(&self, stage: u32, k: u128, big_k: u128, j: u128) -> u128 {
        let shift = (self.eps_pow * stage).min(100);
        k.saturating_mul(big_k)
            .saturating_mul(j)
            .saturating_mul(1u128 << shift)
            .saturating_add(1)
    }

    pub fn n_at(&self, stage: u32, k: u128, big_k: u128, j: u128) -> u128 {
        match &self.n {
            NSchedule::Auto => self.auto_n(stage, k, big_k, j),
            NSchedule::List(v) => {
                let idx = (stage as usize).saturating_sub(1);
                *v.get(idx).or_else(|| v.last()).unwrap_or(&1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_m_is_powers_of_two() {
        let s = Schedule::PowersOfTwo;
        assert_eq!(s.at(1), 2);
        assert_eq!(s.at(4), 16);
    }

    #[test]
    fn auto_n_example() {
        // stage 1, k=1, K=2, j=2, eps=1/2: 1*2*2*2 = 8, next integer 9
        let p = ProcessParams::new(4, 0);
        assert_eq!(p.auto_n(1, 1, 2, 2), 9);
    }

    #[test]
    fn auto_n_monotone() {
        let p = ProcessParams::new(4, 0);
        assert!(p.auto_n(3, 1, 10, 4) <= p.auto_n(3, 1, 11, 4));
        assert!(p.auto_n(3, 1, 10, 4) <= p.auto_n(4, 1, 10, 4));
    }

    #[test]
    fn stage_rng_deterministic() {
        let p = ProcessParams::new(4, 42);
        let a = p.stage_rng(3);
        let b = p.stage_rng(3);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}
