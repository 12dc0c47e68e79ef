//! Framed slotted Aloha: random slot choice per read cycle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Starvation;
use crate::channel::{classify_slot, SlotOutcome};
use crate::population::Population;
use crate::result::{BitAccounting, Protocol, RunExtra, RunResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FsaMode {
    /// One frame size for the whole run.
    Fixed,
    /// Double the frame whenever more than half its slots collided,
    /// up to `max_frame_size`.
    DynamicDoubling,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FsaConfig {
    /// Slots per frame; the initial size in dynamic mode.
    pub frame_size: u32,
    pub mode: FsaMode,
    /// Upper bound for dynamic doubling. Frames cannot grow indefinitely.
    pub max_frame_size: u32,
    pub seed: u64,
    /// Read-cycle bound; colliding forever is a real possibility here.
    pub max_cycles: u64,
}

impl Default for FsaConfig {
    fn default() -> FsaConfig {
        FsaConfig {
            frame_size: 128,
            mode: FsaMode::Fixed,
            max_frame_size: 256,
            seed: 0,
            max_cycles: 10_000,
        }
    }
}

/// Runs framed slotted Aloha until every tag is identified or the cycle
/// bound is hit.
///
/// Per cycle every still-unidentified tag transmits its ID in an
/// independently chosen random slot. A slot with one transmitter
/// identifies it; collided tags carry over to the next cycle. Every slot
/// of every frame counts toward `query_count`, idle slots included.
pub fn run_framed_slotted_aloha(
    population: &Population,
    config: &FsaConfig,
) -> Result<RunResult, Box<Starvation>> {
    assert!(config.frame_size >= 1, "frame needs at least one slot");
    assert!(config.max_cycles >= 1);
    let k = population.k();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut unidentified: Vec<u32> = (0..population.len() as u32).collect();
    let mut identified = Vec::new();
    let mut frame_size = config.frame_size;
    let mut slots_consumed = 0u64;
    let mut idle_slots = 0u64;
    let mut collision_slots = 0u64;
    let mut cycles = 0u64;
    let mut bits = BitAccounting::default();

    while !unidentified.is_empty() {
        if cycles == config.max_cycles {
            return Err(Box::new(Starvation {
                partial: RunResult {
                    protocol: Protocol::FramedSlottedAloha,
                    identified,
                    query_count: slots_consumed,
                    trace: None,
                    extra: RunExtra::FramedSlottedAloha {
                        cycles,
                        final_frame_size: frame_size,
                        idle_slots,
                        collision_slots,
                    },
                    bits,
                },
                population_size: population.len(),
            }));
        }
        cycles += 1;
        let mut per_slot: Vec<Vec<u32>> = vec![Vec::new(); frame_size as usize];
        for &tag in &unidentified {
            per_slot[rng.gen_range(0..frame_size) as usize].push(tag);
        }
        slots_consumed += u64::from(frame_size);
        let mut survivors: Vec<u32> = Vec::new();
        let mut collided_this_frame = 0u32;
        for slot in per_slot {
            bits.count_query(k, slot.len());
            let sole = (slot.len() == 1)
                .then(|| population.tags()[slot[0] as usize].clone());
            match classify_slot(slot.len(), sole) {
                SlotOutcome::Idle => idle_slots += 1,
                SlotOutcome::Single(id) => identified.push(id),
                SlotOutcome::Collision => {
                    collision_slots += 1;
                    collided_this_frame += 1;
                    survivors.extend(slot);
                }
            }
        }
        survivors.sort_unstable();
        unidentified = survivors;
        if config.mode == FsaMode::DynamicDoubling && 2 * collided_this_frame > frame_size {
            frame_size = (frame_size * 2).min(config.max_frame_size.max(config.frame_size));
        }
    }

    Ok(RunResult {
        protocol: Protocol::FramedSlottedAloha,
        identified,
        query_count: slots_consumed,
        trace: None,
        extra: RunExtra::FramedSlottedAloha {
            cycles,
            final_frame_size: frame_size,
            idle_slots,
            collision_slots,
        },
        bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::{Distribution, PopulationSpec};
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn uniform(n: usize, k: usize, seed: u64) -> Population {
        PopulationSpec {
            n,
            k,
            distribution: Distribution::UniformRandom,
            seed,
        }
        .generate()
        .unwrap()
    }

    fn config(frame_size: u32, mode: FsaMode, seed: u64) -> FsaConfig {
        FsaConfig {
            frame_size,
            mode,
            seed,
            ..FsaConfig::default()
        }
    }

    #[test]
    fn lone_tag_finishes_in_one_cycle() {
        for frame_size in [1u32, 4, 64] {
            let result =
                run_framed_slotted_aloha(&uniform(1, 8, 3), &config(frame_size, FsaMode::Fixed, 9))
                    .unwrap();
            assert_eq!(result.query_count, u64::from(frame_size));
            assert_eq!(result.identified.len(), 1);
        }
    }

    #[test]
    fn one_slot_frame_with_two_tags_starves() {
        // Pigeonhole: both tags share the single slot every cycle.
        let err =
            run_framed_slotted_aloha(&uniform(2, 8, 5), &config(1, FsaMode::Fixed, 7)).unwrap_err();
        assert!(err.partial.identified.is_empty());
        assert_eq!(err.partial.query_count, FsaConfig::default().max_cycles);
        assert_eq!(err.population_size, 2);
    }

    #[test]
    fn empty_population_consumes_nothing() {
        let result =
            run_framed_slotted_aloha(&Population::empty(8), &config(16, FsaMode::Fixed, 0))
                .unwrap();
        assert_eq!(result.query_count, 0);
        assert_eq!(result.bits, BitAccounting::default());
    }

    #[test]
    fn dynamic_mode_doubles_under_heavy_collision() {
        // 100 tags in 16 slots collide massively; the frame must grow,
        // but never past the cap.
        let result = run_framed_slotted_aloha(
            &uniform(100, 16, 21),
            &config(16, FsaMode::DynamicDoubling, 4),
        )
        .unwrap();
        match result.extra {
            RunExtra::FramedSlottedAloha {
                final_frame_size, ..
            } => {
                assert!(final_frame_size > 16);
                assert!(final_frame_size <= 256);
            }
            ref other => panic!("unexpected extra {other:?}"),
        }
        assert_eq!(result.identified.len(), 100);
    }

    #[test]
    fn fixed_frame_efficiency_band_at_hundred_tags() {
        // Monte-Carlo frozen band: with a 128-slot fixed frame a 100-tag
        // round typically needs 4 to 5 full cycles, so measured efficiency
        // sits near 0.18. 200 seeds keep the mean well inside [0.12, 0.25].
        let mut total = 0.0;
        let runs = 200;
        for seed in 0..runs {
            let pop = uniform(100, 96, 1_000 + seed);
            let result =
                run_framed_slotted_aloha(&pop, &config(128, FsaMode::Fixed, 2_000 + seed)).unwrap();
            assert_eq!(result.identified.len(), 100);
            total += result.system_efficiency().unwrap();
        }
        let mean = total / runs as f64;
        assert!(
            (0.12..=0.25).contains(&mean),
            "fixed-frame FSA mean efficiency {mean} outside the frozen band"
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        // With a sane frame size every tag comes through, the set is exact,
        // and the same seed reproduces the run.
        #[test]
        fn identifies_everything(n in 1usize..24, seed in any::<u64>(), fsa_seed in any::<u64>()) {
            let pop = uniform(n, 12, seed);
            let cfg = config(32, FsaMode::Fixed, fsa_seed);
            let result = run_framed_slotted_aloha(&pop, &cfg).unwrap();
            let got: BTreeSet<String> = result.identified.iter().map(|t| t.to_string()).collect();
            let want: BTreeSet<String> = pop.tags().iter().map(|t| t.to_string()).collect();
            prop_assert_eq!(got, want);
            let again = run_framed_slotted_aloha(&pop, &cfg).unwrap();
            prop_assert_eq!(result.identified, again.identified);
            prop_assert_eq!(result.query_count, again.query_count);
        }
    }
}
