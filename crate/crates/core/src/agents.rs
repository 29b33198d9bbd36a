//! The particle population and the per-step scheduler.
//!
//! Each particle has three forward sensors (front, front-left, front-right)
//! placed `sensor_offset` cells ahead. In its sensory stage it rotates toward
//! the strongest reading; in its motor stage it steps forward if the target
//! cell is free, depositing trail, or picks a new random heading if not.
//! At most one particle occupies a cell.
//!
//! Angles follow the lattice axes: heading 0 points toward +x, and positive
//! rotation goes from +x toward +y. The front-left sensor sits at
//! `heading + sensor_angle`, so a `+rotation_angle` turn is a turn toward it.

use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::lattice::{wrap_x, ArenaMask, Region, TrailLattice};
use crate::stimulus::{apply_stimuli, StimulusSchedule};
use crate::Real;

/// The generator every run draws from. One stream per run.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub x: Real,
    pub y: Real,
    /// Radians in `[0, 2π)`.
    pub heading: Real,
}

/// Sentinel for an empty occupancy cell.
const VACANT: u32 = u32::MAX;

/// Which agent, if any, sits on each lattice cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyLattice {
    width: usize,
    height: usize,
    occupant: Vec<u32>,
}

impl OccupancyLattice {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            occupant: vec![VACANT; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn occupant(&self, idx: usize) -> Option<usize> {
        match self.occupant[idx] {
            VACANT => None,
            id => Some(id as usize),
        }
    }

    #[inline]
    pub fn is_free(&self, idx: usize) -> bool {
        self.occupant[idx] == VACANT
    }

    pub fn occupied_count(&self) -> usize {
        self.occupant.iter().filter(|&&o| o != VACANT).count()
    }

    #[inline]
    fn place(&mut self, idx: usize, id: usize) {
        debug_assert!(self.is_free(idx));
        self.occupant[idx] = id as u32;
    }

    #[inline]
    fn relocate(&mut self, from: usize, to: usize) {
        if from != to {
            self.occupant[to] = self.occupant[from];
            self.occupant[from] = VACANT;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorReadings {
    pub front: Real,
    pub front_left: Real,
    pub front_right: Real,
}

/// Whether each agent senses and moves in one visit, or the whole population
/// senses before anyone moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageOrder {
    #[default]
    PerAgent,
    SenseAllFirst,
}

/// New heading after a blocked move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockedTurn {
    /// Uniform in `[0, 2π)`.
    #[default]
    Uniform,
    /// `±rotation_angle`, sign chosen at random.
    Rotation,
}

/// Particle model constants. Angles are radians, distances are cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub sensor_angle: Real,
    pub rotation_angle: Real,
    pub sensor_offset: Real,
    pub step_size: Real,
    /// Trail deposited on the destination cell of each successful move.
    pub deposit: Real,
    /// Fraction of trail lost per step after diffusion.
    pub decay: Real,
    /// Multiplier on sensor readings taken inside an illuminated cell.
    pub light_sensor_attenuation: Real,
    /// Per-step multiplier on trail inside an illuminated region.
    pub light_trail_factor: Real,
    pub stage_order: StageOrder,
    pub blocked_turn: BlockedTurn,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            sensor_angle: (45.0 as Real).to_radians(),
            rotation_angle: (45.0 as Real).to_radians(),
            sensor_offset: 9.0,
            step_size: 1.0,
            deposit: 5.0,
            decay: 0.1,
            light_sensor_attenuation: 0.1,
            light_trail_factor: 0.9,
            stage_order: StageOrder::PerAgent,
            blocked_turn: BlockedTurn::Uniform,
        }
    }
}

impl ModelParams {
    /// Every violated constraint, empty when the parameters are usable.
    pub fn violations(&self) -> Vec<ConfigError> {
        let mut out = Vec::new();
        let mut range = |name, v: Real, min: f64, max: f64| {
            let v = v as f64;
            if !(v >= min && v <= max) {
                out.push(ConfigError::OutOfRange {
                    name,
                    value: v,
                    min,
                    max,
                });
            }
        };
        let inf = f64::INFINITY;
        range("sensor_angle", self.sensor_angle, 0.0, std::f64::consts::PI);
        range("rotation_angle", self.rotation_angle, 0.0, std::f64::consts::PI);
        range("sensor_offset", self.sensor_offset, 0.0, inf);
        range("step_size", self.step_size, 0.0, inf);
        range("deposit", self.deposit, 0.0, inf);
        range("decay", self.decay, 0.0, 1.0);
        range(
            "light_sensor_attenuation",
            self.light_sensor_attenuation,
            0.0,
            1.0,
        );
        range("light_trail_factor", self.light_trail_factor, 0.0, 1.0);
        if self.sensor_offset < self.step_size {
            out.push(ConfigError::Invalid(format!(
                "sensor_offset {} must be at least step_size {}",
                self.sensor_offset, self.step_size
            )));
        }
        out
    }
}

#[inline]
fn read_sensor(
    px: Real,
    py: Real,
    trail: &TrailLattice,
    mask: &ArenaMask,
    light: &Region,
    attenuation: Real,
) -> Real {
    match mask.cell_of(px, py) {
        Some(idx) if mask.is_habitable_index(idx) => {
            let v = trail.get_index(idx);
            if light.contains_index(idx) {
                v * attenuation
            } else {
                v
            }
        }
        _ => 0.0,
    }
}

/// Sample the trail at the three sensor positions. Readings in light are
/// attenuated; walls and rows beyond the lattice read zero.
pub fn sense(
    agent: &Agent,
    trail: &TrailLattice,
    mask: &ArenaMask,
    light: &Region,
    params: &ModelParams,
) -> SensorReadings {
    let (sin_h, cos_h) = agent.heading.sin_cos();
    let (sin_a, cos_a) = params.sensor_angle.sin_cos();
    sense_with(agent, (cos_h, sin_h), (cos_a, sin_a), trail, mask, light, params)
}

/// [`sense`] with the heading and sensor-angle unit vectors precomputed.
#[inline]
fn sense_with(
    agent: &Agent,
    (cos_h, sin_h): (Real, Real),
    (cos_a, sin_a): (Real, Real),
    trail: &TrailLattice,
    mask: &ArenaMask,
    light: &Region,
    params: &ModelParams,
) -> SensorReadings {
    let so = params.sensor_offset;
    let att = params.light_sensor_attenuation;
    // heading + SA and heading - SA via the angle-sum identities.
    let (cl, sl) = (cos_h * cos_a - sin_h * sin_a, sin_h * cos_a + cos_h * sin_a);
    let (cr, sr) = (cos_h * cos_a + sin_h * sin_a, sin_h * cos_a - cos_h * sin_a);
    let read = |c: Real, s: Real| read_sensor(agent.x + so * c, agent.y + so * s, trail, mask, light, att);
    SensorReadings {
        front: read(cos_h, sin_h),
        front_left: read(cl, sl),
        front_right: read(cr, sr),
    }
}

/// Heading change for the given readings. Draws from `rng` only when the
/// front reading is strictly the weakest.
pub fn decide_rotation<R: RngCore + ?Sized>(
    readings: &SensorReadings,
    params: &ModelParams,
    rng: &mut R,
) -> Real {
    let SensorReadings {
        front: f,
        front_left: fl,
        front_right: fr,
    } = *readings;
    let ra = params.rotation_angle;
    if f > fl && f > fr {
        0.0
    } else if f < fl && f < fr {
        if rng.next_u32() >> 31 == 0 {
            ra
        } else {
            -ra
        }
    } else if fr < fl {
        ra
    } else if fl < fr {
        -ra
    } else {
        0.0
    }
}

#[inline]
fn unit(angle: Real) -> (Real, Real) {
    let (s, c) = angle.sin_cos();
    (c, s)
}

#[inline]
fn wrap_angle(a: Real) -> Real {
    let tau = TAU as Real;
    let r = if a < 0.0 && a >= -tau {
        a + tau
    } else if (tau..2.0 * tau).contains(&a) {
        a - tau
    } else if (0.0..tau).contains(&a) {
        a
    } else {
        a.rem_euclid(tau)
    };
    if r >= TAU as Real {
        0.0
    } else {
        r
    }
}

fn blocked_heading<R: RngCore + ?Sized>(agent: &Agent, params: &ModelParams, rng: &mut R) -> Real {
    match params.blocked_turn {
        BlockedTurn::Uniform => wrap_angle(rng.random::<f64>() as Real * TAU as Real),
        BlockedTurn::Rotation => {
            let delta = if rng.next_u32() >> 31 == 0 {
                params.rotation_angle
            } else {
                -params.rotation_angle
            };
            wrap_angle(agent.heading + delta)
        }
    }
}

/// Motor stage for agent `id`: step forward into a free habitable cell and
/// deposit there, otherwise stay put and take a new random heading.
pub fn try_move<R: RngCore + ?Sized>(
    agents: &mut [Agent],
    id: usize,
    occupancy: &mut OccupancyLattice,
    mask: &ArenaMask,
    trail: &mut TrailLattice,
    params: &ModelParams,
    rng: &mut R,
) -> bool {
    let agent = agents[id];
    let (sin_h, cos_h) = agent.heading.sin_cos();
    try_move_with(&mut agents[id], id, (cos_h, sin_h), occupancy, mask, trail, params, rng)
}

#[inline]
#[allow(clippy::too_many_arguments)]
fn try_move_with<R: RngCore + ?Sized>(
    agent: &mut Agent,
    id: usize,
    (cos_h, sin_h): (Real, Real),
    occupancy: &mut OccupancyLattice,
    mask: &ArenaMask,
    trail: &mut TrailLattice,
    params: &ModelParams,
    rng: &mut R,
) -> bool {
    let w = mask.width();
    let nx = wrap_x(agent.x + params.step_size * cos_h, w);
    let mut ny = agent.y + params.step_size * sin_h;
    if mask.periodic_y() {
        ny = wrap_x(ny, mask.height());
    }
    let from = mask
        .cell_of(agent.x, agent.y)
        .expect("agent position inside the lattice");
    debug_assert_eq!(occupancy.occupant(from), Some(id));
    match mask.cell_of(nx, ny) {
        Some(to) if mask.is_habitable_index(to) && (to == from || occupancy.is_free(to)) => {
            occupancy.relocate(from, to);
            agent.x = nx;
            agent.y = ny;
            trail.deposit_index(to, params.deposit);
            true
        }
        _ => {
            agent.heading = blocked_heading(agent, params, rng);
            false
        }
    }
}

/// Place `n` agents on distinct uniformly chosen habitable cells, at cell
/// centres, with uniform headings.
pub fn init_population<R: RngCore + ?Sized>(
    mask: &ArenaMask,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<Agent>, OccupancyLattice), ConfigError> {
    let capacity = mask.habitable_count();
    if n > capacity {
        return Err(ConfigError::Capacity {
            requested: n,
            capacity,
        });
    }
    let mut cells: Vec<usize> = mask.habitable_indices().collect();
    let (chosen, _) = cells.partial_shuffle(rng, n);
    let w = mask.width();
    let mut occupancy = OccupancyLattice::new(w, mask.height());
    let mut agents = Vec::with_capacity(n);
    for (id, &idx) in chosen.iter().enumerate() {
        occupancy.place(idx, id);
        agents.push(Agent {
            x: (idx % w) as Real + 0.5,
            y: (idx / w) as Real + 0.5,
            heading: wrap_angle(rng.random::<f64>() as Real * TAU as Real),
        });
    }
    Ok((agents, occupancy))
}

/// A complete simulation state: arena, trail, population and the run's
/// random stream. Owned exclusively while stepping.
#[derive(Debug, Clone)]
pub struct World {
    pub mask: ArenaMask,
    pub trail: TrailLattice,
    pub agents: Vec<Agent>,
    pub occupancy: OccupancyLattice,
    pub schedule: StimulusSchedule,
    pub params: ModelParams,
    pub rng: SimRng,
    order: Vec<u32>,
    /// `(cos, sin)` of each agent's heading, kept in step with `agents`.
    dirs: Vec<(Real, Real)>,
}

/// Counts from one scheduler step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub moved: usize,
    pub blocked: usize,
}

impl World {
    pub fn new(
        mask: ArenaMask,
        population: usize,
        schedule: StimulusSchedule,
        params: ModelParams,
        seed: u64,
    ) -> Result<Self, ConfigError> {
        let mut rng = seeded_rng(seed);
        let (agents, occupancy) = init_population(&mask, population, &mut rng)?;
        let trail = TrailLattice::zeros(mask.width(), mask.height());
        Ok(Self {
            order: Vec::with_capacity(agents.len()),
            dirs: agents.iter().map(|a| unit(a.heading)).collect(),
            mask,
            trail,
            agents,
            occupancy,
            schedule,
            params,
            rng,
        })
    }

    /// One scheduler step: stimuli, one shuffled pass over the agents,
    /// then diffusion and decay.
    pub fn step(&mut self, step_index: u64) -> StepStats {
        let light = apply_stimuli(
            &mut self.trail,
            &self.mask,
            &self.schedule,
            &self.params,
            step_index,
        );

        self.order.clear();
        self.order.extend(0..self.agents.len() as u32);
        self.order.shuffle(&mut self.rng);

        let params = self.params;
        let sensor_dir = {
            let (s, c) = params.sensor_angle.sin_cos();
            (c, s)
        };
        let (sin_ra, cos_ra) = params.rotation_angle.sin_cos();
        let mut stats = StepStats::default();

        let sensory = |agent: &mut Agent, dir: &mut (Real, Real), trail: &TrailLattice, rng: &mut SimRng| {
            let (c, s) = *dir;
            let readings = sense_with(agent, (c, s), sensor_dir, trail, &self.mask, &light, &params);
            let delta = decide_rotation(&readings, &params, rng);
            if delta != 0.0 {
                agent.heading = wrap_angle(agent.heading + delta);
                // Rotate the cached unit vector rather than recomputing sin/cos.
                let sd = if delta > 0.0 { sin_ra } else { -sin_ra };
                *dir = (c * cos_ra - s * sd, s * cos_ra + c * sd);
            }
        };
        let mut motor = |id: usize, agent: &mut Agent, dir: &mut (Real, Real), trail: &mut TrailLattice, rng: &mut SimRng| {
            let moved = try_move_with(agent, id, *dir, &mut self.occupancy, &self.mask, trail, &params, rng);
            if moved {
                stats.moved += 1;
            } else {
                stats.blocked += 1;
                *dir = unit(agent.heading);
            }
        };

        match params.stage_order {
            StageOrder::PerAgent => {
                for &id in &self.order {
                    let id = id as usize;
                    let (agent, dir) = (&mut self.agents[id], &mut self.dirs[id]);
                    sensory(agent, dir, &self.trail, &mut self.rng);
                    motor(id, agent, dir, &mut self.trail, &mut self.rng);
                }
            }
            StageOrder::SenseAllFirst => {
                for &id in &self.order {
                    let id = id as usize;
                    sensory(&mut self.agents[id], &mut self.dirs[id], &self.trail, &mut self.rng);
                }
                for &id in &self.order {
                    let id = id as usize;
                    motor(id, &mut self.agents[id], &mut self.dirs[id], &mut self.trail, &mut self.rng);
                }
            }
        }

        self.trail
            .diffuse_and_decay(&self.mask, params.decay)
            .expect("decay validated with the model parameters");
        stats
    }

    /// Check the occupancy bijection and wall exclusion. Returns a
    /// description of every violation found.
    pub fn consistency_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut seen = vec![false; self.agents.len()];
        for (id, a) in self.agents.iter().enumerate() {
            match self.mask.cell_of(a.x, a.y) {
                None => out.push(format!("agent {id} outside lattice at ({}, {})", a.x, a.y)),
                Some(idx) => {
                    if !self.mask.is_habitable_index(idx) {
                        out.push(format!("agent {id} on wall cell {idx}"));
                    }
                    if self.occupancy.occupant(idx) != Some(id) {
                        out.push(format!(
                            "agent {id} at cell {idx} but occupancy holds {:?}",
                            self.occupancy.occupant(idx)
                        ));
                    }
                }
            }
            if !(0.0..TAU as Real).contains(&a.heading) {
                out.push(format!("agent {id} heading {} outside [0, 2pi)", a.heading));
            }
        }
        for idx in 0..self.occupancy.occupant.len() {
            if let Some(id) = self.occupancy.occupant(idx) {
                if id >= self.agents.len() {
                    out.push(format!("cell {idx} holds unknown agent {id}"));
                } else if seen[id] {
                    out.push(format!("agent {id} occupies more than one cell"));
                } else {
                    seen[id] = true;
                }
                if !self.mask.is_habitable_index(idx) {
                    out.push(format!("wall cell {idx} is occupied"));
                }
            }
        }
        if let Some(id) = seen.iter().position(|&s| !s) {
            out.push(format!("agent {id} missing from occupancy"));
        }
        for (idx, &v) in self.trail.values().iter().enumerate() {
            if !(v >= 0.0) {
                out.push(format!("negative trail {v} at cell {idx}"));
            }
            if !self.mask.is_habitable_index(idx) && v != 0.0 {
                out.push(format!("trail {v} on wall cell {idx}"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ArenaMask;

    /// Replays fixed words and counts how many were drawn.
    struct StubRng {
        words: Vec<u32>,
        draws: usize,
    }

    impl StubRng {
        fn new(words: &[u32]) -> Self {
            Self {
                words: words.to_vec(),
                draws: 0,
            }
        }
    }

    impl RngCore for StubRng {
        fn next_u32(&mut self) -> u32 {
            let w = self.words[self.draws % self.words.len()];
            self.draws += 1;
            w
        }
        fn next_u64(&mut self) -> u64 {
            let hi = self.next_u32() as u64;
            (hi << 32) | self.next_u32() as u64
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            for chunk in dst.chunks_mut(4) {
                let w = self.next_u32().to_le_bytes();
                chunk.copy_from_slice(&w[..chunk.len()]);
            }
        }
    }

    fn readings(f: Real, fl: Real, fr: Real) -> SensorReadings {
        SensorReadings {
            front: f,
            front_left: fl,
            front_right: fr,
        }
    }

    #[test]
    fn rotation_rule_branches() {
        let p = ModelParams::default();
        let ra = p.rotation_angle;
        let mut rng = StubRng::new(&[0]);
        assert_eq!(decide_rotation(&readings(5.0, 1.0, 1.0), &p, &mut rng), 0.0);
        assert_eq!(decide_rotation(&readings(3.0, 5.0, 2.0), &p, &mut rng), ra);
        assert_eq!(decide_rotation(&readings(3.0, 2.0, 5.0), &p, &mut rng), -ra);
        assert_eq!(decide_rotation(&readings(2.0, 2.0, 2.0), &p, &mut rng), 0.0);
        assert_eq!(rng.draws, 0);

        let mut left = StubRng::new(&[0]);
        assert_eq!(decide_rotation(&readings(1.0, 5.0, 5.0), &p, &mut left), ra);
        assert_eq!(left.draws, 1);
        let mut right = StubRng::new(&[u32::MAX]);
        assert_eq!(decide_rotation(&readings(1.0, 5.0, 5.0), &p, &mut right), -ra);
        assert_eq!(right.draws, 1);
    }

    #[test]
    fn uniform_field_reads_equally() {
        let mask = ArenaMask::tube(300, 100, 10).unwrap();
        let mut trail = TrailLattice::zeros(300, 100);
        trail.add_to_habitable(&mask, 2.0);
        let agent = Agent {
            x: 150.5,
            y: 50.5,
            heading: 0.3,
        };
        let light = Region::empty(300, 100);
        let r = sense(&agent, &trail, &mask, &light, &ModelParams::default());
        assert_eq!(r, readings(2.0, 2.0, 2.0));
    }

    #[test]
    fn light_attenuates_readings() {
        let mask = ArenaMask::tube(300, 100, 10).unwrap();
        let mut trail = TrailLattice::zeros(300, 100);
        trail.set(159, 50, 4.0);
        let light = Region::from_cells(300, 100, [(159, 50)]).unwrap();
        let agent = Agent {
            x: 150.5,
            y: 50.5,
            heading: 0.0,
        };
        let r = sense(&agent, &trail, &mask, &light, &ModelParams::default());
        assert!((r.front - 0.4).abs() < 1e-12);
    }

    #[test]
    fn front_sensor_wraps_horizontally() {
        let mask = ArenaMask::tube(300, 100, 10).unwrap();
        let mut trail = TrailLattice::zeros(300, 100);
        trail.set(4, 50, 7.0);
        let agent = Agent {
            x: 295.0,
            y: 50.5,
            heading: 0.0,
        };
        let r = sense(&agent, &trail, &mask, &Region::empty(300, 100), &ModelParams::default());
        assert_eq!(r.front, 7.0);
    }

    #[test]
    fn sensors_outside_band_read_zero() {
        let mask = ArenaMask::tube(30, 20, 5).unwrap();
        let mut trail = TrailLattice::zeros(30, 20);
        trail.add_to_habitable(&mask, 1.0);
        // Facing straight up from the top of the band: all sensors hit the wall or leave the lattice.
        let agent = Agent {
            x: 10.5,
            y: 5.5,
            heading: 1.5 * std::f64::consts::PI as Real,
        };
        let r = sense(&agent, &trail, &mask, &Region::empty(30, 20), &ModelParams::default());
        assert_eq!(r, readings(0.0, 0.0, 0.0));
    }

    fn one_agent_world(x: Real, y: Real, heading: Real) -> (ArenaMask, Vec<Agent>, OccupancyLattice) {
        let mask = ArenaMask::tube(20, 10, 2).unwrap();
        let mut occ = OccupancyLattice::new(20, 10);
        occ.place(mask.cell_of(x, y).unwrap(), 0);
        (mask, vec![Agent { x, y, heading }], occ)
    }

    #[test]
    fn move_into_free_cell_deposits_once() {
        let (mask, mut agents, mut occ) = one_agent_world(5.5, 5.5, 0.0);
        let mut trail = TrailLattice::zeros(20, 10);
        let p = ModelParams::default();
        let mut rng = seeded_rng(1);
        assert!(try_move(&mut agents, 0, &mut occ, &mask, &mut trail, &p, &mut rng));
        assert_eq!(agents[0].x, 6.5);
        assert_eq!(trail.total(), 5.0);
        assert_eq!(trail.get(6, 5), 5.0);
        assert_eq!(occ.occupant(mask.index(6, 5)), Some(0));
        assert!(occ.is_free(mask.index(5, 5)));
    }

    #[test]
    fn blocked_move_keeps_position_and_reorients() {
        let (mask, mut agents, mut occ) = one_agent_world(5.5, 5.5, 0.0);
        agents.push(Agent {
            x: 6.5,
            y: 5.5,
            heading: 0.0,
        });
        occ.place(mask.index(6, 5), 1);
        let mut trail = TrailLattice::zeros(20, 10);
        let p = ModelParams::default();
        let mut rng = seeded_rng(3);
        assert!(!try_move(&mut agents, 0, &mut occ, &mask, &mut trail, &p, &mut rng));
        assert_eq!((agents[0].x, agents[0].y), (5.5, 5.5));
        assert_ne!(agents[0].heading, 0.0);
        assert_eq!(trail.total(), 0.0);
        assert_eq!(occ.occupant(mask.index(5, 5)), Some(0));
    }

    #[test]
    fn wall_blocks_like_an_occupant() {
        // Row 2 is the top of the band; heading -y runs into wall row 1.
        let (mask, mut agents, mut occ) =
            one_agent_world(5.5, 2.5, 1.5 * std::f64::consts::PI as Real);
        let mut trail = TrailLattice::zeros(20, 10);
        let p = ModelParams::default();
        let mut rng = seeded_rng(4);
        assert!(!try_move(&mut agents, 0, &mut occ, &mask, &mut trail, &p, &mut rng));
        assert_eq!((agents[0].x, agents[0].y), (5.5, 2.5));
        assert_eq!(trail.total(), 0.0);
    }

    #[test]
    fn population_capacity_and_determinism() {
        let mask = ArenaMask::tube(300, 100, 10).unwrap();
        let mut rng = seeded_rng(0);
        assert_eq!(
            init_population(&mask, 24001, &mut rng).unwrap_err(),
            ConfigError::Capacity {
                requested: 24001,
                capacity: 24000
            }
        );
        let (one, occ) = init_population(&mask, 1, &mut seeded_rng(5)).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(occ.occupied_count(), 1);

        let a = init_population(&mask, 500, &mut seeded_rng(9)).unwrap();
        let b = init_population(&mask, 500, &mut seeded_rng(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn step_preserves_invariants() {
        let mask = ArenaMask::tube(60, 30, 3).unwrap();
        let mut world =
            World::new(mask, 400, StimulusSchedule::default(), ModelParams::default(), 11).unwrap();
        for step in 0..50 {
            world.step(step);
            assert_eq!(world.agents.len(), 400);
            assert!(world.consistency_violations().is_empty());
        }
    }

    #[test]
    fn deposit_accounting_on_a_torus() {
        let mask = ArenaMask::torus(40, 40).unwrap();
        let params = ModelParams {
            decay: 0.0,
            ..ModelParams::default()
        };
        let mut world = World::new(mask, 300, StimulusSchedule::default(), params, 2).unwrap();
        for step in 0..5 {
            let before = world.trail.total();
            let stats = world.step(step);
            let gained = world.trail.total() - before;
            assert!(
                (gained - stats.moved as f64 * 5.0).abs() < 1e-9 * (1.0 + before),
                "gained {gained}, moved {}",
                stats.moved
            );
            assert_eq!(stats.moved + stats.blocked, 300);
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        let build = || {
            let mask = ArenaMask::tube(60, 30, 3).unwrap();
            World::new(mask, 400, StimulusSchedule::default(), ModelParams::default(), 8).unwrap()
        };
        let (mut a, mut b) = (build(), build());
        for step in 0..30 {
            a.step(step);
            b.step(step);
        }
        assert_eq!(a.agents, b.agents);
        assert_eq!(a.trail, b.trail);
    }

    #[test]
    fn sense_all_first_order_also_consistent() {
        let mask = ArenaMask::tube(60, 30, 3).unwrap();
        let params = ModelParams {
            stage_order: StageOrder::SenseAllFirst,
            blocked_turn: BlockedTurn::Rotation,
            ..ModelParams::default()
        };
        let mut world = World::new(mask, 400, StimulusSchedule::default(), params, 12).unwrap();
        for step in 0..30 {
            world.step(step);
        }
        assert!(world.consistency_violations().is_empty());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::default().violations().is_empty());
        let bad = ModelParams {
            decay: 1.5,
            sensor_offset: 0.5,
            ..ModelParams::default()
        };
        assert_eq!(bad.violations().len(), 2);
    }
}
