//! Real-valued breeding swarm: inertia-weight PSO plus velocity-propelled
//! averaged crossover (VPAC), with the same elite / breed-ratio structure as
//! the path solver.

use std::io::{self, Write};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::breed_count;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealParticle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub value: f64,
    pub pbest_position: Vec<f64>,
    pub pbest_value: f64,
}

impl RealParticle {
    pub fn new(position: Vec<f64>, velocity: Vec<f64>, value: f64) -> Self {
        RealParticle {
            pbest_position: position.clone(),
            pbest_value: value,
            position,
            velocity,
            value,
        }
    }

    fn record(&mut self, value: f64) {
        self.value = value;
        if value < self.pbest_value {
            self.pbest_value = value;
            self.pbest_position.clone_from(&self.position);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousConfig {
    pub w: f64,
    pub c1: f64,
    pub c2: f64,
    pub swarm_size: usize,
    pub iterations: usize,
    pub breed_ratio: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub elite_fraction: f64,
    pub mutation_rate: f64,
    /// Gaussian mutation width as a fraction of each dimension's range.
    pub mutation_scale: f64,
    /// Draw r1, r2 per dimension instead of once per step.
    pub per_dimension_random: bool,
    pub bounds: Vec<(f64, f64)>,
    pub seed: u64,
}

impl ContinuousConfig {
    pub fn new(bounds: Vec<(f64, f64)>, seed: u64) -> Self {
        ContinuousConfig {
            w: 0.7,
            c1: 1.5,
            c2: 1.5,
            swarm_size: 20,
            iterations: 200,
            breed_ratio: 0.5,
            phi1: 0.5,
            phi2: 0.5,
            elite_fraction: 0.1,
            mutation_rate: 0.05,
            mutation_scale: 0.01,
            per_dimension_random: false,
            bounds,
            seed,
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.bounds.is_empty() {
            return bad("at least one dimension is required");
        }
        if self.bounds.iter().any(|&(lo, hi)| !(lo < hi)) {
            return bad("every bound needs lo < hi");
        }
        if !(0.0..=2.0).contains(&self.c1) || !(0.0..=2.0).contains(&self.c2) {
            return bad("c1 and c2 must lie in [0, 2]");
        }
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.phi1) || !open_unit(self.phi2) {
            return bad("phi1 and phi2 must lie in (0, 1)");
        }
        if self.swarm_size < 2 || self.iterations < 1 {
            return bad("need swarm_size >= 2 and iterations >= 1");
        }
        if !(0.0..=1.0).contains(&self.breed_ratio)
            || !(0.0..=1.0).contains(&self.elite_fraction)
            || !(0.0..=1.0).contains(&self.mutation_rate)
        {
            return bad("breed_ratio, elite_fraction and mutation_rate must lie in [0, 1]");
        }
        Ok(())
    }

    fn clamp(&self, particle: &mut RealParticle) {
        for (d, &(lo, hi)) in self.bounds.iter().enumerate() {
            let x = particle.position[d];
            if x < lo || x > hi {
                particle.position[d] = x.clamp(lo, hi);
                particle.velocity[d] = 0.0;
            }
        }
    }
}

/// Velocity and position update with explicit random factors:
/// `v' = w v + c1 r1 (pbest - x) + c2 r2 (gbest - x)`, `x' = x + v'`.
/// Positions leaving the bounds are clamped and that velocity component zeroed.
pub fn pso_step_with(
    particle: &mut RealParticle,
    gbest: &[f64],
    config: &ContinuousConfig,
    r1: &[f64],
    r2: &[f64],
) {
    let dim = particle.position.len();
    for d in 0..dim {
        let (a, b) = (r1[d.min(r1.len() - 1)], r2[d.min(r2.len() - 1)]);
        let x = particle.position[d];
        let v = config.w * particle.velocity[d]
            + config.c1 * a * (particle.pbest_position[d] - x)
            + config.c2 * b * (gbest[d] - x);
        particle.velocity[d] = v;
        particle.position[d] = x + v;
    }
    config.clamp(particle);
}

/// [`pso_step_with`] with fresh `U(0, 1)` draws, one scalar pair per step
/// unless `per_dimension_random` is set.
pub fn pso_step<R: Rng>(
    particle: &mut RealParticle,
    gbest: &[f64],
    config: &ContinuousConfig,
    rng: &mut R,
) {
    let n = if config.per_dimension_random {
        particle.position.len()
    } else {
        1
    };
    let r1: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    let r2: Vec<f64> = (0..n).map(|_| rng.random()).collect();
    pso_step_with(particle, gbest, config, &r1, &r2);
}

/// VPAC children: `(x_p + x_q) / 2 - phi1 v_p` and `(x_p + x_q) / 2 - phi2 v_q`.
pub fn vpac_crossover(
    p: &RealParticle,
    q: &RealParticle,
    phi1: f64,
    phi2: f64,
) -> (Vec<f64>, Vec<f64>) {
    let mid: Vec<f64> = p
        .position
        .iter()
        .zip(&q.position)
        .map(|(a, b)| (a + b) / 2.0)
        .collect();
    let c1 = mid.iter().zip(&p.velocity).map(|(m, v)| m - phi1 * v).collect();
    let c2 = mid.iter().zip(&q.velocity).map(|(m, v)| m - phi2 * v).collect();
    (c1, c2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousResult {
    pub best_position: Vec<f64>,
    pub best_value: f64,
    /// Best-so-far value per iteration.
    pub trace: Vec<f64>,
}

impl ContinuousResult {
    /// Writes the trace as `iteration,best_value` CSV.
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iteration,best_value")?;
        for (i, v) in self.trace.iter().enumerate() {
            writeln!(out, "{},{}", i + 1, v)?;
        }
        Ok(())
    }
}

fn best_index(swarm: &[RealParticle]) -> usize {
    let mut order: Vec<usize> = (0..swarm.len()).collect();
    order.sort_by(|&a, &b| swarm[a].value.total_cmp(&swarm[b].value).then(a.cmp(&b)));
    order[0]
}

/// Breeding-swarm minimisation of `objective` over the configured box.
pub fn run_continuous<F>(objective: F, config: &ContinuousConfig) -> Result<ContinuousResult>
where
    F: Fn(&[f64]) -> f64,
{
    config.validate()?;
    let mut rng = seed::rng(config.seed);
    let n = config.swarm_size;

    let mut swarm: Vec<RealParticle> = (0..n)
        .map(|_| {
            let position: Vec<f64> = config
                .bounds
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..=hi))
                .collect();
            let velocity: Vec<f64> = config
                .bounds
                .iter()
                .map(|&(lo, hi)| {
                    let span = 0.1 * (hi - lo);
                    rng.random_range(-span..=span)
                })
                .collect();
            let value = objective(&position);
            RealParticle::new(position, velocity, value)
        })
        .collect();

    let b = best_index(&swarm);
    let mut best_position = swarm[b].position.clone();
    let mut best_value = swarm[b].value;
    let mut trace = vec![best_value];

    let n_elite =
        (((config.elite_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize).min(n);
    let unit = Normal::new(0.0, 1.0).expect("unit normal is valid");

    for _ in 1..config.iterations {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| swarm[a].value.total_cmp(&swarm[b].value).then(a.cmp(&b)));
        let rest = &order[n_elite..];
        let z = breed_count(rest.len(), config.breed_ratio);
        let mut to_pso = vec![false; rest.len()];
        for i in index::sample(&mut rng, rest.len(), z) {
            to_pso[i] = true;
        }

        let mut next: Vec<RealParticle> = order[..n_elite].iter().map(|&i| swarm[i].clone()).collect();
        let mut breeders = Vec::new();
        for (k, &i) in rest.iter().enumerate() {
            if to_pso[k] {
                let mut p = swarm[i].clone();
                pso_step(&mut p, &best_position, config, &mut rng);
                let v = objective(&p.position);
                p.record(v);
                next.push(p);
            } else {
                breeders.push(i);
            }
        }

        breeders.shuffle(&mut rng);
        let mut children = Vec::with_capacity(breeders.len());
        for pair in breeders.chunks(2) {
            let (p, q) = match *pair {
                [i, j] => (i, j),
                [i] => (i, rng.random_range(0..n)),
                _ => unreachable!("chunks(2) yields one or two items"),
            };
            let (c1, c2) = vpac_crossover(&swarm[p], &swarm[q], config.phi1, config.phi2);
            children.push(c1);
            if pair.len() == 2 {
                children.push(c2);
            }
        }
        for mut position in children {
            for (d, &(lo, hi)) in config.bounds.iter().enumerate() {
                if rng.random_bool(config.mutation_rate) {
                    position[d] += config.mutation_scale * (hi - lo) * unit.sample(&mut rng);
                }
            }
            let mut child = RealParticle::new(position, vec![0.0; config.dim()], 0.0);
            config.clamp(&mut child);
            let v = objective(&child.position);
            child.value = v;
            child.pbest_value = v;
            child.pbest_position.clone_from(&child.position);
            next.push(child);
        }
        swarm = next;

        let b = best_index(&swarm);
        if swarm[b].value < best_value {
            best_value = swarm[b].value;
            best_position.clone_from(&swarm[b].position);
        }
        trace.push(best_value);
    }

    Ok(ContinuousResult {
        best_position,
        best_value,
        trace,
    })
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
            .sum::<f64>()
}
