//! Euler-Maruyama integration of the overdamped dynamics
//! `dX = F dt + sqrt(2 kB T) dW` at constant volume and temperature, with
//! reproducible Gaussian noise streams, a sampling schedule and
//! checkpointing hooks.

use crate::error::{Error, Result};
use crate::potential::PairPotential;
use crate::system::{compute_forces_with, CellList, Configuration, ForceField};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

/// Particles per noise stream. The block decomposition is fixed, so noise
/// values are independent of the worker count.
pub const NOISE_BLOCK: usize = 4096;

/// Integration parameters. Temperatures and times are in reduced units with
/// `k_b = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorParams {
    pub dt: f64,
    pub temperature: f64,
    pub k_b: f64,
    pub seed: u64,
    pub n_steps: u64,
    pub sample_every: u64,
    /// Interval between checkpoints; 0 disables periodic checkpoints.
    pub checkpoint_every: u64,
}

impl Default for IntegratorParams {
    fn default() -> Self {
        IntegratorParams {
            dt: 1e-4,
            temperature: 2.9,
            k_b: 1.0,
            seed: 1,
            n_steps: 0,
            sample_every: 1000,
            checkpoint_every: 0,
        }
    }
}

impl IntegratorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.temperature < 0.0 {
            return Err(Error::Config(format!(
                "temperature must be non-negative, got {}",
                self.temperature
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("sample_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Serializable state of one counter-based noise stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngState {
    /// Generator family identifier; currently always `"chacha12"`.
    pub generator: String,
    pub seed: u64,
    pub stream: u64,
    pub word_pos: u128,
}

pub const GENERATOR_ID: &str = "chacha12";

/// One Gaussian stream. Streams are derived from `(seed, stream)` by seeding
/// ChaCha12 with `seed_from_u64(seed)` and selecting `stream` as the ChaCha
/// stream number, so distinct indices give independent streams.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha12Rng,
    seed: u64,
    stream: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        NoiseStream { rng, seed, stream }
    }

    pub fn state(&self) -> RngState {
        RngState {
            generator: GENERATOR_ID.to_string(),
            seed: self.seed,
            stream: self.stream,
            word_pos: self.rng.get_word_pos(),
        }
    }

    pub fn from_state(state: &RngState) -> Result<Self> {
        if state.generator != GENERATOR_ID {
            return Err(Error::Config(format!(
                "unknown generator family {:?}",
                state.generator
            )));
        }
        let mut stream = NoiseStream::new(state.seed, state.stream);
        stream.rng.set_word_pos(state.word_pos);
        Ok(stream)
    }

    /// Draw one standard normal.
    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Append `n` i.i.d. draws of mean zero and the given variance.
    pub fn normal_increments(
        &mut self,
        n: usize,
        variance: f64,
        out: &mut Vec<f64>,
    ) -> Result<()> {
        if variance < 0.0 {
            return Err(Error::Domain(format!(
                "variance must be non-negative, got {variance}"
            )));
        }
        let scale = variance.sqrt();
        out.reserve(n);
        for _ in 0..n {
            out.push(scale * self.standard_normal());
        }
        Ok(())
    }

    /// Uniform integer in `[0, bound)`; used by seeded construction tasks.
    pub fn below(&mut self, bound: usize) -> usize {
        use rand::Rng;
        self.rng.gen_range(0..bound)
    }
}

/// The per-block noise streams of one integration run.
#[derive(Debug, Clone)]
pub struct IntegratorRng {
    streams: Vec<NoiseStream>,
}

impl IntegratorRng {
    pub fn new(seed: u64, n_particles: usize) -> Self {
        let n_blocks = n_particles.div_ceil(NOISE_BLOCK).max(1);
        IntegratorRng {
            streams: (0..n_blocks as u64)
                .map(|b| NoiseStream::new(seed, b))
                .collect(),
        }
    }

    pub fn states(&self) -> Vec<RngState> {
        self.streams.iter().map(|s| s.state()).collect()
    }

    pub fn from_states(states: &[RngState]) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Config("checkpoint carries no noise streams".into()));
        }
        Ok(IntegratorRng {
            streams: states
                .iter()
                .map(NoiseStream::from_state)
                .collect::<Result<_>>()?,
        })
    }

    /// Fill `buf` with `3 n` draws of N(0, variance), 3 consecutive values
    /// per particle, blocks in stream order.
    fn fill_increments(&mut self, n: usize, variance: f64, buf: &mut Vec<f64>) -> Result<()> {
        buf.clear();
        let mut remaining = n;
        for stream in self.streams.iter_mut() {
            if remaining == 0 {
                break;
            }
            let in_block = remaining.min(NOISE_BLOCK);
            stream.normal_increments(3 * in_block, variance, buf)?;
            remaining -= in_block;
        }
        debug_assert_eq!(remaining, 0, "not enough noise streams for {n} particles");
        Ok(())
    }
}

/// One explicit Euler-Maruyama step: `X += F dt + sqrt(2 kB T) dW` with
/// `dW ~ N(0, dt)` per coordinate, positions re-wrapped into the box and the
/// time stamp advanced. Forces must come from the pre-step configuration.
pub fn em_step(
    config: &mut Configuration,
    field: &ForceField,
    params: &IntegratorParams,
    rng: &mut IntegratorRng,
    noise_buf: &mut Vec<f64>,
) -> Result<()> {
    let n = config.len();
    debug_assert_eq!(field.forces.len(), n);
    rng.fill_increments(n, params.dt, noise_buf)?;
    let amplitude = (2.0 * params.k_b * params.temperature).sqrt();
    let dt = params.dt;
    for (j, p) in config.positions.iter_mut().enumerate() {
        let f = &field.forces[j];
        let moved = [
            p[0] + f[0] * dt + amplitude * noise_buf[3 * j],
            p[1] + f[1] * dt + amplitude * noise_buf[3 * j + 1],
            p[2] + f[2] * dt + amplitude * noise_buf[3 * j + 2],
        ];
        *p = config.sim_box.wrap_position(moved);
    }
    config.time += dt;
    Ok(())
}

/// Callbacks fed by `run_trajectory`.
#[derive(Default)]
pub struct TrajectoryHooks<'a> {
    /// Called with `(step, configuration)` on the sampling cadence.
    pub on_sample: Option<Box<dyn FnMut(u64, &Configuration) -> Result<()> + 'a>>,
    /// Called with `(step, configuration, rng states)` on the checkpoint
    /// cadence and on abort.
    pub on_checkpoint: Option<Box<dyn FnMut(u64, &Configuration, &[RngState]) -> Result<()> + 'a>>,
}

/// Mutable integration state; separable from the parameters so a run can be
/// resumed from a checkpoint.
#[derive(Debug, Clone)]
pub struct TrajectoryState {
    pub config: Configuration,
    pub rng: IntegratorRng,
    pub step: u64,
}

impl TrajectoryState {
    pub fn fresh(config: Configuration, params: &IntegratorParams) -> Self {
        let rng = IntegratorRng::new(params.seed, config.len());
        TrajectoryState {
            config,
            rng,
            step: 0,
        }
    }
}

/// Integrate from `state.step` to `params.n_steps`, emitting samples every
/// `sample_every` steps and checkpoints every `checkpoint_every` steps.
/// On model breakdown a final checkpoint is persisted before the error is
/// returned.
pub fn run_trajectory(
    state: &mut TrajectoryState,
    params: &IntegratorParams,
    pot: &dyn PairPotential,
    hooks: &mut TrajectoryHooks,
) -> Result<()> {
    params.validate()?;
    let mut noise_buf = Vec::new();
    while state.step < params.n_steps {
        let cells = CellList::build(&state.config, pot.r_cut())?;
        let field = match compute_forces_with(&state.config, pot, &cells) {
            Ok(field) => field,
            Err(err) => {
                if let Some(cp) = hooks.on_checkpoint.as_mut() {
                    cp(state.step, &state.config, &state.rng.states())?;
                }
                return Err(err);
            }
        };
        em_step(&mut state.config, &field, params, &mut state.rng, &mut noise_buf)?;
        state.step += 1;
        if state.step % params.sample_every == 0 {
            if let Some(sink) = hooks.on_sample.as_mut() {
                sink(state.step, &state.config)?;
            }
        }
        if params.checkpoint_every > 0 && state.step % params.checkpoint_every == 0 {
            if let Some(cp) = hooks.on_checkpoint.as_mut() {
                cp(state.step, &state.config, &state.rng.states())?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Exp6Params, PairPotential, PotentialTable, ShiftedExp6};
    use crate::system::{compute_forces, SimBox};
    use approx::assert_relative_eq;

    fn free_particle_params(temperature: f64, dt: f64, seed: u64) -> IntegratorParams {
        IntegratorParams {
            dt,
            temperature,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn zero_variance_draws_are_zero() {
        let mut s = NoiseStream::new(9, 0);
        let mut out = Vec::new();
        s.normal_increments(100, 0.0, &mut out).unwrap();
        assert!(out.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn negative_variance_is_domain_error() {
        let mut s = NoiseStream::new(9, 0);
        let mut out = Vec::new();
        assert!(matches!(
            s.normal_increments(1, -1.0, &mut out),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn same_seed_gives_identical_sequences() {
        let mut a = NoiseStream::new(1234, 7);
        let mut b = NoiseStream::new(1234, 7);
        let (mut va, mut vb) = (Vec::new(), Vec::new());
        a.normal_increments(512, 2.0, &mut va).unwrap();
        b.normal_increments(512, 2.0, &mut vb).unwrap();
        assert_eq!(va, vb);
        // Distinct stream indices decorrelate immediately.
        let mut c = NoiseStream::new(1234, 8);
        let mut vc = Vec::new();
        c.normal_increments(512, 2.0, &mut vc).unwrap();
        assert_ne!(va, vc);
    }

    #[test]
    fn unit_variance_moments() {
        let mut s = NoiseStream::new(99, 0);
        let mut out = Vec::with_capacity(1_000_000);
        s.normal_increments(1_000_000, 1.0, &mut out).unwrap();
        let n = out.len() as f64;
        let mean = out.iter().sum::<f64>() / n;
        let var = out.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4e-3, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
        // Higher moments of the pooled normalized increments.
        let m3 = out.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
        let m4 = out.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        let skew = m3 / var.powf(1.5);
        let kurt = m4 / (var * var) - 3.0;
        assert!(skew.abs() < 0.05, "skewness {skew}");
        assert!(kurt.abs() < 0.1, "excess kurtosis {kurt}");
    }

    #[test]
    fn rng_state_roundtrip_continues_sequence() {
        let mut s = NoiseStream::new(5, 3);
        let mut head = Vec::new();
        s.normal_increments(37, 1.0, &mut head).unwrap();
        let state = s.state();
        let mut rest_a = Vec::new();
        s.normal_increments(64, 1.0, &mut rest_a).unwrap();
        let mut restored = NoiseStream::from_state(&state).unwrap();
        let mut rest_b = Vec::new();
        restored.normal_increments(64, 1.0, &mut rest_b).unwrap();
        assert_eq!(rest_a, rest_b);
    }

    #[test]
    fn zero_temperature_zero_force_is_identity() {
        let sim_box = SimBox::new([10.0, 10.0, 10.0]).unwrap();
        let mut config = Configuration::new(sim_box, vec![[1.0, 2.0, 3.0]]).unwrap();
        let before = config.positions.clone();
        let params = free_particle_params(0.0, 1e-4, 1);
        let mut rng = IntegratorRng::new(params.seed, config.len());
        let field = ForceField {
            forces: vec![[0.0; 3]],
            site_energy: vec![0.0],
            force_divergence: vec![0.0],
        };
        let mut buf = Vec::new();
        em_step(&mut config, &field, &params, &mut rng, &mut buf).unwrap();
        assert_eq!(config.positions, before);
        assert_relative_eq!(config.time, 1e-4);
    }

    #[test]
    fn zero_temperature_two_particle_drift() {
        let pot = ShiftedExp6::new(Exp6Params::default(), 0.5).unwrap();
        let r = 1.3; // off equilibrium, attractive regime
        let sim_box = SimBox::new([10.0, 10.0, 10.0]).unwrap();
        let mut config = Configuration::new(
            sim_box,
            vec![[5.0 - r / 2.0, 5.0, 5.0], [5.0 + r / 2.0, 5.0, 5.0]],
        )
        .unwrap();
        let params = free_particle_params(0.0, 1e-6, 1);
        let mut rng = IntegratorRng::new(params.seed, config.len());
        let field = compute_forces(&config, &pot).unwrap();
        let expected_move = pot.eval(r).1.abs() * params.dt;
        let mut buf = Vec::new();
        let x0 = [config.positions[0][0], config.positions[1][0]];
        em_step(&mut config, &field, &params, &mut rng, &mut buf).unwrap();
        // Both particles move towards each other along the pair axis. The
        // tolerance reflects the cancellation in (x + d) - x at d ~ 1e-6.
        assert_relative_eq!(
            config.positions[0][0] - x0[0],
            expected_move,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            config.positions[1][0] - x0[1],
            -expected_move,
            max_relative = 1e-9
        );
    }

    #[test]
    fn zero_temperature_descent_is_monotone() {
        let pot = ShiftedExp6::new(Exp6Params::default(), 0.5).unwrap();
        let sim_box = SimBox::new([10.0, 10.0, 10.0]).unwrap();
        let mut config = Configuration::new(
            sim_box,
            vec![[4.4, 5.0, 5.0], [5.6, 5.0, 5.0]],
        )
        .unwrap();
        let params = free_particle_params(0.0, 1e-5, 1);
        let mut rng = IntegratorRng::new(params.seed, config.len());
        let mut buf = Vec::new();
        let mut energy = compute_forces(&config, &pot).unwrap().total_energy();
        for _ in 0..2000 {
            let field = compute_forces(&config, &pot).unwrap();
            em_step(&mut config, &field, &params, &mut rng, &mut buf).unwrap();
            let next = field.total_energy();
            let now = compute_forces(&config, &pot).unwrap().total_energy();
            assert!(now <= energy + 1e-12, "energy rose: {energy} -> {now}");
            let _ = next;
            energy = now;
        }
    }

    #[test]
    fn free_diffusion_has_correct_increment_variance() {
        // Single free particle: per-component displacement variance 2 kB T dt.
        let params = free_particle_params(2.9, 1e-5, 271828);
        let sim_box = SimBox::new([50.0, 50.0, 50.0]).unwrap();
        let mut config = Configuration::new(sim_box, vec![[25.0, 25.0, 25.0]]).unwrap();
        let mut rng = IntegratorRng::new(params.seed, 1);
        let field = ForceField {
            forces: vec![[0.0; 3]],
            site_energy: vec![0.0],
            force_divergence: vec![0.0],
        };
        let mut buf = Vec::new();
        let mut prev = config.positions[0];
        let mut acc = crate::stats::WeightedMeanVar::new();
        for _ in 0..100_000 {
            em_step(&mut config, &field, &params, &mut rng, &mut buf).unwrap();
            let p = config.positions[0];
            for d in 0..3 {
                let inc = sim_box.min_image_axis(p[d] - prev[d], d);
                acc.push(inc, 1.0);
            }
            prev = p;
        }
        let expected = 2.0 * params.temperature * params.dt;
        assert!(
            (acc.variance() - expected).abs() < 0.03 * expected,
            "variance {} vs {expected}",
            acc.variance()
        );
    }

    #[test]
    fn trajectory_sampling_cadence() {
        let table = PotentialTable::default_table();
        let sim_box = SimBox::new([10.0, 10.0, 10.0]).unwrap();
        let config = Configuration::new(sim_box, vec![[2.0, 2.0, 2.0], [7.0, 7.0, 7.0]]).unwrap();
        let params = IntegratorParams {
            dt: 1e-5,
            temperature: 0.5,
            seed: 3,
            n_steps: 5000,
            sample_every: 1000,
            checkpoint_every: 0,
            ..Default::default()
        };
        let mut state = TrajectoryState::fresh(config.clone(), &params);
        let mut sampled = Vec::new();
        let mut hooks = TrajectoryHooks {
            on_sample: Some(Box::new(|step, _cfg| {
                sampled.push(step);
                Ok(())
            })),
            on_checkpoint: None,
        };
        run_trajectory(&mut state, &params, &table, &mut hooks).unwrap();
        drop(hooks);
        assert_eq!(sampled, vec![1000, 2000, 3000, 4000, 5000]);

        // n_steps = 0 returns the input unchanged with no samples.
        let params0 = IntegratorParams {
            n_steps: 0,
            ..params
        };
        let mut state0 = TrajectoryState::fresh(config.clone(), &params0);
        let mut count = 0usize;
        let mut hooks0 = TrajectoryHooks {
            on_sample: Some(Box::new(|_, _| {
                count += 1;
                Ok(())
            })),
            on_checkpoint: None,
        };
        run_trajectory(&mut state0, &params0, &table, &mut hooks0).unwrap();
        drop(hooks0);
        assert_eq!(count, 0);
        assert_eq!(state0.config.positions, config.positions);
    }

    #[test]
    fn interrupted_run_resumes_bitwise() {
        let table = PotentialTable::default_table();
        let sim_box = SimBox::new([10.0, 10.0, 10.0]).unwrap();
        let config = Configuration::new(
            sim_box,
            vec![[2.0, 2.0, 2.0], [3.4, 2.0, 2.0], [7.0, 6.5, 8.0]],
        )
        .unwrap();
        let params = IntegratorParams {
            dt: 1e-5,
            temperature: 1.5,
            seed: 77,
            n_steps: 400,
            sample_every: 1000,
            checkpoint_every: 0,
            ..Default::default()
        };
        let mut whole = TrajectoryState::fresh(config.clone(), &params);
        run_trajectory(&mut whole, &params, &table, &mut TrajectoryHooks::default()).unwrap();

        // Same run split at step 150 through serialized rng states.
        let mut first = TrajectoryState::fresh(config, &params);
        let params_half = IntegratorParams {
            n_steps: 150,
            ..params.clone()
        };
        run_trajectory(&mut first, &params_half, &table, &mut TrajectoryHooks::default())
            .unwrap();
        let states = first.rng.states();
        let mut resumed = TrajectoryState {
            config: first.config.clone(),
            rng: IntegratorRng::from_states(&states).unwrap(),
            step: first.step,
        };
        run_trajectory(&mut resumed, &params, &table, &mut TrajectoryHooks::default()).unwrap();
        assert_eq!(resumed.config.positions, whole.config.positions);
        assert_eq!(resumed.config.time, whole.config.time);
    }

    #[test]
    fn breakdown_aborts_with_final_checkpoint() {
        // A deep quench with a huge step drives two particles into the
        // forbidden core range almost immediately.
        let table = PotentialTable::default_table();
        let sim_box = SimBox::new([10.0, 10.0, 10.0]).unwrap();
        let config = Configuration::new(
            sim_box,
            vec![[5.0, 5.0, 5.0], [5.52, 5.0, 5.0]],
        )
        .unwrap();
        let params = IntegratorParams {
            dt: 3e-3,
            temperature: 40.0,
            seed: 5,
            n_steps: 20_000,
            sample_every: 1_000_000,
            checkpoint_every: 0,
            ..Default::default()
        };
        let mut state = TrajectoryState::fresh(config, &params);
        let mut checkpoints = 0usize;
        let mut hooks = TrajectoryHooks {
            on_sample: None,
            on_checkpoint: Some(Box::new(|_, _, _| {
                checkpoints += 1;
                Ok(())
            })),
        };
        let err = run_trajectory(&mut state, &params, &table, &mut hooks).unwrap_err();
        drop(hooks);
        assert!(matches!(err, Error::ModelBreakdown { .. }), "{err}");
        assert_eq!(checkpoints, 1, "abort must persist one final checkpoint");
    }
}
