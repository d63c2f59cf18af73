//! Context-driven echo state network: fixed random recurrent weights, a
//! leaky-tanh state update, and a ridge-regression linear readout.
//!
//! The recurrent matrix is rescaled at initialization so its spectral radius
//! hits a configured target, which keeps input influence transient (the echo
//! state property). Only the readout is ever trained; the reservoir and its
//! input channels stay frozen.

use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sizes, scalings, and regression settings for one reservoir.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirConfig {
    /// Number of reservoir units.
    pub n_reservoir: usize,
    /// Context channel width (task conditioning vector).
    pub n_context: usize,
    /// Feedback channel width; 0 disables the channel.
    pub n_feedback: usize,
    /// Command-input channel width; 0 disables the channel.
    pub n_input: usize,
    /// Readout output width.
    pub n_output: usize,
    /// Target spectral radius for the recurrent matrix.
    pub spectral_radius: f64,
    /// Scale applied to the context weights after the uniform draw.
    pub context_scale: f64,
    /// Scale applied to the feedback weights.
    pub feedback_scale: f64,
    /// Scale applied to the command-input weights.
    pub input_scale: f64,
    /// Leak rate in (0, 1]: convex blend between the previous state and the
    /// tanh drive.
    pub leak_rate: f64,
    /// Ridge regularization for the readout fit.
    pub ridge_lambda: f64,
    /// Seed for the weight draws.
    pub seed: u64,
}

impl Default for ReservoirConfig {
    fn default() -> Self {
        Self {
            n_reservoir: 300,
            n_context: 2,
            n_feedback: 0,
            n_input: 0,
            n_output: 4,
            spectral_radius: 0.9,
            context_scale: 1.0,
            feedback_scale: 0.5,
            input_scale: 1.0,
            leak_rate: 0.3,
            ridge_lambda: 1e-6,
            seed: 0,
        }
    }
}

impl ReservoirConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_reservoir == 0 {
            return Err(Error::Config("n_reservoir must be positive".into()));
        }
        if self.n_context == 0 {
            return Err(Error::Config("n_context must be positive".into()));
        }
        if self.n_output == 0 {
            return Err(Error::Config("n_output must be positive".into()));
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius.is_finite()) {
            return Err(Error::Config("spectral_radius must be positive".into()));
        }
        if !(self.leak_rate > 0.0 && self.leak_rate <= 1.0) {
            return Err(Error::Config("leak_rate must lie in (0, 1]".into()));
        }
        if !(self.ridge_lambda >= 0.0) {
            return Err(Error::Config("ridge_lambda must be non-negative".into()));
        }
        for (name, v) in [
            ("context_scale", self.context_scale),
            ("feedback_scale", self.feedback_scale),
            ("input_scale", self.input_scale),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be non-negative")));
            }
        }
        Ok(())
    }
}

/// The fixed random matrices of one reservoir. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirWeights {
    w_x: DMatrix<f64>,
    w_c: DMatrix<f64>,
    w_f: Option<DMatrix<f64>>,
    w_u: Option<DMatrix<f64>>,
}

impl ReservoirWeights {
    /// Assembles weights from raw matrices, checking shape consistency.
    /// Used by model deserialization; fresh weights come from [`init_reservoir`].
    pub fn from_parts(
        w_x: DMatrix<f64>,
        w_c: DMatrix<f64>,
        w_f: Option<DMatrix<f64>>,
        w_u: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let n = w_x.nrows();
        if w_x.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "reservoir matrix must be square",
                expected: n,
                actual: w_x.ncols(),
            });
        }
        for (name, m) in [("w_c", Some(&w_c)), ("w_f", w_f.as_ref()), ("w_u", w_u.as_ref())] {
            if let Some(m) = m {
                if m.nrows() != n {
                    return Err(Error::Contract(format!(
                        "{name} has {} rows, reservoir has {n} units",
                        m.nrows()
                    )));
                }
            }
        }
        Ok(Self { w_x, w_c, w_f, w_u })
    }

    pub fn w_x(&self) -> &DMatrix<f64> {
        &self.w_x
    }

    pub fn w_c(&self) -> &DMatrix<f64> {
        &self.w_c
    }

    pub fn w_f(&self) -> Option<&DMatrix<f64>> {
        self.w_f.as_ref()
    }

    pub fn w_u(&self) -> Option<&DMatrix<f64>> {
        self.w_u.as_ref()
    }

    pub fn n_reservoir(&self) -> usize {
        self.w_x.nrows()
    }

    pub fn n_context(&self) -> usize {
        self.w_c.ncols()
    }

    pub fn n_feedback(&self) -> usize {
        self.w_f.as_ref().map_or(0, DMatrix::ncols)
    }

    pub fn n_input(&self) -> usize {
        self.w_u.as_ref().map_or(0, DMatrix::ncols)
    }
}

/// Unit activations of one reservoir at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    pub x: DVector<f64>,
}

impl ReservoirState {
    /// The all-zero state used at the start of every episode.
    pub fn zeroed(n_reservoir: usize) -> Self {
        Self {
            x: DVector::zeros(n_reservoir),
        }
    }
}

/// Design matrix and targets for the readout fit: columns are time steps,
/// state columns are `[1; x(t)]`, target columns are `y(t)`.
#[derive(Debug, Clone)]
pub struct TrainingBatch {
    states: DMatrix<f64>,
    targets: DMatrix<f64>,
}

impl TrainingBatch {
    pub fn new(states: DMatrix<f64>, targets: DMatrix<f64>) -> Result<Self> {
        if states.ncols() != targets.ncols() {
            return Err(Error::DimensionMismatch {
                context: "training batch column counts",
                expected: states.ncols(),
                actual: targets.ncols(),
            });
        }
        if states.nrows() == 0 || states.ncols() == 0 {
            return Err(Error::Contract("training batch is empty".into()));
        }
        if (0..states.ncols()).any(|t| states[(0, t)] != 1.0) {
            return Err(Error::Contract(
                "first row of the state matrix must be all ones".into(),
            ));
        }
        Ok(Self { states, targets })
    }

    pub fn states(&self) -> &DMatrix<f64> {
        &self.states
    }

    pub fn targets(&self) -> &DMatrix<f64> {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.states.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.states.ncols() == 0
    }
}

/// Trained linear readout; column 0 multiplies the constant 1 of the
/// augmented state and acts as the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutWeights {
    pub w_out: DMatrix<f64>,
}

/// Augments a state vector with the leading constant: `[1; x]`.
pub fn augmented(x: &DVector<f64>) -> DVector<f64> {
    let mut v = DVector::zeros(x.len() + 1);
    v[0] = 1.0;
    v.rows_mut(1, x.len()).copy_from(x);
    v
}

/// Largest eigenvalue modulus, computed from the full (complex) spectrum.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Scales a square matrix so its spectral radius equals `rho`.
pub fn rescale_to_spectral_radius(m: &DMatrix<f64>, rho: f64) -> Result<DMatrix<f64>> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Contract(format!("target spectral radius {rho} must be positive")));
    }
    if m.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let current = spectral_radius(m);
    if current == 0.0 {
        // Nonzero but nilpotent: no scaling can reach a positive radius.
        return Err(Error::ZeroMatrix);
    }
    Ok(m * (rho / current))
}

/// Draws fresh reservoir weights: uniform entries on [-1, 1], the recurrent
/// matrix rescaled to the configured spectral radius, input channels scaled
/// per configuration. Deterministic given the seed.
pub fn init_reservoir(config: &ReservoirConfig) -> Result<ReservoirWeights> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut uniform =
        |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..=1.0));

    let n = config.n_reservoir;
    let raw = uniform(n, n);
    let w_c = uniform(n, config.n_context) * config.context_scale;
    let w_f = (config.n_feedback > 0).then(|| uniform(n, config.n_feedback) * config.feedback_scale);
    let w_u = (config.n_input > 0).then(|| uniform(n, config.n_input) * config.input_scale);
    let w_x = rescale_to_spectral_radius(&raw, config.spectral_radius)?;

    Ok(ReservoirWeights { w_x, w_c, w_f, w_u })
}

fn check_channel(
    name: &'static str,
    weight: Option<&DMatrix<f64>>,
    vector: Option<&DVector<f64>>,
) -> Result<()> {
    match (weight, vector) {
        (Some(w), Some(v)) if w.ncols() != v.len() => Err(Error::DimensionMismatch {
            context: name,
            expected: w.ncols(),
            actual: v.len(),
        }),
        (Some(_), None) => Err(Error::Contract(format!(
            "reservoir has a {name} channel but no {name} vector was supplied"
        ))),
        (None, Some(_)) => Err(Error::Contract(format!(
            "a {name} vector was supplied but the reservoir has no {name} channel"
        ))),
        _ => Ok(()),
    }
}

/// One leaky-tanh update: `(1 - a) x + a tanh(W_x x + W_c c + W_f f + W_u u)`,
/// with absent channels contributing zero.
pub fn reservoir_step(
    w: &ReservoirWeights,
    state: &ReservoirState,
    context: &DVector<f64>,
    feedback: Option<&DVector<f64>>,
    input: Option<&DVector<f64>>,
    leak_rate: f64,
) -> Result<ReservoirState> {
    if !(leak_rate > 0.0 && leak_rate <= 1.0) {
        return Err(Error::Contract(format!("leak_rate {leak_rate} outside (0, 1]")));
    }
    if state.x.len() != w.n_reservoir() {
        return Err(Error::DimensionMismatch {
            context: "reservoir state",
            expected: w.n_reservoir(),
            actual: state.x.len(),
        });
    }
    if context.len() != w.n_context() {
        return Err(Error::DimensionMismatch {
            context: "context vector",
            expected: w.n_context(),
            actual: context.len(),
        });
    }
    check_channel("feedback", w.w_f(), feedback)?;
    check_channel("input", w.w_u(), input)?;

    let mut net = &w.w_x * &state.x;
    net += &w.w_c * context;
    if let (Some(wf), Some(f)) = (w.w_f(), feedback) {
        net += wf * f;
    }
    if let (Some(wu), Some(u)) = (w.w_u(), input) {
        net += wu * u;
    }
    let x = state.x.map(|v| v * (1.0 - leak_rate)) + net.map(|v| leak_rate * v.tanh());
    Ok(ReservoirState { x })
}

/// Iterates [`reservoir_step`] over aligned input sequences, returning the
/// state after each step.
pub fn run_sequence(
    w: &ReservoirWeights,
    initial_state: &ReservoirState,
    contexts: &[DVector<f64>],
    feedbacks: Option<&[DVector<f64>]>,
    inputs: Option<&[DVector<f64>]>,
    leak_rate: f64,
) -> Result<Vec<ReservoirState>> {
    let t_len = contexts.len();
    for (name, seq) in [("feedbacks", feedbacks), ("inputs", inputs)] {
        if let Some(seq) = seq {
            if seq.len() != t_len {
                return Err(Error::Contract(format!(
                    "{name} sequence has length {}, contexts have {t_len}",
                    seq.len()
                )));
            }
        }
    }
    let mut states = Vec::with_capacity(t_len);
    let mut current = initial_state.clone();
    for t in 0..t_len {
        current = reservoir_step(
            w,
            &current,
            &contexts[t],
            feedbacks.map(|s| &s[t]),
            inputs.map(|s| &s[t]),
            leak_rate,
        )?;
        states.push(current.clone());
    }
    Ok(states)
}

/// Ridge-regression readout fit: `W_out = Y X^T (X X^T + lambda I)^{-1}`,
/// computed through a Cholesky solve of the symmetric system rather than an
/// explicit inverse.
pub fn ridge_fit(batch: &TrainingBatch, lambda: f64) -> Result<ReadoutWeights> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Contract(format!("lambda {lambda} must be non-negative")));
    }
    let x = batch.states();
    let y = batch.targets();
    let m = x.nrows();
    let mut gram = x * x.transpose();
    for i in 0..m {
        gram[(i, i)] += lambda;
    }
    let rhs = x * y.transpose();
    match Cholesky::new(gram.clone()) {
        Some(chol) => {
            let solution = chol.solve(&rhs);
            Ok(ReadoutWeights {
                w_out: solution.transpose(),
            })
        }
        None => {
            let eigs = gram.symmetric_eigenvalues();
            let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
            let cond = if min > 0.0 { max / min } else { f64::INFINITY };
            Err(Error::IllConditioned { cond })
        }
    }
}

/// Applies the readout to one state: `W_out [1; x]`.
pub fn readout(w_out: &ReadoutWeights, state: &ReservoirState) -> Result<DVector<f64>> {
    if w_out.w_out.ncols() != state.x.len() + 1 {
        return Err(Error::DimensionMismatch {
            context: "readout input",
            expected: w_out.w_out.ncols(),
            actual: state.x.len() + 1,
        });
    }
    Ok(&w_out.w_out * augmented(&state.x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_config() -> ReservoirConfig {
        ReservoirConfig {
            n_reservoir: 20,
            n_context: 2,
            n_feedback: 3,
            n_input: 0,
            n_output: 2,
            seed: 11,
            ..ReservoirConfig::default()
        }
    }

    #[test]
    fn zero_context_scale_zeroes_the_context_weights() {
        let config = ReservoirConfig {
            context_scale: 0.0,
            ..small_config()
        };
        let w = init_reservoir(&config).unwrap();
        assert!(w.w_c().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn same_seed_gives_bitwise_identical_weights() {
        let config = small_config();
        let a = init_reservoir(&config).unwrap();
        let b = init_reservoir(&config).unwrap();
        assert_eq!(a, b);
        let c = init_reservoir(&ReservoirConfig { seed: 12, ..config }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rescale_identity() {
        let m = DMatrix::<f64>::identity(4, 4);
        let scaled = rescale_to_spectral_radius(&m, 0.5).unwrap();
        assert_abs_diff_eq!(scaled, DMatrix::identity(4, 4) * 0.5, epsilon = 1e-15);
    }

    #[test]
    fn rescale_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -1.0]));
        let scaled = rescale_to_spectral_radius(&m, 1.0).unwrap();
        assert_abs_diff_eq!(scaled[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(scaled[(1, 1)], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn rescale_rejects_zero_matrix() {
        let m = DMatrix::<f64>::zeros(3, 3);
        assert!(matches!(rescale_to_spectral_radius(&m, 1.0), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn rescale_rejects_nilpotent_matrix() {
        let mut m = DMatrix::<f64>::zeros(3, 3);
        m[(0, 1)] = 1.0;
        m[(1, 2)] = 1.0;
        assert!(matches!(rescale_to_spectral_radius(&m, 1.0), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn step_with_zero_weights_decays_by_leak() {
        let w = ReservoirWeights::from_parts(
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 1),
            None,
            None,
        )
        .unwrap();
        let state = ReservoirState {
            x: DVector::from_vec(vec![0.4, -0.2]),
        };
        let next = reservoir_step(&w, &state, &DVector::zeros(1), None, None, 0.5).unwrap();
        assert_abs_diff_eq!(next.x[0], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(next.x[1], -0.1, epsilon = 1e-15);
    }

    #[test]
    fn full_leak_from_rest_is_pure_tanh() {
        let w = ReservoirWeights::from_parts(
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            None,
            None,
        )
        .unwrap();
        for z in [-2.0, -0.3, 0.0, 0.7, 3.0] {
            let next = reservoir_step(
                &w,
                &ReservoirState::zeroed(1),
                &DVector::from_element(1, z),
                None,
                None,
                1.0,
            )
            .unwrap();
            assert_abs_diff_eq!(next.x[0], z.tanh(), epsilon = 1e-15);
        }
    }

    // Scalar-by-scalar recomputation of the update equations, independent of
    // the matrix algebra in the implementation.
    #[test]
    fn step_matches_hand_computation() {
        let w_x = [[0.1, -0.2, 0.3], [0.0, 0.25, -0.15], [0.4, 0.1, -0.05]];
        let w_c = [[0.5, -0.1], [0.2, 0.3], [-0.4, 0.05]];
        let w_f = [[0.15], [-0.3], [0.45]];
        let x0 = [0.3, -0.6, 0.9];
        let c = [0.2, -0.7];
        let f = [0.5];
        let leak = 0.3;

        let weights = ReservoirWeights::from_parts(
            DMatrix::from_fn(3, 3, |r, col| w_x[r][col]),
            DMatrix::from_fn(3, 2, |r, col| w_c[r][col]),
            Some(DMatrix::from_fn(3, 1, |r, col| w_f[r][col])),
            None,
        )
        .unwrap();
        let state = ReservoirState {
            x: DVector::from_row_slice(&x0),
        };
        let next = reservoir_step(
            &weights,
            &state,
            &DVector::from_row_slice(&c),
            Some(&DVector::from_row_slice(&f)),
            None,
            leak,
        )
        .unwrap();

        for i in 0..3 {
            let mut net = 0.0;
            for j in 0..3 {
                net += w_x[i][j] * x0[j];
            }
            for j in 0..2 {
                net += w_c[i][j] * c[j];
            }
            net += w_f[i][0] * f[0];
            let expected = (1.0 - leak) * x0[i] + leak * net.tanh();
            assert_abs_diff_eq!(next.x[i], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn step_rejects_missing_feedback() {
        let config = small_config();
        let w = init_reservoir(&config).unwrap();
        let err = reservoir_step(
            &w,
            &ReservoirState::zeroed(config.n_reservoir),
            &DVector::zeros(config.n_context),
            None,
            None,
            config.leak_rate,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn step_rejects_dimension_mismatch() {
        let config = ReservoirConfig {
            n_feedback: 0,
            ..small_config()
        };
        let w = init_reservoir(&config).unwrap();
        let err = reservoir_step(
            &w,
            &ReservoirState::zeroed(config.n_reservoir),
            &DVector::zeros(5),
            None,
            None,
            config.leak_rate,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn empty_sequence_gives_empty_states() {
        let config = ReservoirConfig {
            n_feedback: 0,
            ..small_config()
        };
        let w = init_reservoir(&config).unwrap();
        let states = run_sequence(
            &w,
            &ReservoirState::zeroed(config.n_reservoir),
            &[],
            None,
            None,
            config.leak_rate,
        )
        .unwrap();
        assert!(states.is_empty());
    }

    #[test]
    fn sequence_matches_manual_stepping() {
        let config = ReservoirConfig {
            n_feedback: 0,
            n_reservoir: 12,
            ..small_config()
        };
        let w = init_reservoir(&config).unwrap();
        let contexts: Vec<DVector<f64>> = (0..100)
            .map(|t| DVector::from_vec(vec![(t as f64 * 0.01).sin(), 0.2]))
            .collect();
        let initial = ReservoirState::zeroed(config.n_reservoir);

        let states =
            run_sequence(&w, &initial, &contexts, None, None, config.leak_rate).unwrap();
        assert_eq!(states.len(), 100);

        let mut manual = initial;
        for (t, ctx) in contexts.iter().enumerate() {
            manual = reservoir_step(&w, &manual, ctx, None, None, config.leak_rate).unwrap();
            assert_eq!(manual, states[t]);
        }
    }

    #[test]
    fn sequence_rejects_ragged_lengths() {
        let config = small_config();
        let w = init_reservoir(&config).unwrap();
        let contexts = vec![DVector::zeros(config.n_context); 4];
        let feedbacks = vec![DVector::zeros(config.n_feedback); 3];
        let err = run_sequence(
            &w,
            &ReservoirState::zeroed(config.n_reservoir),
            &contexts,
            Some(&feedbacks),
            None,
            config.leak_rate,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    fn random_batch(n_r: usize, t_len: usize, n_y: usize, seed: u64) -> TrainingBatch {
        let mut rng = crate::rng::rng_from(seed, "reservoir-test-batch");
        let mut states = DMatrix::from_fn(n_r + 1, t_len, |_, _| rng.random_range(-1.0..1.0));
        for t in 0..t_len {
            states[(0, t)] = 1.0;
        }
        let targets = DMatrix::from_fn(n_y, t_len, |_, _| rng.random_range(-1.0..1.0));
        TrainingBatch::new(states, targets).unwrap()
    }

    #[test]
    fn batch_requires_ones_row() {
        let states = DMatrix::from_element(3, 4, 0.5);
        let targets = DMatrix::zeros(2, 4);
        assert!(TrainingBatch::new(states, targets).is_err());
    }

    #[test]
    fn zero_targets_give_zero_readout() {
        let batch = random_batch(10, 50, 3, 1);
        let zero_batch =
            TrainingBatch::new(batch.states().clone(), DMatrix::zeros(3, 50)).unwrap();
        for lambda in [0.0, 0.1, 10.0] {
            let w = ridge_fit(&zero_batch, lambda).unwrap();
            assert!(w.w_out.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn ridge_shrinkage_is_monotone() {
        let batch = random_batch(15, 120, 2, 2);
        let norms: Vec<f64> = [0.01, 0.1, 1.0]
            .iter()
            .map(|&l| ridge_fit(&batch, l).unwrap().w_out.norm())
            .collect();
        assert!(norms[0] > norms[1] && norms[1] > norms[2], "norms {norms:?}");
    }

    // First-order optimality of the ridge solution:
    // (Y - W X) X^T = lambda W  at the minimizer.
    #[test]
    fn ridge_satisfies_normal_equations() {
        let batch = random_batch(40, 300, 4, 3);
        let lambda = 1e-4;
        let w = ridge_fit(&batch, lambda).unwrap().w_out;
        let x = batch.states();
        let y = batch.targets();
        let residual = (y - &w * x) * x.transpose() - &w * lambda;
        let scale = (y * x.transpose()).norm();
        assert!(residual.norm() / scale < 1e-8);
    }

    #[test]
    fn singular_system_without_ridge_is_reported() {
        // Fewer observations than state rows makes X X^T rank deficient.
        let mut states = DMatrix::zeros(10, 3);
        for t in 0..3 {
            states[(0, t)] = 1.0;
            states[(1 + t, t)] = 0.5;
        }
        let batch = TrainingBatch::new(states, DMatrix::zeros(1, 3)).unwrap();
        match ridge_fit(&batch, 0.0) {
            Err(Error::IllConditioned { cond }) => assert!(cond > 1e12 || cond.is_infinite()),
            other => panic!("expected ill-conditioned error, got {other:?}"),
        }
    }

    #[test]
    fn readout_bias_column_dominates_zero_state_weights() {
        let n_r = 6;
        let mut w = DMatrix::zeros(2, n_r + 1);
        w[(0, 0)] = 1.5;
        w[(1, 0)] = -0.25;
        let readout_w = ReadoutWeights { w_out: w };
        let mut rng = crate::rng::rng_from(4, "readout-bias");
        for _ in 0..5 {
            let state = ReservoirState {
                x: DVector::from_fn(n_r, |_, _| rng.random_range(-1.0..1.0)),
            };
            let y = readout(&readout_w, &state).unwrap();
            assert_abs_diff_eq!(y[0], 1.5, epsilon = 1e-15);
            assert_abs_diff_eq!(y[1], -0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn readout_zero_weights_give_zero_output() {
        let readout_w = ReadoutWeights {
            w_out: DMatrix::zeros(4, 9),
        };
        let state = ReservoirState {
            x: DVector::from_element(8, 0.3),
        };
        assert!(readout(&readout_w, &state).unwrap().iter().all(|v| *v == 0.0));
    }

    // An affine target y = A x + b is inside the readout's hypothesis class,
    // so a tiny ridge recovers it almost exactly.
    #[test]
    fn ridge_recovers_exact_affine_target() {
        let n_r = 12;
        let t_len = 200;
        let mut rng = crate::rng::rng_from(5, "affine-recovery");
        let a = DMatrix::from_fn(3, n_r, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));

        let mut states = DMatrix::zeros(n_r + 1, t_len);
        let mut targets = DMatrix::zeros(3, t_len);
        for t in 0..t_len {
            let x = DVector::from_fn(n_r, |_, _| rng.random_range(-1.0..1.0));
            let y = &a * &x + &b;
            states[(0, t)] = 1.0;
            states.view_mut((1, t), (n_r, 1)).copy_from(&x);
            targets.column_mut(t).copy_from(&y);
        }
        let batch = TrainingBatch::new(states, targets.clone()).unwrap();
        let w = ridge_fit(&batch, 1e-10).unwrap();

        for t in 0..t_len {
            let state = ReservoirState {
                x: batch.states().view((1, t), (n_r, 1)).into_owned().column(0).into(),
            };
            let y = readout(&w, &state).unwrap();
            for i in 0..3 {
                assert_abs_diff_eq!(y[i], targets[(i, t)], epsilon = 1e-6);
            }
        }
    }

    // readout(s1) - readout(s2) depends only on x1 - x2.
    #[test]
    fn readout_is_affine_in_the_state() {
        let n_r = 10;
        let mut rng = crate::rng::rng_from(6, "affine-check");
        let w = ReadoutWeights {
            w_out: DMatrix::from_fn(2, n_r + 1, |_, _| rng.random_range(-1.0..1.0)),
        };
        for _ in 0..20 {
            let x1 = DVector::from_fn(n_r, |_, _| rng.random_range(-1.0..1.0));
            let x2 = DVector::from_fn(n_r, |_, _| rng.random_range(-1.0..1.0));
            let shift = DVector::from_fn(n_r, |_, _| rng.random_range(-1.0..1.0));
            let diff_a = readout(&w, &ReservoirState { x: x1.clone() }).unwrap()
                - readout(&w, &ReservoirState { x: x2.clone() }).unwrap();
            let diff_b = readout(&w, &ReservoirState { x: &x1 + &shift }).unwrap()
                - readout(&w, &ReservoirState { x: &x2 + &shift }).unwrap();
            assert_abs_diff_eq!((diff_a - diff_b).norm(), 0.0, epsilon = 1e-12);
        }
    }
}
