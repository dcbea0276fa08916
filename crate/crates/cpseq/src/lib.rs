//! Synthesis and verification of composite pulse sequences for single-qubit
//! rotations.

pub mod analysis;
pub mod dd;
pub mod detuning;
pub mod error;
pub mod io;
pub mod series;
pub mod sk;
pub mod su2;
pub mod ts;

pub use error::{Error, Result};
pub use ts::{
    make_broadband, make_narrowband, make_passband, s1, sn, wimperis, Family, PulseSequence,
    Wimperis,
};

/// Tunable limits and defaults shared by constructors and the command line.
#[derive(Clone, Debug)]
pub struct Config {
    /// Base scale of the series-coefficient tolerance; the effective
    /// tolerance multiplies this by the Frobenius norm of the target
    /// (floored at 1).
    pub tol_defect: f64,
    /// Largest nesting depth accepted by the recursive product-word builder.
    pub sn_cap: usize,
    /// Largest order accepted by the single-axis correction-block recursion.
    pub unx_cap: usize,
    /// Largest order accepted by the frequency-offset correction ladder.
    pub detuning_cap: usize,
    /// Default sweep grid start.
    pub eps_start: f64,
    /// Default sweep grid stop.
    pub eps_stop: f64,
    /// Default sweep grid size.
    pub points: usize,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            tol_defect: 1e-9,
            sn_cap: 6,
            unx_cap: 12,
            detuning_cap: 4,
            eps_start: 1e-3,
            eps_stop: 0.5,
            points: 61,
        }
    }
}
pub use analysis::{
    count_two_pi, evaluate, fit_order, fit_order_metric, log_grid, scaling_study, sweep, Metric,
    ScalingResult, SweepResult,
};
pub use detuning::{detuning_u1z, make_corpse, make_detuning_corrected};
pub use io::{
    config_from_str, load_config, load_sequence, save_scaling_csv, save_sequence, save_sweep_csv,
    scaling_to_csv, sequence_from_json, sequence_to_json, sweep_to_csv,
};
pub use series::{
    leading_defect, pulse_series, sequence_series, series_multiply, verify_order, DefectTerm,
    MatrixSeries, OrderReport,
};
pub use sk::{
    axis_shift, make_sb, make_sk, sk_step, u1x, unx, Axis, AxisBlock, PlanarConjugator,
};
pub use su2::{
    distance, execute_sequence, fidelity, ideal_rotation, imperfect_rotation, pauli_decompose,
    ErrorModel, PauliVector, Pulse, Unitary2,
};
