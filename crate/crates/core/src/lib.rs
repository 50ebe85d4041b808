//! Huffman-sequence (BMOCZ) waveforms for joint radar and communication.
//!
//! - [`huffman`]: zero patterns, polynomial expansion, autocorrelation.
//! - [`dizet`]: non-coherent bit recovery by zero testing.
//! - [`array`]: uniform linear array, hybrid beamforming, link budget,
//!   radar / comm channels and noise.
//! - [`radar`]: correlation, OS-CFAR, delay / Doppler / MUSIC estimation,
//!   ambiguity function.
//! - [`sim`]: seeded Monte Carlo BER, radar and CFAR calibration runs.
//! - [`io`]: CSV, bit-string and JSON parsing.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod dizet;
pub mod error;
pub mod huffman;
pub mod io;
pub mod radar;
pub mod sim;

pub use num_complex::Complex64;

pub use array::{
    apply_comm_channel, apply_radar_channel, awgn, awgn_seeded, make_beamformers, steering,
    ArrayConfig, Beamformer, CommPath, LinkBudget, RadarTarget,
};
pub use dizet::{dizet_decode, DecodedBits, DizetDecoder, ReceivedSequence};
pub use error::{Error, Result};
pub use huffman::{
    autocorrelation, encode, encode_zeros, BasebandSequence, BitMessage, HuffmanEncoder,
    ModulationParams, ZeroPattern,
};
pub use radar::{
    ambiguity_function, cross_correlate, estimate_delay, estimate_doppler, music_angles, os_cfar,
    sample_covariance, CfarConfig, CorrelationProfile, DetectionList,
};
pub use sim::{
    run_ber, run_cfar_calibration, run_radar, BerResult, CfarCalibration, ChannelModel,
    FrameSchedule, RadarResult, Scenario, SimConfig, TargetSpec,
};
