//! Finite-blocklength simulators of the two key-agreement protocols.
//!
//! Both simulators draw a fresh codebook per trial from seeds derived from
//! the master seed, so every reported quantity is an estimate of the
//! code-ensemble average; leakage terms are measured exactly per trial by
//! posterior enumeration whenever the state space fits the cap, otherwise by
//! a flagged plug-in estimate. Reports are bit-identical for a fixed
//! (configuration, master seed) regardless of thread count.

pub mod codebook;
pub mod fb;
pub mod leakage;
pub mod nofb;
pub mod report;
pub mod typicality;

pub use codebook::{
    extract_keys_nofb, gen_codebooks_nofb, gen_double_binned, Codebook, DoubleBinnedCodebook,
    FbRates, NofbRates,
};
pub use fb::{fb_receiver_step, run_fb, tx_recover, FbContext, FbReceiver};
pub use nofb::{decode_nofb, draw_input, encode_nofb, run_nofb, Encoding, NofbContext, Receiver};
pub use report::{
    Estimator, KeyEntropyReport, LeakageMetric, LeakageMode, SimOptions, SimulationReport,
};
pub use typicality::TypicalityParams;
