//! Secret-key rate regions and finite-blocklength binning simulators for a
//! state-dependent broadcast channel with two legitimate receivers and an
//! eavesdropper.
//!
//! The crate is organized around five layers:
//!
//! * [`prob`] — exact finite-alphabet distributions with entropy and
//!   (conditional) mutual information in bits;
//! * [`channel`] — the channel itself plus the two families of
//!   designer-chosen distributions and the joints they induce;
//! * [`region`] — inner/outer bound evaluators and scalarized search for the
//!   no-feedback scheme, and the feedback inner bound with its constraint
//!   system;
//! * [`fm`] — exact rational linear-inequality systems with Fourier-Motzkin
//!   projection;
//! * [`sim`] — finite-blocklength protocol simulators measuring every
//!   reliability, secrecy and uniformity condition empirically or by exact
//!   posterior enumeration.

pub mod channel;
pub mod error;
pub mod fm;
pub mod prob;
pub mod region;
pub mod seed;
pub mod sim;

pub use channel::{
    build_joint_fb, build_joint_nofb, reduce_to_wiretap, AuxScheme, BroadcastChannel,
    FeedbackScheme, WiretapMode,
};
pub use error::{Error, Result};
pub use fm::{fm_eliminate, Inequality, LinearInequalitySystem};
pub use prob::{compose, ConditionalPmf, JointPmf, Variable};
pub use region::fb::{
    build_fb_constraints, eval_inner_fb, verify_fm_matches_closed_form, EquivalenceReport,
    FbInnerPoint,
};
pub use region::nofb::{
    check_containment, eval_inner_nofb, eval_outer_nofb, maximize_inner_nofb,
    maximize_outer_nofb, InnerPointNofb, OuterBox, RateRegionReport, SearchBudget,
};
pub use region::positive_part;
pub use sim::{
    run_fb, run_nofb, Codebook, DoubleBinnedCodebook, FbRates, LeakageMode, NofbRates,
    SimulationReport, TypicalityParams,
};
