//! Quantum channels as Kraus families, their complements and Choi states,
//! and zero-capacity certificates (PPT, two-symmetric extension).

mod choi;
mod json;
mod kraus;

pub use choi::{
    check_two_symmetric_extension, choi_state, depolarizing_symmetric_extension, is_ppt,
    verify_two_symmetric_extension, ChoiState, PptReport, SymExtReport, TOL_SYMEXT,
};
pub use json::{decode_matrix, encode_matrix, ChannelDoc};
pub use kraus::{
    channel_from_choi, depolarizing_channel, erasure_channel, flag_projector, flagged_mixture,
    QuantumChannel, TOL_TRACE_PRESERVING,
};
