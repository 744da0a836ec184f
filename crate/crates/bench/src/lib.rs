//! Fixtures shared by the benchmarks.

use bkic::channel::{generate_packet, ChannelParams, FadingSpec, InterferenceSpec, TargetSource};
use bkic::PacketRecord;

/// One block-fading packet of `blocks` blocks of QPSK interference.
pub fn packet(block_len: usize, blocks: usize, seed: u64) -> PacketRecord {
    let params = ChannelParams::new(100.0, 100.0, 1.0, block_len, block_len * blocks).expect("valid parameters");
    generate_packet(&params, &TargetSource::Psk(4), &InterferenceSpec::Psk(4), &FadingSpec::Block, seed)
        .expect("packet generation")
}
