#![no_main]

use libfuzzer_sys::fuzz_target;
use swarm_throughput::{lump_state, SwarmState};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(state) = text.parse::<SwarmState>() {
        let again: SwarmState = state.to_string().parse().expect("display output parses");
        assert_eq!(again, state);
        assert_eq!(lump_state(&state).population(), state.population());
    }
});
