//! Regenerates the bundled example channels and schemes under fixtures/.
//! Run from the crate root: `cargo run -p keyrate-cli --example gen_fixtures`.

use std::fs;
use std::path::Path;

use keyrate_cli::schema::{
    Alphabets, AuxCardinalities, AuxSchemeFile, ChannelFile, FbCardinalities, FbSchemeFile,
    SCHEMA_VERSION,
};
use keyrate_core::channel::fixtures;

fn write(path: &str, value: &impl serde::Serialize) {
    let mut json = serde_json::to_string_pretty(value).unwrap();
    json.push('\n');
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(path);
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, json).unwrap();
    println!("wrote {}", path.display());
}

fn main() {
    write(
        "fixtures/channels/noiseless-binary.json",
        &ChannelFile::from_channel(&fixtures::noiseless_binary()),
    );
    write(
        "fixtures/channels/bsc-wiretap.json",
        &ChannelFile::from_channel(&fixtures::bsc_wiretap(0.1, 0.3)),
    );
    write(
        "fixtures/channels/state-binary.json",
        &ChannelFile::from_channel(&fixtures::state_binary(0.1, 0.3, 0.4)),
    );

    // Uniform binary U0 with X = U0, U1/U2 degenerate; the basic common-key
    // scheme for the noiseless and BSC channels.
    let nofb = AuxSchemeFile {
        schema_version: SCHEMA_VERSION,
        cardinalities: AuxCardinalities { u0: 2, u1: 1, u2: 1 },
        u0_given_s: vec![vec![0.5, 0.5]],
        u1_given_u0_s: vec![vec![vec![1.0], vec![1.0]]],
        u2_given_u0_s: vec![vec![vec![1.0], vec![1.0]]],
        x_given_all: vec![vec![
            vec![vec![vec![1.0, 0.0]]],
            vec![vec![vec![0.0, 1.0]]],
        ]],
    };
    write("fixtures/schemes/nofb-uniform-u0.json", &nofb);

    // Identity quantizers at both receivers, uniform input.
    let fb = FbSchemeFile {
        schema_version: SCHEMA_VERSION,
        cardinalities: FbCardinalities { v1: 2, v2: 2 },
        x_given_s: vec![vec![0.5, 0.5]],
        v1_given_y1: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        v2_given_y2: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
    };
    write("fixtures/schemes/fb-identity.json", &fb);

    // Receiver 1 only: V1 identity, V2 collapsed to a single symbol.
    let fb_rx1 = FbSchemeFile {
        schema_version: SCHEMA_VERSION,
        cardinalities: FbCardinalities { v1: 2, v2: 1 },
        x_given_s: vec![vec![0.5, 0.5]],
        v1_given_y1: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
        v2_given_y2: vec![vec![1.0], vec![1.0]],
    };
    write("fixtures/schemes/fb-rx1-only.json", &fb_rx1);

    // The alphabets type is re-exported for schema consumers; reference it
    // here so the generator fails to build if the schema shifts.
    let _ = Alphabets { s: 1, x: 2, y1: 2, y2: 2, z: 1 };
}
