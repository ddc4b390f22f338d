//! Pairwise messages between two people, one per channel.
//!
//! Run with `cargo run --example messages`.

use personrank::message::{msg_action, msg_appearance, msg_attention, msg_fused, msg_spatial};

fn main() -> personrank::Result<()> {
    // Standardized spatial features: [center x, center y, scale, density, sharpness].
    let alice = [-0.4, 0.1, 0.2, -0.3, 0.5];
    let bob = [0.3, -0.2, 1.4, 0.6, 0.9];
    let w_s = [0.0, 0.0, 1.0, 0.5, 0.2];
    println!("spatial    alice -> bob: {:+.4}", msg_spatial(&alice, &bob, &w_s)?);
    println!("spatial    bob -> alice: {:+.4}", msg_spatial(&bob, &alice, &w_s)?);

    let act_a = [0.1, -0.2, 0.0];
    let act_b = [0.9, 0.4, 0.7];
    let w = [1.0, 1.0, 1.0];
    println!("action     alice -> bob: {:+.4}", msg_action(&act_a, &act_b, &w)?);
    // Appearance is symmetric: it only sees how different two people look.
    println!("appearance alice -> bob: {:+.4}", msg_appearance(&act_a, &act_b, &w)?);
    println!("appearance bob -> alice: {:+.4}", msg_appearance(&act_b, &act_a, &w)?);

    // Attention features: [x position, depth (1/height), sin yaw, cos yaw].
    // Alice looks straight right; Bob stands to her right but closer to the
    // camera, facing away from her. Larger c weighs the depth gap more, so
    // Alice's gaze fits Bob less well.
    let att_a = [-1.0, 0.5, 1.0, 0.0];
    let att_b = [1.0, -0.5, 0.0, 1.0];
    for c in [0.5, 1.0, 2.0] {
        println!(
            "attention  alice -> bob (c = {c}): {:.4}   bob -> alice: {:.4}",
            msg_attention(&att_a, &att_b, c)?,
            msg_attention(&att_b, &att_a, c)?
        );
    }

    // Fused messages compare log-scores across channels.
    let log_a = [0.25f64.ln(), 0.4f64.ln()];
    let log_b = [0.5f64.ln(), 0.2f64.ln()];
    let q = [1.0, 0.5];
    println!("fused      alice -> bob: {:+.4}", msg_fused(&log_a, &log_b, &q)?);
    Ok(())
}
