//! Edge message functions between two persons.
//!
//! Every function here depends only on feature differences, so adding the
//! same vector to both persons leaves the message unchanged.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest magnitude allowed inside `exp` for the exponential messages.
pub const EXP_CLAMP: f64 = 30.0;

/// Norm below which an attention direction is considered degenerate.
pub const DEGENERATE_NORM: f64 = 1e-12;

/// Which interaction graph a matrix or score belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelId {
    Spatial,
    Action,
    Appearance,
    Attention,
    Fused,
}

impl ChannelId {
    /// Per-feature channels in their canonical order.
    pub const FEATURE_CHANNELS: [ChannelId; 4] = [
        ChannelId::Spatial,
        ChannelId::Action,
        ChannelId::Appearance,
        ChannelId::Attention,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelId::Spatial => "spatial",
            ChannelId::Action => "action",
            ChannelId::Appearance => "appearance",
            ChannelId::Attention => "attention",
            ChannelId::Fused => "fused",
        }
    }
}

impl std::str::FromStr for ChannelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spatial" => Ok(ChannelId::Spatial),
            "action" => Ok(ChannelId::Action),
            "appearance" => Ok(ChannelId::Appearance),
            "attention" => Ok(ChannelId::Attention),
            "fused" => Ok(ChannelId::Fused),
            other => Err(Error::InvalidConfig(format!("unknown channel `{other}`"))),
        }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn check_dims(a: usize, b: usize, w: usize) -> Result<()> {
    if a != w {
        return Err(Error::DimensionMismatch { expected: w, got: a });
    }
    if b != w {
        return Err(Error::DimensionMismatch { expected: w, got: b });
    }
    Ok(())
}

/// Elementwise `exp(to - from)` with the exponent clamped to `±EXP_CLAMP`.
pub fn exp_diff(from: &[f64], to: &[f64]) -> Vec<f64> {
    from.iter()
        .zip(to)
        .map(|(a, b)| (b - a).clamp(-EXP_CLAMP, EXP_CLAMP).exp())
        .collect()
}

/// Elementwise `|to - from|`.
pub fn abs_diff(from: &[f64], to: &[f64]) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| (b - a).abs()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn exp_message(phi_i: &[f64], phi_j: &[f64], w: &[f64]) -> Result<f64> {
    check_dims(phi_i.len(), phi_j.len(), w.len())?;
    Ok(phi_i
        .iter()
        .zip(phi_j)
        .zip(w)
        .map(|((a, b), wk)| wk * (b - a).clamp(-EXP_CLAMP, EXP_CLAMP).exp())
        .sum())
}

/// How person `j` is located relative to person `i`: `w_sᵀ exp(φ_j − φ_i)`.
pub fn msg_spatial(phi_i: &[f64], phi_j: &[f64], w_s: &[f64]) -> Result<f64> {
    exp_message(phi_i, phi_j, w_s)
}

/// How the action of person `j` affects person `i`: `w_acᵀ exp(φ_j − φ_i)`.
pub fn msg_action(phi_i: &[f64], phi_j: &[f64], w_ac: &[f64]) -> Result<f64> {
    exp_message(phi_i, phi_j, w_ac)
}

/// Weighted absolute appearance difference. Symmetric in `i` and `j`.
pub fn msg_appearance(phi_i: &[f64], phi_j: &[f64], w_ap: &[f64]) -> Result<f64> {
    check_dims(phi_i.len(), phi_j.len(), w_ap.len())?;
    Ok(phi_i
        .iter()
        .zip(phi_j)
        .zip(w_ap)
        .map(|((a, b), wk)| wk * (b - a).abs())
        .sum())
}

/// Likelihood that person `i` looks at person `j`.
///
/// Attention vectors are laid out as `[f_x, f_depth, sin θ, cos θ]`. The
/// direction from `i` to `j` is `[1, c_att] ⊙ (f_j − f_i)` normalized to unit
/// length; the result is `exp(v_iᵀ·dir − 1)`, which lies in `[e⁻², 1]`.
/// Coincident positions have no direction and yield the neutral `e⁻¹`.
pub fn msg_attention(att_i: &[f64], att_j: &[f64], c_att: f64) -> Result<f64> {
    check_dims(att_i.len(), att_j.len(), 4)?;
    let u = [att_j[0] - att_i[0], c_att * (att_j[1] - att_i[1])];
    let norm = u[0].hypot(u[1]);
    if !(norm >= DEGENERATE_NORM) || !norm.is_finite() {
        return Ok((-1.0f64).exp());
    }
    let cos = (att_i[2] * u[0] + att_i[3] * u[1]) / norm;
    Ok((cos.clamp(-1.0, 1.0) - 1.0).exp())
}

/// Fused message `qᵀ(log λ_j − log λ_i)`. Antisymmetric in `i` and `j`.
pub fn msg_fused(log_lambda_i: &[f64], log_lambda_j: &[f64], q: &[f64]) -> Result<f64> {
    check_dims(log_lambda_i.len(), log_lambda_j.len(), q.len())?;
    let diff: Vec<f64> = log_lambda_i
        .iter()
        .zip(log_lambda_j)
        .map(|(a, b)| b - a)
        .collect();
    Ok(dot(q, &diff))
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn spatial_identities() {
        let phi = [0.3, -1.0, 2.0, 0.0, 0.5, 0.1, 0.7];
        assert!((msg_spatial(&phi, &phi, &[1.0; 7]).unwrap() - 7.0).abs() < 1e-12);
        assert_eq!(msg_spatial(&phi, &[9.0; 7], &[0.0; 7]).unwrap(), 0.0);
        let zero = [0.0; 7];
        let mut j = [0.0; 7];
        j[0] = 1.0;
        let mut w = [0.0; 7];
        w[0] = 2.0;
        assert!((msg_spatial(&zero, &j, &w).unwrap() - 2.0 * E).abs() < 1e-12);
    }

    #[test]
    fn action_two_dim_case() {
        let v = msg_action(&[0.0, 0.0], &[2f64.ln(), 3f64.ln()], &[1.0, 1.0]).unwrap();
        assert!((v - 5.0).abs() < 1e-12);
        assert!((msg_action(&[1.0; 5], &[1.0; 5], &[1.0; 5]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn appearance_is_symmetric() {
        let a = [0.0, 0.0];
        let b = [-1.0, 0.5];
        let w = [1.0, 2.0];
        assert!((msg_appearance(&a, &b, &w).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(
            msg_appearance(&a, &b, &w).unwrap(),
            msg_appearance(&b, &a, &w).unwrap()
        );
        assert_eq!(msg_appearance(&b, &b, &w).unwrap(), 0.0);
    }

    #[test]
    fn attention_extremes() {
        // i at origin looking along +depth, j straight ahead
        let i = [0.0, 0.0, 0.0, 1.0];
        let ahead = [0.0, 1.0, 0.0, 0.0];
        assert!((msg_attention(&i, &ahead, 1.0).unwrap() - 1.0).abs() < 1e-12);
        let behind = [0.0, -1.0, 0.0, 0.0];
        assert!((msg_attention(&i, &behind, 1.0).unwrap() - (-2.0f64).exp()).abs() < 1e-12);
        let diag = [3.0, 4.0, 0.0, 0.0];
        assert!((msg_attention(&i, &diag, 1.0).unwrap() - (-0.2f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn attention_degenerate_direction_is_neutral() {
        let i = [1.0, 2.0, 0.0, 1.0];
        let j = [1.0, 2.0, 1.0, 0.0];
        assert!((msg_attention(&i, &j, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        // c_att = 0 collapses a pure depth offset
        let k = [1.0, 5.0, 1.0, 0.0];
        assert!((msg_attention(&i, &k, 0.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn fused_identities() {
        let li = [0.0, 0.0];
        let lj = [2f64.ln(), 4f64.ln()];
        let v = msg_fused(&li, &lj, &[1.0, 1.0]).unwrap();
        assert!((v - 8f64.ln()).abs() < 1e-12);
        assert_eq!(msg_fused(&lj, &li, &[1.0, 1.0]).unwrap(), -v);
        assert_eq!(msg_fused(&lj, &lj, &[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        assert!(matches!(
            msg_spatial(&[0.0; 7], &[0.0; 6], &[1.0; 7]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(msg_attention(&[0.0; 3], &[0.0; 4], 1.0).is_err());
        assert!(msg_fused(&[0.0], &[0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn exponent_is_clamped() {
        let v = msg_spatial(&[0.0], &[1000.0], &[1.0]).unwrap();
        assert_eq!(v, EXP_CLAMP.exp());
    }
}
