//! Four-bit joint action register.
//!
//! Bit `i` of the register is `a[i] = (a >> i) & 1`; a two-bit field is
//! `a[i,j] = 2·a[i] + a[j]`.
//!
//! Voice (`q = 0`): `a[0,1]` is the power offset of BS b and `a[2,3]` the
//! power offset of BS ℓ, both through [`pcode`].
//!
//! Data (`q = 1`): `a[0]` powers BS b up/down by 1 dB, `a[1]` does the same
//! for BS ℓ, `a[2]` steps the beam of BS ℓ and `a[3]` the beam of BS b.
//! A zero bit means down, a one bit means up.

use std::fmt;

use crate::error::{Error, Result};

/// Number of joint actions.
pub const N_ACTIONS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionRegister(u8);

impl ActionRegister {
    pub fn new(value: u8) -> Result<Self> {
        if value as usize >= N_ACTIONS {
            return Err(Error::invalid("action", format!("must be < 16, got {value}")));
        }
        Ok(ActionRegister(value))
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < N_ACTIONS, "action index {index} out of range");
        ActionRegister(index as u8)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn bit(self, i: u8) -> u8 {
        (self.0 >> i) & 1
    }

    pub fn field(self, i: u8, j: u8) -> u8 {
        2 * self.bit(i) + self.bit(j)
    }
}

impl fmt::LowerHex for ActionRegister {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::LowerHex::fmt(&self.0, f)
    }
}

/// Power offset in dB selected by a two-bit code: 00 → −3, 01 → −1,
/// 10 → +1, 11 → +3.
pub fn pcode(field: u8) -> f64 {
    match field & 0b11 {
        0 => -3.0,
        1 => -1.0,
        2 => 1.0,
        _ => 3.0,
    }
}

fn pcode_inverse(delta: f64) -> Option<u8> {
    (0..4).find(|&c| pcode(c) == delta)
}

/// The command set carried by one register value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCommand {
    pub power_delta_b: f64,
    pub power_delta_l: f64,
    /// +1 / −1; zero on voice bearers.
    pub beam_step_l: i8,
    pub beam_step_b: i8,
}

fn updown(bit: u8) -> i8 {
    if bit == 1 {
        1
    } else {
        -1
    }
}

pub fn decode_action(a: ActionRegister, q: u8) -> JointCommand {
    if q == 0 {
        JointCommand {
            power_delta_b: pcode(a.field(0, 1)),
            power_delta_l: pcode(a.field(2, 3)),
            beam_step_l: 0,
            beam_step_b: 0,
        }
    } else {
        JointCommand {
            power_delta_b: updown(a.bit(0)) as f64,
            power_delta_l: updown(a.bit(1)) as f64,
            beam_step_l: updown(a.bit(2)),
            beam_step_b: updown(a.bit(3)),
        }
    }
}

/// Inverse of [`decode_action`].
pub fn encode_action(cmd: &JointCommand, q: u8) -> Result<ActionRegister> {
    let bad = || Error::invalid("command", format!("{cmd:?} is not representable for q={q}"));
    let value = if q == 0 {
        let b = pcode_inverse(cmd.power_delta_b).ok_or_else(bad)?;
        let l = pcode_inverse(cmd.power_delta_l).ok_or_else(bad)?;
        // a[0,1] = 2·a0 + a1, a[2,3] = 2·a2 + a3
        let (a0, a1) = (b >> 1, b & 1);
        let (a2, a3) = (l >> 1, l & 1);
        a0 | (a1 << 1) | (a2 << 2) | (a3 << 3)
    } else {
        let bit = |v: f64| -> Result<u8> {
            match v {
                x if x == 1.0 => Ok(1),
                x if x == -1.0 => Ok(0),
                _ => Err(bad()),
            }
        };
        bit(cmd.power_delta_b)?
            | (bit(cmd.power_delta_l)? << 1)
            | (bit(cmd.beam_step_l as f64)? << 2)
            | (bit(cmd.beam_step_b as f64)? << 3)
    };
    ActionRegister::new(value)
}

/// Per-step reward before terminal adjustments:
/// `(p(a[0,1]) − p(a[2,3]))·(1 − q) + (γ_b + γ_ℓ)·q`, SINRs in dB.
pub fn reward(a: ActionRegister, sinr_b_db: f64, sinr_l_db: f64, q: u8) -> f64 {
    if q == 0 {
        pcode(a.field(0, 1)) - pcode(a.field(2, 3))
    } else {
        sinr_b_db + sinr_l_db
    }
}
