// SPDX-License-Identifier: Apache-2.0

//! The in-scope life-cycle states of a variable at one program point.
//!
//! Four flags describe a variable: allocated to storage (A), defined by
//! source semantics (D), knowable from current program state (K) and
//! holding a program-live value (L). Reductions between them leave eight of
//! the sixteen combinations.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LifecycleName {
    InScopeOnly,
    Unknowable,
    KnowablePDead,
    UnallocatedPLive,
    AllocatedUninit,
    AllocatedStale,
    AllocatedPDead,
    NormalPLive,
}

/// A reduction between the flags that a state must respect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Implication {
    LiveImpliesDefined,
    KnowableImpliesDefined,
    AllocatedLiveImpliesKnowable,
    /// A program-live value is recoverable whether or not it is allocated.
    LiveImpliesKnowable,
}

impl fmt::Display for Implication {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Implication::LiveImpliesDefined => "live => defined",
            Implication::KnowableImpliesDefined => "knowable => defined",
            Implication::AllocatedLiveImpliesKnowable => "allocated & live => knowable",
            Implication::LiveImpliesKnowable => "live => knowable",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LifecycleState {
    pub allocated: bool,
    pub defined: bool,
    pub knowable: bool,
    pub live: bool,
    pub name: LifecycleName,
}

/// Maps a flag combination to its named state, or names the first
/// reduction it violates.
pub fn classify_lifecycle(allocated: bool, defined: bool, knowable: bool, live: bool) -> Result<LifecycleState> {
    use LifecycleName::*;
    let violated = if live && !defined {
        Some(Implication::LiveImpliesDefined)
    } else if knowable && !defined {
        Some(Implication::KnowableImpliesDefined)
    } else if allocated && live && !knowable {
        Some(Implication::AllocatedLiveImpliesKnowable)
    } else if live && !knowable {
        Some(Implication::LiveImpliesKnowable)
    } else {
        None
    };
    if let Some(imp) = violated {
        return Err(Error::InvalidState(imp));
    }
    let name = match (allocated, defined, knowable, live) {
        (false, false, false, false) => InScopeOnly,
        (false, true, false, false) => Unknowable,
        (false, true, true, false) => KnowablePDead,
        (false, true, true, true) => UnallocatedPLive,
        (true, false, false, false) => AllocatedUninit,
        (true, true, false, false) => AllocatedStale,
        (true, true, true, false) => AllocatedPDead,
        (true, true, true, true) => NormalPLive,
        other => return Err(Error::Invariant(format!("unclassified lifecycle flags {other:?}"))),
    };
    Ok(LifecycleState {
        allocated,
        defined,
        knowable,
        live,
        name,
    })
}
