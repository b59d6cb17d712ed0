//! Adapting a global schedule to grids with absent sites.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::code::CodeSpec;
use crate::error::Result;
use crate::metrics::{couplers_of_expansion, Coupler, DistanceMode};
use crate::schedule::{GateKind, Schedule};
use crate::tracker::{expand_schedule, AbsentSiteMap, RoundExpansion};
use crate::verify::ActiveCode;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Adaptation {
    /// The global schedule is unchanged; the adaptation lives in the per-qubit expansion.
    pub schedule: Schedule,
    pub extra_couplers: Vec<Coupler>,
    /// SWAPs with padding qubits, including those replacing dropped CXSWAPs.
    pub padding_swaps: usize,
    pub dropped_gates: usize,
}

fn pairs(code: &CodeSpec, e: &RoundExpansion) -> BTreeSet<(usize, usize)> {
    couplers_of_expansion(code, e, DistanceMode::Torus)
        .couplers
        .iter()
        .map(|c| (code.site_of(c.a), code.site_of(c.b)))
        .collect()
}

pub fn adapt_absent_sites(code: &CodeSpec, s: &Schedule, map: &AbsentSiteMap) -> Result<Adaptation> {
    ActiveCode::new(code, map)?;
    let full = expand_schedule(code, s, &AbsentSiteMap::none())?;
    let adapted = expand_schedule(code, s, map)?;
    let before = pairs(code, &full);
    let extra_couplers = couplers_of_expansion(code, &adapted, DistanceMode::Torus)
        .couplers
        .into_iter()
        .filter(|c| !before.contains(&(code.site_of(c.a), code.site_of(c.b))))
        .collect();
    let count = |e: &RoundExpansion| e.layers.iter().map(|l| l.gates.len()).sum::<usize>();
    let padding_swaps =
        adapted.layers.iter().flat_map(|l| &l.gates).filter(|g| g.padding && g.kind == GateKind::Swap).count();
    Ok(Adaptation {
        schedule: s.clone(),
        extra_couplers,
        padding_swaps,
        dropped_gates: count(&full) - count(&adapted) + padding_swaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{QubitId, Role};
    use crate::schedule::{build_louvre7, Louvre7Options};
    use crate::tracker::Strategy;

    #[test]
    fn empty_map_changes_nothing() {
        let code = CodeSpec::from_text(3, 3, "1+y+xy", "1+x+xy").unwrap();
        let s = build_louvre7(&code, &Louvre7Options::default()).unwrap();
        let a = adapt_absent_sites(&code, &s, &AbsentSiteMap::none()).unwrap();
        assert!(a.extra_couplers.is_empty());
        assert_eq!((a.padding_swaps, a.dropped_gates), (0, 0));
        assert_eq!(a.schedule, s);
    }

    #[test]
    fn out_of_range_qubit_is_named() {
        let code = CodeSpec::from_text(3, 3, "1+y+xy", "1+x+xy").unwrap();
        let s = build_louvre7(&code, &Louvre7Options::default()).unwrap();
        let map = AbsentSiteMap { absent: vec![QubitId::new(5, 0, Role::L)], strategy: Strategy::Padding };
        let err = adapt_absent_sites(&code, &s, &map).unwrap_err().to_string();
        assert!(err.contains("L(5,0)"), "{err}");
    }
}
