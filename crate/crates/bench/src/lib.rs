//! Shared inputs for the criterion benchmarks in `benches/`.

use bkdv_core::correlators::{FreeEnergy, OpenCorrelators};
use bkdv_core::jet_ring::{self, parse_jets, JetExpr};
use bkdv_core::reference;
use std::collections::BTreeMap;

pub fn fo2() -> JetExpr {
    parse_jets(reference::FO2_JETS).expect("fixture parses")
}

/// Correlator engine for `p <= 2` built from the published `F^o_2`.
pub fn engine_p2() -> OpenCorrelators {
    let mut e = BTreeMap::new();
    e.insert(1, FreeEnergy::Log(jet_ring::open_f1()));
    e.insert(2, FreeEnergy::Rational(fo2()));
    OpenCorrelators::new(e)
}
