//! Global interned generator alphabet.
//!
//! Indexed families (`v3`, `r0`, `I2`, `t5`, ...) are encoded directly in the
//! id, so their relative order never depends on registration order; any other
//! name is interned on first use. Ordering of ids feeds the monomial order and
//! hence serialization, which must be reproducible across runs and caches.

use std::fmt;
use std::sync::{OnceLock, RwLock};

const FAMILY_SHIFT: u32 = 16;
const INDEX_MASK: u32 = (1 << FAMILY_SHIFT) - 1;

/// Indexed generator families, in id order.
const FAMILIES: [char; 9] = ['v', 'r', 'u', 'I', 'J', 'U', 'W', 't', 's'];
const OTHER_FAMILY: u32 = 15;

#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen(u32);

fn others() -> &'static RwLock<Vec<String>> {
    static TABLE: OnceLock<RwLock<Vec<String>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(Vec::new()))
}

impl Gen {
    /// Generator in an indexed family, e.g. `Gen::indexed('v', 2)` is `v2`.
    pub fn indexed(family: char, index: u32) -> Gen {
        let f = FAMILIES
            .iter()
            .position(|&c| c == family)
            .unwrap_or_else(|| panic!("unknown generator family {family:?}"));
        assert!(index <= INDEX_MASK, "generator index too large");
        Gen(((f as u32) << FAMILY_SHIFT) | index)
    }

    /// Look up or intern a generator by name. `v`, `r`, `u` alias `v0`, `r0`, `u0`.
    pub fn named(name: &str) -> Gen {
        if let Some((fam, idx)) = split_indexed(name) {
            return Gen::indexed(fam, idx);
        }
        {
            let table = others().read().expect("generator table poisoned");
            if let Some(i) = table.iter().position(|n| n == name) {
                return Gen((OTHER_FAMILY << FAMILY_SHIFT) | i as u32);
            }
        }
        let mut table = others().write().expect("generator table poisoned");
        let i = match table.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                table.push(name.to_string());
                table.len() - 1
            }
        };
        Gen((OTHER_FAMILY << FAMILY_SHIFT) | i as u32)
    }

    pub fn v(k: u32) -> Gen {
        Gen::indexed('v', k)
    }
    pub fn r(k: u32) -> Gen {
        Gen::indexed('r', k)
    }
    pub fn u(k: u32) -> Gen {
        Gen::indexed('u', k)
    }
    pub fn i(k: u32) -> Gen {
        Gen::indexed('I', k)
    }
    pub fn j(k: u32) -> Gen {
        Gen::indexed('J', k)
    }
    pub fn t(k: u32) -> Gen {
        Gen::indexed('t', k)
    }
    pub fn s(k: u32) -> Gen {
        Gen::indexed('s', k)
    }

    /// Raw id, stable across runs for indexed families.
    pub fn id(self) -> u32 {
        self.0
    }

    /// Family letter and index for indexed generators.
    pub fn family(self) -> Option<(char, u32)> {
        let f = self.0 >> FAMILY_SHIFT;
        FAMILIES
            .get(f as usize)
            .map(|&c| (c, self.0 & INDEX_MASK))
    }

    /// Jet order of `v_k`, `r_k`, `u_k`.
    pub fn jet_order(self) -> Option<u32> {
        match self.family() {
            Some(('v' | 'r' | 'u', k)) => Some(k),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        if let Some((c, k)) = self.family() {
            return format!("{c}{k}");
        }
        let table = others().read().expect("generator table poisoned");
        table[(self.0 & INDEX_MASK) as usize].clone()
    }
}

fn split_indexed(name: &str) -> Option<(char, u32)> {
    let mut chars = name.chars();
    let c = chars.next()?;
    if !FAMILIES.contains(&c) {
        return None;
    }
    let rest = chars.as_str();
    if rest.is_empty() {
        return matches!(c, 'v' | 'r' | 'u').then_some((c, 0));
    }
    if !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok().map(|k| (c, k))
}

impl fmt::Debug for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexed_names_roundtrip() {
        for name in ["v0", "r3", "u1", "I2", "J0", "U1", "U2", "W1", "t7", "s0"] {
            assert_eq!(Gen::named(name).name(), name);
        }
        assert_eq!(Gen::named("v"), Gen::v(0));
        assert_eq!(Gen::named("r"), Gen::r(0));
    }

    #[test]
    fn other_names_are_interned_once() {
        let a = Gen::named("lambda_test");
        let b = Gen::named("lambda_test");
        assert_eq!(a, b);
        assert_eq!(a.name(), "lambda_test");
        assert!(a.family().is_none());
        assert_ne!(Gen::named("x"), Gen::named("y"));
    }

    #[test]
    fn family_order_is_fixed() {
        assert!(Gen::v(5) < Gen::r(0));
        assert!(Gen::r(9) < Gen::u(1));
        assert!(Gen::named("zz") > Gen::s(100));
    }
}
