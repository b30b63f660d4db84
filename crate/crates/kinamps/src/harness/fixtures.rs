//! Reference expressions shipped as text fixtures in the canonical grammar.

use crate::diffcalc::Theory;

pub const A3: &str = include_str!("../../fixtures/a3.txt");
pub const M3: &str = include_str!("../../fixtures/m3.txt");
pub const A4: &str = include_str!("../../fixtures/a4.txt");
pub const M4: &str = include_str!("../../fixtures/m4.txt");

/// The reference expression for a theory and leg count, when one is shipped.
pub fn golden_fixture(theory: Theory, n: usize) -> Option<&'static str> {
    match (theory, n) {
        (Theory::YM, 3) => Some(A3),
        (Theory::GR, 3) => Some(M3),
        (Theory::YM, 4) => Some(A4),
        (Theory::GR, 4) => Some(M4),
        _ => None,
    }
}
