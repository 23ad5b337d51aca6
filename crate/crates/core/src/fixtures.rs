//! Small reference markets used by the test suites, the benches and the
//! README walkthrough.

use crate::market::Market;
use crate::text::parse_market;

pub const MARKET1: &str = include_str!("../fixtures/market1.market");
pub const MARKET2: &str = include_str!("../fixtures/market2.market");
pub const MARKET3: &str = include_str!("../fixtures/market3.market");
pub const MARKET4: &str = include_str!("../fixtures/market4.market");
/// Market 4 with Ana's ordinal-scale-economies preference.
pub const MARKET5: &str = include_str!("../fixtures/market5.market");
/// Single-agent preference with scale economies that fails the
/// single-contract variant.
pub const SCALE_ECONOMIES: &str = include_str!("../fixtures/scale_economies.market");
pub const BILATERAL_ATM: &str = include_str!("../fixtures/bilateral.atm");
pub const MIXED_ATM: &str = include_str!("../fixtures/mixed.atm");

pub const ALL: [&str; 6] = [MARKET1, MARKET2, MARKET3, MARKET4, MARKET5, SCALE_ECONOMIES];

fn load(text: &str) -> Market {
    parse_market(text).expect("bundled fixture is valid")
}

pub fn market1() -> Market {
    load(MARKET1)
}

pub fn market2() -> Market {
    load(MARKET2)
}

pub fn market3() -> Market {
    load(MARKET3)
}

pub fn market4() -> Market {
    load(MARKET4)
}

pub fn market5() -> Market {
    load(MARKET5)
}

pub fn scale_economies() -> Market {
    load(SCALE_ECONOMIES)
}

pub fn all() -> Vec<Market> {
    ALL.iter().map(|t| load(t)).collect()
}
